//! Environment construction: classes, structure flattening and embedding,
//! parent projections, instances, reducible definitions and queries.

use std::collections::{BTreeSet, HashMap};

use crate::synth::LocalInstances;
use crate::syntax::{
    Binder, BinderStyle, ClassSyntax, Command, DefSyntax, FieldKind, InstanceBody, InstanceSyntax,
    SectionItem, SourceFile,
};
use crate::term::{unify_in, MetaId, Substitution, Term, Unfold};

pub const DEFAULT_PRIORITY: u32 = 1000;
pub const PROJECTION_PRIORITY: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Term,
    pub mode: ParamMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructureMode {
    /// `old_structure_cmd`: ancestors' fields are copied flat.
    Old,
    /// Parents are embedded as `to_<parent>` fields.
    New,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub kind: FieldKind,
    pub ty: Term,
    /// Class that declared the field.
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// Instance binders of the declaration: unbundled superclass constraints.
    pub constraints: Vec<Binder>,
    pub parents: Vec<Term>,
    pub own_fields: Vec<Field>,
    /// Record layout: flat leaves in old mode; `to_<parent>` fields, copied
    /// fields and own fields in new mode.
    pub fields: Vec<Field>,
    /// Every primitive field reachable through the layout.
    pub leaves: Vec<Field>,
    pub mode: StructureMode,
    /// `false` for `structure` declarations.
    pub is_class: bool,
    pub line: usize,
}

impl ClassDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn out_positions(&self) -> Vec<usize> {
        (0..self.params.len()).filter(|&i| self.params[i].mode == ParamMode::Out).collect()
    }

    pub fn leaf(&self, name: &str) -> Option<&Field> {
        self.leaves.iter().find(|f| f.name == name)
    }

    /// The class applied to its own parameters as variables.
    pub fn self_term(&self) -> Term {
        Term::app(&self.name, self.params.iter().map(|p| Term::var(&p.name)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    User,
    Projection,
    /// A definition registered with `attribute [instance]`.
    Attribute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDecl {
    pub name: String,
    pub binders: Vec<Binder>,
    pub head: Term,
    pub priority: u32,
    /// `None` for opaque bodies.
    pub assigns: Option<Vec<(String, Term)>>,
    pub provenance: Provenance,
    pub line: usize,
    /// Declaration index, the tie-breaker among equal priorities.
    pub order: usize,
}

impl InstanceDecl {
    pub fn class(&self) -> &str {
        self.head.head().unwrap_or("")
    }

    pub fn instance_binders(&self) -> impl Iterator<Item = &Binder> {
        self.binders.iter().filter(|b| b.style == BinderStyle::Instance)
    }

    /// Names of non-instance binders (the rigid variables of the rule).
    pub fn var_binders(&self) -> impl Iterator<Item = &str> {
        self.binders
            .iter()
            .filter(|b| b.style != BinderStyle::Instance)
            .filter_map(|b| b.name.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefDecl {
    pub name: String,
    pub binders: Vec<Binder>,
    pub ty: Option<Term>,
    pub body: Option<Term>,
    pub line: usize,
}

impl DefDecl {
    fn explicit(&self) -> impl Iterator<Item = &Binder> {
        self.binders.iter().filter(|b| b.style == BinderStyle::Explicit)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BuildErrorKind {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown parent class `{0}`")]
    UnknownParent(String),
    #[error("`{0}` is not a class")]
    NotAClass(String),
    #[error("unknown declaration `{0}`")]
    UnknownDecl(String),
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("field `{field}` of `{class}` is inherited with conflicting types")]
    ConflictingField { class: String, field: String },
    #[error("field `{field}` of `{class}` is ambiguous between parent structures")]
    AmbiguousField { class: String, field: String },
    #[error("`{class}` has no field `{field}`")]
    UnknownField { class: String, field: String },
    #[error("`{name}` expects {expected} arguments, got {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("variable `{var}` is not bound in `{decl}`")]
    UnboundVariable { decl: String, var: String },
    #[error("unknown option `{0}`")]
    UnknownOption(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct BuildError {
    pub line: usize,
    pub kind: BuildErrorKind,
}

/// A `#synth` request together with the context it was written in.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub goal: Term,
    pub line: usize,
    /// Index of the input file the query came from.
    pub file: usize,
    pub locals: LocalInstances,
    /// Number of global instances declared before the query.
    pub visible: usize,
}

/// Registry of classes, instances and definitions.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    classes: HashMap<String, ClassDecl>,
    class_order: Vec<String>,
    instances: Vec<InstanceDecl>,
    instance_index: HashMap<String, usize>,
    candidates: HashMap<String, Vec<usize>>,
    defs: HashMap<String, DefDecl>,
    /// `C.f` projection functions: name ↦ (class, field).
    projections: HashMap<String, (String, String)>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a single parsed file.
    pub fn from_source(file: &SourceFile) -> Result<(Environment, Vec<Query>), BuildError> {
        let mut b = EnvBuilder::new();
        b.add_file(file)?;
        Ok(b.finish())
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.get(name).filter(|c| c.is_class)
    }

    /// Class or structure.
    pub fn record(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.get(name)
    }

    /// Classes and structures in declaration order.
    pub fn records(&self) -> impl Iterator<Item = &ClassDecl> {
        self.class_order.iter().map(|n| &self.classes[n])
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.records().filter(|c| c.is_class)
    }

    pub fn instances(&self) -> &[InstanceDecl] {
        &self.instances
    }

    pub fn instance(&self, name: &str) -> Option<&InstanceDecl> {
        self.instance_index.get(name).map(|&i| &self.instances[i])
    }

    pub fn def(&self, name: &str) -> Option<&DefDecl> {
        self.defs.get(name)
    }

    /// Global candidates for `class`: priority descending, then declaration
    /// order ascending.
    pub fn candidates(&self, class: &str) -> impl Iterator<Item = &InstanceDecl> {
        self.candidates
            .get(class)
            .into_iter()
            .flatten()
            .map(|&i| &self.instances[i])
    }

    /// The environment as seen by a query: only the first `n` instances.
    pub fn truncated(&self, n: usize) -> Environment {
        let mut env = self.clone();
        if n < env.instances.len() {
            env.instances.truncate(n);
            env.instance_index.retain(|_, i| *i < n);
            env.sort_candidates();
        }
        env
    }

    fn sort_candidates(&mut self) {
        let mut by_class: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, inst) in self.instances.iter().enumerate() {
            by_class.entry(inst.class().to_string()).or_default().push(i);
        }
        for list in by_class.values_mut() {
            let insts = &self.instances;
            list.sort_by_key(|&i| (std::cmp::Reverse(insts[i].priority), insts[i].order));
        }
        self.candidates = by_class;
    }

    /// Infer the class application an instance term inhabits, together with
    /// the values of the instance's binders. Metavariables left in the result
    /// stand for parameters the term does not determine.
    pub fn instantiate(
        &self,
        t: &Term,
        locals: &LocalInstances,
        s: &mut Substitution,
        next: &mut MetaId,
    ) -> Option<(Term, HashMap<String, Term>)> {
        let Term::Const(name, fillers) = t else { return None };
        if fillers.is_empty() {
            if let Some(ty) = locals.get(name) {
                return Some((ty.clone(), HashMap::new()));
            }
        }
        let inst = self.instance(name)?;
        let inst_binders: Vec<&Binder> = inst.instance_binders().collect();
        if inst_binders.len() != fillers.len() {
            return None;
        }
        let mut map = HashMap::new();
        for v in inst.var_binders() {
            map.insert(v.to_string(), Term::Meta(*next));
            *next += 1;
        }
        let mut trail = Vec::new();
        for (b, filler) in inst_binders.iter().zip(fillers) {
            let expected = b.ty.subst_vars(&map);
            let (got, _) = self.instantiate(filler, locals, s, next)?;
            if !unify_in(&expected, &got, self, s, &mut trail) {
                return None;
            }
        }
        for (b, filler) in inst_binders.iter().zip(fillers) {
            if let Some(n) = &b.name {
                map.insert(n.clone(), filler.clone());
            }
        }
        let head = inst.head.subst_vars(&map);
        let map = map.into_iter().map(|(k, v)| (k, s.apply(&v))).collect();
        Some((s.apply(&head), map))
    }

    /// Value of leaf field `field` in the instance denoted by `t`.
    ///
    /// Projection instances forward to their argument; assigned fields are
    /// instantiated; anything else is the opaque constant `<instance>.<field>`
    /// applied to the instance's arguments. `None` if `t` is not a global
    /// instance term or the field does not exist.
    pub fn field_value(&self, t: &Term, field: &str) -> Option<Term> {
        let Term::Const(name, fillers) = t else { return None };
        let inst = self.instance(name)?;
        let class = self.classes.get(inst.class())?;
        class.leaf(field)?;
        if inst.provenance == Provenance::Projection {
            return self.field_value(fillers.first()?, field);
        }
        let opaque = || Term::app(format!("{name}.{field}"), fillers.clone());
        let Some(assigns) = &inst.assigns else { return Some(opaque()) };
        let binding = || {
            let mut next = 0;
            self.instantiate(t, &LocalInstances::new(), &mut Substitution::new(), &mut next)
                .map(|(_, m)| m)
                .unwrap_or_default()
        };
        if let Some((_, v)) = assigns.iter().find(|(f, _)| f == field) {
            return Some(v.subst_vars(&binding()));
        }
        // a whole parent given at once: `to_P := t`
        for (f, v) in assigns {
            let Some(parent) = f.strip_prefix("to_") else { continue };
            if self.classes.get(parent).is_some_and(|p| p.leaf(field).is_some()) {
                let sub = crate::term::normalize(&v.subst_vars(&binding()), self);
                if let Some(val) = self.field_value(&sub, field) {
                    return Some(val);
                }
            }
        }
        Some(opaque())
    }
}

impl Unfold for Environment {
    fn unfold(&self, head: &str, args: &[Term]) -> Option<Term> {
        if let Some(d) = self.defs.get(head) {
            let body = d.body.as_ref()?;
            let names: Vec<&Binder> = d.explicit().collect();
            if names.len() != args.len() {
                return None;
            }
            let map = names
                .iter()
                .zip(args)
                .filter_map(|(b, a)| Some((b.name.clone()?, a.clone())))
                .collect();
            return Some(body.subst_vars(&map));
        }
        if let Some((_, field)) = self.projections.get(head) {
            let [arg] = args else { return None };
            let inst = crate::term::whnf(arg, self);
            return self.field_value(&inst, field);
        }
        None
    }

    fn is_reducible(&self, head: &str) -> bool {
        self.defs.get(head).is_some_and(|d| d.body.is_some()) || self.projections.contains_key(head)
    }
}

/// Copy parents' fields flat, followed by own fields. A repeated field with
/// the same type is skipped; with a different type it is an error.
pub fn flatten_class(c: &ClassDecl, env: &Environment) -> Result<ClassDecl, BuildErrorKind> {
    let mut fields: Vec<Field> = Vec::new();
    let push = |f: Field, fields: &mut Vec<Field>| match fields.iter().find(|g| g.name == f.name) {
        Some(g) if g.ty == f.ty => Ok(()),
        Some(_) => Err(BuildErrorKind::ConflictingField { class: c.name.clone(), field: f.name }),
        None => {
            fields.push(f);
            Ok(())
        }
    };
    for parent in &c.parents {
        for f in parent_leaves(parent, env)? {
            push(f, &mut fields)?;
        }
    }
    for f in &c.own_fields {
        push(f.clone(), &mut fields)?;
    }
    Ok(ClassDecl { fields: fields.clone(), leaves: fields, mode: StructureMode::Old, ..c.clone() })
}

/// Embed the first parent whole as `to_<parent>`. A later parent sharing an
/// ancestor with the ones before contributes only its remaining fields,
/// copied flat; an unrelated parent is embedded as well.
pub fn embed_parents(c: &ClassDecl, env: &Environment) -> Result<ClassDecl, BuildErrorKind> {
    let mut layout: Vec<Field> = Vec::new();
    let mut leaves: Vec<Field> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let ambiguous = |field: &str| BuildErrorKind::AmbiguousField { class: c.name.clone(), field: field.into() };

    for parent in &c.parents {
        let pname = parent.head().unwrap_or_default().to_string();
        let mut closure = ancestor_closure(&pname, env).map_err(|_| BuildErrorKind::UnknownParent(pname.clone()))?;
        closure.insert(pname.clone());
        let shares = !closure.is_disjoint(&seen);
        let pleaves = parent_leaves(parent, env)?;
        if shares {
            for f in pleaves {
                match leaves.iter().find(|g| g.name == f.name) {
                    Some(g) if g.origin == f.origin => {}
                    Some(_) => return Err(ambiguous(&f.name)),
                    None => {
                        layout.push(f.clone());
                        leaves.push(f);
                    }
                }
            }
        } else {
            for f in &pleaves {
                if leaves.iter().any(|g| g.name == f.name) {
                    return Err(ambiguous(&f.name));
                }
            }
            layout.push(Field {
                name: format!("to_{pname}"),
                kind: FieldKind::Data,
                ty: parent.clone(),
                origin: c.name.clone(),
            });
            leaves.extend(pleaves);
        }
        seen.extend(closure);
    }
    for f in &c.own_fields {
        if leaves.iter().any(|g| g.name == f.name) || layout.iter().any(|g| g.name == f.name) {
            return Err(ambiguous(&f.name));
        }
        layout.push(f.clone());
        leaves.push(f.clone());
    }
    Ok(ClassDecl { fields: layout, leaves, mode: StructureMode::New, ..c.clone() })
}

fn parent_leaves(parent: &Term, env: &Environment) -> Result<Vec<Field>, BuildErrorKind> {
    let pname = parent.head().unwrap_or_default();
    let p = env.record(pname).ok_or_else(|| BuildErrorKind::UnknownParent(pname.into()))?;
    let map: HashMap<String, Term> =
        p.params.iter().map(|q| q.name.clone()).zip(parent.args().iter().cloned()).collect();
    Ok(p.leaves.iter().map(|f| Field { ty: f.ty.subst_vars(&map), ..f.clone() }).collect())
}

/// One instance per direct parent: `<c>.to_<parent> : Π {params} [c params], parent`.
pub fn generate_projections(c: &ClassDecl) -> Vec<InstanceDecl> {
    c.parents
        .iter()
        .map(|parent| {
            let mut binders: Vec<Binder> = c.params.iter().map(|p| Binder::implicit(&p.name, p.ty.clone())).collect();
            binders.push(Binder::instance(None, c.self_term()));
            InstanceDecl {
                name: format!("{}.to_{}", c.name, parent.head().unwrap_or_default()),
                binders,
                head: parent.clone(),
                priority: PROJECTION_PRIORITY,
                assigns: None,
                provenance: Provenance::Projection,
                line: c.line,
                order: 0,
            }
        })
        .collect()
}

/// Transitive `extends` ancestors, excluding the class itself and any
/// superclass expressed through an instance binder.
pub fn ancestor_closure(c: &str, env: &Environment) -> Result<BTreeSet<String>, BuildErrorKind> {
    let root = env.record(c).ok_or_else(|| BuildErrorKind::UnknownClass(c.into()))?;
    let mut out = BTreeSet::new();
    let mut stack: Vec<&ClassDecl> = vec![root];
    while let Some(cur) = stack.pop() {
        for p in &cur.parents {
            let name = p.head().unwrap_or_default();
            if out.insert(name.to_string()) {
                stack.push(env.record(name).ok_or_else(|| BuildErrorKind::UnknownParent(name.into()))?);
            }
        }
    }
    Ok(out)
}

/// Incremental environment builder. Files are added in import order; the
/// structure mode resets at each file.
#[derive(Clone, Debug)]
pub struct EnvBuilder {
    env: Environment,
    queries: Vec<Query>,
    old_mode: bool,
    file: usize,
    line: usize,
}

impl Default for EnvBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl EnvBuilder {
    pub fn new() -> Self {
        EnvBuilder { env: Environment::new(), queries: Vec::new(), old_mode: false, file: 0, line: 0 }
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn add_file(&mut self, file: &SourceFile) -> Result<(), BuildError> {
        self.old_mode = false;
        for (i, cmd) in file.commands.iter().enumerate() {
            self.line = file.line_of(i);
            self.command(cmd).map_err(|kind| BuildError { line: self.line, kind })?;
        }
        self.file += 1;
        Ok(())
    }

    pub fn finish(mut self) -> (Environment, Vec<Query>) {
        self.env.sort_candidates();
        (self.env, self.queries)
    }

    fn command(&mut self, cmd: &Command) -> Result<(), BuildErrorKind> {
        match cmd {
            Command::SetOption { name, value } => {
                if name != "old_structure_cmd" {
                    return Err(BuildErrorKind::UnknownOption(name.clone()));
                }
                self.old_mode = *value;
                Ok(())
            }
            Command::Class(c) => self.class(c, true),
            Command::Structure(c) => self.class(c, false),
            Command::Instance(i) => self.instance(i),
            Command::Def(d) => self.def(d),
            Command::Attribute { name, .. } => self.attribute(name),
            Command::Synth(goal) => {
                self.check_class_app(goal)?;
                self.push_query(goal.clone(), LocalInstances::new());
                Ok(())
            }
            Command::Section(s) => {
                let mut locals = LocalInstances::new();
                let vars: Vec<String> = s
                    .binders
                    .iter()
                    .filter(|b| b.style != BinderStyle::Instance)
                    .filter_map(|b| b.name.clone())
                    .collect();
                let mut anon = 0;
                for b in s.binders.iter().filter(|b| b.style == BinderStyle::Instance) {
                    self.check_class_app(&b.ty)?;
                    self.check_bound("section", &b.ty, &vars)?;
                    let name = b.name.clone().unwrap_or_else(|| {
                        anon += 1;
                        format!("_inst_{anon}")
                    });
                    locals.push(name, b.ty.clone());
                }
                for item in &s.items {
                    match item {
                        SectionItem::LetI { name, ty, .. } => {
                            self.check_class_app(ty)?;
                            self.check_bound("section", ty, &vars)?;
                            locals.push(name.clone(), ty.clone());
                        }
                        SectionItem::Synth(goal) => {
                            self.check_class_app(goal)?;
                            self.check_bound("section", goal, &vars)?;
                            self.push_query(goal.clone(), locals.clone());
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn push_query(&mut self, goal: Term, locals: LocalInstances) {
        self.queries.push(Query {
            goal,
            line: self.line,
            file: self.file,
            locals,
            visible: self.env.instances.len(),
        });
    }

    fn fresh_name(&self, name: &str) -> Result<(), BuildErrorKind> {
        if self.env.classes.contains_key(name)
            || self.env.instance_index.contains_key(name)
            || self.env.defs.contains_key(name)
        {
            return Err(BuildErrorKind::Duplicate(name.into()));
        }
        Ok(())
    }

    /// Arity of every registered head occurring in `t`.
    fn check_arities(&self, t: &Term) -> Result<(), BuildErrorKind> {
        if let Term::Const(name, args) = t {
            let expected = if let Some(c) = self.env.classes.get(name) {
                Some(c.arity())
            } else {
                self.env.defs.get(name).map(|d| d.explicit().count())
            };
            if let Some(expected) = expected {
                if expected != args.len() {
                    return Err(BuildErrorKind::Arity { name: name.clone(), expected, found: args.len() });
                }
            }
            for a in args {
                self.check_arities(a)?;
            }
        }
        Ok(())
    }

    fn check_class_app(&self, t: &Term) -> Result<(), BuildErrorKind> {
        let name = t.head().ok_or_else(|| BuildErrorKind::NotAClass(t.to_string()))?;
        match self.env.classes.get(name) {
            None => Err(BuildErrorKind::UnknownClass(name.into())),
            Some(c) if !c.is_class => Err(BuildErrorKind::NotAClass(name.into())),
            Some(_) => self.check_arities(t),
        }
    }

    fn check_bound(&self, decl: &str, t: &Term, bound: &[String]) -> Result<(), BuildErrorKind> {
        let mut vs = Vec::new();
        t.vars(&mut vs);
        match vs.into_iter().find(|v| !bound.contains(v)) {
            Some(var) => Err(BuildErrorKind::UnboundVariable { decl: decl.into(), var }),
            None => Ok(()),
        }
    }

    fn class(&mut self, c: &ClassSyntax, is_class: bool) -> Result<(), BuildErrorKind> {
        self.fresh_name(&c.name)?;
        let mut params = Vec::new();
        let mut constraints = Vec::new();
        let mut bound: Vec<String> = Vec::new();
        for b in &c.binders {
            self.check_arities(&b.ty)?;
            self.check_bound(&c.name, &b.ty, &bound)?;
            match b.style {
                BinderStyle::Instance => {
                    self.check_class_app(&b.ty)?;
                    constraints.push(b.clone());
                }
                _ => {
                    let name = b.name.clone().unwrap_or_default();
                    bound.push(name.clone());
                    let mode = if b.out_param { ParamMode::Out } else { ParamMode::In };
                    params.push(Param { name, ty: b.ty.clone(), mode });
                }
            }
        }
        for p in &c.extends {
            let pname = p.head().unwrap_or_default();
            match self.env.classes.get(pname) {
                None => return Err(BuildErrorKind::UnknownParent(pname.into())),
                Some(pc) if pc.is_class != is_class => return Err(BuildErrorKind::NotAClass(pname.into())),
                Some(_) => {}
            }
            self.check_arities(p)?;
            self.check_bound(&c.name, p, &bound)?;
        }
        let own_fields = c
            .fields
            .iter()
            .map(|f| Field { name: f.name.clone(), kind: f.kind, ty: f.ty.clone(), origin: c.name.clone() })
            .collect();
        let decl = ClassDecl {
            name: c.name.clone(),
            params,
            constraints,
            parents: c.extends.clone(),
            own_fields,
            fields: Vec::new(),
            leaves: Vec::new(),
            mode: if self.old_mode { StructureMode::Old } else { StructureMode::New },
            is_class,
            line: self.line,
        };
        let decl = match decl.mode {
            StructureMode::Old => flatten_class(&decl, &self.env)?,
            StructureMode::New => embed_parents(&decl, &self.env)?,
        };
        for f in &decl.leaves {
            self.env.projections.insert(format!("{}.{}", decl.name, f.name), (decl.name.clone(), f.name.clone()));
        }
        let projections = if is_class { generate_projections(&decl) } else { Vec::new() };
        self.env.class_order.push(decl.name.clone());
        self.env.classes.insert(decl.name.clone(), decl);
        for p in projections {
            self.register(p)?;
        }
        Ok(())
    }

    fn register(&mut self, mut inst: InstanceDecl) -> Result<(), BuildErrorKind> {
        if inst.provenance != Provenance::Attribute {
            self.fresh_name(&inst.name)?;
        }
        inst.order = self.env.instances.len();
        self.env.instance_index.insert(inst.name.clone(), inst.order);
        self.env.instances.push(inst);
        Ok(())
    }

    /// Validate binders and head, adding implicit binders for variables that
    /// occur free.
    fn elaborate_binders(&self, decl: &str, binders: &[Binder], head: &Term) -> Result<Vec<Binder>, BuildErrorKind> {
        let mut bound: Vec<String> = binders.iter().filter_map(|b| b.name.clone()).collect();
        let mut free = Vec::new();
        for b in binders {
            b.ty.vars(&mut free);
        }
        head.vars(&mut free);
        free.retain(|v| !bound.contains(v));
        let mut out: Vec<Binder> = free.iter().map(|v| Binder::implicit(v, Term::constant("Type"))).collect();
        bound.extend(free);
        for b in binders {
            self.check_arities(&b.ty)?;
            if b.style == BinderStyle::Instance {
                self.check_class_app(&b.ty)?;
            }
            self.check_bound(decl, &b.ty, &bound)?;
            out.push(b.clone());
        }
        Ok(out)
    }

    fn instance(&mut self, i: &InstanceSyntax) -> Result<(), BuildErrorKind> {
        self.check_class_app(&i.head)?;
        let binders = self.elaborate_binders(&i.name, &i.binders, &i.head)?;
        let class = &self.env.classes[i.head.head().unwrap_or_default()];
        let assigns = match &i.body {
            InstanceBody::Opaque => None,
            InstanceBody::Assigns(a) => {
                for (f, v) in a {
                    let known = class.leaf(f).is_some() || class.fields.iter().any(|g| &g.name == f);
                    if !known {
                        return Err(BuildErrorKind::UnknownField { class: class.name.clone(), field: f.clone() });
                    }
                    self.check_arities(v)?;
                }
                Some(a.clone())
            }
        };
        self.register(InstanceDecl {
            name: i.name.clone(),
            binders,
            head: i.head.clone(),
            priority: i.priority.unwrap_or(DEFAULT_PRIORITY),
            assigns,
            provenance: Provenance::User,
            line: self.line,
            order: 0,
        })
    }

    fn def(&mut self, d: &DefSyntax) -> Result<(), BuildErrorKind> {
        self.fresh_name(&d.name)?;
        let bound: Vec<String> = d.binders.iter().filter_map(|b| b.name.clone()).collect();
        for b in &d.binders {
            self.check_arities(&b.ty)?;
        }
        for t in d.ty.iter().chain(&d.body) {
            self.check_arities(t)?;
            self.check_bound(&d.name, t, &bound)?;
        }
        self.env.defs.insert(
            d.name.clone(),
            DefDecl { name: d.name.clone(), binders: d.binders.clone(), ty: d.ty.clone(), body: d.body.clone(), line: self.line },
        );
        Ok(())
    }

    fn attribute(&mut self, name: &str) -> Result<(), BuildErrorKind> {
        if self.env.instance_index.contains_key(name) {
            return Ok(());
        }
        let d = self.env.defs.get(name).ok_or_else(|| BuildErrorKind::UnknownDecl(name.into()))?;
        let head = d.ty.clone().ok_or_else(|| BuildErrorKind::NotAClass(name.into()))?;
        self.check_class_app(&head)?;
        let binders = self.elaborate_binders(name, &d.binders, &head)?;
        self.register(InstanceDecl {
            name: name.to_string(),
            binders,
            head,
            priority: DEFAULT_PRIORITY,
            assigns: None,
            provenance: Provenance::Attribute,
            line: self.line,
            order: 0,
        })
    }
}
