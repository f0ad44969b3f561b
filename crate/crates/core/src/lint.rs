//! Linters over a built environment: dangerous instances, searches that do
//! not fail quickly, and diamonds whose data fields disagree.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::json;

use crate::hierarchy::{Environment, InstanceDecl, ParamMode, Query};
use crate::syntax::FieldKind;
use crate::synth::{enumerate, synthesize, LocalInstances, SynthConfig, SynthFailure};
use crate::term::{normalize, Term};

pub const DANGEROUS: &str = "dangerous_instance";
pub const FAILS_QUICKLY: &str = "fails_quickly";
pub const DIAMOND: &str = "diamond";
pub const ALL_LINTERS: [&str; 3] = [DANGEROUS, FAILS_QUICKLY, DIAMOND];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LintFinding {
    pub linter: String,
    pub subject: String,
    pub severity: Severity,
    pub message: String,
    pub data: serde_json::Value,
}

/// Variables of `t` at argument positions of mode `mode`.
fn vars_at(t: &Term, env: &Environment, mode: ParamMode) -> Vec<String> {
    let mut out = Vec::new();
    let Some(class) = t.head().and_then(|h| env.class(h)) else {
        if mode == ParamMode::In {
            t.vars(&mut out);
        }
        return out;
    };
    for (p, a) in class.params.iter().zip(t.args()) {
        if p.mode == mode {
            a.vars(&mut out);
        }
    }
    out
}

/// Binder variables that resolution cannot determine from the goal.
///
/// A variable is determined if it occurs at an input position of the head,
/// or at an out-parameter position of an instance binder whose own input
/// variables are all determined.
pub fn undetermined_vars(inst: &InstanceDecl, env: &Environment) -> Vec<String> {
    let mut determined: HashSet<String> = vars_at(&inst.head, env, ParamMode::In).into_iter().collect();
    let binders: Vec<&Term> = inst.instance_binders().map(|b| &b.ty).collect();
    loop {
        let before = determined.len();
        for ty in &binders {
            if vars_at(ty, env, ParamMode::In).iter().all(|v| determined.contains(v)) {
                determined.extend(vars_at(ty, env, ParamMode::Out));
            }
        }
        if determined.len() == before {
            break;
        }
    }
    let mut out = Vec::new();
    for ty in &binders {
        for v in vars_at(ty, env, ParamMode::In).into_iter().chain(vars_at(ty, env, ParamMode::Out)) {
            if !determined.contains(&v) && !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

pub fn lint_dangerous(inst: &InstanceDecl, env: &Environment) -> Vec<LintFinding> {
    let vars = undetermined_vars(inst, env);
    if vars.is_empty() {
        return Vec::new();
    }
    vec![LintFinding {
        linter: DANGEROUS.into(),
        subject: inst.name.clone(),
        severity: Severity::Error,
        message: format!(
            "instance `{}` leaves {} undetermined: resolution would search with a metavariable",
            inst.name,
            vars.iter().map(|v| format!("`{v}`")).collect::<Vec<_>>().join(", ")
        ),
        data: json!({ "undetermined": vars }),
    }]
}

/// The first repeated goal in a subgoal chain, as class names from its first
/// occurrence to its repetition. Falls back to the whole chain.
pub fn cycle_path(chain: &[Term]) -> Vec<String> {
    let keys: Vec<Term> = chain.iter().map(Term::normalize_metas).collect();
    for j in 0..keys.len() {
        if let Some(i) = keys[..j].iter().position(|k| *k == keys[j]) {
            return chain[i..=j].iter().map(|t| t.head().unwrap_or("?").to_string()).collect();
        }
    }
    chain.iter().map(|t| t.head().unwrap_or("?").to_string()).collect()
}

/// Synthesize every class at fully general arguments; anything but a quick
/// answer is reported.
pub fn lint_fails_quickly(env: &Environment, budget: &SynthConfig) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for class in env.classes() {
        let goal = class.self_term();
        let failure = match synthesize(&goal, env, &LocalInstances::new(), budget) {
            Err(f @ (SynthFailure::FuelExhausted { .. } | SynthFailure::DepthExceeded { .. })) => f,
            _ => continue,
        };
        let path = cycle_path(failure.chain());
        out.push(LintFinding {
            linter: FAILS_QUICKLY.into(),
            subject: class.name.clone(),
            severity: Severity::Error,
            message: format!("synthesis of `{goal}` does not fail quickly ({}): {}", failure.verdict(), path.join(" → ")),
            data: json!({
                "goal": goal.to_string(),
                "verdict": failure.verdict(),
                "cycle": path,
                "chain_length": failure.chain().len(),
                "applied": failure.stats().map_or(0, |s| s.applied),
            }),
        });
    }
    out
}

/// Data field value of an instance term, reduced through projections and
/// instance bodies.
pub fn data_value(env: &Environment, class: &str, field: &str, inst: &Term) -> Term {
    normalize(&Term::app(format!("{class}.{field}"), vec![inst.clone()]), env)
}

/// Enumerate all solutions of `goal` and compare the data fields of every
/// pair. Proof fields are never compared.
pub fn lint_diamond(env: &Environment, goal: &Term, cfg: &SynthConfig) -> Vec<LintFinding> {
    let class_name = goal.head().unwrap_or_default().to_string();
    let Some(class) = env.class(&class_name) else { return Vec::new() };
    let Ok(all) = enumerate(goal, env, &LocalInstances::new(), cfg) else { return Vec::new() };
    let mut out = Vec::new();
    if !all.complete {
        out.push(LintFinding {
            linter: DIAMOND.into(),
            subject: class_name.clone(),
            severity: Severity::Warning,
            message: format!("BudgetExceeded: enumeration of `{goal}` was cut off after {} solutions", all.solutions.len()),
            data: json!({ "goal": goal.to_string(), "kind": "BudgetExceeded", "solutions": all.solutions.len() }),
        });
    }
    let data_fields: Vec<&str> =
        class.leaves.iter().filter(|f| f.kind == FieldKind::Data).map(|f| f.name.as_str()).collect();
    let mut terms: Vec<Term> = all.solutions.into_iter().map(|s| s.term).collect();
    terms.sort_by_cached_key(|t| t.to_string());
    let values: Vec<Vec<Term>> = terms
        .iter()
        .map(|t| data_fields.iter().map(|f| data_value(env, &class_name, f, t)).collect())
        .collect();
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate().skip(i + 1) {
            if values[i] == values[j] {
                continue;
            }
            let differing: Vec<(&str, &Term, &Term)> = data_fields
                .iter()
                .zip(values[i].iter().zip(&values[j]))
                .filter(|(_, (x, y))| x != y)
                .map(|(f, (x, y))| (*f, x, y))
                .collect();
            let Some((field, left, right)) = differing.first() else { continue };
            out.push(LintFinding {
                linter: DIAMOND.into(),
                subject: class_name.clone(),
                severity: Severity::Error,
                message: format!(
                    "`{goal}` has non-definitionally-equal instances `{a}` and `{b}`: field `{field}` is `{left}` vs `{right}`"
                ),
                data: json!({
                    "goal": goal.to_string(),
                    "left": a.to_string(),
                    "right": b.to_string(),
                    "field": field,
                    "fields": differing.iter().map(|d| d.0).collect::<Vec<_>>(),
                    "left_value": left.to_string(),
                    "right_value": right.to_string(),
                }),
            });
        }
    }
    out
}

/// Run the selected linters in a fixed order. The diamond linter checks the
/// meta-free goals of `queries`, each against the environment it was
/// written in.
pub fn run_linters(env: &Environment, queries: &[Query], selected: &[&str], cfg: &SynthConfig) -> Vec<LintFinding> {
    let mut out = Vec::new();
    if selected.contains(&DANGEROUS) {
        for inst in env.instances() {
            out.extend(lint_dangerous(inst, env));
        }
    }
    if selected.contains(&FAILS_QUICKLY) {
        out.extend(lint_fails_quickly(env, cfg));
    }
    if selected.contains(&DIAMOND) {
        let mut seen = HashSet::new();
        for q in queries.iter().filter(|q| !q.goal.contains_meta() && q.locals.is_empty()) {
            if seen.insert((q.goal.clone(), q.visible)) {
                out.extend(lint_diamond(&env.truncated(q.visible), &q.goal, cfg));
            }
        }
    }
    out
}

pub fn findings_to_json(findings: &[LintFinding]) -> String {
    serde_json::to_string_pretty(findings).expect("findings serialize")
}
