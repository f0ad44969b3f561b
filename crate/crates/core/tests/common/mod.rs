//! Random layered environments and a brute-force derivability oracle that
//! shares no code with the engine.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use tcsynth::term::Term;

pub const BASES: [&str; 2] = ["tya", "tyb"];
pub const VARS: [&str; 3] = ["a", "b", "c"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ty {
    Var(usize),
    Base(usize),
    Boxed(Box<Ty>),
}

impl Ty {
    pub fn render(&self) -> String {
        match self {
            Ty::Var(i) => VARS[*i].to_string(),
            Ty::Base(i) => BASES[*i].to_string(),
            Ty::Boxed(t) => format!("(box {})", t.render()),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Ty::Var(i) => Term::var(VARS[*i]),
            Ty::Base(i) => Term::constant(BASES[*i]),
            Ty::Boxed(t) => Term::app("box", vec![t.to_term()]),
        }
    }

    fn vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Ty::Var(i) => {
                out.insert(*i);
            }
            Ty::Base(_) => {}
            Ty::Boxed(t) => t.vars(out),
        }
    }

    fn subst(&self, sigma: &[Option<Ty>; 3]) -> Ty {
        match self {
            Ty::Var(i) => sigma[*i].clone().expect("binder variables occur in the head"),
            Ty::Base(_) => self.clone(),
            Ty::Boxed(t) => Ty::Boxed(Box::new(t.subst(sigma))),
        }
    }

    /// One-way matching of a pattern against a ground type.
    fn match_ground(&self, ground: &Ty, sigma: &mut [Option<Ty>; 3]) -> bool {
        match (self, ground) {
            (Ty::Var(i), g) => match &sigma[*i] {
                Some(bound) => bound == g,
                None => {
                    sigma[*i] = Some(g.clone());
                    true
                }
            },
            (Ty::Base(i), Ty::Base(j)) => i == j,
            (Ty::Boxed(p), Ty::Boxed(g)) => p.match_ground(g, sigma),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassSpec {
    pub name: String,
    pub arity: usize,
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct InstSpec {
    pub name: String,
    pub class: usize,
    pub head: Vec<Ty>,
    pub binders: Vec<(usize, Vec<Ty>)>,
    pub priority: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct EnvSpec {
    pub classes: Vec<ClassSpec>,
    pub instances: Vec<InstSpec>,
}

fn pattern(rng: &mut impl Rng, depth: usize, allow_vars: &[usize]) -> Ty {
    let roll = rng.gen_range(0..10);
    if depth > 0 && roll < 3 {
        Ty::Boxed(Box::new(pattern(rng, depth - 1, allow_vars)))
    } else if !allow_vars.is_empty() && roll < 7 {
        Ty::Var(*allow_vars.choose(rng).unwrap())
    } else {
        Ty::Base(rng.gen_range(0..BASES.len()))
    }
}

/// At most `max_classes` classes on four levels; instance binders only
/// mention classes on strictly higher levels, so instance trees are at most
/// four applications tall.
pub fn random_env(rng: &mut impl Rng, max_classes: usize, max_instances: usize) -> EnvSpec {
    let n = rng.gen_range(1..=max_classes);
    let mut levels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    levels.sort_unstable();
    let classes: Vec<ClassSpec> = levels
        .iter()
        .enumerate()
        .map(|(i, &level)| ClassSpec { name: format!("cls{i}"), arity: rng.gen_range(1..=2), level })
        .collect();
    let m = rng.gen_range(0..=max_instances);
    let mut instances = Vec::new();
    for j in 0..m {
        let class = rng.gen_range(0..n);
        let head: Vec<Ty> = (0..classes[class].arity).map(|_| pattern(rng, 2, &[0, 1, 2])).collect();
        let mut vs = BTreeSet::new();
        head.iter().for_each(|t| t.vars(&mut vs));
        let vs: Vec<usize> = vs.into_iter().collect();
        let higher: Vec<usize> = (0..n).filter(|&d| classes[d].level > classes[class].level).collect();
        let mut binders = Vec::new();
        if !higher.is_empty() {
            for _ in 0..rng.gen_range(0..=2) {
                let d = *higher.choose(rng).unwrap();
                binders.push((d, (0..classes[d].arity).map(|_| pattern(rng, 1, &vs)).collect()));
            }
        }
        let priority = if rng.gen_bool(0.3) { Some(*[10, 100, 1000, 2000].choose(rng).unwrap()) } else { None };
        instances.push(InstSpec { name: format!("inst{j}"), class, head, binders, priority });
    }
    EnvSpec { classes, instances }
}

impl EnvSpec {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let params: Vec<String> = (0..c.arity).map(|i| format!("(P{i} : Type)")).collect();
            out.push_str(&format!("class {} {}\n", c.name, params.join(" ")));
        }
        for i in &self.instances {
            let mut vs = BTreeSet::new();
            i.head.iter().for_each(|t| t.vars(&mut vs));
            let mut line = String::new();
            if let Some(p) = i.priority {
                line.push_str(&format!("@[priority {p}] "));
            }
            line.push_str(&format!("instance {}", i.name));
            for v in vs {
                line.push_str(&format!(" {{{} : Type}}", VARS[v]));
            }
            for (d, args) in &i.binders {
                let args: Vec<String> = args.iter().map(Ty::render).collect();
                line.push_str(&format!(" [{} {}]", self.classes[*d].name, args.join(" ")));
            }
            let head: Vec<String> = i.head.iter().map(Ty::render).collect();
            line.push_str(&format!(" : {} {}\n", self.classes[i.class].name, head.join(" ")));
            out.push_str(&line);
        }
        out
    }

    /// Every class applied to every combination of small ground types.
    pub fn goals(&self) -> Vec<(usize, Vec<Ty>)> {
        let grounds = [
            Ty::Base(0),
            Ty::Base(1),
            Ty::Boxed(Box::new(Ty::Base(0))),
            Ty::Boxed(Box::new(Ty::Boxed(Box::new(Ty::Base(1))))),
        ];
        let mut out = Vec::new();
        for (c, spec) in self.classes.iter().enumerate() {
            if spec.arity == 1 {
                out.extend(grounds.iter().map(|g| (c, vec![g.clone()])));
            } else {
                for g in &grounds {
                    out.extend(grounds.iter().map(|h| (c, vec![g.clone(), h.clone()])));
                }
            }
        }
        out
    }

    pub fn goal_term(&self, class: usize, args: &[Ty]) -> Term {
        Term::app(&self.classes[class].name, args.iter().map(Ty::to_term).collect())
    }

    /// Is there an instance tree of height at most `depth` for the goal?
    pub fn derivable(&self, class: usize, args: &[Ty], depth: usize) -> bool {
        if depth == 0 {
            return false;
        }
        self.instances.iter().filter(|i| i.class == class).any(|i| {
            let mut sigma: [Option<Ty>; 3] = [None, None, None];
            i.head.iter().zip(args).all(|(p, g)| p.match_ground(g, &mut sigma))
                && i.binders.iter().all(|(d, bargs)| {
                    let inst: Vec<Ty> = bargs.iter().map(|t| t.subst(&sigma)).collect();
                    self.derivable(*d, &inst, depth - 1)
                })
        })
    }
}
