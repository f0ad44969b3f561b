//! Instance synthesis: depth-first backtracking over candidate instances,
//! with out-parameter handling, fuel, a depth limit, local instances and an
//! optional tabled mode.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::hierarchy::Environment;
use crate::term::{term_size, unify, unify_in, MetaId, Substitution, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    /// Candidate applications allowed in one call.
    pub fuel: u64,
    pub max_depth: usize,
    pub tabled: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { fuel: 20_000, max_depth: 64, tabled: false }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SynthStats {
    /// Candidates tried (unification attempts); this is what fuel counts.
    pub applied: u64,
    /// Candidates whose head unified with the goal.
    pub unified: u64,
    pub backtracks: u64,
    pub max_depth: usize,
    /// Size of the returned term, 0 on failure.
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthResult {
    /// Instance name applied to the instances filling its instance binders.
    pub term: Term,
    /// The goal with out-parameters filled in.
    pub goal: Term,
    pub stats: SynthStats,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthFailure {
    #[error("no instance found")]
    NotFound { stats: SynthStats },
    #[error("fuel exhausted after {} applications", stats.applied)]
    FuelExhausted { stats: SynthStats, chain: Vec<Term> },
    #[error("depth limit exceeded")]
    DepthExceeded { stats: SynthStats, chain: Vec<Term> },
    #[error("ill-formed goal: {0}")]
    IllFormedGoal(String),
}

impl SynthFailure {
    pub fn stats(&self) -> Option<&SynthStats> {
        match self {
            SynthFailure::NotFound { stats }
            | SynthFailure::FuelExhausted { stats, .. }
            | SynthFailure::DepthExceeded { stats, .. } => Some(stats),
            SynthFailure::IllFormedGoal(_) => None,
        }
    }

    /// Longest chain of nested subgoals seen, for divergent searches.
    pub fn chain(&self) -> &[Term] {
        match self {
            SynthFailure::FuelExhausted { chain, .. } | SynthFailure::DepthExceeded { chain, .. } => chain,
            _ => &[],
        }
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            SynthFailure::NotFound { .. } => "NotFound",
            SynthFailure::FuelExhausted { .. } => "FuelExhausted",
            SynthFailure::DepthExceeded { .. } => "DepthExceeded",
            SynthFailure::IllFormedGoal(_) => "IllFormedGoal",
        }
    }
}

/// Instances in scope as hypotheses, tried before any global instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalInstances {
    entries: Vec<(String, Term)>,
}

impl LocalInstances {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, head: Term) {
        self.entries.push((name.into(), head));
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn next_meta_after(goal: &Term) -> MetaId {
    let mut ms = Vec::new();
    goal.metas(&mut ms);
    ms.into_iter().max().map_or(0, |m| m + 1)
}

fn check_goal(goal: &Term, env: &Environment) -> Result<(), SynthFailure> {
    let Term::Const(name, args) = goal else {
        return Err(SynthFailure::IllFormedGoal(format!("`{goal}` is not a class application")));
    };
    let class = env
        .class(name)
        .ok_or_else(|| SynthFailure::IllFormedGoal(format!("unknown class `{name}`")))?;
    if class.arity() != args.len() {
        return Err(SynthFailure::IllFormedGoal(format!(
            "`{name}` expects {} arguments, got {}",
            class.arity(),
            args.len()
        )));
    }
    let outs = class.out_positions();
    if let Some(i) = (0..args.len()).find(|i| !outs.contains(i) && args[*i].contains_meta()) {
        return Err(SynthFailure::IllFormedGoal(format!("metavariable in input position {} of `{goal}`", i + 1)));
    }
    Ok(())
}

/// Replace every out-parameter argument by a fresh metavariable.
pub fn prepare_goal(goal: &Term, env: &Environment) -> Result<(Term, Vec<MetaId>), SynthFailure> {
    let mut next = next_meta_after(goal);
    prepare_with(goal, env, &mut next)
}

fn prepare_with(goal: &Term, env: &Environment, next: &mut MetaId) -> Result<(Term, Vec<MetaId>), SynthFailure> {
    let Term::Const(name, args) = goal else {
        return Err(SynthFailure::IllFormedGoal(format!("`{goal}` is not a class application")));
    };
    let class = env
        .class(name)
        .ok_or_else(|| SynthFailure::IllFormedGoal(format!("unknown class `{name}`")))?;
    let outs = class.out_positions();
    let mut fresh = Vec::new();
    let args = args
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if outs.contains(&i) {
                fresh.push(*next);
                *next += 1;
                Term::Meta(*next - 1)
            } else {
                a.clone()
            }
        })
        .collect();
    Ok((Term::Const(name.clone(), args), fresh))
}

const STACK_RED_ZONE: usize = 128 * 1024;
const STACK_SEGMENT: usize = 4 * 1024 * 1024;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

struct OutOfFuel;

type Step<'k, 'e> = &'k mut dyn FnMut(&mut Engine<'e>, Term) -> Result<Flow, OutOfFuel>;

enum Entry {
    InProgress,
    /// (instantiated goal, instance term) pairs.
    Complete(Vec<(Term, Term)>),
}

struct Engine<'e> {
    env: &'e Environment,
    locals: &'e LocalInstances,
    cfg: SynthConfig,
    subst: Substitution,
    trail: Vec<MetaId>,
    next_meta: MetaId,
    stats: SynthStats,
    fuel: u64,
    /// Ancestor path of the goal being solved.
    stack: Vec<Term>,
    longest: Vec<Term>,
    pruned: bool,
    table: HashMap<Term, Entry>,
}

impl<'e> Engine<'e> {
    fn new(env: &'e Environment, locals: &'e LocalInstances, cfg: SynthConfig, goal: &Term) -> Self {
        Engine {
            env,
            locals,
            cfg,
            subst: Substitution::new(),
            trail: Vec::new(),
            next_meta: next_meta_after(goal),
            stats: SynthStats::default(),
            fuel: cfg.fuel,
            stack: Vec::new(),
            longest: Vec::new(),
            pruned: false,
            table: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> Term {
        self.next_meta += 1;
        Term::Meta(self.next_meta - 1)
    }

    fn undo(&mut self, mark: usize) {
        for m in self.trail.drain(mark..) {
            self.subst.unbind(m);
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        unify_in(a, b, self.env, &mut self.subst, &mut self.trail)
    }

    /// Solve `goal`, calling `k` with each instance term found until it
    /// returns `Stop`. Bindings made for a solution are live while `k` runs
    /// and undone afterwards.
    fn solve(&mut self, goal: &Term, depth: usize, root: bool, k: Step<'_, 'e>) -> Result<Flow, OutOfFuel> {
        if depth > self.cfg.max_depth {
            self.pruned = true;
            return Ok(Flow::Continue);
        }
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let goal = self.subst.apply(goal);
        // `stack[..depth]` is the ancestor path; continuations run nested, so
        // deeper entries belong to suspended searches and are restored after.
        let suspended = self.stack.split_off((depth - 1).min(self.stack.len()));
        self.stack.push(goal.clone());
        if self.stack.len() > self.longest.len() {
            self.longest = self.stack.clone();
        }
        // Continuations nest one frame group per solved subgoal, so large
        // answers need more stack than a test thread has.
        let r = stacker::maybe_grow(STACK_RED_ZONE, STACK_SEGMENT, || self.solve_outparams(&goal, depth, root, k));
        self.stack.truncate(depth - 1);
        self.stack.extend(suspended);
        r
    }

    fn solve_outparams(&mut self, goal: &Term, depth: usize, root: bool, k: Step<'_, 'e>) -> Result<Flow, OutOfFuel> {
        let mut next = self.next_meta;
        let Ok((prepared, fresh)) = prepare_with(goal, self.env, &mut next) else {
            return Ok(Flow::Continue);
        };
        self.next_meta = next;
        if fresh.is_empty() {
            return self.search(goal, depth, k);
        }
        let originals: Vec<Term> = goal.args().to_vec();
        let outs: Vec<usize> = self.env.class(goal.head().unwrap_or_default()).map(|c| c.out_positions()).unwrap_or_default();
        if root {
            return self.search(&prepared, depth, &mut |e, t| {
                let mark = e.trail.len();
                let ok = outs.iter().zip(&fresh).all(|(&i, &m)| e.unify(&originals[i], &Term::Meta(m)));
                let r = if ok { k(e, t) } else { Ok(Flow::Continue) };
                e.undo(mark);
                r
            });
        }
        // A subgoal commits to the first solution for its out-parameters.
        let mut first: Option<(Term, Term)> = None;
        self.search(&prepared, depth, &mut |e, t| {
            first = Some((e.subst.apply(&prepared), t));
            Ok(Flow::Stop)
        })?;
        let Some((solved, t)) = first else { return Ok(Flow::Continue) };
        let mark = self.trail.len();
        let ok = self.unify(&prepared, &solved)
            && outs.iter().zip(&fresh).all(|(&i, &m)| self.unify(&originals[i], &Term::Meta(m)));
        let r = if ok { k(self, t) } else { Ok(Flow::Continue) };
        self.undo(mark);
        r
    }

    fn search(&mut self, goal: &Term, depth: usize, k: Step<'_, 'e>) -> Result<Flow, OutOfFuel> {
        if !self.cfg.tabled {
            return self.search_candidates(goal, depth, k);
        }
        let key = self.subst.apply(goal).normalize_metas();
        if !self.table.contains_key(&key) {
            self.table.insert(key.clone(), Entry::InProgress);
            let mut answers: Vec<(Term, Term)> = Vec::new();
            let r = self.search_candidates(goal, depth, &mut |e, t| {
                let answer = (e.subst.apply(goal), t);
                if !answers.contains(&answer) {
                    answers.push(answer);
                }
                Ok(Flow::Continue)
            });
            if r.is_err() {
                self.table.remove(&key);
            }
            r?;
            self.table.insert(key.clone(), Entry::Complete(answers));
        }
        let answers = match &self.table[&key] {
            Entry::InProgress => return Ok(Flow::Continue),
            Entry::Complete(a) => a.clone(),
        };
        for (solved, t) in answers {
            let solved = self.rename_apart(&solved);
            let mark = self.trail.len();
            if self.unify(goal, &solved) {
                let r = k(self, t.clone())?;
                self.undo(mark);
                if r == Flow::Stop {
                    return Ok(Flow::Stop);
                }
            } else {
                self.undo(mark);
            }
        }
        Ok(Flow::Continue)
    }

    fn rename_apart(&mut self, t: &Term) -> Term {
        let mut ms = Vec::new();
        t.metas(&mut ms);
        if ms.is_empty() {
            return t.clone();
        }
        let mut s = Substitution::new();
        for m in ms {
            let f = self.fresh();
            s.bind(m, f);
        }
        s.apply(t)
    }

    fn spend(&mut self) -> Result<(), OutOfFuel> {
        if self.fuel == 0 {
            return Err(OutOfFuel);
        }
        self.fuel -= 1;
        self.stats.applied += 1;
        Ok(())
    }

    fn search_candidates(&mut self, goal: &Term, depth: usize, k: Step<'_, 'e>) -> Result<Flow, OutOfFuel> {
        let locals = self.locals;
        for (name, head) in locals.iter() {
            self.spend()?;
            let mark = self.trail.len();
            if self.unify(head, goal) {
                self.stats.unified += 1;
                let r = k(self, Term::constant(name))?;
                self.undo(mark);
                if r == Flow::Stop {
                    return Ok(Flow::Stop);
                }
                self.stats.backtracks += 1;
            } else {
                self.undo(mark);
            }
        }
        let env = self.env;
        let class = goal.head().unwrap_or_default();
        for inst in env.candidates(class) {
            self.spend()?;
            let mark = self.trail.len();
            let mut map = HashMap::new();
            for v in inst.var_binders() {
                let m = self.fresh();
                map.insert(v.to_string(), m);
            }
            let head = inst.head.subst_vars(&map);
            if !self.unify(&head, goal) {
                self.undo(mark);
                continue;
            }
            self.stats.unified += 1;
            let subgoals: Vec<Term> = inst.instance_binders().map(|b| b.ty.subst_vars(&map)).collect();
            let r = self.solve_subgoals(&subgoals, &mut Vec::new(), depth + 1, &inst.name, k)?;
            self.undo(mark);
            if r == Flow::Stop {
                return Ok(Flow::Stop);
            }
            self.stats.backtracks += 1;
        }
        Ok(Flow::Continue)
    }

    /// Solve instance binders left to right, then call `k` with the applied
    /// instance.
    fn solve_subgoals(
        &mut self,
        goals: &[Term],
        fillers: &mut Vec<Term>,
        depth: usize,
        name: &str,
        k: Step<'_, 'e>,
    ) -> Result<Flow, OutOfFuel> {
        let Some((first, rest)) = goals.split_first() else {
            return k(self, Term::app(name, fillers.clone()));
        };
        self.solve(first, depth, false, &mut |e, t| {
            fillers.push(t);
            let r = e.solve_subgoals(rest, fillers, depth, name, &mut *k);
            fillers.pop();
            r
        })
    }

    fn finish_stats(&self, term: Option<&Term>) -> SynthStats {
        SynthStats { size: term.map_or(0, term_size), ..self.stats }
    }
}

/// Find the first instance for `goal`.
///
/// `goal` may contain metavariables only in out-parameter positions; they
/// are bound in the returned [`SynthResult::goal`].
pub fn synthesize(
    goal: &Term,
    env: &Environment,
    locals: &LocalInstances,
    cfg: &SynthConfig,
) -> Result<SynthResult, SynthFailure> {
    check_goal(goal, env)?;
    let mut engine = Engine::new(env, locals, *cfg, goal);
    let mut found: Option<(Term, Term)> = None;
    let r = engine.solve(goal, 1, true, &mut |e, t| {
        let solved = e.subst.apply(goal);
        if solved.contains_meta() {
            return Ok(Flow::Continue);
        }
        found = Some((t, solved));
        Ok(Flow::Stop)
    });
    match (r, found) {
        (_, Some((term, goal))) => {
            let stats = engine.finish_stats(Some(&term));
            Ok(SynthResult { term, goal, stats })
        }
        (Err(OutOfFuel), None) => Err(SynthFailure::FuelExhausted { stats: engine.finish_stats(None), chain: engine.longest }),
        (Ok(_), None) if engine.pruned => {
            Err(SynthFailure::DepthExceeded { stats: engine.finish_stats(None), chain: engine.longest })
        }
        (Ok(_), None) => Err(SynthFailure::NotFound { stats: engine.finish_stats(None) }),
    }
}

/// Every solution of a goal, in search order, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub solutions: Vec<SynthResult>,
    /// `false` if fuel or the depth limit cut the search short.
    pub complete: bool,
    pub stats: SynthStats,
}

pub fn enumerate(
    goal: &Term,
    env: &Environment,
    locals: &LocalInstances,
    cfg: &SynthConfig,
) -> Result<Enumeration, SynthFailure> {
    check_goal(goal, env)?;
    let mut engine = Engine::new(env, locals, *cfg, goal);
    let mut found: Vec<(Term, Term)> = Vec::new();
    let mut seen: HashSet<Term> = HashSet::new();
    let r = engine.solve(goal, 1, true, &mut |e, t| {
        let solved = e.subst.apply(goal);
        if !solved.contains_meta() && seen.insert(t.clone()) {
            found.push((t, solved));
        }
        Ok(Flow::Continue)
    });
    let complete = r.is_ok() && !engine.pruned;
    let stats = engine.finish_stats(None);
    let solutions = found
        .into_iter()
        .map(|(term, goal)| SynthResult { stats: SynthStats { size: term_size(&term), ..stats }, term, goal })
        .collect();
    Ok(Enumeration { solutions, complete, stats })
}

/// Re-derive the class application `r.term` inhabits and unify it with
/// `goal`.
pub fn check_result(goal: &Term, r: &SynthResult, env: &Environment) -> bool {
    check_result_with(goal, r, env, &LocalInstances::new())
}

pub fn check_result_with(goal: &Term, r: &SynthResult, env: &Environment, locals: &LocalInstances) -> bool {
    if r.term.contains_meta() {
        return false;
    }
    let mut s = Substitution::new();
    let mut next = next_meta_after(goal);
    match env.instantiate(&r.term, locals, &mut s, &mut next) {
        Some((head, _)) => unify(&head, goal, env, &s).is_some(),
        None => false,
    }
}
