//! Coinductive type equality over an internalized signature.
//!
//! Goals have the form `𝒱 ; 𝒞 ; Γ ⊢ A ≡ B`. The rules are tried in a fixed
//! order: `⊥` when `𝒞` is unsatisfiable, then for two instantiations
//! `refl`, `def` (a closure in `Γ` covers every instance) and `expd`
//! (record a closure and unfold both sides), and otherwise the structural
//! rule for the shared constructor. `expd` is refused for an ordered pair
//! of names that was already expanded. `Γ` is shared by the whole run, so
//! there are at most `D²` expansions for `D` defined names.

mod derivation;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::arith::{find_model, Entailment, Solver};
use crate::ast::{
    fresh_name, subst_type, unfold, ArithExpr, ArithProp, Closure, FreeVars, GroundSubst, Instance,
    Label, Name, SessionType, Signature, Subst,
};
use crate::naming::{internalize, internalize_query, InternalizedSignature};
use crate::syntax::{Context, Query};

pub use derivation::{replay_derivation, Derivation, ReplayError, Rule, SideCondition};

/// Default goal budget; `REFINE_EQ_MAX_GOALS` overrides it.
pub const DEFAULT_MAX_GOALS: usize = 100_000;

/// Countermodel search: values `0..=WITNESS_BOUND`.
const WITNESS_BOUND: u64 = 8;
const WITNESS_CANDIDATES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_goals: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_goals: DEFAULT_MAX_GOALS,
        }
    }
}

impl EngineConfig {
    /// Default budget, or the value of `REFINE_EQ_MAX_GOALS` when set.
    pub fn from_env() -> Self {
        let max_goals = std::env::var("REFINE_EQ_MAX_GOALS")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_GOALS);
        EngineConfig { max_goals }
    }
}

/// `𝒱 ; 𝒞 ⊢ A ≡ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub vars: Vec<Name>,
    pub constraint: ArithProp,
    pub lhs: SessionType,
    pub rhs: SessionType,
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} |- {} == {}",
            Context(&self.vars, &self.constraint),
            self.lhs,
            self.rhs
        )
    }
}

/// One observable step from the roots towards a difference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Label(Label),
    /// The channel component of `⊗`/`⊸`.
    Fst,
    /// The continuation of `⊗`/`⊸`.
    Snd,
    Assert,
    Assume,
    /// A numeric message; the witness gives the variable a value.
    Exists(Name),
    Forall(Name),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Label(l) => write!(f, "{l}"),
            Step::Fst => f.write_str("fst"),
            Step::Snd => f.write_str("snd"),
            Step::Assert => f.write_str("?"),
            Step::Assume => f.write_str("!"),
            Step::Exists(k) => write!(f, "?{k}"),
            Step::Forall(k) => write!(f, "!{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mismatch {
    Constructors {
        left: &'static str,
        right: &'static str,
    },
    Labels {
        left: Vec<Label>,
        right: Vec<Label>,
    },
    /// `𝒞 ⊨ φ ↔ ψ` was refuted.
    Propositions {
        left: ArithProp,
        right: ArithProp,
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Constructors { left, right } => write!(f, "constructor {left} vs {right}"),
            Mismatch::Labels { left, right } => {
                write!(
                    f,
                    "labels {{{}}} vs {{{}}}",
                    left.join(", "),
                    right.join(", ")
                )?;
                let only = |a: &[Label], b: &[Label]| -> Vec<Label> {
                    a.iter().filter(|l| !b.contains(l)).cloned().collect()
                };
                let (l, r) = (only(left, right), only(right, left));
                if !l.is_empty() {
                    write!(f, "; only left: {}", l.join(", "))?;
                }
                if !r.is_empty() {
                    write!(f, "; only right: {}", r.join(", "))?;
                }
                Ok(())
            }
            Mismatch::Propositions { left, right } => {
                write!(f, "propositions {{{left}}} vs {{{right}}}")
            }
        }
    }
}

/// A distinguishing trace: the path from the roots, what differs there, and
/// the context it was reached in.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub steps: Vec<Step>,
    pub mismatch: Mismatch,
    pub vars: Vec<Name>,
    pub constraint: ArithProp,
    /// A ground instance of the context (values ≤ 8), when one was found.
    pub witness: Option<GroundSubst>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        writeln!(
            f,
            "path: {}",
            if path.is_empty() {
                "(root)".to_string()
            } else {
                path.join(" . ")
            }
        )?;
        writeln!(f, "mismatch: {}", self.mismatch)?;
        write!(f, "context: {}", Context(&self.vars, &self.constraint))?;
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.0.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            write!(
                f,
                "\nwitness: {}",
                if parts.is_empty() {
                    "(closed)".to_string()
                } else {
                    parts.join(", ")
                }
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    /// The pair of names was already expanded and no closure covers the
    /// goal.
    BlockedExpd,
    /// The arithmetic could not decide a side condition.
    Arith,
    /// The goal budget ran out.
    ResourceLimit,
    /// An instantiation met a constructor; internalization rules this out.
    Internal,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::BlockedExpd => "blocked-expd",
            UnknownReason::Arith => "arith-unknown",
            UnknownReason::ResourceLimit => "resource-limit",
            UnknownReason::Internal => "internal",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnknownInfo {
    pub reason: UnknownReason,
    pub frontier: Goal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proof {
    pub derivation: Derivation,
    /// Every closure the run relied on: the seeds and those added by `expd`.
    pub closures: Vec<Closure>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Equal(Box<Proof>),
    NotEqual(Box<Counterexample>),
    Unknown(Box<UnknownInfo>),
}

impl Verdict {
    pub fn word(&self) -> &'static str {
        match self {
            Verdict::Equal(_) => "EQUAL",
            Verdict::NotEqual(_) => "NOTEQUAL",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal(_))
    }

    pub fn is_not_equal(&self) -> bool {
        matches!(self, Verdict::NotEqual(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    /// 0 Equal, 1 NotEqual, 2 Unknown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Equal(_) => 0,
            Verdict::NotEqual(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

/// Counters kept by a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub goals: usize,
    pub expansions: usize,
    /// Number of defined names `D`; expansions never exceed `D²`.
    pub defined_names: usize,
}

impl Stats {
    pub fn expansion_bound(&self) -> usize {
        self.defined_names * self.defined_names
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
}

enum Failure {
    NotEqual(Counterexample),
    Unknown(UnknownInfo),
}

type Res = Result<Derivation, Failure>;

struct Engine<'a> {
    sig: &'a Signature,
    solver: &'a Solver,
    config: &'a EngineConfig,
    gamma: Vec<Closure>,
    pairs: HashMap<(Name, Name), Vec<usize>>,
    /// Pairs already expanded in this run. Seeds serve `def` only and do
    /// not block expansion.
    expanded: HashSet<(Name, Name)>,
    stats: Stats,
    fresh: usize,
    /// Every variable name ever introduced, to keep fresh names fresh.
    used: BTreeSet<Name>,
}

/// Decides `𝒱 ; 𝒞 ; Γ₀ ⊢ lhs ≡ rhs` over an internalized signature.
pub fn type_equal(
    sig: &Signature,
    solver: &Solver,
    config: &EngineConfig,
    seeds: &[Closure],
    vars: &[Name],
    constraint: &ArithProp,
    lhs: &Instance,
    rhs: &Instance,
) -> Outcome {
    run(
        sig, solver, config, seeds, vars, constraint, lhs, rhs, false,
    )
}

#[allow(clippy::too_many_arguments)]
fn run(
    sig: &Signature,
    solver: &Solver,
    config: &EngineConfig,
    seeds: &[Closure],
    vars: &[Name],
    constraint: &ArithProp,
    lhs: &Instance,
    rhs: &Instance,
    force_root_expd: bool,
) -> Outcome {
    let mut engine = Engine {
        sig,
        solver,
        config,
        gamma: Vec::new(),
        pairs: HashMap::new(),
        expanded: HashSet::new(),
        stats: Stats {
            defined_names: sig.len(),
            ..Stats::default()
        },
        fresh: 0,
        used: vars.iter().cloned().collect(),
    };
    for s in seeds {
        engine.push_closure(s.clone());
        engine.used.extend(s.vars.iter().cloned());
    }
    let goal = Goal {
        vars: vars.to_vec(),
        constraint: constraint.clone(),
        lhs: lhs.to_type(),
        rhs: rhs.to_type(),
    };
    let res = engine.goal(goal, &mut Vec::new(), force_root_expd);
    let verdict = match res {
        Ok(derivation) => Verdict::Equal(Box::new(Proof {
            derivation,
            closures: engine.gamma.clone(),
        })),
        Err(Failure::NotEqual(c)) => Verdict::NotEqual(Box::new(c)),
        Err(Failure::Unknown(u)) => Verdict::Unknown(Box::new(u)),
    };
    Outcome {
        verdict,
        stats: engine.stats,
    }
}

impl Engine<'_> {
    fn push_closure(&mut self, c: Closure) {
        let key = (c.lhs.name.clone(), c.rhs.name.clone());
        self.pairs.entry(key).or_default().push(self.gamma.len());
        self.gamma.push(c);
    }

    fn fresh_var(&mut self) -> Name {
        loop {
            self.fresh += 1;
            let k = format!("_k{}", self.fresh);
            if self.used.insert(k.clone()) {
                return k;
            }
        }
    }

    fn unknown(&self, reason: UnknownReason, goal: &Goal) -> Failure {
        Failure::Unknown(UnknownInfo {
            reason,
            frontier: goal.clone(),
        })
    }

    fn not_equal(
        &self,
        goal: &Goal,
        path: &[Step],
        mismatch: Mismatch,
        extra: Option<ArithProp>,
    ) -> Failure {
        let search = match &extra {
            Some(p) => goal.constraint.clone().and(p.clone()),
            None => goal.constraint.clone(),
        };
        let witness = find_model(&goal.vars, &search, WITNESS_BOUND, WITNESS_CANDIDATES);
        Failure::NotEqual(Counterexample {
            steps: path.to_vec(),
            mismatch,
            vars: goal.vars.clone(),
            constraint: goal.constraint.clone(),
            witness,
        })
    }

    fn goal(&mut self, goal: Goal, path: &mut Vec<Step>, force_expd: bool) -> Res {
        stacker::maybe_grow(64 * 1024, 8 * 1024 * 1024, || {
            self.goal_inner(goal, path, force_expd)
        })
    }

    fn goal_inner(&mut self, goal: Goal, path: &mut Vec<Step>, force_expd: bool) -> Res {
        self.stats.goals += 1;
        if self.stats.goals > self.config.max_goals {
            return Err(self.unknown(UnknownReason::ResourceLimit, &goal));
        }

        // ⊥
        let satisfiable = if goal.constraint == ArithProp::True {
            Some(true)
        } else {
            self.solver.satisfiable(&goal.vars, &goal.constraint)
        };
        if satisfiable == Some(false) {
            let side = SideCondition::new(&goal, ArithProp::False, Entailment::Holds);
            return Ok(Derivation::leaf(goal, Rule::Bot, vec![side]));
        }

        match (goal.lhs.as_instance(), goal.rhs.as_instance()) {
            (Some(l), Some(r)) => self.variables(goal, l, r, path, force_expd, satisfiable),
            (None, None) => self.structural(goal, path, satisfiable),
            _ => Err(self.unknown(UnknownReason::Internal, &goal)),
        }
    }

    fn variables(
        &mut self,
        goal: Goal,
        l: Instance,
        r: Instance,
        path: &mut Vec<Step>,
        force_expd: bool,
        satisfiable: Option<bool>,
    ) -> Res {
        // refl
        if l.name == r.name && l.args.len() == r.args.len() {
            let eqs = ArithProp::conj(
                l.args
                    .iter()
                    .zip(&r.args)
                    .map(|(a, b)| ArithProp::eq(a.clone(), b.clone())),
            );
            if self.solver.entails(&goal.vars, &goal.constraint, &eqs) == Entailment::Holds {
                let side = SideCondition::new(&goal, eqs, Entailment::Holds);
                return Ok(Derivation::leaf(goal, Rule::Refl, vec![side]));
            }
        }

        let key = (l.name.clone(), r.name.clone());
        let candidates: Vec<usize> = self.pairs.get(&key).cloned().unwrap_or_default();

        // def, most recent closure first
        if !force_expd {
            for &i in candidates.iter().rev() {
                let closure = self.gamma[i].clone();
                let prop = def_condition(&closure, &l, &r, &goal.vars);
                if self.solver.entails(&goal.vars, &goal.constraint, &prop) == Entailment::Holds {
                    let side = SideCondition::new(&goal, prop, Entailment::Holds);
                    return Ok(Derivation::leaf(goal, Rule::Def(closure), vec![side]));
                }
            }
        }

        // expd
        if self.expanded.contains(&key) && !force_expd {
            return Err(self.unknown(UnknownReason::BlockedExpd, &goal));
        }
        let (Ok(a), Ok(b)) = (unfold(self.sig, &goal.lhs), unfold(self.sig, &goal.rhs)) else {
            return Err(self.unknown(UnknownReason::Internal, &goal));
        };
        let closure = Closure {
            vars: goal.vars.clone(),
            constraint: goal.constraint.clone(),
            lhs: l,
            rhs: r,
        };
        self.push_closure(closure.clone());
        self.expanded.insert(key);
        self.stats.expansions += 1;
        let child = Goal {
            vars: goal.vars.clone(),
            constraint: goal.constraint.clone(),
            lhs: a,
            rhs: b,
        };
        let d = self.structural(child, path, satisfiable)?;
        Ok(Derivation {
            goal,
            rule: Rule::Expd(closure),
            sides: Vec::new(),
            children: vec![d],
        })
    }

    fn structural(&mut self, goal: Goal, path: &mut Vec<Step>, satisfiable: Option<bool>) -> Res {
        let mismatch = |this: &Self, goal: &Goal, path: &[Step], m: Mismatch| -> Failure {
            match satisfiable {
                Some(true) => this.not_equal(goal, path, m, None),
                _ => this.unknown(UnknownReason::Arith, goal),
            }
        };
        use SessionType as T;
        let (rule, children): (Rule, Vec<(Step, Goal)>) = match (&goal.lhs, &goal.rhs) {
            (T::Plus(ls), T::Plus(rs)) | (T::With(ls), T::With(rs)) => {
                let lset: BTreeSet<&Label> = ls.iter().map(|(l, _)| l).collect();
                let rset: BTreeSet<&Label> = rs.iter().map(|(l, _)| l).collect();
                if lset != rset {
                    let m = Mismatch::Labels {
                        left: lset.into_iter().cloned().collect(),
                        right: rset.into_iter().cloned().collect(),
                    };
                    return Err(mismatch(self, &goal, path, m));
                }
                let rule = if matches!(goal.lhs, T::Plus(_)) {
                    Rule::Plus
                } else {
                    Rule::With
                };
                let kids = ls
                    .iter()
                    .map(|(lab, a)| {
                        let b = &rs
                            .iter()
                            .find(|(l2, _)| l2 == lab)
                            .expect("same label set")
                            .1;
                        (Step::Label(lab.clone()), goal.sub(a.clone(), b.clone()))
                    })
                    .collect();
                (rule, kids)
            }
            (T::Tensor(a1, a2), T::Tensor(b1, b2)) | (T::Lolli(a1, a2), T::Lolli(b1, b2)) => {
                let rule = if matches!(goal.lhs, T::Tensor(..)) {
                    Rule::Tensor
                } else {
                    Rule::Lolli
                };
                let kids = vec![
                    (Step::Fst, goal.sub((**a1).clone(), (**b1).clone())),
                    (Step::Snd, goal.sub((**a2).clone(), (**b2).clone())),
                ];
                (rule, kids)
            }
            (T::One, T::One) => return Ok(Derivation::leaf(goal, Rule::One, Vec::new())),
            (T::Assert(phi, a), T::Assert(psi, b)) | (T::Assume(phi, a), T::Assume(psi, b)) => {
                let is_assert = matches!(goal.lhs, T::Assert(..));
                let iff = phi.clone().iff(psi.clone());
                let side = match self
                    .solver
                    .equivalent(&goal.vars, &goal.constraint, phi, psi)
                {
                    Entailment::Holds => SideCondition::new(&goal, iff, Entailment::Holds),
                    Entailment::Fails => {
                        let m = Mismatch::Propositions {
                            left: phi.clone(),
                            right: psi.clone(),
                        };
                        return Err(self.not_equal(&goal, path, m, Some(iff.not())));
                    }
                    Entailment::Unknown => return Err(self.unknown(UnknownReason::Arith, &goal)),
                };
                let child = Goal {
                    vars: goal.vars.clone(),
                    constraint: conjoin(&goal.constraint, phi),
                    lhs: (**a).clone(),
                    rhs: (**b).clone(),
                };
                let (rule, step) = if is_assert {
                    (Rule::Assert, Step::Assert)
                } else {
                    (Rule::Assume, Step::Assume)
                };
                return self.children(goal, rule, vec![side], vec![(step, child)], path);
            }
            (T::Exists(m, a), T::Exists(n, b)) | (T::Forall(m, a), T::Forall(n, b)) => {
                let k = self.fresh_var();
                let kv = ArithExpr::Var(k.clone());
                let sa: Subst = [(m.clone(), kv.clone())].into();
                let sb: Subst = [(n.clone(), kv)].into();
                let mut vars = goal.vars.clone();
                vars.push(k.clone());
                let child = Goal {
                    vars,
                    constraint: goal.constraint.clone(),
                    lhs: subst_type(a, &sa),
                    rhs: subst_type(b, &sb),
                };
                let (rule, step) = if matches!(goal.lhs, T::Exists(..)) {
                    (Rule::Exists(k.clone()), Step::Exists(k))
                } else {
                    (Rule::Forall(k.clone()), Step::Forall(k))
                };
                (rule, vec![(step, child)])
            }
            (l, r) => {
                let m = Mismatch::Constructors {
                    left: l.head(),
                    right: r.head(),
                };
                return Err(mismatch(self, &goal, path, m));
            }
        };
        self.children(goal, rule, Vec::new(), children, path)
    }

    fn children(
        &mut self,
        goal: Goal,
        rule: Rule,
        sides: Vec<SideCondition>,
        children: Vec<(Step, Goal)>,
        path: &mut Vec<Step>,
    ) -> Res {
        let mut done = Vec::with_capacity(children.len());
        let mut unknown: Option<UnknownInfo> = None;
        for (step, child) in children {
            path.push(step);
            let r = self.goal(child, path, false);
            path.pop();
            match r {
                Ok(d) => done.push(d),
                Err(Failure::NotEqual(c)) => return Err(Failure::NotEqual(c)),
                Err(Failure::Unknown(u)) => {
                    if u.reason == UnknownReason::ResourceLimit {
                        return Err(Failure::Unknown(u));
                    }
                    // keep looking for a definite difference elsewhere
                    unknown.get_or_insert(u);
                }
            }
        }
        match unknown {
            Some(u) => Err(Failure::Unknown(u)),
            None => Ok(Derivation {
                goal,
                rule,
                sides,
                children: done,
            }),
        }
    }
}

impl Goal {
    fn sub(&self, lhs: SessionType, rhs: SessionType) -> Goal {
        Goal {
            vars: self.vars.clone(),
            constraint: self.constraint.clone(),
            lhs,
            rhs,
        }
    }
}

fn conjoin(c: &ArithProp, p: &ArithProp) -> ArithProp {
    if *c == ArithProp::True {
        p.clone()
    } else {
        c.clone().and(p.clone())
    }
}

/// `∃𝒱′. 𝒞′ ∧ ē₁′ = ē₁ ∧ ē₂′ = ē₂`, with the closure's variables renamed
/// apart from `vars`.
pub(crate) fn def_condition(
    closure: &Closure,
    l: &Instance,
    r: &Instance,
    vars: &[Name],
) -> ArithProp {
    let mut avoid: BTreeSet<Name> = vars.iter().cloned().collect();
    avoid.extend(l.free_vars());
    avoid.extend(r.free_vars());
    avoid.extend(closure.vars.iter().cloned());
    let mut renaming: BTreeMap<Name, Name> = BTreeMap::new();
    for v in &closure.vars {
        let fresh = fresh_name(&format!("{v}'"), &avoid);
        avoid.insert(fresh.clone());
        renaming.insert(v.clone(), fresh);
    }
    let s: Subst = renaming
        .iter()
        .map(|(k, v)| (k.clone(), ArithExpr::Var(v.clone())))
        .collect();
    let c = crate::ast::subst_prop(&closure.constraint, &s);
    let e1 = closure
        .lhs
        .args
        .iter()
        .map(|e| crate::ast::subst_expr(e, &s));
    let e2 = closure
        .rhs
        .args
        .iter()
        .map(|e| crate::ast::subst_expr(e, &s));
    let eqs = e1
        .zip(l.args.iter())
        .chain(e2.zip(r.args.iter()))
        .map(|(a, b)| ArithProp::eq(a, b.clone()));
    let body = ArithProp::conj(std::iter::once(c).chain(eqs));
    closure
        .vars
        .iter()
        .rev()
        .fold(body, |acc, v| ArithProp::exists(&renaming[v], acc))
}

/// The verdict for one `eqtype` declaration.
#[derive(Clone, Debug, PartialEq)]
pub struct DeclResult {
    pub index: usize,
    pub outcome: Outcome,
    /// Whether the declaration survived as a seed for later queries.
    pub seeded: bool,
    /// Time spent on the last check of this declaration.
    pub elapsed: Duration,
}

/// Checks every declaration with the others as seeds. Each declaration's
/// own root is always expanded, so no declaration proves itself. Failed
/// declarations are dropped from the seeds and the rest rechecked until
/// nothing changes.
pub fn check_eq_decls(
    sig: &InternalizedSignature,
    solver: &Solver,
    config: &EngineConfig,
) -> Vec<DeclResult> {
    let decls = sig.signature.eq_decls();
    let mut alive: Vec<bool> = vec![true; decls.len()];
    let mut results: Vec<Option<(Outcome, Duration)>> = vec![None; decls.len()];
    loop {
        let seeds: Vec<Closure> = decls
            .iter()
            .zip(&alive)
            .filter(|(_, a)| **a)
            .map(|(d, _)| d.as_closure())
            .collect();
        let mut changed = false;
        for (i, d) in decls.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let start = Instant::now();
            let out = run(
                &sig.signature,
                solver,
                config,
                &seeds,
                &d.vars,
                &d.constraint,
                &d.lhs,
                &d.rhs,
                true,
            );
            if !out.verdict.is_equal() {
                alive[i] = false;
                changed = true;
            }
            results[i] = Some((out, start.elapsed()));
        }
        if !changed {
            break;
        }
    }
    results
        .into_iter()
        .enumerate()
        .map(|(index, o)| {
            let (outcome, elapsed) = o.expect("checked");
            DeclResult {
                index,
                outcome,
                seeded: alive[index],
                elapsed,
            }
        })
        .collect()
}

/// Seeds for queries: the declarations that were verified.
pub fn verified_seeds(sig: &InternalizedSignature, results: &[DeclResult]) -> Vec<Closure> {
    results
        .iter()
        .filter(|r| r.seeded)
        .map(|r| sig.signature.eq_decls()[r.index].as_closure())
        .collect()
}

/// Everything a query needs: the internalized signature and the verified
/// seeds, computed once.
pub struct Checker {
    pub internal: InternalizedSignature,
    pub decls: Vec<DeclResult>,
    pub seeds: Vec<Closure>,
    pub solver: Solver,
    pub config: EngineConfig,
}

impl Checker {
    pub fn new(sig: &Signature, config: EngineConfig) -> Self {
        let internal = internalize(sig);
        let solver = Solver::default();
        let decls = check_eq_decls(&internal, &solver, &config);
        let seeds = verified_seeds(&internal, &decls);
        Checker {
            internal,
            decls,
            seeds,
            solver,
            config,
        }
    }

    /// Runs a query, with or without the verified declarations as seeds.
    pub fn query(&self, q: &Query, use_seeds: bool) -> Outcome {
        let mut acc = self.internal.clone();
        let l = internalize_query(&q.vars, &q.constraint, &q.lhs, &mut acc);
        let r = internalize_query(&q.vars, &q.constraint, &q.rhs, &mut acc);
        let seeds: &[Closure] = if use_seeds { &self.seeds } else { &[] };
        type_equal(
            &acc.signature,
            &self.solver,
            &self.config,
            seeds,
            &q.vars,
            &q.constraint,
            &l,
            &r,
        )
    }

    /// Runs a query and also returns the signature it ran against, for
    /// replaying the derivation.
    pub fn query_with_signature(
        &self,
        q: &Query,
        use_seeds: bool,
    ) -> (Outcome, Signature, Vec<Closure>) {
        let mut acc = self.internal.clone();
        let l = internalize_query(&q.vars, &q.constraint, &q.lhs, &mut acc);
        let r = internalize_query(&q.vars, &q.constraint, &q.rhs, &mut acc);
        let seeds: Vec<Closure> = if use_seeds {
            self.seeds.clone()
        } else {
            Vec::new()
        };
        let out = type_equal(
            &acc.signature,
            &self.solver,
            &self.config,
            &seeds,
            &q.vars,
            &q.constraint,
            &l,
            &r,
        );
        (out, acc.signature, seeds)
    }
}
