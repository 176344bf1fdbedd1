//! Decision procedures for the index arithmetic.
//!
//! Linear problems are decided exactly by Cooper's quantifier elimination,
//! with every variable ranging over the naturals. Problems with products of
//! variables go through a sign-of-coefficients check on the expanded
//! polynomial and may come back [`Entailment::Unknown`].

mod cooper;
mod formula;
mod linear;
mod multinomial;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ast::{alpha_eq_prop, subst_prop, ArithExpr, ArithProp, FreeVars, GroundSubst, Name};

pub use formula::{Atom, Formula};
pub use linear::{linearize, LinearForm};
pub use multinomial::{affirm_eq, affirm_ge, affirm_gt, Multinomial};

use cooper::Eliminator;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("non-linear term `{0}`")]
    NonLinear(String),
    #[error("arithmetic resource limit exceeded")]
    ResourceLimit,
    #[error("variable `{0}` has no value")]
    Unbound(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest intermediate formula, counted in atoms.
    pub max_atoms: usize,
    /// Eliminate `x` directly through a conjunct `x = e` when there is one.
    pub equality_substitution: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_atoms: 1_000_000,
            equality_substitution: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Entailment {
    Holds,
    Fails,
    Unknown,
}

impl Entailment {
    pub fn holds(self) -> bool {
        self == Entailment::Holds
    }
}

/// Evaluates `e` at `σ`. Subtraction is over the integers.
pub fn eval_expr(e: &ArithExpr, s: &GroundSubst) -> Result<BigInt, ArithError> {
    Ok(match e {
        ArithExpr::Const(c) => c.clone(),
        ArithExpr::Var(v) => s
            .get(v)
            .cloned()
            .ok_or_else(|| ArithError::Unbound(v.clone()))?,
        ArithExpr::Add(a, b) => eval_expr(a, s)? + eval_expr(b, s)?,
        ArithExpr::Sub(a, b) => eval_expr(a, s)? - eval_expr(b, s)?,
        ArithExpr::Mul(a, b) => eval_expr(a, s)? * eval_expr(b, s)?,
    })
}

/// Truth of `p` at `σ`. Quantifier-free propositions are evaluated
/// directly; quantified ones are closed with `σ` and decided.
pub fn eval_prop(p: &ArithProp, s: &GroundSubst) -> Result<bool, ArithError> {
    Ok(match p {
        ArithProp::True => true,
        ArithProp::False => false,
        ArithProp::Eq(a, b) => eval_expr(a, s)? == eval_expr(b, s)?,
        ArithProp::Gt(a, b) => eval_expr(a, s)? > eval_expr(b, s)?,
        ArithProp::Divides(d, e) => {
            let v = eval_expr(e, s)?;
            if d.is_zero() {
                v.is_zero()
            } else {
                v.mod_floor(&d.abs()).is_zero()
            }
        }
        ArithProp::And(a, b) => eval_prop(a, s)? && eval_prop(b, s)?,
        ArithProp::Or(a, b) => eval_prop(a, s)? || eval_prop(b, s)?,
        ArithProp::Not(a) => !eval_prop(a, s)?,
        ArithProp::Exists(..) | ArithProp::Forall(..) => {
            let fv = p.free_vars();
            if let Some(v) = fv.iter().find(|v| s.get(v).is_none()) {
                return Err(ArithError::Unbound(v.clone()));
            }
            decide_closed(&subst_prop(p, &s.to_subst()))?
        }
    })
}

/// Atom budget for recognizing an elimination result as constant.
const COLLAPSE_BUDGET: usize = 20_000;

/// Quantifier-free equivalent of `p` over the naturals.
pub fn eliminate(p: &ArithProp) -> Result<ArithProp, ArithError> {
    eliminate_with(p, &SolverConfig::default())
}

pub fn eliminate_with(p: &ArithProp, config: &SolverConfig) -> Result<ArithProp, ArithError> {
    let f = Eliminator { config }.formula(p, true)?;
    if matches!(f, Formula::True | Formula::False) {
        return Ok(f.to_prop());
    }
    // free variables are natural; collapse results that are constant there
    let q = f.to_prop();
    let probe = SolverConfig {
        max_atoms: config.max_atoms.min(COLLAPSE_BUDGET),
        ..config.clone()
    };
    if decide_closed_with(&q, &probe) == Ok(true) {
        return Ok(ArithProp::True);
    }
    if decide_closed_with(&q.clone().not(), &probe) == Ok(true) {
        return Ok(ArithProp::False);
    }
    Ok(q)
}

/// Truth of a closed proposition. Free variables, if any, are read
/// universally.
pub fn decide_closed(p: &ArithProp) -> Result<bool, ArithError> {
    decide_closed_with(p, &SolverConfig::default())
}

pub fn decide_closed_with(p: &ArithProp, config: &SolverConfig) -> Result<bool, ArithError> {
    let fv: Vec<Name> = p.free_vars().into_iter().collect();
    // ∀V.p is false iff ∃V.¬p
    Ok(!exists_all(&fv, p, false, config)?)
}

/// `∃vars. p` (or `∃vars. ¬p` when `positive` is false), decided.
fn exists_all(
    vars: &[Name],
    p: &ArithProp,
    positive: bool,
    config: &SolverConfig,
) -> Result<bool, ArithError> {
    let el = Eliminator { config };
    let mut f = el.formula(p, positive)?;
    for v in vars {
        f = el.exists(v, f)?;
        if f == Formula::True || f == Formula::False {
            break;
        }
    }
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        // only reachable if a variable was left unquantified
        other => Err(ArithError::Unbound(
            other
                .atoms()
                .first()
                .and_then(|a| a.form().coeffs.keys().next().cloned())
                .unwrap_or_default(),
        )),
    }
}

/// Decides `∀V. C ⊃ φ` over the naturals, caching answers.
pub struct Solver {
    config: SolverConfig,
    cache: RefCell<HashMap<(Vec<Name>, ArithProp, ArithProp), Entailment>>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Solver {
            config,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn entails(&self, vars: &[Name], c: &ArithProp, phi: &ArithProp) -> Entailment {
        if *phi == ArithProp::True || c == phi {
            return Entailment::Holds;
        }
        let key = (vars.to_vec(), c.clone(), phi.clone());
        if let Some(&r) = self.cache.borrow().get(&key) {
            return r;
        }
        let r = self.entails_uncached(vars, c, phi);
        self.cache.borrow_mut().insert(key, r);
        r
    }

    fn entails_uncached(&self, vars: &[Name], c: &ArithProp, phi: &ArithProp) -> Entailment {
        let all = closing_vars(vars, &[c, phi]);
        match self.valid_linear(&all, c, phi) {
            Ok(true) => return Entailment::Holds,
            Ok(false) => return Entailment::Fails,
            Err(ArithError::NonLinear(_)) => {}
            Err(_) => return Entailment::Unknown,
        }
        // weaken C to its linear conjuncts; sound for proving φ
        let linear_c = ArithProp::conj(c.conjuncts().into_iter().filter(|q| is_linear(q)).cloned());
        if is_linear(phi) {
            return match self.valid_linear(&all, &linear_c, phi) {
                Ok(true) => Entailment::Holds,
                _ => Entailment::Unknown,
            };
        }
        for atom in phi.conjuncts() {
            let ok = if is_linear(atom) {
                matches!(self.valid_linear(&all, &linear_c, atom), Ok(true))
            } else {
                affirm_atom(atom)
            };
            if !ok {
                return Entailment::Unknown;
            }
        }
        Entailment::Holds
    }

    /// `∀V. C ⊃ φ` for linear input.
    fn valid_linear(
        &self,
        vars: &[Name],
        c: &ArithProp,
        phi: &ArithProp,
    ) -> Result<bool, ArithError> {
        let counter = c.clone().and(phi.clone().not());
        Ok(!exists_all(vars, &counter, true, &self.config)?)
    }

    /// `∃V. C`: `Some(true)` satisfiable, `Some(false)` not, `None` unknown.
    pub fn satisfiable(&self, vars: &[Name], c: &ArithProp) -> Option<bool> {
        match self.entails(vars, c, &ArithProp::False) {
            Entailment::Holds => Some(false),
            Entailment::Fails => Some(true),
            Entailment::Unknown => None,
        }
    }

    /// `C ⊨ φ ↔ ψ`, short-circuiting on propositions that agree after
    /// normalizing their atoms.
    pub fn equivalent(
        &self,
        vars: &[Name],
        c: &ArithProp,
        phi: &ArithProp,
        psi: &ArithProp,
    ) -> Entailment {
        if alpha_eq_prop(phi, psi) || same_normal_form(phi, psi) {
            return Entailment::Holds;
        }
        self.entails(vars, c, &phi.clone().iff(psi.clone()))
    }
}

/// Free function form of [`Solver::entails`] with the default budget.
pub fn entails(vars: &[Name], c: &ArithProp, phi: &ArithProp) -> Entailment {
    Solver::default().entails(vars, c, phi)
}

fn closing_vars(vars: &[Name], props: &[&ArithProp]) -> Vec<Name> {
    let mut out: Vec<Name> = vars.to_vec();
    let mut seen: BTreeSet<Name> = vars.iter().cloned().collect();
    for p in props {
        for v in p.free_vars() {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out
}

pub fn is_linear(p: &ArithProp) -> bool {
    match p {
        ArithProp::True | ArithProp::False => true,
        ArithProp::Eq(a, b) | ArithProp::Gt(a, b) => linearize(a).is_ok() && linearize(b).is_ok(),
        ArithProp::Divides(_, e) => linearize(e).is_ok(),
        ArithProp::And(a, b) | ArithProp::Or(a, b) => is_linear(a) && is_linear(b),
        ArithProp::Not(a) | ArithProp::Exists(_, a) | ArithProp::Forall(_, a) => is_linear(a),
    }
}

fn as_ge(p: &ArithProp) -> Option<(&ArithExpr, &ArithExpr)> {
    if let ArithProp::Or(l, r) = p {
        if let (ArithProp::Gt(a, b), ArithProp::Eq(c, d)) = (l.as_ref(), r.as_ref()) {
            if a == c && b == d {
                return Some((a, b));
            }
        }
    }
    None
}

/// The normalizer rules: `=` needs all coefficients zero, `≥`/`>` all
/// coefficients nonnegative.
fn affirm_atom(p: &ArithProp) -> bool {
    if let Some((a, b)) = as_ge(p) {
        return affirm_ge(a, b);
    }
    match p {
        ArithProp::True => true,
        ArithProp::Eq(a, b) => affirm_eq(a, b),
        ArithProp::Gt(a, b) => affirm_gt(a, b),
        _ => false,
    }
}

/// Structural equality after replacing each relation by the normal form of
/// the difference of its sides.
fn same_normal_form(p: &ArithProp, q: &ArithProp) -> bool {
    match (p, q) {
        (ArithProp::True, ArithProp::True) | (ArithProp::False, ArithProp::False) => true,
        (ArithProp::Eq(a, b), ArithProp::Eq(c, d)) => {
            let l = Multinomial::normalize(&(a.clone() - b.clone()));
            let r = Multinomial::normalize(&(c.clone() - d.clone()));
            l == r || l == r.neg()
        }
        (ArithProp::Gt(a, b), ArithProp::Gt(c, d)) => {
            Multinomial::normalize(&(a.clone() - b.clone()))
                == Multinomial::normalize(&(c.clone() - d.clone()))
        }
        (ArithProp::Divides(d1, a), ArithProp::Divides(d2, b)) => {
            d1.abs() == d2.abs() && Multinomial::normalize(a) == Multinomial::normalize(b)
        }
        (ArithProp::And(a, b), ArithProp::And(c, d))
        | (ArithProp::Or(a, b), ArithProp::Or(c, d)) => {
            same_normal_form(a, c) && same_normal_form(b, d)
        }
        (ArithProp::Not(a), ArithProp::Not(b)) => same_normal_form(a, b),
        _ => alpha_eq_prop(p, q),
    }
}

/// Smallest-first search for `σ` over `vars` with values in `0..=bound`
/// satisfying `p`, trying at most `cap` assignments.
pub fn find_model(vars: &[Name], p: &ArithProp, bound: u64, cap: usize) -> Option<GroundSubst> {
    let n = vars.len();
    if n == 0 {
        return eval_prop(p, &GroundSubst::new())
            .ok()
            .filter(|&b| b)
            .map(|_| GroundSubst::new());
    }
    let mut tried = 0usize;
    // assignments ordered by their largest value, then lexicographically
    for top in 0..=bound {
        let mut digits = vec![0u64; n];
        loop {
            if digits.contains(&top) {
                tried += 1;
                if tried > cap {
                    return None;
                }
                let s = GroundSubst::from_pairs(
                    vars.iter()
                        .cloned()
                        .zip(digits.iter().map(|&d| BigInt::from(d))),
                );
                if eval_prop(p, &s) == Ok(true) {
                    return Some(s);
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if digits[i] < top {
                    digits[i] += 1;
                    break;
                }
                digits[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_prop;

    fn p(s: &str) -> ArithProp {
        parse_prop(s).unwrap()
    }

    fn names(xs: &[&str]) -> Vec<Name> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ground_facts() {
        assert!(!decide_closed(&p("2 = 0")).unwrap());
        assert!(decide_closed(&p("13 = 2*6+1")).unwrap());
        assert!(decide_closed(&p("forall n. exists k. n = 2*k \\/ n = 2*k+1")).unwrap());
        assert!(decide_closed(&p("3*4 > 11")).unwrap());
    }

    #[test]
    fn eliminate_examples() {
        assert_eq!(
            eliminate(&p("exists k. 0 = 2*k+1")).unwrap(),
            ArithProp::False
        );
        let q = p("exists x. exists y. x = 1 /\\ y = 0 /\\ x+1 = 2 /\\ y+1 = 1");
        assert_eq!(eliminate(&q).unwrap(), ArithProp::True);
        assert_eq!(
            eliminate(&p("exists k. n = 2*k \\/ n = 2*k+1")).unwrap(),
            ArithProp::True
        );
    }

    #[test]
    fn entailment_examples() {
        let n = names(&["n"]);
        assert_eq!(
            entails(&n, &p("n >= 0 /\\ n > 0"), &p("n-1 >= 0")),
            Entailment::Holds
        );
        assert_eq!(
            entails(&n, &ArithProp::True, &p("n = n+1")),
            Entailment::Fails
        );
        let xy = names(&["x", "y"]);
        let def = p("exists x'. exists y'. x' = x+1 /\\ y' = y /\\ x'+1 = x+2 /\\ y'+1 = y+1");
        assert_eq!(entails(&xy, &ArithProp::True, &def), Entailment::Holds);
    }

    #[test]
    fn subtraction_is_integer_valued() {
        // without n > 0 the predecessor can be negative
        assert_eq!(
            entails(&names(&["n"]), &ArithProp::True, &p("n-1 >= 0")),
            Entailment::Fails
        );
    }

    #[test]
    fn non_linear_entailments() {
        let nm = names(&["n", "m"]);
        assert_eq!(
            entails(&nm, &ArithProp::True, &p("(n+1)*(n+1) = n*n+2*n+1")),
            Entailment::Holds
        );
        assert_eq!(
            entails(&nm, &ArithProp::True, &p("n*m = m*n")),
            Entailment::Holds
        );
        assert_eq!(
            entails(&nm, &ArithProp::True, &p("n*n >= n")),
            Entailment::Unknown
        );
        assert_eq!(
            entails(&nm, &p("n*m > 0 /\\ n > 2"), &p("n > 1")),
            Entailment::Holds
        );
        assert_eq!(
            entails(&nm, &ArithProp::True, &p("forall k. k*k >= 0")),
            Entailment::Unknown
        );
    }

    #[test]
    fn satisfiability() {
        let s = Solver::default();
        assert_eq!(
            s.satisfiable(&names(&["n"]), &p("n > 0 /\\ n < 1")),
            Some(false)
        );
        assert_eq!(
            s.satisfiable(&names(&["n"]), &p("2 | n /\\ n > 3")),
            Some(true)
        );
    }

    #[test]
    fn equivalence_shortcut() {
        let s = Solver::default();
        let v = names(&["n", "m"]);
        assert_eq!(
            s.equivalent(&v, &ArithProp::True, &p("n*m = 0"), &p("0 = m*n")),
            Entailment::Holds
        );
        assert_eq!(
            s.equivalent(&v, &ArithProp::True, &p("n > 0"), &p("n >= 1")),
            Entailment::Holds
        );
        assert_eq!(
            s.equivalent(&v, &ArithProp::True, &p("n > 0"), &p("n > 1")),
            Entailment::Fails
        );
    }

    #[test]
    fn evaluation() {
        let s = GroundSubst::from_pairs([
            ("x".to_string(), BigInt::from(2)),
            ("y".to_string(), BigInt::from(5)),
        ]);
        assert_eq!(
            eval_expr(
                &(ArithExpr::int(2) * ArithExpr::int(3) + ArithExpr::int(1)),
                &s
            )
            .unwrap(),
            BigInt::from(7)
        );
        assert_eq!(
            eval_expr(&(ArithExpr::var("x") - ArithExpr::var("y")), &s).unwrap(),
            BigInt::from(-3)
        );
        assert!(eval_prop(&p("exists k. y = 2*k+1"), &s).unwrap());
        assert!(matches!(
            eval_expr(&ArithExpr::var("z"), &s),
            Err(ArithError::Unbound(_))
        ));
    }

    #[test]
    fn models() {
        let vars = names(&["a", "b"]);
        let m = find_model(&vars, &p("a + b = 3 /\\ a > b"), 8, 1000).unwrap();
        assert_eq!(m.get("a"), Some(&BigInt::from(2)));
        assert_eq!(m.get("b"), Some(&BigInt::from(1)));
        assert!(find_model(&vars, &p("a > a"), 8, 1000).is_none());
    }

    #[test]
    fn resource_limit_is_reported() {
        let tight = SolverConfig {
            max_atoms: 4,
            ..SolverConfig::default()
        };
        let q = p("forall a. forall b. exists c. 7 | a + 2*b + c /\\ 5 | c + a");
        assert_eq!(
            decide_closed_with(&q, &tight),
            Err(ArithError::ResourceLimit)
        );
        assert!(decide_closed(&q).unwrap());
    }
}
