//! Cooper's quantifier elimination, relativized to the naturals.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::formula::{Atom, Formula};
use super::linear::{linearize, LinearForm};
use super::{ArithError, SolverConfig};
use crate::ast::ArithProp;

pub(crate) struct Eliminator<'a> {
    pub config: &'a SolverConfig,
}

impl Eliminator<'_> {
    fn check(&self, f: &Formula) -> Result<(), ArithError> {
        if f.size() > self.config.max_atoms {
            Err(ArithError::ResourceLimit)
        } else {
            Ok(())
        }
    }

    /// Quantifier-free NNF equivalent of `p` (under `positive`, of `¬p`
    /// otherwise).
    pub fn formula(&self, p: &ArithProp, positive: bool) -> Result<Formula, ArithError> {
        match p {
            ArithProp::Exists(x, body) => {
                let inner = self.formula(body, true)?;
                let e = self.exists(x, inner)?;
                Ok(if positive { e } else { e.negate() })
            }
            ArithProp::Forall(x, body) => {
                let inner = self.formula(body, false)?;
                let e = self.exists(x, inner)?;
                Ok(if positive { e.negate() } else { e })
            }
            ArithProp::Not(a) => self.formula(a, !positive),
            ArithProp::And(a, b) | ArithProp::Or(a, b) => {
                let l = self.formula(a, positive)?;
                let r = self.formula(b, positive)?;
                let f = if matches!(p, ArithProp::And(..)) == positive {
                    Formula::and(vec![l, r])
                } else {
                    Formula::or(vec![l, r])
                };
                self.check(&f)?;
                Ok(f)
            }
            atom => super::formula::from_expr_atoms(atom, positive, &linearize),
        }
    }

    /// `∃x ≥ 0. f` without the quantifier.
    pub fn exists(&self, x: &str, f: Formula) -> Result<Formula, ArithError> {
        if !f.mentions(x) {
            return Ok(f);
        }
        if let Formula::Or(ds) = f {
            let mut out = Vec::with_capacity(ds.len());
            for d in ds {
                let e = self.exists(x, d)?;
                if e == Formula::True {
                    return Ok(Formula::True);
                }
                out.push(e);
            }
            let r = Formula::or(out);
            self.check(&r)?;
            return Ok(r);
        }
        let conjuncts = match f {
            Formula::And(cs) => cs,
            other => vec![other],
        };
        let (with, without): (Vec<Formula>, Vec<Formula>) =
            conjuncts.into_iter().partition(|c| c.mentions(x));

        if self.config.equality_substitution {
            if let Some(value) = unit_equation(x, &with) {
                // x = value; keep value ≥ 0 so that x stays natural
                let mut rest: Vec<Formula> = with.iter().map(|c| c.subst(x, &value)).collect();
                rest.push(Formula::atom(Atom::Pos(value.add_const(&BigInt::one()))));
                rest.extend(without);
                let r = Formula::and(rest);
                self.check(&r)?;
                return Ok(r);
            }
        }
        let core = match constant_upper_bound(x, &with) {
            Some(u) if u < BigInt::from(ENUMERATION_LIMIT) => {
                self.enumerate(x, &u, Formula::and(with))?
            }
            _ => self.cooper(x, Formula::and(with))?,
        };
        let mut all = without;
        all.push(core);
        let r = Formula::and(all);
        self.check(&r)?;
        Ok(r)
    }

    /// `∃x ∈ 0..=u. f` as a finite disjunction.
    fn enumerate(&self, x: &str, u: &BigInt, f: Formula) -> Result<Formula, ArithError> {
        let mut out = Vec::new();
        let mut total = 0usize;
        let mut k = BigInt::zero();
        while &k <= u {
            let g = f.subst(x, &LinearForm::constant(k.clone()));
            if g == Formula::True {
                return Ok(Formula::True);
            }
            total += g.size();
            if total > self.config.max_atoms {
                return Err(ArithError::ResourceLimit);
            }
            out.push(g);
            k += 1;
        }
        Ok(Formula::or(out))
    }

    fn cooper(&self, x: &str, f: Formula) -> Result<Formula, ArithError> {
        // scale so every coefficient of x is ±l, then read l·x as x
        let l = f
            .atoms()
            .iter()
            .map(|a| a.form().coeff(x).abs())
            .filter(|c| !c.is_zero())
            .fold(BigInt::one(), |acc, c| acc.lcm(&c));
        let scaled = if l.is_one() {
            f
        } else {
            f.map_forms(&|a: &Atom| scale_atom(a, x, &l))
        };
        let nonneg = Formula::atom(Atom::Pos(LinearForm::var(x).add_const(&BigInt::one())));
        let f = Formula::and(vec![
            scaled,
            nonneg,
            Formula::atom(Atom::Dvd(l, LinearForm::var(x))),
        ]);
        if !f.mentions(x) {
            return Ok(f);
        }

        let atoms = f.atoms();
        let delta = atoms
            .iter()
            .filter(|a| a.form().mentions(x))
            .filter_map(|a| match a {
                Atom::Dvd(d, _) | Atom::NotDvd(d, _) => Some(d.clone()),
                _ => None,
            })
            .fold(BigInt::one(), |acc, d| acc.lcm(&d));
        let (lower, upper) = bounds(x, &atoms);

        let delta_n = delta.to_usize().filter(|&d| d <= self.config.max_atoms);
        let Some(delta_n) = delta_n else {
            return Err(ArithError::ResourceLimit);
        };
        // the x ≥ 0 conjunct makes the -∞ projection false, so the lower
        // set needs no extra disjunct; the +∞ projection costs one more
        let use_upper = upper.len() + 1 < lower.len();
        let points = if use_upper { &upper } else { &lower };
        let estimate = (points.len() + usize::from(use_upper))
            .saturating_mul(delta_n)
            .saturating_mul(f.size());
        if estimate > self.config.max_atoms.saturating_mul(4) {
            return Err(ArithError::ResourceLimit);
        }

        let mut disjuncts = Vec::new();
        let mut total = 0usize;
        let mut push = |g: Formula, disjuncts: &mut Vec<Formula>| -> Result<bool, ArithError> {
            if g == Formula::True {
                return Ok(true);
            }
            if g != Formula::False {
                total += g.size();
                if total > self.config.max_atoms {
                    return Err(ArithError::ResourceLimit);
                }
                disjuncts.push(g);
            }
            Ok(false)
        };
        if use_upper {
            let inf = plus_infinity(x, &f);
            for j in 1..=delta_n {
                let at = LinearForm::constant(-BigInt::from(j));
                if push(inf.subst(x, &at), &mut disjuncts)? {
                    return Ok(Formula::True);
                }
            }
        }
        for b in points {
            for j in 1..=delta_n {
                let at = if use_upper {
                    b.add_const(&-BigInt::from(j))
                } else {
                    b.add_const(&BigInt::from(j))
                };
                if push(f.subst(x, &at), &mut disjuncts)? {
                    return Ok(Formula::True);
                }
            }
        }
        Ok(Formula::or(disjuncts))
    }
}

/// A conjunct `±x + r = 0`, giving `x = ∓r`.
/// Bounds below this are eliminated by trying every value.
const ENUMERATION_LIMIT: u32 = 64;

/// The least constant `u` with a conjunct `c·x + k > 0`, `c < 0`, forcing `x ≤ u`.
fn constant_upper_bound(x: &str, conjuncts: &[Formula]) -> Option<BigInt> {
    conjuncts
        .iter()
        .filter_map(|c| match c {
            Formula::Atom(Atom::Pos(t)) => {
                let (c, rest) = t.split(x);
                (c.is_negative() && rest.is_constant())
                    .then(|| (rest.constant - BigInt::one()).div_floor(&-c))
            }
            _ => None,
        })
        .min()
}

fn unit_equation(x: &str, conjuncts: &[Formula]) -> Option<LinearForm> {
    conjuncts.iter().find_map(|c| match c {
        Formula::Atom(Atom::Zero(t)) => {
            let (c, rest) = t.split(x);
            if c.is_one() {
                Some(rest.neg())
            } else if (-&c).is_one() {
                Some(rest)
            } else {
                None
            }
        }
        _ => None,
    })
}

fn scale_atom(a: &Atom, x: &str, l: &BigInt) -> Atom {
    let c = a.form().coeff(x);
    if c.is_zero() {
        return a.clone();
    }
    let m = l / c.abs();
    let mut t = a.form().scale(&m);
    // l·x is now the new x
    let sign = if c.is_positive() {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    t.coeffs.insert(x.to_string(), sign);
    match a {
        Atom::Pos(_) => Atom::Pos(t),
        Atom::Zero(_) => Atom::Zero(t),
        Atom::NonZero(_) => Atom::NonZero(t),
        Atom::Dvd(d, _) => Atom::Dvd(d * &m, t),
        Atom::NotDvd(d, _) => Atom::NotDvd(d * &m, t),
    }
}

/// Candidate lower bounds `b` (solutions are tried at `b + j`) and upper
/// bounds `a` (tried at `a - j`), for unit coefficients of `x`.
fn bounds(x: &str, atoms: &[&Atom]) -> (Vec<LinearForm>, Vec<LinearForm>) {
    let mut lower = BTreeSet::new();
    let mut upper = BTreeSet::new();
    for a in atoms {
        let (c, r) = a.form().split(x);
        if c.is_zero() {
            continue;
        }
        let up = c.is_positive();
        let one = BigInt::one();
        match a {
            // x + r > 0: x > -r
            Atom::Pos(_) if up => {
                lower.insert(r.neg());
            }
            // -x + r > 0: x < r
            Atom::Pos(_) => {
                upper.insert(r);
            }
            Atom::Zero(_) => {
                let v = if up { r.neg() } else { r };
                lower.insert(v.add_const(&-&one));
                upper.insert(v.add_const(&one));
            }
            Atom::NonZero(_) => {
                let v = if up { r.neg() } else { r };
                lower.insert(v.clone());
                upper.insert(v);
            }
            Atom::Dvd(..) | Atom::NotDvd(..) => {}
        }
    }
    (lower.into_iter().collect(), upper.into_iter().collect())
}

/// `f` for arbitrarily large `x`: only divisibility atoms keep `x`.
fn plus_infinity(x: &str, f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => {
            let c = a.form().coeff(x);
            if c.is_zero() {
                return f.clone();
            }
            match a {
                Atom::Pos(_) => Formula::bool(c.is_positive()),
                Atom::Zero(_) => Formula::False,
                Atom::NonZero(_) => Formula::True,
                Atom::Dvd(..) | Atom::NotDvd(..) => f.clone(),
            }
        }
        Formula::And(xs) => Formula::and(xs.iter().map(|g| plus_infinity(x, g)).collect()),
        Formula::Or(xs) => Formula::or(xs.iter().map(|g| plus_infinity(x, g)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::ArithExpr;

    fn elim(p: &ArithProp) -> Formula {
        let config = SolverConfig::default();
        Eliminator { config: &config }.formula(p, true).unwrap()
    }

    fn n() -> ArithExpr {
        ArithExpr::var("n")
    }

    fn k() -> ArithExpr {
        ArithExpr::var("k")
    }

    #[test]
    fn parity_is_total() {
        let two_k = ArithExpr::int(2) * k();
        let p = ArithProp::exists(
            "k",
            ArithProp::eq(n(), two_k.clone()).or(ArithProp::eq(n(), two_k + ArithExpr::int(1))),
        );
        assert_eq!(elim(&ArithProp::forall("n", p)), Formula::True);
    }

    #[test]
    fn odd_is_not_zero() {
        let p = ArithProp::exists(
            "k",
            ArithProp::eq(
                ArithExpr::int(0),
                ArithExpr::int(2) * k() + ArithExpr::int(1),
            ),
        );
        assert_eq!(elim(&p), Formula::False);
    }

    #[test]
    fn even_leaves_divisibility() {
        let p = ArithProp::exists("k", ArithProp::eq(n(), ArithExpr::int(2) * k()));
        let f = elim(&p);
        assert!(f.atoms().iter().any(|a| matches!(a, Atom::Dvd(..))));
        for v in 0..10 {
            let g = f.subst("n", &LinearForm::constant(BigInt::from(v)));
            assert_eq!(g, Formula::bool(v % 2 == 0), "n = {v}");
        }
    }

    #[test]
    fn naturals_have_no_predecessor_of_zero() {
        // ∃k. k + 1 = 0 has no natural solution
        let p = ArithProp::exists(
            "k",
            ArithProp::eq(k() + ArithExpr::int(1), ArithExpr::int(0)),
        );
        assert_eq!(elim(&p), Formula::False);
    }

    #[test]
    fn bounded_search_with_upper_bounds() {
        // ∃k. k < n ∧ 3 | k  ⟺  n > 0
        let p = ArithProp::exists(
            "k",
            ArithProp::gt(n(), k()).and(ArithProp::Divides(BigInt::from(3), k())),
        );
        let f = elim(&p);
        for v in 0..10 {
            let g = f.subst("n", &LinearForm::constant(BigInt::from(v)));
            assert_eq!(g, Formula::bool(v > 0), "n = {v}");
        }
    }

    #[test]
    fn constant_bound_is_enumerated() {
        // ∃k ≤ 4. 5 | n + 3k
        let p = ArithProp::exists(
            "k",
            ArithProp::ge(ArithExpr::int(4), k()).and(ArithProp::Divides(
                BigInt::from(5),
                n() + ArithExpr::int(3) * k(),
            )),
        );
        let f = elim(&p);
        assert!(!f.mentions("k"));
        for v in 0..10 {
            let g = f.subst("n", &LinearForm::constant(BigInt::from(v)));
            assert_eq!(g, Formula::True, "n = {v}");
        }
        let none = ArithProp::exists("k", ArithProp::gt(ArithExpr::int(0), k()));
        assert_eq!(elim(&none), Formula::False);
    }

    #[test]
    fn without_substitution_same_answer() {
        let p = ArithProp::exists(
            "x",
            ArithProp::eq(ArithExpr::var("x"), n() + ArithExpr::int(1))
                .and(ArithProp::gt(ArithExpr::var("x"), ArithExpr::int(3))),
        );
        let plain = SolverConfig {
            equality_substitution: false,
            ..SolverConfig::default()
        };
        let f = Eliminator { config: &plain }.formula(&p, true).unwrap();
        let g = elim(&p);
        for v in 0..8 {
            let at = LinearForm::constant(BigInt::from(v));
            assert_eq!(f.subst("n", &at), g.subst("n", &at));
        }
    }
}
