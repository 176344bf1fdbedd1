//! Sum-of-monomials normal form for expressions with products.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ast::{ArithExpr, Name};

/// Monomials are sorted variable lists (a multiset); the empty monomial
/// carries the constant term. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Multinomial {
    pub terms: BTreeMap<Vec<Name>, BigInt>,
}

impl Multinomial {
    pub fn constant(c: BigInt) -> Self {
        let mut m = Multinomial::default();
        m.insert(Vec::new(), c);
        m
    }

    pub fn var(v: &str) -> Self {
        let mut m = Multinomial::default();
        m.insert(vec![v.to_string()], BigInt::one());
        m
    }

    fn insert(&mut self, mono: Vec<Name>, c: BigInt) {
        let slot = self.terms.entry(mono.clone()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn normalize(e: &ArithExpr) -> Self {
        match e {
            ArithExpr::Const(c) => Multinomial::constant(c.clone()),
            ArithExpr::Var(v) => Multinomial::var(v),
            ArithExpr::Add(a, b) => Multinomial::normalize(a).add(&Multinomial::normalize(b)),
            ArithExpr::Sub(a, b) => Multinomial::normalize(a).add(&Multinomial::normalize(b).neg()),
            ArithExpr::Mul(a, b) => Multinomial::normalize(a).mul(&Multinomial::normalize(b)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Multinomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Multinomial::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m: Vec<Name> = m1.iter().chain(m2).cloned().collect();
                m.sort();
                out.insert(m, c1 * c2);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every coefficient (constant included) is nonnegative, so the value
    /// is nonnegative at every natural assignment.
    pub fn all_nonneg(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn coeff(&self, mono: &[&str]) -> BigInt {
        let mut key: Vec<Name> = mono.iter().map(|s| s.to_string()).collect();
        key.sort();
        self.terms.get(&key).cloned().unwrap_or_default()
    }
}

impl fmt::Display for Multinomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{}", m.join("*"))?;
            }
        }
        Ok(())
    }
}

/// `a = b` holds identically.
pub fn affirm_eq(a: &ArithExpr, b: &ArithExpr) -> bool {
    Multinomial::normalize(&(a.clone() - b.clone())).is_zero()
}

/// `a ≥ b` at every natural assignment, by sign of coefficients. Sound but
/// incomplete (`n*n ≥ n` is not affirmed).
pub fn affirm_ge(a: &ArithExpr, b: &ArithExpr) -> bool {
    Multinomial::normalize(&(a.clone() - b.clone())).all_nonneg()
}

/// `a > b`, checked as `a - b - 1 ≥ 0`.
pub fn affirm_gt(a: &ArithExpr, b: &ArithExpr) -> bool {
    affirm_ge(a, &(b.clone() + ArithExpr::int(1)))
}
