use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ArithError;
use crate::ast::{ArithExpr, Name};

/// `constant + Σ coeff·var`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearForm {
    pub constant: BigInt,
    pub coeffs: BTreeMap<Name, BigInt>,
}

impl LinearForm {
    pub fn constant(c: BigInt) -> Self {
        LinearForm {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(v: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v.to_string(), BigInt::one());
        LinearForm {
            constant: BigInt::zero(),
            coeffs,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: &str) -> BigInt {
        self.coeffs.get(v).cloned().unwrap_or_default()
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (v, c) in &other.coeffs {
            let slot = out.coeffs.entry(v.clone()).or_default();
            *slot += c;
            if slot.is_zero() {
                out.coeffs.remove(v);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> LinearForm {
        if k.is_zero() {
            return LinearForm::default();
        }
        LinearForm {
            constant: &self.constant * k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
        }
    }

    pub fn neg(&self) -> LinearForm {
        self.scale(&-BigInt::one())
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        self.add(&other.neg())
    }

    pub fn add_const(&self, k: &BigInt) -> LinearForm {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Removes `v`, returning its coefficient and the rest.
    pub fn split(&self, v: &str) -> (BigInt, LinearForm) {
        let mut rest = self.clone();
        let c = rest.coeffs.remove(v).unwrap_or_default();
        (c, rest)
    }

    /// Replaces `v` by `by`.
    pub fn subst(&self, v: &str, by: &LinearForm) -> LinearForm {
        let (c, rest) = self.split(v);
        if c.is_zero() {
            rest
        } else {
            rest.add(&by.scale(&c))
        }
    }

    /// gcd of the variable coefficients (0 for a constant form).
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<BigInt>) -> Option<BigInt> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * lookup(v)?;
        }
        Some(acc)
    }

    /// Back to an expression; negative coefficients become subtractions.
    pub fn to_expr(&self) -> ArithExpr {
        let (pos, neg) = self.split_signs();
        if neg.is_constant() && neg.constant.is_zero() {
            return pos;
        }
        pos - neg.to_expr()
    }

    /// `(p, n)` with `self = p - n` and all coefficients of both nonnegative.
    pub fn split_signs(&self) -> (ArithExpr, LinearForm) {
        let mut pos: Option<ArithExpr> = None;
        let mut neg = LinearForm::default();
        let push = |pos: &mut Option<ArithExpr>, e: ArithExpr| {
            *pos = Some(match pos.take() {
                None => e,
                Some(p) => p + e,
            });
        };
        for (v, c) in &self.coeffs {
            if c.is_positive() {
                push(&mut pos, scaled_var(c, v));
            } else {
                neg.coeffs.insert(v.clone(), -c);
            }
        }
        if self.constant.is_positive() {
            push(&mut pos, ArithExpr::Const(self.constant.clone()));
        } else {
            neg.constant = -&self.constant;
        }
        (pos.unwrap_or_else(|| ArithExpr::int(0)), neg)
    }

    /// `(lhs, rhs)` expressions with `self = lhs - rhs`, both sign-free.
    pub fn sides(&self) -> (ArithExpr, ArithExpr) {
        let (pos, neg) = self.split_signs();
        let (neg_e, _) = neg.split_signs();
        (pos, neg_e)
    }
}

fn scaled_var(c: &BigInt, v: &str) -> ArithExpr {
    if c.is_one() {
        ArithExpr::var(v)
    } else {
        ArithExpr::Const(c.clone()) * ArithExpr::var(v)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Linear form of `e`. Products are allowed when one side is constant.
pub fn linearize(e: &ArithExpr) -> Result<LinearForm, ArithError> {
    Ok(match e {
        ArithExpr::Const(c) => LinearForm::constant(c.clone()),
        ArithExpr::Var(v) => LinearForm::var(v),
        ArithExpr::Add(a, b) => linearize(a)?.add(&linearize(b)?),
        ArithExpr::Sub(a, b) => linearize(a)?.sub(&linearize(b)?),
        ArithExpr::Mul(a, b) => {
            let (la, lb) = (linearize(a)?, linearize(b)?);
            if la.is_constant() {
                lb.scale(&la.constant)
            } else if lb.is_constant() {
                la.scale(&lb.constant)
            } else {
                return Err(ArithError::NonLinear(e.to_string()));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ArithExpr {
        ArithExpr::var("x")
    }

    #[test]
    fn collects_coefficients() {
        let e = ArithExpr::int(2) * (x() + ArithExpr::int(3)) - x();
        let l = linearize(&e).unwrap();
        assert_eq!(l.constant, BigInt::from(6));
        assert_eq!(l.coeff("x"), BigInt::one());
    }

    #[test]
    fn cancelled_variables_vanish() {
        let l = linearize(&(x() - x())).unwrap();
        assert!(l.is_constant());
    }

    #[test]
    fn rejects_products_of_variables() {
        assert!(matches!(
            linearize(&(x() * x())),
            Err(ArithError::NonLinear(_))
        ));
    }

    #[test]
    fn to_expr_round_trip() {
        let e = x() - ArithExpr::int(2) * ArithExpr::var("y") - ArithExpr::int(1);
        let l = linearize(&e).unwrap();
        assert_eq!(linearize(&l.to_expr()).unwrap(), l);
        assert_eq!(l.to_expr().to_string(), "x-(2*y+1)");
    }
}
