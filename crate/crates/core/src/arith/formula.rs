//! Quantifier-free formulas in negation normal form over linear atoms.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linear::LinearForm;
use crate::ast::{ArithExpr, ArithProp};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `t > 0`
    Pos(LinearForm),
    /// `t = 0`
    Zero(LinearForm),
    /// `t ≠ 0`
    NonZero(LinearForm),
    /// `d | t`, `d ≥ 2`
    Dvd(BigInt, LinearForm),
    NotDvd(BigInt, LinearForm),
}

impl Atom {
    pub fn form(&self) -> &LinearForm {
        match self {
            Atom::Pos(t) | Atom::Zero(t) | Atom::NonZero(t) => t,
            Atom::Dvd(_, t) | Atom::NotDvd(_, t) => t,
        }
    }

    pub fn negate(&self) -> Atom {
        match self {
            // ¬(t > 0) ⟺ -t + 1 > 0
            Atom::Pos(t) => Atom::Pos(t.neg().add_const(&BigInt::one())),
            Atom::Zero(t) => Atom::NonZero(t.clone()),
            Atom::NonZero(t) => Atom::Zero(t.clone()),
            Atom::Dvd(d, t) => Atom::NotDvd(d.clone(), t.clone()),
            Atom::NotDvd(d, t) => Atom::Dvd(d.clone(), t.clone()),
        }
    }

    fn with_form(&self, t: LinearForm) -> Atom {
        match self {
            Atom::Pos(_) => Atom::Pos(t),
            Atom::Zero(_) => Atom::Zero(t),
            Atom::NonZero(_) => Atom::NonZero(t),
            Atom::Dvd(d, _) => Atom::Dvd(d.clone(), t),
            Atom::NotDvd(d, _) => Atom::NotDvd(d.clone(), t),
        }
    }

    /// Canonical form; ground atoms are evaluated.
    pub fn normalize(self) -> Formula {
        match self {
            Atom::Pos(t) => {
                if t.is_constant() {
                    return Formula::bool(t.constant.is_positive());
                }
                let g = t.coeff_gcd();
                if g.is_one() {
                    return Formula::Atom(Atom::Pos(t));
                }
                // g·t' + k > 0  ⟺  t' > -k/g  ⟺  t' + ceil(k/g) > 0
                let k = t.constant.clone();
                let mut r = LinearForm::constant(BigInt::zero());
                for (v, c) in &t.coeffs {
                    r.coeffs.insert(v.clone(), c / &g);
                }
                r.constant = -((-k).div_floor(&g));
                Formula::Atom(Atom::Pos(r))
            }
            Atom::Zero(t) if t.is_constant() => Formula::bool(t.constant.is_zero()),
            Atom::NonZero(t) if t.is_constant() => Formula::bool(!t.constant.is_zero()),
            Atom::Zero(t) => match reduce_eq(t) {
                Some(t) => Formula::Atom(Atom::Zero(t)),
                None => Formula::False,
            },
            Atom::NonZero(t) => match reduce_eq(t) {
                Some(t) => Formula::Atom(Atom::NonZero(t)),
                None => Formula::True,
            },
            Atom::Dvd(d, t) => reduce_dvd(d, t, true),
            Atom::NotDvd(d, t) => reduce_dvd(d, t, false),
        }
    }
}

/// Divides by the coefficient gcd and fixes the sign of the leading
/// coefficient. `None` if the equation has no integer solution.
fn reduce_eq(t: LinearForm) -> Option<LinearForm> {
    let g = t.coeff_gcd();
    if !t.constant.is_multiple_of(&g) {
        return None;
    }
    let lead_neg = t.coeffs.values().next().is_some_and(|c| c.is_negative());
    let g = if lead_neg { -g } else { g };
    Some(LinearForm {
        constant: &t.constant / &g,
        coeffs: t.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
    })
}

fn reduce_dvd(d: BigInt, t: LinearForm, positive: bool) -> Formula {
    let d = d.abs();
    if d.is_zero() {
        return Atom::Zero(t).normalize().negate_if(!positive);
    }
    let mut r = LinearForm::constant(t.constant.mod_floor(&d));
    for (v, c) in &t.coeffs {
        let c = c.mod_floor(&d);
        if !c.is_zero() {
            r.coeffs.insert(v.clone(), c);
        }
    }
    let g = r.coeff_gcd().gcd(&r.constant).gcd(&d);
    let (d, r) = if g > BigInt::one() {
        (
            &d / &g,
            LinearForm {
                constant: &r.constant / &g,
                coeffs: r.coeffs.iter().map(|(v, c)| (v.clone(), c / &g)).collect(),
            },
        )
    } else {
        (d, r)
    };
    if d.is_one() {
        return Formula::bool(positive);
    }
    if r.is_constant() {
        return Formula::bool(r.constant.is_zero() == positive);
    }
    Formula::Atom(if positive {
        Atom::Dvd(d, r)
    } else {
        Atom::NotDvd(d, r)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    False,
    True,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn bool(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    fn negate_if(self, cond: bool) -> Formula {
        if cond {
            self.negate()
        } else {
            self
        }
    }

    pub fn atom(a: Atom) -> Formula {
        a.normalize()
    }

    pub fn and(items: Vec<Formula>) -> Formula {
        combine(items, true)
    }

    pub fn or(items: Vec<Formula>) -> Formula {
        combine(items, false)
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Atom(a) => Formula::Atom(a.negate()).renormalize(),
            Formula::And(xs) => Formula::or(xs.iter().map(Formula::negate).collect()),
            Formula::Or(xs) => Formula::and(xs.iter().map(Formula::negate).collect()),
        }
    }

    fn renormalize(self) -> Formula {
        match self {
            Formula::Atom(a) => a.normalize(),
            other => other,
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => a.form().mentions(v),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(|x| x.mentions(v)),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| go(x, out)),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::And(xs) | Formula::Or(xs) => xs.iter().map(Formula::size).sum(),
        }
    }

    /// Applies `f` to every atom's linear form and re-simplifies.
    pub fn map_forms(&self, f: &dyn Fn(&Atom) -> Atom) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a).normalize(),
            Formula::And(xs) => Formula::and(xs.iter().map(|x| x.map_forms(f)).collect()),
            Formula::Or(xs) => Formula::or(xs.iter().map(|x| x.map_forms(f)).collect()),
        }
    }

    pub fn subst(&self, v: &str, by: &LinearForm) -> Formula {
        if !self.mentions(v) {
            return self.clone();
        }
        self.map_forms(&|a: &Atom| a.with_form(a.form().subst(v, by)))
    }

    pub fn to_prop(&self) -> ArithProp {
        match self {
            Formula::True => ArithProp::True,
            Formula::False => ArithProp::False,
            Formula::Atom(a) => atom_to_prop(a),
            Formula::And(xs) => balanced(xs, ArithProp::True, ArithProp::and),
            Formula::Or(xs) => balanced(xs, ArithProp::False, ArithProp::or),
        }
    }
}

fn atom_to_prop(a: &Atom) -> ArithProp {
    match a {
        Atom::Pos(t) => {
            let (l, r) = t.sides();
            ArithProp::Gt(l, r)
        }
        Atom::Zero(t) => {
            let (l, r) = t.sides();
            ArithProp::Eq(l, r)
        }
        Atom::NonZero(t) => {
            let (l, r) = t.sides();
            ArithProp::Eq(l, r).not()
        }
        Atom::Dvd(d, t) => ArithProp::Divides(d.clone(), t.to_expr()),
        Atom::NotDvd(d, t) => ArithProp::Divides(d.clone(), t.to_expr()).not(),
    }
}

fn combine(items: Vec<Formula>, is_and: bool) -> Formula {
    let (unit, zero) = if is_and {
        (Formula::True, Formula::False)
    } else {
        (Formula::False, Formula::True)
    };
    let mut flat: BTreeSet<Formula> = BTreeSet::new();
    let mut stack = items;
    while let Some(f) = stack.pop() {
        match f {
            f if f == unit => {}
            f if f == zero => return zero,
            Formula::And(xs) if is_and => stack.extend(xs),
            Formula::Or(xs) if !is_and => stack.extend(xs),
            other => {
                flat.insert(other);
            }
        }
    }
    for f in &flat {
        if let Formula::Atom(a) = f {
            if let Formula::Atom(n) = a.negate().normalize() {
                if flat.contains(&Formula::Atom(n)) {
                    return zero;
                }
            }
        }
    }
    merge_bounds(&mut flat, is_and);
    match flat.len() {
        0 => unit,
        1 => flat.into_iter().next().expect("one element"),
        _ => {
            let xs: Vec<Formula> = flat.into_iter().collect();
            if is_and {
                Formula::And(xs)
            } else {
                Formula::Or(xs)
            }
        }
    }
}

/// Folds `xs` into a tree of logarithmic depth.
fn balanced(
    xs: &[Formula],
    unit: ArithProp,
    join: fn(ArithProp, ArithProp) -> ArithProp,
) -> ArithProp {
    match xs.len() {
        0 => unit,
        1 => xs[0].to_prop(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            join(balanced(l, unit.clone(), join), balanced(r, unit, join))
        }
    }
}

/// Joins `t > 0 ∨ t = 0` into `t + 1 > 0` and `t + 1 > 0 ∧ t ≠ 0` into
/// `t > 0`, so that `≥` and its negation stay single atoms.
fn merge_bounds(flat: &mut BTreeSet<Formula>, is_and: bool) {
    let one = BigInt::one();
    let pairs: Vec<(LinearForm, LinearForm)> = flat
        .iter()
        .filter_map(|f| match (f, is_and) {
            (Formula::Atom(Atom::Zero(z)), false) | (Formula::Atom(Atom::NonZero(z)), true) => {
                Some(z.clone())
            }
            _ => None,
        })
        .flat_map(|z| [z.clone(), z.neg()])
        .map(|t| {
            if is_and {
                (t.add_const(&one), t)
            } else {
                (t.clone(), t.add_const(&one))
            }
        })
        .collect();
    for (have, merged) in pairs {
        let bound = Formula::Atom(Atom::Pos(have));
        if !flat.contains(&bound) {
            continue;
        }
        let z = if is_and {
            merged.clone()
        } else {
            merged.add_const(&-one.clone())
        };
        let side = if is_and {
            Atom::NonZero(z.clone())
        } else {
            Atom::Zero(z.clone())
        };
        let side_neg = if is_and {
            Atom::NonZero(z.neg())
        } else {
            Atom::Zero(z.neg())
        };
        let removed = flat.remove(&Formula::Atom(side)) || flat.remove(&Formula::Atom(side_neg));
        if removed {
            flat.remove(&bound);
            flat.insert(Atom::Pos(merged).normalize());
        }
    }
}

/// NNF of a quantifier-free linear proposition.
pub fn from_expr_atoms(
    p: &ArithProp,
    positive: bool,
    lin: &dyn Fn(&ArithExpr) -> Result<LinearForm, super::ArithError>,
) -> Result<Formula, super::ArithError> {
    Ok(match p {
        ArithProp::True => Formula::bool(positive),
        ArithProp::False => Formula::bool(!positive),
        ArithProp::Eq(a, b) => {
            let t = lin(a)?.sub(&lin(b)?);
            Formula::atom(if positive {
                Atom::Zero(t)
            } else {
                Atom::NonZero(t)
            })
        }
        ArithProp::Gt(a, b) => {
            let t = lin(a)?.sub(&lin(b)?);
            let atom = Atom::Pos(t);
            Formula::atom(if positive { atom } else { atom.negate() })
        }
        ArithProp::Divides(d, e) => {
            let t = lin(e)?;
            let d = d.abs();
            Formula::atom(if positive {
                Atom::Dvd(d, t)
            } else {
                Atom::NotDvd(d, t)
            })
        }
        ArithProp::Not(a) => from_expr_atoms(a, !positive, lin)?,
        ArithProp::And(a, b) | ArithProp::Or(a, b) => {
            let l = from_expr_atoms(a, positive, lin)?;
            let r = from_expr_atoms(b, positive, lin)?;
            if matches!(p, ArithProp::And(..)) == positive {
                Formula::and(vec![l, r])
            } else {
                Formula::or(vec![l, r])
            }
        }
        ArithProp::Exists(..) | ArithProp::Forall(..) => {
            unreachable!("quantifiers are eliminated before conversion")
        }
    })
}
