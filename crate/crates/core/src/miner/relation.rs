// SPDX-License-Identifier: Apache-2.0

use crate::num::Num;

/// Invariant kinds, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantKind {
    Constant,
    OneOf,
    LowerBound,
    UpperBound,
    Modular,
    Equal,
    NotEqual,
    LessEq,
    Less,
    LinearBinary,
    LinearTernary,
}

impl InvariantKind {
    pub const ALL: [InvariantKind; 11] = [
        InvariantKind::Constant,
        InvariantKind::OneOf,
        InvariantKind::LowerBound,
        InvariantKind::UpperBound,
        InvariantKind::Modular,
        InvariantKind::Equal,
        InvariantKind::NotEqual,
        InvariantKind::LessEq,
        InvariantKind::Less,
        InvariantKind::LinearBinary,
        InvariantKind::LinearTernary,
    ];

    pub fn arity(self) -> usize {
        match self {
            InvariantKind::Constant
            | InvariantKind::OneOf
            | InvariantKind::LowerBound
            | InvariantKind::UpperBound
            | InvariantKind::Modular => 1,
            InvariantKind::LinearTernary => 3,
            _ => 2,
        }
    }
}

/// A fitted invariant over variables of type `V` (header indices while
/// mining, names once rendered).
///
/// Linear relations read `c0*v0 + c1*v1 [+ c2*v2] + k == 0` with the
/// constant term last; coefficients are coprime integers whose first
/// nonzero entry is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Relation<V> {
    Constant { var: V, value: Num },
    /// Values sorted ascending, no duplicates.
    OneOf { var: V, values: Vec<Num> },
    LowerBound { var: V, bound: Num },
    UpperBound { var: V, bound: Num },
    Modular { var: V, modulus: Num, residue: Num },
    /// Two or more variables that are pairwise equal.
    Equal(Vec<V>),
    NotEqual(V, V),
    LessEq(V, V),
    Less(V, V),
    LinearBinary { vars: [V; 2], coeffs: [Num; 3] },
    LinearTernary { vars: [V; 3], coeffs: [Num; 4] },
}

impl<V> Relation<V> {
    pub fn kind(&self) -> InvariantKind {
        match self {
            Relation::Constant { .. } => InvariantKind::Constant,
            Relation::OneOf { .. } => InvariantKind::OneOf,
            Relation::LowerBound { .. } => InvariantKind::LowerBound,
            Relation::UpperBound { .. } => InvariantKind::UpperBound,
            Relation::Modular { .. } => InvariantKind::Modular,
            Relation::Equal(_) => InvariantKind::Equal,
            Relation::NotEqual(..) => InvariantKind::NotEqual,
            Relation::LessEq(..) => InvariantKind::LessEq,
            Relation::Less(..) => InvariantKind::Less,
            Relation::LinearBinary { .. } => InvariantKind::LinearBinary,
            Relation::LinearTernary { .. } => InvariantKind::LinearTernary,
        }
    }

    pub fn vars(&self) -> Vec<&V> {
        match self {
            Relation::Constant { var, .. }
            | Relation::OneOf { var, .. }
            | Relation::LowerBound { var, .. }
            | Relation::UpperBound { var, .. }
            | Relation::Modular { var, .. } => vec![var],
            Relation::Equal(vs) => vs.iter().collect(),
            Relation::NotEqual(a, b) | Relation::LessEq(a, b) | Relation::Less(a, b) => vec![a, b],
            Relation::LinearBinary { vars, .. } => vars.iter().collect(),
            Relation::LinearTernary { vars, .. } => vars.iter().collect(),
        }
    }

    pub fn map_vars<U>(self, mut f: impl FnMut(V) -> U) -> Relation<U> {
        match self {
            Relation::Constant { var, value } => Relation::Constant { var: f(var), value },
            Relation::OneOf { var, values } => Relation::OneOf { var: f(var), values },
            Relation::LowerBound { var, bound } => Relation::LowerBound { var: f(var), bound },
            Relation::UpperBound { var, bound } => Relation::UpperBound { var: f(var), bound },
            Relation::Modular {
                var,
                modulus,
                residue,
            } => Relation::Modular {
                var: f(var),
                modulus,
                residue,
            },
            Relation::Equal(vs) => Relation::Equal(vs.into_iter().map(f).collect()),
            Relation::NotEqual(a, b) => Relation::NotEqual(f(a), f(b)),
            Relation::LessEq(a, b) => Relation::LessEq(f(a), f(b)),
            Relation::Less(a, b) => Relation::Less(f(a), f(b)),
            Relation::LinearBinary { vars, coeffs } => Relation::LinearBinary {
                vars: vars.map(f),
                coeffs,
            },
            Relation::LinearTernary { vars, coeffs } => Relation::LinearTernary {
                vars: vars.map(f),
                coeffs,
            },
        }
    }

    /// Checks the relation against concrete values of its variables.
    pub fn holds(&self, value: impl Fn(&V) -> Num) -> bool {
        match self {
            Relation::Constant { var, value: c } => value(var) == *c,
            Relation::OneOf { var, values } => values.contains(&value(var)),
            Relation::LowerBound { var, bound } => value(var) >= *bound,
            Relation::UpperBound { var, bound } => value(var) <= *bound,
            Relation::Modular {
                var,
                modulus,
                residue,
            } => value(var).rem_euclid(modulus) == *residue,
            Relation::Equal(vs) => vs.windows(2).all(|w| value(&w[0]) == value(&w[1])),
            Relation::NotEqual(a, b) => value(a) != value(b),
            Relation::LessEq(a, b) => value(a) <= value(b),
            Relation::Less(a, b) => value(a) < value(b),
            Relation::LinearBinary { vars, coeffs } => {
                linear_sum(coeffs, vars.iter().map(&value)).is_zero()
            }
            Relation::LinearTernary { vars, coeffs } => {
                linear_sum(coeffs, vars.iter().map(&value)).is_zero()
            }
        }
    }
}

/// `coeffs[..n] · values + coeffs[n]`.
pub(crate) fn linear_sum(coeffs: &[Num], values: impl Iterator<Item = Num>) -> Num {
    let (constant, terms) = coeffs.split_last().expect("constant term");
    terms
        .iter()
        .zip(values)
        .fold(constant.clone(), |acc, (c, v)| acc.add(&c.mul(&v)))
}

/// Divides out the common gcd and makes the first nonzero coefficient
/// positive. All-zero input is returned unchanged.
pub fn canonical_linear<const N: usize>(mut coeffs: [Num; N]) -> [Num; N] {
    let g = coeffs.iter().fold(Num::ZERO, |g, c| g.gcd(c));
    if g.is_zero() {
        return coeffs;
    }
    let flip = coeffs.iter().find(|c| !c.is_zero()).is_some_and(Num::is_negative);
    for c in coeffs.iter_mut() {
        let q = c.div_exact(&g);
        *c = if flip { q.neg() } else { q };
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: i128) -> Num {
        Num::from(v)
    }

    #[test]
    fn canonical_form() {
        assert_eq!(canonical_linear([n(-4), n(2), n(-2)]), [n(2), n(-1), n(1)]);
        assert_eq!(canonical_linear([n(0), n(-3), n(6)]), [n(0), n(1), n(-2)]);
        assert_eq!(canonical_linear([n(0), n(0), n(0)]), [n(0), n(0), n(0)]);
    }

    #[test]
    fn holds_checks() {
        let r = Relation::LinearBinary { vars: [0usize, 1], coeffs: [n(2), n(-1), n(1)] };
        let vals = [n(3), n(7)];
        assert!(r.holds(|&i| vals[i].clone()));
        let m = Relation::Modular { var: 0usize, modulus: n(4), residue: n(3) };
        assert!(m.holds(|_| n(11)));
        assert!(!m.holds(|_| n(12)));
    }

    #[test]
    fn kind_order_and_arity() {
        assert!(InvariantKind::Constant < InvariantKind::Equal);
        assert_eq!(InvariantKind::LinearTernary.arity(), 3);
        assert_eq!(InvariantKind::Less.arity(), 2);
    }
}
