// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use thiserror::Error;

use super::relation::{canonical_linear, linear_sum, InvariantKind, Relation};
use crate::num::Num;

/// Identity of a candidate: its kind and (ordered) variable tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateKey {
    pub kind: InvariantKind,
    vars: [u32; 3],
}

impl CandidateKey {
    pub fn new(kind: InvariantKind, vars: &[usize]) -> Self {
        assert_eq!(vars.len(), kind.arity(), "{kind:?} takes {} variables", kind.arity());
        let mut packed = [u32::MAX; 3];
        for (slot, &v) in packed.iter_mut().zip(vars) {
            *slot = v as u32;
        }
        CandidateKey { kind, vars: packed }
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars[..self.kind.arity()].iter().map(|&v| v as usize)
    }

    #[inline]
    fn var(&self, i: usize) -> usize {
        self.vars[i] as usize
    }
}

#[derive(Debug, Clone)]
enum Line {
    Empty,
    Point(Num, Num),
    Fitted([Num; 3]),
}

#[derive(Debug, Clone)]
enum Plane {
    Empty,
    Point([Num; 3]),
    /// All points so far lie on `origin + t * dir`.
    Line { origin: [Num; 3], dir: [Num; 3] },
    Fitted([Num; 4]),
}

#[derive(Debug, Clone)]
enum State {
    Constant(Option<Num>),
    OneOf(Vec<Num>),
    LowerBound(Option<Num>),
    UpperBound(Option<Num>),
    /// `gcd` of all differences from `base`; 0 until two values differ.
    Modular { base: Option<Num>, gcd: Num },
    /// Parameter-free binary comparisons.
    Compare,
    LinearBinary(Box<Line>),
    LinearTernary(Box<Plane>),
}

/// One falsifiable hypothesis and its running evidence.
#[derive(Debug, Clone)]
pub struct CandidateInvariant {
    key: CandidateKey,
    state: State,
    support: u64,
    alive: bool,
}

fn sub3(a: &[Num; 3], b: &[Num; 3]) -> [Num; 3] {
    [a[0].sub(&b[0]), a[1].sub(&b[1]), a[2].sub(&b[2])]
}

fn cross(u: &[Num; 3], v: &[Num; 3]) -> [Num; 3] {
    [
        u[1].mul(&v[2]).sub(&u[2].mul(&v[1])),
        u[2].mul(&v[0]).sub(&u[0].mul(&v[2])),
        u[0].mul(&v[1]).sub(&u[1].mul(&v[0])),
    ]
}

impl CandidateInvariant {
    pub fn new(key: CandidateKey) -> Self {
        let state = match key.kind {
            InvariantKind::Constant => State::Constant(None),
            InvariantKind::OneOf => State::OneOf(Vec::new()),
            InvariantKind::LowerBound => State::LowerBound(None),
            InvariantKind::UpperBound => State::UpperBound(None),
            InvariantKind::Modular => State::Modular {
                base: None,
                gcd: Num::ZERO,
            },
            InvariantKind::Equal
            | InvariantKind::NotEqual
            | InvariantKind::LessEq
            | InvariantKind::Less => State::Compare,
            InvariantKind::LinearBinary => State::LinearBinary(Box::new(Line::Empty)),
            InvariantKind::LinearTernary => State::LinearTernary(Box::new(Plane::Empty)),
        };
        CandidateInvariant {
            key,
            state,
            support: 0,
            alive: true,
        }
    }

    pub fn key(&self) -> CandidateKey {
        self.key
    }

    pub fn kind(&self) -> InvariantKind {
        self.key.kind
    }

    pub fn support(&self) -> u64 {
        self.support
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    /// Consumes one sample. Samples where any involved variable is unknown
    /// (`None`) are skipped without effect.
    pub fn observe(&mut self, sample: &[Option<Num>], oneof_limit: usize) {
        if !self.alive {
            return;
        }
        let Some(x) = sample[self.key.var(0)].as_ref() else { return };
        let consistent = match self.key.kind.arity() {
            1 => self.observe_unary(x, oneof_limit),
            2 => {
                let Some(y) = sample[self.key.var(1)].as_ref() else { return };
                self.observe_binary(x, y)
            }
            _ => {
                let Some(y) = sample[self.key.var(1)].as_ref() else { return };
                let Some(z) = sample[self.key.var(2)].as_ref() else { return };
                self.observe_ternary([x.clone(), y.clone(), z.clone()])
            }
        };
        if consistent {
            self.support += 1;
        } else {
            self.alive = false;
        }
    }

    fn observe_unary(&mut self, x: &Num, oneof_limit: usize) -> bool {
        match &mut self.state {
            State::Constant(c) => match c {
                None => {
                    *c = Some(x.clone());
                    true
                }
                Some(c) => c == x,
            },
            State::OneOf(values) => match values.binary_search(x) {
                Ok(_) => true,
                Err(pos) if values.len() < oneof_limit => {
                    values.insert(pos, x.clone());
                    true
                }
                Err(_) => false,
            },
            State::LowerBound(lo) => {
                if lo.as_ref().is_none_or(|lo| x < lo) {
                    *lo = Some(x.clone());
                }
                true
            }
            State::UpperBound(hi) => {
                if hi.as_ref().is_none_or(|hi| x > hi) {
                    *hi = Some(x.clone());
                }
                true
            }
            State::Modular { base, gcd } => match base {
                None => {
                    *base = Some(x.clone());
                    true
                }
                Some(b) => {
                    *gcd = gcd.gcd(&x.sub(b));
                    *gcd != Num::ONE
                }
            },
            _ => unreachable!("unary kind with non-unary state"),
        }
    }

    fn observe_binary(&mut self, x: &Num, y: &Num) -> bool {
        match &mut self.state {
            State::Compare => match self.key.kind {
                InvariantKind::Equal => x == y,
                InvariantKind::NotEqual => x != y,
                InvariantKind::LessEq => x <= y,
                InvariantKind::Less => x < y,
                _ => unreachable!(),
            },
            State::LinearBinary(line) => match line.as_mut() {
                Line::Empty => {
                    **line = Line::Point(x.clone(), y.clone());
                    true
                }
                Line::Point(px, py) => {
                    if px != x || py != y {
                        // a*x + b*y + c = 0 through both points.
                        let a = y.sub(py);
                        let b = px.sub(x);
                        let c = a.mul(px).add(&b.mul(py)).neg();
                        **line = Line::Fitted(canonical_linear([a, b, c]));
                    }
                    true
                }
                Line::Fitted(coeffs) => {
                    linear_sum(coeffs, [x.clone(), y.clone()].into_iter()).is_zero()
                }
            },
            _ => unreachable!("binary kind with non-binary state"),
        }
    }

    fn observe_ternary(&mut self, p: [Num; 3]) -> bool {
        let State::LinearTernary(plane) = &mut self.state else {
            unreachable!("ternary kind with non-ternary state")
        };
        match plane.as_mut() {
            Plane::Empty => {
                **plane = Plane::Point(p);
                true
            }
            Plane::Point(origin) => {
                if *origin != p {
                    let dir = sub3(&p, origin);
                    **plane = Plane::Line {
                        origin: origin.clone(),
                        dir,
                    };
                }
                true
            }
            Plane::Line { origin, dir } => {
                let normal = cross(dir, &sub3(&p, origin));
                if normal.iter().any(|c| !c.is_zero()) {
                    let [a, b, c] = normal;
                    let d = a
                        .mul(&origin[0])
                        .add(&b.mul(&origin[1]))
                        .add(&c.mul(&origin[2]))
                        .neg();
                    **plane = Plane::Fitted(canonical_linear([a, b, c, d]));
                }
                true
            }
            Plane::Fitted(coeffs) => linear_sum(coeffs, p.into_iter()).is_zero(),
        }
    }

    /// The candidate as a concrete relation, if it is alive and its
    /// parameters are determined by the samples seen so far.
    pub fn fitted(&self) -> Option<Relation<usize>> {
        if !self.alive {
            return None;
        }
        let v = |i| self.key.var(i);
        Some(match &self.state {
            State::Constant(c) => Relation::Constant {
                var: v(0),
                value: c.clone()?,
            },
            State::OneOf(values) if !values.is_empty() => Relation::OneOf {
                var: v(0),
                values: values.clone(),
            },
            State::OneOf(_) => return None,
            State::LowerBound(lo) => Relation::LowerBound {
                var: v(0),
                bound: lo.clone()?,
            },
            State::UpperBound(hi) => Relation::UpperBound {
                var: v(0),
                bound: hi.clone()?,
            },
            State::Modular { base, gcd } => {
                let base = base.as_ref()?;
                if *gcd < Num::from(2) {
                    return None;
                }
                Relation::Modular {
                    var: v(0),
                    modulus: gcd.clone(),
                    residue: base.rem_euclid(gcd),
                }
            }
            State::Compare => {
                if self.support == 0 {
                    return None;
                }
                let (a, b) = (v(0), v(1));
                match self.key.kind {
                    InvariantKind::Equal => Relation::Equal(vec![a, b]),
                    InvariantKind::NotEqual => Relation::NotEqual(a, b),
                    InvariantKind::LessEq => Relation::LessEq(a, b),
                    InvariantKind::Less => Relation::Less(a, b),
                    _ => unreachable!(),
                }
            }
            State::LinearBinary(line) => match line.as_ref() {
                Line::Fitted(coeffs) => Relation::LinearBinary {
                    vars: [v(0), v(1)],
                    coeffs: coeffs.clone(),
                },
                _ => return None,
            },
            State::LinearTernary(plane) => match plane.as_ref() {
                Plane::Fitted(coeffs) => Relation::LinearTernary {
                    vars: [v(0), v(1), v(2)],
                    coeffs: coeffs.clone(),
                },
                _ => return None,
            },
        })
    }
}

/// A partition of the candidate universe, evaluated independently of others.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    candidates: Vec<CandidateInvariant>,
    oneof_limit: usize,
    dead: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("candidate {0:?} is present in both partitions")]
    PartitionOverlap(CandidateKey),
}

impl CandidateSet {
    pub fn new(candidates: Vec<CandidateInvariant>, oneof_limit: usize) -> Self {
        CandidateSet {
            candidates,
            oneof_limit,
            dead: 0,
        }
    }

    pub fn empty(oneof_limit: usize) -> Self {
        Self::new(Vec::new(), oneof_limit)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CandidateInvariant> {
        self.candidates.iter()
    }

    pub fn observe(&mut self, sample: &[Option<Num>]) {
        let limit = self.oneof_limit;
        let mut died = 0;
        for c in self.candidates.iter_mut().filter(|c| c.alive) {
            c.observe(sample, limit);
            died += usize::from(!c.alive);
        }
        self.dead += died;
        // Dead candidates never revive; drop them once they dominate.
        if self.dead > 1024 && self.dead * 2 > self.candidates.len() {
            self.candidates.retain(|c| c.alive);
            self.dead = 0;
        }
    }

    /// Splits into `parts` disjoint partitions of near-equal size.
    pub fn split(self, parts: usize) -> Vec<CandidateSet> {
        let parts = parts.max(1);
        let per = self.candidates.len().div_ceil(parts).max(1);
        let limit = self.oneof_limit;
        let mut out: Vec<CandidateSet> = Vec::with_capacity(parts);
        let mut it = self.candidates.into_iter().peekable();
        for _ in 0..parts {
            let chunk: Vec<_> = it.by_ref().take(per).collect();
            out.push(CandidateSet::new(chunk, limit));
        }
        out
    }

    /// Disjoint union of two partitions over the same sample stream.
    pub fn merge(mut self, other: CandidateSet) -> Result<CandidateSet, MergeError> {
        let (small, large) = if self.len() <= other.len() {
            (&self, &other)
        } else {
            (&other, &self)
        };
        let keys: HashSet<CandidateKey> = small.candidates.iter().map(|c| c.key).collect();
        if let Some(c) = large.candidates.iter().find(|c| keys.contains(&c.key)) {
            return Err(MergeError::PartitionOverlap(c.key));
        }
        self.dead += other.dead;
        self.candidates.extend(other.candidates);
        Ok(self)
    }

    /// Alive candidates with determined parameters, with their support.
    pub fn survivors(&self) -> Vec<(Relation<usize>, u64)> {
        self.candidates
            .iter()
            .filter_map(|c| c.fitted().map(|r| (r, c.support)))
            .collect()
    }
}
