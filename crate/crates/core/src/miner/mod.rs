// SPDX-License-Identifier: Apache-2.0

//! Dynamic detection of likely invariants.
//!
//! A universe of candidate relations is seeded over the variables, then
//! each sample falsifies the candidates it contradicts. Candidates whose
//! parameters are not fixed up front (constants, bounds, moduli, linear
//! coefficients) fit them from the first samples and are checked from then
//! on. Samples are read once and never stored, so memory is proportional
//! to the candidate count only.
//!
//! The candidate universe can be split into disjoint partitions that
//! consume the same sample stream on separate threads; the finalized
//! [`Specification`] does not depend on the partitioning.

mod candidate;
mod partition;
mod relation;

use std::collections::HashSet;
use std::sync::mpsc::sync_channel;
use std::sync::Arc;
use std::thread;

pub use candidate::{CandidateInvariant, CandidateKey, CandidateSet, MergeError};
pub use partition::EqualityPartition;
pub use relation::{canonical_linear, InvariantKind, Relation};

use crate::encoding::{render_encoded, EncodedValue};
use crate::num::Num;
use crate::spec::Specification;
use crate::state::TraceSample;

/// How unknown (`x`/`z`) values take part in mining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Samples with an unknown involved variable neither support nor falsify.
    #[default]
    Neutral,
    /// Unknown is the literal value -1.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TernaryMode {
    /// Seed ternary candidates only up to `ternary_cap` variables.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinerConfig {
    pub min_support: u64,
    pub oneof_limit: usize,
    pub ternary: TernaryMode,
    pub ternary_cap: usize,
    pub unknown: UnknownPolicy,
    /// Number of candidate partitions evaluated in parallel.
    pub partitions: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            min_support: 5,
            oneof_limit: 3,
            ternary: TernaryMode::Auto,
            ternary_cap: 128,
            unknown: UnknownPolicy::Neutral,
            partitions: 1,
        }
    }
}

impl MinerConfig {
    pub fn ternary_enabled(&self, variables: usize) -> bool {
        match self.ternary {
            TernaryMode::On => true,
            TernaryMode::Off => false,
            TernaryMode::Auto => variables <= self.ternary_cap,
        }
    }
}

/// Seeds the full candidate universe over `variables` variables.
///
/// Per variable: constant, one-of, both bounds, modular. Per unordered pair:
/// equal, not-equal, `<=` and `<` in both orientations, linear. Per triple
/// (when enabled): linear.
pub fn seed_candidates(variables: usize, config: &MinerConfig) -> CandidateSet {
    use InvariantKind::*;
    let mut out = Vec::new();
    let mut push = |kind, vars: &[usize]| {
        out.push(CandidateInvariant::new(CandidateKey::new(kind, vars)));
    };
    for v in 0..variables {
        for kind in [Constant, OneOf, LowerBound, UpperBound, Modular] {
            push(kind, &[v]);
        }
    }
    for a in 0..variables {
        for b in a + 1..variables {
            push(Equal, &[a, b]);
            push(NotEqual, &[a, b]);
            push(LessEq, &[a, b]);
            push(LessEq, &[b, a]);
            push(Less, &[a, b]);
            push(Less, &[b, a]);
            push(LinearBinary, &[a, b]);
        }
    }
    if config.ternary_enabled(variables) {
        for a in 0..variables {
            for b in a + 1..variables {
                for c in b + 1..variables {
                    push(LinearTernary, &[a, b, c]);
                }
            }
        }
    }
    CandidateSet::new(out, config.oneof_limit)
}

/// Miner view of a sample: `None` marks values that take no part.
pub fn sample_values(sample: &TraceSample, policy: UnknownPolicy) -> Vec<Option<Num>> {
    sample
        .encoded
        .iter()
        .map(|v| match (v, policy) {
            (EncodedValue::Unknown, UnknownPolicy::Neutral) => None,
            (v, _) => Some(render_encoded(v)),
        })
        .collect()
}

/// Sequential miner over an explicit sample sequence.
#[derive(Debug, Clone)]
pub struct Miner {
    candidates: CandidateSet,
    config: MinerConfig,
    variables: usize,
    samples: u64,
}

impl Miner {
    pub fn new(variables: usize, config: MinerConfig) -> Self {
        Miner {
            candidates: seed_candidates(variables, &config),
            config,
            variables,
            samples: 0,
        }
    }

    pub fn observe(&mut self, sample: &TraceSample) {
        assert_eq!(sample.encoded.len(), self.variables, "incomplete sample");
        self.observe_values(&sample_values(sample, self.config.unknown));
    }

    pub fn observe_values(&mut self, values: &[Option<Num>]) {
        self.candidates.observe(values);
        self.samples += 1;
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn finish(&self, names: &[String], ppt: &str) -> Specification {
        finalize(&self.candidates, names, self.samples, ppt, &self.config)
    }
}

/// Mines a sample stream in one pass, using `config.partitions` worker
/// threads when more than one partition is requested.
pub fn mine<I, E>(
    names: &[String],
    ppt: &str,
    samples: I,
    config: &MinerConfig,
) -> Result<Specification, E>
where
    I: Iterator<Item = Result<TraceSample, E>>,
{
    let seeded = seed_candidates(names.len(), config);
    let (candidates, count) = if config.partitions <= 1 {
        let mut set = seeded;
        let mut count = 0u64;
        for s in samples {
            set.observe(&sample_values(&s?, config.unknown));
            count += 1;
        }
        (set, count)
    } else {
        mine_partitioned(seeded.split(config.partitions), samples, config.unknown)?
    };
    Ok(finalize(&candidates, names, count, ppt, config))
}

fn mine_partitioned<I, E>(
    parts: Vec<CandidateSet>,
    samples: I,
    policy: UnknownPolicy,
) -> Result<(CandidateSet, u64), E>
where
    I: Iterator<Item = Result<TraceSample, E>>,
{
    thread::scope(|scope| {
        let mut senders = Vec::with_capacity(parts.len());
        let mut workers = Vec::with_capacity(parts.len());
        for mut part in parts {
            let (tx, rx) = sync_channel::<Arc<Vec<Option<Num>>>>(64);
            senders.push(tx);
            workers.push(scope.spawn(move || {
                for values in rx {
                    part.observe(&values);
                }
                part
            }));
        }

        let mut count = 0u64;
        let mut failure = None;
        for s in samples {
            match s {
                Ok(s) => {
                    let values = Arc::new(sample_values(&s, policy));
                    for tx in &senders {
                        tx.send(Arc::clone(&values)).expect("miner worker exited early");
                    }
                    count += 1;
                }
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        drop(senders);

        let mut merged: Option<CandidateSet> = None;
        for w in workers {
            let part = w.join().expect("miner worker panicked");
            merged = Some(match merged {
                None => part,
                Some(m) => m.merge(part).expect("split partitions are disjoint"),
            });
        }
        match failure {
            Some(e) => Err(e),
            None => Ok((merged.expect("at least one partition"), count)),
        }
    })
}

/// Applies the support threshold and redundancy suppression to the
/// surviving candidates and orders the result.
///
/// Suppressed as implied by other reported invariants:
/// - one-of, bounds and modular facts about a constant variable;
/// - anything about a non-representative member of an equality class,
///   other than the class's own chained equality;
/// - binary and ternary relations involving a constant variable;
/// - `a != b` and `a <= b` when `a < b` holds;
/// - `a <= b` and `a - b == 0` when `a == b` holds;
/// - linear relations with a zero variable coefficient (they are really
///   relations over fewer variables).
pub fn finalize(
    set: &CandidateSet,
    names: &[String],
    samples: u64,
    ppt: &str,
    config: &MinerConfig,
) -> Specification {
    let all = set.survivors();
    let total = all.len();
    let kept: Vec<Relation<usize>> = all
        .into_iter()
        .filter(|(_, support)| *support >= config.min_support)
        .map(|(r, _)| r)
        .collect();
    let dropped = total - kept.len();
    let survivors = kept.len();

    let mut equal = HashSet::new();
    let mut constants = HashSet::new();
    let mut strict = HashSet::new();
    for r in &kept {
        match r {
            Relation::Equal(vs) => {
                equal.insert((vs[0], vs[1]));
            }
            Relation::Constant { var, .. } => {
                constants.insert(*var);
            }
            Relation::Less(a, b) => {
                strict.insert((*a, *b));
            }
            _ => {}
        }
    }
    let mut classes = equality_classes(names.len(), &equal);
    let unit_difference = [Num::ONE, Num::from(-1), Num::ZERO];

    let mut reported: Vec<Relation<usize>> = Vec::new();
    for r in kept {
        let vars: Vec<usize> = r.vars().into_iter().copied().collect();
        let all_reps = vars.iter().all(|&v| classes.is_representative(v));
        let keep = match &r {
            // Pairs inside a class are reported by its chain; the rest are
            // not implied by any chain.
            Relation::Equal(_) => !classes.same_class(vars[0], vars[1]),
            Relation::Constant { var, .. } => classes.is_representative(*var),
            Relation::OneOf { var, .. }
            | Relation::LowerBound { var, .. }
            | Relation::UpperBound { var, .. }
            | Relation::Modular { var, .. } => {
                classes.is_representative(*var) && !constants.contains(var)
            }
            _ => {
                let mut ok = all_reps && vars.iter().all(|v| !constants.contains(v));
                match &r {
                    Relation::NotEqual(a, b) => {
                        ok &= !strict.contains(&(*a, *b)) && !strict.contains(&(*b, *a));
                    }
                    Relation::LessEq(a, b) => {
                        ok &= !strict.contains(&(*a, *b)) && !equal.contains(&(*a.min(b), *a.max(b)));
                    }
                    Relation::LinearBinary { coeffs, .. } => {
                        ok &= coeffs[..2].iter().all(|c| !c.is_zero()) && *coeffs != unit_difference;
                    }
                    Relation::LinearTernary { coeffs, .. } => {
                        ok &= coeffs[..3].iter().all(|c| !c.is_zero());
                    }
                    _ => {}
                }
                ok
            }
        };
        if keep {
            reported.push(r);
        }
    }
    reported.extend(classes.classes().into_iter().map(Relation::Equal));
    reported.sort_by(|a, b| {
        a.kind()
            .cmp(&b.kind())
            .then_with(|| a.vars().cmp(&b.vars()))
    });

    Specification {
        ppt: ppt.to_string(),
        variables: names.len(),
        samples,
        survivors,
        dropped,
        invariants: reported
            .into_iter()
            .map(|r| r.map_vars(|i| names[i].clone()))
            .collect(),
    }
}

/// Groups variables into classes whose members are pairwise equal.
///
/// Surviving equalities need not be transitive when unknowns are neutral,
/// so classes are grown greedily as cliques in index order.
fn equality_classes(n: usize, equal: &HashSet<(usize, usize)>) -> EqualityPartition {
    let mut partition = EqualityPartition::new(n);
    let mut assigned = vec![false; n];
    for v in 0..n {
        if assigned[v] {
            continue;
        }
        let mut members = vec![v];
        for w in v + 1..n {
            if !assigned[w] && members.iter().all(|&u| equal.contains(&(u, w))) {
                members.push(w);
                assigned[w] = true;
                partition.union(v, w);
            }
        }
    }
    partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodedValue;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn sample(vals: &[Option<u64>]) -> TraceSample {
        TraceSample {
            time: 0,
            encoded: vals
                .iter()
                .map(|v| v.map_or(EncodedValue::Unknown, EncodedValue::known))
                .collect(),
        }
    }

    fn lines(spec: &Specification) -> Vec<String> {
        spec.invariants.iter().map(crate::spec::render_relation).collect()
    }

    #[test]
    fn seeding_counts() {
        let cfg = MinerConfig::default();
        let one = seed_candidates(1, &cfg);
        let kinds: Vec<_> = one.iter().map(|c| c.kind()).collect();
        assert_eq!(
            kinds,
            [
                InvariantKind::Constant,
                InvariantKind::OneOf,
                InvariantKind::LowerBound,
                InvariantKind::UpperBound,
                InvariantKind::Modular
            ]
        );
        let two = seed_candidates(2, &cfg);
        let binary: HashSet<_> = two.iter().filter(|c| c.kind().arity() == 2).map(|c| c.kind()).collect();
        assert_eq!(binary.len(), 5);
        assert!(two.iter().all(|c| c.kind() != InvariantKind::LinearTernary));
    }

    #[test]
    fn seeded_pair_count_is_binomial() {
        let set = seed_candidates(232, &MinerConfig::default());
        let pairs: HashSet<(usize, usize)> = set
            .iter()
            .filter(|c| c.kind().arity() == 2)
            .map(|c| {
                let v: Vec<_> = c.key().vars().collect();
                (v[0].min(v[1]), v[0].max(v[1]))
            })
            .collect();
        assert_eq!(pairs.len(), 232 * 231 / 2);
        assert_eq!(pairs.len(), 26_796);
        assert!(set.iter().all(|c| c.kind() != InvariantKind::LinearTernary));
    }

    #[test]
    fn ternary_modes() {
        let mut cfg = MinerConfig { ternary_cap: 3, ..MinerConfig::default() };
        let count = |cfg: &MinerConfig, n| {
            seed_candidates(n, cfg).iter().filter(|c| c.kind() == InvariantKind::LinearTernary).count()
        };
        assert_eq!(count(&cfg, 3), 1);
        assert_eq!(count(&cfg, 4), 0);
        cfg.ternary = TernaryMode::On;
        assert_eq!(count(&cfg, 4), 4);
        cfg.ternary = TernaryMode::Off;
        assert_eq!(count(&cfg, 3), 0);
    }

    #[test]
    fn constant_subsumes_unary_kinds() {
        let mut m = Miner::new(1, MinerConfig::default());
        for _ in 0..100 {
            m.observe(&sample(&[Some(5)]));
        }
        let spec = m.finish(&names(1), "p");
        assert_eq!(lines(&spec), ["v0 == 5"]);
    }

    #[test]
    fn support_threshold_drops() {
        let mut m = Miner::new(1, MinerConfig::default());
        for _ in 0..3 {
            m.observe(&sample(&[Some(5)]));
        }
        let spec = m.finish(&names(1), "p");
        assert!(spec.invariants.is_empty());
        // constant, one-of and both bounds; no modulus without a difference
        assert_eq!(spec.dropped, 4);
    }

    #[test]
    fn equality_reported_as_chain() {
        let mut m = Miner::new(4, MinerConfig::default());
        for i in 0..20u64 {
            m.observe(&sample(&[Some(i % 2), Some(i % 2), Some(i * 7 % 5), Some(i % 2)]));
        }
        let l = lines(&m.finish(&names(4), "p"));
        assert!(l.contains(&"v0 == v1 == v3".to_string()), "{l:?}");
        assert!(!l.iter().any(|s| s.contains("v1") && !s.contains("==")), "{l:?}");
    }

    #[test]
    fn unknown_is_neutral_by_default() {
        let mut m = Miner::new(2, MinerConfig::default());
        for i in 0..10u64 {
            m.observe(&sample(&[Some(i), Some(i)]));
            m.observe(&sample(&[None, Some(3)]));
        }
        let l = lines(&m.finish(&names(2), "p"));
        assert!(l.contains(&"v0 == v1".to_string()), "{l:?}");
        assert!(l.contains(&"v0 >= 0".to_string()), "{l:?}");
    }

    #[test]
    fn literal_unknown_mode() {
        let cfg = MinerConfig { unknown: UnknownPolicy::Literal, ..MinerConfig::default() };
        let mut m = Miner::new(1, cfg);
        for i in 0..10u64 {
            m.observe(&sample(&[Some(i % 2)]));
        }
        m.observe(&sample(&[None]));
        let l = lines(&m.finish(&names(1), "p"));
        assert!(l.contains(&"v0 one of {-1, 0, 1}".to_string()), "{l:?}");
        assert!(l.contains(&"v0 >= -1".to_string()), "{l:?}");
    }

    #[test]
    fn strict_order_suppresses_non_strict() {
        let mut m = Miner::new(2, MinerConfig::default());
        for i in 0..10u64 {
            m.observe(&sample(&[Some(i), Some(i * i + 1)]));
        }
        let l = lines(&m.finish(&names(2), "p"));
        assert!(l.contains(&"v0 < v1".to_string()), "{l:?}");
        assert!(!l.contains(&"v0 <= v1".to_string()), "{l:?}");
        assert!(!l.contains(&"v0 != v1".to_string()), "{l:?}");
    }

    #[test]
    fn partitioned_equals_sequential() {
        let samples: Vec<TraceSample> = (0..50u64)
            .map(|i| sample(&[Some(i % 3), Some(2 * (i % 3) + 1), Some(i), Some(7), Some(i % 5)]))
            .collect();
        let run = |parts| {
            let cfg = MinerConfig { partitions: parts, ..MinerConfig::default() };
            mine::<_, ()>(&names(5), "p", samples.iter().cloned().map(Ok), &cfg).unwrap()
        };
        let base = run(1);
        for k in [2, 3, 8] {
            assert_eq!(run(k), base);
        }
        let failing = mine(&names(5), "p", vec![Ok(samples[0].clone()), Err("boom")].into_iter(), &MinerConfig { partitions: 4, ..MinerConfig::default() });
        assert_eq!(failing, Err("boom"));
    }
}
