//! Ergodicity diagnostics for a reciprocal transformation.
//!
//! Certification is one-sided: `F` is certified ergodic only when `F_S` is an
//! irrational rigid rotation of `S`. Non-ergodicity is certified by exhibiting
//! an exact invariant finite union of intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::first_return::ReturnMapResult;
use crate::interval::{Interval, IntervalSet};
use crate::pamap::PAMap;
use crate::scalar::Scalar;
use crate::systems::ReciprocalSystem;

pub const DEFAULT_PIECE_CAP: usize = 10_000;
pub const DEFAULT_SEARCH_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationClassification {
    pub is_rotation: bool,
    /// Translation amount of `F_S` rescaled to `[0, 1)`.
    pub rotation_number: Option<Scalar>,
    pub irrational: Option<bool>,
}

impl RotationClassification {
    fn not_rotation() -> Self {
        RotationClassification { is_rotation: false, rotation_number: None, irrational: None }
    }

    fn rotation(alpha: Scalar) -> Self {
        let irrational = !alpha.is_rational();
        RotationClassification { is_rotation: true, rotation_number: Some(alpha), irrational: Some(irrational) }
    }

    pub fn is_irrational_rotation(&self) -> bool {
        self.is_rotation && self.irrational == Some(true)
    }
}

/// Decides whether `F_S` is `x ↦ x + α·|S| mod |S|` on `S`.
pub fn classify_rotation(r: &ReturnMapResult, s: &Interval) -> RotationClassification {
    if !r.is_complete() || r.branches().iter().any(|b| b.map().slope() != &Scalar::one()) {
        return RotationClassification::not_rotation();
    }
    let len = s.length();
    let fs = r.as_pamap();
    match fs.branches() {
        [only] if only.domain() == s && only.offset().is_zero() => RotationClassification::rotation(Scalar::zero()),
        [left, right] => {
            let cut = left.domain().hi();
            let shift = s.hi() - cut;
            let ok = left.domain().lo() == s.lo()
                && right.domain().hi() == s.hi()
                && left.offset() == &shift
                && right.offset() == &(&shift - &len);
            if ok {
                RotationClassification::rotation(shift / len)
            } else {
                RotationClassification::not_rotation()
            }
        }
        _ => RotationClassification::not_rotation(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedOutcome {
    /// Exact invariant set of measure strictly between 0 and the full support.
    Invariant(IntervalSet),
    /// The closure filled the whole support.
    Trivial,
    BudgetExhausted {
        depth: usize,
        pieces: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantSearchReport {
    pub found: Vec<IntervalSet>,
    /// Some seed ran out of depth or piece budget before stabilizing.
    pub exhausted: bool,
    pub refinement_depth: usize,
    pub outcomes: Vec<SeedOutcome>,
}

pub fn invariant_search(m: &PAMap, seeds: &[IntervalSet], max_depth: usize) -> InvariantSearchReport {
    invariant_search_with_cap(m, seeds, max_depth, DEFAULT_PIECE_CAP)
}

pub fn invariant_search_with_cap(
    m: &PAMap,
    seeds: &[IntervalSet],
    max_depth: usize,
    piece_cap: usize,
) -> InvariantSearchReport {
    let support = m.domain_support();
    let results: Vec<(SeedOutcome, usize)> =
        seeds.par_iter().map(|seed| close_seed(m, &support, seed, max_depth, piece_cap)).collect();
    let mut found: Vec<IntervalSet> = Vec::new();
    let mut exhausted = false;
    let mut refinement_depth = 0;
    let mut outcomes = Vec::with_capacity(results.len());
    for (outcome, depth) in results {
        refinement_depth = refinement_depth.max(depth);
        match &outcome {
            SeedOutcome::Invariant(e) if !found.contains(e) => found.push(e.clone()),
            SeedOutcome::BudgetExhausted { .. } => exhausted = true,
            _ => {}
        }
        outcomes.push(outcome);
    }
    InvariantSearchReport { found, exhausted, refinement_depth, outcomes }
}

fn close_seed(
    m: &PAMap,
    support: &IntervalSet,
    seed: &IntervalSet,
    max_depth: usize,
    piece_cap: usize,
) -> (SeedOutcome, usize) {
    let mut e = seed.intersection(support);
    if e.is_empty() {
        return (SeedOutcome::Trivial, 0);
    }
    for depth in 1..=max_depth {
        let next = e.union(&m.image_set(&e)).union(&m.preimage_set(&e));
        if next == e {
            let outcome = if &e == support {
                SeedOutcome::Trivial
            } else {
                debug_assert_eq!(m.image_set(&e), e);
                SeedOutcome::Invariant(e)
            };
            return (outcome, depth);
        }
        if next.len() > piece_cap {
            return (SeedOutcome::BudgetExhausted { depth, pieces: next.len() }, depth);
        }
        e = next;
    }
    let pieces = e.len();
    (SeedOutcome::BudgetExhausted { depth: max_depth, pieces }, max_depth)
}

/// Seeds for searching `F`: every branch domain and the left eighth of it.
pub fn default_seeds(m: &PAMap) -> Vec<IntervalSet> {
    let eighth = Scalar::ratio(1, 8);
    m.branches()
        .iter()
        .flat_map(|b| {
            let d = b.domain();
            let small = Interval::new(d.lo().clone(), d.lo() + &(d.length() * &eighth)).expect("positive length");
            [IntervalSet::from_interval(d.clone()), IntervalSet::from_interval(small)]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErgodicityVerdict {
    ErgodicCertified,
    NotErgodicCertified { witness: IntervalSet },
    Unknown,
}

pub fn ergodicity_verdict(sys: &ReciprocalSystem, cls: &RotationClassification) -> ErgodicityVerdict {
    ergodicity_verdict_with_depth(sys, cls, DEFAULT_SEARCH_DEPTH)
}

pub fn ergodicity_verdict_with_depth(
    sys: &ReciprocalSystem,
    cls: &RotationClassification,
    max_depth: usize,
) -> ErgodicityVerdict {
    if cls.is_irrational_rotation() {
        return ErgodicityVerdict::ErgodicCertified;
    }
    let report = invariant_search(sys.f(), &default_seeds(sys.f()), max_depth);
    match report.found.into_iter().next() {
        Some(witness) => ErgodicityVerdict::NotErgodicCertified { witness },
        None => ErgodicityVerdict::Unknown,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProportionVerdict {
    Consistent,
    Refuted {
        lhs: Scalar,
        rhs: Scalar,
    },
    NotInvariant,
    /// `E` is null, so the proportion is undefined.
    Null,
}

/// For an `F`-invariant `E`, compares `μ(E ∩ S)/μ(E)` with `μ(S)` and
/// `μ(E ∩ Φ(S))/μ(E)` with `μ(Φ(S))`.
pub fn check_invariant_proportion(sys: &ReciprocalSystem, e: &IntervalSet) -> ProportionVerdict {
    let total = e.measure();
    if total.is_zero() {
        return ProportionVerdict::Null;
    }
    if &sys.f().image_set(e) != e {
        return ProportionVerdict::NotInvariant;
    }
    let small = sys.small_set();
    let large = sys.phi().large_set();
    for part in [small, large] {
        let lhs = e.intersect_interval(&part).measure() / &total;
        let rhs = part.length();
        if lhs != rhs {
            return ProportionVerdict::Refuted { lhs, rhs };
        }
    }
    ProportionVerdict::Consistent
}

pub fn contains_s_check(sys: &ReciprocalSystem, e: &IntervalSet) -> bool {
    IntervalSet::from_interval(sys.small_set()).is_subset(e)
}

/// `Φ(E) ≠ T(E)`.
pub fn phi_and_t_images_differ(sys: &ReciprocalSystem, e: &IntervalSet) -> bool {
    sys.phi().as_map().image_set(e) != sys.t().image_set(e)
}
