//! First-return map `F_S` of a reciprocal transformation to `S = [0, s)`.
//!
//! The map is computed by breakpoint refinement: a worklist holds pieces
//! `J ⊆ S` together with the affine formula of `F^j` on `J`. Each round splits
//! the current image of every piece at the breakpoints of `F`, applies `F`
//! exactly, and retires the pieces that land back in `S`. Whatever is still
//! outside `S` after `budget` rounds is reported as residual.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{Interval, IntervalSet};
use crate::pamap::{AffineBranch, PAMap};
use crate::scalar::Scalar;
use crate::systems::ReciprocalSystem;

pub const DEFAULT_BRANCH_CAP: usize = 1_000_000;
pub const DEFAULT_WANDERING_HORIZON: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReturnError {
    #[error("return budget must be at least 1")]
    ZeroBudget,
    #[error("refinement produced more than {cap} pieces after {steps} steps")]
    BranchCapExceeded { cap: usize, steps: usize },
}

/// Piece of `S` on which `F_S = F^n` is a single affine map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnBranch {
    map: AffineBranch,
    return_time: usize,
    derivative_exponent: i64,
}

impl ReturnBranch {
    pub fn domain(&self) -> &Interval {
        self.map.domain()
    }

    pub fn map(&self) -> &AffineBranch {
        &self.map
    }

    pub fn image(&self) -> Interval {
        self.map.image()
    }

    pub fn return_time(&self) -> usize {
        self.return_time
    }

    /// `q` with `slope = ρ^q`.
    pub fn derivative_exponent(&self) -> i64 {
        self.derivative_exponent
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnMapResult {
    branches: Vec<ReturnBranch>,
    resolved_measure: Scalar,
    residual: IntervalSet,
    budget_used: usize,
    small_set: Interval,
}

impl ReturnMapResult {
    pub fn branches(&self) -> &[ReturnBranch] {
        &self.branches
    }

    pub fn resolved_measure(&self) -> &Scalar {
        &self.resolved_measure
    }

    /// Part of `S` whose return was not resolved within the budget.
    pub fn residual(&self) -> &IntervalSet {
        &self.residual
    }

    pub fn budget_used(&self) -> usize {
        self.budget_used
    }

    pub fn small_set(&self) -> &Interval {
        &self.small_set
    }

    pub fn is_complete(&self) -> bool {
        self.residual.is_empty()
    }

    /// `F_S` on the resolved part of `S`.
    pub fn as_pamap(&self) -> PAMap {
        PAMap::new(self.branches.iter().map(|b| b.map.clone()).collect())
            .expect("first-return branches are disjoint with disjoint images")
    }

    pub fn images(&self) -> IntervalSet {
        self.branches.iter().map(ReturnBranch::image).collect()
    }

    /// `S_n` as a set.
    pub fn level_set(&self, n: usize) -> IntervalSet {
        self.branches.iter().filter(|b| b.return_time == n).map(|b| b.domain().clone()).collect()
    }

    pub fn s1_measure(&self) -> Scalar {
        self.level_set(1).measure()
    }

    pub fn max_return_time(&self) -> Option<usize> {
        self.branches.iter().map(|b| b.return_time).max()
    }
}

/// `n ↦ μ(S_n)`, plus the measure left unresolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnTimePartition {
    pub by_time: BTreeMap<usize, Scalar>,
    pub unresolved: Scalar,
}

pub fn first_return(sys: &ReciprocalSystem, budget: usize) -> Result<ReturnMapResult, ReturnError> {
    first_return_with_cap(sys, budget, DEFAULT_BRANCH_CAP)
}

struct Piece {
    map: AffineBranch,
    exponent: i64,
}

pub fn first_return_with_cap(
    sys: &ReciprocalSystem,
    budget: usize,
    branch_cap: usize,
) -> Result<ReturnMapResult, ReturnError> {
    if budget == 0 {
        return Err(ReturnError::ZeroBudget);
    }
    let small = sys.small_set();
    let s = sys.s();
    let f = sys.f();
    let mut live = vec![Piece { map: AffineBranch::translation(small.clone(), Scalar::zero()), exponent: 0 }];
    let mut retired: Vec<ReturnBranch> = Vec::new();
    let mut steps = 0;

    while !live.is_empty() && steps < budget {
        steps += 1;
        let mut next = Vec::with_capacity(live.len());
        for piece in &live {
            let img = piece.map.image();
            let start = f.branches().partition_point(|b| b.domain().hi() <= img.lo());
            for fb in &f.branches()[start..] {
                if fb.domain().lo() >= img.hi() {
                    break;
                }
                let Some(moved) = fb.after(&piece.map) else { continue };
                let exponent = piece.exponent + sys.exponent_of_slope(fb.slope()).expect("F has slopes rho^{+-1}");
                let image = moved.image();
                if image.hi() <= s {
                    retired.push(ReturnBranch { map: moved, return_time: steps, derivative_exponent: exponent });
                } else if image.lo() >= s {
                    next.push(Piece { map: moved, exponent });
                } else {
                    // F's branches never straddle s, but keep the split general.
                    let cut = moved.eval_inverse(s);
                    let left = Interval::new(moved.domain().lo().clone(), cut.clone()).expect("straddle");
                    let right = Interval::new(cut, moved.domain().hi().clone()).expect("straddle");
                    retired.push(ReturnBranch {
                        map: moved.restrict_to(left),
                        return_time: steps,
                        derivative_exponent: exponent,
                    });
                    next.push(Piece { map: moved.restrict_to(right), exponent });
                }
            }
        }
        if retired.len() + next.len() > branch_cap {
            return Err(ReturnError::BranchCapExceeded { cap: branch_cap, steps });
        }
        live = next;
    }

    let residual: IntervalSet = live.iter().map(|p| p.map.domain().clone()).collect();
    retired.sort_by(|a, b| a.domain().lo().cmp(b.domain().lo()));
    let branches = merge_adjacent(retired);
    let resolved_measure = branches.iter().map(|b| b.domain().length()).sum();
    Ok(ReturnMapResult { branches, resolved_measure, residual, budget_used: steps, small_set: small })
}

fn merge_adjacent(sorted: Vec<ReturnBranch>) -> Vec<ReturnBranch> {
    let mut out: Vec<ReturnBranch> = Vec::with_capacity(sorted.len());
    for b in sorted {
        if let Some(last) = out.last_mut() {
            if last.return_time == b.return_time
                && last.domain().hi() == b.domain().lo()
                && last.map.slope() == b.map.slope()
                && last.map.offset() == b.map.offset()
            {
                let dom = Interval::new(last.domain().lo().clone(), b.domain().hi().clone()).expect("adjacent");
                last.map = AffineBranch::new(dom, last.map.slope().clone(), last.map.offset().clone())
                    .expect("positive slope");
                continue;
            }
        }
        out.push(b);
    }
    out
}

pub fn return_time_partition(r: &ReturnMapResult) -> ReturnTimePartition {
    let mut by_time: BTreeMap<usize, Scalar> = BTreeMap::new();
    for b in &r.branches {
        let slot = by_time.entry(b.return_time).or_insert_with(Scalar::zero);
        *slot = &*slot + b.domain().length();
    }
    ReturnTimePartition { by_time, unresolved: r.residual.measure() }
}

/// Part of `S` missed by the images of the resolved branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingImage {
    pub missing: IntervalSet,
    /// False when part of `S` was unresolved; the unresolved branches could
    /// still cover some of `missing`.
    pub exact: bool,
}

impl MissingImage {
    pub fn is_surjective(&self) -> bool {
        self.exact && self.missing.is_empty()
    }
}

pub fn check_surjective(r: &ReturnMapResult, s: &Interval) -> MissingImage {
    let missing = IntervalSet::from_interval(s.clone()).difference(&r.images());
    MissingImage { missing, exact: r.is_complete() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConservativityCertificate {
    /// `μ(S₁) = 0` with every return resolved.
    ConservativeCertified,
    /// `wandering ∩ F_S^k(wandering) = ∅` for all `k ≥ 1`: `F_S(wandering) ⊆ trap`,
    /// `F_S(trap) ⊆ trap` and `trap ∩ wandering = ∅`. Pairwise disjointness of
    /// the first `horizon` images was also checked explicitly.
    WanderingSetFound {
        wandering: Interval,
        horizon: usize,
        trap: IntervalSet,
    },
    Unknown {
        reason: String,
    },
}

pub fn conservativity_certificate(sys: &ReciprocalSystem, r: &ReturnMapResult) -> ConservativityCertificate {
    conservativity_certificate_with_horizon(sys, r, DEFAULT_WANDERING_HORIZON)
}

pub fn conservativity_certificate_with_horizon(
    sys: &ReciprocalSystem,
    r: &ReturnMapResult,
    horizon: usize,
) -> ConservativityCertificate {
    let s1 = r.level_set(1);
    if s1.is_empty() && r.is_complete() {
        return ConservativeCertified;
    }
    let fs = r.as_pamap();
    let resolved = fs.domain_support();

    let mut candidates: Vec<(Interval, Vec<IntervalSet>)> = Vec::new();
    let s1_traps: Vec<IntervalSet> = r
        .branches
        .iter()
        .filter(|b| b.return_time == 1)
        .map(|b| IntervalSet::from_interval(b.image()))
        .chain(std::iter::once(fs.image_set(&s1)))
        .collect();
    let s1_parts = r.branches.iter().filter(|b| b.return_time == 1).map(|b| b.domain().clone().into());
    for part in s1_parts.chain(std::iter::once(s1.clone())) {
        let part: IntervalSet = part;
        for w in part.difference(&fs.image_set(&part)).iter() {
            candidates.push((w.clone(), s1_traps.clone()));
        }
    }
    if r.is_complete() {
        let missing = check_surjective(r, &sys.small_set()).missing;
        for w in missing.iter() {
            candidates.push((w.clone(), vec![fs.image_support()]));
        }
    }

    for (w, traps) in candidates {
        let w_set = IntervalSet::from_interval(w.clone());
        let first = fs.image_set(&w_set);
        if first.measure() != w_set_image_measure(&fs, &w_set) {
            continue;
        }
        let mut all_traps = traps;
        if let Some(closure) = forward_closure(&fs, &first, &resolved, horizon) {
            all_traps.push(closure);
        }
        let trap = all_traps.into_iter().find(|t| {
            t.is_subset(&resolved) && first.is_subset(t) && fs.image_set(t).is_subset(t) && t.is_disjoint(&w_set)
        });
        if let Some(trap) = trap {
            let checked = explicit_disjointness(&fs, &w_set, &resolved, horizon);
            return ConservativityCertificate::WanderingSetFound { wandering: w, horizon: checked, trap };
        }
    }
    let reason = if s1.is_empty() {
        format!("S_1 is null but {} of S is unresolved", r.residual.measure())
    } else {
        "no wandering interval verified among S_1 and missing-image candidates".to_string()
    };
    ConservativityCertificate::Unknown { reason }
}

use ConservativityCertificate::ConservativeCertified;

// Measure of F_S(W) computed branch by branch; differs from the measure of the
// image set only if W leaves the resolved part of S.
fn w_set_image_measure(fs: &PAMap, w: &IntervalSet) -> Scalar {
    fs.branches().iter().map(|b| w.intersect_interval(b.domain()).measure() * b.slope()).sum()
}

fn forward_closure(fs: &PAMap, start: &IntervalSet, resolved: &IntervalSet, rounds: usize) -> Option<IntervalSet> {
    let mut r = start.clone();
    for _ in 0..rounds {
        if !r.is_subset(resolved) {
            return None;
        }
        let img = fs.image_set(&r);
        if img.is_subset(&r) {
            return Some(r);
        }
        r = r.union(&img);
    }
    None
}

/// Largest `h ≤ horizon` such that `W, F_S(W), …, F_S^h(W)` are pairwise disjoint
/// and stay in the resolved part of `S`.
fn explicit_disjointness(fs: &PAMap, w: &IntervalSet, resolved: &IntervalSet, horizon: usize) -> usize {
    let mut seen: Vec<IntervalSet> = vec![w.clone()];
    for k in 1..=horizon {
        let prev = seen.last().expect("non-empty");
        if !prev.is_subset(resolved) {
            return k - 1;
        }
        let next = fs.image_set(prev);
        if seen.iter().any(|e| !e.is_disjoint(&next)) {
            return k - 1;
        }
        seen.push(next);
    }
    horizon
}
