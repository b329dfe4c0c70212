//! Injective piecewise-affine maps on finite unions of half-open intervals.
//!
//! A [`PAMap`] is an ordered list of orientation-preserving affine branches
//! with pairwise disjoint domains and pairwise disjoint images. Maps are kept
//! normalized: adjacent branches that carry the same affine formula are merged,
//! so structural equality is equality of maps.

use std::fmt;

use thiserror::Error;

use crate::interval::{Interval, IntervalSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("branch on {domain} has non-positive slope {slope}")]
    NonPositiveSlope { domain: Interval, slope: Scalar },
    #[error("branch domains {0} and {1} overlap")]
    OverlappingDomains(Interval, Interval),
    #[error("branch images {0} and {1} overlap; map is not injective")]
    OverlappingImages(Interval, Interval),
    #[error("point {0} is outside the domain")]
    OutsideDomain(Scalar),
    #[error("image of the inner map is not contained in the domain of the outer map")]
    SupportMismatch,
    #[error("set {0} is not contained in the domain")]
    OutsideSupport(IntervalSet),
}

/// `x ↦ slope·x + offset` on `domain`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineBranch {
    domain: Interval,
    slope: Scalar,
    offset: Scalar,
}

impl AffineBranch {
    pub fn new(domain: Interval, slope: Scalar, offset: Scalar) -> Result<Self, MapError> {
        if !slope.is_positive() {
            return Err(MapError::NonPositiveSlope { domain, slope });
        }
        Ok(AffineBranch { domain, slope, offset })
    }

    /// Translation of `domain` by `shift`.
    pub fn translation(domain: Interval, shift: Scalar) -> Self {
        AffineBranch { domain, slope: Scalar::one(), offset: shift }
    }

    /// The unique increasing affine bijection from `domain` onto `image`.
    pub fn between(domain: Interval, image: &Interval) -> Self {
        let slope = image.length() / domain.length();
        let offset = image.lo() - &slope * domain.lo();
        AffineBranch { domain, slope, offset }
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn slope(&self) -> &Scalar {
        &self.slope
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        &self.slope * x + &self.offset
    }

    pub fn eval_inverse(&self, y: &Scalar) -> Scalar {
        (y - &self.offset) / &self.slope
    }

    pub fn image(&self) -> Interval {
        Interval::new(self.eval(self.domain.lo()), self.eval(self.domain.hi()))
            .expect("positive slope keeps intervals non-empty")
    }

    /// Same formula on a sub-interval of the domain.
    pub fn restrict_to(&self, sub: Interval) -> AffineBranch {
        debug_assert!(self.domain.contains_interval(&sub));
        AffineBranch { domain: sub, slope: self.slope.clone(), offset: self.offset.clone() }
    }

    /// Image of `sub ∩ domain`, if non-empty.
    pub fn image_of(&self, sub: &Interval) -> Option<Interval> {
        let part = self.domain.intersect(sub)?;
        Some(Interval::new(self.eval(part.lo()), self.eval(part.hi())).expect("positive slope"))
    }

    /// Preimage of `sub ∩ image`, if non-empty.
    pub fn preimage_of(&self, sub: &Interval) -> Option<Interval> {
        let part = self.image().intersect(sub)?;
        Some(Interval::new(self.eval_inverse(part.lo()), self.eval_inverse(part.hi())).expect("positive slope"))
    }

    /// `self ∘ inner` on the part of `inner`'s domain that `inner` sends into `self.domain`.
    pub fn after(&self, inner: &AffineBranch) -> Option<AffineBranch> {
        let domain = inner.preimage_of(&self.domain)?;
        Some(AffineBranch {
            domain,
            slope: &self.slope * &inner.slope,
            offset: &self.slope * &inner.offset + &self.offset,
        })
    }

    pub fn inverse(&self) -> AffineBranch {
        let slope = self.slope.recip();
        let offset = -(&self.offset * &slope);
        AffineBranch { domain: self.image(), slope, offset }
    }

    fn same_formula(&self, other: &AffineBranch) -> bool {
        self.slope == other.slope && self.offset == other.offset
    }
}

impl fmt::Debug for AffineBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}: x*{} + {}", self.domain, self.image(), self.slope, self.offset)
    }
}

/// Injective piecewise-affine map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAMap {
    branches: Vec<AffineBranch>,
}

impl PAMap {
    /// Validates and normalizes a branch list.
    pub fn new(branches: Vec<AffineBranch>) -> Result<Self, MapError> {
        let mut branches = branches;
        branches.sort_by(|a, b| a.domain.lo().cmp(b.domain.lo()));
        for w in branches.windows(2) {
            if w[0].domain.hi() > w[1].domain.lo() {
                return Err(MapError::OverlappingDomains(w[0].domain.clone(), w[1].domain.clone()));
            }
        }
        let mut images: Vec<Interval> = branches.iter().map(AffineBranch::image).collect();
        images.sort_by(|a, b| a.lo().cmp(b.lo()));
        for w in images.windows(2) {
            if w[0].hi() > w[1].lo() {
                return Err(MapError::OverlappingImages(w[0].clone(), w[1].clone()));
            }
        }
        Ok(Self::from_sorted(branches))
    }

    /// Merges adjacent branches with identical formulas. Input must be sorted and valid.
    fn from_sorted(branches: Vec<AffineBranch>) -> Self {
        let mut out: Vec<AffineBranch> = Vec::with_capacity(branches.len());
        for b in branches {
            match out.last_mut() {
                Some(last) if last.domain.hi() == b.domain.lo() && last.same_formula(&b) => {
                    last.domain = Interval::new(last.domain.lo().clone(), b.domain.hi().clone())
                        .expect("merged domain is non-empty");
                }
                _ => out.push(b),
            }
        }
        PAMap { branches: out }
    }

    fn from_unsorted(mut branches: Vec<AffineBranch>) -> Self {
        branches.sort_by(|a, b| a.domain.lo().cmp(b.domain.lo()));
        Self::from_sorted(branches)
    }

    pub fn identity(on: Interval) -> Self {
        PAMap { branches: vec![AffineBranch::translation(on, Scalar::zero())] }
    }

    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn domain_support(&self) -> IntervalSet {
        self.branches.iter().map(|b| b.domain.clone()).collect()
    }

    pub fn image_support(&self) -> IntervalSet {
        self.branches.iter().map(AffineBranch::image).collect()
    }

    /// Domain endpoints of all branches, in order, without duplicates.
    pub fn breakpoints(&self) -> Vec<Scalar> {
        let mut out: Vec<Scalar> = Vec::with_capacity(self.branches.len() + 1);
        for b in &self.branches {
            for p in [b.domain.lo(), b.domain.hi()] {
                if out.last() != Some(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    /// Index of the branch whose domain contains `x`.
    pub fn branch_index(&self, x: &Scalar) -> Option<usize> {
        let idx = self.branches.partition_point(|b| b.domain.hi() <= x);
        (idx < self.branches.len() && self.branches[idx].domain.contains(x)).then_some(idx)
    }

    pub fn branch_at(&self, x: &Scalar) -> Result<&AffineBranch, MapError> {
        self.branch_index(x).map(|i| &self.branches[i]).ok_or_else(|| MapError::OutsideDomain(x.clone()))
    }

    pub fn apply(&self, x: &Scalar) -> Result<Scalar, MapError> {
        Ok(self.branch_at(x)?.eval(x))
    }

    /// Radon–Nikodym derivative of the map at `x`: the slope of its branch.
    pub fn slope_at(&self, x: &Scalar) -> Result<Scalar, MapError> {
        Ok(self.branch_at(x)?.slope.clone())
    }

    /// `outer ∘ inner`. Requires `image_support(inner) ⊆ domain_support(outer)`.
    pub fn compose(outer: &PAMap, inner: &PAMap) -> Result<PAMap, MapError> {
        let mut out = Vec::new();
        for b in &inner.branches {
            let img = b.image();
            let mut covered = Scalar::zero();
            let start = outer.branches.partition_point(|o| o.domain.hi() <= img.lo());
            for o in &outer.branches[start..] {
                if o.domain.lo() >= img.hi() {
                    break;
                }
                if let Some(piece) = o.after(b) {
                    covered = covered + piece.image().length() / &o.slope;
                    out.push(piece);
                }
            }
            if covered != img.length() {
                return Err(MapError::SupportMismatch);
            }
        }
        Ok(Self::from_sorted(out))
    }

    pub fn then(&self, outer: &PAMap) -> Result<PAMap, MapError> {
        PAMap::compose(outer, self)
    }

    pub fn invert(&self) -> PAMap {
        Self::from_unsorted(self.branches.iter().map(AffineBranch::inverse).collect())
    }

    /// `m^n` for `n ≥ 1`, or the identity on the domain for `n = 0`.
    pub fn power(&self, n: usize) -> Result<PAMap, MapError> {
        if n == 0 {
            let d = self.domain_support();
            return Ok(Self::from_sorted(
                d.iter().map(|iv| AffineBranch::translation(iv.clone(), Scalar::zero())).collect(),
            ));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = PAMap::compose(self, &acc)?;
        }
        Ok(acc)
    }

    pub fn restrict(&self, e: &IntervalSet) -> Result<PAMap, MapError> {
        if !e.is_subset(&self.domain_support()) {
            return Err(MapError::OutsideSupport(e.clone()));
        }
        let mut out = Vec::new();
        for b in &self.branches {
            for part in e.intersect_interval(&b.domain).iter() {
                out.push(b.restrict_to(part.clone()));
            }
        }
        Ok(Self::from_sorted(out))
    }

    /// Image of `E ∩ domain_support`.
    pub fn image_set(&self, e: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for b in &self.branches {
            let lo = e.intervals().partition_point(|iv| iv.hi() <= b.domain.lo());
            for iv in &e.intervals()[lo..] {
                if iv.lo() >= b.domain.hi() {
                    break;
                }
                if let Some(img) = b.image_of(iv) {
                    out.push(img);
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Set of points whose image lies in `E`.
    pub fn preimage_set(&self, e: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for b in &self.branches {
            let img = b.image();
            let lo = e.intervals().partition_point(|iv| iv.hi() <= img.lo());
            for iv in &e.intervals()[lo..] {
                if iv.lo() >= img.hi() {
                    break;
                }
                if let Some(pre) = b.preimage_of(iv) {
                    out.push(pre);
                }
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// Exactly `domain_support = image_support = I`.
    pub fn is_bijection_on(&self, i: &Interval) -> bool {
        let target = IntervalSet::from_interval(i.clone());
        self.domain_support() == target && self.image_support() == target
    }

    pub fn is_measure_preserving(&self) -> bool {
        self.branches.iter().all(|b| b.slope == Scalar::one())
    }

    /// Double-precision copy for long orbit simulations.
    pub fn to_float(&self) -> FloatMap {
        FloatMap {
            lo: self.branches.iter().map(|b| b.domain.lo().to_f64()).collect(),
            hi: self.branches.iter().map(|b| b.domain.hi().to_f64()).collect(),
            slope: self.branches.iter().map(|b| b.slope.to_f64()).collect(),
            offset: self.branches.iter().map(|b| b.offset.to_f64()).collect(),
        }
    }
}

impl fmt::Debug for PAMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.branches).finish()
    }
}

/// Floating-point evaluation of a [`PAMap`].
#[derive(Debug, Clone)]
pub struct FloatMap {
    lo: Vec<f64>,
    hi: Vec<f64>,
    slope: Vec<f64>,
    offset: Vec<f64>,
}

/// One float step: the image, the branch used and the distance from `x` to
/// the nearest endpoint of that branch's domain.
#[derive(Debug, Clone, Copy)]
pub struct FloatStep {
    pub value: f64,
    pub branch: usize,
    pub breakpoint_distance: f64,
}

impl FloatMap {
    pub fn step(&self, x: f64) -> Option<FloatStep> {
        let idx = self.hi.partition_point(|&h| h <= x);
        if idx >= self.lo.len() || x < self.lo[idx] {
            return None;
        }
        Some(FloatStep {
            value: self.slope[idx] * x + self.offset[idx],
            branch: idx,
            breakpoint_distance: (x - self.lo[idx]).min(self.hi[idx] - x),
        })
    }

    pub fn slope(&self, branch: usize) -> f64 {
        self.slope[branch]
    }
}
