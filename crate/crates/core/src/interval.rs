//! Half-open intervals `[lo, hi)` and normalized finite unions of them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("empty interval [{lo}, {hi})")]
pub struct EmptyInterval {
    pub lo: Scalar,
    pub hi: Scalar,
}

/// Non-empty half-open interval `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(Scalar, Scalar)", into = "(Scalar, Scalar)")]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self, EmptyInterval> {
        if lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(EmptyInterval { lo, hi })
        }
    }

    /// `[lo, hi)` if non-empty, otherwise `None`.
    pub fn try_new(lo: Scalar, hi: Scalar) -> Option<Self> {
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: Scalar::zero(), hi: Scalar::one() }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        Interval::try_new(lo, hi)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lo + &self.hi) * Scalar::ratio(1, 2)
    }
}

impl TryFrom<(Scalar, Scalar)> for Interval {
    type Error = EmptyInterval;
    fn try_from((lo, hi): (Scalar, Scalar)) -> Result<Self, Self::Error> {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for (Scalar, Scalar) {
    fn from(i: Interval) -> Self {
        (i.lo, i.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite union of half-open intervals, stored sorted, disjoint and with
/// touching neighbours merged. Two sets are equal iff their normal forms are.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    pub fn from_interval(i: Interval) -> Self {
        IntervalSet { intervals: vec![i] }
    }

    /// Normalizes an arbitrary collection of intervals.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = intervals.into_iter().collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.intervals.iter()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Scalar {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.hi <= x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(Interval { lo: first.lo.clone(), hi: last.hi.clone() })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(self.intervals.iter().chain(other.intervals.iter()).cloned())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(iv) = a[i].intersect(&b[j]) {
                out.push(iv);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces of disjoint non-adjacent inputs cannot touch
        IntervalSet { intervals: out }
    }

    pub fn intersect_interval(&self, other: &Interval) -> IntervalSet {
        self.intersection(&IntervalSet::from_interval(other.clone()))
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let b = &other.intervals;
        let mut j = 0;
        for iv in &self.intervals {
            let mut lo = iv.lo.clone();
            while j < b.len() && b[j].hi <= lo {
                j += 1;
            }
            let mut k = j;
            while k < b.len() && b[k].lo < iv.hi {
                if b[k].lo > lo {
                    out.push(Interval { lo: lo.clone(), hi: b[k].lo.clone() });
                }
                if b[k].hi > lo {
                    lo = b[k].hi.clone();
                }
                if lo >= iv.hi {
                    break;
                }
                k += 1;
            }
            if lo < iv.hi {
                out.push(Interval { lo, hi: iv.hi.clone() });
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn is_subset(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &IntervalSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// All interval endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<Scalar> {
        self.intervals.iter().flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect()
    }
}

impl From<Interval> for IntervalSet {
    fn from(i: Interval) -> Self {
        IntervalSet::from_interval(i)
    }
}

impl From<Vec<Interval>> for IntervalSet {
    fn from(v: Vec<Interval>) -> Self {
        IntervalSet::from_intervals(v)
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.intervals
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalSet::from_intervals(iter)
    }
}

impl<'a> IntoIterator for &'a IntervalSet {
    type Item = &'a Interval;
    type IntoIter = std::slice::Iter<'a, Interval>;
    fn into_iter(self) -> Self::IntoIter {
        self.intervals.iter()
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
