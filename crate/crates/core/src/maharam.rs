//! Discrete Maharam extension `F̃(x, n) = (F(x), n ± 1)` on `[0, 1) × ℤ`.
//!
//! A point moves up a level where `F` has slope `ρ` (that is, on `T⁻¹(S)`)
//! and down where the slope is `ρ⁻¹`. The level is therefore the base-`ρ`
//! logarithm of the accumulated derivative, and `μ̃ = Σ ρ^{-n} μ|level n` is
//! preserved.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ergodicity::ErgodicityVerdict;
use crate::first_return::{ConservativityCertificate, ReturnMapResult};
use crate::interval::{Interval, IntervalSet};
use crate::pamap::{FloatMap, MapError, PAMap};
use crate::scalar::Scalar;
use crate::systems::ReciprocalSystem;

pub const DEFAULT_EXACT_STEPS: usize = 10_000;
pub const PROXIMITY_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_ITERATE_BOUND: usize = 6;
pub const DEFAULT_SAMPLES_PER_PROBE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaharamSystem {
    base: ReciprocalSystem,
    f_inv: PAMap,
    up_set: IntervalSet,
    down_set: IntervalSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SkewState {
    pub x: Scalar,
    pub level: i64,
}

impl SkewState {
    pub fn new(x: Scalar, level: i64) -> Self {
        SkewState { x, level }
    }
}

/// Subset of `[0, 1) × ℤ` with finitely many non-empty levels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LeveledSet {
    levels: BTreeMap<i64, IntervalSet>,
}

impl LeveledSet {
    pub fn new() -> Self {
        LeveledSet::default()
    }

    pub fn rectangle(base: IntervalSet, level: i64) -> Self {
        let mut e = LeveledSet::new();
        e.insert(level, base);
        e
    }

    /// Unions `set` into level `n`.
    pub fn insert(&mut self, n: i64, set: IntervalSet) {
        if set.is_empty() {
            return;
        }
        let slot = self.levels.entry(n).or_default();
        *slot = slot.union(&set);
    }

    pub fn level(&self, n: i64) -> Option<&IntervalSet> {
        self.levels.get(&n)
    }

    pub fn levels(&self) -> impl Iterator<Item = (i64, &IntervalSet)> {
        self.levels.iter().map(|(n, s)| (*n, s))
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl FromIterator<(i64, IntervalSet)> for LeveledSet {
    fn from_iter<I: IntoIterator<Item = (i64, IntervalSet)>>(iter: I) -> Self {
        let mut e = LeveledSet::new();
        for (n, s) in iter {
            e.insert(n, s);
        }
        e
    }
}

pub fn extend(sys: &ReciprocalSystem) -> MaharamSystem {
    let up_set = sys.t().preimage_set(&IntervalSet::from_interval(sys.small_set()));
    let down_set = IntervalSet::from_interval(Interval::unit()).difference(&up_set);
    MaharamSystem { base: sys.clone(), f_inv: sys.f().invert(), up_set, down_set }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitMode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRange {
    pub min: i64,
    pub max: i64,
    pub steps: usize,
    pub mode: OrbitMode,
    /// Float mode passed within the proximity threshold of a breakpoint.
    pub uncertain: bool,
    pub closest_approach: Option<f64>,
}

impl MaharamSystem {
    pub fn base(&self) -> &ReciprocalSystem {
        &self.base
    }

    pub fn up_set(&self) -> &IntervalSet {
        &self.up_set
    }

    pub fn down_set(&self) -> &IntervalSet {
        &self.down_set
    }

    pub fn rho(&self) -> &Scalar {
        self.base.rho()
    }

    fn shift(&self, x: &Scalar) -> i64 {
        if self.up_set.contains(x) {
            1
        } else {
            -1
        }
    }

    pub fn step(&self, st: &SkewState) -> Result<SkewState, MapError> {
        let x = self.base.f().apply(&st.x)?;
        Ok(SkewState { level: st.level + self.shift(&st.x), x })
    }

    pub fn step_inverse(&self, st: &SkewState) -> Result<SkewState, MapError> {
        let x = self.f_inv.apply(&st.x)?;
        Ok(SkewState { level: st.level - self.shift(&x), x })
    }

    pub fn orbit(&self, start: SkewState, steps: usize) -> Result<Vec<SkewState>, MapError> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(start);
        for _ in 0..steps {
            let next = self.step(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Checks `ρ^{-(level_k - level_0)} · (F^k)'(x₀) = 1` along the orbit.
    pub fn cocycle_coherent(&self, x0: &Scalar, steps: usize) -> Result<bool, MapError> {
        let f = self.base.f();
        let mut st = SkewState::new(x0.clone(), 0);
        let mut derivative = Scalar::one();
        for _ in 0..steps {
            derivative = derivative * f.slope_at(&st.x)?;
            st = self.step(&st)?;
            if self.rho().powi(-st.level) * &derivative != Scalar::one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn mu_tilde(&self, e: &LeveledSet) -> Scalar {
        e.levels().map(|(n, s)| self.rho().powi(-n) * s.measure()).sum()
    }

    pub fn image_leveled(&self, e: &LeveledSet) -> LeveledSet {
        let f = self.base.f();
        let mut out = LeveledSet::new();
        for (n, set) in e.levels() {
            out.insert(n + 1, f.image_set(&set.intersection(&self.up_set)));
            out.insert(n - 1, f.image_set(&set.intersection(&self.down_set)));
        }
        out
    }

    pub fn preimage_leveled(&self, e: &LeveledSet) -> LeveledSet {
        let f = self.base.f();
        let mut out = LeveledSet::new();
        for (n, set) in e.levels() {
            let back = f.preimage_set(set);
            out.insert(n - 1, back.intersection(&self.up_set));
            out.insert(n + 1, back.intersection(&self.down_set));
        }
        out
    }

    pub fn level_range(&self, x0: &Scalar, steps: usize) -> Result<LevelRange, MapError> {
        self.level_range_with_cap(x0, steps, DEFAULT_EXACT_STEPS)
    }

    /// Exact iteration when `steps ≤ exact_cap`, double precision otherwise.
    pub fn level_range_with_cap(&self, x0: &Scalar, steps: usize, exact_cap: usize) -> Result<LevelRange, MapError> {
        if steps <= exact_cap {
            let mut st = SkewState::new(x0.clone(), 0);
            let (mut min, mut max) = (0, 0);
            for _ in 0..steps {
                st = self.step(&st)?;
                min = min.min(st.level);
                max = max.max(st.level);
            }
            return Ok(LevelRange {
                min,
                max,
                steps,
                mode: OrbitMode::Exact,
                uncertain: false,
                closest_approach: None,
            });
        }
        let fm = self.base.f().to_float();
        let _ = self.base.f().branch_at(x0)?;
        Ok(float_level_range(&fm, x0.to_f64(), steps))
    }

    /// `Fⁿ` preserves `μ` for some `1 ≤ n ≤ bound`.
    pub fn measure_preserving_iterate(&self, bound: usize) -> Option<usize> {
        let f = self.base.f();
        let mut power = f.clone();
        for n in 1..=bound {
            if power.is_measure_preserving() {
                return Some(n);
            }
            power = PAMap::compose(f, &power).ok()?;
        }
        None
    }
}

fn float_level_range(fm: &FloatMap, x0: f64, steps: usize) -> LevelRange {
    let mut x = x0;
    let (mut level, mut min, mut max) = (0i64, 0i64, 0i64);
    let mut closest = f64::INFINITY;
    let mut completed = 0;
    for _ in 0..steps {
        let Some(step) = fm.step(x) else { break };
        closest = closest.min(step.breakpoint_distance);
        level += if fm.slope(step.branch) > 1.0 { 1 } else { -1 };
        min = min.min(level);
        max = max.max(level);
        x = step.value;
        completed += 1;
    }
    LevelRange {
        min,
        max,
        steps: completed,
        mode: OrbitMode::Float,
        uncertain: closest < PROXIMITY_THRESHOLD || completed < steps,
        closest_approach: Some(closest),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioSetEstimate {
    /// Exponents `q` (derivative `ρ^q`) seen at returns to each probe.
    pub per_probe: Vec<BTreeSet<i64>>,
    /// Exponents seen for every probe.
    pub common: BTreeSet<i64>,
}

impl RatioSetEstimate {
    pub fn is_inconclusive(&self) -> bool {
        self.common.is_empty()
    }
}

pub fn ratio_set_estimate(sys: &ReciprocalSystem, probes: &[Interval], steps: usize) -> RatioSetEstimate {
    ratio_set_estimate_with_samples(sys, probes, steps, DEFAULT_SAMPLES_PER_PROBE)
}

/// Start points are the centres of `samples` equal cells of each probe.
pub fn ratio_set_estimate_with_samples(
    sys: &ReciprocalSystem,
    probes: &[Interval],
    steps: usize,
    samples: usize,
) -> RatioSetEstimate {
    let m = extend(sys);
    let jobs: Vec<(usize, Scalar)> = probes
        .iter()
        .enumerate()
        .flat_map(|(k, p)| {
            let width = p.length() / Scalar::from(samples as i64);
            (0..samples).map(move |j| {
                let offset = Scalar::ratio(2 * j as i64 + 1, 2);
                (k, p.lo() + &(&width * &offset))
            })
        })
        .collect();
    let seen: Vec<(usize, BTreeSet<i64>)> =
        jobs.par_iter().map(|(k, x0)| (*k, return_exponents(&m, &probes[*k], x0, steps))).collect();
    let mut per_probe = vec![BTreeSet::new(); probes.len()];
    for (k, set) in seen {
        per_probe[k].extend(set);
    }
    let common = per_probe.iter().cloned().reduce(|a, b| a.intersection(&b).copied().collect()).unwrap_or_default();
    RatioSetEstimate { per_probe, common }
}

fn return_exponents(m: &MaharamSystem, probe: &Interval, x0: &Scalar, steps: usize) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    let mut st = SkewState::new(x0.clone(), 0);
    for _ in 0..steps {
        match m.step(&st) {
            Ok(next) => st = next,
            Err(_) => break,
        }
        if probe.contains(&st.x) {
            out.insert(st.level);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonErgodicReason {
    BaseNotErgodic,
    BaseNotConservative,
    MeasurePreservingIterate { n: usize },
    NullS1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum MaharamClaim {
    NonErgodic {
        reasons: Vec<NonErgodicReason>,
    },
    /// `F` is certified ergodic and every exponent in `-k..=k` was observed.
    ConsistentWithErgodic {
        k: i64,
    },
    Undetermined,
}

pub fn ergodicity_diagnostic(
    sys: &ReciprocalSystem,
    returns: &ReturnMapResult,
    conservativity: &ConservativityCertificate,
    verdict: &ErgodicityVerdict,
    exponents: &BTreeSet<i64>,
    k: i64,
) -> MaharamClaim {
    let mut reasons = Vec::new();
    if matches!(verdict, ErgodicityVerdict::NotErgodicCertified { .. }) {
        reasons.push(NonErgodicReason::BaseNotErgodic);
    }
    if matches!(conservativity, ConservativityCertificate::WanderingSetFound { .. }) {
        reasons.push(NonErgodicReason::BaseNotConservative);
    }
    if let Some(n) = extend(sys).measure_preserving_iterate(DEFAULT_ITERATE_BOUND) {
        reasons.push(NonErgodicReason::MeasurePreservingIterate { n });
    }
    if returns.is_complete() && returns.s1_measure().is_zero() {
        reasons.push(NonErgodicReason::NullS1);
    }
    if !reasons.is_empty() {
        return MaharamClaim::NonErgodic { reasons };
    }
    if *verdict == ErgodicityVerdict::ErgodicCertified && (-k..=k).all(|q| exponents.contains(&q)) {
        return MaharamClaim::ConsistentWithErgodic { k };
    }
    MaharamClaim::Undetermined
}
