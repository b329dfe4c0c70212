//! Versioned JSON analysis report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use recimap::ergodicity::RotationClassification;
use recimap::first_return::ReturnBranch;
use recimap::maharam::{LevelRange, MaharamClaim, RatioSetEstimate};
use recimap::{Interval, IntervalSet, Scalar, SystemConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub system: SystemConfig,
    pub parameters: Parameters,
    pub first_return: FirstReturnSummary,
    pub conservativity: Conservativity,
    pub ergodicity: Ergodicity,
    pub maharam: MaharamSummary,
    pub checks: Checks,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub budget: usize,
    pub orbit_steps: usize,
    pub probes: usize,
    pub ratio_steps: usize,
    pub branch_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub domain: Interval,
    pub image: Interval,
    pub return_time: usize,
    pub slope: Scalar,
    pub derivative_exponent: i64,
}

impl From<&ReturnBranch> for BranchSummary {
    fn from(b: &ReturnBranch) -> Self {
        BranchSummary {
            domain: b.domain().clone(),
            image: b.image(),
            return_time: b.return_time(),
            slope: b.map().slope().clone(),
            derivative_exponent: b.derivative_exponent(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstReturnSummary {
    pub branches: Vec<BranchSummary>,
    /// Measure of `S_n` keyed by return time `n`.
    pub return_times: BTreeMap<usize, Scalar>,
    pub unresolved: Scalar,
    pub residual: IntervalSet,
    pub missing_image: IntervalSet,
    /// False when the missing set is only an upper bound because of residual.
    pub missing_image_exact: bool,
    pub budget_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Conservativity {
    ConservativeCertified,
    WanderingSetFound { wandering: Interval, horizon: usize, trap: IntervalSet },
    Unknown { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ErgodicCertified,
    NotErgodicCertified { witness: IntervalSet },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ergodicity {
    pub rotation: RotationClassification,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaharamSummary {
    pub up_set: IntervalSet,
    pub mu_tilde_checks: usize,
    pub mu_tilde_preserved: bool,
    pub level_range: LevelRange,
    pub ratio_set: RatioSetEstimate,
    pub claim: MaharamClaim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub conjugacy: bool,
    pub distortion_law: bool,
    pub cocycle_coherent: bool,
    pub leveled_bijection: bool,
}

impl Checks {
    pub fn all_passed(&self) -> bool {
        self.conjugacy && self.distortion_law && self.cocycle_coherent && self.leveled_bijection
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("conjugacy", self.conjugacy),
            ("distortion_law", self.distortion_law),
            ("cocycle_coherent", self.cocycle_coherent),
            ("leveled_bijection", self.leveled_bijection),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

impl AnalysisReport {
    /// Any verdict in the report is an honest "unknown".
    pub fn has_unknown(&self) -> bool {
        matches!(self.conservativity, Conservativity::Unknown { .. })
            || self.ergodicity.verdict == Verdict::Unknown
            || self.maharam.claim == MaharamClaim::Undetermined
    }
}
