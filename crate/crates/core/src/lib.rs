//! Exact-arithmetic toolkit for reciprocal transformations `F = Φ ∘ T`, where
//! `T` is an interval exchange and `Φ` a piecewise-affine scaling involution,
//! and for their discrete Maharam extensions on `[0, 1) × ℤ`.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod ergodicity;
pub mod first_return;
pub mod fixtures;
pub mod interval;
pub mod maharam;
pub mod pamap;
pub mod render;
pub mod scalar;
pub mod systems;

pub use ergodicity::{
    check_invariant_proportion, classify_rotation, contains_s_check, ergodicity_verdict, invariant_search,
    ErgodicityVerdict, InvariantSearchReport, ProportionVerdict, RotationClassification,
};
pub use first_return::{
    check_surjective, conservativity_certificate, first_return, return_time_partition, ConservativityCertificate,
    ReturnBranch, ReturnError, ReturnMapResult, ReturnTimePartition,
};
pub use fixtures::{builtin_fixtures, fixture, ConfigError, SystemConfig};
pub use interval::{Interval, IntervalSet};
pub use maharam::{
    ergodicity_diagnostic, extend, ratio_set_estimate, LevelRange, LeveledSet, MaharamClaim, MaharamSystem,
    NonErgodicReason, RatioSetEstimate, SkewState,
};
pub use pamap::{AffineBranch, MapError, PAMap};
pub use render::{Complex, RenderError, RenderOptions, SuspensionData};
pub use scalar::{Scalar, ScalarError};
pub use systems::{IETSpec, ReciprocalSystem, ScalingInvolution, SystemError};
