//! Interval exchanges, scaling involutions and reciprocal transformations.
//!
//! Permutation convention: `permutation[i]` is the rank of interval `i` in the
//! image row. For the three-interval exchange with lengths `(0.3, 0.5, 0.2)`
//! that reverses the order, the permutation is `[2, 1, 0]`: `A` lands last,
//! at `[0.7, 1)`, and `C` lands first, at `[0, 0.2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;
use crate::pamap::{AffineBranch, MapError, PAMap};
use crate::scalar::{common_field, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("interval exchange needs at least one interval")]
    NoIntervals,
    #[error("{lengths} lengths but {perm} permutation entries")]
    LengthMismatch { lengths: usize, perm: usize },
    #[error("length {index} is not positive: {value}")]
    NonPositiveLength { index: usize, value: Scalar },
    #[error("lengths sum to {0}, not 1")]
    LengthSum(Scalar),
    #[error("permutation is not a bijection on 0..{0}")]
    NotAPermutation(usize),
    #[error("involution parameter s = {0} must satisfy 0 < s < 1/2")]
    InvalidInvolution(Scalar),
    #[error("involution parameter s = {0} must be rational so that the ratio is rational")]
    IrrationalRatio(Scalar),
    #[error("scaling involution failed to square to the identity")]
    NotAnInvolution,
    #[error(transparent)]
    Field(#[from] ScalarError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Lengths and permutation of an interval exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IETSpec {
    pub lengths: Vec<Scalar>,
    pub permutation: Vec<usize>,
}

impl IETSpec {
    pub fn new(lengths: Vec<Scalar>, permutation: Vec<usize>) -> Result<Self, SystemError> {
        let spec = IETSpec { lengths, permutation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn identity(lengths: Vec<Scalar>) -> Result<Self, SystemError> {
        let k = lengths.len();
        Self::new(lengths, (0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        let k = self.lengths.len();
        if k == 0 {
            return Err(SystemError::NoIntervals);
        }
        if self.permutation.len() != k {
            return Err(SystemError::LengthMismatch { lengths: k, perm: self.permutation.len() });
        }
        common_field(&self.lengths)?;
        for (index, value) in self.lengths.iter().enumerate() {
            if !value.is_positive() {
                return Err(SystemError::NonPositiveLength { index, value: value.clone() });
            }
        }
        let total: Scalar = self.lengths.iter().sum();
        if total != Scalar::one() {
            return Err(SystemError::LengthSum(total));
        }
        let mut seen = vec![false; k];
        for &r in &self.permutation {
            if r >= k || std::mem::replace(&mut seen[r], true) {
                return Err(SystemError::NotAPermutation(k));
            }
        }
        Ok(())
    }

    /// Left endpoints of the intervals in the top (domain) row.
    pub fn domain_starts(&self) -> Vec<Scalar> {
        let mut acc = Scalar::zero();
        self.lengths
            .iter()
            .map(|l| {
                let lo = acc.clone();
                acc = &acc + l;
                lo
            })
            .collect()
    }

    /// Left endpoints of the images, indexed by interval (not by rank).
    pub fn image_starts(&self) -> Vec<Scalar> {
        let k = self.len();
        let mut by_rank = vec![0usize; k];
        for (i, &r) in self.permutation.iter().enumerate() {
            by_rank[r] = i;
        }
        let mut starts = vec![Scalar::zero(); k];
        let mut acc = Scalar::zero();
        for &i in &by_rank {
            starts[i] = acc.clone();
            acc = &acc + &self.lengths[i];
        }
        starts
    }
}

/// Builds the piecewise translation described by `spec`.
pub fn make_iet(spec: &IETSpec) -> Result<PAMap, SystemError> {
    spec.validate()?;
    let branches = spec
        .domain_starts()
        .into_iter()
        .zip(spec.image_starts())
        .zip(&spec.lengths)
        .map(|((lo, img_lo), len)| {
            let dom = Interval::new(lo.clone(), &lo + len).expect("positive length");
            AffineBranch::translation(dom, img_lo - lo)
        })
        .collect();
    Ok(PAMap::new(branches)?)
}

/// Affine involution exchanging `S = [0, s)` and `Φ(S) = [s, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingInvolution {
    s: Scalar,
    rho: Scalar,
    map: PAMap,
}

impl ScalingInvolution {
    pub fn s(&self) -> &Scalar {
        &self.s
    }

    /// `μ(Φ(S)) / μ(S) = (1 - s) / s`.
    pub fn rho(&self) -> &Scalar {
        &self.rho
    }

    pub fn as_map(&self) -> &PAMap {
        &self.map
    }

    pub fn small_set(&self) -> Interval {
        Interval::new(Scalar::zero(), self.s.clone()).expect("s > 0")
    }

    pub fn large_set(&self) -> Interval {
        Interval::new(self.s.clone(), Scalar::one()).expect("s < 1")
    }
}

pub fn make_scaling_involution(s: Scalar) -> Result<ScalingInvolution, SystemError> {
    if !s.is_positive() || s >= Scalar::ratio(1, 2) {
        return Err(SystemError::InvalidInvolution(s));
    }
    let one = Scalar::one();
    let rho = (&one - &s) / &s;
    let small = Interval::new(Scalar::zero(), s.clone()).expect("s > 0");
    let large = Interval::new(s.clone(), one).expect("s < 1");
    let map = PAMap::new(vec![AffineBranch::between(small.clone(), &large), AffineBranch::between(large, &small)])?;
    if PAMap::compose(&map, &map)? != PAMap::identity(Interval::unit()) {
        return Err(SystemError::NotAnInvolution);
    }
    Ok(ScalingInvolution { s, rho, map })
}

/// `F = Φ ∘ T` together with its ingredients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocalSystem {
    iet: IETSpec,
    t: PAMap,
    phi: ScalingInvolution,
    f: PAMap,
    field_d: u64,
}

impl ReciprocalSystem {
    pub fn iet(&self) -> &IETSpec {
        &self.iet
    }

    pub fn t(&self) -> &PAMap {
        &self.t
    }

    pub fn phi(&self) -> &ScalingInvolution {
        &self.phi
    }

    pub fn f(&self) -> &PAMap {
        &self.f
    }

    pub fn rho(&self) -> &Scalar {
        self.phi.rho()
    }

    pub fn s(&self) -> &Scalar {
        self.phi.s()
    }

    /// `S = [0, s)`.
    pub fn small_set(&self) -> Interval {
        self.phi.small_set()
    }

    pub fn field_d(&self) -> u64 {
        self.field_d
    }

    /// Exponent `q` with `slope = ρ^q`; every branch of `F` has `q = ±1`.
    pub fn exponent_of_slope(&self, slope: &Scalar) -> Option<i64> {
        if slope == self.rho() {
            Some(1)
        } else if *slope == self.rho().recip() {
            Some(-1)
        } else {
            None
        }
    }
}

pub fn make_reciprocal(spec: &IETSpec, s: Scalar) -> Result<ReciprocalSystem, SystemError> {
    let field_d = common_field(spec.lengths.iter().chain(std::iter::once(&s)))?;
    if !s.is_rational() {
        return Err(SystemError::IrrationalRatio(s));
    }
    let t = make_iet(spec)?;
    let phi = make_scaling_involution(s)?;
    let f = PAMap::compose(phi.as_map(), &t)?;
    Ok(ReciprocalSystem { iet: spec.clone(), t, phi, f, field_d })
}

/// Checks `Φ F = (T Φ) Φ` as piecewise-affine maps.
pub fn check_conjugacy(sys: &ReciprocalSystem) -> bool {
    let phi = sys.phi.as_map();
    let g = match PAMap::compose(&sys.t, phi) {
        Ok(g) => g,
        Err(_) => return false,
    };
    match (PAMap::compose(phi, &sys.f), PAMap::compose(&g, phi)) {
        (Ok(lhs), Ok(rhs)) => lhs == rhs,
        _ => false,
    }
}
