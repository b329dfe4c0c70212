//! JSON system configurations and the built-in example systems.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::{Complex, SuspensionData};
use crate::scalar::{is_square_free, Scalar};
use crate::systems::{make_reciprocal, IETSpec, ReciprocalSystem, SystemError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("field_d = {0} is neither 0 nor a square-free integer > 1")]
    BadField(u64),
    #[error("{what} = {value} is not in Q(sqrt({field_d}))")]
    OutsideField { what: String, value: Scalar, field_d: u64 },
    #[error("zeta has {got} entries for {expected} intervals")]
    ZetaLength { expected: usize, got: usize },
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    #[serde(default)]
    pub field_d: u64,
    pub lengths: Vec<Scalar>,
    pub permutation: Vec<usize>,
    pub involution_s: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Vec<Complex>>,
}

impl SystemConfig {
    pub fn iet(&self) -> IETSpec {
        IETSpec { lengths: self.lengths.clone(), permutation: self.permutation.clone() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.field_d == 1 || (self.field_d > 1 && !is_square_free(self.field_d)) {
            return Err(ConfigError::BadField(self.field_d));
        }
        let mut named: Vec<(String, &Scalar)> =
            self.lengths.iter().enumerate().map(|(i, x)| (format!("lengths[{i}]"), x)).collect();
        named.push(("involution_s".to_string(), &self.involution_s));
        if let Some(zeta) = &self.zeta {
            if zeta.len() != self.lengths.len() {
                return Err(ConfigError::ZetaLength { expected: self.lengths.len(), got: zeta.len() });
            }
            for (i, z) in zeta.iter().enumerate() {
                named.push((format!("zeta[{i}].re"), &z.re));
                named.push((format!("zeta[{i}].im"), &z.im));
            }
        }
        for (what, value) in named {
            let d = value.field();
            if d != 0 && d != self.field_d {
                return Err(ConfigError::OutsideField { what, value: value.clone(), field_d: self.field_d });
            }
        }
        Ok(())
    }

    pub fn suspension(&self) -> Option<SuspensionData> {
        let zeta = self.zeta.clone()?;
        Some(SuspensionData { iet: self.iet(), zeta })
    }

    pub fn build(&self) -> Result<ReciprocalSystem, ConfigError> {
        self.validate()?;
        Ok(make_reciprocal(&self.iet(), self.involution_s.clone())?)
    }
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn config(name: &str, field_d: u64, lengths: Vec<Scalar>, permutation: Vec<usize>, s: Scalar) -> SystemConfig {
    SystemConfig { name: name.to_string(), field_d, lengths, permutation, involution_s: s, zeta: None }
}

/// `T = id`, `s = 1/3`, so `F = Φ` with `ρ = 2`.
pub fn scaling_third() -> SystemConfig {
    config("scaling_third", 0, vec![Scalar::one()], vec![0], q(1, 3))
}

/// Pair rotation with lengths read off the two-row picture. `B` and `D` are
/// adjusted so that `A ∪ B = [0, 1/3)` holds exactly.
pub fn pair_rotation() -> SystemConfig {
    let a = q(242, 1000);
    let c = q(374, 1000);
    let b = q(1, 3) - &a;
    let d = q(2, 3) - &c;
    config("pair_rotation", 0, vec![a, b, c, d], vec![1, 0, 3, 2], q(1, 3))
}

/// Pair rotation with `|B| = (√2 - 1)/4`, `|D| = 1/4`: `F_S` rotates `S` by the
/// irrational amount `|B| + |D|/2`.
pub fn pair_rotation_sqrt2() -> SystemConfig {
    let b: Scalar = "-1/4+1/4*sqrt(2)".parse().expect("valid scalar");
    let a = q(1, 3) - &b;
    config("pair_rotation_sqrt2", 2, vec![a, b, q(5, 12), q(1, 4)], vec![1, 0, 3, 2], q(1, 3))
}

pub fn wandering() -> SystemConfig {
    config("wandering", 0, vec![q(1, 9), q(2, 9), q(4, 9), q(2, 9)], vec![1, 3, 2, 0], q(1, 3))
}

pub fn nonsurjective() -> SystemConfig {
    config("nonsurjective", 0, vec![q(1, 6), q(1, 6), q(1, 6), q(1, 2)], vec![1, 3, 0, 2], q(1, 3))
}

pub fn identity() -> SystemConfig {
    config("identity", 0, vec![Scalar::one()], vec![0], q(1, 4))
}

/// Three-interval exchange with lengths `0.3, 0.5, 0.2` in reversed order,
/// carrying the suspension vector `(0.3 + i, 0.5 + 0.2i, 0.2 - i)`.
pub fn figure1() -> SystemConfig {
    let mut c = config("figure1", 0, vec![q(3, 10), q(1, 2), q(1, 5)], vec![2, 1, 0], q(1, 3));
    c.zeta =
        Some(vec![Complex::new(q(3, 10), q(1, 1)), Complex::new(q(1, 2), q(1, 5)), Complex::new(q(1, 5), q(-1, 1))]);
    c
}

pub fn builtin_fixtures() -> Vec<SystemConfig> {
    vec![scaling_third(), pair_rotation(), pair_rotation_sqrt2(), wandering(), nonsurjective(), identity(), figure1()]
}

pub fn fixture(name: &str) -> Option<SystemConfig> {
    builtin_fixtures().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_build() {
        for c in builtin_fixtures() {
            let sys = c.build().unwrap_or_else(|e| panic!("{}: {e}", c.name));
            assert_eq!(sys.field_d(), c.field_d, "{}", c.name);
        }
    }

    #[test]
    fn json_round_trip() {
        for c in builtin_fixtures() {
            let text = serde_json::to_string_pretty(&c).unwrap();
            let back: SystemConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c);
        }
        let text = serde_json::to_string(&pair_rotation_sqrt2()).unwrap();
        assert!(text.contains("\"7/12-1/4*sqrt(2)\""), "{text}");
    }

    #[test]
    fn field_mismatch_rejected() {
        let mut c = pair_rotation_sqrt2();
        c.field_d = 3;
        assert!(matches!(c.validate(), Err(ConfigError::OutsideField { .. })));
        c.field_d = 4;
        assert_eq!(c.validate(), Err(ConfigError::BadField(4)));
    }

    #[test]
    fn figure_row_coordinates() {
        let sys = pair_rotation().build().unwrap();
        let f = sys.f();
        let images: Vec<f64> = f.branches().iter().map(|b| b.image().lo().to_f64()).collect();
        let mut sorted = images.clone();
        sorted.sort_by(f64::total_cmp);
        for (got, want) in sorted.iter().zip([0.0, 0.146, 0.333, 0.516]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
    }
}
