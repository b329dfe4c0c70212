#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use recimap::maharam::LeveledSet;
use recimap::systems::{make_reciprocal, IETSpec, ReciprocalSystem};
use recimap::{Interval, IntervalSet, Scalar};

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

pub fn iv(a: Scalar, b: Scalar) -> Interval {
    Interval::new(a, b).unwrap()
}

/// Random rational IET with `k` intervals and a random `s` in `(0, 1/2)`.
pub fn random_system<R: Rng>(rng: &mut R, k: usize) -> ReciprocalSystem {
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = weights.iter().sum();
    let lengths = weights.iter().map(|&w| q(w, total)).collect();
    let mut permutation: Vec<usize> = (0..k).collect();
    permutation.shuffle(rng);
    let num = rng.gen_range(1..=9);
    let den = rng.gen_range(2 * num + 1..=2 * num + 12);
    make_reciprocal(&IETSpec::new(lengths, permutation).unwrap(), q(num, den)).unwrap()
}

/// Random finite union of at most `pieces` intervals with endpoints in `(1/den)ℤ ∩ [0, 1]`.
pub fn random_set<R: Rng>(rng: &mut R, pieces: usize, den: i64) -> IntervalSet {
    (0..rng.gen_range(0..=pieces))
        .filter_map(|_| {
            let a = rng.gen_range(0..den);
            let b = rng.gen_range(a + 1..=den);
            Interval::try_new(q(a, den), q(b, den))
        })
        .collect()
}

pub fn random_leveled<R: Rng>(rng: &mut R, levels: std::ops::RangeInclusive<i64>) -> LeveledSet {
    levels.map(|n| (n, random_set(rng, 3, 60))).collect()
}

/// Double-precision model of `F = Φ ∘ T` built straight from the parameters.
#[derive(Debug, Clone)]
pub struct FloatSystem {
    starts: Vec<f64>,
    lengths: Vec<f64>,
    image_starts: Vec<f64>,
    s: f64,
    rho: f64,
}

pub struct FloatReturn {
    pub time: usize,
    pub image: f64,
}

impl FloatSystem {
    pub fn new(lengths: &[Scalar], permutation: &[usize], s: &Scalar) -> Self {
        let lengths: Vec<f64> = lengths.iter().map(Scalar::to_f64).collect();
        let mut starts = Vec::with_capacity(lengths.len());
        let mut acc = 0.0;
        for l in &lengths {
            starts.push(acc);
            acc += l;
        }
        let image_starts = (0..lengths.len())
            .map(|i| (0..lengths.len()).filter(|&j| permutation[j] < permutation[i]).map(|j| lengths[j]).sum())
            .collect();
        let s = s.to_f64();
        FloatSystem { starts, lengths, image_starts, s, rho: (1.0 - s) / s }
    }

    pub fn from_system(sys: &ReciprocalSystem) -> Self {
        FloatSystem::new(&sys.iet().lengths, &sys.iet().permutation, sys.s())
    }

    pub fn t(&self, x: f64) -> f64 {
        let i = self.starts.iter().rposition(|&a| a <= x).unwrap_or(0);
        self.image_starts[i] + (x - self.starts[i])
    }

    pub fn phi(&self, y: f64) -> f64 {
        if y < self.s {
            self.s + y * self.rho
        } else {
            (y - self.s) / self.rho
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.phi(self.t(x))
    }

    pub fn first_return(&self, x: f64, max_steps: usize) -> Option<FloatReturn> {
        let mut y = x;
        for n in 1..=max_steps {
            y = self.f(y);
            if y < self.s {
                return Some(FloatReturn { time: n, image: y });
            }
        }
        None
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }
}
