mod common;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{q, random_leveled, random_set, random_system, FloatSystem};
use recimap::ergodicity::{check_invariant_proportion, invariant_search, ProportionVerdict};
use recimap::first_return::first_return;
use recimap::maharam::{extend, SkewState};
use recimap::render::{render_suspension, suspension_polygon, Complex, RenderOptions, SuspensionData};
use recimap::systems::{check_conjugacy, make_iet, IETSpec};
use recimap::{classify_rotation, fixture, Interval, IntervalSet, PAMap, Scalar};

const D: u64 = 2;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-40i64..40, 1i64..15, -40i64..40, 1i64..15)
        .prop_map(|(a, ad, b, bd)| Scalar::new(rat(a, ad), rat(b, bd), D).unwrap())
}

/// Sign of `a + b√d` from a 60-digit integer square root.
fn oracle_sign(a: &BigRational, b: &BigRational) -> Ordering {
    let scale = BigInt::from(10u32).pow(60);
    let root = (BigInt::from(D) * &scale * &scale).sqrt();
    let approx = a * BigRational::from_integer(scale.clone()) + b * BigRational::from_integer(root);
    // |error| < |b|, far below any nonzero value produced here
    if approx.abs() <= b.abs() * rat(2, 1) {
        assert!(b.is_zero() && a.is_zero(), "oracle resolution too coarse");
        return Ordering::Equal;
    }
    if approx.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn system_seed() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 2usize..=5)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_iet(rng: &mut ChaCha8Rng, k: usize) -> PAMap {
    random_system(rng, k).t().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(x in scalar(), y in scalar(), z in scalar()) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert!((&x - &x).is_zero());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.recip(), Scalar::one());
        }
    }

    #[test]
    fn order_is_translation_invariant(x in scalar(), y in scalar(), z in scalar()) {
        prop_assert_eq!(x.cmp(&y), (&x + &z).cmp(&(&y + &z)));
        if x < y && y < z {
            prop_assert!(x < z);
        }
        if z.is_positive() {
            prop_assert_eq!(x.cmp(&y), (&x * &z).cmp(&(&y * &z)));
        }
    }

    #[test]
    fn canonical_text_round_trips(x in scalar()) {
        let back: Scalar = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x.clone());
        prop_assert_eq!(x.is_rational(), x.irrational_part().is_zero());
    }

    #[test]
    fn iet_composition(seed in any::<u64>(), k in 2usize..=5) {
        let mut g = rng(seed);
        let (a, b, c) = (random_iet(&mut g, k), random_iet(&mut g, k), random_iet(&mut g, k + 1));
        let left = PAMap::compose(&PAMap::compose(&a, &b).unwrap(), &c).unwrap();
        let right = PAMap::compose(&a, &PAMap::compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        let id = PAMap::identity(Interval::unit());
        prop_assert_eq!(PAMap::compose(&a.invert(), &a).unwrap(), id.clone());
        prop_assert_eq!(PAMap::compose(&a, &a.invert()).unwrap(), id);
        prop_assert!(a.is_measure_preserving());
    }

    #[test]
    fn image_measure_follows_slopes((seed, k) in system_seed()) {
        let mut g = rng(seed);
        let sys = random_system(&mut g, k);
        let e = random_set(&mut g, 4, 48);
        let f = sys.f();
        let expected: Scalar = f
            .branches()
            .iter()
            .map(|b| b.slope() * &e.intersect_interval(b.domain()).measure())
            .sum();
        let image = f.image_set(&e);
        prop_assert_eq!(image.measure(), expected);
        prop_assert_eq!(f.preimage_set(&image), e.clone());
        // float images of interior sample points land in the exact image
        let fl = FloatSystem::from_system(&sys);
        for i in e.iter() {
            let (lo, hi) = (i.lo().to_f64(), i.hi().to_f64());
            for j in 1..8 {
                let x = lo + (hi - lo) * j as f64 / 8.0;
                if f.breakpoints().iter().any(|b| (b.to_f64() - x).abs() < 1e-9) {
                    continue;
                }
                let y = fl.f(x);
                prop_assert!(image.iter().any(|o| o.lo().to_f64() - 1e-9 <= y && y < o.hi().to_f64() + 1e-9));
            }
        }
    }

    #[test]
    fn reciprocal_structure((seed, k) in system_seed()) {
        let sys = random_system(&mut rng(seed), k);
        let phi = sys.phi().as_map();
        prop_assert_eq!(PAMap::compose(phi, phi).unwrap(), PAMap::identity(Interval::unit()));
        prop_assert!(check_conjugacy(&sys));
        let f = sys.f();
        prop_assert!(f.is_bijection_on(&Interval::unit()));
        let rho = sys.rho().clone();
        let small = IntervalSet::from_interval(sys.small_set());
        let up = sys.t().preimage_set(&small);
        for b in f.branches() {
            let slope = b.slope();
            prop_assert!(slope == &rho || slope == &rho.recip());
            let inside = IntervalSet::from_interval(b.domain().clone()).is_subset(&up);
            prop_assert_eq!(inside, slope == &rho);
        }
        let m = extend(&sys);
        prop_assert_eq!(m.up_set(), &up);
    }

    #[test]
    fn first_return_invariants((seed, k) in system_seed(), budget in 1usize..12) {
        let sys = random_system(&mut rng(seed), k);
        let r = first_return(&sys, budget).unwrap();
        let longer = first_return(&sys, budget + 3).unwrap();
        prop_assert!(longer.residual().is_subset(r.residual()));
        prop_assert_eq!(r.resolved_measure() + &r.residual().measure(), sys.s().clone());
        let rho = sys.rho();
        let mut domains = IntervalSet::empty();
        let mut images = IntervalSet::empty();
        for b in r.branches() {
            let n = b.return_time() as i64;
            prop_assert!(b.return_time() <= budget);
            prop_assert_eq!(b.derivative_exponent(), n - 2);
            prop_assert_eq!(b.map().slope(), &rho.powi(n - 2));
            let d = IntervalSet::from_interval(b.domain().clone());
            let i = IntervalSet::from_interval(b.image());
            prop_assert!(domains.is_disjoint(&d));
            prop_assert!(images.is_disjoint(&i));
            domains = domains.union(&d);
            images = images.union(&i);
        }
        prop_assert!(images.is_subset(&IntervalSet::from_interval(sys.small_set())));
    }

    #[test]
    fn first_return_matches_float_orbits((seed, k) in system_seed()) {
        let mut g = rng(seed);
        let sys = random_system(&mut g, k);
        let r = first_return(&sys, 10).unwrap();
        let fl = FloatSystem::from_system(&sys);
        for b in r.branches() {
            let (lo, hi) = (b.domain().lo().to_f64(), b.domain().hi().to_f64());
            if hi - lo < 1e-6 {
                continue;
            }
            let x = g.gen_range(lo + 1e-9..hi - 1e-9);
            let got = fl.first_return(x, b.return_time()).expect("float orbit returns");
            prop_assert_eq!(got.time, b.return_time());
            let exact = b.map().slope().to_f64() * x + b.map().offset().to_f64();
            prop_assert!((got.image - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn skew_step_round_trip((seed, k) in system_seed(), n in -5i64..5, num in 0i64..997) {
        let sys = random_system(&mut rng(seed), k);
        let m = extend(&sys);
        let st = SkewState::new(q(num, 997), n);
        prop_assert_eq!(m.step_inverse(&m.step(&st).unwrap()).unwrap(), st.clone());
        prop_assert_eq!(m.step(&m.step_inverse(&st).unwrap()).unwrap(), st.clone());
        prop_assert!(m.cocycle_coherent(&st.x, 12).unwrap());
    }

    #[test]
    fn skew_measure_is_preserved((seed, k) in system_seed()) {
        let mut g = rng(seed);
        let sys = random_system(&mut g, k);
        let m = extend(&sys);
        let e = random_leveled(&mut g, -2..=2);
        let image = m.image_leveled(&e);
        prop_assert_eq!(m.mu_tilde(&image), m.mu_tilde(&e));
        prop_assert_eq!(m.preimage_leveled(&image), e.clone());
        prop_assert_eq!(m.mu_tilde(&m.preimage_leveled(&e)), m.mu_tilde(&e));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn comparison_matches_oracle(a in -300i64..300, ad in 1i64..60, b in -300i64..300, bd in 1i64..60) {
        let (ra, rb) = (rat(a, ad), rat(b, bd));
        let x = Scalar::new(ra.clone(), rb.clone(), D).unwrap();
        prop_assert_eq!(x.signum(), oracle_sign(&ra, &rb));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn found_invariant_sets_are_proportional((seed, k) in system_seed()) {
        let sys = random_system(&mut rng(seed), k);
        let seeds: Vec<IntervalSet> = sys
            .f()
            .branches()
            .iter()
            .map(|b| IntervalSet::from_interval(b.domain().clone()))
            .collect();
        let report = invariant_search(sys.f(), &seeds, 12);
        for e in &report.found {
            prop_assert_eq!(&sys.f().image_set(e), e);
            prop_assert_eq!(check_invariant_proportion(&sys, e), ProportionVerdict::Consistent);
        }
    }

    #[test]
    fn suspension_closes(ims in prop::collection::vec(-9i64..=9, 3)) {
        let cfg = fixture("figure1").unwrap();
        let iet = cfg.iet();
        let zeta: Vec<Complex> = iet
            .lengths
            .iter()
            .zip(&ims)
            .map(|(l, &im)| Complex::new(l.clone(), q(im, 10)))
            .collect();
        let data = SuspensionData { iet, zeta };
        if let Ok(poly) = suspension_polygon(&data) {
            prop_assert!(poly.is_closed());
            let labels = recimap::render::default_labels(3);
            let a = render_suspension(&data, &labels, &RenderOptions::default()).unwrap();
            prop_assert_eq!(a, render_suspension(&data, &labels, &RenderOptions::default()).unwrap());
        }
    }
}

#[test]
fn rational_beats_root_two() {
    assert!(q(7, 5) < Scalar::new(rat(0, 1), rat(1, 1), 2).unwrap());
    assert!(q(17, 12) > Scalar::new(rat(0, 1), rat(1, 1), 2).unwrap());
}

#[test]
fn rotation_number_on_exact_points() {
    for name in ["pair_rotation", "pair_rotation_sqrt2"] {
        let sys = fixture(name).unwrap().build().unwrap();
        let s = sys.small_set();
        let r = first_return(&sys, 8).unwrap();
        let cls = classify_rotation(&r, &s);
        let alpha = cls.rotation_number.clone().expect("rotation");
        let len = s.length();
        let fs = r.as_pamap();
        let mut g = rng(7);
        for _ in 0..100 {
            let x = &len * &q(g.gen_range(0..1_000_000), 1_000_000);
            let mut expected = &x + &(&alpha * &len);
            if expected >= len {
                expected = &expected - &len;
            }
            assert_eq!(fs.apply(&x).unwrap(), expected, "{name} at {x}");
        }
    }
}

#[test]
fn identity_interval_exchange_is_trivial() {
    let spec = IETSpec::identity(vec![q(1, 2), q(1, 2)]).unwrap();
    assert_eq!(make_iet(&spec).unwrap(), PAMap::identity(Interval::unit()));
}
