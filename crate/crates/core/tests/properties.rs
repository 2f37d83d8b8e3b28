//! Property tests across module boundaries: projector algebra, transport
//! invariants, and exact combinatorics on randomly drawn inputs.

use aht_core::combinatorics::upsilon_sum;
use aht_core::dynamics::{step, AhtState, DynamicsConfig};
use aht_core::geometry::{make_grid, Domain};
use aht_core::hodge::{leray_project, projection_tolerance};
use aht_core::presets::random_smooth_field;
use aht_core::symbolic::{circulation_kernel, curl_series, div_series, SymbolicExpr};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn torus(n: usize) -> std::sync::Arc<aht_core::Grid2D> {
    make_grid(Domain::torus(2.0 * std::f64::consts::PI).unwrap(), (n, n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn projector_is_linear_idempotent_and_solenoidal(s1 in 0u64..1000, s2 in 0u64..1000, a in -2.0f64..2.0, decay in 0.4f64..1.0) {
        let g = torus(32);
        let (y1, y2) = (random_smooth_field(&g, s1, decay), random_smooth_field(&g, s2, decay));
        let tol = projection_tolerance(&g);
        let p1 = leray_project(&y1).unwrap().u;
        let p2 = leray_project(&y2).unwrap().u;
        let mix = leray_project(&y1.scale(a).add(&y2).unwrap()).unwrap().u;
        let lin = p1.scale(a).add(&p2).unwrap();
        let scale = y1.max_abs() * a.abs() + y2.max_abs();
        prop_assert!(mix.sub(&lin).unwrap().max_abs() <= tol * scale);
        prop_assert!(leray_project(&p1).unwrap().u.sub(&p1).unwrap().max_abs() <= 2.0 * tol * y1.max_abs());
        prop_assert!(p1.divergence().max_abs() <= tol * y1.surrogate_norm());
    }

    #[test]
    fn short_transport_keeps_energy(seed in 0u64..1000) {
        let g = torus(32);
        let mut s = AhtState::new(random_smooth_field(&g, seed, 0.6)).unwrap();
        let e0 = s.y.energy();
        let dt = 0.2 / s.u.max_abs().max(1.0) * (2.0 * std::f64::consts::PI / 32.0);
        for _ in 0..10 {
            s = step(&s, dt, &DynamicsConfig::default()).unwrap();
        }
        prop_assert!((s.y.energy() - e0).abs() <= 1e-6 * e0);
    }

    #[test]
    fn chemin_sums_respect_bound(s in 1usize..5, m in 0usize..10) {
        let u = upsilon_sum(s, m).unwrap();
        let bound = BigRational::from_integer(BigInt::from(20).pow(s as u32)) / BigRational::from_integer(BigInt::from((m + 1) * (m + 1)));
        prop_assert_eq!(&u.bound, &bound);
        prop_assert!(u.value <= bound);
    }
}

#[test]
fn circulation_kernel_is_binomial_in_magnitude() {
    for k in 1..=12usize {
        let c = circulation_kernel(k).unwrap();
        let mut b = BigInt::from(1);
        for r in 1..=k {
            b = b * BigInt::from(k + 1 - r) / BigInt::from(r);
            assert_eq!(c[r - 1].magnitude(), b.magnitude(), "k={k} r={r}");
        }
    }
}

#[test]
fn series_text_round_trips() {
    for k in 1..=3 {
        for e in [div_series(k).unwrap(), curl_series(k).unwrap()] {
            let back = SymbolicExpr::parse_text(&e.to_text()).unwrap();
            assert_eq!(back.canonical(), e.canonical());
        }
    }
}
