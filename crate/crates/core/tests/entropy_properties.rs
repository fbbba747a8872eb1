use std::f64::consts::PI;

use loopnet::entropy::{self, GridSpec, LineFactor, LinePath, Profile};
use loopnet::lie;
use loopnet::linalg;
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        (-2.0f64..2.0, 1.0f64..2.0, -1.0f64..1.0).prop_map(|(c, w, a)| Profile::gaussian(c, w, a)),
        (-2.0f64..2.0, 2.0f64..3.0, -1.0f64..1.0).prop_map(|(c, r, a)| Profile::bump(c, r, a)),
    ]
}

fn path() -> impl Strategy<Value = LinePath> {
    proptest::collection::vec((proptest::collection::vec(-1.0f64..1.0, 3), profile()), 1..4).prop_map(|fs| {
        let alg = lie::build_su(2).unwrap();
        let factors = fs
            .into_iter()
            .map(|(coeffs, profile)| LineFactor { generator: alg.combination(&coeffs).matrix, profile })
            .collect();
        LinePath::new(alg.tag(), factors, 1.0).unwrap()
    })
}

/// Opposite bumps with a shared generator on each half-line.
fn split_path() -> impl Strategy<Value = LinePath> {
    proptest::collection::vec(
        (proptest::collection::vec(-1.0f64..1.0, 3), -1.0f64..1.0, 0.5f64..1.5, 0.0f64..1.0, 0.0f64..1.0, prop::bool::ANY),
        1..3,
    )
    .prop_map(|pairs| {
        let alg = lie::build_su(2).unwrap();
        let mut factors = Vec::new();
        for (coeffs, a, r, s1, s2, negative) in pairs {
            let side = if negative { -1.0 } else { 1.0 };
            let x = alg.combination(&coeffs).matrix;
            let c1 = side * (r + 3.0 * s1);
            let c2 = side * (r + 3.0 * s2);
            factors.push(LineFactor { generator: x.clone(), profile: Profile::bump(c1, r, a) });
            factors.push(LineFactor { generator: x, profile: Profile::bump(c2, r, -a) });
        }
        LinePath::new(alg.tag(), factors, 1.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profile_signs_monotonicity_convexity(p in path()) {
        let mut spec = GridSpec::new(-4.0, 4.0, 33);
        spec.fd_step = 1e-2;
        let prof = entropy::qnec_profile_unchecked(&p, &spec).unwrap();
        let tol = entropy::PROFILE_TOL;
        for i in 0..prof.t.len() {
            prop_assert!(prof.s[i] >= -tol && prof.s_bar[i] >= -tol);
            prop_assert!(prof.s_dd_analytic[i] >= -tol);
            // S'' = 2 pi E(t)
            prop_assert!((prof.s_dd_analytic[i] - 2.0 * PI * prof.density[i]).abs() <= 1e-12 + 1e-10 * prof.density[i].abs());
        }
        for w in prof.s.windows(2) {
            prop_assert!(w[1] <= w[0] + tol);
        }
        for w in prof.s_bar.windows(2) {
            prop_assert!(w[1] >= w[0] - tol);
        }
        prop_assert!(prof.min_second_difference() >= -1e-8);
        prop_assert!(prof.fd_relative_error().0 <= 1e-4);
        prop_assert!(prof.verify().is_ok());
    }

    #[test]
    fn sum_rule_and_bekenstein(p in path(), t1 in -4.0f64..4.0, t2 in -4.0f64..4.0) {
        let e = entropy::total_energy(&p).unwrap();
        prop_assert!(e >= 0.0);
        let r = entropy::sum_rule_residual(&p, t1, t2).unwrap();
        prop_assert!(r.abs() <= 1e-8 * 1f64.max(2.0 * PI * e));
        for radius in [0.5, 1.0, 5.0] {
            let b = entropy::bekenstein_check(&p, radius).unwrap();
            prop_assert!(b.s_interval >= -1e-12);
            prop_assert!(b.holds);
        }
    }

    #[test]
    fn mirror_and_conjugation_symmetries(p in path(), t in -3.0f64..3.0, coeffs in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let m = p.mirrored().unwrap();
        let s = entropy::entropy_right(&p, t).unwrap();
        prop_assert!((entropy::entropy_left(&m, -t).unwrap() - s).abs() < 1e-9);
        let alg = lie::build_su(2).unwrap();
        let g = linalg::exp_anti_hermitian(&alg.combination(&coeffs).matrix).unwrap();
        let q = p.conjugated_by(&g).unwrap();
        prop_assert!((entropy::entropy_right(&q, t).unwrap() - s).abs() < 1e-9);
    }

    #[test]
    fn cocycle_chain_identity(p in split_path(), t in -0.5f64..0.5, s in -0.5f64..0.5) {
        let grid: Vec<f64> = (0..64).map(|i| -6.0 + 12.0 * i as f64 / 63.0).collect();
        prop_assert!(entropy::cocycle_chain_residual(&p, t, s, &grid).unwrap() <= 1e-10);
        let u0 = entropy::connes_cocycle_path(&p, 0.0).unwrap().result;
        for &u in &grid {
            prop_assert!(linalg::max_abs_diff(&u0.evaluate(u), &linalg::identity(2)) < 1e-12);
        }
    }
}

#[test]
fn unsplittable_paths_are_rejected() {
    let alg = lie::build_su(2).unwrap();
    let p = LinePath::new(
        alg.tag(),
        vec![LineFactor { generator: alg.element(0).matrix.clone(), profile: Profile::bump(0.0, 1.0, 1.0) }],
        1.0,
    )
    .unwrap();
    assert!(matches!(entropy::connes_cocycle_path(&p, 0.1), Err(loopnet::Error::NotSplittable { .. })));
}
