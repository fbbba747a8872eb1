use loopnet::fock::{self, FockOperator, TruncatedFockSpace};
use loopnet::lie::{self, CompactSimpleAlgebra};
use loopnet::linalg::{c, CVector};
use loopnet::loops::{self, FourierLoopElement, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn virasoro_defect(space: &TruncatedFockSpace, alg: &CompactSimpleAlgebra, window: i64) -> f64 {
    let central = alg.dimension() as f64 / (1.0 + alg.dual_coxeter() as f64);
    let ls: Vec<FockOperator> = (-window..=window).map(|n| fock::sugawara(space, alg, n).unwrap()).collect();
    let l = |n: i64| &ls[(n + window) as usize];
    let id = FockOperator::identity(space);
    let mut worst: f64 = 0.0;
    for m in -window..=window {
        for n in -window..=window {
            if (m + n).abs() > window {
                continue;
            }
            let mut r = l(m).commutator(l(n)).add_scaled(l(m + n), c(-((m - n) as f64), 0.0));
            if m + n == 0 {
                r = r.add_scaled(&id, c(-central * (m * (m * m - 1)) as f64 / 12.0, 0.0));
            }
            worst = worst.max(r.protected_max_abs(space));
        }
    }
    worst
}

#[test]
fn virasoro_relation_su3() {
    let alg = lie::build_su(3).unwrap();
    let space = fock::build_fock_sectors(3, 6, &[0, 1, 2]).unwrap();
    assert!(virasoro_defect(&space, &alg, 3) < 1e-10);
}

#[test]
fn commutator_lemma_su3() {
    let alg = lie::build_su(3).unwrap();
    let space = fock::build_fock_sectors(3, 6, &[0, 1, 2]).unwrap();
    let mut worst: f64 = 0.0;
    for n in -2..=2i64 {
        let ln = fock::sugawara(&space, &alg, n).unwrap();
        for i in [0, 3, 7] {
            let x = alg.element(i);
            for k in -2..=2i64 {
                let r = ln
                    .commutator(&fock::current(&space, &x, k).unwrap())
                    .add_scaled(&fock::current(&space, &x, n + k).unwrap(), c(k as f64, 0.0));
                worst = worst.max(r.protected_max_abs(&space));
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn verification_suite_passes_on_su3() {
    let alg = lie::build_su(3).unwrap();
    let space = fock::build_fock_sectors(3, 4, &[0, 1, 2]).unwrap();
    let records = fock::verification_suite(&space, &alg, 2).unwrap();
    assert_eq!(records.len(), 5);
    for r in records {
        assert!(r.pass, "{r:?}");
    }
}

fn random_vector(space: &TruncatedFockSpace, max_energy: i64, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(space.dim(), |j, _| {
        if space.energy(j) <= max_energy {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            c(0.0, 0.0)
        }
    })
}

#[test]
fn current_sobolev_bound_holds() {
    let alg = lie::build_su(2).unwrap();
    let space = fock::build_fock(2, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let modes: Vec<(i64, _)> = (-2..=2)
            .map(|k| {
                let a = alg.combination(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
                (k, a.matrix)
            })
            .collect();
        let x = FourierLoopElement::from_modes(alg.tag(), modes);
        let protected = fock::loop_current(&space, &x).unwrap().protected_energy;
        let xi = random_vector(&space, protected, &mut rng);
        for t in [0.0, 1.0] {
            let (lhs, rhs) = fock::current_sobolev_bound(&space, alg.dual_coxeter(), &x, &xi, t).unwrap();
            assert!(lhs <= rhs, "t = {t}: {lhs} > {rhs}");
        }
    }
}

fn stress_sides(n: i64, k: u32, seed: u64) -> Vec<(f64, f64)> {
    let alg = lie::build_su(2).unwrap();
    let space = fock::build_fock(2, 6).unwrap();
    let central = alg.dimension() as f64 / (1.0 + alg.dual_coxeter() as f64);
    let l0 = fock::sugawara(&space, &alg, 0).unwrap();
    let ln = fock::sugawara(&space, &alg, n).unwrap();
    let reach = ln.protected_energy.min(l0.protected_energy);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5)
        .map(|_| {
            let xi = random_vector(&space, reach, &mut rng);
            fock::stress_tensor_bound(&space, &l0, &ln, n, central, k, &xi).unwrap()
        })
        .collect()
}

#[test]
fn stress_tensor_bound_holds_for_nonzero_modes() {
    for n in [-3, -2, -1, 1, 2, 3] {
        for k in [0, 1] {
            for (lhs, rhs) in stress_sides(n, k, 22) {
                assert!(lhs <= rhs, "n = {n}, k = {k}: {lhs} > {rhs}");
            }
        }
    }
}

/// At `n = 0` the factor is `sqrt(c/2) < 1` for `c = 1`, while
/// `|L0 xi| / |(1 + L0) xi|` tends to 1 on high-energy vectors.
#[test]
fn stress_tensor_bound_fails_at_zero_mode_below_c_two() {
    for k in [0, 1] {
        let sides = stress_sides(0, k, 22);
        assert!(sides.iter().any(|(lhs, rhs)| lhs > rhs), "k = {k}");
        for (lhs, rhs) in sides {
            assert!(lhs <= rhs * 2f64.sqrt(), "k = {k}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn damping_commutator_bound_holds() {
    let alg = lie::build_su(2).unwrap();
    let space = fock::build_fock(2, 6).unwrap();
    for i in 0..3 {
        for m in -3..=3 {
            for eps in [0.01, 0.1, 1.0, 5.0] {
                let (lhs, rhs) = fock::damping_commutator_bound(&space, 2, &alg.element(i), m, eps).unwrap();
                assert!(lhs <= rhs, "x{i}({m}), eps {eps}: {lhs} > {rhs}");
            }
        }
    }
}

#[test]
fn implemented_exponential_is_unitary_with_second_order_remainder() {
    let alg = lie::build_su(2).unwrap();
    let space = fock::build_fock(2, 4).unwrap();
    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.2, 0.6], &[]), &alg.element(0));
    let y = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[], &[0.0, 0.9]), &alg.element(1))
        .add(&FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 0.4], &[]), &alg.element(0)));
    let imp = fock::implement_exponential(&space, &x).unwrap();
    assert!(imp.unitarity_defect < 1e-12);
    let r = fock::adjoint_first_order(&space, &x, &y, [2e-2, 1e-2], 1).unwrap();
    assert!((r.ratio - 4.0).abs() < 0.05, "ratio {}", r.ratio);
    assert!((r.scalar_first_order - r.expected_scalar).norm() < 1e-12);
    assert!((r.expected_scalar - c(0.0, 1.0) * loops::central_term_b(&x, &y).unwrap()).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn real_loop_currents_are_anti_adjoint(coeffs in proptest::collection::vec(-1.0f64..1.0, 9)) {
        let alg = lie::build_su(2).unwrap();
        let space = fock::build_fock(2, 4).unwrap();
        let x = (0..3).fold(FourierLoopElement::zero(alg.tag()), |acc, i| {
            let f = ScalarField::trigonometric(&[coeffs[3 * i]], &[0.0, coeffs[3 * i + 1], coeffs[3 * i + 2]]);
            acc.add(&FourierLoopElement::scalar_times(&f, &alg.element(i)))
        });
        let p = fock::loop_current(&space, &x).unwrap();
        prop_assert!(p.add(&p.adjoint()).protected_max_abs(&space) < 1e-12);
    }
}
