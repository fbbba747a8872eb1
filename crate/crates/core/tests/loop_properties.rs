use std::f64::consts::PI;

use loopnet::fock;
use loopnet::lie::{self, CompactSimpleAlgebra};
use loopnet::linalg::{self, c};
use loopnet::loops::{self, FourierLoopElement, GridLoop, ScalarField, Side};
use proptest::prelude::*;

fn su2() -> CompactSimpleAlgebra {
    lie::build_su(2).unwrap()
}

fn product_loop(alg: &CompactSimpleAlgebra, terms: &[(usize, Vec<f64>, Vec<f64>)], n_grid: usize) -> GridLoop {
    let factors: Vec<_> = terms
        .iter()
        .map(|(i, cos, sin)| (alg.element(*i), ScalarField::trigonometric(cos, sin)))
        .collect();
    GridLoop::product_of_exponentials(alg.tag(), &factors, n_grid).unwrap()
}

fn term() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (0usize..3, proptest::collection::vec(-0.6f64..0.6, 3), proptest::collection::vec(-0.6f64..0.6, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maurer_cartan_is_real(terms in proptest::collection::vec(term(), 1..4)) {
        let alg = su2();
        let gamma = product_loop(&alg, &terms, 128);
        for side in [Side::Left, Side::Right] {
            let x = loops::maurer_cartan(&gamma, side).unwrap();
            for (&k, a) in &x.coefficients {
                let partner = x.coefficient(-k).cloned().unwrap_or_else(|| a * c(0.0, 0.0));
                prop_assert!(linalg::max_abs_diff(&partner, &(-a.adjoint())) < 1e-12);
            }
        }
    }

    #[test]
    fn left_current_matches_pointwise_derivative(terms in proptest::collection::vec(term(), 1..3)) {
        let alg = su2();
        let gamma = product_loop(&alg, &terms, 128);
        let x = loops::maurer_cartan(&gamma, Side::Left).unwrap();
        let h = 1e-5;
        for j in [0usize, 17, 64, 101] {
            let th = 2.0 * PI * j as f64 / 128.0;
            let at = |t: f64| {
                let mut g = linalg::identity(2);
                for (i, cos, sin) in &terms {
                    let f = ScalarField::trigonometric(cos, sin).evaluate(t).re;
                    g *= linalg::exp_anti_hermitian(&(&alg.element(*i).matrix * c(f, 0.0))).unwrap();
                }
                g
            };
            let fd = (at(th + h) - at(th - h)) * c(0.5 / h, 0.0);
            let expected = at(th).adjoint() * fd;
            prop_assert!(linalg::max_abs_diff(&x.evaluate(th), &expected) < 1e-7);
        }
    }

    #[test]
    fn split_reconstructs_with_disjoint_supports(amps in proptest::collection::vec((0usize..3, -1.0f64..1.0), 1..4), z in 0usize..2) {
        let alg = su2();
        // sin^3 vanishes to third order at 0 and pi
        let terms: Vec<_> = amps.iter().map(|&(i, a)| (i, vec![], vec![0.0, 0.75 * a, 0.0, -0.25 * a])).collect();
        let gamma = product_loop(&alg, &terms, 128);
        let (from, to) = if z == 0 { (0.0, PI) } else { (PI, 0.0) };
        let pair = loops::split_loop(&gamma, from, to).unwrap();
        let id = linalg::identity(2);
        prop_assert!(pair.left.mul(&pair.right).unwrap().sup_distance(&gamma) == 0.0);
        for (l, r) in pair.left.samples.iter().zip(&pair.right.samples) {
            prop_assert!(*l == id || *r == id);
        }
    }

    #[test]
    fn hs_truncation_monotone_and_bounded(terms in proptest::collection::vec(term(), 1..3)) {
        let alg = su2();
        let coeffs = product_loop(&alg, &terms, 256).fourier().unwrap();
        let mut last = 0.0;
        for k in [1usize, 2, 4, 8, 16, 64] {
            let r = fock::hs_defect(&coeffs, k);
            prop_assert!(r.truncated_value + 1e-12 >= last);
            prop_assert!(r.truncated_value <= r.fourier_value + 1e-12);
            last = r.truncated_value;
        }
    }

    #[test]
    fn characteristic_flow_matches_ode(alpha in -1.5f64..1.5, t in 0.1f64..1.0, cos in proptest::collection::vec(-0.8f64..0.8, 2), sin in proptest::collection::vec(-0.8f64..0.8, 2)) {
        let alg = su2();
        let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&cos, &sin), &alg.element(0))
            .add(&FourierLoopElement::scalar_times(&ScalarField::trigonometric(&sin, &[]), &alg.element(1)));
        let one = ScalarField::constant(1.0);
        let ode = loops::semidirect_ode(&x, alpha, &one, t, 64, loops::SEMIDIRECT_DT).unwrap();
        let flow = loops::semidirect_flow(&x, alpha, t, 64).unwrap();
        prop_assert!(flow.sup_distance(&ode) < 1e-9);
    }
}

#[test]
fn closed_form_holds_without_rotation_or_for_constant_generators() {
    let alg = su2();
    let one = ScalarField::constant(1.0);
    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.2, 1.0], &[0.0, 0.5]), &alg.element(0))
        .add(&FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[], &[0.0, 0.7]), &alg.element(1)));
    assert!(loops::semidirect_exp(&x, 0.0, &one, 1.0, 256).is_ok());
    let constant = FourierLoopElement::constant(&alg.combination(&[0.3, -0.4, 0.9]));
    let r = loops::semidirect_exp(&constant, 1.3, &one, 1.0, 256).unwrap();
    assert!((r.rotation - 1.3).abs() < 1e-15);
}

#[test]
fn closed_form_is_rejected_for_rotated_non_constant_generators() {
    let alg = su2();
    let one = ScalarField::constant(1.0);
    let x = FourierLoopElement::scalar_times(&ScalarField::trigonometric(&[0.0, 1.0], &[]), &alg.element(0));
    let err = loops::semidirect_exp(&x, 1.0, &one, 1.0, 256).unwrap_err();
    assert!(matches!(err, loopnet::Error::Verification { .. }));
}
