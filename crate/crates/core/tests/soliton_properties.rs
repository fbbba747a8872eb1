use std::f64::consts::PI;

use loopnet::lie;
use loopnet::linalg::{self, c, CMatrix};
use loopnet::loops::ScalarField;
use loopnet::soliton::{self, SolitonFactor, SolitonPath};
use proptest::prelude::*;

fn diag(a: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = c(0.0, a);
    m[(1, 1)] = c(0.0, -a);
    m
}

fn torus_soliton(a: f64, cos: &[f64], sin: &[f64]) -> SolitonPath {
    SolitonPath::new(
        lie::AlgebraTag(2),
        vec![
            SolitonFactor::Periodic { generator: diag(1.0), profile: ScalarField::trigonometric(cos, sin) },
            SolitonFactor::Linear { generator: diag(a) },
        ],
    )
    .unwrap()
}

fn general_soliton(a: f64, coeffs: &[f64], cos: &[f64]) -> SolitonPath {
    let alg = lie::build_su(2).unwrap();
    SolitonPath::new(
        alg.tag(),
        vec![
            SolitonFactor::Periodic { generator: alg.combination(coeffs).matrix, profile: ScalarField::trigonometric(cos, &[]) },
            SolitonFactor::Linear { generator: diag(a) },
        ],
    )
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.8f64..0.8, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jump_is_position_independent(a in -1.0f64..1.0, v in coeffs(), cos in coeffs()) {
        let z = general_soliton(a, &v, &cos);
        prop_assert!(soliton::jump_residual(&z) <= 1e-10);
        let h = soliton::jump(&z).unwrap();
        for x in [-3.0, 0.4, 2.0, 7.5] {
            let step = z.evaluate(x).adjoint() * z.evaluate(x + 2.0 * PI);
            prop_assert!(linalg::max_abs_diff(&step, &h) <= 1e-10);
        }
    }

    #[test]
    fn zeta_t_periodic_and_one_parameter(a in -1.0f64..1.0, v in coeffs(), cos in coeffs(), t in -7.0f64..7.0, s in -7.0f64..7.0) {
        let z = general_soliton(a, &v, &cos);
        prop_assert!(soliton::zeta_t(&z, t, 64).is_ok());
        prop_assert!(soliton::one_parameter_residual(&z, t, s, 64) <= 1e-10);
    }

    #[test]
    fn torus_jumps_compose_homomorphically(a in -1.0f64..1.0, b in -1.0f64..1.0, c1 in coeffs(), c2 in coeffs()) {
        let z = torus_soliton(a, &c1, &[]);
        let w = torus_soliton(b, &[], &c2);
        let zw = soliton::compose(&z, &w).unwrap();
        prop_assert!(linalg::max_abs_diff(zw.jump(), &(z.jump() * w.jump())) <= 1e-10);
        // exponents add on the diagonal torus
        let expected = linalg::exp_anti_hermitian(&(diag(a + b) * c(2.0 * PI, 0.0))).unwrap();
        prop_assert!(linalg::max_abs_diff(zw.jump(), &expected) <= 1e-10);
        let inv = soliton::inverse(&z).unwrap();
        let trivial = soliton::compose(&z, &inv).unwrap();
        prop_assert!(linalg::max_abs_diff(trivial.jump(), &linalg::identity(2)) <= 1e-10);
        prop_assert!(linalg::max_abs_diff(&soliton::equivalence_key(&zw).unwrap(), zw.jump()) <= 1e-15);
    }

    #[test]
    fn conjugation_preserves_the_class(a in -1.0f64..1.0, v in coeffs(), g in coeffs()) {
        let z = torus_soliton(a, &v, &[]);
        let alg = lie::build_su(2).unwrap();
        let u = linalg::exp_anti_hermitian(&alg.combination(&g).matrix).unwrap();
        let w = soliton::conjugate(&z, &u).unwrap();
        prop_assert!(linalg::max_abs_diff(w.jump(), &(&u * z.jump() * u.adjoint())) <= 1e-10);
        prop_assert!(soliton::conjugacy_class_equal(z.jump(), w.jump(), 1e-10));
    }
}

#[test]
fn rotation_cocycle_constant_iff_central() {
    let tag = lie::AlgebraTag(2);
    let alg = lie::build_su(2).unwrap();
    // central: h = -Id, a non-commuting periodic part leaves zeta_2pi constant
    let central = general_soliton(0.5, &[0.7, 0.2, 0.0], &[0.3, 0.9]);
    assert!(soliton::extendability(&central).extendable);
    let g = soliton::rotation_cocycle_2pi(&central, 64).unwrap();
    assert!(g.constancy_defect() < 1e-10);
    // non-central jump with a non-commuting periodic conjugator: not constant
    let moving = general_soliton(0.25, &[0.7, 0.2, 0.0], &[0.3, 0.9]);
    assert!(!soliton::extendability(&moving).central);
    assert!(soliton::rotation_cocycle_2pi(&moving, 64).unwrap().constancy_defect() > 1e-3);
    // non-central jump with a commuting periodic part: constant, yet not extendable
    let torus = torus_soliton(0.25, &[0.3, 0.9], &[]);
    assert!(soliton::rotation_cocycle_2pi(&torus, 64).unwrap().constancy_defect() < 1e-10);
    assert!(!soliton::extendability(&torus).extendable);
    let ordinary = SolitonPath::new(tag, vec![SolitonFactor::Periodic { generator: alg.element(1).matrix.clone(), profile: ScalarField::trigonometric(&[0.0, 1.0], &[]) }]).unwrap();
    let composed = soliton::compose(&central, &ordinary).unwrap();
    assert!(linalg::max_abs_diff(composed.jump(), central.jump()) < 1e-10);
}

#[test]
fn keys_distinguish_distinct_torus_jumps() {
    let a = soliton::equivalence_key(&torus_soliton(0.25, &[0.1], &[])).unwrap();
    let b = soliton::equivalence_key(&torus_soliton(0.125, &[0.1], &[])).unwrap();
    assert!(linalg::max_abs_diff(&a, &b) > 1e-3);
    let general = general_soliton(0.25, &[0.7, 0.2, 0.0], &[0.3]);
    assert!(matches!(soliton::equivalence_key(&general), Err(loopnet::Error::Unsupported(_))));
}
