//! Twisted paths `zeta(x + 2 pi) = zeta(x) h` and their loop-level data.
//!
//! A soliton is stored on one period as an ordered product of exponential
//! factors, each either periodic `exp(f(x) X)` or linear `exp(x A)`. Points
//! outside `[0, 2 pi)` are evaluated through `zeta(x + 2 pi k) = zeta(x) h^k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{center_index, AlgebraTag};
use crate::linalg::{self, c, CMatrix};
use crate::loops::{GridLoop, ScalarField};

/// Tolerance of every soliton identity.
pub const SOLITON_TOL: f64 = 1e-10;

/// Sample count for the jump consistency check.
pub const JUMP_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum SolitonFactor {
    /// `exp(f(x) X)` with `f` a real trigonometric polynomial.
    Periodic { generator: CMatrix, profile: ScalarField },
    /// `exp(x A)`.
    Linear { generator: CMatrix },
}

impl SolitonFactor {
    fn generator(&self) -> &CMatrix {
        match self {
            SolitonFactor::Periodic { generator, .. } | SolitonFactor::Linear { generator } => generator,
        }
    }

    fn exponent(&self, x: f64) -> f64 {
        match self {
            SolitonFactor::Periodic { profile, .. } => profile.evaluate(x).re,
            SolitonFactor::Linear { .. } => x,
        }
    }

    fn negated(&self) -> Self {
        match self {
            SolitonFactor::Periodic { generator, profile } => SolitonFactor::Periodic {
                generator: -generator,
                profile: profile.clone(),
            },
            SolitonFactor::Linear { generator } => SolitonFactor::Linear {
                generator: -generator,
            },
        }
    }

    fn conjugated(&self, g: &CMatrix) -> Self {
        let conj = |x: &CMatrix| g * x * g.adjoint();
        match self {
            SolitonFactor::Periodic { generator, profile } => SolitonFactor::Periodic {
                generator: conj(generator),
                profile: profile.clone(),
            },
            SolitonFactor::Linear { generator } => SolitonFactor::Linear {
                generator: conj(generator),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonPath {
    pub tag: AlgebraTag,
    pub factors: Vec<SolitonFactor>,
    jump: CMatrix,
}

impl SolitonPath {
    /// Builds the path and extracts its jump, rejecting `x`-dependent jumps.
    pub fn new(tag: AlgebraTag, factors: Vec<SolitonFactor>) -> Result<Self> {
        for f in &factors {
            let x = f.generator();
            if x.shape() != (tag.0, tag.0)
                || linalg::anti_hermitian_defect(x) > 1e-12
                || linalg::trace(x).norm() > 1e-12
                || !linalg::is_finite(x)
            {
                return Err(Error::Domain("soliton generators must lie in the real form".into()));
            }
            if let SolitonFactor::Periodic { profile, .. } = f {
                if !profile.is_real(1e-12) {
                    return Err(Error::Domain("soliton profiles must be real".into()));
                }
            }
        }
        let mut path = SolitonPath {
            tag,
            factors,
            jump: linalg::identity(tag.0),
        };
        path.jump = path.raw(0.0).adjoint() * path.raw(2.0 * PI);
        jump(&path)?;
        Ok(path)
    }

    /// `zeta(x) = exp(x A)`.
    pub fn linear(tag: AlgebraTag, a: CMatrix) -> Result<Self> {
        Self::new(tag, vec![SolitonFactor::Linear { generator: a }])
    }

    /// The product formula itself, without the extension rule.
    fn raw(&self, x: f64) -> CMatrix {
        let mut g = linalg::identity(self.tag.0);
        for f in &self.factors {
            g *= linalg::exp_anti_hermitian(&(f.generator() * c(f.exponent(x), 0.0)))
                .expect("generators are anti-hermitian");
        }
        g
    }

    pub fn jump(&self) -> &CMatrix {
        &self.jump
    }

    /// `zeta(x)` through `zeta(x + 2 pi k) = zeta(x) h^k`.
    pub fn evaluate(&self, x: f64) -> CMatrix {
        let k = (x / (2.0 * PI)).floor();
        let x0 = x - 2.0 * PI * k;
        let mut g = self.raw(x0);
        let step = if k >= 0.0 { self.jump.clone() } else { self.jump.adjoint() };
        for _ in 0..(k.abs() as u64) {
            g *= &step;
        }
        g
    }

    /// Whether every generator is diagonal.
    pub fn is_torus_valued(&self) -> bool {
        self.factors.iter().all(|f| {
            let x = f.generator();
            (0..x.nrows()).all(|i| (0..x.ncols()).all(|j| i == j || x[(i, j)].norm() <= 1e-12))
        })
    }
}

/// `max_x |zeta(x)^{-1} zeta(x + 2 pi) - h|` over 32 points of the formula.
pub fn jump_residual(zeta: &SolitonPath) -> f64 {
    (0..JUMP_SAMPLES)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / JUMP_SAMPLES as f64;
            let h = zeta.raw(x).adjoint() * zeta.raw(x + 2.0 * PI);
            linalg::max_abs_diff(&h, &zeta.jump)
        })
        .fold(0.0, f64::max)
}

/// `zeta(0)^{-1} zeta(2 pi)`, checked for `x`-independence at 32 points.
pub fn jump(zeta: &SolitonPath) -> Result<CMatrix> {
    let residual = jump_residual(zeta);
    if residual > SOLITON_TOL {
        return Err(Error::InvalidSoliton(residual));
    }
    Ok(zeta.jump.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonVerdict {
    pub central: bool,
    pub center_index: Option<usize>,
    pub extendable: bool,
}

/// Central jumps, and only those, extend to honest sectors.
pub fn extendability(zeta: &SolitonPath) -> SolitonVerdict {
    let k = center_index(&zeta.jump, SOLITON_TOL);
    SolitonVerdict {
        central: k.is_some(),
        center_index: k,
        extendable: k.is_some(),
    }
}

fn circle_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

/// `zeta_t(phi) = zeta(phi) zeta(phi - t)^{-1}` on an `n_grid` circle grid,
/// with periodicity asserted.
pub fn zeta_t(zeta: &SolitonPath, t: f64, n_grid: usize) -> Result<GridLoop> {
    let at = |phi: f64| zeta.evaluate(phi) * zeta.evaluate(phi - t).adjoint();
    let samples: Vec<CMatrix> = circle_grid(n_grid).map(at).collect();
    let residual = circle_grid(n_grid)
        .zip(&samples)
        .map(|(phi, g)| linalg::max_abs_diff(&at(phi + 2.0 * PI), g))
        .fold(0.0, f64::max);
    if residual > SOLITON_TOL {
        return Err(Error::Verification {
            what: "zeta_t periodic".into(),
            residual,
            tolerance: SOLITON_TOL,
            at: Some(t),
        });
    }
    GridLoop::new(zeta.tag, samples)
}

/// `max_phi |zeta_{t+s}(phi) - zeta_t(phi) zeta_s(phi - t)|` on the grid.
pub fn one_parameter_residual(zeta: &SolitonPath, t: f64, s: f64, n_grid: usize) -> f64 {
    let z = |tau: f64, phi: f64| zeta.evaluate(phi) * zeta.evaluate(phi - tau).adjoint();
    circle_grid(n_grid)
        .map(|phi| linalg::max_abs_diff(&z(t + s, phi), &(z(t, phi) * z(s, phi - t))))
        .fold(0.0, f64::max)
}

/// `zeta_{2 pi}(phi) = zeta(phi) h zeta(phi)^{-1}`; the constant loop `h`
/// when `h` is central (asserted).
pub fn rotation_cocycle_2pi(zeta: &SolitonPath, n_grid: usize) -> Result<GridLoop> {
    let lp = zeta_t(zeta, 2.0 * PI, n_grid)?;
    if extendability(zeta).central {
        let constant = GridLoop::constant(zeta.tag, n_grid, &zeta.jump)?;
        let residual = lp.sup_distance(&constant);
        if residual > SOLITON_TOL {
            return Err(Error::Verification {
                what: "central jump gives a constant rotation cocycle".into(),
                residual,
                tolerance: SOLITON_TOL,
                at: None,
            });
        }
    }
    Ok(lp)
}

/// Pointwise product. Requires the left jump central or both paths
/// torus-valued, and verifies `jump(zeta eta) = jump(zeta) jump(eta)`.
pub fn compose(zeta: &SolitonPath, eta: &SolitonPath) -> Result<SolitonPath> {
    if zeta.tag != eta.tag {
        return Err(Error::Domain(format!("cannot compose {} with {}", zeta.tag, eta.tag)));
    }
    let allowed = extendability(zeta).central || (zeta.is_torus_valued() && eta.is_torus_valued());
    if !allowed {
        return Err(Error::Unsupported(
            "composition needs a central left jump or two torus-valued solitons".into(),
        ));
    }
    let mut factors = zeta.factors.clone();
    factors.extend(eta.factors.iter().cloned());
    let product = SolitonPath::new(zeta.tag, factors)?;
    check_jump(&product, &(&zeta.jump * &eta.jump), "jump(zeta eta) = jump(zeta) jump(eta)")?;
    Ok(product)
}

/// `x -> zeta(x)^{-1}`; same restriction as `compose`.
pub fn inverse(zeta: &SolitonPath) -> Result<SolitonPath> {
    if !(extendability(zeta).central || zeta.is_torus_valued()) {
        return Err(Error::Unsupported(
            "inversion needs a central jump or a torus-valued soliton".into(),
        ));
    }
    let factors = zeta.factors.iter().rev().map(SolitonFactor::negated).collect();
    let inv = SolitonPath::new(zeta.tag, factors)?;
    check_jump(&inv, &zeta.jump.adjoint(), "jump(zeta^-1) = jump(zeta)^-1")?;
    Ok(inv)
}

fn check_jump(path: &SolitonPath, expected: &CMatrix, what: &str) -> Result<()> {
    let residual = linalg::max_abs_diff(&path.jump, expected);
    if residual > SOLITON_TOL {
        return Err(Error::Verification {
            what: what.into(),
            residual,
            tolerance: SOLITON_TOL,
            at: None,
        });
    }
    Ok(())
}

/// `x -> g zeta(x) g^{-1}` for a constant unitary `g`.
pub fn conjugate(zeta: &SolitonPath, g: &CMatrix) -> Result<SolitonPath> {
    if g.shape() != (zeta.tag.0, zeta.tag.0) || linalg::unitarity_defect(g) > 1e-10 {
        return Err(Error::Domain("conjugator must be unitary of matching size".into()));
    }
    SolitonPath::new(zeta.tag, zeta.factors.iter().map(|f| f.conjugated(g)).collect())
}

/// The jump as an equivalence key within the diagonal torus family.
pub fn equivalence_key(zeta: &SolitonPath) -> Result<CMatrix> {
    if !zeta.is_torus_valued() {
        return Err(Error::Unsupported(
            "equivalence keys are defined for torus-valued solitons only".into(),
        ));
    }
    Ok(zeta.jump.clone())
}

/// Conjugacy invariants `tr(h^k)`, `k = 1..n`, which fix the characteristic
/// polynomial of a unitary `h`.
pub fn conjugacy_invariants(h: &CMatrix) -> Vec<Complex64> {
    let mut p = linalg::identity(h.nrows());
    (0..h.nrows())
        .map(|_| {
            p *= h;
            linalg::trace(&p)
        })
        .collect()
}

/// Whether two unitaries are conjugate, to `tol` in the power traces.
pub fn conjugacy_class_equal(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape()
        && conjugacy_invariants(a)
            .iter()
            .zip(conjugacy_invariants(b))
            .all(|(x, y)| (x - y).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_su, center_elements};
    use crate::linalg::I;

    fn diag(a: f64) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = I * a;
        m[(1, 1)] = -I * a;
        m
    }

    fn su2() -> AlgebraTag {
        AlgebraTag(2)
    }

    fn torus_loop(amp: f64) -> SolitonFactor {
        SolitonFactor::Periodic {
            generator: diag(1.0),
            profile: ScalarField::trigonometric(&[0.0, amp], &[0.0, 0.0, 0.3]),
        }
    }

    #[test]
    fn jump_examples() {
        let z = SolitonPath::linear(su2(), diag(0.5)).unwrap();
        assert!(linalg::max_abs_diff(&jump(&z).unwrap(), &(-linalg::identity(2))) < 1e-12);
        let q = SolitonPath::linear(su2(), diag(0.25)).unwrap();
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = I;
        h[(1, 1)] = -I;
        assert!(linalg::max_abs_diff(&jump(&q).unwrap(), &h) < 1e-12);
        let l = SolitonPath::new(su2(), vec![torus_loop(0.7)]).unwrap();
        assert!(linalg::max_abs_diff(&jump(&l).unwrap(), &linalg::identity(2)) < 1e-12);
    }

    #[test]
    fn x_dependent_jump_rejected() {
        let a = build_su(2).unwrap();
        let factors = vec![
            SolitonFactor::Linear { generator: diag(0.25) },
            SolitonFactor::Periodic {
                generator: a.element(0).matrix,
                profile: ScalarField::trigonometric(&[0.0, 1.0], &[]),
            },
        ];
        assert!(matches!(SolitonPath::new(su2(), factors), Err(Error::InvalidSoliton(_))));
    }

    #[test]
    fn verdicts() {
        let centers = center_elements(2).unwrap();
        let z = SolitonPath::linear(su2(), diag(0.5)).unwrap();
        let v = extendability(&z);
        assert!(v.central && v.extendable && v.center_index == Some(1));
        assert!(linalg::max_abs_diff(z.jump(), &centers[1]) < 1e-12);
        let q = extendability(&SolitonPath::linear(su2(), diag(0.25)).unwrap());
        assert!(!q.central && !q.extendable && q.center_index.is_none());
        let one = extendability(&SolitonPath::linear(su2(), diag(1.0)).unwrap());
        assert_eq!(one.center_index, Some(0));
    }

    #[test]
    fn zeta_t_examples() {
        let z = SolitonPath::linear(su2(), diag(0.25)).unwrap();
        let id = zeta_t(&z, 0.0, 64).unwrap();
        assert!(id.sup_distance(&GridLoop::identity(su2(), 64)) < 1e-14);
        let t = 0.8;
        let lt = zeta_t(&z, t, 64).unwrap();
        let expect = GridLoop::constant(su2(), 64, &linalg::exp_anti_hermitian(&(diag(0.25) * c(t, 0.0))).unwrap()).unwrap();
        assert!(lt.sup_distance(&expect) < 1e-12);
        let a = build_su(2).unwrap();
        let twisted = SolitonPath::new(
            su2(),
            vec![
                SolitonFactor::Periodic {
                    generator: a.element(0).matrix,
                    profile: ScalarField::trigonometric(&[0.2, 0.9], &[0.0, 0.4]),
                },
                SolitonFactor::Linear { generator: diag(0.25) },
            ],
        )
        .unwrap();
        for t in [-2.0, 0.3, 1.0, 4.0, 7.5] {
            zeta_t(&twisted, t, 32).unwrap();
            assert!(one_parameter_residual(&twisted, t, 0.7 - t / 3.0, 32) < 1e-10);
        }
    }

    #[test]
    fn rotation_cocycle_examples() {
        let z = SolitonPath::linear(su2(), diag(0.5)).unwrap();
        let r = rotation_cocycle_2pi(&z, 64).unwrap();
        let minus = GridLoop::constant(su2(), 64, &(-linalg::identity(2))).unwrap();
        assert!(r.sup_distance(&minus) < 1e-10);
        let l = SolitonPath::new(su2(), vec![torus_loop(0.4)]).unwrap();
        let r = rotation_cocycle_2pi(&l, 64).unwrap();
        assert!(r.sup_distance(&GridLoop::identity(su2(), 64)) < 1e-10);
        let a = build_su(2).unwrap();
        let twisted = SolitonPath::new(
            su2(),
            vec![
                SolitonFactor::Periodic {
                    generator: a.element(0).matrix,
                    profile: ScalarField::trigonometric(&[0.0, 1.0], &[]),
                },
                SolitonFactor::Linear { generator: diag(0.25) },
            ],
        )
        .unwrap();
        let r = rotation_cocycle_2pi(&twisted, 64).unwrap();
        assert!(r.constancy_defect() > 1e-3);
        for (j, g) in r.samples.iter().enumerate() {
            let phi = 2.0 * PI * j as f64 / 64.0;
            let zp = twisted.evaluate(phi);
            let expect = &zp * twisted.jump() * zp.adjoint();
            assert!(linalg::max_abs_diff(g, &expect) < 1e-12);
        }
    }

    #[test]
    fn composition() {
        let z = SolitonPath::linear(su2(), diag(0.25)).unwrap();
        let zz = compose(&z, &inverse(&z).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(zz.jump(), &linalg::identity(2)) < 1e-12);
        let w = SolitonPath::new(su2(), vec![SolitonFactor::Linear { generator: diag(0.125) }, torus_loop(0.3)]).unwrap();
        let zw = compose(&z, &w).unwrap();
        assert!(linalg::max_abs_diff(zw.jump(), &(z.jump() * w.jump())) < 1e-12);
        let a = build_su(2).unwrap();
        let wiggle = SolitonPath::new(
            su2(),
            vec![SolitonFactor::Periodic {
                generator: a.element(1).matrix,
                profile: ScalarField::trigonometric(&[0.1, 0.5], &[]),
            }],
        )
        .unwrap();
        let central = SolitonPath::linear(su2(), diag(0.5)).unwrap();
        let cw = compose(&central, &wiggle).unwrap();
        assert!(linalg::max_abs_diff(cw.jump(), central.jump()) < 1e-12);
        assert!(matches!(compose(&z, &wiggle), Err(Error::Unsupported(_))));
    }

    #[test]
    fn equivalence_keys() {
        let a = SolitonPath::linear(su2(), diag(0.25)).unwrap();
        let b = SolitonPath::linear(su2(), diag(0.125)).unwrap();
        let ka = equivalence_key(&a).unwrap();
        assert!(linalg::max_abs_diff(&ka, &equivalence_key(&b).unwrap()) > 0.1);
        let al = compose(&a, &SolitonPath::new(su2(), vec![torus_loop(0.6)]).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&ka, &equivalence_key(&al).unwrap()) < 1e-12);
        let alg = build_su(2).unwrap();
        let g = linalg::exp_anti_hermitian(&(alg.element(0).matrix * c(0.7, 0.0))).unwrap();
        let ag = conjugate(&a, &g).unwrap();
        assert!(matches!(equivalence_key(&ag), Err(Error::Unsupported(_))));
        assert!(linalg::max_abs_diff(ag.jump(), &(&g * &ka * g.adjoint())) < 1e-12);
        assert!(conjugacy_class_equal(ag.jump(), &ka, 1e-10));
        assert!(!conjugacy_class_equal(b.jump(), &ka, 1e-10));
    }
}
