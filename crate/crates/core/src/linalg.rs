//! Small dense complex linear-algebra helpers shared by the Lie, loop and
//! Fock modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Distance of `m` from the anti-hermitian matrices, `max |m + m^dagger|`.
pub fn anti_hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m + m.adjoint()))
}

/// Projection onto the anti-hermitian part, `(M - M^dagger)/2`.
pub fn anti_hermitian_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * c(0.5, 0.0)
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity(n)))
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    m.clone().determinant()
}

/// Matrix exponential of an anti-hermitian matrix through the spectral
/// decomposition of the hermitian matrix `-iX`. The result is unitary to
/// working precision.
pub fn exp_anti_hermitian(x: &CMatrix) -> Result<CMatrix> {
    if !is_finite(x) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    let n = x.nrows();
    if n == 0 {
        return Ok(x.clone());
    }
    let h = anti_hermitian_part(x) * (-I);
    // symmetrize against round-off before the eigensolver
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let phases = CVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
    );
    let vd = &v * CMatrix::from_diagonal(&phases);
    Ok(vd * v.adjoint())
}

/// General complex matrix exponential (scaling and squaring with Padé).
pub fn expm(x: &CMatrix) -> Result<CMatrix> {
    if !is_finite(x) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    Ok(x.exp())
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn vector_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
