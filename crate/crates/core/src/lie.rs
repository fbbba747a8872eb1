//! Compact simple Lie algebras in matrix form.
//!
//! Only the unitary series `su(n)` is built explicitly: an orthonormal
//! anti-hermitian basis for the form `-trace(XY)`, its structure constants
//! and the dual Coxeter number read off the adjoint Casimir. The other simple
//! types are carried as table records (dimension and dual Coxeter number) for
//! the closed-form central charge computations.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, I};

/// Identifies the algebra an element belongs to. For `su(n)` this is `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraTag(pub usize);

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "su{}", self.0)
    }
}

/// `su(n)` with an orthonormal basis `x_i` for `-<X, Y>`, where the basic
/// inner product is the trace form `<X, Y> = trace(XY)` of the defining
/// representation. The dual basis is `x^i = -x_i`.
#[derive(Debug, Clone)]
pub struct CompactSimpleAlgebra {
    rank_parameter: usize,
    basis: Vec<CMatrix>,
    /// `structure[h + dim * (j + dim * i)] = c^h_{ij}` with `[x_i, x_j] = c^h_{ij} x_h`.
    structure: Vec<f64>,
    dual_coxeter: usize,
}

impl CompactSimpleAlgebra {
    pub fn tag(&self) -> AlgebraTag {
        AlgebraTag(self.rank_parameter)
    }

    /// `n` for `su(n)`.
    pub fn n(&self) -> usize {
        self.rank_parameter
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn rank(&self) -> usize {
        self.rank_parameter - 1
    }

    pub fn dual_coxeter(&self) -> usize {
        self.dual_coxeter
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Basis element `x_i` as an algebra element of the real form.
    pub fn element(&self, i: usize) -> AlgebraElement {
        AlgebraElement {
            matrix: self.basis[i].clone(),
            tag: self.tag(),
        }
    }

    /// Dual basis element `x^i = -x_i`.
    pub fn dual_element(&self, i: usize) -> AlgebraElement {
        AlgebraElement {
            matrix: -self.basis[i].clone(),
            tag: self.tag(),
        }
    }

    /// `c^h_{ij}`.
    pub fn structure_constant(&self, h: usize, i: usize, j: usize) -> f64 {
        let d = self.dimension();
        self.structure[h + d * (j + d * i)]
    }

    /// Wraps a matrix as an element of the complexified algebra, checking
    /// only shape and tracelessness.
    pub fn wrap(&self, matrix: CMatrix) -> Result<AlgebraElement> {
        let n = self.rank_parameter;
        if matrix.shape() != (n, n) {
            return Err(Error::Domain(format!(
                "expected a {n}x{n} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if linalg::trace(&matrix).norm() > 1e-10 {
            return Err(Error::Domain("element of sl(n) must be traceless".into()));
        }
        Ok(AlgebraElement {
            matrix,
            tag: self.tag(),
        })
    }

    /// Wraps a matrix that must lie in the compact real form.
    pub fn wrap_real(&self, matrix: CMatrix) -> Result<AlgebraElement> {
        let el = self.wrap(matrix)?;
        if !el.is_real_form(1e-10) {
            return Err(Error::Domain("element is not anti-hermitian".into()));
        }
        Ok(el)
    }

    /// Real-form element `sum_i coeffs[i] x_i`.
    pub fn combination(&self, coeffs: &[f64]) -> AlgebraElement {
        let n = self.rank_parameter;
        let mut m = CMatrix::zeros(n, n);
        for (x, &a) in self.basis.iter().zip(coeffs) {
            m += x * c(a, 0.0);
        }
        AlgebraElement {
            matrix: m,
            tag: self.tag(),
        }
    }

    /// Coordinates of a real-form element in the orthonormal basis.
    pub fn coordinates(&self, x: &AlgebraElement) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| -linalg::trace(&(b * &x.matrix)).re)
            .collect()
    }

    /// `sum_i [x_i, [x^i, Y]]`; equals `2 g Y`.
    pub fn casimir_action(&self, y: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(y.nrows(), y.ncols());
        for x in &self.basis {
            let inner = linalg::commutator(&(-x), y);
            acc += linalg::commutator(x, &inner);
        }
        acc
    }
}

/// An element of the complexified algebra, tagged with its algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub matrix: CMatrix,
    pub tag: AlgebraTag,
}

impl AlgebraElement {
    pub fn zero(tag: AlgebraTag) -> Self {
        AlgebraElement {
            matrix: CMatrix::zeros(tag.0, tag.0),
            tag,
        }
    }

    /// `X^dagger = -X`, i.e. the element lies in the compact real form.
    pub fn is_real_form(&self, tol: f64) -> bool {
        linalg::anti_hermitian_defect(&self.matrix) <= tol
    }

    /// The antilinear involution `X -> X*`; the real form is its `-1`
    /// eigenspace.
    pub fn star(&self) -> Self {
        AlgebraElement {
            matrix: self.matrix.adjoint(),
            tag: self.tag,
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        AlgebraElement {
            matrix: &self.matrix * a,
            tag: self.tag,
        }
    }
}

fn same_tag(x: &AlgebraElement, y: &AlgebraElement) -> Result<()> {
    if x.tag != y.tag {
        return Err(Error::Domain(format!(
            "algebra mismatch: {} vs {}",
            x.tag, y.tag
        )));
    }
    Ok(())
}

/// Builds `su(n)` with a generalized Gell-Mann basis normalized so that
/// `-trace(x_i x_j) = delta_ij`.
pub fn build_su(n: usize) -> Result<CompactSimpleAlgebra> {
    if n < 2 {
        return Err(Error::InvalidRank(n));
    }
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut basis = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(j, k)] = I * inv_sqrt2;
            sym[(k, j)] = I * inv_sqrt2;
            basis.push(sym);
            let mut anti = CMatrix::zeros(n, n);
            anti[(j, k)] = c(inv_sqrt2, 0.0);
            anti[(k, j)] = c(-inv_sqrt2, 0.0);
            basis.push(anti);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * inv_sqrt2;
        let mut d = CMatrix::zeros(n, n);
        for j in 0..l {
            d[(j, j)] = I * norm;
        }
        d[(l, l)] = I * (-(l as f64) * norm);
        basis.push(d);
    }

    let dim = basis.len();
    let mut structure = vec![0.0; dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let br = linalg::commutator(&basis[i], &basis[j]);
            for h in 0..dim {
                structure[h + dim * (j + dim * i)] = -linalg::trace(&(&br * &basis[h])).re;
            }
        }
    }

    let mut alg = CompactSimpleAlgebra {
        rank_parameter: n,
        basis,
        structure,
        dual_coxeter: 0,
    };
    // g is half the adjoint Casimir eigenvalue; read it off a basis element
    let y = alg.basis[0].clone();
    let cas = alg.casimir_action(&y);
    let ratio = linalg::trace(&(&cas * &y)).re / linalg::trace(&(&y * &y)).re;
    alg.dual_coxeter = (ratio / 2.0).round() as usize;
    Ok(alg)
}

/// Basic inner product `<X, Y> = trace(XY)`.
pub fn basic_form(x: &AlgebraElement, y: &AlgebraElement) -> Result<Complex64> {
    same_tag(x, y)?;
    Ok(linalg::trace(&(&x.matrix * &y.matrix)))
}

pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    same_tag(x, y)?;
    Ok(AlgebraElement {
        matrix: linalg::commutator(&x.matrix, &y.matrix),
        tag: x.tag,
    })
}

/// The center of `SU(n)`: `exp(2 pi i k / n) Id`, `k = 0..n-1`.
pub fn center_elements(n: usize) -> Result<Vec<CMatrix>> {
    if n < 2 {
        return Err(Error::InvalidRank(n));
    }
    Ok((0..n)
        .map(|k| {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            CMatrix::identity(n, n) * phase
        })
        .collect())
}

/// Index `k` with `h = exp(2 pi i k/n) Id` within `tol`, if `h` is central.
pub fn center_index(h: &CMatrix, tol: f64) -> Option<usize> {
    let n = h.nrows();
    center_elements(n)
        .ok()?
        .iter()
        .position(|z| linalg::max_abs_diff(z, h) <= tol)
}

/// Pointwise group exponential of a real-form element.
pub fn group_exp(x: &AlgebraElement) -> Result<CMatrix> {
    if !linalg::is_finite(&x.matrix) {
        return Err(Error::NonFinite("group_exp argument"));
    }
    if !x.is_real_form(1e-10) {
        return Err(Error::Domain("group_exp needs a real-form element".into()));
    }
    linalg::exp_anti_hermitian(&x.matrix)
}

/// Dynkin families of the complex simple Lie algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E6,
    E7,
    E8,
    F4,
    G2,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::A,
        Family::B,
        Family::C,
        Family::D,
        Family::E6,
        Family::E7,
        Family::E8,
        Family::F4,
        Family::G2,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleTypeRecord {
    pub family: Family,
    pub rank: usize,
    pub complex_dimension: usize,
    pub dual_coxeter: usize,
}

impl SimpleTypeRecord {
    /// Table row for `family` at `rank`, `None` where the family is not
    /// defined (A needs rank >= 1, B >= 2, C >= 3, D >= 4; exceptional
    /// types have fixed rank).
    pub fn lookup(family: Family, rank: usize) -> Option<SimpleTypeRecord> {
        let n = rank;
        let (dim, g) = match family {
            Family::A if n >= 1 => (n * n + 2 * n, n + 1),
            Family::B if n >= 2 => (2 * n * n + n, 2 * n - 1),
            Family::C if n >= 3 => (2 * n * n + n, n + 1),
            Family::D if n >= 4 => (2 * n * n - n, 2 * n - 2),
            Family::E6 if n == 6 => (78, 12),
            Family::E7 if n == 7 => (133, 18),
            Family::E8 if n == 8 => (248, 30),
            Family::F4 if n == 4 => (52, 9),
            Family::G2 if n == 2 => (14, 4),
            _ => return None,
        };
        Some(SimpleTypeRecord {
            family,
            rank,
            complex_dimension: dim,
            dual_coxeter: g,
        })
    }

    pub fn su(n: usize) -> Option<SimpleTypeRecord> {
        n.checked_sub(1).and_then(|r| Self::lookup(Family::A, r))
    }
}

/// Every defined table row with rank in `1..=max_rank`.
pub fn simple_type_table(max_rank: usize) -> Vec<SimpleTypeRecord> {
    Family::ALL
        .iter()
        .flat_map(|&f| (1..=max_rank).filter_map(move |r| SimpleTypeRecord::lookup(f, r)))
        .collect()
}
