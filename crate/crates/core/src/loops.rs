//! Loop-algebra and loop-group calculus on the circle.
//!
//! Algebra elements are exact Fourier data (`FourierLoopElement`,
//! `ScalarField`); group elements are samples on the uniform grid
//! `theta_j = 2 pi j / N` (`GridLoop`). Conversions go through pointwise
//! exponentials and the discrete Fourier transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, AlgebraTag};
use crate::linalg::{self, c, CMatrix, I};

/// Default number of grid points for group-valued loops.
pub const DEFAULT_GRID: usize = 256;

/// Tail Fourier mass above mode `N/4` tolerated before refusing to work.
pub const RESOLUTION_TAIL: f64 = 1e-10;

/// Matrix-valued Fourier data `k -> M_k`.
pub type MatrixFourier = BTreeMap<i64, CMatrix>;

/// Finite Fourier series `X(theta) = sum_k a_k e^{i k theta}` with values in
/// the complexified algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoopElement {
    pub coefficients: MatrixFourier,
    pub tag: AlgebraTag,
}

impl FourierLoopElement {
    pub fn zero(tag: AlgebraTag) -> Self {
        FourierLoopElement {
            coefficients: BTreeMap::new(),
            tag,
        }
    }

    pub fn from_modes(tag: AlgebraTag, modes: impl IntoIterator<Item = (i64, CMatrix)>) -> Self {
        let mut x = Self::zero(tag);
        for (k, m) in modes {
            x.add_mode(k, &m);
        }
        x
    }

    /// `a e^{i k theta}`, the element written `a(k)`.
    pub fn mode(a: &AlgebraElement, k: i64) -> Self {
        Self::from_modes(a.tag, [(k, a.matrix.clone())])
    }

    pub fn constant(a: &AlgebraElement) -> Self {
        Self::mode(a, 0)
    }

    /// Real-form loop `f(theta) X` for a real scalar field `f`.
    pub fn scalar_times(f: &ScalarField, x: &AlgebraElement) -> Self {
        Self::from_modes(
            x.tag,
            f.coefficients.iter().map(|(&k, &h)| (k, &x.matrix * h)),
        )
    }

    pub fn add_mode(&mut self, k: i64, m: &CMatrix) {
        let entry = self
            .coefficients
            .entry(k)
            .or_insert_with(|| CMatrix::zeros(m.nrows(), m.ncols()));
        *entry += m;
    }

    pub fn coefficient(&self, k: i64) -> Option<&CMatrix> {
        self.coefficients.get(&k)
    }

    fn coefficient_or_zero(&self, k: i64) -> CMatrix {
        self.coefficients
            .get(&k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.tag.0, self.tag.0))
    }

    /// Largest `|k|` with a stored coefficient.
    pub fn max_mode(&self) -> i64 {
        self.coefficients.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// `a_{-k} = -(a_k)^dagger` for every `k`, i.e. values in the real form.
    pub fn is_real_form(&self, tol: f64) -> bool {
        self.coefficients.iter().all(|(&k, a)| {
            let b = self.coefficient_or_zero(-k);
            linalg::max_abs_diff(&b, &(-a.adjoint())) <= tol
        })
    }

    /// Pointwise involution: `X*(theta) = X(theta)^dagger`, whose coefficient
    /// at `n` is `(a_{-n})^dagger`.
    pub fn star(&self) -> Self {
        FourierLoopElement {
            coefficients: self
                .coefficients
                .iter()
                .map(|(&k, a)| (-k, a.adjoint()))
                .collect(),
            tag: self.tag,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        FourierLoopElement {
            coefficients: self.coefficients.iter().map(|(&k, a)| (k, a * s)).collect(),
            tag: self.tag,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, a) in &other.coefficients {
            out.add_mode(k, a);
        }
        out
    }

    pub fn evaluate(&self, theta: f64) -> CMatrix {
        let n = self.tag.0;
        let mut m = CMatrix::zeros(n, n);
        for (&k, a) in &self.coefficients {
            m += a * Complex64::from_polar(1.0, k as f64 * theta);
        }
        m
    }

    pub fn derivative(&self) -> Self {
        FourierLoopElement {
            coefficients: self
                .coefficients
                .iter()
                .map(|(&k, a)| (k, a * (I * k as f64)))
                .collect(),
            tag: self.tag,
        }
    }

    /// Pointwise bracket `[X, Y](theta)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        same_tag(self.tag, other.tag)?;
        let mut out = Self::zero(self.tag);
        for (&j, a) in &self.coefficients {
            for (&k, b) in &other.coefficients {
                out.add_mode(j + k, &linalg::commutator(a, b));
            }
        }
        Ok(out)
    }

    /// Values at the `N` grid points.
    pub fn sample(&self, n_grid: usize) -> Vec<CMatrix> {
        grid(n_grid).map(|t| self.evaluate(t)).collect()
    }

    /// Removes coefficients with Frobenius norm at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        FourierLoopElement {
            coefficients: self
                .coefficients
                .iter()
                .filter(|(_, a)| linalg::frobenius(a) > tol)
                .map(|(&k, a)| (k, a.clone()))
                .collect(),
            tag: self.tag,
        }
    }
}

/// Scalar Fourier series `h(theta) = sum_k h_k e^{i k theta}`, read as the
/// vector field `h d/dtheta` or as a multiplier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalarField {
    pub coefficients: BTreeMap<i64, Complex64>,
}

impl ScalarField {
    pub fn from_modes(modes: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut h = ScalarField::default();
        for (k, v) in modes {
            *h.coefficients.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        h
    }

    pub fn constant(value: f64) -> Self {
        Self::from_modes([(0, c(value, 0.0))])
    }

    /// `e^{i k theta}`.
    pub fn exponential(k: i64) -> Self {
        Self::from_modes([(k, c(1.0, 0.0))])
    }

    /// Real field `sum_k (cos_k cos(k theta) + sin_k sin(k theta))` from
    /// coefficient lists starting at `k = 0` (`sin_0` is ignored).
    pub fn trigonometric(cos: &[f64], sin: &[f64]) -> Self {
        let mut h = ScalarField::default();
        for (k, &a) in cos.iter().enumerate() {
            if k == 0 {
                *h.coefficients.entry(0).or_default() += c(a, 0.0);
            } else {
                *h.coefficients.entry(k as i64).or_default() += c(a / 2.0, 0.0);
                *h.coefficients.entry(-(k as i64)).or_default() += c(a / 2.0, 0.0);
            }
        }
        for (k, &b) in sin.iter().enumerate().skip(1) {
            *h.coefficients.entry(k as i64).or_default() += c(0.0, -b / 2.0);
            *h.coefficients.entry(-(k as i64)).or_default() += c(0.0, b / 2.0);
        }
        h
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coefficients.iter().all(|(&k, &v)| {
            let w = self.coefficients.get(&-k).copied().unwrap_or_default();
            (w - v.conj()).norm() <= tol
        })
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(&k, &v)| v * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    pub fn derivative(&self) -> Self {
        ScalarField {
            coefficients: self
                .coefficients
                .iter()
                .map(|(&k, &v)| (k, v * I * k as f64))
                .collect(),
        }
    }

    pub fn is_constant_one(&self, tol: f64) -> bool {
        self.coefficients.iter().all(|(&k, &v)| {
            let target = if k == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            (v - target).norm() <= tol
        }) && self.coefficients.contains_key(&0)
    }
}

/// Weighted coefficient norms `|X|_{s,p} = (sum (1+|k|)^{sp} |a_k|^p)^{1/p}`.
pub trait SobolevNorm {
    fn weighted_coefficients(&self) -> Vec<(i64, f64)>;

    fn sobolev_norm(&self, s: f64, p: f64) -> Result<f64> {
        sobolev_from_coefficients(&self.weighted_coefficients(), s, p)
    }

    /// The single-index norm `|X|_t`, the `p = 1` case.
    fn sobolev_t(&self, t: f64) -> Result<f64> {
        self.sobolev_norm(t, 1.0)
    }
}

impl SobolevNorm for FourierLoopElement {
    fn weighted_coefficients(&self) -> Vec<(i64, f64)> {
        self.coefficients
            .iter()
            .map(|(&k, a)| (k, linalg::frobenius(a)))
            .collect()
    }
}

impl SobolevNorm for ScalarField {
    fn weighted_coefficients(&self) -> Vec<(i64, f64)> {
        self.coefficients.iter().map(|(&k, v)| (k, v.norm())).collect()
    }
}

fn sobolev_from_coefficients(coeffs: &[(i64, f64)], s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("Sobolev exponent p = {p} must lie in [1, inf)")));
    }
    let sum: f64 = coeffs
        .iter()
        .map(|&(k, a)| (1.0 + k.abs() as f64).powf(s * p) * a.powf(p))
        .sum();
    let norm = sum.powf(1.0 / p);
    if !norm.is_finite() {
        return Err(Error::Diverged(format!("|X|_{{{s},{p}}} is not finite")));
    }
    Ok(norm)
}

/// `sobolev_norm` as a free function over either carrier.
pub fn sobolev_norm<T: SobolevNorm>(x: &T, s: f64, p: f64) -> Result<f64> {
    x.sobolev_norm(s, p)
}

/// `h.X = h dX/dtheta`.
pub fn act_derivation(h: &ScalarField, x: &FourierLoopElement) -> FourierLoopElement {
    multiply_field(h, &x.derivative())
}

/// `hX`, coefficient convolution.
pub fn multiply_field(h: &ScalarField, x: &FourierLoopElement) -> FourierLoopElement {
    let mut out = FourierLoopElement::zero(x.tag);
    for (&j, &hj) in &h.coefficients {
        for (&k, a) in &x.coefficients {
            out.add_mode(j + k, &(a * hj));
        }
    }
    out
}

/// `B(X, Y) = int <X, dY/dtheta> dtheta / 2 pi = sum_k i k <a_{-k}, b_k>`.
pub fn central_term_b(x: &FourierLoopElement, y: &FourierLoopElement) -> Result<Complex64> {
    same_tag(x.tag, y.tag)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&k, b) in &y.coefficients {
        if k == 0 {
            continue;
        }
        if let Some(a) = x.coefficients.get(&-k) {
            acc += I * k as f64 * linalg::trace(&(a * b));
        }
    }
    Ok(acc)
}

fn same_tag(a: AlgebraTag, b: AlgebraTag) -> Result<()> {
    if a != b {
        return Err(Error::Domain(format!("algebra mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

/// Grid angles `2 pi j / N`.
pub fn grid_points(n: usize) -> Vec<f64> {
    grid(n).collect()
}

fn mode_of_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Normalized DFT of matrix samples: `M_k = (1/N) sum_j M(theta_j) e^{-i k theta_j}`
/// for `k` in `-N/2+1 ..= N/2`.
pub fn matrix_dft(samples: &[CMatrix]) -> MatrixFourier {
    let n = samples.len();
    if n == 0 {
        return BTreeMap::new();
    }
    let (r, cdim) = samples[0].shape();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut out: Vec<CMatrix> = vec![CMatrix::zeros(r, cdim); n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;
    for a in 0..r {
        for b in 0..cdim {
            for (slot, m) in buf.iter_mut().zip(samples) {
                *slot = m[(a, b)];
            }
            fft.process(&mut buf);
            for (j, v) in buf.iter().enumerate() {
                out[j][(a, b)] = v * scale;
            }
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(j, m)| (mode_of_index(j, n), m))
        .collect()
}

/// Frobenius mass of the coefficients with `|k| > n/4`.
fn tail_mass(coeffs: &MatrixFourier, n: usize) -> f64 {
    let cut = (n / 4) as i64;
    coeffs
        .iter()
        .filter(|(k, _)| k.abs() > cut)
        .map(|(_, m)| linalg::frobenius(m))
        .sum()
}

/// Group-valued loop sampled at `theta_j = 2 pi j / N`.
#[derive(Debug, Clone)]
pub struct GridLoop {
    pub samples: Vec<CMatrix>,
    pub tag: AlgebraTag,
}

impl GridLoop {
    /// Wraps samples after checking `N` is a power of two and each sample is
    /// special unitary to `1e-10`.
    pub fn new(tag: AlgebraTag, samples: Vec<CMatrix>) -> Result<Self> {
        let n = samples.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid size {n} must be a power of two >= 4"
            )));
        }
        for (j, g) in samples.iter().enumerate() {
            if g.shape() != (tag.0, tag.0) || !linalg::is_finite(g) {
                return Err(Error::Domain(format!("sample {j} has the wrong shape or is not finite")));
            }
            if linalg::unitarity_defect(g) > 1e-10
                || (linalg::determinant(g) - c(1.0, 0.0)).norm() > 1e-10
            {
                return Err(Error::Domain(format!("sample {j} is not special unitary")));
            }
        }
        Ok(GridLoop { samples, tag })
    }

    pub fn from_fn<F: Fn(f64) -> CMatrix>(tag: AlgebraTag, n_grid: usize, f: F) -> Result<Self> {
        Self::new(tag, grid(n_grid).map(f).collect())
    }

    pub fn identity(tag: AlgebraTag, n_grid: usize) -> Self {
        GridLoop {
            samples: vec![linalg::identity(tag.0); n_grid],
            tag,
        }
    }

    pub fn constant(tag: AlgebraTag, n_grid: usize, g: &CMatrix) -> Result<Self> {
        Self::new(tag, vec![g.clone(); n_grid])
    }

    /// Pointwise exponential `theta -> exp(X(theta))` of a real-form loop.
    pub fn exp(x: &FourierLoopElement, n_grid: usize) -> Result<Self> {
        if !x.is_real_form(1e-10) {
            return Err(Error::Domain("pointwise exponential needs a real-form loop".into()));
        }
        let samples = x
            .sample(n_grid)
            .iter()
            .map(linalg::exp_anti_hermitian)
            .collect::<Result<Vec<_>>>()?;
        Self::new(x.tag, samples)
    }

    /// `theta -> prod_j exp(f_j(theta) X_j)`, left to right.
    pub fn product_of_exponentials(
        tag: AlgebraTag,
        factors: &[(AlgebraElement, ScalarField)],
        n_grid: usize,
    ) -> Result<Self> {
        let mut out = Self::identity(tag, n_grid);
        for (x, f) in factors {
            let factor = Self::exp(&FourierLoopElement::scalar_times(f, x), n_grid)?;
            out = out.mul(&factor)?;
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_tag(self.tag, other.tag)?;
        if self.len() != other.len() {
            return Err(Error::Domain("grid sizes differ".into()));
        }
        Ok(GridLoop {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
            tag: self.tag,
        })
    }

    pub fn inverse(&self) -> Self {
        GridLoop {
            samples: self.samples.iter().map(|g| g.adjoint()).collect(),
            tag: self.tag,
        }
    }

    /// Largest entrywise deviation between two loops on the grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// Largest deviation from the sample at `theta = 0`.
    pub fn constancy_defect(&self) -> f64 {
        let g0 = &self.samples[0];
        self.samples
            .iter()
            .map(|g| linalg::max_abs_diff(g, g0))
            .fold(0.0, f64::max)
    }

    /// Matrix Fourier coefficients, refusing if the mass above `N/4`
    /// exceeds the resolution tolerance.
    pub fn fourier(&self) -> Result<MatrixFourier> {
        let coeffs = matrix_dft(&self.samples);
        check_resolution(&coeffs, self.len())?;
        Ok(coeffs)
    }

    /// Spectral derivative samples.
    pub fn derivative_samples(&self) -> Result<Vec<CMatrix>> {
        let coeffs = self.fourier()?;
        Ok(spectral_derivative(&coeffs, self.len()))
    }

    /// Trigonometric interpolant and its derivative at an arbitrary angle.
    pub fn interpolate(&self, theta: f64) -> Result<(CMatrix, CMatrix)> {
        let coeffs = self.fourier()?;
        let n = self.len() as i64;
        let d = self.tag.0;
        let mut value = CMatrix::zeros(d, d);
        let mut deriv = CMatrix::zeros(d, d);
        for (&k, m) in &coeffs {
            if 2 * k.abs() == n {
                continue;
            }
            let e = Complex64::from_polar(1.0, k as f64 * theta);
            value += m * e;
            deriv += m * (e * I * k as f64);
        }
        Ok((value, deriv))
    }
}

fn check_resolution(coeffs: &MatrixFourier, n: usize) -> Result<()> {
    let tail = tail_mass(coeffs, n);
    if tail > RESOLUTION_TAIL {
        return Err(Error::Resolution {
            tail,
            mode: n / 4,
            suggested: 2 * n,
        });
    }
    Ok(())
}

fn spectral_derivative(coeffs: &MatrixFourier, n: usize) -> Vec<CMatrix> {
    let (r, cdim) = coeffs.values().next().map(|m| m.shape()).unwrap_or((0, 0));
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    let mut out = vec![CMatrix::zeros(r, cdim); n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for a in 0..r {
        for b in 0..cdim {
            for (&k, m) in coeffs {
                let j = k.rem_euclid(n as i64) as usize;
                buf[j] = if 2 * k.unsigned_abs() as usize == n {
                    Complex64::new(0.0, 0.0)
                } else {
                    m[(a, b)] * I * k as f64
                };
            }
            ifft.process(&mut buf);
            for (j, v) in buf.iter().enumerate() {
                out[j][(a, b)] = *v;
            }
        }
    }
    out
}

/// Which Maurer-Cartan current to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `gamma^{-1} dgamma/dtheta`
    Left,
    /// `dgamma/dtheta gamma^{-1}`
    Right,
}

/// Pointwise Maurer-Cartan current on the grid, projected onto the
/// anti-hermitian part.
pub fn maurer_cartan_samples(gamma: &GridLoop, side: Side) -> Result<Vec<CMatrix>> {
    let deriv = gamma.derivative_samples()?;
    Ok(gamma
        .samples
        .iter()
        .zip(&deriv)
        .map(|(g, dg)| {
            let m = match side {
                Side::Left => g.adjoint() * dg,
                Side::Right => dg * g.adjoint(),
            };
            linalg::anti_hermitian_part(&m)
        })
        .collect())
}

/// Maurer-Cartan current as a real-form Fourier loop.
pub fn maurer_cartan(gamma: &GridLoop, side: Side) -> Result<FourierLoopElement> {
    let samples = maurer_cartan_samples(gamma, side)?;
    let n = gamma.len() as i64;
    let raw = matrix_dft(&samples);
    let mut x = FourierLoopElement::zero(gamma.tag);
    for (&k, m) in &raw {
        if 2 * k.abs() == n {
            continue;
        }
        // enforce a_{-k} = -a_k^dagger exactly
        let partner = raw.get(&-k).cloned().unwrap_or_else(|| m.clone());
        x.coefficients.insert(k, (m - partner.adjoint()) * c(0.5, 0.0));
    }
    debug_assert!(x.is_real_form(1e-12));
    Ok(x)
}

/// Pointwise adjoint action `theta -> gamma X gamma^{-1}` as Fourier data.
pub fn adjoint_action(gamma: &GridLoop, x: &FourierLoopElement) -> Result<FourierLoopElement> {
    same_tag(gamma.tag, x.tag)?;
    let xs = x.sample(gamma.len());
    let samples: Vec<CMatrix> = gamma
        .samples
        .iter()
        .zip(&xs)
        .map(|(g, a)| g * a * g.adjoint())
        .collect();
    let coeffs = matrix_dft(&samples);
    check_resolution(&coeffs, gamma.len())?;
    let n = gamma.len() as i64;
    Ok(FourierLoopElement {
        coefficients: coeffs.into_iter().filter(|(k, _)| 2 * k.abs() != n).collect(),
        tag: x.tag,
    })
}

/// `c(gamma, X) = -l int <gamma^{-1} dgamma, X> dtheta / 2 pi`, trapezoid
/// rule on the grid. Complex-valued since `X` may lie in the complexification.
pub fn cocycle_c(gamma: &GridLoop, x: &FourierLoopElement, level: f64) -> Result<Complex64> {
    same_tag(gamma.tag, x.tag)?;
    let m = maurer_cartan_samples(gamma, Side::Left)?;
    let xs = x.sample(gamma.len());
    let mean: Complex64 = m
        .iter()
        .zip(&xs)
        .map(|(a, b)| linalg::trace(&(a * b)))
        .sum::<Complex64>()
        / gamma.len() as f64;
    Ok(-mean * level)
}

/// `c(gamma, h) = -l/2 int h <gamma^{-1} dgamma, gamma^{-1} dgamma> dtheta / 2 pi`.
pub fn cocycle_c_field(gamma: &GridLoop, h: &ScalarField, level: f64) -> Result<f64> {
    if !h.is_real(1e-12) {
        return Err(Error::Domain("vector field must be real".into()));
    }
    let m = maurer_cartan_samples(gamma, Side::Left)?;
    let mean: f64 = m
        .iter()
        .zip(grid(gamma.len()))
        .map(|(a, t)| h.evaluate(t).re * linalg::trace(&(a * a)).re)
        .sum::<f64>()
        / gamma.len() as f64;
    Ok(-0.5 * level * mean)
}

/// `b(gamma, X) = c(gamma^{-1}, X)`.
pub fn cocycle_b(gamma: &GridLoop, x: &FourierLoopElement, level: f64) -> Result<Complex64> {
    cocycle_c(&gamma.inverse(), x, level)
}

/// `b(gamma, h) = c(gamma^{-1}, h)`.
pub fn cocycle_b_field(gamma: &GridLoop, h: &ScalarField, level: f64) -> Result<f64> {
    cocycle_c_field(&gamma.inverse(), h, level)
}

/// Factors of a loop cut at two points of the circle.
#[derive(Debug, Clone)]
pub struct SplitPair {
    /// Equals the loop on the arc from `z` to `w`, identity elsewhere.
    pub left: GridLoop,
    /// Equals the loop on the arc from `w` to `z`, identity elsewhere.
    pub right: GridLoop,
}

/// Position of `theta` along the counterclockwise arc starting at `from`.
fn arc_offset(theta: f64, from: f64) -> f64 {
    (theta - from).rem_euclid(2.0 * PI)
}

/// Splits `gamma = gamma_(z,w) gamma_(w,z)`; requires `gamma = Id` and
/// `dgamma = 0` at both cut points to `1e-8`.
pub fn split_loop(gamma: &GridLoop, z: f64, w: f64) -> Result<SplitPair> {
    let id = linalg::identity(gamma.tag.0);
    let mut value: f64 = 0.0;
    let mut derivative: f64 = 0.0;
    for p in [z, w] {
        let (v, d) = gamma.interpolate(p)?;
        value = value.max(linalg::max_abs_diff(&v, &id));
        derivative = derivative.max(linalg::max_abs(&d));
    }
    if value > 1e-8 || derivative > 1e-8 {
        return Err(Error::NotSplittable { value, derivative });
    }
    let arc = arc_offset(w, z);
    let mut left = Vec::with_capacity(gamma.len());
    let mut right = Vec::with_capacity(gamma.len());
    for (g, t) in gamma.samples.iter().zip(grid(gamma.len())) {
        let inside = arc_offset(t, z) < arc;
        if inside {
            left.push(g.clone());
            right.push(id.clone());
        } else {
            left.push(id.clone());
            right.push(g.clone());
        }
    }
    Ok(SplitPair {
        left: GridLoop {
            samples: left,
            tag: gamma.tag,
        },
        right: GridLoop {
            samples: right,
            tag: gamma.tag,
        },
    })
}

/// Closed-form exponential in the semidirect product with rotations, with
/// its numerical cross-check.
#[derive(Debug, Clone)]
pub struct SemidirectExp {
    /// `theta -> exp(t X_{alpha t}(theta))`, `X_s = R_s . X`.
    pub loop_part: GridLoop,
    /// Rotation amount `alpha t`.
    pub rotation: f64,
    /// Sup-distance between the closed form and the integrated flow.
    pub ode_residual: f64,
}

/// Time step of the fourth-order integrator used to cross-check the
/// semidirect exponential.
pub const SEMIDIRECT_DT: f64 = 1e-3;

/// Tolerance for the closed form against the integrated flow.
pub const SEMIDIRECT_TOL: f64 = 1e-6;

/// Flow of the vector field `alpha h` for time `-s`, by RK4 on the circle.
fn pull_back_point(theta: f64, h: &ScalarField, alpha: f64, s: f64) -> f64 {
    if alpha == 0.0 || s == 0.0 {
        return theta;
    }
    if h.is_constant_one(1e-14) {
        return theta - alpha * s;
    }
    let steps = ((s.abs() / 1e-3).ceil() as usize).max(1);
    let dt = -s / steps as f64;
    let v = |x: f64| alpha * h.evaluate(x).re;
    let mut x = theta;
    for _ in 0..steps {
        let k1 = v(x);
        let k2 = v(x + 0.5 * dt * k1);
        let k3 = v(x + 0.5 * dt * k2);
        let k4 = v(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

/// The closed form `theta -> exp(t X(Phi_{-alpha t}(theta)))` where `Phi` is
/// the flow of `h d/dtheta` (a rotation when `h = 1`).
pub fn semidirect_closed_form(
    x: &FourierLoopElement,
    alpha: f64,
    h: &ScalarField,
    t: f64,
    n_grid: usize,
) -> Result<GridLoop> {
    if !x.is_real_form(1e-10) {
        return Err(Error::Domain("generator must be a real-form loop".into()));
    }
    if !h.is_real(1e-12) {
        return Err(Error::Domain("vector field must be real".into()));
    }
    let samples = grid(n_grid)
        .map(|theta| {
            let shifted = pull_back_point(theta, h, alpha, t);
            linalg::exp_anti_hermitian(&(x.evaluate(shifted) * c(t, 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    GridLoop::new(x.tag, samples)
}

fn flow_rhs(x_samples: &[CMatrix], hv: &[f64], alpha: f64, g: &[CMatrix]) -> Vec<CMatrix> {
    let coeffs = matrix_dft(g);
    let dg = spectral_derivative(&coeffs, g.len());
    x_samples
        .iter()
        .zip(g)
        .zip(&dg)
        .zip(hv)
        .map(|(((xs, gi), dgi), &hi)| xs * gi - dgi * c(alpha * hi, 0.0))
        .collect()
}

/// Integrates `d_t gamma = X gamma - alpha h d_theta gamma`, `gamma^0 = Id`,
/// up to time `t` with the classical fourth-order Runge-Kutta scheme and
/// spectral differentiation in `theta`.
pub fn semidirect_ode(
    x: &FourierLoopElement,
    alpha: f64,
    h: &ScalarField,
    t: f64,
    n_grid: usize,
    dt: f64,
) -> Result<GridLoop> {
    let xs = x.sample(n_grid);
    let hv: Vec<f64> = grid(n_grid).map(|th| h.evaluate(th).re).collect();
    let steps = ((t.abs() / dt).round() as usize).max(1);
    let step = t / steps as f64;
    let mut g = GridLoop::identity(x.tag, n_grid).samples;
    let axpy = |g: &[CMatrix], k: &[CMatrix], a: f64| -> Vec<CMatrix> {
        g.iter().zip(k).map(|(gi, ki)| gi + ki * c(a, 0.0)).collect()
    };
    for _ in 0..steps {
        let k1 = flow_rhs(&xs, &hv, alpha, &g);
        let k2 = flow_rhs(&xs, &hv, alpha, &axpy(&g, &k1, 0.5 * step));
        let k3 = flow_rhs(&xs, &hv, alpha, &axpy(&g, &k2, 0.5 * step));
        let k4 = flow_rhs(&xs, &hv, alpha, &axpy(&g, &k3, step));
        for j in 0..n_grid {
            g[j] += (&k1[j] + &k2[j] * c(2.0, 0.0) + &k3[j] * c(2.0, 0.0) + &k4[j])
                * c(step / 6.0, 0.0);
        }
    }
    if g.iter().any(|m| !linalg::is_finite(m)) {
        return Err(Error::NonFinite("semidirect flow"));
    }
    Ok(GridLoop { samples: g, tag: x.tag })
}

/// Solution of the same flow along characteristics: for `h = 1`,
/// `gamma^t(theta)` is the ordered exponential of `X(theta - alpha t +
/// alpha tau)` over `tau in [0, t]`.
pub fn semidirect_flow(
    x: &FourierLoopElement,
    alpha: f64,
    t: f64,
    n_grid: usize,
) -> Result<GridLoop> {
    let steps = ((t.abs() / 1e-3).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let samples = grid(n_grid)
        .map(|theta| {
            let start = theta - alpha * t;
            let mut g = linalg::identity(x.tag.0);
            let field = |tau: f64| x.evaluate(start + alpha * tau);
            for s in 0..steps {
                let tau = s as f64 * dt;
                let a1 = field(tau);
                let a2 = field(tau + 0.5 * dt);
                let a3 = field(tau + dt);
                let k1 = &a1 * &g;
                let k2 = &a2 * (&g + &k1 * c(0.5 * dt, 0.0));
                let k3 = &a2 * (&g + &k2 * c(0.5 * dt, 0.0));
                let k4 = &a3 * (&g + &k3 * c(dt, 0.0));
                g += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
            }
            g
        })
        .collect();
    Ok(GridLoop {
        samples,
        tag: x.tag,
    })
}

/// The closed form together with its integrated cross-check; fails with the
/// residual when the two disagree by more than `SEMIDIRECT_TOL`.
pub fn semidirect_exp(
    x: &FourierLoopElement,
    alpha: f64,
    h: &ScalarField,
    t: f64,
    n_grid: usize,
) -> Result<SemidirectExp> {
    let report = semidirect_exp_report(x, alpha, h, t, n_grid)?;
    if report.ode_residual > SEMIDIRECT_TOL {
        return Err(Error::Verification {
            what: "semidirect exponential closed form vs flow".into(),
            residual: report.ode_residual,
            tolerance: SEMIDIRECT_TOL,
            at: Some(t),
        });
    }
    Ok(report)
}

/// Like `semidirect_exp` but returns the residual instead of failing.
pub fn semidirect_exp_report(
    x: &FourierLoopElement,
    alpha: f64,
    h: &ScalarField,
    t: f64,
    n_grid: usize,
) -> Result<SemidirectExp> {
    let loop_part = semidirect_closed_form(x, alpha, h, t, n_grid)?;
    let ode = semidirect_ode(x, alpha, h, t, n_grid, SEMIDIRECT_DT)?;
    Ok(SemidirectExp {
        ode_residual: loop_part.sup_distance(&ode),
        loop_part,
        rotation: alpha * t,
    })
}

/// Both sides of `|f_{n,k+n}(eps)|^2 (1+k+n) <= 2 (1+|n|)^2` with
/// `f_{n,j}(eps) = e^{-eps j} - e^{-eps (j-n)}`.
pub fn kernel_bound_sides(eps: f64, n: i64, k: i64) -> (f64, f64) {
    let j = (k + n) as f64;
    let f = (-eps * j).exp() - (-eps * (j - n as f64)).exp();
    let lhs = f * f * (1.0 + j);
    let rhs = 2.0 * (1.0 + n.abs() as f64).powi(2);
    (lhs, rhs)
}

pub fn kernel_bound_check(eps: f64, n: i64, k: i64) -> bool {
    let (lhs, rhs) = kernel_bound_sides(eps, n, k);
    lhs <= rhs
}
