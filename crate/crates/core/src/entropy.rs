//! Relative entropies of coherent loop-group states in the real-line picture.
//!
//! Paths are finite products `gamma(u) = prod_j exp(f_j(u) X_j)` with
//! profiles whose derivatives have compact support. The right current
//! `J = gamma' gamma^{-1}` is exact by the product rule and every entropy is
//! a weighted integral of `q = <J, J> <= 0`:
//!
//! * `S(t)    = -l/2 int_t^inf (u - t) q du`
//! * `Sbar(t) = -l/2 int_-inf^t (t - u) q du`
//! * `S_(-r,r) = -l/2 int_-r^r (r^2 - u^2)/(2r) q du`
//! * `E = -l/(4 pi) int q du`, with density `E(t) = S''(t) / 2 pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::lie::AlgebraTag;
use crate::linalg::{self, c, CMatrix};
use crate::loops::GridLoop;
use crate::quadrature;

/// Absolute target of every entropy quadrature.
pub const QUAD_TOL: f64 = 1e-10;

/// Gaussian derivative windows are cut at this many widths from the center.
pub const GAUSSIAN_SUPPORT_WIDTHS: f64 = 9.0;

/// `int_-1^1 (1 - s^2)^4 ds`.
const BUMP_MASS: f64 = 256.0 / 315.0;

/// Scalar profile `f` of one exponential factor, normalized so that
/// `f(+inf) = 0` for the base shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `f'(u) = a exp(-((u - c)/w)^2)`.
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// `f'(u) = a (1 - s^2)^4`, `s = (u - c)/r`, zero for `|s| > 1`.
    Bump { center: f64, half_width: f64, amplitude: f64 },
    /// `u -> s f(u)`.
    Scaled { profile: Box<Profile>, by: f64 },
    /// `u -> f(lambda u)`.
    Dilated { profile: Box<Profile>, lambda: f64 },
    /// `u -> f(max(u, lower))`.
    Clamped { profile: Box<Profile>, lower: f64 },
}

fn bump_primitive(s: f64) -> f64 {
    // int_-1^s (1 - x^2)^4 dx
    let s = s.clamp(-1.0, 1.0);
    let p = |x: f64| {
        let x2 = x * x;
        x * (1.0 + x2 * (-4.0 / 3.0 + x2 * (6.0 / 5.0 + x2 * (-4.0 / 7.0 + x2 / 9.0))))
    };
    p(s) - p(-1.0)
}

impl Profile {
    pub fn gaussian(center: f64, width: f64, amplitude: f64) -> Self {
        Profile::Gaussian {
            center,
            width,
            amplitude,
        }
    }

    pub fn bump(center: f64, half_width: f64, amplitude: f64) -> Self {
        Profile::Bump {
            center,
            half_width,
            amplitude,
        }
    }

    pub fn scaled(self, by: f64) -> Self {
        Profile::Scaled {
            profile: Box::new(self),
            by,
        }
    }

    pub fn dilated(self, lambda: f64) -> Self {
        Profile::Dilated {
            profile: Box::new(self),
            lambda,
        }
    }

    pub fn clamped(self, lower: f64) -> Self {
        Profile::Clamped {
            profile: Box::new(self),
            lower,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Gaussian {
                center,
                width,
                amplitude,
            } => center.is_finite() && amplitude.is_finite() && *width > 0.0 && width.is_finite(),
            Profile::Bump {
                center,
                half_width,
                amplitude,
            } => center.is_finite() && amplitude.is_finite() && *half_width > 0.0 && half_width.is_finite(),
            Profile::Scaled { profile, by } => return if by.is_finite() { profile.validate() } else { Err(bad()) },
            Profile::Dilated { profile, lambda } => {
                return if lambda.is_finite() && *lambda != 0.0 {
                    profile.validate()
                } else {
                    Err(bad())
                }
            }
            Profile::Clamped { profile, lower } => {
                return if lower.is_finite() { profile.validate() } else { Err(bad()) }
            }
        };
        if ok {
            Ok(())
        } else {
            Err(bad())
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        match self {
            Profile::Gaussian {
                center,
                width,
                amplitude,
            } => 0.5 * amplitude * width * PI.sqrt() * (erf((u - center) / width) - 1.0),
            Profile::Bump {
                center,
                half_width,
                amplitude,
            } => amplitude * half_width * (bump_primitive((u - center) / half_width) - BUMP_MASS),
            Profile::Scaled { profile, by } => by * profile.value(u),
            Profile::Dilated { profile, lambda } => profile.value(lambda * u),
            Profile::Clamped { profile, lower } => profile.value(u.max(*lower)),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Profile::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let s = (u - center) / width;
                if s.abs() > GAUSSIAN_SUPPORT_WIDTHS {
                    0.0
                } else {
                    amplitude * (-s * s).exp()
                }
            }
            Profile::Bump {
                center,
                half_width,
                amplitude,
            } => {
                let s = (u - center) / half_width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - s * s).powi(4)
                }
            }
            Profile::Scaled { profile, by } => by * profile.derivative(u),
            Profile::Dilated { profile, lambda } => lambda * profile.derivative(lambda * u),
            Profile::Clamped { profile, lower } => {
                if u < *lower {
                    0.0
                } else {
                    profile.derivative(u)
                }
            }
        }
    }

    /// Closed interval outside which `f'` vanishes, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Gaussian { center, width, .. } => Some((
                center - GAUSSIAN_SUPPORT_WIDTHS * width,
                center + GAUSSIAN_SUPPORT_WIDTHS * width,
            )),
            Profile::Bump {
                center, half_width, ..
            } => Some((center - half_width, center + half_width)),
            Profile::Scaled { profile, by } => {
                if *by == 0.0 {
                    None
                } else {
                    profile.support()
                }
            }
            Profile::Dilated { profile, lambda } => profile.support().map(|(a, b)| {
                let (x, y) = (a / lambda, b / lambda);
                (x.min(y), x.max(y))
            }),
            Profile::Clamped { profile, lower } => profile.support().and_then(|(a, b)| {
                if b <= *lower {
                    None
                } else {
                    Some((a.max(*lower), b))
                }
            }),
        }
    }

    /// Points where `f'` may fail to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.support().map(|(a, b)| vec![a, b]).unwrap_or_default();
        match self {
            Profile::Scaled { profile, .. } => out.extend(profile.breakpoints()),
            Profile::Dilated { profile, lambda } => {
                out.extend(profile.breakpoints().into_iter().map(|x| x / lambda))
            }
            Profile::Clamped { profile, lower } => {
                out.push(*lower);
                out.extend(profile.breakpoints());
            }
            _ => {}
        }
        out
    }

    /// `f(+inf)`.
    pub fn limit_plus(&self) -> f64 {
        self.limit(true)
    }

    /// `f(-inf)`.
    pub fn limit_minus(&self) -> f64 {
        self.limit(false)
    }

    fn limit(&self, plus: bool) -> f64 {
        match self {
            Profile::Gaussian { width, amplitude, .. } => {
                if plus {
                    0.0
                } else {
                    -amplitude * width * PI.sqrt()
                }
            }
            Profile::Bump {
                half_width,
                amplitude,
                ..
            } => {
                if plus {
                    0.0
                } else {
                    -amplitude * half_width * BUMP_MASS
                }
            }
            Profile::Scaled { profile, by } => by * profile.limit(plus),
            Profile::Dilated { profile, lambda } => profile.limit(plus == (*lambda > 0.0)),
            Profile::Clamped { profile, lower } => {
                if plus {
                    profile.limit(true)
                } else {
                    profile.value(*lower)
                }
            }
        }
    }
}

fn bad() -> Error {
    Error::Domain("profile parameters must be finite with positive widths and nonzero dilation".into())
}

/// One factor `exp(f(u) X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFactor {
    pub generator: CMatrix,
    pub profile: Profile,
}

/// `gamma(u) = prod_j exp(f_j(u) X_j) * tail`, where the constant `tail`
/// makes `gamma(+inf) = Id`; it does not change the right current.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePath {
    pub tag: AlgebraTag,
    pub factors: Vec<LineFactor>,
    pub level: f64,
    /// Absolute quadrature target, `QUAD_TOL` unless overridden.
    pub quad_tol: f64,
    tail: CMatrix,
}

impl LinePath {
    pub fn new(tag: AlgebraTag, factors: Vec<LineFactor>, level: f64) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::Domain("level must be positive".into()));
        }
        for f in &factors {
            if f.generator.shape() != (tag.0, tag.0) {
                return Err(Error::Domain("generator has the wrong size".into()));
            }
            if linalg::anti_hermitian_defect(&f.generator) > 1e-10
                || linalg::trace(&f.generator).norm() > 1e-10
            {
                return Err(Error::Domain("generators must lie in the real form".into()));
            }
            f.profile.validate()?;
        }
        let mut path = LinePath {
            tag,
            factors,
            level,
            quad_tol: QUAD_TOL,
            tail: linalg::identity(tag.0),
        };
        let mut at_inf = linalg::identity(tag.0);
        for f in &path.factors {
            at_inf *= linalg::exp_anti_hermitian(&(&f.generator * c(f.profile.limit_plus(), 0.0)))?;
        }
        path.tail = at_inf.adjoint();
        Ok(path)
    }

    pub fn with_tolerance(mut self, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol.is_finite()) {
            return Err(Error::Domain("quadrature target must be positive".into()));
        }
        self.quad_tol = quad_tol;
        Ok(self)
    }

    pub fn constant(tag: AlgebraTag, level: f64) -> Result<Self> {
        Self::new(tag, Vec::new(), level)
    }

    pub fn evaluate(&self, u: f64) -> CMatrix {
        let mut g = linalg::identity(self.tag.0);
        for f in &self.factors {
            g *= linalg::exp_anti_hermitian(&(&f.generator * c(f.profile.value(u), 0.0)))
                .expect("generators are anti-hermitian");
        }
        g * &self.tail
    }

    /// `J(u) = sum_j P_{j-1}(u) f_j'(u) X_j P_{j-1}(u)^{-1}`.
    pub fn right_current(&self, u: f64) -> CMatrix {
        let n = self.tag.0;
        let mut partial = linalg::identity(n);
        let mut j = CMatrix::zeros(n, n);
        for f in &self.factors {
            let d = f.profile.derivative(u);
            if d != 0.0 {
                j += &partial * (&f.generator * c(d, 0.0)) * partial.adjoint();
            }
            partial *= linalg::exp_anti_hermitian(&(&f.generator * c(f.profile.value(u), 0.0)))
                .expect("generators are anti-hermitian");
        }
        j
    }

    /// `q(u) = <J, J>`, nonpositive.
    pub fn current_square(&self, u: f64) -> f64 {
        let j = self.right_current(u);
        linalg::trace(&(&j * &j)).re
    }

    /// Union hull and breakpoints of all factor supports.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.factors
            .iter()
            .filter_map(|f| f.profile.support())
            .reduce(|(a, b), (x, y)| (a.min(x), b.max(y)))
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.factors.iter().flat_map(|f| f.profile.breakpoints()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `gamma(-u)`, renormalized at `+inf`.
    pub fn mirrored(&self) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .map(|f| LineFactor {
                generator: f.generator.clone(),
                profile: f.profile.clone().dilated(-1.0),
            })
            .collect();
        Self::new(self.tag, factors, self.level)?.with_tolerance(self.quad_tol)
    }

    /// `u -> g gamma(u)` for a constant `g = exp(Y)`.
    pub fn conjugated_by(&self, y: &CMatrix) -> Result<Self> {
        let g = linalg::exp_anti_hermitian(y)?;
        let factors = self
            .factors
            .iter()
            .map(|f| LineFactor {
                generator: &g * &f.generator * g.adjoint(),
                profile: f.profile.clone(),
            })
            .collect();
        Self::new(self.tag, factors, self.level)?.with_tolerance(self.quad_tol)
    }

    /// Weighted integral `int_a^b w(u) q(u) du` restricted to the support.
    fn weighted<W: Fn(f64) -> f64>(&self, a: f64, b: f64, w: W, tol: f64) -> Result<f64> {
        let Some((lo, hi)) = self.support() else {
            return Ok(0.0);
        };
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return Ok(0.0);
        }
        quadrature::integrate_piecewise(|u| w(u) * self.current_square(u), a, b, &self.breakpoints(), tol)
    }
}

/// `E(u) = -l/(4 pi) q(u)`.
pub fn energy_density(path: &LinePath, u: f64) -> f64 {
    -path.level / (4.0 * PI) * path.current_square(u)
}

/// `E = -l/(4 pi) int q du`.
pub fn total_energy(path: &LinePath) -> Result<f64> {
    let v = path.weighted(f64::NEG_INFINITY, f64::INFINITY, |_| 1.0, path.quad_tol)?;
    Ok(-path.level / (4.0 * PI) * v)
}

fn entropy_right_tol(path: &LinePath, t: f64, tol: f64) -> Result<f64> {
    let v = path.weighted(t, f64::INFINITY, |u| u - t, tol)?;
    Ok(-0.5 * path.level * v)
}

fn entropy_left_tol(path: &LinePath, t: f64, tol: f64) -> Result<f64> {
    let v = path.weighted(f64::NEG_INFINITY, t, |u| t - u, tol)?;
    Ok(-0.5 * path.level * v)
}

/// `S(t) = -l/2 int_t^inf (u - t) q du`.
pub fn entropy_right(path: &LinePath, t: f64) -> Result<f64> {
    entropy_right_tol(path, t, path.quad_tol)
}

/// `Sbar(t) = -l/2 int_-inf^t (t - u) q du`.
pub fn entropy_left(path: &LinePath, t: f64) -> Result<f64> {
    entropy_left_tol(path, t, path.quad_tol)
}

/// `S'(t) = l/2 int_t^inf q du`.
pub fn entropy_right_derivative(path: &LinePath, t: f64) -> Result<f64> {
    Ok(0.5 * path.level * path.weighted(t, f64::INFINITY, |_| 1.0, path.quad_tol)?)
}

/// `Sbar'(t) = -l/2 int_-inf^t q du`.
pub fn entropy_left_derivative(path: &LinePath, t: f64) -> Result<f64> {
    Ok(-0.5 * path.level * path.weighted(f64::NEG_INFINITY, t, |_| 1.0, path.quad_tol)?)
}

/// Entropy of the interval `(-r, r)`.
pub fn entropy_interval(path: &LinePath, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("interval radius {r} must be positive")));
    }
    let v = path.weighted(-r, r, |u| (r * r - u * u) / (2.0 * r), path.quad_tol)?;
    Ok(-0.5 * path.level * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BekensteinReport {
    pub s_interval: f64,
    pub pi_r_e: f64,
    pub holds: bool,
}

/// `S_(-r,r) <= pi r E`.
pub fn bekenstein_check(path: &LinePath, r: f64) -> Result<BekensteinReport> {
    let s_interval = entropy_interval(path, r)?;
    let pi_r_e = PI * r * total_energy(path)?;
    Ok(BekensteinReport {
        s_interval,
        pi_r_e,
        holds: s_interval <= pi_r_e + path.quad_tol,
    })
}

/// `(S(t1) - S(t2)) + (Sbar(t2) - Sbar(t1)) - (t2 - t1) 2 pi E`.
pub fn sum_rule_residual(path: &LinePath, t1: f64, t2: f64) -> Result<f64> {
    let lhs = entropy_right(path, t1)? - entropy_right(path, t2)? + entropy_left(path, t2)?
        - entropy_left(path, t1)?;
    Ok(lhs - (t2 - t1) * 2.0 * PI * total_energy(path)?)
}

/// Uniform `t`-grid and finite-difference spacing for a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_fd_step() -> f64 {
    1e-2
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, points: usize) -> Self {
        GridSpec {
            t_min,
            t_max,
            points,
            fd_step: default_fd_step(),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.t_min],
            p => (0..p)
                .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / (p - 1) as f64)
                .collect(),
        }
    }
}

/// Sampled entropy data on a `t`-grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub s_bar: Vec<f64>,
    pub s_prime: Vec<f64>,
    pub s_dd_analytic: Vec<f64>,
    pub s_dd_fd: Vec<f64>,
    pub density: Vec<f64>,
    pub total_energy: f64,
    pub fd_step: f64,
}

/// Tolerance on the sign and monotonicity invariants.
pub const PROFILE_TOL: f64 = 1e-8;

/// Relative tolerance between analytic and finite-difference `S''`.
pub const FD_REL_TOL: f64 = 1e-4;

impl EntropyProfile {
    /// Largest `|fd - analytic|` over the grid divided by the largest
    /// analytic value, and the worst `t`.
    pub fn fd_relative_error(&self) -> (f64, Option<f64>) {
        let scale = self.s_dd_analytic.iter().copied().fold(0.0, f64::max);
        let mut worst = (0.0, None);
        for ((&t, &a), &f) in self.t.iter().zip(&self.s_dd_analytic).zip(&self.s_dd_fd) {
            let d = (a - f).abs();
            if d > worst.0 {
                worst = (d, Some(t));
            }
        }
        if scale > 0.0 {
            (worst.0 / scale, worst.1)
        } else {
            worst
        }
    }

    /// Smallest raw second difference `S(t+h) - 2 S(t) + S(t-h)`.
    pub fn min_second_difference(&self) -> f64 {
        self.s_dd_fd
            .iter()
            .map(|v| v * self.fd_step * self.fd_step)
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks positivity, monotonicity, convexity and the analytic/finite
    /// difference agreement; returns the first violation.
    pub fn verify(&self) -> Result<()> {
        let fail = |what: &str, residual: f64, tolerance: f64, at: Option<f64>| {
            Err(Error::Verification {
                what: what.into(),
                residual,
                tolerance,
                at,
            })
        };
        for (i, &t) in self.t.iter().enumerate() {
            if self.s[i] < -PROFILE_TOL {
                return fail("S >= 0", -self.s[i], PROFILE_TOL, Some(t));
            }
            if self.s_bar[i] < -PROFILE_TOL {
                return fail("Sbar >= 0", -self.s_bar[i], PROFILE_TOL, Some(t));
            }
            if self.s_dd_analytic[i] < -PROFILE_TOL {
                return fail("S'' >= 0", -self.s_dd_analytic[i], PROFILE_TOL, Some(t));
            }
            let raw = self.s_dd_fd[i] * self.fd_step * self.fd_step;
            if raw < -PROFILE_TOL {
                return fail("second difference of S >= 0", -raw, PROFILE_TOL, Some(t));
            }
            let e = (self.s_dd_analytic[i] - 2.0 * PI * self.density[i]).abs();
            if e > PROFILE_TOL {
                return fail("S'' = 2 pi E(t)", e, PROFILE_TOL, Some(t));
            }
            if i > 0 {
                if self.s[i] > self.s[i - 1] + PROFILE_TOL {
                    return fail("S nonincreasing", self.s[i] - self.s[i - 1], PROFILE_TOL, Some(t));
                }
                if self.s_bar[i] < self.s_bar[i - 1] - PROFILE_TOL {
                    return fail("Sbar nondecreasing", self.s_bar[i - 1] - self.s_bar[i], PROFILE_TOL, Some(t));
                }
            }
        }
        let (rel, at) = self.fd_relative_error();
        if rel > FD_REL_TOL {
            return fail("analytic vs finite-difference S''", rel, FD_REL_TOL, at);
        }
        Ok(())
    }
}

/// Fills an `EntropyProfile` on the grid and verifies its invariants.
pub fn qnec_profile(path: &LinePath, spec: &GridSpec) -> Result<EntropyProfile> {
    let profile = qnec_profile_unchecked(path, spec)?;
    profile.verify()?;
    Ok(profile)
}

/// `qnec_profile` without the final verification.
pub fn qnec_profile_unchecked(path: &LinePath, spec: &GridSpec) -> Result<EntropyProfile> {
    let h = spec.fd_step;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain("finite-difference step must be positive".into()));
    }
    // tighter target so quadrature noise stays below the h^2 amplification
    let fine = path.quad_tol * 1e-3;
    let mut out = EntropyProfile {
        total_energy: total_energy(path)?,
        fd_step: h,
        ..Default::default()
    };
    for t in spec.grid() {
        let s0 = entropy_right_tol(path, t, fine)?;
        let sp = entropy_right_tol(path, t + h, fine)?;
        let sm = entropy_right_tol(path, t - h, fine)?;
        let density = energy_density(path, t);
        out.t.push(t);
        out.s.push(s0);
        out.s_bar.push(entropy_left(path, t)?);
        out.s_prime.push(entropy_right_derivative(path, t)?);
        out.s_dd_analytic.push(-0.5 * path.level * path.current_square(t));
        out.s_dd_fd.push((sp - 2.0 * s0 + sm) / (h * h));
        out.density.push(density);
    }
    Ok(out)
}

/// Loop-level Connes cocycle `u_t(u) = gamma_+(u) gamma_+(e^{2 pi t} u)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CocyclePath {
    /// `gamma_+`: the path on `[0, inf)`, identity on `(-inf, 0]`.
    pub base: LinePath,
    pub flow_time: f64,
    pub result: LinePath,
}

/// Tolerance for the splitting precondition at `u = 0`.
pub const SPLIT_TOL: f64 = 1e-8;

/// `gamma_+`, requiring `gamma(0) = Id` and `gamma'(0) = 0`.
pub fn half_line_factor(path: &LinePath) -> Result<LinePath> {
    let value = linalg::max_abs_diff(&path.evaluate(0.0), &linalg::identity(path.tag.0));
    let derivative = linalg::max_abs(&path.right_current(0.0));
    if value > SPLIT_TOL || derivative > SPLIT_TOL {
        return Err(Error::NotSplittable { value, derivative });
    }
    let factors = path
        .factors
        .iter()
        .map(|f| LineFactor {
            generator: f.generator.clone(),
            profile: f.profile.clone().clamped(0.0),
        })
        .collect();
    LinePath::new(path.tag, factors, path.level)?.with_tolerance(path.quad_tol)
}

pub fn connes_cocycle_path(path: &LinePath, t: f64) -> Result<CocyclePath> {
    let base = half_line_factor(path)?;
    let lambda = (2.0 * PI * t).exp();
    let mut factors = base.factors.clone();
    for f in base.factors.iter().rev() {
        factors.push(LineFactor {
            generator: f.generator.clone(),
            profile: f.profile.clone().dilated(lambda).scaled(-1.0),
        });
    }
    let result = LinePath::new(path.tag, factors, path.level)?.with_tolerance(path.quad_tol)?;
    Ok(CocyclePath {
        base,
        flow_time: t,
        result,
    })
}

/// `max_u |u_{t+s}(u) - u_t(u) u_s(e^{2 pi t} u)|` over the given points.
pub fn cocycle_chain_residual(path: &LinePath, t: f64, s: f64, points: &[f64]) -> Result<f64> {
    let ut = connes_cocycle_path(path, t)?.result;
    let us = connes_cocycle_path(path, s)?.result;
    let uts = connes_cocycle_path(path, t + s)?.result;
    let lambda = (2.0 * PI * t).exp();
    Ok(points
        .iter()
        .map(|&u| {
            let rhs = ut.evaluate(u) * us.evaluate(lambda * u);
            linalg::max_abs_diff(&uts.evaluate(u), &rhs)
        })
        .fold(0.0, f64::max))
}

/// Samples of a path on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledLinePath {
    pub tag: AlgebraTag,
    pub n_grid: usize,
    /// `(u, gamma(u))`, one entry per circle grid point other than `theta = pi`.
    pub samples: Vec<(f64, CMatrix)>,
}

/// Grid index of `theta = pi`.
fn pi_index(n: usize) -> usize {
    n / 2
}

/// `u = tan(theta / 2)`; the loop must be the identity at `theta = pi` and
/// its two grid neighbours.
pub fn cayley_transfer(lp: &GridLoop) -> Result<SampledLinePath> {
    let n = lp.len();
    let id = linalg::identity(lp.tag.0);
    let k = pi_index(n);
    for j in [k - 1, k, k + 1] {
        let d = linalg::max_abs_diff(&lp.samples[j], &id);
        if d > 1e-9 {
            return Err(Error::Domain(format!(
                "loop is not the identity near theta = pi (deviation {d:.3e})"
            )));
        }
    }
    let samples = lp
        .samples
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(j, g)| {
            let theta = 2.0 * PI * j as f64 / n as f64;
            let theta = if theta > PI { theta - 2.0 * PI } else { theta };
            ((theta / 2.0).tan(), g.clone())
        })
        .collect();
    Ok(SampledLinePath {
        tag: lp.tag,
        n_grid: n,
        samples,
    })
}

/// Inverse of `cayley_transfer`: `theta = 2 atan(u)`, identity at `theta = pi`.
pub fn cayley_inverse(path: &SampledLinePath) -> Result<GridLoop> {
    let n = path.n_grid;
    let mut samples = vec![linalg::identity(path.tag.0); n];
    for (u, g) in &path.samples {
        let theta = 2.0 * u.atan();
        let pos = theta.rem_euclid(2.0 * PI) * n as f64 / (2.0 * PI);
        let j = pos.round();
        if (pos - j).abs() > 1e-6 {
            return Err(Error::Domain(format!("u = {u} does not map to a grid point")));
        }
        samples[(j as usize) % n] = g.clone();
    }
    GridLoop::new(path.tag, samples)
}

/// Samples a line path on the circle grid through `u = tan(theta/2)`,
/// with `gamma(inf) = Id` at `theta = pi`.
pub fn line_to_circle(path: &LinePath, n_grid: usize) -> Result<GridLoop> {
    let k = pi_index(n_grid);
    GridLoop::new(
        path.tag,
        (0..n_grid)
            .map(|j| {
                if j == k {
                    linalg::identity(path.tag.0)
                } else {
                    let theta = 2.0 * PI * j as f64 / n_grid as f64;
                    path.evaluate((theta / 2.0).tan())
                }
            })
            .collect(),
    )
}
