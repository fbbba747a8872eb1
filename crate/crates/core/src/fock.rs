//! Truncated level-one fermionic Fock space for `LSU(n)`.
//!
//! One-particle space: `L^2(S^1, C^n)` with modes `e_{k,alpha}`, site index
//! `k n + alpha`. The Dirac sea fills every site with `k < 0`. A state is the
//! sorted set of sites flipped relative to the sea: nonnegative entries are
//! particles, negative entries are holes. Energy is `sum k` over particles
//! plus `sum -k` over holes; charge is `#particles - #holes`.
//!
//! The current `x(m)` is the image of `X e^{i m theta}`; it lowers energy by
//! `m`, so `[d, x(m)] = -m x(m)`.
//!
//! Operators are stored column-sparse. Every operator carries a protected
//! energy: columns whose state energy is at most that value agree exactly
//! with the untruncated operator. Identity checks only read those columns.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraElement, CompactSimpleAlgebra};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::loops::{FourierLoopElement, MatrixFourier};

/// Default cap on the number of basis states.
pub const DEFAULT_DIM_LIMIT: usize = 20_000;

/// Dimension cap, overridable through `LOOPNET_DIM_LIMIT`.
pub fn dimension_limit() -> usize {
    std::env::var("LOOPNET_DIM_LIMIT")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_LIMIT)
}

/// Number of states with energy `<= cutoff`, optionally restricted to the
/// given charges, from the generating function
/// `prod_{k>=0} (1 + z q^k)^n prod_{k>=1} (1 + z^-1 q^k)^n`.
pub fn estimate_dimension(n: usize, cutoff: i64, charges: Option<&[i64]>) -> u128 {
    let cutoff = cutoff.max(0);
    let mut poly: HashMap<(i64, i64), u128> = HashMap::from([((0, 0), 1)]);
    let mut factor = |cost: i64, dz: i64| {
        let mut next = poly.clone();
        for (&(e, q), &v) in &poly {
            if e + cost <= cutoff {
                let slot = next.entry((e + cost, q + dz)).or_insert(0);
                *slot = slot.saturating_add(v);
            }
        }
        poly = next;
    };
    for k in 0..=cutoff {
        for _ in 0..n {
            factor(k, 1);
            if k >= 1 {
                factor(k, -1);
            }
        }
    }
    poly.iter()
        .filter(|((_, q), _)| charges.is_none_or(|cs| cs.contains(q)))
        .map(|(_, &v)| v)
        .fold(0u128, u128::saturating_add)
}

/// Block of basis states sharing energy and charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub energy: i64,
    pub charge: i64,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    n: usize,
    cutoff: i64,
    charges: Option<Vec<i64>>,
    states: Vec<Vec<i64>>,
    energy: Vec<i64>,
    charge: Vec<i64>,
    index: HashMap<Vec<i64>, usize>,
    sectors: Vec<Sector>,
}

/// All states of energy `<= cutoff`.
pub fn build_fock(n: usize, cutoff: i64) -> Result<TruncatedFockSpace> {
    TruncatedFockSpace::new(n, cutoff, None)
}

/// States of energy `<= cutoff` whose charge lies in `charges`.
pub fn build_fock_sectors(n: usize, cutoff: i64, charges: &[i64]) -> Result<TruncatedFockSpace> {
    TruncatedFockSpace::new(n, cutoff, Some(charges.to_vec()))
}

impl TruncatedFockSpace {
    pub fn new(n: usize, cutoff: i64, charges: Option<Vec<i64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRank(n));
        }
        if cutoff < 0 {
            return Err(Error::Domain(format!("cutoff {cutoff} must be nonnegative")));
        }
        let limit = dimension_limit();
        let estimate = estimate_dimension(n, cutoff, charges.as_deref());
        if estimate > limit as u128 {
            return Err(Error::Capacity {
                estimate: usize::try_from(estimate).unwrap_or(usize::MAX),
                limit,
            });
        }

        // sites sorted by energy cost; holes carry their negative index
        let ni = n as i64;
        let mut sites: Vec<(i64, i64)> = Vec::new();
        for k in 0..=cutoff {
            for a in 0..ni {
                sites.push((k, k * ni + a));
                if k >= 1 {
                    sites.push((k, -k * ni + a));
                }
            }
        }
        sites.sort();
        let mut raw: Vec<(i64, i64, Vec<i64>)> = Vec::new();
        let mut current = Vec::new();
        enumerate(&sites, 0, cutoff, 0, &mut current, &mut |set, e| {
            let q = set.iter().map(|&s| if s >= 0 { 1 } else { -1 }).sum::<i64>();
            if charges.as_ref().is_none_or(|cs| cs.contains(&q)) {
                let mut v = set.to_vec();
                v.sort_unstable();
                raw.push((e, q, v));
            }
        });
        raw.sort();

        let mut space = TruncatedFockSpace {
            n,
            cutoff,
            charges,
            states: Vec::with_capacity(raw.len()),
            energy: Vec::with_capacity(raw.len()),
            charge: Vec::with_capacity(raw.len()),
            index: HashMap::with_capacity(raw.len()),
            sectors: Vec::new(),
        };
        for (i, (e, q, s)) in raw.into_iter().enumerate() {
            match space.sectors.last_mut() {
                Some(sec) if sec.energy == e && sec.charge == q => sec.len += 1,
                _ => space.sectors.push(Sector {
                    energy: e,
                    charge: q,
                    start: i,
                    len: 1,
                }),
            }
            space.index.insert(s.clone(), i);
            space.states.push(s);
            space.energy.push(e);
            space.charge.push(q);
        }
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn charges(&self) -> Option<&[i64]> {
        self.charges.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn state(&self, i: usize) -> &[i64] {
        &self.states[i]
    }

    pub fn energy(&self, i: usize) -> i64 {
        self.energy[i]
    }

    pub fn charge(&self, i: usize) -> i64 {
        self.charge[i]
    }

    pub fn find(&self, state: &[i64]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of the Dirac-sea vacuum, if charge 0 is present.
    pub fn vacuum(&self) -> Option<usize> {
        self.find(&[])
    }

    /// Site index of mode `k`, color `alpha`.
    pub fn site(&self, k: i64, alpha: usize) -> i64 {
        k * self.n as i64 + alpha as i64
    }

    /// Indices of states with energy at most `e`.
    pub fn states_up_to(&self, e: i64) -> std::ops::Range<usize> {
        0..self.energy.partition_point(|&x| x <= e)
    }

    fn color(&self, site: i64) -> usize {
        site.rem_euclid(self.n as i64) as usize
    }

    fn mode(&self, site: i64) -> i64 {
        site.div_euclid(self.n as i64)
    }
}

fn enumerate(
    sites: &[(i64, i64)],
    from: usize,
    budget: i64,
    spent: i64,
    current: &mut Vec<i64>,
    emit: &mut dyn FnMut(&[i64], i64),
) {
    emit(current, spent);
    for i in from..sites.len() {
        let (cost, s) = sites[i];
        if cost > budget {
            break;
        }
        current.push(s);
        enumerate(sites, i + 1, budget - cost, spent + cost, current, emit);
        current.pop();
    }
}

fn is_occupied(state: &[i64], site: i64) -> bool {
    let flipped = state.binary_search(&site).is_ok();
    if site >= 0 {
        flipped
    } else {
        !flipped
    }
}

/// Number of occupied sites strictly between `a` and `b`.
fn occupied_between(state: &[i64], a: i64, b: i64) -> i64 {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let lo = state.partition_point(|&s| s <= a);
    let hi = state.partition_point(|&s| s < b);
    let mut particles = 0;
    let mut holes = 0;
    for &s in &state[lo..hi] {
        if s >= 0 {
            particles += 1;
        } else {
            holes += 1;
        }
    }
    let sea = ((b - 1).min(-1) - a).max(0);
    particles + sea - holes
}

/// `c^dagger_p c_q |state>` for `p != q`: the new state and the sign.
fn hop(state: &[i64], p: i64, q: i64) -> Option<(Vec<i64>, f64)> {
    if !is_occupied(state, q) || is_occupied(state, p) {
        return None;
    }
    let sign = if occupied_between(state, p, q) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let mut next = state.to_vec();
    for s in [p, q] {
        match next.binary_search(&s) {
            Ok(i) => {
                next.remove(i);
            }
            Err(i) => next.insert(i, s),
        }
    }
    Some((next, sign))
}

/// Column-sparse operator on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    dim: usize,
    columns: Vec<Vec<(usize, Complex64)>>,
    /// Columns of states with energy at most this value are exact.
    pub protected_energy: i64,
    /// Largest energy increase produced by the operator (negative if it
    /// strictly lowers energy).
    pub max_raise: i64,
}

impl FockOperator {
    pub fn zero(space: &TruncatedFockSpace) -> Self {
        FockOperator {
            dim: space.dim(),
            columns: vec![Vec::new(); space.dim()],
            protected_energy: i64::MAX,
            max_raise: i64::MIN,
        }
    }

    pub fn identity(space: &TruncatedFockSpace) -> Self {
        Self::diagonal(space, |_| c(1.0, 0.0))
    }

    pub fn diagonal<F: Fn(usize) -> Complex64>(space: &TruncatedFockSpace, f: F) -> Self {
        FockOperator {
            dim: space.dim(),
            columns: (0..space.dim())
                .map(|i| {
                    let v = f(i);
                    if v == c(0.0, 0.0) {
                        Vec::new()
                    } else {
                        vec![(i, v)]
                    }
                })
                .collect(),
            protected_energy: space.cutoff(),
            max_raise: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> &[(usize, Complex64)] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let col = &self.columns[j];
        match col.binary_search_by_key(&i, |&(r, _)| r) {
            Ok(k) => col[k].1,
            Err(_) => c(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        FockOperator {
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|&(i, v)| (i, v * s)).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Self {
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| merge(a, b, s))
            .collect();
        FockOperator {
            dim: self.dim,
            columns,
            protected_energy: self.protected_energy.min(other.protected_energy),
            max_raise: self.max_raise.max(other.max_raise),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, c(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, c(-1.0, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = vec![c(0.0, 0.0); self.dim];
        let mut mark = vec![false; self.dim];
        let mut touched = Vec::new();
        let columns = other
            .columns
            .iter()
            .map(|col| {
                for &(k, b) in col {
                    for &(i, a) in &self.columns[k] {
                        if !mark[i] {
                            mark[i] = true;
                            touched.push(i);
                        }
                        acc[i] += a * b;
                    }
                }
                touched.sort_unstable();
                let out: Vec<(usize, Complex64)> = touched
                    .iter()
                    .filter_map(|&i| {
                        let v = acc[i];
                        acc[i] = c(0.0, 0.0);
                        mark[i] = false;
                        (v != c(0.0, 0.0)).then_some((i, v))
                    })
                    .collect();
                touched.clear();
                out
            })
            .collect();
        let protected_energy = if self.protected_energy == i64::MAX {
            other.protected_energy
        } else {
            other
                .protected_energy
                .min(self.protected_energy.saturating_sub(other.max_raise.max(-i64::MAX / 2)))
        };
        FockOperator {
            dim: self.dim,
            columns,
            protected_energy,
            max_raise: self.max_raise.saturating_add(other.max_raise),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Matrix adjoint of the stored truncation.
    pub fn adjoint(&self) -> Self {
        let mut columns = vec![Vec::new(); self.dim];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                columns[i].push((j, v.conj()));
            }
        }
        FockOperator {
            dim: self.dim,
            columns,
            protected_energy: self.protected_energy,
            max_raise: -self.max_raise,
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for (j, col) in self.columns.iter().enumerate() {
            let x = v[j];
            if x == c(0.0, 0.0) {
                continue;
            }
            for &(i, a) in col {
                out[i] += a * x;
            }
        }
        out
    }

    /// Largest entry magnitude over the protected columns.
    pub fn protected_max_abs(&self, space: &TruncatedFockSpace) -> f64 {
        self.max_abs_up_to(space, self.protected_energy)
    }

    /// Largest entry magnitude over columns with energy at most `e`.
    pub fn max_abs_up_to(&self, space: &TruncatedFockSpace, e: i64) -> f64 {
        self.columns[space.states_up_to(e)]
            .iter()
            .flat_map(|col| col.iter().map(|(_, v)| v.norm()))
            .fold(0.0, f64::max)
    }

    /// Hermitian matrix for the sector block `(row, col)`.
    pub fn block(&self, row: &Sector, col: &Sector) -> CMatrix {
        let mut m = CMatrix::zeros(row.len, col.len);
        for j in 0..col.len {
            for &(i, v) in &self.columns[col.start + j] {
                if i >= row.start && i < row.start + row.len {
                    m[(i - row.start, j)] = v;
                }
            }
        }
        m
    }

    /// Spectral norm restricted to columns with energy at most `e`,
    /// by power iteration on `A^dagger A`.
    pub fn operator_norm_up_to(&self, space: &TruncatedFockSpace, e: i64) -> f64 {
        let cols = space.states_up_to(e);
        if cols.is_empty() {
            return 0.0;
        }
        let adj = self.adjoint();
        let mut v = CVector::zeros(self.dim);
        for (idx, j) in cols.clone().enumerate() {
            v[j] = c(1.0 + 0.01 * (idx % 7) as f64, 0.1 * (idx % 3) as f64);
        }
        let mut lambda = 0.0;
        for _ in 0..500 {
            let norm = linalg::vector_norm(&v);
            if norm == 0.0 {
                return 0.0;
            }
            v /= c(norm, 0.0);
            let mut w = adj.apply(&self.apply(&v));
            for j in 0..self.dim {
                if !cols.contains(&j) {
                    w[j] = c(0.0, 0.0);
                }
            }
            let next = linalg::vector_norm(&w);
            let done = (next - lambda).abs() <= 1e-13 * next.max(1e-300);
            lambda = next;
            v = w;
            if done {
                break;
            }
        }
        lambda.sqrt()
    }
}

fn merge(a: &[(usize, Complex64)], b: &[(usize, Complex64)], s: Complex64) -> Vec<(usize, Complex64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (r, v) = match (a.get(i), b.get(j)) {
            (Some(&(ra, va)), Some(&(rb, vb))) if ra == rb => {
                i += 1;
                j += 1;
                (ra, va + vb * s)
            }
            (Some(&(ra, va)), Some(&(rb, _))) if ra < rb => {
                i += 1;
                (ra, va)
            }
            (Some(&(ra, va)), None) => {
                i += 1;
                (ra, va)
            }
            (_, Some(&(rb, vb))) => {
                j += 1;
                (rb, vb * s)
            }
            (None, None) => unreachable!(),
        };
        if v != c(0.0, 0.0) {
            out.push((r, v));
        }
    }
    out
}

fn check_window(m: i64, window: i64) -> Result<()> {
    if m.abs() > window {
        return Err(Error::OutOfWindow { mode: m, window });
    }
    Ok(())
}

/// `x(m) = sum_k :c^dagger_{k-m} X c_k:` for a matrix `X` in the
/// complexified algebra.
pub fn current_matrix(space: &TruncatedFockSpace, x: &CMatrix, m: i64) -> Result<FockOperator> {
    check_window(m, space.cutoff())?;
    let n = space.n();
    if x.shape() != (n, n) {
        return Err(Error::Domain("generator has the wrong size".into()));
    }
    let ni = n as i64;
    let shift = m * ni;
    let columns = (0..space.dim())
        .map(|j| {
            let state = space.state(j);
            let mut col: Vec<(usize, Complex64)> = Vec::new();
            if m == 0 {
                let d: Complex64 = state
                    .iter()
                    .map(|&s| {
                        let v = x[(space.color(s), space.color(s))];
                        if s >= 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .sum();
                if d != c(0.0, 0.0) {
                    col.push((j, d));
                }
            }
            let mut push = |p: i64, q: i64| {
                if p == q {
                    return;
                }
                let coeff = x[(space.color(p), space.color(q))];
                if coeff == c(0.0, 0.0) {
                    return;
                }
                if let Some((next, sign)) = hop(state, p, q) {
                    if let Some(i) = space.find(&next) {
                        col.push((i, coeff * sign));
                    }
                }
            };
            for &q in state.iter().filter(|&&s| s >= 0) {
                let base = space.site(space.mode(q), 0) - shift;
                for a in 0..ni {
                    push(base + a, q);
                }
            }
            for &p in state.iter().filter(|&&s| s < 0) {
                let base = space.site(space.mode(p), 0) + shift;
                for b in 0..ni {
                    let q = base + b;
                    if q < 0 {
                        push(p, q);
                    }
                }
            }
            for k in m..0 {
                for b in 0..ni {
                    let q = k * ni + b;
                    for a in 0..ni {
                        push((k - m) * ni + a, q);
                    }
                }
            }
            col.sort_unstable_by_key(|&(i, _)| i);
            // merge duplicates (none expected, kept for safety)
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            col
        })
        .collect();
    Ok(FockOperator {
        dim: space.dim(),
        columns,
        protected_energy: space.cutoff() - (-m).max(0),
        max_raise: -m,
    })
}

/// Current mode `x(m)` of an algebra element.
pub fn current(space: &TruncatedFockSpace, x: &AlgebraElement, m: i64) -> Result<FockOperator> {
    if x.tag.0 != space.n() {
        return Err(Error::Domain("algebra does not match the Fock space".into()));
    }
    current_matrix(space, &x.matrix, m)
}

/// `pi(X) = sum_k a_k(k)` for a polynomial loop.
pub fn loop_current(space: &TruncatedFockSpace, x: &FourierLoopElement) -> Result<FockOperator> {
    let mut acc = FockOperator::zero(space);
    for (&k, a) in &x.coefficients {
        acc = acc.add(&current_matrix(space, a, k)?);
    }
    if x.coefficients.is_empty() {
        acc.protected_energy = space.cutoff();
        acc.max_raise = 0;
    }
    Ok(acc)
}

/// Number of contributing `m` in the Sugawara double sum for `L_n`.
fn sugawara_range(cutoff: i64, n: i64) -> std::ops::RangeInclusive<i64> {
    let lo = -n.div_euclid(2); // ceil(-n/2)
    let hi = cutoff.min(cutoff - n);
    lo..=hi
}

/// Level-one Sugawara operator
/// `L_n = 1/(2(1+g)) sum_i sum_{m >= -n/2} (2 - delta_{-m,n/2}) x_i(-m) x^i(m+n)`
/// with `x^i = -x_i`. Terms with `m + n` above the cutoff annihilate every
/// protected column and are omitted.
pub fn sugawara(space: &TruncatedFockSpace, alg: &CompactSimpleAlgebra, n: i64) -> Result<FockOperator> {
    check_window(n, space.cutoff() / 2)?;
    if alg.n() != space.n() {
        return Err(Error::Domain("algebra does not match the Fock space".into()));
    }
    let pref = 1.0 / (2.0 * (1.0 + alg.dual_coxeter() as f64));
    let mut acc = FockOperator::zero(space);
    for m in sugawara_range(space.cutoff(), n) {
        let weight = if 2 * m == -n { 1.0 } else { 2.0 };
        for x in alg.basis() {
            let left = current_matrix(space, x, -m)?;
            let right = current_matrix(space, x, m + n)?;
            acc = acc.add_scaled(&left.mul(&right), c(-pref * weight, 0.0));
        }
    }
    acc.protected_energy = acc.protected_energy.min(space.cutoff() - (-n).max(0));
    acc.max_raise = -n;
    Ok(acc)
}

/// The energy operator `d`.
pub fn rotation_generator(space: &TruncatedFockSpace) -> FockOperator {
    FockOperator::diagonal(space, |i| c(space.energy(i) as f64, 0.0))
}

/// `e^{-eps d}`.
pub fn damping(space: &TruncatedFockSpace, eps: f64) -> FockOperator {
    FockOperator::diagonal(space, |i| c((-eps * space.energy(i) as f64).exp(), 0.0))
}

/// `(Omega, ([pi(X), pi(Y)] - pi([X, Y])) Omega)`; equals `i B(X, Y)` at
/// level one.
pub fn vacuum_cocycle_check(
    space: &TruncatedFockSpace,
    x: &FourierLoopElement,
    y: &FourierLoopElement,
) -> Result<Complex64> {
    let window = space.cutoff() / 2;
    check_window(x.max_mode(), window)?;
    check_window(y.max_mode(), window)?;
    let omega = space
        .vacuum()
        .ok_or_else(|| Error::Domain("space has no charge-0 sector".into()))?;
    let px = loop_current(space, x)?;
    let py = loop_current(space, y)?;
    let pxy = loop_current(space, &x.bracket(y)?)?;
    let d = px.commutator(&py).sub(&pxy);
    Ok(d.entry(omega, omega))
}

/// Hilbert-Schmidt defect of the multiplication operator of a loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsReport {
    /// `sum_k |k| |gamma_k|_F^2`.
    pub fourier_value: f64,
    /// `|[P, M]|_2^2` for the block matrix `M_pq = gamma_{p-q}`, `|p|,|q| <= K`.
    pub truncated_value: f64,
    pub k_window: usize,
    pub relative_gap: f64,
    pub warning: Option<String>,
}

pub fn hs_defect(gamma: &MatrixFourier, k_window: usize) -> HsReport {
    let fourier_value: f64 = gamma
        .iter()
        .map(|(&k, m)| k.unsigned_abs() as f64 * linalg::frobenius(m).powi(2))
        .sum();
    let kk = k_window as i64;
    let mut truncated_value = 0.0;
    for p in -kk..=kk {
        for q in -kk..=kk {
            // (P_p - P_q) M_pq vanishes unless p, q sit on opposite sides
            if (p >= 0) == (q >= 0) {
                continue;
            }
            if let Some(m) = gamma.get(&(p - q)) {
                truncated_value += linalg::frobenius(m).powi(2);
            }
        }
    }
    let total: f64 = gamma.values().map(|m| linalg::frobenius(m).powi(2)).sum();
    let tail: f64 = gamma
        .iter()
        .filter(|(k, _)| k.unsigned_abs() as usize > k_window)
        .map(|(_, m)| linalg::frobenius(m).powi(2))
        .sum();
    let warning = (tail > 1e-10 * total).then(|| {
        format!("Fourier mass {tail:.3e} beyond the window K = {k_window}; truncated value need not converge")
    });
    let relative_gap = if fourier_value > 0.0 {
        (fourier_value - truncated_value).abs() / fourier_value
    } else {
        (fourier_value - truncated_value).abs()
    };
    HsReport {
        fourier_value,
        truncated_value,
        k_window,
        relative_gap,
        warning,
    }
}

/// Dense matrix exponential `e^{pi(X)}` on the truncated space.
#[derive(Debug, Clone)]
pub struct Implementer {
    pub matrix: CMatrix,
    pub generator: CMatrix,
    pub unitarity_defect: f64,
}

pub fn implement_exponential(space: &TruncatedFockSpace, x: &FourierLoopElement) -> Result<Implementer> {
    if !x.is_real_form(1e-10) {
        return Err(Error::Domain("generator must be a real-form loop".into()));
    }
    check_window(x.max_mode(), space.cutoff() / 4)?;
    let generator = loop_current(space, x)?.to_dense();
    let matrix = linalg::exp_anti_hermitian(&generator)?;
    Ok(Implementer {
        unitarity_defect: linalg::unitarity_defect(&matrix),
        matrix,
        generator,
    })
}

/// Conjugation `e^{eps pi(X)} pi(Y) e^{-eps pi(X)}`.
fn conjugated(px: &CMatrix, py: &CMatrix, eps: f64) -> Result<CMatrix> {
    let u = linalg::exp_anti_hermitian(&(px * c(eps, 0.0)))?;
    Ok(&u * py * u.adjoint())
}

fn restricted_max(m: &CMatrix, cols: std::ops::Range<usize>) -> f64 {
    cols.flat_map(|j| m.column(j).iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Second-order remainder of the adjoint action on low-energy columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderReport {
    pub eps: Vec<f64>,
    /// `max |e^{eps pi X} pi Y e^{-eps pi X} - pi Y - eps [pi X, pi Y]|`.
    pub remainder: Vec<f64>,
    /// Ratio of successive remainders; close to `(eps_0/eps_1)^2`.
    pub ratio: f64,
    /// Vacuum expectation of the first-order term divided by `eps`.
    pub scalar_first_order: Complex64,
    /// `i B(X, Y)`.
    pub expected_scalar: Complex64,
}

/// Richardson-style order check of `Ad(e^{eps pi(X)})` at two step sizes,
/// read on columns of energy at most `probe_energy`.
pub fn adjoint_first_order(
    space: &TruncatedFockSpace,
    x: &FourierLoopElement,
    y: &FourierLoopElement,
    eps: [f64; 2],
    probe_energy: i64,
) -> Result<FirstOrderReport> {
    let omega = space
        .vacuum()
        .ok_or_else(|| Error::Domain("space has no charge-0 sector".into()))?;
    let imp = implement_exponential(space, x)?;
    let py_op = loop_current(space, y)?;
    let py = py_op.to_dense();
    let comm = &imp.generator * &py - &py * &imp.generator;
    let cols = space.states_up_to(probe_energy);
    let mut remainder = Vec::new();
    for &e in &eps {
        let ad = conjugated(&imp.generator, &py, e)?;
        let r = &ad - &py - &comm * c(e, 0.0);
        remainder.push(restricted_max(&r, cols.clone()));
    }
    let pxy = loop_current(space, &x.bracket(y)?)?.to_dense();
    let scalar_first_order = (&comm - &pxy)[(omega, omega)];
    Ok(FirstOrderReport {
        ratio: remainder[0] / remainder[1],
        eps: eps.to_vec(),
        remainder,
        scalar_first_order,
        expected_scalar: c(0.0, 1.0) * crate::loops::central_term_b(x, y)?,
    })
}

/// Both sides of `|pi(X) xi|_t <= sqrt(2(l+g)) |X|_{|t|+1/2} |xi|_{t+1/2}`
/// with `|xi|_s = |(1+d)^s xi|`, at level one.
pub fn current_sobolev_bound(
    space: &TruncatedFockSpace,
    g: usize,
    x: &FourierLoopElement,
    xi: &CVector,
    t: f64,
) -> Result<(f64, f64)> {
    use crate::loops::SobolevNorm;
    let px = loop_current(space, x)?;
    for j in 0..space.dim() {
        if xi[j] != c(0.0, 0.0) && space.energy(j) > px.protected_energy {
            return Err(Error::Domain("vector leaves the protected block".into()));
        }
    }
    let weighted = |v: &CVector, s: f64| {
        let mut w = v.clone();
        for j in 0..space.dim() {
            w[j] *= (1.0 + space.energy(j) as f64).powf(s);
        }
        linalg::vector_norm(&w)
    };
    let lhs = weighted(&px.apply(xi), t);
    let rhs = (2.0 * (1.0 + g as f64)).sqrt() * x.sobolev_t(t.abs() + 0.5)? * weighted(xi, t + 0.5);
    Ok((lhs, rhs))
}

/// Both sides of `|(1+L_0)^k L_n xi| <= sqrt(c/2) (1+|n|)^{k+3/2} |(1+L_0)^{k+1} xi|`.
pub fn stress_tensor_bound(
    space: &TruncatedFockSpace,
    l0: &FockOperator,
    ln: &FockOperator,
    n: i64,
    central_charge: f64,
    k: u32,
    xi: &CVector,
) -> Result<(f64, f64)> {
    for j in 0..space.dim() {
        if xi[j] != c(0.0, 0.0) && space.energy(j) > ln.protected_energy {
            return Err(Error::Domain("vector leaves the protected block".into()));
        }
    }
    let one_plus = |v: &CVector, p: u32| {
        let mut w = v.clone();
        for _ in 0..p {
            w = &w + l0.apply(&w);
        }
        w
    };
    let lhs = linalg::vector_norm(&one_plus(&ln.apply(xi), k));
    let rhs = (central_charge / 2.0).sqrt()
        * (1.0 + n.abs() as f64).powf(k as f64 + 1.5)
        * linalg::vector_norm(&one_plus(xi, k + 1));
    Ok((lhs, rhs))
}

/// Both sides of `|[x(m), e^{-eps d}]| <= 2 sqrt(l+g) |X e^{i m theta}|_{3/2}`
/// with the norm taken over exact columns.
pub fn damping_commutator_bound(
    space: &TruncatedFockSpace,
    g: usize,
    x: &AlgebraElement,
    m: i64,
    eps: f64,
) -> Result<(f64, f64)> {
    let xm = current(space, x, m)?;
    let comm = xm.commutator(&damping(space, eps));
    let lhs = comm.operator_norm_up_to(space, xm.protected_energy);
    let rhs = 2.0 * (1.0 + g as f64).sqrt() * (1.0 + m.abs() as f64).powf(1.5) * linalg::frobenius(&x.matrix);
    Ok((lhs, rhs))
}

/// Lowest eigenvalue of a charge- and energy-preserving hermitian operator
/// in each charge sector, from dense diagonalization of its sector blocks.
pub fn lowest_eigenvalue_per_charge(space: &TruncatedFockSpace, op: &FockOperator) -> Vec<(i64, f64)> {
    let mut best: Vec<(i64, f64)> = Vec::new();
    for sec in space.sectors() {
        if sec.energy > op.protected_energy {
            continue;
        }
        let block = op.block(sec, sec);
        let ev = linalg::hermitian_eigenvalues(&block);
        let lo = ev.first().copied().unwrap_or(f64::INFINITY);
        match best.iter_mut().find(|(q, _)| *q == sec.charge) {
            Some(slot) => slot.1 = slot.1.min(lo),
            None => best.push((sec.charge, lo)),
        }
    }
    best.sort_by_key(|&(q, _)| q);
    best
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub identity: String,
    pub block: String,
    pub residual_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance of the operator identities.
pub const IDENTITY_TOL: f64 = 1e-10;

impl CheckRecord {
    fn new(identity: &str, block: String, residual_max: f64, tolerance: f64) -> Self {
        CheckRecord {
            identity: identity.into(),
            block,
            residual_max,
            tolerance,
            pass: residual_max <= tolerance,
        }
    }
}

/// Runs the current and Sugawara identities on a truncated space with mode
/// indices in `-modes..=modes` (clipped to the Sugawara window):
/// the affine relation, `[L_n, x(k)] = -k x(n+k)`, the Virasoro relations,
/// the vacuum central charge and the lowest `L_0` per charge.
pub fn verification_suite(space: &TruncatedFockSpace, alg: &CompactSimpleAlgebra, modes: i64) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let modes = modes.clamp(0, space.cutoff());
    let window = modes.min(space.cutoff() / 2);
    let block = |e: i64| format!("{} cutoff {} energy <= {e}", alg.tag(), space.cutoff());
    let xs = alg.basis();
    let reach = (2 * modes).min(space.cutoff());
    let cur: Vec<Vec<FockOperator>> = xs
        .iter()
        .map(|x| (-reach..=reach).map(|m| current_matrix(space, x, m)).collect())
        .collect::<Result<_>>()?;
    let at = |i: usize, m: i64| &cur[i][(m + reach) as usize];

    let mut worst = (0.0f64, i64::MAX);
    for a in -modes..=modes {
        for b in -modes..=modes {
            if (a + b).abs() > reach {
                continue;
            }
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in xs.iter().enumerate() {
                    let bracket = current_matrix(space, &linalg::commutator(x, y), a + b)?;
                    let mut r = at(i, a).commutator(at(j, b)).sub(&bracket);
                    if a + b == 0 {
                        let central = c(a as f64, 0.0) * linalg::trace(&(x * y));
                        r = r.add_scaled(&FockOperator::identity(space), -central);
                    }
                    worst = (worst.0.max(r.protected_max_abs(space)), worst.1.min(r.protected_energy));
                }
            }
        }
    }
    out.push(CheckRecord::new("[x(a), y(b)] = [x,y](a+b) + a delta(a+b) <x,y>", block(worst.1), worst.0, IDENTITY_TOL));

    let ls: Vec<FockOperator> = (-window..=window).map(|n| sugawara(space, alg, n)).collect::<Result<_>>()?;
    let l = |n: i64| &ls[(n + window) as usize];
    let mut worst = (0.0f64, i64::MAX);
    for n in -window..=window {
        for k in -modes..=modes {
            if (n + k).abs() > reach {
                continue;
            }
            for i in 0..xs.len() {
                let r = l(n).commutator(at(i, k)).add_scaled(at(i, n + k), c(k as f64, 0.0));
                worst = (worst.0.max(r.protected_max_abs(space)), worst.1.min(r.protected_energy));
            }
        }
    }
    out.push(CheckRecord::new("[L_n, x(k)] = -k x(n+k)", block(worst.1), worst.0, IDENTITY_TOL));

    let c_sug = alg.dimension() as f64 / (1.0 + alg.dual_coxeter() as f64);
    let mut worst = (0.0f64, i64::MAX);
    for m in -window..=window {
        for n in -window..=window {
            if (m + n).abs() > window {
                continue;
            }
            let mut r = l(m).commutator(l(n)).add_scaled(l(m + n), c(-(m - n) as f64, 0.0));
            if m + n == 0 {
                let anomaly = c_sug / 12.0 * (m * (m * m - 1)) as f64;
                r = r.add_scaled(&FockOperator::identity(space), c(-anomaly, 0.0));
            }
            worst = (worst.0.max(r.protected_max_abs(space)), worst.1.min(r.protected_energy));
        }
    }
    out.push(CheckRecord::new(
        "[L_m, L_n] = (m-n) L_(m+n) + c/12 m(m^2-1) delta(m+n)",
        block(worst.1),
        worst.0,
        IDENTITY_TOL,
    ));

    if let (Some(omega), true) = (space.vacuum(), window >= 2) {
        let comm = l(2).commutator(l(-2));
        let r = (comm.entry(omega, omega) - c(c_sug / 2.0, 0.0)).norm();
        out.push(CheckRecord::new("(Omega, [L_2, L_-2] Omega) = c/2", "vacuum".into(), r, IDENTITY_TOL));
    }

    let level = crate::affine_data::LevelData::su(alg.n(), 1)?;
    let mut worst = 0.0f64;
    let mut seen = Vec::new();
    for (q, lo) in lowest_eigenvalue_per_charge(space, l(0)) {
        if !(0..alg.n() as i64).contains(&q) {
            continue;
        }
        let rem = q as usize;
        let mut w = vec![0u32; alg.n() - 1];
        if rem > 0 {
            w[rem - 1] = 1;
        }
        let h = crate::affine_data::conformal_weight(&w, &level)?;
        let expect = *h.numer() as f64 / *h.denom() as f64;
        worst = worst.max((lo - expect).abs());
        seen.push(q.to_string());
    }
    if !seen.is_empty() {
        out.push(CheckRecord::new(
            "lowest L_0 per charge = h(omega_q)",
            format!("charges {}", seen.join(" ")),
            worst,
            IDENTITY_TOL,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::build_su;

    fn e_f_h() -> (CMatrix, CMatrix, CMatrix) {
        let mut e = CMatrix::zeros(2, 2);
        e[(0, 1)] = c(1.0, 0.0);
        let f = e.transpose();
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = c(1.0, 0.0);
        h[(1, 1)] = c(-1.0, 0.0);
        (e, f, h)
    }

    /// Brute-force count of states with the given energy among flips of
    /// sites with `|k| <= cutoff`.
    fn brute_force_count(n: usize, cutoff: i64, energy: i64) -> usize {
        let mut costs = Vec::new();
        for k in -cutoff..=cutoff {
            for _ in 0..n {
                costs.push(if k >= 0 { k } else { -k });
            }
        }
        let total = costs.len();
        (0u64..(1 << total))
            .filter(|mask| {
                let e: i64 = (0..total).filter(|b| mask >> b & 1 == 1).map(|b| costs[b]).sum();
                e == energy
            })
            .count()
    }

    #[test]
    fn space_dimensions() {
        assert_eq!(build_fock(2, 0).unwrap().dim(), 4);
        let s = build_fock(2, 1).unwrap();
        let e1 = s.sectors().iter().filter(|x| x.energy == 1).map(|x| x.len).sum::<usize>();
        assert_eq!(e1, brute_force_count(2, 1, 1));
        let s2 = build_fock(2, 2).unwrap();
        let e2 = s2.sectors().iter().filter(|x| x.energy == 2).map(|x| x.len).sum::<usize>();
        assert_eq!(e2, brute_force_count(2, 2, 2));
        let omega = s.vacuum().unwrap();
        assert_eq!((s.charge(omega), s.energy(omega)), (0, 0));
        for n in 2..=3 {
            for cut in 0..=4 {
                assert_eq!(build_fock(n, cut).unwrap().dim() as u128, estimate_dimension(n, cut, None));
            }
        }
        assert_eq!(build_fock(3, 0).unwrap().dim(), 8);
    }

    #[test]
    fn basis_order_is_energy_then_charge() {
        let s = build_fock(3, 3).unwrap();
        for w in s.sectors().windows(2) {
            assert!((w[0].energy, w[0].charge) < (w[1].energy, w[1].charge));
        }
    }

    #[test]
    fn capacity_error() {
        assert!(matches!(build_fock(4, 12), Err(Error::Capacity { .. })));
    }

    #[test]
    fn traceless_zero_mode_kills_vacuum() {
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        let omega = s.vacuum().unwrap();
        for x in a.basis() {
            assert!(current_matrix(&s, x, 0).unwrap().column(omega).is_empty());
        }
    }

    #[test]
    fn affine_relation_example() {
        let s = build_fock(2, 6).unwrap();
        let (e, f, h) = e_f_h();
        let lhs = current_matrix(&s, &e, 1)
            .unwrap()
            .commutator(&current_matrix(&s, &f, -1).unwrap())
            .sub(&current_matrix(&s, &h, 0).unwrap())
            .sub(&FockOperator::identity(&s));
        assert!(lhs.protected_max_abs(&s) < 1e-12);
    }

    #[test]
    fn real_currents_are_anti_adjoint() {
        let s = build_fock(2, 5).unwrap();
        let a = build_su(2).unwrap();
        for x in a.basis() {
            for m in -3..=3 {
                let xm = current_matrix(&s, x, m).unwrap();
                let xmm = current_matrix(&s, x, -m).unwrap();
                let d = xm.adjoint().add(&xmm);
                assert!(d.max_abs_up_to(&s, xmm.protected_energy) < 1e-14);
            }
        }
    }

    #[test]
    fn rotation_generator_grades_currents() {
        let s = build_fock(2, 5).unwrap();
        let a = build_su(2).unwrap();
        let d = rotation_generator(&s);
        assert!(d.column(s.vacuum().unwrap()).is_empty());
        for m in -2..=2 {
            let xm = current(&s, &a.element(1), m).unwrap();
            let r = d.commutator(&xm).add_scaled(&xm, c(m as f64, 0.0));
            assert!(r.protected_max_abs(&s) < 1e-13);
        }
    }

    #[test]
    fn vacuum_cocycle_examples() {
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        let (e, f, _) = e_f_h();
        let tag = a.tag();
        let x = FourierLoopElement::from_modes(tag, [(1, e.clone())]);
        let y = FourierLoopElement::from_modes(tag, [(-1, f.clone())]);
        let v = vacuum_cocycle_check(&s, &x, &y).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        assert!((v + vacuum_cocycle_check(&s, &y, &x).unwrap()).norm() < 1e-12);
        let k = FourierLoopElement::constant(&a.element(0));
        assert!(vacuum_cocycle_check(&s, &k, &FourierLoopElement::constant(&a.element(1))).unwrap().norm() < 1e-12);
    }

    #[test]
    fn hs_examples() {
        let mut g = MatrixFourier::new();
        g.insert(0, linalg::identity(2));
        assert_eq!(hs_defect(&g, 8).fourier_value, 0.0);
        assert_eq!(hs_defect(&g, 8).truncated_value, 0.0);
        let mut d = MatrixFourier::new();
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(1, 1)] = c(1.0, 0.0);
        d.insert(1, a);
        d.insert(-1, b);
        let r = hs_defect(&d, 2);
        assert_eq!(r.fourier_value, 2.0);
        assert!((r.truncated_value - 2.0).abs() < 1e-12);
        assert!(r.warning.is_none());
    }

    #[test]
    fn implementer_of_zero_is_identity() {
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        let imp = implement_exponential(&s, &FourierLoopElement::zero(a.tag())).unwrap();
        assert!(linalg::max_abs_diff(&imp.matrix, &linalg::identity(s.dim())) < 1e-15);
    }

    #[test]
    fn sugawara_window() {
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        assert!(matches!(sugawara(&s, &a, 3), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn suite_passes_on_su2() {
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        let records = verification_suite(&s, &a, 2).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn commutator_lemma_su2() {
        let s = build_fock(2, 6).unwrap();
        let a = build_su(2).unwrap();
        let x = a.element(0);
        for n in -2..=2 {
            let ln = sugawara(&s, &a, n).unwrap();
            for k in -2..=2 {
                let r = ln
                    .commutator(&current(&s, &x, k).unwrap())
                    .add_scaled(&current(&s, &x, n + k).unwrap(), c(k as f64, 0.0));
                assert!(r.protected_max_abs(&s) < 1e-10, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn virasoro_su2() {
        let s = build_fock(2, 6).unwrap();
        let a = build_su(2).unwrap();
        let ls: Vec<FockOperator> = (-3..=3).map(|n| sugawara(&s, &a, n).unwrap()).collect();
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                if (m + n).abs() > 3 {
                    continue;
                }
                let lm = &ls[(m + 3) as usize];
                let ln = &ls[(n + 3) as usize];
                let mut r = lm.commutator(ln).add_scaled(&ls[(m + n + 3) as usize], c(-(m - n) as f64, 0.0));
                if m + n == 0 {
                    let anomaly = (m * (m * m - 1)) as f64 / 12.0;
                    r = r.add_scaled(&FockOperator::identity(&s), c(-anomaly, 0.0));
                }
                assert!(r.protected_max_abs(&s) < 1e-10, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn vacuum_central_charge_and_weights() {
        for (n, cutoff, c_expect) in [(2usize, 6i64, 1.0), (3, 4, 2.0)] {
            let s = build_fock_sectors(n, cutoff, &[0]).unwrap();
            let a = build_su(n).unwrap();
            let l2 = sugawara(&s, &a, 2).unwrap();
            let lm2 = sugawara(&s, &a, -2).unwrap();
            let comm = l2.commutator(&lm2);
            assert!(comm.protected_energy >= 0);
            let omega = s.vacuum().unwrap();
            assert!((comm.entry(omega, omega) - c(c_expect / 2.0, 0.0)).norm() < 1e-10);
        }
        let s = build_fock(2, 4).unwrap();
        let a = build_su(2).unwrap();
        let l0 = sugawara(&s, &a, 0).unwrap();
        let one = s.find(&[0]).unwrap();
        assert!((l0.entry(one, one) - c(0.25, 0.0)).norm() < 1e-12);
    }
}
