//! Level-ℓ alcoves, central charges and conformal weights in exact
//! rational arithmetic.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{Family, SimpleTypeRecord};

/// Algebra and level together with the Sugawara central charge
/// `c = l dim / (l + g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelData {
    pub record: SimpleTypeRecord,
    pub level: u32,
    pub central_charge: Rational64,
}

impl LevelData {
    pub fn new(record: SimpleTypeRecord, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::Domain("level must be positive".into()));
        }
        Ok(LevelData {
            record,
            level,
            central_charge: central_charge(&record, level),
        })
    }

    pub fn su(n: usize, level: u32) -> Result<Self> {
        let record = SimpleTypeRecord::su(n).ok_or(Error::InvalidRank(n))?;
        Self::new(record, level)
    }

    pub fn dual_coxeter(&self) -> usize {
        self.record.dual_coxeter
    }
}

pub fn central_charge(record: &SimpleTypeRecord, level: u32) -> Rational64 {
    Rational64::new(
        level as i64 * record.complex_dimension as i64,
        level as i64 + record.dual_coxeter as i64,
    )
}

/// A dominant integral weight in the fundamental-weight basis with its
/// quadratic Casimir `<lambda, lambda + 2 rho>` and conformal weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlcoveWeight {
    pub weight: Vec<u32>,
    pub casimir: Rational64,
    pub conformal_weight: Rational64,
}

/// `<omega_i, omega_j>` for `su(n)`: the inverse Cartan matrix
/// `min(i, j) - i j / n` (1-based).
pub fn fundamental_gram(n: usize) -> Vec<Vec<Rational64>> {
    let ni = n as i64;
    (1..n as i64)
        .map(|i| {
            (1..n as i64)
                .map(|j| Rational64::from_integer(i.min(j)) - Rational64::new(i * j, ni))
                .collect()
        })
        .collect()
}

fn require_type_a(record: &SimpleTypeRecord) -> Result<usize> {
    if record.family != Family::A {
        return Err(Error::Unsupported(format!(
            "{:?}{} has table data only; weights need explicit root data",
            record.family, record.rank
        )));
    }
    Ok(record.rank + 1)
}

fn pair(gram: &[Vec<Rational64>], a: &[i64], b: &[i64]) -> Rational64 {
    let mut acc = Rational64::zero();
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            acc += gram[i][j] * Rational64::from_integer(ai * bj);
        }
    }
    acc
}

/// Cartan matrix of `su(n)`, rows giving the simple roots in the
/// fundamental-weight basis.
fn cartan(n: usize) -> Vec<Vec<i64>> {
    (0..n - 1)
        .map(|i| {
            (0..n - 1)
                .map(|j| match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

/// `<lambda, theta>` with `theta` the sum of the simple roots.
pub fn pairing_with_highest_root(n: usize, weight: &[u32]) -> Rational64 {
    let gram = fundamental_gram(n);
    let a = cartan(n);
    let theta: Vec<i64> = (0..n - 1).map(|k| a.iter().map(|row| row[k]).sum()).collect();
    let lam: Vec<i64> = weight.iter().map(|&x| x as i64).collect();
    pair(&gram, &lam, &theta)
}

/// `C_lambda = <lambda, lambda + 2 rho>` with `rho = sum omega_i`.
pub fn casimir(n: usize, weight: &[u32]) -> Rational64 {
    let gram = fundamental_gram(n);
    let lam: Vec<i64> = weight.iter().map(|&a| a as i64).collect();
    let shifted: Vec<i64> = lam.iter().map(|a| a + 2).collect();
    pair(&gram, &lam, &shifted)
}

/// `<lambda, lambda>`, the shorthand Casimir used in the bound argument.
pub fn norm_squared(n: usize, weight: &[u32]) -> Rational64 {
    let gram = fundamental_gram(n);
    let lam: Vec<i64> = weight.iter().map(|&a| a as i64).collect();
    pair(&gram, &lam, &lam)
}

fn conformal_from_casimir(c: Rational64, data: &LevelData) -> Rational64 {
    c / Rational64::from_integer(2 * (data.level as i64 + data.dual_coxeter() as i64))
}

/// All dominant integral weights with `<lambda, theta> <= l`, in
/// lexicographic order of their coordinates.
pub fn alcove(data: &LevelData) -> Result<Vec<AlcoveWeight>> {
    let n = require_type_a(&data.record)?;
    let rank = n - 1;
    let marks: Vec<Rational64> = (0..rank)
        .map(|i| {
            let mut e = vec![0u32; rank];
            e[i] = 1;
            pairing_with_highest_root(n, &e)
        })
        .collect();
    let level = Rational64::from_integer(data.level as i64);
    let mut out = Vec::new();
    let mut w = vec![0u32; rank];
    // depth-first over coordinates; every mark is positive, so the partial
    // pairing bounds the remaining ones
    fn walk(
        i: usize,
        used: Rational64,
        w: &mut Vec<u32>,
        marks: &[Rational64],
        level: Rational64,
        visit: &mut dyn FnMut(&[u32]),
    ) {
        if i == w.len() {
            visit(w);
            return;
        }
        let mut a = 0u32;
        while used + marks[i] * Rational64::from_integer(a as i64) <= level {
            w[i] = a;
            walk(i + 1, used + marks[i] * Rational64::from_integer(a as i64), w, marks, level, visit);
            a += 1;
        }
        w[i] = 0;
    }
    walk(0, Rational64::zero(), &mut w, &marks, level, &mut |w| {
        let c = casimir(n, w);
        out.push(AlcoveWeight {
            weight: w.to_vec(),
            casimir: c,
            conformal_weight: conformal_from_casimir(c, data),
        });
    });
    Ok(out)
}

/// `h = C_lambda / (2 (l + g))` for a weight in the alcove.
pub fn conformal_weight(weight: &[u32], data: &LevelData) -> Result<Rational64> {
    let n = require_type_a(&data.record)?;
    if weight.len() != n - 1 {
        return Err(Error::Domain(format!("weight needs {} coordinates", n - 1)));
    }
    if pairing_with_highest_root(n, weight) > Rational64::from_integer(data.level as i64) {
        return Err(Error::Domain(format!(
            "weight {weight:?} lies outside the level-{} alcove",
            data.level
        )));
    }
    Ok(conformal_from_casimir(casimir(n, weight), data))
}

/// `m = min_i cos angle(theta, omega_i)`.
pub fn min_cosine(n: usize) -> f64 {
    let gram = fundamental_gram(n);
    let theta_norm = 2f64.sqrt();
    (0..n - 1)
        .map(|i| {
            let g = gram[i][i];
            let gii = *g.numer() as f64 / *g.denom() as f64;
            1.0 / (theta_norm * gii.sqrt())
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub central_charge: Rational64,
    pub c_ge_1: bool,
    /// Present for type A only.
    pub m: Option<f64>,
    /// `l^2 / (4 m^2 (l + g))`.
    pub h_max_bound: Option<f64>,
    /// Largest conformal weight `<lambda, lambda + 2 rho> / (2(l+g))` in the alcove.
    pub h_max: Option<Rational64>,
    /// Every alcove `h` lies in `[0, h_max_bound]`.
    pub h_within_bound: Option<bool>,
    /// Same test with `<lambda, lambda>` in place of the Casimir.
    pub norm_within_bound: Option<bool>,
}

pub fn lemma1_bounds(data: &LevelData) -> Lemma1Report {
    let c = data.central_charge;
    let mut report = Lemma1Report {
        central_charge: c,
        c_ge_1: c >= Rational64::one(),
        m: None,
        h_max_bound: None,
        h_max: None,
        h_within_bound: None,
        norm_within_bound: None,
    };
    let Ok(weights) = alcove(data) else {
        return report;
    };
    let n = data.record.rank + 1;
    let m = min_cosine(n);
    let l = data.level as f64;
    let bound = l * l / (4.0 * m * m * (l + data.dual_coxeter() as f64));
    let to_f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
    let slack = 1e-12 * bound.max(1.0);
    let within = |h: Rational64| h >= Rational64::zero() && to_f(h) <= bound + slack;
    report.m = Some(m);
    report.h_max_bound = Some(bound);
    report.h_max = weights.iter().map(|w| w.conformal_weight).max();
    report.h_within_bound = Some(weights.iter().all(|w| within(w.conformal_weight)));
    report.norm_within_bound = Some(
        weights
            .iter()
            .all(|w| within(conformal_from_casimir(norm_squared(n, &w.weight), data))),
    );
    report
}

/// CSV table `family,level,lambda,casimir,h,c` for the given levels.
pub fn alcove_csv(entries: &[LevelData]) -> Result<String> {
    let mut out = String::from("family,level,lambda,casimir,h,c\n");
    for data in entries {
        for w in alcove(data)? {
            let coords: Vec<String> = w.weight.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "{:?}{},{},{},{},{},{}\n",
                data.record.family,
                data.record.rank,
                data.level,
                coords.join(" "),
                w.casimir,
                w.conformal_weight,
                data.central_charge
            ));
        }
    }
    Ok(out)
}
