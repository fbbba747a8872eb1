//! JSON scenarios: strict parsing, task dispatch and artifact emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::affine_data::{self, LevelData};
use crate::entropy::{self, EntropyProfile, GridSpec, LineFactor, LinePath, Profile};
use crate::error::{Error, Result};
use crate::fock::{self, CheckRecord};
use crate::lie::{build_su, CompactSimpleAlgebra};
use crate::linalg::{self, c, CMatrix};
use crate::loops::{self, FourierLoopElement, GridLoop, ScalarField};
use crate::soliton::{self, SolitonFactor, SolitonPath};

pub const DEFAULT_CUTOFF: i64 = 6;
pub const DEFAULT_HS_GAP: f64 = 1e-3;
pub const DEFAULT_SOLITON_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub loops: Vec<LoopSpec>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    /// `"su2"`, `"su3"`, ...
    pub key: String,
    #[serde(default = "one")]
    pub level: u32,
}

fn one() -> u32 {
    1
}

impl AlgebraSpec {
    pub fn n(&self) -> Option<usize> {
        self.key.strip_prefix("su")?.parse().ok().filter(|&n| n >= 2)
    }
}

/// A traceless anti-hermitian generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Orthonormal basis element `x_i`.
    Basis(usize),
    /// `i diag(values)`.
    Diag(Vec<f64>),
    /// Explicit matrix, rows of `[re, im]` pairs.
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl GeneratorSpec {
    pub fn resolve(&self, alg: &CompactSimpleAlgebra) -> Result<CMatrix> {
        let n = alg.n();
        let m = match self {
            GeneratorSpec::Basis(i) => {
                if *i >= alg.dimension() {
                    return Err(Error::Domain(format!("basis index {i} >= {}", alg.dimension())));
                }
                alg.element(*i).matrix
            }
            GeneratorSpec::Diag(v) => {
                if v.len() != n {
                    return Err(Error::Domain(format!("diag needs {n} entries")));
                }
                let mut m = CMatrix::zeros(n, n);
                for (k, &x) in v.iter().enumerate() {
                    m[(k, k)] = c(0.0, x);
                }
                m
            }
            GeneratorSpec::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Domain(format!("matrix must be {n} x {n}")));
                }
                CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1]))
            }
        };
        if !linalg::is_finite(&m)
            || linalg::anti_hermitian_defect(&m) > 1e-12
            || linalg::trace(&m).norm() > 1e-12
        {
            return Err(Error::Domain("generator must be traceless anti-hermitian".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineFactorSpec {
    pub generator: GeneratorSpec,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CircleProfile {
    /// `f(theta) = sum cos_k cos(k theta) + sin_k sin(k theta)`.
    Fourier {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// `f(theta) = k theta`; needs `exp(2 pi k X) = Id`.
    Winding { k: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleFactorSpec {
    pub generator: GeneratorSpec,
    pub profile: CircleProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoopSpec {
    /// Path on the real line for the entropy tasks.
    Line { name: String, factors: Vec<LineFactorSpec> },
    /// Loop on the circle grid.
    Circle {
        name: String,
        factors: Vec<CircleFactorSpec>,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

fn default_grid() -> usize {
    loops::DEFAULT_GRID
}

impl LoopSpec {
    pub fn name(&self) -> &str {
        match self {
            LoopSpec::Line { name, .. } | LoopSpec::Circle { name, .. } => name,
        }
    }
}

/// A Lie-algebra-valued loop `sum_j f_j(theta) X_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraLoopTerm {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SolitonFactorSpec {
    Linear(GeneratorSpec),
    Periodic(AlgebraLoopTerm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    FockVerify {
        #[serde(default = "default_cutoff")]
        cutoff: i64,
        #[serde(default)]
        charges: Option<Vec<i64>>,
        #[serde(default = "default_modes")]
        modes: i64,
    },
    EntropyProfile { path: String, grid: GridSpec },
    Bekenstein { path: String, radii: Vec<f64> },
    HsDefect {
        #[serde(rename = "loop")]
        loop_name: String,
        k_window: usize,
        #[serde(default = "default_hs_gap")]
        max_relative_gap: f64,
    },
    Alcove {
        #[serde(default)]
        levels: Option<Vec<u32>>,
    },
    SolitonClassify {
        factors: Vec<SolitonFactorSpec>,
        #[serde(default = "default_soliton_grid")]
        grid: usize,
    },
    ExpOdeCheck {
        generator: Vec<AlgebraLoopTerm>,
        alpha: f64,
        #[serde(default = "default_t")]
        t: f64,
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

fn default_cutoff() -> i64 {
    DEFAULT_CUTOFF
}
fn default_modes() -> i64 {
    2
}
fn default_hs_gap() -> f64 {
    DEFAULT_HS_GAP
}
fn default_soliton_grid() -> usize {
    DEFAULT_SOLITON_GRID
}
fn default_t() -> f64 {
    1.0
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskSpec::FockVerify { .. } => TaskKind::FockVerify,
            TaskSpec::EntropyProfile { .. } => TaskKind::EntropyProfile,
            TaskSpec::Bekenstein { .. } => TaskKind::Bekenstein,
            TaskSpec::HsDefect { .. } => TaskKind::HsDefect,
            TaskSpec::Alcove { .. } => TaskKind::Alcove,
            TaskSpec::SolitonClassify { .. } => TaskKind::SolitonClassify,
            TaskSpec::ExpOdeCheck { .. } => TaskKind::ExpOdeCheck,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    FockVerify,
    EntropyProfile,
    Bekenstein,
    HsDefect,
    Alcove,
    SolitonClassify,
    ExpOdeCheck,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::FockVerify => "fock-verify",
            TaskKind::EntropyProfile => "entropy-profile",
            TaskKind::Bekenstein => "bekenstein",
            TaskKind::HsDefect => "hs-defect",
            TaskKind::Alcove => "alcove",
            TaskKind::SolitonClassify => "soliton-classify",
            TaskKind::ExpOdeCheck => "exp-ode-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Plot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute target of every entropy quadrature.
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    /// Residual bound of the Fock operator identities.
    #[serde(default = "default_identity")]
    pub identity: f64,
}

fn default_quadrature() -> f64 {
    entropy::QUAD_TOL
}
fn default_identity() -> f64 {
    fock::IDENTITY_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quadrature: default_quadrature(),
            identity: default_identity(),
        }
    }
}

fn config_error(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// `tasks[0].grid` becomes `/tasks/0/grid`.
fn to_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let mut rest = part;
        if let Some(i) = rest.find('[') {
            out.push('/');
            out.push_str(&rest[..i]);
            rest = &rest[i..];
            while let Some(end) = rest.find(']') {
                out.push('/');
                out.push_str(&rest[1..end]);
                rest = &rest[end + 1..];
            }
        } else {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}

/// Strict parse and semantic validation, including the Fock capacity check.
pub fn validate_config(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = to_pointer(&e.path().to_string());
        config_error(pointer, e.into_inner().to_string())
    })?;
    check_scenario(&scenario)?;
    Ok(scenario)
}

fn check_scenario(s: &Scenario) -> Result<()> {
    let n = s
        .algebra
        .n()
        .ok_or_else(|| config_error("/algebra/key", format!("unknown algebra key {:?}", s.algebra.key)))?;
    if s.algebra.level == 0 {
        return Err(config_error("/algebra/level", "level must be positive"));
    }
    let alg = build_su(n)?;
    let tol = &s.tolerances;
    for (name, v) in [("quadrature", tol.quadrature), ("identity", tol.identity)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_error(format!("/tolerances/{name}"), "must be positive"));
        }
    }
    let mut names: BTreeMap<&str, &LoopSpec> = BTreeMap::new();
    for (i, lp) in s.loops.iter().enumerate() {
        let at = format!("/loops/{i}");
        if names.insert(lp.name(), lp).is_some() {
            return Err(config_error(format!("{at}/name"), format!("duplicate loop name {:?}", lp.name())));
        }
        build_loop(lp, &alg, s.algebra.level, tol.quadrature).map_err(|e| config_error(at, e.to_string()))?;
    }
    if s.tasks.is_empty() {
        return Err(config_error("/tasks", "at least one task is required"));
    }
    for (i, task) in s.tasks.iter().enumerate() {
        let at = format!("/tasks/{i}");
        let want = |name: &str, line: bool, field: &str| -> Result<()> {
            match names.get(name) {
                Some(LoopSpec::Line { .. }) if line => Ok(()),
                Some(LoopSpec::Circle { .. }) if !line => Ok(()),
                Some(_) => Err(config_error(
                    format!("{at}/{field}"),
                    format!("loop {name:?} must be a {} loop", if line { "line" } else { "circle" }),
                )),
                None => Err(config_error(format!("{at}/{field}"), format!("no loop named {name:?}"))),
            }
        };
        match task {
            TaskSpec::FockVerify { cutoff, charges, modes } => {
                if s.algebra.level != 1 {
                    return Err(config_error(format!("{at}/task"), "the fermionic model is level 1"));
                }
                if *cutoff < 0 {
                    return Err(config_error(format!("{at}/cutoff"), "cutoff must be nonnegative"));
                }
                if *modes < 0 {
                    return Err(config_error(format!("{at}/modes"), "modes must be nonnegative"));
                }
                let estimate = fock::estimate_dimension(n, *cutoff, charges.as_deref());
                let limit = fock::dimension_limit();
                if estimate > limit as u128 {
                    return Err(Error::Capacity {
                        estimate: estimate.min(usize::MAX as u128) as usize,
                        limit,
                    });
                }
            }
            TaskSpec::EntropyProfile { path, grid } => {
                want(path, true, "path")?;
                if grid.points == 0 || !(grid.t_min <= grid.t_max) || !(grid.fd_step > 0.0) {
                    return Err(config_error(format!("{at}/grid"), "need points >= 1, t_min <= t_max, fd_step > 0"));
                }
            }
            TaskSpec::Bekenstein { path, radii } => {
                want(path, true, "path")?;
                if let Some(j) = radii.iter().position(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(config_error(format!("{at}/radii/{j}"), "radius must be positive"));
                }
            }
            TaskSpec::HsDefect { loop_name, max_relative_gap, .. } => {
                want(loop_name, false, "loop")?;
                if !(*max_relative_gap >= 0.0) {
                    return Err(config_error(format!("{at}/max_relative_gap"), "must be nonnegative"));
                }
            }
            TaskSpec::Alcove { levels } => {
                if let Some(j) = levels.iter().flatten().position(|&l| l == 0) {
                    return Err(config_error(format!("{at}/levels/{j}"), "level must be positive"));
                }
            }
            TaskSpec::SolitonClassify { factors, grid } => {
                if *grid < 4 || !grid.is_power_of_two() {
                    return Err(config_error(format!("{at}/grid"), "grid must be a power of two >= 4"));
                }
                build_soliton(factors, &alg).map_err(|e| config_error(format!("{at}/factors"), e.to_string()))?;
            }
            TaskSpec::ExpOdeCheck { generator, alpha, t, grid } => {
                if *grid < 4 || !grid.is_power_of_two() {
                    return Err(config_error(format!("{at}/grid"), "grid must be a power of two >= 4"));
                }
                if !alpha.is_finite() || !t.is_finite() {
                    return Err(config_error(at, "alpha and t must be finite"));
                }
                algebra_loop(generator, &alg).map_err(|e| config_error(format!("{at}/generator"), e.to_string()))?;
            }
        }
    }
    if s.output.formats.is_empty() {
        return Err(config_error("/output/formats", "at least one format is required"));
    }
    Ok(())
}

enum BuiltLoop {
    Line(LinePath),
    Circle(GridLoop),
}

fn build_loop(spec: &LoopSpec, alg: &CompactSimpleAlgebra, level: u32, quad_tol: f64) -> Result<BuiltLoop> {
    match spec {
        LoopSpec::Line { factors, .. } => {
            let factors = factors
                .iter()
                .map(|f| {
                    Ok(LineFactor {
                        generator: f.generator.resolve(alg)?,
                        profile: f.profile.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BuiltLoop::Line(
                LinePath::new(alg.tag(), factors, level as f64)?.with_tolerance(quad_tol)?,
            ))
        }
        LoopSpec::Circle { factors, grid, .. } => {
            let mut out = GridLoop::identity(alg.tag(), *grid);
            for f in factors {
                let x = f.generator.resolve(alg)?;
                let factor = match &f.profile {
                    CircleProfile::Fourier { cos, sin } => {
                        let field = ScalarField::trigonometric(cos, sin);
                        GridLoop::exp(&FourierLoopElement::scalar_times(&field, &alg.wrap(x)?), *grid)?
                    }
                    CircleProfile::Winding { k } => {
                        let full = linalg::exp_anti_hermitian(&(&x * c(2.0 * std::f64::consts::PI * *k as f64, 0.0)))?;
                        if linalg::max_abs_diff(&full, &linalg::identity(alg.n())) > 1e-10 {
                            return Err(Error::Domain("winding factor does not close: exp(2 pi k X) != Id".into()));
                        }
                        GridLoop::from_fn(alg.tag(), *grid, |theta| {
                            linalg::exp_anti_hermitian(&(&x * c(*k as f64 * theta, 0.0))).expect("anti-hermitian")
                        })?
                    }
                };
                out = out.mul(&factor)?;
            }
            Ok(BuiltLoop::Circle(out))
        }
    }
}

fn algebra_loop(terms: &[AlgebraLoopTerm], alg: &CompactSimpleAlgebra) -> Result<FourierLoopElement> {
    let mut x = FourierLoopElement::zero(alg.tag());
    for t in terms {
        let field = ScalarField::trigonometric(&t.cos, &t.sin);
        x = x.add(&FourierLoopElement::scalar_times(&field, &alg.wrap(t.generator.resolve(alg)?)?));
    }
    Ok(x)
}

fn build_soliton(factors: &[SolitonFactorSpec], alg: &CompactSimpleAlgebra) -> Result<SolitonPath> {
    let factors = factors
        .iter()
        .map(|f| {
            Ok(match f {
                SolitonFactorSpec::Linear(g) => SolitonFactor::Linear {
                    generator: g.resolve(alg)?,
                },
                SolitonFactorSpec::Periodic(t) => SolitonFactor::Periodic {
                    generator: t.generator.resolve(alg)?,
                    profile: ScalarField::trigonometric(&t.cos, &t.sin),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SolitonPath::new(alg.tag(), factors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: String,
    pub status: Status,
    pub checks: Vec<CheckRecord>,
    /// Error message of a task that could not complete.
    pub message: Option<String>,
    pub artifacts: Vec<String>,
    /// Wall-clock seconds; not serialized so artifacts stay byte-stable.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub tasks: Vec<TaskReport>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.tasks.iter().all(|t| t.status == Status::Pass)
    }

    /// `0` when every task passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub fail_fast: bool,
    pub parallel: bool,
}

/// A named in-memory artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

struct TaskOutcome {
    checks: Vec<CheckRecord>,
    artifacts: Vec<Artifact>,
}

fn check(identity: &str, block: impl Into<String>, residual: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        identity: identity.into(),
        block: block.into(),
        residual_max: residual,
        tolerance,
        pass: residual <= tolerance,
    }
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

fn run_task(s: &Scenario, index: usize) -> Result<TaskOutcome> {
    let n = s.algebra.n().ok_or_else(|| config_error("/algebra/key", "unknown algebra"))?;
    let alg = build_su(n)?;
    let level = s.algebra.level;
    let tol = s.tolerances;
    let task = &s.tasks[index];
    let stem = format!("{index:02}-{}", task.kind().name());
    let want = &s.output.formats;
    let find = |name: &str| -> Result<BuiltLoop> {
        let spec = s
            .loops
            .iter()
            .find(|l| l.name() == name)
            .ok_or_else(|| config_error("/loops", format!("no loop named {name:?}")))?;
        build_loop(spec, &alg, level, tol.quadrature)
    };
    let mut artifacts = Vec::new();
    let checks = match task {
        TaskSpec::FockVerify { cutoff, charges, modes } => {
            let space = fock::TruncatedFockSpace::new(n, *cutoff, charges.clone())?;
            let mut records = fock::verification_suite(&space, &alg, *modes)?;
            for r in &mut records {
                r.tolerance = tol.identity;
                r.pass = r.residual_max <= tol.identity;
            }
            records
        }
        TaskSpec::EntropyProfile { path, grid } => {
            let BuiltLoop::Line(p) = find(path)? else {
                return Err(Error::Domain(format!("{path} is not a line loop")));
            };
            let profile = entropy::qnec_profile_unchecked(&p, grid)?;
            for &f in want {
                artifacts.extend(profile_artifacts(&profile, f, &stem)?);
            }
            let m = profile.t.len().max(1);
            let verdict = profile.verify();
            let (rel, _) = profile.fd_relative_error();
            let mut records = vec![
                check("analytic vs finite-difference S''", "profile", rel, entropy::FD_REL_TOL),
                check(
                    "second differences of S >= -1e-8",
                    "profile",
                    (-profile.min_second_difference()).max(0.0),
                    entropy::PROFILE_TOL,
                ),
            ];
            if let Err(Error::Verification { what, residual, tolerance, at }) = verdict {
                records.push(check(
                    &what,
                    at.map(|t| format!("t = {t}")).unwrap_or_else(|| format!("{m} points")),
                    residual,
                    tolerance,
                ));
                records.last_mut().expect("just pushed").pass = false;
            } else {
                verdict?;
            }
            let (t1, t2) = (grid.t_min, grid.t_max);
            let e = profile.total_energy;
            let r = entropy::sum_rule_residual(&p, t1, t2)?.abs();
            records.push(check(
                "sum rule (S1 - S2) + (Sbar2 - Sbar1) = (t2 - t1) 2 pi E",
                format!("t1 = {t1}, t2 = {t2}"),
                r,
                1e-8 * (2.0 * std::f64::consts::PI * e.abs()).max(1.0),
            ));
            records
        }
        TaskSpec::Bekenstein { path, radii } => {
            let BuiltLoop::Line(p) = find(path)? else {
                return Err(Error::Domain(format!("{path} is not a line loop")));
            };
            let mut rows = Vec::new();
            let mut records = Vec::new();
            for &r in radii {
                let b = entropy::bekenstein_check(&p, r)?;
                records.push(check(
                    "S(-r, r) <= pi r E",
                    format!("r = {r}"),
                    (b.s_interval - b.pi_r_e).max(0.0),
                    p.quad_tol,
                ));
                rows.push(serde_json::json!({ "r": r, "report": b }));
            }
            if want.contains(&Format::Json) {
                artifacts.push(Artifact {
                    name: format!("{stem}.json"),
                    bytes: json_bytes(&rows),
                });
            }
            records
        }
        TaskSpec::HsDefect { loop_name, k_window, max_relative_gap } => {
            let BuiltLoop::Circle(g) = find(loop_name)? else {
                return Err(Error::Domain(format!("{loop_name} is not a circle loop")));
            };
            let report = fock::hs_defect(&g.fourier()?, *k_window);
            if want.contains(&Format::Json) {
                artifacts.push(Artifact {
                    name: format!("{stem}.json"),
                    bytes: json_bytes(&report),
                });
            }
            vec![check(
                "truncated |[P, M]|_2^2 vs sum |k| |gamma_k|^2",
                format!("K = {k_window}"),
                report.relative_gap,
                *max_relative_gap,
            )]
        }
        TaskSpec::Alcove { levels } => {
            let levels = levels.clone().unwrap_or_else(|| vec![level]);
            let data = levels
                .iter()
                .map(|&l| LevelData::su(n, l))
                .collect::<Result<Vec<_>>>()?;
            if want.contains(&Format::Csv) {
                artifacts.push(Artifact {
                    name: format!("{stem}.csv"),
                    bytes: affine_data::alcove_csv(&data)?.into_bytes(),
                });
            }
            let mut records = Vec::new();
            let mut reports = Vec::new();
            for d in &data {
                let rep = affine_data::lemma1_bounds(d);
                let block = format!("su{n} level {}", d.level);
                records.push(check("c >= 1", block.clone(), if rep.c_ge_1 { 0.0 } else { 1.0 }, 0.0));
                let bound = rep.h_max_bound.unwrap_or(f64::INFINITY);
                let h = rep.h_max.map(|h| *h.numer() as f64 / *h.denom() as f64).unwrap_or(0.0);
                records.push(check("h <= l^2 / (4 m^2 (l + g))", block, (h - bound).max(0.0), 1e-12 * bound.max(1.0)));
                reports.push(rep);
            }
            if want.contains(&Format::Json) {
                artifacts.push(Artifact {
                    name: format!("{stem}.json"),
                    bytes: json_bytes(&reports),
                });
            }
            records
        }
        TaskSpec::SolitonClassify { factors, grid } => {
            let zeta = build_soliton(factors, &alg)?;
            let h = soliton::jump(&zeta)?;
            let verdict = soliton::extendability(&zeta);
            let mut records = vec![check("jump independent of x", "32 points", soliton::jump_residual(&zeta), soliton::SOLITON_TOL)];
            for t in [0.5, 1.0, 2.0] {
                soliton::zeta_t(&zeta, t, *grid)?;
                let r = soliton::one_parameter_residual(&zeta, t, 0.75, *grid);
                records.push(check("zeta_(t+s) = zeta_t R_t.zeta_s", format!("t = {t}, s = 0.75"), r, soliton::SOLITON_TOL));
            }
            let rot = soliton::rotation_cocycle_2pi(&zeta, *grid)?;
            if verdict.central {
                let constant = GridLoop::constant(alg.tag(), *grid, &h)?;
                records.push(check("central jump: zeta_2pi = h", "grid", rot.sup_distance(&constant), soliton::SOLITON_TOL));
            }
            let out = SolitonReport {
                jump: h.iter_rows(),
                verdict,
            };
            if want.contains(&Format::Json) {
                artifacts.push(Artifact {
                    name: format!("{stem}.json"),
                    bytes: json_bytes(&out),
                });
            }
            records
        }
        TaskSpec::ExpOdeCheck { generator, alpha, t, grid } => {
            let x = algebra_loop(generator, &alg)?;
            let field = ScalarField::constant(1.0);
            let rep = loops::semidirect_exp_report(&x, *alpha, &field, *t, *grid)?;
            let ode = loops::semidirect_ode(&x, *alpha, &field, *t, *grid, loops::SEMIDIRECT_DT)?;
            let flow = loops::semidirect_flow(&x, *alpha, *t, *grid)?;
            let block = format!("alpha = {alpha}, t = {t}, N = {grid}");
            let records = vec![
                check("closed form exp(t X_(alpha t)) vs integrated flow", block.clone(), rep.ode_residual, loops::SEMIDIRECT_TOL),
                check("characteristic solution vs integrated flow", block, flow.sup_distance(&ode), loops::SEMIDIRECT_TOL),
            ];
            if want.contains(&Format::Json) {
                artifacts.push(Artifact {
                    name: format!("{stem}.json"),
                    bytes: json_bytes(&records),
                });
            }
            records
        }
    };
    Ok(TaskOutcome { checks, artifacts })
}

/// Jump matrix as rows of `[re, im]` pairs, plus the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonReport {
    pub jump: Vec<Vec<[f64; 2]>>,
    pub verdict: soliton::SolitonVerdict,
}

trait Rows {
    fn iter_rows(&self) -> Vec<Vec<[f64; 2]>>;
}

impl Rows for CMatrix {
    fn iter_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect()
    }
}

fn finish(index: usize, s: &Scenario, started: Instant, res: Result<TaskOutcome>) -> (TaskReport, Vec<Artifact>) {
    let task = s.tasks[index].kind().name().to_string();
    let seconds = started.elapsed().as_secs_f64();
    match res {
        Ok(out) => {
            let status = if out.checks.iter().all(|c| c.pass) { Status::Pass } else { Status::Fail };
            let names = out.artifacts.iter().map(|a| a.name.clone()).collect();
            (
                TaskReport {
                    index,
                    task,
                    status,
                    checks: out.checks,
                    message: None,
                    artifacts: names,
                    seconds,
                },
                out.artifacts,
            )
        }
        Err(e) => (
            TaskReport {
                index,
                task,
                status: Status::Error,
                checks: Vec::new(),
                message: Some(e.to_string()),
                artifacts: Vec::new(),
                seconds,
            },
            Vec::new(),
        ),
    }
}

/// Runs the tasks in declared order (or concurrently with `parallel`; then
/// `fail_fast` has no effect) and returns the report with every artifact in
/// memory, the report itself last as `report.json`.
pub fn run_scenario(s: &Scenario, opts: RunOptions) -> (RunReport, Vec<Artifact>) {
    let mut done: Vec<(TaskReport, Vec<Artifact>)> = Vec::new();
    if opts.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..s.tasks.len())
                .map(|i| {
                    scope.spawn(move || {
                        let started = Instant::now();
                        finish(i, s, started, run_task(s, i))
                    })
                })
                .collect();
            for h in handles {
                done.push(h.join().expect("task thread panicked"));
            }
        });
    } else {
        for i in 0..s.tasks.len() {
            let started = Instant::now();
            let out = finish(i, s, started, run_task(s, i));
            let failed = out.0.status != Status::Pass;
            done.push(out);
            if failed && opts.fail_fast {
                break;
            }
        }
    }
    let mut artifacts = Vec::new();
    let mut tasks = Vec::new();
    for (report, files) in done {
        tasks.push(report);
        artifacts.extend(files);
    }
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        tasks,
    };
    artifacts.push(Artifact {
        name: "report.json".into(),
        bytes: json_bytes(&report),
    });
    (report, artifacts)
}

/// Writes artifacts under `dir` one after another and returns their paths.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.bytes)?;
            Ok(p)
        })
        .collect()
}

pub const PROFILE_COLUMNS: [&str; 7] = ["t", "S", "S_bar", "S_prime", "S_dd_analytic", "S_dd_fd", "density"];

fn profile_columns(p: &EntropyProfile) -> [&[f64]; 7] {
    [&p.t, &p.s, &p.s_bar, &p.s_prime, &p.s_dd_analytic, &p.s_dd_fd, &p.density]
}

/// CSV with the fixed column order; an empty grid gives the header alone.
pub fn profile_csv(p: &EntropyProfile) -> String {
    let mut out = PROFILE_COLUMNS.join(",");
    out.push('\n');
    let cols = profile_columns(p);
    for i in 0..p.t.len() {
        let row: Vec<String> = cols.iter().map(|c| format!("{:?}", c[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Artifacts for one format. `Plot` gives one two-column `t value` file per
/// curve.
pub fn profile_artifacts(p: &EntropyProfile, format: Format, stem: &str) -> Result<Vec<Artifact>> {
    Ok(match format {
        Format::Csv => vec![Artifact {
            name: format!("{stem}.csv"),
            bytes: profile_csv(p).into_bytes(),
        }],
        Format::Json => vec![Artifact {
            name: format!("{stem}.json"),
            bytes: json_bytes(p),
        }],
        Format::Plot => {
            let cols = profile_columns(p);
            PROFILE_COLUMNS
                .iter()
                .zip(cols)
                .skip(1)
                .map(|(name, col)| {
                    let mut s = format!("# t {name}\n");
                    for (t, v) in p.t.iter().zip(col) {
                        s.push_str(&format!("{t:?} {v:?}\n"));
                    }
                    Artifact {
                        name: format!("{stem}-{name}.dat"),
                        bytes: s.into_bytes(),
                    }
                })
                .collect()
        }
    })
}

/// Writes a profile in the given format to `path` (the stem for `Plot`).
pub fn export_profile(p: &EntropyProfile, format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Domain(format!("bad output path {}", path.display())))?;
    match format {
        Format::Csv | Format::Json => {
            let a = profile_artifacts(p, format, stem)?;
            std::fs::create_dir_all(dir)?;
            std::fs::write(path, &a[0].bytes)?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Plot => write_artifacts(dir, &profile_artifacts(p, format, stem)?),
    }
}

/// Reads a profile written as JSON.
pub fn read_profile_json(text: &str) -> Result<EntropyProfile> {
    Ok(serde_json::from_str(text)?)
}
