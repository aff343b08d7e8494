//! Batch experiments: a JSON configuration in, reproducible artifact
//! directories out. Every record embeds the resolved configuration.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balls::{self, GrowthTrajectory};
use crate::core_energy::{self, CoreGrid, Gamma0Estimate};
use crate::degree_cost::{m_closed, m_table, m_table_csv};
use crate::field::{EnergyBreakdown, RadialSpacing, SectorGrid, TangentField};
use crate::geometry::ConeParams;
use crate::minimizer::{self, canonical_boundary, initial_field, SolverOptions};
use crate::plot;
use crate::renorm::{self, DiscBoundary, MinimizeWOptions, RenormProblem, TestFieldOptions};
use crate::vortex::{self, ExpansionFit, VortexSet};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable prepended to relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "CONEGL_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("invariant checks failed: {}", .0.join("; "))]
    Invariants(Vec<String>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    /// Process exit status: 1 for validation errors, 2 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_min: f64,
    pub spacing: RadialSpacing,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_r: 192, n_theta: 384, r_min: 1e-6, spacing: RadialSpacing::Graded { ratio: 1.2 } }
    }
}

impl GridConfig {
    pub fn build(&self, cone: ConeParams) -> Result<SectorGrid, ExperimentError> {
        SectorGrid::with_spacing(cone, self.n_r, self.n_theta, self.r_min, 1.0, self.spacing)
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

/// Starting field for the GL minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Boundary data ramped inward, plus the solver's seeded noise.
    Ramp,
    /// The conformal test field of the W-minimizing configuration.
    TestField,
    /// Both, keeping the lower final energy.
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MTableConfig {
    pub d_min: i64,
    pub d_max: i64,
    /// Cone angles in units of π.
    pub alphas_over_pi: Vec<f64>,
}

impl Default for MTableConfig {
    fn default() -> Self {
        Self { d_min: -5, d_max: 5, alphas_over_pi: (1..12).map(|k| k as f64 / 6.0).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub families: usize,
    pub t_final: f64,
    pub nesting_samples: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { families: 10, t_final: 3.0, nesting_samples: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenormConfig {
    pub starts: usize,
    pub landscape_n: usize,
    /// Also build the test field for each ε and record its energy.
    pub test_field: bool,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self { starts: 16, landscape_n: 101, test_field: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoreConfig {
    /// Decreasing ε sequence for the γ₀ extrapolation.
    pub epsilons: Vec<f64>,
    pub grid: CoreGrid,
}

impl Default for CoreConfig {
    fn default() -> Self {
        Self { epsilons: vec![0.2, 0.1, 0.05, 0.025], grid: CoreGrid::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Cone angle in radians.
    pub alpha: f64,
    pub dbar: i64,
    pub epsilons: Vec<f64>,
    pub grid: GridConfig,
    pub solver: SolverOptions,
    pub init: InitStrategy,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub mtable: MTableConfig,
    pub growth: GrowthConfig,
    pub renorm: RenormConfig,
    pub core: CoreConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            alpha: std::f64::consts::PI,
            dbar: 2,
            epsilons: vec![0.1, 0.07, 0.05, 0.035],
            grid: GridConfig::default(),
            solver: SolverOptions { init_noise: 0.05, ..SolverOptions::default() },
            init: InitStrategy::Best,
            output_dir: PathBuf::from("out"),
            seed: 0,
            mtable: MTableConfig::default(),
            growth: GrowthConfig::default(),
            renorm: RenormConfig::default(),
            core: CoreConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn cone(&self) -> Result<ConeParams, ExperimentError> {
        ConeParams::new(self.alpha).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let cone = self.cone()?;
        self.grid.build(cone)?;
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
            return bad(format!("epsilons must be non-empty and in (0, 0.5): {:?}", self.epsilons));
        }
        if self.mtable.d_min > self.mtable.d_max {
            return bad("mtable.d_min exceeds d_max".into());
        }
        if self.mtable.alphas_over_pi.iter().any(|a| ConeParams::new(a * std::f64::consts::PI).is_err()) {
            return bad("mtable.alphas_over_pi must lie in (0, 2)".into());
        }
        if !(self.growth.t_final > 0.0 && self.growth.t_final.is_finite()) {
            return bad("growth.t_final must be positive".into());
        }
        if self.solver.max_iters == 0 || !(self.solver.grad_tol > 0.0) {
            return bad("solver needs max_iters > 0 and grad_tol > 0".into());
        }
        Ok(())
    }

    /// `output_dir`, below `$CONEGL_OUTPUT_ROOT` when relative and the
    /// variable is set.
    pub fn resolved_output(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Record<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    config: &'a ExperimentConfig,
    result: T,
}

fn write_record<T: Serialize>(path: &Path, kind: &str, cfg: &ExperimentConfig, result: T) -> Result<(), ExperimentError> {
    let rec = Record { schema_version: SCHEMA_VERSION, kind, config: cfg, result };
    let text = serde_json::to_string_pretty(&rec).expect("records serialize");
    fs::write(path, text + "\n").map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Directory name for one ε run.
pub fn eps_dir(eps: f64) -> String {
    format!("eps_{eps:.6}")
}

/// One GL minimization.
#[derive(Debug, Clone)]
pub struct GlRun {
    pub epsilon: f64,
    pub field: TangentField,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub init: InitStrategy,
    /// Energy of the test field when it was built.
    pub test_field_energy: Option<f64>,
}

/// Minimizes with canonical boundary data from the configured starting field.
pub fn solve_gl(
    cone: ConeParams,
    grid: &SectorGrid,
    dbar: i64,
    epsilon: f64,
    solver: &SolverOptions,
    init: InitStrategy,
) -> Result<GlRun, ExperimentError> {
    let bc = canonical_boundary(dbar, grid);
    let run = |start: &TangentField, opts: &SolverOptions, used: InitStrategy| -> Result<GlRun, ExperimentError> {
        let (out, converged) = match minimizer::minimize(start, &bc, epsilon, opts) {
            Ok(o) => (o, true),
            Err(e) => (e.last_iterate().ok_or_else(|| ExperimentError::Numerical("GL minimization failed".into()))?, false),
        };
        Ok(GlRun {
            epsilon,
            iterations: out.diagnostics.iterations,
            field: out.field,
            energy: out.energy,
            converged,
            init: used,
            test_field_energy: None,
        })
    };
    let ramp = || run(&initial_field(&bc, grid), solver, InitStrategy::Ramp);
    let from_test = || -> Result<GlRun, ExperimentError> {
        let problem = RenormProblem::new(cone, DiscBoundary::canonical(dbar)).map_err(num)?;
        let cfg = problem.minimize(&MinimizeWOptions::default()).map_err(num)?.config;
        let tf = renorm::build_test_field(&problem, &cfg, grid, epsilon, &TestFieldOptions::default()).map_err(num)?;
        let quiet = SolverOptions { init_noise: 0.0, ..*solver };
        let mut r = run(&tf.field, &quiet, InitStrategy::TestField)?;
        r.test_field_energy = Some(tf.field.gl_energy(epsilon).total);
        Ok(r)
    };
    match init {
        InitStrategy::Ramp => ramp(),
        InitStrategy::TestField => from_test(),
        InitStrategy::Best => {
            let a = from_test();
            let b = ramp()?;
            match a {
                Ok(mut a) => {
                    let tf = a.test_field_energy;
                    if b.energy.total < a.energy.total {
                        a = GlRun { test_field_energy: tf, ..b };
                    }
                    Ok(a)
                }
                Err(_) => Ok(b),
            }
        }
    }
}

fn num(e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub epsilon: f64,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub init: InitStrategy,
    pub test_field_energy: Option<f64>,
    /// `π m(d̄, α) log(1/ε)`.
    pub leading_term: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VortexRecord {
    pub epsilon: f64,
    pub vortices: Option<VortexSet>,
    pub error: Option<String>,
    pub tip_modulus: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeSummary {
    pub runs: Vec<EnergyRecord>,
    pub violations: Vec<String>,
}

pub fn run_minimize(cfg: &ExperimentConfig) -> Result<MinimizeSummary, ExperimentError> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let grid = cfg.grid.build(cone)?;
    let root = cfg.resolved_output().join("minimize");
    let solver = SolverOptions { seed: cfg.seed, ..cfg.solver };
    let mut runs = Vec::new();
    let mut violations = Vec::new();
    for &eps in &cfg.epsilons {
        let dir = root.join(eps_dir(eps));
        create_dir(&dir)?;
        let run = solve_gl(cone, &grid, cfg.dbar, eps, &solver, cfg.init)?;
        let path = dir.join("field.txt");
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        run.field.write_text(eps, BufWriter::new(file)).map_err(io_err(&path))?;

        let rec = EnergyRecord {
            epsilon: eps,
            energy: run.energy,
            iterations: run.iterations,
            converged: run.converged,
            init: run.init,
            test_field_energy: run.test_field_energy,
            leading_term: std::f64::consts::PI * m_closed(cfg.dbar, &cone) * (1.0 / eps).ln(),
        };
        if !run.converged {
            violations.push(format!("eps={eps}: solver did not converge"));
        }
        write_record(&dir.join("energy.json"), "energy", cfg, &rec)?;

        let det = vortex::detect_vortices(&run.field, eps);
        if let Err(e) = &det {
            violations.push(format!("eps={eps}: {e}"));
        }
        let vrec = VortexRecord {
            epsilon: eps,
            error: det.as_ref().err().map(|e| e.to_string()),
            vortices: det.ok(),
            tip_modulus: run.field.min_modulus_within(3.0 * eps.sqrt()),
        };
        write_record(&dir.join("vortices.json"), "vortices", cfg, &vrec)?;

        let png = dir.join("modulus.png");
        plot::modulus_png(&run.field, 512).save(&png).map_err(|e| num(format!("{}: {e}", png.display())))?;
        let svg = dir.join("phase.svg");
        fs::write(&svg, plot::phase_quiver_svg(&run.field, 24)).map_err(io_err(&svg))?;
        runs.push(rec);
    }
    Ok(MinimizeSummary { runs, violations })
}

pub fn run_mtable(cfg: &ExperimentConfig) -> Result<Vec<String>, ExperimentError> {
    cfg.validate()?;
    let cones: Vec<ConeParams> = cfg
        .mtable
        .alphas_over_pi
        .iter()
        .map(|a| ConeParams::new(a * std::f64::consts::PI))
        .collect::<Result<_, _>>()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let rows = m_table(cfg.mtable.d_min..=cfg.mtable.d_max, &cones);
    let root = cfg.resolved_output();
    create_dir(&root)?;
    let path = root.join("mtable.csv");
    fs::write(&path, m_table_csv(&rows)).map_err(io_err(&path))?;
    let violations: Vec<String> = rows
        .iter()
        .filter(|r| (r.closed - r.bruteforce).abs() > 1e-12)
        .map(|r| format!("d={}, alpha={}: closed {} != brute force {}", r.d, r.alpha, r.closed, r.bruteforce))
        .collect();
    write_record(&root.join("mtable.json"), "mtable", cfg, &rows)?;
    Ok(violations)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub trajectory: GrowthTrajectory,
    pub lower_bound: f64,
    pub violations: Vec<String>,
}

pub fn run_growth(cfg: &ExperimentConfig) -> Result<Vec<String>, ExperimentError> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    for _ in 0..cfg.growth.families {
        let fam = balls::random_family(&cone, &mut rng);
        let trajectory = balls::grow(&fam, cfg.growth.t_final);
        let violations = trajectory.invariant_violations(cfg.growth.nesting_samples, &mut rng);
        let lower_bound = balls::lower_bound_ledger(&trajectory, &cone);
        records.push(GrowthRecord { trajectory, lower_bound, violations });
    }
    let root = cfg.resolved_output();
    create_dir(&root)?;
    write_record(&root.join("growth.json"), "growth", cfg, &records)?;
    Ok(records.into_iter().flat_map(|r| r.violations).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFieldRecord {
    pub epsilon: f64,
    pub energy: Option<EnergyBreakdown>,
    pub blend_energy: Option<f64>,
    pub leading_term: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenormRecord {
    pub case: renorm::Case,
    pub tie_cases: Vec<renorm::Case>,
    pub minimum: renorm::MinimizeWReport,
    pub offtip_cone_positions: Vec<crate::geometry::ConePoint>,
    pub test_fields: Vec<TestFieldRecord>,
}

pub fn run_renorm(cfg: &ExperimentConfig) -> Result<RenormRecord, ExperimentError> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let problem = RenormProblem::new(cone, DiscBoundary::canonical(cfg.dbar)).map_err(num)?;
    let opts = MinimizeWOptions { starts: cfg.renorm.starts, seed: cfg.seed, ..MinimizeWOptions::default() };
    let minimum = problem.minimize(&opts).map_err(num)?;
    let root = cfg.resolved_output().join("renorm");
    create_dir(&root)?;
    let n = cfg.renorm.landscape_n;
    if n > 0 && !minimum.config.offtip().is_empty() {
        let pts = problem.landscape(&minimum.config, n);
        let csv = root.join("landscape.csv");
        fs::write(&csv, renorm::landscape_csv(&pts)).map_err(io_err(&csv))?;
        let png = root.join("landscape.png");
        plot::landscape_png(&pts, n, 4).save(&png).map_err(|e| num(format!("{}: {e}", png.display())))?;
    }
    let mut test_fields = Vec::new();
    if cfg.renorm.test_field {
        let grid = cfg.grid.build(cone)?;
        for &eps in &cfg.epsilons {
            let leading_term = std::f64::consts::PI * m_closed(cfg.dbar, &cone) * (1.0 / eps).ln();
            let rec = match renorm::build_test_field(&problem, &minimum.config, &grid, eps, &TestFieldOptions::default()) {
                Ok(tf) => TestFieldRecord {
                    epsilon: eps,
                    energy: Some(tf.field.gl_energy(eps)),
                    blend_energy: Some(tf.blend_energy),
                    leading_term,
                    error: None,
                },
                Err(e) => TestFieldRecord { epsilon: eps, energy: None, blend_energy: None, leading_term, error: Some(e.to_string()) },
            };
            test_fields.push(rec);
        }
    }
    let record = RenormRecord {
        case: problem.case,
        tie_cases: renorm::tie_cases(cfg.dbar, &cone),
        offtip_cone_positions: minimum.config.cone_positions(&cone).map_err(num)?,
        minimum,
        test_fields,
    };
    write_record(&root.join("renorm.json"), "renorm", cfg, &record)?;
    Ok(record)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreRecord {
    pub gamma: Vec<(f64, f64)>,
    pub gamma0: Gamma0Estimate,
}

pub fn run_core_energy(cfg: &ExperimentConfig) -> Result<CoreRecord, ExperimentError> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let gamma = cfg
        .core
        .epsilons
        .iter()
        .map(|&e| core_energy::gamma_radial(e).map(|g| (e, g)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(num)?;
    let opts = SolverOptions { init_noise: 0.0, ..cfg.solver };
    let gamma0 = core_energy::gamma0_on(cfg.dbar, &cone, &cfg.core.epsilons, &opts, &cfg.core.grid).map_err(num)?;
    let rec = CoreRecord { gamma, gamma0 };
    let root = cfg.resolved_output();
    create_dir(&root)?;
    write_record(&root.join("core_energy.json"), "core_energy", cfg, &rec)?;
    Ok(rec)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRecord {
    pub runs: Vec<(f64, f64)>,
    pub fit: ExpansionFit,
    /// `π m(d̄, α)`, the predicted slope.
    pub predicted_slope: f64,
    pub relative_slope_error: f64,
}

/// Fits `E` against `log(1/ε)` over the `energy.json` records found under
/// `<output>/minimize/`.
pub fn run_fit(cfg: &ExperimentConfig) -> Result<FitRecord, ExperimentError> {
    cfg.validate()?;
    let cone = cfg.cone()?;
    let root = cfg.resolved_output();
    let dir = root.join("minimize");
    let mut runs = Vec::new();
    let entries = fs::read_dir(&dir).map_err(io_err(&dir))?;
    for entry in entries {
        let path = entry.map_err(io_err(&dir))?.path().join("energy.json");
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(num)?;
        let rec: EnergyRecord = serde_json::from_value(v["result"].clone()).map_err(num)?;
        runs.push((rec.epsilon, rec.energy.total));
    }
    runs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let fit = vortex::fit_expansion(&runs).map_err(num)?;
    let predicted_slope = std::f64::consts::PI * m_closed(cfg.dbar, &cone);
    let rec = FitRecord { relative_slope_error: (fit.slope - predicted_slope).abs() / predicted_slope, runs, fit, predicted_slope };
    write_record(&root.join("fit.json"), "fit", cfg, &rec)?;
    Ok(rec)
}
