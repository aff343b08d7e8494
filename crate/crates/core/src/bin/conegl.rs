use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conegl::experiment::{self, ExperimentConfig, ExperimentError, InitStrategy};

#[derive(Parser)]
#[command(name = "conegl", version, about = "Ginzburg-Landau vortices on a cone: batch experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the GL energy for each ε and write field, energy, vortex and plot artifacts.
    Minimize(Overrides),
    /// Tabulate m(d, α) in closed form and by brute force.
    Mtable(Overrides),
    /// Grow random admissible ball families and check the growth invariants.
    Growth(Overrides),
    /// Minimize the renormalized energy W and export its landscape.
    Renorm(Overrides),
    /// Compute the core constants γ and γ₀(d̄, α).
    CoreEnergy(Overrides),
    /// Fit E against log(1/ε) over prior minimize artifacts.
    Fit(Overrides),
    /// Print the default configuration as JSON.
    DefaultConfig,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Ramp,
    TestField,
    Best,
}

#[derive(Args)]
struct Overrides {
    /// JSON configuration file; flags override its fields.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Cone angle in radians.
    #[arg(long, conflicts_with = "alpha_over_pi")]
    alpha: Option<f64>,
    /// Cone angle in units of π.
    #[arg(long)]
    alpha_over_pi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dbar: Option<i64>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<Init>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(a) = self.alpha_over_pi {
            cfg.alpha = a * std::f64::consts::PI;
        }
        if let Some(d) = self.dbar {
            cfg.dbar = d;
        }
        if let Some(e) = &self.eps {
            cfg.epsilons = e.clone();
        }
        if let Some(n) = self.n_r {
            cfg.grid.n_r = n;
        }
        if let Some(n) = self.n_theta {
            cfg.grid.n_theta = n;
        }
        if let Some(r) = self.r_min {
            cfg.grid.r_min = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max_iters {
            cfg.solver.max_iters = m;
        }
        if let Some(i) = self.init {
            cfg.init = match i {
                Init::Ramp => InitStrategy::Ramp,
                Init::TestField => InitStrategy::TestField,
                Init::Best => InitStrategy::Best,
            };
        }
        if let Some(o) = &self.output {
            cfg.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn finish(violations: Vec<String>) -> Result<(), ExperimentError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ExperimentError::Invariants(violations))
    }
}

fn run(cmd: Command) -> Result<(), ExperimentError> {
    match cmd {
        Command::Minimize(o) => {
            let cfg = o.resolve()?;
            let s = experiment::run_minimize(&cfg)?;
            for r in &s.runs {
                println!("eps={} E={:.10} iters={} init={:?}", r.epsilon, r.energy.total, r.iterations, r.init);
            }
            finish(s.violations)
        }
        Command::Mtable(o) => finish(experiment::run_mtable(&o.resolve()?)?),
        Command::Growth(o) => finish(experiment::run_growth(&o.resolve()?)?),
        Command::Renorm(o) => {
            let r = experiment::run_renorm(&o.resolve()?)?;
            println!("case {:?}  W = {:.12}  off-tip {:?}", r.case, r.minimum.value, r.offtip_cone_positions);
            Ok(())
        }
        Command::CoreEnergy(o) => {
            let r = experiment::run_core_energy(&o.resolve()?)?;
            println!("gamma0 = {:.8} ({:?}), gamma(eps) = {:?}", r.gamma0.value, r.gamma0.problem, r.gamma);
            Ok(())
        }
        Command::Fit(o) => {
            let r = experiment::run_fit(&o.resolve()?)?;
            println!(
                "slope {:.6} (pi*m = {:.6}, rel err {:.3}), intercept {:.6}",
                r.fit.slope, r.predicted_slope, r.relative_slope_error, r.fit.intercept
            );
            Ok(())
        }
        Command::DefaultConfig => {
            println!("{}", ExperimentConfig::default().to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
