//! Command-line front end; see `carma-spectral --help`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carma_spectral::cli::{self, config::study_drivers, Format, RunConfig};
use carma_spectral::{CarmaError, DriverSpec, KFormula, Result};

#[derive(Parser)]
#[command(name = "carma-spectral", version, about = "Truncated Fourier transforms of CARMA processes on irregular grids")]
struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in parameter set: paper-car1 or paper-carma21.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "CARMA_SPECTRAL_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Driver(s) with the study's scaling, replacing the configured ones.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    driver: Vec<DriverChoice>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverChoice {
    Brownian,
    Vg,
    Poisson2,
    Zero,
}

impl DriverChoice {
    fn spec(self) -> DriverSpec {
        let study = study_drivers();
        match self {
            Self::Brownian => study[0],
            Self::Vg => study[1],
            Self::Poisson2 => study[2],
            Self::Zero => DriverSpec::zero(),
        }
    }
}

#[derive(Args, Default)]
struct GridArgs {
    /// Horizon T; replaces the ladder with a single setting.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    mesh: Option<f64>,
    /// Named levels t10, t50, t100.
    #[arg(long, value_delimiter = ',')]
    ladder: Vec<String>,
    /// Number of paths.
    #[arg(long)]
    paths: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral density and transfer function on a frequency grid.
    Spectral {
        #[arg(long, allow_hyphen_values = true)]
        omega_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        omega_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Simulated sample paths on random grids.
    Simulate(GridArgs),
    /// Monte Carlo study of the limit laws.
    Mc {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        frequencies: Vec<f64>,
        #[arg(long, value_enum)]
        k_formula: Option<KChoice>,
    },
    /// MC mean of |T|^2 against the finite-horizon formula.
    Covcheck {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
        #[arg(long, value_enum)]
        k_formula: Option<KChoice>,
    },
    /// RMS error against the fine-grid estimate along an h_max ladder.
    Convergence {
        #[arg(long)]
        horizon: Option<f64>,
        /// Strictly decreasing h_max values.
        #[arg(long, value_delimiter = ',')]
        h_ladder: Vec<f64>,
        #[arg(long)]
        mesh: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        frequencies: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KChoice {
    Derived,
    AsPrinted,
}

impl From<KChoice> for KFormula {
    fn from(k: KChoice) -> Self {
        match k {
            KChoice::Derived => KFormula::Derived,
            KChoice::AsPrinted => KFormula::AsPrinted,
        }
    }
}

fn apply_grid(cfg: &mut RunConfig, g: &GridArgs) {
    if g.horizon.is_some() || g.h_max.is_some() {
        cfg.mc.ladder.clear();
    }
    if let Some(t) = g.horizon {
        cfg.grid.horizon = t;
    }
    if let Some(h) = g.h_max {
        cfg.grid.h_max = h;
    }
    if let Some(m) = g.mesh {
        cfg.grid.mesh = m;
    }
    if !g.ladder.is_empty() {
        cfg.mc.ladder = g.ladder.clone();
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => return Err(CarmaError::Config("--config and --preset are exclusive".into())),
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.master_seed = seed;
    }
    if !cli.driver.is_empty() {
        cfg.drivers = cli.driver.iter().map(|d| d.spec()).collect();
    }
    match &cli.command {
        Some(Command::Spectral { omega_min, omega_max, step }) => {
            let s = &mut cfg.spectral;
            s.omega_min = omega_min.unwrap_or(s.omega_min);
            s.omega_max = omega_max.unwrap_or(s.omega_max);
            s.step = step.unwrap_or(s.step);
        }
        Some(Command::Simulate(g)) => {
            apply_grid(&mut cfg, g);
            cfg.simulate.paths = g.paths.unwrap_or(cfg.simulate.paths);
        }
        Some(Command::Mc { grid, frequencies, k_formula }) => {
            apply_grid(&mut cfg, grid);
            cfg.mc.paths = grid.paths.unwrap_or(cfg.mc.paths);
            if !frequencies.is_empty() {
                cfg.mc.frequencies = frequencies.clone();
            }
            if let Some(k) = k_formula {
                cfg.mc.k_formula = (*k).into();
            }
        }
        Some(Command::Covcheck { grid, omega, k_formula }) => {
            apply_grid(&mut cfg, grid);
            cfg.mc.paths = grid.paths.unwrap_or(cfg.mc.paths);
            if !omega.is_empty() {
                cfg.covcheck.frequencies = omega.clone();
            }
            if let Some(k) = k_formula {
                cfg.mc.k_formula = (*k).into();
            }
            if cli.driver.is_empty() && cfg.drivers.iter().any(|d| matches!(d, DriverSpec::Brownian { .. })) {
                cfg.drivers.retain(|d| matches!(d, DriverSpec::Brownian { .. }));
            }
        }
        Some(Command::Convergence { horizon, h_ladder, mesh, paths, frequencies }) => {
            let c = &mut cfg.convergence;
            c.horizon = horizon.unwrap_or(c.horizon);
            c.mesh = mesh.unwrap_or(c.mesh);
            c.paths = paths.unwrap_or(c.paths);
            if !h_ladder.is_empty() {
                c.ladder = h_ladder.clone();
            }
            if !frequencies.is_empty() {
                c.frequencies = frequencies.clone();
            }
        }
        None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let out = &cli.out;
    match cli.command.as_ref().expect("checked by caller") {
        Command::Spectral { .. } => println!("{}", cli::cmd_spectral(cfg, out, cli.format)?.display()),
        Command::Simulate(_) => {
            for p in cli::cmd_simulate(cfg, out, cli.format)? {
                println!("{}", p.display());
            }
        }
        Command::Mc { .. } => {
            for study in cli::cmd_mc(cfg, out)? {
                println!("{}", study.dir.display());
                for e in study.report.suites.iter().flatten() {
                    println!(
                        "  omega={:<5} {:<11} D={:.4} crit={:.4} {}",
                        e.omega,
                        e.statistic,
                        e.ks_d,
                        e.ks_critical,
                        if e.pass { "pass" } else { "reject" }
                    );
                }
            }
        }
        Command::Covcheck { .. } => {
            for (path, report) in cli::cmd_covcheck(cfg, out)? {
                println!("{}", path.display());
                for e in &report.entries {
                    println!(
                        "  T={} omega={} theory={:.6} empirical={:.6} se={:.6} z={:.2}",
                        e.horizon, e.omega, e.theoretical, e.empirical, e.standard_error, e.z
                    );
                }
            }
        }
        Command::Convergence { .. } => {
            for (path, table) in cli::cmd_convergence(cfg, out, cli.format)? {
                println!("{}", path.display());
                for row in &table.rows {
                    let rms: Vec<String> = row.rms.iter().map(|r| format!("{r:.4e}")).collect();
                    let ratio: Vec<String> = row.ratio.iter().map(|r| r.map_or("-".into(), |x| format!("{x:.3}"))).collect();
                    println!("  h_max={} N={} rms=[{}] ratio=[{}]", row.h_max, row.n_points, rms.join(", "), ratio.join(", "));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| {
        if cli.dump_config {
            print!("{}", cfg.to_toml()?);
            return Ok(());
        }
        if cli.command.is_none() {
            return Err(CarmaError::Config("a subcommand is required (see --help)".into()));
        }
        match cli.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CarmaError::Config(format!("thread pool: {e}")))?
                .install(|| run(&cli, &cfg)),
            None => run(&cli, &cfg),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
