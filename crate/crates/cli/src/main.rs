use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvobstruct_core::obstruction::Tolerances;
use curvobstruct_core::scenario::{
    self, lookup, render_reports, run_scenario_with, ReportFormat, RunOptions, RunReport,
    ScenarioConfig, CONFIG_EXIT_CODE,
};
use curvobstruct_core::selftest::run_selftest;
use curvobstruct_core::{catalog, exit_code, Error};

#[derive(Parser)]
#[command(
    name = "curvobstruct",
    version,
    about = "Pointwise integrability and curvature checks on a chart"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a catalog scenario (or `all`) or a JSON config file.
    Run(RunArgs),
    /// Print the built-in scenario catalog.
    List,
    /// Run the randomized identity suite.
    Selftest {
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
    /// Sweep sample points concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(long, hide = true)]
    inject_residual: Option<f64>,
}

impl RunArgs {
    fn configs(&self) -> Result<Vec<ScenarioConfig>, Error> {
        let mut base = match (&self.scenario, &self.config) {
            (_, Some(path)) => vec![ScenarioConfig::from_file(path)?],
            (Some(name), None) if name == "all" => catalog(),
            (Some(name), None) => vec![lookup(name)
                .ok_or_else(|| Error::config("scenario", format!("unknown scenario '{name}'")))?],
            (None, None) => return Err(Error::config("scenario", "give --scenario or --config")),
        };
        for cfg in &mut base {
            if let Some(d) = self.dim {
                cfg.dim = d;
            }
            if let Some(c) = self.c0 {
                cfg.c0 = c;
            }
            if let Some(s) = self.seed {
                cfg.seed = s;
            }
            if let Some(p) = self.points {
                cfg.points = p;
            }
            cfg.validate()?;
        }
        Ok(base)
    }
}

fn run(args: &RunArgs) -> Result<i32, Error> {
    let format: ReportFormat = args.format.parse()?;
    let configs = args.configs()?;
    let opts = RunOptions {
        parallel: args.parallel,
        inject_residual: args.inject_residual,
    };
    let reports = configs
        .iter()
        .map(|c| run_scenario_with(c, &opts))
        .collect::<Result<Vec<RunReport>, Error>>()?;
    for r in &reports {
        eprintln!("{}: {:.3} s", r.scenario, r.wall_time.as_secs_f64());
    }
    let text = if reports.len() == 1 && args.scenario.as_deref() != Some("all") {
        scenario::render_report(&reports[0], format)?
    } else {
        render_reports(&reports, format)?
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(reports.iter().map(exit_code).max().unwrap_or(0))
}

fn list() {
    println!(
        "{:<18} {:>3} {:>5}  {:<30} {:>6} {:>10}",
        "name", "dim", "c0", "structure", "points", "seed"
    );
    for c in catalog() {
        let kind = match &c.ac_kind {
            scenario::AcKind::StandardJ0 => "standard_J0".to_string(),
            scenario::AcKind::Perturbed { seed, epsilon } => {
                format!("perturbed(seed={seed}, eps={epsilon})")
            }
            scenario::AcKind::Custom { .. } => "custom".to_string(),
        };
        println!(
            "{:<18} {:>3} {:>5}  {:<30} {:>6} {:>10}",
            c.name, c.dim, c.c0, kind, c.points, c.seed
        );
    }
}

fn selftest(samples: usize, seed: u64) -> Result<i32, Error> {
    let checks = run_selftest(samples, seed, &Tolerances::default())?;
    let mut code = 0;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<12} samples={} worst={:.3e} scale={:.3e}",
            c.name, c.samples, c.worst.abs, c.worst.scale
        );
        if !c.passed {
            code = 2;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_EXIT_CODE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            list();
            Ok(0)
        }
        Command::Selftest { samples, seed } => selftest(*samples, *seed),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_EXIT_CODE as u8)
        }
    }
}
