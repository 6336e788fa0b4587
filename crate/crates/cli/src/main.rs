use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use selgrade_cli::report::{oracle_report, resolve_cache_dir};
use selgrade_cli::scenario::{apply_override, parse_assignment};
use selgrade_cli::{
    emit_plot, parse_scenario, read_report, run_scenario, write_report, CliResult, ScenarioConfig,
};

/// Selgrade decompositions of affine control systems on projective space.
#[derive(Parser)]
#[command(name = "selgrade", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the chain-graph analysis and write a report.
    Analyze {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Report path (default: the scenario's reportPath, else stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        /// SVG plot path; the cell dump goes next to it as CSV.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Draw the vector fields of the extreme controls on the plot.
        #[arg(long)]
        arrows: bool,
        /// Chain graph cache directory (also SELGRADE_CACHE_DIR).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Print the exact references of a scenario without building graphs.
    Oracle {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Plot a saved report.
    Plot {
        report: PathBuf,
        /// SVG path (default: the report path with extension svg).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        arrows: bool,
    },
}

#[derive(Args)]
struct Overrides {
    /// Set any scenario field, e.g. `--set grid.T=0.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Jump radius, a number or `auto`.
    #[arg(long)]
    eps: Option<String>,
    /// Flow time per hop.
    #[arg(long = "time")]
    time: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    control_grid: Option<usize>,
    #[arg(long)]
    switches: Option<usize>,
    /// Equator band, a number or `auto`.
    #[arg(long)]
    delta_eq: Option<String>,
    #[arg(long)]
    no_lifted: bool,
    #[arg(long)]
    no_homogeneous: bool,
    #[arg(long)]
    no_oracles: bool,
}

fn number_or_auto(s: &str) -> Value {
    s.parse::<f64>()
        .map_or_else(|_| Value::from(s), Value::from)
}

impl Overrides {
    fn assignments(&self) -> CliResult<Vec<(String, Value)>> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Value| out.push((k.to_string(), v));
        if let Some(x) = self.resolution {
            put("grid.resolution", x.into());
        }
        if let Some(x) = &self.eps {
            put("grid.eps", number_or_auto(x));
        }
        if let Some(x) = self.time {
            put("grid.T", x.into());
        }
        if let Some(x) = self.samples {
            put("grid.samplesPerCell", x.into());
        }
        if let Some(x) = self.control_grid {
            put("grid.controlGridPerAxis", x.into());
        }
        if let Some(x) = self.switches {
            put("grid.switchesPerHop", x.into());
        }
        if let Some(x) = self.seed {
            put("grid.rngSeed", x.into());
        }
        if let Some(x) = &self.delta_eq {
            put("analysis.deltaEq", number_or_auto(x));
        }
        if self.no_lifted {
            put("analysis.runLifted", false.into());
        }
        if self.no_homogeneous {
            put("analysis.runHomogeneous", false.into());
        }
        if self.no_oracles {
            put("analysis.runOracles", false.into());
        }
        for s in &self.set {
            out.push(parse_assignment(s)?);
        }
        Ok(out)
    }

    fn load(&self, path: &PathBuf) -> CliResult<ScenarioConfig> {
        let mut cfg = parse_scenario(path)?;
        for (key, value) in self.assignments()? {
            cfg = apply_override(&cfg, &key, value)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze {
            scenario,
            overrides,
            report,
            plot,
            arrows,
            cache,
        } => {
            let cfg = overrides.load(&scenario)?;
            let cache_dir = resolve_cache_dir(&cfg, cache.as_deref());
            let result = run_scenario(&cfg, cache_dir.as_deref())?;
            for w in &result.decomposition.warnings {
                eprintln!("warning: {w}");
            }
            let dec = &result.decomposition;
            if let Some(run) = &dec.lifted {
                eprintln!(
                    "lifted: {} components over {} cells, central index {:?}",
                    run.components.len(),
                    run.summary.cell_count,
                    dec.central_index
                );
            }
            if dec.homogeneous.is_some() {
                eprintln!(
                    "linear part: {} components",
                    dec.at_infinity_components.len()
                );
            }
            match report.or_else(|| cfg.output.report_path.clone()) {
                Some(path) => {
                    write_report(&result, &path)?;
                    eprintln!("report written to {}", path.display());
                }
                None => print!("{}", result.to_json()),
            }
            if let Some(path) = plot.or_else(|| cfg.output.plot_path.clone()) {
                let csv = emit_plot(&result, &path, arrows || cfg.output.plot_arrows)?;
                eprintln!("plot written to {} and {}", path.display(), csv.display());
            }
            Ok(())
        }
        Command::Oracle {
            scenario,
            overrides,
        } => {
            let cfg = overrides.load(&scenario)?;
            let sys = cfg.system()?;
            let mut warnings = Vec::new();
            let oracle = oracle_report(&cfg, &sys, None, &mut warnings)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&oracle).expect("oracle serializes")
            );
            Ok(())
        }
        Command::Plot {
            report,
            out,
            arrows,
        } => {
            let loaded = read_report(&report)?;
            let path = out.unwrap_or_else(|| report.with_extension("svg"));
            let csv = emit_plot(&loaded, &path, arrows)?;
            eprintln!("plot written to {} and {}", path.display(), csv.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selgrade: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
