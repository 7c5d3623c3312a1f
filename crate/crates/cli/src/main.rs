use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmnoma_cli::config::{load_config, render_config, set_param, LoadedConfig};
use mmnoma_cli::output::write_csv;
use mmnoma_cli::sweep::{parse_grid, parse_method, run_sweep, Figure, Metric, SweepSpec, Variant};
use mmnoma_core::analytic::Method;
use mmnoma_core::SystemConfig;

/// Coverage and throughput of clustered mmWave NOMA downlinks.
#[derive(Parser)]
#[command(name = "mmnoma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset or a free-form sweep and write CSV.
    Run {
        #[command(subcommand)]
        target: Target,
    },
    /// Print the resolved configuration.
    ShowConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum Target {
    /// Coverage versus SNR for two BS densities.
    Fig1(RunArgs),
    /// Coverage versus array size at 83 dB.
    Fig2(RunArgs),
    /// NOMA and OMA system rate versus SNR.
    Fig3(RunArgs),
    /// Sweep one parameter over a grid.
    Sweep {
        /// Config key to vary, or `trials`.
        #[arg(long)]
        param: String,
        /// `v1,v2,...` or `start:step:end`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Comma-separated metrics.
        #[arg(long, default_value = "coverage_near,coverage_far")]
        metrics: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set snr_db=75`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Monte Carlo trials per point.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated subset of theorem, closed-form, monte-carlo.
    #[arg(long)]
    methods: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Chebyshev node counts `n1,n2`.
    #[arg(long, default_value = "50,50")]
    nodes: String,
    /// Use the same seed at every grid point.
    #[arg(long)]
    common_random_numbers: bool,
}

enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn resolve_config(args: &ConfigArgs) -> Result<SystemConfig, Failure> {
    let loaded = match &args.config {
        Some(path) => load_config(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => LoadedConfig {
            config: SystemConfig::default(),
            warnings: Vec::new(),
        },
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let mut cfg = loaded.config;
    for item in &args.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--set {key}: cannot parse `{value}`")))?;
        set_param(&mut cfg, key.trim(), value).map_err(|e| Failure::Usage(format!("--set: {e}")))?;
    }
    cfg.validate()
        .map_err(|e| Failure::Usage(format!("invalid configuration ({}): {e}", e.key())))?;
    Ok(cfg)
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|p| f(p.trim()))
        .collect::<Result<_, _>>()
        .map_err(Failure::Usage)
}

fn parse_nodes(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Usage(format!("--nodes expects `n1,n2`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let n1 = a.trim().parse().map_err(|_| bad())?;
    let n2 = b.trim().parse().map_err(|_| bad())?;
    Ok((n1, n2))
}

fn methods(args: &RunArgs, default: Vec<Method>) -> Result<Vec<Method>, Failure> {
    match &args.methods {
        Some(s) => parse_list(s, |m| parse_method(m).map_err(|e| e.to_string())),
        None => Ok(default),
    }
}

fn build_spec(target: &Target) -> Result<(SweepSpec, &RunArgs), Failure> {
    let all = vec![Method::TheoremIntegral, Method::ClosedForm, Method::MonteCarlo];
    let (mut spec, args) = match target {
        Target::Fig1(a) | Target::Fig2(a) | Target::Fig3(a) => {
            let fig = match target {
                Target::Fig1(_) => Figure::Fig1,
                Target::Fig2(_) => Figure::Fig2,
                _ => Figure::Fig3,
            };
            let base = resolve_config(&a.config)?;
            (fig.spec(base, methods(a, fig.default_methods())?, a.trials, a.seed), a)
        }
        Target::Sweep {
            param,
            grid,
            metrics,
            run,
        } => {
            let base = resolve_config(&run.config)?;
            let grid = parse_grid(grid).map_err(|e| Failure::Usage(e.to_string()))?;
            let metrics: Vec<Metric> = parse_list(metrics, |m| m.parse::<Metric>().map_err(|e| e.to_string()))?;
            let spec = SweepSpec {
                experiment: "sweep".into(),
                param: param.clone(),
                grid,
                base,
                variants: vec![Variant::new("base", &[], &metrics)],
                methods: methods(run, all)?,
                trials: run.trials,
                seed: run.seed,
                nodes: (50, 50),
                common_random_numbers: false,
            };
            (spec, run)
        }
    };
    spec.nodes = parse_nodes(&args.nodes)?;
    spec.common_random_numbers = args.common_random_numbers;
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((spec, args))
}

fn run(cli: Cli) -> Result<usize, Failure> {
    match cli.command {
        Command::ShowConfig { config } => {
            let cfg = resolve_config(&config)?;
            print!("{}", render_config(&cfg));
            Ok(0)
        }
        Command::Run { target } => {
            let (spec, args) = build_spec(&target)?;
            let result = run_sweep(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            match &args.out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(path)?);
                    write_csv(&mut w, &result)?;
                    w.flush()?;
                }
                None => {
                    let mut w = io::stdout().lock();
                    write_csv(&mut w, &result)?;
                    w.flush()?;
                }
            }
            let errors = result.error_count();
            if errors > 0 {
                eprintln!("{errors} of {} rows failed:", result.rows.len());
                for row in result.rows.iter().filter(|r| r.error.is_some()) {
                    eprintln!(
                        "  {}={} {} {} {}: {}",
                        row.param,
                        row.x,
                        row.variant,
                        row.method.as_str(),
                        row.metric,
                        row.error.as_deref().unwrap_or_default()
                    );
                }
            }
            Ok(errors)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
