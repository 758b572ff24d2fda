use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sumset_cli::{generate, run, sweep, write_csv, write_outputs, CliError, RunConfig, SetSpec, SweepGrid};
use sumset_core::fourier::wht;
use sumset_core::parity::{implicit_gl, GlParams};
use sumset_core::{Mode, Point, RandomSource};

#[derive(Parser)]
#[command(name = "sumset", version, about = "Query-efficient sumset oracles over F₂ⁿ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set and print its summary.
    Gen {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run the full pipeline on one set.
    Run(RunArgs),
    /// Run a parameter grid over a spec family and print one row per run.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Dimensions (comma separated); defaults to the spec's n.
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
        /// Additional ε values (comma separated); defaults to --eps.
        #[arg(long = "eps-grid", value_delimiter = ',')]
        eps_grid: Vec<f64>,
        #[arg(long = "tau-grid", value_delimiter = ',')]
        tau_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        modes: Vec<ModeArg>,
    },
    /// Run in explicit mode and print the exhaustive audit.
    Audit(RunArgs),
    /// Run implicit Goldreich–Levin on a set and describe the oracles.
    Gl {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        theta: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Explicit,
    Implicit,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Explicit => Mode::Explicit,
            ModeArg::Implicit => Mode::Implicit,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Volume-estimate precision.
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Volume-estimate failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, value_enum, default_value = "explicit")]
    mode: ModeArg,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    imax: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report.json, tree.json and transcript.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            eps: self.eps,
            tau: self.tau,
            gamma: self.gamma,
            delta: self.delta,
            mode: self.mode.into(),
            k_max: self.kmax,
            i_max: self.imax,
            seed: self.seed,
            ..RunConfig::default()
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<SetSpec, CliError> {
    let spec: SetSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    spec.validate()?;
    Ok(spec)
}

fn print_json(v: &impl serde::Serialize) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { spec } => {
            let spec = read_spec(&spec)?;
            let g = generate(&spec)?;
            print_json(&json!({
                "kind": spec.kind(),
                "n": spec.n(),
                "size": g.twin.as_ref().map(|t| t.len()),
                "volume": g.twin.as_ref().map(|t| t.volume()),
            }))
        }
        Command::Run(args) => {
            let spec = read_spec(&args.spec)?;
            let (report, sim) = run(&spec, &args.config())?;
            if let Some(dir) = &args.out {
                write_outputs(dir, &report, &sim)?;
            }
            match args.format {
                Format::Json => print_json(&report),
                Format::Csv => {
                    let row = sumset_cli::SweepRow {
                        n: report.n,
                        eps: report.config.eps,
                        tau: report.config.tau,
                        mode: report.mode,
                        queries: Some(report.queries.total),
                        dist: report.audit.as_ref().map(|a| a.sumset_distance),
                        volume: Some(report.volume.sumset.value),
                        eps_hat: report.audit.as_ref().map(|a| a.eps_hat),
                        bound: report.audit.as_ref().map(|a| a.sumset_bound),
                        status: "ok".into(),
                    };
                    write_csv(&[row], std::io::stdout())
                }
            }
        }
        Command::Sweep { run: args, ns, eps_grid, tau_grid, modes } => {
            let spec = read_spec(&args.spec)?;
            let or = |v: Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v };
            let grid = SweepGrid {
                ns: if ns.is_empty() { vec![spec.n()] } else { ns },
                eps: or(eps_grid, args.eps),
                tau: or(tau_grid, args.tau),
                modes: if modes.is_empty() { vec![args.mode.into()] } else { modes.into_iter().map(Mode::from).collect() },
            };
            let rows = sweep(&spec, &grid, &args.config())?;
            match args.format {
                Format::Csv => write_csv(&rows, std::io::stdout()),
                Format::Json => print_json(&rows),
            }
        }
        Command::Audit(args) => {
            let spec = read_spec(&args.spec)?;
            let config = RunConfig { mode: Mode::Explicit, ..args.config() };
            let (report, _) = run(&spec, &config)?;
            let audit = report
                .audit
                .ok_or_else(|| CliError::Spec(format!("audit needs n ≤ 20, got {}", report.n)))?;
            print_json(&audit)
        }
        Command::Gl { spec, theta, delta, seed } => {
            let spec = read_spec(&spec)?;
            let g = generate(&spec)?;
            let a = &g.oracle;
            let params = GlParams::new(theta, delta)?;
            let res = implicit_gl(a, &params, &mut RandomSource::new(seed).split("gl"))?;
            let queries = a.query_count();
            let n = spec.n();
            let spectrum = match &g.twin {
                Some(t) if n <= 20 => Some(wht(&t.indicator::<f64>())?),
                _ => None,
            };
            let mut rng = RandomSource::new(seed).split("decode");
            let oracles: Vec<_> = res
                .oracles
                .iter()
                .map(|o| {
                    // the hidden α, read off at unit vectors when n is small
                    let alpha = (n <= 64).then(|| {
                        let mut p = Point::zero(n);
                        for i in 1..=n {
                            if o.eval_amplified(a, &Point::unit(n, i), 0, o.m, &mut rng) {
                                p ^= &Point::unit(n, i);
                            }
                        }
                        p
                    });
                    let coefficient = spectrum.as_ref().zip(alpha.as_ref()).map(|(s, p)| s.get(p));
                    json!({ "b": o.b, "constant": o.constant, "estimate": o.estimate, "alpha": alpha, "coefficient": coefficient })
                })
                .collect();
            print_json(&json!({
                "params": res.params,
                "gl_queries": queries,
                "accepted": res.accepted,
                "correlated": res.correlated,
                "oracles": oracles,
            }))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
