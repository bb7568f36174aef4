use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lossrate_cli::config::{CompareConfig, GridConfig, ModelConfig, ObservableSpec, Sweep};
use lossrate_cli::validate::{print_table, run_suite, Benchmark};
use lossrate_cli::{presets, run, HarnessError, Overrides, RunSummary, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "lossrate", version, about = "Lindblad solver and small-loss-rate expansion harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// End of the time grid.
    #[arg(long)]
    t1: Option<f64>,
    /// Number of RK4 steps; defaults to the model's step ceilings.
    #[arg(long)]
    steps: Option<usize>,
    /// Expansion orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            t1: self.t1,
            steps: self.steps,
            orders: self.orders.clone(),
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario from a JSON config or a built-in preset.
    Run {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// One of fig1, cavity-demo, jc-demo, dicke-demo.
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact vs first-order <sigma_x> for the decaying atom at gamma = 0.01, 0.05.
    Fig1 {
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; --t1/--steps change the two-level benchmark grid.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Fidelity of N qubits with m excited, exact vs expansion vs closed form.
    Dicke {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Bath temperature(s), comma separated; one job per value.
        #[arg(long = "T", value_delimiter = ',', required_unless_present_all = ["k", "g"], conflicts_with_all = ["k", "g"])]
        temperature: Option<Vec<f64>>,
        #[arg(long = "K", requires = "g")]
        k: Option<f64>,
        #[arg(long = "G", requires = "k")]
        g: Option<f64>,
        /// Qubit frequency.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn report(summary: &RunSummary) -> Result<(), HarnessError> {
    for job in &summary.jobs {
        println!("{}", job.csv.display());
        for e in &job.report.errors {
            println!("  max |{} - {}_exact| = {:.3e}", e.column, e.observable, e.max());
        }
    }
    println!("summary: {}", summary.summary_path.display());
    if summary.passed() {
        Ok(())
    } else {
        Err(HarnessError::Validation(summary.failures().join("; ")))
    }
}

fn dicke_config(
    n: usize,
    m: usize,
    omega: f64,
    temperature: Option<Vec<f64>>,
    k: Option<f64>,
    g: Option<f64>,
) -> ScenarioConfig {
    let (model, sweep) = match temperature {
        Some(ts) => (
            ModelConfig::Dicke {
                n,
                m,
                omega,
                temperature: Some(ts[0]),
                k: None,
                g: None,
            },
            Some(Sweep {
                param: "temperature".into(),
                values: ts,
                tolerances: Vec::new(),
            }),
        ),
        None => (
            ModelConfig::Dicke {
                n,
                m,
                omega,
                temperature: None,
                k,
                g,
            },
            None,
        ),
    };
    ScenarioConfig {
        name: format!("dicke_N{n}_m{m}"),
        model,
        grid: GridConfig {
            t0: 0.0,
            t1: 1.0,
            steps: None,
        },
        orders: vec![0, 1, 2],
        order_cap: lossrate::expansion::DEFAULT_ORDER_CAP,
        observables: ["fidelity", "dFdK", "dFdG"]
            .into_iter()
            .map(|s| ObservableSpec::Named(s.into()))
            .collect(),
        compare: CompareConfig::default(),
        tolerances: Default::default(),
        sweep,
        out: None,
    }
}

fn execute(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Run { config, preset, common } => {
            let cfg = match (config, preset) {
                (Some(path), _) => ScenarioConfig::load(&path)?,
                (None, Some(name)) => presets::preset(&name)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            report(&run(&cfg.apply(&common.overrides())?)?)
        }
        Command::Fig1 { common } => {
            let cfg = presets::preset("fig1")?.apply(&common.overrides())?;
            report(&run(&cfg)?)
        }
        Command::Validate { common } => {
            let mut b = Benchmark::default();
            if let Some(t1) = common.t1 {
                b.t1 = t1;
            }
            b.steps = common.steps;
            let checks = run_suite(&b);
            print_table(std::io::stdout().lock(), &checks).map_err(|source| HarnessError::Io {
                path: "<stdout>".into(),
                source,
            })?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Validation(failed.join("; ")))
            }
        }
        Command::Dicke {
            n,
            m,
            temperature,
            k,
            g,
            omega,
            common,
        } => {
            let cfg = dicke_config(n, m, omega, temperature, k, g).apply(&common.overrides())?;
            let summary = run(&cfg)?;
            println!("{:>12} {:>22}", "param", "fidelity_exact(t1)");
            for job in &summary.jobs {
                let label = job.job.label.as_ref().map_or("-".to_owned(), |(p, v)| format!("{p}={v}"));
                let f = job.report.column("fidelity_exact").map(|c| *c.values.last().expect("non-empty"));
                println!("{label:>12} {:>22}", f.map_or("-".to_owned(), |f| format!("{f:.12}")));
            }
            report(&summary)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
