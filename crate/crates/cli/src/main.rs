use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use mindchange::groebner::{MonomialOrder, OrderKind};
use mindchange_cli::commands::{self, Outcome};
use mindchange_cli::formats::named_space;
use mindchange_cli::sweep::{SweepConfig, ALL_CHECKS};

#[derive(Parser)]
#[command(name = "mindchange", version, about = "Mind-change complexity on finite spaces and ideal learning")]
struct Cli {
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the sweep.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Name length for machine simulations, or the window for plain runs.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Order::Grevlex)]
    order: Order,
    /// Start the learner's run at the bound itself.
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    bound_inclusive: Switch,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Lex,
    Grlex,
    Grevlex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Level of a map, its canonical decomposition and the brute-force minimum.
    AnalyzeLevel { space: PathBuf, map: PathBuf },
    /// Check a run file against the tagged or plain run contract.
    ValidateRun { run: PathBuf },
    /// Run the ideal learner on an enumeration file.
    LearnGroebner {
        enumeration: PathBuf,
        /// Number of variables; defaults to the largest index used.
        #[arg(long)]
        n: Option<usize>,
        /// Where to write the emitted run.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an enumeration forcing the given change-point tags.
    Adversary {
        #[arg(long)]
        n: usize,
        /// Strictly decreasing ordinals such as `w*2 w+1 2`.
        targets: Vec<String>,
        /// Where to write the enumeration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cantor-Bendixson rank and the point identifier built from it.
    Cb { space: PathBuf },
    /// Difference-hierarchy membership, or the whole level.
    DiffHierarchy {
        space: PathBuf,
        #[arg(long)]
        alpha: usize,
        /// Point indices of the set to test, comma separated.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
    },
    /// Run both machines on every canonical name of every point.
    Simulate { space: PathBuf, map: PathBuf },
    /// Exhaustive checks over all small spaces and maps.
    Sweep {
        #[arg(long, default_value_t = 3)]
        max_points: usize,
        /// Codomains: 2, 3, S, discrete:k or flat:k.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        codomain: Vec<String>,
        /// Largest difference-hierarchy level to compare against.
        #[arg(long, default_value_t = 4)]
        max_alpha: usize,
        /// Checks to run; all by default.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Where counterexamples are written.
        #[arg(long, default_value = "mindchange-replay.json")]
        replay: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let order = MonomialOrder::new(match cli.order {
        Order::Lex => OrderKind::Lex,
        Order::Grlex => OrderKind::GrLex,
        Order::Grevlex => OrderKind::GRevLex,
    });
    let inclusive = cli.bound_inclusive == Switch::On;
    match cli.command {
        Command::AnalyzeLevel { space, map } => commands::analyze_level(&space, &map),
        Command::ValidateRun { run } => commands::validate_run_file(&run, cli.horizon),
        Command::LearnGroebner { enumeration, n, out } => {
            commands::learn_groebner(&enumeration, n, &order, inclusive, out.as_deref())
        }
        Command::Adversary { n, targets, out } => commands::adversary_cmd(n, &targets, &order, out.as_deref()),
        Command::Cb { space } => commands::cb(&space, cli.horizon, cli.seed),
        Command::DiffHierarchy { space, alpha, set } => commands::diff_hierarchy(&space, alpha, set.as_deref()),
        Command::Simulate { space, map } => commands::simulate(&space, &map, cli.horizon, cli.seed),
        Command::Sweep { max_points, codomain, max_alpha, checks, replay } => {
            let codomains = codomain
                .iter()
                .map(|c| Ok((c.clone(), Arc::new(named_space(c)?))))
                .collect::<anyhow::Result<_>>()?;
            let checks = match checks {
                None => ALL_CHECKS.into_iter().collect(),
                Some(list) => list
                    .iter()
                    .map(|c| {
                        ALL_CHECKS
                            .into_iter()
                            .find(|k| k == c)
                            .ok_or_else(|| anyhow::anyhow!("unknown check `{c}` (known: {})", ALL_CHECKS.join(", ")))
                    })
                    .collect::<anyhow::Result<_>>()?,
            };
            let cfg = SweepConfig {
                max_points,
                codomains,
                alphas: (1..=max_alpha).collect(),
                checks,
                jobs: cli.jobs,
                horizon: cli.horizon,
                seed: cli.seed,
            };
            commands::sweep(&cfg, &replay)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
