use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sumset::checks::{self, Suite};
use sumset::figures::{self, FigureOptions};
use sumset::parallel::{self, default_shards, Budget};
use sumset::table::{create_dir, Table};
use sumset::{row, CliError, Result};
use sumset_core::bounds::{
    kth_moment_upper, kth_moment_upper_improved, tail_lower, tail_upper_chernoff, tail_upper_chernoff_unclamped,
    tail_upper_improved, tail_upper_improved_unclamped, LowerBoundVariant,
};
use sumset_core::chains::{chain_prob_closed, chain_prob_table, spectral_constants};
use sumset_core::exact::{
    expected_missing_left, expected_missing_left_limit, expected_missing_right, expected_missing_total,
    expected_missing_total_limit,
};
use sumset_core::montecarlo::McConfig;
use sumset_core::orbits::{orbits, pair_geometry, pair_missing_prob};
use sumset_core::series::{
    leading_order_approx, n_for_tolerance, second_moment_limit, second_moment_partial, tail_remainder_bound,
    total_second_moment_limit, variance_limit,
};
use sumset_core::{Params, Probability, Variable};

/// Missing summands of random sumsets: exact formulas, series, bounds,
/// simulation and figure data.
#[derive(Parser)]
#[command(name = "sumset", version)]
struct Cli {
    /// Work cap for simulations and enumerations (random draws or visited
    /// subset elements).
    #[arg(long, global = true, default_value_t = Budget::DEFAULT.limit)]
    budget: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed forms: inclusion probabilities, pairs, moments, chains, orbits.
    #[command(subcommand)]
    Exact(ExactCmd),
    /// The N → ∞ second moment and related series.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Moment and tail bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Monte Carlo simulation.
    #[command(subcommand)]
    Mc(McCmd),
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Write the CSV data behind a figure.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Override the number of simulated trials.
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Oracle,
    Series,
    Bounds,
    All,
}

fn parse_probability(s: &str) -> std::result::Result<Probability, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Probability::new(v).map_err(|e| e.to_string())
}

#[derive(Args, Clone, Copy)]
struct PArg {
    /// Inclusion probability, strictly between 0 and 1.
    #[arg(long, value_parser = parse_probability)]
    p: Probability,
}

#[derive(Subcommand)]
enum ExactCmd {
    /// P(n ∉ A + A) for 0 <= n <= 2N.
    Inclusion {
        #[command(flatten)]
        p: PArg,
        #[arg(long = "N")]
        n_max: usize,
    },
    /// P(m, n ∉ A + A).
    Pairprob {
        #[command(flatten)]
        p: PArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// E[Y], E[Z], E[W] at N and in the limit.
    Moments {
        #[command(flatten)]
        p: PArg,
        #[arg(long = "N")]
        n_max: usize,
    },
    /// a_0, ..., a_k.
    Chain {
        #[command(flatten)]
        p: PArg,
        #[arg(long)]
        k: usize,
    },
    /// Roots and decay rates of the a_k recurrence.
    Spectral {
        #[command(flatten)]
        p: PArg,
    },
    /// Reflection orbits of (m, n).
    Orbits {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Twist degree and orbit counts of (m, n).
    Geometry {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
    },
    /// Exact pmfs by enumeration (N <= 22).
    Pmf {
        #[command(flatten)]
        p: PArg,
        #[arg(long = "N")]
        n_max: usize,
    },
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// lim E[Y²] with its truncation bound.
    SecondMoment {
        #[command(flatten)]
        p: PArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// f(p, L) = p⁴ Σ_{l<=L} T_l.
    Partial {
        #[command(flatten)]
        p: PArg,
        #[arg(long = "L")]
        last_l: usize,
    },
    /// 4/p⁴ − 2/p² + 1/p + 1.
    Leading {
        #[command(flatten)]
        p: PArg,
    },
    /// Limit variance and Var/E².
    Variance {
        #[command(flatten)]
        p: PArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// lim E[W²].
    Total {
        #[command(flatten)]
        p: PArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Bound on lim E[Y²] − E[Y²]_N.
    TailRemainder {
        #[command(flatten)]
        p: PArg,
        #[arg(long = "N")]
        n_max: u64,
    },
    /// Rough N for which E[Y²]_N is within eps of the limit.
    NForTol {
        #[command(flatten)]
        p: PArg,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Tail bounds on P(Y >= n) for 0 <= n <= max.
    Tail {
        #[command(flatten)]
        p: PArg,
        #[arg(long, default_value_t = 60)]
        max: u64,
        /// Also print the raw values before clamping to [0, 1].
        #[arg(long)]
        unclamped: bool,
    },
    /// Bounds on E[Y^k] for 1 <= k <= max.
    Moments {
        #[command(flatten)]
        p: PArg,
        #[arg(long, default_value_t = 10)]
        max: u32,
    },
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    p: PArg,
    #[arg(long = "N")]
    n_max: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Shard count; results do not depend on it.
    #[arg(long)]
    shards: Option<u64>,
    /// Output directory; without it the main table goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum McCmd {
    /// Histograms, tails and moments.
    Run(McArgs),
    /// CDF of Y normalized by its sample mean.
    Cdf(McArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = Budget { limit: cli.budget };
    match dispatch(cli.command, &budget) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print(table: &Table) -> Result<u8> {
    table.write(io::stdout().lock())?;
    Ok(0)
}

fn dispatch(command: Command, budget: &Budget) -> Result<u8> {
    match command {
        Command::Exact(cmd) => exact(cmd, budget),
        Command::Series(cmd) => series(cmd),
        Command::Bounds(cmd) => bounds(cmd),
        Command::Mc(cmd) => mc(cmd, budget),
        Command::Verify { suite } => verify(suite, budget),
        Command::Figures { which, out, seed, trials } => {
            let opts = FigureOptions { seed, trials };
            let written = match which {
                1 => figures::figure1(&out)?,
                2 => figures::figure2(&out, &opts, budget)?,
                3 => figures::figure3(&out, &opts, budget)?,
                _ => figures::figure4(&out, &opts, budget)?,
            };
            for path in written {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

fn exact(cmd: ExactCmd, budget: &Budget) -> Result<u8> {
    match cmd {
        ExactCmd::Inclusion { p, n_max } => {
            print(&figures::noninclusion_table(&Params::with_probability(p.p, n_max))?)
        }
        ExactCmd::Pairprob { p, m, n } => {
            let params = Params::with_probability(p.p, m);
            let prob = pair_missing_prob(m, n, &params)?;
            let g = pair_geometry(m, n)?;
            let mut t = Table::new(&["m", "n", "l", "prob_missing"]);
            t.push(row![m, n, g.l, prob]);
            print(&t)
        }
        ExactCmd::Moments { p, n_max } => {
            let params = Params::with_probability(p.p, n_max);
            let mut t = Table::new(&["N", "E_Y", "E_Z", "E_W", "E_Y_limit", "E_W_limit"]);
            t.push(row![
                n_max,
                expected_missing_left(&params),
                expected_missing_right(&params),
                expected_missing_total(&params),
                expected_missing_left_limit(p.p),
                expected_missing_total_limit(p.p),
            ]);
            print(&t)
        }
        ExactCmd::Chain { p, k } => {
            let table = chain_prob_table(p.p, k);
            let mut t = Table::new(&["k", "a_k", "one_minus_a_k", "a_k_closed_form"]);
            for i in 0..=k {
                t.push(row![i, table.get(i), table.complement(i), chain_prob_closed(p.p, i)]);
            }
            print(&t)
        }
        ExactCmd::Spectral { p } => {
            let s = spectral_constants(p.p);
            let mut t = Table::new(&["lambda1", "lambda2", "one_minus_lambda1", "c1", "c2", "alpha", "alpha_prime"]);
            t.push(row![s.lambda1, s.lambda2, s.one_minus_lambda1, s.c1, s.c2, s.alpha, s.alpha_prime]);
            print(&t)
        }
        ExactCmd::Orbits { m, n } => {
            let mut t = Table::new(&["m", "n", "r", "entries", "looped"]);
            for (r, o) in (n + 1..=m).zip(orbits(m, n)?) {
                let entries: Vec<String> = o.entries.iter().map(|e| e.to_string()).collect();
                t.push(row![m, n, r, entries.join("-"), o.looped]);
            }
            print(&t)
        }
        ExactCmd::Geometry { m, n } => {
            let g = pair_geometry(m, n)?;
            let mut t = Table::new(&[
                "m",
                "n",
                "l",
                "d1",
                "d2",
                "s",
                "loopless_long",
                "loopless_short",
                "looped_long",
                "looped_short",
            ]);
            let s = format!("{}{}{}", g.s.0, g.s.1, g.s.2);
            t.push(row![m, n, g.l, g.d1, g.d2, s, g.loopless_long, g.loopless_short, g.looped_long, g.looped_short]);
            print(&t)
        }
        ExactCmd::Pmf { p, n_max } => {
            let d = parallel::exact_distribution(&Params::with_probability(p.p, n_max), budget)?;
            let mut t = Table::new(&["variable", "value", "probability"]);
            for var in Variable::ALL {
                for (v, &q) in d.pmf(var).probs.iter().enumerate() {
                    t.push(row![var.name(), v, q]);
                }
            }
            print(&t)
        }
    }
}

fn series(cmd: SeriesCmd) -> Result<u8> {
    match cmd {
        SeriesCmd::SecondMoment { p, tol } => {
            let r = second_moment_limit(p.p, tol)?;
            let mut t = Table::new(&["value", "truncation_l", "remainder_bound"]);
            t.push(row![r.value, r.truncation_l, r.remainder_bound]);
            print(&t)
        }
        SeriesCmd::Partial { p, last_l } => {
            let mut t = Table::new(&["L", "value"]);
            t.push(row![last_l, second_moment_partial(p.p, last_l)?]);
            print(&t)
        }
        SeriesCmd::Leading { p } => {
            let mut t = Table::new(&["p", "approx"]);
            t.push(row![p.p.get(), leading_order_approx(p.p)]);
            print(&t)
        }
        SeriesCmd::Variance { p, tol } => {
            let v = variance_limit(p.p, tol)?;
            let mut t = Table::new(&["variance", "ratio", "second_moment", "remainder_bound"]);
            t.push(row![v.variance, v.ratio, v.second_moment.value, v.second_moment.remainder_bound]);
            print(&t)
        }
        SeriesCmd::Total { p, tol } => {
            let mut t = Table::new(&["value"]);
            t.push(row![total_second_moment_limit(p.p, tol)?]);
            print(&t)
        }
        SeriesCmd::TailRemainder { p, n_max } => {
            let mut t = Table::new(&["N", "bound"]);
            t.push(row![n_max, tail_remainder_bound(p.p, n_max)]);
            print(&t)
        }
        SeriesCmd::NForTol { p, eps } => {
            let mut t = Table::new(&["eps", "N"]);
            t.push(row![eps, n_for_tolerance(p.p, eps)?]);
            print(&t)
        }
    }
}

fn bounds(cmd: BoundsCmd) -> Result<u8> {
    match cmd {
        BoundsCmd::Tail { p, max, unclamped } => {
            let header: &[&str] = if unclamped {
                &[
                    "n",
                    "lower",
                    "lower_as_stated",
                    "upper_improved",
                    "upper_chernoff",
                    "upper_improved_unclamped",
                    "upper_chernoff_unclamped",
                ]
            } else {
                &["n", "lower", "lower_as_stated", "upper_improved", "upper_chernoff"]
            };
            let mut t = Table::new(header);
            for n in (0..=max).step_by(2) {
                let mut cells = row![
                    n,
                    tail_lower(p.p, n, LowerBoundVariant::Rigorous)?,
                    tail_lower(p.p, n, LowerBoundVariant::AsStated)?,
                    tail_upper_improved(p.p, n),
                    tail_upper_chernoff(p.p, n),
                ];
                if unclamped {
                    cells.extend(row![tail_upper_improved_unclamped(p.p, n), tail_upper_chernoff_unclamped(p.p, n)]);
                }
                t.push(cells);
            }
            print(&t)
        }
        BoundsCmd::Moments { p, max } => {
            let mut t = Table::new(&["k", "crude", "improved"]);
            for k in 1..=max {
                t.push(row![k, kth_moment_upper(p.p, k)?, kth_moment_upper_improved(p.p, k)?]);
            }
            print(&t)
        }
    }
}

fn mc(cmd: McCmd, budget: &Budget) -> Result<u8> {
    let (args, cdf_only) = match cmd {
        McCmd::Run(a) => (a, false),
        McCmd::Cdf(a) => (a, true),
    };
    let params = Params::with_probability(args.p.p, args.n_max);
    let shards = args.shards.unwrap_or_else(|| default_shards(args.trials));
    let config = McConfig::new(params, args.trials, args.seed, shards)?;
    let summary = parallel::run_mc(&config, budget)?;
    let cdf = figures::cdf_table(&summary, &figures::cdf_grid());
    match (&args.out, cdf_only) {
        (None, true) => print(&cdf?),
        (None, false) => print(&figures::histogram_table(&summary)),
        (Some(dir), _) => {
            create_dir(dir)?;
            write_text(&dir.join("run.txt"), &figures::run_header(&summary))?;
            if cdf_only {
                cdf?.write_file(&dir.join("cdf.csv"))?;
            } else {
                figures::histogram_table(&summary).write_file(&dir.join("histograms.csv"))?;
                let max_n = args.n_max as u64 + 1;
                figures::tail_table(&summary, max_n).write_file(&dir.join("tails.csv"))?;
                figures::moments_table(&summary).write_file(&dir.join("moments.csv"))?;
                if let Ok(cdf) = cdf {
                    cdf.write_file(&dir.join("cdf.csv"))?;
                }
            }
            Ok(0)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn verify(suite: SuiteArg, budget: &Budget) -> Result<u8> {
    let suite = match suite {
        SuiteArg::Oracle => Suite::Oracle,
        SuiteArg::Series => Suite::Series,
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::All => Suite::All,
    };
    let mut out = io::stdout().lock();
    let (mut failed, mut skipped) = (0, 0);
    for id in suite.ids() {
        let check = checks::run_check(id, budget);
        writeln!(out, "{check}")?;
        out.flush()?;
        match check.status {
            checks::Status::Pass => {}
            checks::Status::Fail => failed += 1,
            checks::Status::Skipped(_) => skipped += 1,
        }
    }
    let total = suite.ids().len();
    writeln!(out, "{} passed, {failed} failed, {skipped} skipped", total - failed - skipped)?;
    Ok(if failed > 0 {
        1
    } else if skipped > 0 {
        3
    } else {
        0
    })
}
