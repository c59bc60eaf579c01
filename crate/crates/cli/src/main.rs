//! `mpg`: exact mean-payoff solver for perfect-information stochastic games.
//!
//! Exit codes: 0 success, 1 `check` found a violated coordinate, 2 input
//! error, 3 enumeration or iteration cap exceeded, 4 internal invariant
//! violation, 5 the requested method (plain `pi`) cycled or hit a
//! non-constant gain.

mod report;

use std::num::NonZeroU64;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mpg_core::bench::{run_bench, BenchConfig};
use mpg_core::game::{parse_any, Game, GameInput, MinPolicy};
use mpg_core::map::{map_grid, MapSpec};
use mpg_core::oracle::{brute_chibar, first_violation};
use mpg_core::par::Exec;
use mpg_core::random::{Degeneracy, GameParams};
use mpg_core::shapley::eval_t;
use mpg_core::two_player::{solve_deterministic, solve_perturbed, solve_pi, PiOptions};
use mpg_core::{Error, PiError, Rat};

use report::{CheckOutcome, SolveOutput};

#[derive(Parser, Debug)]
#[command(
    name = "mpg",
    version,
    about = "Exact mean payoff of finite stochastic games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper mean payoff, optimal policies and eigenpair.
    Solve(SolveArgs),
    /// Brute-force enumeration of all policy pairs.
    Oracle(OracleArgs),
    /// Checks `T(u) = λe + u` exactly.
    Check(CheckArgs),
    /// Bias-uniqueness certificates on a grid of payment shifts (CSV).
    Map(MapArgs),
    /// Plain policy iteration vs perturbed vs oracle on seeded random games.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    /// `pi`, falling back to `perturbed` on a cycle or non-constant gain.
    Auto,
    Pi,
    Perturbed,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Enumeration cap on policy pairs (oracle and cross-checks).
    #[arg(long, default_value = "1000000")]
    cap: NonZeroU64,
    #[arg(long)]
    format: Option<Format>,
    /// Run enumerations on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn cap(&self) -> u128 {
        self.cap.get().into()
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    /// Initial Min policy as comma-separated action indices, one per state.
    #[arg(long, value_delimiter = ',')]
    sigma0: Option<Vec<usize>>,
    /// Outer policy-iteration cap (default: twice the number of Min policies).
    #[arg(long)]
    iter_cap: Option<NonZeroU64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    file: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Rat,
    /// File holding `u`: a JSON array of rationals, or rationals separated
    /// by whitespace or commas.
    #[arg(long)]
    u: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MapArgs {
    file: PathBuf,
    /// The two (0-based) states whose shifts vary; equal states give a line.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    axes: Vec<usize>,
    /// Shift at the other states, comma-separated (default all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base: Option<Vec<Rat>>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Rat,
    #[arg(long, allow_hyphen_values = true)]
    hi: Rat,
    #[arg(long)]
    step: Rat,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    games: usize,
    #[arg(long, default_value_t = 4)]
    max_states: usize,
    #[arg(long, default_value_t = 3)]
    max_actions: usize,
    #[arg(long, default_value_t = 4)]
    max_den: u32,
    /// Copy an action or reply verbatim.
    #[arg(long)]
    duplicate_actions: bool,
    /// Payments giving every policy pair the same gain.
    #[arg(long)]
    tied_cycle_means: bool,
    /// Absorbing states, several final classes.
    #[arg(long)]
    reducible: bool,
    #[command(flatten)]
    common: Common,
}

/// A failed run: exit code plus message for stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::InvariantViolation(_) => 2,
            Error::EnumerationTooLarge { .. }
            | Error::PolicyIteration(PiError::IterationCap(_)) => 3,
            Error::PolicyIteration(_) | Error::NonConstantGain(_) => 5,
            Error::DivisionByZero | Error::SingularMatrix | Error::Internal(_) => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<GameInput, Failure> {
    parse_any(&read_text(path)?).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn stochastic(input: &GameInput) -> Result<Game, Failure> {
    match input {
        GameInput::Stochastic(g) => Ok(g.clone()),
        GameInput::Deterministic(dg) => Ok(dg.encode()?),
    }
}

fn pick_format(
    requested: Option<Format>,
    default: Format,
    allowed: &[Format],
) -> Result<Format, Failure> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::input(
            format!("format {f:?} is not supported by this command").to_lowercase(),
        ))
    }
}

fn cmd_solve(args: &SolveArgs) -> Outcome {
    let format = pick_format(
        args.common.format,
        Format::Json,
        &[Format::Json, Format::Text],
    )?;
    let input = read_input(&args.file)?;
    let game = stochastic(&input)?;
    let sigma0 = args.sigma0.clone().map(MinPolicy::new);
    if sigma0.as_ref().is_some_and(|s| !s.is_valid_for(&game)) {
        return Err(Failure::input(
            "--sigma0 is not a valid Min policy for this game",
        ));
    }
    let opts = PiOptions {
        sigma0,
        iteration_cap: args
            .iter_cap
            .map(|c| usize::try_from(c.get()).unwrap_or(usize::MAX)),
        crosscheck_cap: args.common.cap(),
        ..PiOptions::default()
    };
    let out = match (args.method, &input) {
        (Method::Oracle, _) => SolveOutput::Oracle(Box::new(brute_chibar(
            &game,
            args.common.cap(),
            args.common.exec(),
        )?)),
        (Method::Auto, GameInput::Deterministic(dg)) => {
            SolveOutput::solved(solve_deterministic(dg, &opts)?, None)
        }
        (Method::Auto, GameInput::Stochastic(_)) => match solve_pi(&game, &opts) {
            Ok(rep) => SolveOutput::solved(rep, None),
            Err(Error::PolicyIteration(
                e @ (PiError::CycleDetected { .. } | PiError::NonConstantGain(_)),
            )) => SolveOutput::solved(solve_perturbed(&game, &opts)?, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        },
        (Method::Pi, _) => SolveOutput::solved(solve_pi(&game, &opts)?, None),
        (Method::Perturbed, _) => SolveOutput::solved(solve_perturbed(&game, &opts)?, None),
    };
    Ok(match format {
        Format::Json => report::json("solve", &out),
        _ => out.to_text(),
    })
}

fn cmd_oracle(args: &OracleArgs) -> Outcome {
    let format = pick_format(
        args.common.format,
        Format::Json,
        &[Format::Json, Format::Text],
    )?;
    let game = stochastic(&read_input(&args.file)?)?;
    let rep = brute_chibar(&game, args.common.cap(), args.common.exec())?;
    Ok(match format {
        Format::Json => report::json("oracle", &rep),
        _ => report::oracle_text(&rep),
    })
}

fn parse_vector(text: &str) -> Result<Vec<Rat>, Failure> {
    if let Ok(v) = serde_json::from_str::<Vec<Rat>>(text) {
        return Ok(v);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Rat>().map_err(Failure::input))
        .collect()
}

fn cmd_check(args: &CheckArgs) -> Result<(String, bool), Failure> {
    let format = pick_format(
        args.common.format,
        Format::Text,
        &[Format::Json, Format::Text],
    )?;
    let game = stochastic(&read_input(&args.file)?)?;
    let u = parse_vector(&read_text(&args.u)?)?;
    if u.len() != game.n() {
        return Err(Failure::input(format!(
            "u has {} entries, the game has {} states",
            u.len(),
            game.n()
        )));
    }
    let outcome = match first_violation(&game, &args.lambda, &u) {
        None => CheckOutcome::ok(),
        Some(i) => CheckOutcome::violated(i, eval_t(&game, &u)[i].clone(), &args.lambda + &u[i]),
    };
    let ok = outcome.ok;
    let text = match format {
        Format::Json => report::json("check", &outcome),
        _ => outcome.to_text(),
    };
    Ok((text, ok))
}

fn cmd_map(args: &MapArgs) -> Result<(String, Option<Failure>), Failure> {
    pick_format(args.common.format, Format::Csv, &[Format::Csv])?;
    let game = stochastic(&read_input(&args.file)?)?;
    let axes = match args.axes.as_slice() {
        [i, j] => (*i, *j),
        _ => return Err(Failure::input("--axes takes two state indices, e.g. 0,1")),
    };
    let spec = MapSpec {
        axes,
        base: args
            .base
            .clone()
            .unwrap_or_else(|| vec![Rat::zero(); game.n()]),
        lo: args.lo.clone(),
        hi: args.hi.clone(),
        step: args.step.clone(),
    };
    let out = map_grid(&game, &spec, args.common.cap(), args.common.exec())?;
    let csv = out.to_csv(game.n());
    Ok((csv, out.error.map(Failure::from)))
}

fn cmd_bench(args: &BenchArgs) -> Outcome {
    let format = pick_format(
        args.common.format,
        Format::Text,
        &[Format::Json, Format::Text],
    )?;
    if args.max_states == 0 || args.max_actions == 0 || args.max_den == 0 {
        return Err(Failure::input("game size bounds must be positive"));
    }
    let cfg = BenchConfig {
        seed: args.seed,
        games: args.games,
        params: GameParams {
            max_states: args.max_states,
            max_min_actions: args.max_actions,
            max_max_actions: args.max_actions,
            max_den: args.max_den,
            degeneracy: Degeneracy {
                duplicate_actions: args.duplicate_actions,
                tied_cycle_means: args.tied_cycle_means,
                reducible: args.reducible,
            },
            ..GameParams::default()
        },
        cap: args.common.cap(),
    };
    let rep = run_bench(&cfg, args.common.exec())?;
    if rep.summary.perturbed_agree != rep.summary.games || rep.summary.pi_mismatch > 0 {
        return Err(Failure {
            code: 4,
            message: format!("solver disagreed with the oracle\n{}", rep.to_text()),
        });
    }
    Ok(match format {
        Format::Json => report::json("bench", &rep),
        _ => rep.to_text(),
    })
}

fn finish(result: Outcome) -> ExitCode {
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("error: {}", f.message);
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(a) => finish(cmd_solve(a)),
        Command::Oracle(a) => finish(cmd_oracle(a)),
        Command::Bench(a) => finish(cmd_bench(a)),
        Command::Check(a) => match cmd_check(a) {
            Ok((text, ok)) => {
                print!("{text}");
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(f) => fail(f),
        },
        Command::Map(a) => match cmd_map(a) {
            Ok((csv, partial)) => {
                print!("{csv}");
                partial.map_or(ExitCode::SUCCESS, fail)
            }
            Err(f) => fail(f),
        },
    }
}
