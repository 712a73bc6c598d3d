//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification answers "no", 2 on any
//! input error. Rationals are printed as `"a/b"` strings; integers are
//! accepted on input only.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sce_core::analysis::{cce_to_stable, lift_to_all_leaders, optimal_commitment};
use sce_core::document::{
    distribution_to_value, game_to_value, load_game, load_vector, report_to_value,
    vector_to_value,
};
use sce_core::fixtures;
use sce_core::game::{expected_utility, StackelbergGame};
use sce_core::hardness::{dnf_to_sg, is_tautology, DnfFormula};
use sce_core::oracle::{OracleObjective, StabilityOracle};
use sce_core::rational::{format_rational, parse_rational};
use sce_core::solver::{
    solve_f_sce_pa, solve_opt_sce, solve_opt_sce_pa, verify_efficiency, verify_stability,
    EfficiencyMode, LeaderWeights, StabilityMode, VerifyError,
};
use sce_core::vector::DistributionVector;

#[derive(Parser)]
#[command(
    name = "sce",
    about = "Stackelberg correlated equilibria: exact solvers and verifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the parallel lanes (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal stable-and-efficient plan for weighted leader utilities.
    SolveSce(SolveArgs),
    /// Some perfectly stable and efficient plan (weights must be positive).
    SolveScePaAny(SolveArgs),
    /// Optimal perfectly stable plan (exponential oracle budget).
    SolveScePaOpt(SolveArgs),
    /// Check a plan document against a game.
    Verify {
        /// Game document path.
        game: PathBuf,
        /// Plan document path.
        #[arg(long)]
        vector: PathBuf,
        /// What to check.
        #[arg(long, value_enum)]
        mode: VerifyMode,
    },
    /// Single-leader optimal correlated strategy to commit to.
    OptimalCommitment {
        /// Game document path.
        game: PathBuf,
    },
    /// Re-derive the embedding and collapse relations on a game.
    Relations {
        /// Game document path.
        game: PathBuf,
    },
    /// Build the tautology-reduction game from a formula like "(v1 & !v2) | (v3)".
    Dnf {
        /// The formula text.
        formula: String,
        /// Also decide tautology and verify the witness plan.
        #[arg(long)]
        check: bool,
        /// Add the welfare leader that makes the witness welfare-optimal.
        #[arg(long)]
        swmax: bool,
    },
    /// List and re-check the bundled example games.
    Fixtures,
}

#[derive(Args)]
struct SolveArgs {
    /// Game document path.
    game: PathBuf,
    /// Comma-separated leader weights, e.g. "1,1/2".
    #[arg(long)]
    lambda: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    FirstLevel,
    Perfect,
    Sce,
    ScePa,
}

/// Anything that should terminate with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(error: E) -> Self {
        InputError(error.to_string())
    }
}

struct Outcome {
    document: Value,
    verdict: bool,
}

impl Outcome {
    fn ok(document: Value) -> Self {
        Outcome {
            document,
            verdict: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_with_threads(&cli) {
        Ok(outcome) => {
            let rendered =
                serde_json::to_string_pretty(&outcome.document).expect("serializable output");
            match &cli.out {
                None => println!("{rendered}"),
                Some(path) => {
                    if let Err(error) = fs::write(path, rendered + "\n") {
                        eprintln!("error: cannot write {}: {error}", path.display());
                        return ExitCode::from(2);
                    }
                }
            }
            if outcome.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(cli: &Cli) -> Result<Outcome, InputError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
        .map_err(|e| InputError(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run(cli))
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(cli: &Cli) -> Result<Outcome, InputError> {
    if cli.threads > 1 {
        eprintln!("note: built without parallel support; --threads ignored");
    }
    run(cli)
}

fn run(cli: &Cli) -> Result<Outcome, InputError> {
    match &cli.command {
        Command::SolveSce(args) => {
            let sg = read_game(&args.game)?;
            let weights = parse_weights(&args.lambda, sg.leader_count())?;
            let report = solve_opt_sce(&sg, &weights)?;
            Ok(Outcome::ok(report_to_value(&report)))
        }
        Command::SolveScePaAny(args) => {
            let sg = read_game(&args.game)?;
            let weights = parse_weights(&args.lambda, sg.leader_count())?;
            let report = solve_f_sce_pa(&sg, &weights)?;
            Ok(Outcome::ok(report_to_value(&report)))
        }
        Command::SolveScePaOpt(args) => {
            let sg = read_game(&args.game)?;
            let weights = parse_weights(&args.lambda, sg.leader_count())?;
            let report = solve_opt_sce_pa(&sg, &weights)?;
            Ok(Outcome::ok(report_to_value(&report)))
        }
        Command::Verify { game, vector, mode } => {
            let sg = read_game(game)?;
            let text = read_file(vector)?;
            let plan = load_vector(&text, &sg)?;
            run_verify(&sg, &plan, *mode)
        }
        Command::OptimalCommitment { game } => {
            let sg = read_game(game)?;
            let (distribution, value) = optimal_commitment(&sg)?;
            Ok(Outcome::ok(json!({
                "value": format_rational(&value),
                "distribution": distribution_to_value(&distribution),
            })))
        }
        Command::Relations { game } => {
            let sg = read_game(game)?;
            run_relations(&sg)
        }
        Command::Dnf {
            formula,
            check,
            swmax,
        } => {
            let parsed = DnfFormula::parse(formula)?;
            let (sg, witness) = dnf_to_sg(&parsed, *swmax)?;
            let mut document = json!({
                "formula": formula,
                "variables": parsed.variables(),
                "game": game_to_value(&sg),
                "witness": vector_to_value(&witness),
            });
            let mut verdict = true;
            if *check {
                let tautology = is_tautology(&parsed)?;
                let stable = verify_stability(&sg, &witness, StabilityMode::Perfect)
                    .map_err(|e| InputError(e.to_string()))?;
                let object = document.as_object_mut().expect("object");
                object.insert("tautology".into(), Value::Bool(tautology));
                object.insert("perfectly_stable".into(), Value::Bool(stable));
                verdict = stable;
            }
            Ok(Outcome { document, verdict })
        }
        Command::Fixtures => run_fixtures(),
    }
}

fn run_verify(
    sg: &StackelbergGame,
    plan: &DistributionVector,
    mode: VerifyMode,
) -> Result<Outcome, InputError> {
    let (name, result) = match mode {
        VerifyMode::FirstLevel => (
            "first-level",
            verify_stability(sg, plan, StabilityMode::FirstLevel),
        ),
        VerifyMode::Perfect => ("perfect", verify_stability(sg, plan, StabilityMode::Perfect)),
        VerifyMode::Sce => ("sce", verify_efficiency(sg, plan, EfficiencyMode::Sce)),
        VerifyMode::ScePa => ("sce-pa", verify_efficiency(sg, plan, EfficiencyMode::ScePa)),
    };
    match result {
        Ok(verdict) => Ok(Outcome {
            document: json!({ "mode": name, "verdict": verdict }),
            verdict,
        }),
        // A failed stability precondition is a "no" with a reason, not an
        // input error.
        Err(VerifyError::UnstableInput(required)) => Ok(Outcome {
            document: json!({
                "mode": name,
                "verdict": false,
                "reason": format!("stability precondition failed ({required:?})"),
            }),
            verdict: false,
        }),
        Err(error) => Err(error.into()),
    }
}

fn run_relations(sg: &StackelbergGame) -> Result<Outcome, InputError> {
    let game = sg.game();
    let mut checks = Vec::new();
    let mut push = |name: &str, holds: bool| {
        checks.push(json!({ "name": name, "holds": holds }));
        holds
    };

    let oracle = StabilityOracle::new(sg);
    let welfare = OracleObjective::social_welfare(game.player_count());
    let best_ce = oracle
        .optimize(&welfare, &std::collections::BTreeSet::new(), &[])
        .ok_or_else(|| InputError("equilibrium polytope unexpectedly empty".into()))?;

    let constant = DistributionVector::constant(sg.leaders(), best_ce.clone());
    let mut all = push(
        "constant-equilibrium-plan-perfectly-stable",
        verify_stability(sg, &constant, StabilityMode::Perfect)?,
    );

    let pa = solve_f_sce_pa(sg, &LeaderWeights::uniform(sg.leader_count()))?;
    all &= push(
        "pa-plan-perfectly-stable",
        verify_stability(sg, &pa.vector, StabilityMode::Perfect)?,
    );

    if game.player_count() <= 6 {
        let (lifted_sg, lifted) = lift_to_all_leaders(sg, &pa.vector)?;
        all &= push(
            "lift-preserves-perfect-stability",
            verify_stability(&lifted_sg, &lifted, StabilityMode::Perfect)?
                && lifted.empty_entry() == pa.vector.empty_entry(),
        );

        let (all_leader_sg, collapsed) = cce_to_stable(game, &best_ce)?;
        let stable = verify_stability(&all_leader_sg, &collapsed, StabilityMode::FirstLevel)?;
        let never_gains = game.players().all(|p| {
            let record = sce_core::vector::OrderedSubset::new(vec![p]).expect("single player");
            let reply = collapsed.lookup(&record).expect("complete plan");
            expected_utility(game, reply, p) <= expected_utility(game, &best_ce, p)
        });
        all &= push("coarse-collapse-stable-and-never-gains", stable && never_gains);
    }

    Ok(Outcome {
        document: json!({ "checks": checks }),
        verdict: all,
    })
}

fn run_fixtures() -> Result<Outcome, InputError> {
    let mut entries = Vec::new();
    let mut all = true;
    for fixture in fixtures::corpus() {
        let status = match fixture.check() {
            Ok(()) => "ok".to_string(),
            Err(error) => {
                all = false;
                format!("failed: {error}")
            }
        };
        entries.push(json!({
            "name": fixture.name,
            "demonstrates": fixture.demonstrates,
            "status": status,
        }));
    }
    Ok(Outcome {
        document: json!({ "fixtures": entries }),
        verdict: all,
    })
}

fn read_file(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn read_game(path: &Path) -> Result<StackelbergGame, InputError> {
    Ok(load_game(&read_file(path)?)?)
}

fn parse_weights(text: &str, leader_count: usize) -> Result<LeaderWeights, InputError> {
    let mut weights = Vec::new();
    for part in text.split(',') {
        weights.push(
            parse_rational(part).map_err(|e| InputError(format!("bad weight `{part}`: {e}")))?,
        );
    }
    if weights.len() != leader_count {
        return Err(InputError(format!(
            "expected {leader_count} leader weights, got {}",
            weights.len()
        )));
    }
    Ok(LeaderWeights::new(weights)?)
}
