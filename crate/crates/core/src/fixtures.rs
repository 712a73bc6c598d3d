//! Bundled example games. Every fixture carries the facts it is supposed
//! to witness, and `check` re-derives each fact from scratch with the
//! library's own predicates, oracles, and LPs.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::document::{load_game, load_vector};
use crate::game::{
    expected_utility, is_cce, CorrelatedDistribution, GameError, StackelbergGame, StrategyProfile,
};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Relation};
use crate::oracle::{incentive_rows, OracleObjective, StabilityConstraint, StabilityOracle};
use crate::rational::{rat, Rational};
use crate::solver::{
    solve_f_sce_pa, solve_opt_sce_pa, verify_efficiency, verify_stability, EfficiencyMode,
    LeaderWeights, StabilityMode,
};
use crate::vector::{DefectionKey, DistributionVector, OrderedSubset};

const FIG1_LEFT: &str = include_str!("../fixtures/fig1_left.json");
const TABLE2_NO_PAPE: &str = include_str!("../fixtures/table2_no_pape.json");
const TABLE4_ORDERING: &str = include_str!("../fixtures/table4_ordering.json");
const TABLE5_LEFT: &str = include_str!("../fixtures/table5_left.json");
const TABLE5_RIGHT: &str = include_str!("../fixtures/table5_right.json");
const EXAMPLE_X: &str = include_str!("../fixtures/example_x.json");
const EXAMPLE_X_PRIME: &str = include_str!("../fixtures/example_x_prime.json");

#[derive(Debug, Error)]
#[error("fixture {fixture}: {claim}")]
pub struct FixtureError {
    pub fixture: &'static str,
    pub claim: String,
}

fn ensure(fixture: &'static str, condition: bool, claim: &str) -> Result<(), FixtureError> {
    if condition {
        Ok(())
    } else {
        Err(FixtureError {
            fixture,
            claim: claim.to_string(),
        })
    }
}

pub fn fig1_left() -> Result<StackelbergGame, GameError> {
    load_game(FIG1_LEFT)
}

pub fn table2_no_pape() -> Result<StackelbergGame, GameError> {
    load_game(TABLE2_NO_PAPE)
}

pub fn table4_ordering() -> Result<StackelbergGame, GameError> {
    load_game(TABLE4_ORDERING)
}

pub fn table5_left() -> Result<StackelbergGame, GameError> {
    load_game(TABLE5_LEFT)
}

pub fn table5_right() -> Result<StackelbergGame, GameError> {
    load_game(TABLE5_RIGHT)
}

/// The welfare-gap game: mutual cooperation pays `k` each but is not an
/// equilibrium; the lone equilibrium pays 1 each.
pub fn table6_document(k: i64) -> String {
    format!(
        r#"{{
  "players": 2,
  "strategies": [2, 2],
  "leaders": [1, 2],
  "utilities": [
    [{k},{k}],
    [0,{kp1}],
    [{kp1},0],
    [1,1]
  ]
}}
"#,
        k = k,
        kp1 = k + 1
    )
}

pub fn table6_mlbetter(k: i64) -> Result<StackelbergGame, GameError> {
    load_game(&table6_document(k))
}

/// The example game restricted to a single leader (the row player).
pub fn fig1_left_single_leader() -> Result<StackelbergGame, GameError> {
    let sg = fig1_left()?;
    StackelbergGame::new(sg.game().clone(), vec![0])
}

pub fn table5_left_single_leader() -> Result<StackelbergGame, GameError> {
    let sg = table5_left()?;
    StackelbergGame::new(sg.game().clone(), vec![0])
}

/// The narrative's first hand-built plan: stable and efficient, but the
/// reply to the column player's defection is irrational for the row player.
pub fn example_x(sg: &StackelbergGame) -> DistributionVector {
    load_vector(EXAMPLE_X, sg).expect("bundled vector document is valid")
}

/// The narrative's repaired plan: perfectly stable and efficient.
pub fn example_x_prime(sg: &StackelbergGame) -> DistributionVector {
    load_vector(EXAMPLE_X_PRIME, sg).expect("bundled vector document is valid")
}

pub fn example_x_document() -> &'static str {
    EXAMPLE_X
}

pub fn example_x_prime_document() -> &'static str {
    EXAMPLE_X_PRIME
}

/// One bundled game plus the facts it witnesses.
pub struct RelationFixture {
    pub name: &'static str,
    pub demonstrates: &'static str,
    document: String,
}

impl RelationFixture {
    pub fn document(&self) -> &str {
        &self.document
    }

    pub fn game(&self) -> Result<StackelbergGame, GameError> {
        load_game(&self.document)
    }

    /// Re-derives every claimed fact. An error names the failing claim.
    pub fn check(&self) -> Result<(), FixtureError> {
        match self.name {
            "fig1_left" => check_fig1_left(),
            "table2_no_pape" => check_table2_no_pape(),
            "table4_ordering" => check_table4_ordering(),
            "table5_left" => check_table5_left(),
            "table5_right" => check_table5_right(),
            "table6_mlbetter_k2" => check_table6(2),
            "table6_mlbetter_k3" => check_table6(3),
            "table6_mlbetter_k5" => check_table6(5),
            other => Err(FixtureError {
                fixture: "corpus",
                claim: format!("unknown fixture {other}"),
            }),
        }
    }
}

/// The full corpus, checks included.
pub fn corpus() -> Vec<RelationFixture> {
    vec![
        RelationFixture {
            name: "fig1_left",
            demonstrates: "hand-built plans separating plain from perfect stability",
            document: FIG1_LEFT.to_string(),
        },
        RelationFixture {
            name: "table2_no_pape",
            demonstrates: "no plan is both perfectly stable and perfectly efficient",
            document: TABLE2_NO_PAPE.to_string(),
        },
        RelationFixture {
            name: "table4_ordering",
            demonstrates: "optimal perfectly stable plans must key on the last defector",
            document: TABLE4_ORDERING.to_string(),
        },
        RelationFixture {
            name: "table5_left",
            demonstrates: "a perfectly stable agreement entry need not be coarse",
            document: TABLE5_LEFT.to_string(),
        },
        RelationFixture {
            name: "table5_right",
            demonstrates: "a cyclic game whose uniform-cycle coarse equilibrium does extend to a perfectly stable plan",
            document: TABLE5_RIGHT.to_string(),
        },
        RelationFixture {
            name: "table6_mlbetter_k2",
            demonstrates: "leaders' welfare gap 2k vs 2 against plain equilibria (k=2)",
            document: table6_document(2),
        },
        RelationFixture {
            name: "table6_mlbetter_k3",
            demonstrates: "leaders' welfare gap 2k vs 2 against plain equilibria (k=3)",
            document: table6_document(3),
        },
        RelationFixture {
            name: "table6_mlbetter_k5",
            demonstrates: "leaders' welfare gap 2k vs 2 against plain equilibria (k=5)",
            document: table6_document(5),
        },
    ]
}

fn delta(choices: &[usize]) -> CorrelatedDistribution {
    CorrelatedDistribution::delta(StrategyProfile::new(choices.to_vec()))
}

fn check_fig1_left() -> Result<(), FixtureError> {
    let name = "fig1_left";
    let sg = fig1_left().map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    ensure(name, sg.game().strategy_counts() == [5, 2], "shape is 5x2")?;
    ensure(name, sg.leaders() == [0, 1], "both players lead")?;

    let x = example_x(&sg);
    let stable = verify_stability(&sg, &x, StabilityMode::FirstLevel).unwrap_or(false);
    ensure(name, stable, "plan x is stable")?;
    let perfect = verify_stability(&sg, &x, StabilityMode::Perfect).unwrap_or(true);
    ensure(name, !perfect, "plan x is not perfectly stable")?;
    let efficient = verify_efficiency(&sg, &x, EfficiencyMode::Sce).unwrap_or(false);
    ensure(name, efficient, "plan x is efficient among stable plans")?;

    let x_prime = example_x_prime(&sg);
    let perfect = verify_stability(&sg, &x_prime, StabilityMode::Perfect).unwrap_or(false);
    ensure(name, perfect, "plan x' is perfectly stable")?;
    let efficient = verify_efficiency(&sg, &x_prime, EfficiencyMode::ScePa).unwrap_or(false);
    ensure(name, efficient, "plan x' is efficient among perfectly stable plans")
}

/// Desk-scale derivation that no plan for this game is both perfectly
/// stable and perfectly efficient, following the forced-value chain:
/// third-player entries pin u_3 = 1, pair entries pin the other two to
/// zero, single-defector entries then pin u_1 = u_2 = 2, and no agreement
/// entry can pay both at least 2.
fn check_table2_no_pape() -> Result<(), FixtureError> {
    let name = "table2_no_pape";
    let sg = table2_no_pape().map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    let oracle = StabilityOracle::new(&sg);
    let maximize = |player: usize| {
        let mut c = vec![Rational::zero(); 3];
        c[player] = rat(1);
        OracleObjective::new(c).expect("unit coefficient")
    };
    let minimize = |player: usize| OracleObjective::minimize_player(player, 3);
    let exempt = |players: &[usize]| -> BTreeSet<usize> { players.iter().copied().collect() };
    let value = |x: Option<CorrelatedDistribution>, player: usize| -> Option<Rational> {
        x.map(|x| expected_utility(sg.game(), &x, player))
    };

    // Entries constraining only player 3 always pay her exactly 1.
    let lo = value(oracle.optimize(&minimize(2), &exempt(&[0, 1]), &[]), 2);
    let hi = value(oracle.optimize(&maximize(2), &exempt(&[0, 1]), &[]), 2);
    ensure(name, lo == Some(rat(1)), "third player's floor after defecting is 1")?;
    ensure(name, hi == Some(rat(1)), "third player's ceiling after defecting is 1")?;

    // Two-defector entries keeping player 3 at 1 pay the defectors nothing.
    let floors = [StabilityConstraint::new(2, rat(1))];
    let u1 = value(oracle.optimize(&maximize(0), &exempt(&[2]), &floors), 0);
    let u2 = value(oracle.optimize(&maximize(1), &exempt(&[2]), &floors), 1);
    ensure(name, u1 == Some(rat(0)), "pair entries pay the first defector 0")?;
    ensure(name, u2 == Some(rat(0)), "pair entries pay the second defector 0")?;

    // Single-defector entries: the remaining pair's efficient point pins
    // the defector's payoff at 2.
    let floors_u3 = [StabilityConstraint::new(2, rat(1))];
    let best_u2 = value(oracle.optimize(&maximize(1), &exempt(&[1, 2]), &floors_u3), 1);
    ensure(name, best_u2 == Some(rat(1)), "after 1 defects the pair can reach u_2 = 1")?;
    let pinned = [
        StabilityConstraint::new(1, rat(1)),
        StabilityConstraint::new(2, rat(1)),
    ];
    let forced_u1 = value(oracle.optimize(&minimize(0), &exempt(&[1, 2]), &pinned), 0);
    ensure(name, forced_u1 == Some(rat(2)), "efficiency then forces u_1 = 2")?;

    let best_u1 = value(oracle.optimize(&maximize(0), &exempt(&[0, 2]), &floors_u3), 0);
    ensure(name, best_u1 == Some(rat(1)), "after 2 defects the pair can reach u_1 = 1")?;
    let pinned = [
        StabilityConstraint::new(0, rat(1)),
        StabilityConstraint::new(2, rat(1)),
    ];
    let forced_u2 = value(oracle.optimize(&minimize(1), &exempt(&[0, 2]), &pinned), 1);
    ensure(name, forced_u2 == Some(rat(2)), "efficiency then forces u_2 = 2")?;

    // No distribution at all pays both leaders at least 2.
    let all = exempt(&[0, 1, 2]);
    let impossible = [
        StabilityConstraint::new(0, rat(2)),
        StabilityConstraint::new(1, rat(2)),
    ];
    let outcome = oracle.optimize(&maximize(2), &all, &impossible);
    ensure(name, outcome.is_none(), "no agreement entry pays both leaders 2")
}

fn check_table4_ordering() -> Result<(), FixtureError> {
    let name = "table4_ordering";
    let sg = table4_ordering().map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    let weights = LeaderWeights::new(vec![rat(0), rat(0), rat(1)]).expect("weights in range");
    let report = solve_opt_sce_pa(&sg, &weights).map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    ensure(name, report.objective == rat(10), "optimal plan reaches 10 for the third leader")?;
    ensure(
        name,
        report.vector.empty_entry() == Some(&delta(&[1, 1, 2])),
        "agreement entry is the third leader's jackpot profile",
    )?;
    let last_first = report
        .vector
        .lookup(&OrderedSubset::new(vec![1, 0]).expect("distinct"))
        .cloned();
    let last_second = report
        .vector
        .lookup(&OrderedSubset::new(vec![0, 1]).expect("distinct"))
        .cloned();
    ensure(
        name,
        last_first != last_second && last_first.is_some(),
        "the two orderings of the defecting pair get different entries",
    )?;
    let perfect = verify_stability(&sg, &report.vector, StabilityMode::Perfect).unwrap_or(false);
    ensure(name, perfect, "the produced plan is perfectly stable")
}

fn check_table5_left() -> Result<(), FixtureError> {
    let name = "table5_left";
    let sg = table5_left().map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    ensure(name, is_cce(sg.game(), &delta(&[1, 1])), "the dominant pair is coarse")?;
    ensure(name, !is_cce(sg.game(), &delta(&[0, 0])), "mutual cooperation is not coarse")?;

    let oracle = StabilityOracle::new(&sg);
    let welfare = OracleObjective::social_welfare(2);
    let best = oracle
        .optimize(&welfare, &BTreeSet::new(), &[])
        .expect("equilibria exist");
    ensure(name, best == delta(&[1, 1]), "strict dominance leaves one equilibrium")?;
    ensure(
        name,
        welfare.value_of(sg.game(), &best) == rat(2),
        "the equilibrium's welfare is 2",
    )?;

    // Cooperation backed by reversion to the equilibrium is perfectly
    // stable even though it is not coarse.
    let mut entries = std::collections::BTreeMap::new();
    for key in crate::vector::all_defection_keys(sg.leaders()) {
        let x = if key == DefectionKey::Empty {
            delta(&[0, 0])
        } else {
            delta(&[1, 1])
        };
        entries.insert(key, x);
    }
    let plan = DistributionVector::Compact(entries);
    let perfect = verify_stability(&sg, &plan, StabilityMode::Perfect).unwrap_or(false);
    ensure(name, perfect, "cooperation with equilibrium reversion is perfectly stable")
}

/// The cycle game. It was meant to show a coarse distribution that no
/// perfectly stable all-leader plan can open with, the argument being that
/// the row player's defection entry cannot stay at `u_1 ≤ 0` while paying
/// the column player at least −2. Exact arithmetic refutes that argument:
/// uniform mass on the row player's first row across the cycle columns
/// lies in her incentive polytope and pays (−1/3, −4/3), the uniform 3×3
/// block is a full equilibrium pinning the true defection floors at
/// (−1/3, −4/3), and the resulting completion of the uniform cycle passes
/// perfect-stability verification. This fixture pins down those corrected
/// facts.
fn check_table5_right() -> Result<(), FixtureError> {
    let name = "table5_right";
    let sg = table5_right().map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    let game = sg.game();
    let profile = |a: usize, b: usize| StrategyProfile::new(vec![a, b]);
    let cycle = CorrelatedDistribution::uniform(vec![profile(0, 0), profile(1, 1), profile(2, 2)])
        .expect("three distinct profiles");
    ensure(name, is_cce(game, &cycle), "the uniform cycle is coarse")?;
    ensure(
        name,
        expected_utility(game, &cycle, 0).is_zero()
            && expected_utility(game, &cycle, 1).is_zero(),
        "the cycle pays both players 0",
    )?;

    // The candidate the claimed-empty polytope actually contains.
    let row_reply =
        CorrelatedDistribution::uniform(vec![profile(0, 0), profile(0, 1), profile(0, 2)])
            .expect("three distinct profiles");
    let constrained: BTreeSet<usize> = [0].into_iter().collect();
    ensure(
        name,
        crate::game::is_ce_for(game, &row_reply, &constrained),
        "the first-row reply satisfies the row player's incentive constraints",
    )?;
    ensure(
        name,
        expected_utility(game, &row_reply, 0) == rat(-1) / rat(3)
            && expected_utility(game, &row_reply, 1) == rat(-4) / rat(3),
        "the first-row reply pays (-1/3, -4/3)",
    )?;

    // The exact full-equilibrium floors, frozen.
    let oracle = StabilityOracle::new(&sg);
    let min_u1 = oracle
        .optimize(&OracleObjective::minimize_player(0, 2), &BTreeSet::new(), &[])
        .expect("equilibria exist");
    let min_u2 = oracle
        .optimize(&OracleObjective::minimize_player(1, 2), &BTreeSet::new(), &[])
        .expect("equilibria exist");
    ensure(
        name,
        expected_utility(game, &min_u1, 0) == rat(-1) / rat(3),
        "the row player's equilibrium floor is -1/3",
    )?;
    ensure(
        name,
        expected_utility(game, &min_u2, 1) == rat(-4) / rat(3),
        "the column player's equilibrium floor is -4/3",
    )?;

    // The explicit perfectly stable completion of the uniform cycle.
    let col_reply =
        CorrelatedDistribution::uniform(vec![profile(0, 0), profile(1, 0), profile(2, 0)])
            .expect("three distinct profiles");
    let mut entries = std::collections::BTreeMap::new();
    entries.insert(DefectionKey::Empty, cycle);
    entries.insert(
        DefectionKey::new([0].into_iter().collect(), 0).expect("singleton key"),
        row_reply,
    );
    entries.insert(
        DefectionKey::new([1].into_iter().collect(), 1).expect("singleton key"),
        col_reply,
    );
    entries.insert(
        DefectionKey::new([0, 1].into_iter().collect(), 0).expect("pair key"),
        min_u1,
    );
    entries.insert(
        DefectionKey::new([0, 1].into_iter().collect(), 1).expect("pair key"),
        min_u2,
    );
    let plan = DistributionVector::Compact(entries);
    let perfect = verify_stability(&sg, &plan, StabilityMode::Perfect).unwrap_or(false);
    ensure(
        name,
        perfect,
        "the uniform cycle extends to a perfectly stable all-leader plan",
    )?;

    // The polytope the original argument needs to be empty is not: it
    // contains the first-row reply.
    let profiles = game.profile_count();
    let mut lp = LinearProgram::maximize(vec![Rational::zero(); profiles]);
    let exempt: BTreeSet<usize> = [1].into_iter().collect();
    for row in incentive_rows(game, &exempt) {
        lp.push(row, Relation::Ge, Rational::zero());
    }
    let u1: Vec<Rational> = (0..profiles).map(|i| game.utility_at(i, 0).clone()).collect();
    lp.push(u1, Relation::Le, Rational::zero());
    let u2: Vec<Rational> = (0..profiles).map(|i| game.utility_at(i, 1).clone()).collect();
    lp.push(u2, Relation::Ge, rat(-2));
    lp.push(vec![rat(1); profiles], Relation::Eq, rat(1));
    ensure(
        name,
        matches!(solve_lp(&lp), LpOutcome::Optimal { .. }),
        "the defection-entry polytope claimed empty is in fact feasible",
    )
}

fn check_table6(k: i64) -> Result<(), FixtureError> {
    let name: &'static str = match k {
        2 => "table6_mlbetter_k2",
        3 => "table6_mlbetter_k3",
        5 => "table6_mlbetter_k5",
        _ => "table6_mlbetter",
    };
    let sg = table6_mlbetter(k).map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    let oracle = StabilityOracle::new(&sg);
    let welfare = OracleObjective::social_welfare(2);
    let best_ce = oracle
        .optimize(&welfare, &BTreeSet::new(), &[])
        .expect("equilibria exist");
    ensure(
        name,
        welfare.value_of(sg.game(), &best_ce) == rat(2),
        "best equilibrium welfare is 2",
    )?;

    let weights = LeaderWeights::uniform(2);
    let report = solve_f_sce_pa(&sg, &weights).map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    ensure(name, report.objective == rat(2 * k), "perfectly stable plan reaches welfare 2k")?;
    ensure(
        name,
        report.vector.empty_entry() == Some(&delta(&[0, 0])),
        "agreement entry is mutual cooperation",
    )?;
    let optimal = solve_opt_sce_pa(&sg, &weights).map_err(|e| FixtureError {
        fixture: name,
        claim: e.to_string(),
    })?;
    ensure(name, optimal.objective == rat(2 * k), "optimal plan agrees on 2k")
}
