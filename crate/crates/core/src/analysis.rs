//! Relations between commitment plans and ordinary (coarse) correlated
//! equilibria: the single-leader optimal commitment, the embedding of a
//! plan into the all-leader game, and the construction of a stable plan
//! from any coarse equilibrium.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::game::{
    expected_utility, is_cce, CorrelatedDistribution, NormalFormGame, StackelbergGame,
    StrategyProfile,
};
use crate::oracle::{OracleObjective, StabilityOracle};
use crate::rational::Rational;
use crate::solver::{verify_stability, StabilityMode, VerifyError};
use crate::vector::{all_ordered_subsets, DistributionVector};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("operation requires exactly one leader, game has {0}")]
    NotSingleLeader(usize),
    #[error("input vector is not perfectly stable")]
    NotPerfectlyStable,
    #[error("input distribution is not a coarse correlated equilibrium")]
    NotCoarse,
    #[error("{0} players exceed the all-leader materialization limit of 6")]
    TooManyPlayers(usize),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Utility-maximizing correlated strategy to commit to for a single-leader
/// game: one oracle query maximizing the leader's utility over the
/// followers' incentive polytope.
pub fn optimal_commitment(
    sg: &StackelbergGame,
) -> Result<(CorrelatedDistribution, Rational), AnalysisError> {
    if sg.leader_count() != 1 {
        return Err(AnalysisError::NotSingleLeader(sg.leader_count()));
    }
    let leader = sg.leaders()[0];
    let game = sg.game();
    let oracle = StabilityOracle::new(sg);
    let mut coefficients = vec![Rational::from_integer(0.into()); game.player_count()];
    coefficients[leader] = Rational::from_integer(1.into());
    let objective = OracleObjective::new(coefficients).expect("unit coefficient");
    let x = oracle
        .optimize(&objective, &sg.leader_set(), &[])
        .expect("the follower polytope is never empty");
    let value = expected_utility(game, &x, leader);
    Ok((x, value))
}

/// Embeds a perfectly stable plan of `(G, L, F)` into the all-leader game
/// `(G, N, ∅)`: the entry for a record is the entry of its restriction to
/// the original leaders. The agreement entry is unchanged and the output is
/// perfectly stable again (followers defecting changes nothing).
pub fn lift_to_all_leaders(
    sg: &StackelbergGame,
    vector: &DistributionVector,
) -> Result<(StackelbergGame, DistributionVector), AnalysisError> {
    let n = sg.game().player_count();
    if n > 6 {
        return Err(AnalysisError::TooManyPlayers(n));
    }
    if !verify_stability(sg, vector, StabilityMode::Perfect)? {
        return Err(AnalysisError::NotPerfectlyStable);
    }
    let leaders = sg.leader_set();
    let everyone: Vec<usize> = (0..n).collect();
    let mut entries = BTreeMap::new();
    for record in all_ordered_subsets(&everyone) {
        let restricted = record.intersect(&leaders);
        let x = vector
            .lookup(&restricted)
            .ok_or_else(|| VerifyError::Vector(crate::vector::VectorError::MissingKey(
                restricted.to_string(),
            )))?;
        entries.insert(record, x.clone());
    }
    let lifted_sg = StackelbergGame::all_leaders(sg.game().clone());
    Ok((lifted_sg, DistributionVector::Full(entries)))
}

/// Best pure response to a distribution: the strategy maximizing the
/// player's expected utility against it, lowest index among ties.
pub fn best_pure_response(
    game: &NormalFormGame,
    x: &CorrelatedDistribution,
    player: usize,
) -> usize {
    let mut best = 0;
    let mut best_value: Option<Rational> = None;
    for strategy in 0..game.strategy_count(player) {
        let value = x
            .support()
            .fold(Rational::from_integer(0.into()), |acc, (profile, w)| {
                acc + w * game.utility(&profile.with_choice(player, strategy), player)
            });
        if best_value.as_ref().map_or(true, |current| value > *current) {
            best = strategy;
            best_value = Some(value);
        }
    }
    best
}

/// Turns any coarse correlated equilibrium into a stable plan for the
/// all-leader game with the same agreement entry.
///
/// Each single-defector entry collapses the defector's mass onto her best
/// pure response, which satisfies her incentive constraints and cannot give
/// her more than she had; deeper records share one full-equilibrium
/// distribution.
pub fn cce_to_stable(
    game: &NormalFormGame,
    x: &CorrelatedDistribution,
) -> Result<(StackelbergGame, DistributionVector), AnalysisError> {
    if !is_cce(game, x) {
        return Err(AnalysisError::NotCoarse);
    }
    let n = game.player_count();
    if n > 6 {
        return Err(AnalysisError::TooManyPlayers(n));
    }
    let sg = StackelbergGame::all_leaders(game.clone());

    let mut entries = BTreeMap::new();
    entries.insert(crate::vector::DefectionKey::Empty, x.clone());
    for player in 0..n {
        let collapsed = collapse_onto_best_response(game, x, player);
        let key = crate::vector::DefectionKey::new([player].into_iter().collect(), player)
            .expect("singleton key");
        entries.insert(key, collapsed);
    }
    if n >= 2 {
        // One shared full equilibrium for every deeper record.
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::new(vec![Rational::from_integer(0.into()); n])
            .expect("zero objective");
        let deep = oracle
            .optimize(&objective, &BTreeSet::new(), &[])
            .expect("the equilibrium polytope is never empty");
        for key in crate::vector::all_defection_keys(sg.leaders()) {
            if key.defectors().len() >= 2 {
                entries.insert(key, deep.clone());
            }
        }
    }
    Ok((sg, DistributionVector::Compact(entries)))
}

/// All of `player`'s mass moved onto her best pure response: the marginal
/// over the others is kept, her coordinate is replaced.
pub fn collapse_onto_best_response(
    game: &NormalFormGame,
    x: &CorrelatedDistribution,
    player: usize,
) -> CorrelatedDistribution {
    let response = best_pure_response(game, x, player);
    let mut mass: BTreeMap<StrategyProfile, Rational> = BTreeMap::new();
    for (profile, weight) in x.support() {
        let moved = profile.with_choice(player, response);
        *mass.entry(moved).or_insert_with(|| Rational::from_integer(0.into())) += weight;
    }
    CorrelatedDistribution::new(mass).expect("mass is conserved")
}
