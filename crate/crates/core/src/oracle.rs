//! The stability oracle: an exact LP that maximizes a weighted utility
//! objective over the distributions satisfying the incentive constraints of
//! every non-exempt player, plus per-leader utility floors.
//!
//! With an empty exempt set and no floors this computes an optimal
//! correlated equilibrium for the given objective.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::Zero;
use thiserror::Error;

use crate::game::{
    expected_utility, is_ce_for, CorrelatedDistribution, NormalFormGame, StackelbergGame,
    StrategyProfile,
};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Relation};
use crate::rational::{in_closed_interval, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("objective must have one coefficient in [-1,1] per player, got {0}")]
    BadObjective(String),
    #[error("player {0} is outside the game")]
    UnknownPlayer(usize),
    #[error("threshold for player {0} requires that player to be exempt")]
    ThresholdNotExempt(usize),
}

/// Per-player objective coefficients, each within [−1, 1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleObjective {
    coefficients: Vec<Rational>,
}

impl OracleObjective {
    pub fn new(coefficients: Vec<Rational>) -> Result<Self, OracleError> {
        for c in &coefficients {
            if !in_closed_interval(c, -1, 1) {
                return Err(OracleError::BadObjective(crate::rational::format_rational(c)));
            }
        }
        Ok(OracleObjective { coefficients })
    }

    /// Weighted leader objective: `weights[i]` on the i-th listed leader,
    /// zero on everyone else.
    pub fn weighted_leaders(
        sg: &StackelbergGame,
        weights: &[Rational],
    ) -> Result<Self, OracleError> {
        let n = sg.game().player_count();
        let mut coefficients = vec![Rational::zero(); n];
        for (leader, weight) in sg.leaders().iter().zip(weights) {
            coefficients[*leader] = weight.clone();
        }
        OracleObjective::new(coefficients)
    }

    /// Minimization of one player's utility: −1 on `player`, zero elsewhere.
    pub fn minimize_player(player: usize, player_count: usize) -> Self {
        let mut coefficients = vec![Rational::zero(); player_count];
        coefficients[player] = -Rational::from_integer(1.into());
        OracleObjective { coefficients }
    }

    /// Social welfare: coefficient 1 for every player.
    pub fn social_welfare(player_count: usize) -> Self {
        OracleObjective {
            coefficients: vec![Rational::from_integer(1.into()); player_count],
        }
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// `Σ_p c_p·u_p(s)` at a pure profile.
    pub fn value_at(&self, game: &NormalFormGame, profile: &StrategyProfile) -> Rational {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::zero(), |acc, (p, c)| {
                acc + c * game.utility(profile, p)
            })
    }

    pub fn value_of(&self, game: &NormalFormGame, x: &CorrelatedDistribution) -> Rational {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::zero(), |acc, (p, c)| {
                acc + c * expected_utility(game, x, p)
            })
    }
}

/// A utility floor `u_p(x) ≥ threshold` for an exempt leader `p`. The
/// threshold is the punishment value the leader can guarantee by defecting,
/// precomputed by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityConstraint {
    pub player: usize,
    pub threshold: Rational,
}

impl StabilityConstraint {
    pub fn new(player: usize, threshold: Rational) -> Self {
        StabilityConstraint { player, threshold }
    }
}

/// Oracle over one Stackelberg game. Stateless apart from a query counter
/// that can be bumped from concurrent optimization calls.
#[derive(Debug)]
pub struct StabilityOracle<'a> {
    sg: &'a StackelbergGame,
    queries: AtomicU64,
}

impl<'a> StabilityOracle<'a> {
    pub fn new(sg: &'a StackelbergGame) -> Self {
        StabilityOracle {
            sg,
            queries: AtomicU64::new(0),
        }
    }

    pub fn game(&self) -> &StackelbergGame {
        self.sg
    }

    /// Number of optimization queries answered so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::SeqCst)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::SeqCst);
    }

    /// Maximizes `Σ_p c_p·u_p(x)` over the distributions that satisfy the
    /// incentive constraints of every player outside `exempt` and every
    /// utility floor in `floors`. Returns `None` iff that polytope is empty
    /// (possible only when the floors overshoot).
    pub fn optimize(
        &self,
        objective: &OracleObjective,
        exempt: &BTreeSet<usize>,
        floors: &[StabilityConstraint],
    ) -> Option<CorrelatedDistribution> {
        self.queries.fetch_add(1, Ordering::SeqCst);
        let game = self.sg.game();
        let lp = build_oracle_lp(game, objective, exempt, floors);
        match solve_lp(&lp) {
            LpOutcome::Optimal { solution, .. } => {
                let mut mass = std::collections::BTreeMap::new();
                for (index, weight) in solution.into_iter().enumerate() {
                    if !weight.is_zero() {
                        mass.insert(game.profile_at(index), weight);
                    }
                }
                Some(
                    CorrelatedDistribution::new(mass)
                        .expect("LP vertex is a probability distribution"),
                )
            }
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => {
                unreachable!("feasible region is contained in the probability simplex")
            }
        }
    }

    /// Decision form: pure membership test, no optimization. True iff `x`
    /// satisfies the incentive constraints of every player outside `exempt`
    /// and every floor.
    pub fn decide(
        &self,
        x: &CorrelatedDistribution,
        exempt: &BTreeSet<usize>,
        floors: &[StabilityConstraint],
    ) -> bool {
        let game = self.sg.game();
        let constrained: BTreeSet<usize> =
            game.players().filter(|p| !exempt.contains(p)).collect();
        if !is_ce_for(game, x, &constrained) {
            return false;
        }
        floors
            .iter()
            .all(|f| expected_utility(game, x, f.player) >= f.threshold)
    }

    /// Validates an exempt set and floor list against the game.
    pub fn check_arguments(
        &self,
        exempt: &BTreeSet<usize>,
        floors: &[StabilityConstraint],
    ) -> Result<(), OracleError> {
        let n = self.sg.game().player_count();
        for &p in exempt {
            if p >= n {
                return Err(OracleError::UnknownPlayer(p));
            }
        }
        for f in floors {
            if f.player >= n {
                return Err(OracleError::UnknownPlayer(f.player));
            }
            if !exempt.contains(&f.player) {
                return Err(OracleError::ThresholdNotExempt(f.player));
            }
        }
        Ok(())
    }
}

/// The oracle's LP over `x ∈ Δ(S)`. Constraint order is fixed for
/// reproducibility: incentive rows sorted by (player, recommended strategy,
/// deviation strategy), then floors sorted by player, then the mass row.
pub fn build_oracle_lp(
    game: &NormalFormGame,
    objective: &OracleObjective,
    exempt: &BTreeSet<usize>,
    floors: &[StabilityConstraint],
) -> LinearProgram {
    let profiles = game.profile_count();
    let coeffs: Vec<Rational> = (0..profiles)
        .map(|i| objective.value_at(game, &game.profile_at(i)))
        .collect();
    let mut lp = LinearProgram::maximize(coeffs);

    for row in incentive_rows(game, exempt) {
        lp.push(row, Relation::Ge, Rational::zero());
    }

    let mut sorted: Vec<&StabilityConstraint> = floors.iter().collect();
    sorted.sort_by_key(|f| f.player);
    for floor in sorted {
        let row: Vec<Rational> = (0..profiles)
            .map(|i| game.utility_at(i, floor.player).clone())
            .collect();
        lp.push(row, Relation::Ge, floor.threshold.clone());
    }

    let ones = vec![Rational::from_integer(1.into()); profiles];
    lp.push(ones, Relation::Eq, Rational::from_integer(1.into()));
    lp
}

/// One row per (constrained player, recommended strategy, deviation), in
/// that sort order: `Σ_{s_-p} x(s_p, s_-p)·(u_p(s) − u_p(s'_p, s_-p)) ≥ 0`.
pub fn incentive_rows(game: &NormalFormGame, exempt: &BTreeSet<usize>) -> Vec<Vec<Rational>> {
    let profiles = game.profile_count();
    let mut rows = Vec::new();
    for player in game.players() {
        if exempt.contains(&player) {
            continue;
        }
        for recommended in 0..game.strategy_count(player) {
            for deviation in 0..game.strategy_count(player) {
                if deviation == recommended {
                    continue;
                }
                let mut row = vec![Rational::zero(); profiles];
                for index in 0..profiles {
                    let profile = game.profile_at(index);
                    if profile.choices[player] != recommended {
                        continue;
                    }
                    let deviated = profile.with_choice(player, deviation);
                    row[index] =
                        game.utility(&profile, player) - game.utility(&deviated, player);
                }
                rows.push(row);
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::rat;

    fn delta(choices: &[usize]) -> CorrelatedDistribution {
        CorrelatedDistribution::delta(StrategyProfile::new(choices.to_vec()))
    }

    #[test]
    fn unique_equilibrium_under_strict_dominance() {
        let sg = fixtures::table5_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let x = oracle.optimize(&objective, &BTreeSet::new(), &[]).unwrap();
        assert_eq!(x, delta(&[1, 1]));
        assert_eq!(objective.value_of(sg.game(), &x), rat(2));
        assert_eq!(oracle.queries(), 1);
    }

    #[test]
    fn fully_exempt_call_returns_pure_argmax() {
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let everyone: BTreeSet<usize> = [0, 1].into_iter().collect();
        let x = oracle.optimize(&objective, &everyone, &[]).unwrap();
        assert_eq!(x.support_size(), 1, "vertex of the bare simplex is pure");
        // max u_1 + u_2 over the example payoffs is 5 at (s_{1,1}, s_{2,1})
        assert_eq!(x, delta(&[0, 0]));
    }

    #[test]
    fn punishing_one_player_reaches_zero() {
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let minimize_p2 = OracleObjective::minimize_player(1, 2);
        let exempt: BTreeSet<usize> = [0].into_iter().collect();
        let x = oracle.optimize(&minimize_p2, &exempt, &[]).unwrap();
        assert_eq!(expected_utility(sg.game(), &x, 1), rat(0));
    }

    #[test]
    fn infeasible_floor_reported() {
        let sg = fixtures::table5_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let exempt: BTreeSet<usize> = [0].into_iter().collect();
        // No distribution in the player-2 polytope grants player 1 more
        // than 3.
        let floors = [StabilityConstraint::new(0, rat(4))];
        assert_eq!(oracle.optimize(&objective, &exempt, &floors), None);
    }

    #[test]
    fn decision_form_examples() {
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let both: BTreeSet<usize> = [0, 1].into_iter().collect();
        let first: BTreeSet<usize> = [0].into_iter().collect();

        // Floor violation: u_1 = 0 < 1.
        let floors = [StabilityConstraint::new(0, rat(1))];
        assert!(!oracle.decide(&delta(&[4, 0]), &both, &floors));

        // Player 2 gains 2 by deviating to her second strategy.
        assert!(!oracle.decide(&delta(&[0, 0]), &first, &[]));

        // Self-consistency with the optimizer.
        let objective = OracleObjective::minimize_player(1, 2);
        let x = oracle.optimize(&objective, &first, &[]).unwrap();
        assert!(oracle.decide(&x, &first, &[]));
    }

    #[test]
    fn floors_only_monotone() {
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let exempt: BTreeSet<usize> = [0, 1].into_iter().collect();
        let unconstrained = oracle.optimize(&objective, &exempt, &[]).unwrap();
        let floored = oracle
            .optimize(&objective, &exempt, &[StabilityConstraint::new(1, rat(2))])
            .unwrap();
        assert!(
            objective.value_of(sg.game(), &floored)
                <= objective.value_of(sg.game(), &unconstrained)
        );
    }

    #[test]
    fn argument_validation() {
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let exempt: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(
            oracle.check_arguments(&exempt, &[StabilityConstraint::new(1, rat(0))]),
            Err(OracleError::ThresholdNotExempt(1))
        );
        let bad: BTreeSet<usize> = [9].into_iter().collect();
        assert_eq!(
            oracle.check_arguments(&bad, &[]),
            Err(OracleError::UnknownPlayer(9))
        );
        assert!(OracleObjective::new(vec![rat(2)]).is_err());
    }

    #[test]
    fn support_is_polynomially_sparse() {
        // Basic solutions have support at most (number of rows) + 1.
        let sg = fixtures::fig1_left().unwrap();
        let oracle = StabilityOracle::new(&sg);
        let objective = OracleObjective::social_welfare(2);
        let x = oracle.optimize(&objective, &BTreeSet::new(), &[]).unwrap();
        let rows = incentive_rows(sg.game(), &BTreeSet::new()).len() + 1;
        assert!(x.support_size() <= rows + 1);
    }
}
