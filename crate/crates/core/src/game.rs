//! Finite normal-form games, Stackelberg leader/follower partitions,
//! correlated distributions, and the equilibrium membership predicates.
//!
//! Players and strategies are indexed from 0 internally; documents and CLI
//! output use 1-based indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{sum, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("distribution/game dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("probability mass is negative at profile {0}")]
    NegativeMass(String),
    #[error("probability mass sums to {got}, expected 1")]
    MassNotOne { got: String },
}

impl GameError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        GameError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One pure strategy per player; `choices[p]` is player `p`'s strategy index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyProfile {
    pub choices: Vec<usize>,
}

impl StrategyProfile {
    pub fn new(choices: Vec<usize>) -> Self {
        StrategyProfile { choices }
    }

    /// The same profile with player `p`'s strategy replaced by `strategy`.
    pub fn with_choice(&self, player: usize, strategy: usize) -> Self {
        let mut choices = self.choices.clone();
        choices[player] = strategy;
        StrategyProfile { choices }
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<String> = self.choices.iter().map(|c| (c + 1).to_string()).collect();
        write!(f, "({})", one_based.join(","))
    }
}

/// A finite game: utility tensor over all strategy profiles.
///
/// The tensor is dense and row-major over profiles with the last player's
/// strategy varying fastest; each profile contributes one rational per
/// player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormGame {
    strategy_counts: Vec<usize>,
    utilities: Vec<Rational>,
}

impl NormalFormGame {
    pub fn new(strategy_counts: Vec<usize>, utilities: Vec<Rational>) -> Result<Self, GameError> {
        if strategy_counts.is_empty() {
            return Err(GameError::schema("strategies", "at least one player required"));
        }
        if strategy_counts.iter().any(|&c| c == 0) {
            return Err(GameError::schema(
                "strategies",
                "every player needs at least one strategy",
            ));
        }
        let profiles: usize = strategy_counts.iter().product();
        let expected = profiles * strategy_counts.len();
        if utilities.len() != expected {
            return Err(GameError::schema(
                "utilities",
                format!("utility count mismatch: expected {expected}, got {}", utilities.len()),
            ));
        }
        Ok(NormalFormGame {
            strategy_counts,
            utilities,
        })
    }

    /// Builds the tensor by evaluating `utility(profile, player)`.
    pub fn from_fn(
        strategy_counts: Vec<usize>,
        mut utility: impl FnMut(&StrategyProfile, usize) -> Rational,
    ) -> Self {
        let n = strategy_counts.len();
        let profiles: usize = strategy_counts.iter().product();
        let mut utilities = Vec::with_capacity(profiles * n);
        let game_shape = strategy_counts.clone();
        for index in 0..profiles {
            let profile = profile_from_index(&game_shape, index);
            for player in 0..n {
                utilities.push(utility(&profile, player));
            }
        }
        NormalFormGame {
            strategy_counts,
            utilities,
        }
    }

    pub fn player_count(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn strategy_count(&self, player: usize) -> usize {
        self.strategy_counts[player]
    }

    pub fn profile_count(&self) -> usize {
        self.strategy_counts.iter().product()
    }

    pub fn players(&self) -> impl Iterator<Item = usize> {
        0..self.player_count()
    }

    /// Flat index of a profile (last player's strategy varies fastest).
    pub fn profile_index(&self, profile: &StrategyProfile) -> usize {
        assert_eq!(
            profile.choices.len(),
            self.player_count(),
            "profile length does not match player count"
        );
        let mut index = 0;
        for (player, &choice) in profile.choices.iter().enumerate() {
            assert!(
                choice < self.strategy_counts[player],
                "strategy index {choice} out of range for player {player}"
            );
            index = index * self.strategy_counts[player] + choice;
        }
        index
    }

    pub fn profile_at(&self, index: usize) -> StrategyProfile {
        profile_from_index(&self.strategy_counts, index)
    }

    pub fn profiles(&self) -> impl Iterator<Item = StrategyProfile> + '_ {
        (0..self.profile_count()).map(move |i| self.profile_at(i))
    }

    pub fn utility(&self, profile: &StrategyProfile, player: usize) -> &Rational {
        let index = self.profile_index(profile);
        &self.utilities[index * self.player_count() + player]
    }

    pub fn utility_at(&self, profile_index: usize, player: usize) -> &Rational {
        &self.utilities[profile_index * self.player_count() + player]
    }

    /// Checks that a profile is well-formed for this game.
    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<(), GameError> {
        if profile.choices.len() != self.player_count() {
            return Err(GameError::DimensionMismatch(format!(
                "profile has {} entries, game has {} players",
                profile.choices.len(),
                self.player_count()
            )));
        }
        for (player, &choice) in profile.choices.iter().enumerate() {
            if choice >= self.strategy_counts[player] {
                return Err(GameError::DimensionMismatch(format!(
                    "strategy {} out of range for player {} (has {})",
                    choice + 1,
                    player + 1,
                    self.strategy_counts[player]
                )));
            }
        }
        Ok(())
    }
}

fn profile_from_index(strategy_counts: &[usize], mut index: usize) -> StrategyProfile {
    let mut choices = vec![0; strategy_counts.len()];
    for player in (0..strategy_counts.len()).rev() {
        choices[player] = index % strategy_counts[player];
        index /= strategy_counts[player];
    }
    StrategyProfile { choices }
}

/// A finite game together with its ordered set of leaders.
///
/// The stored leader order is the asking order of the agreement stage;
/// followers are derived as the complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackelbergGame {
    game: NormalFormGame,
    leaders: Vec<usize>,
}

impl StackelbergGame {
    pub fn new(game: NormalFormGame, leaders: Vec<usize>) -> Result<Self, GameError> {
        let mut seen = BTreeSet::new();
        for &leader in &leaders {
            if leader >= game.player_count() {
                return Err(GameError::schema(
                    "leaders",
                    format!("leader index {} out of range", leader + 1),
                ));
            }
            if !seen.insert(leader) {
                return Err(GameError::schema(
                    "leaders",
                    format!("duplicate leader index {}", leader + 1),
                ));
            }
        }
        Ok(StackelbergGame { game, leaders })
    }

    /// The all-leader counterpart `(G, N, ∅)` with ascending asking order.
    pub fn all_leaders(game: NormalFormGame) -> Self {
        let leaders = (0..game.player_count()).collect();
        StackelbergGame { game, leaders }
    }

    pub fn game(&self) -> &NormalFormGame {
        &self.game
    }

    pub fn leaders(&self) -> &[usize] {
        &self.leaders
    }

    pub fn leader_count(&self) -> usize {
        self.leaders.len()
    }

    pub fn leader_set(&self) -> BTreeSet<usize> {
        self.leaders.iter().copied().collect()
    }

    pub fn is_leader(&self, player: usize) -> bool {
        self.leaders.contains(&player)
    }

    /// Followers in ascending order.
    pub fn followers(&self) -> Vec<usize> {
        let leaders = self.leader_set();
        self.game
            .players()
            .filter(|p| !leaders.contains(p))
            .collect()
    }

    /// Same game, same leader set, different asking order.
    pub fn with_leader_order(&self, leaders: Vec<usize>) -> Result<Self, GameError> {
        let reordered = StackelbergGame::new(self.game.clone(), leaders)?;
        if reordered.leader_set() != self.leader_set() {
            return Err(GameError::schema(
                "leaders",
                "reordered leaders must be the same set",
            ));
        }
        Ok(reordered)
    }
}

/// A probability mass over strategy profiles, stored sparsely: profiles
/// missing from the map carry mass zero, and no explicit zeros are kept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CorrelatedDistribution {
    mass: BTreeMap<StrategyProfile, Rational>,
}

impl CorrelatedDistribution {
    pub fn new(mass: BTreeMap<StrategyProfile, Rational>) -> Result<Self, GameError> {
        let mut pruned = BTreeMap::new();
        let mut total = Rational::zero();
        for (profile, weight) in mass {
            if weight.is_negative() {
                return Err(GameError::NegativeMass(profile.to_string()));
            }
            if weight.is_zero() {
                continue;
            }
            total += &weight;
            pruned.insert(profile, weight);
        }
        if !total.is_one() {
            return Err(GameError::MassNotOne {
                got: crate::rational::format_rational(&total),
            });
        }
        Ok(CorrelatedDistribution { mass: pruned })
    }

    /// Point mass on a single profile.
    pub fn delta(profile: StrategyProfile) -> Self {
        let mut mass = BTreeMap::new();
        mass.insert(profile, Rational::one());
        CorrelatedDistribution { mass }
    }

    /// Uniform distribution over the given (distinct) profiles.
    pub fn uniform(profiles: Vec<StrategyProfile>) -> Result<Self, GameError> {
        if profiles.is_empty() {
            return Err(GameError::MassNotOne { got: "0".into() });
        }
        let weight = Rational::new(1.into(), (profiles.len() as i64).into());
        let mut mass = BTreeMap::new();
        for profile in profiles {
            *mass.entry(profile).or_insert_with(Rational::zero) += &weight;
        }
        CorrelatedDistribution::new(mass)
    }

    /// Convex combination `alpha·x + (1−alpha)·y`; `alpha` must be in [0,1].
    pub fn mix(alpha: &Rational, x: &Self, y: &Self) -> Result<Self, GameError> {
        if alpha.is_negative() || *alpha > Rational::one() {
            return Err(GameError::DimensionMismatch(format!(
                "mixing weight {} outside [0,1]",
                crate::rational::format_rational(alpha)
            )));
        }
        let complement = Rational::one() - alpha;
        let mut mass = BTreeMap::new();
        for (profile, weight) in &x.mass {
            *mass.entry(profile.clone()).or_insert_with(Rational::zero) += alpha * weight;
        }
        for (profile, weight) in &y.mass {
            *mass.entry(profile.clone()).or_insert_with(Rational::zero) += &complement * weight;
        }
        CorrelatedDistribution::new(mass)
    }

    pub fn support(&self) -> impl Iterator<Item = (&StrategyProfile, &Rational)> {
        self.mass.iter()
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn probability(&self, profile: &StrategyProfile) -> Rational {
        self.mass.get(profile).cloned().unwrap_or_else(Rational::zero)
    }

    /// Checks every support profile against the game's dimensions.
    pub fn validate_for(&self, game: &NormalFormGame) -> Result<(), GameError> {
        for profile in self.mass.keys() {
            game.check_profile(profile)?;
        }
        Ok(())
    }
}

/// `u_p(x) = Σ_s x(s)·u_p(s)`, exactly.
pub fn expected_utility(
    game: &NormalFormGame,
    distribution: &CorrelatedDistribution,
    player: usize,
) -> Rational {
    assert!(player < game.player_count(), "player index out of range");
    distribution
        .support()
        .fold(Rational::zero(), |acc, (profile, weight)| {
            acc + weight * game.utility(profile, player)
        })
}

/// Incentive-constraint membership: true iff, for every player `p` in
/// `players` and every pair of strategies `s_p ≠ s'_p`,
/// `Σ_{s_-p} x(s_p, s_-p)·(u_p(s_p, s_-p) − u_p(s'_p, s_-p)) ≥ 0`.
///
/// With `players` equal to the full player set this is CE membership;
/// smaller sets test membership in the partially constrained polytopes.
pub fn is_ce_for(
    game: &NormalFormGame,
    distribution: &CorrelatedDistribution,
    players: &BTreeSet<usize>,
) -> bool {
    for &player in players {
        assert!(player < game.player_count(), "player index out of range");
        let strategies = game.strategy_count(player);
        // regret[(recommended, deviation)] accumulated over the support
        let mut regret: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (profile, weight) in distribution.support() {
            let recommended = profile.choices[player];
            let current = game.utility(profile, player);
            for deviation in 0..strategies {
                if deviation == recommended {
                    continue;
                }
                let deviated = profile.with_choice(player, deviation);
                let delta = weight * (current - game.utility(&deviated, player));
                *regret
                    .entry((recommended, deviation))
                    .or_insert_with(Rational::zero) += delta;
            }
        }
        if regret.values().any(|total| total.is_negative()) {
            return false;
        }
    }
    true
}

/// Coarse membership: true iff, for every player `p` and strategy `s'_p`,
/// `Σ_s x(s)·(u_p(s) − u_p(s'_p, s_-p)) ≥ 0`.
pub fn is_cce(game: &NormalFormGame, distribution: &CorrelatedDistribution) -> bool {
    for player in game.players() {
        for deviation in 0..game.strategy_count(player) {
            let mut total = Rational::zero();
            for (profile, weight) in distribution.support() {
                let deviated = profile.with_choice(player, deviation);
                total += weight * (game.utility(profile, player) - game.utility(&deviated, player));
            }
            if total.is_negative() {
                return false;
            }
        }
    }
    true
}

/// `Σ_p u_p(x)` over all players.
pub fn social_welfare(game: &NormalFormGame, distribution: &CorrelatedDistribution) -> Rational {
    sum(&game
        .players()
        .map(|p| expected_utility(game, distribution, p))
        .collect::<Vec<_>>())
}
