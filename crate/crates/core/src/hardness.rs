//! Hardness lab: the tautology-to-game reduction that makes verifying
//! perfect stability coNP-hard, and the separation machinery connecting the
//! oracle's dual to the weighted deviation-adjusted social welfare search.
//!
//! The searches here are deliberate brute force over strategy profiles;
//! they replace a separation oracle inside the ellipsoid method, which is
//! out of scope at desk scale.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::game::{CorrelatedDistribution, NormalFormGame, StackelbergGame, StrategyProfile};
use crate::oracle::{OracleObjective, StabilityConstraint};
use crate::par;
use crate::rational::{rat, Rational};
use crate::vector::{all_defection_keys, DefectionKey, DistributionVector};

/// Brute-force tautology checking caps out here.
pub const MAX_VARIABLES: usize = 20;
/// The reduction game has `|V|·2^|V|` profiles; refuse beyond this.
pub const MAX_REDUCTION_VARIABLES: usize = 10;
/// Profile scans cap out here.
pub const MAX_SCAN_PROFILES: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HardnessError {
    #[error("formula parse error: {0}")]
    Parse(String),
    #[error("{0} variables exceed the brute-force limit of {MAX_VARIABLES}")]
    TooManyVariables(usize),
    #[error("{0} variables exceed the reduction limit of {MAX_REDUCTION_VARIABLES}")]
    TooManyReductionVariables(usize),
    #[error("{0} profiles exceed the scan limit of {MAX_SCAN_PROFILES}")]
    TooManyProfiles(usize),
    #[error("bad adjustment weights: {0}")]
    BadWeights(String),
    #[error("bad dual point: {0}")]
    BadDual(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub variable: usize,
    pub negated: bool,
}

/// A formula in disjunctive normal form: a disjunction of conjunctive
/// clauses over an ordered variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfFormula {
    variables: Vec<String>,
    clauses: Vec<Vec<Literal>>,
}

impl DnfFormula {
    pub fn new(variables: Vec<String>, clauses: Vec<Vec<Literal>>) -> Result<Self, HardnessError> {
        for clause in &clauses {
            if clause.is_empty() {
                return Err(HardnessError::Parse("empty clause".into()));
            }
            for literal in clause {
                if literal.variable >= variables.len() {
                    return Err(HardnessError::Parse(format!(
                        "literal references variable {} beyond the list",
                        literal.variable
                    )));
                }
            }
        }
        if clauses.is_empty() {
            return Err(HardnessError::Parse("formula needs at least one clause".into()));
        }
        Ok(DnfFormula { variables, clauses })
    }

    /// Parses text like `(v1 & !v2) | (v3)`. Parentheses around clauses are
    /// optional; variables are ordered by first appearance.
    pub fn parse(text: &str) -> Result<Self, HardnessError> {
        let mut variables: Vec<String> = Vec::new();
        let mut clauses = Vec::new();
        for raw_clause in text.split('|') {
            let raw_clause = raw_clause.trim();
            let inner = raw_clause
                .strip_prefix('(')
                .and_then(|rest| rest.strip_suffix(')'))
                .unwrap_or(raw_clause)
                .trim();
            if inner.is_empty() {
                return Err(HardnessError::Parse("empty clause".into()));
            }
            let mut clause = Vec::new();
            for raw_literal in inner.split('&') {
                let raw_literal = raw_literal.trim();
                let (negated, name) = match raw_literal.strip_prefix('!') {
                    Some(rest) => (true, rest.trim()),
                    None => (false, raw_literal),
                };
                if name.is_empty()
                    || !name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_')
                    || name.chars().next().is_some_and(|c| c.is_ascii_digit())
                {
                    return Err(HardnessError::Parse(format!("bad literal `{raw_literal}`")));
                }
                let variable = match variables.iter().position(|v| v == name) {
                    Some(index) => index,
                    None => {
                        variables.push(name.to_string());
                        variables.len() - 1
                    }
                };
                clause.push(Literal { variable, negated });
            }
            clause.sort_unstable();
            clause.dedup();
            clauses.push(clause);
        }
        DnfFormula::new(variables, clauses)
    }

    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// True iff some clause is satisfied under the assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().any(|clause| {
            clause
                .iter()
                .all(|lit| assignment[lit.variable] != lit.negated)
        })
    }
}

/// Brute-force tautology test over all `2^|V|` assignments.
pub fn is_tautology(formula: &DnfFormula) -> Result<bool, HardnessError> {
    let n = formula.variable_count();
    if n > MAX_VARIABLES {
        return Err(HardnessError::TooManyVariables(n));
    }
    let assignments = 1usize << n;
    Ok(par::find_first_index(assignments, |bits| {
        let assignment: Vec<bool> = (0..n).map(|i| bits & (1 << i) != 0).collect();
        !formula.evaluate(&assignment)
    })
    .is_none())
}

/// The reduction game and its witness plan.
///
/// One leader per variable with a true/false strategy pair, one indifferent
/// follower with a strategy per variable, and utilities arranged so that
/// the witness plan is perfectly stable exactly when the formula is a
/// tautology. With `swmax`, an extra single-action leader is paid `|V|²`
/// at the all-true profile, making the witness the unique welfare-optimal
/// perfectly stable plan for tautologies.
pub fn dnf_to_sg(
    formula: &DnfFormula,
    swmax: bool,
) -> Result<(StackelbergGame, DistributionVector), HardnessError> {
    let vars = formula.variable_count();
    if vars == 0 {
        return Err(HardnessError::Parse("formula has no variables".into()));
    }
    if vars > MAX_REDUCTION_VARIABLES {
        return Err(HardnessError::TooManyReductionVariables(vars));
    }
    let follower = vars;
    let mut strategy_counts = vec![2; vars];
    strategy_counts.push(vars);
    if swmax {
        strategy_counts.push(1);
    }

    let game = NormalFormGame::from_fn(strategy_counts, |profile, player| {
        if player == follower {
            return Rational::zero();
        }
        let assignment: Vec<bool> = (0..vars).map(|v| profile.choices[v] == 0).collect();
        if player > follower {
            // Welfare leader: |V|² at the all-true profile, 0 elsewhere.
            return if assignment.iter().all(|&b| b) {
                rat((vars * vars) as i64)
            } else {
                Rational::zero()
            };
        }
        reduction_utility(formula, player, profile, &assignment)
    });

    let mut leaders: Vec<usize> = (0..vars).collect();
    if swmax {
        leaders.push(vars + 1);
    }
    let sg = StackelbergGame::new(game, leaders.clone()).expect("reduction game is well-formed");

    // Witness plan: agreement at the all-true profile; after defections the
    // defecting variables play false and the follower points at the last
    // defector's variable (or, when the welfare leader defected last, at
    // the lowest defecting variable, if any).
    let witness = |key: &DefectionKey| -> CorrelatedDistribution {
        let mut choices = vec![0usize; sg.game().player_count()];
        match key {
            DefectionKey::Empty => {}
            DefectionKey::Defection { defectors, last } => {
                for &d in defectors {
                    if d < vars {
                        choices[d] = 1;
                    }
                }
                choices[follower] = if *last < vars {
                    *last
                } else {
                    defectors.iter().copied().find(|&d| d < vars).unwrap_or(0)
                };
            }
        }
        CorrelatedDistribution::delta(StrategyProfile::new(choices))
    };
    let entries: BTreeMap<DefectionKey, CorrelatedDistribution> =
        all_defection_keys(&leaders)
            .into_iter()
            .map(|key| {
                let x = witness(&key);
                (key, x)
            })
            .collect();
    Ok((sg, DistributionVector::Compact(entries)))
}

/// The four-case utility of a variable leader. The cases split on whether
/// the assignment satisfies the formula, whether the follower points at the
/// leader's own variable, and whether anyone plays false.
fn reduction_utility(
    formula: &DnfFormula,
    leader: usize,
    profile: &StrategyProfile,
    assignment: &[bool],
) -> Rational {
    let vars = formula.variable_count();
    let follower = vars;
    let own_false = !assignment[leader];
    let false_count = assignment.iter().filter(|&&b| !b).count() as i64;
    if formula.evaluate(assignment) {
        if profile.choices[follower] == leader {
            if own_false {
                rat(false_count - 1)
            } else {
                Rational::zero()
            }
        } else if own_false {
            rat(vars as i64)
        } else {
            rat(false_count)
        }
    } else if assignment.iter().any(|&b| !b) {
        rat(vars as i64)
    } else {
        -Rational::from_integer(1.into())
    }
}

/// Deviation weights `y ≥ 0` (per player, |S_p|×|S_p| row-major, players
/// missing from the map carry zeros) and per-player utility weights `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjustmentWeights {
    pub deviation: BTreeMap<usize, Vec<Rational>>,
    pub utility: Vec<Rational>,
}

impl AdjustmentWeights {
    pub fn new(
        deviation: BTreeMap<usize, Vec<Rational>>,
        utility: Vec<Rational>,
    ) -> Result<Self, HardnessError> {
        for weights in deviation.values() {
            if weights.iter().any(|w| w.is_negative()) {
                return Err(HardnessError::BadWeights("deviation weights must be nonnegative".into()));
            }
        }
        Ok(AdjustmentWeights { deviation, utility })
    }

    pub fn zero(player_count: usize) -> Self {
        AdjustmentWeights {
            deviation: BTreeMap::new(),
            utility: vec![Rational::zero(); player_count],
        }
    }

    pub fn check_for(&self, game: &NormalFormGame) -> Result<(), HardnessError> {
        if self.utility.len() != game.player_count() {
            return Err(HardnessError::BadWeights(format!(
                "{} utility weights for {} players",
                self.utility.len(),
                game.player_count()
            )));
        }
        for (&player, weights) in &self.deviation {
            if player >= game.player_count() {
                return Err(HardnessError::BadWeights(format!(
                    "deviation weights for unknown player {player}"
                )));
            }
            let k = game.strategy_count(player);
            if weights.len() != k * k {
                return Err(HardnessError::BadWeights(format!(
                    "player {player} needs a {k}×{k} deviation matrix"
                )));
            }
        }
        Ok(())
    }
}

/// `ŵ_s(y,v) = Σ_p [ v_p·u_p(s) + Σ_{s'_p} y^p_{s_p,s'_p}·(u_p(s) − u_p(s'_p, s_-p)) ]`.
pub fn deviation_adjusted_welfare(
    game: &NormalFormGame,
    weights: &AdjustmentWeights,
    profile: &StrategyProfile,
) -> Rational {
    let mut total = Rational::zero();
    for player in game.players() {
        let own = game.utility(profile, player);
        let v = &weights.utility[player];
        if !v.is_zero() {
            total += v * own;
        }
        if let Some(matrix) = weights.deviation.get(&player) {
            let k = game.strategy_count(player);
            let recommended = profile.choices[player];
            for deviation in 0..k {
                let weight = &matrix[recommended * k + deviation];
                if weight.is_zero() {
                    continue;
                }
                let deviated = profile.with_choice(player, deviation);
                total += weight * (own - game.utility(&deviated, player));
            }
        }
    }
    total
}

fn check_scan_size(game: &NormalFormGame) -> Result<usize, HardnessError> {
    let profiles = game.profile_count();
    if profiles > MAX_SCAN_PROFILES {
        return Err(HardnessError::TooManyProfiles(profiles));
    }
    Ok(profiles)
}

/// First profile (lexicographic) whose deviation-adjusted welfare exceeds
/// the threshold, if any.
pub fn wdasw_search(
    game: &NormalFormGame,
    weights: &AdjustmentWeights,
    threshold: &Rational,
) -> Result<Option<StrategyProfile>, HardnessError> {
    weights.check_for(game)?;
    let profiles = check_scan_size(game)?;
    Ok(par::find_first_index(profiles, |index| {
        deviation_adjusted_welfare(game, weights, &game.profile_at(index)) > *threshold
    })
    .map(|index| game.profile_at(index)))
}

/// Every profile whose deviation-adjusted welfare exceeds the threshold.
pub fn wdasw_violations(
    game: &NormalFormGame,
    weights: &AdjustmentWeights,
    threshold: &Rational,
) -> Result<Vec<StrategyProfile>, HardnessError> {
    weights.check_for(game)?;
    let profiles = check_scan_size(game)?;
    Ok(par::filter_indices(profiles, |index| {
        deviation_adjusted_welfare(game, weights, &game.profile_at(index)) > *threshold
    })
    .into_iter()
    .map(|index| game.profile_at(index))
    .collect())
}

/// A candidate dual point of the oracle LP: multipliers for the followers'
/// incentive rows, multipliers for the leaders' floor rows, and the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualPoint {
    /// Per follower, |S_p|×|S_p| row-major multipliers (missing = zero).
    pub incentive: BTreeMap<usize, Vec<Rational>>,
    /// Per leader, the floor-row multiplier (missing = zero).
    pub floor: BTreeMap<usize, Rational>,
    /// The dual objective value to separate against.
    pub bound: Rational,
}

impl DualPoint {
    pub fn check_for(
        &self,
        sg: &StackelbergGame,
        floors: &[StabilityConstraint],
    ) -> Result<(), HardnessError> {
        let game = sg.game();
        let followers: BTreeSet<usize> = sg.followers().into_iter().collect();
        for (&player, weights) in &self.incentive {
            if !followers.contains(&player) {
                return Err(HardnessError::BadDual(format!(
                    "incentive multipliers for non-follower {player}"
                )));
            }
            let k = game.strategy_count(player);
            if weights.len() != k * k {
                return Err(HardnessError::BadDual(format!(
                    "player {player} needs a {k}×{k} multiplier matrix"
                )));
            }
            if weights.iter().any(|w| w.is_negative()) {
                return Err(HardnessError::BadDual("multipliers must be nonnegative".into()));
            }
        }
        for (&player, weight) in &self.floor {
            if !sg.is_leader(player) {
                return Err(HardnessError::BadDual(format!(
                    "floor multiplier for non-leader {player}"
                )));
            }
            if weight.is_negative() {
                return Err(HardnessError::BadDual("multipliers must be nonnegative".into()));
            }
            if !floors.iter().any(|f| f.player == player) {
                return Err(HardnessError::BadDual(format!(
                    "floor multiplier for player {player} without a floor"
                )));
            }
        }
        Ok(())
    }

    /// `(U_s)ᵀz + w_s` for one profile: incentive terms for the followers,
    /// floor terms `z_p·(u_p(s) − b_p)` for the leaders, plus the weighted
    /// objective value.
    pub fn violation_value(
        &self,
        sg: &StackelbergGame,
        objective: &OracleObjective,
        floors: &[StabilityConstraint],
        profile: &StrategyProfile,
    ) -> Rational {
        let game = sg.game();
        let mut total = objective.value_at(game, profile);
        for (&player, matrix) in &self.incentive {
            let k = game.strategy_count(player);
            let recommended = profile.choices[player];
            let own = game.utility(profile, player);
            for deviation in 0..k {
                let weight = &matrix[recommended * k + deviation];
                if weight.is_zero() {
                    continue;
                }
                let deviated = profile.with_choice(player, deviation);
                total += weight * (own - game.utility(&deviated, player));
            }
        }
        for (&player, weight) in &self.floor {
            if weight.is_zero() {
                continue;
            }
            let b = floors
                .iter()
                .find(|f| f.player == player)
                .map(|f| f.threshold.clone())
                .unwrap_or_else(Rational::zero);
            total += weight * (game.utility(profile, player) - b);
        }
        total
    }
}

/// First profile violating the dual constraint `(U_s)ᵀz + w_s ≤ t`, if any.
pub fn sep_search(
    sg: &StackelbergGame,
    objective: &OracleObjective,
    floors: &[StabilityConstraint],
    dual: &DualPoint,
) -> Result<Option<StrategyProfile>, HardnessError> {
    dual.check_for(sg, floors)?;
    let profiles = check_scan_size(sg.game())?;
    Ok(par::find_first_index(profiles, |index| {
        dual.violation_value(sg, objective, floors, &sg.game().profile_at(index)) > dual.bound
    })
    .map(|index| sg.game().profile_at(index)))
}

/// Every profile violating the dual constraint.
pub fn sep_violations(
    sg: &StackelbergGame,
    objective: &OracleObjective,
    floors: &[StabilityConstraint],
    dual: &DualPoint,
) -> Result<Vec<StrategyProfile>, HardnessError> {
    dual.check_for(sg, floors)?;
    let profiles = check_scan_size(sg.game())?;
    Ok(par::filter_indices(profiles, |index| {
        dual.violation_value(sg, objective, floors, &sg.game().profile_at(index)) > dual.bound
    })
    .into_iter()
    .map(|index| sg.game().profile_at(index))
    .collect())
}

/// Rewrites a separation instance as a welfare-search instance: deviation
/// multipliers carry over to the followers (leaders get zeros), each
/// leader's utility weight absorbs her floor multiplier, and the threshold
/// absorbs the floor constants.
pub fn sep_to_wdasw(
    objective: &OracleObjective,
    leaders: &BTreeSet<usize>,
    floors: &[StabilityConstraint],
    dual: &DualPoint,
) -> (AdjustmentWeights, Rational) {
    let mut utility = objective.coefficients().to_vec();
    let mut threshold = dual.bound.clone();
    for (&player, weight) in &dual.floor {
        debug_assert!(leaders.contains(&player));
        utility[player] += weight;
        let b = floors
            .iter()
            .find(|f| f.player == player)
            .map(|f| f.threshold.clone())
            .unwrap_or_else(Rational::zero);
        threshold += weight * b;
    }
    let weights = AdjustmentWeights {
        deviation: dual.incentive.clone(),
        utility,
    };
    (weights, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{expected_utility, social_welfare};
    use crate::solver::{verify_stability, StabilityMode};

    #[test]
    fn parse_and_evaluate() {
        let formula = DnfFormula::parse("(v1 & !v2) | (v3)").unwrap();
        assert_eq!(formula.variable_count(), 3);
        assert_eq!(formula.variables(), &["v1", "v2", "v3"]);
        assert!(formula.evaluate(&[true, false, false]));
        assert!(formula.evaluate(&[false, false, true]));
        assert!(!formula.evaluate(&[false, false, false]));
    }

    #[test]
    fn parse_rejects_malformed_text() {
        assert!(DnfFormula::parse("").is_err());
        assert!(DnfFormula::parse("(v1 &) | v2").is_err());
        assert!(DnfFormula::parse("v1 | | v2").is_err());
        assert!(DnfFormula::parse("1v").is_err());
    }

    #[test]
    fn tautology_basics() {
        assert!(is_tautology(&DnfFormula::parse("v1 | !v1").unwrap()).unwrap());
        assert!(!is_tautology(&DnfFormula::parse("v1 & v2").unwrap()).unwrap());
        assert!(!is_tautology(&DnfFormula::parse("v1 & !v1").unwrap()).unwrap());
    }

    #[test]
    fn reduction_utilities_single_variable() {
        let formula = DnfFormula::parse("v1").unwrap();
        let (sg, _) = dnf_to_sg(&formula, false).unwrap();
        let game = sg.game();
        assert_eq!(game.player_count(), 2);
        assert_eq!(game.strategy_counts(), &[2, 1]);
        // False assignment, someone plays false → |V| = 1.
        let s = StrategyProfile::new(vec![1, 0]);
        assert_eq!(game.utility(&s, 0), &rat(1));
        // Satisfied assignment with the follower pointing at the variable → 0.
        let s = StrategyProfile::new(vec![0, 0]);
        assert_eq!(game.utility(&s, 0), &rat(0));
    }

    #[test]
    fn witness_stability_tracks_tautology() {
        let tautology = DnfFormula::parse("v1 | !v1").unwrap();
        let (sg, witness) = dnf_to_sg(&tautology, false).unwrap();
        assert!(verify_stability(&sg, &witness, StabilityMode::Perfect).unwrap());

        let contingent = DnfFormula::parse("v1").unwrap();
        let (sg, witness) = dnf_to_sg(&contingent, false).unwrap();
        assert!(!verify_stability(&sg, &witness, StabilityMode::Perfect).unwrap());
    }

    #[test]
    fn swmax_leader_pays_off_at_the_agreement() {
        let tautology = DnfFormula::parse("v1 | !v1").unwrap();
        let (sg, witness) = dnf_to_sg(&tautology, true).unwrap();
        assert!(verify_stability(&sg, &witness, StabilityMode::Perfect).unwrap());
        let agreement = witness.empty_entry().unwrap();
        let welfare_leader = sg.game().player_count() - 1;
        assert_eq!(
            expected_utility(sg.game(), agreement, welfare_leader),
            rat(1)
        );
        assert_eq!(social_welfare(sg.game(), agreement), rat(1));
    }

    #[test]
    fn welfare_reduces_to_social_welfare_and_weighted_value() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let game = sg.game();
        let ones = AdjustmentWeights {
            deviation: BTreeMap::new(),
            utility: vec![rat(1); 2],
        };
        for profile in game.profiles() {
            assert_eq!(
                deviation_adjusted_welfare(game, &ones, &profile),
                social_welfare(game, &CorrelatedDistribution::delta(profile.clone()))
            );
        }

        let single = AdjustmentWeights {
            deviation: [(0usize, {
                // y^1_{1,2} = 1 on a 5-strategy player
                let mut m = vec![Rational::zero(); 25];
                m[1] = rat(1);
                m
            })]
            .into_iter()
            .collect(),
            utility: vec![Rational::zero(); 2],
        };
        // At s_1 = first strategy the term is u_1(s) − u_1(second, s_-1).
        let s = StrategyProfile::new(vec![0, 0]);
        assert_eq!(deviation_adjusted_welfare(game, &single, &s), rat(1));
        let s = StrategyProfile::new(vec![1, 0]);
        assert_eq!(deviation_adjusted_welfare(game, &single, &s), rat(0));
    }

    #[test]
    fn wdasw_threshold_scan() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let game = sg.game();
        let welfare = AdjustmentWeights {
            deviation: BTreeMap::new(),
            utility: vec![rat(1); 2],
        };
        // Max social welfare over the example profiles is 5.
        assert_eq!(wdasw_search(game, &welfare, &rat(5)).unwrap(), None);
        let hit = wdasw_search(game, &welfare, &rat(4)).unwrap().unwrap();
        assert_eq!(hit, StrategyProfile::new(vec![0, 0]));

        let first_player = AdjustmentWeights {
            deviation: BTreeMap::new(),
            utility: vec![rat(1), Rational::zero()],
        };
        let hit = wdasw_search(game, &first_player, &rat(4)).unwrap().unwrap();
        assert_eq!(hit, StrategyProfile::new(vec![0, 0]));
    }

    #[test]
    fn zero_dual_reduces_to_weighted_scan() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let objective = OracleObjective::social_welfare(2);
        let dual = DualPoint {
            incentive: BTreeMap::new(),
            floor: BTreeMap::new(),
            bound: rat(4),
        };
        let hit = sep_search(&sg, &objective, &[], &dual).unwrap().unwrap();
        assert_eq!(hit, StrategyProfile::new(vec![0, 0]));

        let (weights, threshold) = sep_to_wdasw(&objective, &sg.leader_set(), &[], &dual);
        assert_eq!(threshold, rat(4));
        assert_eq!(weights.utility, vec![rat(1), rat(1)]);
        assert!(weights.deviation.is_empty());
        let same = wdasw_search(sg.game(), &weights, &threshold).unwrap().unwrap();
        assert_eq!(same, hit);
    }

    #[test]
    fn transform_shifts_threshold_by_floor_terms() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let objective = OracleObjective::social_welfare(2);
        let floors = [StabilityConstraint::new(0, rat(2))];
        let dual = DualPoint {
            incentive: BTreeMap::new(),
            floor: [(0usize, rat(1))].into_iter().collect(),
            bound: Rational::zero(),
        };
        let (weights, threshold) = sep_to_wdasw(&objective, &sg.leader_set(), &floors, &dual);
        assert_eq!(threshold, rat(2));
        assert_eq!(weights.utility[0], rat(2));
        assert_eq!(weights.utility[1], rat(1));
    }

    #[test]
    fn very_low_bound_returns_first_profile() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let objective = OracleObjective::social_welfare(2);
        let dual = DualPoint {
            incentive: BTreeMap::new(),
            floor: BTreeMap::new(),
            bound: rat(-1000),
        };
        let hit = sep_search(&sg, &objective, &[], &dual).unwrap().unwrap();
        assert_eq!(hit, sg.game().profile_at(0));
    }

    #[test]
    fn dual_validation() {
        let sg = crate::fixtures::fig1_left().unwrap();
        let objective = OracleObjective::social_welfare(2);
        let dual = DualPoint {
            incentive: BTreeMap::new(),
            floor: [(0usize, rat(1))].into_iter().collect(),
            bound: Rational::zero(),
        };
        // Floor multiplier without a matching floor is rejected.
        assert!(sep_search(&sg, &objective, &[], &dual).is_err());
    }
}
