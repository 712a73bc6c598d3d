//! Constructive solvers for Stackelberg correlated equilibria and the
//! verifiers for stability and efficiency.
//!
//! All three solvers drive the stability oracle with a fixed query budget:
//! `|L|+2` for an optimal SCE, `|L|+1` for some SCE-PA, and
//! `|L|·2^(|L|−1)+1` for an optimal SCE-PA (one query per compact key plus
//! the agreement entry). The punishment recursion proceeds from the largest
//! defector sets downward; queries within one cardinality level are
//! independent and run in parallel when the `parallel` feature is on.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::game::{expected_utility, is_ce_for, GameError, StackelbergGame};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Relation};
use crate::oracle::{incentive_rows, OracleObjective, StabilityConstraint, StabilityOracle};
use crate::par;
use crate::rational::{in_closed_interval, Rational};
use crate::vector::{
    all_defection_keys, all_ordered_subsets, DefectionKey, DistributionVector, OrderedSubset,
    VectorError,
};
use crate::CorrelatedDistribution;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("expected {expected} leader weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("leader weight {0} outside [0,1]")]
    WeightOutOfRange(String),
    #[error("leader weight {0} must be strictly positive for this solver")]
    WeightNotPositive(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("input vector fails the {0:?} stability precondition")]
    UnstableInput(StabilityMode),
    #[error("operation requires a {expected}-form vector")]
    WrongForm { expected: &'static str },
    #[error("vector too large to materialize: {0} leaders")]
    TooManyLeaders(usize),
}

/// Per-leader objective weights, one per leader in asking order, each
/// within [0,1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeaderWeights {
    weights: Vec<Rational>,
}

impl LeaderWeights {
    pub fn new(weights: Vec<Rational>) -> Result<Self, SolveError> {
        for w in &weights {
            if !in_closed_interval(w, 0, 1) {
                return Err(SolveError::WeightOutOfRange(
                    crate::rational::format_rational(w),
                ));
            }
        }
        Ok(LeaderWeights { weights })
    }

    /// Weight 1 for every leader.
    pub fn uniform(count: usize) -> Self {
        LeaderWeights {
            weights: vec![Rational::from_integer(1.into()); count],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.weights
    }

    pub fn all_positive(&self) -> bool {
        self.weights.iter().all(|w| w.is_positive())
    }

    fn check_len(&self, sg: &StackelbergGame) -> Result<(), SolveError> {
        if self.len() != sg.leader_count() {
            return Err(SolveError::WeightCount {
                expected: sg.leader_count(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Outcome of a solver run: the commitment plan in compact form, the
/// weighted objective at the agreement entry, and the exact number of
/// oracle queries spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub vector: DistributionVector,
    pub objective: Rational,
    pub oracle_queries: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    FirstLevel,
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficiencyMode {
    Sce,
    ScePa,
}

fn degenerate_no_leader_report(sg: &StackelbergGame) -> SolveReport {
    let oracle = StabilityOracle::new(sg);
    let objective = OracleObjective::weighted_leaders(sg, &[]).expect("empty weights are valid");
    let x = oracle
        .optimize(&objective, &BTreeSet::new(), &[])
        .expect("the equilibrium polytope is never empty");
    let mut entries = BTreeMap::new();
    entries.insert(DefectionKey::Empty, x);
    SolveReport {
        vector: DistributionVector::Compact(entries),
        objective: Rational::zero(),
        oracle_queries: oracle.queries(),
    }
}

/// Optimal SCE for the weighted objective.
///
/// Punishments drop one leader at a time: each leader's deterrent is the
/// distribution minimizing her utility while everyone else stays committed.
/// The agreement entry maximizes the objective subject to those floors, and
/// a single shared optimal equilibrium covers every deeper record.
pub fn solve_opt_sce(sg: &StackelbergGame, weights: &LeaderWeights) -> Result<SolveReport, SolveError> {
    weights.check_len(sg)?;
    if sg.leader_count() == 0 {
        return Ok(degenerate_no_leader_report(sg));
    }
    let game = sg.game();
    let leaders = sg.leaders().to_vec();
    let leader_set = sg.leader_set();
    let oracle = StabilityOracle::new(sg);
    let weighted = OracleObjective::weighted_leaders(sg, weights.as_slice())
        .expect("weights validated on construction");

    let punishments: Vec<CorrelatedDistribution> = par::map_collect(&leaders, |&p| {
        let minimize = OracleObjective::minimize_player(p, game.player_count());
        let mut exempt = leader_set.clone();
        exempt.remove(&p);
        oracle
            .optimize(&minimize, &exempt, &[])
            .expect("single-defector polytope is never empty")
    });
    let floors: Vec<StabilityConstraint> = leaders
        .iter()
        .zip(&punishments)
        .map(|(&p, x)| StabilityConstraint::new(p, expected_utility(game, x, p)))
        .collect();

    let agreement = oracle
        .optimize(&weighted, &leader_set, &floors)
        .expect("floors are attainable by construction");
    let deep = oracle
        .optimize(&weighted, &BTreeSet::new(), &[])
        .expect("the equilibrium polytope is never empty");

    let mut entries = BTreeMap::new();
    let objective = weighted.value_of(game, &agreement);
    entries.insert(DefectionKey::Empty, agreement);
    for (&p, x) in leaders.iter().zip(punishments) {
        let key = DefectionKey::new([p].into_iter().collect(), p).expect("singleton key");
        entries.insert(key, x);
    }
    for key in all_defection_keys(&leaders) {
        if key.defectors().len() >= 2 {
            entries.insert(key, deep.clone());
        }
    }
    Ok(SolveReport {
        vector: DistributionVector::Compact(entries),
        objective,
        oracle_queries: oracle.queries(),
    })
}

/// Some SCE-PA, one oracle query per leader plus one.
///
/// Each leader's deterrent is a full-equilibrium distribution minimizing
/// her utility; being full equilibria, the deterrents stay valid however
/// many leaders have already defected, so the plan keyed by last defector
/// is perfectly stable. Weights must be strictly positive: that is what
/// makes objective-optimality imply Pareto efficiency here.
pub fn solve_f_sce_pa(sg: &StackelbergGame, weights: &LeaderWeights) -> Result<SolveReport, SolveError> {
    weights.check_len(sg)?;
    if let Some(bad) = weights.as_slice().iter().find(|w| !w.is_positive()) {
        return Err(SolveError::WeightNotPositive(
            crate::rational::format_rational(bad),
        ));
    }
    if sg.leader_count() == 0 {
        return Ok(degenerate_no_leader_report(sg));
    }
    let game = sg.game();
    let leaders = sg.leaders().to_vec();
    let oracle = StabilityOracle::new(sg);
    let weighted = OracleObjective::weighted_leaders(sg, weights.as_slice())
        .expect("weights validated on construction");

    let punishments: Vec<CorrelatedDistribution> = par::map_collect(&leaders, |&p| {
        let minimize = OracleObjective::minimize_player(p, game.player_count());
        oracle
            .optimize(&minimize, &BTreeSet::new(), &[])
            .expect("the equilibrium polytope is never empty")
    });
    let by_leader: BTreeMap<usize, CorrelatedDistribution> =
        leaders.iter().copied().zip(punishments).collect();
    let floors: Vec<StabilityConstraint> = by_leader
        .iter()
        .map(|(&p, x)| StabilityConstraint::new(p, expected_utility(game, x, p)))
        .collect();
    let agreement = oracle
        .optimize(&weighted, &sg.leader_set(), &floors)
        .expect("full-equilibrium floors are attainable");

    let mut entries = BTreeMap::new();
    let objective = weighted.value_of(game, &agreement);
    entries.insert(DefectionKey::Empty, agreement);
    for key in all_defection_keys(&leaders) {
        if let DefectionKey::Defection { last, .. } = &key {
            let x = by_leader[last].clone();
            entries.insert(key, x);
        }
    }
    Ok(SolveReport {
        vector: DistributionVector::Compact(entries),
        objective,
        oracle_queries: oracle.queries(),
    })
}

/// The same plan re-keyed the way the classical argument phrases it: every
/// record is answered by the deterrent of its *first* defector. Full form,
/// for verification at small leader counts.
pub fn f_sce_pa_first_defector_form(
    sg: &StackelbergGame,
    report: &SolveReport,
) -> Result<DistributionVector, VerifyError> {
    if sg.leader_count() > 6 {
        return Err(VerifyError::TooManyLeaders(sg.leader_count()));
    }
    let empty = report
        .vector
        .empty_entry()
        .ok_or(VectorError::MissingKey("empty".into()))?
        .clone();
    let mut entries = BTreeMap::new();
    for subset in all_ordered_subsets(sg.leaders()) {
        let x = match subset.first() {
            None => empty.clone(),
            Some(first) => {
                let key = DefectionKey::new([first].into_iter().collect(), first)
                    .expect("singleton key");
                match &report.vector {
                    DistributionVector::Compact(map) => map
                        .get(&key)
                        .ok_or_else(|| VectorError::MissingKey(key.to_string()))?
                        .clone(),
                    DistributionVector::Full(_) => {
                        return Err(VerifyError::WrongForm { expected: "compact" })
                    }
                }
            }
        };
        entries.insert(subset, x);
    }
    Ok(DistributionVector::Full(entries))
}

/// Punishment recursion over compact keys, from the largest defector sets
/// downward. The entry for (D, p) minimizes p's utility among distributions
/// that keep the remaining leaders at least as well off as their own next
/// defection would. Returns one distribution per nonempty compact key.
fn punishment_recursion(
    sg: &StackelbergGame,
    oracle: &StabilityOracle<'_>,
) -> BTreeMap<DefectionKey, CorrelatedDistribution> {
    let game = sg.game();
    let leaders = sg.leaders().to_vec();
    let leader_set = sg.leader_set();

    let mut by_size: BTreeMap<usize, Vec<DefectionKey>> = BTreeMap::new();
    for key in all_defection_keys(&leaders) {
        let size = key.defectors().len();
        if size > 0 {
            by_size.entry(size).or_default().push(key);
        }
    }

    let mut results: BTreeMap<DefectionKey, CorrelatedDistribution> = BTreeMap::new();
    for size in (1..=leaders.len()).rev() {
        let level = &by_size[&size];
        let computed: Vec<(DefectionKey, CorrelatedDistribution)> =
            par::map_collect(level, |key| {
                let DefectionKey::Defection { defectors, last } = key else {
                    unreachable!("empty key filtered out")
                };
                let minimize = OracleObjective::minimize_player(*last, game.player_count());
                let x = if defectors.len() == leaders.len() {
                    oracle
                        .optimize(&minimize, &BTreeSet::new(), &[])
                        .expect("the equilibrium polytope is never empty")
                } else {
                    let exempt: BTreeSet<usize> =
                        leader_set.difference(defectors).copied().collect();
                    let floors: Vec<StabilityConstraint> = exempt
                        .iter()
                        .map(|&q| {
                            let mut deeper = defectors.clone();
                            deeper.insert(q);
                            let next = DefectionKey::new(deeper, q).expect("q joins the set");
                            let threshold = expected_utility(game, &results[&next], q);
                            StabilityConstraint::new(q, threshold)
                        })
                        .collect();
                    oracle
                        .optimize(&minimize, &exempt, &floors)
                        .expect("recursive floors are attainable")
                };
                (key.clone(), x)
            });
        results.extend(computed);
    }
    results
}

/// Optimal SCE-PA for the weighted objective, via the full punishment
/// recursion over compact keys.
pub fn solve_opt_sce_pa(
    sg: &StackelbergGame,
    weights: &LeaderWeights,
) -> Result<SolveReport, SolveError> {
    weights.check_len(sg)?;
    if sg.leader_count() == 0 {
        return Ok(degenerate_no_leader_report(sg));
    }
    let game = sg.game();
    let oracle = StabilityOracle::new(sg);
    let weighted = OracleObjective::weighted_leaders(sg, weights.as_slice())
        .expect("weights validated on construction");

    let mut entries = punishment_recursion(sg, &oracle);
    let floors: Vec<StabilityConstraint> = sg
        .leaders()
        .iter()
        .map(|&p| {
            let key = DefectionKey::new([p].into_iter().collect(), p).expect("singleton key");
            StabilityConstraint::new(p, expected_utility(game, &entries[&key], p))
        })
        .collect();
    let agreement = oracle
        .optimize(&weighted, &sg.leader_set(), &floors)
        .expect("recursive floors are attainable");
    let objective = weighted.value_of(game, &agreement);
    entries.insert(DefectionKey::Empty, agreement);

    Ok(SolveReport {
        vector: DistributionVector::Compact(entries),
        objective,
        oracle_queries: oracle.queries(),
    })
}

/// Stability verification.
///
/// Always validates membership first: every stored distribution must be
/// well-formed for the game and satisfy the incentive constraints of its
/// defectors plus all followers. First-level mode then checks that no
/// leader gains by being the first to defect; perfect mode checks the same
/// at every record. For compact vectors the record space collapses onto
/// (set, last) keys, which is equivalent.
pub fn verify_stability(
    sg: &StackelbergGame,
    vector: &DistributionVector,
    mode: StabilityMode,
) -> Result<bool, VerifyError> {
    vector.check_complete(sg.leaders())?;
    let game = sg.game();
    let followers: BTreeSet<usize> = sg.followers().into_iter().collect();

    // Membership in the plan space: x_π within the incentive polytope of
    // π ∪ F, for every stored entry.
    let membership_ok = |defectors: &BTreeSet<usize>, x: &CorrelatedDistribution| -> Result<bool, VerifyError> {
        x.validate_for(game)?;
        let constrained: BTreeSet<usize> = defectors.union(&followers).copied().collect();
        Ok(is_ce_for(game, x, &constrained))
    };
    match vector {
        DistributionVector::Compact(map) => {
            for (key, x) in map {
                if !membership_ok(&key.defectors(), x)? {
                    return Ok(false);
                }
            }
        }
        DistributionVector::Full(map) => {
            for (subset, x) in map {
                if !membership_ok(&subset.set(), x)? {
                    return Ok(false);
                }
            }
        }
    }

    let utility_of = |record: &OrderedSubset, player: usize| -> Result<Rational, VerifyError> {
        let x = vector
            .lookup(record)
            .ok_or_else(|| VectorError::MissingKey(record.to_string()))?;
        Ok(expected_utility(game, x, player))
    };

    match mode {
        StabilityMode::FirstLevel => {
            let empty = OrderedSubset::empty();
            for &p in sg.leaders() {
                let stay = utility_of(&empty, p)?;
                let defect = utility_of(&empty.appended(p).expect("fresh leader"), p)?;
                if stay < defect {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        StabilityMode::Perfect => {
            match vector {
                DistributionVector::Compact(map) => {
                    for (key, x) in map {
                        let defectors = key.defectors();
                        for &p in sg.leaders() {
                            if defectors.contains(&p) {
                                continue;
                            }
                            let mut deeper = defectors.clone();
                            deeper.insert(p);
                            let next = DefectionKey::new(deeper, p).expect("p joins the set");
                            let punished = map
                                .get(&next)
                                .ok_or_else(|| VectorError::MissingKey(next.to_string()))?;
                            if expected_utility(game, x, p) < expected_utility(game, punished, p) {
                                return Ok(false);
                            }
                        }
                    }
                }
                DistributionVector::Full(map) => {
                    for (subset, x) in map {
                        for &p in sg.leaders() {
                            if subset.contains(p) {
                                continue;
                            }
                            let next = subset.appended(p).expect("fresh leader");
                            let punished = map
                                .get(&next)
                                .ok_or_else(|| VectorError::MissingKey(next.to_string()))?;
                            if expected_utility(game, x, p) < expected_utility(game, punished, p) {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Punishment floors used by the efficiency test: the value each leader can
/// guarantee herself by defecting. In SCE mode this is her minimum over the
/// single-defector polytope; in SCE-PA mode it is the value of the full
/// punishment recursion.
pub fn punishment_floors(
    sg: &StackelbergGame,
    mode: EfficiencyMode,
) -> Vec<StabilityConstraint> {
    let game = sg.game();
    let oracle = StabilityOracle::new(sg);
    match mode {
        EfficiencyMode::Sce => sg
            .leaders()
            .iter()
            .map(|&p| {
                let minimize = OracleObjective::minimize_player(p, game.player_count());
                let mut exempt = sg.leader_set();
                exempt.remove(&p);
                let x = oracle
                    .optimize(&minimize, &exempt, &[])
                    .expect("single-defector polytope is never empty");
                StabilityConstraint::new(p, expected_utility(game, &x, p))
            })
            .collect(),
        EfficiencyMode::ScePa => {
            let punishments = punishment_recursion(sg, &oracle);
            sg.leaders()
                .iter()
                .map(|&p| {
                    let key =
                        DefectionKey::new([p].into_iter().collect(), p).expect("singleton key");
                    StabilityConstraint::new(p, expected_utility(game, &punishments[&key], p))
                })
                .collect()
        }
    }
}

/// Pareto-efficiency verification of the agreement entry.
///
/// Solves one LP: maximize `Σ_p ε_p` over distributions x' in the follower
/// polytope with `u_p(x') = u_p(x_∅) + ε_p`, `ε_p ≥ 0`, and `u_p(x') ≥ b_p`
/// for the mode's punishment floors. The entry is efficient iff the
/// optimum is exactly zero. The stability precondition (first-level for
/// SCE, perfect for SCE-PA) is checked first and reported distinctly.
pub fn verify_efficiency(
    sg: &StackelbergGame,
    vector: &DistributionVector,
    mode: EfficiencyMode,
) -> Result<bool, VerifyError> {
    let required = match mode {
        EfficiencyMode::Sce => StabilityMode::FirstLevel,
        EfficiencyMode::ScePa => StabilityMode::Perfect,
    };
    if !verify_stability(sg, vector, required)? {
        return Err(VerifyError::UnstableInput(required));
    }
    let game = sg.game();
    let agreement = vector
        .empty_entry()
        .ok_or(VectorError::MissingKey("empty".into()))?;
    let floors = punishment_floors(sg, mode);

    let profiles = game.profile_count();
    let leaders = sg.leaders().to_vec();
    let variables = profiles + leaders.len();
    let mut objective = vec![Rational::zero(); variables];
    for j in profiles..variables {
        objective[j] = Rational::from_integer(1.into());
    }
    let mut lp = LinearProgram::maximize(objective);

    let exempt = sg.leader_set();
    for row in incentive_rows(game, &exempt) {
        let mut extended = row;
        extended.resize(variables, Rational::zero());
        lp.push(extended, Relation::Ge, Rational::zero());
    }
    let mut sorted = leaders.clone();
    sorted.sort_unstable();
    for &p in &sorted {
        let mut row: Vec<Rational> = (0..profiles)
            .map(|i| game.utility_at(i, p).clone())
            .collect();
        row.resize(variables, Rational::zero());
        let leader_slot = leaders.iter().position(|&q| q == p).expect("leader listed");
        row[profiles + leader_slot] = -Rational::from_integer(1.into());
        lp.push(row, Relation::Eq, expected_utility(game, agreement, p));
    }
    let mut sorted_floors = floors.clone();
    sorted_floors.sort_by_key(|f| f.player);
    for floor in &sorted_floors {
        let mut row: Vec<Rational> = (0..profiles)
            .map(|i| game.utility_at(i, floor.player).clone())
            .collect();
        row.resize(variables, Rational::zero());
        lp.push(row, Relation::Ge, floor.threshold.clone());
    }
    let ones: Vec<Rational> = (0..variables)
        .map(|j| {
            if j < profiles {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
        .collect();
    lp.push(ones, Relation::Eq, Rational::from_integer(1.into()));

    match solve_lp(&lp) {
        LpOutcome::Optimal { objective, .. } => Ok(objective.is_zero()),
        LpOutcome::Infeasible => {
            unreachable!("the agreement entry itself satisfies every constraint")
        }
        LpOutcome::Unbounded => unreachable!("gains are bounded by the utility range"),
    }
}

/// Re-keys a perfectly stable full-form vector onto compact keys: each
/// (set, last) key receives, among the orderings of that set, the entry
/// minimizing the last defector's utility. The agreement entry is kept and
/// the output is perfectly stable again.
pub fn canonicalize(
    sg: &StackelbergGame,
    vector: &DistributionVector,
) -> Result<DistributionVector, VerifyError> {
    let DistributionVector::Full(entries) = vector else {
        return Err(VerifyError::WrongForm { expected: "full" });
    };
    if !verify_stability(sg, vector, StabilityMode::Perfect)? {
        return Err(VerifyError::UnstableInput(StabilityMode::Perfect));
    }
    let game = sg.game();
    let compact = DistributionVector::compact_from_full(sg.leaders(), entries, |key, candidates| {
        match key {
            DefectionKey::Empty => candidates[0].1.clone(),
            DefectionKey::Defection { last, .. } => {
                let mut best = candidates[0].1;
                let mut best_value = expected_utility(game, best, *last);
                for (_, candidate) in &candidates[1..] {
                    let value = expected_utility(game, candidate, *last);
                    if value < best_value {
                        best = candidate;
                        best_value = value;
                    }
                }
                best.clone()
            }
        }
    });
    Ok(compact)
}

/// The weighted objective `Σ_p λ_p·u_p` evaluated at the agreement entry.
pub fn objective_value(
    sg: &StackelbergGame,
    vector: &DistributionVector,
    weights: &LeaderWeights,
) -> Result<Rational, VerifyError> {
    if weights.len() != sg.leader_count() {
        return Err(VerifyError::Game(GameError::DimensionMismatch(format!(
            "{} weights for {} leaders",
            weights.len(),
            sg.leader_count()
        ))));
    }
    let agreement = vector
        .empty_entry()
        .ok_or(VectorError::MissingKey("empty".into()))?;
    let game = sg.game();
    Ok(sg
        .leaders()
        .iter()
        .zip(weights.as_slice())
        .fold(Rational::zero(), |acc, (&p, w)| {
            acc + w * expected_utility(game, agreement, p)
        }))
}
