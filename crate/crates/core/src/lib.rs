//! Exact-arithmetic solvers and verifiers for Stackelberg correlated
//! equilibria in finite normal-form games with multiple leaders.
//!
//! A group of leaders commits to a correlated strategy, but any leader may
//! opt out beforehand and become a follower; the committed plan must name a
//! distribution for every possible defection record. This crate computes
//! plans that are stable (no leader wants to start defecting), perfectly
//! stable (no leader wants to defect after any history), and efficient,
//! all in exact rational arithmetic on top of a self-contained simplex
//! solver.
//!
//! The `parallel` feature (on by default) runs profile scans, punishment
//! recursions, and simplex row elimination on rayon; without it everything
//! falls back to sequential loops with identical results.

pub mod agreement;
pub mod analysis;
pub mod document;
pub mod fixtures;
pub mod game;
pub mod hardness;
pub mod lp;
pub mod oracle;
pub mod par;
pub mod rational;
pub mod solver;
pub mod vector;

pub use game::{
    expected_utility, is_cce, is_ce_for, social_welfare, CorrelatedDistribution, GameError,
    NormalFormGame, StackelbergGame, StrategyProfile,
};
pub use rational::Rational;
pub use solver::{
    solve_f_sce_pa, solve_opt_sce, solve_opt_sce_pa, verify_efficiency, verify_stability,
    EfficiencyMode, LeaderWeights, SolveReport, StabilityMode,
};
pub use vector::{DefectionKey, DistributionVector, OrderedSubset};
