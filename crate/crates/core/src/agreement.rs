//! The agreement stage as an explicit sequential game.
//!
//! Rounds of Opt-In / Opt-Out decisions: leaders are asked in a fixed order;
//! an Opt-Out removes the leader and starts a new round with the remaining
//! ones; the stage ends when a whole round of Opt-Ins goes through (or
//! nobody is left). Each leaf is one possible defection record, so the leaf
//! count is `Σ_k C(|L|,k)·k!` and the tree is only materialized for small
//! leader sets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::game::{expected_utility, StackelbergGame};
use crate::rational::{format_rational, Rational};
use crate::vector::{DistributionVector, OrderedSubset};

/// Trees grow factorially in the leader count; refuse beyond this.
pub const MAX_TREE_LEADERS: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgreementError {
    #[error("vector is missing the entry for record {0}")]
    MissingRecord(String),
    #[error("{0} leaders exceed the materialization limit of {MAX_TREE_LEADERS}")]
    TooManyLeaders(usize),
}

#[derive(Debug, Clone)]
pub enum AgreementNode {
    /// One leader deciding between Opt-In and Opt-Out.
    Decision {
        leader: usize,
        record: OrderedSubset,
        opt_in: Box<AgreementNode>,
        opt_out: Box<AgreementNode>,
    },
    /// The stage is over; payoffs are the leaders' expected utilities under
    /// the distribution assigned to this record.
    Leaf {
        record: OrderedSubset,
        payoffs: BTreeMap<usize, Rational>,
    },
}

#[derive(Debug, Clone)]
pub struct AgreementTree {
    root: AgreementNode,
    leaders: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumMode {
    /// No leader gains by a unilateral on-path Opt-Out while everyone else
    /// always opts in.
    Ne,
    /// Opt-In beats Opt-Out at every decision point, given all-Opt-In play
    /// afterwards.
    Spe,
}

/// Builds the agreement tree for a plan, asking leaders in the game's
/// stored order each round.
pub fn build_agreement_tree(
    sg: &StackelbergGame,
    vector: &DistributionVector,
) -> Result<AgreementTree, AgreementError> {
    if sg.leader_count() > MAX_TREE_LEADERS {
        return Err(AgreementError::TooManyLeaders(sg.leader_count()));
    }
    let root = build_node(
        sg,
        vector,
        OrderedSubset::empty(),
        sg.leaders().to_vec(),
        sg.leaders().to_vec(),
    )?;
    Ok(AgreementTree {
        root,
        leaders: sg.leaders().to_vec(),
    })
}

fn build_node(
    sg: &StackelbergGame,
    vector: &DistributionVector,
    record: OrderedSubset,
    remaining: Vec<usize>,
    queue: Vec<usize>,
) -> Result<AgreementNode, AgreementError> {
    match queue.split_first() {
        // Everyone left has opted in this round (or nobody is left): done.
        None => {
            let x = vector
                .lookup(&record)
                .ok_or_else(|| AgreementError::MissingRecord(record.to_string()))?;
            let payoffs = sg
                .leaders()
                .iter()
                .map(|&p| (p, expected_utility(sg.game(), x, p)))
                .collect();
            Ok(AgreementNode::Leaf { record, payoffs })
        }
        Some((&acting, rest)) => {
            let opt_in = build_node(
                sg,
                vector,
                record.clone(),
                remaining.clone(),
                rest.to_vec(),
            )?;
            let out_record = record.appended(acting).expect("acting leader is fresh");
            let out_remaining: Vec<usize> =
                remaining.iter().copied().filter(|&p| p != acting).collect();
            // A new round starts immediately after an Opt-Out.
            let opt_out = build_node(
                sg,
                vector,
                out_record,
                out_remaining.clone(),
                out_remaining,
            )?;
            Ok(AgreementNode::Decision {
                leader: acting,
                record,
                opt_in: Box::new(opt_in),
                opt_out: Box::new(opt_out),
            })
        }
    }
}

impl AgreementTree {
    pub fn root(&self) -> &AgreementNode {
        &self.root
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &AgreementNode) -> usize {
            match node {
                AgreementNode::Leaf { .. } => 1,
                AgreementNode::Decision { opt_in, opt_out, .. } => count(opt_in) + count(opt_out),
            }
        }
        count(&self.root)
    }

    pub fn leaves(&self) -> Vec<(&OrderedSubset, &BTreeMap<usize, Rational>)> {
        fn collect<'t>(
            node: &'t AgreementNode,
            into: &mut Vec<(&'t OrderedSubset, &'t BTreeMap<usize, Rational>)>,
        ) {
            match node {
                AgreementNode::Leaf { record, payoffs } => into.push((record, payoffs)),
                AgreementNode::Decision { opt_in, opt_out, .. } => {
                    collect(opt_in, into);
                    collect(opt_out, into);
                }
            }
        }
        let mut leaves = Vec::new();
        collect(&self.root, &mut leaves);
        leaves
    }

    /// Payoffs at the leaf reached by all-Opt-In play from this node on.
    fn all_opt_in_leaf(node: &AgreementNode) -> &BTreeMap<usize, Rational> {
        match node {
            AgreementNode::Leaf { payoffs, .. } => payoffs,
            AgreementNode::Decision { opt_in, .. } => Self::all_opt_in_leaf(opt_in),
        }
    }

    /// Indented outline of the whole tree, leaves annotated with their
    /// record and payoff vector.
    pub fn render_outline(&self) -> String {
        fn render(node: &AgreementNode, depth: usize, leaders: &[usize], out: &mut String) {
            let indent = "  ".repeat(depth);
            match node {
                AgreementNode::Decision {
                    leader,
                    record,
                    opt_in,
                    opt_out,
                } => {
                    let _ = writeln!(out, "{indent}leader {} decides (record {record})", leader + 1);
                    let _ = writeln!(out, "{indent}  opt-in:");
                    render(opt_in, depth + 2, leaders, out);
                    let _ = writeln!(out, "{indent}  opt-out:");
                    render(opt_out, depth + 2, leaders, out);
                }
                AgreementNode::Leaf { record, payoffs } => {
                    let values: Vec<String> = leaders
                        .iter()
                        .map(|p| format_rational(&payoffs[p]))
                        .collect();
                    let _ = writeln!(out, "{indent}leaf {record} payoffs ({})", values.join(","));
                }
            }
        }
        let mut out = String::new();
        render(&self.root, 0, &self.leaders, &mut out);
        out
    }
}

/// Is "everyone always opts in" an equilibrium of the agreement stage?
pub fn all_opt_in_equilibrium(tree: &AgreementTree, mode: EquilibriumMode) -> bool {
    match mode {
        EquilibriumMode::Ne => {
            // Walk the on-path spine; at each decision compare staying on
            // the path with a unilateral Opt-Out (everyone else opting in
            // afterwards).
            let on_path = AgreementTree::all_opt_in_leaf(&tree.root);
            let mut node = &tree.root;
            loop {
                match node {
                    AgreementNode::Leaf { .. } => return true,
                    AgreementNode::Decision {
                        leader,
                        opt_in,
                        opt_out,
                        ..
                    } => {
                        let deviation = AgreementTree::all_opt_in_leaf(opt_out);
                        if on_path[leader] < deviation[leader] {
                            return false;
                        }
                        node = opt_in;
                    }
                }
            }
        }
        EquilibriumMode::Spe => {
            fn check(node: &AgreementNode) -> bool {
                match node {
                    AgreementNode::Leaf { .. } => true,
                    AgreementNode::Decision {
                        leader,
                        opt_in,
                        opt_out,
                        ..
                    } => {
                        let stay = AgreementTree::all_opt_in_leaf(opt_in);
                        let leave = AgreementTree::all_opt_in_leaf(opt_out);
                        if stay[leader] < leave[leader] {
                            return false;
                        }
                        check(opt_in) && check(opt_out)
                    }
                }
            }
            check(&tree.root)
        }
    }
}
