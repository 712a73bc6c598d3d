//! Defection records and vectors of correlated distributions, one per
//! possible defection record.
//!
//! A vector can be stored in *full* form (one entry per ordered subset of
//! leaders, verification only — the key space is factorial) or in *compact*
//! form (one entry per (defector set, last defector) pair plus the empty
//! record, which is enough to represent optimal plans).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::game::CorrelatedDistribution;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("duplicate player {0} in ordered subset")]
    DuplicateMember(usize),
    #[error("player {0} is not a leader of this game")]
    NotALeader(usize),
    #[error("defection key's last player must belong to the defector set")]
    LastNotInSet,
    #[error("vector is missing required key {0}")]
    MissingKey(String),
    #[error("vector has unexpected key {0}")]
    UnexpectedKey(String),
}

/// An ordered sequence of distinct leaders: the record of who opted out, in
/// which order. The empty sequence is the record of a full agreement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OrderedSubset {
    sequence: Vec<usize>,
}

impl OrderedSubset {
    pub fn new(sequence: Vec<usize>) -> Result<Self, VectorError> {
        let mut seen = BTreeSet::new();
        for &player in &sequence {
            if !seen.insert(player) {
                return Err(VectorError::DuplicateMember(player));
            }
        }
        Ok(OrderedSubset { sequence })
    }

    pub fn empty() -> Self {
        OrderedSubset::default()
    }

    /// The record obtained by appending one more defector.
    pub fn appended(&self, player: usize) -> Result<Self, VectorError> {
        let mut sequence = self.sequence.clone();
        sequence.push(player);
        OrderedSubset::new(sequence)
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.sequence.iter().copied()
    }

    pub fn first(&self) -> Option<usize> {
        self.sequence.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.sequence.last().copied()
    }

    pub fn contains(&self, player: usize) -> bool {
        self.sequence.contains(&player)
    }

    pub fn set(&self) -> BTreeSet<usize> {
        self.sequence.iter().copied().collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sequence
    }

    /// Order-preserving restriction to the given player set.
    pub fn intersect(&self, players: &BTreeSet<usize>) -> Self {
        OrderedSubset {
            sequence: self
                .sequence
                .iter()
                .copied()
                .filter(|p| players.contains(p))
                .collect(),
        }
    }
}

impl fmt::Display for OrderedSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sequence.is_empty() {
            write!(f, "empty")
        } else {
            let parts: Vec<String> = self.sequence.iter().map(|p| (p + 1).to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

/// Every ordered subset (all lengths, all orders) of the given players,
/// starting with the empty record. The count is `Σ_k C(n,k)·k!`.
pub fn all_ordered_subsets(players: &[usize]) -> Vec<OrderedSubset> {
    let mut result = vec![OrderedSubset::empty()];
    let mut frontier = vec![OrderedSubset::empty()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &player in players {
                if !prefix.contains(player) {
                    let extended = prefix.appended(player).expect("distinct by construction");
                    next.push(extended);
                }
            }
        }
        result.extend(next.iter().cloned());
        frontier = next;
    }
    result
}

/// Compact index of a defection record: the unordered defector set together
/// with the last defector, or `Empty` for the full agreement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefectionKey {
    Empty,
    Defection {
        defectors: BTreeSet<usize>,
        last: usize,
    },
}

impl DefectionKey {
    pub fn new(defectors: BTreeSet<usize>, last: usize) -> Result<Self, VectorError> {
        if !defectors.contains(&last) {
            return Err(VectorError::LastNotInSet);
        }
        Ok(DefectionKey::Defection { defectors, last })
    }

    pub fn of(subset: &OrderedSubset) -> Self {
        match subset.last() {
            None => DefectionKey::Empty,
            Some(last) => DefectionKey::Defection {
                defectors: subset.set(),
                last,
            },
        }
    }

    pub fn defectors(&self) -> BTreeSet<usize> {
        match self {
            DefectionKey::Empty => BTreeSet::new(),
            DefectionKey::Defection { defectors, .. } => defectors.clone(),
        }
    }
}

impl fmt::Display for DefectionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DefectionKey::Empty => write!(f, "empty"),
            DefectionKey::Defection { defectors, last } => {
                let parts: Vec<String> = defectors.iter().map(|p| (p + 1).to_string()).collect();
                write!(f, "({{{}}}, last {})", parts.join(","), last + 1)
            }
        }
    }
}

/// All compact keys for the given leaders: `Empty` plus one key per
/// (nonempty subset, member) pair — `|L|·2^(|L|−1) + 1` keys in total.
pub fn all_defection_keys(leaders: &[usize]) -> Vec<DefectionKey> {
    let mut keys = vec![DefectionKey::Empty];
    let n = leaders.len();
    for bits in 1usize..(1 << n) {
        let defectors: BTreeSet<usize> = (0..n)
            .filter(|i| bits & (1 << i) != 0)
            .map(|i| leaders[i])
            .collect();
        for &last in &defectors {
            keys.push(DefectionKey::Defection {
                defectors: defectors.clone(),
                last,
            });
        }
    }
    keys
}

/// A commitment plan: one correlated distribution per defection record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistributionVector {
    Compact(BTreeMap<DefectionKey, CorrelatedDistribution>),
    Full(BTreeMap<OrderedSubset, CorrelatedDistribution>),
}

impl DistributionVector {
    /// The plan that plays the same distribution whatever happens.
    pub fn constant(leaders: &[usize], distribution: CorrelatedDistribution) -> Self {
        let entries = all_defection_keys(leaders)
            .into_iter()
            .map(|key| (key, distribution.clone()))
            .collect();
        DistributionVector::Compact(entries)
    }

    pub fn form_name(&self) -> &'static str {
        match self {
            DistributionVector::Compact(_) => "compact",
            DistributionVector::Full(_) => "full",
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, DistributionVector::Compact(_))
    }

    /// Distribution used when the defection record is `record`.
    pub fn lookup(&self, record: &OrderedSubset) -> Option<&CorrelatedDistribution> {
        match self {
            DistributionVector::Compact(entries) => entries.get(&DefectionKey::of(record)),
            DistributionVector::Full(entries) => entries.get(record),
        }
    }

    pub fn empty_entry(&self) -> Option<&CorrelatedDistribution> {
        self.lookup(&OrderedSubset::empty())
    }

    pub fn entry_count(&self) -> usize {
        match self {
            DistributionVector::Compact(entries) => entries.len(),
            DistributionVector::Full(entries) => entries.len(),
        }
    }

    /// Checks that every key required for the given leaders is present and
    /// no foreign key is stored. Compact form requires all
    /// `|L|·2^(|L|−1)+1` keys; full form all ordered subsets.
    pub fn check_complete(&self, leaders: &[usize]) -> Result<(), VectorError> {
        match self {
            DistributionVector::Compact(entries) => {
                let required: BTreeSet<DefectionKey> =
                    all_defection_keys(leaders).into_iter().collect();
                for key in &required {
                    if !entries.contains_key(key) {
                        return Err(VectorError::MissingKey(key.to_string()));
                    }
                }
                for key in entries.keys() {
                    if !required.contains(key) {
                        return Err(VectorError::UnexpectedKey(key.to_string()));
                    }
                }
            }
            DistributionVector::Full(entries) => {
                let required: BTreeSet<OrderedSubset> =
                    all_ordered_subsets(leaders).into_iter().collect();
                for subset in &required {
                    if !entries.contains_key(subset) {
                        return Err(VectorError::MissingKey(subset.to_string()));
                    }
                }
                for subset in entries.keys() {
                    if !required.contains(subset) {
                        return Err(VectorError::UnexpectedKey(subset.to_string()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Re-keys a full-form vector by (set, last), keeping one distribution
    /// per compact key as chosen by `pick`. Used by canonicalization.
    pub fn compact_from_full(
        leaders: &[usize],
        entries: &BTreeMap<OrderedSubset, CorrelatedDistribution>,
        mut pick: impl FnMut(&DefectionKey, &[(&OrderedSubset, &CorrelatedDistribution)]) -> CorrelatedDistribution,
    ) -> Self {
        let mut grouped: BTreeMap<DefectionKey, Vec<(&OrderedSubset, &CorrelatedDistribution)>> =
            BTreeMap::new();
        for (subset, distribution) in entries {
            grouped
                .entry(DefectionKey::of(subset))
                .or_default()
                .push((subset, distribution));
        }
        let mut compact = BTreeMap::new();
        for key in all_defection_keys(leaders) {
            if let Some(candidates) = grouped.get(&key) {
                compact.insert(key.clone(), pick(&key, candidates));
            }
        }
        DistributionVector::Compact(compact)
    }

    /// Expands a compact vector into full form (factorial; small leader
    /// counts only).
    pub fn expand_full(&self, leaders: &[usize]) -> Result<Self, VectorError> {
        let mut entries = BTreeMap::new();
        for subset in all_ordered_subsets(leaders) {
            let distribution = self
                .lookup(&subset)
                .ok_or_else(|| VectorError::MissingKey(subset.to_string()))?;
            entries.insert(subset, distribution.clone());
        }
        Ok(DistributionVector::Full(entries))
    }
}
