//! JSON document formats.
//!
//! Game documents: `{"players": n, "strategies": [..], "leaders": [..],
//! "utilities": [[..n rationals..] per profile]}` with utilities row-major
//! over profiles, the last player's strategy varying fastest. Player and
//! strategy indices are 1-based in documents; rationals are integers or
//! `"a/b"` strings on input and always strings on output.
//!
//! Vector documents: `{"form": "compact"|"full", "entries": [{"key": K,
//! "distribution": [{"profile": [..], "probability": "a/b"}]}]}` where K is
//! `"empty"`, `{"defectors": [..], "last": p}` (compact), or
//! `{"sequence": [..]}` (full).

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::game::{
    CorrelatedDistribution, GameError, NormalFormGame, StackelbergGame, StrategyProfile,
};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::solver::SolveReport;
use crate::vector::{DefectionKey, DistributionVector, OrderedSubset};

/// Parses and validates a game document.
pub fn load_game(text: &str) -> Result<StackelbergGame, GameError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| GameError::schema("$", format!("invalid JSON: {e}")))?;
    game_from_value(&value)
}

pub fn game_from_value(value: &Value) -> Result<StackelbergGame, GameError> {
    let object = value
        .as_object()
        .ok_or_else(|| GameError::schema("$", "expected an object"))?;
    let players = require_usize(object, "players")?;
    if players == 0 {
        return Err(GameError::schema("players", "must be at least 1"));
    }

    let strategies_value = require(object, "strategies")?;
    let strategies = as_array(strategies_value, "strategies")?;
    if strategies.len() != players {
        return Err(GameError::schema(
            "strategies",
            format!("expected {players} entries, got {}", strategies.len()),
        ));
    }
    let mut strategy_counts = Vec::with_capacity(players);
    for (i, entry) in strategies.iter().enumerate() {
        let count = entry
            .as_u64()
            .filter(|&c| c >= 1)
            .ok_or_else(|| GameError::schema(format!("strategies[{i}]"), "expected a positive integer"))?;
        strategy_counts.push(count as usize);
    }

    let leaders_value = require(object, "leaders")?;
    let leaders_raw = as_array(leaders_value, "leaders")?;
    let mut leaders = Vec::with_capacity(leaders_raw.len());
    for (i, entry) in leaders_raw.iter().enumerate() {
        let path = format!("leaders[{i}]");
        let leader = entry
            .as_u64()
            .ok_or_else(|| GameError::schema(&path, "expected a 1-based player index"))?;
        if leader < 1 || leader > players as u64 {
            return Err(GameError::schema(&path, format!("player {leader} out of range")));
        }
        leaders.push((leader - 1) as usize);
    }

    let utilities_value = require(object, "utilities")?;
    let rows = as_array(utilities_value, "utilities")?;
    let profile_count: usize = strategy_counts.iter().product();
    if rows.len() != profile_count {
        return Err(GameError::schema(
            "utilities",
            format!("utility count mismatch: expected {profile_count} profiles, got {}", rows.len()),
        ));
    }
    let mut utilities = Vec::with_capacity(profile_count * players);
    for (i, row) in rows.iter().enumerate() {
        let entries = as_array(row, &format!("utilities[{i}]"))?;
        if entries.len() != players {
            return Err(GameError::schema(
                format!("utilities[{i}]"),
                format!("utility count mismatch: expected {players} values, got {}", entries.len()),
            ));
        }
        for (p, entry) in entries.iter().enumerate() {
            utilities.push(rational_from_value(entry, &format!("utilities[{i}][{p}]"))?);
        }
    }

    let game = NormalFormGame::new(strategy_counts, utilities)?;
    StackelbergGame::new(game, leaders)
}

/// Serializes a game back into document form.
pub fn game_to_value(sg: &StackelbergGame) -> Value {
    let game = sg.game();
    let utilities: Vec<Value> = (0..game.profile_count())
        .map(|i| {
            let row: Vec<Value> = game
                .players()
                .map(|p| Value::String(format_rational(game.utility_at(i, p))))
                .collect();
            Value::Array(row)
        })
        .collect();
    json!({
        "players": game.player_count(),
        "strategies": game.strategy_counts(),
        "leaders": sg.leaders().iter().map(|p| p + 1).collect::<Vec<_>>(),
        "utilities": utilities,
    })
}

/// Parses a vector document against the given game.
pub fn load_vector(text: &str, sg: &StackelbergGame) -> Result<DistributionVector, GameError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| GameError::schema("$", format!("invalid JSON: {e}")))?;
    vector_from_value(&value, sg)
}

pub fn vector_from_value(value: &Value, sg: &StackelbergGame) -> Result<DistributionVector, GameError> {
    let object = value
        .as_object()
        .ok_or_else(|| GameError::schema("$", "expected an object"))?;
    let form = require(object, "form")?
        .as_str()
        .ok_or_else(|| GameError::schema("form", "expected \"compact\" or \"full\""))?;
    let entries = as_array(require(object, "entries")?, "entries")?;

    match form {
        "compact" => {
            let mut map = BTreeMap::new();
            for (i, entry) in entries.iter().enumerate() {
                let path = format!("entries[{i}]");
                let entry = entry
                    .as_object()
                    .ok_or_else(|| GameError::schema(&path, "expected an object"))?;
                let key = compact_key_from_value(require(entry, "key")?, &format!("{path}.key"), sg)?;
                let distribution = distribution_from_value(
                    require(entry, "distribution")?,
                    &format!("{path}.distribution"),
                    sg.game(),
                )?;
                if map.insert(key, distribution).is_some() {
                    return Err(GameError::schema(&path, "duplicate key"));
                }
            }
            Ok(DistributionVector::Compact(map))
        }
        "full" => {
            let mut map = BTreeMap::new();
            for (i, entry) in entries.iter().enumerate() {
                let path = format!("entries[{i}]");
                let entry = entry
                    .as_object()
                    .ok_or_else(|| GameError::schema(&path, "expected an object"))?;
                let key = subset_from_value(require(entry, "key")?, &format!("{path}.key"), sg)?;
                let distribution = distribution_from_value(
                    require(entry, "distribution")?,
                    &format!("{path}.distribution"),
                    sg.game(),
                )?;
                if map.insert(key, distribution).is_some() {
                    return Err(GameError::schema(&path, "duplicate key"));
                }
            }
            Ok(DistributionVector::Full(map))
        }
        other => Err(GameError::schema(
            "form",
            format!("expected \"compact\" or \"full\", got \"{other}\""),
        )),
    }
}

pub fn vector_to_value(vector: &DistributionVector) -> Value {
    let entries: Vec<Value> = match vector {
        DistributionVector::Compact(map) => map
            .iter()
            .map(|(key, distribution)| {
                json!({
                    "key": compact_key_to_value(key),
                    "distribution": distribution_to_value(distribution),
                })
            })
            .collect(),
        DistributionVector::Full(map) => map
            .iter()
            .map(|(subset, distribution)| {
                json!({
                    "key": subset_to_value(subset),
                    "distribution": distribution_to_value(distribution),
                })
            })
            .collect(),
    };
    json!({ "form": vector.form_name(), "entries": entries })
}

pub fn report_to_value(report: &SolveReport) -> Value {
    json!({
        "objective": format_rational(&report.objective),
        "oracle_queries": report.oracle_queries,
        "vector": vector_to_value(&report.vector),
    })
}

pub fn distribution_to_value(distribution: &CorrelatedDistribution) -> Value {
    let entries: Vec<Value> = distribution
        .support()
        .map(|(profile, probability)| {
            json!({
                "profile": profile.choices.iter().map(|c| c + 1).collect::<Vec<_>>(),
                "probability": format_rational(probability),
            })
        })
        .collect();
    Value::Array(entries)
}

pub fn distribution_from_value(
    value: &Value,
    path: &str,
    game: &NormalFormGame,
) -> Result<CorrelatedDistribution, GameError> {
    let entries = as_array(value, path)?;
    let mut mass = BTreeMap::new();
    for (i, entry) in entries.iter().enumerate() {
        let entry_path = format!("{path}[{i}]");
        let entry = entry
            .as_object()
            .ok_or_else(|| GameError::schema(&entry_path, "expected an object"))?;
        let profile_value = as_array(require_at(entry, "profile", &entry_path)?, &entry_path)?;
        if profile_value.len() != game.player_count() {
            return Err(GameError::schema(
                format!("{entry_path}.profile"),
                format!("expected {} strategies", game.player_count()),
            ));
        }
        let mut choices = Vec::with_capacity(profile_value.len());
        for (p, choice) in profile_value.iter().enumerate() {
            let raw = choice.as_u64().ok_or_else(|| {
                GameError::schema(format!("{entry_path}.profile[{p}]"), "expected an integer")
            })?;
            if raw < 1 || raw > game.strategy_count(p) as u64 {
                return Err(GameError::schema(
                    format!("{entry_path}.profile[{p}]"),
                    format!("strategy {raw} out of range"),
                ));
            }
            choices.push((raw - 1) as usize);
        }
        let probability = rational_from_value(
            require_at(entry, "probability", &entry_path)?,
            &format!("{entry_path}.probability"),
        )?;
        if mass.insert(StrategyProfile::new(choices), probability).is_some() {
            return Err(GameError::schema(&entry_path, "duplicate profile"));
        }
    }
    CorrelatedDistribution::new(mass)
}

fn compact_key_from_value(
    value: &Value,
    path: &str,
    sg: &StackelbergGame,
) -> Result<DefectionKey, GameError> {
    if value.as_str() == Some("empty") {
        return Ok(DefectionKey::Empty);
    }
    let object = value
        .as_object()
        .ok_or_else(|| GameError::schema(path, "expected \"empty\" or an object"))?;
    let defectors_raw = as_array(require_at(object, "defectors", path)?, path)?;
    let mut defectors = std::collections::BTreeSet::new();
    for (i, entry) in defectors_raw.iter().enumerate() {
        let player = leader_index(entry, &format!("{path}.defectors[{i}]"), sg)?;
        defectors.insert(player);
    }
    let last = leader_index(require_at(object, "last", path)?, &format!("{path}.last"), sg)?;
    DefectionKey::new(defectors, last)
        .map_err(|e| GameError::schema(path, e.to_string()))
}

fn compact_key_to_value(key: &DefectionKey) -> Value {
    match key {
        DefectionKey::Empty => Value::String("empty".into()),
        DefectionKey::Defection { defectors, last } => json!({
            "defectors": defectors.iter().map(|p| p + 1).collect::<Vec<_>>(),
            "last": last + 1,
        }),
    }
}

fn subset_from_value(
    value: &Value,
    path: &str,
    sg: &StackelbergGame,
) -> Result<OrderedSubset, GameError> {
    if value.as_str() == Some("empty") {
        return Ok(OrderedSubset::empty());
    }
    let object = value
        .as_object()
        .ok_or_else(|| GameError::schema(path, "expected \"empty\" or an object"))?;
    let entries = as_array(require_at(object, "sequence", path)?, path)?;
    let mut sequence = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        sequence.push(leader_index(entry, &format!("{path}.sequence[{i}]"), sg)?);
    }
    OrderedSubset::new(sequence).map_err(|e| GameError::schema(path, e.to_string()))
}

fn subset_to_value(subset: &OrderedSubset) -> Value {
    if subset.is_empty() {
        Value::String("empty".into())
    } else {
        json!({ "sequence": subset.iter().map(|p| p + 1).collect::<Vec<_>>() })
    }
}

fn leader_index(value: &Value, path: &str, sg: &StackelbergGame) -> Result<usize, GameError> {
    let raw = value
        .as_u64()
        .ok_or_else(|| GameError::schema(path, "expected a 1-based player index"))?;
    if raw < 1 || raw > sg.game().player_count() as u64 {
        return Err(GameError::schema(path, format!("player {raw} out of range")));
    }
    let player = (raw - 1) as usize;
    if !sg.is_leader(player) {
        return Err(GameError::schema(path, format!("player {raw} is not a leader")));
    }
    Ok(player)
}

fn rational_from_value(value: &Value, path: &str) -> Result<Rational, GameError> {
    match value {
        Value::Number(number) => number
            .as_i64()
            .map(crate::rational::rat)
            .ok_or_else(|| GameError::schema(path, "expected an integer or \"a/b\" string")),
        Value::String(text) => {
            parse_rational(text).map_err(|message| GameError::schema(path, message))
        }
        _ => Err(GameError::schema(path, "expected an integer or \"a/b\" string")),
    }
}

fn require<'v>(object: &'v Map<String, Value>, field: &str) -> Result<&'v Value, GameError> {
    object
        .get(field)
        .ok_or_else(|| GameError::schema(field, "missing field"))
}

fn require_at<'v>(
    object: &'v Map<String, Value>,
    field: &str,
    path: &str,
) -> Result<&'v Value, GameError> {
    object
        .get(field)
        .ok_or_else(|| GameError::schema(format!("{path}.{field}"), "missing field"))
}

fn require_usize(object: &Map<String, Value>, field: &str) -> Result<usize, GameError> {
    require(object, field)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| GameError::schema(field, "expected a nonnegative integer"))
}

fn as_array<'v>(value: &'v Value, path: &str) -> Result<&'v Vec<Value>, GameError> {
    value
        .as_array()
        .ok_or_else(|| GameError::schema(path, "expected an array"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{rat, ratio};

    #[test]
    fn trivial_single_player_document() {
        let sg = load_game(r#"{"players":1,"strategies":[1],"leaders":[1],"utilities":[[0]]}"#)
            .unwrap();
        assert_eq!(sg.game().player_count(), 1);
        assert_eq!(sg.game().profile_count(), 1);
        assert_eq!(sg.leaders(), &[0]);
    }

    #[test]
    fn utility_count_mismatch_has_path() {
        let err = load_game(r#"{"players":1,"strategies":[2],"leaders":[1],"utilities":[[0]]}"#)
            .unwrap_err();
        let message = err.to_string();
        assert!(message.contains("utility count mismatch"), "{message}");
        assert!(message.contains("utilities"), "{message}");
    }

    #[test]
    fn leader_validation() {
        let text = r#"{"players":2,"strategies":[1,1],"leaders":[1,1],"utilities":[[0,0]]}"#;
        assert!(load_game(text).unwrap_err().to_string().contains("duplicate"));
        let text = r#"{"players":2,"strategies":[1,1],"leaders":[3],"utilities":[[0,0]]}"#;
        assert!(load_game(text).unwrap_err().to_string().contains("out of range"));
    }

    #[test]
    fn rationals_accept_ints_and_strings() {
        let text = r#"{"players":1,"strategies":[2],"leaders":[1],
                       "utilities":[[3],["-1/2"]]}"#;
        let sg = load_game(text).unwrap();
        assert_eq!(sg.game().utility_at(0, 0), &rat(3));
        assert_eq!(sg.game().utility_at(1, 0), &ratio(-1, 2));
    }

    #[test]
    fn game_document_round_trip() {
        let sg = fixtures::fig1_left().unwrap();
        let rendered = game_to_value(&sg).to_string();
        let reloaded = load_game(&rendered).unwrap();
        assert_eq!(sg, reloaded);
    }

    #[test]
    fn vector_document_round_trip() {
        let sg = fixtures::fig1_left().unwrap();
        let x = CorrelatedDistribution::uniform(vec![
            StrategyProfile::new(vec![0, 0]),
            StrategyProfile::new(vec![1, 1]),
        ])
        .unwrap();
        let vector = DistributionVector::constant(sg.leaders(), x);
        let rendered = vector_to_value(&vector).to_string();
        let reloaded = load_vector(&rendered, &sg).unwrap();
        assert_eq!(vector, reloaded);
    }

    #[test]
    fn malformed_vector_reports_path() {
        let sg = fixtures::fig1_left().unwrap();
        let text = r#"{"form":"compact","entries":[{"key":{"defectors":[2],"last":1},
            "distribution":[{"profile":[1,1],"probability":1}]}]}"#;
        let err = load_vector(text, &sg).unwrap_err();
        assert!(err.to_string().contains("last"), "{err}");
    }
}
