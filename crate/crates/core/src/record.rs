//! Outcome records and their one-line text form:
//!
//! ```text
//! piles=8,9,53 bound=inf dyn=2 outcome=P moves=
//! piles=3,4,5 bound=inf dyn=2 outcome=N moves=3:1;5:1 source=oracle
//! ```
//!
//! `dyn` is the bound multiplier. Each move is written `size:take`, naming the
//! pile by its size. `source` is omitted for oracle records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fib::ExtNat;
use crate::solver::{Dynamic, Move, Outcome, Position};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Oracle,
    Classifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub position: Position,
    pub outcome: Outcome,
    pub winning_moves: Vec<Move>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordParseError {
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("bad value for `{field}`: {value:?}")]
    BadValue { field: &'static str, value: String },
    #[error("move names pile size {0}, which is not in the position")]
    UnknownPile(u64),
}

impl fmt::Display for OutcomeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos = &self.position;
        let piles: Vec<String> = pos.piles().iter().map(u64::to_string).collect();
        let moves: Vec<String> = self
            .winning_moves
            .iter()
            .map(|m| format!("{}:{}", pos.piles()[m.pile], m.take))
            .collect();
        write!(
            f,
            "piles={} bound={} dyn={} outcome={} moves={}",
            piles.join(","),
            pos.bound(),
            pos.dynamic().multiplier(),
            self.outcome,
            moves.join(";")
        )?;
        if let Provenance::Classifier(name) = &self.provenance {
            write!(f, " source={name}")?;
        }
        Ok(())
    }
}

fn bad(field: &'static str, value: &str) -> RecordParseError {
    RecordParseError::BadValue {
        field,
        value: value.to_string(),
    }
}

impl FromStr for OutcomeRecord {
    type Err = RecordParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = std::collections::HashMap::new();
        for token in line.split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| bad("token", token))?;
            fields.insert(k, v);
        }
        let get = |k: &'static str| fields.get(k).copied().ok_or(RecordParseError::Missing(k));

        let piles_raw = get("piles")?;
        let piles = if piles_raw.is_empty() {
            Vec::new()
        } else {
            piles_raw
                .split(',')
                .map(|p| p.parse::<u64>().map_err(|_| bad("piles", piles_raw)))
                .collect::<Result<Vec<_>, _>>()?
        };
        let bound_raw = get("bound")?;
        let bound: ExtNat = bound_raw.parse().map_err(|_| bad("bound", bound_raw))?;
        let dyn_raw = get("dyn")?;
        let dynamic = dyn_raw
            .parse::<u64>()
            .ok()
            .and_then(Dynamic::from_multiplier)
            .ok_or_else(|| bad("dyn", dyn_raw))?;
        let outcome = match get("outcome")? {
            "N" => Outcome::N,
            "P" => Outcome::P,
            other => return Err(bad("outcome", other)),
        };
        let position = Position::new(piles, bound, dynamic);

        let moves_raw = get("moves")?;
        let mut winning_moves = Vec::new();
        for part in moves_raw.split(';').filter(|s| !s.is_empty()) {
            let (size, take) = part.split_once(':').ok_or_else(|| bad("moves", part))?;
            let size: u64 = size.parse().map_err(|_| bad("moves", part))?;
            let take: u64 = take.parse().map_err(|_| bad("moves", part))?;
            let pile = position
                .piles()
                .iter()
                .position(|&p| p == size)
                .ok_or(RecordParseError::UnknownPile(size))?;
            winning_moves.push(Move { pile, take });
        }
        let provenance = match fields.get("source") {
            None | Some(&"oracle") => Provenance::Oracle,
            Some(name) => Provenance::Classifier(name.to_string()),
        };
        Ok(OutcomeRecord {
            position,
            outcome,
            winning_moves,
            provenance,
        })
    }
}
