use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use super::card::ProtoCard;
use super::MemoryError;
use crate::json::to_canonical_line;

/// Immutable, id-ordered collection of prototype cards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryBank {
    cards: Vec<ProtoCard>,
}

impl MemoryBank {
    /// Sorts by prototype id and rejects duplicates.
    pub fn new(mut cards: Vec<ProtoCard>) -> Result<Self, MemoryError> {
        cards.sort_by_key(|c| c.prototype_id);
        let mut seen = BTreeSet::new();
        for c in &cards {
            if !seen.insert(c.prototype_id) {
                return Err(MemoryError::Parse {
                    line: 0,
                    message: format!("duplicate prototype_id {}", c.prototype_id),
                });
            }
        }
        Ok(Self { cards })
    }

    pub fn cards(&self) -> &[ProtoCard] {
        &self.cards
    }

    pub fn get(&self, prototype_id: u32) -> Option<&ProtoCard> {
        self.cards
            .binary_search_by_key(&prototype_id, |c| c.prototype_id)
            .ok()
            .map(|i| &self.cards[i])
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }
}

/// One canonical JSON card per line.
pub fn write_bank<W: Write>(bank: &MemoryBank, mut out: W) -> Result<(), MemoryError> {
    for card in bank.cards() {
        let line = to_canonical_line(card).map_err(|e| MemoryError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_bank<R: BufRead>(input: R) -> Result<MemoryBank, MemoryError> {
    let mut cards = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let card: ProtoCard = serde_json::from_str(&line).map_err(|e| MemoryError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(card.prototype_id) {
            return Err(MemoryError::Parse {
                line: idx + 1,
                message: format!("duplicate prototype_id {}", card.prototype_id),
            });
        }
        cards.push(card);
    }
    MemoryBank::new(cards)
}
