use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::event::EventType;
use super::store::EventStore;
use crate::error::{Error, Result};
use crate::numeric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Distribution {
    fn of(values: &[f64]) -> Option<Self> {
        Some(Distribution {
            count: values.len(),
            mean: numeric::mean(values)?,
            std: numeric::std_dev(values)?,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub events_per_match: Distribution,
    pub events_per_player_match: Distribution,
    /// Seconds between consecutive events of the same match period.
    pub inter_event_time: Option<Distribution>,
    pub type_frequencies: BTreeMap<EventType, f64>,
}

pub fn corpus_stats(store: &EventStore) -> Result<CorpusStats> {
    if store.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let per_match: Vec<f64> = store.matches().map(|m| m.events.len() as f64).collect();
    let per_player_match: Vec<f64> = store
        .player_matches()
        .map(|(p, m)| store.player_match_events(p, m).len() as f64)
        .collect();

    let mut gaps = Vec::new();
    let mut counts: BTreeMap<EventType, usize> = BTreeMap::new();
    for m in store.matches() {
        for pair in m.events.windows(2) {
            if pair[0].period == pair[1].period {
                gaps.push(pair[1].event_sec - pair[0].event_sec);
            }
        }
        for ev in &m.events {
            *counts.entry(ev.event_type).or_insert(0) += 1;
        }
    }
    let total = store.event_count() as f64;
    let type_frequencies = counts.into_iter().map(|(t, c)| (t, c as f64 / total)).collect();

    Ok(CorpusStats {
        events_per_match: Distribution::of(&per_match).ok_or(Error::EmptyCorpus)?,
        events_per_player_match: Distribution::of(&per_player_match).ok_or(Error::EmptyCorpus)?,
        inter_event_time: Distribution::of(&gaps),
        type_frequencies,
    })
}
