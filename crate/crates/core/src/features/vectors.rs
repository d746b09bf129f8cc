use serde::{Deserialize, Serialize};

use super::catalog::FeatureCatalog;
use crate::error::{Error, Result};
use crate::ingest::{Event, MatchId, PlayerId, TeamId};

/// Feature values of one player in one match. Raw vectors hold event counts;
/// normalized ones hold values in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceVector {
    pub player_id: PlayerId,
    pub match_id: MatchId,
    pub team_id: TeamId,
    pub values: Vec<f64>,
    pub goals_scored: u32,
    pub normalized: bool,
}

/// Counts, for each catalog feature, the events of one player in one match.
pub fn extract_raw_performance(
    events: &[&Event],
    catalog: &FeatureCatalog,
) -> Result<PerformanceVector> {
    let mut values = vec![0.0; catalog.len()];
    let (player_id, match_id, team_id) = match events.first() {
        Some(e) => (e.player_id, e.match_id, e.team_id),
        None => {
            return Ok(PerformanceVector {
                player_id: 0,
                match_id: 0,
                team_id: 0,
                values,
                goals_scored: 0,
                normalized: false,
            })
        }
    };
    let mut goals = 0;
    for ev in events {
        if ev.player_id != player_id || ev.match_id != match_id {
            return Err(Error::Contract(format!(
                "event slice mixes (player {}, match {}) with (player {}, match {})",
                player_id, match_id, ev.player_id, ev.match_id
            )));
        }
        if ev.is_goal() {
            goals += 1;
        }
        for (slot, d) in values.iter_mut().zip(catalog.descriptors()) {
            if d.matches(ev) {
                *slot += 1.0;
            }
        }
    }
    Ok(PerformanceVector { player_id, match_id, team_id, values, goals_scored: goals, normalized: false })
}

/// Per-feature min/max used for [0, 1] scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub catalog_hash: String,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Largest goal count by one player in one match over the fitting corpus.
    pub max_goals: u32,
}

pub fn fit_normalization(
    corpus: &[PerformanceVector],
    catalog: &FeatureCatalog,
) -> Result<NormalizationParams> {
    let first = corpus.first().ok_or(Error::EmptyCorpus)?;
    let n = first.values.len();
    if n != catalog.len() {
        return Err(Error::CatalogMismatch {
            expected: format!("{} features", catalog.len()),
            found: format!("{n} features"),
        });
    }
    let mut min = vec![f64::INFINITY; n];
    let mut max = vec![f64::NEG_INFINITY; n];
    let mut max_goals = 0;
    for v in corpus {
        if v.values.len() != n {
            return Err(Error::Contract("vectors of different lengths".into()));
        }
        for (i, &x) in v.values.iter().enumerate() {
            min[i] = min[i].min(x);
            max[i] = max[i].max(x);
        }
        max_goals = max_goals.max(v.goals_scored);
    }
    Ok(NormalizationParams { catalog_hash: catalog.hash().to_string(), min, max, max_goals })
}

impl NormalizationParams {
    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    /// Scales one value of feature `i`; constant features map to 0, values
    /// outside the fitted range are clipped.
    pub fn scale(&self, i: usize, raw: f64) -> f64 {
        let (lo, hi) = (self.min[i], self.max[i]);
        if hi <= lo {
            return 0.0;
        }
        ((raw - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn scale_values(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().enumerate().map(|(i, &x)| self.scale(i, x)).collect()
    }
}

pub fn apply_normalization(
    v: &PerformanceVector,
    params: &NormalizationParams,
) -> Result<PerformanceVector> {
    if v.values.len() != params.len() {
        return Err(Error::CatalogMismatch {
            expected: format!("{} features", params.len()),
            found: format!("{} features", v.values.len()),
        });
    }
    Ok(PerformanceVector { values: params.scale_values(&v.values), normalized: true, ..v.clone() })
}

/// Team-level sum of its players' raw vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamPerformance {
    pub team_id: TeamId,
    pub match_id: MatchId,
    pub values: Vec<f64>,
    pub outcome: u8,
    pub roster: Vec<PlayerId>,
}

pub fn aggregate_team(vectors: &[&PerformanceVector], outcome: u8) -> Result<TeamPerformance> {
    let first = vectors.first().ok_or_else(|| Error::Contract("empty roster".into()))?;
    let mut values = vec![0.0; first.values.len()];
    let mut roster = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.match_id != first.match_id || v.team_id != first.team_id {
            return Err(Error::Contract("roster spans several matches or teams".into()));
        }
        if v.values.len() != values.len() {
            return Err(Error::Contract("vectors of different lengths".into()));
        }
        for (acc, x) in values.iter_mut().zip(&v.values) {
            *acc += x;
        }
        roster.push(v.player_id);
    }
    roster.sort_unstable();
    Ok(TeamPerformance { team_id: first.team_id, match_id: first.match_id, values, outcome, roster })
}
