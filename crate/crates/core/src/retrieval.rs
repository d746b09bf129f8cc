//! Spatial player search over a tessellated pitch.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Event, PlayerId, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneTessellation {
    pub rows: usize,
    pub cols: usize,
}

impl Default for ZoneTessellation {
    fn default() -> Self {
        ZoneTessellation { rows: 10, cols: 10 }
    }
}

impl ZoneTessellation {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows > 100 || cols > 100 {
            return Err(Error::InvalidParameter(format!("grid {rows}x{cols} must be within 1..=100 per side")));
        }
        Ok(ZoneTessellation { rows, cols })
    }

    pub fn zones(&self) -> usize {
        self.rows * self.cols
    }

    /// Row-major zone index; rows follow y, columns follow x. Cells are
    /// half-open except along the top and right edges of the field.
    pub fn zone_of(&self, p: Position) -> usize {
        let bin = |v: f64, n: usize| (((v / 100.0) * n as f64).floor() as usize).min(n - 1);
        bin(p.y, self.rows) * self.cols + bin(p.x, self.cols)
    }

    pub fn zone_bounds(&self, zone: usize) -> Option<((f64, f64), (f64, f64))> {
        if zone >= self.zones() {
            return None;
        }
        let (r, c) = (zone / self.cols, zone % self.cols);
        let (w, h) = (100.0 / self.cols as f64, 100.0 / self.rows as f64);
        Some(((c as f64 * w, r as f64 * h), ((c + 1) as f64 * w, (r + 1) as f64 * h)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneQuery {
    pub grid: ZoneTessellation,
    pub q: Vec<f64>,
}

impl ZoneQuery {
    pub fn from_zones(grid: ZoneTessellation, zones: &[usize]) -> Result<Self> {
        let mut q = vec![0.0; grid.zones()];
        for &z in zones {
            *q.get_mut(z).ok_or_else(|| {
                Error::Validation(format!("zone {z} outside a {}-zone grid", grid.zones()))
            })? = 1.0;
        }
        Self::from_weights(grid, q)
    }

    pub fn from_weights(grid: ZoneTessellation, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.zones() {
            return Err(Error::Validation(format!("query has {} weights, grid has {} zones", q.len(), grid.zones())));
        }
        if q.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Validation("query weights must be finite and non-negative".into()));
        }
        if !q.iter().any(|w| *w > 0.0) {
            return Err(Error::Validation("query selects no zone".into()));
        }
        Ok(ZoneQuery { grid, q })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerZoneVector {
    pub player_id: PlayerId,
    pub grid: ZoneTessellation,
    pub v: Vec<f64>,
    pub counts: Vec<u64>,
}

impl PlayerZoneVector {
    pub fn from_counts(player_id: PlayerId, grid: ZoneTessellation, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != grid.zones() {
            return Err(Error::Contract("zone counts do not match the grid".into()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Validation(format!("player {player_id} has no positioned events")));
        }
        let v = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(PlayerZoneVector { player_id, grid, v, counts })
    }

    pub fn total_events(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn build_player_zone_vector<'a>(
    player_id: PlayerId,
    events: impl IntoIterator<Item = &'a Event>,
    grid: ZoneTessellation,
) -> Result<PlayerZoneVector> {
    let mut counts = vec![0u64; grid.zones()];
    for e in events {
        if e.player_id != player_id {
            return Err(Error::Contract(format!("event {} belongs to player {}", e.event_id, e.player_id)));
        }
        counts[grid.zone_of(e.position)] += 1;
    }
    PlayerZoneVector::from_counts(player_id, grid, counts)
}

pub fn score_query(v: &[f64], q: &[f64]) -> Result<f64> {
    if v.len() != q.len() {
        return Err(Error::Validation(format!("vector of length {} against query of length {}", v.len(), q.len())));
    }
    Ok(v.iter().zip(q).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub player_id: PlayerId,
    pub z: f64,
    pub s: f64,
    pub r_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub query: ZoneQuery,
    pub top_k: usize,
    pub hits: Vec<SearchHit>,
}

/// Descending z, ascending player id on ties.
pub fn hit_order(a: &SearchHit, b: &SearchHit) -> Ordering {
    b.z.total_cmp(&a.z).then(a.player_id.cmp(&b.player_id))
}

/// Scores every player that has both a zone vector and a rating with z = s * r̄.
/// `ratings` should already be restricted to eligible players.
pub fn search(
    query: &ZoneQuery,
    vectors: &BTreeMap<PlayerId, PlayerZoneVector>,
    ratings: &BTreeMap<PlayerId, f64>,
    top_k: usize,
) -> Result<SearchResult> {
    if !query.q.iter().any(|w| *w > 0.0) {
        return Err(Error::Validation("query selects no zone".into()));
    }
    let mut hits = Vec::with_capacity(ratings.len());
    for (&player_id, &r_bar) in ratings {
        let Some(vec) = vectors.get(&player_id) else { continue };
        if vec.grid != query.grid {
            return Err(Error::Validation(format!(
                "query grid {}x{} differs from index grid {}x{}",
                query.grid.rows, query.grid.cols, vec.grid.rows, vec.grid.cols
            )));
        }
        let s = score_query(&vec.v, &query.q)?;
        hits.push(SearchHit { player_id, z: s * r_bar, s, r_bar });
    }
    hits.sort_by(hit_order);
    hits.truncate(top_k);
    Ok(SearchResult { query: query.clone(), top_k, hits })
}

/// Query wire format: `{"grid": {"rows", "cols"}, "zones": [..] | "weights": [..], "top_k"}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default)]
    pub grid: Option<ZoneTessellation>,
    #[serde(default)]
    pub zones: Option<Vec<usize>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_top_k() -> usize {
    10
}

impl QueryRequest {
    pub fn to_query(&self, default_grid: ZoneTessellation) -> Result<ZoneQuery> {
        let grid = self.grid.unwrap_or(default_grid);
        ZoneTessellation::new(grid.rows, grid.cols)?;
        match (&self.zones, &self.weights) {
            (Some(z), None) => ZoneQuery::from_zones(grid, z),
            (None, Some(w)) => ZoneQuery::from_weights(grid, w.clone()),
            _ => Err(Error::Validation("query needs exactly one of `zones` or `weights`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchHitView {
    pub player_id: PlayerId,
    pub name: String,
    pub z: f64,
    pub s: f64,
    pub r_bar: f64,
    pub heatmap: Vec<f64>,
}
