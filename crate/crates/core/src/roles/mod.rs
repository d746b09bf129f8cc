//! Role detection: centers of performance, k-means role model with
//! silhouette-based choice of k, and soft (hybrid-aware) assignment.

mod kmeans;
mod silhouette;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use kmeans::{dist, kmeans, nearest, Clustering, Point};
pub use silhouette::silhouette_score;

use crate::error::{Error, Result};
use crate::ingest::{Event, MatchId, PlayerId};

/// Mean position of a player's events in one match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterOfPerformance {
    pub player_id: PlayerId,
    pub match_id: MatchId,
    pub x: f64,
    pub y: f64,
    pub event_count: usize,
}

impl CenterOfPerformance {
    pub fn point(&self) -> Point {
        [self.x, self.y]
    }
}

pub fn compute_center(events: &[&Event]) -> Result<CenterOfPerformance> {
    let first = events
        .first()
        .ok_or_else(|| Error::Contract("no events, so no center of performance".into()))?;
    let (mut sx, mut sy) = (0.0, 0.0);
    for ev in events {
        if ev.player_id != first.player_id || ev.match_id != first.match_id {
            return Err(Error::Contract("event slice mixes players or matches".into()));
        }
        sx += ev.position.x;
        sy += ev.position.y;
    }
    let n = events.len() as f64;
    Ok(CenterOfPerformance {
        player_id: first.player_id,
        match_id: first.match_id,
        x: sx / n,
        y: sy / n,
        event_count: events.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleFitConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Points kept per cluster for inference-time k-silhouettes.
    pub sample_cap: usize,
    /// Silhouette of each candidate k is computed on at most this many points.
    pub silhouette_cap: usize,
}

impl Default for RoleFitConfig {
    fn default() -> Self {
        RoleFitConfig {
            k_min: 2,
            k_max: 20,
            restarts: 10,
            max_iter: 300,
            tolerance: 1e-6,
            seed: 42,
            sample_cap: 10_000,
            silhouette_cap: 6_000,
        }
    }
}

/// Fitted roles: centroids, the chosen k and its silhouette, plus a per-cluster
/// sample of fitting points for soft assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleModel {
    pub k: usize,
    pub centroids: Vec<Point>,
    pub silhouette: f64,
    pub seed: u64,
    pub sweep: BTreeMap<usize, f64>,
    pub samples: Vec<Vec<Point>>,
}

impl RoleModel {
    /// Recomputes the silhouette over the stored samples.
    pub fn sample_silhouette(&self) -> Result<f64> {
        let (points, labels): (Vec<Point>, Vec<usize>) = self
            .samples
            .iter()
            .enumerate()
            .flat_map(|(c, pts)| pts.iter().map(move |p| (*p, c)))
            .unzip();
        silhouette_score(&points, &labels)
    }

    pub fn sample_digest(&self) -> String {
        let mut h = Sha256::new();
        for (c, pts) in self.samples.iter().enumerate() {
            h.update((c as u64).to_le_bytes());
            for p in pts {
                h.update(p[0].to_le_bytes());
                h.update(p[1].to_le_bytes());
            }
        }
        format!("{:x}", h.finalize())[..16].to_string()
    }
}

fn derive_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Sweeps k over `[k_min, k_max]` and keeps the clustering with the highest
/// mean silhouette.
pub fn fit_roles(centers: &[Point], cfg: &RoleFitConfig) -> Result<RoleModel> {
    if cfg.k_min < 2 || cfg.k_max < cfg.k_min {
        return Err(Error::InvalidParameter(format!("bad k range {}..={}", cfg.k_min, cfg.k_max)));
    }
    if centers.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Validation("non-finite center".into()));
    }
    let distinct: BTreeSet<(u64, u64)> =
        centers.iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
    if distinct.len() < cfg.k_max {
        return Err(Error::Contract(format!(
            "{} distinct centers, need at least k_max = {}",
            distinct.len(),
            cfg.k_max
        )));
    }

    let sil_idx: Option<Vec<usize>> = (centers.len() > cfg.silhouette_cap).then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut idx = sample(&mut rng, centers.len(), cfg.silhouette_cap).into_vec();
        idx.sort_unstable();
        idx
    });

    let mut sweep = BTreeMap::new();
    let mut best: Option<(f64, usize, Clustering)> = None;
    for k in cfg.k_min..=cfg.k_max {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, k));
        let run = kmeans(centers, k, cfg.restarts, cfg.max_iter, cfg.tolerance, &mut rng);
        let ss = match &sil_idx {
            None => silhouette_score(centers, &run.labels)?,
            Some(idx) => {
                let pts: Vec<Point> = idx.iter().map(|&i| centers[i]).collect();
                let labels: Vec<usize> = idx.iter().map(|&i| run.labels[i]).collect();
                silhouette_score(&pts, &labels)?
            }
        };
        sweep.insert(k, ss);
        if best.as_ref().is_none_or(|(b, _, _)| ss > *b) {
            best = Some((ss, k, run));
        }
    }
    let (silhouette, k, run) = best.expect("non-empty sweep");

    let mut members: Vec<Vec<Point>> = vec![Vec::new(); k];
    for (p, &l) in centers.iter().zip(&run.labels) {
        members[l].push(*p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let samples = members
        .into_iter()
        .map(|pts| {
            if pts.len() <= cfg.sample_cap {
                pts
            } else {
                let mut idx = sample(&mut rng, pts.len(), cfg.sample_cap).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| pts[i]).collect()
            }
        })
        .collect();

    Ok(RoleModel { k, centroids: run.centroids, silhouette, seed: cfg.seed, sweep, samples })
}

/// Primary (nearest-centroid) role plus the hybrid roles whose k-silhouette
/// is at most `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub primary: usize,
    pub hybrids: BTreeSet<usize>,
    /// k-silhouette against every cluster; 0 at the primary.
    pub silhouettes: Vec<f64>,
    pub delta: f64,
}

impl RoleAssignment {
    pub fn roles(&self) -> BTreeSet<usize> {
        let mut r = self.hybrids.clone();
        r.insert(self.primary);
        r
    }

    pub fn is_hybrid(&self) -> bool {
        !self.hybrids.is_empty()
    }
}

pub fn soft_assign(center: Point, model: &RoleModel, delta: f64) -> Result<RoleAssignment> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("delta {delta} must be >= 0")));
    }
    let primary = nearest(&model.centroids, &center);
    let mean_dist: Vec<f64> = model
        .samples
        .iter()
        .map(|pts| {
            if pts.is_empty() {
                f64::INFINITY
            } else {
                pts.iter().map(|p| dist(p, &center)).sum::<f64>() / pts.len() as f64
            }
        })
        .collect();
    let di = mean_dist[primary];
    let silhouettes: Vec<f64> = mean_dist
        .iter()
        .map(|&dk| {
            let m = di.max(dk);
            if m == 0.0 || !m.is_finite() {
                if dk.is_infinite() { 1.0 } else { 0.0 }
            } else {
                (dk - di) / m
            }
        })
        .collect();
    let hybrids = silhouettes
        .iter()
        .enumerate()
        .filter(|&(j, &s)| j != primary && s <= delta)
        .map(|(j, _)| j)
        .collect();
    Ok(RoleAssignment { primary, hybrids, silhouettes, delta })
}

/// Roles held in at least `x_pct` percent of the given matches. A hybrid
/// match counts toward each of its roles.
pub fn assign_player_roles<'a>(
    assignments: impl IntoIterator<Item = &'a RoleAssignment>,
    x_pct: f64,
) -> BTreeSet<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0usize;
    for a in assignments {
        total += 1;
        for r in a.roles() {
            *counts.entry(r).or_insert(0) += 1;
        }
    }
    if total == 0 {
        return BTreeSet::new();
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c as f64 / total as f64 >= x_pct / 100.0)
        .map(|(r, _)| r)
        .collect()
}
