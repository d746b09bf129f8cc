//! Match ratings, goal-adjusted ratings, smoothed player ratings and the
//! analytics built on them.

mod analytics;
mod concordance;
mod ranking;
mod versatility;

pub use analytics::{alpha_sweep_correlation, rating_stats, AlphaCorrelation, PlayerSpread, RatingStats};
pub use concordance::{
    concordance, parse_expert_pairs, BucketReport, ConcordanceReport, ExpertLabel, ExpertPair,
};
pub use ranking::{build_role_rankings, RankingEntry, RoleRanking};
pub use versatility::{versatility, VersatilityScore};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::PerformanceVector;
use crate::ingest::{MatchId, PlayerId};
use crate::learning::WeightVector;
use crate::roles::RoleAssignment;

/// Rating parameters. `lower`/`upper` are the smallest and largest weighted
/// sums attainable over [0, 1]^n, so ratings map affinely onto [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    pub min_matches: usize,
}

impl RatingConfig {
    pub fn from_weights(weights: &[f64], alpha: f64, beta: f64, min_matches: usize) -> Result<Self> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        let lower: f64 = weights.iter().map(|w| w.min(0.0)).sum();
        let upper: f64 = weights.iter().map(|w| w.max(0.0)).sum();
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidParameter("weights are all zero".into()));
        }
        Ok(RatingConfig { alpha, beta, lower, upper, min_matches })
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")))
    }
}

/// Rating of one normalized feature vector.
pub fn rate_values(values: &[f64], weights: &[f64], cfg: &RatingConfig) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::CatalogMismatch {
            expected: format!("{} features", weights.len()),
            found: format!("{} features", values.len()),
        });
    }
    let s: f64 = values.iter().zip(weights).map(|(x, w)| x * w).sum();
    Ok(((s - cfg.lower) / (cfg.upper - cfg.lower)).clamp(0.0, 1.0))
}

pub fn rate_performance(v: &PerformanceVector, w: &WeightVector, cfg: &RatingConfig) -> Result<f64> {
    if !v.normalized {
        return Err(Error::Contract("rating needs a normalized performance vector".into()));
    }
    rate_values(&v.values, &w.weights, cfg)
}

/// Blends the rating with normalized goals; returns `(r*, norm_goals)`.
pub fn adjusted_rating(r: f64, goals: u32, max_goals: u32, alpha: f64) -> Result<(f64, f64)> {
    check_unit("alpha", alpha)?;
    if max_goals == 0 || goals > max_goals {
        return Err(Error::InvalidParameter(format!("goals {goals} with max_goals {max_goals}")));
    }
    let norm_goals = goals as f64 / max_goals as f64;
    Ok((alpha * norm_goals + (1.0 - alpha) * r, norm_goals))
}

/// One EWMA step; the first value initializes the average.
pub fn ewma_step(previous: Option<f64>, value: f64, beta: f64) -> Result<f64> {
    check_unit("beta", beta)?;
    Ok(match previous {
        None => value,
        Some(prev) => beta * value + (1.0 - beta) * prev,
    })
}

/// Rating of a player in a single match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRating {
    pub player_id: PlayerId,
    pub match_id: MatchId,
    pub r: f64,
    pub r_star: f64,
    pub norm_goals: f64,
    pub role: Option<RoleAssignment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub rating: MatchRating,
    pub r_bar: f64,
    pub r_bar_star: f64,
}

/// Chronological match ratings of one player with the running averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSeries {
    pub player_id: PlayerId,
    pub entries: Vec<SeriesEntry>,
}

impl RatingSeries {
    pub fn new(player_id: PlayerId) -> Self {
        RatingSeries { player_id, entries: Vec::new() }
    }

    pub fn r_bar(&self) -> Option<f64> {
        self.entries.last().map(|e| e.r_bar)
    }

    pub fn r_bar_star(&self) -> Option<f64> {
        self.entries.last().map(|e| e.r_bar_star)
    }

    pub fn matches(&self) -> usize {
        self.entries.len()
    }

    pub fn contains(&self, match_id: MatchId) -> bool {
        self.entries.iter().any(|e| e.rating.match_id == match_id)
    }

    pub fn role_history(&self) -> impl Iterator<Item = &RoleAssignment> {
        self.entries.iter().filter_map(|e| e.rating.role.as_ref())
    }

    /// Appends a match and advances both averages. Returns the new r̄.
    pub fn ewma_update(&mut self, rating: MatchRating, beta: f64) -> Result<f64> {
        if rating.player_id != self.player_id {
            return Err(Error::Contract("rating belongs to another player".into()));
        }
        check_unit("r", rating.r)?;
        let r_bar = ewma_step(self.r_bar(), rating.r, beta)?;
        let r_bar_star = ewma_step(self.r_bar_star(), rating.r_star, beta)?;
        self.entries.push(SeriesEntry { rating, r_bar, r_bar_star });
        Ok(r_bar)
    }
}
