use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{check_unit, ewma_step, MatchRating, RatingSeries};
use crate::error::{Error, Result};
use crate::ingest::PlayerId;
use crate::numeric::{mean, pearson, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpread {
    pub mean: f64,
    pub std: f64,
    pub matches: usize,
    pub excellent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingStats {
    pub mu: f64,
    /// Population standard deviation.
    pub sigma: f64,
    pub ratings: usize,
    pub excellence_threshold: f64,
    pub excellent_count: usize,
    /// Fraction of ratings inside [mu - 2 sigma, mu + 2 sigma].
    pub within_band: f64,
    pub per_player: BTreeMap<PlayerId, PlayerSpread>,
    /// Pearson correlation between player means and player standard deviations.
    pub mean_std_correlation: Option<f64>,
}

impl RatingStats {
    pub fn band(&self) -> (f64, f64) {
        (self.mu - 2.0 * self.sigma, self.mu + 2.0 * self.sigma)
    }
}

pub fn rating_stats(ratings: &[MatchRating]) -> Result<RatingStats> {
    if ratings.len() < 2 {
        return Err(Error::Undefined(format!("need at least 2 ratings, got {}", ratings.len())));
    }
    let values: Vec<f64> = ratings.iter().map(|r| r.r).collect();
    let mu = mean(&values).expect("non-empty");
    let sigma = std_dev(&values).expect("non-empty");
    let threshold = mu + 2.0 * sigma;
    let (lo, hi) = (mu - 2.0 * sigma, threshold);

    let mut by_player: BTreeMap<PlayerId, Vec<f64>> = BTreeMap::new();
    for r in ratings {
        by_player.entry(r.player_id).or_default().push(r.r);
    }
    let per_player: BTreeMap<PlayerId, PlayerSpread> = by_player
        .into_iter()
        .map(|(p, rs)| {
            let spread = PlayerSpread {
                mean: mean(&rs).expect("non-empty"),
                std: std_dev(&rs).expect("non-empty"),
                matches: rs.len(),
                excellent: rs.iter().filter(|&&r| r > threshold).count(),
            };
            (p, spread)
        })
        .collect();
    let means: Vec<f64> = per_player.values().map(|s| s.mean).collect();
    let stds: Vec<f64> = per_player.values().map(|s| s.std).collect();

    Ok(RatingStats {
        mu,
        sigma,
        ratings: values.len(),
        excellence_threshold: threshold,
        excellent_count: values.iter().filter(|&&r| r > threshold).count(),
        within_band: values.iter().filter(|&&r| r >= lo && r <= hi).count() as f64 / values.len() as f64,
        per_player,
        mean_std_correlation: pearson(&means, &stds),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCorrelation {
    pub alpha: f64,
    /// `None` when either side has zero variance.
    pub overall: Option<f64>,
    pub per_role: BTreeMap<usize, Option<f64>>,
}

/// For each alpha, correlation between r̄ and the goal-adjusted r̄* recomputed
/// with that alpha, over players with at least `min_matches` matches.
pub fn alpha_sweep_correlation(
    series: &BTreeMap<PlayerId, RatingSeries>,
    player_roles: &BTreeMap<PlayerId, BTreeSet<usize>>,
    alphas: &[f64],
    beta: f64,
    min_matches: usize,
) -> Result<Vec<AlphaCorrelation>> {
    check_unit("beta", beta)?;
    let eligible: Vec<&RatingSeries> =
        series.values().filter(|s| s.matches() >= min_matches.max(1)).collect();
    let r_bars: Vec<f64> = eligible.iter().map(|s| s.r_bar().expect("non-empty")).collect();
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        check_unit("alpha", alpha)?;
        let adjusted: Vec<f64> = eligible
            .iter()
            .map(|s| {
                let mut avg = None;
                for e in &s.entries {
                    let r_star = alpha * e.rating.norm_goals + (1.0 - alpha) * e.rating.r;
                    avg = Some(ewma_step(avg, r_star, beta)?);
                }
                Ok(avg.expect("non-empty"))
            })
            .collect::<Result<_>>()?;
        let mut per_role: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for ((s, rb), adj) in eligible.iter().zip(&r_bars).zip(&adjusted) {
            for &role in player_roles.get(&s.player_id).into_iter().flatten() {
                let e = per_role.entry(role).or_default();
                e.0.push(*rb);
                e.1.push(*adj);
            }
        }
        out.push(AlphaCorrelation {
            alpha,
            overall: pearson(&r_bars, &adjusted),
            per_role: per_role.into_iter().map(|(r, (a, b))| (r, pearson(&a, &b))).collect(),
        });
    }
    Ok(out)
}
