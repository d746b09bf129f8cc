//! Feature catalog and per-player / per-team performance vectors.

mod catalog;
mod vectors;

pub use catalog::{build_feature_catalog, FeatureCatalog, FeatureDescriptor};
pub use vectors::{
    aggregate_team, apply_normalization, extract_raw_performance, fit_normalization,
    NormalizationParams, PerformanceVector, TeamPerformance,
};

use crate::error::Result;
use crate::ingest::EventStore;

/// Raw vectors for every (player, match) in the store, in index order.
pub fn extract_all(store: &EventStore, catalog: &FeatureCatalog) -> Result<Vec<PerformanceVector>> {
    store
        .player_matches()
        .map(|(p, m)| {
            let events = store.player_match_events(p, m);
            let mut v = extract_raw_performance(&events, catalog)?;
            // goals come from the match record so excluded or unpositioned
            // events still count
            v.goals_scored = store.goals(p, m);
            Ok(v)
        })
        .collect()
}

/// Sums player vectors into one [`TeamPerformance`] per (match, team).
pub fn aggregate_all_teams(
    store: &EventStore,
    vectors: &[PerformanceVector],
) -> Result<Vec<TeamPerformance>> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(crate::ingest::MatchId, crate::ingest::TeamId), Vec<&PerformanceVector>> =
        BTreeMap::new();
    for v in vectors {
        groups.entry((v.match_id, v.team_id)).or_default().push(v);
    }
    groups
        .into_iter()
        .map(|((m, t), roster)| {
            let outcome = store
                .get_match(m)
                .and_then(|rec| rec.outcome(t))
                .ok_or_else(|| crate::Error::NotFound(format!("match {m} team {t}")))?;
            aggregate_team(&roster, outcome)
        })
        .collect()
}
