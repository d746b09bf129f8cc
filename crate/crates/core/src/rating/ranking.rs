use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::RatingSeries;
use crate::ingest::PlayerId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub player_id: PlayerId,
    pub r_bar: f64,
}

/// Players of one role ordered by r̄ descending, ties by player id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleRanking {
    pub role: usize,
    pub entries: Vec<RankingEntry>,
    pub x_pct: f64,
    pub min_matches: usize,
}

impl RoleRanking {
    /// 1-based rank of a player.
    pub fn rank_of(&self, player: PlayerId) -> Option<usize> {
        self.entries.iter().position(|e| e.player_id == player).map(|i| i + 1)
    }
}

pub(crate) fn rank_order(a: &RankingEntry, b: &RankingEntry) -> std::cmp::Ordering {
    b.r_bar.total_cmp(&a.r_bar).then(a.player_id.cmp(&b.player_id))
}

/// One ranking per role in `0..k`. `player_roles` holds the roles each player
/// qualified for under the x% rule.
pub fn build_role_rankings(
    series: &BTreeMap<PlayerId, RatingSeries>,
    player_roles: &BTreeMap<PlayerId, BTreeSet<usize>>,
    k: usize,
    x_pct: f64,
    min_matches: usize,
) -> Vec<RoleRanking> {
    let mut rankings: Vec<RoleRanking> = (0..k)
        .map(|role| RoleRanking { role, entries: Vec::new(), x_pct, min_matches })
        .collect();
    for (player, roles) in player_roles {
        let Some(s) = series.get(player) else { continue };
        let Some(r_bar) = s.r_bar() else { continue };
        if s.matches() < min_matches {
            continue;
        }
        for &role in roles {
            if let Some(r) = rankings.get_mut(role) {
                r.entries.push(RankingEntry { player_id: *player, r_bar });
            }
        }
    }
    for r in &mut rankings {
        r.entries.sort_by(rank_order);
    }
    rankings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rating::MatchRating;

    fn series_with(player: PlayerId, r: f64, n: usize) -> RatingSeries {
        let mut s = RatingSeries::new(player);
        for m in 0..n {
            let rating = MatchRating {
                player_id: player,
                match_id: m as u64,
                r,
                r_star: r,
                norm_goals: 0.0,
                role: None,
            };
            s.ewma_update(rating, 0.1).unwrap();
        }
        s
    }

    #[test]
    fn ordered_by_rating_then_id() {
        let series: BTreeMap<_, _> = [(1, 0.3), (2, 0.5), (3, 0.4), (4, 0.5)]
            .into_iter()
            .map(|(p, r)| (p, series_with(p, r, 3)))
            .collect();
        let roles: BTreeMap<_, _> = (1..=4).map(|p| (p, BTreeSet::from([0]))).collect();
        let rk = build_role_rankings(&series, &roles, 2, 40.0, 1);
        let ids: Vec<_> = rk[0].entries.iter().map(|e| e.player_id).collect();
        assert_eq!(ids, vec![2, 4, 3, 1]);
        assert!(rk[1].entries.is_empty());
        assert_eq!(rk[0].rank_of(3), Some(3));
    }

    #[test]
    fn min_matches_and_two_roles() {
        let series: BTreeMap<_, _> =
            [(1, series_with(1, 0.3, 10)), (2, series_with(2, 0.9, 2))].into_iter().collect();
        let roles: BTreeMap<_, _> =
            [(1, BTreeSet::from([0, 1])), (2, BTreeSet::from([0]))].into_iter().collect();
        let rk = build_role_rankings(&series, &roles, 2, 40.0, 5);
        assert_eq!(rk[0].entries.len(), 1);
        assert_eq!(rk[1].entries[0].player_id, 1);
    }
}
