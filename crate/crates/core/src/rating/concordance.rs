use serde::{Deserialize, Serialize};

use super::RoleRanking;
use crate::error::{Error, Result};
use crate::ingest::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpertLabel {
    First,
    Second,
    Equal,
}

impl std::str::FromStr for ExpertLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" | "a" | "1" => Ok(ExpertLabel::First),
            "second" | "b" | "2" => Ok(ExpertLabel::Second),
            "equal" | "=" | "0" => Ok(ExpertLabel::Equal),
            other => Err(Error::Validation(format!("unknown expert label `{other}`"))),
        }
    }
}

/// Three expert judgements on which of two players is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertPair {
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub labels: [ExpertLabel; 3],
}

impl ExpertPair {
    /// The same judgement with the two players swapped.
    pub fn swapped(&self) -> Self {
        let flip = |l: ExpertLabel| match l {
            ExpertLabel::First => ExpertLabel::Second,
            ExpertLabel::Second => ExpertLabel::First,
            ExpertLabel::Equal => ExpertLabel::Equal,
        };
        ExpertPair { player_a: self.player_b, player_b: self.player_a, labels: self.labels.map(flip) }
    }

    fn counts(&self) -> (usize, usize, usize) {
        let c = |x| self.labels.iter().filter(|&&l| l == x).count();
        (c(ExpertLabel::First), c(ExpertLabel::Second), c(ExpertLabel::Equal))
    }
}

/// Parses `player_a, player_b, label1, label2, label3` rows (comma or tab
/// separated). Blank lines, `#` comments and a header row are skipped.
pub fn parse_expert_pairs(text: &str) -> Result<Vec<ExpertPair>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        if lineno == 0 && cols.first().is_some_and(|c| c.parse::<u64>().is_err()) {
            continue;
        }
        if cols.len() != 5 {
            return Err(Error::Validation(format!("line {}: expected 5 columns", lineno + 1)));
        }
        let id = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::Validation(format!("line {}: bad player id `{s}`", lineno + 1)))
        };
        out.push(ExpertPair {
            player_a: id(cols[0])?,
            player_b: id(cols[1])?,
            labels: [cols[2].parse()?, cols[3].parse()?, cols[4].parse()?],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    /// Inclusive rank-distance range; `hi = None` is unbounded.
    pub lo: usize,
    pub hi: Option<usize>,
    pub pairs: usize,
    pub majority_agree: usize,
    pub unanimous: usize,
    pub unanimous_agree: usize,
}

impl BucketReport {
    pub fn c_maj(&self) -> Option<f64> {
        (self.pairs > 0).then(|| self.majority_agree as f64 / self.pairs as f64)
    }

    pub fn c_una(&self) -> Option<f64> {
        (self.unanimous > 0).then(|| self.unanimous_agree as f64 / self.unanimous as f64)
    }

    fn contains(&self, d: usize) -> bool {
        d >= self.lo && self.hi.is_none_or(|h| d <= h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub c_maj: f64,
    /// `None` when no pair was unanimous.
    pub c_una: Option<f64>,
    pub evaluated: usize,
    pub discarded: usize,
    pub unranked: usize,
    pub buckets: Vec<BucketReport>,
}

/// Agreement between the ranking's pairwise preference (higher-ranked player
/// is better) and expert judgements. Pairs where all experts said "equal", or
/// that split one-one with one "equal", are discarded.
pub fn concordance(pairs: &[ExpertPair], ranking: &RoleRanking) -> Result<ConcordanceReport> {
    let mut buckets: Vec<BucketReport> = [(1, Some(10)), (11, Some(20)), (21, None)]
        .into_iter()
        .map(|(lo, hi)| BucketReport { lo, hi, pairs: 0, majority_agree: 0, unanimous: 0, unanimous_agree: 0 })
        .collect();
    let (mut discarded, mut unranked) = (0, 0);
    for pair in pairs {
        let (Some(ra), Some(rb)) = (ranking.rank_of(pair.player_a), ranking.rank_of(pair.player_b)) else {
            log::warn!("pair ({}, {}) has an unranked player", pair.player_a, pair.player_b);
            unranked += 1;
            continue;
        };
        if ra == rb {
            return Err(Error::Contract(format!("pair compares player {} with itself", pair.player_a)));
        }
        let (first, second, equal) = pair.counts();
        if equal == 3 || (first == 1 && second == 1 && equal == 1) {
            discarded += 1;
            continue;
        }
        let engine_first = ra < rb;
        let agreeing = if engine_first { first } else { second };
        let bucket = buckets
            .iter_mut()
            .find(|b| b.contains(ra.abs_diff(rb)))
            .expect("buckets cover every positive distance");
        bucket.pairs += 1;
        if agreeing >= 2 {
            bucket.majority_agree += 1;
        }
        if first == 3 || second == 3 {
            bucket.unanimous += 1;
            if agreeing == 3 {
                bucket.unanimous_agree += 1;
            }
        }
    }
    let evaluated: usize = buckets.iter().map(|b| b.pairs).sum();
    if evaluated == 0 {
        return Err(Error::Undefined("no pair left to evaluate".into()));
    }
    let agree: usize = buckets.iter().map(|b| b.majority_agree).sum();
    let una: usize = buckets.iter().map(|b| b.unanimous).sum();
    let una_agree: usize = buckets.iter().map(|b| b.unanimous_agree).sum();
    Ok(ConcordanceReport {
        c_maj: agree as f64 / evaluated as f64,
        c_una: (una > 0).then(|| una_agree as f64 / una as f64),
        evaluated,
        discarded,
        unranked,
        buckets,
    })
}
