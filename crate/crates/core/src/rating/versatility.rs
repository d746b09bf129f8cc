use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PlayerId;
use crate::roles::RoleAssignment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersatilityScore {
    pub player_id: PlayerId,
    /// Normalized entropy in [0, 1].
    pub v: f64,
    pub frequencies: Vec<f64>,
}

/// Normalized Shannon entropy of a player's role frequencies over `k` roles.
/// A hybrid match splits its unit weight equally among its roles.
pub fn versatility<'a>(
    player_id: PlayerId,
    history: impl IntoIterator<Item = &'a RoleAssignment>,
    k: usize,
) -> Result<VersatilityScore> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("versatility needs k >= 2, got {k}")));
    }
    let mut freq = vec![0.0; k];
    let mut matches = 0usize;
    for a in history {
        let roles = a.roles();
        let share = 1.0 / roles.len() as f64;
        for r in roles {
            if r >= k {
                return Err(Error::Contract(format!("role {r} outside 0..{k}")));
            }
            freq[r] += share;
        }
        matches += 1;
    }
    if matches == 0 {
        return Err(Error::Contract("empty role history".into()));
    }
    freq.iter_mut().for_each(|f| *f /= matches as f64);
    let h: f64 = freq.iter().filter(|&&p| p > 0.0).map(|&p| p * (1.0 / p).ln()).sum();
    let v = (h / (k as f64).ln()).clamp(0.0, 1.0);
    Ok(VersatilityScore { player_id, v, frequencies: freq })
}
