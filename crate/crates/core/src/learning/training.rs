use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{f1_and_accuracy, roc_auc};
use super::svm::{train_svm, LinearModel, SolverConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureCatalog, NormalizationParams, PerformanceVector, TeamPerformance};
use crate::ingest::{CompetitionId, EventStore, MatchId, PlayerId, TeamId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: Vec<f64>,
    pub label: bool,
    pub match_id: MatchId,
    pub team_id: TeamId,
    pub competition_id: CompetitionId,
    /// Set for examples aggregated over the players of a single role.
    pub role: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum TrainingScope {
    All,
    Competition(CompetitionId),
    Role(usize),
}

impl std::fmt::Display for TrainingScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainingScope::All => f.write_str("all"),
            TrainingScope::Competition(c) => write!(f, "competition:{c}"),
            TrainingScope::Role(r) => write!(f, "role:{r}"),
        }
    }
}

impl std::str::FromStr for TrainingScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("unknown training scope `{s}`"));
        match s.split_once(':') {
            None if s == "all" => Ok(TrainingScope::All),
            Some(("competition", id)) => Ok(TrainingScope::Competition(id.parse().map_err(|_| bad())?)),
            Some(("role", id)) => Ok(TrainingScope::Role(id.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Learned feature weights. The intercept is kept for evaluation only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub catalog_hash: String,
    pub scope: TrainingScope,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub cost: f64,
    pub mean_auc: f64,
    pub fold_aucs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub examples: usize,
    pub holdout_fraction: f64,
    pub cross_validation: Vec<CostReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub cost_grid: Vec<f64>,
    pub folds: usize,
    pub holdout: f64,
    pub seed: u64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            cost_grid: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            folds: 5,
            holdout: 0.2,
            seed: 42,
            max_epochs: 200_000,
            tolerance: 1e-3,
        }
    }
}

impl TrainConfig {
    fn solver(&self, cost: f64) -> SolverConfig {
        SolverConfig { cost, max_epochs: self.max_epochs, tolerance: self.tolerance, seed: self.seed }
    }
}

/// Two examples per match (one per team) over team vectors scaled to [0, 1]
/// with team-level min/max. Returns the fitted team-level scaling too.
pub fn build_training_set(
    store: &EventStore,
    teams: &[TeamPerformance],
    catalog: &FeatureCatalog,
) -> Result<(Vec<TrainingExample>, NormalizationParams)> {
    let mut per_match: BTreeMap<MatchId, Vec<&TeamPerformance>> = BTreeMap::new();
    for t in teams {
        per_match.entry(t.match_id).or_default().push(t);
    }
    for m in store.matches() {
        let n = per_match.get(&m.match_id).map_or(0, Vec::len);
        if n != 2 {
            return Err(Error::Contract(format!("match {} has {} team vectors, expected 2", m.match_id, n)));
        }
    }
    let params = fit_team_normalization(teams, catalog)?;
    let mut examples = Vec::with_capacity(teams.len());
    for (match_id, pair) in per_match {
        let record = store
            .get_match(match_id)
            .ok_or_else(|| Error::NotFound(format!("match {match_id}")))?;
        for t in pair {
            examples.push(TrainingExample {
                features: params.scale_values(&t.values),
                label: t.outcome == 1,
                match_id,
                team_id: t.team_id,
                competition_id: record.competition_id,
                role: None,
            });
        }
    }
    Ok((examples, params))
}

fn fit_team_normalization(
    teams: &[TeamPerformance],
    catalog: &FeatureCatalog,
) -> Result<NormalizationParams> {
    let as_vectors: Vec<PerformanceVector> = teams
        .iter()
        .map(|t| PerformanceVector {
            player_id: 0,
            match_id: t.match_id,
            team_id: t.team_id,
            values: t.values.clone(),
            goals_scored: 0,
            normalized: false,
        })
        .collect();
    crate::features::fit_normalization(&as_vectors, catalog)
}

/// Per (match, team, role) examples summing only the players whose primary
/// role in that match is the given role.
pub fn build_role_training_set(
    store: &EventStore,
    vectors: &[PerformanceVector],
    primary_roles: &BTreeMap<(PlayerId, MatchId), usize>,
    catalog: &FeatureCatalog,
) -> Result<Vec<TrainingExample>> {
    let mut groups: BTreeMap<(MatchId, TeamId, usize), Vec<f64>> = BTreeMap::new();
    for v in vectors {
        let Some(&role) = primary_roles.get(&(v.player_id, v.match_id)) else { continue };
        let acc = groups.entry((v.match_id, v.team_id, role)).or_insert_with(|| vec![0.0; v.values.len()]);
        for (a, x) in acc.iter_mut().zip(&v.values) {
            *a += x;
        }
    }
    let teams: Vec<TeamPerformance> = groups
        .iter()
        .map(|(&(m, t, _), values)| TeamPerformance {
            team_id: t,
            match_id: m,
            values: values.clone(),
            outcome: 0,
            roster: Vec::new(),
        })
        .collect();
    if teams.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let params = fit_team_normalization(&teams, catalog)?;
    groups
        .into_iter()
        .map(|((m, t, role), values)| {
            let record = store.get_match(m).ok_or_else(|| Error::NotFound(format!("match {m}")))?;
            let outcome = record.outcome(t).ok_or_else(|| Error::NotFound(format!("team {t}")))?;
            Ok(TrainingExample {
                features: params.scale_values(&values),
                label: outcome == 1,
                match_id: m,
                team_id: t,
                competition_id: record.competition_id,
                role: Some(role),
            })
        })
        .collect()
}

fn fit(examples: &[&TrainingExample], cfg: &TrainConfig, cost: f64) -> Result<LinearModel> {
    let rows: Vec<&[f64]> = examples.iter().map(|e| e.features.as_slice()).collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    train_svm(&rows, &labels, &cfg.solver(cost))
}

fn score_all(model: &LinearModel, examples: &[&TrainingExample]) -> (Vec<f64>, Vec<bool>) {
    examples.iter().map(|e| (model.decision(&e.features), e.label)).unzip()
}

/// Mean validation AUC for each cost over `cfg.folds` folds of `train`.
/// Folds are assigned by position in `train`.
pub fn cross_validate(train: &[&TrainingExample], cfg: &TrainConfig) -> Result<Vec<CostReport>> {
    if cfg.folds < 2 {
        return Err(Error::InvalidParameter("need at least 2 folds".into()));
    }
    let mut reports = Vec::with_capacity(cfg.cost_grid.len());
    for &cost in &cfg.cost_grid {
        let mut fold_aucs = Vec::with_capacity(cfg.folds);
        for fold in 0..cfg.folds {
            let in_fold = |i: usize| i % cfg.folds == fold;
            let val: Vec<&TrainingExample> =
                train.iter().enumerate().filter(|&(i, _)| in_fold(i)).map(|(_, &e)| e).collect();
            let fit_set: Vec<&TrainingExample> =
                train.iter().enumerate().filter(|&(i, _)| !in_fold(i)).map(|(_, &e)| e).collect();
            let model = match fit(&fit_set, cfg, cost) {
                Ok(m) => m,
                Err(Error::DegenerateLabels(_)) => continue,
                Err(e) => return Err(e),
            };
            let (scores, labels) = score_all(&model, &val);
            match roc_auc(&scores, &labels) {
                Ok(auc) => fold_aucs.push(auc),
                Err(Error::Undefined(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        let mean_auc = if fold_aucs.is_empty() {
            f64::NAN
        } else {
            fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64
        };
        reports.push(CostReport { cost, mean_auc, fold_aucs });
    }
    Ok(reports)
}

/// Splits off a holdout, picks the cost with the best cross-validated AUC on
/// the rest, refits on the full training split and evaluates on the holdout.
pub fn train_weights(
    examples: &[TrainingExample],
    catalog_hash: &str,
    scope: TrainingScope,
    cfg: &TrainConfig,
) -> Result<(WeightVector, EvalReport)> {
    if examples.len() < 10 {
        return Err(Error::Contract(format!("need at least 10 examples, got {}", examples.len())));
    }
    let positives = examples.iter().filter(|e| e.label).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::DegenerateLabels(format!(
            "{positives} positives among {} examples",
            examples.len()
        )));
    }
    if !(0.0..1.0).contains(&cfg.holdout) || cfg.cost_grid.is_empty() {
        return Err(Error::InvalidParameter("holdout must be in [0,1) with a non-empty cost grid".into()));
    }

    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_holdout = ((examples.len() as f64) * cfg.holdout).round() as usize;
    let (holdout_idx, train_idx) = order.split_at(n_holdout);
    let train: Vec<&TrainingExample> = train_idx.iter().map(|&i| &examples[i]).collect();
    let holdout: Vec<&TrainingExample> = holdout_idx.iter().map(|&i| &examples[i]).collect();

    let cv = cross_validate(&train, cfg)?;
    let best = cv
        .iter()
        .filter(|r| r.mean_auc.is_finite())
        .fold(None::<&CostReport>, |best, r| match best {
            Some(b) if b.mean_auc >= r.mean_auc => Some(b),
            _ => Some(r),
        })
        .map(|r| r.cost)
        .unwrap_or(cfg.cost_grid[0]);

    let model = fit(&train, cfg, best)?;
    let weights = WeightVector {
        weights: model.weights,
        intercept: model.intercept,
        catalog_hash: catalog_hash.to_string(),
        scope,
        cost: best,
    };
    let eval_on = if holdout.is_empty() { &train } else { &holdout };
    let mut report = evaluate_refs(&weights, eval_on)?;
    report.holdout_fraction = cfg.holdout;
    report.cross_validation = cv;
    Ok((weights, report))
}

fn evaluate_refs(weights: &WeightVector, examples: &[&TrainingExample]) -> Result<EvalReport> {
    if examples.is_empty() {
        return Err(Error::Contract("no examples to evaluate".into()));
    }
    let scores: Vec<f64> = examples
        .iter()
        .map(|e| e.features.iter().zip(&weights.weights).map(|(x, w)| x * w).sum::<f64>() + weights.intercept)
        .collect();
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    let auc = roc_auc(&scores, &labels)?;
    let (f1, accuracy) = f1_and_accuracy(&scores, &labels, 0.0);
    Ok(EvalReport {
        auc,
        f1,
        accuracy,
        examples: examples.len(),
        holdout_fraction: 0.0,
        cross_validation: Vec::new(),
    })
}

/// AUC, F1 and accuracy (threshold 0) of `weights` on `examples`.
pub fn evaluate_classifier(weights: &WeightVector, examples: &[TrainingExample]) -> Result<EvalReport> {
    let refs: Vec<&TrainingExample> = examples.iter().collect();
    evaluate_refs(weights, &refs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    All,
    Competition,
    Role,
}

/// Trains one weight vector per competition or per role. Scopes without both
/// classes are skipped.
pub fn train_scoped_weights(
    examples: &[TrainingExample],
    kind: ScopeKind,
    catalog_hash: &str,
    cfg: &TrainConfig,
) -> Result<Vec<(WeightVector, EvalReport)>> {
    let mut parts: BTreeMap<TrainingScope, Vec<TrainingExample>> = BTreeMap::new();
    for e in examples {
        let scope = match kind {
            ScopeKind::All => Some(TrainingScope::All),
            ScopeKind::Competition => Some(TrainingScope::Competition(e.competition_id)),
            ScopeKind::Role => e.role.map(TrainingScope::Role),
        };
        if let Some(s) = scope {
            parts.entry(s).or_default().push(e.clone());
        }
    }
    if parts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    parts.retain(|scope, part| {
        let positives = part.iter().filter(|e| e.label).count();
        let ok = positives > 0 && positives < part.len();
        if !ok {
            log::warn!("skipping scope {scope}: only one class among {} examples", part.len());
        }
        ok
    });
    std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .iter()
            .map(|(&scope, part)| s.spawn(move || train_weights(part, catalog_hash, scope, cfg)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    })
}

/// Range-normalized RMS difference between two weight vectors; the range is
/// taken from `base`.
pub fn compute_nrmse(base: &[f64], other: &[f64]) -> Result<f64> {
    if base.len() != other.len() || base.is_empty() {
        return Err(Error::Contract("weight vectors differ in length".into()));
    }
    let max = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = base.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return Err(Error::Undefined("base weights are constant".into()));
    }
    let mse = base.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / base.len() as f64;
    Ok(mse.sqrt() / (max - min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nrmse_examples() {
        assert_eq!(compute_nrmse(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(compute_nrmse(&[0.3, -1.0, 2.0], &[0.3, -1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(compute_nrmse(&[1.0, 1.0], &[0.0, 1.0]), Err(Error::Undefined(_))));
        assert!(compute_nrmse(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn nrmse_is_scale_free() {
        let a = [0.2, -0.4, 1.3, 0.0];
        let b = [0.1, -0.3, 1.0, 0.2];
        let a2: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        let b2: Vec<f64> = b.iter().map(|x| 2.0 * x).collect();
        let d = compute_nrmse(&a, &b).unwrap() - compute_nrmse(&a2, &b2).unwrap();
        assert!(d.abs() < 1e-15);
    }

    #[test]
    fn scope_strings() {
        for s in [TrainingScope::All, TrainingScope::Competition(524), TrainingScope::Role(3)] {
            assert_eq!(s.to_string().parse::<TrainingScope>().unwrap(), s);
        }
        assert!("team:1".parse::<TrainingScope>().is_err());
    }

    #[test]
    fn too_few_examples() {
        let e = TrainingExample {
            features: vec![0.0],
            label: true,
            match_id: 1,
            team_id: 1,
            competition_id: 1,
            role: None,
        };
        let r = train_weights(&vec![e; 5], "h", TrainingScope::All, &TrainConfig::default());
        assert!(matches!(r, Err(Error::Contract(_))));
    }
}
