//! Offline learning phase, batch and incremental online phases, exports.

mod config;

pub use config::PipelineConfig;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{
    aggregate_all_teams, apply_normalization, build_feature_catalog, extract_all, extract_raw_performance,
    fit_normalization, FeatureCatalog, NormalizationParams,
};
use crate::ingest::{EventStore, MatchId, MatchRecord, PlayerId};
use crate::learning::{build_training_set, train_weights, EvalReport, TrainingScope, WeightVector};
use crate::modelfile::{self, ModelDoc, FORMAT_VERSION};
use crate::rating::{
    adjusted_rating, build_role_rankings, rate_performance, rating_stats, versatility, MatchRating,
    RatingConfig, RatingSeries, RatingStats, RoleRanking, VersatilityScore,
};
use crate::retrieval::{PlayerZoneVector, ZoneTessellation};
use crate::roles::{assign_player_roles, compute_center, fit_roles, soft_assign, Point, RoleModel};

/// Everything the online phase needs from the learning phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub catalog: FeatureCatalog,
    pub player_norm: NormalizationParams,
    pub team_norm: NormalizationParams,
    pub weights: WeightVector,
    pub roles: RoleModel,
    pub delta_s: f64,
    pub config_digest: String,
}

impl ModelBundle {
    pub fn to_text(&self) -> String {
        let mut out = format!("# playerank model bundle\n[bundle]\nformat_version = {FORMAT_VERSION}\n");
        let _ = writeln!(out, "catalog_hash = {}", self.catalog.hash());
        let _ = writeln!(out, "features = {}", self.catalog.len());
        let _ = writeln!(out, "config_digest = {}\n", self.config_digest);
        modelfile::write_normalization(&mut out, "player_normalization", &self.player_norm, &self.catalog);
        modelfile::write_normalization(&mut out, "team_normalization", &self.team_norm, &self.catalog);
        modelfile::write_weights(&mut out, "weights", &self.weights, &self.catalog);
        modelfile::write_role_model(&mut out, "roles", &self.roles, self.delta_s);
        out
    }

    /// SHA-256 of the serialized bundle.
    pub fn digest(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let doc = ModelDoc::parse(text, path)?;
        let catalog = build_feature_catalog();
        let player_norm = modelfile::read_normalization(&doc, "player_normalization", &catalog)?;
        let team_norm = modelfile::read_normalization(&doc, "team_normalization", &catalog)?;
        let weights = modelfile::read_weights(&doc, "weights", &catalog)?;
        let (roles, delta_s) = modelfile::read_role_model(&doc, "roles")?;
        let config_digest = bundle_field(text, "config_digest").unwrap_or_default();
        Ok(ModelBundle { catalog, player_norm, team_norm, weights, roles, delta_s, config_digest })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

fn bundle_field(text: &str, key: &str) -> Option<String> {
    let mut in_bundle = false;
    for line in text.lines().map(str::trim) {
        if line.starts_with('[') {
            in_bundle = line == "[bundle]";
        } else if in_bundle {
            if let Some((k, v)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(v.trim().to_string());
                }
            }
        }
    }
    None
}

/// Learning-phase output: the bundle plus diagnostics that are not persisted.
#[derive(Debug, Clone)]
pub struct LearningOutcome {
    pub bundle: ModelBundle,
    pub eval: EvalReport,
    pub centers: usize,
}

/// Centers of performance of every player-match with at least `min_events` events.
pub fn collect_centers(store: &EventStore, min_events: usize) -> Result<Vec<(PlayerId, MatchId, Point)>> {
    let mut out = Vec::new();
    for (p, m) in store.player_matches() {
        let events = store.player_match_events(p, m);
        if events.len() >= min_events {
            out.push((p, m, compute_center(&events)?.point()));
        }
    }
    Ok(out)
}

/// Feature fit, weight training and role fitting.
pub fn run_learning_phase(store: &EventStore, cfg: &PipelineConfig) -> Result<LearningOutcome> {
    cfg.validate()?;
    if store.is_empty() {
        return Err(Error::EmptyCorpus.in_stage("features"));
    }
    let catalog = build_feature_catalog();
    let (vectors, player_norm) = (|| {
        let vectors = extract_all(store, &catalog)?;
        let mut norm = fit_normalization(&vectors, &catalog)?;
        if let Some(cap) = cfg.max_goals {
            norm.max_goals = cap;
        }
        norm.max_goals = norm.max_goals.max(1);
        Ok((vectors, norm))
    })()
    .map_err(|e: Error| e.in_stage("features"))?;
    log::info!("extracted {} performance vectors", vectors.len());

    let (weights, eval, team_norm) = (|| {
        let teams = aggregate_all_teams(store, &vectors)?;
        let (examples, team_norm) = build_training_set(store, &teams, &catalog)?;
        let (w, eval) = train_weights(&examples, catalog.hash(), TrainingScope::All, &cfg.train_config())?;
        Ok((w, eval, team_norm))
    })()
    .map_err(|e: Error| e.in_stage("training"))?;
    log::info!("trained weights: cost {} holdout AUC {:.3}", weights.cost, eval.auc);

    let (roles, centers) = (|| {
        let centers: Vec<Point> = collect_centers(store, cfg.min_events)?.into_iter().map(|c| c.2).collect();
        Ok((fit_roles(&centers, &cfg.role_config())?, centers.len()))
    })()
    .map_err(|e: Error| e.in_stage("roles"))?;
    log::info!("fitted {} roles on {} centers (silhouette {:.3})", roles.k, centers, roles.silhouette);

    let bundle = ModelBundle {
        catalog,
        player_norm,
        team_norm,
        weights,
        roles,
        delta_s: cfg.delta_s,
        config_digest: cfg.learning_digest(),
    };
    Ok(LearningOutcome { bundle, eval, centers })
}

/// Online-phase settings taken from the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineSettings {
    pub alpha: f64,
    pub beta: f64,
    pub delta_s: f64,
    pub x_pct: f64,
    pub min_matches: usize,
    pub min_events: usize,
    pub grid: ZoneTessellation,
}

impl OnlineSettings {
    pub fn from_config(cfg: &PipelineConfig, bundle: &ModelBundle) -> Self {
        OnlineSettings {
            alpha: cfg.alpha,
            beta: cfg.beta,
            delta_s: bundle.delta_s,
            x_pct: cfg.x_pct,
            min_matches: cfg.min_matches,
            min_events: cfg.min_events,
            grid: cfg.grid(),
        }
    }
}

/// Ratings, roles, rankings and search index after some set of matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub settings: OnlineSettings,
    pub k: usize,
    pub processed: BTreeSet<MatchId>,
    pub last_match: Option<(Option<String>, MatchId)>,
    pub series: BTreeMap<PlayerId, RatingSeries>,
    pub player_roles: BTreeMap<PlayerId, BTreeSet<usize>>,
    pub rankings: Vec<RoleRanking>,
    pub zones: BTreeMap<PlayerId, PlayerZoneVector>,
    pub versatility: BTreeMap<PlayerId, VersatilityScore>,
    pub names: BTreeMap<PlayerId, String>,
}

impl Snapshot {
    pub fn empty(settings: OnlineSettings, bundle: &ModelBundle) -> Self {
        let k = bundle.roles.k;
        Snapshot {
            rankings: (0..k)
                .map(|role| RoleRanking {
                    role,
                    entries: Vec::new(),
                    x_pct: settings.x_pct,
                    min_matches: settings.min_matches,
                })
                .collect(),
            settings,
            k,
            processed: BTreeSet::new(),
            last_match: None,
            series: BTreeMap::new(),
            player_roles: BTreeMap::new(),
            zones: BTreeMap::new(),
            versatility: BTreeMap::new(),
            names: BTreeMap::new(),
        }
    }

    pub fn ratings(&self) -> impl Iterator<Item = &MatchRating> {
        self.series.values().flat_map(|s| s.entries.iter().map(|e| &e.rating))
    }

    pub fn stats(&self) -> Result<RatingStats> {
        let all: Vec<MatchRating> = self.ratings().cloned().collect();
        rating_stats(&all)
    }

    /// r̄ of players eligible for rankings and search.
    pub fn eligible_ratings(&self) -> BTreeMap<PlayerId, f64> {
        self.series
            .iter()
            .filter(|(_, s)| s.matches() >= self.settings.min_matches)
            .filter_map(|(p, s)| s.r_bar().map(|r| (*p, r)))
            .collect()
    }

    pub fn ranking(&self, role: usize) -> Option<&RoleRanking> {
        self.rankings.get(role)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Per-player result of rating one match.
struct PlayerMatch {
    rating: MatchRating,
    zone_counts: Vec<u64>,
}

fn rate_match(
    store: &EventStore,
    bundle: &ModelBundle,
    settings: &OnlineSettings,
    rcfg: &RatingConfig,
    m: &MatchRecord,
) -> Result<Vec<PlayerMatch>> {
    let mut players: BTreeSet<PlayerId> = m.events.iter().map(|e| e.player_id).collect();
    players.retain(|p| store.player(*p).is_some());
    let mut out = Vec::with_capacity(players.len());
    for p in players {
        let events = store.player_match_events(p, m.match_id);
        let raw = extract_raw_performance(&events, &bundle.catalog)?;
        let v = apply_normalization(&raw, &bundle.player_norm)?;
        let r = rate_performance(&v, &bundle.weights, rcfg)?;
        let goals = store.goals(p, m.match_id).min(bundle.player_norm.max_goals);
        let (r_star, norm_goals) = adjusted_rating(r, goals, bundle.player_norm.max_goals, settings.alpha)?;
        let role = if events.len() >= settings.min_events {
            Some(soft_assign(compute_center(&events)?.point(), &bundle.roles, settings.delta_s)?)
        } else {
            None
        };
        let mut zone_counts = vec![0u64; settings.grid.zones()];
        for e in &events {
            zone_counts[settings.grid.zone_of(e.position)] += 1;
        }
        out.push(PlayerMatch {
            rating: MatchRating { player_id: p, match_id: m.match_id, r, r_star, norm_goals, role },
            zone_counts,
        });
    }
    Ok(out)
}

fn check_bundle(bundle: &ModelBundle) -> Result<RatingConfig> {
    for (what, hash) in [
        ("player normalization", &bundle.player_norm.catalog_hash),
        ("team normalization", &bundle.team_norm.catalog_hash),
        ("weights", &bundle.weights.catalog_hash),
    ] {
        if hash != bundle.catalog.hash() {
            return Err(Error::CatalogMismatch {
                expected: bundle.catalog.hash().to_string(),
                found: format!("{hash} ({what})"),
            });
        }
    }
    RatingConfig::from_weights(&bundle.weights.weights, 0.0, 0.0, 0)
}

fn rating_config(bundle: &ModelBundle, s: &OnlineSettings) -> Result<RatingConfig> {
    let base = check_bundle(bundle)?;
    Ok(RatingConfig { alpha: s.alpha, beta: s.beta, min_matches: s.min_matches, ..base })
}

/// Rates every match of the store in one pass.
pub fn build_snapshot(store: &EventStore, bundle: &ModelBundle, settings: OnlineSettings) -> Result<Snapshot> {
    let rcfg = rating_config(bundle, &settings)?;
    let mut snap = Snapshot::empty(settings, bundle);
    let s = &snap.settings;

    let mut ratings: BTreeMap<PlayerId, Vec<MatchRating>> = BTreeMap::new();
    let mut counts: BTreeMap<PlayerId, Vec<u64>> = BTreeMap::new();
    let chrono = store.matches_chronological();
    for m in &chrono {
        for pm in rate_match(store, bundle, s, &rcfg, m)? {
            let acc = counts.entry(pm.rating.player_id).or_insert_with(|| vec![0; s.grid.zones()]);
            for (a, c) in acc.iter_mut().zip(&pm.zone_counts) {
                *a += c;
            }
            ratings.entry(pm.rating.player_id).or_default().push(pm.rating);
        }
    }

    for (p, rs) in ratings {
        let mut series = RatingSeries::new(p);
        for r in rs {
            series.ewma_update(r, s.beta)?;
        }
        snap.series.insert(p, series);
    }
    for (p, c) in counts {
        if c.iter().any(|&x| x > 0) {
            snap.zones.insert(p, PlayerZoneVector::from_counts(p, s.grid, c)?);
        }
    }
    for (p, series) in &snap.series {
        let roles = assign_player_roles(series.role_history(), s.x_pct);
        if !roles.is_empty() {
            snap.player_roles.insert(*p, roles);
        }
        if series.role_history().next().is_some() {
            snap.versatility.insert(*p, versatility(*p, series.role_history(), snap.k)?);
        }
        if let Some(rec) = store.player(*p) {
            snap.names.insert(*p, rec.name.clone());
        }
    }
    snap.rankings = build_role_rankings(&snap.series, &snap.player_roles, snap.k, s.x_pct, s.min_matches);
    snap.processed = chrono.iter().map(|m| m.match_id).collect();
    snap.last_match = chrono.last().map(|m| (m.date_utc.clone(), m.match_id));
    Ok(snap)
}

/// What an online update touched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateSummary {
    pub match_id: MatchId,
    pub players: BTreeSet<PlayerId>,
    pub roles_rebuilt: BTreeSet<usize>,
}

/// Folds one new match into the snapshot. Only the match's participants and
/// the rankings of the roles they held or now hold are recomputed. Matches
/// must arrive in chronological order.
pub fn run_online_update(
    store: &EventStore,
    bundle: &ModelBundle,
    snap: &mut Snapshot,
    match_id: MatchId,
) -> Result<UpdateSummary> {
    let m = store.get_match(match_id).ok_or_else(|| Error::NotFound(format!("match {match_id}")))?;
    if snap.processed.contains(&match_id) {
        return Err(Error::Duplicate(format!("match {match_id} already processed")));
    }
    let key = (m.date_utc.clone(), m.match_id);
    if let Some(last) = &snap.last_match {
        if (last.0.as_deref(), last.1) > (key.0.as_deref(), key.1) {
            return Err(Error::Contract(format!(
                "match {match_id} predates the last processed match {}",
                last.1
            )));
        }
    }
    if bundle.roles.k != snap.k {
        return Err(Error::Contract("snapshot was built with another role model".into()));
    }
    let rcfg = rating_config(bundle, &snap.settings)?;
    let updates = rate_match(store, bundle, &snap.settings, &rcfg, m)?;

    let s = snap.settings.clone();
    let mut players = BTreeSet::new();
    let mut roles_touched = BTreeSet::new();
    for pm in updates {
        let p = pm.rating.player_id;
        players.insert(p);
        let series = snap.series.entry(p).or_insert_with(|| RatingSeries::new(p));
        series.ewma_update(pm.rating, s.beta)?;

        let mut counts = snap.zones.get(&p).map_or_else(|| vec![0; s.grid.zones()], |z| z.counts.clone());
        for (a, c) in counts.iter_mut().zip(&pm.zone_counts) {
            *a += c;
        }
        if counts.iter().any(|&x| x > 0) {
            snap.zones.insert(p, PlayerZoneVector::from_counts(p, s.grid, counts)?);
        }

        let series = &snap.series[&p];
        if let Some(old) = snap.player_roles.remove(&p) {
            roles_touched.extend(old);
        }
        let roles = assign_player_roles(series.role_history(), s.x_pct);
        roles_touched.extend(roles.iter().copied());
        if !roles.is_empty() {
            snap.player_roles.insert(p, roles);
        }
        if series.role_history().next().is_some() {
            snap.versatility.insert(p, versatility(p, series.role_history(), snap.k)?);
        }
        if let Some(rec) = store.player(p) {
            snap.names.insert(p, rec.name.clone());
        }
    }

    let fresh = build_role_rankings(&snap.series, &snap.player_roles, snap.k, s.x_pct, s.min_matches);
    for ranking in fresh {
        if roles_touched.contains(&ranking.role) {
            let role = ranking.role;
            snap.rankings[role] = ranking;
        }
    }
    snap.processed.insert(match_id);
    snap.last_match = Some(key);
    Ok(UpdateSummary { match_id, players, roles_rebuilt: roles_touched })
}

/// Tab-separated ratings export: one row per player-match in chronological order.
pub fn ratings_table(snap: &Snapshot) -> String {
    let mut out = String::from("player_id\tmatch_id\tr\tr_star\trole\thybrids\tr_bar\tr_bar_star\n");
    for s in snap.series.values() {
        for e in &s.entries {
            let (role, hybrids) = match &e.rating.role {
                Some(a) => (
                    a.primary.to_string(),
                    a.hybrids.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
                ),
                None => ("-".into(), String::new()),
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{:.6}\t{:.6}",
                s.player_id, e.rating.match_id, e.rating.r, e.rating.r_star, role, hybrids, e.r_bar, e.r_bar_star
            );
        }
    }
    out
}

/// Tab-separated ranking export.
pub fn ranking_table(ranking: &RoleRanking, names: &BTreeMap<PlayerId, String>) -> String {
    let mut out = String::from("rank\tplayer_id\tname\tr_bar\n");
    for (i, e) in ranking.entries.iter().enumerate() {
        let name = names.get(&e.player_id).map(String::as_str).unwrap_or("");
        let _ = writeln!(out, "{}\t{}\t{}\t{:.6}", i + 1, e.player_id, name, e.r_bar);
    }
    out
}
