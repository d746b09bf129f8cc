//! Synthetic Wyscout-format corpus with a planted outcome model.
//!
//! Every team-level feature count is Poisson. A team's latent strength is the
//! planted linear score of its standardized feature counts plus Gaussian
//! noise; it wins when that strength is positive and beats the opponent's,
//! otherwise the match is drawn. Players carry a quality factor that scales
//! their positive-weight feature rates up and negative-weight rates down, and
//! a home role whose pitch location drives their event positions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde_json::json;

use crate::error::{Error, Result};
use crate::features::{build_feature_catalog, FeatureCatalog};
use crate::ingest::{
    event_to_json, CorpusText, Event, EventType, Period, PlayerId, Position, Subtype, Tag, TeamId, WireMatch,
    WireTeamData,
};
use crate::roles::Point;

/// Planted role locations, roughly a 4-4-2 seen from a team attacking left to right.
pub const ROLE_CENTERS: [Point; 8] = [
    [22.0, 50.0],
    [32.0, 14.0],
    [32.0, 86.0],
    [45.0, 50.0],
    [62.0, 24.0],
    [62.0, 76.0],
    [70.0, 50.0],
    [86.0, 50.0],
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub matches: usize,
    pub competitions: usize,
    pub teams_per_competition: usize,
    /// Outfield players per squad; ten of them play each match.
    pub squad_size: usize,
    /// Expected team count per feature per match.
    pub team_rate: f64,
    /// Standard deviation of log player quality.
    pub quality_sd: f64,
    pub outcome_noise: f64,
    /// Spread of event positions around the role location.
    pub position_sd: f64,
    /// Fraction of players who alternate between two roles.
    pub versatile_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            matches: 200,
            competitions: 2,
            teams_per_competition: 10,
            squad_size: 13,
            team_rate: 8.0,
            quality_sd: 0.15,
            outcome_noise: 0.3,
            position_sd: 12.0,
            versatile_fraction: 0.15,
            seed: 7,
        }
    }
}

/// The generating parameters, for checking what a learner recovers.
#[derive(Debug, Clone)]
pub struct SynthTruth {
    pub weights: Vec<f64>,
    pub quality: BTreeMap<PlayerId, f64>,
    pub home_role: BTreeMap<PlayerId, usize>,
    pub second_role: BTreeMap<PlayerId, usize>,
    pub goalkeepers: Vec<PlayerId>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub text: CorpusText,
    pub truth: SynthTruth,
}

struct Squad {
    team_id: TeamId,
    goalkeeper: PlayerId,
    outfield: Vec<PlayerId>,
}

fn match_date(i: usize) -> String {
    let day = i / 4;
    let (year, rest) = (2018 + day / 336, day % 336);
    format!("{year}-{:02}-{:02} {:02}:00:00", 1 + rest / 28, 1 + rest % 28, 12 + 2 * (i % 4))
}

fn check(cfg: &SynthConfig) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    if cfg.matches == 0 || cfg.competitions == 0 {
        return bad("need at least one match and one competition");
    }
    if cfg.teams_per_competition < 2 || cfg.squad_size < 10 {
        return bad("need two teams per competition and ten outfield players per squad");
    }
    if !(cfg.team_rate > 0.0 && cfg.outcome_noise >= 0.0 && cfg.quality_sd >= 0.0 && cfg.position_sd >= 0.0) {
        return bad("rates and spreads must be non-negative");
    }
    if !(0.0..=1.0).contains(&cfg.versatile_fraction) {
        return bad("versatile_fraction outside [0, 1]");
    }
    Ok(())
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    check(cfg)?;
    let catalog = build_feature_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = catalog.len();

    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();

    let mut truth = SynthTruth {
        weights: weights.clone(),
        quality: BTreeMap::new(),
        home_role: BTreeMap::new(),
        second_role: BTreeMap::new(),
        goalkeepers: Vec::new(),
    };
    let quality_dist = Normal::new(0.0, cfg.quality_sd).expect("finite sd");
    let mut players_json = Vec::new();
    let mut squads_by_comp: Vec<Vec<Squad>> = Vec::new();
    let mut next_player: PlayerId = 1000;
    for c in 0..cfg.competitions {
        let mut squads = Vec::new();
        for t in 0..cfg.teams_per_competition {
            let team_id = 100 + (c * cfg.teams_per_competition + t) as TeamId;
            let goalkeeper = next_player;
            next_player += 1;
            truth.goalkeepers.push(goalkeeper);
            players_json.push(json!({
                "playerId": goalkeeper,
                "shortName": format!("Keeper {goalkeeper}"),
                "role": {"name": "Goalkeeper", "code2": "GK"},
                "currentTeamId": team_id,
            }));
            let mut outfield = Vec::new();
            for j in 0..cfg.squad_size {
                let p = next_player;
                next_player += 1;
                let home = j % ROLE_CENTERS.len();
                truth.home_role.insert(p, home);
                if rng.random::<f64>() < cfg.versatile_fraction {
                    let other = (home + rng.random_range(1..ROLE_CENTERS.len())) % ROLE_CENTERS.len();
                    truth.second_role.insert(p, other);
                }
                truth.quality.insert(p, quality_dist.sample(&mut rng).exp());
                let label = if ROLE_CENTERS[home][0] > 65.0 {
                    "Forward"
                } else if ROLE_CENTERS[home][0] > 40.0 {
                    "Midfielder"
                } else {
                    "Defender"
                };
                players_json.push(json!({
                    "playerId": p,
                    "shortName": format!("Player {p}"),
                    "role": {"name": label},
                    "currentTeamId": team_id,
                }));
                outfield.push(p);
            }
            squads.push(Squad { team_id, goalkeeper, outfield });
        }
        squads_by_comp.push(squads);
    }

    let competitions_json: Vec<_> = (0..cfg.competitions)
        .map(|c| json!({"competitionId": c + 1, "name": format!("Synthetic League {}", c + 1), "area": "Nowhere", "type": "league"}))
        .collect();

    let mut gen = EventGen { catalog: &catalog, next_event: 1, position_sd: cfg.position_sd };
    let mut events_json = Vec::new();
    let mut matches_json = Vec::new();
    let noise = Normal::new(0.0, cfg.outcome_noise.max(1e-300)).expect("finite sd");
    let per_player = cfg.team_rate / 10.0;
    for i in 0..cfg.matches {
        let comp = i % cfg.competitions;
        let squads = &squads_by_comp[comp];
        let a = rng.random_range(0..squads.len());
        let b = (a + rng.random_range(1..squads.len())) % squads.len();
        let match_id = 5000 + i as u64;
        let mut sides = Vec::new();
        for squad in [&squads[a], &squads[b]] {
            let mut lineup = squad.outfield.clone();
            lineup.shuffle(&mut rng);
            lineup.truncate(10);
            lineup.sort_unstable();
            let mut counts = vec![0u64; n];
            let mut evs = Vec::new();
            for &p in &lineup {
                let q = truth.quality[&p];
                let role = match truth.second_role.get(&p) {
                    Some(&r2) if rng.random::<bool>() => r2,
                    _ => truth.home_role[&p],
                };
                for (f, w) in weights.iter().enumerate() {
                    let rate = per_player * if *w >= 0.0 { q } else { 1.0 / q };
                    let k = Poisson::new(rate).expect("positive rate").sample(&mut rng) as u64;
                    counts[f] += k;
                    for _ in 0..k {
                        evs.push(gen.event(f, p, squad.team_id, match_id, ROLE_CENTERS[role], &mut rng)?);
                    }
                }
            }
            for _ in 0..rng.random_range(8..20) {
                evs.push(gen.keeper_event(squad.goalkeeper, squad.team_id, match_id, &mut rng)?);
            }
            let standardized: f64 = counts
                .iter()
                .zip(&weights)
                .map(|(&c, w)| w * (c as f64 - cfg.team_rate) / cfg.team_rate.sqrt())
                .sum::<f64>()
                / norm;
            let latent = standardized + if cfg.outcome_noise > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            sides.push((squad, lineup, evs, latent));
        }
        let (ua, ub) = (sides[0].3, sides[1].3);
        let winner = if ua > 0.0 && ua > ub {
            Some(0)
        } else if ub > 0.0 && ub > ua {
            Some(1)
        } else {
            None
        };
        let mut scores = [0u32; 2];
        match winner {
            None => {
                let s = rng.random_range(0..3);
                scores = [s, s];
            }
            Some(w) => {
                let lose = rng.random_range(0..3);
                scores[w] = lose + rng.random_range(1..4);
                scores[1 - w] = lose;
            }
        }
        let mut teams_data = BTreeMap::new();
        for (s, (squad, lineup, evs, _)) in sides.iter_mut().enumerate() {
            for _ in 0..scores[s] {
                let scorer = pick_scorer(lineup, &truth, &mut rng);
                gen.mark_goal(evs, scorer, squad.team_id, match_id, &mut rng)?;
            }
            evs.sort_by(|a, b| a.chrono_cmp(b));
            events_json.extend(evs.iter().map(event_to_json));
            teams_data.insert(
                squad.team_id.to_string(),
                WireTeamData {
                    team_id: Some(squad.team_id),
                    side: if s == 0 { "home" } else { "away" }.to_string(),
                    score: scores[s],
                },
            );
        }
        let wire = WireMatch {
            match_id,
            competition_id: comp as u64 + 1,
            season_id: 2018,
            date_utc: Some(match_date(i)),
            teams_data,
        };
        matches_json.push(serde_json::to_string(&wire)?);
    }

    let array = |items: Vec<String>| format!("[\n{}\n]\n", items.join(",\n"));
    let text = CorpusText {
        events: array(events_json),
        matches: array(matches_json),
        players: array(players_json.iter().map(|v| v.to_string()).collect()),
        competitions: Some(array(competitions_json.iter().map(|v| v.to_string()).collect())),
    };
    Ok(SynthCorpus { text, truth })
}

fn pick_scorer(lineup: &[PlayerId], truth: &SynthTruth, rng: &mut ChaCha8Rng) -> PlayerId {
    let weight = |p: &PlayerId| ROLE_CENTERS[truth.home_role[p]][0] / 25.0 * truth.quality[p];
    let total: f64 = lineup.iter().map(weight).sum();
    let mut x = rng.random::<f64>() * total;
    for p in lineup {
        x -= weight(p);
        if x <= 0.0 {
            return *p;
        }
    }
    *lineup.last().expect("non-empty lineup")
}

struct EventGen<'a> {
    catalog: &'a FeatureCatalog,
    next_event: u64,
    position_sd: f64,
}

impl EventGen<'_> {
    fn position(&self, center: Point, rng: &mut ChaCha8Rng) -> Result<Position> {
        let jitter = Normal::new(0.0, self.position_sd.max(1e-300)).expect("finite sd");
        let mut coord = |c: f64| {
            let v = if self.position_sd > 0.0 { c + jitter.sample(rng) } else { c };
            v.round().clamp(0.0, 100.0)
        };
        let (x, y) = (coord(center[0]), coord(center[1]));
        Position::new(x, y)
    }

    #[allow(clippy::too_many_arguments)]
    fn base(
        &mut self,
        event_type: EventType,
        subtype: Subtype,
        tags: &[Tag],
        player_id: PlayerId,
        team_id: TeamId,
        match_id: u64,
        position: Position,
        rng: &mut ChaCha8Rng,
    ) -> Event {
        let id = self.next_event;
        self.next_event += 1;
        let period = if rng.random::<bool>() { Period::FirstHalf } else { Period::SecondHalf };
        Event {
            event_id: id,
            event_type,
            subtype: Some(subtype),
            sub_event_id: None,
            tags: tags.iter().copied().collect(),
            player_id,
            team_id,
            match_id,
            period,
            event_sec: (rng.random::<f64>() * 2_700_000.0).round() / 1000.0,
            position,
            end_position: None,
        }
    }

    fn event(
        &mut self,
        feature: usize,
        player: PlayerId,
        team: TeamId,
        match_id: u64,
        center: Point,
        rng: &mut ChaCha8Rng,
    ) -> Result<Event> {
        let d = self.catalog.descriptors()[feature];
        let subtype = d.subtype.expect("standard descriptors have a subtype");
        let tags: Vec<Tag> = d.tag.into_iter().collect();
        let pos = self.position(center, rng)?;
        Ok(self.base(d.event_type, subtype, &tags, player, team, match_id, pos, rng))
    }

    fn keeper_event(&mut self, player: PlayerId, team: TeamId, match_id: u64, rng: &mut ChaCha8Rng) -> Result<Event> {
        let pos = self.position([5.0, 50.0], rng)?;
        let tag = if rng.random::<f64>() < 0.7 { Tag::ACCURATE } else { Tag::NOT_ACCURATE };
        Ok(self.base(EventType::Pass, Subtype::SimplePass, &[tag], player, team, match_id, pos, rng))
    }

    /// Turns one of the scorer's accurate shots into a goal, adding a shot if
    /// they have none left.
    fn mark_goal(
        &mut self,
        events: &mut Vec<Event>,
        scorer: PlayerId,
        team: TeamId,
        match_id: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let candidate = events.iter_mut().find(|e| {
            e.player_id == scorer
                && e.event_type == EventType::Shot
                && e.has_tag(Tag::ACCURATE)
                && !e.is_goal()
        });
        match candidate {
            Some(e) => {
                e.tags.insert(Tag::GOAL);
            }
            None => {
                let pos = self.position([88.0, 50.0], rng)?;
                let ev = self.base(
                    EventType::Shot,
                    Subtype::Shot,
                    &[Tag::GOAL, Tag::ACCURATE],
                    scorer,
                    team,
                    match_id,
                    pos,
                    rng,
                );
                events.push(ev);
            }
        }
        Ok(())
    }
}

/// Writes the corpus as `events.json`, `matches.json`, `players.json` and
/// `competitions.json` under `dir`.
pub fn write_corpus(dir: &Path, text: &CorpusText) -> Result<[PathBuf; 4]> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("events.json", text.events.as_str()),
        ("matches.json", text.matches.as_str()),
        ("players.json", text.players.as_str()),
        ("competitions.json", text.competitions.as_deref().unwrap_or("[]")),
    ];
    let mut out: [PathBuf; 4] = Default::default();
    for (slot, (name, body)) in out.iter_mut().zip(files) {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        *slot = path;
    }
    Ok(out)
}
