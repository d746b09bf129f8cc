use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::event::{CompetitionId, Event, MatchId, PlayerId, TeamId};
use super::wire::{self, WireCompetition, WireMatch, WirePlayer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Home,
    Away,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamResult {
    pub team_id: TeamId,
    pub side: Side,
    pub score: u32,
}

/// One match: metadata, regulation score, goals per player and the
/// chronologically ordered event list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub match_id: MatchId,
    pub competition_id: CompetitionId,
    pub season_id: u64,
    pub date_utc: Option<String>,
    /// Home team first.
    pub teams: [TeamResult; 2],
    pub goals: BTreeMap<PlayerId, u32>,
    pub events: Vec<Event>,
}

impl MatchRecord {
    /// 1 for a victory, 0 for a draw or a defeat.
    pub fn outcome(&self, team: TeamId) -> Option<u8> {
        let (own, other) = match (self.teams[0].team_id == team, self.teams[1].team_id == team) {
            (true, _) => (&self.teams[0], &self.teams[1]),
            (_, true) => (&self.teams[1], &self.teams[0]),
            _ => return None,
        };
        Some(u8::from(own.score > other.score))
    }

    pub fn team_ids(&self) -> [TeamId; 2] {
        [self.teams[0].team_id, self.teams[1].team_id]
    }

    pub fn is_draw(&self) -> bool {
        self.teams[0].score == self.teams[1].score
    }

    /// Chronological key across matches.
    pub fn chrono_key(&self) -> (Option<&str>, MatchId) {
        (self.date_utc.as_deref(), self.match_id)
    }

    /// Players with at least one event, with the team they played for.
    pub fn participants(&self) -> BTreeMap<PlayerId, TeamId> {
        self.events.iter().map(|e| (e.player_id, e.team_id)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerRecord {
    pub player_id: PlayerId,
    pub name: String,
    pub is_goalkeeper: bool,
    pub club_id: Option<TeamId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitionRecord {
    pub competition_id: CompetitionId,
    pub name: String,
    pub area: String,
    /// national, continental or international
    pub kind: String,
}

/// Records dropped during ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub missing_position: usize,
    pub unsupported_type: usize,
    pub goalkeeper_events: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub keep_goalkeepers: bool,
    pub strict: bool,
}

/// Raw file contents for one corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusText {
    pub events: String,
    pub matches: String,
    pub players: String,
    pub competitions: Option<String>,
}

impl CorpusText {
    pub fn read(
        events: &Path,
        matches: &Path,
        players: &Path,
        competitions: Option<&Path>,
    ) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Ok(CorpusText {
            events: read(events)?,
            matches: read(matches)?,
            players: read(players)?,
            competitions: competitions.map(read).transpose()?,
        })
    }
}

/// Immutable, fully indexed corpus snapshot.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EventStore {
    matches: BTreeMap<MatchId, MatchRecord>,
    players: BTreeMap<PlayerId, PlayerRecord>,
    competitions: BTreeMap<CompetitionId, CompetitionRecord>,
    report: IngestReport,
    #[serde(skip)]
    index: BTreeMap<(PlayerId, MatchId), Vec<usize>>,
}

impl PartialEq for EventStore {
    fn eq(&self, other: &Self) -> bool {
        self.matches == other.matches
            && self.players == other.players
            && self.competitions == other.competitions
    }
}

/// Parses and validates a corpus into an [`EventStore`].
pub fn load_corpus(text: &CorpusText, opts: LoadOptions) -> Result<EventStore> {
    let mut report = IngestReport::default();

    let players: BTreeMap<PlayerId, PlayerRecord> = wire::parse_list::<WirePlayer>(&text.players)?
        .into_iter()
        .map(|p| (p.player_id, p.into_record()))
        .collect();

    let competitions: BTreeMap<CompetitionId, CompetitionRecord> = match &text.competitions {
        Some(t) => wire::parse_list::<WireCompetition>(t)?
            .into_iter()
            .map(|c| (c.competition_id, c.into_record()))
            .collect(),
        None => BTreeMap::new(),
    };

    let mut matches = BTreeMap::new();
    for m in wire::parse_list::<WireMatch>(&text.matches)? {
        let record = match_from_wire(m)?;
        if matches.insert(record.match_id, record).is_some() {
            return Err(Error::Validation("duplicate matchId in matches file".into()));
        }
    }

    let mut events = Vec::new();
    for (offset, rec) in wire::split_records(&text.events)? {
        match wire::parse_event_at(offset, rec) {
            Ok(ev) => events.push(ev),
            Err(Error::Schema { field: "positions" }) if !opts.strict => report.missing_position += 1,
            Err(Error::UnsupportedEventType(name)) => {
                log::debug!("skipping unsupported event type {name}");
                report.unsupported_type += 1;
            }
            Err(e) => return Err(e),
        }
    }
    if report.missing_position > 0 {
        log::warn!("dropped {} events without a position", report.missing_position);
    }

    let mut dangling_players = BTreeSet::new();
    let mut dangling_matches = BTreeSet::new();
    for ev in &events {
        if !players.contains_key(&ev.player_id) {
            dangling_players.insert(ev.player_id);
        }
        match matches.get(&ev.match_id) {
            None => {
                dangling_matches.insert(ev.match_id);
            }
            Some(m) if !m.team_ids().contains(&ev.team_id) => {
                return Err(Error::Validation(format!(
                    "event {} has team {} which did not play match {}",
                    ev.event_id, ev.team_id, ev.match_id
                )))
            }
            Some(_) => {}
        }
    }
    if !dangling_players.is_empty() || !dangling_matches.is_empty() {
        return Err(Error::DanglingReference {
            players: dangling_players.into_iter().collect(),
            matches: dangling_matches.into_iter().collect(),
        });
    }

    for ev in events {
        let m = matches.get_mut(&ev.match_id).expect("checked above");
        if ev.is_goal() {
            *m.goals.entry(ev.player_id).or_insert(0) += 1;
        }
        if !opts.keep_goalkeepers && players[&ev.player_id].is_goalkeeper {
            report.goalkeeper_events += 1;
            continue;
        }
        m.events.push(ev);
    }

    let mut store = EventStore { matches, players, competitions, report, index: BTreeMap::new() };
    store.finalize();
    Ok(store)
}

fn match_from_wire(m: WireMatch) -> Result<MatchRecord> {
    if m.teams_data.len() != 2 {
        return Err(Error::Validation(format!(
            "match {} has {} teams, expected 2",
            m.match_id,
            m.teams_data.len()
        )));
    }
    let mut teams = Vec::with_capacity(2);
    for (key, data) in &m.teams_data {
        let team_id = match data.team_id {
            Some(id) => id,
            None => key
                .parse()
                .map_err(|_| Error::Validation(format!("team key `{key}` is not an id")))?,
        };
        let side = match data.side.to_ascii_lowercase().as_str() {
            "home" => Side::Home,
            "away" => Side::Away,
            other => return Err(Error::Validation(format!("unknown side `{other}`"))),
        };
        teams.push(TeamResult { team_id, side, score: data.score });
    }
    teams.sort_by_key(|t| (t.side != Side::Home, t.team_id));
    if teams[0].side == teams[1].side {
        return Err(Error::Validation(format!("match {} has two {:?} teams", m.match_id, teams[0].side)));
    }
    let [home, away]: [TeamResult; 2] = teams.try_into().expect("two teams");
    Ok(MatchRecord {
        match_id: m.match_id,
        competition_id: m.competition_id,
        season_id: m.season_id,
        date_utc: m.date_utc,
        teams: [home, away],
        goals: BTreeMap::new(),
        events: Vec::new(),
    })
}

impl EventStore {
    /// Sorts every match's events chronologically and rebuilds the
    /// (player, match) index.
    fn finalize(&mut self) {
        self.index.clear();
        for m in self.matches.values_mut() {
            m.events.sort_by(|a, b| a.chrono_cmp(b));
            for (i, ev) in m.events.iter().enumerate() {
                self.index.entry((ev.player_id, m.match_id)).or_default().push(i);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.event_count() == 0
    }

    pub fn event_count(&self) -> usize {
        self.matches.values().map(|m| m.events.len()).sum()
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn matches(&self) -> impl Iterator<Item = &MatchRecord> {
        self.matches.values()
    }

    /// Matches in chronological order (date, then id).
    pub fn matches_chronological(&self) -> Vec<&MatchRecord> {
        let mut v: Vec<&MatchRecord> = self.matches.values().collect();
        v.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
        v
    }

    pub fn get_match(&self, id: MatchId) -> Option<&MatchRecord> {
        self.matches.get(&id)
    }

    pub fn players(&self) -> impl Iterator<Item = &PlayerRecord> {
        self.players.values()
    }

    pub fn player(&self, id: PlayerId) -> Option<&PlayerRecord> {
        self.players.get(&id)
    }

    pub fn competitions(&self) -> impl Iterator<Item = &CompetitionRecord> {
        self.competitions.values()
    }

    /// Events of one player in one match, in match order.
    pub fn player_match_events(&self, player: PlayerId, match_id: MatchId) -> Vec<&Event> {
        match (self.index.get(&(player, match_id)), self.matches.get(&match_id)) {
            (Some(idx), Some(m)) => idx.iter().map(|&i| &m.events[i]).collect(),
            _ => Vec::new(),
        }
    }

    /// All (player, match) pairs with at least one event.
    pub fn player_matches(&self) -> impl Iterator<Item = (PlayerId, MatchId)> + '_ {
        self.index.keys().copied()
    }

    pub fn goals(&self, player: PlayerId, match_id: MatchId) -> u32 {
        self.matches
            .get(&match_id)
            .and_then(|m| m.goals.get(&player).copied())
            .unwrap_or(0)
    }

    /// Writes the store as JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(PathBuf::from(path), e))?;
        let mut store: EventStore = serde_json::from_str(&text)?;
        store.finalize();
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn players_json(gk: PlayerId) -> String {
        format!(
            r#"[{{"playerId": 1, "shortName": "A", "role": {{"name": "Forward", "code2": "FW"}}}},
               {{"playerId": 2, "shortName": "B", "role": "Defender"}},
               {{"playerId": {gk}, "shortName": "K", "role": {{"name": "Goalkeeper", "code2": "GK"}}}}]"#
        )
    }

    fn matches_json() -> String {
        r#"[{"matchId": 10, "competitionId": 1, "seasonId": 1, "dateutc": "2020-01-01 12:00:00",
             "teamsData": {"100": {"side": "home", "score": 1}, "200": {"side": "away", "score": 0}}},
            {"matchId": 11, "competitionId": 1, "seasonId": 1, "dateutc": "2020-01-08 12:00:00",
             "teamsData": {"100": {"side": "away", "score": 2}, "200": {"side": "home", "score": 2}}}]"#
            .to_string()
    }

    fn event_line(id: u64, player: u64, team: u64, match_id: u64, sec: f64, tags: &str) -> String {
        format!(
            r#"{{"id": {id}, "eventName": "Pass", "subEventName": "Simple pass", "subEventId": 85, "eventSec": {sec}, "playerId": {player}, "matchId": {match_id}, "teamId": {team}, "positions": [{{"x": 40, "y": 50}}], "tags": [{tags}]}}"#
        )
    }

    fn corpus(events: Vec<String>) -> CorpusText {
        CorpusText {
            events: events.join("\n"),
            matches: matches_json(),
            players: players_json(3),
            competitions: None,
        }
    }

    fn twenty_events() -> Vec<String> {
        let mut lines = Vec::new();
        for m in [10u64, 11] {
            for i in 0..10u64 {
                let player = if i % 2 == 0 { 1 } else { 2 };
                let team = if player == 1 { 100 } else { 200 };
                lines.push(event_line(m * 100 + i, player, team, m, i as f64, r#"{"id": 1801}"#));
            }
        }
        lines
    }

    #[test]
    fn empty_corpus_gives_empty_store() {
        let text = CorpusText {
            events: String::new(),
            matches: String::new(),
            players: String::new(),
            competitions: None,
        };
        let store = load_corpus(&text, LoadOptions::default()).unwrap();
        assert!(store.is_empty());
        assert_eq!(store.matches().count(), 0);
    }

    #[test]
    fn two_matches_of_ten_events() {
        let store = load_corpus(&corpus(twenty_events()), LoadOptions::default()).unwrap();
        assert_eq!(store.event_count(), 20);
        for m in store.matches() {
            assert_eq!(m.events.len(), 10);
            assert_eq!(store.player_match_events(1, m.match_id).len(), 5);
        }
    }

    #[test]
    fn goalkeeper_events_are_excluded_by_default() {
        let mut lines = twenty_events();
        for i in 0..5u64 {
            lines.push(event_line(9000 + i, 3, 100, 10, 20.0 + i as f64, ""));
        }
        let dropped = load_corpus(&corpus(lines.clone()), LoadOptions::default()).unwrap();
        assert_eq!(dropped.player_match_events(3, 10).len(), 0);
        assert_eq!(dropped.report().goalkeeper_events, 5);
        assert_eq!(dropped.event_count(), 20);

        let kept = load_corpus(
            &corpus(lines),
            LoadOptions { keep_goalkeepers: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(kept.player_match_events(3, 10).len(), 5);
    }

    #[test]
    fn dangling_references_are_listed() {
        let mut lines = twenty_events();
        lines.push(event_line(1, 77, 100, 10, 0.0, ""));
        lines.push(event_line(2, 1, 100, 99, 0.0, ""));
        match load_corpus(&corpus(lines), LoadOptions::default()) {
            Err(Error::DanglingReference { players, matches }) => {
                assert_eq!(players, vec![77]);
                assert_eq!(matches, vec![99]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_positions_lenient_vs_strict() {
        let mut lines = twenty_events();
        lines.push(event_line(5, 1, 100, 10, 3.0, "").replace(r#"[{"x": 40, "y": 50}]"#, "[]"));
        let lenient = load_corpus(&corpus(lines.clone()), LoadOptions::default()).unwrap();
        assert_eq!(lenient.report().missing_position, 1);
        assert_eq!(lenient.event_count(), 20);
        let strict = load_corpus(&corpus(lines), LoadOptions { strict: true, ..Default::default() });
        assert!(matches!(strict, Err(Error::Schema { field: "positions" })));
    }

    #[test]
    fn outcomes_and_goals() {
        let mut lines = twenty_events();
        lines.push(event_line(77, 1, 100, 10, 30.0, r#"{"id": 101}, {"id": 1801}"#));
        let store = load_corpus(&corpus(lines), LoadOptions::default()).unwrap();
        let m10 = store.get_match(10).unwrap();
        assert_eq!(m10.outcome(100), Some(1));
        assert_eq!(m10.outcome(200), Some(0));
        let m11 = store.get_match(11).unwrap();
        assert!(m11.is_draw());
        assert_eq!(m11.outcome(100), Some(0));
        assert_eq!(m11.outcome(200), Some(0));
        assert_eq!(store.goals(1, 10), 1);
        assert_eq!(store.goals(2, 10), 0);
    }

    #[test]
    fn event_order_is_chronological_with_id_tiebreak() {
        let lines = vec![
            event_line(3, 1, 100, 10, 5.0, ""),
            event_line(2, 1, 100, 10, 5.0, ""),
            event_line(1, 2, 200, 10, 9.0, ""),
        ];
        let store = load_corpus(&corpus(lines), LoadOptions::default()).unwrap();
        let ids: Vec<u64> = store.get_match(10).unwrap().events.iter().map(|e| e.event_id).collect();
        assert_eq!(ids, vec![2, 3, 1]);
    }

    #[test]
    fn save_and_load_round_trip() {
        let store = load_corpus(&corpus(twenty_events()), LoadOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        store.save(&path).unwrap();
        let back = EventStore::load(&path).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.player_match_events(2, 11).len(), 5);
    }
}
