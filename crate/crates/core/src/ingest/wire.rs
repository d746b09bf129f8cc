//! Provider JSON formats for events, matches, players and competitions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use super::event::{Event, EventType, Period, Position, Subtype, Tag};
use super::store::{CompetitionRecord, PlayerRecord};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct RawEvent {
    id: Option<u64>,
    #[serde(rename = "eventName")]
    event_name: Option<String>,
    #[serde(rename = "subEventName")]
    sub_event_name: Option<String>,
    #[serde(rename = "subEventId")]
    sub_event_id: Option<Value>,
    #[serde(rename = "eventSec")]
    event_sec: Option<f64>,
    #[serde(rename = "playerId")]
    player_id: Option<u64>,
    #[serde(rename = "matchId")]
    match_id: Option<u64>,
    #[serde(rename = "teamId")]
    team_id: Option<u64>,
    positions: Option<Vec<RawPosition>>,
    tags: Option<Vec<RawTag>>,
    #[serde(rename = "matchPeriod")]
    match_period: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RawPosition {
    x: f64,
    y: f64,
}

#[derive(Debug, Deserialize)]
struct RawTag {
    id: u32,
}

/// Parses one event record in the provider's JSON schema.
///
/// A record with an empty `positions` array is reported as a schema error on
/// `positions`; lenient ingestion drops such records instead of failing.
pub fn parse_event(record: &str) -> Result<Event> {
    let raw: RawEvent = serde_json::from_str(record).map_err(|e| json_error(record, &e))?;
    event_from_raw(raw)
}

fn event_from_raw(raw: RawEvent) -> Result<Event> {
    let event_id = raw.id.ok_or(Error::Schema { field: "id" })?;
    let name = raw.event_name.ok_or(Error::Schema { field: "eventName" })?;
    let event_type = EventType::parse(&name)?;
    let subtype = match raw.sub_event_name.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(s) => Some(Subtype::parse(event_type, s)?),
    };
    let sub_event_id = match raw.sub_event_id {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.trim().is_empty() => None,
        Some(Value::String(s)) => Some(
            s.trim()
                .parse()
                .map_err(|_| Error::Validation(format!("subEventId `{s}` is not an integer")))?,
        ),
        Some(Value::Number(n)) => Some(
            n.as_u64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::Validation(format!("subEventId {n} is not a u32")))?,
        ),
        Some(other) => return Err(Error::Validation(format!("subEventId {other} has wrong type"))),
    };
    let event_sec = raw.event_sec.ok_or(Error::Schema { field: "eventSec" })?;
    if !event_sec.is_finite() || event_sec < 0.0 {
        return Err(Error::Validation(format!("eventSec {event_sec} must be finite and >= 0")));
    }
    let player_id = raw.player_id.ok_or(Error::Schema { field: "playerId" })?;
    let match_id = raw.match_id.ok_or(Error::Schema { field: "matchId" })?;
    let team_id = raw.team_id.ok_or(Error::Schema { field: "teamId" })?;
    let positions = raw.positions.ok_or(Error::Schema { field: "positions" })?;
    let mut positions = positions.into_iter();
    let position = match positions.next() {
        Some(p) => Position::new(p.x, p.y)?,
        None => return Err(Error::Schema { field: "positions" }),
    };
    let end_position = positions.next().map(|p| Position::new(p.x, p.y)).transpose()?;
    let tags: BTreeSet<Tag> = raw
        .tags
        .ok_or(Error::Schema { field: "tags" })?
        .into_iter()
        .map(|t| Tag(t.id))
        .collect();
    let period = match raw.match_period.as_deref() {
        None => Period::FirstHalf,
        Some(p) => Period::parse(p)?,
    };
    Ok(Event {
        event_id,
        event_type,
        subtype,
        sub_event_id,
        tags,
        player_id,
        team_id,
        match_id,
        period,
        event_sec,
        position,
        end_position,
    })
}

fn json_error(text: &str, err: &serde_json::Error) -> Error {
    Error::Parse { offset: byte_offset(text, err.line(), err.column()), message: err.to_string() }
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Splits an events file into raw records. Accepts a JSON array or one object
/// per line; returns each record with its byte offset in `text`.
pub(crate) fn split_records(text: &str) -> Result<Vec<(usize, &str)>> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if trimmed.starts_with('[') {
        let items: Vec<&RawValue> = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
        let base = text.as_ptr() as usize;
        Ok(items.into_iter().map(|r| (r.get().as_ptr() as usize - base, r.get())).collect())
    } else {
        let mut out = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            if !line.trim().is_empty() {
                out.push((offset, line.trim_end()));
            }
            offset += line.len();
        }
        Ok(out)
    }
}

/// Parses a record located at `offset` inside a larger file, shifting any
/// parse error offset to be file-relative.
pub(crate) fn parse_event_at(offset: usize, record: &str) -> Result<Event> {
    parse_event(record).map_err(|e| match e {
        Error::Parse { offset: inner, message } => Error::Parse { offset: offset + inner, message },
        other => other,
    })
}

#[derive(Serialize)]
struct WireEvent<'a> {
    id: u64,
    #[serde(rename = "eventName")]
    event_name: &'static str,
    #[serde(rename = "eventSec")]
    event_sec: f64,
    #[serde(rename = "playerId")]
    player_id: u64,
    #[serde(rename = "matchId")]
    match_id: u64,
    #[serde(rename = "teamId")]
    team_id: u64,
    positions: Vec<WirePosition>,
    #[serde(rename = "subEventId", serialize_with = "opt_id_or_empty")]
    sub_event_id: Option<u32>,
    #[serde(rename = "subEventName")]
    sub_event_name: &'static str,
    tags: Vec<WireTag>,
    #[serde(rename = "matchPeriod", skip_serializing_if = "Option::is_none")]
    match_period: Option<&'a str>,
}

#[derive(Serialize)]
struct WirePosition {
    #[serde(serialize_with = "coordinate")]
    x: f64,
    #[serde(serialize_with = "coordinate")]
    y: f64,
}

#[derive(Serialize)]
struct WireTag {
    id: u32,
}

fn opt_id_or_empty<S: Serializer>(v: &Option<u32>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(id) => s.serialize_u32(*id),
        None => s.serialize_str(""),
    }
}

// Integral coordinates are written as integers, as the provider does.
fn coordinate<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() <= 1e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

/// Serializes an event back to the provider's JSON schema.
pub fn event_to_json(event: &Event) -> String {
    let mut positions = vec![WirePosition { x: event.position.x, y: event.position.y }];
    if let Some(end) = event.end_position {
        positions.push(WirePosition { x: end.x, y: end.y });
    }
    let wire = WireEvent {
        id: event.event_id,
        event_name: event.event_type.wire_name(),
        event_sec: event.event_sec,
        player_id: event.player_id,
        match_id: event.match_id,
        team_id: event.team_id,
        positions,
        sub_event_id: event.sub_event_id,
        sub_event_name: event.subtype.map(Subtype::wire_name).unwrap_or(""),
        tags: event.tags.iter().map(|t| WireTag { id: t.0 }).collect(),
        match_period: (event.period != Period::FirstHalf).then(|| event.period.wire_name()),
    };
    serde_json::to_string(&wire).expect("event serialization is infallible")
}

// ---------------------------------------------------------------------------
// matches, players, competitions

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireMatch {
    #[serde(rename = "matchId", alias = "wyId")]
    pub match_id: u64,
    #[serde(rename = "competitionId")]
    pub competition_id: u64,
    #[serde(rename = "seasonId")]
    pub season_id: u64,
    #[serde(rename = "dateutc", default, skip_serializing_if = "Option::is_none")]
    pub date_utc: Option<String>,
    /// Keyed by team id.
    #[serde(rename = "teamsData")]
    pub teams_data: std::collections::BTreeMap<String, WireTeamData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireTeamData {
    #[serde(rename = "teamId", default, skip_serializing_if = "Option::is_none")]
    pub team_id: Option<u64>,
    pub side: String,
    pub score: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WirePlayer {
    #[serde(rename = "playerId", alias = "wyId")]
    pub player_id: u64,
    #[serde(rename = "shortName", default)]
    pub short_name: String,
    #[serde(default)]
    pub role: Option<Value>,
    #[serde(rename = "currentTeamId", default, skip_serializing_if = "Option::is_none")]
    pub current_team_id: Option<u64>,
}

impl WirePlayer {
    pub(crate) fn into_record(self) -> PlayerRecord {
        let is_goalkeeper = match &self.role {
            Some(Value::String(s)) => is_goalkeeper_label(s),
            Some(Value::Object(map)) => ["name", "code2", "code3"]
                .iter()
                .filter_map(|k| map.get(*k).and_then(Value::as_str))
                .any(is_goalkeeper_label),
            _ => false,
        };
        PlayerRecord {
            player_id: self.player_id,
            name: self.short_name,
            is_goalkeeper,
            club_id: self.current_team_id,
        }
    }
}

fn is_goalkeeper_label(s: &str) -> bool {
    matches!(s.trim().to_ascii_lowercase().as_str(), "goalkeeper" | "gk" | "gkp")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireCompetition {
    #[serde(rename = "competitionId", alias = "wyId")]
    pub competition_id: u64,
    pub name: String,
    #[serde(default)]
    pub area: Option<Value>,
    #[serde(rename = "type", default)]
    pub kind: Option<String>,
}

impl WireCompetition {
    pub(crate) fn into_record(self) -> CompetitionRecord {
        let area = match self.area {
            Some(Value::String(s)) => s,
            Some(Value::Object(map)) => {
                map.get("name").and_then(Value::as_str).unwrap_or_default().to_string()
            }
            _ => String::new(),
        };
        CompetitionRecord {
            competition_id: self.competition_id,
            name: self.name,
            area,
            kind: self.kind.unwrap_or_default(),
        }
    }
}

/// Parses a JSON array (or JSON-lines) file of `T`.
pub(crate) fn parse_list<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    split_records(text)?
        .into_iter()
        .map(|(offset, rec)| {
            serde_json::from_str(rec).map_err(|e| match json_error(rec, &e) {
                Error::Parse { offset: inner, message } => {
                    Error::Parse { offset: offset + inner, message }
                }
                other => other,
            })
        })
        .collect()
}
