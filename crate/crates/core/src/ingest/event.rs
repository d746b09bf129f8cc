//! Event vocabulary: types, subtypes, tags and the event record itself.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type EventId = u64;
pub type PlayerId = u64;
pub type TeamId = u64;
pub type MatchId = u64;
pub type CompetitionId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    Pass,
    Foul,
    Shot,
    Duel,
    FreeKick,
    Offside,
    /// "Others on the ball" in the provider feed.
    Touch,
}

impl EventType {
    pub const ALL: [EventType; 7] = [
        EventType::Pass,
        EventType::Foul,
        EventType::Shot,
        EventType::Duel,
        EventType::FreeKick,
        EventType::Offside,
        EventType::Touch,
    ];

    /// Name used in the provider's `eventName` field.
    pub fn wire_name(self) -> &'static str {
        match self {
            EventType::Pass => "Pass",
            EventType::Foul => "Foul",
            EventType::Shot => "Shot",
            EventType::Duel => "Duel",
            EventType::FreeKick => "Free Kick",
            EventType::Offside => "Offside",
            EventType::Touch => "Others on the ball",
        }
    }

    /// Name used in feature descriptors.
    pub fn feature_name(self) -> &'static str {
        match self {
            EventType::Pass => "pass",
            EventType::Foul => "foul",
            EventType::Shot => "shot",
            EventType::Duel => "duel",
            EventType::FreeKick => "free kick",
            EventType::Offside => "offside",
            EventType::Touch => "others on the ball",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let key = normalize_name(name);
        let ty = match key.as_str() {
            "pass" => EventType::Pass,
            "foul" => EventType::Foul,
            "shot" => EventType::Shot,
            "duel" => EventType::Duel,
            "free kick" | "freekick" => EventType::FreeKick,
            "offside" => EventType::Offside,
            "others on the ball" | "touch" => EventType::Touch,
            _ => return Err(Error::UnsupportedEventType(name.to_string())),
        };
        Ok(ty)
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.feature_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtype {
    // pass
    Cross,
    HandPass,
    HeadPass,
    HighPass,
    Launch,
    SimplePass,
    SmartPass,
    // duel
    AirDuel,
    GroundAttackingDuel,
    GroundDefendingDuel,
    GroundLooseBallDuel,
    // foul
    HandFoul,
    LateCardFoul,
    NormalFoul,
    OutOfGameFoul,
    ProtestFoul,
    SimulationFoul,
    TimeLostFoul,
    ViolentFoul,
    // free kick
    Corner,
    CrossFreeKick,
    NormalFreeKick,
    PenaltyFreeKick,
    ShotFreeKick,
    ThrowIn,
    GoalKick,
    // others on the ball
    Acceleration,
    Clearance,
    SimpleTouch,
    // shot
    Shot,
}

impl Subtype {
    /// The only event type this subtype is legal for.
    pub fn event_type(self) -> EventType {
        use Subtype::*;
        match self {
            Cross | HandPass | HeadPass | HighPass | Launch | SimplePass | SmartPass => EventType::Pass,
            AirDuel | GroundAttackingDuel | GroundDefendingDuel | GroundLooseBallDuel => EventType::Duel,
            HandFoul | LateCardFoul | NormalFoul | OutOfGameFoul | ProtestFoul | SimulationFoul
            | TimeLostFoul | ViolentFoul => EventType::Foul,
            Corner | CrossFreeKick | NormalFreeKick | PenaltyFreeKick | ShotFreeKick | ThrowIn
            | GoalKick => EventType::FreeKick,
            Acceleration | Clearance | SimpleTouch => EventType::Touch,
            Shot => EventType::Shot,
        }
    }

    /// Name used in the provider's `subEventName` field.
    pub fn wire_name(self) -> &'static str {
        use Subtype::*;
        match self {
            Cross => "Cross",
            HandPass => "Hand pass",
            HeadPass => "Head pass",
            HighPass => "High pass",
            Launch => "Launch",
            SimplePass => "Simple pass",
            SmartPass => "Smart pass",
            AirDuel => "Air duel",
            GroundAttackingDuel => "Ground attacking duel",
            GroundDefendingDuel => "Ground defending duel",
            GroundLooseBallDuel => "Ground loose ball duel",
            HandFoul => "Hand foul",
            LateCardFoul => "Late card foul",
            NormalFoul => "Foul",
            OutOfGameFoul => "Out of game foul",
            ProtestFoul => "Protest",
            SimulationFoul => "Simulation",
            TimeLostFoul => "Time lost foul",
            ViolentFoul => "Violent Foul",
            Corner => "Corner",
            CrossFreeKick => "Free kick cross",
            NormalFreeKick => "Free Kick",
            PenaltyFreeKick => "Penalty",
            ShotFreeKick => "Free kick shot",
            ThrowIn => "Throw in",
            GoalKick => "Goal kick",
            Acceleration => "Acceleration",
            Clearance => "Clearance",
            SimpleTouch => "Touch",
            Shot => "Shot",
        }
    }

    /// Name used in feature descriptors.
    pub fn feature_name(self) -> &'static str {
        use Subtype::*;
        match self {
            Cross => "cross pass",
            HandPass => "hand pass",
            HeadPass => "head pass",
            HighPass => "high pass",
            Launch => "launch pass",
            SimplePass => "simple pass",
            SmartPass => "smart pass",
            AirDuel => "air duel",
            GroundAttackingDuel => "ground attacking duel",
            GroundDefendingDuel => "ground defending duel",
            GroundLooseBallDuel => "ground loose ball duel",
            HandFoul => "hand foul",
            LateCardFoul => "late card foul",
            NormalFoul => "normal foul",
            OutOfGameFoul => "out of game foul",
            ProtestFoul => "protest foul",
            SimulationFoul => "simulation foul",
            TimeLostFoul => "time lost foul",
            ViolentFoul => "violent foul",
            Corner => "corner free kick",
            CrossFreeKick => "cross free kick",
            NormalFreeKick => "normal free kick",
            PenaltyFreeKick => "penalty free kick",
            ShotFreeKick => "shot free kick",
            ThrowIn => "throw in free kick",
            GoalKick => "goal kick free kick",
            // the catalog keeps the provider's historical spelling
            Acceleration => "accelleration",
            Clearance => "clearance",
            SimpleTouch => "touch",
            Shot => "shot",
        }
    }

    /// Parses a subtype name in the context of its event type. Names are matched
    /// case-insensitively; spaces and underscores are interchangeable.
    pub fn parse(event_type: EventType, name: &str) -> Result<Self> {
        use Subtype::*;
        let key = normalize_name(name);
        let found = match (event_type, key.as_str()) {
            (EventType::Pass, "cross") => Cross,
            (EventType::Pass, "hand pass") => HandPass,
            (EventType::Pass, "head pass") => HeadPass,
            (EventType::Pass, "high pass") => HighPass,
            (EventType::Pass, "launch") => Launch,
            (EventType::Pass, "simple pass") => SimplePass,
            (EventType::Pass, "smart pass") => SmartPass,
            (EventType::Duel, "air duel") => AirDuel,
            (EventType::Duel, "ground attacking duel" | "dribbles") => GroundAttackingDuel,
            (EventType::Duel, "ground defending duel" | "tackles") => GroundDefendingDuel,
            (EventType::Duel, "ground loose ball duel" | "ground loose ball") => GroundLooseBallDuel,
            (EventType::Foul, "hand foul") => HandFoul,
            (EventType::Foul, "late card foul") => LateCardFoul,
            (EventType::Foul, "foul" | "normal foul") => NormalFoul,
            (EventType::Foul, "out of game foul") => OutOfGameFoul,
            (EventType::Foul, "protest") => ProtestFoul,
            (EventType::Foul, "simulation") => SimulationFoul,
            (EventType::Foul, "time lost foul") => TimeLostFoul,
            (EventType::Foul, "violent foul") => ViolentFoul,
            (EventType::FreeKick, "corner") => Corner,
            (EventType::FreeKick, "free kick cross" | "cross") => CrossFreeKick,
            (EventType::FreeKick, "free kick" | "simple kick") => NormalFreeKick,
            (EventType::FreeKick, "penalty") => PenaltyFreeKick,
            (EventType::FreeKick, "free kick shot" | "shot") => ShotFreeKick,
            (EventType::FreeKick, "throw in") => ThrowIn,
            (EventType::FreeKick, "goal kick") => GoalKick,
            (EventType::Touch, "acceleration") => Acceleration,
            (EventType::Touch, "clearance") => Clearance,
            (EventType::Touch, "touch" | "simple touch") => SimpleTouch,
            (EventType::Shot, "shot") => Shot,
            _ => {
                return Err(Error::Validation(format!(
                    "subtype `{name}` is not legal for event type `{event_type}`"
                )))
            }
        };
        Ok(found)
    }
}

/// Provider tag identifier. Unknown identifiers are kept as-is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tag(pub u32);

impl Tag {
    pub const GOAL: Tag = Tag(101);
    pub const OWN_GOAL: Tag = Tag(102);
    pub const OPPORTUNITY: Tag = Tag(201);
    pub const ASSIST: Tag = Tag(301);
    pub const KEY_PASS: Tag = Tag(302);
    pub const FEINT: Tag = Tag(1301);
    pub const MISSED_BALL: Tag = Tag(1302);
    pub const INTERCEPTION: Tag = Tag(1401);
    pub const RED_CARD: Tag = Tag(1701);
    pub const YELLOW_CARD: Tag = Tag(1702);
    pub const SECOND_YELLOW_CARD: Tag = Tag(1703);
    pub const ACCURATE: Tag = Tag(1801);
    pub const NOT_ACCURATE: Tag = Tag(1802);
    pub const COUNTER_ATTACK: Tag = Tag(1901);
    pub const DANGEROUS_BALL_LOST: Tag = Tag(2001);

    const NAMED: [(Tag, &'static str); 15] = [
        (Tag::GOAL, "goal"),
        (Tag::OWN_GOAL, "own goal"),
        (Tag::OPPORTUNITY, "opportunity"),
        (Tag::ASSIST, "assist"),
        (Tag::KEY_PASS, "key pass"),
        (Tag::FEINT, "feint"),
        (Tag::MISSED_BALL, "missed ball"),
        (Tag::INTERCEPTION, "interception"),
        (Tag::RED_CARD, "red card"),
        (Tag::YELLOW_CARD, "yellow card"),
        (Tag::SECOND_YELLOW_CARD, "second yellow card"),
        (Tag::ACCURATE, "accurate"),
        (Tag::NOT_ACCURATE, "not accurate"),
        (Tag::COUNTER_ATTACK, "counter attack"),
        (Tag::DANGEROUS_BALL_LOST, "dangerous ball lost"),
    ];

    pub fn name(self) -> Option<&'static str> {
        Self::NAMED.iter().find(|(t, _)| *t == self).map(|(_, n)| *n)
    }

    pub fn from_name(name: &str) -> Option<Tag> {
        let key = normalize_name(name);
        Self::NAMED.iter().find(|(_, n)| *n == key).map(|(t, _)| *t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    FirstHalf,
    SecondHalf,
    ExtraFirstHalf,
    ExtraSecondHalf,
    Penalties,
}

impl Period {
    pub fn wire_name(self) -> &'static str {
        match self {
            Period::FirstHalf => "1H",
            Period::SecondHalf => "2H",
            Period::ExtraFirstHalf => "E1",
            Period::ExtraSecondHalf => "E2",
            Period::Penalties => "P",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "1H" => Ok(Period::FirstHalf),
            "2H" => Ok(Period::SecondHalf),
            "E1" => Ok(Period::ExtraFirstHalf),
            "E2" => Ok(Period::ExtraSecondHalf),
            "P" => Ok(Period::Penalties),
            other => Err(Error::Validation(format!("unknown match period `{other}`"))),
        }
    }

    pub fn is_extra(self) -> bool {
        !matches!(self, Period::FirstHalf | Period::SecondHalf)
    }
}

/// Field position as percentages from the attacking team's left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && (0.0..=100.0).contains(&v);
        if !ok(x) || !ok(y) {
            return Err(Error::Validation(format!("position ({x}, {y}) outside [0, 100]")));
        }
        Ok(Position { x, y })
    }
}

/// One atomic on-ball action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event_id: EventId,
    pub event_type: EventType,
    pub subtype: Option<Subtype>,
    /// Provider subtype code, kept verbatim for round-tripping.
    pub sub_event_id: Option<u32>,
    pub tags: BTreeSet<Tag>,
    pub player_id: PlayerId,
    pub team_id: TeamId,
    pub match_id: MatchId,
    pub period: Period,
    pub event_sec: f64,
    pub position: Position,
    pub end_position: Option<Position>,
}

impl Event {
    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn is_goal(&self) -> bool {
        self.has_tag(Tag::GOAL)
    }

    /// Match-absolute ordering key: period, then seconds, then id.
    pub fn chrono_cmp(&self, other: &Event) -> std::cmp::Ordering {
        self.period
            .cmp(&other.period)
            .then(self.event_sec.total_cmp(&other.event_sec))
            .then(self.event_id.cmp(&other.event_id))
            .then(self.player_id.cmp(&other.player_id))
    }
}

pub(crate) fn normalize_name(name: &str) -> String {
    name.trim()
        .to_ascii_lowercase()
        .replace(['_', '-'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtype_legality_follows_owner_type() {
        assert_eq!(Subtype::parse(EventType::Duel, "air duel").unwrap(), Subtype::AirDuel);
        assert!(Subtype::parse(EventType::Pass, "air duel").is_err());
        assert_eq!(Subtype::parse(EventType::FreeKick, "shot").unwrap(), Subtype::ShotFreeKick);
        assert_eq!(Subtype::parse(EventType::Shot, "Shot").unwrap(), Subtype::Shot);
    }

    #[test]
    fn every_wire_name_parses_back() {
        use Subtype::*;
        let all = [
            Cross, HandPass, HeadPass, HighPass, Launch, SimplePass, SmartPass, AirDuel,
            GroundAttackingDuel, GroundDefendingDuel, GroundLooseBallDuel, HandFoul, LateCardFoul,
            NormalFoul, OutOfGameFoul, ProtestFoul, SimulationFoul, TimeLostFoul, ViolentFoul,
            Corner, CrossFreeKick, NormalFreeKick, PenaltyFreeKick, ShotFreeKick, ThrowIn, GoalKick,
            Acceleration, Clearance, SimpleTouch, Shot,
        ];
        for st in all {
            assert_eq!(Subtype::parse(st.event_type(), st.wire_name()).unwrap(), st);
        }
        for ty in EventType::ALL {
            assert_eq!(EventType::parse(ty.wire_name()).unwrap(), ty);
        }
    }

    #[test]
    fn goalkeeping_types_are_unsupported() {
        assert!(matches!(EventType::parse("Save attempt"), Err(Error::UnsupportedEventType(_))));
    }

    #[test]
    fn position_bounds() {
        assert!(Position::new(0.0, 100.0).is_ok());
        assert!(Position::new(150.0, 50.0).is_err());
        assert!(Position::new(f64::NAN, 50.0).is_err());
    }

    #[test]
    fn tag_names() {
        assert_eq!(Tag::from_name("Not accurate"), Some(Tag::NOT_ACCURATE));
        assert_eq!(Tag(9999).name(), None);
    }
}
