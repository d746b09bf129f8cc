//! Ingestion of provider event logs into an immutable, indexed [`EventStore`].

mod event;
mod stats;
mod store;
mod wire;

pub use event::{
    CompetitionId, Event, EventId, EventType, MatchId, Period, PlayerId, Position, Subtype, Tag,
    TeamId,
};
pub use stats::{corpus_stats, CorpusStats, Distribution};
pub use store::{
    load_corpus, CompetitionRecord, CorpusText, EventStore, IngestReport, LoadOptions,
    MatchRecord, PlayerRecord, Side, TeamResult,
};
pub use wire::{event_to_json, parse_event, WireCompetition, WireMatch, WirePlayer, WireTeamData};
