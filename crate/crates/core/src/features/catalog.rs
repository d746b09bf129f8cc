use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::{Event, EventType, Subtype, Tag};

/// One feature: events of `event_type`/`subtype` carrying `tag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub event_type: EventType,
    pub subtype: Option<Subtype>,
    pub tag: Option<Tag>,
}

impl FeatureDescriptor {
    pub fn matches(&self, event: &Event) -> bool {
        event.event_type == self.event_type
            && (self.subtype.is_none() || event.subtype == self.subtype)
            && self.tag.is_none_or(|t| event.has_tag(t))
    }

    /// Printed name, e.g. `pass-simple pass-accurate`.
    pub fn name(&self) -> String {
        let mut parts = vec![self.event_type.feature_name().to_string()];
        if let Some(st) = self.subtype {
            parts.push(st.feature_name().to_string());
        }
        if let Some(tag) = self.tag {
            parts.push(tag.name().map(str::to_string).unwrap_or_else(|| tag.0.to_string()));
        }
        parts.join("-")
    }
}

/// Ordered feature list. Weight vectors are index-aligned with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    descriptors: Vec<FeatureDescriptor>,
    hash: String,
}

impl FeatureCatalog {
    pub fn new(descriptors: Vec<FeatureDescriptor>) -> crate::Result<Self> {
        for (i, d) in descriptors.iter().enumerate() {
            if d.tag == Some(Tag::GOAL) {
                return Err(crate::Error::Validation(format!("feature {} uses the goal tag", d.name())));
            }
            if let Some(st) = d.subtype {
                if st.event_type() != d.event_type {
                    return Err(crate::Error::Validation(format!("feature {} is ill-typed", d.name())));
                }
            }
            if descriptors[..i].contains(d) {
                return Err(crate::Error::Validation(format!("duplicate feature {}", d.name())));
            }
        }
        let mut hasher = Sha256::new();
        for d in &descriptors {
            hasher.update(d.name().as_bytes());
            hasher.update(b"\n");
        }
        let hash = format!("{:x}", hasher.finalize())[..16].to_string();
        Ok(FeatureCatalog { descriptors, hash })
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn names(&self) -> Vec<String> {
        self.descriptors.iter().map(FeatureDescriptor::name).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.name() == name)
    }

    /// Short content hash; persisted alongside every index-aligned artifact.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}

/// The standard 76-feature catalog, in its canonical order.
pub fn build_feature_catalog() -> FeatureCatalog {
    use EventType as E;
    use Subtype as S;

    let acc = [Tag::ACCURATE, Tag::NOT_ACCURATE];
    let mut d = Vec::with_capacity(76);
    let mut push = |event_type, subtype, tag| {
        d.push(FeatureDescriptor { event_type, subtype: Some(subtype), tag: Some(tag) })
    };

    for st in [S::AirDuel, S::GroundAttackingDuel, S::GroundDefendingDuel, S::GroundLooseBallDuel] {
        for t in acc {
            push(E::Duel, st, t);
        }
    }

    let (red, second, yellow) = (Tag::RED_CARD, Tag::SECOND_YELLOW_CARD, Tag::YELLOW_CARD);
    let fouls: [(Subtype, &[Tag]); 7] = [
        (S::HandFoul, &[red, second, yellow]),
        (S::LateCardFoul, &[yellow]),
        (S::NormalFoul, &[red, second, yellow]),
        (S::OutOfGameFoul, &[red, second, yellow]),
        (S::ProtestFoul, &[red, second, yellow]),
        (S::SimulationFoul, &[second, yellow]),
        (S::ViolentFoul, &[red, second, yellow]),
    ];
    for (st, tags) in fouls {
        for &t in tags {
            push(E::Foul, st, t);
        }
    }

    for st in [S::Corner, S::CrossFreeKick, S::NormalFreeKick] {
        for t in acc {
            push(E::FreeKick, st, t);
        }
    }
    push(E::FreeKick, S::PenaltyFreeKick, Tag::NOT_ACCURATE);
    for st in [S::ShotFreeKick, S::ThrowIn] {
        for t in acc {
            push(E::FreeKick, st, t);
        }
    }

    for st in [S::Acceleration, S::Clearance] {
        for t in acc {
            push(E::Touch, st, t);
        }
    }
    for t in [
        Tag::ASSIST,
        Tag::COUNTER_ATTACK,
        Tag::DANGEROUS_BALL_LOST,
        Tag::FEINT,
        Tag::INTERCEPTION,
        Tag::MISSED_BALL,
        Tag::OPPORTUNITY,
    ] {
        push(E::Touch, S::SimpleTouch, t);
    }

    for st in [S::Cross, S::HandPass, S::HeadPass, S::HighPass, S::Launch, S::SimplePass, S::SmartPass]
    {
        let tags: &[Tag] = if st == S::HandPass {
            &[Tag::ACCURATE, Tag::NOT_ACCURATE]
        } else {
            &[Tag::ACCURATE, Tag::ASSIST, Tag::KEY_PASS, Tag::NOT_ACCURATE]
        };
        for &t in tags {
            push(E::Pass, st, t);
        }
    }

    for t in acc {
        push(E::Shot, S::Shot, t);
    }

    FeatureCatalog::new(d).expect("standard catalog is well-formed")
}
