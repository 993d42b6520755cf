//! The closed world: ontology, entity database, goal generator, and
//! delexicalization. Everything downstream (templates, models, evaluation)
//! draws its vocabulary from here.

pub mod builtin;
pub mod delex;
pub mod entity;
pub mod goal_gen;
pub mod ontology;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use builtin::builtin_world;
pub use delex::{lexicalize, Delexicalizer};
pub use entity::{db_bucket, DbResult, Entity};
pub use goal_gen::{generate_goal, generate_goals, GoalConfig};
pub use ontology::{DomainSpec, SlotKind, SlotSpec};

use crate::dialog::spans::SpanLexicon;
use crate::dialog::state::BeliefState;

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad world file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate domain {0}")]
    DuplicateDomain(String),
    #[error("domain {domain}: id slot {id_slot} is not a declared request-only slot")]
    BadIdSlot { domain: String, id_slot: String },
    #[error("domain {domain}: entity {index} is missing attribute {slot}")]
    MissingAttr {
        domain: String,
        index: usize,
        slot: String,
    },
    #[error("domain {domain}: entity {index} has {slot}={value}, not a legal value")]
    BadValue {
        domain: String,
        index: usize,
        slot: String,
        value: String,
    },
    #[error("domain {domain}: duplicate entity id {id}")]
    DuplicateId { domain: String, id: String },
    #[error("entities declared for unknown domain {0}")]
    UnknownDomain(String),
    #[error("surface value {value} belongs to both slot {a} and slot {b}")]
    AmbiguousValue { value: String, a: String, b: String },
}

/// Serialized form: just the ontology and the entities.
#[derive(Serialize, Deserialize)]
struct WorldFile {
    domains: Vec<DomainSpec>,
    entities: BTreeMap<String, Vec<Entity>>,
}

#[derive(Debug, Clone)]
pub struct World {
    pub domains: Vec<DomainSpec>,
    /// Per domain, sorted by the domain's id slot.
    pub entities: BTreeMap<String, Vec<Entity>>,
    lexicon: SpanLexicon,
}

impl World {
    /// Validate and index a world. Panics on invalid input; use [`World::try_new`]
    /// for data from disk.
    pub fn new(domains: Vec<DomainSpec>, entities: BTreeMap<String, Vec<Entity>>) -> Self {
        World::try_new(domains, entities).expect("world is valid")
    }

    pub fn try_new(
        domains: Vec<DomainSpec>,
        mut entities: BTreeMap<String, Vec<Entity>>,
    ) -> Result<Self, WorldError> {
        for spec in &domains {
            if domains.iter().filter(|d| d.name == spec.name).count() > 1 {
                return Err(WorldError::DuplicateDomain(spec.name.clone()));
            }
            let id_ok = spec
                .slot(&spec.id_slot)
                .is_some_and(|s| s.kind == SlotKind::RequestOnly);
            if !id_ok {
                return Err(WorldError::BadIdSlot {
                    domain: spec.name.clone(),
                    id_slot: spec.id_slot.clone(),
                });
            }
            entities.entry(spec.name.clone()).or_default();
        }
        for key in entities.keys() {
            if !domains.iter().any(|d| &d.name == key) {
                return Err(WorldError::UnknownDomain(key.clone()));
            }
        }

        for spec in &domains {
            let rows = entities.get_mut(&spec.name).expect("inserted above");
            for (index, row) in rows.iter().enumerate() {
                for slot in spec.slots.iter().filter(|s| s.kind != SlotKind::Book) {
                    let Some(value) = row.get(&slot.name) else {
                        return Err(WorldError::MissingAttr {
                            domain: spec.name.clone(),
                            index,
                            slot: slot.name.clone(),
                        });
                    };
                    if slot.kind == SlotKind::Informable
                        && !slot.values.iter().any(|v| v == value)
                    {
                        return Err(WorldError::BadValue {
                            domain: spec.name.clone(),
                            index,
                            slot: slot.name.clone(),
                            value: value.to_string(),
                        });
                    }
                }
            }
            rows.sort_by(|a, b| a.id(&spec.id_slot).cmp(b.id(&spec.id_slot)));
            for pair in rows.windows(2) {
                if pair[0].id(&spec.id_slot) == pair[1].id(&spec.id_slot) {
                    return Err(WorldError::DuplicateId {
                        domain: spec.name.clone(),
                        id: pair[0].id(&spec.id_slot).to_string(),
                    });
                }
            }
        }

        let mut world = World { domains, entities, lexicon: SpanLexicon::new() };
        world.surface_values_checked()?;

        let mut lexicon = SpanLexicon::new();
        for spec in &world.domains {
            lexicon.push_domain(&spec.name);
            for slot in &spec.slots {
                lexicon.push_slot(&spec.name, &slot.name);
                for value in &slot.values {
                    lexicon.push_value(&spec.name, &slot.name, value);
                }
                // "dontcare" is a legal span value for any slot a user can
                // state a preference on; it never appears in surface text.
                if !slot.values.is_empty() {
                    lexicon.push_value(&spec.name, &slot.name, "dontcare");
                }
            }
        }
        world.lexicon = lexicon;
        Ok(world)
    }

    pub fn domain(&self, name: &str) -> Option<&DomainSpec> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn lexicon(&self) -> &SpanLexicon {
        &self.lexicon
    }

    /// Every surface value string (lowercased) and the unique slot name it
    /// belongs to: ontology value lists plus entity attributes.
    pub fn surface_values(&self) -> BTreeMap<String, String> {
        self.surface_values_checked().expect("validated at construction")
    }

    fn surface_values_checked(&self) -> Result<BTreeMap<String, String>, WorldError> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        let mut add = |value: &str, slot: &str| -> Result<(), WorldError> {
            let value = value.to_lowercase();
            match map.get(&value) {
                Some(existing) if existing != slot => Err(WorldError::AmbiguousValue {
                    value,
                    a: existing.clone(),
                    b: slot.to_string(),
                }),
                _ => {
                    map.insert(value, slot.to_string());
                    Ok(())
                }
            }
        };
        for spec in &self.domains {
            for slot in &spec.slots {
                for value in &slot.values {
                    add(value, &slot.name)?;
                }
            }
            for row in &self.entities[&spec.name] {
                for slot in spec.request_only() {
                    if let Some(value) = row.get(&slot.name) {
                        add(value, &slot.name)?;
                    }
                }
            }
        }
        Ok(map)
    }

    /// Entities matching the informable constraints among `constraints`.
    pub fn query(&self, domain: &str, constraints: &BTreeMap<String, String>) -> Vec<&Entity> {
        let Some(spec) = self.domain(domain) else { return Vec::new() };
        entity::query(&self.entities[domain], |s| spec.is_informable(s), constraints)
    }

    pub fn db_result(&self, domain: &str, constraints: &BTreeMap<String, String>) -> DbResult {
        let matches = self.query(domain, constraints);
        DbResult {
            count: matches.len(),
            bucket: db_bucket(matches.len()),
            selected: matches.first().map(|e| (*e).clone()),
        }
    }

    /// Database lookup for the active domain under the current belief.
    pub fn db_for_belief(&self, domain: &str, belief: &BeliefState) -> DbResult {
        match belief.slots(domain) {
            Some(slots) => self.db_result(domain, slots),
            None => DbResult::empty(),
        }
    }

    /// Content hash over the serialized ontology and entities.
    pub fn hash(&self) -> String {
        let file = WorldFile {
            domains: self.domains.clone(),
            entities: self.entities.clone(),
        };
        let json = serde_json::to_string(&file).expect("world serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WorldError> {
        let file = WorldFile {
            domains: self.domains.clone(),
            entities: self.entities.clone(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path)?;
        let file: WorldFile = serde_json::from_str(&text)?;
        World::try_new(file.domains, file.entities)
    }
}
