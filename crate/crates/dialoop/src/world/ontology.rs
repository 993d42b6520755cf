//! Closed-world ontology: domains, slots, and legal values.

use serde::{Deserialize, Serialize};

/// How a slot participates in a dialog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    /// Constrains the database search (food, area, ...). Every entity carries
    /// a value for each informable slot of its domain.
    Informable,
    /// Booking detail supplied by the user (day, people, ...); not a database
    /// filter.
    Book,
    /// Entity attribute the user can ask for (phone, address, ...); never a
    /// constraint.
    RequestOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    /// Legal values. Empty for request-only slots, whose values live on
    /// entities and only ever surface through lexicalization.
    #[serde(default)]
    pub values: Vec<String>,
}

impl SlotSpec {
    pub fn new(name: &str, kind: SlotKind, values: &[&str]) -> Self {
        SlotSpec {
            name: name.to_string(),
            kind,
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }
}

/// One domain: slot declaration order is the canonical order used by every
/// span serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    /// The request-only slot that identifies an entity when the system makes
    /// an offer ("name" for venues, "trainid" for trains). Entities are
    /// sorted and selected by it.
    pub id_slot: String,
    pub slots: Vec<SlotSpec>,
}

impl DomainSpec {
    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn slots_of_kind(&self, kind: SlotKind) -> impl Iterator<Item = &SlotSpec> {
        self.slots.iter().filter(move |s| s.kind == kind)
    }

    pub fn informables(&self) -> impl Iterator<Item = &SlotSpec> {
        self.slots_of_kind(SlotKind::Informable)
    }

    pub fn book_slots(&self) -> impl Iterator<Item = &SlotSpec> {
        self.slots_of_kind(SlotKind::Book)
    }

    pub fn request_only(&self) -> impl Iterator<Item = &SlotSpec> {
        self.slots_of_kind(SlotKind::RequestOnly)
    }

    pub fn is_informable(&self, slot: &str) -> bool {
        self.slot(slot).is_some_and(|s| s.kind == SlotKind::Informable)
    }
}
