//! Dialog acts: structured `(domain, intent, slot, value)` items.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Pseudo-domain for domain-less intents (bye, greet, reqmore).
pub const GENERAL_DOMAIN: &str = "general";

/// Intents carried by user and system acts.
///
/// `Inform`, `Book` and `Request` also appear in goal states; the rest are
/// protocol-level intents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intent {
    Inform,
    Book,
    Nooffer,
    Offerbook,
    Request,
    Reqmore,
    Greet,
    Bye,
}

impl Intent {
    pub const ALL: [Intent; 8] = [
        Intent::Inform,
        Intent::Book,
        Intent::Nooffer,
        Intent::Offerbook,
        Intent::Request,
        Intent::Reqmore,
        Intent::Greet,
        Intent::Bye,
    ];

    /// Canonical serialization rank. Inform-like intents come first,
    /// protocol intents last.
    pub fn rank(self) -> u8 {
        match self {
            Intent::Inform => 0,
            Intent::Book => 1,
            Intent::Nooffer => 2,
            Intent::Offerbook => 3,
            Intent::Request => 4,
            Intent::Reqmore => 5,
            Intent::Greet => 6,
            Intent::Bye => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Inform => "inform",
            Intent::Book => "book",
            Intent::Nooffer => "nooffer",
            Intent::Offerbook => "offerbook",
            Intent::Request => "request",
            Intent::Reqmore => "reqmore",
            Intent::Greet => "greet",
            Intent::Bye => "bye",
        }
    }

    pub fn from_str_opt(s: &str) -> Option<Intent> {
        Intent::ALL.iter().copied().find(|i| i.as_str() == s)
    }

    /// Whether items of this intent carry a slot.
    pub fn carries_slot(self) -> bool {
        !matches!(self, Intent::Bye | Intent::Greet | Intent::Reqmore | Intent::Offerbook)
    }

    /// Whether items of this intent carry a value (given they carry a slot).
    pub fn carries_value(self) -> bool {
        matches!(self, Intent::Inform | Intent::Book)
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One atomic act item.
///
/// Invariants (enforced by [`ActItem::new`] in debug builds and by the
/// constructors below):
/// * request and nooffer items have a slot but no value;
/// * inform/book items have a slot; the value is present on semantic acts
///   and absent on acts parsed back from spans (spans drop values);
/// * bye/greet/reqmore/offerbook carry neither.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActItem {
    pub domain: String,
    pub intent: Intent,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slot: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<String>,
}

impl ActItem {
    pub fn new(
        domain: impl Into<String>,
        intent: Intent,
        slot: Option<String>,
        value: Option<String>,
    ) -> Self {
        let item = ActItem { domain: domain.into(), intent, slot, value };
        debug_assert!(item.well_formed(), "malformed act item: {item:?}");
        item
    }

    pub fn inform(domain: impl Into<String>, slot: impl Into<String>, value: impl Into<String>) -> Self {
        ActItem::new(domain, Intent::Inform, Some(slot.into()), Some(value.into()))
    }

    pub fn book(domain: impl Into<String>, slot: impl Into<String>, value: impl Into<String>) -> Self {
        ActItem::new(domain, Intent::Book, Some(slot.into()), Some(value.into()))
    }

    pub fn request(domain: impl Into<String>, slot: impl Into<String>) -> Self {
        ActItem::new(domain, Intent::Request, Some(slot.into()), None)
    }

    pub fn nooffer(domain: impl Into<String>, slot: impl Into<String>) -> Self {
        ActItem::new(domain, Intent::Nooffer, Some(slot.into()), None)
    }

    pub fn offerbook(domain: impl Into<String>) -> Self {
        ActItem::new(domain, Intent::Offerbook, None, None)
    }

    pub fn bye() -> Self {
        ActItem::new(GENERAL_DOMAIN, Intent::Bye, None, None)
    }

    pub fn greet() -> Self {
        ActItem::new(GENERAL_DOMAIN, Intent::Greet, None, None)
    }

    pub fn reqmore() -> Self {
        ActItem::new(GENERAL_DOMAIN, Intent::Reqmore, None, None)
    }

    pub fn well_formed(&self) -> bool {
        match self.intent {
            Intent::Inform | Intent::Book => self.slot.is_some(),
            Intent::Request | Intent::Nooffer => self.slot.is_some() && self.value.is_none(),
            Intent::Offerbook | Intent::Bye | Intent::Greet | Intent::Reqmore => {
                self.slot.is_none() && self.value.is_none()
            }
        }
    }

    /// Identity used for dedup and repeat detection: the value is excluded,
    /// matching the slots-only span format.
    pub fn signature(&self) -> (&str, Intent, Option<&str>) {
        (&self.domain, self.intent, self.slot.as_deref())
    }
}

/// An ordered, duplicate-free set of [`ActItem`]s.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DialogAct {
    items: Vec<ActItem>,
}

impl DialogAct {
    pub fn empty() -> Self {
        DialogAct::default()
    }

    pub fn from_items(items: impl IntoIterator<Item = ActItem>) -> Self {
        let mut act = DialogAct::default();
        for item in items {
            act.push(item);
        }
        act
    }

    /// Append, dropping exact duplicates of `(domain, intent, slot, value)`.
    pub fn push(&mut self, item: ActItem) {
        if !self.items.contains(&item) {
            self.items.push(item);
        }
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = ActItem>) {
        for item in items {
            self.push(item);
        }
    }

    pub fn items(&self) -> &[ActItem] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActItem> {
        self.items.iter()
    }

    pub fn has_intent(&self, intent: Intent) -> bool {
        self.items.iter().any(|i| i.intent == intent)
    }

    pub fn items_with_intent(&self, intent: Intent) -> impl Iterator<Item = &ActItem> {
        self.items.iter().filter(move |i| i.intent == intent)
    }

    /// Stable sort into canonical `(domain rank, intent rank, slot rank)`
    /// order. Ranking functions come from the span codec so that domain and
    /// slot order follow the ontology declaration order.
    pub fn canonicalize(
        &mut self,
        domain_rank: impl Fn(&str) -> usize,
        slot_rank: impl Fn(&str, &str) -> usize,
    ) {
        // Names break rank ties so that unranked domains and slots still
        // group and order deterministically.
        self.items.sort_by(|a, b| {
            let ka = (
                domain_rank(&a.domain),
                a.domain.as_str(),
                a.intent.rank(),
                a.slot.as_deref().map_or(usize::MAX, |s| slot_rank(&a.domain, s)),
                a.slot.as_deref().unwrap_or(""),
            );
            let kb = (
                domain_rank(&b.domain),
                b.domain.as_str(),
                b.intent.rank(),
                b.slot.as_deref().map_or(usize::MAX, |s| slot_rank(&b.domain, s)),
                b.slot.as_deref().unwrap_or(""),
            );
            ka.cmp(&kb)
        });
    }
}

impl FromIterator<ActItem> for DialogAct {
    fn from_iter<T: IntoIterator<Item = ActItem>>(iter: T) -> Self {
        DialogAct::from_items(iter)
    }
}

impl<'a> IntoIterator for &'a DialogAct {
    type Item = &'a ActItem;
    type IntoIter = std::slice::Iter<'a, ActItem>;
    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_dedups_exact_quadruples() {
        let mut act = DialogAct::empty();
        act.push(ActItem::inform("restaurant", "area", "north"));
        act.push(ActItem::inform("restaurant", "area", "north"));
        act.push(ActItem::inform("restaurant", "area", "south"));
        assert_eq!(act.len(), 2);
    }

    #[test]
    fn well_formedness_per_intent() {
        assert!(ActItem::request("hotel", "phone").well_formed());
        assert!(ActItem::bye().well_formed());
        assert!(ActItem::inform("hotel", "area", "dontcare").well_formed());
        let bad = ActItem {
            domain: "hotel".into(),
            intent: Intent::Request,
            slot: None,
            value: None,
        };
        assert!(!bad.well_formed());
    }
}
