//! System-side belief state: the constraints the system has extracted from
//! the conversation so far, grouped by domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::act::{DialogAct, Intent};

/// Accumulated `slot -> value` constraints per domain. The belief state only
/// ever grows or overwrites: a re-informed slot takes the newest value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeliefState {
    pub domains: BTreeMap<String, BTreeMap<String, String>>,
}

impl BeliefState {
    pub fn is_empty(&self) -> bool {
        self.domains.values().all(|slots| slots.is_empty())
    }

    pub fn get(&self, domain: &str, slot: &str) -> Option<&str> {
        self.domains.get(domain)?.get(slot).map(String::as_str)
    }

    pub fn set(
        &mut self,
        domain: impl Into<String>,
        slot: impl Into<String>,
        value: impl Into<String>,
    ) {
        self.domains
            .entry(domain.into())
            .or_default()
            .insert(slot.into(), value.into());
    }

    pub fn slots(&self, domain: &str) -> Option<&BTreeMap<String, String>> {
        self.domains.get(domain)
    }

    /// Fold the inform and book items of a user act into the state. Items
    /// without a slot and value are ignored.
    pub fn update_from_act(&mut self, act: &DialogAct) {
        for item in act {
            if !matches!(item.intent, Intent::Inform | Intent::Book) {
                continue;
            }
            let (Some(slot), Some(value)) = (&item.slot, &item.value) else { continue };
            self.set(item.domain.clone(), slot.clone(), value.clone());
        }
    }

    /// Domains whose slot map differs from `prev` (new domain, new slot, or
    /// changed value). Returned in map order.
    pub fn changed_domains<'a>(&'a self, prev: &BeliefState) -> Vec<&'a str> {
        self.domains
            .iter()
            .filter(|(domain, slots)| prev.domains.get(*domain) != Some(slots))
            .map(|(domain, _)| domain.as_str())
            .collect()
    }
}

/// The domain the conversation is currently about, used to pick which domain
/// the database is queried for. When the new belief differs from the previous
/// one the freshest changed domain wins (goals visit domains in canonical
/// order, so the highest-ranked changed domain is the one the user moved to);
/// otherwise the previous active domain carries over.
pub fn active_domain(
    prev_active: Option<&str>,
    prev_belief: &BeliefState,
    belief: &BeliefState,
    domain_rank: impl Fn(&str) -> usize,
) -> Option<String> {
    let changed = belief.changed_domains(prev_belief);
    changed
        .into_iter()
        .max_by_key(|domain| domain_rank(domain))
        .map(str::to_string)
        .or_else(|| prev_active.map(str::to_string))
}
