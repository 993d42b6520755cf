//! Task-completion judging. A dialog informs correctly when every entity
//! the system offered for a goal domain satisfies that domain's constraints;
//! it succeeds when it informs correctly and every requested slot was
//! provided by some system turn.
//!
//! Offers and provided slots are read from the system acts first (they carry
//! grounded values) and from `[value_<slot>]` placeholders in the responses
//! second. A placeholder is attributed to the goal domains the turn's act
//! mentions, falling back to every goal domain whose ontology has the slot.

use std::collections::{BTreeMap, BTreeSet};

use crate::dialog::act::Intent;
use crate::dialog::goal::UserGoal;
use crate::dialog::turn::Dialog;
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub inform: bool,
    pub success: bool,
    /// (domain, slot) pairs some system turn informed.
    pub provided_requests: BTreeSet<(String, String)>,
    /// Last entity offered per goal domain; `None` records an offer implied
    /// by a response placeholder that no act item identified.
    pub offers: BTreeMap<String, Option<String>>,
    /// No goal domain ever received an offer, making inform vacuously true.
    pub vacuous_inform: bool,
}

/// `goal` must be the final version: goal-change values applied, abandoned
/// domains removed.
pub fn judge_dialog(dialog: &Dialog, goal: &UserGoal, world: &World) -> Verdict {
    let mut offers: BTreeMap<String, Option<String>> = BTreeMap::new();
    let mut provided: BTreeSet<(String, String)> = BTreeSet::new();

    for turn in &dialog.turns {
        let mut offered_this_turn: BTreeSet<&str> = BTreeSet::new();
        for item in turn.sys_act.items() {
            if item.intent != Intent::Inform && item.intent != Intent::Book {
                continue;
            }
            let Some(slot) = &item.slot else { continue };
            let Some(dg) = goal.domain(&item.domain) else { continue };
            provided.insert((dg.domain.clone(), slot.clone()));
            let Some(spec) = world.domain(&dg.domain) else { continue };
            if item.intent == Intent::Inform && *slot == spec.id_slot {
                offers.insert(dg.domain.clone(), item.value.clone());
                offered_this_turn.insert(dg.domain.as_str());
            }
        }

        let act_domains: BTreeSet<&str> =
            turn.sys_act.items().iter().map(|i| i.domain.as_str()).collect();
        for slot in placeholder_slots(&turn.response) {
            // A placeholder some act item carries is that item's surface
            // form; the act loop above already credited it.
            let backed = turn.sys_act.items().iter().any(|i| {
                matches!(i.intent, Intent::Inform | Intent::Book)
                    && i.slot.as_deref() == Some(slot.as_str())
            });
            if backed {
                continue;
            }
            let mentioned: Vec<&str> = goal
                .domains
                .iter()
                .map(|dg| dg.domain.as_str())
                .filter(|d| {
                    world.domain(d).is_some_and(|spec| spec.slot(&slot).is_some())
                })
                .collect();
            let attributed: Vec<&str> = if mentioned.iter().any(|d| act_domains.contains(d)) {
                mentioned.iter().copied().filter(|d| act_domains.contains(d)).collect()
            } else {
                mentioned
            };
            for d in attributed {
                provided.insert((d.to_string(), slot.clone()));
                let spec = world.domain(d).expect("filtered above");
                if slot == spec.id_slot && !offered_this_turn.contains(d) {
                    // An orphan id placeholder is an offer of an entity the
                    // trace never identifies.
                    offers.entry(d.to_string()).or_insert(None);
                }
            }
        }
    }

    let inform = offers.iter().all(|(domain, id)| {
        let Some(id) = id else { return false };
        let Some(dg) = goal.domain(domain) else { return false };
        let Some(spec) = world.domain(domain) else { return false };
        let constraints: BTreeMap<String, String> = dg
            .constraints
            .iter()
            .map(|(s, (v, _))| (s.clone(), v.clone()))
            .collect();
        world.query(domain, &constraints).iter().any(|e| e.id(&spec.id_slot) == *id)
    });

    let success = inform
        && goal.domains.iter().all(|dg| {
            dg.requests
                .iter()
                .all(|s| provided.contains(&(dg.domain.clone(), s.clone())))
        });

    Verdict {
        inform,
        success,
        provided_requests: provided,
        vacuous_inform: offers.is_empty(),
        offers,
    }
}

/// Slot names of every `[value_<slot>]` placeholder in a delexicalized
/// response.
fn placeholder_slots(response: &str) -> Vec<String> {
    response
        .split_whitespace()
        .filter_map(|w| {
            w.strip_prefix("[value_")
                .and_then(|rest| rest.strip_suffix(']'))
                .map(str::to_string)
        })
        .collect()
}
