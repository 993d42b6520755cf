//! User goals and goal states.
//!
//! A [`UserGoal`] is the fixed (except for goal change) set of constraints
//! and requests that motivates a dialog. A [`GoalState`] is the uncompleted
//! remainder of the goal at some turn; it shrinks as the dialog progresses.

use crate::dialog::act::{ActItem, DialogAct, Intent};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Whether a constraint is a plain search constraint or a booking detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Inform,
    Book,
}

impl ConstraintKind {
    pub fn intent(self) -> Intent {
        match self {
            ConstraintKind::Inform => Intent::Inform,
            ConstraintKind::Book => Intent::Book,
        }
    }
}

/// One domain's slice of a user goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainGoal {
    pub domain: String,
    /// slot -> (value, kind); iteration order is the slot's lexical order,
    /// canonical ordering is applied at serialization time.
    pub constraints: BTreeMap<String, (String, ConstraintKind)>,
    pub requests: BTreeSet<String>,
    /// Set by the goal generator: whether the constraints matched at least
    /// one database entity at generation time.
    pub satisfiable: bool,
}

impl DomainGoal {
    pub fn new(domain: impl Into<String>) -> Self {
        DomainGoal {
            domain: domain.into(),
            constraints: BTreeMap::new(),
            requests: BTreeSet::new(),
            satisfiable: true,
        }
    }

    /// Search constraints only (kind == Inform), as used for DB queries.
    pub fn inform_constraints(&self) -> impl Iterator<Item = (&str, &str)> {
        self.constraints
            .iter()
            .filter(|(_, (_, k))| *k == ConstraintKind::Inform)
            .map(|(s, (v, _))| (s.as_str(), v.as_str()))
    }

    pub fn item_count(&self) -> usize {
        self.constraints.len() + self.requests.len()
    }
}

/// A complete user goal over one or more domains. Domain order is the
/// generation order and drives the agenda layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserGoal {
    pub domains: Vec<DomainGoal>,
}

impl UserGoal {
    pub fn domain(&self, name: &str) -> Option<&DomainGoal> {
        self.domains.iter().find(|d| d.domain == name)
    }

    pub fn domain_mut(&mut self, name: &str) -> Option<&mut DomainGoal> {
        self.domains.iter_mut().find(|d| d.domain == name)
    }

    pub fn domain_names(&self) -> impl Iterator<Item = &str> {
        self.domains.iter().map(|d| d.domain.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.domains.iter().all(|d| d.item_count() == 0)
    }

    /// Total item count (constraints + requests over all domains).
    pub fn item_count(&self) -> usize {
        self.domains.iter().map(|d| d.item_count()).sum()
    }
}

/// Per-domain remainder inside a [`GoalState`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainState {
    /// slot -> (value, kind)
    pub constraints: BTreeMap<String, (String, ConstraintKind)>,
    pub requests: BTreeSet<String>,
}

impl DomainState {
    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty() && self.requests.is_empty()
    }
}

/// The uncompleted part of the user goal at some turn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalState {
    pub domains: BTreeMap<String, DomainState>,
}

impl GoalState {
    /// The full goal state at turn 1: every constraint and request of the
    /// goal is still pending.
    pub fn from_goal(goal: &UserGoal) -> Self {
        let mut state = GoalState::default();
        for dg in &goal.domains {
            if dg.item_count() == 0 {
                continue;
            }
            let ds = state.domains.entry(dg.domain.clone()).or_default();
            for (slot, (value, kind)) in &dg.constraints {
                ds.constraints.insert(slot.clone(), (value.clone(), *kind));
            }
            for slot in &dg.requests {
                ds.requests.insert(slot.clone());
            }
        }
        state
    }

    pub fn is_empty(&self) -> bool {
        self.domains.values().all(|d| d.is_empty())
    }

    pub fn item_count(&self) -> usize {
        self.domains.values().map(|d| d.constraints.len() + d.requests.len()).sum()
    }

    pub fn domain(&self, name: &str) -> Option<&DomainState> {
        self.domains.get(name)
    }

    pub fn constraint(&self, domain: &str, slot: &str) -> Option<&(String, ConstraintKind)> {
        self.domains.get(domain).and_then(|d| d.constraints.get(slot))
    }

    pub fn has_request(&self, domain: &str, slot: &str) -> bool {
        self.domains.get(domain).is_some_and(|d| d.requests.contains(slot))
    }

    pub fn remove_constraint(&mut self, domain: &str, slot: &str) -> bool {
        let removed = self
            .domains
            .get_mut(domain)
            .is_some_and(|d| d.constraints.remove(slot).is_some());
        self.prune(domain);
        removed
    }

    pub fn remove_request(&mut self, domain: &str, slot: &str) -> bool {
        let removed = self
            .domains
            .get_mut(domain)
            .is_some_and(|d| d.requests.remove(slot));
        self.prune(domain);
        removed
    }

    pub fn remove_domain(&mut self, domain: &str) -> bool {
        self.domains.remove(domain).is_some()
    }

    fn prune(&mut self, domain: &str) {
        if self.domains.get(domain).is_some_and(|d| d.is_empty()) {
            self.domains.remove(domain);
        }
    }

    /// Flatten into goal items, in deterministic order.
    pub fn items(&self) -> Vec<ActItem> {
        let mut out = Vec::new();
        for (domain, ds) in &self.domains {
            for (slot, (value, kind)) in &ds.constraints {
                out.push(ActItem::new(
                    domain.clone(),
                    kind.intent(),
                    Some(slot.clone()),
                    Some(value.clone()),
                ));
            }
            for slot in &ds.requests {
                out.push(ActItem::request(domain.clone(), slot.clone()));
            }
        }
        out
    }

    /// Insert the goal-relevant items of a user act (inform/book become
    /// constraints, request becomes a request). Used by backward annotation,
    /// which walks turns from last to first: on a conflicting value for an
    /// existing `(domain, slot)` constraint the incoming item wins, because
    /// it comes from the earlier turn. Returns the number of conflicts.
    pub fn absorb_act(&mut self, act: &DialogAct) -> usize {
        let mut conflicts = 0;
        for item in act {
            let (Some(slot), intent) = (&item.slot, item.intent) else { continue };
            match intent {
                Intent::Inform | Intent::Book => {
                    let Some(value) = &item.value else { continue };
                    if value == "dontcare" {
                        // A "dontcare" is an answer to a system question,
                        // not a goal item: goals never contain it.
                        continue;
                    }
                    let kind = if intent == Intent::Book {
                        ConstraintKind::Book
                    } else {
                        ConstraintKind::Inform
                    };
                    let ds = self.domains.entry(item.domain.clone()).or_default();
                    if let Some((existing, _)) = ds.constraints.get(slot) {
                        if existing != value {
                            conflicts += 1;
                        }
                    }
                    ds.constraints.insert(slot.clone(), (value.clone(), kind));
                }
                Intent::Request => {
                    let ds = self.domains.entry(item.domain.clone()).or_default();
                    ds.requests.insert(slot.clone());
                }
                _ => {}
            }
        }
        conflicts
    }
}
