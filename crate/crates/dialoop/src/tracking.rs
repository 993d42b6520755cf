//! Goal-state tracking: the per-turn update rule, goal changes after a
//! no-offer, backward annotation from user acts, and completion measures.
//!
//! The update rule is slot-based and value-free: a constraint leaves the
//! goal state when the user has conveyed that slot (whatever value they
//! gave), and a request leaves when the user's reading of the system reply
//! says the slot was provided.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dialog::act::{DialogAct, Intent};
use crate::dialog::goal::{ConstraintKind, GoalState, UserGoal};
use crate::rng;
use crate::world::World;

/// One mid-dialog constraint rewrite, triggered by a system no-offer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalChangeEvent {
    pub turn: usize,
    pub domain: String,
    pub slot: String,
    pub old_value: String,
    pub new_value: String,
}

/// Compute `g_t` from `g_{t-1}`: drop the constraint slots the user conveyed
/// in the previous turn (`a_prev_user`, inform and book items) and the
/// request slots the system answered according to the user's own reading of
/// the reply (`b_user`, the inform items it extracted from `r_{t-1}`).
pub fn update_goal_state(
    g_prev: &GoalState,
    a_prev_user: &DialogAct,
    b_user: &DialogAct,
) -> GoalState {
    let mut g = g_prev.clone();
    for item in a_prev_user {
        if !matches!(item.intent, Intent::Inform | Intent::Book) {
            continue;
        }
        if let Some(slot) = &item.slot {
            g.remove_constraint(&item.domain, slot);
        }
    }
    for item in b_user.items_with_intent(Intent::Inform) {
        if let Some(slot) = &item.slot {
            g.remove_request(&item.domain, slot);
        }
    }
    g
}

/// React to a no-offer: pick one of the rejected constraint slots uniformly
/// and rewrite its value to a different legal one. Candidates come from the
/// live goal, not the goal state: by the time a no-offer arrives the
/// offending constraint has usually been conveyed and has left the state
/// already. The new value is written to both — into `live_goal` as the value
/// the user now wants, and into `g` because it is pending conveyance again.
/// Falls back to any inform constraint of the no-offer's domains when the
/// act names no usable slot; returns `None` when nothing can change (caller
/// abandons the domain).
pub fn apply_goal_change(
    g: &mut GoalState,
    live_goal: &mut UserGoal,
    nooffer: &DialogAct,
    world: &World,
    turn: usize,
    rng: &mut rng::Rng,
) -> Option<GoalChangeEvent> {
    let is_inform_constraint = |d: &str, s: &str| {
        live_goal
            .domain(d)
            .and_then(|dg| dg.constraints.get(s))
            .is_some_and(|(_, k)| *k == ConstraintKind::Inform)
    };
    let named: Vec<(String, String)> = nooffer
        .items_with_intent(Intent::Nooffer)
        .filter_map(|item| item.slot.as_ref().map(|s| (item.domain.clone(), s.clone())))
        .filter(|(d, s)| is_inform_constraint(d, s))
        .collect();
    let mut candidates = named;
    if candidates.is_empty() {
        let mut domains: Vec<&str> = nooffer
            .items_with_intent(Intent::Nooffer)
            .map(|item| item.domain.as_str())
            .collect();
        domains.dedup();
        for domain in domains {
            if let Some(dg) = live_goal.domain(domain) {
                for (slot, (_, kind)) in &dg.constraints {
                    if *kind == ConstraintKind::Inform {
                        candidates.push((domain.to_string(), slot.clone()));
                    }
                }
            }
        }
    }
    candidates.shuffle(rng);

    for (domain, slot) in candidates {
        let (old_value, _) = live_goal.domain(&domain)?.constraints.get(&slot)?.clone();
        let values: Vec<&String> = world
            .domain(&domain)
            .and_then(|d| d.slot(&slot))
            .map(|s| s.values.iter().filter(|v| **v != old_value).collect())
            .unwrap_or_default();
        if values.is_empty() {
            continue;
        }
        let new_value = values[rng.gen_range(0..values.len())].clone();
        live_goal
            .domain_mut(&domain)
            .expect("candidate domain exists")
            .constraints
            .insert(slot.clone(), (new_value.clone(), ConstraintKind::Inform));
        g.domains
            .entry(domain.clone())
            .or_default()
            .constraints
            .insert(slot.clone(), (new_value.clone(), ConstraintKind::Inform));
        return Some(GoalChangeEvent { turn, domain, slot, old_value, new_value });
    }
    None
}

/// Reconstruct per-turn goal states from user acts alone, walking backward:
/// `g_t` is everything the user conveys from turn `t` on. When the same slot
/// is informed twice with different values (a goal change), the earlier
/// turn's value wins for the turns before the change.
pub fn annotate_goal_states(user_acts: &[DialogAct]) -> Vec<GoalState> {
    let mut states = vec![GoalState::default(); user_acts.len()];
    let mut acc = GoalState::default();
    for (t, act) in user_acts.iter().enumerate().rev() {
        acc.absorb_act(act);
        states[t] = acc.clone();
    }
    states
}

/// Replay the update rule over a finished dialog: the per-turn states
/// `g_1..g_T` starting from the stored goal, plus the state after the final
/// turn (empty exactly when the user finished everything).
pub fn replay_goal_states(
    goal: &UserGoal,
    turns: &[(DialogAct, DialogAct)],
) -> (Vec<GoalState>, GoalState) {
    let mut states = Vec::with_capacity(turns.len());
    let mut g = GoalState::from_goal(goal);
    for (user_act, sys_act) in turns {
        states.push(g.clone());
        g = update_goal_state(&g, user_act, sys_act);
    }
    (states, g)
}

/// Fraction of the initial goal items no longer pending. Empty goals count
/// as complete.
pub fn completion_proportion(initial: &GoalState, current: &GoalState) -> f64 {
    let total = initial.item_count();
    if total == 0 {
        return 1.0;
    }
    let remaining = current.item_count().min(total);
    (total - remaining) as f64 / total as f64
}
