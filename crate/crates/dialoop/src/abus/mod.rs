//! Agenda-based user simulator: a stack of pending user acts, push/pop rules
//! reacting to the system act, template NLG for the utterance, and rule NLU
//! for reading delexicalized system responses.
//!
//! The simulator owns the live goal state of its dialog. Each step applies
//! the per-turn goal update, reacts to the system act (answering requests,
//! changing the goal after a no-offer, queueing booking details after an
//! offer), then pops a seeded number of items as this turn's user act.

pub mod nlg;
pub mod nlu;
pub mod templates;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dialog::act::{ActItem, DialogAct, Intent, GENERAL_DOMAIN};
use crate::dialog::goal::{ConstraintKind, GoalState, UserGoal};
use crate::rng::Rng;
use crate::tracking::{apply_goal_change, update_goal_state, GoalChangeEvent};
use crate::world::World;

pub use nlg::{system_nlg, template_nlg, Realized};
pub use nlu::{rule_nlu, SystemInverse};
pub use templates::{builtin_templates, TemplateError, TemplateTable};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbusConfig {
    /// Upper bound on items popped per turn; the count is sampled uniformly
    /// from 1..=max_pops.
    pub max_pops: usize,
    /// Goal changes tolerated per domain before the simulator abandons it.
    pub max_goal_changes: usize,
    /// Read system acts directly instead of applying rule NLU to responses.
    pub semantic: bool,
}

impl Default for AbusConfig {
    fn default() -> Self {
        AbusConfig { max_pops: 3, max_goal_changes: 3, semantic: false }
    }
}

/// Template table plus its precomputed inverse, shared across episodes.
#[derive(Clone)]
pub struct TemplateSet {
    pub table: Arc<TemplateTable>,
    pub inverse: Arc<SystemInverse>,
}

impl TemplateSet {
    pub fn new(table: TemplateTable) -> Result<Self, TemplateError> {
        let inverse = table.system_inverse()?;
        Ok(TemplateSet { table: Arc::new(table), inverse: Arc::new(inverse) })
    }

    pub fn builtin() -> Self {
        TemplateSet::new(builtin_templates()).expect("builtin inventory is unambiguous")
    }
}

/// What the system did last turn, as seen by the user side.
#[derive(Debug, Clone, Copy)]
pub enum SystemInput<'a> {
    /// Dialog opening: there is no system turn yet.
    Start,
    /// Delexicalized response text; rule NLU recovers the act.
    Response(&'a str),
    /// The system act itself (semantic mode).
    Act(&'a DialogAct),
}

/// One user turn produced by the simulator.
#[derive(Debug, Clone)]
pub struct UserTurn {
    /// The system act as the user understood it.
    pub sys_act: DialogAct,
    pub act: DialogAct,
    pub utterance: String,
    /// Items realized through generic fallback phrasing.
    pub fallbacks: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum AbusError {
    #[error("cannot initialize an agenda from an empty goal")]
    EmptyGoal,
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// The pending-act stack. The top is the next item to emit; `bye` sits at
/// the bottom from initialization and nothing is ever pushed beneath it.
#[derive(Debug, Clone, Default)]
pub struct Agenda {
    /// Bottom-to-top; the top of the stack is the last element.
    items: Vec<ActItem>,
}

impl Agenda {
    pub fn top_to_bottom(&self) -> impl Iterator<Item = &ActItem> {
        self.items.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn is_only_bye(&self) -> bool {
        self.items.len() == 1 && self.items[0].intent == Intent::Bye
    }

    /// Push to the top, first removing any item with the same
    /// (domain, intent, slot) so the stack never holds duplicates.
    fn push_top(&mut self, item: ActItem) {
        self.remove(&item.domain, item.intent, item.slot.as_deref());
        self.items.push(item);
    }

    fn remove(&mut self, domain: &str, intent: Intent, slot: Option<&str>) -> bool {
        let before = self.items.len();
        self.items
            .retain(|i| !(i.domain == domain && i.intent == intent && i.slot.as_deref() == slot));
        self.items.len() != before
    }

    fn remove_domain(&mut self, domain: &str) {
        self.items.retain(|i| i.domain != domain);
    }

    fn contains_inform_for(&self, domain: &str) -> bool {
        self.items.iter().any(|i| i.domain == domain && i.intent == Intent::Inform)
    }

    /// Pop up to `n` items off the top. Stops at the bye item: bye is only
    /// ever emitted alone, when nothing else is left.
    fn pop_turn(&mut self, n: usize) -> Vec<ActItem> {
        let mut out = Vec::new();
        while out.len() < n {
            match self.items.last() {
                Some(item) if item.intent == Intent::Bye => {
                    if out.is_empty() && self.items.len() == 1 {
                        out.push(self.items.pop().expect("nonempty"));
                    }
                    break;
                }
                Some(_) => out.push(self.items.pop().expect("nonempty")),
                None => break,
            }
        }
        out
    }
}

/// Build the initial agenda: for each goal domain in order, its inform
/// constraints, then booking constraints, then requests — the first domain's
/// first constraint ends up on top — with bye at the bottom. Slots follow
/// the ontology's canonical order, so equal goals give equal agendas.
pub fn init_agenda(goal: &UserGoal, world: &World) -> Result<Agenda, AbusError> {
    if goal.is_empty() {
        return Err(AbusError::EmptyGoal);
    }
    let lex = world.lexicon();
    let mut top_to_bottom: Vec<ActItem> = Vec::new();
    for dg in &goal.domains {
        let mut constraints: Vec<(&String, &(String, ConstraintKind))> =
            dg.constraints.iter().collect();
        constraints.sort_by_key(|(slot, _)| lex.slot_rank(&dg.domain, slot));
        for kind in [ConstraintKind::Inform, ConstraintKind::Book] {
            for (slot, (value, k)) in &constraints {
                if *k == kind {
                    top_to_bottom.push(ActItem::new(
                        dg.domain.clone(),
                        kind.intent(),
                        Some((*slot).clone()),
                        Some(value.clone()),
                    ));
                }
            }
        }
        let mut requests: Vec<&String> = dg.requests.iter().collect();
        requests.sort_by_key(|slot| lex.slot_rank(&dg.domain, slot));
        for slot in requests {
            top_to_bottom.push(ActItem::request(dg.domain.clone(), slot.clone()));
        }
    }
    top_to_bottom.push(ActItem::bye());
    top_to_bottom.reverse();
    Ok(Agenda { items: top_to_bottom })
}

/// The agenda-based user simulator for one dialog.
pub struct Abus {
    cfg: AbusConfig,
    templates: TemplateSet,
    agenda: Agenda,
    /// The goal as generated; never mutated.
    goal: UserGoal,
    /// The goal as currently wanted: original values overwritten by goal
    /// changes, abandoned domains removed.
    live_goal: UserGoal,
    goal_state: GoalState,
    last_act: DialogAct,
    context_domain: String,
    change_counts: BTreeMap<String, usize>,
    changes: Vec<GoalChangeEvent>,
    abandoned: Vec<String>,
    rng: Rng,
    /// 1-based index of the user turn being produced.
    turn: usize,
}

impl Abus {
    pub fn new(
        goal: UserGoal,
        world: &World,
        templates: TemplateSet,
        cfg: AbusConfig,
        rng: Rng,
    ) -> Result<Self, AbusError> {
        let agenda = init_agenda(&goal, world)?;
        let goal_state = GoalState::from_goal(&goal);
        let context_domain = goal.domains[0].domain.clone();
        Ok(Abus {
            cfg,
            templates,
            agenda,
            live_goal: goal.clone(),
            goal,
            goal_state,
            last_act: DialogAct::empty(),
            context_domain,
            change_counts: BTreeMap::new(),
            changes: Vec::new(),
            abandoned: Vec::new(),
            rng,
            turn: 0,
        })
    }

    /// The goal state at this user's current decision point (`g_t` after the
    /// per-turn update, including any goal change of this turn).
    pub fn goal_state(&self) -> &GoalState {
        &self.goal_state
    }

    pub fn goal(&self) -> &UserGoal {
        &self.goal
    }

    pub fn live_goal(&self) -> &UserGoal {
        &self.live_goal
    }

    pub fn changes(&self) -> &[GoalChangeEvent] {
        &self.changes
    }

    pub fn abandoned_domains(&self) -> &[String] {
        &self.abandoned
    }

    pub fn agenda(&self) -> &Agenda {
        &self.agenda
    }

    fn abandon(&mut self, domain: &str) {
        self.agenda.remove_domain(domain);
        self.goal_state.remove_domain(domain);
        self.live_goal.domains.retain(|dg| dg.domain != domain);
        self.abandoned.push(domain.to_string());
    }

    /// Produce the next user turn.
    pub fn step(&mut self, world: &World, input: SystemInput) -> UserTurn {
        let sys_act = match input {
            SystemInput::Start => DialogAct::empty(),
            SystemInput::Response(text) => {
                rule_nlu(text, &self.context_domain, &self.templates.inverse)
            }
            SystemInput::Act(act) => act.clone(),
        };
        self.turn += 1;

        if self.turn > 1 {
            self.goal_state = update_goal_state(&self.goal_state, &self.last_act, &sys_act);
            // Mirror the request removals: an answered request leaves the
            // stack even if it was never popped.
            for item in sys_act.items_with_intent(Intent::Inform) {
                if let Some(slot) = &item.slot {
                    self.agenda.remove(&item.domain, Intent::Request, Some(slot));
                }
            }
        }

        // Rules 1 and 2: answer system requests — with the live goal value
        // when the slot is a constraint (even one already conveyed), and
        // with "dontcare" for informable slots the goal says nothing about.
        for req in sys_act.items_with_intent(Intent::Request) {
            let Some(slot) = req.slot.clone() else { continue };
            let constraint = self
                .live_goal
                .domain(&req.domain)
                .and_then(|dg| dg.constraints.get(&slot))
                .cloned();
            match constraint {
                Some((value, kind)) => {
                    self.agenda.push_top(ActItem::new(
                        req.domain.clone(),
                        kind.intent(),
                        Some(slot.clone()),
                        Some(value.clone()),
                    ));
                    // Answering again means the slot is pending again.
                    self.goal_state
                        .domains
                        .entry(req.domain.clone())
                        .or_default()
                        .constraints
                        .insert(slot, (value, kind));
                }
                None => {
                    let informable =
                        world.domain(&req.domain).is_some_and(|d| d.is_informable(&slot));
                    if informable {
                        self.agenda.push_top(ActItem::inform(req.domain.clone(), slot, "dontcare"));
                    }
                }
            }
        }

        // Rule 3: a no-offer triggers a goal change; a domain out of changes
        // (or with nothing changeable) is abandoned.
        if sys_act.has_intent(Intent::Nooffer) {
            let domain = sys_act
                .items_with_intent(Intent::Nooffer)
                .map(|i| i.domain.clone())
                .next()
                .expect("has_intent checked");
            let spent = self.change_counts.get(&domain).copied().unwrap_or(0);
            if spent >= self.cfg.max_goal_changes || self.live_goal.domain(&domain).is_none() {
                self.abandon(&domain);
            } else {
                let filtered = DialogAct::from_items(
                    sys_act
                        .items()
                        .iter()
                        .filter(|i| i.intent == Intent::Nooffer && i.domain == domain)
                        .cloned(),
                );
                let event = apply_goal_change(
                    &mut self.goal_state,
                    &mut self.live_goal,
                    &filtered,
                    world,
                    self.turn,
                    &mut self.rng,
                );
                match event {
                    Some(ev) => {
                        *self.change_counts.entry(ev.domain.clone()).or_default() += 1;
                        self.agenda.remove(&ev.domain, Intent::Inform, Some(&ev.slot));
                        self.agenda.push_top(ActItem::inform(
                            ev.domain.clone(),
                            ev.slot.clone(),
                            ev.new_value.clone(),
                        ));
                        self.changes.push(ev);
                    }
                    None => self.abandon(&domain),
                }
            }
        }

        // Rule 5: an offer to book, once every search constraint of the
        // domain has been conveyed, pulls the booking details up the stack.
        for ob in sys_act.items_with_intent(Intent::Offerbook) {
            let domain =
                if ob.domain == GENERAL_DOMAIN { &self.context_domain } else { &ob.domain };
            if self.agenda.contains_inform_for(domain) {
                continue;
            }
            let Some(state) = self.goal_state.domain(domain) else { continue };
            let mut books: Vec<(String, String)> = state
                .constraints
                .iter()
                .filter(|(_, (_, k))| *k == ConstraintKind::Book)
                .map(|(slot, (value, _))| (slot.clone(), value.clone()))
                .collect();
            books.sort_by_key(|(slot, _)| world.lexicon().slot_rank(domain, slot));
            for (slot, value) in books.into_iter().rev() {
                self.agenda.push_top(ActItem::book(domain.clone(), slot, value));
            }
        }

        // Everything done: say goodbye.
        if self.goal_state.is_empty() {
            self.agenda.items.clear();
            return self.finish_turn(sys_act, vec![ActItem::bye()]);
        }

        // Nothing left to offer but the goal is not done (typically an
        // unanswered request): put the pending items back and ask again.
        if self.agenda.is_only_bye() {
            let mut pending: Vec<ActItem> = Vec::new();
            for dg in &self.live_goal.domains {
                let Some(state) = self.goal_state.domain(&dg.domain) else { continue };
                let mut items: Vec<ActItem> = state
                    .constraints
                    .iter()
                    .map(|(slot, (value, kind))| {
                        ActItem::new(
                            dg.domain.clone(),
                            kind.intent(),
                            Some(slot.clone()),
                            Some(value.clone()),
                        )
                    })
                    .chain(state.requests.iter().map(|s| ActItem::request(dg.domain.clone(), s.clone())))
                    .collect();
                items.sort_by_key(|i| {
                    (
                        i.intent.rank(),
                        i.slot.as_deref().map_or(usize::MAX, |s| {
                            world.lexicon().slot_rank(&dg.domain, s)
                        }),
                    )
                });
                pending.extend(items);
            }
            for item in pending.into_iter().rev() {
                self.agenda.push_top(item);
            }
        }

        let n = self.rng.gen_range(1..=self.cfg.max_pops.max(1));
        let items = self.agenda.pop_turn(n);
        debug_assert!(!items.is_empty(), "agenda must yield at least one item");
        self.finish_turn(sys_act, items)
    }

    fn finish_turn(&mut self, sys_act: DialogAct, items: Vec<ActItem>) -> UserTurn {
        let act = DialogAct::from_items(items);
        let realized = template_nlg(&act, &self.templates.table, &mut self.rng);
        if let Some(item) = act.items().iter().rev().find(|i| i.domain != GENERAL_DOMAIN) {
            self.context_domain = item.domain.clone();
        }
        self.last_act = act.clone();
        self.check_invariant();
        UserTurn { sys_act, act, utterance: realized.text, fallbacks: realized.fallbacks }
    }

    /// Stack items are always live goal-state items, plus protocol items
    /// (bye) and "dontcare" answers.
    fn check_invariant(&self) {
        if cfg!(debug_assertions) {
            for item in &self.agenda.items {
                if item.intent == Intent::Bye || item.value.as_deref() == Some("dontcare") {
                    continue;
                }
                let ok = match item.intent {
                    Intent::Inform | Intent::Book => {
                        let slot = item.slot.as_deref().unwrap_or("");
                        self.goal_state
                            .constraint(&item.domain, slot)
                            .is_some_and(|(v, k)| {
                                Some(v.as_str()) == item.value.as_deref()
                                    && k.intent() == item.intent
                            })
                    }
                    Intent::Request => {
                        self.goal_state.has_request(&item.domain, item.slot.as_deref().unwrap_or(""))
                    }
                    _ => false,
                };
                assert!(ok, "agenda item outside the live goal state: {item:?}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::goal::DomainGoal;
    use crate::rng;
    use crate::world::builtin_world;

    fn simple_goal() -> UserGoal {
        let mut dg = DomainGoal::new("restaurant");
        dg.constraints.insert("area".into(), ("north".into(), ConstraintKind::Inform));
        dg.requests.insert("phone".into());
        UserGoal { domains: vec![dg] }
    }

    fn booking_goal() -> UserGoal {
        let mut dg = DomainGoal::new("restaurant");
        dg.constraints.insert("food".into(), ("swedish".into(), ConstraintKind::Inform));
        dg.constraints.insert("day".into(), ("tuesday".into(), ConstraintKind::Book));
        dg.constraints.insert("time".into(), ("18:00".into(), ConstraintKind::Book));
        dg.requests.insert("phone".into());
        UserGoal { domains: vec![dg] }
    }

    fn abus(goal: UserGoal, label: &str) -> Abus {
        let world = builtin_world();
        Abus::new(goal, &world, TemplateSet::builtin(), AbusConfig::default(), rng::stream(9, label))
            .unwrap()
    }

    #[test]
    fn agenda_layout_matches_the_documented_ordering() {
        let world = builtin_world();
        let agenda = init_agenda(&simple_goal(), &world).unwrap();
        let layout: Vec<_> = agenda
            .top_to_bottom()
            .map(|i| (i.intent, i.slot.as_deref().unwrap_or("")))
            .collect();
        assert_eq!(
            layout,
            vec![(Intent::Inform, "area"), (Intent::Request, "phone"), (Intent::Bye, "")]
        );

        // Two-domain goal: the first domain's items sit entirely above.
        let mut goal = simple_goal();
        let mut hotel = DomainGoal::new("hotel");
        hotel.constraints.insert("type".into(), ("hostel".into(), ConstraintKind::Inform));
        hotel.requests.insert("address".into());
        goal.domains.push(hotel);
        let agenda = init_agenda(&goal, &world).unwrap();
        let domains: Vec<_> = agenda.top_to_bottom().map(|i| i.domain.as_str()).collect();
        assert_eq!(domains, vec!["restaurant", "restaurant", "hotel", "hotel", "general"]);

        // Equal goals, equal agendas.
        let again = init_agenda(&goal, &world).unwrap();
        assert_eq!(agenda.items, again.items);

        assert!(matches!(
            init_agenda(&UserGoal::default(), &world),
            Err(AbusError::EmptyGoal)
        ));
    }

    #[test]
    fn first_turn_pops_the_initial_agenda_top() {
        let world = builtin_world();
        let mut us = abus(simple_goal(), "first-turn");
        let turn = us.step(&world, SystemInput::Start);
        assert_eq!(turn.act.items()[0], ActItem::inform("restaurant", "area", "north"));
        assert_eq!(turn.fallbacks, 0);
        assert!(turn.utterance.contains("north"), "{}", turn.utterance);
    }

    #[test]
    fn rule_1_answers_a_request_for_a_goal_slot() {
        let world = builtin_world();
        let mut us = abus(simple_goal(), "rule1");
        us.step(&world, SystemInput::Start);
        let sys = DialogAct::from_items([ActItem::request("restaurant", "area")]);
        let turn = us.step(&world, SystemInput::Act(&sys));
        assert!(
            turn.act.items().contains(&ActItem::inform("restaurant", "area", "north")),
            "{:?}",
            turn.act
        );
    }

    #[test]
    fn rule_2_answers_an_off_goal_request_with_dontcare() {
        let world = builtin_world();
        let mut us = abus(simple_goal(), "rule2");
        us.step(&world, SystemInput::Start);
        let sys = DialogAct::from_items([ActItem::request("restaurant", "pricerange")]);
        let turn = us.step(&world, SystemInput::Act(&sys));
        assert!(
            turn.act.items().contains(&ActItem::inform("restaurant", "pricerange", "dontcare")),
            "{:?}",
            turn.act
        );
        assert!(!turn.utterance.contains("dontcare"), "{}", turn.utterance);
    }

    #[test]
    fn rule_3_reinforms_with_a_changed_value_then_abandons() {
        let world = builtin_world();
        let mut us = abus(simple_goal(), "rule3");
        us.step(&world, SystemInput::Start);
        let nooffer = DialogAct::from_items([ActItem::nooffer("restaurant", "area")]);

        let turn = us.step(&world, SystemInput::Act(&nooffer));
        let reinform = turn
            .act
            .items()
            .iter()
            .find(|i| i.intent == Intent::Inform && i.slot.as_deref() == Some("area"))
            .expect("re-informs the changed slot");
        assert_ne!(reinform.value.as_deref(), Some("north"));
        assert_eq!(us.changes().len(), 1);
        assert_eq!(
            us.live_goal().domain("restaurant").unwrap().constraints["area"].0,
            reinform.value.clone().unwrap()
        );

        // Exhaust the change budget; the next no-offer abandons the domain.
        let budget = AbusConfig::default().max_goal_changes;
        for _ in 1..budget {
            us.step(&world, SystemInput::Act(&nooffer));
        }
        assert_eq!(us.changes().len(), budget);
        let turn = us.step(&world, SystemInput::Act(&nooffer));
        assert_eq!(us.abandoned_domains(), &["restaurant".to_string()]);
        // The only domain is gone, so the goal is done: bye.
        assert!(turn.act.has_intent(Intent::Bye));
        assert!(us.goal_state().is_empty());
    }

    #[test]
    fn rule_5_queues_booking_details_after_an_offer() {
        let world = builtin_world();
        let mut us = abus(booking_goal(), "rule5");
        // Convey constraints until the inform is out (max 3 pops covers it).
        us.step(&world, SystemInput::Start);
        let sys = DialogAct::from_items([
            ActItem::inform("restaurant", "name", "the jade fork"),
            ActItem::offerbook("restaurant"),
        ]);
        let turn = us.step(&world, SystemInput::Act(&sys));
        let books: Vec<_> = turn
            .act
            .items()
            .iter()
            .filter(|i| i.intent == Intent::Book)
            .map(|i| i.slot.clone().unwrap())
            .collect();
        assert!(!books.is_empty(), "booking details queued: {:?}", turn.act);
        assert!(books.contains(&"day".to_string()) || books.contains(&"time".to_string()));
    }

    #[test]
    fn reasks_unanswered_requests_instead_of_stalling() {
        let world = builtin_world();
        let mut us = abus(simple_goal(), "reask");
        us.step(&world, SystemInput::Start); // conveys area, maybe asks phone
        // System ignores the user entirely for several turns.
        let noise = DialogAct::from_items([ActItem::reqmore()]);
        for _ in 0..4 {
            let turn = us.step(&world, SystemInput::Act(&noise));
            assert!(
                turn.act.items().contains(&ActItem::request("restaurant", "phone")),
                "keeps asking: {:?}",
                turn.act
            );
        }
    }

    #[test]
    fn nl_mode_matches_semantic_mode_on_template_exact_responses() {
        let world = builtin_world();
        let templates = TemplateSet::builtin();
        let sys_acts = vec![
            DialogAct::from_items([ActItem::request("restaurant", "pricerange")]),
            DialogAct::from_items([
                ActItem::inform("restaurant", "name", "the jade fork"),
                ActItem::offerbook("restaurant"),
            ]),
            DialogAct::from_items([ActItem::inform("restaurant", "phone", "01223 111111")]),
            DialogAct::from_items([ActItem::bye()]),
        ];

        let run = |semantic: bool| -> Vec<DialogAct> {
            let cfg = AbusConfig { semantic, ..AbusConfig::default() };
            let mut us = Abus::new(
                booking_goal(),
                &world,
                templates.clone(),
                cfg,
                rng::stream(21, "mode-compare"),
            )
            .unwrap();
            let mut sys_rng = rng::stream(22, "mode-compare-sys");
            let mut acts = vec![us.step(&world, SystemInput::Start).act];
            for sys in &sys_acts {
                let turn = if semantic {
                    us.step(&world, SystemInput::Act(sys))
                } else {
                    let text = system_nlg(sys, &templates.table, &mut sys_rng).text;
                    us.step(&world, SystemInput::Response(&text))
                };
                acts.push(turn.act);
            }
            acts
        };

        assert_eq!(run(true), run(false));
    }

    #[test]
    fn full_scripted_dialog_reaches_bye_with_empty_goal() {
        let world = builtin_world();
        let mut us = abus(booking_goal(), "scripted");
        let mut turn = us.step(&world, SystemInput::Start);
        let mut saw_bye = false;
        for _ in 0..20 {
            // A minimal faithful system: answer every request, offer after
            // informs, book when details arrive.
            let mut sys = DialogAct::empty();
            for item in turn.act.items() {
                match item.intent {
                    Intent::Inform => {}
                    Intent::Book => {}
                    Intent::Request => {
                        sys.push(ActItem::inform(
                            item.domain.clone(),
                            item.slot.clone().unwrap(),
                            "x",
                        ));
                    }
                    Intent::Bye => saw_bye = true,
                    _ => {}
                }
            }
            if saw_bye {
                break;
            }
            if turn.act.items().iter().any(|i| i.intent == Intent::Book) {
                sys.push(ActItem::book("restaurant", "ref", "ref-0a1b"));
            } else if turn.act.items().iter().any(|i| i.intent == Intent::Inform) {
                sys.push(ActItem::inform("restaurant", "name", "the jade fork"));
                sys.push(ActItem::offerbook("restaurant"));
            }
            if sys.is_empty() {
                sys.push(ActItem::reqmore());
            }
            turn = us.step(&world, SystemInput::Act(&sys));
        }
        assert!(saw_bye, "dialog concluded");
        assert!(us.goal_state().is_empty());
    }
}
