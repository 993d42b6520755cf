//! The generative user simulator. A turn runs NLU first (decode the
//! perceived system act b_u from the previous response), folds b_u into the
//! goal state, then decodes the user act and utterance conditioned on
//! (r_prev, b_u, g). The goal-state update is split around the turn: request
//! slots leave when the perceived reply answers them (before acting), and
//! constraint slots leave once this turn's act conveys them (after acting) —
//! together exactly the per-turn update rule.
//!
//! The `WithoutGst` ablation never updates: conditioning uses the initial
//! goal at every turn.

use serde::{Deserialize, Serialize};

use crate::dialog::act::{DialogAct, Intent};
use crate::dialog::goal::{GoalState, UserGoal};
use crate::dialog::spans::{self};
use crate::neural::decode::{beam_sample, greedy};
use crate::neural::{GenerativeModel, Vocab};
use crate::rng::Rng;
use crate::tracking::{apply_goal_change, update_goal_state, GoalChangeEvent};
use crate::world::World;

use super::seqs::{us_context, SegTokens};
use super::DecodeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GusVariant {
    WithGst,
    WithoutGst,
}

pub struct GusAgent {
    pub model: GenerativeModel,
    pub vocab: Vocab,
    pub seg: SegTokens,
    pub decode: DecodeConfig,
    pub variant: GusVariant,
    /// Goal changes tolerated per domain before the simulator abandons it;
    /// matches the agenda-based simulator so the two are comparable partners.
    pub max_goal_changes: usize,
}

/// Per-episode mutable state. The agent itself stays immutable during
/// rollout; everything a dialog mutates lives here.
#[derive(Debug, Clone)]
pub struct GusSession {
    /// The goal as currently wanted (values rewritten by goal changes,
    /// abandoned domains removed).
    pub live_goal: UserGoal,
    /// Carried goal state: g after this turn's perception and conveyance.
    pub goal_state: GoalState,
    g0: GoalState,
    last_act: DialogAct,
    change_counts: std::collections::BTreeMap<String, usize>,
    pub changes: Vec<GoalChangeEvent>,
    pub abandoned: Vec<String>,
    /// 1-based index of the user turn being produced next.
    pub turn: usize,
}

/// One user turn.
#[derive(Debug, Clone)]
pub struct UsStep {
    /// The perceived system act decoded from r_prev.
    pub b_u: DialogAct,
    /// The goal state the act generation was conditioned on (g_t).
    pub goal_state: GoalState,
    pub act: DialogAct,
    pub utterance: String,
    pub change: Option<GoalChangeEvent>,
    pub truncated: bool,
    pub skipped_tokens: usize,
}

impl GusAgent {
    pub fn new(
        model: GenerativeModel,
        vocab: Vocab,
        decode: DecodeConfig,
        variant: GusVariant,
    ) -> Self {
        assert!(
            decode.max_sequence_len() <= model.cfg.context,
            "decode budgets ({}) exceed the model context ({})",
            decode.max_sequence_len(),
            model.cfg.context
        );
        assert_eq!(model.cfg.vocab, vocab.len(), "model and vocabulary disagree on size");
        let seg = SegTokens::new(&vocab);
        GusAgent { model, vocab, seg, decode, variant, max_goal_changes: 3 }
    }

    pub fn start_session(&self, goal: &UserGoal) -> GusSession {
        let g0 = GoalState::from_goal(goal);
        GusSession {
            live_goal: goal.clone(),
            goal_state: g0.clone(),
            g0,
            last_act: DialogAct::empty(),
            change_counts: std::collections::BTreeMap::new(),
            changes: Vec::new(),
            abandoned: Vec::new(),
            turn: 1,
        }
    }

    /// One user turn. `r_prev` is `None` exactly at the dialog opening.
    pub fn us_turn(
        &self,
        sess: &mut GusSession,
        r_prev: Option<&str>,
        world: &World,
        rng: &mut Rng,
    ) -> UsStep {
        let lex = world.lexicon();
        let cfg = &self.decode;
        let (context, mut truncated) = us_context(&self.vocab, &self.seg, r_prev, cfg);

        // Stage one: perceive the system reply.
        let mut prefix = context.clone();
        prefix.push(self.seg.sos_bu);
        let out = greedy(&self.model, &prefix, self.seg.eos_bu, cfg.act_budget)
            .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let (b_u, mut skipped) = spans::parse_act(&self.vocab.decode(&out.tokens));

        // Fold the perception into the goal state. Nothing is perceived at
        // the opening turn; the ablation never updates at all.
        let change = if self.variant == GusVariant::WithGst && r_prev.is_some() {
            self.perceive(sess, &b_u, world, rng)
        } else {
            None
        };
        // Nothing left to want: end the dialog instead of sampling an act.
        // The ablation's carried state never changes, so for it this fires
        // only on an initially empty goal.
        if sess.goal_state.is_empty() {
            let (act, utterance) = Self::forced_bye();
            sess.last_act = act.clone();
            sess.turn += 1;
            return UsStep {
                b_u,
                goal_state: GoalState::default(),
                act,
                utterance,
                change,
                truncated,
                skipped_tokens: skipped,
            };
        }
        let g = match self.variant {
            GusVariant::WithGst => sess.goal_state.clone(),
            GusVariant::WithoutGst => sess.g0.clone(),
        };

        // Stage two: act, then utterance, conditioned on (r_prev, b_u, g).
        let mut prefix = context;
        prefix.push(self.seg.sos_bu);
        prefix.extend(self.vocab.encode(&spans::serialize_act(&b_u, lex)));
        prefix.push(self.seg.eos_bu);
        prefix.push(self.seg.sos_g);
        prefix.extend(self.vocab.encode(&spans::serialize_goal_state(&g, lex)));
        prefix.push(self.seg.eos_g);
        prefix.push(self.seg.sos_a);
        let out = if cfg.act_beam {
            beam_sample(&self.model, &prefix, self.seg.eos_a, cfg.act_budget, cfg.beam_width, rng)
        } else {
            greedy(&self.model, &prefix, self.seg.eos_a, cfg.act_budget)
        }
        .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let (mut act, s) = spans::parse_act(&self.vocab.decode(&out.tokens));
        skipped += s;
        act.canonicalize(|d| lex.domain_rank(d), |d, sl| lex.slot_rank(d, sl));

        prefix.extend(self.vocab.encode(&spans::serialize_act(&act, lex)));
        prefix.push(self.seg.eos_a);
        prefix.push(self.seg.sos_u);
        let out = greedy(&self.model, &prefix, self.seg.eos_u, cfg.utterance_budget)
            .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let utterance = self.vocab.decode(&out.tokens);

        // Conveyed constraints leave the carried state once acted on.
        if self.variant == GusVariant::WithGst {
            sess.goal_state = update_goal_state(&sess.goal_state, &act, &DialogAct::empty());
        }
        sess.last_act = act.clone();
        sess.turn += 1;

        UsStep { b_u, goal_state: g, act, utterance, change, truncated, skipped_tokens: skipped }
    }

    /// Apply the perception half of the goal-state update: requests the
    /// perceived reply answered leave the state; a perceived no-offer
    /// triggers one goal change (or abandonment once the budget is spent).
    /// Public so the update rule is testable without a trained model.
    pub fn perceive(
        &self,
        sess: &mut GusSession,
        b_u: &DialogAct,
        world: &World,
        rng: &mut Rng,
    ) -> Option<GoalChangeEvent> {
        sess.goal_state = update_goal_state(&sess.goal_state, &DialogAct::empty(), b_u);

        if !b_u.has_intent(Intent::Nooffer) {
            return None;
        }
        let domain = b_u
            .items_with_intent(Intent::Nooffer)
            .map(|i| i.domain.clone())
            .next()
            .expect("has_intent checked");
        let spent = sess.change_counts.get(&domain).copied().unwrap_or(0);
        if spent >= self.max_goal_changes || sess.live_goal.domain(&domain).is_none() {
            abandon(sess, &domain);
            return None;
        }
        let filtered = DialogAct::from_items(
            b_u.items()
                .iter()
                .filter(|i| i.intent == Intent::Nooffer && i.domain == domain)
                .cloned(),
        );
        let event = apply_goal_change(
            &mut sess.goal_state,
            &mut sess.live_goal,
            &filtered,
            world,
            sess.turn,
            rng,
        );
        match event {
            Some(ev) => {
                *sess.change_counts.entry(ev.domain.clone()).or_default() += 1;
                sess.changes.push(ev.clone());
                Some(ev)
            }
            None => {
                abandon(sess, &domain);
                None
            }
        }
    }

    /// The canned final turn the episode driver emits when the goal state
    /// empties before the user speaks.
    pub fn forced_bye() -> (DialogAct, String) {
        (DialogAct::from_items([crate::dialog::act::ActItem::bye()]), "thank you , goodbye .".to_string())
    }
}

fn abandon(sess: &mut GusSession, domain: &str) {
    sess.goal_state.remove_domain(domain);
    sess.live_goal.domains.retain(|dg| dg.domain != domain);
    sess.abandoned.push(domain.to_string());
}
