//! One dialog between a user-side and a system-side agent. Both sides sit
//! behind small traits so neural agents, the rule simulator, the scripted
//! wizard, and test stubs all drive the same loop, which shares its
//! termination rule with the corpus generator.

use crate::abus::{Abus, AbusConfig, AbusError, SystemInput, TemplateSet};
use crate::agents::{DsAgent, GusAgent, GusSession};
use crate::corpus_gen::termination_check;
use crate::dialog::act::DialogAct;
use crate::dialog::goal::{GoalState, UserGoal};
use crate::dialog::state::BeliefState;
use crate::dialog::turn::{Dialog, TerminationReason, Turn};
use crate::rng::Rng;
use crate::wizard::Wizard;
use crate::world::World;

/// What the user side contributes to a turn.
pub struct UserStep {
    /// The goal state the act was conditioned on (recorded as `g_t`).
    pub goal_state: GoalState,
    pub act: DialogAct,
    pub utterance: String,
}

pub trait UserSim {
    /// `sys_act`/`response` are the previous system turn, `None` at t = 1.
    fn user_turn(
        &mut self,
        world: &World,
        sys_act: Option<&DialogAct>,
        response: Option<&str>,
        rng: &mut Rng,
    ) -> UserStep;
    /// The goal as finally wanted: change values applied, abandoned domains
    /// removed.
    fn final_goal(&self) -> UserGoal;
    fn abandoned_domains(&self) -> Vec<String>;
}

/// What the system side contributes to a turn.
pub struct SystemStep {
    pub belief: BeliefState,
    pub db_bucket: u8,
    pub act: DialogAct,
    pub response: String,
}

pub trait SystemSim {
    fn system_turn(
        &mut self,
        world: &World,
        user_act: &DialogAct,
        user_utt: &str,
        rng: &mut Rng,
    ) -> SystemStep;
}

/// A finished rollout. `dialog.goal` stores the goal as assigned (matching
/// the corpus convention); judging and rewards want `final_goal`.
pub struct Episode {
    pub dialog: Dialog,
    pub final_goal: UserGoal,
    pub abandoned: Vec<String>,
}

pub fn run_episode(
    us: &mut dyn UserSim,
    ds: &mut dyn SystemSim,
    world: &World,
    goal: &UserGoal,
    max_turns: usize,
    id: String,
    us_rng: &mut Rng,
    ds_rng: &mut Rng,
) -> Episode {
    assert!(max_turns >= 1, "an episode needs at least one turn");
    let mut turns: Vec<Turn> = Vec::new();
    let mut termination = TerminationReason::MaxTurns;

    for t in 1..=max_turns {
        let (sys_act_prev, response_prev) = match turns.last() {
            Some(prev) => (Some(&prev.sys_act), Some(prev.response.as_str())),
            None => (None, None),
        };
        let user = match sys_act_prev {
            // The previous turn stays borrowed through user_turn; clone the
            // act so the push below is free to move.
            Some(act) => {
                let act = act.clone();
                us.user_turn(world, Some(&act), response_prev, us_rng)
            }
            None => us.user_turn(world, None, None, us_rng),
        };
        let system = ds.system_turn(world, &user.act, &user.utterance, ds_rng);

        let turn = Turn {
            goal_state: user.goal_state,
            user_act: user.act,
            user_utt: user.utterance,
            belief: system.belief,
            db_bucket: system.db_bucket,
            sys_act: system.act,
            response: system.response,
        };
        let reason =
            termination_check(turn.goal_state.is_empty(), &turn, turns.last(), t, max_turns);
        turns.push(turn);
        if let Some(r) = reason {
            termination = r;
            break;
        }
    }

    let abandoned = us.abandoned_domains();
    let success = termination == TerminationReason::GoalEmpty && abandoned.is_empty();
    Episode {
        dialog: Dialog { id, goal: goal.clone(), turns, success, termination },
        final_goal: us.final_goal(),
        abandoned,
    }
}

/// The generative simulator behind the [`UserSim`] trait: one session per
/// episode over a shared immutable agent.
pub struct GusSim<'a> {
    agent: &'a GusAgent,
    sess: GusSession,
}

impl<'a> GusSim<'a> {
    pub fn new(agent: &'a GusAgent, goal: &UserGoal) -> Self {
        GusSim { agent, sess: agent.start_session(goal) }
    }

    pub fn session(&self) -> &GusSession {
        &self.sess
    }
}

impl UserSim for GusSim<'_> {
    fn user_turn(
        &mut self,
        world: &World,
        _sys_act: Option<&DialogAct>,
        response: Option<&str>,
        rng: &mut Rng,
    ) -> UserStep {
        let step = self.agent.us_turn(&mut self.sess, response, world, rng);
        UserStep { goal_state: step.goal_state, act: step.act, utterance: step.utterance }
    }

    fn final_goal(&self) -> UserGoal {
        self.sess.live_goal.clone()
    }

    fn abandoned_domains(&self) -> Vec<String> {
        self.sess.abandoned.clone()
    }
}

/// The agenda-based simulator behind the trait. In semantic mode it reads
/// the previous system act; otherwise it parses the response text.
pub struct AbusSim {
    us: Abus,
    semantic: bool,
    started: bool,
}

impl AbusSim {
    pub fn new(
        goal: UserGoal,
        world: &World,
        templates: TemplateSet,
        cfg: AbusConfig,
        rng: Rng,
    ) -> Result<Self, AbusError> {
        let semantic = cfg.semantic;
        Ok(AbusSim { us: Abus::new(goal, world, templates, cfg, rng)?, semantic, started: false })
    }
}

impl UserSim for AbusSim {
    fn user_turn(
        &mut self,
        world: &World,
        sys_act: Option<&DialogAct>,
        response: Option<&str>,
        _rng: &mut Rng,
    ) -> UserStep {
        let turn = if !self.started {
            self.started = true;
            self.us.step(world, SystemInput::Start)
        } else if self.semantic {
            self.us.step(world, SystemInput::Act(sys_act.expect("turn 2+ has a system act")))
        } else {
            self.us
                .step(world, SystemInput::Response(response.expect("turn 2+ has a response")))
        };
        UserStep {
            goal_state: self.us.goal_state().clone(),
            act: turn.act,
            utterance: turn.utterance,
        }
    }

    fn final_goal(&self) -> UserGoal {
        self.us.live_goal().clone()
    }

    fn abandoned_domains(&self) -> Vec<String> {
        self.us.abandoned_domains().to_vec()
    }
}

/// The neural dialog system behind the [`SystemSim`] trait, carrying its
/// belief/response context between turns.
pub struct DsSim<'a> {
    agent: &'a DsAgent,
    belief: BeliefState,
    active: Option<String>,
    last_response: String,
}

impl<'a> DsSim<'a> {
    pub fn new(agent: &'a DsAgent) -> Self {
        DsSim {
            agent,
            belief: BeliefState::default(),
            active: None,
            last_response: String::new(),
        }
    }
}

impl SystemSim for DsSim<'_> {
    fn system_turn(
        &mut self,
        world: &World,
        _user_act: &DialogAct,
        user_utt: &str,
        rng: &mut Rng,
    ) -> SystemStep {
        let turn = self.agent.ds_turn(
            &self.belief,
            self.active.as_deref(),
            &self.last_response,
            user_utt,
            world,
            rng,
        );
        self.belief = turn.belief.clone();
        self.active = turn.active.clone();
        self.last_response = turn.response.clone();
        SystemStep {
            belief: turn.belief,
            db_bucket: turn.db_bucket,
            act: turn.act,
            response: turn.response,
        }
    }
}

/// The scripted wizard behind the trait (reads the user act, semantic-only).
pub struct WizardSim {
    wizard: Wizard,
}

impl WizardSim {
    pub fn new(templates: TemplateSet, rng: Rng) -> Self {
        WizardSim { wizard: Wizard::new(templates, rng) }
    }
}

impl SystemSim for WizardSim {
    fn system_turn(
        &mut self,
        world: &World,
        user_act: &DialogAct,
        _user_utt: &str,
        _rng: &mut Rng,
    ) -> SystemStep {
        let turn = self.wizard.step(world, user_act);
        SystemStep {
            belief: self.wizard.belief().clone(),
            db_bucket: turn.db_bucket,
            act: turn.act,
            response: turn.response,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::act::ActItem;
    use crate::rng;
    use crate::world::{builtin_world, generate_goals, GoalConfig};

    /// Plays back a fixed list of user turns, then repeats the last one.
    struct ScriptedUser {
        steps: Vec<UserStep>,
        i: usize,
    }

    impl ScriptedUser {
        fn new(steps: Vec<UserStep>) -> Self {
            ScriptedUser { steps, i: 0 }
        }
    }

    impl UserSim for ScriptedUser {
        fn user_turn(
            &mut self,
            _world: &World,
            _sys_act: Option<&DialogAct>,
            _response: Option<&str>,
            _rng: &mut Rng,
        ) -> UserStep {
            let step = &self.steps[self.i.min(self.steps.len() - 1)];
            self.i += 1;
            UserStep {
                goal_state: step.goal_state.clone(),
                act: step.act.clone(),
                utterance: step.utterance.clone(),
            }
        }

        fn final_goal(&self) -> UserGoal {
            UserGoal::default()
        }

        fn abandoned_domains(&self) -> Vec<String> {
            Vec::new()
        }
    }

    /// Answers every turn with the same canned act/response, optionally
    /// varying the response by turn count.
    struct ScriptedSystem {
        act: DialogAct,
        response: String,
        vary: bool,
        t: usize,
    }

    impl SystemSim for ScriptedSystem {
        fn system_turn(
            &mut self,
            _world: &World,
            _user_act: &DialogAct,
            _user_utt: &str,
            _rng: &mut Rng,
        ) -> SystemStep {
            self.t += 1;
            let response = if self.vary {
                format!("{} {}", self.response, self.t)
            } else {
                self.response.clone()
            };
            SystemStep {
                belief: BeliefState::default(),
                db_bucket: 0,
                act: self.act.clone(),
                response,
            }
        }
    }

    fn pending_state() -> GoalState {
        let mut g = GoalState::default();
        g.absorb_act(&DialogAct::from_items([ActItem::inform(
            "restaurant",
            "area",
            "north",
        )]));
        g
    }

    fn ask_step() -> UserStep {
        UserStep {
            goal_state: pending_state(),
            act: DialogAct::from_items([ActItem::inform("restaurant", "area", "north")]),
            utterance: "somewhere in the north .".into(),
        }
    }

    fn run(us: &mut dyn UserSim, ds: &mut dyn SystemSim, max_turns: usize) -> Episode {
        let world = builtin_world();
        run_episode(
            us,
            ds,
            &world,
            &UserGoal::default(),
            max_turns,
            "test".into(),
            &mut rng::stream(1, "ep-us"),
            &mut rng::stream(1, "ep-ds"),
        )
    }

    #[test]
    fn empty_goal_state_with_bye_ends_as_goal_empty() {
        let bye = UserStep {
            goal_state: GoalState::default(),
            act: DialogAct::from_items([ActItem::bye()]),
            utterance: "thank you , goodbye .".into(),
        };
        let mut us = ScriptedUser::new(vec![bye]);
        let mut ds = ScriptedSystem {
            act: DialogAct::from_items([ActItem::bye()]),
            response: "goodbye .".into(),
            vary: false,
            t: 0,
        };
        let ep = run(&mut us, &mut ds, 8);
        assert_eq!(ep.dialog.termination, TerminationReason::GoalEmpty);
        assert_eq!(ep.dialog.turns.len(), 1);
        assert!(ep.dialog.success);
    }

    #[test]
    fn mutual_bye_with_pending_goal_ends_as_both_bye() {
        let bye_step = UserStep {
            goal_state: pending_state(),
            act: DialogAct::from_items([ActItem::bye()]),
            utterance: "goodbye .".into(),
        };
        let mut us = ScriptedUser::new(vec![ask_step(), bye_step]);
        let mut ds = ScriptedSystem {
            act: DialogAct::from_items([ActItem::bye()]),
            response: "goodbye .".into(),
            vary: true,
            t: 0,
        };
        let ep = run(&mut us, &mut ds, 8);
        assert_eq!(ep.dialog.termination, TerminationReason::BothBye);
        assert_eq!(ep.dialog.turns.len(), 2);
        assert!(!ep.dialog.success);
    }

    #[test]
    fn verbatim_repetition_ends_at_the_second_occurrence() {
        let mut us = ScriptedUser::new(vec![ask_step()]);
        let mut ds = ScriptedSystem {
            act: DialogAct::from_items([ActItem::reqmore()]),
            response: "anything else ?".into(),
            vary: false,
            t: 0,
        };
        let ep = run(&mut us, &mut ds, 8);
        assert_eq!(ep.dialog.termination, TerminationReason::RepeatedTurn);
        assert_eq!(ep.dialog.turns.len(), 2);
    }

    #[test]
    fn the_cap_is_max_turns() {
        let mut us = ScriptedUser::new(vec![ask_step()]);
        let mut ds = ScriptedSystem {
            act: DialogAct::from_items([ActItem::reqmore()]),
            response: "anything else ?".into(),
            vary: true,
            t: 0,
        };
        let ep = run(&mut us, &mut ds, 5);
        assert_eq!(ep.dialog.termination, TerminationReason::MaxTurns);
        assert_eq!(ep.dialog.turns.len(), 5);
    }

    #[test]
    fn abus_against_the_wizard_replays_the_corpus_generator() {
        // The trait plumbing must not change behavior: an episode driven
        // through the generic loop matches run_scripted_episode outputs.
        let world = builtin_world();
        let templates = TemplateSet::builtin();
        let goals = generate_goals(&world, &GoalConfig::default(), 3, 55);
        for (i, goal) in goals.into_iter().enumerate() {
            let cfg = crate::corpus_gen::CorpusGenConfig::default();
            let reference = crate::corpus_gen::run_scripted_episode(
                &world,
                &templates,
                goal.clone(),
                &cfg,
                format!("ref-{i}"),
                rng::indexed_stream(55, "us", i as u64),
                rng::indexed_stream(55, "sys", i as u64),
            )
            .unwrap();

            let mut us = AbusSim::new(
                goal.clone(),
                &world,
                templates.clone(),
                cfg.abus.clone(),
                rng::indexed_stream(55, "us", i as u64),
            )
            .unwrap();
            let mut ds =
                WizardSim::new(templates.clone(), rng::indexed_stream(55, "sys", i as u64));
            let ep = run_episode(
                &mut us,
                &mut ds,
                &world,
                &goal,
                cfg.max_turns,
                format!("ref-{i}"),
                &mut rng::stream(0, "unused"),
                &mut rng::stream(0, "unused"),
            );
            assert_eq!(ep.dialog, reference);
        }
    }

    #[test]
    fn seeded_neural_episodes_are_reproducible_and_bounded() {
        let world = builtin_world();
        let templates = TemplateSet::builtin();
        let vocab = crate::neural::Vocab::build(&world, &templates.table);
        let model_cfg = crate::neural::ModelConfig {
            vocab: vocab.len(),
            context: 256,
            width: 8,
            layers: 1,
            heads: 2,
        };
        let ds_agent = DsAgent::new(
            crate::neural::GenerativeModel::new(model_cfg.clone(), 7),
            vocab.clone(),
            crate::agents::DecodeConfig::default(),
        );
        let us_agent = GusAgent::new(
            crate::neural::GenerativeModel::new(model_cfg, 8),
            vocab,
            crate::agents::DecodeConfig::default(),
            crate::agents::GusVariant::WithGst,
        );
        let goals = generate_goals(&world, &GoalConfig::default(), 2, 99);

        let roll = |label: &str| -> Vec<Dialog> {
            goals
                .iter()
                .enumerate()
                .map(|(i, goal)| {
                    let mut us = GusSim::new(&us_agent, goal);
                    let mut ds = DsSim::new(&ds_agent);
                    run_episode(
                        &mut us,
                        &mut ds,
                        &world,
                        goal,
                        6,
                        format!("{label}-{i}"),
                        &mut rng::indexed_stream(3, "us", i as u64),
                        &mut rng::indexed_stream(3, "ds", i as u64),
                    )
                    .dialog
                })
                .collect()
        };
        let a = roll("run");
        let b = roll("run");
        assert_eq!(a, b);
        for d in &a {
            assert!(d.turns.len() <= 6);
        }
    }
}
