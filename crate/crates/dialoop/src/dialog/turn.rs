//! One annotated dialog turn and the dialog container.

use serde::{Deserialize, Serialize};

use super::act::DialogAct;
use super::goal::{GoalState, UserGoal};
use super::state::BeliefState;

/// Why an episode ended. `GoalEmpty` is checked first at the start of each
/// user turn, then `BothBye` and `RepeatedTurn` after the system reply, and
/// `MaxTurns` as the hard cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    GoalEmpty,
    BothBye,
    RepeatedTurn,
    MaxTurns,
}

impl TerminationReason {
    pub const ALL: [TerminationReason; 4] = [
        TerminationReason::GoalEmpty,
        TerminationReason::BothBye,
        TerminationReason::RepeatedTurn,
        TerminationReason::MaxTurns,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::GoalEmpty => "goal_empty",
            TerminationReason::BothBye => "both_bye",
            TerminationReason::RepeatedTurn => "repeated_turn",
            TerminationReason::MaxTurns => "max_turns",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fully annotated turn: the user side first (goal state at decision time,
/// act, utterance), then the system side (belief after reading the utterance,
/// database bucket for the active domain, act, delexicalized response).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    /// Goal state `g_t` the user held when producing this turn's act.
    pub goal_state: GoalState,
    pub user_act: DialogAct,
    pub user_utt: String,
    /// System belief after incorporating this turn's user utterance.
    pub belief: BeliefState,
    /// Match-count bucket (0..=3) for the active domain under `belief`.
    pub db_bucket: u8,
    pub sys_act: DialogAct,
    /// Delexicalized system response.
    pub response: String,
}

/// A complete dialog: the original user goal plus the annotated turns.
/// `goal` keeps its generation-time values even when the user changed a
/// constraint mid-dialog; the per-turn `goal_state` fields track the change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialog {
    pub id: String,
    pub goal: UserGoal,
    pub turns: Vec<Turn>,
    pub success: bool,
    pub termination: TerminationReason,
}

impl Dialog {
    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }
}
