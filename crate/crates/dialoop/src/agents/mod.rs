//! The two neural dialog agents sharing one sequence-model substrate: the
//! dialog system (belief → database → act → response) and the generative
//! user simulator (perceived system act → goal-state update → user act →
//! utterance), plus their supervised training drivers.
//!
//! Both agents are Markov: every turn conditions only on the previous
//! turn's carried state and the current input, never on deeper history.

pub mod ds;
pub mod gus;
pub mod seqs;
pub mod sl;

pub use ds::{DsAgent, DsTurn};
pub use gus::{GusAgent, GusSession, GusVariant, UsStep};
pub use seqs::SegTokens;
pub use sl::{sl_train_ds, sl_train_us, SlHyper, SlReport};

/// Per-segment token budgets and decoding choices. The budgets bound both
/// directions: conditioning segments are clipped to them, and generation
/// stops after that many tokens (flagged as truncated).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecodeConfig {
    /// Act spans are drawn from a sampled beam for diversity; everything
    /// else decodes greedily.
    pub act_beam: bool,
    pub beam_width: usize,
    pub belief_budget: usize,
    pub act_budget: usize,
    pub response_budget: usize,
    pub utterance_budget: usize,
    pub goal_budget: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            act_beam: true,
            beam_width: 10,
            belief_budget: 32,
            act_budget: 20,
            response_budget: 40,
            utterance_budget: 40,
            goal_budget: 48,
        }
    }
}

impl DecodeConfig {
    /// Longest token sequence either agent can assemble: the dialog-system
    /// training layout (belief + response + utterance context, then belief
    /// + db + act + response target). Agent constructors check this against
    /// the model context so truncation-by-budget guarantees fit.
    pub fn max_sequence_len(&self) -> usize {
        let ds = 3 * 2
            + self.belief_budget
            + self.response_budget
            + self.utterance_budget
            + (2 + self.belief_budget)
            + 1
            + (2 + self.act_budget)
            + (2 + self.response_budget);
        let us = 2
            + self.response_budget
            + (2 + self.act_budget) * 2
            + (2 + self.goal_budget)
            + (2 + self.utterance_budget);
        ds.max(us)
    }
}
