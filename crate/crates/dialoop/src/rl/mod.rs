//! Reinforcement learning of the dialog system against a user simulator:
//! episode rollouts, the three reward settings, per-token returns, and
//! REINFORCE updates over a configurable slice of the system's output
//! sequence.

pub mod episode;
pub mod pg;
pub mod reward;
pub mod trainer;

pub use episode::{run_episode, AbusSim, DsSim, Episode, GusSim, SystemSim, UserSim, WizardSim};
pub use pg::{rl_step, scheme_weighted_sequence, PolicyScheme};
pub use reward::{compute_returns, compute_rewards, sigmoid, RewardSetting, RewardTrace};
pub use trainer::{train_rl, RlConfig, RlLog, UsPartner};
