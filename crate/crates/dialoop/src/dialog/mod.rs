//! Dialog data model: acts, belief states, goals, spans, turns, and corpus
//! files.

pub mod act;
pub mod corpus;
pub mod goal;
pub mod spans;
pub mod state;
pub mod turn;

pub use act::{ActItem, DialogAct, Intent, GENERAL_DOMAIN};
pub use corpus::{read_corpus, write_corpus, CorpusError, CorpusHeader};
pub use goal::{ConstraintKind, DomainGoal, DomainState, GoalState, UserGoal};
pub use spans::SpanLexicon;
pub use state::{active_domain, BeliefState};
pub use turn::{Dialog, TerminationReason, Turn};
