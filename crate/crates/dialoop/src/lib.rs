//! A desk-scale sandbox for building, training and evaluating task-oriented
//! dialog agents: a generative user simulator with explicit goal state
//! tracking, an agenda-based rule simulator, a scripted wizard for corpus
//! synthesis, a from-scratch causal transformer substrate, policy-gradient
//! training of the dialog system, and the matching evaluation harness
//! (interaction-based, corpus-based, cross-model, transcript export).
//!
//! The crate is organized around the turn loop of a task-oriented dialog:
//!
//! * [`world`] — closed multi-domain ontology, entity database, goal
//!   generator, delexicalization.
//! * [`dialog`] — acts, belief states, goals, turns, span grammars, corpus
//!   I/O.
//! * [`tracking`] — goal state update, goal change on no-offer, backward
//!   annotation.
//! * [`abus`] — agenda-based user simulator with rule NLU and template NLG.
//! * [`wizard`] — deterministic rule dialog system used to synthesize the
//!   training corpus.
//! * [`neural`] — word-level vocab, reverse-mode autodiff, tiny causal
//!   transformer, AdamW, greedy/beam decoding.
//! * [`agents`] — the generative dialog system and user simulator built on
//!   [`neural`], plus their supervised training drivers.
//! * [`rl`] — episode rollouts, reward settings, returns, policy-gradient
//!   updates.
//! * [`eval`] — inform/success judging, BLEU, cross-model matrices,
//!   matched-pairs significance, transcript export.
//! * [`pipeline`] — end-to-end orchestration used by the CLI.

pub mod abus;
pub mod agents;
pub mod corpus_gen;
pub mod dialog;
pub mod eval;
pub mod neural;
pub mod rng;
pub mod tracking;
pub mod wizard;
pub mod world;

pub use dialog::{ActItem, BeliefState, Dialog, DialogAct, GoalState, Intent, Turn, UserGoal};
pub use world::{DbResult, World};
