//! Supervised training for both agents. The dialog system learns one
//! sequence per turn; the simulator learns two families per turn (NLU and
//! policy), pooled and shuffled together so the two likelihood terms are
//! optimized jointly. Dialogs are split into train/held-out up front; the
//! checkpoint with the best held-out loss wins.

use thiserror::Error;

use crate::dialog::spans::SpanLexicon;
use crate::dialog::state::BeliefState;
use crate::dialog::{DialogAct, Dialog};
use crate::neural::optim::{AdamW, LrSchedule};
use crate::neural::train::{batch_grads, sl_step, TrainError, TrainingSequence};
use crate::neural::{GenerativeModel, Params, Vocab};
use crate::rng;
use crate::tracking::annotate_goal_states;

use super::ds::DsAgent;
use super::gus::{GusAgent, GusVariant};
use super::seqs::{ds_training_sequence, us_nlu_sequence, us_policy_sequence, SegTokens};
use super::DecodeConfig;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlHyper {
    pub epochs: usize,
    /// Sequences per optimizer step.
    pub batch_size: usize,
    /// Sequences per forward pass (gradient accumulation granularity).
    pub micro_size: usize,
    pub max_lr: f64,
    pub weight_decay: f64,
    /// Fraction of dialogs held out for model selection.
    pub heldout_frac: f64,
    pub seed: u64,
}

impl Default for SlHyper {
    fn default() -> Self {
        SlHyper {
            epochs: 8,
            batch_size: 32,
            micro_size: 8,
            max_lr: crate::neural::optim::SL_MAX_LR,
            weight_decay: 0.01,
            heldout_frac: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlReport {
    pub train_losses: Vec<f64>,
    /// Empty when the corpus is too small to hold anything out.
    pub heldout_losses: Vec<f64>,
    /// Epoch whose checkpoint was kept (0-based).
    pub best_epoch: usize,
}

#[derive(Debug, Error)]
pub enum SlError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// One training sequence per turn: (b_prev, r_prev, u, db) -> b ⊕ a ⊕ r.
pub fn ds_sequences(
    corpus: &[Dialog],
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    cfg: &DecodeConfig,
) -> Vec<TrainingSequence> {
    let mut out = Vec::new();
    for dialog in corpus {
        let mut b_prev = BeliefState::default();
        let mut r_prev = String::new();
        for turn in &dialog.turns {
            out.push(ds_training_sequence(
                vocab,
                seg,
                lex,
                &b_prev,
                &r_prev,
                &turn.user_utt,
                &turn.belief,
                turn.db_bucket,
                &turn.sys_act,
                &turn.response,
                cfg,
            ));
            b_prev = turn.belief.clone();
            r_prev = turn.response.clone();
        }
    }
    out
}

/// Both simulator families for every turn. The perceived-act label b_u is
/// the previous turn's system act copied verbatim (empty at t = 1); goal
/// states come from backward annotation of the user acts.
pub fn us_sequences(
    corpus: &[Dialog],
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    cfg: &DecodeConfig,
) -> Vec<TrainingSequence> {
    let mut out = Vec::new();
    for dialog in corpus {
        let user_acts: Vec<DialogAct> = dialog.turns.iter().map(|t| t.user_act.clone()).collect();
        let goal_states = annotate_goal_states(&user_acts);
        let mut r_prev: Option<&str> = None;
        let mut b_u_label = DialogAct::empty();
        for (turn, g) in dialog.turns.iter().zip(&goal_states) {
            out.push(us_nlu_sequence(vocab, seg, lex, r_prev, &b_u_label, cfg));
            out.push(us_policy_sequence(
                vocab,
                seg,
                lex,
                r_prev,
                &b_u_label,
                g,
                &turn.user_act,
                &turn.user_utt,
                cfg,
            ));
            r_prev = Some(&turn.response);
            b_u_label = turn.sys_act.clone();
        }
    }
    out
}

/// Greedy per-token accuracy over the loss-carrying positions.
pub fn token_accuracy(model: &GenerativeModel, seqs: &[TrainingSequence]) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for seq in seqs {
        let dist = model.forward(&seq.tokens).expect("sequences fit the context");
        for (i, &w) in seq.weights.iter().enumerate().skip(1) {
            if w == 0.0 {
                continue;
            }
            total += 1;
            let row = dist.row(i - 1);
            let mut best = 0usize;
            for (v, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = v;
                }
            }
            if best as u32 == seq.tokens[i] {
                correct += 1;
            }
        }
    }
    if total == 0 {
        return 1.0;
    }
    correct as f64 / total as f64
}

fn heldout_loss(
    model: &GenerativeModel,
    seqs: &[TrainingSequence],
    micro: usize,
) -> Result<f64, TrainError> {
    let (nll, weight, _) = batch_grads(model, seqs, micro)?;
    Ok(nll / weight)
}

/// The epoch loop shared by both agents. Returns the best parameters.
fn train_loop(
    mut model: GenerativeModel,
    train: &[TrainingSequence],
    heldout: &[TrainingSequence],
    hyper: &SlHyper,
    stream_label: &str,
) -> Result<(GenerativeModel, SlReport), SlError> {
    if train.is_empty() {
        return Err(SlError::EmptyCorpus);
    }
    let steps_per_epoch = train.len().div_ceil(hyper.batch_size);
    let schedule = LrSchedule::supervised(hyper.max_lr, hyper.epochs * steps_per_epoch);
    let mut opt = AdamW::new(schedule, hyper.weight_decay);

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_losses = Vec::with_capacity(hyper.epochs);
    let mut heldout_losses = Vec::new();
    let mut best: (usize, f64, Params) = (0, f64::INFINITY, model.params.clone());

    for epoch in 0..hyper.epochs {
        use rand::seq::SliceRandom as _;
        order.shuffle(&mut rng::indexed_stream(hyper.seed, stream_label, epoch as u64));

        let mut loss_sum = 0.0;
        let mut weight_sum = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<TrainingSequence> = chunk.iter().map(|&i| train[i].clone()).collect();
            let stats = sl_step(&mut model, &mut opt, &batch, hyper.micro_size)?;
            loss_sum += stats.loss * stats.target_weight;
            weight_sum += stats.target_weight;
        }
        train_losses.push(loss_sum / weight_sum);

        let selection_loss = if heldout.is_empty() {
            train_losses[epoch]
        } else {
            let l = heldout_loss(&model, heldout, hyper.micro_size)?;
            heldout_losses.push(l);
            l
        };
        if selection_loss < best.1 {
            best = (epoch, selection_loss, model.params.clone());
        }
    }

    model.params = best.2;
    Ok((model, SlReport { train_losses, heldout_losses, best_epoch: best.0 }))
}

/// Deterministic dialog-level split; held-out is empty when the corpus is
/// too small for the fraction to reach one dialog.
fn split_corpus(corpus: &[Dialog], frac: f64, seed: u64) -> (Vec<&Dialog>, Vec<&Dialog>) {
    use rand::seq::SliceRandom as _;
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    idx.shuffle(&mut rng::stream(seed, "sl-split"));
    let k = ((corpus.len() as f64) * frac).floor() as usize;
    let (held, train) = idx.split_at(k);
    (
        train.iter().map(|&i| &corpus[i]).collect(),
        held.iter().map(|&i| &corpus[i]).collect(),
    )
}

pub fn sl_train_ds(
    model: GenerativeModel,
    vocab: Vocab,
    lex: &SpanLexicon,
    corpus: &[Dialog],
    decode: DecodeConfig,
    hyper: &SlHyper,
) -> Result<(DsAgent, SlReport), SlError> {
    if corpus.is_empty() {
        return Err(SlError::EmptyCorpus);
    }
    let seg = SegTokens::new(&vocab);
    let (train_dialogs, held_dialogs) = split_corpus(corpus, hyper.heldout_frac, hyper.seed);
    let train: Vec<TrainingSequence> = train_dialogs
        .iter()
        .flat_map(|d| ds_sequences(std::slice::from_ref(*d), &vocab, &seg, lex, &decode))
        .collect();
    let heldout: Vec<TrainingSequence> = held_dialogs
        .iter()
        .flat_map(|d| ds_sequences(std::slice::from_ref(*d), &vocab, &seg, lex, &decode))
        .collect();
    let (model, report) = train_loop(model, &train, &heldout, hyper, "sl-ds")?;
    Ok((DsAgent::new(model, vocab, decode), report))
}

pub fn sl_train_us(
    model: GenerativeModel,
    vocab: Vocab,
    lex: &SpanLexicon,
    corpus: &[Dialog],
    decode: DecodeConfig,
    variant: GusVariant,
    hyper: &SlHyper,
) -> Result<(GusAgent, SlReport), SlError> {
    if corpus.is_empty() {
        return Err(SlError::EmptyCorpus);
    }
    let seg = SegTokens::new(&vocab);
    let (train_dialogs, held_dialogs) = split_corpus(corpus, hyper.heldout_frac, hyper.seed);
    let train: Vec<TrainingSequence> = train_dialogs
        .iter()
        .flat_map(|d| us_sequences(std::slice::from_ref(*d), &vocab, &seg, lex, &decode))
        .collect();
    let heldout: Vec<TrainingSequence> = held_dialogs
        .iter()
        .flat_map(|d| us_sequences(std::slice::from_ref(*d), &vocab, &seg, lex, &decode))
        .collect();
    let (model, report) = train_loop(model, &train, &heldout, hyper, "sl-us")?;
    Ok((GusAgent::new(model, vocab, decode, variant), report))
}
