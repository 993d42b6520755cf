//! Decoding strategies over any stepwise LM: greedy argmax and a
//! length-normalized beam whose final hypothesis is sampled in proportion
//! to its per-token probability. Scores are mean log-probability over the
//! generated tokens (stop token included), so hypotheses of different
//! lengths compete on equal footing.

use ndarray::Array1;
use rand::Rng;

use super::model::{GenerativeModel, InferState, ModelError};

/// Anything that can consume tokens one at a time and emit a next-token
/// log-probability row. Beam search clones the state to fork hypotheses.
pub trait StepModel {
    type State: Clone;
    fn start(&self) -> Self::State;
    fn step(&self, state: &mut Self::State, token: u32) -> Result<Array1<f64>, ModelError>;
}

impl StepModel for GenerativeModel {
    type State = InferState;

    fn start(&self) -> InferState {
        GenerativeModel::start(self)
    }

    fn step(&self, state: &mut InferState, token: u32) -> Result<Array1<f64>, ModelError> {
        GenerativeModel::step(self, state, token)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Generated tokens, stop token excluded.
    pub tokens: Vec<u32>,
    /// Set when the budget ran out before the stop token appeared.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub tokens: Vec<u32>,
    /// Total log-probability of the generated tokens (stop included).
    pub log_p: f64,
    /// `log_p` divided by the number of generated tokens (stop included).
    pub score: f64,
    pub truncated: bool,
}

/// Greedy argmax decode; ties break toward the lowest token id.
pub fn greedy<M: StepModel>(
    model: &M,
    prefix: &[u32],
    stop: u32,
    max_new: usize,
) -> Result<DecodeOutcome, ModelError> {
    assert!(!prefix.is_empty(), "decoding needs at least one context token");
    let mut state = model.start();
    let mut row = Array1::zeros(0);
    for &t in prefix {
        row = model.step(&mut state, t)?;
    }
    let mut tokens = Vec::new();
    for _ in 0..max_new {
        let next = argmax(&row);
        if next == stop {
            return Ok(DecodeOutcome { tokens, truncated: false });
        }
        tokens.push(next);
        row = model.step(&mut state, next)?;
    }
    Ok(DecodeOutcome { tokens, truncated: true })
}

/// All finished hypotheses of a beam search, best score first. If nothing
/// finished within the budget, the surviving live hypotheses are returned
/// with the `truncated` flag set.
pub fn beam_hypotheses<M: StepModel>(
    model: &M,
    prefix: &[u32],
    stop: u32,
    max_new: usize,
    width: usize,
) -> Result<Vec<Hypothesis>, ModelError> {
    assert!(!prefix.is_empty(), "decoding needs at least one context token");
    assert!(width > 0 && max_new > 0);
    let mut state = model.start();
    let mut row = Array1::zeros(0);
    for &t in prefix {
        row = model.step(&mut state, t)?;
    }

    struct Live<S> {
        state: S,
        row: Array1<f64>,
        tokens: Vec<u32>,
        log_p: f64,
    }
    let mut live = vec![Live { state, row, tokens: Vec::new(), log_p: 0.0 }];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for _ in 0..max_new {
        // Candidate = (score, live index, token); total order for determinism.
        let mut candidates: Vec<(f64, usize, u32)> = Vec::new();
        for (i, hyp) in live.iter().enumerate() {
            let len = (hyp.tokens.len() + 1) as f64;
            for (tok, &lp) in hyp.row.iter().enumerate() {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                candidates.push(((hyp.log_p + lp) / len, i, tok as u32));
            }
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });

        let mut next_live: Vec<Live<M::State>> = Vec::new();
        for &(score, i, tok) in &candidates {
            if tok == stop {
                let mut tokens = live[i].tokens.clone();
                let log_p = live[i].log_p + live[i].row[tok as usize];
                tokens.shrink_to_fit();
                finished.push(Hypothesis { tokens, log_p, score, truncated: false });
            } else if next_live.len() < width {
                let mut state = live[i].state.clone();
                let row = model.step(&mut state, tok)?;
                let mut tokens = live[i].tokens.clone();
                tokens.push(tok);
                next_live.push(Live {
                    state,
                    row,
                    tokens,
                    log_p: live[i].log_p + live[i].row[tok as usize],
                });
            }
        }
        live = next_live;
        if live.is_empty() {
            break;
        }
    }

    if finished.is_empty() {
        for hyp in live {
            let len = hyp.tokens.len().max(1) as f64;
            finished.push(Hypothesis {
                tokens: hyp.tokens,
                log_p: hyp.log_p,
                score: hyp.log_p / len,
                truncated: true,
            });
        }
    }
    finished.sort_by(|a, b| {
        b.score.partial_cmp(&a.score).unwrap().then(a.tokens.cmp(&b.tokens))
    });
    finished.truncate(width);
    Ok(finished)
}

/// Beam search, then one hypothesis sampled with weight proportional to
/// exp(score) — the geometric-mean token probability.
pub fn beam_sample<M: StepModel, R: Rng>(
    model: &M,
    prefix: &[u32],
    stop: u32,
    max_new: usize,
    width: usize,
    rng: &mut R,
) -> Result<DecodeOutcome, ModelError> {
    let pool = beam_hypotheses(model, prefix, stop, max_new, width)?;
    let max = pool.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = pool.iter().map(|h| (h.score - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (hyp, w) in pool.iter().zip(&weights) {
        draw -= w;
        if draw <= 0.0 {
            return Ok(DecodeOutcome { tokens: hyp.tokens.clone(), truncated: hyp.truncated });
        }
    }
    let last = pool.last().expect("beam always yields at least one hypothesis");
    Ok(DecodeOutcome { tokens: last.tokens.clone(), truncated: last.truncated })
}

fn argmax(row: &Array1<f64>) -> u32 {
    let mut best = 0usize;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best as u32
}
