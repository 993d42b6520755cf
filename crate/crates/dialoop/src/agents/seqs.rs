//! Token-level context assembly, shared verbatim between inference and
//! training so the conditioning an agent sees at decode time is exactly
//! what it was trained on.
//!
//! Dialog-system layout (one turn):
//! ```text
//! <sos_b> b_{t-1} <eos_b> <sos_r> r_{t-1} <eos_r> <sos_u> u_t <eos_u>   | context
//! <sos_b> b_t <eos_b> <db_k> <sos_a> a_t <eos_a> <sos_r> r_t <eos_r>   | target
//! ```
//! Simulator layouts (two families):
//! ```text
//! <sos_r> r_{t-1} <eos_r>  |  <sos_bu> b_t^u <eos_bu>
//! <sos_r> r_{t-1} <eos_r> <sos_bu> b_t^u <eos_bu> <sos_g> g_t <eos_g>  |  <sos_a> a_t^u <eos_a> <sos_u> u_t <eos_u>
//! ```
//! Loss covers target-segment content plus the closing delimiter; opening
//! delimiters and the db bucket token are forced at decode time and carry
//! no loss. Conditioning segments are clipped to budget — free text from
//! the left (the tail carries the request), spans from the right (the
//! domain header leads).

use crate::dialog::goal::GoalState;
use crate::dialog::spans::{self, SpanLexicon};
use crate::dialog::state::BeliefState;
use crate::dialog::DialogAct;
use crate::neural::train::TrainingSequence;
use crate::neural::Vocab;

use super::DecodeConfig;

/// Resolved ids of the segment delimiters and db bucket tokens.
#[derive(Debug, Clone, Copy)]
pub struct SegTokens {
    pub sos_b: u32,
    pub eos_b: u32,
    pub sos_bu: u32,
    pub eos_bu: u32,
    pub sos_g: u32,
    pub eos_g: u32,
    pub sos_a: u32,
    pub eos_a: u32,
    pub sos_r: u32,
    pub eos_r: u32,
    pub sos_u: u32,
    pub eos_u: u32,
    pub db: [u32; 4],
}

impl SegTokens {
    pub fn new(vocab: &Vocab) -> Self {
        let id = |t: &str| vocab.must_id(t);
        SegTokens {
            sos_b: id("<sos_b>"),
            eos_b: id("<eos_b>"),
            sos_bu: id("<sos_bu>"),
            eos_bu: id("<eos_bu>"),
            sos_g: id("<sos_g>"),
            eos_g: id("<eos_g>"),
            sos_a: id("<sos_a>"),
            eos_a: id("<eos_a>"),
            sos_r: id("<sos_r>"),
            eos_r: id("<eos_r>"),
            sos_u: id("<sos_u>"),
            eos_u: id("<eos_u>"),
            db: [0, 1, 2, 3].map(|b| id(&spans::db_token(b))),
        }
    }
}

/// Clip free text to budget keeping the tail.
fn clip_text(mut toks: Vec<u32>, budget: usize, truncated: &mut bool) -> Vec<u32> {
    if toks.len() > budget {
        toks.drain(..toks.len() - budget);
        *truncated = true;
    }
    toks
}

/// Clip a span to budget keeping the head.
fn clip_span(mut toks: Vec<u32>, budget: usize, truncated: &mut bool) -> Vec<u32> {
    if toks.len() > budget {
        toks.truncate(budget);
        *truncated = true;
    }
    toks
}

/// Grows a packed sequence, tracking which positions carry loss.
pub struct SeqBuilder {
    tokens: Vec<u32>,
    weights: Vec<f64>,
}

impl SeqBuilder {
    pub fn new() -> Self {
        SeqBuilder { tokens: Vec::new(), weights: Vec::new() }
    }

    pub fn ctx_tok(&mut self, t: u32) -> &mut Self {
        self.tokens.push(t);
        self.weights.push(0.0);
        self
    }

    pub fn ctx(&mut self, toks: &[u32]) -> &mut Self {
        for &t in toks {
            self.ctx_tok(t);
        }
        self
    }

    pub fn tgt_tok(&mut self, t: u32) -> &mut Self {
        self.tokens.push(t);
        self.weights.push(1.0);
        self
    }

    pub fn tgt(&mut self, toks: &[u32]) -> &mut Self {
        for &t in toks {
            self.tgt_tok(t);
        }
        self
    }

    pub fn finish(self) -> TrainingSequence {
        TrainingSequence { tokens: self.tokens, weights: self.weights }
    }
}

impl Default for SeqBuilder {
    fn default() -> Self {
        SeqBuilder::new()
    }
}

/// The dialog system's conditioning block:
/// `<sos_b> b_prev <eos_b> <sos_r> r_prev <eos_r> <sos_u> u <eos_u>`.
/// Returns the tokens and whether anything was clipped.
pub fn ds_context(
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    b_prev: &BeliefState,
    r_prev: &str,
    u: &str,
    cfg: &DecodeConfig,
) -> (Vec<u32>, bool) {
    let mut truncated = false;
    let b = clip_span(
        vocab.encode(&spans::serialize_belief(b_prev, lex)),
        cfg.belief_budget,
        &mut truncated,
    );
    let r = clip_text(vocab.encode(r_prev), cfg.response_budget, &mut truncated);
    let u = clip_text(vocab.encode(u), cfg.utterance_budget, &mut truncated);

    let mut out = Vec::with_capacity(b.len() + r.len() + u.len() + 6);
    out.push(seg.sos_b);
    out.extend_from_slice(&b);
    out.push(seg.eos_b);
    out.push(seg.sos_r);
    out.extend_from_slice(&r);
    out.push(seg.eos_r);
    out.push(seg.sos_u);
    out.extend_from_slice(&u);
    out.push(seg.eos_u);
    (out, truncated)
}

/// Full dialog-system training sequence for one turn.
#[allow(clippy::too_many_arguments)]
pub fn ds_training_sequence(
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    b_prev: &BeliefState,
    r_prev: &str,
    u: &str,
    b: &BeliefState,
    db_bucket: u8,
    a: &DialogAct,
    r: &str,
    cfg: &DecodeConfig,
) -> TrainingSequence {
    let (context, _) = ds_context(vocab, seg, lex, b_prev, r_prev, u, cfg);
    let mut sb = SeqBuilder::new();
    sb.ctx(&context);
    sb.ctx_tok(seg.sos_b);
    sb.tgt(&vocab.encode(&spans::serialize_belief(b, lex)));
    sb.tgt_tok(seg.eos_b);
    sb.ctx_tok(seg.db[usize::from(db_bucket.min(3))]);
    sb.ctx_tok(seg.sos_a);
    sb.tgt(&vocab.encode(&spans::serialize_act(a, lex)));
    sb.tgt_tok(seg.eos_a);
    sb.ctx_tok(seg.sos_r);
    sb.tgt(&vocab.encode(r));
    sb.tgt_tok(seg.eos_r);
    sb.finish()
}

/// The simulator's shared conditioning block: `<sos_r> r_prev <eos_r>`.
/// `None` marks the dialog opening (t = 1), which shares the encoding of an
/// empty response.
pub fn us_context(
    vocab: &Vocab,
    seg: &SegTokens,
    r_prev: Option<&str>,
    cfg: &DecodeConfig,
) -> (Vec<u32>, bool) {
    let mut truncated = false;
    let r = clip_text(
        vocab.encode(r_prev.unwrap_or("")),
        cfg.response_budget,
        &mut truncated,
    );
    let mut out = Vec::with_capacity(r.len() + 2);
    out.push(seg.sos_r);
    out.extend_from_slice(&r);
    out.push(seg.eos_r);
    (out, truncated)
}

/// Family one: system-act NLU, `(r_prev) -> b_u`. The label is the previous
/// system act serialized verbatim (empty at t = 1).
pub fn us_nlu_sequence(
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    r_prev: Option<&str>,
    b_u_label: &DialogAct,
    cfg: &DecodeConfig,
) -> TrainingSequence {
    let (context, _) = us_context(vocab, seg, r_prev, cfg);
    let mut sb = SeqBuilder::new();
    sb.ctx(&context);
    sb.ctx_tok(seg.sos_bu);
    sb.tgt(&vocab.encode(&spans::serialize_act(b_u_label, lex)));
    sb.tgt_tok(seg.eos_bu);
    sb.finish()
}

/// Family two: act-and-utterance policy,
/// `(r_prev, b_u, g) -> a_u ⊕ u`.
#[allow(clippy::too_many_arguments)]
pub fn us_policy_sequence(
    vocab: &Vocab,
    seg: &SegTokens,
    lex: &SpanLexicon,
    r_prev: Option<&str>,
    b_u: &DialogAct,
    g: &GoalState,
    a_u: &DialogAct,
    u: &str,
    cfg: &DecodeConfig,
) -> TrainingSequence {
    let (context, _) = us_context(vocab, seg, r_prev, cfg);
    let mut truncated = false;
    let b_u_toks = clip_span(
        vocab.encode(&spans::serialize_act(b_u, lex)),
        cfg.act_budget,
        &mut truncated,
    );
    let g_toks = clip_span(
        vocab.encode(&spans::serialize_goal_state(g, lex)),
        cfg.goal_budget,
        &mut truncated,
    );

    let mut sb = SeqBuilder::new();
    sb.ctx(&context);
    sb.ctx_tok(seg.sos_bu);
    sb.ctx(&b_u_toks);
    sb.ctx_tok(seg.eos_bu);
    sb.ctx_tok(seg.sos_g);
    sb.ctx(&g_toks);
    sb.ctx_tok(seg.eos_g);
    sb.ctx_tok(seg.sos_a);
    sb.tgt(&vocab.encode(&spans::serialize_act(a_u, lex)));
    sb.tgt_tok(seg.eos_a);
    sb.ctx_tok(seg.sos_u);
    sb.tgt(&vocab.encode(u));
    sb.tgt_tok(seg.eos_u);
    sb.finish()
}
