//! The neural dialog system. One turn runs in two stages: decode the new
//! belief span, query the database for the active domain, then decode the
//! act and response spans with the database bucket token in context.
//! Stage-one output is parsed and re-serialized before it conditions stage
//! two, so the model always sees canonical spans, exactly as in training.

use rand::Rng as _;

use crate::dialog::act::{DialogAct, Intent};
use crate::dialog::spans;
use crate::dialog::state::{active_domain, BeliefState};
use crate::neural::decode::{beam_sample, greedy};
use crate::neural::{GenerativeModel, Vocab};
use crate::rng::Rng;
use crate::world::World;

use super::seqs::{ds_context, SegTokens};
use super::DecodeConfig;

pub struct DsAgent {
    pub model: GenerativeModel,
    pub vocab: Vocab,
    pub seg: SegTokens,
    pub decode: DecodeConfig,
}

/// Everything one system turn produces.
#[derive(Debug, Clone)]
pub struct DsTurn {
    pub belief: BeliefState,
    /// Domain the database was queried for (carried over when the belief
    /// did not change).
    pub active: Option<String>,
    pub db_count: usize,
    pub db_bucket: u8,
    /// Grounded act: values filled from the selected entity / belief, a
    /// fresh reference code on book confirmations.
    pub act: DialogAct,
    /// Delexicalized response text.
    pub response: String,
    /// Set when any conditioning segment was clipped or a generated segment
    /// ran out of budget before its closing delimiter.
    pub truncated: bool,
    /// Tokens the tolerant span parsers had to skip (diagnostics).
    pub skipped_tokens: usize,
}

impl DsAgent {
    pub fn new(model: GenerativeModel, vocab: Vocab, decode: DecodeConfig) -> Self {
        assert!(
            decode.max_sequence_len() <= model.cfg.context,
            "decode budgets ({}) exceed the model context ({})",
            decode.max_sequence_len(),
            model.cfg.context
        );
        assert_eq!(model.cfg.vocab, vocab.len(), "model and vocabulary disagree on size");
        let seg = SegTokens::new(&vocab);
        DsAgent { model, vocab, seg, decode }
    }

    /// One system turn under Markov conditioning: exactly
    /// (b_prev, r_prev, u) plus the database outcome of the new belief.
    pub fn ds_turn(
        &self,
        b_prev: &BeliefState,
        active_prev: Option<&str>,
        r_prev: &str,
        u: &str,
        world: &World,
        rng: &mut Rng,
    ) -> DsTurn {
        let lex = world.lexicon();
        let cfg = &self.decode;
        let (mut prefix, mut truncated) = ds_context(&self.vocab, &self.seg, lex, b_prev, r_prev, u, cfg);

        // Stage one: belief.
        prefix.push(self.seg.sos_b);
        let out = greedy(&self.model, &prefix, self.seg.eos_b, cfg.belief_budget)
            .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let (belief, mut skipped) = spans::parse_belief(&self.vocab.decode(&out.tokens), lex);

        // Database lookup for the domain the turn is about.
        let active = active_domain(active_prev, b_prev, &belief, |d| lex.domain_rank(d));
        let empty = std::collections::BTreeMap::new();
        let db = match &active {
            Some(domain) => world.db_result(domain, belief.slots(domain).unwrap_or(&empty)),
            None => crate::world::DbResult::empty(),
        };

        // Stage two: act, conditioned on the db bucket, then the response.
        prefix.extend(self.vocab.encode(&spans::serialize_belief(&belief, lex)));
        prefix.push(self.seg.eos_b);
        prefix.push(self.seg.db[usize::from(db.bucket.min(3))]);
        prefix.push(self.seg.sos_a);
        let out = if cfg.act_beam {
            beam_sample(&self.model, &prefix, self.seg.eos_a, cfg.act_budget, cfg.beam_width, rng)
        } else {
            greedy(&self.model, &prefix, self.seg.eos_a, cfg.act_budget)
        }
        .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let (raw_act, s) = spans::parse_act(&self.vocab.decode(&out.tokens));
        skipped += s;
        let mut act = ground_act(&raw_act, &belief, world, rng);
        act.canonicalize(|d| lex.domain_rank(d), |d, s| lex.slot_rank(d, s));

        prefix.extend(self.vocab.encode(&spans::serialize_act(&act, lex)));
        prefix.push(self.seg.eos_a);
        prefix.push(self.seg.sos_r);
        let out = greedy(&self.model, &prefix, self.seg.eos_r, cfg.response_budget)
            .expect("stage budgets fit the context");
        truncated |= out.truncated;
        let response = self.vocab.decode(&out.tokens);

        DsTurn {
            belief,
            active,
            db_count: db.count,
            db_bucket: db.bucket,
            act,
            response,
            truncated,
            skipped_tokens: skipped,
        }
    }
}

/// Fill values into a span-parsed (value-free) system act: entity
/// attributes for informs about the selected match, the match count for
/// "choice", belief values as fallback, and a fresh reference code for book
/// confirmations. Items that name no groundable value stay value-less.
pub fn ground_act(
    act: &DialogAct,
    belief: &BeliefState,
    world: &World,
    rng: &mut Rng,
) -> DialogAct {
    let empty = std::collections::BTreeMap::new();
    let mut db_cache: std::collections::BTreeMap<String, crate::world::DbResult> =
        std::collections::BTreeMap::new();
    let mut db = |domain: &str| {
        db_cache
            .entry(domain.to_string())
            .or_insert_with(|| world.db_result(domain, belief.slots(domain).unwrap_or(&empty)))
            .clone()
    };

    let mut out = DialogAct::empty();
    for item in act {
        let Some(slot) = item.slot.as_deref() else {
            out.push(item.clone());
            continue;
        };
        match item.intent {
            Intent::Inform => {
                let db = db(&item.domain);
                let value = if slot == "choice" {
                    Some(db.count.to_string())
                } else {
                    db.selected
                        .as_ref()
                        .and_then(|e| e.get(slot))
                        .or_else(|| belief.get(&item.domain, slot))
                        .map(str::to_string)
                };
                out.push(with_value(item, value));
            }
            Intent::Book => {
                let value = if slot == "ref" {
                    Some(format!("ref-{:04x}", rng.gen_range(0..0x10000)))
                } else {
                    belief.get(&item.domain, slot).map(str::to_string).or_else(|| {
                        db(&item.domain)
                            .selected
                            .as_ref()
                            .and_then(|e| e.get(slot))
                            .map(str::to_string)
                    })
                };
                out.push(with_value(item, value));
            }
            _ => out.push(item.clone()),
        }
    }
    out
}

fn with_value(item: &crate::dialog::act::ActItem, value: Option<String>) -> crate::dialog::act::ActItem {
    crate::dialog::act::ActItem::new(item.domain.clone(), item.intent, item.slot.clone(), value)
}
