//! Corpus-level BLEU-4 over whitespace tokens: clipped n-gram counts pooled
//! across the corpus, uniform weights, the standard brevity penalty, and
//! add-epsilon smoothing for orders with zero matches. Identical corpora
//! score exactly 100.

use std::collections::HashMap;

use thiserror::Error;

const MAX_ORDER: usize = 4;
const EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BleuError {
    #[error("hypothesis/reference length mismatch: {hyps} vs {refs}")]
    LengthMismatch { hyps: usize, refs: usize },
}

pub fn corpus_bleu(hypotheses: &[String], references: &[String]) -> Result<f64, BleuError> {
    if hypotheses.len() != references.len() {
        return Err(BleuError::LengthMismatch {
            hyps: hypotheses.len(),
            refs: references.len(),
        });
    }
    let mut matched = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let ref_counts = ngram_counts(&r, n);
            let mut hyp_counts: HashMap<&[&str], usize> = HashMap::new();
            if h.len() >= n {
                for gram in h.windows(n) {
                    *hyp_counts.entry(gram).or_default() += 1;
                }
            }
            for (gram, count) in &hyp_counts {
                total[n - 1] += count;
                matched[n - 1] += (*count).min(ref_counts.get(gram).copied().unwrap_or(0));
            }
        }
    }

    if hyp_len == 0 {
        return Ok(0.0);
    }
    let mut log_precision_sum = 0.0;
    for n in 0..MAX_ORDER {
        // An order with no n-grams anywhere (very short corpus) is vacuous;
        // an order with grams but no matches is smoothed.
        let p = if total[n] == 0 {
            1.0
        } else if matched[n] == 0 {
            EPSILON
        } else {
            matched[n] as f64 / total[n] as f64
        };
        log_precision_sum += p.ln() / MAX_ORDER as f64;
    }
    let brevity = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(100.0 * brevity * log_precision_sum.exp())
}

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_default() += 1;
        }
    }
    counts
}
