//! Measurement: dialog-level inform/success judging, corpus BLEU, live
//! interaction evaluation, cross-model matrices, corpus-based evaluation
//! with gold contexts, matched-pairs significance, and transcript export.

pub mod bleu;
pub mod judge;
pub mod sigtest;
pub mod transcript;

pub use bleu::corpus_bleu;
pub use judge::{judge_dialog, Verdict};
pub use sigtest::matched_pairs_test;
pub use transcript::{export_transcripts, TranscriptMode};

/// Combined corpus score: half credit for task measures (percent scale) plus
/// BLEU. Rates come in as fractions.
pub fn combined_score(inform_rate: f64, success_rate: f64, bleu: f64) -> f64 {
    0.5 * (inform_rate * 100.0 + success_rate * 100.0) + bleu
}

#[cfg(test)]
mod tests {
    #[test]
    fn combined_score_matches_hand_arithmetic() {
        let c = super::combined_score(0.8410, 0.7210, 19.24);
        assert!((c - 97.34).abs() < 0.01, "combined {c}");
    }
}
