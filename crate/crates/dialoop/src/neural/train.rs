//! Batched training steps. Sequences are packed side by side into one
//! forward pass (the attention mask keeps them independent), microbatch
//! gradients are summed sequentially in batch order so a run is exactly
//! reproducible, and the summed gradient is normalized by total target
//! weight before the optimizer sees it.

use ndarray::Array2;
use thiserror::Error;

use super::model::{GenerativeModel, ModelError};
use super::optim::AdamW;
use super::tape::{Tape, Target};

/// One training example: a packed token sequence plus a per-position loss
/// weight. `weights[i]` scales the loss for predicting `tokens[i]` from
/// position i−1; zero means the position is context only. `weights[0]` is
/// ignored (nothing predicts the first token).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence {
    pub tokens: Vec<u32>,
    pub weights: Vec<f64>,
}

impl TrainingSequence {
    /// Supervised example: unit loss on every position from `target_from`
    /// onward, context before that.
    pub fn supervised(tokens: Vec<u32>, target_from: usize) -> Self {
        let weights = (0..tokens.len()).map(|i| f64::from(i >= target_from.max(1))).collect();
        TrainingSequence { tokens, weights }
    }

    pub fn target_weight(&self) -> f64 {
        self.weights.iter().skip(1).sum()
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite loss or gradient at microbatch {microbatch}; aborting")]
    NonFinite { microbatch: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("batch has no positions with loss weight")]
    EmptyTarget,
}

/// Weighted-NLL sum and its parameter gradients over a batch, accumulated
/// microbatch by microbatch in order. Returns (nll sum, total |weight|,
/// gradient of the sum per parameter, in parameter walk order).
pub fn batch_grads(
    model: &GenerativeModel,
    seqs: &[TrainingSequence],
    micro_size: usize,
) -> Result<(f64, f64, Vec<Array2<f64>>), TrainError> {
    assert!(micro_size > 0);
    let mut nll_sum = 0.0;
    let mut weight_total = 0.0;
    let mut grads: Vec<Array2<f64>> =
        model.params.iter().map(|(_, p)| Array2::zeros(p.dim())).collect();

    for (mb, chunk) in seqs.chunks(micro_size).enumerate() {
        let mut tokens: Vec<u32> = Vec::new();
        let mut spans: Vec<(usize, usize)> = Vec::new();
        let mut targets: Vec<Target> = Vec::new();
        for seq in chunk {
            debug_assert_eq!(seq.tokens.len(), seq.weights.len());
            let start = tokens.len();
            spans.push((start, seq.tokens.len()));
            tokens.extend_from_slice(&seq.tokens);
            for (i, &w) in seq.weights.iter().enumerate().skip(1) {
                if w != 0.0 {
                    targets.push((start + i - 1, seq.tokens[i] as usize, w));
                    weight_total += w.abs();
                }
            }
        }
        if targets.is_empty() {
            continue;
        }

        let mut tape = Tape::new();
        let (loss, bound) = model.loss_graph(&mut tape, &tokens, &spans, &targets)?;
        let value = tape.scalar(loss);
        if !value.is_finite() {
            return Err(TrainError::NonFinite { microbatch: mb });
        }
        nll_sum += value;

        let node_grads = tape.backward(loss);
        for (acc, &id) in grads.iter_mut().zip(bound.ids()) {
            if let Some(g) = node_grads.get(id) {
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(TrainError::NonFinite { microbatch: mb });
                }
                *acc += g;
            }
        }
    }
    if weight_total == 0.0 {
        return Err(TrainError::EmptyTarget);
    }
    Ok((nll_sum, weight_total, grads))
}

#[derive(Debug, Clone, Copy)]
pub struct StepStats {
    /// Mean NLL per unit of target weight.
    pub loss: f64,
    pub target_weight: f64,
    pub lr: f64,
}

/// One supervised update: mean masked NLL over the batch, AdamW step.
pub fn sl_step(
    model: &mut GenerativeModel,
    opt: &mut AdamW,
    seqs: &[TrainingSequence],
    micro_size: usize,
) -> Result<StepStats, TrainError> {
    let (nll_sum, weight, mut grads) = batch_grads(model, seqs, micro_size)?;
    for g in &mut grads {
        *g /= weight;
    }
    opt.update(&mut model.params, &grads);
    if !model.params.all_finite() {
        return Err(TrainError::NonFinite { microbatch: usize::MAX });
    }
    Ok(StepStats { loss: nll_sum / weight, target_weight: weight, lr: opt.current_lr() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::ModelConfig;
    use crate::neural::optim::LrSchedule;
    use crate::rng;
    use rand::Rng as _;

    fn random_batch(vocab: u32, n: usize, len: usize, seed: u64) -> Vec<TrainingSequence> {
        let mut r = rng::stream(seed, "train-test-batch");
        (0..n)
            .map(|_| {
                let tokens: Vec<u32> = (0..len).map(|_| r.gen_range(0..vocab)).collect();
                TrainingSequence::supervised(tokens, len / 2)
            })
            .collect()
    }

    /// Central finite differences over every parameter entry. The model is
    /// ~1.2k parameters so the sweep stays cheap.
    #[test]
    fn analytic_gradients_match_finite_differences() {
        let cfg = ModelConfig::tiny(11);
        let model = GenerativeModel::new(cfg, 2);
        assert!(model.param_count() < 5_000);
        let batch = random_batch(11, 3, 9, 5);

        let (nll, weight, grads) = batch_grads(&model, &batch, 2).unwrap();
        assert!(nll.is_finite() && weight > 0.0);

        let loss_at = |m: &GenerativeModel| -> f64 {
            let (s, w, _) = batch_grads(m, &batch, 2).unwrap();
            s / w
        };

        let names: Vec<String> = model.params.iter().map(|(n, _)| n.to_string()).collect();
        for (pi, name) in names.iter().enumerate() {
            let dim = model.params.get(name).dim();
            for i in 0..dim.0 {
                for j in 0..dim.1 {
                    let mut probe = model.clone();
                    let x = probe.params.get(name)[[i, j]];
                    let h = 1e-5 * (1.0 + x.abs());
                    probe.params.get_mut(name)[[i, j]] = x + h;
                    let up = loss_at(&probe);
                    probe.params.get_mut(name)[[i, j]] = x - h;
                    let down = loss_at(&probe);
                    let fd = (up - down) / (2.0 * h);
                    let analytic = grads[pi][[i, j]] / weight;
                    let tol = 1e-4 * analytic.abs().max(fd.abs()).max(1e-6);
                    assert!(
                        (analytic - fd).abs() <= tol,
                        "{name}[{i},{j}]: analytic {analytic}, fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn twenty_sequences_are_memorized_in_two_hundred_steps() {
        let cfg = ModelConfig { vocab: 30, context: 16, width: 32, layers: 1, heads: 2 };
        let mut model = GenerativeModel::new(cfg, 9);
        let mut r = rng::stream(10, "memorize");
        let batch: Vec<TrainingSequence> = (0..20)
            .map(|_| {
                let tokens: Vec<u32> = (0..10).map(|_| r.gen_range(0..30)).collect();
                TrainingSequence::supervised(tokens, 3)
            })
            .collect();

        let mut opt = AdamW::new(LrSchedule::supervised(6e-3, 200), 0.0);
        let mut last = f64::INFINITY;
        for _ in 0..200 {
            last = sl_step(&mut model, &mut opt, &batch, 8).unwrap().loss;
        }
        assert!(last < 0.05, "final loss {last}");
    }

    #[test]
    fn microbatch_split_does_not_change_the_gradient() {
        let model = GenerativeModel::new(ModelConfig::tiny(11), 3);
        let batch = random_batch(11, 5, 8, 6);
        let (s1, w1, g1) = batch_grads(&model, &batch, 2).unwrap();
        let (s2, w2, g2) = batch_grads(&model, &batch, 5).unwrap();
        assert!((s1 - s2).abs() < 1e-10);
        assert_eq!(w1, w2);
        for (a, b) in g1.iter().zip(&g2) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let run = || {
            let mut model = GenerativeModel::new(ModelConfig::tiny(11), 4);
            let mut opt = AdamW::new(LrSchedule::supervised(1e-3, 10), 0.01);
            let batch = random_batch(11, 4, 8, 7);
            let mut losses = Vec::new();
            for _ in 0..10 {
                losses.push(sl_step(&mut model, &mut opt, &batch, 2).unwrap().loss);
            }
            (losses, model)
        };
        let (l1, m1) = run();
        let (l2, m2) = run();
        assert_eq!(l1, l2);
        assert_eq!(m1.params, m2.params);
    }

    #[test]
    fn poisoned_parameters_abort_instead_of_training_on_nan() {
        let mut model = GenerativeModel::new(ModelConfig::tiny(11), 5);
        model.params.get_mut("wte")[[0, 0]] = f64::NAN;
        let batch = random_batch(11, 2, 6, 8);
        let mut opt = AdamW::new(LrSchedule::Fixed { lr: 1e-3 }, 0.0);
        assert!(matches!(
            sl_step(&mut model, &mut opt, &batch, 2),
            Err(TrainError::NonFinite { .. })
        ));
    }

    #[test]
    fn batch_loss_agrees_with_summed_continuation_log_probs() {
        let model = GenerativeModel::new(ModelConfig::tiny(11), 6);
        let tokens: Vec<u32> = vec![1, 4, 2, 9, 0, 3, 7, 5];
        let target_from = 4;
        let seq = TrainingSequence::supervised(tokens.clone(), target_from);
        let (nll, weight, _) = batch_grads(&model, &[seq], 1).unwrap();

        let lp = model
            .log_probs_of(&tokens[..target_from], &tokens[target_from..])
            .unwrap();
        assert_eq!(lp.len() as f64, weight);
        assert!(
            (lp.iter().sum::<f64>() + nll).abs() < 1e-9,
            "sum log p {} vs -nll {}",
            lp.iter().sum::<f64>(),
            -nll
        );
    }
}
