//! AdamW with decoupled weight decay and a trapezoid-free learning-rate
//! schedule: linear warmup over the first fifth of training, then linear
//! decay to zero. Policy-gradient runs use a fixed rate instead.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::Params;

/// Peak learning rate for supervised runs; policy-gradient runs use a
/// fifth of it, held constant.
pub const SL_MAX_LR: f64 = 1e-3;
pub const RL_LR: f64 = SL_MAX_LR / 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LrSchedule {
    /// Ramp 0 → max over the first `warmup` of `total` steps, then decay
    /// linearly back to 0 at `total`.
    WarmupLinear { max_lr: f64, total: usize, warmup: usize },
    Fixed { lr: f64 },
}

impl LrSchedule {
    /// Standard supervised shape: 20% warmup.
    pub fn supervised(max_lr: f64, total: usize) -> Self {
        LrSchedule::WarmupLinear { max_lr, total, warmup: total / 5 }
    }

    /// Rate for 1-based step `t`. Hits the peak exactly at the end of
    /// warmup and 0 at (and beyond) the final step.
    pub fn lr_at(&self, t: usize) -> f64 {
        match *self {
            LrSchedule::Fixed { lr } => lr,
            LrSchedule::WarmupLinear { max_lr, total, warmup } => {
                if t <= warmup && warmup > 0 {
                    max_lr * t as f64 / warmup as f64
                } else if t >= total {
                    0.0
                } else {
                    max_lr * (total - t) as f64 / (total - warmup) as f64
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamW {
    pub schedule: LrSchedule,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: usize,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl AdamW {
    pub fn new(schedule: LrSchedule, weight_decay: f64) -> Self {
        AdamW {
            schedule,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn current_lr(&self) -> f64 {
        self.schedule.lr_at(self.step)
    }

    /// One update. `grads` is aligned with the parameter walk order.
    pub fn update(&mut self, params: &mut Params, grads: &[Array2<f64>]) {
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| Array2::zeros(g.dim())).collect();
            self.v = grads.iter().map(|g| Array2::zeros(g.dim())).collect();
        }
        assert_eq!(self.m.len(), grads.len(), "gradient list changed shape");
        self.step += 1;
        let lr = self.schedule.lr_at(self.step);
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);

        for (i, (_, p)) in params.iter_mut().enumerate() {
            let g = &grads[i];
            self.m[i].zip_mut_with(g, |m, &g| *m = self.beta1 * *m + (1.0 - self.beta1) * g);
            self.v[i].zip_mut_with(g, |v, &g| *v = self.beta2 * *v + (1.0 - self.beta2) * g * g);
            let m = &self.m[i];
            let v = &self.v[i];
            for ((p, &m), &v) in p.iter_mut().zip(m.iter()).zip(v.iter()) {
                let m_hat = m / bc1;
                let v_hat = v / bc2;
                *p -= lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * *p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::model::{GenerativeModel, ModelConfig};

    #[test]
    fn schedule_matches_the_piecewise_linear_closed_form() {
        let total = 50;
        let sched = LrSchedule::supervised(2e-3, total);
        let warmup = total / 5;

        // Independent closed form, written from the definition.
        let oracle = |t: usize| -> f64 {
            if t <= warmup {
                2e-3 * (t as f64 / warmup as f64)
            } else {
                2e-3 * ((total - t) as f64 / (total - warmup) as f64)
            }
        };
        for t in 1..=total {
            assert!((sched.lr_at(t) - oracle(t)).abs() < 1e-15, "step {t}");
        }
        assert_eq!(sched.lr_at(warmup), 2e-3, "peak lands exactly on the warmup boundary");
        assert_eq!(sched.lr_at(total), 0.0);
        assert_eq!(sched.lr_at(total + 7), 0.0);

        // Second differences vanish inside each linear piece.
        for t in 2..warmup {
            let dd = sched.lr_at(t + 1) - 2.0 * sched.lr_at(t) + sched.lr_at(t - 1);
            assert!(dd.abs() < 1e-15);
        }
        for t in warmup + 2..total {
            let dd = sched.lr_at(t + 1) - 2.0 * sched.lr_at(t) + sched.lr_at(t - 1);
            assert!(dd.abs() < 1e-15);
        }

        assert_eq!(LrSchedule::Fixed { lr: RL_LR }.lr_at(999), SL_MAX_LR / 5.0);
    }

    #[test]
    fn zero_grads_and_zero_decay_change_nothing() {
        let model = GenerativeModel::new(ModelConfig::tiny(7), 3);
        let mut params = model.params.clone();
        let before = params.clone();
        let grads: Vec<Array2<f64>> =
            params.iter().map(|(_, p)| Array2::zeros(p.dim())).collect();

        let mut opt = AdamW::new(LrSchedule::Fixed { lr: 0.1 }, 0.0);
        for _ in 0..3 {
            opt.update(&mut params, &grads);
        }
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_and_decay_match_hand_computed_values() {
        let mut params = Params::single("w", Array2::from_elem((1, 1), 2.0));
        let g = vec![Array2::from_elem((1, 1), 0.5)];
        let mut opt = AdamW::new(LrSchedule::Fixed { lr: 0.1 }, 0.0);
        opt.update(&mut params, &g);
        // After one step m̂ = g, v̂ = g², so the step is lr·g/(|g|+ε).
        let expect = 2.0 - 0.1 * (0.5 / (0.5 + 1e-8));
        assert!((params.get("w")[[0, 0]] - expect).abs() < 1e-12);

        // Pure decay: zero grads shrink the weight by lr·wd·w per step.
        let mut params = Params::single("w", Array2::from_elem((1, 1), 2.0));
        let zero = vec![Array2::zeros((1, 1))];
        let mut opt = AdamW::new(LrSchedule::Fixed { lr: 0.1 }, 0.01);
        let mut expect = 2.0;
        for _ in 0..5 {
            opt.update(&mut params, &zero);
            expect *= 1.0 - 0.1 * 0.01;
        }
        assert!((params.get("w")[[0, 0]] - expect).abs() < 1e-12);
    }

    #[test]
    fn descends_a_quadratic() {
        let mut params = Params::single("x", Array2::from_elem((1, 1), 3.0));
        let mut opt = AdamW::new(LrSchedule::Fixed { lr: 0.05 }, 0.0);
        for _ in 0..400 {
            let x = params.get("x")[[0, 0]];
            opt.update(&mut params, &[Array2::from_elem((1, 1), 2.0 * x)]);
        }
        assert!(params.get("x")[[0, 0]].abs() < 1e-3);
    }
}
