//! Reverse-mode autodiff over f64 matrices.
//!
//! A `Tape` is an append-only list of nodes; every operation records its
//! inputs and whatever intermediates its backward pass needs. Gradients flow
//! by walking the tape in reverse. All math is f64 and single-threaded, so
//! results are bitwise reproducible.
//!
//! The operation set is deliberately small and fused at the granularity the
//! model needs (layer norm, multi-head attention, masked cross-entropy); each
//! backward formula is checked against central finite differences in the
//! tests below.

use ndarray::{Array1, Array2, Axis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

/// Spans of rows that form independent sequences packed into one tensor.
/// Attention never crosses a span boundary.
pub type Spans = Vec<(usize, usize)>;

/// One target token: (row in the logits tensor, token id, loss weight).
pub type Target = (usize, usize, f64);

enum Op {
    Leaf,
    /// Embedding lookup: out row i = table row rows\[i\].
    Gather { table: TensorId, rows: Vec<usize> },
    /// a · b
    MatMul { a: TensorId, b: TensorId },
    /// a · bᵀ (tied-embedding projection)
    MatMulT { a: TensorId, b: TensorId },
    Add { a: TensorId, b: TensorId },
    /// x + row broadcast over every row of x.
    AddRow { x: TensorId, row: TensorId },
    Scale { x: TensorId, c: f64 },
    /// tanh-approximated gelu; keeps its input.
    Gelu { x: TensorId },
    /// Per-row layer norm with learned gain/bias; keeps x̂ and 1/σ.
    LayerNorm { x: TensorId, gain: TensorId, bias: TensorId, norm: Array2<f64>, inv_std: Array1<f64> },
    /// Causal multi-head attention over packed spans; keeps the softmax
    /// matrices (one per span × head, in that order).
    Attention { q: TensorId, k: TensorId, v: TensorId, heads: usize, spans: Spans, probs: Vec<Array2<f64>> },
    /// Σ w·(−log softmax(logits)[row, token]); keeps the row softmaxes.
    CrossEntropy { logits: TensorId, targets: Vec<Target>, probs: Vec<Array1<f64>> },
    /// Σ x⊙w, as a 1×1 tensor.
    WeightedSum { x: TensorId, w: Array2<f64> },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

const LN_EPS: f64 = 1e-5;

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn value(&self, id: TensorId) -> &Array2<f64> {
        &self.nodes[id.0].value
    }

    /// The scalar held by a 1×1 tensor.
    pub fn scalar(&self, id: TensorId) -> f64 {
        let v = self.value(id);
        debug_assert_eq!(v.dim(), (1, 1));
        v[[0, 0]]
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> TensorId {
        self.nodes.push(Node { value, op });
        TensorId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> TensorId {
        self.push(value, Op::Leaf)
    }

    pub fn gather(&mut self, table: TensorId, rows: &[usize]) -> TensorId {
        let src = self.value(table);
        let mut out = Array2::zeros((rows.len(), src.ncols()));
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).assign(&src.row(r));
        }
        self.push(out, Op::Gather { table, rows: rows.to_vec() })
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = self.value(a).dot(self.value(b));
        self.push(value, Op::MatMul { a, b })
    }

    pub fn matmul_t(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = self.value(a).dot(&self.value(b).t());
        self.push(value, Op::MatMulT { a, b })
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let value = self.value(a) + self.value(b);
        self.push(value, Op::Add { a, b })
    }

    pub fn add_row(&mut self, x: TensorId, row: TensorId) -> TensorId {
        debug_assert_eq!(self.value(row).nrows(), 1);
        let value = self.value(x) + &self.value(row).row(0);
        self.push(value, Op::AddRow { x, row })
    }

    pub fn scale(&mut self, x: TensorId, c: f64) -> TensorId {
        let value = self.value(x) * c;
        self.push(value, Op::Scale { x, c })
    }

    pub fn gelu(&mut self, x: TensorId) -> TensorId {
        let value = self.value(x).mapv(gelu);
        self.push(value, Op::Gelu { x })
    }

    pub fn layer_norm(&mut self, x: TensorId, gain: TensorId, bias: TensorId) -> TensorId {
        let xv = self.value(x);
        let mut norm = Array2::zeros(xv.dim());
        let mut inv_std = Array1::zeros(xv.nrows());
        for (i, row) in xv.rows().into_iter().enumerate() {
            let mean = row.mean().unwrap();
            let var = row.mapv(|v| (v - mean) * (v - mean)).mean().unwrap();
            let inv = 1.0 / (var + LN_EPS).sqrt();
            inv_std[i] = inv;
            norm.row_mut(i).assign(&row.mapv(|v| (v - mean) * inv));
        }
        let value = &norm * &self.value(gain).row(0) + &self.value(bias).row(0);
        self.push(value, Op::LayerNorm { x, gain, bias, norm, inv_std })
    }

    /// Q, K, V are (T × d) with d divisible by `heads`; each span attends
    /// causally within itself. Output is the concatenated head contexts.
    pub fn attention(
        &mut self,
        q: TensorId,
        k: TensorId,
        v: TensorId,
        heads: usize,
        spans: &[(usize, usize)],
    ) -> TensorId {
        let (t, d) = self.value(q).dim();
        debug_assert_eq!(d % heads, 0);
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let mut out = Array2::zeros((t, d));
        let mut probs = Vec::with_capacity(spans.len() * heads);
        for &(start, len) in spans {
            for h in 0..heads {
                let cols = h * dh..(h + 1) * dh;
                let qs = self.value(q).slice(ndarray::s![start..start + len, cols.clone()]).to_owned();
                let ks = self.value(k).slice(ndarray::s![start..start + len, cols.clone()]).to_owned();
                let vs = self.value(v).slice(ndarray::s![start..start + len, cols.clone()]).to_owned();
                let mut scores = qs.dot(&ks.t()) * scale;
                for i in 0..len {
                    for j in i + 1..len {
                        scores[[i, j]] = f64::NEG_INFINITY;
                    }
                }
                let a = softmax_rows(&scores);
                let ctx = a.dot(&vs);
                out.slice_mut(ndarray::s![start..start + len, cols]).assign(&ctx);
                probs.push(a);
            }
        }
        self.push(out, Op::Attention { q, k, v, heads, spans: spans.to_vec(), probs })
    }

    /// Weighted masked negative log-likelihood, summed over targets. Rows not
    /// named in `targets` contribute nothing.
    pub fn cross_entropy(&mut self, logits: TensorId, targets: &[Target]) -> TensorId {
        let lv = self.value(logits);
        let mut total = 0.0;
        let mut probs = Vec::with_capacity(targets.len());
        for &(row, token, weight) in targets {
            let p = softmax_row(&lv.row(row).to_owned());
            total -= weight * p[token].max(f64::MIN_POSITIVE).ln();
            probs.push(p);
        }
        let value = Array2::from_elem((1, 1), total);
        self.push(value, Op::CrossEntropy { logits, targets: targets.to_vec(), probs })
    }

    pub fn weighted_sum(&mut self, x: TensorId, w: Array2<f64>) -> TensorId {
        debug_assert_eq!(self.value(x).dim(), w.dim());
        let total = (self.value(x) * &w).sum();
        self.push(Array2::from_elem((1, 1), total), Op::WeightedSum { x, w })
    }

    /// Gradients of a 1×1 root with respect to every node, by reverse sweep.
    pub fn backward(&self, root: TensorId) -> Gradients {
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        grads[root.0] = Some(Array2::from_elem((1, 1), 1.0));

        for idx in (0..=root.0).rev() {
            let Some(grad) = grads[idx].take() else { continue };
            match &self.nodes[idx].op {
                Op::Leaf => {
                    grads[idx] = Some(grad);
                    continue;
                }
                Op::Gather { table, rows } => {
                    let (table, rows) = (*table, rows.clone());
                    let mut dt = Array2::zeros(self.value(table).dim());
                    for (i, &r) in rows.iter().enumerate() {
                        let mut dst = dt.row_mut(r);
                        dst += &grad.row(i);
                    }
                    accumulate(&mut grads, table, dt);
                }
                Op::MatMul { a, b } => {
                    let (a, b) = (*a, *b);
                    let da = grad.dot(&self.value(b).t());
                    let db = self.value(a).t().dot(&grad);
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::MatMulT { a, b } => {
                    let (a, b) = (*a, *b);
                    let da = grad.dot(self.value(b));
                    let db = grad.t().dot(self.value(a));
                    accumulate(&mut grads, a, da);
                    accumulate(&mut grads, b, db);
                }
                Op::Add { a, b } => {
                    let (a, b) = (*a, *b);
                    accumulate(&mut grads, a, grad.clone());
                    accumulate(&mut grads, b, grad);
                }
                Op::AddRow { x, row } => {
                    let (x, row) = (*x, *row);
                    let drow = grad.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut grads, x, grad);
                    accumulate(&mut grads, row, drow);
                }
                Op::Scale { x, c } => {
                    let (x, c) = (*x, *c);
                    accumulate(&mut grads, x, grad * c);
                }
                Op::Gelu { x } => {
                    let x = *x;
                    let dx = self.value(x).mapv(gelu_grad) * &grad;
                    accumulate(&mut grads, x, dx);
                }
                Op::LayerNorm { x, gain, bias, norm, inv_std } => {
                    let (x, gain, bias) = (*x, *gain, *bias);
                    let (norm, inv_std) = (norm.clone(), inv_std.clone());
                    let g = self.value(gain).row(0).to_owned();
                    let dgain = (&grad * &norm).sum_axis(Axis(0)).insert_axis(Axis(0));
                    let dbias = grad.sum_axis(Axis(0)).insert_axis(Axis(0));
                    let mut dx = Array2::zeros(grad.dim());
                    for i in 0..grad.nrows() {
                        let dnorm = &grad.row(i) * &g;
                        let m1 = dnorm.mean().unwrap();
                        let m2 = (&dnorm * &norm.row(i)).mean().unwrap();
                        let row = (&dnorm - m1 - &(&norm.row(i) * m2)) * inv_std[i];
                        dx.row_mut(i).assign(&row);
                    }
                    accumulate(&mut grads, x, dx);
                    accumulate(&mut grads, gain, dgain);
                    accumulate(&mut grads, bias, dbias);
                }
                Op::Attention { q, k, v, heads, spans, probs } => {
                    let (q, k, v, heads) = (*q, *k, *v, *heads);
                    let spans = spans.clone();
                    let probs = probs.clone();
                    let d = self.value(q).ncols();
                    let dh = d / heads;
                    let scale = 1.0 / (dh as f64).sqrt();
                    let mut dq = Array2::zeros(self.value(q).dim());
                    let mut dk = Array2::zeros(self.value(k).dim());
                    let mut dv = Array2::zeros(self.value(v).dim());
                    let mut pi = 0;
                    for &(start, len) in &spans {
                        for h in 0..heads {
                            let cols = h * dh..(h + 1) * dh;
                            let rows = ndarray::s![start..start + len, cols.clone()];
                            let qs = self.value(q).slice(rows).to_owned();
                            let ks = self.value(k).slice(rows).to_owned();
                            let vs = self.value(v).slice(rows).to_owned();
                            let a = &probs[pi];
                            pi += 1;
                            let dctx = grad
                                .slice(ndarray::s![start..start + len, cols.clone()])
                                .to_owned();
                            let dvs = a.t().dot(&dctx);
                            let da = dctx.dot(&vs.t());
                            // softmax backward per row
                            let mut ds = a * &da;
                            for i in 0..len {
                                let s: f64 = ds.row(i).sum();
                                let adj = a.row(i).mapv(|p| p * s);
                                let mut row = ds.row_mut(i);
                                row -= &adj;
                            }
                            let dqs = ds.dot(&ks) * scale;
                            let dks = ds.t().dot(&qs) * scale;
                            dq.slice_mut(ndarray::s![start..start + len, cols.clone()])
                                .assign(&dqs);
                            dk.slice_mut(ndarray::s![start..start + len, cols.clone()])
                                .assign(&dks);
                            dv.slice_mut(ndarray::s![start..start + len, cols]).assign(&dvs);
                        }
                    }
                    accumulate(&mut grads, q, dq);
                    accumulate(&mut grads, k, dk);
                    accumulate(&mut grads, v, dv);
                }
                Op::CrossEntropy { logits, targets, probs } => {
                    let logits = *logits;
                    let (targets, probs) = (targets.clone(), probs.clone());
                    let g = grad[[0, 0]];
                    let mut dl = Array2::zeros(self.value(logits).dim());
                    for ((row, token, weight), p) in targets.iter().zip(&probs) {
                        let mut dst = dl.row_mut(*row);
                        dst += &p.mapv(|v| g * weight * v);
                        dl[[*row, *token]] -= g * weight;
                    }
                    accumulate(&mut grads, logits, dl);
                }
                Op::WeightedSum { x, w } => {
                    let x = *x;
                    let dx = w * grad[[0, 0]];
                    accumulate(&mut grads, x, dx);
                }
            }
        }
        Gradients { grads }
    }
}

pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
}

impl Gradients {
    /// Gradient of the root with respect to `id`; zero-shaped None means the
    /// node did not influence the root.
    pub fn get(&self, id: TensorId) -> Option<&Array2<f64>> {
        self.grads[id.0].as_ref()
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], id: TensorId, delta: Array2<f64>) {
    match &mut grads[id.0] {
        Some(g) => *g += &delta,
        slot @ None => *slot = Some(delta),
    }
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

pub(crate) fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::tanh(GELU_C * (x + GELU_A * x * x * x)))
}

fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = libm::tanh(u);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

fn softmax_row(row: &Array1<f64>) -> Array1<f64> {
    let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exp = row.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

pub(crate) fn softmax_rows(m: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(m.dim());
    for (i, row) in m.rows().into_iter().enumerate() {
        out.row_mut(i).assign(&softmax_row(&row.to_owned()));
    }
    out
}
