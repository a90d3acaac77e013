use std::rc::Rc;

use super::{ParamId, ParamSet, Tensor, TensorError};

type Result<T> = std::result::Result<T, TensorError>;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    SoftmaxRows(Var),
    ConcatCols(Vec<Var>),
    Mean(Var),
    Sum(Var),
    SliceRows(Var, usize),
    GatherRows(Var, Rc<[usize]>),
    Transpose(Var),
    BceWithLogits(Var, Rc<[f64]>),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records primitive applications in execution order.
///
/// Recording order is a topological order, so `backward` is a single reverse
/// sweep. A tape is consumed by `backward`; a second call without recording a
/// new graph returns [`TensorError::TapeConsumed`].
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

/// Result of a backward pass.
#[derive(Debug)]
pub struct Gradients {
    by_node: Vec<Option<Tensor>>,
    params: Vec<(ParamId, Tensor)>,
}

impl Gradients {
    /// Gradient with respect to a recorded variable, if it was reachable.
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.by_node.get(v.0).and_then(Option::as_ref)
    }

    pub fn params(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.params.iter().map(|(id, g)| (*id, g))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    fn check(&self, v: Var) -> Result<&Tensor> {
        self.nodes
            .get(v.0)
            .map(|n| &n.value)
            .ok_or(TensorError::UnknownVar(v.0))
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> Var {
        self.consumed = false;
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// A constant: no gradient flows into it.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// A free leaf that receives a gradient.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Binds a parameter; its gradient is reported under its id.
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        self.push(params.value(id).clone(), Op::Param(id), true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.check(a)?.matmul(self.check(b)?)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::MatMul(a, b), ng))
    }

    fn zip_same(
        &self,
        op: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor> {
        let (ta, tb) = (self.check(a)?, self.check(b)?);
        if ta.shape() != tb.shape() {
            return Err(TensorError::Shape {
                op,
                lhs: ta.shape(),
                rhs: tb.shape(),
            });
        }
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        Tensor::new(ta.rows(), ta.cols(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same("add", a, b, |x, y| x + y)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Add(a, b), ng))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same("sub", a, b, |x, y| x - y)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Sub(a, b), ng))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.zip_same("mul", a, b, |x, y| x * y)?;
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(out, Op::Mul(a, b), ng))
    }

    /// Adds a `1×m` row vector to every row of an `n×m` matrix.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (ta, tr) = (self.check(a)?, self.check(row)?);
        if tr.rows() != 1 || tr.cols() != ta.cols() {
            return Err(TensorError::Shape {
                op: "add_row",
                lhs: ta.shape(),
                rhs: tr.shape(),
            });
        }
        let m = ta.cols();
        let data = ta
            .data()
            .iter()
            .enumerate()
            .map(|(i, &x)| x + tr.data()[i % m])
            .collect();
        let out = Tensor::new(ta.rows(), m, data)?;
        let ng = self.needs(a) || self.needs(row);
        Ok(self.push(out, Op::AddRow(a, row), ng))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Result<Var> {
        let out = self.check(a)?.map(|x| x * factor);
        let ng = self.needs(a);
        Ok(self.push(out, Op::Scale(a, factor), ng))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(sigmoid);
        let ng = self.needs(a);
        Ok(self.push(out, Op::Sigmoid(a), ng))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(f64::tanh);
        let ng = self.needs(a);
        Ok(self.push(out, Op::Tanh(a), ng))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.map(|x| x.max(0.0));
        let ng = self.needs(a);
        Ok(self.push(out, Op::Relu(a), ng))
    }

    /// `relu(x) - slope * relu(-x)`, composed from recorded primitives.
    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Result<Var> {
        let pos = self.relu(a)?;
        let neg_in = self.scale(a, -1.0)?;
        let neg = self.relu(neg_in)?;
        let neg = self.scale(neg, slope)?;
        self.sub(pos, neg)
    }

    /// Row-wise softmax with max subtraction.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let t = self.check(a)?;
        let (r, c) = t.shape();
        if c == 0 {
            return Err(TensorError::Argument {
                op: "softmax_rows",
                message: "zero columns".into(),
            });
        }
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            let row = t.row(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&x| (x - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            out.extend(exps.into_iter().map(|e| e / z));
        }
        let out = Tensor::new(r, c, out)?;
        let ng = self.needs(a);
        Ok(self.push(out, Op::SoftmaxRows(a), ng))
    }

    /// Concatenates along columns; all parts must share a row count.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or(TensorError::Argument {
            op: "concat_cols",
            message: "no inputs".into(),
        })?;
        let rows = self.check(first)?.rows();
        let mut total = 0;
        for &p in parts {
            let t = self.check(p)?;
            if t.rows() != rows {
                return Err(TensorError::Shape {
                    op: "concat_cols",
                    lhs: self.shape(first),
                    rhs: t.shape(),
                });
            }
            total += t.cols();
        }
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.nodes[p.0].value.row(i));
            }
        }
        let out = Tensor::new(rows, total, data)?;
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(out, Op::ConcatCols(parts.to_vec()), ng))
    }

    /// Mean over all entries, as a `1×1` tensor.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let t = self.check(a)?;
        if t.is_empty() {
            return Err(TensorError::Argument {
                op: "mean",
                message: "empty tensor".into(),
            });
        }
        let out = Tensor::scalar(t.data().iter().sum::<f64>() / t.len() as f64);
        let ng = self.needs(a);
        Ok(self.push(out, Op::Mean(a), ng))
    }

    /// Sum over all entries, as a `1×1` tensor.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let out = Tensor::scalar(self.check(a)?.data().iter().sum());
        let ng = self.needs(a);
        Ok(self.push(out, Op::Sum(a), ng))
    }

    /// Rows `start..start + len`.
    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let t = self.check(a)?;
        if start + len > t.rows() {
            return Err(TensorError::Argument {
                op: "slice_rows",
                message: format!("rows {start}..{} of {}", start + len, t.rows()),
            });
        }
        let c = t.cols();
        let out = Tensor::new(len, c, t.data()[start * c..(start + len) * c].to_vec())?;
        let ng = self.needs(a);
        Ok(self.push(out, Op::SliceRows(a, start), ng))
    }

    /// Picks rows by index (repeats allowed).
    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let t = self.check(a)?;
        let c = t.cols();
        let mut data = Vec::with_capacity(idx.len() * c);
        for &i in idx {
            if i >= t.rows() {
                return Err(TensorError::Argument {
                    op: "gather_rows",
                    message: format!("row {i} of {}", t.rows()),
                });
            }
            data.extend_from_slice(t.row(i));
        }
        let out = Tensor::new(idx.len(), c, data)?;
        let ng = self.needs(a);
        Ok(self.push(out, Op::GatherRows(a, idx.into()), ng))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let out = self.check(a)?.transpose();
        let ng = self.needs(a);
        Ok(self.push(out, Op::Transpose(a), ng))
    }

    /// Mean binary cross-entropy of logits against 0/1 targets, numerically
    /// stable form `max(x, 0) - x*y + ln(1 + e^{-|x|})`.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64]) -> Result<Var> {
        let t = self.check(logits)?;
        if t.len() != targets.len() || t.is_empty() {
            return Err(TensorError::Argument {
                op: "bce_with_logits",
                message: format!("{} logits vs {} targets", t.len(), targets.len()),
            });
        }
        let total: f64 = t
            .data()
            .iter()
            .zip(targets)
            .map(|(&x, &y)| x.max(0.0) - x * y + (-x.abs()).exp().ln_1p())
            .sum();
        let out = Tensor::scalar(total / targets.len() as f64);
        let ng = self.needs(logits);
        Ok(self.push(out, Op::BceWithLogits(logits, targets.into()), ng))
    }

    /// Reverse sweep from a `1×1` loss. Consumes the recorded graph.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        if self.consumed {
            return Err(TensorError::TapeConsumed);
        }
        let shape = self.check(loss)?.shape();
        if shape != (1, 1) {
            return Err(TensorError::NonScalarLoss(shape));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].needs_grad {
                continue;
            }
            self.backprop_node(i, &g, &mut grads);
            grads[i] = Some(g);
        }

        let params = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n.op {
                Op::Param(id) => Some((
                    id,
                    grads[i]
                        .clone()
                        .unwrap_or_else(|| Tensor::zeros(n.value.rows(), n.value.cols())),
                )),
                _ => None,
            })
            .collect();
        self.nodes.clear();
        self.consumed = true;
        Ok(Gradients {
            by_node: grads,
            params,
        })
    }

    fn backprop_node(&self, i: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[i];
        let mut send = |v: Var, delta: Tensor| {
            if !self.nodes[v.0].needs_grad {
                return;
            }
            match &mut grads[v.0] {
                Some(acc) => acc.add_assign(&delta),
                slot @ None => *slot = Some(delta),
            }
        };
        match &node.op {
            Op::Leaf | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                if self.needs(*a) {
                    send(*a, g.matmul(&tb.transpose()).expect("matmul backward"));
                }
                if self.needs(*b) {
                    send(*b, ta.transpose().matmul(g).expect("matmul backward"));
                }
            }
            Op::Add(a, b) => {
                send(*a, g.clone());
                send(*b, g.clone());
            }
            Op::Sub(a, b) => {
                send(*a, g.clone());
                send(*b, g.map(|x| -x));
            }
            Op::AddRow(a, row) => {
                send(*a, g.clone());
                let m = g.cols();
                let mut col_sum = Tensor::zeros(1, m);
                for r in 0..g.rows() {
                    for (c, v) in g.row(r).iter().enumerate() {
                        col_sum.data_mut()[c] += v;
                    }
                }
                send(*row, col_sum);
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                send(*a, hadamard(g, tb));
                send(*b, hadamard(g, ta));
            }
            Op::Scale(a, f) => send(*a, g.map(|x| x * f)),
            Op::Sigmoid(a) => {
                let y = &node.value;
                send(*a, zip(g, y, |gi, yi| gi * yi * (1.0 - yi)));
            }
            Op::Tanh(a) => {
                let y = &node.value;
                send(*a, zip(g, y, |gi, yi| gi * (1.0 - yi * yi)));
            }
            Op::Relu(a) => {
                let x = self.value(*a);
                send(*a, zip(g, x, |gi, xi| if xi > 0.0 { gi } else { 0.0 }));
            }
            Op::SoftmaxRows(a) => {
                let y = &node.value;
                let (r, c) = y.shape();
                let mut out = Vec::with_capacity(r * c);
                for row in 0..r {
                    let (yr, gr) = (y.row(row), g.row(row));
                    let dot: f64 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    out.extend(yr.iter().zip(gr).map(|(yi, gi)| yi * (gi - dot)));
                }
                send(*a, Tensor::new(r, c, out).expect("softmax backward"));
            }
            Op::ConcatCols(parts) => {
                let mut offset = 0;
                for p in parts {
                    let (rows, cols) = self.shape(*p);
                    let mut piece = Vec::with_capacity(rows * cols);
                    for r in 0..rows {
                        piece.extend_from_slice(&g.row(r)[offset..offset + cols]);
                    }
                    send(*p, Tensor::new(rows, cols, piece).expect("concat backward"));
                    offset += cols;
                }
            }
            Op::Mean(a) => {
                let (r, c) = self.shape(*a);
                send(*a, Tensor::full(r, c, g.item() / (r * c) as f64));
            }
            Op::Sum(a) => {
                let (r, c) = self.shape(*a);
                send(*a, Tensor::full(r, c, g.item()));
            }
            Op::SliceRows(a, start) => {
                let (r, c) = self.shape(*a);
                let mut full = Tensor::zeros(r, c);
                full.data_mut()[start * c..start * c + g.len()].copy_from_slice(g.data());
                send(*a, full);
            }
            Op::GatherRows(a, idx) => {
                let (r, c) = self.shape(*a);
                let mut full = Tensor::zeros(r, c);
                for (k, &i) in idx.iter().enumerate() {
                    let dst = &mut full.data_mut()[i * c..(i + 1) * c];
                    for (d, s) in dst.iter_mut().zip(g.row(k)) {
                        *d += s;
                    }
                }
                send(*a, full);
            }
            Op::Transpose(a) => send(*a, g.transpose()),
            Op::BceWithLogits(a, targets) => {
                let x = self.value(*a);
                let scale = g.item() / targets.len() as f64;
                let data = x
                    .data()
                    .iter()
                    .zip(targets.iter())
                    .map(|(&xi, &yi)| (sigmoid(xi) - yi) * scale)
                    .collect();
                send(
                    *a,
                    Tensor::new(x.rows(), x.cols(), data).expect("bce backward"),
                );
            }
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn zip(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| f(x, y))
        .collect();
    Tensor::new(a.rows(), a.cols(), data).expect("same shape")
}

fn hadamard(a: &Tensor, b: &Tensor) -> Tensor {
    zip(a, b, |x, y| x * y)
}
