//! Single-layer LSTM with a linear dense head.
//!
//! Per step, with gates stacked in the order input, forget, output,
//! candidate:
//!
//! ```text
//! i = sigmoid(W_i x + U_i h + b_i)
//! f = sigmoid(W_f x + U_f h + b_f)
//! o = sigmoid(W_o x + U_o h + b_o)
//! c' = f * c + i * tanh(W_c x + U_c h + b_c)
//! h' = o * tanh(c')
//! ```
//!
//! and the prediction after the last step is `w_out . h + b_out`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LstmError;
use crate::par::Exec;

/// Windows per gradient work item; fixed so results do not depend on the
/// thread count.
const GRAD_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];

    fn index(self) -> usize {
        self as usize
    }
}

/// Offsets of each parameter block inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    n: usize,
    h: usize,
    w: usize,
    u: usize,
    b: usize,
    w_out: usize,
    b_out: usize,
    len: usize,
}

impl Layout {
    fn new(n: usize, h: usize) -> Self {
        let w = 0;
        let u = w + 4 * h * n;
        let b = u + 4 * h * h;
        let w_out = b + 4 * h;
        let b_out = w_out + h;
        Self {
            n,
            h,
            w,
            u,
            b,
            w_out,
            b_out,
            len: b_out + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNetwork {
    layout: Layout,
    unroll: usize,
    params: Vec<f64>,
}

/// Gate activations and states of one cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct GateRecord {
    pub input: Vec<f64>,
    pub forget: Vec<f64>,
    pub output: Vec<f64>,
    /// `tanh` of the candidate pre-activation.
    pub candidate: Vec<f64>,
    pub cell: Vec<f64>,
    pub hidden: Vec<f64>,
}

/// Gradients in the same flat layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGradients {
    layout: Layout,
    pub values: Vec<f64>,
}

impl LstmGradients {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

// One `exp` instead of libm's slower `tanh`; saturates cleanly to +-1.
#[inline]
fn tanh(z: f64) -> f64 {
    if z.abs() < 0.02 {
        return z.tanh();
    }
    1.0 - 2.0 / ((2.0 * z).exp() + 1.0)
}

impl LstmNetwork {
    /// All weights zero.
    pub fn zeros(input_dim: usize, hidden_dim: usize, unroll: usize) -> Self {
        let layout = Layout::new(input_dim, hidden_dim);
        Self {
            layout,
            unroll,
            params: vec![0.0; layout.len],
        }
    }

    /// Weight matrices (including the dense head) uniform in
    /// `(-1/sqrt(h), 1/sqrt(h))`, biases zero.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, unroll: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(input_dim, hidden_dim, unroll);
        let r = 1.0 / (hidden_dim as f64).sqrt();
        let l = net.layout;
        let (matrices, head) = net.params.split_at_mut(l.b);
        for p in matrices.iter_mut().chain(head[l.w_out - l.b..l.b_out - l.b].iter_mut()) {
            *p = rng.random_range(-r..r);
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.layout.n
    }

    pub fn hidden_dim(&self) -> usize {
        self.layout.h
    }

    pub fn unroll(&self) -> usize {
        self.unroll
    }

    pub fn n_params(&self) -> usize {
        self.layout.len
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `W_gate`, `h x n` row-major.
    pub fn w(&self, gate: Gate) -> &[f64] {
        let l = self.layout;
        let start = l.w + gate.index() * l.h * l.n;
        &self.params[start..start + l.h * l.n]
    }

    pub fn w_mut(&mut self, gate: Gate) -> &mut [f64] {
        let l = self.layout;
        let start = l.w + gate.index() * l.h * l.n;
        &mut self.params[start..start + l.h * l.n]
    }

    /// `U_gate`, `h x h` row-major.
    pub fn u(&self, gate: Gate) -> &[f64] {
        let l = self.layout;
        let start = l.u + gate.index() * l.h * l.h;
        &self.params[start..start + l.h * l.h]
    }

    pub fn u_mut(&mut self, gate: Gate) -> &mut [f64] {
        let l = self.layout;
        let start = l.u + gate.index() * l.h * l.h;
        &mut self.params[start..start + l.h * l.h]
    }

    pub fn b(&self, gate: Gate) -> &[f64] {
        let l = self.layout;
        let start = l.b + gate.index() * l.h;
        &self.params[start..start + l.h]
    }

    pub fn b_mut(&mut self, gate: Gate) -> &mut [f64] {
        let l = self.layout;
        let start = l.b + gate.index() * l.h;
        &mut self.params[start..start + l.h]
    }

    pub fn w_out(&self) -> &[f64] {
        &self.params[self.layout.w_out..self.layout.b_out]
    }

    pub fn w_out_mut(&mut self) -> &mut [f64] {
        let l = self.layout;
        &mut self.params[l.w_out..l.b_out]
    }

    pub fn b_out(&self) -> f64 {
        self.params[self.layout.b_out]
    }

    pub fn set_b_out(&mut self, v: f64) {
        let i = self.layout.b_out;
        self.params[i] = v;
    }

    /// One cell step from `(h_prev, c_prev)` on input `x`.
    pub fn cell_step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<GateRecord, LstmError> {
        let Layout { n, h, .. } = self.layout;
        if x.len() != n || h_prev.len() != h || c_prev.len() != h {
            return Err(LstmError::Dimension(format!(
                "cell step expects x[{n}], h[{h}], c[{h}], got x[{}], h[{}], c[{}]",
                x.len(),
                h_prev.len(),
                c_prev.len()
            )));
        }
        let mut z = vec![0.0; 4 * h];
        self.preactivation(x, h_prev, &mut z);
        let mut rec = GateRecord {
            input: vec![0.0; h],
            forget: vec![0.0; h],
            output: vec![0.0; h],
            candidate: vec![0.0; h],
            cell: vec![0.0; h],
            hidden: vec![0.0; h],
        };
        for j in 0..h {
            rec.input[j] = sigmoid(z[j]);
            rec.forget[j] = sigmoid(z[h + j]);
            rec.output[j] = sigmoid(z[2 * h + j]);
            rec.candidate[j] = tanh(z[3 * h + j]);
            rec.cell[j] = rec.forget[j] * c_prev[j] + rec.input[j] * rec.candidate[j];
            rec.hidden[j] = rec.output[j] * tanh(rec.cell[j]);
        }
        if rec.cell.iter().chain(&rec.hidden).any(|v| !v.is_finite()) {
            return Err(LstmError::Numeric { step: 0 });
        }
        Ok(rec)
    }

    #[inline]
    fn preactivation(&self, x: &[f64], h_prev: &[f64], z: &mut [f64]) {
        let Layout { n, h, .. } = self.layout;
        let l = self.layout;
        let w = &self.params[l.w..l.u];
        let u = &self.params[l.u..l.b];
        let b = &self.params[l.b..l.w_out];
        for r in 0..4 * h {
            let mut acc = b[r];
            let wr = &w[r * n..(r + 1) * n];
            for k in 0..n {
                acc += wr[k] * x[k];
            }
            let ur = &u[r * h..(r + 1) * h];
            for k in 0..h {
                acc += ur[k] * h_prev[k];
            }
            z[r] = acc;
        }
    }

    /// Same sums as [`Self::preactivation`], accumulated column by column
    /// from transposed weights so the inner loops vectorize.
    #[inline]
    fn preactivation_t(&self, wt: &[f64], ut: &[f64], x: &[f64], h_prev: &[f64], z: &mut [f64]) {
        let l = self.layout;
        let rows = 4 * l.h;
        z.copy_from_slice(&self.params[l.b..l.w_out]);
        for (k, xk) in x.iter().enumerate() {
            for (zr, w) in z.iter_mut().zip(&wt[k * rows..(k + 1) * rows]) {
                *zr += w * xk;
            }
        }
        for (k, hk) in h_prev.iter().enumerate() {
            for (zr, u) in z.iter_mut().zip(&ut[k * rows..(k + 1) * rows]) {
                *zr += u * hk;
            }
        }
    }

    fn check_window(&self, window: &[f64]) -> Result<(), LstmError> {
        let expected = self.unroll * self.layout.n;
        if window.len() != expected {
            return Err(LstmError::Dimension(format!(
                "window has {} values, expected {expected}",
                window.len()
            )));
        }
        Ok(())
    }

    /// Runs the unrolled cell from zero state and applies the dense head.
    pub fn forward(&self, window: &[f64]) -> Result<f64, LstmError> {
        self.check_window(window)?;
        let mut trace = Trace::default();
        trace.prepare(self);
        self.run(window, &mut trace)
    }

    /// Forward pass recording every step in `tr`, which must have been
    /// prepared for this network.
    fn run(&self, window: &[f64], tr: &mut Trace) -> Result<f64, LstmError> {
        let Layout { n, h, .. } = self.layout;
        let steps = window.len() / n;
        tr.reset(steps, h);
        let Trace {
            gates,
            cell,
            tanh_cell,
            hidden,
            zeros,
            z,
            ..
        } = tr;
        for t in 0..steps {
            let (h_before, h_rest) = hidden.split_at_mut(t * h);
            let (c_before, c_rest) = cell.split_at_mut(t * h);
            let (h_prev, c_prev): (&[f64], &[f64]) = if t == 0 {
                (zeros, zeros)
            } else {
                (&h_before[(t - 1) * h..], &c_before[(t - 1) * h..])
            };
            self.preactivation_t(&tr.wt, &tr.ut, &window[t * n..(t + 1) * n], h_prev, z);
            let g_out = &mut gates[t * 4 * h..(t + 1) * 4 * h];
            let h_out = &mut h_rest[..h];
            let c_out = &mut c_rest[..h];
            let tc_out = &mut tanh_cell[t * h..(t + 1) * h];
            for j in 0..h {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h + j]);
                let o = sigmoid(z[2 * h + j]);
                let g = tanh(z[3 * h + j]);
                let c = f * c_prev[j] + i * g;
                let tc = tanh(c);
                g_out[j] = i;
                g_out[h + j] = f;
                g_out[2 * h + j] = o;
                g_out[3 * h + j] = g;
                c_out[j] = c;
                tc_out[j] = tc;
                h_out[j] = o * tc;
            }
            if !c_out.iter().all(|v| v.is_finite()) {
                return Err(LstmError::Numeric { step: t });
            }
        }
        let l = self.layout;
        let last = &hidden[(steps - 1) * h..steps * h];
        let w_out = &self.params[l.w_out..l.b_out];
        let pred = self.params[l.b_out] + w_out.iter().zip(last).map(|(a, b)| a * b).sum::<f64>();
        if !pred.is_finite() {
            return Err(LstmError::Numeric { step: steps });
        }
        Ok(pred)
    }

    /// Adds `scale * d(pred)/d(params)` into `grad`, given a trace from [`Self::run`].
    fn backward(&self, window: &[f64], tr: &Trace, scale: f64, grad: &mut [f64], scratch: &mut Scratch) {
        let Layout { n, h, .. } = self.layout;
        let l = self.layout;
        let steps = window.len() / n;
        scratch.reset(h);

        let last = &tr.hidden[(steps - 1) * h..steps * h];
        for j in 0..h {
            grad[l.w_out + j] += scale * last[j];
            scratch.dh[j] = scale * self.params[l.w_out + j];
        }
        grad[l.b_out] += scale;

        let u = &self.params[l.u..l.b];
        for t in (0..steps).rev() {
            let gates = &tr.gates[t * 4 * h..(t + 1) * 4 * h];
            let tc = &tr.tanh_cell[t * h..(t + 1) * h];
            let c_prev: &[f64] = if t == 0 { &tr.zeros } else { &tr.cell[(t - 1) * h..t * h] };
            let h_prev: &[f64] = if t == 0 { &tr.zeros } else { &tr.hidden[(t - 1) * h..t * h] };
            let x = &window[t * n..(t + 1) * n];
            let dz = &mut scratch.dz;
            for j in 0..h {
                let (i, f, o, g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let dh = scratch.dh[j];
                let dc = scratch.dc[j] + dh * o * (1.0 - tc[j] * tc[j]);
                dz[j] = dc * g * i * (1.0 - i);
                dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[2 * h + j] = dh * tc[j] * o * (1.0 - o);
                dz[3 * h + j] = dc * i * (1.0 - g * g);
                scratch.dc[j] = dc * f;
            }
            for r in 0..4 * h {
                let d = dz[r];
                grad[l.b + r] += d;
                let gw = &mut grad[l.w + r * n..l.w + (r + 1) * n];
                for k in 0..n {
                    gw[k] += d * x[k];
                }
                if t > 0 {
                    let gu = &mut grad[l.u + r * h..l.u + (r + 1) * h];
                    for k in 0..h {
                        gu[k] += d * h_prev[k];
                    }
                }
            }
            scratch.dh.fill(0.0);
            for (r, d) in dz.iter().enumerate() {
                for (acc, w) in scratch.dh.iter_mut().zip(&u[r * h..(r + 1) * h]) {
                    *acc += w * d;
                }
            }
        }
    }

    /// Mean squared error over `batch` and its gradient with respect to
    /// every parameter, by backpropagation through time.
    pub fn loss_and_gradients(&self, batch: &[(&[f64], f64)]) -> Result<(f64, LstmGradients), LstmError> {
        self.loss_and_gradients_with(batch, Exec::Sequential)
    }

    pub fn loss_and_gradients_with(
        &self,
        batch: &[(&[f64], f64)],
        exec: Exec,
    ) -> Result<(f64, LstmGradients), LstmError> {
        if batch.is_empty() {
            return Err(LstmError::EmptyBatch);
        }
        for (w, _) in batch {
            self.check_window(w)?;
        }
        let inv = 1.0 / batch.len() as f64;
        let parts = exec.map_chunks(batch, GRAD_CHUNK, |chunk| {
            let mut grad = vec![0.0; self.layout.len];
            let mut trace = Trace::default();
            trace.prepare(self);
            let mut scratch = Scratch::default();
            let mut sse = 0.0;
            for (window, target) in chunk {
                let pred = self.run(window, &mut trace)?;
                let err = pred - target;
                sse += err * err;
                self.backward(window, &trace, 2.0 * err * inv, &mut grad, &mut scratch);
            }
            Ok::<_, LstmError>((sse, grad))
        });
        let mut loss = 0.0;
        let mut values = vec![0.0; self.layout.len];
        for part in parts {
            let (sse, grad) = part?;
            loss += sse;
            for (acc, g) in values.iter_mut().zip(&grad) {
                *acc += g;
            }
        }
        if values.iter().any(|g| !g.is_finite()) {
            return Err(LstmError::NonFiniteGradient);
        }
        Ok((
            loss * inv,
            LstmGradients {
                layout: self.layout,
                values,
            },
        ))
    }

    pub fn to_document(&self) -> NetworkDocument {
        let gate = |g: Gate| GateWeights {
            w: self.w(g).to_vec(),
            u: self.u(g).to_vec(),
            b: self.b(g).to_vec(),
        };
        NetworkDocument {
            dims: Dims {
                input_dim: self.layout.n,
                hidden_dim: self.layout.h,
                unroll: self.unroll,
            },
            input_gate: gate(Gate::Input),
            forget_gate: gate(Gate::Forget),
            output_gate: gate(Gate::Output),
            candidate: gate(Gate::Candidate),
            dense: Dense {
                w: self.w_out().to_vec(),
                b: self.b_out(),
            },
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self, LstmError> {
        let Dims {
            input_dim: n,
            hidden_dim: h,
            unroll,
        } = doc.dims;
        if n == 0 || h == 0 || unroll == 0 {
            return Err(LstmError::Dimension("dimensions must be positive".into()));
        }
        let mut net = Self::zeros(n, h, unroll);
        let shape = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(LstmError::Dimension(format!("{what}: {got} values, expected {want}")))
            }
        };
        for (g, gw) in Gate::ALL
            .into_iter()
            .zip([&doc.input_gate, &doc.forget_gate, &doc.output_gate, &doc.candidate])
        {
            shape(&format!("{g:?} W"), gw.w.len(), h * n)?;
            shape(&format!("{g:?} U"), gw.u.len(), h * h)?;
            shape(&format!("{g:?} b"), gw.b.len(), h)?;
            net.w_mut(g).copy_from_slice(&gw.w);
            net.u_mut(g).copy_from_slice(&gw.u);
            net.b_mut(g).copy_from_slice(&gw.b);
        }
        shape("dense w", doc.dense.w.len(), h)?;
        net.w_out_mut().copy_from_slice(&doc.dense.w);
        net.set_b_out(doc.dense.b);
        if net.params.iter().any(|p| !p.is_finite()) {
            return Err(LstmError::Dimension("non-finite weight".into()));
        }
        Ok(net)
    }
}

#[derive(Default)]
struct Trace {
    gates: Vec<f64>,
    cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    hidden: Vec<f64>,
    zeros: Vec<f64>,
    z: Vec<f64>,
    /// `W` transposed, `n x 4h`
    wt: Vec<f64>,
    /// `U` transposed, `h x 4h`
    ut: Vec<f64>,
}

impl Trace {
    fn prepare(&mut self, net: &LstmNetwork) {
        let l = net.layout;
        let rows = 4 * l.h;
        let w = &net.params[l.w..l.u];
        let u = &net.params[l.u..l.b];
        self.wt = (0..l.n * rows).map(|i| w[(i % rows) * l.n + i / rows]).collect();
        self.ut = (0..l.h * rows).map(|i| u[(i % rows) * l.h + i / rows]).collect();
        self.z = vec![0.0; rows];
    }

    fn reset(&mut self, steps: usize, h: usize) {
        self.gates.resize(steps * 4 * h, 0.0);
        self.cell.resize(steps * h, 0.0);
        self.tanh_cell.resize(steps * h, 0.0);
        self.hidden.resize(steps * h, 0.0);
        self.zeros.clear();
        self.zeros.resize(h, 0.0);
    }
}

#[derive(Default)]
struct Scratch {
    dh: Vec<f64>,
    dc: Vec<f64>,
    dz: Vec<f64>,
}

impl Scratch {
    fn reset(&mut self, h: usize) {
        self.dh.clear();
        self.dh.resize(h, 0.0);
        self.dc.clear();
        self.dc.resize(h, 0.0);
        self.dz.clear();
        self.dz.resize(4 * h, 0.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub unroll: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateWeights {
    /// `h x n`, row-major
    pub w: Vec<f64>,
    /// `h x h`, row-major
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub dims: Dims,
    pub input_gate: GateWeights,
    pub forget_gate: GateWeights,
    pub output_gate: GateWeights,
    pub candidate: GateWeights,
    pub dense: Dense,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_gates_are_half() {
        let net = LstmNetwork::zeros(1, 4, 16);
        let rec = net.cell_step(&[3.7], &[0.0; 4], &[0.0; 4]).unwrap();
        assert!(rec.input.iter().chain(&rec.forget).chain(&rec.output).all(|&g| g == 0.5));
        assert!(rec.cell.iter().chain(&rec.hidden).all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_keeps_memory() {
        let mut net = LstmNetwork::zeros(1, 3, 16);
        net.b_mut(Gate::Forget).fill(50.0);
        let c_prev = [0.7, -1.3, 2.5];
        let rec = net.cell_step(&[0.0], &[0.0; 3], &c_prev).unwrap();
        for (c, v) in rec.cell.iter().zip(c_prev) {
            assert!((c - v).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_cell_by_hand() {
        let mut net = LstmNetwork::zeros(1, 1, 1);
        let (wi, wf, wo, wc) = (0.5, -0.3, 0.8, 1.1);
        let (ui, uf, uo, uc) = (0.2, 0.4, -0.6, 0.3);
        let (bi, bf, bo, bc) = (0.1, 0.2, -0.1, 0.05);
        for (g, w, u, b) in [
            (Gate::Input, wi, ui, bi),
            (Gate::Forget, wf, uf, bf),
            (Gate::Output, wo, uo, bo),
            (Gate::Candidate, wc, uc, bc),
        ] {
            net.w_mut(g)[0] = w;
            net.u_mut(g)[0] = u;
            net.b_mut(g)[0] = b;
        }
        let (x, h0, c0) = (0.9_f64, -0.4_f64, 0.25_f64);
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let i = s(wi * x + ui * h0 + bi);
        let f = s(wf * x + uf * h0 + bf);
        let o = s(wo * x + uo * h0 + bo);
        let c = f * c0 + i * (wc * x + uc * h0 + bc).tanh();
        let h = o * c.tanh();
        let rec = net.cell_step(&[x], &[h0], &[c0]).unwrap();
        assert!((rec.cell[0] - c).abs() < 1e-12);
        assert!((rec.hidden[0] - h).abs() < 1e-12);
    }

    #[test]
    fn zero_network_predicts_bias() {
        let mut net = LstmNetwork::zeros(1, 8, 16);
        net.set_b_out(-0.75);
        let window: Vec<f64> = (0..16).map(|i| i as f64 * 0.3 - 2.0).collect();
        assert_eq!(net.forward(&window).unwrap(), -0.75);
        assert!(net.forward(&window[..15]).is_err());
    }

    #[test]
    fn forward_matches_repeated_cell_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = LstmNetwork::init(1, 8, 16, &mut rng);
        let window: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let (mut h, mut c) = (vec![0.0; 8], vec![0.0; 8]);
        for x in &window {
            let rec = net.cell_step(&[*x], &h, &c).unwrap();
            h = rec.hidden;
            c = rec.cell;
        }
        let manual = net.b_out() + net.w_out().iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
        assert!((net.forward(&window).unwrap() - manual).abs() < 1e-14);
    }

    #[test]
    fn document_round_trip_and_shape_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = LstmNetwork::init(1, 8, 16, &mut rng);
        let json = serde_json::to_string(&net.to_document()).unwrap();
        let doc: NetworkDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(LstmNetwork::from_document(&doc).unwrap(), net);

        let mut bad = doc.clone();
        bad.forget_gate.u.pop();
        assert!(matches!(LstmNetwork::from_document(&bad), Err(LstmError::Dimension(_))));
    }

    #[test]
    fn empty_batch_rejected() {
        let net = LstmNetwork::zeros(1, 2, 4);
        assert!(matches!(net.loss_and_gradients(&[]), Err(LstmError::EmptyBatch)));
    }
}
