use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ops::{add, add_bias, add_bias_backward, hadamard, matmul, matmul_nt, matmul_tn, sigmoid, tanh};
use crate::nn::{glorot_uniform, Grads, ParamId, ParamStore, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellType {
    #[default]
    Lstm,
    Gru,
}

/// Hidden-state rule of the LSTM cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LstmOutput {
    /// `h = o * tanh(c)`.
    #[default]
    Standard,
    /// `h = f * tanh(c_prev)`, kept only for comparison in tests.
    ForgetGatePrevious,
}

/// One gate's weights: input `W [h, d]`, recurrent `R [h, h]`, bias `[h]`.
#[derive(Debug, Clone, Copy)]
struct Gate {
    w: ParamId,
    r: ParamId,
    b: ParamId,
}

impl Gate {
    fn new(store: &mut ParamStore, name: &str, tag: &str, d: usize, h: usize, rng: &mut impl Rng) -> Result<Self> {
        Ok(Self {
            w: store.add(format!("{name}.W_{tag}"), glorot_uniform(&[h, d], d, h, rng))?,
            r: store.add(format!("{name}.R_{tag}"), glorot_uniform(&[h, h], h, h, rng))?,
            b: store.add(format!("{name}.b_{tag}"), Tensor::zeros(&[h]))?,
        })
    }

    /// `x W^T + h R^T + b`.
    fn pre(&self, store: &ParamStore, x: &Tensor, h: &Tensor) -> Result<Tensor> {
        let z = add(&matmul_nt(x, store.value(self.w))?, &matmul_nt(h, store.value(self.r))?)?;
        add_bias(&z, store.value(self.b))
    }

    /// Accumulates parameter gradients for pre-activation gradient `dz` and
    /// adds the input and recurrent gradients into `dx`, `dh`.
    fn back(
        &self,
        store: &ParamStore,
        x: &Tensor,
        h: &Tensor,
        dz: &Tensor,
        dx: &mut Tensor,
        dh: &mut Tensor,
        grads: &mut Grads,
    ) -> Result<()> {
        grads.accumulate(self.w, &matmul_tn(dz, x)?)?;
        grads.accumulate(self.r, &matmul_tn(dz, h)?)?;
        grads.accumulate(self.b, &add_bias_backward(dz).1)?;
        dx.add_assign(&matmul(dz, store.value(self.w))?)?;
        dh.add_assign(&matmul(dz, store.value(self.r))?)?;
        Ok(())
    }
}

fn zip3(a: &Tensor, b: &Tensor, c: &Tensor, f: impl Fn(f64, f64, f64) -> f64) -> Tensor {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .zip(c.data())
        .map(|((&x, &y), &z)| f(x, y, z))
        .collect();
    Tensor::new(a.shape(), data).expect("same shapes")
}

#[derive(Debug, Clone)]
pub struct LstmCell {
    forget: Gate,
    candidate: Gate,
    input: Gate,
    output: Gate,
    pub inputs: usize,
    pub hidden: usize,
    pub rule: LstmOutput,
}

#[derive(Debug, Clone)]
pub struct LstmStep {
    x: Tensor,
    h_prev: Tensor,
    c_prev: Tensor,
    f: Tensor,
    g: Tensor,
    i: Tensor,
    o: Tensor,
    /// tanh of the cell state feeding the output rule.
    tc: Tensor,
}

impl LstmCell {
    pub fn new(store: &mut ParamStore, name: &str, inputs: usize, hidden: usize, rng: &mut impl Rng) -> Result<Self> {
        Ok(Self {
            forget: Gate::new(store, name, "f", inputs, hidden, rng)?,
            candidate: Gate::new(store, name, "g", inputs, hidden, rng)?,
            input: Gate::new(store, name, "i", inputs, hidden, rng)?,
            output: Gate::new(store, name, "o", inputs, hidden, rng)?,
            inputs,
            hidden,
            rule: LstmOutput::Standard,
        })
    }

    /// Forget-gate bias id, for tests that saturate gates.
    pub fn forget_bias(&self) -> ParamId {
        self.forget.b
    }

    pub fn step(&self, store: &ParamStore, x: &Tensor, h: &Tensor, c: &Tensor) -> Result<(Tensor, Tensor, LstmStep)> {
        if x.cols() != self.inputs || h.cols() != self.hidden || c.shape() != h.shape() || x.rows() != h.rows() {
            return Err(Error::shape("lstm_step", x.shape(), h.shape()));
        }
        let f = sigmoid(&self.forget.pre(store, x, h)?);
        let g = tanh(&self.candidate.pre(store, x, h)?);
        let i = sigmoid(&self.input.pre(store, x, h)?);
        let o = sigmoid(&self.output.pre(store, x, h)?);
        let c_next = add(&hadamard(&f, c)?, &hadamard(&g, &i)?)?;
        let (h_next, tc) = match self.rule {
            LstmOutput::Standard => {
                let tc = tanh(&c_next);
                (hadamard(&o, &tc)?, tc)
            }
            LstmOutput::ForgetGatePrevious => {
                let tc = tanh(c);
                (hadamard(&f, &tc)?, tc)
            }
        };
        let cache = LstmStep {
            x: x.clone(),
            h_prev: h.clone(),
            c_prev: c.clone(),
            f,
            g,
            i,
            o,
            tc,
        };
        Ok((h_next, c_next, cache))
    }

    /// Returns `(dx, dh_prev, dc_prev)`.
    pub fn step_backward(
        &self,
        store: &ParamStore,
        s: &LstmStep,
        dh: &Tensor,
        dc: &Tensor,
        grads: &mut Grads,
    ) -> Result<(Tensor, Tensor, Tensor)> {
        let (do_, dc_total, df_out, dc_prev_out) = match self.rule {
            LstmOutput::Standard => {
                let do_ = hadamard(dh, &s.tc)?;
                let dct = zip3(dh, &s.o, &s.tc, |g, o, t| g * o * (1.0 - t * t));
                (do_, add(dc, &dct)?, Tensor::zeros(dh.shape()), Tensor::zeros(dh.shape()))
            }
            LstmOutput::ForgetGatePrevious => {
                let df = hadamard(dh, &s.tc)?;
                let dcp = zip3(dh, &s.f, &s.tc, |g, f, t| g * f * (1.0 - t * t));
                (Tensor::zeros(dh.shape()), dc.clone(), df, dcp)
            }
        };
        let mut df = hadamard(&dc_total, &s.c_prev)?;
        df.add_assign(&df_out)?;
        let mut dc_prev = hadamard(&dc_total, &s.f)?;
        dc_prev.add_assign(&dc_prev_out)?;
        let dg = hadamard(&dc_total, &s.i)?;
        let di = hadamard(&dc_total, &s.g)?;

        let dzf = zip3(&df, &s.f, &s.f, |g, y, _| g * y * (1.0 - y));
        let dzg = zip3(&dg, &s.g, &s.g, |g, y, _| g * (1.0 - y * y));
        let dzi = zip3(&di, &s.i, &s.i, |g, y, _| g * y * (1.0 - y));
        let dzo = zip3(&do_, &s.o, &s.o, |g, y, _| g * y * (1.0 - y));

        let mut dx = Tensor::zeros(s.x.shape());
        let mut dh_prev = Tensor::zeros(s.h_prev.shape());
        for (gate, dz) in [
            (&self.forget, &dzf),
            (&self.candidate, &dzg),
            (&self.input, &dzi),
            (&self.output, &dzo),
        ] {
            gate.back(store, &s.x, &s.h_prev, dz, &mut dx, &mut dh_prev, grads)?;
        }
        Ok((dx, dh_prev, dc_prev))
    }
}

/// GRU with reset gate `r`, update gate `z` and candidate
/// `h~ = tanh(x W_h^T + (r * h) W_rh^T + b_h)`; `h' = z * h + (1 - z) * h~`.
#[derive(Debug, Clone)]
pub struct GruCell {
    reset: Gate,
    update: Gate,
    w_h: ParamId,
    w_rh: ParamId,
    b_h: ParamId,
    pub inputs: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone)]
pub struct GruStep {
    x: Tensor,
    h_prev: Tensor,
    r: Tensor,
    z: Tensor,
    rh: Tensor,
    cand: Tensor,
}

impl GruCell {
    pub fn new(store: &mut ParamStore, name: &str, inputs: usize, hidden: usize, rng: &mut impl Rng) -> Result<Self> {
        let reset = Gate::new(store, name, "r", inputs, hidden, rng)?;
        let update = Gate::new(store, name, "z", inputs, hidden, rng)?;
        Ok(Self {
            reset,
            update,
            w_h: store.add(format!("{name}.W_h"), glorot_uniform(&[hidden, inputs], inputs, hidden, rng))?,
            w_rh: store.add(format!("{name}.W_rh"), glorot_uniform(&[hidden, hidden], hidden, hidden, rng))?,
            b_h: store.add(format!("{name}.b_h"), Tensor::zeros(&[hidden]))?,
            inputs,
            hidden,
        })
    }

    pub fn update_bias(&self) -> ParamId {
        self.update.b
    }

    pub fn step(&self, store: &ParamStore, x: &Tensor, h: &Tensor) -> Result<(Tensor, GruStep)> {
        if x.cols() != self.inputs || h.cols() != self.hidden || x.rows() != h.rows() {
            return Err(Error::shape("gru_step", x.shape(), h.shape()));
        }
        let r = sigmoid(&self.reset.pre(store, x, h)?);
        let z = sigmoid(&self.update.pre(store, x, h)?);
        let rh = hadamard(&r, h)?;
        let pre = add(&matmul_nt(x, store.value(self.w_h))?, &matmul_nt(&rh, store.value(self.w_rh))?)?;
        let cand = tanh(&add_bias(&pre, store.value(self.b_h))?);
        let h_next = zip3(&z, h, &cand, |z, h, c| z * h + (1.0 - z) * c);
        let cache = GruStep {
            x: x.clone(),
            h_prev: h.clone(),
            r,
            z,
            rh,
            cand,
        };
        Ok((h_next, cache))
    }

    /// Returns `(dx, dh_prev)`.
    pub fn step_backward(&self, store: &ParamStore, s: &GruStep, dh: &Tensor, grads: &mut Grads) -> Result<(Tensor, Tensor)> {
        let dz = zip3(dh, &s.h_prev, &s.cand, |g, h, c| g * (h - c));
        let mut dh_prev = hadamard(dh, &s.z)?;
        let dzh = zip3(dh, &s.z, &s.cand, |g, z, c| g * (1.0 - z) * (1.0 - c * c));

        grads.accumulate(self.w_h, &matmul_tn(&dzh, &s.x)?)?;
        grads.accumulate(self.w_rh, &matmul_tn(&dzh, &s.rh)?)?;
        grads.accumulate(self.b_h, &add_bias_backward(&dzh).1)?;
        let mut dx = matmul(&dzh, store.value(self.w_h))?;
        let drh = matmul(&dzh, store.value(self.w_rh))?;
        let dr = hadamard(&drh, &s.h_prev)?;
        dh_prev.add_assign(&hadamard(&drh, &s.r)?)?;

        let dzz = zip3(&dz, &s.z, &s.z, |g, y, _| g * y * (1.0 - y));
        let dzr = zip3(&dr, &s.r, &s.r, |g, y, _| g * y * (1.0 - y));
        self.update.back(store, &s.x, &s.h_prev, &dzz, &mut dx, &mut dh_prev, grads)?;
        self.reset.back(store, &s.x, &s.h_prev, &dzr, &mut dx, &mut dh_prev, grads)?;
        Ok((dx, dh_prev))
    }
}

/// A recurrent layer unrolled over a sequence from zero initial state.
#[derive(Debug, Clone)]
pub enum Recurrent {
    Lstm(LstmCell),
    Gru(GruCell),
}

#[derive(Debug, Clone)]
pub enum RecurrentCache {
    Lstm(Vec<LstmStep>),
    Gru(Vec<GruStep>),
}

impl Recurrent {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        cell: CellType,
        inputs: usize,
        hidden: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        Ok(match cell {
            CellType::Lstm => Recurrent::Lstm(LstmCell::new(store, name, inputs, hidden, rng)?),
            CellType::Gru => Recurrent::Gru(GruCell::new(store, name, inputs, hidden, rng)?),
        })
    }

    pub fn hidden(&self) -> usize {
        match self {
            Recurrent::Lstm(c) => c.hidden,
            Recurrent::Gru(c) => c.hidden,
        }
    }

    /// Hidden states for every step of `xs` (each `[M, inputs]`).
    pub fn forward(&self, store: &ParamStore, xs: &[Tensor]) -> Result<(Vec<Tensor>, RecurrentCache)> {
        let m = xs.first().map_or(0, Tensor::rows);
        let mut h = Tensor::zeros(&[m, self.hidden()]);
        let mut hs = Vec::with_capacity(xs.len());
        match self {
            Recurrent::Lstm(cell) => {
                let mut c = h.clone();
                let mut steps = Vec::with_capacity(xs.len());
                for x in xs {
                    let (hn, cn, s) = cell.step(store, x, &h, &c)?;
                    hs.push(hn.clone());
                    steps.push(s);
                    h = hn;
                    c = cn;
                }
                Ok((hs, RecurrentCache::Lstm(steps)))
            }
            Recurrent::Gru(cell) => {
                let mut steps = Vec::with_capacity(xs.len());
                for x in xs {
                    let (hn, s) = cell.step(store, x, &h)?;
                    hs.push(hn.clone());
                    steps.push(s);
                    h = hn;
                }
                Ok((hs, RecurrentCache::Gru(steps)))
            }
        }
    }

    /// Backpropagation through time given gradients for every hidden state.
    pub fn backward(&self, store: &ParamStore, cache: &RecurrentCache, dhs: &[Tensor], grads: &mut Grads) -> Result<Vec<Tensor>> {
        let t = dhs.len();
        let m = dhs.first().map_or(0, Tensor::rows);
        let mut dxs = vec![Tensor::zeros(&[0]); t];
        let mut dh_next = Tensor::zeros(&[m, self.hidden()]);
        match (self, cache) {
            (Recurrent::Lstm(cell), RecurrentCache::Lstm(steps)) => {
                let mut dc_next = dh_next.clone();
                for k in (0..t).rev() {
                    let dh = add(&dhs[k], &dh_next)?;
                    let (dx, dh_prev, dc_prev) = cell.step_backward(store, &steps[k], &dh, &dc_next, grads)?;
                    dxs[k] = dx;
                    dh_next = dh_prev;
                    dc_next = dc_prev;
                }
            }
            (Recurrent::Gru(cell), RecurrentCache::Gru(steps)) => {
                for k in (0..t).rev() {
                    let dh = add(&dhs[k], &dh_next)?;
                    let (dx, dh_prev) = cell.step_backward(store, &steps[k], &dh, grads)?;
                    dxs[k] = dx;
                    dh_next = dh_prev;
                }
            }
            _ => return Err(Error::InvalidArgument("recurrent cache does not match the cell".into())),
        }
        Ok(dxs)
    }
}
