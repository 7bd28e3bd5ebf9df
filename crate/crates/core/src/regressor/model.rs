//! Iterative latent refinement head.
//!
//! ```text
//! t_ref = P x_ref + b_P + e_ref          t_cur = P x_cur + b_P + e_cur
//! h⁽⁰⁾ = 0 ∈ R⁸
//! for t in 1..=K:
//!     s   = W_s h⁽ᵗ⁻¹⁾ + b_s                            (score token)
//!     o   = Σ_m softmax_m(q·k_m / √d) v_m    over m ∈ {s, t_ref, t_cur}
//!     y   = s + W_o o + b_o
//!     Δh  = W_2 tanh(W_1 y + b_1) + b_2
//!     h⁽ᵗ⁾ = h⁽ᵗ⁻¹⁾ + Δh
//! τ = σ(w_r · h⁽ᴷ⁾ + b_r)
//! ```
//!
//! Inputs are standardised with per-feature mean/scale fixed at training
//! start; those two vectors are stored with the model but not trained.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::descriptor::{extract_descriptor, DescriptorConfig};
use super::tensor::{add_assign, axpy, dot, Tensor};
use crate::geometry::PointMapFrame;
use crate::{Error, Result};

pub const LATENT_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    /// Token (descriptor) dimension `D`.
    pub token_dim: usize,
    pub d_model: usize,
    /// Hidden width of the update head.
    pub hidden: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        Self { token_dim: 32, d_model: 16, hidden: 32 }
    }
}

/// Which learning-rate group a parameter block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    TokenProjection,
    Head,
    /// Stored with the model, never updated by the optimizer.
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateRegressor {
    pub input_mean: Tensor,
    pub input_scale: Tensor,
    pub proj_w: Tensor,
    pub proj_b: Tensor,
    pub role_ref: Tensor,
    pub role_cur: Tensor,
    pub score_w: Tensor,
    pub score_b: Tensor,
    pub q_w: Tensor,
    pub q_b: Tensor,
    pub k_w: Tensor,
    pub k_b: Tensor,
    pub v_w: Tensor,
    pub v_b: Tensor,
    pub o_w: Tensor,
    pub o_b: Tensor,
    pub upd_w1: Tensor,
    pub upd_b1: Tensor,
    pub upd_w2: Tensor,
    pub upd_b2: Tensor,
    pub read_w: Tensor,
    pub read_b: Tensor,
}

/// Block names in checkpoint order.
pub const BLOCK_NAMES: [&str; 22] = [
    "input.mean",
    "input.scale",
    "proj.w",
    "proj.b",
    "role.ref",
    "role.cur",
    "score.w",
    "score.b",
    "attn.q.w",
    "attn.q.b",
    "attn.k.w",
    "attn.k.b",
    "attn.v.w",
    "attn.v.b",
    "attn.o.w",
    "attn.o.b",
    "update.w1",
    "update.b1",
    "update.w2",
    "update.b2",
    "readout.w",
    "readout.b",
];

/// One refinement step's intermediates, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct StepCache {
    h_prev: Vec<f64>,
    s: Vec<f64>,
    q: Vec<f64>,
    /// Keys and values of the score token; the other two are shared.
    k_s: Vec<f64>,
    v_s: Vec<f64>,
    attn: [f64; 3],
    o: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
    pub delta_h: Vec<f64>,
}

/// Forward pass result with everything needed for [`GateRegressor::backward`].
#[derive(Debug, Clone)]
pub struct Trace {
    x_ref: Vec<f64>,
    x_cur: Vec<f64>,
    t_ref: Vec<f64>,
    t_cur: Vec<f64>,
    k_ref: Vec<f64>,
    k_cur: Vec<f64>,
    v_ref: Vec<f64>,
    v_cur: Vec<f64>,
    pub steps: Vec<StepCache>,
    /// `h⁽⁰⁾ … h⁽ᴷ⁾`.
    pub latents: Vec<Vec<f64>>,
    pub logit: f64,
    pub tau: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax3(l: [f64; 3]) -> [f64; 3] {
    let m = l[0].max(l[1]).max(l[2]);
    let e = [(l[0] - m).exp(), (l[1] - m).exp(), (l[2] - m).exp()];
    let z = e[0] + e[1] + e[2];
    [e[0] / z, e[1] / z, e[2] / z]
}

impl GateRegressor {
    /// All-zero parameters (unit input scale).
    pub fn zeros(shape: ModelShape) -> Self {
        let ModelShape { token_dim: d_in, d_model: d, hidden } = shape;
        let mut input_scale = Tensor::vector(d_in);
        input_scale.data.fill(1.0);
        Self {
            input_mean: Tensor::vector(d_in),
            input_scale,
            proj_w: Tensor::zeros(d, d_in),
            proj_b: Tensor::vector(d),
            role_ref: Tensor::vector(d),
            role_cur: Tensor::vector(d),
            score_w: Tensor::zeros(d, LATENT_DIM),
            score_b: Tensor::vector(d),
            q_w: Tensor::zeros(d, d),
            q_b: Tensor::vector(d),
            k_w: Tensor::zeros(d, d),
            k_b: Tensor::vector(d),
            v_w: Tensor::zeros(d, d),
            v_b: Tensor::vector(d),
            o_w: Tensor::zeros(d, d),
            o_b: Tensor::vector(d),
            upd_w1: Tensor::zeros(hidden, d),
            upd_b1: Tensor::vector(hidden),
            upd_w2: Tensor::zeros(LATENT_DIM, hidden),
            upd_b2: Tensor::vector(LATENT_DIM),
            read_w: Tensor::zeros(1, LATENT_DIM),
            read_b: Tensor::vector(1),
        }
    }

    /// Glorot-uniform weights, zero biases, small role embeddings. Values
    /// are rounded to `f32` so the model is exactly representable in a
    /// checkpoint.
    pub fn init(shape: ModelShape, rng: &mut ChaCha8Rng) -> Self {
        let mut m = Self::zeros(shape);
        let fill = |t: &mut Tensor, rng: &mut ChaCha8Rng| {
            let a = (6.0 / (t.rows + t.cols) as f64).sqrt();
            for w in t.data.iter_mut() {
                *w = rng.gen_range(-a..a);
            }
        };
        fill(&mut m.proj_w, rng);
        fill(&mut m.score_w, rng);
        fill(&mut m.q_w, rng);
        fill(&mut m.k_w, rng);
        fill(&mut m.v_w, rng);
        fill(&mut m.o_w, rng);
        fill(&mut m.upd_w1, rng);
        fill(&mut m.upd_w2, rng);
        fill(&mut m.read_w, rng);
        for t in [&mut m.role_ref, &mut m.role_cur] {
            for w in t.data.iter_mut() {
                *w = rng.gen_range(-0.1..0.1);
            }
        }
        m.round_to_f32();
        m
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape { token_dim: self.proj_w.cols, d_model: self.proj_w.rows, hidden: self.upd_w1.rows }
    }

    pub fn blocks(&self) -> [(&'static str, &Tensor); 22] {
        let t = [
            &self.input_mean,
            &self.input_scale,
            &self.proj_w,
            &self.proj_b,
            &self.role_ref,
            &self.role_cur,
            &self.score_w,
            &self.score_b,
            &self.q_w,
            &self.q_b,
            &self.k_w,
            &self.k_b,
            &self.v_w,
            &self.v_b,
            &self.o_w,
            &self.o_b,
            &self.upd_w1,
            &self.upd_b1,
            &self.upd_w2,
            &self.upd_b2,
            &self.read_w,
            &self.read_b,
        ];
        std::array::from_fn(|i| (BLOCK_NAMES[i], t[i]))
    }

    pub fn blocks_mut(&mut self) -> [(&'static str, &mut Tensor); 22] {
        let t = [
            &mut self.input_mean,
            &mut self.input_scale,
            &mut self.proj_w,
            &mut self.proj_b,
            &mut self.role_ref,
            &mut self.role_cur,
            &mut self.score_w,
            &mut self.score_b,
            &mut self.q_w,
            &mut self.q_b,
            &mut self.k_w,
            &mut self.k_b,
            &mut self.v_w,
            &mut self.v_b,
            &mut self.o_w,
            &mut self.o_b,
            &mut self.upd_w1,
            &mut self.upd_b1,
            &mut self.upd_w2,
            &mut self.upd_b2,
            &mut self.read_w,
            &mut self.read_b,
        ];
        let mut it = t.into_iter();
        std::array::from_fn(|i| (BLOCK_NAMES[i], it.next().unwrap()))
    }

    pub fn group(name: &str) -> ParamGroup {
        match name {
            "input.mean" | "input.scale" => ParamGroup::Frozen,
            "proj.w" | "proj.b" | "role.ref" | "role.cur" => ParamGroup::TokenProjection,
            _ => ParamGroup::Head,
        }
    }

    /// Number of trainable scalars.
    pub fn n_trainable(&self) -> usize {
        self.blocks().iter().filter(|(n, _)| Self::group(n) != ParamGroup::Frozen).map(|(_, t)| t.len()).sum()
    }

    pub fn round_to_f32(&mut self) {
        for (_, t) in self.blocks_mut() {
            for v in t.data.iter_mut() {
                *v = *v as f32 as f64;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|(_, t)| t.data.iter().all(|v| v.is_finite()))
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_mean.data)
            .zip(&self.input_scale.data)
            .map(|((v, m), s)| (v - m) * s)
            .collect()
    }

    /// Runs `k_iters` refinement steps on one token pair.
    pub fn forward(&self, ref_token: &[f64], cur_token: &[f64], k_iters: usize) -> Result<Trace> {
        let d_in = self.proj_w.cols;
        for tok in [ref_token, cur_token] {
            if tok.len() != d_in {
                return Err(Error::DimensionMismatch { expected: d_in, got: tok.len() });
            }
        }
        let d = self.proj_w.rows;
        let inv_sqrt = 1.0 / (d as f64).sqrt();
        let x_ref = self.normalize(ref_token);
        let x_cur = self.normalize(cur_token);
        let mut t_ref = self.proj_w.affine(&x_ref, &self.proj_b);
        add_assign(&mut t_ref, &self.role_ref.data);
        let mut t_cur = self.proj_w.affine(&x_cur, &self.proj_b);
        add_assign(&mut t_cur, &self.role_cur.data);
        let k_ref = self.k_w.affine(&t_ref, &self.k_b);
        let k_cur = self.k_w.affine(&t_cur, &self.k_b);
        let v_ref = self.v_w.affine(&t_ref, &self.v_b);
        let v_cur = self.v_w.affine(&t_cur, &self.v_b);

        let mut h = vec![0.0; LATENT_DIM];
        let mut latents = vec![h.clone()];
        let mut steps = Vec::with_capacity(k_iters);
        for _ in 0..k_iters {
            let s = self.score_w.affine(&h, &self.score_b);
            let q = self.q_w.affine(&s, &self.q_b);
            let k_s = self.k_w.affine(&s, &self.k_b);
            let v_s = self.v_w.affine(&s, &self.v_b);
            let attn = softmax3([
                dot(&q, &k_s) * inv_sqrt,
                dot(&q, &k_ref) * inv_sqrt,
                dot(&q, &k_cur) * inv_sqrt,
            ]);
            let mut o = vec![0.0; d];
            for (a, v) in attn.iter().zip([&v_s, &v_ref, &v_cur]) {
                axpy(*a, v, &mut o);
            }
            let mut y = self.o_w.affine(&o, &self.o_b);
            add_assign(&mut y, &s);
            let u: Vec<f64> = self.upd_w1.affine(&y, &self.upd_b1).iter().map(|z| z.tanh()).collect();
            let delta_h = self.upd_w2.affine(&u, &self.upd_b2);
            let h_prev = h.clone();
            add_assign(&mut h, &delta_h);
            latents.push(h.clone());
            steps.push(StepCache { h_prev, s, q, k_s, v_s, attn, o, y, u, delta_h });
        }
        let logit = dot(&self.read_w.data, &h) + self.read_b.data[0];
        Ok(Trace {
            x_ref,
            x_cur,
            t_ref,
            t_cur,
            k_ref,
            k_cur,
            v_ref,
            v_cur,
            steps,
            latents,
            logit,
            tau: sigmoid(logit),
        })
    }

    pub fn predict_tokens(&self, ref_token: &[f64], cur_token: &[f64], k_iters: usize) -> Result<f64> {
        Ok(self.forward(ref_token, cur_token, k_iters)?.tau)
    }

    /// Scores `frame_cur` against `frame_ref`; both must be expressed in the
    /// reference camera's coordinates.
    pub fn predict(&self, frame_ref: &PointMapFrame, frame_cur: &PointMapFrame, k_iters: usize) -> Result<f64> {
        let d = self.proj_w.cols;
        let desc = DescriptorConfig::for_dim(d)
            .ok_or_else(|| Error::InvalidArgument(format!("token dimension {d} does not match any descriptor grid")))?;
        self.predict_tokens(&extract_descriptor(frame_ref, &desc), &extract_descriptor(frame_cur, &desc), k_iters)
    }

    /// Accumulates `d_tau · ∂τ/∂θ` into `grad` (same shape as `self`).
    pub fn backward(&self, trace: &Trace, d_tau: f64, grad: &mut GateRegressor) {
        let d = self.proj_w.rows;
        let inv_sqrt = 1.0 / (d as f64).sqrt();
        let h_final = trace.latents.last().expect("latent h0");
        let d_logit = d_tau * trace.tau * (1.0 - trace.tau);
        axpy(d_logit, h_final, &mut grad.read_w.data);
        grad.read_b.data[0] += d_logit;
        let mut dh: Vec<f64> = self.read_w.data.iter().map(|w| w * d_logit).collect();

        let mut dk_ref = vec![0.0; d];
        let mut dk_cur = vec![0.0; d];
        let mut dv_ref = vec![0.0; d];
        let mut dv_cur = vec![0.0; d];
        for st in trace.steps.iter().rev() {
            // Δh = W2 u + b2, u = tanh(W1 y + b1)
            grad.upd_w2.add_outer(&dh, &st.u);
            grad.upd_b2.add_vec(&dh);
            let du = self.upd_w2.matvec_t(&dh);
            let dpre: Vec<f64> = du.iter().zip(&st.u).map(|(g, u)| g * (1.0 - u * u)).collect();
            grad.upd_w1.add_outer(&dpre, &st.y);
            grad.upd_b1.add_vec(&dpre);
            let dy = self.upd_w1.matvec_t(&dpre);

            // y = s + W_o o + b_o
            let mut ds = dy.clone();
            grad.o_w.add_outer(&dy, &st.o);
            grad.o_b.add_vec(&dy);
            let d_o = self.o_w.matvec_t(&dy);

            // attention over {s, ref, cur}
            let keys = [&st.k_s, &trace.k_ref, &trace.k_cur];
            let vals = [&st.v_s, &trace.v_ref, &trace.v_cur];
            let da: [f64; 3] = std::array::from_fn(|m| dot(&d_o, vals[m]));
            let mean_da: f64 = (0..3).map(|m| st.attn[m] * da[m]).sum();
            let dlogit: [f64; 3] = std::array::from_fn(|m| st.attn[m] * (da[m] - mean_da));
            let mut dq = vec![0.0; d];
            for m in 0..3 {
                axpy(dlogit[m] * inv_sqrt, keys[m], &mut dq);
            }
            let dk: [Vec<f64>; 3] = std::array::from_fn(|m| st.q.iter().map(|q| q * dlogit[m] * inv_sqrt).collect());
            let dv: [Vec<f64>; 3] = std::array::from_fn(|m| d_o.iter().map(|g| g * st.attn[m]).collect());
            add_assign(&mut dk_ref, &dk[1]);
            add_assign(&mut dk_cur, &dk[2]);
            add_assign(&mut dv_ref, &dv[1]);
            add_assign(&mut dv_cur, &dv[2]);

            grad.q_w.add_outer(&dq, &st.s);
            grad.q_b.add_vec(&dq);
            add_assign(&mut ds, &self.q_w.matvec_t(&dq));
            grad.k_w.add_outer(&dk[0], &st.s);
            grad.k_b.add_vec(&dk[0]);
            add_assign(&mut ds, &self.k_w.matvec_t(&dk[0]));
            grad.v_w.add_outer(&dv[0], &st.s);
            grad.v_b.add_vec(&dv[0]);
            add_assign(&mut ds, &self.v_w.matvec_t(&dv[0]));

            // s = W_s h_prev + b_s;  h = h_prev + Δh
            grad.score_w.add_outer(&ds, &st.h_prev);
            grad.score_b.add_vec(&ds);
            add_assign(&mut dh, &self.score_w.matvec_t(&ds));
        }

        for (t, x, dkx, dvx, role) in [
            (&trace.t_ref, &trace.x_ref, &dk_ref, &dv_ref, &mut grad.role_ref),
            (&trace.t_cur, &trace.x_cur, &dk_cur, &dv_cur, &mut grad.role_cur),
        ] {
            grad.k_w.add_outer(dkx, t);
            grad.k_b.add_vec(dkx);
            grad.v_w.add_outer(dvx, t);
            grad.v_b.add_vec(dvx);
            let mut dt = self.k_w.matvec_t(dkx);
            add_assign(&mut dt, &self.v_w.matvec_t(dvx));
            grad.proj_w.add_outer(&dt, x);
            grad.proj_b.add_vec(&dt);
            role.add_vec(&dt);
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut g = Self::zeros(self.shape());
        g.input_scale.data.fill(0.0);
        g
    }
}
