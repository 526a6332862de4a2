//! Convolutional trunk: stacked same-padded convolutions with ReLU and max
//! pooling, then two fully connected layers with the relative goal
//! concatenated before the second, then a linear head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use lognav_core::EncoderKind;

use crate::error::{Error, Result};
use crate::params::{orthogonal, ParamSet};
use crate::real::{gemm, Mat, Real};

pub const GOAL_DIM: usize = 3;

/// Shape of the shared network body. Inputs with `height == 1` use 1×3
/// kernels and 1×2 pooling (the 1D variant).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub conv_channels: Vec<usize>,
    pub hidden: usize,
    pub goal_dim: usize,
}

impl NetSpec {
    /// Default body for an encoder whose frames are `height × width`.
    pub fn for_frames(in_channels: usize, height: usize, width: usize) -> Self {
        Self {
            in_channels,
            height,
            width,
            conv_channels: vec![32, 64, 64],
            hidden: 512,
            goal_dim: GOAL_DIM,
        }
    }

    pub fn for_encoder(kind: EncoderKind, frames: usize, frame_shape: (usize, usize)) -> Self {
        let _ = kind;
        Self::for_frames(frames, frame_shape.0, frame_shape.1)
    }

    pub fn is_1d(&self) -> bool {
        self.height == 1
    }

    pub fn kernel(&self) -> (usize, usize) {
        if self.is_1d() {
            (1, 3)
        } else {
            (3, 3)
        }
    }

    pub fn pool(&self) -> (usize, usize) {
        if self.is_1d() {
            (1, 2)
        } else {
            (2, 2)
        }
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    /// Flattened feature size after the convolutional stack.
    pub fn feature_len(&self) -> usize {
        let (ph, pw) = self.pool();
        let (mut h, mut w, mut c) = (self.height, self.width, self.in_channels);
        for &co in &self.conv_channels {
            h /= ph;
            w /= pw;
            c = co;
        }
        c * h * w
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.height == 0 || self.width == 0 || self.hidden == 0 {
            return Err(Error::Config(format!("degenerate network shape {self:?}")));
        }
        if self.conv_channels.contains(&0) {
            return Err(Error::Config("zero-width convolution".into()));
        }
        if self.feature_len() == 0 {
            return Err(Error::Config(format!(
                "{}x{} input pooled away by {} layers",
                self.height,
                self.width,
                self.conv_channels.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ConvLayer {
    c_in: usize,
    c_out: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    ph: usize,
    pw: usize,
    w_off: usize,
    b_off: usize,
}

impl ConvLayer {
    fn k(&self) -> usize {
        self.c_in * self.kh * self.kw
    }

    fn hw(&self) -> usize {
        self.h * self.w
    }

    fn in_len(&self) -> usize {
        self.c_in * self.hw()
    }

    fn act_len(&self) -> usize {
        self.c_out * self.hw()
    }

    fn out_len(&self) -> usize {
        self.c_out * (self.h / self.ph) * (self.w / self.pw)
    }

    /// Unfolds a `c_in × h × w` input into `k × hw` columns (zero padding).
    fn im2col<T: Real>(&self, input: &[T], cols: &mut [T]) {
        let (h, w, hw) = (self.h as isize, self.w, self.hw());
        for ci in 0..self.c_in {
            let plane = &input[ci * hw..(ci + 1) * hw];
            for dy in 0..self.kh {
                for dx in 0..self.kw {
                    let row = (ci * self.kh + dy) * self.kw + dx;
                    let dst = &mut cols[row * hw..(row + 1) * hw];
                    let oy = dy as isize - (self.kh / 2) as isize;
                    let ox = dx as isize - (self.kw / 2) as isize;
                    let x0 = (-ox).max(0) as usize;
                    let x1 = (w as isize - ox).min(w as isize).max(0) as usize;
                    for y in 0..self.h {
                        let d = &mut dst[y * w..(y + 1) * w];
                        let sy = y as isize + oy;
                        if sy < 0 || sy >= h {
                            d.fill(T::zero());
                            continue;
                        }
                        d[..x0].fill(T::zero());
                        d[x1.max(x0)..].fill(T::zero());
                        if x1 > x0 {
                            let s = sy as usize * w;
                            let sx0 = (x0 as isize + ox) as usize;
                            d[x0..x1].copy_from_slice(&plane[s + sx0..s + sx0 + (x1 - x0)]);
                        }
                    }
                }
            }
        }
    }

    /// Adjoint of [`im2col`](Self::im2col): accumulates columns into `out`.
    fn col2im<T: Real>(&self, cols: &[T], out: &mut [T]) {
        let (h, w, hw) = (self.h as isize, self.w, self.hw());
        out.fill(T::zero());
        for ci in 0..self.c_in {
            let plane = &mut out[ci * hw..(ci + 1) * hw];
            for dy in 0..self.kh {
                for dx in 0..self.kw {
                    let row = (ci * self.kh + dy) * self.kw + dx;
                    let src = &cols[row * hw..(row + 1) * hw];
                    let oy = dy as isize - (self.kh / 2) as isize;
                    let ox = dx as isize - (self.kw / 2) as isize;
                    let x0 = (-ox).max(0) as usize;
                    let x1 = (w as isize - ox).min(w as isize).max(0) as usize;
                    if x1 <= x0 {
                        continue;
                    }
                    for y in 0..self.h {
                        let sy = y as isize + oy;
                        if sy < 0 || sy >= h {
                            continue;
                        }
                        let s = sy as usize * w;
                        let sx0 = (x0 as isize + ox) as usize;
                        let dst = &mut plane[s + sx0..s + sx0 + (x1 - x0)];
                        for (a, &b) in dst.iter_mut().zip(&src[y * w + x0..y * w + x1]) {
                            *a += b;
                        }
                    }
                }
            }
        }
    }

    /// Convolution + ReLU into `act`, then max pooling into `out`.
    fn forward<T: Real>(&self, p: &[T], input: &[T], cols: &mut [T], act: &mut [T], out: &mut [T], argmax: &mut [u32]) {
        let hw = self.hw();
        self.im2col(input, cols);
        let wt = &p[self.w_off..self.w_off + self.c_out * self.k()];
        gemm(Mat::new(wt, self.c_out, self.k()), Mat::new(cols, self.k(), hw), T::zero(), act);
        let bias = &p[self.b_off..self.b_off + self.c_out];
        for (c, &b) in bias.iter().enumerate() {
            for a in &mut act[c * hw..(c + 1) * hw] {
                let v = *a + b;
                *a = if v > T::zero() { v } else { T::zero() };
            }
        }
        let (oh, ow) = (self.h / self.ph, self.w / self.pw);
        for c in 0..self.c_out {
            let plane = &act[c * hw..(c + 1) * hw];
            for py in 0..oh {
                let o_row = &mut out[(c * oh + py) * ow..(c * oh + py + 1) * ow];
                let a_row = &mut argmax[(c * oh + py) * ow..(c * oh + py + 1) * ow];
                for (px, (o, a)) in o_row.iter_mut().zip(a_row.iter_mut()).enumerate() {
                    let first = py * self.ph * self.w + px * self.pw;
                    let (mut best, mut val) = (first, plane[first]);
                    for i in 0..self.ph {
                        let row = first + i * self.w;
                        for idx in row..row + self.pw {
                            // strict: first maximum wins
                            if plane[idx] > val {
                                val = plane[idx];
                                best = idx;
                            }
                        }
                    }
                    *o = val;
                    *a = (c * hw + best) as u32;
                }
            }
        }
    }

    /// Back-propagates `d_out` (pooled gradient). Accumulates weight/bias
    /// gradients into `grad` and, when `d_in` is given, writes the input
    /// gradient there.
    #[allow(clippy::too_many_arguments)]
    fn backward<T: Real>(
        &self,
        p: &[T],
        input: &[T],
        act: &[T],
        argmax: &[u32],
        d_out: &[T],
        scratch: &mut ConvScratch<T>,
        grad: &mut [T],
        d_in: Option<&mut [T]>,
    ) {
        let (hw, k) = (self.hw(), self.k());
        let d_act = &mut scratch.d_act[..self.act_len()];
        d_act.fill(T::zero());
        for (&i, &g) in argmax.iter().zip(d_out) {
            let i = i as usize;
            if act[i] > T::zero() {
                d_act[i] += g;
            }
        }
        let cols = &mut scratch.cols[..k * hw];
        self.im2col(input, cols);
        gemm(
            Mat::new(d_act, self.c_out, hw),
            Mat::new(cols, k, hw).t(),
            T::one(),
            &mut grad[self.w_off..self.w_off + self.c_out * k],
        );
        for c in 0..self.c_out {
            let s: T = d_act[c * hw..(c + 1) * hw].iter().copied().sum();
            grad[self.b_off + c] += s;
        }
        if let Some(d_in) = d_in {
            let wt = &p[self.w_off..self.w_off + self.c_out * k];
            gemm(Mat::new(wt, self.c_out, k).t(), Mat::new(d_act, self.c_out, hw), T::zero(), cols);
            self.col2im(cols, d_in);
        }
    }
}

struct ConvScratch<T> {
    cols: Vec<T>,
    d_act: Vec<T>,
}

/// Activations saved by a batched forward pass for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct Cache<T> {
    batch: usize,
    /// `inputs[l]` is the input of conv layer `l`; the last entry holds the
    /// flattened features.
    inputs: Vec<Vec<T>>,
    acts: Vec<Vec<T>>,
    argmax: Vec<Vec<u32>>,
    h1: Vec<T>,
    z: Vec<T>,
    h2: Vec<T>,
    pub out: Vec<T>,
}

impl<T> Cache<T> {
    pub fn batch(&self) -> usize {
        self.batch
    }
}

/// Offsets of one network body inside a [`ParamSet`].
#[derive(Debug, Clone)]
pub struct Trunk {
    pub spec: NetSpec,
    pub n_out: usize,
    convs: Vec<ConvLayer>,
    feat: usize,
    fc1: (usize, usize),
    fc2: (usize, usize),
    head: (usize, usize),
}

impl Trunk {
    /// Registers parameters under `prefix` and initialises them orthogonally
    /// (gain √2 for hidden layers, `head_gain` for the output layer, zero
    /// biases).
    pub fn build<T: Real, R: Rng + ?Sized>(
        spec: &NetSpec,
        n_out: usize,
        head_gain: f64,
        params: &mut ParamSet<T>,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        let (kh, kw) = spec.kernel();
        let (ph, pw) = spec.pool();
        let hidden_gain = 2f64.sqrt();
        let mut convs = Vec::new();
        let (mut c, mut h, mut w) = (spec.in_channels, spec.height, spec.width);
        for (i, &co) in spec.conv_channels.iter().enumerate() {
            let w_off = params.add(&format!("conv{i}.weight"), &[co, c, kh, kw]);
            let b_off = params.add(&format!("conv{i}.bias"), &[co]);
            let k = c * kh * kw;
            orthogonal(&mut params.data[w_off..w_off + co * k], co, k, hidden_gain, rng);
            convs.push(ConvLayer {
                c_in: c,
                c_out: co,
                h,
                w,
                kh,
                kw,
                ph,
                pw,
                w_off,
                b_off,
            });
            c = co;
            h /= ph;
            w /= pw;
        }
        let feat = spec.feature_len();
        let u = spec.hidden;
        let mut dense = |name: &str, rows: usize, cols: usize, gain: f64| {
            let w_off = params.add(&format!("{name}.weight"), &[rows, cols]);
            let b_off = params.add(&format!("{name}.bias"), &[rows]);
            orthogonal(&mut params.data[w_off..w_off + rows * cols], rows, cols, gain, rng);
            (w_off, b_off)
        };
        let fc1 = dense("fc1", u, feat, hidden_gain);
        let fc2 = dense("fc2", u, u + spec.goal_dim, hidden_gain);
        let head = dense("head", n_out, u, head_gain);
        Ok(Self {
            spec: spec.clone(),
            n_out,
            convs,
            feat,
            fc1,
            fc2,
            head,
        })
    }

    pub fn feature_len(&self) -> usize {
        self.feat
    }

    /// Runs a batch. `maps` is `batch × input_len`, `goals` is
    /// `batch × goal_dim`. Outputs land in `cache.out` (`batch × n_out`).
    pub fn forward<T: Real>(&self, p: &[T], maps: &[T], goals: &[T], batch: usize, cache: &mut Cache<T>) {
        let spec = &self.spec;
        assert_eq!(maps.len(), batch * spec.input_len(), "map batch size");
        assert_eq!(goals.len(), batch * spec.goal_dim, "goal batch size");
        let nl = self.convs.len();
        cache.batch = batch;
        cache.inputs.resize_with(nl + 1, Vec::new);
        cache.acts.resize_with(nl, Vec::new);
        cache.argmax.resize_with(nl, Vec::new);
        cache.inputs[0].clear();
        cache.inputs[0].extend_from_slice(maps);
        let max_cols = self.convs.iter().map(|l| l.k() * l.hw()).max().unwrap_or(0);
        let mut cols = vec![T::zero(); max_cols];
        for (l, layer) in self.convs.iter().enumerate() {
            cache.acts[l].resize(batch * layer.act_len(), T::zero());
            cache.argmax[l].resize(batch * layer.out_len(), 0);
            let (before, after) = cache.inputs.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.resize(batch * layer.out_len(), T::zero());
            for b in 0..batch {
                layer.forward(
                    p,
                    &input[b * layer.in_len()..(b + 1) * layer.in_len()],
                    &mut cols,
                    &mut cache.acts[l][b * layer.act_len()..(b + 1) * layer.act_len()],
                    &mut out[b * layer.out_len()..(b + 1) * layer.out_len()],
                    &mut cache.argmax[l][b * layer.out_len()..(b + 1) * layer.out_len()],
                );
            }
        }
        let feat = &cache.inputs[nl];
        let (u, g, f) = (spec.hidden, spec.goal_dim, self.feat);
        cache.h1.resize(batch * u, T::zero());
        dense_forward(p, self.fc1, feat, batch, f, u, true, &mut cache.h1);
        cache.z.resize(batch * (u + g), T::zero());
        for b in 0..batch {
            let row = &mut cache.z[b * (u + g)..(b + 1) * (u + g)];
            row[..u].copy_from_slice(&cache.h1[b * u..(b + 1) * u]);
            row[u..].copy_from_slice(&goals[b * g..(b + 1) * g]);
        }
        cache.h2.resize(batch * u, T::zero());
        dense_forward(p, self.fc2, &cache.z, batch, u + g, u, true, &mut cache.h2);
        cache.out.resize(batch * self.n_out, T::zero());
        dense_forward(p, self.head, &cache.h2, batch, u, self.n_out, false, &mut cache.out);
    }

    /// Accumulates `∂L/∂θ` into `grad` given `d_out = ∂L/∂out`.
    pub fn backward<T: Real>(&self, p: &[T], cache: &Cache<T>, d_out: &[T], grad: &mut [T]) {
        let spec = &self.spec;
        let batch = cache.batch;
        let (u, g, f, no) = (spec.hidden, spec.goal_dim, self.feat, self.n_out);
        assert_eq!(d_out.len(), batch * no);
        let mut dh2 = vec![T::zero(); batch * u];
        dense_backward(p, self.head, &cache.h2, d_out, batch, u, no, grad, &mut dh2);
        relu_mask(&mut dh2, &cache.h2);
        let mut dz = vec![T::zero(); batch * (u + g)];
        dense_backward(p, self.fc2, &cache.z, &dh2, batch, u + g, u, grad, &mut dz);
        let mut dh1 = vec![T::zero(); batch * u];
        for b in 0..batch {
            dh1[b * u..(b + 1) * u].copy_from_slice(&dz[b * (u + g)..b * (u + g) + u]);
        }
        relu_mask(&mut dh1, &cache.h1);
        let nl = self.convs.len();
        let mut dfeat = vec![T::zero(); batch * f];
        dense_backward(p, self.fc1, &cache.inputs[nl], &dh1, batch, f, u, grad, &mut dfeat);
        if nl == 0 {
            return;
        }
        let mut scratch = ConvScratch {
            cols: vec![T::zero(); self.convs.iter().map(|l| l.k() * l.hw()).max().unwrap_or(0)],
            d_act: vec![T::zero(); self.convs.iter().map(|l| l.act_len()).max().unwrap_or(0)],
        };
        let max_in = self.convs.iter().map(|l| l.in_len()).max().unwrap_or(0);
        let mut d_cur = vec![T::zero(); max_in.max(f)];
        let mut d_prev = vec![T::zero(); max_in.max(f)];
        for b in 0..batch {
            d_cur[..f].copy_from_slice(&dfeat[b * f..(b + 1) * f]);
            for l in (0..nl).rev() {
                let layer = &self.convs[l];
                let (il, al, ol) = (layer.in_len(), layer.act_len(), layer.out_len());
                let d_in = if l > 0 { Some(&mut d_prev[..il]) } else { None };
                layer.backward(
                    p,
                    &cache.inputs[l][b * il..(b + 1) * il],
                    &cache.acts[l][b * al..(b + 1) * al],
                    &cache.argmax[l][b * ol..(b + 1) * ol],
                    &d_cur[..ol],
                    &mut scratch,
                    grad,
                    d_in,
                );
                std::mem::swap(&mut d_cur, &mut d_prev);
            }
        }
    }
}

/// `out[b] = act(W·x[b] + bias)` for a row-major `n_out × n_in` weight.
#[allow(clippy::too_many_arguments)]
fn dense_forward<T: Real>(
    p: &[T],
    (w_off, b_off): (usize, usize),
    x: &[T],
    batch: usize,
    n_in: usize,
    n_out: usize,
    relu: bool,
    out: &mut [T],
) {
    let w = &p[w_off..w_off + n_out * n_in];
    gemm(Mat::new(x, batch, n_in), Mat::new(w, n_out, n_in).t(), T::zero(), out);
    let bias = &p[b_off..b_off + n_out];
    for row in out.chunks_mut(n_out) {
        for (o, &b) in row.iter_mut().zip(bias) {
            let v = *o + b;
            *o = if relu && v <= T::zero() { T::zero() } else { v };
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dense_backward<T: Real>(
    p: &[T],
    (w_off, b_off): (usize, usize),
    x: &[T],
    d_out: &[T],
    batch: usize,
    n_in: usize,
    n_out: usize,
    grad: &mut [T],
    d_in: &mut [T],
) {
    gemm(
        Mat::new(d_out, batch, n_out).t(),
        Mat::new(x, batch, n_in),
        T::one(),
        &mut grad[w_off..w_off + n_out * n_in],
    );
    for row in d_out.chunks(n_out) {
        for (g, &d) in grad[b_off..b_off + n_out].iter_mut().zip(row) {
            *g += d;
        }
    }
    let w = &p[w_off..w_off + n_out * n_in];
    gemm(Mat::new(d_out, batch, n_out), Mat::new(w, n_out, n_in), T::zero(), d_in);
}

fn relu_mask<T: Real>(d: &mut [T], act: &[T]) {
    for (g, &a) in d.iter_mut().zip(act) {
        if a <= T::zero() {
            *g = T::zero();
        }
    }
}
