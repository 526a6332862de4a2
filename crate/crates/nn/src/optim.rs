use serde::{Deserialize, Serialize};

use crate::real::Real;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f32>,
    pub v: Vec<f32>,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn step<T: Real>(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t.min(i32::MAX as u64) as i32);
        let c2 = 1.0 - b2.powi(self.t.min(i32::MAX as u64) as i32);
        let step = self.lr / c1;
        for i in 0..params.len() {
            let g = grads[i].as_f64();
            let m = b1 * self.m[i] as f64 + (1.0 - b1) * g;
            let v = b2 * self.v[i] as f64 + (1.0 - b2) * g * g;
            self.m[i] = m as f32;
            self.v[i] = v as f32;
            let update = step * m / ((v / c2).sqrt() + self.eps);
            params[i] -= T::lit(update);
        }
    }
}

/// Global L2 norm of a gradient vector.
pub fn grad_norm<T: Real>(grads: &[T]) -> f64 {
    grads.iter().map(|g| g.as_f64().powi(2)).sum::<f64>().sqrt()
}

/// Rescales `grads` so its norm is at most `max_norm`; returns the original
/// norm.
pub fn clip_grad_norm<T: Real>(grads: &mut [T], max_norm: f64) -> f64 {
    let norm = grad_norm(grads);
    if norm > max_norm && norm > 0.0 {
        let s = T::lit(max_norm / norm);
        grads.iter_mut().for_each(|g| *g *= s);
    }
    norm
}
