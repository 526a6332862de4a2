//! Flat named parameter storage and initialisers.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// All trainable tensors of one network, stored back to back so optimisers
/// and gradient clipping can treat them as a single vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<T> {
    pub entries: Vec<ParamEntry>,
    pub data: Vec<T>,
}

impl<T: Real> Default for ParamSet<T> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
            data: Vec::new(),
        }
    }
}

impl<T: Real> ParamSet<T> {
    /// Appends a zero tensor and returns its offset.
    pub fn add(&mut self, name: &str, shape: &[usize]) -> usize {
        let offset = self.data.len();
        let entry = ParamEntry {
            name: name.to_string(),
            shape: shape.to_vec(),
            offset,
        };
        self.data.resize(offset + entry.len(), T::zero());
        self.entries.push(entry);
        offset
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&[T]> {
        self.entry(name).map(|e| &self.data[e.range()])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut [T]> {
        let r = self.entry(name)?.range();
        Some(&mut self.data[r])
    }

    pub fn zeros_like(&self) -> Vec<T> {
        vec![T::zero(); self.data.len()]
    }

    pub fn cast<U: Real>(&self) -> ParamSet<U> {
        ParamSet {
            entries: self.entries.clone(),
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }

    /// Copies values from `other`, requiring identical names and shapes.
    pub fn load_from(&mut self, other: &[(String, Vec<usize>, Vec<f32>)]) -> Result<()> {
        if other.len() != self.entries.len() {
            return Err(Error::Incompatible(format!(
                "expected {} tensors, found {}",
                self.entries.len(),
                other.len()
            )));
        }
        for (e, (name, shape, values)) in self.entries.iter().zip(other) {
            if &e.name != name || &e.shape != shape || values.len() != e.len() {
                return Err(Error::Incompatible(format!(
                    "tensor {name} {shape:?} does not match {} {:?}",
                    e.name, e.shape
                )));
            }
        }
        for (e, (_, _, values)) in self.entries.iter().zip(other) {
            for (d, &v) in self.data[e.range()].iter_mut().zip(values) {
                *d = T::lit(v as f64);
            }
        }
        Ok(())
    }

    pub fn export(&self) -> Vec<(String, Vec<usize>, Vec<f32>)> {
        self.entries
            .iter()
            .map(|e| {
                let v = self.data[e.range()].iter().map(|x| x.as_f64() as f32).collect();
                (e.name.clone(), e.shape.clone(), v)
            })
            .collect()
    }
}

/// Fills a `rows × cols` row-major matrix with a scaled (semi-)orthogonal
/// matrix: orthonormal rows when `rows ≤ cols`, orthonormal columns otherwise.
pub fn orthogonal<T: Real, R: Rng + ?Sized>(out: &mut [T], rows: usize, cols: usize, gain: f64, rng: &mut R) {
    assert_eq!(out.len(), rows * cols);
    let (n_vec, dim) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n_vec);
    while vecs.len() < n_vec {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        // Two passes of modified Gram-Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for u in &vecs {
                let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        vecs.push(v);
    }
    for r in 0..rows {
        for c in 0..cols {
            let x = if rows <= cols { vecs[r][c] } else { vecs[c][r] };
            out[r * cols + c] = T::lit(gain * x);
        }
    }
}
