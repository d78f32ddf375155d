//! Online contrastive loss and a tiny trainable encoder for checking it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode::{hash_features, EmbeddingVector};
use crate::error::{Error, Result};

use super::PairExample;

pub const DEFAULT_LOSS_MARGIN: f64 = 0.4;

/// Which entries of `batch` (cosine distance, is-positive) count as hard:
/// negatives closer than the farthest positive and positives farther than
/// the closest negative. With one class absent, all of the other are kept.
pub fn hard_selection(batch: &[(f64, bool)]) -> Vec<bool> {
    let max_pos = batch.iter().filter(|(_, p)| *p).map(|(d, _)| *d).reduce(f64::max);
    let min_neg = batch.iter().filter(|(_, p)| !*p).map(|(d, _)| *d).reduce(f64::min);
    batch
        .iter()
        .map(|&(d, positive)| match (positive, max_pos, min_neg) {
            (true, _, Some(mn)) => d > mn,
            (false, Some(mx), _) => d < mx,
            _ => true,
        })
        .collect()
}

fn pair_term(d: f64, positive: bool, margin: f64) -> f64 {
    if positive {
        d * d
    } else {
        (margin - d).max(0.0).powi(2)
    }
}

/// Mean over the hard subset of `d²` (positives) and `max(0, margin - d)²`
/// (negatives); 0 if nothing is selected.
pub fn online_contrastive_loss(batch: &[(f64, bool)], margin: f64) -> f64 {
    let sel = hard_selection(batch);
    let n = sel.iter().filter(|s| **s).count();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = batch
        .iter()
        .zip(&sel)
        .filter(|(_, s)| **s)
        .map(|(&(d, p), _)| pair_term(d, p, margin))
        .sum();
    total / n as f64
}

/// A linear map from signed character-trigram counts to an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEncoder {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<f64>,
}

impl ToyEncoder {
    pub fn new(in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        if in_dim < crate::encode::hash::MIN_DIM || out_dim == 0 {
            return Err(Error::Precondition(format!("bad toy encoder shape {out_dim}x{in_dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-scale..scale)).collect();
        Ok(ToyEncoder { in_dim, out_dim, weights })
    }

    pub fn features(&self, text: &str) -> Vec<f64> {
        hash_features(text, self.in_dim)
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        self.weights.chunks_exact(self.in_dim).map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum()).collect()
    }

    pub fn encode(&self, text: &str) -> Result<EmbeddingVector> {
        EmbeddingVector::new(self.project(&self.features(text)))?.normalized()
    }

    /// Batch loss and its gradient with respect to `weights`. The hard
    /// subset is treated as fixed, as autograd frameworks do.
    pub fn loss_and_gradient(&self, batch: &[PairExample], margin: f64) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::Precondition("empty training batch".into()));
        }
        struct Fwd {
            xa: Vec<f64>,
            xb: Vec<f64>,
            u: Vec<f64>,
            v: Vec<f64>,
            nu: f64,
            nv: f64,
            cos: f64,
        }
        let mut fwd = Vec::with_capacity(batch.len());
        let mut dists = Vec::with_capacity(batch.len());
        for p in batch {
            let (xa, xb) = (self.features(&p.text_a), self.features(&p.text_b));
            let (u, v) = (self.project(&xa), self.project(&xb));
            let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nu == 0.0 || nv == 0.0 {
                return Err(Error::Domain("toy encoder produced a zero embedding".into()));
            }
            let cos = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
            dists.push((1.0 - cos, p.label == 1));
            fwd.push(Fwd { xa, xb, u, v, nu, nv, cos });
        }

        let sel = hard_selection(&dists);
        let n_sel = sel.iter().filter(|s| **s).count();
        let loss = online_contrastive_loss(&dists, margin);
        let mut grad = vec![0.0; self.weights.len()];
        if n_sel == 0 {
            return Ok((loss, grad));
        }
        for ((f, &(d, positive)), _) in fwd.iter().zip(&dists).zip(&sel).filter(|(_, s)| **s) {
            let dl_dd = if positive { 2.0 * d } else { -2.0 * (margin - d).max(0.0) } / n_sel as f64;
            if dl_dd == 0.0 {
                continue;
            }
            // d = 1 - cos; dcos/du = v/(|u||v|) - cos u/|u|^2
            for k in 0..self.out_dim {
                let gu = -(f.v[k] / (f.nu * f.nv) - f.cos * f.u[k] / (f.nu * f.nu)) * dl_dd;
                let gv = -(f.u[k] / (f.nu * f.nv) - f.cos * f.v[k] / (f.nv * f.nv)) * dl_dd;
                let row = &mut grad[k * self.in_dim..(k + 1) * self.in_dim];
                for (l, g) in row.iter_mut().enumerate() {
                    *g += gu * f.xa[l] + gv * f.xb[l];
                }
            }
        }
        Ok((loss, grad))
    }
}

/// One gradient-descent step on `batch`; returns the loss before the step.
pub fn toy_train_step(encoder: &mut ToyEncoder, batch: &[PairExample], margin: f64, lr: f64) -> Result<f64> {
    let (loss, grad) = encoder.loss_and_gradient(batch, margin)?;
    for (w, g) in encoder.weights.iter_mut().zip(grad) {
        *w -= lr * g;
    }
    Ok(loss)
}
