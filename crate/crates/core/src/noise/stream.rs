//! Reproducible Gaussian draws and their dyadic aggregation.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::model::NoiseModel;
use super::projector::NoiseProjector;
use crate::dg::Field;
use crate::error::{Error, Result};

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream of one Monte Carlo realization. Draws for step `n` depend only
/// on `(master_seed, realization, n)`, and modes are drawn in order, so any
/// prefix of modes is shared between truncation levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    master_seed: u64,
    realization: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, realization: u64) -> Self {
        Self {
            master_seed,
            realization,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn realization(&self) -> u64 {
        self.realization
    }

    /// Generator for step `step`.
    pub fn rng(&self, step: u64) -> Xoshiro256PlusPlus {
        let k = splitmix(self.master_seed ^ splitmix(self.realization ^ splitmix(step)));
        let k2 = splitmix(k ^ 0xD1B5_4A32_D192_ED03);
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&k.to_le_bytes());
        seed[8..16].copy_from_slice(&k2.to_le_bytes());
        seed[16..24].copy_from_slice(&splitmix(k2).to_le_bytes());
        seed[24..].copy_from_slice(&splitmix(k ^ k2).to_le_bytes());
        Xoshiro256PlusPlus::from_seed(seed)
    }

    /// Standard normals `xi_{1,step} .. xi_{len,step}`.
    pub fn normals(&self, step: u64, out: &mut [f64]) {
        let mut rng = self.rng(step);
        for o in out.iter_mut() {
            *o = StandardNormal.sample(&mut rng);
        }
    }

    /// Increment amplitudes `sqrt(q_j tau) xi_{j,step}`.
    pub fn amplitudes(&self, model: &NoiseModel, sqrt_q: &[f64], tau: f64, step: u64, out: &mut [f64]) {
        debug_assert!(out.len() <= model.n_modes());
        self.normals(step, out);
        let st = tau.sqrt();
        for (o, s) in out.iter_mut().zip(sqrt_q) {
            *o *= s * st;
        }
    }
}

/// `P_h Delta W^n` for step `step` of length `tau`.
pub fn sample_increment(
    model: &NoiseModel,
    projector: &NoiseProjector,
    tau: f64,
    step: u64,
    stream: &NoiseStream,
) -> Result<Field> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let sq = model.sqrt_q();
    let mut amp = vec![0.0; model.n_modes()];
    stream.amplitudes(model, &sq, tau, step, &mut amp);
    Ok(projector.project(&amp))
}

/// Coarse increment over two consecutive fine steps.
pub fn coarsen_pair(first: &[f64], second: &[f64]) -> Vec<f64> {
    first.iter().zip(second).map(|(a, b)| a + b).collect()
}

/// Number of halvings from `tau_coarse` down to `tau_fine`.
pub fn dyadic_shift(tau_coarse: f64, tau_fine: f64) -> Result<u32> {
    let r = tau_coarse / tau_fine;
    let m = r.log2().round();
    if !(m >= 0.0) || (r - 2f64.powi(m as i32)).abs() > 1e-9 * r {
        return Err(Error::NonDyadic(format!(
            "tau ratio {tau_coarse} / {tau_fine} = {r} is not a power of two"
        )));
    }
    Ok(m as u32)
}

/// Builds increments on every coarser dyadic level from the finest stream by
/// pairwise tree sums, so that each level-`m` increment is bit-identical to
/// the sum of the two level-`(m-1)` increments it covers.
#[derive(Debug, Clone)]
pub struct DyadicCascade {
    max_shift: u32,
    len: usize,
    pending: Vec<Option<Vec<f64>>>,
    ready: Vec<Vec<f64>>,
    completed: Vec<bool>,
}

impl DyadicCascade {
    pub fn new(max_shift: u32, len: usize) -> Self {
        let levels = max_shift as usize + 1;
        Self {
            max_shift,
            len,
            pending: vec![None; levels],
            ready: vec![vec![0.0; len]; levels],
            completed: vec![false; levels],
        }
    }

    pub fn max_shift(&self) -> u32 {
        self.max_shift
    }

    /// Feed the next finest-level increment.
    pub fn push(&mut self, fine: &[f64]) {
        debug_assert_eq!(fine.len(), self.len);
        self.completed.iter_mut().for_each(|c| *c = false);
        self.ready[0].copy_from_slice(fine);
        self.completed[0] = true;
        for m in 1..=self.max_shift as usize {
            match self.pending[m].take() {
                None => {
                    self.pending[m] = Some(self.ready[m - 1].clone());
                    break;
                }
                Some(first) => {
                    let (lo, hi) = self.ready.split_at_mut(m);
                    for ((o, a), b) in hi[0].iter_mut().zip(&first).zip(&lo[m - 1]) {
                        *o = a + b;
                    }
                    self.completed[m] = true;
                }
            }
        }
    }

    /// The increment of level `shift` completed by the last push, if any.
    pub fn completed(&self, shift: u32) -> Result<Option<&[f64]>> {
        if shift > self.max_shift {
            return Err(Error::NonDyadic(format!(
                "level {shift} beyond cascade depth {}",
                self.max_shift
            )));
        }
        let m = shift as usize;
        Ok(self.completed[m].then_some(self.ready[m].as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = NoiseStream::new(42, 3);
        let mut a = vec![0.0; 16];
        let mut b = vec![0.0; 16];
        s.normals(7, &mut a);
        s.normals(7, &mut b);
        assert_eq!(a, b);
        let mut prefix = vec![0.0; 5];
        s.normals(7, &mut prefix);
        assert_eq!(&a[..5], &prefix[..]);
        NoiseStream::new(42, 4).normals(7, &mut b);
        assert_ne!(a, b);
        s.normals(8, &mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn cascade_matches_tree_sums() {
        let mut c = DyadicCascade::new(2, 3);
        let fine: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![0.1 * i as f64, 1.0 / (i as f64 + 1.0), -(i as f64).sqrt()])
            .collect();
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        for f in &fine {
            c.push(f);
            if let Some(x) = c.completed(1).unwrap() {
                l1.push(x.to_vec());
            }
            if let Some(x) = c.completed(2).unwrap() {
                l2.push(x.to_vec());
            }
        }
        assert_eq!(l1.len(), 4);
        assert_eq!(l2.len(), 2);
        for i in 0..4 {
            assert_eq!(l1[i], coarsen_pair(&fine[2 * i], &fine[2 * i + 1]));
        }
        for i in 0..2 {
            assert_eq!(l2[i], coarsen_pair(&l1[2 * i], &l1[2 * i + 1]));
        }
        assert!(c.completed(3).is_err());
    }

    #[test]
    fn dyadic_ratios() {
        assert_eq!(dyadic_shift(0.25, 1.0 / 64.0).unwrap(), 4);
        assert_eq!(dyadic_shift(0.1, 0.1).unwrap(), 0);
        assert!(matches!(dyadic_shift(0.3, 0.1), Err(Error::NonDyadic(_))));
        assert!(dyadic_shift(0.1, 0.2).is_err());
    }

    #[test]
    fn empty_truncation_gives_zero_increment() {
        let space = crate::dg::DGSpace::unit(4, 1).unwrap();
        let model = NoiseModel::new(1.0, 0, 0.0, 1.0).unwrap();
        let proj = NoiseProjector::new(&model, &space).unwrap();
        let w = sample_increment(&model, &proj, 0.1, 0, &NoiseStream::new(1, 0)).unwrap();
        assert!(w.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn mode_variance_is_q_tau() {
        let model = NoiseModel::new(1.0, 4, 0.0, 1.0).unwrap();
        let sq = model.sqrt_q();
        let tau = 0.01;
        let n = 10_000;
        let mut sum2 = [0.0; 4];
        let mut sum4 = [0.0; 4];
        let mut buf = [0.0; 4];
        let s = NoiseStream::new(9, 0);
        for step in 0..n {
            s.amplitudes(&model, &sq, tau, step, &mut buf);
            for j in 0..4 {
                sum2[j] += buf[j] * buf[j];
                sum4[j] += buf[j].powi(4);
            }
        }
        for j in 0..4 {
            let mean = sum2[j] / n as f64;
            let var = sum4[j] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            let expect = model.q(j + 1) * tau;
            assert!((mean - expect).abs() < 3.0 * se, "mode {j}: {mean} vs {expect}");
        }
    }
}
