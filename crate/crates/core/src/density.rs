//! Quantized density evolution for regular ensembles under clipping.
//!
//! Densities live on the grid `k·Δ`, `k = −h..=h`, with `h·Δ = τ`. The check
//! step reduces pairs of densities through a precomputed table of the exact
//! tanh rule; the variable step convolves with FFTs. Mass beyond `±τ` folds
//! onto the endpoints.
//!
//! The table is evaluated in the `φ(x) = −ln tanh(x/2)` domain, so it does
//! not saturate near 28 the way a floating-point tanh product does; only
//! the clip limits the extrinsic means.

use crate::channel::llr_mean;
use crate::dynamics::{ErrorFloorInputs, InputsError};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use libm::erfc;

pub const DEFAULT_RESOLUTION: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("clip must be positive")]
    Clip,
    #[error("resolution must be an even number between 4 and 65536, got {0}")]
    Resolution(usize),
    #[error("degrees must satisfy d_v ≥ 1 and d_c ≥ 2")]
    Degrees,
    #[error("at least one iteration is required")]
    NoIterations,
    #[error("noise variance must be positive")]
    Noise,
    #[error("grid too coarse: discretized channel mean {mean} vs analytic {analytic}")]
    GridTooCoarse { mean: f64, analytic: f64 },
}

/// How the check gain is read from a variable-to-check density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainReading {
    /// `(E[tanh(X/2)])^{d_c−2}` over the density.
    #[default]
    Independent,
    /// `tanh(E[X]/2)^{d_c−2}`.
    MeanField,
}

/// Reusable grid and check table for one `(τ, resolution)` pair.
pub struct DensityEvolution {
    tau: f64,
    half: usize,
    step: f64,
    // table[i·(h+1) + j]: grid magnitude of the check output for input
    // magnitudes i and j
    table: Vec<u32>,
}

/// Result of one evolution. Index `i − 1` of the per-iteration vectors
/// refers to iteration `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d_v: usize,
    pub d_c: usize,
    pub sigma2: f64,
    pub tau: f64,
    /// Analytic channel LLR mean `2/σ²` (unclipped).
    pub m_lambda: f64,
    pub m_vc: Vec<f64>,
    /// Check-to-variable means, the extrinsic means `m_ext(i)`.
    pub m_cv: Vec<f64>,
    /// `g[0] = 1`, then one gain per iteration, independent reading.
    pub g: Vec<f64>,
    pub g_mean_field: Vec<f64>,
    #[serde(skip)]
    pub vc: Vec<Vec<f64>>,
    #[serde(skip)]
    pub cv: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn gains(&self, reading: GainReading) -> &[f64] {
        match reading {
            GainReading::Independent => &self.g,
            GainReading::MeanField => &self.g_mean_field,
        }
    }

    /// Formula inputs for the first `iters` iterations.
    pub fn inputs(&self, iters: usize, reading: GainReading) -> Result<ErrorFloorInputs, InputsError> {
        let iters = iters.min(self.m_cv.len());
        ErrorFloorInputs::new(
            self.m_lambda,
            self.m_cv[..iters].to_vec(),
            self.gains(reading)[..=iters].to_vec(),
            self.tau,
        )
    }
}

fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Mean of `clip(X, −τ, τ)` for `X ~ N(m, s²)`.
pub fn clipped_gaussian_mean(m: f64, s: f64, tau: f64) -> f64 {
    let (a, b) = ((-tau - m) / s, (tau - m) / s);
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let inner = m * (big_phi(b) - big_phi(a)) + s * (pdf(a) - pdf(b));
    inner + tau * (1.0 - big_phi(b)) - tau * big_phi(a)
}

/// Gain factor of a variable-to-check density on a symmetric grid of
/// spacing `step` centered at index `len / 2`.
pub fn gain_factor(pmf: &[f64], step: f64, d_c: usize, reading: GainReading) -> f64 {
    let half = (pmf.len() / 2) as isize;
    let value = |k: usize| (k as isize - half) as f64 * step;
    let e = match reading {
        GainReading::Independent => pmf.iter().enumerate().map(|(k, p)| p * (value(k) / 2.0).tanh()).sum::<f64>(),
        GainReading::MeanField => {
            let mean: f64 = pmf.iter().enumerate().map(|(k, p)| p * value(k)).sum();
            (mean / 2.0).tanh()
        }
    };
    e.clamp(0.0, 1.0).powi(d_c.saturating_sub(2) as i32)
}

impl DensityEvolution {
    pub fn new(tau: f64, resolution: usize) -> Result<Self, DensityError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(DensityError::Clip);
        }
        if resolution < 4 || resolution % 2 != 0 || resolution > 65536 {
            return Err(DensityError::Resolution(resolution));
        }
        let half = resolution / 2;
        let step = tau / half as f64;
        let mut table = vec![0u32; (half + 1) * (half + 1)];
        table.par_chunks_mut(half + 1).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                let x = check_magnitude(i as f64 * step, j as f64 * step);
                let r = (x / step + 0.5).floor();
                *slot = r.min(half as f64) as u32;
            }
        });
        Ok(Self { tau, half, step, table })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        (k as f64 - self.half as f64) * self.step
    }

    pub fn mean(&self, pmf: &[f64]) -> f64 {
        pmf.iter().enumerate().map(|(k, p)| p * self.value(k)).sum()
    }

    /// Point mass at the grid point nearest `x` (clipped).
    pub fn point_mass(&self, x: f64) -> Vec<f64> {
        let k = ((x.clamp(-self.tau, self.tau) / self.step).abs() + 0.5).floor() as isize * x.signum() as isize;
        let mut p = vec![0.0; self.len()];
        p[(k + self.half as isize) as usize] = 1.0;
        p
    }

    /// Discretized clipped `N(m, 2m)`: interior points take the mass of
    /// their cell, endpoints the tails.
    pub fn gaussian(&self, m: f64) -> Vec<f64> {
        let s = (2.0 * m).sqrt();
        let n = self.len();
        let cdf = |x: f64| big_phi((x - m) / s);
        let mut p = vec![0.0; n];
        if s == 0.0 {
            return self.point_mass(m);
        }
        for (k, slot) in p.iter_mut().enumerate() {
            let lo = if k == 0 { 0.0 } else { cdf(self.value(k) - self.step / 2.0) };
            let hi = if k == n - 1 { 1.0 } else { cdf(self.value(k) + self.step / 2.0) };
            *slot = (hi - lo).max(0.0);
        }
        normalize(&mut p);
        p
    }

    /// Check-node output density for two independent inputs.
    pub fn check_pair(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let h = self.half;
        let split = |x: &[f64]| {
            let pos: Vec<f64> = (0..=h).map(|i| x[h + i]).collect();
            let neg: Vec<f64> = (0..=h).map(|i| if i == 0 { 0.0 } else { x[h - i] }).collect();
            (pos, neg)
        };
        let (pp, pn) = split(p);
        let (qp, qn) = split(q);
        let mut out_pos = vec![0.0; h + 1];
        let mut out_neg = vec![0.0; h + 1];
        for i in 0..=h {
            if pp[i] == 0.0 && pn[i] == 0.0 {
                continue;
            }
            let row = &self.table[i * (h + 1)..(i + 1) * (h + 1)];
            for j in 0..=h {
                let r = row[j] as usize;
                out_pos[r] += pp[i] * qp[j] + pn[i] * qn[j];
                out_neg[r] += pp[i] * qn[j] + pn[i] * qp[j];
            }
        }
        let mut out = vec![0.0; self.len()];
        out[h] = out_pos[0] + out_neg[0];
        for r in 1..=h {
            out[h + r] = out_pos[r];
            out[h - r] = out_neg[r];
        }
        out
    }

    /// Check output for `count ≥ 1` independent copies of `p`, by repeated
    /// squaring.
    pub fn check_power(&self, p: &[f64], count: usize) -> Vec<f64> {
        let mut result: Option<Vec<f64>> = None;
        let mut base = p.to_vec();
        let mut k = count;
        while k > 0 {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.check_pair(&r, &base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = self.check_pair(&base, &base);
            }
        }
        result.unwrap_or_else(|| self.point_mass(f64::INFINITY))
    }

    /// Variable-node output density: channel plus `count` check messages,
    /// summed then clipped.
    pub fn variable(&self, channel: &[f64], cv: &[f64], count: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
        let n = self.len();
        let h = self.half as isize;
        let full = (count + 1) * (n - 1) + 1;
        let size = full.next_power_of_two();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);
        let load = |x: &[f64]| {
            let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
            buf.resize(size, Complex::new(0.0, 0.0));
            fft.process(&mut buf);
            buf
        };
        let mut acc = load(channel);
        if count > 0 {
            let c = load(cv);
            for (a, b) in acc.iter_mut().zip(&c) {
                *a *= b.powu(count as u32);
            }
        }
        ifft.process(&mut acc);
        // index t of the sum corresponds to grid offset t − (count + 1)·h
        let offset = (count as isize + 1) * h;
        let mut out = vec![0.0; n];
        for (t, z) in acc.iter().take(full).enumerate() {
            let k = (t as isize - offset).clamp(-h, h) + h;
            out[k as usize] += (z.re / size as f64).max(0.0);
        }
        normalize(&mut out);
        out
    }

    /// Evolves `iters` iterations of the `(d_v, d_c)` ensemble at noise
    /// variance `sigma2`.
    pub fn evolve(&self, d_v: usize, d_c: usize, sigma2: f64, iters: usize) -> Result<Trajectory, DensityError> {
        if d_v == 0 || d_c < 2 {
            return Err(DensityError::Degrees);
        }
        if iters == 0 {
            return Err(DensityError::NoIterations);
        }
        if !(sigma2 > 0.0) {
            return Err(DensityError::Noise);
        }
        let m_lambda = llr_mean(sigma2);
        let channel = self.gaussian(m_lambda);
        let analytic = clipped_gaussian_mean(m_lambda, (2.0 * m_lambda).sqrt(), self.tau);
        let mean = self.mean(&channel);
        if (mean - analytic).abs() > 0.01 * analytic.abs().max(self.step) {
            return Err(DensityError::GridTooCoarse { mean, analytic });
        }
        let mut planner = FftPlanner::new();
        let mut traj = Trajectory {
            d_v,
            d_c,
            sigma2,
            tau: self.tau,
            m_lambda,
            m_vc: Vec::with_capacity(iters),
            m_cv: Vec::with_capacity(iters),
            g: vec![1.0],
            g_mean_field: vec![1.0],
            vc: Vec::with_capacity(iters),
            cv: Vec::with_capacity(iters),
        };
        let mut cv = Vec::new();
        for i in 0..iters {
            let vc = if i == 0 {
                channel.clone()
            } else {
                self.variable(&channel, &cv, d_v - 1, &mut planner)
            };
            cv = self.check_power(&vc, d_c - 1);
            traj.m_vc.push(self.mean(&vc));
            traj.m_cv.push(self.mean(&cv));
            traj.g.push(gain_factor(&vc, self.step, d_c, GainReading::Independent));
            traj.g_mean_field.push(gain_factor(&vc, self.step, d_c, GainReading::MeanField));
            traj.vc.push(vc);
            traj.cv.push(cv.clone());
        }
        Ok(traj)
    }

    /// Independent evolutions over a noise grid.
    pub fn evolve_many(
        &self,
        d_v: usize,
        d_c: usize,
        sigma2: &[f64],
        iters: usize,
    ) -> Vec<Result<Trajectory, DensityError>> {
        sigma2.par_iter().map(|&s| self.evolve(d_v, d_c, s, iters)).collect()
    }
}

fn phi(x: f64) -> f64 {
    (2.0 / x.exp_m1()).ln_1p()
}

/// Exact check output magnitude `2·atanh(tanh(a/2)·tanh(b/2))` for
/// `a, b ≥ 0`.
pub fn check_magnitude(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo == 0.0 {
        return 0.0;
    }
    if lo > 30.0 {
        // φ(x) = 2e^{−x}(1 + O(e^{−2x}))
        return lo - (-(hi - lo)).exp().ln_1p();
    }
    phi(phi(lo) + phi(hi))
}

fn normalize(p: &mut [f64]) {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
}
