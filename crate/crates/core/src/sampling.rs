//! Mean-shift importance sampling of decoder failures.
//!
//! The all-zero word is sent as BPSK `+1`s. On the bits of a target set the
//! transmitted mean moves from `+1` to `1 − s`; every trial is decoded and a
//! failure (any bit error after the last iteration) contributes its
//! likelihood ratio `p(y)/q(y)`. With several target sets, trial `t` is
//! biased toward set `t mod K` and weighted against the equal mixture of all
//! `K` biasing densities, which keeps the estimator unbiased.

use crate::channel::{compensated_sum, sigma2_from_ebn0_db};
use crate::code::{SparseParityCheck, TannerGraph};
use crate::decoder::{Decoder, DecoderConfig, DecoderError, Quantization};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Trials per parallel work unit. Results are reduced in trial order, so
/// estimates do not depend on the worker count.
const CHUNK: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("sample budget must be at least 1")]
    Budget,
    #[error("shift must be finite and nonnegative, got {0}")]
    Shift(f64),
    #[error("target set {set} names variable {var} outside the code (n = {n})")]
    Target { set: usize, var: usize, n: usize },
    #[error("no target sets given")]
    NoTargets,
    #[error("fixed selection {0} is not a target set")]
    Selection(usize),
    #[error("rate must be in (0, 1], got {0}")]
    Rate(f64),
    #[error("over-bias scan needs at least two shifts")]
    ScanLength,
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    #[default]
    RoundRobin,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub targets: Vec<Vec<usize>>,
    /// Mean displacement per target bit, in channel-symbol units.
    pub shift: f64,
    #[serde(default)]
    pub selection: Selection,
}

impl BiasSpec {
    pub fn new(targets: Vec<Vec<usize>>, shift: f64) -> Self {
        Self {
            targets,
            shift,
            selection: Selection::RoundRobin,
        }
    }

    /// Unbiased sampling (plain Monte Carlo).
    pub fn none() -> Self {
        Self::new(vec![Vec::new()], 0.0)
    }

    fn validate(&self, n: usize) -> Result<(), SamplingError> {
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(SamplingError::Shift(self.shift));
        }
        if self.targets.is_empty() {
            return Err(SamplingError::NoTargets);
        }
        for (set, t) in self.targets.iter().enumerate() {
            if let Some(&var) = t.iter().find(|&&v| v >= n) {
                return Err(SamplingError::Target { set, var, n });
            }
        }
        if let Selection::Fixed(k) = self.selection {
            if k >= self.targets.len() {
                return Err(SamplingError::Selection(k));
            }
        }
        Ok(())
    }

    /// Indices of the sets that bias trials.
    fn active(&self) -> Vec<usize> {
        match self.selection {
            Selection::RoundRobin => (0..self.targets.len()).collect(),
            Selection::Fixed(k) => vec![k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub decoder: DecoderConfig,
    /// Code rate used to convert `E_b/N_0` to a noise variance.
    pub rate: f64,
    pub samples: usize,
    pub seed: u64,
}

/// One trial's channel output and its weight bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    /// Set the trial was biased toward.
    pub set: usize,
    /// Received values `y`.
    pub received: Vec<f64>,
    /// `ln p(y)/q(y)`.
    pub log_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsEstimate {
    pub ebn0_db: f64,
    pub sigma2: f64,
    pub samples: usize,
    pub ber: f64,
    pub fer: f64,
    /// Variance of the BER estimator (sample variance over `N_s`).
    pub ber_var: f64,
    pub fer_var: f64,
    /// 95% confidence half-width relative to the BER estimate.
    pub rel_halfwidth: f64,
    /// Failed trials, unweighted.
    pub raw_errors: usize,
    /// Failures per biasing set.
    pub attribution: Vec<usize>,
    /// Failures whose error support is exactly the biasing set.
    pub exact_support: usize,
    /// Effective sample size of the failure weights over the failure count.
    pub ess_ratio: f64,
    /// No failure was observed: the zero estimate is not a measurement.
    pub no_events: bool,
}

impl IsEstimate {
    pub fn ber_std(&self) -> f64 {
        self.ber_var.sqrt()
    }

    pub fn fer_std(&self) -> f64 {
        self.fer_var.sqrt()
    }

    /// The weights are too uneven for the sample variance to be trusted.
    pub fn variance_flag(&self) -> bool {
        self.no_events || self.ess_ratio < 0.01
    }
}

/// Campaign bound to one code, decoder and bias.
pub struct Campaign<'a> {
    h: &'a SparseParityCheck,
    graph: TannerGraph,
    bias: BiasSpec,
    config: CampaignConfig,
    active: Vec<usize>,
}

#[derive(Default, Clone, Copy)]
struct Outcome {
    set: usize,
    failed: bool,
    exact: bool,
    bit_errors: usize,
    log_weight: f64,
}

impl<'a> Campaign<'a> {
    pub fn new(h: &'a SparseParityCheck, bias: BiasSpec, config: CampaignConfig) -> Result<Self, SamplingError> {
        if config.samples == 0 {
            return Err(SamplingError::Budget);
        }
        if !(config.rate > 0.0 && config.rate <= 1.0) {
            return Err(SamplingError::Rate(config.rate));
        }
        config.decoder.validate()?;
        bias.validate(h.n_cols())?;
        let active = bias.active();
        Ok(Self {
            h,
            graph: TannerGraph::new(h),
            bias,
            config,
            active,
        })
    }

    pub fn bias(&self) -> &BiasSpec {
        &self.bias
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    /// Same campaign with a different shift.
    pub fn with_shift(&self, shift: f64) -> Result<Campaign<'a>, SamplingError> {
        Campaign::new(self.h, BiasSpec { shift, ..self.bias.clone() }, self.config.clone())
    }

    pub fn with_decoder(&self, decoder: DecoderConfig) -> Result<Campaign<'a>, SamplingError> {
        Campaign::new(self.h, self.bias.clone(), CampaignConfig { decoder, ..self.config.clone() })
    }

    /// Channel output of trial `index`; the noise stream depends only on
    /// `(seed, index)`.
    pub fn trial(&self, index: usize, sigma2: f64) -> Trial {
        let n = self.h.n_cols();
        let set = self.active[index % self.active.len()];
        let s = self.bias.shift;
        let sigma = sigma2.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index as u64);
        let mut received: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                1.0 + sigma * z
            })
            .collect();
        for &v in &self.bias.targets[set] {
            received[v] -= s;
        }
        let log_weight = self.log_weight(&received, sigma2);
        Trial {
            index,
            set,
            received,
            log_weight,
        }
    }

    /// `ln p(y)/q(y)` with `q` the equal mixture over the active sets.
    /// Only the target coordinates differ between the densities, so with
    /// `d = y − 1` set `j` contributes `−Σ_{k∈T_j} (2s·d_k + s²)/(2σ²)`
    /// to `ln q_j/p`.
    pub fn log_weight(&self, received: &[f64], sigma2: f64) -> f64 {
        let s = self.bias.shift;
        if s == 0.0 {
            return 0.0;
        }
        let log_ratio: Vec<f64> = self
            .active
            .iter()
            .map(|&j| {
                -self.bias.targets[j]
                    .iter()
                    .map(|&k| (2.0 * s * (received[k] - 1.0) + s * s) / (2.0 * sigma2))
                    .sum::<f64>()
            })
            .collect();
        let top = log_ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + log_ratio.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
        (self.active.len() as f64).ln() - lse
    }

    fn run_chunk(&self, start: usize, end: usize, sigma2: f64) -> Result<Vec<Outcome>, SamplingError> {
        let mut dec = Decoder::new(&self.graph, self.config.decoder)?;
        let mut out = Vec::with_capacity(end - start);
        for index in start..end {
            let trial = self.trial(index, sigma2);
            let llr: Vec<f64> = trial.received.iter().map(|y| 2.0 * y / sigma2).collect();
            let res = dec.decode(&llr)?;
            let errors = res.bit_errors();
            let target = &self.bias.targets[trial.set];
            let exact = errors == target.len()
                && errors > 0
                && target.iter().all(|&v| res.decoded[v] == 1);
            out.push(Outcome {
                set: trial.set,
                failed: errors > 0,
                exact,
                bit_errors: errors,
                log_weight: trial.log_weight,
            });
        }
        Ok(out)
    }

    /// Estimate at one `E_b/N_0`.
    pub fn run_point(&self, ebn0_db: f64) -> Result<IsEstimate, SamplingError> {
        let sigma2 = sigma2_from_ebn0_db(ebn0_db, self.config.rate);
        let total = self.config.samples;
        let chunks: Vec<(usize, usize)> = (0..total)
            .step_by(CHUNK)
            .map(|s| (s, (s + CHUNK).min(total)))
            .collect();
        let results: Result<Vec<Vec<Outcome>>, SamplingError> =
            chunks.par_iter().map(|&(s, e)| self.run_chunk(s, e, sigma2)).collect();
        let outcomes: Vec<Outcome> = results?.into_iter().flatten().collect();
        Ok(self.summarize(ebn0_db, sigma2, &outcomes))
    }

    fn summarize(&self, ebn0_db: f64, sigma2: f64, outcomes: &[Outcome]) -> IsEstimate {
        let n = self.h.n_cols() as f64;
        let ns = outcomes.len() as f64;
        let fail: Vec<&Outcome> = outcomes.iter().filter(|o| o.failed).collect();
        let w = |o: &Outcome| o.log_weight.exp();
        let ber_terms: Vec<f64> = fail.iter().map(|o| w(o) * o.bit_errors as f64 / n).collect();
        let fer_terms: Vec<f64> = fail.iter().map(|o| w(o)).collect();
        let moments = |terms: &[f64]| {
            let mean = compensated_sum(terms.iter().copied()) / ns;
            let second = compensated_sum(terms.iter().map(|x| x * x)) / ns;
            let var = if ns > 1.0 {
                ((second - mean * mean) * ns / (ns - 1.0)).max(0.0) / ns
            } else {
                0.0
            };
            (mean, var)
        };
        let (ber, ber_var) = moments(&ber_terms);
        let (fer, fer_var) = moments(&fer_terms);
        let mut attribution = vec![0; self.bias.targets.len()];
        for o in &fail {
            attribution[o.set] += 1;
        }
        let sw = compensated_sum(fer_terms.iter().copied());
        let sw2 = compensated_sum(fer_terms.iter().map(|x| x * x));
        let ess_ratio = if fail.is_empty() || sw2 == 0.0 {
            0.0
        } else {
            sw * sw / sw2 / fail.len() as f64
        };
        IsEstimate {
            ebn0_db,
            sigma2,
            samples: outcomes.len(),
            ber,
            fer,
            ber_var,
            fer_var,
            rel_halfwidth: if ber > 0.0 { 1.96 * ber_var.sqrt() / ber } else { f64::INFINITY },
            raw_errors: fail.len(),
            attribution,
            exact_support: fail.iter().filter(|o| o.exact).count(),
            ess_ratio,
            no_events: fail.is_empty(),
        }
    }

    pub fn run(&self, ebn0_db: &[f64]) -> Result<Vec<IsEstimate>, SamplingError> {
        ebn0_db.iter().map(|&db| self.run_point(db)).collect()
    }
}

/// Convenience wrapper over [`Campaign`].
pub fn run_campaign(
    h: &SparseParityCheck,
    config: CampaignConfig,
    ebn0_db: &[f64],
    bias: BiasSpec,
) -> Result<Vec<IsEstimate>, SamplingError> {
    Campaign::new(h, bias, config)?.run(ebn0_db)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub shift: f64,
    pub estimate: IsEstimate,
    /// Agrees with the previous shift within the combined 3σ.
    pub stable: bool,
}

/// Runs the campaign once per shift at one SNR.
pub fn overbias_scan(campaign: &Campaign<'_>, ebn0_db: f64, shifts: &[f64]) -> Result<Vec<ScanRow>, SamplingError> {
    if shifts.len() < 2 {
        return Err(SamplingError::ScanLength);
    }
    let mut rows: Vec<ScanRow> = Vec::with_capacity(shifts.len());
    for &shift in shifts {
        let estimate = campaign.with_shift(shift)?.run_point(ebn0_db)?;
        let stable = rows.last().is_none_or(|prev| {
            let gap = (estimate.ber - prev.estimate.ber).abs();
            gap <= 3.0 * (estimate.ber_var + prev.estimate.ber_var).sqrt()
        });
        rows.push(ScanRow { shift, estimate, stable });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantRow {
    pub clip: f64,
    /// `None` is floating point.
    pub bits: Option<u32>,
    pub estimate: IsEstimate,
}

/// Fixed-versus-float grid over clip thresholds and message widths; every
/// cell reuses the campaign seed.
pub fn quantization_sweep(
    campaign: &Campaign<'_>,
    clips: &[f64],
    bits: &[Option<u32>],
    ebn0_db: &[f64],
) -> Result<Vec<QuantRow>, SamplingError> {
    let mut rows = Vec::new();
    for &clip in clips {
        for &b in bits {
            let mut decoder = campaign.config().decoder;
            decoder.clip = clip;
            decoder.quantization = match b {
                Some(bits) => Quantization::Fixed { bits },
                None => Quantization::Float,
            };
            let c = campaign.with_decoder(decoder)?;
            for &db in ebn0_db {
                rows.push(QuantRow {
                    clip,
                    bits: b,
                    estimate: c.run_point(db)?,
                });
            }
        }
    }
    Ok(rows)
}
