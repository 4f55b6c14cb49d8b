//! Flooding message-passing decoders with LLR clipping and optional
//! fixed-point message quantization.
//!
//! Conventions: positive LLR favors bit 0; `sign(0) = +1`; a zero accumulated
//! LLR decides bit 0.

mod rules;

pub use rules::{check_update_cms, check_update_tanh, quantize, variable_update, PRODUCT_CLAMP};
use rules::variable_update_raw;

use crate::code::{SparseParityCheck, TannerGraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DecoderError {
    #[error("invalid decoder config: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} channel LLRs, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("traced variable {0} is not a column of the code")]
    BadTraceVariable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Tanh rule.
    #[serde(alias = "sum-product")]
    Sp,
    /// Min-sum with the degree-dependent correction term.
    #[serde(alias = "corrected-min-sum")]
    Cms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Quantization {
    #[default]
    Float,
    Fixed {
        bits: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub algorithm: Algorithm,
    pub max_iters: usize,
    pub clip: f64,
    #[serde(default)]
    pub quantization: Quantization,
    #[serde(default = "default_true")]
    pub early_stop: bool,
    /// Clip the accumulated (a-posteriori) LLR as well as outgoing messages.
    #[serde(default = "default_true")]
    pub clip_accumulated: bool,
}

fn default_true() -> bool {
    true
}

impl DecoderConfig {
    pub fn new(algorithm: Algorithm, max_iters: usize, clip: f64) -> Self {
        Self {
            algorithm,
            max_iters,
            clip,
            quantization: Quantization::Float,
            early_stop: true,
            clip_accumulated: true,
        }
    }

    pub fn with_bits(mut self, bits: u32) -> Self {
        self.quantization = Quantization::Fixed { bits };
        self
    }

    pub fn validate(&self) -> Result<(), DecoderError> {
        if !(self.clip > 0.0) {
            return Err(DecoderError::InvalidConfig(format!(
                "clip must be positive, got {}",
                self.clip
            )));
        }
        if self.max_iters == 0 {
            return Err(DecoderError::InvalidConfig("max_iters must be at least 1".into()));
        }
        if let Quantization::Fixed { bits } = self.quantization {
            if !(2..=53).contains(&bits) {
                return Err(DecoderError::InvalidConfig(format!(
                    "fixed-point width must be in 2..=53, got {bits}"
                )));
            }
        }
        Ok(())
    }

    fn bits(&self) -> Option<u32> {
        match self.quantization {
            Quantization::Float => None,
            Quantization::Fixed { bits } => Some(bits),
        }
    }
}

/// Accumulated LLRs of selected variables, one row per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub vars: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    /// `(iteration, variable, llr)` triples, iterations counted from 1.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(it, row)| {
            self.vars.iter().zip(row).map(move |(&v, &x)| (it + 1, v, x))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub decoded: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl DecodeOutcome {
    pub fn bit_errors(&self) -> usize {
        self.decoded.iter().filter(|&&b| b != 0).count()
    }
}

/// Message state after the variable step of an iteration.
pub struct IterationState<'a> {
    pub iteration: usize,
    /// Check-to-variable messages, indexed by Tanner edge id.
    pub c2v: &'a [f64],
    /// Variable-to-check messages, indexed by Tanner edge id.
    pub v2c: &'a [f64],
    pub accumulated: &'a [f64],
}

/// Reusable decoder bound to one Tanner graph; holds its own message buffers.
pub struct Decoder<'g> {
    graph: &'g TannerGraph,
    config: DecoderConfig,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    intrinsic: Vec<f64>,
    accumulated: Vec<f64>,
    hard: Vec<u8>,
    scratch_in: Vec<f64>,
    scratch_out: Vec<f64>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g TannerGraph, config: DecoderConfig) -> Result<Self, DecoderError> {
        config.validate()?;
        let e = graph.n_edges();
        let n = graph.n_vars();
        Ok(Self {
            graph,
            config,
            c2v: vec![0.0; e],
            v2c: vec![0.0; e],
            intrinsic: vec![0.0; n],
            accumulated: vec![0.0; n],
            hard: vec![0; n],
            scratch_in: Vec::new(),
            scratch_out: Vec::new(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeOutcome, DecoderError> {
        self.decode_observed(llr, &[], |_| {})
    }

    pub fn decode_traced(&mut self, llr: &[f64], trace_vars: &[usize]) -> Result<DecodeOutcome, DecoderError> {
        self.decode_observed(llr, trace_vars, |_| {})
    }

    /// Decodes, calling `observe` after every iteration's variable step.
    pub fn decode_observed<F>(
        &mut self,
        llr: &[f64],
        trace_vars: &[usize],
        mut observe: F,
    ) -> Result<DecodeOutcome, DecoderError>
    where
        F: FnMut(&IterationState<'_>),
    {
        let n = self.graph.n_vars();
        if llr.len() != n {
            return Err(DecoderError::LengthMismatch {
                expected: n,
                got: llr.len(),
            });
        }
        if let Some(&v) = trace_vars.iter().find(|&&v| v >= n) {
            return Err(DecoderError::BadTraceVariable(v));
        }
        let tau = self.config.clip;
        let bits = self.config.bits();
        let q = |x: f64| match bits {
            Some(b) => quantize(x, b, tau),
            None => x.clamp(-tau, tau),
        };
        for (dst, &x) in self.intrinsic.iter_mut().zip(llr) {
            *dst = q(x);
        }
        for v in 0..n {
            let lam = self.intrinsic[v];
            for &e in self.graph.var_edges(v) {
                self.v2c[e] = lam;
            }
        }

        let mut trace = (!trace_vars.is_empty()).then(|| Trace {
            vars: trace_vars.to_vec(),
            rows: Vec::new(),
        });
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=self.config.max_iters {
            iterations = it;
            self.check_step(bits);
            self.variable_step(bits);
            if let Some(t) = trace.as_mut() {
                t.rows.push(trace_vars.iter().map(|&v| self.accumulated[v]).collect());
            }
            observe(&IterationState {
                iteration: it,
                c2v: &self.c2v,
                v2c: &self.v2c,
                accumulated: &self.accumulated,
            });
            converged = self.syndrome_is_zero();
            if converged && self.config.early_stop {
                break;
            }
        }
        Ok(DecodeOutcome {
            decoded: self.hard.clone(),
            converged,
            iterations,
            trace,
        })
    }

    fn check_step(&mut self, bits: Option<u32>) {
        let tau = self.config.clip;
        for c in 0..self.graph.n_checks() {
            let range = self.graph.check_range(c);
            let incoming = &self.v2c[range.clone()];
            let out = &mut self.c2v[range];
            match self.config.algorithm {
                Algorithm::Sp => check_update_tanh(incoming, tau, out),
                Algorithm::Cms => check_update_cms(incoming, tau, out),
            }
            if let Some(b) = bits {
                for x in out.iter_mut() {
                    *x = quantize(*x, b, tau);
                }
            }
        }
    }

    fn variable_step(&mut self, bits: Option<u32>) {
        let tau = self.config.clip;
        for v in 0..self.graph.n_vars() {
            let edges = self.graph.var_edges(v);
            self.scratch_in.clear();
            self.scratch_in.extend(edges.iter().map(|&e| self.c2v[e]));
            self.scratch_out.resize(edges.len(), 0.0);
            let total = variable_update_raw(self.intrinsic[v], &self.scratch_in, tau, &mut self.scratch_out);
            let acc = if self.config.clip_accumulated {
                total.clamp(-tau, tau)
            } else {
                total
            };
            self.accumulated[v] = acc;
            self.hard[v] = u8::from(acc < 0.0);
            for (&e, &m) in edges.iter().zip(&self.scratch_out) {
                self.v2c[e] = match bits {
                    Some(b) => quantize(m, b, tau),
                    None => m,
                };
            }
        }
    }

    fn syndrome_is_zero(&self) -> bool {
        let vars = self.graph.edge_vars();
        (0..self.graph.n_checks()).all(|c| {
            self.graph
                .check_range(c)
                .fold(0u8, |acc, e| acc ^ self.hard[vars[e]])
                == 0
        })
    }
}

/// One-shot decode; builds the Tanner graph on each call.
pub fn decode(h: &SparseParityCheck, llr: &[f64], config: &DecoderConfig) -> Result<DecodeOutcome, DecoderError> {
    let graph = TannerGraph::new(h);
    Decoder::new(&graph, *config)?.decode(llr)
}

#[cfg(test)]
mod tests;
