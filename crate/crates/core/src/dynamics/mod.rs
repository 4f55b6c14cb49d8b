//! Linearized message dynamics inside an absorption set.
//!
//! Edge messages leaving the set variables toward satisfied checks evolve as
//! `x_t = g_t·VC·x_{t−1} + λ + λ^ex_t` with `x_0 = λ`: `C` reflects each
//! message through its degree-two check and `V` adds the other incoming
//! messages at each variable. Unsatisfied checks inject the extrinsic terms
//! `λ^ex_t`. The set fails when the messages end up negative.

mod formulas;
mod inputs;

pub use formulas::{ber_estimate, p_as_basic, p_as_matrix, p_as_refined, MatrixDetail};
pub use inputs::{ErrorFloorInputs, InputsError};

use crate::absorption::Topology;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("the set has no internal edges")]
    Empty,
    #[error("VC is nilpotent; the set has no internal cycle")]
    Nilpotent,
    #[error("power iteration did not converge after {iterations} steps (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },
}

/// The `V` and `C` structure of a set, stored implicitly through the edge
/// labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct SetLinearModel {
    pub dim: usize,
    pub edge_var: Vec<usize>,
    pub partner: Vec<usize>,
    /// Unsatisfied checks per variable; the extrinsic injection of a
    /// variable sums this many check messages.
    pub external: Vec<usize>,
    var_ranges: Vec<std::ops::Range<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub mu_max: f64,
    pub v_max: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SetLinearModel {
    pub fn build(topo: &Topology) -> Result<Self, DynamicsError> {
        if topo.dim() == 0 {
            return Err(DynamicsError::Empty);
        }
        Ok(Self {
            dim: topo.dim(),
            edge_var: topo.edge_var.clone(),
            partner: topo.partner.clone(),
            external: topo.external.clone(),
            var_ranges: topo.var_ranges(),
        })
    }

    pub fn a(&self) -> usize {
        self.external.len()
    }

    pub fn var_ranges(&self) -> &[std::ops::Range<usize>] {
        &self.var_ranges
    }

    /// `out = V·C·x`.
    pub fn apply_vc(&self, x: &[f64], out: &mut [f64]) {
        for r in &self.var_ranges {
            let total: f64 = r.clone().map(|f| x[self.partner[f]]).sum();
            for e in r.clone() {
                out[e] = total - x[self.partner[e]];
            }
        }
    }

    /// Dense `V`: per-variable all-ones blocks minus the identity.
    pub fn v_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0; self.dim]; self.dim];
        for r in &self.var_ranges {
            for e in r.clone() {
                for f in r.clone() {
                    m[e][f] = u8::from(e != f);
                }
            }
        }
        m
    }

    /// Dense `C`: the permutation pairing edges through satisfied checks.
    pub fn c_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0; self.dim]; self.dim];
        for (e, &p) in self.partner.iter().enumerate() {
            m[e][p] = 1;
        }
        m
    }

    /// Per-edge injection weight of the channel value of its variable (all
    /// ones) and of its extrinsic term (the variable's unsatisfied-check
    /// count).
    pub fn ext_weights(&self) -> Vec<f64> {
        self.edge_var.iter().map(|&u| self.external[u] as f64).collect()
    }

    /// Edges whose variable touches an unsatisfied check.
    pub fn ext_mask(&self) -> Vec<bool> {
        self.edge_var.iter().map(|&u| self.external[u] > 0).collect()
    }
}

/// Power iteration from the normalized all-ones vector; stops when two
/// successive Rayleigh quotients differ by less than `1e−12` and the
/// residual `‖Ax − ρx‖` is below `1e−9·max(1, |ρ|)`.
pub fn power_iteration<F>(dim: usize, apply: F, max_iters: usize) -> Result<Eigenpair, DynamicsError>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(DynamicsError::Empty);
    }
    let mut x = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut y = vec![0.0; dim];
    let mut prev = f64::NAN;
    for it in 1..=max_iters {
        apply(&x, &mut y);
        let rho: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DynamicsError::Nilpotent);
        }
        let resid = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - rho * a).powi(2))
            .sum::<f64>()
            .sqrt();
        let converged = (rho - prev).abs() < 1e-12 && resid <= 1e-9 * rho.abs().max(1.0);
        prev = rho;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if converged {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            apply(&x, &mut y);
            let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let residual = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (b - mu * a).powi(2))
                .sum::<f64>()
                .sqrt();
            return Ok(Eigenpair {
                mu_max: mu,
                v_max: x,
                iterations: it,
                residual,
            });
        }
    }
    Err(DynamicsError::NoConvergence {
        iterations: max_iters,
        estimate: prev,
    })
}

/// Dominant eigenpair of `V·C`.
pub fn dominant_eigen(model: &SetLinearModel) -> Result<Eigenpair, DynamicsError> {
    power_iteration(model.dim, |x, y| model.apply_vc(x, y), 100_000)
}

/// `A = Σ v`, `B = Σ_e k(e)·v_e`, `C = Σ_u s_u²`, `D = Σ_u k_u·s_u²`, where
/// `s_u` sums `v` over the edges of variable `u` and `k` counts unsatisfied
/// checks.
pub fn topology_coefficients(model: &SetLinearModel, v: &[f64]) -> Coefficients {
    let k = model.ext_weights();
    let a = v.iter().sum();
    let b = v.iter().zip(&k).map(|(x, w)| x * w).sum();
    let (mut c, mut d) = (0.0, 0.0);
    for (u, r) in model.var_ranges.iter().enumerate() {
        let s: f64 = v[r.clone()].iter().sum();
        c += s * s;
        d += model.external[u] as f64 * s * s;
    }
    Coefficients { a, b, c, d }
}

/// Everything the formulas need about one set.
#[derive(Debug, Clone)]
pub struct AnalyzedSet {
    pub model: SetLinearModel,
    pub eigen: Eigenpair,
    pub coefficients: Coefficients,
}

impl AnalyzedSet {
    pub fn new(topo: &Topology) -> Result<Self, DynamicsError> {
        let model = SetLinearModel::build(topo)?;
        let eigen = dominant_eigen(&model)?;
        let coefficients = topology_coefficients(&model, &eigen.v_max);
        Ok(Self {
            model,
            eigen,
            coefficients,
        })
    }

    pub fn p_basic(&self, inputs: &ErrorFloorInputs) -> f64 {
        p_as_basic(&self.coefficients, self.eigen.mu_max, inputs)
    }

    pub fn p_refined(&self, inputs: &ErrorFloorInputs) -> f64 {
        p_as_refined(&self.coefficients, self.eigen.mu_max, inputs)
    }

    pub fn p_matrix(&self, inputs: &ErrorFloorInputs) -> f64 {
        p_as_matrix(&self.model, inputs).probability
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Basic,
    Refined,
    Matrix,
}

impl Formula {
    pub const ALL: [Formula; 3] = [Formula::Basic, Formula::Refined, Formula::Matrix];

    pub fn name(self) -> &'static str {
        match self {
            Formula::Basic => "basic",
            Formula::Refined => "refined",
            Formula::Matrix => "matrix",
        }
    }

    pub fn eval(self, set: &AnalyzedSet, inputs: &ErrorFloorInputs) -> f64 {
        match self {
            Formula::Basic => set.p_basic(inputs),
            Formula::Refined => set.p_refined(inputs),
            Formula::Matrix => set.p_matrix(inputs),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Formula::Basic),
            "refined" => Ok(Formula::Refined),
            "matrix" => Ok(Formula::Matrix),
            other => Err(format!("unknown formula {other:?} (basic, refined, matrix)")),
        }
    }
}

#[cfg(test)]
mod tests;
