use super::{Coefficients, ErrorFloorInputs, SetLinearModel};
use crate::channel::{compensated_sum, q_function};
use serde::{Deserialize, Serialize};

fn spectral(coef: &Coefficients, mu: f64, inputs: &ErrorFloorInputs, gains: bool) -> f64 {
    let big_i = inputs.iters();
    let g = |l: usize| if gains { inputs.g[l] } else { 1.0 };
    // λ weight μ^{-i}/∏_{l=0}^{i} g_l; extrinsic weight μ^{-i}/∏_{l=1}^{i} g_l
    let mut prod = 1.0;
    let mut lam_w = Vec::with_capacity(big_i + 1);
    let mut ext_w = Vec::with_capacity(big_i + 1);
    for i in 0..=big_i {
        if i > 0 {
            prod *= g(i);
        }
        let w = mu.powi(-(i as i32)) / prod;
        lam_w.push(w / g(0));
        ext_w.push(w);
    }
    let s0 = compensated_sum(lam_w.iter().copied());
    let ext_mean = compensated_sum((1..=big_i).map(|i| inputs.m_ext[i - 1] * ext_w[i]));
    let ext_var = compensated_sum((1..=big_i).map(|i| inputs.m_ext[i - 1] * ext_w[i] * ext_w[i]));
    let m = inputs.m_lambda;
    let num = coef.a * m * s0 + coef.b * ext_mean;
    let var = 2.0 * coef.c * m * s0 * s0 + 2.0 * coef.d * ext_var;
    q_function(num / var.sqrt())
}

/// Spectral failure probability with unit check gains.
pub fn p_as_basic(coef: &Coefficients, mu_max: f64, inputs: &ErrorFloorInputs) -> f64 {
    spectral(coef, mu_max, inputs, false)
}

/// Spectral failure probability with every term divided by the cumulative
/// check gain.
pub fn p_as_refined(coef: &Coefficients, mu_max: f64, inputs: &ErrorFloorInputs) -> f64 {
    spectral(coef, mu_max, inputs, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDetail {
    pub probability: f64,
    /// Edge with the largest mean at iteration `I`.
    pub component: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub means: Vec<f64>,
}

/// Failure probability of the largest-mean message at iteration `I`.
///
/// The recursion `x_t = g_t·VC·x_{t−1} + λ + λ^ex_t` is unrolled with exact
/// matrix powers; each component is a linear combination of the independent
/// Gaussians `λ_u` and `λ^ex_{t,u}`, whose coefficients give its mean and
/// variance.
pub fn p_as_matrix(model: &SetLinearModel, inputs: &ErrorFloorInputs) -> MatrixDetail {
    let dim = model.dim;
    let a = model.a();
    let big_i = inputs.iters();
    // powers[s][u] = (VC)^s applied to the edge indicator of variable u
    let mut powers: Vec<Vec<Vec<f64>>> = Vec::with_capacity(big_i + 1);
    let base: Vec<Vec<f64>> = model
        .var_ranges()
        .iter()
        .map(|r| (0..dim).map(|e| f64::from(u8::from(r.contains(&e)))).collect())
        .collect();
    powers.push(base);
    for s in 1..=big_i {
        let next = powers[s - 1]
            .iter()
            .map(|col| {
                let mut out = vec![0.0; dim];
                model.apply_vc(col, &mut out);
                out
            })
            .collect();
        powers.push(next);
    }
    // w[t] = ∏_{l=t+1}^{I} g_l
    let mut w = vec![1.0; big_i + 1];
    for t in (0..big_i).rev() {
        w[t] = w[t + 1] * inputs.g[t + 1];
    }
    let k: Vec<f64> = model.external.iter().map(|&x| x as f64).collect();
    let m = inputs.m_lambda;
    let mut means = vec![0.0; dim];
    let mut vars = vec![0.0; dim];
    for j in 0..dim {
        let mut mean_terms = Vec::new();
        let mut var_terms = Vec::new();
        for u in 0..a {
            let alpha = compensated_sum((0..=big_i).map(|t| w[t] * powers[big_i - t][u][j]));
            mean_terms.push(m * alpha);
            var_terms.push(2.0 * m * alpha * alpha);
            if k[u] > 0.0 {
                for t in 1..=big_i {
                    let beta = w[t] * powers[big_i - t][u][j];
                    let me = inputs.m_ext[t - 1];
                    mean_terms.push(k[u] * me * beta);
                    var_terms.push(2.0 * k[u] * me * beta * beta);
                }
            }
        }
        means[j] = compensated_sum(mean_terms);
        vars[j] = compensated_sum(var_terms);
    }
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let component = means
        .iter()
        .position(|&x| x >= top - 1e-12 * top.abs())
        .unwrap_or(0);
    let std_dev = vars[component].sqrt();
    MatrixDetail {
        probability: q_function(means[component] / std_dev),
        component,
        mean: means[component],
        std_dev,
        means,
    }
}

/// Union-style floor estimate `Σ multiplicity·a·P/n`, clamped to `[0, 1]`.
pub fn ber_estimate(terms: &[(usize, usize, f64)], n: usize) -> f64 {
    let total = compensated_sum(terms.iter().map(|&(mult, a, p)| mult as f64 * a as f64 * p / n as f64));
    total.clamp(0.0, 1.0)
}
