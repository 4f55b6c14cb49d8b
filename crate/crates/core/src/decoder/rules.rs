/// Largest product magnitude passed to `atanh` in the tanh rule.
pub const PRODUCT_CLAMP: f64 = 1.0 - 1e-12;

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Tanh-rule check update: `out[j] = 2 atanh(∏_{l≠j} tanh(in[l]/2))`, clipped
/// to `[-clip, clip]`.
///
/// Extrinsic products are formed from prefix and suffix products so a zero
/// input is handled exactly.
pub fn check_update_tanh(incoming: &[f64], clip: f64, out: &mut [f64]) {
    let d = incoming.len();
    debug_assert_eq!(out.len(), d);
    // out doubles as the prefix-product buffer
    let mut acc = 1.0;
    for j in 0..d {
        out[j] = acc;
        acc *= (incoming[j] / 2.0).tanh();
    }
    let mut suffix = 1.0;
    for j in (0..d).rev() {
        let p = (out[j] * suffix).clamp(-PRODUCT_CLAMP, PRODUCT_CLAMP);
        suffix *= (incoming[j] / 2.0).tanh();
        out[j] = (2.0 * p.atanh()).clamp(-clip, clip);
    }
}

/// Corrected min-sum check update.
///
/// The magnitude toward edge `j` is the minimum incoming magnitude over the
/// other edges, reduced by `ln(d_c − 1)/4` when that minimum is at least
/// `3 ln(d_c − 1)/8`.
pub fn check_update_cms(incoming: &[f64], clip: f64, out: &mut [f64]) {
    let d = incoming.len();
    debug_assert_eq!(out.len(), d);
    if d == 0 {
        return;
    }
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, 0);
    let mut parity = 1.0;
    for (j, &x) in incoming.iter().enumerate() {
        let m = x.abs();
        if m < min1 {
            min2 = min1;
            min1 = m;
            arg = j;
        } else if m < min2 {
            min2 = m;
        }
        parity *= sign(x);
    }
    let ln = ((d as f64) - 1.0).max(1.0).ln();
    let (ct, threshold) = (ln / 4.0, 3.0 * ln / 8.0);
    for (j, o) in out.iter_mut().enumerate() {
        let m = if j == arg { min2 } else { min1 };
        let mag = if m >= threshold { m - ct } else { m };
        debug_assert!(mag >= 0.0);
        *o = (mag * parity * sign(incoming[j])).clamp(-clip, clip);
    }
}

/// Variable update: `out[j] = clip(λ + Σ_{l≠j} in[l])`; returns the clipped
/// accumulated LLR `clip(λ + Σ_l in[l])`.
pub fn variable_update(intrinsic: f64, incoming: &[f64], clip: f64, out: &mut [f64]) -> f64 {
    let total = intrinsic + incoming.iter().sum::<f64>();
    for (o, &x) in out.iter_mut().zip(incoming) {
        *o = (total - x).clamp(-clip, clip);
    }
    total.clamp(-clip, clip)
}

/// Variable update returning the unclipped accumulated sum.
pub(crate) fn variable_update_raw(intrinsic: f64, incoming: &[f64], clip: f64, out: &mut [f64]) -> f64 {
    let total = intrinsic + incoming.iter().sum::<f64>();
    for (o, &x) in out.iter_mut().zip(incoming) {
        *o = (total - x).clamp(-clip, clip);
    }
    total
}

/// Symmetric uniform quantizer with `2^b − 1` levels `kΔ`, `Δ = clip/(2^{b−1}−1)`,
/// rounding half away from zero.
pub fn quantize(llr: f64, bits: u32, clip: f64) -> f64 {
    let kmax = ((1u64 << (bits - 1)) - 1) as f64;
    let delta = clip / kmax;
    let k = (llr / delta).round().clamp(-kmax, kmax);
    k * delta
}
