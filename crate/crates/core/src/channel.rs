//! BPSK over AWGN: `y = 1 − 2c + n`, `n ~ N(0, σ²)`, channel LLR `2y/σ²`.
//! For the all-zero word the LLR has mean `2/σ²` and variance `4/σ²`.

use libm::erfc;

/// Noise variance for a given `E_b/N_0` in dB and code rate.
pub fn sigma2_from_ebn0_db(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

/// Mean of the channel LLR of a transmitted `+1`.
pub fn llr_mean(sigma2: f64) -> f64 {
    2.0 / sigma2
}

/// Gaussian tail `Q(x) = erfc(x/√2)/2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Evenly spaced grid `start, start + step, …` up to `stop` inclusive
/// (with a small tolerance for accumulated rounding).
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Parses `a:b:step` or a single value.
pub fn parse_grid(spec: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [x] => Some(vec![x.trim().parse().ok()?]),
        [a, b, s] => Some(grid(a.trim().parse().ok()?, b.trim().parse().ok()?, s.trim().parse().ok()?)),
        _ => None,
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-14);
        assert!((q_function(5.0) - 2.866_515_718_791_939e-7).abs() < 1e-20);
        assert!((q_function(-1.0) - (1.0 - q_function(1.0))).abs() < 1e-15);
    }

    #[test]
    fn sigma_from_snr() {
        // rate 1/2 at 0 dB: σ² = 1
        assert!((sigma2_from_ebn0_db(0.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((llr_mean(0.5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        assert_eq!(grid(2.0, 6.0, 1.0), vec![2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert_eq!(parse_grid("2:3:0.5").unwrap(), vec![2.0, 2.5, 3.0]);
        assert!(parse_grid("1:2").is_none());
    }

    #[test]
    fn compensation_keeps_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
