use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputsError {
    #[error("need one gain per iteration plus g_0 ({expected}), got {got}")]
    GainLength { expected: usize, got: usize },
    #[error("g_0 must be 1, got {0}")]
    FirstGain(f64),
    #[error("gain g_{index} = {value} outside (0, 1]")]
    GainRange { index: usize, value: f64 },
    #[error("clip must be positive")]
    Clip,
}

/// Channel and extrinsic statistics driving the set failure formulas.
///
/// Means are saturated at `tau`; the variance of every Gaussian input is
/// twice its (saturated) mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorFloorInputs {
    pub m_lambda: f64,
    /// `m_ext[i − 1]` is the extrinsic mean injected at iteration `i`.
    pub m_ext: Vec<f64>,
    /// `g[l]` for `l = 0..=I`, `g[0] = 1`.
    pub g: Vec<f64>,
    pub tau: f64,
}

impl ErrorFloorInputs {
    pub fn new(m_lambda: f64, m_ext: Vec<f64>, g: Vec<f64>, tau: f64) -> Result<Self, InputsError> {
        if !(tau > 0.0) {
            return Err(InputsError::Clip);
        }
        if g.len() != m_ext.len() + 1 {
            return Err(InputsError::GainLength {
                expected: m_ext.len() + 1,
                got: g.len(),
            });
        }
        if g[0] != 1.0 {
            return Err(InputsError::FirstGain(g[0]));
        }
        if let Some((index, &value)) = g.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x <= 1.0)) {
            return Err(InputsError::GainRange { index, value });
        }
        Ok(Self {
            m_lambda: m_lambda.min(tau),
            m_ext: m_ext.into_iter().map(|m| m.min(tau)).collect(),
            g,
            tau,
        })
    }

    /// All gains equal to one.
    pub fn unit_gain(m_lambda: f64, m_ext: Vec<f64>, tau: f64) -> Result<Self, InputsError> {
        let g = vec![1.0; m_ext.len() + 1];
        Self::new(m_lambda, m_ext, g, tau)
    }

    pub fn iters(&self) -> usize {
        self.m_ext.len()
    }

    /// Same statistics with every gain set to one.
    pub fn without_gain(&self) -> Self {
        Self {
            g: vec![1.0; self.g.len()],
            ..self.clone()
        }
    }
}
