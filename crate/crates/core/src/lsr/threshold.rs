use crate::error::{Error, Result};
use crate::model::{Constellation, ModulationKind};
use crate::numerics::gaussian_q;

/// Symbol error probability of a scalar AWGN link with normalized gain `x`
/// at per-symbol SNR `rho`. Square QAM uses `2βQ − β²Q²`; PAM (BPSK
/// included) uses `2βQ`, which for BPSK is `Q(√(2ρx))`.
pub fn conditional_qam_ser(x: f64, rho: f64, constellation: &Constellation) -> f64 {
    let (alpha, beta) = constellation.error_constants();
    let arg = alpha * rho * x;
    let q = if arg.is_nan() {
        0.0
    } else {
        gaussian_q(arg.sqrt())
    };
    match constellation.kind() {
        ModulationKind::Qam => 2.0 * beta * q - beta * beta * q * q,
        ModulationKind::Pam => 2.0 * beta * q,
    }
}

/// Empirical distribution of a nonnegative sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|v| !v.is_nan());
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.sorted.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    /// `F(x) = #{v ≤ x} / n`
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `v` with `F(v) ≥ p`, for `0 < p ≤ 1`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }
}

/// `η/ρ = F⁻¹(M/(M−1) · (ser_ld − ser_ml))` with the argument clamped to
/// `[0, 1]`: zero gives 0 and one gives `+∞`.
pub fn threshold_suboptimal(cdf: &EmpiricalCdf, ser_ld: f64, ser_ml: f64, order: usize) -> f64 {
    let m = order as f64;
    let arg = m / (m - 1.0) * (ser_ld - ser_ml).max(0.0);
    if arg <= 0.0 || cdf.is_empty() {
        0.0
    } else if arg >= 1.0 {
        f64::INFINITY
    } else {
        cdf.quantile(arg)
    }
}

/// `η = scale · (2/α) · ln(β / ser_ml)`.
pub fn threshold_high_snr(constellation: &Constellation, ser_ml: f64, scale: f64) -> Result<f64> {
    let (alpha, beta) = constellation.error_constants();
    if !(ser_ml > 0.0 && ser_ml < beta) {
        return Err(Error::InvalidSer { ser: ser_ml, beta });
    }
    Ok(scale * 2.0 / alpha * (beta / ser_ml).ln())
}
