use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    FlatRayleigh,
    ToeplitzZp,
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelModel::FlatRayleigh => "flat-rayleigh",
            ChannelModel::ToeplitzZp => "toeplitz-zp",
        })
    }
}

/// `L x K` complex channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannel {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    model: ChannelModel,
}

impl ComplexChannel {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>, model: ChannelModel) -> Self {
        assert_eq!(entries.len(), rows * cols, "channel entry count");
        Self {
            rows,
            cols,
            entries,
            model,
        }
    }

    /// Receive dimension `L`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Transmit dimension `K`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn matvec(&self, s: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(s.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * s[j]).sum())
            .collect()
    }
}

fn complex_gaussian(rng: &mut Rng) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * rng.standard_normal(), s * rng.standard_normal())
}

/// I.i.d. `CN(0, 1)` entries.
pub fn sample_flat_rayleigh(rows: usize, cols: usize, rng: &mut Rng) -> ComplexChannel {
    let entries = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexChannel::new(rows, cols, entries, ChannelModel::FlatRayleigh)
}

/// `L_c` i.i.d. `CN(0, 1)` taps of a frequency-selective channel.
pub fn sample_rayleigh_taps(taps: usize, rng: &mut Rng) -> Vec<Complex64> {
    (0..taps).map(|_| complex_gaussian(rng)).collect()
}

/// Banded Toeplitz matrix of a zero-padded block: `(K + L_c − 1) x K`,
/// column `j` is the tap vector shifted down by `j`.
pub fn toeplitz_from_taps(taps: &[Complex64], k: usize) -> ComplexChannel {
    assert!(!taps.is_empty() && k > 0);
    let rows = k + taps.len() - 1;
    let mut entries = vec![Complex64::new(0.0, 0.0); rows * k];
    for j in 0..k {
        for (l, &h) in taps.iter().enumerate() {
            entries[(j + l) * k + j] = h;
        }
    }
    ComplexChannel::new(rows, k, entries, ChannelModel::ToeplitzZp)
}
