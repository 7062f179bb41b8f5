use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    Pam,
    Qam,
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulationKind::Pam => "pam",
            ModulationKind::Qam => "qam",
        })
    }
}

/// Modulation as named in configuration and table files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    #[serde(rename = "M")]
    pub order: usize,
}

impl ModulationSpec {
    pub fn new(kind: ModulationKind, order: usize) -> Self {
        Self { kind, order }
    }

    pub fn build(&self) -> Result<Constellation> {
        make_constellation(self.kind, self.order)
    }
}

/// Unit-average-energy PAM or square QAM alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ModulationKind,
    order: usize,
    points: Vec<Complex64>,
    /// Real per-axis alphabet, ascending. For PAM this is the alphabet itself.
    pam_levels: Vec<f64>,
}

fn odd_levels(n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|i| (2.0 * i as f64 - (n as f64 - 1.0)) * scale)
        .collect()
}

/// Builds an M-PAM (M a power of two) or square M-QAM (M = 4, 16, 64, ...)
/// alphabet normalized to unit average energy.
pub fn make_constellation(kind: ModulationKind, order: usize) -> Result<Constellation> {
    let invalid = || Error::InvalidOrder {
        kind: if kind == ModulationKind::Pam {
            "PAM"
        } else {
            "QAM"
        },
        order,
    };
    match kind {
        ModulationKind::Pam => {
            if order < 2 || !order.is_power_of_two() {
                return Err(invalid());
            }
            let m = order as f64;
            let levels = odd_levels(order, (3.0 / (m * m - 1.0)).sqrt());
            let points = levels.iter().map(|&l| Complex64::new(l, 0.0)).collect();
            Ok(Constellation {
                kind,
                order,
                points,
                pam_levels: levels,
            })
        }
        ModulationKind::Qam => {
            // square of a power of two: 4^j
            if order < 4 || !order.is_power_of_two() || order.trailing_zeros() % 2 != 0 {
                return Err(invalid());
            }
            let side = 1usize << (order.trailing_zeros() / 2);
            let levels = odd_levels(side, (3.0 / (2.0 * (order as f64 - 1.0))).sqrt());
            let mut points = Vec::with_capacity(order);
            for &re in &levels {
                for &im in &levels {
                    points.push(Complex64::new(re, im));
                }
            }
            Ok(Constellation {
                kind,
                order,
                points,
                pam_levels: levels,
            })
        }
    }
}

impl Constellation {
    pub fn kind(&self) -> ModulationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn pam_levels(&self) -> &[f64] {
        &self.pam_levels
    }

    /// Mean `|point|²`; 1 up to rounding.
    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Mean squared value of one real coordinate (1 for PAM, 1/2 for QAM).
    pub fn axis_energy(&self) -> f64 {
        self.pam_levels.iter().map(|l| l * l).sum::<f64>() / self.pam_levels.len() as f64
    }

    /// `(α, β)` such that the symbol error probability of a scalar AWGN
    /// channel at SNR `γ` is `2βQ(√(αγ)) − β²Q²(√(αγ))` for square QAM and
    /// `2βQ(√(αγ))` for PAM.
    pub fn error_constants(&self) -> (f64, f64) {
        let m = self.order as f64;
        match self.kind {
            ModulationKind::Qam => (3.0 / (m - 1.0), 2.0 * (1.0 - 1.0 / m.sqrt())),
            ModulationKind::Pam => (6.0 / (m * m - 1.0), 1.0 - 1.0 / m),
        }
    }

    pub fn spec(&self) -> ModulationSpec {
        ModulationSpec::new(self.kind, self.order)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.order, self.kind.to_string().to_uppercase())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_levels() {
        let c = make_constellation(ModulationKind::Pam, 2).unwrap();
        assert_eq!(c.pam_levels(), &[-1.0, 1.0]);
    }

    #[test]
    fn qpsk_axis() {
        let c = make_constellation(ModulationKind::Qam, 4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.pam_levels()[0] + h).abs() < 1e-15 && (c.pam_levels()[1] - h).abs() < 1e-15);
        assert_eq!(c.points().len(), 4);
    }

    #[test]
    fn unit_energy_for_all_supported_orders() {
        for m in [2, 4, 8, 16, 32] {
            let c = make_constellation(ModulationKind::Pam, m).unwrap();
            assert!((c.average_energy() - 1.0).abs() < 1e-12, "PAM {m}");
        }
        for m in [4, 16, 64, 256] {
            let c = make_constellation(ModulationKind::Qam, m).unwrap();
            // direct summation over the grid
            let direct: f64 = c
                .points()
                .iter()
                .map(|p| p.re * p.re + p.im * p.im)
                .sum::<f64>()
                / m as f64;
            assert!((direct - 1.0).abs() < 1e-12, "QAM {m}");
            assert!((c.axis_energy() - 0.5).abs() < 1e-12);
            let mut distinct = c.points().to_vec();
            distinct.dedup();
            assert_eq!(distinct.len(), m);
        }
    }

    #[test]
    fn invalid_orders() {
        for m in [0, 1, 3, 6] {
            assert!(make_constellation(ModulationKind::Pam, m).is_err());
        }
        for m in [2, 8, 32, 12] {
            assert!(make_constellation(ModulationKind::Qam, m).is_err());
        }
    }
}
