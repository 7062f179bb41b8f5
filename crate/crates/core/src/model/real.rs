use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::channel::{ChannelModel, ComplexChannel};
use super::constellation::{Constellation, ModulationKind};
use crate::error::{Error, Result};
use crate::numerics::{norm_sq, RealMatrix, Rng};

/// Maps source symbols to real coordinates.
///
/// A QAM symbol `k` of a `K`-symbol block owns coordinates `k` (real part)
/// and `K + k` (imaginary part); a PAM symbol owns coordinate `k` only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLayout {
    symbols: usize,
    paired: bool,
}

impl SymbolLayout {
    pub fn new(symbols: usize, paired: bool) -> Self {
        Self { symbols, paired }
    }

    pub fn for_modulation(kind: ModulationKind, symbols: usize) -> Self {
        Self::new(symbols, kind == ModulationKind::Qam)
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn is_paired(&self) -> bool {
        self.paired
    }

    /// Real dimension `m`.
    pub fn real_dim(&self) -> usize {
        if self.paired {
            2 * self.symbols
        } else {
            self.symbols
        }
    }

    /// Real coordinates of symbol `k`.
    pub fn coords(&self, k: usize) -> impl Iterator<Item = usize> {
        let (symbols, per) = (self.symbols, if self.paired { 2 } else { 1 });
        (0..per).map(move |j| k + j * symbols)
    }

    pub fn symbol_of(&self, coord: usize) -> usize {
        coord % self.symbols
    }

    /// Number of source symbols on which `a` and `b` differ.
    pub fn symbol_errors(&self, a: &[f64], b: &[f64]) -> usize {
        (0..self.symbols)
            .filter(|&k| self.coords(k).any(|c| a[c] != b[c]))
            .count()
    }
}

/// Real-valued channel plus the alphabet its columns are searched over.
#[derive(Debug, Clone)]
pub struct RealChannel {
    pub h: RealMatrix,
    pub constellation: Arc<Constellation>,
    pub layout: SymbolLayout,
    pub model: ChannelModel,
}

impl RealChannel {
    pub fn axis(&self) -> &[f64] {
        self.constellation.pam_levels()
    }

    /// Uniform symbol vector over the alphabet, in real coordinates.
    pub fn draw_symbols(&self, rng: &mut Rng) -> Vec<f64> {
        let axis = self.axis();
        (0..self.layout.real_dim())
            .map(|_| axis[rng.index(axis.len())])
            .collect()
    }
}

/// Standard real decomposition of a complex channel.
///
/// QAM: `[[Re H, −Im H], [Im H, Re H]]`; PAM: `[[Re H], [Im H]]`.
pub fn realify(channel: &ComplexChannel, constellation: &Constellation) -> RealChannel {
    let (l, k) = (channel.rows(), channel.cols());
    let paired = constellation.kind() == ModulationKind::Qam;
    let cols = if paired { 2 * k } else { k };
    let mut h = RealMatrix::zeros(2 * l, cols);
    for i in 0..l {
        for j in 0..k {
            let z = channel.get(i, j);
            h[(i, j)] = z.re;
            h[(l + i, j)] = z.im;
            if paired {
                h[(i, k + j)] = -z.im;
                h[(l + i, k + j)] = z.re;
            }
        }
    }
    RealChannel {
        h,
        constellation: Arc::new(constellation.clone()),
        layout: SymbolLayout::new(k, paired),
        model: channel.model(),
    }
}

/// One received observation `y = H s + n` in real form.
#[derive(Debug, Clone)]
pub struct RealModel {
    pub y: Vec<f64>,
    pub h: RealMatrix,
    /// SNR per symbol, `1/σ²`; may be `+∞`.
    pub rho: f64,
    pub constellation: Arc<Constellation>,
    pub layout: SymbolLayout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitRecord {
    pub s_true: Vec<f64>,
    pub noise_norm_sq: f64,
}

impl RealModel {
    pub fn new(
        y: Vec<f64>,
        h: RealMatrix,
        rho: f64,
        constellation: Arc<Constellation>,
        layout: SymbolLayout,
    ) -> Result<Self> {
        if h.rows() < h.cols() {
            return Err(Error::DimensionMismatch(format!(
                "model needs n >= m, got {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        if y.len() != h.rows() || layout.real_dim() != h.cols() {
            return Err(Error::DimensionMismatch(format!(
                "y has {} entries, H is {}x{}, layout expects {} columns",
                y.len(),
                h.rows(),
                h.cols(),
                layout.real_dim()
            )));
        }
        if !(rho > 0.0) {
            return Err(Error::Config(format!("SNR must be positive, got {rho}")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(Self {
            y,
            h,
            rho,
            constellation,
            layout,
        })
    }

    pub fn axis(&self) -> &[f64] {
        self.constellation.pam_levels()
    }

    /// Real dimension `m` of the search.
    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    /// Noise variance per real coordinate, `σ²/2`.
    pub fn noise_var_real(&self) -> f64 {
        0.5 / self.rho
    }

    /// Diagonal loading of the MMSE filter: noise variance over per-axis
    /// symbol energy (`1/ρ` for QAM).
    pub fn regularization(&self) -> f64 {
        self.noise_var_real() / self.constellation.axis_energy()
    }

    /// `‖y − H s‖²`
    pub fn metric(&self, s: &[f64]) -> f64 {
        let hs = self.h.matvec(s);
        self.y.iter().zip(&hs).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Total SNR `ρ_T = Kρ` in dB to per-symbol linear `ρ`.
pub fn rho_from_total_db(snr_total_db: f64, symbols: usize) -> f64 {
    10f64.powf(snr_total_db / 10.0) / symbols as f64
}

/// Sends `s_true` through `channel` at per-symbol SNR `rho`.
pub fn transmit(
    channel: &RealChannel,
    s_true: &[f64],
    rho: f64,
    rng: &mut Rng,
) -> Result<(RealModel, TransmitRecord)> {
    if s_true.len() != channel.h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols for {} channel columns",
            s_true.len(),
            channel.h.cols()
        )));
    }
    if let Some(bad) = s_true.iter().find(|v| !channel.axis().contains(v)) {
        return Err(Error::Config(format!(
            "transmitted value {bad} is not in the alphabet"
        )));
    }
    let mut y = channel.h.matvec(s_true);
    let mut noise_norm_sq = 0.0;
    if rho.is_finite() {
        let sd = (0.5 / rho).sqrt();
        let noise: Vec<f64> = rng
            .sample_standard_normal(y.len())
            .into_iter()
            .map(|z| sd * z)
            .collect();
        noise_norm_sq = norm_sq(&noise);
        for (yi, ni) in y.iter_mut().zip(&noise) {
            *yi += ni;
        }
    }
    let model = RealModel::new(
        y,
        channel.h.clone(),
        rho,
        channel.constellation.clone(),
        channel.layout,
    )?;
    Ok((
        model,
        TransmitRecord {
            s_true: s_true.to_vec(),
            noise_norm_sq,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equalizer {
    Zf,
    Mmse,
}

/// Post-equalization SNR per source symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSnr {
    pub snr: Vec<f64>,
    /// Normalized gain `x_k = SNR_k / ρ`.
    pub gain: Vec<f64>,
}

/// ZF: `x_k = 1/[G⁻¹]_kk`; MMSE: `x_k = 1/[(G + λI)⁻¹]_kk − λ` with `λ` the
/// model regularization. For QAM the diagonal of the real Gram inverse at
/// the real-part coordinate equals that of the complex one.
pub fn per_symbol_snr(model: &RealModel, equalizer: Equalizer) -> Result<SymbolSnr> {
    let gram = model.h.gram();
    let gain: Vec<f64> = match equalizer {
        Equalizer::Zf => {
            let inv = gram.spd_inverse()?;
            (0..model.layout.symbols())
                .map(|k| 1.0 / inv[(k, k)])
                .collect()
        }
        Equalizer::Mmse => {
            let reg = model.regularization();
            let inv = gram.add_diagonal(reg).spd_inverse()?;
            (0..model.layout.symbols())
                .map(|k| (1.0 / inv[(k, k)] - reg).max(0.0))
                .collect()
        }
    };
    let snr = gain.iter().map(|x| model.rho * x).collect();
    Ok(SymbolSnr { snr, gain })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::model::{make_constellation, sample_flat_rayleigh};

    fn bpsk() -> Constellation {
        make_constellation(ModulationKind::Pam, 2).unwrap()
    }

    fn qpsk() -> Constellation {
        make_constellation(ModulationKind::Qam, 4).unwrap()
    }

    #[test]
    fn realify_imaginary_unit() {
        let ch = ComplexChannel::new(
            1,
            1,
            vec![Complex64::new(0.0, 1.0)],
            ChannelModel::FlatRayleigh,
        );
        let r = realify(&ch, &qpsk());
        assert_eq!(
            r.h,
            RealMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap()
        );
    }

    #[test]
    fn realify_bpsk_over_complex_gain() {
        let ch = ComplexChannel::new(
            1,
            1,
            vec![Complex64::new(0.3, -1.2)],
            ChannelModel::FlatRayleigh,
        );
        let r = realify(&ch, &bpsk());
        assert_eq!(
            r.h,
            RealMatrix::from_rows(&[vec![0.3], vec![-1.2]]).unwrap()
        );
    }

    #[test]
    fn noiseless_transmit_is_exact() {
        let mut rng = Rng::new(3);
        let ch = realify(&sample_flat_rayleigh(3, 2, &mut rng), &qpsk());
        let s = ch.draw_symbols(&mut rng);
        let (m, rec) = transmit(&ch, &s, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(m.y, ch.h.matvec(&s));
        assert_eq!(rec.noise_norm_sq, 0.0);
        assert_eq!(m.metric(&s), 0.0);
    }

    #[test]
    fn transmit_rejects_foreign_symbols() {
        let mut rng = Rng::new(3);
        let ch = realify(&sample_flat_rayleigh(2, 2, &mut rng), &bpsk());
        assert!(transmit(&ch, &[1.0, 0.5], 1.0, &mut rng).is_err());
    }

    #[test]
    fn identity_channel_snr() {
        let h = RealMatrix::identity(4);
        let c = Arc::new(bpsk());
        let model = RealModel::new(vec![0.0; 4], h, 3.5, c, SymbolLayout::new(4, false)).unwrap();
        let zf = per_symbol_snr(&model, Equalizer::Zf).unwrap();
        assert!(zf.gain.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        let mmse = per_symbol_snr(&model, Equalizer::Mmse).unwrap();
        assert!(mmse.snr.iter().all(|&x| (x - 3.5).abs() < 1e-12));
    }

    #[test]
    fn symbol_errors_count_complex_symbols() {
        let layout = SymbolLayout::new(2, true);
        assert_eq!(layout.coords(1).collect::<Vec<_>>(), vec![1, 3]);
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = [-1.0, 1.0, -1.0, -1.0];
        assert_eq!(layout.symbol_errors(&a, &b), 2);
        assert_eq!(layout.symbol_errors(&a, &[-1.0, 1.0, -1.0, 1.0]), 1);
    }
}
