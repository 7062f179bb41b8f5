use serde::{Deserialize, Serialize};

use super::channel::{
    sample_flat_rayleigh, sample_rayleigh_taps, toeplitz_from_taps, ChannelModel, ComplexChannel,
};
use super::constellation::Constellation;
use super::real::{realify, transmit, RealModel, TransmitRecord};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Channel ensemble an experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelSpec {
    /// `L x K` i.i.d. Rayleigh.
    Flat { l: usize, k: usize },
    /// Zero-padded block of `K` symbols over `taps` Rayleigh taps.
    FreqSelective { taps: usize, k: usize },
}

impl ChannelSpec {
    pub fn symbols(&self) -> usize {
        match *self {
            ChannelSpec::Flat { k, .. } | ChannelSpec::FreqSelective { k, .. } => k,
        }
    }

    /// Receive dimension `L`.
    pub fn receive_dim(&self) -> usize {
        match *self {
            ChannelSpec::Flat { l, .. } => l,
            ChannelSpec::FreqSelective { taps, k } => k + taps - 1,
        }
    }

    pub fn model(&self) -> ChannelModel {
        match self {
            ChannelSpec::Flat { .. } => ChannelModel::FlatRayleigh,
            ChannelSpec::FreqSelective { .. } => ChannelModel::ToeplitzZp,
        }
    }

    /// Whether symbol indices are statistically interchangeable.
    pub fn is_exchangeable(&self) -> bool {
        matches!(self, ChannelSpec::Flat { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Flat { l, k } if l == 0 || k == 0 => {
                Err(Error::Config("L and K must be positive".into()))
            }
            ChannelSpec::Flat { l, k } if l < k => Err(Error::Config(format!(
                "need at least as many receive as transmit dimensions, got L={l}, K={k}"
            ))),
            ChannelSpec::FreqSelective { taps, k } if taps == 0 || k == 0 => {
                Err(Error::Config("L_c and K must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> ComplexChannel {
        match *self {
            ChannelSpec::Flat { l, k } => sample_flat_rayleigh(l, k, rng),
            ChannelSpec::FreqSelective { taps, k } => {
                toeplitz_from_taps(&sample_rayleigh_taps(taps, rng), k)
            }
        }
    }

    /// Fresh channel, uniform symbols and noise at per-symbol SNR `rho`.
    pub fn draw_instance(
        &self,
        constellation: &Constellation,
        rho: f64,
        rng: &mut Rng,
    ) -> Result<(RealModel, TransmitRecord)> {
        let channel = realify(&self.sample(rng), constellation);
        let s = channel.draw_symbols(rng);
        transmit(&channel, &s, rho, rng)
    }
}
