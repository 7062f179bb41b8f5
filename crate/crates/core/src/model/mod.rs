//! Constellations, channels and the real-valued transmit model.

mod channel;
mod constellation;
mod real;
mod scenario;

pub use channel::{
    sample_flat_rayleigh, sample_rayleigh_taps, toeplitz_from_taps, ChannelModel, ComplexChannel,
};
pub use constellation::{make_constellation, Constellation, ModulationKind, ModulationSpec};
pub use real::{
    per_symbol_snr, realify, rho_from_total_db, transmit, Equalizer, RealChannel, RealModel,
    SymbolLayout, SymbolSnr, TransmitRecord,
};
pub use scenario::ChannelSpec;
