//! Numeric kernel shared by every other module.

mod matrix;
mod rng;
mod special;

pub use matrix::{dot, norm_sq, qr_decompose, Qr, RealMatrix, RANK_TOLERANCE};
pub use rng::{sample_standard_normal, Rng};
pub use special::{
    chi_square_cdf, chi_square_quantile, erfc, gaussian_q, ln_gamma, regularized_lower_gamma,
    regularized_upper_gamma,
};
