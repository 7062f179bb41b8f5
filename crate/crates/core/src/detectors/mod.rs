//! Linear detectors, the brute-force ML oracle and the exact sphere decoders.

mod linear;
mod ml;
mod sphere;

pub use linear::{babai_point, detect_mmse, detect_mrc, detect_zf};
pub use ml::{brute_force_ml, brute_force_ml_capped, BRUTE_FORCE_CAP};
pub use sphere::{fp_radius, sphere_decode, RadiusKind, RadiusPolicy};

/// Result of one detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutput {
    pub s_hat: Vec<f64>,
    pub visited_nodes: u64,
    /// `‖y − H s_hat‖²` on the full model.
    pub metric: f64,
    /// Symbol indices fixed to the initial point without search.
    pub relied_indices: Vec<usize>,
}

/// Nearest point of an ascending axis alphabet; ties go to the smaller point.
pub fn quantize(axis: &[f64], value: f64) -> f64 {
    let mut best = axis[0];
    let mut dist = (value - best).abs();
    for &a in &axis[1..] {
        let d = (value - a).abs();
        if d < dist {
            best = a;
            dist = d;
        }
    }
    best
}
