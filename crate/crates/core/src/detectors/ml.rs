use super::DetectorOutput;
use crate::error::{Error, Result};
use crate::model::RealModel;
use crate::numerics::norm_sq;

/// Default bound on the number of enumerated candidates.
pub const BRUTE_FORCE_CAP: u64 = 1 << 24;

/// Exhaustive ML with the default cap.
pub fn brute_force_ml(model: &RealModel) -> Result<DetectorOutput> {
    brute_force_ml_capped(model, BRUTE_FORCE_CAP)
}

/// Exhaustive ML over `axis^m`, enumerated in lexicographic order with
/// coordinate 0 most significant. The first candidate reaching the minimum
/// wins, so ties resolve to the lexicographically smallest vector.
pub fn brute_force_ml_capped(model: &RealModel, cap: u64) -> Result<DetectorOutput> {
    let axis = model.axis();
    let m = model.dim();
    let size = (axis.len() as f64).powi(m as i32);
    if size > cap as f64 {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    let n = model.y.len();
    let cols: Vec<Vec<f64>> = (0..m).map(|j| model.h.column(j)).collect();
    let mut digits = vec![0usize; m];
    let mut s = vec![axis[0]; m];

    let residual_of = |s: &[f64]| -> Vec<f64> {
        let hs = model.h.matvec(s);
        model.y.iter().zip(&hs).map(|(a, b)| a - b).collect()
    };
    let mut r = residual_of(&s);
    let mut best = s.clone();
    let mut best_metric = f64::INFINITY;
    let mut count = 0u64;

    loop {
        count += 1;
        let metric = norm_sq(&r);
        if metric < best_metric {
            best_metric = metric;
            best.copy_from_slice(&s);
        }
        // advance the odometer from the least significant coordinate
        let mut j = m;
        loop {
            if j == 0 {
                let metric = model.metric(&best);
                return Ok(DetectorOutput {
                    s_hat: best,
                    visited_nodes: count,
                    metric,
                    relied_indices: Vec::new(),
                });
            }
            j -= 1;
            if digits[j] + 1 < axis.len() {
                break;
            }
            digits[j] = 0;
            s[j] = axis[0];
        }
        digits[j] += 1;
        let old = s[j];
        s[j] = axis[digits[j]];
        if j + 1 == m {
            let delta = s[j] - old;
            for i in 0..n {
                r[i] -= cols[j][i] * delta;
            }
        } else {
            // a carry: refresh to keep rounding drift bounded
            r = residual_of(&s);
        }
    }
}
