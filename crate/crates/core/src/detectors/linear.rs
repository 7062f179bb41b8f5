use super::{quantize, DetectorOutput};
use crate::error::{Error, Result};
use crate::model::RealModel;
use crate::numerics::{dot, norm_sq, qr_decompose};

fn finish(model: &RealModel, s_hat: Vec<f64>, visited_nodes: u64) -> DetectorOutput {
    let metric = model.metric(&s_hat);
    DetectorOutput {
        s_hat,
        visited_nodes,
        metric,
        relied_indices: Vec::new(),
    }
}

/// Zero-forcing: quantized least-squares solution.
pub fn detect_zf(model: &RealModel) -> Result<DetectorOutput> {
    let qr = qr_decompose(&model.h)?;
    let x = qr.back_substitute(&qr.project(&model.y));
    let s_hat = x.iter().map(|&v| quantize(model.axis(), v)).collect();
    Ok(finish(model, s_hat, 0))
}

/// Unbiased MMSE estimate, quantized coordinatewise.
pub fn detect_mmse(model: &RealModel) -> Result<DetectorOutput> {
    let x = mmse_estimate(model)?;
    let s_hat = x.iter().map(|&v| quantize(model.axis(), v)).collect();
    Ok(finish(model, s_hat, 0))
}

/// `x_i / γ_i` with `x = (G + λI)⁻¹Hᵀy` and `γ_i = 1 − λ[(G + λI)⁻¹]_ii`.
pub(crate) fn mmse_estimate(model: &RealModel) -> Result<Vec<f64>> {
    let reg = model.regularization();
    let a = model.h.gram().add_diagonal(reg).spd_inverse()?;
    let x = a.matvec(&model.h.tr_matvec(&model.y));
    Ok(x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let gamma = 1.0 - reg * a[(i, i)];
            if gamma > 0.0 {
                xi / gamma
            } else {
                xi
            }
        })
        .collect())
}

/// Matched filter scaled by the column energy.
pub fn detect_mrc(model: &RealModel) -> Result<DetectorOutput> {
    let mf = model.h.tr_matvec(&model.y);
    let mut s_hat = Vec::with_capacity(mf.len());
    for (i, v) in mf.iter().enumerate() {
        let energy = norm_sq(&model.h.column(i));
        if energy == 0.0 {
            return Err(Error::ZeroColumn(i));
        }
        s_hat.push(quantize(model.axis(), v / energy));
    }
    Ok(finish(model, s_hat, 0))
}

/// Successive interference cancellation on the triangular system, last
/// coordinate first.
pub fn babai_point(model: &RealModel) -> Result<DetectorOutput> {
    let qr = qr_decompose(&model.h)?;
    let z = qr.project(&model.y);
    let m = model.dim();
    let mut s = vec![0.0; m];
    for i in (0..m).rev() {
        let row = &qr.r.row(i)[i + 1..];
        let c = (z[i] - dot(row, &s[i + 1..])) / qr.r[(i, i)];
        s[i] = quantize(model.axis(), c);
    }
    Ok(finish(model, s, m as u64))
}
