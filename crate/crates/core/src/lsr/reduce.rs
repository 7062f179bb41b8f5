use super::table::ThresholdTable;
use crate::detectors::{detect_mmse, detect_zf, sphere_decode, DetectorOutput, RadiusPolicy};
use crate::error::{Error, Result};
use crate::model::{per_symbol_snr, Equalizer, RealModel, SymbolLayout};

/// Symbols trusted to the initial point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliableSet {
    /// Reliable symbol indices, ascending.
    pub indices: Vec<usize>,
    pub symbols: usize,
}

impl ReliableSet {
    pub fn empty(symbols: usize) -> Self {
        Self {
            indices: Vec::new(),
            symbols,
        }
    }

    pub fn all(symbols: usize) -> Self {
        Self {
            indices: (0..symbols).collect(),
            symbols,
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of symbols left to search, `K_r`.
    pub fn remaining(&self) -> usize {
        self.symbols - self.indices.len()
    }

    /// Size of the reduced search space, `M^{K_r}`.
    pub fn search_space_size(&self, order: usize) -> f64 {
        (order as f64).powi(self.remaining() as i32)
    }
}

/// `k` is reliable iff `snr[k] > eta[k]`; an infinite threshold never admits.
///
/// Any common positive scaling of both sides gives the same set, so the
/// normalized pair (gain `x_k`, `η_k/ρ`) may be passed directly.
pub fn reliable_set(snr: &[f64], eta: &[f64]) -> Result<ReliableSet> {
    if snr.len() != eta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} SNRs for {} thresholds",
            snr.len(),
            eta.len()
        )));
    }
    let indices = snr
        .iter()
        .zip(eta)
        .enumerate()
        .filter(|(_, (s, e))| s > e)
        .map(|(k, _)| k)
        .collect();
    Ok(ReliableSet {
        indices,
        symbols: snr.len(),
    })
}

/// The search left after freezing the reliable symbols.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    /// Model over the unreliable symbols with `y_r = y − H_v s_v`.
    pub model: RealModel,
    /// Full-model coordinate of each reduced coordinate.
    pub kept: Vec<usize>,
    /// Full-length initial point supplying the frozen coordinates.
    pub s_init: Vec<f64>,
}

impl ReducedProblem {
    /// Writes the reduced solution into the frozen initial point.
    pub fn splice(&self, s_reduced: &[f64]) -> Vec<f64> {
        let mut s = self.s_init.clone();
        for (&c, &v) in self.kept.iter().zip(s_reduced) {
            s[c] = v;
        }
        s
    }
}

/// Strikes the columns of the reliable symbols and cancels their
/// contribution from `y`.
pub fn reduce_problem(
    model: &RealModel,
    set: &ReliableSet,
    s_init: &[f64],
) -> Result<ReducedProblem> {
    let layout = model.layout;
    if s_init.len() != model.dim() || set.symbols != layout.symbols() {
        return Err(Error::DimensionMismatch(
            "reliable set or initial point does not fit the model".into(),
        ));
    }
    let unreliable: Vec<usize> = (0..layout.symbols())
        .filter(|k| !set.contains(*k))
        .collect();
    let reduced_layout = SymbolLayout::new(unreliable.len(), layout.is_paired());
    let per = if layout.is_paired() { 2 } else { 1 };
    let kept: Vec<usize> = (0..per)
        .flat_map(|j| unreliable.iter().map(move |&k| k + j * layout.symbols()))
        .collect();
    let frozen: Vec<usize> = (0..model.dim()).filter(|c| !kept.contains(c)).collect();

    let mut y = model.y.clone();
    for &c in &frozen {
        let v = s_init[c];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi -= model.h[(i, c)] * v;
        }
    }
    let h = model.h.select_columns(&kept);
    let reduced = RealModel::new(y, h, model.rho, model.constellation.clone(), reduced_layout)?;
    Ok(ReducedProblem {
        model: reduced,
        kept,
        s_init: s_init.to_vec(),
    })
}

/// Linear detection plus the per-symbol gains that drive reliability.
pub fn linear_point(model: &RealModel, initial: Equalizer) -> Result<(DetectorOutput, Vec<f64>)> {
    let ld = match initial {
        Equalizer::Zf => detect_zf(model)?,
        Equalizer::Mmse => detect_mmse(model)?,
    };
    let gain = per_symbol_snr(model, initial)?.gain;
    Ok((ld, gain))
}

/// Lossless-size-reduction aided sphere decoding.
///
/// Symbols whose post-equalization SNR clears the table threshold keep
/// their linear decision; the rest are sphere decoded on the reduced
/// system (lattice-dependent policies start from the reduced Babai point).
pub fn lsr_detect(
    model: &RealModel,
    initial: Equalizer,
    table: &ThresholdTable,
    policy: &RadiusPolicy,
) -> Result<DetectorOutput> {
    table.check_model(model)?;
    let (ld, gain) = linear_point(model, initial)?;
    let snr_total_db = 10.0 * (model.rho * model.layout.symbols() as f64).log10();
    let set = reliable_set(&gain, table.lookup(snr_total_db))?;
    lsr_detect_with_set(model, &ld.s_hat, set, policy)
}

/// The search half of [`lsr_detect`] for a given reliable set.
pub fn lsr_detect_with_set(
    model: &RealModel,
    s_init: &[f64],
    set: ReliableSet,
    policy: &RadiusPolicy,
) -> Result<DetectorOutput> {
    let (s_hat, visited_nodes) = if set.remaining() == 0 {
        (s_init.to_vec(), 0)
    } else {
        let reduced = reduce_problem(model, &set, s_init)?;
        let out = sphere_decode(&reduced.model, policy, None)?;
        (reduced.splice(&out.s_hat), out.visited_nodes)
    };
    let metric = model.metric(&s_hat);
    Ok(DetectorOutput {
        s_hat,
        visited_nodes,
        metric,
        relied_indices: set.indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_constellation, ChannelSpec, ModulationKind};
    use crate::numerics::Rng;

    #[test]
    fn reliable_set_edges() {
        let inf = f64::INFINITY;
        assert!(reliable_set(&[1.0, 2.0], &[inf, inf]).unwrap().is_empty());
        assert_eq!(
            reliable_set(&[1.0, 2.0], &[0.0, 0.0]).unwrap().remaining(),
            0
        );
        let g = reliable_set(&[1.0, 2.0, 3.0], &[1.0, 1.5, 4.0]).unwrap();
        assert_eq!(g.indices, vec![1]);
        assert_eq!(g.search_space_size(4), 16.0);
        assert!(reliable_set(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn reduction_preserves_metric() {
        let c = make_constellation(ModulationKind::Qam, 16).unwrap();
        let mut rng = Rng::new(21);
        let (model, rec) = ChannelSpec::Flat { l: 4, k: 3 }
            .draw_instance(&c, 5.0, &mut rng)
            .unwrap();
        let set = ReliableSet {
            indices: vec![1],
            symbols: 3,
        };
        let reduced = reduce_problem(&model, &set, &rec.s_true).unwrap();
        assert_eq!(reduced.kept, vec![0, 2, 3, 5]);
        let candidate: Vec<f64> = reduced.kept.iter().map(|_| c.pam_levels()[1]).collect();
        let full = reduced.splice(&candidate);
        let (a, b) = (reduced.model.metric(&candidate), model.metric(&full));
        assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn empty_and_full_reduction() {
        let c = make_constellation(ModulationKind::Pam, 2).unwrap();
        let mut rng = Rng::new(2);
        let (model, rec) = ChannelSpec::Flat { l: 3, k: 3 }
            .draw_instance(&c, 2.0, &mut rng)
            .unwrap();
        let none = reduce_problem(&model, &ReliableSet::empty(3), &rec.s_true).unwrap();
        assert_eq!(none.model.y, model.y);
        let out = lsr_detect_with_set(
            &model,
            &rec.s_true,
            ReliableSet::all(3),
            &RadiusPolicy::schnorr_euchner(),
        )
        .unwrap();
        assert_eq!(out.s_hat, rec.s_true);
        assert_eq!(out.visited_nodes, 0);
    }
}
