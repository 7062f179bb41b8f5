//! Monte-Carlo estimation of the minimum achievable complexity (MAC) of an
//! exact sphere decoder given an initial-information set.
//!
//! For one realization of the information set the estimate is
//! `Σ_k M^{H_k}`, where `H_k` is the base-`M` entropy of the length-`k` ML
//! prefix in search order; the curve value averages this over realizations.
//! A realization fixes the channel and the transmitted vector; only the noise
//! is redrawn in the inner loop.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::babai_point;
use crate::error::{Error, Result};
use crate::lsr::{
    linear_point, ml_decision, reduce_problem, reliable_set, MlOracle, ThresholdTable,
};
use crate::model::{
    per_symbol_snr, realify, rho_from_total_db, transmit, ChannelSpec, Constellation, Equalizer,
    ModulationSpec, RealChannel, RealModel,
};
use crate::numerics::Rng;

/// What the decoder knows besides the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InfoSetSpec {
    /// Noise-statistics radius. Carries no information beyond the channel
    /// and the transmitted vector it is centred on.
    RadiusLi {
        epsilon: f64,
    },
    /// Babai radius `‖y − H s_B‖²`, binned into per-realization quantiles.
    RadiusLd,
    ZfPoint,
    MmsePoint,
}

impl InfoSetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            InfoSetSpec::RadiusLi { .. } => "radius-li",
            InfoSetSpec::RadiusLd => "radius-ld",
            InfoSetSpec::ZfPoint => "zf-point",
            InfoSetSpec::MmsePoint => "mmse-point",
        }
    }

    pub fn equalizer(&self) -> Option<Equalizer> {
        match self {
            InfoSetSpec::ZfPoint => Some(Equalizer::Zf),
            InfoSetSpec::MmsePoint => Some(Equalizer::Mmse),
            _ => None,
        }
    }
}

impl fmt::Display for InfoSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InfoSetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radius-li" => Ok(InfoSetSpec::RadiusLi { epsilon: crate::detectors::RadiusPolicy::DEFAULT_EPSILON }),
            "radius-ld" => Ok(InfoSetSpec::RadiusLd),
            "zf-point" => Ok(InfoSetSpec::ZfPoint),
            "mmse-point" => Ok(InfoSetSpec::MmsePoint),
            other => Err(Error::Config(format!(
                "unknown information set {other:?}; expected radius-li, radius-ld, zf-point or mmse-point"
            ))),
        }
    }
}

/// Empirical law of the ML prefixes `s^k_ML`, `k = 1..depth`, within one
/// conditioning cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalLawEstimate {
    /// Base of the entropy (the constellation order `M`).
    base: usize,
    /// Per level, counts keyed by the encoded prefix.
    levels: Vec<HashMap<u64, u64>>,
    total: u64,
}

impl ConditionalLawEstimate {
    pub fn new(depth: usize, base: usize) -> Self {
        Self {
            base,
            levels: vec![HashMap::new(); depth],
            total: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Records one outcome given as alphabet digits in search order (the
    /// first digit is level 1).
    pub fn observe(&mut self, digits: &[usize], radix: usize) {
        debug_assert_eq!(digits.len(), self.levels.len());
        let mut code = 0u64;
        for (level, &d) in self.levels.iter_mut().zip(digits) {
            code = code * radix as u64 + d as u64;
            *level.entry(code).or_insert(0) += 1;
        }
        self.total += 1;
    }

    /// Probabilities of the observed length-`k` prefixes, `1 ≤ k ≤ depth`.
    pub fn probabilities(&self, k: usize) -> Vec<f64> {
        let n = self.total as f64;
        let sorted: BTreeMap<_, _> = self.levels[k - 1].iter().collect();
        sorted.values().map(|&&c| c as f64 / n).collect()
    }

    /// `Σ_k M^{H_k}`
    pub fn complexity(&self) -> f64 {
        (1..=self.depth())
            .map(|k| (self.base as f64).powf(estimate_conditional_entropy(self, k)))
            .sum()
    }
}

/// Plug-in entropy, base `M`, of the length-`k` prefix law.
pub fn estimate_conditional_entropy(law: &ConditionalLawEstimate, k: usize) -> f64 {
    if law.total == 0 {
        return 0.0;
    }
    let nats: f64 = law
        .probabilities(k)
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    nats / (law.base as f64).ln()
}

/// `(2(2^K − 1), K)`: the low-SNR lower bound and high-SNR value of the MAC
/// of radius-based decoders on `K` binary symbols.
pub fn theorem1_limits(k: u32) -> (f64, f64) {
    (2.0 * (2f64.powi(k as i32) - 1.0), k as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacConfig {
    pub channel: ChannelSpec,
    pub modulation: ModulationSpec,
    pub snr_grid_db: Vec<f64>,
    /// Information-set realizations per grid point.
    pub outer: usize,
    /// Samples per realization.
    pub inner: usize,
    pub seed: u64,
    /// Quantile bins of the lattice-dependent radius.
    pub bins: usize,
    pub min_bin_occupancy: usize,
    pub oracle: MlOracle,
}

impl MacConfig {
    pub fn new(channel: ChannelSpec, modulation: ModulationSpec, snr_grid_db: Vec<f64>) -> Self {
        Self {
            channel,
            modulation,
            snr_grid_db,
            outer: 200,
            inner: 10_000,
            seed: 1,
            bins: 16,
            min_bin_occupancy: 32,
            oracle: MlOracle::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.modulation.build()?;
        if self.outer == 0 || self.inner == 0 {
            return Err(Error::Config(
                "MAC estimation needs at least one outer and one inner trial".into(),
            ));
        }
        if self.bins == 0 {
            return Err(Error::Config("at least one radius bin is required".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("MAC SNR grid is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacCurve {
    pub snr_grid_db: Vec<f64>,
    pub mac_values: Vec<f64>,
    /// Standard error of each value across realizations.
    pub std_errors: Vec<f64>,
    /// `E[K_r]` and `P(K_r = 0)` for LSR curves.
    pub mean_kr: Option<Vec<f64>>,
    pub p_kr0: Option<Vec<f64>>,
    pub info_set: InfoSetSpec,
    pub trials_outer: usize,
    pub trials_inner: usize,
    pub seed: u64,
}

fn digits_in_search_order(model_axis: &[f64], s: &[f64]) -> Vec<usize> {
    s.iter()
        .rev()
        .map(|v| {
            model_axis
                .iter()
                .position(|a| a == v)
                .expect("symbol from the alphabet")
        })
        .collect()
}

fn group_key(axis: &[f64], s: &[f64]) -> u64 {
    s.iter().fold(0u64, |acc, v| {
        acc * axis.len() as u64 + axis.iter().position(|a| a == v).unwrap_or(0) as u64
    })
}

/// Weighted complexity of a set of conditioning cells.
fn mixture_complexity<'a>(
    cells: impl Iterator<Item = &'a ConditionalLawEstimate>,
    total: usize,
) -> f64 {
    cells
        .map(|law| law.total() as f64 / total as f64 * law.complexity())
        .sum()
}

struct Realization {
    value: f64,
    kr: usize,
}

fn summarize(
    per_snr: Vec<Vec<Realization>>,
    spec: InfoSetSpec,
    config: &MacConfig,
    with_kr: bool,
) -> MacCurve {
    let mut mac_values = Vec::new();
    let mut std_errors = Vec::new();
    let mut mean_kr = Vec::new();
    let mut p_kr0 = Vec::new();
    for rs in &per_snr {
        let n = rs.len() as f64;
        let mean = rs.iter().map(|r| r.value).sum::<f64>() / n;
        let var = if rs.len() > 1 {
            rs.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mac_values.push(mean);
        std_errors.push((var / n).sqrt());
        mean_kr.push(rs.iter().map(|r| r.kr as f64).sum::<f64>() / n);
        p_kr0.push(rs.iter().filter(|r| r.kr == 0).count() as f64 / n);
    }
    MacCurve {
        snr_grid_db: config.snr_grid_db.clone(),
        mac_values,
        std_errors,
        mean_kr: with_kr.then_some(mean_kr),
        p_kr0: with_kr.then_some(p_kr0),
        info_set: spec,
        trials_outer: config.outer,
        trials_inner: config.inner,
        seed: config.seed,
    }
}

fn run_outer<F>(config: &MacConfig, f: F) -> Result<Vec<Vec<Realization>>>
where
    F: Fn(usize, f64, &mut Rng) -> Result<Realization> + Sync,
{
    config.validate()?;
    let root = Rng::new(config.seed);
    config
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            (0..config.outer)
                .into_par_iter()
                .map(|o| f(i, db, &mut root.derive(&[i as u64, o as u64])))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// MAC of an exact sphere decoder given `spec`.
pub fn mac_sd(spec: InfoSetSpec, config: &MacConfig) -> Result<MacCurve> {
    let constellation = config.modulation.build()?;
    if let InfoSetSpec::RadiusLd = spec {
        if config.inner / config.bins < config.min_bin_occupancy {
            return Err(Error::InsufficientBinOccupancy {
                observed: config.inner / config.bins,
                required: config.min_bin_occupancy,
            });
        }
    }
    let per_snr = run_outer(config, |_, db, rng| {
        let rho = rho_from_total_db(db, config.channel.symbols());
        let channel = realify(&config.channel.sample(rng), &constellation);
        let value = match spec {
            InfoSetSpec::RadiusLi { .. } => {
                radius_li_realization(config, &constellation, &channel, rho, rng)?
            }
            InfoSetSpec::RadiusLd => {
                radius_ld_realization(config, &constellation, &channel, rho, rng)?
            }
            InfoSetSpec::ZfPoint | InfoSetSpec::MmsePoint => point_realization(
                config,
                &constellation,
                &channel,
                rho,
                spec.equalizer().unwrap(),
                rng,
            )?,
        };
        Ok(Realization {
            value,
            kr: config.channel.symbols(),
        })
    })?;
    Ok(summarize(per_snr, spec, config, false))
}

fn radius_li_realization(
    config: &MacConfig,
    constellation: &Constellation,
    channel: &RealChannel,
    rho: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let axis = channel.axis();
    let s = channel.draw_symbols(rng);
    let mut law = ConditionalLawEstimate::new(s.len(), constellation.order());
    for _ in 0..config.inner {
        let (model, _) = transmit(channel, &s, rho, rng)?;
        let ml = ml_decision(&model, config.oracle)?;
        law.observe(&digits_in_search_order(axis, &ml), axis.len());
    }
    Ok(law.complexity())
}

fn radius_ld_realization(
    config: &MacConfig,
    constellation: &Constellation,
    channel: &RealChannel,
    rho: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let axis = channel.axis();
    let s = channel.draw_symbols(rng);
    let mut draws: Vec<(f64, Vec<usize>)> = Vec::with_capacity(config.inner);
    for _ in 0..config.inner {
        let (model, _) = transmit(channel, &s, rho, rng)?;
        let radius = babai_point(&model)?.metric;
        let ml = ml_decision(&model, config.oracle)?;
        draws.push((radius, digits_in_search_order(axis, &ml)));
    }
    // rank-based quantile bins; equal radii keep their draw order
    let mut order: Vec<usize> = (0..draws.len()).collect();
    order.sort_by(|&a, &b| draws[a].0.total_cmp(&draws[b].0).then(a.cmp(&b)));
    let mut cells = Vec::with_capacity(config.bins);
    for b in 0..config.bins {
        let (lo, hi) = (
            b * draws.len() / config.bins,
            (b + 1) * draws.len() / config.bins,
        );
        if hi - lo < config.min_bin_occupancy {
            return Err(Error::InsufficientBinOccupancy {
                observed: hi - lo,
                required: config.min_bin_occupancy,
            });
        }
        let mut law = ConditionalLawEstimate::new(s.len(), constellation.order());
        for &i in &order[lo..hi] {
            law.observe(&draws[i].1, axis.len());
        }
        cells.push(law);
    }
    Ok(mixture_complexity(cells.iter(), draws.len()))
}

fn point_realization(
    config: &MacConfig,
    constellation: &Constellation,
    channel: &RealChannel,
    rho: f64,
    equalizer: Equalizer,
    rng: &mut Rng,
) -> Result<f64> {
    let axis = channel.axis();
    let m = channel.layout.real_dim();
    let s = channel.draw_symbols(rng);
    let mut cells: BTreeMap<u64, ConditionalLawEstimate> = BTreeMap::new();
    for _ in 0..config.inner {
        let (model, _) = transmit(channel, &s, rho, rng)?;
        let (ld, _) = linear_point(&model, equalizer)?;
        let ml = ml_decision(&model, config.oracle)?;
        cells
            .entry(group_key(axis, &ld.s_hat))
            .or_insert_with(|| ConditionalLawEstimate::new(m, constellation.order()))
            .observe(&digits_in_search_order(axis, &ml), axis.len());
    }
    Ok(mixture_complexity(cells.values(), config.inner))
}

/// MAC of an LSR-aided decoder whose initial point is given by `spec`.
///
/// The reliable set depends on the channel only, so `K_r` is fixed per
/// realization; the entropies are those of the reduced ML solution given
/// the linear point, and `K_r = 0` contributes nothing.
pub fn mac_lsr(spec: InfoSetSpec, config: &MacConfig, table: &ThresholdTable) -> Result<MacCurve> {
    let equalizer = spec.equalizer().ok_or_else(|| {
        Error::Config(format!(
            "LSR complexity needs a point information set, got {spec}"
        ))
    })?;
    let constellation = config.modulation.build()?;
    let expected = crate::lsr::TableMeta {
        modulation: config.modulation,
        k: config.channel.symbols(),
        l: config.channel.receive_dim(),
        channel_model: config.channel.model(),
        trials: table.meta.trials,
        seed: table.meta.seed,
    };
    table.meta.check_compatible(&expected)?;

    let per_snr = run_outer(config, |_, db, rng| {
        let rho = rho_from_total_db(db, config.channel.symbols());
        let channel = realify(&config.channel.sample(rng), &constellation);
        let probe = RealModel::new(
            vec![0.0; channel.h.rows()],
            channel.h.clone(),
            rho,
            channel.constellation.clone(),
            channel.layout,
        )?;
        let gain = per_symbol_snr(&probe, equalizer)?.gain;
        let set = reliable_set(&gain, table.lookup(db))?;
        let kr = set.remaining();
        if kr == 0 {
            return Ok(Realization { value: 0.0, kr });
        }
        let axis = channel.axis();
        let depth = channel.layout.real_dim() * kr / channel.layout.symbols();
        let s = channel.draw_symbols(rng);
        let mut cells: BTreeMap<u64, ConditionalLawEstimate> = BTreeMap::new();
        for _ in 0..config.inner {
            let (model, _) = transmit(&channel, &s, rho, rng)?;
            let (ld, _) = linear_point(&model, equalizer)?;
            let reduced = reduce_problem(&model, &set, &ld.s_hat)?;
            let ml = ml_decision(&reduced.model, config.oracle)?;
            cells
                .entry(group_key(axis, &ld.s_hat))
                .or_insert_with(|| ConditionalLawEstimate::new(depth, constellation.order()))
                .observe(&digits_in_search_order(axis, &ml), axis.len());
        }
        Ok(Realization {
            value: mixture_complexity(cells.values(), config.inner),
            kr,
        })
    })?;
    Ok(summarize(per_snr, spec, config, true))
}
