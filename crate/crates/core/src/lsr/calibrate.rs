use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::linear_point;
use super::table::{CalibrationMethod, TableMeta, ThresholdTable};
use super::threshold::{threshold_high_snr, threshold_suboptimal, EmpiricalCdf};
use crate::detectors::{brute_force_ml, sphere_decode, RadiusPolicy};
use crate::error::{Error, Result};
use crate::model::{
    rho_from_total_db, ChannelSpec, Constellation, Equalizer, ModulationSpec, RealModel,
};
use crate::numerics::Rng;

/// Largest search space the automatic oracle enumerates exhaustively.
pub const AUTO_BRUTE_FORCE_LIMIT: f64 = 4096.0;

/// Number of log-spaced finite threshold candidates.
const CANDIDATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlOracle {
    /// Brute force up to [`AUTO_BRUTE_FORCE_LIMIT`] candidates, sphere
    /// decoding beyond.
    #[default]
    Auto,
    BruteForce,
    SphereDecoder,
}

/// Exact ML decision for `model`.
pub fn ml_decision(model: &RealModel, oracle: MlOracle) -> Result<Vec<f64>> {
    let size = (model.axis().len() as f64).powi(model.dim() as i32);
    let brute = match oracle {
        MlOracle::Auto => size <= AUTO_BRUTE_FORCE_LIMIT,
        MlOracle::BruteForce => true,
        MlOracle::SphereDecoder => false,
    };
    Ok(if brute {
        brute_force_ml(model)?.s_hat
    } else {
        sphere_decode(model, &RadiusPolicy::schnorr_euchner(), None)?.s_hat
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    pub channel: ChannelSpec,
    pub modulation: ModulationSpec,
    pub initial: Equalizer,
    pub method: CalibrationMethod,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Floor on error events per curve for the exact method.
    pub min_error_events: u64,
    /// Multiplier of the high-SNR threshold.
    pub high_snr_scale: f64,
    pub oracle: MlOracle,
}

impl CalibrationConfig {
    pub fn new(
        channel: ChannelSpec,
        modulation: ModulationSpec,
        initial: Equalizer,
        snr_grid_db: Vec<f64>,
    ) -> Self {
        Self {
            channel,
            modulation,
            initial,
            method: CalibrationMethod::Exact,
            snr_grid_db,
            trials: 10_000,
            seed: 1,
            min_error_events: 10,
            high_snr_scale: 2.0,
            oracle: MlOracle::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.modulation.build()?;
        if self.trials == 0 {
            return Err(Error::Config("calibration needs at least one trial".into()));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "calibration SNR grid must be non-empty and strictly ascending".into(),
            ));
        }
        if !(self.high_snr_scale > 0.0) {
            return Err(Error::Config("high-SNR scale must be positive".into()));
        }
        Ok(())
    }

    fn meta(&self) -> TableMeta {
        TableMeta {
            modulation: self.modulation,
            k: self.channel.symbols(),
            l: self.channel.receive_dim(),
            channel_model: self.channel.model(),
            trials: self.trials,
            seed: self.seed,
        }
    }
}

/// One calibration trial: per-symbol gains and error indicators of the
/// linear and ML decisions against the transmitted vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    pub gain: Vec<f64>,
    pub ld_error: Vec<bool>,
    pub ml_error: Vec<bool>,
}

/// Calibration trials for every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationData {
    pub snr_grid_db: Vec<f64>,
    pub samples: Vec<Vec<CalibrationSample>>,
}

fn symbol_flags(model: &RealModel, a: &[f64], b: &[f64]) -> Vec<bool> {
    let layout = model.layout;
    (0..layout.symbols())
        .map(|k| layout.coords(k).any(|c| a[c] != b[c]))
        .collect()
}

/// Runs the calibration trials. Trial `t` at grid index `i` draws from the
/// stream `(seed, i, t)`.
pub fn collect_calibration_data(config: &CalibrationConfig) -> Result<CalibrationData> {
    config.validate()?;
    let constellation = config.modulation.build()?;
    let root = Rng::new(config.seed);
    let mut samples = Vec::with_capacity(config.snr_grid_db.len());
    for (i, &db) in config.snr_grid_db.iter().enumerate() {
        let rho = rho_from_total_db(db, config.channel.symbols());
        let point: Result<Vec<CalibrationSample>> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                calibration_trial(
                    config,
                    &constellation,
                    rho,
                    &mut root.derive(&[i as u64, t]),
                )
            })
            .collect();
        samples.push(point?);
    }
    Ok(CalibrationData {
        snr_grid_db: config.snr_grid_db.clone(),
        samples,
    })
}

fn calibration_trial(
    config: &CalibrationConfig,
    constellation: &Constellation,
    rho: f64,
    rng: &mut Rng,
) -> Result<CalibrationSample> {
    let (model, record) = config.channel.draw_instance(constellation, rho, rng)?;
    let (ld, gain) = linear_point(&model, config.initial)?;
    let ml = ml_decision(&model, config.oracle)?;
    Ok(CalibrationSample {
        gain,
        ld_error: symbol_flags(&model, &ld.s_hat, &record.s_true),
        ml_error: symbol_flags(&model, &ml, &record.s_true),
    })
}

/// `(x_k, LD error, ML error)` observations for one table cell.
type Observation = (f64, bool, bool);

fn cell_observations(samples: &[CalibrationSample], k: Option<usize>) -> Vec<Observation> {
    let mut out = Vec::new();
    for s in samples {
        for j in 0..s.gain.len() {
            if k.map_or(true, |k| k == j) {
                out.push((s.gain[j], s.ld_error[j], s.ml_error[j]));
            }
        }
    }
    out
}

/// Smallest normalized threshold at which the joint probability of an LD
/// error above it no longer exceeds that of an ML error above it.
///
/// Candidates are 0, [`CANDIDATES`] log-spaced points over the positive
/// observed range, then `+∞`; candidates with no observation above them are
/// skipped. The crossing is located by linear interpolation between the
/// bracketing candidates; an upper bracket of `+∞` yields `+∞`.
pub fn exact_threshold(obs: &[Observation], min_error_events: u64) -> Result<f64> {
    let ld_events = obs.iter().filter(|o| o.1).count() as u64;
    let ml_events = obs.iter().filter(|o| o.2).count() as u64;
    if ld_events.min(ml_events) < min_error_events {
        return Err(Error::InsufficientTrials {
            observed: ld_events.min(ml_events),
            required: min_error_events,
        });
    }
    let mut positive: Vec<f64> = obs
        .iter()
        .map(|o| o.0)
        .filter(|&x| x > 0.0 && x.is_finite())
        .collect();
    positive.sort_by(f64::total_cmp);
    let mut grid = vec![0.0];
    if let (Some(&lo), Some(&hi)) = (positive.first(), positive.last()) {
        let (llo, lhi) = (lo.ln(), hi.ln());
        for j in 0..CANDIDATES {
            let t = if CANDIDATES == 1 {
                0.0
            } else {
                j as f64 / (CANDIDATES - 1) as f64
            };
            grid.push((llo + t * (lhi - llo)).exp());
        }
    }
    let n = obs.len().max(1) as f64;
    let mut curve: Vec<(f64, f64)> = Vec::with_capacity(grid.len() + 1);
    for &eta in &grid {
        let (mut above, mut d) = (0usize, 0i64);
        for &(x, ld, ml) in obs {
            if x > eta {
                above += 1;
                d += ld as i64 - ml as i64;
            }
        }
        if above > 0 {
            curve.push((eta, d as f64 / n));
        }
    }
    curve.push((f64::INFINITY, 0.0));

    let changes: Vec<f64> = curve
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| w[1].0)
        .collect();
    if changes.len() > 1 {
        log::debug!("threshold difference changes sign at {changes:?}");
    }
    if curve[0].1 <= 0.0 {
        return Ok(curve[0].0);
    }
    for w in curve.windows(2) {
        let ((e0, d0), (e1, d1)) = (w[0], w[1]);
        if d0 > 0.0 && d1 <= 0.0 {
            if e1.is_infinite() {
                return Ok(f64::INFINITY);
            }
            return Ok(e0 + (e1 - e0) * d0 / (d0 - d1));
        }
    }
    Ok(f64::INFINITY)
}

fn per_cell<F>(
    config: &CalibrationConfig,
    samples: &[CalibrationSample],
    mut f: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&[Observation]) -> Result<f64>,
{
    let k = config.channel.symbols();
    if config.channel.is_exchangeable() {
        let v = f(&cell_observations(samples, None))?;
        Ok(vec![v; k])
    } else {
        (0..k)
            .map(|j| f(&cell_observations(samples, Some(j))))
            .collect()
    }
}

/// Builds a table of the requested method from collected trials.
pub fn table_from_data(
    config: &CalibrationConfig,
    data: &CalibrationData,
    method: CalibrationMethod,
) -> Result<ThresholdTable> {
    let constellation = config.modulation.build()?;
    let mut rows = Vec::with_capacity(data.samples.len());
    for (&db, samples) in data.snr_grid_db.iter().zip(&data.samples) {
        let rho = rho_from_total_db(db, config.channel.symbols());
        let row = match method {
            CalibrationMethod::Exact => per_cell(config, samples, |obs| {
                exact_threshold(obs, config.min_error_events)
            }),
            CalibrationMethod::Suboptimal => per_cell(config, samples, |obs| {
                let n = obs.len() as f64;
                let ser_ld = obs.iter().filter(|o| o.1).count() as f64 / n;
                let ser_ml = obs.iter().filter(|o| o.2).count() as f64 / n;
                let cdf = EmpiricalCdf::new(obs.iter().map(|o| o.0).collect());
                Ok(threshold_suboptimal(
                    &cdf,
                    ser_ld,
                    ser_ml,
                    constellation.order(),
                ))
            }),
            CalibrationMethod::HighSnrApprox => per_cell(config, samples, |obs| {
                let n = obs.len() as f64;
                let events = obs.iter().filter(|o| o.2).count();
                // no observed ML error: half an event
                let ser_ml = if events == 0 {
                    0.5 / n
                } else {
                    events as f64 / n
                };
                match threshold_high_snr(&constellation, ser_ml, config.high_snr_scale) {
                    Ok(eta) => Ok(eta / rho),
                    Err(Error::InvalidSer { .. }) => {
                        log::debug!(
                            "ML error rate {ser_ml} at {db} dB is outside the high-SNR regime"
                        );
                        Ok(f64::INFINITY)
                    }
                    Err(e) => Err(e),
                }
            }),
        }
        .map_err(|e| {
            log::warn!("calibration failed at {db} dB: {e}");
            e
        })?;
        rows.push(row);
    }
    ThresholdTable::new(data.snr_grid_db.clone(), rows, method, config.meta())
}

/// Calibrates with the method named in `config`.
pub fn calibrate(config: &CalibrationConfig) -> Result<ThresholdTable> {
    let data = collect_calibration_data(config)?;
    table_from_data(config, &data, config.method)
}

/// Monte-Carlo solution of the LD/ML joint-error balance per grid point.
pub fn calibrate_exact(config: &CalibrationConfig) -> Result<ThresholdTable> {
    table_from_data(
        config,
        &collect_calibration_data(config)?,
        CalibrationMethod::Exact,
    )
}

/// Inverse-CDF thresholds from marginal error rates.
pub fn calibrate_suboptimal(config: &CalibrationConfig) -> Result<ThresholdTable> {
    table_from_data(
        config,
        &collect_calibration_data(config)?,
        CalibrationMethod::Suboptimal,
    )
}

/// Closed-form high-SNR thresholds from the measured ML error rate.
pub fn calibrate_high_snr(config: &CalibrationConfig) -> Result<ThresholdTable> {
    table_from_data(
        config,
        &collect_calibration_data(config)?,
        CalibrationMethod::HighSnrApprox,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModulationKind;

    #[test]
    fn equal_curves_give_zero() {
        let obs: Vec<Observation> = (0..100)
            .map(|i| (i as f64 / 10.0, i % 3 == 0, i % 3 == 0))
            .collect();
        assert_eq!(exact_threshold(&obs, 0).unwrap(), 0.0);
    }

    #[test]
    fn crossing_is_interpolated_between_candidates() {
        // LD errs on every low-gain sample, ML never does; above 1 both are clean
        let mut obs: Vec<Observation> = (1..=50).map(|i| (i as f64 / 100.0, true, false)).collect();
        obs.extend((1..=50).map(|i| (1.0 + i as f64, false, false)));
        let eta = exact_threshold(&obs, 0).unwrap();
        assert!(eta > 0.45 && eta < 1.2, "eta = {eta}");
    }

    #[test]
    fn ld_errors_at_the_top_give_infinity() {
        let obs: Vec<Observation> = (1..=20).map(|i| (i as f64, true, false)).collect();
        assert_eq!(exact_threshold(&obs, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn floor_on_error_events() {
        let obs: Vec<Observation> = (1..=20).map(|i| (i as f64, i == 3, false)).collect();
        assert!(matches!(
            exact_threshold(&obs, 1),
            Err(Error::InsufficientTrials {
                observed: 0,
                required: 1
            })
        ));
    }

    #[test]
    fn single_symbol_systems_calibrate_to_zero() {
        let mut cfg = CalibrationConfig::new(
            ChannelSpec::Flat { l: 1, k: 1 },
            ModulationSpec::new(ModulationKind::Pam, 2),
            Equalizer::Mmse,
            vec![-5.0, 5.0],
        );
        cfg.trials = 400;
        cfg.min_error_events = 0;
        let table = calibrate_exact(&cfg).unwrap();
        assert!(table.eta_over_rho.iter().flatten().all(|&v| v == 0.0));
    }
}
