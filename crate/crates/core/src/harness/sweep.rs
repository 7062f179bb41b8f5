use std::time::Instant;

use rayon::prelude::*;

use super::config::{DetectorConfig, DetectorKind, ExperimentConfig, InitialPoint};
use crate::detectors::{
    babai_point, brute_force_ml, detect_mmse, detect_mrc, detect_zf, sphere_decode, DetectorOutput,
    RadiusPolicy,
};
use crate::error::Result;
use crate::lsr::{linear_point, lsr_detect_with_set, reliable_set, TableMeta, ThresholdTable};
use crate::model::{rho_from_total_db, ChannelSpec, Equalizer, RealModel};
use crate::numerics::Rng;

/// One CSV row: a detector at one total SNR.
///
/// Fields that do not apply to a row (SER of a MAC curve, `K_r` of a plain
/// decoder curve) are `None` and written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub detector: String,
    pub snr_total_db: f64,
    pub ser: Option<f64>,
    pub ser_ci: Option<f64>,
    pub mean_nodes: f64,
    pub mean_kr: Option<f64>,
    pub p_kr0: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Wall-clock seconds per SNR point; not persisted.
    pub wall_time_s: Vec<f64>,
}

impl PartialEq for SweepResult {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl SweepResult {
    /// Rows of one detector, in grid order.
    pub fn series(&self, detector: &str) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.detector == detector)
            .collect()
    }

    /// Detector labels in order of first appearance.
    pub fn detectors(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.detector) {
                out.push(r.detector.clone());
            }
        }
        out
    }
}

/// A detector ready to run, with its table loaded.
#[derive(Debug, Clone)]
pub enum Detector {
    Ml,
    Zf,
    Mmse,
    Mrc,
    Babai,
    Sd(RadiusPolicy),
    Lsr {
        policy: RadiusPolicy,
        initial: Equalizer,
        table: ThresholdTable,
        scale: f64,
    },
}

/// Decision, visited nodes and searched symbol count of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub s_hat: Vec<f64>,
    pub visited_nodes: u64,
    pub k_r: usize,
}

impl Detector {
    pub fn prepare(d: &DetectorConfig, config: &ExperimentConfig) -> Result<Self> {
        Ok(match d.kind {
            DetectorKind::Ml => Detector::Ml,
            DetectorKind::Zf => Detector::Zf,
            DetectorKind::Mmse => Detector::Mmse,
            DetectorKind::Mrc => Detector::Mrc,
            DetectorKind::Babai => Detector::Babai,
            DetectorKind::Sd => Detector::Sd(d.policy()),
            DetectorKind::Lsr => {
                let path = config.resolve(d.table.as_deref().expect("validated"));
                let table = ThresholdTable::load(&path)?;
                let channel = config.channel()?;
                table.meta.check_compatible(&TableMeta {
                    modulation: config.modulation,
                    k: channel.symbols(),
                    l: channel.receive_dim(),
                    channel_model: channel.model(),
                    trials: 0,
                    seed: 0,
                })?;
                Detector::Lsr {
                    policy: d.policy(),
                    initial: d.initial.unwrap_or(InitialPoint::Mmse).into(),
                    table,
                    scale: d.scale.unwrap_or(1.0),
                }
            }
        })
    }

    /// Whether `K_r` statistics are meaningful for this detector.
    pub fn reports_kr(&self) -> bool {
        matches!(self, Detector::Lsr { .. })
    }

    pub fn run(&self, model: &RealModel) -> Result<Detection> {
        let k = model.layout.symbols();
        let plain = |out: DetectorOutput, k_r: usize| Detection {
            s_hat: out.s_hat,
            visited_nodes: out.visited_nodes,
            k_r,
        };
        Ok(match self {
            Detector::Ml => plain(brute_force_ml(model)?, k),
            Detector::Zf => plain(detect_zf(model)?, 0),
            Detector::Mmse => plain(detect_mmse(model)?, 0),
            Detector::Mrc => plain(detect_mrc(model)?, 0),
            Detector::Babai => plain(babai_point(model)?, 0),
            Detector::Sd(policy) => plain(sphere_decode(model, policy, None)?, k),
            Detector::Lsr {
                policy,
                initial,
                table,
                scale,
            } => {
                let (ld, gain) = linear_point(model, *initial)?;
                let db = 10.0 * (model.rho * k as f64).log10();
                let eta: Vec<f64> = table.lookup(db).iter().map(|e| e * scale).collect();
                let set = reliable_set(&gain, &eta)?;
                let k_r = set.remaining();
                plain(lsr_detect_with_set(model, &ld.s_hat, set, policy)?, k_r)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    errors: u64,
    nodes: u64,
    kr: u64,
    kr0: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            errors: self.errors + o.errors,
            nodes: self.nodes + o.nodes,
            kr: self.kr + o.kr,
            kr0: self.kr0 + o.kr0,
        }
    }
}

/// Runs every configured detector on the same instances, trial by trial.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let channel = config.channel()?;
    let constellation = config.modulation.build()?;
    let detectors: Vec<Detector> = config
        .detectors
        .iter()
        .map(|d| Detector::prepare(d, config))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = config
        .detectors
        .iter()
        .map(DetectorConfig::display_label)
        .collect();
    let root = Rng::new(config.seed);
    let k = channel.symbols();

    let mut result = SweepResult::default();
    let mut per_detector: Vec<Vec<SweepRow>> = vec![Vec::new(); detectors.len()];
    for (i, &db) in config.snr_grid_db.iter().enumerate() {
        let started = Instant::now();
        let rho = rho_from_total_db(db, k);
        let zero = vec![Tally::default(); detectors.len()];
        let tallies = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                trial(
                    &channel,
                    &constellation,
                    &detectors,
                    rho,
                    &mut root.derive(&[i as u64, t]),
                )
            })
            .try_reduce(
                || zero.clone(),
                |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
            )?;
        let elapsed = started.elapsed().as_secs_f64();
        log::info!("{db} dB: {} trials in {elapsed:.2} s", config.trials);
        result.wall_time_s.push(elapsed);

        let n = config.trials as f64;
        let symbols = n * k as f64;
        for (j, (tally, det)) in tallies.iter().zip(&detectors).enumerate() {
            let ser = tally.errors as f64 / symbols;
            per_detector[j].push(SweepRow {
                detector: labels[j].clone(),
                snr_total_db: db,
                ser: Some(ser),
                ser_ci: Some(1.96 * (ser * (1.0 - ser) / symbols).sqrt()),
                mean_nodes: tally.nodes as f64 / n,
                mean_kr: det.reports_kr().then(|| tally.kr as f64 / n),
                p_kr0: det.reports_kr().then(|| tally.kr0 as f64 / n),
                trials: config.trials,
                seed: config.seed,
            });
        }
    }
    result.rows = per_detector.into_iter().flatten().collect();
    Ok(result)
}

fn trial(
    channel: &ChannelSpec,
    constellation: &crate::model::Constellation,
    detectors: &[Detector],
    rho: f64,
    rng: &mut Rng,
) -> Result<Vec<Tally>> {
    let (model, record) = channel.draw_instance(constellation, rho, rng)?;
    detectors
        .iter()
        .map(|d| {
            let out = d.run(&model)?;
            Ok(Tally {
                errors: model.layout.symbol_errors(&out.s_hat, &record.s_true) as u64,
                nodes: out.visited_nodes,
                kr: out.k_r as u64,
                kr0: u64::from(out.k_r == 0),
            })
        })
        .collect()
}
