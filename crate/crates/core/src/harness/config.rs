use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detectors::{RadiusKind, RadiusPolicy};
use crate::error::{Error, Result};
use crate::lsr::{CalibrationConfig, CalibrationMethod, MlOracle};
use crate::mac::MacConfig;
use crate::model::{ChannelSpec, Equalizer, ModulationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    FlatMimo,
    FreqSelective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Ml,
    Zf,
    Mmse,
    Mrc,
    Babai,
    Sd,
    Lsr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPoint {
    Zf,
    Mmse,
}

impl From<InitialPoint> for Equalizer {
    fn from(p: InitialPoint) -> Self {
        match p {
            InitialPoint::Zf => Equalizer::Zf,
            InitialPoint::Mmse => Equalizer::Mmse,
        }
    }
}

/// One detector of a sweep and its options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Sphere-decoder radius policy for `sd` and `lsr`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_growth: Option<f64>,
    /// Linear initial point for `lsr`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialPoint>,
    /// Threshold table for `lsr`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Multiplier applied to the table thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            label: None,
            radius: None,
            epsilon: None,
            restart_growth: None,
            initial: None,
            table: None,
            scale: None,
        }
    }

    pub fn policy(&self) -> RadiusPolicy {
        let mut p = match self.radius.unwrap_or(RadiusKind::LatticeDependent) {
            RadiusKind::LatticeIndependent => RadiusPolicy::fincke_pohst(),
            RadiusKind::LatticeDependent => RadiusPolicy::schnorr_euchner(),
        };
        if let Some(e) = self.epsilon {
            p.epsilon = e;
        }
        if let Some(g) = self.restart_growth {
            p.restart_growth = g;
        }
        p
    }

    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let mode = match self.policy().kind {
            RadiusKind::LatticeIndependent => "FP-SD",
            RadiusKind::LatticeDependent => "SE-SD",
        };
        match self.kind {
            DetectorKind::Ml => "ML".into(),
            DetectorKind::Zf => "ZF".into(),
            DetectorKind::Mmse => "MMSE".into(),
            DetectorKind::Mrc => "MRC".into(),
            DetectorKind::Babai => "Babai".into(),
            DetectorKind::Sd => mode.into(),
            DetectorKind::Lsr => {
                let init = match self.initial.unwrap_or(InitialPoint::Mmse) {
                    InitialPoint::Zf => "ZF",
                    InitialPoint::Mmse => "MMSE",
                };
                format!("LSR-{mode}({init})")
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let label = self.display_label();
        let tree = matches!(self.kind, DetectorKind::Sd | DetectorKind::Lsr);
        if !tree
            && (self.radius.is_some() || self.epsilon.is_some() || self.restart_growth.is_some())
        {
            return Err(Error::Config(format!(
                "detector {label}: radius options apply to sd and lsr only"
            )));
        }
        if self.kind != DetectorKind::Lsr
            && (self.initial.is_some() || self.table.is_some() || self.scale.is_some())
        {
            return Err(Error::Config(format!(
                "detector {label}: initial, table and scale apply to lsr only"
            )));
        }
        if self.kind == DetectorKind::Lsr && self.table.is_none() {
            return Err(Error::Config(format!(
                "detector {label}: lsr needs a threshold table"
            )));
        }
        if let Some(s) = self.scale {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config(format!(
                    "detector {label}: scale must be finite and nonnegative"
                )));
            }
        }
        if tree {
            self.policy().validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub initial: InitialPoint,
    #[serde(default = "default_method")]
    pub method: CalibrationMethod,
    /// Defaults to the sweep grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_grid_db: Option<Vec<f64>>,
    /// Defaults to the sweep trial count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default = "default_min_events")]
    pub min_error_events: u64,
    #[serde(default = "default_scale")]
    pub high_snr_scale: f64,
    #[serde(default)]
    pub oracle: MlOracle,
}

fn default_method() -> CalibrationMethod {
    CalibrationMethod::Exact
}
fn default_min_events() -> u64 {
    10
}
fn default_scale() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacDecoder {
    #[default]
    Sd,
    Lsr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacSection {
    #[serde(default)]
    pub decoder: MacDecoder,
    #[serde(default = "default_outer")]
    pub outer: usize,
    #[serde(default = "default_inner")]
    pub inner: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_occupancy")]
    pub min_bin_occupancy: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Threshold table for the `lsr` decoder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

fn default_outer() -> usize {
    200
}
fn default_inner() -> usize {
    10_000
}
fn default_bins() -> usize {
    16
}
fn default_occupancy() -> usize {
    32
}

impl Default for MacSection {
    fn default() -> Self {
        Self {
            decoder: MacDecoder::Sd,
            outer: default_outer(),
            inner: default_inner(),
            bins: default_bins(),
            min_bin_occupancy: default_occupancy(),
            epsilon: None,
            table: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

/// A complete experiment as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L_c", default, skip_serializing_if = "Option::is_none")]
    pub l_c: Option<usize>,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub modulation: ModulationSpec,
    #[serde(default)]
    pub detectors: Vec<DetectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac: Option<MacSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory relative paths are resolved against; not part of the file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// Resolves `p` against the directory of the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn channel(&self) -> Result<ChannelSpec> {
        match self.scenario {
            Scenario::FlatMimo => {
                if self.l_c.is_some() {
                    return Err(Error::Config(
                        "L_c applies to the freq-selective scenario only".into(),
                    ));
                }
                Ok(ChannelSpec::Flat {
                    l: self.l,
                    k: self.k,
                })
            }
            Scenario::FreqSelective => {
                let taps = self
                    .l_c
                    .ok_or_else(|| Error::Config("freq-selective scenario needs L_c".into()))?;
                let spec = ChannelSpec::FreqSelective { taps, k: self.k };
                if spec.receive_dim() != self.l {
                    return Err(Error::Config(format!(
                        "zero-padded block of K={} over L_c={} taps gives L={}, config says L={}",
                        self.k,
                        taps,
                        spec.receive_dim(),
                        self.l
                    )));
                }
                Ok(spec)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel()?.validate()?;
        self.modulation.build()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        check_grid(&self.snr_grid_db)?;
        for d in &self.detectors {
            d.validate()?;
        }
        let mut labels: Vec<String> = self
            .detectors
            .iter()
            .map(DetectorConfig::display_label)
            .collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "duplicate detector label {:?}",
                w[0]
            )));
        }
        if let Some(c) = &self.calibration {
            if let Some(g) = &c.snr_grid_db {
                check_grid(g)?;
            }
        }
        if let Some(m) = &self.mac {
            if m.decoder == MacDecoder::Lsr && m.table.is_none() {
                return Err(Error::Config(
                    "mac decoder lsr needs a threshold table".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn calibration_config(&self) -> Result<CalibrationConfig> {
        let section = self
            .calibration
            .as_ref()
            .ok_or_else(|| Error::Config("config has no [calibration] section".into()))?;
        let grid = section
            .snr_grid_db
            .clone()
            .unwrap_or_else(|| self.snr_grid_db.clone());
        let mut c = CalibrationConfig::new(
            self.channel()?,
            self.modulation,
            section.initial.into(),
            grid,
        );
        c.method = section.method;
        c.trials = section.trials.unwrap_or(self.trials);
        c.seed = self.seed;
        c.min_error_events = section.min_error_events;
        c.high_snr_scale = section.high_snr_scale;
        c.oracle = section.oracle;
        c.validate()?;
        Ok(c)
    }

    pub fn mac_config(&self) -> Result<MacConfig> {
        let section = self.mac.clone().unwrap_or_default();
        let mut c = MacConfig::new(self.channel()?, self.modulation, self.snr_grid_db.clone());
        c.outer = section.outer;
        c.inner = section.inner;
        c.bins = section.bins;
        c.min_bin_occupancy = section.min_bin_occupancy;
        c.seed = self.seed;
        c.validate()?;
        Ok(c)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("SNR grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "SNR grid must be finite and strictly ascending".into(),
        ));
    }
    Ok(())
}
