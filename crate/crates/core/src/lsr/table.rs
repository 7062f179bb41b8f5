use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelModel, ModulationSpec, RealModel};

pub const TABLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationMethod {
    Exact,
    Suboptimal,
    HighSnrApprox,
}

impl fmt::Display for CalibrationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalibrationMethod::Exact => "exact",
            CalibrationMethod::Suboptimal => "suboptimal",
            CalibrationMethod::HighSnrApprox => "high-snr-approx",
        })
    }
}

/// The configuration a table was calibrated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableMeta {
    pub modulation: ModulationSpec,
    pub k: usize,
    pub l: usize,
    pub channel_model: ChannelModel,
    pub trials: u64,
    pub seed: u64,
}

impl TableMeta {
    /// Rejects a table built for a different system. Trial count and seed
    /// are provenance only.
    pub fn check_compatible(&self, other: &TableMeta) -> Result<()> {
        let mut diffs = Vec::new();
        if self.modulation != other.modulation {
            diffs.push(format!(
                "modulation {}-{} vs {}-{}",
                self.modulation.order,
                self.modulation.kind,
                other.modulation.order,
                other.modulation.kind
            ));
        }
        if self.k != other.k {
            diffs.push(format!("K {} vs {}", self.k, other.k));
        }
        if self.l != other.l {
            diffs.push(format!("L {} vs {}", self.l, other.l));
        }
        if self.channel_model != other.channel_model {
            diffs.push(format!(
                "channel {} vs {}",
                self.channel_model, other.channel_model
            ));
        }
        if diffs.is_empty() {
            Ok(())
        } else {
            Err(Error::TableMismatch(diffs.join(", ")))
        }
    }
}

/// Normalized reliability thresholds `η_k/ρ` per total-SNR grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub snr_grid_db: Vec<f64>,
    /// `eta_over_rho[i][k]`; `+∞` means symbol `k` is never relied upon.
    pub eta_over_rho: Vec<Vec<f64>>,
    pub method: CalibrationMethod,
    pub meta: TableMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Cell {
    Number(f64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    format_version: u32,
    method: CalibrationMethod,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    channel_model: ChannelModel,
    snr_grid_db: Vec<f64>,
    eta_over_rho: Vec<Vec<Cell>>,
    trials: u64,
    seed: u64,
    modulation: ModulationSpec,
}

impl ThresholdTable {
    pub fn new(
        snr_grid_db: Vec<f64>,
        eta_over_rho: Vec<Vec<f64>>,
        method: CalibrationMethod,
        meta: TableMeta,
    ) -> Result<Self> {
        if snr_grid_db.is_empty() {
            return Err(Error::Config(
                "threshold table needs at least one SNR point".into(),
            ));
        }
        if snr_grid_db.iter().any(|v| !v.is_finite())
            || snr_grid_db.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(
                "threshold table SNR grid must be finite and strictly ascending".into(),
            ));
        }
        if eta_over_rho.len() != snr_grid_db.len() {
            return Err(Error::Config(format!(
                "{} threshold rows for {} grid points",
                eta_over_rho.len(),
                snr_grid_db.len()
            )));
        }
        for row in &eta_over_rho {
            if row.len() != meta.k {
                return Err(Error::Config(format!(
                    "threshold row has {} entries, K = {}",
                    row.len(),
                    meta.k
                )));
            }
            if row.iter().any(|v| v.is_nan() || *v < 0.0) {
                return Err(Error::Config("thresholds must be nonnegative".into()));
            }
        }
        Ok(Self {
            snr_grid_db,
            eta_over_rho,
            method,
            meta,
        })
    }

    /// Thresholds of the grid point nearest to `snr_total_db` (the lower
    /// point on an exact midpoint).
    pub fn lookup(&self, snr_total_db: f64) -> &[f64] {
        let (first, last) = (
            self.snr_grid_db[0],
            self.snr_grid_db[self.snr_grid_db.len() - 1],
        );
        let snr_total_db = snr_total_db.clamp(first, last);
        let mut best = 0;
        for (i, g) in self.snr_grid_db.iter().enumerate() {
            if (g - snr_total_db).abs() < (self.snr_grid_db[best] - snr_total_db).abs() {
                best = i;
            }
        }
        &self.eta_over_rho[best]
    }

    /// Checks the table against the dimensions and alphabet of `model`.
    pub fn check_model(&self, model: &RealModel) -> Result<()> {
        let spec = model.constellation.spec();
        if spec != self.meta.modulation
            || model.layout.symbols() != self.meta.k
            || model.y.len() != 2 * self.meta.l
        {
            return Err(Error::TableMismatch(format!(
                "table is for K={}, L={}, {}-{}; model has K={}, L={}, {}-{}",
                self.meta.k,
                self.meta.l,
                self.meta.modulation.order,
                self.meta.modulation.kind,
                model.layout.symbols(),
                model.y.len() / 2,
                spec.order,
                spec.kind
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        let cell = |v: f64| {
            if v.is_infinite() {
                Cell::Text("inf".into())
            } else {
                Cell::Number(v)
            }
        };
        let file = TableFile {
            format_version: TABLE_FORMAT_VERSION,
            method: self.method,
            k: self.meta.k,
            l: self.meta.l,
            channel_model: self.meta.channel_model,
            snr_grid_db: self.snr_grid_db.clone(),
            eta_over_rho: self
                .eta_over_rho
                .iter()
                .map(|row| row.iter().map(|&v| cell(v)).collect())
                .collect(),
            trials: self.meta.trials,
            seed: self.meta.seed,
            modulation: self.meta.modulation,
        };
        toml::to_string(&file).expect("threshold table serializes")
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let file: TableFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        if file.format_version != TABLE_FORMAT_VERSION {
            return Err(parse_err(format!(
                "unsupported format_version {}",
                file.format_version
            )));
        }
        let mut rows = Vec::with_capacity(file.eta_over_rho.len());
        for row in file.eta_over_rho {
            let mut out = Vec::with_capacity(row.len());
            for c in row {
                out.push(match c {
                    Cell::Number(v) => v,
                    Cell::Text(t) if t == "inf" => f64::INFINITY,
                    Cell::Text(t) => {
                        return Err(parse_err(format!("unexpected threshold value {t:?}")))
                    }
                });
            }
            rows.push(out);
        }
        let meta = TableMeta {
            modulation: file.modulation,
            k: file.k,
            l: file.l,
            channel_model: file.channel_model,
            trials: file.trials,
            seed: file.seed,
        };
        Self::new(file.snr_grid_db, rows, file.method, meta).map_err(|e| parse_err(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_toml())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }
}

/// Writes `contents` to `path`, creating missing parent directories.
pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}
