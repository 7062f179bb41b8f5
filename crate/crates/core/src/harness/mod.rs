//! Experiment orchestration: configuration, sweeps, MAC and calibration
//! runs, and CSV/SVG output.

mod config;
mod output;
mod sweep;
mod verify;

pub use config::{
    CalibrationSection, DetectorConfig, DetectorKind, ExperimentConfig, InitialPoint, MacDecoder,
    MacSection, OutputSection, Scenario,
};
pub use output::{emit_csv, emit_svg, load_csv, mac_rows, parse_csv, to_csv, to_svg, CSV_HEADER};
pub use sweep::{run_sweep, Detection, Detector, SweepResult, SweepRow};
pub use verify::{verify_oracles, VerifyCase, VerifyOutcome};

use crate::error::{Error, Result};
use crate::lsr::{calibrate, ThresholdTable};
use crate::mac::{mac_lsr, mac_sd, InfoSetSpec, MacCurve};

/// MAC curve of the configured decoder for `spec`.
pub fn run_mac(config: &ExperimentConfig, spec: InfoSetSpec) -> Result<MacCurve> {
    let mac = config.mac_config()?;
    let section = config.mac.clone().unwrap_or_default();
    let spec = match (spec, section.epsilon) {
        (InfoSetSpec::RadiusLi { .. }, Some(epsilon)) => InfoSetSpec::RadiusLi { epsilon },
        _ => spec,
    };
    match section.decoder {
        MacDecoder::Sd => mac_sd(spec, &mac),
        MacDecoder::Lsr => {
            let path = config.resolve(section.table.as_deref().expect("validated"));
            mac_lsr(spec, &mac, &ThresholdTable::load(&path)?)
        }
    }
}

/// Label of a MAC curve in CSV and plots.
pub fn mac_label(config: &ExperimentConfig, spec: InfoSetSpec) -> String {
    let decoder = match config.mac.as_ref().map(|m| m.decoder).unwrap_or_default() {
        MacDecoder::Sd => "MAC-SD",
        MacDecoder::Lsr => "MAC-LSR",
    };
    format!("{decoder}({spec})")
}

/// Calibrates the configured table and writes it to `output.table` when set.
pub fn run_calibration(config: &ExperimentConfig) -> Result<ThresholdTable> {
    let table = calibrate(&config.calibration_config()?)?;
    if let Some(path) = &config.output.table {
        table.save(&config.resolve(path))?;
    }
    Ok(table)
}

/// Exit status of the command-line tool for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        1
    } else {
        2
    }
}
