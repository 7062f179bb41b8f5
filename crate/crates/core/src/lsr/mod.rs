//! Lossless size reduction: reliability thresholds, their calibration, and
//! the reduced sphere decoder.

mod calibrate;
mod reduce;
mod table;
mod threshold;

pub use calibrate::{
    calibrate, calibrate_exact, calibrate_high_snr, calibrate_suboptimal, collect_calibration_data,
    exact_threshold, ml_decision, table_from_data, CalibrationConfig, CalibrationData,
    CalibrationSample, MlOracle, AUTO_BRUTE_FORCE_LIMIT,
};
pub use reduce::{
    linear_point, lsr_detect, lsr_detect_with_set, reduce_problem, reliable_set, ReducedProblem,
    ReliableSet,
};
pub(crate) use table::write_file;
pub use table::{CalibrationMethod, TableMeta, ThresholdTable, TABLE_FORMAT_VERSION};
pub use threshold::{conditional_qam_ser, threshold_high_snr, threshold_suboptimal, EmpiricalCdf};
