//! Damped least squares and the fitting workflows built on it.

mod bet;
mod lsq;
mod salts;
mod sensor;

pub use bet::{fit_bet, BetFit, DEFAULT_BET_RANGE};
pub use lsq::{finite_difference_jacobian, least_squares, FitProblem, FitReport, LsqOptions};
pub use salts::{load_fixed_points, load_fixed_points_path};
pub use sensor::{
    calibrate_sensor, CalibrationDataset, CalibrationOutcome, CalibrationPoint, DatasetMetadata,
    FitParam, ParameterMask,
};
