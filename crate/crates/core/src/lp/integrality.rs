use serde::{Deserialize, Serialize};

pub const DEFAULT_INTEGRALITY_TOLERANCE: f64 = 1e-6;

/// How far a point is from the integer lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub is_integral: bool,
    pub max_fractional_deviation: f64,
    /// Coordinates whose deviation exceeds the tolerance.
    pub fractional_indices: Vec<usize>,
}

/// Measures `|x_i - round(x_i)|` for every coordinate.
pub fn check_integrality(point: &[f64], tolerance: f64) -> IntegralityReport {
    debug_assert!(tolerance > 0.0);
    let mut max_dev = 0.0f64;
    let mut fractional = Vec::new();
    for (i, &v) in point.iter().enumerate() {
        let dev = (v - v.round()).abs();
        max_dev = max_dev.max(dev);
        if dev > tolerance {
            fractional.push(i);
        }
    }
    IntegralityReport {
        is_integral: max_dev <= tolerance,
        max_fractional_deviation: max_dev,
        fractional_indices: fractional,
    }
}
