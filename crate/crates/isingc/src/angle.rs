//! Degree arithmetic helpers shared across the compiler.

/// Tolerance (degrees) below which a tracked angle counts as zero.
pub const ANGLE_TOL_DEG: f64 = 1e-6;

/// Coincidence tolerance (seconds) for merging simultaneous pulses.
pub const TIME_MERGE_TOL_S: f64 = 1e-12;

/// Reduce an angle into `[0, 360)`.
pub fn norm_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    // rem_euclid can return 360.0 when `a` is a tiny negative number.
    if r >= 360.0 {
        r - 360.0
    } else {
        r
    }
}

/// True when `a` is within [`ANGLE_TOL_DEG`] of zero modulo 360.
pub fn is_zero_deg(a: f64) -> bool {
    let r = norm_deg(a);
    r < ANGLE_TOL_DEG || 360.0 - r < ANGLE_TOL_DEG
}

pub fn deg_to_rad(a: f64) -> f64 {
    a * std::f64::consts::PI / 180.0
}

/// Round a duration in seconds to microseconds with 3 decimals (1 ns grid).
pub fn round_us3(seconds: f64) -> f64 {
    (seconds * 1e6 * 1000.0).round() / 1000.0
}

/// Round an angle to 3 decimals of a degree.
pub fn round_deg3(deg: f64) -> f64 {
    (deg * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_wraps_into_range() {
        assert_eq!(norm_deg(360.0), 0.0);
        assert_eq!(norm_deg(-90.0), 270.0);
        assert_eq!(norm_deg(725.0), 5.0);
        assert!(norm_deg(-1e-18) < 360.0);
    }

    #[test]
    fn zero_test_is_tolerant_on_both_sides() {
        assert!(is_zero_deg(0.0));
        assert!(is_zero_deg(1e-9));
        assert!(is_zero_deg(360.0 - 1e-9));
        assert!(!is_zero_deg(0.1));
    }
}
