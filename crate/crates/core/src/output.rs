//! Fixed-width float formatting shared by every CSV/JSON writer.

/// Twelve significant digits in scientific notation. The format is fixed so
/// identical runs produce identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Parses a value written by [`num`].
pub fn parse_num(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(2.0 / std::f64::consts::PI), "6.36619772368e-1");
        assert_eq!(num(0.0), "0.00000000000e0");
        assert_eq!(num(-1.5), "-1.50000000000e0");
    }

    #[test]
    fn round_trip_to_12_digits() {
        let x = 0.292893218813452;
        let back = parse_num(&num(x)).unwrap();
        assert!((back - x).abs() < 1e-12);
    }
}
