//! Locale-independent float formatting.

/// Shortest decimal string that parses back to the same `f64`.
///
/// Plain notation for magnitudes in `[1e-4, 1e15)`, scientific otherwise.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-6, 2.5e-300, 123456.789, -7.0e20, 5e-324, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(1e-6), "1e-6");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "-0");
    }
}
