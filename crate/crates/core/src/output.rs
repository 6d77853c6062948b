//! Locale-independent number formatting for CSV output.

/// 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn roundtrips_exactly() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            assert_eq!(super::num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(super::num(1.5), "1.5000000000000000e0");
    }
}
