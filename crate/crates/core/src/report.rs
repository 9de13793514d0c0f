//! Number formatting for CSV output.

/// Shortest `%g`-style rendering of `x` with at most `digits` significant
/// digits. Trailing zeros are dropped; exponents below -5 or at least
/// `digits` switch to scientific notation.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_significant as f;

    #[test]
    fn fixed_and_scientific() {
        assert_eq!(f(0.25, 12), "0.25");
        assert_eq!(f(1.0, 15), "1");
        assert_eq!(f(-3.5, 12), "-3.5");
        assert_eq!(f(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(f(2.0 / 3.0, 15), "0.666666666666667");
        assert_eq!(f(1.5e-7, 12), "1.5e-7");
        assert_eq!(f(123456.0, 3), "1.23e5");
        assert_eq!(f(0.0, 12), "0");
    }

    #[test]
    fn rounding_carries_into_exponent() {
        assert_eq!(f(9.9999999, 3), "10");
        assert_eq!(f(0.99999999999999, 12), "1");
    }
}
