//! Number formatting for CSV and text output.

/// Formats with `digits` significant digits, trimming trailing zeros.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() { "NA".to_string() } else { format!("{v}") };
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    let parsed: f64 = s.parse().expect("valid float");
    let exp = parsed.abs().log10().floor() as i32;
    if !(-5..16).contains(&exp) {
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        return format!("{}e{exponent}", trim_zeros(mantissa.to_string()));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(format!("{:.*}", decimals, parsed))
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.000123456789, 6), "0.000123457");
        assert_eq!(format_sig(1234.5678, 6), "1234.57");
        assert_eq!(format_sig(-2.5, 12), "-2.5");
        assert_eq!(format_sig(1e-9, 6), "1e-9");
        assert_eq!(format_sig(-1.23456789e-12, 4), "-1.235e-12");
        assert_eq!(format_sig(f64::NAN, 12), "NA");
    }
}
