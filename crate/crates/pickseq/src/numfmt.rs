//! Compact float formatting for CSV output: up to six significant digits,
//! trailing zeros stripped (printf `%g` style).

/// Formats with at most 6 significant digits.
pub fn g6(x: f64) -> String {
    format_sig(x, 6)
}

/// Formats with at most `sig` significant digits, switching to scientific
/// notation outside [1e-4, 1e6) like `%g` does.
pub fn format_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        let s = format!("{:.*e}", sig - 1, x);
        trim_exp(&s)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn trim_exp(s: &str) -> String {
    // "1.200000e3" -> "1.2e3"
    match s.split_once('e') {
        Some((mant, exp)) => format!("{}e{}", trim_zeros(mant), exp),
        None => s.to_string(),
    }
}
