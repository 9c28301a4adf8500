//! Decimal formatting for CSV output.
//!
//! All numeric fields are serialized with 12 significant digits, so file
//! round-trips lose nothing beyond that documented precision. Disconnected
//! pairs are written with the sentinel `inf`.

/// Significant digits used by every writer in this crate.
pub const CSV_SIG_DIGITS: usize = 12;

/// Formats `x` with [`CSV_SIG_DIGITS`] significant digits.
///
/// Positional notation is used for moderate exponents, scientific notation
/// otherwise; trailing zeros are trimmed. Infinities map to the in-band
/// sentinels `inf` / `-inf`.
pub fn fmt_num(x: f64) -> String {
    fmt_sig(x, CSV_SIG_DIGITS)
}

/// Parses a numeric CSV field written by [`fmt_num`], including the
/// `inf` sentinels.
pub fn parse_num(s: &str) -> Option<f64> {
    let t = s.trim();
    match t {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => t.parse::<f64>().ok().filter(|v| !v.is_nan()),
    }
}

fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }

    // Rounded scientific form "d.dd...e±ee" gives the significant digits and
    // the decimal exponent; the rest is string surgery, exact by construction.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp_str.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), sig);

    let body = if exp < -4 || exp >= sig as i32 + 3 {
        let trimmed = digits.trim_end_matches('0');
        let head = &trimmed[..1];
        let tail = &trimmed[1..];
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    } else if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= sig {
            format!("{}{}", digits, "0".repeat(int_len - sig))
        } else {
            let frac = digits[int_len..].trim_end_matches('0');
            if frac.is_empty() {
                digits[..int_len].to_string()
            } else {
                format!("{}.{}", &digits[..int_len], frac)
            }
        }
    } else {
        let frac = digits.trim_end_matches('0');
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), frac)
    };

    if neg {
        format!("-{body}")
    } else {
        body
    }
}
