//! Canonical scalar formatting: C's `%.17g`.
//!
//! Seventeen significant digits round-trip every finite `f64`, and the `%g`
//! styling (fixed or scientific, trailing zeros stripped) keeps small
//! integers and simple fractions readable. Every serialized scalar in this
//! workspace — dataset files, trace CSVs, verification reports — goes
//! through [`g17`] so outputs are byte-stable.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

/// Format `x` exactly as C's `printf("%.17g", x)` would.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return String::from("nan");
    }
    if x.is_infinite() {
        return String::from(if x < 0.0 { "-inf" } else { "inf" });
    }
    if x == 0.0 {
        return String::from(if x.is_sign_negative() { "-0" } else { "0" });
    }

    // 17 significant digits in normalized scientific form: d.{16 digits}e{exp}.
    let mut sci = String::new();
    write!(sci, "{:.16e}", x).expect("formatting f64 cannot fail");
    let (mant, exp_str) = sci.split_once('e').expect("{:.16e} always contains 'e'");
    let exp: i32 = exp_str.parse().expect("exponent is a valid integer");
    let neg = mant.starts_with('-');
    let digits: Vec<u8> = mant
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .collect();
    debug_assert_eq!(digits.len(), 17);

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp < -4 || exp >= 17 {
        // Scientific form: strip trailing zeros of the fractional mantissa.
        let mut last = digits.len();
        while last > 1 && digits[last - 1] == b'0' {
            last -= 1;
        }
        out.push(digits[0] as char);
        if last > 1 {
            out.push('.');
            for &d in &digits[1..last] {
                out.push(d as char);
            }
        }
        let (sign, mag) = if exp < 0 { ('-', -exp) } else { ('+', exp) };
        write!(out, "e{sign}{mag:02}").expect("formatting cannot fail");
    } else if exp >= 0 {
        // Fixed form, decimal point inside or right after the digit block.
        let point = exp as usize + 1;
        for &d in &digits[..point] {
            out.push(d as char);
        }
        let mut last = digits.len();
        while last > point && digits[last - 1] == b'0' {
            last -= 1;
        }
        if last > point {
            out.push('.');
            for &d in &digits[point..last] {
                out.push(d as char);
            }
        }
    } else {
        // Fixed form below 1: leading zeros between the point and digits.
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        let mut last = digits.len();
        while last > 1 && digits[last - 1] == b'0' {
            last -= 1;
        }
        for &d in &digits[..last] {
            out.push(d as char);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf_reference() {
        // Frozen against C printf("%.17g", x).
        let cases: &[(f64, &str)] = &[
            (0.0, "0"),
            (-0.0, "-0"),
            (0.5, "0.5"),
            (1.0, "1"),
            (-1.5, "-1.5"),
            (0.1, "0.10000000000000001"),
            (1.0 / 3.0, "0.33333333333333331"),
            (1e-17, "1.0000000000000001e-17"),
            (1e300, "1.0000000000000001e+300"),
            (123456.789, "123456.789"),
            (5e-324, "4.9406564584124654e-324"),
            (1e16, "10000000000000000"),
            (1e17, "1e+17"),
            (0.0001, "0.0001"),
            (0.00001, "1.0000000000000001e-05"),
            (25.0, "25"),
            (2.0 / 3.0, "0.66666666666666663"),
            (1234.5, "1234.5"),
            (-1e18, "-1e+18"),
            (0.8833108082136426, "0.88331080821364261"),
            (1.3649922974572282e-5, "1.3649922974572282e-05"),
            (3.0, "3"),
            (100.0, "100"),
        ];
        for &(x, want) in cases {
            assert_eq!(g17(x), want, "formatting {x:?}");
        }
    }

    #[test]
    fn round_trips_exactly() {
        let samples = [
            1.0,
            -0.1,
            core::f64::consts::PI,
            1e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            f64::MAX,
            5e-324,
            0.7071067811865476,
        ];
        for &x in &samples {
            let s = g17(x);
            let back: f64 = s.parse().expect("g17 output parses as f64");
            assert_eq!(back.to_bits(), x.to_bits(), "round-trip of {x:?} via {s}");
        }
    }

    #[test]
    fn nonfinite_named() {
        assert_eq!(g17(f64::NAN), "nan");
        assert_eq!(g17(f64::INFINITY), "inf");
        assert_eq!(g17(f64::NEG_INFINITY), "-inf");
    }
}
