//! Number formatting shared by the JSON reports.

use serde::Serializer;

/// Formats `x` with 12 significant digits: positional notation for
/// exponents in `[-5, 12)`, scientific otherwise. Non-finite values become
/// `"inf"`, `"-inf"` or `"nan"`.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000000".into();
    }
    let sci = format!("{x:.11e}");
    let (_, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn ser_sig12<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sig12(*x))
}

pub fn ser_sig12_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| sig12(x)))
}

pub fn ser_sig12_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&sig12(*v)),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.18872187554086717), "0.188721875541");
        assert_eq!(sig12(5.0), "5.00000000000");
        assert_eq!(sig12(-1234.5), "-1234.50000000");
        assert_eq!(sig12(1e-10), "1.00000000000e-10");
        assert_eq!(sig12(0.0), "0.00000000000");
        assert_eq!(sig12(f64::INFINITY), "inf");
    }
}
