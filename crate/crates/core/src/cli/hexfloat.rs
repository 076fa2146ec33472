//! Exact text encoding of `f64` values as C99 hex-float literals
//! (`-0x1.8p+1`), plus `inf`, `-inf` and `nan`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Shortest exact hex-float spelling of `x`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, -1022) } else { (1, biased - 1023) };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Accepts hex-float literals, `inf`/`-inf`/`nan`, and plain decimals.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    match t {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let body = t.trim_start_matches(['+', '-']);
    if body.starts_with("0x") || body.starts_with("0X") {
        let v = hexf_parse::parse_hexf64(t, false).map_err(|e| format!("bad hex float '{t}': {e}"))?;
        // The parser drops the sign of zero.
        return Ok(if t.starts_with('-') { -v.abs() } else { v });
    }
    t.parse::<f64>().map_err(|_| format!("bad number '{t}'"))
}

/// An `f64` that serializes as a hex-float string and deserializes from
/// either a string or a JSON number.
#[derive(Debug, Clone, Copy)]
pub struct Hex(pub f64);

impl PartialEq for Hex {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Serialize for Hex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_hex(self.0))
    }
}

impl<'de> Deserialize<'de> for Hex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Hex(v)),
            Raw::Text(t) => parse_number(&t).map(Hex).map_err(serde::de::Error::custom),
        }
    }
}

pub fn hex_vec(v: &[f64]) -> Vec<Hex> {
    v.iter().map(|&x| Hex(x)).collect()
}

pub fn unhex(v: &[Hex]) -> Vec<f64> {
    v.iter().map(|h| h.0).collect()
}
