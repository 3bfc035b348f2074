//! Numeric payloads stored in `num` slots.
//!
//! Documents are generic over the number representation so the same edit
//! algebra can run over binary floats or exact rationals.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// A number type usable as the payload of [`Value::Number`](crate::document::Value::Number).
///
/// Conversions to and from text must be strict and round-trip: for every
/// finite value `x`, `parse_decimal(&x.render()) == Some(x)`.
pub trait Scalar: Num + Clone + PartialEq + Debug + Send + Sync + 'static {
    /// Parses the entire string as a number, rejecting anything else
    /// (leading/trailing whitespace, signs other than a leading `-`, exponents,
    /// `inf`, `NaN`).
    fn parse_decimal(text: &str) -> Option<Self>;

    /// Shortest text form that parses back to the same value.
    fn render(&self) -> String;

    /// Lossy view used when exporting to JSON.
    fn to_f64(&self) -> f64;
}

/// Matches `-?[0-9]+(\.[0-9]+)?` and returns the (negative, integer, fraction) parts.
fn split_decimal(text: &str) -> Option<(bool, &str, &str)> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = match body.split_once('.') {
        Some((int, frac)) => {
            if frac.is_empty() {
                return None;
            }
            (int, frac)
        }
        None => (body, ""),
    };
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || !digits(int) || !digits(frac) {
        return None;
    }
    Some((negative, int, frac))
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn parse_decimal(text: &str) -> Option<Self> {
                split_decimal(text)?;
                text.parse::<$t>().ok().filter(|v| v.is_finite())
            }

            fn render(&self) -> String {
                // `Display` for floats is the shortest round-trip form and never
                // uses exponent notation.
                if *self == 0.0 {
                    // normalise -0
                    "0".to_string()
                } else {
                    self.to_string()
                }
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

/// Exact rationals. Terminating fractions render as decimals; others render as
/// `numer/denom`, which `parse_decimal` also accepts so text stays lossless.
impl Scalar for Ratio<i64> {
    fn parse_decimal(text: &str) -> Option<Self> {
        if let Some((numer, denom)) = text.split_once('/') {
            let (neg, n, f) = split_decimal(numer)?;
            if !f.is_empty() {
                return None;
            }
            let (dneg, d, df) = split_decimal(denom)?;
            if dneg || !df.is_empty() {
                return None;
            }
            let n: i64 = n.parse().ok()?;
            let d: i64 = d.parse().ok()?;
            if d == 0 {
                return None;
            }
            let r = Ratio::new(n, d);
            return Some(if neg { -r } else { r });
        }
        let (neg, int, frac) = split_decimal(text)?;
        let scale = 10i64.checked_pow(u32::try_from(frac.len()).ok()?)?;
        let int: i64 = int.parse().ok()?;
        let frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        let numer = int.checked_mul(scale)?.checked_add(frac_val)?;
        let r = Ratio::new(numer, scale);
        Some(if neg { -r } else { r })
    }

    fn render(&self) -> String {
        let mut denom = *self.denom();
        let mut twos = 0u32;
        let mut fives = 0u32;
        while denom % 2 == 0 {
            denom /= 2;
            twos += 1;
        }
        while denom % 5 == 0 {
            denom /= 5;
            fives += 1;
        }
        if denom != 1 {
            return format!("{}/{}", self.numer(), self.denom());
        }
        let places = twos.max(fives);
        let int = self.to_integer();
        if places == 0 {
            return int.to_string();
        }
        let scaled = match 10i64
            .checked_pow(places)
            .and_then(|s| self.numer().checked_mul(s / self.denom()))
        {
            Some(s) => s,
            None => return format!("{}/{}", self.numer(), self.denom()),
        };
        let frac = (scaled - int * 10i64.pow(places)).abs();
        let sign = if self.is_negative() && int.is_zero() { "-" } else { "" };
        format!("{sign}{int}.{frac:0width$}", width = places as usize)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
