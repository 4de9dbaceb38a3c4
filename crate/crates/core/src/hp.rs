//! High-precision float helpers.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

/// Mantissa bits used when the caller does not ask for anything else.
pub const DEFAULT_PRECISION: u32 = 256;

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `cot(pi * q)` for rational `q`, computed with guard bits.
pub fn cot_pi_rational(q: &Rational, prec: u32) -> Float {
    let wp = prec + 32;
    let x = Float::with_val(wp, q) * pi(wp);
    Float::with_val(prec, x.cot())
}

pub fn cot(x: &Float) -> Float {
    Float::with_val(x.prec(), x.cot_ref())
}

pub fn from_rational(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

/// Parses `"4"`, `"4/3"` or a finite decimal such as `"2.5"` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: rug::Integer = n.trim().parse().ok()?;
        let d: rug::Integer = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::from((n, d)));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: rug::Integer = format!("{int}{frac}").parse().ok()?;
    let scale = rug::Integer::from(10).pow(frac.len() as u32);
    let q = Rational::from((digits, scale));
    Some(if neg { -q } else { q })
}

/// `q mod m` in `[0, m)` for positive `m`.
pub fn rem_euclid(q: &Rational, m: u32) -> Rational {
    let quot = Rational::from(q / m).floor();
    Rational::from(q - quot * m)
}

/// `p / (p - 1)`; callers guarantee `p > 1`.
pub fn conjugate(p: &Rational) -> Rational {
    let pm1 = Rational::from(p - 1u32);
    Rational::from(p / &pm1)
}
