//! Finitely supported exact sequences and float windows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::exact::PiGraded;

/// A doubly infinite sequence with finitely many nonzero entries.
///
/// Absent indices are exact zeros; zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteSeq {
    entries: BTreeMap<i64, PiGraded>,
}

impl FiniteSeq {
    pub fn zero() -> Self {
        FiniteSeq::default()
    }

    /// The unit impulse at `j`.
    pub fn delta(j: i64) -> Self {
        let mut s = FiniteSeq::zero();
        s.set(j, PiGraded::one());
        s
    }

    pub fn from_rationals<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut s = FiniteSeq::zero();
        for (n, q) in entries {
            s.add_at(n, &PiGraded::rational(q));
        }
        s
    }

    pub fn from_values<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (i64, PiGraded)>,
    {
        let mut s = FiniteSeq::zero();
        for (n, v) in entries {
            s.add_at(n, &v);
        }
        s
    }

    /// Overwrites entry `n`; storing zero removes it.
    pub fn set(&mut self, n: i64, v: PiGraded) {
        if v.is_zero() {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, v);
        }
    }

    pub fn add_at(&mut self, n: i64, v: &PiGraded) {
        let mut cur = self.entries.remove(&n).unwrap_or_default();
        cur += v;
        self.set(n, cur);
    }

    pub fn get(&self, n: i64) -> Option<&PiGraded> {
        self.entries.get(&n)
    }

    pub fn value(&self, n: i64) -> PiGraded {
        self.entries.get(&n).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &PiGraded)> {
        self.entries.iter().map(|(n, v)| (*n, v))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_set(&self) -> BTreeSet<i64> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest `r` with support inside `[-r, r]`.
    pub fn support_radius(&self) -> u64 {
        self.entries
            .keys()
            .map(|n| n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Entry-wise product; only the common support survives.
    pub fn pointwise_mul(&self, other: &FiniteSeq) -> FiniteSeq {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = FiniteSeq::zero();
        for (n, x) in &small.entries {
            if let Some(y) = large.entries.get(n) {
                out.set(*n, x * y);
            }
        }
        out
    }

    pub fn add(&self, other: &FiniteSeq) -> FiniteSeq {
        let mut out = self.clone();
        for (n, v) in &other.entries {
            out.add_at(*n, v);
        }
        out
    }

    pub fn sub(&self, other: &FiniteSeq) -> FiniteSeq {
        let mut out = self.clone();
        for (n, v) in &other.entries {
            out.add_at(*n, &-v);
        }
        out
    }

    pub fn scale(&self, q: &Rational) -> FiniteSeq {
        FiniteSeq::from_values(self.entries.iter().map(|(n, v)| (*n, v.scale(q))))
    }

    /// `(sum |a_n|^p)^(1/p)` evaluated at `prec` bits.
    pub fn lp_norm_hp(&self, p: f64, prec: u32) -> Result<Float> {
        check_exponent(p)?;
        let wp = prec + 16;
        let pf = Float::with_val(wp, p);
        let mut acc = Float::new(wp);
        for v in self.entries.values() {
            let x = v.to_float(wp).abs();
            acc += x.pow(&pf);
        }
        let inv = Float::with_val(wp, pf.recip_ref());
        Ok(Float::with_val(prec, acc.pow(&inv)))
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        Ok(self.lp_norm_hp(p, 128)?.to_f64())
    }

    /// Parses the `[[index, numerator, denominator], ...]` literal format.
    pub fn from_json(text: &str) -> Result<FiniteSeq> {
        let raw: Vec<(i64, i64, i64)> =
            serde_json::from_str(text).map_err(|e| Error::SequenceFile(e.to_string()))?;
        let mut seen = BTreeSet::new();
        let mut out = FiniteSeq::zero();
        for (n, num, den) in raw {
            if !seen.insert(n) {
                return Err(Error::SequenceFile(format!("duplicate index {n}")));
            }
            if den <= 0 {
                return Err(Error::SequenceFile(format!(
                    "index {n}: denominator must be positive, got {den}"
                )));
            }
            out.add_at(n, &PiGraded::rational(Rational::from((num, den))));
        }
        Ok(out)
    }

    /// Writes the literal format; fails if an entry is not a small rational.
    pub fn to_json(&self) -> Result<String> {
        let mut rows = Vec::with_capacity(self.len());
        for (n, v) in &self.entries {
            let q = match v.homogeneous_grade() {
                Some(0) => v.coefficient(0),
                _ => {
                    return Err(Error::SequenceFile(format!(
                        "index {n}: {v} is not rational"
                    )))
                }
            };
            let num = q.numer().to_i64();
            let den = q.denom().to_i64();
            match (num, den) {
                (Some(a), Some(b)) => rows.push((*n, a, b)),
                _ => {
                    return Err(Error::SequenceFile(format!(
                        "index {n}: {q} does not fit in 64 bits"
                    )))
                }
            }
        }
        serde_json::to_string(&rows).map_err(|e| Error::SequenceFile(e.to_string()))
    }
}

impl fmt::Display for FiniteSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (n, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}: {v}")?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::ExponentBelowOne(p.to_string()));
    }
    Ok(())
}

/// Draws a random rational sequence: up to `max_support` distinct indices in
/// `[-spread, spread]`, entries `num/den` with `|num/den| <= bound` and
/// `den` in `1..=9`. Zero draws are allowed, so the support may be smaller.
pub fn random_rational_seq<R: Rng + ?Sized>(
    rng: &mut R,
    max_support: usize,
    spread: i64,
    bound: i64,
) -> FiniteSeq {
    let size = rng.gen_range(0..=max_support);
    let mut out = FiniteSeq::zero();
    let mut used = BTreeSet::new();
    while used.len() < size.min((2 * spread + 1) as usize) {
        let n = rng.gen_range(-spread..=spread);
        if !used.insert(n) {
            continue;
        }
        let den = rng.gen_range(1..=9i64);
        let num = rng.gen_range(-bound * den..=bound * den);
        out.set(n, PiGraded::rational(Rational::from((num, den))));
    }
    out
}

/// Restriction of a real sequence to `|n| <= radius`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatWindow {
    radius: usize,
    values: Vec<f64>,
}

impl FloatWindow {
    pub fn zeros(radius: usize) -> Self {
        FloatWindow {
            radius,
            values: vec![0.0; 2 * radius + 1],
        }
    }

    pub fn from_fn(radius: usize, mut f: impl FnMut(i64) -> f64) -> Self {
        let r = radius as i64;
        FloatWindow {
            radius,
            values: (-r..=r).map(&mut f).collect(),
        }
    }

    /// Wraps center-aligned values; the length must be odd.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.len() % 2 == 0 {
            return Err(Error::SizeMismatch {
                expected: values.len() + 1,
                got: values.len(),
            });
        }
        Ok(FloatWindow {
            radius: values.len() / 2,
            values,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry at index `n`; zero outside the window.
    pub fn get(&self, n: i64) -> f64 {
        let r = self.radius as i64;
        if n < -r || n > r {
            0.0
        } else {
            self.values[(n + r) as usize]
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(lp_norm_f64(&self.values, p))
    }

    /// Norm with the power sum accumulated at `prec` bits.
    pub fn lp_norm_hp(&self, p: f64, prec: u32) -> Result<Float> {
        check_exponent(p)?;
        Ok(lp_norm_mp(&self.values, p, prec))
    }
}

/// Scaled f64 p-norm; the scaling by the max entry avoids overflow for large p.
pub(crate) fn lp_norm_f64(values: &[f64], p: f64) -> f64 {
    let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|v| (v / m) * (v / m)).sum();
        return m * s.sqrt();
    }
    let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

pub(crate) fn lp_norm_mp(values: &[f64], p: f64, prec: u32) -> Float {
    let pf = Float::with_val(prec, p);
    let mut acc = Float::new(prec);
    for v in values {
        if *v != 0.0 {
            let x = Float::with_val(prec, v.abs());
            acc += x.pow(&pf);
        }
    }
    let inv = Float::with_val(prec, pf.recip_ref());
    acc.pow(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn products_of_impulses() {
        assert_eq!(
            FiniteSeq::delta(0).pointwise_mul(&FiniteSeq::delta(0)),
            FiniteSeq::delta(0)
        );
        assert!(FiniteSeq::delta(0)
            .pointwise_mul(&FiniteSeq::delta(1))
            .is_zero());
        let a = FiniteSeq::from_rationals([(0, q(1, 1)), (1, q(2, 1))]);
        let b = FiniteSeq::from_rationals([(1, q(3, 1))]);
        assert_eq!(a.pointwise_mul(&b), FiniteSeq::from_rationals([(1, q(6, 1))]));
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(FiniteSeq::delta(0).lp_norm(7.0).unwrap(), 1.0);
        let a = FiniteSeq::from_rationals([(0, q(1, 1)), (1, q(1, 1))]);
        assert!((a.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let b = FiniteSeq::from_rationals([(0, q(3, 1)), (1, q(4, 1))]);
        assert!((b.lp_norm(1.0).unwrap() - 7.0).abs() < 1e-15);
        assert_eq!(FiniteSeq::zero().lp_norm(3.0).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_rejects_small_exponent() {
        assert!(matches!(
            FiniteSeq::delta(0).lp_norm(0.5),
            Err(Error::ExponentBelowOne(_))
        ));
        assert!(FloatWindow::zeros(2).lp_norm(0.99).is_err());
    }

    #[test]
    fn json_literal_round_trip() {
        let s = FiniteSeq::from_json("[[0,1,1],[1,-2,3]]").unwrap();
        assert_eq!(s.value(1), PiGraded::rational(q(-2, 3)));
        assert_eq!(s.to_json().unwrap(), "[[0,1,1],[1,-2,3]]");
    }

    #[test]
    fn json_literal_rejects_duplicates_and_bad_denominators() {
        assert!(matches!(
            FiniteSeq::from_json("[[0,1,1],[0,2,1]]"),
            Err(Error::SequenceFile(_))
        ));
        assert!(FiniteSeq::from_json("[[0,1,0]]").is_err());
        assert!(FiniteSeq::from_json("[[0,1]]").is_err());
    }

    #[test]
    fn window_indexing() {
        let w = FloatWindow::from_fn(2, |n| n as f64);
        assert_eq!(w.len(), 5);
        assert_eq!(w.get(-2), -2.0);
        assert_eq!(w.get(3), 0.0);
        assert!((w.lp_norm(2.0).unwrap() - 10f64.sqrt()).abs() < 1e-14);
        let hp = w.lp_norm_hp(2.0, 128).unwrap().to_f64();
        assert!((hp - 10f64.sqrt()).abs() < 1e-15);
    }
}
