//! Convolution operators of the Kak–Hilbert family, applied exactly to
//! finitely supported sequences.
//!
//! Every operator here is `(T a)_n = sum_m k(m) a_{n-m}`. Exact application
//! loops over the support of `a`, so it costs one kernel evaluation per
//! nonzero entry.

mod certified;
mod fourier;
mod identities;

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::exact::{Monomial, PiGraded};
use crate::seq::FiniteSeq;

pub use certified::{
    apply_certified, check_probability_kernel, CertifiedValue, Decay, ExactImage, SeqGenerator,
};
pub(crate) use certified::Neumaier;
pub use fourier::{check_fourier_coefficient, multiplier_symbol, CoefficientCheck};
pub use identities::{
    check_factorization, check_interleaving, check_interleaving_with, check_partial_fraction,
    check_product_rule, check_product_rule_with, check_sign_identity, FactorizationCheck,
    InterleavingResidual, PartialFractionCheck,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// `(1/pi) / (m + 1/2)` for every `m`.
    R,
    /// `(2/pi) / m` for odd `m`.
    K,
    /// `(1/pi) / m` for `m != 0`.
    H0,
    /// `(2/pi) / m` for even `m != 0`.
    H,
    /// `(4/pi^2) / m^2` for odd `m`.
    I,
    /// `sin(pi t)/pi / (m + t)`, or the signed shift `(-1)^t a_{n+t}` for integer `t`.
    T(Rational),
}

/// Pointwise decay class of a kernel, used for tail bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelDecay {
    /// `|k(m)| <= kappa / max(1, |m|)`.
    Harmonic { kappa: f64 },
    /// `|k(m)| <= lambda / max(1, m^2)`.
    Square { lambda: f64 },
    /// A single nonzero entry at `m = offset`.
    Point { offset: i64, weight: f64 },
}

impl OperatorKind {
    pub fn name(&self) -> String {
        match self {
            OperatorKind::R => "R".into(),
            OperatorKind::K => "K".into(),
            OperatorKind::H0 => "H0".into(),
            OperatorKind::H => "H".into(),
            OperatorKind::I => "I".into(),
            OperatorKind::T(t) => format!("T({t})"),
        }
    }

    /// Exact kernel value, `None` where it vanishes.
    pub fn kernel(&self, m: i64) -> Result<Option<Monomial>> {
        let q = |n: i64, d: i64| Rational::from((n, d));
        Ok(match self {
            OperatorKind::R => Some(Monomial::new(q(2, 2 * m + 1), 1)),
            OperatorKind::K if m.rem_euclid(2) == 1 => Some(Monomial::new(q(2, m), 1)),
            OperatorKind::H0 if m != 0 => Some(Monomial::new(q(1, m), 1)),
            OperatorKind::H if m != 0 && m % 2 == 0 => Some(Monomial::new(q(2, m), 1)),
            OperatorKind::I if m.rem_euclid(2) == 1 => {
                Some(Monomial::new(Rational::from((4, 1)) / Rational::from(m) / m, 2))
            }
            OperatorKind::T(t) => {
                if t.is_integer() {
                    let shift = t.numer().to_i64().ok_or_else(|| {
                        crate::error::out_of_range("t", t, "64-bit integers")
                    })?;
                    if m == -shift {
                        let sign = if shift.rem_euclid(2) == 0 { 1 } else { -1 };
                        Some(Monomial::new(Rational::from(sign), 0))
                    } else {
                        None
                    }
                } else {
                    let s = rational_sin_pi(t).ok_or_else(|| Error::InexactShift(t.to_string()))?;
                    let denom = Rational::from(t + m);
                    Some(Monomial::new(s / denom, 1))
                }
            }
            _ => None,
        })
    }

    /// How many powers of `1/pi` the operator adds.
    pub fn grade_shift(&self) -> Result<u32> {
        Ok(match self {
            OperatorKind::I => 2,
            OperatorKind::T(t) if t.is_integer() => 0,
            OperatorKind::T(t) => {
                rational_sin_pi(t).ok_or_else(|| Error::InexactShift(t.to_string()))?;
                1
            }
            _ => 1,
        })
    }

    pub fn float_kernel(&self) -> FloatKernel {
        let sin_pi_t = match self {
            OperatorKind::T(t) if !t.is_integer() => {
                let x = Float::with_val(128, t) * Float::with_val(128, Constant::Pi);
                x.sin().to_f64()
            }
            _ => 0.0,
        };
        FloatKernel {
            op: self.clone(),
            t: match self {
                OperatorKind::T(t) => t.to_f64(),
                _ => 0.0,
            },
            sin_pi_t,
        }
    }

    pub fn decay(&self) -> KernelDecay {
        use std::f64::consts::PI;
        match self {
            OperatorKind::R | OperatorKind::K | OperatorKind::H => {
                KernelDecay::Harmonic { kappa: 2.0 / PI }
            }
            OperatorKind::H0 => KernelDecay::Harmonic { kappa: 1.0 / PI },
            OperatorKind::I => KernelDecay::Square {
                lambda: 4.0 / (PI * PI),
            },
            OperatorKind::T(t) => {
                let tf = t.to_f64();
                if t.is_integer() {
                    let sign = if (tf as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    KernelDecay::Point {
                        offset: -(tf as i64),
                        weight: sign,
                    }
                } else {
                    // |m + t| >= dist(t, Z) for all m, and |m|/|m + t| <= 1 + |t|/dist
                    let s = self.float_kernel().sin_pi_t.abs() / PI;
                    let dist = (tf - tf.round()).abs();
                    let kappa = s * (1.0 + tf.abs() / dist).max(1.0 / dist);
                    KernelDecay::Harmonic {
                        kappa: kappa * (1.0 + 1e-12),
                    }
                }
            }
        }
    }

    /// Upper bound for the l2 norm of the kernel.
    pub fn kernel_l2(&self) -> f64 {
        match self {
            OperatorKind::H0 | OperatorKind::H | OperatorKind::I => 0.57736,
            _ => 1.0 + 1e-12,
        }
    }

    /// Upper bound for `sup_m |k(m)|`.
    pub fn kernel_sup(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            OperatorKind::R | OperatorKind::K => 2.0 / PI,
            OperatorKind::H | OperatorKind::H0 => 1.0 / PI,
            OperatorKind::I => 4.0 / (PI * PI),
            OperatorKind::T(t) if t.is_integer() => 1.0,
            OperatorKind::T(_) => match self.decay() {
                KernelDecay::Harmonic { kappa } => kappa,
                _ => unreachable!(),
            },
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "R" => return Ok(OperatorKind::R),
            "K" => return Ok(OperatorKind::K),
            "H0" => return Ok(OperatorKind::H0),
            "H" => return Ok(OperatorKind::H),
            "I" => return Ok(OperatorKind::I),
            _ => {}
        }
        s.strip_prefix("T(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(crate::hp::parse_rational)
            .map(OperatorKind::T)
            .ok_or_else(|| Error::UnsupportedOperator(s.to_string()))
    }
}

/// `sin(pi t)` when it is rational: integers, half-integers and sixths.
pub fn rational_sin_pi(t: &Rational) -> Option<Rational> {
    let r = crate::hp::rem_euclid(t, 2);
    let (n, d) = (r.numer().to_i64()?, r.denom().to_i64()?);
    let v = match (n, d) {
        (0, 1) | (1, 1) => (0, 1),
        (1, 2) => (1, 1),
        (3, 2) => (-1, 1),
        (1, 6) | (5, 6) => (1, 2),
        (7, 6) | (11, 6) => (-1, 2),
        _ => return None,
    };
    Some(Rational::from(v))
}

/// Double-precision kernel, with `sin(pi t)` precomputed for `T`.
#[derive(Clone, Debug)]
pub struct FloatKernel {
    op: OperatorKind,
    t: f64,
    sin_pi_t: f64,
}

impl FloatKernel {
    pub fn at(&self, m: i64) -> f64 {
        use std::f64::consts::{FRAC_2_PI, FRAC_1_PI, PI};
        let mf = m as f64;
        match &self.op {
            OperatorKind::R => FRAC_1_PI / (mf + 0.5),
            OperatorKind::K if m.rem_euclid(2) == 1 => FRAC_2_PI / mf,
            OperatorKind::H0 if m != 0 => FRAC_1_PI / mf,
            OperatorKind::H if m != 0 && m % 2 == 0 => FRAC_2_PI / mf,
            OperatorKind::I if m.rem_euclid(2) == 1 => 4.0 / (PI * PI) / (mf * mf),
            OperatorKind::T(t) if t.is_integer() => {
                let shift = self.t as i64;
                if m == -shift {
                    if shift.rem_euclid(2) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    0.0
                }
            }
            OperatorKind::T(_) => self.sin_pi_t / PI / (mf + self.t),
            _ => 0.0,
        }
    }
}

/// Supplies exact kernels; the indirection lets tests and the CLI inject a
/// deliberately wrong kernel and watch the checks fail.
pub trait KernelSource: Sync {
    fn kernel(&self, op: &OperatorKind, m: i64) -> Result<Option<Monomial>>;
}

/// The kernels as defined.
#[derive(Clone, Copy, Debug, Default)]
pub struct Standard;

impl KernelSource for Standard {
    fn kernel(&self, op: &OperatorKind, m: i64) -> Result<Option<Monomial>> {
        op.kernel(m)
    }
}

/// Adds `delta * pi^-grade` to one kernel entry of one operator.
#[derive(Clone, Debug)]
pub struct Perturbed {
    pub target: OperatorKind,
    pub offset: i64,
    pub delta: Monomial,
}

impl KernelSource for Perturbed {
    fn kernel(&self, op: &OperatorKind, m: i64) -> Result<Option<Monomial>> {
        let k = op.kernel(m)?;
        if *op != self.target || m != self.offset {
            return Ok(k);
        }
        let mut v = PiGraded::zero();
        if let Some(k) = &k {
            v.add_monomial(&k.coeff, k.grade);
        }
        v.add_monomial(&self.delta.coeff, self.delta.grade);
        let entry = v.terms().next().map(|(g, q)| Monomial::new(q.clone(), g));
        Ok(entry)
    }
}

/// Exact `(op a)_n`.
pub fn apply_exact(op: &OperatorKind, a: &FiniteSeq, n: i64) -> Result<PiGraded> {
    apply_exact_with(&Standard, op, a, n)
}

pub fn apply_exact_with(
    src: &dyn KernelSource,
    op: &OperatorKind,
    a: &FiniteSeq,
    n: i64,
) -> Result<PiGraded> {
    let mut out = PiGraded::zero();
    for (j, v) in a.iter() {
        if let Some(k) = src.kernel(op, n - j)? {
            out.add_scaled(v, &k);
        }
    }
    Ok(out)
}

/// Exact restriction of `op a` to `[lo, hi]`; indices outside are omitted,
/// not zero.
pub fn apply_window(op: &OperatorKind, a: &FiniteSeq, lo: i64, hi: i64) -> Result<FiniteSeq> {
    apply_window_with(&Standard, op, a, lo, hi)
}

pub fn apply_window_with(
    src: &dyn KernelSource,
    op: &OperatorKind,
    a: &FiniteSeq,
    lo: i64,
    hi: i64,
) -> Result<FiniteSeq> {
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let mut out = FiniteSeq::zero();
    for n in lo..=hi {
        out.set(n, apply_exact_with(src, op, a, n)?);
    }
    Ok(out)
}

/// Exact `op a` at the listed indices, as a sequence supported there.
pub(crate) fn apply_on_support(
    src: &dyn KernelSource,
    op: &OperatorKind,
    a: &FiniteSeq,
    at: impl Iterator<Item = i64>,
) -> Result<FiniteSeq> {
    let mut out = FiniteSeq::zero();
    for n in at {
        out.set(n, apply_exact_with(src, op, a, n)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn single_kernel_terms() {
        let d0 = FiniteSeq::delta(0);
        assert_eq!(
            apply_exact(&OperatorKind::K, &d0, 1).unwrap(),
            PiGraded::monomial(q(2, 1), 1)
        );
        assert!(apply_exact(&OperatorKind::K, &d0, 2).unwrap().is_zero());
        assert_eq!(
            apply_exact(&OperatorKind::I, &d0, 3).unwrap(),
            PiGraded::monomial(q(4, 9), 2)
        );
        assert!(apply_exact(&OperatorKind::H, &d0, 0).unwrap().is_zero());
    }

    #[test]
    fn windows_of_impulse_images() {
        let d0 = FiniteSeq::delta(0);
        let w = apply_window(&OperatorKind::K, &d0, -3, 3).unwrap();
        let expect = FiniteSeq::from_values([
            (-3, PiGraded::monomial(q(-2, 3), 1)),
            (-1, PiGraded::monomial(q(-2, 1), 1)),
            (1, PiGraded::monomial(q(2, 1), 1)),
            (3, PiGraded::monomial(q(2, 3), 1)),
        ]);
        assert_eq!(w, expect);
        let r = apply_window(&OperatorKind::R, &d0, 0, 1).unwrap();
        assert_eq!(r.value(0), PiGraded::monomial(q(2, 1), 1));
        assert_eq!(r.value(1), PiGraded::monomial(q(2, 3), 1));
        assert!(apply_window(&OperatorKind::I, &FiniteSeq::zero(), -5, 5)
            .unwrap()
            .is_zero());
        assert!(apply_window(&OperatorKind::I, &d0, 1, 0).is_err());
    }

    #[test]
    fn shift_family() {
        let a = FiniteSeq::from_rationals([(0, q(1, 1)), (3, q(5, 2))]);
        // integer t is the signed shift
        let t3 = OperatorKind::T(q(3, 1));
        assert_eq!(
            apply_exact(&t3, &a, 0).unwrap(),
            PiGraded::rational(q(-5, 2))
        );
        let t0 = OperatorKind::T(q(0, 1));
        assert_eq!(apply_exact(&t0, &a, 3).unwrap(), PiGraded::rational(q(5, 2)));
        // t = 1/2 is R
        let half = OperatorKind::T(q(1, 2));
        for n in -5..5 {
            assert_eq!(
                apply_exact(&half, &a, n).unwrap(),
                apply_exact(&OperatorKind::R, &a, n).unwrap()
            );
        }
        assert!(matches!(
            apply_exact(&OperatorKind::T(q(1, 3)), &a, 0),
            Err(Error::InexactShift(_))
        ));
        assert!(apply_exact(&OperatorKind::T(q(1, 6)), &a, 0).is_ok());
    }

    #[test]
    fn float_kernels_match_exact() {
        let ops = [
            OperatorKind::R,
            OperatorKind::K,
            OperatorKind::H0,
            OperatorKind::H,
            OperatorKind::I,
            OperatorKind::T(q(-3, 2)),
            OperatorKind::T(q(2, 1)),
        ];
        for op in &ops {
            let fk = op.float_kernel();
            for m in -12..=12 {
                let exact = op
                    .kernel(m)
                    .unwrap()
                    .map(|k| PiGraded::monomial(k.coeff, k.grade).to_f64())
                    .unwrap_or(0.0);
                let got = fk.at(m);
                assert!((exact - got).abs() <= 4.0 * f64::EPSILON * exact.abs(), "{op} {m}");
            }
        }
    }

    #[test]
    fn parse_names() {
        for s in ["R", "K", "H0", "H", "I", "T(1/2)", "T(-3)"] {
            assert_eq!(s.parse::<OperatorKind>().unwrap().name(), s);
        }
        assert!("Q".parse::<OperatorKind>().is_err());
    }

    #[test]
    fn perturbed_source_changes_one_entry() {
        let src = Perturbed {
            target: OperatorKind::K,
            offset: 1,
            delta: Monomial::new(q(1, 1000), 1),
        };
        let d0 = FiniteSeq::delta(0);
        let got = apply_exact_with(&src, &OperatorKind::K, &d0, 1).unwrap();
        assert_eq!(got, PiGraded::monomial(q(2001, 1000), 1));
        let same = apply_exact_with(&src, &OperatorKind::K, &d0, 3).unwrap();
        assert_eq!(same, apply_exact(&OperatorKind::K, &d0, 3).unwrap());
    }
}
