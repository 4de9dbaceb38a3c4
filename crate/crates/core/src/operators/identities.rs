//! Executable forms of the operator identities: the product rule, the
//! even/odd interleaving, the symbol identity behind the product rule,
//! the factorization `H = IK = KI` and its partial-fraction sum.

use std::f64::consts::PI;

use rug::Rational;

use crate::error::{Error, Result};
use crate::exact::PiGraded;
use crate::seq::FiniteSeq;

use super::certified::Neumaier;
use super::{
    apply_certified, apply_exact, apply_exact_with, apply_on_support, CertifiedValue, ExactImage,
    KernelSource, OperatorKind, Standard,
};

/// `K a . K b - (K[a . H b] + K[H a . b] + I[a b])` on `[lo, hi]`.
pub fn check_product_rule(a: &FiniteSeq, b: &FiniteSeq, lo: i64, hi: i64) -> Result<FiniteSeq> {
    check_product_rule_with(&Standard, a, b, lo, hi)
}

pub fn check_product_rule_with(
    src: &dyn KernelSource,
    a: &FiniteSeq,
    b: &FiniteSeq,
    lo: i64,
    hi: i64,
) -> Result<FiniteSeq> {
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    use OperatorKind::{H, I, K};
    // a . Hb lives on supp(a), Ha . b on supp(b)
    let a_hb = a.pointwise_mul(&apply_on_support(src, &H, b, a.support())?);
    let ha_b = apply_on_support(src, &H, a, b.support())?.pointwise_mul(b);
    let ab = a.pointwise_mul(b);
    let mut residual = FiniteSeq::zero();
    for n in lo..=hi {
        let lhs = &apply_exact_with(src, &K, a, n)? * &apply_exact_with(src, &K, b, n)?;
        let mut rhs = apply_exact_with(src, &K, &a_hb, n)?;
        rhs += &apply_exact_with(src, &K, &ha_b, n)?;
        rhs += &apply_exact_with(src, &I, &ab, n)?;
        residual.set(n, lhs - rhs);
    }
    Ok(residual)
}

/// Residuals of the four subsampling identities, with `b_n = a_{2n}` and
/// `c_n = a_{2n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterleavingResidual {
    /// `R b_n - K a_{2n+1}`
    pub r_even: FiniteSeq,
    /// `R c_n - K a_{2n}`
    pub r_odd: FiniteSeq,
    /// `H0 b_n - H a_{2n}`
    pub h_even: FiniteSeq,
    /// `H0 c_n - H a_{2n-1}`
    pub h_odd: FiniteSeq,
}

impl InterleavingResidual {
    pub fn is_zero(&self) -> bool {
        self.r_even.is_zero() && self.r_odd.is_zero() && self.h_even.is_zero() && self.h_odd.is_zero()
    }
}

pub fn check_interleaving(a: &FiniteSeq, lo: i64, hi: i64) -> Result<InterleavingResidual> {
    check_interleaving_with(&Standard, a, lo, hi)
}

pub fn check_interleaving_with(
    src: &dyn KernelSource,
    a: &FiniteSeq,
    lo: i64,
    hi: i64,
) -> Result<InterleavingResidual> {
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    use OperatorKind::{H, H0, K, R};
    let b = FiniteSeq::from_values(
        a.iter()
            .filter(|(j, _)| j.rem_euclid(2) == 0)
            .map(|(j, v)| (j.div_euclid(2), v.clone())),
    );
    let c = FiniteSeq::from_values(
        a.iter()
            .filter(|(j, _)| j.rem_euclid(2) == 1)
            .map(|(j, v)| ((j + 1).div_euclid(2), v.clone())),
    );
    let mut out = InterleavingResidual {
        r_even: FiniteSeq::zero(),
        r_odd: FiniteSeq::zero(),
        h_even: FiniteSeq::zero(),
        h_odd: FiniteSeq::zero(),
    };
    for n in lo..=hi {
        let diff = |op: &OperatorKind, s: &FiniteSeq, full: &OperatorKind, at: i64| -> Result<PiGraded> {
            Ok(apply_exact_with(src, op, s, n)? - apply_exact_with(src, full, a, at)?)
        };
        out.r_even.set(n, diff(&R, &b, &K, 2 * n + 1)?);
        out.r_odd.set(n, diff(&R, &c, &K, 2 * n)?);
        out.h_even.set(n, diff(&H0, &b, &H, 2 * n)?);
        out.h_odd.set(n, diff(&H0, &c, &H, 2 * n - 1)?);
    }
    Ok(out)
}

/// Reduces `u` into `(-1, 1]`, so that `u pi` lies in `(-pi, pi]`.
fn reduce(u: &Rational) -> Rational {
    let r = crate::hp::rem_euclid(u, 2);
    if r > 1 {
        r - 2u32
    } else {
        r
    }
}

fn sign_at(u: &Rational) -> Rational {
    Rational::from(u.cmp0() as i32)
}

fn tent_at(u: &Rational) -> Rational {
    Rational::from(1) - Rational::from(u.abs_ref()) * 2u32
}

/// `S(t)S(s) - [S(t+s)I(s)S(s) + S(t+s)I(t)S(t) - I(s+t)]` at `t = u pi`,
/// `s = v pi`, in exact rational arithmetic.
pub fn check_sign_identity(u: &Rational, v: &Rational) -> Result<Rational> {
    let w = Rational::from(u + v);
    let (ru, rv, rw) = (reduce(u), reduce(v), reduce(&w));
    for (r, orig) in [(&ru, u), (&rv, v), (&rw, &w)] {
        if r.cmp0().is_eq() || *r == 1 {
            return Err(Error::SymbolJump(orig.to_string()));
        }
    }
    let lhs = sign_at(&ru) * sign_at(&rv);
    let rhs = sign_at(&rw) * tent_at(&rv) * sign_at(&rv) + sign_at(&rw) * tent_at(&ru) * sign_at(&ru)
        - tent_at(&rw);
    Ok(lhs - rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationCheck {
    /// Exact `H a_n`.
    pub lhs: PiGraded,
    /// Certified `I K a_n`.
    pub ik: CertifiedValue,
    /// Certified `K I a_n`.
    pub ki: CertifiedValue,
}

impl FactorizationCheck {
    pub fn holds(&self) -> bool {
        let h = CertifiedValue::exact(self.lhs.to_f64());
        self.ik.overlaps(&h) && self.ki.overlaps(&h)
    }
}

/// Compares exact `H a_n` with certified `IK a_n` and `KI a_n`.
pub fn check_factorization(a: &FiniteSeq, n: i64, m_max: u64) -> Result<FactorizationCheck> {
    let needed = n.unsigned_abs() + a.support_radius();
    if m_max < needed {
        return Err(Error::TruncationTooSmall {
            radius: m_max,
            needed,
        });
    }
    let lhs = apply_exact(&OperatorKind::H, a, n)?;
    let ka = ExactImage::new(OperatorKind::K, a)?;
    let ia = ExactImage::new(OperatorKind::I, a)?;
    let ik = apply_certified(&OperatorKind::I, &ka, n, m_max)?;
    let ki = apply_certified(&OperatorKind::K, &ia, n, m_max)?;
    Ok(FactorizationCheck { lhs, ik, ki })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialFractionCheck {
    pub sum: CertifiedValue,
    pub closed_form: CertifiedValue,
}

impl PartialFractionCheck {
    pub fn holds(&self) -> bool {
        self.sum.overlaps(&self.closed_form)
    }
}

/// `sum_{odd |m| <= M} 1/(m^2 (j - m))` against `pi^2/(4j)` for even `j != 0`.
///
/// For `|m| > M >= 2|j|` each term is at most `2/|m|^3`, so the two tails
/// together are below `2/M^2`.
pub fn check_partial_fraction(j: i64, m_max: u64) -> Result<PartialFractionCheck> {
    if j == 0 || j % 2 != 0 {
        return Err(crate::error::out_of_range("j", j, "even, nonzero"));
    }
    let needed = 2 * j.unsigned_abs();
    if m_max < needed {
        return Err(Error::TruncationTooSmall {
            radius: m_max,
            needed,
        });
    }
    let jf = j as f64;
    let top = (m_max as i64) | 1;
    let top = if top as u64 > m_max { top - 2 } else { top };
    let mut acc = Neumaier::default();
    // small terms first
    let mut m = top;
    while m >= 1 {
        let mf = m as f64;
        acc.add(1.0 / (mf * mf * (jf - mf)));
        acc.add(1.0 / (mf * mf * (jf + mf)));
        m -= 2;
    }
    let mf = m_max as f64;
    // sum of |terms| is below sum_{odd m} 1/m^2 = pi^2/4
    let sum = CertifiedValue {
        value: acc.total(),
        bound: 2.0 / (mf * mf) + 64.0 * f64::EPSILON * 2.5,
    };
    Ok(PartialFractionCheck {
        sum,
        closed_form: CertifiedValue::exact(PI * PI / (4.0 * jf)),
    })
}
