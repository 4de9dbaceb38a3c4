//! Exact values in the ring Q[1/pi].
//!
//! Every kernel of the operators studied here is a rational multiple of a
//! power of `1/pi`, so all exact outputs live in this ring. Because pi is
//! transcendental, two values are equal iff their coefficient maps agree.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::{Float, Rational};

/// A single term `coeff * pi^(-grade)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub grade: u32,
}

impl Monomial {
    pub fn new(coeff: Rational, grade: u32) -> Self {
        Monomial { coeff, grade }
    }
}

/// An exact number `sum_g q_g * pi^(-g)` with rational `q_g` and `g >= 0`.
///
/// Zero coefficients are never stored, so the empty map is zero and
/// structural equality is numeric equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PiGraded {
    terms: BTreeMap<u32, Rational>,
}

impl PiGraded {
    pub fn zero() -> Self {
        PiGraded::default()
    }

    pub fn one() -> Self {
        PiGraded::rational(Rational::from(1))
    }

    /// The grade-0 value `q`.
    pub fn rational(q: Rational) -> Self {
        PiGraded::monomial(q, 0)
    }

    pub fn monomial(coeff: Rational, grade: u32) -> Self {
        let mut terms = BTreeMap::new();
        if coeff.cmp0().is_ne() {
            terms.insert(grade, coeff);
        }
        PiGraded { terms }
    }

    /// Builds a value from `(grade, coefficient)` pairs, merging repeated grades.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, Rational)>,
    {
        let mut out = PiGraded::zero();
        for (g, q) in terms {
            out.add_monomial(&q, g);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, grade: u32) -> Rational {
        self.terms.get(&grade).cloned().unwrap_or_default()
    }

    /// Iterates `(grade, coefficient)` in increasing grade.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.terms.iter().map(|(g, q)| (*g, q))
    }

    pub fn grades(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().copied()
    }

    /// The common grade when the value is a single nonzero monomial.
    pub fn homogeneous_grade(&self) -> Option<u32> {
        let mut it = self.terms.keys();
        match (it.next(), it.next()) {
            (Some(g), None) => Some(*g),
            _ => None,
        }
    }

    pub fn add_monomial(&mut self, coeff: &Rational, grade: u32) {
        if coeff.cmp0().is_eq() {
            return;
        }
        match self.terms.get_mut(&grade) {
            Some(q) => {
                *q += coeff;
                if q.cmp0().is_eq() {
                    self.terms.remove(&grade);
                }
            }
            None => {
                self.terms.insert(grade, coeff.clone());
            }
        }
    }

    /// `self += x * m`, the inner step of every kernel sum.
    pub fn add_scaled(&mut self, x: &PiGraded, m: &Monomial) {
        for (g, q) in &x.terms {
            let c = Rational::from(q * &m.coeff);
            self.add_monomial(&c, g + m.grade);
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> PiGraded {
        let mut out = PiGraded::zero();
        out.add_scaled(self, m);
        out
    }

    pub fn scale(&self, q: &Rational) -> PiGraded {
        self.mul_monomial(&Monomial::new(q.clone(), 0))
    }

    pub fn pow(&self, k: u32) -> PiGraded {
        let mut out = PiGraded::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Evaluates at `prec` bits with pi taken at extra working precision.
    ///
    /// The working precision grows until the cancellation between grades is
    /// covered by at least 16 guard bits, which keeps the final rounding
    /// within 2 ulp of the result.
    pub fn to_float(&self, prec: u32) -> Float {
        if self.is_zero() {
            return Float::new(prec);
        }
        let mut guard = 32u32;
        loop {
            let wp = prec + guard;
            let inv_pi = Float::with_val(wp, Constant::Pi).recip();
            let mut sum = Float::new(wp);
            let mut magnitude = Float::new(wp);
            let mut power = Float::with_val(wp, 1);
            let mut at = 0u32;
            for (g, q) in &self.terms {
                while at < *g {
                    power *= &inv_pi;
                    at += 1;
                }
                let term = Float::with_val(wp, q) * &power;
                magnitude += Float::with_val(wp, term.abs_ref());
                sum += term;
            }
            // bits lost to cancellation
            let lost = match (magnitude.get_exp(), sum.get_exp()) {
                (Some(m), Some(s)) => (m - s).max(0) as u32,
                _ => guard,
            };
            if lost + 16 <= guard {
                return Float::with_val(prec, &sum);
            }
            guard = guard * 2 + lost;
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(53).to_f64()
    }
}

impl From<Rational> for PiGraded {
    fn from(q: Rational) -> Self {
        PiGraded::rational(q)
    }
}

impl From<i64> for PiGraded {
    fn from(v: i64) -> Self {
        PiGraded::rational(Rational::from(v))
    }
}

impl<'a> Add<&'a PiGraded> for &'a PiGraded {
    type Output = PiGraded;
    fn add(self, rhs: &'a PiGraded) -> PiGraded {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for PiGraded {
    type Output = PiGraded;
    fn add(mut self, rhs: PiGraded) -> PiGraded {
        self += &rhs;
        self
    }
}

impl AddAssign<&PiGraded> for PiGraded {
    fn add_assign(&mut self, rhs: &PiGraded) {
        for (g, q) in &rhs.terms {
            self.add_monomial(q, *g);
        }
    }
}

impl SubAssign<&PiGraded> for PiGraded {
    fn sub_assign(&mut self, rhs: &PiGraded) {
        for (g, q) in &rhs.terms {
            self.add_monomial(&Rational::from(-q), *g);
        }
    }
}

impl<'a> Sub<&'a PiGraded> for &'a PiGraded {
    type Output = PiGraded;
    fn sub(self, rhs: &'a PiGraded) -> PiGraded {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for PiGraded {
    type Output = PiGraded;
    fn sub(mut self, rhs: PiGraded) -> PiGraded {
        self -= &rhs;
        self
    }
}

impl Neg for &PiGraded {
    type Output = PiGraded;
    fn neg(self) -> PiGraded {
        PiGraded {
            terms: self
                .terms
                .iter()
                .map(|(g, q)| (*g, Rational::from(-q)))
                .collect(),
        }
    }
}

impl Neg for PiGraded {
    type Output = PiGraded;
    fn neg(self) -> PiGraded {
        -&self
    }
}

impl<'a> Mul<&'a PiGraded> for &'a PiGraded {
    type Output = PiGraded;
    fn mul(self, rhs: &'a PiGraded) -> PiGraded {
        let mut out = PiGraded::zero();
        for (g, q) in &rhs.terms {
            out.add_scaled(self, &Monomial::new(q.clone(), *g));
        }
        out
    }
}

impl Mul for PiGraded {
    type Output = PiGraded;
    fn mul(self, rhs: PiGraded) -> PiGraded {
        &self * &rhs
    }
}

impl fmt::Display for PiGraded {
    /// `2/3*pi^-1 + 1/2*pi^-2`; zero prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (g, q)) in self.terms.iter().enumerate() {
            let neg = q.cmp0().is_lt();
            let abs = Rational::from(q.abs_ref());
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if *g == 0 {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*pi^-{g}")?;
            }
        }
        Ok(())
    }
}
