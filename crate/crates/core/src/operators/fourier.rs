//! Multiplier symbols on the circle and a quadrature check of their
//! Fourier coefficients against the convolution kernels.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::OperatorKind;

const RULE_POINTS: usize = 16;
const AGREEMENT: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 16;

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Symbol of `K`, `H` or `I` at `t` in `(-pi, pi)`, with `sign(0) = 0`.
pub fn multiplier_symbol(op: &OperatorKind, t: f64) -> Result<Complex64> {
    if !(t.abs() < PI) {
        return Err(crate::error::out_of_range("t", t, "(-pi, pi)"));
    }
    let tent = 1.0 - 2.0 / PI * t.abs();
    let odd = Complex64::new(0.0, -sign(t));
    match op {
        OperatorKind::K => Ok(odd),
        OperatorKind::H => Ok(odd * tent),
        OperatorKind::I => Ok(Complex64::new(tent, 0.0)),
        other => Err(Error::UnsupportedOperator(other.name())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientCheck {
    /// `(1/2pi) int symbol(t) e^{imt} dt` by quadrature.
    pub computed: Complex64,
    /// The kernel value `k(m)`.
    pub expected: f64,
    /// Panels per half-interval at which two successive results agreed.
    pub panels: usize,
}

impl CoefficientCheck {
    pub fn error(&self) -> f64 {
        (self.computed - Complex64::new(self.expected, 0.0)).norm()
    }
}

/// Integrates the symbol against `e^{imt}` on `(-pi, 0)` and `(0, pi)`
/// separately, doubling the panel count until successive results agree.
/// `quad_points` is the initial node count per half-interval.
pub fn check_fourier_coefficient(
    op: &OperatorKind,
    m: i64,
    quad_points: usize,
) -> Result<CoefficientCheck> {
    if quad_points < 64 {
        return Err(crate::error::out_of_range("quad_points", quad_points, ">= 64"));
    }
    multiplier_symbol(op, 0.0)?;
    let rule = GaussLegendre::new(RULE_POINTS).expect("rule of degree >= 2");
    let mf = m as f64;
    let integrate = |panels: usize| -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, b) in [(-PI, 0.0), (0.0, PI)] {
            let h = (b - a) / panels as f64;
            for i in 0..panels {
                let lo = a + h * i as f64;
                let hi = lo + h;
                // Gauss nodes are interior, so t = 0 is never sampled
                let s = |t: f64| multiplier_symbol(op, t).unwrap_or_default();
                re += rule.integrate(lo, hi, |t| (s(t) * Complex64::new(0.0, mf * t).exp()).re);
                im += rule.integrate(lo, hi, |t| (s(t) * Complex64::new(0.0, mf * t).exp()).im);
            }
        }
        Complex64::new(re, im) / (2.0 * PI)
    };
    let mut panels = quad_points.div_ceil(RULE_POINTS);
    let mut prev = integrate(panels);
    loop {
        let next_panels = panels * 2;
        let next = integrate(next_panels);
        if (next - prev).norm() <= AGREEMENT || next_panels >= MAX_PANELS {
            return Ok(CoefficientCheck {
                computed: next,
                expected: expected_coefficient(op, m),
                panels: next_panels,
            });
        }
        prev = next;
        panels = next_panels;
    }
}

fn expected_coefficient(op: &OperatorKind, m: i64) -> f64 {
    op.float_kernel().at(m)
}
