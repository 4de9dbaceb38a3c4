//! Truncated kernel sums with a certified error radius.
//!
//! `bound = tail(M) + rounding`. The tail part is a closed-form estimate of
//! the discarded terms and is non-increasing in `M`; the rounding part
//! depends only on an a priori bound for the full absolute sum, so the
//! total bound is non-increasing in `M` as well.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;

use super::{apply_exact, FloatKernel, KernelDecay, OperatorKind};

/// Largest truncation radius accepted.
const MAX_RADIUS: u64 = 1 << 26;

/// Relative rounding allowance per unit of absolute mass.
const ROUNDING: f64 = 64.0 * f64::EPSILON;

/// An enclosure `[value - bound, value + bound]` of a real number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedValue {
    pub value: f64,
    pub bound: f64,
}

impl CertifiedValue {
    pub fn exact(value: f64) -> Self {
        CertifiedValue {
            value,
            bound: 2.0 * f64::EPSILON * value.abs(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.bound
    }

    /// True when the two enclosures intersect.
    pub fn overlaps(&self, other: &CertifiedValue) -> bool {
        (self.value - other.value).abs() <= self.bound + other.bound
    }
}

/// A priori pointwise bound on an input sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    /// Supported in `[-radius, radius]` with the given l1 norm.
    Finite { radius: u64, l1: f64 },
    /// `|a_j| <= c / max(1, |j|)`.
    Harmonic(f64),
    /// `|a_j| <= c`.
    Flat(f64),
}

/// A real sequence that can be sampled in double precision and carries a
/// certified decay descriptor.
pub trait SeqGenerator: Sync {
    fn value(&self, j: i64) -> f64;
    fn decay(&self) -> Decay;
}

impl SeqGenerator for FiniteSeq {
    fn value(&self, j: i64) -> f64 {
        self.get(j).map(|v| v.to_f64()).unwrap_or(0.0)
    }

    fn decay(&self) -> Decay {
        let l1: f64 = self.iter().map(|(_, v)| v.to_f64().abs()).sum();
        Decay::Finite {
            radius: self.support_radius(),
            l1: l1 * (1.0 + 1e-12),
        }
    }
}

/// The image `op a` of a finitely supported sequence, sampled in double
/// precision. It has infinite support, which is what the certified
/// evaluator is for.
pub struct ExactImage {
    op: OperatorKind,
    entries: Vec<(i64, f64)>,
    kernel: FloatKernel,
    decay: Decay,
}

impl ExactImage {
    pub fn new(op: OperatorKind, a: &FiniteSeq) -> Result<Self> {
        let entries: Vec<(i64, f64)> = a.iter().map(|(j, v)| (j, v.to_f64())).collect();
        let l1: f64 = entries.iter().map(|(_, v)| v.abs()).sum::<f64>() * (1.0 + 1e-12);
        let r = a.support_radius() as i64;
        // Beyond |j| > 2r every offset j - i has |j - i| >= |j|/2.
        let far = match op.decay() {
            KernelDecay::Harmonic { kappa } => 2.0 * kappa * l1,
            KernelDecay::Square { lambda } => 4.0 * lambda * l1,
            KernelDecay::Point { .. } => {
                return Err(Error::UnsupportedOperator(format!(
                    "{op} image (use the shifted sequence directly)"
                )))
            }
        };
        let mut near = 0.0f64;
        for j in -2 * r..=2 * r {
            let v = apply_exact(&op, a, j)?.to_f64().abs();
            near = near.max(v * (j.unsigned_abs().max(1) as f64));
        }
        let kernel = op.float_kernel();
        Ok(ExactImage {
            op,
            entries,
            kernel,
            decay: Decay::Harmonic(far.max(near * (1.0 + 1e-12))),
        })
    }

    pub fn op(&self) -> &OperatorKind {
        &self.op
    }
}

impl SeqGenerator for ExactImage {
    fn value(&self, j: i64) -> f64 {
        let mut acc = Neumaier::default();
        for (i, v) in &self.entries {
            acc.add(v * self.kernel.at(j - i));
        }
        acc.total()
    }

    fn decay(&self) -> Decay {
        self.decay
    }
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `sum_{|m| <= M} k(m) a_{n-m}` with a certified error radius.
pub fn apply_certified(
    op: &OperatorKind,
    a: &dyn SeqGenerator,
    n: i64,
    m_max: u64,
) -> Result<CertifiedValue> {
    if m_max == 0 || m_max > MAX_RADIUS {
        return Err(crate::error::out_of_range("M", m_max, "1..=2^26"));
    }
    let decay = a.decay();
    let (tail, mass) = tail_and_mass(op, decay, n, m_max)?;
    let kernel = op.float_kernel();
    let m = m_max as i64;
    let mut acc = Neumaier::default();
    if let Decay::Finite { radius, .. } = decay {
        // only offsets that hit the support contribute
        let r = radius as i64;
        let lo = (n - r).max(-m);
        let hi = (n + r).min(m);
        for k in lo..=hi {
            acc.add(kernel.at(k) * a.value(n - k));
        }
    } else {
        for k in -m..=m {
            acc.add(kernel.at(k) * a.value(n - k));
        }
    }
    Ok(CertifiedValue {
        value: acc.total(),
        bound: tail + ROUNDING * mass,
    })
}

/// Tail estimate for the discarded `|m| > M` terms, and an `M`-independent
/// bound on `sum_m |k(m) a_{n-m}|` for the rounding allowance.
fn tail_and_mass(op: &OperatorKind, decay: Decay, n: i64, m_max: u64) -> Result<(f64, f64)> {
    let mf = m_max as f64;
    let kd = op.decay();
    let sup = op.kernel_sup();
    match decay {
        Decay::Finite { radius, l1 } => {
            let tail = if m_max >= n.unsigned_abs() + radius {
                0.0
            } else {
                match kd {
                    KernelDecay::Harmonic { kappa } => kappa / mf * l1,
                    KernelDecay::Square { lambda } => lambda / (mf * mf) * l1,
                    KernelDecay::Point { offset, weight } => {
                        if offset.unsigned_abs() > m_max {
                            weight.abs() * l1
                        } else {
                            0.0
                        }
                    }
                }
            };
            Ok((tail, sup * l1))
        }
        Decay::Harmonic(c) => match kd {
            KernelDecay::Harmonic { kappa } => {
                let needed = 2 * n.unsigned_abs();
                if m_max < needed {
                    return Err(Error::TruncationTooSmall {
                        radius: m_max,
                        needed,
                    });
                }
                // |n - m| >= |m|/2 and sum_{|m|>M} 1/m^2 <= 2/M.
                // Cauchy-Schwarz: sum |k a| <= |k|_2 * c * sqrt(1 + pi^2/3).
                let mass = op.kernel_l2() * c * 2.081;
                Ok((4.0 * kappa * c / mf, mass))
            }
            KernelDecay::Square { lambda } => Ok((2.0 * lambda * c / mf, lambda * c * PI * PI / 3.0)),
            KernelDecay::Point { offset, weight } => {
                let tail = if offset.unsigned_abs() > m_max {
                    weight.abs() * c
                } else {
                    0.0
                };
                Ok((tail, weight.abs() * c))
            }
        },
        Decay::Flat(c) => match kd {
            KernelDecay::Harmonic { .. } => Err(Error::DivergentTail {
                kernel: "1/m",
                decay: "flat",
            }),
            KernelDecay::Square { lambda } => Ok((2.0 * lambda * c / mf, lambda * c * PI * PI / 3.0)),
            KernelDecay::Point { offset, weight } => {
                let tail = if offset.unsigned_abs() > m_max {
                    weight.abs() * c
                } else {
                    0.0
                };
                Ok((tail, weight.abs() * c))
            }
        },
    }
}

/// `sum_{odd |m| <= M} 1/m^2`, which tends to `pi^2/4`; tail bound `2/M`.
pub fn check_probability_kernel(m_max: u64) -> Result<CertifiedValue> {
    if m_max == 0 || m_max > MAX_RADIUS {
        return Err(crate::error::out_of_range("M", m_max, "1..=2^26"));
    }
    // add from the small end up to keep the rounding tiny
    let mut acc = Neumaier::default();
    let top = if m_max % 2 == 1 { m_max } else { m_max - 1 };
    let mut m = top;
    while m >= 1 {
        let mf = m as f64;
        acc.add(2.0 / (mf * mf));
        if m < 2 {
            break;
        }
        m -= 2;
    }
    Ok(CertifiedValue {
        value: acc.total(),
        bound: 2.0 / m_max as f64 + ROUNDING * 2.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::PiGraded;
    use rug::Rational;

    #[test]
    fn factorization_examples() {
        let img = ExactImage::new(OperatorKind::K, &FiniteSeq::delta(0)).unwrap();
        let v0 = apply_certified(&OperatorKind::I, &img, 0, 100_000).unwrap();
        assert!(v0.bound < 1e-4 && v0.contains(0.0), "{v0:?}");
        let v2 = apply_certified(&OperatorKind::I, &img, 2, 100_000).unwrap();
        assert!(v2.bound < 1e-4 && v2.contains(1.0 / PI), "{v2:?}");
    }

    #[test]
    fn zero_generator_gives_zero() {
        for op in [OperatorKind::K, OperatorKind::I, OperatorKind::R] {
            let v = apply_certified(&op, &FiniteSeq::zero(), 3, 10).unwrap();
            assert_eq!((v.value, v.bound), (0.0, 0.0));
        }
    }

    struct Flat;
    impl SeqGenerator for Flat {
        fn value(&self, _: i64) -> f64 {
            1.0
        }
        fn decay(&self) -> Decay {
            Decay::Flat(1.0)
        }
    }

    #[test]
    fn divergent_tail_rejected() {
        assert!(matches!(
            apply_certified(&OperatorKind::K, &Flat, 0, 100),
            Err(Error::DivergentTail { .. })
        ));
        // the probability kernel against a constant gives 1
        let v = apply_certified(&OperatorKind::I, &Flat, 0, 10_000).unwrap();
        assert!(v.contains(1.0) && v.bound < 1e-3);
    }

    #[test]
    fn harmonic_input_needs_room() {
        let img = ExactImage::new(OperatorKind::K, &FiniteSeq::delta(0)).unwrap();
        assert!(matches!(
            apply_certified(&OperatorKind::K, &img, 10, 5),
            Err(Error::TruncationTooSmall { needed: 20, .. })
        ));
    }

    #[test]
    fn finite_inputs_are_exact_once_covered() {
        let a = FiniteSeq::from_rationals([(0, Rational::from(1)), (2, Rational::from((-1, 3)))]);
        let v = apply_certified(&OperatorKind::K, &a, 1, 3).unwrap();
        let exact: PiGraded = apply_exact(&OperatorKind::K, &a, 1).unwrap();
        assert!(v.contains(exact.to_f64()));
        assert!(v.bound < 1e-13);
        let short = apply_certified(&OperatorKind::K, &a, 1, 1).unwrap();
        assert!(short.contains(exact.to_f64()));
    }

    #[test]
    fn probability_kernel_sums() {
        let v = check_probability_kernel(1_000_000).unwrap();
        let target = PI * PI / 4.0;
        assert!(v.contains(target));
        assert!((v.value - target).abs() <= 2e-6);
        let one = check_probability_kernel(1).unwrap();
        assert_eq!(one.value, 2.0);
        assert!(one.contains(target));
        let scale = 4.0 / (PI * PI);
        assert!((v.value * scale - 1.0).abs() <= v.bound * scale);
    }
}
