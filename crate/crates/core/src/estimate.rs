//! Lower bounds on `l^p` operator norms from windowed restrictions.
//!
//! `P_N T P_N` has norm at most `||T||_p`, so every ratio reported here is a
//! lower-bound candidate for the full operator norm. Nothing in this module
//! certifies an upper bound.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::operators::{Neumaier, OperatorKind};
use crate::seq::{check_exponent, lp_norm_f64, lp_norm_mp, FloatWindow};

/// Precision of the final ratio evaluation.
pub const REEVAL_PRECISION: u32 = 128;

/// Radii above this re-evaluate the best vector through the FFT path
/// instead of the O(N^2) compensated sum.
pub const DIRECT_REEVAL_LIMIT: usize = 8192;

/// `P_N T P_N` for a convolution operator `T`.
pub struct WindowedOperator {
    kind: OperatorKind,
    radius: usize,
    /// `k(m)` for `m = -2N..=2N`.
    row: Vec<f64>,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
    adjoint_spectrum: Vec<Complex64>,
}

impl std::fmt::Debug for WindowedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WindowedOperator")
            .field("kind", &self.kind)
            .field("radius", &self.radius)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl WindowedOperator {
    pub fn new(kind: OperatorKind, radius: usize) -> Result<WindowedOperator> {
        if radius > 1 << 24 {
            return Err(out_of_range("N", radius, "0..=2^24"));
        }
        let kernel = kind.float_kernel();
        let r = 2 * radius as i64;
        let row: Vec<f64> = (-r..=r).map(|m| kernel.at(m)).collect();
        // 4N+1 slots keep every offset in [-2N, 2N] distinct mod L
        let fft_len = (4 * radius + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let spectrum_of = |reflect: bool| {
            let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
            for (i, k) in row.iter().enumerate() {
                let m = i as i64 - r;
                let m = if reflect { -m } else { m };
                buf[m.rem_euclid(fft_len as i64) as usize] = Complex64::new(*k, 0.0);
            }
            forward.process(&mut buf);
            buf
        };
        let spectrum = spectrum_of(false);
        let adjoint_spectrum = spectrum_of(true);
        Ok(WindowedOperator {
            kind,
            radius,
            row,
            fft_len,
            forward,
            inverse,
            spectrum,
            adjoint_spectrum,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Kernel value at offset `m`, zero for `|m| > 2N`.
    pub fn kernel(&self, m: i64) -> f64 {
        let r = 2 * self.radius as i64;
        if m.abs() > r {
            0.0
        } else {
            self.row[(m + r) as usize]
        }
    }

    fn check(&self, x: &FloatWindow) -> Result<()> {
        if x.radius() != self.radius {
            return Err(Error::SizeMismatch {
                expected: self.radius,
                got: x.radius(),
            });
        }
        Ok(())
    }

    fn direct(&self, x: &FloatWindow, adjoint: bool) -> Result<FloatWindow> {
        self.check(x)?;
        let n = self.radius as i64;
        let xs = x.as_slice();
        let sign = if adjoint { -1 } else { 1 };
        let out: Vec<f64> = (-n..=n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Neumaier::default();
                for (jj, v) in xs.iter().enumerate() {
                    if *v != 0.0 {
                        let j = jj as i64 - n;
                        acc.add(self.kernel(sign * (i - j)) * v);
                    }
                }
                acc.total()
            })
            .collect();
        FloatWindow::from_vec(out)
    }

    fn fast(&self, x: &FloatWindow, adjoint: bool) -> Result<FloatWindow> {
        self.check(x)?;
        let len = x.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (b, v) in buf.iter_mut().zip(x.as_slice()) {
            b.re = *v;
        }
        self.forward.process(&mut buf);
        let spec = if adjoint { &self.adjoint_spectrum } else { &self.spectrum };
        for (b, s) in buf.iter_mut().zip(spec) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        // input sits at slots 0..2N, so output n lands at slot n + N
        let scale = 1.0 / self.fft_len as f64;
        let out = buf[..len].iter().map(|c| c.re * scale).collect();
        FloatWindow::from_vec(out)
    }

    /// `y_n = sum_{|j| <= N} k(n - j) x_j` by compensated direct summation.
    pub fn apply_direct(&self, x: &FloatWindow) -> Result<FloatWindow> {
        self.direct(x, false)
    }

    /// Same as [`apply_direct`](Self::apply_direct) through a circular
    /// convolution of length at least `4N + 1`.
    pub fn apply_fft(&self, x: &FloatWindow) -> Result<FloatWindow> {
        self.fast(x, false)
    }

    /// Direct path for small windows, FFT otherwise.
    pub fn apply(&self, x: &FloatWindow) -> Result<FloatWindow> {
        if self.radius <= 64 {
            self.direct(x, false)
        } else {
            self.fast(x, false)
        }
    }

    /// The transpose: convolution with the reflected kernel.
    pub fn apply_adjoint(&self, x: &FloatWindow) -> Result<FloatWindow> {
        if self.radius <= 64 {
            self.direct(x, true)
        } else {
            self.fast(x, true)
        }
    }

    pub fn apply_adjoint_direct(&self, x: &FloatWindow) -> Result<FloatWindow> {
        self.direct(x, true)
    }
}

/// `apply_windowed` under its contract name.
pub fn apply_windowed(w: &WindowedOperator, x: &FloatWindow) -> Result<FloatWindow> {
    w.apply(x)
}

/// Starting vectors for the power iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// `sign(sin((n + 1/2) pi/2)) (1 + |n|)^(-1/p)`.
    Alternating,
    /// The even-index subsequence of `Alternating`, the profile that `K`
    /// sees through `R` after interleaving.
    Interleaved,
    /// `sign(n) |n|^(-1/p)`, the odd power profile.
    OddPower,
    /// The indicator of the window.
    Flat,
    /// Uniform entries in `[-1, 1]` from the run seed.
    Random,
}

impl Start {
    pub fn name(&self) -> &'static str {
        match self {
            Start::Alternating => "alternating",
            Start::Interleaved => "interleaved",
            Start::OddPower => "odd_power",
            Start::Flat => "flat",
            Start::Random => "random",
        }
    }

    pub fn window(&self, radius: usize, p: f64, seed: u64) -> FloatWindow {
        let decay = |n: i64| (1.0 + n.abs() as f64).powf(-1.0 / p);
        match self {
            Start::Alternating => FloatWindow::from_fn(radius, |n| {
                let s = if n.rem_euclid(4) < 2 { 1.0 } else { -1.0 };
                s * decay(n)
            }),
            Start::Interleaved => FloatWindow::from_fn(radius, |n| {
                let s = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                s * decay(2 * n)
            }),
            Start::OddPower => FloatWindow::from_fn(radius, |n| match n {
                0 => 0.0,
                _ => n.signum() as f64 * (n.abs() as f64).powf(-1.0 / p),
            }),
            Start::Flat => FloatWindow::from_fn(radius, |_| 1.0),
            Start::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                FloatWindow::from_fn(radius, |_| rng.gen_range(-1.0..=1.0))
            }
        }
    }
}

/// Starts used by [`power_iterate`] for an operator.
pub fn default_starts(kind: &OperatorKind) -> Vec<Start> {
    let mut s = vec![Start::Alternating, Start::OddPower, Start::Random, Start::Flat];
    if *kind == OperatorKind::R {
        s.insert(1, Start::Interleaved);
    }
    s
}

/// The known norm of `kind` on `l^p`: `C_p` for the Hilbert-type operators,
/// 1 for `I` and integer shifts.
pub fn reference_norm(kind: &OperatorKind, p: f64) -> Option<f64> {
    match kind {
        OperatorKind::R | OperatorKind::K | OperatorKind::H0 | OperatorKind::H => Some(sharp_f64(p)),
        OperatorKind::I => Some(1.0),
        OperatorKind::T(t) if t.is_integer() => Some(1.0),
        OperatorKind::T(_) => None,
    }
}

/// `cot(pi / 2p*)` evaluated at 128 bits.
pub fn sharp_f64(p: f64) -> f64 {
    let prec = REEVAL_PRECISION;
    let pf = Float::with_val(prec, p);
    let conj = Float::with_val(prec, &pf / Float::with_val(prec, &pf - 1u32));
    let star = if pf >= conj { pf } else { conj };
    let angle = Float::with_val(prec, Constant::Pi) / (star * 2u32);
    angle.tan().recip().to_f64()
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub op: String,
    pub p: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub iters: usize,
    pub seed: u64,
    /// Largest `||W x||_p / ||x||_p` seen, re-evaluated at 128 bits.
    pub best_ratio: f64,
    /// Reference norm, when known.
    pub sharp: Option<f64>,
    /// `sharp - best_ratio`.
    pub gap: Option<f64>,
    pub start: Start,
    pub seconds: f64,
    /// Best-so-far ratio after each iteration, over all starts.
    #[serde(skip)]
    pub curve: Vec<f64>,
    #[serde(skip)]
    pub best: FloatWindow,
}

fn duality(x: &mut [f64], r: f64) {
    if r == 2.0 {
        return;
    }
    for v in x.iter_mut() {
        *v = v.signum() * v.abs().powf(r - 1.0);
    }
}

fn normalize(x: &mut [f64], p: f64) -> bool {
    let n = lp_norm_f64(x, p);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

struct Run {
    curve: Vec<f64>,
    best: FloatWindow,
    best_ratio: f64,
}

fn iterate_from(w: &WindowedOperator, p: f64, iters: usize, start: FloatWindow) -> Result<Run> {
    let q = p / (p - 1.0);
    let mut x = start;
    let mut curve = Vec::with_capacity(iters);
    let mut best = x.clone();
    let mut best_ratio = 0.0f64;
    let mut alive = normalize(x.as_mut_slice(), p);
    for _ in 0..iters {
        if alive {
            let mut y = w.apply(&x)?;
            let ratio = lp_norm_f64(y.as_slice(), p);
            if ratio > best_ratio {
                best_ratio = ratio;
                best = x.clone();
            }
            normalize(y.as_mut_slice(), p);
            duality(y.as_mut_slice(), p);
            let mut z = w.apply_adjoint(&y)?;
            duality(z.as_mut_slice(), q);
            alive = normalize(z.as_mut_slice(), p);
            x = z;
        }
        curve.push(best_ratio);
    }
    Ok(Run {
        curve,
        best,
        best_ratio,
    })
}

/// `||W x||_p / ||x||_p` with `W x` summed in compensated double (or by FFT
/// past [`DIRECT_REEVAL_LIMIT`]) and both norms accumulated at 128 bits.
pub fn ratio_hp(w: &WindowedOperator, x: &FloatWindow, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let y = if w.radius() <= DIRECT_REEVAL_LIMIT {
        w.apply_direct(x)?
    } else {
        w.apply_fft(x)?
    };
    let prec = REEVAL_PRECISION;
    let den = lp_norm_mp(x.as_slice(), p, prec);
    if den.is_zero() {
        return Ok(0.0);
    }
    Ok((lp_norm_mp(y.as_slice(), p, prec) / den).to_f64())
}

fn check_estimate_args(p: f64, iters: usize) -> Result<()> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::ExponentNotAboveOne(p.to_string()));
    }
    if iters == 0 {
        return Err(out_of_range("iters", iters, ">= 1"));
    }
    Ok(())
}

/// Nonlinear power iteration `x <- J_q(W^T J_p(W x))` from the default
/// starts; the best of all starts is reported.
pub fn power_iterate(w: &WindowedOperator, p: f64, iters: usize, seed: u64) -> Result<EstimateReport> {
    let starts: Vec<(Start, FloatWindow)> = default_starts(w.kind())
        .into_iter()
        .map(|s| (s, s.window(w.radius(), p, seed)))
        .collect();
    power_iterate_from(w, p, iters, seed, starts)
}

/// [`power_iterate`] with explicit starting vectors.
pub fn power_iterate_from(
    w: &WindowedOperator,
    p: f64,
    iters: usize,
    seed: u64,
    starts: Vec<(Start, FloatWindow)>,
) -> Result<EstimateReport> {
    check_estimate_args(p, iters)?;
    if starts.is_empty() {
        return Err(out_of_range("starts", 0, ">= 1"));
    }
    let clock = Instant::now();
    let runs: Vec<(Start, Run)> = starts
        .into_par_iter()
        .map(|(s, x)| iterate_from(w, p, iters, x).map(|r| (s, r)))
        .collect::<Result<_>>()?;
    let mut curve = vec![0.0f64; iters];
    for (_, r) in &runs {
        for (c, v) in curve.iter_mut().zip(&r.curve) {
            *c = c.max(*v);
        }
    }
    // first start wins ties, keeping the report independent of scheduling
    let mut win = 0;
    for (i, (_, r)) in runs.iter().enumerate() {
        if r.best_ratio > runs[win].1.best_ratio {
            win = i;
        }
    }
    let (start, run) = runs.into_iter().nth(win).expect("nonempty");
    let best_ratio = ratio_hp(w, &run.best, p)?;
    let sharp = reference_norm(w.kind(), p);
    Ok(EstimateReport {
        op: w.kind().name(),
        p,
        n: w.radius(),
        iters,
        seed,
        best_ratio,
        sharp,
        gap: sharp.map(|s| s - best_ratio),
        start,
        seconds: clock.elapsed().as_secs_f64(),
        curve,
        best: run.best,
    })
}

/// Pads `x` with zeros to radius `r`.
pub fn pad(x: &FloatWindow, r: usize) -> FloatWindow {
    FloatWindow::from_fn(r, |n| x.get(n))
}

/// Runs at each radius in turn, adding the previous best vector (padded) to
/// the starts, so the best ratio cannot drop as the window grows.
pub fn doubling_study(
    kind: &OperatorKind,
    p: f64,
    radii: &[usize],
    iters: usize,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let mut out: Vec<EstimateReport> = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        if i > 0 && r < radii[i - 1] {
            return Err(out_of_range("radii", r, "nondecreasing"));
        }
        let w = WindowedOperator::new(kind.clone(), r)?;
        let mut starts: Vec<(Start, FloatWindow)> = default_starts(kind)
            .into_iter()
            .map(|s| (s, s.window(r, p, seed)))
            .collect();
        if let Some(prev) = out.last() {
            starts.insert(0, (prev.start, pad(&prev.best, r)));
        }
        out.push(power_iterate_from(&w, p, iters, seed, starts)?);
    }
    Ok(out)
}

/// `((2N+1-2k)/(2N+1))^(1/p) (4/pi^2) sum_{odd |m| <= k} 1/m^2`, a lower
/// bound for `||I||_p` from the indicator of `[-N, N]`: the image is at
/// least the partial kernel mass on the `2N+1-2k` interior points.
pub fn indicator_lower_bound(op: &OperatorKind, p: f64, n: u64, k: u64) -> Result<f64> {
    if *op != OperatorKind::I {
        return Err(Error::UnsupportedOperator(format!("{op} (indicator bound is for I)")));
    }
    check_exponent(p)?;
    if k == 0 || k >= n {
        return Err(out_of_range("k", k, "1 <= k < N"));
    }
    let prec = REEVAL_PRECISION;
    let mut mass = Rational::new();
    for m in (1..=k).step_by(2) {
        mass += Rational::from((2, m * m));
    }
    let pi = Float::with_val(prec, Constant::Pi);
    let mass = Float::with_val(prec, &mass) * 4u32 / Float::with_val(prec, pi.square_ref());
    let frac = Rational::from((2 * n + 1 - 2 * k, 2 * n + 1));
    let frac = Float::with_val(prec, &frac).pow(Float::with_val(prec, p).recip());
    Ok(Float::with_val(prec, frac * mass).to_f64())
}

/// `||P_N I 1_N||_p / ||1_N||_p`, the quantity the bound above estimates.
pub fn indicator_ratio(p: f64, n: usize) -> Result<f64> {
    let w = WindowedOperator::new(OperatorKind::I, n)?;
    ratio_hp(&w, &Start::Flat.window(n, p, 0), p)
}

/// Largest `||W x||_2 / ||x||_2` over `trials` random inputs.
pub fn parseval_norm_check(op: &OperatorKind, n: usize, trials: usize, seed: u64) -> Result<f64> {
    if !matches!(op, OperatorKind::K | OperatorKind::H | OperatorKind::H0) {
        return Err(Error::UnsupportedOperator(format!("{op} (Parseval check is for K, H, H0)")));
    }
    let w = WindowedOperator::new(op.clone(), n)?;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let x = Start::Random.window(n, 2.0, seed.wrapping_add(t as u64));
        let den = lp_norm_f64(x.as_slice(), 2.0);
        if den == 0.0 {
            continue;
        }
        let y = w.apply(&x)?;
        worst = worst.max(lp_norm_f64(y.as_slice(), 2.0) / den);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_2_PI, PI};

    #[test]
    fn delta_gives_kernel_row() {
        let w = WindowedOperator::new(OperatorKind::K, 4).unwrap();
        let y = w.apply(&FloatWindow::from_fn(4, |n| (n == 0) as u8 as f64)).unwrap();
        for n in -4i64..=4 {
            let expect = if n % 2 != 0 { FRAC_2_PI / n as f64 } else { 0.0 };
            assert!((y.get(n) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        for op in [OperatorKind::K, OperatorKind::I, OperatorKind::R] {
            let w = WindowedOperator::new(op, 100).unwrap();
            let z = FloatWindow::zeros(100);
            assert!(w.apply_fft(&z).unwrap().as_slice().iter().all(|v| *v == 0.0));
            assert!(w.apply_direct(&z).unwrap().as_slice().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn probability_kernel_on_ones() {
        let w = WindowedOperator::new(OperatorKind::I, 4000).unwrap();
        let y = w.apply(&Start::Flat.window(4000, 2.0, 0)).unwrap();
        for n in -40i64..=40 {
            assert!((y.get(n) - 1.0).abs() < 2e-3, "n = {n}: {}", y.get(n));
        }
    }

    #[test]
    fn fft_matches_direct() {
        let w = WindowedOperator::new(OperatorKind::H0, 300).unwrap();
        let x = Start::Random.window(300, 2.0, 5);
        let (a, b) = (w.apply_direct(&x).unwrap(), w.apply_fft(&x).unwrap());
        let scale = lp_norm_f64(a.as_slice(), 2.0);
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() <= 1e-10 * scale);
        }
        let (a, b) = (w.apply_adjoint_direct(&x).unwrap(), w.apply_adjoint(&x).unwrap());
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn odd_kernels_have_negated_adjoint() {
        let w = WindowedOperator::new(OperatorKind::K, 80).unwrap();
        let x = Start::Random.window(80, 2.0, 1);
        let (a, b) = (w.apply(&x).unwrap(), w.apply_adjoint(&x).unwrap());
        for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((u + v).abs() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch() {
        let w = WindowedOperator::new(OperatorKind::K, 4).unwrap();
        assert!(matches!(w.apply(&FloatWindow::zeros(3)), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn curve_is_monotone_and_runs_repeat() {
        let w = WindowedOperator::new(OperatorKind::K, 256).unwrap();
        let a = power_iterate(&w, 3.0, 20, 9).unwrap();
        assert!(a.curve.windows(2).all(|c| c[0] <= c[1]));
        let b = power_iterate(&w, 3.0, 20, 9).unwrap();
        assert_eq!(a.best_ratio, b.best_ratio);
        assert_eq!(a.curve, b.curve);
        assert!(a.best_ratio <= sharp_f64(3.0) + 1e-6);
    }

    #[test]
    fn l2_power_iteration_reaches_one() {
        let w = WindowedOperator::new(OperatorKind::K, 512).unwrap();
        let r = power_iterate(&w, 2.0, 50, 1).unwrap();
        assert!(r.best_ratio > 0.99 && r.best_ratio <= 1.0 + 1e-9, "{}", r.best_ratio);
    }

    #[test]
    fn indicator_bound_examples() {
        let k1 = indicator_lower_bound(&OperatorKind::I, 2.0, 1_000_000, 1).unwrap();
        assert!((k1 - 8.0 / (PI * PI)).abs() < 1e-5);
        let mut last = 0.0;
        for k in [1, 3, 11, 101] {
            let v = indicator_lower_bound(&OperatorKind::I, 3.0, 1_000_000, k).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(indicator_lower_bound(&OperatorKind::I, 3.0, 10, 10).is_err());
        assert!(indicator_lower_bound(&OperatorKind::K, 3.0, 10, 1).is_err());
    }

    #[test]
    fn parseval_small() {
        for op in [OperatorKind::K, OperatorKind::H] {
            let r = parseval_norm_check(&op, 200, 5, 3).unwrap();
            assert!(r <= 1.0 + 1e-8 && r > 0.5);
        }
    }

    #[test]
    fn sharp_reference() {
        assert!((sharp_f64(4.0) - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((sharp_f64(4.0 / 3.0) - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((sharp_f64(2.0) - 1.0).abs() < 1e-15);
    }
}
