//! The constants `C_p = cot(pi / 2p*)`, building norms, the skeleton-sum
//! polynomial `f_k` and the bound chains built from them.

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::hp;
use crate::seq::FiniteSeq;
use crate::skeletal::{build, Frame};

/// Which closed form stands behind `C_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `cot(pi / 2q*)` with `q* = max(q, q/(q-1))`, the operator norm of
    /// `H` on `l^q`. Needs `q > 1`.
    Sharp,
    /// `cot(pi / 2q)` for every `q >= 1`, so `C_1 = 0`. Agrees with
    /// `Sharp` for `q >= 2`; the cotangent addition identities behind `f_k`
    /// are stated in this form.
    Cot,
}

/// `C_q` at `prec` bits.
pub fn constant(q: &Rational, branch: Branch, prec: u32) -> Result<Float> {
    match branch {
        Branch::Sharp => {
            if *q <= 1 {
                return Err(Error::ExponentNotAboveOne(q.to_string()));
            }
            let conj = hp::conjugate(q);
            let star = if *q >= conj { q.clone() } else { conj };
            Ok(hp::cot_pi_rational(&(Rational::from((1, 2)) / star), prec))
        }
        Branch::Cot => {
            if *q < 1 {
                return Err(Error::ExponentBelowOne(q.to_string()));
            }
            if *q == 1 {
                return Ok(Float::new(prec));
            }
            Ok(hp::cot_pi_rational(&(Rational::from((1, 2)) / q.clone()), prec))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormConstant {
    pub p: Rational,
    pub p_star: Rational,
    pub value: Float,
}

/// `C_p = cot(pi / 2p*)`: `tan(pi/2p)` for `1 < p <= 2`, `cot(pi/2p)` for
/// `p >= 2`.
pub fn sharp_constant(p: &Rational, prec: u32) -> Result<NormConstant> {
    let value = constant(p, Branch::Sharp, prec)?;
    let conj = hp::conjugate(p);
    let p_star = if *p >= conj { p.clone() } else { conj };
    Ok(NormConstant {
        p: p.clone(),
        p_star,
        value,
    })
}

/// `C_p^{{F}}`: 1 for a bone, `C_{p/|F|} prod_{f in F} C_p^{{f}}` for a set.
pub fn braced_building_norm(p: &Rational, f: &Frame, branch: Branch, prec: u32) -> Result<Float> {
    match f {
        Frame::Bone(_) => Ok(Float::with_val(prec, 1)),
        Frame::Set(es) => {
            let q = Rational::from(p / f.size() as u32);
            let mut acc = constant(&q, branch, prec)?;
            for e in es {
                acc *= braced_building_norm(p, e, branch, prec)?;
            }
            Ok(acc)
        }
    }
}

/// `C_p^F`: the product form `prod_{f in F} C_p^{{f}}` for a set, 1 for a bone.
pub fn building_norm(p: &Rational, f: &Frame, branch: Branch, prec: u32) -> Result<Float> {
    let mut acc = Float::with_val(prec, 1);
    for e in f.elements() {
        acc *= braced_building_norm(p, e, branch, prec)?;
    }
    Ok(acc)
}

/// Largest `k` for which skeleton sums are enumerated skeleton by skeleton.
pub const MAX_ENUMERATED: usize = 20;

fn check_k_le_p(p: &Rational, k: usize) -> Result<()> {
    if k == 0 {
        return Err(out_of_range("k", k, ">= 1"));
    }
    if *p < k as u32 {
        return Err(out_of_range("p", p, "p >= k"));
    }
    Ok(())
}

/// `C_{p/j}` for `j = 0..=k` (index 0 unused). A skeleton of size `k + 1`
/// only involves these.
fn constants_by_divisor(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Vec<Float>> {
    let mut out = vec![Float::new(prec)];
    for j in 1..=k {
        out.push(constant(&Rational::from(p / j as u32), branch, prec)?);
    }
    Ok(out)
}

/// `sum_{S in S_j} C_p^S` for `j = 1..=k`, visiting every skeleton.
///
/// Depth-first walk of the construction tree: the child `{S, j+1}` of a
/// skeleton `S` of size `j` has norm `C_{p/j} C_p^S`, the child
/// `S u {{j+1}}` has norm `C_p^S C_p`. Leaves at depth `j` are exactly
/// `S_j`.
pub fn skeleton_sums_enumerated(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Vec<Float>> {
    check_k_le_p(p, k)?;
    if k > MAX_ENUMERATED {
        return Err(out_of_range("k", k, "1..=20 for enumeration"));
    }
    let c = constants_by_divisor(p, k - 1, branch, prec)?;
    let mut sums: Vec<Float> = (0..=k).map(|_| Float::new(prec)).collect();
    let mut stack: Vec<Float> = (0..=k).map(|_| Float::new(prec)).collect();
    stack[1] = Float::with_val(prec, 1);
    walk(1, k, &c, &mut stack, &mut sums);
    sums.remove(0);
    Ok(sums)
}

fn walk(j: usize, k: usize, c: &[Float], stack: &mut [Float], sums: &mut [Float]) {
    sums[j] += &stack[j];
    if j == k {
        return;
    }
    let (lo, hi) = stack.split_at_mut(j + 1);
    hi[0].assign_mul(&lo[j], &c[j]);
    walk(j + 1, k, c, stack, sums);
    let (lo, hi) = stack.split_at_mut(j + 1);
    hi[0].assign_mul(&lo[j], &c[1]);
    walk(j + 1, k, c, stack, sums);
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

/// Same sums from `sum_{S_{j+1}} = (C_{p/j} + C_p) sum_{S_j}`.
pub fn skeleton_sums_recursive(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Vec<Float>> {
    check_k_le_p(p, k)?;
    let c = constants_by_divisor(p, k - 1, branch, prec)?;
    let mut out = vec![Float::with_val(prec, 1)];
    for j in 1..k {
        let next = Float::with_val(prec, &c[j] + &c[1]) * &out[j - 1];
        out.push(next);
    }
    Ok(out)
}

/// `sum_{S in S_k} C_p^S`; enumerated up to `k = 20`, recursive beyond.
pub fn skeleton_sum(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Float> {
    let sums = if k <= MAX_ENUMERATED {
        skeleton_sums_enumerated(p, k, branch, prec)?
    } else {
        skeleton_sums_recursive(p, k, branch, prec)?
    };
    Ok(sums.into_iter().last().expect("k >= 1"))
}

/// The polynomial `f_k`, with its skeleton sums computed once.
#[derive(Clone, Debug)]
pub struct Fk {
    pub p: Rational,
    pub k: usize,
    /// `sum_{S_j} C_p^S` for `j = 1..=k`.
    pub sums: Vec<Float>,
    /// The value standing in for `||K||_{p/k}`; `C_{p/k}` by default.
    pub top: Float,
    pub c_p: Float,
    prec: u32,
}

impl Fk {
    pub fn new(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Fk> {
        let sums = if k <= MAX_ENUMERATED {
            skeleton_sums_enumerated(p, k, branch, prec)?
        } else {
            skeleton_sums_recursive(p, k, branch, prec)?
        };
        Self::from_sums(p, k, sums, branch, prec)
    }

    fn from_sums(p: &Rational, k: usize, sums: Vec<Float>, branch: Branch, prec: u32) -> Result<Fk> {
        let top = constant(&Rational::from(p / k as u32), branch, prec)?;
        let c_p = constant(p, branch, prec)?;
        Ok(Fk {
            p: p.clone(),
            k,
            sums,
            top,
            c_p,
            prec,
        })
    }

    /// Replaces `C_{p/k}` by a previously established bound.
    pub fn with_top(mut self, top: Float) -> Fk {
        self.top = Float::with_val(self.prec, top);
        self
    }

    /// `(sum_{S_k} C^S) top + sum_{j<k} (sum_{S_j} C^S) x^(k-j-1)`.
    pub fn eval(&self, x: &Float) -> Float {
        let k = self.k;
        let mut out = Float::with_val(self.prec, &self.sums[k - 1] * &self.top);
        // Horner over j = 1..k-1, highest power x^(k-2) at j = 1
        let mut poly = Float::new(self.prec);
        for j in 1..k {
            poly *= x;
            poly += &self.sums[j - 1];
        }
        out += poly;
        out
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }
}

/// `f_k(x)` for `p >= k`.
pub fn f_k(p: &Rational, k: usize, x: &Float, branch: Branch, prec: u32) -> Result<Float> {
    if x.is_sign_negative() && !x.is_zero() {
        return Err(out_of_range("x", x.to_f64(), "x >= 0"));
    }
    Ok(Fk::new(p, k, branch, prec)?.eval(x))
}

/// `|f_k(C_p) - C_p^k|`.
pub fn check_fixed_point(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Float> {
    let fk = Fk::new(p, k, branch, prec)?;
    Ok(fixed_point_residual(&fk))
}

fn fixed_point_residual(fk: &Fk) -> Float {
    let lhs = fk.eval(&fk.c_p);
    let rhs = Float::with_val(fk.prec, (&fk.c_p).pow(fk.k as u32));
    Float::with_val(fk.prec, lhs - rhs).abs()
}

/// Fixed-point residuals for every `1 <= k <= k_max`, `k <= p <= p_max`,
/// integer `p`. One skeleton walk per `p` serves all `k`.
pub fn fixed_point_grid(k_max: usize, p_max: u32, branch: Branch, prec: u32) -> Result<Vec<(u32, usize, Float)>> {
    if k_max == 0 || k_max > MAX_ENUMERATED {
        return Err(out_of_range("k_max", k_max, "1..=20"));
    }
    let rows: Vec<Result<Vec<(u32, usize, Float)>>> = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            let pr = Rational::from(p);
            let top_k = k_max.min(p as usize);
            let sums = skeleton_sums_enumerated(&pr, top_k, branch, prec)?;
            let mut out = Vec::with_capacity(top_k);
            for k in 1..=top_k {
                let fk = Fk::from_sums(&pr, k, sums[..k].to_vec(), branch, prec)?;
                out.push((p, k, fixed_point_residual(&fk)));
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    all.sort_by_key(|(p, k, _)| (*k, *p));
    Ok(all)
}

/// Bisection for the root of `f_k(x)/x^k = 1` on `[1, 10 C_p]`.
///
/// `f_k(x)/x^k` is decreasing for `x > 0` since `f_k` has non-negative
/// coefficients and degree below `k`.
pub fn solve_bound(p: &Rational, k: usize, branch: Branch, prec: u32) -> Result<Float> {
    solve_fk(&Fk::new(p, k, branch, prec)?)
}

pub fn solve_fk(fk: &Fk) -> Result<Float> {
    let prec = fk.prec;
    let k = fk.k as u32;
    let tiny = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
    let g = |x: &Float| -> Float {
        let xk = Float::with_val(prec, x.pow(k));
        Float::with_val(prec, fk.eval(x) / xk) - 1u32
    };
    let mut lo = Float::with_val(prec, 1);
    let mut hi = Float::with_val(prec, &fk.c_p * 10u32).max(&lo);
    let (glo, ghi) = (g(&lo), g(&hi));
    // treat values within rounding of zero as zero
    let neg = |v: &Float| *v < 0 && Float::with_val(prec, v.abs_ref()) > tiny;
    let pos = |v: &Float| *v > 0 && Float::with_val(prec, v.abs_ref()) > tiny;
    if neg(&glo) || pos(&ghi) {
        return Err(Error::Bracket {
            lo: lo.to_f64().to_string(),
            hi: hi.to_f64().to_string(),
        });
    }
    let rel = Float::with_val(prec, 1e-12) / 4u32;
    for _ in 0..400 {
        let width = Float::with_val(prec, &hi - &lo);
        if width <= Float::with_val(prec, &rel * &lo) {
            break;
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if g(&mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Float::with_val(prec, &lo + &hi) / 2u32)
}

/// `|cot a cot b - (cot(a+b) cot b + cot(a+b) cot a + 1)|` for
/// `a, b > 0`, `a + b < pi`.
pub fn check_cot_sum_identity(alpha: &Float, beta: &Float) -> Result<Float> {
    let prec = alpha.prec().max(beta.prec());
    let pi = Float::with_val(prec, Constant::Pi);
    let sum = Float::with_val(prec, alpha + beta);
    if *alpha <= 0 || *beta <= 0 || sum >= pi {
        return Err(out_of_range("(alpha, beta)", format!("({}, {})", alpha.to_f64(), beta.to_f64()), "alpha, beta > 0 and alpha + beta < pi"));
    }
    let (ca, cb, cs) = (hp::cot(&Float::with_val(prec, alpha)), hp::cot(&Float::with_val(prec, beta)), hp::cot(&sum));
    let lhs = Float::with_val(prec, &ca * &cb);
    let rhs = Float::with_val(prec, &cs * &cb) + Float::with_val(prec, &cs * &ca) + 1u32;
    Ok(Float::with_val(prec, lhs - rhs).abs())
}

/// `|2 cot(pi/p) cot(pi/2p) + 1 - cot^2(pi/2p)|`.
pub fn k2_identity_residual(p: u32, prec: u32) -> Result<Float> {
    if p < 2 {
        return Err(out_of_range("p", p, ">= 2"));
    }
    let a = hp::cot_pi_rational(&Rational::from((1, p)), prec);
    let b = hp::cot_pi_rational(&Rational::from((1, 2 * p)), prec);
    let lhs = Float::with_val(prec, &a * &b) * 2u32 + 1u32;
    let rhs = Float::with_val(prec, b.square_ref());
    Ok(Float::with_val(prec, lhs - rhs).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sharp,
    Skeletal,
    Doubling,
    GohbergKrupnik,
    Titchmarsh,
    Riesz,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sharp => "sharp",
            Method::Skeletal => "skeletal",
            Method::Doubling => "doubling",
            Method::GohbergKrupnik => "gohberg_krupnik",
            Method::Titchmarsh => "titchmarsh",
            Method::Riesz => "riesz",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Some(match s {
            "sharp" => Method::Sharp,
            "skeletal" | "theorem" | "theorem-chain" => Method::Skeletal,
            "doubling" => Method::Doubling,
            "gohberg_krupnik" | "gohberg-krupnik" | "gk" => Method::GohbergKrupnik,
            "titchmarsh" => Method::Titchmarsh,
            "riesz" => Method::Riesz,
            _ => return None,
        })
    }
}

/// A sequence of `(p, bound)` pairs produced by one method.
#[derive(Clone, Debug)]
pub struct BoundChain {
    pub method: Method,
    pub steps: Vec<(Rational, Float)>,
}

impl BoundChain {
    pub fn last(&self) -> &Float {
        &self.steps.last().expect("chains are nonempty").1
    }
}

fn even_at_least_two(p: u32) -> Result<()> {
    if p < 2 || p % 2 != 0 {
        return Err(out_of_range("p", p, "even, >= 2"));
    }
    Ok(())
}

fn power_of_two(p: u32) -> Result<()> {
    if p < 2 || !p.is_power_of_two() {
        return Err(out_of_range("p", p, "power of two, >= 2"));
    }
    Ok(())
}

/// `||K||_2 = 1`, then a single step with `k = p/2` to reach `p`.
pub fn theorem_chain(p: u32, prec: u32) -> Result<BoundChain> {
    even_at_least_two(p)?;
    let mut steps = vec![(Rational::from(2), Float::with_val(prec, 1))];
    if p > 2 {
        let pr = Rational::from(p);
        let fk = Fk::new(&pr, (p / 2) as usize, Branch::Sharp, prec)?.with_top(Float::with_val(prec, 1));
        steps.push((pr, solve_fk(&fk)?));
    }
    Ok(BoundChain {
        method: Method::Skeletal,
        steps,
    })
}

/// `2 -> 4 -> 8 -> ... -> p` with `k = 2` at each step, each step fed the
/// bound from the previous one.
pub fn doubling_chain(p: u32, prec: u32) -> Result<BoundChain> {
    power_of_two(p)?;
    let mut steps = vec![(Rational::from(2), Float::with_val(prec, 1))];
    let mut q = 2;
    while q < p {
        q *= 2;
        let prev = steps.last().expect("nonempty").1.clone();
        let fk = Fk::new(&Rational::from(q), 2, Branch::Sharp, prec)?.with_top(prev);
        steps.push((Rational::from(q), solve_fk(&fk)?));
    }
    Ok(BoundChain {
        method: Method::Doubling,
        steps,
    })
}

/// Historical bounds: the Gohberg–Krupnik and Titchmarsh doubling
/// recursions from `||.||_2 = 1`, and Riesz's `2k / log 2` at `p = 2k`.
pub fn historical_chain(method: Method, p: u32, prec: u32) -> Result<BoundChain> {
    let mut steps = Vec::new();
    match method {
        Method::GohbergKrupnik | Method::Titchmarsh => {
            power_of_two(p)?;
            let mut x = Float::with_val(prec, 1);
            let mut q = 2u32;
            steps.push((Rational::from(q), x.clone()));
            let two_over_pi = Float::with_val(prec, Constant::Pi).recip() * 2u32;
            while q < p {
                let x2 = Float::with_val(prec, x.square_ref());
                let radicand = if method == Method::GohbergKrupnik {
                    x2 + 1u32
                } else {
                    Float::with_val(prec, &two_over_pi * (5 * q + 3)) * &x + x2 * 2u32
                };
                x += radicand.sqrt();
                q *= 2;
                steps.push((Rational::from(q), x.clone()));
            }
        }
        Method::Riesz => {
            even_at_least_two(p)?;
            let ln2 = Float::with_val(prec, Constant::Log2);
            for q in (2..=p).step_by(2) {
                steps.push((Rational::from(q), Float::with_val(prec, q) / &ln2));
            }
        }
        other => return Err(Error::UnsupportedOperator(format!("historical method {}", other.name()))),
    }
    Ok(BoundChain { method, steps })
}

/// Both sides of `||H^S a||_{p/|S|} <= C_p^S ||a||_p^|S|`.
pub fn check_building_norm_bound(p: &Rational, s: &Frame, a: &FiniteSeq, prec: u32) -> Result<(f64, f64)> {
    let size = s.size() as u32;
    let q = Rational::from(p / size);
    if q <= 1 {
        return Err(out_of_range("p/|S|", q, "> 1"));
    }
    let b = build(s, a)?;
    let lhs = b.lp_norm_hp(q.to_f64(), prec)?.to_f64();
    let norm_a = a.lp_norm_hp(p.to_f64(), prec)?;
    let c = building_norm(p, s, Branch::Sharp, prec)?;
    let rhs = Float::with_val(prec, c * norm_a.pow(size)).to_f64();
    Ok((lhs, rhs))
}

/// One row of a norm table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRecord {
    pub method: Method,
    pub p: String,
    pub k: Option<u32>,
    pub bound: f64,
    pub sharp: f64,
    /// `bound - sharp`; zero up to rounding for sharp methods.
    pub residual: f64,
    pub status: Status,
}

/// Whether the sharp value at `p` is established (even `p` or its dual).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Proven,
    Conjectured,
}

pub fn status_of(p: &Rational) -> Status {
    let conj = if *p > 1 { hp::conjugate(p) } else { p.clone() };
    let even = |q: &Rational| q.is_integer() && q.numer().is_even() && *q >= 2;
    if even(p) || even(&conj) {
        Status::Proven
    } else {
        Status::Conjectured
    }
}

/// Norm-table rows for one `p` and the requested methods. Methods that do
/// not apply at this `p` are skipped.
pub fn norm_records(p: &Rational, methods: &[Method], prec: u32) -> Result<Vec<NormRecord>> {
    let sharp = sharp_constant(p, prec)?.value;
    let sharp_f = sharp.to_f64();
    let int_p = if p.is_integer() { p.numer().to_u32() } else { None };
    let mut rows = Vec::new();
    for m in methods {
        let (k, bound) = match (m, int_p) {
            (Method::Sharp, _) => (None, sharp.clone()),
            (Method::Skeletal, Some(q)) if q % 2 == 0 => (Some(q / 2), theorem_chain(q, prec)?.last().clone()),
            (Method::Doubling, Some(q)) if q.is_power_of_two() && q >= 2 => {
                (Some(2), doubling_chain(q, prec)?.last().clone())
            }
            (Method::GohbergKrupnik | Method::Titchmarsh, Some(q)) if q.is_power_of_two() && q >= 2 => {
                (None, historical_chain(*m, q, prec)?.last().clone())
            }
            (Method::Riesz, Some(q)) if q % 2 == 0 && q >= 2 => {
                (Some(q / 2), historical_chain(*m, q, prec)?.last().clone())
            }
            _ => continue,
        };
        let residual = Float::with_val(prec, &bound - &sharp).to_f64();
        rows.push(NormRecord {
            method: *m,
            p: p.to_string(),
            k,
            bound: bound.to_f64(),
            sharp: sharp_f,
            residual,
            status: status_of(p),
        });
    }
    Ok(rows)
}
