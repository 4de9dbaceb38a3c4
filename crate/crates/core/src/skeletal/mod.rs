//! Skeletons, buildings and the expansion of `(K a)^k` by repeated use of
//! the product rule `K x . K y = K[x . H y] + K[H x . y] + I[x y]`.

mod building;
mod expr;
mod frame;

use std::collections::{BTreeMap, BTreeSet};

use rug::Rational;

use crate::error::{out_of_range, Error, Result};
use crate::exact::PiGraded;
use crate::operators::{apply_exact, OperatorKind};
use crate::seq::FiniteSeq;

pub use building::{build, build_braced, build_counted, building_expr};
pub use expr::{exprs_equal, Expansion, SeqExpr, Term};
pub use frame::{enumerate_skeletons, skeleton_at, skeleton_count, skeletons, Frame, MAX_SKELETON_SIZE};

pub const MAX_EXPANSION_POWER: usize = 12;
pub const MAX_EXACT_POWER: usize = 8;

/// The three outputs of the product rule for `K x . K y`.
fn product_rule(x: &SeqExpr, y: &SeqExpr) -> [SeqExpr; 3] {
    [
        SeqExpr::k(SeqExpr::product(vec![x.clone(), SeqExpr::h(y.clone())])),
        SeqExpr::k(SeqExpr::product(vec![SeqExpr::h(x.clone()), y.clone()])),
        SeqExpr::i(SeqExpr::product(vec![x.clone(), y.clone()])),
    ]
}

/// Applies the rule once to a factor list and merges outputs that are
/// canonically equal, keeping first-occurrence order.
fn rewrite_once(coeff: i64, factors: &[SeqExpr], ka: usize, target: usize) -> Vec<(i64, Vec<SeqExpr>)> {
    let (x, y) = match (&factors[ka], &factors[target]) {
        (SeqExpr::K(x), SeqExpr::K(y)) => (x.as_ref(), y.as_ref()),
        _ => unreachable!("both factors are K[...]"),
    };
    let mut out: Vec<(i64, Vec<SeqExpr>, String)> = Vec::new();
    for new in product_rule(x, y) {
        let mut fs: Vec<SeqExpr> = Vec::with_capacity(factors.len() - 1);
        for (i, f) in factors.iter().enumerate() {
            if i == ka {
                continue;
            }
            if i == target {
                new.clone().push_factors(&mut fs);
            } else {
                fs.push(f.clone());
            }
        }
        let key = SeqExpr::product(fs.clone()).canonical();
        match out.iter_mut().find(|(_, _, k)| *k == key) {
            Some(entry) => entry.0 += coeff,
            None => out.push((coeff, fs, key)),
        }
    }
    out.into_iter().map(|(c, fs, _)| (c, fs)).collect()
}

/// Develops one summand until it is a lone `K[...]` or has no `K[...]`
/// factor other than `K a`. Results are appended depth first.
fn develop(coeff: i64, factors: Vec<SeqExpr>, out: &mut Vec<Term>) {
    let lone_k = factors.len() == 1 && matches!(factors[0], SeqExpr::K(_));
    let target = factors
        .iter()
        .position(|f| matches!(f, SeqExpr::K(_)) && !f.is_ka());
    let ka = factors.iter().position(SeqExpr::is_ka);
    match (lone_k, target, ka) {
        (false, Some(t), Some(q)) => {
            for (c, fs) in rewrite_once(coeff, &factors, q, t) {
                develop(c, fs, out);
            }
        }
        _ => out.push(Term::new(coeff, SeqExpr::product(factors))),
    }
}

/// `(K a)^k` developed by the product rule: pair the first two `K a`
/// factors, then repeatedly pair the single non-trivial `K[...]` factor of
/// a summand with one `K a`, never touching `I[...] . (K a)^j` summands.
pub fn expand_power(k: usize) -> Result<Expansion> {
    if k == 0 || k > MAX_EXPANSION_POWER {
        return Err(out_of_range("k", k, "1..=12"));
    }
    if k == 1 {
        return Ok(Expansion::new(vec![Term::new(1, SeqExpr::ka())]));
    }
    let pair = vec![SeqExpr::ka(), SeqExpr::ka()];
    let mut terms: Vec<Term> = rewrite_once(1, &pair, 0, 1)
        .into_iter()
        .map(|(c, fs)| Term::new(c, SeqExpr::product(fs)))
        .collect();
    for _ in 3..=k {
        let mut next = Vec::new();
        for t in terms {
            let mut fs = vec![SeqExpr::ka()];
            t.expr.push_factors(&mut fs);
            develop(t.coeff, fs, &mut next);
        }
        terms = next;
    }
    Ok(Expansion::new(terms))
}

/// The closed-form decomposition built from skeletons:
/// `sum_{S in S_k} K[H^S a] + sum_{j<k} sum_{S in S_j} I[a . H^S a] . (K a)^(k-j-1)`,
/// with canonically equal terms grouped.
pub fn skeleton_normal_form(k: usize) -> Result<Expansion> {
    if k == 0 || k > MAX_EXPANSION_POWER {
        return Err(out_of_range("k", k, "1..=12"));
    }
    let mut terms = Vec::new();
    for s in skeletons(k)? {
        terms.push(Term::new(1, SeqExpr::k(building_expr(&s))));
    }
    for j in 1..k {
        for s in skeletons(j)? {
            let inner = SeqExpr::i(SeqExpr::product(vec![SeqExpr::Atom, building_expr(&s)]));
            let e = SeqExpr::product(vec![SeqExpr::PowerOfKA((k - j - 1) as u32), inner]);
            terms.push(Term::new(1, e));
        }
    }
    Ok(Expansion::new(terms).grouped())
}

/// Exact `(K a)^k - RHS` on `[lo, hi]`, the right-hand side evaluated term
/// by term from skeleton buildings.
pub fn check_decomposition(a: &FiniteSeq, k: usize, lo: i64, hi: i64) -> Result<FiniteSeq> {
    if k == 0 || k > MAX_EXACT_POWER {
        return Err(out_of_range("k", k, "1..=8"));
    }
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let top: Vec<FiniteSeq> = skeletons(k)?.map(|s| build(&s, a)).collect::<Result<_>>()?;
    let mut lower: Vec<FiniteSeq> = Vec::new();
    let mut lower_power: Vec<u32> = Vec::new();
    for j in 1..k {
        for s in skeletons(j)? {
            lower.push(a.pointwise_mul(&build(&s, a)?));
            lower_power.push((k - j - 1) as u32);
        }
    }
    let mut residual = FiniteSeq::zero();
    for n in lo..=hi {
        let ka = apply_exact(&OperatorKind::K, a, n)?;
        let mut powers = vec![PiGraded::one()];
        for _ in 1..k {
            let next = powers.last().expect("nonempty") * &ka;
            powers.push(next);
        }
        let lhs = powers[k - 1].clone() * ka.clone();
        let mut rhs = PiGraded::zero();
        for b in &top {
            rhs += &apply_exact(&OperatorKind::K, b, n)?;
        }
        for (b, j) in lower.iter().zip(&lower_power) {
            let i = apply_exact(&OperatorKind::I, b, n)?;
            rhs += &(&i * &powers[*j as usize]);
        }
        residual.set(n, lhs - rhs);
    }
    Ok(residual)
}

/// Indices where an expression can be nonzero, when that set is finite.
fn support_of(e: &SeqExpr, a: &BTreeSet<i64>) -> Option<BTreeSet<i64>> {
    match e {
        SeqExpr::Atom => Some(a.clone()),
        SeqExpr::Product(fs) => fs
            .iter()
            .filter_map(|f| support_of(f, a))
            .reduce(|x, y| x.intersection(&y).copied().collect()),
        _ => None,
    }
}

fn eval_points(e: &SeqExpr, a: &FiniteSeq, supp: &BTreeSet<i64>, pts: &[i64]) -> Result<Vec<PiGraded>> {
    match e {
        SeqExpr::Atom => Ok(pts.iter().map(|n| a.value(*n)).collect()),
        SeqExpr::K(x) | SeqExpr::H(x) | SeqExpr::I(x) => {
            let op = match e {
                SeqExpr::K(_) => OperatorKind::K,
                SeqExpr::H(_) => OperatorKind::H,
                _ => OperatorKind::I,
            };
            let sx = support_of(x, supp).ok_or_else(|| Error::NotFinitelySupported(x.to_string()))?;
            let at: Vec<i64> = sx.into_iter().collect();
            let vals = eval_points(x, a, supp, &at)?;
            let xs = FiniteSeq::from_values(at.into_iter().zip(vals));
            pts.iter().map(|n| apply_exact(&op, &xs, *n)).collect()
        }
        SeqExpr::PowerOfKA(j) => pts
            .iter()
            .map(|n| Ok(apply_exact(&OperatorKind::K, a, *n)?.pow(*j)))
            .collect(),
        SeqExpr::Product(fs) => {
            let live: Vec<i64> = match support_of(e, supp) {
                Some(s) => pts.iter().copied().filter(|n| s.contains(n)).collect(),
                None => pts.to_vec(),
            };
            let mut acc: BTreeMap<i64, PiGraded> = live.iter().map(|n| (*n, PiGraded::one())).collect();
            for f in fs {
                let vals = eval_points(f, a, supp, &live)?;
                for (n, v) in live.iter().zip(vals) {
                    let cur = acc.get_mut(n).expect("live index");
                    *cur = &*cur * &v;
                }
            }
            Ok(pts.iter().map(|n| acc.remove(n).unwrap_or_default()).collect())
        }
    }
}

impl Expansion {
    /// Exact value of the sum on `[lo, hi]` for input `a`.
    pub fn eval_window(&self, a: &FiniteSeq, lo: i64, hi: i64) -> Result<FiniteSeq> {
        if lo > hi {
            return Err(Error::EmptyWindow(lo, hi));
        }
        let supp = a.support_set();
        let pts: Vec<i64> = (lo..=hi).collect();
        let mut total: Vec<PiGraded> = vec![PiGraded::zero(); pts.len()];
        for t in &self.terms {
            let c = Rational::from(t.coeff);
            for (acc, v) in total.iter_mut().zip(eval_points(&t.expr, a, &supp, &pts)?) {
                *acc += &v.scale(&c);
            }
        }
        Ok(FiniteSeq::from_values(pts.into_iter().zip(total)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn low_powers() {
        assert_eq!(expand_power(1).unwrap().to_string(), "K[a]");
        assert_eq!(expand_power(2).unwrap().to_string(), "2*K[a*H[a]] + I[a^2]");
        assert_eq!(
            expand_power(3).unwrap().to_string(),
            "2*K[a*H[a*H[a]]] + 2*K[H[a]*a*H[a]] + 2*I[a^2*H[a]] + K[a]*I[a^2]"
        );
        assert!(expand_power(0).is_err() && expand_power(13).is_err());
    }

    #[test]
    fn normal_forms_agree() {
        for k in 1..=8 {
            assert!(exprs_equal(&expand_power(k).unwrap(), &skeleton_normal_form(k).unwrap()), "k = {k}");
        }
        assert!(!exprs_equal(&expand_power(2).unwrap(), &skeleton_normal_form(3).unwrap()));
        assert_eq!(skeleton_normal_form(2).unwrap().to_string(), "2*K[H[a]*a] + I[a^2]");
        assert_eq!(skeleton_normal_form(1).unwrap().to_string(), "K[a]");
    }

    #[test]
    fn k_weight_counts_skeletons() {
        for k in 2..=8 {
            let w = expand_power(k).unwrap().k_weight();
            assert_eq!(w, 1 << (k - 1));
        }
    }

    #[test]
    fn decomposition_on_impulse() {
        let d0 = FiniteSeq::delta(0);
        assert!(check_decomposition(&d0, 2, -9, 9).unwrap().is_zero());
        let a = FiniteSeq::from_rationals([(0, q(1, 1)), (1, q(-2, 3)), (4, q(5, 2))]);
        for k in 1..=4 {
            assert!(check_decomposition(&a, k, -12, 12).unwrap().is_zero(), "k = {k}");
        }
    }

    #[test]
    fn symbolic_expansion_evaluates_to_power() {
        let a = FiniteSeq::from_rationals([(-1, q(3, 1)), (0, q(1, 2)), (2, q(-1, 1))]);
        for k in 1..=5 {
            let e = expand_power(k).unwrap();
            let got = e.eval_window(&a, -8, 8).unwrap();
            for n in -8..=8 {
                let ka = apply_exact(&OperatorKind::K, &a, n).unwrap();
                assert_eq!(got.value(n), ka.pow(k as u32), "k = {k}, n = {n}");
            }
        }
    }

    #[test]
    fn unsupported_inner_argument_is_reported() {
        let e: Expansion = "K[H[a]]".parse().unwrap();
        assert!(matches!(
            e.eval_window(&FiniteSeq::delta(0), 0, 1),
            Err(Error::NotFinitelySupported(_))
        ));
    }
}
