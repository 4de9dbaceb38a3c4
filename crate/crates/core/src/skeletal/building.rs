//! Buildings: bones become `a`, inner braces become `H[...]`, commas become
//! pointwise products.

use crate::error::{Error, Result};
use crate::operators::{apply_exact, OperatorKind};
use crate::seq::FiniteSeq;

use super::expr::SeqExpr;
use super::frame::Frame;

/// Exact building `H^F a` of a frame.
///
/// For a set this is the product form `prod_{f in F} H^{{f}} a`. Every set
/// level must contain a bone, which keeps each `H` argument, and the
/// building itself, finitely supported.
pub fn build(f: &Frame, a: &FiniteSeq) -> Result<FiniteSeq> {
    build_counted(f, a).map(|(s, _)| s)
}

/// [`build`] together with the number of `H` applications performed.
pub fn build_counted(f: &Frame, a: &FiniteSeq) -> Result<(FiniteSeq, usize)> {
    if !f.bone_at_every_level() {
        return Err(Error::NotFinitelySupported(f.to_string()));
    }
    let mut count = 0;
    let out = product_form(f, a, &mut count)?;
    Ok((out, count))
}

fn product_form(f: &Frame, a: &FiniteSeq, count: &mut usize) -> Result<FiniteSeq> {
    let es = match f {
        Frame::Bone(_) => return Ok(a.clone()),
        Frame::Set(es) => es,
    };
    // a bone is present, so the product lives on supp(a)
    let mut acc = a.clone();
    let mut skipped_bone = false;
    for e in es {
        match e {
            Frame::Bone(_) if !skipped_bone => skipped_bone = true,
            Frame::Bone(_) => acc = acc.pointwise_mul(a),
            Frame::Set(_) => {
                let inner = product_form(e, a, count)?;
                *count += 1;
                let mut h = FiniteSeq::zero();
                for n in acc.support().collect::<Vec<_>>() {
                    h.set(n, apply_exact(&OperatorKind::H, &inner, n)?);
                }
                acc = acc.pointwise_mul(&h);
            }
        }
    }
    Ok(acc)
}

/// `H^{{F}} a` on `[lo, hi]`: `a` itself for a bone, else `H[H^F a]`.
pub fn build_braced(f: &Frame, a: &FiniteSeq, lo: i64, hi: i64) -> Result<FiniteSeq> {
    if lo > hi {
        return Err(Error::EmptyWindow(lo, hi));
    }
    match f {
        Frame::Bone(_) => Ok(FiniteSeq::from_values(
            a.iter()
                .filter(|(n, _)| (lo..=hi).contains(n))
                .map(|(n, v)| (n, v.clone())),
        )),
        Frame::Set(_) => {
            let inner = build(f, a)?;
            crate::operators::apply_window(&OperatorKind::H, &inner, lo, hi)
        }
    }
}

/// The building of `f` as an expression in product form.
pub fn building_expr(f: &Frame) -> SeqExpr {
    match f {
        Frame::Bone(_) => SeqExpr::Atom,
        Frame::Set(es) => SeqExpr::product(es.iter().map(braced_expr).collect()),
    }
}

fn braced_expr(f: &Frame) -> SeqExpr {
    match f {
        Frame::Bone(_) => SeqExpr::Atom,
        Frame::Set(_) => SeqExpr::h(building_expr(f)),
    }
}
