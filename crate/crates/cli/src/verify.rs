//! The `verify` suites. Each case draws its inputs from its own ChaCha
//! stream, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Float, Rational};
use serde::Serialize;

use dhtlab::norms::{check_building_norm_bound, check_cot_sum_identity, fixed_point_grid, k2_identity_residual, Branch};
use dhtlab::operators::{
    check_factorization, check_fourier_coefficient, check_interleaving_with, check_partial_fraction,
    check_product_rule_with, check_sign_identity, KernelSource, OperatorKind,
};
use dhtlab::seq::random_rational_seq;
use dhtlab::skeletal::{check_decomposition, skeletons, MAX_EXACT_POWER};
use dhtlab::{Error, FiniteSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    ProductRule,
    Decomposition,
    Fourier,
    Factorization,
    Interleaving,
    SignIdentity,
    PartialFraction,
    FixedPoint,
    CotIdentity,
    BuildingBound,
    All,
}

impl Suite {
    pub const EACH: [Suite; 10] = [
        Suite::ProductRule,
        Suite::Decomposition,
        Suite::Fourier,
        Suite::Factorization,
        Suite::Interleaving,
        Suite::SignIdentity,
        Suite::PartialFraction,
        Suite::FixedPoint,
        Suite::CotIdentity,
        Suite::BuildingBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::ProductRule => "product-rule",
            Suite::Decomposition => "decomposition",
            Suite::Fourier => "fourier",
            Suite::Factorization => "factorization",
            Suite::Interleaving => "interleaving",
            Suite::SignIdentity => "sign-identity",
            Suite::PartialFraction => "partial-fraction",
            Suite::FixedPoint => "fixed-point",
            Suite::CotIdentity => "cot-identity",
            Suite::BuildingBound => "building-bound",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Class {
    /// Zero residual in exact arithmetic.
    Exact,
    /// Inside a certified error bound.
    Certified,
    /// Inside a floating-point tolerance.
    Numeric,
}

impl Class {
    pub fn name(&self) -> &'static str {
        match self {
            Class::Exact => "EXACT",
            Class::Certified => "CERTIFIED",
            Class::Numeric => "NUMERIC",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub case: String,
    pub class: Class,
    pub residual: f64,
    pub bound: f64,
    pub ok: bool,
}

pub struct Config<'a> {
    pub cases: usize,
    pub seed: u64,
    pub k_max: usize,
    pub p_max: u32,
    pub tolerance: Option<f64>,
    pub precision: u32,
    pub input: Option<FiniteSeq>,
    pub kernels: &'a dyn KernelSource,
}

impl Config<'_> {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn tol(&self, contract: f64) -> f64 {
        self.tolerance.unwrap_or(contract)
    }
}

fn max_abs(s: &FiniteSeq) -> f64 {
    s.iter().map(|(_, v)| v.to_f64().abs()).fold(0.0, f64::max)
}

fn exact(suite: &'static str, case: String, residual: &FiniteSeq) -> Check {
    Check {
        suite,
        case,
        class: Class::Exact,
        residual: max_abs(residual),
        bound: 0.0,
        ok: residual.is_zero(),
    }
}

fn numeric(suite: &'static str, case: String, residual: f64, bound: f64) -> Check {
    Check {
        suite,
        case,
        class: Class::Numeric,
        residual,
        bound,
        ok: residual <= bound,
    }
}

pub fn run(suite: Suite, cfg: &Config) -> Result<Vec<Check>, Error> {
    if suite == Suite::All {
        let mut out = Vec::new();
        for s in Suite::EACH {
            out.extend(run(s, cfg)?);
        }
        return Ok(out);
    }
    let name = suite.name();
    match suite {
        Suite::ProductRule => (0..cfg.cases)
            .into_par_iter()
            .map(|i| {
                let mut rng = cfg.rng(i as u64);
                let a = cfg.input.clone().unwrap_or_else(|| random_rational_seq(&mut rng, 8, 12, 10));
                let b = random_rational_seq(&mut rng, 8, 12, 10);
                let r = check_product_rule_with(cfg.kernels, &a, &b, -64, 64)?;
                Ok(exact(name, format!("{i}"), &r))
            })
            .collect(),
        Suite::Decomposition => {
            let top = cfg.k_max.min(6);
            let per_k = cfg.cases.div_ceil(top.max(1)).max(1);
            (0..top * per_k)
                .into_par_iter()
                .map(|i| {
                    let k = i / per_k + 1;
                    let mut rng = cfg.rng(i as u64);
                    let a = cfg.input.clone().unwrap_or_else(|| random_rational_seq(&mut rng, 4, 6, 10));
                    let r = check_decomposition(&a, k.min(MAX_EXACT_POWER), -32, 32)?;
                    Ok(exact(name, format!("k={k} #{}", i % per_k), &r))
                })
                .collect()
        }
        Suite::Fourier => {
            let tol = cfg.tol(1e-10);
            let mut out = Vec::new();
            for op in [OperatorKind::K, OperatorKind::H, OperatorKind::I] {
                for m in -20..=20 {
                    let mut c = check_fourier_coefficient(&op, m, 64)?;
                    c.expected = cfg.kernels.kernel(&op, m)?.map_or(0.0, |k| {
                        dhtlab::PiGraded::monomial(k.coeff, k.grade).to_f64()
                    });
                    out.push(numeric(name, format!("{op} m={m}"), c.error(), tol));
                }
            }
            Ok(out)
        }
        Suite::Factorization => {
            let a = cfg.input.clone().unwrap_or_else(|| FiniteSeq::delta(0));
            let m = 100_000u64.max(a.support_radius() + 6);
            let mut out = Vec::new();
            for n in -6..=6 {
                let c = check_factorization(&a, n, m)?;
                let h = c.lhs.to_f64();
                for (label, v) in [("IK", c.ik), ("KI", c.ki)] {
                    let bound = v.bound + 2.0 * f64::EPSILON * h.abs();
                    let residual = (v.value - h).abs();
                    out.push(Check {
                        suite: name,
                        case: format!("{label} n={n}"),
                        class: Class::Certified,
                        residual,
                        bound,
                        ok: residual <= bound && v.bound <= 1e-3,
                    });
                }
            }
            Ok(out)
        }
        Suite::Interleaving => (0..cfg.cases)
            .into_par_iter()
            .map(|i| {
                let mut rng = cfg.rng(i as u64);
                let a = cfg.input.clone().unwrap_or_else(|| random_rational_seq(&mut rng, 8, 12, 10));
                let r = check_interleaving_with(cfg.kernels, &a, -16, 16)?;
                let worst = [&r.r_even, &r.r_odd, &r.h_even, &r.h_odd]
                    .iter()
                    .map(|s| max_abs(s))
                    .fold(0.0, f64::max);
                Ok(Check {
                    suite: name,
                    case: format!("{i}"),
                    class: Class::Exact,
                    residual: worst,
                    bound: 0.0,
                    ok: r.is_zero(),
                })
            })
            .collect(),
        Suite::SignIdentity => {
            let mut rng = cfg.rng(0);
            let mut out = Vec::new();
            let target = cfg.cases.max(1);
            while out.len() < target {
                let den = rng.gen_range(1..=60i64);
                let u = Rational::from((rng.gen_range(-4 * den..=4 * den), den));
                let v = Rational::from((rng.gen_range(-4 * den..=4 * den), den));
                match check_sign_identity(&u, &v) {
                    Ok(r) => out.push(Check {
                        suite: name,
                        case: format!("t={u}pi s={v}pi"),
                        class: Class::Exact,
                        residual: r.to_f64().abs(),
                        bound: 0.0,
                        ok: r == 0,
                    }),
                    Err(Error::SymbolJump(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(out)
        }
        Suite::PartialFraction => {
            let mut out = Vec::new();
            for j in [2i64, -2, 4, -4, 8, -8, 16, -16] {
                let c = check_partial_fraction(j, 100_000)?;
                out.push(Check {
                    suite: name,
                    case: format!("j={j}"),
                    class: Class::Certified,
                    residual: (c.sum.value - c.closed_form.value).abs(),
                    bound: c.sum.bound + c.closed_form.bound,
                    ok: c.holds(),
                });
            }
            Ok(out)
        }
        Suite::FixedPoint => {
            let tol = cfg.tol(1e-15);
            let grid = fixed_point_grid(cfg.k_max, cfg.p_max, Branch::Cot, cfg.precision)?;
            Ok(grid
                .into_iter()
                .map(|(p, k, r)| numeric(name, format!("k={k} p={p}"), r.to_f64(), tol))
                .collect())
        }
        Suite::CotIdentity => {
            let tol = cfg.tol(1e-18);
            let mut out = Vec::new();
            for h in 1..=64u32 {
                let r = k2_identity_residual(2 * h, cfg.precision)?;
                out.push(numeric(name, format!("half-angle p={}", 2 * h), r.to_f64(), tol));
            }
            let prec = cfg.precision;
            let pi = Float::with_val(prec, Constant::Pi);
            let mut rng = cfg.rng(1);
            for i in 0..cfg.cases {
                let x: f64 = rng.gen_range(0.01..0.98);
                let y: f64 = rng.gen_range(0.01..(0.99 - x));
                let a = Float::with_val(prec, &pi * x);
                let b = Float::with_val(prec, &pi * y);
                let r = check_cot_sum_identity(&a, &b)?;
                out.push(numeric(name, format!("sum #{i}"), r.to_f64(), tol));
            }
            Ok(out)
        }
        Suite::BuildingBound => {
            let p = Rational::from(8);
            (0..cfg.cases)
                .into_par_iter()
                .map(|i| {
                    let mut rng = cfg.rng(i as u64);
                    let a = cfg.input.clone().unwrap_or_else(|| random_rational_seq(&mut rng, 6, 8, 5));
                    let k = rng.gen_range(1..=4usize);
                    let idx = rng.gen_range(0..1u64 << (k - 1)) as usize;
                    let s = skeletons(k)?.nth(idx).expect("index in range");
                    let (lhs, rhs) = check_building_norm_bound(&p, &s, &a, 128)?;
                    let bound = rhs * (1.0 + 1e-10);
                    Ok(Check {
                        suite: name,
                        case: format!("{i} S={s}"),
                        class: Class::Numeric,
                        residual: lhs,
                        bound,
                        ok: lhs <= bound,
                    })
                })
                .collect()
        }
        Suite::All => unreachable!("handled above"),
    }
}
