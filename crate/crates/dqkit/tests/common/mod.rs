//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use dqkit::calculus::{Alt, AltKind, Form, MultiVec};
use dqkit::diffop::PolyDiffOp;
use dqkit::kernel::{rat, Exponents, Poly};
use dqkit::starprod::GaugeOp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

fn exponents(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> Exponents {
    let total = rng.gen_range(0..=max_deg);
    let mut e = vec![0; dim];
    for _ in 0..total {
        if dim > 0 {
            e[rng.gen_range(0..dim)] += 1;
        }
    }
    Exponents(e)
}

/// Up to `terms` monomials of degree `≤ max_deg` with small rational
/// coefficients.
pub fn poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32, terms: usize) -> Poly {
    let mut p = Poly::zero(dim);
    for _ in 0..terms {
        let c = rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        p = p + Poly::monomial(dim, exponents(rng, dim, max_deg), c);
    }
    p
}

/// Nonzero variant of [`poly`].
pub fn nonzero_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32, terms: usize) -> Poly {
    loop {
        let p = poly(rng, dim, max_deg, terms);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn alt<K: AltKind>(rng: &mut ChaCha8Rng, dim: usize, degree: usize, max_deg: u32) -> Alt<K> {
    let mut a = Alt::<K>::zero(dim, degree);
    for idx in dqkit::calculus::increasing_tuples(dim, degree) {
        if rng.gen_bool(0.7) {
            a.add_term(idx, poly(rng, dim, max_deg, 2));
        }
    }
    a
}

pub fn multivec(rng: &mut ChaCha8Rng, dim: usize, degree: usize, max_deg: u32) -> MultiVec {
    alt(rng, dim, degree, max_deg)
}

pub fn form(rng: &mut ChaCha8Rng, dim: usize, degree: usize, max_deg: u32) -> Form {
    alt(rng, dim, degree, max_deg)
}

pub fn nonzero_field(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> MultiVec {
    loop {
        let v = multivec(rng, dim, 1, max_deg);
        if !v.is_zero() {
            return v;
        }
    }
}

/// A differential operator of order `≤ max_order` and `arity`.
pub fn diffop(
    rng: &mut ChaCha8Rng,
    dim: usize,
    arity: usize,
    max_order: u32,
    coeff_deg: u32,
) -> PolyDiffOp {
    let mut d = PolyDiffOp::zero(dim, arity);
    for _ in 0..3 {
        let orders = (0..arity).map(|_| exponents(rng, dim, max_order)).collect();
        d.add_term(orders, poly(rng, dim, coeff_deg, 2));
    }
    d
}

/// `1 + Σ R_k tᵏ` with random `R_k` of order `≤ 2`.
pub fn gauge(rng: &mut ChaCha8Rng, dim: usize, order: usize) -> GaugeOp {
    let rs = (0..order).map(|_| diffop(rng, dim, 1, 2, 1)).collect();
    GaugeOp::new(dim, order, rs).unwrap()
}
