//! Polydifferential operators with polynomial coefficients.
//!
//! An operator of arity `k` is stored in normal form
//! `(f_1, …, f_k) ↦ Σ c · ∂^{α_1}f_1 ⋯ ∂^{α_k}f_k`, coefficients to the left
//! of all derivatives. Since the normal form is unique, operator identities
//! are decided by structural equality.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::calculus::MultiVec;
use crate::error::{Error, Result};
use crate::kernel::{factorial, rat, variable_names, Exponents, Poly, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyDiffOp {
    dim: usize,
    arity: usize,
    terms: BTreeMap<Vec<Exponents>, Poly>,
}

impl PolyDiffOp {
    pub fn zero(dim: usize, arity: usize) -> Self {
        PolyDiffOp {
            dim,
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// `f ↦ f`.
    pub fn identity(dim: usize) -> Self {
        Self::multiplication_by(Poly::one(dim), 1)
    }

    /// `(f_1, …, f_k) ↦ c · f_1 ⋯ f_k`.
    pub fn multiplication_by(c: Poly, arity: usize) -> Self {
        let dim = c.dim();
        let mut out = Self::zero(dim, arity);
        out.add_term(vec![Exponents::zero(dim); arity], c);
        out
    }

    /// `(f, g) ↦ f g`.
    pub fn multiplication(dim: usize) -> Self {
        Self::multiplication_by(Poly::one(dim), 2)
    }

    /// `f ↦ c · ∂^α f`.
    pub fn derivative(c: Poly, alpha: Exponents) -> Self {
        let mut out = Self::zero(c.dim(), 1);
        out.add_term(vec![alpha], c);
        out
    }

    /// `(f_1, …, f_k) ↦ c · ∂^{α_1}f_1 ⋯ ∂^{α_k}f_k`.
    pub fn monomial(c: Poly, orders: Vec<Exponents>) -> Self {
        let mut out = Self::zero(c.dim(), orders.len());
        out.add_term(orders, c);
        out
    }

    /// The derivation `f ↦ X(f)`.
    pub fn from_vector_field(x: &MultiVec) -> Result<Self> {
        if x.degree() != 1 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                found: x.degree(),
            });
        }
        let n = x.dim();
        let mut out = Self::zero(n, 1);
        for (idx, c) in x.terms() {
            out.add_term(vec![Exponents::unit(n, idx[0])], c.clone());
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Exponents>, &Poly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, orders: &[Exponents]) -> Poly {
        self.terms
            .get(orders)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    /// Highest total differential order over all slots of any term.
    pub fn max_order(&self) -> u32 {
        self.terms
            .keys()
            .map(|o| o.iter().map(Exponents::degree).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, orders: Vec<Exponents>, c: Poly) {
        assert_eq!(orders.len(), self.arity, "order tuple length");
        assert!(
            orders.iter().all(|o| o.0.len() == self.dim),
            "multi-index length"
        );
        assert_eq!(c.dim(), self.dim, "coefficient dimension");
        if c.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(orders.clone())
            .or_insert_with(|| Poly::zero(self.dim));
        entry.add_assign_ref(&c);
        if entry.is_zero() {
            self.terms.remove(&orders);
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (o, c) in &other.terms {
            out.add_term(o.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    /// Panicking sum, for operators known to share shape.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("operator shapes")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("operator shapes")
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        if c.is_zero() {
            return out;
        }
        for (o, p) in &self.terms {
            out.terms.insert(o.clone(), p.scale(c));
        }
        out
    }

    /// Left multiplication of the output by a function.
    pub fn mul_fn(&self, f: &Poly) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        for (o, p) in &self.terms {
            out.add_term(o.clone(), p * f);
        }
        out
    }

    /// Evaluation on polynomial arguments.
    pub fn apply(&self, args: &[Poly]) -> Result<Poly> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        for a in args {
            if a.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: a.dim(),
                });
            }
        }
        let mut out = Poly::zero(self.dim);
        for (orders, c) in &self.terms {
            let mut v = c.clone();
            for (o, a) in orders.iter().zip(args) {
                if v.is_zero() {
                    break;
                }
                v = &v * &a.derivative(o);
            }
            out.add_assign_ref(&v);
        }
        Ok(out)
    }

    /// Substitutes `inner` into slot `slot` (0-based), expanding derivatives
    /// that fall on the inner output with the multivariate Leibniz rule.
    pub fn compose_at(&self, slot: usize, inner: &PolyDiffOp) -> Result<PolyDiffOp> {
        if slot >= self.arity {
            return Err(Error::IndexOutOfRange {
                index: slot + 1,
                bound: self.arity,
            });
        }
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: inner.dim,
            });
        }
        let m = inner.arity;
        let mut out = PolyDiffOp::zero(self.dim, self.arity + m - 1);
        for (outer_orders, c) in &self.terms {
            let alpha = &outer_orders[slot];
            let splits = leibniz_splits(alpha, m + 1);
            for (inner_orders, d) in &inner.terms {
                for (weight, parts) in &splits {
                    let coeff = d.derivative(&parts[0]);
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut orders = Vec::with_capacity(out.arity);
                    orders.extend_from_slice(&outer_orders[..slot]);
                    for (beta, gamma) in inner_orders.iter().zip(&parts[1..]) {
                        orders.push(beta.add(gamma));
                    }
                    orders.extend_from_slice(&outer_orders[slot + 1..]);
                    out.add_term(orders, (c * &coeff).scale(weight));
                }
            }
        }
        Ok(out)
    }

    /// `A ⊗ B : (f…, g…) ↦ A(f…)·B(g…)`.
    pub fn tensor(&self, other: &PolyDiffOp) -> Result<PolyDiffOp> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = PolyDiffOp::zero(self.dim, self.arity + other.arity);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let mut orders = a.clone();
                orders.extend_from_slice(b);
                out.add_term(orders, c * d);
            }
        }
        Ok(out)
    }

    /// Permutes arguments: slot `i` of the result feeds slot `perm[i]` of
    /// `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<PolyDiffOp> {
        if perm.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: perm.len(),
            });
        }
        let mut out = PolyDiffOp::zero(self.dim, self.arity);
        for (orders, c) in &self.terms {
            let mut new = vec![Exponents::zero(self.dim); self.arity];
            for (i, &p) in perm.iter().enumerate() {
                new[i] = orders[p].clone();
            }
            out.add_term(new, c.clone());
        }
        Ok(out)
    }

    /// `(f, g) ↦ P(g, f)`.
    pub fn swap(&self) -> Result<PolyDiffOp> {
        check_arity(2, self.arity)?;
        self.permute(&[1, 0])
    }

    /// Fixes slot `slot` (0-based) to the polynomial `f`.
    pub fn fix_slot(&self, slot: usize, f: &Poly) -> Result<PolyDiffOp> {
        if slot >= self.arity {
            return Err(Error::IndexOutOfRange {
                index: slot + 1,
                bound: self.arity,
            });
        }
        let mut out = PolyDiffOp::zero(self.dim, self.arity - 1);
        for (orders, c) in &self.terms {
            let df = f.derivative(&orders[slot]);
            if df.is_zero() {
                continue;
            }
            let mut rest = orders.clone();
            rest.remove(slot);
            out.add_term(rest, c * &df);
        }
        Ok(out)
    }

    /// True when every term has order exactly one, i.e. `δQ = 0`.
    pub fn is_derivation(&self) -> bool {
        self.arity == 1 && self.terms.keys().all(|o| o[0].degree() == 1)
    }

    /// The vector field of a derivation.
    pub fn to_vector_field(&self) -> Result<MultiVec> {
        if let Some((f, g, defect)) = derivation_witness(self)? {
            let names = variable_names(self.dim);
            return Err(Error::NotDerivation {
                op: "Q".into(),
                f: f.render(&names),
                g: g.render(&names),
                defect: defect.render(&names),
            });
        }
        let mut out = MultiVec::zero(self.dim, 1);
        for (orders, c) in &self.terms {
            let i = orders[0].0.iter().position(|&e| e == 1).expect("order one");
            out.add_term(vec![i], c.clone());
        }
        Ok(out)
    }

    /// The bivector of a skew-symmetric biderivation.
    pub fn to_bivector(&self) -> Result<MultiVec> {
        check_arity(2, self.arity)?;
        let n = self.dim;
        let mut out = MultiVec::zero(n, 2);
        for orders in self.terms.keys() {
            if orders[0].degree() != 1 || orders[1].degree() != 1 {
                return Err(Error::NotBiderivation(self.render()));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let e = |k| Exponents::unit(n, k);
                let a = self.coeff(&[e(i), e(j)]);
                let b = self.coeff(&[e(j), e(i)]);
                if a != -b.clone() {
                    return Err(Error::NotBiderivation(format!(
                        "not skew-symmetric: {}",
                        self.render()
                    )));
                }
                out.add_term(vec![i, j], a);
            }
        }
        Ok(out)
    }

    /// The biderivation `(f, g) ↦ Σ πⁱʲ ∂_i f ∂_j g`.
    pub fn from_bivector(pi: &MultiVec) -> Result<Self> {
        if pi.degree() != 2 {
            return Err(Error::DegreeMismatch {
                expected: 2,
                found: pi.degree(),
            });
        }
        let n = pi.dim();
        let mut out = Self::zero(n, 2);
        for (idx, c) in pi.terms() {
            let (i, j) = (idx[0], idx[1]);
            out.add_term(
                vec![Exponents::unit(n, i), Exponents::unit(n, j)],
                c.clone(),
            );
            out.add_term(
                vec![Exponents::unit(n, j), Exponents::unit(n, i)],
                -c.clone(),
            );
        }
        Ok(out)
    }

    /// Human-readable rendering, e.g. `x*D[x]⊗D[y]`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = variable_names(self.dim);
        let slot = |o: &Exponents| -> String {
            if o.degree() == 0 {
                return "1".into();
            }
            let parts: Vec<String> =
                o.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        if e == 1 {
                            format!("D{}", names[i])
                        } else {
                            format!("D{}^{}", names[i], e)
                        }
                    })
                    .collect();
            parts.join("*")
        };
        let terms: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(orders, c)| {
                let ops: Vec<String> = orders.iter().map(slot).collect();
                format!("({})*[{}]", c.render(&names), ops.join(" ⊗ "))
            })
            .collect();
        terms.join(" + ")
    }
}

impl std::fmt::Display for PolyDiffOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

fn check_arity(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ArityMismatch { expected, found });
    }
    Ok(())
}

/// All ways to write `alpha = γ_0 + … + γ_{parts−1}` componentwise, with the
/// multinomial weight `Π_i α_i! / Π_l γ_{l,i}!`.
fn leibniz_splits(alpha: &Exponents, parts: usize) -> Vec<(Rat, Vec<Exponents>)> {
    let dim = alpha.0.len();
    let mut acc: Vec<(Rat, Vec<Vec<u32>>)> =
        vec![(Rat::one(), vec![Vec::with_capacity(dim); parts])];
    for &a in &alpha.0 {
        let comps = compositions(a, parts);
        let mut next = Vec::with_capacity(acc.len() * comps.len());
        for (w, cur) in &acc {
            for comp in &comps {
                let denom = comp.iter().fold(Rat::one(), |d, &g| d * factorial(g));
                let weight = w * &(factorial(a) / denom);
                let mut new = cur.clone();
                for (slot, &g) in new.iter_mut().zip(comp) {
                    slot.push(g);
                }
                next.push((weight, new));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(w, v)| (w, v.into_iter().map(Exponents).collect()))
        .collect()
}

/// Ordered compositions of `n` into `parts` non-negative summands.
fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `compose_into_slot(outer, j, inner)` with a 1-based slot.
pub fn compose_into_slot(
    outer: &PolyDiffOp,
    slot: usize,
    inner: &PolyDiffOp,
) -> Result<PolyDiffOp> {
    if slot == 0 || slot > outer.arity {
        return Err(Error::IndexOutOfRange {
            index: slot,
            bound: outer.arity,
        });
    }
    outer.compose_at(slot - 1, inner)
}

/// `(f,g) ↦ P(f,g) ± P(g,f)` halved: returns `(sym, skew)`.
pub fn transpose_parts(p: &PolyDiffOp) -> Result<(PolyDiffOp, PolyDiffOp)> {
    check_arity(2, p.arity)?;
    let swapped = p.swap()?;
    let half = rat(1, 2);
    Ok((p.add(&swapped).scale(&half), p.sub(&swapped).scale(&half)))
}

/// `δQ(f,g) = Q(fg) − Q(f)g − fQ(g)`.
pub fn hochschild_delta(q: &PolyDiffOp) -> Result<PolyDiffOp> {
    check_arity(1, q.arity)?;
    let id = PolyDiffOp::identity(q.dim);
    let a = q.compose_at(0, &PolyDiffOp::multiplication(q.dim))?;
    let b = q.tensor(&id)?;
    let c = id.tensor(q)?;
    Ok(a.sub(&b).sub(&c))
}

/// `(f,g,h) ↦ f·P(g,h) − P(fg,h) + P(f,gh) − P(f,g)·h`.
pub fn cocycle_defect(p: &PolyDiffOp) -> Result<PolyDiffOp> {
    check_arity(2, p.arity)?;
    let id = PolyDiffOp::identity(p.dim);
    let m = PolyDiffOp::multiplication(p.dim);
    let a = id.tensor(p)?;
    let b = p.compose_at(0, &m)?;
    let c = p.compose_at(1, &m)?;
    let d = p.tensor(&id)?;
    Ok(a.sub(&b).add(&c).sub(&d))
}

/// First monomial pair `(f, g)` with `δQ(f, g) ≠ 0`, if `Q` is not a
/// derivation.
pub fn derivation_witness(q: &PolyDiffOp) -> Result<Option<(Poly, Poly, Poly)>> {
    check_arity(1, q.arity)?;
    if q.is_derivation() {
        return Ok(None);
    }
    let delta = hochschild_delta(q)?;
    // A nonzero term of δQ with orders (γ, ε) is detected by (x^γ, x^ε).
    for orders in delta.terms.keys() {
        let f = Poly::monomial(q.dim, orders[0].clone(), Rat::one());
        let g = Poly::monomial(q.dim, orders[1].clone(), Rat::one());
        let v = delta.apply(&[f.clone(), g.clone()])?;
        if !v.is_zero() {
            return Ok(Some((f, g, v)));
        }
    }
    Err(Error::Convention(
        "operator with a non-derivation term has zero coboundary".into(),
    ))
}

/// `Q^k` for an arity-1 operator.
pub fn compose_power(q: &PolyDiffOp, k: u32) -> Result<PolyDiffOp> {
    check_arity(1, q.arity)?;
    let mut out = PolyDiffOp::identity(q.dim);
    for _ in 0..k {
        out = q.compose_at(0, &out)?;
    }
    Ok(out)
}
