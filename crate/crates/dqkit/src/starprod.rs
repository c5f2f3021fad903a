//! Truncated star products `f⋆g = fg + Σ P_k(f,g) tᵏ` and their gauge
//! theory: gauge operators, specialization, standard sections and Σ₁, the
//! subprincipal curvature, inner automorphisms and the contravariant
//! connection of a twisted bimodule.
//!
//! Gauge convention: `gauge_transform(S, R)` is the product `⋆′` with
//! `R(f ⋆′ g) = R(f) ⋆ R(g)`; at first order `P′₁ = P₁ − δR₁`.

use num::{One, Zero};

use crate::calculus::{increasing_tuples, MultiVec};
use crate::diffop::{derivation_witness, hochschild_delta, transpose_parts, PolyDiffOp};
use crate::error::{Error, Result};
use crate::kernel::{factorial, int, variable_names, Exponents, Poly, Rat, TPoly};
use crate::poisson::{bracket, closedness_witness, hamiltonian, is_poisson, koszul_bracket};

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_order(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::OrderMismatch { left, right });
    }
    Ok(())
}

/// Truncated series of arity-1 operators `T_0 + T_1 t + … + T_N t^N`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct OpSeries(Vec<PolyDiffOp>);

impl OpSeries {
    fn compose(&self, other: &OpSeries) -> Result<OpSeries> {
        let n = self.0.len() - 1;
        let dim = self.0[0].dim();
        let mut out = vec![PolyDiffOp::zero(dim, 1); n + 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.compose_at(0, b)?);
                }
            }
        }
        Ok(OpSeries(out))
    }

    fn apply(&self, f: &TPoly) -> Result<TPoly> {
        let n = self.0.len() - 1;
        let mut coeffs = vec![Poly::zero(f.dim()); n + 1];
        for (i, a) in self.0.iter().enumerate() {
            for j in 0..=n - i {
                coeffs[i + j].add_assign_ref(&a.apply(&[f.coeff(j).clone()])?);
            }
        }
        TPoly::new(f.dim(), n, coeffs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarProduct {
    dim: usize,
    order: usize,
    /// `p[k-1] = P_k`.
    p: Vec<PolyDiffOp>,
}

impl StarProduct {
    /// Builds `fg + Σ_{k ≤ N} P_k tᵏ`; missing trailing `P_k` are zero.
    pub fn new(dim: usize, order: usize, p: Vec<PolyDiffOp>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("truncation order must be at least 1".into()));
        }
        if p.len() > order {
            return Err(Error::Invalid(format!(
                "{} operators given for truncation order {order}",
                p.len()
            )));
        }
        for op in &p {
            check_dim(dim, op.dim())?;
            if op.arity() != 2 {
                return Err(Error::ArityMismatch {
                    expected: 2,
                    found: op.arity(),
                });
            }
        }
        let mut p = p;
        p.resize(order, PolyDiffOp::zero(dim, 2));
        Ok(StarProduct { dim, order, p })
    }

    /// The commutative product truncated at `order`.
    pub fn commutative(dim: usize, order: usize) -> Result<Self> {
        Self::new(dim, order, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `P_k`, with `P_0` the multiplication.
    pub fn p(&self, k: usize) -> PolyDiffOp {
        if k == 0 {
            PolyDiffOp::multiplication(self.dim)
        } else {
            self.p[k - 1].clone()
        }
    }

    /// `P_1, …, P_N`.
    pub fn ps(&self) -> &[PolyDiffOp] {
        &self.p
    }

    /// Orders `k` and slots (1 or 2) where `P_k(1,·)` or `P_k(·,1)` is
    /// nonzero.
    pub fn unitality_defects(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k, op) in self.p.iter().enumerate() {
            for slot in 0..2 {
                if op.terms().any(|(o, _)| o[slot].degree() == 0) {
                    out.push((k + 1, slot + 1));
                }
            }
        }
        out
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_defects().is_empty()
    }

    /// Symmetric part of `P₁`.
    pub fn sym1(&self) -> PolyDiffOp {
        transpose_parts(&self.p[0]).expect("arity 2").0
    }

    /// Special means `P₁` is skew-symmetric.
    pub fn is_special(&self) -> bool {
        self.sym1().is_zero()
    }

    fn check_special(&self) -> Result<()> {
        let sym = self.sym1();
        if !sym.is_zero() {
            return Err(Error::NotSpecial(sym.render()));
        }
        Ok(())
    }

    /// The operator `{f,g} = P₁(f,g) − P₁(g,f)`.
    pub fn bracket_op(&self) -> PolyDiffOp {
        self.p[0].sub(&self.p[0].swap().expect("arity 2"))
    }
}

/// `a ⋆ b` truncated at the order of `S`.
pub fn star_mul(s: &StarProduct, a: &TPoly, b: &TPoly) -> Result<TPoly> {
    check_order(s.order, a.order())?;
    check_order(s.order, b.order())?;
    check_dim(s.dim, a.dim())?;
    check_dim(s.dim, b.dim())?;
    let n = s.order;
    let mut coeffs = vec![Poly::zero(s.dim); n + 1];
    for i in 0..=n {
        if a.coeff(i).is_zero() {
            continue;
        }
        for j in 0..=n - i {
            if b.coeff(j).is_zero() {
                continue;
            }
            let (f, g) = (a.coeff(i).clone(), b.coeff(j).clone());
            for c in 0..=n - i - j {
                let v = s.p(c).apply(&[f.clone(), g.clone()])?;
                coeffs[i + j + c].add_assign_ref(&v);
            }
        }
    }
    TPoly::new(s.dim, n, coeffs)
}

/// Product of constant-coefficient operators of equal arity: orders add
/// slotwise.
fn constant_product(a: &PolyDiffOp, b: &PolyDiffOp) -> PolyDiffOp {
    let mut out = PolyDiffOp::zero(a.dim(), a.arity());
    for (oa, ca) in a.terms() {
        for (ob, cb) in b.terms() {
            let orders = oa.iter().zip(ob).map(|(x, y)| x.add(y)).collect();
            out.add_term(orders, ca * cb);
        }
    }
    out
}

/// Weyl–Moyal product `P_k = Πᵏ / (2ᵏ k!)`, `Π = Σ πⁱʲ ∂_i ⊗ ∂_j`.
pub fn moyal(pi: &MultiVec, order: usize) -> Result<StarProduct> {
    if pi.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: pi.degree(),
        });
    }
    if let Some((idx, c)) = pi.terms().find(|(_, c)| !c.is_constant()) {
        return Err(Error::Invalid(format!(
            "Moyal product needs constant coefficients; entry ({}, {}) is {c}",
            idx[0] + 1,
            idx[1] + 1
        )));
    }
    let n = pi.dim();
    let big_pi = PolyDiffOp::from_bivector(pi)?;
    let mut power = PolyDiffOp::multiplication(n);
    let mut p = Vec::with_capacity(order);
    for k in 1..=order {
        power = constant_product(&power, &big_pi);
        let norm = int(2).pow(k as i32) * factorial(k as u32);
        p.push(power.scale(&(Rat::one() / norm)));
    }
    StarProduct::new(n, order, p)
}

/// `D_k = Σ_{i+j=k} P_i(P_j(f,g),h) − P_i(f,P_j(g,h))` for `k = 1..N`.
pub fn assoc_defect(s: &StarProduct) -> Result<Vec<PolyDiffOp>> {
    let mut out = Vec::with_capacity(s.order);
    for k in 1..=s.order {
        let mut d = PolyDiffOp::zero(s.dim, 3);
        for i in 0..=k {
            let (pi, pj) = (s.p(i), s.p(k - i));
            d = d.add(&pi.compose_at(0, &pj)?).sub(&pi.compose_at(1, &pj)?);
        }
        out.push(d);
    }
    Ok(out)
}

/// First order with a nonzero associativity defect.
pub fn first_assoc_failure(s: &StarProduct) -> Result<Option<(usize, PolyDiffOp)>> {
    Ok(assoc_defect(s)?
        .into_iter()
        .enumerate()
        .find(|(_, d)| !d.is_zero())
        .map(|(k, d)| (k + 1, d)))
}

/// The bivector `π` with `π(dx_i, dx_j) = P₁(x_i,x_j) − P₁(x_j,x_i)`.
///
/// Fails if the skew part of `P₁` is not a biderivation, or (for `N ≥ 2`,
/// where associativity forces Jacobi) if the result is not Poisson.
pub fn assoc_poisson(s: &StarProduct) -> Result<MultiVec> {
    let pi = s.bracket_op().to_bivector()?;
    if s.order >= 2 {
        if let Some((t, v)) = is_poisson(&pi)?.witness {
            let names = variable_names(s.dim);
            return Err(Error::NotPoisson {
                triple: format!("{}, {}, {}", names[t[0]], names[t[1]], names[t[2]]),
                value: v.to_string(),
            });
        }
    }
    Ok(pi)
}

/// A gauge operator `R = 1 + Σ R_k tᵏ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeOp {
    dim: usize,
    order: usize,
    /// `r[k-1] = R_k`.
    r: Vec<PolyDiffOp>,
}

impl GaugeOp {
    pub fn new(dim: usize, order: usize, r: Vec<PolyDiffOp>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Invalid("truncation order must be at least 1".into()));
        }
        if r.len() > order {
            return Err(Error::Invalid(format!(
                "{} operators given for truncation order {order}",
                r.len()
            )));
        }
        for op in &r {
            check_dim(dim, op.dim())?;
            if op.arity() != 1 {
                return Err(Error::ArityMismatch {
                    expected: 1,
                    found: op.arity(),
                });
            }
        }
        let mut r = r;
        r.resize(order, PolyDiffOp::zero(dim, 1));
        Ok(GaugeOp { dim, order, r })
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        GaugeOp {
            dim,
            order,
            r: vec![PolyDiffOp::zero(dim, 1); order],
        }
    }

    /// `R_ξ = 1 + ξ t`.
    pub fn from_vector_field(xi: &MultiVec, order: usize) -> Result<Self> {
        Self::new(xi.dim(), order, vec![PolyDiffOp::from_vector_field(xi)?])
    }

    /// Truncated `exp(c·tQ)`.
    pub fn exp(q: &PolyDiffOp, c: &Rat, order: usize) -> Result<Self> {
        let cq = q.scale(c);
        let mut power = PolyDiffOp::identity(q.dim());
        let mut r = Vec::with_capacity(order);
        for k in 1..=order {
            power = cq.compose_at(0, &power)?;
            r.push(power.scale(&(Rat::one() / factorial(k as u32))));
        }
        Self::new(q.dim(), order, r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `R_k`, with `R_0 = 1`.
    pub fn r(&self, k: usize) -> PolyDiffOp {
        if k == 0 {
            PolyDiffOp::identity(self.dim)
        } else {
            self.r[k - 1].clone()
        }
    }

    pub fn rs(&self) -> &[PolyDiffOp] {
        &self.r
    }

    /// Orders `k` with `R_k(1) ≠ 0`.
    pub fn unitality_defects(&self) -> Vec<usize> {
        let one = Poly::one(self.dim);
        (1..=self.order)
            .filter(|&k| {
                !self.r[k - 1]
                    .apply(std::slice::from_ref(&one))
                    .expect("arity 1")
                    .is_zero()
            })
            .collect()
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_defects().is_empty()
    }

    fn series(&self) -> OpSeries {
        OpSeries((0..=self.order).map(|k| self.r(k)).collect())
    }

    fn from_series(s: OpSeries) -> Self {
        let dim = s.0[0].dim();
        let order = s.0.len() - 1;
        GaugeOp {
            dim,
            order,
            r: s.0.into_iter().skip(1).collect(),
        }
    }

    /// `R(f)` as a series.
    pub fn apply(&self, f: &TPoly) -> Result<TPoly> {
        check_order(self.order, f.order())?;
        check_dim(self.dim, f.dim())?;
        self.series().apply(f)
    }

    /// `self ∘ other`, truncated.
    pub fn compose(&self, other: &GaugeOp) -> Result<GaugeOp> {
        check_order(self.order, other.order)?;
        check_dim(self.dim, other.dim)?;
        Ok(Self::from_series(self.series().compose(&other.series())?))
    }

    pub fn is_identity(&self) -> bool {
        self.r.iter().all(PolyDiffOp::is_zero)
    }
}

/// `R⁻¹ = Σ_k (1 − R)ᵏ`, finite by truncation.
pub fn invert_gauge(r: &GaugeOp) -> Result<GaugeOp> {
    let mut minus = r.series();
    minus.0[0] = PolyDiffOp::zero(r.dim, 1);
    for op in minus.0.iter_mut() {
        *op = op.neg();
    }
    let mut out = GaugeOp::identity(r.dim, r.order).series();
    let mut power = out.clone();
    for _ in 0..r.order {
        power = power.compose(&minus)?;
        for (o, p) in out.0.iter_mut().zip(&power.0) {
            *o = o.add(p);
        }
    }
    Ok(GaugeOp::from_series(out))
}

/// `P_c ∘ (A ⊗ B)`.
fn sandwich(p: &PolyDiffOp, a: &PolyDiffOp, b: &PolyDiffOp) -> Result<PolyDiffOp> {
    p.compose_at(0, a)?.compose_at(1, b)
}

/// The product `⋆′` with `R(f ⋆′ g) = R(f) ⋆ R(g)`, solved order by order:
/// `P′_k = Σ_{a+b+c=k} P_c∘(R_a⊗R_b) − Σ_{i=1}^{k} R_i∘P′_{k−i}`.
pub fn gauge_transform(s: &StarProduct, r: &GaugeOp) -> Result<StarProduct> {
    check_order(s.order, r.order)?;
    check_dim(s.dim, r.dim)?;
    let n = s.order;
    let mut primes: Vec<PolyDiffOp> = vec![PolyDiffOp::multiplication(s.dim)];
    for k in 1..=n {
        let mut pk = PolyDiffOp::zero(s.dim, 2);
        for a in 0..=k {
            for b in 0..=k - a {
                let (ra, rb) = (r.r(a), r.r(b));
                if ra.is_zero() || rb.is_zero() {
                    continue;
                }
                pk = pk.add(&sandwich(&s.p(k - a - b), &ra, &rb)?);
            }
        }
        for i in 1..=k {
            let ri = r.r(i);
            if !ri.is_zero() {
                pk = pk.sub(&ri.compose_at(0, &primes[k - i])?);
            }
        }
        primes.push(pk);
    }
    StarProduct::new(s.dim, n, primes.into_iter().skip(1).collect())
}

/// Result of [`specialize`]: `δQ = −sym(P₁)` and `R = exp(−tQ)`, so that
/// `gauge_transform(S, R)` is special.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specialization {
    pub q: PolyDiffOp,
    pub gauge: GaugeOp,
}

/// Basis operators `x^β ∂^α` with `|α| ≠ 1`, `|α| ≤ max_order`, `|β| ≤ degree`.
fn specialization_basis(dim: usize, max_order: u32, degree: u32) -> Vec<PolyDiffOp> {
    let alphas = exponents_up_to(dim, max_order);
    let betas = exponents_up_to(dim, degree);
    let mut out = Vec::new();
    for a in &alphas {
        if a.degree() == 1 {
            continue;
        }
        for b in &betas {
            out.push(PolyDiffOp::derivative(
                Poly::monomial(dim, b.clone(), Rat::one()),
                a.clone(),
            ));
        }
    }
    out
}

/// All exponent vectors of total degree `≤ d`.
fn exponents_up_to(dim: usize, d: u32) -> Vec<Exponents> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponents>) {
        if cur.len() == dim {
            out.push(Exponents(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, d, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Coordinates of an operator in the basis of (orders, monomial) pairs.
fn flatten(op: &PolyDiffOp) -> Vec<((Vec<Exponents>, Exponents), Rat)> {
    let mut out = Vec::new();
    for (orders, c) in op.terms() {
        for (e, r) in c.terms() {
            out.push(((orders.clone(), e.clone()), r.clone()));
        }
    }
    out
}

/// Solves `A u = b` exactly by Gauss–Jordan elimination; free variables are
/// set to zero. Returns `None` when the system is inconsistent.
#[allow(clippy::needless_range_loop)]
fn solve_linear(mut rows: Vec<Vec<Rat>>, mut rhs: Vec<Rat>, unknowns: usize) -> Option<Vec<Rat>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = Rat::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..unknowns {
                    let delta = &f * &rows[r][j];
                    rows[i][j] -= delta;
                }
                let delta = &f * &rhs[r];
                rhs[i] -= delta;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut u = vec![Rat::zero(); unknowns];
    for (i, &col) in pivots.iter().enumerate() {
        u[col] = rhs[i].clone();
    }
    Some(u)
}

/// Finds `Q` with `δQ = −sym(P₁)` among operators of order at most the order
/// of `P₁` and coefficient degree at most `degree`, with no derivation part.
pub fn solve_coboundary(sym: &PolyDiffOp, degree: u32) -> Result<PolyDiffOp> {
    let dim = sym.dim();
    let target = sym.neg();
    let basis = specialization_basis(dim, sym.max_order(), degree);
    let images: Vec<PolyDiffOp> = basis.iter().map(hochschild_delta).collect::<Result<_>>()?;
    let mut keys: Vec<(Vec<Exponents>, Exponents)> = Vec::new();
    let mut key_index = std::collections::BTreeMap::new();
    let mut columns: Vec<Vec<(usize, Rat)>> = Vec::new();
    let mut index = |k: (Vec<Exponents>, Exponents), keys: &mut Vec<_>| -> usize {
        *key_index.entry(k.clone()).or_insert_with(|| {
            keys.push(k);
            keys.len() - 1
        })
    };
    for img in &images {
        let col = flatten(img)
            .into_iter()
            .map(|(k, v)| (index(k, &mut keys), v))
            .collect();
        columns.push(col);
    }
    let target_entries: Vec<(usize, Rat)> = flatten(&target)
        .into_iter()
        .map(|(k, v)| (index(k, &mut keys), v))
        .collect();
    let mut rows = vec![vec![Rat::zero(); basis.len()]; keys.len()];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col {
            rows[*i][j] = v.clone();
        }
    }
    let mut rhs = vec![Rat::zero(); keys.len()];
    for (i, v) in target_entries {
        rhs[i] = v;
    }
    let residual =
        |q: &PolyDiffOp| -> Result<String> { Ok(hochschild_delta(q)?.add(sym).render()) };
    match solve_linear(rows, rhs, basis.len()) {
        Some(u) => {
            let mut q = PolyDiffOp::zero(dim, 1);
            for (c, b) in u.iter().zip(&basis) {
                if !c.is_zero() {
                    q = q.add(&b.scale(c));
                }
            }
            Ok(q)
        }
        None => Err(Error::NoSolution {
            residual: residual(&PolyDiffOp::zero(dim, 1))?,
        }),
    }
}

/// Gauges an associative product to a special one: `Q` solves
/// `δQ = −sym(P₁)` (derivation part zero) and `R = exp(−tQ)`.
pub fn specialize(s: &StarProduct, degree: u32) -> Result<Specialization> {
    if let Some((order, _)) = first_assoc_failure(s)? {
        return Err(Error::NotAssociative { order });
    }
    let sym = s.sym1();
    let q = solve_coboundary(&sym, degree)?;
    let gauge = GaugeOp::exp(&q, &-Rat::one(), s.order)?;
    let special = gauge_transform(s, &gauge)?;
    if !special.is_special() {
        return Err(Error::Convention(format!(
            "gauge from the coboundary solve leaves sym(P1) = {}",
            special.sym1()
        )));
    }
    Ok(Specialization { q, gauge })
}

/// A standard section `φ = R|_O` of the algebra of `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub base: StarProduct,
    pub r: GaugeOp,
}

impl Section {
    /// Sections are unit-preserving: `R_k(1) = 0` for every `k`.
    pub fn new(base: StarProduct, r: GaugeOp) -> Result<Self> {
        check_order(base.order, r.order)?;
        check_dim(base.dim, r.dim)?;
        if let Some(&order) = r.unitality_defects().first() {
            return Err(Error::NotUnital { order });
        }
        Ok(Section { base, r })
    }

    /// The product `⋆_φ` with `φ(f)⋆φ(g) = φ(f ⋆_φ g)`.
    pub fn induced(&self) -> Result<StarProduct> {
        gauge_transform(&self.base, &self.r)
    }

    pub fn is_special(&self) -> Result<bool> {
        Ok(self.induced()?.is_special())
    }
}

/// A point of Σ₁ over a special base: the class of `1 + ξt` mod `t²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sigma1 {
    base: StarProduct,
    xi: MultiVec,
}

impl Sigma1 {
    pub fn new(base: StarProduct, xi: MultiVec) -> Result<Self> {
        base.check_special()?;
        check_dim(base.dim, xi.dim())?;
        if xi.degree() != 1 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                found: xi.degree(),
            });
        }
        Ok(Sigma1 { base, xi })
    }

    /// The class of the identity section.
    pub fn identity(base: StarProduct) -> Result<Self> {
        let n = base.dim;
        Self::new(base, MultiVec::zero(n, 1))
    }

    pub fn base(&self) -> &StarProduct {
        &self.base
    }

    pub fn xi(&self) -> &MultiVec {
        &self.xi
    }

    /// The representative `R_ξ = 1 + ξt`.
    pub fn representative(&self) -> Result<GaugeOp> {
        GaugeOp::from_vector_field(&self.xi, self.base.order)
    }
}

/// The Σ₁ class of a special section over a special base: `R₁` as a vector
/// field. Fails with a witness pair when `R₁` is not a derivation.
pub fn sigma1_class(s: &StarProduct, r: &GaugeOp) -> Result<Sigma1> {
    s.check_special()?;
    check_order(s.order, r.order)?;
    check_dim(s.dim, r.dim)?;
    let xi = r.r(1).to_vector_field()?;
    Sigma1::new(s.clone(), xi)
}

/// `φ + ξ`.
pub fn sigma1_act(phi: &Sigma1, xi: &MultiVec) -> Result<Sigma1> {
    let sum = phi.xi.try_add(xi)?;
    Ok(Sigma1 {
        base: phi.base.clone(),
        xi: sum,
    })
}

/// Subprincipal curvature as a bidifferential operator:
/// `t²-part of [φ(f) ⋆ φ(g) − φ(g) ⋆ φ(f)] − t-part of φ({f,g})`.
pub fn subprincipal_operator(s: &StarProduct, r: &GaugeOp) -> Result<PolyDiffOp> {
    if s.order < 2 {
        return Err(Error::Invalid(
            "subprincipal curvature needs truncation order at least 2".into(),
        ));
    }
    check_order(s.order, r.order)?;
    check_dim(s.dim, r.dim)?;
    let mut t2 = PolyDiffOp::zero(s.dim, 2);
    for a in 0..=2 {
        for b in 0..=2 - a {
            t2 = t2.add(&sandwich(&s.p(2 - a - b), &r.r(a), &r.r(b))?);
        }
    }
    let commutator = t2.sub(&t2.swap()?);
    let correction = r.r(1).compose_at(0, &s.bracket_op())?;
    Ok(commutator.sub(&correction))
}

/// Subprincipal curvature `c(φ)` of the special section `R` over `S`.
///
/// Postconditions checked: `c(φ)` is a skew biderivation and
/// `d_Π c(φ) = 0`, the latter by direct evaluation on coordinate triples.
pub fn subprincipal(s: &StarProduct, r: &GaugeOp) -> Result<MultiVec> {
    let induced = gauge_transform(s, r)?;
    induced.check_special()?;
    let c = subprincipal_operator(s, r)?.to_bivector()?;
    let pi = s.bracket_op().to_bivector()?;
    if let Some((t, v)) = closedness_witness(&pi, &c)? {
        let names = variable_names(s.dim);
        return Err(Error::NotClosed(format!(
            "d_Pi c(d{}, d{}, d{}) = {}",
            names[t[0]], names[t[1]], names[t[2]], v
        )));
    }
    Ok(c)
}

/// Subprincipal curvature assembled from star products of coordinate
/// functions, without forming any operator.
pub fn subprincipal_by_evaluation(s: &StarProduct, r: &GaugeOp) -> Result<MultiVec> {
    if s.order < 2 {
        return Err(Error::Invalid(
            "subprincipal curvature needs truncation order at least 2".into(),
        ));
    }
    let n = s.dim;
    let pi = s.bracket_op().to_bivector()?;
    let phi = |f: &Poly| r.apply(&TPoly::from_poly(f.clone(), s.order));
    let mut out = MultiVec::zero(n, 2);
    for t in increasing_tuples(n, 2) {
        let (f, g) = (Poly::var(n, t[0]), Poly::var(n, t[1]));
        let (pf, pg) = (phi(&f)?, phi(&g)?);
        let comm = star_mul(s, &pf, &pg)?.sub(&star_mul(s, &pg, &pf)?)?;
        let corr = phi(&bracket(&pi, &f, &g)?)?;
        out.add_term(t, comm.coeff(2).clone() - corr.coeff(1).clone());
    }
    Ok(out)
}

/// `Σ_i (ad_⋆ α)ⁱ(b) / i!`; each commutator gains a power of `t`, so the sum
/// stops at `i = N`.
pub fn ad_exp(s: &StarProduct, alpha: &TPoly, b: &TPoly) -> Result<TPoly> {
    let mut term = b.clone();
    let mut sum = b.clone();
    for i in 1..=s.order {
        let comm = star_mul(s, alpha, &term)?.sub(&star_mul(s, &term, alpha)?)?;
        term = comm.scale(&(Rat::one() / int(i as i64)));
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term)?;
    }
    Ok(sum)
}

/// `Ad(exp α)` as an operator series.
fn ad_series(s: &StarProduct, alpha: &TPoly) -> Result<OpSeries> {
    let n = s.order;
    let mut ad = vec![PolyDiffOp::zero(s.dim, 1); n + 1];
    for i in 0..=n {
        let ai = alpha.coeff(i);
        if ai.is_zero() {
            continue;
        }
        for c in 0..=n - i {
            let p = s.p(c);
            let left = p.fix_slot(0, ai)?;
            let right = p.fix_slot(1, ai)?;
            ad[i + c] = ad[i + c].add(&left.sub(&right));
        }
    }
    let ad = OpSeries(ad);
    let mut total = GaugeOp::identity(s.dim, n).series();
    let mut power = total.clone();
    for k in 1..=n {
        power = power.compose(&ad)?;
        let scaled = power
            .0
            .iter()
            .map(|op| op.scale(&(Rat::one() / int(k as i64))));
        power = OpSeries(scaled.collect());
        for (o, p) in total.0.iter_mut().zip(&power.0) {
            *o = o.add(p);
        }
    }
    Ok(total)
}

/// Σ₁ class of `f ↦ Ad(exp α)(φ(f))`, checked against `φ + X_{σ(α)}`.
pub fn sigma1_of_ad(s: &StarProduct, alpha: &TPoly, phi: &Sigma1) -> Result<Sigma1> {
    s.check_special()?;
    check_order(s.order, alpha.order())?;
    check_dim(s.dim, alpha.dim())?;
    let section = ad_series(s, alpha)?.compose(&phi.representative()?.series())?;
    if section.0[0] != PolyDiffOp::identity(s.dim) {
        return Err(Error::Convention(
            "inner automorphism is not the identity modulo t".into(),
        ));
    }
    let class = sigma1_class(s, &GaugeOp::from_series(section))?;
    let pi = s.bracket_op().to_bivector()?;
    let expected = sigma1_act(phi, &hamiltonian(&pi, alpha.sigma())?)?;
    if class != expected {
        return Err(Error::Convention(format!(
            "Ad class {} differs from phi + X_sigma(alpha) = {}",
            class.xi.render(),
            expected.xi.render()
        )));
    }
    Ok(class)
}

/// The free rank-one bimodule `a·m·b = a ⋆₁ m ⋆₁ Φ(b)` between
/// `A₀ = gauge_transform(A₁, G)` and `A₁`, with Σ₁ points `φ₀ = 1 + ξ₀t`
/// over `A₀` and `φ₁ = 1 + ξ₁t` over `A₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleModel {
    star1: StarProduct,
    star0: StarProduct,
    g: GaugeOp,
    phi0: Sigma1,
    phi1: Sigma1,
}

impl BimoduleModel {
    pub fn new(star1: StarProduct, g: GaugeOp, xi0: MultiVec, xi1: MultiVec) -> Result<Self> {
        if star1.order < 2 {
            return Err(Error::Invalid(
                "bimodule connection needs truncation order at least 2".into(),
            ));
        }
        let star0 = gauge_transform(&star1, &g)?;
        let phi0 = Sigma1::new(star0.clone(), xi0)?;
        let phi1 = Sigma1::new(star1.clone(), xi1)?;
        Ok(BimoduleModel {
            star1,
            star0,
            g,
            phi0,
            phi1,
        })
    }

    /// `G = 1`, `φ₀ = φ₁ = id`.
    pub fn diagonal(star: StarProduct) -> Result<Self> {
        let (n, order) = (star.dim, star.order);
        Self::new(
            star,
            GaugeOp::identity(n, order),
            MultiVec::zero(n, 1),
            MultiVec::zero(n, 1),
        )
    }

    pub fn star0(&self) -> &StarProduct {
        &self.star0
    }

    pub fn star1(&self) -> &StarProduct {
        &self.star1
    }

    pub fn phi0(&self) -> &Sigma1 {
        &self.phi0
    }

    pub fn phi1(&self) -> &Sigma1 {
        &self.phi1
    }

    pub fn gauge(&self) -> &GaugeOp {
        &self.g
    }
}

/// `∇_{df}(m)`: the `t`-coefficient of `φ₁(f) ⋆₁ m − m ⋆₁ Φ(φ₀(f))`.
pub fn contravariant_nabla(m: &BimoduleModel, f: &Poly, sec: &Poly) -> Result<Poly> {
    let order = m.star1.order;
    let lift = |xi: &Sigma1| -> Result<TPoly> {
        xi.representative()?
            .apply(&TPoly::from_poly(f.clone(), order))
    };
    let left = lift(&m.phi1)?;
    let right = m.g.apply(&lift(&m.phi0)?)?;
    let ms = TPoly::from_poly(sec.clone(), order);
    let v = star_mul(&m.star1, &left, &ms)?.sub(&star_mul(&m.star1, &ms, &right)?)?;
    Ok(v.coeff(1).clone())
}

/// `∇_α m` for a 1-form `α = Σ h_k dx_k`, by `O`-linearity.
fn nabla_form(m: &BimoduleModel, alpha: &crate::calculus::Form, sec: &Poly) -> Result<Poly> {
    let n = m.star1.dim;
    let mut out = Poly::zero(n);
    for (idx, h) in alpha.terms() {
        out.add_assign_ref(&(h * &contravariant_nabla(m, &Poly::var(n, idx[0]), sec)?));
    }
    Ok(out)
}

/// `c(∇)(df,dg) = ∇_{df}∇_{dg} − ∇_{dg}∇_{df} − ∇_{[df,dg]_π}`, which must
/// act on sections by multiplication.
pub fn nabla_curvature(m: &BimoduleModel) -> Result<MultiVec> {
    use crate::calculus::Form;
    let n = m.star1.dim;
    let pi = m.star1.bracket_op().to_bivector()?;
    let dx = |i: usize| Form::basis(n, &[i], Poly::one(n));
    let curvature = |i: usize, j: usize, sec: &Poly| -> Result<Poly> {
        let (xi, xj) = (Poly::var(n, i), Poly::var(n, j));
        let a = contravariant_nabla(m, &xi, &contravariant_nabla(m, &xj, sec)?)?;
        let b = contravariant_nabla(m, &xj, &contravariant_nabla(m, &xi, sec)?)?;
        let k = koszul_bracket(&pi, &dx(i), &dx(j))?;
        Ok(a - b - nabla_form(m, &k, sec)?)
    };
    let mut out = MultiVec::zero(n, 2);
    for t in increasing_tuples(n, 2) {
        let value = curvature(t[0], t[1], &Poly::one(n))?;
        for l in 0..n {
            let xl = Poly::var(n, l);
            if curvature(t[0], t[1], &xl)? != &value * &xl {
                return Err(Error::Convention(
                    "connection curvature is not a multiplication operator".into(),
                ));
            }
        }
        out.add_term(t, value);
    }
    Ok(out)
}

/// Witness for a non-derivation `R₁`, rendered for reports.
pub fn derivation_failure(r1: &PolyDiffOp) -> Result<Option<String>> {
    let names = variable_names(r1.dim());
    Ok(derivation_witness(r1)?.map(|(f, g, v)| {
        format!(
            "delta R1({}, {}) = {}",
            f.render(&names),
            g.render(&names),
            v.render(&names)
        )
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::cocycle_defect;
    use crate::kernel::rat;
    use crate::poisson::lichnerowicz_d;

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    fn e(n: usize, i: usize) -> Exponents {
        Exponents::unit(n, i)
    }

    fn std_pi() -> MultiVec {
        MultiVec::basis(2, &[0, 1], Poly::one(2))
    }

    fn tp(p: Poly, order: usize) -> TPoly {
        TPoly::from_poly(p, order)
    }

    fn half_dxx() -> PolyDiffOp {
        PolyDiffOp::derivative(Poly::constant(2, rat(1, 2)), Exponents(vec![2, 0]))
    }

    #[test]
    fn sections_preserve_the_unit() {
        let s = moyal(&MultiVec::basis(2, &[0, 1], Poly::one(2)), 2).unwrap();
        let half = PolyDiffOp::derivative(Poly::one(2), Exponents(vec![2, 0]));
        let ok = GaugeOp::new(2, 2, vec![half.clone(), PolyDiffOp::zero(2, 1)]).unwrap();
        assert!(Section::new(s.clone(), ok).unwrap().is_special().is_ok());
        let shifted = GaugeOp::new(
            2,
            2,
            vec![half, PolyDiffOp::multiplication_by(Poly::var(2, 0), 1)],
        )
        .unwrap();
        assert!(matches!(
            Section::new(s, shifted),
            Err(Error::NotUnital { order: 2 })
        ));
    }

    #[test]
    fn star_mul_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let xy = star_mul(&s, &tp(x(2, 0), 2), &tp(x(2, 1), 2)).unwrap();
        assert_eq!(xy.coeff(0), &(x(2, 0) * x(2, 1)));
        assert_eq!(xy.coeff(1), &Poly::constant(2, rat(1, 2)));
        let yx = star_mul(&s, &tp(x(2, 1), 2), &tp(x(2, 0), 2)).unwrap();
        assert_eq!(xy.sub(&yx).unwrap(), TPoly::monomial(Poly::one(2), 1, 2));
        let f = x(2, 0).pow(3) * x(2, 1);
        assert_eq!(
            star_mul(&s, &tp(Poly::one(2), 2), &tp(f.clone(), 2)).unwrap(),
            tp(f, 2)
        );
    }

    #[test]
    fn moyal_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let mut p2 = PolyDiffOp::zero(2, 2);
        let c = |v| Poly::constant(2, rat(v, 8));
        p2.add_term(vec![Exponents(vec![2, 0]), Exponents(vec![0, 2])], c(1));
        p2.add_term(vec![Exponents(vec![1, 1]), Exponents(vec![1, 1])], c(-2));
        p2.add_term(vec![Exponents(vec![0, 2]), Exponents(vec![2, 0])], c(1));
        assert_eq!(s.p(2), p2);
        let zero = moyal(&MultiVec::zero(2, 2), 3).unwrap();
        assert!(zero.ps().iter().all(PolyDiffOp::is_zero));
        let s4 = moyal(&std_pi(), 4).unwrap();
        assert!(assoc_defect(&s4).unwrap().iter().all(PolyDiffOp::is_zero));
        assert!(s4.is_unital() && s4.is_special());
        let nonconst = MultiVec::basis(2, &[0, 1], x(2, 0));
        assert!(moyal(&nonconst, 2).is_err());
    }

    #[test]
    fn assoc_defect_examples() {
        let bad = PolyDiffOp::monomial(Poly::one(2), vec![e(2, 0), e(2, 0)]);
        let s = StarProduct::new(2, 2, vec![bad.clone()]).unwrap();
        let d = assoc_defect(&s).unwrap();
        assert!(d[0].is_zero());
        assert!(!d[1].is_zero());
        let s1 = StarProduct::new(2, 1, vec![bad.clone()]).unwrap();
        assert_eq!(assoc_defect(&s1).unwrap()[0], cocycle_defect(&bad).unwrap());
    }

    #[test]
    fn assoc_poisson_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        assert_eq!(assoc_poisson(&s).unwrap(), std_pi());
        let r = GaugeOp::new(
            2,
            2,
            vec![half_dxx(), PolyDiffOp::derivative(x(2, 1), e(2, 0))],
        )
        .unwrap();
        assert_eq!(
            assoc_poisson(&gauge_transform(&s, &r).unwrap()).unwrap(),
            std_pi()
        );
        assert!(assoc_poisson(&StarProduct::commutative(2, 2).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn gauge_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        assert_eq!(gauge_transform(&s, &GaugeOp::identity(2, 2)).unwrap(), s);
        let r = GaugeOp::new(2, 2, vec![half_dxx()]).unwrap();
        let g = gauge_transform(&s, &r).unwrap();
        let expected = s
            .p(1)
            .sub(&PolyDiffOp::monomial(Poly::one(2), vec![e(2, 0), e(2, 0)]));
        assert_eq!(g.p(1), expected);
        let xi = MultiVec::basis(2, &[0], x(2, 0));
        let g = gauge_transform(&s, &GaugeOp::from_vector_field(&xi, 2).unwrap()).unwrap();
        assert!(g.is_special());
    }

    #[test]
    fn invert_examples() {
        let q = half_dxx();
        let r = GaugeOp::new(2, 2, vec![q.clone()]).unwrap();
        let inv = invert_gauge(&r).unwrap();
        assert_eq!(inv.r(1), q.neg());
        assert_eq!(inv.r(2), q.compose_at(0, &q).unwrap());
        assert!(invert_gauge(&GaugeOp::identity(2, 2))
            .unwrap()
            .is_identity());
        let s = moyal(&std_pi(), 2).unwrap();
        let back = gauge_transform(&gauge_transform(&s, &r).unwrap(), &inv).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn specialize_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let sp = specialize(&s, 2).unwrap();
        assert!(sp.q.is_zero() && sp.gauge.is_identity());
        let r = GaugeOp::new(2, 2, vec![half_dxx()]).unwrap();
        let sprime = gauge_transform(&s, &r).unwrap();
        let sp = specialize(&sprime, 2).unwrap();
        assert_eq!(sp.q, half_dxx());
        assert!(gauge_transform(&sprime, &sp.gauge).unwrap().is_special());
    }

    #[test]
    fn coboundary_of_multiplication() {
        let sym = PolyDiffOp::multiplication_by(x(2, 0), 2);
        let q = solve_coboundary(&sym, 1).unwrap();
        assert_eq!(q, PolyDiffOp::multiplication_by(x(2, 0), 1));
        let no = PolyDiffOp::monomial(Poly::one(2), vec![e(2, 0), e(2, 1)]);
        assert!(matches!(
            solve_coboundary(&no, 1),
            Err(Error::NoSolution { .. })
        ));
    }

    #[test]
    fn sigma1_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let id = sigma1_class(&s, &GaugeOp::identity(2, 2)).unwrap();
        assert!(id.xi().is_zero());
        let xdx = MultiVec::basis(2, &[0], x(2, 0));
        let r = GaugeOp::new(
            2,
            2,
            vec![PolyDiffOp::from_vector_field(&xdx).unwrap(), half_dxx()],
        )
        .unwrap();
        assert_eq!(sigma1_class(&s, &r).unwrap().xi(), &xdx);
        let bad = GaugeOp::new(2, 2, vec![half_dxx()]).unwrap();
        assert!(matches!(
            sigma1_class(&s, &bad),
            Err(Error::NotDerivation { .. })
        ));
    }

    #[test]
    fn subprincipal_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        assert!(subprincipal(&s, &GaugeOp::identity(2, 2))
            .unwrap()
            .is_zero());
        let xdx = MultiVec::basis(2, &[0], x(2, 0));
        let r = GaugeOp::from_vector_field(&xdx, 2).unwrap();
        let c = subprincipal(&s, &r).unwrap();
        assert_eq!(c, std_pi());
        assert_eq!(c, lichnerowicz_d(&std_pi(), &xdx).unwrap());
        assert_eq!(subprincipal_by_evaluation(&s, &r).unwrap(), c);
        let q = PolyDiffOp::derivative(x(2, 1), Exponents(vec![1, 2]));
        let r2 = GaugeOp::new(2, 2, vec![PolyDiffOp::zero(2, 1), q]).unwrap();
        assert!(subprincipal(&s, &r2).unwrap().is_zero());
    }

    #[test]
    fn ad_exp_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let b = tp(x(2, 1), 2);
        assert_eq!(ad_exp(&s, &TPoly::zero(2, 2), &b).unwrap(), b);
        let got = ad_exp(&s, &tp(x(2, 0), 2), &b).unwrap();
        assert_eq!(got, b.add(&TPoly::monomial(Poly::one(2), 1, 2)).unwrap());
        let a = tp(x(2, 0).pow(2) * x(2, 1), 2);
        let b = tp(x(2, 1).pow(3), 2);
        assert_eq!(ad_exp(&s, &a, &b).unwrap().sigma(), b.sigma());
    }

    #[test]
    fn sigma1_of_ad_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let id = Sigma1::identity(s.clone()).unwrap();
        assert_eq!(sigma1_of_ad(&s, &TPoly::zero(2, 2), &id).unwrap(), id);
        let got = sigma1_of_ad(&s, &tp(x(2, 0).pow(2), 2), &id).unwrap();
        assert_eq!(got.xi(), &MultiVec::basis(2, &[1], x(2, 0).scale_int(2)));
        let a = TPoly::monomial(x(2, 0).pow(3), 1, 2);
        assert_eq!(sigma1_of_ad(&s, &a, &id).unwrap(), id);
    }

    #[test]
    fn nabla_examples() {
        let s = moyal(&std_pi(), 2).unwrap();
        let diag = BimoduleModel::diagonal(s.clone()).unwrap();
        let f = x(2, 0).pow(2) * x(2, 1);
        let m = x(2, 1).pow(2) + x(2, 0);
        let pi = std_pi();
        assert_eq!(
            contravariant_nabla(&diag, &f, &m).unwrap(),
            bracket(&pi, &f, &m).unwrap()
        );
        assert!(nabla_curvature(&diag).unwrap().is_zero());
        let xi = MultiVec::basis(2, &[0], x(2, 0) * x(2, 1));
        let tw = BimoduleModel::new(
            s.clone(),
            GaugeOp::identity(2, 2),
            MultiVec::zero(2, 1),
            xi.clone(),
        )
        .unwrap();
        let expected = bracket(&pi, &f, &m).unwrap()
            + crate::calculus::apply_field(&xi, &f).unwrap() * m.clone();
        assert_eq!(contravariant_nabla(&tw, &f, &m).unwrap(), expected);
        assert!(contravariant_nabla(&tw, &Poly::from_int(2, 3), &m)
            .unwrap()
            .is_zero());
        assert_eq!(
            nabla_curvature(&tw).unwrap(),
            lichnerowicz_d(&pi, &xi).unwrap()
        );
        let swapped =
            BimoduleModel::new(s, GaugeOp::identity(2, 2), xi.clone(), MultiVec::zero(2, 1))
                .unwrap();
        assert_eq!(
            nabla_curvature(&swapped).unwrap(),
            nabla_curvature(&tw).unwrap().neg()
        );
    }
}
