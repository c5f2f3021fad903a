//! Poisson brackets, the Koszul bracket on 1-forms and the Lichnerowicz
//! differential.
//!
//! Convention: `{f,g} = Σ πⁱʲ ∂_i f ∂_j g` with `πʲⁱ = −πⁱʲ`.

use crate::calculus::{
    anchor, bivector_entry, differential, eval_on_functions, exterior_d, increasing_tuples,
    lie_derivative, pair, Form, MultiVec,
};
use crate::error::{Error, Result};
use crate::kernel::Poly;

/// Realized signs `ε_p` with `schouten(π, A) = ε_p · lichnerowicz_d(π, A)`
/// for `deg A = p ∈ {0, 1, 2}`.
///
/// Degree 0 differs because `d_Π f` is pinned to the Hamiltonian field
/// `X_f`, while the bracket gives `[π, f] = −X_f`.
pub const SCHOUTEN_SIGNS: [i64; 3] = [-1, 1, 1];

fn check_bivector(pi: &MultiVec) -> Result<()> {
    if pi.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: pi.degree(),
        });
    }
    Ok(())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `{f, g}`.
pub fn bracket(pi: &MultiVec, f: &Poly, g: &Poly) -> Result<Poly> {
    check_bivector(pi)?;
    check_dim(pi.dim(), f.dim())?;
    check_dim(pi.dim(), g.dim())?;
    let mut out = Poly::zero(pi.dim());
    for (idx, c) in pi.terms() {
        let (i, j) = (idx[0], idx[1]);
        let v = f.d(i) * g.d(j) - f.d(j) * g.d(i);
        out.add_assign_ref(&(c * &v));
    }
    Ok(out)
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
pub fn jacobiator(pi: &MultiVec, f: &Poly, g: &Poly, h: &Poly) -> Result<Poly> {
    let a = bracket(pi, f, &bracket(pi, g, h)?)?;
    let b = bracket(pi, g, &bracket(pi, h, f)?)?;
    let c = bracket(pi, h, &bracket(pi, f, g)?)?;
    Ok(a + b + c)
}

/// Outcome of [`is_poisson`]: on failure, the first coordinate triple
/// (0-based) with nonzero jacobiator and its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonCheck {
    pub witness: Option<([usize; 3], Poly)>,
}

impl PoissonCheck {
    pub fn is_poisson(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks Jacobi on all coordinate triples, which suffices because the
/// jacobiator is a trivector.
pub fn is_poisson(pi: &MultiVec) -> Result<PoissonCheck> {
    check_bivector(pi)?;
    let n = pi.dim();
    for t in increasing_tuples(n, 3) {
        let x = |i: usize| Poly::var(n, t[i]);
        let j = jacobiator(pi, &x(0), &x(1), &x(2))?;
        if !j.is_zero() {
            return Ok(PoissonCheck {
                witness: Some(([t[0], t[1], t[2]], j)),
            });
        }
    }
    Ok(PoissonCheck { witness: None })
}

/// A bivector together with the result of its Jacobi check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonStructure {
    pi: MultiVec,
    checked: bool,
}

impl PoissonStructure {
    /// Accepts `pi` only if it satisfies Jacobi.
    pub fn new(pi: MultiVec) -> Result<Self> {
        if let Some((t, value)) = is_poisson(&pi)?.witness {
            let names = crate::kernel::variable_names(pi.dim());
            return Err(Error::NotPoisson {
                triple: format!("{}, {}, {}", names[t[0]], names[t[1]], names[t[2]]),
                value: value.to_string(),
            });
        }
        Ok(PoissonStructure { pi, checked: true })
    }

    /// Wraps `pi` without checking Jacobi.
    pub fn unchecked(pi: MultiVec) -> Result<Self> {
        check_bivector(&pi)?;
        Ok(PoissonStructure { pi, checked: false })
    }

    pub fn pi(&self) -> &MultiVec {
        &self.pi
    }

    pub fn checked(&self) -> bool {
        self.checked
    }
}

/// `[α, β]_π = L_{π̃α}β − L_{π̃β}α − d π(α, β)`.
pub fn koszul_bracket(pi: &MultiVec, alpha: &Form, beta: &Form) -> Result<Form> {
    check_bivector(pi)?;
    let a = lie_derivative(&anchor(pi, alpha)?, beta)?;
    let b = lie_derivative(&anchor(pi, beta)?, alpha)?;
    let c = exterior_d(&Form::scalar(pair(pi, &[alpha.clone(), beta.clone()])?));
    Ok(a.sub(&b).sub(&c))
}

/// The Hamiltonian field `X_f = π̃(df)`, so that `X_f(g) = {f, g}`.
pub fn hamiltonian(pi: &MultiVec, f: &Poly) -> Result<MultiVec> {
    check_dim(pi.dim(), f.dim())?;
    anchor(pi, &differential(f))
}

/// `A(dh, dx_rest…)` where `rest` lists the remaining coordinate slots.
fn eval_with_exact_first(a: &MultiVec, h: &Poly, rest: &[usize]) -> Poly {
    let n = a.dim();
    let mut out = Poly::zero(n);
    for l in 0..n {
        let dh = h.d(l);
        if dh.is_zero() {
            continue;
        }
        let mut idx = Vec::with_capacity(rest.len() + 1);
        idx.push(l);
        idx.extend_from_slice(rest);
        out.add_assign_ref(&(dh * a.coeff(&idx)));
    }
    out
}

/// Lichnerowicz differential `d_Π`.
///
/// Degree 0 is `f ↦ X_f`. In degree `p ≥ 1` the value on coordinate
/// differentials `(dx_{j_0}, …, dx_{j_p})` is
/// `Σ_i (−1)^i {x_{j_i}, A(…î…)} + Σ_{i<k} (−1)^{i+k} A(d{x_{j_i}, x_{j_k}}, …î…k̂…)`,
/// which in degrees 1 and 2 is exactly
/// `{ξf,g} + {f,ξg} − ξ{f,g}` and
/// `{f,c(g,h)} − {g,c(f,h)} + {h,c(f,g)} − c({f,g},h) + c({f,h},g) − c({g,h},f)`.
pub fn lichnerowicz_d(pi: &MultiVec, a: &MultiVec) -> Result<MultiVec> {
    check_bivector(pi)?;
    check_dim(pi.dim(), a.dim())?;
    let n = pi.dim();
    let p = a.degree();
    if p == 0 {
        return hamiltonian(pi, &a.as_scalar());
    }
    let mut out = MultiVec::zero(n, p + 1);
    if p + 1 > n {
        return Ok(out);
    }
    for j in increasing_tuples(n, p + 1) {
        let mut v = Poly::zero(n);
        for i in 0..=p {
            let mut rest = j.clone();
            let xi = rest.remove(i);
            let term = bracket(pi, &Poly::var(n, xi), &a.coeff(&rest))?;
            if i % 2 == 0 {
                v.add_assign_ref(&term);
            } else {
                v.sub_assign_ref(&term);
            }
        }
        for i in 0..=p {
            for k in i + 1..=p {
                let h = bivector_entry(pi, j[i], j[k]);
                if h.is_constant() {
                    continue;
                }
                let rest: Vec<usize> = j
                    .iter()
                    .enumerate()
                    .filter(|(l, _)| *l != i && *l != k)
                    .map(|(_, &x)| x)
                    .collect();
                let term = eval_with_exact_first(a, &h, &rest);
                if (i + k) % 2 == 0 {
                    v.add_assign_ref(&term);
                } else {
                    v.sub_assign_ref(&term);
                }
            }
        }
        out.add_term(j, v);
    }
    Ok(out)
}

/// Independent closedness check for a bivector `c`: evaluates
/// `{f,c(g,h)} − {g,c(f,h)} + {h,c(f,g)} − c({f,g},h) + c({f,h},g) − c({g,h},f)`
/// on every coordinate triple and returns the first nonzero value.
pub fn closedness_witness(pi: &MultiVec, c: &MultiVec) -> Result<Option<([usize; 3], Poly)>> {
    check_bivector(pi)?;
    check_bivector(c)?;
    check_dim(pi.dim(), c.dim())?;
    let n = pi.dim();
    let cv = |f: &Poly, g: &Poly| eval_on_functions(c, &[f.clone(), g.clone()]);
    for t in increasing_tuples(n, 3) {
        let (f, g, h) = (Poly::var(n, t[0]), Poly::var(n, t[1]), Poly::var(n, t[2]));
        let v = bracket(pi, &f, &cv(&g, &h)?)? - bracket(pi, &g, &cv(&f, &h)?)?
            + bracket(pi, &h, &cv(&f, &g)?)?
            - cv(&bracket(pi, &f, &g)?, &h)?
            + cv(&bracket(pi, &f, &h)?, &g)?
            - cv(&bracket(pi, &g, &h)?, &f)?;
        if !v.is_zero() {
            return Ok(Some(([t[0], t[1], t[2]], v)));
        }
    }
    Ok(None)
}
