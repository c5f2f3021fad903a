//! Exterior and multivector calculus with polynomial coefficients.
//!
//! Multivectors and forms share one representation, [`Alt`], tagged by a
//! marker type so the two cannot be mixed. Indices are 0-based internally.

mod alt;

pub use alt::{
    det, increasing_tuples, sort_sign, wedge, AlgebroidForm, Alt, AltKind, Covectors, Form, Frame,
    MultiVec, Vectors,
};

use crate::error::{Error, Result};
use crate::kernel::Poly;

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_degree(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DegreeMismatch { expected, found });
    }
    Ok(())
}

/// The exact 1-form `df`.
pub fn differential(f: &Poly) -> Form {
    let n = f.dim();
    let mut out = Form::zero(n, 1);
    for i in 0..n {
        out.add_term(vec![i], f.d(i));
    }
    out
}

/// The coordinate vector field `coeff · ∂_i`.
pub fn coordinate_field(dim: usize, i: usize, coeff: Poly) -> MultiVec {
    MultiVec::basis(dim, &[i], coeff)
}

/// Components `X^i` of a vector field.
pub fn components(x: &MultiVec) -> Vec<Poly> {
    (0..x.dim()).map(|i| x.coeff(&[i])).collect()
}

/// `X(f)` for a vector field `X`.
pub fn apply_field(x: &MultiVec, f: &Poly) -> Result<Poly> {
    check_degree(1, x.degree())?;
    check_dim(x.dim(), f.dim())?;
    let mut out = Poly::zero(f.dim());
    for (idx, c) in x.terms() {
        out.add_assign_ref(&(c * &f.d(idx[0])));
    }
    Ok(out)
}

/// Lie bracket of vector fields, `[X,Y](f) = X(Y f) - Y(X f)`.
pub fn lie_bracket(x: &MultiVec, y: &MultiVec) -> Result<MultiVec> {
    check_degree(1, x.degree())?;
    check_degree(1, y.degree())?;
    check_dim(x.dim(), y.dim())?;
    let n = x.dim();
    let mut out = MultiVec::zero(n, 1);
    for j in 0..n {
        let v = apply_field(x, &y.coeff(&[j]))? - apply_field(y, &x.coeff(&[j]))?;
        out.add_term(vec![j], v);
    }
    Ok(out)
}

/// de Rham differential.
pub fn exterior_d(omega: &Form) -> Form {
    let n = omega.dim();
    let mut out = Form::zero(n, omega.degree() + 1);
    if omega.degree() >= n {
        return out;
    }
    for (idx, c) in omega.terms() {
        for j in 0..n {
            let dc = c.d(j);
            if dc.is_zero() {
                continue;
            }
            let mut k = Vec::with_capacity(idx.len() + 1);
            k.push(j);
            k.extend_from_slice(idx);
            out.add_term(k, dc);
        }
    }
    out
}

/// Contraction of a vector field into the first slot of a form.
pub fn interior(x: &MultiVec, omega: &Form) -> Result<Form> {
    check_degree(1, x.degree())?;
    check_dim(x.dim(), omega.dim())?;
    if omega.degree() == 0 {
        return Err(Error::Invalid(
            "contraction into a degree-0 form".to_string(),
        ));
    }
    let n = omega.dim();
    let mut out = Form::zero(n, omega.degree() - 1);
    for (idx, c) in omega.terms() {
        for (k, &i) in idx.iter().enumerate() {
            let xi = x.coeff(&[i]);
            if xi.is_zero() {
                continue;
            }
            let mut rest = idx.clone();
            rest.remove(k);
            let v = &xi * c;
            out.add_term(rest, if k % 2 == 0 { v } else { -v });
        }
    }
    Ok(out)
}

/// Lie derivative by the Cartan formula `L_X = ι_X d + d ι_X`.
pub fn lie_derivative(x: &MultiVec, omega: &Form) -> Result<Form> {
    check_degree(1, x.degree())?;
    check_dim(x.dim(), omega.dim())?;
    let mut out = interior(x, &exterior_d(omega))?;
    if omega.degree() > 0 {
        out = out.add(&exterior_d(&interior(x, omega)?));
    }
    Ok(out)
}

/// Full antisymmetric pairing `A(α¹, …, α^p)`.
pub fn pair(a: &MultiVec, alphas: &[Form]) -> Result<Poly> {
    if alphas.len() != a.degree() {
        return Err(Error::ArityMismatch {
            expected: a.degree(),
            found: alphas.len(),
        });
    }
    for al in alphas {
        check_dim(a.dim(), al.dim())?;
        check_degree(1, al.degree())?;
    }
    let n = a.dim();
    let mut out = Poly::zero(n);
    for (idx, c) in a.terms() {
        let m: Vec<Vec<Poly>> = alphas
            .iter()
            .map(|al| idx.iter().map(|&i| al.coeff(&[i])).collect())
            .collect();
        out.add_assign_ref(&(c * &det(&m, n)));
    }
    Ok(out)
}

/// `ω(X₁, …, X_p)` for vector fields `X_k`.
pub fn eval_form(omega: &Form, fields: &[MultiVec]) -> Result<Poly> {
    if fields.len() != omega.degree() {
        return Err(Error::ArityMismatch {
            expected: omega.degree(),
            found: fields.len(),
        });
    }
    for x in fields {
        check_dim(omega.dim(), x.dim())?;
        check_degree(1, x.degree())?;
    }
    let n = omega.dim();
    let mut out = Poly::zero(n);
    for (idx, c) in omega.terms() {
        let m: Vec<Vec<Poly>> = fields
            .iter()
            .map(|x| idx.iter().map(|&i| x.coeff(&[i])).collect())
            .collect();
        out.add_assign_ref(&(c * &det(&m, n)));
    }
    Ok(out)
}

/// `A(df₁, …, df_p)`.
pub fn eval_on_functions(a: &MultiVec, fs: &[Poly]) -> Result<Poly> {
    let forms: Vec<Form> = fs.iter().map(differential).collect();
    pair(a, &forms)
}

/// The bivector matrix entry `π^{ij}` with `π^{ji} = -π^{ij}`.
pub fn bivector_entry(pi: &MultiVec, i: usize, j: usize) -> Poly {
    pi.coeff(&[i, j])
}

/// The anchor `π̃(α)`, with `π̃(α)^j = Σ_i α_i π^{ij}`.
pub fn anchor(pi: &MultiVec, alpha: &Form) -> Result<MultiVec> {
    check_degree(2, pi.degree())?;
    check_degree(1, alpha.degree())?;
    check_dim(pi.dim(), alpha.dim())?;
    let n = pi.dim();
    let mut out = MultiVec::zero(n, 1);
    for j in 0..n {
        let mut v = Poly::zero(n);
        for i in 0..n {
            let a = alpha.coeff(&[i]);
            if !a.is_zero() {
                v.add_assign_ref(&(&a * &bivector_entry(pi, i, j)));
            }
        }
        out.add_term(vec![j], v);
    }
    Ok(out)
}

/// Pullback of a `p`-form along the anchor: the `p`-vector whose value on
/// covectors `(α¹, …, α^p)` is `ω(π̃α¹, …, π̃α^p)`.
pub fn anchor_pullback(pi: &MultiVec, omega: &Form) -> Result<MultiVec> {
    check_degree(2, pi.degree())?;
    check_dim(pi.dim(), omega.dim())?;
    let n = pi.dim();
    let images: Vec<MultiVec> = (0..n)
        .map(|k| anchor(pi, &Form::basis(n, &[k], Poly::one(n))))
        .collect::<Result<_>>()?;
    let mut err = None;
    let out = MultiVec::from_fn(n, n, omega.degree(), |idx| {
        let fields: Vec<MultiVec> = idx.iter().map(|&k| images[k].clone()).collect();
        eval_form(omega, &fields).unwrap_or_else(|e| {
            err = Some(e);
            Poly::zero(n)
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Right derivative `A ∂⃖/∂θ_i` of a multivector viewed as a polynomial in
/// odd variables `θ_i = ∂_i`.
fn right_derivative(a: &MultiVec, i: usize) -> MultiVec {
    let n = a.dim();
    let p = a.degree();
    let mut out = MultiVec::zero(n, p.saturating_sub(1));
    if p == 0 {
        return out;
    }
    for (idx, c) in a.terms() {
        if let Some(k) = idx.iter().position(|&j| j == i) {
            let mut rest = idx.clone();
            rest.remove(k);
            let sign_odd = (p - 1 - k) % 2 == 1;
            out.add_term(rest, if sign_odd { -c } else { c.clone() });
        }
    }
    out
}

fn coefficient_partial(a: &MultiVec, i: usize) -> MultiVec {
    a.map_coeffs(|c| c.d(i))
}

/// Schouten–Nijenhuis bracket.
///
/// Computed as `Σ_i (A∂⃖_i)∧∂_iB − (−1)^{(a−1)(b−1)} (B∂⃖_i)∧∂_iA`; this
/// satisfies `[X,f] = X(f)`, agrees with the Lie bracket on vector fields
/// and obeys `[A,B∧C] = [A,B]∧C + (−1)^{(a−1)b} B∧[A,C]`.
pub fn schouten(a: &MultiVec, b: &MultiVec) -> Result<MultiVec> {
    check_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let (p, q) = (a.degree(), b.degree());
    let degree = (p + q).checked_sub(1);
    let Some(degree) = degree else {
        // Both are functions.
        return Ok(MultiVec::zero(n, 0));
    };
    let mut out = MultiVec::zero(n, degree);
    let swap_negative = ((p as i64 - 1) * (q as i64 - 1)).rem_euclid(2) == 0;
    for i in 0..n {
        if p > 0 {
            out = out.add(&right_derivative(a, i).wedge(&coefficient_partial(b, i))?);
        }
        if q > 0 {
            let right = right_derivative(b, i).wedge(&coefficient_partial(a, i))?;
            out = if swap_negative {
                out.sub(&right)
            } else {
                out.add(&right)
            };
        }
    }
    Ok(out)
}
