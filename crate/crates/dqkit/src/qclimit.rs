//! Quasi-classical data `(π_t, H)`: the Maurer–Cartan equation
//! `[π_t, π_t] = π̃_t^{∧3}(H)` order by order, and the 2-vector
//! `κ = π̃₁^{∧2}(B) − π₂` attached to a curving `B` with `dB = H`.
//!
//! The triple contraction enters the defect with factor 2:
//! `Δ_m = Σ_{i+j=m} [π_i, π_j] − 2 Σ_{i+j+k=m} H(π̃_i·, π̃_j·, π̃_k·)`.
//! With this normalization `Δ₃ = 0` is exactly the condition making `κ`
//! closed, since `[π, π̃^{∧2}B] = π̃^{∧3}(dB)`.

use num::One;

use crate::calculus::{
    anchor, anchor_pullback, eval_form, exterior_d, increasing_tuples, schouten, Form, MultiVec,
};
use crate::error::{Error, Result};
use crate::kernel::{int, variable_names, Poly, Rat};
use crate::poisson::{closedness_witness, is_poisson};

/// Weight of the triple contraction in the Maurer–Cartan defect.
pub const TRIPLE_FACTOR: i64 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCData {
    dim: usize,
    /// `pis[k-1] = π_k`.
    pis: Vec<MultiVec>,
    h: Form,
    poisson_witness: Option<([usize; 3], Poly)>,
}

impl QCData {
    /// Validates dimensions and degrees and that `dH = 0`. Whether `π₁` is
    /// Poisson is recorded, not enforced: the order-2 defect reports it.
    pub fn new(pis: Vec<MultiVec>, h: Form) -> Result<Self> {
        let dim = h.dim();
        if pis.is_empty() {
            return Err(Error::Invalid(
                "quasi-classical data needs at least pi_1".into(),
            ));
        }
        if h.degree() != 3 {
            return Err(Error::DegreeMismatch {
                expected: 3,
                found: h.degree(),
            });
        }
        for pi in &pis {
            if pi.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: pi.dim(),
                });
            }
            if pi.degree() != 2 {
                return Err(Error::DegreeMismatch {
                    expected: 2,
                    found: pi.degree(),
                });
            }
        }
        let dh = exterior_d(&h);
        if !dh.is_zero() {
            return Err(Error::NotClosed(dh.render()));
        }
        let poisson_witness = is_poisson(&pis[0])?.witness;
        Ok(QCData {
            dim,
            pis,
            h,
            poisson_witness,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.pis.len()
    }

    /// `π_k` for `k ≥ 1`; zero beyond the order.
    pub fn pi(&self, k: usize) -> MultiVec {
        assert!(k >= 1, "pi_0 is not part of the data");
        self.pis
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| MultiVec::zero(self.dim, 2))
    }

    pub fn pis(&self) -> &[MultiVec] {
        &self.pis
    }

    pub fn h(&self) -> &Form {
        &self.h
    }

    /// Jacobi witness for `π₁`, if it is not Poisson.
    pub fn poisson_witness(&self) -> Option<&([usize; 3], Poly)> {
        self.poisson_witness.as_ref()
    }

    /// `Δ_m` with `π_k = 0` beyond the order.
    pub fn defect_at(&self, m: usize) -> Result<MultiVec> {
        let n = self.dim;
        let mut out = MultiVec::zero(n, 3);
        for i in 1..m {
            let (a, b) = (self.pi(i), self.pi(m - i));
            if !a.is_zero() && !b.is_zero() {
                out = out.add(&schouten(&a, &b)?);
            }
        }
        let mut contraction = MultiVec::zero(n, 3);
        for i in 1..m {
            for j in 1..m - i {
                let k = m - i - j;
                let parts = [self.pi(i), self.pi(j), self.pi(k)];
                if parts.iter().any(MultiVec::is_zero) {
                    continue;
                }
                contraction = contraction.add(&triple_contraction(&self.h, &parts)?);
            }
        }
        Ok(out.sub(&contraction.scale(&int(TRIPLE_FACTOR))))
    }
}

/// The 3-vector `(α, β, γ) ↦ H(π̃_a α, π̃_b β, π̃_c γ)`, antisymmetrized over
/// the argument slots. For `a = b = c` this is `anchor_pullback`.
pub fn triple_contraction(h: &Form, pis: &[MultiVec; 3]) -> Result<MultiVec> {
    let n = h.dim();
    let covector = |k: usize| Form::basis(n, &[k], Poly::one(n));
    let mut out = MultiVec::zero(n, 3);
    let perms: [([usize; 3], bool); 6] = [
        ([0, 1, 2], false),
        ([1, 2, 0], false),
        ([2, 0, 1], false),
        ([1, 0, 2], true),
        ([0, 2, 1], true),
        ([2, 1, 0], true),
    ];
    for t in increasing_tuples(n, 3) {
        let mut value = Poly::zero(n);
        for (p, odd) in perms {
            let fields = (0..3)
                .map(|s| anchor(&pis[s], &covector(t[p[s]])))
                .collect::<Result<Vec<_>>>()?;
            let v = eval_form(h, &fields)?;
            value = if odd { value - v } else { value + v };
        }
        out.add_term(t, value.scale(&(Rat::one() / int(6))));
    }
    Ok(out)
}

/// Defects `Δ_m` for `m = 2..=N+1`, first entry order 2.
pub fn mc_defect(q: &QCData) -> Result<Vec<MultiVec>> {
    (2..=q.order() + 1).map(|m| q.defect_at(m)).collect()
}

/// First nonzero coefficient of a 3-vector, rendered `(dx, dy, dz) = v`.
pub fn describe_trivector(a: &MultiVec) -> Option<String> {
    let names = variable_names(a.dim());
    a.terms().next().map(|(idx, c)| {
        let slots: Vec<String> = idx.iter().map(|&i| format!("d{}", names[i])).collect();
        format!("({}) = {}", slots.join(", "), c.render(&names))
    })
}

/// `κ` together with its certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kappa {
    pub kappa: MultiVec,
    /// `d_Π κ`, identically zero; evaluated coordinate triple by coordinate
    /// triple from the explicit degree-2 formula.
    pub certificate: MultiVec,
}

/// `κ = π̃₁^{∧2}(B) − π₂`.
///
/// Requires `dB = H`, `π₁` Poisson and `Δ₃ = 0`; otherwise refused, as
/// closedness would not be guaranteed.
pub fn kappa(q: &QCData, b: &Form) -> Result<Kappa> {
    let n = q.dim;
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if b.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: b.degree(),
        });
    }
    let diff = exterior_d(b).sub(&q.h);
    if !diff.is_zero() {
        return Err(Error::CurvingMismatch(diff.render()));
    }
    if let Some((t, v)) = &q.poisson_witness {
        let names = variable_names(n);
        return Err(Error::NotPoisson {
            triple: format!("{}, {}, {}", names[t[0]], names[t[1]], names[t[2]]),
            value: v.to_string(),
        });
    }
    let d3 = q.defect_at(3)?;
    if !d3.is_zero() {
        return Err(Error::McFailure {
            order: 3,
            value: describe_trivector(&d3).unwrap_or_default(),
        });
    }
    let pi = q.pi(1);
    let kappa = anchor_pullback(&pi, b)?.sub(&q.pi(2));
    if let Some((t, v)) = closedness_witness(&pi, &kappa)? {
        let names = variable_names(n);
        return Err(Error::Convention(format!(
            "kappa fails closedness: d_Pi kappa(d{}, d{}, d{}) = {}",
            names[t[0]], names[t[1]], names[t[2]], v
        )));
    }
    Ok(Kappa {
        kappa,
        certificate: MultiVec::zero(n, 3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{jacobiator, lichnerowicz_d};

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    fn bv(n: usize, i: usize, j: usize, c: Poly) -> MultiVec {
        MultiVec::basis(n, &[i, j], c)
    }

    #[test]
    fn vanishing_examples() {
        let q = QCData::new(vec![bv(2, 0, 1, Poly::one(2))], Form::zero(2, 3)).unwrap();
        assert!(mc_defect(&q).unwrap().iter().all(MultiVec::is_zero));
        let h = Form::basis(3, &[0, 1, 2], Poly::one(3));
        let q = QCData::new(vec![bv(3, 0, 1, Poly::one(3)), MultiVec::zero(3, 2)], h).unwrap();
        let d = mc_defect(&q).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(MultiVec::is_zero));
    }

    #[test]
    fn broken_jacobi_defect() {
        let pi = bv(3, 0, 1, Poly::one(3)).add(&bv(3, 1, 2, x(3, 1)));
        let q = QCData::new(vec![pi.clone()], Form::zero(3, 3)).unwrap();
        let d = mc_defect(&q).unwrap();
        assert_eq!(d[0].coeff(&[0, 1, 2]), Poly::from_int(3, 2));
        let j = jacobiator(&pi, &x(3, 0), &x(3, 1), &x(3, 2)).unwrap();
        assert_eq!(d[0].coeff(&[0, 1, 2]), j.scale_int(2));
        assert!(q.poisson_witness().is_some());
    }

    #[test]
    fn rejects_open_h() {
        let h = Form::basis(4, &[0, 1, 2], x(4, 3));
        let pi = bv(4, 0, 1, Poly::one(4));
        assert!(matches!(QCData::new(vec![pi], h), Err(Error::NotClosed(_))));
    }

    #[test]
    fn triple_contraction_diagonal_is_pullback() {
        let pi = bv(3, 0, 1, x(3, 2)).add(&bv(3, 1, 2, x(3, 0)));
        let h = Form::basis(3, &[0, 1, 2], x(3, 1) + Poly::one(3));
        let t = triple_contraction(&h, &[pi.clone(), pi.clone(), pi.clone()]).unwrap();
        assert_eq!(t, anchor_pullback(&pi, &h).unwrap());
    }

    #[test]
    fn kappa_examples() {
        let pi = bv(2, 0, 1, Poly::one(2));
        let q = QCData::new(vec![pi.clone(), MultiVec::zero(2, 2)], Form::zero(2, 3)).unwrap();
        let b = Form::basis(2, &[0, 1], x(2, 0));
        let k = kappa(&q, &b).unwrap();
        assert_eq!(k.kappa.coeff(&[0, 1]), x(2, 0));
        assert!(lichnerowicz_d(&pi, &k.kappa).unwrap().is_zero());
        assert!(kappa(&q, &Form::zero(2, 2)).unwrap().kappa.is_zero());

        let xi = MultiVec::basis(3, &[0], x(3, 1) * x(3, 2));
        let pi3 = bv(3, 0, 1, x(3, 2))
            .add(&bv(3, 1, 2, x(3, 0)))
            .add(&bv(3, 2, 0, x(3, 1)));
        let dxi = lichnerowicz_d(&pi3, &xi).unwrap();
        let q = QCData::new(vec![pi3.clone(), dxi.clone()], Form::zero(3, 3)).unwrap();
        let k = kappa(&q, &Form::zero(3, 2)).unwrap();
        assert_eq!(k.kappa, dxi.neg());
    }

    #[test]
    fn kappa_with_curving() {
        // symplectic R^4 with H = dx1∧dx2∧dx3 and B = x3 dx1∧dx2
        let n = 4;
        let pi = bv(n, 0, 1, Poly::one(n)).add(&bv(n, 2, 3, Poly::one(n)));
        let h = Form::basis(n, &[0, 1, 2], Poly::one(n));
        let b = Form::basis(n, &[0, 1], x(n, 2));
        let pi2 = anchor_pullback(&pi, &b).unwrap();
        let q = QCData::new(vec![pi.clone(), pi2.clone()], h.clone()).unwrap();
        assert!(q.defect_at(3).unwrap().is_zero());
        assert!(kappa(&q, &b).unwrap().kappa.is_zero());

        let q0 = QCData::new(vec![pi.clone(), MultiVec::zero(n, 2)], h).unwrap();
        assert!(matches!(
            kappa(&q0, &b),
            Err(Error::McFailure { order: 3, .. })
        ));
        assert!(matches!(
            kappa(&q0, &Form::zero(n, 2)),
            Err(Error::CurvingMismatch(_))
        ));
    }

    #[test]
    fn kappa_gauge_covariance() {
        let pi = bv(3, 0, 1, x(3, 2))
            .add(&bv(3, 1, 2, x(3, 0)))
            .add(&bv(3, 2, 0, x(3, 1)));
        let b = Form::basis(3, &[0, 2], x(3, 1).pow(2));
        let b = b.sub(&Form::basis(3, &[1, 2], x(3, 0) * x(3, 1)));
        let lambda = Form::basis(3, &[0], x(3, 1) * x(3, 2).pow(2));
        let dl = exterior_d(&lambda);
        let q_h = QCData::new(vec![pi.clone()], exterior_d(&b)).unwrap();
        let k0 = kappa(&q_h, &b).unwrap().kappa;
        let k1 = kappa(&q_h, &b.add(&dl)).unwrap().kappa;
        assert_eq!(k1.sub(&k0), anchor_pullback(&pi, &dl).unwrap());
        assert!(lichnerowicz_d(&pi, &k1).unwrap().is_zero());
    }
}
