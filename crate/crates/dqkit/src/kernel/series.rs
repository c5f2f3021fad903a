use super::{Poly, Rat};
use crate::error::{Error, Result};

/// Polynomial-coefficient series `c_0 + c_1 t + ... + c_N t^N`, truncated at
/// order `N`. Products discard every `t^k` with `k > N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPoly {
    order: usize,
    coeffs: Vec<Poly>,
}

impl TPoly {
    pub fn zero(dim: usize, order: usize) -> Self {
        TPoly {
            order,
            coeffs: vec![Poly::zero(dim); order + 1],
        }
    }

    /// Pads missing coefficients with zero; rejects coefficients beyond `order`
    /// that are nonzero and mixed dimensions.
    pub fn new(dim: usize, order: usize, coeffs: Vec<Poly>) -> Result<Self> {
        let mut out = TPoly::zero(dim, order);
        for (k, c) in coeffs.into_iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            if k > order {
                if !c.is_zero() {
                    return Err(Error::Invalid(format!(
                        "coefficient of t^{k} exceeds truncation order {order}"
                    )));
                }
                continue;
            }
            out.coeffs[k] = c;
        }
        Ok(out)
    }

    /// The constant series `p + 0 t + ...`.
    pub fn from_poly(p: Poly, order: usize) -> Self {
        let dim = p.dim();
        let mut out = TPoly::zero(dim, order);
        out.coeffs[0] = p;
        out
    }

    /// `p t^k`, or zero when `k` exceeds the order.
    pub fn monomial(p: Poly, k: usize, order: usize) -> Self {
        let mut out = TPoly::zero(p.dim(), order);
        if k <= order {
            out.coeffs[k] = p;
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn coeff(&self, k: usize) -> &Poly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    /// Classical reduction (the `t^0` coefficient).
    pub fn sigma(&self) -> &Poly {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    fn check(&self, other: &TPoly) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        Ok(TPoly {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        Ok(TPoly {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rat) -> TPoly {
        TPoly {
            order: self.order,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Multiplication by `t`, dropping the top coefficient.
    pub fn shift(&self) -> TPoly {
        let mut coeffs = Vec::with_capacity(self.order + 1);
        coeffs.push(Poly::zero(self.dim()));
        coeffs.extend(self.coeffs[..self.order].iter().cloned());
        TPoly {
            order: self.order,
            coeffs,
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &TPoly) -> Result<TPoly> {
        self.check(other)?;
        let mut out = TPoly::zero(self.dim(), self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs[..=self.order - i].iter().enumerate() {
                out.coeffs[i + j].add_assign_ref(&(a * b));
            }
        }
        Ok(out)
    }
}

pub fn tpoly_mul(a: &TPoly, b: &TPoly) -> Result<TPoly> {
    a.mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    fn one_plus_xt(order: usize, sign: i64) -> TPoly {
        TPoly::new(1, order, vec![Poly::one(1), x().scale_int(sign)]).unwrap()
    }

    #[test]
    fn truncation_drops_square_at_order_one() {
        let p = tpoly_mul(&one_plus_xt(1, 1), &one_plus_xt(1, -1)).unwrap();
        assert_eq!(p, TPoly::from_poly(Poly::one(1), 1));
    }

    #[test]
    fn expansion_at_order_two() {
        let p = tpoly_mul(&one_plus_xt(2, 1), &one_plus_xt(2, -1)).unwrap();
        let expected = TPoly::new(1, 2, vec![Poly::one(1), Poly::zero(1), -x().pow(2)]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn top_power_times_t_vanishes() {
        let n = 3;
        let tn = TPoly::monomial(Poly::one(1), n, n);
        let t = TPoly::monomial(Poly::one(1), 1, n);
        assert!(tpoly_mul(&tn, &t).unwrap().is_zero());
        assert!(tn.shift().is_zero());
    }

    #[test]
    fn mismatched_orders_rejected() {
        let err = tpoly_mul(&one_plus_xt(1, 1), &one_plus_xt(2, 1)).unwrap_err();
        assert_eq!(err, Error::OrderMismatch { left: 1, right: 2 });
    }
}
