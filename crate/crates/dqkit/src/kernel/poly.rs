use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use super::Rat;
use crate::error::{Error, Result};

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponents(pub Vec<u32>);

impl Exponents {
    pub fn zero(dim: usize) -> Self {
        Exponents(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Exponents(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponents) -> Exponents {
        Exponents(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` if some component would go negative.
    pub fn checked_sub(&self, other: &Exponents) -> Option<Exponents> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponents)
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over the rationals in `dim` variables.
///
/// Terms are kept in a map keyed by exponent vector; zero coefficients are
/// never stored, so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<Exponents, Rat>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rat::one())
    }

    pub fn constant(dim: usize, c: Rat) -> Self {
        Self::monomial(dim, Exponents::zero(dim), c)
    }

    pub fn from_int(dim: usize, c: i64) -> Self {
        Self::constant(dim, Rat::from_integer(c.into()))
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(dim, Exponents::unit(dim, i), Rat::one())
    }

    pub fn monomial(dim: usize, exps: Exponents, c: Rat) -> Self {
        assert_eq!(exps.0.len(), dim, "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly { dim, terms }
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponents, Rat)>,
    {
        let mut p = Poly::zero(dim);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponents) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Exponents::degree)
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                (e.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn add_term(&mut self, e: Exponents, c: Rat) {
        debug_assert_eq!(e.0.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &Poly) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Poly) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (e, c) in &other.terms {
            self.add_term(e.clone(), -c.clone());
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Poly {
        self.scale(&Rat::from_integer(c.into()))
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in the 0-based coordinate `i`.
    pub fn partial(&self, i: usize) -> Result<Poly> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i + 1,
                bound: self.dim,
            });
        }
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k > 0 {
                let mut f = e.clone();
                f.0[i] -= 1;
                out.add_term(f, c * Rat::from_integer(k.into()));
            }
        }
        Ok(out)
    }

    /// Partial derivative, panicking on a bad index. For internal use where
    /// indices come from the object's own dimension.
    pub fn d(&self, i: usize) -> Poly {
        self.partial(i).expect("coordinate index in range")
    }

    /// Mixed partial `∂^alpha` for a multi-index of length `dim`.
    pub fn derivative(&self, alpha: &Exponents) -> Poly {
        assert_eq!(alpha.0.len(), self.dim, "multi-index length");
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            if let Some(rest) = e.checked_sub(alpha) {
                let mut factor = c.clone();
                for (&k, &a) in e.0.iter().zip(&alpha.0) {
                    for j in 0..a {
                        factor *= Rat::from_integer((k - j).into());
                    }
                }
                out.add_term(rest, factor);
            }
        }
        out
    }

    /// Renders the polynomial with the given variable names, highest
    /// graded-lex term first.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || e.degree() == 0 {
                factors.push(abs.to_string());
            }
            for (i, &p) in e.0.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], p)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

/// Default variable names: `x, y, z` for up to three coordinates, otherwise
/// `x1 .. xn`.
pub fn variable_names(dim: usize) -> Vec<String> {
    if dim <= 3 {
        ["x", "y", "z"][..dim]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        (1..=dim).map(|i| format!("x{i}")).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&variable_names(self.dim)))
    }
}

/// Exact product; fails on dimension mismatch.
pub fn poly_mul(a: &Poly, b: &Poly) -> Result<Poly> {
    a.checked_mul(b)
}

/// Formal partial derivative in the 1-based coordinate `i`.
pub fn poly_partial(a: &Poly, i: usize) -> Result<Poly> {
    if i == 0 || i > a.dim {
        return Err(Error::IndexOutOfRange {
            index: i,
            bound: a.dim,
        });
    }
    a.partial(i - 1)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
