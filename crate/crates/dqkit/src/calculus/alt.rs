use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::kernel::{variable_names, Poly, Rat};

/// Marker for what the index slots of an [`Alt`] refer to.
pub trait AltKind: Clone + Debug + PartialEq + Eq + Hash + Default {
    const NAME: &'static str;
    /// Symbol used by [`Alt::render`] for index `i` (0-based).
    fn symbol(i: usize, names: &[String]) -> String;
}

/// Coordinate vector fields `∂_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Vectors;

/// Coordinate differentials `dx_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Covectors;

/// Dual frame `e^a` of a Lie algebroid presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Frame;

impl AltKind for Vectors {
    const NAME: &'static str = "multivec";
    fn symbol(i: usize, names: &[String]) -> String {
        format!("d/d{}", names[i])
    }
}

impl AltKind for Covectors {
    const NAME: &'static str = "form";
    fn symbol(i: usize, names: &[String]) -> String {
        format!("d{}", names[i])
    }
}

impl AltKind for Frame {
    const NAME: &'static str = "algebroid form";
    fn symbol(i: usize, _names: &[String]) -> String {
        format!("e{}", i + 1)
    }
}

/// Polynomial-coefficient alternating tensor of fixed degree.
///
/// Keys are strictly increasing index tuples in `0..rank`; coefficients are
/// polynomials in `dim` variables. For multivectors and forms `rank == dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alt<K: AltKind> {
    dim: usize,
    rank: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
    kind: PhantomData<K>,
}

pub type MultiVec = Alt<Vectors>;
pub type Form = Alt<Covectors>;
pub type AlgebroidForm = Alt<Frame>;

/// Sign of the permutation sorting `idx`, or `None` if an index repeats.
pub fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// All strictly increasing `p`-tuples drawn from `0..n`.
pub fn increasing_tuples(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if p <= n {
        rec(0, n, p, &mut Vec::new(), &mut out);
    }
    out
}

/// Determinant by cofactor expansion; matrices here are at most a few rows.
pub fn det(m: &[Vec<Poly>], dim: usize) -> Poly {
    match m.len() {
        0 => Poly::one(dim),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Poly::zero(dim);
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][col] * &det(&minor, dim);
                if col % 2 == 0 {
                    acc.add_assign_ref(&term);
                } else {
                    acc.sub_assign_ref(&term);
                }
            }
            acc
        }
    }
}

impl<K: AltKind> Alt<K> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self::zero_ranked(dim, dim, degree)
    }

    pub fn zero_ranked(dim: usize, rank: usize, degree: usize) -> Self {
        Alt {
            dim,
            rank,
            degree,
            terms: BTreeMap::new(),
            kind: PhantomData,
        }
    }

    /// Degree-0 element carrying a single function.
    pub fn scalar(f: Poly) -> Self {
        Self::scalar_ranked(f.dim(), f)
    }

    pub fn scalar_ranked(rank: usize, f: Poly) -> Self {
        let mut out = Self::zero_ranked(f.dim(), rank, 0);
        out.add_term(Vec::new(), f);
        out
    }

    /// `coeff · b_{i1} ∧ ... ∧ b_{ip}` for arbitrary (unsorted) indices.
    pub fn basis(dim: usize, idx: &[usize], coeff: Poly) -> Self {
        let mut out = Self::zero(dim, idx.len());
        out.add_term(idx.to_vec(), coeff);
        out
    }

    pub fn basis_ranked(dim: usize, rank: usize, idx: &[usize], coeff: Poly) -> Self {
        let mut out = Self::zero_ranked(dim, rank, idx.len());
        out.add_term(idx.to_vec(), coeff);
        out
    }

    /// Builds the element whose coefficient on each increasing tuple is given
    /// by `value`.
    pub fn from_fn(
        dim: usize,
        rank: usize,
        degree: usize,
        mut value: impl FnMut(&[usize]) -> Poly,
    ) -> Self {
        let mut out = Self::zero_ranked(dim, rank, degree);
        for idx in increasing_tuples(rank, degree) {
            let v = value(&idx);
            out.add_term(idx, v);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
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

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.terms.iter()
    }

    /// Coefficient on an arbitrary index tuple, with the antisymmetry sign.
    pub fn coeff(&self, idx: &[usize]) -> Poly {
        let mut sorted = idx.to_vec();
        match sort_sign(&mut sorted) {
            None => Poly::zero(self.dim),
            Some(s) => self
                .terms
                .get(&sorted)
                .map(|p| p.scale_int(s))
                .unwrap_or_else(|| Poly::zero(self.dim)),
        }
    }

    /// The function stored in a degree-0 element.
    pub fn as_scalar(&self) -> Poly {
        self.coeff(&[])
    }

    /// Adds `coeff` on `idx`, normalizing order and sign.
    pub fn add_term(&mut self, mut idx: Vec<usize>, coeff: Poly) {
        assert_eq!(idx.len(), self.degree, "index tuple length");
        assert!(idx.iter().all(|&i| i < self.rank), "index out of range");
        assert_eq!(coeff.dim(), self.dim, "coefficient dimension");
        let Some(sign) = sort_sign(&mut idx) else {
            return;
        };
        if coeff.is_zero() {
            return;
        }
        let coeff = if sign < 0 { -coeff } else { coeff };
        let entry = self
            .terms
            .entry(idx)
            .or_insert_with(|| Poly::zero(self.dim));
        entry.add_assign_ref(&coeff);
        if entry.is_zero() {
            self.terms.retain(|_, p| !p.is_zero());
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    fn check_same_degree(&self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_degree(other)?;
        let mut out = self.clone();
        for (idx, p) in &other.terms {
            out.add_term(idx.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    /// Sum of two elements known to be compatible.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("compatible alternating tensors")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("compatible alternating tensors")
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|p| -p)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        self.map_coeffs(|p| p.scale(c))
    }

    /// Multiplication by a function.
    pub fn mul_fn(&self, f: &Poly) -> Self {
        self.map_coeffs(|p| p * f)
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Poly) -> Poly) -> Self {
        let mut out = Self::zero_ranked(self.dim, self.rank, self.degree);
        for (idx, p) in &self.terms {
            out.add_term(idx.clone(), f(p));
        }
        out
    }

    /// The same components read as a tensor of another kind, e.g. a form on
    /// a frame of rank `r` as an algebroid form.
    pub fn retag<L: AltKind>(&self) -> Alt<L> {
        Alt {
            dim: self.dim,
            rank: self.rank,
            degree: self.degree,
            terms: self.terms.clone(),
            kind: PhantomData,
        }
    }

    /// Graded-commutative product; zero when the degree sum exceeds the rank.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        let mut out = Self::zero_ranked(self.dim, self.rank, degree);
        if degree > self.rank {
            return Ok(out);
        }
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                out.add_term(idx, a * b);
            }
        }
        Ok(out)
    }

    /// Human-readable rendering, e.g. `x*dx^dy`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = variable_names(self.dim);
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, p)| {
                let basis: Vec<String> = idx.iter().map(|&i| K::symbol(i, &names)).collect();
                if idx.is_empty() {
                    format!("({p})")
                } else {
                    format!("({p})*{}", basis.join("^"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Graded wedge product, free-function form.
pub fn wedge<K: AltKind>(a: &Alt<K>, b: &Alt<K>) -> Result<Alt<K>> {
    a.wedge(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(i: usize) -> Form {
        Form::basis(2, &[i], Poly::one(2))
    }

    #[test]
    fn wedge_of_coordinate_differentials() {
        let w = wedge(&dx(0), &dx(1)).unwrap();
        assert_eq!(w, Form::basis(2, &[0, 1], Poly::one(2)));
        assert!(wedge(&dx(0), &dx(0)).unwrap().is_zero());
    }

    #[test]
    fn transposition_sign() {
        let x = Poly::var(2, 0);
        let xdy = Form::basis(2, &[1], x.clone());
        let w = wedge(&xdy, &dx(0)).unwrap();
        assert_eq!(w, Form::basis(2, &[0, 1], -x));
    }

    #[test]
    fn wedge_dimension_mismatch() {
        let a = Form::basis(3, &[0], Poly::one(3));
        assert!(matches!(
            wedge(&dx(0), &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degree_overflow_is_zero() {
        let top = Form::basis(2, &[0, 1], Poly::one(2));
        let w = wedge(&top, &dx(0)).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.degree(), 3);
    }

    #[test]
    fn sort_sign_counts_inversions() {
        assert_eq!(sort_sign(&mut [2, 0, 1]), Some(1));
        assert_eq!(sort_sign(&mut [1, 0]), Some(-1));
        assert_eq!(sort_sign(&mut [1, 1]), None);
    }

    #[test]
    fn tuples_enumerated_in_order() {
        assert_eq!(
            increasing_tuples(3, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(increasing_tuples(2, 0), vec![Vec::<usize>::new()]);
        assert!(increasing_tuples(2, 3).is_empty());
    }
}
