//! Multivariate polynomials over rationals and matrices thereof.
//!
//! Small symbolic layer used by the synthesis constructions: enough to
//! multiply symbols, take determinants of small polynomial matrices, and
//! split results back into graded pieces.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::exact::Rational;
use crate::multiindex::MultiIndex;

/// Polynomial in `n` variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Rational> {
        &self.terms
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(alpha.len(), self.n);
        let entry = self
            .terms
            .entry(alpha.clone())
            .or_insert_with(Rational::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n, other.n);
        let mut out = Poly::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        let mut out = Poly::zero(self.n);
        if s.is_zero() {
            return out;
        }
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c * s);
        }
        out
    }

    pub fn eval(&self, xi: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(a, c)| c * &a.eval_monomial(xi))
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Partial derivative `d/d xi_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (a, c) in &self.terms {
            let e = a.entries()[i];
            if e == 0 {
                continue;
            }
            let mut reduced = a.entries().to_vec();
            reduced[i] -= 1;
            out.add_term(
                MultiIndex::new(reduced),
                c * &Rational::from(num_bigint::BigInt::from(e)),
            );
        }
        out
    }

    /// Iterated derivative `d^beta`.
    pub fn derivative_multi(&self, beta: &MultiIndex) -> Poly {
        let mut p = self.clone();
        for (i, &e) in beta.entries().iter().enumerate() {
            for _ in 0..e {
                p = p.derivative(i);
            }
        }
        p
    }
}

/// Matrix with polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    n: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(n: usize, rows: usize, cols: usize) -> Self {
        Self {
            n,
            rows,
            cols,
            entries: vec![Poly::zero(n); rows * cols],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.cols + c]
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut Poly {
        &mut self.entries[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.n, other.n);
        let mut out = PolyMatrix::zeros(self.n, self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Poly::zero(self.n);
                for k in 0..self.cols {
                    acc = acc.add(&self.entry(r, k).mul(other.entry(k, c)));
                }
                *out.entry_mut(r, c) = acc;
            }
        }
        out
    }

    /// Determinant by Laplace expansion along the first row; intended for
    /// sizes up to four.
    pub fn determinant(&self) -> Poly {
        assert_eq!(self.rows, self.cols);
        match self.rows {
            0 => Poly::constant(self.n, num_traits::One::one()),
            1 => self.entry(0, 0).clone(),
            _ => {
                let mut det = Poly::zero(self.n);
                for c in 0..self.cols {
                    if self.entry(0, c).is_zero() {
                        continue;
                    }
                    let minor = self.minor(0, c).determinant();
                    let signed = if c % 2 == 0 { minor } else { minor.neg() };
                    det = det.add(&self.entry(0, c).mul(&signed));
                }
                det
            }
        }
    }

    /// Submatrix with row `r0` and column `c0` removed.
    pub fn minor(&self, r0: usize, c0: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.n, self.rows - 1, self.cols - 1);
        for r in 0..self.rows - 1 {
            for c in 0..self.cols - 1 {
                let src_r = if r < r0 { r } else { r + 1 };
                let src_c = if c < c0 { c } else { c + 1 };
                *out.entry_mut(r, c) = self.entry(src_r, src_c).clone();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat_int, Rational};

    fn x(n: usize, i: usize) -> Poly {
        let mut p = Poly::zero(n);
        p.add_term(MultiIndex::unit(n, i), rat_int(1));
        p
    }

    #[test]
    fn poly_arith() {
        let p = x(2, 0).add(&x(2, 1)); // x + y
        let q = p.mul(&p); // x^2 + 2xy + y^2
        assert_eq!(q.terms().len(), 3);
        let xi = vec![rat_int(2), rat_int(3)];
        assert_eq!(q.eval(&xi), rat_int(25));
        let dq = q.derivative(0); // 2x + 2y
        assert_eq!(dq.eval(&xi), rat_int(10));
        assert!(q.derivative_multi(&MultiIndex::new(vec![2, 1])).is_zero());
    }

    #[test]
    fn det_of_rotation_symbol() {
        // [[x, -y], [y, x]] has determinant x^2 + y^2.
        let mut m = PolyMatrix::zeros(2, 2, 2);
        *m.entry_mut(0, 0) = x(2, 0);
        *m.entry_mut(0, 1) = x(2, 1).neg();
        *m.entry_mut(1, 0) = x(2, 1);
        *m.entry_mut(1, 1) = x(2, 0);
        let det = m.determinant();
        let xi = vec![rat_int(3), rat_int(4)];
        assert_eq!(det.eval(&xi), rat_int(25));
        assert_eq!(
            PolyMatrix::zeros(2, 0, 0).determinant().eval(&xi),
            Rational::from(num_bigint::BigInt::from(1))
        );
    }

    #[test]
    fn matrix_product_matches_eval() {
        let mut a = PolyMatrix::zeros(2, 1, 2);
        *a.entry_mut(0, 0) = x(2, 1).neg();
        *a.entry_mut(0, 1) = x(2, 0);
        let mut b = PolyMatrix::zeros(2, 2, 1);
        *b.entry_mut(0, 0) = x(2, 0);
        *b.entry_mut(1, 0) = x(2, 1);
        let prod = a.mul(&b); // -yx + xy = 0
        assert!(prod.is_zero());
    }
}
