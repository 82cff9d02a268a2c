//! Homogeneous matrix symbols `A(xi) = sum_{|alpha| = k} xi^alpha A_alpha`
//! and their exact algebra.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exact::{ExactMatrix, Rational, Subspace};
use crate::multiindex::MultiIndex;
use crate::polymatrix::{Poly, PolyMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OperatorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("term with multi-index of order {got}, operator order is {expected}")]
    WrongTermOrder { got: u32, expected: u32 },
    #[error("trivial subspace cannot carry a restriction")]
    TrivialSubspace,
}

/// Homogeneous constant-coefficient operator of order `k` on `R^n` from `V`
/// to `E`, stored as coefficient maps `A_alpha` indexed by multi-indices of
/// order exactly `k`. Missing indices are zero matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomOperator {
    n: usize,
    k: u32,
    dim_v: usize,
    dim_e: usize,
    terms: BTreeMap<MultiIndex, ExactMatrix>,
}

impl HomOperator {
    pub fn new(
        n: usize,
        k: u32,
        dim_v: usize,
        dim_e: usize,
        terms: Vec<(MultiIndex, ExactMatrix)>,
    ) -> Result<Self, OperatorError> {
        let mut map = BTreeMap::new();
        for (alpha, m) in terms {
            if alpha.len() != n {
                return Err(OperatorError::DimensionMismatch(format!(
                    "multi-index length {} in R^{n}",
                    alpha.len()
                )));
            }
            if alpha.order() != k {
                return Err(OperatorError::WrongTermOrder {
                    got: alpha.order(),
                    expected: k,
                });
            }
            if m.rows() != dim_e || m.cols() != dim_v {
                return Err(OperatorError::DimensionMismatch(format!(
                    "coefficient map is {}x{}, expected {dim_e}x{dim_v}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_zero() {
                map.insert(alpha, m);
            }
        }
        Ok(Self {
            n,
            k,
            dim_v,
            dim_e,
            terms: map,
        })
    }

    /// The zero operator (explicitly intended empty term map).
    pub fn zero(n: usize, k: u32, dim_v: usize, dim_e: usize) -> Self {
        Self {
            n,
            k,
            dim_v,
            dim_e,
            terms: BTreeMap::new(),
        }
    }

    /// Order-zero operator with constant coefficient `m`.
    pub fn constant(n: usize, m: ExactMatrix) -> Self {
        let dim_v = m.cols();
        let dim_e = m.rows();
        Self::new(n, 0, dim_v, dim_e, vec![(MultiIndex::zero(n), m)]).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, ExactMatrix> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient map for `alpha` (zero matrix when absent).
    pub fn term(&self, alpha: &MultiIndex) -> ExactMatrix {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| ExactMatrix::zeros(self.dim_e, self.dim_v))
    }

    /// Evaluates the matrix symbol `A(xi)` exactly.
    pub fn symbol(&self, xi: &[Rational]) -> ExactMatrix {
        assert_eq!(xi.len(), self.n, "symbol argument has wrong dimension");
        let mut acc = ExactMatrix::zeros(self.dim_e, self.dim_v);
        for (alpha, m) in &self.terms {
            let mono = alpha.eval_monomial(xi);
            acc = &acc + &m.scale(&mono);
        }
        acc
    }

    /// `A(xi)^*`, the transpose of the symbol for the fixed Euclidean
    /// structures on `V` and `E`.
    pub fn adjoint_symbol(&self, xi: &[Rational]) -> ExactMatrix {
        self.symbol(xi).transpose()
    }

    /// Float evaluation of the symbol for the numeric boundary.
    pub fn symbol_f64(&self, xi: &[f64]) -> nalgebra::DMatrix<f64> {
        assert_eq!(xi.len(), self.n);
        let mut acc = nalgebra::DMatrix::<f64>::zeros(self.dim_e, self.dim_v);
        for (alpha, m) in &self.terms {
            let mono = alpha.eval_monomial_f64(xi);
            acc += m.to_nalgebra() * mono;
        }
        acc
    }

    /// Composition `(A o B)(xi) = A(xi) B(xi)` realized on coefficients:
    /// `C_gamma = sum_{alpha + beta = gamma} A_alpha B_beta`.
    pub fn compose(&self, other: &HomOperator) -> Result<HomOperator, OperatorError> {
        if self.n != other.n {
            return Err(OperatorError::DimensionMismatch(format!(
                "composition across R^{} and R^{}",
                self.n, other.n
            )));
        }
        if self.dim_v != other.dim_e {
            return Err(OperatorError::DimensionMismatch(format!(
                "inner dimensions {} and {} do not match",
                self.dim_v, other.dim_e
            )));
        }
        let mut terms: BTreeMap<MultiIndex, ExactMatrix> = BTreeMap::new();
        for (alpha, a) in &self.terms {
            for (beta, b) in &other.terms {
                let gamma = alpha.add(beta);
                let product = a * b;
                terms
                    .entry(gamma)
                    .and_modify(|t| *t = &*t + &product)
                    .or_insert(product);
            }
        }
        terms.retain(|_, m| !m.is_zero());
        Ok(HomOperator {
            n: self.n,
            k: self.k + other.k,
            dim_v: other.dim_v,
            dim_e: self.dim_e,
            terms,
        })
    }

    /// Restriction to a subspace of the base: for a rational basis
    /// `b_1, ..., b_m` of `Pi`, the restricted operator on `R^m` has symbol
    /// `A'(xi') = A(sum_j xi'_j b_j)`. The basis fixes coordinates on `Pi`;
    /// no orthonormalization is performed.
    pub fn restrict_to_subspace(&self, pi: &Subspace) -> Result<HomOperator, OperatorError> {
        if pi.is_zero() {
            return Err(OperatorError::TrivialSubspace);
        }
        if pi.ambient_dim() != self.n {
            return Err(OperatorError::DimensionMismatch(format!(
                "subspace of R^{}, operator on R^{}",
                pi.ambient_dim(),
                self.n
            )));
        }
        let m = pi.dim();
        let basis = pi.basis();
        // Linear substitutions xi_i = sum_j basis[i][j] xi'_j, as degree-one
        // polynomials in the new variables.
        let substitutions: Vec<Poly> = (0..self.n)
            .map(|i| {
                let mut p = Poly::zero(m);
                for j in 0..m {
                    p.add_term(MultiIndex::unit(m, j), basis[(i, j)].clone());
                }
                p
            })
            .collect();
        let mut terms: BTreeMap<MultiIndex, ExactMatrix> = BTreeMap::new();
        for (alpha, coeff) in &self.terms {
            // Expand (sum_j xi'_j b_j)^alpha as a polynomial in xi'.
            let mut mono = Poly::constant(m, num_traits::One::one());
            for (i, &e) in alpha.entries().iter().enumerate() {
                for _ in 0..e {
                    mono = mono.mul(&substitutions[i]);
                }
            }
            for (beta, c) in mono.terms() {
                let scaled = coeff.scale(c);
                terms
                    .entry(beta.clone())
                    .and_modify(|t| *t = &*t + &scaled)
                    .or_insert(scaled);
            }
        }
        terms.retain(|_, mat| !mat.is_zero());
        Ok(HomOperator {
            n: m,
            k: self.k,
            dim_v: self.dim_v,
            dim_e: self.dim_e,
            terms,
        })
    }

    /// The symbol as a matrix of polynomials.
    pub fn to_poly_matrix(&self) -> PolyMatrix {
        let mut pm = PolyMatrix::zeros(self.n, self.dim_e, self.dim_v);
        for (alpha, m) in &self.terms {
            for r in 0..self.dim_e {
                for c in 0..self.dim_v {
                    if !num_traits::Zero::is_zero(&m[(r, c)]) {
                        pm.entry_mut(r, c)
                            .add_term(alpha.clone(), m[(r, c)].clone());
                    }
                }
            }
        }
        pm
    }

    /// Rebuilds an operator from a polynomial matrix whose entries are
    /// homogeneous of degree `k` (asserted).
    pub fn from_poly_matrix(pm: &PolyMatrix, k: u32) -> Self {
        let mut terms: BTreeMap<MultiIndex, ExactMatrix> = BTreeMap::new();
        for r in 0..pm.rows() {
            for c in 0..pm.cols() {
                for (alpha, coeff) in pm.entry(r, c).terms() {
                    assert_eq!(alpha.order(), k, "inhomogeneous polynomial matrix");
                    terms
                        .entry(alpha.clone())
                        .or_insert_with(|| ExactMatrix::zeros(pm.rows(), pm.cols()))[(r, c)] =
                        coeff.clone();
                }
            }
        }
        terms.retain(|_, m| !m.is_zero());
        HomOperator {
            n: pm.n(),
            k,
            dim_v: pm.cols(),
            dim_e: pm.rows(),
            terms,
        }
    }
}

/// Stock operators used across tests, examples, and the catalog.
pub mod stock {
    use super::*;
    use crate::exact::rat_int;

    /// Gradient on `R^n`: scalar fields to `n` components.
    pub fn gradient(n: usize) -> HomOperator {
        let terms = (0..n)
            .map(|i| {
                let mut m = ExactMatrix::zeros(n, 1);
                m[(i, 0)] = rat_int(1);
                (MultiIndex::unit(n, i), m)
            })
            .collect();
        HomOperator::new(n, 1, 1, n, terms).unwrap()
    }

    /// Divergence on `R^n`: vector fields to scalars.
    pub fn divergence(n: usize) -> HomOperator {
        let terms = (0..n)
            .map(|i| {
                let mut m = ExactMatrix::zeros(1, n);
                m[(0, i)] = rat_int(1);
                (MultiIndex::unit(n, i), m)
            })
            .collect();
        HomOperator::new(n, 1, n, 1, terms).unwrap()
    }

    /// Scalar Laplacian on `R^n`.
    pub fn laplacian(n: usize) -> HomOperator {
        let terms = (0..n)
            .map(|i| {
                let mut alpha = vec![0u32; n];
                alpha[i] = 2;
                (MultiIndex::new(alpha), ExactMatrix::identity(1))
            })
            .collect();
        HomOperator::new(n, 2, 1, 1, terms).unwrap()
    }

    /// Scalar derivative `d/dx` on `R`.
    pub fn derivative_1d() -> HomOperator {
        HomOperator::new(
            1,
            1,
            1,
            1,
            vec![(MultiIndex::new(vec![1]), ExactMatrix::identity(1))],
        )
        .unwrap()
    }

    /// The truncated gradient `(d_1, d_2)` on `R^3`.
    pub fn d1d2_r3() -> HomOperator {
        let mut t1 = ExactMatrix::zeros(2, 1);
        t1[(0, 0)] = rat_int(1);
        let mut t2 = ExactMatrix::zeros(2, 1);
        t2[(1, 0)] = rat_int(1);
        HomOperator::new(
            3,
            1,
            1,
            2,
            vec![(MultiIndex::unit(3, 0), t1), (MultiIndex::unit(3, 1), t2)],
        )
        .unwrap()
    }

    /// Planar curl row `(-d_2, d_1)` from `R^2`-valued fields to scalars.
    pub fn curl_2d() -> HomOperator {
        let mut t1 = ExactMatrix::zeros(1, 2);
        t1[(0, 1)] = rat_int(1);
        let mut t2 = ExactMatrix::zeros(1, 2);
        t2[(0, 0)] = rat_int(-1);
        HomOperator::new(
            2,
            1,
            2,
            1,
            vec![(MultiIndex::unit(2, 0), t1), (MultiIndex::unit(2, 1), t2)],
        )
        .unwrap()
    }
}
