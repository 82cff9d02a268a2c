use num_traits::Zero;

use super::{ExactMatrix, Rational};

/// Linear subspace of `R^d`, stored as a basis matrix in column-reduced
/// echelon form so that equal subspaces have identical representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    /// `ambient_dim x dim` matrix with independent columns.
    basis: ExactMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ExactMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ExactMatrix::identity(ambient_dim),
        }
    }

    /// Span of the columns of `m`.
    pub fn from_columns(m: &ExactMatrix) -> Self {
        let (rref_t, pivots) = m.transpose().rref();
        // Non-zero rows of the row-reduced transpose are a reduced basis.
        let basis = ExactMatrix::from_fn(m.rows(), pivots.len(), |r, c| rref_t[(c, r)].clone());
        Self {
            ambient_dim: m.rows(),
            basis,
        }
    }

    /// Kernel of `m` as a subspace of its column space domain.
    pub fn kernel_of(m: &ExactMatrix) -> Self {
        Self::from_columns(&m.kernel_basis())
    }

    /// Range (column space) of `m`.
    pub fn range_of(m: &ExactMatrix) -> Self {
        Self::from_columns(m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &ExactMatrix {
        &self.basis
    }

    pub fn basis_columns(&self) -> Vec<Vec<Rational>> {
        (0..self.dim()).map(|c| self.basis.column(c)).collect()
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.ambient_dim, "ambient dimension mismatch");
        if v.iter().all(Zero::is_zero) {
            return true;
        }
        if self.dim() == 0 {
            return false;
        }
        let augmented = self.basis.hstack(&ExactMatrix::column_vector(v));
        augmented.rank() == self.dim()
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        other
            .basis_columns()
            .iter()
            .all(|c| self.contains_vector(c))
    }

    /// Intersection of two subspaces of the same ambient space.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.ambient_dim);
        }
        // x = B1 a = B2 b  <=>  (a, -b) in ker [B1 | B2].
        let stacked = self.basis.hstack(other.basis());
        let ker = stacked.kernel_basis();
        let mut cols = ExactMatrix::zeros(self.ambient_dim, ker.cols());
        for j in 0..ker.cols() {
            let coeff: Vec<Rational> = (0..self.dim()).map(|i| ker[(i, j)].clone()).collect();
            let v = self.basis.apply(&coeff);
            for r in 0..self.ambient_dim {
                cols[(r, j)] = v[r].clone();
            }
        }
        Subspace::from_columns(&cols)
    }

    /// Orthogonal complement with respect to the standard inner product.
    pub fn orthogonal_complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient_dim);
        }
        Subspace::kernel_of(&self.basis.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat_int;
    use super::*;

    fn span(cols: &[&[i64]]) -> Subspace {
        let m = ExactMatrix::from_i64_rows(cols).transpose();
        Subspace::from_columns(&m)
    }

    #[test]
    fn reduced_representation_is_canonical() {
        let a = span(&[&[1, 1, 0], &[0, 1, 1]]);
        let b = span(&[&[2, 2, 0], &[1, 2, 1], &[1, 0, -1]]);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn intersection_and_containment() {
        let xy = span(&[&[1, 0, 0], &[0, 1, 0]]);
        let yz = span(&[&[0, 1, 0], &[0, 0, 1]]);
        let y = xy.intersect(&yz);
        assert_eq!(y.dim(), 1);
        assert!(y.contains_vector(&[rat_int(0), rat_int(5), rat_int(0)]));
        assert!(xy.contains(&y));
        assert!(!y.contains(&xy));
        assert!(xy.intersect(&span(&[&[0, 0, 1]])).is_zero());
    }

    #[test]
    fn kernel_range_complement() {
        let m = ExactMatrix::from_i64_rows(&[&[1, 0, 1], &[0, 1, 1]]);
        let k = Subspace::kernel_of(&m);
        assert_eq!(k.dim(), 1);
        assert!(k.contains_vector(&[rat_int(1), rat_int(1), rat_int(-1)]));
        let r = Subspace::range_of(&m);
        assert_eq!(r.dim(), 2);
        let c = k.orthogonal_complement();
        assert_eq!(c.dim(), 2);
        assert!(c.intersect(&k).is_zero());
    }
}
