//! Multi-indices `alpha` in `N^n` for mixed partial derivatives and
//! monomials `xi^alpha`.

use num_traits::One;

use crate::exact::Rational;

/// Multi-index: exponents of a monomial / orders of a mixed partial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Multi-index `e_i` of a single first-order derivative.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha!` as `u64`; callers keep `|alpha| <= 16` so this cannot overflow.
    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&e| (1..=u64::from(e)).product::<u64>())
            .product()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<u32>>>()
            .map(Self)
    }

    /// Exact monomial `xi^alpha` over rationals.
    pub fn eval_monomial(&self, xi: &[Rational]) -> Rational {
        assert_eq!(xi.len(), self.len(), "monomial dimension mismatch");
        let mut acc = Rational::one();
        for (x, &e) in xi.iter().zip(&self.0) {
            for _ in 0..e {
                acc *= x.clone();
            }
        }
        acc
    }

    pub fn eval_monomial_f64(&self, xi: &[f64]) -> f64 {
        assert_eq!(xi.len(), self.len(), "monomial dimension mismatch");
        self.0
            .iter()
            .zip(xi)
            .map(|(&e, x)| x.powi(e as i32))
            .product()
    }

    /// All multi-indices of length `n` with `|alpha| = order`, in
    /// lexicographic order.
    pub fn all_of_order(n: usize, order: u32) -> Vec<Self> {
        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        fn rec(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
            if pos + 1 == current.len() {
                current[pos] = remaining;
                out.push(MultiIndex(current.clone()));
                return;
            }
            for e in (0..=remaining).rev() {
                current[pos] = e;
                rec(current, pos + 1, remaining - e, out);
            }
        }
        if n == 0 {
            if order == 0 {
                out.push(Self(Vec::new()));
            }
            return out;
        }
        rec(&mut current, 0, order, &mut out);
        out.sort();
        out
    }
}

impl num_traits::Zero for MultiIndex {
    fn zero() -> Self {
        Self(Vec::new())
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl std::ops::Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, other: Self) -> Self {
        MultiIndex::add(&self, &other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn order_and_factorial() {
        let a = MultiIndex::new(vec![3, 0, 2]);
        assert_eq!(a.order(), 5);
        assert_eq!(a.factorial(), 12);
        assert_eq!(MultiIndex::zero(4).factorial(), 1);
    }

    #[test]
    fn monomial_eval() {
        let a = MultiIndex::new(vec![2, 1]);
        let xi = vec![rat(1, 2), rat(3, 1)];
        assert_eq!(a.eval_monomial(&xi), rat(3, 4));
        assert!((a.eval_monomial_f64(&[0.5, 3.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn enumeration_counts() {
        // |{alpha in N^n : |alpha| = m}| = C(m + n - 1, n - 1)
        assert_eq!(MultiIndex::all_of_order(2, 3).len(), 4);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_of_order(1, 5).len(), 1);
        let all = MultiIndex::all_of_order(3, 2);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sub_and_add() {
        let a = MultiIndex::new(vec![2, 1]);
        let b = MultiIndex::new(vec![1, 1]);
        assert_eq!(a.checked_sub(&b), Some(MultiIndex::new(vec![1, 0])));
        assert_eq!(b.checked_sub(&a), None);
        assert_eq!(a.add(&b), MultiIndex::new(vec![3, 2]));
    }
}
