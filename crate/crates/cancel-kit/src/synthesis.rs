//! Exact construction of the auxiliary operators attached to a homogeneous
//! symbol: a potential `B(D)` with `A(D) o B(D) = 0`, a cocanceling
//! annihilator `L(D)` with `L(D) o A(D) = 0`, recovery maps `K_alpha` with
//! `sum_alpha K_alpha o L_alpha = id_E`, and the correction polynomial
//! `P(x) = sum_alpha x^alpha / alpha! K_alpha^*`.
//!
//! Every identity produced here is verified in rational arithmetic before
//! the value is returned; a failed verification is a bug, not a tolerance.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::checks::{is_cocanceling, CheckConfig, Sampler};
use crate::exact::{ExactMatrix, Rational};
use crate::multiindex::MultiIndex;
use crate::operator::HomOperator;
use crate::polymatrix::{Poly, PolyMatrix};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("generic rank {rank} exceeds the supported determinant size {cap}")]
    RankTooLarge { rank: usize, cap: usize },
    #[error("exact verification failed: {0}")]
    Verification(&'static str),
    #[error("stacked coefficient map is not injective; operator is not cocanceling")]
    StackedMapNotInjective,
    #[error(transparent)]
    Operator(#[from] crate::operator::OperatorError),
}

/// Largest determinant size expanded by [`build_potential`]. The expansion
/// is exponential in this size, which is ample at desk scale.
pub const POTENTIAL_RANK_CAP: usize = 4;

/// Potential operator together with its construction data.
#[derive(Clone, Debug)]
pub struct Potential {
    /// `B(D)` from `V` to `V` with `A(D) o B(D) = 0`.
    pub operator: HomOperator,
    /// Generic point used by the construction.
    pub xi_star: Vec<Rational>,
    /// Generic (maximal) rank of the symbol.
    pub generic_rank: usize,
    /// `min_xi dim ker A(xi) = dim V - generic rank`.
    pub kernel_dim: usize,
}

/// Cocanceling annihilator together with its order and target dimension.
#[derive(Clone, Debug)]
pub struct Annihilator {
    /// `L(D)` from `E` to `F = R^{dim_f}` with `L(D) o A(D) = 0`.
    pub operator: HomOperator,
    pub order: u32,
    pub dim_f: usize,
}

/// Maps `K_alpha in L(F; E)` satisfying `sum_alpha K_alpha o L_alpha = id_E`.
#[derive(Clone, Debug)]
pub struct RecoveryMaps {
    pub order: u32,
    pub maps: BTreeMap<MultiIndex, ExactMatrix>,
}

/// Homogeneous matrix polynomial `P(x) = sum_alpha x^alpha / alpha! C_alpha`
/// with `C_alpha = K_alpha^* in L(E; F)`.
#[derive(Clone, Debug)]
pub struct CorrectionPolynomial {
    pub degree: u32,
    pub coeffs: BTreeMap<MultiIndex, ExactMatrix>,
}

/// Upper bound for the annihilator order search: `2 k dim V`.
pub fn annihilator_order_bound(a: &HomOperator) -> u32 {
    2 * a.order() * a.dim_v() as u32
}

fn generic_point(a: &HomOperator, sampler: &mut Sampler) -> (Vec<Rational>, usize) {
    let mut best_rank = 0;
    let mut best: Option<Vec<Rational>> = None;
    for _ in 0..10 {
        let xi = sampler.vector(a.n());
        let rank = a.symbol(&xi).rank();
        if rank >= best_rank {
            best_rank = rank;
            best = Some(xi);
        }
    }
    (best.expect("sampled"), best_rank)
}

/// Builds a potential: a homogeneous `B(D)` from `V` to `V` with
/// `A(D) o B(D) = 0` and `max_xi dim B(xi)[V] = min_xi dim ker A(xi)`.
///
/// At a generic point `xi*` choose `e_1, ..., e_r` in `E` whose images
/// `A(xi*)^*[e_i]` span `W = A(xi*)^*[E]`, let `M` give coordinates of the
/// projection onto `W`, and expand the alternating-determinant formula
///
/// ```text
/// B(xi)^*[v] = det(C(xi)) v
///            + sum_i (-1)^i det(M v, C_1(xi), ..., ^C_i(xi), ..., C_r(xi))
///                    A(xi)^*[e_i]
/// ```
///
/// with `C(xi) = M A(xi)^*[e_1..e_r]`. An elliptic symbol has `s = 0` and
/// the zero operator is returned directly.
pub fn build_potential(a: &HomOperator) -> Result<Potential, SynthesisError> {
    let dim_v = a.dim_v();
    let mut sampler = Sampler::new(23, 1000);
    for _attempt in 0..4 {
        let (xi_star, generic_rank) = generic_point(a, &mut sampler);
        let kernel_dim = dim_v - generic_rank;
        if kernel_dim == 0 {
            return Ok(Potential {
                operator: HomOperator::zero(a.n(), 0, dim_v, dim_v),
                xi_star,
                generic_rank,
                kernel_dim,
            });
        }
        if generic_rank > POTENTIAL_RANK_CAP {
            return Err(SynthesisError::RankTooLarge {
                rank: generic_rank,
                cap: POTENTIAL_RANK_CAP,
            });
        }
        let candidate = assemble_potential(a, &xi_star, generic_rank)?;
        // The construction is only valid if xi* realized the true maximal
        // rank; the exact composition check certifies that.
        let composed = a.compose(&candidate)?;
        if composed.is_zero() && candidate.symbol(&xi_star).rank() == kernel_dim {
            return Ok(Potential {
                operator: candidate,
                xi_star,
                generic_rank,
                kernel_dim,
            });
        }
    }
    Err(SynthesisError::Verification(
        "potential construction did not stabilize on a generic point",
    ))
}

fn assemble_potential(
    a: &HomOperator,
    xi_star: &[Rational],
    rank: usize,
) -> Result<HomOperator, SynthesisError> {
    let dim_v = a.dim_v();
    let dim_e = a.dim_e();
    let adjoint_star = a.adjoint_symbol(xi_star); // dimV x dimE

    // Greedy selection of e_1, ..., e_r with independent images.
    let mut selected: Vec<usize> = Vec::new();
    let mut picked = ExactMatrix::zeros(dim_v, 0);
    for e in 0..dim_e {
        if selected.len() == rank {
            break;
        }
        let col = ExactMatrix::column_vector(&adjoint_star.column(e));
        let trial = picked.hstack(&col);
        if trial.rank() == selected.len() + 1 {
            picked = trial;
            selected.push(e);
        }
    }
    if selected.len() != rank {
        return Err(SynthesisError::Verification(
            "could not select independent adjoint images",
        ));
    }
    let w = picked; // dimV x r basis of A(xi*)^*[E]

    // Coordinates of the orthogonal projection onto W in that basis.
    let gram = &w.transpose() * &w;
    let gram_inv = gram
        .inverse()
        .ok_or(SynthesisError::Verification("Gram matrix is singular"))?;
    let coords = &gram_inv * &w.transpose(); // r x dimV

    // Polynomial columns A(xi)^*[e_i] and their W-coordinates.
    let adjoint_poly = transpose_poly(&a.to_poly_matrix());
    let mut selected_cols = PolyMatrix::zeros(a.n(), dim_v, rank);
    for (j, &e) in selected.iter().enumerate() {
        for r in 0..dim_v {
            *selected_cols.entry_mut(r, j) = adjoint_poly.entry(r, e).clone();
        }
    }
    let c = mul_const_poly(&coords, &selected_cols); // r x r polynomial matrix

    // First term: det(C) id_V.
    let det_c = c.determinant();
    let mut b_star = PolyMatrix::zeros(a.n(), dim_v, dim_v);
    for d in 0..dim_v {
        *b_star.entry_mut(d, d) = det_c.clone();
    }

    // Second term: expand det(Mv, C_1, ..., ^C_i, ..., C_r) along its first
    // column. The (t, i) cofactor multiplies the rank-one map
    // A(xi)^*[e_i] (x) (row t of M).
    for i in 1..=rank {
        let without_col = remove_column(&c, i - 1);
        for t in 1..=rank {
            let minor = remove_row(&without_col, t - 1).determinant();
            if minor.is_zero() {
                continue;
            }
            let sign_pos = (i + t + 1) % 2 == 0; // (-1)^i (-1)^{t+1}
            let signed = if sign_pos { minor } else { minor.neg() };
            for row in 0..dim_v {
                let col_poly = selected_cols.entry(row, i - 1).clone();
                if col_poly.is_zero() {
                    continue;
                }
                for col in 0..dim_v {
                    let m_entry = &coords[(t - 1, col)];
                    if m_entry.is_zero() {
                        continue;
                    }
                    let contribution = col_poly.mul(&signed).scale(m_entry);
                    let updated = b_star.entry(row, col).add(&contribution);
                    *b_star.entry_mut(row, col) = updated;
                }
            }
        }
    }

    let b_poly = transpose_poly(&b_star);
    let order = a.order() * rank as u32;
    Ok(HomOperator::from_poly_matrix(&b_poly, order))
}

fn transpose_poly(m: &PolyMatrix) -> PolyMatrix {
    let mut out = PolyMatrix::zeros(m.n(), m.cols(), m.rows());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            *out.entry_mut(c, r) = m.entry(r, c).clone();
        }
    }
    out
}

fn mul_const_poly(consts: &ExactMatrix, poly: &PolyMatrix) -> PolyMatrix {
    assert_eq!(consts.cols(), poly.rows());
    let mut out = PolyMatrix::zeros(poly.n(), consts.rows(), poly.cols());
    for r in 0..consts.rows() {
        for c in 0..poly.cols() {
            let mut acc = Poly::zero(poly.n());
            for k in 0..consts.cols() {
                if consts[(r, k)].is_zero() {
                    continue;
                }
                acc = acc.add(&poly.entry(k, c).scale(&consts[(r, k)]));
            }
            *out.entry_mut(r, c) = acc;
        }
    }
    out
}

fn remove_column(m: &PolyMatrix, col: usize) -> PolyMatrix {
    let mut out = PolyMatrix::zeros(m.n(), m.rows(), m.cols() - 1);
    for r in 0..m.rows() {
        let mut dst = 0;
        for c in 0..m.cols() {
            if c == col {
                continue;
            }
            *out.entry_mut(r, dst) = m.entry(r, c).clone();
            dst += 1;
        }
    }
    out
}

fn remove_row(m: &PolyMatrix, row: usize) -> PolyMatrix {
    let mut out = PolyMatrix::zeros(m.n(), m.rows() - 1, m.cols());
    let mut dst = 0;
    for r in 0..m.rows() {
        if r == row {
            continue;
        }
        for c in 0..m.cols() {
            *out.entry_mut(dst, c) = m.entry(r, c).clone();
        }
        dst += 1;
    }
    out
}

/// Searches orders `m = 1, ..., 2 k dim V` for the graded syzygies
/// `sum_{beta + alpha = gamma} l_beta A_alpha = 0`, stacks a basis of row
/// solutions into `L(D)`, and returns the first order whose stacked operator
/// is cocanceling. `None` when the bound is exhausted.
pub fn build_annihilator(
    a: &HomOperator,
    cfg: &CheckConfig,
) -> Result<Option<Annihilator>, SynthesisError> {
    let bound = annihilator_order_bound(a);
    for m in 1..=bound {
        let Some(l) = annihilator_rows(a, m) else {
            continue;
        };
        let composed = l.compose(a)?;
        if !composed.is_zero() {
            return Err(SynthesisError::Verification(
                "annihilator rows do not annihilate",
            ));
        }
        if is_cocanceling(&l, cfg).holds_verdict() {
            let dim_f = l.dim_e();
            return Ok(Some(Annihilator {
                operator: l,
                order: m,
                dim_f,
            }));
        }
    }
    Ok(None)
}

/// Solves the graded linear system for order-`m` annihilator rows; `None`
/// when only the zero row exists.
fn annihilator_rows(a: &HomOperator, m: u32) -> Option<HomOperator> {
    let n = a.n();
    let dim_v = a.dim_v();
    let dim_e = a.dim_e();
    let betas = MultiIndex::all_of_order(n, m);
    let gammas = MultiIndex::all_of_order(n, m + a.order());
    let unknowns = betas.len() * dim_e;
    let equations = gammas.len() * dim_v;

    let mut system = ExactMatrix::zeros(equations, unknowns);
    for (gi, gamma) in gammas.iter().enumerate() {
        for (bi, beta) in betas.iter().enumerate() {
            let Some(alpha) = gamma.checked_sub(beta) else {
                continue;
            };
            if alpha.order() != a.order() {
                continue;
            }
            let coeff = a.term(&alpha);
            if coeff.is_zero() {
                continue;
            }
            // Row equation: sum_e l[beta, e] * A_alpha[e, v] = 0 for each v.
            for v in 0..dim_v {
                for e in 0..dim_e {
                    let row = gi * dim_v + v;
                    let col = bi * dim_e + e;
                    system[(row, col)] = &system[(row, col)] + &coeff[(e, v)];
                }
            }
        }
    }

    let kernel = system.kernel_basis();
    let dim_f = kernel.cols();
    if dim_f == 0 {
        return None;
    }
    let mut terms: Vec<(MultiIndex, ExactMatrix)> = Vec::new();
    for (bi, beta) in betas.iter().enumerate() {
        let block =
            ExactMatrix::from_fn(dim_f, dim_e, |row, e| kernel[(bi * dim_e + e, row)].clone());
        if !block.is_zero() {
            terms.push((beta.clone(), block));
        }
    }
    Some(HomOperator::new(n, m, dim_e, dim_f, terms).expect("annihilator terms are consistent"))
}

/// Left-inverts the stacked coefficient map of a cocanceling operator:
/// returns `K_alpha` with `sum_alpha K_alpha o L_alpha = id_E` exactly.
pub fn build_recovery(l: &HomOperator) -> Result<RecoveryMaps, SynthesisError> {
    let dim_e = l.dim_v();
    let alphas: Vec<MultiIndex> = l.terms().keys().cloned().collect();
    if alphas.is_empty() {
        return Err(SynthesisError::StackedMapNotInjective);
    }
    let stacked = alphas
        .iter()
        .map(|alpha| l.term(alpha))
        .reduce(|acc, b| acc.vstack(&b))
        .expect("at least one term");
    if stacked.rank() < dim_e {
        return Err(SynthesisError::StackedMapNotInjective);
    }
    let gram = &stacked.transpose() * &stacked;
    let inv = gram
        .inverse()
        .ok_or(SynthesisError::StackedMapNotInjective)?;
    let left_inverse = &inv * &stacked.transpose(); // dimE x (T dimF)

    let dim_f = l.dim_e();
    let mut maps = BTreeMap::new();
    for (i, alpha) in alphas.iter().enumerate() {
        let block = ExactMatrix::from_fn(dim_e, dim_f, |r, c| {
            left_inverse[(r, i * dim_f + c)].clone()
        });
        maps.insert(alpha.clone(), block);
    }

    // sum K_alpha L_alpha = id_E, exactly.
    let mut acc = ExactMatrix::zeros(dim_e, dim_e);
    for (alpha, k) in &maps {
        acc = &acc + &(k * &l.term(alpha));
    }
    if acc != ExactMatrix::identity(dim_e) {
        return Err(SynthesisError::Verification("recovery identity failed"));
    }
    Ok(RecoveryMaps {
        order: l.order(),
        maps,
    })
}

/// Builds `P(x) = sum_alpha x^alpha / alpha! K_alpha^*` and verifies the
/// reproduction identity `L(D)^*(P) = sum_beta L_beta^* d^beta P = id_E` by
/// exact symbolic differentiation.
pub fn build_correction(
    recovery: &RecoveryMaps,
    l: &HomOperator,
) -> Result<CorrectionPolynomial, SynthesisError> {
    let dim_e = l.dim_v();
    let dim_f = l.dim_e();
    let n = l.n();
    let mut coeffs = BTreeMap::new();
    for (alpha, k) in &recovery.maps {
        coeffs.insert(alpha.clone(), k.transpose());
    }

    // P as a polynomial matrix with the 1/alpha! weights in place.
    let mut p = PolyMatrix::zeros(n, dim_f, dim_e);
    for (alpha, c) in &coeffs {
        let weight = Rational::new(One::one(), alpha.factorial().into());
        for r in 0..dim_f {
            for col in 0..dim_e {
                if c[(r, col)].is_zero() {
                    continue;
                }
                p.entry_mut(r, col)
                    .add_term(alpha.clone(), &c[(r, col)] * &weight);
            }
        }
    }

    // sum_beta L_beta^* [d^beta P], which must be the constant identity.
    let mut acc = PolyMatrix::zeros(n, dim_e, dim_e);
    for (beta, l_beta) in l.terms() {
        let mut derived = PolyMatrix::zeros(n, dim_f, dim_e);
        for r in 0..dim_f {
            for c in 0..dim_e {
                *derived.entry_mut(r, c) = p.entry(r, c).derivative_multi(beta);
            }
        }
        let contribution = mul_const_poly(&l_beta.transpose(), &derived);
        for r in 0..dim_e {
            for c in 0..dim_e {
                let sum = acc.entry(r, c).add(contribution.entry(r, c));
                *acc.entry_mut(r, c) = sum;
            }
        }
    }
    for r in 0..dim_e {
        for c in 0..dim_e {
            let expected = if r == c {
                Poly::constant(n, One::one())
            } else {
                Poly::zero(n)
            };
            if acc.entry(r, c) != &expected {
                return Err(SynthesisError::Verification(
                    "correction polynomial identity failed",
                ));
            }
        }
    }
    Ok(CorrectionPolynomial {
        degree: recovery.order,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::is_cocanceling;
    use crate::exact::rat_int;
    use crate::operator::stock;

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn potential_of_divergence() {
        let div = stock::divergence(2);
        let pot = build_potential(&div).unwrap();
        assert_eq!(pot.generic_rank, 1);
        assert_eq!(pot.kernel_dim, 1);
        assert_eq!(pot.operator.order(), 1);
        assert!(div.compose(&pot.operator).unwrap().is_zero());
        // Range at the construction point is the orthogonal line.
        let b_star = pot.operator.symbol(&pot.xi_star);
        assert_eq!(b_star.rank(), 1);
        let a_star = div.symbol(&pot.xi_star);
        assert!((&a_star * &b_star).is_zero());
    }

    #[test]
    fn potential_of_elliptic_operator_is_zero() {
        let pot = build_potential(&stock::gradient(2)).unwrap();
        assert!(pot.operator.is_zero());
        assert_eq!(pot.kernel_dim, 0);
    }

    #[test]
    fn potential_of_zero_operator_is_identity() {
        let zero = HomOperator::zero(1, 1, 1, 1);
        let pot = build_potential(&zero).unwrap();
        assert_eq!(pot.generic_rank, 0);
        assert_eq!(pot.kernel_dim, 1);
        assert_eq!(pot.operator.order(), 0);
        let s = pot.operator.symbol(&[rat_int(5)]);
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn potential_of_block_operator() {
        let a = crate::catalog::r4_block_operator();
        let pot = build_potential(&a).unwrap();
        assert_eq!(pot.generic_rank, 2);
        assert_eq!(pot.kernel_dim, 0);
        assert!(pot.operator.is_zero());
    }

    #[test]
    fn annihilator_of_gradient_is_curl() {
        let grad = stock::gradient(2);
        let ann = build_annihilator(&grad, &cfg()).unwrap().unwrap();
        assert_eq!(ann.order, 1);
        assert_eq!(ann.dim_f, 1);
        assert!(ann.operator.compose(&grad).unwrap().is_zero());
        assert!(is_cocanceling(&ann.operator, &cfg()).holds_verdict());
    }

    #[test]
    fn laplacian_has_no_annihilator_within_bound() {
        let lap = stock::laplacian(2);
        assert_eq!(annihilator_order_bound(&lap), 4);
        assert!(build_annihilator(&lap, &cfg()).unwrap().is_none());
    }

    #[test]
    fn annihilator_of_truncated_gradient() {
        let a = stock::d1d2_r3();
        let ann = build_annihilator(&a, &cfg()).unwrap().unwrap();
        assert_eq!(ann.order, 1);
        assert!(ann.operator.compose(&a).unwrap().is_zero());
        assert!(is_cocanceling(&ann.operator, &cfg()).holds_verdict());
    }

    #[test]
    fn recovery_for_curl_matches_hand_computation() {
        let curl = stock::curl_2d();
        let rec = build_recovery(&curl).unwrap();
        let k10 = &rec.maps[&MultiIndex::new(vec![1, 0])];
        let k01 = &rec.maps[&MultiIndex::new(vec![0, 1])];
        assert_eq!(k10.column(0), vec![rat_int(0), rat_int(1)]);
        assert_eq!(k01.column(0), vec![rat_int(-1), rat_int(0)]);
    }

    #[test]
    fn recovery_single_identity_term() {
        let l = HomOperator::new(
            2,
            1,
            2,
            2,
            vec![(MultiIndex::unit(2, 0), ExactMatrix::identity(2))],
        )
        .unwrap();
        let rec = build_recovery(&l).unwrap();
        assert_eq!(rec.maps[&MultiIndex::unit(2, 0)], ExactMatrix::identity(2));
        // P(x) = x^alpha / alpha! id reproduces the identity under L(D)*.
        let p = build_correction(&rec, &l).unwrap();
        assert_eq!(p.coeffs[&MultiIndex::unit(2, 0)], ExactMatrix::identity(2));
    }

    #[test]
    fn recovery_rejects_non_injective_stack() {
        let zero = HomOperator::zero(2, 1, 2, 1);
        assert!(matches!(
            build_recovery(&zero),
            Err(SynthesisError::StackedMapNotInjective)
        ));
    }

    #[test]
    fn correction_polynomial_for_curl() {
        let curl = stock::curl_2d();
        let rec = build_recovery(&curl).unwrap();
        let p = build_correction(&rec, &curl).unwrap();
        assert_eq!(p.degree, 1);
        assert_eq!(p.coeffs.len(), 2);
    }

    #[test]
    fn random_cocanceling_operators_satisfy_identities() {
        let mut sampler = Sampler::new(99, 5);
        let mut verified = 0;
        while verified < 10 {
            // Random first-order L with small integer coefficients,
            // E = R^2, F = R^2 on R^2.
            let terms: Vec<(MultiIndex, ExactMatrix)> = (0..2)
                .map(|i| {
                    (
                        MultiIndex::unit(2, i),
                        ExactMatrix::from_fn(2, 2, |_, _| sampler.rational()),
                    )
                })
                .collect();
            let l = HomOperator::new(2, 1, 2, 2, terms).unwrap();
            if l.is_zero() || !is_cocanceling(&l, &cfg()).holds_verdict() {
                continue;
            }
            let rec = build_recovery(&l).unwrap();
            build_correction(&rec, &l).unwrap();
            verified += 1;
        }
    }
}
