//! Exact symbol calculus and numerical experiments for homogeneous
//! constant-coefficient vector differential operators.
//!
//! A homogeneous operator of order `k` on `R^n` from `V` to `E`,
//!
//! ```text
//! A(D)u = sum_{|alpha| = k} A_alpha [d^alpha u],
//! ```
//!
//! is represented by its finitely many coefficient maps `A_alpha` over exact
//! rationals, so that the matrix symbol `A(xi) = sum xi^alpha A_alpha` can be
//! evaluated, composed, and restricted without rounding. On top of that the
//! crate provides:
//!
//! * [`checks`] — certified deciders for the structural conditions that govern
//!   L^1 estimates: ellipticity, the canceling and cocanceling conditions,
//!   pointwise rank-one conditions, subspace ellipticity profiles, and the
//!   direct-sum hypotheses for block operators.
//! * [`synthesis`] — exact construction of the auxiliary operators attached to
//!   such a symbol: a potential `B(D)` with `A(D)B(D) = 0`, a cocanceling
//!   annihilator `L(D)` with `L(D)A(D) = 0`, recovery maps `K_alpha` with
//!   `sum K_alpha L_alpha = id`, and the matching correction polynomial.
//! * [`green`] — the homogeneous Green multiplier that reconstructs
//!   `D^{k-l}u` from `A(D)u`, applied spectrally on periodic grids and
//!   evaluated pointwise by windowed Fourier inversion.
//! * [`lab`] — weighted Hardy functionals, extremal test families that
//!   exhibit the failure modes of the inequalities, and small quadrature /
//!   Monte Carlo checks.
//! * [`catalog`] / [`report`] — a catalog of classical operators with their
//!   expected classifications, and the experiment harness behind the
//!   `cancel-kit` command line tool.
//!
//! See the `examples/` directory for one runnable demonstration per
//! capability.

pub mod catalog;
pub mod certificate;
pub mod checks;
pub mod exact;
pub mod green;
pub mod grid;
pub mod io;
pub mod lab;
pub mod multiindex;
pub mod operator;
pub mod polymatrix;
pub mod report;
pub mod spectral;
pub mod synthesis;

pub use certificate::{Certificate, Verdict, Witness};
pub use exact::{ExactMatrix, Rational, Subspace};
pub use grid::GridField;
pub use multiindex::MultiIndex;
pub use operator::HomOperator;
