//! Catalog of classical operators with their expected classifications and
//! the experiment each one drives in the suite.
//!
//! The in-code constructors are the source of truth; the JSON files under
//! `catalog/` are generated from them (see the ignored `regenerate` test)
//! and kept in sync by a parity test.

use crate::checks::{DirectSumBlock, DirectSumSpec};
use crate::exact::{rat, rat_int, ExactMatrix};
use crate::multiindex::MultiIndex;
use crate::operator::{stock, HomOperator};

/// Grid parameters an entry wants for its experiment.
#[derive(Clone, Copy, Debug)]
pub struct GridParams {
    pub n_points: usize,
    pub half_width: f64,
}

/// Which experiment the suite runs for an entry.
#[derive(Clone, Debug)]
pub enum Experiment {
    /// Structural checks only.
    ClassifyOnly,
    /// Hardy quotient regression over seeded bumps and scalings.
    HardySufficiency { grid: GridParams },
    /// Dilation family driving the quotient up for non-canceling operators.
    Blowup { grid: GridParams, q: f64 },
    /// Oscillation family for non-elliptic operators, with a bounded
    /// pure-Hardy control at `p = q = 1`.
    Oscillation { grid: GridParams, p: f64, q: f64 },
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub notes: &'static str,
    pub operator: HomOperator,
    pub expected_elliptic: bool,
    pub expected_canceling: bool,
    pub experiment: Experiment,
    pub direct_sum: Option<DirectSumSpec>,
}

/// The full built-in catalog.
pub fn builtin() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "gradient_r2",
            notes: "gradient of scalar fields on R^2",
            operator: stock::gradient(2),
            expected_elliptic: true,
            expected_canceling: true,
            experiment: Experiment::HardySufficiency {
                grid: GridParams {
                    n_points: 128,
                    half_width: 8.0,
                },
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "gradient_r3",
            notes: "gradient of scalar fields on R^3",
            operator: stock::gradient(3),
            expected_elliptic: true,
            expected_canceling: true,
            experiment: Experiment::HardySufficiency {
                grid: GridParams {
                    n_points: 64,
                    half_width: 8.0,
                },
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "derivative_r1",
            notes: "d/dx on R: elliptic but not canceling",
            operator: stock::derivative_1d(),
            expected_elliptic: true,
            expected_canceling: false,
            experiment: Experiment::ClassifyOnly,
            direct_sum: None,
        },
        CatalogEntry {
            name: "laplacian_r2",
            notes: "scalar Laplacian on R^2: elliptic, full scalar range",
            operator: stock::laplacian(2),
            expected_elliptic: true,
            expected_canceling: false,
            // Wide box: the frequency spacing pi/L must resolve the plateau
            // transition bands of the dilation profiles at small lambda.
            experiment: Experiment::Blowup {
                grid: GridParams {
                    n_points: 256,
                    half_width: 32.0,
                },
                q: 1.0,
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "mazya_r2",
            notes: "(Laplacian u, grad div u) on vector fields over R^2",
            operator: mazya_operator(2),
            expected_elliptic: true,
            expected_canceling: true,
            experiment: Experiment::HardySufficiency {
                grid: GridParams {
                    n_points: 128,
                    half_width: 8.0,
                },
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "symgrad_r2",
            notes: "symmetric gradient of planar vector fields",
            operator: symmetric_gradient_2d(),
            expected_elliptic: true,
            expected_canceling: true,
            experiment: Experiment::HardySufficiency {
                grid: GridParams {
                    n_points: 128,
                    half_width: 8.0,
                },
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "hodge_r4",
            notes: "(d, d*) on 2-forms in R^4; grid experiments run reduced",
            operator: hodge_operator(4, 2),
            expected_elliptic: true,
            expected_canceling: true,
            experiment: Experiment::HardySufficiency {
                grid: GridParams {
                    n_points: 16,
                    half_width: 6.0,
                },
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "d1d2_r3",
            notes: "(d_1, d_2) on R^3: canceling but not elliptic",
            operator: stock::d1d2_r3(),
            expected_elliptic: false,
            expected_canceling: true,
            experiment: Experiment::Oscillation {
                grid: GridParams {
                    n_points: 256,
                    half_width: 10.0,
                },
                p: 1.0,
                q: 1.5,
            },
            direct_sum: None,
        },
        CatalogEntry {
            name: "r4_block",
            notes: "block operator on R^4 from R^2: direct sum of elliptic pieces",
            operator: r4_block_operator(),
            expected_elliptic: false,
            expected_canceling: true,
            experiment: Experiment::ClassifyOnly,
            direct_sum: Some(r4_block_direct_sum()),
        },
    ]
}

pub fn find(name: &str) -> Option<CatalogEntry> {
    builtin().into_iter().find(|e| e.name == name)
}

/// `(Laplacian u, grad div u)` on `R^n`: order two, `V = R^n`, `E = R^{2n}`.
pub fn mazya_operator(n: usize) -> HomOperator {
    let mut terms: Vec<(MultiIndex, ExactMatrix)> = Vec::new();
    for alpha in MultiIndex::all_of_order(n, 2) {
        let mut m = ExactMatrix::zeros(2 * n, n);
        // Laplacian block: d_i^2 contributes the identity.
        if alpha.entries().contains(&2) {
            for r in 0..n {
                m[(r, r)] = rat_int(1);
            }
        }
        // grad div block: row i, column j gets the coefficient of
        // d_i d_j in alpha.
        for i in 0..n {
            for j in 0..n {
                let mut needed = vec![0u32; n];
                needed[i] += 1;
                needed[j] += 1;
                if alpha.entries() == needed.as_slice() {
                    m[(n + i, j)] = &m[(n + i, j)] + &rat_int(1);
                }
            }
        }
        if !m.is_zero() {
            terms.push((alpha, m));
        }
    }
    HomOperator::new(n, 2, n, 2 * n, terms).unwrap()
}

/// Symmetric gradient on `R^2` with components `(e11, e12, e22)`.
pub fn symmetric_gradient_2d() -> HomOperator {
    let mut t1 = ExactMatrix::zeros(3, 2);
    t1[(0, 0)] = rat_int(1);
    t1[(1, 1)] = rat(1, 2);
    let mut t2 = ExactMatrix::zeros(3, 2);
    t2[(1, 0)] = rat(1, 2);
    t2[(2, 1)] = rat_int(1);
    HomOperator::new(
        2,
        1,
        2,
        3,
        vec![(MultiIndex::unit(2, 0), t1), (MultiIndex::unit(2, 1), t2)],
    )
    .unwrap()
}

/// Sorted index sets enumerating a basis of `Lambda^p R^n`.
fn form_basis(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, p: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..n {
            prefix.push(i);
            rec(i + 1, n, p - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, p, &mut Vec::new(), &mut out);
    out
}

/// Coefficient matrix of `e_i ^ .` from `Lambda^p` to `Lambda^{p+1}`.
fn wedge_matrix(n: usize, p: usize, i: usize) -> ExactMatrix {
    let src = form_basis(n, p);
    let dst = form_basis(n, p + 1);
    let mut m = ExactMatrix::zeros(dst.len(), src.len());
    for (c, s) in src.iter().enumerate() {
        if s.contains(&i) {
            continue;
        }
        let mut t = s.clone();
        let pos = t.iter().position(|&x| x > i).unwrap_or(t.len());
        t.insert(pos, i);
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        let r = dst.iter().position(|d| d == &t).unwrap();
        m[(r, c)] = rat_int(sign);
    }
    m
}

/// Coefficient matrix of the contraction `e_i _| .` from `Lambda^p` to
/// `Lambda^{p-1}`.
fn contraction_matrix(n: usize, p: usize, i: usize) -> ExactMatrix {
    let src = form_basis(n, p);
    let dst = form_basis(n, p - 1);
    let mut m = ExactMatrix::zeros(dst.len(), src.len());
    for (c, s) in src.iter().enumerate() {
        let Some(pos) = s.iter().position(|&x| x == i) else {
            continue;
        };
        let mut t = s.clone();
        t.remove(pos);
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        let r = dst.iter().position(|d| d == &t).unwrap();
        m[(r, c)] = rat_int(sign);
    }
    m
}

/// `(d, d*)` on `p`-forms in `R^n`: symbol `(xi ^ u, xi _| u)`.
pub fn hodge_operator(n: usize, p: usize) -> HomOperator {
    assert!(p >= 1 && p < n);
    let dim_v = form_basis(n, p).len();
    let dim_up = form_basis(n, p + 1).len();
    let dim_down = form_basis(n, p - 1).len();
    let terms = (0..n)
        .map(|i| {
            let w = wedge_matrix(n, p, i);
            let c = contraction_matrix(n, p, i);
            let mut m = ExactMatrix::zeros(dim_up + dim_down, dim_v);
            for r in 0..dim_up {
                for col in 0..dim_v {
                    m[(r, col)] = w[(r, col)].clone();
                }
            }
            for r in 0..dim_down {
                for col in 0..dim_v {
                    m[(dim_up + r, col)] = c[(r, col)].clone();
                }
            }
            (MultiIndex::unit(n, i), m)
        })
        .collect();
    HomOperator::new(n, 1, dim_v, dim_up + dim_down, terms).unwrap()
}

/// The 4x2 block operator on `R^4` with rows
/// `(x1, 0), (0, x2), (x3, -x4), (x4, x3)`.
pub fn r4_block_operator() -> HomOperator {
    let mut t1 = ExactMatrix::zeros(4, 2);
    t1[(0, 0)] = rat_int(1);
    let mut t2 = ExactMatrix::zeros(4, 2);
    t2[(1, 1)] = rat_int(1);
    let mut t3 = ExactMatrix::zeros(4, 2);
    t3[(2, 0)] = rat_int(1);
    t3[(3, 1)] = rat_int(1);
    let mut t4 = ExactMatrix::zeros(4, 2);
    t4[(2, 1)] = rat_int(-1);
    t4[(3, 0)] = rat_int(1);
    HomOperator::new(
        4,
        1,
        2,
        4,
        vec![
            (MultiIndex::unit(4, 0), t1),
            (MultiIndex::unit(4, 1), t2),
            (MultiIndex::unit(4, 2), t3),
            (MultiIndex::unit(4, 3), t4),
        ],
    )
    .unwrap()
}

/// Direct-sum presentation of [`r4_block_operator`]: two directional
/// derivative blocks and one Cauchy-Riemann block.
pub fn r4_block_direct_sum() -> DirectSumSpec {
    let proj = |axes: &[usize]| {
        ExactMatrix::from_fn(4, 4, |r, c| {
            if r == c && axes.contains(&r) {
                rat_int(1)
            } else {
                rat_int(0)
            }
        })
    };
    let q = |axes: &[usize]| {
        ExactMatrix::from_fn(2, 2, |r, c| {
            if r == c && axes.contains(&r) {
                rat_int(1)
            } else {
                rat_int(0)
            }
        })
    };
    // Cauchy-Riemann block [[x3, -x4], [x4, x3]] in coordinates of
    // span{e3, e4}.
    let mut cr1 = ExactMatrix::zeros(2, 2);
    cr1[(0, 0)] = rat_int(1);
    cr1[(1, 1)] = rat_int(1);
    let mut cr2 = ExactMatrix::zeros(2, 2);
    cr2[(0, 1)] = rat_int(-1);
    cr2[(1, 0)] = rat_int(1);
    let cauchy_riemann = HomOperator::new(
        2,
        1,
        2,
        2,
        vec![(MultiIndex::unit(2, 0), cr1), (MultiIndex::unit(2, 1), cr2)],
    )
    .unwrap();
    DirectSumSpec {
        blocks: vec![
            DirectSumBlock {
                p: proj(&[0]),
                q: q(&[0]),
                a: stock::derivative_1d(),
            },
            DirectSumBlock {
                p: proj(&[1]),
                q: q(&[1]),
                a: stock::derivative_1d(),
            },
            DirectSumBlock {
                p: proj(&[2, 3]),
                q: ExactMatrix::identity(2),
                a: cauchy_riemann,
            },
        ],
    }
}

/// Gradient on `R^2` padded with a zero component: elliptic with a
/// non-trivial common adjoint kernel. Used to exercise the kernel identity
/// of the Green function.
pub fn padded_gradient_r2() -> HomOperator {
    let mut t1 = ExactMatrix::zeros(3, 1);
    t1[(0, 0)] = rat_int(1);
    let mut t2 = ExactMatrix::zeros(3, 1);
    t2[(1, 0)] = rat_int(1);
    HomOperator::new(
        2,
        1,
        1,
        3,
        vec![(MultiIndex::unit(2, 0), t1), (MultiIndex::unit(2, 1), t2)],
    )
    .unwrap()
}

/// Serializes the direct-sum presentation of an entry for the file format
/// accepted by `cancel-kit check --direct-sum`.
pub fn direct_sum_to_file(spec: &DirectSumSpec) -> crate::io::DirectSumSpecFile {
    crate::io::DirectSumSpecFile {
        blocks: spec
            .blocks
            .iter()
            .map(|b| crate::io::DirectSumBlockSpec {
                p: crate::io::matrix_to_strings(&b.p),
                q: crate::io::matrix_to_strings(&b.q),
                a: crate::io::OperatorSpec::from_operator(&b.a),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;

    #[test]
    fn mazya_symbol_shape() {
        let a = mazya_operator(2);
        let xi = vec![rat_int(1), rat_int(2)];
        let s = a.symbol(&xi);
        // [ |xi|^2 I ; xi xi^T ]
        let expected = ExactMatrix::from_i64_rows(&[&[5, 0], &[0, 5], &[1, 2], &[2, 4]]);
        assert_eq!(s, expected);
    }

    #[test]
    fn symgrad_symbol() {
        let a = symmetric_gradient_2d();
        let s = a.symbol(&[rat_int(2), rat_int(4)]);
        let expected = ExactMatrix::from_rows(vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(0), rat_int(4)],
        ]);
        assert_eq!(s, expected);
    }

    #[test]
    fn hodge_symbol_is_an_isometry_scaled_by_xi() {
        // |xi ^ u|^2 + |xi _| u|^2 = |xi|^2 |u|^2, so A(xi)^T A(xi) = |xi|^2 I.
        let a = hodge_operator(4, 2);
        assert_eq!(a.dim_v(), 6);
        assert_eq!(a.dim_e(), 8);
        let xi: Vec<Rational> = vec![rat_int(1), rat_int(-2), rat_int(3), rat_int(5)];
        let s = a.symbol(&xi);
        let gram = &s.transpose() * &s;
        let norm_sq = rat_int(1 + 4 + 9 + 25);
        assert_eq!(gram, ExactMatrix::identity(6).scale(&norm_sq));
    }

    #[test]
    fn exterior_identities() {
        // xi ^ (xi ^ u) = 0 and xi _| (xi _| u) = 0 at a sample frequency.
        let n = 4;
        let xi = [rat_int(1), rat_int(2), rat_int(-1), rat_int(3)];
        let wedge2: ExactMatrix = (0..n)
            .map(|i| wedge_matrix(n, 2, i).scale(&xi[i]))
            .reduce(|a, b| &a + &b)
            .unwrap();
        let wedge3: ExactMatrix = (0..n)
            .map(|i| wedge_matrix(n, 3, i).scale(&xi[i]))
            .reduce(|a, b| &a + &b)
            .unwrap();
        assert!((&wedge3 * &wedge2).is_zero());
        let contr2: ExactMatrix = (0..n)
            .map(|i| contraction_matrix(n, 2, i).scale(&xi[i]))
            .reduce(|a, b| &a + &b)
            .unwrap();
        let contr1: ExactMatrix = (0..n)
            .map(|i| contraction_matrix(n, 1, i).scale(&xi[i]))
            .reduce(|a, b| &a + &b)
            .unwrap();
        assert!((&contr1 * &contr2).is_zero());
    }

    #[test]
    fn catalog_names_are_unique() {
        let entries = builtin();
        let mut names: Vec<&str> = entries.iter().map(|e| e.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), entries.len());
        assert!(find("gradient_r2").is_some());
        assert!(find("missing").is_none());
    }

    fn catalog_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("catalog")
    }

    /// Rewrites the shipped JSON files from the in-code constructors.
    /// Run manually: `cargo test -p cancel-kit regenerate -- --ignored`.
    #[test]
    #[ignore]
    fn regenerate_catalog_files() {
        let dir = catalog_dir();
        std::fs::create_dir_all(&dir).unwrap();
        for entry in builtin() {
            let json = crate::io::operator_to_json(&entry.operator);
            std::fs::write(dir.join(format!("{}.json", entry.name)), json + "\n").unwrap();
            if let Some(spec) = &entry.direct_sum {
                let file = direct_sum_to_file(spec);
                let json = serde_json::to_string_pretty(&file).unwrap();
                std::fs::write(dir.join(format!("{}.dsum.json", entry.name)), json + "\n").unwrap();
            }
        }
    }

    #[test]
    fn shipped_catalog_files_match_constructors() {
        let dir = catalog_dir();
        for entry in builtin() {
            let path = dir.join(format!("{}.json", entry.name));
            let text = std::fs::read_to_string(&path)
                .unwrap_or_else(|e| panic!("missing catalog file {path:?}: {e}"));
            let parsed = crate::io::parse_operator(&text).unwrap();
            assert_eq!(parsed, entry.operator, "catalog file {path:?} out of sync");
        }
    }
}
