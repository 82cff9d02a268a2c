//! Restriction of symbols to subspaces of the base, and the search for
//! injective directions inside them.
//!
//! ```sh
//! cargo run --release --example subspace_profile
//! ```

use cancel_kit::certificate::Witness;
use cancel_kit::checks::{subspace_ellipticity_profile, CheckConfig};
use cancel_kit::exact::{format_rational, ExactMatrix, Subspace};
use cancel_kit::operator::stock;

fn main() {
    let cfg = CheckConfig::default();
    let a = stock::d1d2_r3();
    println!("operator (d_1, d_2) on R^3:");

    let planes = [
        (
            "span(e1, e2)",
            ExactMatrix::from_i64_rows(&[&[1, 0], &[0, 1], &[0, 0]]),
        ),
        (
            "span(e2, e3)",
            ExactMatrix::from_i64_rows(&[&[0, 0], &[1, 0], &[0, 1]]),
        ),
        ("span(e3)", ExactMatrix::from_i64_rows(&[&[0], &[0], &[1]])),
    ];
    for (label, basis) in planes {
        let pi = Subspace::from_columns(&basis);
        let restricted = a.restrict_to_subspace(&pi).expect("non-trivial subspace");
        let cert = subspace_ellipticity_profile(&a, &pi, &cfg).expect("profile");
        print!(
            "  {label}: restricted operator has {} terms, profile {:?}",
            restricted.terms().len(),
            cert.verdict
        );
        if let Some(Witness::Vector(xi)) = &cert.witness {
            print!(
                " with injective direction ({})",
                xi.iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        println!();
    }
    println!("\nan injective direction exists exactly off the degenerate axis");
}
