//! Construct the auxiliary operators attached to a symbol: the potential
//! of the divergence, and the annihilator / recovery maps / correction
//! polynomial of the gradient.
//!
//! ```sh
//! cargo run --release --example synthesize
//! ```

use cancel_kit::checks::CheckConfig;
use cancel_kit::exact::format_rational;
use cancel_kit::operator::stock;
use cancel_kit::synthesis;

fn main() {
    let cfg = CheckConfig::default();

    // Divergence on R^2 has a one-dimensional generic kernel; its potential
    // realizes that kernel as a range and composes to zero.
    let div = stock::divergence(2);
    let pot = synthesis::build_potential(&div).expect("potential");
    println!("divergence on R^2:");
    println!(
        "  generic rank {}, kernel dim {}",
        pot.generic_rank, pot.kernel_dim
    );
    println!(
        "  xi* = ({})",
        pot.xi_star
            .iter()
            .map(format_rational)
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "  A o B = 0 exactly: {}",
        div.compose(&pot.operator).unwrap().is_zero()
    );

    // The gradient is annihilated by the planar curl, which is cocanceling;
    // the recovery maps left-invert its coefficients and the correction
    // polynomial reproduces the identity under the adjoint.
    let grad = stock::gradient(2);
    let ann = synthesis::build_annihilator(&grad, &cfg)
        .expect("solve")
        .expect("gradient admits an annihilator");
    println!("\ngradient on R^2:");
    println!(
        "  annihilator order {} with dim F = {}",
        ann.order, ann.dim_f
    );
    for (alpha, block) in ann.operator.terms() {
        println!("  L_{:?} = {:?}", alpha.entries(), block);
    }
    let rec = synthesis::build_recovery(&ann.operator).expect("recovery");
    for (alpha, k) in &rec.maps {
        println!("  K_{:?} = {:?}", alpha.entries(), k);
    }
    let correction = synthesis::build_correction(&rec, &ann.operator).expect("correction");
    println!(
        "  correction polynomial of degree {} with {} coefficient blocks",
        correction.degree,
        correction.coeffs.len()
    );
    println!("  sum K_a L_a = id and L(D)*P = id verified exactly");
}
