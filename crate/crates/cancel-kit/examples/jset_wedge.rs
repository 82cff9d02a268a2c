//! Wedge integral bound: Monte Carlo evaluation of
//! `integral_J integral_R f(x + t b)/|x| dt dx` over the wedge
//! `J = {|b.x| <= |c.x|}` against its explicit constant.
//!
//! ```sh
//! cargo run --release --example jset_wedge
//! ```

use cancel_kit::grid::{bump1, GridField};
use cancel_kit::lab::jset_constant_check;

fn main() {
    let f = GridField::from_fn(2, 64, 4.0, 1, |x, out| {
        out[0] = bump1((x[0] * x[0] + x[1] * x[1]).sqrt() / 1.5);
    });

    for (b, c, label) in [
        (
            [1.0, 0.0],
            [0.0, 1.0],
            "orthogonal unit (constant 2 exactly)",
        ),
        ([1.0, 0.0], [0.5, 1.0], "tilted"),
        ([0.8, 0.6], [-0.6, 0.8], "rotated orthogonal"),
    ] {
        let check = jset_constant_check(&b, &c, &f, 12.0, 300_000, 42).expect("admissible pair");
        println!("{label}:");
        println!(
            "  lhs = {:.4} (+- {:.4}),  constant = {:.4},  rhs = {:.4}",
            check.lhs, check.sigma3, check.constant, check.rhs
        );
        println!(
            "  bound holds within 3 sigma: {}",
            check.lhs <= check.rhs + check.sigma3
        );
    }
}
