//! Endpoint estimate: the value of `u` at the origin is controlled by the
//! polar-weighted integral of its derivative with the explicit constant
//! `1/|S^{n-1}|`. The radial Gaussian attains the bound up to grid error.
//!
//! ```sh
//! cargo run --release --example linfty_endpoint
//! ```

use cancel_kit::grid::{random_bump_field, GridField};
use cancel_kit::lab::linfty_check;

fn main() {
    // Tight case: radially decreasing profile.
    let gaussian = GridField::from_fn(2, 256, 8.0, 1, |x, out| {
        out[0] = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
    });
    let check = linfty_check(&gaussian, 2).expect("k >= n");
    println!("radial Gaussian, n = 2, k = 2:");
    println!(
        "  |u(0)| = {:.5}, bound = {:.5} (ratio {:.4})",
        check.lhs,
        check.constant * check.rhs,
        check.lhs / (check.constant * check.rhs)
    );

    println!("\nrandom bump fields:");
    for seed in 0..5 {
        let u = random_bump_field(2, 128, 8.0, 1, seed, 3, 2.0);
        let check = linfty_check(&u, 2).expect("k >= n");
        println!(
            "  seed {seed}: |u(0)| = {:.5}, bound = {:.5} (ratio {:.4})",
            check.lhs,
            check.constant * check.rhs,
            check.lhs / (check.constant * check.rhs)
        );
    }
}
