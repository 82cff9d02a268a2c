//! Reconstruct a field from its gradient through the Green multiplier, and
//! compare the pointwise kernel with its closed form.
//!
//! ```sh
//! cargo run --release --example green_reconstruction
//! ```

use cancel_kit::green::{apply_green, eval_g_pointwise};
use cancel_kit::grid::GridField;
use cancel_kit::operator::stock;

fn main() {
    let sigma = 0.15f64;
    let (n_points, half_width) = (128, 8.0);
    let u = GridField::from_fn(2, n_points, half_width, 1, |x, out| {
        out[0] = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
    });
    let f = GridField::from_fn(2, n_points, half_width, 2, |x, out| {
        let g = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
        out[0] = -x[0] / (sigma * sigma) * g;
        out[1] = -x[1] / (sigma * sigma) * g;
    });

    let grad = stock::gradient(2);
    let rec = apply_green(&grad, 1, &f).expect("reconstruction");
    let mut diff = 0.0;
    for (a, b) in rec.field.data().iter().zip(u.data()) {
        diff += (a - b) * (a - b);
    }
    let rel = (diff * u.cell_volume()).sqrt() / u.l2_norm();
    println!("gradient of a Gaussian, N = {n_points}, box = {half_width}:");
    println!("  relative L2 reconstruction error: {rel:.4}");
    println!("  input DC ratio: {:.2e}", rec.dc_ratio);

    println!("\npointwise kernel versus x / (2 pi |x|^2):");
    for x in [[1.0, 0.0], [0.6, -0.8], [-0.3, 0.4]] {
        let g = eval_g_pointwise(&grad, 1, &x).expect("kernel value");
        let norm_sq = x[0] * x[0] + x[1] * x[1];
        let expected = [
            x[0] / (2.0 * std::f64::consts::PI * norm_sq),
            x[1] / (2.0 * std::f64::consts::PI * norm_sq),
        ];
        println!(
            "  x = ({:5.2}, {:5.2}): computed ({:9.5}, {:9.5}), closed form ({:9.5}, {:9.5}), error estimate {:.1e}",
            x[0], x[1],
            g.matrix[(0, 0)], g.matrix[(0, 1)],
            expected[0], expected[1],
            g.error_estimate,
        );
    }
}
