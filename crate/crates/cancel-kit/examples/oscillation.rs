//! Oscillation family against the truncated gradient `(d_1, d_2)` on `R^3`:
//! for `q > p` the quotient diverges (ellipticity is necessary on that
//! scale), while the pure `p = q = 1` quotient stays bounded.
//!
//! ```sh
//! cargo run --release --example oscillation
//! ```

use cancel_kit::checks::CheckConfig;
use cancel_kit::lab::oscillation_family;
use cancel_kit::report::oscillation_witness;

fn main() {
    let cfg = CheckConfig::default();
    let entry = cancel_kit::catalog::find("d1d2_r3").expect("catalog entry");
    let (xi, v) = oscillation_witness(&entry.operator, &cfg)
        .expect("non-elliptic operators have a null direction");
    let lambdas = [1.0, 2.0, 4.0, 8.0];

    println!("q = 3/2 > p = 1 (diverging):");
    let diverging = oscillation_family(&entry.operator, &xi, &v, 1.0, 1.5, &lambdas, 128, 10.0)
        .expect("family");
    print!("{}", diverging.to_csv());
    println!(
        "min ratio per doubling: {:.4}\n",
        diverging.min_ratio_per_doubling().unwrap()
    );

    println!("p = q = 1 (bounded control):");
    let control = oscillation_family(&entry.operator, &xi, &v, 1.0, 1.0, &lambdas, 128, 10.0)
        .expect("family");
    print!("{}", control.to_csv());
    let quotients: Vec<f64> = control.rows.iter().map(|r| r.quotient).collect();
    println!(
        "quotient spread: {:.4}",
        quotients.iter().cloned().fold(0.0f64, f64::max)
            / quotients.iter().cloned().fold(f64::INFINITY, f64::min)
    );
}
