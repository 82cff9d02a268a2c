//! Dilation family against the scalar Laplacian: the operator is elliptic
//! but not canceling, and the Hardy quotient climbs without bound along the
//! family.
//!
//! ```sh
//! cargo run --release --example blowup
//! ```

use cancel_kit::checks::CheckConfig;
use cancel_kit::lab::blowup_family;
use cancel_kit::report::blowup_direction;

fn main() {
    let cfg = CheckConfig::default();
    let entry = cancel_kit::catalog::find("laplacian_r2").expect("catalog entry");
    let e = blowup_direction(&entry.operator, &cfg)
        .expect("non-canceling operators have a common range direction");
    let series = blowup_family(
        &entry.operator,
        &e,
        1,
        1.0,
        &[1.0, 2.0, 4.0, 8.0],
        256,
        32.0,
        &cfg,
    )
    .expect("family");
    print!("{}", series.to_csv());
    println!(
        "strictly increasing: {}, min ratio per doubling: {:.4}",
        series.strictly_increasing(),
        series.min_ratio_per_doubling().unwrap()
    );
}
