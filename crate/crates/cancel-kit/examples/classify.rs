//! Classify the built-in operator catalog: ellipticity, cancellation, and
//! the common-range dimension of each symbol.
//!
//! ```sh
//! cargo run --release --example classify
//! ```

use cancel_kit::checks::{canceling_space, is_cocanceling, is_elliptic, CheckConfig};

fn main() {
    let cfg = CheckConfig::default();
    println!(
        "{:<14} {:>2} {:>2} {:>4} {:>4}  {:<10} {:<10} {:<12} dim E_A",
        "operator", "n", "k", "dimV", "dimE", "elliptic", "canceling", "cocanceling"
    );
    for entry in cancel_kit::catalog::builtin() {
        let a = &entry.operator;
        let elliptic = is_elliptic(a, &cfg);
        let (space, canceling) = canceling_space(a, &cfg);
        let cocanceling = is_cocanceling(a, &cfg);
        println!(
            "{:<14} {:>2} {:>2} {:>4} {:>4}  {:<10} {:<10} {:<12} {}",
            entry.name,
            a.n(),
            a.order(),
            a.dim_v(),
            a.dim_e(),
            format!("{:?}", elliptic.verdict),
            format!("{:?}", canceling.verdict),
            format!("{:?}", cocanceling.verdict),
            space.dim(),
        );
        assert_eq!(elliptic.holds_verdict(), entry.expected_elliptic);
        assert_eq!(canceling.holds_verdict(), entry.expected_canceling);
    }
    println!("\nall verdicts match the catalog expectations");
}
