//! Rank-one families `u -> (a_i . Du[b_i])_i`: the finite spanning check,
//! its witnesses, and the agreement with the direct-sum decider.
//!
//! ```sh
//! cargo run --release --example rank_one
//! ```

use cancel_kit::certificate::Witness;
use cancel_kit::checks::{
    direct_sum_condition, rank_one_condition, CheckConfig, DirectSumSpec, RankOneFamily,
};
use cancel_kit::exact::{format_rational, rat_int};

fn show(label: &str, fam: &RankOneFamily) {
    let cert = rank_one_condition(fam).expect("well-formed family");
    println!("{label}: {:?}", cert.verdict);
    if let Some(Witness::Pair { xi, v }) = &cert.witness {
        println!(
            "  witness xi = ({}), v = ({})",
            xi.iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", "),
            v.iter().map(format_rational).collect::<Vec<_>>().join(", "),
        );
    }
    let spec = DirectSumSpec::from_rank_one(fam);
    let ds = direct_sum_condition(&spec, &CheckConfig::default()).expect("valid blocks");
    println!(
        "  direct-sum decider agrees: {}",
        ds.verdict == cert.verdict
    );
}

fn main() {
    // Two orthogonal couplings on scalar fields over R^2: the condition
    // holds and the Hardy estimate is available.
    let fam = RankOneFamily::new(
        vec![vec![rat_int(1)], vec![rat_int(1)]],
        vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
    )
    .unwrap();
    show("a = (1, 1), b = (e1, e2)", &fam);

    // Parallel directions leave a frequency with an empty active set.
    let fam = RankOneFamily::new(
        vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]],
        vec![vec![rat_int(1), rat_int(1)], vec![rat_int(2), rat_int(2)]],
    )
    .unwrap();
    show("parallel b's", &fam);

    // dim V + 1 couplings: holds exactly when the a's are (l-1)-wise and
    // the b's pairwise independent.
    let fam = RankOneFamily::new(
        vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
        ],
        vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(-1)],
        ],
    )
    .unwrap();
    show("l = dim V + 1, generic", &fam);
}
