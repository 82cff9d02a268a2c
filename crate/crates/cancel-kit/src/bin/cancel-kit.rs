//! Thin command line front end over the library: structural checks,
//! synthesis, Green-function tests, and the experiment suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cancel_kit::checks::{is_cocanceling, CheckConfig};
use cancel_kit::io::{read_operator, OperatorSpec};
use cancel_kit::lab;
use cancel_kit::report::{self, exit_codes, OutputFormat, RunConfig};
use cancel_kit::synthesis;

type BoxError = Box<dyn std::error::Error>;
type Result<T> = std::result::Result<T, BoxError>;

#[derive(Parser)]
#[command(
    name = "cancel-kit",
    about = "Structural certification and Hardy-type experiments for homogeneous vector differential operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Seed for every sampled decision and experiment.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Grid points per axis (power of two); overrides per-entry defaults.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Half-width of the grid cube.
    #[arg(long = "box", global = true)]
    box_half_width: Option<f64>,
    /// Directory for report artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format for series data printed to stdout.
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Certify ellipticity, canceling and cocanceling for an operator file.
    Check {
        operator: PathBuf,
        /// Target covering radius of the ellipticity sphere grid.
        #[arg(long)]
        sphere_mesh: Option<f64>,
        /// Also verify direct-sum hypotheses from a block file.
        #[arg(long)]
        direct_sum: Option<PathBuf>,
    },
    /// Construct the potential, annihilator, or recovery maps.
    Synthesize {
        operator: PathBuf,
        #[arg(long, value_parser = ["potential", "annihilator", "recovery"])]
        what: String,
    },
    /// Exercise the Green multiplier: consistency, homogeneity, kernels.
    GreenTest {
        operator: PathBuf,
        #[arg(long)]
        ell: u32,
    },
    /// Hardy quotients over seeded bumps and scalings.
    Hardy {
        operator: PathBuf,
        #[arg(long)]
        ell: u32,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
    },
    /// Dilation family for a non-canceling elliptic operator.
    Blowup {
        operator: PathBuf,
        #[arg(long)]
        ell: Option<u32>,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
    },
    /// Oscillation family for a non-elliptic operator.
    Oscillate {
        operator: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        q: f64,
    },
    /// Run the full catalog: checks plus the matching experiments.
    Suite {
        /// Entry filter: elliptic-only, canceling-only, non-elliptic, or a
        /// name substring.
        #[arg(long)]
        filter: Option<String>,
        /// Threshold file overriding the built-in calibration.
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => exit_codes::USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_codes::USAGE as u8)
        }
    }
}

fn build_config(global: &GlobalArgs) -> Result<RunConfig> {
    let format = match global.format.as_str() {
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => return Err(format!("unknown format {other:?} (expected json or csv)").into()),
    };
    Ok(RunConfig {
        seed: global.seed,
        grid_override: global.grid,
        box_override: global.box_half_width,
        out_dir: global.out.clone(),
        format,
        filter: None,
        thresholds: report::default_thresholds(),
        sphere_mesh: None,
    })
}

fn emit<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Check {
            operator,
            sphere_mesh,
            direct_sum,
        } => {
            let mut config = build_config(&cli.global)?;
            config.sphere_mesh = *sphere_mesh;
            let op = read_operator(operator)?;
            let ds = match direct_sum {
                Some(path) => Some(load_direct_sum(path)?),
                None => None,
            };
            let name = operator
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "operator".to_string());
            let report = report::run_check(&name, &op, ds.as_ref(), &config)?;
            emit(&report);
            Ok(if report.any_undecided() {
                exit_codes::UNDECIDED
            } else {
                exit_codes::OK
            })
        }
        Command::Synthesize { operator, what } => {
            let op = read_operator(operator)?;
            let cfg = CheckConfig::with_seed(cli.global.seed);
            match what.as_str() {
                "potential" => {
                    let pot = synthesis::build_potential(&op)?;
                    let composed_zero = op.compose(&pot.operator)?.is_zero();
                    emit(&serde_json::json!({
                        "operator": OperatorSpec::from_operator(&pot.operator),
                        "verification": {
                            "compose_zero": composed_zero,
                            "generic_rank": pot.generic_rank,
                            "kernel_dim": pot.kernel_dim,
                            "xi_star": pot.xi_star.iter()
                                .map(cancel_kit::exact::format_rational)
                                .collect::<Vec<_>>(),
                        }
                    }));
                }
                "annihilator" => match synthesis::build_annihilator(&op, &cfg)? {
                    Some(ann) => {
                        let composed_zero = ann.operator.compose(&op)?.is_zero();
                        let cocanceling = is_cocanceling(&ann.operator, &cfg);
                        emit(&serde_json::json!({
                            "operator": OperatorSpec::from_operator(&ann.operator),
                            "order": ann.order,
                            "dimF": ann.dim_f,
                            "verification": {
                                "compose_zero": composed_zero,
                                "cocanceling":
                                    cancel_kit::certificate::CertificateReport::from(&cocanceling),
                            }
                        }));
                    }
                    None => {
                        emit(&serde_json::json!({
                            "operator": serde_json::Value::Null,
                            "note": format!(
                                "no cocanceling annihilator up to order {}",
                                synthesis::annihilator_order_bound(&op)
                            ),
                        }));
                    }
                },
                "recovery" => {
                    let ann = synthesis::build_annihilator(&op, &cfg)?.ok_or_else(|| {
                        format!(
                            "no cocanceling annihilator up to order {}",
                            synthesis::annihilator_order_bound(&op)
                        )
                    })?;
                    let rec = synthesis::build_recovery(&ann.operator)?;
                    let correction = synthesis::build_correction(&rec, &ann.operator)?;
                    let maps: Vec<serde_json::Value> = rec
                        .maps
                        .iter()
                        .map(|(alpha, m)| {
                            serde_json::json!({
                                "alpha": alpha.entries(),
                                "matrix": cancel_kit::io::matrix_to_strings(m),
                            })
                        })
                        .collect();
                    let coeffs: Vec<serde_json::Value> = correction
                        .coeffs
                        .iter()
                        .map(|(alpha, m)| {
                            serde_json::json!({
                                "alpha": alpha.entries(),
                                "matrix": cancel_kit::io::matrix_to_strings(m),
                            })
                        })
                        .collect();
                    emit(&serde_json::json!({
                        "annihilator": OperatorSpec::from_operator(&ann.operator),
                        "recovery": { "order": rec.order, "maps": maps },
                        "correction": { "degree": correction.degree, "coeffs": coeffs },
                        "verification": {
                            "recovery_identity": true,
                            "correction_identity": true,
                        }
                    }));
                }
                _ => unreachable!("clap restricts the value"),
            }
            Ok(exit_codes::OK)
        }
        Command::GreenTest { operator, ell } => {
            let config = build_config(&cli.global)?;
            let op = read_operator(operator)?;
            let n_points = cli.global.grid.unwrap_or(64);
            let half_width = cli.global.box_half_width.unwrap_or(8.0);
            let report = report::run_green_test(&op, *ell, n_points, half_width, &config)?;
            emit(&report);
            Ok(exit_codes::OK)
        }
        Command::Hardy { operator, ell, q } => {
            let config = build_config(&cli.global)?;
            let op = read_operator(operator)?;
            let n_points = cli.global.grid.unwrap_or(128);
            let half_width = cli.global.box_half_width.unwrap_or(8.0);
            let seeds: Vec<u64> = (0..10).map(|i| config.seed + i).collect();
            let scales = [1.0, 2.0, 3.0, 4.0];
            let mut rows_csv = String::from("seed,scale,lhs,rhs,quotient\n");
            let mut max_quotient = 0.0f64;
            for &seed in &seeds {
                for &scale in &scales {
                    let u = cancel_kit::grid::random_bump_field(
                        op.n(),
                        n_points,
                        half_width,
                        op.dim_v(),
                        seed,
                        3,
                        scale,
                    );
                    let row = lab::hardy_quotient(&op, &u, *ell, *q, lab::DiffMode::Spectral)?;
                    max_quotient = max_quotient.max(row.quotient);
                    rows_csv.push_str(&format!(
                        "{seed},{scale:.6e},{:.12e},{:.12e},{:.12e}\n",
                        row.lhs, row.rhs, row.quotient
                    ));
                }
            }
            print!("{rows_csv}");
            if config.format == OutputFormat::Json {
                emit(&serde_json::json!({
                    "ell": ell,
                    "q": q,
                    "max_quotient": max_quotient,
                }));
            }
            Ok(exit_codes::OK)
        }
        Command::Blowup { operator, ell, q } => {
            let config = build_config(&cli.global)?;
            let op = read_operator(operator)?;
            let cfg = config.check_config();
            let e = report::blowup_direction(&op, &cfg).ok_or(
                "operator is canceling; the dilation family needs a common-range direction",
            )?;
            let ell = ell.unwrap_or_else(|| op.order().min(op.n() as u32 - 1));
            let n_points = cli.global.grid.unwrap_or(256);
            let half_width = cli.global.box_half_width.unwrap_or(8.0);
            let series = lab::blowup_family(
                &op,
                &e,
                ell,
                *q,
                &report::SUITE_LAMBDAS,
                n_points,
                half_width,
                &cfg,
            )?;
            print!("{}", series.to_csv());
            if config.format == OutputFormat::Json {
                let threshold = frozen_threshold(&config.thresholds.blowup, &op);
                emit(&serde_json::json!({
                    "strictly_increasing": series.strictly_increasing(),
                    "min_ratio_per_doubling": series.min_ratio_per_doubling(),
                    "frozen_threshold": threshold,
                    "meets_threshold": threshold.map(|t| {
                        series.min_ratio_per_doubling().is_some_and(|r| r >= t)
                    }),
                }));
            }
            Ok(exit_codes::OK)
        }
        Command::Oscillate { operator, p, q } => {
            let config = build_config(&cli.global)?;
            let op = read_operator(operator)?;
            let cfg = config.check_config();
            let (xi, v) = report::oscillation_witness(&op, &cfg)
                .ok_or("operator looks elliptic; the oscillation family needs a null direction")?;
            let n_points = cli.global.grid.unwrap_or(256);
            let half_width = cli.global.box_half_width.unwrap_or(10.0);
            let series = lab::oscillation_family(
                &op,
                &xi,
                &v,
                *p,
                *q,
                &report::SUITE_LAMBDAS,
                n_points,
                half_width,
            )?;
            print!("{}", series.to_csv());
            if config.format == OutputFormat::Json {
                let threshold = frozen_threshold(&config.thresholds.oscillation, &op);
                emit(&serde_json::json!({
                    "strictly_increasing": series.strictly_increasing(),
                    "min_ratio_per_doubling": series.min_ratio_per_doubling(),
                    "frozen_threshold": threshold,
                    "meets_threshold": threshold.map(|t| {
                        series.min_ratio_per_doubling().is_some_and(|r| r >= t)
                    }),
                }));
            }
            Ok(exit_codes::OK)
        }
        Command::Suite { filter, thresholds } => {
            let mut config = build_config(&cli.global)?;
            if let Some(path) = thresholds {
                match report::load_thresholds(path) {
                    Ok(t) => config.thresholds = t,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return Ok(exit_codes::REGRESSION);
                    }
                }
            }
            config.filter = filter.clone();
            let outcome = report::run_suite(&config)?;
            emit(&outcome);
            Ok(outcome.exit_code)
        }
    }
}

/// Frozen threshold for an ad-hoc operator: looked up by structural
/// equality with a catalog entry, since the file may be a copy.
fn frozen_threshold(
    table: &std::collections::BTreeMap<String, f64>,
    op: &cancel_kit::operator::HomOperator,
) -> Option<f64> {
    cancel_kit::catalog::builtin()
        .into_iter()
        .find(|e| &e.operator == op)
        .and_then(|e| table.get(e.name).copied())
}

fn load_direct_sum(path: &PathBuf) -> Result<cancel_kit::checks::DirectSumSpec> {
    let text = std::fs::read_to_string(path)?;
    let file: cancel_kit::io::DirectSumSpecFile = serde_json::from_str(&text)?;
    let mut blocks = Vec::new();
    for b in &file.blocks {
        blocks.push(cancel_kit::checks::DirectSumBlock {
            p: cancel_kit::io::parse_matrix(&b.p)?,
            q: cancel_kit::io::parse_matrix(&b.q)?,
            a: b.a.to_operator()?,
        });
    }
    Ok(cancel_kit::checks::DirectSumSpec { blocks })
}
