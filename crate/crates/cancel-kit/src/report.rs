//! Experiment orchestration and report emission for the command line tool.
//!
//! Reports are deterministic for a fixed seed and configuration: sampling
//! is seeded, map iteration orders are fixed, and floats are printed with a
//! fixed notation, so repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogEntry, Experiment, GridParams};
use crate::certificate::{CertificateReport, Verdict};
use crate::checks::{
    canceling_space, cokernel_space, direct_sum_condition, is_cocanceling, is_elliptic,
    CheckConfig, DirectSumSpec,
};
use crate::exact::Subspace;
use crate::green;
use crate::grid::GridField;
use crate::lab::{self, ExperimentSeries};
use crate::operator::HomOperator;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("threshold file is corrupted: {0}")]
    Thresholds(String),
    #[error("unknown catalog entry {0}")]
    UnknownEntry(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lab(#[from] lab::LabError),
    #[error(transparent)]
    Green(#[from] green::GreenError),
    #[error(transparent)]
    Check(#[from] crate::checks::CheckError),
    #[error(transparent)]
    Spec(#[from] crate::io::SpecError),
}

/// Process exit codes shared by the command line tool.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const UNDECIDED: i32 = 2;
    pub const REGRESSION: i32 = 3;
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Regression thresholds, calibrated once against the committed defaults
/// and then frozen (see `thresholds.toml`). Nothing here is inline in
/// test code; the suite and the acceptance tests read this single file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    /// Largest allowed Hardy quotient per elliptic + canceling entry.
    pub sufficiency: BTreeMap<String, f64>,
    /// Smallest required quotient ratio per doubling for dilation families.
    pub blowup: BTreeMap<String, f64>,
    /// Smallest required quotient ratio per doubling for oscillation
    /// families.
    pub oscillation: BTreeMap<String, f64>,
    /// Largest allowed max/min quotient spread for the bounded `p = q`
    /// controls.
    pub control: BTreeMap<String, f64>,
}

/// The thresholds shipped with the crate.
pub const DEFAULT_THRESHOLDS: &str = include_str!("../thresholds.toml");

pub fn default_thresholds() -> Thresholds {
    parse_thresholds(DEFAULT_THRESHOLDS).expect("shipped thresholds parse")
}

pub fn parse_thresholds(text: &str) -> Result<Thresholds, ReportError> {
    toml::from_str(text).map_err(|e| ReportError::Thresholds(e.to_string()))
}

pub fn load_thresholds(path: &Path) -> Result<Thresholds, ReportError> {
    let text = std::fs::read_to_string(path)?;
    parse_thresholds(&text)
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    /// Overrides every entry's grid resolution when set.
    pub grid_override: Option<usize>,
    /// Overrides every entry's box half-width when set.
    pub box_override: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub filter: Option<String>,
    pub thresholds: Thresholds,
    /// Sphere covering radius for the ellipticity certification.
    pub sphere_mesh: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            grid_override: None,
            box_override: None,
            out_dir: None,
            format: OutputFormat::Json,
            filter: None,
            thresholds: default_thresholds(),
            sphere_mesh: None,
        }
    }
}

impl RunConfig {
    pub fn check_config(&self) -> CheckConfig {
        CheckConfig {
            seed: self.seed,
            sphere_mesh: self.sphere_mesh,
            ..CheckConfig::default()
        }
    }

    fn grid(&self, params: GridParams) -> GridParams {
        GridParams {
            n_points: self.grid_override.unwrap_or(params.n_points),
            half_width: self.box_override.unwrap_or(params.half_width),
        }
    }
}

// ---------------------------------------------------------------------------
// Structural check reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub n: usize,
    pub k: u32,
    #[serde(rename = "dimV")]
    pub dim_v: usize,
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    pub seed: u64,
    pub elliptic: CertificateReport,
    pub canceling: CertificateReport,
    pub canceling_space_dim: usize,
    pub cocanceling: CertificateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_sum: Option<CertificateReport>,
}

impl CheckReport {
    pub fn any_undecided(&self) -> bool {
        self.elliptic.verdict == Verdict::Undecided
            || self.canceling.verdict == Verdict::Undecided
            || self.cocanceling.verdict == Verdict::Undecided
    }
}

/// Runs the three structural deciders (and optionally the direct-sum
/// hypotheses) on one operator.
pub fn run_check(
    name: &str,
    op: &HomOperator,
    direct_sum: Option<&DirectSumSpec>,
    config: &RunConfig,
) -> Result<CheckReport, ReportError> {
    let cfg = config.check_config();
    let elliptic = is_elliptic(op, &cfg);
    let (space, canceling) = canceling_space(op, &cfg);
    let cocanceling = is_cocanceling(op, &cfg);
    let direct_sum = match direct_sum {
        Some(spec) => Some(CertificateReport::from(&direct_sum_condition(spec, &cfg)?)),
        None => None,
    };
    Ok(CheckReport {
        name: name.to_string(),
        n: op.n(),
        k: op.order(),
        dim_v: op.dim_v(),
        dim_e: op.dim_e(),
        seed: config.seed,
        elliptic: CertificateReport::from(&elliptic),
        canceling: CertificateReport::from(&canceling),
        canceling_space_dim: space.dim(),
        cocanceling: CertificateReport::from(&cocanceling),
        direct_sum,
    })
}

// ---------------------------------------------------------------------------
// Green function test report
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct GreenTestReport {
    pub ell: u32,
    pub n_points: usize,
    pub half_width: f64,
    /// Relative error between the spectrally computed derivative tensor and
    /// the Green reconstruction of the same field, sharing one transform.
    pub multiplier_consistency: f64,
    /// Homogeneity residual of `H` on random rays.
    pub h_homogeneity_residual: f64,
    /// Homogeneity residual of the pointwise kernel `G(2x)` versus
    /// `2^{l-n} G(x)`.
    pub g_homogeneity_residual: f64,
    /// Largest reported pointwise error estimate.
    pub g_error_estimate: f64,
    /// Principal angle between the numeric common kernel of sampled `G(x)`
    /// and the exact common kernel of the adjoint symbol.
    pub kernel_identity_angle: f64,
    pub dc_ratio: f64,
}

/// Band-limited seeded field with zero mean, shared by the multiplier
/// consistency checks.
pub fn band_limited_field(
    n: usize,
    n_points: usize,
    half_width: f64,
    comps: usize,
    seed: u64,
) -> GridField {
    let raw = crate::grid::random_bump_field(n, n_points, half_width, comps, seed, 3, 1.0);
    let spec = crate::spectral::forward(&raw);
    let cut = n_points as f64 / 8.0;
    let base = std::f64::consts::PI / half_width;
    let filtered = crate::spectral::map_frequencies(&spec, comps, |xi, src, dst| {
        let keep = xi.iter().all(|v| v.abs() < cut * base);
        for c in 0..comps {
            dst[c] = if keep {
                src[c]
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            };
        }
    });
    crate::spectral::inverse(&filtered).0
}

pub fn run_green_test(
    op: &HomOperator,
    ell: u32,
    n_points: usize,
    half_width: f64,
    config: &RunConfig,
) -> Result<GreenTestReport, ReportError> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    // Multiplier consistency on a band-limited field: both routes use the
    // same discrete transform, isolating the multiplier algebra.
    let u = band_limited_field(op.n(), n_points, half_width, op.dim_v(), config.seed);
    let f = crate::spectral::apply_operator(op, &u);
    let reconstruction = green::apply_green(op, ell, &f)?;
    let direct = lab::derivative_field(&u, op.order() - ell);
    let direct = if op.order() == ell {
        // Share the DC/Nyquist convention with the multiplier route.
        let spec = crate::spectral::forward(&u);
        let passthrough = crate::spectral::map_frequencies(&spec, op.dim_v(), |_, src, dst| {
            dst.copy_from_slice(src);
        });
        crate::spectral::inverse(&passthrough).0
    } else {
        direct
    };
    let scale = direct.l2_norm().max(1e-300);
    let mut diff = 0.0f64;
    for (a, b) in reconstruction.field.data().iter().zip(direct.data()) {
        diff += (a - b) * (a - b);
    }
    let multiplier_consistency = (diff * reconstruction.field.cell_volume()).sqrt() / scale;

    // Homogeneity of H on random rays.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37);
    let mut h_homogeneity_residual = 0.0f64;
    for _ in 0..10 {
        let xi: Vec<f64> = (0..op.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if xi.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.1 {
            continue;
        }
        let t: f64 = rng.gen_range(1.5..3.0);
        let xi_t: Vec<f64> = xi.iter().map(|v| v * t).collect();
        let h1 = green::eval_h_matrix(op, ell, &xi)?;
        let h2 = green::eval_h_matrix(op, ell, &xi_t)?;
        let expected = h1.map(|v| v * t.powi(-(ell as i32)));
        let residual = (&h2 - &expected).norm() / h1.norm().max(1e-300);
        h_homogeneity_residual = h_homogeneity_residual.max(residual);
    }

    // Pointwise kernel: homogeneity and the common-kernel identity. A
    // dilation by exactly two shifts the dyadic shells by one index, so the
    // ratios include non-dyadic factors to exercise genuinely different
    // windows and quadratures.
    let mut g_homogeneity_residual = 0.0f64;
    let mut g_error_estimate = 0.0f64;
    let mut samples: Vec<nalgebra::DMatrix<f64>> = Vec::new();
    let deg = ell as f64 - op.n() as f64;
    let ratios = [1.5, 2.0, 2.7];
    for i in 0..20 {
        let mut x: Vec<f64> = (0..op.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 0.2 {
            x[0] += 1.0;
        }
        let g = green::eval_g_pointwise(op, ell, &x)?;
        g_error_estimate = g_error_estimate.max(g.error_estimate);
        if i < 3 {
            for t in ratios {
                let x2: Vec<f64> = x.iter().map(|v| t * v).collect();
                let g2 = green::eval_g_pointwise(op, ell, &x2)?;
                let expected = g.matrix.map(|v| v * t.powf(deg));
                let residual = (&g2.matrix - &expected).norm() / g.matrix.norm().max(1e-300);
                g_homogeneity_residual = g_homogeneity_residual.max(residual);
            }
        }
        samples.push(g.matrix);
    }
    let numeric_kernel = green::common_kernel(&samples, 1e-8);
    let (exact_cokernel, _) = cokernel_space(op, &config.check_config());
    let exact_basis = green::orthonormal_basis(&exact_cokernel);
    let kernel_identity_angle = green::max_principal_angle(&numeric_kernel, &exact_basis);

    Ok(GreenTestReport {
        ell,
        n_points,
        half_width,
        multiplier_consistency,
        h_homogeneity_residual,
        g_homogeneity_residual,
        g_error_estimate,
        kernel_identity_angle,
        dc_ratio: reconstruction.dc_ratio,
    })
}

/// Relative `L^2` reconstruction error for the planar gradient of a
/// Gaussian profile: `A(D)u` is sampled from the closed form and pushed
/// through the Green multiplier, and the result is compared with `u`.
pub fn gradient_gaussian_reproduction(n_points: usize, half_width: f64, sigma: f64) -> f64 {
    let u = GridField::from_fn(2, n_points, half_width, 1, |x, out| {
        out[0] = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
    });
    let f = GridField::from_fn(2, n_points, half_width, 2, |x, out| {
        let g = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp();
        out[0] = -x[0] / (sigma * sigma) * g;
        out[1] = -x[1] / (sigma * sigma) * g;
    });
    let grad = crate::operator::stock::gradient(2);
    let rec = green::apply_green(&grad, 1, &f).expect("gradient reconstruction");
    let mut diff = 0.0f64;
    for (a, b) in rec.field.data().iter().zip(u.data()) {
        diff += (a - b) * (a - b);
    }
    (diff * u.cell_volume()).sqrt() / u.l2_norm()
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_quotient: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strictly_increasing: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ratio_per_doubling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_spread: Option<f64>,
    pub breach: bool,
}

#[derive(Debug, Serialize)]
pub struct EntryOutcome {
    pub name: String,
    pub expected_elliptic: bool,
    pub expected_canceling: bool,
    pub classification_ok: bool,
    pub undecided: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_sum_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSummary>,
}

#[derive(Debug, Serialize)]
pub struct SuiteOutcome {
    pub seed: u64,
    pub entries: Vec<EntryOutcome>,
    pub exit_code: i32,
}

/// The direction of the common range used by a dilation family: first basis
/// vector of the stabilized range intersection.
pub fn blowup_direction(
    op: &HomOperator,
    cfg: &CheckConfig,
) -> Option<Vec<crate::exact::Rational>> {
    let (space, _) = canceling_space(op, cfg);
    if space.is_zero() {
        None
    } else {
        Some(space.basis_columns().remove(0))
    }
}

/// The `(xi, v)` pair used by an oscillation family: an exact rank-deficient
/// frequency from the ellipticity decider and a kernel vector there.
pub fn oscillation_witness(
    op: &HomOperator,
    cfg: &CheckConfig,
) -> Option<(Vec<crate::exact::Rational>, Vec<crate::exact::Rational>)> {
    let cert = is_elliptic(op, cfg);
    let Some(crate::certificate::Witness::Vector(xi)) = cert.witness else {
        return None;
    };
    let kernel = op.symbol(&xi).kernel_basis();
    if kernel.cols() == 0 {
        return None;
    }
    Some((xi, kernel.column(0)))
}

pub const SUITE_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const SUITE_SCALES: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
pub const SUITE_BUMP_SEEDS: usize = 10;

fn suite_seeds(base: u64) -> Vec<u64> {
    (0..SUITE_BUMP_SEEDS as u64)
        .map(|i| base.wrapping_add(i))
        .collect()
}

fn run_entry(entry: &CatalogEntry, config: &RunConfig) -> Result<EntryOutcome, ReportError> {
    let cfg = config.check_config();
    let report = run_check(
        entry.name,
        &entry.operator,
        entry.direct_sum.as_ref(),
        config,
    )?;
    let classification_ok = report.elliptic.verdict
        == if entry.expected_elliptic {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
        && report.canceling.verdict
            == if entry.expected_canceling {
                Verdict::Holds
            } else {
                Verdict::Fails
            };
    let direct_sum_ok = report
        .direct_sum
        .as_ref()
        .map(|c| c.verdict == Verdict::Holds);
    let undecided = report.any_undecided();
    if let Some(dir) = &config.out_dir {
        write_atomic(
            &dir.join(format!("{}.check.json", entry.name)),
            serde_json::to_string_pretty(&report).unwrap().as_bytes(),
        )?;
    }

    let experiment = match &entry.experiment {
        Experiment::ClassifyOnly => None,
        Experiment::HardySufficiency { grid } => {
            let grid = config.grid(*grid);
            let run = lab::hardy_sufficiency_run(
                &entry.operator,
                grid.n_points,
                grid.half_width,
                &suite_seeds(config.seed),
                &SUITE_SCALES,
            )?;
            let threshold = *config
                .thresholds
                .sufficiency
                .get(entry.name)
                .unwrap_or(&f64::INFINITY);
            if let Some(dir) = &config.out_dir {
                let mut csv = String::from("seed,scale,lhs,rhs,quotient\n");
                for (seed, scale, row) in &run.rows {
                    csv.push_str(&format!(
                        "{seed},{scale:.6e},{:.12e},{:.12e},{:.12e}\n",
                        row.lhs, row.rhs, row.quotient
                    ));
                }
                write_atomic(
                    &dir.join(format!("{}.hardy.csv", entry.name)),
                    csv.as_bytes(),
                )?;
            }
            Some(ExperimentSummary {
                kind: "hardy_sufficiency".to_string(),
                max_quotient: Some(run.max_quotient),
                threshold: Some(threshold),
                strictly_increasing: None,
                min_ratio_per_doubling: None,
                control_spread: None,
                breach: {
                    let within = run.max_quotient <= threshold;
                    !within
                },
            })
        }
        Experiment::Blowup { grid, q } => {
            let grid = config.grid(*grid);
            let e = blowup_direction(&entry.operator, &cfg).ok_or_else(|| {
                ReportError::Thresholds(format!("entry {} has no blow-up direction", entry.name))
            })?;
            let ell = entry.operator.order().min(entry.operator.n() as u32 - 1);
            let series = lab::blowup_family(
                &entry.operator,
                &e,
                ell,
                *q,
                &SUITE_LAMBDAS,
                grid.n_points,
                grid.half_width,
                &cfg,
            )?;
            summarize_family(entry, config, &series, &config.thresholds.blowup, "blowup")?
        }
        Experiment::Oscillation { grid, p, q } => {
            let grid = config.grid(*grid);
            let (xi, v) = oscillation_witness(&entry.operator, &cfg).ok_or_else(|| {
                ReportError::Thresholds(format!("entry {} has no oscillation witness", entry.name))
            })?;
            let series = lab::oscillation_family(
                &entry.operator,
                &xi,
                &v,
                *p,
                *q,
                &SUITE_LAMBDAS,
                grid.n_points,
                grid.half_width,
            )?;
            let mut summary = summarize_family(
                entry,
                config,
                &series,
                &config.thresholds.oscillation,
                "oscillation",
            )?
            .expect("family summary");
            // Bounded pure-Hardy control at p = q = 1.
            let control = lab::oscillation_family(
                &entry.operator,
                &xi,
                &v,
                1.0,
                1.0,
                &SUITE_LAMBDAS,
                grid.n_points,
                grid.half_width,
            )?;
            let quotients: Vec<f64> = control.rows.iter().map(|r| r.quotient).collect();
            let spread = quotients.iter().cloned().fold(0.0f64, f64::max)
                / quotients.iter().cloned().fold(f64::INFINITY, f64::min);
            let allowed = *config
                .thresholds
                .control
                .get(entry.name)
                .unwrap_or(&f64::INFINITY);
            summary.control_spread = Some(spread);
            let within = spread <= allowed; // non-finite spreads breach
            summary.breach = summary.breach || !within;
            if let Some(dir) = &config.out_dir {
                write_atomic(
                    &dir.join(format!("{}.control.csv", entry.name)),
                    control.to_csv().as_bytes(),
                )?;
            }
            Some(summary)
        }
    };

    Ok(EntryOutcome {
        name: entry.name.to_string(),
        expected_elliptic: entry.expected_elliptic,
        expected_canceling: entry.expected_canceling,
        classification_ok,
        undecided,
        direct_sum_ok,
        experiment,
    })
}

fn summarize_family(
    entry: &CatalogEntry,
    config: &RunConfig,
    series: &ExperimentSeries,
    thresholds: &BTreeMap<String, f64>,
    kind: &str,
) -> Result<Option<ExperimentSummary>, ReportError> {
    let threshold = *thresholds.get(entry.name).unwrap_or(&1.0);
    let increasing = series.strictly_increasing();
    let ratio = series.min_ratio_per_doubling();
    if let Some(dir) = &config.out_dir {
        write_atomic(
            &dir.join(format!("{}.{kind}.csv", entry.name)),
            series.to_csv().as_bytes(),
        )?;
    }
    let breach = !increasing || ratio.is_none_or(|r| r < threshold);
    Ok(Some(ExperimentSummary {
        kind: kind.to_string(),
        max_quotient: None,
        threshold: Some(threshold),
        strictly_increasing: Some(increasing),
        min_ratio_per_doubling: ratio,
        control_spread: None,
        breach,
    }))
}

fn entry_matches_filter(entry: &CatalogEntry, filter: &str) -> bool {
    match filter {
        "elliptic-only" => entry.expected_elliptic,
        "canceling-only" => entry.expected_canceling,
        "non-elliptic" => !entry.expected_elliptic,
        _ => entry.name.contains(filter),
    }
}

/// Runs every catalog entry through its checks and its experiment; writes
/// per-entry artifacts when an output directory is configured, and returns
/// the aggregated outcome with the process exit code.
pub fn run_suite(config: &RunConfig) -> Result<SuiteOutcome, ReportError> {
    use rayon::prelude::*;
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let entries: Vec<CatalogEntry> = crate::catalog::builtin()
        .into_iter()
        .filter(|e| {
            config
                .filter
                .as_deref()
                .is_none_or(|f| entry_matches_filter(e, f))
        })
        .collect();
    let outcomes: Result<Vec<EntryOutcome>, ReportError> = entries
        .par_iter()
        .map(|entry| run_entry(entry, config))
        .collect();
    let entries = outcomes?;
    let any_undecided = entries.iter().any(|e| e.undecided);
    let any_breach = entries.iter().any(|e| {
        !e.classification_ok
            || e.direct_sum_ok == Some(false)
            || e.experiment.as_ref().is_some_and(|x| x.breach)
    });
    let exit_code = if any_breach {
        exit_codes::REGRESSION
    } else if any_undecided {
        exit_codes::UNDECIDED
    } else {
        exit_codes::OK
    };
    Ok(SuiteOutcome {
        seed: config.seed,
        entries,
        exit_code,
    })
}

/// Writes a file atomically: temporary sibling plus rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Analytic direction witnesses for subspace probes, exposed for the CLI.
pub fn subspace_from_columns(cols: &[Vec<crate::exact::Rational>]) -> Subspace {
    let rows = cols.first().map_or(0, Vec::len);
    let mut m = crate::exact::ExactMatrix::zeros(rows, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            m[(r, c)] = v.clone();
        }
    }
    Subspace::from_columns(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::stock;

    #[test]
    fn thresholds_parse_and_cover_catalog() {
        let t = default_thresholds();
        for entry in crate::catalog::builtin() {
            match entry.experiment {
                Experiment::HardySufficiency { .. } => {
                    assert!(
                        t.sufficiency.contains_key(entry.name),
                        "missing sufficiency threshold for {}",
                        entry.name
                    );
                }
                Experiment::Blowup { .. } => {
                    assert!(t.blowup.contains_key(entry.name));
                }
                Experiment::Oscillation { .. } => {
                    assert!(t.oscillation.contains_key(entry.name));
                    assert!(t.control.contains_key(entry.name));
                }
                Experiment::ClassifyOnly => {}
            }
        }
        assert!(parse_thresholds("not toml [").is_err());
    }

    #[test]
    fn check_report_shape() {
        let config = RunConfig::default();
        let report = run_check("gradient_r2", &stock::gradient(2), None, &config).unwrap();
        assert_eq!(report.elliptic.verdict, Verdict::Holds);
        assert_eq!(report.canceling.verdict, Verdict::Holds);
        assert_eq!(report.canceling_space_dim, 0);
        assert!(!report.any_undecided());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"verdict\":\"HOLDS\""));
    }

    #[test]
    fn check_reports_are_byte_stable() {
        let config = RunConfig::default();
        let a = crate::catalog::mazya_operator(2);
        let r1 = serde_json::to_string(&run_check("m", &a, None, &config).unwrap()).unwrap();
        let r2 = serde_json::to_string(&run_check("m", &a, None, &config).unwrap()).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn gaussian_reproduction_is_small() {
        let err = gradient_gaussian_reproduction(128, 8.0, 0.15);
        assert!(err <= 0.05, "relative error {err}");
    }

    #[test]
    fn multiplier_consistency_for_gradient() {
        let config = RunConfig::default();
        let report = run_green_test(&stock::gradient(2), 1, 64, 8.0, &config).unwrap();
        assert!(
            report.multiplier_consistency <= 1e-6,
            "consistency {}",
            report.multiplier_consistency
        );
        assert!(report.h_homogeneity_residual < 1e-10);
        assert!(report.kernel_identity_angle < 1e-6);
    }

    #[test]
    fn filters() {
        let entries = crate::catalog::builtin();
        let elliptic: Vec<_> = entries
            .iter()
            .filter(|e| entry_matches_filter(e, "elliptic-only"))
            .collect();
        assert!(elliptic.iter().all(|e| e.expected_elliptic));
        assert!(!elliptic.is_empty());
        let named: Vec<_> = entries
            .iter()
            .filter(|e| entry_matches_filter(e, "gradient"))
            .collect();
        assert_eq!(named.len(), 2);
    }
}
