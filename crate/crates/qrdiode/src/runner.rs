//! Configuration, sweep orchestration, truncation-convergence control,
//! and the figure-reproduction pipelines behind the CLI.
//!
//! Everything here is deterministic by construction: parameter grids
//! are explicit, work may fan out across a thread pool but results are
//! gathered in grid order, floats are printed with a fixed significant
//! digit count, and manifests carry no timestamps. Re-running a command
//! must produce byte-identical files regardless of `QRDIODE_THREADS`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dissipation::build_liouvillian;
use crate::models::{CouplerKind, ModelParams, RabiParams, TwoQubitParams};
use crate::numerics::QOperator;
use crate::observables::{ObservableRecord, PointSolver, TransitionLedgerEntry};
use crate::steady::{evolve_to_steady, EvolveOptions, DEFAULT_NULLSPACE_TOL};
use crate::{Error, Result};

/// Threshold of the coupling-strength rule picking the default Fock
/// truncation: weak-coupling ladders are flat by N = 10-12, while
/// couplings near the collapse bound are run at the documented N = 40.
const N_FOCK_RULE_SPLIT: f64 = 0.15;
const N_FOCK_WEAK: usize = 20;
const N_FOCK_STRONG: usize = 40;

/// Successive relative change below this counts as a converged ladder.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Truncations tried by `n_fock = "auto"`, in order.
const AUTO_LADDER: [usize; 5] = [5, 10, 20, 40, 80];

/// Currents whose magnitude stays under this are treated as exact zeros
/// by the convergence ladder (an all-zero observable is converged at
/// any truncation).
const LADDER_ZERO_FLOOR: f64 = 1e-16;

/// CSV column order; fixed contract, never reordered.
pub const CSV_COLUMNS: [&str; 16] = [
    "swept_param",
    "T_L",
    "T_R",
    "q_L",
    "q_R",
    "q_f",
    "q_r",
    "R",
    "D_f",
    "D_r",
    "gammaD_f",
    "gammaD_r",
    "R_n",
    "n_fock",
    "residual",
    "error",
];

// ---------------------------------------------------------------------
// Configuration file schema
// ---------------------------------------------------------------------

/// Fock-truncation setting: a fixed photon cutoff or the literal string
/// `"auto"` requesting a convergence ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockSetting {
    Auto,
    Fixed(usize),
}

impl Serialize for FockSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FockSetting::Auto => s.serialize_str("auto"),
            FockSetting::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for FockSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = FockSetting;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a positive integer or the string \"auto\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<FockSetting, E> {
                Ok(FockSetting::Fixed(v as usize))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<FockSetting, E> {
                if v < 0 {
                    return Err(E::custom("n_fock must be nonnegative"));
                }
                Ok(FockSetting::Fixed(v as usize))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<FockSetting, E> {
                if v == "auto" {
                    Ok(FockSetting::Auto)
                } else {
                    Err(E::custom(format!(
                        "n_fock must be an integer or \"auto\", got \"{v}\""
                    )))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// One of `two_photon_rabi`, `ising_zz`, `asymmetric_zx`, `dm`.
    pub kind: String,
    #[serde(rename = "omega_L")]
    pub omega_l: f64,
    #[serde(rename = "omega_R")]
    pub omega_r: f64,
    pub g: f64,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_fock: Option<FockSetting>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: "two_photon_rabi".into(),
            omega_l: 1.0,
            omega_r: 0.1,
            g: 0.015,
            theta: 0.0,
            n_fock: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub gamma: f64,
    #[serde(rename = "T_L")]
    pub t_l: f64,
    #[serde(rename = "T_R")]
    pub t_r: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            gamma: 1e-4,
            t_l: 0.5,
            t_r: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsSection {
    /// Bohr-frequency grouping width; omitted = spectrum-scaled default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deg_tol: Option<f64>,
    pub nullspace_tol: f64,
    /// Cross-check every solved point against RK4 time evolution.
    pub oracle: bool,
    /// RK4 step; omitted = stability-bound default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk4_dt: Option<f64>,
    /// Evolution horizon; omitted = 50 slowest-rate lifetimes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            deg_tol: None,
            nullspace_tol: DEFAULT_NULLSPACE_TOL,
            oracle: false,
            rk4_dt: None,
            t_final: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Significant digits for floating-point CSV fields.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            precision: 12,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub baths: BathSection,
    pub numerics: NumericsSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match self.model.kind.as_str() {
            "two_photon_rabi" => {}
            "ising_zz" | "asymmetric_zx" | "dm" => {
                if self.model.theta != 0.0 {
                    return Err(Error::Config(format!(
                        "theta applies only to the two_photon_rabi model, not {}",
                        self.model.kind
                    )));
                }
                if self.model.n_fock.is_some() {
                    return Err(Error::Config(format!(
                        "n_fock applies only to the two_photon_rabi model, not {}",
                        self.model.kind
                    )));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown model kind \"{other}\" (expected two_photon_rabi, \
                     ising_zz, asymmetric_zx, or dm)"
                )));
            }
        }
        if !(self.output.precision >= 3 && self.output.precision <= 17) {
            return Err(Error::Config(format!(
                "precision {} outside [3, 17]",
                self.output.precision
            )));
        }
        if !(self.numerics.nullspace_tol > 0.0) {
            return Err(Error::Config("nullspace_tol must be positive".into()));
        }
        for (name, v) in [
            ("gamma", self.baths.gamma),
            ("T_L", self.baths.t_l),
            ("T_R", self.baths.t_r),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        // Model-value validation (collapse bound, positivity) runs via
        // the model's own constructor on a trial build.
        let _ = self.params_with_n(self.fixed_or_rule_n())?.build()?;
        Ok(())
    }

    /// Default-rule truncation ignoring an `auto` request.
    fn fixed_or_rule_n(&self) -> usize {
        match self.model.n_fock {
            Some(FockSetting::Fixed(n)) => n,
            _ => {
                if self.model.g <= N_FOCK_RULE_SPLIT {
                    N_FOCK_WEAK
                } else {
                    N_FOCK_STRONG
                }
            }
        }
    }

    fn params_with_n(&self, n_fock: usize) -> Result<ModelParams> {
        match self.model.kind.as_str() {
            "two_photon_rabi" => Ok(ModelParams::Rabi(RabiParams {
                omega_l: self.model.omega_l,
                omega_r: self.model.omega_r,
                g: self.model.g,
                theta: self.model.theta,
                n_fock,
            })),
            "ising_zz" => Ok(self.two_qubit(CouplerKind::IsingZZ)),
            "asymmetric_zx" => Ok(self.two_qubit(CouplerKind::AsymmetricZX)),
            "dm" => Ok(self.two_qubit(CouplerKind::Dm)),
            other => Err(Error::Config(format!("unknown model kind \"{other}\""))),
        }
    }

    fn two_qubit(&self, kind: CouplerKind) -> ModelParams {
        ModelParams::TwoQubit(TwoQubitParams {
            kind,
            omega_l: self.model.omega_l,
            omega_r: self.model.omega_r,
            g: self.model.g,
        })
    }

    /// Materializes model parameters, resolving `n_fock = "auto"` with a
    /// convergence ladder at the configured temperatures. The ladder
    /// report (when one ran) is returned for the manifest.
    pub fn resolve_params(&self) -> Result<(ModelParams, Option<ConvergenceReport>)> {
        if self.model.kind != "two_photon_rabi" {
            return Ok((self.params_with_n(0)?, None));
        }
        match self.model.n_fock {
            Some(FockSetting::Auto) => {
                let report = convergence_check(self, &AUTO_LADDER)?;
                let n = report.converged_at.unwrap_or(*AUTO_LADDER.last().unwrap());
                Ok((self.params_with_n(n)?, Some(report)))
            }
            _ => Ok((self.params_with_n(self.fixed_or_rule_n())?, None)),
        }
    }

    fn solver_for(&self, params: &ModelParams) -> Result<PointSolver> {
        PointSolver::new(
            params,
            self.baths.gamma,
            self.numerics.deg_tol,
            self.numerics.nullspace_tol,
        )
    }
}

// ---------------------------------------------------------------------
// Single-point run
// ---------------------------------------------------------------------

/// RK4 cross-check summary attached to a point when `oracle = true`.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// L-infinity distance between null-space and evolved populations.
    pub population_l_inf: f64,
    /// Largest off-diagonal magnitude of the evolved density matrix.
    pub max_offdiag: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointOutput {
    pub record: ObservableRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
}

/// Solves the configured parameter point (forward and reverse).
pub fn run_point(config: &RunConfig) -> Result<PointOutput> {
    config.validate()?;
    let (params, convergence) = config.resolve_params()?;
    let solver = config.solver_for(&params)?;
    let record = solver.record(config.baths.t_l, config.baths.t_r)?;
    let oracle = if config.numerics.oracle {
        Some(oracle_check(config, &solver)?)
    } else {
        None
    };
    Ok(PointOutput {
        record,
        oracle,
        convergence,
    })
}

/// Evolves the full generator with RK4 from the maximally mixed state
/// and compares against the null-space populations.
fn oracle_check(config: &RunConfig, solver: &PointSolver) -> Result<OracleReport> {
    let channels = solver.channels_at(config.baths.t_l, config.baths.t_r)?;
    let liouv = build_liouvillian(solver.eigensystem(), &channels, false);
    let dim = solver.eigensystem().dim();
    let mut rho0 = nalgebra::DMatrix::zeros(dim, dim);
    let p = num_complex::Complex64::new(1.0 / dim as f64, 0.0);
    for k in 0..dim {
        rho0[(k, k)] = p;
    }
    let opts = EvolveOptions {
        t_final: config.numerics.t_final,
        dt: config.numerics.rk4_dt,
    };
    let (evolved, _) = evolve_to_steady(&liouv, &QOperator::new(rho0), &opts)?;
    let direct = solver.solve(config.baths.t_l, config.baths.t_r)?;
    let l_inf = direct
        .steady
        .populations
        .iter()
        .zip(evolved.populations.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    Ok(OracleReport {
        population_l_inf: l_inf,
        max_offdiag: evolved.max_offdiag,
    })
}

// ---------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------

/// Parameter axes a sweep may traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    TL,
    TR,
    Theta,
    G,
    OmegaR,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "T_L" => Ok(Self::TL),
            "T_R" => Ok(Self::TR),
            "theta" => Ok(Self::Theta),
            "g" => Ok(Self::G),
            "omega_R" => Ok(Self::OmegaR),
            other => Err(Error::Config(format!(
                "unknown sweep parameter \"{other}\" \
                 (expected T_L, T_R, theta, g, or omega_R)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::TL => "T_L",
            Self::TR => "T_R",
            Self::Theta => "theta",
            Self::G => "g",
            Self::OmegaR => "omega_R",
        }
    }

    /// Whether the axis leaves the model (and thus its eigenbasis)
    /// untouched, allowing one spectral decomposition per sweep.
    fn is_temperature(&self) -> bool {
        matches!(self, Self::TL | Self::TR)
    }
}

/// Evenly spaced grid, endpoints included.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|k| start + step * k as f64).collect();
    // Land exactly on the endpoint regardless of rounding.
    v[count - 1] = stop;
    v
}

#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepGrid {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Config(format!(
                "sweep needs at least 2 points, got {}",
                values.len()
            )));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "sweep values must be strictly increasing".into(),
            ));
        }
        Ok(Self { param, values })
    }

    /// Parses the CLI range syntax `start:stop:count`.
    pub fn from_range(param: SweepParam, range: &str) -> Result<Self> {
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "range must be start:stop:count, got \"{range}\""
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad range start \"{}\"", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad range stop \"{}\"", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad range count \"{}\"", parts[2])))?;
        if !(stop > start) {
            return Err(Error::Config(format!(
                "range stop {stop} must exceed start {start}"
            )));
        }
        Self::new(param, linspace(start, stop, count))
    }
}

/// One sweep row: either a full record or the error that point hit.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<ObservableRecord, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Worker pool sized by `QRDIODE_THREADS` (unset or unparsable: library
/// default). Output ordering never depends on the pool size.
fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("QRDIODE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool construction")
}

/// Runs the grid, in parallel across points, gathering rows in grid
/// order. A failed point becomes an error row, never an abort.
pub fn sweep(config: &RunConfig, grid: &SweepGrid) -> Result<SweepResult> {
    use rayon::prelude::*;

    config.validate()?;
    let (base_params, _) = config.resolve_params()?;

    // Validate every grid point eagerly so a bad grid is a config error
    // (exit 2), not a partial failure.
    for &v in &grid.values {
        point_config(config, grid.param, v)?;
    }

    let pool = thread_pool();
    let rows: Vec<SweepRow> = pool.install(|| {
        if grid.param.is_temperature() {
            // One spectral decomposition serves the whole sweep.
            let solver = match config.solver_for(&base_params) {
                Ok(s) => s,
                Err(e) => {
                    return grid
                        .values
                        .iter()
                        .map(|&v| SweepRow {
                            value: v,
                            outcome: Err(e.to_string()),
                        })
                        .collect();
                }
            };
            grid.values
                .par_iter()
                .map(|&v| {
                    let (t_l, t_r) = match grid.param {
                        SweepParam::TL => (v, config.baths.t_r),
                        _ => (config.baths.t_l, v),
                    };
                    SweepRow {
                        value: v,
                        outcome: solver.record(t_l, t_r).map_err(|e| e.to_string()),
                    }
                })
                .collect()
        } else {
            grid.values
                .par_iter()
                .map(|&v| SweepRow {
                    value: v,
                    outcome: run_model_point(config, grid.param, v),
                })
                .collect()
        }
    });

    Ok(SweepResult {
        param: grid.param,
        rows,
    })
}

/// The run configuration with one model axis overridden.
fn point_config(config: &RunConfig, param: SweepParam, value: f64) -> Result<RunConfig> {
    let mut c = config.clone();
    match param {
        SweepParam::TL => c.baths.t_l = value,
        SweepParam::TR => c.baths.t_r = value,
        SweepParam::Theta => c.model.theta = value,
        SweepParam::G => c.model.g = value,
        SweepParam::OmegaR => c.model.omega_r = value,
    }
    c.validate()?;
    Ok(c)
}

fn run_model_point(
    config: &RunConfig,
    param: SweepParam,
    value: f64,
) -> std::result::Result<ObservableRecord, String> {
    let c = point_config(config, param, value).map_err(|e| e.to_string())?;
    let (params, _) = c.resolve_params().map_err(|e| e.to_string())?;
    let solver = c.solver_for(&params).map_err(|e| e.to_string())?;
    solver
        .record(c.baths.t_l, c.baths.t_r)
        .map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------

/// `digits`-significant-digit scientific notation, stable across runs.
fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    format!("{:.*e}", digits.saturating_sub(1).max(1), x)
}

/// Commas and newlines would break the row structure.
fn sanitize_error(msg: &str) -> String {
    msg.replace(',', ";").replace(['\n', '\r'], " ")
}

/// Renders one record as a CSV row under the fixed column contract.
fn record_row(swept_value: f64, rec: &ObservableRecord, digits: usize) -> String {
    let mut err_notes: Vec<String> = Vec::new();
    let ratio = match rec.rectification {
        Some(r) => fmt_sig(r, digits),
        None => {
            err_notes.push("R undefined: |q_f - q_r| below ratio floor".into());
            "nan".into()
        }
    };
    let ratio_n = match rec.photon_asymmetry {
        Some(r) => fmt_sig(r, digits),
        None => {
            err_notes.push("R_n undefined: |D_f + D_r| below ratio floor".into());
            "nan".into()
        }
    };
    let n_fock = rec
        .n_fock
        .map(|n| n.to_string())
        .unwrap_or_default();
    let mut row = String::new();
    let _ = write!(
        row,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_sig(swept_value, digits),
        fmt_sig(rec.t_l, digits),
        fmt_sig(rec.t_r, digits),
        fmt_sig(rec.q_l, digits),
        fmt_sig(rec.q_r, digits),
        fmt_sig(rec.q_f, digits),
        fmt_sig(rec.q_rev, digits),
        ratio,
        fmt_sig(rec.d_f, digits),
        fmt_sig(rec.d_r, digits),
        fmt_sig(rec.gamma * rec.d_f, digits),
        fmt_sig(rec.gamma * rec.d_r, digits),
        ratio_n,
        n_fock,
        fmt_sig(rec.residual, digits),
        sanitize_error(&err_notes.join("; ")),
    );
    row
}

fn error_row(swept_value: f64, t_l: f64, t_r: f64, msg: &str, digits: usize) -> String {
    format!(
        "{},{},{},,,,,,,,,,,,,{}",
        fmt_sig(swept_value, digits),
        fmt_sig(t_l, digits),
        fmt_sig(t_r, digits),
        sanitize_error(msg)
    )
}

/// Serializes a sweep to CSV text (header + one row per grid point).
pub fn sweep_csv(config: &RunConfig, result: &SweepResult) -> String {
    let digits = config.output.precision;
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for row in &result.rows {
        match &row.outcome {
            Ok(rec) => out.push_str(&record_row(row.value, rec, digits)),
            Err(msg) => {
                // Temperatures of the failed point when the axis is one.
                let (t_l, t_r) = match result.param {
                    SweepParam::TL => (row.value, config.baths.t_r),
                    SweepParam::TR => (config.baths.t_l, row.value),
                    _ => (config.baths.t_l, config.baths.t_r),
                };
                out.push_str(&error_row(row.value, t_l, t_r, msg, digits));
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------
// Convergence ladder
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n_fock: usize,
    pub q_l: f64,
    /// |change| relative to the previous rung; None on the first.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// First truncation whose change from the previous rung fell below
    /// the threshold; None means the ladder never settled.
    pub converged_at: Option<usize>,
}

/// Runs the heat current up a truncation ladder at the configured
/// temperatures. Non-convergence is reported, not fatal.
pub fn convergence_check(config: &RunConfig, n_list: &[usize]) -> Result<ConvergenceReport> {
    if config.model.kind != "two_photon_rabi" {
        return Err(Error::Config(
            "convergence ladder applies only to the two_photon_rabi model".into(),
        ));
    }
    if n_list.is_empty() {
        return Err(Error::Config("empty truncation list".into()));
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(
            "truncation list must be strictly increasing".into(),
        ));
    }

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    let mut converged_at = None;
    for &n in n_list {
        let params = config.params_with_n(n)?;
        let solver = config.solver_for(&params)?;
        let q_l = solver
            .solve(config.baths.t_l, config.baths.t_r)?
            .currents
            .q_l;
        let relative_change = rows.last().map(|prev: &ConvergenceRow| {
            let scale = q_l.abs().max(prev.q_l.abs());
            if scale <= LADDER_ZERO_FLOOR {
                0.0
            } else {
                (q_l - prev.q_l).abs() / scale
            }
        });
        if converged_at.is_none() {
            if let Some(rel) = relative_change {
                if rel < CONVERGENCE_TOL {
                    converged_at = Some(n);
                }
            }
        }
        rows.push(ConvergenceRow {
            n_fock: n,
            q_l,
            relative_change,
        });
    }
    Ok(ConvergenceReport { rows, converged_at })
}

// ---------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------

/// Deterministic run manifest written next to every file set. Carries
/// the full configuration and version, never a timestamp.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: String,
    config: &'a RunConfig,
    columns: Vec<&'static str>,
    files: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    notes: BTreeMap<String, String>,
}

fn write_manifest(
    dir: &Path,
    stem: &str,
    command: String,
    config: &RunConfig,
    files: &[PathBuf],
    notes: BTreeMap<String, String>,
) -> Result<PathBuf> {
    let manifest = Manifest {
        tool: "qrdiode",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        columns: CSV_COLUMNS.to_vec(),
        files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string())
            })
            .collect(),
        notes,
    };
    let path = dir.join(format!("{stem}_manifest.json"));
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

/// Writes a sweep CSV plus its manifest; returns (csv path, failures).
pub fn write_sweep(
    config: &RunConfig,
    grid: &SweepGrid,
    dir: &Path,
) -> Result<(PathBuf, usize)> {
    let result = sweep(config, grid)?;
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("sweep_{}.csv", grid.param.name()));
    std::fs::write(&csv_path, sweep_csv(config, &result))?;
    let mut notes = BTreeMap::new();
    notes.insert("swept_param".into(), grid.param.name().to_string());
    write_manifest(
        dir,
        &format!("sweep_{}", grid.param.name()),
        format!(
            "sweep --param {} --range {}:{}:{}",
            grid.param.name(),
            grid.values[0],
            grid.values[grid.values.len() - 1],
            grid.values.len()
        ),
        config,
        std::slice::from_ref(&csv_path),
        notes,
    )?;
    Ok((csv_path, result.failures()))
}

// ---------------------------------------------------------------------
// Figure pipelines
// ---------------------------------------------------------------------

#[derive(Debug)]
pub struct FigureReport {
    pub files: Vec<PathBuf>,
    pub failures: usize,
}

/// Temperature axis shared by every temperature-resolved figure.
fn default_t_grid() -> Vec<f64> {
    linspace(0.05, 1.0, 39)
}

/// Coupling-axis grid of the mechanism-comparison figure.
fn fig10_g_grid() -> Vec<f64> {
    linspace(0.005, 0.45, 30)
}

const THETA_CURVES: [(f64, &str); 3] = [
    (0.0, "th0"),
    (std::f64::consts::FRAC_PI_8, "thpi8"),
    (std::f64::consts::FRAC_PI_4, "thpi4"),
];

const OMEGA_R_CURVES: [(f64, &str); 6] = [
    (0.05, "wr0p05"),
    (0.1, "wr0p1"),
    (0.5, "wr0p5"),
    (1.0, "wr1"),
    (2.0, "wr2"),
    (5.0, "wr5"),
];

const G_CURVES: [(f64, &str); 5] = [
    (0.015, "g0p015"),
    (0.05, "g0p05"),
    (0.15, "g0p15"),
    (0.3, "g0p3"),
    (0.45, "g0p45"),
];

fn rabi_config(omega_r: f64, g: f64, theta: f64) -> RunConfig {
    let mut c = RunConfig::default();
    c.model.omega_r = omega_r;
    c.model.g = g;
    c.model.theta = theta;
    c
}

/// Sweeps T_L over the default grid with T_R held at the equilibrium
/// reference; each row carries the temperature-swapped reverse run.
fn temperature_curve(
    config: &RunConfig,
    dir: &Path,
    file: &str,
    files: &mut Vec<PathBuf>,
    failures: &mut usize,
) -> Result<()> {
    let grid = SweepGrid::new(SweepParam::TL, default_t_grid())?;
    let result = sweep(config, &grid)?;
    *failures += result.failures();
    let path = dir.join(file);
    std::fs::write(&path, sweep_csv(config, &result))?;
    files.push(path);
    Ok(())
}

/// Emits the figure's file set into `dir`. Figure ids follow the layout
/// of the reproduced plots: fig2/fig3 heat transport by angle, fig4/fig5
/// by qubit frequency and coupling, fig6-fig8 the photon analogues,
/// fig9 the truncation study, fig10 the mechanism comparison, fig11 the
/// transition-rate decomposition.
pub fn run_figure(id: &str, dir: &Path) -> Result<FigureReport> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut failures = 0usize;
    let mut notes = BTreeMap::new();
    let manifest_config;

    match id {
        // Heat currents and rectification vs temperature, theta curves.
        "fig2" | "fig3" | "fig6" => {
            // fig6 is the photon-flux view of the same protocol; the
            // row schema already carries both observables.
            let gs: &[(f64, &str)] = if id == "fig2" {
                &[(0.015, "")]
            } else if id == "fig3" {
                &[(0.45, "")]
            } else {
                &[(0.015, "g0p015_"), (0.45, "g0p45_")]
            };
            for &(g, gtag) in gs {
                for &(wr, wtag) in &[(0.1, "wr0p1"), (2.0, "wr2")] {
                    for &(theta, ttag) in &THETA_CURVES {
                        let c = rabi_config(wr, g, theta);
                        temperature_curve(
                            &c,
                            dir,
                            &format!("{id}_{gtag}{wtag}_{ttag}.csv"),
                            &mut files,
                            &mut failures,
                        )?;
                    }
                }
            }
            manifest_config = rabi_config(0.1, if id == "fig3" { 0.45 } else { 0.015 }, 0.0);
            notes.insert(
                "protocol".into(),
                "swept_param is T_L with T_R = 0.5; q_f/D_f from the as-given run, \
                 q_r/D_r from the temperature-swapped run"
                    .into(),
            );
        }
        // Heat transport vs temperature for a qubit-frequency family.
        "fig4" => {
            for &(g, gtag) in &[(0.015, "g0p015"), (0.45, "g0p45")] {
                for &(wr, wtag) in &OMEGA_R_CURVES {
                    let c = rabi_config(wr, g, 0.0);
                    temperature_curve(
                        &c,
                        dir,
                        &format!("fig4_{gtag}_{wtag}.csv"),
                        &mut files,
                        &mut failures,
                    )?;
                }
            }
            manifest_config = rabi_config(0.1, 0.015, 0.0);
        }
        // Heat transport vs temperature for a coupling family.
        "fig5" | "fig7" => {
            // fig7 is the photon-flux view of the fig5 protocol.
            for &(wr, wtag) in &[(0.1, "wr0p1"), (2.0, "wr2")] {
                for &(g, gtag) in &G_CURVES {
                    let c = rabi_config(wr, g, 0.0);
                    temperature_curve(
                        &c,
                        dir,
                        &format!("{id}_{wtag}_{gtag}.csv"),
                        &mut files,
                        &mut failures,
                    )?;
                }
            }
            manifest_config = rabi_config(0.1, 0.015, 0.0);
        }
        // Photon fluxes vs temperature for a qubit-frequency family in
        // the ultrastrong regime.
        "fig8" => {
            for &(wr, wtag) in &OMEGA_R_CURVES {
                let c = rabi_config(wr, 0.45, 0.0);
                temperature_curve(
                    &c,
                    dir,
                    &format!("fig8_{wtag}.csv"),
                    &mut files,
                    &mut failures,
                )?;
            }
            manifest_config = rabi_config(0.1, 0.45, 0.0);
        }
        // Truncation study plus the allowed-transition tables.
        "fig9" => {
            for &(wr, wtag) in &[(0.1, "wr0p1"), (2.0, "wr2")] {
                for &n in &[2usize, 5, 10, 20] {
                    let mut c = rabi_config(wr, 0.015, 0.0);
                    c.model.n_fock = Some(FockSetting::Fixed(n));
                    temperature_curve(
                        &c,
                        dir,
                        &format!("fig9_{wtag}_n{n}.csv"),
                        &mut files,
                        &mut failures,
                    )?;
                }
                let mut c = rabi_config(wr, 0.015, 0.0);
                c.model.n_fock = Some(FockSetting::Fixed(2));
                let path = dir.join(format!("fig9_transitions_{wtag}.csv"));
                std::fs::write(&path, transition_table_csv(&c)?)?;
                files.push(path);
            }
            manifest_config = rabi_config(0.1, 0.015, 0.0);
            notes.insert(
                "transitions".into(),
                "fig9_transitions_*.csv lists the allowed transitions at n_fock = 2 \
                 (columns bath, lower, upper, omega, weight)"
                    .into(),
            );
        }
        // Rectification vs coupling strength for all four mechanisms.
        "fig10" => {
            failures += fig10(dir, &mut files)?;
            manifest_config = RunConfig::default();
            notes.insert(
                "protocol".into(),
                "T_L = 0.1, T_R = 0.5 forward and swapped for reverse; left panel \
                 omega_R = 0.1 for every mechanism, right panel omega_R = 2 for \
                 two_photon_rabi and omega_R = 1 for the two-qubit mechanisms"
                    .into(),
            );
        }
        // Transition-rate decomposition vs temperature at n_fock = 2.
        "fig11" => {
            for &(wr, wtag) in &[(0.1, "wr0p1"), (2.0, "wr2")] {
                for &(reverse, dtag) in &[(false, "forward"), (true, "reverse")] {
                    let mut c = rabi_config(wr, 0.015, 0.0);
                    c.model.n_fock = Some(FockSetting::Fixed(2));
                    let path = dir.join(format!("fig11_{wtag}_{dtag}.csv"));
                    std::fs::write(&path, ledger_curve_csv(&c, reverse)?)?;
                    files.push(path);
                }
            }
            manifest_config = rabi_config(0.1, 0.015, 0.0);
            notes.insert(
                "columns".into(),
                "T_L, T_R, bath, lower, upper, omega, net_rate, flux (per-transition \
                 energy flux; a bath's flux entries sum to its heat current)"
                    .into(),
            );
        }
        other => {
            return Err(Error::Config(format!(
                "unknown figure id \"{other}\" (expected fig2..fig11)"
            )));
        }
    }

    write_manifest(
        dir,
        id,
        format!("figure --id {id}"),
        &manifest_config,
        &files,
        notes,
    )?;
    Ok(FigureReport { files, failures })
}

/// Mechanism comparison: rectification against coupling strength.
fn fig10(dir: &Path, files: &mut Vec<PathBuf>) -> Result<usize> {
    let mut failures = 0usize;
    let kinds = ["two_photon_rabi", "ising_zz", "asymmetric_zx", "dm"];
    for &(panel, wr_rabi, wr_qubit) in &[("left", 0.1, 0.1), ("right", 2.0, 1.0)] {
        for kind in kinds {
            let mut c = RunConfig::default();
            c.model.kind = kind.into();
            c.model.omega_r = if kind == "two_photon_rabi" {
                wr_rabi
            } else {
                wr_qubit
            };
            c.baths.t_l = 0.1;
            c.baths.t_r = 0.5;
            let grid = SweepGrid::new(SweepParam::G, fig10_g_grid())?;
            let result = sweep(&c, &grid)?;
            failures += result.failures();
            let path = dir.join(format!("fig10_{panel}_{kind}.csv"));
            std::fs::write(&path, sweep_csv(&c, &result))?;
            files.push(path);
        }
    }
    Ok(failures)
}

/// Structural table of allowed transitions (no temperatures involved:
/// amplitudes are a property of the spectrum).
fn transition_table_csv(config: &RunConfig) -> Result<String> {
    let (params, _) = config.resolve_params()?;
    let solver = config.solver_for(&params)?;
    let digits = config.output.precision;
    let mut out = String::from("bath,lower,upper,omega,weight\n");
    let channels = solver.channels_at(config.baths.t_l, config.baths.t_r)?;
    let energies = &solver.eigensystem().energies;
    let mut rows: Vec<(String, usize, usize, f64, f64)> = Vec::new();
    for ch in &channels {
        for m in &ch.members {
            rows.push((
                ch.bath.to_string(),
                m.lower,
                m.upper,
                energies[m.upper] - energies[m.lower],
                m.amplitude.norm_sqr(),
            ));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (bath, lower, upper, omega, weight) in rows {
        let _ = writeln!(
            out,
            "{bath},{lower},{upper},{},{}",
            fmt_sig(omega, digits),
            fmt_sig(weight, digits)
        );
    }
    Ok(out)
}

/// Per-transition net rates and energy fluxes along the temperature
/// grid, one direction (forward or temperature-swapped) per file.
fn ledger_curve_csv(config: &RunConfig, reverse: bool) -> Result<String> {
    let (params, _) = config.resolve_params()?;
    let solver = config.solver_for(&params)?;
    let digits = config.output.precision;
    let mut out = String::from("T_L,T_R,bath,lower,upper,omega,net_rate,flux\n");
    for &t in &default_t_grid() {
        let (t_l, t_r) = if reverse { (0.5, t) } else { (t, 0.5) };
        let mut entries: Vec<TransitionLedgerEntry> = solver.ledger(t_l, t_r)?;
        entries.sort_by(|a, b| {
            a.bath
                .to_string()
                .cmp(&b.bath.to_string())
                .then(a.lower.cmp(&b.lower))
                .then(a.upper.cmp(&b.upper))
        });
        for e in entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_sig(t_l, digits),
                fmt_sig(t_r, digits),
                e.bath,
                e.lower,
                e.upper,
                fmt_sig(e.omega, digits),
                fmt_sig(e.net_rate, digits),
                fmt_sig(e.energy_flux_contribution, digits)
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_config() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c.model.kind, "two_photon_rabi");
        assert_eq!(c.model.omega_l, 1.0);
        assert_eq!(c.model.omega_r, 0.1);
        assert_eq!(c.model.g, 0.015);
        assert_eq!(c.model.theta, 0.0);
        assert_eq!(c.model.n_fock, None);
        assert_eq!(c.baths.gamma, 1e-4);
        assert_eq!(c.baths.t_l, 0.5);
        assert_eq!(c.baths.t_r, 0.5);
        assert_eq!(c.numerics.nullspace_tol, DEFAULT_NULLSPACE_TOL);
        assert!(!c.numerics.oracle);
        assert_eq!(c.output.precision, 12);
    }

    #[test]
    fn n_fock_accepts_integers_and_auto() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = 12\n").unwrap();
        assert_eq!(c.model.n_fock, Some(FockSetting::Fixed(12)));
        let c = RunConfig::from_toml_str("[model]\nn_fock = \"auto\"\n").unwrap();
        assert_eq!(c.model.n_fock, Some(FockSetting::Auto));
        assert!(RunConfig::from_toml_str("[model]\nn_fock = \"several\"\n").is_err());
    }

    #[test]
    fn unknown_keys_and_kinds_are_config_errors() {
        assert!(matches!(
            RunConfig::from_toml_str("[model]\nomega = 1.0\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("[model]\nkind = \"heisenberg\"\n"),
            Err(Error::Config(_))
        ));
        // theta/n_fock are resonator-model settings.
        assert!(matches!(
            RunConfig::from_toml_str("[model]\nkind = \"ising_zz\"\ntheta = 0.2\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn collapse_bound_rejected_at_validation() {
        let err = RunConfig::from_toml_str("[model]\ng = 0.6\n").unwrap_err();
        assert!(matches!(err, Error::SpectralCollapse { .. }));
    }

    #[test]
    fn truncation_rule_follows_coupling_strength() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c.fixed_or_rule_n(), N_FOCK_WEAK);
        let c = RunConfig::from_toml_str("[model]\ng = 0.3\n").unwrap();
        assert_eq!(c.fixed_or_rule_n(), N_FOCK_STRONG);
        let c = RunConfig::from_toml_str("[model]\nn_fock = 7\n").unwrap();
        assert_eq!(c.fixed_or_rule_n(), 7);
    }

    #[test]
    fn linspace_hits_both_endpoints() {
        let v = linspace(0.05, 1.0, 39);
        assert_eq!(v.len(), 39);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[38], 1.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sweep_grid_validation() {
        assert!(SweepGrid::new(SweepParam::G, vec![0.1]).is_err());
        assert!(SweepGrid::new(SweepParam::G, vec![0.2, 0.1]).is_err());
        assert!(SweepGrid::new(SweepParam::G, vec![0.1, 0.1]).is_err());
        let g = SweepGrid::from_range(SweepParam::TL, "0.1:0.9:5").unwrap();
        assert_eq!(g.values.len(), 5);
        assert_eq!(g.values[0], 0.1);
        assert_eq!(g.values[4], 0.9);
        assert!(SweepGrid::from_range(SweepParam::TL, "0.9:0.1:5").is_err());
        assert!(SweepGrid::from_range(SweepParam::TL, "0.1:0.9").is_err());
        assert!(SweepGrid::from_range(SweepParam::TL, "a:b:c").is_err());
    }

    #[test]
    fn sweep_param_names_round_trip() {
        for name in ["T_L", "T_R", "theta", "g", "omega_R"] {
            assert_eq!(SweepParam::parse(name).unwrap().name(), name);
        }
        assert!(SweepParam::parse("gamma").is_err());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.05, 12), "5.00000000000e-2");
        assert_eq!(fmt_sig(-3.632396766647e-6, 12), "-3.63239676665e-6");
        assert_eq!(fmt_sig(f64::NAN, 12), "nan");
        assert_eq!(fmt_sig(1.0, 6), "1.00000e0");
    }

    #[test]
    fn error_messages_lose_commas_and_newlines() {
        assert_eq!(
            sanitize_error("bad value, try again\nsecond line"),
            "bad value; try again second line"
        );
    }

    #[test]
    fn csv_rows_follow_the_column_contract() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = 4\n[baths]\nT_L = 0.1\n").unwrap();
        let (params, _) = c.resolve_params().unwrap();
        let solver = c.solver_for(&params).unwrap();
        let rec = solver.record(0.1, 0.5).unwrap();
        let row = record_row(0.1, &rec, 12);
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), CSV_COLUMNS.len());
        assert_eq!(fields[0], "1.00000000000e-1"); // swept value
        assert_eq!(fields[1], "1.00000000000e-1"); // T_L
        assert_eq!(fields[2], "5.00000000000e-1"); // T_R
        assert_eq!(fields[13], "4"); // n_fock echo
        assert!(fields[15].is_empty()); // no error
        let err = error_row(0.3, 0.3, 0.5, "boom, with comma", 12);
        let fields: Vec<&str> = err.split(',').collect();
        assert_eq!(fields.len(), CSV_COLUMNS.len());
        assert!(fields[3].is_empty());
        assert_eq!(fields[15], "boom; with comma");
    }

    #[test]
    fn equilibrium_point_emits_nan_ratio_with_note() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = 4\n").unwrap();
        let (params, _) = c.resolve_params().unwrap();
        let solver = c.solver_for(&params).unwrap();
        let rec = solver.record(0.5, 0.5).unwrap();
        assert!(rec.rectification.is_none());
        let row = record_row(0.5, &rec, 12);
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[7], "nan");
        assert!(fields[15].contains("R undefined"));
    }

    #[test]
    fn temperature_sweep_is_ordered_and_complete() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = 4\n").unwrap();
        let grid = SweepGrid::from_range(SweepParam::TL, "0.1:0.9:5").unwrap();
        let result = sweep(&c, &grid).unwrap();
        assert_eq!(result.rows.len(), 5);
        assert_eq!(result.failures(), 0);
        for (row, &v) in result.rows.iter().zip(grid.values.iter()) {
            assert_eq!(row.value, v);
            let rec = row.outcome.as_ref().unwrap();
            assert_eq!(rec.t_l, v);
            assert_eq!(rec.t_r, 0.5);
        }
    }

    #[test]
    fn model_axis_sweep_rejects_invalid_grid_points() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = 4\n").unwrap();
        // 0.55 crosses the collapse bound: the grid must be rejected as
        // a config error before any point runs.
        let grid = SweepGrid::new(SweepParam::G, vec![0.1, 0.55]).unwrap();
        assert!(sweep(&c, &grid).is_err());
    }

    #[test]
    fn convergence_ladder_matches_direct_solves() {
        let c = RunConfig::from_toml_str("[baths]\nT_L = 0.1\n").unwrap();
        let report = convergence_check(&c, &[5, 10]).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows[0].relative_change.is_none());
        let rel = report.rows[1].relative_change.unwrap();
        // Weak coupling off resonance settles within the ladder bar by
        // the second rung.
        assert!(rel < CONVERGENCE_TOL, "rel {rel:.3e}");
        assert_eq!(report.converged_at, Some(10));
    }

    #[test]
    fn convergence_ladder_zero_current_is_converged() {
        // Decoupled model: currents identically zero at any truncation.
        let c = RunConfig::from_toml_str("[model]\ng = 0.0\n[baths]\nT_L = 0.2\n").unwrap();
        let report = convergence_check(&c, &[2, 5]).unwrap();
        assert_eq!(report.converged_at, Some(5));
        for row in &report.rows {
            assert!(row.q_l.abs() <= 1e-18);
        }
    }

    #[test]
    fn convergence_ladder_input_validation() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert!(convergence_check(&c, &[]).is_err());
        assert!(convergence_check(&c, &[10, 5]).is_err());
        let two_qubit = RunConfig::from_toml_str("[model]\nkind = \"ising_zz\"\n").unwrap();
        assert!(convergence_check(&two_qubit, &[2, 5]).is_err());
    }

    #[test]
    fn auto_truncation_resolves_through_the_ladder() {
        let c = RunConfig::from_toml_str("[model]\nn_fock = \"auto\"\n[baths]\nT_L = 0.1\n")
            .unwrap();
        let (params, report) = c.resolve_params().unwrap();
        let report = report.unwrap();
        assert_eq!(report.converged_at, Some(10));
        assert_eq!(params.n_fock(), Some(10));
    }

    #[test]
    fn run_point_oracle_agrees_with_null_space() {
        let text = "[model]\nn_fock = 4\n[baths]\nT_L = 0.2\n[numerics]\noracle = true\n";
        let c = RunConfig::from_toml_str(text).unwrap();
        let out = run_point(&c).unwrap();
        let oracle = out.oracle.unwrap();
        assert!(oracle.population_l_inf <= 1e-6, "{:.3e}", oracle.population_l_inf);
        assert!(oracle.max_offdiag <= 1e-8, "{:.3e}", oracle.max_offdiag);
    }

    #[test]
    fn manifest_is_deterministic_and_timestamp_free() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig::default();
        let files = vec![dir.path().join("a.csv")];
        let p1 = write_manifest(
            dir.path(),
            "t",
            "cmd".into(),
            &c,
            &files,
            BTreeMap::new(),
        )
        .unwrap();
        let first = std::fs::read_to_string(&p1).unwrap();
        let p2 = write_manifest(
            dir.path(),
            "t",
            "cmd".into(),
            &c,
            &files,
            BTreeMap::new(),
        )
        .unwrap();
        let second = std::fs::read_to_string(&p2).unwrap();
        assert_eq!(first, second);
        assert!(first.contains("\"tool\": \"qrdiode\""));
        assert!(!first.to_lowercase().contains("time"));
    }

    #[test]
    fn figure_id_validation() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            run_figure("fig99", dir.path()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn transition_table_lists_structural_arrows() {
        let mut c = rabi_config(0.1, 0.015, 0.0);
        c.model.n_fock = Some(FockSetting::Fixed(2));
        let table = transition_table_csv(&c).unwrap();
        let mut lines = table.lines();
        assert_eq!(lines.next().unwrap(), "bath,lower,upper,omega,weight");
        let body: Vec<&str> = lines.collect();
        assert!(!body.is_empty());
        // Both baths appear, indices are in range, weights positive.
        assert!(body.iter().any(|l| l.starts_with("L,")));
        assert!(body.iter().any(|l| l.starts_with("R,")));
        for line in body {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 5);
            let lower: usize = f[1].parse().unwrap();
            let upper: usize = f[2].parse().unwrap();
            assert!(lower < upper && upper < 6);
            assert!(f[4].parse::<f64>().unwrap() > 0.0);
        }
    }
}
