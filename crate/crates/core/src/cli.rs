//! Batch front end: figure data as CSV or JSON, feasibility reports and
//! oracle checks.
//!
//! Every command resolves its parameters from built-in defaults, then an
//! optional TOML config file (one table per command), then flags. The
//! resolved set is hashed into the CSV comment line and written to a JSON
//! sidecar next to `--out`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{crossing_window, crossing_window_fn, locc_bound, BoundCurve, CurveKind};
use crate::experiment::{self, EnvironmentSpec, MirrorSpec};
use crate::fock_oracle::build_a_tau;
use crate::gaussian::SqueezingSpec;
use crate::quantum_dynamics::{
    default_dt, fidelity_open_closed, fidelity_open_closed_numeric, squeezing_transfer_curve, swap_time,
    CoupledPairParams, NoiseParams,
};
use crate::sn_dynamics::{sn_quantum_fidelity, sn_reduced_mode2, FidelityMethod, SNParams};
use crate::{Complex64, Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Integrator vs closed-form disagreement that aborts `open`.
pub const OPEN_SPOT_TOL: f64 = 1e-5;
/// Monte-Carlo vs analytic disagreement, in standard errors, that aborts `sn`.
pub const SN_MC_SIGMAS: f64 = 5.0;
const OPEN_SPOT_POINTS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "gravbench", version, about = "Gravity-coupled oscillator benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with one table per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for data-parallel work; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Analytic,
    Mc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LOCC bound curves over one swap time.
    Bounds(BoundsArgs),
    /// Open-system fidelity against the closed evolution.
    Open(OpenArgs),
    /// Schrödinger–Newton fidelity against the quantum evolution.
    Sn(SnArgs),
    /// Mode-2 minimum variance, quantum vs SN.
    Squeeze(SqueezeArgs),
    /// SI-unit feasibility report.
    Feasibility(FeasibilityArgs),
    /// Quadrature-assembled A_τ against its closed-form norm.
    Oracle(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Open(_) => "open",
            Command::Sn(_) => "sn",
            Command::Squeeze(_) => "squeeze",
            Command::Feasibility(_) => "feasibility",
            Command::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// Prior inverse widths, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub gamma_g: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Two-column `t,F` CSV to tabulate alongside.
    #[arg(long)]
    pub external_bound: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial thermal occupation.
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Bath occupation.
    #[arg(long = "Nbar")]
    #[serde(rename = "Nbar")]
    pub bath_nbar: Option<f64>,
    /// Decay rates, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gamma: Option<Vec<f64>>,
    #[arg(long)]
    pub gamma_g: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma_g: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Mean-field coupling factor κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid end in units of the swap time.
    #[arg(long)]
    pub span: Option<f64>,
    /// Grid end in seconds; overrides `span`.
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeArgs {
    /// Squeezing parameter s.
    #[arg(long)]
    pub squeeze: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub gamma_g: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Target fidelity.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// kg/m³.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub thickness: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
    /// Geometric factor Λ in γ_g = Λ G ϱ / ω.
    #[arg(long)]
    pub geometric_factor: Option<f64>,
    #[arg(long)]
    pub t_env: Option<f64>,
    #[arg(long)]
    pub quality_factor: Option<f64>,
    /// How many times smaller than d the RMS displacement must be.
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Amplifier gain g.
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Radial and angular node count.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    bounds: Option<BoundsArgs>,
    open: Option<OpenArgs>,
    sn: Option<SnArgs>,
    squeeze: Option<SqueezeArgs>,
    feasibility: Option<FeasibilityArgs>,
    oracle: Option<OracleArgs>,
}

fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Flag values win over file values, key by key.
fn overlay<T: Serialize + DeserializeOwned + Default>(file: Option<T>, flags: &T) -> Result<T> {
    let to_value = |v: &T| serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()));
    let mut base = to_value(&file.unwrap_or_default())?;
    if let (Value::Object(base), Value::Object(top)) = (&mut base, to_value(flags)?) {
        for (k, v) in top {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))
}

/// Evenly spaced grid with exact endpoints.
pub fn linspace(end: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::param("points", format!("{points}; need at least 2")));
    }
    if !(end > 0.0) || !end.is_finite() {
        return Err(Error::param("t_end", format!("{end} must be positive and finite")));
    }
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                end
            } else {
                end * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

/// Twelve significant digits.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.11e}")
    }
}

/// First 16 hex digits of SHA-256 over the command and its resolved
/// parameters as compact JSON.
pub fn param_hash(command: &str, params: &Value) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(params.to_string().as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Appended to the output file stem when a command emits several tables.
    pub label: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// `tag` is appended to the comment line so concatenated tables stay apart.
    fn to_csv(&self, command: &str, hash: &str, tag: Option<&str>) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_num(*v)))?;
        }
        let body =
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("csv output is UTF-8");
        let tag = tag.map(|t| format!(" {t}")).unwrap_or_default();
        Ok(format!("# gravbench v{VERSION} {command} {hash}{tag}\n{body}"))
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| if v.is_nan() { Value::Null } else { json!(v) })
                    .collect()
            })
            .collect();
        json!({ "label": self.label, "columns": self.columns, "rows": rows })
    }
}

/// Everything one command run produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub params: Value,
    pub tables: Vec<Table>,
    /// Extra sidecar content (crossing windows, checks).
    pub summary: Value,
    /// Human-readable rendering, printed to stderr.
    pub text: Option<String>,
}

impl Report {
    pub fn hash(&self) -> String {
        param_hash(self.command, &self.params)
    }

    pub fn sidecar(&self) -> Value {
        json!({
            "gravbench": VERSION,
            "command": self.command,
            "param_hash": self.hash(),
            "params": self.params,
            "summary": self.summary,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut doc = self.sidecar();
        doc["tables"] = Value::Array(self.tables.iter().map(Table::to_json).collect());
        doc
    }
}

fn labelled_path(out: &Path, label: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{label}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{label}"),
    };
    out.with_file_name(name)
}

/// Writes a report; returns the files created.
pub fn emit(
    report: &Report,
    format: Format,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(text) = &report.text {
        stderr.write_all(text.as_bytes())?;
    }
    match format {
        Format::Json => {
            let doc = serde_json::to_string_pretty(&report.to_json()).expect("JSON values serialize") + "\n";
            match out {
                Some(path) => {
                    fs::write(path, doc)?;
                    written.push(path.to_path_buf());
                }
                None => stdout.write_all(doc.as_bytes())?,
            }
        }
        Format::Csv => {
            let hash = report.hash();
            let single = report.tables.len() == 1;
            for table in &report.tables {
                let tag = if single { None } else { table.label.as_deref() };
                let body = table.to_csv(report.command, &hash, tag)?;
                match out {
                    Some(path) => {
                        let target = match (&table.label, single) {
                            (Some(label), false) => labelled_path(path, label),
                            _ => path.to_path_buf(),
                        };
                        fs::write(&target, body)?;
                        written.push(target);
                    }
                    None => stdout.write_all(body.as_bytes())?,
                }
            }
            let sidecar = serde_json::to_string_pretty(&report.sidecar()).expect("JSON values serialize") + "\n";
            match out {
                Some(path) => {
                    let target = path.with_extension("json");
                    fs::write(&target, sidecar)?;
                    written.push(target);
                }
                None => stderr.write_all(sidecar.as_bytes())?,
            }
        }
    }
    Ok(written)
}

fn reference_pair(omega: f64, gamma_g: f64) -> Result<CoupledPairParams> {
    let mirror = MirrorSpec::reference();
    CoupledPairParams::new(omega, gamma_g, mirror.mass(), mirror.separation_d)
}

fn to_params<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("parameter structs serialize")
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsConfig {
    pub lambda: Vec<f64>,
    pub gamma_g: f64,
    pub points: usize,
    pub external_bound: Option<PathBuf>,
}

impl BoundsArgs {
    pub fn resolve(&self) -> BoundsConfig {
        BoundsConfig {
            lambda: self.lambda.clone().unwrap_or_else(|| vec![1e-3, 1e-2, 1e-1]),
            gamma_g: self.gamma_g.unwrap_or(4.74e-4),
            points: self.points.unwrap_or(101),
            external_bound: self.external_bound.clone(),
        }
    }
}

pub fn cmd_bounds(cfg: &BoundsConfig) -> Result<Report> {
    if cfg.lambda.is_empty() {
        return Err(Error::param("lambda", "list is empty"));
    }
    if !(cfg.gamma_g > 0.0) {
        return Err(Error::param("gamma_g", format!("{} must be positive", cfg.gamma_g)));
    }
    let times = linspace(swap_time(cfg.gamma_g, 0), cfg.points)?;
    let external = cfg.external_bound.as_ref().map(BoundCurve::load_external).transpose()?;
    let mut tables = Vec::new();
    let mut windows = Vec::new();
    for &lambda in &cfg.lambda {
        let curve = BoundCurve::locc(lambda, cfg.gamma_g, &times)?;
        let mut columns = vec!["t".to_string(), "F_cl".to_string()];
        if external.is_some() {
            columns.push("F_external".to_string());
        }
        let rows = times
            .iter()
            .zip(&curve.values)
            .map(|(&t, &f)| {
                let mut row = vec![t, f];
                if let Some(ext) = &external {
                    row.push(ext.interpolate(t).unwrap_or(f64::NAN));
                }
                row
            })
            .collect();
        if let Some(ext) = &external {
            let w = crossing_window_fn(|t| curve_excess(&curve, ext, t), &times);
            windows.push(json!({ "lambda": lambda, "window": w }));
        }
        tables.push(Table {
            label: Some(format!("lambda{}", fmt_label(lambda))),
            columns,
            rows,
        });
    }
    Ok(Report {
        command: "bounds",
        params: to_params(cfg),
        tables,
        summary: json!({ "swap_time": times.last(), "external_crossings": windows }),
        text: None,
    })
}

fn curve_excess(curve: &BoundCurve, other: &BoundCurve, t: f64) -> f64 {
    match (curve.interpolate(t), other.interpolate(t)) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    }
}

fn fmt_label(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct OpenConfig {
    pub lambda: f64,
    pub nbar: f64,
    #[serde(rename = "Nbar")]
    pub bath_nbar: f64,
    pub gamma: Vec<f64>,
    pub gamma_g: f64,
    pub omega: f64,
    pub points: usize,
}

impl OpenArgs {
    pub fn resolve(&self) -> OpenConfig {
        OpenConfig {
            lambda: self.lambda.unwrap_or(1e-3),
            nbar: self.nbar.unwrap_or(0.1),
            bath_nbar: self.bath_nbar.unwrap_or(1e10),
            gamma: self.gamma.clone().unwrap_or_else(|| vec![1e-13, 1e-12, 1.5e-12]),
            gamma_g: self.gamma_g.unwrap_or(4.74e-4),
            omega: self.omega.unwrap_or(1e-2),
            points: self.points.unwrap_or(101),
        }
    }
}

/// Up to `count` grid indices spread evenly, endpoints included.
fn spot_indices(len: usize, count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..count)
        .map(|k| ((k * (len - 1)) as f64 / (count - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

pub fn cmd_open(cfg: &OpenConfig) -> Result<Report> {
    if cfg.gamma.is_empty() {
        return Err(Error::param("gamma", "list is empty"));
    }
    if !(cfg.lambda > 0.0) {
        return Err(Error::param("lambda", format!("{} must be positive", cfg.lambda)));
    }
    let pair = reference_pair(cfg.omega, cfg.gamma_g)?;
    let times = linspace(pair.swap_time(0), cfg.points)?;
    let bound = BoundCurve::locc(cfg.lambda, cfg.gamma_g, &times)?;
    let spots = spot_indices(times.len(), OPEN_SPOT_POINTS);
    let spot_times: Vec<f64> = spots.iter().map(|&i| times[i]).collect();

    let mut columns = vec!["t".to_string()];
    let mut curves = Vec::new();
    let mut checks = Vec::new();
    for &gamma in &cfg.gamma {
        let noise = NoiseParams::new(gamma, cfg.bath_nbar, cfg.nbar)?;
        let values: Vec<f64> = times.iter().map(|&t| fidelity_open_closed(&noise, gamma, t)).collect();
        let numeric =
            fidelity_open_closed_numeric(Complex64::new(1.0, 0.5), &pair, &noise, &spot_times, default_dt(&pair))?;
        let worst = spots
            .iter()
            .zip(&numeric)
            .map(|(&i, n)| (values[i] - n).abs())
            .fold(0.0, f64::max);
        if !(worst <= OPEN_SPOT_TOL) {
            return Err(Error::Consistency(format!(
                "open dynamics: integrator and closed form differ by {worst:.3e} at gamma = {gamma:e}"
            )));
        }
        let curve = BoundCurve::new(times.clone(), values, CurveKind::Fidelity)?;
        let window = crossing_window(&curve, &bound)?;
        checks.push(json!({ "gamma": gamma, "spot_max_abs_diff": worst, "crossing_window": window }));
        columns.push(format!("F_open(gamma={})", fmt_label(gamma)));
        curves.push(curve);
    }
    columns.push("F_cl".to_string());
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![t];
            row.extend(curves.iter().map(|c| c.values[i]));
            row.push(bound.values[i]);
            row
        })
        .collect();
    Ok(Report {
        command: "open",
        params: to_params(cfg),
        tables: vec![Table {
            label: None,
            columns,
            rows,
        }],
        summary: json!({ "spot_points": spot_times.len(), "per_gamma": checks }),
        text: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SnConfig {
    pub lambda: f64,
    pub gamma_g: f64,
    pub omega: f64,
    pub kappa: f64,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    pub points: usize,
    pub span: f64,
    pub t_max: Option<f64>,
}

impl SnArgs {
    pub fn resolve(&self, seed: Option<u64>) -> SnConfig {
        SnConfig {
            lambda: self.lambda.unwrap_or(1e-3),
            gamma_g: self.gamma_g.unwrap_or(4.74e-4),
            omega: self.omega.unwrap_or(1e-2),
            kappa: self.kappa.unwrap_or(1.0),
            method: self.method.unwrap_or_default(),
            samples: self.samples.unwrap_or(100_000),
            seed: seed.unwrap_or(0),
            points: self.points.unwrap_or(201),
            span: self.span.unwrap_or(2.0),
            t_max: self.t_max,
        }
    }
}

pub fn cmd_sn(cfg: &SnConfig) -> Result<Report> {
    if !(cfg.lambda > 0.0) {
        return Err(Error::param("lambda", format!("{} must be positive", cfg.lambda)));
    }
    if !(cfg.gamma_g >= 0.0) {
        return Err(Error::param("gamma_g", format!("{} must be non-negative", cfg.gamma_g)));
    }
    let t_end = match (cfg.t_max, cfg.gamma_g > 0.0) {
        (Some(t), _) => t,
        (None, true) => cfg.span * swap_time(cfg.gamma_g, 0),
        (None, false) => return Err(Error::param("t_max", "required when gamma_g = 0")),
    };
    let times = linspace(t_end, cfg.points)?;
    let columns = ["t", "F_SN", "F_SN_stderr", "F_cl"].map(String::from).to_vec();

    // Without coupling nothing moves: both oscillators stay where they are
    // under either dynamics.
    if cfg.gamma_g == 0.0 {
        let rows = times.iter().map(|&t| vec![t, 1.0, 0.0, 1.0]).collect();
        return Ok(Report {
            command: "sn",
            params: to_params(cfg),
            tables: vec![Table {
                label: None,
                columns,
                rows,
            }],
            summary: json!({ "window_exists": false, "window": null }),
            text: None,
        });
    }

    let pair = reference_pair(cfg.omega, cfg.gamma_g)?;
    let sn = SNParams::from_pair(&pair, cfg.kappa)?;
    let analytic: Vec<f64> = times
        .iter()
        .map(|&t| sn_quantum_fidelity(&sn, &pair, cfg.lambda, t, FidelityMethod::Analytic).map(|e| e.value))
        .collect::<Result<_>>()?;
    let mut values = analytic.clone();
    let mut stderrs = vec![0.0; times.len()];
    let mut worst_sigma: f64 = 0.0;
    if cfg.method == Method::Mc {
        for (i, &t) in times.iter().enumerate() {
            let method = FidelityMethod::MonteCarlo {
                n: cfg.samples,
                seed: cfg.seed,
            };
            let est = sn_quantum_fidelity(&sn, &pair, cfg.lambda, t, method)?;
            let diff = (est.value - analytic[i]).abs();
            if diff > SN_MC_SIGMAS * est.stderr + 1e-12 {
                return Err(Error::Consistency(format!(
                    "sn: Monte-Carlo {:.6} vs analytic {:.6} at t = {t:.4e} (stderr {:.3e})",
                    est.value, analytic[i], est.stderr
                )));
            }
            if est.stderr > 0.0 {
                worst_sigma = worst_sigma.max(diff / est.stderr);
            }
            values[i] = est.value;
            stderrs[i] = est.stderr;
        }
    }
    let excess = |t: f64| {
        sn_quantum_fidelity(&sn, &pair, cfg.lambda, t, FidelityMethod::Analytic)
            .map(|e| e.value)
            .unwrap_or(0.0)
            - locc_bound(cfg.lambda, cfg.gamma_g, t)
    };
    let window = crossing_window_fn(excess, &times);
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![t, values[i], stderrs[i], locc_bound(cfg.lambda, cfg.gamma_g, t)])
        .collect();
    Ok(Report {
        command: "sn",
        params: to_params(cfg),
        tables: vec![Table {
            label: None,
            columns,
            rows,
        }],
        summary: json!({
            "window_exists": window.is_some(),
            "window": window,
            "window_gamma_g_t": window.map(|w| [w.start * cfg.gamma_g, w.end * cfg.gamma_g]),
            "mc_max_sigma": worst_sigma,
        }),
        text: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SqueezeConfig {
    pub squeeze: f64,
    pub phi: f64,
    pub gamma_g: f64,
    pub omega: f64,
    pub kappa: f64,
    pub points: usize,
}

impl SqueezeArgs {
    pub fn resolve(&self) -> SqueezeConfig {
        SqueezeConfig {
            squeeze: self.squeeze.unwrap_or(0.5),
            phi: self.phi.unwrap_or(0.0),
            gamma_g: self.gamma_g.unwrap_or(4.74e-4),
            omega: self.omega.unwrap_or(1e-2),
            kappa: self.kappa.unwrap_or(1.0),
            points: self.points.unwrap_or(101),
        }
    }
}

pub fn cmd_squeeze(cfg: &SqueezeConfig) -> Result<Report> {
    if !(cfg.squeeze >= 0.0) {
        return Err(Error::param("squeeze", format!("{} must be non-negative", cfg.squeeze)));
    }
    let pair = reference_pair(cfg.omega, cfg.gamma_g)?;
    let sn = SNParams::from_pair(&pair, cfg.kappa)?;
    let times = linspace(pair.swap_time(0), cfg.points)?;
    let quantum = squeezing_transfer_curve(SqueezingSpec::new(cfg.squeeze, cfg.phi), &pair, &times)?;
    // A squeezed vacuum has zero mean, so the SN partner sees no force and
    // keeps the covariance of its own coherent state.
    let rows = quantum
        .iter()
        .map(|&(t, v)| {
            Ok(vec![
                t,
                v,
                sn_reduced_mode2(&sn, Complex64::new(0.0, 0.0), t).min_quadrature_variance(0)?,
            ])
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        command: "squeeze",
        params: to_params(cfg),
        tables: vec![Table {
            label: None,
            columns: ["t", "V_quantum", "V_SN"].map(String::from).to_vec(),
            rows,
        }],
        summary: json!({ "target_min_variance": 0.5 * (-2.0 * cfg.squeeze).exp() }),
        text: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityConfig {
    pub lambda: f64,
    pub target: f64,
    pub omega: f64,
    pub mirror: MirrorSpec,
    pub t_env: f64,
    pub quality_factor: f64,
    pub margin: f64,
}

impl FeasibilityArgs {
    pub fn resolve(&self) -> FeasibilityConfig {
        let r = MirrorSpec::reference();
        let e = EnvironmentSpec::reference();
        FeasibilityConfig {
            lambda: self.lambda.unwrap_or(1e-3),
            target: self.target.unwrap_or(0.9),
            omega: self.omega.unwrap_or(e.omega),
            mirror: MirrorSpec {
                density: self.density.unwrap_or(r.density),
                radius: self.radius.unwrap_or(r.radius),
                thickness: self.thickness.unwrap_or(r.thickness),
                separation_d: self.separation.unwrap_or(r.separation_d),
                geometric_factor: self.geometric_factor.unwrap_or(r.geometric_factor),
            },
            t_env: self.t_env.unwrap_or(e.t_env),
            quality_factor: self.quality_factor.unwrap_or(e.quality_factor),
            margin: self.margin.unwrap_or(experiment::DEFAULT_MARGIN),
        }
    }
}

pub fn cmd_feasibility(cfg: &FeasibilityConfig) -> Result<Report> {
    cfg.mirror.validate()?;
    let mass = cfg.mirror.mass();
    let env = EnvironmentSpec::new(cfg.t_env, cfg.quality_factor, cfg.omega, mass.max(f64::MIN_POSITIVE))?;
    let report = experiment::feasibility_report_with_margin(&cfg.mirror, &env, cfg.lambda, cfg.target, cfg.margin)?;
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let values = [
        ("mass", report.mass),
        ("gamma_g", report.gamma_g),
        ("rwa_ratio", report.rwa_ratio),
        ("swap_time", opt(report.swap_time)),
        ("time_to_fidelity", opt(report.time_to_fidelity)),
        ("lambda_floor", report.lambda_floor),
        ("nbar_max", opt(report.nbar_max)),
        ("t_eff", opt(report.t_eff)),
        ("required_q", opt(report.required_q)),
        ("weak_field_ratio", report.weak_field_ratio),
    ];
    let table = Table {
        label: None,
        columns: values.iter().map(|(k, _)| k.to_string()).collect(),
        rows: vec![values.iter().map(|(_, v)| *v).collect()],
    };
    Ok(Report {
        command: "feasibility",
        params: to_params(cfg),
        tables: vec![table],
        summary: serde_json::to_value(&report).expect("report serializes"),
        text: Some(report.to_string()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub lambda: f64,
    pub g: f64,
    pub dim: usize,
    pub nodes: usize,
}

impl OracleArgs {
    pub fn resolve(&self) -> OracleConfig {
        OracleConfig {
            lambda: self.lambda.unwrap_or(0.5),
            g: self.g.unwrap_or(0.5),
            dim: self.dim.unwrap_or(40),
            nodes: self.nodes.unwrap_or(64),
        }
    }
}

/// Convergence table over `dim/4, dim/2, 3dim/4, dim`.
pub fn cmd_oracle(cfg: &OracleConfig) -> Result<Report> {
    let bound = crate::bounds::amplification_bound(cfg.lambda, cfg.g)?;
    let mut dims: Vec<usize> = [cfg.dim / 4, cfg.dim / 2, 3 * cfg.dim / 4, cfg.dim]
        .into_iter()
        .filter(|&d| d >= 2)
        .collect();
    dims.dedup();
    if dims.is_empty() {
        return Err(Error::param("dim", format!("{}; need at least 2", cfg.dim)));
    }
    let mut rows = Vec::new();
    for &dim in &dims {
        let a = build_a_tau(cfg.lambda, cfg.g, dim, cfg.nodes, cfg.nodes)?;
        let eig = a.max_eigenvalue();
        let vac = a.vacuum_element();
        rows.push(vec![
            dim as f64,
            bound,
            eig,
            (eig - bound).abs() / bound,
            vac,
            (vac - bound).abs(),
        ]);
    }
    let last = rows.last().expect("non-empty").clone();
    Ok(Report {
        command: "oracle",
        params: to_params(cfg),
        tables: vec![Table {
            label: None,
            columns: [
                "dim",
                "bound",
                "max_eigenvalue",
                "rel_error",
                "vacuum_element",
                "vacuum_abs_error",
            ]
            .map(String::from)
            .to_vec(),
            rows,
        }],
        summary: json!({
            "bound": bound,
            "max_eigenvalue": last[2],
            "max_eigenvalue_rel_error": last[3],
            "vacuum_element": last[4],
        }),
        text: None,
    })
}

/// Resolves config and flags, then runs the command. Does not touch the
/// rayon pool; see [`run`].
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let (report, format, out) = build_report(cli)?;
    emit(&report, format, out.as_deref(), stdout, stderr)
}

/// Resolved report plus where and how to write it.
pub fn build_report(cli: &Cli) -> Result<(Report, Format, Option<PathBuf>)> {
    let file = match &cli.common.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    let seed = cli.common.seed.or(file.seed);
    let format = cli.common.format.or(file.format).unwrap_or_default();
    let out = cli.common.out.clone().or(file.out);
    let report = match &cli.command {
        Command::Bounds(a) => cmd_bounds(&overlay(file.bounds, a)?.resolve())?,
        Command::Open(a) => cmd_open(&overlay(file.open, a)?.resolve())?,
        Command::Sn(a) => cmd_sn(&overlay(file.sn, a)?.resolve(seed))?,
        Command::Squeeze(a) => cmd_squeeze(&overlay(file.squeeze, a)?.resolve())?,
        Command::Feasibility(a) => cmd_feasibility(&overlay(file.feasibility, a)?.resolve())?,
        Command::Oracle(a) => cmd_oracle(&overlay(file.oracle, a)?.resolve())?,
    };
    Ok((report, format, out))
}

/// 2 for bad input, 3 when an internal cross-check fails.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Consistency(_) | Error::Convergence { .. } | Error::Unphysical { .. } => 3,
        _ => 2,
    }
}

/// Full entry point: parses `args`, sizes the thread pool, runs, and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return 2;
        }
    };
    let result = pool
        .install(|| build_report(&cli))
        .and_then(|(report, format, out)| emit(&report, format, out.as_deref(), stdout, stderr));
    match result {
        Ok(_) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(3.0, 4).unwrap();
        assert_eq!(g, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(linspace(1.0, 1).is_err());
    }

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(fmt_num(0.5), "5.00000000000e-1");
        assert_eq!(fmt_num(f64::NAN), "");
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = BoundsArgs {
            gamma_g: Some(1.0),
            points: Some(5),
            ..Default::default()
        };
        let flags = BoundsArgs {
            points: Some(7),
            ..Default::default()
        };
        let merged = overlay(Some(file), &flags).unwrap();
        assert_eq!(merged.gamma_g, Some(1.0));
        assert_eq!(merged.points, Some(7));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let err = toml::from_str::<ConfigFile>("[bounds]\nlambdas = [0.1]\n");
        assert!(err.is_err());
        let ok = toml::from_str::<ConfigFile>("seed = 3\n[open]\nNbar = 1e10\ngamma = [1e-12]\n").unwrap();
        assert_eq!(ok.open.unwrap().bath_nbar, Some(1e10));
    }

    #[test]
    fn spot_indices_cover_endpoints() {
        assert_eq!(spot_indices(101, 10).first(), Some(&0));
        assert_eq!(spot_indices(101, 10).last(), Some(&100));
        assert_eq!(spot_indices(3, 10), vec![0, 1, 2]);
    }

    #[test]
    fn hash_depends_on_params() {
        let a = param_hash("bounds", &json!({"x": 1}));
        let b = param_hash("bounds", &json!({"x": 2}));
        assert_eq!(a.len(), 16);
        assert_ne!(a, b);
    }
}
