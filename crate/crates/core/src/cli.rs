//! Command-line front end.
//!
//! Configs are flat JSON objects: the [`SystemParams`] fields plus the scan
//! and output keys `grid_min`, `grid_max`, `grid_count`, `refine`, `format`,
//! `oracle_check`, `omega_p`, `k_p` and `units`. Flags override config keys.
//! Every number is written with 17 significant digits, and values that could
//! not be computed appear as error tokens.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::dressed::DressedFrame;
use crate::error::Error;
use crate::model::{RawParams, Strictness, SystemParams};
use crate::optics::{self, GridSpec, PeakReport, ProbeScale, SpectrumScan};
use crate::oracle;
use crate::steady::{self, Branch};

pub const CSV_HEADER: &str = "delta_p,re_chi,im_chi,n,dre_chi_domega,vg_ratio";
pub const PEAKS_HEADER: &str = "center,height,fwhm,predicted_fwhm";
pub const SWEEP_HEADER: &str = "phi,height_minus,height_plus,factor_minus,factor_plus";
pub const COMPARE_HEADER: &str = "delta_p,closed_form_re,closed_form_im,linear_solve_re,linear_solve_im,integration_re,integration_im,cf_vs_solve,cf_vs_integration,solve_vs_integration";

#[derive(Debug, Parser)]
#[command(
    name = "tunnel-eit",
    version,
    about = "Probe response of a tunnel-coupled double-well Λ condensate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan the probe detuning and report chi, index, dispersion and peaks.
    Scan(ScanArgs),
    /// Heights of the two narrow resonances versus the preparation angle.
    SweepPhi(SweepArgs),
    /// Closed form, linear solve and time integration side by side.
    CompareOracle(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum Units {
    /// Rates already in units of gamma_ab.
    #[value(name = "gamma_ab")]
    #[serde(rename = "gamma_ab")]
    GammaAb,
    /// Rates in s^-1; divided by gamma_ab on input.
    #[value(name = "si")]
    #[serde(rename = "si")]
    Si,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// `min,max,count`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub refine: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long)]
    pub omega_p: Option<f64>,
    #[arg(long)]
    pub k_p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated preparation angles in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated probe detunings.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_p: String,
    #[arg(long, default_value_t = 1e4)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
}

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_)
            | Error::InvalidParams(_)
            | Error::InvalidGrid(_)
            | Error::NotDegenerate => 2,
            Error::UnresolvedFeature { .. } => 3,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Config file split into physical parameters and run options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub params: RawParams,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_count: Option<usize>,
    pub refine: Option<bool>,
    pub format: Option<Format>,
    pub oracle_check: Option<bool>,
    pub omega_p: Option<f64>,
    pub k_p: Option<f64>,
    pub units: Option<Units>,
}

fn take<T: serde::de::DeserializeOwned>(
    map: &mut Map<String, Value>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| CliError::config(format!("key {key}: {e}"))),
    }
}

pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid JSON: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(CliError::config("config must be a JSON object"));
    };
    let cfg = FileConfig {
        grid_min: take(&mut map, "grid_min")?,
        grid_max: take(&mut map, "grid_max")?,
        grid_count: take(&mut map, "grid_count")?,
        refine: take(&mut map, "refine")?,
        format: take(&mut map, "format")?,
        oracle_check: take(&mut map, "oracle_check")?,
        omega_p: take(&mut map, "omega_p")?,
        k_p: take(&mut map, "k_p")?,
        units: take(&mut map, "units")?,
        params: RawParams::default(),
    };
    let params = serde_json::from_value(Value::Object(map))
        .map_err(|e| CliError::config(format!("parameters: {e}")))?;
    Ok(FileConfig { params, ..cfg })
}

pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Divisor that brings rates into units of `gamma_ab`.
fn unit_divisor(units: Units, raw: &RawParams) -> Result<f64, CliError> {
    match units {
        Units::GammaAb => Ok(1.0),
        Units::Si => raw
            .gamma_ab
            .or(raw.gamma_a.map(|g| g / 2.0))
            .filter(|g| *g > 0.0 && g.is_finite())
            .ok_or_else(|| CliError::config("--units si needs a positive gamma_ab or gamma_a")),
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::config(format!("{what}: {s:?}: {e}")))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::config(format!("--grid expects min,max,count (got {text:?})"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min = parts[0].parse().map_err(|_| bad())?;
    let max = parts[1].parse().map_err(|_| bad())?;
    let count = parts[2].parse().map_err(|_| bad())?;
    Ok((min, max, count))
}

/// Fully resolved scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRequest {
    pub params: SystemParams,
    pub grid: GridSpec,
    pub format: Format,
    pub oracle_check: bool,
    pub scale: ProbeScale,
}

impl ScanRequest {
    /// Merges flags over the config file and normalizes units.
    pub fn resolve(args: &ScanArgs, cfg: &FileConfig) -> Result<ScanRequest, CliError> {
        let units = args.common.units.or(cfg.units).unwrap_or(Units::GammaAb);
        let div = unit_divisor(units, &cfg.params)?;
        let params = cfg.params.scale_rates(1.0 / div).validate()?;
        let (mut min, mut max, mut count) = (cfg.grid_min, cfg.grid_max, cfg.grid_count);
        if let Some(g) = &args.grid {
            let (a, b, n) = parse_grid(g)?;
            (min, max, count) = (Some(a), Some(b), Some(n));
        }
        let span = 2.0 * params.omega_ac.max(params.gamma_ab);
        let grid = GridSpec {
            min: min.map(|v| v / div).unwrap_or(-span),
            max: max.map(|v| v / div).unwrap_or(span),
            count: count.unwrap_or(1001),
            refine: args.refine || cfg.refine.unwrap_or(false),
        };
        let default = ProbeScale::default();
        let scale = ProbeScale {
            omega_p: args
                .omega_p
                .or(cfg.omega_p)
                .map(|v| v / div)
                .unwrap_or(default.omega_p),
            k_p: args.k_p.or(cfg.k_p).unwrap_or(default.k_p),
        };
        if !(scale.omega_p.is_finite() && scale.omega_p > 0.0) {
            return Err(CliError::config("omega_p must be positive"));
        }
        Ok(ScanRequest {
            params,
            grid,
            format: args.format.or(cfg.format).unwrap_or(Format::Csv),
            oracle_check: args.oracle_check || cfg.oracle_check.unwrap_or(false),
            scale,
        })
    }

    /// Effective configuration, in units of `gamma_ab`, as a JSON object
    /// that can be fed back in.
    pub fn echo(&self) -> String {
        let mut map = params_map(&self.params);
        map.insert("grid_min".into(), self.grid.min.into());
        map.insert("grid_max".into(), self.grid.max.into());
        map.insert("grid_count".into(), self.grid.count.into());
        map.insert("refine".into(), self.grid.refine.into());
        map.insert("format".into(), format_name(self.format).into());
        map.insert("oracle_check".into(), self.oracle_check.into());
        map.insert("omega_p".into(), self.scale.omega_p.into());
        map.insert("k_p".into(), self.scale.k_p.into());
        map.insert("units".into(), "gamma_ab".into());
        Value::Object(map).to_string()
    }
}

fn params_map(p: &SystemParams) -> Map<String, Value> {
    match serde_json::to_value(p) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NonFinite".to_string()
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "\"NonFinite\"".to_string()
    }
}

/// Worst residual of the two branch systems at the closed-form state.
pub fn closed_form_residual(p: &SystemParams, delta_p: f64) -> crate::Result<f64> {
    let mut worst: f64 = 0.0;
    for branch in Branch::BOTH {
        let sys = steady::build_linear_system(p, delta_p, branch);
        let x = steady::closed_form_vector(p, delta_p, branch)?;
        worst = worst.max(oracle::residual(&sys, &x));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub scan: SpectrumScan,
    pub peaks: Vec<PeakReport>,
    pub residuals: Option<Vec<f64>>,
}

pub fn cmd_scan(req: &ScanRequest) -> Result<ScanOutput, CliError> {
    let scan = optics::scan(&req.params, &req.grid, &req.scale)?;
    let peaks = optics::find_peaks(&scan)?;
    let residuals = if req.oracle_check {
        Some(
            scan.points
                .iter()
                .map(|s| closed_form_residual(&req.params, s.delta_p))
                .collect::<crate::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(ScanOutput {
        scan,
        peaks,
        residuals,
    })
}

pub fn render_scan(req: &ScanRequest, out: &ScanOutput) -> String {
    match req.format {
        Format::Csv => render_scan_csv(req, out),
        Format::Json => render_scan_json(req, out),
    }
}

fn point_values(s: &optics::SpectrumPoint) -> [f64; 6] {
    [
        s.delta_p,
        s.chi.re,
        s.chi.im,
        s.n,
        s.dre_chi_domega,
        s.vg_ratio,
    ]
}

fn peak_values(p: &PeakReport) -> [f64; 4] {
    [p.center, p.height, p.fwhm, p.predicted_fwhm]
}

fn render_scan_csv(req: &ScanRequest, out: &ScanOutput) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    if out.residuals.is_some() {
        s.push_str(",residual");
    }
    s.push('\n');
    for (i, pt) in out.scan.points.iter().enumerate() {
        let mut row: Vec<String> = point_values(pt).iter().map(|&v| num(v)).collect();
        if let Some(r) = &out.residuals {
            row.push(num(r[i]));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s.push_str("# peaks\n");
    s.push_str(PEAKS_HEADER);
    s.push('\n');
    for p in &out.peaks {
        let row: Vec<String> = peak_values(p).iter().map(|&v| num(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    let _ = writeln!(s, "# config {}", req.echo());
    s
}

fn json_object(keys: &[&str], values: &[f64]) -> String {
    let fields: Vec<String> = keys
        .iter()
        .zip(values)
        .map(|(k, &v)| format!("\"{k}\":{}", json_num(v)))
        .collect();
    format!("{{{}}}", fields.join(","))
}

fn render_scan_json(req: &ScanRequest, out: &ScanOutput) -> String {
    let mut point_keys: Vec<&str> = CSV_HEADER.split(',').collect();
    if out.residuals.is_some() {
        point_keys.push("residual");
    }
    let points: Vec<String> = out
        .scan
        .points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let mut v = point_values(pt).to_vec();
            if let Some(r) = &out.residuals {
                v.push(r[i]);
            }
            json_object(&point_keys, &v)
        })
        .collect();
    let peak_keys: Vec<&str> = PEAKS_HEADER.split(',').collect();
    let peaks: Vec<String> = out
        .peaks
        .iter()
        .map(|p| json_object(&peak_keys, &peak_values(p)))
        .collect();
    format!(
        "{{\"config\":{},\"points\":[{}],\"peaks\":[{}]}}\n",
        req.echo(),
        points.join(","),
        peaks.join(",")
    )
}

/// One row of the preparation-angle sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub phi: f64,
    /// `Im chi` of the B branch at its resonance `-g_b/2`.
    pub height_minus: f64,
    /// `Im chi` of the B' branch at its resonance `+g_b/2`.
    pub height_plus: f64,
    pub factor_minus: f64,
    pub factor_plus: f64,
}

/// Per-branch resonance heights for each preparation angle. Each branch
/// carries its own population, so its height isolates one resonance even
/// where the two overlap.
pub fn cmd_sweep_phi(p: &SystemParams, phis: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    if p.delta_bb != 0.0 || p.delta_cc != 0.0 || !(p.g_b > 0.0) {
        return Err(Error::NotDegenerate.into());
    }
    let centers = optics::predicted_centers(p);
    let (lo, hi) = (centers[0], centers[centers.len() - 1]);
    let im = |q: &SystemParams, d: f64, b: Branch| -> crate::Result<f64> {
        let t = steady::closed_form_branches(q, d)?.get(b);
        Ok(optics::susceptibility(t, q).im)
    };
    phis.iter()
        .map(|&phi| {
            let q = SystemParams {
                phi_prep: phi,
                ..*p
            };
            let s2 = (2.0 * phi).sin();
            Ok(SweepRow {
                phi,
                height_minus: im(&q, lo, Branch::B)?,
                height_plus: im(&q, hi, Branch::BPrime)?,
                factor_minus: 1.0 + s2,
                factor_plus: 1.0 - s2,
            })
        })
        .collect()
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let v = [
            r.phi,
            r.height_minus,
            r.height_plus,
            r.factor_minus,
            r.factor_plus,
        ];
        s.push_str(&v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Outcome of one evaluation path: a value or the name of what stopped it.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(C64),
    Token(&'static str),
}

impl Cell {
    fn from_result(r: crate::Result<C64>) -> Cell {
        match r {
            Ok(v) if v.is_finite() => Cell::Value(v),
            Ok(_) => Cell::Token("NonFinite"),
            Err(e) => Cell::Token(error_token(&e)),
        }
    }

    pub fn value(&self) -> Option<C64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Token(_) => None,
        }
    }
}

pub fn error_token(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "InvalidParams",
        Error::DegenerateSubspace { .. } => "DegenerateSubspace",
        Error::SingularSystem { .. } => "SingularSystem",
        Error::PoleEncountered { .. } => "PoleEncountered",
        Error::NotDegenerate => "NotDegenerate",
        Error::UnphysicalIndex { .. } => "UnphysicalIndex",
        Error::StepTooLarge { .. } => "StepTooLarge",
        Error::UnresolvedFeature { .. } => "UnresolvedFeature",
        Error::StepUnstable { .. } => "StepUnstable",
        Error::InvalidGrid(_) => "InvalidGrid",
        Error::Config(_) => "Config",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub delta_p: f64,
    pub closed_form: Cell,
    pub linear_solve: Cell,
    pub integration: Cell,
}

impl CompareRow {
    fn diff(a: &Cell, b: &Cell) -> Cell {
        match (a.value(), b.value()) {
            (Some(x), Some(y)) => {
                let scale = x.norm().max(y.norm());
                let d = if scale == 0.0 {
                    0.0
                } else {
                    (x - y).norm() / scale
                };
                Cell::Value(C64::new(d, 0.0))
            }
            _ => Cell::Token("n/a"),
        }
    }

    pub fn cf_vs_solve(&self) -> Cell {
        Self::diff(&self.closed_form, &self.linear_solve)
    }

    pub fn cf_vs_integration(&self) -> Cell {
        Self::diff(&self.closed_form, &self.integration)
    }

    pub fn solve_vs_integration(&self) -> Cell {
        Self::diff(&self.linear_solve, &self.integration)
    }
}

/// Probe coherence assembled from time-integrated branch states.
pub fn integrated_coherence(
    p: &SystemParams,
    delta_p: f64,
    t_max: f64,
    tol: f64,
) -> Result<C64, &'static str> {
    let f = DressedFrame::from_params(p);
    let mut x0 = [C64::new(0.0, 0.0); 2];
    for (k, branch) in Branch::BOTH.into_iter().enumerate() {
        let sys = steady::build_linear_system(p, delta_p, branch);
        let rep = oracle::integrate_to_steady(&sys, oracle::suggested_dt(&sys), t_max, tol)
            .map_err(|e| error_token(&e))?;
        if !rep.converged {
            return Err("NotConverged");
        }
        x0[k] = rep.final_state[0];
    }
    Ok(f.cos_b * x0[0] - f.sin_b * x0[1])
}

pub fn cmd_compare_oracle(
    p: &SystemParams,
    deltas: &[f64],
    t_max: f64,
    tol: f64,
) -> Vec<CompareRow> {
    deltas
        .iter()
        .map(|&d| CompareRow {
            delta_p: d,
            closed_form: Cell::from_result(steady::closed_form_coherence(p, d)),
            linear_solve: Cell::from_result(steady::steady_coherences(p, d).map(|s| s.rho_ab)),
            integration: match integrated_coherence(p, d, t_max, tol) {
                Ok(v) => Cell::Value(v),
                Err(t) => Cell::Token(t),
            },
        })
        .collect()
}

fn cell_pair(c: &Cell) -> [String; 2] {
    match c {
        Cell::Value(v) => [num(v.re), num(v.im)],
        Cell::Token(t) => [t.to_string(), t.to_string()],
    }
}

fn cell_real(c: &Cell) -> String {
    match c {
        Cell::Value(v) => num(v.re),
        Cell::Token(t) => t.to_string(),
    }
}

pub fn render_compare(rows: &[CompareRow]) -> String {
    let mut s = String::from(COMPARE_HEADER);
    s.push('\n');
    for r in rows {
        let mut cols = vec![num(r.delta_p)];
        for c in [&r.closed_form, &r.linear_solve, &r.integration] {
            cols.extend(cell_pair(c));
        }
        cols.push(cell_real(&r.cf_vs_solve()));
        cols.push(cell_real(&r.cf_vs_integration()));
        cols.push(cell_real(&r.solve_vs_integration()));
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_params(
    common: &Common,
    cfg: &FileConfig,
    strictness: Strictness,
) -> Result<(SystemParams, f64), CliError> {
    let units = common.units.or(cfg.units).unwrap_or(Units::GammaAb);
    let div = unit_divisor(units, &cfg.params)?;
    let p = cfg
        .params
        .scale_rates(1.0 / div)
        .validate_with(strictness)?;
    Ok((p, div))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Scan(args) => {
            let cfg = load_config(&args.common.config)?;
            let req = ScanRequest::resolve(args, &cfg)?;
            let out = cmd_scan(&req)?;
            emit(&args.common.out, &render_scan(&req, &out))
        }
        Command::SweepPhi(args) => {
            let cfg = load_config(&args.common.config)?;
            let (p, _) = resolve_params(&args.common, &cfg, Strictness::Strict)?;
            let rows = cmd_sweep_phi(&p, &parse_list(&args.phi, "--phi")?)?;
            emit(&args.common.out, &render_sweep(&rows))
        }
        Command::CompareOracle(args) => {
            let cfg = load_config(&args.common.config)?;
            let (p, div) = resolve_params(&args.common, &cfg, Strictness::AllowUndamped)?;
            let deltas: Vec<f64> = parse_list(&args.delta_p, "--delta-p")?
                .into_iter()
                .map(|d| d / div)
                .collect();
            let rows = cmd_compare_oracle(&p, &deltas, args.t_max, args.tol);
            emit(&args.common.out, &render_compare(&rows))
        }
    }
}
