//! JSON-configured experiments: parsing, validation, execution and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bv::{bv_dual, bv_primal_smooth, BvOptions};
use crate::domain::Domain;
use crate::error::Error;
use crate::field::ComplexField;
use crate::functionals::{
    fractional_magnetic_energy, local_magnetic_energy, weighted_difference_energy, EnergyResult, QuadratureSpec,
};
use crate::grid_csv::{self, Layout};
use crate::harness::{extrapolate_limit, fit_limit, sweep, sweep_csv, sweep_svg, EnergyForm, FitModel, DEFAULT_S_GRID};
use crate::kernels::{bbm_kernel, validate_kernel_sequence};
use crate::perimeter::{indicator_bv, perimeter_csv, perimeter_sweep};
use crate::potential::MagneticPotential;
use crate::shape::ShapeSet;
use crate::sphere::{q_constant, SphereRule, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Seminorm,
    LocalEnergy,
    Bv,
    Perimeter,
    BbmSweep,
    QConstant,
    KernelCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Seminorm => "seminorm",
            Command::LocalEnergy => "local-energy",
            Command::Bv => "bv",
            Command::Perimeter => "perimeter",
            Command::BbmSweep => "bbm-sweep",
            Command::QConstant => "q-constant",
            Command::KernelCheck => "kernel-check",
        }
    }

    fn needs_domain(self) -> bool {
        !matches!(self, Command::QConstant | Command::KernelCheck)
    }

    fn needs_field(self) -> bool {
        matches!(self, Command::Seminorm | Command::LocalEnergy | Command::Bv | Command::BbmSweep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    /// `x1..xN,inside` CSV on the same grid; replaces the full-box mask.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { re: f64, #[serde(default)] im: f64 },
    Linear { slope: Vec<f64>, #[serde(default)] offset: f64 },
    PlaneWave { wave: Vec<f64> },
    Gaussian { center: Vec<f64>, width: f64 },
    Bump { center: Vec<f64>, radius: f64 },
    Indicator { set: ShapeSet },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    Constant { a: Vec<f64> },
    Landau { b: f64 },
    Radial { alpha: f64 },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_list: Option<Vec<f64>>,
    /// Sphere dimension for q-constant and kernel-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Kernel cutoff radius r_Ω for the kernel form and kernel-check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_omega: Option<f64>,
    /// Set E for the perimeter command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<ShapeSet>,
    #[serde(default)]
    pub kernel_form: bool,
    #[serde(default)]
    pub fit: FitModel,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub bv: BvOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            domain: None,
            field: None,
            potential: PotentialSpec::Zero,
            p: None,
            s: None,
            s_list: None,
            dim: None,
            r_omega: None,
            set: None,
            kernel_form: false,
            fit: FitModel::Auto,
            quadrature: QuadratureSpec::default(),
            bv: BvOptions::default(),
            seed: None,
            out: None,
        }
    }

    /// Fills every defaulted value so the config can be echoed in full.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.p.get_or_insert(match c.command {
            Command::Bv | Command::Perimeter => 1.0,
            _ => 2.0,
        });
        match c.command {
            Command::BbmSweep | Command::KernelCheck | Command::Perimeter if c.s_list.is_none() => {
                c.s_list = Some(match (c.command, c.s) {
                    (_, Some(s)) => vec![s],
                    (Command::KernelCheck, None) => vec![0.5, 0.7, 0.9, 0.99],
                    _ => DEFAULT_S_GRID.to_vec(),
                });
            }
            _ => {}
        }
        if matches!(c.command, Command::KernelCheck) || c.kernel_form {
            c.r_omega.get_or_insert(1.0);
        }
        if matches!(c.command, Command::QConstant | Command::KernelCheck) {
            c.dim.get_or_insert(match &c.domain {
                Some(d) => d.lo.len(),
                None => 1,
            });
            c.seed.get_or_insert(DEFAULT_SEED);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Validation,
    Io,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), message: message.into(), kind: DiagnosticKind::Validation }
    }

    fn from_error(field: &str, e: &Error) -> Self {
        let kind = if matches!(e, Error::Io(_)) { DiagnosticKind::Io } else { DiagnosticKind::Validation };
        Diagnostic { field: field.into(), message: e.to_string(), kind }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub fn exit_for(diags: &[Diagnostic]) -> i32 {
    if diags.iter().any(|d| d.kind == DiagnosticKind::Io) {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

/// Reads a config file; unreadable files give an I/O diagnostic.
pub fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, Vec<Diagnostic>> {
    let text = fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic { field: "config".into(), message: format!("{}: {e}", path.display()), kind: DiagnosticKind::Io }]
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> std::result::Result<ExperimentConfig, Vec<Diagnostic>> {
    serde_json::from_str(text).map_err(|e| vec![Diagnostic::invalid("config", e.to_string())])
}

/// Everything built from a valid config.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub domain: Option<Arc<Domain>>,
    pub field: Option<ComplexField>,
    pub potential: MagneticPotential,
}

fn build_domain(spec: &DomainSpec) -> crate::Result<Domain> {
    let boxed = Domain::new_box(&spec.lo, &spec.hi, &spec.resolution)?;
    let Some(path) = &spec.mask_csv else { return Ok(boxed) };
    let g = grid_csv::load(path, Layout::Mask)?;
    if g.domain.resolution() != boxed.resolution() || g.domain.offset_in(&boxed) != Some(vec![0; boxed.dim()]) {
        return Err(Error::TensorGrid("mask grid does not match the domain grid".into()));
    }
    let mask = g.values.iter().map(|v| v[0] > 0.5).collect();
    Domain::with_mask(&spec.lo, &spec.hi, &spec.resolution, mask)
}

fn build_field(spec: &FieldSpec, domain: &Arc<Domain>) -> crate::Result<ComplexField> {
    let d = domain.clone();
    match spec {
        FieldSpec::Constant { re, im } => ComplexField::constant(d, Complex64::new(*re, *im)),
        FieldSpec::Linear { slope, offset } => ComplexField::linear(d, slope, *offset),
        FieldSpec::PlaneWave { wave } => ComplexField::plane_wave(d, wave),
        FieldSpec::Gaussian { center, width } => ComplexField::gaussian(d, center, *width),
        FieldSpec::Bump { center, radius } => ComplexField::bump(d, center, *radius),
        FieldSpec::Indicator { set } => ComplexField::indicator(d, set.clone()),
        FieldSpec::Csv { path } => {
            let f = ComplexField::from_csv(path)?;
            if f.domain().resolution() != domain.resolution() || f.domain().offset_in(domain) != Some(vec![0; domain.dim()]) {
                return Err(Error::TensorGrid("field grid does not match the domain grid".into()));
            }
            Ok(f)
        }
    }
}

fn build_potential(spec: &PotentialSpec, dim: usize) -> crate::Result<MagneticPotential> {
    match spec {
        PotentialSpec::Zero => Ok(MagneticPotential::zero(dim)),
        PotentialSpec::Constant { a } => MagneticPotential::constant(a),
        PotentialSpec::Landau { b } => MagneticPotential::landau(dim, *b),
        PotentialSpec::Radial { alpha } => MagneticPotential::radial(dim, *alpha),
        PotentialSpec::Csv { path } => {
            let g = grid_csv::load(path, Layout::Potential)?;
            MagneticPotential::sampled(&g.domain, g.values)
        }
    }
}

fn check_s(field: &str, s: f64, diags: &mut Vec<Diagnostic>) {
    if !(s > 0.0 && s < 1.0) {
        diags.push(Diagnostic::invalid(field, format!("s must lie in (0, 1), got {s}")));
    }
}

/// All violations of `config`; empty when it is valid.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    match prepare(config) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

/// Validates and builds the experiment objects.
pub fn prepare(config: &ExperimentConfig) -> std::result::Result<Experiment, Vec<Diagnostic>> {
    let c = config.resolved();
    let mut diags = Vec::new();
    let p = c.p.unwrap_or(2.0);
    if !(p.is_finite() && p >= 1.0) {
        diags.push(Diagnostic::invalid("p", format!("p must be ≥ 1, got {p}")));
    }
    if let Some(s) = c.s {
        check_s("s", s, &mut diags);
    }
    if let Some(list) = &c.s_list {
        if list.is_empty() {
            diags.push(Diagnostic::invalid("s_list", "needs at least one value"));
        }
        for (i, &s) in list.iter().enumerate() {
            check_s(&format!("s_list[{i}]"), s, &mut diags);
        }
        if list.windows(2).any(|w| w[1] <= w[0]) {
            diags.push(Diagnostic::invalid("s_list", "values must be strictly increasing"));
        }
    }
    if matches!(c.command, Command::Seminorm) && c.s.is_none() {
        diags.push(Diagnostic::invalid("s", "seminorm needs s"));
    }
    if let Err(e) = c.quadrature.validate() {
        diags.push(Diagnostic::from_error("quadrature", &e));
    }
    if !(c.bv.tol > 0.0) {
        diags.push(Diagnostic::invalid("bv.tol", "must be > 0"));
    }
    if let Some(r) = c.r_omega {
        if !(r.is_finite() && r > 0.0) {
            diags.push(Diagnostic::invalid("r_omega", format!("must be > 0, got {r}")));
        }
    }
    if let Some(0) = c.dim {
        diags.push(Diagnostic::invalid("dim", "must be ≥ 1"));
    }

    let domain = match (&c.domain, c.command.needs_domain()) {
        (Some(spec), _) => match build_domain(spec) {
            Ok(d) => Some(Arc::new(d)),
            Err(e) => {
                diags.push(Diagnostic::from_error("domain", &e));
                None
            }
        },
        (None, true) => {
            diags.push(Diagnostic::invalid("domain", format!("{} needs a domain", c.command.name())));
            None
        }
        (None, false) => None,
    };
    let dim = domain.as_ref().map_or(c.dim.unwrap_or(1), |d| d.dim());
    let field = match (&c.field, &domain) {
        (Some(spec), Some(d)) => match build_field(spec, d) {
            Ok(f) => Some(f),
            Err(e) => {
                diags.push(Diagnostic::from_error("field", &e));
                None
            }
        },
        (None, _) if c.command.needs_field() => {
            diags.push(Diagnostic::invalid("field", format!("{} needs a field", c.command.name())));
            None
        }
        _ => None,
    };
    if matches!(c.command, Command::Perimeter) {
        match (&c.set, &c.field) {
            (Some(e), _) => {
                if let Err(err) = e.validate() {
                    diags.push(Diagnostic::from_error("set", &err));
                } else if e.dim().is_some_and(|n| n != dim) {
                    diags.push(Diagnostic::invalid("set", "set dimension differs from the domain"));
                }
            }
            (None, Some(FieldSpec::Indicator { .. })) => {}
            (None, _) => diags.push(Diagnostic::invalid("set", "perimeter needs a set")),
        }
    }
    let built = if c.command.needs_domain() { build_potential(&c.potential, dim) } else { Ok(MagneticPotential::zero(1)) };
    let potential = match built {
        Ok(a) if !c.command.needs_domain() => Some(a),
        Ok(a) if a.dim() != dim => {
            diags.push(Diagnostic::invalid("potential", format!("potential has dimension {}, domain {dim}", a.dim())));
            None
        }
        Ok(a) => Some(a),
        Err(e) => {
            diags.push(Diagnostic::from_error("potential", &e));
            None
        }
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(Experiment { config: c, domain, field, potential: potential.expect("checked above") })
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub exit_code: i32,
    /// One line per result.
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    threads: usize,
    config: &'a ExperimentConfig,
    files: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs a config and writes its outputs under `out` (or the config's `out`,
/// or the current directory).
pub fn run(config: &ExperimentConfig, out: Option<&Path>) -> RunReport {
    let exp = match prepare(config) {
        Ok(e) => e,
        Err(diagnostics) => {
            return RunReport { exit_code: exit_for(&diagnostics), diagnostics, ..RunReport::default() };
        }
    };
    let dir = out.map(Path::to_path_buf).or_else(|| exp.config.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = fs::create_dir_all(&dir) {
        let d = Diagnostic { field: "out".into(), message: format!("{}: {e}", dir.display()), kind: DiagnosticKind::Io };
        return RunReport { exit_code: EXIT_IO, diagnostics: vec![d], ..RunReport::default() };
    }
    let mut outputs = Outputs { dir, files: Vec::new() };
    let mut report = RunReport::default();
    match execute(&exp, &mut outputs, &mut report) {
        Ok(()) => {}
        Err(Failure::Compute(e)) => {
            let field = exp.config.command.name();
            report.diagnostics.push(Diagnostic::from_error(field, &e));
            report.exit_code = if matches!(e, Error::Io(_)) { EXIT_IO } else { EXIT_INVALID };
            return report;
        }
        Err(Failure::Io(e)) => {
            report.diagnostics.push(Diagnostic { field: "out".into(), message: e.to_string(), kind: DiagnosticKind::Io });
            report.exit_code = EXIT_IO;
            return report;
        }
    }
    let meta = Meta {
        command: exp.config.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        config: &exp.config,
        files: outputs.files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
    };
    let text = serde_json::to_string_pretty(&meta).expect("config serializes") + "\n";
    if let Err(e) = outputs.write("meta.json", &text) {
        report.diagnostics.push(Diagnostic { field: "out".into(), message: e.to_string(), kind: DiagnosticKind::Io });
        report.exit_code = EXIT_IO;
    }
    report.files = outputs.files;
    report
}

enum Failure {
    Compute(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn note_energy(report: &mut RunReport, label: &str, e: &EnergyResult) {
    let mut line = format!("{label}: value={:.12e} est_error={:.3e} node_pairs={}", e.value, e.est_error, e.node_pairs);
    if let Some(w) = &e.warning {
        line.push_str(&format!(" warning=\"{w}\""));
    }
    if !e.tolerance_met() {
        report.exit_code = EXIT_TOLERANCE;
    }
    report.summary.push(line);
}

fn energy_json(e: &EnergyResult) -> String {
    let mut v = serde_json::to_value(e).expect("energy serializes");
    if let Some(w) = &e.warning {
        v["warning"] = serde_json::Value::String(w.clone());
    }
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

fn execute(exp: &Experiment, out: &mut Outputs, report: &mut RunReport) -> std::result::Result<(), Failure> {
    let c = &exp.config;
    let p = c.p.expect("resolved");
    let a = &exp.potential;
    match c.command {
        Command::Seminorm => {
            let (u, d) = (exp.field.as_ref().unwrap(), exp.domain.as_ref().unwrap());
            let s = c.s.expect("validated");
            let e = if c.kernel_form {
                let rho = bbm_kernel(s, p, c.r_omega.unwrap(), d.dim())?;
                weighted_difference_energy(u, a, d, &rho, p, &c.quadrature)?
            } else {
                fractional_magnetic_energy(u, a, d, s, p, &c.quadrature)?
            };
            out.write("energy.json", &energy_json(&e))?;
            note_energy(report, "seminorm", &e);
        }
        Command::LocalEnergy => {
            let (u, d) = (exp.field.as_ref().unwrap(), exp.domain.as_ref().unwrap());
            let e = local_magnetic_energy(u, a, d, p)?;
            out.write("energy.json", &energy_json(&e))?;
            note_energy(report, "local-energy", &e);
        }
        Command::Bv => {
            let (u, d) = (exp.field.as_ref().unwrap(), exp.domain.as_ref().unwrap());
            let r = bv_dual(u, a, d, &c.bv)?;
            let mut v = serde_json::to_value(&r).expect("bv serializes");
            if u.is_smooth() {
                v["primal"] = serde_json::json!(bv_primal_smooth(u, a, d)?);
            }
            out.write("bv.json", &(serde_json::to_string_pretty(&v).expect("value serializes") + "\n"))?;
            report.summary.push(format!(
                "bv: c1={:.12e} c2={:.12e} total={:.12e} iterations={}",
                r.c1, r.c2, r.total, r.iterations
            ));
        }
        Command::Perimeter => {
            let d = exp.domain.as_ref().unwrap();
            let e = match (&c.set, &c.field) {
                (Some(e), _) => e.clone(),
                (None, Some(FieldSpec::Indicator { set })) => set.clone(),
                _ => unreachable!("validated"),
            };
            let rows = perimeter_sweep(&e, a, d, c.s_list.as_ref().unwrap(), &c.quadrature)?;
            out.write("perimeter.csv", &perimeter_csv(&rows))?;
            let bv = indicator_bv(&e, a, d)?;
            for r in &rows {
                report.summary.push(format!(
                    "perimeter: s={} Ps_classical={:.12e} Ps_magnetic={:.12e} (1-s)*full={:.12e} target={:.12e}",
                    r.s, r.ps_classical, r.ps_magnetic, r.normalized_full, r.target
                ));
                if let Some(w) = &r.warning {
                    report.summary.push(format!("perimeter: s={} warning=\"{w}\"", r.s));
                }
                if r.warning.as_deref().is_some_and(|w| w.contains("tolerance not met")) {
                    report.exit_code = EXIT_TOLERANCE;
                }
            }
            report.summary.push(format!("perimeter: indicator_bv={bv:.12e}"));
            if rows.len() >= 3 {
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 - r.s, r.normalized_full)).collect();
                let l = fit_limit(&pts, c.fit)?;
                out.write("limit.json", &(serde_json::to_string_pretty(&l).expect("limit serializes") + "\n"))?;
                report.summary.push(format!(
                    "perimeter: limit={:.12e} model={:?} residual={:.3e}",
                    l.extrapolated_value, l.fit_model, l.residual
                ));
            }
        }
        Command::BbmSweep => {
            let (u, d) = (exp.field.as_ref().unwrap(), exp.domain.as_ref().unwrap());
            let form = if c.kernel_form {
                EnergyForm::Kernel { r_omega: c.r_omega.unwrap() }
            } else {
                EnergyForm::Fractional
            };
            let table = sweep(u, a, d, p, c.s_list.as_ref().unwrap(), &c.quadrature, form)?;
            out.write("sweep.csv", &sweep_csv(&table))?;
            out.write("sweep.svg", &sweep_svg(&table))?;
            for r in &table.rows {
                report.summary.push(format!(
                    "bbm-sweep: s={} normalized={:.12e} target={:.12e} rel_error={:.3e}",
                    r.s, r.normalized, r.target, r.rel_error
                ));
                if let Some(w) = &r.warning {
                    report.summary.push(format!("bbm-sweep: s={} warning=\"{w}\"", r.s));
                }
                if r.warning.as_deref().is_some_and(|w| w.contains("tolerance not met")) {
                    report.exit_code = EXIT_TOLERANCE;
                }
            }
            if table.rows.len() >= 3 {
                let l = extrapolate_limit(&table, c.fit)?;
                out.write("limit.json", &(serde_json::to_string_pretty(&l).expect("limit serializes") + "\n"))?;
                report.summary.push(format!(
                    "bbm-sweep: limit={:.12e} model={:?} residual={:.3e}",
                    l.extrapolated_value, l.fit_model, l.residual
                ));
            }
        }
        Command::QConstant => {
            let n = c.dim.unwrap();
            let rule = SphereRule::with_seed(n, c.seed.unwrap())?;
            let q = q_constant(p, n, &rule)?;
            let v = serde_json::json!({ "p": p, "dim": n, "value": q, "nodes": rule.len(), "seed": rule.seed() });
            out.write("q_constant.json", &(serde_json::to_string_pretty(&v).expect("value serializes") + "\n"))?;
            report.summary.push(format!("{q}"));
        }
        Command::KernelCheck => {
            let n = c.dim.unwrap();
            let r = c.r_omega.unwrap();
            let kernels =
                c.s_list.as_ref().unwrap().iter().map(|&s| bbm_kernel(s, p, r, n)).collect::<crate::Result<Vec<_>>>()?;
            let rep = validate_kernel_sequence(&kernels, n)?;
            out.write("kernels.csv", &rep.to_csv())?;
            out.write("kernels.json", &(serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"))?;
            report.summary.push(format!(
                "kernel-check: tails_decreasing={} beta_moments_decreasing={} convergent={}",
                rep.tails_decreasing, rep.beta_moments_decreasing, rep.convergent
            ));
        }
    }
    Ok(())
}
