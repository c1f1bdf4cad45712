//! Command-line front end.
//!
//! [`run`] parses arguments and returns the exit code together with the text
//! destined for stdout and stderr, so the whole front end can be tested
//! without spawning processes. Exit codes: 0 on success, 2 on invalid
//! input, 3 when a computation or a verification fails. Failures also put a
//! JSON error object `{"error": {"kind": ..., "message": ...}}` on stderr.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::cocycle::{verify_cocycle, ChartFile, CocycleError, CocycleReport};
use crate::diffalg::DiffPoly;
use crate::foliation::{
    foliation_vector_field, graph_report, omega_minus, partial_connection_matrix, sigma_minus,
    FoliationError, FoliationJson,
};
use crate::gauge::{diagonal_matrix, gauge_transform, miura_eliminate, GaugeError, MiuraJson};
use crate::numeric::{
    free_fields_along_path, integrate_fundamental, matrix_from_json, matrix_to_rows, monodromy,
    verify_miura_numeric, CMatrix, FreeFieldOptions, IntegrationOptions, MiuraNumericReport,
    NumericError, Path, PotentialSpec, C64,
};

/// Operation → subcommand through which it is reached.
pub const DISPATCH: &[(&str, &str)] = &[
    ("ring_ops", "symbolic"),
    ("total_derive", "symbolic"),
    ("companion_matrix", "symbolic"),
    ("diagonal_matrix", "symbolic"),
    ("gauge_transform", "symbolic"),
    ("miura_eliminate", "symbolic"),
    ("partial_u", "foliation"),
    ("sigma_minus", "foliation"),
    ("omega_minus", "foliation"),
    ("partial_connection_matrix", "foliation"),
    ("foliation_vector_field", "foliation"),
    ("verify_miura_graph", "foliation"),
    ("evaluate", "numeric"),
    ("integrate_fundamental", "numeric"),
    ("gauss_factorize", "numeric"),
    ("free_fields_along_path", "numeric"),
    ("verify_miura_numeric", "numeric"),
    ("monodromy", "monodromy"),
    ("transition_rank2", "cocycle"),
    ("transition_rank3", "cocycle"),
    ("verify_cocycle", "cocycle"),
];

/// Largest `|det − 1|` accepted for a monodromy matrix.
pub const MONODROMY_DET_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "miura", version, about = "Miura transformation toolkit for sl(n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Miura transformation w_i(a) and the gauge matrix N₋.
    Symbolic {
        #[arg(long)]
        rank: usize,
    },
    /// Foliation forms, their vector field and the graph check.
    Foliation {
        #[arg(long)]
        rank: usize,
    },
    /// Free fields along a path and numeric Miura residuals.
    Numeric {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        path: PathBuf,
        /// Initial frame, `[[[re, im], ...], ...]`; identity when absent.
        #[arg(long)]
        m0: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-9)]
        minor_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        residual_tol: f64,
    },
    /// Monodromy around a closed loop.
    Monodromy {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long = "loop")]
        loop_path: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
    },
    /// Cocycle identity for two chart changes.
    Cocycle {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        charts: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Symbolic { .. } => "symbolic",
            Command::Foliation { .. } => "foliation",
            Command::Numeric { .. } => "numeric",
            Command::Monodromy { .. } => "monodromy",
            Command::Cocycle { .. } => "cocycle",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("{what} = {value:e} is not below the tolerance {tol:e}")]
    Tolerance { what: &'static str, value: f64, tol: f64 },
}

fn gauge_is_validation(e: &GaugeError) -> bool {
    matches!(e, GaugeError::RankTooSmall(_) | GaugeError::GuardExceeded { .. })
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let validation = match self {
            CliError::Io { .. } | CliError::InvalidOption(_) => true,
            CliError::Gauge(e) | CliError::Foliation(FoliationError::Gauge(e)) => {
                gauge_is_validation(e)
            }
            CliError::Foliation(_) => false,
            CliError::Numeric(e) => e.is_validation(),
            CliError::Cocycle(e) => matches!(
                e,
                CocycleError::Degenerate | CocycleError::UnsupportedRank(_) | CocycleError::InvalidInput(_)
            ),
            CliError::Tolerance { .. } => false,
        };
        if validation {
            2
        } else {
            3
        }
    }

    pub fn kind(&self) -> String {
        let name = |dbg: String| dbg.split(['(', ' ', '{']).next().unwrap_or_default().to_owned();
        match self {
            CliError::Io { .. } => "Io".into(),
            CliError::InvalidOption(_) => "InvalidOption".into(),
            CliError::Gauge(e) | CliError::Foliation(FoliationError::Gauge(e)) => name(format!("{e:?}")),
            CliError::Foliation(e) => name(format!("{e:?}")),
            CliError::Numeric(NumericError::Gauge(e)) => name(format!("{e:?}")),
            CliError::Numeric(e) => name(format!("{e:?}")),
            CliError::Cocycle(e) => name(format!("{e:?}")),
            CliError::Tolerance { .. } => "ToleranceExceeded".into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

/// Exit code and captured output of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and executes the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    log::debug!("running {}", cli.command.name());
    let mut out = String::new();
    match execute(&cli, &mut out) {
        Ok(()) => Outcome { code: 0, stdout: out, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: out, stderr: format!("{}\n", e.to_json()) },
    }
}

fn execute(cli: &Cli, out: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::Symbolic { rank } => symbolic(*rank, cli.format, out),
        Command::Foliation { rank } => foliation(*rank, cli.format, out),
        Command::Numeric { potential, path, m0, rtol, minor_tol, residual_tol } => {
            check_tol("rtol", *rtol)?;
            check_tol("minor-tol", *minor_tol)?;
            check_tol("residual-tol", *residual_tol)?;
            let pot = PotentialSpec::from_json(&read(potential)?)?;
            let path = Path::from_json(&read(path)?)?;
            let m0 = match m0 {
                Some(p) => matrix_from_json(&read(p)?)?,
                None => CMatrix::identity(pot.n(), pot.n()),
            };
            let opts = FreeFieldOptions {
                integration: IntegrationOptions { rtol: *rtol, ..Default::default() },
                minor_tol: *minor_tol,
                ..Default::default()
            };
            numeric(&pot, &path, &m0, &opts, *residual_tol, cli.format, out)
        }
        Command::Monodromy { potential, loop_path, rtol } => {
            check_tol("rtol", *rtol)?;
            let pot = PotentialSpec::from_json(&read(potential)?)?;
            let lp = Path::from_json(&read(loop_path)?)?;
            let opts = IntegrationOptions { rtol: *rtol, ..Default::default() };
            monodromy_cmd(&pot, &lp, &opts, cli.format, out)
        }
        Command::Cocycle { rank, charts, tol } => {
            check_tol("tol", *tol)?;
            let file = ChartFile::from_json(&read(charts)?)?;
            let (f_ab, f_bg) = file.charts()?;
            let report = verify_cocycle(*rank, &f_ab, &f_bg, &file.points(), file.branches, *tol)?;
            cocycle_out(&report, cli.format, out);
            if !report.passed {
                return Err(CliError::Tolerance {
                    what: "cocycle deviation",
                    value: report.max_deviation,
                    tol: *tol,
                });
            }
            Ok(())
        }
    }
}

fn read(p: &FsPath) -> Result<String, CliError> {
    std::fs::read_to_string(p)
        .map_err(|e| CliError::Io { path: p.display().to_string(), message: e.to_string() })
}

fn check_tol(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::InvalidOption(format!("--{name} must be positive, got {v}")))
    }
}

/// 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_complex(z: C64) -> String {
    format!("{:.16e} {:+.16e}i", z.re, z.im)
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn json_line<T: Serialize>(value: &T, out: &mut String) {
    out.push_str(&serde_json::to_string_pretty(value).expect("report serializes"));
    out.push('\n');
}

#[derive(Serialize)]
struct SymbolicJson {
    #[serde(flatten)]
    miura: MiuraJson,
    gauge_roundtrip: bool,
}

fn symbolic(rank: usize, format: Format, out: &mut String) -> Result<(), CliError> {
    let miura = miura_eliminate(rank)?;
    let roundtrip = gauge_transform(&miura.companion(), &miura.n_minus)? == diagonal_matrix(rank)?;
    match format {
        Format::Text => {
            out.push_str(&miura.to_text());
            let _ = writeln!(out, "gauge_roundtrip = {}", if roundtrip { "exact" } else { "FAILED" });
        }
        Format::Json => json_line(&SymbolicJson { miura: miura.to_json(), gauge_roundtrip: roundtrip }, out),
    }
    if roundtrip {
        Ok(())
    } else {
        Err(CliError::Tolerance { what: "gauge roundtrip defect", value: 1.0, tol: 0.0 })
    }
}

#[derive(Serialize)]
struct FoliationOut {
    #[serde(flatten)]
    system: FoliationJson,
    sigma_minus: Vec<Vec<String>>,
    partial_connection: Vec<Vec<String>>,
    vector_field: Vec<String>,
    graph_residuals: Vec<String>,
    tangent_residuals: Vec<String>,
    exact: bool,
}

fn foliation(rank: usize, format: Format, out: &mut String) -> Result<(), CliError> {
    let miura = miura_eliminate(rank)?;
    let sys = omega_minus(rank)?;
    sys.check_triangular()?;
    let sigma = sigma_minus(rank)?;
    let partial = partial_connection_matrix(rank)?;
    let field = foliation_vector_field(&sys)?;
    let report = graph_report(&sys, &miura)?;
    let strings = |v: &[DiffPoly]| v.iter().map(DiffPoly::to_string).collect::<Vec<_>>();
    let g: Vec<DiffPoly> = (1..=sys.forms.len()).map(|m| field.component(m)).collect();
    match format {
        Format::Text => {
            out.push_str(&sys.to_text());
            out.push_str("sigma_minus:\n");
            for row in sigma.to_strings() {
                let _ = writeln!(out, "  [{}]", row.join(", "));
            }
            out.push_str("partial_connection:\n");
            for row in partial.to_strings() {
                let _ = writeln!(out, "  [{}]", row.join(", "));
            }
            out.push_str("vector_field:\n");
            for (m, c) in g.iter().enumerate() {
                let _ = writeln!(out, "  du{}/dz = {}", m + 1, c);
            }
            out.push_str("graph_residuals:\n");
            for (m, (r, t)) in report.residuals.iter().zip(&report.tangent_residuals).enumerate() {
                let _ = writeln!(out, "  omega{} = {}, tangent = {}", m + 1, r, t);
            }
            let _ = writeln!(out, "exact = {}", report.is_exact());
        }
        Format::Json => json_line(
            &FoliationOut {
                system: sys.to_json(),
                sigma_minus: sigma.to_strings(),
                partial_connection: partial.to_strings(),
                vector_field: strings(&g),
                graph_residuals: strings(&report.residuals),
                tangent_residuals: strings(&report.tangent_residuals),
                exact: report.is_exact(),
            },
            out,
        ),
    }
    if report.is_exact() {
        Ok(())
    } else {
        Err(CliError::Tolerance { what: "graph residual", value: 1.0, tol: 0.0 })
    }
}

#[derive(Serialize)]
struct SampleJson {
    z: [f64; 2],
    minors: Vec<[f64; 2]>,
    a: Option<Vec<[f64; 2]>>,
    in_big_cell: bool,
}

#[derive(Serialize)]
struct NumericOut {
    n: usize,
    det_drift: f64,
    end_frame: Vec<Vec<[f64; 2]>>,
    samples: Vec<SampleJson>,
    violations: Vec<[f64; 2]>,
    miura: Option<MiuraNumericReport>,
    residual_tol: f64,
    passed: Option<bool>,
}

fn numeric(
    pot: &PotentialSpec,
    path: &Path,
    m0: &CMatrix,
    opts: &FreeFieldOptions,
    residual_tol: f64,
    format: Format,
    out: &mut String,
) -> Result<(), CliError> {
    if m0.nrows() != pot.n() {
        return Err(NumericError::InvalidFrame(format!(
            "initial frame is {}x{}, the potential has rank {}",
            m0.nrows(),
            m0.ncols(),
            pot.n()
        ))
        .into());
    }
    let sol = integrate_fundamental(pot, path, m0, &opts.integration)?;
    let trace = free_fields_along_path(pot, path, m0, opts)?;
    let violations: Vec<C64> = trace.violations().map(|s| s.z).collect();
    let miura = if violations.is_empty() {
        Some(verify_miura_numeric(pot, path, m0, opts)?)
    } else {
        None
    };
    let passed = miura.as_ref().map(|r| r.worst() < residual_tol);
    let report = NumericOut {
        n: pot.n(),
        det_drift: trace.det_drift,
        end_frame: matrix_to_rows(&sol.end().m),
        samples: trace
            .samples
            .iter()
            .map(|s| SampleJson {
                z: pair(s.z),
                minors: s.minors.iter().copied().map(pair).collect(),
                a: s.a.as_ref().map(|a| a.iter().copied().map(pair).collect()),
                in_big_cell: s.in_big_cell,
            })
            .collect(),
        violations: violations.iter().copied().map(pair).collect(),
        miura,
        residual_tol,
        passed,
    };
    match format {
        Format::Json => json_line(&report, out),
        Format::Text => numeric_text(&report, &trace.samples, out),
    }
    match (&report.miura, passed) {
        (Some(m), Some(false)) => {
            Err(CliError::Tolerance { what: "Miura residual", value: m.worst(), tol: residual_tol })
        }
        _ => Ok(()),
    }
}

fn numeric_text(report: &NumericOut, samples: &[crate::numeric::FreeFieldSample], out: &mut String) {
    let _ = writeln!(out, "n = {}", report.n);
    let _ = writeln!(out, "det_drift = {}", fmt_real(report.det_drift));
    out.push_str("samples:\n");
    for s in samples {
        let minors: Vec<String> = s.minors.iter().map(|&m| fmt_complex(m)).collect();
        let a = match &s.a {
            Some(a) => a.iter().map(|&x| fmt_complex(x)).collect::<Vec<_>>().join(", "),
            None => "-".into(),
        };
        let _ = writeln!(
            out,
            "  z = {} | minors = {} | a = {} | big_cell = {}",
            fmt_complex(s.z),
            minors.join(", "),
            a,
            s.in_big_cell
        );
    }
    let _ = writeln!(out, "violations = {}", report.violations.len());
    for &[re, im] in &report.violations {
        let _ = writeln!(out, "  z = {}", fmt_complex(C64::new(re, im)));
    }
    match &report.miura {
        Some(m) => {
            for (k, r) in m.max_residual.iter().enumerate() {
                let _ = writeln!(out, "max_residual w{} = {}", k + 2, fmt_real(*r));
            }
            let _ = writeln!(out, "residual_points = {}", m.points.len());
            let _ = writeln!(out, "passed = {}", report.passed == Some(true));
        }
        None => out.push_str("max_residual = skipped (path leaves the big cell)\n"),
    }
}

#[derive(Serialize)]
struct MonodromyOut {
    matrix: Vec<Vec<[f64; 2]>>,
    det: [f64; 2],
    det_error: f64,
    det_ok: bool,
    steps: usize,
}

fn monodromy_cmd(
    pot: &PotentialSpec,
    lp: &Path,
    opts: &IntegrationOptions,
    format: Format,
    out: &mut String,
) -> Result<(), CliError> {
    let m = monodromy(pot, lp, opts)?;
    let det_error = (m.det - 1.0).norm();
    let ok = det_error < MONODROMY_DET_TOL;
    match format {
        Format::Json => json_line(
            &MonodromyOut {
                matrix: matrix_to_rows(&m.matrix),
                det: pair(m.det),
                det_error,
                det_ok: ok,
                steps: m.steps,
            },
            out,
        ),
        Format::Text => {
            out.push_str("monodromy:\n");
            for i in 0..m.matrix.nrows() {
                for j in 0..m.matrix.ncols() {
                    let _ = writeln!(out, "  [{},{}] = {}", i + 1, j + 1, fmt_complex(m.matrix[(i, j)]));
                }
            }
            let _ = writeln!(out, "det = {}", fmt_complex(m.det));
            let _ = writeln!(out, "det_error = {}", fmt_real(det_error));
            let _ = writeln!(out, "steps = {}", m.steps);
        }
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Tolerance { what: "|det − 1|", value: det_error, tol: MONODROMY_DET_TOL })
    }
}

fn cocycle_out(report: &CocycleReport, format: Format, out: &mut String) {
    match format {
        Format::Json => json_line(report, out),
        Format::Text => {
            let _ = writeln!(out, "rank = {}", report.rank);
            for p in &report.points {
                let _ = writeln!(
                    out,
                    "  z = {} | deviation = {} | det_error = {} | upper = {}",
                    fmt_complex(C64::new(p.z[0], p.z[1])),
                    fmt_real(p.deviation),
                    fmt_real(p.det_error),
                    fmt_real(p.upper_max)
                );
            }
            let _ = writeln!(out, "max_deviation = {}", fmt_real(report.max_deviation));
            let _ = writeln!(out, "max_det_error = {}", fmt_real(report.max_det_error));
            let _ = writeln!(out, "max_upper = {}", fmt_real(report.max_upper));
            let _ = writeln!(out, "passed = {}", report.passed);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use std::collections::BTreeSet;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("miura").chain(args.iter().copied()))
    }

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn dispatch_covers_each_operation_once() {
        let ops = [
            "ring_ops", "total_derive", "partial_u", "evaluate", "companion_matrix",
            "diagonal_matrix", "gauge_transform", "miura_eliminate", "sigma_minus",
            "omega_minus", "partial_connection_matrix", "foliation_vector_field",
            "verify_miura_graph", "integrate_fundamental", "gauss_factorize",
            "free_fields_along_path", "verify_miura_numeric", "monodromy",
            "transition_rank2", "transition_rank3", "verify_cocycle",
        ];
        for op in ops {
            assert_eq!(DISPATCH.iter().filter(|(o, _)| *o == op).count(), 1, "{op}");
        }
        assert_eq!(DISPATCH.len(), ops.len());
        let cmd = Cli::command();
        let subs: BTreeSet<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        let used: BTreeSet<&str> = DISPATCH.iter().map(|(_, s)| *s).collect();
        assert_eq!(subs, used);
    }

    #[test]
    fn symbolic_rank_two() {
        let o = run_args(&["symbolic", "--rank", "2", "--format", "text"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.starts_with("w2 = -Da1 + a1^2\n"));
        assert!(o.stdout.contains("gauge_roundtrip = exact"));
    }

    #[test]
    fn rank_one_is_rejected() {
        let o = run_args(&["symbolic", "--rank", "1"]);
        assert_eq!(o.code, 2);
        assert!(o.stderr.contains("RankTooSmall"));
        let o = run_args(&["foliation", "--rank", "1"]);
        assert_eq!(o.code, 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["symbolic"]).code, 2);
        assert_eq!(run_args(&["bogus"]).code, 2);
        let help = run_args(&["--help"]);
        assert_eq!(help.code, 0);
        assert!(help.stdout.contains("symbolic"));
    }

    #[test]
    fn missing_file_exits_two() {
        let o = run_args(&["monodromy", "--potential", "/nonexistent/p.json", "--loop", "/nonexistent/l.json"]);
        assert_eq!(o.code, 2);
        assert!(o.stderr.contains("\"kind\":\"Io\""));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_complex(C64::new(1.0, -0.5)), "1.0000000000000000e0 -5.0000000000000000e-1i");
    }
}
