use serde::Serialize;
use serde_json::{json, Value};

use maslov_core::maslov::{loop_index, winding_with_trace, CrossingEvent, LagrangianPath, RotationPath};
use maslov_core::morse::{
    conjugate_points, hessian_index_fd, morse_report, rectangle_check, rectangle_spec, sl_eigs_fd_below, spectral_count,
};
use maslov_core::{Error, RealMatrix};

use crate::config::{parse_config, ConfigError, RunConfig};
use crate::presets;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Conjugate,
    Spectrum,
    Hessian,
    Rectangle,
    Index,
    MaslovLoop,
    Presets,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Conjugate => "conjugate",
            Command::Spectrum => "spectrum",
            Command::Hessian => "hessian",
            Command::Rectangle => "rectangle",
            Command::Index => "index",
            Command::MaslovLoop => "maslov-loop",
            Command::Presets => "presets",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

pub const EXIT_OK: i32 = 0;
/// The computation ran but the certificate or residual check failed.
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// What a run produced: the document for stdout (or `--out`), and the
/// process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
    /// Message for stderr, if any.
    pub error: Option<String>,
}

/// Result table for CSV output.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }
}

struct Success {
    result: Value,
    table: Table,
    passed: bool,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::InvalidSpec(_)
        | Error::InvalidLoop(_)
        | Error::Domain { .. }
        | Error::ChartDomain(_) => EXIT_BAD_INPUT,
        Error::CertificationFailure(_) => EXIT_FAILED_CHECK,
        Error::Singular | Error::NumericalFailure { .. } | Error::EndpointDegenerate { .. } => EXIT_NUMERICAL,
    }
}

enum Failure {
    Config(ConfigError),
    Core(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn event_rows(table: &mut Table, events: &[CrossingEvent]) {
    for e in events {
        for (sign, slope) in e.signs.iter().zip(&e.slope_estimates) {
            table.rows.push(vec![e.u_star.to_string(), e.multiplicity.to_string(), sign.to_string(), slope.to_string()]);
        }
    }
}

const EVENT_HEADER: [&str; 4] = ["u_star", "multiplicity", "sign", "slope"];

fn conjugate(cfg: &RunConfig) -> Result<Success, Failure> {
    let r = cfg.resolve()?;
    let c = conjugate_points(&r.profile, &r.settings)?;
    let mut table = Table::new(&EVENT_HEADER);
    event_rows(&mut table, &c.events);
    Ok(Success {
        result: to_value(&c),
        table,
        passed: true,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Success, Failure> {
    let r = cfg.resolve()?;
    let spec = rectangle_spec(&r.profile, &r.settings, r.params.lambda0)?;
    let s = spectral_count(&spec, &r.settings)?;
    let fd = sl_eigs_fd_below(&r.profile, r.settings.mesh, 0.0)?;
    let mut table = Table::new(&EVENT_HEADER);
    event_rows(&mut table, &s.events);
    Ok(Success {
        result: json!({
            "eigenvalues": s.eigenvalues(),
            "total": s.total,
            "flow": s,
            "fd_mesh": r.settings.mesh,
            "fd_negative_eigenvalues": fd,
        }),
        table,
        passed: true,
    })
}

fn hessian(cfg: &RunConfig) -> Result<Success, Failure> {
    let r = cfg.resolve()?;
    let meshes = r
        .params
        .meshes
        .clone()
        .unwrap_or_else(|| vec![r.settings.mesh, 2 * r.settings.mesh]);
    if meshes.is_empty() {
        return Err(ConfigError("subcommand-params.meshes must not be empty".into()).into());
    }
    let mut table = Table::new(&["mesh", "index"]);
    let mut counts = Vec::new();
    for &m in &meshes {
        let k = hessian_index_fd(&r.profile, m)?;
        table.rows.push(vec![m.to_string(), k.to_string()]);
        counts.push(json!({ "mesh": m, "index": k }));
    }
    let stable = table.rows.windows(2).all(|w| w[0][1] == w[1][1]);
    Ok(Success {
        result: json!({ "counts": counts, "stable": stable }),
        table,
        passed: true,
    })
}

fn rectangle(cfg: &RunConfig) -> Result<Success, Failure> {
    let r = cfg.resolve()?;
    let spec = rectangle_spec(&r.profile, &r.settings, r.params.lambda0)?;
    let report = rectangle_check(&spec, &r.settings)?;
    let mut table = Table::new(&["edge", "u", "phase"]);
    for e in &report.edges {
        for (u, ph) in &e.scan.trace {
            table.rows.push(vec![e.name.to_string(), u.to_string(), ph.to_string()]);
        }
    }
    Ok(Success {
        passed: report.residual == 0,
        result: to_value(&report),
        table,
    })
}

fn index(cfg: &RunConfig) -> Result<Success, Failure> {
    let r = cfg.resolve()?;
    let (report, passed) = match morse_report(&r.profile, &r.settings) {
        Ok(rep) => (rep, true),
        Err(Error::CertificationFailure(rep)) => (*rep, false),
        Err(e) => return Err(e.into()),
    };
    let mut table = Table::new(&EVENT_HEADER);
    event_rows(&mut table, &report.conjugate_events);
    Ok(Success {
        result: to_value(&report),
        table,
        passed,
    })
}

fn maslov_loop(cfg: &RunConfig) -> Result<Success, Failure> {
    let s = match &cfg.params.s {
        Some(s) => s.clone(),
        None => {
            let n = match cfg.n {
                Some(n) => n,
                None => cfg.resolve()?.profile.n(),
            };
            RealMatrix::from_diagonal(&(1..=n).map(|k| k as f64).collect::<Vec<_>>())
        }
    };
    let samples = cfg.params.samples.unwrap_or(64);
    let settings = cfg.settings.morse();
    let path = RotationPath::graph_loop(&s)?;
    let idx = loop_index(&[&path as &dyn LagrangianPath], &settings.scan)?;
    let (acc, trace) = winding_with_trace(&path, samples)?;
    let mut table = Table::new(&["u", "phase"]);
    for (u, ph) in &trace {
        table.rows.push(vec![u.to_string(), ph.to_string()]);
    }
    Ok(Success {
        result: json!({
            "s": s,
            "intersection": idx.intersection,
            "winding": idx.winding,
            "maslov": idx.maslov,
            "trace_winding": acc.winding(),
            "edges": idx.edges,
        }),
        table,
        passed: true,
    })
}

fn preset_list() -> Success {
    let list = presets::catalog();
    let mut table = Table::new(&["name", "conjugate_total", "spectral_total", "hessian_index"]);
    for p in &list {
        let cell = |f: fn(&presets::Expected) -> usize| p.expected.as_ref().map(|e| f(e).to_string()).unwrap_or_default();
        table.rows.push(vec![
            p.name.to_string(),
            cell(|e| e.conjugate_total),
            cell(|e| e.spectral_total),
            cell(|e| e.hessian_index),
        ]);
    }
    Success {
        result: to_value(&list),
        table,
        passed: true,
    }
}

fn render(command: Command, input: Option<&RunConfig>, s: Success, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let doc = json!({
                "command": command.name(),
                "status": if s.passed { "ok" } else { "failed" },
                "input": input,
                "result": s.result,
            });
            let mut out = serde_json::to_string_pretty(&doc).expect("JSON document");
            out.push('\n');
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&s.table.header).expect("in-memory CSV");
            for row in &s.table.rows {
                w.write_record(row).expect("in-memory CSV");
            }
            String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8 CSV")
        }
    }
}

/// Runs one subcommand on a configuration document.
pub fn run(command: Command, config_text: Option<&str>, format: OutputFormat) -> Outcome {
    if command == Command::Presets {
        return Outcome {
            output: render(command, None, preset_list(), format),
            exit_code: EXIT_OK,
            error: None,
        };
    }
    let fail = |code: i32, msg: String| Outcome {
        output: String::new(),
        exit_code: code,
        error: Some(msg),
    };
    let Some(text) = config_text else {
        return fail(EXIT_BAD_INPUT, format!("`{}` needs a configuration", command.name()));
    };
    let cfg = match parse_config(text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_BAD_INPUT, format!("configuration: {e}")),
    };
    let result = match command {
        Command::Conjugate => conjugate(&cfg),
        Command::Spectrum => spectrum(&cfg),
        Command::Hessian => hessian(&cfg),
        Command::Rectangle => rectangle(&cfg),
        Command::Index => index(&cfg),
        Command::MaslovLoop => maslov_loop(&cfg),
        Command::Presets => unreachable!(),
    };
    match result {
        Ok(s) => {
            let passed = s.passed;
            Outcome {
                output: render(command, Some(&cfg), s, format),
                exit_code: if passed { EXIT_OK } else { EXIT_FAILED_CHECK },
                error: (!passed).then(|| format!("{}: check failed", command.name())),
            }
        }
        Err(Failure::Config(e)) => fail(EXIT_BAD_INPUT, format!("configuration: {e}")),
        Err(Failure::Core(e)) => fail(exit_code_for(&e), e.to_string()),
    }
}
