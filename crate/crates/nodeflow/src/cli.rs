//! The `nodeflow` command line.
//!
//! Exit codes: 0 success, 1 domain error (invalid problem, infeasible flow,
//! bad solver options, dimension limit, refusing to overwrite), 2 I/O or
//! parse error.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodeflow_core::geometry::DEFAULT_DIMENSION_LIMIT;
use nodeflow_core::{
    demo_problem, enumerate_vertices, hfs_residual, is_hfs, is_pareto_optimal, solve_flowmax,
    solve_greedy, solve_inm, FlowVector, MergingWeights, NodeProblem, Permutation, Rational,
    Scalar, SolverResult,
};
use serde_json::{json, Value};

use crate::number::{parse_rational, Render};
use crate::problem_file::{demo_json, parse_problem, to_pretty};
use crate::report::{CheckView, GeometryView, SolveView};
use crate::scene_file::{
    compose_scene, export_scene, flowmax_markers, greedy_name, inm_marker, letter_name,
    SceneContents,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "nodeflow",
    version,
    about = "Solve and check macroscopic traffic node models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a problem file and list its diagnostics.
    Validate {
        /// Problem file, or `demo` for the built-in junction.
        problem: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Allocate flows with one solver and report HFS and Pareto verdicts.
    Solve {
        problem: String,
        #[arg(long, value_enum, default_value_t = SolverChoice::Inm)]
        solver: SolverChoice,
        /// Merging weights for `inm`, one per incoming link, e.g. `0.1,10,1`.
        #[arg(long)]
        alpha: Option<String>,
        /// Incoming link labels in priority order for `greedy`, e.g. `N,S,E`.
        #[arg(long)]
        order: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Also write a scene file with the polytope and this solution.
        #[arg(long)]
        scene: Option<String>,
    },
    /// Report the holding-free residual and Pareto probe for a flow vector.
    Check {
        problem: String,
        /// Comma-separated flows in incoming-link order, e.g. `0,600,200`.
        flows: String,
        #[command(flatten)]
        common: Common,
    },
    /// List the vertices of the feasible polytope and optionally write a scene.
    Geometry {
        problem: String,
        /// Merging weights for the INM marker in the scene (default: all ones).
        #[arg(long)]
        alpha: Option<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scene: Option<String>,
    },
    /// Write the built-in demo problem to a file or stdout.
    Demo {
        path: Option<String>,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Inm,
    Greedy,
    Flowmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Io(_) | CliError::Parse(_) => EXIT_IO,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            e.exit_code()
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write output: {}", e)))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate { problem, format } => cmd_validate(&problem, format, out),
        Command::Solve {
            problem,
            solver,
            alpha,
            order,
            common,
            scene,
        } => {
            let problem = load_valid(&problem)?;
            let request = SolveRequest::new(&problem, solver, alpha.as_deref(), order.as_deref())?;
            cmd_solve(&problem, &request, common, scene.as_deref(), out)
        }
        Command::Check {
            problem,
            flows,
            common,
        } => {
            let problem = load_valid(&problem)?;
            cmd_check(&problem, &flows, common, out)
        }
        Command::Geometry {
            problem,
            alpha,
            common,
            scene,
        } => {
            let problem = load_valid(&problem)?;
            cmd_geometry(&problem, alpha.as_deref(), common, scene.as_deref(), out)
        }
        Command::Demo { path, force } => cmd_demo(path.as_deref(), force, out),
    }
}

/// Reads a problem file. The name `demo` means the built-in problem unless a
/// file of that name exists.
pub fn load_problem(path: &str) -> Result<NodeProblem<Rational>, CliError> {
    if path == "demo" && !Path::new(path).exists() {
        return Ok(demo_problem());
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {}", path, e)))?;
    parse_problem(&text).map_err(|e| CliError::Parse(format!("{}: {}", path, e)))
}

fn load_valid(path: &str) -> Result<NodeProblem<Rational>, CliError> {
    let problem = load_problem(path)?;
    let errors: Vec<String> = problem
        .validate()
        .into_iter()
        .filter(|d| d.is_error())
        .map(|d| d.message)
        .collect();
    if errors.is_empty() {
        Ok(problem)
    } else {
        Err(CliError::Domain(format!(
            "invalid problem: {}",
            errors.join("; ")
        )))
    }
}

fn cmd_validate(path: &str, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let problem = load_problem(path)?;
    let diagnostics = problem.validate();
    let valid = !diagnostics.iter().any(|d| d.is_error());
    match format {
        Format::Json => {
            let list: Vec<Value> = diagnostics
                .iter()
                .map(|d| json!({"severity": if d.is_error() { "error" } else { "warning" }, "message": d.message}))
                .collect();
            let doc = json!({
                "command": "validate",
                "valid": valid,
                "incoming": problem.num_incoming(),
                "outgoing": problem.num_outgoing(),
                "diagnostics": list,
            });
            write_out(out, &to_pretty(&doc))?;
        }
        Format::Table => {
            let mut text: String = diagnostics.iter().map(|d| format!("{}\n", d)).collect();
            if valid {
                text.push_str(&format!(
                    "ok: {} incoming, {} outgoing links\n",
                    problem.num_incoming(),
                    problem.num_outgoing()
                ));
            }
            write_out(out, &text)?;
        }
    }
    Ok(if valid { EXIT_OK } else { EXIT_DOMAIN })
}

fn parse_list(text: &str) -> Result<Vec<Rational>, crate::number::NumberError> {
    text.split(',').map(parse_rational).collect()
}

/// A solver choice with its options resolved against the problem.
pub enum SolveRequest {
    Inm(MergingWeights<Rational>),
    Greedy(Permutation),
    Flowmax,
}

impl SolveRequest {
    pub fn new(
        problem: &NodeProblem<Rational>,
        solver: SolverChoice,
        alpha: Option<&str>,
        order: Option<&str>,
    ) -> Result<Self, CliError> {
        if alpha.is_some() && solver != SolverChoice::Inm {
            return Err(CliError::Domain(
                "--alpha only applies to --solver inm".into(),
            ));
        }
        if order.is_some() && solver != SolverChoice::Greedy {
            return Err(CliError::Domain(
                "--order only applies to --solver greedy".into(),
            ));
        }
        Ok(match solver {
            SolverChoice::Inm => SolveRequest::Inm(weights(problem, alpha)?),
            SolverChoice::Greedy => SolveRequest::Greedy(match order {
                Some(text) => {
                    let labels: Vec<&str> = text.split(',').map(str::trim).collect();
                    Permutation::from_labels(problem, &labels)
                        .map_err(|e| domain(format!("bad --order: {}", e)))?
                }
                None => Permutation::identity(problem.num_incoming()),
            }),
            SolverChoice::Flowmax => SolveRequest::Flowmax,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            SolveRequest::Inm(_) => "inm",
            SolveRequest::Greedy(_) => "greedy",
            SolveRequest::Flowmax => "flowmax",
        }
    }

    fn setting(&self, problem: &NodeProblem<Rational>) -> Option<(&'static str, Vec<String>)> {
        match self {
            SolveRequest::Inm(w) => Some(("weights", w.0.iter().map(|x| x.exact_text()).collect())),
            SolveRequest::Greedy(order) => Some((
                "order",
                order
                    .as_slice()
                    .iter()
                    .map(|&i| problem.incoming()[i].label.clone())
                    .collect(),
            )),
            SolveRequest::Flowmax => None,
        }
    }

    fn solve<S: Render>(&self, problem: &NodeProblem<S>) -> Result<SolverResult<S>, CliError> {
        match self {
            SolveRequest::Inm(w) => solve_inm(
                problem,
                &MergingWeights(w.0.iter().map(S::from_rational).collect()),
            ),
            SolveRequest::Greedy(order) => solve_greedy(problem, order),
            SolveRequest::Flowmax => solve_flowmax(problem),
        }
        .map_err(domain)
    }
}

fn weights(
    problem: &NodeProblem<Rational>,
    alpha: Option<&str>,
) -> Result<MergingWeights<Rational>, CliError> {
    let weights = match alpha {
        Some(text) => {
            MergingWeights(parse_list(text).map_err(|e| domain(format!("bad --alpha: {}", e)))?)
        }
        None => MergingWeights::uniform(problem.num_incoming()),
    };
    weights
        .check(problem)
        .map_err(|e| domain(format!("bad --alpha: {}", e)))?;
    Ok(weights)
}

fn cmd_solve(
    problem: &NodeProblem<Rational>,
    request: &SolveRequest,
    common: Common,
    scene: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    match common.mode {
        Mode::Exact => print_solution(problem, problem, request, common, out)?,
        Mode::Float => print_solution(problem, &problem.map(|x| x.to_f64()), request, common, out)?,
    }
    if let Some(path) = scene {
        write_solution_scene(problem, request, path)?;
    }
    Ok(EXIT_OK)
}

fn print_solution<S: Render>(
    exact: &NodeProblem<Rational>,
    problem: &NodeProblem<S>,
    request: &SolveRequest,
    common: Common,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let result = request.solve(problem)?;
    let hfs = is_hfs(problem, &result.flows, &problem.tolerance()).map_err(domain)?;
    let probe = is_pareto_optimal(problem, &result.flows).map_err(domain)?;
    let view = SolveView {
        problem,
        mode: common.mode.as_str(),
        solver: request.name(),
        setting: request.setting(exact),
        result: &result,
        hfs,
        probe: &probe,
    };
    let text = match common.format {
        Format::Json => to_pretty(&view.to_json()),
        Format::Table => view.to_table(),
    };
    write_out(out, &text)
}

/// Scenes are always computed exactly, whatever the arithmetic mode.
fn write_solution_scene(
    problem: &NodeProblem<Rational>,
    request: &SolveRequest,
    path: &str,
) -> Result<(), CliError> {
    let result = request.solve(problem)?;
    let mut scene = compose_scene(
        problem,
        &SceneContents::polytope_only(),
        DEFAULT_DIMENSION_LIMIT,
    )
    .map_err(domain)?;
    let (marker, trace) = match request {
        SolveRequest::Inm(_) => inm_marker(&result),
        SolveRequest::Greedy(order) => named_marker(greedy_name(problem, order), "greedy", &result),
        SolveRequest::Flowmax => {
            let named = flowmax_markers(problem).map_err(domain)?;
            let name = named
                .iter()
                .find(|m| m.point == result.flows)
                .map(|m| m.name.clone())
                .unwrap_or_else(|| format!("FM-{}", letter_name(named.len())));
            named_marker(name, "flowmax", &result)
        }
    };
    scene.markers.push(marker);
    scene.traces.push(trace);
    export_scene(&scene, Path::new(path))
        .map_err(|e| CliError::Io(format!("cannot write {}: {}", path, e)))
}

fn named_marker(
    name: String,
    kind: &str,
    result: &SolverResult<Rational>,
) -> (
    nodeflow_core::Marker<Rational>,
    nodeflow_core::Trace<Rational>,
) {
    let (mut marker, mut trace) = inm_marker(result);
    marker.name = name.clone();
    marker.kind = kind.into();
    trace.name = name;
    (marker, trace)
}

fn cmd_check(
    problem: &NodeProblem<Rational>,
    flows: &str,
    common: Common,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let q = parse_list(flows).map_err(|e| CliError::Parse(format!("bad flow vector: {}", e)))?;
    if q.len() != problem.num_incoming() {
        return Err(CliError::Domain(format!(
            "flow vector has {} entries, problem has {} incoming links",
            q.len(),
            problem.num_incoming()
        )));
    }
    match common.mode {
        Mode::Exact => print_check(problem, FlowVector(q), common, out),
        Mode::Float => print_check(
            &problem.map(|x| x.to_f64()),
            FlowVector(q.iter().map(|x| x.to_f64()).collect()),
            common,
            out,
        ),
    }
}

fn print_check<S: Render>(
    problem: &NodeProblem<S>,
    flows: FlowVector<S>,
    common: Common,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let report = hfs_residual(problem, &flows).map_err(domain)?;
    let slacks = problem.slacks(&flows).map_err(domain)?;
    let probe = if report.feasible {
        Some(is_pareto_optimal(problem, &flows).map_err(domain)?)
    } else {
        None
    };
    let view = CheckView {
        problem,
        mode: common.mode.as_str(),
        flows: &flows,
        slacks: &slacks,
        report: &report,
        probe: probe.as_ref(),
    };
    let text = match common.format {
        Format::Json => to_pretty(&view.to_json()),
        Format::Table => view.to_table(),
    };
    write_out(out, &text)?;
    if report.feasible {
        Ok(EXIT_OK)
    } else {
        Err(CliError::Domain("flow vector is infeasible".into()))
    }
}

fn cmd_geometry(
    problem: &NodeProblem<Rational>,
    alpha: Option<&str>,
    common: Common,
    scene: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let weights = weights(problem, alpha)?;
    if let Some(path) = scene {
        let scene = compose_scene(
            problem,
            &SceneContents::everything(weights),
            DEFAULT_DIMENSION_LIMIT,
        )
        .map_err(domain)?;
        export_scene(&scene, Path::new(path))
            .map_err(|e| CliError::Io(format!("cannot write {}: {}", path, e)))?;
    }
    match common.mode {
        Mode::Exact => print_geometry(problem, common, scene, out)?,
        Mode::Float => print_geometry(&problem.map(|x| x.to_f64()), common, scene, out)?,
    }
    Ok(EXIT_OK)
}

fn print_geometry<S: Render>(
    problem: &NodeProblem<S>,
    common: Common,
    scene: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let polytope = enumerate_vertices(problem, DEFAULT_DIMENSION_LIMIT).map_err(domain)?;
    let view = GeometryView {
        problem,
        mode: common.mode.as_str(),
        polytope: &polytope,
        scene_path: scene,
    };
    let text = match common.format {
        Format::Json => to_pretty(&view.to_json()),
        Format::Table => view.to_table(),
    };
    write_out(out, &text)
}

fn cmd_demo(path: Option<&str>, force: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = demo_json();
    match path {
        None => write_out(out, &text)?,
        Some(path) => {
            if Path::new(path).exists() && !force {
                return Err(CliError::Domain(format!(
                    "{} exists; pass --force to overwrite",
                    path
                )));
            }
            std::fs::write(path, text)
                .map_err(|e| CliError::Io(format!("cannot write {}: {}", path, e)))?;
        }
    }
    Ok(EXIT_OK)
}
