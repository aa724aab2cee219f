//! Scene files: the polytope, solution markers, solver traces and frontier
//! classification of one problem, as deterministic JSON for plotting.
//!
//! Every coordinate is written as a `num/den` string with a float
//! approximation alongside (`*_approx` keys). Keys are sorted, so exporting
//! the same scene twice gives identical bytes.

use std::path::Path;

use nodeflow_core::model::ConstraintKind;
use nodeflow_core::{
    classify_frontier, enumerate_flowmax_optima, enumerate_vertices, geometry::Facet,
    intercept_form, pareto::sample_region, solve_greedy, solve_inm, FlowVector, FrontierSample,
    GeometryError, Intercept, Marker, MergingWeights, NodeProblem, ParetoError, Permutation,
    Polytope, Rational, Scene, SolveError, SolverResult, Trace,
};
use serde_json::{json, Map, Value};

use crate::number::{approx_json, Render};
use crate::problem_file::{
    array, field, number, object, only_keys, problem_from_value, problem_value_with, to_pretty,
    FormatError,
};

pub const SCENE_VERSION: u64 = 1;

/// Upper bound on frontier grid points before they are pushed to the boundary.
pub const FRONTIER_GRID_BUDGET: u32 = 1000;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
}

/// Greedy markers are named after the link order, e.g. `Gr-NSE`.
pub fn greedy_name<S: nodeflow_core::Scalar>(
    problem: &NodeProblem<S>,
    order: &Permutation,
) -> String {
    let labels: Vec<&str> = order
        .as_slice()
        .iter()
        .map(|&i| problem.incoming()[i].label.as_str())
        .collect();
    let sep = if labels.iter().all(|l| l.chars().count() == 1) {
        ""
    } else {
        ","
    };
    format!("Gr-{}", labels.join(sep))
}

/// `A`, `B`, … `Z`, then `27`, `28`, …
pub fn letter_name(k: usize) -> String {
    match u8::try_from(k) {
        Ok(k) if k < 26 => char::from(b'A' + k).to_string(),
        _ => (k + 1).to_string(),
    }
}

pub fn inm_marker<S: Render>(result: &SolverResult<S>) -> (Marker<S>, Trace<S>) {
    let marker = Marker {
        name: "INM".into(),
        kind: "inm".into(),
        point: result.flows.clone(),
    };
    let trace = Trace {
        name: "INM".into(),
        points: result.trace.iter().map(|s| s.waypoint.clone()).collect(),
    };
    (marker, trace)
}

/// One marker per distinct greedy allocation, named after the first link
/// order (lexicographic over indices) that produces it.
pub fn greedy_markers<S: Render>(problem: &NodeProblem<S>) -> Result<Vec<Marker<S>>, SolveError> {
    let mut markers: Vec<Marker<S>> = Vec::new();
    for order in Permutation::all(problem.num_incoming()) {
        let flows = solve_greedy(problem, &order)?.flows;
        if markers.iter().all(|m| m.point != flows) {
            markers.push(Marker {
                name: greedy_name(problem, &order),
                kind: "greedy".into(),
                point: flows,
            });
        }
    }
    Ok(markers)
}

/// Every total-flow maximizer among the vertices, `FM-A` first, in
/// descending lexicographic order.
pub fn flowmax_markers<S: Render>(problem: &NodeProblem<S>) -> Result<Vec<Marker<S>>, SolveError> {
    let mut optima = enumerate_flowmax_optima(problem)?;
    optima.reverse();
    Ok(optima
        .into_iter()
        .enumerate()
        .map(|(k, point)| Marker {
            name: format!("FM-{}", letter_name(k)),
            kind: "flowmax".into(),
            point,
        })
        .collect())
}

/// Grid divisions per axis so that the grid stays within
/// [`FRONTIER_GRID_BUDGET`] points.
pub fn frontier_divisions(dimension: usize) -> u32 {
    let mut divisions = 1u32;
    while u64::from(divisions + 2).pow(dimension.max(1) as u32) <= u64::from(FRONTIER_GRID_BUDGET) {
        divisions += 1;
    }
    divisions
}

pub fn frontier_samples<S: Render>(
    problem: &NodeProblem<S>,
) -> Result<Vec<FrontierSample<S>>, ParetoError> {
    let samples = sample_region(problem, frontier_divisions(problem.num_incoming()));
    classify_frontier(problem, &samples)
}

/// What to draw on top of the polytope.
#[derive(Debug, Clone)]
pub struct SceneContents<S> {
    pub inm_weights: Option<MergingWeights<S>>,
    pub greedy: bool,
    pub flowmax: bool,
    pub frontier: bool,
}

impl<S> SceneContents<S> {
    pub fn polytope_only() -> Self {
        SceneContents {
            inm_weights: None,
            greedy: false,
            flowmax: false,
            frontier: false,
        }
    }

    pub fn everything(inm_weights: MergingWeights<S>) -> Self {
        SceneContents {
            inm_weights: Some(inm_weights),
            greedy: true,
            flowmax: true,
            frontier: true,
        }
    }
}

pub fn compose_scene<S: Render>(
    problem: &NodeProblem<S>,
    contents: &SceneContents<S>,
    dimension_limit: usize,
) -> Result<Scene<S>, SceneError> {
    let polytope = enumerate_vertices(problem, dimension_limit)?;
    let mut markers = Vec::new();
    let mut traces = Vec::new();
    if let Some(weights) = &contents.inm_weights {
        let (marker, trace) = inm_marker(&solve_inm(problem, weights)?);
        markers.push(marker);
        traces.push(trace);
    }
    if contents.flowmax {
        markers.extend(flowmax_markers(problem)?);
    }
    if contents.greedy {
        markers.extend(greedy_markers(problem)?);
    }
    let frontier = if contents.frontier {
        frontier_samples(problem)?
    } else {
        Vec::new()
    };
    Ok(Scene::new(
        problem.clone(),
        polytope,
        markers,
        traces,
        frontier,
    )?)
}

fn point_json<S: Render>(point: &[S]) -> Value {
    Value::Array(
        point
            .iter()
            .map(|x| Value::String(x.ratio_text()))
            .collect(),
    )
}

fn approx_point_json<S: Render>(point: &[S]) -> Value {
    Value::Array(point.iter().map(|x| approx_json(x.to_f64())).collect())
}

fn plane_json<S: Render>(h: &nodeflow_core::HalfSpace<S>) -> Value {
    let intercepts = match intercept_form(h) {
        Ok(list) => Value::Array(
            list.iter()
                .map(|a| match a {
                    Intercept::Finite(x) => Value::String(x.ratio_text()),
                    Intercept::Unbounded => Value::String("unbounded".into()),
                })
                .collect(),
        ),
        Err(_) => Value::String("degenerate".into()),
    };
    json!({
        "label": h.label(),
        "kind": h.kind.as_str(),
        "active": h.active,
        "coefficients": point_json(&h.coefficients),
        "bound": h.bound.ratio_text(),
        "intercepts": intercepts,
    })
}

pub fn scene_to_value<S: Render>(scene: &Scene<S>) -> Value {
    let problem = &scene.problem;
    let planes: Vec<Value> = problem
        .demand_halfspaces()
        .iter()
        .chain(problem.supply_halfspaces().iter())
        .map(plane_json)
        .collect();
    let facets: Vec<Value> = scene
        .polytope
        .facets
        .iter()
        .map(|f| json!({"label": f.label, "kind": f.kind.as_str(), "vertex_ids": f.vertex_ids}))
        .collect();
    let markers: Vec<Value> = scene
        .markers
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "kind": m.kind,
                "point": point_json(&m.point),
                "point_approx": approx_point_json(&m.point),
            })
        })
        .collect();
    let traces: Vec<Value> = scene
        .traces
        .iter()
        .map(|t| {
            json!({
                "name": t.name,
                "points": t.points.iter().map(|p| point_json(p)).collect::<Vec<_>>(),
                "points_approx": t.points.iter().map(|p| approx_point_json(p)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let frontier: Vec<Value> = scene
        .frontier
        .iter()
        .map(|s| {
            json!({
                "point": point_json(&s.point),
                "point_approx": approx_point_json(&s.point),
                "hfs": s.hfs,
                "pareto": s.pareto,
            })
        })
        .collect();
    json!({
        "scene_version": SCENE_VERSION,
        "dimension": scene.polytope.dimension,
        "problem": problem_value_with(problem, |x: &S| Value::String(x.ratio_text())),
        "planes": planes,
        "vertices": scene.polytope.vertices.iter().map(|v| point_json(v)).collect::<Vec<_>>(),
        "vertices_approx": scene.polytope.vertices.iter().map(|v| approx_point_json(v)).collect::<Vec<_>>(),
        "facets": facets,
        "markers": markers,
        "traces": traces,
        "frontier": frontier,
    })
}

pub fn write_scene<S: Render>(scene: &Scene<S>) -> String {
    to_pretty(&scene_to_value(scene))
}

pub fn export_scene<S: Render>(scene: &Scene<S>, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, write_scene(scene))
}

fn schema(message: String) -> FormatError {
    FormatError::Schema(message)
}

fn point_from(
    value: &Value,
    what: &str,
    dimension: usize,
) -> Result<FlowVector<Rational>, FormatError> {
    let coords = array(value, what)?
        .iter()
        .enumerate()
        .map(|(k, x)| number(x, &format!("{}[{}]", what, k)))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != dimension {
        return Err(schema(format!(
            "{} has {} coordinates, expected {}",
            what,
            coords.len(),
            dimension
        )));
    }
    Ok(FlowVector(coords))
}

fn string_field(map: &Map<String, Value>, key: &str, what: &str) -> Result<String, FormatError> {
    field(map, key, what)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| schema(format!("{}.{} must be a string", what, key)))
}

fn bool_field(map: &Map<String, Value>, key: &str, what: &str) -> Result<bool, FormatError> {
    field(map, key, what)?
        .as_bool()
        .ok_or_else(|| schema(format!("{}.{} must be a boolean", what, key)))
}

fn constraint_kind(text: &str) -> Option<ConstraintKind> {
    match text {
        "nonnegativity" => Some(ConstraintKind::NonNegativity),
        "demand" => Some(ConstraintKind::Demand),
        "supply" => Some(ConstraintKind::Supply),
        _ => None,
    }
}

/// Reads an exact scene back. Derived keys (`planes`, `*_approx`,
/// `dimension`) are recomputed from the exact data and not trusted.
pub fn parse_scene(text: &str) -> Result<Scene<Rational>, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let root = object(&value, "scene")?;
    only_keys(
        root,
        &[
            "scene_version",
            "dimension",
            "problem",
            "planes",
            "vertices",
            "vertices_approx",
            "facets",
            "markers",
            "traces",
            "frontier",
        ],
        "scene",
    )?;
    let version = field(root, "scene_version", "scene")?.as_u64();
    if version != Some(SCENE_VERSION) {
        return Err(schema(format!(
            "unsupported scene_version {}, expected {}",
            field(root, "scene_version", "scene")?,
            SCENE_VERSION
        )));
    }
    let problem = problem_from_value(field(root, "problem", "scene")?)?;
    let n = problem.num_incoming();

    let vertices = array(field(root, "vertices", "scene")?, "vertices")?
        .iter()
        .enumerate()
        .map(|(k, v)| point_from(v, &format!("vertices[{}]", k), n))
        .collect::<Result<Vec<_>, _>>()?;

    let mut facets = Vec::new();
    for (k, f) in array(field(root, "facets", "scene")?, "facets")?
        .iter()
        .enumerate()
    {
        let what = format!("facets[{}]", k);
        let map = object(f, &what)?;
        let kind_text = string_field(map, "kind", &what)?;
        let kind = constraint_kind(&kind_text).ok_or_else(|| {
            schema(format!(
                "{}.kind `{}` is not a constraint kind",
                what, kind_text
            ))
        })?;
        let vertex_ids = array(field(map, "vertex_ids", &what)?, &what)?
            .iter()
            .map(|id| {
                id.as_u64()
                    .map(|id| id as usize)
                    .filter(|&id| id < vertices.len())
                    .ok_or_else(|| {
                        schema(format!(
                            "{}.vertex_ids holds an invalid vertex index {}",
                            what, id
                        ))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        facets.push(Facet {
            label: string_field(map, "label", &what)?,
            kind,
            vertex_ids,
        });
    }

    let mut markers = Vec::new();
    for (k, m) in array(field(root, "markers", "scene")?, "markers")?
        .iter()
        .enumerate()
    {
        let what = format!("markers[{}]", k);
        let map = object(m, &what)?;
        markers.push(Marker {
            name: string_field(map, "name", &what)?,
            kind: string_field(map, "kind", &what)?,
            point: point_from(field(map, "point", &what)?, &format!("{}.point", what), n)?,
        });
    }

    let mut traces = Vec::new();
    for (k, t) in array(field(root, "traces", "scene")?, "traces")?
        .iter()
        .enumerate()
    {
        let what = format!("traces[{}]", k);
        let map = object(t, &what)?;
        let points = array(field(map, "points", &what)?, &what)?
            .iter()
            .enumerate()
            .map(|(j, p)| point_from(p, &format!("{}.points[{}]", what, j), n))
            .collect::<Result<Vec<_>, _>>()?;
        traces.push(Trace {
            name: string_field(map, "name", &what)?,
            points,
        });
    }

    let mut frontier = Vec::new();
    for (k, s) in array(field(root, "frontier", "scene")?, "frontier")?
        .iter()
        .enumerate()
    {
        let what = format!("frontier[{}]", k);
        let map = object(s, &what)?;
        frontier.push(FrontierSample {
            point: point_from(field(map, "point", &what)?, &format!("{}.point", what), n)?,
            hfs: bool_field(map, "hfs", &what)?,
            pareto: bool_field(map, "pareto", &what)?,
        });
    }

    let polytope = Polytope {
        vertices,
        facets,
        dimension: n,
    };
    Scene::new(problem, polytope, markers, traces, frontier).map_err(|e| schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nodeflow_core::demo_problem;

    type Q = Rational;

    #[test]
    fn names() {
        assert_eq!(letter_name(0), "A");
        assert_eq!(letter_name(25), "Z");
        assert_eq!(letter_name(26), "27");
        let p = demo_problem::<Q>();
        let order = Permutation::from_labels(&p, &["N", "S", "E"]).unwrap();
        assert_eq!(greedy_name(&p, &order), "Gr-NSE");
    }

    #[test]
    fn frontier_grid_stays_within_budget() {
        assert_eq!(frontier_divisions(3), 9);
        assert_eq!(frontier_divisions(1), 999);
        assert_eq!(frontier_divisions(6), 2);
        assert_eq!(frontier_divisions(12), 1);
    }

    #[test]
    fn flowmax_markers_match_the_published_labels() {
        let markers = flowmax_markers(&demo_problem::<Q>()).unwrap();
        let named: Vec<(&str, &FlowVector<Q>)> = markers
            .iter()
            .map(|m| (m.name.as_str(), &m.point))
            .collect();
        assert_eq!(
            named,
            vec![
                ("FM-A", &FlowVector::from_i64s(&[0, 600, 200])),
                ("FM-B", &FlowVector::from_i64s(&[0, 200, 600]))
            ]
        );
    }

    #[test]
    fn greedy_markers_are_distinct() {
        let markers = greedy_markers(&demo_problem::<Q>()).unwrap();
        let points: Vec<FlowVector<Q>> = markers.iter().map(|m| m.point.clone()).collect();
        assert_eq!(
            points,
            vec![
                FlowVector::from_i64s(&[100, 600, 0]),
                FlowVector::from_i64s(&[100, 0, 600]),
                FlowVector::from_i64s(&[0, 600, 200]),
                FlowVector::from_i64s(&[0, 200, 600]),
            ]
        );
        assert_eq!(markers[0].name, "Gr-ENS");
    }

    #[test]
    fn polytope_only_scene_round_trips() {
        let p = demo_problem::<Q>();
        let scene = compose_scene(&p, &SceneContents::polytope_only(), 6).unwrap();
        assert!(scene.markers.is_empty() && scene.traces.is_empty() && scene.frontier.is_empty());
        let text = write_scene(&scene);
        assert_eq!(parse_scene(&text).unwrap(), scene);
        assert!(text.contains("\"unbounded\""));
        let value: Value = serde_json::from_str(&text).unwrap();
        let west = &value["planes"][4];
        assert_eq!(west["label"], "supply:W");
        assert_eq!(west["intercepts"], json!(["400/1", "800/1", "800/1"]));
        assert_eq!(
            value["planes"][0]["intercepts"],
            json!(["100/1", "unbounded", "unbounded"])
        );
    }

    #[test]
    fn rejects_other_versions_and_infeasible_points() {
        let p = demo_problem::<Q>();
        let scene = compose_scene(&p, &SceneContents::polytope_only(), 6).unwrap();
        let mut value = scene_to_value(&scene);
        value["scene_version"] = json!(2);
        let err = parse_scene(&value.to_string()).unwrap_err().to_string();
        assert!(err.contains("unsupported scene_version 2"), "{}", err);

        let mut value = scene_to_value(&scene);
        value["markers"] =
            json!([{"name": "X", "kind": "test", "point": ["0/1", "600/1", "600/1"]}]);
        let err = parse_scene(&value.to_string()).unwrap_err().to_string();
        assert!(err.contains("outside the feasible region"), "{}", err);

        let mut value = scene_to_value(&scene);
        value["facets"][0]["vertex_ids"] = json!([99]);
        assert!(parse_scene(&value.to_string()).is_err());
    }

    #[test]
    fn float_scenes_serialize_exact_binary_values() {
        let p = demo_problem::<f64>();
        let weights = MergingWeights(vec![0.1, 10.0, 1.0]);
        let scene = compose_scene(
            &p,
            &SceneContents {
                frontier: false,
                ..SceneContents::everything(weights)
            },
            6,
        )
        .unwrap();
        let value: Value = serde_json::from_str(&write_scene(&scene)).unwrap();
        assert_eq!(value["vertices"].as_array().unwrap().len(), 8);
        assert_eq!(value["markers"][0]["name"], "INM");
        assert_eq!(value["problem"]["turning"][1][1], "1/2");
    }
}
