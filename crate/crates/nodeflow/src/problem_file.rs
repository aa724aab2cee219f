//! JSON problem files.
//!
//! ```json
//! {"incoming": [{"label": "E", "demand": 100}, ...],
//!  "outgoing": [{"label": "N", "supply": 1400}, ...],
//!  "turning": [[0, 1, 0], [0, 0.5, 0.5], [0.5, 0.5, 0]]}
//! ```
//!
//! Turning rows follow `incoming`, columns follow `outgoing`. Values may be
//! JSON numbers or strings holding an integer, a decimal or `num/den`; all
//! are read exactly.

use nodeflow_core::{
    demo_problem, IncomingLink, ModelError, NodeProblem, OutgoingLink, Rational, Scalar,
};
use serde_json::{Map, Value};

use crate::number::{exact_json, rational_from_json, NumberError};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error("{field}: {source}")]
    Number {
        field: String,
        #[source]
        source: NumberError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn schema(message: impl Into<String>) -> FormatError {
    FormatError::Schema(message.into())
}

pub(crate) fn object<'a>(
    value: &'a Value,
    what: &str,
) -> Result<&'a Map<String, Value>, FormatError> {
    value
        .as_object()
        .ok_or_else(|| schema(format!("{} must be an object", what)))
}

pub(crate) fn array<'a>(value: &'a Value, what: &str) -> Result<&'a Vec<Value>, FormatError> {
    value
        .as_array()
        .ok_or_else(|| schema(format!("{} must be an array", what)))
}

pub(crate) fn field<'a>(
    map: &'a Map<String, Value>,
    key: &str,
    what: &str,
) -> Result<&'a Value, FormatError> {
    map.get(key)
        .ok_or_else(|| schema(format!("{} is missing `{}`", what, key)))
}

pub(crate) fn only_keys(
    map: &Map<String, Value>,
    allowed: &[&str],
    what: &str,
) -> Result<(), FormatError> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{} has unknown key `{}`", what, k))),
        None => Ok(()),
    }
}

pub(crate) fn number(value: &Value, what: &str) -> Result<Rational, FormatError> {
    rational_from_json(value).map_err(|source| FormatError::Number {
        field: what.to_string(),
        source,
    })
}

fn label(map: &Map<String, Value>, what: &str) -> Result<String, FormatError> {
    field(map, "label", what)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| schema(format!("{}.label must be a string", what)))
}

pub fn parse_problem(text: &str) -> Result<NodeProblem<Rational>, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    problem_from_value(&value)
}

pub fn problem_from_value(value: &Value) -> Result<NodeProblem<Rational>, FormatError> {
    let root = object(value, "problem")?;
    only_keys(root, &["incoming", "outgoing", "turning"], "problem")?;

    let mut incoming = Vec::new();
    for (i, link) in array(field(root, "incoming", "problem")?, "incoming")?
        .iter()
        .enumerate()
    {
        let what = format!("incoming[{}]", i);
        let map = object(link, &what)?;
        only_keys(map, &["label", "demand"], &what)?;
        incoming.push(IncomingLink {
            label: label(map, &what)?,
            demand: number(field(map, "demand", &what)?, &format!("{}.demand", what))?,
        });
    }

    let mut outgoing = Vec::new();
    for (o, link) in array(field(root, "outgoing", "problem")?, "outgoing")?
        .iter()
        .enumerate()
    {
        let what = format!("outgoing[{}]", o);
        let map = object(link, &what)?;
        only_keys(map, &["label", "supply"], &what)?;
        outgoing.push(OutgoingLink {
            label: label(map, &what)?,
            supply: number(field(map, "supply", &what)?, &format!("{}.supply", what))?,
        });
    }

    let mut turning = Vec::new();
    for (i, row) in array(field(root, "turning", "problem")?, "turning")?
        .iter()
        .enumerate()
    {
        let what = format!("turning[{}]", i);
        let row = array(row, &what)?
            .iter()
            .enumerate()
            .map(|(o, v)| number(v, &format!("{}[{}]", what, o)))
            .collect::<Result<Vec<_>, _>>()?;
        turning.push(row);
    }

    Ok(NodeProblem::new(incoming, outgoing, turning)?)
}

/// Problem file contents with exact values: integers and terminating
/// decimals as numbers, other rationals as `num/den` strings.
pub fn problem_to_value(problem: &NodeProblem<Rational>) -> Value {
    problem_value_with(problem, exact_json)
}

pub(crate) fn problem_value_with<S: Scalar>(
    problem: &NodeProblem<S>,
    encode: impl Fn(&S) -> Value,
) -> Value {
    let incoming: Vec<Value> = problem
        .incoming()
        .iter()
        .map(|l| serde_json::json!({"label": l.label, "demand": encode(&l.demand)}))
        .collect();
    let outgoing: Vec<Value> = problem
        .outgoing()
        .iter()
        .map(|l| serde_json::json!({"label": l.label, "supply": encode(&l.supply)}))
        .collect();
    let turning: Vec<Value> = problem
        .turning()
        .iter()
        .map(|row| Value::Array(row.iter().map(&encode).collect()))
        .collect();
    serde_json::json!({"incoming": incoming, "outgoing": outgoing, "turning": turning})
}

/// Pretty-printed with sorted keys and a trailing newline.
pub fn write_problem(problem: &NodeProblem<Rational>) -> String {
    to_pretty(&problem_to_value(problem))
}

pub(crate) fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// The built-in three-approach junction as a problem file.
pub fn demo_json() -> String {
    write_problem(&demo_problem())
}
