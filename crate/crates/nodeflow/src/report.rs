//! Plain-text tables and JSON documents for command output.

use nodeflow_core::solvers::Binding;
use nodeflow_core::{
    DominanceProbe, FlowVector, HfsReport, NodeProblem, Polytope, SlackVector, SolverResult,
};
use serde_json::{json, Value};

use crate::number::Render;

/// Places shown next to exact values.
pub const DECIMAL_PLACES: u32 = 3;

pub fn value_json<S: Render>(x: &S) -> Value {
    json!({"value": x.exact_text(), "decimal": x.decimal_text(DECIMAL_PLACES)})
}

/// `50/3 (16.667)`, or just `600` when the decimal adds nothing.
pub fn value_text<S: Render>(x: &S) -> String {
    let exact = x.exact_text();
    let decimal = x.decimal_text(DECIMAL_PLACES);
    if decimal.trim_end_matches('0').trim_end_matches('.') == exact {
        exact
    } else {
        format!("{} ({})", exact, decimal)
    }
}

pub fn point_text<S: Render>(q: &[S]) -> String {
    let parts: Vec<String> = q.iter().map(|x| x.exact_text()).collect();
    format!("[{}]", parts.join(", "))
}

fn point_json<S: Render>(q: &[S]) -> Value {
    Value::Array(q.iter().map(|x| Value::String(x.exact_text())).collect())
}

/// Left-aligned columns separated by two spaces.
pub fn table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            line.push_str(cell);
            let pad = widths[c] - cell.chars().count();
            line.extend(std::iter::repeat_n(' ', pad + 2));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn incoming_labels<S: Render>(problem: &NodeProblem<S>) -> Vec<String> {
    problem.incoming().iter().map(|l| l.label.clone()).collect()
}

fn binding_labels(bindings: &[Binding]) -> Vec<String> {
    bindings.iter().map(|b| b.label.clone()).collect()
}

/// Everything `solve` prints.
pub struct SolveView<'a, S> {
    pub problem: &'a NodeProblem<S>,
    pub mode: &'a str,
    pub solver: &'a str,
    /// Solver-specific setting, e.g. ("weights", ["1/10", "10", "1"]).
    pub setting: Option<(&'a str, Vec<String>)>,
    pub result: &'a SolverResult<S>,
    pub hfs: bool,
    pub probe: &'a DominanceProbe<S>,
}

fn probe_json<S: Render>(probe: &DominanceProbe<S>) -> Value {
    json!({
        "optimal": probe.pareto_optimal,
        "t_star": value_json(&probe.t_star),
        "witness": probe.witness.as_ref().map(|w| point_json(w)),
    })
}

fn probe_lines<S: Render>(probe: &DominanceProbe<S>) -> String {
    let mut out = format!(
        "pareto-optimal  {}  (t* = {})\n",
        yes_no(probe.pareto_optimal),
        value_text(&probe.t_star)
    );
    if let Some(w) = &probe.witness {
        out.push_str(&format!("dominated by    {}\n", point_text(w)));
    }
    out
}

impl<S: Render> SolveView<'_, S> {
    pub fn to_json(&self) -> Value {
        let labels = incoming_labels(self.problem);
        let flows: Vec<Value> = labels
            .iter()
            .zip(self.result.flows.iter())
            .map(|(label, q)| {
                let mut v = value_json(q);
                v["label"] = Value::String(label.clone());
                v
            })
            .collect();
        let trace: Vec<Value> = self
            .result
            .trace
            .iter()
            .enumerate()
            .map(|(k, step)| {
                json!({
                    "step": k,
                    "waypoint": point_json(&step.waypoint),
                    "bindings": binding_labels(&step.bindings),
                    "removed": step.removed_links.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mut doc = json!({
            "command": "solve",
            "mode": self.mode,
            "solver": self.solver,
            "flows": flows,
            "total": value_json(&self.result.total),
            "hfs": self.hfs,
            "pareto": probe_json(self.probe),
            "iterations": self.result.iterations,
            "trace": trace,
        });
        if let Some((key, values)) = &self.setting {
            doc[*key] = json!(values);
        }
        doc
    }

    pub fn to_table(&self) -> String {
        let labels = incoming_labels(self.problem);
        let mut out = format!("solver  {} ({} arithmetic)\n", self.solver, self.mode);
        if let Some((key, values)) = &self.setting {
            out.push_str(&format!("{}  {}\n", key, values.join(", ")));
        }
        out.push('\n');
        let mut rows = vec![vec![
            "link".to_string(),
            "flow".to_string(),
            "decimal".to_string(),
        ]];
        for (label, q) in labels.iter().zip(self.result.flows.iter()) {
            rows.push(vec![
                label.clone(),
                q.exact_text(),
                q.decimal_text(DECIMAL_PLACES),
            ]);
        }
        rows.push(vec![
            "total".into(),
            self.result.total.exact_text(),
            self.result.total.decimal_text(DECIMAL_PLACES),
        ]);
        out.push_str(&table(&rows));
        out.push('\n');
        out.push_str(&format!("holding-free    {}\n", yes_no(self.hfs)));
        out.push_str(&probe_lines(self.probe));
        out.push_str(&format!(
            "\ntrace ({} iterations)\n",
            self.result.iterations
        ));
        let mut rows = vec![vec![
            "step".to_string(),
            "waypoint".into(),
            "binding".into(),
            "removed".into(),
        ]];
        for (k, step) in self.result.trace.iter().enumerate() {
            let removed: Vec<String> = step
                .removed_links
                .iter()
                .map(|&i| labels[i].clone())
                .collect();
            rows.push(vec![
                k.to_string(),
                point_text(&step.waypoint),
                binding_labels(&step.bindings).join(" "),
                removed.join(" "),
            ]);
        }
        out.push_str(&table(&rows));
        out
    }
}

/// Everything `check` prints. `probe` is absent for infeasible flows.
pub struct CheckView<'a, S> {
    pub problem: &'a NodeProblem<S>,
    pub mode: &'a str,
    pub flows: &'a FlowVector<S>,
    pub slacks: &'a SlackVector<S>,
    pub report: &'a HfsReport<S>,
    pub probe: Option<&'a DominanceProbe<S>>,
}

impl<S: Render> CheckView<'_, S> {
    pub fn to_json(&self) -> Value {
        let labelled = |labels: Vec<&String>, values: &[S]| -> Vec<Value> {
            labels
                .into_iter()
                .zip(values)
                .map(|(label, x)| {
                    let mut v = value_json(x);
                    v["label"] = Value::String(label.clone());
                    v
                })
                .collect()
        };
        let incoming: Vec<&String> = self.problem.incoming().iter().map(|l| &l.label).collect();
        let outgoing: Vec<&String> = self.problem.outgoing().iter().map(|l| &l.label).collect();
        let terms: Vec<Value> = self
            .report
            .per_link_terms
            .iter()
            .map(|t| {
                json!({
                    "link": incoming[t.link],
                    "demand_slack": value_json(&t.demand_slack),
                    "supply_slack_product": value_json(&t.supply_slack_product),
                    "term": value_json(&t.term),
                })
            })
            .collect();
        json!({
            "command": "check",
            "mode": self.mode,
            "flows": point_json(self.flows),
            "feasible": self.report.feasible,
            "slacks": {
                "incoming": labelled(incoming.clone(), &self.slacks.incoming),
                "outgoing": labelled(outgoing, &self.slacks.outgoing),
            },
            "hfs": {
                "holding_free": self.report.holding_free,
                "residual": value_json(&self.report.residual),
                "terms": terms,
            },
            "pareto": self.probe.map(probe_json),
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("flows  {}\n", point_text(self.flows));
        out.push_str(&format!("feasible  {}\n\n", yes_no(self.report.feasible)));

        let mut rows = vec![vec![
            "constraint".to_string(),
            "slack".into(),
            String::new(),
        ]];
        let tol = self.problem.tolerance();
        let flag = |x: &S| {
            if tol.is_negative(x) {
                "violated".to_string()
            } else {
                String::new()
            }
        };
        for (l, s) in self.problem.incoming().iter().zip(&self.slacks.incoming) {
            rows.push(vec![format!("demand:{}", l.label), value_text(s), flag(s)]);
        }
        for (l, s) in self.problem.outgoing().iter().zip(&self.slacks.outgoing) {
            rows.push(vec![format!("supply:{}", l.label), value_text(s), flag(s)]);
        }
        out.push_str(&table(&rows));
        if !self.report.feasible {
            return out;
        }

        out.push('\n');
        let mut rows = vec![vec![
            "link".to_string(),
            "demand slack".into(),
            "supply slack product".into(),
            "term".into(),
        ]];
        for t in &self.report.per_link_terms {
            rows.push(vec![
                self.problem.incoming()[t.link].label.clone(),
                value_text(&t.demand_slack),
                value_text(&t.supply_slack_product),
                value_text(&t.term),
            ]);
        }
        out.push_str(&table(&rows));
        out.push_str(&format!(
            "residual        {}\n",
            value_text(&self.report.residual)
        ));
        out.push_str(&format!(
            "holding-free    {}\n",
            yes_no(self.report.holding_free)
        ));
        if let Some(probe) = self.probe {
            out.push_str(&probe_lines(probe));
        }
        out
    }
}

/// Everything `geometry` prints.
pub struct GeometryView<'a, S> {
    pub problem: &'a NodeProblem<S>,
    pub mode: &'a str,
    pub polytope: &'a Polytope<S>,
    pub scene_path: Option<&'a str>,
}

impl<S: Render> GeometryView<'_, S> {
    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .polytope
            .vertices
            .iter()
            .map(|v| json!({"point": point_json(v), "total": value_json(&v.total())}))
            .collect();
        let facets: Vec<Value> = self
            .polytope
            .facets
            .iter()
            .map(|f| json!({"label": f.label, "vertex_ids": f.vertex_ids}))
            .collect();
        json!({
            "command": "geometry",
            "mode": self.mode,
            "dimension": self.polytope.dimension,
            "links": incoming_labels(self.problem),
            "vertices": vertices,
            "facets": facets,
            "max_total": self.polytope.max_total().as_ref().map(value_json),
            "scene": self.scene_path,
        })
    }

    pub fn to_table(&self) -> String {
        let mut header = vec!["#".to_string()];
        header.extend(incoming_labels(self.problem));
        header.push("total".into());
        let mut rows = vec![header];
        for (k, v) in self.polytope.vertices.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(v.iter().map(|x| x.exact_text()));
            row.push(v.total().exact_text());
            rows.push(row);
        }
        let mut out = format!("{} vertices\n", self.polytope.vertices.len());
        out.push_str(&table(&rows));
        out.push_str(&format!("\n{} facets\n", self.polytope.facets.len()));
        let rows: Vec<Vec<String>> = self
            .polytope
            .facets
            .iter()
            .map(|f| {
                let ids: Vec<String> = f.vertex_ids.iter().map(usize::to_string).collect();
                vec![f.label.clone(), ids.join(" ")]
            })
            .collect();
        out.push_str(&table(&rows));
        if let Some(best) = self.polytope.max_total() {
            out.push_str(&format!("\nmax total flow  {}\n", value_text(&best)));
        }
        if let Some(path) = self.scene_path {
            out.push_str(&format!("scene written to {}\n", path));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nodeflow_core::{Rational, Scalar};

    #[test]
    fn tables_align_and_trim() {
        let rows = vec![
            vec!["a".to_string(), "long".into(), "".into()],
            vec!["bbb".to_string(), "x".into(), "".into()],
        ];
        assert_eq!(table(&rows), "a    long\nbbb  x\n");
    }

    #[test]
    fn values_show_decimals_only_when_useful() {
        assert_eq!(value_text(&Rational::ratio(50, 3)), "50/3 (16.667)");
        assert_eq!(value_text(&Rational::from_i64(600)), "600");
        assert_eq!(value_text(&Rational::ratio(1, 2)), "1/2 (0.500)");
        assert_eq!(value_text(&600.0f64), "600");
    }
}
