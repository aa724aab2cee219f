//! Node problems: demands, supplies, turning ratios and the linear
//! constraints they induce on the incoming flow vector.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::scalar::{sum, Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("turning row {row} has {found} entries, expected {expected}")]
    RaggedTurning {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("turning matrix has {found} rows, expected {expected}")]
    TurningRows { expected: usize, found: usize },
    #[error("unknown incoming link `{0}`")]
    UnknownLink(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncomingLink<S> {
    pub label: String,
    pub demand: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutgoingLink<S> {
    pub label: String,
    pub supply: S,
}

/// One junction: incoming links with demands, outgoing links with supplies
/// and the turning-ratio matrix (row = incoming, column = outgoing).
///
/// Construction only checks shapes. Value constraints (signs, ratio range,
/// label uniqueness) are reported by [`NodeProblem::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProblem<S> {
    incoming: Vec<IncomingLink<S>>,
    outgoing: Vec<OutgoingLink<S>>,
    turning: Vec<Vec<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}: {}", tag, self.message)
    }
}

/// Flow per incoming link, in the order of [`NodeProblem::incoming`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowVector<S>(pub Vec<S>);

impl<S: Scalar> FlowVector<S> {
    pub fn zeros(len: usize) -> Self {
        FlowVector((0..len).map(|_| S::zero()).collect())
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        FlowVector(values.iter().map(|&v| S::from_i64(v)).collect())
    }

    pub fn total(&self) -> S {
        sum(self.0.iter().cloned())
    }

    pub fn map<T, F: FnMut(&S) -> T>(&self, f: F) -> FlowVector<T> {
        FlowVector(self.0.iter().map(f).collect())
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> Deref for FlowVector<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> From<Vec<S>> for FlowVector<S> {
    fn from(values: Vec<S>) -> Self {
        FlowVector(values)
    }
}

/// Demand slacks `δ_i − q_i` and supply slacks `σ_o − q_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackVector<S> {
    pub incoming: Vec<S>,
    pub outgoing: Vec<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    NonNegativity,
    Demand,
    Supply,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::NonNegativity => "nonnegativity",
            ConstraintKind::Demand => "demand",
            ConstraintKind::Supply => "supply",
        }
    }
}

/// A linear constraint `a·q ≤ b` over the incoming flows.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace<S> {
    pub coefficients: Vec<S>,
    pub bound: S,
    pub kind: ConstraintKind,
    /// Index of the link the constraint belongs to (incoming for demand and
    /// nonnegativity, outgoing for supply).
    pub subject: usize,
    pub subject_label: String,
    /// `false` for supply constraints with an all-zero coefficient row; those
    /// are kept for stable indexing but never searched for bindings.
    pub active: bool,
}

impl<S: Scalar> HalfSpace<S> {
    /// Stable identifier such as `demand:E` or `supply:W`.
    pub fn label(&self) -> String {
        format!("{}:{}", self.kind.as_str(), self.subject_label)
    }

    pub fn evaluate(&self, q: &[S]) -> S {
        dot(&self.coefficients, q)
    }

    pub fn slack(&self, q: &[S]) -> S {
        self.bound.clone() - self.evaluate(q)
    }

    pub fn contains(&self, q: &[S], tol: &Tolerance<S>) -> bool {
        !tol.is_negative(&self.slack(q))
    }

    pub fn is_binding(&self, q: &[S], tol: &Tolerance<S>) -> bool {
        tol.is_zero(&self.slack(q))
    }

    /// True when every point of the demand box `0 ≤ q ≤ demands` satisfies the
    /// constraint, so it can never cut the feasible region.
    pub fn is_implied_by_box(&self, demands: &[S]) -> bool {
        let worst = sum(self
            .coefficients
            .iter()
            .zip(demands)
            .filter(|(a, _)| a.gt_zero())
            .map(|(a, d)| a.clone() * d.clone()));
        worst <= self.bound
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    sum(a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()))
}

impl<S: Scalar> NodeProblem<S> {
    pub fn new(
        incoming: Vec<IncomingLink<S>>,
        outgoing: Vec<OutgoingLink<S>>,
        turning: Vec<Vec<S>>,
    ) -> Result<Self, ModelError> {
        if turning.len() != incoming.len() {
            return Err(ModelError::TurningRows {
                expected: incoming.len(),
                found: turning.len(),
            });
        }
        for (row, entries) in turning.iter().enumerate() {
            if entries.len() != outgoing.len() {
                return Err(ModelError::RaggedTurning {
                    row,
                    expected: outgoing.len(),
                    found: entries.len(),
                });
            }
        }
        Ok(NodeProblem {
            incoming,
            outgoing,
            turning,
        })
    }

    pub fn incoming(&self) -> &[IncomingLink<S>] {
        &self.incoming
    }

    pub fn outgoing(&self) -> &[OutgoingLink<S>] {
        &self.outgoing
    }

    pub fn turning(&self) -> &[Vec<S>] {
        &self.turning
    }

    pub fn ratio(&self, i: usize, o: usize) -> &S {
        &self.turning[i][o]
    }

    pub fn num_incoming(&self) -> usize {
        self.incoming.len()
    }

    pub fn num_outgoing(&self) -> usize {
        self.outgoing.len()
    }

    pub fn demand(&self, i: usize) -> &S {
        &self.incoming[i].demand
    }

    pub fn supply(&self, o: usize) -> &S {
        &self.outgoing[o].supply
    }

    pub fn demands(&self) -> Vec<S> {
        self.incoming.iter().map(|l| l.demand.clone()).collect()
    }

    pub fn supplies(&self) -> Vec<S> {
        self.outgoing.iter().map(|l| l.supply.clone()).collect()
    }

    pub fn incoming_index(&self, label: &str) -> Result<usize, ModelError> {
        self.incoming
            .iter()
            .position(|l| l.label == label)
            .ok_or_else(|| ModelError::UnknownLink(label.into()))
    }

    /// Outgoing links that receive a positive share of incoming link `i`.
    pub fn movements_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.turning[i]
            .iter()
            .enumerate()
            .filter(|(_, f)| f.gt_zero())
            .map(|(o, _)| o)
    }

    /// `max(1, max δ, max σ)`, the magnitude the float tolerance is scaled by.
    pub fn scale(&self) -> S {
        self.incoming
            .iter()
            .map(|l| l.demand.abs())
            .chain(self.outgoing.iter().map(|l| l.supply.abs()))
            .fold(S::one(), S::max_of)
    }

    /// Zero in exact mode, `1e-9 · scale` in float mode.
    pub fn tolerance(&self) -> Tolerance<S> {
        Tolerance::scaled(&self.scale())
    }

    pub fn map<T, F: FnMut(&S) -> T>(&self, mut f: F) -> NodeProblem<T> {
        NodeProblem {
            incoming: self
                .incoming
                .iter()
                .map(|l| IncomingLink {
                    label: l.label.clone(),
                    demand: f(&l.demand),
                })
                .collect(),
            outgoing: self
                .outgoing
                .iter()
                .map(|l| OutgoingLink {
                    label: l.label.clone(),
                    supply: f(&l.supply),
                })
                .collect(),
            turning: self
                .turning
                .iter()
                .map(|row| row.iter().map(&mut f).collect())
                .collect(),
        }
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let tol = self.tolerance();
        if self.incoming.is_empty() {
            out.push(Diagnostic::error("node has no incoming links".into()));
        }
        check_labels(
            self.incoming.iter().map(|l| l.label.as_str()),
            "incoming",
            &mut out,
        );
        check_labels(
            self.outgoing.iter().map(|l| l.label.as_str()),
            "outgoing",
            &mut out,
        );
        for link in &self.incoming {
            if !finite(&link.demand) {
                out.push(Diagnostic::error(format!(
                    "non-finite demand on `{}`",
                    link.label
                )));
            } else if link.demand.lt_zero() {
                out.push(Diagnostic::error(format!(
                    "negative demand on `{}`: {}",
                    link.label, link.demand
                )));
            }
        }
        for link in &self.outgoing {
            if !finite(&link.supply) {
                out.push(Diagnostic::error(format!(
                    "non-finite supply on `{}`",
                    link.label
                )));
            } else if link.supply.lt_zero() {
                out.push(Diagnostic::error(format!(
                    "negative supply on `{}`: {}",
                    link.label, link.supply
                )));
            }
        }
        for (i, row) in self.turning.iter().enumerate() {
            let from = &self.incoming[i].label;
            for (o, f) in row.iter().enumerate() {
                if !finite(f) || f.lt_zero() || *f > S::one() {
                    out.push(Diagnostic::error(format!(
                        "turning ratio {} -> {} is {}, outside [0, 1]",
                        from, self.outgoing[o].label, f
                    )));
                }
            }
            if self.incoming[i].demand.gt_zero() && self.movements_of(i).next().is_none() {
                out.push(Diagnostic::error(format!(
                    "incoming link `{}` has demand but no movement with a positive turning ratio",
                    from
                )));
            }
            let row_sum = sum(row.iter().cloned());
            if !tol.eq(&row_sum, &S::one()) {
                out.push(Diagnostic::warning(format!(
                    "turning ratios of `{}` sum to {}, not 1",
                    from, row_sum
                )));
            }
        }
        out
    }

    pub fn has_errors(&self) -> bool {
        self.validate().iter().any(Diagnostic::is_error)
    }

    fn check_len(&self, q: &[S]) -> Result<(), ModelError> {
        if q.len() != self.num_incoming() {
            return Err(ModelError::DimensionMismatch {
                expected: self.num_incoming(),
                found: q.len(),
            });
        }
        Ok(())
    }

    /// `q_o = Σ_i f(i,o)·q_i` for every outgoing link.
    pub fn outgoing_flow(&self, q: &[S]) -> Result<Vec<S>, ModelError> {
        self.check_len(q)?;
        Ok((0..self.num_outgoing())
            .map(|o| {
                sum(self
                    .turning
                    .iter()
                    .zip(q)
                    .map(|(row, qi)| row[o].clone() * qi.clone()))
            })
            .collect())
    }

    /// `q_i ≤ δ_i`, one per incoming link.
    pub fn demand_halfspaces(&self) -> Vec<HalfSpace<S>> {
        let n = self.num_incoming();
        self.incoming
            .iter()
            .enumerate()
            .map(|(i, link)| HalfSpace {
                coefficients: unit(n, i, S::one()),
                bound: link.demand.clone(),
                kind: ConstraintKind::Demand,
                subject: i,
                subject_label: link.label.clone(),
                active: true,
            })
            .collect()
    }

    /// `Σ_i f(i,o)·q_i ≤ σ_o`, one per outgoing link.
    pub fn supply_halfspaces(&self) -> Vec<HalfSpace<S>> {
        self.outgoing
            .iter()
            .enumerate()
            .map(|(o, link)| {
                let coefficients: Vec<S> = self.turning.iter().map(|row| row[o].clone()).collect();
                let active = coefficients.iter().any(|a| !a.is_zero());
                HalfSpace {
                    coefficients,
                    bound: link.supply.clone(),
                    kind: ConstraintKind::Supply,
                    subject: o,
                    subject_label: link.label.clone(),
                    active,
                }
            })
            .collect()
    }

    /// `−q_i ≤ 0`, one per incoming link.
    pub fn nonnegativity_halfspaces(&self) -> Vec<HalfSpace<S>> {
        let n = self.num_incoming();
        self.incoming
            .iter()
            .enumerate()
            .map(|(i, link)| HalfSpace {
                coefficients: unit(n, i, -S::one()),
                bound: S::zero(),
                kind: ConstraintKind::NonNegativity,
                subject: i,
                subject_label: link.label.clone(),
                active: true,
            })
            .collect()
    }

    /// Every constraint, in the order nonnegativity, demand, supply.
    pub fn halfspaces(&self) -> Vec<HalfSpace<S>> {
        let mut all = self.nonnegativity_halfspaces();
        all.extend(self.demand_halfspaces());
        all.extend(self.supply_halfspaces());
        all
    }

    pub fn is_feasible(&self, q: &[S], tol: &Tolerance<S>) -> bool {
        if q.len() != self.num_incoming() {
            return false;
        }
        if q.iter().any(|x| !finite(x) || tol.is_negative(x)) {
            return false;
        }
        if q.iter()
            .zip(&self.incoming)
            .any(|(x, l)| !tol.le(x, &l.demand))
        {
            return false;
        }
        self.supply_halfspaces().iter().all(|h| h.contains(q, tol))
    }

    /// Slacks of every demand and supply constraint. Entries may be negative
    /// for infeasible `q`.
    pub fn slacks(&self, q: &[S]) -> Result<SlackVector<S>, ModelError> {
        let flows_out = self.outgoing_flow(q)?;
        Ok(SlackVector {
            incoming: self
                .incoming
                .iter()
                .zip(q)
                .map(|(l, x)| l.demand.clone() - x.clone())
                .collect(),
            outgoing: self
                .outgoing
                .iter()
                .zip(flows_out)
                .map(|(l, x)| l.supply.clone() - x)
                .collect(),
        })
    }
}

fn unit<S: Scalar>(n: usize, i: usize, value: S) -> Vec<S> {
    let mut v: Vec<S> = (0..n).map(|_| S::zero()).collect();
    v[i] = value;
    v
}

fn finite<S: Scalar>(x: &S) -> bool {
    S::EXACT || x.to_f64().is_finite()
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a str>, side: &str, out: &mut Vec<Diagnostic>) {
    let mut seen: Vec<&str> = Vec::new();
    for label in labels {
        if seen.contains(&label) {
            out.push(Diagnostic::error(format!(
                "duplicate {} label `{}`",
                side, label
            )));
        }
        seen.push(label);
    }
}

/// The three-approach junction used throughout the examples and tests:
/// incoming E, N, S with demands 100, 600, 600; outgoing N, W, S with
/// supplies 1400, 400, 1400.
pub fn demo_problem<S: Scalar>() -> NodeProblem<S> {
    let half = S::ratio(1, 2);
    let zero = S::zero;
    let incoming = [("E", 100), ("N", 600), ("S", 600)]
        .iter()
        .map(|&(label, d)| IncomingLink {
            label: label.into(),
            demand: S::from_i64(d),
        })
        .collect();
    let outgoing = [("N", 1400), ("W", 400), ("S", 1400)]
        .iter()
        .map(|&(label, s)| OutgoingLink {
            label: label.into(),
            supply: S::from_i64(s),
        })
        .collect();
    let turning = alloc::vec![
        alloc::vec![zero(), S::one(), zero()],
        alloc::vec![zero(), half.clone(), half.clone()],
        alloc::vec![half.clone(), half, zero()],
    ];
    NodeProblem::new(incoming, outgoing, turning).expect("demo shape is consistent")
}
