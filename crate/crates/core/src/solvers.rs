//! Flow allocation at a node: incremental node transfer, greedy allocation
//! under a link ordering, and total-flow maximization.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{self, enumerate_vertices, line_halfspace_hit_within, merging_line};
use crate::lp::{LinearProgram, LpOutcome};
use crate::model::{ConstraintKind, FlowVector, ModelError, NodeProblem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("problem is invalid: {0}")]
    InvalidProblem(String),
    #[error("expected {expected} merging weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("merging weight of `{0}` must be positive")]
    NonPositiveWeight(String),
    #[error("order is not a permutation of the incoming links")]
    NotAPermutation,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error("linear program failed: {0}")]
    Lp(&'static str),
}

/// Relative priority of each incoming link when competing for supply.
#[derive(Debug, Clone, PartialEq)]
pub struct MergingWeights<S>(pub Vec<S>);

impl<S: Scalar> MergingWeights<S> {
    pub fn uniform(len: usize) -> Self {
        MergingWeights((0..len).map(|_| S::one()).collect())
    }

    pub fn scaled(&self, factor: &S) -> Self {
        MergingWeights(self.0.iter().map(|w| w.clone() * factor.clone()).collect())
    }

    /// Rejects weights of the wrong length or with a non-positive entry.
    pub fn check(&self, problem: &NodeProblem<S>) -> Result<(), SolveError> {
        if self.0.len() != problem.num_incoming() {
            return Err(SolveError::WeightCount {
                expected: problem.num_incoming(),
                found: self.0.len(),
            });
        }
        for (w, link) in self.0.iter().zip(problem.incoming()) {
            if link.demand.gt_zero() && !w.gt_zero() {
                return Err(SolveError::NonPositiveWeight(link.label.clone()));
            }
        }
        Ok(())
    }
}

/// Processing order of incoming links, as indices into the problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self, SolveError> {
        let mut seen = alloc::vec![false; order.len()];
        for &i in &order {
            if i >= order.len() || seen[i] {
                return Err(SolveError::NotAPermutation);
            }
            seen[i] = true;
        }
        Ok(Permutation(order))
    }

    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    pub fn from_labels<S: Scalar, L: AsRef<str>>(
        problem: &NodeProblem<S>,
        labels: &[L],
    ) -> Result<Self, SolveError> {
        let order = labels
            .iter()
            .map(|l| problem.incoming_index(l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        if order.len() != problem.num_incoming() {
            return Err(SolveError::NotAPermutation);
        }
        Permutation::new(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Every permutation of `0..len` in lexicographic order.
    pub fn all(len: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..len).collect();
        loop {
            out.push(Permutation(current.clone()));
            // Next lexicographic permutation.
            let Some(i) = (1..len).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..len)
                .rev()
                .find(|&j| current[j] > current[i - 1])
                .unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

/// A constraint that became binding at a waypoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub kind: ConstraintKind,
    pub subject: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<S> {
    pub waypoint: FlowVector<S>,
    pub bindings: Vec<Binding>,
    /// Incoming links that stop moving at this waypoint.
    pub removed_links: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult<S> {
    pub flows: FlowVector<S>,
    pub total: S,
    /// Starts at the origin; the last waypoint equals `flows`.
    pub trace: Vec<TraceStep<S>>,
    pub iterations: usize,
}

impl<S: Scalar> SolverResult<S> {
    fn from_trace(trace: Vec<TraceStep<S>>, iterations: usize) -> Self {
        let flows = trace
            .last()
            .expect("trace starts at the origin")
            .waypoint
            .clone();
        SolverResult {
            total: total_flow(&flows),
            flows,
            trace,
            iterations,
        }
    }
}

pub fn total_flow<S: Scalar>(q: &[S]) -> S {
    crate::scalar::sum(q.iter().cloned())
}

fn ensure_valid<S: Scalar>(problem: &NodeProblem<S>) -> Result<(), SolveError> {
    if let Some(d) = problem.validate().into_iter().find(|d| d.is_error()) {
        return Err(SolveError::InvalidProblem(d.message));
    }
    Ok(())
}

fn origin_step<S: Scalar>(n: usize) -> TraceStep<S> {
    TraceStep {
        waypoint: FlowVector::zeros(n),
        bindings: Vec::new(),
        removed_links: Vec::new(),
    }
}

/// Incremental node transfer.
///
/// All still-unconstrained links advance together along their merging
/// weights until the first demand or supply constraint binds. A binding
/// demand freezes its link; a binding supply freezes every active link that
/// feeds it. Simultaneous bindings are applied in the same iteration.
pub fn solve_inm<S: Scalar>(
    problem: &NodeProblem<S>,
    weights: &MergingWeights<S>,
) -> Result<SolverResult<S>, SolveError> {
    ensure_valid(problem)?;
    weights.check(problem)?;
    let n = problem.num_incoming();
    let tol = problem.tolerance();
    let demand = problem.demand_halfspaces();
    let supply: Vec<_> = problem
        .supply_halfspaces()
        .into_iter()
        .filter(|h| h.active)
        .collect();

    let mut active: Vec<bool> = problem
        .incoming()
        .iter()
        .map(|l| l.demand.gt_zero())
        .collect();
    let mut q = FlowVector::zeros(n);
    let mut trace = alloc::vec![origin_step(n)];
    let mut iterations = 0;

    while active.iter().any(|&a| a) {
        iterations += 1;
        let line = merging_line(&q, &weights.0, &active)?;

        let mut candidates = Vec::new();
        for h in demand.iter().filter(|h| active[h.subject]).chain(&supply) {
            if let Some(p) = line_halfspace_hit_within(&line, h, &tol) {
                candidates.push((p, h));
            }
        }
        // Every active link has a positive-rate demand plane, so this is
        // never empty.
        let step = candidates
            .iter()
            .map(|(p, _)| p.clone())
            .reduce(S::min_of)
            .expect("active link has a demand constraint");
        q = line.at(&step);

        let mut bindings = Vec::new();
        let mut removed = Vec::new();
        for (p, h) in candidates {
            if p != step && !h.is_binding(&q, &tol) {
                continue;
            }
            let binding = Binding {
                kind: h.kind,
                subject: h.subject,
                label: h.label(),
            };
            match binding.kind {
                ConstraintKind::Demand => {
                    let i = binding.subject;
                    q.0[i] = problem.demand(i).clone();
                    if active[i] {
                        active[i] = false;
                        removed.push(i);
                    }
                }
                ConstraintKind::Supply => {
                    for i in problem
                        .turning()
                        .iter()
                        .enumerate()
                        .filter(|(_, row)| row[binding.subject].gt_zero())
                        .map(|(i, _)| i)
                    {
                        if active[i] {
                            active[i] = false;
                            removed.push(i);
                        }
                    }
                }
                ConstraintKind::NonNegativity => {}
            }
            bindings.push(binding);
        }
        removed.sort_unstable();
        trace.push(TraceStep {
            waypoint: q.clone(),
            bindings,
            removed_links: removed,
        });
    }

    Ok(SolverResult::from_trace(trace, iterations))
}

/// Greedy allocation: each link in turn takes as much as its demand and the
/// residual supplies it feeds allow.
pub fn solve_greedy<S: Scalar>(
    problem: &NodeProblem<S>,
    order: &Permutation,
) -> Result<SolverResult<S>, SolveError> {
    ensure_valid(problem)?;
    let n = problem.num_incoming();
    if order.0.len() != n {
        return Err(SolveError::NotAPermutation);
    }
    let tol = problem.tolerance();
    let mut residual = problem.supplies();
    let mut q = FlowVector::zeros(n);
    let mut trace = alloc::vec![origin_step(n)];

    for &i in &order.0 {
        let demand = problem.demand(i).clone();
        if !demand.gt_zero() {
            continue;
        }
        let mut take = demand.clone();
        for o in problem.movements_of(i) {
            let cap = residual[o].clone().max_of(S::zero()) / problem.ratio(i, o).clone();
            take = take.min_of(cap);
        }
        let mut bindings = Vec::new();
        if tol.eq(&take, &demand) {
            take = demand;
            bindings.push(Binding {
                kind: ConstraintKind::Demand,
                subject: i,
                label: alloc::format!("demand:{}", problem.incoming()[i].label),
            });
        }
        for o in problem.movements_of(i).collect::<Vec<_>>() {
            residual[o] = residual[o].clone() - problem.ratio(i, o).clone() * take.clone();
            if tol.is_zero(&residual[o]) {
                residual[o] = S::zero();
                bindings.push(Binding {
                    kind: ConstraintKind::Supply,
                    subject: o,
                    label: alloc::format!("supply:{}", problem.outgoing()[o].label),
                });
            }
        }
        q.0[i] = take;
        trace.push(TraceStep {
            waypoint: q.clone(),
            bindings,
            removed_links: alloc::vec![i],
        });
    }

    let iterations = trace.len() - 1;
    Ok(SolverResult::from_trace(trace, iterations))
}

/// Maximizes total flow with the simplex method (Bland's rule, natural
/// variable order) and returns the optimal vertex it lands on.
pub fn solve_flowmax<S: Scalar>(problem: &NodeProblem<S>) -> Result<SolverResult<S>, SolveError> {
    ensure_valid(problem)?;
    let n = problem.num_incoming();
    let mut lp = LinearProgram::maximize((0..n).map(|_| S::one()).collect());
    for h in problem
        .demand_halfspaces()
        .into_iter()
        .chain(problem.supply_halfspaces().into_iter().filter(|h| h.active))
    {
        lp.add_le(h.coefficients, h.bound)
            .map_err(|_| SolveError::Lp("row length"))?;
    }
    let solution = match lp.solve(&problem.tolerance()) {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible => return Err(SolveError::Lp("infeasible")),
        LpOutcome::Unbounded => return Err(SolveError::Lp("unbounded")),
        LpOutcome::PivotLimit => return Err(SolveError::Lp("pivot limit reached")),
    };
    let flows = FlowVector(solution.x);
    let tol = problem.tolerance();
    let bindings = problem
        .halfspaces()
        .into_iter()
        .filter(|h| {
            h.active && h.kind != ConstraintKind::NonNegativity && h.is_binding(&flows, &tol)
        })
        .map(|h| Binding {
            kind: h.kind,
            subject: h.subject,
            label: h.label(),
        })
        .collect();
    let trace = alloc::vec![
        origin_step(n),
        TraceStep {
            waypoint: flows,
            bindings,
            removed_links: (0..n).collect(),
        },
    ];
    Ok(SolverResult::from_trace(trace, solution.pivots))
}

/// Every vertex of the feasible polytope attaining the maximum total flow,
/// in lexicographic order.
pub fn enumerate_flowmax_optima<S: Scalar>(
    problem: &NodeProblem<S>,
) -> Result<Vec<FlowVector<S>>, SolveError> {
    ensure_valid(problem)?;
    let polytope = enumerate_vertices(problem, geometry::DEFAULT_DIMENSION_LIMIT)?;
    let tol = problem.tolerance();
    let Some(best) = polytope.max_total() else {
        return Ok(Vec::new());
    };
    Ok(polytope
        .vertices
        .into_iter()
        .filter(|v| tol.eq(&v.total(), &best))
        .collect())
}
