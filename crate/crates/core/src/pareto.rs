//! Strict coordinatewise dominance, the Pareto-optimality probe, a
//! brute-force grid oracle, and frontier classification of sample points.

use alloc::vec::Vec;

use crate::geometry::{lex_cmp, line_halfspace_hit_within, same_point, ParametricLine};
use crate::hfs::is_hfs;
use crate::lp::{LinearProgram, LpOutcome};
use crate::model::{FlowVector, ModelError, NodeProblem};
use crate::scalar::Scalar;

/// Default cap on the number of grid points the oracle may span.
pub const DEFAULT_GRID_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParetoError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("flow vector is infeasible")]
    Infeasible,
    #[error("grid step must be positive")]
    NonPositiveStep,
    #[error("grid of {cells} points exceeds the budget of {budget}")]
    GridBudget { cells: u128, budget: u128 },
    #[error("dominance probe failed: {0}")]
    Lp(&'static str),
}

/// `candidate ≻ reference`: strictly larger in every coordinate.
pub fn dominates<S: Scalar>(candidate: &[S], reference: &[S]) -> bool {
    candidate.len() == reference.len() && candidate.iter().zip(reference).all(|(a, b)| a > b)
}

/// Outcome of `max t  s.t.  q̃ feasible,  q̃_i ≥ q_i + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceProbe<S> {
    pub t_star: S,
    /// A feasible point improving every coordinate by `t_star`, when `t_star > 0`.
    pub witness: Option<FlowVector<S>>,
    pub pareto_optimal: bool,
}

pub fn is_pareto_optimal<S: Scalar>(
    problem: &NodeProblem<S>,
    q: &[S],
) -> Result<DominanceProbe<S>, ParetoError> {
    let n = problem.num_incoming();
    if q.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: q.len(),
        }
        .into());
    }
    let tol = problem.tolerance();
    if !problem.is_feasible(q, &tol) {
        return Err(ParetoError::Infeasible);
    }

    // Variables: q̃_1..q̃_n, t⁺, t⁻ (t = t⁺ − t⁻ is free).
    let width = n + 2;
    let zeros = || -> Vec<S> { (0..width).map(|_| S::zero()).collect() };
    let mut objective = zeros();
    objective[n] = S::one();
    objective[n + 1] = -S::one();
    let mut lp = LinearProgram::maximize(objective);
    let widen = |coefficients: Vec<S>| -> Vec<S> {
        let mut row = zeros();
        row[..n].clone_from_slice(&coefficients);
        row
    };
    for h in problem
        .demand_halfspaces()
        .into_iter()
        .chain(problem.supply_halfspaces().into_iter().filter(|h| h.active))
    {
        lp.add_le(widen(h.coefficients), h.bound)
            .map_err(|_| ParetoError::Lp("row length"))?;
    }
    for (i, qi) in q.iter().enumerate() {
        let mut row = zeros();
        row[i] = -S::one();
        row[n] = S::one();
        row[n + 1] = -S::one();
        lp.add_le(row, -qi.clone())
            .map_err(|_| ParetoError::Lp("row length"))?;
    }

    let solution = match lp.solve(&tol) {
        LpOutcome::Optimal(sol) => sol,
        // q itself is feasible with t = 0, and t ≤ min_i (δ_i − q_i).
        LpOutcome::Infeasible => return Err(ParetoError::Lp("infeasible")),
        LpOutcome::Unbounded => return Err(ParetoError::Lp("unbounded")),
        LpOutcome::PivotLimit => return Err(ParetoError::Lp("pivot limit reached")),
    };
    let t_star = solution.value;
    let pareto_optimal = !tol.is_positive(&t_star);
    let witness = if pareto_optimal {
        None
    } else {
        Some(FlowVector(solution.x[..n].to_vec()))
    };
    Ok(DominanceProbe {
        t_star,
        witness,
        pareto_optimal,
    })
}

/// Grid spacing for [`oracle_is_pareto_optimal`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridStep<S> {
    /// The same step on every axis.
    Uniform(S),
    /// `δ_i / n` on axis `i`.
    Divisions(u32),
}

/// Brute-force Pareto check: enumerates grid points of the demand box and
/// reports `false` iff a feasible grid point strictly dominates `q`.
///
/// Each axis carries the multiples of its step up to `δ_i`, plus `δ_i`
/// itself. The budget applies to the full grid.
pub fn oracle_is_pareto_optimal<S: Scalar>(
    problem: &NodeProblem<S>,
    q: &[S],
    step: &GridStep<S>,
    budget: u128,
) -> Result<bool, ParetoError> {
    let n = problem.num_incoming();
    if q.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            found: q.len(),
        }
        .into());
    }
    let axes = grid_axes(problem, step, budget)?;
    let tol = problem.tolerance();

    // Only values strictly above q_i can take part in a dominating point.
    let candidates: Vec<Vec<S>> = axes
        .into_iter()
        .zip(q)
        .map(|(axis, qi)| axis.into_iter().filter(|v| v > qi).collect())
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(true);
    }
    let mut index = alloc::vec![0usize; n];
    loop {
        let point: Vec<S> = index
            .iter()
            .zip(&candidates)
            .map(|(&k, axis)| axis[k].clone())
            .collect();
        if problem.is_feasible(&point, &tol) {
            return Ok(false);
        }
        // Odometer increment.
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(true);
            }
            index[axis] += 1;
            if index[axis] < candidates[axis].len() {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

fn grid_axes<S: Scalar>(
    problem: &NodeProblem<S>,
    step: &GridStep<S>,
    budget: u128,
) -> Result<Vec<Vec<S>>, ParetoError> {
    let mut axes = Vec::with_capacity(problem.num_incoming());
    let mut cells: u128 = 1;
    for link in problem.incoming() {
        let demand = link.demand.clone().max_of(S::zero());
        let h = match step {
            GridStep::Uniform(h) => h.clone(),
            GridStep::Divisions(k) => {
                if *k == 0 {
                    return Err(ParetoError::NonPositiveStep);
                }
                demand.clone() / S::from_i64(i64::from(*k))
            }
        };
        let mut axis = Vec::new();
        if !h.gt_zero() {
            if demand.is_zero() {
                axis.push(S::zero());
            } else {
                return Err(ParetoError::NonPositiveStep);
            }
        } else {
            // Count first so a tiny step cannot exhaust memory.
            let count = (demand.to_f64() / h.to_f64()).floor() as u128 + 2;
            cells = cells.saturating_mul(count);
            if cells > budget {
                return Err(ParetoError::GridBudget { cells, budget });
            }
            let mut v = S::zero();
            while v <= demand {
                axis.push(v.clone());
                v = v + h.clone();
            }
            if axis.last() != Some(&demand) {
                axis.push(demand);
            }
        }
        axes.push(axis);
    }
    Ok(axes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierSample<S> {
    pub point: FlowVector<S>,
    pub hfs: bool,
    pub pareto: bool,
}

pub fn classify_frontier<S: Scalar>(
    problem: &NodeProblem<S>,
    samples: &[FlowVector<S>],
) -> Result<Vec<FrontierSample<S>>, ParetoError> {
    let tol = problem.tolerance();
    samples
        .iter()
        .map(|point| {
            let pareto = is_pareto_optimal(problem, point)?.pareto_optimal;
            Ok(FrontierSample {
                point: point.clone(),
                hfs: is_hfs(problem, point, &tol)?,
                pareto,
            })
        })
        .collect()
}

/// Feasible sample points for shading the frontier: a grid with `per_axis`
/// divisions of each demand interval, plus every grid point pushed along
/// the all-ones direction onto the boundary. Sorted and deduplicated.
pub fn sample_region<S: Scalar>(problem: &NodeProblem<S>, per_axis: u32) -> Vec<FlowVector<S>> {
    let n = problem.num_incoming();
    let tol = problem.tolerance();
    let Ok(axes) = grid_axes(problem, &GridStep::Divisions(per_axis.max(1)), u128::MAX) else {
        return Vec::new();
    };
    let constraints: Vec<_> = problem
        .halfspaces()
        .into_iter()
        .filter(|h| h.active)
        .collect();
    let ones: Vec<S> = (0..n).map(|_| S::one()).collect();

    let mut out: Vec<FlowVector<S>> = Vec::new();
    let mut index = alloc::vec![0usize; n];
    'grid: loop {
        let point: FlowVector<S> = FlowVector(
            index
                .iter()
                .zip(&axes)
                .map(|(&k, axis)| axis[k].clone())
                .collect(),
        );
        if problem.is_feasible(&point, &tol) {
            if let Ok(line) = ParametricLine::new(point.clone(), ones.clone()) {
                let step = constraints
                    .iter()
                    .filter_map(|h| line_halfspace_hit_within(&line, h, &tol))
                    .reduce(S::min_of);
                if let Some(p) = step {
                    out.push(line.at(&p));
                }
            }
            out.push(point);
        }
        let mut axis = 0;
        loop {
            if axis == n {
                break 'grid;
            }
            index[axis] += 1;
            if index[axis] < axes[axis].len() {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
    out.sort_by(|a, b| lex_cmp(a, b));
    out.dedup_by(|a, b| same_point(a, b, &tol));
    out
}
