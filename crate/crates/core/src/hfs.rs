//! Holding-free check: every incoming link must be stopped either by its own
//! demand or by a saturated outgoing link it feeds.

use alloc::vec::Vec;

use crate::model::{ModelError, NodeProblem};
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct HfsTerm<S> {
    pub link: usize,
    pub demand_slack: S,
    /// Product of the supply slacks of every outgoing link this link feeds
    /// (1 for a link with no movements).
    pub supply_slack_product: S,
    pub term: S,
}

/// Slack-product residual `v = Σ_i s_i · Π_{o: f(i,o)>0} s_o` and its terms.
///
/// `v` mixes units across terms and is only meaningful as a zero/nonzero
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct HfsReport<S> {
    pub residual: S,
    pub per_link_terms: Vec<HfsTerm<S>>,
    pub feasible: bool,
    pub holding_free: bool,
}

pub fn hfs_residual<S: Scalar>(
    problem: &NodeProblem<S>,
    q: &[S],
) -> Result<HfsReport<S>, ModelError> {
    let tol = problem.tolerance();
    let slacks = problem.slacks(q)?;
    let feasible = problem.is_feasible(q, &tol);

    let mut terms = Vec::with_capacity(problem.num_incoming());
    let mut all_zero = true;
    for (i, demand_slack) in slacks.incoming.iter().enumerate() {
        let supply: Vec<&S> = problem
            .movements_of(i)
            .map(|o| &slacks.outgoing[o])
            .collect();
        let product = supply.iter().fold(S::one(), |acc, s| acc * (*s).clone());
        let term = demand_slack.clone() * product.clone();
        let factors = core::iter::once(demand_slack).chain(supply.iter().copied());
        if !term_is_zero(&term, factors, &tol) {
            all_zero = false;
        }
        terms.push(HfsTerm {
            link: i,
            demand_slack: demand_slack.clone(),
            supply_slack_product: product,
            term,
        });
    }
    let residual = crate::scalar::sum(terms.iter().map(|t| t.term.clone()));
    Ok(HfsReport {
        residual,
        per_link_terms: terms,
        feasible,
        holding_free: feasible && all_zero,
    })
}

/// Zero test for one product term. Exact mode: `term == 0`. Float mode: the
/// threshold is the problem tolerance times the product of the other
/// factors' magnitudes, i.e. what one factor within tolerance of zero can
/// contribute.
fn term_is_zero<'a, S: Scalar>(
    term: &S,
    factors: impl Iterator<Item = &'a S>,
    tol: &Tolerance<S>,
) -> bool {
    if S::EXACT {
        return term.is_zero();
    }
    let magnitudes: Vec<S> = factors.map(|f| f.abs().max_of(S::one())).collect();
    let smallest = magnitudes
        .iter()
        .cloned()
        .reduce(S::min_of)
        .unwrap_or_else(S::one);
    let product = magnitudes.into_iter().fold(S::one(), |acc, m| acc * m);
    term.abs() <= tol.eps().clone() * product / smallest
}

/// Disjunctive holding-free test: for every incoming link, its demand slack
/// is zero or some supply slack of an outgoing link it feeds is zero.
/// Infeasible flows are never holding-free.
pub fn is_hfs<S: Scalar>(
    problem: &NodeProblem<S>,
    q: &[S],
    tol: &Tolerance<S>,
) -> Result<bool, ModelError> {
    let slacks = problem.slacks(q)?;
    if !problem.is_feasible(q, tol) {
        return Ok(false);
    }
    Ok((0..problem.num_incoming()).all(|i| {
        tol.is_zero(&slacks.incoming[i])
            || problem
                .movements_of(i)
                .any(|o| tol.is_zero(&slacks.outgoing[o]))
    }))
}
