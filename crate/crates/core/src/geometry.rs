//! Flow-space geometry: intercept form of constraint planes, merging-weight
//! lines and their first hits on half-spaces, exhaustive vertex enumeration
//! of the feasible polytope, and the scene payload used to draw it.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::model::{dot, ConstraintKind, FlowVector, HalfSpace, NodeProblem};
use crate::scalar::{Scalar, Tolerance};

/// Largest number of incoming links [`enumerate_vertices`] accepts by default.
pub const DEFAULT_DIMENSION_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("plane through the origin has no finite intercept form")]
    DegeneratePlane,
    #[error("line direction is empty: no active link")]
    EmptyActiveSet,
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension limit exceeded: {dimension} incoming links, limit {limit}")]
    DimensionLimit { dimension: usize, limit: usize },
    #[error("scene point `{0}` lies outside the feasible region")]
    InfeasiblePoint(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Intercept<S> {
    Finite(S),
    /// The plane is parallel to this axis.
    Unbounded,
}

/// Axis intercepts of the plane `a·q = b`, i.e. the `a_i` of
/// `q_1/a_1 + … + q_n/a_n = 1`.
pub fn intercept_form<S: Scalar>(h: &HalfSpace<S>) -> Result<Vec<Intercept<S>>, GeometryError> {
    if h.bound.is_zero() {
        return Err(GeometryError::DegeneratePlane);
    }
    Ok(h.coefficients
        .iter()
        .map(|a| {
            if a.is_zero() {
                Intercept::Unbounded
            } else {
                Intercept::Finite(h.bound.clone() / a.clone())
            }
        })
        .collect())
}

/// `base + p · direction` for real `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricLine<S> {
    pub base: FlowVector<S>,
    pub direction: Vec<S>,
}

impl<S: Scalar> ParametricLine<S> {
    pub fn new(base: FlowVector<S>, direction: Vec<S>) -> Result<Self, GeometryError> {
        if base.len() != direction.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.len(),
                found: direction.len(),
            });
        }
        if direction.iter().all(|d| d.is_zero()) {
            return Err(GeometryError::EmptyActiveSet);
        }
        Ok(ParametricLine { base, direction })
    }

    pub fn at(&self, p: &S) -> FlowVector<S> {
        FlowVector(
            self.base
                .iter()
                .zip(&self.direction)
                .map(|(b, d)| b.clone() + p.clone() * d.clone())
                .collect(),
        )
    }
}

/// The line through `base` moving every active link at its merging weight
/// and holding the others fixed.
pub fn merging_line<S: Scalar>(
    base: &FlowVector<S>,
    weights: &[S],
    active: &[bool],
) -> Result<ParametricLine<S>, GeometryError> {
    if weights.len() != base.len() || active.len() != base.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: base.len(),
            found: if weights.len() != base.len() {
                weights.len()
            } else {
                active.len()
            },
        });
    }
    if !active.iter().any(|&a| a) {
        return Err(GeometryError::EmptyActiveSet);
    }
    let direction = weights
        .iter()
        .zip(active)
        .map(|(w, &a)| if a { w.clone() } else { S::zero() })
        .collect();
    ParametricLine::new(base.clone(), direction)
}

/// Smallest `p ≥ 0` at which the line meets `a·q = b`, or `None` when the
/// line never reaches the plane moving forward.
pub fn line_halfspace_hit<S: Scalar>(line: &ParametricLine<S>, h: &HalfSpace<S>) -> Option<S> {
    line_halfspace_hit_within(line, h, &Tolerance::exact())
}

/// As [`line_halfspace_hit`], clamping a base that violates the plane by at
/// most `tol` to a hit at `p = 0`.
pub fn line_halfspace_hit_within<S: Scalar>(
    line: &ParametricLine<S>,
    h: &HalfSpace<S>,
    tol: &Tolerance<S>,
) -> Option<S> {
    let rate = dot(&h.coefficients, &line.direction);
    if !rate.gt_zero() {
        return None;
    }
    let slack = h.slack(&line.base);
    let p = slack.clone() / rate;
    if p.lt_zero() {
        if tol.is_zero(&slack) {
            Some(S::zero())
        } else {
            None
        }
    } else {
        Some(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub label: String,
    pub kind: ConstraintKind,
    pub vertex_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope<S> {
    /// Sorted lexicographically by coordinates.
    pub vertices: Vec<FlowVector<S>>,
    pub facets: Vec<Facet>,
    pub dimension: usize,
}

impl<S: Scalar> Polytope<S> {
    pub fn max_total(&self) -> Option<S> {
        self.vertices.iter().map(|v| v.total()).reduce(S::max_of)
    }
}

/// All vertices of `{q ≥ 0, q ≤ δ, supply constraints}`.
///
/// Tries every `n`-subset of the constraint set (`n = |I|`), solves the square
/// system exactly and keeps feasible, distinct solutions. Cost grows as
/// `C(2n + |O|, n)` linear solves, which is why the dimension is capped.
pub fn enumerate_vertices<S: Scalar>(
    problem: &NodeProblem<S>,
    limit: usize,
) -> Result<Polytope<S>, GeometryError> {
    let n = problem.num_incoming();
    if n > limit {
        return Err(GeometryError::DimensionLimit {
            dimension: n,
            limit,
        });
    }
    let tol = problem.tolerance();
    let constraints: Vec<HalfSpace<S>> = problem
        .halfspaces()
        .into_iter()
        .filter(|h| h.active)
        .collect();

    let mut vertices: Vec<FlowVector<S>> = Vec::new();
    for subset in Combinations::new(constraints.len(), n) {
        let matrix: Vec<Vec<S>> = subset
            .iter()
            .map(|&c| constraints[c].coefficients.clone())
            .collect();
        let rhs: Vec<S> = subset
            .iter()
            .map(|&c| constraints[c].bound.clone())
            .collect();
        let Some(point) = solve_square(matrix, rhs, &tol) else {
            continue;
        };
        if !constraints.iter().all(|h| h.contains(&point, &tol)) {
            continue;
        }
        if vertices.iter().any(|v| same_point(v, &point, &tol)) {
            continue;
        }
        vertices.push(FlowVector(point));
    }
    vertices.sort_by(|a, b| lex_cmp(a, b));

    let mut facets = Vec::new();
    for h in &constraints {
        let ids: Vec<usize> = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| h.is_binding(v, &tol))
            .map(|(k, _)| k)
            .collect();
        if ids.is_empty() {
            continue;
        }
        let base = &vertices[ids[0]];
        let spans: Vec<Vec<S>> = ids[1..]
            .iter()
            .map(|&k| {
                vertices[k]
                    .iter()
                    .zip(base.iter())
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect()
            })
            .collect();
        if n > 0 && rank(spans, &tol) + 1 == n {
            facets.push(Facet {
                label: h.label(),
                kind: h.kind,
                vertex_ids: ids,
            });
        }
    }

    Ok(Polytope {
        vertices,
        facets,
        dimension: n,
    })
}

pub(crate) fn lex_cmp<S: Scalar>(a: &[S], b: &[S]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn same_point<S: Scalar>(a: &[S], b: &[S], tol: &Tolerance<S>) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| tol.eq(x, y))
}

/// Gaussian elimination on a square system. `None` when singular.
pub(crate) fn solve_square<S: Scalar>(
    mut a: Vec<Vec<S>>,
    mut b: Vec<S>,
    tol: &Tolerance<S>,
) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        // Largest magnitude pivot; any nonzero one would do in exact mode.
        let pivot = (col..n)
            .filter(|&r| !tol.is_zero(&a[r][col]))
            .max_by(|&r, &s| {
                a[r][col]
                    .abs()
                    .partial_cmp(&a[s][col].abs())
                    .unwrap_or(Ordering::Equal)
            })?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pivot_row[col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = x.clone() - factor.clone() * p.clone();
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

pub(crate) fn rank<S: Scalar>(mut rows: Vec<Vec<S>>, tol: &Tolerance<S>) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !tol.is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[col].clone() / pivot_row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = x.clone() - factor.clone() * p.clone();
            }
        }
        rank += 1;
    }
    rank
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: if k <= n { Some((0..k).collect()) } else { None },
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker<S> {
    pub name: String,
    pub kind: String,
    pub point: FlowVector<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    pub name: String,
    pub points: Vec<FlowVector<S>>,
}

/// Everything needed to redraw the flow-space figures of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<S> {
    pub problem: NodeProblem<S>,
    pub polytope: Polytope<S>,
    pub markers: Vec<Marker<S>>,
    pub traces: Vec<Trace<S>>,
    pub frontier: Vec<crate::pareto::FrontierSample<S>>,
}

impl<S: Scalar> Scene<S> {
    /// Checks that every referenced point is feasible for `problem`.
    pub fn new(
        problem: NodeProblem<S>,
        polytope: Polytope<S>,
        markers: Vec<Marker<S>>,
        traces: Vec<Trace<S>>,
        frontier: Vec<crate::pareto::FrontierSample<S>>,
    ) -> Result<Self, GeometryError> {
        let tol = problem.tolerance();
        let check = |name: &str, q: &FlowVector<S>| {
            if problem.is_feasible(q, &tol) {
                Ok(())
            } else {
                Err(GeometryError::InfeasiblePoint(name.into()))
            }
        };
        for m in &markers {
            check(&m.name, &m.point)?;
        }
        for t in &traces {
            for p in &t.points {
                check(&t.name, p)?;
            }
        }
        for s in &frontier {
            check("frontier", &s.point)?;
        }
        Ok(Scene {
            problem,
            polytope,
            markers,
            traces,
            frontier,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::demo_problem;
    use crate::scalar::Rational;
    use alloc::vec;

    type Q = Rational;

    fn fv(values: &[i64]) -> FlowVector<Q> {
        FlowVector::from_i64s(values)
    }

    #[test]
    fn intercepts_of_demo_planes() {
        let p = demo_problem::<Q>();
        let west = &p.supply_halfspaces()[1];
        let ic = intercept_form(west).unwrap();
        assert_eq!(
            ic,
            vec![
                Intercept::Finite(Q::from_i64(400)),
                Intercept::Finite(Q::from_i64(800)),
                Intercept::Finite(Q::from_i64(800)),
            ]
        );
        let demand_n = &p.demand_halfspaces()[1];
        assert_eq!(
            intercept_form(demand_n).unwrap(),
            vec![
                Intercept::Unbounded,
                Intercept::Finite(Q::from_i64(600)),
                Intercept::Unbounded
            ]
        );
        let mut through_origin = west.clone();
        through_origin.coefficients = vec![Q::from_i64(1), Q::from_i64(1), Q::from_i64(0)];
        through_origin.bound = Q::from_i64(0);
        assert_eq!(
            intercept_form(&through_origin),
            Err(GeometryError::DegeneratePlane)
        );
    }

    #[test]
    fn merging_line_directions() {
        let weights = vec![Q::ratio(1, 10), Q::from_i64(10), Q::from_i64(1)];
        let line = merging_line(&fv(&[0, 600, 0]), &weights, &[true, false, true]).unwrap();
        assert_eq!(
            line.direction,
            vec![Q::ratio(1, 10), Q::from_i64(0), Q::from_i64(1)]
        );
        assert_eq!(line.base, fv(&[0, 600, 0]));

        let ones = vec![Q::from_i64(1); 3];
        let line = merging_line(&fv(&[0, 0, 0]), &ones, &[true; 3]).unwrap();
        assert_eq!(line.direction, ones);

        let line = merging_line(&fv(&[1, 2, 3]), &ones, &[false, true, false]).unwrap();
        assert_eq!(line.at(&Q::from_i64(5)), fv(&[1, 7, 3]));

        assert_eq!(
            merging_line(&fv(&[0, 0, 0]), &ones, &[false; 3]),
            Err(GeometryError::EmptyActiveSet)
        );
    }

    #[test]
    fn termination_point_of_the_merging_line() {
        let p = demo_problem::<Q>();
        let weights = vec![Q::ratio(1, 10), Q::from_i64(10), Q::from_i64(1)];
        let line = merging_line(&fv(&[0, 600, 0]), &weights, &[true, false, true]).unwrap();
        let west = &p.supply_halfspaces()[1];
        // West slack at the base is 100 and the rate along the line is 0.6.
        let hit = line_halfspace_hit(&line, west).unwrap();
        assert_eq!(hit, Q::ratio(500, 3));
        let point = line.at(&hit);
        assert_eq!(
            point.0,
            vec![Q::ratio(50, 3), Q::from_i64(600), Q::ratio(500, 3)]
        );
        assert_eq!(west.slack(&point), Q::from_i64(0));
    }

    #[test]
    fn axis_line_and_parallel_line() {
        let p = demo_problem::<Q>();
        let ones = vec![Q::from_i64(1); 3];
        let axis = merging_line(&fv(&[0, 0, 0]), &ones, &[true, false, false]).unwrap();
        assert_eq!(
            line_halfspace_hit(&axis, &p.demand_halfspaces()[0]),
            Some(Q::from_i64(100))
        );
        // Moving along q_1 never changes q_2.
        assert_eq!(line_halfspace_hit(&axis, &p.demand_halfspaces()[1]), None);
        // Moving away from a plane.
        let back = ParametricLine::new(
            fv(&[0, 0, 0]),
            vec![Q::from_i64(-1), Q::from_i64(0), Q::from_i64(0)],
        )
        .unwrap();
        assert_eq!(line_halfspace_hit(&back, &p.demand_halfspaces()[0]), None);
    }

    #[test]
    fn demo_has_eight_vertices() {
        let poly = enumerate_vertices(&demo_problem::<Q>(), DEFAULT_DIMENSION_LIMIT).unwrap();
        let expected: Vec<FlowVector<Q>> = [
            [0, 0, 0],
            [0, 0, 600],
            [0, 200, 600],
            [0, 600, 0],
            [0, 600, 200],
            [100, 0, 0],
            [100, 0, 600],
            [100, 600, 0],
        ]
        .iter()
        .map(|v| fv(v))
        .collect();
        assert_eq!(poly.vertices, expected);
        assert_eq!(poly.max_total(), Some(Q::from_i64(800)));
        // Three coordinate planes, three demand planes and the west plane;
        // north and south never touch the box.
        let labels: Vec<&str> = poly.facets.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels.len(), 7, "{:?}", labels);
        assert!(labels.contains(&"supply:W"));
        let west = poly.facets.iter().find(|f| f.label == "supply:W").unwrap();
        assert_eq!(west.vertex_ids.len(), 4);
    }

    #[test]
    fn box_only_problem_has_box_corners() {
        let demo = demo_problem::<Q>();
        let p = NodeProblem::new(
            demo.incoming().to_vec(),
            demo.outgoing()
                .iter()
                .map(|l| crate::model::OutgoingLink {
                    label: l.label.clone(),
                    supply: Q::from_i64(1_000_000),
                })
                .collect(),
            demo.turning().to_vec(),
        )
        .unwrap();
        let poly = enumerate_vertices(&p, DEFAULT_DIMENSION_LIMIT).unwrap();
        assert_eq!(poly.vertices.len(), 8);
        assert_eq!(poly.facets.len(), 6);
    }

    #[test]
    fn dimension_limit() {
        let p = demo_problem::<Q>();
        assert_eq!(
            enumerate_vertices(&p, 2),
            Err(GeometryError::DimensionLimit {
                dimension: 3,
                limit: 2
            })
        );
    }

    #[test]
    fn combinations_are_complete() {
        let all: Vec<_> = Combinations::new(5, 3).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert_eq!(Combinations::new(2, 3).count(), 0);
        assert_eq!(Combinations::new(3, 0).count(), 1);
    }

    #[test]
    fn float_vertices_match_exact() {
        let exact = enumerate_vertices(&demo_problem::<Q>(), 6).unwrap();
        let approx = enumerate_vertices(&demo_problem::<f64>(), 6).unwrap();
        assert_eq!(exact.vertices.len(), approx.vertices.len());
        for (e, a) in exact.vertices.iter().zip(&approx.vertices) {
            for (x, y) in e.iter().zip(a.iter()) {
                assert!((x.to_f64() - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scene_rejects_infeasible_points() {
        let p = demo_problem::<Q>();
        let poly = enumerate_vertices(&p, 6).unwrap();
        let bad = Marker {
            name: "bad".into(),
            kind: "test".into(),
            point: fv(&[0, 600, 600]),
        };
        assert_eq!(
            Scene::new(p.clone(), poly.clone(), vec![bad], vec![], vec![]),
            Err(GeometryError::InfeasiblePoint("bad".into()))
        );
        assert!(Scene::new(p, poly, vec![], vec![], vec![]).is_ok());
    }
}
