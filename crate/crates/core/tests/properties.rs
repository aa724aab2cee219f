use nodeflow_core::geometry::{line_halfspace_hit, ParametricLine, DEFAULT_DIMENSION_LIMIT};
use nodeflow_core::pareto::DEFAULT_GRID_BUDGET;
use nodeflow_core::*;
use proptest::prelude::*;

type Q = Rational;

fn rational(numer: i64, denom: i64) -> Q {
    Q::ratio(numer, denom)
}

/// Random node with 1–5 incoming and 1–5 outgoing links and rational data.
/// Some demands are zero; turning rows are either row-stochastic or free
/// quarters in [0, 1].
fn problem_strategy() -> impl Strategy<Value = NodeProblem<Q>> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((0i64..=1000, 1i64..=4, 0u8..10), n),
            prop::collection::vec((0i64..=1500, 1i64..=3), m),
            prop::collection::vec(prop::collection::vec(0i64..=4, m), n),
            any::<bool>(),
        )
            .prop_map(move |(demands, supplies, weights, stochastic)| {
                let incoming = demands
                    .iter()
                    .enumerate()
                    .map(|(i, &(num, den, zero))| IncomingLink {
                        label: format!("i{}", i),
                        demand: if zero == 0 {
                            rational(0, 1)
                        } else {
                            rational(num, den)
                        },
                    })
                    .collect();
                let outgoing = supplies
                    .iter()
                    .enumerate()
                    .map(|(o, &(num, den))| OutgoingLink {
                        label: format!("o{}", o),
                        supply: rational(num, den),
                    })
                    .collect();
                let turning = weights
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let mut row = row.clone();
                        if row.iter().all(|&w| w == 0) {
                            row[i % m] = 2;
                        }
                        let total: i64 = row.iter().sum();
                        row.iter()
                            .map(|&w| {
                                if stochastic {
                                    rational(w, total)
                                } else {
                                    rational(w, 4)
                                }
                            })
                            .collect()
                    })
                    .collect();
                NodeProblem::new(incoming, outgoing, turning).unwrap()
            })
    })
}

fn weights_for(n: usize) -> impl Strategy<Value = MergingWeights<Q>> {
    prop::collection::vec((1i64..=20, 1i64..=5), n)
        .prop_map(|w| MergingWeights(w.into_iter().map(|(a, b)| rational(a, b)).collect()))
}

/// A problem with a random weight vector and a random link order.
fn instance() -> impl Strategy<Value = (NodeProblem<Q>, MergingWeights<Q>, Permutation)> {
    problem_strategy().prop_flat_map(|p| {
        let n = p.num_incoming();
        (
            Just(p),
            weights_for(n),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(|(p, w, order)| (p, w, Permutation::new(order).unwrap()))
    })
}

fn all_results(
    p: &NodeProblem<Q>,
    w: &MergingWeights<Q>,
    order: &Permutation,
) -> Vec<(&'static str, SolverResult<Q>)> {
    vec![
        ("inm", solve_inm(p, w).unwrap()),
        ("greedy", solve_greedy(p, order).unwrap()),
        ("flowmax", solve_flowmax(p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solver_outputs_are_feasible_holding_free_and_pareto((p, w, order) in instance()) {
        let exact = Tolerance::exact();
        prop_assert!(p.validate().iter().all(|d| !d.is_error()));
        for (name, r) in all_results(&p, &w, &order) {
            prop_assert!(p.is_feasible(&r.flows, &exact), "{} infeasible: {:?}", name, r.flows);
            prop_assert!(is_hfs(&p, &r.flows, &exact).unwrap(), "{} not holding-free", name);
            let report = hfs_residual(&p, &r.flows).unwrap();
            prop_assert!(num_traits::Zero::is_zero(&report.residual));
            prop_assert!(report.holding_free);
            let probe = is_pareto_optimal(&p, &r.flows).unwrap();
            prop_assert!(probe.pareto_optimal, "{} dominated by {:?}", name, probe.witness);
            prop_assert!(probe.t_star <= rational(0, 1));
        }
    }

    #[test]
    fn traces_are_monotone_and_end_at_the_result((p, w, order) in instance()) {
        for (_, r) in all_results(&p, &w, &order) {
            prop_assert_eq!(&r.trace.last().unwrap().waypoint, &r.flows);
            prop_assert!(r.trace[0].waypoint.iter().all(num_traits::Zero::is_zero));
            for pair in r.trace.windows(2) {
                prop_assert!(pair[0].waypoint.iter().zip(pair[1].waypoint.iter()).all(|(a, b)| a <= b));
            }
            prop_assert_eq!(r.total.clone(), total_flow(&r.flows));
        }
    }

    #[test]
    fn flowmax_dominates_other_totals_and_matches_vertices((p, w, order) in instance()) {
        let best = solve_flowmax(&p).unwrap().total;
        prop_assert!(best >= solve_inm(&p, &w).unwrap().total);
        prop_assert!(best >= solve_greedy(&p, &order).unwrap().total);
        let poly = enumerate_vertices(&p, DEFAULT_DIMENSION_LIMIT).unwrap();
        prop_assert_eq!(Some(best.clone()), poly.max_total());
        let optima = enumerate_flowmax_optima(&p).unwrap();
        prop_assert!(!optima.is_empty());
        prop_assert!(optima.contains(&solve_flowmax(&p).unwrap().flows));
    }

    #[test]
    fn inm_is_scale_invariant_and_terminates((p, w, _) in instance(), c in (1i64..=50, 1i64..=50)) {
        let base = solve_inm(&p, &w).unwrap();
        let scaled = solve_inm(&p, &w.scaled(&rational(c.0, c.1))).unwrap();
        prop_assert_eq!(&base.flows, &scaled.flows);
        prop_assert!(base.iterations <= p.num_incoming() + p.num_outgoing());
    }

    #[test]
    fn greedy_links_are_demand_or_supply_bound((p, _, order) in instance()) {
        let r = solve_greedy(&p, &order).unwrap();
        let slacks = p.slacks(&r.flows).unwrap();
        for i in 0..p.num_incoming() {
            let demand_bound = num_traits::Zero::is_zero(&slacks.incoming[i]);
            let supply_bound = p.movements_of(i).any(|o| num_traits::Zero::is_zero(&slacks.outgoing[o]));
            prop_assert!(demand_bound || supply_bound);
        }
    }

    #[test]
    fn vertices_are_feasible_and_bind_enough_constraints(p in problem_strategy()) {
        let exact = Tolerance::exact();
        let poly = enumerate_vertices(&p, DEFAULT_DIMENSION_LIMIT).unwrap();
        let constraints: Vec<_> = p.halfspaces().into_iter().filter(|h| h.active).collect();
        for (k, v) in poly.vertices.iter().enumerate() {
            prop_assert!(p.is_feasible(v, &exact));
            let binding = constraints.iter().filter(|h| h.is_binding(v, &exact)).count();
            prop_assert!(binding >= p.num_incoming());
            prop_assert!(poly.vertices[k + 1..].iter().all(|u| u != v));
        }
    }

    #[test]
    fn outgoing_flow_is_linear(
        p in problem_strategy(),
        seed in prop::collection::vec((0i64..500, 0i64..500), 5),
        a in -5i64..5,
        b in -5i64..5,
    ) {
        let n = p.num_incoming();
        let q1: Vec<Q> = seed.iter().take(n).map(|s| rational(s.0, 3)).collect();
        let q2: Vec<Q> = seed.iter().take(n).map(|s| rational(s.1, 7)).collect();
        let (a, b) = (rational(a, 1), rational(b, 1));
        let combined: Vec<Q> = q1.iter().zip(&q2).map(|(x, y)| a.clone() * x + b.clone() * y).collect();
        let lhs = p.outgoing_flow(&combined).unwrap();
        let rhs: Vec<Q> = p.outgoing_flow(&q1).unwrap().iter().zip(p.outgoing_flow(&q2).unwrap())
            .map(|(x, y)| a.clone() * x + b.clone() * y)
            .collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn halfspaces_agree_with_feasibility(
        p in problem_strategy(),
        points in prop::collection::vec(prop::collection::vec(-50i64..1100, 5), 40),
    ) {
        let exact = Tolerance::exact();
        let all = p.halfspaces();
        for raw in points {
            let q: Vec<Q> = raw.iter().take(p.num_incoming()).map(|&v| rational(v, 1)).collect();
            let pointwise = all.iter().all(|h| h.contains(&q, &exact));
            prop_assert_eq!(pointwise, p.is_feasible(&q, &exact));
            if pointwise {
                let s = p.slacks(&q).unwrap();
                prop_assert!(s.incoming.iter().chain(&s.outgoing).all(|x| *x >= rational(0, 1)));
            }
        }
    }

    #[test]
    fn hfs_matches_zero_residual_and_non_hfs_points_can_grow(
        (p, w, order) in instance(),
        shrink in prop::collection::vec((0i64..=4, 1i64..=4), 5),
    ) {
        let exact = Tolerance::exact();
        for (_, r) in all_results(&p, &w, &order) {
            // Scaled-down solver points are feasible and usually not holding-free.
            let q: Vec<Q> = r.flows.iter().zip(&shrink)
                .map(|(x, (a, b))| x.clone() * rational(*a.min(b), *b))
                .collect();
            prop_assert!(p.is_feasible(&q, &exact));
            let hfs = is_hfs(&p, &q, &exact).unwrap();
            let report = hfs_residual(&p, &q).unwrap();
            prop_assert_eq!(hfs, num_traits::Zero::is_zero(&report.residual));
            prop_assert_eq!(hfs, report.holding_free);
            if !hfs {
                let slacks = p.slacks(&q).unwrap();
                let witness = (0..p.num_incoming()).find(|&i| {
                    report.per_link_terms[i].term > rational(0, 1)
                });
                prop_assert!(witness.is_some());
                let i = witness.unwrap();
                let room = p.movements_of(i)
                    .map(|o| slacks.outgoing[o].clone() / p.ratio(i, o).clone())
                    .fold(slacks.incoming[i].clone(), |acc, x| if x < acc { x } else { acc });
                prop_assert!(room > rational(0, 1));
                let mut grown = q.clone();
                grown[i] = grown[i].clone() + room / rational(2, 1);
                prop_assert!(p.is_feasible(&grown, &exact));
            }
        }
    }

    #[test]
    fn dominance_is_a_strict_partial_order(
        a in prop::collection::vec(-3i64..3, 3),
        b in prop::collection::vec(-3i64..3, 3),
        c in prop::collection::vec(-3i64..3, 3),
    ) {
        let to_q = |v: &Vec<i64>| v.iter().map(|&x| rational(x, 1)).collect::<Vec<Q>>();
        let (a, b, c) = (to_q(&a), to_q(&b), to_q(&c));
        prop_assert!(!dominates(&a, &a));
        if dominates(&a, &b) {
            prop_assert!(!dominates(&b, &a));
            if dominates(&b, &c) {
                prop_assert!(dominates(&a, &c));
            }
        }
    }

    #[test]
    fn probe_and_grid_oracle_agree(
        p in problem_strategy().prop_filter("small", |p| p.num_incoming() <= 3),
        fractions in prop::collection::vec((0i64..=8, 0i64..=8), 3),
    ) {
        // Candidate q on the 1/8 grid of the box, scaled into the polytope.
        let exact = Tolerance::exact();
        let mut q: Vec<Q> = p.incoming().iter().zip(&fractions)
            .map(|(l, (k, _))| l.demand.clone() * rational(*k, 8))
            .collect();
        if !p.is_feasible(&q, &exact) {
            q = q.iter().zip(&fractions).map(|(x, (_, k))| x.clone() * rational(*k, 16)).collect();
        }
        prop_assume!(p.is_feasible(&q, &exact));
        let probe = is_pareto_optimal(&p, &q).unwrap();
        let oracle = oracle_is_pareto_optimal(&p, &q, &GridStep::Divisions(8), DEFAULT_GRID_BUDGET).unwrap();
        if !oracle {
            prop_assert!(!probe.pareto_optimal);
        }
        if probe.pareto_optimal {
            prop_assert!(oracle);
        }
        // A uniform gain of at least one grid step on every axis is always
        // visible on the grid.
        let coarsest = p.demands().into_iter().map(|d| d / rational(8, 1))
            .fold(rational(0, 1), |acc, x| if x > acc { x } else { acc });
        if probe.t_star >= coarsest && probe.t_star > rational(0, 1) {
            prop_assert!(!oracle);
        }
        if let Some(w) = probe.witness {
            prop_assert!(dominates(&w, &q));
            prop_assert!(p.is_feasible(&w, &exact));
        }
    }

    #[test]
    fn line_hits_land_exactly_on_the_plane(
        p in problem_strategy(),
        dir in prop::collection::vec(0i64..5, 5),
    ) {
        let n = p.num_incoming();
        let direction: Vec<Q> = dir.iter().take(n).map(|&d| rational(d, 3)).collect();
        prop_assume!(direction.iter().any(|d| !num_traits::Zero::is_zero(d)));
        let line = ParametricLine::new(FlowVector::zeros(n), direction).unwrap();
        for h in p.halfspaces() {
            if let Some(t) = line_halfspace_hit(&line, &h) {
                prop_assert!(t >= rational(0, 1));
                prop_assert_eq!(h.evaluate(&line.at(&t)), h.bound.clone());
            }
        }
    }

    #[test]
    fn float_mode_tracks_exact_mode((p, w, order) in instance()) {
        let pf = p.map(|x| x.to_f64());
        let wf = MergingWeights(w.0.iter().map(|x| x.to_f64()).collect());
        let tol = pf.tolerance();
        let pairs = [
            (solve_inm(&p, &w).unwrap(), solve_inm(&pf, &wf).unwrap()),
            (solve_greedy(&p, &order).unwrap(), solve_greedy(&pf, &order).unwrap()),
        ];
        for (exact, approx) in pairs {
            for (x, y) in exact.flows.iter().zip(approx.flows.iter()) {
                prop_assert!((x.to_f64() - y).abs() <= 1e-6 * pf.scale(), "{} vs {}", x, y);
            }
            prop_assert!(is_hfs(&pf, &approx.flows, &tol).unwrap());
        }
        let fm = solve_flowmax(&pf).unwrap();
        let exact_best = solve_flowmax(&p).unwrap().total.to_f64();
        prop_assert!((fm.total - exact_best).abs() <= 1e-6 * pf.scale());
        prop_assert!(is_hfs(&pf, &fm.flows, &tol).unwrap());
    }
}
