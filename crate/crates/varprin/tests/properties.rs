//! Property tests for the distance laws, the sequential vocabulary, and
//! the engine trace invariants.

use proptest::prelude::*;

use varprin::applications::{brute_equilibria, Bifunction};
use varprin::distance::{pair_index, product_distance};
use varprin::engine::{
    borwein_preiss, ekeland, trace_to_family, verify_bp, weak_borwein_preiss, weak_ekeland,
    PerturbationSchedule, Picker, ScheduleTail, Trace,
};
use varprin::sequential::{cantor_intersect, cauchy_modulus, converges_to, sublevel_set};
use varprin::{
    axiom_report, right_ball, Distance, DistanceSpec, ExtendedObjective, PointSpace, ScanMode,
    SequenceTrace, Side, TailRule, Verdict,
};

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn arb_table(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(0.01f64..10.0, n), n).prop_map(
        move |mut m| {
            for i in 0..n {
                m[i][i] = 0.0;
            }
            m
        },
    )
}

fn arb_space_and_table(max_n: usize) -> impl Strategy<Value = (PointSpace, Distance)> {
    (2..=max_n).prop_flat_map(|n| {
        arb_table(n).prop_map(move |m| {
            let space = PointSpace::new(ids(n)).unwrap();
            let d = Distance::build(DistanceSpec::Table { matrix: m }, &space).unwrap();
            (space, d)
        })
    })
}

fn arb_coords(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, dim), n)
}

proptest! {
    #[test]
    fn distance_nonneg_and_identity((_, d) in arb_space_and_table(10)) {
        let n = d.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert!(d.eval(i, j) >= 0.0);
                prop_assert_eq!(d.eval(i, j) == 0.0, i == j);
            }
        }
    }

    #[test]
    fn symmetrize_equal_weights_is_bitwise_symmetric(
        (_, d) in arb_space_and_table(10),
        w in 0.01f64..10.0,
    ) {
        let s = d.symmetrize(w, w).unwrap();
        for i in 0..d.len() {
            for j in 0..d.len() {
                prop_assert_eq!(s.eval(i, j).to_bits(), s.eval(j, i).to_bits());
            }
        }
    }

    #[test]
    fn product_of_symmetric_base_is_symmetric(coords in arb_coords(5, 3)) {
        let space = PointSpace::with_coords(ids(5), coords).unwrap();
        prop_assume!(Distance::build(DistanceSpec::Euclidean {}, &space).is_ok());
        let d = Distance::build(DistanceSpec::Euclidean {}, &space).unwrap();
        let (_, rho) = product_distance(&d, &space).unwrap();
        for p in 0..25 {
            for q in 0..25 {
                prop_assert_eq!(rho.eval(p, q).to_bits(), rho.eval(q, p).to_bits());
            }
        }
    }

    #[test]
    fn lp_frac_is_permutation_equivariant_and_translation_invariant(
        coords in arb_coords(4, 3),
        shift in proptest::collection::vec(-50.0f64..50.0, 3),
        p in 0.2f64..0.9,
    ) {
        let space = PointSpace::with_coords(ids(4), coords.clone()).unwrap();
        prop_assume!(Distance::build(DistanceSpec::LpFrac { p }, &space).is_ok());
        let d = Distance::build(DistanceSpec::LpFrac { p }, &space).unwrap();

        // Reverse every coordinate vector (a fixed permutation).
        let permuted: Vec<Vec<f64>> = coords
            .iter()
            .map(|v| v.iter().rev().copied().collect())
            .collect();
        let pspace = PointSpace::with_coords(ids(4), permuted).unwrap();
        let pd = Distance::build(DistanceSpec::LpFrac { p }, &pspace).unwrap();

        // Translate every vector by the same shift.
        let translated: Vec<Vec<f64>> = coords
            .iter()
            .map(|v| v.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect();
        let tspace = PointSpace::with_coords(ids(4), translated).unwrap();
        let td = Distance::build(DistanceSpec::LpFrac { p }, &tspace).unwrap();

        for i in 0..4 {
            for j in 0..4 {
                // Permutation reassociates the sum; translation perturbs
                // the coordinate differences by cancellation. Both stay
                // within a small relative tolerance of the original.
                let a = d.eval(i, j);
                let perm = pd.eval(i, j);
                prop_assert!((a - perm).abs() <= 1e-9 * (1.0 + a.abs()));
                let trans = td.eval(i, j);
                prop_assert!((a - trans).abs() <= 1e-6 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn euclidean_never_violates_the_triangle_inequality(coords in arb_coords(10, 2)) {
        let space = PointSpace::with_coords(ids(10), coords).unwrap();
        prop_assume!(Distance::build(DistanceSpec::Euclidean {}, &space).is_ok());
        let d = Distance::build(DistanceSpec::Euclidean {}, &space).unwrap();
        // 10 points: exactly 1000 ordered triples per full scan.
        let rep = axiom_report(&d, &space, 1e-9, ScanMode::Full).unwrap();
        prop_assert!(rep.identity_ok);
        prop_assert!(rep.triangle_witnesses.is_empty());
    }

    #[test]
    fn right_ball_is_exactly_the_membership_predicate(
        (space, d) in arb_space_and_table(10),
        x_raw in 0usize..10,
        r in 0.001f64..20.0,
    ) {
        let x = x_raw % space.len();
        let ball = right_ball(&space, &d, x, r).unwrap();
        prop_assert!(ball.contains(x));
        for y in 0..space.len() {
            prop_assert_eq!(ball.contains(y), d.eval(y, x) < r);
        }
    }

    #[test]
    fn sublevel_sets_are_monotone(
        values in proptest::collection::vec(0.0f64..100.0, 2..10),
        lo in 0.0f64..100.0,
        hi_gap in 0.0f64..50.0,
    ) {
        let space = PointSpace::new(ids(values.len())).unwrap();
        let f = ExtendedObjective::new(values).unwrap();
        let s_lo = sublevel_set(&space, &f, lo);
        let s_hi = sublevel_set(&space, &f, lo + hi_gap);
        prop_assert!(s_lo.is_subset_of(&s_hi));
    }

    #[test]
    fn eventually_constant_sequences_are_cauchy_with_unique_limit(
        (space, d) in arb_space_and_table(8),
        prefix_raw in proptest::collection::vec(0usize..8, 1..6),
        tail_len in 1usize..4,
    ) {
        let n = space.len();
        let mut terms: Vec<usize> = prefix_raw.iter().map(|&t| t % n).collect();
        let c = *terms.last().unwrap();
        let from = terms.len() - 1;
        for _ in 0..tail_len {
            terms.push(c);
        }
        let seq = SequenceTrace::new(&space, terms, TailRule::EventuallyConstant(from)).unwrap();
        // Right-Cauchy: the modulus is exactly zero from the tail index on.
        let modulus = cauchy_modulus(&d, &seq, Side::Right);
        prop_assert!(modulus[from..].iter().all(|&m| m == 0.0));
        // Right-convergent to exactly one point: the tail constant.
        let limits: Vec<usize> = (0..n)
            .filter(|&x| converges_to(&d, &seq, x, Side::Right, 1e-9) == Verdict::Yes)
            .collect();
        prop_assert_eq!(limits, vec![c]);
    }

    /// A pair sequence with eventually-constant components right-converges
    /// under the swapped-order pair distance exactly when each component
    /// left-converges under the base distance.
    #[test]
    fn pair_convergence_swaps_to_left_convergence(
        (space, d) in arb_space_and_table(5),
        xs_raw in proptest::collection::vec(0usize..5, 1..4),
        ys_raw in proptest::collection::vec(0usize..5, 1..4),
        x_target_raw in 0usize..5,
        y_target_raw in 0usize..5,
    ) {
        let n = space.len();
        let (x_target, y_target) = (x_target_raw % n, y_target_raw % n);
        let mut xs: Vec<usize> = xs_raw.iter().map(|&t| t % n).collect();
        let mut ys: Vec<usize> = ys_raw.iter().map(|&t| t % n).collect();
        // Align lengths, then declare the joint tail constant.
        while xs.len() < ys.len() { xs.push(*xs.last().unwrap()); }
        while ys.len() < xs.len() { ys.push(*ys.last().unwrap()); }
        xs.push(*xs.last().unwrap());
        ys.push(*ys.last().unwrap());
        let from = xs.len() - 2;
        let xseq = SequenceTrace::new(&space, xs.clone(), TailRule::EventuallyConstant(from));
        let yseq = SequenceTrace::new(&space, ys.clone(), TailRule::EventuallyConstant(from));
        prop_assume!(xseq.is_ok() && yseq.is_ok());
        let (xseq, yseq) = (xseq.unwrap(), yseq.unwrap());

        let (pair_space, rho) = product_distance(&d, &space).unwrap();
        let pair_terms: Vec<usize> = xs.iter().zip(&ys).map(|(&a, &b)| pair_index(n, a, b)).collect();
        let pair_seq = SequenceTrace::new(&pair_space, pair_terms, TailRule::EventuallyConstant(from)).unwrap();

        let pair_verdict = converges_to(
            &rho, &pair_seq, pair_index(n, x_target, y_target), Side::Right, 1e-9);
        let left_x = converges_to(&d, &xseq, x_target, Side::Left, 1e-9);
        let left_y = converges_to(&d, &yseq, y_target, Side::Left, 1e-9);
        prop_assert_eq!(
            pair_verdict == Verdict::Yes,
            left_x == Verdict::Yes && left_y == Verdict::Yes
        );
    }
}

fn running_perturbed_values(
    trace: &Trace,
    d: &Distance,
    f: &ExtendedObjective,
    deltas: &dyn Fn(usize) -> f64,
) -> Vec<f64> {
    let zs = trace.centers();
    (0..zs.len())
        .map(|j| {
            let mut v = f.value(zs[j]);
            for k in 0..j {
                v += deltas(k) * d.eval(zs[j], zs[k]);
            }
            v
        })
        .collect()
}

fn assert_trace_laws(trace: &Trace, d: &Distance, radii_tol: f64) {
    for (i, it) in trace.iterates.iter().enumerate() {
        assert!(it.set.contains(it.z), "z_{i} outside S_{i}");
        if i + 1 < trace.iterates.len() {
            assert!(
                trace.iterates[i + 1].set.is_subset_of(&it.set),
                "S_{} not nested in S_{i}",
                i + 1
            );
        }
        for &z in it.set.indices() {
            assert!(
                d.eval(z, it.z) <= it.radius + radii_tol,
                "radius law broken at S_{i}"
            );
        }
    }
    assert_eq!(trace.last_set().len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bp_runs_satisfy_trace_laws_and_certificates(
        (space, d) in arb_space_and_table(9),
        values_raw in proptest::collection::vec(0.0f64..100.0, 9),
        z0_raw in 0usize..9,
        eps_extra in 0.1f64..5.0,
        delta0 in 0.1f64..2.0,
        quasi_seed in 0u64..1_000,
    ) {
        let n = space.len();
        let values: Vec<f64> = values_raw[..n].to_vec();
        let f = ExtendedObjective::new(values).unwrap();
        let z0 = z0_raw % n;
        let sched = PerturbationSchedule {
            epsilon: f.value(z0) - f.min_finite() + eps_extra,
            delta0,
            tail: ScheduleTail::Geometric { gamma: 0.5 },
        };
        for picker in [Picker::Exact, Picker::Quasi { seed: quasi_seed }] {
            let (zbar, trace) =
                borwein_preiss(&space, &d, &f, &sched, z0, picker, 10 * n).unwrap();
            assert_trace_laws(&trace, &d, 1e-9);
            if picker == Picker::Exact {
                prop_assert!(trace.iterates.len() <= n + 1);
            }
            // Monotone descent of the running perturbed values.
            let vals = running_perturbed_values(&trace, &d, &f, &|k| sched.delta(k).unwrap());
            for w in vals.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
            let cert = verify_bp(&space, &d, &f, &sched, z0, zbar, &trace, 1e-9).unwrap();
            prop_assert!(cert.all_satisfied(), "{:?}", cert);
            // The harvested family funnels to the same point.
            let fam = trace_to_family(&trace, &d, None);
            let (limit, singleton) = cantor_intersect(&space, &d, &fam, None).unwrap();
            prop_assert_eq!((limit, singleton), (zbar, true));
        }
    }

    #[test]
    fn ekeland_runs_satisfy_trace_laws_and_start_claims(
        (space, d) in arb_space_and_table(9),
        values_raw in proptest::collection::vec(0.0f64..100.0, 9),
        z0_raw in 0usize..9,
        eps_extra in 0.1f64..5.0,
    ) {
        let n = space.len();
        let values: Vec<f64> = values_raw[..n].to_vec();
        let f = ExtendedObjective::new(values).unwrap();
        let z0 = z0_raw % n;
        let eps = f.value(z0) - f.min_finite() + eps_extra;
        let (zbar, trace) = ekeland(&space, &d, &f, eps, z0, Picker::Exact, 10 * n).unwrap();
        assert_trace_laws(&trace, &d, 1e-9);
        prop_assert!(trace.iterates.len() <= n + 1);
        // Conclusions (a) and (b) hold for every nested run; (c) is the
        // one the memoryless sets cannot promise on asymmetric tables.
        let cert = varprin::verify_ekeland(&space, &d, &f, eps, z0, zbar, 1e-9).unwrap();
        prop_assert!(cert.claim('a').unwrap().satisfied);
        prop_assert!(cert.claim('b').unwrap().satisfied);
        let fam = trace_to_family(&trace, &d, None);
        let (limit, singleton) = cantor_intersect(&space, &d, &fam, None).unwrap();
        prop_assert_eq!((limit, singleton), (zbar, true));
    }

    #[test]
    fn weak_forms_match_brute_force_minimizers(
        (space, d) in arb_space_and_table(8),
        values_raw in proptest::collection::vec(0.0f64..100.0, 8),
        delta0 in 0.1f64..2.0,
        eps in 0.1f64..10.0,
    ) {
        let n = space.len();
        let f = ExtendedObjective::new(values_raw[..n].to_vec()).unwrap();

        let (zbar, trace) = weak_borwein_preiss(&space, &d, &f, delta0, 0.5).unwrap();
        let zs = trace.centers();
        let sched = PerturbationSchedule {
            epsilon: 1.0,
            delta0,
            tail: ScheduleTail::Geometric { gamma: 0.5 },
        };
        let phi = |w: usize| {
            let mut v = f.value(w);
            for (k, &zk) in zs.iter().enumerate() {
                v += sched.delta(k).unwrap() * d.eval(w, zk);
            }
            v + sched.tail_sum(zs.len()) * d.eval(w, zbar)
        };
        for z in 0..n {
            if z != zbar {
                prop_assert!(phi(z) > phi(zbar), "perturbed minimum not unique");
            }
        }

        let (ebar, _) = weak_ekeland(&space, &d, &f, eps).unwrap();
        for z in 0..n {
            prop_assert!(f.value(z) + eps * d.eval(z, ebar) >= f.value(ebar));
        }
    }

    #[test]
    fn potential_difference_bifunctions_equilibrate_on_the_argmin_set(
        (space, d) in arb_space_and_table(8),
        values_raw in proptest::collection::vec(0.0f64..100.0, 8),
    ) {
        let n = space.len();
        let phi = ExtendedObjective::new(values_raw[..n].to_vec()).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|x| (0..n).map(|y| phi.value(y) - phi.value(x)).collect())
            .collect();
        let f = Bifunction::new(&space, &rows).unwrap();
        let ep = brute_equilibria(&space, &f);
        let m = phi.min_finite();
        for x in 0..n {
            prop_assert_eq!(ep.contains(x), phi.value(x) == m);
        }
        let _ = d;
    }
}
