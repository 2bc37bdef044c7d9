//! Property tests for the exact set machinery: additivity, density-point
//! laws on interval unions, refinement consistency, and the child-sum law.

use measurelab::exact::{q, qi, Q};
use measurelab::hierarchy::DyadicHierarchy;
use measurelab::interval::Interval;
use measurelab::sample;
use num_traits::Zero;
use proptest::prelude::*;

fn ambient() -> Interval {
    Interval::closed(qi(-2), qi(2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Additivity over disjoint unions, exact.
    #[test]
    fn measure_additive_on_disjoint_unions(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let amb = ambient();
        let e = sample::interval_union(&mut r, &amb, 4);
        let f = sample::interval_union(&mut r, &amb, 4);
        let f_only = f.difference(&e).unwrap();
        let union = e.union(&f_only).unwrap();
        prop_assert_eq!(union.measure(), e.measure() + f_only.measure());
    }

    /// D(E ∩ F) = D(E) ∩ D(F), exactly.
    #[test]
    fn density_points_preserve_intersections(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let amb = ambient();
        let e = sample::interval_union(&mut r, &amb, 4);
        let f = sample::interval_union(&mut r, &amb, 4);
        let lhs = e.intersection(&f).unwrap().density_points();
        let rhs = e.density_points().intersection(&f.density_points()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// μ(E Δ D(E)) = 0 and D(E) ⊆ E up to a null set; monotone in E.
    #[test]
    fn density_points_are_ae_representatives(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let amb = ambient();
        let e = sample::interval_union(&mut r, &amb, 4);
        let d = e.density_points();
        prop_assert!(e.sym_diff(&d).unwrap().measure().is_zero());
        prop_assert!(d.difference(&e).unwrap().measure().is_zero());
        let f = e.union(&sample::interval_union(&mut r, &amb, 3)).unwrap();
        let df = f.density_points();
        prop_assert!(d.difference(&df).unwrap().is_empty());
    }

    /// A null perturbation leaves the density points unchanged.
    #[test]
    fn density_points_ignore_null_perturbations(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let amb = ambient();
        let e = sample::interval_union(&mut r, &amb, 4);
        let f = sample::null_perturbation(&mut r, &e);
        prop_assert_eq!(e.density_points(), f.density_points());
    }

    /// Normalizing twice equals normalizing once.
    #[test]
    fn normalization_idempotent(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let amb = ambient();
        let e = sample::interval_union(&mut r, &amb, 5);
        let again = measurelab::interval::IntervalUnion::new(
            amb,
            e.parts().to_vec(),
        ).unwrap();
        prop_assert_eq!(e, again);
    }

    /// A refined cell set has the same mass under any base measure, and each
    /// non-leaf cell's mass is the sum of its children's.
    #[test]
    fn refinement_and_child_sum(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let h = DyadicHierarchy::new(1, 5).unwrap();
        let mu = sample::step_density(&mut r, h, 3, 30);
        let e = sample::cell_set(&mut r, h, 3);
        let refined = e.refine(5).unwrap();
        prop_assert_eq!(mu.cellset_mass(&e).unwrap(), mu.cellset_mass(&refined).unwrap());
        for depth in 0..5u32 {
            for i in 0..h.cells_at(depth) {
                let cell = h.cell(depth, i);
                let children: Q = h
                    .children(cell)
                    .into_iter()
                    .map(|c| mu.cell_mass(c).unwrap())
                    .sum();
                prop_assert_eq!(mu.cell_mass(cell).unwrap(), children);
            }
        }
    }

    /// Bochner integral: linear in the map and additive in the set; the
    /// L1 triangle bound holds exactly.
    #[test]
    fn bochner_linearity_and_triangle(seed in any::<u64>()) {
        let mut r = sample::rng(seed);
        let h = DyadicHierarchy::new(1, 4).unwrap();
        let mu = sample::step_density(&mut r, h, 2, 20);
        let v = sample::simple_map(&mut r, h, 3, 2);
        let w = sample::simple_map(&mut r, h, 3, 2);
        let e = sample::cell_set(&mut r, h, 2);
        let f = sample::cell_set(&mut r, h, 2).difference(&e).unwrap();
        use measurelab::bochner::bochner_integral_simple as integ;
        // additivity in the set
        let union = e.union(&f).unwrap();
        prop_assert_eq!(
            integ(&v, &union, &mu).unwrap(),
            measurelab::exact::vadd(&integ(&v, &e, &mu).unwrap(), &integ(&v, &f, &mu).unwrap())
        );
        // linearity in the map (pointwise sum at a common depth)
        let vs = v.dense_values(3).unwrap();
        let ws = w.dense_values(3).unwrap();
        let sums: Vec<_> = vs.iter().zip(&ws).map(|(a, b)| measurelab::exact::vadd(a, b)).collect();
        let vw = measurelab::bochner::SimpleMap::from_cell_values(h, 3, &sums).unwrap();
        prop_assert_eq!(
            integ(&vw, &e, &mu).unwrap(),
            measurelab::exact::vadd(&integ(&v, &e, &mu).unwrap(), &integ(&w, &e, &mu).unwrap())
        );
        // triangle bound with the L1 norm, exact
        let total = integ(&v, &e, &mu).unwrap();
        let lhs: Q = total.iter().map(|x| if x < &Q::zero() { -x.clone() } else { x.clone() }).sum();
        let mut rhs = Q::zero();
        for (set, value) in v.pieces() {
            let mass = mu.cellset_mass(&set.intersection(&e).unwrap()).unwrap();
            let n1: Q = value.iter().map(|x| if x < &Q::zero() { -x.clone() } else { x.clone() }).sum();
            rhs += mass * n1;
        }
        prop_assert!(lhs <= rhs);
    }
}

/// The interval counterexample is stable under ambient choice as long as the
/// pieces are interior.
#[test]
fn union_counterexample_bit_exact() {
    let amb = ambient();
    let left = measurelab::interval::IntervalUnion::new(
        amb.clone(),
        vec![Interval::closed(qi(-1), qi(0)).unwrap()],
    )
    .unwrap();
    let right = measurelab::interval::IntervalUnion::new(
        amb,
        vec![Interval::closed(qi(0), qi(1)).unwrap()],
    )
    .unwrap();
    let zero = qi(0);
    assert!(!left.is_density_point(&zero));
    assert!(!right.is_density_point(&zero));
    assert!(left.union(&right).unwrap().is_density_point(&zero));
    assert!(left
        .union(&right)
        .unwrap()
        .density_points()
        .contains(&q(1, 2)));
}

/// Variation minimality, both directions: a candidate measure dominates
/// ‖Ω(·)‖ on every subset exactly when it dominates the variation ‖Ω‖, so
/// the variation is the least dominating measure.
#[test]
fn variation_is_least_dominating_measure() {
    use measurelab::atomic::PointSet;
    use measurelab::exact::Norm;
    let mut r = sample::rng(99);
    let mut nontrivial = 0;
    for _ in 0..200 {
        let space = sample::atomic_space(&mut r, 5, 0);
        let om = sample::atom_list(&mut r, &space, 2, 4);
        let var = om.variation(Norm::L1).unwrap();
        // competitor: randomly perturbed around the variation weights
        let candidate: Vec<Q> = (0..space.len())
            .map(|p| {
                let e = PointSet::from_points(space.clone(), &[p]).unwrap();
                let base = measurelab::exact::sum_sqrt_exact(&var.terms_points(&e).unwrap())
                    .expect("l1 terms are perfect squares");
                base + sample::rational_in(&mut r, -1, 2, 4)
            })
            .map(|x| if x < Q::zero() { Q::zero() } else { x })
            .collect();
        let dominates_norm = (0u64..(1 << space.len())).all(|mask| {
            let e = PointSet::from_mask(space.clone(), mask);
            let nval: Q = om
                .evaluate_points(&e)
                .unwrap()
                .iter()
                .map(|x| {
                    if x < &Q::zero() {
                        -x.clone()
                    } else {
                        x.clone()
                    }
                })
                .sum();
            let cval: Q = e.iter().map(|p| candidate[p].clone()).sum();
            nval <= cval
        });
        let dominates_variation = (0u64..(1 << space.len())).all(|mask| {
            let e = PointSet::from_mask(space.clone(), mask);
            let vval = measurelab::exact::sum_sqrt_exact(&var.terms_points(&e).unwrap())
                .expect("l1 terms are perfect squares");
            let cval: Q = e.iter().map(|p| candidate[p].clone()).sum();
            vval <= cval
        });
        assert_eq!(dominates_norm, dominates_variation);
        if dominates_norm {
            nontrivial += 1;
        }
    }
    assert!(
        nontrivial > 0,
        "battery must exercise dominating candidates"
    );
}
