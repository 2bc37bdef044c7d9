//! Disintegration of vector measures along a point map: per-fiber
//! unit-variation measures that reconstruct the source as a mixture over the
//! pushforward of its variation.
//!
//! With the L1 norm every quantity stays rational and all three defining
//! identities (normalization, fiber concentration, reconstruction) are exact.
//! Euclidean runs follow the crate's high-precision policy: the fiber masses
//! are approximated to `1e-60` per term and checks carry a `1e-30` margin.

use crate::atomic::{PointSet, Section};
use crate::error::{Error, Result};
use crate::exact::{
    self, sum_sqrt_approx, sum_sqrt_exact, vadd_assign, vscale, vzero, Norm, Vector, Q, SQRT_DIGITS,
};
use crate::vecmeasure::{comparison_margin, ModelMap, StepFunction, VectorMeasure};
use alloc::vec::Vec;
use num_traits::{One, Signed, Zero};

/// One fiber of a disintegration: the normalized restriction of the source
/// to `φ⁻¹({y})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiber {
    /// Target point index `y`.
    pub target: usize,
    /// `ν({y}) = ‖Ω‖(φ⁻¹({y}))`: exact when rational, else approximated.
    pub mass: Q,
    pub mass_exact: bool,
    /// The fiber measure `Ω_y`.
    pub measure: VectorMeasure,
}

/// A disintegration of `Ω` along `φ`, with one fiber per positive-mass
/// target point.
#[derive(Clone, Debug, PartialEq)]
pub struct Disintegration {
    pub source: VectorMeasure,
    pub map: ModelMap,
    pub norm: Norm,
    pub fibers: Vec<Fiber>,
}

impl Disintegration {
    pub fn fiber_for(&self, target: usize) -> Option<&Fiber> {
        self.fibers.iter().find(|f| f.target == target)
    }

    /// The mixing measure `ν = φ_#‖Ω‖` restricted to its positive fibers.
    pub fn mixing_masses(&self) -> Vec<(usize, Q)> {
        self.fibers
            .iter()
            .map(|f| (f.target, f.mass.clone()))
            .collect()
    }
}

fn fiber_mass(terms: &[Q]) -> (Q, bool) {
    match sum_sqrt_exact(terms) {
        Some(m) => (m, true),
        None => (sum_sqrt_approx(terms, SQRT_DIGITS), false),
    }
}

/// Builds the disintegration of `Ω` along a point map: for each fiber with
/// positive variation mass, `Ω_y = Ω|_{φ⁻¹(y)} / ‖Ω‖(φ⁻¹(y))`.
pub fn disintegrate(om: &VectorMeasure, map: &ModelMap, norm: Norm) -> Result<Disintegration> {
    let ModelMap::Points {
        from,
        to,
        assignment,
    } = map
    else {
        return Err(Error::Unsupported("disintegration runs along point maps"));
    };
    if om.atomic_space() != Some(from) {
        return Err(Error::ModelMismatch);
    }
    if om.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let var = om.variation(norm)?;
    let mut fibers = Vec::new();
    for y in 0..to.len() {
        let fiber_points: Vec<usize> = (0..from.len()).filter(|&p| assignment[p] == y).collect();
        let fiber_set = PointSet::from_points(from.clone(), &fiber_points)?;
        let terms = var.terms_points(&fiber_set)?;
        if terms.is_empty() {
            continue;
        }
        let (mass, mass_exact) = fiber_mass(&terms);
        if mass.is_zero() {
            continue;
        }
        let restricted = om.restrict_to_points(&fiber_set)?;
        let scale = Q::one() / &mass;
        let measure = scale_measure(&restricted, &scale)?;
        fibers.push(Fiber {
            target: y,
            mass,
            mass_exact,
            measure,
        });
    }
    Ok(Disintegration {
        source: om.clone(),
        map: map.clone(),
        norm,
        fibers,
    })
}

fn scale_measure(om: &VectorMeasure, scale: &Q) -> Result<VectorMeasure> {
    let space = om.atomic_space().ok_or(Error::ModelMismatch)?.clone();
    let values = alloc::vec![scale.clone(); space.len()];
    om.restrict(&StepFunction::Points(Section::scalar(space, values)?))
}

/// Outcome of checking the three defining identities of a disintegration.
#[derive(Clone, Debug)]
pub struct DisintegrationReport {
    /// `‖Ω_y‖(X) = 1` per fiber (witnesses: failing targets).
    pub normalization_failures: Vec<usize>,
    /// `‖Ω_y‖(X ∖ φ⁻¹({y})) = 0` per fiber.
    pub concentration_failures: Vec<usize>,
    /// `Ω(E) = ∫ Ω_y(E) dν(y)` over all atom generators.
    pub reconstruction_failures: Vec<usize>,
    /// `∫f dΩ = ∫∫f dΩ_y dν` over the supplied battery of step functions.
    pub function_failures: Vec<usize>,
    /// `Σ_y ν({y})·‖Ω_y‖(X) = ‖Ω‖(X)`.
    pub mass_identity_holds: bool,
}

impl DisintegrationReport {
    pub fn all_pass(&self) -> bool {
        self.normalization_failures.is_empty()
            && self.concentration_failures.is_empty()
            && self.reconstruction_failures.is_empty()
            && self.function_failures.is_empty()
            && self.mass_identity_holds
    }
}

/// Verifies a (candidate) disintegration: normalization, fiber
/// concentration, reconstruction over all atom generators, and the
/// reconstruction identity for each supplied step function.
pub fn verify_disintegration(
    d: &Disintegration,
    functions: &[StepFunction],
) -> Result<DisintegrationReport> {
    let ModelMap::Points {
        from, assignment, ..
    } = &d.map
    else {
        return Err(Error::Unsupported("disintegration runs along point maps"));
    };
    let margin = comparison_margin();
    let mut report = DisintegrationReport {
        normalization_failures: Vec::new(),
        concentration_failures: Vec::new(),
        reconstruction_failures: Vec::new(),
        function_failures: Vec::new(),
        mass_identity_holds: true,
    };

    let mut exact_throughout = true;
    for fiber in &d.fibers {
        let var = fiber.measure.variation(d.norm)?;
        // normalization: ‖Ω_y‖(X) = 1
        let total_terms = var.terms_points(&PointSet::full(from.clone()))?;
        let ok = match sum_sqrt_exact(&total_terms) {
            Some(t) => t == Q::one(),
            None => {
                exact_throughout = false;
                (sum_sqrt_approx(&total_terms, SQRT_DIGITS) - Q::one()).abs() <= margin
            }
        };
        if !ok {
            report.normalization_failures.push(fiber.target);
        }
        // concentration: no variation mass off the fiber
        let off_fiber: Vec<usize> = (0..from.len())
            .filter(|&p| assignment[p] != fiber.target)
            .collect();
        let off_set = PointSet::from_points(from.clone(), &off_fiber)?;
        let off_terms = var.terms_points(&off_set)?;
        if !off_terms.iter().all(Q::is_zero) {
            report.concentration_failures.push(fiber.target);
        }
    }

    // reconstruction over atom generators
    for j in 0..from.atom_count() {
        let atom = PointSet::from_points(from.clone(), from.atom_points(j))?;
        if !reconstruction_matches(d, &atom, exact_throughout)? {
            report.reconstruction_failures.push(j);
        }
    }

    // reconstruction against the function battery
    for (i, f) in functions.iter().enumerate() {
        let lhs = d.source.bartle_integral(f)?;
        let mut rhs = vzero(d.source.dim_out());
        for fiber in &d.fibers {
            let inner = fiber.measure.bartle_integral(f)?;
            vadd_assign(&mut rhs, &vscale(&fiber.mass, &inner));
        }
        if !vectors_close(&lhs, &rhs, exact_throughout) {
            report.function_failures.push(i);
        }
    }

    // Σ ν({y})·‖Ω_y‖(X) = ‖Ω‖(X)
    let total_var = d.source.variation(d.norm)?;
    let lhs: Q = d
        .fibers
        .iter()
        .map(|f| {
            let var = f.measure.variation(d.norm).expect("fiber variation");
            let terms = var
                .terms_points(&PointSet::full(from.clone()))
                .expect("same space");
            let total = match sum_sqrt_exact(&terms) {
                Some(t) => t,
                None => sum_sqrt_approx(&terms, SQRT_DIGITS),
            };
            &f.mass * total
        })
        .sum();
    let rhs = match total_var.total_exact() {
        Some(t) => t,
        None => total_var.total_approx(),
    };
    report.mass_identity_holds = if exact_throughout && total_var.total_exact().is_some() {
        lhs == rhs
    } else {
        (lhs - rhs).abs() <= margin
    };
    Ok(report)
}

fn reconstruction_matches(d: &Disintegration, e: &PointSet, exact: bool) -> Result<bool> {
    let lhs = d.source.evaluate_points(e)?;
    let mut rhs = vzero(d.source.dim_out());
    for fiber in &d.fibers {
        let v = fiber.measure.evaluate_points(e)?;
        vadd_assign(&mut rhs, &vscale(&fiber.mass, &v));
    }
    Ok(vectors_close(&lhs, &rhs, exact))
}

fn vectors_close(a: &Vector, b: &Vector, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        let margin = comparison_margin();
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= margin)
    }
}

/// Patches per-carrier-set disintegrations into a disintegration of the
/// whole measure, with the weights `α_n(y) = d φ_#‖Ω|_{X_n}‖ / d φ_#‖Ω‖ (y)`.
pub fn patch_disintegrations(
    om: &VectorMeasure,
    map: &ModelMap,
    norm: Norm,
    pieces: &[(PointSet, Disintegration)],
) -> Result<Disintegration> {
    let ModelMap::Points { from, .. } = map else {
        return Err(Error::Unsupported("disintegration runs along point maps"));
    };
    if om.atomic_space() != Some(from) {
        return Err(Error::ModelMismatch);
    }
    // carriers must be pairwise disjoint and jointly carry the variation
    let mut union = PointSet::empty(from.clone());
    for (set, _) in pieces {
        if !set.intersection(&union)?.is_empty() {
            return Err(Error::Invalid("patch carriers must be pairwise disjoint"));
        }
        union = union.union(set)?;
    }
    let var = om.variation(norm)?;
    let missing = var.terms_points(&union.complement())?;
    if !missing.iter().all(Q::is_zero) {
        return Err(Error::Invalid(
            "patch carriers must exhaust the variation mass",
        ));
    }

    let full = disintegrate(om, map, norm)?;
    let mut fibers: Vec<Fiber> = Vec::new();
    for fiber in &full.fibers {
        // Ω_y(E) = Σ_n α_n(y) Ω^n_y(E)
        let mut combined: Option<VectorMeasure> = None;
        for (set, piece_d) in pieces {
            let Some(piece_fiber) = piece_d.fiber_for(fiber.target) else {
                continue;
            };
            // α_n(y) = ‖Ω|_{X_n}‖(fiber) / ‖Ω‖(fiber)
            let restricted = om.restrict_to_points(set)?;
            let piece_var = restricted.variation(norm)?;
            let fiber_set = fiber_preimage(map, fiber.target)?;
            let terms = piece_var.terms_points(&fiber_set)?;
            let (piece_mass, _) = fiber_mass(&terms);
            if piece_mass.is_zero() {
                continue;
            }
            let alpha = piece_mass / &fiber.mass;
            let scaled = scale_measure(&piece_fiber.measure, &alpha)?;
            combined = Some(match combined {
                None => scaled,
                Some(acc) => add_atomlists(&acc, &scaled)?,
            });
        }
        let measure = combined.ok_or(Error::Invalid("no piece covers a positive fiber"))?;
        fibers.push(Fiber {
            target: fiber.target,
            mass: fiber.mass.clone(),
            mass_exact: fiber.mass_exact,
            measure,
        });
    }
    Ok(Disintegration {
        source: om.clone(),
        map: map.clone(),
        norm,
        fibers,
    })
}

fn fiber_preimage(map: &ModelMap, target: usize) -> Result<PointSet> {
    let ModelMap::Points {
        from, assignment, ..
    } = map
    else {
        return Err(Error::Unsupported("point maps only"));
    };
    let pts: Vec<usize> = (0..from.len())
        .filter(|&p| assignment[p] == target)
        .collect();
    PointSet::from_points(from.clone(), &pts)
}

fn add_atomlists(a: &VectorMeasure, b: &VectorMeasure) -> Result<VectorMeasure> {
    let space = a.atomic_space().ok_or(Error::ModelMismatch)?.clone();
    if b.atomic_space() != Some(&space) {
        return Err(Error::ModelMismatch);
    }
    let mut sums = alloc::vec![vzero(a.dim_out()); space.len()];
    for (p, v) in a.to_carriers()? {
        vadd_assign(&mut sums[p], &v);
    }
    for (p, v) in b.to_carriers()? {
        vadd_assign(&mut sums[p], &v);
    }
    let carriers = sums
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !exact::is_vzero(v))
        .collect();
    VectorMeasure::atom_list(space, a.dim_out(), carriers)
}

/// `max_y ‖Ω¹_y − Ω²_y‖(X)` over the positive fibers: zero for any two valid
/// disintegrations of the same data.
pub fn uniqueness_distance(a: &Disintegration, b: &Disintegration) -> Result<Q> {
    if a.source != b.source || a.map != b.map {
        return Err(Error::ModelMismatch);
    }
    let mut worst = Q::zero();
    let targets: Vec<usize> = a.fibers.iter().map(|f| f.target).collect();
    for t in targets {
        let fa = a
            .fiber_for(t)
            .ok_or(Error::Invalid("fiber sets disagree"))?;
        let fb = b
            .fiber_for(t)
            .ok_or(Error::Invalid("fiber sets disagree"))?;
        let diff = subtract_atomlists(&fa.measure, &fb.measure)?;
        let var = diff.variation(a.norm)?;
        let total = match var.total_exact() {
            Some(v) => v,
            None => var.total_approx(),
        };
        if total > worst {
            worst = total;
        }
    }
    Ok(worst)
}

fn subtract_atomlists(a: &VectorMeasure, b: &VectorMeasure) -> Result<VectorMeasure> {
    let negated: Vec<(usize, Vector)> = b
        .to_carriers()?
        .into_iter()
        .map(|(p, v)| (p, vscale(&-Q::one(), &v)))
        .collect();
    let space = b.atomic_space().ok_or(Error::ModelMismatch)?.clone();
    let nb = VectorMeasure::atom_list(space, b.dim_out(), negated)?;
    add_atomlists(a, &nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::AtomicSpace;
    use crate::exact::{q, qi};
    use alloc::string::ToString;

    /// The worked three-point fixture: X = {a,b,c}, φ(a)=φ(b)=y1, φ(c)=y2,
    /// Ω = δ_a(3,0) + δ_b(0,4) + δ_c(1,0), L1 norm.
    fn fixture() -> (VectorMeasure, ModelMap) {
        let x = AtomicSpace::of_labels(
            alloc::vec!["a".to_string(), "b".to_string(), "c".to_string()],
            alloc::vec![qi(1), qi(1), qi(1)],
        )
        .unwrap();
        let y = AtomicSpace::of_labels(
            alloc::vec!["y1".to_string(), "y2".to_string()],
            alloc::vec![qi(1), qi(1)],
        )
        .unwrap();
        let om = VectorMeasure::atom_list(
            x.clone(),
            2,
            alloc::vec![
                (0, alloc::vec![qi(3), qi(0)]),
                (1, alloc::vec![qi(0), qi(4)]),
                (2, alloc::vec![qi(1), qi(0)]),
            ],
        )
        .unwrap();
        let map = ModelMap::points(x, y, alloc::vec![0, 0, 1]).unwrap();
        (om, map)
    }

    #[test]
    fn three_point_fixture_values() {
        let (om, map) = fixture();
        let d = disintegrate(&om, &map, Norm::L1).unwrap();
        assert_eq!(d.fibers.len(), 2);
        let f1 = d.fiber_for(0).unwrap();
        let f2 = d.fiber_for(1).unwrap();
        assert_eq!(f1.mass, qi(7));
        assert_eq!(f2.mass, qi(1));
        assert!(f1.mass_exact && f2.mass_exact);
        let space = om.atomic_space().unwrap().clone();
        let ea = PointSet::from_points(space.clone(), &[0]).unwrap();
        let eb = PointSet::from_points(space.clone(), &[1]).unwrap();
        let ec = PointSet::from_points(space.clone(), &[2]).unwrap();
        assert_eq!(
            f1.measure.evaluate_points(&ea).unwrap(),
            alloc::vec![q(3, 7), qi(0)]
        );
        assert_eq!(
            f1.measure.evaluate_points(&eb).unwrap(),
            alloc::vec![qi(0), q(4, 7)]
        );
        assert_eq!(
            f2.measure.evaluate_points(&ec).unwrap(),
            alloc::vec![qi(1), qi(0)]
        );
        // reconstruction on {a}: ν(y1)·(3/7,0) = (3,0)
        let recon = vscale(&f1.mass, &f1.measure.evaluate_points(&ea).unwrap());
        assert_eq!(recon, alloc::vec![qi(3), qi(0)]);
        let report = verify_disintegration(&d, &[]).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn injective_and_constant_maps() {
        let (om, _) = fixture();
        let space = om.atomic_space().unwrap().clone();
        // injective: one carrier per fiber, each a unit point mass
        let y3 = AtomicSpace::of_labels(
            alloc::vec!["u".to_string(), "v".to_string(), "w".to_string()],
            alloc::vec![qi(1), qi(1), qi(1)],
        )
        .unwrap();
        let inj = ModelMap::points(space.clone(), y3, alloc::vec![0, 1, 2]).unwrap();
        let d = disintegrate(&om, &inj, Norm::L1).unwrap();
        assert_eq!(d.fibers.len(), 3);
        for fiber in &d.fibers {
            let var = fiber.measure.variation(Norm::L1).unwrap();
            assert_eq!(var.total_exact().unwrap(), qi(1));
        }
        // constant: a single fiber carrying Ω/‖Ω‖(X)
        let y1 = AtomicSpace::of_labels(alloc::vec!["y".to_string()], alloc::vec![qi(1)]).unwrap();
        let cst = ModelMap::points(space.clone(), y1, alloc::vec![0, 0, 0]).unwrap();
        let d = disintegrate(&om, &cst, Norm::L1).unwrap();
        assert_eq!(d.fibers.len(), 1);
        assert_eq!(d.fibers[0].mass, qi(8));
        let full = PointSet::full(space);
        assert_eq!(
            d.fibers[0].measure.evaluate_points(&full).unwrap(),
            alloc::vec![q(4, 8), q(4, 8)]
        );
    }

    #[test]
    fn zero_measure_is_rejected() {
        let (om, map) = fixture();
        let space = om.atomic_space().unwrap().clone();
        let zero = VectorMeasure::atom_list(space, 2, alloc::vec![]).unwrap();
        assert!(matches!(
            disintegrate(&zero, &map, Norm::L1),
            Err(Error::ZeroMeasure)
        ));
    }

    #[test]
    fn tampered_candidates_fail_verification() {
        let (om, map) = fixture();
        let d = disintegrate(&om, &map, Norm::L1).unwrap();
        // scale one fiber by 2: normalization fails with that witness
        let mut scaled = d.clone();
        scaled.fibers[0].measure = scale_measure(&scaled.fibers[0].measure, &qi(2)).unwrap();
        let report = verify_disintegration(&scaled, &[]).unwrap();
        assert_eq!(report.normalization_failures, alloc::vec![0]);
        // move mass across fibers, compensating to preserve reconstruction:
        // concentration fails
        let space = om.atomic_space().unwrap().clone();
        let mut moved = d.clone();
        // put (1,0)/7 of fiber-1 mass onto carrier c (the other fiber) and
        // remove it from a
        let old = moved.fibers[0].measure.to_carriers().unwrap();
        let mut carriers = old.clone();
        carriers[0].1 = alloc::vec![q(3, 7) - q(1, 7), qi(0)];
        carriers.push((2, alloc::vec![q(1, 7), qi(0)]));
        moved.fibers[0].measure = VectorMeasure::atom_list(space.clone(), 2, carriers).unwrap();
        // compensate in the second fiber so Σ ν_y Ω_y(E) is preserved
        let mut c2 = moved.fibers[1].measure.to_carriers().unwrap();
        c2[0].1 = alloc::vec![qi(1) - qi(1), qi(0)];
        c2.push((0, alloc::vec![qi(1), qi(0)]));
        moved.fibers[1].measure = VectorMeasure::atom_list(space, 2, c2).unwrap();
        let report = verify_disintegration(&moved, &[]).unwrap();
        assert!(!report.concentration_failures.is_empty());
    }

    #[test]
    fn patching_matches_direct_disintegration() {
        let (om, map) = fixture();
        let space = om.atomic_space().unwrap().clone();
        // split {a,b} vs {c}
        let x1 = PointSet::from_points(space.clone(), &[0, 1]).unwrap();
        let x2 = PointSet::from_points(space.clone(), &[2]).unwrap();
        let d1 = disintegrate(&om.restrict_to_points(&x1).unwrap(), &map, Norm::L1).unwrap();
        let d2 = disintegrate(&om.restrict_to_points(&x2).unwrap(), &map, Norm::L1).unwrap();
        let patched = patch_disintegrations(&om, &map, Norm::L1, &[(x1, d1), (x2, d2)]).unwrap();
        let report = verify_disintegration(&patched, &[]).unwrap();
        assert!(report.all_pass(), "{report:?}");
        let direct = disintegrate(&om, &map, Norm::L1).unwrap();
        assert_eq!(uniqueness_distance(&direct, &patched).unwrap(), qi(0));
        // single piece: identity patching
        let full = PointSet::full(space.clone());
        let dfull = disintegrate(&om, &map, Norm::L1).unwrap();
        let patched1 = patch_disintegrations(&om, &map, Norm::L1, &[(full, dfull)]).unwrap();
        assert_eq!(uniqueness_distance(&direct, &patched1).unwrap(), qi(0));
        // pieces missing a positive-mass carrier: precondition error
        let x1b = PointSet::from_points(space.clone(), &[0, 1]).unwrap();
        let d1b = disintegrate(&om.restrict_to_points(&x1b).unwrap(), &map, Norm::L1).unwrap();
        assert!(patch_disintegrations(&om, &map, Norm::L1, &[(x1b, d1b)]).is_err());
    }

    #[test]
    fn uniqueness_distance_flags_perturbations() {
        let (om, map) = fixture();
        let d = disintegrate(&om, &map, Norm::L1).unwrap();
        let mut perturbed = d.clone();
        // swap the two carrier vectors inside fiber y1
        let space = om.atomic_space().unwrap().clone();
        perturbed.fibers[0].measure = VectorMeasure::atom_list(
            space,
            2,
            alloc::vec![
                (0, alloc::vec![qi(0), q(4, 7)]),
                (1, alloc::vec![q(3, 7), qi(0)]),
            ],
        )
        .unwrap();
        assert_eq!(uniqueness_distance(&d, &d).unwrap(), qi(0));
        let dist = uniqueness_distance(&d, &perturbed).unwrap();
        assert!(dist > qi(0));
    }

    #[test]
    fn permutation_equivariance() {
        // relabeling x-points commutes with disintegration
        let (om, map) = fixture();
        let d = disintegrate(&om, &map, Norm::L1).unwrap();
        // permuted space: order c,a,b
        let xp = AtomicSpace::of_labels(
            alloc::vec!["c".to_string(), "a".to_string(), "b".to_string()],
            alloc::vec![qi(1), qi(1), qi(1)],
        )
        .unwrap();
        let perm = [2usize, 0, 1]; // old index -> new index
        let omp = VectorMeasure::atom_list(
            xp.clone(),
            2,
            alloc::vec![
                (perm[0], alloc::vec![qi(3), qi(0)]),
                (perm[1], alloc::vec![qi(0), qi(4)]),
                (perm[2], alloc::vec![qi(1), qi(0)]),
            ],
        )
        .unwrap();
        let ModelMap::Points { to, assignment, .. } = &map else {
            unreachable!()
        };
        let mut ap = alloc::vec![0usize; 3];
        for old in 0..3 {
            ap[perm[old]] = assignment[old];
        }
        let mapp = ModelMap::points(xp.clone(), to.clone(), ap).unwrap();
        let dp = disintegrate(&omp, &mapp, Norm::L1).unwrap();
        for fiber in &d.fibers {
            let fp = dp.fiber_for(fiber.target).unwrap();
            assert_eq!(fiber.mass, fp.mass);
            for old in 0..3 {
                let e_old =
                    PointSet::from_points(om.atomic_space().unwrap().clone(), &[old]).unwrap();
                let e_new = PointSet::from_points(xp.clone(), &[perm[old]]).unwrap();
                assert_eq!(
                    fiber.measure.evaluate_points(&e_old).unwrap(),
                    fp.measure.evaluate_points(&e_new).unwrap()
                );
            }
        }
    }
}
