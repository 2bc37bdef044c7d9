//! Seeded generators for randomized law batteries. Everything is driven by
//! integer draws from a counter-based RNG, so batteries are reproducible
//! across platforms.

use crate::atomic::{AtomicSpace, PointSet, Section};
use crate::bochner::{SimpleMap, StepFunctionCells};
use crate::error::Result;
use crate::exact::{Vector, Q};
use crate::hierarchy::{CellSet, DyadicHierarchy, DyadicPoint, Point};
use crate::interval::{Interval, IntervalUnion};
use crate::measure::BaseMeasure;
use crate::vecmeasure::VectorMeasure;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational in `[lo, hi)` with denominator dividing `denom`.
pub fn rational_in(r: &mut SeededRng, lo: i64, hi: i64, denom: u32) -> Q {
    let steps = (hi - lo) as u64 * denom as u64;
    let k = r.gen_range(0..steps);
    Q::new(
        BigInt::from(lo) * BigInt::from(denom) + BigInt::from(k),
        BigInt::from(denom),
    )
}

/// Nonnegative rational weight; roughly `zero_percent` of draws are zero.
pub fn weight(r: &mut SeededRng, zero_percent: u32, denom: u32) -> Q {
    if r.gen_range(0..100) < zero_percent {
        Q::zero()
    } else {
        rational_in(r, 0, 4, denom) + Q::new(BigInt::one(), BigInt::from(denom))
    }
}

/// Random interval union inside `ambient` with up to `max_parts` parts.
pub fn interval_union(r: &mut SeededRng, ambient: &Interval, max_parts: u32) -> IntervalUnion {
    let parts = r.gen_range(0..=max_parts);
    let mut intervals = Vec::new();
    for _ in 0..parts {
        // endpoints on a rational grid inside the ambient span
        let denom = 1 << r.gen_range(1..6);
        let lo_num = r.gen_range(0..denom * 4);
        let len = r.gen_range(0..=denom);
        let span = &ambient.hi - &ambient.lo;
        let lo = &ambient.lo + &span * Q::new(BigInt::from(lo_num), BigInt::from(denom * 4));
        let hi = &lo + &span * Q::new(BigInt::from(len), BigInt::from(denom * 4));
        let hi = if hi > ambient.hi {
            ambient.hi.clone()
        } else {
            hi
        };
        let lo_closed = r.gen_bool(0.5);
        let hi_closed = r.gen_bool(0.5);
        if let Ok(iv) = Interval::new(lo, hi, lo_closed || len == 0, hi_closed || len == 0) {
            intervals.push(iv);
        }
    }
    IntervalUnion::new(ambient.clone(), intervals).expect("parts clipped to ambient")
}

/// A set equal to `e` up to a Lebesgue-null perturbation: endpoint tags are
/// flipped and degenerate points are sprinkled in.
pub fn null_perturbation(r: &mut SeededRng, e: &IntervalUnion) -> IntervalUnion {
    let mut parts = Vec::new();
    for p in e.parts() {
        if p.is_point() {
            if r.gen_bool(0.5) {
                parts.push(p.clone());
            }
            continue;
        }
        let mut q_ = p.clone();
        if r.gen_bool(0.5) {
            q_.lo_closed = !q_.lo_closed;
        }
        if r.gen_bool(0.5) {
            q_.hi_closed = !q_.hi_closed;
        }
        parts.push(q_);
    }
    if r.gen_bool(0.5) {
        let span = &e.ambient().hi - &e.ambient().lo;
        let t = rational_in(r, 0, 8, 16) / Q::from_integer(8.into());
        parts.push(Interval::point(&e.ambient().lo + span * t));
    }
    IntervalUnion::new(e.ambient().clone(), parts).expect("within ambient")
}

/// Atomic space with `atoms` atoms, each one positive anchor point plus up
/// to `max_nulls_per_atom` null points (so every subset is measurable up to
/// null sets).
pub fn atomic_space(
    r: &mut SeededRng,
    atoms: usize,
    max_nulls_per_atom: usize,
) -> Arc<AtomicSpace> {
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut partition = Vec::new();
    for j in 0..atoms {
        let mut members = Vec::new();
        labels.push(alloc::format!("p{j}"));
        weights.push(weight(r, 0, 8));
        members.push(labels.len() - 1);
        for k in 0..r.gen_range(0..=max_nulls_per_atom) {
            labels.push(alloc::format!("p{j}n{k}"));
            weights.push(Q::zero());
            members.push(labels.len() - 1);
        }
        partition.push(members);
    }
    AtomicSpace::new(labels, weights, partition).expect("positive anchors")
}

/// Uniform random subset of the ground points.
pub fn point_subset(r: &mut SeededRng, space: &Arc<AtomicSpace>) -> PointSet {
    let pts: Vec<usize> = (0..space.len()).filter(|_| r.gen_bool(0.5)).collect();
    PointSet::from_points(space.clone(), &pts).expect("indices in range")
}

/// Random scalar step function class: constant per atom on the positive
/// points, garbage on null points when `noisy`.
pub fn scalar_class(r: &mut SeededRng, space: &Arc<AtomicSpace>, noisy: bool) -> Vec<Q> {
    let per_atom: Vec<Q> = (0..space.atom_count())
        .map(|_| rational_in(r, -4, 4, 8))
        .collect();
    (0..space.len())
        .map(|p| {
            if noisy && space.is_null_point(p) {
                rational_in(r, -100, 100, 3)
            } else {
                per_atom[space.atom_of(p)].clone()
            }
        })
        .collect()
}

/// Random vector-valued section class (constant per atom up to null noise).
pub fn section_class(
    r: &mut SeededRng,
    space: &Arc<AtomicSpace>,
    dim: usize,
    noisy: bool,
) -> Section {
    let per_atom: Vec<Vector> = (0..space.atom_count())
        .map(|_| (0..dim).map(|_| rational_in(r, -4, 4, 8)).collect())
        .collect();
    let values = (0..space.len())
        .map(|p| {
            if noisy && space.is_null_point(p) {
                (0..dim).map(|_| rational_in(r, -100, 100, 3)).collect()
            } else {
                per_atom[space.atom_of(p)].clone()
            }
        })
        .collect();
    Section::new(space.clone(), values).expect("lengths match")
}

/// Step density measure on a 1-d hierarchy; `zero_percent` of the grid cells
/// are null (at least one stays positive).
pub fn step_density(
    r: &mut SeededRng,
    hierarchy: DyadicHierarchy,
    grid_depth: u32,
    zero_percent: u32,
) -> BaseMeasure {
    let n = hierarchy.cells_at(grid_depth);
    loop {
        let densities: Vec<Q> = (0..n).map(|_| weight(r, zero_percent, 8)).collect();
        if let Ok(mu) = BaseMeasure::step_density(hierarchy, grid_depth, densities) {
            return mu;
        }
    }
}

/// Random simple map with pieces at `depth`.
pub fn simple_map(
    r: &mut SeededRng,
    hierarchy: DyadicHierarchy,
    depth: u32,
    dim: usize,
) -> SimpleMap {
    let n = hierarchy.cells_at(depth);
    let values: Vec<Vector> = (0..n)
        .map(|_| (0..dim).map(|_| rational_in(r, -3, 3, 4)).collect())
        .collect();
    SimpleMap::from_cell_values(hierarchy, depth, &values).expect("dense values")
}

/// Random scalar step multiplier at `depth`.
pub fn step_function_cells(
    r: &mut SeededRng,
    hierarchy: DyadicHierarchy,
    depth: u32,
) -> StepFunctionCells {
    let n = hierarchy.cells_at(depth);
    let values: Vec<Q> = (0..n).map(|_| rational_in(r, -3, 3, 4)).collect();
    StepFunctionCells::new(hierarchy, depth, values).expect("dense values")
}

/// Random atom-list measure with `carriers` distinct carriers.
pub fn atom_list(
    r: &mut SeededRng,
    space: &Arc<AtomicSpace>,
    dim: usize,
    carriers: usize,
) -> VectorMeasure {
    let mut points: Vec<usize> = (0..space.len()).collect();
    // partial shuffle
    for i in 0..points.len() {
        let j = r.gen_range(i..points.len());
        points.swap(i, j);
    }
    let chosen = &points[..carriers.min(points.len())];
    let list = chosen
        .iter()
        .map(|&p| {
            let v: Vector = (0..dim).map(|_| rational_in(r, -4, 4, 4)).collect();
            (p, v)
        })
        .collect();
    VectorMeasure::atom_list(space.clone(), dim, list).expect("distinct carriers")
}

/// Seeded dyadic points at the given depth.
pub fn dyadic_points(
    r: &mut SeededRng,
    hierarchy: DyadicHierarchy,
    depth: u32,
    count: usize,
) -> Result<Vec<Point>> {
    let bound = 1u64 << depth;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let num: Vec<u64> = (0..hierarchy.dim())
            .map(|_| r.gen_range(0..bound))
            .collect();
        out.push(DyadicPoint::new(num, depth)?.to_point());
    }
    Ok(out)
}

/// Random leaf cell set on the hierarchy.
pub fn cell_set(r: &mut SeededRng, hierarchy: DyadicHierarchy, depth: u32) -> CellSet {
    let idx: Vec<u64> = (0..hierarchy.cells_at(depth))
        .filter(|_| r.gen_bool(0.5))
        .collect();
    CellSet::from_indices(hierarchy, depth, &idx).expect("indices in range")
}

/// Random partition of the ground points into `pieces` disjoint carrier sets
/// covering the space.
pub fn split(r: &mut SeededRng, space: &Arc<AtomicSpace>, pieces: usize) -> Vec<PointSet> {
    let mut buckets: Vec<Vec<usize>> = alloc::vec![Vec::new(); pieces.max(1)];
    for p in 0..space.len() {
        buckets[r.gen_range(0..pieces.max(1))].push(p);
    }
    buckets
        .into_iter()
        .map(|pts| PointSet::from_points(space.clone(), &pts).expect("valid points"))
        .collect()
}

/// Random label map onto `targets` labels, together with the target space.
pub fn label_map(
    r: &mut SeededRng,
    space: &Arc<AtomicSpace>,
    targets: usize,
) -> (Arc<AtomicSpace>, Vec<usize>) {
    let labels: Vec<String> = (0..targets).map(|i| alloc::format!("y{i}")).collect();
    let weights = alloc::vec![Q::one(); targets];
    let target = AtomicSpace::of_labels(labels, weights).expect("positive weights");
    let assignment = (0..space.len()).map(|_| r.gen_range(0..targets)).collect();
    (target, assignment)
}

use num_traits::{One, Zero};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism() {
        let mut a = rng(42);
        let mut b = rng(42);
        let amb = Interval::closed(crate::exact::qi(-2), crate::exact::qi(2)).unwrap();
        for _ in 0..20 {
            assert_eq!(
                interval_union(&mut a, &amb, 4),
                interval_union(&mut b, &amb, 4)
            );
        }
        let s1 = atomic_space(&mut a, 5, 2);
        let s2 = atomic_space(&mut b, 5, 2);
        assert_eq!(s1, s2);
    }

    #[test]
    fn null_perturbation_is_ae_equal() {
        let amb = Interval::closed(crate::exact::qi(-2), crate::exact::qi(2)).unwrap();
        let mut r = rng(7);
        for _ in 0..50 {
            let e = interval_union(&mut r, &amb, 4);
            let f = null_perturbation(&mut r, &e);
            assert!(e.ae_equal(&f).unwrap());
        }
    }
}
