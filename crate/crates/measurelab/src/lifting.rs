//! Constructive von Neumann liftings on purely atomic spaces.
//!
//! On a finite atom space the lifting is explicit: a set lifts to the union
//! of the atoms it essentially fills, a bounded function class lifts to the
//! everywhere-defined map carrying each atom's essential value, and the same
//! recipe lifts vector-valued step sections. The ultrafilters of the general
//! theory collapse here to principal ones: every point's basis filter has the
//! atom of the point as least element, so ultralimits evaluate by
//! substitution (the average over the atom).
//!
//! The module also exercises the two topological companions of a lifting:
//! the strong-lifting inclusion for partition bases on `[0,1)` and the
//! density topology with its three equivalent forms of approximate
//! continuity.

use crate::atomic::{AtomicSpace, PointSet, Section};
use crate::bochner::BanachBundle;
use crate::error::{Error, Result};
use crate::exact::{ceil_log2, Norm, Vector, Q};
use crate::hierarchy::{CellSet, DyadicHierarchy, Point};
use crate::interval::IntervalUnion;
use crate::measure::BaseMeasure;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_traits::{Signed, Zero};

/// Set-level von Neumann lifting of a purely atomic measure:
/// `ℓ(E)` is the union of the atoms on which `E` has full relative mass.
#[derive(Clone, Debug)]
pub struct LiftingOperator {
    space: Arc<AtomicSpace>,
}

impl LiftingOperator {
    pub fn new(space: Arc<AtomicSpace>) -> Self {
        LiftingOperator { space }
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        &self.space
    }

    /// Union of the atoms whose index bit is set (spaces with ≤ 32 atoms);
    /// every lifted set has this form.
    pub fn atom_union(&self, atom_mask: u32) -> PointSet {
        let mut points = Vec::new();
        for j in 0..self.space.atom_count().min(32) {
            if (atom_mask >> j) & 1 == 1 {
                points.extend_from_slice(self.space.atom_points(j));
            }
        }
        PointSet::from_points(self.space.clone(), &points).expect("atom points are valid")
    }

    /// `ℓ(E)`: the atoms on which `E` carries full relative mass, i.e. the
    /// atoms whose positive-weight points all lie in `E`.
    pub fn lift_set(&self, e: &PointSet) -> PointSet {
        debug_assert!(e.space() == &self.space);
        let mut points = Vec::new();
        for j in 0..self.space.atom_count() {
            let mut pos = self.space.atom_positive_points(j);
            if pos.all(|p| e.contains(p)) {
                points.extend_from_slice(self.space.atom_points(j));
            }
        }
        PointSet::from_points(self.space.clone(), &points).expect("atom points are valid")
    }

    /// Essential value of a scalar point function on an atom. Errors when the
    /// positive-weight points disagree (the input is not an a.e. class).
    pub fn essential_value(&self, values: &[Q], atom: usize) -> Result<Q> {
        essential(&self.space, atom, values, |a, b| a == b)
    }

    /// Function lifting: the everywhere-defined representative carrying each
    /// atom's essential value.
    pub fn lift_function(&self, values: &[Q]) -> Result<Vec<Q>> {
        if values.len() != self.space.len() {
            return Err(Error::Invalid("one value per ground point required"));
        }
        let mut per_atom = Vec::with_capacity(self.space.atom_count());
        for j in 0..self.space.atom_count() {
            per_atom.push(self.essential_value(values, j)?);
        }
        Ok((0..self.space.len())
            .map(|p| per_atom[self.space.atom_of(p)].clone())
            .collect())
    }

    /// Exact average of a function over a measurable point set; with the set
    /// equal to `atom(x)` this is the principal-ultrafilter evaluation of the
    /// lifting at `x`.
    pub fn average(&self, values: &[Q], set: &PointSet) -> Result<Q> {
        let mass = set.weight();
        if mass.is_zero() {
            return Err(Error::UndefinedAverage);
        }
        let mut acc = Q::zero();
        for p in set.iter() {
            acc += self.space.weight(p) * &values[p];
        }
        Ok(acc / mass)
    }

    /// Supremum norm of the lifted representative: the essential sup of the
    /// class.
    pub fn lifted_sup(&self, values: &[Q]) -> Result<Q> {
        let lifted = self.lift_function(values)?;
        Ok(lifted.iter().map(Q::abs).max().unwrap_or_else(Q::zero))
    }
}

fn essential<T: Clone>(
    space: &AtomicSpace,
    atom: usize,
    values: &[T],
    eq: impl Fn(&T, &T) -> bool,
) -> Result<T> {
    let mut pos = space.atom_positive_points(atom);
    let first = pos.next().expect("atoms have positive mass");
    let value = values[first].clone();
    for p in pos {
        if !eq(&values[p], &value) {
            return Err(Error::InvalidClass { atom });
        }
    }
    Ok(value)
}

/// Lifting of vector-valued step sections induced by a set lifting.
#[derive(Clone, Debug)]
pub struct SectionLifting {
    op: LiftingOperator,
}

impl SectionLifting {
    pub fn new(op: LiftingOperator) -> Self {
        SectionLifting { op }
    }

    pub fn operator(&self) -> &LiftingOperator {
        &self.op
    }

    /// Lifts a step section to its everywhere-defined representative; when a
    /// bundle is supplied the output is checked to stay fiberwise inside it.
    pub fn lift_section(&self, v: &Section, bundle: Option<&BanachBundle>) -> Result<Section> {
        let space = self.op.space();
        if v.space() != space {
            return Err(Error::ModelMismatch);
        }
        let mut per_atom: Vec<Vector> = Vec::with_capacity(space.atom_count());
        for j in 0..space.atom_count() {
            per_atom.push(essential(space, j, v.values(), |a: &Vector, b| a == b)?);
        }
        let values: Vec<Vector> = (0..space.len())
            .map(|p| per_atom[space.atom_of(p)].clone())
            .collect();
        let out = Section::new(space.clone(), values)?;
        if let Some(bundle) = bundle {
            let check = crate::bochner::bundle_membership_section(&out, bundle)?;
            if !check.member {
                return Err(Error::Invalid("lifted section leaves the bundle fiber"));
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Leaf algebras as atomic spaces (for the sandwich inclusion)
// ---------------------------------------------------------------------------

/// Views the leaf algebra of a hierarchy measure as an atomic space: one atom
/// per positive leaf, with every null leaf absorbed into an atom within its
/// deepest positive ancestor. Returns the space; ground point `i` is leaf `i`.
pub fn leaf_atomic_space(mu: &BaseMeasure) -> Result<Arc<AtomicSpace>> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    let leaf = h.max_depth();
    let n = h.cells_at(leaf) as usize;
    let mut labels = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        labels.push(alloc::format!("cell{i}"));
        weights.push(mu.cell_mass(h.cell(leaf, i as u64))?);
    }
    // atom homes: positive leaves anchor atoms; null leaves attach to the
    // first positive leaf under their deepest positive ancestor
    let mut home = alloc::vec![usize::MAX; n];
    let mut anchors = Vec::new();
    for i in 0..n {
        if !weights[i].is_zero() {
            home[i] = anchors.len();
            anchors.push(i);
        }
    }
    for i in 0..n {
        if home[i] != usize::MAX {
            continue;
        }
        let cell = h.cell(leaf, i as u64);
        let mut k = leaf;
        while k > 0 {
            k -= 1;
            let anc = h.ancestor(cell, k);
            let first_pos = h
                .descendants(anc, leaf)
                .into_iter()
                .find(|c| !weights[c.index as usize].is_zero());
            if let Some(c) = first_pos {
                home[i] = home[c.index as usize];
                break;
            }
        }
        if home[i] == usize::MAX {
            return Err(Error::ZeroMeasure);
        }
    }
    let mut atoms: Vec<Vec<usize>> = alloc::vec![Vec::new(); anchors.len()];
    for (i, &a) in home.iter().enumerate() {
        atoms[a].push(i);
    }
    AtomicSpace::new(labels, weights, atoms)
}

/// Leaf cell set viewed as a point set of the leaf atomic space.
pub fn cellset_as_pointset(e: &CellSet, space: &Arc<AtomicSpace>) -> Result<PointSet> {
    let points: Vec<usize> = e.iter_indices().map(|i| i as usize).collect();
    PointSet::from_points(space.clone(), &points)
}

/// One row of the sandwich check `φ(E) ⊆ ℓ(E) ⊆ X ∖ φ(X ∖ E)`.
#[derive(Clone, Debug)]
pub struct SandwichRow {
    pub lower_holds: bool,
    pub upper_holds: bool,
}

/// Verifies the sandwich inclusion between the partition density operator
/// and the atomic lifting of the leaf algebra, for a single leaf set.
pub fn sandwich_check(e: &CellSet, mu: &BaseMeasure) -> Result<SandwichRow> {
    let space = leaf_atomic_space(mu)?;
    let op = LiftingOperator::new(space.clone());
    let leaf = mu.hierarchy().ok_or(Error::ModelMismatch)?.max_depth();
    let e_leaf = e.refine(leaf)?;
    let phi_e = crate::basis::density_points_partition(&e_leaf, mu)?;
    let phi_compl = crate::basis::density_points_partition(&e_leaf.complement(), mu)?;
    let lift_e = op.lift_set(&cellset_as_pointset(&e_leaf, &space)?);
    let phi_e_pts = cellset_as_pointset(&phi_e, &space)?;
    let phi_compl_pts = cellset_as_pointset(&phi_compl, &space)?;
    Ok(SandwichRow {
        lower_holds: phi_e_pts.is_subset_of(&lift_e)?,
        upper_holds: lift_e.intersection(&phi_compl_pts)?.is_empty(),
    })
}

// ---------------------------------------------------------------------------
// Strong lifting inclusion on [0,1)
// ---------------------------------------------------------------------------

/// One verified (open set, point) pair of a strong-lifting check.
#[derive(Clone, Debug)]
pub struct StrongLiftingRow {
    pub point: Q,
    /// Smallest depth from which the chain ratio stays identically 1.
    pub witness_depth: Option<u32>,
    /// `ceil(log2(sqrt(d)/dist(x, ∂U))) + 1`, or `None` when `U` has empty
    /// complement (any witness depth is admissible then).
    pub depth_bound: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct StrongLiftingReport {
    pub rows: Vec<StrongLiftingRow>,
    pub depth_cap: u32,
}

impl StrongLiftingReport {
    /// Membership established for every pair, within the predicted depth.
    pub fn all_established(&self) -> bool {
        self.rows
            .iter()
            .all(|r| match (r.witness_depth, r.depth_bound) {
                (Some(k), Some(b)) => i64::from(k) <= b,
                (Some(_), None) => true,
                (None, _) => false,
            })
    }
}

/// For each sampled pair `(U, x)` with `U` open and `x ∈ U ∩ spt(μ)`,
/// exhibits a depth from which the chain ratio `μ(U ∩ P_k^x)/μ(P_k^x)` is
/// identically 1, so `x ∈ D_P(U)` — the inclusion that makes the induced
/// lifting strong. One-dimensional hierarchies only.
pub fn strong_lifting_check(
    mu: &BaseMeasure,
    samples: &[(IntervalUnion, Q)],
    depth_cap: u32,
) -> Result<StrongLiftingReport> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h.dim() != 1 {
        return Err(Error::Unsupported(
            "strong-lifting check runs on 1-d hierarchies",
        ));
    }
    let mut rows = Vec::new();
    for (u, x) in samples {
        if !u.contains(x) {
            return Err(Error::BadParameter("sample point must lie in the open set"));
        }
        let point = Point::scalar(x.clone())?;
        if !mu.support_contains(&point)? {
            return Err(Error::OutsideSupport);
        }
        // ratio per depth over positive chain cells
        let mut witness: Option<u32> = None;
        for k in (0..=depth_cap).rev() {
            let cell = h.cell_of(&point, k);
            let mass = mu.cell_mass(cell)?;
            if mass.is_zero() {
                continue;
            }
            let inter = mu.interval_mass(&clip_to_cell(u, &h, cell)?)?;
            if inter == mass {
                witness = Some(k);
            } else {
                break;
            }
        }
        let dist = distance_to_complement(u, x);
        let depth_bound = dist.map(|d| {
            if d.is_zero() {
                i64::MAX
            } else {
                ceil_log2(&(qi_one() / d)) + 1
            }
        });
        rows.push(StrongLiftingRow {
            point: x.clone(),
            witness_depth: witness,
            depth_bound,
        });
    }
    Ok(StrongLiftingReport { rows, depth_cap })
}

fn qi_one() -> Q {
    crate::exact::qi(1)
}

fn clip_to_cell(
    u: &IntervalUnion,
    h: &DyadicHierarchy,
    cell: crate::hierarchy::Cell,
) -> Result<IntervalUnion> {
    let (lo, hi) = h.cell_box(cell).remove(0);
    let cell_iu = IntervalUnion::new(
        u.ambient().clone(),
        alloc::vec![crate::interval::Interval::half_open(lo, hi)?],
    )?;
    u.intersection(&cell_iu)
}

/// Euclidean distance from `x` to the complement of `U` within its ambient
/// interval; `None` when the complement is empty.
pub fn distance_to_complement(u: &IntervalUnion, x: &Q) -> Option<Q> {
    let compl = u.complement();
    if compl.is_empty() {
        return None;
    }
    let mut best: Option<Q> = None;
    for p in compl.parts() {
        let d = if x < &p.lo {
            &p.lo - x
        } else if x > &p.hi {
            x - &p.hi
        } else {
            Q::zero()
        };
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    best
}

// ---------------------------------------------------------------------------
// Density topology and approximate continuity
// ---------------------------------------------------------------------------

/// Membership in the density topology of a lower density: `E ⊆ φ(E)`.
pub fn density_topology_member(phi: impl Fn(&PointSet) -> PointSet, e: &PointSet) -> bool {
    e.is_subset_of(&phi(e)).expect("same space")
}

/// A map into a finite metric space, described by a per-point assignment and
/// a squared-distance table (squares keep Euclidean comparisons exact).
#[derive(Clone, Debug)]
pub struct MetricMap {
    assignment: Vec<usize>,
    dist_sq: Vec<Vec<Q>>,
}

impl MetricMap {
    pub fn new(assignment: Vec<usize>, dist_sq: Vec<Vec<Q>>) -> Result<Self> {
        let k = dist_sq.len();
        if dist_sq.iter().any(|row| row.len() != k) {
            return Err(Error::Invalid("distance table must be square"));
        }
        for (i, row) in dist_sq.iter().enumerate() {
            if !row[i].is_zero() {
                return Err(Error::Invalid("distance table diagonal must be zero"));
            }
            for (j, d) in row.iter().enumerate() {
                if d != &dist_sq[j][i] || d.is_negative() {
                    return Err(Error::Invalid(
                        "distance table must be symmetric nonnegative",
                    ));
                }
            }
        }
        if assignment.iter().any(|&t| t >= k.max(1)) {
            return Err(Error::Invalid("assignment target out of range"));
        }
        Ok(MetricMap {
            assignment,
            dist_sq,
        })
    }

    /// Builds the map from vector values in `R^m` under the Euclidean metric.
    pub fn euclidean(values: &[Vector]) -> Result<Self> {
        let mut targets: Vec<Vector> = Vec::new();
        let mut assignment = Vec::with_capacity(values.len());
        for v in values {
            let idx = match targets.iter().position(|t| t == v) {
                Some(i) => i,
                None => {
                    targets.push(v.clone());
                    targets.len() - 1
                }
            };
            assignment.push(idx);
        }
        let k = targets.len();
        let mut dist_sq = alloc::vec![alloc::vec![Q::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let d = crate::exact::vsub(&targets[i], &targets[j]);
                dist_sq[i][j] = Norm::L2.value_sq(&d);
            }
        }
        MetricMap::new(assignment, dist_sq)
    }

    fn dist_sq_points(&self, p: usize, q_: usize) -> &Q {
        &self.dist_sq[self.assignment[p]][self.assignment[q_]]
    }
}

/// The three equivalent conditions of approximate continuity at `x`, each
/// evaluated independently: (i) small essential oscillation on some basis
/// member, (ii) `x ∈ ℓ(φ⁻¹(U))` for every ball `U` around `φ(x)`, (iii)
/// continuity at `x` from the density topology.
pub fn approximate_continuity(
    op: &LiftingOperator,
    map: &MetricMap,
    x: usize,
) -> Result<(bool, bool, bool)> {
    let space = op.space();
    if map.assignment.len() != space.len() {
        return Err(Error::Invalid(
            "one metric target per ground point required",
        ));
    }
    // candidate thresholds: the attained positive squared distances to φ(x)
    let mut eps_sq: Vec<Q> = Vec::new();
    for p in 0..space.len() {
        let d = map.dist_sq_points(p, x);
        if !d.is_zero() && !eps_sq.contains(d) {
            eps_sq.push(d.clone());
        }
    }

    let atom_x = PointSet::from_points(space.clone(), space.atom_points(space.atom_of(x)))?;

    let mut cond_i = true;
    let mut cond_ii = true;
    let mut cond_iii = true;
    for eps in &eps_sq {
        // (i): the least basis member is atom(x); larger members only add
        // mass, so the essential-oscillation condition holds on some member
        // iff it holds there
        let small_on_atom = atom_x
            .iter()
            .filter(|&p| !space.is_null_point(p))
            .all(|p| map.dist_sq_points(p, x) < eps);
        cond_i &= small_on_atom;

        // (ii): x ∈ ℓ(φ⁻¹(U)) for the ball of radius ε
        let preimage_pts: Vec<usize> = (0..space.len())
            .filter(|&p| map.dist_sq_points(p, x) < eps)
            .collect();
        let preimage = PointSet::from_points(space.clone(), &preimage_pts)?;
        cond_ii &= op.lift_set(&preimage).contains(x);

        // (iii): the largest density-open subset of φ⁻¹(U) is
        // φ⁻¹(U) ∩ ℓ(φ⁻¹(U)); continuity at x means x lies in it
        let interior = preimage.intersection(&op.lift_set(&preimage))?;
        cond_iii &= interior.contains(x);
    }
    Ok((cond_i, cond_ii, cond_iii))
}
