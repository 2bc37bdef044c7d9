//! Nonnegative base measures on the three desk-scale models, with exact
//! rational masses throughout.

use crate::atomic::{AtomicSpace, PointSet};
use crate::error::{Error, Result};
use crate::exact::{pow2, Q};
use crate::hierarchy::{Cell, CellSet, DyadicHierarchy, Point};
use crate::interval::{Interval, IntervalUnion};
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A finite nonnegative measure tied to one of the ambient models.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseMeasure {
    /// Lebesgue measure on `[0,1)^d`: cell mass equals exact volume.
    Lebesgue { hierarchy: DyadicHierarchy },
    /// Piecewise-constant density against Lebesgue, constant on the cells of
    /// `grid_depth`; mass of a cell is density times volume.
    StepDensity {
        hierarchy: DyadicHierarchy,
        grid_depth: u32,
        densities: Vec<Q>,
    },
    /// Point weights of an atomic space.
    AtomicWeights { space: Arc<AtomicSpace> },
}

impl BaseMeasure {
    pub fn lebesgue(hierarchy: DyadicHierarchy) -> Self {
        BaseMeasure::Lebesgue { hierarchy }
    }

    pub fn step_density(
        hierarchy: DyadicHierarchy,
        grid_depth: u32,
        densities: Vec<Q>,
    ) -> Result<Self> {
        if grid_depth > hierarchy.max_depth() {
            return Err(Error::Invalid("density grid deeper than hierarchy"));
        }
        if densities.len() as u64 != hierarchy.cells_at(grid_depth) {
            return Err(Error::Invalid("one density per grid cell required"));
        }
        if densities.iter().any(|d| d < &Q::zero()) {
            return Err(Error::Invalid("densities must be nonnegative"));
        }
        if densities.iter().all(Q::is_zero) {
            return Err(Error::Invalid(
                "the zero measure is not a valid base measure",
            ));
        }
        Ok(BaseMeasure::StepDensity {
            hierarchy,
            grid_depth,
            densities,
        })
    }

    pub fn atomic(space: Arc<AtomicSpace>) -> Self {
        BaseMeasure::AtomicWeights { space }
    }

    pub fn hierarchy(&self) -> Option<DyadicHierarchy> {
        match self {
            BaseMeasure::Lebesgue { hierarchy } => Some(*hierarchy),
            BaseMeasure::StepDensity { hierarchy, .. } => Some(*hierarchy),
            BaseMeasure::AtomicWeights { .. } => None,
        }
    }

    pub fn atomic_space(&self) -> Option<&Arc<AtomicSpace>> {
        match self {
            BaseMeasure::AtomicWeights { space } => Some(space),
            _ => None,
        }
    }

    pub fn total(&self) -> Q {
        match self {
            BaseMeasure::Lebesgue { .. } => Q::one(),
            BaseMeasure::StepDensity {
                hierarchy,
                grid_depth,
                densities,
            } => {
                let vol = hierarchy.cell_volume(*grid_depth);
                densities.iter().map(|d| d * &vol).sum()
            }
            BaseMeasure::AtomicWeights { space } => space.total_mass(),
        }
    }

    /// Exact mass of a single cell (hierarchy models only).
    pub fn cell_mass(&self, cell: Cell) -> Result<Q> {
        match self {
            BaseMeasure::Lebesgue { hierarchy } => Ok(hierarchy.cell_volume(cell.depth)),
            BaseMeasure::StepDensity {
                hierarchy,
                grid_depth,
                densities,
            } => {
                if cell.depth >= *grid_depth {
                    let anc = hierarchy.ancestor(cell, *grid_depth);
                    Ok(&densities[anc.index as usize] * hierarchy.cell_volume(cell.depth))
                } else {
                    let vol = hierarchy.cell_volume(*grid_depth);
                    let mut acc = Q::zero();
                    for c in hierarchy.descendants(cell, *grid_depth) {
                        acc += &densities[c.index as usize] * &vol;
                    }
                    Ok(acc)
                }
            }
            BaseMeasure::AtomicWeights { .. } => Err(Error::ModelMismatch),
        }
    }

    pub fn is_null_cell(&self, cell: Cell) -> Result<bool> {
        Ok(self.cell_mass(cell)?.is_zero())
    }

    /// Exact measure of a cell set.
    pub fn cellset_mass(&self, set: &CellSet) -> Result<Q> {
        let h = self.hierarchy().ok_or(Error::ModelMismatch)?;
        if h != set.hierarchy() {
            return Err(Error::ModelMismatch);
        }
        let mut acc = Q::zero();
        for cell in set.iter_cells() {
            acc += self.cell_mass(cell)?;
        }
        Ok(acc)
    }

    /// Exact measure of a point set (must be measurable in the completed
    /// atom algebra).
    pub fn pointset_mass(&self, set: &PointSet) -> Result<Q> {
        match self {
            BaseMeasure::AtomicWeights { space } => {
                if set.space() != space {
                    return Err(Error::ModelMismatch);
                }
                Ok(set.weight())
            }
            _ => Err(Error::ModelMismatch),
        }
    }

    /// Exact `μ(E ∩ cell)` for a cell set `E`; cheap in both depth orders.
    pub fn cell_intersection_mass(&self, set: &CellSet, cell: Cell) -> Result<Q> {
        let h = self.hierarchy().ok_or(Error::ModelMismatch)?;
        if h != set.hierarchy() {
            return Err(Error::ModelMismatch);
        }
        if cell.depth >= set.depth() {
            let anc = h.ancestor(cell, set.depth());
            if set.contains_cell(anc) {
                self.cell_mass(cell)
            } else {
                Ok(Q::zero())
            }
        } else {
            let mut acc = Q::zero();
            for c in h.descendants(cell, set.depth()) {
                if set.contains_cell(c) {
                    acc += self.cell_mass(c)?;
                }
            }
            Ok(acc)
        }
    }

    /// Exact measure of an interval union under a 1-d hierarchy measure:
    /// `∫_E g dλ` for the step density `g` (or plain length for Lebesgue).
    pub fn interval_mass(&self, set: &IntervalUnion) -> Result<Q> {
        let h = self.hierarchy().ok_or(Error::ModelMismatch)?;
        if h.dim() != 1 {
            return Err(Error::ModelMismatch);
        }
        let unit = Interval::half_open(Q::zero(), Q::one()).expect("unit interval");
        match self {
            BaseMeasure::Lebesgue { .. } => {
                let mut acc = Q::zero();
                for p in set.parts() {
                    acc += clipped_length(&p.lo, &p.hi, &unit.lo, &unit.hi);
                }
                Ok(acc)
            }
            BaseMeasure::StepDensity {
                grid_depth,
                densities,
                ..
            } => {
                let mut acc = Q::zero();
                let cells = 1u64 << grid_depth;
                let side = pow2(-(*grid_depth as i64));
                for p in set.parts() {
                    // only grid cells overlapping the clipped part matter
                    let first = floor_scaled(&p.lo, *grid_depth).max(0).min(cells as i64) as u64;
                    let last = (floor_scaled(&p.hi, *grid_depth) + 1)
                        .max(0)
                        .min(cells as i64) as u64;
                    for i in first..last {
                        let lo = crate::exact::qi(i as i64) * &side;
                        let hi = &lo + &side;
                        let overlap = clipped_length(&p.lo, &p.hi, &lo, &hi);
                        if !overlap.is_zero() {
                            acc += &densities[i as usize] * overlap;
                        }
                    }
                }
                Ok(acc)
            }
            BaseMeasure::AtomicWeights { .. } => Err(Error::ModelMismatch),
        }
    }

    /// Whether `point` lies in the closure of the positive-mass cells.
    pub fn support_contains(&self, point: &Point) -> Result<bool> {
        match self {
            BaseMeasure::Lebesgue { .. } => Ok(true),
            BaseMeasure::StepDensity {
                hierarchy,
                grid_depth,
                densities,
            } => {
                for i in 0..hierarchy.cells_at(*grid_depth) {
                    if densities[i as usize].is_zero() {
                        continue;
                    }
                    let cell = hierarchy.cell(*grid_depth, i);
                    let in_closure = hierarchy
                        .cell_box(cell)
                        .iter()
                        .zip(point.coords())
                        .all(|((lo, hi), x)| x >= lo && x <= hi);
                    if in_closure {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            BaseMeasure::AtomicWeights { .. } => Err(Error::ModelMismatch),
        }
    }

    /// Maximal-atom partition of the represented algebra.
    ///
    /// For atomic weights these are the declared atoms; for a hierarchy model
    /// every positive-mass leaf cell is an atom of the leaf algebra.
    pub fn atoms_of(&self) -> AtomsOf {
        match self {
            BaseMeasure::AtomicWeights { space } => AtomsOf::Atoms {
                space: space.clone(),
                sets: (0..space.atom_count())
                    .map(|j| {
                        PointSet::from_points(space.clone(), space.atom_points(j))
                            .expect("atom indices are valid")
                    })
                    .collect(),
            },
            BaseMeasure::Lebesgue { hierarchy } => AtomsOf::Leaves {
                hierarchy: *hierarchy,
                cells: (0..hierarchy.cells_at(hierarchy.max_depth()))
                    .map(|i| hierarchy.cell(hierarchy.max_depth(), i))
                    .collect(),
            },
            BaseMeasure::StepDensity { hierarchy, .. } => {
                let leaf = hierarchy.max_depth();
                let mut cells = Vec::new();
                for i in 0..hierarchy.cells_at(leaf) {
                    let cell = hierarchy.cell(leaf, i);
                    if !self.cell_mass(cell).expect("hierarchy model").is_zero() {
                        cells.push(cell);
                    }
                }
                AtomsOf::Leaves {
                    hierarchy: *hierarchy,
                    cells,
                }
            }
        }
    }
}

fn clipped_length(lo: &Q, hi: &Q, clip_lo: &Q, clip_hi: &Q) -> Q {
    let l = if lo > clip_lo {
        lo.clone()
    } else {
        clip_lo.clone()
    };
    let h = if hi < clip_hi {
        hi.clone()
    } else {
        clip_hi.clone()
    };
    if h > l {
        h - l
    } else {
        Q::zero()
    }
}

/// `floor(x * 2^k)` as an `i64`; saturates outside the i64 range (callers
/// clamp to the grid anyway).
fn floor_scaled(x: &Q, k: u32) -> i64 {
    let scaled = (x.numer() << k as usize).div_floor(x.denom());
    scaled.to_i64().unwrap_or(if scaled.is_negative() {
        i64::MIN
    } else {
        i64::MAX
    })
}

/// Result of [`BaseMeasure::atoms_of`].
#[derive(Clone, Debug)]
pub enum AtomsOf {
    Leaves {
        hierarchy: DyadicHierarchy,
        cells: Vec<Cell>,
    },
    Atoms {
        space: Arc<AtomicSpace>,
        sets: Vec<PointSet>,
    },
}

impl AtomsOf {
    pub fn len(&self) -> usize {
        match self {
            AtomsOf::Leaves { cells, .. } => cells.len(),
            AtomsOf::Atoms { sets, .. } => sets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    fn h(depth: u32) -> DyadicHierarchy {
        DyadicHierarchy::new(1, depth).unwrap()
    }

    #[test]
    fn lebesgue_basics() {
        let mu = BaseMeasure::lebesgue(h(4));
        let e = IntervalUnion::new(
            Interval::half_open(qi(0), qi(1)).unwrap(),
            alloc::vec![Interval::half_open(qi(0), q(1, 2)).unwrap()],
        )
        .unwrap();
        assert_eq!(mu.interval_mass(&e).unwrap(), q(1, 2));
        let empty = IntervalUnion::empty(Interval::half_open(qi(0), qi(1)).unwrap());
        assert_eq!(mu.interval_mass(&empty).unwrap(), qi(0));
    }

    #[test]
    fn step_density_interval_mass() {
        // density 2 on [0,1/2), 0 on [1/2,1); E = [0,1/4) ∪ [1/2,3/4) → 1/2
        let mu = BaseMeasure::step_density(h(4), 1, alloc::vec![qi(2), qi(0)]).unwrap();
        let e = IntervalUnion::new(
            Interval::half_open(qi(0), qi(1)).unwrap(),
            alloc::vec![
                Interval::half_open(qi(0), q(1, 4)).unwrap(),
                Interval::half_open(q(1, 2), q(3, 4)).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(mu.interval_mass(&e).unwrap(), q(1, 2));
    }

    #[test]
    fn child_sum_law_exact() {
        let mu =
            BaseMeasure::step_density(h(3), 2, alloc::vec![qi(1), qi(0), q(3, 2), qi(2)]).unwrap();
        let hier = h(3);
        for k in 0..3 {
            for i in 0..hier.cells_at(k) {
                let cell = hier.cell(k, i);
                let sum: Q = hier
                    .children(cell)
                    .into_iter()
                    .map(|c| mu.cell_mass(c).unwrap())
                    .sum();
                assert_eq!(mu.cell_mass(cell).unwrap(), sum);
            }
        }
    }

    #[test]
    fn refinement_preserves_cellset_mass() {
        let hier = h(5);
        let mu =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(1), qi(2), qi(0), qi(4)]).unwrap();
        let set = CellSet::from_indices(hier, 2, &[0, 3]).unwrap();
        let refined = set.refine(5).unwrap();
        assert_eq!(
            mu.cellset_mass(&set).unwrap(),
            mu.cellset_mass(&refined).unwrap()
        );
    }

    #[test]
    fn atoms_of_examples() {
        // uniform leaves at depth 2: four leaf atoms
        let hier = h(2);
        let mu = BaseMeasure::lebesgue(hier);
        assert_eq!(mu.atoms_of().len(), 4);
        // step density (0,1,0,3): cells 1 and 3 only
        let mu2 =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(0), qi(1), qi(0), qi(3)]).unwrap();
        match mu2.atoms_of() {
            AtomsOf::Leaves { cells, .. } => {
                let idx: Vec<u64> = cells.iter().map(|c| c.index).collect();
                assert_eq!(idx, alloc::vec![1, 3]);
            }
            _ => panic!("expected leaf atoms"),
        }
        // declared atoms on the atomic model
        let s = crate::atomic::AtomicSpace::new(
            alloc::vec!["a".into(), "b".into(), "c".into()],
            alloc::vec![qi(1), qi(1), qi(2)],
            alloc::vec![alloc::vec![0, 1], alloc::vec![2]],
        )
        .unwrap();
        let mu3 = BaseMeasure::atomic(s);
        assert_eq!(mu3.atoms_of().len(), 2);
    }

    /// Atom property oracle: every returned set A satisfies, against all
    /// subsets B of the represented algebra, either μ(B)=0 or μ(A∖B)=0.
    #[test]
    fn atom_property_exhaustive_on_leaf_algebra() {
        let hier = h(2);
        let mu =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(0), qi(1), qi(0), qi(3)]).unwrap();
        let atoms = match mu.atoms_of() {
            AtomsOf::Leaves { cells, .. } => cells,
            _ => unreachable!(),
        };
        for atom in &atoms {
            let atom_mass = mu.cell_mass(*atom).unwrap();
            assert!(atom_mass > qi(0));
            // subsets of the leaf algebra contained in the atom: each leaf
            // cell is a single generator, so B ranges over {∅, atom}
            for mask in 0u64..(1 << 4) {
                let b = CellSet::from_indices(hier, 2, &collect_mask(mask)).unwrap();
                let inside = b
                    .intersection(&CellSet::from_indices(hier, 2, &[atom.index]).unwrap())
                    .unwrap();
                let m_in = mu.cellset_mass(&inside).unwrap();
                assert!(m_in.is_zero() || m_in == atom_mass);
            }
        }
    }

    fn collect_mask(mask: u64) -> Vec<u64> {
        (0..4).filter(|i| (mask >> i) & 1 == 1).collect()
    }

    #[test]
    fn support_membership() {
        let mu = BaseMeasure::step_density(h(3), 1, alloc::vec![qi(0), qi(1)]).unwrap();
        // support is [1/2, 1]
        let inside = Point::scalar(q(3, 4)).unwrap();
        let boundary = Point::scalar(q(1, 2)).unwrap();
        let outside = Point::scalar(q(1, 8)).unwrap();
        assert!(mu.support_contains(&inside).unwrap());
        assert!(mu.support_contains(&boundary).unwrap());
        assert!(!mu.support_contains(&outside).unwrap());
    }
}
