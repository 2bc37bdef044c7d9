//! Finite weighted atom spaces: the constructive lifting universe.
//!
//! A space is a finite set of ground points carrying nonnegative rational
//! weights, partitioned into atoms of positive total mass. The measurable
//! algebra is the completed atom algebra: a point set is measurable exactly
//! when, within each atom, it contains either all or none of the
//! positive-weight points. Null points are absorbed into atoms and never
//! affect measurability.

use crate::error::{Error, Result};
use crate::exact::{Norm, Vector, Q};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_traits::Zero;

/// Finite weighted atom space.
#[derive(Debug, PartialEq, Eq)]
pub struct AtomicSpace {
    labels: Vec<String>,
    weights: Vec<Q>,
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
    atom_mass: Vec<Q>,
}

impl AtomicSpace {
    /// Builds a space from point labels, weights, and the atom partition.
    pub fn new(labels: Vec<String>, weights: Vec<Q>, atoms: Vec<Vec<usize>>) -> Result<Arc<Self>> {
        let n = labels.len();
        if n == 0 || weights.len() != n {
            return Err(Error::Invalid("labels/weights length mismatch"));
        }
        if weights.iter().any(|w| w < &Q::zero()) {
            return Err(Error::Invalid("point weights must be nonnegative"));
        }
        let mut atom_of = alloc::vec![usize::MAX; n];
        let mut atom_mass = Vec::with_capacity(atoms.len());
        for (j, atom) in atoms.iter().enumerate() {
            let mut mass = Q::zero();
            for &p in atom {
                if p >= n || atom_of[p] != usize::MAX {
                    return Err(Error::Invalid("atoms must partition the ground set"));
                }
                atom_of[p] = j;
                mass += &weights[p];
            }
            if mass.is_zero() {
                return Err(Error::Invalid("every atom must have positive mass"));
            }
            atom_mass.push(mass);
        }
        if atom_of.contains(&usize::MAX) {
            return Err(Error::Invalid("atoms must partition the ground set"));
        }
        Ok(Arc::new(AtomicSpace {
            labels,
            weights,
            atoms,
            atom_of,
            atom_mass,
        }))
    }

    /// One atom per label, weights attached to singleton atoms.
    pub fn of_labels(labels: Vec<String>, weights: Vec<Q>) -> Result<Arc<Self>> {
        let atoms = (0..labels.len()).map(|i| alloc::vec![i]).collect();
        AtomicSpace::new(labels, weights, atoms)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn weight(&self, point: usize) -> &Q {
        &self.weights[point]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_points(&self, atom: usize) -> &[usize] {
        &self.atoms[atom]
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point]
    }

    pub fn atom_mass(&self, atom: usize) -> &Q {
        &self.atom_mass[atom]
    }

    pub fn total_mass(&self) -> Q {
        self.atom_mass.iter().sum()
    }

    pub fn is_null_point(&self, point: usize) -> bool {
        self.weights[point].is_zero()
    }

    /// Positive-weight points of an atom.
    pub fn atom_positive_points(&self, atom: usize) -> impl Iterator<Item = usize> + '_ {
        self.atoms[atom]
            .iter()
            .copied()
            .filter(|&p| !self.is_null_point(p))
    }
}

/// Subset of the ground points of an [`AtomicSpace`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    space: Arc<AtomicSpace>,
    bits: Vec<u64>,
}

fn blocks_for(n: usize) -> usize {
    n.div_ceil(64)
}

impl PointSet {
    pub fn empty(space: Arc<AtomicSpace>) -> Self {
        let blocks = blocks_for(space.len());
        PointSet {
            space,
            bits: alloc::vec![0; blocks],
        }
    }

    pub fn full(space: Arc<AtomicSpace>) -> Self {
        let mut s = PointSet::empty(space);
        for p in 0..s.space.len() {
            s.insert(p);
        }
        s
    }

    pub fn from_points(space: Arc<AtomicSpace>, points: &[usize]) -> Result<Self> {
        let mut s = PointSet::empty(space);
        for &p in points {
            if p >= s.space.len() {
                return Err(Error::Invalid("point index out of range"));
            }
            s.insert(p);
        }
        Ok(s)
    }

    /// Set with the given bitmask over the first 64 points; test helper for
    /// exhaustive enumerations.
    pub fn from_mask(space: Arc<AtomicSpace>, mask: u64) -> Self {
        debug_assert!(space.len() <= 64);
        let mut s = PointSet::empty(space);
        for p in 0..s.space.len() {
            if (mask >> p) & 1 == 1 {
                s.insert(p);
            }
        }
        s
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        &self.space
    }

    fn insert(&mut self, p: usize) {
        self.bits[p / 64] |= 1 << (p % 64);
    }

    pub fn contains(&self, p: usize) -> bool {
        (self.bits[p / 64] >> (p % 64)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.space.len()).filter(move |&p| self.contains(p))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Total weight of the points in the set. On measurable sets this is the
    /// measure; elsewhere it is the canonical extension used by the lifting.
    pub fn weight(&self) -> Q {
        self.iter().map(|p| self.space.weight(p)).sum()
    }

    fn check_model(&self, other: &PointSet) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.space != other.space {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &PointSet, f: impl Fn(u64, u64) -> u64) -> Result<PointSet> {
        self.check_model(other)?;
        let mut bits: Vec<u64> = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let tail = (self.space.len() % 64) as u32;
        if tail != 0 {
            if let Some(last) = bits.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(PointSet {
            space: self.space.clone(),
            bits,
        })
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn sym_diff(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> PointSet {
        let full = PointSet::full(self.space.clone());
        full.zip_with(self, |a, b| a & !b).expect("same space")
    }

    pub fn is_subset_of(&self, other: &PointSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Measurable in the completed atom algebra: within every atom the
    /// positive points are all in or all out.
    pub fn is_measurable(&self) -> bool {
        (0..self.space.atom_count()).all(|j| {
            let mut pos = self.space.atom_positive_points(j);
            match pos.next() {
                None => true,
                Some(first) => {
                    let inside = self.contains(first);
                    pos.all(|p| self.contains(p) == inside)
                }
            }
        })
    }

    /// Whether the sets agree up to null points.
    pub fn ae_equal(&self, other: &PointSet) -> Result<bool> {
        Ok(self.sym_diff(other)?.weight().is_zero())
    }
}

/// A vector-valued step section on an atomic space: one value per point,
/// interpreted as an a.e. class (constant on atoms up to null points when
/// valid).
#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    space: Arc<AtomicSpace>,
    values: Vec<Vector>,
}

impl Section {
    pub fn new(space: Arc<AtomicSpace>, values: Vec<Vector>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Invalid("one value per ground point required"));
        }
        let m = values.first().map(Vec::len).unwrap_or(0);
        if m == 0 || values.iter().any(|v| v.len() != m) {
            return Err(Error::DimensionMismatch);
        }
        Ok(Section { space, values })
    }

    /// Scalar section from per-point values.
    pub fn scalar(space: Arc<AtomicSpace>, values: Vec<Q>) -> Result<Self> {
        let values = values.into_iter().map(|x| alloc::vec![x]).collect();
        Section::new(space, values)
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        &self.space
    }

    pub fn dim_out(&self) -> usize {
        self.values[0].len()
    }

    pub fn value(&self, point: usize) -> &Vector {
        &self.values[point]
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// Scalar view when `dim_out == 1`.
    pub fn scalar_value(&self, point: usize) -> &Q {
        &self.values[point][0]
    }

    /// Integral over a point set: the weighted sum of values.
    pub fn integral(&self, set: &PointSet) -> Result<Vector> {
        if set.space() != &self.space {
            return Err(Error::ModelMismatch);
        }
        let mut acc = crate::exact::vzero(self.dim_out());
        for p in set.iter() {
            crate::exact::vadd_assign(
                &mut acc,
                &crate::exact::vscale(self.space.weight(p), &self.values[p]),
            );
        }
        Ok(acc)
    }

    /// Pointwise norm as a scalar section of squared norms (exact).
    pub fn norm_sq_section(&self, norm: Norm) -> Section {
        Section {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .map(|v| alloc::vec![norm.value_sq(v)])
                .collect(),
        }
    }
}
