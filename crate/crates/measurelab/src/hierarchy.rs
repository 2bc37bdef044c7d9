//! Refining dyadic partitions of `[0,1)^d` and bitset-backed cell sets.
//!
//! At depth `k` the unit box splits into `2^(k*d)` half-open cells of side
//! `2^-k`. Cells are half-open so every point lies in exactly one cell per
//! depth; consequently each point has a unique refining chain of cells, one
//! per depth, and depth-(k+1) cells sit inside exactly one depth-k cell.

use crate::error::{Error, Result};
use crate::exact::{pow2, Q};
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

/// Guard on `depth * dim` so bitsets stay comfortably small.
pub const MAX_DEPTH_BITS: u32 = 26;

/// A refining family of dyadic partitions of `[0,1)^d`, `d` in `{1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicHierarchy {
    dim: u8,
    max_depth: u32,
}

impl DyadicHierarchy {
    pub fn new(dim: u8, max_depth: u32) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Invalid("hierarchy dimension must be 1 or 2"));
        }
        if max_depth == 0 || max_depth * dim as u32 > MAX_DEPTH_BITS {
            return Err(Error::Invalid("hierarchy depth out of range"));
        }
        Ok(DyadicHierarchy { dim, max_depth })
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    /// Leaf depth: the finest partition carried by this hierarchy.
    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Number of cells at depth `k`.
    pub fn cells_at(&self, depth: u32) -> u64 {
        1u64 << (depth * self.dim as u32)
    }

    /// Exact volume of a depth-`k` cell.
    pub fn cell_volume(&self, depth: u32) -> Q {
        pow2(-((depth * self.dim as u32) as i64))
    }

    /// Squared Euclidean diameter of a depth-`k` cell: `d * 2^-2k`.
    pub fn cell_diameter_sq(&self, depth: u32) -> Q {
        crate::exact::qi(self.dim as i64) * pow2(-2 * depth as i64)
    }

    pub fn cell(&self, depth: u32, index: u64) -> Cell {
        debug_assert!(index < self.cells_at(depth));
        Cell { depth, index }
    }

    /// The unique depth-`k` cell containing `point`.
    pub fn cell_of(&self, point: &Point, depth: u32) -> Cell {
        let mut coords = [0u64; 2];
        for (j, x) in point.coords.iter().enumerate() {
            // floor(x * 2^k), exact
            let scaled = x.numer() << (depth as usize);
            coords[j] = scaled.div_floor(x.denom()).to_u64().unwrap();
        }
        self.from_coords(depth, &coords[..self.dim as usize])
    }

    /// The chain `P_0 ⊃ P_1 ⊃ …` of cells containing `point`, through `k_max`.
    /// Chains may run deeper than the hierarchy's own partitions (scans use
    /// this); the packed index caps the depth at 30 bits per axis.
    pub fn chain_of(&self, point: &Point, k_max: u32) -> Vec<Cell> {
        debug_assert!(self.chain_depth_ok(k_max));
        (0..=k_max).map(|k| self.cell_of(point, k)).collect()
    }

    /// Whether depth-`k` cell indices fit the packed representation.
    pub fn chain_depth_ok(&self, k: u32) -> bool {
        k * self.dim as u32 <= 60
    }

    /// Row-major packing of per-axis cell coordinates.
    pub fn from_coords(&self, depth: u32, coords: &[u64]) -> Cell {
        debug_assert_eq!(coords.len(), self.dim as usize);
        let index = match self.dim {
            1 => coords[0],
            _ => coords[0] | (coords[1] << depth),
        };
        Cell { depth, index }
    }

    pub fn coords(&self, cell: Cell) -> [u64; 2] {
        match self.dim {
            1 => [cell.index, 0],
            _ => {
                let mask = (1u64 << cell.depth) - 1;
                [cell.index & mask, cell.index >> cell.depth]
            }
        }
    }

    /// Ancestor of `cell` at the shallower depth `k`.
    pub fn ancestor(&self, cell: Cell, k: u32) -> Cell {
        debug_assert!(k <= cell.depth);
        let shift = cell.depth - k;
        let c = self.coords(cell);
        let coords = [c[0] >> shift, c[1] >> shift];
        self.from_coords(k, &coords[..self.dim as usize])
    }

    /// Children of `cell` at depth `cell.depth + 1`, in index order.
    pub fn children(&self, cell: Cell) -> Vec<Cell> {
        self.descendants(cell, cell.depth + 1)
    }

    /// All descendants of `cell` at depth `k >= cell.depth`, in index order.
    pub fn descendants(&self, cell: Cell, k: u32) -> Vec<Cell> {
        debug_assert!(k >= cell.depth);
        let shift = k - cell.depth;
        let side = 1u64 << shift;
        let c = self.coords(cell);
        let mut out = Vec::new();
        match self.dim {
            1 => {
                let base = c[0] << shift;
                for i in 0..side {
                    out.push(Cell {
                        depth: k,
                        index: base + i,
                    });
                }
            }
            _ => {
                for y in 0..side {
                    for x in 0..side {
                        out.push(self.from_coords(k, &[(c[0] << shift) + x, (c[1] << shift) + y]));
                    }
                }
            }
        }
        out
    }

    /// Lower corner of `cell`, exact.
    pub fn lower_corner(&self, cell: Cell) -> Vec<Q> {
        let c = self.coords(cell);
        (0..self.dim as usize)
            .map(|j| Q::new(BigInt::from(c[j]), BigInt::one() << cell.depth as usize))
            .collect()
    }

    /// Half-open interval `[lo, lo + 2^-k)` per axis, as `(lo, hi)` pairs.
    pub fn cell_box(&self, cell: Cell) -> Vec<(Q, Q)> {
        let side = pow2(-(cell.depth as i64));
        self.lower_corner(cell)
            .into_iter()
            .map(|lo| {
                let hi = &lo + &side;
                (lo, hi)
            })
            .collect()
    }

    pub fn contains(&self, cell: Cell, point: &Point) -> bool {
        self.cell_of(point, cell.depth) == cell
    }
}

/// A single half-open dyadic cell, identified by depth and packed index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub depth: u32,
    pub index: u64,
}

/// A point of `[0,1)^d` with exact rational coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<Q>,
}

impl Point {
    pub fn new(coords: Vec<Q>) -> Result<Self> {
        if coords.is_empty() || coords.len() > 2 {
            return Err(Error::Invalid("point dimension must be 1 or 2"));
        }
        for x in &coords {
            if x.is_negative() || x >= &Q::one() {
                return Err(Error::Invalid("point coordinates must lie in [0,1)"));
            }
        }
        Ok(Point { coords })
    }

    pub fn scalar(x: Q) -> Result<Self> {
        Point::new(alloc::vec![x])
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A point whose coordinates have power-of-two denominators: `num[j] / 2^depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicPoint {
    pub num: Vec<u64>,
    pub depth: u32,
}

impl DyadicPoint {
    pub fn new(num: Vec<u64>, depth: u32) -> Result<Self> {
        if num.is_empty() || num.len() > 2 {
            return Err(Error::Invalid("point dimension must be 1 or 2"));
        }
        if depth > 62 {
            return Err(Error::Invalid("dyadic depth out of range"));
        }
        let bound = 1u64 << depth;
        if num.iter().any(|&n| n >= bound) {
            return Err(Error::Invalid("dyadic point outside [0,1)^d"));
        }
        Ok(DyadicPoint { num, depth })
    }

    pub fn to_point(&self) -> Point {
        let den = BigInt::one() << self.depth as usize;
        Point {
            coords: self
                .num
                .iter()
                .map(|&n| Q::new(BigInt::from(n), den.clone()))
                .collect(),
        }
    }
}

/// Subset of the depth-`k` partition, as a bitset over cell indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    hierarchy: DyadicHierarchy,
    depth: u32,
    bits: Vec<u64>,
}

fn blocks_for(n: u64) -> usize {
    n.div_ceil(64) as usize
}

impl CellSet {
    pub fn empty(hierarchy: DyadicHierarchy, depth: u32) -> Result<Self> {
        if depth > hierarchy.max_depth() {
            return Err(Error::Invalid("cell set deeper than hierarchy"));
        }
        let n = hierarchy.cells_at(depth);
        Ok(CellSet {
            hierarchy,
            depth,
            bits: alloc::vec![0; blocks_for(n)],
        })
    }

    pub fn full(hierarchy: DyadicHierarchy, depth: u32) -> Result<Self> {
        let mut s = CellSet::empty(hierarchy, depth)?;
        let n = hierarchy.cells_at(depth);
        for i in 0..n {
            s.insert_index(i);
        }
        Ok(s)
    }

    pub fn from_indices(hierarchy: DyadicHierarchy, depth: u32, idx: &[u64]) -> Result<Self> {
        let mut s = CellSet::empty(hierarchy, depth)?;
        let n = hierarchy.cells_at(depth);
        for &i in idx {
            if i >= n {
                return Err(Error::Invalid("cell index out of range"));
            }
            s.insert_index(i);
        }
        Ok(s)
    }

    pub fn hierarchy(&self) -> DyadicHierarchy {
        self.hierarchy
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn insert_index(&mut self, i: u64) {
        self.bits[(i / 64) as usize] |= 1u64 << (i % 64);
    }

    pub fn contains_index(&self, i: u64) -> bool {
        (self.bits[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        debug_assert_eq!(cell.depth, self.depth);
        self.contains_index(cell.index)
    }

    pub fn len(&self) -> u64 {
        self.bits.iter().map(|b| b.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = u64> + '_ {
        let n = self.hierarchy.cells_at(self.depth);
        (0..n).filter(move |&i| self.contains_index(i))
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let depth = self.depth;
        self.iter_indices().map(move |index| Cell { depth, index })
    }

    /// The same set re-expressed at a deeper depth; exact.
    pub fn refine(&self, depth: u32) -> Result<CellSet> {
        if depth < self.depth {
            return Err(Error::Invalid("refinement must not decrease depth"));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        let mut out = CellSet::empty(self.hierarchy, depth)?;
        for cell in self.iter_cells() {
            for c in self.hierarchy.descendants(cell, depth) {
                out.insert_index(c.index);
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &CellSet, f: impl Fn(u64, u64) -> u64) -> Result<CellSet> {
        if self.hierarchy != other.hierarchy {
            return Err(Error::ModelMismatch);
        }
        let depth = self.depth.max(other.depth);
        let a = self.refine(depth)?;
        let b = other.refine(depth)?;
        let n = self.hierarchy.cells_at(depth);
        let mut bits: Vec<u64> = a.bits.iter().zip(&b.bits).map(|(&x, &y)| f(x, y)).collect();
        // mask tail bits beyond the cell count
        let tail = (n % 64) as u32;
        if tail != 0 {
            if let Some(last) = bits.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        Ok(CellSet {
            hierarchy: self.hierarchy,
            depth,
            bits,
        })
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn sym_diff(&self, other: &CellSet) -> Result<CellSet> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> CellSet {
        let full = CellSet::full(self.hierarchy, self.depth).expect("depth already validated");
        full.zip_with(self, |a, b| a & !b).expect("same model")
    }

    pub fn is_subset_of(&self, other: &CellSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }
}
