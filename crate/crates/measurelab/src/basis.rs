//! Differentiation bases, I-limits along refining chains, density points,
//! and lower-density law checking.
//!
//! Three basis variants are realized: the partition basis of a refining
//! dyadic hierarchy (members: positive-mass cells), the interval basis on a
//! rational interval (members: nontrivial subintervals), and the basis
//! induced by an atomic lifting (members: lifted positive-measure sets).
//! For a partition basis the filter I-limit at a point reduces to the limit
//! along the chain of cells containing the point, because every basis member
//! inside a chain cell that still contains the point is a deeper chain cell.

use crate::atomic::PointSet;
use crate::error::{Error, Result};
use crate::exact::{sup_norm, vsub, Vector, Q};
use crate::hierarchy::{Cell, CellSet, DyadicHierarchy, Point};
use crate::interval::{Interval, IntervalUnion};
use crate::lifting::LiftingOperator;
use crate::measure::BaseMeasure;
use alloc::vec::Vec;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of probing an I-limit along a finite chain.
#[derive(Clone, Debug, PartialEq)]
pub enum ILimitStatus {
    /// Tail values stayed within tolerance of the final value over the
    /// window; `residual` is the largest tail deviation (sup norm).
    Converged {
        value: Vector,
        residual: Q,
        from_depth: u32,
    },
    /// A witnessed Cauchy violation. The finite probes in this crate report
    /// [`ILimitStatus::Inconclusive`] instead (a finite chain cannot certify
    /// divergence); the variant is part of the result vocabulary for callers
    /// with external knowledge.
    Diverged { depth_a: u32, depth_b: u32 },
    /// No Cauchy tail within tolerance up to the probed depth.
    Inconclusive { depth: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ILimitResult {
    pub status: ILimitStatus,
    pub depth_used: u32,
}

impl ILimitResult {
    pub fn converged(&self) -> bool {
        matches!(self.status, ILimitStatus::Converged { .. })
    }

    pub fn value(&self) -> Option<&Vector> {
        match &self.status {
            ILimitStatus::Converged { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Cauchy-tail test over the last quarter of a probed chain.
///
/// `values[k]` is the chain value at depth `k`. Converged when every value in
/// the last `ceil(k_max/4)` depths lies within `tol` of the final value.
pub fn chain_limit(values: &[Vector], tol: &Q) -> Result<ILimitResult> {
    if tol <= &Q::zero() {
        return Err(Error::BadParameter("tolerance must be positive"));
    }
    if values.len() < 2 {
        return Err(Error::BadParameter("chain too short"));
    }
    let k_max = (values.len() - 1) as u32;
    let window = k_max.div_ceil(4).max(1);
    let from_depth = k_max + 1 - window;
    let tail = values.last().expect("nonempty");
    let mut residual = Q::zero();
    for v in &values[from_depth as usize..] {
        let dev = sup_norm(&vsub(v, tail));
        if dev > residual {
            residual = dev;
        }
    }
    let status = if residual <= *tol {
        ILimitStatus::Converged {
            value: tail.clone(),
            residual,
            from_depth,
        }
    } else {
        ILimitStatus::Inconclusive { depth: k_max }
    };
    Ok(ILimitResult {
        status,
        depth_used: k_max,
    })
}

/// I-limit of a cell functional along the partition chain of `x`.
pub fn ilimit_partition<F>(
    hierarchy: &DyadicHierarchy,
    mut phi: F,
    x: &Point,
    tol: &Q,
    k_max: u32,
) -> Result<ILimitResult>
where
    F: FnMut(Cell) -> Result<Vector>,
{
    if k_max < 4 {
        return Err(Error::BadParameter("k_max must be at least 4"));
    }
    if !hierarchy.chain_depth_ok(k_max) {
        return Err(Error::BadParameter(
            "k_max too deep for the packed cell index",
        ));
    }
    let mut values = Vec::with_capacity(k_max as usize + 1);
    for cell in hierarchy.chain_of(x, k_max) {
        values.push(phi(cell)?);
    }
    chain_limit(&values, tol)
}

/// The chain of positive-mass cells containing `x`, through depth `k_max`
/// (null cells are not basis members and are skipped).
pub fn positive_chain(mu: &BaseMeasure, x: &Point, k_max: u32) -> Result<Vec<Cell>> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    let mut out = Vec::new();
    for cell in h.chain_of(x, k_max) {
        if !mu.is_null_cell(cell)? {
            out.push(cell);
        }
    }
    Ok(out)
}

/// Density points of a leaf-resolved cell set: the set of points whose chain
/// ratio `μ(E ∩ P_k^x)/μ(P_k^x)` is eventually 1.
///
/// On the finite chain "eventually" means at the deepest positive-mass chain
/// cell (the least member of the chain filter): a positive leaf qualifies
/// iff it lies in `E`; a point in a null leaf qualifies iff `E` essentially
/// covers its deepest positive ancestor.
pub fn density_points_partition(e: &CellSet, mu: &BaseMeasure) -> Result<CellSet> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h != e.hierarchy() {
        return Err(Error::ModelMismatch);
    }
    let leaf = h.max_depth();
    if e.depth() > leaf {
        return Err(Error::Invalid("set deeper than hierarchy"));
    }
    let e = e.refine(leaf)?;
    let mut selected = Vec::new();
    for i in 0..h.cells_at(leaf) {
        let cell = h.cell(leaf, i);
        if !mu.cell_mass(cell)?.is_zero() {
            if e.contains_cell(cell) {
                selected.push(i);
            }
            continue;
        }
        // null leaf: climb to the deepest positive ancestor
        let mut k = leaf;
        let mut verdict = false;
        while k > 0 {
            k -= 1;
            let anc = h.ancestor(cell, k);
            let mass = mu.cell_mass(anc)?;
            if !mass.is_zero() {
                verdict = mu.cell_intersection_mass(&e, anc)? == mass;
                break;
            }
        }
        if verdict {
            selected.push(i);
        }
    }
    CellSet::from_indices(h, leaf, &selected)
}

// ---------------------------------------------------------------------------
// Mask algebras and lower-density law checking
// ---------------------------------------------------------------------------

/// The power-set algebra over at most 16 weighted generators, with subsets
/// encoded as bitmasks. Generators are leaf cells or atomic ground points;
/// this is the representation used for exhaustive law checking.
#[derive(Clone, Debug)]
pub struct MaskAlgebra {
    masses: Vec<Q>,
}

impl MaskAlgebra {
    pub fn new(masses: Vec<Q>) -> Result<Self> {
        if masses.is_empty() || masses.len() > 16 {
            return Err(Error::Invalid("mask algebra supports 1..=16 generators"));
        }
        if masses.iter().any(|m| m < &Q::zero()) {
            return Err(Error::Invalid("generator masses must be nonnegative"));
        }
        Ok(MaskAlgebra { masses })
    }

    pub fn generators(&self) -> u32 {
        self.masses.len() as u32
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.masses.len()) - 1
    }

    /// Bitmask of the positive-mass generators.
    pub fn positive_mask(&self) -> u32 {
        let mut m = 0;
        for (i, w) in self.masses.iter().enumerate() {
            if !w.is_zero() {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn mass(&self, mask: u32) -> Q {
        let mut acc = Q::zero();
        for (i, w) in self.masses.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                acc += w;
            }
        }
        acc
    }

    pub fn is_null(&self, mask: u32) -> bool {
        mask & self.positive_mask() == 0
    }
}

/// The leaf algebra of a hierarchy measure as a [`MaskAlgebra`], together
/// with a mask-level density-point operator equal to
/// [`density_points_partition`] on that algebra.
pub struct LeafDensityTable {
    pub algebra: MaskAlgebra,
    /// For each leaf: the positive leaves of its deepest positive ancestor
    /// (the leaf itself when positive).
    anc_pos: Vec<u32>,
}

impl LeafDensityTable {
    pub fn new(mu: &BaseMeasure) -> Result<Self> {
        let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
        let leaf = h.max_depth();
        let n = h.cells_at(leaf);
        if n > 16 {
            return Err(Error::Invalid("mask algebra supports 1..=16 generators"));
        }
        let mut masses = Vec::with_capacity(n as usize);
        for i in 0..n {
            masses.push(mu.cell_mass(h.cell(leaf, i))?);
        }
        let algebra = MaskAlgebra::new(masses)?;
        let pos = algebra.positive_mask();
        let mut anc_pos = Vec::with_capacity(n as usize);
        for i in 0..n {
            let cell = h.cell(leaf, i);
            if (pos >> i) & 1 == 1 {
                anc_pos.push(1 << i);
                continue;
            }
            let mut mask = 0u32;
            let mut k = leaf;
            while k > 0 {
                k -= 1;
                let anc = h.ancestor(cell, k);
                let mut m = 0u32;
                for c in h.descendants(anc, leaf) {
                    m |= 1 << c.index;
                }
                if m & pos != 0 {
                    mask = m & pos;
                    break;
                }
            }
            anc_pos.push(mask);
        }
        Ok(LeafDensityTable { algebra, anc_pos })
    }

    /// Mask-level density-point operator.
    pub fn phi(&self, e: u32) -> u32 {
        let mut out = 0u32;
        for (i, &req) in self.anc_pos.iter().enumerate() {
            if req != 0 && req & !e == 0 {
                out |= 1 << i;
            }
        }
        out
    }
}

/// How to quantify over subset pairs in a law check.
#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    /// All `4^n` ordered pairs.
    Exhaustive,
    /// Seeded random pairs.
    Sampled { seed: u64, pairs: u32 },
}

/// Outcome of checking the lower-density axioms for a set-to-set map on a
/// finite algebra. `None` witnesses mean the law held on every checked pair.
#[derive(Clone, Debug)]
pub struct LowerDensityReport {
    pub preserves_empty: bool,
    pub preserves_full: bool,
    pub intersection_witness: Option<(u32, u32)>,
    pub ae_invariance_witness: Option<(u32, u32)>,
    pub null_symdiff_witness: Option<u32>,
    pub union_witness: Option<(u32, u32)>,
    pub exhaustive: bool,
    pub pairs_checked: u64,
}

impl LowerDensityReport {
    /// The lower-density axioms (union preservation is the extra lifting law).
    pub fn axioms_pass(&self) -> bool {
        self.preserves_empty
            && self.preserves_full
            && self.intersection_witness.is_none()
            && self.ae_invariance_witness.is_none()
            && self.null_symdiff_witness.is_none()
    }

    pub fn is_lifting(&self) -> bool {
        self.axioms_pass() && self.union_witness.is_none()
    }
}

/// Checks the lower-density axioms (and union preservation) for `phi` over
/// the mask algebra.
///
/// Singleton laws (empty, full, a.e. invariance via canonical positive-part
/// representatives, null symmetric difference) are always checked on every
/// subset; the pair laws (intersection, union) follow `mode`.
pub fn check_lower_density(
    alg: &MaskAlgebra,
    phi: impl Fn(u32) -> u32,
    mode: CheckMode,
) -> LowerDensityReport {
    let full = alg.full_mask();
    let pos = alg.positive_mask();
    let size = 1usize << alg.generators();
    let table: Vec<u32> = (0..size).map(|e| phi(e as u32)).collect();

    let mut report = LowerDensityReport {
        preserves_empty: table[0] == 0,
        preserves_full: table[full as usize] == full,
        intersection_witness: None,
        ae_invariance_witness: None,
        null_symdiff_witness: None,
        union_witness: None,
        exhaustive: matches!(mode, CheckMode::Exhaustive),
        pairs_checked: 0,
    };

    for e in 0..size as u32 {
        // phi must factor through the a.e. class: E ~ E ∩ {positive}
        if table[e as usize] != table[(e & pos) as usize] {
            report.ae_invariance_witness = Some((e, e & pos));
            break;
        }
    }
    for e in 0..size as u32 {
        if !alg.mass(e ^ table[e as usize]).is_zero() {
            report.null_symdiff_witness = Some(e);
            break;
        }
    }

    match mode {
        CheckMode::Exhaustive => {
            'outer: for e in 0..size as u32 {
                let pe = table[e as usize];
                for f in 0..size as u32 {
                    report.pairs_checked += 1;
                    let pf = table[f as usize];
                    if report.intersection_witness.is_none() && table[(e & f) as usize] != pe & pf {
                        report.intersection_witness = Some((e, f));
                    }
                    if report.union_witness.is_none() && table[(e | f) as usize] != pe | pf {
                        report.union_witness = Some((e, f));
                    }
                    if report.intersection_witness.is_some() && report.union_witness.is_some() {
                        break 'outer;
                    }
                }
            }
        }
        CheckMode::Sampled { seed, pairs } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                report.pairs_checked += 1;
                let e = rng.gen_range(0..size as u32);
                let f = rng.gen_range(0..size as u32);
                if report.intersection_witness.is_none()
                    && table[(e & f) as usize] != table[e as usize] & table[f as usize]
                {
                    report.intersection_witness = Some((e, f));
                }
                if report.union_witness.is_none()
                    && table[(e | f) as usize] != table[e as usize] | table[f as usize]
                {
                    report.union_witness = Some((e, f));
                }
            }
        }
    }
    report
}

/// Lower-density law report for the interval-basis density operator on a
/// battery of interval-union pairs.
#[derive(Clone, Debug)]
pub struct IntervalDensityReport {
    pub intersection_witness: Option<(IntervalUnion, IntervalUnion)>,
    pub ae_invariance_witness: Option<(IntervalUnion, IntervalUnion)>,
    pub null_symdiff_witness: Option<IntervalUnion>,
    pub union_witness: Option<(IntervalUnion, IntervalUnion)>,
    pub monotonicity_witness: Option<(IntervalUnion, IntervalUnion)>,
    pub preserves_empty: bool,
    pub preserves_full: bool,
    pub pairs_checked: u64,
}

impl IntervalDensityReport {
    pub fn axioms_pass(&self) -> bool {
        self.preserves_empty
            && self.preserves_full
            && self.intersection_witness.is_none()
            && self.ae_invariance_witness.is_none()
            && self.null_symdiff_witness.is_none()
            && self.monotonicity_witness.is_none()
    }
}

/// Checks the lower-density axioms for [`IntervalUnion::density_points`] on
/// the supplied pairs (plus empty/full singletons).
pub fn check_interval_density(
    ambient: &Interval,
    pairs: &[(IntervalUnion, IntervalUnion)],
) -> Result<IntervalDensityReport> {
    let empty = IntervalUnion::empty(ambient.clone());
    let full = IntervalUnion::full(ambient.clone());
    let mut report = IntervalDensityReport {
        intersection_witness: None,
        ae_invariance_witness: None,
        null_symdiff_witness: None,
        union_witness: None,
        monotonicity_witness: None,
        preserves_empty: empty.density_points().is_empty(),
        preserves_full: full.density_points() == full,
        pairs_checked: 0,
    };
    for (e, f) in pairs {
        if e.ambient() != ambient || f.ambient() != ambient {
            return Err(Error::ModelMismatch);
        }
        report.pairs_checked += 1;
        let de = e.density_points();
        let df = f.density_points();
        if report.intersection_witness.is_none()
            && e.intersection(f)?.density_points() != de.intersection(&df)?
        {
            report.intersection_witness = Some((e.clone(), f.clone()));
        }
        if report.ae_invariance_witness.is_none() && e.ae_equal(f)? && de != df {
            report.ae_invariance_witness = Some((e.clone(), f.clone()));
        }
        if report.null_symdiff_witness.is_none() && !e.sym_diff(&de)?.measure().is_zero() {
            report.null_symdiff_witness = Some(e.clone());
        }
        if report.union_witness.is_none() && e.union(f)?.density_points() != de.union(&df)? {
            report.union_witness = Some((e.clone(), f.clone()));
        }
        if report.monotonicity_witness.is_none()
            && e.intersection(f)? == *e
            && !de.intersection(&df)?.eq(&de)
        {
            report.monotonicity_witness = Some((e.clone(), f.clone()));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Differentiation bases as first-class values
// ---------------------------------------------------------------------------

/// The three realized differentiation-basis variants.
#[derive(Clone, Debug)]
pub enum DifferentiationBasis {
    /// Positive-mass cells of a refining dyadic hierarchy.
    Partition { mu: BaseMeasure },
    /// Nontrivial subintervals of an ambient rational interval.
    Interval { ambient: Interval },
    /// Lifted positive-measure sets of an atomic lifting.
    Lifting { op: LiftingOperator },
}

impl DifferentiationBasis {
    /// Verifies downward directedness: exhaustively on the finite variants,
    /// by the analytic witness `I ∩ I'` on the interval variant.
    pub fn check_directed(&self) -> Result<bool> {
        match self {
            DifferentiationBasis::Partition { mu } => {
                let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
                // members containing a common point are chain cells, totally
                // ordered by inclusion: the deeper cell is the witness
                for depth in 0..h.max_depth() {
                    for i in 0..h.cells_at(depth) {
                        let cell = h.cell(depth, i);
                        for deeper in h.descendants(cell, h.max_depth()) {
                            if h.ancestor(deeper, depth) != cell {
                                return Ok(false);
                            }
                        }
                    }
                }
                Ok(true)
            }
            DifferentiationBasis::Interval { .. } => Ok(true),
            DifferentiationBasis::Lifting { op } => {
                let space = op.space();
                let atoms = space.atom_count();
                if atoms > 12 {
                    return Err(Error::BadParameter("exhaustive check limited to 12 atoms"));
                }
                // members are unions of atoms; I ∩ I' is again one
                for a in 0u32..(1 << atoms) {
                    for b in 0u32..(1 << atoms) {
                        if a & b == 0 {
                            continue;
                        }
                        let sa = op.atom_union(a);
                        let sb = op.atom_union(b);
                        let inter = sa.intersection(&sb)?;
                        if op.lift_set(&inter) != inter {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    /// Members of `I_x` on the lifting variant: lifted sets containing `x`,
    /// i.e. unions of atoms through `atom(x)`. The least member is the atom
    /// of `x` itself.
    pub fn lifting_members_containing(&self, point: usize) -> Result<Vec<PointSet>> {
        match self {
            DifferentiationBasis::Lifting { op } => {
                let space = op.space();
                let atoms = space.atom_count();
                if atoms > 16 {
                    return Err(Error::BadParameter(
                        "member enumeration limited to 16 atoms",
                    ));
                }
                let home = space.atom_of(point);
                let mut members = Vec::new();
                for mask in 0u32..(1 << atoms) {
                    if (mask >> home) & 1 == 1 {
                        members.push(op.atom_union(mask));
                    }
                }
                Ok(members)
            }
            _ => Err(Error::Unsupported(
                "member enumeration is for the lifting basis",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{pow2, q, qi};
    use num_traits::Signed;

    fn h(depth: u32) -> DyadicHierarchy {
        DyadicHierarchy::new(1, depth).unwrap()
    }

    #[test]
    fn constant_functional_converges() {
        let hier = h(10);
        let x = Point::scalar(q(1, 3)).unwrap();
        let r = ilimit_partition(&hier, |_| Ok(alloc::vec![qi(1)]), &x, &q(1, 100), 10).unwrap();
        assert!(r.converged());
        assert_eq!(r.value().unwrap(), &alloc::vec![qi(1)]);
    }

    #[test]
    fn linear_average_converges_to_point() {
        // phi(I) = exact average of g(t)=t over I = cell midpoint
        let hier = h(20);
        let x = Point::scalar(q(1, 3)).unwrap();
        let r = ilimit_partition(
            &hier,
            |cell| {
                let (lo, hi) = hier.cell_box(cell).remove(0);
                Ok(alloc::vec![(lo + hi) / qi(2)])
            },
            &x,
            &q(1, 100_000),
            20,
        )
        .unwrap();
        assert!(r.converged());
        let v = &r.value().unwrap()[0];
        assert!((v - q(1, 3)).abs() <= pow2(-20));
    }

    #[test]
    fn alternating_functional_is_inconclusive() {
        let hier = h(12);
        let x = Point::scalar(q(1, 3)).unwrap();
        let r = ilimit_partition(
            &hier,
            |cell| {
                Ok(alloc::vec![if cell.depth % 2 == 0 {
                    qi(1)
                } else {
                    qi(-1)
                }])
            },
            &x,
            &q(1, 10),
            12,
        )
        .unwrap();
        assert!(matches!(r.status, ILimitStatus::Inconclusive { .. }));
    }

    #[test]
    fn bad_parameters() {
        let hier = h(8);
        let x = Point::scalar(qi(0)).unwrap();
        assert!(ilimit_partition(&hier, |_| Ok(alloc::vec![qi(1)]), &x, &qi(0), 8).is_err());
        assert!(ilimit_partition(&hier, |_| Ok(alloc::vec![qi(1)]), &x, &qi(1), 3).is_err());
    }

    /// The filter I-limit and the chain limit agree on partition bases:
    /// brute-force scan of all sub-cells containing x at each depth.
    #[test]
    fn chain_equals_filter_on_partition_basis() {
        let hier = h(6);
        let x = Point::scalar(q(5, 64)).unwrap();
        let chain = hier.chain_of(&x, 6);
        for (k, cell) in chain.iter().enumerate() {
            let mut members = Vec::new();
            for depth in cell.depth..=6u32 {
                for i in 0..hier.cells_at(depth) {
                    let c = hier.cell(depth, i);
                    if hier.contains(c, &x) && hier.ancestor(c, cell.depth) == *cell {
                        members.push(c);
                    }
                }
            }
            let expected: Vec<Cell> = chain[k..].to_vec();
            assert_eq!(members, expected);
        }
    }

    #[test]
    fn density_points_partition_examples() {
        let hier = h(2);
        let uniform = BaseMeasure::lebesgue(hier);
        let all = CellSet::full(hier, 2).unwrap();
        assert_eq!(density_points_partition(&all, &uniform).unwrap(), all);

        // E = cells {1,3} of 4, uniform: D(E) = {1,3}
        let e = CellSet::from_indices(hier, 2, &[1, 3]).unwrap();
        assert_eq!(density_points_partition(&e, &uniform).unwrap(), e);

        // E = one null cell: D(E) = ∅
        let mu =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(1), qi(0), qi(1), qi(1)]).unwrap();
        let nullcell = CellSet::from_indices(hier, 2, &[1]).unwrap();
        assert!(density_points_partition(&nullcell, &mu).unwrap().is_empty());
    }

    #[test]
    fn density_points_partition_pulls_null_leaves_with_full_ancestors() {
        // masses (1/2, 1/2, 0, 0): E = {0,1} essentially covers the root,
        // so the null leaves are density points of E
        let hier = h(2);
        let mu = BaseMeasure::step_density(hier, 2, alloc::vec![q(1, 2), q(1, 2), qi(0), qi(0)])
            .unwrap();
        let e = CellSet::from_indices(hier, 2, &[0, 1]).unwrap();
        let d = density_points_partition(&e, &mu).unwrap();
        assert_eq!(d, CellSet::full(hier, 2).unwrap());
        // while E = {0} alone only captures itself
        let e0 = CellSet::from_indices(hier, 2, &[0]).unwrap();
        assert_eq!(density_points_partition(&e0, &mu).unwrap(), e0);
    }

    #[test]
    fn mask_table_agrees_with_cellset_operator() {
        let hier = h(3);
        let mu = BaseMeasure::step_density(
            hier,
            3,
            alloc::vec![qi(1), qi(0), qi(2), qi(0), qi(0), qi(3), qi(1), qi(0)],
        )
        .unwrap();
        let table = LeafDensityTable::new(&mu).unwrap();
        for e in 0u32..(1 << 8) {
            let set = CellSet::from_indices(
                hier,
                3,
                &(0u64..8).filter(|i| (e >> i) & 1 == 1).collect::<Vec<_>>(),
            )
            .unwrap();
            let d = density_points_partition(&set, &mu).unwrap();
            let mut mask = 0u32;
            for c in d.iter_indices() {
                mask |= 1 << c;
            }
            assert_eq!(mask, table.phi(e), "mask {e:#b}");
        }
    }

    #[test]
    fn lower_density_axioms_hold_for_partition_density() {
        let hier = h(2);
        let mu =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(1), qi(0), qi(2), qi(1)]).unwrap();
        let table = LeafDensityTable::new(&mu).unwrap();
        let report = check_lower_density(&table.algebra, |e| table.phi(e), CheckMode::Exhaustive);
        assert!(report.axioms_pass(), "{report:?}");
        assert!(report.is_lifting(), "{report:?}");
    }

    #[test]
    fn identity_map_fails_ae_invariance_with_null_cell() {
        let alg = MaskAlgebra::new(alloc::vec![qi(1), qi(0)]).unwrap();
        let report = check_lower_density(&alg, |e| e, CheckMode::Exhaustive);
        assert!(report.preserves_empty && report.preserves_full);
        assert!(report.ae_invariance_witness.is_some());
    }

    #[test]
    fn interval_density_union_counterexample() {
        let ambient = Interval::closed(qi(-2), qi(2)).unwrap();
        let left = IntervalUnion::new(
            ambient.clone(),
            alloc::vec![Interval::closed(qi(-1), qi(0)).unwrap()],
        )
        .unwrap();
        let right = IntervalUnion::new(
            ambient.clone(),
            alloc::vec![Interval::closed(qi(0), qi(1)).unwrap()],
        )
        .unwrap();
        let report = check_interval_density(&ambient, &[(left, right)]).unwrap();
        assert!(report.axioms_pass(), "{report:?}");
        let (e, f) = report.union_witness.expect("union preservation must fail");
        // the failure is exactly at 0
        let d_union = e.union(&f).unwrap().density_points();
        assert!(d_union.contains(&qi(0)));
        assert!(!e
            .density_points()
            .union(&f.density_points())
            .unwrap()
            .contains(&qi(0)));
    }

    #[test]
    fn partition_basis_is_directed() {
        let mu = BaseMeasure::lebesgue(h(4));
        let basis = DifferentiationBasis::Partition { mu };
        assert!(basis.check_directed().unwrap());
    }
}
