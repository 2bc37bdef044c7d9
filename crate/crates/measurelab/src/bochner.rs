//! Simple maps, Bochner integration, shrinking-cell averages, Lebesgue
//! points, precise representatives, and finite-dimensional Banach bundles.
//!
//! The representable map classes are those the tests can drive exactly:
//! simple maps (finitely many pieces), step sections on atomic spaces, and
//! evaluators carrying an exact cell-integral interface (polynomials). For
//! evaluators without an exact interface a composite midpoint quadrature is
//! used, which is the single floating-point path in the crate.

use crate::atomic::{AtomicSpace, Section};
use crate::error::{Error, Result};
use crate::exact::{self, q_from_f64, vadd_assign, vscale, vsub, vzero, Norm, Vector, Q};
use crate::hierarchy::{Cell, CellSet, DyadicHierarchy, Point};
use crate::measure::BaseMeasure;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_traits::{One, ToPrimitive, Zero};

/// A vector-valued simple map on a hierarchy: finitely many pairwise
/// disjoint cell sets with a constant value each, zero off their union.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleMap {
    hierarchy: DyadicHierarchy,
    dim_out: usize,
    pieces: Vec<(CellSet, Vector)>,
}

impl SimpleMap {
    pub fn new(hierarchy: DyadicHierarchy, pieces: Vec<(CellSet, Vector)>) -> Result<Self> {
        let dim_out = pieces.first().map(|(_, v)| v.len()).unwrap_or(1);
        if dim_out == 0 {
            return Err(Error::DimensionMismatch);
        }
        for (set, v) in &pieces {
            if set.hierarchy() != hierarchy {
                return Err(Error::ModelMismatch);
            }
            if v.len() != dim_out {
                return Err(Error::DimensionMismatch);
            }
        }
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if !pieces[i].0.intersection(&pieces[j].0)?.is_empty() {
                    return Err(Error::Invalid(
                        "simple-map pieces must be pairwise disjoint",
                    ));
                }
            }
        }
        Ok(SimpleMap {
            hierarchy,
            dim_out,
            pieces,
        })
    }

    /// Constant value on the whole space.
    pub fn constant(hierarchy: DyadicHierarchy, value: Vector) -> Result<Self> {
        let full = CellSet::full(hierarchy, 0)?;
        SimpleMap::new(hierarchy, alloc::vec![(full, value)])
    }

    /// Dense per-cell values at a fixed depth (zero values are dropped into
    /// the implicit background).
    pub fn from_cell_values(
        hierarchy: DyadicHierarchy,
        depth: u32,
        values: &[Vector],
    ) -> Result<Self> {
        if values.len() as u64 != hierarchy.cells_at(depth) {
            return Err(Error::Invalid("one value per cell required"));
        }
        // group equal values into shared pieces, in first-seen order
        let mut groups: Vec<(Vector, Vec<u64>)> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if v.iter().all(Q::is_zero) {
                continue;
            }
            match groups.iter_mut().find(|(g, _)| g == v) {
                Some((_, idx)) => idx.push(i as u64),
                None => groups.push((v.clone(), alloc::vec![i as u64])),
            }
        }
        let mut pieces = Vec::with_capacity(groups.len());
        for (v, idx) in groups {
            pieces.push((CellSet::from_indices(hierarchy, depth, &idx)?, v));
        }
        if pieces.is_empty() {
            let dim_out = values.first().map(Vec::len).unwrap_or(1).max(1);
            return Ok(SimpleMap {
                hierarchy,
                dim_out,
                pieces,
            });
        }
        SimpleMap::new(hierarchy, pieces)
    }

    pub fn hierarchy(&self) -> DyadicHierarchy {
        self.hierarchy
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn pieces(&self) -> &[(CellSet, Vector)] {
        &self.pieces
    }

    /// Deepest piece depth (the map is constant on cells at this depth).
    pub fn native_depth(&self) -> u32 {
        self.pieces
            .iter()
            .map(|(s, _)| s.depth())
            .max()
            .unwrap_or(0)
    }

    pub fn value_at(&self, x: &Point) -> Vector {
        for (set, v) in &self.pieces {
            if set.contains_cell(self.hierarchy.cell_of(x, set.depth())) {
                return v.clone();
            }
        }
        vzero(self.dim_out)
    }

    /// Pointwise scaling by a scalar step function at a common depth.
    pub fn scale_by(&self, f: &StepFunctionCells) -> Result<SimpleMap> {
        if f.hierarchy != self.hierarchy {
            return Err(Error::ModelMismatch);
        }
        let depth = self.native_depth().max(f.depth);
        let values = self.dense_values(depth)?;
        let scaled: Vec<Vector> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let cell = self.hierarchy.cell(depth, i as u64);
                let anc = self.hierarchy.ancestor(cell, f.depth);
                vscale(&f.values[anc.index as usize], v)
            })
            .collect();
        SimpleMap::from_cell_values(self.hierarchy, depth, &scaled)
    }

    /// Per-cell values at `depth >= native_depth()`.
    pub fn dense_values(&self, depth: u32) -> Result<Vec<Vector>> {
        if depth < self.native_depth() {
            return Err(Error::Invalid("depth shallower than the map's pieces"));
        }
        let n = self.hierarchy.cells_at(depth) as usize;
        let mut out = alloc::vec![vzero(self.dim_out); n];
        for (set, v) in &self.pieces {
            for cell in set.iter_cells() {
                for c in self.hierarchy.descendants(cell, depth) {
                    out[c.index as usize] = v.clone();
                }
            }
        }
        Ok(out)
    }

    /// Squared-norm scalar map (exact), same pieces.
    pub fn norm_sq_map(&self, norm: Norm) -> SimpleMap {
        SimpleMap {
            hierarchy: self.hierarchy,
            dim_out: 1,
            pieces: self
                .pieces
                .iter()
                .map(|(s, v)| (s.clone(), alloc::vec![norm.value_sq(v)]))
                .collect(),
        }
    }
}

/// Elementary Bochner integral of a simple map over a cell set:
/// `∫_E v dμ = Σ_i μ(E ∩ E_i) v_i`, exact.
pub fn bochner_integral_simple(v: &SimpleMap, e: &CellSet, mu: &BaseMeasure) -> Result<Vector> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h != v.hierarchy() || h != e.hierarchy() {
        return Err(Error::ModelMismatch);
    }
    let mut acc = vzero(v.dim_out());
    for (set, value) in v.pieces() {
        let inter = set.intersection(e)?;
        let mass = mu.cellset_mass(&inter)?;
        if !mass.is_zero() {
            vadd_assign(&mut acc, &vscale(&mass, value));
        }
    }
    Ok(acc)
}

/// `∫_X v dμ` for a simple map.
pub fn bochner_integral_total(v: &SimpleMap, mu: &BaseMeasure) -> Result<Vector> {
    let full = CellSet::full(v.hierarchy(), 0)?;
    bochner_integral_simple(v, &full, mu)
}

/// `∫_cell v dμ`, exact, used by chain scans.
pub fn simple_cell_integral(v: &SimpleMap, mu: &BaseMeasure, cell: Cell) -> Result<Vector> {
    let mut acc = vzero(v.dim_out());
    for (set, value) in v.pieces() {
        let mass = mu.cell_intersection_mass(set, cell)?;
        if !mass.is_zero() {
            vadd_assign(&mut acc, &vscale(&mass, value));
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Scalar step functions (multipliers)
// ---------------------------------------------------------------------------

/// Bounded scalar step function on a hierarchy: one value per cell at a
/// fixed depth.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunctionCells {
    pub hierarchy: DyadicHierarchy,
    pub depth: u32,
    pub values: Vec<Q>,
}

impl StepFunctionCells {
    pub fn new(hierarchy: DyadicHierarchy, depth: u32, values: Vec<Q>) -> Result<Self> {
        if values.len() as u64 != hierarchy.cells_at(depth) {
            return Err(Error::Invalid("one value per cell required"));
        }
        Ok(StepFunctionCells {
            hierarchy,
            depth,
            values,
        })
    }

    pub fn sup_norm(&self) -> Q {
        self.values
            .iter()
            .map(num_traits::Signed::abs)
            .max()
            .unwrap_or_else(Q::zero)
    }
}

// ---------------------------------------------------------------------------
// Evaluators
// ---------------------------------------------------------------------------

/// A point-to-vector evaluation interface with optional exactness contracts.
///
/// Implementations must be stateless with respect to calls (safe for
/// concurrent use).
pub trait Evaluator: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    /// Exact value at a rational point, when representable.
    fn eval_exact(&self, x: &[Q]) -> Option<Vector>;
    /// Floating-point evaluation (quadrature path).
    fn eval_f64(&self, x: &[f64]) -> Vec<f64>;
    /// A Lipschitz bound with respect to the Euclidean distance, if declared.
    fn lipschitz(&self) -> Option<Q> {
        None
    }
    /// Exact `∫_cell v dμ` when available; must be additive over children.
    fn cell_integral(&self, _mu: &BaseMeasure, _cell: Cell) -> Option<Vector> {
        None
    }
}

/// Scalar polynomial `p(t) = Σ c_i t^i` on `[0,1)`, with exact evaluation and
/// exact cell integrals against Lebesgue and step-density measures.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Q>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Q>) -> Self {
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn eval(&self, t: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Exact `∫_a^b p(t) dt` via the antiderivative.
    pub fn integral(&self, a: &Q, b: &Q) -> Q {
        let mut acc = Q::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = (i + 1) as i64;
            let term = c / exact::qi(k);
            acc += &term * (pow_q(b, k as u32) - pow_q(a, k as u32));
        }
        acc
    }

    /// `sup |p'|` on `[0,1]`, bounded by `Σ i·|c_i|`.
    pub fn lipschitz_bound(&self) -> Q {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| exact::qi(i as i64) * num_traits::Signed::abs(c))
            .sum()
    }
}

fn pow_q(x: &Q, k: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

impl Evaluator for Polynomial {
    fn dim_in(&self) -> usize {
        1
    }

    fn dim_out(&self) -> usize {
        1
    }

    fn eval_exact(&self, x: &[Q]) -> Option<Vector> {
        Some(alloc::vec![self.eval(&x[0])])
    }

    fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x[0] + c.to_f64().unwrap_or(f64::NAN);
        }
        alloc::vec![acc]
    }

    fn lipschitz(&self) -> Option<Q> {
        Some(self.lipschitz_bound())
    }

    fn cell_integral(&self, mu: &BaseMeasure, cell: Cell) -> Option<Vector> {
        let h = mu.hierarchy()?;
        if h.dim() != 1 {
            return None;
        }
        match mu {
            BaseMeasure::Lebesgue { .. } => {
                let (a, b) = h.cell_box(cell).remove(0);
                Some(alloc::vec![self.integral(&a, &b)])
            }
            BaseMeasure::StepDensity {
                grid_depth,
                densities,
                ..
            } => {
                // density constant on grid cells: integrate piecewise
                let depth = cell.depth.max(*grid_depth);
                let mut acc = Q::zero();
                for c in h.descendants(cell, depth) {
                    let anc = h.ancestor(c, *grid_depth);
                    let d = &densities[anc.index as usize];
                    if d.is_zero() {
                        continue;
                    }
                    let (a, b) = h.cell_box(c).remove(0);
                    acc += d * self.integral(&a, &b);
                }
                Some(alloc::vec![acc])
            }
            BaseMeasure::AtomicWeights { .. } => None,
        }
    }
}

/// Product of two scalar polynomials on `[0,1)^2`: `p(x) q(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyProduct {
    px: Polynomial,
    py: Polynomial,
}

impl PolyProduct {
    pub fn new(px: Polynomial, py: Polynomial) -> Self {
        PolyProduct { px, py }
    }

    fn sup_abs_on_unit(p: &Polynomial) -> Q {
        // crude but valid on [0,1]: Σ |c_i|
        p.coeffs().iter().map(num_traits::Signed::abs).sum()
    }
}

impl Evaluator for PolyProduct {
    fn dim_in(&self) -> usize {
        2
    }

    fn dim_out(&self) -> usize {
        1
    }

    fn eval_exact(&self, x: &[Q]) -> Option<Vector> {
        Some(alloc::vec![self.px.eval(&x[0]) * self.py.eval(&x[1])])
    }

    fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        alloc::vec![self.px.eval_f64(&[x[0]])[0] * self.py.eval_f64(&[x[1]])[0]]
    }

    fn lipschitz(&self) -> Option<Q> {
        // |f(u)-f(v)| ≤ Lx·My·|u1-v1| + Mx·Ly·|u2-v2| ≤ (Lx·My + Mx·Ly)·‖u-v‖
        let lx = self.px.lipschitz_bound();
        let ly = self.py.lipschitz_bound();
        let mx = Self::sup_abs_on_unit(&self.px);
        let my = Self::sup_abs_on_unit(&self.py);
        Some(lx * my + mx * ly)
    }

    fn cell_integral(&self, mu: &BaseMeasure, cell: Cell) -> Option<Vector> {
        let h = mu.hierarchy()?;
        if h.dim() != 2 {
            return None;
        }
        match mu {
            BaseMeasure::Lebesgue { .. } => {
                let mut boxes = h.cell_box(cell);
                let (ay, by) = boxes.pop()?;
                let (ax, bx) = boxes.pop()?;
                Some(alloc::vec![
                    self.px.integral(&ax, &bx) * self.py.integral(&ay, &by)
                ])
            }
            BaseMeasure::StepDensity {
                grid_depth,
                densities,
                ..
            } => {
                let depth = cell.depth.max(*grid_depth);
                let mut acc = Q::zero();
                for c in h.descendants(cell, depth) {
                    let anc = h.ancestor(c, *grid_depth);
                    let d = &densities[anc.index as usize];
                    if d.is_zero() {
                        continue;
                    }
                    let mut boxes = h.cell_box(c);
                    let (ay, by) = boxes.pop()?;
                    let (ax, bx) = boxes.pop()?;
                    acc += d * self.px.integral(&ax, &bx) * self.py.integral(&ay, &by);
                }
                Some(alloc::vec![acc])
            }
            BaseMeasure::AtomicWeights { .. } => None,
        }
    }
}

impl Evaluator for SimpleMap {
    fn dim_in(&self) -> usize {
        self.hierarchy().dim() as usize
    }

    fn dim_out(&self) -> usize {
        self.dim_out
    }

    fn eval_exact(&self, x: &[Q]) -> Option<Vector> {
        let p = Point::new(x.to_vec()).ok()?;
        Some(self.value_at(&p))
    }

    fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let coords: Option<Vec<Q>> = x.iter().map(|&t| q_from_f64(t)).collect();
        match coords.and_then(|c| self.eval_exact(&c)) {
            Some(v) => v.iter().map(|q_| q_.to_f64().unwrap_or(f64::NAN)).collect(),
            None => alloc::vec![f64::NAN; self.dim_out],
        }
    }

    fn cell_integral(&self, mu: &BaseMeasure, cell: Cell) -> Option<Vector> {
        simple_cell_integral(self, mu, cell).ok()
    }
}

// ---------------------------------------------------------------------------
// Cell averages
// ---------------------------------------------------------------------------

/// A computed cell average, flagged by provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAverage {
    pub value: Vector,
    /// True when computed through an exact cell-integral interface.
    pub exact: bool,
}

/// Average of an evaluator over a positive-mass cell.
///
/// Exact when the evaluator has a cell-integral interface; otherwise a
/// composite midpoint quadrature with `q^d` sample points. For a Lipschitz
/// evaluator the quadrature error is below `Lip·sqrt(d)·2^-k / q` per
/// component (the measure must be proportional to Lebesgue on the cell,
/// which holds for Lebesgue and for step densities at or below grid depth).
pub fn cell_average(
    v: &dyn Evaluator,
    mu: &BaseMeasure,
    cell: Cell,
    quadrature: u32,
) -> Result<CellAverage> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    let mass = mu.cell_mass(cell)?;
    if mass.is_zero() {
        return Err(Error::UndefinedAverage);
    }
    if let Some(integral) = v.cell_integral(mu, cell) {
        let value = integral.iter().map(|c| c / &mass).collect();
        return Ok(CellAverage { value, exact: true });
    }
    if quadrature == 0 {
        return Err(Error::BadParameter("quadrature must be positive"));
    }
    // midpoint quadrature needs μ ∝ λ on the cell
    if let BaseMeasure::StepDensity { grid_depth, .. } = mu {
        if cell.depth < *grid_depth {
            return Err(Error::Unsupported(
                "quadrature requires the measure to be proportional to Lebesgue on the cell",
            ));
        }
    }
    let dim = h.dim() as usize;
    let corner: Vec<f64> = h
        .lower_corner(cell)
        .iter()
        .map(|c| c.to_f64().unwrap_or(f64::NAN))
        .collect();
    let side = libm_exp2(-(cell.depth as f64));
    let step = side / quadrature as f64;
    let mut acc = alloc::vec![0.0f64; v.dim_out()];
    let points = if dim == 1 {
        quadrature
    } else {
        quadrature * quadrature
    };
    for idx in 0..points {
        let mut x = [0.0f64; 2];
        x[0] = corner[0] + step * (0.5 + (idx % quadrature) as f64);
        if dim == 2 {
            x[1] = corner[1] + step * (0.5 + (idx / quadrature) as f64);
        }
        let fx = v.eval_f64(&x[..dim]);
        for (a, b) in acc.iter_mut().zip(&fx) {
            *a += b;
        }
    }
    let value = acc
        .iter()
        .map(|a| q_from_f64(a / points as f64).ok_or(Error::Invalid("non-finite quadrature")))
        .collect::<Result<Vector>>()?;
    Ok(CellAverage {
        value,
        exact: false,
    })
}

fn libm_exp2(k: f64) -> f64 {
    // k is a small negative integer here; exact in f64
    let mut acc = 1.0f64;
    let n = (-k) as u32;
    for _ in 0..n {
        acc *= 0.5;
    }
    acc
}

// ---------------------------------------------------------------------------
// Lebesgue point scans
// ---------------------------------------------------------------------------

/// One depth row of a Lebesgue-point scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub depth: u32,
    pub average: Vector,
    pub exact: bool,
    /// Squared norm of `average - v(x)` (exact whenever the average is).
    pub residual_sq: Q,
    /// Chain of distance averages `∫ ‖v(·)-v(x)‖ dμ / μ(P)`, when computable
    /// exactly (simple maps with the L1 norm, or scalar maps).
    pub distance_average: Option<Q>,
}

/// Scan report for one probed point.
#[derive(Clone, Debug)]
pub struct LebesguePointReport {
    pub point: Point,
    pub value_at_point: Vector,
    pub rows: Vec<ScanRow>,
    pub result: crate::basis::ILimitResult,
}

impl LebesguePointReport {
    pub fn final_residual_sq(&self) -> &Q {
        &self.rows.last().expect("at least depth 0").residual_sq
    }

    /// Depth from which the residual is exactly zero, if any.
    pub fn zero_residual_from(&self) -> Option<u32> {
        let mut from = None;
        for row in &self.rows {
            if row.residual_sq.is_zero() {
                if from.is_none() {
                    from = Some(row.depth);
                }
            } else {
                from = None;
            }
        }
        from
    }
}

/// Chains of shrinking-cell averages at the probed points, with residuals
/// against the point values and convergence verdicts.
pub fn lebesgue_point_scan(
    v: &dyn Evaluator,
    mu: &BaseMeasure,
    points: &[Point],
    tol: &Q,
    k_max: u32,
    norm: Norm,
    quadrature: u32,
) -> Result<Vec<LebesguePointReport>> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h.dim() as usize != v.dim_in() {
        return Err(Error::DimensionMismatch);
    }
    if !h.chain_depth_ok(k_max) {
        return Err(Error::BadParameter(
            "k_max too deep for the packed cell index",
        ));
    }
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let value_at_point = v
            .eval_exact(x.coords())
            .ok_or(Error::Unsupported("scan points need exact evaluation"))?;
        let mut rows = Vec::with_capacity(k_max as usize + 1);
        let mut averages = Vec::with_capacity(k_max as usize + 1);
        for cell in h.chain_of(x, k_max) {
            let avg = cell_average(v, mu, cell, quadrature)?;
            let residual_sq = norm.value_sq(&vsub(&avg.value, &value_at_point));
            rows.push(ScanRow {
                depth: cell.depth,
                average: avg.value.clone(),
                exact: avg.exact,
                residual_sq,
                distance_average: None,
            });
            averages.push(avg.value);
        }
        let result = crate::basis::chain_limit(&averages, tol)?;
        out.push(LebesguePointReport {
            point: x.clone(),
            value_at_point,
            rows,
            result,
        });
    }
    Ok(out)
}

/// Lebesgue-point scan specialized to simple maps, with exact distance
/// averages `∫ ‖v(·)-v(x)‖ dμ / μ(P)` where the norm is rational on every
/// piece difference.
pub fn lebesgue_point_scan_simple(
    v: &SimpleMap,
    mu: &BaseMeasure,
    points: &[Point],
    tol: &Q,
    k_max: u32,
    norm: Norm,
) -> Result<Vec<LebesguePointReport>> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h != v.hierarchy() {
        return Err(Error::ModelMismatch);
    }
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let value_at_point = v.value_at(x);
        let mut rows = Vec::with_capacity(k_max as usize + 1);
        let mut averages = Vec::with_capacity(k_max as usize + 1);
        for cell in h.chain_of(x, k_max) {
            let mass = mu.cell_mass(cell)?;
            if mass.is_zero() {
                return Err(Error::UndefinedAverage);
            }
            let integral = simple_cell_integral(v, mu, cell)?;
            let average: Vector = integral.iter().map(|c| c / &mass).collect();
            let residual_sq = norm.value_sq(&vsub(&average, &value_at_point));
            let distance_average =
                distance_average_simple(v, mu, cell, &mass, &value_at_point, norm)?;
            rows.push(ScanRow {
                depth: cell.depth,
                average: average.clone(),
                exact: true,
                residual_sq,
                distance_average,
            });
            averages.push(average);
        }
        let result = crate::basis::chain_limit(&averages, tol)?;
        out.push(LebesguePointReport {
            point: x.clone(),
            value_at_point,
            rows,
            result,
        });
    }
    Ok(out)
}

fn distance_average_simple(
    v: &SimpleMap,
    mu: &BaseMeasure,
    cell: Cell,
    mass: &Q,
    c: &Vector,
    norm: Norm,
) -> Result<Option<Q>> {
    let mut acc = Q::zero();
    let mut covered = Q::zero();
    for (set, value) in v.pieces() {
        let m = mu.cell_intersection_mass(set, cell)?;
        if m.is_zero() {
            continue;
        }
        let diff = vsub(value, c);
        let dist = match norm.value_exact(&diff) {
            Some(d) => d,
            None => return Ok(None),
        };
        acc += dist * &m;
        covered += m;
    }
    let rest = mass - &covered;
    if !rest.is_zero() {
        let dist = match norm.value_exact(&vsub(&vzero(c.len()), c)) {
            Some(d) => d,
            None => return Ok(None),
        };
        acc += dist * rest;
    }
    Ok(Some(acc / mass))
}

// ---------------------------------------------------------------------------
// Precise representatives
// ---------------------------------------------------------------------------

/// The everywhere-defined representative of a step map at `depth`: the limit
/// of chain averages at every point. On a positive-mass cell this is the
/// essential value; on a null cell the chain filter has the deepest
/// positive ancestor as least member, so the limit exists there too and
/// equals that ancestor's average. Idempotent and invariant under a.e.
/// equality.
pub fn precise_representative_cells(
    v: &SimpleMap,
    mu: &BaseMeasure,
    depth: u32,
) -> Result<SimpleMap> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if h != v.hierarchy() {
        return Err(Error::ModelMismatch);
    }
    if v.native_depth() > depth {
        return Err(Error::Invalid("map pieces deeper than the requested depth"));
    }
    let n = h.cells_at(depth) as usize;
    let mut values = alloc::vec![vzero(v.dim_out()); n];
    for (i, slot) in values.iter_mut().enumerate() {
        let mut cell = h.cell(depth, i as u64);
        let mut mass = mu.cell_mass(cell)?;
        while mass.is_zero() && cell.depth > 0 {
            cell = h.ancestor(cell, cell.depth - 1);
            mass = mu.cell_mass(cell)?;
        }
        if mass.is_zero() {
            continue;
        }
        let integral = simple_cell_integral(v, mu, cell)?;
        *slot = integral.iter().map(|c| c / &mass).collect();
    }
    SimpleMap::from_cell_values(h, depth, &values)
}

/// The everywhere-defined representative of an atomic step section: every
/// point carries its atom's essential value (all atoms have positive mass,
/// so there are no null cells to zero out).
pub fn precise_representative_section(v: &Section) -> Result<Section> {
    let op = crate::lifting::SectionLifting::new(crate::lifting::LiftingOperator::new(
        v.space().clone(),
    ));
    op.lift_section(v, None)
}

// ---------------------------------------------------------------------------
// Banach bundles
// ---------------------------------------------------------------------------

/// Where a bundle's fibers live.
#[derive(Clone, Debug, PartialEq)]
pub enum BundleModel {
    Cells {
        hierarchy: DyadicHierarchy,
        depth: u32,
    },
    Atoms {
        space: Arc<AtomicSpace>,
    },
}

/// A finite-dimensional measurable Banach bundle: per cell (or per atom) an
/// orthonormal rational basis spanning the fiber subspace of `R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BanachBundle {
    model: BundleModel,
    ambient_dim: usize,
    /// One basis per cell/atom; each basis is a list of orthonormal columns
    /// (possibly empty: the zero fiber).
    fibers: Vec<Vec<Vector>>,
}

impl BanachBundle {
    pub fn new(model: BundleModel, ambient_dim: usize, fibers: Vec<Vec<Vector>>) -> Result<Self> {
        let expected = match &model {
            BundleModel::Cells { hierarchy, depth } => hierarchy.cells_at(*depth) as usize,
            BundleModel::Atoms { space } => space.atom_count(),
        };
        if fibers.len() != expected {
            return Err(Error::Invalid("one fiber per cell or atom required"));
        }
        for basis in &fibers {
            for (i, col) in basis.iter().enumerate() {
                if col.len() != ambient_dim {
                    return Err(Error::DimensionMismatch);
                }
                for (j, other) in basis.iter().enumerate() {
                    let dot = exact::vdot(col, other);
                    let expected = if i == j { Q::one() } else { Q::zero() };
                    if dot != expected {
                        return Err(Error::Invalid("fiber basis columns must be orthonormal"));
                    }
                }
            }
        }
        Ok(BanachBundle {
            model,
            ambient_dim,
            fibers,
        })
    }

    /// The constant full bundle `R^m` (identity fibers everywhere).
    pub fn constant_full(model: BundleModel, ambient_dim: usize) -> Result<Self> {
        let count = match &model {
            BundleModel::Cells { hierarchy, depth } => hierarchy.cells_at(*depth) as usize,
            BundleModel::Atoms { space } => space.atom_count(),
        };
        let mut basis = Vec::with_capacity(ambient_dim);
        for i in 0..ambient_dim {
            let mut col = vzero(ambient_dim);
            col[i] = Q::one();
            basis.push(col);
        }
        BanachBundle::new(model, ambient_dim, alloc::vec![basis; count])
    }

    pub fn model(&self) -> &BundleModel {
        &self.model
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Squared distance from `v` to the fiber span (orthonormal projection).
    pub fn deviation_sq(&self, fiber: usize, v: &Vector) -> Q {
        let basis = &self.fibers[fiber];
        let mut residual = v.clone();
        for col in basis {
            let c = exact::vdot(v, col);
            let proj = vscale(&c, col);
            residual = vsub(&residual, &proj);
        }
        Norm::L2.value_sq(&residual)
    }
}

/// Membership verdict for a map against a bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleCheck {
    pub member: bool,
    /// Largest squared deviation over the checked pieces (0 iff member).
    pub worst_deviation_sq: Q,
}

/// Fiberwise membership of a simple map in a cell bundle: every cell meeting
/// a piece must contain the piece's value in its fiber (exact).
pub fn bundle_membership_cells(v: &SimpleMap, bundle: &BanachBundle) -> Result<BundleCheck> {
    let BundleModel::Cells { hierarchy, depth } = &bundle.model else {
        return Err(Error::ModelMismatch);
    };
    if *hierarchy != v.hierarchy() || bundle.ambient_dim != v.dim_out() {
        return Err(Error::ModelMismatch);
    }
    if v.native_depth() > *depth {
        return Err(Error::Invalid(
            "piece depth exceeds bundle depth; align first",
        ));
    }
    let mut worst = Q::zero();
    for (set, value) in v.pieces() {
        for cell in set.refine(*depth)?.iter_cells() {
            let dev = bundle.deviation_sq(cell.index as usize, value);
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(BundleCheck {
        member: worst.is_zero(),
        worst_deviation_sq: worst,
    })
}

/// Fiberwise membership of a section in an atom bundle.
pub fn bundle_membership_section(v: &Section, bundle: &BanachBundle) -> Result<BundleCheck> {
    let BundleModel::Atoms { space } = &bundle.model else {
        return Err(Error::ModelMismatch);
    };
    if space != v.space() || bundle.ambient_dim != v.dim_out() {
        return Err(Error::ModelMismatch);
    }
    let mut worst = Q::zero();
    for p in 0..space.len() {
        let dev = bundle.deviation_sq(space.atom_of(p), v.value(p));
        if dev > worst {
            worst = dev;
        }
    }
    Ok(BundleCheck {
        member: worst.is_zero(),
        worst_deviation_sq: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{pow2, q, qi};
    use num_traits::Signed;

    fn h(depth: u32) -> DyadicHierarchy {
        DyadicHierarchy::new(1, depth).unwrap()
    }

    fn leb(depth: u32) -> BaseMeasure {
        BaseMeasure::lebesgue(h(depth))
    }

    fn indicator(hier: DyadicHierarchy, depth: u32, idx: &[u64], v: Vector) -> SimpleMap {
        SimpleMap::new(
            hier,
            alloc::vec![(CellSet::from_indices(hier, depth, idx).unwrap(), v)],
        )
        .unwrap()
    }

    #[test]
    fn integral_examples() {
        let hier = h(4);
        let mu = leb(4);
        // 1_{[0,1/2)}·(2,0) over X → (1,0)
        let v = indicator(hier, 1, &[0], alloc::vec![qi(2), qi(0)]);
        assert_eq!(
            bochner_integral_total(&v, &mu).unwrap(),
            alloc::vec![qi(1), qi(0)]
        );
        // zero map
        let z = SimpleMap::from_cell_values(hier, 1, &alloc::vec![vzero(2), vzero(2)]).unwrap();
        assert_eq!(bochner_integral_total(&z, &mu).unwrap(), vzero(2));
        // two pieces, E = [0,1/2): (1/4,1/4)
        let v2 = SimpleMap::new(
            hier,
            alloc::vec![
                (
                    CellSet::from_indices(hier, 2, &[0]).unwrap(),
                    alloc::vec![qi(1), qi(1)]
                ),
                (
                    CellSet::from_indices(hier, 1, &[1]).unwrap(),
                    alloc::vec![qi(0), qi(2)]
                ),
            ],
        )
        .unwrap();
        let e = CellSet::from_indices(hier, 1, &[0]).unwrap();
        assert_eq!(
            bochner_integral_simple(&v2, &e, &mu).unwrap(),
            alloc::vec![q(1, 4), q(1, 4)]
        );
    }

    #[test]
    fn triangle_inequality_l1_exact() {
        let hier = h(3);
        let mu = leb(3);
        let v = SimpleMap::new(
            hier,
            alloc::vec![
                (
                    CellSet::from_indices(hier, 3, &[0, 5]).unwrap(),
                    alloc::vec![qi(3), qi(-4)]
                ),
                (
                    CellSet::from_indices(hier, 3, &[2]).unwrap(),
                    alloc::vec![qi(-1), qi(2)]
                ),
            ],
        )
        .unwrap();
        let full = CellSet::full(hier, 0).unwrap();
        let integral = bochner_integral_simple(&v, &full, &mu).unwrap();
        let lhs: Q = integral.iter().map(num_traits::Signed::abs).sum();
        // ∫‖v‖₁ dμ: piecewise exact
        let norm_map = v.norm_sq_map(Norm::L1);
        let rhs: Q = norm_map
            .pieces()
            .iter()
            .map(|(s, nsq)| {
                mu.cellset_mass(s).unwrap() * crate::exact::sqrt_exact(&nsq[0]).unwrap()
            })
            .sum();
        assert!(lhs <= rhs);
    }

    #[test]
    fn cell_average_examples() {
        let hier = h(4);
        let mu = leb(4);
        // constant map averages to itself on every cell
        let c = SimpleMap::constant(hier, alloc::vec![q(7, 3)]).unwrap();
        for k in 0..=3 {
            for i in 0..hier.cells_at(k) {
                let avg = cell_average(&c, &mu, hier.cell(k, i), 4).unwrap();
                assert!(avg.exact);
                assert_eq!(avg.value, alloc::vec![q(7, 3)]);
            }
        }
        // v(t) = t on [1/4,1/2) → 3/8, exact
        let t = Polynomial::new(alloc::vec![qi(0), qi(1)]);
        let cell = hier.cell(2, 1);
        let avg = cell_average(&t, &mu, cell, 4).unwrap();
        assert!(avg.exact);
        assert_eq!(avg.value, alloc::vec![q(3, 8)]);
        // step map straddling a cell: mass-weighted mean
        let v = indicator(hier, 2, &[0], alloc::vec![qi(4)]);
        let root_avg = cell_average(&v, &mu, hier.cell(0, 0), 4).unwrap();
        assert_eq!(root_avg.value, alloc::vec![qi(1)]);
    }

    #[test]
    fn quadrature_within_documented_bound() {
        let hier = h(6);
        let mu = leb(6);
        // evaluator with exact integrals: compare the quadrature estimate
        let p = Polynomial::new(alloc::vec![q(1, 3), qi(-2), qi(1), q(5, 7)]);
        let lip = p.lipschitz_bound();
        for &(k, i) in &[(2u32, 1u64), (4, 9), (6, 40)] {
            let cell = hier.cell(k, i);
            let exact_avg = cell_average(&p, &mu, cell, 8).unwrap();
            assert!(exact_avg.exact);
            // force the quadrature path through a wrapper without the
            // exact interface
            struct NoExact(Polynomial);
            impl Evaluator for NoExact {
                fn dim_in(&self) -> usize {
                    1
                }
                fn dim_out(&self) -> usize {
                    1
                }
                fn eval_exact(&self, x: &[Q]) -> Option<Vector> {
                    self.0.eval_exact(x)
                }
                fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
                    self.0.eval_f64(x)
                }
                fn lipschitz(&self) -> Option<Q> {
                    self.0.lipschitz()
                }
            }
            let quad = cell_average(&NoExact(p.clone()), &mu, cell, 8).unwrap();
            assert!(!quad.exact);
            let err = (&quad.value[0] - &exact_avg.value[0]).abs();
            // documented bound Lip·√d·2^-k/q plus a float-rounding cushion
            let bound = &lip * pow2(-(k as i64)) / qi(8) + q(1, 1_000_000_000);
            assert!(err <= bound, "depth {k}: err {err} bound {bound}");
        }
    }

    #[test]
    fn lebesgue_scan_polynomial() {
        let mu = leb(10);
        // t² at x = 1/3: converges to 1/9 with residual ≤ 2·2^-k + 2^-2k
        let p = Polynomial::new(alloc::vec![qi(0), qi(0), qi(1)]);
        let x = Point::scalar(q(1, 3)).unwrap();
        let reports = lebesgue_point_scan(&p, &mu, &[x], &q(1, 1000), 10, Norm::L2, 8).unwrap();
        let rep = &reports[0];
        assert!(rep.result.converged());
        assert_eq!(rep.value_at_point, alloc::vec![q(1, 9)]);
        for row in &rep.rows {
            let hk = pow2(-(row.depth as i64));
            let bound = qi(2) * &hk + &hk * &hk;
            assert!(row.residual_sq <= &bound * &bound, "depth {}", row.depth);
            assert!(row.exact);
        }
    }

    #[test]
    fn lebesgue_scan_step_boundary_point() {
        let hier = h(8);
        let mu = leb(8);
        // v = 1_{[0,1/2)}, x = 1/2: chain sits in [1/2,1) where v ≡ 0 = v(x)
        let v = indicator(hier, 1, &[0], alloc::vec![qi(1)]);
        let x = Point::scalar(q(1, 2)).unwrap();
        let reports = lebesgue_point_scan_simple(&v, &mu, &[x], &q(1, 100), 8, Norm::L2).unwrap();
        let rep = &reports[0];
        assert_eq!(rep.value_at_point, alloc::vec![qi(0)]);
        assert_eq!(rep.zero_residual_from(), Some(1));
        assert!(rep.result.converged());
        // interior point of a piece: zero residual from the piece depth on
        let y = Point::scalar(q(1, 8)).unwrap();
        let reports = lebesgue_point_scan_simple(&v, &mu, &[y], &q(1, 100), 8, Norm::L2).unwrap();
        assert!(reports[0].zero_residual_from().unwrap() <= 1);
        for row in &reports[0].rows {
            if row.depth >= 1 {
                assert!(row.distance_average.as_ref().unwrap().is_zero());
            }
        }
    }

    #[test]
    fn precise_representative_examples() {
        let hier = h(2);
        let mu =
            BaseMeasure::step_density(hier, 2, alloc::vec![qi(1), qi(0), qi(1), qi(2)]).unwrap();
        // garbage on the null cell is replaced by the chain limit there:
        // the average over the deepest positive ancestor (cells {0,1})
        let v = SimpleMap::from_cell_values(
            hier,
            2,
            &alloc::vec![
                alloc::vec![qi(5)],
                alloc::vec![qi(99)],
                alloc::vec![qi(7)],
                alloc::vec![qi(7)],
            ],
        )
        .unwrap();
        let rep = precise_representative_cells(&v, &mu, 2).unwrap();
        let vals = rep.dense_values(2).unwrap();
        assert_eq!(vals[0], alloc::vec![qi(5)]);
        assert_eq!(vals[1], alloc::vec![qi(5)]);
        assert_eq!(vals[2], alloc::vec![qi(7)]);
        assert_eq!(vals[3], alloc::vec![qi(7)]);
        // idempotent
        let rep2 = precise_representative_cells(&rep, &mu, 2).unwrap();
        assert_eq!(rep, rep2);
        // constant map is its own representative
        let c = SimpleMap::constant(hier, alloc::vec![q(3, 2)]).unwrap();
        let repc = precise_representative_cells(&c, &mu, 2).unwrap();
        assert_eq!(
            repc.dense_values(2).unwrap(),
            alloc::vec![alloc::vec![q(3, 2)]; 4]
        );
        // a.e.-equal inputs share the representative
        let w = SimpleMap::from_cell_values(
            hier,
            2,
            &alloc::vec![
                alloc::vec![qi(5)],
                alloc::vec![qi(-3)],
                alloc::vec![qi(7)],
                alloc::vec![qi(7)],
            ],
        )
        .unwrap();
        assert_eq!(precise_representative_cells(&w, &mu, 2).unwrap(), rep);
    }

    #[test]
    fn bundle_membership_examples() {
        let hier = h(1);
        let model = BundleModel::Cells {
            hierarchy: hier,
            depth: 1,
        };
        // fiber span{(1,0)} on cell 0, full plane on cell 1
        let e1 = alloc::vec![qi(1), qi(0)];
        let e2 = alloc::vec![qi(0), qi(1)];
        let bundle = BanachBundle::new(
            model.clone(),
            2,
            alloc::vec![alloc::vec![e1.clone()], alloc::vec![e1.clone(), e2.clone()]],
        )
        .unwrap();
        let inside = indicator(hier, 1, &[0], alloc::vec![qi(3), qi(0)]);
        let check = bundle_membership_cells(&inside, &bundle).unwrap();
        assert!(check.member);
        let outside = indicator(hier, 1, &[0], alloc::vec![qi(0), qi(1)]);
        let check = bundle_membership_cells(&outside, &bundle).unwrap();
        assert!(!check.member);
        assert_eq!(check.worst_deviation_sq, qi(1));
        // constant full bundle accepts anything
        let full = BanachBundle::constant_full(model, 2).unwrap();
        let any = indicator(hier, 1, &[1], alloc::vec![q(-7, 2), q(22, 7)]);
        assert!(bundle_membership_cells(&any, &full).unwrap().member);
    }

    #[test]
    fn lipschitz_average_bound_property() {
        // ‖avg_k − v(x)‖ ≤ Lip·√d·2^-k, exact through squared comparison
        let mu = leb(8);
        let p = Polynomial::new(alloc::vec![q(1, 2), qi(2), qi(-1)]);
        let lip = p.lipschitz_bound();
        let x = Point::scalar(q(2, 7)).unwrap();
        let reports = lebesgue_point_scan(&p, &mu, &[x], &qi(1), 8, Norm::L2, 8).unwrap();
        for row in &reports[0].rows {
            let bound = &lip * pow2(-(row.depth as i64));
            assert!(row.residual_sq <= &bound * &bound);
        }
    }
}

#[cfg(test)]
mod tests_2d {
    use super::*;
    use crate::exact::{pow2, q, qi};

    /// Planar scans: exact separable integrals and the Euclidean Lipschitz
    /// bound through squared comparison.
    #[test]
    fn lebesgue_scan_poly_product() {
        let h = DyadicHierarchy::new(2, 8).unwrap();
        let mu = BaseMeasure::lebesgue(h);
        let v = PolyProduct::new(
            Polynomial::new(alloc::vec![qi(0), qi(1)]),
            Polynomial::new(alloc::vec![q(1, 2), qi(0), qi(1)]),
        );
        let x = Point::new(alloc::vec![q(1, 3), q(2, 7)]).unwrap();
        let lip = v.lipschitz().unwrap();
        let reports = lebesgue_point_scan(&v, &mu, &[x], &q(1, 100), 8, Norm::L2, 4).unwrap();
        let rep = &reports[0];
        assert!(rep.result.converged());
        for row in &rep.rows {
            assert!(row.exact);
            // ‖avg_k − v(x)‖ ≤ Lip·√2·2^-k, compared through squares
            let b = &lip * &lip * qi(2) * pow2(-2 * row.depth as i64);
            assert!(row.residual_sq <= b, "depth {}", row.depth);
        }
    }

    #[test]
    fn simple_map_2d_integrals() {
        let h = DyadicHierarchy::new(2, 4).unwrap();
        let mu = BaseMeasure::lebesgue(h);
        // value (2,0) on the left column at depth 1 (cells 0 and 2)
        let v = SimpleMap::new(
            h,
            alloc::vec![(
                CellSet::from_indices(h, 1, &[0, 2]).unwrap(),
                alloc::vec![qi(2), qi(0)]
            )],
        )
        .unwrap();
        assert_eq!(
            bochner_integral_total(&v, &mu).unwrap(),
            alloc::vec![qi(1), qi(0)]
        );
        // coords (1,0) at depth 2 sit in the left column: mass (2,0)·1/16
        assert_eq!(
            simple_cell_integral(&v, &mu, h.cell(2, 1)).unwrap(),
            alloc::vec![q(1, 8), qi(0)]
        );
        // coords (2,0) sit in the right column: zero
        assert_eq!(
            simple_cell_integral(&v, &mu, h.cell(2, 2)).unwrap(),
            vzero(2)
        );
    }
}
