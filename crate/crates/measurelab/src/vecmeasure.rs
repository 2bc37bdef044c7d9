//! `R^m`-valued measures of bounded variation and their calculus: variation,
//! restriction, pushforward, the elementary Bartle integral, and
//! Radon–Nikodym derivatives with shrinking-cell ratio scans.
//!
//! Exactness policy: set values `Ω(E)` are exact rational vectors. Variations
//! are sums of norms; the L1 norm keeps them rational, while Euclidean norms
//! are carried as exact squared terms and compared either exactly (perfect
//! squares) or through high-precision approximations with error far below
//! the documented `1e-30` test tolerance.

use crate::atomic::{AtomicSpace, PointSet, Section};
use crate::bochner::{simple_cell_integral, Evaluator, SimpleMap, StepFunctionCells};
use crate::error::{Error, Result};
use crate::exact::{
    self, sqrt_exact, sum_sqrt_approx, sum_sqrt_exact, vadd_assign, vscale, vzero, Norm, Vector, Q,
    SQRT_DIGITS,
};
use crate::hierarchy::{Cell, CellSet, DyadicHierarchy, Point};
use crate::measure::BaseMeasure;
use alloc::sync::Arc;
use alloc::vec::Vec;
use num_traits::{One, Signed, Zero};

/// A finitely representable vector measure.
#[derive(Clone)]
pub enum VectorMeasure {
    /// Point masses on an atomic space (pairwise distinct carriers).
    AtomList {
        space: Arc<AtomicSpace>,
        dim_out: usize,
        carriers: Vec<(usize, Vector)>,
    },
    /// Density form against a hierarchy measure: `Ω(E) = ∫_E g dμ` for a
    /// simple-map density `g`.
    CellDensity { density: SimpleMap, mu: BaseMeasure },
    /// Density form against an atomic measure.
    AtomDensity { density: Section, mu: BaseMeasure },
    /// Density form with an exact-integral evaluator density (hierarchy).
    EvalDensity {
        eval: Arc<dyn Evaluator>,
        mu: BaseMeasure,
    },
}

impl core::fmt::Debug for VectorMeasure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VectorMeasure::AtomList { carriers, .. } => f
                .debug_struct("AtomList")
                .field("carriers", carriers)
                .finish(),
            VectorMeasure::CellDensity { density, .. } => f
                .debug_struct("CellDensity")
                .field("density", density)
                .finish(),
            VectorMeasure::AtomDensity { density, .. } => f
                .debug_struct("AtomDensity")
                .field("density", density)
                .finish(),
            VectorMeasure::EvalDensity { .. } => f.debug_struct("EvalDensity").finish(),
        }
    }
}

impl PartialEq for VectorMeasure {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                VectorMeasure::AtomList {
                    space: s1,
                    carriers: c1,
                    ..
                },
                VectorMeasure::AtomList {
                    space: s2,
                    carriers: c2,
                    ..
                },
            ) => s1 == s2 && c1 == c2,
            (
                VectorMeasure::CellDensity {
                    density: d1,
                    mu: m1,
                },
                VectorMeasure::CellDensity {
                    density: d2,
                    mu: m2,
                },
            ) => d1 == d2 && m1 == m2,
            (
                VectorMeasure::AtomDensity {
                    density: d1,
                    mu: m1,
                },
                VectorMeasure::AtomDensity {
                    density: d2,
                    mu: m2,
                },
            ) => d1 == d2 && m1 == m2,
            (
                VectorMeasure::EvalDensity { eval: e1, mu: m1 },
                VectorMeasure::EvalDensity { eval: e2, mu: m2 },
            ) => Arc::ptr_eq(e1, e2) && m1 == m2,
            _ => false,
        }
    }
}

impl VectorMeasure {
    /// Point-mass measure from `(point, vector)` carriers.
    pub fn atom_list(
        space: Arc<AtomicSpace>,
        dim_out: usize,
        mut carriers: Vec<(usize, Vector)>,
    ) -> Result<Self> {
        if dim_out == 0 {
            return Err(Error::DimensionMismatch);
        }
        carriers.sort_by_key(|(p, _)| *p);
        for w in carriers.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid("carriers must be pairwise distinct"));
            }
        }
        for (p, v) in &carriers {
            if *p >= space.len() {
                return Err(Error::Invalid("carrier point out of range"));
            }
            if v.len() != dim_out {
                return Err(Error::DimensionMismatch);
            }
        }
        carriers.retain(|(_, v)| !exact::is_vzero(v));
        Ok(VectorMeasure::AtomList {
            space,
            dim_out,
            carriers,
        })
    }

    pub fn cell_density(density: SimpleMap, mu: BaseMeasure) -> Result<Self> {
        if mu.hierarchy() != Some(density.hierarchy()) {
            return Err(Error::ModelMismatch);
        }
        Ok(VectorMeasure::CellDensity { density, mu })
    }

    pub fn atom_density(density: Section, mu: BaseMeasure) -> Result<Self> {
        if mu.atomic_space() != Some(density.space()) {
            return Err(Error::ModelMismatch);
        }
        Ok(VectorMeasure::AtomDensity { density, mu })
    }

    pub fn eval_density(eval: Arc<dyn Evaluator>, mu: BaseMeasure) -> Result<Self> {
        let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
        if eval.dim_in() != h.dim() as usize {
            return Err(Error::DimensionMismatch);
        }
        Ok(VectorMeasure::EvalDensity { eval, mu })
    }

    pub fn dim_out(&self) -> usize {
        match self {
            VectorMeasure::AtomList { dim_out, .. } => *dim_out,
            VectorMeasure::CellDensity { density, .. } => density.dim_out(),
            VectorMeasure::AtomDensity { density, .. } => density.dim_out(),
            VectorMeasure::EvalDensity { eval, .. } => eval.dim_out(),
        }
    }

    pub fn atomic_space(&self) -> Option<&Arc<AtomicSpace>> {
        match self {
            VectorMeasure::AtomList { space, .. } => Some(space),
            VectorMeasure::AtomDensity { density, .. } => Some(density.space()),
            _ => None,
        }
    }

    pub fn hierarchy(&self) -> Option<DyadicHierarchy> {
        match self {
            VectorMeasure::CellDensity { density, .. } => Some(density.hierarchy()),
            VectorMeasure::EvalDensity { mu, .. } => mu.hierarchy(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VectorMeasure::AtomList { carriers, .. } => carriers.is_empty(),
            VectorMeasure::CellDensity { density, .. } => density.pieces().is_empty(),
            VectorMeasure::AtomDensity { density, .. } => {
                density.values().iter().all(|v| exact::is_vzero(v))
            }
            VectorMeasure::EvalDensity { .. } => false,
        }
    }

    /// `Ω(E)` for a point set (atomic representations).
    pub fn evaluate_points(&self, e: &PointSet) -> Result<Vector> {
        match self {
            VectorMeasure::AtomList {
                space,
                dim_out,
                carriers,
            } => {
                if e.space() != space {
                    return Err(Error::ModelMismatch);
                }
                let mut acc = vzero(*dim_out);
                for (p, v) in carriers {
                    if e.contains(*p) {
                        vadd_assign(&mut acc, v);
                    }
                }
                Ok(acc)
            }
            VectorMeasure::AtomDensity { density, .. } => density.integral(e),
            _ => Err(Error::ModelMismatch),
        }
    }

    /// `Ω(E)` for a cell set (hierarchy representations).
    pub fn evaluate_cells(&self, e: &CellSet) -> Result<Vector> {
        match self {
            VectorMeasure::CellDensity { density, mu } => {
                crate::bochner::bochner_integral_simple(density, e, mu)
            }
            VectorMeasure::EvalDensity { eval, mu } => {
                let mut acc = vzero(eval.dim_out());
                for cell in e.iter_cells() {
                    let v = eval
                        .cell_integral(mu, cell)
                        .ok_or(Error::Unsupported("evaluator lacks exact cell integrals"))?;
                    vadd_assign(&mut acc, &v);
                }
                Ok(acc)
            }
            _ => Err(Error::ModelMismatch),
        }
    }

    /// `Ω(cell)`, exact.
    pub fn evaluate_cell(&self, cell: Cell) -> Result<Vector> {
        match self {
            VectorMeasure::CellDensity { density, mu } => simple_cell_integral(density, mu, cell),
            VectorMeasure::EvalDensity { eval, mu } => eval
                .cell_integral(mu, cell)
                .ok_or(Error::Unsupported("evaluator lacks exact cell integrals")),
            _ => Err(Error::ModelMismatch),
        }
    }

    /// `Ω(X)`.
    pub fn total(&self) -> Result<Vector> {
        match self {
            VectorMeasure::AtomList {
                dim_out, carriers, ..
            } => {
                let mut acc = vzero(*dim_out);
                for (_, v) in carriers {
                    vadd_assign(&mut acc, v);
                }
                Ok(acc)
            }
            VectorMeasure::AtomDensity { density, .. } => {
                density.integral(&PointSet::full(density.space().clone()))
            }
            VectorMeasure::CellDensity { density, mu } => {
                crate::bochner::bochner_integral_total(density, mu)
            }
            VectorMeasure::EvalDensity { eval, mu } => {
                let h = mu.hierarchy().expect("validated at construction");
                eval.cell_integral(mu, h.cell(0, 0))
                    .ok_or(Error::Unsupported("evaluator lacks exact cell integrals"))
            }
        }
    }

    /// Carriers as point masses (atom-density forms are flattened).
    pub fn to_carriers(&self) -> Result<Vec<(usize, Vector)>> {
        match self {
            VectorMeasure::AtomList { carriers, .. } => Ok(carriers.clone()),
            VectorMeasure::AtomDensity { density, .. } => {
                let space = density.space();
                let mut out = Vec::new();
                for p in 0..space.len() {
                    let v = vscale(space.weight(p), density.value(p));
                    if !exact::is_vzero(&v) {
                        out.push((p, v));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Unsupported(
                "carriers exist on atomic representations",
            )),
        }
    }

    /// The variation `‖Ω‖` as exact squared-norm terms.
    pub fn variation(&self, norm: Norm) -> Result<VariationMeasure> {
        match self {
            VectorMeasure::AtomList {
                space, carriers, ..
            } => {
                let mut terms = alloc::vec![Vec::new(); space.len()];
                for (p, v) in carriers {
                    terms[*p].push(norm.value_sq(v));
                }
                Ok(VariationMeasure {
                    norm,
                    rep: VarRep::Points {
                        space: space.clone(),
                        terms,
                    },
                })
            }
            VectorMeasure::AtomDensity { .. } => {
                let carriers = self.to_carriers()?;
                let space = self.atomic_space().expect("atomic").clone();
                let mut terms = alloc::vec![Vec::new(); space.len()];
                for (p, v) in &carriers {
                    terms[*p].push(norm.value_sq(v));
                }
                Ok(VariationMeasure {
                    norm,
                    rep: VarRep::Points { space, terms },
                })
            }
            VectorMeasure::CellDensity { density, mu } => {
                let depth = density.native_depth();
                let values = density.dense_values(depth)?;
                let gnorm_sq = values.iter().map(|v| norm.value_sq(v)).collect();
                Ok(VariationMeasure {
                    norm,
                    rep: VarRep::Cells {
                        mu: mu.clone(),
                        depth,
                        gnorm_sq,
                    },
                })
            }
            VectorMeasure::EvalDensity { .. } => {
                Err(Error::Unsupported("variation of evaluator densities"))
            }
        }
    }

    /// Restriction `fΩ` by a bounded step function.
    pub fn restrict(&self, f: &StepFunction) -> Result<VectorMeasure> {
        match (self, f) {
            (
                VectorMeasure::AtomList {
                    space,
                    dim_out,
                    carriers,
                },
                StepFunction::Points(fv),
            ) => {
                if fv.space() != space {
                    return Err(Error::ModelMismatch);
                }
                let scaled = carriers
                    .iter()
                    .map(|(p, v)| (*p, vscale(fv.scalar_value(*p), v)))
                    .collect();
                VectorMeasure::atom_list(space.clone(), *dim_out, scaled)
            }
            (VectorMeasure::AtomDensity { density, mu }, StepFunction::Points(fv)) => {
                if fv.space() != density.space() {
                    return Err(Error::ModelMismatch);
                }
                let values = (0..density.space().len())
                    .map(|p| vscale(fv.scalar_value(p), density.value(p)))
                    .collect();
                VectorMeasure::atom_density(
                    Section::new(density.space().clone(), values)?,
                    mu.clone(),
                )
            }
            (VectorMeasure::CellDensity { density, mu }, StepFunction::Cells(fc)) => {
                VectorMeasure::cell_density(density.scale_by(fc)?, mu.clone())
            }
            _ => Err(Error::ModelMismatch),
        }
    }

    /// Restriction to a set: `Ω|_F = 1_F Ω`.
    pub fn restrict_to_points(&self, f: &PointSet) -> Result<VectorMeasure> {
        let space = self.atomic_space().ok_or(Error::ModelMismatch)?.clone();
        if f.space() != &space {
            return Err(Error::ModelMismatch);
        }
        let values = (0..space.len())
            .map(|p| exact::qi(f.contains(p) as i64))
            .collect();
        self.restrict(&StepFunction::Points(Section::scalar(space, values)?))
    }

    /// The elementary Bartle integral `∫ f dΩ = Σ λ_i Ω(E_i)`.
    pub fn bartle_integral(&self, f: &StepFunction) -> Result<Vector> {
        match (self, f) {
            (
                VectorMeasure::AtomList {
                    space,
                    dim_out,
                    carriers,
                },
                StepFunction::Points(fv),
            ) => {
                if fv.space() != space {
                    return Err(Error::ModelMismatch);
                }
                let mut acc = vzero(*dim_out);
                for (p, v) in carriers {
                    vadd_assign(&mut acc, &vscale(fv.scalar_value(*p), v));
                }
                Ok(acc)
            }
            (VectorMeasure::AtomDensity { .. }, StepFunction::Points(_)) => {
                self.restrict(f)?.total()
            }
            (VectorMeasure::CellDensity { .. }, StepFunction::Cells(_)) => {
                self.restrict(f)?.total()
            }
            (VectorMeasure::EvalDensity { eval, mu }, StepFunction::Cells(fc)) => {
                let h = mu.hierarchy().expect("validated");
                if fc.hierarchy != h {
                    return Err(Error::ModelMismatch);
                }
                let mut acc = vzero(eval.dim_out());
                for i in 0..h.cells_at(fc.depth) {
                    let c = &fc.values[i as usize];
                    if c.is_zero() {
                        continue;
                    }
                    let v = eval
                        .cell_integral(mu, h.cell(fc.depth, i))
                        .ok_or(Error::Unsupported("evaluator lacks exact cell integrals"))?;
                    vadd_assign(&mut acc, &vscale(c, &v));
                }
                Ok(acc)
            }
            _ => Err(Error::ModelMismatch),
        }
    }

    /// Exact `sup_E ‖Ω(E)‖²` by subset enumeration (atomic, ≤ 20 carriers).
    pub fn sup_range_norm_sq(&self, norm: Norm) -> Result<Q> {
        let carriers = self.to_carriers()?;
        if carriers.len() > 20 {
            return Err(Error::BadParameter(
                "range enumeration limited to 20 carriers",
            ));
        }
        let mut best = Q::zero();
        for mask in 0u32..(1u32 << carriers.len()) {
            let mut acc = vzero(self.dim_out());
            for (i, (_, v)) in carriers.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    vadd_assign(&mut acc, v);
                }
            }
            let nsq = norm.value_sq(&acc);
            if nsq > best {
                best = nsq;
            }
        }
        Ok(best)
    }

    /// Density value at a point (density representations).
    pub fn density_value_at(&self, x: &Point) -> Result<Vector> {
        match self {
            VectorMeasure::CellDensity { density, .. } => Ok(density.value_at(x)),
            VectorMeasure::EvalDensity { eval, .. } => eval
                .eval_exact(x.coords())
                .ok_or(Error::Unsupported("evaluator lacks exact point values")),
            _ => Err(Error::Unsupported("density value needs a density form")),
        }
    }
}

/// Bounded scalar step multipliers on either model.
#[derive(Clone, Debug, PartialEq)]
pub enum StepFunction {
    Cells(StepFunctionCells),
    Points(Section),
}

impl StepFunction {
    pub fn sup_norm(&self) -> Q {
        match self {
            StepFunction::Cells(f) => f.sup_norm(),
            StepFunction::Points(s) => s
                .values()
                .iter()
                .map(|v| v[0].abs())
                .max()
                .unwrap_or_else(Q::zero),
        }
    }
}

// ---------------------------------------------------------------------------
// Variation measures
// ---------------------------------------------------------------------------

/// `‖Ω‖` kept as exact squared-norm terms: rational-exact sums for the L1
/// norm (and Euclidean perfect squares), high-precision approximations
/// otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationMeasure {
    pub norm: Norm,
    rep: VarRep,
}

#[derive(Clone, Debug, PartialEq)]
enum VarRep {
    /// Per ground point, the squared norms contributed there.
    Points {
        space: Arc<AtomicSpace>,
        terms: Vec<Vec<Q>>,
    },
    /// Per cell at `depth`, the squared norm of the density; the term of a
    /// cell is `‖g_c‖·μ(c)`.
    Cells {
        mu: BaseMeasure,
        depth: u32,
        gnorm_sq: Vec<Q>,
    },
}

impl VariationMeasure {
    /// Squared terms whose square-root sum is `‖Ω‖(E)` for a point set.
    pub fn terms_points(&self, e: &PointSet) -> Result<Vec<Q>> {
        match &self.rep {
            VarRep::Points { space, terms } => {
                if e.space() != space {
                    return Err(Error::ModelMismatch);
                }
                let mut out = Vec::new();
                for p in e.iter() {
                    out.extend(terms[p].iter().cloned());
                }
                Ok(out)
            }
            VarRep::Cells { .. } => Err(Error::ModelMismatch),
        }
    }

    /// Squared terms for a cell set (the set must not be finer than the
    /// density's native depth).
    pub fn terms_cells(&self, e: &CellSet) -> Result<Vec<Q>> {
        match &self.rep {
            VarRep::Cells {
                mu,
                depth,
                gnorm_sq,
            } => {
                let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
                if h != e.hierarchy() {
                    return Err(Error::ModelMismatch);
                }
                if e.depth() > *depth {
                    return Err(Error::Unsupported(
                        "variation terms on sets finer than the density depth",
                    ));
                }
                let e = e.refine(*depth)?;
                let mut out = Vec::new();
                for cell in e.iter_cells() {
                    let g = &gnorm_sq[cell.index as usize];
                    if g.is_zero() {
                        continue;
                    }
                    let m = mu.cell_mass(cell)?;
                    if m.is_zero() {
                        continue;
                    }
                    out.push(g * &m * &m);
                }
                Ok(out)
            }
            VarRep::Points { .. } => Err(Error::ModelMismatch),
        }
    }

    pub fn terms_total(&self) -> Vec<Q> {
        match &self.rep {
            VarRep::Points { terms, .. } => terms.iter().flat_map(|t| t.iter().cloned()).collect(),
            VarRep::Cells {
                mu,
                depth,
                gnorm_sq,
            } => {
                let h = mu.hierarchy().expect("hierarchy measure");
                let mut out = Vec::new();
                for (i, g) in gnorm_sq.iter().enumerate() {
                    if g.is_zero() {
                        continue;
                    }
                    let m = mu
                        .cell_mass(h.cell(*depth, i as u64))
                        .expect("hierarchy model");
                    if !m.is_zero() {
                        out.push(g * &m * &m);
                    }
                }
                out
            }
        }
    }

    /// `‖Ω‖(X)` exactly, when every term has a rational root.
    pub fn total_exact(&self) -> Option<Q> {
        sum_sqrt_exact(&self.terms_total())
    }

    /// `‖Ω‖(X)` with per-term error below `10^-SQRT_DIGITS`.
    pub fn total_approx(&self) -> Q {
        sum_sqrt_approx(&self.terms_total(), SQRT_DIGITS)
    }

    /// The variation as a plain base measure, when exactly representable.
    pub fn to_base_measure(&self) -> Option<BaseMeasure> {
        match &self.rep {
            VarRep::Points { space, terms } => {
                let mut weights = Vec::with_capacity(space.len());
                for t in terms {
                    weights.push(sum_sqrt_exact(t)?);
                }
                let space2 = AtomicSpace::new(
                    space.labels().to_vec(),
                    weights,
                    (0..space.atom_count())
                        .map(|j| space.atom_points(j).to_vec())
                        .collect(),
                )
                .ok()?;
                Some(BaseMeasure::atomic(space2))
            }
            VarRep::Cells {
                mu,
                depth,
                gnorm_sq,
            } => {
                let h = mu.hierarchy()?;
                let mut densities = Vec::with_capacity(gnorm_sq.len());
                for (i, g) in gnorm_sq.iter().enumerate() {
                    let gn = sqrt_exact(g)?;
                    // density of ‖Ω‖ against Lebesgue: ‖g‖ times dμ/dλ
                    let cell = h.cell(*depth, i as u64);
                    let vol = h.cell_volume(*depth);
                    let dmu = mu.cell_mass(cell).ok()? / vol;
                    densities.push(gn * dmu);
                }
                BaseMeasure::step_density(h, *depth, densities).ok()
            }
        }
    }
}

/// `‖Ω(E)‖ ≤ ‖Ω‖(E)` verdict, exact when both sides are rational and within
/// the high-precision margin otherwise.
pub fn domination_holds(value_norm_sq: &Q, variation_terms_sq: &[Q]) -> bool {
    match (
        sqrt_exact(value_norm_sq),
        sum_sqrt_exact(variation_terms_sq),
    ) {
        (Some(lhs), Some(rhs)) => lhs <= rhs,
        _ => {
            let lhs = crate::exact::sqrt_floor(value_norm_sq, SQRT_DIGITS);
            let rhs = sum_sqrt_approx(variation_terms_sq, SQRT_DIGITS);
            lhs <= rhs + comparison_margin()
        }
    }
}

/// The documented tolerance for mixed irrational sums: `1e-30` (roots carry
/// at least twice that precision).
pub fn comparison_margin() -> Q {
    Q::new(1.into(), num_bigint::BigInt::from(10).pow(30))
}

// ---------------------------------------------------------------------------
// Pushforward
// ---------------------------------------------------------------------------

/// A measurable map between finite models.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelMap {
    /// Point-to-point map between atomic spaces.
    Points {
        from: Arc<AtomicSpace>,
        to: Arc<AtomicSpace>,
        assignment: Vec<usize>,
    },
    /// Projection of 2-d leaf cells onto the cells of one axis.
    AxisProjection {
        from: DyadicHierarchy,
        to: DyadicHierarchy,
        axis: u8,
        depth: u32,
    },
}

impl ModelMap {
    pub fn points(
        from: Arc<AtomicSpace>,
        to: Arc<AtomicSpace>,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if assignment.len() != from.len() {
            return Err(Error::Invalid("one target per ground point required"));
        }
        if assignment.iter().any(|&t| t >= to.len()) {
            return Err(Error::Invalid("map target out of range"));
        }
        Ok(ModelMap::Points {
            from,
            to,
            assignment,
        })
    }

    pub fn axis_projection(from: DyadicHierarchy, axis: u8, depth: u32) -> Result<Self> {
        if from.dim() != 2 || axis > 1 {
            return Err(Error::Invalid("axis projection needs a 2-d source"));
        }
        let to = DyadicHierarchy::new(1, from.max_depth())?;
        if depth > from.max_depth() {
            return Err(Error::Invalid("projection depth out of range"));
        }
        Ok(ModelMap::AxisProjection {
            from,
            to,
            axis,
            depth,
        })
    }

    pub fn identity_points(space: Arc<AtomicSpace>) -> Self {
        let assignment = (0..space.len()).collect();
        ModelMap::Points {
            from: space.clone(),
            to: space,
            assignment,
        }
    }

    /// Preimage of a target point set (point maps).
    pub fn preimage(&self, e: &PointSet) -> Result<PointSet> {
        match self {
            ModelMap::Points {
                from,
                to,
                assignment,
            } => {
                if e.space() != to {
                    return Err(Error::ModelMismatch);
                }
                let pts: Vec<usize> = (0..from.len())
                    .filter(|&p| e.contains(assignment[p]))
                    .collect();
                PointSet::from_points(from.clone(), &pts)
            }
            _ => Err(Error::Unsupported("preimage on point maps only")),
        }
    }
}

/// `φ_#Ω`, the pushforward measure: `(φ_#Ω)(E) = Ω(φ⁻¹(E))`.
pub fn pushforward(om: &VectorMeasure, map: &ModelMap) -> Result<VectorMeasure> {
    match map {
        ModelMap::Points {
            from,
            to,
            assignment,
        } => {
            if om.atomic_space() != Some(from) {
                return Err(Error::ModelMismatch);
            }
            let carriers = om.to_carriers()?;
            let mut sums: Vec<Vector> = alloc::vec![vzero(om.dim_out()); to.len()];
            for (p, v) in &carriers {
                vadd_assign(&mut sums[assignment[*p]], v);
            }
            let out = sums
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !exact::is_vzero(v))
                .collect();
            VectorMeasure::atom_list(to.clone(), om.dim_out(), out)
        }
        ModelMap::AxisProjection {
            from,
            to,
            axis,
            depth,
        } => {
            let VectorMeasure::CellDensity { density, mu } = om else {
                return Err(Error::Unsupported("axis projection pushes cell densities"));
            };
            if density.hierarchy() != *from {
                return Err(Error::ModelMismatch);
            }
            let depth = (*depth).max(density.native_depth());
            let side = 1u64 << depth;
            let mut column_values = alloc::vec![vzero(om.dim_out()); side as usize];
            for i in 0..from.cells_at(depth) {
                let cell = from.cell(depth, i);
                let coords = from.coords(cell);
                let col = coords[*axis as usize];
                let v = simple_cell_integral(density, mu, cell)?;
                vadd_assign(&mut column_values[col as usize], &v);
            }
            // target density against 1-d Lebesgue
            let target_mu = BaseMeasure::lebesgue(*to);
            let scale = exact::pow2(depth as i64);
            let values: Vec<Vector> = column_values.iter().map(|v| vscale(&scale, v)).collect();
            let density = SimpleMap::from_cell_values(*to, depth, &values)?;
            VectorMeasure::cell_density(density, target_mu)
        }
    }
}

/// `φ_#‖Ω‖` as a variation measure on the target model.
pub fn pushforward_variation(var: &VariationMeasure, map: &ModelMap) -> Result<VariationMeasure> {
    match (map, &var.rep) {
        (
            ModelMap::Points {
                from,
                to,
                assignment,
            },
            VarRep::Points { space, terms },
        ) => {
            if space != from {
                return Err(Error::ModelMismatch);
            }
            let mut out = alloc::vec![Vec::new(); to.len()];
            for (p, t) in terms.iter().enumerate() {
                out[assignment[p]].extend(t.iter().cloned());
            }
            Ok(VariationMeasure {
                norm: var.norm,
                rep: VarRep::Points {
                    space: to.clone(),
                    terms: out,
                },
            })
        }
        _ => Err(Error::Unsupported(
            "variation pushforward on point maps only",
        )),
    }
}

// ---------------------------------------------------------------------------
// Brute-force variation oracle
// ---------------------------------------------------------------------------

/// The partition supremum `sup Σ_i ‖Ω(E_i)‖` over all set partitions of the
/// carriers, enumerated exhaustively (Bell numbers; carriers ≤ 10).
///
/// This is the independent oracle for [`VectorMeasure::variation`]: it never
/// consults the per-carrier shortcut. Exact for the L1 norm; high-precision
/// for Euclidean sums.
pub fn variation_partition_supremum(vectors: &[Vector], norm: Norm) -> Result<Q> {
    let n = vectors.len();
    if n > 10 {
        return Err(Error::BadParameter(
            "partition enumeration limited to 10 carriers",
        ));
    }
    if n == 0 {
        return Ok(Q::zero());
    }
    let mut assignment = alloc::vec![0usize; n];
    let mut best = Q::zero();
    loop {
        let blocks = assignment.iter().copied().max().unwrap_or(0) + 1;
        let mut sums = alloc::vec![vzero(vectors[0].len()); blocks];
        for (i, &b) in assignment.iter().enumerate() {
            vadd_assign(&mut sums[b], &vectors[i]);
        }
        let terms: Vec<Q> = sums.iter().map(|s| norm.value_sq(s)).collect();
        let value = match sum_sqrt_exact(&terms) {
            Some(v) => v,
            None => sum_sqrt_approx(&terms, SQRT_DIGITS),
        };
        if value > best {
            best = value;
        }
        if !next_restricted_growth(&mut assignment) {
            break;
        }
    }
    Ok(best)
}

fn next_restricted_growth(a: &mut [usize]) -> bool {
    let n = a.len();
    for i in (1..n).rev() {
        let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] <= max_prefix {
            a[i] += 1;
            for x in a[i + 1..].iter_mut() {
                *x = 0;
            }
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Radon–Nikodym derivatives
// ---------------------------------------------------------------------------

/// A Radon–Nikodym derivative, constant on the generators of its model.
#[derive(Clone, Debug, PartialEq)]
pub enum RnDerivative {
    Cells(SimpleMap),
    Atoms(Section),
}

/// `dΩ/dμ`: the generator-constant density with `Ω(E) = ∫_E (dΩ/dμ) dμ`
/// exactly on the represented algebra. Errors with a witness when `Ω` charges
/// a `μ`-null generator.
pub fn rn_derivative(om: &VectorMeasure, mu: &BaseMeasure) -> Result<RnDerivative> {
    match (om, mu) {
        (
            VectorMeasure::AtomList {
                space,
                dim_out,
                carriers,
            },
            BaseMeasure::AtomicWeights { space: ms },
        ) => {
            if space != ms {
                return Err(Error::ModelMismatch);
            }
            for (p, v) in carriers {
                if space.is_null_point(*p) && !exact::is_vzero(v) {
                    return Err(Error::NotAbsolutelyContinuous {
                        witness: space.labels()[*p].clone(),
                    });
                }
            }
            let mut per_atom = alloc::vec![vzero(*dim_out); space.atom_count()];
            for (p, v) in carriers {
                vadd_assign(&mut per_atom[space.atom_of(*p)], v);
            }
            let values: Vec<Vector> = (0..space.len())
                .map(|p| {
                    let j = space.atom_of(p);
                    vscale(&(Q::one() / space.atom_mass(j)), &per_atom[j])
                })
                .collect();
            Ok(RnDerivative::Atoms(Section::new(space.clone(), values)?))
        }
        (VectorMeasure::AtomDensity { .. }, BaseMeasure::AtomicWeights { .. }) => {
            let carriers = om.to_carriers()?;
            let space = om.atomic_space().expect("atomic").clone();
            let flat = VectorMeasure::atom_list(space, om.dim_out(), carriers)?;
            rn_derivative(&flat, mu)
        }
        (VectorMeasure::CellDensity { density, mu: om_mu }, _) => {
            let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
            if h != density.hierarchy() {
                return Err(Error::ModelMismatch);
            }
            let depth = resolution_depth(density.native_depth(), om_mu, mu);
            let n = h.cells_at(depth) as usize;
            let mut values = alloc::vec![vzero(density.dim_out()); n];
            for (i, slot) in values.iter_mut().enumerate() {
                let cell = h.cell(depth, i as u64);
                let omega = simple_cell_integral(density, om_mu, cell)?;
                let m = mu.cell_mass(cell)?;
                if m.is_zero() {
                    if !exact::is_vzero(&omega) {
                        return Err(Error::NotAbsolutelyContinuous {
                            witness: alloc::format!("cell({depth},{i})"),
                        });
                    }
                    continue;
                }
                *slot = omega.iter().map(|c| c / &m).collect();
            }
            Ok(RnDerivative::Cells(SimpleMap::from_cell_values(
                h, depth, &values,
            )?))
        }
        _ => Err(Error::Unsupported(
            "derivative needs matching finite representations",
        )),
    }
}

fn resolution_depth(native: u32, om_mu: &BaseMeasure, mu: &BaseMeasure) -> u32 {
    let mut depth = native;
    for m in [om_mu, mu] {
        if let BaseMeasure::StepDensity { grid_depth, .. } = m {
            depth = depth.max(*grid_depth);
        }
    }
    depth
}

/// One probed depth of a ratio scan.
#[derive(Clone, Debug)]
pub struct RnScanRow {
    pub depth: u32,
    pub ratio: Vector,
    pub residual_sq: Q,
}

#[derive(Clone, Debug)]
pub struct RnScanReport {
    pub point: Point,
    pub target: Vector,
    pub rows: Vec<RnScanRow>,
    /// Depth at which the chain hit a null cell, if any (chain truncated).
    pub truncated_at: Option<u32>,
    pub result: crate::basis::ILimitResult,
}

/// Shrinking-cell ratio scans `Ω(P_k^x)/μ(P_k^x)` against the derivative
/// value at each probed point.
pub fn rn_ratio_scan(
    om: &VectorMeasure,
    mu: &BaseMeasure,
    points: &[Point],
    tol: &Q,
    k_max: u32,
    norm: Norm,
) -> Result<Vec<RnScanReport>> {
    let h = mu.hierarchy().ok_or(Error::ModelMismatch)?;
    if !h.chain_depth_ok(k_max) {
        return Err(Error::BadParameter(
            "k_max too deep for the packed cell index",
        ));
    }
    match om {
        VectorMeasure::CellDensity { mu: om_mu, .. }
        | VectorMeasure::EvalDensity { mu: om_mu, .. } => {
            if om_mu != mu {
                return Err(Error::Unsupported(
                    "scan expects the density's own base measure",
                ));
            }
        }
        _ => return Err(Error::Unsupported("ratio scans run on density forms")),
    }
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let target = om.density_value_at(x)?;
        let mut rows = Vec::new();
        let mut ratios = Vec::new();
        let mut truncated_at = None;
        for cell in h.chain_of(x, k_max) {
            let m = mu.cell_mass(cell)?;
            if m.is_zero() {
                truncated_at = Some(cell.depth);
                break;
            }
            let omega = om.evaluate_cell(cell)?;
            let ratio: Vector = omega.iter().map(|c| c / &m).collect();
            let residual_sq = norm.value_sq(&exact::vsub(&ratio, &target));
            rows.push(RnScanRow {
                depth: cell.depth,
                ratio: ratio.clone(),
                residual_sq,
            });
            ratios.push(ratio);
        }
        let result = crate::basis::chain_limit(&ratios, tol)?;
        out.push(RnScanReport {
            point: x.clone(),
            target,
            rows,
            truncated_at,
            result,
        });
    }
    Ok(out)
}

/// Per-cell comparison `‖dΩ/dμ‖ ≤ d‖Ω‖/dμ` at every depth through the
/// density's native depth.
#[derive(Clone, Debug)]
pub struct DensityNormRow {
    pub depth: u32,
    pub cell_index: u64,
    pub holds: bool,
    pub strict: bool,
    pub equality: bool,
}

#[derive(Clone, Debug)]
pub struct DensityNormReport {
    pub rows: Vec<DensityNormRow>,
    pub all_hold: bool,
    /// Equality on every positive cell at the native depth.
    pub native_equality: bool,
}

/// Verifies the density-norm inequality for a cell-density measure: coarse
/// ratios contract the norm, with equality at the density's native depth.
pub fn density_norm_inequality(om: &VectorMeasure, norm: Norm) -> Result<DensityNormReport> {
    let VectorMeasure::CellDensity { density, mu } = om else {
        return Err(Error::Unsupported(
            "density-norm report needs a cell density",
        ));
    };
    let h = density.hierarchy();
    let native = density.native_depth();
    let var = om.variation(norm)?;
    let mut rows = Vec::new();
    let mut all_hold = true;
    let mut native_equality = true;
    for depth in 0..=native {
        for i in 0..h.cells_at(depth) {
            let cell = h.cell(depth, i);
            let m = mu.cell_mass(cell)?;
            if m.is_zero() {
                continue;
            }
            let omega = simple_cell_integral(density, mu, cell)?;
            // ‖Ω(cell)/m‖ ≤ ‖Ω‖(cell)/m ⟺ ‖Ω(cell)‖ ≤ ‖Ω‖(cell)
            let lhs_sq = norm.value_sq(&omega);
            let cellset = CellSet::from_indices(h, depth, &[i])?;
            let terms = var.terms_cells(&cellset)?;
            let holds = domination_holds(&lhs_sq, &terms);
            let (strict, equality) = match (sqrt_exact(&lhs_sq), sum_sqrt_exact(&terms)) {
                (Some(l), Some(r)) => (l < r, l == r),
                _ => {
                    let l = crate::exact::sqrt_floor(&lhs_sq, SQRT_DIGITS);
                    let r = sum_sqrt_approx(&terms, SQRT_DIGITS);
                    (
                        &r - &l > comparison_margin(),
                        (r - l).abs() <= comparison_margin(),
                    )
                }
            };
            all_hold &= holds;
            if depth == native {
                native_equality &= equality;
            }
            rows.push(DensityNormRow {
                depth,
                cell_index: i,
                holds,
                strict,
                equality,
            });
        }
    }
    Ok(DensityNormReport {
        rows,
        all_hold,
        native_equality,
    })
}
