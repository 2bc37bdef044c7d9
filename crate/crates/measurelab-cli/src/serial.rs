//! JSON-compatible data transfer types for models, sets, and measures.
//! Rationals travel as `"p/q"` strings (plain integers and decimals are
//! accepted on input); round trips are exact.

use anyhow::{anyhow, bail, Context, Result};
use measurelab::atomic::{AtomicSpace, PointSet, Section};
use measurelab::bochner::{PolyProduct, Polynomial, SimpleMap, StepFunctionCells};
use measurelab::exact::{parse_q, q_to_string, Vector, Q};
use measurelab::hierarchy::{CellSet, DyadicHierarchy};
use measurelab::interval::{Interval, IntervalUnion};
use measurelab::measure::BaseMeasure;
use measurelab::vecmeasure::{ModelMap, StepFunction, VectorMeasure};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub fn rational(s: &str) -> Result<Q> {
    parse_q(s).ok_or_else(|| anyhow!("invalid rational: {s:?}"))
}

pub fn rationals(xs: &[String]) -> Result<Vec<Q>> {
    xs.iter().map(|s| rational(s)).collect()
}

pub fn vector_dto(v: &[Q]) -> Vec<String> {
    v.iter().map(q_to_string).collect()
}

// ---------------------------------------------------------------------------
// Hierarchies and intervals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HierarchyDto {
    pub dim: u8,
    pub depth: u32,
}

impl HierarchyDto {
    pub fn to_core(self) -> Result<DyadicHierarchy> {
        DyadicHierarchy::new(self.dim, self.depth).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(h: DyadicHierarchy) -> Self {
        HierarchyDto {
            dim: h.dim(),
            depth: h.max_depth(),
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalDto {
    pub lo: String,
    pub hi: String,
    #[serde(default = "default_true")]
    pub lo_closed: bool,
    #[serde(default = "default_true")]
    pub hi_closed: bool,
}

impl IntervalDto {
    pub fn to_core(&self) -> Result<Interval> {
        Interval::new(
            rational(&self.lo)?,
            rational(&self.hi)?,
            self.lo_closed,
            self.hi_closed,
        )
        .map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(i: &Interval) -> Self {
        IntervalDto {
            lo: q_to_string(&i.lo),
            hi: q_to_string(&i.hi),
            lo_closed: i.lo_closed,
            hi_closed: i.hi_closed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalUnionDto {
    pub ambient: IntervalDto,
    pub parts: Vec<IntervalDto>,
}

impl IntervalUnionDto {
    pub fn to_core(&self) -> Result<IntervalUnion> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.to_core())
            .collect::<Result<Vec<_>>>()?;
        IntervalUnion::new(self.ambient.to_core()?, parts).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(u: &IntervalUnion) -> Self {
        IntervalUnionDto {
            ambient: IntervalDto::from_core(u.ambient()),
            parts: u.parts().iter().map(IntervalDto::from_core).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Atomic spaces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDto {
    pub points: Vec<String>,
    pub weights: Vec<String>,
    /// Atom partition as lists of point indices; omitted means one atom per
    /// point.
    #[serde(default)]
    pub atoms: Option<Vec<Vec<usize>>>,
}

impl SpaceDto {
    pub fn to_core(&self) -> Result<Arc<AtomicSpace>> {
        let weights = rationals(&self.weights)?;
        match &self.atoms {
            Some(atoms) => AtomicSpace::new(self.points.clone(), weights, atoms.clone()),
            None => AtomicSpace::of_labels(self.points.clone(), weights),
        }
        .map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(s: &AtomicSpace) -> Self {
        SpaceDto {
            points: s.labels().to_vec(),
            weights: s.weights().iter().map(q_to_string).collect(),
            atoms: Some(
                (0..s.atom_count())
                    .map(|j| s.atom_points(j).to_vec())
                    .collect(),
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Base measures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureDto {
    Lebesgue,
    StepDensity {
        grid_depth: u32,
        densities: Vec<String>,
    },
    Atomic {
        space: SpaceDto,
    },
}

impl MeasureDto {
    pub fn to_core(&self, hierarchy: Option<DyadicHierarchy>) -> Result<BaseMeasure> {
        match self {
            MeasureDto::Lebesgue => Ok(BaseMeasure::lebesgue(
                hierarchy.context("lebesgue needs a model")?,
            )),
            MeasureDto::StepDensity {
                grid_depth,
                densities,
            } => BaseMeasure::step_density(
                hierarchy.context("step density needs a model")?,
                *grid_depth,
                rationals(densities)?,
            )
            .map_err(|e| anyhow!("{e}")),
            MeasureDto::Atomic { space } => Ok(BaseMeasure::atomic(space.to_core()?)),
        }
    }

    pub fn from_core(mu: &BaseMeasure) -> Self {
        match mu {
            BaseMeasure::Lebesgue { .. } => MeasureDto::Lebesgue,
            BaseMeasure::StepDensity {
                grid_depth,
                densities,
                ..
            } => MeasureDto::StepDensity {
                grid_depth: *grid_depth,
                densities: densities.iter().map(q_to_string).collect(),
            },
            BaseMeasure::AtomicWeights { space } => MeasureDto::Atomic {
                space: SpaceDto::from_core(space),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Cell sets, simple maps, functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSetDto {
    pub depth: u32,
    pub cells: Vec<u64>,
}

impl CellSetDto {
    pub fn to_core(&self, h: DyadicHierarchy) -> Result<CellSet> {
        CellSet::from_indices(h, self.depth, &self.cells).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(s: &CellSet) -> Self {
        CellSetDto {
            depth: s.depth(),
            cells: s.iter_indices().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimpleMapDto {
    pub depth: u32,
    /// One vector value per cell at `depth`.
    pub values: Vec<Vec<String>>,
}

impl SimpleMapDto {
    pub fn to_core(&self, h: DyadicHierarchy) -> Result<SimpleMap> {
        let values = self
            .values
            .iter()
            .map(|v| rationals(v))
            .collect::<Result<Vec<Vector>>>()?;
        SimpleMap::from_cell_values(h, self.depth, &values).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(m: &SimpleMap) -> Result<Self> {
        let depth = m.native_depth();
        let values = m
            .dense_values(depth)
            .map_err(|e| anyhow!("{e}"))?
            .iter()
            .map(|v| vector_dto(v))
            .collect();
        Ok(SimpleMapDto { depth, values })
    }
}

/// Vector-valued step section on an atomic space: one value per point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionDto {
    pub values: Vec<Vec<String>>,
}

impl SectionDto {
    pub fn to_core(&self, space: Arc<AtomicSpace>) -> Result<Section> {
        let values = self
            .values
            .iter()
            .map(|v| rationals(v))
            .collect::<Result<Vec<Vector>>>()?;
        Section::new(space, values).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_core(s: &Section) -> Self {
        SectionDto {
            values: s.values().iter().map(|v| vector_dto(v)).collect(),
        }
    }
}

/// Evaluator descriptions accepted by the experiment commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionDto {
    /// Scalar polynomial `Σ c_i t^i` on `[0,1)`.
    Poly { coeffs: Vec<String> },
    /// Separable polynomial `p(x)·q(y)` on `[0,1)²`.
    PolyProduct { x: Vec<String>, y: Vec<String> },
    /// Simple map given by dense per-cell vector values.
    Step(SimpleMapDto),
    /// A battery of seeded random step maps.
    SeededSteps { count: u32, depth: u32, dim: usize },
    /// Constant vector.
    Constant { value: Vec<String> },
}

pub enum Function {
    Poly(Polynomial),
    PolyProduct(PolyProduct),
    Step(SimpleMap),
    SeededSteps { count: u32, depth: u32, dim: usize },
    Constant(Vector),
}

impl FunctionDto {
    pub fn to_core(&self, h: DyadicHierarchy) -> Result<Function> {
        Ok(match self {
            FunctionDto::Poly { coeffs } => {
                if h.dim() != 1 {
                    bail!("polynomial functions need a 1-d model");
                }
                Function::Poly(Polynomial::new(rationals(coeffs)?))
            }
            FunctionDto::PolyProduct { x, y } => {
                if h.dim() != 2 {
                    bail!("separable products need a 2-d model");
                }
                Function::PolyProduct(PolyProduct::new(
                    Polynomial::new(rationals(x)?),
                    Polynomial::new(rationals(y)?),
                ))
            }
            FunctionDto::Step(dto) => Function::Step(dto.to_core(h)?),
            FunctionDto::SeededSteps { count, depth, dim } => Function::SeededSteps {
                count: *count,
                depth: *depth,
                dim: *dim,
            },
            FunctionDto::Constant { value } => Function::Constant(rationals(value)?),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionCellsDto {
    pub depth: u32,
    pub values: Vec<String>,
}

impl StepFunctionCellsDto {
    pub fn to_core(&self, h: DyadicHierarchy) -> Result<StepFunctionCells> {
        StepFunctionCells::new(h, self.depth, rationals(&self.values)?).map_err(|e| anyhow!("{e}"))
    }
}

// ---------------------------------------------------------------------------
// Vector measures and maps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VectorMeasureDto {
    /// Carriers as `[label, vector]` pairs on an atomic space.
    AtomList {
        dim: usize,
        carriers: Vec<(String, Vec<String>)>,
    },
    /// Simple-map density against the run's base measure.
    CellDensity { density: SimpleMapDto },
    /// Section density against the run's atomic measure.
    AtomDensity { density: SectionDto },
    /// Polynomial density against the run's base measure (1-d).
    EvalPoly { coeffs: Vec<String> },
    /// `Ω = c·μ` for a scalar constant.
    ScalarMultiple { factor: String },
}

impl VectorMeasureDto {
    pub fn to_core(&self, mu: &BaseMeasure) -> Result<VectorMeasure> {
        match self {
            VectorMeasureDto::AtomList { dim, carriers } => {
                let space = mu
                    .atomic_space()
                    .context("atom lists need an atomic measure")?
                    .clone();
                let mut list = Vec::new();
                for (label, v) in carriers {
                    let p = space
                        .label_index(label)
                        .with_context(|| format!("unknown point label {label:?}"))?;
                    list.push((p, rationals(v)?));
                }
                VectorMeasure::atom_list(space, *dim, list).map_err(|e| anyhow!("{e}"))
            }
            VectorMeasureDto::CellDensity { density } => {
                let h = mu
                    .hierarchy()
                    .context("cell densities need a hierarchy measure")?;
                VectorMeasure::cell_density(density.to_core(h)?, mu.clone())
                    .map_err(|e| anyhow!("{e}"))
            }
            VectorMeasureDto::AtomDensity { density } => {
                let space = mu
                    .atomic_space()
                    .context("atom densities need an atomic measure")?
                    .clone();
                VectorMeasure::atom_density(density.to_core(space)?, mu.clone())
                    .map_err(|e| anyhow!("{e}"))
            }
            VectorMeasureDto::EvalPoly { coeffs } => {
                let poly = Polynomial::new(rationals(coeffs)?);
                VectorMeasure::eval_density(Arc::new(poly), mu.clone()).map_err(|e| anyhow!("{e}"))
            }
            VectorMeasureDto::ScalarMultiple { factor } => {
                let c = rational(factor)?;
                match mu {
                    BaseMeasure::AtomicWeights { space } => {
                        let values = vec![vec![c]; space.len()];
                        VectorMeasure::atom_density(
                            Section::new(space.clone(), values).map_err(|e| anyhow!("{e}"))?,
                            mu.clone(),
                        )
                        .map_err(|e| anyhow!("{e}"))
                    }
                    _ => {
                        let h = mu.hierarchy().context("scalar multiple needs a model")?;
                        let density =
                            SimpleMap::constant(h, vec![c]).map_err(|e| anyhow!("{e}"))?;
                        VectorMeasure::cell_density(density, mu.clone()).map_err(|e| anyhow!("{e}"))
                    }
                }
            }
        }
    }

    pub fn from_core(om: &VectorMeasure) -> Result<Self> {
        match om {
            VectorMeasure::AtomList {
                space,
                dim_out,
                carriers,
            } => Ok(VectorMeasureDto::AtomList {
                dim: *dim_out,
                carriers: carriers
                    .iter()
                    .map(|(p, v)| (space.labels()[*p].clone(), vector_dto(v)))
                    .collect(),
            }),
            VectorMeasure::CellDensity { density, .. } => Ok(VectorMeasureDto::CellDensity {
                density: SimpleMapDto::from_core(density)?,
            }),
            VectorMeasure::AtomDensity { density, .. } => Ok(VectorMeasureDto::AtomDensity {
                density: SectionDto::from_core(density),
            }),
            VectorMeasure::EvalDensity { .. } => {
                bail!("evaluator densities have no serialized form")
            }
        }
    }
}

/// Point map given by per-label targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointMapDto {
    pub targets: Vec<String>,
    /// `assignment[i]` is the target label of source point `i`.
    pub assignment: Vec<String>,
}

impl PointMapDto {
    pub fn to_core(&self, from: Arc<AtomicSpace>) -> Result<ModelMap> {
        let target_space =
            AtomicSpace::of_labels(self.targets.clone(), vec![Q::one(); self.targets.len()])
                .map_err(|e| anyhow!("{e}"))?;
        let assignment = self
            .assignment
            .iter()
            .map(|label| {
                target_space
                    .label_index(label)
                    .with_context(|| format!("unknown target label {label:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        ModelMap::points(from, target_space, assignment).map_err(|e| anyhow!("{e}"))
    }
}

/// Step multipliers for restriction/Bartle runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepFunctionDto {
    Cells(StepFunctionCellsDto),
    Points { values: Vec<String> },
}

impl StepFunctionDto {
    pub fn to_core(&self, mu: &BaseMeasure) -> Result<StepFunction> {
        match self {
            StepFunctionDto::Cells(dto) => {
                let h = mu
                    .hierarchy()
                    .context("cell step functions need a hierarchy")?;
                Ok(StepFunction::Cells(dto.to_core(h)?))
            }
            StepFunctionDto::Points { values } => {
                let space = mu
                    .atomic_space()
                    .context("point step functions need an atomic measure")?;
                Ok(StepFunction::Points(
                    Section::scalar(space.clone(), rationals(values)?)
                        .map_err(|e| anyhow!("{e}"))?,
                ))
            }
        }
    }
}

/// Point sets by label (atomic models).
pub fn pointset_from_labels(space: &Arc<AtomicSpace>, labels: &[String]) -> Result<PointSet> {
    let mut pts = Vec::new();
    for l in labels {
        pts.push(
            space
                .label_index(l)
                .with_context(|| format!("unknown point label {l:?}"))?,
        );
    }
    PointSet::from_points(space.clone(), &pts).map_err(|e| anyhow!("{e}"))
}

use num_traits::One;

#[cfg(test)]
mod tests {
    use super::*;
    use measurelab::exact::qi;

    #[test]
    fn interval_union_roundtrip_exact() {
        let amb = Interval::closed(qi(-2), qi(2)).unwrap();
        let u = IntervalUnion::new(
            amb,
            vec![
                Interval::half_open(rational("-1/3").unwrap(), rational("1/7").unwrap()).unwrap(),
                Interval::point(qi(1)),
            ],
        )
        .unwrap();
        let dto = IntervalUnionDto::from_core(&u);
        let json = serde_json::to_string(&dto).unwrap();
        let back: IntervalUnionDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_core().unwrap(), u);
    }

    #[test]
    fn measure_roundtrip_exact() {
        let h = DyadicHierarchy::new(1, 4).unwrap();
        let mu = BaseMeasure::step_density(
            h,
            2,
            vec![
                qi(1),
                rational("2/3").unwrap(),
                qi(0),
                rational("7/5").unwrap(),
            ],
        )
        .unwrap();
        let dto = MeasureDto::from_core(&mu);
        let json = serde_json::to_string(&dto).unwrap();
        let back: MeasureDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_core(Some(h)).unwrap(), mu);
    }

    #[test]
    fn vector_measure_roundtrip_exact() {
        let space =
            AtomicSpace::of_labels(vec!["a".into(), "b".into()], vec![qi(1), qi(2)]).unwrap();
        let mu = BaseMeasure::atomic(space.clone());
        let om =
            VectorMeasure::atom_list(space, 2, vec![(0, vec![qi(3), rational("-1/2").unwrap()])])
                .unwrap();
        let dto = VectorMeasureDto::from_core(&om).unwrap();
        let json = serde_json::to_string(&dto).unwrap();
        let back: VectorMeasureDto = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_core(&mu).unwrap(), om);
    }
}
