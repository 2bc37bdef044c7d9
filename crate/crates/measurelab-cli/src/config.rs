//! Experiment configurations: one structured JSON document per run, with
//! command-line overrides for the numeric knobs.

use crate::serial::{
    rational, FunctionDto, HierarchyDto, MeasureDto, PointMapDto, SpaceDto, VectorMeasureDto,
};
use anyhow::{bail, Context, Result};
use measurelab::exact::Q;
use measurelab::hierarchy::Point;
use measurelab::sample;
use serde::{Deserialize, Serialize};

/// Numeric knobs common to all commands, with documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Knobs {
    pub seed: Option<u64>,
    /// Convergence tolerance as an exact rational or decimal string.
    #[serde(default = "default_tol")]
    pub tol: String,
    #[serde(default = "default_kmax")]
    pub k_max: u32,
    #[serde(default = "default_norm")]
    pub norm: String,
    #[serde(default = "default_quadrature")]
    pub quadrature: u32,
}

fn default_tol() -> String {
    "1e-4".into()
}

fn default_kmax() -> u32 {
    20
}

fn default_norm() -> String {
    "l1".into()
}

fn default_quadrature() -> u32 {
    8
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            seed: None,
            tol: default_tol(),
            k_max: default_kmax(),
            norm: default_norm(),
            quadrature: default_quadrature(),
        }
    }
}

impl Knobs {
    pub fn tolerance(&self) -> Result<Q> {
        let t = rational(&self.tol)?;
        if t <= Q::zero() {
            bail!("tolerance must be positive");
        }
        Ok(t)
    }

    pub fn norm(&self) -> Result<measurelab::exact::Norm> {
        match self.norm.as_str() {
            "l1" => Ok(measurelab::exact::Norm::L1),
            "l2" => Ok(measurelab::exact::Norm::L2),
            other => bail!("unknown norm {other:?} (expected l1 or l2)"),
        }
    }

    /// Seed is mandatory for randomized batteries.
    pub fn seed(&self) -> Result<u64> {
        self.seed
            .context("a seed is required for randomized batteries")
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerance()?;
        self.norm()?;
        if self.k_max < 4 {
            bail!("k_max must be at least 4");
        }
        if self.quadrature == 0 || self.quadrature > 64 {
            bail!("quadrature must be in 1..=64");
        }
        Ok(())
    }
}

/// Point batteries: seeded dyadic samples or an explicit list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PointsDto {
    Seeded { count: usize, depth: u32 },
    List { coords: Vec<Vec<String>> },
}

impl PointsDto {
    pub fn to_core(
        &self,
        h: measurelab::hierarchy::DyadicHierarchy,
        seed: Option<u64>,
    ) -> Result<Vec<Point>> {
        match self {
            PointsDto::Seeded { count, depth } => {
                let seed = seed.context("seeded points need a seed")?;
                let mut r = sample::rng(seed);
                sample::dyadic_points(&mut r, h, *depth, *count).map_err(|e| anyhow::anyhow!("{e}"))
            }
            PointsDto::List { coords } => coords
                .iter()
                .map(|c| {
                    let parsed = c.iter().map(|s| rational(s)).collect::<Result<Vec<Q>>>()?;
                    Point::new(parsed).map_err(|e| anyhow::anyhow!("{e}"))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LebesgueConfig {
    pub model: HierarchyDto,
    #[serde(default)]
    pub measure: Option<MeasureDto>,
    pub function: FunctionDto,
    pub points: PointsDto,
    #[serde(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RnConfig {
    pub model: HierarchyDto,
    #[serde(default)]
    pub measure: Option<MeasureDto>,
    pub omega: VectorMeasureDto,
    pub points: PointsDto,
    #[serde(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawsConfig {
    pub suite: String,
    /// Explicit space for the atomic suites; seeded instances otherwise.
    #[serde(default)]
    pub space: Option<SpaceDto>,
    #[serde(default = "default_instances")]
    pub instances: u32,
    #[serde(default = "default_pairs")]
    pub pairs: u32,
    #[serde(flatten)]
    pub knobs: Knobs,
}

fn default_instances() -> u32 {
    20
}

fn default_pairs() -> u32 {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisintegrateConfig {
    pub space: SpaceDto,
    pub omega: VectorMeasureDto,
    pub map: PointMapDto,
    #[serde(default)]
    pub patch: bool,
    /// Explicit patch split as label lists; a seeded 2-way split otherwise.
    #[serde(default)]
    pub split: Option<Vec<Vec<String>>>,
    #[serde(flatten)]
    pub knobs: Knobs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DensityPointsConfig {
    Interval {
        set: crate::serial::IntervalUnionDto,
    },
    Partition {
        model: HierarchyDto,
        measure: MeasureDto,
        cells: crate::serial::CellSetDto,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationConfig {
    #[serde(default)]
    pub space: Option<SpaceDto>,
    #[serde(default)]
    pub model: Option<HierarchyDto>,
    #[serde(default)]
    pub measure: Option<MeasureDto>,
    pub omega: VectorMeasureDto,
    /// Optional bounded step multiplier: the table is computed for `fΩ`.
    #[serde(default)]
    pub multiplier: Option<crate::serial::StepFunctionDto>,
    #[serde(flatten)]
    pub knobs: Knobs,
}

/// Reads and parses a config file.
pub fn load<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let value: T = serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!(
            "config parse error at line {}, column {}: {}",
            e.line(),
            e.column(),
            e
        )
    })?;
    Ok(value)
}

/// Applies command-line overrides to the shared knobs.
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<String>,
    pub k_max: Option<u32>,
    pub norm: Option<String>,
    pub quadrature: Option<u32>,
}

impl Overrides {
    pub fn apply(&self, knobs: &mut Knobs) {
        if let Some(seed) = self.seed {
            knobs.seed = Some(seed);
        }
        if let Some(tol) = &self.tol {
            knobs.tol = tol.clone();
        }
        if let Some(k) = self.k_max {
            knobs.k_max = k;
        }
        if let Some(n) = &self.norm {
            knobs.norm = n.clone();
        }
        if let Some(q) = self.quadrature {
            knobs.quadrature = q;
        }
    }
}

use num_traits::Zero;
