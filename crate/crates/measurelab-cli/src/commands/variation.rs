//! `variation`: per-carrier variation table and total, cross-checked against
//! the exhaustive partition supremum on small carrier lists.

use crate::config::{self, VariationConfig};
use crate::report::{fmt_q, fmt_sqrt, Csv, Output, RunReport, Summary};
use crate::CommonArgs;
use anyhow::{anyhow, Context, Result};
use measurelab::atomic::PointSet;
use measurelab::exact::{Vector, Q};
use measurelab::measure::BaseMeasure;
use measurelab::vecmeasure::{comparison_margin, variation_partition_supremum};
use num_traits::Signed;
use serde::Serialize;

#[derive(Serialize)]
struct Results {
    total: String,
    total_exact: bool,
    oracle_checked: bool,
    oracle_matches: Option<bool>,
    /// The variation as a plain base measure, when exactly representable.
    as_base_measure: Option<crate::serial::MeasureDto>,
}

pub fn run(common: &CommonArgs) -> Result<bool> {
    let mut cfg: VariationConfig = config::load(&common.config)?;
    common.overrides().apply(&mut cfg.knobs);
    cfg.knobs.validate()?;
    let norm = cfg.knobs.norm()?;
    let mu = match (&cfg.space, &cfg.model, &cfg.measure) {
        (Some(space), _, _) => BaseMeasure::atomic(space.to_core()?),
        (None, Some(model), Some(measure)) => measure.to_core(Some(model.to_core()?))?,
        (None, Some(model), None) => BaseMeasure::lebesgue(model.to_core()?),
        _ => anyhow::bail!("variation needs either a space or a model"),
    };
    let mut om = cfg.omega.to_core(&mu)?;
    if let Some(f) = &cfg.multiplier {
        om = om.restrict(&f.to_core(&mu)?).map_err(|e| anyhow!("{e}"))?;
    }
    let var = om.variation(norm).map_err(|e| anyhow!("{e}"))?;

    let mut csv = Csv::new(&["generator", "variation"]);
    match &mu {
        BaseMeasure::AtomicWeights { space } => {
            for p in 0..space.len() {
                let single =
                    PointSet::from_points(space.clone(), &[p]).map_err(|e| anyhow!("{e}"))?;
                let terms = var.terms_points(&single).map_err(|e| anyhow!("{e}"))?;
                let val = match measurelab::exact::sum_sqrt_exact(&terms) {
                    Some(v) => fmt_q(&v),
                    None => fmt_sqrt(&terms.iter().cloned().sum::<Q>()),
                };
                csv.row(&[space.labels()[p].clone(), val]);
            }
        }
        _ => {
            let h = mu.hierarchy().context("hierarchy model expected")?;
            let depth = match &om {
                measurelab::vecmeasure::VectorMeasure::CellDensity { density, .. } => {
                    density.native_depth()
                }
                _ => 0,
            };
            for i in 0..h.cells_at(depth) {
                let cell = measurelab::hierarchy::CellSet::from_indices(h, depth, &[i])
                    .map_err(|e| anyhow!("{e}"))?;
                let terms = var.terms_cells(&cell).map_err(|e| anyhow!("{e}"))?;
                let val = match measurelab::exact::sum_sqrt_exact(&terms) {
                    Some(v) => fmt_q(&v),
                    None => {
                        let approx = measurelab::exact::sum_sqrt_approx(
                            &terms,
                            measurelab::exact::SQRT_DIGITS,
                        );
                        crate::report::fmt_decimal(&approx)
                    }
                };
                csv.row(&[format!("cell({depth},{i})"), val]);
            }
        }
    }

    let total_exact = var.total_exact();
    let total_str = match &total_exact {
        Some(t) => fmt_q(t),
        None => crate::report::fmt_decimal(&var.total_approx()),
    };
    csv.row(&["total".into(), total_str.clone()]);

    // oracle comparison on small atomic carrier lists
    let (oracle_checked, oracle_matches) = match om.to_carriers() {
        Ok(carriers) if carriers.len() <= 10 => {
            let vectors: Vec<Vector> = carriers.into_iter().map(|(_, v)| v).collect();
            let oracle =
                variation_partition_supremum(&vectors, norm).map_err(|e| anyhow!("{e}"))?;
            let matches = match &total_exact {
                Some(t) => *t == oracle,
                None => (var.total_approx() - oracle).abs() <= comparison_margin(),
            };
            (true, Some(matches))
        }
        _ => (false, None),
    };
    let passed = oracle_matches.unwrap_or(true);

    let summary = Summary {
        items: 1,
        passed: passed as usize,
        failed: (!passed) as usize,
        max_residual: None,
        note: None,
    };
    let output = common.output();
    output.write_bytes(&csv.into_bytes())?;
    if let Some(path) = output.path() {
        let report = RunReport {
            command: "variation".into(),
            config: cfg.clone(),
            summary,
            results: Results {
                total: total_str,
                total_exact: total_exact.is_some(),
                oracle_checked,
                oracle_matches,
                as_base_measure: var
                    .to_base_measure()
                    .map(|m| crate::serial::MeasureDto::from_core(&m)),
            },
        };
        Output::new(Some(path.with_extension("report.json"))).write_json(&report)?;
    }
    Ok(passed)
}
