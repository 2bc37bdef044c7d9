//! `density-points`: the density-point set of an input set, with the
//! symmetric-difference null check.

use crate::config::{self, DensityPointsConfig};
use crate::report::{fmt_q, RunReport, Summary};
use crate::serial::{CellSetDto, IntervalUnionDto};
use crate::CommonArgs;
use anyhow::{anyhow, Result};
use measurelab::basis::density_points_partition;
use num_traits::Zero;
use serde::Serialize;

#[derive(Serialize)]
#[serde(untagged)]
enum Results {
    Interval {
        density_points: IntervalUnionDto,
        symdiff_measure: String,
    },
    Partition {
        model: crate::serial::HierarchyDto,
        density_points: CellSetDto,
        symdiff_mass: String,
    },
}

pub fn run(common: &CommonArgs) -> Result<bool> {
    let cfg: DensityPointsConfig = config::load(&common.config)?;
    let (results, ok) = match &cfg {
        DensityPointsConfig::Interval { set } => {
            let e = set.to_core()?;
            let d = e.density_points();
            let sym = e.sym_diff(&d).map_err(|e| anyhow!("{e}"))?.measure();
            let ok = sym.is_zero();
            (
                Results::Interval {
                    density_points: IntervalUnionDto::from_core(&d),
                    symdiff_measure: fmt_q(&sym),
                },
                ok,
            )
        }
        DensityPointsConfig::Partition {
            model,
            measure,
            cells,
        } => {
            let h = model.to_core()?;
            let mu = measure.to_core(Some(h))?;
            let e = cells.to_core(h)?;
            let d = density_points_partition(&e, &mu).map_err(|e| anyhow!("{e}"))?;
            let sym = mu
                .cellset_mass(
                    &e.refine(d.depth())
                        .map_err(|e| anyhow!("{e}"))?
                        .sym_diff(&d)
                        .map_err(|e| anyhow!("{e}"))?,
                )
                .map_err(|e| anyhow!("{e}"))?;
            let ok = sym.is_zero();
            (
                Results::Partition {
                    model: crate::serial::HierarchyDto::from_core(h),
                    density_points: CellSetDto::from_core(&d),
                    symdiff_mass: fmt_q(&sym),
                },
                ok,
            )
        }
    };
    let summary = Summary {
        items: 1,
        passed: ok as usize,
        failed: (!ok) as usize,
        max_residual: None,
        note: None,
    };
    let report = RunReport {
        command: "density-points".into(),
        config: cfg,
        summary,
        results,
    };
    common.output().write_json(&report)?;
    Ok(ok)
}
