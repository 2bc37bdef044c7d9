//! `lebesgue`: shrinking-cell average scans at sampled points, with one CSV
//! row per (point, depth) and a convergence verdict per point.

use crate::config::{self, LebesgueConfig};
use crate::report::{fmt_q, fmt_sqrt, Csv, Output, RunReport, Summary};
use crate::serial::Function;
use crate::CommonArgs;
use anyhow::{anyhow, Result};
use measurelab::bochner::{
    lebesgue_point_scan, lebesgue_point_scan_simple, LebesguePointReport, SimpleMap,
};
use measurelab::exact::Q;
use measurelab::measure::BaseMeasure;
use measurelab::sample;
use num_traits::Zero;
use serde::Serialize;

#[derive(Serialize)]
struct PointResult {
    point: Vec<String>,
    converged: bool,
    final_residual: String,
    zero_residual_from: Option<u32>,
}

#[derive(Serialize)]
struct Results {
    csv_rows: usize,
    points: Vec<PointResult>,
}

pub fn run(common: &CommonArgs) -> Result<bool> {
    let mut cfg: LebesgueConfig = config::load(&common.config)?;
    common.overrides().apply(&mut cfg.knobs);
    cfg.knobs.validate()?;
    let h = cfg.model.to_core()?;
    let mu = match &cfg.measure {
        Some(dto) => dto.to_core(Some(h))?,
        None => BaseMeasure::lebesgue(h),
    };
    let tol = cfg.knobs.tolerance()?;
    let norm = cfg.knobs.norm()?;
    let points = cfg.points.to_core(h, cfg.knobs.seed)?;

    let mut csv = Csv::new(&["item", "point", "k", "average", "residual"]);
    let mut results = Vec::new();
    let mut max_residual_sq = Q::zero();
    let mut failures = 0usize;

    let mut handle_reports = |item: usize,
                              reports: &[LebesguePointReport],
                              require_zero_from: Option<u32>,
                              csv: &mut Csv,
                              results: &mut Vec<PointResult>| {
        for rep in reports {
            let coords: Vec<String> = rep.point.coords().iter().map(fmt_q).collect();
            for row in &rep.rows {
                csv.row(&[
                    item.to_string(),
                    coords.join(";"),
                    row.depth.to_string(),
                    row.average.iter().map(fmt_q).collect::<Vec<_>>().join(";"),
                    fmt_sqrt(&row.residual_sq),
                ]);
            }
            let final_sq = rep.final_residual_sq().clone();
            if final_sq > max_residual_sq {
                max_residual_sq = final_sq.clone();
            }
            let mut ok = rep.result.converged();
            if let Some(bound) = require_zero_from {
                ok &= rep
                    .zero_residual_from()
                    .map(|d| d <= bound)
                    .unwrap_or(false);
            }
            if !ok {
                failures += 1;
            }
            results.push(PointResult {
                point: coords,
                converged: rep.result.converged(),
                final_residual: fmt_sqrt(&final_sq),
                zero_residual_from: rep.zero_residual_from(),
            });
        }
    };

    match cfg.function.to_core(h)? {
        Function::Poly(p) => {
            let reports = lebesgue_point_scan(
                &p,
                &mu,
                &points,
                &tol,
                cfg.knobs.k_max,
                norm,
                cfg.knobs.quadrature,
            )
            .map_err(|e| anyhow!("{e}"))?;
            handle_reports(0, &reports, None, &mut csv, &mut results);
        }
        Function::PolyProduct(p) => {
            let reports = lebesgue_point_scan(
                &p,
                &mu,
                &points,
                &tol,
                cfg.knobs.k_max,
                norm,
                cfg.knobs.quadrature,
            )
            .map_err(|e| anyhow!("{e}"))?;
            handle_reports(0, &reports, None, &mut csv, &mut results);
        }
        Function::Constant(value) => {
            let v = SimpleMap::constant(h, value).map_err(|e| anyhow!("{e}"))?;
            let reports = lebesgue_point_scan_simple(&v, &mu, &points, &tol, cfg.knobs.k_max, norm)
                .map_err(|e| anyhow!("{e}"))?;
            handle_reports(0, &reports, Some(0), &mut csv, &mut results);
        }
        Function::Step(v) => {
            let depth = v.native_depth();
            let reports = lebesgue_point_scan_simple(&v, &mu, &points, &tol, cfg.knobs.k_max, norm)
                .map_err(|e| anyhow!("{e}"))?;
            handle_reports(0, &reports, Some(depth), &mut csv, &mut results);
        }
        Function::SeededSteps { count, depth, dim } => {
            let mut r = sample::rng(cfg.knobs.seed()?);
            for item in 0..count {
                let v = sample::simple_map(&mut r, h, depth, dim);
                let reports =
                    lebesgue_point_scan_simple(&v, &mu, &points, &tol, cfg.knobs.k_max, norm)
                        .map_err(|e| anyhow!("{e}"))?;
                handle_reports(item as usize, &reports, Some(depth), &mut csv, &mut results);
            }
        }
    }

    let passed = failures == 0;
    let summary = Summary {
        items: results.len(),
        passed: results.len() - failures,
        failed: failures,
        max_residual: Some(fmt_sqrt(&max_residual_sq)),
        note: None,
    };
    write_artifacts(common, &cfg, summary, results, csv)?;
    Ok(passed)
}

fn write_artifacts(
    common: &CommonArgs,
    cfg: &LebesgueConfig,
    summary: Summary,
    points: Vec<PointResult>,
    csv: Csv,
) -> Result<()> {
    let output = common.output();
    // the CSV is the primary artifact; a JSON report sits next to it
    let bytes = csv.into_bytes();
    output.write_bytes(&bytes)?;
    if let Some(path) = output.path() {
        let report = RunReport {
            command: "lebesgue".into(),
            config: cfg.clone(),
            summary,
            results: Results {
                csv_rows: points.len(),
                points,
            },
        };
        let report_path = path.with_extension("report.json");
        Output::new(Some(report_path)).write_json(&report)?;
    }
    Ok(())
}
