//! `disintegrate`: compute, verify, and export a disintegration; with
//! `--patch` additionally patch a seeded split and assert that the result
//! agrees with the direct construction.

use crate::config::{self, DisintegrateConfig};
use crate::report::{fmt_q, Csv, Output, RunReport, Summary};
use crate::serial::VectorMeasureDto;
use crate::CommonArgs;
use anyhow::{anyhow, Result};
use measurelab::disint::{
    disintegrate, patch_disintegrations, uniqueness_distance, verify_disintegration,
};
use measurelab::exact::Q;
use measurelab::measure::BaseMeasure;
use measurelab::sample;
use measurelab::vecmeasure::StepFunction;
use num_traits::Zero;
use serde::Serialize;

#[derive(Serialize)]
struct FiberSummary {
    target: String,
    mass: String,
    mass_exact: bool,
    measure: VectorMeasureDto,
}

#[derive(Serialize)]
struct Results {
    fibers: Vec<FiberSummary>,
    verification_passed: bool,
    random_functions_checked: usize,
    patch_distance: Option<String>,
}

pub fn run(common: &CommonArgs, patch_flag: bool) -> Result<bool> {
    let mut cfg: DisintegrateConfig = config::load(&common.config)?;
    common.overrides().apply(&mut cfg.knobs);
    cfg.knobs.validate()?;
    let patch = patch_flag || cfg.patch;
    let norm = cfg.knobs.norm()?;
    let space = cfg.space.to_core()?;
    let mu = BaseMeasure::atomic(space.clone());
    let om = cfg.omega.to_core(&mu)?;
    let map = cfg.map.to_core(space.clone())?;

    let d = disintegrate(&om, &map, norm).map_err(|e| anyhow!("{e}"))?;

    // random step-function battery for the reconstruction identity
    let fs: Vec<StepFunction> = match cfg.knobs.seed {
        Some(seed) => {
            let mut r = sample::rng(seed);
            (0..100)
                .map(|_| {
                    let vals: Vec<Q> = (0..space.len())
                        .map(|_| sample::rational_in(&mut r, -3, 3, 4))
                        .collect();
                    StepFunction::Points(
                        measurelab::atomic::Section::scalar(space.clone(), vals).unwrap(),
                    )
                })
                .collect()
        }
        None => Vec::new(),
    };
    let report = verify_disintegration(&d, &fs).map_err(|e| anyhow!("{e}"))?;
    let mut passed = report.all_pass();

    // export: one CSV record per (fiber, carrier)
    let mut csv = Csv::new(&["fiber", "carrier", "components", "fiber_mass"]);
    let targets = target_labels(&map);
    for fiber in &d.fibers {
        let carriers = fiber.measure.to_carriers().map_err(|e| anyhow!("{e}"))?;
        for (p, v) in carriers {
            csv.row(&[
                targets[fiber.target].clone(),
                space.labels()[p].clone(),
                v.iter().map(fmt_q).collect::<Vec<_>>().join(";"),
                fmt_q(&fiber.mass),
            ]);
        }
    }

    let mut patch_distance = None;
    if patch {
        let split = match &cfg.split {
            Some(parts) => parts
                .iter()
                .map(|labels| crate::serial::pointset_from_labels(&space, labels))
                .collect::<Result<Vec<_>>>()?,
            None => {
                let seed = cfg.knobs.seed()?;
                let mut r = sample::rng(seed.wrapping_add(1));
                sample::split(&mut r, &space, 2)
            }
        };
        let mut pieces = Vec::new();
        for part in &split {
            let restricted = om.restrict_to_points(part).map_err(|e| anyhow!("{e}"))?;
            if restricted.is_zero() {
                continue;
            }
            pieces.push((
                part.clone(),
                disintegrate(&restricted, &map, norm).map_err(|e| anyhow!("{e}"))?,
            ));
        }
        let patched =
            patch_disintegrations(&om, &map, norm, &pieces).map_err(|e| anyhow!("{e}"))?;
        let dist = uniqueness_distance(&d, &patched).map_err(|e| anyhow!("{e}"))?;
        passed &= dist.is_zero();
        patch_distance = Some(fmt_q(&dist));
    }

    let summary = Summary {
        items: d.fibers.len(),
        passed: if passed { d.fibers.len() } else { 0 },
        failed: if passed { 0 } else { d.fibers.len().max(1) },
        max_residual: None,
        note: patch.then(|| "patch mode".to_string()),
    };
    let output = common.output();
    output.write_bytes(&csv.into_bytes())?;
    if let Some(path) = output.path() {
        let fibers = d
            .fibers
            .iter()
            .map(|f| {
                Ok(FiberSummary {
                    target: targets[f.target].clone(),
                    mass: fmt_q(&f.mass),
                    mass_exact: f.mass_exact,
                    measure: VectorMeasureDto::from_core(&f.measure)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let run_report = RunReport {
            command: "disintegrate".into(),
            config: cfg.clone(),
            summary,
            results: Results {
                fibers,
                verification_passed: report.all_pass(),
                random_functions_checked: fs.len(),
                patch_distance,
            },
        };
        Output::new(Some(path.with_extension("report.json"))).write_json(&run_report)?;
    }
    Ok(passed)
}

fn target_labels(map: &measurelab::vecmeasure::ModelMap) -> Vec<String> {
    match map {
        measurelab::vecmeasure::ModelMap::Points { to, .. } => to.labels().to_vec(),
        _ => Vec::new(),
    }
}
