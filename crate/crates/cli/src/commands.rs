use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tealeaf_core::evaluation::format_eval_report;
use tealeaf_core::fitting::format_fit_report;
use tealeaf_core::plucker_sim::{
    format_campaign_report, format_trace, plan_campaign, run_trial_traced,
};
use tealeaf_core::{
    binarize, evaluate as eval_mask, extract_samples, fit_dataset, parse_annotations, parse_truth,
    read_pgm, read_ppm, run_campaign, write_mask, FitConfig, FitMode, GroundTruth, RgbImage,
    Scenario, SegmentationParams, DEFAULT_SEED,
};

use crate::error::{image_error, CliError};
use crate::fit_config::apply_overrides;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(CliError::io(path))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn file_stem(path: &Path) -> Result<String, CliError> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::Other(format!("{}: no file name", path.display())))
}

fn read_image(path: &Path) -> Result<RgbImage, CliError> {
    read_ppm(&read_bytes(path)?).map_err(|e| image_error(path, e))
}

pub fn fit(
    annotations: &Path,
    images_dir: &Path,
    config_path: Option<&Path>,
    mode: Option<FitMode>,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let mut config = FitConfig::default();
    if let Some(path) = config_path {
        config =
            apply_overrides(&read_text(path)?, config).map_err(|m| CliError::parse(path, m))?;
    }
    if let Some(mode) = mode {
        config.mode = mode;
    }

    let boxes =
        parse_annotations(&read_text(annotations)?).map_err(|e| CliError::parse(annotations, e))?;
    let mut ids: Vec<String> = Vec::new();
    for b in &boxes {
        if !ids.contains(&b.image_id) {
            ids.push(b.image_id.clone());
        }
    }
    if ids.is_empty() {
        return Err(CliError::parse(annotations, "no sample boxes"));
    }

    let mut images = HashMap::new();
    for id in &ids {
        let path = images_dir.join(format!("{id}.ppm"));
        images.insert(id.clone(), read_image(&path)?);
    }
    let per_image = ids
        .iter()
        .map(|id| {
            let own: Vec<_> = boxes
                .iter()
                .filter(|b| &b.image_id == id)
                .cloned()
                .collect();
            extract_samples(&images, &own)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let fit = fit_dataset(&per_image, &config)?;
    let report = format_fit_report(&ids, &fit, &config, seed);
    ensure_dir(out)?;
    write(&out.join("fit_report.txt"), &report)?;
    write(&out.join("params.txt"), format!("{}\n", fit.average))?;
    print!("{report}");
    Ok(())
}

pub fn segment(params_path: &Path, images: &[PathBuf], out: &Path) -> Result<(), CliError> {
    let params: SegmentationParams = read_text(params_path)?
        .trim()
        .parse()
        .map_err(|e| CliError::parse(params_path, e))?;
    ensure_dir(out)?;
    for path in images {
        let img = read_image(path)?;
        let mask = binarize(&params, &img);
        let target = out.join(format!("{}.pgm", file_stem(path)?));
        write(&target, write_mask(&mask))?;
        println!(
            "{}: {} of {} pixels foreground",
            target.display(),
            mask.foreground_count(),
            img.width() * img.height()
        );
    }
    Ok(())
}

pub fn evaluate(
    truth_path: &Path,
    masks: &[PathBuf],
    min_area: usize,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let truth = parse_truth(&read_text(truth_path)?).map_err(|e| CliError::parse(truth_path, e))?;
    if truth.is_empty() {
        return Err(CliError::parse(truth_path, "no truth boxes"));
    }
    let mut rows = Vec::with_capacity(masks.len());
    for path in masks {
        let stem = file_stem(path)?;
        let mask = read_pgm(&read_bytes(path)?).map_err(|e| image_error(path, e))?;
        let boxes = truth
            .iter()
            .find(|(id, _)| *id == stem)
            .map(|(_, t)| t.clone())
            .unwrap_or_else(GroundTruth::default);
        let report = eval_mask(&mask, &boxes, min_area)
            .map_err(|e| CliError::Other(format!("{stem}: {e}")))?;
        rows.push((stem, report));
    }
    let report = format_eval_report(&rows, min_area, seed);
    ensure_dir(out)?;
    write(&out.join("eval_report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

pub fn simulate(
    scenario_path: &Path,
    seed: Option<u64>,
    trace: bool,
    out: &Path,
) -> Result<(), CliError> {
    let scenario = Scenario::parse(&read_text(scenario_path)?)
        .map_err(|e| CliError::parse(scenario_path, e))?;
    let seed = seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);
    let stems = scenario.stems();
    let report = run_campaign(&stems, &scenario.config, &scenario.faults, seed)?;
    let text = format_campaign_report(&report, &scenario.faults, seed);
    ensure_dir(out)?;
    write(&out.join("campaign_report.txt"), &text)?;

    if trace {
        let dir = out.join("traces");
        ensure_dir(&dir)?;
        let plans = plan_campaign(&stems, &scenario.faults, seed)?;
        let traces = plans
            .par_iter()
            .map(|plan| {
                let (outcome, states) =
                    run_trial_traced(&plan.stem, &plan.config(&scenario.config), plan.seed)?;
                Ok((plan.index, format_trace(&states, &outcome)))
            })
            .collect::<Result<Vec<_>, tealeaf_core::SimError>>()?;
        for (index, body) in traces {
            write(&dir.join(format!("trial_{index:04}.txt")), body)?;
        }
    }
    print!("{text}");
    Ok(())
}
