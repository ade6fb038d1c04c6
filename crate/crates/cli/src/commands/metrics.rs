use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::Context;
use scribblekit::io::{metrics_csv, read_ground_truth, read_saliency};
use scribblekit::metrics::{aggregate, evaluate, MetricReport};

use crate::settings::{existing, usage};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of grayscale predictions.
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Directory of ground-truth masks; files are paired by stem.
    #[arg(long)]
    pub gt_dir: PathBuf,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const RASTER_EXTENSIONS: [&str; 3] = ["png", "pgm", "pnm"];

/// Raster files in `dir` keyed by stem.
fn rasters(dir: &Path) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut found = BTreeMap::new();
    for entry in std::fs::read_dir(existing(dir)?).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !path.is_file() || !ext.is_some_and(|e| RASTER_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_string();
        if let Some(prev) = found.insert(stem.clone(), path.clone()) {
            return Err(usage(format!(
                "two rasters share the stem {stem:?}: {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(found)
}

fn score(pred: &Path, gt: &Path) -> anyhow::Result<MetricReport> {
    let p = read_saliency(pred).with_context(|| format!("reading {}", pred.display()))?;
    let g = read_ground_truth(gt).with_context(|| format!("reading {}", gt.display()))?;
    evaluate(&p, &g, false).with_context(|| format!("scoring {}", pred.display()))
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let preds = rasters(&args.pred_dir)?;
    let gts = rasters(&args.gt_dir)?;
    if preds.is_empty() {
        return Err(usage(format!("no predictions in {}", args.pred_dir.display())));
    }
    let pairs = preds
        .iter()
        .map(|(stem, p)| match gts.get(stem) {
            Some(g) => Ok((stem.clone(), p.clone(), g.clone())),
            None => Err(usage(format!("no ground truth for {stem:?} in {}", args.gt_dir.display()))),
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(pairs.len());
    let chunk = pairs.len().div_ceil(workers);
    let scored: Vec<anyhow::Result<MetricReport>> = thread::scope(|s| {
        let handles: Vec<_> = pairs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|(_, p, g)| score(p, g)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("metric worker panicked"))
            .collect()
    });
    let rows = pairs
        .into_iter()
        .zip(scored)
        .map(|((stem, _, _), r)| r.map(|r| (stem, r)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let reports: Vec<MetricReport> = rows.iter().map(|(_, r)| r.clone()).collect();
    let text = metrics_csv(&rows, aggregate(&reports).as_ref())?;
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
