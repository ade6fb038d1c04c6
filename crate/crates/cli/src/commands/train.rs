use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use scribblekit::io::{metrics_csv, training_log_csv, write_head, write_saliency, KitConfig};
use scribblekit::metrics::{aggregate, evaluate};
use scribblekit::trainer::{
    generate_benchmark, predict, train, SceneSpec, BENCHMARK_SEED, BENCHMARK_TEST, BENCHMARK_TRAIN,
};

use super::opt;
use super::synth::scene_id;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory for the log, parameters, predictions and metrics.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = BENCHMARK_TRAIN)]
    pub train: usize,
    #[arg(long, default_value_t = BENCHMARK_TEST)]
    pub test: usize,
    /// Benchmark generation seed (the training seed is the `seed` config key).
    #[arg(long, default_value_t = BENCHMARK_SEED)]
    pub scene_seed: u64,
    /// Ablation: drop the affinity, coherence and scale terms.
    #[arg(long)]
    pub pce_only: bool,
}

/// `cfg` should start from the desk training preset.
pub fn run(args: &Args, mut cfg: KitConfig) -> anyhow::Result<()> {
    if args.pce_only {
        cfg.weights.mu = 0.0;
        cfg.weights.beta = 0.0;
        cfg.train.ssc_enabled = false;
    }
    let bench = generate_benchmark(&SceneSpec::default(), args.train, args.test, args.scene_seed)?;
    let outcome = train(&bench.train, &bench.test, &cfg.train, &cfg.weights)?;

    let out = &args.out;
    let pred_dir = out.join("predictions");
    fs::create_dir_all(&pred_dir).with_context(|| format!("creating {}", pred_dir.display()))?;
    fs::write(out.join("config.txt"), cfg.render())?;
    fs::write(out.join("log.csv"), training_log_csv(&outcome.log)?)?;
    write_head(&outcome.head, out.join("head.bin"))?;
    let mut rows = Vec::with_capacity(bench.test.len());
    for (k, scene) in bench.test.iter().enumerate() {
        let pred = predict(&outcome.head, &scene.image, &scene.features)?;
        write_saliency(&pred, pred_dir.join(format!("{}.png", scene_id(k))))?;
        rows.push((scene_id(k), evaluate(&pred, &scene.gt, false)?));
    }
    let reports: Vec<_> = rows.iter().map(|(_, r)| r.clone()).collect();
    let summary = aggregate(&reports);
    fs::write(out.join("metrics.csv"), metrics_csv(&rows, summary.as_ref())?)?;

    for e in &outcome.log {
        println!(
            "epoch {} lr {} loss {} pce {} train_iou {} test_iou {}",
            e.epoch,
            e.lr,
            e.loss,
            e.pce,
            e.train_iou,
            opt(e.test_iou)
        );
    }
    if let Some(s) = summary {
        println!(
            "test f_beta {} mae {} e_measure {} iou_adaptive {}",
            s.f_beta, s.mae, s.e_measure, s.iou_adaptive
        );
    }
    Ok(())
}
