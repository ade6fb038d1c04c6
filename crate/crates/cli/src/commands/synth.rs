use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use scribblekit::io::{write_features, write_image, write_mask, write_saliency};
use scribblekit::trainer::{
    generate_benchmark, SceneSpec, SyntheticScene, BENCHMARK_SEED, BENCHMARK_TEST, BENCHMARK_TRAIN,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = BENCHMARK_TRAIN)]
    pub train: usize,
    #[arg(long, default_value_t = BENCHMARK_TEST)]
    pub test: usize,
    #[arg(long, default_value_t = BENCHMARK_SEED)]
    pub seed: u64,
}

pub(crate) fn scene_id(index: usize) -> String {
    format!("{index:03}")
}

/// `<root>/<split>/{image,mask,gt,features}/<id>.*`
fn write_split(root: &Path, split: &str, scenes: &[SyntheticScene], manifest: &mut String) -> anyhow::Result<()> {
    let dir = root.join(split);
    for sub in ["image", "mask", "gt", "features"] {
        fs::create_dir_all(dir.join(sub)).with_context(|| format!("creating {}", dir.join(sub).display()))?;
    }
    for (k, scene) in scenes.iter().enumerate() {
        let id = scene_id(k);
        write_image(&scene.image, dir.join("image").join(format!("{id}.png")))?;
        write_mask(&scene.scribbles, dir.join("mask").join(format!("{id}.png")))?;
        write_saliency(&scene.gt, dir.join("gt").join(format!("{id}.png")))?;
        write_features(&scene.features, dir.join("features").join(format!("{id}.gvrf")))?;
        manifest.push_str(&format!("{split},{id},{},{}\n", scene.seed, scene.objects.len()));
    }
    Ok(())
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let bench = generate_benchmark(&SceneSpec::default(), args.train, args.test, args.seed)?;
    let mut manifest = String::from("split,id,scene_seed,objects\n");
    write_split(&args.out, "train", &bench.train, &mut manifest)?;
    write_split(&args.out, "test", &bench.test, &mut manifest)?;
    let path = args.out.join("manifest.csv");
    fs::write(&path, manifest).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "wrote {} train and {} test scenes (seed {})",
        bench.train.len(),
        bench.test.len(),
        args.seed
    );
    Ok(())
}
