use std::path::PathBuf;

use anyhow::Context;
use scribblekit::affinity::build_graph;
use scribblekit::io::{read_features, read_image, read_mask, read_saliency, KitConfig};
use scribblekit::losses::{composite_loss, HeadInput, Supervision};

use super::opt;
use crate::settings::existing;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// RGB image (PNG or PPM).
    #[arg(long)]
    pub image: PathBuf,
    /// Scribble mask: 0 unlabeled, 128 background, 255 foreground.
    #[arg(long)]
    pub mask: PathBuf,
    /// GVRF feature field.
    #[arg(long)]
    pub features: PathBuf,
    /// Dominant prediction (grayscale).
    #[arg(long)]
    pub pred: PathBuf,
    /// Dominant prediction for the half-size input; enables the scale term.
    #[arg(long)]
    pub pred_small: Option<PathBuf>,
    /// Auxiliary head predictions, in head order.
    #[arg(long = "aux")]
    pub aux: Vec<PathBuf>,
}

pub fn run(args: &Args, cfg: &KitConfig) -> anyhow::Result<()> {
    let image = read_image(existing(&args.image)?).with_context(|| format!("reading {}", args.image.display()))?;
    let mask = read_mask(existing(&args.mask)?).with_context(|| format!("reading {}", args.mask.display()))?;
    let features =
        read_features(existing(&args.features)?).with_context(|| format!("reading {}", args.features.display()))?;
    let load = |p: &PathBuf| -> anyhow::Result<_> {
        read_saliency(existing(p)?).with_context(|| format!("reading {}", p.display()))
    };
    let pred = load(&args.pred)?;
    let small = args.pred_small.as_ref().map(load).transpose()?;
    let aux = args.aux.iter().map(load).collect::<anyhow::Result<Vec<_>>>()?;

    let graph = build_graph(&features, false)?;
    let sup = Supervision {
        image: &image,
        mask: &mask,
        graph: &graph,
        patch_grid: (features.grid_h(), features.grid_w()),
        lsc: cfg.train.lsc,
        ssim: cfg.train.ssim,
    };
    let mut heads = vec![HeadInput {
        pred: &pred,
        pred_of_downscaled: small.as_ref(),
    }];
    heads.extend(aux.iter().map(HeadInput::new));
    let result = composite_loss(&heads, &sup, &cfg.weights)?;
    for (k, t) in result.terms.iter().enumerate() {
        println!(
            "head {k} weight {} pce {} ssc {} lsc {} gsa {} total {}",
            t.stage_weight,
            t.pce,
            opt(t.ssc),
            opt(t.lsc),
            opt(t.gsa),
            t.head_total
        );
    }
    println!("total {}", result.value);
    Ok(())
}
