use std::path::PathBuf;

use anyhow::Context;
use scribblekit::affinity::{build_graph, ncut_energy, planted_field, spectral_bipartition, Bipartition, Side};
use scribblekit::io::read_features;
use scribblekit::losses::{gsa_partition, DescentOptions};

use crate::settings::{existing, usage};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Compare on this GVRF feature field.
    #[arg(long, conflicts_with = "planted")]
    pub features: Option<PathBuf>,
    /// Compare on this many planted two-cluster fields instead.
    #[arg(long)]
    pub planted: Option<usize>,
    /// Seed of the first planted field and of the descent start.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Planted noise standard deviation.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Planted grid side.
    #[arg(long, default_value_t = 8)]
    pub grid: usize,
    /// Planted feature dimension.
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Descent step in units of 1/N.
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iterations: usize,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let opts = |seed| DescentOptions {
        step: args.step,
        max_iterations: args.max_iterations,
        seed,
        ..DescentOptions::default()
    };
    if let Some(path) = &args.features {
        let features = read_features(existing(path)?).with_context(|| format!("reading {}", path.display()))?;
        let graph = build_graph(&features, true)?;
        let spectral = spectral_bipartition(&graph)?;
        let descent = gsa_partition(&graph, &opts(args.seed))?;
        let sizes = |p: &Bipartition| format!("{}/{}", p.members(Side::A).len(), p.members(Side::B).len());
        println!(
            "nodes {} iterations {} gsa_loss {} sides_gsa {} sides_spectral {} agreement {:.6} ncut_spectral {:.6} ncut_gsa {:.6}",
            graph.node_count(),
            descent.iterations,
            descent.loss,
            sizes(&descent.partition),
            sizes(&spectral),
            descent.partition.agreement(&spectral),
            ncut_energy(&graph, &spectral)?,
            ncut_energy(&graph, &descent.partition)?
        );
        return Ok(());
    }
    let Some(count) = args.planted else {
        return Err(usage("either --features FILE or --planted COUNT is required"));
    };
    if count == 0 {
        return Err(usage("--planted needs at least one field"));
    }
    let (mut worst_gsa, mut worst_truth) = (1.0f64, 1.0f64);
    for k in 0..count as u64 {
        let seed = args.seed.wrapping_add(k);
        let field = planted_field(args.grid, args.grid, args.dim, args.sigma, seed)?;
        let graph = build_graph(&field.features, true)?;
        let spectral = spectral_bipartition(&graph)?;
        let descent = gsa_partition(&graph, &opts(seed))?;
        let vs_spectral = descent.partition.agreement(&spectral);
        let vs_truth = spectral.agreement(&Bipartition::from_mask(&field.labels));
        worst_gsa = worst_gsa.min(vs_spectral);
        worst_truth = worst_truth.min(vs_truth);
        println!(
            "field {k} seed {seed} iterations {} gsa_vs_spectral {vs_spectral:.6} spectral_vs_planted {vs_truth:.6}",
            descent.iterations
        );
    }
    println!("min gsa_vs_spectral {worst_gsa:.6} min spectral_vs_planted {worst_truth:.6}");
    Ok(())
}
