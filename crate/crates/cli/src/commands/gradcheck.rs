use scribblekit::gradcheck::{run_suite, GradCheckConfig};

use super::sci;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Random instances per loss.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub abs_tol: f64,
}

pub fn run(args: &Args) -> anyhow::Result<()> {
    let cfg = GradCheckConfig {
        step: args.step,
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
    };
    let report = run_suite(args.seed, args.instances, &cfg)?;
    for check in &report.checks {
        let o = &check.outcome;
        println!(
            "{:<9} instances {} components {} failures {} max_rel_err {} max_abs_err {} {}",
            check.loss,
            check.instances,
            o.components,
            o.failures,
            sci(o.max_rel_err),
            sci(o.max_abs_err),
            if o.passed() { "PASS" } else { "FAIL" }
        );
    }
    if report.passed() {
        println!("gradcheck seed {} PASS", args.seed);
        Ok(())
    } else {
        println!("gradcheck seed {} FAIL", args.seed);
        anyhow::bail!("finite-difference check failed")
    }
}
