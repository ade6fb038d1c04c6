pub mod gradcheck;
pub mod loss_eval;
pub mod metrics;
pub mod ncut;
pub mod synth;
pub mod train;

/// Fixed-width rendering so reports stay byte-stable.
pub(crate) fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}
