//! Shared numeric guards.

/// Vectors with an L2 norm below this are treated as zero.
pub const EPS_NORM: f64 = 1e-12;

/// Ratio denominators with magnitude at or below this are degenerate.
pub const EPS_DEN: f64 = 1e-8;

/// Log arguments are clipped to `[EPS_CLIP, 1 - EPS_CLIP]`.
pub const EPS_CLIP: f64 = 1e-7;

/// A cut ratio (inter-set over total). An empty side cuts nothing, so a
/// degenerate denominator yields 0.
pub fn cut_ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= EPS_DEN {
        0.0
    } else {
        num / den
    }
}

/// An affinity ratio (intra-set over total). An empty set is trivially
/// coherent, so a degenerate denominator yields 1 and the matching loss
/// term `1 - ratio` is 0.
pub fn affinity_ratio(num: f64, den: f64) -> f64 {
    if den.abs() <= EPS_DEN {
        1.0
    } else {
        num / den
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
