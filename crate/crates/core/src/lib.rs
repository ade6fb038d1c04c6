//! Weak-supervision losses, affinity energies and saliency metrics for
//! scribble-supervised salient object segmentation.
//!
//! The crate is organized by stage:
//!
//! - [`grid`] and [`resample`]: image, saliency, scribble and feature grids.
//! - [`affinity`]: cosine-similarity graphs over patch features, set
//!   energies and a spectral bipartition reference.
//! - [`losses`]: partial cross entropy, local coherence, scale consistency,
//!   global affinity and their staged composite, all with analytic gradients.
//! - [`metrics`]: F-measure, MAE, E-measure and IoU.
//! - [`trainer`]: a small pixel-wise saliency head, synthetic scenes and an
//!   SGD loop driven by the composite loss.
//! - [`io`]: feature, mask, image and parameter files plus flat configs.

pub mod affinity;
pub mod error;
pub mod gradcheck;
pub mod grid;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod numeric;
pub mod resample;
pub mod trainer;

pub use error::{Error, Result};
pub use grid::{validate_pair, FeatureField, Label, PatchSaliency, RgbImage, SaliencyMap, ScribbleMask};
pub use losses::{LossResult, LossWeights};
