//! Dense-grid and sparse-label domain types.
//!
//! Every grid is stored row-major (`y * width + x`). Constructors validate
//! shape and value ranges so downstream operations can assume them.

use crate::error::{Error, Result};

fn check_dims(what: &'static str, width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "{what} dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            what,
            expected: format!("{expected} values"),
            actual: format!("{actual} values"),
        });
    }
    Ok(())
}

fn check_unit_interval(what: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { what, index, value });
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange { what, index, value });
        }
    }
    Ok(())
}

/// An RGB image with channels in `[0, 1]`, stored interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims("image", width, height)?;
        check_len("image", width * height * 3, data.len())?;
        check_unit_interval("image", &data)?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Single channel as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                data.extend_from_slice(&self.pixel(x, y));
            }
        }
        Self { data, ..*self }
    }
}

/// Dense per-pixel saliency in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims("saliency map", width, height)?;
        check_len("saliency map", width * height, values.len())?;
        check_unit_interval("saliency map", &values)?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn same_dims(&self, other: &SaliencyMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.values.chunks(self.width) {
            values.extend(row.iter().rev());
        }
        Self { values, ..*self }
    }

    /// Binarize at `value >= threshold`.
    pub fn binarize(&self, threshold: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v >= threshold).collect()
    }
}

/// Tri-state scribble label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Unlabeled,
    Background,
    Foreground,
}

impl Label {
    /// Target value for a labeled pixel.
    pub fn target(self) -> Option<f64> {
        match self {
            Label::Unlabeled => None,
            Label::Background => Some(0.0),
            Label::Foreground => Some(1.0),
        }
    }
}

/// Sparse scribble or point supervision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScribbleMask {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl ScribbleMask {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        check_dims("scribble mask", width, height)?;
        check_len("scribble mask", width * height, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn unlabeled(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![Label::Unlabeled; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.len() - self.count(Label::Unlabeled)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut labels = Vec::with_capacity(self.labels.len());
        for row in self.labels.chunks(self.width) {
            labels.extend(row.iter().rev());
        }
        Self { labels, ..*self }
    }
}

/// Per-patch feature vectors on a `grid_h x grid_w` grid, stored
/// patch-row, patch-col, component.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    grid_h: usize,
    grid_w: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureField {
    pub fn new(grid_h: usize, grid_w: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if grid_h == 0 || grid_w == 0 || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature field dimensions must be at least 1, got {grid_h}x{grid_w}x{dim}"
            )));
        }
        check_len("feature field", grid_h * grid_w * dim, data.len())?;
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "feature field",
                index,
                value,
            });
        }
        Ok(Self {
            grid_h,
            grid_w,
            dim,
            data,
        })
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn patch_count(&self) -> usize {
        self.grid_h * self.grid_w
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Feature vector of patch `index` (row-major over the grid).
    pub fn vector(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in 0..self.grid_h {
            for col in (0..self.grid_w).rev() {
                data.extend_from_slice(self.vector(row * self.grid_w + col));
            }
        }
        Self { data, ..*self }
    }

    /// Copy with every nonzero vector scaled to unit L2 norm.
    pub fn unit_normalized(&self) -> Self {
        let mut data = self.data.clone();
        for v in data.chunks_exact_mut(self.dim) {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Self { data, ..*self }
    }
}

/// Saliency pooled onto a patch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSaliency {
    grid_h: usize,
    grid_w: usize,
    values: Vec<f64>,
}

impl PatchSaliency {
    pub fn new(grid_h: usize, grid_w: usize, values: Vec<f64>) -> Result<Self> {
        check_dims("patch saliency", grid_w, grid_h)?;
        check_len("patch saliency", grid_h * grid_w, values.len())?;
        check_unit_interval("patch saliency", &values)?;
        Ok(Self {
            grid_h,
            grid_w,
            values,
        })
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Checks that `mask` can supervise `image`: matching dimensions and at least
/// one pixel of each class.
pub fn validate_pair(image: &RgbImage, mask: &ScribbleMask) -> Result<()> {
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(Error::DimensionMismatch {
            what: "scribble mask",
            expected: format!("{}x{}", image.width(), image.height()),
            actual: format!("{}x{}", mask.width(), mask.height()),
        });
    }
    if mask.count(Label::Foreground) == 0 {
        return Err(Error::EmptyForeground);
    }
    if mask.count(Label::Background) == 0 {
        return Err(Error::EmptyBackground);
    }
    Ok(())
}
