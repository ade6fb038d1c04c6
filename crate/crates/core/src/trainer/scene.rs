//! Synthetic scribble-labeled scenes with held-out ground truth.
//!
//! Objects are ellipses, rectangles or unions of the two, painted in
//! saturated colors with a brightness ramp over a textured, desaturated
//! background. Patch features mix per-scene cluster means by pixel coverage
//! and add Gaussian noise. Every cluster mean leans on one of two fixed
//! directions (object or background) shared by all scenes, so features carry
//! a weak cross-scene objectness cue besides the per-scene grouping.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::grid::{FeatureField, Label, RgbImage, SaliencyMap, ScribbleMask};

const SCENE_ATTEMPTS: usize = 32;
const PLACEMENT_ATTEMPTS: usize = 100;
const BRUSH_RADIUS: isize = 1;
const ANCHOR_SEED: u64 = 0x0b1e_c7ed;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub grid_h: usize,
    pub grid_w: usize,
    pub feature_dim: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Range of the characteristic object radius in pixels.
    pub object_radius: (f64, f64),
    /// Standard deviation of the per-component feature noise.
    pub noise_sigma: f64,
    /// Weight of the shared object/background direction in each cluster
    /// mean; the per-scene random part gets `sqrt(1 - w^2)`.
    pub objectness: f64,
    /// Minimum Chebyshev distance from a stroke center to any other region.
    pub stroke_margin: usize,
    pub background_strokes: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            grid_h: 8,
            grid_w: 8,
            feature_dim: 16,
            min_objects: 1,
            max_objects: 3,
            object_radius: (8.0, 14.0),
            noise_sigma: 0.1,
            objectness: 0.8,
            stroke_margin: 2,
            background_strokes: 2,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.width < 32 || self.height < 32 {
            return bad(format!("scenes must be at least 32x32, got {}x{}", self.width, self.height));
        }
        if self.grid_h == 0
            || self.grid_w == 0
            || self.width % self.grid_w != 0
            || self.height % self.grid_h != 0
        {
            return bad(format!(
                "feature grid {}x{} must evenly divide {}x{}",
                self.grid_h, self.grid_w, self.height, self.width
            ));
        }
        if self.feature_dim < 2 {
            return bad("feature dimension must be at least 2".into());
        }
        if !(1..=3).contains(&self.min_objects) || !(self.min_objects..=3).contains(&self.max_objects) {
            return bad(format!(
                "object count range {}..={} must lie within 1..=3",
                self.min_objects, self.max_objects
            ));
        }
        let (lo, hi) = self.object_radius;
        if !(lo >= 2.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("object radius range ({lo}, {hi}) is invalid"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma {} must be finite and nonnegative", self.noise_sigma));
        }
        if !(0.0..=1.0).contains(&self.objectness) {
            return bad(format!("objectness weight {} outside [0, 1]", self.objectness));
        }
        if self.stroke_margin < 2 {
            return bad("stroke margin must be at least 2 pixels".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Ellipse rotated by `angle` radians.
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64, angle: f64 },
    Rectangle { cx: f64, cy: f64, half_w: f64, half_h: f64 },
}

impl Primitive {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            Primitive::Ellipse { cx, cy, rx, ry, angle } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (px - cx, py - cy);
                let u = (c * dx + s * dy) / rx;
                let v = (-s * dx + c * dy) / ry;
                u * u + v * v <= 1.0
            }
            Primitive::Rectangle { cx, cy, half_w, half_h } => {
                (px - cx).abs() <= half_w && (py - cy).abs() <= half_h
            }
        }
    }

    /// Bounding box as `(x0, y0, x1, y1)`.
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Primitive::Ellipse { cx, cy, rx, ry, angle } => {
                let (s, c) = angle.sin_cos();
                let ex = (rx * rx * c * c + ry * ry * s * s).sqrt();
                let ey = (rx * rx * s * s + ry * ry * c * c).sqrt();
                (cx - ex, cy - ey, cx + ex, cy + ey)
            }
            Primitive::Rectangle { cx, cy, half_w, half_h } => {
                (cx - half_w, cy - half_h, cx + half_w, cy + half_h)
            }
        }
    }

    fn mirrored(&self, width: f64) -> Self {
        match *self {
            Primitive::Ellipse { cx, cy, rx, ry, angle } => Primitive::Ellipse {
                cx: width - cx,
                cy,
                rx,
                ry,
                angle: -angle,
            },
            Primitive::Rectangle { cx, cy, half_w, half_h } => Primitive::Rectangle {
                cx: width - cx,
                cy,
                half_w,
                half_h,
            },
        }
    }

    fn translated(&self, dx: f64, dy: f64) -> Self {
        match *self {
            Primitive::Ellipse { cx, cy, rx, ry, angle } => Primitive::Ellipse {
                cx: cx + dx,
                cy: cy + dy,
                rx,
                ry,
                angle,
            },
            Primitive::Rectangle { cx, cy, half_w, half_h } => Primitive::Rectangle {
                cx: cx + dx,
                cy: cy + dy,
                half_w,
                half_h,
            },
        }
    }
}

/// One object: the union of its primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub parts: Vec<Primitive>,
}

impl SceneObject {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        self.parts.iter().any(|p| p.contains(px, py))
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.parts.iter().map(Primitive::bounds).fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3)),
        )
    }

    pub fn mirrored(&self, width: f64) -> Self {
        Self {
            parts: self.parts.iter().map(|p| p.mirrored(width)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub image: RgbImage,
    pub features: FeatureField,
    pub scribbles: ScribbleMask,
    /// Binary ground truth; never used for training.
    pub gt: SaliencyMap,
    pub objects: Vec<SceneObject>,
    pub spec: SceneSpec,
    pub seed: u64,
}

impl SyntheticScene {
    pub fn flip_horizontal(&self) -> Self {
        Self {
            image: self.image.flip_horizontal(),
            features: self.features.flip_horizontal(),
            scribbles: self.scribbles.flip_horizontal(),
            gt: self.gt.flip_horizontal(),
            objects: self
                .objects
                .iter()
                .map(|o| o.mirrored(self.spec.width as f64))
                .collect(),
            spec: self.spec.clone(),
            seed: self.seed,
        }
    }
}

/// Per-pixel region index: 0 for background, `k + 1` for object `k`.
/// Pixels are sampled at their centers; earlier objects win overlaps.
pub fn region_map(objects: &[SceneObject], width: usize, height: usize) -> Vec<usize> {
    let mut regions = vec![0; width * height];
    for y in 0..height {
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            if let Some(k) = objects.iter().position(|o| o.contains(px, py)) {
                regions[y * width + x] = k + 1;
            }
        }
    }
    regions
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn gaussian_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..dim).map(|_| normal.sample(rng)).collect()
}

/// Orthonormal object and background directions shared by all scenes of a
/// given feature dimension.
pub fn anchor_directions(dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ANCHOR_SEED ^ dim as u64);
    let obj = unit(gaussian_vector(&mut rng, dim));
    let raw = gaussian_vector(&mut rng, dim);
    let along: f64 = raw.iter().zip(&obj).map(|(a, b)| a * b).sum();
    let bg = unit(raw.iter().zip(&obj).map(|(r, o)| r - along * o).collect());
    (obj, bg)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let sector = h6.floor() as usize % 6;
    let f = h6 - h6.floor();
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

fn random_object(rng: &mut ChaCha8Rng, spec: &SceneSpec) -> SceneObject {
    let (lo, hi) = spec.object_radius;
    let r = rng.random_range(lo..=hi);
    let ellipse = |rng: &mut ChaCha8Rng, r: f64| Primitive::Ellipse {
        cx: 0.0,
        cy: 0.0,
        rx: r,
        ry: r * rng.random_range(0.55..=1.0),
        angle: rng.random_range(0.0..PI),
    };
    let rectangle = |rng: &mut ChaCha8Rng, r: f64| Primitive::Rectangle {
        cx: 0.0,
        cy: 0.0,
        half_w: r * rng.random_range(0.6..=1.0),
        half_h: r * rng.random_range(0.6..=1.0),
    };
    let parts = match rng.random_range(0..3) {
        0 => vec![ellipse(rng, r)],
        1 => vec![rectangle(rng, r)],
        _ => {
            let core = ellipse(rng, r * 0.85);
            let arm = rectangle(rng, r * 0.6);
            let (dx, dy) = (rng.random_range(-0.6..=0.6) * r, rng.random_range(-0.6..=0.6) * r);
            vec![core, arm.translated(dx, dy)]
        }
    };
    SceneObject { parts }
}

fn place_objects(rng: &mut ChaCha8Rng, spec: &SceneSpec, count: usize) -> Option<Vec<SceneObject>> {
    let (w, h) = (spec.width as f64, spec.height as f64);
    let gap = (2 * spec.stroke_margin + 2) as f64;
    let mut placed: Vec<SceneObject> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut done = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let shape = random_object(rng, spec);
            let (x0, y0, x1, y1) = shape.bounds();
            // Keep a background border wide enough for strokes.
            let pad = gap;
            let (min_cx, max_cx) = (pad - x0, w - pad - x1);
            let (min_cy, max_cy) = (pad - y0, h - pad - y1);
            if min_cx > max_cx || min_cy > max_cy {
                continue;
            }
            let (cx, cy) = (rng.random_range(min_cx..=max_cx), rng.random_range(min_cy..=max_cy));
            let candidate = SceneObject {
                parts: shape.parts.iter().map(|p| p.translated(cx, cy)).collect(),
            };
            let (a0, b0, a1, b1) = candidate.bounds();
            let clear = placed.iter().all(|o| {
                let (c0, d0, c1, d1) = o.bounds();
                a1 + gap <= c0 || c1 + gap <= a0 || b1 + gap <= d0 || d1 + gap <= b0
            });
            if clear {
                placed.push(candidate);
                done = true;
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some(placed)
}

/// Pixels whose whole `margin` neighbourhood lies inside the image and in
/// region `id`.
fn interior(regions: &[usize], width: usize, height: usize, id: usize, margin: usize) -> Vec<bool> {
    let mut out = vec![false; width * height];
    for y in margin..height.saturating_sub(margin) {
        for x in margin..width.saturating_sub(margin) {
            out[y * width + x] = (y - margin..=y + margin)
                .all(|ny| (x - margin..=x + margin).all(|nx| regions[ny * width + nx] == id));
        }
    }
    out
}

/// Smooth random walk through `allowed`, returning visited pixel indices.
fn random_stroke(rng: &mut ChaCha8Rng, allowed: &[bool], width: usize, height: usize, length: usize) -> Vec<usize> {
    let candidates: Vec<usize> = (0..allowed.len()).filter(|&i| allowed[i]).collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let start = candidates[rng.random_range(0..candidates.len())];
    let (mut x, mut y) = ((start % width) as f64, (start / width) as f64);
    let mut heading = rng.random_range(0.0..2.0 * PI);
    let mut path = vec![start];
    for _ in 0..length {
        let mut moved = false;
        for _ in 0..8 {
            let (nx, ny) = (x + heading.cos(), y + heading.sin());
            let (ix, iy) = (nx.round(), ny.round());
            if ix >= 0.0 && iy >= 0.0 && (ix as usize) < width && (iy as usize) < height {
                let idx = iy as usize * width + ix as usize;
                if allowed[idx] {
                    (x, y) = (nx, ny);
                    path.push(idx);
                    moved = true;
                    break;
                }
            }
            heading += rng.random_range(0.5 * PI..=1.5 * PI);
        }
        if !moved {
            break;
        }
        heading += rng.random_range(-0.35..=0.35);
    }
    path
}

fn paint_stroke(mask: &mut ScribbleMask, path: &[usize], label: Label) {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    for &i in path {
        let (x, y) = ((i as isize) % w, (i as isize) / w);
        for dy in -BRUSH_RADIUS..=BRUSH_RADIUS {
            for dx in -BRUSH_RADIUS..=BRUSH_RADIUS {
                let (nx, ny) = (x + dx, y + dy);
                if (0..w).contains(&nx) && (0..h).contains(&ny) {
                    mask.set(nx as usize, ny as usize, label);
                }
            }
        }
    }
}

fn render_image(rng: &mut ChaCha8Rng, spec: &SceneSpec, objects: &[SceneObject], regions: &[usize]) -> Result<RgbImage> {
    let gray = rng.random_range(0.3..=0.6);
    let tint: [f64; 3] = [(); 3].map(|_| rng.random_range(-0.05..=0.05));
    let waves: Vec<(f64, f64, f64, f64)> = (0..2)
        .map(|_| {
            let freq = rng.random_range(0.15..=0.5);
            let dir = rng.random_range(0.0..PI);
            (freq * dir.cos(), freq * dir.sin(), rng.random_range(0.0..2.0 * PI), 0.06)
        })
        .collect();
    struct Paint {
        rgb: [f64; 3],
        ramp: (f64, f64),
        center: (f64, f64),
        extent: f64,
    }
    let paints: Vec<Paint> = objects
        .iter()
        .map(|o| {
            let rgb = hsv_to_rgb(
                rng.random_range(0.0..1.0),
                rng.random_range(0.55..=0.95),
                rng.random_range(0.6..=0.95),
            );
            let dir = rng.random_range(0.0..2.0 * PI);
            let (x0, y0, x1, y1) = o.bounds();
            Paint {
                rgb,
                ramp: (dir.cos(), dir.sin()),
                center: ((x0 + x1) / 2.0, (y0 + y1) / 2.0),
                extent: ((x1 - x0).max(y1 - y0) / 2.0).max(1.0),
            }
        })
        .collect();
    let w = spec.width;
    let mut data = Vec::with_capacity(w * spec.height * 3);
    for y in 0..spec.height {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let rgb = match regions[y * w + x] {
                0 => {
                    let texture: f64 = waves.iter().map(|&(fx, fy, ph, amp)| amp * (fx * px + fy * py + ph).sin()).sum();
                    tint.map(|t| gray + t + texture)
                }
                id => {
                    let p = &paints[id - 1];
                    let t = ((px - p.center.0) * p.ramp.0 + (py - p.center.1) * p.ramp.1) / p.extent;
                    let shade = 1.0 + 0.25 * t;
                    p.rgb.map(|c| c * shade)
                }
            };
            for c in rgb {
                let noise = rng.random_range(-0.03..=0.03);
                data.push((c + noise).clamp(0.0, 1.0));
            }
        }
    }
    RgbImage::new(w, spec.height, data)
}

fn render_features(rng: &mut ChaCha8Rng, spec: &SceneSpec, count: usize, regions: &[usize]) -> Result<FeatureField> {
    let d = spec.feature_dim;
    let (obj_dir, bg_dir) = anchor_directions(d);
    let share = spec.objectness;
    let rest = (1.0 - share * share).max(0.0).sqrt();
    let mut mean = |anchor: &[f64]| -> Vec<f64> {
        let own = unit(gaussian_vector(rng, d));
        unit(anchor.iter().zip(&own).map(|(a, o)| share * a + rest * o).collect())
    };
    let mut means = vec![mean(&bg_dir)];
    for _ in 0..count {
        means.push(mean(&obj_dir));
    }
    let (pw, ph) = (spec.width / spec.grid_w, spec.height / spec.grid_h);
    let area = (pw * ph) as f64;
    let mut data = Vec::with_capacity(spec.grid_h * spec.grid_w * d);
    let mut coverage = vec![0usize; count + 1];
    for gy in 0..spec.grid_h {
        for gx in 0..spec.grid_w {
            coverage.iter_mut().for_each(|c| *c = 0);
            for y in gy * ph..(gy + 1) * ph {
                for x in gx * pw..(gx + 1) * pw {
                    coverage[regions[y * spec.width + x]] += 1;
                }
            }
            let start = data.len();
            data.resize(start + d, 0.0);
            for (id, &n) in coverage.iter().enumerate() {
                if n > 0 {
                    let share = n as f64 / area;
                    for (slot, m) in data[start..].iter_mut().zip(&means[id]) {
                        *slot += share * m;
                    }
                }
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        data.iter_mut().for_each(|v| *v += noise.sample(rng));
    }
    FeatureField::new(spec.grid_h, spec.grid_w, d, data)
}

fn try_scene(rng: &mut ChaCha8Rng, spec: &SceneSpec, seed: u64) -> Result<Option<SyntheticScene>> {
    let (w, h) = (spec.width, spec.height);
    let count = rng.random_range(spec.min_objects..=spec.max_objects);
    let Some(objects) = place_objects(rng, spec, count) else {
        return Ok(None);
    };
    let regions = region_map(&objects, w, h);
    let mut scribbles = ScribbleMask::unlabeled(w, h)?;
    for (k, object) in objects.iter().enumerate() {
        let allowed = interior(&regions, w, h, k + 1, spec.stroke_margin);
        let (x0, y0, x1, y1) = object.bounds();
        let length = (0.6 * (x1 - x0).max(y1 - y0)).round() as usize;
        let path = random_stroke(rng, &allowed, w, h, length);
        if path.is_empty() {
            return Ok(None);
        }
        paint_stroke(&mut scribbles, &path, Label::Foreground);
    }
    let allowed = interior(&regions, w, h, 0, spec.stroke_margin + 1);
    for _ in 0..spec.background_strokes.max(1) {
        let path = random_stroke(rng, &allowed, w, h, w.min(h) / 2);
        if path.is_empty() {
            return Ok(None);
        }
        paint_stroke(&mut scribbles, &path, Label::Background);
    }
    let image = render_image(rng, spec, &objects, &regions)?;
    let features = render_features(rng, spec, objects.len(), &regions)?;
    let gt = SaliencyMap::new(w, h, regions.iter().map(|&r| if r > 0 { 1.0 } else { 0.0 }).collect())?;
    Ok(Some(SyntheticScene {
        image,
        features,
        scribbles,
        gt,
        objects,
        spec: spec.clone(),
        seed,
    }))
}

/// Generate one scene. Identical `spec` and `seed` give identical scenes.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<SyntheticScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SCENE_ATTEMPTS {
        if let Some(scene) = try_scene(&mut rng, spec, seed)? {
            return Ok(scene);
        }
    }
    Err(Error::Generation(format!(
        "could not place {}..={} objects of radius {:?} with scribbles in {}x{} after {SCENE_ATTEMPTS} attempts",
        spec.min_objects, spec.max_objects, spec.object_radius, spec.width, spec.height
    )))
}

pub const BENCHMARK_SEED: u64 = 42;
pub const BENCHMARK_TRAIN: usize = 50;
pub const BENCHMARK_TEST: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub train: Vec<SyntheticScene>,
    pub test: Vec<SyntheticScene>,
}

/// Scene seeds are drawn from a generator seeded with `seed`; the first
/// `n_train` go to the training split.
pub fn generate_benchmark(spec: &SceneSpec, n_train: usize, n_test: usize, seed: u64) -> Result<Benchmark> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let scenes = (0..n_train + n_test)
        .map(|_| generate_scene(spec, seeds.next_u64()))
        .collect::<Result<Vec<_>>>()?;
    let mut scenes = scenes.into_iter();
    Ok(Benchmark {
        train: scenes.by_ref().take(n_train).collect(),
        test: scenes.collect(),
    })
}

/// The pinned benchmark: 50 train and 20 test scenes of 64x64 pixels with
/// 8x8x16 features, noise 0.1, seed 42.
pub fn standard_benchmark() -> Result<Benchmark> {
    generate_benchmark(&SceneSpec::default(), BENCHMARK_TRAIN, BENCHMARK_TEST, BENCHMARK_SEED)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_scribbles_inside(scene: &SyntheticScene) {
        let gt = scene.gt.values();
        for (i, label) in scene.scribbles.labels().iter().enumerate() {
            match label {
                Label::Foreground => assert_eq!(gt[i], 1.0, "fg stroke at {i} outside gt"),
                Label::Background => assert_eq!(gt[i], 0.0, "bg stroke at {i} inside gt"),
                Label::Unlabeled => {}
            }
        }
        assert!(scene.scribbles.count(Label::Foreground) > 0);
        assert!(scene.scribbles.count(Label::Background) > 0);
    }

    #[test]
    fn deterministic() {
        let spec = SceneSpec::default();
        assert_eq!(generate_scene(&spec, 9).unwrap(), generate_scene(&spec, 9).unwrap());
        assert_ne!(generate_scene(&spec, 9).unwrap().image, generate_scene(&spec, 10).unwrap().image);
    }

    #[test]
    fn strokes_stay_in_their_regions() {
        let spec = SceneSpec::default();
        for seed in 0..40 {
            assert_scribbles_inside(&generate_scene(&spec, seed).unwrap());
        }
    }

    #[test]
    fn noiseless_interior_patches_share_a_mean() {
        let spec = SceneSpec {
            noise_sigma: 0.0,
            ..SceneSpec::default()
        };
        let scene = generate_scene(&spec, 5).unwrap();
        let regions = region_map(&scene.objects, spec.width, spec.height);
        let (pw, ph) = (spec.width / spec.grid_w, spec.height / spec.grid_h);
        let mut seen: Vec<Option<Vec<f64>>> = vec![None; scene.objects.len() + 1];
        let mut checked = 0;
        for gy in 0..spec.grid_h {
            for gx in 0..spec.grid_w {
                let first = regions[gy * ph * spec.width + gx * pw];
                let pure = (gy * ph..(gy + 1) * ph)
                    .all(|y| (gx * pw..(gx + 1) * pw).all(|x| regions[y * spec.width + x] == first));
                if !pure {
                    continue;
                }
                let v = scene.features.vector(gy * spec.grid_w + gx).to_vec();
                match &seen[first] {
                    Some(prev) => {
                        assert_eq!(prev, &v);
                        checked += 1;
                    }
                    None => seen[first] = Some(v),
                }
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn ground_truth_matches_shapes() {
        let spec = SceneSpec::default();
        let scene = generate_scene(&spec, 3).unwrap();
        for y in 0..spec.height {
            for x in 0..spec.width {
                let inside = scene.objects.iter().any(|o| o.contains(x as f64 + 0.5, y as f64 + 0.5));
                assert_eq!(scene.gt.get(x, y) == 1.0, inside);
            }
        }
    }

    #[test]
    fn flip_is_consistent_with_mirrored_shapes() {
        let spec = SceneSpec::default();
        for seed in 0..10 {
            let scene = generate_scene(&spec, seed).unwrap();
            let flipped = scene.flip_horizontal();
            let regions = region_map(&flipped.objects, spec.width, spec.height);
            let redrawn: Vec<f64> = regions.iter().map(|&r| if r > 0 { 1.0 } else { 0.0 }).collect();
            assert_eq!(flipped.gt.values(), &redrawn[..]);
            assert_scribbles_inside(&flipped);
            let back = flipped.flip_horizontal();
            assert_eq!((&back.image, &back.gt, &back.scribbles), (&scene.image, &scene.gt, &scene.scribbles));
        }
    }

    #[test]
    fn rejects_small_or_crowded_specs() {
        let small = SceneSpec {
            width: 16,
            height: 16,
            grid_h: 2,
            grid_w: 2,
            ..SceneSpec::default()
        };
        assert!(matches!(generate_scene(&small, 0), Err(Error::InvalidArgument(_))));
        let crowded = SceneSpec {
            width: 32,
            height: 32,
            grid_h: 4,
            grid_w: 4,
            min_objects: 3,
            max_objects: 3,
            object_radius: (14.0, 15.0),
            ..SceneSpec::default()
        };
        assert!(matches!(generate_scene(&crowded, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn benchmark_split_sizes() {
        let spec = SceneSpec::default();
        let b = generate_benchmark(&spec, 3, 2, BENCHMARK_SEED).unwrap();
        assert_eq!((b.train.len(), b.test.len()), (3, 2));
        let again = generate_benchmark(&spec, 3, 2, BENCHMARK_SEED).unwrap();
        assert_eq!(b, again);
    }
}
