//! File formats: GVRF feature fields, 8-bit rasters (PNG or PNM by
//! extension), head parameters, configs and CSV reports.
//!
//! Mask convention: single-channel 8-bit, 0 unlabeled, 128 background,
//! 255 foreground; any other value is rejected.

mod config;
mod gvrf;
mod params;
mod report;

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, RgbImage as RgbBuffer};

pub use config::{read_config, KitConfig, KEYS as CONFIG_KEYS};
pub use gvrf::{
    decode_features, decode_header, encode_features, read_features, write_features, FeatureFileHeader,
    HEADER_LEN as GVRF_HEADER_LEN, MAGIC as GVRF_MAGIC, VERSION as GVRF_VERSION,
};
pub use params::{decode_head, encode_head, read_head, write_head};
pub use report::{metrics_csv, training_log_csv, AGGREGATE_ID, LOG_HEADER, METRICS_HEADER};

use crate::error::{Error, Result};
use crate::grid::{Label, RgbImage, SaliencyMap, ScribbleMask};

pub const MASK_UNLABELED: u8 = 0;
pub const MASK_BACKGROUND: u8 = 128;
pub const MASK_FOREGROUND: u8 = 255;

pub(crate) fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

/// Check the magic, reporting truncation first when the header is short.
pub(crate) fn check_magic(bytes: &[u8], magic: [u8; 4], header_len: usize) -> Result<()> {
    if bytes.len() >= 4 && bytes[..4] != magic {
        return Err(Error::BadMagic {
            expected: magic,
            found: bytes[..4].try_into().expect("4 bytes"),
        });
    }
    if bytes.len() < header_len {
        return Err(Error::Truncated {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    Ok(())
}

fn decode(path: &Path) -> Result<DynamicImage> {
    Ok(ImageReader::open(path)?.with_guessed_format()?.decode()?)
}

fn luma8(path: &Path) -> Result<GrayImage> {
    match decode(path)? {
        DynamicImage::ImageLuma8(buf) => Ok(buf),
        other => Err(Error::PixelFormat {
            path: path.to_path_buf(),
            expected: "grayscale",
            found: format!("{:?}", other.color()),
        }),
    }
}

/// 8-bit RGB image mapped to `[0, 1]` by `/ 255`.
pub fn read_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    match decode(path)? {
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            RgbImage::new(w as usize, h as usize, buf.into_raw().into_iter().map(|b| f64::from(b) / 255.0).collect())
        }
        other => Err(Error::PixelFormat {
            path: path.to_path_buf(),
            expected: "RGB",
            found: format!("{:?}", other.color()),
        }),
    }
}

/// Writes `round(255 v)` per channel; values must already be in `[0, 1]`.
pub fn write_image(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let bytes = image.data().iter().map(|&v| quantize(v)).collect();
    let buf = RgbBuffer::from_raw(image.width() as u32, image.height() as u32, bytes).expect("buffer size");
    buf.save(path)?;
    Ok(())
}

/// Decode a mask raster, rejecting the first pixel (row-major) outside the
/// convention.
pub fn mask_from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<ScribbleMask> {
    let mut labels = Vec::with_capacity(bytes.len());
    for (i, &b) in bytes.iter().enumerate() {
        labels.push(match b {
            MASK_UNLABELED => Label::Unlabeled,
            MASK_BACKGROUND => Label::Background,
            MASK_FOREGROUND => Label::Foreground,
            value => {
                return Err(Error::MaskConvention {
                    x: (i % width) as u32,
                    y: (i / width) as u32,
                    value,
                })
            }
        });
    }
    ScribbleMask::new(width, height, labels)
}

pub fn mask_to_bytes(mask: &ScribbleMask) -> Vec<u8> {
    mask.labels()
        .iter()
        .map(|l| match l {
            Label::Unlabeled => MASK_UNLABELED,
            Label::Background => MASK_BACKGROUND,
            Label::Foreground => MASK_FOREGROUND,
        })
        .collect()
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<ScribbleMask> {
    let buf = luma8(path.as_ref())?;
    let (w, h) = buf.dimensions();
    mask_from_bytes(w as usize, h as usize, buf.as_raw())
}

pub fn write_mask(mask: &ScribbleMask, path: impl AsRef<Path>) -> Result<()> {
    let buf = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, mask_to_bytes(mask)).expect("buffer size");
    buf.save(path)?;
    Ok(())
}

/// `floor(255 v + 0.5)`, so ties round up (0.5 maps to 128).
pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0) + 0.5).floor() as u8
}

pub fn write_saliency(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<()> {
    let bytes = map.values().iter().map(|&v| quantize(v)).collect();
    let buf = GrayImage::from_raw(map.width() as u32, map.height() as u32, bytes).expect("buffer size");
    buf.save(path)?;
    Ok(())
}

/// Grayscale saliency as `byte / 255`.
pub fn read_saliency(path: impl AsRef<Path>) -> Result<SaliencyMap> {
    let buf = luma8(path.as_ref())?;
    let (w, h) = buf.dimensions();
    SaliencyMap::new(w as usize, h as usize, buf.as_raw().iter().map(|&b| f64::from(b) / 255.0).collect())
}

/// Grayscale ground truth binarized at `byte > 127`.
pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<SaliencyMap> {
    let buf = luma8(path.as_ref())?;
    let (w, h) = buf.dimensions();
    SaliencyMap::new(
        w as usize,
        h as usize,
        buf.as_raw().iter().map(|&b| if b > 127 { 1.0 } else { 0.0 }).collect(),
    )
}
