//! Supervision masks: H×W class-id maps paired with a camera. On disk a mask
//! is a single-channel 16-bit PNG (u16::MAX = unlabeled) plus a JSON sidecar
//! mapping ids to class names.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};
use r2sim_scene::CameraModel;

use crate::error::SemanticError;

pub const UNLABELED: i32 = -1;

/// PNG pixel value reserved for unlabeled pixels.
const UNLABELED_PIXEL: u16 = u16::MAX;

#[derive(Debug, Clone)]
pub struct SupervisionView {
    pub camera: CameraModel,
    /// Row-major H×W class ids; -1 marks unlabeled pixels.
    pub mask: Vec<i32>,
    /// Class id → class name; names must exist in the scene's label table.
    pub class_ids: BTreeMap<i32, String>,
}

impl SupervisionView {
    pub fn validate(&self) -> Result<(), SemanticError> {
        let expected = self.camera.width as usize * self.camera.height as usize;
        if self.mask.len() != expected {
            return Err(SemanticError::MaskShape {
                mask_len: self.mask.len(),
                width: self.camera.width,
                height: self.camera.height,
            });
        }
        for &id in &self.mask {
            if id >= 0 && !self.class_ids.contains_key(&id) {
                return Err(SemanticError::UnknownMaskId { id });
            }
        }
        Ok(())
    }

    pub fn labeled_pixels(&self) -> usize {
        self.mask.iter().filter(|&&id| id >= 0).count()
    }
}

fn sidecar_path(mask_path: &Path) -> PathBuf {
    mask_path.with_extension("json")
}

/// Writes `mask` as 16-bit grayscale PNG and the id→name map as a JSON
/// sidecar next to it (same stem, .json extension).
pub fn save_mask(
    path: &Path,
    width: u32,
    height: u32,
    mask: &[i32],
    class_ids: &BTreeMap<i32, String>,
) -> Result<(), SemanticError> {
    if mask.len() != width as usize * height as usize {
        return Err(SemanticError::MaskShape {
            mask_len: mask.len(),
            width,
            height,
        });
    }
    let mut pixels = Vec::with_capacity(mask.len());
    for &id in mask {
        let v = if id == UNLABELED {
            UNLABELED_PIXEL
        } else if (0..i32::from(u16::MAX)).contains(&id) {
            id as u16
        } else {
            return Err(SemanticError::MaskImage {
                path: path.to_path_buf(),
                reason: format!("class id {id} not representable in a 16-bit mask"),
            });
        };
        pixels.push(v);
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(width, height, pixels)
        .expect("pixel count checked above");
    let mut bytes = Cursor::new(Vec::new());
    DynamicImage::ImageLuma16(buf)
        .write_to(&mut bytes, ImageFormat::Png)
        .map_err(|e| SemanticError::MaskImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    std::fs::write(path, bytes.into_inner()).map_err(|e| SemanticError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;

    let sidecar = sidecar_path(path);
    let named: BTreeMap<String, String> = class_ids
        .iter()
        .map(|(id, name)| (id.to_string(), name.clone()))
        .collect();
    let text = serde_json::to_string_pretty(&named).map_err(|e| SemanticError::Json {
        path: sidecar.clone(),
        source: e,
    })?;
    std::fs::write(&sidecar, text).map_err(|e| SemanticError::Io {
        path: sidecar,
        source: e,
    })
}

/// Loads a mask written by [`save_mask`]; returns (width, height, mask,
/// class_ids).
pub fn load_mask(
    path: &Path,
) -> Result<(u32, u32, Vec<i32>, BTreeMap<i32, String>), SemanticError> {
    let bytes = std::fs::read(path).map_err(|e| SemanticError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| {
        SemanticError::MaskImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })?;
    let buf = match img {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(SemanticError::MaskImage {
                path: path.to_path_buf(),
                reason: format!(
                    "mask PNG must be single-channel 16-bit, got {:?}",
                    other.color()
                ),
            })
        }
    };
    let (width, height) = buf.dimensions();
    let mask: Vec<i32> = buf
        .pixels()
        .map(|p| {
            if p.0[0] == UNLABELED_PIXEL {
                UNLABELED
            } else {
                i32::from(p.0[0])
            }
        })
        .collect();

    let sidecar = sidecar_path(path);
    let text = std::fs::read_to_string(&sidecar).map_err(|e| SemanticError::Io {
        path: sidecar.clone(),
        source: e,
    })?;
    let named: BTreeMap<String, String> =
        serde_json::from_str(&text).map_err(|e| SemanticError::Json {
            path: sidecar.clone(),
            source: e,
        })?;
    let mut class_ids = BTreeMap::new();
    for (key, name) in named {
        let id: i32 = key.parse().map_err(|_| SemanticError::MaskImage {
            path: sidecar.clone(),
            reason: format!("sidecar key {key:?} is not an integer class id"),
        })?;
        if id < 0 {
            return Err(SemanticError::MaskImage {
                path: sidecar.clone(),
                reason: format!("sidecar class id {id} is negative"),
            });
        }
        class_ids.insert(id, name);
    }
    Ok((width, height, mask, class_ids))
}
