//! Grayscale image input.

use crate::error::{CliError, CliResult};
use image::{ColorType, DynamicImage, ImageReader};
use mp_core::GridDensity;
use std::path::Path;

/// A grayscale raster with values in `[0,1]`, row 0 on top.
#[derive(Debug, Clone, PartialEq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl Gray {
    pub fn from_dynamic(img: DynamicImage) -> CliResult<Self> {
        let (width, height) = (img.width() as usize, img.height() as usize);
        let pixels: Vec<f64> = match img.color() {
            ColorType::L8 | ColorType::La8 => img.to_luma8().pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
            ColorType::L16 | ColorType::La16 => {
                img.to_luma16().pixels().map(|p| p.0[0] as f64 / 65535.0).collect()
            }
            other => {
                return Err(CliError::Validation(format!(
                    "color images are not supported ({other:?}); convert to grayscale first"
                )))
            }
        };
        Ok(Gray { width, height, pixels })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let img = ImageReader::open(path)
            .map_err(|e| CliError::read(path, e))?
            .with_guessed_format()
            .map_err(|e| CliError::read(path, e))?
            .decode()
            .map_err(|e| CliError::read(path, e))?;
        Self::from_dynamic(img)
    }

    /// Target density; with `invert` dark pixels carry the mass.
    pub fn density(&self, invert: bool) -> CliResult<GridDensity> {
        Ok(GridDensity::from_image(self.width, self.height, &self.pixels, invert)?)
    }
}

/// Writes an 8-bit binary PGM.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> CliResult<()> {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    std::fs::write(path, bytes).map_err(|e| CliError::write(path, e))
}
