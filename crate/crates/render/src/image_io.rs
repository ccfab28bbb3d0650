//! Render-grade image I/O: 8-bit PNG for previews and dataset frames,
//! float32 PFM for loss-grade reference images.

use std::fs;
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian};

use crate::{RenderError, RenderOutput};

/// Row-major H*W*3 RGB image with values nominally in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage64 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl RgbImage64 {
    pub fn new(width: usize, height: usize) -> Self {
        RgbImage64 {
            width,
            height,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn from_render(out: &RenderOutput) -> Self {
        RgbImage64 {
            width: out.width,
            height: out.height,
            data: out.color.clone(),
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let o = (y * self.width + x) * 3;
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
        let o = (y * self.width + x) * 3;
        self.data[o..o + 3].copy_from_slice(&rgb);
    }
}

/// Encodes to PNG bytes in memory, quantizing each channel to 8 bits.
pub fn encode_png_rgb(img: &RgbImage64) -> Result<Vec<u8>, RenderError> {
    let mut buf = image::RgbImage::new(img.width as u32, img.height as u32);
    for y in 0..img.height {
        for x in 0..img.width {
            let p = img.pixel(x, y);
            let to8 = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            buf.put_pixel(x as u32, y as u32, image::Rgb([to8(p[0]), to8(p[1]), to8(p[2])]));
        }
    }
    let mut bytes = Vec::new();
    buf.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )
    .map_err(|e| RenderError::codec(Path::new("<memory>"), e.to_string()))?;
    Ok(bytes)
}

pub fn save_png_rgb(img: &RgbImage64, path: &Path) -> Result<(), RenderError> {
    let bytes = encode_png_rgb(img)?;
    fs::write(path, bytes).map_err(|e| RenderError::io(path, e))
}

pub fn load_png_rgb(path: &Path) -> Result<RgbImage64, RenderError> {
    let dynimg = image::open(path).map_err(|e| RenderError::codec(path, e.to_string()))?;
    let rgb = dynimg.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut img = RgbImage64::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let p = rgb.get_pixel(x as u32, y as u32);
            img.set_pixel(
                x,
                y,
                [
                    p[0] as f64 / 255.0,
                    p[1] as f64 / 255.0,
                    p[2] as f64 / 255.0,
                ],
            );
        }
    }
    Ok(img)
}

/// Writes a color PFM (`PF`, negative scale = little endian). PFM stores
/// rows bottom to top.
pub fn save_pfm_rgb(img: &RgbImage64, path: &Path) -> Result<(), RenderError> {
    let mut out = Vec::with_capacity(64 + img.width * img.height * 12);
    out.extend_from_slice(format!("PF\n{} {}\n-1.0\n", img.width, img.height).as_bytes());
    let mut scratch = [0u8; 4];
    for y in (0..img.height).rev() {
        for x in 0..img.width {
            let p = img.pixel(x, y);
            for v in p {
                LittleEndian::write_f32(&mut scratch, v as f32);
                out.extend_from_slice(&scratch);
            }
        }
    }
    fs::write(path, out).map_err(|e| RenderError::io(path, e))
}

pub fn load_pfm_rgb(path: &Path) -> Result<RgbImage64, RenderError> {
    let bytes = fs::read(path).map_err(|e| RenderError::io(path, e))?;
    // Header: three whitespace-terminated tokensets: magic, "w h", scale.
    let mut pos = 0usize;
    let mut next_line = || -> Result<String, RenderError> {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(RenderError::codec(path, "truncated PFM header"));
        }
        let line = String::from_utf8_lossy(&bytes[start..pos]).trim().to_string();
        pos += 1;
        Ok(line)
    };
    let magic = next_line()?;
    if magic != "PF" {
        return Err(RenderError::codec(path, format!("unsupported PFM magic `{magic}`")));
    }
    let dims = next_line()?;
    let mut it = dims.split_whitespace();
    let (w, h): (usize, usize) = match (it.next(), it.next()) {
        (Some(w), Some(h)) => (
            w.parse().map_err(|_| RenderError::codec(path, "bad width"))?,
            h.parse().map_err(|_| RenderError::codec(path, "bad height"))?,
        ),
        _ => return Err(RenderError::codec(path, "missing dimensions")),
    };
    let scale: f64 = next_line()?
        .parse()
        .map_err(|_| RenderError::codec(path, "bad scale"))?;
    if scale >= 0.0 {
        return Err(RenderError::codec(path, "big-endian PFM is not supported"));
    }
    let need = w * h * 12;
    if bytes.len() - pos < need {
        return Err(RenderError::codec(path, "truncated PFM pixel data"));
    }
    let data = &bytes[pos..pos + need];
    let mut img = RgbImage64::new(w, h);
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            let o = (row * w + x) * 12;
            img.set_pixel(
                x,
                y,
                [
                    LittleEndian::read_f32(&data[o..o + 4]) as f64,
                    LittleEndian::read_f32(&data[o + 4..o + 8]) as f64,
                    LittleEndian::read_f32(&data[o + 8..o + 12]) as f64,
                ],
            );
        }
    }
    Ok(img)
}
