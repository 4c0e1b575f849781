//! Row-major 8-bit rasters.

use crate::error::{Error, Result};

/// Smallest side accepted anywhere; radius-1 neighborhoods need a 3×3 window.
pub const MIN_SIDE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::Shape(format!(
                "rgb buffer has {} bytes, expected {}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// ITU-R BT.601 luma, rounded half away from zero.
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .data
            .chunks_exact(3)
            .map(|px| luma(px[0], px[1], px[2]))
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "gray buffer has {} bytes, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Quarter turn counter-clockwise: the top row becomes the left column.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        let mut data = vec![0u8; w * h];
        // new image is h wide and w tall
        for y in 0..h {
            for x in 0..w {
                let nx = y;
                let ny = w - 1 - x;
                data[ny * h + nx] = self.get(x, y);
            }
        }
        GrayImage {
            width: h,
            height: w,
            data,
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(Error::DegenerateImage(format!(
            "{width}x{height} is smaller than {MIN_SIDE}x{MIN_SIDE}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_reference_pixels() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(luma(255, 0, 0), 76);
        assert_eq!(luma(0, 255, 0), 150);
        assert_eq!(luma(0, 0, 255), 29);
    }

    #[test]
    fn rejects_tiny_and_ragged() {
        assert!(GrayImage::new(2, 5, vec![0; 10]).is_err());
        assert!(GrayImage::new(3, 3, vec![0; 8]).is_err());
        assert!(RgbImage::new(3, 3, vec![0; 26]).is_err());
    }

    #[test]
    fn four_quarter_turns_is_identity() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 10 + y) as u8).unwrap();
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (3, 5));
        // top-right corner moves to top-left
        assert_eq!(r.get(0, 0), img.get(4, 0));
        assert_eq!(r.rotate90().rotate90().rotate90(), img);
    }
}
