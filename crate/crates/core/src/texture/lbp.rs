//! Rotation-invariant local binary pattern histograms (radius 1, 8 neighbors).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::moments::FeatureVector;

/// Number of distinct rotation-invariant 8-bit patterns.
pub const RI_CLASSES: usize = 36;

/// Neighbor offsets `(dx, dy)` for bits 0..8: counter-clockwise starting at
/// the right-hand neighbor (image rows grow downwards).
pub const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LbpConfig {
    pub radius: usize,
    pub neighbors: usize,
}

impl Default for LbpConfig {
    fn default() -> Self {
        Self {
            radius: 1,
            neighbors: 8,
        }
    }
}

impl LbpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius != 1 || self.neighbors != 8 {
            return Err(Error::Config(format!(
                "only r=1, n=8 local binary patterns are supported (got r={}, n={})",
                self.radius, self.neighbors
            )));
        }
        Ok(())
    }
}

/// Smallest value among the eight circular rotations of `code`.
pub fn min_rotation(code: u8) -> u8 {
    (0..8).map(|k| code.rotate_right(k)).min().unwrap_or(code)
}

/// Maps every 8-bit code to its rotation-class index in `0..36`; classes are
/// numbered by increasing minimal representative.
pub fn class_table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut reps: Vec<u8> = (0..=255u8).map(min_rotation).collect();
        reps.sort_unstable();
        reps.dedup();
        debug_assert_eq!(reps.len(), RI_CLASSES);
        let mut table = [0u8; 256];
        for code in 0..=255u8 {
            let rep = min_rotation(code);
            table[usize::from(code)] = reps.binary_search(&rep).unwrap_or(0) as u8;
        }
        table
    })
}

/// LBP code of interior pixel `(x, y)`; bit `b` is set iff neighbor `b >= center`.
pub fn lbp_code(image: &GrayImage, x: usize, y: usize) -> u8 {
    let center = image.get(x, y);
    let mut code = 0u8;
    for (b, &(dx, dy)) in NEIGHBORS.iter().enumerate() {
        let v = image.get((x as isize + dx) as usize, (y as isize + dy) as usize);
        if v >= center {
            code |= 1 << b;
        }
    }
    code
}

/// Normalized 36-bin histogram of rotation-invariant codes over interior pixels.
pub fn lbp_ri_hist(image: &GrayImage) -> Result<FeatureVector> {
    lbp_ri_hist_with(image, &LbpConfig::default())
}

pub fn lbp_ri_hist_with(image: &GrayImage, config: &LbpConfig) -> Result<FeatureVector> {
    config.validate()?;
    let (w, h) = (image.width(), image.height());
    if w < 3 || h < 3 {
        return Err(Error::DegenerateImage(format!("{w}x{h} has no interior pixels")));
    }
    let table = class_table();
    let mut counts = [0u64; RI_CLASSES];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            counts[usize::from(table[usize::from(lbp_code(image, x, y))])] += 1;
        }
    }
    let total = ((w - 2) * (h - 2)) as f64;
    FeatureVector::new("lbp", counts.iter().map(|&c| c as f64 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_six_orbits() {
        let mut reps: Vec<u8> = (0..=255u8).map(min_rotation).collect();
        reps.sort_unstable();
        reps.dedup();
        assert_eq!(reps.len(), RI_CLASSES);
        let table = class_table();
        assert_eq!(table[0], 0);
        assert_eq!(table[255], 35);
        assert_eq!(table[0b0000_0001], table[0b1000_0000]);
    }

    #[test]
    fn constant_image_is_all_ones_class() {
        let img = GrayImage::filled(10, 8, 90).unwrap();
        let fv = lbp_ri_hist(&img).unwrap();
        assert_eq!(fv.len(), 36);
        assert_eq!(fv.values[usize::from(class_table()[255])], 1.0);
    }

    #[test]
    fn code_bit_order() {
        // only the right-hand neighbor is brighter than the center
        let img = GrayImage::new(3, 3, vec![0, 0, 0, 0, 5, 9, 0, 0, 0]).unwrap();
        assert_eq!(lbp_code(&img, 1, 1), 0b0000_0001);
        // only the upper neighbor
        let img = GrayImage::new(3, 3, vec![0, 9, 0, 0, 5, 0, 0, 0, 0]).unwrap();
        assert_eq!(lbp_code(&img, 1, 1), 0b0000_0100);
    }

    #[test]
    fn rejects_other_configs() {
        let img = GrayImage::filled(5, 5, 1).unwrap();
        let cfg = LbpConfig {
            radius: 2,
            neighbors: 16,
        };
        assert!(lbp_ri_hist_with(&img, &cfg).is_err());
    }

    #[test]
    fn histogram_sums_to_one_and_rotates() {
        let img = GrayImage::from_fn(17, 12, |x, y| ((x * 31 + y * y * 17) % 251) as u8).unwrap();
        let fv = lbp_ri_hist(&img).unwrap();
        assert!((fv.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let rot = lbp_ri_hist(&img.rotate90()).unwrap();
        assert_eq!(fv.values, rot.values);
    }
}
