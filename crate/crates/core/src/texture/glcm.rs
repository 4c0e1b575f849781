//! Gray-level co-occurrence matrices and Haralick's texture statistics.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::moments::FeatureVector;

pub const HARALICK_NAMES: [&str; 13] = [
    "energy",
    "correlation",
    "inertia",
    "entropy",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "difference_average",
    "difference_variance",
    "difference_entropy",
    "info_correlation_1",
    "info_correlation_2",
];

/// Image of gray-level bins in `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    levels: usize,
    bins: Vec<u8>,
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, levels: usize, bins: Vec<u8>) -> Result<Self> {
        check_levels(levels)?;
        if width == 0 || height == 0 || bins.len() != width * height {
            return Err(Error::Shape(format!(
                "{} bins for a {width}x{height} image",
                bins.len()
            )));
        }
        if let Some(b) = bins.iter().find(|&&b| usize::from(b) >= levels) {
            return Err(Error::Config(format!("bin {b} outside 0..{levels}")));
        }
        Ok(Self {
            width,
            height,
            levels,
            bins,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bins(&self) -> &[u8] {
        &self.bins
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> usize {
        usize::from(self.bins[y * self.width + x])
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if !(2..=256).contains(&levels) {
        return Err(Error::Config(format!(
            "quantization levels must be in [2, 256], got {levels}"
        )));
    }
    Ok(())
}

/// `bin = floor(intensity * levels / 256)`.
pub fn quantize(image: &GrayImage, levels: usize) -> Result<QuantizedImage> {
    check_levels(levels)?;
    let bins = image
        .data()
        .iter()
        .map(|&v| (usize::from(v) * levels / 256) as u8)
        .collect();
    Ok(QuantizedImage {
        width: image.width(),
        height: image.height(),
        levels,
        bins,
    })
}

/// Symmetric, normalized co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    levels: usize,
    matrix: Vec<f64>,
}

impl Glcm {
    /// Wraps a probability matrix, row-major `levels × levels`.
    pub fn from_probabilities(levels: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != levels * levels {
            return Err(Error::Shape(format!(
                "{} entries for {levels}x{levels} glcm",
                matrix.len()
            )));
        }
        Ok(Self { levels, matrix })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.levels + j]
    }
}

/// `(dx, dy)` for an angle; `dy < 0` points up the image.
pub fn offset(distance: usize, angle: u32) -> Result<(isize, isize)> {
    let d = distance as isize;
    match angle {
        0 => Ok((d, 0)),
        45 => Ok((d, -d)),
        90 => Ok((0, -d)),
        135 => Ok((-d, -d)),
        other => Err(Error::Config(format!(
            "glcm angle must be 0, 45, 90 or 135, got {other}"
        ))),
    }
}

pub fn glcm(image: &QuantizedImage, distance: usize, angle: u32) -> Result<Glcm> {
    if distance == 0 {
        return Err(Error::Config("glcm distance must be >= 1".into()));
    }
    let (dx, dy) = offset(distance, angle)?;
    let (w, h) = (image.width as isize, image.height as isize);
    if dx.abs() >= w || dy.abs() >= h {
        return Err(Error::DegenerateImage(format!(
            "{w}x{h} image has no pixel pairs at offset ({dx}, {dy})"
        )));
    }
    let levels = image.levels;
    let mut counts = vec![0u64; levels * levels];
    let (x0, x1) = (0.max(-dx), w.min(w - dx));
    let (y0, y1) = (0.max(-dy), h.min(h - dy));
    for y in y0..y1 {
        for x in x0..x1 {
            let i = image.get(x as usize, y as usize);
            let j = image.get((x + dx) as usize, (y + dy) as usize);
            counts[i * levels + j] += 1;
            counts[j * levels + i] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let matrix = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Glcm { levels, matrix })
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Haralick's thirteen statistics, in the order of [`HARALICK_NAMES`].
///
/// Gray levels are indexed from 0. Entropies are in bits. Sum variance is
/// taken about the sum average. Correlation is 0 when either marginal has
/// zero variance; IMC1 is 0 when both marginal entropies are 0.
pub fn haralick13(glcm: &Glcm) -> [f64; 13] {
    let n = glcm.levels;
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    let mut p_sum = vec![0.0; 2 * n - 1];
    let mut p_diff = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let p = glcm.get(i, j);
            px[i] += p;
            py[j] += p;
            p_sum[i + j] += p;
            p_diff[i.abs_diff(j)] += p;
        }
    }

    let mu_x: f64 = px.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
    let mu_y: f64 = py.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
    let var_x: f64 = px.iter().enumerate().map(|(i, p)| (i as f64 - mu_x).powi(2) * p).sum();
    let var_y: f64 = py.iter().enumerate().map(|(j, p)| (j as f64 - mu_y).powi(2) * p).sum();

    let mut energy = 0.0;
    let mut cross = 0.0;
    let mut inertia = 0.0;
    let mut hxy = 0.0;
    let mut idm = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = glcm.get(i, j);
            let d = i as f64 - j as f64;
            energy += p * p;
            cross += (i as f64) * (j as f64) * p;
            inertia += d * d * p;
            hxy -= plogp(p);
            idm += p / (1.0 + d * d);
            let q = px[i] * py[j];
            if q > 0.0 {
                hxy1 -= p * q.log2();
                hxy2 -= q * q.log2();
            }
        }
    }
    let correlation = if var_x > 0.0 && var_y > 0.0 {
        (cross - mu_x * mu_y) / (var_x * var_y).sqrt()
    } else {
        0.0
    };

    let sum_avg: f64 = p_sum.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let sum_var: f64 = p_sum.iter().enumerate().map(|(k, p)| (k as f64 - sum_avg).powi(2) * p).sum();
    let sum_ent: f64 = -p_sum.iter().map(|&p| plogp(p)).sum::<f64>();
    let diff_avg: f64 = p_diff.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let diff_var: f64 = p_diff.iter().enumerate().map(|(k, p)| (k as f64 - diff_avg).powi(2) * p).sum();
    let diff_ent: f64 = -p_diff.iter().map(|&p| plogp(p)).sum::<f64>();

    let hx: f64 = -px.iter().map(|&p| plogp(p)).sum::<f64>();
    let hy: f64 = -py.iter().map(|&p| plogp(p)).sum::<f64>();
    let imc1 = {
        let denom = hx.max(hy);
        if denom > 0.0 {
            (hxy - hxy1) / denom
        } else {
            0.0
        }
    };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt();

    [
        energy, correlation, inertia, hxy, idm, sum_avg, sum_var, sum_ent, diff_avg, diff_var,
        diff_ent, imc1, imc2,
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlcmConfig {
    pub levels: usize,
    pub distance: usize,
    pub angles: Vec<u32>,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self {
            levels: 8,
            distance: 1,
            angles: vec![0, 45, 90, 135],
        }
    }
}

/// Haralick statistics averaged over the configured angles.
pub fn haralick_ri(image: &GrayImage, config: &GlcmConfig) -> Result<FeatureVector> {
    if config.angles.is_empty() {
        return Err(Error::Config("glcm angle set is empty".into()));
    }
    let q = quantize(image, config.levels)?;
    let per_angle = config
        .angles
        .iter()
        .map(|&a| glcm(&q, config.distance, a).map(|g| haralick13(&g)))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..13)
        .map(|f| {
            // sorted summation: the mean must not depend on which angle
            // produced which value (a quarter turn permutes the angles)
            let mut col: Vec<f64> = per_angle.iter().map(|v| v[f]).collect();
            col.sort_by(f64::total_cmp);
            col.iter().sum::<f64>() / col.len() as f64
        })
        .collect();
    FeatureVector::new("har", values)
}
