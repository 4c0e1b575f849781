//! Intensity-histogram statistics and the autocorrelogram, both computed on
//! grayscale images.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::moments::FeatureVector;

/// 256-bin relative-frequency histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: [f64; 256],
}

impl Histogram {
    /// Wraps raw bin masses, which must be non-negative and sum to 1.
    pub fn from_bins(bins: [f64; 256]) -> Result<Self> {
        if bins.iter().any(|&b| !(b >= 0.0)) {
            return Err(Error::Config("histogram bins must be non-negative".into()));
        }
        let total: f64 = bins.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("histogram sums to {total}, not 1")));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64; 256] {
        &self.bins
    }
}

pub fn gray_histogram(image: &GrayImage) -> Histogram {
    let mut counts = [0u64; 256];
    for &v in image.data() {
        counts[usize::from(v)] += 1;
    }
    let total = image.data().len() as f64;
    let mut bins = [0.0; 256];
    for (b, c) in bins.iter_mut().zip(counts) {
        *b = c as f64 / total;
    }
    Histogram { bins }
}

/// Mean, standard deviation, smoothness, skewness, kurtosis, uniformity and
/// entropy of the histogram, with intensities mapped to `z = v / 255`.
///
/// Skewness and kurtosis are the raw third and fourth central moments;
/// entropy is in bits.
pub fn hist_stats(hist: &Histogram) -> FeatureVector {
    let z = |i: usize| i as f64 / 255.0;
    let p = &hist.bins;
    let mean: f64 = (0..256).map(|i| z(i) * p[i]).sum();
    let central = |k: i32| -> f64 { (0..256).map(|i| (z(i) - mean).powi(k) * p[i]).sum() };
    let var = central(2);
    let std = var.sqrt();
    let smoothness = 1.0 - 1.0 / (1.0 + var);
    let skew = central(3);
    let kurt = central(4);
    let uniformity: f64 = p.iter().map(|v| v * v).sum();
    let entropy: f64 = -p
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>();
    FeatureVector {
        descriptor: "hist".into(),
        values: vec![mean, std, smoothness, skew, kurt, uniformity, entropy],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcConfig {
    pub distances: Vec<usize>,
    pub levels: usize,
}

impl Default for AcConfig {
    fn default() -> Self {
        Self {
            distances: vec![1, 2, 3, 4],
            levels: 64,
        }
    }
}

impl AcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() {
            return Err(Error::Config("autocorrelogram needs at least one distance".into()));
        }
        if self.distances[0] == 0 || self.distances.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "autocorrelogram distances must be positive and strictly increasing".into(),
            ));
        }
        if !(2..=256).contains(&self.levels) {
            return Err(Error::Config(format!(
                "autocorrelogram levels must be in [2, 256], got {}",
                self.levels
            )));
        }
        Ok(())
    }

    pub fn feature_len(&self) -> usize {
        self.levels * self.distances.len()
    }
}

/// For each distance `d` and bin `c`: the probability that a pixel on the
/// L∞ ring at distance `d` around a pixel of bin `c` also has bin `c`.
/// Blocks for each distance are concatenated in configuration order.
pub fn autocorrelogram(image: &GrayImage, config: &AcConfig) -> Result<FeatureVector> {
    config.validate()?;
    let (w, h) = (image.width(), image.height());
    let d_max = *config.distances.last().unwrap_or(&0);
    if w <= d_max || h <= d_max {
        return Err(Error::DegenerateImage(format!(
            "{w}x{h} image is not larger than distance {d_max}"
        )));
    }
    let levels = config.levels;
    let bins: Vec<usize> = image
        .data()
        .iter()
        .map(|&v| usize::from(v) * levels / 256)
        .collect();
    let (wi, hi) = (w as isize, h as isize);
    let mut values = Vec::with_capacity(config.feature_len());
    for &d in &config.distances {
        let d = d as isize;
        let mut same = vec![0u64; levels];
        let mut total = vec![0u64; levels];
        for y in 0..hi {
            for x in 0..wi {
                let c = bins[(y * wi + x) as usize];
                let mut visit = |qx: isize, qy: isize| {
                    if qx >= 0 && qx < wi && qy >= 0 && qy < hi {
                        total[c] += 1;
                        if bins[(qy * wi + qx) as usize] == c {
                            same[c] += 1;
                        }
                    }
                };
                // top and bottom edges of the ring, then the sides without corners
                for qx in x - d..=x + d {
                    visit(qx, y - d);
                    visit(qx, y + d);
                }
                for qy in y - d + 1..y + d {
                    visit(x - d, qy);
                    visit(x + d, qy);
                }
            }
        }
        values.extend(same.iter().zip(&total).map(|(&s, &t)| {
            if t == 0 {
                0.0
            } else {
                s as f64 / t as f64
            }
        }));
    }
    FeatureVector::new("ac", values)
}
