//! The nine handcrafted descriptors under their canonical short names.

use std::fmt;
use std::str::FromStr;

use crate::color::{autocorrelogram, gray_histogram, hist_stats, AcConfig};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::moments::{separable_moments, zernike_features, FeatureVector, MomentConfig, PolyFamily, ZernikeConfig};
use crate::texture::{haar_features, haralick_ri, lbp_ri_hist, GlcmConfig, HaarBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Descriptor {
    Ch1,
    Ch2,
    Lm,
    Zm,
    Har,
    Lbp,
    Hist,
    Ac,
    Haar,
}

impl Descriptor {
    pub const ALL: [Descriptor; 9] = [
        Descriptor::Ch1,
        Descriptor::Ch2,
        Descriptor::Lm,
        Descriptor::Zm,
        Descriptor::Har,
        Descriptor::Lbp,
        Descriptor::Hist,
        Descriptor::Ac,
        Descriptor::Haar,
    ];

    /// Identifier used on the command line and in file names.
    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Ch1 => "ch1",
            Descriptor::Ch2 => "ch2",
            Descriptor::Lm => "lm",
            Descriptor::Zm => "zm",
            Descriptor::Har => "har",
            Descriptor::Lbp => "lbp",
            Descriptor::Hist => "hist",
            Descriptor::Ac => "ac",
            Descriptor::Haar => "haar",
        }
    }

    /// Label used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Descriptor::Ch1 => "CH_1",
            Descriptor::Ch2 => "CH_2",
            Descriptor::Lm => "LM",
            Descriptor::Zm => "ZM",
            Descriptor::Har => "HAR",
            Descriptor::Lbp => "LBP",
            Descriptor::Hist => "Hist",
            Descriptor::Ac => "AC",
            Descriptor::Haar => "Haar",
        }
    }

    /// Output length with default settings.
    pub fn feature_len(self) -> usize {
        match self {
            Descriptor::Ch1 | Descriptor::Ch2 | Descriptor::Lm => 36,
            Descriptor::Zm => 12,
            Descriptor::Har => 13,
            Descriptor::Lbp => 36,
            Descriptor::Hist => 7,
            Descriptor::Ac => 256,
            Descriptor::Haar => 240,
        }
    }

    pub fn extract(self, image: &GrayImage) -> Result<FeatureVector> {
        let fv = match self {
            Descriptor::Ch1 => separable_moments(image, &MomentConfig::new(PolyFamily::Cheb1)),
            Descriptor::Ch2 => separable_moments(image, &MomentConfig::new(PolyFamily::Cheb2)),
            Descriptor::Lm => separable_moments(image, &MomentConfig::new(PolyFamily::Legendre)),
            Descriptor::Zm => zernike_features(image, &ZernikeConfig::default()),
            Descriptor::Har => haralick_ri(image, &GlcmConfig::default())?,
            Descriptor::Lbp => lbp_ri_hist(image)?,
            Descriptor::Hist => hist_stats(&gray_histogram(image)),
            Descriptor::Ac => autocorrelogram(image, &AcConfig::default())?,
            Descriptor::Haar => haar_features(image, &HaarBank::default())?,
        };
        FeatureVector::new(self.name(), fv.values)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Descriptor::ALL
            .into_iter()
            .find(|d| d.name() == key || d.display_name().to_ascii_lowercase() == key)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown descriptor `{s}` (known: ch1, ch2, lm, zm, har, lbp, hist, ac, haar)"
                ))
            })
    }
}

/// Table label for a descriptor identifier; deep or combined names pass through.
pub fn display_name(id: &str) -> String {
    id.split('+')
        .map(|part| match part.parse::<Descriptor>() {
            Ok(d) => d.display_name(),
            Err(_) => part,
        })
        .collect::<Vec<_>>()
        .join("+")
}
