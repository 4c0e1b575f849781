//! Dataset discovery, image decoding and stratified fold planning.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};
use crate::rng::{derive_seed, SplitMix64};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "bmp", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Normal,
    Abnormal,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Normal, Label::Abnormal];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Abnormal => "abnormal",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Normal => 0,
            Label::Abnormal => 1,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Normal => Label::Abnormal,
            Label::Abnormal => Label::Normal,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Label::Normal),
            "abnormal" => Ok(Label::Abnormal),
            other => Err(Error::Config(format!(
                "unknown class `{other}` (expected normal or abnormal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    /// Path relative to the dataset root, `/`-separated. Unique key.
    pub id: String,
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Builds a dataset from an explicit sample list, sorting by id.
    pub fn from_samples(root: impl Into<PathBuf>, mut samples: Vec<Sample>) -> Result<Self> {
        samples.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = samples.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Layout(format!("duplicate sample id `{}`", w[0].id)));
        }
        Ok(Self {
            root: root.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn path_of(&self, sample: &Sample) -> PathBuf {
        self.root.join(&sample.id)
    }

    pub fn count(&self, label: Label) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }
}

/// Decodes a PNG/BMP/JPEG file and converts it to BT.601 grayscale.
pub fn decode_and_gray(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bytes(&bytes).map_err(|message| Error::ImageFormat {
        path: path.to_path_buf(),
        message,
    })
}

fn decode_bytes(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let decoded = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let rgb = RgbImage::new(w, h, rgb.into_raw()).map_err(|e| e.to_string())?;
    Ok(rgb.to_gray())
}

/// Scans `<root>/normal` and `<root>/abnormal` (directory names matched
/// case-insensitively) for image files. Ids are `<dir>/<file>`.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut class_dirs: [Option<(String, PathBuf)>; 2] = [None, None];
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if !entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let label = match name.to_ascii_lowercase().as_str() {
            "normal" => Label::Normal,
            "abnormal" => Label::Abnormal,
            _ => continue,
        };
        let slot = &mut class_dirs[label.index()];
        if let Some((prev, _)) = slot {
            return Err(Error::Layout(format!(
                "both `{prev}` and `{name}` map to class {label}"
            )));
        }
        *slot = Some((name, entry.path()));
    }

    for label in Label::ALL {
        if class_dirs[label.index()].is_none() {
            return Err(Error::Layout(format!(
                "{} has no `{}` subdirectory",
                root.display(),
                label.as_str()
            )));
        }
    }

    let mut samples = Vec::new();
    for label in Label::ALL {
        let (dir_name, dir) = class_dirs[label.index()].clone().expect("checked above");
        let before = samples.len();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let path = entry.path();
            if !path.is_file() || !is_image_file(&path) {
                continue;
            }
            let file = entry.file_name().to_string_lossy().into_owned();
            samples.push(Sample {
                id: format!("{dir_name}/{file}"),
                label,
            });
        }
        if samples.len() == before {
            return Err(Error::EmptyClass(label.as_str()));
        }
    }
    Dataset::from_samples(root, samples)
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Assignment of every sample (by dataset position) to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    assignment: Vec<usize>,
}

impl FoldPlan {
    /// Plan from an explicit fold index per sample.
    pub fn from_assignment(k: usize, seed: u64, assignment: Vec<usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("fold count must be >= 2, got {k}")));
        }
        if let Some(&bad) = assignment.iter().find(|&&f| f >= k) {
            return Err(Error::Config(format!("fold index {bad} out of range for k = {k}")));
        }
        Ok(Self {
            k,
            seed,
            assignment,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Positions held out in `fold`.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    /// Positions used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

/// Stratified `k`-fold plan.
///
/// For each class (Normal first, then Abnormal) the dataset positions of that
/// class are shuffled with a Fisher–Yates pass driven by
/// `SplitMix64::new(derive_seed(seed, class_index))` and dealt round-robin
/// into folds. The Abnormal deal continues where the Normal deal stopped, so
/// total fold sizes stay balanced as well.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be >= 2, got {k}")));
    }
    let mut assignment = vec![usize::MAX; labels.len()];
    let mut next_fold = 0usize;
    for label in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if members.len() < k {
            return Err(Error::Stratification(format!(
                "class {label} has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        let mut rng = SplitMix64::new(derive_seed(seed, label.index() as u64));
        rng.shuffle(&mut members);
        for idx in members {
            assignment[idx] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignment,
    })
}

impl Dataset {
    pub fn stratified_folds(&self, k: usize, seed: u64) -> Result<FoldPlan> {
        stratified_folds(&self.labels(), k, seed)
    }
}
