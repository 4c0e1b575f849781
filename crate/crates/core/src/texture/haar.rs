//! Summed-area tables and Haar-like rectangle features.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::moments::FeatureVector;

/// Summed-area table with a zero guard row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    // (width + 1) * (height + 1), entry (x+1, y+1) = SAT(x, y)
    table: Vec<u64>,
}

impl IntegralImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of intensities over `[0..=x] × [0..=y]`.
    pub fn at(&self, x: usize, y: usize) -> u64 {
        self.table[(y + 1) * (self.width + 1) + x + 1]
    }

    /// Sum over the `w × h` rectangle with top-left corner `(x, y)`.
    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> u64 {
        let stride = self.width + 1;
        let (x1, y1) = (x + w, y + h);
        self.table[y1 * stride + x1] + self.table[y * stride + x]
            - self.table[y * stride + x1]
            - self.table[y1 * stride + x]
    }
}

pub fn integral_image(image: &GrayImage) -> IntegralImage {
    let (w, h) = (image.width(), image.height());
    let stride = w + 1;
    let mut table = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += u64::from(image.get(x, y));
            table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
        }
    }
    IntegralImage {
        width: w,
        height: h,
        table,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaarKind {
    /// Top half positive, bottom half negative.
    EdgeH,
    /// Left half positive, right half negative.
    EdgeV,
    /// Horizontal stripes in 1:2:1 proportion, outer positive.
    LineH,
    /// Vertical stripes in 1:2:1 proportion, outer positive.
    LineV,
    /// 2×2 checker, main diagonal positive.
    FourRect,
    /// 3×3 window positive with its center cell weighted −9.
    CenterSurround,
}

impl HaarKind {
    /// Cells per window side.
    fn cells(self) -> usize {
        match self {
            HaarKind::EdgeH | HaarKind::EdgeV | HaarKind::FourRect => 2,
            HaarKind::LineH | HaarKind::LineV => 4,
            HaarKind::CenterSurround => 3,
        }
    }

    /// Weighted rectangles `(x, y, w, h, weight)` relative to the window
    /// origin, for cell size `u`. Weights balance so a constant image gives 0.
    fn rects(self, u: usize) -> Vec<WeightedRect> {
        let r = |x, y, w, h, weight| WeightedRect { x, y, w, h, weight };
        match self {
            HaarKind::EdgeH => vec![r(0, 0, 2 * u, u, 1.0), r(0, u, 2 * u, u, -1.0)],
            HaarKind::EdgeV => vec![r(0, 0, u, 2 * u, 1.0), r(u, 0, u, 2 * u, -1.0)],
            HaarKind::LineH => vec![
                r(0, 0, 4 * u, u, 1.0),
                r(0, u, 4 * u, 2 * u, -1.0),
                r(0, 3 * u, 4 * u, u, 1.0),
            ],
            HaarKind::LineV => vec![
                r(0, 0, u, 4 * u, 1.0),
                r(u, 0, 2 * u, 4 * u, -1.0),
                r(3 * u, 0, u, 4 * u, 1.0),
            ],
            HaarKind::FourRect => vec![
                r(0, 0, u, u, 1.0),
                r(u, 0, u, u, -1.0),
                r(0, u, u, u, -1.0),
                r(u, u, u, u, 1.0),
            ],
            HaarKind::CenterSurround => vec![r(0, 0, 3 * u, 3 * u, 1.0), r(u, u, u, u, -9.0)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarTemplate {
    pub kind: HaarKind,
    /// Grid cell `(column, row)` of the window origin.
    pub anchor: (usize, usize),
    /// Window side as a fraction of the smaller image dimension.
    pub scale: f64,
}

/// A placed template: absolute rectangles plus the window area used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedTemplate {
    pub rects: Vec<WeightedRect>,
    pub window: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarBank {
    pub templates: Vec<HaarTemplate>,
    /// Anchors form a `grid × grid` lattice spanning the image.
    pub grid: usize,
}

impl Default for HaarBank {
    /// 5 kinds × 3 scales × 4×4 anchors = 240 templates.
    fn default() -> Self {
        Self::with_kinds(
            &[
                HaarKind::EdgeH,
                HaarKind::EdgeV,
                HaarKind::LineH,
                HaarKind::LineV,
                HaarKind::FourRect,
            ],
            &[0.125, 0.25, 0.5],
            4,
        )
    }
}

impl HaarBank {
    /// Every kind × scale × anchor combination, in that nesting order
    /// (anchors row-major).
    pub fn with_kinds(kinds: &[HaarKind], scales: &[f64], grid: usize) -> Self {
        let mut templates = Vec::with_capacity(kinds.len() * scales.len() * grid * grid);
        for &kind in kinds {
            for &scale in scales {
                for ay in 0..grid {
                    for ax in 0..grid {
                        templates.push(HaarTemplate {
                            kind,
                            anchor: (ax, ay),
                            scale,
                        });
                    }
                }
            }
        }
        Self { templates, grid }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Resolves every template to absolute rectangles for a `width × height` image.
    pub fn place(&self, width: usize, height: usize) -> Result<Vec<PlacedTemplate>> {
        if self.grid == 0 {
            return Err(Error::Bank("anchor grid must be at least 1x1".into()));
        }
        self.templates
            .iter()
            .map(|t| self.place_one(t, width, height))
            .collect()
    }

    fn place_one(&self, t: &HaarTemplate, width: usize, height: usize) -> Result<PlacedTemplate> {
        let (ax, ay) = t.anchor;
        if ax >= self.grid || ay >= self.grid {
            return Err(Error::Bank(format!(
                "anchor ({ax}, {ay}) outside the {0}x{0} grid",
                self.grid
            )));
        }
        if !(t.scale > 0.0 && t.scale <= 1.0) {
            return Err(Error::Bank(format!("scale {} outside (0, 1]", t.scale)));
        }
        let side = (width.min(height) as f64 * t.scale).floor() as usize;
        let cells = t.kind.cells();
        let u = side / cells;
        if u == 0 {
            return Err(Error::Bank(format!(
                "{:?} at scale {} does not fit a {width}x{height} image",
                t.kind, t.scale
            )));
        }
        let win = u * cells;
        let span = |extent: usize, a: usize| {
            if self.grid == 1 {
                0
            } else {
                a * (extent - win) / (self.grid - 1)
            }
        };
        let (x0, y0) = (span(width, ax), span(height, ay));
        let rects = t
            .kind
            .rects(u)
            .into_iter()
            .map(|r| WeightedRect {
                x: r.x + x0,
                y: r.y + y0,
                ..r
            })
            .collect::<Vec<_>>();
        if rects.iter().any(|r| r.x + r.w > width || r.y + r.h > height) {
            return Err(Error::Bank(format!("{:?} template leaves the image", t.kind)));
        }
        Ok(PlacedTemplate {
            rects,
            window: (x0, y0, win),
        })
    }
}

/// `sum(weight * rectangle sum) / window area`, intensities scaled to `[0, 1]`.
pub fn haar_features(image: &GrayImage, bank: &HaarBank) -> Result<FeatureVector> {
    let placed = bank.place(image.width(), image.height())?;
    let sat = integral_image(image);
    let values = placed
        .iter()
        .map(|p| {
            let area = (p.window.2 * p.window.2) as f64;
            let acc: f64 = p
                .rects
                .iter()
                .map(|r| r.weight * sat.rect_sum(r.x, r.y, r.w, r.h) as f64)
                .sum();
            acc / (255.0 * area)
        })
        .collect();
    FeatureVector::new("haar", values)
}
