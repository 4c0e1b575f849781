//! Brute-force reference implementations shared by the integration tests
//! and the acceptance runner. Nothing here calls into the code under test
//! except for plain data types.

#![allow(dead_code)]

use histofeat::classifiers::Matrix;
use histofeat::evaluation::ConfusionMatrix;
use histofeat::image::GrayImage;
use histofeat::ingestion::Label;
use histofeat::rng::SplitMix64;
use histofeat::texture::haar::PlacedTemplate;

pub fn random_image(rng: &mut SplitMix64, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.below(256) as u8).unwrap()
}

pub fn rotations(img: &GrayImage) -> [GrayImage; 3] {
    let r1 = img.rotate90();
    let r2 = r1.rotate90();
    let r3 = r2.rotate90();
    [r1, r2, r3]
}

// ---------------------------------------------------------------- texture

/// Symmetric normalized co-occurrences by checking every ordered pixel pair.
pub fn naive_glcm(bins: &[usize], w: usize, h: usize, levels: usize, dx: isize, dy: isize) -> Vec<f64> {
    let mut counts = vec![0.0; levels * levels];
    let pos = |k: usize| ((k % w) as isize, (k / w) as isize);
    for a in 0..w * h {
        for b in 0..w * h {
            let (ax, ay) = pos(a);
            let (bx, by) = pos(b);
            if bx - ax == dx && by - ay == dy {
                counts[bins[a] * levels + bins[b]] += 1.0;
                counts[bins[b] * levels + bins[a]] += 1.0;
            }
        }
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

fn h_bits(ps: impl Iterator<Item = f64>) -> f64 {
    -ps.filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>() / std::f64::consts::LN_2
}

/// The thirteen Haralick statistics written directly from their definitions.
pub fn haralick_oracle(p: &[f64], n: usize) -> [f64; 13] {
    let at = |i: usize, j: usize| p[i * n + j];
    let cells = || (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)));
    let px: Vec<f64> = (0..n).map(|i| (0..n).map(|j| at(i, j)).sum()).collect();
    let py: Vec<f64> = (0..n).map(|j| (0..n).map(|i| at(i, j)).sum()).collect();
    let mx: f64 = cells().map(|(i, j)| i as f64 * at(i, j)).sum();
    let my: f64 = cells().map(|(i, j)| j as f64 * at(i, j)).sum();
    let sx = cells().map(|(i, j)| (i as f64 - mx).powi(2) * at(i, j)).sum::<f64>().sqrt();
    let sy = cells().map(|(i, j)| (j as f64 - my).powi(2) * at(i, j)).sum::<f64>().sqrt();

    let energy = cells().map(|(i, j)| at(i, j).powi(2)).sum();
    let correlation = if sx > 0.0 && sy > 0.0 {
        cells()
            .map(|(i, j)| (i as f64 - mx) * (j as f64 - my) * at(i, j))
            .sum::<f64>()
            / (sx * sy)
    } else {
        0.0
    };
    let inertia = cells().map(|(i, j)| (i as f64 - j as f64).powi(2) * at(i, j)).sum();
    let hxy = h_bits(cells().map(|(i, j)| at(i, j)));
    let idm = cells()
        .map(|(i, j)| at(i, j) / (1.0 + (i as f64 - j as f64).powi(2)))
        .sum();
    let sum_avg: f64 = cells().map(|(i, j)| (i + j) as f64 * at(i, j)).sum();
    let sum_var = cells()
        .map(|(i, j)| ((i + j) as f64 - sum_avg).powi(2) * at(i, j))
        .sum();
    let p_sum = (0..2 * n - 1).map(|k| cells().filter(|&(i, j)| i + j == k).map(|(i, j)| at(i, j)).sum::<f64>());
    let sum_ent = h_bits(p_sum);
    let diff_avg: f64 = cells().map(|(i, j)| i.abs_diff(j) as f64 * at(i, j)).sum();
    let diff_var = cells()
        .map(|(i, j)| (i.abs_diff(j) as f64 - diff_avg).powi(2) * at(i, j))
        .sum();
    let p_diff = (0..n).map(|k| cells().filter(|&(i, j)| i.abs_diff(j) == k).map(|(i, j)| at(i, j)).sum::<f64>());
    let diff_ent = h_bits(p_diff);
    let hx = h_bits(px.iter().copied());
    let hy = h_bits(py.iter().copied());
    let log2 = |v: f64| v.ln() / std::f64::consts::LN_2;
    let hxy1 = -cells()
        .filter(|&(i, j)| px[i] * py[j] > 0.0)
        .map(|(i, j)| at(i, j) * log2(px[i] * py[j]))
        .sum::<f64>();
    let hxy2 = -cells()
        .filter(|&(i, j)| px[i] * py[j] > 0.0)
        .map(|(i, j)| px[i] * py[j] * log2(px[i] * py[j]))
        .sum::<f64>();
    let imc1 = if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 };
    let inner = 1.0 - (-2.0 * (hxy2 - hxy)).exp();
    let imc2 = if inner > 0.0 { inner.sqrt() } else { 0.0 };
    [
        energy, correlation, inertia, hxy, idm, sum_avg, sum_var, sum_ent, diff_avg, diff_var,
        diff_ent, imc1, imc2,
    ]
}

/// Autocorrelogram by visiting every pixel pair.
pub fn naive_autocorrelogram(img: &GrayImage, distances: &[usize], levels: usize) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let bin = |x: usize, y: usize| usize::from(img.get(x, y)) * levels / 256;
    let mut out = Vec::new();
    for &d in distances {
        let mut same = vec![0u64; levels];
        let mut total = vec![0u64; levels];
        for py in 0..h {
            for px in 0..w {
                for qy in 0..h {
                    for qx in 0..w {
                        if px.abs_diff(qx).max(py.abs_diff(qy)) != d {
                            continue;
                        }
                        let c = bin(px, py);
                        total[c] += 1;
                        if bin(qx, qy) == c {
                            same[c] += 1;
                        }
                    }
                }
            }
        }
        out.extend((0..levels).map(|c| if total[c] == 0 { 0.0 } else { same[c] as f64 / total[c] as f64 }));
    }
    out
}

/// Haar response by summing pixels one at a time.
pub fn naive_haar(img: &GrayImage, t: &PlacedTemplate) -> f64 {
    let mut acc = 0.0;
    for r in &t.rects {
        let mut s = 0.0;
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                s += f64::from(img.get(x, y));
            }
        }
        acc += r.weight * s;
    }
    acc / (255.0 * (t.window.2 * t.window.2) as f64)
}

// ---------------------------------------------------------------- moments

/// Closed-form Chebyshev (first kind) polynomials up to degree 6.
pub fn cheb1_closed(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => 2.0 * x.powi(2) - 1.0,
        3 => 4.0 * x.powi(3) - 3.0 * x,
        4 => 8.0 * x.powi(4) - 8.0 * x.powi(2) + 1.0,
        5 => 16.0 * x.powi(5) - 20.0 * x.powi(3) + 5.0 * x,
        6 => 32.0 * x.powi(6) - 48.0 * x.powi(4) + 18.0 * x.powi(2) - 1.0,
        _ => unimplemented!(),
    }
}

/// Closed-form Chebyshev (second kind) polynomials up to degree 6.
pub fn cheb2_closed(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        2 => 4.0 * x.powi(2) - 1.0,
        3 => 8.0 * x.powi(3) - 4.0 * x,
        4 => 16.0 * x.powi(4) - 12.0 * x.powi(2) + 1.0,
        5 => 32.0 * x.powi(5) - 32.0 * x.powi(3) + 6.0 * x,
        6 => 64.0 * x.powi(6) - 80.0 * x.powi(4) + 24.0 * x.powi(2) - 1.0,
        _ => unimplemented!(),
    }
}

/// Closed-form Legendre polynomials up to degree 6.
pub fn legendre_closed(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => (3.0 * x.powi(2) - 1.0) / 2.0,
        3 => (5.0 * x.powi(3) - 3.0 * x) / 2.0,
        4 => (35.0 * x.powi(4) - 30.0 * x.powi(2) + 3.0) / 8.0,
        5 => (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0,
        6 => (231.0 * x.powi(6) - 315.0 * x.powi(4) + 105.0 * x.powi(2) - 5.0) / 16.0,
        _ => unimplemented!(),
    }
}

/// `sum_x sum_y B_p(x) B_q(y) f(x, y) / (W H)`, row-major in `(p, q)`.
pub fn direct_moments(img: &GrayImage, order: usize, poly: fn(usize, f64) -> f64, legendre: bool) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let coord = |i: usize, n: usize| (2.0 * i as f64 + 1.0 - n as f64) / n as f64;
    let mut out = Vec::new();
    for p in 0..=order {
        for q in 0..=order {
            let mut s = 0.0;
            for y in 0..h {
                for x in 0..w {
                    s += poly(p, coord(x, w)) * poly(q, coord(y, h)) * f64::from(img.get(x, y)) / 255.0;
                }
            }
            let mut m = s / (w * h) as f64;
            if legendre {
                m *= (2 * p + 1) as f64 * (2 * q + 1) as f64 / 4.0;
            }
            out.push(m);
        }
    }
    out
}

/// Explicit Zernike radial polynomials for `n <= 5`.
pub fn zernike_radial_closed(n: usize, m: usize, r: f64) -> f64 {
    match (n, m) {
        (0, 0) => 1.0,
        (1, 1) => r,
        (2, 0) => 2.0 * r.powi(2) - 1.0,
        (2, 2) => r.powi(2),
        (3, 1) => 3.0 * r.powi(3) - 2.0 * r,
        (3, 3) => r.powi(3),
        (4, 0) => 6.0 * r.powi(4) - 6.0 * r.powi(2) + 1.0,
        (4, 2) => 4.0 * r.powi(4) - 3.0 * r.powi(2),
        (4, 4) => r.powi(4),
        (5, 1) => 10.0 * r.powi(5) - 12.0 * r.powi(3) + 3.0 * r,
        (5, 3) => 5.0 * r.powi(5) - 4.0 * r.powi(3),
        (5, 5) => r.powi(5),
        _ => unimplemented!(),
    }
}

/// `|Z_nm|` from a per-pixel complex sum over the inscribed disk.
pub fn zernike_oracle(img: &GrayImage, n: usize, m: usize) -> f64 {
    let (w, h) = (img.width(), img.height());
    let half = w.min(h) as f64 / 2.0;
    let (mut re, mut im) = (0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let u = (x as f64 + 0.5 - w as f64 / 2.0) / half;
            let v = (h as f64 / 2.0 - y as f64 - 0.5) / half;
            let (dx, dy) = (2 * x as i64 + 1 - w as i64, h as i64 - 2 * y as i64 - 1);
            if dx * dx + dy * dy > (w.min(h) as i64).pow(2) {
                continue;
            }
            let r = u.hypot(v).min(1.0);
            let theta = v.atan2(u);
            let f = f64::from(img.get(x, y)) / 255.0;
            let radial = zernike_radial_closed(n, m, r);
            re += f * radial * (m as f64 * theta).cos();
            im -= f * radial * (m as f64 * theta).sin();
        }
    }
    let scale = (n as f64 + 1.0) / std::f64::consts::PI / (half * half);
    (re * scale).hypot(im * scale)
}

// ---------------------------------------------------------------- metrics

/// Metrics in the order A, P, R, S, F1, MCC, BACC, from count identities.
pub fn metrics_oracle(cm: &ConfusionMatrix) -> [f64; 7] {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let n = tp + fp + fn_ + tn;
    let safe = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let a = (tp + tn) / n;
    let p = safe(tp, tp + fp);
    let r = safe(tp, tp + fn_);
    let s = safe(tn, tn + fp);
    let f1 = safe(2.0 * tp, 2.0 * tp + fp + fn_);
    let all_margins = tp + fp > 0.0 && tp + fn_ > 0.0 && tn + fp > 0.0 && tn + fn_ > 0.0;
    let mcc = if all_margins {
        // geometric-mean identity for the phi coefficient
        let npv = tn / (tn + fn_);
        let (fdr, fnr, fpr, fo) = (1.0 - p, 1.0 - r, 1.0 - s, 1.0 - npv);
        (p * r * s * npv).sqrt() - (fdr * fnr * fpr * fo).sqrt()
    } else {
        0.0
    };
    [a, p, r, s, f1, mcc, (r + s) / 2.0]
}

// ---------------------------------------------------------------- learners

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    (-gamma * a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>()).exp()
}

pub fn dual_value(x: &Matrix, y: &[f64], alpha: &[f64], gamma: f64) -> f64 {
    let n = x.rows();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf(gamma, x.row(i), x.row(j));
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, y^T a = 0}` by bisection on
/// the multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(&vi, &yi)| (vi - lambda * yi).clamp(0.0, c))
            .collect()
    };
    let g = |lambda: f64| at(lambda).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>();
    let bound = v.iter().map(|t| t.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Maximizes the SVM dual by accelerated projected gradient ascent.
pub fn dual_oracle(x: &Matrix, y: &[f64], c: f64, gamma: f64) -> (Vec<f64>, f64) {
    let n = x.rows();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * rbf(gamma, x.row(i), x.row(j))).collect())
        .collect();
    // Q is PSD with unit diagonal, so its largest eigenvalue is at most n
    let step = 1.0 / n as f64;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())
            .collect();
        let next = project(
            &z.iter().zip(&grad).map(|(zi, gi)| zi + step * gi).collect::<Vec<_>>(),
            y,
            c,
        );
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next
            .iter()
            .zip(&a)
            .map(|(nv, ov)| nv + (t - 1.0) / t_next * (nv - ov))
            .collect();
        a = next;
        t = t_next;
    }
    let value = dual_value(x, y, &a, gamma);
    (a, value)
}

/// kNN by sorting every training row by `(distance, index)`.
pub fn knn_oracle(x: &Matrix, y: &[Label], q: &[f64], k: usize) -> Label {
    let mut order: Vec<(f64, usize)> = (0..x.rows())
        .map(|i| (x.row(i).iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
        .collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let abnormal = order[..k].iter().filter(|&&(_, i)| y[i] == Label::Abnormal).count();
    if abnormal * 2 > k {
        Label::Abnormal
    } else {
        Label::Normal
    }
}

/// Two isotropic Gaussian blobs `sep` standard deviations apart, Normal first.
pub fn blobs(n: usize, sep: f64, seed: u64) -> (Matrix, Vec<Label>) {
    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i < n / 2 { Label::Normal } else { Label::Abnormal };
        let cx = if label == Label::Normal { 0.0 } else { sep };
        rows.push([cx + rng.next_gaussian(), rng.next_gaussian()]);
        labels.push(label);
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

// ---------------------------------------------------------------- images

/// High-frequency texture: noisy fine checkerboard.
pub fn textured_tile(rng: &mut SplitMix64, side: usize) -> GrayImage {
    let period = 1 + rng.below(3) as usize;
    GrayImage::from_fn(side, side, |x, y| {
        let base = if ((x / period) + (y / period)) % 2 == 0 { 60 } else { 190 };
        (base + rng.below(50) as i32 - 25) as u8
    })
    .unwrap()
}

/// Smooth linear gradient in a random direction.
pub fn gradient_tile(rng: &mut SplitMix64, side: usize) -> GrayImage {
    let angle = rng.next_f64() * std::f64::consts::TAU;
    let (c, s) = (angle.cos(), angle.sin());
    let lo = 40.0 + rng.next_f64() * 60.0;
    let span = 80.0 + rng.next_f64() * 80.0;
    GrayImage::from_fn(side, side, |x, y| {
        let u = (x as f64 - side as f64 / 2.0) * c + (y as f64 - side as f64 / 2.0) * s;
        let t = (u / side as f64 + 0.75) / 1.5;
        (lo + span * t.clamp(0.0, 1.0)).round() as u8
    })
    .unwrap()
}

pub fn save_png(img: &GrayImage, path: &std::path::Path) {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .unwrap();
    buf.save(path).unwrap();
}

/// `<dir>/normal/*.png` textured and `<dir>/abnormal/*.png` smooth tiles.
pub fn write_synthetic_dataset(dir: &std::path::Path, per_class: usize, side: usize, seed: u64) {
    let mut rng = SplitMix64::new(seed);
    for (sub, textured) in [("normal", true), ("abnormal", false)] {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).unwrap();
        for i in 0..per_class {
            let img = if textured {
                textured_tile(&mut rng, side)
            } else {
                gradient_tile(&mut rng, side)
            };
            save_png(&img, &d.join(format!("{sub}_{i:03}.png")));
        }
    }
}
