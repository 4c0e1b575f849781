use super::Matrix;
use crate::error::{Error, Result};

/// Per-column standardization fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance columns store 1.
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(train: &Matrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::Shape("cannot fit a scaler on zero rows".into()));
        }
        let n = train.rows() as f64;
        let cols = train.cols();
        let mut mean = vec![0.0; cols];
        for i in 0..train.rows() {
            for (m, v) in mean.iter_mut().zip(train.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; cols];
        for i in 0..train.rows() {
            for ((s, v), m) in var.iter_mut().zip(train.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} columns, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        Ok(x.map_rows(|row, out| {
            out.extend(
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.std)
                    .map(|((v, m), s)| (v - m) / s),
            )
        }))
    }
}

/// Standardizes `train` and `test` with statistics of `train` only.
pub fn standardize(train: &Matrix, test: &Matrix) -> Result<(Matrix, Matrix, Scaler)> {
    if train.cols() != test.cols() {
        return Err(Error::Shape(format!(
            "train has {} columns, test has {}",
            train.cols(),
            test.cols()
        )));
    }
    let scaler = Scaler::fit(train)?;
    Ok((scaler.transform(train)?, scaler.transform(test)?, scaler))
}
