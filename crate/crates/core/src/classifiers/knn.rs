//! Brute-force k-nearest-neighbor voting.

use rayon::prelude::*;

use super::{majority, Matrix};
use crate::error::{Error, Result};
use crate::ingestion::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    x: Matrix,
    y: Vec<Label>,
    k: usize,
}

impl KnnModel {
    pub fn fit(x: &Matrix, y: &[Label], k: usize) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if k == 0 || k > x.rows() {
            return Err(Error::Config(format!(
                "k = {k} needs between 1 and {} training rows",
                x.rows()
            )));
        }
        Ok(Self {
            x: x.clone(),
            y: y.to_vec(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn train_x(&self) -> &Matrix {
        &self.x
    }

    pub fn train_y(&self) -> &[Label] {
        &self.y
    }

    /// Euclidean neighbors; equal distances prefer the lower training index.
    pub fn predict_row(&self, q: &[f64]) -> Label {
        let mut dist: Vec<(f64, usize)> = (0..self.x.rows())
            .map(|i| {
                let d: f64 = self.x.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_dist);
        }
        let mut votes = [0usize; 2];
        for &(_, i) in &dist[..self.k] {
            votes[self.y[i].index()] += 1;
        }
        majority(votes[0], votes[1])
    }

    pub(crate) fn predict_matrix(&self, q: &Matrix) -> Vec<Label> {
        (0..q.rows())
            .into_par_iter()
            .map(|i| self.predict_row(q.row(i)))
            .collect()
    }
}

pub fn knn_predict(train_x: &Matrix, train_y: &[Label], queries: &Matrix, k: usize) -> Result<Vec<Label>> {
    let model = KnnModel::fit(train_x, train_y, k)?;
    if queries.cols() != train_x.cols() {
        return Err(Error::Shape(format!(
            "queries have {} columns, training data {}",
            queries.cols(),
            train_x.cols()
        )));
    }
    Ok(model.predict_matrix(queries))
}
