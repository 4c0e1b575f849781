//! Binary model container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "HFM1"  u32 version  u8 kind  u32 n_features
//! u8 has_scaler  [f64 mean, f64 std] * n_features
//! body
//! ```
//!
//! `kind` is 0 tree, 1 forest, 2 kNN, 3 SVM. A tree is `u32 node count`
//! followed by nodes, each `u8 0, u32 feature, f64 threshold, u32 left,
//! u32 right` or `u8 1, u8 label, u64 normal, u64 abnormal`. A forest is
//! `u32 trees` then `u64 seed` and a tree for each. kNN stores `u32 k,
//! u32 rows`, the row-major data and one `u8` label per row. The SVM stores
//! `f64 gamma, f64 bias, u8 converged, u32 n_sv`, then per support vector
//! `u32 index, f64 coef` and its features.

use std::io::{Read, Write};

use super::{Classifier, ForestModel, KnnModel, Matrix, Model, Node, Scaler, SvmModel, TreeModel};
use crate::error::{Error, Result};
use crate::ingestion::Label;

pub const MODEL_MAGIC: &[u8; 4] = b"HFM1";
pub const MODEL_VERSION: u32 = 1;

fn model_err(e: std::io::Error) -> Error {
    Error::Model(e.to_string())
}

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.0.write_all(b).map_err(model_err)
    }
    fn u8(&mut self, v: u8) -> Result<()> {
        self.bytes(&[v])
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::Model(format!("{v} does not fit in u32")))?;
        self.bytes(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(model_err)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn label(&mut self) -> Result<Label> {
        match self.u8()? {
            0 => Ok(Label::Normal),
            1 => Ok(Label::Abnormal),
            t => Err(Error::Model(format!("bad label tag {t}"))),
        }
    }
    /// Length prefix bounded by what a sane model could hold.
    fn len(&mut self, limit: usize) -> Result<usize> {
        let n = self.u32()?;
        if n > limit {
            return Err(Error::Model(format!("length {n} exceeds {limit}")));
        }
        Ok(n)
    }
}

const MAX_LEN: usize = 1 << 28;

fn label_tag(l: Label) -> u8 {
    l.index() as u8
}

fn write_tree<W: Write>(w: &mut Writer<W>, t: &TreeModel) -> Result<()> {
    w.u32(t.nodes().len())?;
    for node in t.nodes() {
        match *node {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                w.u8(0)?;
                w.u32(feature)?;
                w.f64(threshold)?;
                w.u32(left)?;
                w.u32(right)?;
            }
            Node::Leaf { label, counts } => {
                w.u8(1)?;
                w.u8(label_tag(label))?;
                w.u64(counts[0] as u64)?;
                w.u64(counts[1] as u64)?;
            }
        }
    }
    Ok(())
}

fn read_tree<R: Read>(r: &mut Reader<R>, n_features: usize) -> Result<TreeModel> {
    let n = r.len(MAX_LEN)?;
    let mut nodes = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let node = match r.u8()? {
            0 => Node::Split {
                feature: r.u32()?,
                threshold: r.f64()?,
                left: r.u32()?,
                right: r.u32()?,
            },
            1 => Node::Leaf {
                label: r.label()?,
                counts: [r.u64()? as usize, r.u64()? as usize],
            },
            t => return Err(Error::Model(format!("bad node tag {t}"))),
        };
        nodes.push(node);
    }
    TreeModel::from_nodes(n_features, nodes)
}

/// Serializes a fitted classifier, scaler included.
pub fn write_model<W: Write>(out: W, clf: &Classifier) -> Result<()> {
    let mut w = Writer(out);
    let n_features = clf.model.n_features();
    w.bytes(MODEL_MAGIC)?;
    w.bytes(&MODEL_VERSION.to_le_bytes())?;
    let kind = match clf.model {
        Model::Tree(_) => 0,
        Model::Forest(_) => 1,
        Model::Knn(_) => 2,
        Model::Svm(_) => 3,
    };
    w.u8(kind)?;
    w.u32(n_features)?;
    match &clf.scaler {
        Some(s) => {
            w.u8(1)?;
            for (m, sd) in s.mean.iter().zip(&s.std) {
                w.f64(*m)?;
                w.f64(*sd)?;
            }
        }
        None => w.u8(0)?,
    }
    match &clf.model {
        Model::Tree(t) => write_tree(&mut w, t)?,
        Model::Forest(f) => {
            w.u32(f.trees().len())?;
            for (t, &seed) in f.trees().iter().zip(f.seeds()) {
                w.u64(seed)?;
                write_tree(&mut w, t)?;
            }
        }
        Model::Knn(k) => {
            w.u32(k.k())?;
            w.u32(k.train_x().rows())?;
            for &v in k.train_x().data() {
                w.f64(v)?;
            }
            for &l in k.train_y() {
                w.u8(label_tag(l))?;
            }
        }
        Model::Svm(s) => {
            w.f64(s.gamma)?;
            w.f64(s.bias)?;
            w.u8(s.converged as u8)?;
            let sv = s.support_vectors();
            w.u32(sv.rows())?;
            for i in 0..sv.rows() {
                w.u32(s.support_indices()[i])?;
                w.f64(s.coefficients()[i])?;
                for &v in sv.row(i) {
                    w.f64(v)?;
                }
            }
        }
    }
    w.0.flush().map_err(model_err)
}

pub fn read_model<R: Read>(input: R) -> Result<Classifier> {
    let mut r = Reader(input);
    if &r.array::<4>()? != MODEL_MAGIC {
        return Err(Error::Model("not a model file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(r.array()?);
    if version != MODEL_VERSION {
        return Err(Error::Model(format!("unsupported model version {version}")));
    }
    let kind = r.u8()?;
    let n_features = r.len(MAX_LEN)?;
    let scaler = match r.u8()? {
        0 => None,
        1 => {
            let mut mean = Vec::with_capacity(n_features);
            let mut std = Vec::with_capacity(n_features);
            for _ in 0..n_features {
                mean.push(r.f64()?);
                std.push(r.f64()?);
            }
            Some(Scaler { mean, std })
        }
        t => return Err(Error::Model(format!("bad scaler flag {t}"))),
    };
    let model = match kind {
        0 => Model::Tree(read_tree(&mut r, n_features)?),
        1 => {
            let n = r.len(MAX_LEN)?;
            let mut trees = Vec::with_capacity(n.min(1 << 16));
            let mut seeds = Vec::with_capacity(n.min(1 << 16));
            for _ in 0..n {
                seeds.push(r.u64()?);
                trees.push(read_tree(&mut r, n_features)?);
            }
            Model::Forest(ForestModel::from_parts(n_features, trees, seeds)?)
        }
        2 => {
            let k = r.u32()?;
            let rows = r.len(MAX_LEN)?;
            let total = rows
                .checked_mul(n_features)
                .filter(|&t| t <= MAX_LEN)
                .ok_or_else(|| Error::Model("kNN table too large".into()))?;
            let mut data = Vec::with_capacity(total);
            for _ in 0..total {
                data.push(r.f64()?);
            }
            let mut y = Vec::with_capacity(rows);
            for _ in 0..rows {
                y.push(r.label()?);
            }
            let x = Matrix::new(rows, n_features, data)?;
            Model::Knn(KnnModel::fit(&x, &y, k)?)
        }
        3 => {
            let gamma = r.f64()?;
            let bias = r.f64()?;
            let converged = r.u8()? != 0;
            let n = r.len(MAX_LEN)?;
            let mut idx = Vec::with_capacity(n.min(1 << 16));
            let mut coef = Vec::with_capacity(n.min(1 << 16));
            let mut data = Vec::new();
            for _ in 0..n {
                idx.push(r.u32()?);
                coef.push(r.f64()?);
                for _ in 0..n_features {
                    data.push(r.f64()?);
                }
            }
            let sv = Matrix::new(n, n_features, data)?;
            Model::Svm(SvmModel::from_parts(sv, coef, idx, bias, gamma, converged)?)
        }
        t => return Err(Error::Model(format!("unknown model kind {t}"))),
    };
    if let Some(s) = &scaler {
        if s.mean.len() != model.n_features() {
            return Err(Error::Model("scaler width differs from model".into()));
        }
    }
    let mut probe = [0u8; 1];
    if r.0.read(&mut probe).map_err(model_err)? != 0 {
        return Err(Error::Model("trailing bytes after model".into()));
    }
    Ok(Classifier { scaler, model })
}
