//! Greedy CART with Gini impurity.

use super::{majority, ClassifierSpec, Matrix};
use crate::error::{Error, Result};
use crate::ingestion::Label;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: Label,
        /// Training rows reaching this leaf, indexed by [`Label::index`].
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    n_features: usize,
    nodes: Vec<Node>,
}

impl TreeModel {
    pub(crate) fn from_nodes(n_features: usize, nodes: Vec<Node>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Model("tree has no nodes".into()));
        }
        for node in &nodes {
            if let Node::Split {
                feature,
                left,
                right,
                ..
            } = *node
            {
                if feature >= n_features || left >= n || right >= n {
                    return Err(Error::Model("split refers to a missing node or feature".into()));
                }
            }
        }
        Ok(Self { n_features, nodes })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { label, .. } => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Trains a tree on all rows.
///
/// At every node the candidate features are either all columns or, when
/// `feature_subset` is given, that many distinct columns drawn from `rng`.
/// Thresholds are midpoints between consecutive distinct values. The split
/// with the lowest weighted Gini impurity wins; equal scores keep the lowest
/// feature index and then the lowest threshold. A node becomes a leaf when it
/// is pure, when `max_depth` is reached, or when no threshold leaves
/// `min_leaf` rows on both sides.
pub fn train_tree(
    x: &Matrix,
    y: &[Label],
    spec: &ClassifierSpec,
    feature_subset: Option<usize>,
    rng: &mut SplitMix64,
) -> Result<TreeModel> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    train_tree_on(x, y, &rows, spec, feature_subset, rng)
}

pub(crate) fn train_tree_on(
    x: &Matrix,
    y: &[Label],
    rows: &[usize],
    spec: &ClassifierSpec,
    feature_subset: Option<usize>,
    rng: &mut SplitMix64,
) -> Result<TreeModel> {
    if x.rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if rows.is_empty() || x.cols() == 0 {
        return Err(Error::Training("cannot grow a tree on empty input".into()));
    }
    let min_leaf = spec.min_leaf.max(1);
    let mut nodes: Vec<Node> = Vec::new();
    // (node slot, rows, depth); depth-first, left child first
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows.to_vec(), 0)];
    nodes.push(Node::Leaf {
        label: Label::Normal,
        counts: [0, 0],
    });
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(rows.len());

    while let Some((slot, members, depth)) = stack.pop() {
        let counts = class_counts(y, &members);
        let leaf = Node::Leaf {
            label: majority(counts[0], counts[1]),
            counts,
        };
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = spec.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || members.len() < 2 * min_leaf {
            nodes[slot] = leaf;
            continue;
        }

        let features: Vec<usize> = match feature_subset {
            Some(m) if m < x.cols() => rng.sample_indices(x.cols(), m.max(1)),
            _ => (0..x.cols()).collect(),
        };
        let Some((feature, threshold)) = best_split(x, y, &members, &features, counts, min_leaf, &mut order)
        else {
            nodes[slot] = leaf;
            continue;
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            members.iter().partition(|&&r| x.get(r, feature) <= threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf {
            label: Label::Normal,
            counts: [0, 0],
        });
        nodes.push(Node::Leaf {
            label: Label::Normal,
            counts: [0, 0],
        });
        nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        stack.push((right, right_rows, depth + 1));
        stack.push((left, left_rows, depth + 1));
    }
    TreeModel::from_nodes(x.cols(), nodes)
}

fn class_counts(y: &[Label], rows: &[usize]) -> [usize; 2] {
    let mut c = [0, 0];
    for &r in rows {
        c[y[r].index()] += 1;
    }
    c
}

/// Unnormalized Gini: `n * (1 - sum p_c^2)`.
#[inline]
fn gini_mass(c: [usize; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (c[0] as f64, c[1] as f64);
    n - (a * a + b * b) / n
}

fn best_split(
    x: &Matrix,
    y: &[Label],
    rows: &[usize],
    features: &[usize],
    totals: [usize; 2],
    min_leaf: usize,
    order: &mut Vec<(f64, usize)>,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut best: Option<(f64, usize, f64)> = None;
    for &f in features {
        order.clear();
        order.extend(rows.iter().map(|&r| (x.get(r, f), r)));
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0usize, 0usize];
        for k in 0..n - 1 {
            left[y[order[k].1].index()] += 1;
            let (v, next) = (order[k].0, order[k + 1].0);
            if v == next {
                continue;
            }
            let n_left = k + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let right = [totals[0] - left[0], totals[1] - left[1]];
            let score = gini_mass(left) + gini_mass(right);
            if best.is_none_or(|(s, _, _)| score < s) {
                let mut t = v + (next - v) / 2.0;
                if t >= next {
                    t = v;
                }
                best = Some((score, f, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}
