//! Affinity graphs and graph-embedding objective matrices for supervised
//! LPP and LSDA.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Same-class edge weighting for supervised LPP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heat {
    /// Unit weight on every same-class pair.
    Binary,
    /// `exp(-‖zᵢ - zⱼ‖² / t)`; `None` selects t as the mean squared
    /// pairwise distance of the training set.
    Kernel(Option<f64>),
}

impl Default for Heat {
    fn default() -> Self {
        Heat::Kernel(None)
    }
}

impl std::fmt::Display for Heat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Heat::Binary => f.write_str("binary"),
            Heat::Kernel(None) => f.write_str("auto"),
            Heat::Kernel(Some(t)) => write!(f, "{t}"),
        }
    }
}

impl std::str::FromStr for Heat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "binary" => Ok(Heat::Binary),
            "auto" => Ok(Heat::Kernel(None)),
            other => match other.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Ok(Heat::Kernel(Some(t))),
                _ => Err(format!("expected binary|auto|<positive real>, got {other:?}")),
            },
        }
    }
}

/// Squared Euclidean distances between the columns of `x`.
pub fn pairwise_sq_dists(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.ncols();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (x.column(i) - x.column(j)).norm_squared();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Mean squared pairwise distance over all unordered pairs.
pub fn mean_sq_dist(d: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += d[(i, j)];
        }
    }
    acc / (n * (n - 1) / 2).max(1) as f64
}

/// Supervised affinity: nonzero only between distinct samples sharing a label.
pub fn supervised_affinity(labels: &[usize], dists: &DMatrix<f64>, heat: Heat) -> DMatrix<f64> {
    let n = labels.len();
    let t = match heat {
        Heat::Kernel(Some(t)) => t,
        Heat::Kernel(None) => {
            let m = mean_sq_dist(dists);
            if m > 0.0 { m } else { 1.0 }
        }
        Heat::Binary => 1.0,
    };
    DMatrix::from_fn(n, n, |i, j| {
        if i == j || labels[i] != labels[j] {
            0.0
        } else {
            match heat {
                Heat::Binary => 1.0,
                Heat::Kernel(_) => (-dists[(i, j)] / t).exp(),
            }
        }
    })
}

pub fn degree(w: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&w.column_sum())
}

pub fn laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    degree(w) - w
}

/// Indices of the `k` nearest other samples of each sample; distance ties
/// resolve to the lower index.
pub fn knn(dists: &DMatrix<f64>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = dists.nrows();
    if k == 0 || k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    Ok((0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dists[(i, a)].total_cmp(&dists[(i, b)]).then(a.cmp(&b)));
            others.truncate(k);
            others
        })
        .collect())
}

/// Within-class and between-class adjacency of the symmetrized kNN graph.
pub fn lsda_graphs(labels: &[usize], neighbours: &[Vec<usize>]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = labels.len();
    let mut within = DMatrix::zeros(n, n);
    let mut between = DMatrix::zeros(n, n);
    for (i, nbrs) in neighbours.iter().enumerate() {
        for &j in nbrs {
            let target = if labels[i] == labels[j] {
                &mut within
            } else {
                &mut between
            };
            target[(i, j)] = 1.0;
            target[(j, i)] = 1.0;
        }
    }
    (within, between)
}

/// `(A, B)` of a graph-embedding problem in the coordinates of `y`
/// (features as rows, samples as columns).
#[derive(Debug, Clone)]
pub struct Objective {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// sLPP: `A = Y L Yᵀ` (minimized), `B = Y D Yᵀ`.
pub fn slpp_objective(y: &DMatrix<f64>, w: &DMatrix<f64>) -> Objective {
    Objective {
        a: y * laplacian(w) * y.transpose(),
        b: y * degree(w) * y.transpose(),
    }
}

/// LSDA: `A = Y (α L_b + (1-α) W_w) Yᵀ` (maximized), `B = Y D_w Yᵀ`.
pub fn lsda_objective(y: &DMatrix<f64>, within: &DMatrix<f64>, between: &DMatrix<f64>, alpha: f64) -> Objective {
    let mid = laplacian(between) * alpha + within * (1.0 - alpha);
    Objective {
        a: y * mid * y.transpose(),
        b: y * degree(within) * y.transpose(),
    }
}
