//! Dense symmetric and symmetric-definite eigen-solvers.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
}

/// Solution of `A v = λ B v`.
#[derive(Debug, Clone)]
pub struct GenEig {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, B-orthonormal.
    pub vectors: DMatrix<f64>,
    /// Ridge added to `B` before factorization (0 when none was needed).
    pub regularization: f64,
}

impl GenEig {
    /// Largest residual `‖A v - λ (B + εI) v‖` over the returned pairs.
    pub fn max_residual(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let b_reg = regularized(b, self.regularization);
        (0..self.values.len())
            .map(|i| {
                let v = self.vectors.column(i);
                (a * v - (&b_reg * v) * self.values[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 10_000;
/// Relative pivot floor below which `B` is treated as numerically singular.
const PIVOT_FLOOR: f64 = 1e-12;

fn regularized(b: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let mut out = b.clone();
    if eps > 0.0 {
        for i in 0..out.nrows() {
            out[(i, i)] += eps;
        }
    }
    out
}

fn symmetrized(m: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::InvalidParams(format!("{name} is not symmetric (deviation {asym:e})")));
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Eigen-decomposition of a symmetric matrix, sorted per `which` with ties
/// kept in solver order.
pub fn sym_eigen(m: &DMatrix<f64>, which: Which) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = symmetrized(m, "matrix")?;
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::ConvergenceFailure("symmetric QR iteration".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (eig.eigenvalues[i], eig.eigenvalues[j]);
        match which {
            Which::Largest => b.total_cmp(&a),
            Which::Smallest => a.total_cmp(&b),
        }
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn factor(b: &DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let chol = Cholesky::new(b.clone())?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..b.nrows()).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let max_b = (0..b.nrows()).map(|i| b[(i, i)]).fold(0.0, f64::max);
    let min_pivot = diag.iter().copied().fold(f64::INFINITY, f64::min);
    (min_pivot > PIVOT_FLOOR * max_b).then_some(chol)
}

/// Solves the symmetric-definite problem `A v = λ B v` for `k` pairs.
///
/// `B` is Cholesky-factored; when that fails (or leaves near-zero pivots) a
/// ridge `reg · trace(B)/n · I` is added and the factorization retried.
/// Returned vectors satisfy `vᵢᵀ (B + εI) vⱼ = δᵢⱼ`.
pub fn geneig_sym(a: &DMatrix<f64>, b: &DMatrix<f64>, k: usize, which: Which) -> Result<GenEig> {
    geneig_sym_reg(a, b, k, which, 1e-8)
}

pub fn geneig_sym_reg(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    k: usize,
    which: Which,
    reg: f64,
) -> Result<GenEig> {
    let a = symmetrized(a, "A")?;
    let b = symmetrized(b, "B")?;
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", b.nrows(), b.ncols())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!("requested {k} eigenpairs of a {n}x{n} problem")));
    }
    let (chol, eps) = match factor(&b) {
        Some(c) => (c, 0.0),
        None => {
            let scale = [b.trace(), a.trace().abs(), 1.0]
                .into_iter()
                .find(|&t| t > 0.0)
                .unwrap_or(1.0)
                / n as f64;
            let eps = reg * scale;
            let c = Cholesky::new(regularized(&b, eps)).ok_or(Error::NotSpd)?;
            (c, eps)
        }
    };
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let linv_a = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::ConvergenceFailure("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::ConvergenceFailure("triangular solve".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let (values, u) = sym_eigen(&c, which)?;
    let u = u.columns(0, k).into_owned();
    let vectors = l
        .transpose()
        .solve_upper_triangular(&u)
        .ok_or_else(|| Error::ConvergenceFailure("back substitution".into()))?;
    Ok(GenEig {
        values: values[..k].to_vec(),
        vectors,
        regularization: eps,
    })
}
