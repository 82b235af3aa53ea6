//! Linear subspace learning: PCA, PCA followed by LDA, and the
//! graph-embedding family (supervised LPP, LSDA) in both the plain (LGE) and
//! orthogonal (OLGE) formulations.
//!
//! Every model maps `x ↦ projection · (x − mean)`. Graph methods first
//! project onto a PCA subspace of rank at most `n − 1`, since the graph
//! scatter matrices are singular in the raw feature space whenever `D ≫ n`.

pub mod eigen;
pub mod graph;

use std::collections::BTreeMap;
use std::fmt;

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::descriptor::FeatureVector;
use crate::error::{Error, Result};
pub use eigen::{geneig_sym, sym_eigen, GenEig, Which};
pub use graph::Heat;

/// Training samples with one class label each.
#[derive(Debug, Clone)]
pub struct LabeledData {
    samples: Vec<FeatureVector>,
    labels: Vec<String>,
}

impl LabeledData {
    pub fn new(samples: Vec<FeatureVector>, labels: Vec<String>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::dims(format!("{} labels", samples.len()), labels.len()));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidData("at least two training samples are required".into()));
        }
        let dim = samples[0].dim();
        if dim == 0 {
            return Err(Error::InvalidData("feature vectors are empty".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.dim() != dim) {
            return Err(Error::dims(dim, bad.dim()));
        }
        Ok(Self { samples, labels })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn samples(&self) -> &[FeatureVector] {
        &self.samples
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Dense label indices in order of first appearance, plus class count.
    pub fn class_indices(&self) -> (Vec<usize>, usize) {
        let mut seen: Vec<&str> = Vec::new();
        let idx = self
            .labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(i) => i,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            })
            .collect();
        (idx, seen.len())
    }

    /// Samples as columns of a `D × n` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.len(), |r, c| self.samples[c].0[r])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pca,
    PcaLda,
    SlppLge,
    SlppOlge,
    LsdaLge,
    LsdaOlge,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Pca,
        Method::PcaLda,
        Method::SlppLge,
        Method::SlppOlge,
        Method::LsdaLge,
        Method::LsdaOlge,
    ];

    pub fn tag(self) -> u8 {
        match self {
            Method::Pca => 0,
            Method::PcaLda => 1,
            Method::SlppLge => 2,
            Method::SlppOlge => 3,
            Method::LsdaLge => 4,
            Method::LsdaOlge => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::PcaLda => "pca_lda",
            Method::SlppLge => "slpp_lge",
            Method::SlppOlge => "slpp_olge",
            Method::LsdaLge => "lsda_lge",
            Method::LsdaOlge => "lsda_olge",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown subspace method {s:?}"))
    }
}

/// Graph-embedding formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Generalized eigenvectors, B-orthonormal.
    Lge,
    /// Orthonormal directions by sequential deflation.
    Olge,
}

/// User-facing fitting knobs shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    pub method: Method,
    /// Output dimension; `None` selects the method default (`C − 1`).
    pub dims: Option<usize>,
    pub knn_k: usize,
    pub alpha: f64,
    /// Relative ridge added to singular constraint matrices.
    pub epsilon: f64,
    #[serde(serialize_with = "serialize_display")]
    pub heat: Heat,
    /// Variance fraction retained by the PCA pre-projection of graph methods.
    pub pca_variance: f64,
}

fn serialize_display<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            method: Method::PcaLda,
            dims: None,
            knn_k: 5,
            alpha: 0.5,
            epsilon: 1e-8,
            heat: Heat::default(),
            pca_variance: 0.999,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Error::InvariantViolation {
            field: field.into(),
            msg,
        };
        if self.dims == Some(0) {
            return Err(bad("subspace.dims", "must be at least 1".into()));
        }
        if self.knn_k == 0 {
            return Err(bad("subspace.knn_k", "must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(bad("subspace.alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(bad("subspace.epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.pca_variance > 0.0 && self.pca_variance <= 1.0) {
            return Err(bad(
                "subspace.pca_variance",
                format!("must lie in (0, 1], got {}", self.pca_variance),
            ));
        }
        Ok(())
    }
}

/// Learned affine map `x ↦ projection · (x − mean)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    pub method: Method,
    pub mean: DVector<f64>,
    /// `d × D`, rows are the learned directions.
    pub projection: DMatrix<f64>,
    /// Method-specific settings actually used, for provenance.
    pub hyperparams: BTreeMap<String, String>,
}

impl SubspaceModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::dims(self.input_dim(), x.len()));
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        Ok((&self.projection * centered).iter().copied().collect())
    }

    /// `mean + projectionᵀ y`.
    pub fn reconstruct(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.output_dim() {
            return Err(Error::dims(self.output_dim(), y.len()));
        }
        let y = DVector::from_column_slice(y);
        Ok((self.projection.transpose() * y + &self.mean).iter().copied().collect())
    }
}

pub fn project(model: &SubspaceModel, x: &FeatureVector) -> Result<Vec<f64>> {
    model.project(x.values())
}

/// Flips each row so its largest-magnitude entry (first on ties) is positive.
fn fix_row_signs(m: &mut DMatrix<f64>) {
    for r in 0..m.nrows() {
        let mut best = 0usize;
        for c in 0..m.ncols() {
            if m[(r, c)].abs() > m[(r, best)].abs() {
                best = c;
            }
        }
        if m[(r, best)] < 0.0 {
            m.row_mut(r).neg_mut();
        }
    }
}

/// Orthonormal PCA basis of centered data.
struct PcaBasis {
    /// `keep × D`, orthonormal rows.
    rows: DMatrix<f64>,
    /// Sample-covariance eigenvalues (1/n normalization) of every available
    /// component, descending.
    variances: Vec<f64>,
}

/// Relative eigenvalue floor under which a component is treated as empty.
const RANK_TOL: f64 = 1e-10;

/// Top-`keep` principal directions of the columns of `centered`.
///
/// Uses the `n × n` Gram matrix when `D > n`. Directions whose variance is
/// numerically zero are filled with an orthonormal complement of the
/// preceding ones, so `keep` rows are always returned.
fn pca_basis(centered: &DMatrix<f64>, keep: usize) -> Result<PcaBasis> {
    let (dim, n) = centered.shape();
    let scale = 1.0 / n as f64;
    let mut rows = DMatrix::zeros(keep, dim);
    let variances;
    if dim <= n {
        let cov = centered * centered.transpose() * scale;
        let (vals, vecs) = sym_eigen(&cov, Which::Largest)?;
        for i in 0..keep {
            rows.row_mut(i).copy_from(&vecs.column(i).transpose());
        }
        variances = vals;
    } else {
        let gram = centered.transpose() * centered * scale;
        let (vals, vecs) = sym_eigen(&gram, Which::Largest)?;
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        for i in 0..keep {
            if vals[i] > RANK_TOL * top && vals[i] > 0.0 {
                let v = centered * vecs.column(i) / (vals[i] * n as f64).sqrt();
                rows.row_mut(i).copy_from(&v.transpose());
            }
        }
        variances = vals;
    }
    // re-orthonormalize (twice) and complete rank-deficient slots
    let top = variances.first().copied().unwrap_or(0.0).max(0.0);
    let mut axis = 0usize;
    for i in 0..keep {
        let empty = !(variances.get(i).copied().unwrap_or(0.0) > RANK_TOL * top) || top == 0.0;
        if empty {
            loop {
                if axis >= dim {
                    return Err(Error::ConvergenceFailure("could not complete PCA basis".into()));
                }
                let mut e = DVector::zeros(dim);
                e[axis] = 1.0;
                axis += 1;
                rows.row_mut(i).copy_from(&e.transpose());
                if orthonormalize_row(&mut rows, i) {
                    break;
                }
            }
        } else if !orthonormalize_row(&mut rows, i) {
            return Err(Error::ConvergenceFailure("PCA direction collapsed".into()));
        }
    }
    fix_row_signs(&mut rows);
    Ok(PcaBasis { rows, variances })
}

/// Gram–Schmidt of row `i` against rows `0..i`, applied twice. Returns false
/// if the row vanishes.
fn orthonormalize_row(rows: &mut DMatrix<f64>, i: usize) -> bool {
    let before = rows.row(i).norm();
    for _ in 0..2 {
        for j in 0..i {
            let dot = rows.row(i).dot(&rows.row(j));
            let rj = rows.row(j).into_owned();
            let mut ri = rows.row_mut(i);
            ri -= rj * dot;
        }
    }
    let norm = rows.row(i).norm();
    if norm <= 1e-8 * before.max(f64::MIN_POSITIVE) || norm == 0.0 {
        return false;
    }
    rows.row_mut(i).unscale_mut(norm);
    true
}

fn column_mean(x: &DMatrix<f64>) -> DVector<f64> {
    x.column_mean()
}

fn centered(x: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        col -= mean;
    }
    c
}

/// Mean-centered PCA keeping the top `keep` unit directions.
pub fn fit_pca(data: &LabeledData, keep: usize) -> Result<SubspaceModel> {
    let max = data.dim().min(data.len() - 1);
    if keep == 0 || keep > max {
        return Err(Error::KeepTooLarge { keep, max });
    }
    let x = data.matrix();
    let mean = column_mean(&x);
    let basis = pca_basis(&centered(&x, &mean), keep)?;
    let mut hp = BTreeMap::new();
    hp.insert("pca_keep".into(), keep.to_string());
    Ok(SubspaceModel {
        method: Method::Pca,
        mean,
        projection: basis.rows,
        hyperparams: hp,
    })
}

/// Number of leading components reaching `fraction` of total variance,
/// capped at the numerical rank and `cap`.
fn components_for_variance(variances: &[f64], fraction: f64, cap: usize) -> usize {
    let positive: Vec<f64> = variances.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = positive.iter().sum();
    if total <= 0.0 {
        return 1;
    }
    let top = positive[0];
    let rank = positive.iter().filter(|&&v| v > RANK_TOL * top).count().max(1);
    let mut acc = 0.0;
    let mut m = 0;
    for v in &positive {
        acc += v;
        m += 1;
        if acc >= fraction * total {
            break;
        }
    }
    m.min(rank).min(cap).max(1)
}

/// Checks the residual of every returned pair against a scale-aware bound.
fn check_residuals(sol: &GenEig, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let bound = 1e-8 * (a.norm() + sol.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) * b.norm() + sol.regularization)
        * sol.vectors.column_iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let residual = sol.max_residual(a, b);
    if !(residual <= bound) {
        return Err(Error::ConvergenceFailure(format!(
            "generalized eigen residual {residual:e} exceeds {bound:e}"
        )));
    }
    Ok(())
}

fn solve_checked(a: &DMatrix<f64>, b: &DMatrix<f64>, k: usize, which: Which, eps: f64) -> Result<GenEig> {
    let sol = eigen::geneig_sym_reg(a, b, k, which, eps)?;
    check_residuals(&sol, a, b)?;
    Ok(sol)
}

/// Sequentially deflated solution of the graph-embedding problem: each new
/// direction optimizes `aᵀAa / aᵀBa` over the orthogonal complement of the
/// previous ones. Returns unit directions as columns.
pub fn olge_directions(a: &DMatrix<f64>, b: &DMatrix<f64>, k: usize, which: Which, eps: f64) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    if k == 0 || k > m {
        return Err(Error::InvalidParams(format!("requested {k} directions in dimension {m}")));
    }
    let mut found = DMatrix::<f64>::zeros(m, k);
    for i in 0..k {
        // orthonormal basis of the complement of the found directions
        let q = if i == 0 {
            DMatrix::identity(m, m)
        } else {
            let prev = found.columns(0, i);
            let proj = DMatrix::identity(m, m) - &prev * prev.transpose();
            let (vals, vecs) = sym_eigen(&proj, Which::Largest)?;
            debug_assert!(vals[m - i - 1] > 0.5);
            vecs.columns(0, m - i).into_owned()
        };
        let qa = q.transpose() * a * &q;
        let qb = q.transpose() * b * &q;
        let sol = solve_checked(&qa, &qb, 1, which, eps)?;
        let mut dir = &q * sol.vectors.column(0);
        // one more projection pass removes accumulated round-off
        for j in 0..i {
            let prev = found.column(j).into_owned();
            let dot = dir.dot(&prev);
            dir.axpy(-dot, &prev, 1.0);
        }
        let norm = dir.norm();
        if norm == 0.0 {
            return Err(Error::ConvergenceFailure("orthogonal direction vanished".into()));
        }
        found.set_column(i, &(dir / norm));
    }
    Ok(found)
}

/// Solves a graph-embedding objective in the PCA space and returns the
/// directions as columns (B-orthonormal for LGE, orthonormal for OLGE).
pub fn solve_embedding(obj: &graph::Objective, k: usize, which: Which, variant: Variant, eps: f64) -> Result<DMatrix<f64>> {
    match variant {
        Variant::Lge => Ok(solve_checked(&obj.a, &obj.b, k, which, eps)?.vectors),
        Variant::Olge => olge_directions(&obj.a, &obj.b, k, which, eps),
    }
}

fn compose(method: Method, mean: DVector<f64>, directions: &DMatrix<f64>, pca_rows: &DMatrix<f64>, hp: BTreeMap<String, String>) -> SubspaceModel {
    let mut projection = directions.transpose() * pca_rows;
    fix_row_signs(&mut projection);
    SubspaceModel {
        method,
        mean,
        projection,
        hyperparams: hp,
    }
}

fn requested_dims(opts: &FitOptions, classes: usize, cap: usize) -> Result<usize> {
    let d = opts.dims.unwrap_or(classes.saturating_sub(1).max(1));
    if d > cap {
        return Err(Error::KeepTooLarge { keep: d, max: cap });
    }
    Ok(d)
}

fn require_classes(classes: usize) -> Result<()> {
    if classes < 2 {
        return Err(Error::InvalidData(format!(
            "discriminant methods need at least two classes, got {classes}"
        )));
    }
    Ok(())
}

/// PCA to `n − C` dimensions followed by LDA (`S_b w = λ S_w w`).
pub fn fit_pca_lda(data: &LabeledData) -> Result<SubspaceModel> {
    fit_pca_lda_with(data, &FitOptions::default())
}

pub fn fit_pca_lda_with(data: &LabeledData, opts: &FitOptions) -> Result<SubspaceModel> {
    opts.validate()?;
    let (labels, classes) = data.class_indices();
    require_classes(classes)?;
    let n = data.len();
    if n <= classes {
        return Err(Error::InvalidData(format!(
            "PCA+LDA needs more samples ({n}) than classes ({classes})"
        )));
    }
    let x = data.matrix();
    let mean = column_mean(&x);
    let xc = centered(&x, &mean);
    let m = (n - classes).min(data.dim());
    let basis = pca_basis(&xc, m)?;
    let y = &basis.rows * &xc;

    let mut class_means = DMatrix::zeros(m, classes);
    let mut counts = vec![0usize; classes];
    for (i, &c) in labels.iter().enumerate() {
        let mut col = class_means.column_mut(c);
        col += y.column(i);
        counts[c] += 1;
    }
    for c in 0..classes {
        class_means.column_mut(c).unscale_mut(counts[c] as f64);
    }
    let mut sw = DMatrix::zeros(m, m);
    for (i, &c) in labels.iter().enumerate() {
        let d = y.column(i) - class_means.column(c);
        sw += &d * d.transpose();
    }
    // y is centered, so the global mean is zero
    let mut sb = DMatrix::zeros(m, m);
    for c in 0..classes {
        let mu = class_means.column(c);
        sb += mu * mu.transpose() * counts[c] as f64;
    }
    let d = requested_dims(opts, classes, m)?;
    let sol = solve_checked(&sb, &sw, d, Which::Largest, opts.epsilon).map_err(|e| match e {
        Error::NotSpd => Error::SingularScatter,
        other => other,
    })?;
    debug!("pca_lda: n={n} classes={classes} pca_dims={m} d={d} ridge={:e}", sol.regularization);
    let mut hp = BTreeMap::new();
    hp.insert("pca_keep".into(), m.to_string());
    hp.insert("dims".into(), d.to_string());
    hp.insert("epsilon".into(), opts.epsilon.to_string());
    Ok(compose(Method::PcaLda, mean, &sol.vectors, &basis.rows, hp))
}

/// Data prepared for a graph-embedding fit.
pub struct GraphSetup {
    pub mean: DVector<f64>,
    /// `m × D` PCA rows.
    pub pca_rows: DMatrix<f64>,
    /// `m × n` training data in PCA coordinates.
    pub reduced: DMatrix<f64>,
    /// Squared distances in the original feature space.
    pub dists: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

/// Centers, PCA-reduces (retaining `pca_variance`, rank ≤ n − 1) and
/// computes pairwise distances.
pub fn graph_setup(data: &LabeledData, pca_variance: f64) -> Result<GraphSetup> {
    let (labels, classes) = data.class_indices();
    require_classes(classes)?;
    let x = data.matrix();
    let mean = column_mean(&x);
    let xc = centered(&x, &mean);
    let cap = (data.len() - 1).min(data.dim());
    let probe = pca_basis(&xc, cap)?;
    let m = components_for_variance(&probe.variances, pca_variance, cap);
    let pca_rows = probe.rows.rows(0, m).into_owned();
    let reduced = &pca_rows * &xc;
    let dists = graph::pairwise_sq_dists(&x);
    Ok(GraphSetup {
        mean,
        pca_rows,
        reduced,
        dists,
        labels,
        classes,
    })
}

/// Supervised locality preserving projections.
pub fn fit_slpp(data: &LabeledData, variant: Variant, heat: Heat) -> Result<SubspaceModel> {
    let opts = FitOptions {
        method: match variant {
            Variant::Lge => Method::SlppLge,
            Variant::Olge => Method::SlppOlge,
        },
        heat,
        ..FitOptions::default()
    };
    fit_slpp_with(data, variant, &opts)
}

pub fn fit_slpp_with(data: &LabeledData, variant: Variant, opts: &FitOptions) -> Result<SubspaceModel> {
    opts.validate()?;
    let setup = graph_setup(data, opts.pca_variance)?;
    let w = graph::supervised_affinity(&setup.labels, &setup.dists, opts.heat);
    let obj = graph::slpp_objective(&setup.reduced, &w);
    let m = setup.reduced.nrows();
    let d = requested_dims(opts, setup.classes, m)?;
    let dirs = solve_embedding(&obj, d, Which::Smallest, variant, opts.epsilon).map_err(|e| match e {
        Error::NotSpd => Error::SingularConstraint,
        other => other,
    })?;
    let method = match variant {
        Variant::Lge => Method::SlppLge,
        Variant::Olge => Method::SlppOlge,
    };
    debug!("{method}: n={} pca_dims={m} d={d}", data.len());
    let mut hp = BTreeMap::new();
    hp.insert("pca_keep".into(), m.to_string());
    hp.insert("pca_variance".into(), opts.pca_variance.to_string());
    hp.insert("heat_t".into(), opts.heat.to_string());
    hp.insert("dims".into(), d.to_string());
    hp.insert("epsilon".into(), opts.epsilon.to_string());
    Ok(compose(method, setup.mean, &dirs, &setup.pca_rows, hp))
}

/// Locality sensitive discriminant analysis over a `k`-NN graph.
pub fn fit_lsda(data: &LabeledData, k: usize, variant: Variant) -> Result<SubspaceModel> {
    let opts = FitOptions {
        method: match variant {
            Variant::Lge => Method::LsdaLge,
            Variant::Olge => Method::LsdaOlge,
        },
        knn_k: k,
        ..FitOptions::default()
    };
    fit_lsda_with(data, variant, &opts)
}

pub fn fit_lsda_with(data: &LabeledData, variant: Variant, opts: &FitOptions) -> Result<SubspaceModel> {
    opts.validate()?;
    let n = data.len();
    if opts.knn_k >= n {
        return Err(Error::KTooLarge { k: opts.knn_k, n });
    }
    let setup = graph_setup(data, opts.pca_variance)?;
    let nbrs = graph::knn(&setup.dists, opts.knn_k)?;
    let (within, between) = graph::lsda_graphs(&setup.labels, &nbrs);
    let obj = graph::lsda_objective(&setup.reduced, &within, &between, opts.alpha);
    let m = setup.reduced.nrows();
    let d = requested_dims(opts, setup.classes, m)?;
    let dirs = solve_embedding(&obj, d, Which::Largest, variant, opts.epsilon).map_err(|e| match e {
        Error::NotSpd => Error::SingularConstraint,
        other => other,
    })?;
    let method = match variant {
        Variant::Lge => Method::LsdaLge,
        Variant::Olge => Method::LsdaOlge,
    };
    debug!("{method}: n={n} k={} pca_dims={m} d={d}", opts.knn_k);
    let mut hp = BTreeMap::new();
    hp.insert("pca_keep".into(), m.to_string());
    hp.insert("pca_variance".into(), opts.pca_variance.to_string());
    hp.insert("knn_k".into(), opts.knn_k.to_string());
    hp.insert("alpha".into(), opts.alpha.to_string());
    hp.insert("dims".into(), d.to_string());
    hp.insert("epsilon".into(), opts.epsilon.to_string());
    Ok(compose(method, setup.mean, &dirs, &setup.pca_rows, hp))
}

/// Dispatches on `opts.method`.
pub fn fit(data: &LabeledData, opts: &FitOptions) -> Result<SubspaceModel> {
    opts.validate()?;
    match opts.method {
        Method::Pca => {
            let keep = match opts.dims {
                Some(d) => d,
                None => {
                    let x = data.matrix();
                    let mean = column_mean(&x);
                    let cap = (data.len() - 1).min(data.dim());
                    let probe = pca_basis(&centered(&x, &mean), cap)?;
                    components_for_variance(&probe.variances, opts.pca_variance, cap)
                }
            };
            fit_pca(data, keep)
        }
        Method::PcaLda => fit_pca_lda_with(data, opts),
        Method::SlppLge => fit_slpp_with(data, Variant::Lge, opts),
        Method::SlppOlge => fit_slpp_with(data, Variant::Olge, opts),
        Method::LsdaLge => fit_lsda_with(data, Variant::Lge, opts),
        Method::LsdaOlge => fit_lsda_with(data, Variant::Olge, opts),
    }
}

#[cfg(test)]
mod tests;
