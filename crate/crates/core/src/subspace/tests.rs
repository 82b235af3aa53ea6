use super::graph::{self, Heat};
use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Cyclic Jacobi eigen-solver on a dense symmetric matrix. Returns values
/// ascending and eigenvectors as columns.
fn jacobi(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| m[(r, c)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| f64::from(r == c)).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r][c] * a[r][c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[r][order[c]]);
    (vals, vecs)
}

/// Generalized eigenvalues (ascending) through the symmetric square root of B.
fn geneig_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let (bv, bq) = jacobi(b);
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(bv.len(), bv.iter().map(|x| 1.0 / x.sqrt())));
    let s = &bq * inv_sqrt * bq.transpose();
    jacobi(&(&s * a * &s)).0
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

fn random_spd_pair(seed: u64, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut r = rng(seed);
    let m = random_matrix(&mut r, n, n);
    let a = &m + m.transpose();
    let g = random_matrix(&mut r, n, n);
    let b = &g * g.transpose() + DMatrix::identity(n, n) * n as f64;
    (a, b)
}

fn labeled(points: &[Vec<f64>], labels: &[&str]) -> LabeledData {
    LabeledData::new(
        points.iter().cloned().map(FeatureVector).collect(),
        labels.iter().map(|s| s.to_string()).collect(),
    )
    .unwrap()
}

/// `classes` Gaussian clusters in `dim` dimensions, `per` samples each.
fn clusters(seed: u64, classes: usize, per: usize, dim: usize, spread: f64, noise: f64) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut r = rng(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| spread * gaussian(&mut r)).collect())
        .collect();
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per {
            pts.push(center.iter().map(|m| m + noise * gaussian(&mut r)).collect());
            labels.push(format!("c{c}"));
        }
    }
    (pts, labels)
}

fn to_data(pts: &[Vec<f64>], labels: &[String]) -> LabeledData {
    LabeledData::new(pts.iter().cloned().map(FeatureVector).collect(), labels.to_vec()).unwrap()
}

/// Fraction of probes whose nearest projected training sample shares their label.
fn nn_accuracy(model: &SubspaceModel, train: &LabeledData, probes: &[Vec<f64>], probe_labels: &[String]) -> f64 {
    let gallery: Vec<Vec<f64>> = train.samples().iter().map(|s| project(model, s).unwrap()).collect();
    let mut hits = 0;
    for (p, l) in probes.iter().zip(probe_labels) {
        let y = model.project(p).unwrap();
        let best = gallery
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        hits += usize::from(&train.labels()[best] == l);
    }
    hits as f64 / probes.len() as f64
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

// ---- generalized eigen-solver ----

#[test]
fn geneig_matches_dense_oracle_on_random_pair() {
    let (a, b) = random_spd_pair(11, 8);
    let got = geneig_sym(&a, &b, 8, Which::Smallest).unwrap();
    let want = geneig_oracle(&a, &b);
    for (g, w) in got.values.iter().zip(&want) {
        assert_abs_diff_eq!(*g, *w, epsilon = 1e-8);
    }
    assert!(got.max_residual(&a, &b) <= 1e-8 * a.norm());
    let gram = got.vectors.transpose() * &b * &got.vectors;
    assert!(max_abs(&(gram - DMatrix::identity(8, 8))) <= 1e-8);
}

#[test]
fn jacobi_oracle_diagonalizes() {
    let (a, _) = random_spd_pair(3, 6);
    let (vals, vecs) = jacobi(&a);
    let back = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
    assert!(max_abs(&(back - a)) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn geneig_residual_and_b_orthonormality(seed in any::<u64>(), n in 1usize..=64, largest in any::<bool>()) {
        let (a, b) = random_spd_pair(seed, n);
        let which = if largest { Which::Largest } else { Which::Smallest };
        let k = n.div_ceil(2);
        let got = geneig_sym(&a, &b, k, which).unwrap();
        prop_assert!(got.max_residual(&a, &b) <= 1e-8 * a.norm());
        let gram = got.vectors.transpose() * &b * &got.vectors;
        prop_assert!(max_abs(&(gram - DMatrix::identity(k, k))) <= 1e-8);
        for w in got.values.windows(2) {
            match which {
                Which::Largest => prop_assert!(w[0] >= w[1]),
                Which::Smallest => prop_assert!(w[0] <= w[1]),
            }
        }
    }
}

// ---- PCA ----

#[test]
fn pca_on_a_line_reproduces_positions() {
    let dir = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
    let ts = [-2.0, -0.5, 0.0, 1.0, 1.5];
    let pts: Vec<Vec<f64>> = ts.iter().map(|t| dir.iter().map(|d| 1.0 + t * d).collect()).collect();
    let data = labeled(&pts, &["a", "a", "b", "b", "b"]);
    let model = fit_pca(&data, 1).unwrap();
    let tmean = ts.iter().sum::<f64>() / ts.len() as f64;
    let ys: Vec<f64> = pts.iter().map(|p| model.project(p).unwrap()[0]).collect();
    let sign = ys[4].signum() * (ts[4] - tmean).signum();
    for (y, t) in ys.iter().zip(&ts) {
        assert_abs_diff_eq!(*y, sign * (t - tmean), epsilon = 1e-10);
    }
    for p in &pts {
        let rec = model.reconstruct(&model.project(p).unwrap()).unwrap();
        for (a, b) in rec.iter().zip(p) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }
    // largest-magnitude entry positive
    let row = model.projection.row(0);
    let big = row.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    assert!(big > 0.0);
}

#[test]
fn pca_isotropic_cloud_is_deterministic() {
    let mut r = rng(5);
    let pts: Vec<Vec<f64>> = (0..400).map(|_| vec![gaussian(&mut r), gaussian(&mut r)]).collect();
    let labels: Vec<String> = (0..400).map(|i| format!("{}", i % 2)).collect();
    let data = to_data(&pts, &labels);
    let m1 = fit_pca(&data, 2).unwrap();
    let m2 = fit_pca(&data, 2).unwrap();
    assert_eq!(m1, m2);
    let x = data.matrix();
    let xc = centered(&x, &column_mean(&x));
    let cov = &xc * xc.transpose() / 400.0;
    let (vals, _) = jacobi(&cov);
    assert!((vals[0] - vals[1]).abs() < 0.25);
    let gram = &m1.projection * m1.projection.transpose();
    assert!(max_abs(&(gram - DMatrix::identity(2, 2))) < 1e-12);
}

#[test]
fn pca_matches_covariance_oracle() {
    let mut r = rng(17);
    // anisotropic scales give a clear spectral gap
    let scales: Vec<f64> = (0..30).map(|i| 3.0 * 0.8f64.powi(i)).collect();
    let pts: Vec<Vec<f64>> = (0..20)
        .map(|_| scales.iter().map(|s| s * gaussian(&mut r)).collect())
        .collect();
    let labels: Vec<String> = (0..20).map(|i| format!("{}", i % 4)).collect();
    let data = to_data(&pts, &labels);
    let keep = 5;
    let model = fit_pca(&data, keep).unwrap();
    let x = data.matrix();
    let xc = centered(&x, &column_mean(&x));
    let cov = &xc * xc.transpose() / 20.0;
    let (_, vecs) = jacobi(&cov);
    let top = DMatrix::from_fn(30, keep, |r, c| vecs[(r, 29 - c)]);
    // principal angles: cosines are the singular values of Pᵀ Q
    let cross = &model.projection * &top;
    let sv = cross.singular_values();
    for s in sv.iter() {
        let angle = s.min(1.0).acos();
        assert!(angle <= 1e-8, "principal angle {angle:e}");
    }
}

#[test]
fn pca_keep_bounds() {
    let data = labeled(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]], &["a", "b", "c"]);
    assert!(matches!(fit_pca(&data, 3), Err(Error::KeepTooLarge { keep: 3, max: 2 })));
    assert!(matches!(fit_pca(&data, 0), Err(Error::KeepTooLarge { .. })));
    assert_eq!(fit_pca(&data, 2).unwrap().output_dim(), 2);
}

#[test]
fn rank_preserving_pca_reconstructs_training_samples() {
    let mut r = rng(8);
    let basis = random_matrix(&mut r, 50, 3);
    let pts: Vec<Vec<f64>> = (0..12)
        .map(|_| {
            let c = DVector::from_fn(3, |_, _| gaussian(&mut r));
            (&basis * c).iter().map(|v| v + 4.0).collect()
        })
        .collect();
    let labels: Vec<String> = (0..12).map(|i| format!("{}", i % 3)).collect();
    let data = to_data(&pts, &labels);
    let model = fit_pca(&data, 3).unwrap();
    for p in &pts {
        let rec = model.reconstruct(&model.project(p).unwrap()).unwrap();
        for (a, b) in rec.iter().zip(p) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-8);
        }
    }
}

#[test]
fn rank_deficient_pca_still_orthonormal() {
    let pts = vec![vec![1.0, 0.0, 0.0, 0.0, 0.0]; 4]
        .into_iter()
        .enumerate()
        .map(|(i, mut p)| {
            p[0] = i as f64;
            p
        })
        .collect::<Vec<_>>();
    let data = labeled(&pts, &["a", "a", "b", "b"]);
    let model = fit_pca(&data, 3).unwrap();
    let gram = &model.projection * model.projection.transpose();
    assert!(max_abs(&(gram - DMatrix::identity(3, 3))) < 1e-12);
}

// ---- PCA + LDA ----

fn two_blobs(seed: u64, per: usize) -> (Vec<Vec<f64>>, Vec<String>) {
    let mut r = rng(seed);
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (name, cx, cy) in [("left", -10.0, 0.0), ("right", 10.0, 3.0)] {
        for _ in 0..per {
            pts.push(vec![cx + gaussian(&mut r), cy + gaussian(&mut r)]);
            labels.push(name.to_string());
        }
    }
    (pts, labels)
}

#[test]
fn lda_separates_two_blobs() {
    let (train, tl) = two_blobs(1, 10);
    let (test, sl) = two_blobs(2, 25);
    let data = to_data(&train, &tl);
    let model = fit_pca_lda(&data).unwrap();
    assert_eq!(model.output_dim(), 1);
    assert_eq!(nn_accuracy(&model, &data, &test, &sl), 1.0);
}

#[test]
fn lda_with_zero_within_class_scatter() {
    let protos = [vec![0.0, 0.0, 1.0], vec![5.0, 1.0, 0.0], vec![-3.0, 4.0, 2.0], vec![1.0, -6.0, 3.0]];
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (c, p) in protos.iter().enumerate() {
        for _ in 0..3 {
            pts.push(p.clone());
            labels.push(format!("k{c}"));
        }
    }
    let data = to_data(&pts, &labels);
    let model = fit_pca_lda(&data).unwrap();
    assert_eq!(model.output_dim(), 3);
    let ys: Vec<Vec<f64>> = protos.iter().map(|p| model.project(p).unwrap()).collect();
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            let d: f64 = ys[i].iter().zip(&ys[j]).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(d > 1e-6, "classes {i} and {j} collapse");
        }
    }
    assert_eq!(nn_accuracy(&model, &data, &protos, &["k0", "k1", "k2", "k3"].map(String::from)), 1.0);
}

#[test]
fn lda_output_dimension_is_classes_minus_one() {
    let (pts, labels) = clusters(4, 3, 5, 6, 5.0, 1.0);
    let model = fit_pca_lda(&to_data(&pts, &labels)).unwrap();
    assert_eq!(model.output_dim(), 2);
    assert_eq!(model.hyperparams["pca_keep"], "6");
}

#[test]
fn lda_requires_two_classes_and_spare_samples() {
    let one = labeled(&[vec![0.0], vec![1.0]], &["a", "a"]);
    assert!(fit_pca_lda(&one).is_err());
    let tight = labeled(&[vec![0.0], vec![1.0]], &["a", "b"]);
    assert!(fit_pca_lda(&tight).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lda_decisions_are_scale_invariant(seed in any::<u64>(), scale in 0.05f64..50.0) {
        let (pts, labels) = clusters(seed, 4, 4, 12, 3.0, 1.0);
        let (probes, probe_labels) = clusters(seed, 4, 2, 12, 3.0, 1.0);
        let data = to_data(&pts, &labels);
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * scale).collect()).collect();
        let sdata = to_data(&scaled, &labels);
        let m1 = fit_pca_lda(&data).unwrap();
        let m2 = fit_pca_lda(&sdata).unwrap();
        let decide = |m: &SubspaceModel, train: &LabeledData, p: &[f64]| -> usize {
            let y = m.project(p).unwrap();
            train.samples().iter().enumerate().map(|(i, s)| {
                let g = m.project(s.values()).unwrap();
                (i, g.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
        };
        for p in &probes {
            let sp: Vec<f64> = p.iter().map(|v| v * scale).collect();
            prop_assert_eq!(decide(&m1, &data, p), decide(&m2, &sdata, &sp));
        }
        let _ = probe_labels;
    }
}

// ---- graph embeddings ----

#[test]
fn complete_graph_smallest_pair_matches_oracle() {
    // one class: binary affinity is the complete graph on 6 vertices
    let mut r = rng(21);
    let y = random_matrix(&mut r, 4, 6);
    let labels = [0usize; 6];
    let w = graph::supervised_affinity(&labels, &graph::pairwise_sq_dists(&y), Heat::Binary);
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(w[(i, j)], f64::from(i != j));
        }
    }
    let obj = graph::slpp_objective(&y, &w);
    let got = geneig_sym(&obj.a, &obj.b, 4, Which::Smallest).unwrap();
    let want = geneig_oracle(&obj.a, &obj.b);
    let first_nonzero = want.iter().position(|v| v.abs() > 1e-10).unwrap();
    let idx = got.values.iter().position(|v| v.abs() > 1e-10).unwrap();
    assert_abs_diff_eq!(got.values[idx], want[first_nonzero], epsilon = 1e-8);
    assert!(got.max_residual(&obj.a, &obj.b) <= 1e-8 * obj.a.norm());
}

#[test]
fn slpp_maps_duplicates_together() {
    let pts = vec![
        vec![1.0, 2.0, 0.0],
        vec![1.0, 2.0, 0.0],
        vec![1.0, 2.0, 0.0],
        vec![-1.0, 0.5, 3.0],
        vec![-1.0, 0.5, 3.0],
        vec![-1.0, 0.5, 3.0],
    ];
    let data = labeled(&pts, &["a", "a", "a", "b", "b", "b"]);
    for variant in [Variant::Lge, Variant::Olge] {
        let model = fit_slpp(&data, variant, Heat::Binary).unwrap();
        assert_eq!(model.output_dim(), 1);
        let y: Vec<f64> = pts.iter().map(|p| model.project(p).unwrap()[0]).collect();
        assert_abs_diff_eq!(y[0], y[1], epsilon = 1e-8);
        assert_abs_diff_eq!(y[1], y[2], epsilon = 1e-8);
        assert_abs_diff_eq!(y[3], y[5], epsilon = 1e-8);
    }
}

fn five_class() -> LabeledData {
    let (pts, labels) = clusters(31, 5, 6, 40, 2.0, 1.0);
    to_data(&pts, &labels)
}

fn row_gram(m: &SubspaceModel) -> DMatrix<f64> {
    &m.projection * m.projection.transpose()
}

#[test]
fn olge_rows_orthonormal_lge_rows_not() {
    let data = five_class();
    for (olge, lge) in [
        (fit_slpp(&data, Variant::Olge, Heat::default()).unwrap(), fit_slpp(&data, Variant::Lge, Heat::default()).unwrap()),
        (fit_lsda(&data, 5, Variant::Olge).unwrap(), fit_lsda(&data, 5, Variant::Lge).unwrap()),
    ] {
        assert_eq!(olge.output_dim(), 4);
        assert!(max_abs(&(row_gram(&olge) - DMatrix::identity(4, 4))) <= 1e-8);
        assert!(max_abs(&(row_gram(&lge) - DMatrix::identity(4, 4))) > 1e-3);
    }
}

#[test]
fn lge_rows_are_constraint_orthonormal() {
    let data = five_class();
    let setup = graph_setup(&data, 0.999).unwrap();
    let x = centered(&data.matrix(), &setup.mean);
    let w = graph::supervised_affinity(&setup.labels, &setup.dists, Heat::default());
    let model = fit_slpp(&data, Variant::Lge, Heat::default()).unwrap();
    // B in the original space: X Dg Xᵀ
    let b = &x * graph::degree(&w) * x.transpose();
    let gram = &model.projection * b * model.projection.transpose();
    assert!(max_abs(&(gram - DMatrix::identity(4, 4))) <= 1e-8);
}

#[test]
fn olge_directions_optimize_on_complement() {
    let (a, b) = random_spd_pair(9, 7);
    let dirs = olge_directions(&a, &b, 3, Which::Largest, 1e-8).unwrap();
    let first = geneig_sym(&a, &b, 1, Which::Largest).unwrap();
    let v = first.vectors.column(0).normalize();
    assert!((dirs.column(0).dot(&v)).abs() > 1.0 - 1e-10);
    let gram = dirs.transpose() * &dirs;
    assert!(max_abs(&(gram - DMatrix::identity(3, 3))) <= 1e-12);
    // Rayleigh quotients decrease along the sequence
    let rq: Vec<f64> = (0..3)
        .map(|i| {
            let d = dirs.column(i);
            (d.transpose() * &a * d)[0] / (d.transpose() * &b * d)[0]
        })
        .collect();
    assert!(rq[0] >= rq[1] && rq[1] >= rq[2]);
}

#[test]
fn lsda_global_neighbourhood_separates_blobs() {
    let (train, tl) = two_blobs(3, 8);
    let (test, sl) = two_blobs(4, 20);
    let data = to_data(&train, &tl);
    for variant in [Variant::Lge, Variant::Olge] {
        let model = fit_lsda(&data, data.len() - 1, variant).unwrap();
        assert_eq!(nn_accuracy(&model, &data, &test, &sl), 1.0);
    }
}

#[test]
fn lsda_with_empty_between_graph() {
    let (pts, labels) = clusters(12, 3, 5, 6, 100.0, 0.5);
    let data = to_data(&pts, &labels);
    let setup = graph_setup(&data, 0.999).unwrap();
    let nbrs = graph::knn(&setup.dists, 2).unwrap();
    let (_, between) = graph::lsda_graphs(&setup.labels, &nbrs);
    assert_eq!(max_abs(&between), 0.0);
    let model = fit_lsda(&data, 2, Variant::Lge).unwrap();
    assert_eq!(model.output_dim(), 2);
    assert!(model.projection.iter().all(|v| v.is_finite()));
}

#[test]
fn lsda_objective_matches_brute_force() {
    let pts: [[f64; 2]; 8] = [
        [0.0, 0.0],
        [1.0, 0.2],
        [0.3, 1.1],
        [5.0, 5.0],
        [5.5, 4.2],
        [1.4, 1.0],
        [4.6, 5.9],
        [2.6, 2.7],
    ];
    let labels = [0usize, 0, 0, 1, 1, 0, 1, 1];
    let alpha = 0.3;
    let k = 2;
    let y = DMatrix::from_fn(2, 8, |r, c| pts[c][r]);

    // brute force: neighbour sets by exhaustive ranking
    let mut ww = [[0.0f64; 8]; 8];
    let mut wb = [[0.0f64; 8]; 8];
    for i in 0..8 {
        let mut ranked: Vec<(f64, usize)> = (0..8)
            .filter(|&j| j != i)
            .map(|j| ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2), j))
            .collect();
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in &ranked[..k] {
            let g = if labels[i] == labels[j] { &mut ww } else { &mut wb };
            g[i][j] = 1.0;
            g[j][i] = 1.0;
        }
    }
    let dw: Vec<f64> = (0..8).map(|i| ww[i].iter().sum()).collect();
    let db: Vec<f64> = (0..8).map(|i| wb[i].iter().sum()).collect();
    let mut a_bf = [[0.0f64; 2]; 2];
    let mut b_bf = [[0.0f64; 2]; 2];
    for i in 0..8 {
        for j in 0..8 {
            let lb = if i == j { db[i] } else { 0.0 } - wb[i][j];
            let m = alpha * lb + (1.0 - alpha) * ww[i][j];
            let d = if i == j { dw[i] } else { 0.0 };
            for r in 0..2 {
                for c in 0..2 {
                    a_bf[r][c] += m * pts[i][r] * pts[j][c];
                    b_bf[r][c] += d * pts[i][r] * pts[j][c];
                }
            }
        }
    }

    let nbrs = graph::knn(&graph::pairwise_sq_dists(&y), k).unwrap();
    let (within, between) = graph::lsda_graphs(&labels, &nbrs);
    for i in 0..8 {
        for j in 0..8 {
            assert_eq!(within[(i, j)], ww[i][j]);
            assert_eq!(between[(i, j)], wb[i][j]);
        }
    }
    let obj = graph::lsda_objective(&y, &within, &between, alpha);
    for r in 0..2 {
        for c in 0..2 {
            assert_abs_diff_eq!(obj.a[(r, c)], a_bf[r][c], epsilon = 1e-12);
            assert_abs_diff_eq!(obj.b[(r, c)], b_bf[r][c], epsilon = 1e-12);
        }
    }
}

#[test]
fn lsda_rejects_large_k() {
    let data = five_class();
    assert!(matches!(fit_lsda(&data, 30, Variant::Lge), Err(Error::KTooLarge { k: 30, n: 30 })));
}

#[test]
fn graph_methods_need_two_classes() {
    let data = labeled(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]], &["a", "a", "a"]);
    assert!(fit_slpp(&data, Variant::Lge, Heat::Binary).is_err());
}

// ---- projection and model plumbing ----

#[test]
fn projecting_the_mean_gives_zero() {
    let data = five_class();
    let model = fit_pca_lda(&data).unwrap();
    let y = model.project(model.mean.as_slice()).unwrap();
    assert!(y.iter().all(|v| v.abs() < 1e-12));
    assert!(matches!(model.project(&[1.0]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn coordinate_selection_model() {
    let model = SubspaceModel {
        method: Method::Pca,
        mean: DVector::zeros(4),
        projection: DMatrix::from_fn(2, 4, |r, c| f64::from(r == c)),
        hyperparams: BTreeMap::new(),
    };
    assert_eq!(model.project(&[3.0, -1.0, 7.0, 2.0]).unwrap(), vec![3.0, -1.0]);
}

#[test]
fn fitting_is_bitwise_deterministic() {
    let data = five_class();
    for method in Method::ALL {
        let opts = FitOptions {
            method,
            ..FitOptions::default()
        };
        let a = fit(&data, &opts).unwrap();
        let b = fit(&data, &opts).unwrap();
        assert_eq!(a, b, "{method}");
        assert_eq!(a.method, method);
        assert!(a.output_dim() >= 1 && a.output_dim() <= data.len() - 1);
    }
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
        assert_eq!(Method::from_tag(m.tag()), Some(m));
    }
    assert!("lda".parse::<Method>().is_err());
    assert_eq!(Method::from_tag(6), None);
}

#[test]
fn labeled_data_validation() {
    assert!(LabeledData::new(vec![FeatureVector(vec![1.0])], vec!["a".into()]).is_err());
    assert!(LabeledData::new(
        vec![FeatureVector(vec![1.0]), FeatureVector(vec![1.0, 2.0])],
        vec!["a".into(), "b".into()]
    )
    .is_err());
    assert!(LabeledData::new(vec![FeatureVector(vec![1.0]); 2], vec!["a".into()]).is_err());
    let d = labeled(&[vec![1.0], vec![2.0], vec![3.0]], &["x", "y", "x"]);
    assert_eq!(d.class_indices(), (vec![0, 1, 0], 2));
}

#[test]
fn options_validation() {
    let bad = [
        FitOptions { alpha: 1.5, ..FitOptions::default() },
        FitOptions { knn_k: 0, ..FitOptions::default() },
        FitOptions { dims: Some(0), ..FitOptions::default() },
        FitOptions { pca_variance: 0.0, ..FitOptions::default() },
        FitOptions { epsilon: -1.0, ..FitOptions::default() },
    ];
    for o in bad {
        assert!(matches!(o.validate(), Err(Error::InvariantViolation { .. })));
    }
    let data = five_class();
    let too_many = FitOptions { dims: Some(100), ..FitOptions::default() };
    assert!(matches!(fit(&data, &too_many), Err(Error::KeepTooLarge { .. })));
}
