//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use leggm::imaging::Image;
use leggm::pisp::Kernel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(r: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| r.random::<f64>())
}

/// Nested-loop correlation with replicated borders.
pub fn replicate_oracle(img: &Image, k: &Kernel) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let s = k.size() as i64;
    let r = s / 2;
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for ky in 0..s {
                for kx in 0..s {
                    let sx = (x + kx - r).clamp(0, w - 1);
                    let sy = (y + ky - r).clamp(0, h - 1);
                    acc += k.weights()[(ky * s + kx) as usize] * img.get(sx as usize, sy as usize);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Nested-loop circular convolution of `img` with a small centered kernel.
pub fn circular_oracle(img: &Image, k: &Kernel) -> Vec<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let s = k.size() as i64;
    let r = s / 2;
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let sx = (x - dx).rem_euclid(w);
                    let sy = (y - dy).rem_euclid(h);
                    acc += k.weights()[((dy + r) * s + dx + r) as usize] * img.get(sx as usize, sy as usize);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// O(N²M²) forward DFT.
pub fn direct_dft(w: usize, h: usize, data: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); w * h];
    for ky in 0..h {
        for kx in 0..w {
            let mut acc = Complex64::default();
            for y in 0..h {
                for x in 0..w {
                    let ang = -2.0 * PI * ((kx * x) as f64 / w as f64 + (ky * y) as f64 / h as f64);
                    acc += data[y * w + x] * Complex64::from_polar(1.0, ang);
                }
            }
            out[ky * w + kx] = acc;
        }
    }
    out
}

/// Cyclic Jacobi eigen-solver; values ascending, vectors as columns.
pub fn jacobi(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    off += a[(r, c)] * a[(r, c)];
                }
            }
        }
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)] == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Generalized eigenvalues of `(A, B)` (ascending) via the symmetric
/// inverse square root of `B`.
pub fn geneig_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let (bv, bq) = jacobi(b);
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(bv.len(), bv.iter().map(|x| 1.0 / x.sqrt())));
    let s = &bq * inv_sqrt * bq.transpose();
    jacobi(&(&s * a * &s)).0
}

pub fn random_spd_pair(seed: u64, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut r = rng(seed);
    let mut gauss = || r.sample::<f64, _>(rand_distr::StandardNormal);
    let m = DMatrix::from_fn(n, n, |_, _| gauss());
    let a = &m + m.transpose();
    let g = DMatrix::from_fn(n, n, |_, _| gauss());
    let b = &g * g.transpose() + DMatrix::identity(n, n) * n as f64;
    (a, b)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
