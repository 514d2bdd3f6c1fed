//! Smallest eigenpairs of sparse symmetric definite pencils `K x = λ M x`.

pub mod cholesky;
pub mod dense;
pub mod lanczos;

use std::ops::Range;

use serde::Serialize;

pub use cholesky::{factorize_spd, rcm_ordering, CholeskyFactor};
pub use dense::{dense_eigen_oracle, symmetric_eigen, DenseEigen, DENSE_LIMIT};
pub use lanczos::{smallest_eigenpairs, smallest_eigenpairs_with, LanczosOptions};

/// An accepted eigenpair; `vector` has unit M-norm.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub value: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
    /// `‖Kx − λMx‖₂ / ‖Kx‖₂`
    pub residual: f64,
}

/// Index ranges of consecutive values closer than `rel_tol` (relative).
/// `values` must be sorted.
pub fn clusters(values: &[f64], rel_tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            (b - a).abs() > rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Width of the cluster containing each value.
pub fn cluster_widths(values: &[f64], rel_tol: f64) -> Vec<usize> {
    let mut widths = vec![0; values.len()];
    for range in clusters(values, rel_tol) {
        let w = range.len();
        for i in range {
            widths[i] = w;
        }
    }
    widths
}

/// Makes the largest-magnitude entry of `v` positive (first one on ties).
pub fn sign_normalize(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best * (1.0 + 1e-9) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn signature_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-8 * scale {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

/// Sign-normalizes every vector and orders the members of each cluster by
/// their lexicographic signature. The cluster's values stay listed ascending.
pub(crate) fn normalize_clusters(pairs: &mut [EigenPair], rel_tol: f64) {
    for p in pairs.iter_mut() {
        sign_normalize(&mut p.vector);
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    for range in clusters(&values, rel_tol) {
        if range.len() > 1 {
            let sorted = values[range.clone()].to_vec();
            pairs[range.clone()].sort_by(|a, b| signature_cmp(&b.vector, &a.vector));
            for (p, v) in pairs[range].iter_mut().zip(sorted) {
                p.value = v;
            }
        }
    }
}
