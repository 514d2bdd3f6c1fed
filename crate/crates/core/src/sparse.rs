//! Compressed-row storage for symmetric sparse matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Symmetric matrix in compressed-row form. Both triangles are stored so
/// that products are a single pass; exports write the upper triangle only.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed. The
    /// caller supplies both `(i, j)` and `(j, i)` for off-diagonal entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut raw_cols = vec![0usize; triplets.len()];
        let mut raw_vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let slot = next[i];
            raw_cols[slot] = j;
            raw_vals[slot] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..n {
            order.clear();
            order.extend(counts[i]..counts[i + 1]);
            order.sort_by_key(|&s| raw_cols[s]);
            let mut last: Option<usize> = None;
            for &s in &order {
                if last == Some(raw_cols[s]) {
                    *vals.last_mut().unwrap() += raw_vals[s];
                } else {
                    cols.push(raw_cols[s]);
                    vals.push(raw_vals[s]);
                    last = Some(raw_cols[s]);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        Self::from_triplets(diag.len(), &t)
    }

    /// Builds from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = dense[i * n + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries (both triangles).
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.vals[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn total_sum(&self) -> f64 {
        self.vals.iter().sum()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch {} vs {}",
                self.n, other.n
            )));
        }
        if self.row_ptr == other.row_ptr && self.cols == other.cols {
            let mut out = self.clone();
            for (v, w) in out.vals.iter_mut().zip(&other.vals) {
                *v += alpha * w;
            }
            return Ok(out);
        }
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, alpha * v)));
        Ok(Self::from_triplets(self.n, &t))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
        }
        t
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i * self.n + j] = v;
            }
        }
        d
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (j, v) in self.row(old_i) {
                if map[j] != usize::MAX {
                    t.push((new_i, map[j], v));
                }
            }
        }
        Self::from_triplets(keep.len(), &t)
    }

    /// Kronecker product `self ⊗ other`; index `(i, p)` maps to `i * other.n + p`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                for p in 0..other.n {
                    for (q, b) in other.row(p) {
                        t.push((i * other.n + p, j * other.n + q, a * b));
                    }
                }
            }
        }
        Self::from_triplets(self.n * other.n, &t)
    }

    /// Coordinate text: header `n nnz`, then `i j value` for the upper triangle.
    pub fn to_coordinate_text(&self) -> String {
        let upper: Vec<(usize, usize, f64)> = self.triplets().into_iter().filter(|&(i, j, _)| j >= i).collect();
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, upper.len()).unwrap();
        for (i, j, v) in upper {
            writeln!(out, "{i} {j} {v:.16e}").unwrap();
        }
        out
    }

    /// Parses [`to_coordinate_text`](Self::to_coordinate_text) output, mirroring the
    /// upper triangle. Lines starting with `#` are ignored.
    pub fn from_coordinate_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let mut h = header.split_whitespace();
        let parse_usize = |s: Option<&str>| -> Result<usize> {
            s.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))
        };
        let n = parse_usize(h.next())?;
        let nnz = parse_usize(h.next())?;
        let mut t = Vec::with_capacity(2 * nnz);
        for _ in 0..nnz {
            let line = lines.next().ok_or_else(|| Error::Parse("missing entry".into()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("bad entry `{line}`"));
            if f.len() != 3 {
                return Err(bad());
            }
            let i: usize = f[0].parse().map_err(|_| bad())?;
            let j: usize = f[1].parse().map_err(|_| bad())?;
            let v: f64 = f[2].parse().map_err(|_| bad())?;
            if i >= n || j >= n || j < i {
                return Err(bad());
            }
            t.push((i, j, v));
            if i != j {
                t.push((j, i, v));
            }
        }
        Ok(Self::from_triplets(n, &t))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseSymMatrix {
        SparseSymMatrix::from_triplets(
            3,
            &[
                (0, 0, 2.0),
                (1, 1, 2.0),
                (2, 2, 2.0),
                (0, 1, -1.0),
                (1, 0, -1.0),
                (1, 2, -0.5),
                (2, 1, -0.5),
                (2, 2, 1.0),
            ],
        )
    }

    #[test]
    fn duplicates_summed() {
        let a = small();
        assert_eq!(a.get(2, 2), 3.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 7);
        assert_eq!(a.max_asymmetry(), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = small();
        let d = a.to_dense();
        let x = [1.0, -2.0, 0.5];
        let y = a.mul_vec(&x);
        for i in 0..3 {
            let e: f64 = (0..3).map(|j| d[i * 3 + j] * x[j]).sum();
            assert!((y[i] - e).abs() < 1e-15);
        }
        assert!((a.bilinear(&x, &x) - dot(&x, &y)).abs() < 1e-14);
    }

    #[test]
    fn kron_entry() {
        let a = small();
        let b = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 3.0), (1, 0, 3.0), (1, 1, 4.0)]);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        // entry (i*2 + p, j*2 + q) is a[i][j] * b[p][q]
        assert_eq!(k.get(2, 1), -3.0);
        assert_eq!(k.get(5, 5), 12.0);
    }

    #[test]
    fn coordinate_roundtrip() {
        let a = small();
        let text = a.to_coordinate_text();
        assert!(text.starts_with("3 5\n"));
        let b = SparseSymMatrix::from_coordinate_text(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn add_scaled_general_pattern() {
        let a = small();
        let b = SparseSymMatrix::from_triplets(3, &[(0, 2, 1.0), (2, 0, 1.0)]);
        let c = a.add_scaled(&b, 2.0).unwrap();
        assert_eq!(c.get(0, 2), 2.0);
        assert_eq!(c.get(1, 1), 2.0);
    }
}
