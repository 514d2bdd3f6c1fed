//! Envelope (skyline) Cholesky factorization with reverse Cuthill–McKee
//! ordering.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

/// Reverse Cuthill–McKee permutation, `perm[new] = old`. Each connected
/// component starts from a pseudo-peripheral node.
pub fn rcm_ordering(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.dim();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adjacency, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adjacency: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut level = vec![usize::MAX; adjacency.len()];
    let mut reached = vec![start];
    level[start] = 0;
    let mut head = 0;
    while head < reached.len() {
        let v = reached[head];
        head += 1;
        for &u in &adjacency[v] {
            if level[u] == usize::MAX {
                level[u] = level[v] + 1;
                reached.push(u);
            }
        }
    }
    (level, reached)
}

fn pseudo_peripheral(seed: usize, adjacency: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut current = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let (level, reached) = bfs_levels(current, adjacency);
        let ecc = reached.iter().map(|&v| level[v]).max().unwrap_or(0);
        if ecc <= depth && current != seed {
            break;
        }
        depth = ecc;
        let candidate = reached
            .iter()
            .copied()
            .filter(|&v| level[v] == ecc)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(current);
        if candidate == current {
            break;
        }
        current = candidate;
    }
    current
}

/// `P A Pᵀ = L Lᵀ` stored row-wise over the envelope of the permuted matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` (envelope size).
    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offset[i]..self.offset[i + 1]]
    }

    /// Diagonal of `L` in permuted order.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| *self.row(i).last().unwrap()).collect()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.solve_permuted_in_place(&mut x);
        let mut out = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    fn solve_permuted_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let row = self.row(i);
            let f = self.first[i];
            let len = row.len() - 1;
            let s: f64 = row[..len].iter().zip(&x[f..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - s) / row[len];
        }
        for i in (0..self.n).rev() {
            let row = self.row(i);
            let f = self.first[i];
            let len = row.len() - 1;
            x[i] /= row[len];
            let xi = x[i];
            for (xk, l) in x[f..i].iter_mut().zip(&row[..len]) {
                *xk -= l * xi;
            }
        }
    }
}

/// Sparse Cholesky factorization with RCM fill-reducing ordering.
pub fn factorize_spd(a: &SparseSymMatrix) -> Result<CholeskyFactor> {
    let perm = rcm_ordering(a);
    factorize_with_ordering(a, perm)
}

pub fn factorize_with_ordering(a: &SparseSymMatrix, perm: Vec<usize>) -> Result<CholeskyFactor> {
    let n = a.dim();
    let mut inverse = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let mut first: Vec<usize> = (0..n).collect();
    for (new, &old) in perm.iter().enumerate() {
        for (j, _) in a.row(old) {
            let jn = inverse[j];
            if jn < first[new] {
                first[new] = jn;
            }
        }
    }
    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0);
    for i in 0..n {
        offset.push(offset[i] + i - first[i] + 1);
    }
    let mut data = vec![0.0; offset[n]];
    for (new, &old) in perm.iter().enumerate() {
        for (j, v) in a.row(old) {
            let jn = inverse[j];
            if jn <= new {
                data[offset[new] + jn - first[new]] += v;
            }
        }
    }

    for i in 0..n {
        let fi = first[i];
        let (done, rest) = data.split_at_mut(offset[i]);
        let row_i = &mut rest[..i - fi + 1];
        for j in fi..i {
            let fj = first[j];
            let row_j = &done[offset[j]..offset[j + 1]];
            let k0 = fi.max(fj);
            let s: f64 = row_i[k0 - fi..j - fi]
                .iter()
                .zip(&row_j[k0 - fj..j - fj])
                .map(|(a, b)| a * b)
                .sum();
            let ljj = row_j[j - fj];
            row_i[j - fi] = (row_i[j - fi] - s) / ljj;
        }
        let diag = row_i[i - fi];
        let s: f64 = row_i[..i - fi].iter().map(|v| v * v).sum();
        let pivot = diag - s;
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { row: perm[i], pivot });
        }
        row_i[i - fi] = pivot.sqrt();
    }
    Ok(CholeskyFactor {
        n,
        perm,
        first,
        offset,
        data,
    })
}
