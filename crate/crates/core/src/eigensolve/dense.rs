//! Dense symmetric eigensolvers: Householder tridiagonalization followed by
//! implicit QL, and the Cholesky reduction of a definite pencil.

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

/// Largest dimension accepted by [`dense_eigen_oracle`].
pub const DENSE_LIMIT: usize = 2000;

/// Full eigendecomposition, values ascending. `vectors[i]` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Eigendecomposition of a symmetric row-major matrix. `a` is overwritten.
pub fn symmetric_eigen(a: &mut [f64], n: usize) -> Result<DenseEigen> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(DenseEigen {
            values: vec![],
            vectors: vec![],
        });
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(a, n, &mut d, &mut e);
    // rows of z are the eigenvectors once QL is done
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            z[i * n + k] = a[k * n + i];
        }
    }
    tridiagonal_ql(&mut d, &mut e, &mut z, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    Ok(DenseEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors: order.iter().map(|&i| z[i * n..(i + 1) * n].to_vec()).collect(),
    })
}

/// Householder reduction; on exit `a` holds the accumulated orthogonal
/// transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    a[idx(j, i)] = a[idx(i, j)] / h;
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let g: f64 = (0..i).map(|k| a[idx(i, k)] * a[idx(k, j)]).sum();
                for k in 0..i {
                    a[idx(k, j)] -= g * a[idx(k, i)];
                }
            }
        }
        d[i] = a[idx(i, i)];
        a[idx(i, i)] = 1.0;
        for j in 0..i {
            a[idx(j, i)] = 0.0;
            a[idx(i, j)] = 0.0;
        }
    }
}

/// Implicit QL with Wilkinson-type shifts; rotations are applied to rows of `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NotConverged("tridiagonal QL exceeded 60 sweeps".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..];
                let zi1 = &mut hi[..n];
                for k in 0..n {
                    let f = zi1[k];
                    zi1[k] = s * zi[k] + c * f;
                    zi[k] = c * zi[k] - s * f;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Dense lower Cholesky factor of a row-major SPD matrix.
pub fn dense_cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let pivot = a[i * n + i] - s;
                if !(pivot > 0.0) || !pivot.is_finite() {
                    return Err(Error::NotPositiveDefinite { row: i, pivot });
                }
                l[i * n + i] = pivot.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// All eigenpairs of `K x = λ M x` for dense row-major `K`, `M`. Vectors are
/// M-orthonormal.
pub fn dense_generalized(k: &[f64], m: &[f64], n: usize) -> Result<DenseEigen> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let l = dense_cholesky(m, n)?;
    // X = L⁻¹ K, column by column (forward substitution on rows of Kᵀ = K)
    let forward = |src: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for col in 0..n {
            for i in 0..n {
                let s: f64 = (0..i).map(|q| l[i * n + q] * out[q * n + col]).sum();
                out[i * n + col] = (src[i * n + col] - s) / l[i * n + i];
            }
        }
        out
    };
    let x = forward(k);
    let mut xt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            xt[j * n + i] = x[i * n + j];
        }
    }
    let mut c = forward(&xt);
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = avg;
            c[j * n + i] = avg;
        }
    }
    let mut eig = symmetric_eigen(&mut c, n)?;
    for y in &mut eig.vectors {
        // x = L⁻ᵀ y
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|q| l[q * n + i] * y[q]).sum();
            y[i] = (y[i] - s) / l[i * n + i];
        }
    }
    Ok(eig)
}

/// Brute-force spectrum of a sparse pencil for `n <= DENSE_LIMIT`. Values are
/// the Rayleigh quotients of the computed vectors, which removes the
/// `ε_mach·λ_max` error of the reduced problem from the low end.
pub fn dense_eigen_oracle(k: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<DenseEigen> {
    let n = k.dim();
    if n != m.dim() {
        return Err(Error::InvalidArgument("pencil dimension mismatch".into()));
    }
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let mut eig = dense_generalized(&k.to_dense(), &m.to_dense(), n)?;
    for (value, v) in eig.values.iter_mut().zip(&eig.vectors) {
        *value = k.bilinear(v, v) / m.bilinear(v, v);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));
    Ok(DenseEigen {
        values: order.iter().map(|&i| eig.values[i]).collect(),
        vectors: order.iter().map(|&i| std::mem::take(&mut eig.vectors[i])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_pencil() {
        let k = SparseSymMatrix::from_diagonal(&[2.0, 8.0]);
        let m = SparseSymMatrix::from_diagonal(&[1.0, 2.0]);
        let eig = dense_eigen_oracle(&k, &m).unwrap();
        assert!((eig.values[0] - 2.0).abs() < 1e-14);
        assert!((eig.values[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_mass_rejected() {
        let k = SparseSymMatrix::identity(2);
        let m = SparseSymMatrix::from_diagonal(&[1.0, -2.0]);
        assert!(dense_eigen_oracle(&k, &m).is_err());
    }

    #[test]
    fn too_large_rejected() {
        let k = SparseSymMatrix::identity(DENSE_LIMIT + 1);
        assert!(matches!(dense_eigen_oracle(&k, &k), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 37;
        let mut a = vec![0.0; n * n];
        let mut state = 12345u64;
        for i in 0..n {
            for j in 0..=i {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let v = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let original = a.clone();
        let eig = symmetric_eigen(&mut a, n).unwrap();
        for (lam, v) in eig.values.iter().zip(&eig.vectors) {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| original[i * n + j] * v[j]).sum();
                assert!((av - lam * v[i]).abs() < 1e-12);
            }
        }
        for p in 0..n {
            for q in 0..n {
                let d: f64 = (0..n).map(|i| eig.vectors[p][i] * eig.vectors[q][i]).sum();
                let expected = if p == q { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-12);
            }
        }
        let trace: f64 = (0..n).map(|i| original[i * n + i]).sum();
        assert!((eig.values.iter().sum::<f64>() - trace).abs() < 1e-12);
    }

    #[test]
    fn one_d_pencil_closed_form() {
        let (k, m) = crate::fem_assembly::assemble_1d(20, 1.0).unwrap();
        let eig = dense_eigen_oracle(&k, &m).unwrap();
        let exact = crate::fem_assembly::discrete_1d_eigenvalues(20, 1.0);
        for (a, b) in eig.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10 * b);
        }
        // M-orthonormal vectors
        let mv = m.mul_vec(&eig.vectors[3]);
        assert!((crate::sparse::dot(&eig.vectors[3], &mv) - 1.0).abs() < 1e-12);
        assert!(crate::sparse::dot(&eig.vectors[2], &mv).abs() < 1e-12);
    }
}
