//! Lanczos iteration on `K⁻¹M` in the M-inner product with full
//! reorthogonalization, locking and explicit restarts.

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cholesky::{factorize_spd, CholeskyFactor};
use super::dense::symmetric_eigen;
use super::EigenPair;
use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, norm2, SparseSymMatrix};

/// Tuning knobs for [`smallest_eigenpairs_with`].
#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Relative residual `‖Kx − λMx‖ / ‖Kx‖` required for acceptance.
    pub tol: f64,
    /// Lanczos runs before giving up.
    pub max_restarts: usize,
    /// Krylov basis size per run; `None` picks `max(2k + 40, 60)`.
    pub basis_size: Option<usize>,
    /// Seed for the fallback start vectors.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_restarts: 40,
            basis_size: None,
            seed: 0x5eed,
        }
    }
}

struct Locked {
    value: f64,
    vector: Vec<f64>,
    m_vector: Vec<f64>,
    residual: f64,
}

struct Operator<'a> {
    k: &'a SparseSymMatrix,
    m: &'a SparseSymMatrix,
    factor: CholeskyFactor,
}

impl Operator<'_> {
    fn ritz_check(&self, x: &mut [f64]) -> (f64, f64, Vec<f64>) {
        let mut mx = self.m.mul_vec(x);
        let scale = 1.0 / dot(x, &mx).sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
        mx.iter_mut().for_each(|v| *v *= scale);
        let kx = self.k.mul_vec(x);
        let lambda = dot(x, &kx);
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
        let kn = norm2(&kx);
        let residual = if kn > 0.0 { norm2(&r) / kn } else { norm2(&r) };
        (lambda, residual, mx)
    }
}

/// M-orthogonalizes `w` against the locked vectors and the basis, in two
/// passes. Returns the accumulated coefficient on the last basis vector.
fn orthogonalize(w: &mut [f64], locked: &[Locked], basis: &[Vec<f64>], m_basis: &[Vec<f64>]) -> f64 {
    let mut last = 0.0;
    for _ in 0..2 {
        for l in locked {
            let c = dot(&l.m_vector, w);
            axpy(-c, &l.vector, w);
        }
        for (i, (v, mv)) in basis.iter().zip(m_basis).enumerate() {
            let c = dot(mv, w);
            axpy(-c, v, w);
            if i + 1 == basis.len() {
                last += c;
            }
        }
    }
    last
}

/// The `count` smallest eigenpairs of `K x = λ M x`, default options.
pub fn smallest_eigenpairs(k: &SparseSymMatrix, m: &SparseSymMatrix, count: usize, tol: f64) -> Result<Vec<EigenPair>> {
    let opts = LanczosOptions {
        tol,
        ..LanczosOptions::default()
    };
    smallest_eigenpairs_with(k, m, count, &opts)
}

pub fn smallest_eigenpairs_with(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<EigenPair>> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::InvalidArgument("pencil dimension mismatch".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("eigenpair count must be at least 1".into()));
    }
    if count >= n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs of a pencil of dimension {n}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    // M must be SPD too; the factor itself is discarded
    factorize_spd(m)?;
    let op = Operator {
        k,
        m,
        factor: factorize_spd(k)?,
    };
    let cap = opts.basis_size.unwrap_or((2 * count + 40).max(60)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut locked: Vec<Locked> = Vec::new();
    let mut start = vec![1.0; n];
    // set once `count` pairs are locked: the next run looks for anything missed below them
    let mut verifying = false;
    let mut done = false;

    for run in 0..opts.max_restarts {
        let kth_before = kth_locked(&locked, count);
        let need = count.saturating_sub(locked.len());
        let (basis, alpha, beta) = lanczos_run(&op, &locked, &start, cap, n, &mut rng);

        // Ritz pairs of the tridiagonal projection, θ descending
        let size = basis.len();
        let mut t = vec![0.0; size * size];
        for i in 0..size {
            t[i * size + i] = alpha[i];
            if i + 1 < size {
                t[i * size + i + 1] = beta[i];
                t[(i + 1) * size + i] = beta[i];
            }
        }
        let eig = symmetric_eigen(&mut t, size)?;
        let want = need.max(1);
        let mut unconverged: Vec<Vec<f64>> = Vec::new();
        let mut best_residual = f64::INFINITY;
        let mut ritz_min = f64::INFINITY;
        let mut found_below = false;
        let mut top_converged = false;
        for (idx, (theta, y)) in eig.values.iter().zip(&eig.vectors).rev().enumerate() {
            let lambda_est = 1.0 / theta;
            if idx >= want && !(lambda_est < kth_locked(&locked, count)) {
                break;
            }
            let mut x = vec![0.0; n];
            for (c, b) in y.iter().zip(&basis) {
                axpy(*c, b, &mut x);
            }
            let (lambda, residual, mx) = op.ritz_check(&mut x);
            ritz_min = ritz_min.min(lambda);
            best_residual = best_residual.min(residual);
            if lambda < kth_before {
                found_below = true;
            }
            if residual <= opts.tol {
                if idx == 0 {
                    top_converged = true;
                }
                locked.push(Locked {
                    value: lambda,
                    vector: x,
                    m_vector: mx,
                    residual,
                });
            } else {
                unconverged.push(x);
            }
        }
        debug!(
            "iter {} residual {:.3e} ritz_min {:.15e} locked {} basis {}",
            run,
            best_residual,
            ritz_min,
            locked.len(),
            size
        );

        if verifying && top_converged && !found_below {
            done = true;
            break;
        }
        verifying = locked.len() >= count;
        if locked.len() >= n {
            done = verifying;
            break;
        }
        start = if unconverged.is_empty() {
            random_start(&mut rng, n)
        } else {
            sum_vectors(&unconverged, n)
        };
    }
    if !done {
        return Err(Error::NotConverged(format!(
            "{} of {count} eigenpairs verified after {} Lanczos runs",
            locked.len().min(count),
            opts.max_restarts
        )));
    }

    locked.sort_by(|a, b| a.value.total_cmp(&b.value));
    locked.truncate(count);
    let mut pairs: Vec<EigenPair> = locked
        .into_iter()
        .map(|l| EigenPair {
            value: l.value,
            vector: l.vector,
            residual: l.residual,
        })
        .collect();
    super::normalize_clusters(&mut pairs, 1e-9);
    Ok(pairs)
}

fn kth_locked(locked: &[Locked], count: usize) -> f64 {
    if locked.len() < count {
        return f64::INFINITY;
    }
    let mut values: Vec<f64> = locked.iter().map(|l| l.value).collect();
    values.sort_by(f64::total_cmp);
    values[count - 1]
}

fn sum_vectors(vectors: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut s = vec![0.0; n];
    for v in vectors {
        axpy(1.0, v, &mut s);
    }
    s
}

fn random_start(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// One Lanczos run of at most `cap` steps on the deflated operator. Returns
/// the M-orthonormal basis and the tridiagonal coefficients.
fn lanczos_run(
    op: &Operator<'_>,
    locked: &[Locked],
    start: &[f64],
    cap: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let capacity = cap.min(n - locked.len());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(capacity);
    let mut m_basis: Vec<Vec<f64>> = Vec::with_capacity(capacity);
    let mut alpha = Vec::with_capacity(capacity);
    let mut beta = Vec::with_capacity(capacity);
    let mut v = start.to_vec();
    orthogonalize(&mut v, locked, &[], &[]);
    let mut mv = op.m.mul_vec(&v);
    let mut norm = dot(&v, &mv).max(0.0).sqrt();
    if !(norm > 1e-150 * norm2(start).max(1.0)) {
        v = random_start(rng, n);
        orthogonalize(&mut v, locked, &[], &[]);
        mv = op.m.mul_vec(&v);
        norm = dot(&v, &mv).max(0.0).sqrt();
    }
    let mut scale_ref = 0.0f64;
    while basis.len() < capacity {
        v.iter_mut().for_each(|x| *x /= norm);
        mv.iter_mut().for_each(|x| *x /= norm);
        let mut w = op.factor.solve(&mv);
        basis.push(v);
        m_basis.push(mv);
        let a = orthogonalize(&mut w, locked, &basis, &m_basis);
        alpha.push(a);
        scale_ref = scale_ref.max(a.abs());
        if basis.len() == capacity {
            break;
        }
        let mw = op.m.mul_vec(&w);
        let b = dot(&w, &mw).max(0.0).sqrt();
        if b > 1e-13 * scale_ref {
            beta.push(b);
            v = w;
            mv = mw;
            norm = b;
            continue;
        }
        // invariant subspace found: continue from a fresh direction
        let mut fresh = random_start(rng, n);
        orthogonalize(&mut fresh, locked, &basis, &m_basis);
        let m_fresh = op.m.mul_vec(&fresh);
        let f = dot(&fresh, &m_fresh).max(0.0).sqrt();
        if !(f > 1e-10) {
            break;
        }
        beta.push(0.0);
        v = fresh;
        mv = m_fresh;
        norm = f;
    }
    (basis, alpha, beta)
}
