//! Oracle-equivalence checks run by the `validate` command.

use serde::Serialize;

use super::config::RunConfig;
use crate::eigensolve::{dense_eigen_oracle, smallest_eigenpairs_with, LanczosOptions, DENSE_LIMIT};
use crate::epsilon_spectrum::{kron_3d_oracle, separated_discrete_spectrum, vertical_gamma};
use crate::error::Result;
use crate::fem_assembly::ModeParts;
use crate::limit_spectrum::{limit_eigenvalues, mean_u0_closed, mean_u0_series, mu0_lower_bound, DispersionParams};
use crate::mesh2d::generate_mesh;

/// Cross-section divisions of the Kronecker check mesh.
pub const KRON_N_DIV: usize = 24;
/// Vertical intervals of the Kronecker check.
pub const KRON_N1D: usize = 16;
pub const KRON_EPS: [f64; 2] = [1.0, 0.2];
pub const KRON_COUNT: usize = 10;
/// Cross-section divisions of the Lanczos-versus-dense check mesh.
pub const DENSE_N_DIV: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest observed error in the units of `tolerance`.
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, max_error: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: max_error <= tolerance,
            max_error,
            tolerance,
            detail,
        }
    }
}

/// 100 points spread over `(0.01μ₁, 0.99μ₁)`.
pub fn lambda_grid(mu1: f64) -> Vec<f64> {
    (0..100).map(|i| mu1 * (0.01 + 0.98 * i as f64 / 99.0)).collect()
}

/// Largest `|S_series − S_closed| − tail` on the grid, to be compared with 1e-8.
pub fn series_closed_excess(params: &DispersionParams) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for l in lambda_grid(params.mu1) {
        let s = mean_u0_series(l, params)?;
        let c = mean_u0_closed(l, params.radius())?;
        worst = worst.max((s.value - c).abs() - s.tail_bound);
    }
    Ok(worst)
}

/// Number of grid points violating `0 < S(λ) ≤ |D|/(μ₁ − λ)`.
pub fn bound_chain_violations(params: &DispersionParams) -> Result<usize> {
    let mut bad = 0;
    for l in lambda_grid(params.mu1) {
        let s = mean_u0_closed(l, params.radius())?;
        if !(s > 0.0 && s <= params.disk_area() / (params.mu1 - l)) {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Largest relative deviation between the first `count` values of the
/// unseparated pencil and the merged separated spectra.
pub fn kron_separation_error(
    config: &RunConfig,
    n_div: usize,
    n1d: usize,
    eps: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<f64> {
    let mesh = generate_mesh(&config.cell_geometry()?, n_div)?;
    let length = config.geometry.length;
    let kron = kron_3d_oracle(&mesh, n1d, eps, length, count, opts)?;
    let sep = separated_discrete_spectrum(&mesh, n1d, eps, length, count, opts)?;
    Ok(kron
        .iter()
        .zip(&sep)
        .map(|(a, b)| (a - b).abs() / b.abs())
        .fold(0.0, f64::max))
}

/// Largest relative deviation between Lanczos and the dense oracle over the
/// mode pencils of a coarse mesh, for every ε in the config and `j ∈ {1, 2}`.
/// Returns the error and the number of pencils compared.
pub fn lanczos_dense_error(
    config: &RunConfig,
    n_div: usize,
    count: usize,
    opts: &LanczosOptions,
) -> Result<(f64, usize)> {
    let mesh = generate_mesh(&config.cell_geometry()?, n_div)?;
    if mesh.n_vertices() > DENSE_LIMIT {
        return Ok((0.0, 0));
    }
    let mut worst = 0.0f64;
    let mut pencils = 0;
    for &eps in &config.eps_list {
        let parts = ModeParts::assemble(&mesh, eps)?;
        for j in 1..=2 {
            let p = parts.pencil(vertical_gamma(j, config.geometry.length))?;
            let dense = dense_eigen_oracle(&p.k, &p.m)?;
            let pairs = smallest_eigenpairs_with(&p.k, &p.m, count, opts)?;
            for (a, b) in pairs.iter().zip(&dense.values) {
                worst = worst.max((a.value - b).abs() / b.abs().max(1.0));
            }
            pencils += 1;
        }
    }
    Ok((worst, pencils))
}

pub fn run_validation(config: &RunConfig) -> Result<Vec<Check>> {
    let params = config.dispersion_params()?;
    let opts = config.lanczos();
    let mut checks = Vec::new();

    let excess = series_closed_excess(&params)?;
    checks.push(Check::new(
        "series_vs_closed",
        excess.max(0.0),
        1e-8,
        format!("100-point grid, n_terms = {}", params.n_terms),
    ));

    let r = params.radius();
    let torsion = std::f64::consts::PI * r.powi(4) / 8.0;
    let s0 = mean_u0_closed(1e-12 * params.mu1, r)?;
    checks.push(Check::new(
        "torsion_limit",
        (s0 - torsion).abs(),
        1e-10,
        format!("S(0+) = {s0:.12e}"),
    ));

    let bad = bound_chain_violations(&params)?;
    checks.push(Check::new("bound_chain", bad as f64, 0.0, format!("{bad} violations")));

    let roots = limit_eigenvalues(&params, 50)?;
    let mu0 = mu0_lower_bound(&params)?;
    let ordered = roots.windows(2).all(|w| w[1].lambda > w[0].lambda);
    let inside = roots.iter().all(|x| x.lambda >= mu0 && x.lambda < params.mu1);
    let residual = roots.iter().map(|x| x.delta_residual).fold(0.0, f64::max);
    let mut root_check = Check::new(
        "limit_roots",
        residual,
        config.root_tol,
        format!("j = 1..50, ordered = {ordered}, inside [mu0, mu1) = {inside}"),
    );
    root_check.passed &= ordered && inside;
    checks.push(root_check);

    let mut kron_worst = 0.0f64;
    for &eps in &KRON_EPS {
        kron_worst = kron_worst.max(kron_separation_error(
            config, KRON_N_DIV, KRON_N1D, eps, KRON_COUNT, &opts,
        )?);
    }
    checks.push(Check::new(
        "kron_vs_merge",
        kron_worst,
        1e-9,
        format!("n_div = {KRON_N_DIV}, n1d = {KRON_N1D}, eps = {KRON_EPS:?}, first {KRON_COUNT} values"),
    ));

    let (dense_worst, pencils) = lanczos_dense_error(config, DENSE_N_DIV, 8, &opts)?;
    checks.push(Check::new(
        "lanczos_vs_dense",
        dense_worst,
        1e-9,
        format!("{pencils} mode pencils at n_div = {DENSE_N_DIV}"),
    ));
    Ok(checks)
}
