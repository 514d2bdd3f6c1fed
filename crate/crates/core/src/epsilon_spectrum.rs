//! Spectrum of the high-contrast problem for fixed ε, assembled from the
//! cross-sectional pencils of the vertical modes `sin(jπx₃/L)`, plus the
//! unseparated Kronecker oracle and the comparison with the limit spectrum.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::{dense_eigen_oracle, smallest_eigenpairs_with, EigenPair, LanczosOptions, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::fem_assembly::{
    assemble_1d, assemble_dirichlet_disk, assemble_weighted_mass, discrete_1d_eigenvalues, ModeParts,
};
use crate::limit_spectrum::{limit_eigenfunction, limit_eigenvalues, mu0_lower_bound, DispersionParams, LimitRoot};
use crate::mesh2d::{generate_mesh, CellGeometry, Material, TriMesh};

/// Lowest eigenpairs of the cross-sectional pencil of vertical mode `j`.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub eps: f64,
    pub j: usize,
    pub gamma: f64,
    pub pairs: Vec<EigenPair>,
}

impl ModeSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn lowest(&self) -> f64 {
        self.pairs[0].value
    }
}

/// `γ_j = (jπ/L)²`
pub fn vertical_gamma(j: usize, length: f64) -> f64 {
    (j as f64 * PI / length).powi(2)
}

fn solve_mode(parts: &ModeParts, j: usize, gamma: f64, count: usize, opts: &LanczosOptions) -> Result<ModeSpectrum> {
    let pencil = parts.pencil(gamma)?;
    let pairs = smallest_eigenpairs_with(&pencil.k, &pencil.m, count, opts)?;
    Ok(ModeSpectrum {
        eps: parts.eps,
        j,
        gamma,
        pairs,
    })
}

pub fn mode_spectrum(
    mesh: &TriMesh,
    eps: f64,
    j: usize,
    length: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<ModeSpectrum> {
    if j == 0 {
        return Err(Error::InvalidArgument("vertical mode index starts at 1".into()));
    }
    let parts = ModeParts::assemble(mesh, eps)?;
    solve_mode(&parts, j, vertical_gamma(j, length), count, opts)
}

/// One entry of the merged spectrum: `rank` counts from 0 within mode `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergedValue {
    pub value: f64,
    pub j: usize,
    pub rank: usize,
}

/// Globally sorted merge of mode spectra, ties broken by `(λ, j)`. Fails
/// when the `k_total`-th value exceeds the lowest value of the highest mode,
/// because an omitted mode could then contribute.
pub fn merge_modes(spectra: &[ModeSpectrum], k_total: usize) -> Result<Vec<MergedValue>> {
    let mut all: Vec<MergedValue> = spectra
        .iter()
        .flat_map(|s| {
            s.pairs.iter().enumerate().map(move |(rank, p)| MergedValue {
                value: p.value,
                j: s.j,
                rank,
            })
        })
        .collect();
    all.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.j.cmp(&b.j))
            .then(a.rank.cmp(&b.rank))
    });
    if all.len() < k_total {
        return Err(Error::InvalidArgument(format!(
            "{} mode eigenvalues available, {k_total} requested",
            all.len()
        )));
    }
    all.truncate(k_total);
    if let Some(top) = spectra.iter().max_by_key(|s| s.j) {
        let last = all[k_total - 1].value;
        if last > top.lowest() {
            return Err(Error::InsufficientModes {
                j_max: top.j,
                last,
                lowest: top.lowest(),
            });
        }
    }
    Ok(all)
}

/// Mode spectra for `j = 1..=j_max` at one ε, solved in parallel.
pub fn mode_spectra(
    parts: &ModeParts,
    length: f64,
    js: std::ops::RangeInclusive<usize>,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<ModeSpectrum>> {
    js.into_par_iter()
        .map(|j| solve_mode(parts, j, vertical_gamma(j, length), count, opts))
        .collect()
}

pub fn merged_spectrum(
    mesh: &TriMesh,
    eps: f64,
    length: f64,
    j_max: usize,
    k_total: usize,
    opts: &LanczosOptions,
) -> Result<Vec<MergedValue>> {
    if j_max == 0 || k_total == 0 {
        return Err(Error::InvalidArgument("j_max and k_total must be at least 1".into()));
    }
    let parts = ModeParts::assemble(mesh, eps)?;
    let spectra = mode_spectra(&parts, length, 1..=j_max, k_total, opts)?;
    merge_modes(&spectra, k_total)
}

/// Like [`merged_spectrum`], but adds vertical modes beyond `j_start` until
/// the merge is complete. Returns the merge and every mode spectrum solved.
pub fn merged_spectrum_auto(
    parts: &ModeParts,
    length: f64,
    j_start: usize,
    k_total: usize,
    opts: &LanczosOptions,
) -> Result<(Vec<MergedValue>, Vec<ModeSpectrum>)> {
    let step = j_start.max(1);
    let mut spectra = mode_spectra(parts, length, 1..=step, k_total, opts)?;
    loop {
        match merge_modes(&spectra, k_total) {
            Ok(merged) => return Ok((merged, spectra)),
            Err(Error::InsufficientModes { j_max, .. }) => {
                info!("eps {} raising j_max beyond {}", parts.eps, j_max);
                let more = mode_spectra(parts, length, j_max + 1..=j_max + step, k_total, opts)?;
                spectra.extend(more);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Smallest `count` eigenvalues of the unseparated pencil
/// `K_w(1,ε⁻²) ⊗ M1 + M_w(ε²,1) ⊗ K1` against `M_w(1,1) ⊗ M1`, with `n1d`
/// vertical intervals. Dense for at most [`DENSE_LIMIT`] unknowns, Lanczos
/// beyond.
pub fn kron_3d_oracle(
    mesh: &TriMesh,
    n1d: usize,
    eps: f64,
    length: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<f64>> {
    const MAX_UNKNOWNS: usize = 60_000;
    let n = mesh.n_vertices() * n1d.saturating_sub(1);
    if n > MAX_UNKNOWNS {
        return Err(Error::TooLarge { n, limit: MAX_UNKNOWNS });
    }
    let parts = ModeParts::assemble(mesh, eps)?;
    let (k1, m1) = assemble_1d(n1d, length)?;
    let k3 = parts.lateral.kron(&m1).add_scaled(&parts.vertical.kron(&k1), 1.0)?;
    let m3 = parts.mass.kron(&m1);
    if n <= DENSE_LIMIT {
        let mut values = dense_eigen_oracle(&k3, &m3)?.values;
        values.truncate(count);
        return Ok(values);
    }
    Ok(smallest_eigenpairs_with(&k3, &m3, count, opts)?
        .into_iter()
        .map(|p| p.value)
        .collect())
}

/// Merge over the discrete vertical modes `γ_j^h` of `(K1, M1)` of the
/// cross-sectional spectra: the separated counterpart of [`kron_3d_oracle`].
pub fn separated_discrete_spectrum(
    mesh: &TriMesh,
    n1d: usize,
    eps: f64,
    length: f64,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<f64>> {
    let parts = ModeParts::assemble(mesh, eps)?;
    let gammas = discrete_1d_eigenvalues(n1d, length);
    let per_mode = count.min(mesh.n_vertices() - 1);
    let mut values: Vec<f64> = Vec::new();
    for (idx, &gamma) in gammas.iter().enumerate() {
        let spectrum = solve_mode(&parts, idx + 1, gamma, per_mode, opts)?;
        let lowest = spectrum.lowest();
        values.extend(spectrum.values());
        values.sort_by(f64::total_cmp);
        values.truncate(count);
        // higher γ shift every value up
        if values.len() == count && lowest >= values[count - 1] {
            break;
        }
    }
    Ok(values)
}

/// Relative L² errors of a cross-sectional eigenvector against the limit
/// profile: `e_f` on the fiber, `e_m` on the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileErrors {
    pub e_f: f64,
    pub e_m: f64,
    /// Scale applied to the FEM vector before comparison.
    pub alpha: f64,
}

/// Fiber and matrix mass matrices used by [`eigenvector_error`].
pub struct PhaseMasses {
    pub fiber: crate::sparse::SparseSymMatrix,
    pub matrix: crate::sparse::SparseSymMatrix,
}

impl PhaseMasses {
    pub fn assemble(mesh: &TriMesh) -> Result<Self> {
        let phase = |material: Material| -> Result<crate::sparse::SparseSymMatrix> {
            let mut part = mesh.clone();
            let keep: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| mesh.tags[t] == material).collect();
            part.triangles = keep.iter().map(|&t| mesh.triangles[t]).collect();
            part.tags = vec![material; keep.len()];
            assemble_weighted_mass(&part, 1.0, 1.0)
        };
        Ok(Self {
            fiber: phase(Material::Fiber)?,
            matrix: phase(Material::Matrix)?,
        })
    }
}

/// Compares eigenvector `w` of mode `j` with the limit profile of `root`.
/// The vertical factor `v_j` is common to both fields and cancels.
pub fn eigenvector_error(
    w: &[f64],
    j: usize,
    root: &LimitRoot,
    params: &DispersionParams,
    mesh: &TriMesh,
    masses: &PhaseMasses,
) -> Result<ProfileErrors> {
    if j != root.j {
        return Err(Error::InvalidArgument(format!(
            "eigenvector of mode {j} compared with limit root of mode {}",
            root.j
        )));
    }
    if w.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(
            "eigenvector length does not match the mesh".into(),
        ));
    }
    let field = limit_eigenfunction(root, params);
    let target: Vec<f64> = mesh.vertices.iter().map(|&y| field.profile(y)).collect();
    // scale fixed on the matrix, where the limit profile is the constant 1
    let ones = vec![1.0; w.len()];
    let alpha = masses.matrix.bilinear(w, &ones) / masses.matrix.bilinear(w, w);
    let diff: Vec<f64> = w.iter().zip(&target).map(|(a, b)| alpha * a - b).collect();
    Ok(ProfileErrors {
        e_f: (masses.fiber.bilinear(&diff, &diff) / masses.fiber.bilinear(&target, &target)).sqrt(),
        e_m: (masses.matrix.bilinear(&diff, &diff) / masses.matrix.bilinear(&ones, &ones)).sqrt(),
        alpha,
    })
}

/// First Dirichlet eigenvalue of the fiber disk on `mesh`.
pub fn discrete_mu1(mesh: &TriMesh, opts: &LanczosOptions) -> Result<f64> {
    let disk = assemble_dirichlet_disk(mesh)?;
    Ok(smallest_eigenpairs_with(&disk.k, &disk.m, 1, opts)?[0].value)
}

/// Inputs of [`convergence_sweep`].
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub geometry: CellGeometry,
    pub n_div: usize,
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Initial number of vertical modes; raised automatically when needed.
    pub j_max: usize,
    pub k_total: usize,
    pub n_terms: usize,
    pub lanczos: LanczosOptions,
}

/// One row per `(ε, k)`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub eps: f64,
    /// Position in the merged spectrum, from 1.
    pub k: usize,
    pub j: usize,
    pub rank: usize,
    pub lambda_eps: f64,
    /// `μ₁ + ε²(kπ/L)²`
    pub bound: f64,
    pub slack: f64,
    /// Limit root of mode `j`; only rank-0 values have one.
    pub lambda_limit: Option<f64>,
    pub gap: Option<f64>,
    pub e_f: Option<f64>,
    pub e_m: Option<f64>,
    /// Cluster width of the value within its own mode spectrum.
    pub cluster_width: usize,
}

/// Lowest eigenvalue of mode `j` at each ε, paired by label with root `j`.
#[derive(Debug, Clone, Serialize)]
pub struct LabelTrack {
    pub j: usize,
    pub lambda_limit: f64,
    pub lambda_eps: Vec<f64>,
    pub gap: Vec<f64>,
    pub e_f: Vec<f64>,
    pub e_m: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub geometry: CellGeometry,
    pub n_div: usize,
    pub mesh_hash: String,
    pub eps_list: Vec<f64>,
    pub k_total: usize,
    /// Highest vertical mode solved for each ε.
    pub j_max_used: Vec<usize>,
    pub mu1: f64,
    /// Same-mesh Dirichlet disk eigenvalue.
    pub mu1_h: f64,
    /// `μ₁^h − μ₁`
    pub c_h: f64,
    pub mu0: f64,
    pub roots: Vec<LimitRoot>,
    pub rows: Vec<ReportRow>,
    pub tracks: Vec<LabelTrack>,
}

/// Cluster tolerance used for the `cluster_width` column.
pub const CLUSTER_TOL: f64 = 1e-8;

pub fn convergence_sweep(settings: &SweepSettings) -> Result<ConvergenceReport> {
    let s = settings;
    if s.eps_list.is_empty() {
        return Err(Error::InvalidArgument("eps_list is empty".into()));
    }
    if s.eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("eps_list must be strictly decreasing".into()));
    }
    if s.k_total == 0 || s.j_max == 0 {
        return Err(Error::InvalidArgument("j_max and k_total must be at least 1".into()));
    }
    let mesh = generate_mesh(&s.geometry, s.n_div)?;
    let params = DispersionParams::new(s.geometry, s.n_terms)?;
    let masses = PhaseMasses::assemble(&mesh)?;
    let length = s.geometry.height;
    let mu1_h = discrete_mu1(&mesh, &s.lanczos)?;

    let mut per_eps = Vec::with_capacity(s.eps_list.len());
    for &eps in &s.eps_list {
        let parts = ModeParts::assemble(&mesh, eps)?;
        let (merged, spectra) = merged_spectrum_auto(&parts, length, s.j_max, s.k_total, &s.lanczos)?;
        info!("eps {eps}: merged {} values from {} modes", merged.len(), spectra.len());
        per_eps.push((eps, parts, merged, spectra));
    }
    // every ε gets the same set of modes so labels can be tracked across the list
    let j_needed = per_eps.iter().map(|p| p.3.len()).max().unwrap_or(1);
    for (_, parts, _, spectra) in per_eps.iter_mut() {
        if spectra.len() < j_needed {
            let more = mode_spectra(parts, length, spectra.len() + 1..=j_needed, s.k_total, &s.lanczos)?;
            spectra.extend(more);
        }
    }
    let per_eps: Vec<(f64, Vec<MergedValue>, Vec<ModeSpectrum>)> =
        per_eps.into_iter().map(|(e, _, m, sp)| (e, m, sp)).collect();
    let roots = limit_eigenvalues(&params, j_needed)?;

    let mut rows = Vec::new();
    for (eps, merged, spectra) in &per_eps {
        for (idx, m) in merged.iter().enumerate() {
            let k = idx + 1;
            let spectrum = spectra
                .iter()
                .find(|sp| sp.j == m.j)
                .expect("merged label has a spectrum");
            let bound = params.mu1 + eps * eps * vertical_gamma(k, length);
            let widths = crate::eigensolve::cluster_widths(&spectrum.values(), CLUSTER_TOL);
            let (lambda_limit, gap, e_f, e_m) = if m.rank == 0 {
                let root = &roots[m.j - 1];
                let err = eigenvector_error(&spectrum.pairs[0].vector, m.j, root, &params, &mesh, &masses)?;
                (
                    Some(root.lambda),
                    Some((m.value - root.lambda).abs()),
                    Some(err.e_f),
                    Some(err.e_m),
                )
            } else {
                (None, None, None, None)
            };
            rows.push(ReportRow {
                eps: *eps,
                k,
                j: m.j,
                rank: m.rank,
                lambda_eps: m.value,
                bound,
                slack: bound - m.value,
                lambda_limit,
                gap,
                e_f,
                e_m,
                cluster_width: widths[m.rank],
            });
        }
    }

    let track_count = s.k_total.min(roots.len());
    let mut tracks = Vec::with_capacity(track_count);
    for root in roots.iter().take(track_count) {
        let mut track = LabelTrack {
            j: root.j,
            lambda_limit: root.lambda,
            lambda_eps: vec![],
            gap: vec![],
            e_f: vec![],
            e_m: vec![],
        };
        for (_, _, spectra) in &per_eps {
            let spectrum = spectra
                .iter()
                .find(|sp| sp.j == root.j)
                .expect("mode solved for every tracked label");
            let value = spectrum.lowest();
            let err = eigenvector_error(&spectrum.pairs[0].vector, root.j, root, &params, &mesh, &masses)?;
            track.lambda_eps.push(value);
            track.gap.push((value - root.lambda).abs());
            track.e_f.push(err.e_f);
            track.e_m.push(err.e_m);
        }
        tracks.push(track);
    }

    Ok(ConvergenceReport {
        geometry: s.geometry,
        n_div: s.n_div,
        mesh_hash: mesh.content_hash(),
        eps_list: s.eps_list.clone(),
        k_total: s.k_total,
        j_max_used: per_eps.iter().map(|(_, _, sp)| sp.len()).collect(),
        mu1: params.mu1,
        mu1_h,
        c_h: mu1_h - params.mu1,
        mu0: mu0_lower_bound(&params)?,
        roots,
        rows,
        tracks,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl ConvergenceReport {
    /// CSV table `eps,k,j,lambda_eps,bound,slack,lambda_limit,gap,e_F,e_M`.
    /// Rows without a limit partner leave the last four fields empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,k,j,lambda_eps,bound,slack,lambda_limit,gap,e_F,e_M\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:.16e},{},{},{:.16e},{:.16e},{:.16e},{},{},{},{}",
                r.eps,
                r.k,
                r.j,
                r.lambda_eps,
                r.bound,
                r.slack,
                opt(r.lambda_limit),
                opt(r.gap),
                opt(r.e_f),
                opt(r.e_m)
            );
        }
        out
    }
}

/// CSV table of a merged spectrum `k,j,rank,lambda`.
pub fn merged_csv(merged: &[MergedValue]) -> String {
    let mut out = String::from("k,j,rank,lambda\n");
    for (i, m) in merged.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{:.16e}", i + 1, m.j, m.rank, m.value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> LanczosOptions {
        LanczosOptions::default()
    }

    fn coarse() -> TriMesh {
        generate_mesh(&CellGeometry::default(), 16).unwrap()
    }

    #[test]
    fn uniform_medium_ground_state() {
        let s = mode_spectrum(&coarse(), 1.0, 1, 1.0, 3, &opts()).unwrap();
        assert!((s.lowest() - PI * PI).abs() < 1e-9 * PI * PI);
    }

    #[test]
    fn high_contrast_below_bound() {
        let mesh = coarse();
        let s = mode_spectrum(&mesh, 0.05, 1, 1.0, 2, &opts()).unwrap();
        let mu1 = DispersionParams::new(CellGeometry::default(), 50).unwrap().mu1;
        assert!(s.lowest() < mu1 + 0.05f64.powi(2) * PI * PI);
    }

    #[test]
    fn gamma_only_enters_through_pencil() {
        let mesh = coarse();
        let parts = ModeParts::assemble(&mesh, 0.2).unwrap();
        let a = solve_mode(&parts, 2, vertical_gamma(2, 1.0), 3, &opts()).unwrap();
        let b = mode_spectrum(&mesh, 0.2, 2, 1.0, 3, &opts()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12 * y);
        }
        // mode 3 of a cell of height 1.5 has the γ of mode 2 at height 1
        let c = mode_spectrum(&mesh, 0.2, 3, 1.5, 3, &opts()).unwrap();
        for (x, y) in a.values().iter().zip(c.values()) {
            assert!((x - y).abs() <= 1e-10 * y);
        }
    }

    #[test]
    fn merged_ground_state_from_first_mode() {
        let merged = merged_spectrum(&coarse(), 0.2, 1.0, 3, 1, &opts()).unwrap();
        assert_eq!((merged[0].j, merged[0].rank), (1, 0));
    }

    #[test]
    fn merged_is_sorted_and_bounded() {
        let mesh = coarse();
        let parts = ModeParts::assemble(&mesh, 0.1).unwrap();
        let (merged, _) = merged_spectrum_auto(&parts, 1.0, 6, 5, &opts()).unwrap();
        assert!(merged.windows(2).all(|w| w[0].value <= w[1].value));
        let mu1 = DispersionParams::new(CellGeometry::default(), 50).unwrap().mu1;
        let mu1_h = discrete_mu1(&mesh, &opts()).unwrap();
        for m in &merged {
            assert!(m.value < mu1_h.max(mu1) + 0.01 * vertical_gamma(5, 1.0));
        }
    }

    #[test]
    fn insufficient_modes_detected() {
        // at small ε the merged values come one per mode
        let err = merged_spectrum(&coarse(), 0.05, 1.0, 2, 4, &opts()).unwrap_err();
        assert!(matches!(err, Error::InsufficientModes { j_max: 2, .. }));
    }

    #[test]
    fn kron_small_dense_matches_separation() {
        let mesh = generate_mesh(&CellGeometry::default(), 8).unwrap();
        for &eps in &[1.0, 0.3] {
            let kron = kron_3d_oracle(&mesh, 6, eps, 1.0, 8, &opts()).unwrap();
            let sep = separated_discrete_spectrum(&mesh, 6, eps, 1.0, 8, &opts()).unwrap();
            for (a, b) in kron.iter().zip(&sep) {
                assert!((a - b).abs() <= 1e-9 * b, "{eps}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvector_errors_and_labels() {
        let mesh = coarse();
        let params = DispersionParams::new(CellGeometry::default(), 100).unwrap();
        let masses = PhaseMasses::assemble(&mesh).unwrap();
        let roots = limit_eigenvalues(&params, 2).unwrap();
        let s = mode_spectrum(&mesh, 1.0, 1, 1.0, 2, &opts()).unwrap();
        let err = eigenvector_error(&s.pairs[0].vector, 1, &roots[0], &params, &mesh, &masses).unwrap();
        // constant eigenfunction: the matrix part is already exact
        assert!(err.e_m < 1e-8);
        assert!(eigenvector_error(&s.pairs[0].vector, 1, &roots[1], &params, &mesh, &masses).is_err());
        let m = ModeParts::assemble(&mesh, 1.0).unwrap().mass;
        assert!(m.bilinear(&s.pairs[0].vector, &s.pairs[1].vector).abs() <= 1e-8);
    }

    #[test]
    fn csv_header() {
        let m = [MergedValue {
            value: 1.0,
            j: 1,
            rank: 0,
        }];
        assert_eq!(merged_csv(&m), "k,j,rank,lambda\n1,1,0,1.0000000000000000e0\n");
    }
}
