//! P1 finite-element matrices with material-dependent weights.
//!
//! The cross-sectional operator is assembled with exact element formulas. For
//! a field `w(y) sin(jπx₃/L)` the weak form of the cell problem separates
//! into the 2D pencil
//!
//! ```text
//! K = K_w(1, ε⁻²) + γ_j M_w(ε², 1),   M = M_w(1, 1),   γ_j = (jπ/L)²
//! ```
//!
//! where `K_w(a, b)` / `M_w(a, b)` weight fiber elements by `a` and matrix
//! elements by `b`. The lateral boundary of the cell carries the natural
//! (Neumann) condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh2d::{Material, TriMesh};
use crate::sparse::SparseSymMatrix;

/// Triangles with smaller area than this (relative to the squared longest
/// edge) are treated as degenerate.
const DEGENERATE_RATIO: f64 = 1e-14;

/// Material weights for one assembly pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub fiber: f64,
    pub matrix: f64,
}

impl Weights {
    pub fn new(fiber: f64, matrix: f64) -> Self {
        Self { fiber, matrix }
    }

    pub fn of(&self, material: Material) -> f64 {
        match material {
            Material::Fiber => self.fiber,
            Material::Matrix => self.matrix,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.fiber > 0.0 && self.matrix > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "material weights must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Element stiffness `∫_T ∇φ_i·∇φ_j` for a P1 triangle, and its area.
pub fn element_stiffness(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut ke = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    (ke, area)
}

/// Consistent P1 mass matrix `area/12 [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn element_points(mesh: &TriMesh, t: usize) -> Result<[[f64; 2]; 3]> {
    let p = mesh.triangles[t].map(|i| mesh.vertices[i]);
    let area = mesh.signed_area(t);
    let longest = (0..3)
        .map(|e| {
            let (a, b) = (p[e], p[(e + 1) % 3]);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        })
        .fold(0.0, f64::max);
    if area.abs() <= DEGENERATE_RATIO * longest || !area.is_finite() {
        return Err(Error::DegenerateTriangle(t, area));
    }
    Ok(p)
}

fn assemble<F>(mesh: &TriMesh, weights: Weights, element: F) -> Result<SparseSymMatrix>
where
    F: Fn([[f64; 2]; 3]) -> [[f64; 3]; 3],
{
    weights.validate()?;
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = element_points(mesh, t)?;
        let w = weights.of(mesh.tags[t]);
        let ke = element(p);
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], w * ke[a][b]));
            }
        }
    }
    Ok(SparseSymMatrix::from_triplets(mesh.n_vertices(), &triplets))
}

/// `Σ_T w(tag_T) ∫_T ∇φ_i·∇φ_j`
pub fn assemble_weighted_stiffness(mesh: &TriMesh, w_fiber: f64, w_matrix: f64) -> Result<SparseSymMatrix> {
    assemble(mesh, Weights::new(w_fiber, w_matrix), |p| {
        let (ke, area) = element_stiffness(p);
        if area < 0.0 {
            ke.map(|row| row.map(|v| -v))
        } else {
            ke
        }
    })
}

/// `Σ_T w(tag_T) ∫_T φ_i φ_j`
pub fn assemble_weighted_mass(mesh: &TriMesh, w_fiber: f64, w_matrix: f64) -> Result<SparseSymMatrix> {
    assemble(mesh, Weights::new(w_fiber, w_matrix), |p| {
        let (_, area) = element_stiffness(p);
        element_mass(area.abs())
    })
}

/// Parts of the cross-sectional pencil that do not depend on `γ`.
#[derive(Debug, Clone)]
pub struct ModeParts {
    pub eps: f64,
    /// `K_w(1, ε⁻²)`
    pub lateral: SparseSymMatrix,
    /// `M_w(ε², 1)`
    pub vertical: SparseSymMatrix,
    /// `M_w(1, 1)`
    pub mass: SparseSymMatrix,
}

impl ModeParts {
    pub fn assemble(mesh: &TriMesh, eps: f64) -> Result<Self> {
        validate_eps(eps)?;
        Ok(Self {
            eps,
            lateral: assemble_weighted_stiffness(mesh, 1.0, eps.powi(-2))?,
            vertical: assemble_weighted_mass(mesh, eps * eps, 1.0)?,
            mass: assemble_weighted_mass(mesh, 1.0, 1.0)?,
        })
    }

    pub fn pencil(&self, gamma: f64) -> Result<ModePencil> {
        validate_gamma(gamma)?;
        Ok(ModePencil {
            k: self.lateral.add_scaled(&self.vertical, gamma)?,
            m: self.mass.clone(),
            eps: self.eps,
            gamma,
        })
    }
}

/// Generalized eigenproblem `K w = λ M w` for one vertical mode.
#[derive(Debug, Clone)]
pub struct ModePencil {
    pub k: SparseSymMatrix,
    pub m: SparseSymMatrix,
    pub eps: f64,
    pub gamma: f64,
}

fn validate_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside (0, 1]")));
    }
    Ok(())
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} must be positive (K is singular under the lateral Neumann condition otherwise)"
        )));
    }
    Ok(())
}

pub fn assemble_mode_pencil(mesh: &TriMesh, eps: f64, gamma: f64) -> Result<ModePencil> {
    validate_gamma(gamma)?;
    ModeParts::assemble(mesh, eps)?.pencil(gamma)
}

/// Dirichlet Laplacian on the fiber: stiffness and mass over fiber triangles
/// restricted to nodes strictly inside the disk.
#[derive(Debug, Clone)]
pub struct DirichletDisk {
    pub k: SparseSymMatrix,
    pub m: SparseSymMatrix,
    /// `interior[i]` is the mesh node of restricted unknown `i`.
    pub interior: Vec<usize>,
}

impl DirichletDisk {
    /// Lifts a restricted vector to all mesh nodes (zero elsewhere).
    pub fn extend(&self, values: &[f64], n_vertices: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_vertices];
        for (&node, &v) in self.interior.iter().zip(values) {
            full[node] = v;
        }
        full
    }
}

pub fn assemble_dirichlet_disk(mesh: &TriMesh) -> Result<DirichletDisk> {
    // matrix triangles are dropped, not down-weighted
    let mut fiber_only = mesh.clone();
    let keep: Vec<usize> = (0..mesh.n_triangles())
        .filter(|&t| mesh.tags[t] == Material::Fiber)
        .collect();
    fiber_only.triangles = keep.iter().map(|&t| mesh.triangles[t]).collect();
    fiber_only.tags = vec![Material::Fiber; keep.len()];

    let on_interface = mesh.interface_mask();
    let mut touched = vec![false; mesh.n_vertices()];
    for tri in &fiber_only.triangles {
        for &v in tri {
            touched[v] = true;
        }
    }
    let interior: Vec<usize> = (0..mesh.n_vertices())
        .filter(|&v| touched[v] && !on_interface[v])
        .collect();
    if interior.is_empty() {
        return Err(Error::Mesh("no interior fiber nodes; mesh too coarse".into()));
    }
    let k = assemble_weighted_stiffness(&fiber_only, 1.0, 1.0)?.restrict(&interior);
    let m = assemble_weighted_mass(&fiber_only, 1.0, 1.0)?.restrict(&interior);
    Ok(DirichletDisk { k, m, interior })
}

/// P1 matrices of `-d²/dx²` on `(0, length)` with `n` uniform intervals and
/// both Dirichlet ends eliminated (dimension `n - 1`).
pub fn assemble_1d(n: usize, length: f64) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 intervals, got {n}")));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidArgument(format!("length must be positive, got {length}")));
    }
    let h = length / n as f64;
    let dim = n - 1;
    let mut kt = Vec::with_capacity(3 * dim);
    let mut mt = Vec::with_capacity(3 * dim);
    for i in 0..dim {
        kt.push((i, i, 2.0 / h));
        mt.push((i, i, 2.0 * h / 3.0));
        if i + 1 < dim {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                kt.push((a, b, -1.0 / h));
                mt.push((a, b, h / 6.0));
            }
        }
    }
    Ok((
        SparseSymMatrix::from_triplets(dim, &kt),
        SparseSymMatrix::from_triplets(dim, &mt),
    ))
}

/// Closed-form generalized eigenvalues of the pencil from [`assemble_1d`]:
/// `(6/h²)(1 - cos θ)/(2 + cos θ)`, `θ = jπ/n`, for `j = 1..n-1`.
pub fn discrete_1d_eigenvalues(n: usize, length: f64) -> Vec<f64> {
    let h = length / n as f64;
    (1..n)
        .map(|j| {
            let c = (j as f64 * std::f64::consts::PI / n as f64).cos();
            6.0 / (h * h) * (1.0 - c) / (2.0 + c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh2d::{generate_mesh, uniform_mesh, CellGeometry};

    fn single_triangle(tag: Material) -> TriMesh {
        TriMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            tags: vec![tag],
            interface_nodes: vec![],
            boundary_nodes: vec![],
        }
    }

    #[test]
    fn single_triangle_stiffness() {
        let k = assemble_weighted_stiffness(&single_triangle(Material::Matrix), 1.0, 1.0).unwrap();
        let d = k.diagonal();
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!((d[2] - 0.5).abs() < 1e-15);
        assert!((k.get(0, 1) + 0.5).abs() < 1e-15);
        assert!(k.get(1, 2).abs() < 1e-15);
    }

    #[test]
    fn single_triangle_mass() {
        let m = assemble_weighted_mass(&single_triangle(Material::Fiber), 1.0, 1.0).unwrap();
        assert!((m.get(0, 0) - 0.5 / 6.0).abs() < 1e-15);
        assert!((m.get(0, 1) - 0.5 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn stiffness_kernel_contains_constants() {
        let mesh = generate_mesh(&CellGeometry::default(), 16).unwrap();
        let k = assemble_weighted_stiffness(&mesh, 1.0, 1.0).unwrap();
        for s in k.row_sums() {
            assert!(s.abs() < 1e-11);
        }
        assert!(k.max_asymmetry() < 1e-14);
    }

    #[test]
    fn mass_total_is_area() {
        let mesh = generate_mesh(&CellGeometry::default(), 16).unwrap();
        let m = assemble_weighted_mass(&mesh, 1.0, 1.0).unwrap();
        assert!((m.total_sum() - mesh.total_area()).abs() < 1e-13);
    }

    #[test]
    fn fiber_weight_linearity() {
        // all-fiber mesh: put the disk over the whole cell's triangles by tagging
        let mut mesh = uniform_mesh(&CellGeometry::default(), 8).unwrap();
        mesh.tags.iter_mut().for_each(|t| *t = Material::Fiber);
        let k1 = assemble_weighted_stiffness(&mesh, 1.0, 7.0).unwrap();
        let k4 = assemble_weighted_stiffness(&mesh, 4.0, 7.0).unwrap();
        let diff = k4.add_scaled(&k1, -4.0).unwrap();
        assert!(diff.triplets().iter().all(|&(_, _, v)| v.abs() < 1e-13));
    }

    #[test]
    fn mass_weights_scale_fiber_block() {
        let g = CellGeometry::default();
        let mesh = generate_mesh(&g, 16).unwrap();
        let eps: f64 = 0.1;
        let m = assemble_weighted_mass(&mesh, eps * eps, 1.0).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        let total = m.bilinear(&ones, &ones);
        let expected = 0.01 * mesh.area_of(Material::Fiber) + mesh.area_of(Material::Matrix);
        assert!((total - expected).abs() < 1e-13);
    }

    #[test]
    fn pencil_weights() {
        let mesh = generate_mesh(&CellGeometry::default(), 16).unwrap();
        let parts = ModeParts::assemble(&mesh, 0.1).unwrap();
        let reference = assemble_weighted_stiffness(&mesh, 1.0, 100.0).unwrap();
        let diff = parts.lateral.add_scaled(&reference, -1.0).unwrap();
        assert!(diff.triplets().iter().all(|&(_, _, v)| v.abs() < 1e-11));
        assert!(assemble_mode_pencil(&mesh, 0.1, 0.0).is_err());
        assert!(assemble_mode_pencil(&mesh, 0.0, 1.0).is_err());
        assert!(assemble_mode_pencil(&mesh, 1.5, 1.0).is_err());
    }

    #[test]
    fn pencil_linear_in_gamma() {
        let mesh = generate_mesh(&CellGeometry::default(), 16).unwrap();
        let a = assemble_mode_pencil(&mesh, 0.2, 3.0).unwrap();
        let b = assemble_mode_pencil(&mesh, 0.2, 5.0).unwrap();
        let recovered = b.k.add_scaled(&a.k, -1.0).unwrap().scaled(0.5);
        let vertical = assemble_weighted_mass(&mesh, 0.04, 1.0).unwrap();
        let diff = recovered.add_scaled(&vertical, -1.0).unwrap();
        assert!(diff.triplets().iter().all(|&(_, _, v)| v.abs() < 1e-12));
    }

    #[test]
    fn dirichlet_disk_excludes_interface() {
        let mesh = generate_mesh(&CellGeometry::default(), 16).unwrap();
        let disk = assemble_dirichlet_disk(&mesh).unwrap();
        let on_interface = mesh.interface_mask();
        assert!(disk.interior.iter().all(|&v| !on_interface[v]));
        assert_eq!(disk.k.dim(), disk.interior.len());
    }

    #[test]
    fn one_d_matrices() {
        let (k, m) = assemble_1d(4, 1.0).unwrap();
        assert_eq!(k.dim(), 3);
        assert!((k.get(0, 0) - 8.0).abs() < 1e-15);
        assert!((k.get(0, 1) + 4.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 2.0 / 12.0).abs() < 1e-15);
        assert!((m.get(1, 2) - 1.0 / 24.0).abs() < 1e-15);
        assert!(assemble_1d(1, 1.0).is_err());
    }

    #[test]
    fn one_d_closed_form_eigenvalues() {
        // eigenvector sin(jπ i/n) reproduces the closed form
        let n = 16;
        let (k, m) = assemble_1d(n, 2.0).unwrap();
        let values = discrete_1d_eigenvalues(n, 2.0);
        for (j, &lam) in values.iter().enumerate() {
            let v: Vec<f64> = (1..n)
                .map(|i| ((j + 1) as f64 * std::f64::consts::PI * i as f64 / n as f64).sin())
                .collect();
            let kv = k.mul_vec(&v);
            let mv = m.mul_vec(&v);
            for i in 0..n - 1 {
                assert!((kv[i] - lam * mv[i]).abs() < 1e-11 * lam);
            }
        }
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((values[0] - pi2 / 4.0).abs() < 0.01);
    }
}
