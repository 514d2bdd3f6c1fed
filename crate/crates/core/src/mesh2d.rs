//! Cross-section geometry and boundary-fitted triangulations of the square
//! cell with a circular fiber.
//!
//! [`generate_mesh`] builds an O-grid: a core square inside the disk, four
//! transfinite ring patches between the core and the circle, and four
//! transfinite patches between the circle and the sides of the cell. Every
//! quadrilateral is split into four triangles through its center. The circle
//! is a polyline through mesh nodes, so material tags are exact.
//!
//! [`uniform_mesh`] is the plain structured grid (four triangles per square)
//! with tags chosen by triangle centroid and no interface fitting.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Smallest admissible `n_div`.
pub const MIN_DIVISIONS: usize = 8;
/// Minimum interior angle accepted by [`generate_mesh`], in degrees.
pub const MIN_ANGLE_DEG: f64 = 15.0;

pub type Point = [f64; 2];

/// Square cell `[0, side]²` containing the disk `D(center, radius)`, extruded
/// to height `height` in the vertical direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub side: f64,
    pub center: Point,
    pub radius: f64,
    pub height: f64,
}

impl Default for CellGeometry {
    fn default() -> Self {
        Self {
            side: 1.0,
            center: [0.5, 0.5],
            radius: 0.25,
            height: 1.0,
        }
    }
}

impl CellGeometry {
    pub fn new(side: f64, center: Point, radius: f64, height: f64) -> Result<Self> {
        let finite = [side, center[0], center[1], radius, height]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Geometry("non-finite dimension".into()));
        }
        if side <= 0.0 || radius <= 0.0 || height <= 0.0 {
            return Err(Error::Geometry(format!(
                "dimensions must be positive (side {side}, radius {radius}, height {height})"
            )));
        }
        let clearance = center[0].min(side - center[0]).min(center[1]).min(side - center[1]);
        if clearance <= radius {
            return Err(Error::Geometry(format!(
                "disk must lie strictly inside the cell: distance to boundary {clearance} <= radius {radius}"
            )));
        }
        Ok(Self {
            side,
            center,
            radius,
            height,
        })
    }

    /// |D|
    pub fn disk_area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// |C \ D|
    pub fn matrix_area(&self) -> f64 {
        self.side * self.side - self.disk_area()
    }

    pub fn cell_area(&self) -> f64 {
        self.side * self.side
    }

    pub fn distance_to_center(&self, p: Point) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1])
    }
}

/// Material of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Material {
    Fiber = 0,
    Matrix = 1,
}

impl Material {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Material::Fiber),
            1 => Some(Material::Matrix),
            _ => None,
        }
    }
}

/// Triangulation of the cross-section with per-element materials.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<Material>,
    /// Nodes on the fiber boundary.
    pub interface_nodes: Vec<usize>,
    /// Nodes on the outer boundary of the cell.
    pub boundary_nodes: Vec<usize>,
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    pub fn area_of(&self, material: Material) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| self.tags[t] == material)
            .map(|t| self.signed_area(t))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Mask of nodes lying on the fiber boundary.
    pub fn interface_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for &i in &self.interface_nodes {
            mask[i] = true;
        }
        mask
    }

    /// Checks that every edge is shared by at most two triangles and that
    /// edges separating fiber from matrix have both endpoints on the interface.
    pub fn check_conforming(&self) -> Result<()> {
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let on_interface = self.interface_mask();
        for (&(a, b), owners) in &edges {
            if owners.len() > 2 {
                return Err(Error::Mesh(format!(
                    "edge ({a}, {b}) shared by {} triangles",
                    owners.len()
                )));
            }
            if owners.len() == 2
                && self.tags[owners[0]] != self.tags[owners[1]]
                && !(on_interface[a] && on_interface[b])
            {
                return Err(Error::Mesh(format!("material edge ({a}, {b}) not on the interface")));
            }
        }
        Ok(())
    }

    /// Text format: `nv nt`, then `x y` per vertex, then `i j k tag` per
    /// triangle. Coordinates carry 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n_vertices(), self.n_triangles()).unwrap();
        for p in &self.vertices {
            writeln!(out, "{:.16e} {:.16e}", p[0], p[1]).unwrap();
        }
        for (tri, tag) in self.triangles.iter().zip(&self.tags) {
            writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], tag.code()).unwrap();
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    /// Parses the text format. Lines starting with `#` are ignored. Interface
    /// and boundary node lists are recovered from `geometry`.
    pub fn read_text<R: BufRead>(reader: R, geometry: &CellGeometry) -> Result<Self> {
        let mut lines = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            lines.push(trimmed.to_string());
        }
        let mut it = lines.iter();
        let header = it.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
        let counts: Vec<usize> = parse_fields(header)?;
        if counts.len() != 2 {
            return Err(Error::Parse(format!("bad header `{header}`")));
        }
        let (nv, nt) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = it.next().ok_or_else(|| Error::Parse("missing vertex".into()))?;
            let xy: Vec<f64> = parse_fields(line)?;
            if xy.len() != 2 {
                return Err(Error::Parse(format!("bad vertex `{line}`")));
            }
            vertices.push([xy[0], xy[1]]);
        }
        let mut triangles = Vec::with_capacity(nt);
        let mut tags = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = it.next().ok_or_else(|| Error::Parse("missing triangle".into()))?;
            let f: Vec<usize> = parse_fields(line)?;
            if f.len() != 4 || f[..3].iter().any(|&i| i >= nv) {
                return Err(Error::Parse(format!("bad triangle `{line}`")));
            }
            let tag = u8::try_from(f[3])
                .ok()
                .and_then(Material::from_code)
                .ok_or_else(|| Error::Parse(format!("bad tag in `{line}`")))?;
            triangles.push([f[0], f[1], f[2]]);
            tags.push(tag);
        }
        if it.next().is_some() {
            return Err(Error::Parse("trailing data after triangles".into()));
        }
        let mut mesh = TriMesh {
            vertices,
            triangles,
            tags,
            interface_nodes: Vec::new(),
            boundary_nodes: Vec::new(),
        };
        mesh.interface_nodes = detect_interface(&mesh.vertices, geometry);
        mesh.boundary_nodes = detect_boundary(&mesh.vertices, geometry);
        Ok(mesh)
    }

    /// SHA-256 of the text form.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_fields<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::Parse(format!("cannot parse `{tok}`")))
        })
        .collect()
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn interface_tolerance(geometry: &CellGeometry) -> f64 {
    1e-12 * geometry.side
}

fn detect_interface(vertices: &[Point], geometry: &CellGeometry) -> Vec<usize> {
    let tol = interface_tolerance(geometry);
    (0..vertices.len())
        .filter(|&i| (geometry.distance_to_center(vertices[i]) - geometry.radius).abs() <= tol)
        .collect()
}

fn detect_boundary(vertices: &[Point], geometry: &CellGeometry) -> Vec<usize> {
    let tol = 1e-12 * geometry.side;
    let s = geometry.side;
    (0..vertices.len())
        .filter(|&i| {
            let [x, y] = vertices[i];
            x.abs() <= tol || y.abs() <= tol || (x - s).abs() <= tol || (y - s).abs() <= tol
        })
        .collect()
}

/// Merges coincident nodes produced by adjacent patches.
struct NodeMerger {
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    vertices: Vec<Point>,
}

impl NodeMerger {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            buckets: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p[0] / self.tol).floor() as i64, (p[1] / self.tol).floor() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        let q = self.vertices[id];
                        if (q[0] - p[0]).abs() <= self.tol && (q[1] - p[1]).abs() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.buckets.entry((kx, ky)).or_default().push(id);
        id
    }

    /// Fresh node that is never merged (quad centers).
    fn push_unique(&mut self, p: Point) -> usize {
        let id = self.vertices.len();
        self.vertices.push(p);
        id
    }
}

struct Builder {
    nodes: NodeMerger,
    triangles: Vec<[usize; 3]>,
    tags: Vec<Material>,
}

impl Builder {
    /// Adds a structured patch given its node grid `grid[t][s]` (rows along
    /// the second parameter). Each quad is split into four triangles through
    /// its center.
    fn add_patch(&mut self, grid: &[Vec<Point>], material: Material) {
        let ids: Vec<Vec<usize>> = grid
            .iter()
            .map(|row| row.iter().map(|&p| self.nodes.insert(p)).collect())
            .collect();
        for t in 0..grid.len() - 1 {
            for s in 0..grid[t].len() - 1 {
                let corners = [ids[t][s], ids[t][s + 1], ids[t + 1][s + 1], ids[t + 1][s]];
                let pts = corners.map(|i| self.nodes.vertices[i]);
                let center = [
                    0.25 * (pts[0][0] + pts[1][0] + pts[2][0] + pts[3][0]),
                    0.25 * (pts[0][1] + pts[1][1] + pts[2][1] + pts[3][1]),
                ];
                let c = self.nodes.push_unique(center);
                for e in 0..4 {
                    let (a, b) = (corners[e], corners[(e + 1) % 4]);
                    let area = signed_area(self.nodes.vertices[a], self.nodes.vertices[b], center);
                    let tri = if area >= 0.0 { [a, b, c] } else { [b, a, c] };
                    self.triangles.push(tri);
                    self.tags.push(material);
                }
            }
        }
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Boundary-fitted O-grid triangulation of the cell.
///
/// `n_div` sets the resolution: the cell side is crossed by roughly `n_div`
/// element layers and each quarter of the circle carries `n_div / 2` edges.
pub fn generate_mesh(geometry: &CellGeometry, n_div: usize) -> Result<TriMesh> {
    if n_div < MIN_DIVISIONS {
        return Err(Error::Mesh(format!(
            "n_div = {n_div} is below the minimum resolution {MIN_DIVISIONS}"
        )));
    }
    let c = geometry.center;
    let r = geometry.radius;
    let s = geometry.side;
    let half_core = 0.5 * r;
    let m = n_div.div_ceil(2);

    let corners = [[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]];
    let core_dirs = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let mut angles: Vec<f64> = corners.iter().map(|p| (p[1] - c[1]).atan2(p[0] - c[0])).collect();
    for k in 1..4 {
        while angles[k] <= angles[k - 1] {
            angles[k] += 2.0 * PI;
        }
    }
    angles.push(angles[0] + 2.0 * PI);

    let arc_point = |theta: f64| [c[0] + r * theta.cos(), c[1] + r * theta.sin()];
    let core_point = |k: usize| [c[0] + half_core * core_dirs[k][0], c[1] + half_core * core_dirs[k][1]];

    let mut builder = Builder {
        nodes: NodeMerger::new(1e-9 * s),
        triangles: Vec::new(),
        tags: Vec::new(),
    };

    // core square
    let core: Vec<Vec<Point>> = (0..=m)
        .map(|j| {
            (0..=m)
                .map(|i| {
                    let u = -1.0 + 2.0 * i as f64 / m as f64;
                    let v = -1.0 + 2.0 * j as f64 / m as f64;
                    [c[0] + half_core * u, c[1] + half_core * v]
                })
                .collect()
        })
        .collect();
    builder.add_patch(&core, Material::Fiber);

    for k in 0..4 {
        let (q0, q1) = (core_point(k), core_point((k + 1) % 4));
        let (p0, p1) = (corners[k], corners[(k + 1) % 4]);
        let (th0, th1) = (angles[k], angles[k + 1]);
        let params: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let arc: Vec<Point> = params.iter().map(|&u| arc_point(th0 + u * (th1 - th0))).collect();
        let inner: Vec<Point> = params.iter().map(|&u| lerp(q0, q1, u)).collect();
        let outer: Vec<Point> = params.iter().map(|&u| lerp(p0, p1, u)).collect();
        let arc_len = r * (th1 - th0);

        let ring_layers = layer_count(&inner, &arc, dist(q0, q1), arc_len, m);
        let ring: Vec<Vec<Point>> = (0..=ring_layers)
            .map(|l| {
                let t = l as f64 / ring_layers as f64;
                (0..=m)
                    .map(|i| {
                        if l == ring_layers {
                            arc[i]
                        } else {
                            lerp(inner[i], arc[i], t)
                        }
                    })
                    .collect()
            })
            .collect();
        builder.add_patch(&ring, Material::Fiber);

        let outer_layers = layer_count(&arc, &outer, arc_len, dist(p0, p1), m);
        let band: Vec<Vec<Point>> = (0..=outer_layers)
            .map(|l| {
                let t = l as f64 / outer_layers as f64;
                (0..=m)
                    .map(|i| if l == 0 { arc[i] } else { lerp(arc[i], outer[i], t) })
                    .collect()
            })
            .collect();
        builder.add_patch(&band, Material::Matrix);
    }

    let vertices = builder.nodes.vertices;
    let mut mesh = TriMesh {
        interface_nodes: detect_interface(&vertices, geometry),
        boundary_nodes: detect_boundary(&vertices, geometry),
        vertices,
        triangles: builder.triangles,
        tags: builder.tags,
    };
    // project interface nodes exactly onto the circle (they already are up to rounding)
    for &i in &mesh.interface_nodes {
        let p = mesh.vertices[i];
        let d = geometry.distance_to_center(p);
        mesh.vertices[i] = [c[0] + (p[0] - c[0]) * r / d, c[1] + (p[1] - c[1]) * r / d];
    }

    for t in 0..mesh.n_triangles() {
        let area = mesh.signed_area(t);
        if area <= 0.0 {
            return Err(Error::Mesh(format!("triangle {t} inverted (area {area:e})")));
        }
        let centroid = mesh.centroid(t);
        let inside = geometry.distance_to_center(centroid) < r;
        if inside != (mesh.tags[t] == Material::Fiber) {
            return Err(Error::Mesh(format!(
                "triangle {t} tagged on the wrong side of the interface"
            )));
        }
    }
    let quality = mesh_quality(&mesh)?;
    if quality.min_angle_deg < MIN_ANGLE_DEG {
        return Err(Error::Mesh(format!(
            "minimum angle {:.2} deg below {MIN_ANGLE_DEG} deg; refine the mesh",
            quality.min_angle_deg
        )));
    }
    Ok(mesh)
}

/// Number of element layers between two node rows so that cells come out
/// close to square.
fn layer_count(a: &[Point], b: &[Point], len_a: f64, len_b: f64, m: usize) -> usize {
    let radial = a.iter().zip(b).map(|(&p, &q)| dist(p, q)).sum::<f64>() / a.len() as f64;
    let tangential = 0.5 * (len_a + len_b) / m as f64;
    ((radial / tangential).round() as usize).max(2)
}

/// Structured `n_div x n_div` grid with four triangles per square, tagged by
/// centroid. The interface is not fitted.
pub fn uniform_mesh(geometry: &CellGeometry, n_div: usize) -> Result<TriMesh> {
    if n_div == 0 {
        return Err(Error::Mesh("n_div must be positive".into()));
    }
    let h = geometry.side / n_div as f64;
    let row = n_div + 1;
    let mut vertices = Vec::with_capacity(row * row + n_div * n_div);
    for j in 0..=n_div {
        for i in 0..=n_div {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(4 * n_div * n_div);
    for j in 0..n_div {
        for i in 0..n_div {
            let c = vertices.len();
            vertices.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            let v00 = j * row + i;
            let v10 = v00 + 1;
            let v11 = v10 + row;
            let v01 = v00 + row;
            triangles.extend_from_slice(&[[v00, v10, c], [v10, v11, c], [v11, v01, c], [v01, v00, c]]);
        }
    }
    let mut mesh = TriMesh {
        interface_nodes: Vec::new(),
        boundary_nodes: detect_boundary(&vertices, geometry),
        vertices,
        tags: Vec::new(),
        triangles,
    };
    mesh.tags = (0..mesh.n_triangles())
        .map(|t| {
            if geometry.distance_to_center(mesh.centroid(t)) < geometry.radius {
                Material::Fiber
            } else {
                Material::Matrix
            }
        })
        .collect();
    Ok(mesh)
}

/// Element quality summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_area: f64,
    /// Longest edge.
    pub h_max: f64,
}

pub fn mesh_quality(mesh: &TriMesh) -> Result<QualityReport> {
    if mesh.triangles.is_empty() {
        return Err(Error::Mesh("empty mesh".into()));
    }
    let mut report = QualityReport {
        min_angle_deg: f64::INFINITY,
        max_angle_deg: 0.0,
        min_area: f64::INFINITY,
        h_max: 0.0,
    };
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        report.min_area = report.min_area.min(mesh.signed_area(t));
        for e in 0..3 {
            let (a, b, c) = (p[e], p[(e + 1) % 3], p[(e + 2) % 3]);
            report.h_max = report.h_max.max(dist(a, b));
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
            let angle = cos.clamp(-1.0, 1.0).acos().to_degrees();
            report.min_angle_deg = report.min_angle_deg.min(angle);
            report.max_angle_deg = report.max_angle_deg.max(angle);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_areas() {
        let g = CellGeometry::new(1.0, [0.5, 0.5], 0.25, 1.0).unwrap();
        assert!((g.disk_area() - PI / 16.0).abs() < 1e-15);
        assert!((g.matrix_area() - (1.0 - PI / 16.0)).abs() < 1e-15);
        assert!((g.disk_area() - 0.196_350).abs() < 1e-6);
        assert!((g.matrix_area() - 0.803_650).abs() < 1e-6);
    }

    #[test]
    fn tangent_disk_rejected() {
        assert!(CellGeometry::new(1.0, [0.5, 0.5], 0.5, 1.0).is_err());
        assert!(CellGeometry::new(1.0, [0.3, 0.5], 0.3, 1.0).is_err());
    }

    #[test]
    fn nonpositive_dimensions_rejected() {
        assert!(CellGeometry::new(1.0, [0.5, 0.5], 0.0, 1.0).is_err());
        assert!(CellGeometry::new(1.0, [0.5, 0.5], 0.25, 0.0).is_err());
        assert!(CellGeometry::new(-1.0, [0.5, 0.5], 0.25, 1.0).is_err());
    }

    #[test]
    fn height_stored_areas_unchanged() {
        let g = CellGeometry::new(1.0, [0.5, 0.5], 0.25, 2.0).unwrap();
        assert_eq!(g.height, 2.0);
        assert!((g.disk_area() - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn fiber_area_converges() {
        let g = CellGeometry::default();
        let exact = g.disk_area();
        let coarse = generate_mesh(&g, 16).unwrap();
        let fine = generate_mesh(&g, 64).unwrap();
        let e16 = (coarse.area_of(Material::Fiber) - exact).abs() / exact;
        let e64 = (fine.area_of(Material::Fiber) - exact).abs() / exact;
        assert!(e16 < 0.02, "{e16}");
        assert!(e64 < 0.002, "{e64}");
        assert!(e64 < e16 / 4.0);
        assert!((fine.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_coarse_rejected() {
        assert!(generate_mesh(&CellGeometry::default(), 4).is_err());
    }

    #[test]
    fn uniform_mesh_quality() {
        let mesh = uniform_mesh(&CellGeometry::default(), 10).unwrap();
        let q = mesh_quality(&mesh).unwrap();
        assert!((q.min_angle_deg - 45.0).abs() < 1e-9);
        assert!((q.max_angle_deg - 90.0).abs() < 1e-9);
    }

    #[test]
    fn fitted_mesh_quality() {
        for n in [8, 16, 32, 64] {
            let mesh = generate_mesh(&CellGeometry::default(), n).unwrap();
            let q = mesh_quality(&mesh).unwrap();
            assert!(q.min_angle_deg >= MIN_ANGLE_DEG, "n = {n}: {q:?}");
        }
    }

    #[test]
    fn empty_mesh_quality_error() {
        let mesh = TriMesh {
            vertices: vec![],
            triangles: vec![],
            tags: vec![],
            interface_nodes: vec![],
            boundary_nodes: vec![],
        };
        assert!(mesh_quality(&mesh).is_err());
    }

    #[test]
    fn conforming_and_interface_exact() {
        let g = CellGeometry::default();
        let mesh = generate_mesh(&g, 32).unwrap();
        mesh.check_conforming().unwrap();
        assert!(!mesh.interface_nodes.is_empty());
        for &i in &mesh.interface_nodes {
            assert!((g.distance_to_center(mesh.vertices[i]) - g.radius).abs() <= 1e-12);
        }
        assert_eq!(mesh.interface_nodes.len(), 4 * 16);
    }

    #[test]
    fn off_center_disk() {
        let g = CellGeometry::new(1.0, [0.45, 0.55], 0.2, 1.0).unwrap();
        let mesh = generate_mesh(&g, 32).unwrap();
        mesh.check_conforming().unwrap();
        let err = (mesh.area_of(Material::Fiber) - g.disk_area()).abs() / g.disk_area();
        assert!(err < 0.005);
    }

    #[test]
    fn deterministic() {
        let g = CellGeometry::default();
        let a = generate_mesh(&g, 24).unwrap();
        let b = generate_mesh(&g, 24).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn text_roundtrip() {
        let g = CellGeometry::default();
        let mesh = generate_mesh(&g, 8).unwrap();
        let text = mesh.to_text() + "# config_hash=abc\n";
        let back = TriMesh::read_text(text.as_bytes(), &g).unwrap();
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.tags, mesh.tags);
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.interface_nodes, mesh.interface_nodes);
        let mut bad = mesh.to_text();
        bad.push_str("1 2 3 0\n");
        assert!(TriMesh::read_text(bad.as_bytes(), &g).is_err());
    }
}
