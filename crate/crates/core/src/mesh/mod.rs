//! Computational domains and their simplicial meshes.
//!
//! Domains are intervals, simple polygons, or the canonical unit half-ball
//! `D_nu = { y in B_1(0) : y . nu < 0 }`. Meshes carry per-cell measures and
//! barycentric basis gradients, the facet graph with oriented unit normals, and a
//! free/clamped tag on every boundary facet. Test fields vanish on clamped facets.

pub(crate) mod domain;
mod halfball;
mod patch;
mod polygon;

pub use domain::{BoundaryKind, BoundaryPoint, Domain};
pub use patch::{local_patch, Patch, PatchOptions};

use crate::error::{Error, Result};
use crate::linalg::{dist, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Default cap on the number of cells a single mesh may have.
pub const DEFAULT_CELL_BUDGET: usize = 2_000_000;

/// Whether test fields are free or forced to zero on a boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetTag {
    Interior,
    Free,
    Clamped,
}

/// A codimension-one face: a vertex in 1D, an edge in 2D.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Facet {
    /// Endpoints; both entries are the same vertex in 1D.
    pub vertices: [usize; 2],
    /// Cell on the side opposite the normal.
    pub minus: usize,
    /// Cell the normal points into; `None` on the boundary.
    pub plus: Option<usize>,
    /// Unit normal pointing from `minus` to `plus` (outward on the boundary).
    pub normal: Point,
    /// Length in 2D, 1 in 1D (counting measure).
    pub measure: f64,
    pub tag: FacetTag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    facets: Vec<Facet>,
    #[serde(skip)]
    measures: Vec<f64>,
    #[serde(skip)]
    basis_grads: Vec<[[f64; 2]; 3]>,
    #[serde(skip)]
    cell_facets: Vec<[usize; 3]>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from vertices and simplices; orients 2D cells counter-clockwise.
    /// All boundary facets start out `Free`.
    pub fn new(dim: usize, vertices: Vec<Point>, mut cells: Vec<[usize; 3]>) -> Result<Mesh> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidMesh(format!("dimension {dim} not supported")));
        }
        if cells.is_empty() {
            return Err(Error::InvalidMesh("no cells".into()));
        }
        let nv = vertices.len();
        let mut measures = Vec::with_capacity(cells.len());
        let mut basis_grads = Vec::with_capacity(cells.len());
        let mut h: f64 = 0.0;
        for (ci, c) in cells.iter_mut().enumerate() {
            if c[..dim + 1].iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("cell {ci} references a missing vertex")));
            }
            if dim == 1 {
                let (a, b) = (vertices[c[0]][0], vertices[c[1]][0]);
                if b < a {
                    c.swap(0, 1);
                }
                let len = (b - a).abs();
                if len <= 0.0 {
                    return Err(Error::InvalidMesh(format!("cell {ci} is degenerate")));
                }
                measures.push(len);
                basis_grads.push([[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]]);
                h = h.max(len);
            } else {
                let mut area = signed_area(&vertices[c[0]], &vertices[c[1]], &vertices[c[2]]);
                if area < 0.0 {
                    c.swap(1, 2);
                    area = -area;
                }
                if area <= 0.0 {
                    return Err(Error::InvalidMesh(format!("cell {ci} is degenerate")));
                }
                let p = [vertices[c[0]], vertices[c[1]], vertices[c[2]]];
                let mut g = [[0.0; 2]; 3];
                for k in 0..3 {
                    // gradient of barycentric coordinate k: rotated opposite edge / (2 area)
                    let a = p[(k + 1) % 3];
                    let b = p[(k + 2) % 3];
                    g[k] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
                }
                measures.push(area);
                basis_grads.push(g);
                h = h.max(dist(&p[0], &p[1])).max(dist(&p[1], &p[2])).max(dist(&p[2], &p[0]));
            }
        }
        let (facets, cell_facets) = build_facets(dim, &vertices, &cells)?;
        Ok(Mesh { dim, vertices, cells, facets, measures, basis_grads, cell_facets, h })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Vertex indices of cell `c` (`dim + 1` entries).
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.dim + 1]
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.measures[c]
    }

    /// Gradients of the barycentric basis functions on cell `c`, one per local vertex.
    pub fn basis_grads(&self, c: usize) -> &[[f64; 2]] {
        &self.basis_grads[c][..self.dim + 1]
    }

    pub fn cell_facets(&self, c: usize) -> &[usize] {
        &self.cell_facets[c][..self.dim + 1]
    }

    pub fn centroid(&self, c: usize) -> Point {
        let vs = self.cell(c);
        let k = vs.len() as f64;
        let mut p = [0.0, 0.0];
        for &v in vs {
            p[0] += self.vertices[v][0] / k;
            p[1] += self.vertices[v][1] / k;
        }
        p
    }

    /// Maps barycentric coordinates on cell `c` to a point.
    pub fn point_at(&self, c: usize, bary: &[f64]) -> Point {
        let mut p = [0.0, 0.0];
        for (k, &v) in self.cell(c).iter().enumerate() {
            p[0] += bary[k] * self.vertices[v][0];
            p[1] += bary[k] * self.vertices[v][1];
        }
        p
    }

    /// Quadrature points on cell `c` with weights summing to the cell measure.
    pub fn quadrature(&self, c: usize, degree: usize) -> Vec<(Point, f64)> {
        let m = self.measures[c];
        if self.dim == 1 {
            crate::quadrature::interval(degree).into_iter().map(|(t, w)| (self.point_at(c, &[1.0 - t, t]), w * m)).collect()
        } else {
            crate::quadrature::triangle(degree).into_iter().map(|(l, w)| (self.point_at(c, &l), w * m)).collect()
        }
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = (usize, &Facet)> {
        self.facets.iter().enumerate().filter(|(_, f)| f.plus.is_none())
    }

    pub fn facet_midpoint(&self, f: usize) -> Point {
        let [a, b] = self.facets[f].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0]
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Marks every boundary facet satisfying `pred` as clamped and the rest as free.
    pub fn tag_boundary(&mut self, pred: impl Fn(&Mesh, usize) -> bool) {
        let tags: Vec<(usize, bool)> = self.boundary_facets().map(|(i, _)| (i, pred(self, i))).collect();
        for (i, clamped) in tags {
            self.facets[i].tag = if clamped { FacetTag::Clamped } else { FacetTag::Free };
        }
    }

    /// Marks all boundary facets as clamped.
    pub fn clamp_all_boundary(&mut self) {
        self.tag_boundary(|_, _| true);
    }

    /// Vertices lying on a clamped facet, sorted.
    pub fn clamped_vertices(&self) -> Vec<usize> {
        let mut mark = vec![false; self.vertices.len()];
        for f in &self.facets {
            if f.tag == FacetTag::Clamped {
                mark[f.vertices[0]] = true;
                mark[f.vertices[1]] = true;
            }
        }
        (0..mark.len()).filter(|&v| mark[v]).collect()
    }

    /// Vertices lying on any boundary facet, sorted.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut mark = vec![false; self.vertices.len()];
        for (_, f) in self.boundary_facets() {
            mark[f.vertices[0]] = true;
            mark[f.vertices[1]] = true;
        }
        (0..mark.len()).filter(|&v| mark[v]).collect()
    }

    /// Cells containing `p` (closed cells, tolerance relative to `h`). Up to all
    /// cells sharing a vertex when `p` sits on one.
    pub fn locate(&self, p: &Point) -> Vec<usize> {
        let tol = 1e-12 * self.h.max(1.0);
        (0..self.cells.len()).filter(|&c| self.barycentric(c, p).iter().all(|&l| l >= -tol)).collect()
    }

    /// Barycentric coordinates of `p` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, p: &Point) -> Vec<f64> {
        let vs = self.cell(c);
        let g = self.basis_grads(c);
        let p0 = self.vertices[vs[0]];
        // lambda_k(p) = lambda_k(p0) + grad_k . (p - p0)
        (0..vs.len())
            .map(|k| {
                let base = if k == 0 { 1.0 } else { 0.0 };
                base + g[k][0] * (p[0] - p0[0]) + g[k][1] * (p[1] - p0[1])
            })
            .collect()
    }

    /// Plain-text listing of vertices and cells for debugging.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# dim {} vertices {} cells {} h {}", self.dim, self.vertices.len(), self.cells.len(), self.h);
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "v {i} {} {}", v[0], v[1]);
        }
        for (i, _) in self.cells.iter().enumerate() {
            let vs: Vec<String> = self.cell(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "c {i} {}", vs.join(" "));
        }
        for (i, f) in self.boundary_facets() {
            let _ = writeln!(s, "b {i} {} {} {:?}", f.vertices[0], f.vertices[1], f.tag);
        }
        s
    }

    /// Rebuilds derived tables after deserialization.
    pub fn rebuild(self) -> Result<Mesh> {
        let tags: HashMap<[usize; 2], FacetTag> =
            self.facets.iter().filter(|f| f.plus.is_none()).map(|f| (sorted(f.vertices), f.tag)).collect();
        let mut m = Mesh::new(self.dim, self.vertices, self.cells)?;
        for f in m.facets.iter_mut() {
            if let Some(t) = tags.get(&sorted(f.vertices)) {
                f.tag = *t;
            }
        }
        Ok(m)
    }

    /// Applies a map to every vertex. The map must preserve orientation and distances.
    pub(crate) fn map_rigid(&mut self, map: impl Fn(&Point) -> Point) -> Result<()> {
        let vertices: Vec<Point> = self.vertices.iter().map(&map).collect();
        let tags: Vec<FacetTag> = self.facets.iter().map(|f| f.tag).collect();
        let mut m = Mesh::new(self.dim, vertices, self.cells.clone())?;
        for (f, t) in m.facets.iter_mut().zip(tags) {
            f.tag = t;
        }
        *self = m;
        Ok(())
    }
}

fn sorted(v: [usize; 2]) -> [usize; 2] {
    if v[0] <= v[1] {
        v
    } else {
        [v[1], v[0]]
    }
}

pub(crate) fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

type FacetTables = (Vec<Facet>, Vec<[usize; 3]>);

fn build_facets(dim: usize, vertices: &[Point], cells: &[[usize; 3]]) -> Result<FacetTables> {
    let mut map: HashMap<[usize; 2], usize> = HashMap::new();
    let mut facets: Vec<Facet> = Vec::new();
    let mut cell_facets = vec![[usize::MAX; 3]; cells.len()];
    for (ci, c) in cells.iter().enumerate() {
        let local: Vec<[usize; 2]> =
            if dim == 1 { vec![[c[0], c[0]], [c[1], c[1]]] } else { vec![[c[1], c[2]], [c[2], c[0]], [c[0], c[1]]] };
        for (k, fv) in local.into_iter().enumerate() {
            let key = sorted(fv);
            match map.get(&key) {
                Some(&fi) => {
                    let f = &mut facets[fi];
                    if f.plus.is_some() {
                        return Err(Error::InvalidMesh(format!("facet {key:?} shared by more than two cells")));
                    }
                    f.plus = Some(ci);
                    cell_facets[ci][k] = fi;
                }
                None => {
                    let (normal, measure) = if dim == 1 {
                        // outward from this cell: left vertex has normal -1
                        let s = if k == 0 { -1.0 } else { 1.0 };
                        ([s, 0.0], 1.0)
                    } else {
                        let (a, b) = (vertices[fv[0]], vertices[fv[1]]);
                        let len = dist(&a, &b);
                        // counter-clockwise cell: edge a->b has outward normal (dy, -dx)
                        ([(b[1] - a[1]) / len, -(b[0] - a[0]) / len], len)
                    };
                    map.insert(key, facets.len());
                    cell_facets[ci][k] = facets.len();
                    facets.push(Facet { vertices: fv, minus: ci, plus: None, normal, measure, tag: FacetTag::Free });
                }
            }
        }
    }
    for f in facets.iter_mut() {
        if f.plus.is_some() {
            f.tag = FacetTag::Interior;
        }
    }
    Ok((facets, cell_facets))
}

/// Options for [`build_mesh`].
#[derive(Debug, Clone, Copy)]
pub struct MeshOptions {
    pub cell_budget: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { cell_budget: DEFAULT_CELL_BUDGET }
    }
}

/// Builds a conforming simplicial mesh of `domain` with maximal cell diameter at most `h_target`.
pub fn build_mesh(domain: &Domain, h_target: f64) -> Result<Mesh> {
    build_mesh_with(domain, h_target, MeshOptions::default())
}

pub fn build_mesh_with(domain: &Domain, h_target: f64, opts: MeshOptions) -> Result<Mesh> {
    if !(h_target > 0.0 && h_target.is_finite()) {
        return Err(Error::InvalidMesh(format!("h_target must be positive, got {h_target}")));
    }
    domain.validate()?;
    let estimated = domain.estimated_cells(h_target);
    if estimated > opts.cell_budget {
        return Err(Error::MeshBudget { estimated, budget: opts.cell_budget });
    }
    let mesh = match domain {
        Domain::Interval { a, b } => interval_mesh(*a, *b, cells_for(b - a, h_target))?,
        Domain::Polygon { vertices } => polygon::mesh_polygon(vertices, h_target)?,
        Domain::HalfBall { normal } => halfball::mesh_half_ball(normal, h_target)?,
    };
    if mesh.num_cells() > opts.cell_budget {
        return Err(Error::MeshBudget { estimated: mesh.num_cells(), budget: opts.cell_budget });
    }
    Ok(mesh)
}

pub(crate) fn cells_for(len: f64, h: f64) -> usize {
    ((len / h) - 1e-9).ceil().max(1.0) as usize
}

/// Uniform mesh of `[a, b]` with `n` cells.
pub fn interval_mesh(a: f64, b: f64, n: usize) -> Result<Mesh> {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    interval_mesh_from_nodes(&xs)
}

/// Interval mesh with the given increasing node positions.
pub fn interval_mesh_from_nodes(xs: &[f64]) -> Result<Mesh> {
    if xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidMesh("interval nodes must be strictly increasing".into()));
    }
    let vertices: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
    let cells: Vec<[usize; 3]> = (0..xs.len() - 1).map(|i| [i, i + 1, usize::MAX]).collect();
    Mesh::new(1, vertices, cells)
}

/// Structured mesh of `[x0, x1] x [y0, y1]` with `nx * ny` quads, each split in two
/// triangles with alternating diagonals.
pub fn rectangle_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            let y = y0 + (y1 - y0) * j as f64 / ny as f64;
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([a, b, c]);
                cells.push([a, c, d]);
            } else {
                cells.push([a, b, d]);
                cells.push([b, c, d]);
            }
        }
    }
    Mesh::new(2, vertices, cells)
}

/// Unit square `(0,1)^2` with `n` quads per side.
pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n)
}

/// Uniform red refinement: every simplex is split into `2^dim` children.
/// Returns the refined vertices, cells, and the parent cell of each child.
pub(crate) fn refine_uniform(dim: usize, vertices: &[Point], cells: &[[usize; 3]]) -> (Vec<Point>, Vec<[usize; 3]>, Vec<usize>) {
    let mut verts = vertices.to_vec();
    let mut mids: HashMap<[usize; 2], usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
        let key = sorted([a, b]);
        *mids.entry(key).or_insert_with(|| {
            let (pa, pb) = (verts[a], verts[b]);
            verts.push([(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0]);
            verts.len() - 1
        })
    };
    let mut out = Vec::new();
    let mut parent = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        if dim == 1 {
            let m = mid(c[0], c[1], &mut verts);
            out.push([c[0], m, usize::MAX]);
            out.push([m, c[1], usize::MAX]);
            parent.extend([ci, ci]);
        } else {
            let m01 = mid(c[0], c[1], &mut verts);
            let m12 = mid(c[1], c[2], &mut verts);
            let m20 = mid(c[2], c[0], &mut verts);
            out.push([c[0], m01, m20]);
            out.push([m01, c[1], m12]);
            out.push([m20, m12, c[2]]);
            out.push([m01, m12, m20]);
            parent.extend([ci, ci, ci, ci]);
        }
    }
    (verts, out, parent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_quarter() {
        let m = build_mesh(&Domain::Interval { a: 0.0, b: 1.0 }, 0.25).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_vertices(), 5);
        assert!((m.h() - 0.25).abs() < 1e-15);
        let b: Vec<Point> = m.boundary_facets().map(|(_, f)| f.normal).collect();
        assert_eq!(b.len(), 2);
        assert!(b.contains(&[-1.0, 0.0]) && b.contains(&[1.0, 0.0]));
    }

    #[test]
    fn unit_square_boundary_tiles_sides() {
        let m = build_mesh(&Domain::unit_square(), 0.5).unwrap();
        assert!(m.h() <= 0.5 + 1e-12);
        let mut per_side = [0.0f64; 4];
        for (fi, f) in m.boundary_facets() {
            let n = f.normal;
            let mid = m.facet_midpoint(fi);
            let side = if (n[0] + 1.0).abs() < 1e-12 {
                assert!(mid[0].abs() < 1e-12);
                0
            } else if (n[0] - 1.0).abs() < 1e-12 {
                assert!((mid[0] - 1.0).abs() < 1e-12);
                1
            } else if (n[1] + 1.0).abs() < 1e-12 {
                assert!(mid[1].abs() < 1e-12);
                2
            } else {
                assert!((n[1] - 1.0).abs() < 1e-12);
                assert!((mid[1] - 1.0).abs() < 1e-12);
                3
            };
            per_side[side] += f.measure;
        }
        for s in per_side {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_measures_sum_to_domain_measure() {
        for d in [
            Domain::Interval { a: -0.3, b: 1.7 },
            Domain::unit_square(),
            Domain::Polygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 0.4], [0.0, 1.0]] },
        ] {
            let m = build_mesh(&d, 0.2).unwrap();
            let rel = (m.total_measure() - d.measure()).abs() / d.measure();
            assert!(rel < 1e-10, "{d:?}: {rel}");
            assert!(m.h() <= 0.2 + 1e-12);
            for c in 0..m.num_cells() {
                assert!(m.cell_measure(c) > 0.0);
            }
        }
    }

    #[test]
    fn outward_normals_are_unit_and_outward() {
        let d = Domain::Polygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 0.4], [0.0, 1.0]] };
        let m = build_mesh(&d, 0.3).unwrap();
        for (fi, f) in m.boundary_facets() {
            assert!(((f.normal[0].powi(2) + f.normal[1].powi(2)).sqrt() - 1.0).abs() < 1e-12);
            let mid = m.facet_midpoint(fi);
            let out = [mid[0] + 1e-6 * f.normal[0], mid[1] + 1e-6 * f.normal[1]];
            let inn = [mid[0] - 1e-6 * f.normal[0], mid[1] - 1e-6 * f.normal[1]];
            assert!(!d.contains(&out) && d.contains(&inn));
        }
    }

    #[test]
    fn rejects_budget_overrun() {
        let err = build_mesh_with(&Domain::unit_square(), 1e-4, MeshOptions { cell_budget: 1000 });
        assert!(matches!(err, Err(Error::MeshBudget { .. })));
        assert!(build_mesh(&Domain::unit_square(), 0.0).is_err());
    }

    #[test]
    fn locate_and_barycentric() {
        let m = unit_square_mesh(4).unwrap();
        let cs = m.locate(&[0.3, 0.6]);
        assert_eq!(cs.len(), 1);
        let l = m.barycentric(cs[0], &[0.3, 0.6]);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = m.point_at(cs[0], &l);
        assert!(dist(&p, &[0.3, 0.6]) < 1e-12);
    }

    #[test]
    fn serde_rebuild_keeps_tags() {
        let mut m = unit_square_mesh(2).unwrap();
        m.tag_boundary(|m, f| m.facet_midpoint(f)[0] < 1e-12);
        let s = serde_json::to_string(&m).unwrap();
        let back: Mesh = serde_json::from_str(&s).unwrap();
        let back = back.rebuild().unwrap();
        assert_eq!(back.clamped_vertices(), m.clamped_vertices());
        assert_eq!(back.num_cells(), m.num_cells());
    }
}
