use crate::error::{Error, Result};
use crate::linalg::{dist, dist_to_segment, Mat, Point};
use crate::mesh::{domain::point_in_polygon, Mesh};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Where a singular charge lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeSupport {
    Atom(Point),
    Facet(usize),
}

/// A singular charge stored in polar form: `polar * mass`, `|polar| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub support: ChargeSupport,
    pub polar: Mat,
    pub mass: f64,
}

impl Charge {
    /// Polar split of `value`; `None` for a zero matrix.
    pub fn new(support: ChargeSupport, value: &Mat) -> Option<Charge> {
        let mass = value.norm();
        if mass == 0.0 {
            return None;
        }
        Some(Charge { support, polar: value.scale(1.0 / mass), mass })
    }

    pub fn value(&self) -> Mat {
        self.polar.scale(self.mass)
    }
}

/// Matrix-valued measure on a mesh: cellwise constant density plus singular charges.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixMeasure {
    #[serde(skip)]
    mesh: Arc<Mesh>,
    rows: usize,
    cols: usize,
    density: Vec<Mat>,
    charges: Vec<Charge>,
}

/// Compact sets used for localization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactSet {
    Point {
        p: Point,
    },
    Segment {
        a: Point,
        b: Point,
    },
    /// Closed polygonal region.
    Polygon {
        vertices: Vec<Point>,
    },
    Union {
        parts: Vec<CompactSet>,
    },
}

impl CompactSet {
    pub fn point(x: f64, y: f64) -> Self {
        CompactSet::Point { p: [x, y] }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        CompactSet::Segment { a, b }
    }

    /// Interval `[a, b]` on the 1D axis.
    pub fn interval(a: f64, b: f64) -> Self {
        CompactSet::Segment { a: [a, 0.0], b: [b, 0.0] }
    }

    pub fn dist(&self, x: &Point) -> f64 {
        match self {
            CompactSet::Point { p } => dist(x, p),
            CompactSet::Segment { a, b } => dist_to_segment(x, a, b),
            CompactSet::Polygon { vertices } => {
                if point_in_polygon(x, vertices) {
                    0.0
                } else {
                    let n = vertices.len();
                    (0..n).map(|i| dist_to_segment(x, &vertices[i], &vertices[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
            CompactSet::Union { parts } => parts.iter().map(|k| k.dist(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Open 1D neighbourhood `{x : dist(x, K) < delta}` as merged intervals.
    pub fn neighbourhood_1d(&self, delta: f64) -> Vec<(f64, f64)> {
        let mut iv = Vec::new();
        self.collect_1d(delta, &mut iv);
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    fn collect_1d(&self, delta: f64, out: &mut Vec<(f64, f64)>) {
        match self {
            CompactSet::Point { p } => out.push((p[0] - delta, p[0] + delta)),
            CompactSet::Segment { a, b } => out.push((a[0].min(b[0]) - delta, a[0].max(b[0]) + delta)),
            CompactSet::Polygon { vertices } => {
                let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                out.push((lo - delta, hi + delta));
            }
            CompactSet::Union { parts } => parts.iter().for_each(|k| k.collect_1d(delta, out)),
        }
    }
}

/// Restriction used by [`MatrixMeasure::total_variation`].
#[derive(Debug, Clone)]
pub enum Region {
    /// Explicit cells and charge indices.
    Entities { cells: Vec<usize>, charges: Vec<usize> },
    /// Open neighbourhood `(K)_delta`, intersected with the domain.
    Near { set: CompactSet, delta: f64 },
}

fn overlap(a: f64, b: f64, iv: &[(f64, f64)]) -> f64 {
    iv.iter().map(|&(l, r)| (b.min(r) - a.max(l)).max(0.0)).sum()
}

/// Fraction of a triangle inside `(K)_delta`, by the centroids of a uniform
/// subdivision into `4^levels` pieces.
fn triangle_fraction(p: [Point; 3], set: &CompactSet, delta: f64, levels: u32) -> f64 {
    let n = 1usize << levels;
    let (mut inside, mut total) = (0usize, 0usize);
    let at = |i: f64, j: f64| -> Point {
        let (s, t) = (i / n as f64, j / n as f64);
        [p[0][0] + s * (p[1][0] - p[0][0]) + t * (p[2][0] - p[0][0]), p[0][1] + s * (p[1][1] - p[0][1]) + t * (p[2][1] - p[0][1])]
    };
    for i in 0..n {
        for j in 0..n - i {
            let (fi, fj) = (i as f64, j as f64);
            total += 1;
            if set.dist(&at(fi + 1.0 / 3.0, fj + 1.0 / 3.0)) < delta {
                inside += 1;
            }
            if i + j + 1 < n {
                total += 1;
                if set.dist(&at(fi + 2.0 / 3.0, fj + 2.0 / 3.0)) < delta {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 / total as f64
}

impl MatrixMeasure {
    pub fn new(mesh: Arc<Mesh>, rows: usize, cols: usize, density: Vec<Mat>, charges: Vec<Charge>) -> Self {
        MatrixMeasure { mesh, rows, cols, density, charges }
    }

    pub fn zero(mesh: Arc<Mesh>, rows: usize) -> Self {
        let cols = mesh.dim();
        let density = vec![Mat::zeros(rows, cols); mesh.num_cells()];
        MatrixMeasure { mesh, rows, cols, density, charges: Vec::new() }
    }

    /// Constant density `xi` on every cell.
    pub fn uniform_density(mesh: Arc<Mesh>, xi: &Mat) -> Self {
        let density = vec![*xi; mesh.num_cells()];
        MatrixMeasure { rows: xi.rows(), cols: xi.cols(), mesh, density, charges: Vec::new() }
    }

    /// Density given per cell.
    pub fn from_density(mesh: Arc<Mesh>, rows: usize, f: impl Fn(usize) -> Mat) -> Self {
        let cols = mesh.dim();
        let density = (0..mesh.num_cells()).map(f).collect();
        MatrixMeasure { mesh, rows, cols, density, charges: Vec::new() }
    }

    /// Adds a point charge with matrix `value` at `x`, merging with an existing one.
    pub fn with_atom(mut self, x: Point, value: &Mat) -> Self {
        self.add_charge(ChargeSupport::Atom(x), value);
        self
    }

    fn add_charge(&mut self, support: ChargeSupport, value: &Mat) {
        if let Some(i) = self.charges.iter().position(|c| c.support == support) {
            let v = self.charges[i].value() + *value;
            match Charge::new(support, &v) {
                Some(c) => self.charges[i] = c,
                None => {
                    self.charges.remove(i);
                }
            }
        } else if let Some(c) = Charge::new(support, value) {
            self.charges.push(c);
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn density(&self, c: usize) -> &Mat {
        &self.density[c]
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    /// Location of a charge (facet midpoint for facet charges).
    pub fn charge_location(&self, ch: &Charge) -> Point {
        match ch.support {
            ChargeSupport::Atom(p) => p,
            ChargeSupport::Facet(f) => self.mesh.facet_midpoint(f),
        }
    }

    /// `|density| |cell|` per cell.
    pub fn cell_masses(&self) -> Vec<f64> {
        (0..self.density.len()).map(|c| self.density[c].norm() * self.mesh.cell_measure(c)).collect()
    }

    pub fn singular_mass(&self) -> f64 {
        self.charges.iter().map(|c| c.mass).sum()
    }

    /// Total variation, optionally restricted to a region.
    pub fn total_variation(&self, region: Option<&Region>) -> f64 {
        match region {
            None => self.cell_masses().iter().sum::<f64>() + self.singular_mass(),
            Some(Region::Entities { cells, charges }) => {
                let cm: f64 = cells.iter().map(|&c| self.density[c].norm() * self.mesh.cell_measure(c)).sum();
                let sm: f64 = charges.iter().map(|&i| self.charges[i].mass).sum();
                cm + sm
            }
            Some(Region::Near { set, delta }) => self.mass_near(set, *delta),
        }
    }

    fn mass_near(&self, set: &CompactSet, delta: f64) -> f64 {
        let mesh = &self.mesh;
        let mut total = 0.0;
        if mesh.dim() == 1 {
            let iv = set.neighbourhood_1d(delta);
            for c in 0..mesh.num_cells() {
                let vs = mesh.cell(c);
                let (a, b) = (mesh.vertices()[vs[0]][0], mesh.vertices()[vs[1]][0]);
                total += self.density[c].norm() * overlap(a, b, &iv);
            }
            for ch in &self.charges {
                let x = self.charge_location(ch)[0];
                if iv.iter().any(|&(l, r)| l < x && x < r) {
                    total += ch.mass;
                }
            }
        } else {
            for c in 0..mesh.num_cells() {
                let dn = self.density[c].norm();
                if dn == 0.0 {
                    continue;
                }
                let vs = mesh.cell(c);
                let p = [mesh.vertices()[vs[0]], mesh.vertices()[vs[1]], mesh.vertices()[vs[2]]];
                let far = p.iter().all(|q| set.dist(q) >= delta + mesh.h());
                let near = p.iter().all(|q| set.dist(q) < delta - mesh.h());
                let frac = if far {
                    0.0
                } else if near {
                    1.0
                } else {
                    triangle_fraction(p, set, delta, 4)
                };
                total += dn * mesh.cell_measure(c) * frac;
            }
            for ch in &self.charges {
                let frac = match ch.support {
                    ChargeSupport::Atom(x) => (set.dist(&x) < delta) as u8 as f64,
                    ChargeSupport::Facet(f) => {
                        let [a, b] = mesh.facets()[f].vertices;
                        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                        let k = 32;
                        (0..k)
                            .filter(|&i| {
                                let t = (i as f64 + 0.5) / k as f64;
                                set.dist(&[pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]) < delta
                            })
                            .count() as f64
                            / k as f64
                    }
                };
                total += ch.mass * frac;
            }
        }
        total
    }

    fn check_compatible(&self, other: &MatrixMeasure) -> Result<()> {
        if self.dims() != other.dims() || !super::function::same_mesh(&self.mesh, &other.mesh) {
            return Err(Error::DimensionMismatch("measures live on different meshes or shapes".into()));
        }
        Ok(())
    }

    /// `self + s * other`, merging charges on the same support.
    pub fn axpy(&self, s: f64, other: &MatrixMeasure) -> Result<MatrixMeasure> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.density.iter_mut().zip(&other.density) {
            *a += b.scale(s);
        }
        for ch in &other.charges {
            out.add_charge(ch.support, &ch.value().scale(s));
        }
        Ok(out)
    }

    pub fn add(&self, other: &MatrixMeasure) -> Result<MatrixMeasure> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &MatrixMeasure) -> Result<MatrixMeasure> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> MatrixMeasure {
        let mut out = self.clone();
        out.density.iter_mut().for_each(|d| *d = d.scale(s));
        if s == 0.0 {
            out.charges.clear();
        } else {
            for ch in out.charges.iter_mut() {
                ch.mass *= s.abs();
                if s < 0.0 {
                    ch.polar = -ch.polar;
                }
            }
        }
        out
    }

    /// Total mass of a measure pairing `int phi : d mu` for a matrix field `phi`
    /// evaluated at cell centroids and charge locations.
    pub fn pair(&self, phi: impl Fn(&Point) -> Mat) -> f64 {
        let mesh = &self.mesh;
        let mut s = 0.0;
        for c in 0..mesh.num_cells() {
            for (x, w) in mesh.quadrature(c, 2) {
                s += w * phi(&x).dot(&self.density[c]);
            }
        }
        for ch in &self.charges {
            s += ch.mass * phi(&self.charge_location(ch)).dot(&ch.polar);
        }
        s
    }
}
