use super::measure::{Charge, ChargeSupport, MatrixMeasure};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use crate::mesh::Mesh;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A point jump of a 1D function: `u` increases by `jump` when crossing `location`
/// from left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub jump: Vec<f64>,
}

/// Discrete BV function with values in `R^m`.
///
/// The absolutely continuous part is cellwise affine and may be discontinuous across
/// facets. In 1D an explicit list of atoms adds a step function
/// `sum_{z < x} jump_z`, so jumps need not sit at mesh vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "BvData")]
pub struct BvFunction {
    mesh: Arc<Mesh>,
    m: usize,
    /// Cell-major, then local vertex, then component.
    values: Vec<f64>,
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct BvData {
    mesh: Mesh,
    m: usize,
    values: Vec<f64>,
    #[serde(default)]
    atoms: Vec<Atom>,
}

impl TryFrom<BvData> for BvFunction {
    type Error = Error;
    fn try_from(d: BvData) -> Result<Self> {
        let mesh = Arc::new(d.mesh.rebuild()?);
        BvFunction::new(mesh, d.m, d.values, d.atoms)
    }
}

fn span(mesh: &Mesh) -> (f64, f64) {
    let xs = mesh.vertices().iter().map(|p| p[0]);
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

impl BvFunction {
    pub fn new(mesh: Arc<Mesh>, m: usize, values: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        if !(1..=2).contains(&m) {
            return Err(Error::InvalidBv(format!("target dimension {m} not supported")));
        }
        let expected = mesh.num_cells() * (mesh.dim() + 1) * m;
        if values.len() != expected {
            return Err(Error::InvalidBv(format!("expected {expected} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBv("non-finite vertex value".into()));
        }
        if !atoms.is_empty() && mesh.dim() != 1 {
            return Err(Error::InvalidBv("explicit atoms are only supported in 1D".into()));
        }
        let mut u = BvFunction { mesh, m, values, atoms: Vec::new() };
        for a in atoms {
            u.push_atom(a.location, a.jump)?;
        }
        Ok(u)
    }

    pub fn zeros(mesh: Arc<Mesh>, m: usize) -> Self {
        let n = mesh.num_cells() * (mesh.dim() + 1) * m;
        BvFunction { mesh, m, values: vec![0.0; n], atoms: Vec::new() }
    }

    /// Continuous piecewise-affine interpolant of `f`.
    pub fn from_vertex_fn(mesh: Arc<Mesh>, m: usize, f: impl Fn(&Point) -> Vec<f64>) -> Self {
        let vals: Vec<Vec<f64>> = mesh.vertices().iter().map(&f).collect();
        Self::from_vertex_values(mesh, m, |v| vals[v].clone())
    }

    /// Continuous function from per-vertex values.
    pub fn from_vertex_values(mesh: Arc<Mesh>, m: usize, f: impl Fn(usize) -> Vec<f64>) -> Self {
        let mut u = Self::zeros(mesh.clone(), m);
        for c in 0..mesh.num_cells() {
            for (k, &v) in mesh.cell(c).iter().enumerate() {
                let val = f(v);
                for i in 0..m {
                    let ix = u.idx(c, k, i);
                    u.values[ix] = val[i];
                }
            }
        }
        u
    }

    /// Cellwise interpolant of a possibly discontinuous `f(cell, point)`.
    pub fn from_cell_fn(mesh: Arc<Mesh>, m: usize, f: impl Fn(usize, &Point) -> Vec<f64>) -> Self {
        let mut u = Self::zeros(mesh.clone(), m);
        for c in 0..mesh.num_cells() {
            for (k, &v) in mesh.cell(c).iter().enumerate() {
                let val = f(c, &mesh.vertices()[v]);
                for i in 0..m {
                    let ix = u.idx(c, k, i);
                    u.values[ix] = val[i];
                }
            }
        }
        u
    }

    /// `x -> xi x + b`.
    pub fn affine(mesh: Arc<Mesh>, xi: &Mat, b: &[f64]) -> Self {
        let m = xi.rows();
        Self::from_vertex_fn(mesh, m, |p| {
            let mut v = xi.apply(&p[..xi.cols()]);
            for i in 0..m {
                v[i] += b[i];
            }
            v
        })
    }

    /// Scalar 1D step function equal to `levels[i]` on `(breaks[i-1], breaks[i])`;
    /// `levels` has one more entry than `breaks`. Steps become atoms.
    pub fn piecewise_constant_1d(mesh: Arc<Mesh>, breaks: &[f64], levels: &[f64]) -> Result<Self> {
        if mesh.dim() != 1 || levels.len() != breaks.len() + 1 {
            return Err(Error::InvalidBv("piecewise constant needs a 1D mesh and one more level than breaks".into()));
        }
        let l0 = levels[0];
        let mut u = Self::from_vertex_fn(mesh, 1, |_| vec![l0]);
        for (i, &z) in breaks.iter().enumerate() {
            u.push_atom(z, vec![levels[i + 1] - levels[i]])?;
        }
        Ok(u)
    }

    pub fn with_atom(mut self, location: f64, jump: Vec<f64>) -> Result<Self> {
        self.push_atom(location, jump)?;
        Ok(self)
    }

    fn push_atom(&mut self, location: f64, jump: Vec<f64>) -> Result<()> {
        if self.mesh.dim() != 1 {
            return Err(Error::InvalidBv("explicit atoms are only supported in 1D".into()));
        }
        if jump.len() != self.m {
            return Err(Error::DimensionMismatch(format!("atom jump has {} entries, expected {}", jump.len(), self.m)));
        }
        if !location.is_finite() || jump.iter().any(|j| !j.is_finite()) {
            return Err(Error::InvalidBv("non-finite atom".into()));
        }
        let (lo, hi) = span(&self.mesh);
        if location <= lo || location >= hi {
            log::warn!("dropping atom at {location}: not inside ({lo}, {hi})");
            return Ok(());
        }
        if jump.iter().all(|&j| j == 0.0) {
            return Ok(());
        }
        match self.atoms.iter_mut().find(|a| a.location == location) {
            Some(a) => {
                for (x, y) in a.jump.iter_mut().zip(&jump) {
                    *x += y;
                }
            }
            None => self.atoms.push(Atom { location, jump }),
        }
        self.atoms.retain(|a| a.jump.iter().any(|&j| j != 0.0));
        self.atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(())
    }

    #[inline]
    pub(crate) fn idx(&self, c: usize, k: usize, i: usize) -> usize {
        (c * (self.mesh.dim() + 1) + k) * self.m + i
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Value of component `i` at local vertex `k` of cell `c` (continuous part only).
    pub fn local_value(&self, c: usize, k: usize, i: usize) -> f64 {
        self.values[self.idx(c, k, i)]
    }

    /// Gradient of the cellwise affine part on cell `c`, an `m x dim` matrix.
    pub fn gradient(&self, c: usize) -> Mat {
        let d = self.mesh.dim();
        let g = self.mesh.basis_grads(c);
        let mut out = Mat::zeros(self.m, d);
        for k in 0..=d {
            for i in 0..self.m {
                let v = self.local_value(c, k, i);
                for j in 0..d {
                    out.add_at(i, j, v * g[k][j]);
                }
            }
        }
        out
    }

    /// Sum of atom jumps strictly left of `x`.
    pub fn step_part(&self, x: f64) -> Vec<f64> {
        let mut s = vec![0.0; self.m];
        for a in self.atoms.iter().take_while(|a| a.location < x) {
            for i in 0..self.m {
                s[i] += a.jump[i];
            }
        }
        s
    }

    /// Value at `x` computed from cell `c` (which must contain `x`).
    pub fn value_in_cell(&self, c: usize, x: &Point) -> Vec<f64> {
        let l = self.mesh.barycentric(c, x);
        let mut v = self.step_part(x[0]);
        if self.mesh.dim() == 2 {
            v.iter_mut().for_each(|s| *s = 0.0);
        }
        for (k, lk) in l.iter().enumerate() {
            for i in 0..self.m {
                v[i] += lk * self.local_value(c, k, i);
            }
        }
        v
    }

    /// Value at `x`, taken from the first cell containing it.
    pub fn value_at(&self, x: &Point) -> Option<Vec<f64>> {
        self.mesh.locate(x).first().map(|&c| self.value_in_cell(c, x))
    }

    pub fn max_abs(&self) -> f64 {
        let v = self.values.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut s = 0.0f64;
        let mut run = 0.0f64;
        for a in &self.atoms {
            run += a.jump.iter().map(|j| j * j).sum::<f64>().sqrt();
            s = s.max(run);
        }
        v + s
    }

    fn check_compatible(&self, other: &BvFunction) -> Result<()> {
        if self.m != other.m || !same_mesh(&self.mesh, &other.mesh) {
            return Err(Error::DimensionMismatch("functions live on different meshes or target spaces".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &BvFunction) -> Result<BvFunction> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &BvFunction) -> Result<BvFunction> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &BvFunction, s: f64) -> Result<BvFunction> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        for at in &other.atoms {
            out.push_atom(at.location, at.jump.iter().map(|j| s * j).collect())?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> BvFunction {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        if s == 0.0 {
            out.atoms.clear();
        } else {
            out.atoms.iter_mut().for_each(|a| a.jump.iter_mut().for_each(|j| *j *= s));
        }
        out
    }

    pub fn add_constant(&self, c: &[f64]) -> BvFunction {
        let mut out = self.clone();
        for (ix, v) in out.values.iter_mut().enumerate() {
            *v += c[ix % self.m];
        }
        out
    }

    /// Jump `u+ - u-` across every interior facet where the continuous part is
    /// discontinuous. 1D results exclude explicit atoms.
    pub fn facet_jumps(&self) -> Vec<(usize, Vec<f64>)> {
        let mesh = &self.mesh;
        let tol = 1e-14 * (1.0 + self.values.iter().fold(0.0f64, |a, b| a.max(b.abs())));
        let mut out = Vec::new();
        for (fi, f) in mesh.facets().iter().enumerate() {
            let Some(plus) = f.plus else { continue };
            let mut jump = vec![0.0; self.m];
            let mut nonzero = false;
            let vs: &[usize] = if mesh.dim() == 1 { &f.vertices[..1] } else { &f.vertices[..] };
            // the jump of an affine function along a facet is affine; both endpoints must agree
            let mut max_abs = 0.0f64;
            for (n, &v) in vs.iter().enumerate() {
                let km = local_index(mesh, f.minus, v);
                let kp = local_index(mesh, plus, v);
                for i in 0..self.m {
                    let j = self.local_value(plus, kp, i) - self.local_value(f.minus, km, i);
                    max_abs = max_abs.max(j.abs());
                    if n == 0 {
                        jump[i] = j;
                    } else {
                        jump[i] = 0.5 * (jump[i] + j);
                    }
                }
            }
            if max_abs > tol {
                nonzero = true;
            }
            if nonzero {
                out.push((fi, jump));
            }
        }
        out
    }

    /// True when the continuous part has no jumps across facets.
    pub fn is_continuous(&self) -> bool {
        self.facet_jumps().is_empty()
    }

    /// Derivative measure `Du = grad u L^N + D^s u`.
    pub fn derivative(&self) -> MatrixMeasure {
        let mesh = &self.mesh;
        let d = mesh.dim();
        let density: Vec<Mat> = (0..mesh.num_cells()).map(|c| self.gradient(c)).collect();
        let mut charges: Vec<Charge> = Vec::new();
        if d == 1 {
            let mut pts: Vec<(f64, Vec<f64>)> = Vec::new();
            for (fi, j) in self.facet_jumps() {
                let x = mesh.vertices()[mesh.facets()[fi].vertices[0]][0];
                pts.push((x, j));
            }
            for a in &self.atoms {
                match pts.iter_mut().find(|p| p.0 == a.location) {
                    Some(p) => p.1.iter_mut().zip(&a.jump).for_each(|(x, y)| *x += y),
                    None => pts.push((a.location, a.jump.clone())),
                }
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (x, j) in pts {
                let mat = Mat::from_entries(self.m, 1, &j);
                if let Some(ch) = Charge::new(ChargeSupport::Atom([x, 0.0]), &mat) {
                    charges.push(ch);
                }
            }
        } else {
            for (fi, j) in self.facet_jumps() {
                let f = &mesh.facets()[fi];
                let mat = Mat::outer(&j, &f.normal).scale(f.measure);
                if let Some(ch) = Charge::new(ChargeSupport::Facet(fi), &mat) {
                    charges.push(ch);
                }
            }
        }
        MatrixMeasure::new(mesh.clone(), self.m, d, density, charges)
    }

    /// Product `phi u` for a continuous piecewise-affine `phi` given by vertex values.
    ///
    /// The continuous part is interpolated at the vertices. Each atom `(z, j)` becomes
    /// an atom `(z, phi(z) j)` plus the continuous correction `j (phi - phi(z)) H_z`,
    /// interpolated cellwise (exact when `z` is a vertex).
    pub fn cutoff_multiply(&self, phi: &[f64]) -> Result<BvFunction> {
        let mesh = &self.mesh;
        if phi.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch(format!("cutoff has {} vertex values, mesh has {}", phi.len(), mesh.num_vertices())));
        }
        let mut out = BvFunction::zeros(mesh.clone(), self.m);
        for c in 0..mesh.num_cells() {
            for (k, &v) in mesh.cell(c).iter().enumerate() {
                for i in 0..self.m {
                    let ix = self.idx(c, k, i);
                    out.values[ix] = phi[v] * self.values[ix];
                }
            }
        }
        for a in &self.atoms {
            let z = a.location;
            let pz = interpolate_at(mesh, phi, z);
            for c in 0..mesh.num_cells() {
                let vs = mesh.cell(c);
                let (xl, xr) = (mesh.vertices()[vs[0]][0], mesh.vertices()[vs[1]][0]);
                if xr <= z {
                    continue;
                }
                for (k, &v) in vs.iter().enumerate() {
                    let x = mesh.vertices()[v][0];
                    let w = if xl >= z || x > z { phi[v] - pz } else { 0.0 };
                    for i in 0..self.m {
                        let ix = out.idx(c, k, i);
                        out.values[ix] += a.jump[i] * w;
                    }
                }
            }
            out.push_atom(z, a.jump.iter().map(|j| pz * j).collect())?;
        }
        Ok(out)
    }
}

pub(crate) fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.num_cells() == b.num_cells()
            && a.num_vertices() == b.num_vertices()
            && a.vertices() == b.vertices()
            && (0..a.num_cells()).all(|c| a.cell(c) == b.cell(c)))
}

pub(crate) fn local_index(mesh: &Mesh, c: usize, v: usize) -> usize {
    mesh.cell(c).iter().position(|&w| w == v).expect("vertex not in cell")
}

/// Value at `x` of the 1D continuous piecewise-affine function with vertex values `phi`.
pub(crate) fn interpolate_at(mesh: &Mesh, phi: &[f64], x: f64) -> f64 {
    let p = [x, 0.0];
    match mesh.locate(&p).first() {
        Some(&c) => {
            let l = mesh.barycentric(c, &p);
            mesh.cell(c).iter().zip(&l).map(|(&v, w)| w * phi[v]).sum()
        }
        None => 0.0,
    }
}
