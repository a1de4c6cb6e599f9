//! Numerical quasiconvexity test at a matrix.
//!
//! The deficit `inf_phi int_B g(xi + grad phi) - g(xi)` is minimized over continuous
//! piecewise-affine fields clamped on the whole boundary of the unit cube, with a
//! per-cell gradient cap `L`. A negative deficit comes with a witness field.

use crate::error::{Error, Result};
use crate::integrand::{Integrand, Mode};
use crate::linalg::{Mat, Point};
use crate::mesh::{interval_mesh, unit_square_mesh, Mesh};
use crate::minimize::{minimize_field_from, Constraint, Problem, SolverOptions, TestField};
use serde::Serialize;
use std::sync::Arc;

pub const DEFAULT_L_GRID: [f64; 3] = [1.0, 4.0, 16.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QcVerdict {
    QcPlausible,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct QcRow {
    pub cap: f64,
    pub deficit: f64,
    pub iterations: usize,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QcReport {
    pub x0: Point,
    pub xi: Mat,
    /// Whether the recession function was tested instead of the integrand.
    pub recession: bool,
    /// Smallest deficit over the cap grid.
    pub deficit: f64,
    pub table: Vec<QcRow>,
    pub tol: f64,
    pub verdict: QcVerdict,
    pub low_confidence: bool,
    pub witness: Option<TestField>,
}

#[derive(Debug, Clone)]
pub struct QcOptions {
    pub l_grid: Vec<f64>,
    /// Defaults to `1e-6 |B| (1 + |xi|)`.
    pub tol: Option<f64>,
    /// Test `f^inf(x0, .)` rather than `f(x0, .)`.
    pub recession: bool,
    pub solver: SolverOptions,
}

impl Default for QcOptions {
    fn default() -> Self {
        QcOptions { l_grid: DEFAULT_L_GRID.to_vec(), tol: None, recession: false, solver: SolverOptions::default() }
    }
}

/// Unit interval or unit square with `n` subdivisions per side, clamped on the boundary.
pub fn qc_mesh(dim: usize, n: usize) -> Result<Arc<Mesh>> {
    let mut mesh = match dim {
        1 => interval_mesh(0.0, 1.0, n)?,
        2 => unit_square_mesh(n)?,
        _ => return Err(Error::DimensionMismatch(format!("dimension {dim} is not supported"))),
    };
    mesh.clamp_all_boundary();
    Ok(Arc::new(mesh))
}

/// Quasiconvexity deficit of `g = f(x0, .)` at `xi`.
pub fn qc_deficit(f: &Integrand, x0: &Point, xi: &Mat, mesh: Arc<Mesh>, opts: &QcOptions) -> Result<QcReport> {
    let (rows, cols) = f.dims();
    if xi.dims() != (rows, cols) || mesh.dim() != cols {
        return Err(Error::DimensionMismatch(format!(
            "integrand is {rows}x{cols}, xi is {}x{}, mesh dimension {}",
            xi.rows(),
            xi.cols(),
            mesh.dim()
        )));
    }
    let boundary = mesh.boundary_vertices();
    let clamped = mesh.clamped_vertices();
    if boundary.len() != clamped.len() {
        return Err(Error::PreconditionUnmet("quasiconvexity test mesh must be clamped on its whole boundary".into()));
    }
    let measure = mesh.total_measure();
    let tol = opts.tol.unwrap_or(1e-6 * measure * (1.0 + xi.norm()));
    let recession = opts.recession;
    let x = *x0;
    let base = move |delta: f64| f.eval_mode(&x, xi, Mode { recession, smoothing: delta });
    let density = move |_: &Point, eta: &Mat, delta: f64| {
        let (v, g) = f.value_grad(&x, &(*xi + *eta), Mode { recession, smoothing: delta });
        (v - base(delta), g)
    };
    let problem = Problem::new(mesh, rows, &density, true);
    let mut caps = opts.l_grid.clone();
    caps.sort_by(f64::total_cmp);
    let mut table = Vec::with_capacity(caps.len());
    let mut best: Option<(f64, TestField, bool)> = None;
    let mut warm: Vec<Vec<f64>> = Vec::new();
    for &cap in &caps {
        let r = minimize_field_from(&problem, Constraint::GradientCap { cap }, &opts.solver, &warm)?;
        table.push(QcRow { cap, deficit: r.value, iterations: r.iterations, low_confidence: r.low_confidence });
        warm = vec![r.witness.values.clone()];
        if best.as_ref().is_none_or(|b| r.value < b.0) {
            best = Some((r.value, r.witness, r.low_confidence));
        }
    }
    let (deficit, witness, low) = best.ok_or_else(|| Error::InvalidParams("empty gradient cap grid".into()))?;
    let verdict = if deficit < -tol { QcVerdict::Violated } else { QcVerdict::QcPlausible };
    Ok(QcReport {
        x0: *x0,
        xi: *xi,
        recession,
        deficit,
        table,
        tol,
        verdict,
        low_confidence: verdict == QcVerdict::QcPlausible && low,
        witness: (verdict == QcVerdict::Violated).then_some(witness),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::catalog;

    fn quick() -> QcOptions {
        QcOptions { solver: SolverOptions { restarts: 2, max_iter: 150, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn negnorm_violates_at_zero() {
        let f = catalog::negnorm(1, 2);
        let r = qc_deficit(&f, &[0.5, 0.5], &Mat::zeros(1, 2), qc_mesh(2, 4).unwrap(), &quick()).unwrap();
        assert_eq!(r.verdict, QcVerdict::Violated);
        assert!(r.deficit < -0.5);
        assert!(r.table.windows(2).all(|w| w[1].deficit <= w[0].deficit));
    }

    #[test]
    fn linear_deficit_vanishes() {
        let f = catalog::linear(&Mat::from_rows(&[vec![1.0, -2.0]]).unwrap());
        let xi = Mat::from_rows(&[vec![0.3, 0.7]]).unwrap();
        let r = qc_deficit(&f, &[0.5, 0.5], &xi, qc_mesh(2, 4).unwrap(), &quick()).unwrap();
        assert!(r.deficit.abs() <= 1e-8);
        assert_eq!(r.verdict, QcVerdict::QcPlausible);
    }

    #[test]
    fn unclamped_mesh_is_refused() {
        let f = catalog::norm(1, 1);
        let mesh = Arc::new(interval_mesh(0.0, 1.0, 4).unwrap());
        assert!(qc_deficit(&f, &[0.5, 0.0], &Mat::scalar(0.0), mesh, &quick()).is_err());
    }
}
