use super::{random_matrix, Integrand, Mode};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Geometric grid `1, 10, ..., 1e6`.
pub const DEFAULT_T_GRID: [f64; 7] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Estimated { t_grid: Vec<f64> },
}

/// Recession function `f^inf(x, xi)`, positively 1-homogeneous in `xi`.
#[derive(Debug, Clone, Serialize)]
pub struct RecessionFn {
    #[serde(skip)]
    integrand: Integrand,
    provenance: Provenance,
}

impl RecessionFn {
    pub fn analytic(f: &Integrand) -> Self {
        RecessionFn { integrand: f.clone(), provenance: Provenance::Analytic }
    }

    /// Evaluates through [`recession_estimate`] on every call.
    pub fn estimated(f: &Integrand, t_grid: &[f64]) -> Self {
        RecessionFn { integrand: f.clone(), provenance: Provenance::Estimated { t_grid: t_grid.to_vec() } }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn integrand(&self) -> &Integrand {
        &self.integrand
    }

    pub fn dims(&self) -> (usize, usize) {
        self.integrand.dims()
    }

    /// `f^inf(x, xi)`; NaN when an estimate fails to converge.
    pub fn eval(&self, x: &Point, xi: &Mat) -> f64 {
        match &self.provenance {
            Provenance::Analytic => self.integrand.recession(x, xi),
            Provenance::Estimated { t_grid } => recession_estimate(&self.integrand, x, xi, t_grid).map(|e| e.value).unwrap_or(f64::NAN),
        }
    }

    /// Value and gradient in `xi` with the norm kink smoothed by `smoothing`.
    pub fn value_grad(&self, x: &Point, xi: &Mat, smoothing: f64) -> (f64, Mat) {
        match &self.provenance {
            Provenance::Analytic => self.integrand.value_grad(x, xi, Mode { recession: true, smoothing }),
            Provenance::Estimated { .. } => {
                let v = self.eval(x, xi);
                let mut g = Mat::zeros(xi.rows(), xi.cols());
                let h = 1e-6 * (1.0 + xi.norm());
                for i in 0..xi.rows() {
                    for j in 0..xi.cols() {
                        let mut a = *xi;
                        a.add_at(i, j, h);
                        let mut b = *xi;
                        b.add_at(i, j, -h);
                        g.set(i, j, (self.eval(x, &a) - self.eval(x, &b)) / (2.0 * h));
                    }
                }
                (v, g)
            }
        }
    }

    /// `max_{|xi| = 1} |f^inf(x, xi)|` estimated on `samples` random directions plus the
    /// coordinate directions.
    pub fn sup_on_sphere(&self, x: &Point, samples: usize, seed: u64) -> f64 {
        let (r, c) = self.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for i in 0..r {
            for j in 0..c {
                for s in [1.0, -1.0] {
                    best = best.max(self.eval(x, &Mat::unit(r, c, i, j).scale(s)).abs());
                }
            }
        }
        for _ in 0..samples {
            let xi = random_matrix(r, c, &mut rng);
            let n = xi.norm();
            if n > 0.0 {
                best = best.max(self.eval(x, &xi.scale(1.0 / n)).abs());
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecessionEstimate {
    pub value: f64,
    /// Observed order `p` in `g(t) - L ~ t^-p`; `None` when the tail is already flat.
    pub rate: Option<f64>,
    /// `|g(t_{k+1}) - g(t_k)|` along the grid.
    pub tail_differences: Vec<f64>,
    /// Largest deviation of `f(y, t eta) / t` at the last grid point under perturbations
    /// `|y - x| <= 1e-3`, `|eta - xi/|xi|| <= 1e-3`, times `|xi|`.
    pub perturbation_spread: f64,
}

/// Extrapolates `lim g(t)` from samples on an increasing grid.
///
/// The tail must shrink: the last two differences have to fall below half of the
/// largest earlier difference, unless they are already at rounding level.
pub fn extrapolate_tail(ts: &[f64], gs: &[f64]) -> std::result::Result<(f64, Option<f64>), Vec<f64>> {
    let diffs: Vec<f64> = gs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let k = gs.len();
    let last = gs[k - 1];
    let flat = 1e-13 * (1.0 + last.abs());
    let tail = diffs[diffs.len() - 2..].iter().cloned().fold(0.0, f64::max);
    if tail <= flat {
        return Ok((last, None));
    }
    let head = diffs[..diffs.len() - 2].iter().cloned().fold(0.0, f64::max);
    if !(tail < 0.5 * head) || !gs.iter().all(|g| g.is_finite()) {
        return Err(diffs);
    }
    let (d1, d2) = (gs[k - 2] - gs[k - 3], gs[k - 1] - gs[k - 2]);
    let r = ts[k - 1] / ts[k - 2];
    let r0 = ts[k - 2] / ts[k - 3];
    let p = if d2 != 0.0 && d1 != 0.0 { ((d1.abs() / d2.abs()).ln() / (0.5 * (r.ln() + r0.ln()))).clamp(0.5, 4.0) } else { 1.0 };
    let value = last + d2 / (r.powf(p) - 1.0);
    Ok((value, Some(p)))
}

/// Estimates `f^inf(x, xi) = |xi| lim_t f(x, t xi_hat) / t` on `t_grid`.
pub fn recession_estimate(f: &Integrand, x: &Point, xi: &Mat, t_grid: &[f64]) -> Result<RecessionEstimate> {
    let n = xi.norm();
    if n == 0.0 {
        return Ok(RecessionEstimate { value: 0.0, rate: None, tail_differences: vec![], perturbation_spread: 0.0 });
    }
    if t_grid.len() < 4 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < 1.0 || t_grid[t_grid.len() - 1] > 1e7 {
        return Err(Error::InvalidParams("t grid must be increasing, inside [1, 1e7], with at least 4 points".into()));
    }
    let dir = xi.scale(1.0 / n);
    let gs: Vec<f64> = t_grid.iter().map(|&t| f.eval(x, &dir.scale(t)) / t).collect();
    let (value, rate) = extrapolate_tail(t_grid, &gs).map_err(|tail| Error::RecessionNotDetected { xi: xi.entries(), tail })?;
    let tail_differences = gs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let t = t_grid[t_grid.len() - 1];
    let base = gs[gs.len() - 1];
    let mut spread: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let y = [x[0] + 1e-3 * rng.random_range(-1.0..1.0), x[1] + 1e-3 * rng.random_range(-1.0..1.0)];
        let p = random_matrix(xi.rows(), xi.cols(), &mut rng);
        let eta = dir + p.scale(1e-3 / p.norm().max(1e-300));
        spread = spread.max((f.eval(&y, &eta.scale(t)) / t - base).abs());
    }
    Ok(RecessionEstimate { value: value * n, rate, tail_differences, perturbation_spread: spread * n })
}

#[derive(Debug, Clone, Serialize)]
pub struct MuEstimate {
    pub t: f64,
    /// Sampled lower estimate of `mu(t)`.
    pub sampled: f64,
    /// Closed form (exact for catalog entries, an upper bound for composites).
    pub analytic: Option<f64>,
}

/// Sampled `sup |f(x, xi) - f^inf(x, xi)| / (1 + |xi|)` over `x` in `points` and
/// `|xi|` in `[t, 100 t]` (including `xi = 0` when `t = 0`).
pub fn mu_estimate(f: &Integrand, finf: &RecessionFn, t: f64, points: &[Point], samples: usize, seed: u64) -> MuEstimate {
    let (r, c) = f.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii: Vec<f64> = if t > 0.0 {
        (0..16).map(|k| t * 100f64.powf(k as f64 / 15.0)).collect()
    } else {
        let mut v = vec![0.0];
        v.extend((0..16).map(|k| 1e-3 * 1e5f64.powf(k as f64 / 15.0)));
        v
    };
    let per = (samples / radii.len()).max(1);
    let mut best: f64 = 0.0;
    for &x in points {
        for &s in &radii {
            for _ in 0..per {
                let d = random_matrix(r, c, &mut rng);
                let xi = d.scale(s / d.norm().max(1e-300));
                let v = (f.eval(&x, &xi) - finf.eval(&x, &xi)).abs() / (1.0 + xi.norm());
                best = best.max(v);
            }
        }
    }
    let radius = points.iter().map(crate::linalg::norm2).fold(0.0, f64::max);
    MuEstimate { t, sampled: best, analytic: f.mu_analytic(t, radius) }
}

/// `mu` on an increasing grid. Sampled values take a running maximum from the right,
/// since the supremum over `|xi| >= t_i` includes every later sample.
pub fn mu_table(f: &Integrand, finf: &RecessionFn, grid: &[f64], points: &[Point], samples: usize, seed: u64) -> Vec<MuEstimate> {
    let mut out: Vec<MuEstimate> =
        grid.iter().enumerate().map(|(i, &t)| mu_estimate(f, finf, t, points, samples, seed.wrapping_add(i as u64))).collect();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i].sampled = out[i].sampled.max(out[i + 1].sampled);
    }
    out
}
