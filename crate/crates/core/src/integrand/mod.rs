//! Integrands `f(x, xi)` of linear growth, their recession functions, and the
//! deviation modulus `mu(t)`.

mod expr;
mod recession;

pub use expr::{Expr, Mode};
pub use recession::{
    extrapolate_tail, mu_estimate, mu_table, recession_estimate, MuEstimate, Provenance, RecessionEstimate, RecessionFn, DEFAULT_T_GRID,
};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Point};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Catalog tags understood by [`catalog_get`].
pub const CATALOG_TAGS: &[&str] =
    &["linear", "norm", "negnorm", "area", "boundary-null-lagrangian", "norm-sin", "const", "scaled", "shifted", "modulated", "sum"];

/// Config form of an integrand: a catalog tag with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub tag: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl IntegrandSpec {
    pub fn new(tag: &str, params: serde_json::Value) -> Self {
        IntegrandSpec { tag: tag.to_string(), params }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Integrand {
    tag: String,
    rows: usize,
    cols: usize,
    expr: Expr,
}

impl Integrand {
    pub fn new(tag: &str, rows: usize, cols: usize, expr: Expr) -> Result<Self> {
        if !(1..=2).contains(&rows) || !(1..=2).contains(&cols) {
            return Err(Error::InvalidParams(format!("shape {rows}x{cols} not supported")));
        }
        check_shapes(&expr, rows, cols)?;
        Ok(Integrand { tag: tag.to_string(), rows, cols, expr })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// `(M, N)`: matrices are `M x N`.
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, x: &Point, xi: &Mat) -> f64 {
        self.expr.value(x, xi, Mode::EXACT)
    }

    /// Analytic recession function `f^inf(x, xi)`.
    pub fn recession(&self, x: &Point, xi: &Mat) -> f64 {
        self.expr.value(x, xi, Mode::RECESSION)
    }

    pub fn eval_mode(&self, x: &Point, xi: &Mat, mode: Mode) -> f64 {
        self.expr.value(x, xi, mode)
    }

    pub fn value_grad(&self, x: &Point, xi: &Mat, mode: Mode) -> (f64, Mat) {
        self.expr.value_grad(x, xi, mode)
    }

    pub fn growth(&self, radius: f64) -> f64 {
        self.expr.growth(radius)
    }

    pub fn lipschitz(&self, radius: f64) -> f64 {
        self.expr.lipschitz(radius)
    }

    pub fn depends_on_x(&self) -> bool {
        self.expr.depends_on_x()
    }

    /// Closed-form `mu(t)` for `|x| <= radius`, when known.
    pub fn mu_analytic(&self, t: f64, radius: f64) -> Option<f64> {
        self.expr.mu(t, radius)
    }

    /// Whether [`Integrand::mu_analytic`] is exact (otherwise an upper bound).
    pub fn mu_is_exact(&self) -> bool {
        self.expr.mu_is_exact()
    }

    /// Integrand `xi -> f^inf(x, xi)` as its own integrand.
    pub fn recession_integrand(&self) -> Integrand {
        Integrand { tag: format!("{}-recession", self.tag), rows: self.rows, cols: self.cols, expr: recession_expr(&self.expr) }
    }

    /// Spot-checks `|f(x, xi)| <= C (1 + |xi|)` on random samples; returns the worst ratio
    /// `|f| / (C (1 + |xi|))`.
    pub fn spot_check_growth(&self, points: &[Point], samples: usize, rng: &mut impl Rng) -> f64 {
        let radius = points.iter().map(crate::linalg::norm2).fold(0.0, f64::max);
        let c = self.growth(radius).max(1e-300);
        let mut worst: f64 = 0.0;
        for s in 0..samples {
            let x = points[s % points.len()];
            let scale = 10f64.powf(rng.random_range(-2.0..4.0));
            let xi = random_matrix(self.rows, self.cols, rng).scale(scale);
            worst = worst.max(self.eval(&x, &xi).abs() / (c * (1.0 + xi.norm())));
        }
        worst
    }

    /// Largest `|f(x, xi) - f(x', xi)|` over random `|x - x'| <= eps`, `|xi| <= 10`.
    pub fn spot_check_continuity(&self, points: &[Point], eps: f64, samples: usize, rng: &mut impl Rng) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..samples {
            let x = points[s % points.len()];
            let y = [x[0] + eps * rng.random_range(-1.0..1.0), x[1] + eps * rng.random_range(-1.0..1.0)];
            let xi = random_matrix(self.rows, self.cols, rng).scale(rng.random_range(0.0..10.0));
            worst = worst.max((self.eval(&x, &xi) - self.eval(&y, &xi)).abs());
        }
        worst
    }
}

fn recession_expr(e: &Expr) -> Expr {
    match e {
        Expr::Linear { .. } | Expr::Norm => e.clone(),
        Expr::Area | Expr::NormSin => Expr::Norm,
        Expr::Const { .. } => Expr::Const { value: 0.0 },
        Expr::Scale { factor, inner } => Expr::Scale { factor: *factor, inner: Box::new(recession_expr(inner)) },
        Expr::Shift { inner, .. } => recession_expr(inner),
        Expr::Sum { terms } => Expr::Sum { terms: terms.iter().map(recession_expr).collect() },
        Expr::Modulate { c0, c1, inner } => Expr::Modulate { c0: *c0, c1: *c1, inner: Box::new(recession_expr(inner)) },
    }
}

fn check_shapes(e: &Expr, rows: usize, cols: usize) -> Result<()> {
    let bad = |what: &str, m: &Mat| Err(Error::InvalidParams(format!("{what} has shape {:?}, integrand expects {rows}x{cols}", m.dims())));
    match e {
        Expr::Linear { m } if m.dims() != (rows, cols) => bad("linear coefficient", m),
        Expr::Shift { shift, .. } if shift.dims() != (rows, cols) => bad("shift", shift),
        Expr::Scale { inner, .. } | Expr::Shift { inner, .. } | Expr::Modulate { inner, .. } => check_shapes(inner, rows, cols),
        Expr::Sum { terms } => terms.iter().try_for_each(|t| check_shapes(t, rows, cols)),
        _ => Ok(()),
    }
}

/// Standard Gaussian matrix.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.sample::<f64, _>(StandardNormal));
        }
    }
    m
}

fn params<T: DeserializeOwned>(tag: &str, v: &serde_json::Value) -> Result<T> {
    let v = if v.is_null() { serde_json::json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Error::InvalidParams(format!("{tag}: {e}")))
}

fn default_shape() -> [usize; 2] {
    [1, 1]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeParams {
    #[serde(default = "default_shape")]
    shape: [usize; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearParams {
    m: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NullLagrangianParams {
    a: Vec<f64>,
    t: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstParams {
    value: f64,
    #[serde(default = "default_shape")]
    shape: [usize; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaledParams {
    factor: f64,
    inner: IntegrandSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftedParams {
    shift: Vec<Vec<f64>>,
    inner: IntegrandSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModulatedParams {
    c0: f64,
    #[serde(default)]
    c1: [f64; 2],
    inner: IntegrandSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Term {
    #[serde(default = "one")]
    weight: f64,
    integrand: IntegrandSpec,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SumParams {
    terms: Vec<Term>,
}

fn matrix(tag: &str, rows: &[Vec<f64>]) -> Result<Mat> {
    Mat::from_rows(rows).ok_or_else(|| Error::InvalidParams(format!("{tag}: matrix must be 1x1 to 2x2 and rectangular")))
}

/// Builds a catalog integrand from its tag and parameters.
pub fn catalog_get(spec: &IntegrandSpec) -> Result<Integrand> {
    let tag = spec.tag.as_str();
    let p = &spec.params;
    match tag {
        "linear" => {
            let lp: LinearParams = params(tag, p)?;
            let m = matrix(tag, &lp.m)?;
            Integrand::new(tag, m.rows(), m.cols(), Expr::Linear { m })
        }
        "norm" | "negnorm" | "area" | "norm-sin" => {
            let sp: ShapeParams = params(tag, p)?;
            let expr = match tag {
                "norm" => Expr::Norm,
                "negnorm" => Expr::Scale { factor: -1.0, inner: Box::new(Expr::Norm) },
                "area" => Expr::Area,
                _ => Expr::NormSin,
            };
            Integrand::new(tag, sp.shape[0], sp.shape[1], expr)
        }
        "boundary-null-lagrangian" => {
            let np: NullLagrangianParams = params(tag, p)?;
            if np.a.is_empty() || np.t.is_empty() || np.a.len() > 2 || np.t.len() > 2 {
                return Err(Error::InvalidParams(format!("{tag}: a and t need 1 or 2 entries")));
            }
            let m = Mat::outer(&np.a, &np.t);
            Integrand::new(tag, m.rows(), m.cols(), Expr::Linear { m })
        }
        "const" => {
            let cp: ConstParams = params(tag, p)?;
            Integrand::new(tag, cp.shape[0], cp.shape[1], Expr::Const { value: cp.value })
        }
        "scaled" => {
            let sp: ScaledParams = params(tag, p)?;
            let inner = catalog_get(&sp.inner)?;
            Integrand::new(tag, inner.rows, inner.cols, Expr::Scale { factor: sp.factor, inner: Box::new(inner.expr) })
        }
        "shifted" => {
            let sp: ShiftedParams = params(tag, p)?;
            let inner = catalog_get(&sp.inner)?;
            let shift = matrix(tag, &sp.shift)?;
            Integrand::new(tag, inner.rows, inner.cols, Expr::Shift { shift, inner: Box::new(inner.expr) })
        }
        "modulated" => {
            let mp: ModulatedParams = params(tag, p)?;
            let inner = catalog_get(&mp.inner)?;
            Integrand::new(tag, inner.rows, inner.cols, Expr::Modulate { c0: mp.c0, c1: mp.c1, inner: Box::new(inner.expr) })
        }
        "sum" => {
            let sp: SumParams = params(tag, p)?;
            if sp.terms.is_empty() {
                return Err(Error::InvalidParams("sum: no terms".into()));
            }
            let parts: Vec<Integrand> = sp.terms.iter().map(|t| catalog_get(&t.integrand)).collect::<Result<_>>()?;
            let (rows, cols) = parts[0].dims();
            if parts.iter().any(|q| q.dims() != (rows, cols)) {
                return Err(Error::InvalidParams("sum: terms have different shapes".into()));
            }
            let terms = sp.terms.iter().zip(parts).map(|(t, q)| Expr::Scale { factor: t.weight, inner: Box::new(q.expr) }).collect();
            Integrand::new(tag, rows, cols, Expr::Sum { terms })
        }
        other => Err(Error::UnknownIntegrand(other.to_string())),
    }
}

/// Shorthand constructors for the catalog.
pub mod catalog {
    use super::*;

    pub fn linear(m: &Mat) -> Integrand {
        Integrand::new("linear", m.rows(), m.cols(), Expr::Linear { m: *m }).expect("valid shape")
    }

    pub fn norm(rows: usize, cols: usize) -> Integrand {
        Integrand::new("norm", rows, cols, Expr::Norm).expect("valid shape")
    }

    pub fn negnorm(rows: usize, cols: usize) -> Integrand {
        Integrand::new("negnorm", rows, cols, Expr::Scale { factor: -1.0, inner: Box::new(Expr::Norm) }).expect("valid shape")
    }

    pub fn area(rows: usize, cols: usize) -> Integrand {
        Integrand::new("area", rows, cols, Expr::Area).expect("valid shape")
    }

    pub fn norm_sin(rows: usize, cols: usize) -> Integrand {
        Integrand::new("norm-sin", rows, cols, Expr::NormSin).expect("valid shape")
    }

    /// `xi -> xi : (a ⊗ t)`.
    pub fn boundary_null_lagrangian(a: &[f64], t: &[f64]) -> Integrand {
        let m = Mat::outer(a, t);
        Integrand::new("boundary-null-lagrangian", m.rows(), m.cols(), Expr::Linear { m }).expect("valid shape")
    }

    /// The six basic catalog entries for `M x N` matrices, with `a = e_1`, `t = e_N`
    /// and the linear coefficient `e_1 ⊗ e_1`.
    pub fn basic(rows: usize, cols: usize) -> Vec<Integrand> {
        let mut a = vec![0.0; rows];
        a[0] = 1.0;
        let mut t = vec![0.0; cols];
        t[cols - 1] = 1.0;
        vec![
            linear(&Mat::unit(rows, cols, 0, 0)),
            norm(rows, cols),
            negnorm(rows, cols),
            area(rows, cols),
            boundary_null_lagrangian(&a, &t),
            norm_sin(rows, cols),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    #[test]
    fn catalog_boundary_jump() {
        let f = catalog_get(&IntegrandSpec::new("linear", json!({"m": [[1.0]]}))).unwrap();
        assert_eq!(f.eval(&[0.3, 0.0], &Mat::scalar(-2.5)), -2.5);
        assert_eq!(f.recession(&[0.3, 0.0], &Mat::scalar(-1.0)), -1.0);
        let g = catalog_get(&IntegrandSpec::new("negnorm", json!({}))).unwrap();
        assert_eq!(g.eval(&[0.0, 0.0], &Mat::scalar(3.0)), -3.0);
        assert_eq!(g.growth(1.0), 1.0);
        let nl = catalog_get(&IntegrandSpec::new("boundary-null-lagrangian", json!({"a": [1.0, 2.0], "t": [0.0, 1.0]}))).unwrap();
        let xi = Mat::from_rows(&[vec![1.0, 3.0], vec![5.0, 7.0]]).unwrap();
        assert_eq!(nl.eval(&[0.0, 0.0], &xi), 3.0 + 14.0);
        assert!(matches!(catalog_get(&IntegrandSpec::new("nope", json!({}))), Err(Error::UnknownIntegrand(_))));
    }

    #[test]
    fn composite_sum_and_shapes() {
        let spec = IntegrandSpec::new(
            "sum",
            json!({"terms": [
                {"weight": 2.0, "integrand": {"tag": "norm", "params": {"shape": [1, 2]}}},
                {"integrand": {"tag": "linear", "params": {"m": [[1.0, 0.0]]}}}
            ]}),
        );
        let f = catalog_get(&spec).unwrap();
        let xi = Mat::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0], &xi), 13.0);
        let bad = IntegrandSpec::new(
            "sum",
            json!({"terms": [
                {"integrand": {"tag": "norm", "params": {"shape": [1, 2]}}},
                {"integrand": {"tag": "norm"}}
            ]}),
        );
        assert!(catalog_get(&bad).is_err());
    }

    #[test]
    fn growth_and_continuity_spot_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = [[0.0, 0.0], [1.0, 0.5], [0.2, 0.9]];
        for f in catalog::basic(2, 2) {
            assert!(f.spot_check_growth(&pts, 500, &mut rng) <= 1.0 + 1e-12, "{}", f.tag());
            assert_eq!(f.spot_check_continuity(&pts, 1e-3, 100, &mut rng), 0.0);
        }
        let m = catalog_get(&IntegrandSpec::new("modulated", json!({"c0": 1.0, "c1": [0.5, 0.0], "inner": {"tag": "area"}}))).unwrap();
        assert!(m.spot_check_growth(&pts, 500, &mut rng) <= 1.0);
        assert!(m.spot_check_continuity(&pts, 1e-3, 100, &mut rng) < 1e-2);
    }

    #[test]
    fn smoothed_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in catalog::basic(2, 2) {
            for _ in 0..20 {
                let xi = random_matrix(2, 2, &mut rng);
                let mode = Mode { recession: false, smoothing: 1e-2 };
                let (_, g) = f.value_grad(&[0.0, 0.0], &xi, mode);
                for i in 0..2 {
                    for j in 0..2 {
                        let h = 1e-6;
                        let mut a = xi;
                        a.add_at(i, j, h);
                        let mut b = xi;
                        b.add_at(i, j, -h);
                        let fd = (f.eval_mode(&[0.0, 0.0], &a, mode) - f.eval_mode(&[0.0, 0.0], &b, mode)) / (2.0 * h);
                        assert!((fd - g.get(i, j)).abs() < 1e-6, "{}", f.tag());
                    }
                }
            }
        }
    }
}
