//! The functional `F(u) = int f(x, grad u) dx + int f^inf(x, dDu/d|Du|) d|D^s u|`,
//! its measure form `G`, and property harnesses built on them.

use crate::bv::{BvFunction, ChargeSupport, MatrixMeasure};
use crate::error::{Error, Result};
use crate::integrand::{Integrand, RecessionFn};
use crate::linalg::Mat;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct FunctionalOptions {
    /// Degree of the per-cell quadrature in `x`; unused for `x`-free integrands.
    pub quad_degree: usize,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        FunctionalOptions { quad_degree: 2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalValue {
    pub total: f64,
    pub bulk: f64,
    pub singular: f64,
    #[serde(skip)]
    pub per_cell: Vec<f64>,
    #[serde(skip)]
    pub per_charge: Vec<f64>,
}

fn check_dims(f: &Integrand, finf: &RecessionFn, mu: &MatrixMeasure) -> Result<()> {
    if f.dims() != mu.dims() || finf.dims() != mu.dims() {
        return Err(Error::DimensionMismatch(format!("integrand expects {:?} matrices, measure has {:?}", f.dims(), mu.dims())));
    }
    Ok(())
}

fn cell_value(f: &Integrand, mu: &MatrixMeasure, c: usize, opts: FunctionalOptions) -> f64 {
    let mesh = mu.mesh();
    let xi = mu.density(c);
    if f.depends_on_x() {
        mesh.quadrature(c, opts.quad_degree).iter().map(|(x, w)| w * f.eval(x, xi)).sum()
    } else {
        f.eval(&mesh.centroid(c), xi) * mesh.cell_measure(c)
    }
}

/// `G(mu)`: density through `f`, singular charges through `f^inf` at their polar.
pub fn eval_g_with(f: &Integrand, finf: &RecessionFn, mu: &MatrixMeasure, opts: FunctionalOptions) -> Result<FunctionalValue> {
    check_dims(f, finf, mu)?;
    let n = mu.mesh().num_cells();
    let per_cell: Vec<f64> = (0..n).map(|c| cell_value(f, mu, c, opts)).collect();
    let per_charge: Vec<f64> = mu.charges().iter().map(|ch| finf.eval(&mu.charge_location(ch), &ch.polar) * ch.mass).collect();
    let bulk: f64 = per_cell.iter().sum();
    let singular: f64 = per_charge.iter().sum();
    if !(bulk.is_finite() && singular.is_finite()) {
        return Err(Error::NonFinite { value: bulk + singular, snapshot: vec![bulk, singular] });
    }
    Ok(FunctionalValue { total: bulk + singular, bulk, singular, per_cell, per_charge })
}

pub fn eval_g(f: &Integrand, finf: &RecessionFn, mu: &MatrixMeasure) -> Result<f64> {
    Ok(eval_g_with(f, finf, mu, FunctionalOptions::default())?.total)
}

pub fn eval_f_with(f: &Integrand, finf: &RecessionFn, u: &BvFunction, opts: FunctionalOptions) -> Result<FunctionalValue> {
    eval_g_with(f, finf, &u.derivative(), opts)
}

pub fn eval_f(f: &Integrand, finf: &RecessionFn, u: &BvFunction) -> Result<FunctionalValue> {
    eval_f_with(f, finf, u, FunctionalOptions::default())
}

/// Key identifying a singular support, for merging charges of several measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SupportKey {
    Atom(u64, u64),
    Facet(usize),
}

fn key(s: &ChargeSupport) -> SupportKey {
    match s {
        ChargeSupport::Atom(p) => SupportKey::Atom(p[0].to_bits(), p[1].to_bits()),
        ChargeSupport::Facet(f) => SupportKey::Facet(*f),
    }
}

/// `sum_k w_k G(mu_k)` accumulated per cell and per singular support in one pass, so
/// that cancelling terms are combined before summation.
pub fn signed_combination(f: &Integrand, finf: &RecessionFn, terms: &[(f64, &MatrixMeasure)]) -> Result<f64> {
    let Some((_, first)) = terms.first() else { return Ok(0.0) };
    for (_, mu) in terms {
        check_dims(f, finf, mu)?;
        if mu.mesh().num_cells() != first.mesh().num_cells() {
            return Err(Error::DimensionMismatch("measures on different meshes".into()));
        }
    }
    let opts = FunctionalOptions::default();
    let mut total = 0.0;
    for c in 0..first.mesh().num_cells() {
        total += terms.iter().map(|(w, mu)| w * cell_value(f, mu, c, opts)).sum::<f64>();
    }
    let mut by_support: BTreeMap<SupportKey, f64> = BTreeMap::new();
    for (w, mu) in terms {
        for ch in mu.charges() {
            *by_support.entry(key(&ch.support)).or_insert(0.0) += w * finf.eval(&mu.charge_location(ch), &ch.polar) * ch.mass;
        }
    }
    total += by_support.values().sum::<f64>();
    if !total.is_finite() {
        return Err(Error::NonFinite { value: total, snapshot: vec![] });
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityVerdict {
    Consistent,
    Inconsistent,
    /// The total-variation gap does not vanish; no verdict is given.
    PreconditionFlagged,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityRow {
    pub n: usize,
    pub tv_gap: f64,
    pub g_gap: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    pub threshold: f64,
    pub verdict: ContinuityVerdict,
}

/// Tabulates `(|mu_n - lambda_n|(Omega), |G(mu_n) - G(lambda_n)|)` over a pair sequence.
pub fn uniform_continuity_probe(
    f: &Integrand,
    finf: &RecessionFn,
    pairs: &[(usize, MatrixMeasure, MatrixMeasure)],
    threshold: f64,
) -> Result<ContinuityReport> {
    if pairs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (n, mu, lambda) in pairs {
        let tv_gap = mu.sub(lambda)?.total_variation(None);
        let g_gap = signed_combination(f, finf, &[(1.0, mu), (-1.0, lambda)])?.abs();
        let mass = mu.total_variation(None).max(lambda.total_variation(None));
        rows.push(ContinuityRow { n: *n, tv_gap, g_gap, mass });
    }
    let half = rows.len() / 2;
    let head_mass = rows[..half.max(1)].iter().map(|r| r.mass).fold(0.0, f64::max);
    let tail_mass = rows[half..].iter().map(|r| r.mass).fold(0.0, f64::max);
    if rows.len() > 1 && tail_mass > 2.0 * head_mass + 1.0 {
        return Err(Error::PreconditionUnmet(format!("masses grow from {head_mass} to {tail_mass}")));
    }
    let last = rows.last().unwrap();
    let first = &rows[0];
    let verdict = if !(last.tv_gap < threshold && last.tv_gap <= first.tv_gap) {
        ContinuityVerdict::PreconditionFlagged
    } else if last.g_gap < threshold && last.g_gap <= first.g_gap + 1e-12 {
        ContinuityVerdict::Consistent
    } else {
        ContinuityVerdict::Inconsistent
    };
    Ok(ContinuityReport { rows, threshold, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditivityVerdict {
    Additive,
    NotAdditive,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityRow {
    pub n: usize,
    pub residual: f64,
    /// Residual divided by `1 + |D u_n|(Omega)`.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub rows: Vec<AdditivityRow>,
    pub threshold: f64,
    pub verdict: AdditivityVerdict,
}

/// Largest deviation between `u` and the sum of `parts` over vertex values and atoms.
pub fn reassembly_error(u: &BvFunction, parts: &[BvFunction]) -> Result<f64> {
    let mut sum = BvFunction::zeros(u.mesh().clone(), u.m());
    for p in parts {
        sum = sum.add(p)?;
    }
    let d = u.sub(&sum)?;
    let vals = d.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let atoms = d.atoms().iter().flat_map(|a| a.jump.iter()).fold(0.0f64, |a, b| a.max(b.abs()));
    Ok(vals.max(atoms))
}

/// `F(u_n + v) - F(v) - sum_j [F(u_{j,n} + v) - F(v)]` for each member.
pub fn additivity_residual(
    f: &Integrand,
    finf: &RecessionFn,
    v: &BvFunction,
    members: &[(usize, BvFunction, Vec<BvFunction>)],
    threshold: f64,
) -> Result<AdditivityReport> {
    if members.is_empty() {
        return Err(Error::EmptySequence);
    }
    let dv = v.derivative();
    let mut rows = Vec::with_capacity(members.len());
    for (n, u, parts) in members {
        let scale = 1.0 + u.max_abs();
        let err = reassembly_error(u, parts)?;
        if err > 1e-12 * scale {
            return Err(Error::ComponentsMismatch(err));
        }
        let whole = u.add(v)?.derivative();
        let pieces: Vec<MatrixMeasure> = parts.iter().map(|p| p.add(v).map(|w| w.derivative())).collect::<Result<_>>()?;
        let mut terms: Vec<(f64, &MatrixMeasure)> = vec![(1.0, &whole), (parts.len() as f64 - 1.0, &dv)];
        terms.extend(pieces.iter().map(|p| (-1.0, p)));
        let residual = signed_combination(f, finf, &terms)?;
        let tv = u.derivative().total_variation(None);
        rows.push(AdditivityRow { n: *n, residual, relative: residual.abs() / (1.0 + tv) });
    }
    let last = rows.last().unwrap().residual.abs();
    let verdict = if last < threshold { AdditivityVerdict::Additive } else { AdditivityVerdict::NotAdditive };
    Ok(AdditivityReport { rows, threshold, verdict })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationResidual {
    pub absolute: f64,
    /// `absolute / (1 + |D u_n|(Omega))`.
    pub relative: f64,
}

/// `F(u + u_n) - F(u) - F(u_n) + F(0)` in one pass.
pub fn concentration_residual(f: &Integrand, finf: &RecessionFn, u: &BvFunction, un: &BvFunction) -> Result<ConcentrationResidual> {
    let sum = u.add(un)?.derivative();
    let du = u.derivative();
    let dn = un.derivative();
    let zero = MatrixMeasure::zero(u.mesh().clone(), u.m());
    let absolute = signed_combination(f, finf, &[(1.0, &sum), (-1.0, &du), (-1.0, &dn), (1.0, &zero)])?.abs();
    Ok(ConcentrationResidual { absolute, relative: absolute / (1.0 + dn.total_variation(None)) })
}

/// Constant matrix density on every cell, for building pairs.
pub fn density(mu_mesh: &std::sync::Arc<crate::mesh::Mesh>, xi: &Mat) -> MatrixMeasure {
    MatrixMeasure::uniform_density(mu_mesh.clone(), xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::catalog;
    use crate::mesh::{interval_mesh, unit_square_mesh};
    use std::sync::Arc;

    #[test]
    fn boundary_jump_values() {
        let mesh = Arc::new(interval_mesh(0.0, 1.0, 8).unwrap());
        let f = catalog::linear(&Mat::scalar(1.0));
        let finf = RecessionFn::analytic(&f);
        let u = BvFunction::piecewise_constant_1d(mesh.clone(), &[0.25], &[1.0, 0.0]).unwrap();
        let v = eval_f(&f, &finf, &u).unwrap();
        assert_eq!((v.bulk, v.singular, v.total), (0.0, -1.0, -1.0));
        let z = eval_f(&f, &finf, &BvFunction::zeros(mesh, 1)).unwrap();
        assert_eq!(z.total, 0.0);
    }

    #[test]
    fn norm_of_affine_on_square() {
        let mesh = Arc::new(unit_square_mesh(4).unwrap());
        let f = catalog::norm(1, 2);
        let xi = Mat::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let u = BvFunction::affine(mesh, &xi, &[0.0]);
        let v = eval_f(&f, &RecessionFn::analytic(&f), &u).unwrap();
        assert!((v.total - 5.0).abs() < 1e-12);
    }

    #[test]
    fn g_of_atom_and_density() {
        let mesh = Arc::new(interval_mesh(0.0, 1.0, 4).unwrap());
        let f = catalog::linear(&Mat::scalar(1.0));
        let mu = MatrixMeasure::zero(mesh.clone(), 1).with_atom([0.5, 0.0], &Mat::scalar(-1.0));
        assert_eq!(eval_g(&f, &RecessionFn::analytic(&f), &mu).unwrap(), -1.0);
        let a = catalog::area(1, 1);
        let d = density(&mesh, &Mat::scalar(2.0));
        assert!((eval_g(&a, &RecessionFn::analytic(&a), &d).unwrap() - 5f64.sqrt()).abs() < 1e-14);
    }
}
