//! Locality of `Γ^t` on chains: the bound functions and measured truncation residuals.

use super::{ChainHamiltonian, Conjugator};
use crate::error::{Error, Result};
use crate::layout::SiteOperator;
use crate::linalg;
use faer::linalg::solvers::Solve;
use serde::Serialize;

/// Default `c` in the validity condition `x > c`.
pub const LOG_VALIDITY_CONSTANT: f64 = 1.0;

fn check_range(r: usize) -> Result<f64> {
    if r < 2 {
        return Err(Error::input("the bound functions need interaction length r ≥ 2"));
    }
    Ok(r as f64)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln F_n(x) = (n − r + 1)x + 2 log(r) e^{xr}`.
pub fn log_araki_f(n: usize, x: f64, r: usize) -> Result<f64> {
    let rf = check_range(r)?;
    Ok((n as f64 - rf + 1.0) * x + 2.0 * rf.ln() * (x * rf).exp())
}

/// `ln χ_ℓ(x)` with `χ_ℓ(x) = [2 log(r) e^{rx}]^{k} / k!`, `k = ⌊ℓ/r⌋ + 1`.
pub fn log_araki_chi(ell: usize, x: f64, r: usize) -> Result<f64> {
    let rf = check_range(r)?;
    let k = ell / r + 1;
    Ok(k as f64 * ((2.0 * rf.ln()).ln() + rf * x) - ln_factorial(k))
}

pub fn araki_f(n: usize, x: f64, r: usize) -> Result<f64> {
    Ok(log_araki_f(n, x, r)?.exp())
}

pub fn araki_chi(ell: usize, x: f64, r: usize) -> Result<f64> {
    Ok(log_araki_chi(ell, x, r)?.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct ArakiPoint {
    pub ell: usize,
    /// `‖Γ^t_Σ(f) − Γ^t_ℓ(f)‖`.
    pub measured: f64,
    /// `ln(χ_ℓ(τ) F_n(τ) ‖f‖)`.
    pub log_bound: f64,
    pub bound: f64,
    pub tau: f64,
    /// `τ > c`; outside the regime the bound is reported but not checked.
    pub in_regime: bool,
    pub pass: Option<bool>,
}

/// Truncation residuals of `Γ^t` for an observable `f` supported on
/// `[center − n, center + n]`, for each `ℓ` in `ells`. `Γ_ℓ` conjugates with
/// the terms inside `[center − ℓ, center + ℓ]`.
pub fn araki_residual(
    t: f64,
    h: &ChainHamiltonian,
    f: &SiteOperator,
    center: usize,
    n: usize,
    ells: &[usize],
    validity: f64,
) -> Result<Vec<ArakiPoint>> {
    let len = h.len();
    if center < n || center + n >= len || !f.sites.iter().all(|&s| s + n >= center && s <= center + n) {
        return Err(Error::input(format!("observable is not supported on [{}, {}]", center as i64 - n as i64, center + n)));
    }
    let r = h.range().max(2);
    let j = h.strength()?;
    let tau = 2.0 * t * j;
    let all = h.sites();
    let full = Conjugator::new(&h.dense()?)?.apply(t, &f.embed(&all, &h.site_dims)?);
    let fnorm = f.norm()?;
    let mut out = Vec::new();
    for &ell in ells {
        if ell < n || center < ell || center + ell >= len {
            return Err(Error::input(format!("chain of {len} sites is too short for ℓ = {ell} around site {center}")));
        }
        let local: Vec<usize> = (center - ell..=center + ell).collect();
        let hl = h.restricted(&local).matrix_on(&local)?;
        let gl = Conjugator::new(&hl)?.apply(t, &f.embed(&local, &h.dims_of(&local))?);
        let pos: Vec<usize> = local.clone();
        let gl_full = linalg::embed(&gl, &h.dims_of(&local), &pos, &h.site_dims)?;
        let diff = &full - &gl_full;
        let measured = if diff.nrows() <= 512 { linalg::op_norm(&diff)? } else { linalg::op_norm_iterative(&diff, 1e-12)? };
        let log_bound = log_araki_chi(ell, tau, r)? + log_araki_f(n, tau, r)? + fnorm.ln();
        let in_regime = tau > validity;
        let bound = log_bound.exp();
        let pass = in_regime.then_some(measured <= bound + 1e-9);
        out.push(ArakiPoint { ell, measured, log_bound, bound, tau, in_regime, pass });
    }
    Ok(out)
}

/// Leading coefficient of a least-squares quadratic fit of `ln(measured)` against `ℓ`.
pub fn log_residual_curvature(points: &[ArakiPoint]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.measured > 0.0).map(|p| (p.ell as f64, p.measured.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateSeries("need three nonzero residuals for a curvature".into()));
    }
    let a = faer::Mat::<f64>::from_fn(pts.len(), 3, |i, k| pts[i].0.powi(k as i32));
    let y = faer::Mat::<f64>::from_fn(pts.len(), 1, |i, _| pts[i].1);
    let ata = a.transpose() * &a;
    let aty = a.transpose() * &y;
    let sol = ata.partial_piv_lu().solve(&aty);
    Ok(sol[(2, 0)])
}

/// Second differences of `ln(measured)`, for evenly spaced `ℓ`.
pub fn log_second_differences(points: &[ArakiPoint]) -> Vec<f64> {
    let logs: Vec<f64> = points.iter().map(|p| p.measured.ln()).collect();
    logs.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect()
}
