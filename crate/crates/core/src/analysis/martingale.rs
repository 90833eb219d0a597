//! The martingale quantity `‖P_AB P_BC − P_ABC‖` and the `8ε` bound.

use super::certificate::{ptilde, FactorizationCertificate};
use crate::error::{Error, Result};
use crate::lattice::{AbcSplit, Part, Rect};
use crate::linalg::{self, c64};
use crate::peps::boundary::{polar_isometry, pulling_through_residual, v_map, V_ENTRY_CAP};
use crate::peps::{check_cap, PepsModel};
use faer::Mat;
use serde::Serialize;

/// Largest physical dimension of `ABC` for the dense route.
pub const DENSE_MARTINGALE_CAP: u128 = 1 << 11;
/// Lanczos tolerance on `X†X` for the matrix-free route.
pub const MATRIX_FREE_TOL: f64 = 1e-12;
const SEED: u64 = 0x6d61_7274;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Dense,
    MatrixFree,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub split: AbcSplit,
    pub ell_b: usize,
    pub method: Method,
    pub physical_dim: u128,
    pub norm: f64,
    pub iterations: usize,
    /// Ranks of `P_AB`, `P_BC`, `P_ABC`.
    pub ranks: [usize; 3],
}

/// `W = V ρ^{-1/2}` for a region, so that `P = W W†`.
struct RegionProjector {
    w: Mat<c64>,
    left: usize,
    right: usize,
}

impl RegionProjector {
    fn new(model: &PepsModel, region: &Rect, left: usize, right: usize) -> Result<Self> {
        let v = v_map(model, region, V_ENTRY_CAP)?.matrix()?;
        let rho = linalg::hermitian_part(&(v.adjoint() * &v));
        let k = linalg::hermitian_spectral(&rho)?.rank(linalg::RANK_TOL);
        let w = polar_isometry(&v, k)?;
        Ok(RegionProjector { w, left, right })
    }

    fn rank(&self) -> usize {
        let diag: f64 = (0..self.w.ncols()).map(|k| (0..self.w.nrows()).map(|i| self.w[(i, k)].norm_sqr()).sum::<f64>()).sum();
        diag.round() as usize
    }

    fn apply(&self, x: &[c64]) -> Vec<c64> {
        let d = self.w.nrows();
        let (left, right) = (self.left, self.right);
        let mut out = vec![c64::new(0.0, 0.0); x.len()];
        for l in 0..left {
            let base = l * d * right;
            let blk = Mat::from_fn(d, right, |m, r| x[base + m * right + r]);
            let y = &self.w * &(self.w.adjoint() * &blk);
            for m in 0..d {
                for r in 0..right {
                    out[base + m * right + r] = y[(m, r)];
                }
            }
        }
        out
    }

    fn dense(&self) -> Mat<c64> {
        let p = &self.w * self.w.adjoint();
        linalg::kron(&linalg::kron(&linalg::identity(self.left), &p), &linalg::identity(self.right))
    }
}

struct Projectors {
    ab: RegionProjector,
    bc: RegionProjector,
    abc: RegionProjector,
    dim: usize,
}

fn projectors(model: &PepsModel, split: &AbcSplit) -> Result<Projectors> {
    let d = model.phys_dim;
    let pa = d.pow(split.a().len() as u32);
    let pc = d.pow(split.c().len() as u32);
    let dim = d.pow(split.region(Part::Abc).len() as u32);
    Ok(Projectors {
        ab: RegionProjector::new(model, &split.ab(), 1, pc)?,
        bc: RegionProjector::new(model, &split.bc(), pa, 1)?,
        abc: RegionProjector::new(model, &split.region(Part::Abc), 1, 1)?,
        dim,
    })
}

fn physical_dim(model: &PepsModel, split: &AbcSplit) -> u128 {
    (model.phys_dim as u128).saturating_pow(split.region(Part::Abc).len() as u32)
}

/// `‖P_AB P_BC − P_ABC‖` on the physical space of `ABC`.
pub fn martingale_norm(model: &PepsModel, split: &AbcSplit, method: Method) -> Result<MartingaleReport> {
    let physical_dim = physical_dim(model, split);
    if method == Method::Dense {
        check_cap("physical space of ABC (dense martingale)", physical_dim, DENSE_MARTINGALE_CAP)?;
    }
    let p = projectors(model, split)?;
    let ranks = [p.ab.rank(), p.bc.rank(), p.abc.rank()];
    let (norm, iterations) = match method {
        Method::Dense => {
            let x = &(&p.ab.dense() * &p.bc.dense()) - &p.abc.dense();
            (linalg::op_norm(&x)?, 0)
        }
        Method::MatrixFree => {
            let sub = |a: Vec<c64>, b: Vec<c64>| a.into_iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
            let est = linalg::matrix_free_norm(
                |x| sub(p.ab.apply(&p.bc.apply(x)), p.abc.apply(x)),
                |y| sub(p.bc.apply(&p.ab.apply(y)), p.abc.apply(y)),
                p.dim,
                p.dim,
                MATRIX_FREE_TOL,
                SEED,
            )?;
            (est.value, est.iterations)
        }
    };
    Ok(MartingaleReport { split: split.clone(), ell_b: split.widths[1], method, physical_dim, norm, iterations, ranks })
}

/// Dense when the physical space allows it, matrix-free otherwise.
pub fn martingale_norm_auto(model: &PepsModel, split: &AbcSplit) -> Result<MartingaleReport> {
    let method = if physical_dim(model, split) <= DENSE_MARTINGALE_CAP { Method::Dense } else { Method::MatrixFree };
    martingale_norm(model, split, method)
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremReport {
    pub martingale: MartingaleReport,
    pub epsilon: f64,
    pub bound: f64,
    /// `false` when `ε > 1`; the inequality is then reported but not asserted.
    pub hypothesis: bool,
    pub pass: Option<bool>,
    pub slack: f64,
    /// `(‖P̃_AB P̃_BC − P̃_ABC‖, ‖P̃_AB‖ ‖P̃_BC‖ ε_QF2)`, dense fixtures only.
    pub intermediate: Option<(f64, f64)>,
    pub intermediate_pass: Option<bool>,
}

/// Checks `‖P_AB P_BC − P_ABC‖ ≤ 8ε` for a certificate built on `split`.
pub fn verify_main_theorem(model: &PepsModel, split: &AbcSplit, cert: &FactorizationCertificate) -> Result<MainTheoremReport> {
    let martingale = martingale_norm_auto(model, split)?;
    let epsilon = cert.epsilon;
    let bound = 8.0 * epsilon + 1e-8;
    let hypothesis = epsilon <= 1.0;
    let within = martingale.norm <= bound;
    let intermediate = if martingale.physical_dim <= DENSE_MARTINGALE_CAP {
        let d = model.phys_dim;
        let pa = linalg::identity(d.pow(split.a().len() as u32));
        let pc = linalg::identity(d.pow(split.c().len() as u32));
        let ab = ptilde(model, &split.ab(), &cert.sigma[1], cert.mode)?;
        let bc = ptilde(model, &split.bc(), &cert.sigma[2], cert.mode)?;
        let abc = ptilde(model, &split.region(Part::Abc), &cert.sigma[0], cert.mode)?;
        let lhs = linalg::op_norm(&(&(&linalg::kron(&ab, &pc) * &linalg::kron(&pa, &bc)) - &abc))?;
        let rhs = linalg::op_norm(&ab)? * linalg::op_norm(&bc)? * cert.qf2;
        Some((lhs, rhs))
    } else {
        None
    };
    let intermediate_pass = intermediate.map(|(l, r)| l <= r * (1.0 + 1e-9) + 1e-10);
    Ok(MainTheoremReport {
        slack: bound - martingale.norm,
        martingale,
        epsilon,
        bound,
        hypothesis,
        pass: hypothesis.then_some(within),
        intermediate,
        intermediate_pass,
    })
}

/// `‖J_∂B V̂_{A→B} − V̂_{A→B} J_∂AB‖`.
pub fn pulling_through_check(model: &PepsModel, a: &Rect, b: &Rect) -> Result<f64> {
    pulling_through_residual(model, a, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayModel {
    /// `v = c ℓ^{-α}`.
    Power,
    /// `v = c e^{-ℓ/ξ}`.
    Exponential,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DecayFit {
    /// Every value is zero.
    Exact,
    Fitted {
        model: DecayModel,
        c: f64,
        /// `α` or `ξ`.
        rate: f64,
        /// `|fit − v| / v` per point.
        relative_residuals: Vec<f64>,
        max_relative_residual: f64,
    },
}

/// Least-squares fit of `ln v` against `ℓ` or `ln ℓ`.
pub fn decay_fit(series: &[(f64, f64)], model: DecayModel) -> Result<DecayFit> {
    if series.len() < 3 {
        return Err(Error::DegenerateSeries(format!("need at least three points, got {}", series.len())));
    }
    let zeros = series.iter().filter(|p| p.1 == 0.0).count();
    if zeros == series.len() {
        return Ok(DecayFit::Exact);
    }
    if zeros > 0 || series.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::DegenerateSeries("values must be all zero or all positive".into()));
    }
    let x = |l: f64| match model {
        DecayModel::Exponential => l,
        DecayModel::Power => l.ln(),
    };
    if model == DecayModel::Power && series.iter().any(|p| p.0 <= 0.0) {
        return Err(Error::DegenerateSeries("power fit needs positive ℓ".into()));
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|p| x(p.0)).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateSeries("all ℓ coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let c = intercept.exp();
    let rate = match model {
        DecayModel::Exponential => -1.0 / slope,
        DecayModel::Power => -slope,
    };
    let relative_residuals: Vec<f64> =
        series.iter().zip(&xs).map(|(p, &xi)| ((intercept + slope * xi).exp() - p.1).abs() / p.1).collect();
    let max_relative_residual = relative_residuals.iter().copied().fold(0.0, f64::max);
    Ok(DecayFit::Fitted { model, c, rate, relative_residuals, max_relative_residual })
}

/// Whether a sequence is strictly decreasing.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
