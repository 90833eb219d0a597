//! Gibbs-form factors `Δ`, `Ω` for four boundary Hamiltonians and the
//! expansional decomposition of `ρ^{1/2} σ^{-1} ρ^{1/2}` on `∂AB`.

use super::expansional::{expansional, OperatorPath};
use super::{araki, ChainHamiltonian, Conjugator};
use crate::error::{Error, Result};
use crate::layout::{BoundaryLayout, SiteOperator};
use crate::lattice::Segments;
use crate::linalg::{self, c64};
use faer::Mat;
use serde::Serialize;

/// Global sites carrying each segment label.
#[derive(Clone, Debug, Default)]
pub struct Labels {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub d: Vec<usize>,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl Labels {
    pub fn from_layout(layout: &BoundaryLayout) -> Self {
        let with = |f: Segments| (0..layout.labels.len()).filter(|&s| layout.labels[s].contains(f)).collect();
        Labels {
            a: with(Segments::A),
            b: with(Segments::B),
            c: with(Segments::C),
            d: with(Segments::D),
            x: with(Segments::X),
            y: with(Segments::Y),
        }
    }

    /// Sorted union of the named segments, e.g. `"axy"`.
    pub fn sites(&self, names: &str) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for ch in names.chars() {
            let part = match ch {
                'a' => &self.a,
                'b' => &self.b,
                'c' => &self.c,
                'd' => &self.d,
                'x' => &self.x,
                'y' => &self.y,
                _ => panic!("unknown segment `{ch}`"),
            };
            out.extend(part);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Boundary Hamiltonians with `ρ_∂ABC = e^{2Q}`, `ρ_∂AB = e^{2R}`, `ρ_∂BC = e^{2S}`, `ρ_∂B = e^{2T}`.
#[derive(Clone, Debug)]
pub struct GibbsFactors {
    pub q: ChainHamiltonian,
    pub r: ChainHamiltonian,
    pub s: ChainHamiltonian,
    pub t: ChainHamiltonian,
}

fn exp_on(h: &ChainHamiltonian, frame: &[usize], s: f64) -> Result<Mat<c64>> {
    let m = h.matrix_on(frame)?;
    Ok(linalg::hermitian_spectral(&m)?.apply(|x| (s * x).exp()))
}

fn factor(h: &ChainHamiltonian, labels: &Labels, parts: [(&str, f64); 3], frame: &str) -> Result<SiteOperator> {
    let sites = labels.sites(frame);
    let mut m = linalg::identity(h.dims_of(&sites).iter().product());
    for (names, s) in parts {
        m = &m * &exp_on(&h.restricted(&labels.sites(names)), &sites, s)?;
    }
    SiteOperator::new(sites.clone(), h.dims_of(&sites), m)
}

/// `Δ_axy = e^{Q_ax}e^{−Q_y}e^{Q_axy}` and its mirror `Δ_xyb = e^{Q_xyb}e^{−Q_x}e^{Q_yb}`
/// from `Q`; `Ω_xyc = e^{T_xyc}e^{−T_x}e^{T_yc}` and `Ω_dxy = e^{T_dx}e^{−T_y}e^{T_dxy}` from `T`.
#[derive(Clone, Debug)]
pub struct DeltaOmega {
    pub delta_az: SiteOperator,
    pub delta_zb: SiteOperator,
    pub omega_zc: SiteOperator,
    pub omega_dz: SiteOperator,
}

pub fn build_delta_omega(q: &ChainHamiltonian, t: &ChainHamiltonian, labels: &Labels) -> Result<DeltaOmega> {
    for (u, v) in [(&labels.a, &labels.c), (&labels.x, &labels.y), (&labels.a, &labels.b), (&labels.d, &labels.c)] {
        if u.iter().any(|s| v.contains(s)) {
            return Err(Error::SupportMismatch("segments that must be disjoint share a site".into()));
        }
    }
    Ok(DeltaOmega {
        delta_az: factor(q, labels, [("ax", 1.0), ("y", -1.0), ("axy", 1.0)], "axy")?,
        delta_zb: factor(q, labels, [("xyb", 1.0), ("x", -1.0), ("yb", 1.0)], "xyb")?,
        omega_zc: factor(t, labels, [("xyc", 1.0), ("x", -1.0), ("yc", 1.0)], "xyc")?,
        omega_dz: factor(t, labels, [("dx", 1.0), ("y", -1.0), ("dxy", 1.0)], "dxy")?,
    })
}

fn support(h: &ChainHamiltonian) -> Vec<usize> {
    let mut s: Vec<usize> = h.terms.iter().flat_map(|t| t.sites.iter().copied()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

#[derive(Clone, Debug)]
pub struct OlOr {
    /// Site order of the matrices, the sorted sites of `axyc`.
    pub frame: Vec<usize>,
    pub o_l: Mat<c64>,
    pub o_r: Mat<c64>,
    /// `‖ρ^{1/2}σ^{-1}ρ^{1/2} − O_L O_R‖` on `∂AB`.
    pub identity_residual: f64,
    pub ol_minus_one: f64,
    pub or_minus_one: f64,
    /// `‖O_L O_R − 𝟙‖`.
    pub product_minus_one: f64,
    /// `‖O_L‖ ‖O_R − 𝟙‖ + ‖O_L − 𝟙‖`.
    pub triangle_bound: f64,
}

/// `O_L = e^{R}e^{−Q_axy}e^{Q_y}e^{−T_yc}` and `O_R = e^{−Q_ax}e^{T_x}e^{−T_xyc}e^{R}` with `R = R_axyc`.
pub fn ol_or(f: &GibbsFactors, labels: &Labels) -> Result<OlOr> {
    let frame = labels.sites("axyc");
    let q_ax = f.q.restricted(&labels.sites("ax"));
    let t_yc = f.t.restricted(&labels.sites("yc"));
    let sq = support(&q_ax);
    if support(&t_yc).iter().any(|s| sq.contains(s)) {
        return Err(Error::SupportMismatch("Q_ax and T_yc overlap".into()));
    }
    let r = f.r.restricted(&frame);
    let e = |h: &ChainHamiltonian, s: f64| exp_on(h, &frame, s);
    let er = e(&r, 1.0)?;
    let o_l = &(&(&er * &e(&f.q.restricted(&labels.sites("axy")), -1.0)?) * &e(&f.q.restricted(&labels.y), 1.0)?) * &e(&t_yc, -1.0)?;
    let o_r = &(&(&e(&q_ax, -1.0)? * &e(&f.t.restricted(&labels.x), 1.0)?) * &e(&f.t.restricted(&labels.sites("xyc")), -1.0)?) * &er;
    let q_inv = |names: &str, s: f64| e(&f.q.restricted(&labels.sites(names)), s);
    let t_inv = |names: &str, s: f64| e(&f.t.restricted(&labels.sites(names)), s);
    // σ = Ω_xyc Δ_axy inverted factor by factor
    let delta_inv = &(&q_inv("axy", -1.0)? * &q_inv("y", 1.0)?) * &q_inv("ax", -1.0)?;
    let omega_inv = &(&t_inv("yc", -1.0)? * &t_inv("x", 1.0)?) * &t_inv("xyc", -1.0)?;
    let sigma_inv = &delta_inv * &omega_inv;
    let direct = &(&er * &sigma_inv) * &er;
    let prod = &o_l * &o_r;
    let id = linalg::identity(prod.nrows());
    let ol_m = linalg::op_norm(&(&o_l - &id))?;
    let or_m = linalg::op_norm(&(&o_r - &id))?;
    Ok(OlOr {
        identity_residual: linalg::op_norm(&(&direct - &prod))?,
        ol_minus_one: ol_m,
        or_minus_one: or_m,
        product_minus_one: linalg::op_norm(&(&prod - &id))?,
        triangle_bound: linalg::op_norm(&o_l)? * or_m + ol_m,
        frame,
        o_l,
        o_r,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct XTermReport {
    /// Certified `‖X_i‖_path` for `i = 1..5`.
    pub path_norms: [f64; 5],
    /// Path norm of `X_0 = Γ_R(R_axyc − R_axy − R_c − R_∂yc)`; zero when the
    /// terms of `R` split as assumed.
    pub remainder: f64,
    /// `2 Σ_i ‖X_i‖_path`, remainder included.
    pub epsilon: f64,
    pub ol_minus_one: f64,
    /// `exp(ε/2) − 1`.
    pub ol_bound: f64,
    /// `‖OExp[Σ X_i] − O_L‖`.
    pub expansional_residual: f64,
    pub grid: usize,
    pub pass: bool,
}

struct GammaChain {
    /// Outermost first: `Γ^{s_1 t}_{B_1} ∘ Γ^{s_2 t}_{B_2} ∘ ⋯`.
    maps: Vec<(Conjugator, f64)>,
}

impl GammaChain {
    fn eval(&self, t: f64, a: &Mat<c64>) -> Mat<c64> {
        let mut x = a.clone();
        for (c, s) in self.maps.iter().rev() {
            x = c.apply(s * t, &x);
        }
        x
    }

    fn generator_norm(&self) -> f64 {
        self.maps.iter().map(|(c, _)| c.norm()).sum()
    }
}

/// Grid maximum of `‖X(t)‖` plus the pad `2 (Σ ‖B_j‖) max h / 2`.
fn path_norm(x: &dyn Fn(f64) -> Mat<c64>, generators: f64, grid: usize) -> Result<f64> {
    let mut m = 0.0f64;
    for k in 0..=grid {
        m = m.max(linalg::op_norm(&x(k as f64 / grid as f64))?);
    }
    Ok(m + 2.0 * generators * m * 0.5 / grid as f64)
}

/// The terms `X_1 … X_5` of `O_L = OExp[∫ Σ X_i]`, their path norms and the check
/// `‖O_L − 𝟙‖ ≤ exp(ε/2) − 1`.
pub fn x_terms(f: &GibbsFactors, labels: &Labels, grid: usize, tol: f64) -> Result<XTermReport> {
    let decomposition = ol_or(f, labels)?;
    let frame = decomposition.frame.clone();
    let dims = f.r.dims_of(&frame);
    let on = |h: &ChainHamiltonian| h.matrix_on(&frame);
    let (c_sites, y_sites, yc) = (labels.sites("c"), labels.sites("y"), labels.sites("yc"));
    let parts: [&[usize]; 2] = [&y_sites, &c_sites];
    let r_full = f.r.restricted(&frame);
    let r_axy = f.r.restricted(&labels.sites("axy"));
    let r_c = f.r.restricted(&c_sites);
    let r_dyc = f.r.crossing(&yc, &parts);
    let t_c = f.t.restricted(&c_sites);
    let t_y = f.t.restricted(&y_sites);
    let t_dyc = f.t.crossing(&yc, &parts);
    let q_axy = f.q.restricted(&labels.sites("axy"));
    let q_y = f.q.restricted(&y_sites);

    let rm = on(&r_full)?;
    let gr = Conjugator::new(&rm)?;
    let outer = GammaChain { maps: vec![(gr.clone(), 1.0)] };
    let inner = GammaChain {
        maps: vec![(gr, 1.0), (Conjugator::new(&on(&q_axy)?)?, -1.0), (Conjugator::new(&on(&q_y)?)?, 1.0)],
    };
    let inner_only = GammaChain { maps: inner.maps[1..].to_vec() };

    let a1 = &on(&r_axy)? - &on(&q_axy)?;
    let a2 = &on(&r_c)? - &on(&t_c)?;
    let a3 = &on(&q_y)? - &on(&t_y)?;
    let rd = on(&r_dyc)?;
    let a4 = &rd - &on(&t_dyc)?;
    let rest = &(&(&rm - &on(&r_axy)?) - &on(&r_c)?) - &rd;

    let x1 = |t: f64| outer.eval(t, &a1);
    let x2 = |t: f64| outer.eval(t, &a2);
    let x3 = |t: f64| inner.eval(t, &a3);
    let x4 = |t: f64| inner.eval(t, &a4);
    let x5 = |t: f64| outer.eval(t, &(&rd - &inner_only.eval(t, &rd)));
    let x0 = |t: f64| outer.eval(t, &rest);

    let g_out = outer.generator_norm();
    let g_in = inner.generator_norm();
    let path_norms = [
        path_norm(&x1, g_out, grid)?,
        path_norm(&x2, g_out, grid)?,
        path_norm(&x3, g_in, grid)?,
        path_norm(&x4, g_in, grid)?,
        path_norm(&x5, g_in, grid)?,
    ];
    let remainder = if linalg::max_abs(&rest) == 0.0 { 0.0 } else { path_norm(&x0, g_out, grid)? };
    let total: f64 = path_norms.iter().sum::<f64>() + remainder;
    let epsilon = 2.0 * total;

    let ops = [a1, a2, a3, a4, rest, rd];
    let chains = [outer, inner, inner_only];
    let dim = dims.iter().product();
    let path = OperatorPath::new(dim, total, move |t| {
        let [a1, a2, a3, a4, rest, rd] = &ops;
        let [outer, inner, inner_only] = &chains;
        let mut s = outer.eval(t, &(&(&(a1 + a2) + rest) + &(rd - &inner_only.eval(t, rd))));
        s = &s + &inner.eval(t, &(a3 + a4));
        s
    });
    let oexp = expansional(&path, tol)?;
    let expansional_residual = linalg::op_norm(&(&oexp.value - &decomposition.o_l))?;
    let ol_bound = (epsilon / 2.0).exp_m1();
    let pass = decomposition.ol_minus_one <= ol_bound + tol.max(1e-9) && expansional_residual <= 10.0 * tol.max(1e-9);
    Ok(XTermReport {
        path_norms,
        remainder,
        epsilon,
        ol_minus_one: decomposition.ol_minus_one,
        ol_bound,
        expansional_residual,
        grid,
        pass,
    })
}

/// Inhomogeneity profile `δ(l)`.
#[derive(Clone, Debug)]
pub enum DeltaSeries {
    /// `δ(l)` for `l = 0, 1, …`, zero beyond.
    Finite(Vec<f64>),
    /// `δ(l) = c · ratio^l`, `0 ≤ ratio < 1`.
    Geometric { c: f64, ratio: f64 },
}

impl DeltaSeries {
    /// `Σ_{l ≥ ℓ} δ(l)`.
    pub fn tail(&self, ell: usize) -> f64 {
        match self {
            DeltaSeries::Finite(v) => v.iter().skip(ell).sum(),
            DeltaSeries::Geometric { c, ratio } => c * ratio.powi(ell as i32) / (1.0 - ratio),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrictLocalityBound {
    /// `ln c(r, J)` with `c = 2F_r(2J)[2r(1 + H²) + HG]` and `G = H = F_r(2J)`.
    pub log_constant: f64,
    /// `J χ_ℓ(2J)`.
    pub chi_term: f64,
    /// `Σ_{l≥ℓ} δ(l)`.
    pub tail: f64,
    /// `η(c · max{J χ_ℓ(2J), tail})`, infinite on overflow.
    pub epsilon: f64,
    /// The constant uses `F_r` in place of `G` and `H`.
    pub surrogate: bool,
}

pub fn theorem_strictlocality_epsilon(r: usize, j: f64, ell: usize, delta: &DeltaSeries) -> Result<StrictLocalityBound> {
    let x = 2.0 * j;
    let ln_f = araki::log_araki_f(r, x, r)?;
    // c = 2F[2r(1 + F²) + F²] = 2F[2r + (2r + 1)F²]
    let rf = r as f64;
    let ln_inner = {
        let (a, b) = ((2.0 * rf).ln(), (2.0 * rf + 1.0).ln() + 2.0 * ln_f);
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    };
    let log_constant = 2f64.ln() + ln_f + ln_inner;
    let ln_chi = j.ln() + araki::log_araki_chi(ell, x, r)?;
    let tail = delta.tail(ell);
    let ln_max = ln_chi.max(if tail > 0.0 { tail.ln() } else { f64::NEG_INFINITY });
    let ln_arg = log_constant + ln_max;
    let epsilon = if ln_arg > 709f64.ln() { f64::INFINITY } else { ln_arg.exp().exp_m1() };
    Ok(StrictLocalityBound { log_constant, chi_term: ln_chi.exp(), tail, epsilon, surrogate: true })
}
