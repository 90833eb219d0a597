//! Factorization certificates `σ` and the distances `ε_QF1`, `ε_QF2`.

use super::hamiltonian::{boundary_hamiltonian, Topology};
use crate::error::{Error, Result};
use crate::gibbs::{build_delta_omega, DeltaOmega, GibbsFactors, Labels};
use crate::lattice::{AbcSplit, Part};
use crate::layout::{BoundaryLayout, SiteOperator};
use crate::linalg::{self, c64, MatrixFunction, RANK_TOL};
use crate::peps::boundary::{boundary_state, v_matrix};
use crate::peps::mps::Gauge;
use crate::peps::PepsModel;
use faer::Mat;
use serde::Serialize;

/// Commutator size `‖[J, σ]‖` tolerated in MPO mode.
pub const COMMUTATOR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// `σ` invertible; distances to `𝟙`.
    Injective,
    /// `σ` invertible on the support `J` of `ρ` and commuting with it; distances to `J`.
    Mpo,
}

fn restricted_inverse(sigma: &Mat<c64>, j: &Mat<c64>) -> Result<Mat<c64>> {
    let c = linalg::op_norm(&linalg::commutator(j, sigma))?;
    let scale = linalg::op_norm(sigma)?.max(1.0);
    if c > COMMUTATOR_TOL * scale {
        return Err(Error::NonCommuting { what: "[J, σ]".into(), residual: c });
    }
    let sp = linalg::hermitian_spectral(j)?;
    let keep: Vec<usize> = (0..sp.values.len()).filter(|&i| sp.values[i] > 0.5).collect();
    let u = Mat::from_fn(j.nrows(), keep.len(), |i, k| sp.vectors[(i, keep[k])]);
    let block = &(u.adjoint() * sigma) * &u;
    let inv = linalg::inverse(&block)?;
    Ok(&(&u * &inv) * u.adjoint())
}

struct Support {
    sp: linalg::Spectral,
    j: Mat<c64>,
    full: bool,
}

fn support_of(rho: &Mat<c64>) -> Result<Support> {
    let sp = linalg::hermitian_spectral(rho)?;
    sp.check_psd()?;
    let j = linalg::support_from_spectral(&sp, RANK_TOL);
    let full = sp.rank(RANK_TOL) == rho.nrows();
    Ok(Support { sp, j, full })
}

/// `‖ρ^{1/2} σ^{-1} ρ^{1/2} − 𝟙‖`, or `− J` in MPO mode.
pub fn epsilon_qf1(rho: &Mat<c64>, sigma: &Mat<c64>, mode: Mode) -> Result<f64> {
    let s = support_of(rho)?;
    let sq = linalg::spectral_function(&s.sp, MatrixFunction::Sqrt)?;
    let (inv, target) = match mode {
        Mode::Mpo if !s.full => (restricted_inverse(sigma, &s.j)?, s.j),
        _ => (linalg::inverse(sigma)?, linalg::identity(rho.nrows())),
    };
    linalg::op_norm(&(&(&(&sq * &inv) * &sq) - &target))
}

/// `‖ρ^{-1/2} σ ρ^{-1/2} − 𝟙‖`, or `‖ρ^{-1/2} JσJ ρ^{-1/2} − J‖` in MPO mode.
pub fn epsilon_qf2(rho: &Mat<c64>, sigma: &Mat<c64>, mode: Mode) -> Result<f64> {
    let s = support_of(rho)?;
    let m = match mode {
        Mode::Mpo if !s.full => {
            let c = linalg::op_norm(&linalg::commutator(&s.j, sigma))?;
            if c > COMMUTATOR_TOL * linalg::op_norm(sigma)?.max(1.0) {
                return Err(Error::NonCommuting { what: "[J, σ]".into(), residual: c });
            }
            let isq = linalg::spectral_function(&s.sp, MatrixFunction::InvSqrt)?;
            let inner = &(&s.j * sigma) * &s.j;
            &(&(&isq * &inner) * &isq) - &s.j
        }
        _ => {
            if !s.full {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            let isq = linalg::spectral_function(&s.sp, MatrixFunction::InvSqrt)?;
            &(&(&isq * sigma) * &isq) - &linalg::identity(rho.nrows())
        }
    };
    linalg::op_norm(&m)
}

/// `(‖X^{1/2} Y^{-1} X^{1/2} − 𝟙‖, Y_min^{-1} ‖X − Y‖)` for `X ≥ 0`, `Y > 0`.
pub fn comparing_norms_check(x: &Mat<c64>, y: &Mat<c64>) -> Result<(f64, f64)> {
    let ys = linalg::hermitian_spectral(y)?;
    let ymin = ys.values.first().copied().unwrap_or(0.0);
    if ymin <= 0.0 {
        return Err(Error::NotPsd { eigenvalue: ymin });
    }
    let xs = linalg::matrix_function(x, MatrixFunction::Sqrt)?;
    let yinv = ys.apply(|v| 1.0 / v);
    let lhs = linalg::op_norm(&(&(&(&xs * &yinv) * &xs) - &linalg::identity(x.nrows())))?;
    let rhs = linalg::op_norm(&(x - y))? / ymin;
    Ok((lhs, rhs))
}

/// The four factors on their segments.
#[derive(Clone, Debug)]
pub struct Factors {
    pub delta_az: SiteOperator,
    pub delta_zb: SiteOperator,
    pub omega_zc: SiteOperator,
    pub omega_dz: SiteOperator,
}

impl From<DeltaOmega> for Factors {
    fn from(d: DeltaOmega) -> Self {
        Factors { delta_az: d.delta_az, delta_zb: d.delta_zb, omega_zc: d.omega_zc, omega_dz: d.omega_dz }
    }
}

impl Factors {
    pub fn identity(layout: &BoundaryLayout) -> Self {
        let labels = Labels::from_layout(layout);
        let id = |names: &str| {
            let s = labels.sites(names);
            let d = layout.dims_of(&s);
            SiteOperator::new(s, d.clone(), linalg::identity(d.iter().product())).unwrap()
        };
        Factors { delta_az: id("axy"), delta_zb: id("xyb"), omega_zc: id("xyc"), omega_dz: id("dxy") }
    }

    fn all(&self) -> [&SiteOperator; 4] {
        [&self.delta_az, &self.delta_zb, &self.omega_zc, &self.omega_dz]
    }
}

/// `[σ_∂ABC, σ_∂AB, σ_∂BC, σ_∂B]`, each on its boundary in layout order:
/// `Δ_zb Δ_az`, `Ω_zc Δ_az`, `Δ_zb Ω_dz`, `Ω_zc Ω_dz`.
pub fn build_sigma(f: &Factors, layout: &BoundaryLayout) -> Result<[Mat<c64>; 4]> {
    let labels = Labels::from_layout(layout);
    let allowed = [labels.sites("axy"), labels.sites("xyb"), labels.sites("xyc"), labels.sites("dxy")];
    for (op, ok) in f.all().iter().zip(&allowed) {
        if !op.supported_in(ok) {
            return Err(Error::SupportMismatch(format!("factor on sites {:?} leaves its segment {:?}", op.sites, ok)));
        }
    }
    let prod = |p: Part, left: &SiteOperator, right: &SiteOperator| -> Result<Mat<c64>> {
        let frame = layout.region(p);
        let dims = layout.dims_of(frame);
        Ok(&left.embed(frame, &dims)? * &right.embed(frame, &dims)?)
    };
    Ok([
        prod(Part::Abc, &f.delta_zb, &f.delta_az)?,
        prod(Part::Ab, &f.omega_zc, &f.delta_az)?,
        prod(Part::Bc, &f.delta_zb, &f.omega_dz)?,
        prod(Part::B, &f.omega_zc, &f.omega_dz)?,
    ])
}

/// Largest dimension of the union of all four boundaries for the composition check.
pub const COMPOSITION_CAP: u128 = 1 << 12;

/// `‖σ_BC σ_B^{-1} σ_AB − σ_ABC‖` and `‖σ_AB^{-1} σ_B σ_BC^{-1} − σ_ABC^{-1}‖`,
/// relative, on the union of the boundaries.
pub fn composition_residuals(f: &Factors, layout: &BoundaryLayout) -> Result<(f64, f64)> {
    let all = layout.all_sites();
    crate::peps::check_cap("union of the four boundaries", layout.space_dim(&all), COMPOSITION_CAP)?;
    let dims = layout.dims_of(&all);
    let e = |op: &SiteOperator| op.embed(&all, &dims);
    let (daz, dzb, ozc, odz) = (e(&f.delta_az)?, e(&f.delta_zb)?, e(&f.omega_zc)?, e(&f.omega_dz)?);
    let abc = &dzb * &daz;
    let ab = &ozc * &daz;
    let bc = &dzb * &odz;
    let b = &ozc * &odz;
    let inv = linalg::inverse;
    let one = &(&bc * &inv(&b)?) * &ab;
    let two = &(&inv(&ab)? * &b) * &inv(&bc)?;
    let abc_inv = inv(&abc)?;
    let r1 = linalg::op_norm(&(&one - &abc))? / linalg::op_norm(&abc)?.max(f64::MIN_POSITIVE);
    let r2 = linalg::op_norm(&(&two - &abc_inv))? / linalg::op_norm(&abc_inv)?.max(f64::MIN_POSITIVE);
    Ok((r1, r2))
}

/// How a certificate was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    Identity,
    /// Left-edge fixed point times identity, for chains in canonical gauge.
    Product,
    /// `Δ`, `Ω` built from the measured boundary Hamiltonians. These need not be
    /// true Gibbs states, so the result is an empirical probe.
    Gibbs,
    Custom,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationCertificate {
    #[serde(skip)]
    pub factors: Factors,
    #[serde(skip)]
    pub sigma: [Mat<c64>; 4],
    pub kind: CertificateKind,
    pub mode: Mode,
    /// `ε_QF1` for ABC, AB and BC.
    pub qf1: [f64; 3],
    /// `ε_QF2` for B.
    pub qf2: f64,
    pub epsilon: f64,
    /// Condition numbers of `Δ_az`, `Δ_zb`, `Ω_zc`, `Ω_dz`.
    pub conditions: [f64; 4],
    /// Largest `‖σ − σ†‖ / ‖σ‖` over the four σ.
    pub hermiticity_deviation: f64,
    /// Composition identity residuals, when the union of the boundaries is small enough.
    pub composition: Option<(f64, f64)>,
}

fn condition(m: &Mat<c64>) -> Result<f64> {
    let sv = linalg::singular_values(m)?;
    Ok(match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    })
}

/// Boundary states of the four parts, in layout order.
pub fn layout_states(model: &PepsModel, split: &AbcSplit) -> Result<(BoundaryLayout, [Mat<c64>; 4])> {
    let layout = BoundaryLayout::from_split(model, split)?;
    let mut out = Vec::new();
    for p in Part::ALL {
        out.push(boundary_state(model, &split.region(p))?.rho);
    }
    Ok((layout, out.try_into().unwrap()))
}

/// Evaluates `factors` against the boundary states `rho = [ABC, AB, BC, B]`.
pub fn certify(f: Factors, layout: &BoundaryLayout, rho: &[Mat<c64>; 4], mode: Mode, kind: CertificateKind) -> Result<FactorizationCertificate> {
    let sigma = build_sigma(&f, layout)?;
    let qf1 = [
        epsilon_qf1(&rho[0], &sigma[0], mode)?,
        epsilon_qf1(&rho[1], &sigma[1], mode)?,
        epsilon_qf1(&rho[2], &sigma[2], mode)?,
    ];
    let qf2 = epsilon_qf2(&rho[3], &sigma[3], mode)?;
    let epsilon = qf1.iter().copied().fold(qf2, f64::max);
    let mut conditions = [0.0; 4];
    for (c, op) in conditions.iter_mut().zip(f.all()) {
        *c = condition(&op.matrix)?;
    }
    let mut hermiticity_deviation = 0.0f64;
    for s in &sigma {
        let d = linalg::op_norm(&(s - &linalg::dagger(s)))? / linalg::op_norm(s)?.max(f64::MIN_POSITIVE);
        hermiticity_deviation = hermiticity_deviation.max(d);
    }
    let composition = if layout.space_dim(&layout.all_sites()) <= COMPOSITION_CAP { Some(composition_residuals(&f, layout)?) } else { None };
    Ok(FactorizationCertificate { factors: f, sigma, kind, mode, qf1, qf2, epsilon, conditions, hermiticity_deviation, composition })
}

/// Product certificate for a chain built from a canonical-gauge MPS: the
/// conjugated fixed point on the left edge of each boundary, `𝟙` on the right.
pub fn product_certificate(gauge: &Gauge, model: &PepsModel, split: &AbcSplit, mode: Mode) -> Result<FactorizationCertificate> {
    let (layout, rho) = layout_states(model, split)?;
    let labels = Labels::from_layout(&layout);
    if !(labels.x.is_empty() && labels.y.is_empty()) || labels.a.len() != 1 || labels.d.len() != 1 {
        return Err(Error::Geometry(vec!["the product certificate needs a single-row split".into()]));
    }
    let dd = gauge.mps.bond_dim;
    let left = Mat::from_fn(dd, dd, |i, j| gauge.sigma[(i, j)].conj());
    let on = |sites: &[usize], m: Mat<c64>| SiteOperator::new(sites.to_vec(), layout.dims_of(sites), m);
    let f = Factors {
        delta_az: on(&labels.a, left.clone())?,
        delta_zb: on(&labels.b, linalg::identity(dd))?,
        omega_zc: on(&labels.c, linalg::identity(dd))?,
        omega_dz: on(&labels.d, left)?,
    };
    certify(f, &layout, &rho, mode, CertificateKind::Product)
}

/// Certificate from `Δ`, `Ω` built on the boundary Hamiltonians of `∂ABC` and `∂B`.
pub fn gibbs_certificate(model: &PepsModel, split: &AbcSplit, mode: Mode) -> Result<FactorizationCertificate> {
    let (layout, rho) = layout_states(model, split)?;
    let f = gibbs_factors(&layout, &rho)?;
    let labels = Labels::from_layout(&layout);
    let d = build_delta_omega(&f.q, &f.t, &labels)?;
    let factors = match_traces(d.into(), &layout, &rho, mode)?;
    certify(factors, &layout, &rho, mode, CertificateKind::Gibbs)
}

/// Rescales the factors so that `tr σ_R = tr ρ_R` for `R = ABC, AB, BC`
/// (traces taken on the support of `ρ_R` in MPO mode). `Δ_zb` is left alone.
pub fn match_traces(mut f: Factors, layout: &BoundaryLayout, rho: &[Mat<c64>; 4], mode: Mode) -> Result<Factors> {
    let sigma = build_sigma(&f, layout)?;
    let mut s = [0.0; 3];
    for k in 0..3 {
        let target = linalg::trace(&rho[k]).re;
        let sg = match mode {
            Mode::Mpo => {
                let j = linalg::support_projector(&rho[k], RANK_TOL)?;
                &(&j * &sigma[k]) * &j
            }
            Mode::Injective => sigma[k].clone(),
        };
        let have = linalg::trace(&sg).re;
        s[k] = target / have;
        if !(s[k].is_finite() && s[k] > 0.0) {
            return Err(Error::Singular { condition: f64::INFINITY });
        }
    }
    f.delta_az.matrix = linalg::scaled(&f.delta_az.matrix, s[0]);
    f.omega_zc.matrix = linalg::scaled(&f.omega_zc.matrix, s[1] / s[0]);
    f.omega_dz.matrix = linalg::scaled(&f.omega_dz.matrix, s[2]);
    Ok(f)
}

/// The four measured boundary Hamiltonians on the cycle arrangement.
pub fn gibbs_factors(layout: &BoundaryLayout, rho: &[Mat<c64>; 4]) -> Result<GibbsFactors> {
    let mut hs = Vec::new();
    for (k, p) in Part::ALL.iter().enumerate() {
        let sites = layout.region(*p);
        let bh = boundary_hamiltonian(&rho[k], sites, &layout.dims_of(sites), Topology::Cycle)?;
        hs.push(bh.to_chain(&layout.site_dims)?);
    }
    let t = hs.pop().unwrap();
    let s = hs.pop().unwrap();
    let r = hs.pop().unwrap();
    let q = hs.pop().unwrap();
    Ok(GibbsFactors { q, r, s, t })
}

/// `P̃ = V σ^{-1} V†` on the physical space of the region.
pub fn ptilde(model: &PepsModel, region: &crate::lattice::Rect, sigma: &Mat<c64>, mode: Mode) -> Result<Mat<c64>> {
    let v = v_matrix(model, region)?;
    let inv = sigma_inverse(&v, sigma, mode)?;
    Ok(&(&v * &inv) * v.adjoint())
}

fn sigma_inverse(v: &Mat<c64>, sigma: &Mat<c64>, mode: Mode) -> Result<Mat<c64>> {
    let rho = linalg::hermitian_part(&(v.adjoint() * v));
    let s = support_of(&rho)?;
    match mode {
        Mode::Mpo if !s.full => restricted_inverse(sigma, &s.j),
        _ => linalg::inverse(sigma),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaMainCheck {
    pub ptilde_norm: f64,
    pub sandwich_norm: f64,
    pub difference_norm: f64,
    pub sandwich_minus_one: f64,
    /// `|‖P̃‖ − ‖ρ^{1/2}σ^{-1}ρ^{1/2}‖|`.
    pub first: f64,
    /// `|‖P − P̃‖ − ‖ρ^{1/2}σ^{-1}ρ^{1/2} − 𝟙‖|`.
    pub second: f64,
}

/// Both equalities of the `P̃` lemma, from a dense `V`.
pub fn lemma_main_check(v: &Mat<c64>, sigma: &Mat<c64>, mode: Mode) -> Result<LemmaMainCheck> {
    let rho = linalg::hermitian_part(&(v.adjoint() * v));
    let s = support_of(&rho)?;
    let inv = sigma_inverse(v, sigma, mode)?;
    let pt = &(v * &inv) * v.adjoint();
    let p = crate::peps::boundary::image_projector(v)?;
    let sq = linalg::spectral_function(&s.sp, MatrixFunction::Sqrt)?;
    let sandwich = &(&sq * &inv) * &sq;
    let target = match mode {
        Mode::Mpo => s.j.clone(),
        Mode::Injective => linalg::identity(rho.nrows()),
    };
    let ptilde_norm = linalg::op_norm(&pt)?;
    let sandwich_norm = linalg::op_norm(&sandwich)?;
    let difference_norm = linalg::op_norm(&(&p - &pt))?;
    let sandwich_minus_one = linalg::op_norm(&(&sandwich - &target))?;
    Ok(LemmaMainCheck {
        first: (ptilde_norm - sandwich_norm).abs(),
        second: (difference_norm - sandwich_minus_one).abs(),
        ptilde_norm,
        sandwich_norm,
        difference_norm,
        sandwich_minus_one,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MpsConvergencePoint {
    pub m: usize,
    /// `‖ρ_m − σ ⊗ 𝟙‖₁`.
    pub trace_distance: f64,
    /// `ε_QF1` of the product ansatz on the block boundary.
    pub epsilon: f64,
    /// `ε σ_min / γ^m`.
    pub constant: f64,
}

/// Boundary states of `m`-site blocks of a canonical-gauge chain against the product ansatz.
pub fn mps_convergence(gauge: &Gauge, lengths: &[usize]) -> Result<Vec<MpsConvergencePoint>> {
    let dd = gauge.mps.bond_dim;
    let fixed = Mat::from_fn(dd, dd, |i, j| gauge.sigma[(i, j)].conj());
    let ansatz = linalg::kron(&fixed, &linalg::identity(dd));
    let smin = linalg::hermitian_spectral(&fixed)?.values[0];
    let mut out = Vec::new();
    for &m in lengths {
        let choi = gauge.mps.boundary_state_choi(m);
        let rho = Mat::from_fn(choi.nrows(), choi.ncols(), |i, j| choi[(i, j)].conj());
        let trace_distance = linalg::trace_norm(&(&rho - &ansatz))?;
        let epsilon = epsilon_qf1(&rho, &ansatz, Mode::Injective)?;
        let constant = epsilon * smin / gauge.gamma.powi(m as i32);
        out.push(MpsConvergencePoint { m, trace_distance, epsilon, constant });
    }
    Ok(out)
}
