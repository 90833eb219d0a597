//! Parent Hamiltonians: sums of edge projectors `h_e = 𝟙 − Π_{Im V_e}`.

use crate::error::{Error, Result};
use crate::lattice::{Edge, Rect};
use crate::linalg::{self, c64, cx, Extremal, RANK_TOL};
use crate::peps::boundary::{v_map, v_matrix, phys_dim};
use crate::peps::{check_cap, dense_cap, PepsModel};
use faer::Mat;

/// Eigenvalues at or below this count as zero energy.
pub const NULL_TOL: f64 = 1e-9;
/// Eigenvalues in `(NULL_TOL, AMBIGUOUS_TOL)` make the kernel ill-defined.
pub const AMBIGUOUS_TOL: f64 = 1e-6;
/// Eigenvalues closer than this are treated as one level.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct Term {
    pub edge: Option<Edge>,
    /// Positions of the acted-on sites inside the region.
    pub sites: Vec<usize>,
    pub op: Mat<c64>,
}

#[derive(Clone, Debug)]
pub struct ProjectorHamiltonian {
    pub site_dims: Vec<usize>,
    pub terms: Vec<Term>,
}

/// Orthonormal basis of the column space of `v` (singular values above `√RANK_TOL · σ_max`).
pub fn range_basis(v: &Mat<c64>) -> Result<Mat<c64>> {
    range_basis_tol(v, RANK_TOL.sqrt())
}

/// Orthonormal basis of the column space of `v`, singular values above `rel · σ_max`.
pub fn range_basis_tol(v: &Mat<c64>, rel: f64) -> Result<Mat<c64>> {
    if v.ncols() == 0 || v.nrows() == 0 {
        return Ok(Mat::zeros(v.nrows(), 0));
    }
    let svd = v.thin_svd().map_err(|e| Error::Convergence(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let k = s.nrows();
    let smax = if k > 0 { s[0].re } else { 0.0 };
    let keep = (0..k).filter(|&i| s[i].re > rel * smax).count();
    let u = svd.U();
    Ok(Mat::from_fn(v.nrows(), keep, |i, j| u[(i, j)]))
}

/// `𝟙 − Π_{Im V_e}` on the two endpoint sites, ordered column-major.
pub fn edge_projector(model: &PepsModel, edge: &Edge) -> Result<Mat<c64>> {
    let [a, b] = edge.endpoints();
    let rect = Rect::new(a.0.min(b.0), a.1.min(b.1), (b.0 - a.0) as usize + 1, (b.1 - a.1) as usize + 1);
    let v = v_matrix(model, &rect)?;
    let q = range_basis(&v)?;
    let n = v.nrows();
    Ok(linalg::hermitian_part(&(&linalg::identity(n) - &(&q * q.adjoint()))))
}

impl ProjectorHamiltonian {
    pub fn new(site_dims: Vec<usize>, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            let d: usize = t.sites.iter().map(|&s| site_dims[s]).product();
            if t.op.nrows() != d || t.op.ncols() != d {
                return Err(Error::dims("term does not match its sites"));
            }
        }
        Ok(ProjectorHamiltonian { site_dims, terms })
    }

    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    fn term_dims(&self, t: &Term) -> Vec<usize> {
        t.sites.iter().map(|&s| self.site_dims[s]).collect()
    }

    pub fn embedded_term(&self, t: &Term) -> Result<Mat<c64>> {
        linalg::embed(&t.op, &self.term_dims(t), &t.sites, &self.site_dims)
    }

    pub fn dense(&self) -> Result<Mat<c64>> {
        check_cap("parent Hamiltonian", self.dim() as u128, dense_cap())?;
        let n = self.dim();
        let mut h = Mat::<c64>::zeros(n, n);
        for t in &self.terms {
            h = &h + &self.embedded_term(t)?;
        }
        Ok(h)
    }

    pub fn apply(&self, psi: &[c64]) -> Vec<c64> {
        let mut out = vec![cx(0.0, 0.0); psi.len()];
        for t in &self.terms {
            let y = linalg::apply_local(&t.op, &self.term_dims(t), &t.sites, &self.site_dims, psi);
            for (o, v) in out.iter_mut().zip(y) {
                *o += v;
            }
        }
        out
    }

    /// Largest pairwise commutator norm between embedded terms.
    pub fn max_commutator(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..self.terms.len() {
            for j in i + 1..self.terms.len() {
                if self.terms[i].sites.iter().all(|s| !self.terms[j].sites.contains(s)) {
                    continue;
                }
                // restrict to the union of the two supports
                let mut sites: Vec<usize> = self.terms[i].sites.clone();
                for &s in &self.terms[j].sites {
                    if !sites.contains(&s) {
                        sites.push(s);
                    }
                }
                let dims: Vec<usize> = sites.iter().map(|&s| self.site_dims[s]).collect();
                let pos = |t: &Term| -> Vec<usize> { t.sites.iter().map(|s| sites.iter().position(|x| x == s).unwrap()).collect() };
                let a = linalg::embed(&self.terms[i].op, &self.term_dims(&self.terms[i]), &pos(&self.terms[i]), &dims)?;
                let b = linalg::embed(&self.terms[j].op, &self.term_dims(&self.terms[j]), &pos(&self.terms[j]), &dims)?;
                worst = worst.max(linalg::op_norm(&linalg::commutator(&a, &b))?);
            }
        }
        Ok(worst)
    }
}

/// Edge-projector Hamiltonian of a region, sites in column-major order.
pub fn parent_hamiltonian(model: &PepsModel, region: &Rect) -> Result<ProjectorHamiltonian> {
    model.lattice.check(region)?;
    let sites = region.sites();
    let site_dims = vec![model.phys_dim; sites.len()];
    let mut terms = Vec::new();
    for e in region.internal_edges() {
        let [a, b] = e.endpoints();
        let ia = sites.iter().position(|&s| s == a).unwrap();
        let ib = sites.iter().position(|&s| s == b).unwrap();
        terms.push(Term { edge: Some(e), sites: vec![ia, ib], op: edge_projector(model, &e)? });
    }
    ProjectorHamiltonian::new(site_dims, terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundMethod {
    /// Kernel of the dense Hamiltonian.
    Nullspace,
    /// `W W†` with `W = V ρ^{-1/2}`.
    ViaIsometry,
}

#[derive(Clone, Debug)]
pub struct GroundSpace {
    pub projector: Mat<c64>,
    pub rank: usize,
    pub method: GroundMethod,
    /// Set when the Hamiltonian kernel is larger than `Im V`.
    pub exceeds_image: bool,
}

impl GroundSpace {
    /// The unique ground state, if the ground space is one-dimensional.
    pub fn unique_state(&self) -> Result<Vec<c64>> {
        if self.rank != 1 {
            return Err(Error::GroundSpace(format!("ground space has rank {}", self.rank)));
        }
        let sp = linalg::hermitian_spectral(&self.projector)?;
        let n = self.projector.nrows();
        Ok((0..n).map(|i| sp.vectors[(i, n - 1)]).collect())
    }
}

pub fn ground_projector(model: &PepsModel, region: &Rect, method: GroundMethod) -> Result<GroundSpace> {
    let v = v_matrix(model, region)?;
    let q = range_basis(&v)?;
    let image_rank = q.ncols();
    match method {
        GroundMethod::ViaIsometry => {
            let iso = crate::peps::boundary::isometry_from_v(&v)?;
            let p = linalg::hermitian_part(&(&iso.w * iso.w.adjoint()));
            Ok(GroundSpace { projector: p, rank: iso.rank, method, exceeds_image: false })
        }
        GroundMethod::Nullspace => {
            let h = parent_hamiltonian(model, region)?.dense()?;
            let (p, rank) = kernel_projector(&h)?;
            Ok(GroundSpace { projector: p, rank, method, exceeds_image: rank > image_rank })
        }
    }
}

/// Projector onto the zero-energy eigenspace of a PSD Hamiltonian.
pub fn kernel_projector(h: &Mat<c64>) -> Result<(Mat<c64>, usize)> {
    let sp = linalg::hermitian_spectral(h)?;
    if let Some(x) = sp.values.iter().find(|&&x| x > NULL_TOL && x < AMBIGUOUS_TOL) {
        return Err(Error::GroundSpace(format!("eigenvalue {x:.3e} is neither zero nor separated from zero")));
    }
    let keep: Vec<usize> = (0..sp.values.len()).filter(|&i| sp.values[i] <= NULL_TOL).collect();
    let n = h.nrows();
    let u = Mat::from_fn(n, keep.len(), |i, j| sp.vectors[(i, keep[j])]);
    Ok((linalg::hermitian_part(&(&u * u.adjoint())), keep.len()))
}

#[derive(Clone, Debug)]
pub struct GapReport {
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    pub gap: f64,
    pub degeneracy: usize,
    pub iterative: bool,
}

/// Gap above the lowest level of a dense Hermitian matrix, levels clustered at [`CLUSTER_TOL`].
pub fn gap_of_dense(h: &Mat<c64>) -> Result<GapReport> {
    let sp = linalg::hermitian_spectral(h)?;
    let e0 = sp.values[0];
    let degeneracy = sp.values.iter().filter(|&&x| x - e0 <= CLUSTER_TOL).count();
    let gap = sp.values.get(degeneracy).map(|x| x - e0).unwrap_or(f64::INFINITY);
    let eigenvalues = sp.values.iter().take(degeneracy + 8).copied().collect();
    Ok(GapReport { eigenvalues, ground_energy: e0, gap, degeneracy, iterative: false })
}

/// Spectral gap of the parent Hamiltonian on a region. Above `dense_limit`
/// the gap is computed by Lanczos on the complement of `Im V`, which is the
/// gap when the model is frustration free and its kernel equals `Im V`.
pub fn spectral_gap(model: &PepsModel, region: &Rect, dense_limit: usize, tol: f64) -> Result<GapReport> {
    let ham = parent_hamiltonian(model, region)?;
    let n = ham.dim();
    if n <= dense_limit {
        return gap_of_dense(&ham.dense()?);
    }
    check_cap("iterative gap", phys_dim(model, region), 16 * dense_cap())?;
    let v = v_map(model, region, u128::MAX)?.matrix()?;
    // the ground space is all of Im V, however badly conditioned V is
    let q = range_basis_tol(&v, 1e-13)?;
    let r = linalg::lanczos(|x| ham.apply(x), n, Extremal::Smallest, tol, 17, Some(&q))?;
    Ok(GapReport { eigenvalues: vec![0.0, r.value], ground_energy: 0.0, gap: r.value, degeneracy: q.ncols(), iterative: true })
}

/// `max_e ‖h_e P‖` for a projector `P` on the region.
pub fn frustration_check(ham: &ProjectorHamiltonian, p: &Mat<c64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in &ham.terms {
        let e = ham.embedded_term(t)?;
        worst = worst.max(linalg::op_norm(&(&e * p))?);
    }
    Ok(worst)
}

/// `⟨f_i g_j⟩ − ⟨f_i⟩⟨g_j⟩` in a normalised state over sites of equal dimension.
pub fn connected_correlator(psi: &[c64], site_dims: &[usize], f: &Mat<c64>, i: usize, g: &Mat<c64>, j: usize) -> Result<c64> {
    let nrm = linalg::norm2(psi);
    if nrm == 0.0 {
        return Err(Error::input("zero state"));
    }
    let psi: Vec<c64> = psi.iter().map(|z| z / nrm).collect();
    let fd = [site_dims[i]];
    let gd = [site_dims[j]];
    let fpsi = linalg::apply_local(f, &fd, &[i], site_dims, &psi);
    let gpsi = linalg::apply_local(g, &gd, &[j], site_dims, &psi);
    let fgpsi = linalg::apply_local(f, &fd, &[i], site_dims, &gpsi);
    Ok(linalg::dot(&psi, &fgpsi) - linalg::dot(&psi, &fpsi) * linalg::dot(&psi, &gpsi))
}

#[derive(Clone, Debug)]
pub struct CorrelationPoint {
    pub distance: usize,
    pub measured: f64,
    /// `√(⟨f†f⟩⟨g†g⟩) γ^distance` for the supplied `γ`.
    pub bound: f64,
}

/// Connected correlations between site `origin` and sites at distance `1..=max_distance`.
pub fn correlation_decay(psi: &[c64], site_dims: &[usize], f: &Mat<c64>, g: &Mat<c64>, origin: usize, max_distance: usize, gamma: f64) -> Result<Vec<CorrelationPoint>> {
    let nrm = linalg::norm2(psi);
    let psi: Vec<c64> = psi.iter().map(|z| z / nrm).collect();
    let expect_sq = |op: &Mat<c64>, s: usize| -> f64 {
        let y = linalg::apply_local(op, &[site_dims[s]], &[s], site_dims, &psi);
        linalg::dot(&y, &y).re
    };
    let mut out = Vec::new();
    for dist in 1..=max_distance {
        let j = origin + dist;
        if j >= site_dims.len() {
            break;
        }
        let c = connected_correlator(&psi, site_dims, f, origin, g, j)?;
        let pref = (expect_sq(f, origin) * expect_sq(g, j)).sqrt();
        out.push(CorrelationPoint { distance: dist, measured: c.norm(), bound: pref * gamma.powi(dist as i32) });
    }
    Ok(out)
}
