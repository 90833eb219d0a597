//! One-dimensional local Hamiltonians, imaginary-time conjugation and the
//! locality machinery built on it.

pub mod araki;
pub mod expansional;
pub mod strict;

use crate::error::{Error, Result};
use crate::layout::SiteOperator;
use crate::linalg::{self, c64, cx, Spectral};
use faer::Mat;

pub use araki::{araki_chi, araki_f, araki_residual, ArakiPoint, LOG_VALIDITY_CONSTANT};
pub use expansional::{expansional, expansional_norm_check, iterated_path, Expansional, OperatorPath};
pub use strict::{
    build_delta_omega, ol_or, theorem_strictlocality_epsilon, x_terms, DeltaOmega, DeltaSeries, GibbsFactors, Labels, OlOr,
    StrictLocalityBound, XTermReport,
};

/// Sum of local terms over a list of sites with the given dimensions.
#[derive(Clone, Debug)]
pub struct ChainHamiltonian {
    pub site_dims: Vec<usize>,
    pub terms: Vec<SiteOperator>,
}

pub fn pauli_x() -> Mat<c64> {
    Mat::from_fn(2, 2, |i, j| if i != j { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

pub fn pauli_y() -> Mat<c64> {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => cx(0.0, -1.0),
        (1, 0) => cx(0.0, 1.0),
        _ => cx(0.0, 0.0),
    })
}

pub fn pauli_z() -> Mat<c64> {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cx(1.0, 0.0),
        (1, 1) => cx(-1.0, 0.0),
        _ => cx(0.0, 0.0),
    })
}

impl ChainHamiltonian {
    pub fn new(site_dims: Vec<usize>, terms: Vec<SiteOperator>) -> Result<Self> {
        for t in &terms {
            for (k, &s) in t.sites.iter().enumerate() {
                if s >= site_dims.len() || site_dims[s] != t.dims[k] {
                    return Err(Error::dims(format!("term on site {s} does not fit the chain")));
                }
            }
            let r = linalg::hermiticity_residual(&t.matrix);
            if r > linalg::HERMITIAN_TOL {
                return Err(Error::NotHermitian { residual: r });
            }
        }
        Ok(ChainHamiltonian { site_dims, terms })
    }

    pub fn empty(site_dims: Vec<usize>) -> Self {
        ChainHamiltonian { site_dims, terms: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.site_dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_dims.is_empty()
    }

    /// Largest term diameter, in sites.
    pub fn range(&self) -> usize {
        self.terms.iter().map(|t| t.sites.len()).max().unwrap_or(0)
    }

    /// `J = sup_Z ‖q_Z‖`.
    pub fn strength(&self) -> Result<f64> {
        let mut j = 0.0f64;
        for t in &self.terms {
            j = j.max(t.norm()?);
        }
        Ok(j)
    }

    /// Terms lying entirely inside `allowed`.
    pub fn restricted(&self, allowed: &[usize]) -> ChainHamiltonian {
        ChainHamiltonian {
            site_dims: self.site_dims.clone(),
            terms: self.terms.iter().filter(|t| t.supported_in(allowed)).cloned().collect(),
        }
    }

    /// Terms inside `outer` that are not inside any of `parts`.
    pub fn crossing(&self, outer: &[usize], parts: &[&[usize]]) -> ChainHamiltonian {
        ChainHamiltonian {
            site_dims: self.site_dims.clone(),
            terms: self
                .terms
                .iter()
                .filter(|t| t.supported_in(outer) && !parts.iter().any(|p| t.supported_in(p)))
                .cloned()
                .collect(),
        }
    }

    /// Terms on the interval `lo..=hi` of a chain.
    pub fn interval(&self, lo: usize, hi: usize) -> ChainHamiltonian {
        let allowed: Vec<usize> = (lo..=hi).collect();
        self.restricted(&allowed)
    }

    pub fn minus(&self, other: &ChainHamiltonian) -> ChainHamiltonian {
        let mut terms = self.terms.clone();
        for t in &other.terms {
            let mut n = t.clone();
            n.matrix = linalg::scaled(&t.matrix, -1.0);
            terms.push(n);
        }
        ChainHamiltonian { site_dims: self.site_dims.clone(), terms }
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.site_dims.len()).collect()
    }

    pub fn dims_of(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().map(|&s| self.site_dims[s]).collect()
    }

    /// The sum of all terms as a matrix on the ordered site list `sites`.
    pub fn matrix_on(&self, sites: &[usize]) -> Result<Mat<c64>> {
        let dims = self.dims_of(sites);
        let n: usize = dims.iter().product();
        let mut h = Mat::<c64>::zeros(n, n);
        for t in &self.terms {
            h = &h + &t.embed(sites, &dims)?;
        }
        Ok(h)
    }

    pub fn dense(&self) -> Result<Mat<c64>> {
        self.matrix_on(&self.sites())
    }

    /// `Σ_i jz Z_i Z_{i+1} + hx X_i + hz Z_i` on `n` qubits, open boundary.
    pub fn transverse_ising(n: usize, jz: f64, hx: f64, hz: f64) -> Self {
        let (x, z) = (pauli_x(), pauli_z());
        let mut terms = Vec::new();
        for i in 0..n {
            let single = &linalg::scaled(&x, hx) + &linalg::scaled(&z, hz);
            terms.push(SiteOperator::new(vec![i], vec![2], single).unwrap());
            if i + 1 < n {
                let zz = linalg::scaled(&linalg::kron(&z, &z), jz);
                terms.push(SiteOperator::new(vec![i, i + 1], vec![2, 2], zz).unwrap());
            }
        }
        ChainHamiltonian { site_dims: vec![2; n], terms }
    }

    /// Open chain with independent random Hermitian terms on every interval of
    /// at most `range` sites, each of operator norm `strength`.
    pub fn random_local(n: usize, d: usize, range: usize, strength: f64, seed: u64) -> Result<Self> {
        let mut rng = linalg::seeded_rng(seed);
        let mut terms = Vec::new();
        for len in 1..=range {
            for lo in 0..n.saturating_sub(len - 1) {
                let m = d.pow(len as u32);
                let v = linalg::random_complex_vector(&mut rng, m * m);
                let g = Mat::from_fn(m, m, |i, j| v[i * m + j]);
                let h = linalg::hermitian_part(&g);
                let s = linalg::op_norm(&h)?;
                terms.push(SiteOperator::new((lo..lo + len).collect(), vec![d; len], linalg::scaled(&h, strength / s))?);
            }
        }
        Ok(ChainHamiltonian { site_dims: vec![d; n], terms })
    }
}

/// `e^{tB} A e^{-tB}`.
pub fn gamma(t: f64, b: &Mat<c64>, a: &Mat<c64>) -> Result<Mat<c64>> {
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() {
        return Err(Error::dims("conjugation of operators of different size"));
    }
    if linalg::hermiticity_residual(b) <= linalg::HERMITIAN_TOL {
        return Ok(Conjugator::new(b)?.apply(t, a));
    }
    let e = linalg::expm(&linalg::scaled(b, t));
    let ei = linalg::expm(&linalg::scaled(b, -t));
    Ok(&(&e * a) * &ei)
}

/// Cached spectral data of a Hermitian generator for repeated `Γ^t_B`.
#[derive(Clone, Debug)]
pub struct Conjugator {
    spectral: Spectral,
}

impl Conjugator {
    pub fn new(b: &Mat<c64>) -> Result<Self> {
        Ok(Conjugator { spectral: linalg::hermitian_spectral(b)? })
    }

    pub fn norm(&self) -> f64 {
        self.spectral.max_abs()
    }

    /// `U e^{tΛ} U† A U e^{-tΛ} U†`, with the exponent differences taken entrywise.
    pub fn apply(&self, t: f64, a: &Mat<c64>) -> Mat<c64> {
        let u = &self.spectral.vectors;
        let lam = &self.spectral.values;
        let inner = &(u.adjoint() * a) * u;
        let n = lam.len();
        let scaled = Mat::from_fn(n, n, |i, j| inner[(i, j)] * (t * (lam[i] - lam[j])).exp());
        &(u * &scaled) * u.adjoint()
    }

    pub fn exp(&self, t: f64) -> Mat<c64> {
        self.spectral.apply(|x| (t * x).exp())
    }
}
