//! Translation-invariant matrix product states and their transfer operators.
//!
//! Vectorisation is row-major: `vec(f)[i·D + j] = f_ij`, so
//! `E(f) = Σ_k T_k f T_k†` has matrix `Σ_k T_k ⊗ conj(T_k)`.

use super::PepsModel;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{self, c64, cx, MatrixFunction};
use crate::tensor::{Axis, LabeledTensor};
use faer::Mat;

#[derive(Clone, Debug)]
pub struct Mps {
    pub phys_dim: usize,
    pub bond_dim: usize,
    /// `T_k` for each physical index `k`.
    pub matrices: Vec<Mat<c64>>,
}

#[derive(Clone, Debug)]
pub struct TransferSpectrum {
    /// Eigenvalues sorted by decreasing modulus.
    pub eigenvalues: Vec<c64>,
    /// Spectral radius.
    pub lambda: f64,
    /// `|λ_2| / |λ_1|`.
    pub gamma: f64,
    /// Trace-one positive fixed point of `E`.
    pub right_fixed: Mat<c64>,
    /// Positive fixed point of `E*`, trace one.
    pub left_fixed: Mat<c64>,
    /// Completely positive check: smallest eigenvalue of the Choi matrix over its largest.
    pub choi_min_ratio: f64,
}

/// Output of [`Mps::canonical_gauge`].
#[derive(Clone, Debug)]
pub struct Gauge {
    pub mps: Mps,
    pub lambda: f64,
    pub gamma: f64,
    /// Fixed point of the gauged transfer operator, trace one.
    pub sigma: Mat<c64>,
}

impl Mps {
    pub fn new(matrices: Vec<Mat<c64>>) -> Result<Self> {
        let d = matrices.len();
        if d == 0 {
            return Err(Error::input("an MPS needs at least one matrix"));
        }
        let bd = matrices[0].nrows();
        for m in &matrices {
            if m.nrows() != bd || m.ncols() != bd {
                return Err(Error::dims("MPS matrices must all be square of the same size"));
            }
        }
        Ok(Mps { phys_dim: d, bond_dim: bd, matrices })
    }

    pub fn transfer_matrix(&self) -> Mat<c64> {
        let n = self.bond_dim * self.bond_dim;
        let mut e = Mat::<c64>::zeros(n, n);
        for t in &self.matrices {
            let tc = Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)].conj());
            e = &e + &linalg::kron(t, &tc);
        }
        e
    }

    pub fn apply_transfer(&self, f: &Mat<c64>) -> Mat<c64> {
        let mut out = Mat::<c64>::zeros(self.bond_dim, self.bond_dim);
        for t in &self.matrices {
            out = &out + &(&(t * f) * t.adjoint());
        }
        out
    }

    pub fn apply_transfer_adjoint(&self, g: &Mat<c64>) -> Mat<c64> {
        let mut out = Mat::<c64>::zeros(self.bond_dim, self.bond_dim);
        for t in &self.matrices {
            out = &out + &(&(t.adjoint() * g) * t);
        }
        out
    }

    pub fn transfer_spectrum(&self) -> Result<TransferSpectrum> {
        let dd = self.bond_dim;
        let e = self.transfer_matrix();
        let choi = choi_of(&e, dd);
        let csp = linalg::hermitian_spectral(&linalg::hermitian_part(&choi))?;
        let choi_min_ratio = csp.values[0] / csp.max_abs().max(f64::MIN_POSITIVE);
        if choi_min_ratio < -1e-10 {
            return Err(Error::NotPrimitive(format!("Choi matrix has negative eigenvalue ratio {choi_min_ratio:.3e}")));
        }
        let eig = e.eigen().map_err(|err| Error::Convergence(format!("transfer eigensolver: {err:?}")))?;
        let n = dd * dd;
        let s = eig.S().column_vector();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[b].norm().partial_cmp(&s[a].norm()).unwrap());
        let eigenvalues: Vec<c64> = order.iter().map(|&i| s[i]).collect();
        let lambda = eigenvalues[0].norm();
        if lambda <= 0.0 {
            return Err(Error::NotPrimitive("transfer operator is nilpotent".into()));
        }
        let gamma = if n > 1 { eigenvalues[1].norm() / lambda } else { 0.0 };
        if gamma > 1.0 - 1e-9 {
            return Err(Error::NotPrimitive(format!("leading eigenvalue is not isolated (γ = {gamma:.6})")));
        }
        let lead = order[0];
        let u = eig.U();
        let right = fixed_from_vec(&(0..n).map(|i| u[(i, lead)]).collect::<Vec<_>>(), dd)?;
        let ea = e.adjoint().to_owned();
        let eiga = ea.eigen().map_err(|err| Error::Convergence(format!("transfer eigensolver: {err:?}")))?;
        let sa = eiga.S().column_vector();
        let lead_a = (0..n).max_by(|&a, &b| sa[a].norm().partial_cmp(&sa[b].norm()).unwrap()).unwrap();
        let ua = eiga.U();
        let left = fixed_from_vec(&(0..n).map(|i| ua[(i, lead_a)]).collect::<Vec<_>>(), dd)?;
        Ok(TransferSpectrum { eigenvalues, lambda, gamma, right_fixed: right, left_fixed: left, choi_min_ratio })
    }

    /// Gauge `T_k → λ^{-1/2} y^{1/2} T_k y^{-1/2}` with `E*(y) = λ y`, after
    /// which `E*` is unital and `E` trace preserving.
    pub fn canonical_gauge(&self) -> Result<Gauge> {
        let sp = self.transfer_spectrum()?;
        let y = &sp.left_fixed;
        let ys = linalg::matrix_function(y, MatrixFunction::Sqrt)?;
        let yis = linalg::inverse(&ys)?;
        let s = 1.0 / sp.lambda.sqrt();
        let mats: Vec<Mat<c64>> = self.matrices.iter().map(|t| linalg::scaled(&(&(&ys * t) * &yis), s)).collect();
        let g = Mps::new(mats)?;
        let gsp = g.transfer_spectrum()?;
        Ok(Gauge { mps: g, lambda: sp.lambda, gamma: gsp.gamma, sigma: gsp.right_fixed })
    }

    /// `(E^m ⊗ id)(|Ω⟩⟨Ω|)` with unnormalised `|Ω⟩ = Σ_i |ii⟩`; block `(a,i),(b,j)` is `E^m(|i⟩⟨j|)_{ab}`.
    pub fn boundary_state_choi(&self, m: usize) -> Mat<c64> {
        let dd = self.bond_dim;
        let e = self.transfer_matrix();
        let mut p = linalg::identity(dd * dd);
        for _ in 0..m {
            p = &e * &p;
        }
        linalg::hermitian_part(&choi_of(&p, dd))
    }

    /// Chain of `length` sites as a single-row PEPS with trivial vertical bonds.
    pub fn to_peps(&self, length: usize) -> Result<PepsModel> {
        let dd = self.bond_dim;
        let axes = vec![Axis::new("p", self.phys_dim), Axis::new("n", 1), Axis::new("e", dd), Axis::new("s", 1), Axis::new("w", dd)];
        let mut data = vec![cx(0.0, 0.0); self.phys_dim * dd * dd];
        for (k, t) in self.matrices.iter().enumerate() {
            for a in 0..dd {
                for b in 0..dd {
                    // index (k, 0, e=b, 0, w=a)
                    data[(k * dd + b) * dd + a] = t[(a, b)];
                }
            }
        }
        let t = LabeledTensor::new(axes, data)?;
        PepsModel::uniform(Lattice::new(1, length), t)
    }

    /// Blocks `k` consecutive sites into one, with physical dimension `d^k`.
    pub fn blocked(&self, k: usize) -> Result<Mps> {
        if k == 0 {
            return Err(Error::input("block size must be positive"));
        }
        let mut mats = self.matrices.clone();
        for _ in 1..k {
            let mut next = Vec::with_capacity(mats.len() * self.phys_dim);
            for a in &mats {
                for t in &self.matrices {
                    next.push(a * t);
                }
            }
            mats = next;
        }
        Mps::new(mats)
    }

    /// `Σ tr(T_{k1}…T_{kn}) |k1…kn⟩`: the periodic state on `n` sites.
    pub fn ring_state(&self, n: usize) -> Vec<c64> {
        let d = self.phys_dim;
        let total = d.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut digits = vec![0usize; n];
            let mut x = idx;
            for s in (0..n).rev() {
                digits[s] = x % d;
                x /= d;
            }
            let mut p = linalg::identity(self.bond_dim);
            for &k in &digits {
                p = &p * &self.matrices[k];
            }
            out.push(linalg::trace(&p));
        }
        out
    }
}

/// Reshuffles a superoperator matrix into its Choi matrix.
fn choi_of(e: &Mat<c64>, dd: usize) -> Mat<c64> {
    // choi[(a,i),(b,j)] = E(|i⟩⟨j|)_{ab} = e[(a·D+b),(i·D+j)]
    Mat::from_fn(dd * dd, dd * dd, |r, c| {
        let (a, i) = (r / dd, r % dd);
        let (b, j) = (c / dd, c % dd);
        e[(a * dd + b, i * dd + j)]
    })
}

fn fixed_from_vec(v: &[c64], dd: usize) -> Result<Mat<c64>> {
    let f = Mat::from_fn(dd, dd, |i, j| v[i * dd + j]);
    let tr = linalg::trace(&f);
    if tr.norm() < 1e-14 {
        return Err(Error::NotPrimitive("fixed point has zero trace".into()));
    }
    let inv = cx(1.0, 0.0) / tr;
    let g = Mat::from_fn(dd, dd, |i, j| f[(i, j)] * inv);
    let h = linalg::hermitian_part(&g);
    let sp = linalg::hermitian_spectral(&h)?;
    if sp.values[0] <= 1e-12 * sp.max_abs() {
        return Err(Error::NotPrimitive(format!("fixed point is not positive definite (λ_min = {:.3e})", sp.values[0])));
    }
    Ok(h)
}
