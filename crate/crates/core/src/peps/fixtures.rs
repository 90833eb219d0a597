//! Built-in models.

use super::mps::Mps;
use super::PepsModel;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{self, c64, cx};
use crate::tensor::{Axis, LabeledTensor};
use faer::Mat;

fn peps_axes(d: usize, dv: usize, dh: usize) -> Vec<Axis> {
    vec![Axis::new("p", d), Axis::new("n", dv), Axis::new("e", dh), Axis::new("s", dv), Axis::new("w", dh)]
}

/// Bond dimension one, every site in the same normalised state.
pub fn product_peps(d: usize, lattice: Lattice) -> Result<PepsModel> {
    let v: Vec<c64> = (0..d).map(|k| cx(1.0 + k as f64, 0.5 * k as f64)).collect();
    let n = linalg::norm2(&v);
    let t = LabeledTensor::new(peps_axes(d, 1, 1), v.iter().map(|z| z / n).collect())?;
    PepsModel::uniform(lattice, t)
}

/// `T = (1/n) Σ_g L_g^{⊗4}` for the regular representation of `Z_n`, the
/// four output legs fused into the physical index (`d = n⁴`).
pub fn g_isometric_peps(n: usize, lattice: Lattice) -> Result<PepsModel> {
    if n < 2 {
        return Err(Error::input("group order must be at least 2"));
    }
    let d = n.pow(4);
    let mut data = vec![cx(0.0, 0.0); d * n.pow(4)];
    let w = 1.0 / n as f64;
    for g in 0..n {
        for j in 0..n.pow(4) {
            let digits = [j / n.pow(3), (j / n.pow(2)) % n, (j / n) % n, j % n];
            let k = digits.iter().fold(0, |acc, &x| acc * n + (x + g) % n);
            data[k * n.pow(4) + j] += cx(w, 0.0);
        }
    }
    let t = LabeledTensor::new(peps_axes(d, n, n), data)?;
    PepsModel::uniform(lattice, t)
}

/// Independent complex Gaussian tensor on each site, scaled to unit norm.
pub fn random_peps(d: usize, bond: usize, lattice: Lattice, seed: u64) -> Result<PepsModel> {
    let mut rng = linalg::seeded_rng(seed);
    let size = d * bond.pow(4);
    let mut ts = Vec::new();
    for _ in 0..lattice.rows * lattice.cols {
        let v = linalg::random_complex_vector(&mut rng, size);
        let n = linalg::norm2(&v);
        ts.push(LabeledTensor::new(peps_axes(d, bond, bond), v.iter().map(|z| z / n).collect())?);
    }
    PepsModel::new(lattice, ts)
}

/// The spin-1 valence-bond state: `A^± = ±√(2/3) σ^±`, `A^0 = -√(1/3) σ^z`.
pub fn aklt_mps() -> Mps {
    let a = (2.0f64 / 3.0).sqrt();
    let b = (1.0f64 / 3.0).sqrt();
    let z = cx(0.0, 0.0);
    let plus = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { cx(a, 0.0) } else { z });
    let zero = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => cx(-b, 0.0),
        (1, 1) => cx(b, 0.0),
        _ => z,
    });
    let minus = Mat::from_fn(2, 2, |i, j| if (i, j) == (1, 0) { cx(-a, 0.0) } else { z });
    Mps::new(vec![plus, zero, minus]).unwrap()
}

/// Random complex Gaussian MPS scaled so that its transfer operator has spectral radius one.
pub fn random_injective_mps(bond: usize, d: usize, seed: u64) -> Result<Mps> {
    let mut rng = linalg::seeded_rng(seed);
    let mats: Vec<Mat<c64>> = (0..d)
        .map(|_| {
            let v = linalg::random_complex_vector(&mut rng, bond * bond);
            Mat::from_fn(bond, bond, |i, j| v[i * bond + j])
        })
        .collect();
    let m = Mps::new(mats)?;
    let sp = m.transfer_spectrum()?;
    let s = 1.0 / sp.lambda.sqrt();
    Mps::new(m.matrices.iter().map(|t| linalg::scaled(t, s)).collect())
}

/// Haar-like random unitary from the QR factorisation of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> Mat<c64> {
    let mut rng = linalg::seeded_rng(seed);
    let v = linalg::random_complex_vector(&mut rng, n * n);
    let g = Mat::from_fn(n, n, |i, j| v[i * n + j]);
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    Mat::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        q[(i, j)] * (d / d.norm())
    })
}

/// Entangled-pair chain: site `k = (l, r)` carries `|l⟩⟨r|`, rotated by a
/// random unitary on the physical space (`d = D²`).
pub fn isometric_mps(bond: usize, seed: u64) -> Result<Mps> {
    let d = bond * bond;
    let u = random_unitary(d, seed);
    let mats = (0..d)
        .map(|k| Mat::from_fn(bond, bond, |a, b| u[(k, a * bond + b)]))
        .collect();
    Mps::new(mats)
}

/// Bond dimension one chain.
pub fn product_mps(d: usize) -> Mps {
    let v: Vec<c64> = (0..d).map(|k| cx(1.0 + k as f64, 0.25 * k as f64)).collect();
    let n = linalg::norm2(&v);
    Mps::new(v.iter().map(|z| Mat::from_fn(1, 1, |_, _| z / n)).collect()).unwrap()
}

/// The seeded random chain (`D = 2`, `d = 3`) used as the gapped injective fixture.
pub fn gapped_random_mps() -> Mps {
    random_injective_mps(2, 3, 33).unwrap()
}
