//! Dense linear algebra on complex matrices: spectral calculus, norms,
//! support projectors and a matrix-free norm estimator.

use crate::error::{Error, Result};
use faer::{Mat, Side};
use rand::SeedableRng;
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub use faer::c64;

/// Relative eigenvalue cutoff defining the support of a PSD operator.
pub const RANK_TOL: f64 = 1e-10;
/// Relative size a negative eigenvalue may have before an operator counts as indefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Relative Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Condition number beyond which an inverse is refused.
pub const MAX_CONDITION: f64 = 1e13;

pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn identity(n: usize) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| if i == j { cx(1.0, 0.0) } else { cx(0.0, 0.0) })
}

pub fn zeros(n: usize, m: usize) -> Mat<c64> {
    Mat::zeros(n, m)
}

pub fn dagger(a: &Mat<c64>) -> Mat<c64> {
    a.adjoint().to_owned()
}

pub fn matmul(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    a * b
}

pub fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn scaled(a: &Mat<c64>, s: f64) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn sub(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    a - b
}

pub fn trace(a: &Mat<c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn frobenius(a: &Mat<c64>) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &Mat<c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn hermitian_part(a: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// `‖A − A†‖_F / max(1, ‖A‖_F)`.
pub fn hermiticity_residual(a: &Mat<c64>) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    s.sqrt() / frobenius(a).max(1.0)
}

pub fn is_hermitian(a: &Mat<c64>) -> bool {
    hermiticity_residual(a) <= HERMITIAN_TOL
}

pub fn commutator(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    a * b - b * a
}

/// Largest singular value.
pub fn op_norm(a: &Mat<c64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    if a.nrows() == a.ncols() && hermiticity_residual(a) <= 1e-14 {
        let ev = a
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Convergence(format!("{e:?}")))?;
        return Ok(ev.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    let sv = a.singular_values().map_err(|e| Error::Convergence(format!("{e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

pub fn singular_values(a: &Mat<c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values().map_err(|e| Error::Convergence(format!("{e:?}")))
}

pub fn trace_norm(a: &Mat<c64>) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Each eigenvector is rotated so its first non-negligible component is real
/// and positive, which makes the output reproducible.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

pub fn hermitian_spectral(a: &Mat<c64>) -> Result<Spectral> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dims(format!("{}x{} matrix is not square", n, a.ncols())));
    }
    let r = hermiticity_residual(a);
    if r > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual: r });
    }
    if n == 0 {
        return Ok(Spectral { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("Hermitian eigensolver: {e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..n {
        let mut big = 0.0f64;
        for i in 0..n {
            big = big.max(vectors[(i, j)].norm());
        }
        if let Some(i0) = (0..n).find(|&i| vectors[(i, j)].norm() > 1e-8 * big) {
            let z = vectors[(i0, j)];
            let phase = z.conj() / z.norm();
            for i in 0..n {
                vectors[(i, j)] *= phase;
            }
        }
    }
    Ok(Spectral { values, vectors })
}

impl Spectral {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `U f(Λ) U†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat<c64> {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * fv[j]);
        &scaled * u.adjoint()
    }

    pub fn apply_complex(&self, f: impl Fn(f64) -> c64) -> Mat<c64> {
        let n = self.values.len();
        let fv: Vec<c64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * fv[j]);
        &scaled * u.adjoint()
    }

    /// Largest eigenvalue magnitude times the rank tolerance.
    pub fn cutoff(&self, tol: f64) -> f64 {
        tol * self.max_abs()
    }

    pub fn check_psd(&self) -> Result<()> {
        let scale = self.max_abs();
        if let Some(&m) = self.values.first() {
            if m < -PSD_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPsd { eigenvalue: m });
            }
        }
        Ok(())
    }

    pub fn rank(&self, tol: f64) -> usize {
        let c = self.cutoff(tol);
        self.values.iter().filter(|&&x| x > c).count()
    }
}

/// Spectral functions on Hermitian operators. Functions that are singular at
/// zero act on the support only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixFunction {
    Sqrt,
    InvSqrt,
    PseudoInverse,
    /// Logarithm on the support, zero on the kernel.
    Log,
    /// `exp(t·A)`.
    Exp(f64),
    Power(f64),
}

pub fn matrix_function(a: &Mat<c64>, f: MatrixFunction) -> Result<Mat<c64>> {
    let sp = hermitian_spectral(a)?;
    spectral_function(&sp, f)
}

pub fn spectral_function(sp: &Spectral, f: MatrixFunction) -> Result<Mat<c64>> {
    let c = sp.cutoff(RANK_TOL);
    match f {
        MatrixFunction::Exp(t) => {
            let shift = sp.values.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(t * x));
            let shift = if shift.is_finite() { shift } else { 0.0 };
            // keep the largest entry at 1 before restoring the scale
            let m = sp.apply(|x| (t * x - shift).exp());
            Ok(scaled(&m, shift.exp()))
        }
        _ => {
            sp.check_psd()?;
            Ok(match f {
                MatrixFunction::Sqrt => sp.apply(|x| if x > 0.0 { x.sqrt() } else { 0.0 }),
                MatrixFunction::InvSqrt => sp.apply(|x| if x > c { 1.0 / x.sqrt() } else { 0.0 }),
                MatrixFunction::PseudoInverse => sp.apply(|x| if x > c { 1.0 / x } else { 0.0 }),
                MatrixFunction::Log => sp.apply(|x| if x > c { x.ln() } else { 0.0 }),
                MatrixFunction::Power(p) => sp.apply(|x| if x > c { x.powf(p) } else { 0.0 }),
                MatrixFunction::Exp(_) => unreachable!(),
            })
        }
    }
}

/// Orthogonal projector onto eigenvectors with eigenvalue above `tol·λ_max`.
///
/// Full-rank input returns the identity exactly.
pub fn support_projector(a: &Mat<c64>, tol: f64) -> Result<Mat<c64>> {
    let sp = hermitian_spectral(a)?;
    sp.check_psd()?;
    Ok(support_from_spectral(&sp, tol))
}

pub fn support_from_spectral(sp: &Spectral, tol: f64) -> Mat<c64> {
    let n = sp.values.len();
    let c = sp.cutoff(tol);
    let keep: Vec<usize> = (0..n).filter(|&i| sp.values[i] > c).collect();
    if keep.len() == n {
        return identity(n);
    }
    let u = Mat::from_fn(n, keep.len(), |i, j| sp.vectors[(i, keep[j])]);
    &u * u.adjoint()
}

/// Inverse of a general square matrix, refused when the condition number is too large.
pub fn inverse(a: &Mat<c64>) -> Result<Mat<c64>> {
    use faer::linalg::solvers::DenseSolveCore;
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dims("inverse of a non-square matrix"));
    }
    let sv = singular_values(a)?;
    let cond = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular { condition: cond });
    }
    Ok(a.partial_piv_lu().inverse())
}

/// `exp(A)` for a general square matrix, by scaling and squaring a Taylor series.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    if hermiticity_residual(a) <= 1e-14 {
        if let Ok(sp) = hermitian_spectral(a) {
            return spectral_function(&sp, MatrixFunction::Exp(1.0)).unwrap();
        }
    }
    let norm = frobenius(a);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let b = scaled(a, 1.0 / 2f64.powi(s as i32));
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..=20 {
        term = scaled(&(&term * &b), 1.0 / k as f64);
        sum = &sum + &term;
        if frobenius(&term) < 1e-18 * frobenius(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn mat_vec(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![cx(0.0, 0.0); a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == cx(0.0, 0.0) {
            continue;
        }
        let col = a.col(j);
        for i in 0..a.nrows() {
            y[i] += col[i] * xj;
        }
    }
    y
}

pub fn adjoint_mat_vec(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    (0..a.ncols())
        .map(|j| {
            let col = a.col(j);
            (0..a.nrows()).map(|i| col[i].conj() * x[i]).sum()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremal {
    Largest,
    Smallest,
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<c64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Extremal eigenvalue of a Hermitian operator given as a closure, by Lanczos
/// with full reorthogonalisation. `deflate` columns (orthonormal) are
/// projected out of the Krylov space.
pub fn lanczos(
    mut apply: impl FnMut(&[c64]) -> Vec<c64>,
    dim: usize,
    which: Extremal,
    tol: f64,
    seed: u64,
    deflate: Option<&Mat<c64>>,
) -> Result<LanczosResult> {

    if dim == 0 {
        return Ok(LanczosResult { value: 0.0, vector: Vec::new(), iterations: 0, residual: 0.0 });
    }
    let project = |v: &mut Vec<c64>| {
        if let Some(q) = deflate {
            for j in 0..q.ncols() {
                let col: Vec<c64> = (0..dim).map(|i| q[(i, j)]).collect();
                let c = dot(&col, v);
                for i in 0..dim {
                    v[i] -= col[i] * c;
                }
            }
        }
    };
    let max_iter = 10 * dim;
    let mut rng = seeded_rng(seed);
    let mut v0 = random_complex_vector(&mut rng, dim);
    project(&mut v0);
    let n0 = norm2(&v0);
    if n0 == 0.0 {
        return Ok(LanczosResult { value: 0.0, vector: v0, iterations: 0, residual: 0.0 });
    }
    for z in &mut v0 {
        *z /= n0;
    }
    let mut basis: Vec<Vec<c64>> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let krylov_cap = dim.min(max_iter);
    let mut last: (f64, Vec<f64>, f64);
    for k in 0..krylov_cap {
        let mut w = apply(&basis[k]);
        project(&mut w);
        let a = dot(&basis[k], &w).re;
        alphas.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for i in 0..dim {
                    w[i] -= q[i] * c;
                }
            }
            project(&mut w);
        }
        let b = norm2(&w);
        scale = scale.max(a.abs()).max(b);
        let (theta, s) = tridiagonal_extremal(&alphas, &betas, which)?;
        let resid = b * s.last().copied().unwrap_or(0.0).abs();
        let breakdown = b <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        last = (theta, s, resid);
        let conv = resid <= tol * theta.abs().max(1e-3 * scale) || breakdown;
        if conv || k + 1 == krylov_cap {
            let (theta, s, resid) = last;
            let mut vec = vec![cx(0.0, 0.0); dim];
            for (j, q) in basis.iter().enumerate() {
                for i in 0..dim {
                    vec[i] += q[i] * s[j];
                }
            }
            if !conv && resid > tol.sqrt() * theta.abs().max(1e-3 * scale) {
                return Err(Error::Convergence(format!(
                    "Lanczos stopped after {} steps with residual {:.3e}",
                    k + 1,
                    resid
                )));
            }
            return Ok(LanczosResult { value: theta, vector: vec, iterations: k + 1, residual: resid });
        }
        betas.push(b);
        for z in &mut w {
            *z /= b;
        }
        basis.push(w);
    }
    unreachable!()
}

fn tridiagonal_extremal(alphas: &[f64], betas: &[f64], which: Extremal) -> Result<(f64, Vec<f64>)> {
    let k = alphas.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Convergence(format!("tridiagonal eigensolver: {e:?}")))?;
    let idx = match which {
        Extremal::Largest => k - 1,
        Extremal::Smallest => 0,
    };
    let theta = evd.S().column_vector()[idx];
    let s: Vec<f64> = (0..k).map(|i| evd.U()[(i, idx)]).collect();
    Ok((theta, s))
}

/// Standard complex Gaussian samples, `E|z|² = 1`.
pub fn random_complex_vector(rng: &mut impl rand::Rng, n: usize) -> Vec<c64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cx(s * re, s * im)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
}

/// Operator norm of a linear map given only by its action and its adjoint's action.
///
/// `apply` maps `dim_in` to `dim_out` entries. The adjoint pair is validated on
/// random vectors before iterating on `A†A`.
pub fn matrix_free_norm(
    mut apply: impl FnMut(&[c64]) -> Vec<c64>,
    mut apply_adjoint: impl FnMut(&[c64]) -> Vec<c64>,
    dim_in: usize,
    dim_out: usize,
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    let mut rng = seeded_rng(seed ^ 0x5eed);
    let x = random_complex_vector(&mut rng, dim_in);
    let y = random_complex_vector(&mut rng, dim_out);
    let ax = apply(&x);
    let aty = apply_adjoint(&y);
    if ax.len() != dim_out || aty.len() != dim_in {
        return Err(Error::dims("matrix-free map returned a vector of the wrong length"));
    }
    let lhs = dot(&y, &ax);
    let rhs = dot(&aty, &x);
    // maps that are numerically zero only carry rounding noise
    let scale = (norm2(&y) * norm2(&ax)).max(norm2(&aty) * norm2(&x)).max(1e-6 * norm2(&x) * norm2(&y));
    let rel = (lhs - rhs).norm() / scale;
    if rel > 1e-8 {
        return Err(Error::AdjointMismatch(rel));
    }
    let r = lanczos(|v| apply_adjoint(&apply(v)), dim_in, Extremal::Largest, tol, seed, None)?;
    Ok(NormEstimate { value: r.value.max(0.0).sqrt(), iterations: r.iterations })
}

/// Operator norm of a dense matrix by Lanczos on `A†A`, for sizes where a full SVD is too slow.
pub fn op_norm_iterative(a: &Mat<c64>, tol: f64) -> Result<f64> {
    Ok(matrix_free_norm(|x| mat_vec(a, x), |y| adjoint_mat_vec(a, y), a.ncols(), a.nrows(), tol, 7)?.value)
}

/// Square Hermitian operator carrying the local dimensions of its tensor factors.
#[derive(Clone, Debug)]
pub struct Operator {
    pub matrix: Mat<c64>,
    pub site_dims: Vec<usize>,
}

impl Operator {
    pub fn new(matrix: Mat<c64>, site_dims: Vec<usize>) -> Result<Self> {
        let n: usize = site_dims.iter().product();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::dims(format!(
                "operator is {}x{} but site dimensions give {}",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        Ok(Operator { matrix, site_dims })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        is_hermitian(&self.matrix)
    }

    pub fn spectral(&self) -> Result<Spectral> {
        hermitian_spectral(&self.matrix)
    }

    pub fn function(&self, f: MatrixFunction) -> Result<Mat<c64>> {
        matrix_function(&self.matrix, f)
    }

    pub fn norm(&self) -> Result<f64> {
        op_norm(&self.matrix)
    }

    pub fn support(&self) -> Result<Mat<c64>> {
        support_projector(&self.matrix, RANK_TOL)
    }
}

/// Embeds an operator acting on a subset of tensor factors into the full product space.
///
/// `positions[k]` is the factor of the full space on which the `k`-th factor of `op` acts.
pub fn embed(op: &Mat<c64>, op_dims: &[usize], positions: &[usize], full_dims: &[usize]) -> Result<Mat<c64>> {
    let n: usize = full_dims.iter().product();
    let m: usize = op_dims.iter().product();
    if op.nrows() != m || op.ncols() != m || op_dims.len() != positions.len() {
        return Err(Error::dims("embedded operator does not match its site list"));
    }
    for (k, &p) in positions.iter().enumerate() {
        if p >= full_dims.len() || full_dims[p] != op_dims[k] {
            return Err(Error::dims(format!("site {p} has the wrong dimension")));
        }
    }
    let mut strides = vec![1usize; full_dims.len()];
    for i in (0..full_dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * full_dims[i + 1];
    }
    let rest: Vec<usize> = (0..full_dims.len()).filter(|i| !positions.contains(i)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| full_dims[i]).collect();
    let nrest: usize = rest_dims.iter().product();
    // offset of a local multi-index inside the full index
    let local_off: Vec<usize> = (0..m)
        .map(|mut x| {
            let mut off = 0;
            for k in (0..positions.len()).rev() {
                off += (x % op_dims[k]) * strides[positions[k]];
                x /= op_dims[k];
            }
            off
        })
        .collect();
    let mut out = Mat::<c64>::zeros(n, n);
    for r in 0..nrest {
        let mut x = r;
        let mut base = 0;
        for k in (0..rest.len()).rev() {
            base += (x % rest_dims[k]) * strides[rest[k]];
            x /= rest_dims[k];
        }
        for j in 0..m {
            for i in 0..m {
                let v = op[(i, j)];
                if v != cx(0.0, 0.0) {
                    out[(base + local_off[i], base + local_off[j])] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Applies an operator on a subset of factors to a state vector of the full space.
pub fn apply_local(op: &Mat<c64>, op_dims: &[usize], positions: &[usize], full_dims: &[usize], psi: &[c64]) -> Vec<c64> {
    let m: usize = op_dims.iter().product();
    let mut strides = vec![1usize; full_dims.len()];
    for i in (0..full_dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * full_dims[i + 1];
    }
    let rest: Vec<usize> = (0..full_dims.len()).filter(|i| !positions.contains(i)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| full_dims[i]).collect();
    let nrest: usize = rest_dims.iter().product();
    let local_off: Vec<usize> = (0..m)
        .map(|mut x| {
            let mut off = 0;
            for k in (0..positions.len()).rev() {
                off += (x % op_dims[k]) * strides[positions[k]];
                x /= op_dims[k];
            }
            off
        })
        .collect();
    let mut out = vec![cx(0.0, 0.0); psi.len()];
    let mut buf = vec![cx(0.0, 0.0); m];
    for r in 0..nrest {
        let mut x = r;
        let mut base = 0;
        for k in (0..rest.len()).rev() {
            base += (x % rest_dims[k]) * strides[rest[k]];
            x /= rest_dims[k];
        }
        for j in 0..m {
            buf[j] = psi[base + local_off[j]];
        }
        for i in 0..m {
            let mut s = cx(0.0, 0.0);
            for j in 0..m {
                s += op[(i, j)] * buf[j];
            }
            out[base + local_off[i]] = s;
        }
    }
    out
}

/// Normalised partial trace onto the listed factors: `tr_rest(A) / dim(rest)`.
pub fn reduce_to(a: &Mat<c64>, full_dims: &[usize], keep: &[usize]) -> Result<Mat<c64>> {
    let n: usize = full_dims.iter().product();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::dims("partial trace input does not match its site list"));
    }
    let mut strides = vec![1usize; full_dims.len()];
    for i in (0..full_dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * full_dims[i + 1];
    }
    let keep_dims: Vec<usize> = keep.iter().map(|&i| full_dims[i]).collect();
    let m: usize = keep_dims.iter().product();
    let rest: Vec<usize> = (0..full_dims.len()).filter(|i| !keep.contains(i)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&i| full_dims[i]).collect();
    let nrest: usize = rest_dims.iter().product();
    let local_off: Vec<usize> = (0..m)
        .map(|mut x| {
            let mut off = 0;
            for k in (0..keep.len()).rev() {
                off += (x % keep_dims[k]) * strides[keep[k]];
                x /= keep_dims[k];
            }
            off
        })
        .collect();
    let mut out = Mat::<c64>::zeros(m, m);
    for r in 0..nrest {
        let mut x = r;
        let mut base = 0;
        for k in (0..rest.len()).rev() {
            base += (x % rest_dims[k]) * strides[rest[k]];
            x /= rest_dims[k];
        }
        for j in 0..m {
            for i in 0..m {
                out[(i, j)] += a[(base + local_off[i], base + local_off[j])];
            }
        }
    }
    Ok(scaled(&out, 1.0 / nrest as f64))
}
