//! Boundary-to-bulk maps `V_A` and boundary states `ρ_∂A = V_A† V_A`.
//!
//! Bonds are contracted as plain index sums, so `V_A|α⟩` is the network value
//! with boundary legs fixed to `α`. Physical sites of a region appear in
//! column-major order and boundary legs in the cycle order of
//! [`Rect::boundary`].

use super::{check_cap, dense_cap, PepsModel, BOUNDARY_CAP};
use crate::error::{Error, Result};
use crate::lattice::{site_label, Edge, Rect};
use crate::linalg::{self, c64, MatrixFunction, RANK_TOL};
use crate::tensor::{contract, contract_common, LabeledTensor};
use faer::Mat;

/// Largest number of entries a dense boundary map may have.
pub const V_ENTRY_CAP: u128 = 1 << 26;

/// A linear map stored as a labelled tensor: `outputs ← inputs`.
#[derive(Clone, Debug)]
pub struct BoundaryMap {
    pub tensor: LabeledTensor,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
}

impl BoundaryMap {
    pub fn matrix(&self) -> Result<Mat<c64>> {
        let o: Vec<&str> = self.outputs.iter().map(|s| s.as_str()).collect();
        let i: Vec<&str> = self.inputs.iter().map(|s| s.as_str()).collect();
        self.tensor.to_matrix(&o, &i)
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.iter().map(|l| self.tensor.dim_of(l).unwrap()).product()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.iter().map(|l| self.tensor.dim_of(l).unwrap()).product()
    }

    /// `self ∘ inner`, contracting the outputs of `inner` that are inputs of `self`.
    pub fn compose(&self, inner: &BoundaryMap) -> Result<BoundaryMap> {
        let shared: Vec<String> = inner.outputs.iter().filter(|l| self.inputs.contains(l)).cloned().collect();
        let pairs: Vec<(&str, &str)> = shared.iter().map(|s| (s.as_str(), s.as_str())).collect();
        let tensor = contract(&self.tensor, &inner.tensor, &pairs)?;
        let outputs =
            self.outputs.iter().chain(inner.outputs.iter().filter(|l| !shared.contains(l))).cloned().collect();
        let inputs =
            inner.inputs.iter().chain(self.inputs.iter().filter(|l| !shared.contains(l))).cloned().collect();
        Ok(BoundaryMap { tensor, outputs, inputs })
    }

    /// Operator given as a matrix on labelled factors, mapping `inputs` to `outputs`.
    pub fn from_operator(m: &Mat<c64>, outputs: Vec<(String, usize)>, inputs: Vec<(String, usize)>) -> Result<Self> {
        use crate::tensor::Axis;
        let oa: Vec<Axis> = outputs.iter().map(|(l, d)| Axis::new(l.clone(), *d)).collect();
        let ia: Vec<Axis> = inputs.iter().map(|(l, d)| Axis::new(l.clone(), *d)).collect();
        let tensor = LabeledTensor::from_matrix(m, oa, ia)?;
        Ok(BoundaryMap {
            tensor,
            outputs: outputs.into_iter().map(|x| x.0).collect(),
            inputs: inputs.into_iter().map(|x| x.0).collect(),
        })
    }

    pub fn relabeled(&self, map: impl Fn(&str) -> String) -> Result<Self> {
        Ok(BoundaryMap {
            tensor: self.tensor.clone().relabeled(&map)?,
            outputs: self.outputs.iter().map(|l| map(l)).collect(),
            inputs: self.inputs.iter().map(|l| map(l)).collect(),
        })
    }
}

pub fn phys_labels(region: &Rect) -> Vec<String> {
    region.sites().iter().map(|&(r, c)| site_label(r, c)).collect()
}

pub fn edge_labels(edges: &[Edge]) -> Vec<String> {
    edges.iter().map(|e| e.label()).collect()
}

fn check_region(model: &PepsModel, region: &Rect) -> Result<()> {
    model.lattice.check(region)
}

pub fn phys_dim(model: &PepsModel, region: &Rect) -> u128 {
    (model.phys_dim as u128).saturating_pow(region.len() as u32)
}

pub fn boundary_dim(model: &PepsModel, region: &Rect) -> u128 {
    region.boundary_edges().iter().map(|e| model.edge_dim(e) as u128).product()
}

/// `V_A` as a labelled tensor. `cap` bounds the physical dimension.
pub fn v_map(model: &PepsModel, region: &Rect, cap: u128) -> Result<BoundaryMap> {
    check_region(model, region)?;
    check_cap("physical space of the region", phys_dim(model, region), cap)?;
    check_cap("entries of the boundary map", phys_dim(model, region).saturating_mul(boundary_dim(model, region)), V_ENTRY_CAP)?;
    let mut acc: Option<LabeledTensor> = None;
    for (r, c) in region.sites() {
        let t = model.placed_tensor(r, c, "")?;
        acc = Some(match acc {
            None => t,
            Some(a) => contract_common(&a, &t)?,
        });
    }
    let tensor = acc.unwrap();
    Ok(BoundaryMap { tensor, outputs: phys_labels(region), inputs: edge_labels(&region.boundary_edges()) })
}

/// Dense `V_A`, rows indexed by the physical space, columns by the boundary.
pub fn v_matrix(model: &PepsModel, region: &Rect) -> Result<Mat<c64>> {
    v_map(model, region, dense_cap())?.matrix()
}

/// `V̂_{A→B}`: `V_A` with the legs shared with `∂B` moved to the output side.
pub fn v_hat(model: &PepsModel, inner: &Rect, neighbour: &Rect) -> Result<BoundaryMap> {
    let mut m = v_map(model, inner, dense_cap())?;
    let nb: Vec<String> = edge_labels(&neighbour.boundary_edges());
    let shared: Vec<String> = m.inputs.iter().filter(|l| nb.contains(l)).cloned().collect();
    if shared.is_empty() {
        return Err(Error::Geometry(vec![format!("{inner:?} and {neighbour:?} share no boundary edge")]));
    }
    m.inputs.retain(|l| !shared.contains(l));
    m.outputs.extend(shared);
    Ok(m)
}

/// Boundary state of a region together with the edge list it is expressed on.
#[derive(Clone, Debug)]
pub struct BoundaryState {
    pub region: Rect,
    pub edges: Vec<Edge>,
    pub dims: Vec<usize>,
    pub rho: Mat<c64>,
}

impl BoundaryState {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// Edges with dimension above one; these are the tensor factors of the boundary space.
    pub fn sites(&self) -> Vec<(Edge, usize)> {
        self.edges.iter().zip(&self.dims).filter(|(_, &d)| d > 1).map(|(e, &d)| (*e, d)).collect()
    }

    pub fn support(&self) -> Result<Mat<c64>> {
        linalg::support_projector(&self.rho, RANK_TOL)
    }

    pub fn rank(&self) -> Result<usize> {
        let sp = linalg::hermitian_spectral(&self.rho)?;
        Ok(sp.rank(RANK_TOL))
    }

    pub fn scaled(&self, s: f64) -> Self {
        BoundaryState { rho: linalg::scaled(&self.rho, s), ..self.clone() }
    }
}

/// `ρ_∂A` by a column-major sweep over double-layer site tensors.
pub fn boundary_state(model: &PepsModel, region: &Rect) -> Result<BoundaryState> {
    check_region(model, region)?;
    let edges = region.boundary_edges();
    let dims: Vec<usize> = edges.iter().map(|e| model.edge_dim(e)).collect();
    check_cap("boundary space of the region", dims.iter().map(|&d| d as u128).product(), BOUNDARY_CAP)?;
    let mut acc: Option<LabeledTensor> = None;
    for (r, c) in region.sites() {
        let t = model.double_tensor(r, c)?;
        acc = Some(match acc {
            None => t,
            Some(a) => contract_common(&a, &t)?,
        });
    }
    let t = acc.unwrap();
    let rows: Vec<String> = edges.iter().map(|e| format!("b:{}", e.label())).collect();
    let cols: Vec<String> = edges.iter().map(|e| format!("k:{}", e.label())).collect();
    let rr: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
    let cc: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let rho = linalg::hermitian_part(&t.to_matrix(&rr, &cc)?);
    Ok(BoundaryState { region: *region, edges, dims, rho })
}

/// `ρ_∂A = V†V` from the dense boundary map; the reference route.
pub fn boundary_state_dense(model: &PepsModel, region: &Rect) -> Result<BoundaryState> {
    let v = v_matrix(model, region)?;
    let edges = region.boundary_edges();
    let dims = edges.iter().map(|e| model.edge_dim(e)).collect();
    let rho = linalg::hermitian_part(&(v.adjoint() * &v));
    Ok(BoundaryState { region: *region, edges, dims, rho })
}

/// Result of building `W = V ρ^{-1/2}` and checking that it is a partial isometry.
#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub w: Mat<c64>,
    pub support: Mat<c64>,
    pub rank: usize,
    /// `‖W†W − Π_supp ρ‖`.
    pub isometry_residual: f64,
    pub injective: bool,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
}

pub fn isometry(model: &PepsModel, region: &Rect) -> Result<IsometryReport> {
    let v = v_matrix(model, region)?;
    isometry_from_v(&v)
}

pub fn isometry_from_v(v: &Mat<c64>) -> Result<IsometryReport> {
    let rho = linalg::hermitian_part(&(v.adjoint() * v));
    let sp = linalg::hermitian_spectral(&rho)?;
    sp.check_psd()?;
    let support = linalg::support_from_spectral(&sp, RANK_TOL);
    let w = polar_isometry(v, sp.rank(RANK_TOL))?;
    let isometry_residual = linalg::op_norm(&(&(w.adjoint() * &w) - &support))?;
    let sv = linalg::singular_values(v)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = if v.ncols() > v.nrows() { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    Ok(IsometryReport {
        w,
        support,
        rank: sp.rank(RANK_TOL),
        isometry_residual,
        injective: smin > RANK_TOL.sqrt() * smax,
        smallest_singular_value: smin,
        largest_singular_value: smax,
    })
}

/// `V ρ^{-1/2}` as `U_k X_k†` from the thin SVD `V = U S X†`, keeping the
/// leading `k` singular vectors. Avoids inverting the square root of `V†V`.
pub fn polar_isometry(v: &Mat<c64>, k: usize) -> Result<Mat<c64>> {
    if k == 0 || v.nrows() == 0 || v.ncols() == 0 {
        return Ok(Mat::zeros(v.nrows(), v.ncols()));
    }
    let svd = v.thin_svd().map_err(|e| Error::Convergence(format!("{e:?}")))?;
    let (u, x) = (svd.U(), svd.V());
    let k = k.min(u.ncols());
    Ok(u.subcols(0, k) * x.subcols(0, k).adjoint())
}

/// Projector onto `Im V` in the physical space: `V ρ^+ V†`.
pub fn image_projector(v: &Mat<c64>) -> Result<Mat<c64>> {
    let rho = linalg::hermitian_part(&(v.adjoint() * v));
    let pinv = linalg::matrix_function(&rho, MatrixFunction::PseudoInverse)?;
    Ok(linalg::hermitian_part(&(&(v * &pinv) * v.adjoint())))
}

/// Residual of `J_∂B V̂_{A→B} = V̂_{A→B} J_∂AB`, each side padded by identities.
pub fn pulling_through_residual(model: &PepsModel, a: &Rect, b: &Rect) -> Result<f64> {
    let ab = union_rect(a, b)?;
    let vhat = v_hat(model, a, b)?;
    let jb = boundary_state(model, b)?.support()?;
    let jab = boundary_state(model, &ab)?.support()?;
    let lab = |es: &[Edge]| -> Vec<(String, usize)> { es.iter().map(|e| (e.label(), model.edge_dim(e))).collect() };
    let prime = |v: &[(String, usize)]| -> Vec<(String, usize)> { v.iter().map(|(l, d)| (format!("{l}'"), *d)).collect() };
    let eb = lab(&b.boundary_edges());
    let eab = lab(&ab.boundary_edges());
    // J_∂B on the left: inputs unprimed, outputs primed
    let left_j = BoundaryMap::from_operator(&jb, prime(&eb), eb.clone())?;
    let left = left_j.compose(&vhat)?;
    // J_∂AB on the right: inputs primed, outputs unprimed
    let right_j = BoundaryMap::from_operator(&jab, eab.clone(), prime(&eab))?;
    let right = vhat.compose(&right_j)?;
    let unprime = |l: &str| l.trim_end_matches('\'').to_string();
    let add_prime = |l: &str| format!("{l}'");
    // bring both sides to outputs = phys ⊗ ∂B (unprimed), inputs = ∂AB (primed)
    let left = left.relabeled(|l| {
        if l.ends_with('\'') {
            unprime(l)
        } else if l.starts_with('p') {
            l.to_string()
        } else {
            add_prime(l)
        }
    })?;
    let mut outs: Vec<String> = phys_labels(a);
    outs.extend(eb.iter().map(|x| x.0.clone()));
    let ins: Vec<String> = eab.iter().map(|x| format!("{}'", x.0)).collect();
    let lo: Vec<&str> = outs.iter().map(|s| s.as_str()).collect();
    let li: Vec<&str> = ins.iter().map(|s| s.as_str()).collect();
    let lm = left.tensor.to_matrix(&lo, &li)?;
    let rm = right.tensor.to_matrix(&lo, &li)?;
    linalg::op_norm(&(&lm - &rm))
}

/// Smallest rectangle equal to the union of two adjacent rectangles.
pub fn union_rect(a: &Rect, b: &Rect) -> Result<Rect> {
    if a.row == b.row && a.height == b.height && a.col + a.width as i64 == b.col {
        return Ok(Rect::new(a.row, a.col, a.height, a.width + b.width));
    }
    if a.col == b.col && a.width == b.width && a.row + a.height as i64 == b.row {
        return Ok(Rect::new(a.row, a.col, a.height + b.height, a.width));
    }
    Err(Error::Geometry(vec![format!("{a:?} and {b:?} do not form a rectangle")]))
}
