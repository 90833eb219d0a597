//! PEPS models on the square lattice, their boundary maps and boundary states.
//!
//! Site tensors carry axes `p, n, e, s, w` (physical, then the four virtual
//! legs). Horizontal and vertical bonds may have different dimensions; a chain
//! is a single row whose vertical bonds have dimension one.

pub mod boundary;
pub mod fixtures;
pub mod mps;

use crate::error::{Error, Result};
use crate::lattice::{site_label, Edge, EdgeKind, Lattice, Rect};
use crate::tensor::{contract, Axis, LabeledTensor};

pub use boundary::{BoundaryMap, BoundaryState, IsometryReport};
pub use mps::{Mps, TransferSpectrum};

/// Default cap on the physical dimension of dense operators.
pub const DENSE_CAP: u128 = 1 << 13;
/// Default cap on the dimension of a boundary space.
pub const BOUNDARY_CAP: u128 = 1 << 12;
/// Environment variable overriding [`DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "PEPSBOUND_DENSE_CAP";

pub fn dense_cap() -> u128 {
    std::env::var(DENSE_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DENSE_CAP)
}

pub fn check_cap(what: &str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::CapExceeded { what: what.to_string(), needed, cap })
    } else {
        Ok(())
    }
}

pub const AXES: [&str; 5] = ["p", "n", "e", "s", "w"];

#[derive(Clone, Debug)]
pub struct PepsModel {
    pub lattice: Lattice,
    pub phys_dim: usize,
    pub bond_h: usize,
    pub bond_v: usize,
    /// Row-major list of site tensors with axes in [`AXES`] order.
    tensors: Vec<LabeledTensor>,
}

impl PepsModel {
    pub fn new(lattice: Lattice, tensors: Vec<LabeledTensor>) -> Result<Self> {
        if tensors.len() != lattice.rows * lattice.cols || tensors.is_empty() {
            return Err(Error::input(format!(
                "{} tensors given for a {}x{} lattice",
                tensors.len(),
                lattice.rows,
                lattice.cols
            )));
        }
        let first = tensors[0].permuted(&AXES)?;
        let dims = first.dims();
        let (d, dv, dh) = (dims[0], dims[1], dims[2]);
        if dims[3] != dv || dims[4] != dh {
            return Err(Error::dims(format!("opposite legs differ in dimension: {dims:?}")));
        }
        let mut out = Vec::with_capacity(tensors.len());
        for t in &tensors {
            let p = t.permuted(&AXES)?;
            if p.dims() != dims {
                return Err(Error::dims(format!("site tensor dims {:?} differ from {:?}", p.dims(), dims)));
            }
            if p.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::input("site tensor has non-finite entries"));
            }
            out.push(p);
        }
        Ok(PepsModel { lattice, phys_dim: d, bond_h: dh, bond_v: dv, tensors: out })
    }

    /// Same tensor on every site.
    pub fn uniform(lattice: Lattice, tensor: LabeledTensor) -> Result<Self> {
        Self::new(lattice, vec![tensor; lattice.rows * lattice.cols])
    }

    pub fn tensor(&self, row: i64, col: i64) -> &LabeledTensor {
        &self.tensors[row as usize * self.lattice.cols + col as usize]
    }

    pub fn tensors(&self) -> &[LabeledTensor] {
        &self.tensors
    }

    pub fn edge_dim(&self, e: &Edge) -> usize {
        match e.kind {
            EdgeKind::Horizontal => self.bond_h,
            EdgeKind::Vertical => self.bond_v,
        }
    }

    /// Site tensor with its legs renamed after the physical site and the lattice edges.
    pub fn placed_tensor(&self, row: i64, col: i64, prefix: &str) -> Result<LabeledTensor> {
        let names = [
            site_label(row, col),
            Edge::vertical(row - 1, col).label(),
            Edge::horizontal(row, col).label(),
            Edge::vertical(row, col).label(),
            Edge::horizontal(row, col - 1).label(),
        ];
        let t = self.tensor(row, col).clone();
        let axes: Vec<Axis> = t
            .axes()
            .iter()
            .zip(names.iter())
            .enumerate()
            .map(|(k, (a, n))| Axis::new(if k == 0 { n.clone() } else { format!("{prefix}{n}") }, a.dim))
            .collect();
        LabeledTensor::new(axes, t.into_data())
    }

    /// `Σ_k conj(T^k) ⊗ T^k` with bra legs prefixed `b:` and ket legs `k:`.
    pub fn double_tensor(&self, row: i64, col: i64) -> Result<LabeledTensor> {
        let ket = self.placed_tensor(row, col, "k:")?;
        let bra = self.placed_tensor(row, col, "b:")?.conj();
        let p = site_label(row, col);
        contract(&bra, &ket, &[(p.as_str(), p.as_str())])
    }

    /// Blocks `kr x kc` patches into single sites.
    pub fn blocked(&self, kr: usize, kc: usize) -> Result<Self> {
        if kr == 0 || kc == 0 || !self.lattice.rows.is_multiple_of(kr) || !self.lattice.cols.is_multiple_of(kc) {
            return Err(Error::input(format!("cannot block a {:?} lattice by {kr}x{kc}", self.lattice)));
        }
        let nl = Lattice::new(self.lattice.rows / kr, self.lattice.cols / kc);
        let mut out = Vec::new();
        for br in 0..nl.rows {
            for bc in 0..nl.cols {
                let rect = Rect::new((br * kr) as i64, (bc * kc) as i64, kr, kc);
                let map = boundary::v_map(self, &rect, u128::MAX)?;
                let phys: Vec<String> = rect.sites().iter().map(|&(r, c)| site_label(r, c)).collect();
                let bd = rect.boundary();
                let side_labels = |side: crate::lattice::Side| -> Vec<String> {
                    let mut v: Vec<_> = bd.iter().filter(|b| b.side == side).collect();
                    v.sort_by_key(|b| b.index);
                    v.iter().map(|b| b.edge.label()).collect()
                };
                use crate::lattice::Side::*;
                let mut t = map.tensor.clone();
                let groups = [(phys, "p"), (side_labels(North), "n"), (side_labels(East), "e"), (side_labels(South), "s"), (side_labels(West), "w")];
                for (labels, name) in groups.iter() {
                    let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
                    t = t.fuse(&refs, name)?;
                }
                out.push(t.permuted(&AXES)?);
            }
        }
        Self::new(nl, out)
    }
}
