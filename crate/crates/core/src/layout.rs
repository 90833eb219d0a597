//! Boundary sites shared by the four boundaries of a tripartite split, and
//! operators supported on named subsets of them.

use crate::error::{Error, Result};
use crate::lattice::{AbcSplit, Edge, Part, Segments};
use crate::linalg::{self, c64};
use crate::peps::PepsModel;
use faer::Mat;

/// Operator on an ordered list of global boundary sites.
#[derive(Clone, Debug)]
pub struct SiteOperator {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub matrix: Mat<c64>,
}

impl SiteOperator {
    pub fn new(sites: Vec<usize>, dims: Vec<usize>, matrix: Mat<c64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if sites.len() != dims.len() || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::dims("site operator does not match its site list"));
        }
        Ok(SiteOperator { sites, dims, matrix })
    }

    pub fn identity() -> Self {
        SiteOperator { sites: Vec::new(), dims: Vec::new(), matrix: linalg::identity(1) }
    }

    pub fn is_identity_on_nothing(&self) -> bool {
        self.sites.is_empty()
    }

    /// The operator on the ordered site list `target` (identity elsewhere).
    pub fn embed(&self, target: &[usize], target_dims: &[usize]) -> Result<Mat<c64>> {
        let mut pos = Vec::with_capacity(self.sites.len());
        for s in &self.sites {
            match target.iter().position(|t| t == s) {
                Some(p) => pos.push(p),
                None => return Err(Error::SupportMismatch(format!("site {s} is not part of the target space"))),
            }
        }
        if self.sites.is_empty() {
            let n: usize = target_dims.iter().product();
            let z = self.matrix[(0, 0)];
            return Ok(Mat::from_fn(n, n, |i, j| if i == j { z } else { c64::new(0.0, 0.0) }));
        }
        linalg::embed(&self.matrix, &self.dims, &pos, target_dims)
    }

    pub fn norm(&self) -> Result<f64> {
        linalg::op_norm(&self.matrix)
    }

    pub fn supported_in(&self, allowed: &[usize]) -> bool {
        self.sites.iter().all(|s| allowed.contains(s))
    }
}

/// Global boundary sites with their segment labels, and the ordered site
/// list of each of the boundaries of ABC, AB, BC and B.
#[derive(Clone, Debug)]
pub struct BoundaryLayout {
    pub site_dims: Vec<usize>,
    pub names: Vec<String>,
    pub labels: Vec<Segments>,
    pub regions: [Vec<usize>; 4],
}

fn part_index(p: Part) -> usize {
    Part::ALL.iter().position(|x| *x == p).unwrap()
}

/// Lengths of the pieces of a one-dimensional boundary layout.
#[derive(Clone, Copy, Debug)]
pub struct ChainPieces {
    pub a_only: usize,
    pub ad: usize,
    pub x: usize,
    pub y: usize,
    pub bc: usize,
    pub b_only: usize,
    pub c_only: usize,
    pub d_only: usize,
}

impl BoundaryLayout {
    /// Edges of dimension above one on the four boundaries of `split`.
    pub fn from_split(model: &PepsModel, split: &AbcSplit) -> Result<Self> {
        let seg = split.segments();
        let mut edges: Vec<Edge> = Vec::new();
        for p in Part::ALL {
            for e in seg.boundary(p) {
                if model.edge_dim(e) > 1 && !edges.contains(e) {
                    edges.push(*e);
                }
            }
        }
        let regions = Part::ALL.map(|p| {
            seg.boundary(p)
                .iter()
                .filter(|e| model.edge_dim(e) > 1)
                .map(|e| edges.iter().position(|x| x == e).unwrap())
                .collect::<Vec<_>>()
        });
        Ok(BoundaryLayout {
            site_dims: edges.iter().map(|e| model.edge_dim(e)).collect(),
            names: edges.iter().map(|e| e.label()).collect(),
            labels: edges.iter().map(|e| seg.label(e)).collect(),
            regions,
        })
    }

    /// A one-dimensional picture of the four boundaries, all sites of dimension `d`:
    /// `∂ABC = a x y b`, `∂AB = a x y c`, `∂BC = d x y b`, `∂B = d x y c`, with
    /// `a ∩ d` and `b ∩ c` runs shared.
    pub fn chain(p: ChainPieces, d: usize) -> Self {
        let mut names = Vec::new();
        let mut labels = Vec::new();
        let mut runs: Vec<Vec<usize>> = Vec::new();
        for (name, len, lab) in [
            ("a", p.a_only, Segments::A),
            ("ad", p.ad, Segments::A | Segments::D),
            ("x", p.x, Segments::X),
            ("y", p.y, Segments::Y),
            ("bc", p.bc, Segments::B | Segments::C),
            ("b", p.b_only, Segments::B),
            ("c", p.c_only, Segments::C),
            ("d", p.d_only, Segments::D),
        ] {
            let mut run = Vec::new();
            for i in 0..len {
                run.push(names.len());
                names.push(format!("{name}{i}"));
                labels.push(lab);
            }
            runs.push(run);
        }
        let cat = |idx: &[usize]| -> Vec<usize> { idx.iter().flat_map(|&i| runs[i].clone()).collect() };
        let regions = [cat(&[0, 1, 2, 3, 4, 5]), cat(&[0, 1, 2, 3, 4, 6]), cat(&[7, 1, 2, 3, 4, 5]), cat(&[7, 1, 2, 3, 4, 6])];
        BoundaryLayout { site_dims: vec![d; names.len()], names, labels, regions }
    }

    pub fn region(&self, p: Part) -> &[usize] {
        &self.regions[part_index(p)]
    }

    pub fn dims_of(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().map(|&s| self.site_dims[s]).collect()
    }

    pub fn region_dims(&self, p: Part) -> Vec<usize> {
        self.dims_of(self.region(p))
    }

    /// Sites of boundary `p` carrying any flag of `seg`, in boundary order.
    pub fn sites(&self, p: Part, seg: Segments) -> Vec<usize> {
        self.region(p).iter().copied().filter(|&s| self.labels[s].intersects(seg)).collect()
    }

    /// All sites of the layout.
    pub fn all_sites(&self) -> Vec<usize> {
        (0..self.site_dims.len()).collect()
    }

    pub fn space_dim(&self, sites: &[usize]) -> u128 {
        sites.iter().map(|&s| self.site_dims[s] as u128).product()
    }
}
