//! Boundary Hamiltonians `Q = ½ log ρ` and their interval decompositions.

use crate::error::{Error, Result};
use crate::gibbs::ChainHamiltonian;
use crate::lattice::cycle_distance;
use crate::layout::SiteOperator;
use crate::linalg::{self, c64, RANK_TOL};
use faer::Mat;
use serde::Serialize;

/// Smallest supported eigenvalue, relative to the largest, accepted before the logarithm.
pub const LOG_CONDITION: f64 = 1e-8;

/// How the boundary sites are arranged for interval purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Topology {
    /// Open chain; every interval is used and the decomposition is exact.
    Line,
    /// Closed cycle; arcs of at most half the cycle are used and the rest is kept as a remainder.
    Cycle,
}

/// Interval terms `q_Z` with `Σ_Z q_Z + remainder = Q`, on local positions `0..n`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Each term's positions are consecutive along the arrangement.
    pub terms: Vec<(Vec<usize>, Mat<c64>)>,
    /// `tr Q / dim`, already folded into the first single-site term.
    pub constant: f64,
    /// Operator on all positions not captured by the intervals, if nonzero.
    pub remainder: Option<Mat<c64>>,
}

pub fn intervals(n: usize, topology: Topology) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match topology {
        Topology::Line => {
            for len in 1..=n {
                for s in 0..=n - len {
                    out.push((s..s + len).collect());
                }
            }
        }
        Topology::Cycle => {
            let max = if n <= 2 { n } else { n / 2 };
            for len in 1..=max {
                let starts = if len == n { 1 } else { n };
                for s in 0..starts {
                    out.push((0..len).map(|k| (s + k) % n).collect());
                }
            }
        }
    }
    out
}

/// Telescoping interval decomposition: with `C_I` the normalised partial trace of
/// `Q` onto `I`, `q_I = C_I − C_{I∖first} − C_{I∖last} + C_{I∖both}`.
pub fn local_decomposition(q: &Mat<c64>, dims: &[usize], topology: Topology) -> Result<Decomposition> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    if q.nrows() != total || q.ncols() != total {
        return Err(Error::dims("boundary Hamiltonian does not match its site list"));
    }
    let constant = (linalg::trace(q) / total as f64).re;
    if n == 0 {
        return Ok(Decomposition { terms: Vec::new(), constant, remainder: None });
    }
    let mut cache: std::collections::HashMap<Vec<usize>, Mat<c64>> = std::collections::HashMap::new();
    let mut reduced = |sites: &[usize]| -> Result<Mat<c64>> {
        if let Some(m) = cache.get(sites) {
            return Ok(m.clone());
        }
        let m = linalg::reduce_to(q, dims, sites)?;
        cache.insert(sites.to_vec(), m.clone());
        Ok(m)
    };
    let local_dims = |sites: &[usize]| -> Vec<usize> { sites.iter().map(|&s| dims[s]).collect() };
    let mut terms = Vec::new();
    for z in intervals(n, topology) {
        let zd = local_dims(&z);
        let zdim: usize = zd.iter().product();
        let lift = |sub: &[usize], m: &Mat<c64>| -> Result<Mat<c64>> {
            if sub.is_empty() {
                return Ok(linalg::scaled(&linalg::identity(zdim), m[(0, 0)].re));
            }
            let pos: Vec<usize> = sub.iter().map(|s| z.iter().position(|t| t == s).unwrap()).collect();
            linalg::embed(m, &local_dims(sub), &pos, &zd)
        };
        let scalar = Mat::from_fn(1, 1, |_, _| c64::new(constant, 0.0));
        let mut term = reduced(&z)?;
        let parts: Vec<(Vec<usize>, f64)> = if z.len() == 1 {
            vec![(vec![], -1.0)]
        } else {
            let k = z.len();
            vec![(z[1..].to_vec(), -1.0), (z[..k - 1].to_vec(), -1.0), (z[1..k - 1].to_vec(), 1.0)]
        };
        for (sub, sign) in parts {
            let m = if sub.is_empty() { scalar.clone() } else { reduced(&sub)? };
            term = &term + &linalg::scaled(&lift(&sub, &m)?, sign);
        }
        terms.push((z, linalg::hermitian_part(&term)));
    }
    // constants live on a single site so that restrictions never drop them
    if let Some(first) = terms.iter_mut().find(|(z, _)| z.len() == 1) {
        let d = first.1.nrows();
        first.1 = &first.1 + &linalg::scaled(&linalg::identity(d), constant);
    }
    let mut sum = Mat::<c64>::zeros(total, total);
    for (z, m) in &terms {
        sum = &sum + &linalg::embed(m, &local_dims(z), z, dims)?;
    }
    let rest = q - &sum;
    let scale = linalg::max_abs(q).max(1.0);
    let remainder = if linalg::max_abs(&rest) > 1e-12 * scale { Some(linalg::hermitian_part(&rest)) } else { None };
    Ok(Decomposition { terms, constant, remainder })
}

/// `Q` with `e^{2Q} = ρ` on the support of `ρ`, and its interval terms on global sites.
#[derive(Clone, Debug)]
pub struct BoundaryHamiltonian {
    /// Global site ids in the arrangement order.
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub q: Mat<c64>,
    pub support: Mat<c64>,
    pub topology: Topology,
    pub terms: Vec<SiteOperator>,
    pub remainder: Option<SiteOperator>,
    /// Largest interval length carrying a term above `1e-10 J`.
    pub k_star: usize,
    /// `J = sup_Z ‖q_Z‖`.
    pub strength: f64,
    /// `‖e^{2Q} − ρ‖` on the support, relative to `‖ρ‖`.
    pub exp_residual: f64,
}

pub fn boundary_hamiltonian(rho: &Mat<c64>, sites: &[usize], dims: &[usize], topology: Topology) -> Result<BoundaryHamiltonian> {
    if sites.len() != dims.len() {
        return Err(Error::dims("site list and dimensions differ in length"));
    }
    let sp = linalg::hermitian_spectral(rho)?;
    sp.check_psd()?;
    let top = sp.max_abs();
    let cut = sp.cutoff(RANK_TOL);
    let smallest = sp.values.iter().copied().filter(|&x| x > cut).fold(f64::INFINITY, f64::min);
    if top > 0.0 && smallest < LOG_CONDITION * top {
        return Err(Error::Singular { condition: top / smallest });
    }
    let q = sp.apply(|x| if x > cut { 0.5 * x.ln() } else { 0.0 });
    let support = linalg::support_from_spectral(&sp, RANK_TOL);
    let back = &(&support * &linalg::expm(&linalg::scaled(&q, 2.0))) * &support;
    let exp_residual = linalg::op_norm(&(&back - rho))? / top.max(f64::MIN_POSITIVE);
    let dec = local_decomposition(&q, dims, topology)?;
    let mut terms = Vec::new();
    let mut strength = 0.0f64;
    let mut norms = Vec::new();
    for (z, m) in dec.terms {
        let nrm = linalg::op_norm(&m)?;
        strength = strength.max(nrm);
        norms.push((z.len(), nrm));
        let g: Vec<usize> = z.iter().map(|&p| sites[p]).collect();
        let d: Vec<usize> = z.iter().map(|&p| dims[p]).collect();
        terms.push(SiteOperator::new(g, d, m)?);
    }
    let k_star = norms.iter().filter(|(_, v)| *v > 1e-10 * strength.max(f64::MIN_POSITIVE)).map(|x| x.0).max().unwrap_or(0);
    let remainder = match dec.remainder {
        Some(m) => Some(SiteOperator::new(sites.to_vec(), dims.to_vec(), m)?),
        None => None,
    };
    Ok(BoundaryHamiltonian { sites: sites.to_vec(), dims: dims.to_vec(), q, support, topology, terms, remainder, k_star, strength, exp_residual })
}

impl BoundaryHamiltonian {
    /// The terms, remainder included, as a Hamiltonian on the global sites.
    pub fn to_chain(&self, global_dims: &[usize]) -> Result<ChainHamiltonian> {
        let mut terms = self.terms.clone();
        if let Some(r) = &self.remainder {
            terms.push(r.clone());
        }
        ChainHamiltonian::new(global_dims.to_vec(), terms)
    }

    /// `Σ_Z q_Z` (plus remainder) on `self.sites`, to compare against `Q`.
    pub fn reconstruction_residual(&self) -> Result<f64> {
        let mut sum = Mat::<c64>::zeros(self.q.nrows(), self.q.ncols());
        for t in self.terms.iter().chain(self.remainder.iter()) {
            sum = &sum + &t.embed(&self.sites, &self.dims)?;
        }
        linalg::op_norm(&(&sum - &self.q))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityProfile {
    pub strength: f64,
    /// `(interval length, max ‖q_Z‖)`.
    pub by_diameter: Vec<(usize, f64)>,
    /// `(x, sup_u Σ_{Z∋u} x^{|Z|} ‖q_Z‖)`.
    pub weighted: Vec<(f64, f64)>,
    pub remainder_norm: f64,
}

pub fn locality_profile(bh: &BoundaryHamiltonian) -> Result<LocalityProfile> {
    let mut norms = Vec::new();
    for t in &bh.terms {
        norms.push((t.sites.clone(), t.norm()?));
    }
    let maxlen = norms.iter().map(|(z, _)| z.len()).max().unwrap_or(0);
    let by_diameter = (1..=maxlen)
        .map(|l| (l, norms.iter().filter(|(z, _)| z.len() == l).map(|x| x.1).fold(0.0, f64::max)))
        .collect();
    let weighted = [2.0, 4.0, 8.0]
        .iter()
        .map(|&x: &f64| {
            let w = bh
                .sites
                .iter()
                .map(|u| norms.iter().filter(|(z, _)| z.contains(u)).map(|(z, v)| x.powi(z.len() as i32) * v).sum::<f64>())
                .fold(0.0, f64::max);
            (x, w)
        })
        .collect();
    let remainder_norm = match &bh.remainder {
        Some(r) => r.norm()?,
        None => 0.0,
    };
    Ok(LocalityProfile { strength: bh.strength, by_diameter, weighted, remainder_norm })
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityPair {
    pub sites: Vec<usize>,
    pub difference: f64,
    /// Cycle distance from the interval to the nearest site not shared by both boundaries.
    pub distance: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub pairs: Vec<HomogeneityPair>,
    /// `δ(l) = max` difference over intervals at distance `≥ l`, for `l = 0..`.
    pub delta: Vec<f64>,
    /// Smallest `l` beyond which every difference is below the tolerance.
    pub r_star: Option<usize>,
}

/// Compares the terms on intervals present in both decompositions.
pub fn homogeneity_delta(first: &BoundaryHamiltonian, second: &BoundaryHamiltonian, tol: f64) -> Result<HomogeneityReport> {
    if first.topology != second.topology {
        return Err(Error::input("decompositions use different interval conventions"));
    }
    let n = first.sites.len();
    let divergent: Vec<usize> = (0..n).filter(|&p| !second.sites.contains(&first.sites[p])).collect();
    let pos = |s: usize| first.sites.iter().position(|&t| t == s).unwrap();
    let mut pairs = Vec::new();
    for t in &first.terms {
        let Some(u) = second.terms.iter().find(|u| {
            let mut a = u.sites.clone();
            let mut b = t.sites.clone();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        }) else {
            continue;
        };
        let um = SiteOperator::new(u.sites.clone(), u.dims.clone(), u.matrix.clone())?.embed(&t.sites, &t.dims)?;
        let difference = linalg::op_norm(&(&t.matrix - &um))?;
        let distance = t
            .sites
            .iter()
            .map(|&s| {
                let d = match first.topology {
                    Topology::Cycle => divergent.iter().map(|&v| cycle_distance(pos(s), v, n)).min(),
                    Topology::Line => divergent.iter().map(|&v| pos(s).abs_diff(v)).min(),
                };
                d.unwrap_or(n)
            })
            .min()
            .unwrap_or(n);
        pairs.push(HomogeneityPair { sites: t.sites.clone(), difference, distance });
    }
    let maxd = pairs.iter().map(|p| p.distance).max().unwrap_or(0);
    let delta: Vec<f64> =
        (0..=maxd).map(|l| pairs.iter().filter(|p| p.distance >= l).map(|p| p.difference).fold(0.0, f64::max)).collect();
    let r_star = delta.iter().position(|&d| d <= tol);
    Ok(HomogeneityReport { pairs, delta, r_star })
}
