//! Time-ordered exponentials `OExp[∫₀¹ O(t) dt]`, later times to the left.

use super::Conjugator;
use crate::error::{Error, Result};
use crate::linalg::{self, c64};
use faer::Mat;
use std::sync::Arc;

const NODES: usize = 16;
const MAX_PANELS: usize = 1 << 12;

type Eval = Arc<dyn Fn(f64) -> Mat<c64> + Send + Sync>;

/// A continuous path `t ∈ [0, 1] ↦ O(t)` with an upper bound on `sup_t ‖O(t)‖`.
#[derive(Clone)]
pub struct OperatorPath {
    pub dim: usize,
    eval: Eval,
    /// Upper bound on the path norm.
    pub bound: f64,
    /// Points in `(0, 1)` where the path may fail to be smooth.
    pub breaks: Vec<f64>,
}

impl std::fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPath").field("dim", &self.dim).field("bound", &self.bound).field("breaks", &self.breaks).finish()
    }
}

impl OperatorPath {
    pub fn new(dim: usize, bound: f64, eval: impl Fn(f64) -> Mat<c64> + Send + Sync + 'static) -> Self {
        OperatorPath { dim, eval: Arc::new(eval), bound, breaks: Vec::new() }
    }

    pub fn eval(&self, t: f64) -> Mat<c64> {
        (self.eval)(t)
    }

    pub fn zero(dim: usize) -> Self {
        OperatorPath::new(dim, 0.0, move |_| Mat::zeros(dim, dim))
    }

    pub fn constant(m: Mat<c64>) -> Result<Self> {
        let bound = linalg::op_norm(&m)?;
        Ok(OperatorPath::new(m.nrows(), bound, move |_| m.clone()))
    }

    /// Linear interpolation between `nodes` placed evenly on `[0, 1]`.
    pub fn piecewise_linear(nodes: Vec<Mat<c64>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::input("a piecewise-linear path needs two nodes"));
        }
        let dim = nodes[0].nrows();
        let mut bound = 0.0f64;
        for n in &nodes {
            bound = bound.max(linalg::op_norm(n)?);
        }
        let segs = nodes.len() - 1;
        let breaks = (1..segs).map(|k| k as f64 / segs as f64).collect();
        let eval = move |t: f64| {
            let x = (t.clamp(0.0, 1.0) * segs as f64).min(segs as f64 - 1e-300);
            let k = (x.floor() as usize).min(segs - 1);
            let s = x - k as f64;
            &linalg::scaled(&nodes[k], 1.0 - s) + &linalg::scaled(&nodes[k + 1], s)
        };
        Ok(OperatorPath { dim, eval: Arc::new(eval), bound, breaks })
    }

    /// Largest `‖O(t)‖` over `samples + 1` evenly spaced points.
    pub fn sampled_max(&self, samples: usize) -> Result<f64> {
        let mut m = 0.0f64;
        for k in 0..=samples {
            m = m.max(linalg::op_norm(&self.eval(k as f64 / samples as f64))?);
        }
        Ok(m)
    }
}

/// The path `Σ_m Γ^t_{O_1} ∘ ⋯ ∘ Γ^t_{O_{m−1}}(O_m)`, whose expansional is `e^{O_1} ⋯ e^{O_n}`.
pub fn iterated_path(ops: &[Mat<c64>]) -> Result<OperatorPath> {
    if ops.is_empty() {
        return Err(Error::input("no operators"));
    }
    let dim = ops[0].nrows();
    let mut norms = Vec::new();
    for o in ops {
        if o.nrows() != dim || o.ncols() != dim {
            return Err(Error::dims("operators of different size"));
        }
        norms.push(linalg::op_norm(o)?);
    }
    // ‖Γ^t_B(A)‖ ≤ e^{2t‖B‖} ‖A‖
    let mut bound = 0.0;
    let mut acc = 0.0f64;
    for n in &norms {
        bound += (2.0 * acc).exp() * n;
        acc += n;
    }
    let hermitian = ops.iter().all(|o| linalg::hermiticity_residual(o) <= linalg::HERMITIAN_TOL);
    let conj: Option<Vec<Conjugator>> = if hermitian { Some(ops.iter().map(Conjugator::new).collect::<Result<_>>()?) } else { None };
    let ops = ops.to_vec();
    let eval = move |t: f64| {
        let mut sum = Mat::<c64>::zeros(dim, dim);
        for m in 0..ops.len() {
            let mut x = ops[m].clone();
            for k in (0..m).rev() {
                x = match &conj {
                    Some(c) => c[k].apply(t, &x),
                    None => super::gamma(t, &ops[k], &x).unwrap(),
                };
            }
            sum = &sum + &x;
        }
        sum
    };
    Ok(OperatorPath::new(dim, bound, eval))
}

#[derive(Clone, Debug)]
pub struct Expansional {
    pub value: Mat<c64>,
    /// Panels per smooth piece at the accepted refinement level.
    pub panels: usize,
    /// Dyson order per panel.
    pub order: usize,
    /// Certified bound on the discarded Dyson tail.
    pub truncation: f64,
    /// Change between the last two refinement levels.
    pub refinement_change: f64,
}

fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
        p.push(next);
    }
    p
}

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
    /// `s[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds` for the Lagrange basis `ℓ_j` on the nodes.
    s: Vec<Vec<f64>>,
}

fn rule() -> Rule {
    let gl = gauss_quad::legendre::GaussLegendre::new(NODES.try_into().unwrap());
    let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let w: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let pj: Vec<Vec<f64>> = x.iter().map(|&xj| legendre(NODES, xj)).collect();
    let s = x
        .iter()
        .map(|&xi| {
            let p = legendre(NODES + 1, xi);
            // ∫_{-1}^{x} P_k = (P_{k+1}(x) − P_{k−1}(x)) / (2k + 1), and x + 1 for k = 0
            let int: Vec<f64> = (0..NODES).map(|k| if k == 0 { xi + 1.0 } else { (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64 }).collect();
            (0..NODES)
                .map(|j| (0..NODES).map(|k| w[j] * pj[j][k] * (2 * k + 1) as f64 / 2.0 * int[k]).sum())
                .collect()
        })
        .collect();
    Rule { x, w, s }
}

/// Smallest `n` with `Σ_{k>n} p^k / k! ≤ target`.
fn dyson_order(p: f64, target: f64) -> (usize, f64) {
    if p == 0.0 {
        return (0, 0.0);
    }
    let mut n = 0usize;
    loop {
        // tail after order n, summed until negligible
        let mut term = 1.0f64;
        for k in 1..=n + 1 {
            term *= p / k as f64;
        }
        let mut tail = 0.0;
        let mut k = n + 1;
        while term > 1e-300 && (term > 1e-18 * tail || tail == 0.0) {
            tail += term;
            k += 1;
            term *= p / k as f64;
            if k > n + 400 {
                break;
            }
        }
        if tail <= target || n > 200 {
            return (n, tail);
        }
        n += 1;
    }
}

fn propagate(path: &OperatorPath, rule: &Rule, panels_per_piece: usize, tol: f64) -> (Mat<c64>, usize, f64) {
    let dim = path.dim;
    let id = linalg::identity(dim);
    let mut edges = vec![0.0];
    edges.extend(path.breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    edges.push(1.0);
    let total_panels = panels_per_piece * (edges.len() - 1);
    let mut u = id.clone();
    let mut max_order = 0;
    let mut trunc = 0.0;
    for piece in edges.windows(2) {
        let h = (piece[1] - piece[0]) / panels_per_piece as f64;
        let (order, tail) = dyson_order(path.bound * h, tol / (2.0 * total_panels as f64));
        max_order = max_order.max(order);
        trunc += tail;
        for p in 0..panels_per_piece {
            let a = piece[0] + p as f64 * h;
            let ops: Vec<Mat<c64>> = rule.x.iter().map(|&x| path.eval(a + (x + 1.0) * h / 2.0)).collect();
            let mut y: Vec<Mat<c64>> = vec![id.clone(); NODES];
            for _ in 0..order {
                let oy: Vec<Mat<c64>> = ops.iter().zip(&y).map(|(o, yj)| o * yj).collect();
                y = (0..NODES)
                    .map(|i| {
                        let mut acc = id.clone();
                        for j in 0..NODES {
                            acc = &acc + &linalg::scaled(&oy[j], rule.s[i][j] * h / 2.0);
                        }
                        acc
                    })
                    .collect();
            }
            let mut step = id.clone();
            for j in 0..NODES {
                step = &step + &linalg::scaled(&(&ops[j] * &y[j]), rule.w[j] * h / 2.0);
            }
            u = &step * &u;
        }
    }
    (u, max_order + 1, trunc)
}

/// Dyson series on Gauss-Legendre panels, refined dyadically until two
/// successive levels agree within `tol / 10`.
pub fn expansional(path: &OperatorPath, tol: f64) -> Result<Expansional> {
    let rule = rule();
    let mut panels = 1;
    let (mut prev, _, _) = propagate(path, &rule, panels, tol);
    loop {
        panels *= 2;
        if panels > MAX_PANELS {
            return Err(Error::Convergence(format!("expansional did not stabilise with {MAX_PANELS} panels")));
        }
        let (u, order, truncation) = propagate(path, &rule, panels, tol);
        let change = linalg::max_abs(&(&u - &prev)) / linalg::max_abs(&u).max(1.0);
        if change <= tol / 10.0 {
            return Ok(Expansional { value: u, panels, order, truncation, refinement_change: change });
        }
        prev = u;
    }
}

/// `(‖OExp − 𝟙‖, exp(‖O‖_path) − 1)`.
pub fn expansional_norm_check(path: &OperatorPath, tol: f64) -> Result<(f64, f64)> {
    let e = expansional(path, tol)?;
    let measured = linalg::op_norm(&(&e.value - &linalg::identity(path.dim)))?;
    Ok((measured, path.bound.exp_m1()))
}
