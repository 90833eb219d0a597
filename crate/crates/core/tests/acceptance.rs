//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use faer::Mat;
use pepsbound::analysis::martingale::DENSE_MARTINGALE_CAP;
use pepsbound::analysis::*;
use pepsbound::gibbs::araki::log_residual_curvature;
use pepsbound::gibbs::*;
use pepsbound::lattice::{AbcSplit, Lattice, Part, Rect};
use pepsbound::layout::{BoundaryLayout, ChainPieces, SiteOperator};
use pepsbound::linalg::{self, c64, max_abs, op_norm};
use pepsbound::parent::{ground_projector, GroundMethod};
use pepsbound::peps::boundary::{boundary_dim, isometry, phys_dim, v_matrix};
use pepsbound::peps::fixtures::*;
use pepsbound::peps::{PepsModel, BOUNDARY_CAP};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn random_matrix(n: usize, seed: u64) -> Mat<c64> {
    let mut rng = linalg::seeded_rng(seed);
    let v = linalg::random_complex_vector(&mut rng, n * n);
    Mat::from_fn(n, n, |i, j| v[i * n + j])
}

fn random_pd(n: usize, seed: u64, shift: f64) -> Mat<c64> {
    let g = random_matrix(n, seed);
    &(&g * g.adjoint()) + &linalg::scaled(&linalg::identity(n), shift)
}

fn random_psd(n: usize, rank: usize, seed: u64) -> Mat<c64> {
    let mut rng = linalg::seeded_rng(seed);
    let v = linalg::random_complex_vector(&mut rng, n * rank);
    let g = Mat::from_fn(n, rank, |i, j| v[i * rank + j]);
    linalg::hermitian_part(&(&g * g.adjoint()))
}

fn random_hermitian(n: usize, norm: f64, seed: u64) -> Mat<c64> {
    let h = linalg::hermitian_part(&random_matrix(n, seed));
    let s = op_norm(&h).unwrap();
    linalg::scaled(&h, norm / s)
}

fn chain_split(n: usize, widths: [usize; 3]) -> AbcSplit {
    chain_split_at(n, 0, widths)
}

fn chain_split_at(n: usize, col: i64, widths: [usize; 3]) -> AbcSplit {
    let len: usize = widths.iter().sum();
    AbcSplit::new(Lattice::new(1, n), Rect::new(0, col, 1, len), widths, 0, 0.0).unwrap()
}

fn all_rects(l: &Lattice) -> Vec<Rect> {
    let mut out = Vec::new();
    for r in 0..l.rows {
        for c in 0..l.cols {
            for h in 1..=l.rows - r {
                for w in 1..=l.cols - c {
                    out.push(Rect::new(r as i64, c as i64, h, w));
                }
            }
        }
    }
    out
}

fn fixture_models() -> Vec<(&'static str, PepsModel)> {
    vec![
        ("product", product_peps(2, Lattice::new(2, 4)).unwrap()),
        ("z2", g_isometric_peps(2, Lattice::new(1, 3)).unwrap()),
        ("z3", g_isometric_peps(3, Lattice::new(1, 2)).unwrap()),
        ("aklt", aklt_mps().to_peps(5).unwrap()),
        ("gapped", gapped_random_mps().to_peps(5).unwrap()),
        ("isometric", isometric_mps(2, 3).unwrap().to_peps(5).unwrap()),
        ("random-peps", random_peps(2, 2, Lattice::new(2, 2), 5).unwrap()),
    ]
}

/// Regions whose physical space is small enough for a dense parent-Hamiltonian nullspace.
const NULLSPACE_DIM: u128 = 1 << 10;

fn criterion_1() -> Outcome {
    let mut regions = 0;
    let mut worst = (0.0f64, 0.0f64);
    let mut slowest = Duration::ZERO;
    for (name, model) in fixture_models() {
        for r in all_rects(&model.lattice) {
            // a region without internal edges has no parent-Hamiltonian terms to take a nullspace of
            if r.internal_edges().is_empty() || phys_dim(&model, &r) > NULLSPACE_DIM || boundary_dim(&model, &r) > BOUNDARY_CAP {
                continue;
            }
            let start = Instant::now();
            let iso = ok(isometry(&model, &r))?;
            let w = ok(ground_projector(&model, &r, GroundMethod::ViaIsometry))?;
            let p = ok(ground_projector(&model, &r, GroundMethod::Nullspace))?;
            let diff = ok(op_norm(&(&w.projector - &p.projector)))?;
            slowest = slowest.max(start.elapsed());
            ensure!(iso.isometry_residual <= 1e-10, "{name} {r:?}: ‖W†W − supp ρ‖ = {:e}", iso.isometry_residual);
            ensure!(diff <= 1e-9, "{name} {r:?}: ‖WW† − P‖ = {diff:e}");
            ensure!(start.elapsed() < Duration::from_secs(10), "{name} {r:?} took {:?}", start.elapsed());
            worst = (worst.0.max(iso.isometry_residual), worst.1.max(diff));
            regions += 1;
        }
    }
    ensure!(regions > 0, "no regions within caps");
    Ok(format!("{regions} regions, max ‖W†W − supp ρ‖ = {:.1e}, max ‖WW† − P‖ = {:.1e}, slowest {:.2?}", worst.0, worst.1, slowest))
}

fn criterion_2() -> Outcome {
    let injective = [
        ("gapped", gapped_random_mps().to_peps(5).unwrap(), Rect::new(0, 1, 1, 3)),
        ("aklt", aklt_mps().to_peps(4).unwrap(), Rect::new(0, 1, 1, 2)),
        ("isometric", isometric_mps(2, 3).unwrap().to_peps(5).unwrap(), Rect::new(0, 1, 1, 3)),
    ];
    let mut count = 0;
    let mut worst = 0.0f64;
    for (k, (name, model, r)) in injective.iter().enumerate() {
        let v = ok(v_matrix(model, r))?;
        let n = v.ncols();
        for s in 0..17u64 {
            let seed = 500 + 100 * k as u64 + s;
            let sigma = if s % 2 == 0 {
                random_pd(n, seed, 0.3)
            } else {
                &random_matrix(n, seed) + &linalg::scaled(&linalg::identity(n), 3.0)
            };
            let c = ok(lemma_main_check(&v, &sigma, Mode::Injective))?;
            ensure!(c.first <= 1e-9 && c.second <= 1e-9, "{name} seed {seed}: {c:?}");
            worst = worst.max(c.first).max(c.second);
            count += 1;
        }
    }
    let z2 = g_isometric_peps(2, Lattice::new(1, 3)).unwrap();
    let r = Rect::new(0, 1, 1, 1);
    let v = ok(v_matrix(&z2, &r))?;
    let n = v.ncols();
    let rho = linalg::hermitian_part(&(v.adjoint() * &v));
    let j = ok(linalg::support_projector(&rho, 1e-10))?;
    let q = &linalg::identity(n) - &j;
    for s in 0..5u64 {
        let a = random_pd(n, 900 + 2 * s, 0.5);
        let b = random_pd(n, 901 + 2 * s, 0.5);
        let sigma = &(&(&j * &a) * &j) + &(&(&q * &b) * &q);
        let c = ok(lemma_main_check(&v, &sigma, Mode::Mpo))?;
        ensure!(c.first <= 1e-9 && c.second <= 1e-9, "z2 seed {s}: {c:?}");
        worst = worst.max(c.first).max(c.second);
        count += 1;
    }
    ensure!(count >= 50, "only {count} σ");
    Ok(format!("{count} σ on 4 fixtures, max residual {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let mut certs: Vec<(String, PepsModel, AbcSplit, FactorizationCertificate)> = Vec::new();
    for (name, mps) in [("gapped", gapped_random_mps()), ("aklt", aklt_mps())] {
        let g = ok(mps.canonical_gauge())?;
        for n in 4..=8 {
            let peps = ok(g.mps.to_peps(n))?;
            // B needs two sites before ρ_∂B is invertible at D = 2, d ≥ 2
            for widths in [[1, n - 2, 1], [1, n - 3, 2]].into_iter().filter(|w| w[1] >= 2) {
                let s = chain_split(n, widths);
                let cert = product_certificate(&g, &peps, &s, Mode::Injective).map_err(|e| format!("{name} n={n} {widths:?}: {e:?}"))?;
                certs.push((format!("{name} product n={n} {widths:?}"), peps.clone(), s, cert));
            }
        }
    }
    let iso = ok(isometric_mps(2, 3))?.to_peps(5).unwrap();
    let s = chain_split(5, [1, 3, 1]);
    let iso_cert = ok(gibbs_certificate(&iso, &s, Mode::Injective))?;
    certs.push(("isometric gibbs".into(), iso.clone(), s, iso_cert));
    let z2 = g_isometric_peps(2, Lattice::new(1, 3)).unwrap();
    let s = chain_split(3, [1, 1, 1]);
    let z2_cert = ok(gibbs_certificate(&z2, &s, Mode::Mpo))?;
    certs.push(("z2 gibbs".into(), z2.clone(), s, z2_cert));
    for (seed, lattice) in [(2u64, Lattice::new(1, 3)), (8, Lattice::new(1, 3))] {
        let m = random_peps(16, 2, lattice, seed).unwrap();
        let s = AbcSplit::new(lattice, Rect::new(0, 0, 1, lattice.cols), [1, lattice.cols - 2, 1], 0, 0.0).unwrap();
        let cert = gibbs_certificate(&m, &s, Mode::Injective).map_err(|e| format!("random-peps seed {seed}: {e:?}"))?;
        certs.push((format!("random-peps gibbs seed {seed}"), m, s, cert));
    }

    let mut checked = 0;
    let mut min_slack = f64::INFINITY;
    for (name, model, split, cert) in &certs {
        if cert.epsilon > 1.0 {
            continue;
        }
        let rep = ok(verify_main_theorem(model, split, cert))?;
        ensure!(rep.pass == Some(true), "{name}: ‖P_AB P_BC − P_ABC‖ = {:e} > 8ε + 1e-8 = {:e}", rep.martingale.norm, rep.bound);
        min_slack = min_slack.min(rep.slack);
        checked += 1;
        if name.starts_with("isometric") || name.starts_with("z2") {
            ensure!(cert.epsilon <= 1e-10 && rep.martingale.norm <= 1e-10, "{name}: ε = {:e}, norm = {:e}", cert.epsilon, rep.martingale.norm);
        }
    }
    ensure!(checked >= 3, "only {checked} certificates with ε ≤ 1");
    Ok(format!("{} certificates, all {checked} with ε ≤ 1 within the bound, min slack {min_slack:.2e}; isometric and Z2 exact", certs.len()))
}

fn criterion_4() -> Outcome {
    let mps = aklt_mps();
    let gamma = ok(mps.transfer_spectrum())?.gamma;
    // T = (1/3)(1 ⊕ −1 ⊕ −1 ⊕ −1) in the Pauli basis, so every subleading eigenvalue has modulus 1/3
    ensure!((gamma - 1.0 / 3.0).abs() < 1e-12, "transfer gap γ = {gamma}");
    let g = ok(mps.canonical_gauge())?;
    let lengths: Vec<usize> = (2..=10).collect();
    let pts = ok(mps_convergence(&g, &lengths))?;
    let series: Vec<(f64, f64)> = pts.iter().map(|p| (p.m as f64, p.trace_distance)).collect();
    let rate = match ok(decay_fit(&series, DecayModel::Exponential))? {
        DecayFit::Fitted { rate, .. } => rate,
        DecayFit::Exact => return Err("trace distances vanish".into()),
    };
    let ratio = (-1.0 / rate).exp();
    ensure!((ratio / gamma - 1.0).abs() <= 0.05, "fitted ratio {ratio} vs γ = {gamma}");
    let cs: Vec<f64> = pts.iter().map(|p| p.constant).collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let spread = cs.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0, f64::max);
    ensure!(spread <= 0.2, "ε σ_min / γ^m varies by {spread:.3} around {mean}: {cs:?}");
    Ok(format!("fitted ratio {ratio:.6} vs γ = {gamma:.6}; c = {mean:.4} ± {:.1}%", 100.0 * spread))
}

fn criterion_5() -> Outcome {
    let mut violations = 0;
    let mut pairs = 0;
    for k in 0..200u64 {
        let n = 1 + (k % 24) as usize;
        let rank = 1 + (k as usize * 7) % n;
        let x = if k % 3 == 0 { random_pd(n, 3000 + k, 0.01 * (k % 5) as f64) } else { random_psd(n, rank, 3000 + k) };
        let y = random_pd(n, 7000 + k, 0.02 + 0.5 * (k % 4) as f64);
        let (lhs, rhs) = ok(comparing_norms_check(&x, &y))?;
        if lhs > rhs * (1.0 + 1e-10) + 1e-12 {
            violations += 1;
        }
        pairs += 1;
    }
    ensure!(violations == 0, "{violations} violations in {pairs} pairs");
    Ok(format!("{pairs} pairs, 0 violations"))
}

fn criterion_6() -> Outcome {
    // commuting: A(t) = (1 + t + t²) H has OExp = e^{(11/6) H}
    let h = random_hermitian(5, 0.9, 41);
    let hh = h.clone();
    let path = OperatorPath::new(5, 3.0 * 0.9, move |t| linalg::scaled(&hh, 1.0 + t + t * t));
    let e = ok(expansional(&path, 1e-12))?;
    let item1 = max_abs(&(&e.value - &linalg::expm(&linalg::scaled(&h, 11.0 / 6.0))));
    ensure!(item1 <= 1e-10, "commuting path: residual {item1:e}");

    let mut worst = f64::NEG_INFINITY;
    for k in 0..100u64 {
        let dim = 2 + (k % 4) as usize;
        let nodes = 2 + (k % 3) as usize;
        let ms: Vec<Mat<c64>> = (0..nodes)
            .map(|j| {
                let g = random_matrix(dim, 10_000 + 10 * k + j as u64);
                let s = op_norm(&g).unwrap();
                linalg::scaled(&g, (0.2 + 0.3 * (k % 5) as f64) / s)
            })
            .collect();
        let p = ok(OperatorPath::piecewise_linear(ms))?;
        let (got, bound) = ok(expansional_norm_check(&p, 1e-11))?;
        ensure!(got <= bound + 1e-10, "path {k}: ‖OExp − 𝟙‖ = {got} > {bound}");
        worst = worst.max(got - bound);
    }

    let mut item3 = 0.0f64;
    for n in 1..=4 {
        for seed in 0..3u64 {
            let ops: Vec<Mat<c64>> = (0..n).map(|k| &random_matrix(4, 60 + 10 * seed + k as u64) * &linalg::scaled(&linalg::identity(4), 0.3)).collect();
            let p = ok(iterated_path(&ops))?;
            let e = ok(expansional(&p, 1e-11))?;
            let mut prod = linalg::identity(4);
            for o in &ops {
                prod = &prod * &linalg::expm(o);
            }
            let r = max_abs(&(&e.value - &prod));
            ensure!(r <= 1e-8, "n = {n}, seed {seed}: iterated residual {r:e}");
            item3 = item3.max(r);
        }
    }
    Ok(format!("commuting residual {item1:.1e}; 100 paths within the norm bound (max excess {worst:.2e}); product identity {item3:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    let cases: Vec<(String, ChainHamiltonian, f64)> = vec![
        ("TFIM n=8".into(), ChainHamiltonian::transverse_ising(8, 1.5, 1.2, 0.3), 0.5),
        ("TFIM n=10".into(), ChainHamiltonian::transverse_ising(10, 1.5, 1.2, 0.3), 0.45),
        ("random n=9".into(), ok(ChainHamiltonian::random_local(9, 2, 2, 1.2, 3))?, 0.5),
        ("random n=11".into(), ok(ChainHamiltonian::random_local(11, 2, 2, 1.1, 4))?, 0.5),
    ];
    let mut points = 0;
    for (name, h, t) in &cases {
        ensure!(h.range() <= 2 && *t <= 0.5, "{name}: outside the tested family");
        let len = h.len();
        let center = len / 2;
        let max_ell = (len - 1 - center).min(center);
        let ells: Vec<usize> = (1..=max_ell).collect();
        let f = ok(SiteOperator::new(vec![center], vec![2], pauli_x()))?;
        let pts = ok(araki_residual(*t, h, &f, center, 0, &ells, LOG_VALIDITY_CONSTANT))?;
        for p in &pts {
            ensure!(p.in_regime, "{name}: τ = {} not in the validity regime", p.tau);
            ensure!(p.pass == Some(true), "{name} ℓ = {}: measured {:e} > bound {:e}", p.ell, p.measured, p.bound);
            points += 1;
        }
        for w in pts.windows(2) {
            ensure!(w[1].measured < w[0].measured, "{name}: residual grows at ℓ = {}", w[1].ell);
        }
        let curv = ok(log_residual_curvature(&pts))?;
        ensure!(curv < 0.0, "{name}: log-residual curvature {curv}");
        lines.push(format!("{name} τ={:.2} curvature {curv:.3}", pts[0].tau));
    }
    Ok(format!("{points} (chain, ℓ) points within bound; {}", lines.join(", ")))
}

fn homogeneous(layout: &BoundaryLayout, jz: f64, hx: f64, hz: f64) -> GibbsFactors {
    let n = layout.site_dims.len();
    let on = |sites: &[usize]| {
        let mut terms = Vec::new();
        for (k, &s) in sites.iter().enumerate() {
            let single = &linalg::scaled(&pauli_x(), hx) + &linalg::scaled(&pauli_z(), hz);
            terms.push(SiteOperator::new(vec![s], vec![2], single).unwrap());
            if k + 1 < sites.len() {
                let zz = linalg::scaled(&linalg::kron(&pauli_z(), &pauli_z()), jz);
                terms.push(SiteOperator::new(vec![s, sites[k + 1]], vec![2, 2], zz).unwrap());
            }
        }
        ChainHamiltonian::new(vec![2; n], terms).unwrap()
    };
    GibbsFactors { q: on(layout.region(Part::Abc)), r: on(layout.region(Part::Ab)), s: on(layout.region(Part::Bc)), t: on(layout.region(Part::B)) }
}

/// Independent random two-local terms on each boundary.
fn inhomogeneous(layout: &BoundaryLayout, seed: u64) -> GibbsFactors {
    let n = layout.site_dims.len();
    let on = |sites: &[usize], seed: u64| {
        let mut terms = Vec::new();
        for (k, &s) in sites.iter().enumerate() {
            terms.push(SiteOperator::new(vec![s], vec![2], random_hermitian(2, 0.3, seed + 2 * k as u64)).unwrap());
            if k + 1 < sites.len() {
                terms.push(SiteOperator::new(vec![s, sites[k + 1]], vec![2, 2], random_hermitian(4, 0.4, seed + 2 * k as u64 + 1)).unwrap());
            }
        }
        ChainHamiltonian::new(vec![2; n], terms).unwrap()
    };
    GibbsFactors {
        q: on(layout.region(Part::Abc), seed),
        r: on(layout.region(Part::Ab), seed + 100),
        s: on(layout.region(Part::Bc), seed + 200),
        t: on(layout.region(Part::B), seed + 300),
    }
}

fn pieces(x: usize, y: usize) -> ChainPieces {
    ChainPieces { a_only: 1, ad: 0, x, y, bc: 0, b_only: 1, c_only: 1, d_only: 1 }
}

fn criterion_8() -> Outcome {
    let mut chains = 0;
    let mut worst_identity = 0.0f64;
    let mut tested: Vec<(String, BoundaryLayout, GibbsFactors, bool)> = Vec::new();
    for (x, y) in [(1, 1), (1, 2), (2, 2), (1, 3)] {
        let layout = BoundaryLayout::chain(pieces(x, y), 2);
        for (jz, hx, hz) in [(0.5, 0.4, 0.2), (0.5, 0.5, 0.5)] {
            tested.push((format!("homogeneous x={x} y={y} ({jz},{hx},{hz})"), layout.clone(), homogeneous(&layout, jz, hx, hz), true));
        }
        tested.push((format!("random x={x} y={y}"), layout.clone(), inhomogeneous(&layout, 40 + 10 * (x + y) as u64), true));
        for (jz, hx, hz) in [(1.0, 0.7, 0.0), (0.3, 1.1, 0.5)] {
            let asserted = x + y == 2 && hx < 1.0;
            tested.push((format!("strong x={x} y={y} ({jz},{hx},{hz})"), layout.clone(), homogeneous(&layout, jz, hx, hz), asserted));
        }
    }
    // the two sides differ by reordering factors of norm up to e^{‖R‖}, so the
    // double-precision floor of the residual grows like e^{4‖R‖}; chains with
    // ‖R‖ ≳ 5 are reported, not held to 1e-9
    let mut floor = 0.0f64;
    for (name, layout, f, asserted) in &tested {
        let labels = Labels::from_layout(layout);
        let o = ok(ol_or(f, &labels))?;
        if *asserted {
            ensure!(o.identity_residual <= 1e-9, "{name}: O_L O_R identity residual {:e}", o.identity_residual);
            worst_identity = worst_identity.max(o.identity_residual);
        } else {
            floor = floor.max(o.identity_residual);
        }
        let x = ok(x_terms(f, &labels, 16, 1e-10))?;
        ensure!(x.ol_minus_one <= x.ol_bound, "{name}: ‖O_L − 𝟙‖ = {} > {}", x.ol_minus_one, x.ol_bound);
        chains += 1;
    }
    let mut worst_commuting = 0.0f64;
    for (x, y) in [(1, 1), (2, 2)] {
        let layout = BoundaryLayout::chain(pieces(x, y), 2);
        let labels = Labels::from_layout(&layout);
        for (jz, hz) in [(0.4, 0.3), (1.2, 0.0)] {
            let x = ok(x_terms(&homogeneous(&layout, jz, 0.0, hz), &labels, 8, 1e-10))?;
            ensure!(x.epsilon <= 1e-10, "commuting ({jz},{hz}): ε = {:e}", x.epsilon);
            worst_commuting = worst_commuting.max(x.epsilon);
        }
    }
    Ok(format!(
        "{chains} chains within exp(Σ‖X‖) − 1; identity residual ≤ {worst_identity:.1e} (strong-field floor {floor:.1e}, reported); commuting ε ≤ {worst_commuting:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let g = ok(gapped_random_mps().canonical_gauge())?;
    let mut series = Vec::new();
    for lb in 1..=5 {
        let n = lb + 2;
        let r = ok(martingale_norm(&g.mps.to_peps(n).unwrap(), &chain_split(n, [1, lb, 1]), Method::MatrixFree))?;
        series.push(r.norm);
    }
    ensure!(strictly_decreasing(&series), "not decreasing: {series:?}");
    let pts: Vec<(f64, f64)> = series.iter().enumerate().map(|(k, &v)| ((k + 1) as f64, v)).collect();
    let res = match ok(decay_fit(&pts, DecayModel::Exponential))? {
        DecayFit::Fitted { max_relative_residual, .. } => max_relative_residual,
        DecayFit::Exact => return Err("gapped series vanishes".into()),
    };
    ensure!(res < 0.1, "exponential fit residual {res}: {series:?}");
    let product = product_peps(2, Lattice::new(2, 4)).unwrap();
    let mut zero = 0.0f64;
    for widths in [[1, 1, 1], [1, 2, 1]] {
        let len: usize = widths.iter().sum();
        let s = AbcSplit::new(Lattice::new(2, 4), Rect::new(0, 0, 2, len), widths, 0, 0.0).unwrap();
        for method in [Method::Dense, Method::MatrixFree] {
            zero = zero.max(ok(martingale_norm(&product, &s, method))?.norm);
        }
    }
    ensure!(zero <= 1e-12, "product martingale norm {zero:e}");
    let shown: Vec<String> = series.iter().map(|v| format!("{v:.3e}")).collect();
    Ok(format!("ℓ_B=1..5: [{}], fit residual {:.1}%; product max {zero:.1e}", shown.join(", "), 100.0 * res))
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    for (n, cols) in [(2, 2), (2, 3), (3, 2)] {
        let m = g_isometric_peps(n, Lattice::new(1, cols)).unwrap();
        for c in 0..cols - 1 {
            let r = ok(pulling_through_check(&m, &Rect::new(0, c as i64, 1, 1), &Rect::new(0, c as i64 + 1, 1, 1)))?;
            ensure!(r <= 1e-9, "Z{n} 1x{cols} at column {c}: residual {r:e}");
            worst = worst.max(r);
        }
    }
    let mut compared = 0;
    let mut diff = 0.0f64;
    for (mps, n) in [(gapped_random_mps(), 5), (aklt_mps(), 6)] {
        let g = ok(mps.canonical_gauge())?;
        let peps = ok(g.mps.to_peps(n))?;
        let s = chain_split(n, [1, n - 2, 1]);
        let a = ok(product_certificate(&g, &peps, &s, Mode::Mpo))?;
        let b = ok(product_certificate(&g, &peps, &s, Mode::Injective))?;
        for (x, y) in a.qf1.iter().chain([&a.qf2, &a.epsilon]).zip(b.qf1.iter().chain([&b.qf2, &b.epsilon])) {
            diff = diff.max((x - y).abs() / y.abs().max(1e-300));
        }
        compared += 1;
    }
    ensure!(diff <= 1e-12, "MPO and injective epsilons differ by {diff:e}");
    Ok(format!("pulling-through residual ≤ {worst:.1e} on Z2, Z3; MPO = injective ε on {compared} full-support certificates (rel. diff {diff:.1e})"))
}

fn criterion_11() -> Outcome {
    let mut splits: Vec<(String, PepsModel, AbcSplit)> = Vec::new();
    for (name, mps) in [("gapped", gapped_random_mps()), ("aklt", aklt_mps())] {
        for n in 3..=7 {
            for widths in [[1, n - 2, 1], [2, n - 3, 1], [1, 1, n - 2]] {
                if widths.contains(&0) {
                    continue;
                }
                splits.push((format!("{name} {widths:?}"), mps.to_peps(n + 1).unwrap(), chain_split_at(n + 1, 1, widths)));
            }
        }
    }
    for (lattice, seed) in [(Lattice::new(2, 3), 5u64), (Lattice::new(2, 4), 6)] {
        let m = random_peps(2, 2, lattice, seed).unwrap();
        splits.push((format!("random-peps {lattice:?}"), m, AbcSplit::new(lattice, Rect::new(0, 0, 2, 3), [1, 1, 1], 0, 0.0).unwrap()));
    }
    let mut compared = 0;
    let mut worst = 0.0f64;
    for (name, model, s) in &splits {
        let dense = match martingale_norm(model, s, Method::Dense) {
            Ok(r) => r.norm,
            Err(pepsbound::Error::CapExceeded { .. }) => continue,
            Err(e) => return Err(format!("{name}: {e}")),
        };
        let mf = ok(martingale_norm(model, s, Method::MatrixFree))?.norm;
        ensure!((dense - mf).abs() <= 1e-7, "{name}: dense {dense} vs matrix-free {mf}");
        worst = worst.max((dense - mf).abs());
        compared += 1;
    }
    ensure!(compared >= 10, "only {compared} dense-capable splits");

    let mps = ok(random_injective_mps(2, 2, 11))?;
    let n = 13;
    let peps = ok(mps.to_peps(n))?;
    let s = chain_split(n, [3, 7, 3]);
    ensure!(
        matches!(martingale_norm(&peps, &s, Method::Dense), Err(pepsbound::Error::CapExceeded { .. })),
        "dense method accepted a split over the cap"
    );
    let start = Instant::now();
    let r = ok(martingale_norm(&peps, &s, Method::MatrixFree))?;
    let took = start.elapsed();
    ensure!(r.physical_dim >= 4 * DENSE_MARTINGALE_CAP, "physical dimension {} is not 4× the cap", r.physical_dim);
    ensure!(took < Duration::from_secs(60), "matrix-free run took {took:?}");
    ensure!(r.norm.is_finite() && r.norm <= 1.0 + 1e-9, "norm {}", r.norm);
    Ok(format!(
        "{compared} splits, max |dense − mf| = {worst:.1e}; d^|ABC| = {} ({}× cap) in {took:.2?}, norm {:.3e}",
        r.physical_dim,
        r.physical_dim / DENSE_MARTINGALE_CAP,
        r.norm
    ))
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 isometry and ground projector", criterion_1),
        ("2 P̃ lemma equalities", criterion_2),
        ("3 martingale ≤ 8ε", criterion_3),
        ("4 MPS boundary convergence", criterion_4),
        ("5 comparing norms", criterion_5),
        ("6 expansional properties", criterion_6),
        ("7 Araki locality", criterion_7),
        ("8 strict-locality pipeline", criterion_8),
        ("9 martingale decay", criterion_9),
        ("10 pulling through and MPO mode", criterion_10),
        ("11 matrix-free martingale", criterion_11),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({t:.1?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({t:.1?}): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
