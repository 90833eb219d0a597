use faer::Mat;
use pepsbound::lattice::{Edge, Lattice, Rect};
use pepsbound::linalg::{self, c64, cx, max_abs, op_norm};
use pepsbound::parent::*;
use pepsbound::peps::boundary::v_matrix;
use pepsbound::peps::fixtures::*;

fn rank_one(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

#[test]
fn product_edge_projector_has_corank_one() {
    let m = product_peps(3, Lattice::new(1, 2)).unwrap();
    let h = edge_projector(&m, &Edge::horizontal(0, 0)).unwrap();
    assert!(max_abs(&(&(&h * &h) - &h)) < 1e-12);
    let tr = linalg::trace(&h).re;
    assert!((tr - 8.0).abs() < 1e-10);
}

#[test]
fn edge_projector_annihilates_the_pair_image() {
    let m = random_injective_mps(2, 3, 11).unwrap().to_peps(2).unwrap();
    let h = edge_projector(&m, &Edge::horizontal(0, 0)).unwrap();
    let v = v_matrix(&m, &Rect::new(0, 0, 1, 2)).unwrap();
    assert!(max_abs(&(&h * &v)) < 1e-11 * op_norm(&v).unwrap());
    assert!(max_abs(&(&(&h * &h) - &h)) < 1e-12);
}

#[test]
fn single_and_disjoint_edges() {
    let m = product_peps(2, Lattice::new(1, 4)).unwrap();
    let one = parent_hamiltonian(&m, &Rect::new(0, 0, 1, 2)).unwrap();
    let g = gap_of_dense(&one.dense().unwrap()).unwrap();
    assert!((g.gap - 1.0).abs() < 1e-12);
    let h = one.terms[0].op.clone();
    let two = ProjectorHamiltonian::new(
        vec![2; 4],
        vec![Term { edge: None, sites: vec![0, 1], op: h.clone() }, Term { edge: None, sites: vec![2, 3], op: h }],
    )
    .unwrap();
    let sp = linalg::hermitian_spectral(&two.dense().unwrap()).unwrap();
    let count = |x: f64| sp.values.iter().filter(|&&v| (v - x).abs() < 1e-10).count();
    assert_eq!((count(0.0), count(1.0), count(2.0)), (1, 6, 9));
}

#[test]
fn chain_hamiltonian_annihilates_the_chain() {
    let m = random_injective_mps(2, 3, 2).unwrap().to_peps(4).unwrap();
    let r = Rect::new(0, 0, 1, 4);
    let h = parent_hamiltonian(&m, &r).unwrap().dense().unwrap();
    let v = v_matrix(&m, &r).unwrap();
    assert!(max_abs(&(&h * &v)) < 1e-10 * op_norm(&v).unwrap());
    let e0 = linalg::hermitian_spectral(&h).unwrap().values[0];
    assert!(e0.abs() <= 1e-9);
}

#[test]
fn ground_projector_methods_agree() {
    let chain = random_injective_mps(2, 3, 5).unwrap().to_peps(4).unwrap();
    let prod = product_peps(2, Lattice::new(2, 2)).unwrap();
    for (m, r, rank) in [(&chain, Rect::new(0, 0, 1, 4), 4), (&prod, Rect::new(0, 0, 2, 2), 1)] {
        let a = ground_projector(m, &r, GroundMethod::Nullspace).unwrap();
        let b = ground_projector(m, &r, GroundMethod::ViaIsometry).unwrap();
        assert_eq!(a.rank, rank);
        assert_eq!(b.rank, rank);
        assert!(!a.exceeds_image);
        assert!(op_norm(&(&a.projector - &b.projector)).unwrap() <= 1e-9);
        assert!(max_abs(&(&(&a.projector * &a.projector) - &a.projector)) < 1e-10);
    }
}

#[test]
fn ground_spaces_are_nested() {
    let m = random_injective_mps(2, 3, 8).unwrap().to_peps(5).unwrap();
    let big = ground_projector(&m, &Rect::new(0, 0, 1, 5), GroundMethod::ViaIsometry).unwrap().projector;
    let small = ground_projector(&m, &Rect::new(0, 1, 1, 3), GroundMethod::ViaIsometry).unwrap().projector;
    let small = linalg::embed(&small, &[3, 3, 3], &[1, 2, 3], &[3; 5]).unwrap();
    assert!(max_abs(&(&(&small * &big) - &big)) < 1e-10);
    assert!(max_abs(&(&(&big * &small) - &big)) < 1e-10);
}

#[test]
fn gap_of_two_rank_one_projectors() {
    for theta in [0.3f64, 0.7, 1.1] {
        let u = [cx(1.0, 0.0), cx(0.0, 0.0)];
        let v = [cx(theta.cos(), 0.0), cx(0.0, theta.sin())];
        let ham = ProjectorHamiltonian::new(
            vec![2],
            vec![Term { edge: None, sites: vec![0], op: rank_one(&u) }, Term { edge: None, sites: vec![0], op: rank_one(&v) }],
        )
        .unwrap();
        // eigenvalues 1 ± cos θ
        let g = gap_of_dense(&ham.dense().unwrap()).unwrap();
        assert!((g.gap - 2.0 * theta.cos()).abs() < 1e-12);
        assert!((g.ground_energy - (1.0 - theta.cos())).abs() < 1e-12);
    }
}

#[test]
fn random_chain_gap_is_stable_in_length() {
    let mps = gapped_random_mps();
    let mut gaps = Vec::new();
    for len in 4..=8 {
        let m = mps.to_peps(len).unwrap();
        let g = spectral_gap(&m, &Rect::new(0, 0, 1, len), 729, 1e-8).unwrap();
        assert!(g.ground_energy.abs() <= 1e-9);
        gaps.push(g.gap);
    }
    let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.15, "{gaps:?}");
    assert!((hi - lo) / hi < 0.2, "{gaps:?}");
}

#[test]
fn iterative_gap_matches_dense() {
    let m = random_injective_mps(2, 3, 3).unwrap().to_peps(6).unwrap();
    let r = Rect::new(0, 0, 1, 6);
    let dense = spectral_gap(&m, &r, usize::MAX, 1e-10).unwrap();
    let iter = spectral_gap(&m, &r, 1, 1e-10).unwrap();
    assert!(iter.iterative && !dense.iterative);
    assert!((dense.gap - iter.gap).abs() < 1e-6, "{} {}", dense.gap, iter.gap);
}

#[test]
fn fixtures_are_frustration_free() {
    let chain = random_injective_mps(2, 3, 1).unwrap().to_peps(4).unwrap();
    let z2 = g_isometric_peps(2, Lattice::new(1, 2)).unwrap();
    for (m, r) in [(&chain, Rect::new(0, 0, 1, 4)), (&z2, Rect::new(0, 0, 1, 2))] {
        let ham = parent_hamiltonian(m, &r).unwrap();
        let p = ground_projector(m, &r, GroundMethod::ViaIsometry).unwrap().projector;
        assert!(frustration_check(&ham, &p).unwrap() <= 1e-9);
    }
}

#[test]
fn frustrated_pair_is_detected() {
    let u = [cx(1.0, 0.0), cx(0.0, 0.0)];
    let w = [cx(0.0, 0.0), cx(1.0, 0.0)];
    let ham = ProjectorHamiltonian::new(
        vec![2],
        vec![Term { edge: None, sites: vec![0], op: rank_one(&u) }, Term { edge: None, sites: vec![0], op: rank_one(&w) }],
    )
    .unwrap();
    let (p, rank) = kernel_projector(&ham.dense().unwrap()).unwrap();
    assert_eq!(rank, 0);
    let lowest = Mat::from_fn(2, 2, |i, j| if i == j && i == 0 { cx(1.0, 0.0) } else { cx(0.0, 0.0) });
    assert!(frustration_check(&ham, &lowest).unwrap() > 0.5);
    assert_eq!(p.nrows(), 2);
}

#[test]
fn z2_terms_commute() {
    let z2 = g_isometric_peps(2, Lattice::new(2, 2)).unwrap();
    let h = edge_projector(&z2, &Edge::horizontal(0, 0)).unwrap();
    let v = edge_projector(&z2, &Edge::vertical(0, 0)).unwrap();
    let ham = ProjectorHamiltonian::new(
        vec![16; 3],
        vec![Term { edge: None, sites: vec![0, 1], op: h }, Term { edge: None, sites: vec![0, 2], op: v }],
    )
    .unwrap();
    assert!(ham.max_commutator().unwrap() <= 1e-10);
}

#[test]
fn product_state_has_no_connected_correlations() {
    let psi = product_mps(2).ring_state(6);
    let z = Mat::from_fn(2, 2, |i, j| if i == j { cx(if i == 0 { 1.0 } else { -1.0 }, 0.0) } else { cx(0.0, 0.0) });
    for p in correlation_decay(&psi, &[2; 6], &z, &z, 0, 5, 0.5).unwrap() {
        assert!(p.measured < 1e-14);
    }
}

#[test]
fn chain_correlations_decay() {
    let mps = random_injective_mps(2, 2, 4).unwrap();
    let gamma = mps.transfer_spectrum().unwrap().gamma;
    let psi = mps.ring_state(12);
    let f = Mat::from_fn(2, 2, |i, j| if i == j { cx(if i == 0 { 1.0 } else { -1.0 }, 0.0) } else { cx(0.0, 0.0) });
    let pts = correlation_decay(&psi, &[2; 12], &f, &f, 0, 6, gamma).unwrap();
    assert_eq!(pts.len(), 6);
    assert!(pts[5].measured < pts[0].measured, "{pts:?}");
    // least-squares slope of ln|C(r)| against r
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.distance as f64, b + p.measured.ln()));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = pts.iter().map(|p| (p.distance as f64 - mx) * (p.measured.ln() - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.distance as f64 - mx).powi(2)).sum();
    let fitted = (num / den).exp();
    assert!(fitted > 0.0 && fitted < 1.0, "{fitted}");
}
