use pepsbound::lattice::{Lattice, Rect};
use pepsbound::linalg::{self, c64, max_abs, op_norm};
use pepsbound::peps::boundary::{boundary_state, boundary_state_dense, isometry, pulling_through_residual, v_map};
use pepsbound::peps::fixtures::*;
use pepsbound::peps::Mps;
use faer::Mat;

fn conj(m: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

#[test]
fn product_state_boundary_is_rank_one() {
    let m = product_peps(3, Lattice::new(3, 3)).unwrap();
    let bs = boundary_state(&m, &Rect::new(0, 0, 2, 2)).unwrap();
    assert_eq!(bs.dim(), 1);
    assert!((bs.rho[(0, 0)].re - 1.0).abs() < 1e-12);
    let iso = isometry(&m, &Rect::new(0, 0, 2, 2)).unwrap();
    assert!(iso.isometry_residual < 1e-14);
}

#[test]
fn sweep_matches_dense_on_random_peps() {
    let m = random_peps(2, 2, Lattice::new(3, 3), 7).unwrap();
    for r in [Rect::new(0, 0, 1, 1), Rect::new(0, 0, 2, 2), Rect::new(1, 0, 1, 3), Rect::new(0, 1, 3, 1), Rect::new(0, 0, 2, 3)] {
        let a = boundary_state(&m, &r).unwrap();
        let b = boundary_state_dense(&m, &r).unwrap();
        let scale = op_norm(&b.rho).unwrap();
        assert!(max_abs(&(&a.rho - &b.rho)) <= 1e-12 * scale, "{r:?}");
    }
}

#[test]
fn boundary_state_is_positive_and_hermitian() {
    let m = random_peps(2, 2, Lattice::new(2, 3), 3).unwrap();
    let bs = boundary_state(&m, &Rect::new(0, 0, 2, 3)).unwrap();
    let sp = linalg::hermitian_spectral(&bs.rho).unwrap();
    assert!(sp.check_psd().is_ok());
}

#[test]
fn isometry_of_random_regions() {
    let m = random_peps(4, 2, Lattice::new(2, 2), 5).unwrap();
    for r in [Rect::new(0, 0, 1, 1), Rect::new(0, 0, 1, 2), Rect::new(0, 0, 2, 2)] {
        let iso = isometry(&m, &r).unwrap();
        assert!(iso.isometry_residual <= 1e-10, "{r:?}: {}", iso.isometry_residual);
    }
    // four sites of dimension 4 against eight legs of dimension 2: not injective
    let iso = isometry(&m, &Rect::new(0, 0, 1, 1)).unwrap();
    assert!(!iso.injective);
}

#[test]
fn z2_single_site_boundary_is_a_projector() {
    let m = g_isometric_peps(2, Lattice::new(2, 3)).unwrap();
    for r in [Rect::new(0, 0, 1, 1), Rect::new(0, 0, 1, 2), Rect::new(0, 0, 1, 3)] {
        let bs = boundary_state(&m, &r).unwrap();
        let sq = &bs.rho * &bs.rho;
        assert!(max_abs(&(&sq - &bs.rho)) < 1e-12, "{r:?}");
        assert_eq!(bs.rank().unwrap(), bs.dim() / 2);
    }
}

#[test]
fn z2_loop_region_scales_projector() {
    let m = g_isometric_peps(2, Lattice::new(2, 2)).unwrap();
    let bs = boundary_state(&m, &Rect::new(0, 0, 2, 2)).unwrap();
    // one closed loop of bonds: ρ = 2 J
    let half = linalg::scaled(&bs.rho, 0.5);
    assert!(max_abs(&(&(&half * &half) - &half)) < 1e-12);
}

#[test]
fn pulling_through_for_cyclic_groups() {
    let z2 = g_isometric_peps(2, Lattice::new(2, 3)).unwrap();
    let r = pulling_through_residual(&z2, &Rect::new(0, 0, 1, 1), &Rect::new(0, 1, 1, 1)).unwrap();
    assert!(r <= 1e-9, "{r}");
    let r = pulling_through_residual(&z2, &Rect::new(0, 0, 1, 1), &Rect::new(1, 0, 1, 1)).unwrap();
    assert!(r <= 1e-9, "{r}");
    let r = pulling_through_residual(&z2, &Rect::new(0, 0, 1, 2), &Rect::new(0, 2, 1, 1)).unwrap();
    assert!(r <= 1e-9, "{r}");
    let z3 = g_isometric_peps(3, Lattice::new(1, 2)).unwrap();
    let r = pulling_through_residual(&z3, &Rect::new(0, 0, 1, 1), &Rect::new(0, 1, 1, 1)).unwrap();
    assert!(r <= 1e-9, "{r}");
}

#[test]
fn pulling_through_is_trivial_for_injective_chain() {
    let m = random_injective_mps(2, 3, 1).unwrap().to_peps(5).unwrap();
    let r = pulling_through_residual(&m, &Rect::new(0, 0, 1, 2), &Rect::new(0, 2, 1, 2)).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn chain_boundary_state_is_conjugate_of_choi_form() {
    let mps = random_injective_mps(2, 3, 9).unwrap();
    for len in 1..5 {
        let peps = mps.to_peps(len).unwrap();
        let bs = boundary_state(&peps, &Rect::new(0, 0, 1, len)).unwrap();
        let choi = mps.boundary_state_choi(len);
        assert!(max_abs(&(&conj(&bs.rho) - &choi)) < 1e-12);
    }
}

#[test]
fn aklt_transfer_data() {
    let sp = aklt_mps().transfer_spectrum().unwrap();
    assert!((sp.lambda - 1.0).abs() < 1e-12);
    assert!((sp.gamma - 1.0 / 3.0).abs() < 1e-12);
    let half = linalg::scaled(&linalg::identity(2), 0.5);
    assert!(max_abs(&(&sp.right_fixed - &half)) < 1e-12);
}

#[test]
fn aklt_trace_norm_contracts_at_gamma() {
    let mps = aklt_mps();
    let sp = mps.transfer_spectrum().unwrap();
    let target = linalg::kron(&conj(&sp.right_fixed), &linalg::identity(2));
    let dists: Vec<f64> = (2..=10)
        .map(|m| linalg::trace_norm(&(&mps.boundary_state_choi(m) - &target)).unwrap())
        .collect();
    for w in dists.windows(2) {
        assert!((w[1] / w[0] - 1.0 / 3.0).abs() < 1e-6);
    }
}

#[test]
fn canonical_gauge_is_unital() {
    let mps = random_injective_mps(3, 2, 4).unwrap();
    let g = mps.canonical_gauge().unwrap();
    let id = linalg::identity(3);
    assert!(max_abs(&(&g.mps.apply_transfer_adjoint(&id) - &id)) < 1e-10);
    assert!((linalg::trace(&g.sigma).re - 1.0).abs() < 1e-12);
    let e_sigma = g.mps.apply_transfer(&g.sigma);
    assert!(max_abs(&(&e_sigma - &g.sigma)) < 1e-10);
}

#[test]
fn canonical_mps_is_left_alone() {
    let a = aklt_mps();
    let g = a.canonical_gauge().unwrap();
    assert!((g.lambda - 1.0).abs() < 1e-12);
    for (x, y) in a.matrices.iter().zip(&g.mps.matrices) {
        assert!(max_abs(&(x - y)) < 1e-10);
    }
}

#[test]
fn non_primitive_transfer_is_rejected() {
    let z = c64::new(0.0, 0.0);
    let o = c64::new(1.0, 0.0);
    // the swap |0⟩⟨1| + |1⟩⟨0| has a period-two transfer operator
    let t = Mat::from_fn(2, 2, |i, j| if i != j { o } else { z });
    let mps = Mps::new(vec![t]).unwrap();
    assert!(mps.transfer_spectrum().is_err());
}

#[test]
fn blocking_preserves_boundary_state() {
    let mps = random_injective_mps(2, 2, 6).unwrap();
    let a = boundary_state(&mps.to_peps(4).unwrap(), &Rect::new(0, 0, 1, 4)).unwrap();
    let b = boundary_state(&mps.blocked(2).unwrap().to_peps(2).unwrap(), &Rect::new(0, 0, 1, 2)).unwrap();
    assert!(max_abs(&(&a.rho - &b.rho)) < 1e-12);
    let peps = random_peps(2, 2, Lattice::new(2, 2), 8).unwrap();
    let big = boundary_state(&peps, &Rect::new(0, 0, 2, 2)).unwrap();
    let blocked = peps.blocked(2, 2).unwrap();
    let small = boundary_state(&blocked, &Rect::new(0, 0, 1, 1)).unwrap();
    let ea = linalg::hermitian_spectral(&big.rho).unwrap().values;
    let eb = linalg::hermitian_spectral(&small.rho).unwrap().values;
    for (x, y) in ea.iter().zip(&eb) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn v_map_respects_caps() {
    let m = g_isometric_peps(2, Lattice::new(2, 2)).unwrap();
    assert!(matches!(
        v_map(&m, &Rect::new(0, 0, 2, 2), pepsbound::peps::dense_cap()),
        Err(pepsbound::Error::CapExceeded { .. })
    ));
}

#[test]
fn ring_state_of_product_chain() {
    let p = product_mps(2);
    let psi = p.ring_state(3);
    assert!((linalg::norm2(&psi) - 1.0).abs() < 1e-12);
}
