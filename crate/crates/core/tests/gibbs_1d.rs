use faer::Mat;
use pepsbound::gibbs::araki::{log_araki_chi, log_second_differences};
use pepsbound::gibbs::*;
use pepsbound::layout::{BoundaryLayout, ChainPieces, SiteOperator};
use pepsbound::linalg::{self, c64, cx, max_abs, op_norm};

fn random_hermitian(n: usize, norm: f64, seed: u64) -> Mat<c64> {
    let mut rng = linalg::seeded_rng(seed);
    let v = linalg::random_complex_vector(&mut rng, n * n);
    let h = linalg::hermitian_part(&Mat::from_fn(n, n, |i, j| v[i * n + j]));
    let s = op_norm(&h).unwrap();
    linalg::scaled(&h, norm / s)
}

#[test]
fn gamma_of_x_by_z_closed_form() {
    for t in [0.0, 0.3, -0.8] {
        let g = gamma(t, &pauli_z(), &pauli_x()).unwrap();
        // e^{tZ} X e^{-tZ} = cosh(2t) X + i sinh(2t) Y
        let expect = &linalg::scaled(&pauli_x(), (2.0 * t).cosh())
            + &Mat::from_fn(2, 2, |i, j| cx(0.0, (2.0 * t).sinh()) * pauli_y()[(i, j)]);
        assert!(max_abs(&(&g - &expect)) < 1e-13);
    }
}

#[test]
fn gamma_is_a_one_parameter_group() {
    let b = random_hermitian(6, 1.3, 1);
    let a = random_hermitian(6, 1.0, 2);
    assert!(max_abs(&(&gamma(0.0, &b, &a).unwrap() - &a)) < 1e-12);
    let st = gamma(0.4, &b, &gamma(0.25, &b, &a).unwrap()).unwrap();
    assert!(max_abs(&(&st - &gamma(0.65, &b, &a).unwrap())) < 1e-10);
    let back = gamma(-0.7, &b, &gamma(0.7, &b, &a).unwrap()).unwrap();
    assert!(max_abs(&(&back - &a)) < 1e-10);
    // commuting operators are fixed
    let f = b.clone();
    assert!(max_abs(&(&gamma(0.9, &b, &f).unwrap() - &f)) < 1e-10);
}

#[test]
fn non_hermitian_generator_uses_exponentials() {
    let b = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { cx(0.5, 0.0) } else { cx(0.0, 0.0) });
    let a = pauli_z();
    let g = gamma(1.0, &b, &a).unwrap();
    let e = linalg::expm(&b);
    let ei = linalg::expm(&linalg::scaled(&b, -1.0));
    assert!(max_abs(&(&g - &(&(&e * &a) * &ei))) < 1e-14);
}

#[test]
fn araki_functions_by_hand() {
    // r = 2, x = 1, ℓ = 4: (2 log 2 e²)³ / 3! ≈ 179.1356
    let expect = (2.0 * 2f64.ln() * 1f64.exp().powi(2)).powi(3) / 6.0;
    let v = araki_chi(4, 1.0, 2).unwrap();
    assert!((v - expect).abs() / expect < 1e-13);
    assert!((expect - 179.135_644_7).abs() < 1e-6);
    let f = araki_f(3, 1.5, 2).unwrap();
    let expect_f = (2.0 * 1.5 + 2.0 * 2f64.ln() * 3f64.exp()).exp();
    assert!((f - expect_f).abs() / expect_f < 1e-13);
    assert!(araki_f(4, 1.5, 2).unwrap() > f);
    assert!(araki_chi(1, 1.0, 1).is_err());
}

#[test]
fn chi_decreases_once_the_factorial_wins() {
    let r = 2;
    let x = 1.2;
    let big = 2.0 * (r as f64).ln() * (r as f64 * x).exp();
    let start = (big.ceil() as usize) * r;
    let mut prev = log_araki_chi(start, x, r).unwrap();
    for ell in (start + r..start + 20 * r).step_by(r) {
        let next = log_araki_chi(ell, x, r).unwrap();
        assert!(next < prev);
        prev = next;
    }
    // log space survives where the value overflows
    assert!(log_araki_chi(4000, 300.0, 2).unwrap().is_finite());
}

fn tfim(n: usize) -> ChainHamiltonian {
    ChainHamiltonian::transverse_ising(n, 1.0, 0.9, 0.3)
}

#[test]
fn commuting_chain_has_no_truncation_residual() {
    let n = 7;
    let h = ChainHamiltonian::transverse_ising(n, 1.0, 0.0, 0.4);
    let f = SiteOperator::new(vec![3], vec![2], pauli_z()).unwrap();
    for p in araki_residual(0.5, &h, &f, 3, 0, &[0, 1, 2], LOG_VALIDITY_CONSTANT).unwrap() {
        assert!(p.measured < 1e-12);
    }
    // single-site terms only
    let h = ChainHamiltonian::transverse_ising(n, 0.0, 0.7, 0.2);
    let f = SiteOperator::new(vec![3], vec![2], pauli_x()).unwrap();
    for p in araki_residual(0.5, &h, &f, 3, 0, &[0, 1, 2], LOG_VALIDITY_CONSTANT).unwrap() {
        assert!(p.measured < 1e-12);
    }
}

#[test]
fn araki_residuals_decay_and_respect_the_bound() {
    let n = 11;
    let h = tfim(n);
    let f = SiteOperator::new(vec![5], vec![2], pauli_x()).unwrap();
    let pts = araki_residual(0.6, &h, &f, 5, 0, &[1, 2, 3, 4], LOG_VALIDITY_CONSTANT).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].measured < w[0].measured, "{pts:?}");
    }
    for p in &pts {
        assert!(p.in_regime);
        assert_eq!(p.pass, Some(true), "{p:?}");
    }
    // faster than exponential: the decay ratio shrinks
    let d2 = log_second_differences(&pts);
    assert!(d2.iter().all(|&d| d < 0.0), "{d2:?}");
}

#[test]
fn out_of_regime_points_are_not_checked() {
    let h = tfim(7);
    let f = SiteOperator::new(vec![3], vec![2], pauli_x()).unwrap();
    let pts = araki_residual(0.2, &h, &f, 3, 0, &[1, 2], LOG_VALIDITY_CONSTANT).unwrap();
    assert!(pts.iter().all(|p| !p.in_regime && p.pass.is_none()));
    assert!(araki_residual(0.2, &h, &f, 3, 0, &[4], LOG_VALIDITY_CONSTANT).is_err());
}

#[test]
fn expansional_of_constant_and_zero_paths() {
    let m = random_hermitian(5, 0.8, 3);
    let e = expansional(&OperatorPath::constant(m.clone()).unwrap(), 1e-12).unwrap();
    assert!(max_abs(&(&e.value - &linalg::expm(&m))) < 1e-11);
    let z = expansional(&OperatorPath::zero(4), 1e-12).unwrap();
    assert!(max_abs(&(&z.value - &linalg::identity(4))) == 0.0);
    assert_eq!(expansional_norm_check(&OperatorPath::zero(4), 1e-12).unwrap(), (0.0, 0.0));
    let (got, bound) = expansional_norm_check(&OperatorPath::constant(m.clone()).unwrap(), 1e-12).unwrap();
    assert!((got - op_norm(&(&linalg::expm(&m) - &linalg::identity(5))).unwrap()).abs() < 1e-10);
    assert!(got <= bound + 1e-12);
}

#[test]
fn iterated_path_reproduces_products() {
    for n in 2..=4 {
        let ops: Vec<Mat<c64>> = (0..n).map(|k| random_hermitian(4, 0.5 + 0.1 * k as f64, 10 + k as u64)).collect();
        let p = iterated_path(&ops).unwrap();
        let e = expansional(&p, 1e-10).unwrap();
        let mut prod = linalg::identity(4);
        for o in &ops {
            prod = &prod * &linalg::expm(o);
        }
        assert!(max_abs(&(&e.value - &prod)) < 1e-9, "n = {n}");
        assert!(p.sampled_max(40).unwrap() <= p.bound + 1e-12);
    }
}

#[test]
fn non_commuting_linear_path_against_fine_splitting() {
    let a = random_hermitian(3, 1.0, 21);
    let b = random_hermitian(3, 1.0, 22);
    let p = OperatorPath::piecewise_linear(vec![a.clone(), b.clone()]).unwrap();
    let e = expansional(&p, 1e-11).unwrap();
    // midpoint product formula, later times to the left
    let steps = 20000;
    let mut u = linalg::identity(3);
    for k in 0..steps {
        let s = (k as f64 + 0.5) / steps as f64;
        let o = &linalg::scaled(&a, 1.0 - s) + &linalg::scaled(&b, s);
        u = &linalg::expm(&linalg::scaled(&o, 1.0 / steps as f64)) * &u;
    }
    assert!(max_abs(&(&e.value - &u)) < 1e-7);
}

#[test]
fn three_segment_path_obeys_the_norm_bound() {
    let nodes: Vec<Mat<c64>> = (0..4).map(|k| random_hermitian(4, 0.4 + 0.3 * k as f64, 30 + k)).collect();
    let p = OperatorPath::piecewise_linear(nodes).unwrap();
    assert_eq!(p.breaks.len(), 2);
    let (got, bound) = expansional_norm_check(&p, 1e-10).unwrap();
    assert!(got <= bound + 1e-10);
}

fn pieces(x: usize, y: usize) -> ChainPieces {
    ChainPieces { a_only: 1, ad: 0, x, y, bc: 0, b_only: 1, c_only: 1, d_only: 1 }
}

/// The same chain Hamiltonian restricted to each of the four boundaries.
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
    use pepsbound::lattice::Part;
    GibbsFactors {
        q: on(layout.region(Part::Abc)),
        r: on(layout.region(Part::Ab)),
        s: on(layout.region(Part::Bc)),
        t: on(layout.region(Part::B)),
    }
}

#[test]
fn commuting_factors_are_exact() {
    let layout = BoundaryLayout::chain(pieces(2, 2), 2);
    let labels = Labels::from_layout(&layout);
    let f = homogeneous(&layout, 0.4, 0.0, 0.3);
    let d = build_delta_omega(&f.q, &f.t, &labels).unwrap();
    use pepsbound::lattice::Part;
    let abc = layout.region(Part::Abc).to_vec();
    let dims = layout.dims_of(&abc);
    let sigma = &d.delta_zb.embed(&abc, &dims).unwrap() * &d.delta_az.embed(&abc, &dims).unwrap();
    let rho = linalg::hermitian_spectral(&f.q.matrix_on(&abc).unwrap()).unwrap().apply(|x| (2.0 * x).exp());
    assert!(max_abs(&(&sigma - &rho)) < 1e-10 * max_abs(&rho));
    let o = ol_or(&f, &labels).unwrap();
    assert!(o.ol_minus_one < 1e-10 && o.or_minus_one < 1e-10);
    let x = x_terms(&f, &labels, 8, 1e-10).unwrap();
    assert!(x.epsilon < 1e-10, "{x:?}");
    assert!(x.pass);
}

#[test]
fn single_site_terms_factorize() {
    let layout = BoundaryLayout::chain(pieces(1, 1), 2);
    let labels = Labels::from_layout(&layout);
    let f = homogeneous(&layout, 0.0, 0.6, 0.2);
    let d = build_delta_omega(&f.q, &f.t, &labels).unwrap();
    let axy = labels.sites("axy");
    let single = &linalg::scaled(&pauli_x(), 0.6) + &linalg::scaled(&pauli_z(), 0.2);
    let e2 = linalg::hermitian_spectral(&single).unwrap().apply(|x| (2.0 * x).exp());
    // e^{2h} on a and x, nothing on y
    let expect = linalg::kron(&linalg::kron(&e2, &e2), &linalg::identity(2));
    assert_eq!(d.delta_az.sites, axy);
    assert!(max_abs(&(&d.delta_az.matrix - &expect)) < 1e-11);
}

#[test]
fn ol_or_identity_holds_for_non_commuting_chains() {
    let layout = BoundaryLayout::chain(pieces(2, 2), 2);
    let labels = Labels::from_layout(&layout);
    let mut f = homogeneous(&layout, 0.5, 0.4, 0.2);
    let o = ol_or(&f, &labels).unwrap();
    assert!(o.identity_residual < 1e-10, "{}", o.identity_residual);
    assert!(o.product_minus_one <= o.triangle_bound + 1e-12);
    let base = o.ol_minus_one;
    // perturb T away from Q near c
    let c = labels.c[0];
    let extra = linalg::scaled(&pauli_x(), 0.3);
    f.t.terms.push(SiteOperator::new(vec![c], vec![2], extra).unwrap());
    let p = ol_or(&f, &labels).unwrap();
    assert!(p.identity_residual < 1e-10);
    assert!(p.ol_minus_one > base);
}

#[test]
fn x_terms_of_a_homogeneous_chain() {
    let layout = BoundaryLayout::chain(pieces(2, 2), 2);
    let labels = Labels::from_layout(&layout);
    let f = homogeneous(&layout, 0.5, 0.4, 0.2);
    let x = x_terms(&f, &labels, 16, 1e-9).unwrap();
    for i in 0..4 {
        assert!(x.path_norms[i] < 1e-12, "{x:?}");
    }
    assert!(x.path_norms[4] > 0.0);
    assert!(x.remainder < 1e-12, "{x:?}");
    assert!(x.expansional_residual < 1e-8, "{x:?}");
    assert!(x.ol_minus_one <= x.ol_bound);
    assert!(x.pass);
}

#[test]
fn x_terms_shrink_with_the_buffer() {
    let mut eps = Vec::new();
    for y in 1..=3 {
        let layout = BoundaryLayout::chain(pieces(1, y), 2);
        let labels = Labels::from_layout(&layout);
        let f = homogeneous(&layout, 0.5, 0.4, 0.2);
        let x = x_terms(&f, &labels, 16, 1e-9).unwrap();
        assert!(x.pass, "{x:?}");
        eps.push((x.epsilon, x.ol_minus_one));
    }
    assert!(eps[2].0 < eps[0].0, "{eps:?}");
    assert!(eps[2].1 < eps[0].1, "{eps:?}");
}

#[test]
fn strict_locality_epsilon() {
    let zero = DeltaSeries::Finite(vec![]);
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for ell in (20..200).step_by(20) {
        let b = theorem_strictlocality_epsilon(2, 0.1, ell, &zero).unwrap();
        assert_eq!(b.tail, 0.0);
        assert!(b.surrogate);
        assert!(b.epsilon < prev);
        prev = b.epsilon;
        last = b.epsilon;
    }
    assert!(last < 1e-30);
    let geo = DeltaSeries::Geometric { c: 1.0, ratio: 0.25 };
    for ell in 0..6 {
        // Σ_{l≥ℓ} 4^{-l} = 4^{-ℓ} · 4/3
        let closed = 0.25f64.powi(ell) * 4.0 / 3.0;
        let summed: f64 = (ell..200).map(|l| 0.25f64.powi(l)).sum();
        assert!((geo.tail(ell as usize) - closed).abs() < 1e-15);
        assert!((closed - summed).abs() < 1e-15);
        let listed = DeltaSeries::Finite((0..200).map(|l| 0.25f64.powi(l)).collect());
        assert!((listed.tail(ell as usize) - closed).abs() < 1e-14);
    }
    assert!(theorem_strictlocality_epsilon(2, 5.0, 2, &zero).unwrap().epsilon.is_infinite());
}
