use jrgauss_core::cayley::{
    assemble_gaussian, cayley, cayley_inverse, eps_group, group_invariants, match_signature_group, rho_xi, zhang_eps_complex, BumpSpec, Chart, ChartGaussian, GroupElement,
    Partition,
};
use jrgauss_core::linalg::to_complex;
use jrgauss_core::orbint::{orb_group, orb_lie};
use jrgauss_core::pullback::compute_phi;
use jrgauss_core::quadrature::QuadratureSpec;
use jrgauss_core::sampling::{random_gl, random_matching, random_rss, rng, uniform, Rand};
use jrgauss_core::slie::{match_signature, q_form, TransferConvention};
use jrgauss_core::{DMatrix, C64};
use std::f64::consts::PI;

fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

fn conj_group(g: &GroupElement, h: &DMatrix<f64>) -> GroupElement {
    let n = g.n();
    let mut big = DMatrix::<f64>::identity(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(h);
    let bi = big.clone().try_inverse().unwrap();
    GroupElement::new(to_complex(&bi) * g.m() * to_complex(&big)).unwrap()
}

fn matching_gamma(r: &mut Rand, n: usize, neg: usize, xi: C64) -> GroupElement {
    cayley_inverse(&random_matching(r, n, neg, 0.5).unwrap(), xi).unwrap()
}

#[test]
fn cayley_round_trip_and_equivariance() {
    let mut r = rng(21);
    for n in 1..=2 {
        for _ in 0..10 {
            let xi = unit(uniform(&mut r, 0.0, 2.0 * PI));
            let g = cayley_inverse(&random_rss(&mut r, n), xi).unwrap();
            let chart = Chart::new(xi, 1e-9).unwrap();
            let back = cayley_inverse(&cayley(&g, &chart).unwrap(), xi).unwrap();
            assert!((back.m() - g.m()).norm() < 1e-12 * (1.0 + g.m().norm_squared()));
            let h = random_gl(&mut r, n);
            let lhs = cayley(&conj_group(&g, &h), &chart).unwrap();
            let rhs = jrgauss_core::slie::conj_act(&h.clone().try_inverse().unwrap(), &cayley(&g, &chart).unwrap()).unwrap();
            assert!((lhs.a() - rhs.a()).norm() < 1e-8 * (1.0 + rhs.a().norm()));
        }
    }
}

#[test]
fn eps_rho_identity() {
    let mut r = rng(4);
    for n in 1..=2 {
        let mut rhos = Vec::new();
        for _ in 0..100 {
            let xi = unit(uniform(&mut r, 0.0, 2.0 * PI));
            let y = random_rss(&mut r, n);
            let g = cayley_inverse(&y, xi).unwrap();
            let chart = Chart::new(xi, 1e-9).unwrap();
            let lhs = zhang_eps_complex(&cayley(&g, &chart).unwrap());
            for m in [1, 3] {
                let rho = rho_xi(&g, &chart, m).unwrap();
                let rhs = rho * eps_group(&g, m).unwrap();
                assert!((lhs.powi(m) - rhs).norm() < 1e-10, "n {n} m {m}: {lhs} vs {rhs}");
                assert!((rho.norm() - 1.0).abs() < 1e-12);
            }
            if n == 2 {
                // constant for even n once the chart is fixed up to ξγ
                rhos.push(rho_xi(&GroupElement::new(g.m() * xi.conj()).unwrap(), &Chart::new(unit(0.0), 0.0).unwrap(), 1).unwrap());
                let c = rho_xi(&g, &chart, 1).unwrap();
                let c0 = rho_xi(&cayley_inverse(&random_rss(&mut r, 2), xi).unwrap(), &chart, 1).unwrap();
                assert!((c - c0).norm() < 1e-10, "ρ_ξ varies: {c} vs {c0}");
            }
        }
        for w in rhos.windows(2) {
            assert!((w[0] - w[1]).norm() < 1e-10);
        }
    }
}

#[test]
fn eps_group_covariance() {
    let mut r = rng(8);
    for n in 1..=2 {
        for _ in 0..20 {
            let g = cayley_inverse(&random_rss(&mut r, n), unit(uniform(&mut r, 0.0, 6.0))).unwrap();
            let h = random_gl(&mut r, n);
            let eta = h.determinant().signum();
            for m in [1, 3] {
                let moved = conj_group(&g, &h.clone().try_inverse().unwrap());
                let (a, b) = (eps_group(&moved, m).unwrap(), eps_group(&g, m).unwrap() * eta);
                assert!((a - b).norm() < 1e-9, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn match_preserved_by_cayley() {
    let mut r = rng(17);
    for n in 1..=2 {
        for neg in 0..=n {
            let y = random_matching(&mut r, n, neg, 0.6).unwrap();
            let g = cayley_inverse(&y, unit(1.1)).unwrap();
            assert_eq!(match_signature_group(&g).unwrap(), (n - neg, neg));
            for t in [0.4, 2.5, 4.0] {
                let c = cayley(&g, &Chart::new(unit(t), 1e-9).unwrap()).unwrap();
                assert_eq!(match_signature(&c).unwrap(), (n - neg, neg));
            }
        }
    }
}

#[test]
fn chart_identity_n1() {
    let phi = compute_phi(1).unwrap();
    let spec = QuadratureSpec::default();
    let mut r = rng(31);
    let xi = unit(2.0);
    let chart = Chart::new(xi, 1e-6).unwrap();
    for k in 0..10 {
        let g = matching_gamma(&mut r, 1, k % 2, xi);
        let inv = group_invariants(g.m());
        let center: Vec<f64> = inv.iter().map(|x| x + 0.1).collect();
        let bump = BumpSpec::new(center, 1.0, 0.05).unwrap();
        let lam = bump.eval(&inv);
        assert!(lam > 0.0 && lam < 1.0);
        let f = ChartGaussian::new(1, chart, bump, 1, false).unwrap();
        let lhs = orb_group(&g, &f, &spec).unwrap().value;
        let rhs = lam * orb_lie(&cayley(&g, &chart).unwrap(), &phi, TransferConvention::Example, &spec).unwrap().value;
        assert!((lhs - rhs).norm() < 1e-8, "{lhs} vs {rhs}");
    }
}

#[test]
fn chart_gaussian_with_exp_q_is_one() {
    let spec = QuadratureSpec::default();
    let mut r = rng(2);
    let xi = unit(0.7);
    let chart = Chart::new(xi, 1e-6).unwrap();
    let g = matching_gamma(&mut r, 1, 0, xi);
    let bump = BumpSpec::new(group_invariants(g.m()), 1.0, 0.5).unwrap();
    let f = ChartGaussian::new(1, chart, bump, 1, true).unwrap();
    let v = orb_group(&g, &f, &spec).unwrap().value;
    assert!((v - 1.0).norm() < 1e-8, "{v}");
    let far = matching_gamma(&mut r, 1, 0, unit(3.0));
    let inv = group_invariants(far.m());
    let f = ChartGaussian::new(1, chart, BumpSpec::new(inv.iter().map(|x| x + 5.0).collect(), 1.0, 0.5).unwrap(), 1, true).unwrap();
    assert_eq!(orb_group(&far, &f, &spec).unwrap().value, C64::new(0.0, 0.0));
}

#[test]
fn assembled_gaussian_n1() {
    let spec = QuadratureSpec::default();
    let phi = assemble_gaussian(1, 1, None, 3).unwrap();
    let mut r = rng(12);
    for k in 0..6 {
        let xi = unit(uniform(&mut r, 0.0, 2.0 * PI));
        let neg = k % 2;
        let g = matching_gamma(&mut r, 1, neg, xi);
        let v = orb_group(&g, &phi, &spec).unwrap().value;
        let want = if neg == 0 { 1.0 } else { 0.0 };
        assert!((v - want).norm() < 1e-6, "signature ({}, {neg}): {v}", 1 - neg);
    }
}

#[test]
fn two_chart_partition_n1() {
    let spec = QuadratureSpec::default();
    let part = Partition { xis: vec![unit(PI / 3.0), unit(2.0 * PI / 3.0)], margin: 1e-3 };
    let phi = assemble_gaussian(1, 1, Some(part), 5).unwrap();
    let mut r = rng(40);
    for k in 0..4 {
        let neg = k % 2;
        let xi = unit(uniform(&mut r, 0.0, 2.0 * PI));
        let g = matching_gamma(&mut r, 1, neg, xi);
        let v = orb_group(&g, &phi, &spec).unwrap().value;
        let want = if neg == 0 { 1.0 } else { 0.0 };
        assert!((v - want).norm() < 1e-6, "{v}");
    }
}

#[test]
fn group_value_tracks_gaussian_of_image() {
    // one chart, bump 1 near γ, no e^{2πQ}: the orbital integral is e^{-2πQ(c_ξ γ)}
    let spec = QuadratureSpec::default();
    let mut r = rng(77);
    let xi = unit(-1.3);
    let g = matching_gamma(&mut r, 1, 0, xi);
    let chart = Chart::new(xi, 1e-6).unwrap();
    let f = ChartGaussian::new(1, chart, BumpSpec::new(group_invariants(g.m()), 1.0, 0.5).unwrap(), 1, false).unwrap();
    let v = orb_group(&g, &f, &spec).unwrap().value;
    let want = (-2.0 * PI * q_form(&cayley(&g, &chart).unwrap())).exp();
    assert!((v - want).norm() < 1e-8, "{v} vs {want}");
}
