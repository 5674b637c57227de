use jrgauss_core::orbint::orb_lie;
use jrgauss_core::pullback::compute_phi;
use jrgauss_core::quadrature::{QuadMethod, QuadratureSpec};
use jrgauss_core::sampling::{random_gl, random_matching, rng};
use jrgauss_core::slie::{conj_act, q_form, SElement, TransferConvention};
use std::f64::consts::PI;

fn gauss(y: &SElement) -> f64 {
    (-2.0 * PI * q_form(y)).exp()
}

#[test]
fn n1_grid_closed_form() {
    let phi = compute_phi(1).unwrap();
    let spec = QuadratureSpec::default();
    for i in 0..5 {
        for j in 0..4 {
            let (a, d) = (0.3 * i as f64 - 0.6, 0.2 * j as f64 - 0.3);
            let (p, q) = (0.15 + 0.2 * i as f64, 0.1 + 0.35 * j as f64);
            let y = SElement::from_rows(&[vec![a, p], vec![q, d]]).unwrap();
            let o = orb_lie(&y, &phi, TransferConvention::Example, &spec).unwrap();
            let want = (-2.0 * PI * (a * a + d * d)).exp() * (-4.0 * PI * p * q).exp();
            assert!((o.value - want).abs() < 1e-9, "({a},{p},{q},{d}): {} vs {want}", o.value);
            let y = SElement::from_rows(&[vec![a, p], vec![-q, d]]).unwrap();
            let o = orb_lie(&y, &phi, TransferConvention::Example, &spec).unwrap();
            assert!(o.value.abs() < 1e-9, "non-matching gave {}", o.value);
        }
    }
}

#[test]
fn n2_matching_and_not() {
    let phi = compute_phi(2).unwrap();
    let spec = QuadratureSpec::default().with_tolerance(1e-8);
    let mut r = rng(11);
    for neg in 0..=2 {
        for _ in 0..2 {
            let y = random_matching(&mut r, 2, neg, 0.6).unwrap();
            let o = orb_lie(&y, &phi, TransferConvention::Example, &spec).unwrap();
            if neg == 0 {
                assert!((o.value / gauss(&y) - 1.0).abs() < 1e-6, "ratio {}", o.value / gauss(&y));
            } else {
                assert!(o.value.abs() < 1e-8, "signature ({}, {neg}) gave {}", 2 - neg, o.value);
            }
        }
    }
}

#[test]
fn orbit_invariance_n2() {
    let phi = compute_phi(2).unwrap();
    let spec = QuadratureSpec::default().with_tolerance(1e-8);
    let mut r = rng(5);
    let y = random_matching(&mut r, 2, 0, 0.5).unwrap();
    let base = orb_lie(&y, &phi, TransferConvention::Example, &spec).unwrap().value;
    for _ in 0..2 {
        let g = random_gl(&mut r, 2);
        let moved = conj_act(&g, &y).unwrap();
        let v = orb_lie(&moved, &phi, TransferConvention::Example, &spec).unwrap().value;
        assert!((v - base).abs() < 1e-7 * base.abs(), "{v} vs {base}");
    }
}

#[test]
fn box_method_agrees_n1() {
    let phi = compute_phi(1).unwrap();
    let y = SElement::from_rows(&[vec![0.2, 0.4], vec![0.6, -0.1]]).unwrap();
    let want = gauss(&y);
    for (m, tol, bound) in [(QuadMethod::TensorGauss, 1e-9, 1e-7), (QuadMethod::TanhSinh, 1e-9, 1e-7), (QuadMethod::MonteCarlo, 1e-3, 1e-2 * want)] {
        let spec = QuadratureSpec::default().with_method(m).with_tolerance(tol);
        let o = match orb_lie(&y, &phi, TransferConvention::Example, &spec) {
            Ok(o) => o,
            Err(e) => panic!("{m:?}: {e}"),
        };
        assert!((o.value - want).abs() < bound, "{m:?}: {} vs {want}", o.value);
    }
}
