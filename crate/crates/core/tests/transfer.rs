use jrgauss_core::algebra::{parse_poly, Poly};
use jrgauss_core::orbint::orb_lie;
use jrgauss_core::quadrature::QuadratureSpec;
use jrgauss_core::sampling::{random_gl, random_unitary, rng, uniform};
use jrgauss_core::slie::{conj_act, Invariant, TransferConvention};
use jrgauss_core::transferlab::{average_unitary, chart_vars, transfer_polynomial};
use jrgauss_core::ulie::{conj_u, construct_s, construct_u, corner_poly, orb_unitary, q_poly, u_vars};
use jrgauss_core::C64;

fn polys(n: usize) -> Vec<(&'static str, Poly, u32)> {
    vec![("1", Poly::one(&u_vars(n)), 0), ("dR", corner_poly(n), 1), ("Q", q_poly(n), 2)]
}

#[test]
fn transfer_identity_n1() {
    let spec = QuadratureSpec::default();
    let mut r = rng(61);
    for (name, p, deg) in polys(1) {
        let t = transfer_polynomial(1, &p, deg, &spec).unwrap();
        for k in 0..20 {
            let inv = Invariant { a: vec![uniform(&mut r, -1.0, 1.0)], b: vec![uniform(&mut r, 0.05, 1.0)], d: uniform(&mut r, -0.8, 0.8) };
            let x = construct_u(&inv, (1, 0)).unwrap();
            let y = conj_act(&random_gl(&mut r, 1), &construct_s(&inv).unwrap()).unwrap();
            let lhs = orb_lie(&y, &t.phi, TransferConvention::Example, &spec).unwrap().value;
            let rhs = orb_unitary(&x, &p, &spec).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-6, "p = {name}, sample {k}: {lhs} vs {rhs}");
            let neg = Invariant { b: vec![-inv.b[0]], ..inv };
            let yn = construct_s(&neg).unwrap();
            let v = orb_lie(&yn, &t.phi, TransferConvention::Example, &spec).unwrap().value;
            assert!(v.abs() < 1e-6, "p = {name}: non-matching gave {v}");
        }
    }
}

#[test]
fn chart_expressions_n2() {
    let spec = QuadratureSpec::default();
    let cv = chart_vars(2);
    let t = transfer_polynomial(2, &q_poly(2), 2, &spec).unwrap();
    assert_eq!(t.quotient.f, parse_poly("a1^2 - 2*a2 + 2*b0 + dR^2", &cv).unwrap());
    let t = transfer_polynomial(2, &corner_poly(2), 1, &spec).unwrap();
    assert_eq!(t.quotient.f, parse_poly("dR", &cv).unwrap());
    // products of quotient functions multiply
    let p = &q_poly(2) * &corner_poly(2);
    let t = transfer_polynomial(2, &p, 3, &spec).unwrap();
    assert_eq!(t.quotient.f, parse_poly("(a1^2 - 2*a2 + 2*b0 + dR^2)*dR", &cv).unwrap());
}

#[test]
fn transfer_identity_n2_corner() {
    let spec = QuadratureSpec::default().with_tolerance(1e-8);
    let p = corner_poly(2);
    let t = transfer_polynomial(2, &p, 1, &spec).unwrap();
    let mut r = rng(8);
    for _ in 0..2 {
        let (l1, l2) = (uniform(&mut r, 0.2, 0.9), uniform(&mut r, -0.9, -0.1));
        let inv = jrgauss_core::transferlab::chart_point(&[l1, l2], &[uniform(&mut r, 0.1, 0.6), uniform(&mut r, 0.1, 0.6)], uniform(&mut r, -0.5, 0.5));
        let x = construct_u(&inv, (2, 0)).unwrap();
        let y = construct_s(&inv).unwrap();
        let lhs = orb_lie(&y, &t.phi, TransferConvention::Example, &spec).unwrap().value;
        let rhs = orb_unitary(&x, &p, &spec).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-6 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn averages() {
    let spec = QuadratureSpec::default();
    let mut r = rng(13);
    let inv = Invariant { a: vec![0.3], b: vec![0.7], d: -0.2 };
    let x = construct_u(&inv, (1, 0)).unwrap();
    // invariant polynomials are their own averages
    for p in [corner_poly(1), q_poly(1)] {
        let avg = average_unitary(1, &p, &spec).unwrap();
        assert!((avg.eval(&x).unwrap() - p.eval(&x.coords())).abs() < 1e-10);
    }
    // off-diagonal entries against a dense periodic reference
    let uv = u_vars(1);
    for text in ["re12", "re12^2 + 3*im12*re21", "re12^4"] {
        let p = parse_poly(text, &uv).unwrap();
        let m = 4096;
        let dense: f64 = (0..m)
            .map(|k| {
                let g = jrgauss_core::DMatrix::from_element(1, 1, C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64));
                p.eval(&conj_u(&g, &x).unwrap().coords())
            })
            .sum::<f64>()
            / m as f64;
        let avg = average_unitary(1, &p, &spec).unwrap();
        assert!((avg.eval(&x).unwrap() - dense).abs() < 1e-10, "{text}");
    }
    // the average is U(n)-invariant at n = 2
    let inv2 = jrgauss_core::transferlab::chart_point(&[0.5, -0.4], &[0.3, 0.8], 0.1);
    let x2 = construct_u(&inv2, (2, 0)).unwrap();
    let p = parse_poly("re12^2 + im13*re31", &u_vars(2)).unwrap();
    let avg = average_unitary(2, &p, &spec).unwrap();
    assert!(avg.invariance_defect(&x2, 3, 5).unwrap() < 1e-9);
    let g = random_unitary(&mut r, 2);
    let moved = conj_u(&g, &x2).unwrap();
    let (a, b) = (orb_unitary(&x2, &p, &spec).unwrap().value, orb_unitary(&moved, &p, &spec).unwrap().value);
    assert!((a - b).abs() < 1e-9);
}
