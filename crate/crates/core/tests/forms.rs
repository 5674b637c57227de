use jrgauss_core::algebra::{Poly, Scalar};
use jrgauss_core::kmform::{check_equivariance, equivariance_residual, km_form, Signature};
use jrgauss_core::pullback::{compute_phi, dbeta, y_vars, FrameData};
use jrgauss_core::sampling::{gaussian_matrix, random_orthogonal, rng, Rand};
use jrgauss_core::slie::{conj_act, SElement};
use jrgauss_core::DMatrix;

fn sig(n: usize) -> Signature {
    Signature::new((n + 1) * (n + 2) / 2, n * (n + 1) / 2)
}

fn identity(d: usize) -> Vec<Vec<Scalar>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

/// Transpositions inside `V⁺` and inside `V⁻`, and a sign flip of every coordinate.
fn exact_generators(s: Signature) -> Vec<Vec<Vec<Scalar>>> {
    let d = s.dim();
    let mut out = Vec::new();
    for (lo, hi) in [(0, s.p), (s.p, d)] {
        for i in lo..hi {
            for j in i + 1..hi {
                let mut k = identity(d);
                k[i][i] = Scalar::zero();
                k[j][j] = Scalar::zero();
                k[i][j] = Scalar::one();
                k[j][i] = Scalar::one();
                out.push(k);
            }
        }
    }
    for i in 0..d {
        let mut k = identity(d);
        k[i][i] = Scalar::int(-1);
        out.push(k);
    }
    out
}

#[test]
fn km_form_exact_equivariance() {
    for n in 1..=2 {
        let km = km_form(sig(n)).unwrap();
        for k in exact_generators(km.sig) {
            assert!(check_equivariance(&km, &k).unwrap().is_zero());
        }
    }
}

fn block_rotation(r: &mut Rand, s: Signature) -> Vec<Vec<f64>> {
    let (kp, km) = (random_orthogonal(r, s.p), random_orthogonal(r, s.q));
    let d = s.dim();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match (i < s.p, j < s.p) {
                    (true, true) => kp[(i, j)],
                    (false, false) => km[(i - s.p, j - s.p)],
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

#[test]
fn km_form_rotation_equivariance() {
    let mut r = rng(19);
    for n in 1..=2 {
        let km = km_form(sig(n)).unwrap();
        let d = km.sig.dim();
        for _ in 0..10 {
            let k = block_rotation(&mut r, km.sig);
            let xs: Vec<Vec<f64>> = (0..3).map(|_| gaussian_matrix(&mut r, d, 1, 1.0).iter().cloned().collect()).collect();
            assert!(equivariance_residual(&km, &k, &xs).unwrap() < 1e-10);
        }
    }
}

/// `y ↦ k^{-1}·y` on the entries, as linear polynomials in [`y_vars`].
fn conj_images(n: usize, k: &[Vec<Scalar>]) -> Vec<Poly> {
    let yv = y_vars(n);
    let m = n + 1;
    let big = |i: usize, j: usize| if i < n && j < n { k[i][j].clone() } else if i == j { Scalar::one() } else { Scalar::zero() };
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            // (K^T A K)_{ij}
            let mut p = Poly::zero(&yv);
            for a in 0..m {
                for b in 0..m {
                    let c = &big(a, i) * &big(b, j);
                    if !c.is_zero() {
                        p = &p + &Poly::var(&yv, a * m + b).scale(&c);
                    }
                }
            }
            out.push(p);
        }
    }
    out
}

#[test]
fn phi_is_o_n_equivariant_exactly() {
    let q = |a: i64, b: i64| Scalar::ratio(a, b);
    let cases: Vec<(usize, Vec<Vec<Scalar>>, i64)> = vec![
        (1, vec![vec![q(-1, 1)]], -1),
        (2, vec![vec![q(-1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]], -1),
        (2, vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]], -1),
        (2, vec![vec![q(3, 5), q(-4, 5)], vec![q(4, 5), q(3, 5)]], 1),
    ];
    for (n, k, eta) in cases {
        let phi = compute_phi(n).unwrap().poly;
        let moved = phi.compose(&conj_images(n, &k)).unwrap();
        assert_eq!(moved, phi.scale(&Scalar::int(eta)), "n = {n}");
    }
}

#[test]
fn phi_equivariance_numeric_n3() {
    let phi = compute_phi(3).unwrap();
    let mut r = rng(4);
    for _ in 0..5 {
        let y = SElement::new(gaussian_matrix(&mut r, 4, 4, 0.5)).unwrap();
        let k = random_orthogonal(&mut r, 3);
        let eta = k.determinant().signum();
        let moved = conj_act(&k.transpose(), &y).unwrap();
        let (a, b) = (phi.eval(&moved), eta * phi.eval(&y));
        assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn dbeta_is_injective_and_matches_finite_differences() {
    for n in 1..=3 {
        let f = FrameData::new(n).unwrap();
        let l = dbeta(&f).unwrap().to_f64();
        let mat = DMatrix::from_fn(l.rows(), l.cols(), |i, j| *l.get(i, j));
        let sv = mat.clone().singular_values();
        assert!(sv.iter().all(|s| *s > 1e-8), "rank deficit at n = {n}");
        // column (k, l) is x⁺([E_kl, e_j]); compare with d/dt x⁺(exp(tE) e_j exp(-tE))
        let m = n + 1;
        let mut r = rng(n as u64);
        let a = gaussian_matrix(&mut r, m, m, 1.0);
        let skew = &a - a.transpose();
        for (c, &(k, ll)) in f.borel.iter().enumerate() {
            let mut e = DMatrix::<f64>::zeros(m, m);
            e[(k, ll)] = 1.0;
            let h = 1e-6;
            let at = |t: f64| {
                let g = DMatrix::<f64>::identity(m, m) + &e * t;
                let gi = DMatrix::<f64>::identity(m, m) - &e * t + &e * &e * (t * t);
                f.coords(&SElement::new(&g * &skew * gi).unwrap())
            };
            let (xp, xm) = (at(h), at(-h));
            // the same derivative through the linear map, applied to the skew coordinates of `skew`
            let xs = f.coords(&SElement::new(skew.clone()).unwrap());
            let minus: Vec<f64> = xs[f.sig.p..].to_vec();
            for i in 0..f.sig.p {
                let fd = (xp[i] - xm[i]) / (2.0 * h);
                let lin: f64 = (0..f.sig.q).map(|j| mat[(jrgauss_core::kmform::omega_index(f.sig, i + 1, f.sig.p + 1 + j), c)] * minus[j]).sum();
                assert!((fd - lin).abs() < 1e-6, "n {n} col {c} x{i}: {fd} vs {lin}");
            }
        }
    }
}
