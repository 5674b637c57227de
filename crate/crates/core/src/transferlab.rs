//! Transfer of polynomial-times-Gaussian functions from `u(n+1)` to `s_{n+1}`: average
//! over `U(n)`, express the average through the invariant chart `(a, b, d_R)`, and pull
//! the chart polynomial back to `s_{n+1}` to multiply `Φ`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{vars, Poly, Scalar, Vars};
use crate::pullback::{compute_phi, y_vars, GaussPoly};
use crate::quadrature::QuadratureSpec;
use crate::sampling::{random_unitary, rng};
use crate::slie::Invariant;
use crate::ulie::{conj_u, construct_u, u_vars, unitary_average, UElement};
use crate::{Error, Result};

/// `p̄(x) = ∫_{U(n)} p(g^{-1} x g) dg` as an evaluable function on the `(n, 0)` side.
#[derive(Clone, Debug)]
pub struct UnitaryAverage {
    pub n: usize,
    pub p: Poly,
    pub spec: QuadratureSpec,
}

pub fn average_unitary(n: usize, p: &Poly, spec: &QuadratureSpec) -> Result<UnitaryAverage> {
    if p.vars()[..] != u_vars(n)[..] {
        return Err(Error::Variable("polynomial must be written in the re/im entry coordinates".into()));
    }
    Ok(UnitaryAverage { n, p: p.clone(), spec: *spec })
}

impl UnitaryAverage {
    pub fn eval(&self, x: &UElement) -> Result<f64> {
        Ok(unitary_average(x, &self.p, &self.spec)?.0)
    }

    /// Largest `|p̄(g^{-1} x g) - p̄(x)|` over `samples` random `g ∈ U(n)`.
    pub fn invariance_defect(&self, x: &UElement, samples: usize, seed: u64) -> Result<f64> {
        let base = self.eval(x)?;
        let mut r = rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = random_unitary(&mut r, self.n);
            worst = worst.max((self.eval(&conj_u(&g, x)?)? - base).abs());
        }
        Ok(worst)
    }
}

/// Chart coordinate names `a1..an, b0..b{n-1}, dR`.
pub fn chart_vars(n: usize) -> Vars {
    let mut names: Vec<String> = (1..=n).map(|k| format!("a{k}")).collect();
    names.extend((0..n).map(|k| format!("b{k}")));
    names.push("dR".into());
    vars(&names)
}

/// A polynomial `f` on the invariant chart with `p̄ = inv^*(f)`.
#[derive(Clone, Debug)]
pub struct QuotientFunction {
    pub n: usize,
    pub f: Poly,
    /// Largest held-out misfit `|p̄(x) - f(inv x)| / (1 + |p̄(x)|)`.
    pub residual: f64,
}

/// Halton coordinate in `(0, 1)`, a rational with power-of-`base` denominator.
fn halton(k: u64, base: u64) -> f64 {
    let (mut f, mut x, mut i) = (1.0, 0.0, k);
    while i > 0 {
        f /= base as f64;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Invariant of the `(n, 0)` side from eigenvalues `λ`, weights `r_j = |μ_j|^2 > 0` and `d_R`:
/// `a_k = (-1)^k e_k(λ)`, `b_k = Σ_j r_j λ_j^k`.
pub fn chart_point(lambda: &[f64], r: &[f64], d: f64) -> Invariant {
    let n = lambda.len();
    let mut e = alloc::vec![0.0; n + 1];
    e[0] = 1.0;
    for &l in lambda {
        for k in (1..=n).rev() {
            e[k] += e[k - 1] * l;
        }
    }
    let a = (1..=n).map(|k| if k % 2 == 0 { e[k] } else { -e[k] }).collect();
    let b = (0..n).map(|k| lambda.iter().zip(r).map(|(l, w)| w * l.powi(k as i32)).sum()).collect();
    Invariant { a, b, d }
}

/// `k`-th deterministic sample: eigenvalues spread over `[-1.5, 1.5]`, weights in `[0.2, 1.4]`.
fn sample_invariant(n: usize, k: u64) -> Invariant {
    let h = |i: usize| halton(k + 1, PRIMES[i % PRIMES.len()]);
    let mut lambda: Vec<f64> = (0..n).map(|j| -1.5 + 3.0 * (j as f64 + h(j)) / n as f64).collect();
    lambda.reverse();
    let r: Vec<f64> = (0..n).map(|j| 0.2 + 1.2 * h(n + j)).collect();
    chart_point(&lambda, &r, -1.0 + 2.0 * h(2 * n))
}

fn monomials(nv: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = alloc::vec![alloc::vec![0u32; nv]];
    for _ in 0..deg {
        let mut next = Vec::new();
        for m in &out {
            let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
            for i in start..nv {
                let mut m2 = m.clone();
                m2[i] += 1;
                next.push(m2);
            }
        }
        out.extend(next.into_iter().filter(|m| m.iter().sum::<u32>() <= deg));
        out.sort();
        out.dedup();
    }
    out
}

fn mono_eval(m: &[u32], x: &[f64]) -> f64 {
    m.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product()
}

/// Fits `f` of total degree `<= degree_bound` with `p̄ = f ∘ inv` by least squares on
/// `2 × (monomial count)` chart points, rounds coefficients to small rationals and checks
/// the result on as many held-out points.
pub fn quotient_express(pbar: &dyn Fn(&UElement) -> Result<f64>, n: usize, degree_bound: u32) -> Result<QuotientFunction> {
    let cv = chart_vars(n);
    let monos = monomials(cv.len(), degree_bound);
    let m = monos.len();
    let mut rows = Vec::with_capacity(2 * m);
    let mut rhs = Vec::with_capacity(2 * m);
    let mut held = Vec::with_capacity(m);
    for k in 0..3 * m as u64 {
        let inv = sample_invariant(n, k);
        let x = construct_u(&inv, (n, 0))?;
        let v = pbar(&x)?;
        if k < 2 * m as u64 {
            rows.push(inv.coords());
            rhs.push(v);
        } else {
            held.push((inv.coords(), v));
        }
    }
    let a = DMatrix::from_fn(rows.len(), m, |i, j| mono_eval(&monos[j], &rows[i]));
    let b = DVector::from_vec(rhs);
    let coef = a.svd(true, true).solve(&b, 1e-13).map_err(|e| Error::Internal(format!("least squares: {e}")))?;
    let terms = monos.iter().zip(coef.iter()).filter(|(_, c)| c.abs() > 1e-9).map(|(mo, c)| (mo.clone(), Scalar::approx_rational(*c, 10_000)));
    let f = Poly::from_terms(&cv, terms)?;
    let cf = f.compile();
    let mut residual: f64 = 0.0;
    let fitted: Vec<(Vec<f64>, f64)> = rows.into_iter().zip(b.iter().cloned()).collect();
    for (c, v) in held.iter().chain(&fitted) {
        residual = residual.max((cf.eval(c) - v).abs() / (1.0 + v.abs()));
    }
    if !(residual <= 1e-8) {
        return Err(Error::FitResidual(format!("degree {degree_bound} leaves a held-out misfit of {residual:.3e}")));
    }
    Ok(QuotientFunction { n, f, residual })
}

/// The chart coordinates `(a, b, d)` of `y = iA` as polynomials in [`y_vars`]: symbolic
/// Faddeev-LeVerrier for the characteristic polynomial of `A0`, `b_k = w^T A0^k v`.
pub fn chart_pullbacks(n: usize) -> Vec<Poly> {
    let yv = y_vars(n);
    let k = n + 1;
    let entry = |i: usize, j: usize| Poly::var(&yv, i * k + j);
    let a0: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|j| entry(i, j)).collect()).collect();
    let mul = |x: &Vec<Vec<Poly>>, y: &Vec<Vec<Poly>>| -> Vec<Vec<Poly>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).fold(Poly::zero(&yv), |s, l| &s + &(&x[i][l] * &y[l][j]))).collect()).collect()
    };
    let trace = |x: &Vec<Vec<Poly>>| (0..n).fold(Poly::zero(&yv), |s, i| &s + &x[i][i]);
    let mut out = Vec::with_capacity(2 * n + 1);
    // M_1 = 1, c_k = -tr(A0 M_k)/k, M_{k+1} = A0 M_k + c_k
    let mut mk: Vec<Vec<Poly>> = (0..n).map(|i| (0..n).map(|j| if i == j { Poly::one(&yv) } else { Poly::zero(&yv) }).collect()).collect();
    for step in 1..=n {
        let am = mul(&a0, &mk);
        let c = (-&trace(&am)).scale(&Scalar::ratio(1, step as i64));
        mk = am;
        for i in 0..n {
            mk[i][i] = &mk[i][i] + &c;
        }
        out.push(c);
    }
    let mut cur: Vec<Poly> = (0..n).map(|i| entry(i, n)).collect();
    for _ in 0..n {
        out.push((0..n).fold(Poly::zero(&yv), |s, j| &s + &(&entry(n, j) * &cur[j])));
        cur = (0..n).map(|i| (0..n).fold(Poly::zero(&yv), |s, j| &s + &(&a0[i][j] * &cur[j]))).collect();
    }
    out.push(entry(n, n));
    out
}

/// `inv^*(f)` on `s_{n+1}`.
pub fn pull_to_s(q: &QuotientFunction) -> Result<Poly> {
    q.f.compose(&chart_pullbacks(q.n))
}

#[derive(Clone, Debug)]
pub struct Transfer {
    pub quotient: QuotientFunction,
    /// `inv^*(f) · Φ`.
    pub phi: GaussPoly,
}

/// Transfers `p · Ψ` on `u(n+1)` (`Ψ` the Gaussian `e^{-2πQ}`) to `inv^*(f) · Φ`.
pub fn transfer_polynomial(n: usize, p: &Poly, degree_bound: u32, spec: &QuadratureSpec) -> Result<Transfer> {
    let avg = average_unitary(n, p, spec)?;
    let quotient = quotient_express(&|x| avg.eval(x), n, degree_bound)?;
    let phi = compute_phi(n)?.times(&pull_to_s(&quotient)?)?;
    Ok(Transfer { quotient, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;
    use crate::slie::raw_invariants;
    use crate::ulie::{corner_poly, q_poly, u_invariants};

    #[test]
    fn chart_point_matches_constructed_element() {
        let inv = chart_point(&[1.0, -0.5], &[0.3, 0.9], 0.2);
        let x = construct_u(&inv, (2, 0)).unwrap();
        assert!(u_invariants(&x).unwrap().max_diff(&inv) < 1e-10);
    }

    #[test]
    fn pullbacks_agree_with_numeric_invariants() {
        let mut r = rng(3);
        for n in 1..=3 {
            let pb = chart_pullbacks(n);
            let y = crate::sampling::random_rss(&mut r, n);
            let got: Vec<f64> = pb.iter().map(|p| p.eval(&y.entries())).collect();
            let want = raw_invariants(&y).coords();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10 * (1.0 + w.abs()), "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn q_in_the_chart_n1() {
        let spec = QuadratureSpec::default();
        let t = transfer_polynomial(1, &q_poly(1), 2, &spec).unwrap();
        assert_eq!(t.quotient.f, parse_poly("a1^2 + dR^2 + 2*b0", &chart_vars(1)).unwrap());
        let t = transfer_polynomial(1, &corner_poly(1), 1, &spec).unwrap();
        assert_eq!(t.quotient.f, parse_poly("dR", &chart_vars(1)).unwrap());
    }

    #[test]
    fn degree_bound_too_small_is_reported() {
        let spec = QuadratureSpec::default();
        assert!(matches!(transfer_polynomial(1, &q_poly(1), 1, &spec), Err(Error::FitResidual(_))));
    }
}
