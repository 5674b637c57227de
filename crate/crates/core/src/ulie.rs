//! Unitary Lie algebras `u(V ⊕ C)` for a hermitian space `V` of signature `(r, s)`,
//! their invariants, constructions from invariants, and orbital integrals over `U(n)`
//! for the positive definite case.
//!
//! An element is `x = [[x0, u], [-u^† J0, i d]]` with `J0 = diag(1_r, -1_s)`; `x0 = iH`
//! with `H` self-adjoint for `J0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{vars, Poly, Vars};
use crate::linalg::{char_poly, sym_eig_desc, sym_signature};
use crate::quadrature::{gauss_legendre, OrbResult, QuadMethod, QuadratureSpec};
use crate::sampling::{random_unitary, rng};
use crate::slie::{hankel, Invariant, SElement};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct UElement {
    x: DMatrix<C64>,
    sig: (usize, usize),
}

fn j0(sig: (usize, usize)) -> DMatrix<C64> {
    let n = sig.0 + sig.1;
    DMatrix::from_fn(n + 1, n + 1, |i, j| if i != j { C64::new(0.0, 0.0) } else if i < sig.0 || i == n { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) })
}

impl UElement {
    /// Checks `x^† J + J x = 0` for `J = diag(J0, 1)`.
    pub fn new(x: DMatrix<C64>, sig: (usize, usize)) -> Result<Self> {
        let n = sig.0 + sig.1;
        if x.nrows() != n + 1 || x.ncols() != n + 1 || n == 0 {
            return Err(Error::Shape(format!("expected a {}x{} matrix for signature {sig:?}", n + 1, n + 1)));
        }
        let j = j0(sig);
        let res = (x.adjoint() * &j + &j * &x).norm();
        let scale = x.norm().max(1.0);
        if res > 1e-9 * scale {
            return Err(Error::Shape(format!("matrix is not in the unitary Lie algebra (residual {res:.3e})")));
        }
        Ok(Self { x, sig })
    }

    pub fn n(&self) -> usize {
        self.sig.0 + self.sig.1
    }

    pub fn sig(&self) -> (usize, usize) {
        self.sig
    }

    pub fn x(&self) -> &DMatrix<C64> {
        &self.x
    }

    /// `Re x_kl` (row-major) followed by `Im x_kl`, the coordinates of [`u_vars`].
    pub fn coords(&self) -> Vec<f64> {
        let m = self.n() + 1;
        let mut c: Vec<f64> = (0..m * m).map(|k| self.x[(k / m, k % m)].re).collect();
        c.extend((0..m * m).map(|k| self.x[(k / m, k % m)].im));
        c
    }

    pub fn d_r(&self) -> f64 {
        let n = self.n();
        self.x[(n, n)].im
    }
}

/// Polynomial coordinates on `M_{n+1}(C)`: `re{k}{l}` then `im{k}{l}`, 1-based.
pub fn u_vars(n: usize) -> Vars {
    let m = n + 1;
    let mut names: Vec<String> = Vec::with_capacity(2 * m * m);
    for part in ["re", "im"] {
        for k in 1..=m {
            for l in 1..=m {
                names.push(format!("{part}{k}{l}"));
            }
        }
    }
    vars(&names)
}

/// `Q(x) = -tr(x^2)`; on the positive definite case it is `Σ |x_kl|^2`.
pub fn q_form_u(x: &UElement) -> f64 {
    -(x.x() * x.x()).trace().re
}

/// `Q` as a polynomial in [`u_vars`] (positive definite case).
pub fn q_poly(n: usize) -> Poly {
    let v = u_vars(n);
    let mut p = Poly::zero(&v);
    for i in 0..v.len() {
        p = &p + &Poly::var(&v, i).pow(2);
    }
    p
}

/// The coordinate `d_R = Im x_{n+1,n+1}`.
pub fn corner_poly(n: usize) -> Poly {
    let v = u_vars(n);
    let m = n + 1;
    Poly::var(&v, m * m + m * m - 1)
}

fn blocks(x: &UElement) -> (DMatrix<C64>, DVector<C64>, DMatrix<C64>) {
    let n = x.n();
    let x0 = x.x.view((0, 0), (n, n)).into_owned();
    let u = x.x.view((0, n), (n, 1)).column(0).into_owned();
    let jj = j0(x.sig).view((0, 0), (n, n)).into_owned();
    (x0, u, jj)
}

fn cconditioning(m: &DMatrix<C64>) -> f64 {
    let s = m.clone().singular_values();
    let hi = s.iter().cloned().fold(0.0, f64::max);
    let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

pub fn is_rss_u(x: &UElement) -> bool {
    let (x0, u, _) = blocks(x);
    let n = x.n();
    let mut k = DMatrix::<C64>::zeros(n, n);
    let mut cur = u;
    for j in 0..n {
        k.set_column(j, &cur);
        cur = &x0 * cur;
    }
    cconditioning(&k) > 1e-10
}

/// `(char poly of H, b_k = u^† J0 H^k u, d_R)`; agrees with `invariants` on matching
/// elements.
pub fn u_invariants(x: &UElement) -> Result<Invariant> {
    if !is_rss_u(x) {
        return Err(Error::NotRegularSemisimple("Krylov matrix of (x0, u) is singular".into()));
    }
    let (x0, u, jj) = blocks(x);
    let h = x0 * (-I);
    let n = x.n();
    let cp = char_poly(&h);
    let a: Vec<f64> = cp.iter().map(|z| z.re).collect();
    let mut b = Vec::with_capacity(n);
    let mut cur = u.clone();
    let ju = &jj * &u;
    for _ in 0..n {
        b.push(ju.dotc(&cur).re);
        cur = &h * cur;
    }
    Ok(Invariant { a, b, d: x.d_r() })
}

fn companion(a: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    let mut c = DMatrix::zeros(n, n);
    for j in 0..n.saturating_sub(1) {
        c[(j + 1, j)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -a[n - 1 - i];
    }
    c
}

/// An element of `u(V ⊕ C)`, `V` of signature `sig`, with the given invariants. The
/// rounding error of the congruence is removed by a few defect-correction passes.
pub fn construct_u(inv: &Invariant, sig: (usize, usize)) -> Result<UElement> {
    let mut x = construct_u_once(inv, sig)?;
    let mut defect = u_invariants(&x).map(|b| b.max_diff(inv)).unwrap_or(f64::INFINITY);
    let mut target = inv.clone();
    for _ in 0..4 {
        if defect == 0.0 {
            break;
        }
        let got = u_invariants(&x)?;
        let shift = |t: &[f64], want: &[f64], have: &[f64]| -> Vec<f64> { t.iter().zip(want).zip(have).map(|((t, w), h)| t + (w - h)).collect() };
        target = Invariant { a: shift(&target.a, &inv.a, &got.a), b: shift(&target.b, &inv.b, &got.b), d: inv.d };
        let Ok(next) = construct_u_once(&target, sig) else { break };
        let d = u_invariants(&next).map(|b| b.max_diff(inv)).unwrap_or(f64::INFINITY);
        if d >= defect {
            break;
        }
        x = next;
        defect = d;
    }
    Ok(x)
}

fn construct_u_once(inv: &Invariant, sig: (usize, usize)) -> Result<UElement> {
    let n = inv.n();
    if inv.b.len() != n || sig.0 + sig.1 != n || n == 0 {
        return Err(Error::Shape(format!("invariant of size {n} with signature {sig:?}")));
    }
    let b = hankel(inv);
    let found = sym_signature(&b)?;
    if found != sig {
        return Err(Error::SignatureMismatch(format!("invariant matches {found:?}, not {sig:?}")));
    }
    if let Some(x) = diagonal_realization(inv, sig) {
        return Ok(x);
    }
    // Gram matrix of the cyclic basis H^j u is the Hankel matrix; diagonalise it.
    let (vals, vecs) = sym_eig_desc(&b);
    let p = DMatrix::from_fn(n, n, |r, c| vecs[(r, c)] / vals[c].abs().sqrt());
    let pinv = p.clone().try_inverse().ok_or_else(|| Error::SingularMatrix("congruence".into()))?;
    let hmat = &pinv * companion(&inv.a) * &p;
    let mut e1 = DVector::<f64>::zeros(n);
    e1[0] = 1.0;
    let u = &pinv * e1;
    let mut x = DMatrix::<C64>::zeros(n + 1, n + 1);
    for r in 0..n {
        for c in 0..n {
            x[(r, c)] = I * hmat[(r, c)];
        }
        x[(r, n)] = C64::new(u[r], 0.0);
        let jr = if r < sig.0 { 1.0 } else { -1.0 };
        x[(n, r)] = C64::new(-u[r] * jr, 0.0);
    }
    x[(n, n)] = I * inv.d;
    UElement::new(x, sig)
}

/// Real simple roots of `λ^n + a_1 λ^{n-1} + ... + a_n`, Newton-polished, or `None`.
fn real_roots(a: &[f64]) -> Option<Vec<f64>> {
    let c = companion(a);
    let scale = c.norm().max(1.0);
    let mut roots = Vec::with_capacity(a.len());
    for z in c.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-7 * scale {
            return None;
        }
        roots.push(z.re);
    }
    for l in roots.iter_mut() {
        for _ in 0..3 {
            let (mut p, mut dp) = (1.0, 0.0);
            for &ak in a {
                dp = dp * *l + p;
                p = p * *l + ak;
            }
            if dp == 0.0 {
                break;
            }
            *l -= p / dp;
        }
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    if roots.windows(2).any(|w| (w[0] - w[1]).abs() <= 1e-8 * scale) {
        return None;
    }
    Some(roots)
}

/// `H = diag(λ)`, `u_j = sqrt|r_j|` with `J = diag(sign r_j)`, where `Σ r_j λ_j^k = b_k`.
/// Much better conditioned than the Hankel congruence when the spectrum is real.
fn diagonal_realization(inv: &Invariant, sig: (usize, usize)) -> Option<UElement> {
    let n = inv.n();
    let lambda = real_roots(&inv.a)?;
    let v = DMatrix::from_fn(n, n, |k, j| lambda[j].powi(k as i32));
    let r = v.lu().solve(&DVector::from_column_slice(&inv.b))?;
    if r.iter().any(|w| *w == 0.0 || !w.is_finite()) || r.iter().filter(|w| **w > 0.0).count() != sig.0 {
        return None;
    }
    let order: Vec<usize> = (0..n).filter(|&j| r[j] > 0.0).chain((0..n).filter(|&j| r[j] < 0.0)).collect();
    let mut x = DMatrix::<C64>::zeros(n + 1, n + 1);
    for (i, &j) in order.iter().enumerate() {
        x[(i, i)] = I * lambda[j];
        let u = r[j].abs().sqrt();
        x[(i, n)] = C64::new(u, 0.0);
        x[(n, i)] = C64::new(-u * r[j].signum(), 0.0);
    }
    x[(n, n)] = I * inv.d;
    UElement::new(x, sig).ok()
}

/// An element of `s_{n+1}` with the given invariants: companion `A0`, `v = e_1`,
/// `w = (b_0, ..., b_{n-1})`.
pub fn construct_s(inv: &Invariant) -> Result<SElement> {
    let n = inv.n();
    if inv.b.len() != n || n == 0 {
        return Err(Error::Shape("invariant vectors of unequal length".into()));
    }
    let c = companion(&inv.a);
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&c);
    a[(0, n)] = 1.0;
    for k in 0..n {
        a[(n, k)] = inv.b[k];
    }
    a[(n, n)] = inv.d;
    SElement::new(a)
}

/// `diag(g, 1)^{-1} x diag(g, 1)` for `g ∈ U(n)`.
pub fn conj_u(g: &DMatrix<C64>, x: &UElement) -> Result<UElement> {
    let n = x.n();
    let mut big = DMatrix::<C64>::identity(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(g);
    let y = big.adjoint() * x.x() * &big;
    UElement::new(y, x.sig)
}

/// Product rule on `U(n)` (`n <= 2`) reproducing Haar averages of polynomial functions
/// of the entries exactly once the level is high enough.
fn unitary_rule(n: usize, level: u32) -> Vec<(DMatrix<C64>, f64)> {
    let two_pi = 2.0 * core::f64::consts::PI;
    let m = 4usize << level;
    match n {
        1 => (0..m).map(|k| (DMatrix::from_element(1, 1, C64::from_polar(1.0, two_pi * k as f64 / m as f64)), 1.0 / m as f64)).collect(),
        _ => {
            // e^{iα} [[e^{iψ} cos θ, e^{iχ} sin θ], [-e^{-iχ} sin θ, e^{-iψ} cos θ]],
            // Haar density sin 2θ on θ ∈ [0, π/2]
            let (gx, gw) = gauss_legendre(2 + (2usize << level));
            let mut out = Vec::with_capacity(m * m * m * gx.len());
            let q = core::f64::consts::FRAC_PI_4;
            for (t, wt) in gx.iter().zip(&gw) {
                let th = q * (t + 1.0);
                let wth = q * wt * (2.0 * th).sin();
                let (c, s) = (th.cos(), th.sin());
                for ia in 0..m {
                    let ea = C64::from_polar(1.0, two_pi * ia as f64 / m as f64);
                    for ip in 0..m {
                        let ep = C64::from_polar(1.0, two_pi * ip as f64 / m as f64);
                        for ic in 0..m {
                            let ec = C64::from_polar(1.0, two_pi * ic as f64 / m as f64);
                            let g = DMatrix::from_row_slice(2, 2, &[ep * c, ec * s, -ec.conj() * s, ep.conj() * c]) * ea;
                            out.push((g, wth / (m * m * m) as f64));
                        }
                    }
                }
            }
            out
        }
    }
}

/// Haar average over `U(n)` of `p(g^{-1} x g)`.
pub fn unitary_average(x: &UElement, p: &Poly, spec: &QuadratureSpec) -> Result<(f64, f64, u64)> {
    let n = x.n();
    if x.sig() != (n, 0) {
        return Err(Error::SignatureMismatch(format!("orbital integrals over U(n) need signature ({n}, 0), got {:?}", x.sig())));
    }
    if p.vars()[..] != u_vars(n)[..] {
        return Err(Error::Variable("polynomial must be written in the re/im entry coordinates".into()));
    }
    let cp = p.compile();
    let eval = |g: &DMatrix<C64>| -> Result<f64> { Ok(cp.eval(&conj_u(g, x)?.coords())) };
    let scale = 1.0 + p.terms().map(|(_, c)| c.to_f64().abs()).sum::<f64>() * (1.0 + x.x().norm()).powi(p.degree().unwrap_or(0) as i32);
    if n <= 2 && spec.method != QuadMethod::MonteCarlo {
        let mut prev: Option<f64> = None;
        let mut evals = 0u64;
        for level in 0..=spec.max_level.min(4) {
            let mut s = 0.0;
            for (g, w) in unitary_rule(n, level) {
                s += w * eval(&g)?;
                evals += 1;
            }
            if let Some(pv) = prev {
                let err = (s - pv).abs();
                if err <= spec.tolerance * scale {
                    return Ok((s, err, evals));
                }
            }
            prev = Some(s);
        }
        return Err(Error::QuadratureDivergence(format!("unitary product rule did not settle ({evals} evaluations)")));
    }
    let mut r = rng(spec.seed);
    let (mut s1, mut s2, mut cnt) = (0.0, 0.0, 0u64);
    for level in 0..=spec.max_level {
        for _ in 0..(1024u64 << (2 * level.min(6))) {
            let v = eval(&random_unitary(&mut r, n))?;
            s1 += v;
            s2 += v * v;
            cnt += 1;
        }
        let mean = s1 / cnt as f64;
        let se = ((s2 / cnt as f64 - mean * mean).max(0.0) / cnt as f64).sqrt();
        if se <= spec.tolerance * scale {
            return Ok((mean, se, cnt));
        }
    }
    let mean = s1 / cnt as f64;
    let se = ((s2 / cnt as f64 - mean * mean).max(0.0) / cnt as f64).sqrt();
    Err(Error::QuadratureDivergence(format!("Monte Carlo average {mean:.6} has standard error {se:.3e}")))
}

/// `∫_{U(n)} ψ(g^{-1} x g) dg` for `ψ = p · e^{-2πQ}`, Haar probability measure.
pub fn orb_unitary(x: &UElement, p: &Poly, spec: &QuadratureSpec) -> Result<OrbResult> {
    let (avg, err, evals) = unitary_average(x, p, spec)?;
    let g = (-2.0 * core::f64::consts::PI * q_form_u(x)).exp();
    let value = avg * g;
    Ok(OrbResult { value, error_estimate: err * g, evaluations: evals, vanishes: value.abs() < spec.tolerance * g.max(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix, rng};

    fn random_u(seed: u64, n: usize) -> UElement {
        let mut r = rng(seed);
        let h = gaussian_matrix(&mut r, n + 1, n + 1, 1.0);
        let k = gaussian_matrix(&mut r, n + 1, n + 1, 1.0);
        let herm = DMatrix::from_fn(n + 1, n + 1, |i, j| C64::new(h[(i, j)] + h[(j, i)], k[(i, j)] - k[(j, i)]) * 0.5);
        UElement::new(herm * I, (n, 0)).unwrap()
    }

    #[test]
    fn n1_construct_s_example() {
        let inv = Invariant { a: alloc::vec![0.0], b: alloc::vec![1.0], d: 0.0 };
        let y = construct_s(&inv).unwrap();
        assert_eq!(y.entries(), alloc::vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn construct_u_round_trips() {
        for n in 1..=3 {
            let x = random_u(n as u64, n);
            let inv = u_invariants(&x).unwrap();
            let x2 = construct_u(&inv, (n, 0)).unwrap();
            assert!(u_invariants(&x2).unwrap().max_diff(&inv) < 1e-9);
        }
    }

    #[test]
    fn wrong_signature_is_rejected() {
        let inv = Invariant { a: alloc::vec![0.0], b: alloc::vec![-1.0], d: 0.0 };
        assert!(matches!(construct_u(&inv, (1, 0)), Err(Error::SignatureMismatch(_))));
        assert!(construct_u(&inv, (0, 1)).is_ok());
    }

    #[test]
    fn average_of_invariant_polynomial_is_its_value() {
        let x = random_u(7, 2);
        let (avg, _, _) = unitary_average(&x, &q_poly(2), &QuadratureSpec::default()).unwrap();
        assert!((avg - q_form_u(&x)).abs() < 1e-10);
    }
}
