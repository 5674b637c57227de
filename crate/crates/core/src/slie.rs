//! The symmetric-space Lie algebra `s_{n+1} = i M_{n+1}(R)` under conjugation by
//! `GL_n(R)`: quadratic forms, invariants, matching signature, normal forms and
//! transfer factors.
//!
//! An element `y = iA` is stored through the real matrix `A`, written in blocks
//! `A = [[A0, v], [w^T, d]]`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{conditioning, real_eig_desc, sym_signature};
#[allow(unused_imports)]
use num_traits::Float;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SElement {
    a: DMatrix<f64>,
}

impl SElement {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() < 2 {
            return Err(Error::Shape(format!("need a square matrix of size >= 2, got {}x{}", a.nrows(), a.ncols())));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }
        Ok(Self { a })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("rows of unequal length".into()));
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.a.nrows() - 1
    }

    /// The real matrix `A` with `y = iA`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a0(&self) -> DMatrix<f64> {
        let n = self.n();
        self.a.view((0, 0), (n, n)).into_owned()
    }

    pub fn v_r(&self) -> DVector<f64> {
        let n = self.n();
        self.a.view((0, n), (n, 1)).column(0).into_owned()
    }

    pub fn w_r(&self) -> DVector<f64> {
        let n = self.n();
        self.a.view((n, 0), (1, n)).transpose().column(0).into_owned()
    }

    pub fn d_r(&self) -> f64 {
        let n = self.n();
        self.a[(n, n)]
    }

    /// Row-major entries of `A`.
    pub fn entries(&self) -> Vec<f64> {
        let m = self.a.nrows();
        (0..m * m).map(|k| self.a[(k / m, k % m)]).collect()
    }
}

/// `Q(y) = tr(A^2)`; equals `-tr(y^2)`.
pub fn q_form(y: &SElement) -> f64 {
    (y.a() * y.a()).trace()
}

/// `Q⁺ - Q⁻ = Σ A_ij^2`, the majorant defining the Gaussian.
pub fn q_star(y: &SElement) -> f64 {
    y.a().iter().map(|x| x * x).sum()
}

fn krylov(a0: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let n = a0.nrows();
    let mut k = DMatrix::zeros(n, n);
    let mut cur = v.clone();
    for j in 0..n {
        k.set_column(j, &cur);
        cur = a0 * cur;
    }
    k
}

/// Worst conditioning of the two Krylov matrices `[v, A0 v, ...]`, `[w, A0^T w, ...]`.
pub fn rss_margin(y: &SElement) -> f64 {
    let a0 = y.a0();
    conditioning(&krylov(&a0, &y.v_r())).min(conditioning(&krylov(&a0.transpose(), &y.w_r())))
}

pub fn is_rss(y: &SElement) -> bool {
    rss_margin(y) > 1e-10
}

/// Real coordinates of the categorical quotient: characteristic polynomial of `A0`,
/// moments `b_k = w^T A0^k v`, and the corner `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: f64,
}

impl Invariant {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn max_diff(&self, o: &Invariant) -> f64 {
        let mut m = (self.d - o.d).abs();
        for (x, y) in self.a.iter().zip(&o.a).chain(self.b.iter().zip(&o.b)) {
            m = m.max((x - y).abs());
        }
        if self.a.len() != o.a.len() || self.b.len() != o.b.len() {
            return f64::INFINITY;
        }
        m
    }

    /// Coordinates in the order `a_1..a_n, b_0..b_{n-1}, d`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.a.clone();
        c.extend_from_slice(&self.b);
        c.push(self.d);
        c
    }
}

/// Quotient map value; defined everywhere, `rss` is the caller's business.
pub fn raw_invariants(y: &SElement) -> Invariant {
    let a0 = y.a0();
    let n = y.n();
    let a = crate::linalg::char_poly(&a0);
    let w = y.w_r();
    let mut cur = y.v_r();
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        b.push(w.dot(&cur));
        cur = &a0 * cur;
    }
    Invariant { a, b, d: y.d_r() }
}

pub fn invariants(y: &SElement) -> Result<Invariant> {
    if !is_rss(y) {
        return Err(Error::NotRegularSemisimple(format!("Krylov conditioning {:.3e}", rss_margin(y))));
    }
    Ok(raw_invariants(y))
}

/// `b_0..b_{upto-1}`, continued past `n` with the recursion given by Cayley-Hamilton.
pub fn extend_moments(inv: &Invariant, upto: usize) -> Vec<f64> {
    let n = inv.n();
    let mut b = inv.b.clone();
    while b.len() < upto {
        let m = b.len();
        let next = -(1..=n).map(|k| inv.a[k - 1] * b[m - k]).sum::<f64>();
        b.push(next);
    }
    b.truncate(upto.max(n));
    b
}

/// `[b_{j+k}]_{j,k<n}`.
pub fn hankel(inv: &Invariant) -> DMatrix<f64> {
    let n = inv.n();
    let b = extend_moments(inv, 2 * n - 1);
    DMatrix::from_fn(n, n, |j, k| b[j + k])
}

/// Signature `(r, s)` of the hermitian space `V` whose unitary Lie algebra contains an
/// element matching `y`.
pub fn match_signature(y: &SElement) -> Result<(usize, usize)> {
    let inv = invariants(y)?;
    match_signature_inv(&inv)
}

pub fn match_signature_inv(inv: &Invariant) -> Result<(usize, usize)> {
    sym_signature(&hankel(inv))
}

/// `diag(g, 1) A diag(g, 1)^{-1}`.
pub fn conj_act(g: &DMatrix<f64>, y: &SElement) -> Result<SElement> {
    let n = y.n();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::Shape(format!("conjugator must be {n}x{n}")));
    }
    let gi = g.clone().try_inverse().ok_or_else(|| Error::SingularMatrix("conjugator".into()))?;
    let mut big = DMatrix::<f64>::identity(n + 1, n + 1);
    let mut bigi = DMatrix::<f64>::identity(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(g);
    bigi.view_mut((0, 0), (n, n)).copy_from(&gi);
    SElement::new(&big * y.a() * &bigi)
}

/// The element `i [[diag λ, μ], [μ'^T, d]]` with diagonal `A0`.
pub fn shaped(lambda: &[f64], mu: &[f64], mu_prime: &[f64], d: f64) -> Result<SElement> {
    let n = lambda.len();
    if mu.len() != n || mu_prime.len() != n || n == 0 {
        return Err(Error::Shape("λ, μ, μ' must have one common positive length".into()));
    }
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for k in 0..n {
        a[(k, k)] = lambda[k];
        a[(k, n)] = mu[k];
        a[(n, k)] = mu_prime[k];
    }
    a[(n, n)] = d;
    SElement::new(a)
}

/// Conjugator to the normal form: `conj_act(g, y)` has `A0 = diag(λ)` with `λ`
/// descending and `v = w = μ` with `μ > 0`.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub g: DMatrix<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub y: SElement,
}

pub fn normal_form_n0(y: &SElement) -> Result<NormalForm> {
    let n = y.n();
    let sig = match_signature(y)?;
    if sig != (n, 0) {
        return Err(Error::SignatureMismatch(format!("element matches signature {sig:?}, not ({n}, 0)")));
    }
    let a0 = y.a0();
    let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || a0[(i, j)] == 0.0));
    let (lambda, p) = if is_diag {
        // exact: a permutation sorting the diagonal
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| a0[(j, j)].total_cmp(&a0[(i, i)]));
        let p = DMatrix::from_fn(n, n, |r, c| if r == idx[c] { 1.0 } else { 0.0 });
        (idx.iter().map(|&i| a0[(i, i)]).collect::<Vec<_>>(), p)
    } else {
        real_eig_desc(&a0)?
    };
    let pinv = p.clone().try_inverse().ok_or_else(|| Error::SingularMatrix("eigenvector matrix".into()))?;
    let v1 = &pinv * y.v_r();
    let w1 = p.transpose() * y.w_r();
    let mut dg = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let ratio = w1[k] / v1[k];
        if ratio.is_nan() || ratio <= 0.0 {
            return Err(Error::Internal(format!("normal form ratio {ratio} is not positive")));
        }
        let s = if ratio == 1.0 { 1.0 } else { ratio.sqrt() };
        dg[(k, k)] = v1[k].signum() * s;
    }
    let g = &dg * &pinv;
    let yn = conj_act(&g, y)?;
    let mu = (0..n).map(|k| yn.a()[(k, n)]).collect();
    Ok(NormalForm { g, lambda, mu, y: yn })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TransferConvention {
    /// `sign det(e, eA, ..., eA^n)`, `e` the last coordinate row vector.
    Zhang,
    /// `η(g)` for `g` moving the element to its normal form; on elements not matching
    /// `(n, 0)` it falls back to `Zhang`.
    #[default]
    Example,
}

pub fn transfer_factor(y: &SElement, conv: TransferConvention) -> Result<i8> {
    if !is_rss(y) {
        return Err(Error::NotRegularSemisimple(format!("Krylov conditioning {:.3e}", rss_margin(y))));
    }
    match conv {
        TransferConvention::Zhang => Ok(zhang_sign(y)),
        TransferConvention::Example => {
            let n = y.n();
            if match_signature(y)? != (n, 0) {
                return Ok(zhang_sign(y));
            }
            let nf = normal_form_n0(y)?;
            Ok(if nf.g.determinant() > 0.0 { 1 } else { -1 })
        }
    }
}

fn zhang_sign(y: &SElement) -> i8 {
    let m = y.n() + 1;
    let mut r = DMatrix::<f64>::zeros(m, m);
    let mut row = DVector::<f64>::zeros(m);
    row[m - 1] = 1.0;
    let at = y.a().transpose();
    for k in 0..m {
        r.set_row(k, &row.transpose());
        row = &at * row;
    }
    if r.determinant() > 0.0 {
        1
    } else {
        -1
    }
}

/// `ε_Zhang / ε_Example` on elements matching `(n, 0)`, read off at a few normal-form
/// elements; errors if the samples disagree.
pub fn convention_ratio(n: usize) -> Result<i8> {
    let mut seen = None;
    for t in 0..4 {
        let lambda: Vec<f64> = (0..n).map(|k| (n - k) as f64 + 0.25 * t as f64 * (k as f64 + 1.0).recip()).collect();
        let mu: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * ((k + t) % 3) as f64).collect();
        let y = shaped(&lambda, &mu, &mu, 0.3 * t as f64 - 0.2)?;
        let r = transfer_factor(&y, TransferConvention::Zhang)? * transfer_factor(&y, TransferConvention::Example)?;
        match seen {
            None => seen = Some(r),
            Some(s) if s != r => return Err(Error::Internal("transfer conventions differ by a non-constant".into())),
            _ => {}
        }
    }
    seen.ok_or_else(|| Error::Internal("no samples".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y1(a: f64, y1: f64, y2: f64, d: f64) -> SElement {
        SElement::new(DMatrix::from_row_slice(2, 2, &[a, y1, y2, d])).unwrap()
    }

    #[test]
    fn q_forms_n1() {
        let y = y1(1.0, 2.0, 3.0, 4.0);
        assert_eq!(q_form(&y), 1.0 + 16.0 + 12.0);
        assert_eq!(q_star(&y), 30.0);
    }

    #[test]
    fn n1_matching_follows_sign_of_product() {
        assert_eq!(match_signature(&y1(0.3, 1.0, 2.0, 0.0)).unwrap(), (1, 0));
        assert_eq!(match_signature(&y1(0.3, 1.0, -2.0, 0.0)).unwrap(), (0, 1));
        assert!(matches!(match_signature(&y1(0.3, 0.0, 2.0, 0.0)), Err(Error::NotRegularSemisimple(_))));
    }

    #[test]
    fn zhang_n1_is_minus_sign_of_w() {
        assert_eq!(transfer_factor(&y1(0.0, 1.0, 2.0, 0.0), TransferConvention::Zhang).unwrap(), -1);
        assert_eq!(transfer_factor(&y1(0.0, -1.0, -2.0, 0.0), TransferConvention::Zhang).unwrap(), 1);
    }

    #[test]
    fn example_convention_is_one_on_normal_forms() {
        let y = shaped(&[2.0, 1.0], &[1.0, 0.5], &[1.0, 0.5], 0.0).unwrap();
        assert_eq!(transfer_factor(&y, TransferConvention::Example).unwrap(), 1);
    }
}
