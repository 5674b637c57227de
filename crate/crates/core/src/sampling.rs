//! Seeded random elements: matrices, group elements, and Lie algebra elements with a
//! prescribed matching signature.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::slie::{conj_act, is_rss, shaped, SElement};
use crate::{Result, C64};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Box-Muller.
pub fn std_normal(r: &mut Rand) -> f64 {
    let u1: f64 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

pub fn uniform(r: &mut Rand, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}

pub fn gaussian_matrix(r: &mut Rand, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * std_normal(r))
}

/// Haar-distributed element of `O(n)`.
pub fn random_orthogonal(r: &mut Rand, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(r, n, n, 1.0).qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Haar-distributed element of `U(n)`.
pub fn random_unitary(r: &mut Rand, n: usize) -> DMatrix<C64> {
    let z = DMatrix::from_fn(n, n, |_, _| C64::new(std_normal(r), std_normal(r)));
    let qr = z.qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..n {
        let d = rr[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Well-conditioned element of `GL_n(R)`.
pub fn random_gl(r: &mut Rand, n: usize) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(r, n, n, 1.0) + DMatrix::identity(n, n) * 0.5;
        if crate::linalg::conditioning(&g) > 0.05 {
            return g;
        }
    }
}

/// Regular semisimple element with standard normal entries.
pub fn random_rss(r: &mut Rand, n: usize) -> SElement {
    loop {
        if let Ok(y) = SElement::new(gaussian_matrix(r, n + 1, n + 1, 1.0)) {
            if is_rss(&y) && crate::slie::rss_margin(&y) > 1e-4 {
                return y;
            }
        }
    }
}

/// Element matching signature `(n - neg, neg)`: a normal-shape element with `neg`
/// negative products `μ_k μ'_k`, moved by a random conjugation.
pub fn random_matching(r: &mut Rand, n: usize, neg: usize, scale: f64) -> Result<SElement> {
    let mut lambda: Vec<f64> = (0..n).map(|_| scale * std_normal(r)).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    for k in 1..n {
        if lambda[k - 1] - lambda[k] < 0.2 * scale {
            lambda[k] = lambda[k - 1] - 0.2 * scale - 0.3 * scale * r.random::<f64>();
        }
    }
    let mu: Vec<f64> = (0..n).map(|_| scale * (0.3 + r.random::<f64>())).collect();
    let mut mp: Vec<f64> = (0..n).map(|_| scale * (0.3 + r.random::<f64>())).collect();
    let mut flip: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (r.random::<u64>() % (i as u64 + 1)) as usize;
        flip.swap(i, j);
    }
    for &k in flip.iter().take(neg) {
        mp[k] = -mp[k];
    }
    let d = scale * std_normal(r);
    let y = shaped(&lambda, &mu, &mp, d)?;
    let g = random_gl(r, n);
    conj_act(&g, &y)
}

/// Normal-shape element (`A0` diagonal descending, `v = w > 0`).
pub fn random_normal_shape(r: &mut Rand, n: usize, scale: f64) -> Result<SElement> {
    let y = random_matching(r, n, 0, scale)?;
    Ok(crate::slie::normal_form_n0(&y)?.y)
}
