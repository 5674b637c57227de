//! Quadrature on boxes in `R^d` for integrands that decay like Gaussians, plus the
//! one-dimensional rules and the minimiser used to centre them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::sampling::{rng, std_normal};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadMethod {
    /// Lattice trapezoid rule, step halved per level: along geodesic rays for orbital
    /// integrals, per axis on boxes. Spectrally accurate for smooth, rapidly decaying
    /// integrands; the default.
    #[default]
    Trapezoid,
    /// Tensor Gauss-Hermite with affine rescaling per axis.
    TensorGauss,
    /// Double-exponential `sinh-sinh` substitution followed by the trapezoid rule.
    TanhSinh,
    /// Seeded importance sampling with a Gaussian proposal.
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadMethod,
    /// Target error relative to `∫|f|`.
    pub tolerance: f64,
    pub max_level: u32,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { method: QuadMethod::Trapezoid, tolerance: 1e-10, max_level: 6, seed: 0x5eed }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_method(mut self, m: QuadMethod) -> Self {
        self.method = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    /// `|value| < tolerance * max(1, e^{-2 pi Q})`.
    pub vanishes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct COrbResult {
    pub value: C64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub vanishes: bool,
}

/// Outcome of a box integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub abs: f64,
    pub evals: u64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Golub-Welsch).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(m, m, |r, c| {
        if r + 1 == c || c + 1 == r {
            let k = r.max(c) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    golub_welsch(j, 2.0)
}

/// Gauss-Hermite nodes and weights for the weight `e^{-x^2}`.
pub fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(m, m, |r, c| if r + 1 == c || c + 1 == r { (r.max(c) as f64 / 2.0).sqrt() } else { 0.0 });
    golub_welsch(j, core::f64::consts::PI.sqrt())
}

fn golub_welsch(j: DMatrix<f64>, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let m = j.nrows();
    let e = SymmetricEigen::new(j);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let x = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let w = idx.iter().map(|&i| mu0 * e.eigenvectors[(0, i)].powi(2)).collect();
    (x, w)
}

/// Nelder-Mead minimisation from `x0` with initial simplex size `step`.
pub fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, ftol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let d = x0.len();
    if d == 0 {
        return (Vec::new(), f(x0));
    }
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if (vals[d] - vals[0]).abs() <= ftol * (1.0 + vals[0].abs()) {
            let size = pts.iter().skip(1).map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
            if size < 1e-7 {
                break;
            }
        }
        let centroid: Vec<f64> = (0..d).map(|k| pts[..d].iter().map(|p| p[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (pts[d][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            let xc = if fr < vals[d] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[d].min(fr) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    let p: Vec<f64> = (0..d).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = f(&p);
                    pts[i] = p;
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best])
}

fn tensor_sum(rules: &[(Vec<f64>, Vec<f64>)], f: &mut dyn FnMut(&[f64]) -> f64) -> (f64, f64, u64) {
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let (mut s, mut sa, mut n) = (0.0, 0.0, 0u64);
    if rules.iter().any(|r| r.0.is_empty()) {
        return (0.0, 0.0, 0);
    }
    loop {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = rules[k].0[idx[k]];
            w *= rules[k].1[idx[k]];
        }
        if w != 0.0 {
            let v = f(&x);
            s += w * v;
            sa += w * v.abs();
            n += 1;
        }
        let mut k = d;
        loop {
            if k == 0 {
                return (s, sa, n);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < rules[k].0.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn trapezoid_rule(lo: f64, hi: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / intervals as f64;
    let x = (0..=intervals).map(|i| lo + h * i as f64).collect();
    let w = (0..=intervals).map(|i| if i == 0 || i == intervals { h / 2.0 } else { h }).collect();
    (x, w)
}

fn sinh_sinh_rule(c: f64, sigma: f64, h: f64, tmax: f64) -> (Vec<f64>, Vec<f64>) {
    let k = (tmax / h).ceil() as i64;
    let half_pi = core::f64::consts::FRAC_PI_2;
    let mut x = Vec::new();
    let mut w = Vec::new();
    for i in -k..=k {
        let t = i as f64 * h;
        let inner = half_pi * t.sinh();
        let jac = sigma * half_pi * t.cosh() * inner.cosh();
        if !jac.is_finite() {
            continue;
        }
        x.push(c + sigma * inner.sinh());
        w.push(h * jac);
    }
    (x, w)
}

/// Integrate over `R^d`, with the mass of `f` inside `bounds` (the integrand is taken to
/// be negligible outside; callers choose `bounds` from its envelope).
pub fn integrate_box(bounds: &[(f64, f64)], f: &mut dyn FnMut(&[f64]) -> f64, spec: &QuadratureSpec) -> Result<Integral> {
    let d = bounds.len();
    let mut total_evals = 0u64;
    let converged = |err: f64, abs: f64| err <= spec.tolerance * abs;
    match spec.method {
        QuadMethod::Trapezoid | QuadMethod::TensorGauss | QuadMethod::TanhSinh => {
            let mut prev: Option<f64> = None;
            for level in 0..=spec.max_level {
                let rules: Vec<(Vec<f64>, Vec<f64>)> = bounds
                    .iter()
                    .map(|&(lo, hi)| match spec.method {
                        QuadMethod::Trapezoid => trapezoid_rule(lo, hi, 8 << level),
                        QuadMethod::TensorGauss => {
                            let m = 6 << level;
                            let (x, w) = gauss_hermite(m);
                            let c = 0.5 * (lo + hi);
                            let sigma = 0.5 * (hi - lo) / 7.0;
                            let w2 = w.iter().zip(&x).map(|(wi, xi)| sigma * (wi.ln() + xi * xi).exp()).collect();
                            (x.iter().map(|xi| c + sigma * xi).collect(), w2)
                        }
                        _ => {
                            let c = 0.5 * (lo + hi);
                            let sigma = 0.25 * (hi - lo);
                            sinh_sinh_rule(c, sigma, 0.5 / (1u64 << level) as f64, 3.0)
                        }
                    })
                    .collect();
                let (s, sa, n) = tensor_sum(&rules, f);
                total_evals += n;
                if let Some(p) = prev {
                    let err = (s - p).abs();
                    if level >= 2 && converged(err, sa) {
                        return Ok(Integral { value: s, error: err, abs: sa, evals: total_evals });
                    }
                }
                prev = Some(s);
            }
            Err(Error::QuadratureDivergence(format!("no convergence after {} levels ({} evaluations)", spec.max_level, total_evals)))
        }
        QuadMethod::MonteCarlo => {
            let mut r = rng(spec.seed);
            let centers: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
            let sig: Vec<f64> = bounds.iter().map(|&(lo, hi)| 0.25 * (hi - lo)).collect();
            let norm: f64 = sig.iter().map(|s| s * (2.0 * core::f64::consts::PI).sqrt()).product();
            let (mut s1, mut s2, mut sa) = (0.0, 0.0, 0.0);
            let mut n = 0u64;
            let mut x = vec![0.0; d];
            for level in 0..=spec.max_level {
                let batch = 4096u64 << (2 * level.min(6));
                for _ in 0..batch {
                    let mut logq = 0.0;
                    for k in 0..d {
                        let z = std_normal(&mut r);
                        x[k] = centers[k] + sig[k] * z;
                        logq -= 0.5 * z * z;
                    }
                    let v = f(&x) * norm / logq.exp();
                    s1 += v;
                    s2 += v * v;
                    sa += v.abs();
                    n += 1;
                }
                let mean = s1 / n as f64;
                let var = (s2 / n as f64 - mean * mean).max(0.0);
                let se = (var / n as f64).sqrt();
                let abs = sa / n as f64;
                if converged(se, abs) || level == spec.max_level {
                    if !converged(se, abs) {
                        return Err(Error::QuadratureDivergence(format!("Monte Carlo standard error {se:.3e} after {n} samples")));
                    }
                    return Ok(Integral { value: mean, error: se, abs, evals: n });
                }
            }
            Err(Error::QuadratureDivergence("Monte Carlo did not run".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((s - core::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, v) = nelder_mead(&mut |p: &[f64]| (p[0] - 1.0).powi(2) + 3.0 * (p[1] + 2.0).powi(2), &[0.0, 0.0], 1.0, 1e-14, 5000);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5 && v < 1e-10);
    }

    #[test]
    fn every_method_integrates_a_gaussian() {
        let exact = core::f64::consts::PI;
        for (m, tol) in [(QuadMethod::Trapezoid, 1e-12), (QuadMethod::TensorGauss, 1e-9), (QuadMethod::TanhSinh, 1e-10), (QuadMethod::MonteCarlo, 3e-3)] {
            let spec = QuadratureSpec::default().with_method(m).with_tolerance(tol);
            let r = integrate_box(&[(-7.0, 7.0), (-7.0, 7.0)], &mut |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp(), &spec).unwrap();
            assert!((r.value - exact).abs() < 10.0 * tol * exact + 1e-12, "{m:?}: {}", r.value);
        }
    }
}
