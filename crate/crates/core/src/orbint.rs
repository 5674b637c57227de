//! Orbital integrals, reduced to the connected Borel subgroup `B⁰ = {diag(e^s) N(u)}`
//! of upper triangular matrices with positive diagonal.
//!
//! For an `(O(n), η)`-equivariant integrand the twisted integral over `GL_n(R)` equals
//! `2 ∫_{B⁰} f(b^{-1} y b) Π ds Π du`. The integrand decays like `e^{-2π Q*(b^{-1} y b)}`;
//! this energy is convex on `B⁰`, so the integral is centred at its minimum, whitened by
//! the Hessian there, and truncated where the energy has risen by a fixed amount.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::cayley::{eps_group, GroupElement};
use crate::pullback::GaussPoly;
use crate::quadrature::{integrate_box, nelder_mead, COrbResult, Integral, OrbResult, QuadMethod, QuadratureSpec};
use crate::sampling::{gaussian_matrix, random_gl, random_orthogonal, rng};
use crate::slie::{is_rss, q_form, rss_margin, transfer_factor, SElement, TransferConvention};
use crate::{Error, Result, C64};

/// Total mass of the two components of `GL_n(R)` relative to `B⁰` (`vol O(n) = 1`, each
/// component contributing equally for equivariant integrands).
pub const HAAR_SCALE: f64 = 2.0;

/// Energy rise `2π ΔQ*` at which the integrand is treated as zero.
const CUTOFF: f64 = 50.0;

/// Coordinates `θ = (s_1..s_n, u_kl for k < l lex)` of `B⁰`; dimension `n(n+1)/2`.
pub fn borel_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// `(b, b^{-1})` for `b = diag(e^s) N(u)`.
pub fn borel_element(n: usize, theta: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut nu = DMatrix::<f64>::identity(n, n);
    let mut idx = n;
    for k in 0..n {
        for l in k + 1..n {
            nu[(k, l)] = theta[idx];
            idx += 1;
        }
    }
    // N is unit upper triangular; invert by back substitution
    let mut ninv = DMatrix::<f64>::identity(n, n);
    for c in 0..n {
        for r in (0..c).rev() {
            let mut acc = 0.0;
            for k in r + 1..=c {
                acc += nu[(r, k)] * ninv[(k, c)];
            }
            ninv[(r, c)] = -acc;
        }
    }
    let mut b = nu;
    let mut binv = ninv;
    for k in 0..n {
        let e = theta[k].exp();
        for c in 0..n {
            b[(k, c)] *= e;
            binv[(c, k)] /= e;
        }
    }
    (b, binv)
}

/// `diag(b^{-1}, 1) A diag(b, 1)`.
fn act(a: &DMatrix<f64>, b: &DMatrix<f64>, binv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let mut out = a.clone();
    // left factor
    let top = binv * a.rows(0, n);
    out.rows_mut(0, n).copy_from(&top);
    let left = out.columns(0, n) * b;
    out.columns_mut(0, n).copy_from(&left);
    out
}

/// Whitened coordinates `θ = θ* + V diag(σ) z` around the energy minimum, with the box
/// in `z` where the energy rise stays below the cutoff.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub theta_star: Vec<f64>,
    pub axes: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub e_min: f64,
}

impl Envelope {
    pub fn theta(&self, z: &[f64]) -> Vec<f64> {
        let d = z.len();
        (0..d).map(|i| self.theta_star[i] + (0..d).map(|k| self.axes[(i, k)] * self.sigma[k] * z[k]).sum::<f64>()).collect()
    }

    pub fn jacobian(&self) -> f64 {
        self.sigma.iter().product()
    }

    fn scaled(&self, f: f64) -> Vec<(f64, f64)> {
        self.bounds.iter().map(|&(lo, hi)| (lo * f, hi * f)).collect()
    }
}

pub fn envelope(dim: usize, energy: &dyn Fn(&[f64]) -> f64) -> Result<Envelope> {
    let mut f = |t: &[f64]| energy(t);
    let (mut x, mut fx) = nelder_mead(&mut f, &vec![0.0; dim], 0.5, 1e-15, 20_000);
    for step in [0.1, 0.01] {
        let (x2, f2) = nelder_mead(&mut f, &x, step, 1e-16, 20_000);
        if f2 <= fx {
            x = x2;
            fx = f2;
        }
    }
    if !fx.is_finite() {
        return Err(Error::QuadratureDivergence("energy minimum is not finite".into()));
    }
    let h = 1e-4;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = x.clone();
        p[di] += si;
        p[dj] += sj;
        energy(&p)
    };
    for i in 0..dim {
        for j in i..dim {
            let v = if i == j {
                (at(i, h, i, 0.0) - 2.0 * fx + at(i, -h, i, 0.0)) / (h * h)
            } else {
                (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let two_pi = 2.0 * core::f64::consts::PI;
    let sigma: Vec<f64> = eig.eigenvalues.iter().map(|l| 1.0 / (two_pi * l.max(1e-10 * top)).sqrt()).collect();
    let mut env = Envelope { theta_star: x, axes: eig.eigenvectors, sigma, bounds: vec![(0.0, 0.0); dim], e_min: fx };
    for k in 0..dim {
        let mut ends = [0.0; 2];
        for (side, dir) in [-1.0, 1.0].iter().enumerate() {
            let mut t = 0.25;
            loop {
                let mut z = vec![0.0; dim];
                z[k] = dir * t;
                let rise = two_pi * (energy(&env.theta(&z)) - fx);
                if rise > CUTOFF || rise.is_nan() {
                    break;
                }
                t += 0.25;
                if t > 400.0 {
                    return Err(Error::QuadratureDivergence(format!("integrand does not decay along principal axis {k}")));
                }
            }
            ends[side] = dir * (t + 0.5);
        }
        env.bounds[k] = (ends[0], ends[1]);
    }
    Ok(env)
}

/// Geodesic polar chart of `G/K` around the energy minimum: `g = g* exp(X/2)` with `X`
/// symmetric, `X = Σ_k c_k S_k` over the basis `E_kk`, `E_kl + E_lk` (`k < l`), and
/// `c = W z` whitening the Hessian of the energy at `X = 0`.
#[derive(Clone, Debug)]
pub struct GeoChart {
    pub n: usize,
    pub g_star: DMatrix<f64>,
    pub whiten: DMatrix<f64>,
    pub e_center: f64,
}

impl GeoChart {
    fn dim(&self) -> usize {
        self.whiten.nrows()
    }

    fn sym(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let c = &self.whiten * nalgebra::DVector::from_column_slice(z);
        let mut x = DMatrix::<f64>::zeros(n, n);
        let mut idx = 0;
        for k in 0..n {
            x[(k, k)] = c[idx];
            idx += 1;
        }
        for k in 0..n {
            for l in k + 1..n {
                x[(k, l)] = c[idx];
                x[(l, k)] = c[idx];
                idx += 1;
            }
        }
        x
    }

    /// `(g, g^{-1}, J)` at `z`, `J = Π_{i<j} sinh(δ/2)/(δ/2)` over eigenvalue gaps `δ`
    /// of `X`, the density of the invariant measure in the exponential chart.
    pub fn point(&self, z: &[f64]) -> (DMatrix<f64>, DMatrix<f64>, f64) {
        let x = self.sym(z);
        let e = SymmetricEigen::new(x);
        let n = self.n;
        let u = &e.eigenvectors;
        let half = |sgn: f64| {
            let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| (sgn * 0.5 * l).exp()));
            u * d * u.transpose()
        };
        let mut jac = 1.0;
        for i in 0..n {
            for j in i + 1..n {
                let t = 0.5 * (e.eigenvalues[i] - e.eigenvalues[j]);
                if t.abs() > 1e-12 {
                    jac *= t.sinh() / t;
                }
            }
        }
        let g = &self.g_star * half(1.0);
        let gi = half(-1.0) * self.g_star.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(n, n));
        (g, gi, jac)
    }
}

/// Locate the minimum of `energy(g, g^{-1})` over `B⁰` and whiten the geodesic chart there.
pub fn geo_chart(n: usize, energy: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64) -> Result<GeoChart> {
    let dim = borel_dim(n);
    let mut f = |t: &[f64]| {
        let (b, bi) = borel_element(n, t);
        energy(&b, &bi)
    };
    let (mut x, mut fx) = nelder_mead(&mut f, &vec![0.0; dim], 0.5, 1e-15, 20_000);
    for step in [0.1, 0.01] {
        let (x2, f2) = nelder_mead(&mut f, &x, step, 1e-16, 20_000);
        if f2 <= fx {
            x = x2;
            fx = f2;
        }
    }
    if !fx.is_finite() {
        return Err(Error::QuadratureDivergence("energy minimum is not finite".into()));
    }
    let g_star = borel_element(n, &x).0;
    let mut chart = GeoChart { n, g_star, whiten: DMatrix::identity(dim, dim), e_center: fx };
    let ez = |c: &GeoChart, z: &[f64]| {
        let (g, gi, _) = c.point(z);
        energy(&g, &gi)
    };
    let h = 1e-4;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    let at = |i: usize, si: f64, j: usize, sj: f64| {
        let mut p = vec![0.0; dim];
        p[i] += si;
        p[j] += sj;
        ez(&chart, &p)
    };
    for i in 0..dim {
        for j in i..dim {
            let v = if i == j {
                (at(i, h, i, 0.0) - 2.0 * fx + at(i, -h, i, 0.0)) / (h * h)
            } else {
                (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let two_pi = 2.0 * core::f64::consts::PI;
    let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / (two_pi * l.max(1e-10 * top)).sqrt()));
    chart.whiten = &eig.eigenvectors * scale;
    Ok(chart)
}

/// `∫_R |r|^{d-1} f(r ω) dr` by a lattice trapezoid walked out from `r = 0` until the
/// energy has risen past the cutoff; convexity along geodesics makes the rise monotone.
fn radial(chart: &GeoChart, dir: &[f64], energy: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64, f: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> [f64; 2], tol: f64, max_halvings: u32, evals: &mut u64) -> Result<([f64; 2], f64, f64)> {
    let d = dir.len();
    let two_pi = 2.0 * core::f64::consts::PI;
    let node = |r: f64, evals: &mut u64| -> ([f64; 2], f64, bool) {
        let z: Vec<f64> = dir.iter().map(|w| w * r).collect();
        let (g, gi, jac) = chart.point(&z);
        *evals += 1;
        let rise = two_pi * (energy(&g, &gi) - chart.e_center);
        let wgt = r.abs().powi(d as i32 - 1) * jac;
        let v = f(&g, &gi);
        ([v[0] * wgt, v[1] * wgt], (v[0].abs() + v[1].abs()) * wgt, rise > CUTOFF || rise.is_nan())
    };
    let mut h = 0.5;
    let (mut sum, mut abs) = ([0.0; 2], 0.0);
    let (mut lo, mut hi) = (0i64, 0i64);
    let (v0, a0, _) = node(0.0, evals);
    sum[0] += v0[0];
    sum[1] += v0[1];
    abs += a0;
    for side in [-1i64, 1] {
        let mut i = side;
        loop {
            let (v, a, done) = node(i as f64 * h, evals);
            sum[0] += v[0];
            sum[1] += v[1];
            abs += a;
            if done {
                break;
            }
            i += side;
            if i.abs() > 4000 {
                return Err(Error::QuadratureDivergence("integrand does not decay along a geodesic".into()));
            }
        }
        if side < 0 {
            lo = i;
        } else {
            hi = i;
        }
    }
    let mut total = [sum[0] * h, sum[1] * h];
    let mut total_abs = abs * h;
    for _ in 0..max_halvings {
        h *= 0.5;
        lo *= 2;
        hi *= 2;
        let (mut s_new, mut a_new) = ([0.0; 2], 0.0);
        let mut i = lo + 1;
        while i < hi {
            let (v, a, _) = node(i as f64 * h, evals);
            s_new[0] += v[0];
            s_new[1] += v[1];
            a_new += a;
            i += 2;
        }
        let next = [0.5 * total[0] + h * s_new[0], 0.5 * total[1] + h * s_new[1]];
        let diff = (next[0] - total[0]).abs() + (next[1] - total[1]).abs();
        total = next;
        total_abs = 0.5 * total_abs + h * a_new;
        if diff <= tol * total_abs || total_abs == 0.0 {
            return Ok((total, total_abs, diff));
        }
    }
    Err(Error::QuadratureDivergence(format!("radial integral did not settle after {max_halvings} halvings")))
}

/// `∫_{B⁰} f(b) db` for a right-`K`-invariant integrand, computed as
/// `2^{-n} ∫_{Sym_n} f(g* exp(X/2)) J(X) dX` in geodesic polar coordinates. Directions:
/// the pair `±1` for `n = 1`, a Gauss-Legendre x trapezoid product rule on `S^2` for
/// `n = 2`, seeded Monte Carlo on the sphere beyond.
pub fn integrate_geodesic(chart: &GeoChart, energy: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64, f: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> [f64; 2], spec: &QuadratureSpec) -> Result<(C64, f64, f64, u64)> {
    let d = chart.dim();
    let n = chart.n;
    let tol_r = (spec.tolerance * 0.03).max(1e-15);
    let halvings = spec.max_level.max(4) + 2;
    let mut evals = 0u64;
    // ∫_{R^d} = (1/2) ∫_{S^{d-1}} ∫_R |r|^{d-1}
    let norm = 0.5 * chart.whiten.determinant().abs() / (1u64 << n) as f64;
    let out = |v: [f64; 2], err: f64, abs: f64, evals: u64| (C64::new(v[0], v[1]) * norm, err * norm, abs * norm, evals);
    match d {
        1 => {
            let (v, a, e) = radial(chart, &[1.0], energy, f, spec.tolerance, halvings, &mut evals)?;
            // the full line covers both directions of S^0
            Ok(out([2.0 * v[0], 2.0 * v[1]], 2.0 * e, 2.0 * a, evals))
        }
        3 => {
            let mut prev: Option<[f64; 2]> = None;
            let mut m = 6usize;
            for _ in 0..=spec.max_level {
                let (ct, wt) = crate::quadrature::gauss_legendre(m);
                let nphi = 2 * m;
                let (mut s, mut a, mut e) = ([0.0; 2], 0.0, 0.0);
                for (c, w) in ct.iter().zip(&wt) {
                    let st = (1.0 - c * c).max(0.0).sqrt();
                    for j in 0..nphi {
                        let ph = 2.0 * core::f64::consts::PI * j as f64 / nphi as f64;
                        let dir = [st * ph.cos(), st * ph.sin(), *c];
                        let (v, va, ve) = radial(chart, &dir, energy, f, tol_r, halvings, &mut evals)?;
                        let ww = w * 2.0 * core::f64::consts::PI / nphi as f64;
                        s[0] += ww * v[0];
                        s[1] += ww * v[1];
                        a += ww * va;
                        e += ww * ve;
                    }
                }
                if let Some(p) = prev {
                    let diff = (s[0] - p[0]).abs() + (s[1] - p[1]).abs();
                    if diff <= spec.tolerance * a || a == 0.0 {
                        return Ok(out(s, diff + e, a, evals));
                    }
                }
                prev = Some(s);
                m *= 2;
            }
            Err(Error::QuadratureDivergence(format!("angular rule did not settle ({evals} evaluations)")))
        }
        _ => {
            let mut r = rng(spec.seed);
            let area = sphere_area(d);
            let (mut s1, mut s2, mut sa, mut cnt) = ([0.0; 2], [0.0; 2], 0.0, 0u64);
            for level in 0..=spec.max_level.min(8) {
                for _ in 0..(64u64 << level) {
                    let mut dir: Vec<f64> = (0..d).map(|_| crate::sampling::std_normal(&mut r)).collect();
                    let nr = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                    dir.iter_mut().for_each(|x| *x /= nr);
                    let (v, va, _) = radial(chart, &dir, energy, f, tol_r, halvings, &mut evals)?;
                    for k in 0..2 {
                        s1[k] += v[k] * area;
                        s2[k] += (v[k] * area).powi(2);
                    }
                    sa += va * area;
                    cnt += 1;
                }
                let c = cnt as f64;
                let mean = [s1[0] / c, s1[1] / c];
                let se = (0..2).map(|k| ((s2[k] / c - mean[k] * mean[k]).max(0.0) / c).sqrt()).sum::<f64>();
                if se <= spec.tolerance * sa / c {
                    return Ok(out(mean, se, sa / c, evals));
                }
            }
            let c = cnt as f64;
            Err(Error::QuadratureDivergence(format!("Monte Carlo over directions stalled after {c} rays")))
        }
    }
}

fn sphere_area(d: usize) -> f64 {
    // |S^{d-1}| = 2 π^{d/2} / Γ(d/2)
    let half = d as f64 / 2.0;
    let mut gamma = if d % 2 == 0 { 1.0 } else { core::f64::consts::PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * core::f64::consts::PI.powf(half) / gamma
}

/// Integrates a right-`K`-invariant `f(g, g^{-1})` over `B⁰` with energy `energy`,
/// after factoring `e^{-2π E_min}` out of `f` (it receives `E_min` as third argument).
/// Returns the value, error estimate, evaluation count and `E_min`.
pub fn integrate_orbit(n: usize, energy: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>) -> f64, f: &dyn Fn(&DMatrix<f64>, &DMatrix<f64>, f64) -> [f64; 2], spec: &QuadratureSpec) -> Result<(C64, f64, u64, f64)> {
    if spec.method == QuadMethod::Trapezoid {
        let chart = geo_chart(n, energy)?;
        let e0 = chart.e_center;
        let (v, err, _, evals) = integrate_geodesic(&chart, energy, &|g, gi| f(g, gi, e0), spec)?;
        return Ok((v, err, evals, e0));
    }
    let et = |t: &[f64]| {
        let (b, bi) = borel_element(n, t);
        energy(&b, &bi)
    };
    let env = envelope(borel_dim(n), &et)?;
    let e0 = env.e_min;
    let part = |k: usize| {
        integrate_borel(&env, &|t: &[f64]| {
            let (b, bi) = borel_element(n, t);
            f(&b, &bi, e0)[k]
        }, spec)
    };
    let (re, im) = (part(0)?, part(1)?);
    Ok((C64::new(re.value, im.value), re.error + im.error, re.evals + im.evals, e0))
}

/// Box integration of `f(θ)` over `B⁰` in whitened coordinates, checking the
/// truncation by repeating on a box half again as large.
pub fn integrate_borel(env: &Envelope, f: &dyn Fn(&[f64]) -> f64, spec: &QuadratureSpec) -> Result<Integral> {
    let mut g = |z: &[f64]| f(&env.theta(z));
    let small = integrate_box(&env.bounds, &mut g, spec)?;
    let large = integrate_box(&env.scaled(1.5), &mut g, spec)?;
    let jac = env.jacobian();
    let err = small.error.max(large.error).max((small.value - large.value).abs());
    Ok(Integral { value: large.value * jac, error: err * jac, abs: large.abs * jac, evals: small.evals + large.evals })
}

/// Checks `f(k^{-1}·y') = η(k) f(y')` on the polynomial part at random `(k, y')`.
pub fn check_lie_equivariance(f: &GaussPoly, samples: usize, seed: u64) -> Result<()> {
    let n = f.n;
    let mut r = rng(seed);
    let cp = f.poly.compile();
    for _ in 0..samples {
        let y = SElement::new(gaussian_matrix(&mut r, n + 1, n + 1, 0.7))?;
        let k = random_orthogonal(&mut r, n);
        let eta = k.determinant().signum();
        let moved = crate::slie::conj_act(&k.transpose(), &y)?;
        let (lhs, rhs) = (cp.eval(&moved.entries()), eta * cp.eval(&y.entries()));
        if (lhs - rhs).abs() > 1e-8 * (1.0 + lhs.abs() + rhs.abs()) {
            return Err(Error::EquivarianceViolation(format!("f(k^-1 y) = {lhs}, η(k) f(y) = {rhs}")));
        }
    }
    Ok(())
}

/// `Orb(y, f) = ε(y) ∫_{GL_n(R)} f(g^{-1} y g) η(g) dg` for `f = poly · e^{-2π Q*}`.
pub fn orb_lie(y: &SElement, f: &GaussPoly, conv: TransferConvention, spec: &QuadratureSpec) -> Result<OrbResult> {
    let n = y.n();
    if f.n != n {
        return Err(Error::Shape(format!("test function lives on s_{}, element on s_{}", f.n + 1, n + 1)));
    }
    if !is_rss(y) {
        return Err(Error::NotRegularSemisimple(format!("Krylov conditioning {:.3e}", rss_margin(y))));
    }
    check_lie_equivariance(f, 8, spec.seed)?;
    let eps = transfer_factor(y, conv)? as f64;
    let a = y.a().clone();
    let energy = |b: &DMatrix<f64>, bi: &DMatrix<f64>| act(&a, b, bi).iter().map(|v| v * v).sum::<f64>();
    let cp = f.poly.compile();
    let two_pi = 2.0 * core::f64::consts::PI;
    let integrand = |b: &DMatrix<f64>, bi: &DMatrix<f64>, e_min: f64| {
        let m = act(&a, b, bi);
        let e: f64 = m.iter().map(|v| v * v).sum();
        let rise = two_pi * (e - e_min);
        if !(rise <= 700.0) {
            return [0.0, 0.0];
        }
        // row-major entries
        let k = n + 1;
        let entries: Vec<f64> = (0..k * k).map(|i| m[(i / k, i % k)]).collect();
        [cp.eval(&entries) * (-rise).exp(), 0.0]
    };
    let (v, err, evals, e_min) = integrate_orbit(n, &energy, &integrand, spec)?;
    let g = (-two_pi * e_min).exp() * HAAR_SCALE;
    let value = eps * v.re * g;
    let scale = (-two_pi * q_form(y)).exp().max(1.0);
    Ok(OrbResult { value, error_estimate: err * g, evaluations: evals, vanishes: value.abs() < spec.tolerance * scale })
}

/// A function on the group side that can be integrated over orbits: it is a sum of
/// pieces, each concentrated near the orbit of a Lie algebra element.
pub trait GroupFunction {
    fn n(&self) -> usize;
    /// Exponent `m` of the character `η'(z) = (z / |z|)^m` used for transfer factors.
    fn eta_exponent(&self) -> i32;
    fn eval(&self, g: &DMatrix<C64>) -> Result<C64>;
    /// Summands not identically zero on the orbit of `gamma`, each paired with a Lie
    /// algebra element `y` such that the summand at `b^{-1} γ b` decays like
    /// `e^{-2π Q*(b^{-1} y b)}`.
    fn pieces(&self, gamma: &GroupElement) -> Result<Vec<(&dyn GroupFunction, SElement)>>;
}

/// `diag(b^{-1}, 1) γ diag(b, 1)` for complex `γ`.
fn act_c(g: &DMatrix<C64>, b: &DMatrix<f64>, binv: &DMatrix<f64>) -> DMatrix<C64> {
    let n = b.nrows();
    let bc = b.map(|x| C64::new(x, 0.0));
    let bic = binv.map(|x| C64::new(x, 0.0));
    let mut out = g.clone();
    let top = bic * g.rows(0, n);
    out.rows_mut(0, n).copy_from(&top);
    let left = out.columns(0, n) * bc;
    out.columns_mut(0, n).copy_from(&left);
    out
}

/// Checks `φ(k^{-1} γ' k) = η(k) φ(γ')` at points `γ' = h^{-1} γ h` of the orbit.
pub fn check_group_equivariance(f: &dyn GroupFunction, gamma: &GroupElement, samples: usize, seed: u64) -> Result<()> {
    let n = gamma.n();
    let mut r = rng(seed);
    for _ in 0..samples {
        let h = random_gl(&mut r, n);
        let hi = h.clone().try_inverse().ok_or_else(|| Error::SingularMatrix("sample conjugator".into()))?;
        let gp = act_c(gamma.m(), &h, &hi);
        let k = random_orthogonal(&mut r, n);
        let eta = k.determinant().signum();
        let moved = act_c(&gp, &k, &k.transpose());
        let (lhs, rhs) = (f.eval(&moved)?, f.eval(&gp)? * eta);
        if (lhs - rhs).norm() > 1e-8 * (1.0 + lhs.norm() + rhs.norm()) {
            return Err(Error::EquivarianceViolation(format!("φ(k^-1 γ k) = {lhs}, η(k) φ(γ) = {rhs}")));
        }
    }
    Ok(())
}

/// `Orb(γ, φ) = ϵ(γ) ∫_{GL_n(R)} φ(g^{-1} γ g) η(g) dg`, integrated piece by piece.
pub fn orb_group(gamma: &GroupElement, f: &dyn GroupFunction, spec: &QuadratureSpec) -> Result<COrbResult> {
    let n = gamma.n();
    if f.n() != n {
        return Err(Error::Shape(format!("test function lives on S_{}, element on S_{}", f.n() + 1, n + 1)));
    }
    let eps = eps_group(gamma, f.eta_exponent())?;
    check_group_equivariance(f, gamma, 4, spec.seed)?;
    let (mut total, mut err, mut evals) = (C64::new(0.0, 0.0), 0.0, 0u64);
    for (piece, y) in f.pieces(gamma)? {
        let a = y.a().clone();
        let energy = |b: &DMatrix<f64>, bi: &DMatrix<f64>| act(&a, b, bi).iter().map(|v| v * v).sum::<f64>();
        let at = |b: &DMatrix<f64>, bi: &DMatrix<f64>, _: f64| {
            let z = piece.eval(&act_c(gamma.m(), b, bi)).unwrap_or(C64::new(f64::NAN, f64::NAN));
            [z.re, z.im]
        };
        let (v, e, k, _) = integrate_orbit(n, &energy, &at, spec)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::ChartViolation("test function could not be evaluated along the orbit".into()));
        }
        total += v;
        err += e;
        evals += k;
    }
    let value = eps * total * HAAR_SCALE;
    Ok(COrbResult { value, error_estimate: err * HAAR_SCALE, evaluations: evals, vanishes: value.norm() < spec.tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pullback::compute_phi;

    fn y1(a: f64, y1: f64, y2: f64, d: f64) -> SElement {
        SElement::new(DMatrix::from_row_slice(2, 2, &[a, y1, y2, d])).unwrap()
    }

    #[test]
    fn borel_inverse() {
        let (b, bi) = borel_element(3, &[0.1, -0.3, 0.7, 1.5, -2.0, 0.4]);
        assert!((b * bi - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn n1_matching_and_not() {
        let phi = compute_phi(1).unwrap();
        let spec = QuadratureSpec::default();
        for (a, p, q, d) in [(0.3, 0.5, 0.7, -0.2), (0.0, 2.0, 0.01, 0.1), (0.1, 0.05, 0.04, 0.0)] {
            let r = orb_lie(&y1(a, p, q, d), &phi, TransferConvention::Example, &spec).unwrap();
            let want = (-2.0 * core::f64::consts::PI * (a * a + d * d + 2.0 * p * q)).exp();
            assert!((r.value - want).abs() < 1e-10, "{} vs {want}", r.value);
            let r = orb_lie(&y1(a, p, -q, d), &phi, TransferConvention::Example, &spec).unwrap();
            assert!(r.value.abs() < 1e-10 && r.vanishes);
        }
    }
}
