//! The group setting `S_{n+1} = {γ : γ γ̄ = 1}`: Cayley transforms to `s_{n+1}`, the
//! transfer factor `ϵ`, the correction factor `ρ_ξ`, chart Gaussians and the assembled
//! Gaussian test function.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{cdet, char_poly, to_complex, unit_power};
use crate::orbint::GroupFunction;
use crate::pullback::{compute_phi, GaussEval};
use crate::sampling::{random_unitary, rng};
use crate::slie::{convention_ratio, match_signature, q_form, q_star, SElement};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    m: DMatrix<C64>,
}

impl GroupElement {
    /// Checks `γ γ̄ = 1`.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::Shape(format!("need a square matrix of size >= 2, got {}x{}", m.nrows(), m.ncols())));
        }
        let k = m.nrows();
        let res = (&m * m.map(|z| z.conj()) - DMatrix::<C64>::identity(k, k)).norm();
        if !(res <= 1e-9 * (1.0 + m.norm_squared())) {
            return Err(Error::Shape(format!("γ γ̄ differs from 1 by {res:.3e}")));
        }
        Ok(Self { m })
    }

    pub fn n(&self) -> usize {
        self.m.nrows() - 1
    }

    pub fn m(&self) -> &DMatrix<C64> {
        &self.m
    }
}

/// A Cayley chart: the open set `|det(γ - ξ)| >= margin`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    pub xi: C64,
    pub margin: f64,
}

impl Chart {
    pub fn new(xi: C64, margin: f64) -> Result<Self> {
        if (xi.norm() - 1.0).abs() > 1e-12 || !(margin >= 0.0) {
            return Err(Error::Shape(format!("chart needs |ξ| = 1 and margin >= 0, got {xi}, {margin}")));
        }
        Ok(Self { xi, margin })
    }
}

fn shifted(g: &DMatrix<C64>, xi: C64) -> DMatrix<C64> {
    let k = g.nrows();
    g - DMatrix::<C64>::identity(k, k) * xi
}

/// `c_ξ(γ) = (γ + ξ)(γ - ξ)^{-1}`, returned as `y = iA`.
pub fn cayley(gamma: &GroupElement, chart: &Chart) -> Result<SElement> {
    cayley_matrix(gamma.m(), chart)
}

fn cayley_matrix(g: &DMatrix<C64>, chart: &Chart) -> Result<SElement> {
    let k = g.nrows();
    let minus = shifted(g, chart.xi);
    let det = cdet(&minus);
    if !(det.norm() >= chart.margin) || det.norm() == 0.0 {
        return Err(Error::ChartViolation(format!("|det(γ - ξ)| = {:.3e} is below the margin {:.3e}", det.norm(), chart.margin)));
    }
    let inv = minus.try_inverse().ok_or_else(|| Error::ChartViolation("γ - ξ is singular".into()))?;
    let y = (g + DMatrix::<C64>::identity(k, k) * chart.xi) * inv;
    // y = iA with A real
    let a = y.map(|z| z.im);
    let stray = y.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if stray > 1e-8 * (1.0 + a.norm()) {
        return Err(Error::Internal(format!("Cayley image has real part {stray:.3e}")));
    }
    SElement::new(a)
}

/// `ξ (y + 1)(y - 1)^{-1}`.
pub fn cayley_inverse(y: &SElement, xi: C64) -> Result<GroupElement> {
    let k = y.n() + 1;
    let yc = y.a().map(|x| C64::new(0.0, x));
    let id = DMatrix::<C64>::identity(k, k);
    let inv = (&yc - &id).try_inverse().ok_or_else(|| Error::SingularMatrix("y - 1".into()))?;
    GroupElement::new((yc + id) * inv * xi)
}

fn krylov_rows(g: &DMatrix<C64>) -> DMatrix<C64> {
    let k = g.nrows();
    let mut r = DMatrix::<C64>::zeros(k, k);
    let mut row = DMatrix::<C64>::zeros(1, k);
    row[(0, k - 1)] = C64::new(1.0, 0.0);
    for i in 0..k {
        r.set_row(i, &row.row(0));
        row = &row * g;
    }
    r
}

fn check_odd(m: i32) -> Result<()> {
    if m % 2 == 0 {
        return Err(Error::Shape(format!("the character exponent must be odd, got {m}")));
    }
    Ok(())
}

/// `ϵ(γ) = η'(det(γ)^{-⌊(n+1)/2⌋} det(e, eγ, ..., eγ^n))`, `η'(z) = (z/|z|)^m`.
pub fn eps_group(gamma: &GroupElement, m: i32) -> Result<C64> {
    check_odd(m)?;
    let n = gamma.n();
    let r = krylov_rows(gamma.m());
    let scale: f64 = (0..=n).map(|i| r.row(i).norm().max(1e-300)).product();
    let dr = cdet(&r);
    if dr.norm() <= 1e-10 * scale {
        return Err(Error::NotRegularSemisimple("rows e γ^k are dependent".into()));
    }
    let z = cdet(gamma.m()).powi(-(((n + 1) / 2) as i32)) * dr;
    Ok(unit_power(z, m))
}

/// `ρ_ξ(γ) = η'((2iξ)^{n(n+1)/2} det(γ - ξ)^{-n} det(γ)^{⌊(n+1)/2⌋})`.
pub fn rho_xi(gamma: &GroupElement, chart: &Chart, m: i32) -> Result<C64> {
    rho_matrix(gamma.m(), chart, m)
}

fn rho_matrix(g: &DMatrix<C64>, chart: &Chart, m: i32) -> Result<C64> {
    check_odd(m)?;
    let n = g.nrows() - 1;
    let det = cdet(&shifted(g, chart.xi));
    if !(det.norm() >= chart.margin) || det.norm() == 0.0 {
        return Err(Error::ChartViolation(format!("|det(γ - ξ)| = {:.3e} is below the margin", det.norm())));
    }
    let z = (C64::new(0.0, 2.0) * chart.xi).powi((n * (n + 1) / 2) as i32) * det.powi(-(n as i32)) * cdet(g).powi(((n + 1) / 2) as i32);
    Ok(unit_power(z, m))
}

/// Realified invariants of `γ = [[γ0, b], [c, d]]` under `GL_n(R)`: coefficients of the
/// characteristic polynomial of `γ0`, `c γ0^k b` for `k < n`, and `d`, each as (re, im).
pub fn group_invariants(g: &DMatrix<C64>) -> Vec<f64> {
    let n = g.nrows() - 1;
    let g0 = g.view((0, 0), (n, n)).into_owned();
    let mut out = Vec::with_capacity(4 * n + 2);
    for z in char_poly(&g0) {
        out.push(z.re);
        out.push(z.im);
    }
    let c = g.view((n, 0), (1, n)).into_owned();
    let mut cur = g.view((0, n), (n, 1)).into_owned();
    for _ in 0..n {
        let z = (&c * &cur)[(0, 0)];
        out.push(z.re);
        out.push(z.im);
        cur = &g0 * cur;
    }
    out.push(g[(n, n)].re);
    out.push(g[(n, n)].im);
    out
}

/// Smooth bump in invariant coordinates: 1 on the ball of radius `plateau` around
/// `center`, decaying with the profile `exp(1 + 1/(t^2 - 1))` to 0 at `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub plateau: f64,
}

impl BumpSpec {
    pub fn new(center: Vec<f64>, radius: f64, plateau: f64) -> Result<Self> {
        if !(radius > 0.0) || !(plateau >= 0.0) || plateau >= radius {
            return Err(Error::Shape(format!("bump needs 0 <= plateau < radius, got {plateau}, {radius}")));
        }
        Ok(Self { center, radius, plateau })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if r <= self.plateau {
            return 1.0;
        }
        if r >= self.radius {
            return 0.0;
        }
        let t = (r - self.plateau) / (self.radius - self.plateau);
        (1.0 + 1.0 / (t * t - 1.0)).exp()
    }
}

/// `C^∞` step from 0 (at `lo`) to 1 (at `2 lo`), built from the same profile.
fn smoothstep(x: f64, lo: f64) -> f64 {
    if x <= lo {
        return 0.0;
    }
    if x >= 2.0 * lo {
        return 1.0;
    }
    let t = (x - lo) / lo;
    let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    f(t) / (f(t) + f(1.0 - t))
}

/// Cut-offs `β_i(|det(γ - ξ_i)|)` normalised to sum to one wherever some `β_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub xis: Vec<C64>,
    pub margin: f64,
}

impl Partition {
    /// `2(n+2)` equally spaced points; the margin guarantees that for unitary `γ` some
    /// `ξ_i` has every eigenvalue at distance at least half the spacing.
    pub fn standard(n: usize) -> Self {
        let count = 2 * (n + 2);
        let xis = (0..count).map(|k| C64::from_polar(1.0, 2.0 * core::f64::consts::PI * (k as f64 + 0.5) / count as f64)).collect();
        let r = 2.0 * (core::f64::consts::PI / (2.0 * count as f64)).sin();
        Self { xis, margin: 0.5 * r.powi(n as i32 + 1) }
    }

    pub fn weights(&self, g: &DMatrix<C64>) -> Vec<f64> {
        let beta: Vec<f64> = self.xis.iter().map(|&xi| smoothstep(cdet(&shifted(g, xi)).norm(), self.margin)).collect();
        let total: f64 = beta.iter().sum();
        if total == 0.0 {
            return beta;
        }
        beta.iter().map(|b| b / total).collect()
    }
}

/// `φ_λ = c_n ρ_ξ(γ) λ(γ) Φ(c_ξ(γ))`, with `λ = (partition weight) · bump(inv γ)
/// · (e^{2π Q(c_ξ γ)} if requested)`; `c_n` converts the transfer factor built into
/// `ρ_ξ` to the one used for orbital integrals on `s_{n+1}`.
#[derive(Clone, Debug)]
pub struct ChartGaussian {
    pub n: usize,
    pub chart: Chart,
    pub m: i32,
    pub bump: BumpSpec,
    pub times_exp_q: bool,
    /// Partition and the index of this chart in it.
    pub partition: Option<(Partition, usize)>,
    c_n: f64,
    phi: GaussEval,
}

impl ChartGaussian {
    pub fn new(n: usize, chart: Chart, bump: BumpSpec, m: i32, times_exp_q: bool) -> Result<Self> {
        check_odd(m)?;
        if bump.center.len() != 4 * n + 2 {
            return Err(Error::Shape(format!("bump center needs {} coordinates", 4 * n + 2)));
        }
        let c_n = convention_ratio(n)? as f64;
        Ok(Self { n, chart, m, bump, times_exp_q, partition: None, c_n, phi: compute_phi(n)?.evaluator() })
    }

    /// Partition weight times bump, the part of `λ` that does not need the chart.
    fn cutoff(&self, g: &DMatrix<C64>) -> f64 {
        let mut w = self.bump.eval(&group_invariants(g));
        if let Some((p, i)) = &self.partition {
            if w != 0.0 {
                w *= p.weights(g)[*i];
            }
        }
        w
    }

    /// `λ(γ)`; zero outside the bump or the partition weight.
    pub fn weight(&self, g: &DMatrix<C64>) -> Result<f64> {
        let w = self.cutoff(g);
        if w != 0.0 && self.times_exp_q {
            let y = cayley_matrix(g, &self.chart)?;
            return Ok(w * (2.0 * core::f64::consts::PI * q_form(&y)).exp());
        }
        Ok(w)
    }
}

impl GroupFunction for ChartGaussian {
    fn n(&self) -> usize {
        self.n
    }

    fn eta_exponent(&self) -> i32 {
        self.m
    }

    fn eval(&self, g: &DMatrix<C64>) -> Result<C64> {
        let w = self.cutoff(g);
        if w == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let y = cayley_matrix(g, &self.chart)?;
        let rho = rho_matrix(g, &self.chart, self.m)?;
        // e^{2πQ} and the Gaussian of Φ combined, so neither overflows alone
        let q = if self.times_exp_q { q_form(&y) } else { 0.0 };
        let gauss = (-2.0 * core::f64::consts::PI * (q_star(&y) - q)).exp();
        Ok(rho * (self.c_n * w * self.phi.poly_at(&y.entries()) * gauss))
    }

    fn pieces(&self, gamma: &GroupElement) -> Result<Vec<(&dyn GroupFunction, SElement)>> {
        if self.cutoff(gamma.m()) == 0.0 {
            return Ok(Vec::new());
        }
        Ok(alloc::vec![(self as &dyn GroupFunction, cayley(gamma, &self.chart)?)])
    }
}

/// `Σ_i φ_{λ_i}` over a partition of unity subordinate to the charts, times a global
/// bump equal to 1 on the invariants of `U(n+1)`.
#[derive(Clone, Debug)]
pub struct AssembledGaussian {
    pub n: usize,
    pub m: i32,
    pub charts: Vec<ChartGaussian>,
    /// Largest `|Σ λ_i e^{-2πQ} - 1|` seen on the sampled invariants of `U(n+1)`.
    pub partition_deficit: f64,
}

/// Radius of a ball containing the invariants of every `δ ∈ U(n+1)`: `|a_k| <= C(n,k)`,
/// `|c δ0^k b| <= 1`, `|d| <= 1`.
pub fn unitary_invariant_radius(n: usize) -> f64 {
    let mut s = 0.0;
    let mut c = 1.0;
    for k in 1..=n {
        c = c * (n + 1 - k) as f64 / k as f64;
        s += c * c;
    }
    (s + n as f64 + 1.0).sqrt()
}

pub fn assemble_gaussian(n: usize, m: i32, partition: Option<Partition>, seed: u64) -> Result<AssembledGaussian> {
    let partition = partition.unwrap_or_else(|| Partition::standard(n));
    let rt = unitary_invariant_radius(n);
    let bump = BumpSpec::new(alloc::vec![0.0; 4 * n + 2], 2.0 * rt, rt)?;
    let mut charts = Vec::with_capacity(partition.xis.len());
    for (i, &xi) in partition.xis.iter().enumerate() {
        let mut c = ChartGaussian::new(n, Chart::new(xi, partition.margin)?, bump.clone(), m, true)?;
        c.partition = Some((partition.clone(), i));
        charts.push(c);
    }
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let d = random_unitary(&mut r, n + 1);
        let inv = group_invariants(&d);
        let total: f64 = partition.weights(&d).iter().sum::<f64>() * bump.eval(&inv);
        worst = worst.max((total - 1.0).abs());
    }
    if worst > 1e-10 {
        return Err(Error::PartitionDeficit(format!("partition of unity misses the unitary invariants by {worst:.3e}")));
    }
    Ok(AssembledGaussian { n, m, charts, partition_deficit: worst })
}

impl GroupFunction for AssembledGaussian {
    fn n(&self) -> usize {
        self.n
    }

    fn eta_exponent(&self) -> i32 {
        self.m
    }

    fn eval(&self, g: &DMatrix<C64>) -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for c in &self.charts {
            s += c.eval(g)?;
        }
        Ok(s)
    }

    fn pieces(&self, gamma: &GroupElement) -> Result<Vec<(&dyn GroupFunction, SElement)>> {
        let mut out = Vec::new();
        for c in &self.charts {
            out.extend(c.pieces(gamma)?);
        }
        Ok(out)
    }
}

/// Matching signature through the Cayley chart of `Ξ` with the largest `|det(γ - ξ)|`.
pub fn match_signature_group(gamma: &GroupElement) -> Result<(usize, usize)> {
    let p = Partition::standard(gamma.n());
    let best = p
        .xis
        .iter()
        .copied()
        .max_by(|a, b| cdet(&shifted(gamma.m(), *a)).norm().total_cmp(&cdet(&shifted(gamma.m(), *b)).norm()))
        .ok_or_else(|| Error::Internal("empty chart set".into()))?;
    match_signature(&cayley(gamma, &Chart::new(best, 0.0)?)?)
}

/// `ε(c_ξ(γ))` in the convention `sign det(e, ey, ..., ey^n)` read off the complex
/// matrix, for comparison with `ρ_ξ ϵ`.
pub fn zhang_eps_complex(y: &SElement) -> C64 {
    let n = y.n();
    let yc = y.a().map(|x| C64::new(0.0, x));
    let d = cdet(&krylov_rows(&yc)) * C64::new(0.0, -1.0).powi((n * (n + 1) / 2) as i32);
    d / d.norm()
}

/// Real matrix as a group-side complex matrix.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    to_complex(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_rss;

    #[test]
    fn round_trip_and_transfer_factor_identity() {
        let mut r = rng(3);
        for n in 1..=2 {
            for k in 0..20 {
                let y = random_rss(&mut r, n);
                let xi = C64::from_polar(1.0, 0.3 + k as f64);
                let g = cayley_inverse(&y, xi).unwrap();
                let chart = Chart::new(xi, 1e-8).unwrap();
                let back = cayley(&g, &chart).unwrap();
                assert!((back.a() - y.a()).norm() < 1e-9 * (1.0 + y.a().norm()));
                for m in [1, 3] {
                    let lhs = zhang_eps_complex(&back);
                    let rhs = rho_xi(&g, &chart, m).unwrap() * eps_group(&g, m).unwrap();
                    assert!((lhs - rhs).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn standard_partition_covers_unitary_invariants() {
        for n in 1..=2 {
            assert!(assemble_gaussian(n, 1, None, 9).unwrap().partition_deficit < 1e-10);
        }
    }
}
