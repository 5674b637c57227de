//! From the Kudla-Millson form to the Gaussian test function `Φ` on `s_{n+1}`: the
//! orthogonal frame on `s_{n+1}`, the differential of the orbit map from the Borel
//! subgroup, the top-degree pullback, and the intersection point of the symmetric space
//! with the special cycle of an element.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{vars, CompiledPoly, LinMap, Poly, Scalar, Vars};
use crate::kmform::{hermite, omega_gens, x_vars, HoweOperator, Signature};
use crate::slie::{is_rss, match_signature, normal_form_n0, q_star, rss_margin, SElement};
use crate::{Error, Result};

/// Names of the `(n+1)^2` entries of `A`, row-major: `a, y1, y2, d` for `n = 1`, else
/// `y{k}{l}`, `v{k}`, `w{l}`, `d`.
pub fn y_vars(n: usize) -> Vars {
    if n == 1 {
        return vars(&["a", "y1", "y2", "d"]);
    }
    let mut names: Vec<String> = Vec::with_capacity((n + 1) * (n + 1));
    for k in 0..=n {
        for l in 0..=n {
            names.push(match (k < n, l < n) {
                (true, true) => format!("y{}{}", k + 1, l + 1),
                (true, false) => format!("v{}", k + 1),
                (false, true) => format!("w{}", l + 1),
                (false, false) => "d".into(),
            });
        }
    }
    vars(&names)
}

/// Index pairs `(k, l)`, `k < l`, in lexicographic order.
fn pairs(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..m {
        for l in k + 1..m {
            out.push((k, l));
        }
    }
    out
}

/// The frame on `s_{n+1}`: `V⁺ = i Sym`, `V⁻ = i Skew`, coordinates `√2 A_kk`,
/// `A_kl + A_lk`, `A_kl - A_lk` (so that `Σ x^2 = 2 Q*`), and the Borel basis
/// `E_kl`, `k <= l`, row-major.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub n: usize,
    pub sig: Signature,
    pub yvars: Vars,
    pub xvars: Vars,
    /// Frame coordinates as linear forms in the entries of `A`.
    pub x_of_y: LinMap<Scalar>,
    pub borel: Vec<(usize, usize)>,
}

impl FrameData {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("n must be at least 1".into()));
        }
        let m = n + 1;
        let sig = Signature::new(m * (m + 1) / 2, n * m / 2);
        let yvars = y_vars(n);
        let xvars = x_vars(sig.dim());
        let mut rows = Vec::with_capacity(sig.dim());
        let blank = || vec![Scalar::zero(); m * m];
        for k in 0..m {
            let mut r = blank();
            r[k * m + k] = Scalar::sqrt2();
            rows.push(r);
        }
        for sign in [1, -1] {
            for (k, l) in pairs(m) {
                let mut r = blank();
                r[k * m + l] = Scalar::one();
                r[l * m + k] = Scalar::int(sign);
                rows.push(r);
            }
        }
        let x_of_y = LinMap::new(yvars.clone(), xvars.clone(), rows)?;
        let mut borel = Vec::with_capacity(sig.q);
        for k in 0..n {
            for l in k..n {
                borel.push((k, l));
            }
        }
        Ok(Self { n, sig, yvars, xvars, x_of_y, borel })
    }

    /// `x_i(A)` for an exact matrix given row-major.
    fn x_at(&self, a: &[Scalar]) -> Vec<Scalar> {
        (0..self.sig.dim())
            .map(|i| {
                let mut acc = Scalar::zero();
                for (s, c) in self.x_of_y.row(i).iter().enumerate() {
                    if !c.is_zero() && !a[s].is_zero() {
                        acc = &acc + &(c * &a[s]);
                    }
                }
                acc
            })
            .collect()
    }

    /// The `V⁻` basis vector dual to the skew coordinate of the pair `(k, l)`:
    /// `A_kl = 1/2`, `A_lk = -1/2`.
    fn skew_vector(&self, k: usize, l: usize) -> Vec<Scalar> {
        let m = self.n + 1;
        let mut a = vec![Scalar::zero(); m * m];
        a[k * m + l] = Scalar::ratio(1, 2);
        a[l * m + k] = Scalar::ratio(-1, 2);
        a
    }

    pub fn borel_names(&self) -> Vars {
        let names: Vec<String> = self.borel.iter().map(|(k, l)| format!("b{}{}", k + 1, l + 1)).collect();
        vars(&names)
    }

    /// `x(A)` as floats for the entries of an element.
    pub fn coords(&self, y: &SElement) -> Vec<f64> {
        let e = y.entries();
        (0..self.sig.dim()).map(|i| self.x_of_y.row(i).iter().zip(&e).map(|(c, v)| c.to_f64() * v).sum()).collect()
    }
}

fn commutator(m: usize, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); m * m];
    for r in 0..m {
        for c in 0..m {
            let mut acc = Scalar::zero();
            for k in 0..m {
                if !x[r * m + k].is_zero() && !y[k * m + c].is_zero() {
                    acc = &acc + &(&x[r * m + k] * &y[k * m + c]);
                }
                if !y[r * m + k].is_zero() && !x[k * m + c].is_zero() {
                    acc = &acc - &(&y[r * m + k] * &x[k * m + c]);
                }
            }
            out[r * m + c] = acc;
        }
    }
    out
}

/// Differential at the identity of `b ↦ ρ(b) V⁻` as a map from the Borel algebra to
/// `Hom(V⁻, V⁺)`: the Borel vector `X` goes to `pr⁺ ∘ ad(diag(X, 0))` restricted to
/// `V⁻`. Target coordinates are the generators `ω_ij`.
pub fn dbeta(frame: &FrameData) -> Result<LinMap<Scalar>> {
    let m = frame.n + 1;
    let sig = frame.sig;
    let gens = omega_gens(sig);
    let mut mat = vec![vec![Scalar::zero(); frame.borel.len()]; gens.len()];
    for (b, &(k, l)) in frame.borel.iter().enumerate() {
        let mut x = vec![Scalar::zero(); m * m];
        x[k * m + l] = Scalar::one();
        for (j, &(s, t)) in pairs(m).iter().enumerate() {
            let c = commutator(m, &x, &frame.skew_vector(s, t));
            let xs = frame.x_at(&c);
            for i in 0..sig.p {
                mat[crate::kmform::omega_index(sig, i + 1, sig.p + 1 + j)][b] = xs[i].clone();
            }
        }
    }
    LinMap::new(frame.borel_names(), gens, mat)
}

/// A Schwartz function `poly(y) · e^{-2π Q*(y)}` on `s_{n+1}`, `poly` in [`y_vars`].
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly {
    pub n: usize,
    pub poly: Poly,
}

impl GaussPoly {
    pub fn new(n: usize, poly: Poly) -> Result<Self> {
        if poly.vars()[..] != y_vars(n)[..] {
            return Err(Error::Variable(format!("polynomial must be in the entry coordinates of s_{}", n + 1)));
        }
        Ok(Self { n, poly })
    }

    pub fn times(&self, p: &Poly) -> Result<Self> {
        Self::new(self.n, &self.poly * &p.embed(&y_vars(self.n))?)
    }

    pub fn eval(&self, y: &SElement) -> f64 {
        self.poly.eval(&y.entries()) * (-2.0 * core::f64::consts::PI * q_star(y)).exp()
    }

    pub fn evaluator(&self) -> GaussEval {
        GaussEval { poly: self.poly.compile() }
    }
}

/// Compiled form of a [`GaussPoly`], with the Gaussian factor split off.
#[derive(Clone, Debug)]
pub struct GaussEval {
    poly: CompiledPoly,
}

impl GaussEval {
    /// The polynomial part at row-major entries.
    pub fn poly_at(&self, entries: &[f64]) -> f64 {
        self.poly.eval(entries)
    }

    pub fn eval(&self, entries: &[f64]) -> f64 {
        let q: f64 = entries.iter().map(|v| v * v).sum();
        self.poly.eval(entries) * (-2.0 * core::f64::consts::PI * q).exp()
    }
}

impl fmt::Display for GaussPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sq: Vec<String> = self.poly.vars().iter().map(|v| format!("{v}^2")).collect();
        let p = format!("{}", self.poly);
        if self.poly.len() > 1 {
            write!(f, "({p}) * exp(-2*pi*({}))", sq.join(" + "))
        } else {
            write!(f, "{p} * exp(-2*pi*({}))", sq.join(" + "))
        }
    }
}

pub fn compute_phi(n: usize) -> Result<GaussPoly> {
    compute_phi_with(n, HoweOperator::Standard)
}

/// `Φ = 2^{q/2 - 1} · β^*(φ_KM)` as a polynomial in the entries, `q = n(n+1)/2`.
///
/// The pullback `Σ_I c_I det(L[I, :])` is expanded row by row: a state records the
/// columns used so far and the multiset of `V⁺` indices chosen, so each Hermite product
/// is built once per multiset instead of once per tuple.
pub fn compute_phi_with(n: usize, op: HoweOperator) -> Result<GaussPoly> {
    let frame = FrameData::new(n)?;
    let sig = frame.sig;
    let l = dbeta(&frame)?;
    let (p, q) = (sig.p, sig.q);
    let mut states: BTreeMap<(u64, Vec<u8>), Scalar> = BTreeMap::new();
    states.insert((0, vec![0u8; p]), Scalar::one());
    for a in 0..q {
        let mut entries = Vec::new();
        for i in 0..p {
            let row = l.row(crate::kmform::omega_index(sig, i + 1, p + 1 + a));
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    entries.push((i, b, v.clone()));
                }
            }
        }
        let mut next: BTreeMap<(u64, Vec<u8>), Scalar> = BTreeMap::new();
        for ((mask, counts), c) in &states {
            for (i, b, v) in &entries {
                if mask >> b & 1 == 1 {
                    continue;
                }
                let mut t = c * v;
                if (mask >> (b + 1)).count_ones() % 2 == 1 {
                    t = -t;
                }
                let mut cn = counts.clone();
                cn[*i] += 1;
                let slot = next.entry((mask | 1 << b, cn)).or_insert_with(Scalar::zero);
                *slot = &*slot + &t;
            }
        }
        next.retain(|_, c| !c.is_zero());
        states = next;
    }
    let yv = frame.yvars.clone();
    let xs: Vec<Poly> = (0..p)
        .map(|i| {
            let mut acc = Poly::zero(&yv);
            for (s, c) in frame.x_of_y.row(i).iter().enumerate() {
                if !c.is_zero() {
                    acc = &acc + &Poly::var(&yv, s).scale(c);
                }
            }
            acc
        })
        .collect();
    let herm: Vec<Poly> = (0..=q as u32).map(|m| hermite(m, op)).collect();
    let mut cache: BTreeMap<(usize, u8), Poly> = BTreeMap::new();
    let mut total = Poly::zero(&yv);
    for ((_, counts), c) in &states {
        let mut term = Poly::constant(&yv, c.clone());
        for (i, &m) in counts.iter().enumerate() {
            if m == 0 {
                continue;
            }
            if !cache.contains_key(&(i, m)) {
                let h = herm[m as usize].compose(core::slice::from_ref(&xs[i]))?;
                cache.insert((i, m), h);
            }
            term = &term * &cache[&(i, m)];
        }
        total = &total + &term;
    }
    // 2^{-q} from the Howe operator, 2^{q/2 - 1} from the normalisations
    let scale = Scalar::sqrt2_pow(-(q as i32) - 2);
    GaussPoly::new(n, total.scale(&scale))
}

/// The unique `H > 0` with `y ∈ i·Sym(diag(H, 1))`, i.e. `diag(H, 1) A` symmetric, when
/// `y` matches signature `(n, 0)`; `None` otherwise.
pub fn intersection_point(y: &SElement) -> Result<Option<DMatrix<f64>>> {
    if !is_rss(y) {
        return Err(Error::NotRegularSemisimple(format!("Krylov conditioning {:.3e}", rss_margin(y))));
    }
    let n = y.n();
    if match_signature(y)? != (n, 0) {
        return Ok(None);
    }
    // conj_act(g, y) is symmetric, so H = g^T g
    let nf = normal_form_n0(y)?;
    Ok(Some(nf.g.transpose() * &nf.g))
}

/// Largest entry of `diag(H, 1) A - (diag(H, 1) A)^T`.
pub fn membership_residual(y: &SElement, h: &DMatrix<f64>) -> f64 {
    let n = y.n();
    let mut big = DMatrix::<f64>::identity(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(h);
    let s = big * y.a();
    crate::linalg::max_abs(&(&s - s.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, poly_subst_linear, pullback_top};
    use crate::kmform::km_form;
    use crate::slie::shaped;

    #[test]
    fn dbeta_n1_matches_hand_computation() {
        let f = FrameData::new(1).unwrap();
        let l = dbeta(&f).unwrap();
        // ω_{3,4}: the E_11 direction hits the x3-unit
        let col: Vec<f64> = (0..3).map(|i| l.get(i, 0).to_f64()).collect();
        assert_eq!(col, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn phi_n1() {
        let phi = compute_phi(1).unwrap();
        assert_eq!(phi.poly, parse_poly("1/2*sqrt2*(y1 + y2)", &y_vars(1)).unwrap());
        assert_eq!(phi.poly.to_string(), "1/2*sqrt2*y1 + 1/2*sqrt2*y2");
    }

    #[test]
    fn phi_n2() {
        let want = "sqrt2*(y11 - y22)*(v1 + w1)*(v2 + w2) - 1/2*sqrt2*(y12 + y21)*((v1 + w1)^2 - (v2 + w2)^2)";
        assert_eq!(compute_phi(2).unwrap().poly, parse_poly(want, &y_vars(2)).unwrap());
    }

    #[test]
    fn dp_agrees_with_generic_pullback() {
        for n in 1..=2 {
            let f = FrameData::new(n).unwrap();
            let km = km_form(f.sig).unwrap();
            let l = dbeta(&f).unwrap();
            let lp = l.map(|s| Poly::constant(&km.xvars, s.clone()));
            let top = pullback_top(&km.form, &lp).unwrap();
            let direct = poly_subst_linear(&top, &f.x_of_y).unwrap().scale(&Scalar::sqrt2_pow(f.sig.q as i32 - 2));
            assert_eq!(compute_phi(n).unwrap().poly, direct);
        }
    }

    #[test]
    fn intersection_on_normal_shapes() {
        let y = shaped(&[2.0, -1.0], &[1.0, 3.0], &[1.0, 3.0], 0.5).unwrap();
        assert_eq!(intersection_point(&y).unwrap().unwrap(), DMatrix::identity(2, 2));
        let y = shaped(&[2.0, -1.0], &[1.0, 3.0], &[2.0, 1.5], 0.5).unwrap();
        let h = intersection_point(&y).unwrap().unwrap();
        assert!((h[(0, 0)] - 2.0).abs() < 1e-12 && (h[(1, 1)] - 0.5).abs() < 1e-12 && h[(0, 1)].abs() < 1e-12);
        let y = shaped(&[2.0, -1.0], &[1.0, 3.0], &[2.0, -1.5], 0.5).unwrap();
        assert!(intersection_point(&y).unwrap().is_none());
    }
}
