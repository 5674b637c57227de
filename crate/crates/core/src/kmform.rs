//! The Kudla-Millson form on a real quadratic space of signature `(p, q)`, built from
//! the Howe operator, together with the action of `O(p) x O(q)` on it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{poly_subst_linear, vars, ExtElem, LinMap, Poly, Ring, Scalar, Vars};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
}

impl Signature {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q
    }
}

/// Which first-order operator builds the polynomial cofactors. Only `Standard` gives the
/// Kudla-Millson form; the flipped variant exists to check that the verification suite
/// notices a wrong sign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HoweOperator {
    #[default]
    Standard,
    FlippedDerivative,
}

/// `h_m` with `h_{m+1} = 2 t h_m - h_m' / (2 pi)`, i.e. the cofactor of
/// `(t - d/dt / 2pi)^m e^{-pi t^2}`.
pub fn hermite(m: u32, op: HoweOperator) -> Poly {
    let v = vars(&["t"]);
    let t = Poly::var(&v, 0);
    let inv2pi = Poly::constant(&v, Scalar::pi_pow(-1).div_int(2));
    let mut h = Poly::one(&v);
    for _ in 0..m {
        h = match op {
            HoweOperator::Standard => &(&t.scale(&Scalar::int(2)) * &h) - &(&h.diff(0) * &inv2pi),
            // (t + d/dt / 2pi) kills the Gaussian factor's derivative
            HoweOperator::FlippedDerivative => &h.diff(0) * &inv2pi,
        };
    }
    h
}

/// The form as an element of `Pol(x_1..x_{p+q}) ⊗ Λ(ω_{ij})`, Gaussian `e^{-pi Σ x^2}`
/// implicit. Generators `ω_{ij}` (`i <= p < j`) are indexed `j`-major.
#[derive(Clone, Debug, PartialEq)]
pub struct KmForm {
    pub sig: Signature,
    pub xvars: Vars,
    pub gens: Vars,
    pub form: ExtElem<Poly>,
}

pub fn omega_index(sig: Signature, i: usize, j: usize) -> usize {
    (j - sig.p - 1) * sig.p + (i - 1)
}

pub fn x_vars(dim: usize) -> Vars {
    let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    vars(&names)
}

pub fn omega_gens(sig: Signature) -> Vars {
    let mut names = Vec::with_capacity(sig.p * sig.q);
    for j in sig.p + 1..=sig.dim() {
        for i in 1..=sig.p {
            names.push(format!("w{i}_{j}"));
        }
    }
    vars(&names)
}

fn check_sig(sig: Signature) -> Result<()> {
    if sig.p == 0 || sig.q == 0 {
        return Err(Error::Shape(format!("signature ({}, {}) needs p, q >= 1", sig.p, sig.q)));
    }
    if sig.p * sig.q > 64 {
        return Err(Error::Shape(format!("{} generators exceed the 64 supported", sig.p * sig.q)));
    }
    Ok(())
}

pub fn km_form(sig: Signature) -> Result<KmForm> {
    km_form_with(sig, HoweOperator::Standard)
}

pub fn km_form_with(sig: Signature, op: HoweOperator) -> Result<KmForm> {
    check_sig(sig)?;
    let xv = x_vars(sig.dim());
    let gens = omega_gens(sig);
    let herm: Vec<Poly> = (0..=sig.q as u32).map(|m| hermite(m, op)).collect();
    // h_m(x_i), cached per (i, m)
    let mut hx: Vec<Vec<Poly>> = Vec::with_capacity(sig.p);
    for i in 0..sig.p {
        let xi = Poly::var(&xv, i);
        let row = herm.iter().map(|h| h.compose(core::slice::from_ref(&xi))).collect::<Result<Vec<_>>>()?;
        hx.push(row);
    }
    let norm = Scalar::ratio(1, 1i64 << sig.q);
    let mut form = ExtElem::zero(&gens)?;
    let mut tuple = vec![0usize; sig.q];
    loop {
        let mut mult = vec![0u32; sig.p];
        for &i in &tuple {
            mult[i] += 1;
        }
        let mut c = Poly::constant(&xv, norm.clone());
        for (i, &m) in mult.iter().enumerate() {
            if m > 0 {
                c = &c * &hx[i][m as usize];
            }
        }
        let mut mask = 0u64;
        for (a, &i) in tuple.iter().enumerate() {
            mask |= 1 << omega_index(sig, i + 1, sig.p + 1 + a);
        }
        // generators j-major, so ω_{i_1,p+1} ∧ ... ∧ ω_{i_q,p+q} is already sorted
        form.add_term(mask, c);
        if !next_tuple(&mut tuple, sig.p) {
            break;
        }
    }
    Ok(KmForm { sig, xvars: xv, gens, form })
}

fn next_tuple(t: &mut [usize], base: usize) -> bool {
    for d in t.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Coefficients usable in a frame matrix: exact scalars or floats.
pub trait FrameScalar: Ring {
    fn as_f64(&self) -> f64;
}

impl FrameScalar for f64 {
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl FrameScalar for Scalar {
    fn as_f64(&self) -> f64 {
        self.to_f64()
    }
}

/// How `k = diag(K⁺, K⁻)` acts: `x ↦ K x` on coordinates and
/// `ω_{ij} ↦ Σ K⁺_{ia} K⁻_{jb} ω_{ab}` on generators.
#[derive(Clone, Debug)]
pub struct FrameAction<S> {
    pub x_action: LinMap<S>,
    pub omega_action: LinMap<S>,
    pub nu: S,
}

pub fn frame_action<S: FrameScalar>(sig: Signature, k: &[Vec<S>]) -> Result<FrameAction<S>> {
    check_sig(sig)?;
    let d = sig.dim();
    if k.len() != d || k.iter().any(|r| r.len() != d) {
        return Err(Error::Frame(format!("frame matrix must be {d}x{d}")));
    }
    let zero = k[0][0].zero_like();
    for (i, row) in k.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if (i < sig.p) != (j < sig.p) && v.as_f64().abs() > 1e-12 {
                return Err(Error::Frame("frame matrix mixes V⁺ and V⁻".into()));
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|r| k[r][i].as_f64() * k[r][j].as_f64()).sum();
            worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    if worst > 1e-10 {
        return Err(Error::Frame(format!("frame matrix is not orthogonal (residual {worst:.3e})")));
    }
    let xv = x_vars(d);
    let x_action = LinMap::new(xv.clone(), xv, k.to_vec())?;
    let gens = omega_gens(sig);
    let g = gens.len();
    let mut om = vec![vec![zero.clone(); g]; g];
    for j in sig.p + 1..=d {
        for i in 1..=sig.p {
            let t = omega_index(sig, i, j);
            for b in sig.p + 1..=d {
                for a in 1..=sig.p {
                    om[omega_index(sig, a, b)][t] = k[i - 1][a - 1].times(&k[j - 1][b - 1]);
                }
            }
        }
    }
    let omega_action = LinMap::new(gens.clone(), gens, om)?;
    let kminus: Vec<Vec<S>> = (sig.p..d).map(|i| k[i][sig.p..].to_vec()).collect();
    let nu = crate::algebra::det(&kminus)?;
    Ok(FrameAction { x_action, omega_action, nu })
}

/// `k·φ(k·x) − ν(k) φ(x)` for an exact frame matrix; zero exactly when the form is
/// `(O(p) x O(q), ν)`-equivariant at `k`.
pub fn check_equivariance(km: &KmForm, k: &[Vec<Scalar>]) -> Result<ExtElem<Poly>> {
    let act = frame_action(km.sig, k)?;
    let moved = km.form.map_coeffs(|c| poly_subst_linear(c, &act.x_action))?;
    let om = act.omega_action.map(|s| Poly::constant(&km.xvars, s.clone()));
    let lhs = moved.map_generators(&om)?;
    let nu = act.nu.clone();
    lhs.sub(&km.form.scale(&|c: &Poly| c.scale(&nu)))
}

/// Same check with a float frame matrix, evaluated at the points `xs`; returns the
/// largest coefficient discrepancy.
pub fn equivariance_residual(km: &KmForm, k: &[Vec<f64>], xs: &[Vec<f64>]) -> Result<f64> {
    let act = frame_action(km.sig, k)?;
    let mut worst: f64 = 0.0;
    for x in xs {
        let kx: Vec<f64> = (0..x.len()).map(|i| (0..x.len()).map(|j| k[i][j] * x[j]).sum()).collect();
        let at = |pt: &[f64]| km.form.map_coeffs(|c| Ok(c.eval(pt)));
        let lhs = at(&kx)?.map_generators(&act.omega_action)?;
        let rhs = at(x)?.scale(&|c: &f64| c * act.nu);
        let diff = lhs.sub(&rhs)?;
        for (_, c) in diff.terms() {
            worst = worst.max(c.abs());
        }
    }
    Ok(worst)
}

impl fmt::Display for KmForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gauss: Vec<String> = self.xvars.iter().map(|x| format!("{x}^2")).collect();
        let gauss = format!("exp(-pi*({}))", gauss.join(" + "));
        let mut first = true;
        for (mask, c) in self.form.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c}) * {gauss} (x) {}", self.form.mask_names(mask).join("^"))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn coef(km: &KmForm, idx: &[(usize, usize)]) -> Poly {
        let mut mask = 0;
        for &(i, j) in idx {
            mask |= 1u64 << omega_index(km.sig, i, j);
        }
        km.form.coeff(mask).cloned().unwrap_or_else(|| Poly::zero(&km.xvars))
    }

    #[test]
    fn signature_one_one() {
        let km = km_form(Signature::new(1, 1)).unwrap();
        assert_eq!(km.form.len(), 1);
        assert_eq!(coef(&km, &[(1, 2)]), Poly::var(&km.xvars, 0));
    }

    #[test]
    fn signature_one_two() {
        let km = km_form(Signature::new(1, 2)).unwrap();
        let want = parse_poly("x1^2 - 1/4*pi^-1", &km.xvars).unwrap();
        assert_eq!(coef(&km, &[(1, 2), (1, 3)]), want);
    }

    #[test]
    fn hermite_two() {
        let h = hermite(2, HoweOperator::Standard);
        assert_eq!(h, parse_poly("4*t^2 - pi^-1", h.vars()).unwrap());
    }

    #[test]
    fn flipped_operator_vanishes() {
        assert!(hermite(1, HoweOperator::FlippedDerivative).is_zero());
    }

    #[test]
    fn zero_q_is_rejected() {
        assert!(km_form(Signature::new(2, 0)).is_err());
    }
}
