use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use super::scalar::{owned_ops, Scalar};
use crate::{Error, Result};

/// Exponent vector ordered graded-lexicographically (total degree first, then the
/// earlier variables carry more weight).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

pub type Vars = Arc<[String]>;

pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

/// Polynomial with exact coefficients in a fixed, ordered set of variables.
#[derive(Clone)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Mono, Scalar>,
}

fn same_vars(a: &Vars, b: &Vars) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

impl PartialEq for Poly {
    fn eq(&self, o: &Self) -> bool {
        same_vars(&self.vars, &o.vars) && self.terms == o.terms
    }
}

impl Poly {
    pub fn zero(vars: &Vars) -> Self {
        Self { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Vars, c: Scalar) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Mono(vec![0; vars.len()]), c);
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Self::constant(vars, Scalar::one())
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.add_term(Mono(e), Scalar::one());
        p
    }

    pub fn var_named(vars: &Vars, name: &str) -> Result<Self> {
        Ok(Self::var(vars, index_of(vars, name)?))
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Vec<u32>, Scalar)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::Shape(format!("exponent vector of length {} for {} variables", e.len(), vars.len())));
            }
            p.add_term(Mono(e), c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Mono::degree)
    }

    pub fn coeff(&self, e: &[u32]) -> Scalar {
        self.terms.get(&Mono(e.to_vec())).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, m: Mono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot = &*slot + &c;
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check(&self, o: &Poly) {
        assert!(same_vars(&self.vars, &o.vars), "polynomials over different variable sets: {:?} vs {:?}", self.vars, o.vars);
    }

    pub fn try_add(&self, o: &Poly) -> Result<Poly> {
        if !same_vars(&self.vars, &o.vars) {
            return Err(Error::Variable(format!("{:?} vs {:?}", self.vars, o.vars)));
        }
        Ok(self + o)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn diff(&self, i: usize) -> Poly {
        let mut p = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.0.clone();
            m2[i] -= 1;
            p.add_term(Mono(m2), c * &Scalar::int(e as i64));
        }
        p
    }

    pub fn diff_named(&self, name: &str) -> Result<Poly> {
        Ok(self.diff(index_of(&self.vars, name)?))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.compile().eval(x)
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            nvars: self.vars.len(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let f: Vec<(usize, i32)> =
                        m.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e as i32)).collect();
                    (c.to_f64(), f)
                })
                .collect(),
        }
    }

    /// Substitute `images[i]` for variable `i`; all images must share one variable set.
    pub fn compose(&self, images: &[Poly]) -> Result<Poly> {
        if images.len() != self.vars.len() {
            return Err(Error::Shape(format!("{} images for {} variables", images.len(), self.vars.len())));
        }
        let Some(first) = images.first() else {
            let target: Vars = Vec::<String>::new().into();
            return Ok(Poly::constant(&target, self.coeff(&[])));
        };
        let target = first.vars.clone();
        if images.iter().any(|p| !same_vars(&p.vars, &target)) {
            return Err(Error::Variable("substitution images over different variable sets".into()));
        }
        let mut cache: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(&target), p.clone()]).collect();
        let mut out = Poly::zero(&target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = &cache[i][cache[i].len() - 1] * &images[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Re-express over a larger variable set containing all current variables.
    pub fn embed(&self, target: &Vars) -> Result<Poly> {
        let idx: Vec<usize> = self.vars.iter().map(|v| index_of(target, v)).collect::<Result<_>>()?;
        let mut p = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &k) in m.0.iter().enumerate() {
                e[idx[i]] = k;
            }
            p.add_term(Mono(e), c.clone());
        }
        Ok(p)
    }
}

pub fn index_of(vars: &Vars, name: &str) -> Result<usize> {
    vars.iter().position(|v| v == name).ok_or_else(|| Error::Variable(format!("unknown variable `{name}`")))
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        self.check(o);
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        self.check(o);
        let mut p = Poly::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let e: Vec<u32> = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                p.add_term(Mono(e), c1 * c2);
            }
        }
        p
    }
}

owned_ops!(Poly);

impl Poly {
    fn render_mono(&self, m: &Mono) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.vars[i].clone()),
                _ => parts.push(format!("{}^{}", self.vars[i], e)),
            }
        }
        parts.join("*")
    }
}

/// Terms in descending graded-lex order, `coef*var^e*...`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, paren) = c.term_shape();
            if i > 0 {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            let mono = self.render_mono(m);
            let coef = if paren { format!("({})", c.render(false)) } else { c.render(true) };
            if mono.is_empty() {
                f.write_str(&coef)?;
            } else if coef == "1" {
                f.write_str(&mono)?;
            } else {
                write!(f, "{coef}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({self})", self.vars.join(","))
    }
}

/// Float snapshot of a polynomial for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut s = 0.0;
        for (c, f) in &self.terms {
            let mut t = *c;
            for &(i, e) in f {
                t *= if e == 1 { x[i] } else { num_traits::Float::powi(x[i], e) };
            }
            s += t;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vars {
        vars(&["x", "y"])
    }

    #[test]
    fn renders_in_graded_lex_order() {
        let v = xy();
        let x = Poly::var(&v, 0);
        let y = Poly::var(&v, 1);
        let p = &(&x.pow(2) - &y) + &Poly::constant(&v, Scalar::ratio(-1, 4));
        assert_eq!(p.to_string(), "x^2 - y - 1/4");
    }

    #[test]
    fn diff_of_x_cubed() {
        let v = vars(&["x"]);
        let p = Poly::var(&v, 0).pow(3);
        assert_eq!(p.diff(0), Poly::var(&v, 0).pow(2).scale(&Scalar::int(3)));
    }

    #[test]
    fn unknown_variable_is_an_error() {
        assert!(matches!(Poly::var_named(&xy(), "z"), Err(Error::Variable(_))));
    }

    #[test]
    fn compose_swaps_variables() {
        let v = xy();
        let p = &Poly::var(&v, 0) * &Poly::var(&v, 1).pow(2);
        let q = p.compose(&[Poly::var(&v, 1), Poly::var(&v, 0)]).unwrap();
        assert_eq!(q, &Poly::var(&v, 1) * &Poly::var(&v, 0).pow(2));
    }
}
