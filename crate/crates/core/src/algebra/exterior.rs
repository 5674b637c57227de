use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::linmap::LinMap;
use super::poly::{Poly, Vars};
use super::scalar::Scalar;
use crate::{Error, Result};

/// The handful of ring operations the exterior algebra needs. Polynomials carry their
/// variable set, so constants are produced from an existing element.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_r(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negate())
    }
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn is_zero_r(&self) -> bool {
        *self == 0.0
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
}

impl Ring for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero()
    }
    fn one_like(&self) -> Self {
        Scalar::one()
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
}

impl Ring for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.vars())
    }
    fn one_like(&self) -> Self {
        Poly::one(self.vars())
    }
    fn is_zero_r(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
}

/// Sign of moving the generators of `b` past those of `a` in `a ∧ b`.
fn merge_sign(a: u64, b: u64) -> bool {
    let mut odd = false;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j == 63 { 0 } else { a >> (j + 1) };
        odd ^= above.count_ones() % 2 == 1;
    }
    odd
}

/// Element of `C ⊗ Λ(span of named generators)`; a basis monomial is a bitmask of
/// generator indices wedged in increasing order.
#[derive(Clone, PartialEq)]
pub struct ExtElem<C: Ring> {
    gens: Vars,
    terms: BTreeMap<u64, C>,
}

impl<C: Ring> ExtElem<C> {
    pub fn zero(gens: &Vars) -> Result<Self> {
        if gens.len() > 64 {
            return Err(Error::Shape(format!("{} generators exceed the 64 supported", gens.len())));
        }
        Ok(Self { gens: gens.clone(), terms: BTreeMap::new() })
    }

    /// `coef * ω_{i_1} ∧ ... ∧ ω_{i_k}` in the given (not necessarily sorted) order.
    pub fn monomial(gens: &Vars, idx: &[usize], coef: C) -> Result<Self> {
        let mut acc = Self::zero(gens)?;
        acc.add_term(0, coef);
        for &i in idx {
            if i >= gens.len() {
                return Err(Error::Algebra(format!("generator index {i} out of range")));
            }
            let Some(one) = acc.terms.values().next().map(|c| c.one_like()) else {
                return Ok(acc);
            };
            let mut g = Self::zero(gens)?;
            g.add_term(1u64 << i, one);
            acc = acc.wedge(&g)?;
        }
        Ok(acc)
    }

    pub fn gens(&self) -> &Vars {
        &self.gens
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &C)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mask: u64) -> Option<&C> {
        self.terms.get(&mask)
    }

    pub fn add_term(&mut self, mask: u64, c: C) {
        if c.is_zero_r() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(slot) => {
                *slot = slot.plus(&c);
                if slot.is_zero_r() {
                    self.terms.remove(&mask);
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    fn same_gens(&self, o: &Self) -> Result<()> {
        if self.gens[..] != o.gens[..] {
            return Err(Error::Algebra("exterior elements over different generators".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_gens(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&|c: &C| c.negate()))
    }

    pub fn scale(&self, f: &dyn Fn(&C) -> C) -> Self {
        let mut r = Self { gens: self.gens.clone(), terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            r.add_term(*m, f(c));
        }
        r
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.same_gens(o)?;
        let mut r = Self { gens: self.gens.clone(), terms: BTreeMap::new() };
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                let c = ca.times(cb);
                r.add_term(a | b, if merge_sign(*a, *b) { c.negate() } else { c });
            }
        }
        Ok(r)
    }

    /// Image under the algebra map sending generator `t` to `Σ_s images[s][t] ω_s`.
    pub fn map_generators(&self, images: &LinMap<C>) -> Result<Self> {
        let g = self.gens.len();
        if images.rows() != g || images.cols() != g {
            return Err(Error::Shape(format!("generator map must be {g}x{g}")));
        }
        let mut r = Self { gens: self.gens.clone(), terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            let mut acc = Self { gens: self.gens.clone(), terms: BTreeMap::from([(0u64, c.clone())]) };
            let mut rest = *m;
            while rest != 0 {
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut img = Self { gens: self.gens.clone(), terms: BTreeMap::new() };
                for s in 0..g {
                    img.add_term(1u64 << s, images.get(s, t).clone());
                }
                acc = acc.wedge(&img)?;
            }
            for (mm, cc) in acc.terms {
                r.add_term(mm, cc);
            }
        }
        Ok(r)
    }

    /// Apply `f` to every coefficient.
    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> Result<D>) -> Result<ExtElem<D>> {
        let mut r = ExtElem { gens: self.gens.clone(), terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            r.add_term(*m, f(c)?);
        }
        Ok(r)
    }

    pub fn mask_names(&self, mask: u64) -> Vec<&str> {
        (0..64).filter(|i| mask >> i & 1 == 1).map(|i| self.gens[i].as_str()).collect()
    }
}

/// Determinant by cofactor expansion with memoised row subsets.
pub fn det<C: Ring>(m: &[Vec<C>]) -> Result<C> {
    let k = m.len();
    if m.iter().any(|r| r.len() != k) {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    if k == 0 {
        return Err(Error::Shape("determinant of an empty matrix".into()));
    }
    let mut memo: BTreeMap<u64, C> = BTreeMap::new();
    fn rec<C: Ring>(m: &[Vec<C>], col: usize, rows: u64, memo: &mut BTreeMap<u64, C>) -> C {
        if col == m.len() {
            return m[0][0].one_like();
        }
        if let Some(v) = memo.get(&rows) {
            return v.clone();
        }
        let mut acc = m[0][0].zero_like();
        let mut sign = false;
        for (r, row) in m.iter().enumerate() {
            if rows >> r & 1 == 1 {
                continue;
            }
            let e = &row[col];
            if !e.is_zero_r() {
                let t = e.times(&rec(m, col + 1, rows | 1 << r, memo));
                acc = if sign { acc.minus(&t) } else { acc.plus(&t) };
            }
            sign = !sign;
        }
        memo.insert(rows, acc.clone());
        acc
    }
    Ok(rec(m, 0, 0, &mut memo))
}

/// Coefficient of the pulled-back top form: for `L : R^q -> span(generators)` (matrix
/// `generators x q`), returns `Σ_I c_I det(L[I, :])`.
pub fn pullback_top<C: Ring>(form: &ExtElem<C>, l: &LinMap<C>) -> Result<C> {
    let q = l.cols();
    if l.rows() != form.gens.len() {
        return Err(Error::Shape(format!("map has {} rows, form has {} generators", l.rows(), form.gens.len())));
    }
    let mut acc: Option<C> = None;
    for (mask, c) in &form.terms {
        if mask.count_ones() as usize != q {
            return Err(Error::Algebra(format!("form has degree {} component, expected top degree {q}", mask.count_ones())));
        }
        let rows: Vec<Vec<C>> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| l.row(i).to_vec()).collect();
        let t = c.times(&det(&rows)?);
        acc = Some(match acc {
            Some(a) => a.plus(&t),
            None => t,
        });
    }
    match acc {
        Some(a) => Ok(a),
        None => Err(Error::Algebra("pullback of the zero form has no coefficient ring".into())),
    }
}

impl<C: Ring + fmt::Display> fmt::Display for ExtElem<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let w = self.mask_names(*m).join("^");
                format!("({c}) (x) {}", if w.is_empty() { "1" } else { &w })
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

impl<C: Ring> fmt::Debug for ExtElem<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(m, c)| (self.mask_names(*m), c))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::vars;

    #[test]
    fn wedge_anticommutes() {
        let g = vars(&["w1", "w2"]);
        let a = ExtElem::monomial(&g, &[0], 1.0).unwrap();
        let b = ExtElem::monomial(&g, &[1], 1.0).unwrap();
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ab.add(&ba).unwrap().len(), 0);
        assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn pullback_of_two_form_is_determinant() {
        let g = vars(&["w1", "w2"]);
        let f = ExtElem::monomial(&g, &[0, 1], 1.0).unwrap();
        let l = LinMap::new(vars(&["e1", "e2"]), g.clone(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(pullback_top(&f, &l).unwrap(), -2.0);
    }

    #[test]
    fn mismatched_generators_fail() {
        let a = ExtElem::monomial(&vars(&["w1"]), &[0], 1.0).unwrap();
        let b = ExtElem::monomial(&vars(&["v1"]), &[0], 1.0).unwrap();
        assert!(matches!(a.wedge(&b), Err(Error::Algebra(_))));
    }
}
