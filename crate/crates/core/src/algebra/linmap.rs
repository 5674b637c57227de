use alloc::format;
use alloc::vec::Vec;

use super::exterior::{det, Ring};
use super::poly::{index_of, Poly, Vars};
use super::scalar::Scalar;
use crate::{Error, Result};

/// Linear map between named coordinate spaces; `matrix[t][s]` is the `t`-th target
/// coordinate of the image of the `s`-th source basis vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LinMap<S> {
    source: Vars,
    target: Vars,
    matrix: Vec<Vec<S>>,
}

impl<S: Clone> LinMap<S> {
    pub fn new(source: Vars, target: Vars, matrix: Vec<Vec<S>>) -> Result<Self> {
        if matrix.len() != target.len() || matrix.iter().any(|r| r.len() != source.len()) {
            return Err(Error::Shape(format!(
                "matrix does not have shape {}x{}",
                target.len(),
                source.len()
            )));
        }
        Ok(Self { source, target, matrix })
    }

    pub fn source(&self) -> &Vars {
        &self.source
    }

    pub fn target(&self) -> &Vars {
        &self.target
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.source.len()
    }

    pub fn get(&self, t: usize, s: usize) -> &S {
        &self.matrix[t][s]
    }

    pub fn row(&self, t: usize) -> &[S] {
        &self.matrix[t]
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.matrix
    }

    pub fn map<T: Clone>(&self, f: impl Fn(&S) -> T) -> LinMap<T> {
        LinMap {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

impl<S: Ring> LinMap<S> {
    /// `self ∘ other`.
    pub fn compose(&self, other: &LinMap<S>) -> Result<LinMap<S>> {
        if self.source[..] != other.target[..] {
            return Err(Error::Shape("composition of maps with mismatched spaces".into()));
        }
        let k = other.rows();
        let mut m = Vec::with_capacity(self.rows());
        for t in 0..self.rows() {
            let mut row = Vec::with_capacity(other.cols());
            for s in 0..other.cols() {
                let mut acc = self.matrix[t][0].zero_like();
                for j in 0..k {
                    acc = acc.plus(&self.matrix[t][j].times(&other.matrix[j][s]));
                }
                row.push(acc);
            }
            m.push(row);
        }
        LinMap::new(other.source.clone(), self.target.clone(), m)
    }

    pub fn det(&self) -> Result<S> {
        det(&self.matrix)
    }
}

impl LinMap<Scalar> {
    pub fn to_f64(&self) -> LinMap<f64> {
        self.map(Scalar::to_f64)
    }
}

/// Pull a polynomial in the target coordinates back along `l`: every target coordinate
/// `x_t` becomes `Σ_s matrix[t][s] y_s`.
pub fn poly_subst_linear(p: &Poly, l: &LinMap<Scalar>) -> Result<Poly> {
    let src = l.source();
    let mut images = Vec::with_capacity(p.vars().len());
    for v in p.vars().iter() {
        let t = index_of(l.target(), v)?;
        let mut img = Poly::zero(src);
        for (s, c) in l.row(t).iter().enumerate() {
            if !c.is_zero() {
                img = &img + &Poly::var(src, s).scale(c);
            }
        }
        images.push(img);
    }
    if images.is_empty() {
        return Ok(Poly::constant(src, p.coeff(&[])));
    }
    p.compose(&images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::vars;

    #[test]
    fn doubling_substitution() {
        let x = vars(&["x"]);
        let y = vars(&["y"]);
        let l = LinMap::new(y.clone(), x.clone(), alloc::vec![alloc::vec![Scalar::int(2)]]).unwrap();
        let p = poly_subst_linear(&Poly::var(&x, 0), &l).unwrap();
        assert_eq!(p, Poly::var(&y, 0).scale(&Scalar::int(2)));
    }

    #[test]
    fn rotation_negates_product() {
        let v = vars(&["x1", "x2"]);
        let m = alloc::vec![
            alloc::vec![Scalar::zero(), Scalar::one()],
            alloc::vec![Scalar::int(-1), Scalar::zero()]
        ];
        let l = LinMap::new(v.clone(), v.clone(), m).unwrap();
        let p = &Poly::var(&v, 0) * &Poly::var(&v, 1);
        assert_eq!(poly_subst_linear(&p, &l).unwrap(), -&p);
    }
}
