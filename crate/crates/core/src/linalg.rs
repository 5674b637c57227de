//! Small dense helpers on top of nalgebra.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_traits::Float;

use crate::{Error, Result, C64};

/// Coefficients `a_1..a_n` of `det(t - M) = t^n + a_1 t^{n-1} + ... + a_n`
/// (Faddeev-LeVerrier).
pub fn char_poly<T: ComplexField + Copy>(m: &DMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n);
    let mut mk = DMatrix::<T>::zeros(n, n);
    let mut c = T::one();
    for k in 1..=n {
        mk = m * &mk + DMatrix::<T>::identity(n, n) * c;
        c = -(m * &mk).trace() / T::from_subset(&(k as f64));
        out.push(c);
    }
    out
}

/// `σ_min / σ_max`, or 0 for the zero matrix.
pub fn conditioning(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().singular_values();
    let hi = s.iter().cloned().fold(0.0, f64::max);
    let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix, eigenvalues in
/// descending order.
pub fn sym_eig_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// `(#positive, #negative)` eigenvalues of a symmetric matrix; a near-zero eigenvalue
/// (relative to the largest) is reported as degenerate.
pub fn sym_signature(m: &DMatrix<f64>) -> Result<(usize, usize)> {
    let (vals, _) = sym_eig_desc(m);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if scale == 0.0 || vals.iter().any(|v| v.abs() <= tol) {
        return Err(Error::DegenerateInvariant(format!("symmetric form has a null direction (eigenvalues {vals:?})")));
    }
    Ok((vals.iter().filter(|v| **v > 0.0).count(), vals.iter().filter(|v| **v < 0.0).count()))
}

/// Real eigenvalues (descending) with unit eigenvectors as columns, for a real matrix
/// with real simple spectrum.
pub fn real_eig_desc(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let ev = a.clone().complex_eigenvalues();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut vals = Vec::with_capacity(n);
    for z in ev.iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::SignatureMismatch(format!("eigenvalue {z} is not real")));
        }
        vals.push(z.re);
    }
    vals.sort_by(|x, y| y.total_cmp(x));
    for w in vals.windows(2) {
        if (w[0] - w[1]).abs() <= 1e-12 * scale {
            return Err(Error::NotRegularSemisimple("repeated eigenvalue".into()));
        }
    }
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    for (c, &l) in vals.iter().enumerate() {
        let shifted = a - DMatrix::<f64>::identity(n, n) * l;
        let svd = shifted.clone().svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Internal("svd without right vectors".into()))?;
        let k = (0..n).min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j])).unwrap_or(0);
        let mut v: Vec<f64> = (0..n).map(|r| vt[(k, r)]).collect();
        // one step of inverse iteration tightens the null vector
        let perturbed = &shifted + DMatrix::<f64>::identity(n, n) * (1e-14 * scale);
        if let Some(inv) = perturbed.try_inverse() {
            let w = &inv * nalgebra::DVector::from_vec(v.clone());
            let nrm = w.norm();
            if nrm.is_finite() && nrm > 0.0 {
                v = w.iter().map(|x| x / nrm).collect();
            }
        }
        for r in 0..n {
            vecs[(r, c)] = v[r];
        }
    }
    Ok((vals, vecs))
}

pub fn cdet(m: &DMatrix<C64>) -> C64 {
    m.clone().determinant()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// `(z / |z|)^m`.
pub fn unit_power(z: C64, m: i32) -> C64 {
    let r = z.norm();
    let u = z / r;
    u.powi(m)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| Float::max(a, v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_poly_of_companion() {
        // t^2 - 3t + 2
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 1.0, 3.0]);
        let c: Vec<f64> = char_poly(&m);
        assert!(f64::abs(c[0] + 3.0) < 1e-12 && f64::abs(c[1] - 2.0) < 1e-12);
    }

    #[test]
    fn eigenvectors_of_triangular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 0.0, 3.0]);
        let (vals, vecs) = real_eig_desc(&a).unwrap();
        assert_eq!(vals.len(), 2);
        let r = &a * &vecs - &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals));
        assert!(max_abs(&r) < 1e-10);
    }
}
