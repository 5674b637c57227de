use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact element of `Q(sqrt 2)[pi, 1/pi]`.
///
/// Stored as a finite sum of `r * sqrt2^e * pi^k` with `e` in `{0, 1}`; the map never
/// holds a zero coefficient, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    parts: BTreeMap<(i32, u8), BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(rat(n, d))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::monomial(r, 0, 0)
    }

    pub fn sqrt2() -> Self {
        Self::monomial(rat(1, 1), 1, 0)
    }

    pub fn pi_pow(k: i32) -> Self {
        Self::monomial(rat(1, 1), 0, k)
    }

    /// `r * sqrt2^e * pi^k`, with `e` reduced mod 2.
    pub fn monomial(r: BigRational, e: u32, k: i32) -> Self {
        let mut s = Self::zero();
        let two_pow = BigRational::from_integer(BigInt::from(2).pow(e / 2));
        s.push((k, (e % 2) as u8), r * two_pow);
        s
    }

    /// `2^(k/2)` for any integer `k`.
    pub fn sqrt2_pow(k: i32) -> Self {
        let half = k.div_euclid(2);
        let r = if half >= 0 {
            BigRational::from_integer(BigInt::from(2).pow(half as u32))
        } else {
            BigRational::new(BigInt::one(), BigInt::from(2).pow((-half) as u32))
        };
        Self::monomial(r, k.rem_euclid(2) as u32, 0)
    }

    fn push(&mut self, key: (i32, u8), r: BigRational) {
        if r.is_zero() {
            return;
        }
        let slot = self.parts.entry(key).or_insert_with(BigRational::zero);
        *slot += r;
        if slot.is_zero() {
            self.parts.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The value if the scalar is a plain rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.parts.len() {
            0 => Some(BigRational::zero()),
            1 => self.parts.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn parts(&self) -> impl Iterator<Item = (i32, u8, &BigRational)> {
        self.parts.iter().map(|(&(k, e), r)| (k, e, r))
    }

    pub fn to_f64(&self) -> f64 {
        self.parts
            .iter()
            .map(|(&(k, e), r)| {
                let mut v = r.to_f64().unwrap_or(f64::NAN);
                if e == 1 {
                    v *= core::f64::consts::SQRT_2;
                }
                v * num_traits::Float::powi(core::f64::consts::PI, k)
            })
            .sum()
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            parts: self.parts.iter().map(|(k, v)| (*k, v * r)).collect(),
        }
    }

    pub fn div_int(&self, d: i64) -> Self {
        self.scale_rational(&rat(1, d))
    }

    /// Inverse of a single-part scalar; `None` for zero or sums.
    pub fn recip(&self) -> Option<Self> {
        if self.parts.len() != 1 {
            return None;
        }
        let (&(k, e), r) = self.parts.iter().next()?;
        // 1/sqrt2 = sqrt2/2
        let inv = r.recip();
        let inv = if e == 1 { inv / BigRational::from_integer(BigInt::from(2)) } else { inv };
        Some(Self::monomial(inv, e as u32, -k))
    }

    /// Best rational approximation with denominator at most `max_den`.
    pub fn approx_rational(x: f64, max_den: i64) -> Self {
        if !x.is_finite() {
            return Self::zero();
        }
        let (mut h0, mut h1) = (0i128, 1i128);
        let (mut k0, mut k1) = (1i128, 0i128);
        let mut v = x;
        for _ in 0..64 {
            let a = num_traits::Float::floor(v);
            let ai = a as i128;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > max_den as i128 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let frac = v - a;
            if num_traits::Float::abs(frac) < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if k1 == 0 {
            return Self::zero();
        }
        Self::from_rational(BigRational::new(BigInt::from(h1), BigInt::from(k1)))
    }

    fn is_negative_single(&self) -> bool {
        self.parts.len() == 1 && self.parts.values().next().is_some_and(|r| r.is_negative())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let mut s = self.clone();
        for (k, r) in &o.parts {
            s.push(*k, r.clone());
        }
        s
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            parts: self.parts.iter().map(|(k, r)| (*k, -r)).collect(),
        }
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let mut s = Scalar::zero();
        for (&(k1, e1), r1) in &self.parts {
            for (&(k2, e2), r2) in &o.parts {
                let mut r = r1 * r2;
                let e = e1 + e2;
                if e == 2 {
                    r *= BigRational::from_integer(BigInt::from(2));
                }
                s.push((k1 + k2, e % 2), r);
            }
        }
        s
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
pub(crate) use owned_ops;
owned_ops!(Scalar);

fn fmt_part(r: &BigRational, e: u8, k: i32, abs: bool) -> String {
    let r = if abs { r.abs() } else { r.clone() };
    let mut factors: Vec<String> = Vec::new();
    if e == 1 {
        factors.push("sqrt2".into());
    }
    if k == 1 {
        factors.push("pi".into());
    } else if k != 0 {
        factors.push(alloc::format!("pi^{k}"));
    }
    let num = if r.is_integer() { r.numer().to_string() } else { alloc::format!("{}/{}", r.numer(), r.denom()) };
    if factors.is_empty() {
        return num;
    }
    let sym = factors.join("*");
    if r.is_one() {
        sym
    } else if (-r.clone()).is_one() {
        alloc::format!("-{sym}")
    } else {
        alloc::format!("{num}*{sym}")
    }
}

impl Scalar {
    /// Canonical text. `signless` drops the sign of a single-part scalar so callers can
    /// print it as a binary operator.
    pub(crate) fn render(&self, signless: bool) -> String {
        if self.parts.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (&(k, e), r)) in self.parts.iter().enumerate() {
            if i == 0 {
                out.push_str(&fmt_part(r, e, k, signless && self.parts.len() == 1));
            } else {
                out.push_str(if r.is_negative() { " - " } else { " + " });
                out.push_str(&fmt_part(r, e, k, true));
            }
        }
        out
    }

    /// Sign to print in front of this scalar when it appears as a term coefficient,
    /// and whether it needs parentheses.
    pub(crate) fn term_shape(&self) -> (bool, bool) {
        (self.is_negative_single(), self.parts.len() > 1)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(&Scalar::sqrt2() * &Scalar::sqrt2(), Scalar::int(2));
    }

    #[test]
    fn recip_of_sqrt2_pi() {
        let s = &Scalar::sqrt2() * &Scalar::pi_pow(1);
        assert_eq!(&s * &s.recip().unwrap(), Scalar::one());
    }

    #[test]
    fn sqrt2_pow_matches_repeated_product() {
        for k in -5..6 {
            let v = Scalar::sqrt2_pow(k).to_f64();
            assert!((v - 2f64.powf(k as f64 / 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn render_forms() {
        assert_eq!(Scalar::ratio(-1, 4).to_string(), "-1/4");
        assert_eq!((&Scalar::ratio(1, 2) * &Scalar::sqrt2()).to_string(), "1/2*sqrt2");
        assert_eq!(Scalar::pi_pow(-1).to_string(), "pi^-1");
        let s = &Scalar::one() + &Scalar::sqrt2();
        assert_eq!(s.to_string(), "1 + sqrt2");
    }

    #[test]
    fn approx_rational_recovers_small_fractions() {
        assert_eq!(Scalar::approx_rational(0.375, 1000), Scalar::ratio(3, 8));
        assert_eq!(Scalar::approx_rational(-2.0, 1000), Scalar::int(-2));
    }
}
