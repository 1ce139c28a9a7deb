//! Exact scalars: rationals and Gaussian rationals `re + im·i`, plus the
//! dense matrix, polynomial and cyclotomic machinery built on them.

mod cyclotomic;
mod matrix;
mod poly;

pub use cyclotomic::{cyclotomic_factorization, cyclotomic_poly, totient, CycloFactorization, MAX_CYCLOTOMIC_INDEX};
pub(crate) use cyclotomic::factor_integer_coeffs;
pub use matrix::{dot, jordan_partition, mat_mul, Matrix, Vector};
pub use poly::{char_poly, Poly};

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, WitError};

pub type Rational = BigRational;

/// Rational from a machine integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n/d`, reduced.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p/q` with the denominator always present.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || WitError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rational::new(sn, sd))
}

/// Exact `n`-th root of a positive rational, if it exists.
pub fn rational_nth_root(r: &Rational, n: u32) -> Option<Rational> {
    if !r.is_positive() || n == 0 {
        return None;
    }
    let num = r.numer().nth_root(n);
    let den = r.denom().nth_root(n);
    (num.pow(n) == *r.numer() && den.pow(n) == *r.denom()).then(|| Rational::new(num, den))
}

/// An element of ℚ(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussRational { re, im: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(rat(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::real(Rational::from_integer(n))
    }

    /// The fixed square root of −1.
    pub fn i() -> Self {
        GaussRational { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Field norm `re² + im²`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.is_real() {
            return Some(Self::real(self.re.recip()));
        }
        let n = self.norm();
        Some(GaussRational { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            k >>= 1;
        }
        Some(acc)
    }

    /// Exact square root in ℚ(i) with the canonical sign (positive real
    /// part, or positive imaginary part when the real part vanishes).
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let root = if self.is_real() {
            match rational_sqrt(&self.re.abs()) {
                Some(s) if self.re.is_positive() => Self::real(s),
                Some(s) => GaussRational { re: Rational::zero(), im: s },
                None => return None,
            }
        } else {
            let modulus = rational_sqrt(&self.norm())?;
            let two = rat(2);
            let x = rational_sqrt(&((&modulus + &self.re) / &two))?;
            let y = rational_sqrt(&((&modulus - &self.re) / &two))?;
            let y = if self.im.is_negative() { -y } else { y };
            GaussRational { re: x, im: y }
        };
        debug_assert_eq!(&root * &root, *self);
        Some(root.canonical_sign())
    }

    fn canonical_sign(self) -> Self {
        if self.re.is_negative() || (self.re.is_zero() && self.im.is_negative()) {
            -self
        } else {
            self
        }
    }

    /// Value as `i64` when it is a small real integer.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_real() && self.re.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }

    /// Real integer part as a big integer, when the value is a real integer.
    pub fn to_bigint(&self) -> Option<BigInt> {
        (self.is_real() && self.re.is_integer()).then(|| self.re.to_integer())
    }

    /// Least common multiple of the denominators of both parts.
    pub fn denom_lcm(&self) -> BigInt {
        num_integer::Integer::lcm(self.re.denom(), self.im.denom())
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        let k = Rational::from_integer(k.clone());
        GaussRational { re: &self.re * &k, im: &self.im * &k }
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational { re: Rational::zero(), im: Rational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational { re: Rational::one(), im: Rational::zero() }
    }
}

impl From<i64> for GaussRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<Rational> for GaussRational {
    fn from(r: Rational) -> Self {
        Self::real(r)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        if self.is_real() && o.is_real() {
            return GaussRational::real(&self.re * &o.re);
        }
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    /// Panics on division by zero, like the integer types.
    fn div(self, o: &GaussRational) -> GaussRational {
        if o.is_real() {
            assert!(!o.re.is_zero(), "division by zero");
            return GaussRational { re: &self.re / &o.re, im: &self.im / &o.re };
        }
        self * &o.inv().expect("division by zero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, o: GaussRational) -> GaussRational {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a GaussRational> for GaussRational {
            type Output = GaussRational;
            fn $m(self, o: &GaussRational) -> GaussRational {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<GaussRational> for &'a GaussRational {
            type Output = GaussRational;
            fn $m(self, o: GaussRational) -> GaussRational {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, o: &GaussRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, o: &GaussRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussRational> for GaussRational {
    fn mul_assign(&mut self, o: &GaussRational) {
        *self = &*self * o;
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", format_rational(&self.re))
        } else {
            write!(f, "{}+{}i", format_rational(&self.re), format_rational(&self.im))
        }
    }
}

impl Serialize for GaussRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        if self.is_real() {
            s.serialize_str(&format_rational(&self.re))
        } else {
            let mut m = s.serialize_map(Some(2))?;
            m.serialize_entry("re", &format_rational(&self.re))?;
            m.serialize_entry("im", &format_rational(&self.im))?;
            m.end()
        }
    }
}

impl<'de> Deserialize<'de> for GaussRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        GaussRational::from_json(&v).map_err(D::Error::custom)
    }
}

impl GaussRational {
    /// Accepts `"p/q"`, an integer, or `{"re": .., "im": ..}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        use serde_json::Value;
        let part = |v: &Value| -> Result<Rational> {
            match v {
                Value::String(s) => parse_rational(s),
                Value::Number(n) => n
                    .as_i64()
                    .map(rat)
                    .ok_or_else(|| WitError::Parse(format!("not an integer: {n}"))),
                other => Err(WitError::Parse(format!("not a scalar: {other}"))),
            }
        };
        match v {
            Value::Object(m) => {
                let re = m.get("re").map(part).transpose()?.unwrap_or_else(Rational::zero);
                let im = m.get("im").map(part).transpose()?.unwrap_or_else(Rational::zero);
                Ok(GaussRational { re, im })
            }
            other => Ok(GaussRational::real(part(other)?)),
        }
    }
}
