//! Univariate polynomials over ℚ(i), ascending coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{GaussRational, Matrix};
use crate::error::{Result, WitError};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<GaussRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<GaussRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| GaussRational::from_int(x)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().cloned().map(GaussRational::from_bigint).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![GaussRational::one()] }
    }

    /// `T − r`.
    pub fn linear_root(r: &GaussRational) -> Self {
        Poly::new(vec![-r, GaussRational::one()])
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussRational {
        self.coeffs.get(k).cloned().unwrap_or_else(GaussRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![GaussRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        (0..e).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &GaussRational) -> GaussRational {
        self.coeffs.iter().rev().fold(GaussRational::zero(), |acc, c| &(&acc * x) + c)
    }

    /// Coefficients as big integers, if all are (real) integers.
    pub fn integer_coeffs(&self) -> Result<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.to_bigint().ok_or(WitError::NonIntegerCoefficients))
            .collect()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})T"),
                _ => format!("({c})T^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Monic characteristic polynomial `det(T·I − m)` by Faddeev–LeVerrier.
pub fn char_poly(m: &Matrix) -> Result<Poly> {
    if !m.is_square() {
        return Err(WitError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let mut coeffs = vec![GaussRational::zero(); n + 1];
    coeffs[n] = GaussRational::one();
    let id = Matrix::identity(n);
    let mut acc = Matrix::zeros(n, n);
    for k in 1..=n {
        acc = m.dot_mat(&acc).add(&id.scale(&coeffs[n - k + 1]));
        let t = m.dot_mat(&acc).trace();
        coeffs[n - k] = -(&t / &GaussRational::from_int(k as i64));
    }
    Ok(Poly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_scalar::ratio;

    #[test]
    fn char_poly_identity() {
        let p = char_poly(&Matrix::identity(2)).unwrap();
        assert_eq!(p, Poly::from_ints(&[1, -2, 1]));
    }

    #[test]
    fn char_poly_phi6() {
        let m = Matrix::from_int_rows(&[vec![0, -1], vec![1, 1]]);
        assert_eq!(char_poly(&m).unwrap(), Poly::from_ints(&[1, -1, 1]));
    }

    #[test]
    fn char_poly_diagonal() {
        let m = Matrix::from_int_rows(&[vec![2, 0], vec![0, 3]]);
        let expect = Poly::from_ints(&[-2, 1]).mul(&Poly::from_ints(&[-3, 1]));
        assert_eq!(char_poly(&m).unwrap(), expect);
    }

    #[test]
    fn char_poly_matches_determinant() {
        let m = Matrix::from_rows(vec![
            vec![GaussRational::real(ratio(1, 2)), GaussRational::i(), GaussRational::from_int(2)],
            vec![GaussRational::from_int(0), GaussRational::from_int(3), GaussRational::from_int(-1)],
            vec![GaussRational::from_int(4), GaussRational::from_int(1), GaussRational::real(ratio(-2, 3))],
        ])
        .unwrap();
        let p = char_poly(&m).unwrap();
        for x in -3..4 {
            let xv = GaussRational::from_int(x);
            let shifted = Matrix::identity(3).scale(&xv).sub(&m);
            assert_eq!(p.eval(&xv), shifted.det().unwrap());
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(char_poly(&Matrix::zeros(2, 3)).is_err());
    }
}
