//! Cyclotomic polynomials Φ_d (d ≤ 60) and factorization by trial division.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Poly;
use crate::error::{Result, WitError};

pub const MAX_CYCLOTOMIC_INDEX: u32 = 60;

fn table() -> &'static Vec<Vec<BigInt>> {
    static TABLE: OnceLock<Vec<Vec<BigInt>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // index 0 unused
        let mut t: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        for d in 1..=MAX_CYCLOTOMIC_INDEX as usize {
            // T^d − 1 divided by Φ_e for every proper divisor e
            let mut p = vec![BigInt::zero(); d + 1];
            p[0] = -BigInt::one();
            p[d] = BigInt::one();
            for (e, phi) in t.iter().enumerate().skip(1) {
                if d % e == 0 {
                    let (q, r) = div_rem_monic(&p, phi);
                    debug_assert!(r.iter().all(Zero::is_zero));
                    p = q;
                }
            }
            t.push(p);
        }
        t
    })
}

/// Φ_d as ascending integer coefficients.
pub fn cyclotomic_poly(d: u32) -> Result<Vec<BigInt>> {
    if d == 0 || d > MAX_CYCLOTOMIC_INDEX {
        return Err(WitError::Unsupported(format!("cyclotomic index {d}")));
    }
    Ok(table()[d as usize].clone())
}

/// Long division by a monic integer polynomial.
fn div_rem_monic(p: &[BigInt], m: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let dm = m.len() - 1;
    if p.len() <= dm {
        return (vec![BigInt::zero()], p.to_vec());
    }
    let mut r = p.to_vec();
    let mut q = vec![BigInt::zero(); p.len() - dm];
    for k in (0..q.len()).rev() {
        let c = r[k + dm].clone();
        if c.is_zero() {
            continue;
        }
        for (j, mj) in m.iter().enumerate() {
            r[k + j] -= &c * mj;
        }
        q[k] = c;
    }
    r.truncate(dm.max(1));
    (trim(q), trim(r))
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

/// Multiset of cyclotomic indices, plus whatever could not be divided out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloFactorization {
    pub factors: BTreeMap<u32, u32>,
    /// Ascending coefficients of the cofactor; `[1]` when complete.
    pub remainder: Vec<BigInt>,
}

impl CycloFactorization {
    pub fn is_complete(&self) -> bool {
        self.remainder.len() == 1 && self.remainder[0].is_one()
    }

    /// Sum of `multiplicity · deg Φ_d`.
    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(&d, &m)| m as usize * (table()[d as usize].len() - 1))
            .sum()
    }

    /// Renders as e.g. `Phi3*Phi6^2`.
    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(|(d, m)| if *m == 1 { format!("Phi{d}") } else { format!("Phi{d}^{m}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Factors a monic integer polynomial into Φ_d, d ≤ 60.
pub fn cyclotomic_factorization(p: &Poly) -> Result<CycloFactorization> {
    let coeffs = p.integer_coeffs()?;
    if !p.is_monic() {
        return Err(WitError::Precondition("polynomial must be monic".into()));
    }
    Ok(factor_integer_coeffs(coeffs))
}

pub(crate) fn factor_integer_coeffs(mut rest: Vec<BigInt>) -> CycloFactorization {
    let mut factors = BTreeMap::new();
    for d in 1..=MAX_CYCLOTOMIC_INDEX {
        let phi = &table()[d as usize];
        loop {
            if rest.len() < phi.len() {
                break;
            }
            let (q, r) = div_rem_monic(&rest, phi);
            if r.iter().all(Zero::is_zero) {
                *factors.entry(d).or_insert(0) += 1;
                rest = q;
            } else {
                break;
            }
        }
    }
    CycloFactorization { factors, remainder: rest }
}

/// Euler's totient, i.e. deg Φ_d.
pub fn totient(d: u32) -> u32 {
    (1..=d).filter(|k| k.gcd(&d) == 1).count() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(c: &[i64]) -> Vec<BigInt> {
        c.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1).unwrap(), ints(&[-1, 1]));
        assert_eq!(cyclotomic_poly(6).unwrap(), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_poly(12).unwrap(), ints(&[1, 0, -1, 0, 1]));
        assert_eq!(cyclotomic_poly(30).unwrap(), ints(&[1, 1, 0, -1, -1, -1, 0, 1, 1]));
        for d in 1..=60 {
            assert_eq!(cyclotomic_poly(d).unwrap().len() - 1, totient(d) as usize);
        }
    }

    #[test]
    fn factor_phi6() {
        let f = cyclotomic_factorization(&Poly::from_ints(&[1, -1, 1])).unwrap();
        assert_eq!(f.factors, BTreeMap::from([(6, 1)]));
        assert!(f.is_complete());
    }

    #[test]
    fn factor_mixed() {
        let p = Poly::from_ints(&[1, 1, 1]).mul(&Poly::from_ints(&[-1, 1]).pow(2));
        let f = cyclotomic_factorization(&p).unwrap();
        assert_eq!(f.factors, BTreeMap::from([(1, 2), (3, 1)]));
    }

    #[test]
    fn non_cyclotomic_remainder() {
        let f = cyclotomic_factorization(&Poly::from_ints(&[-2, 0, 1]).mul(&Poly::from_ints(&[1, 1]))).unwrap();
        assert_eq!(f.factors, BTreeMap::from([(2, 1)]));
        assert_eq!(f.remainder, ints(&[-2, 0, 1]));
        assert!(!f.is_complete());
    }

    #[test]
    fn rejects_rational_coefficients() {
        let p = Poly::new(vec![
            crate::exact_scalar::GaussRational::real(crate::exact_scalar::ratio(1, 2)),
            crate::exact_scalar::GaussRational::from_int(1),
        ]);
        assert_eq!(cyclotomic_factorization(&p), Err(WitError::NonIntegerCoefficients));
    }

    proptest! {
        #[test]
        fn product_of_two(d1 in 1u32..=30, d2 in 1u32..=30) {
            let p = Poly::from_bigints(&cyclotomic_poly(d1).unwrap())
                .mul(&Poly::from_bigints(&cyclotomic_poly(d2).unwrap()));
            let f = cyclotomic_factorization(&p).unwrap();
            let mut expect = BTreeMap::new();
            *expect.entry(d1).or_insert(0) += 1;
            *expect.entry(d2).or_insert(0) += 1;
            prop_assert_eq!(&f.factors, &expect);
            prop_assert!(f.is_complete());
        }
    }
}
