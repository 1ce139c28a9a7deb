//! Scalar tables and explicit models for isometries of ε-symmetric forms:
//! a single mixed block, an odd orthogonal block with its distinguished
//! vector `w̃`, and two odd blocks glued by `ξ`.

pub mod uniqueness;

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Result, WitError};
use crate::exact_scalar::{GaussRational, Matrix, Rational, Vector};
use crate::profile::{pairing_table, Profile};

pub(crate) fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub(crate) fn choose(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    binomial(big(n), big(k))
}

pub(crate) fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `h (h−1) ⋯ (h−k+1)`.
pub(crate) fn falling(h: i64, k: i64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, m| acc * big(h - m))
}

pub(crate) fn pow2(e: i64) -> BigInt {
    BigInt::one() << e as usize
}

/// `2^{−e}` as a scalar.
pub(crate) fn inv_pow2(e: i64) -> GaussRational {
    GaussRational::real(Rational::new(BigInt::one(), pow2(e)))
}

pub(crate) fn sign(e: i64) -> BigInt {
    if e.is_even() {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Exact quotient; panics if the division leaves a remainder.
pub(crate) fn exact_div(n: BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_rem(d);
    assert!(r.is_zero(), "inexact division");
    q
}

pub(crate) fn gr(n: BigInt) -> GaussRational {
    GaussRational::from_bigint(n)
}

/// Which recipe produced a coefficient table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefOrigin {
    /// `(1−T)^a (1+T)^b` with `x` the reciprocal series.
    Mixed,
    /// Closed forms for an odd orthogonal block.
    Odd,
    /// `(1−T²)^a (1+T²)^b`, even-indexed.
    TwistedMixed,
    /// `(1+T²)^{2p}` with `x` from `(1−T²)(1+T²)^{−2p}`.
    TwistedEven,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefTable {
    pub n_seq: Vec<BigInt>,
    pub x_seq: Vec<BigInt>,
    pub origin: CoefOrigin,
}

impl CoefTable {
    /// Integers are rendered as decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        let strs = |v: &[BigInt]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        json!({ "n_seq": strs(&self.n_seq), "x_seq": strs(&self.x_seq), "origin": self.origin })
    }
}

/// Coefficients of `(1−T)^a (1+T)^b`.
pub fn n_coeffs(a: usize, b: usize) -> Vec<BigInt> {
    let (a, b) = (a as i64, b as i64);
    (0..=a + b)
        .map(|e| {
            (0..=e.min(a))
                .map(|i| sign(i) * choose(a, i) * choose(b, e - i))
                .sum()
        })
        .collect()
}

/// Solves `n_0 x_e + n_1 x_{e−1} + ⋯ + n_e x_0 = 0` (e ≥ 1) from `x_0`.
pub fn x_coeffs(n_seq: &[BigInt], x0: &BigInt, len: usize) -> Result<Vec<BigInt>> {
    let n0 = n_seq.first().cloned().unwrap_or_default();
    if n0.is_zero() {
        return Err(WitError::Precondition("leading coefficient is zero".into()));
    }
    if n0.abs() != BigInt::one() {
        return Err(WitError::Precondition("leading coefficient must be ±1".into()));
    }
    let mut x: Vec<BigInt> = Vec::with_capacity(len);
    for e in 0..len {
        if e == 0 {
            x.push(x0.clone());
            continue;
        }
        let s: BigInt = (1..=e.min(n_seq.len() - 1)).map(|h| &n_seq[h] * &x[e - h]).sum();
        // n0 = ±1, so dividing by it is multiplying by it
        x.push(-(s * &n0));
    }
    Ok(x)
}

pub fn mixed_table(a: usize, b: usize, len: usize) -> Result<CoefTable> {
    let n_seq = n_coeffs(a, b);
    let x_seq = x_coeffs(&n_seq, &BigInt::one(), len)?;
    Ok(CoefTable { n_seq, x_seq, origin: CoefOrigin::Mixed })
}

/// `n_e = (−1)^e C(2p+1, e)`.
pub fn odd_n(p: usize) -> Vec<BigInt> {
    n_coeffs(2 * p + 1, 0)
}

/// Closed form `x_e = 2(p+e)(2p+1)(2p+2)⋯(2p+e−1)/e!`, with `x_0 = 1`
/// (or 2 when `p = 0`).
pub fn odd_x(p: usize, e: usize) -> BigInt {
    let (p, e) = (p as i64, e as i64);
    if e == 0 {
        return if p == 0 { big(2) } else { BigInt::one() };
    }
    let rising: BigInt = (1..e).fold(BigInt::one(), |acc, k| acc * big(2 * p + k));
    exact_div(big(2) * big(p + e) * rising, &factorial(e))
}

pub fn odd_table(p: usize, len: usize) -> CoefTable {
    CoefTable { n_seq: odd_n(p), x_seq: (0..len).map(|e| odd_x(p, e)).collect(), origin: CoefOrigin::Odd }
}

/// Series coefficients of `(1+T)(1−T)^{−2p−1}`.
pub fn odd_x_series(p: usize, len: usize) -> Vec<BigInt> {
    let p = p as i64;
    (0..len as i64)
        .map(|e| choose(2 * p + e, e) + if e > 0 { choose(2 * p + e - 1, e - 1) } else { BigInt::zero() })
        .collect()
}

/// `f_p(u) = 2 ∏_{k<p} (u² − k²) / (2p)!`.
pub fn f_value(p: usize, u: i64) -> BigInt {
    let prod = (0..p as i64).fold(BigInt::one(), |acc, k| acc * big(u * u - k * k));
    exact_div(big(2) * prod, &factorial(2 * p as i64))
}

/// `f_p(u)` read from the `x` table: 0 for `|u| < p`, else `x_{|u|−p}`.
pub fn f_piecewise(p: usize, u: i64) -> BigInt {
    let a = u.unsigned_abs() as usize;
    if a < p {
        BigInt::zero()
    } else {
        odd_x(p, a - p)
    }
}

/// `(w_h, w̃)` for the odd block of parameter `p`:
/// `2^{p+1} h(h−1)⋯(h−2p+1) / (2p)!`.
pub fn tilde_cross(p: usize, h: i64) -> BigInt {
    let p = p as i64;
    exact_div(pow2(p + 1) * falling(h, 2 * p), &factorial(2 * p))
}

/// `(w̃_0, w̃_h) = Σ_{r≤p} (−1)^r 4^r f_r(h)`.
pub fn tilde_self(p: usize, h: i64) -> BigInt {
    (0..=p).map(|r| sign(r as i64) * pow2(2 * r as i64) * f_value(r, h)).sum()
}

/// `(z_h, ξ) = 2^{p1−p2+1} (h+p2)(h+p2−1)⋯(h+p2−2p1+1) / (2p1)!`.
pub fn xi_cross(p1: usize, p2: usize, h: i64) -> BigInt {
    let (p1, p2) = (p1 as i64, p2 as i64);
    exact_div(pow2(p1 - p2 + 1) * falling(h + p2, 2 * p1), &factorial(2 * p1))
}

/// `(ξ_0, ξ_h) = Σ_{r∈[p2,p1]} (−1)^r 4^{r−p2} f_r(h)`.
pub fn xi_self(p1: usize, p2: usize, h: i64) -> BigInt {
    (p2..=p1).map(|r| sign(r as i64) * pow2(2 * (r - p2) as i64) * f_value(r, h)).sum()
}

/// Default offset window `[−(4p+2), 4p+2]`.
pub fn default_range(p: usize) -> RangeInclusive<i64> {
    let r = 4 * p as i64 + 2;
    -r..=r
}

/// An explicit space with form, isometry and line generators. Matrices act
/// on column coordinates; `gram[i][j] = (e_i, e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsoModel {
    pub dim: usize,
    pub epsilon: i8,
    pub gram: Matrix,
    pub g: Matrix,
    pub lines: Vec<Vector>,
    pub tilde: Vec<Vector>,
}

impl IsoModel {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dim": self.dim,
            "epsilon": self.epsilon,
            "gram": self.gram,
            "g": self.g,
            "lines": self.lines,
            "tilde": self.tilde,
        })
    }

    /// `gᵀ·gram·g = gram`.
    pub fn preserves_form(&self) -> bool {
        self.g.transpose().dot_mat(&self.gram).dot_mat(&self.g) == self.gram
    }

    /// `gramᵀ = ε·gram`.
    pub fn is_eps_symmetric(&self) -> bool {
        self.gram.transpose() == self.gram.scale(&GaussRational::from_int(self.epsilon as i64))
    }
}

fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![GaussRational::zero(); n];
    v[i] = GaussRational::one();
    v
}

/// Shift matrix `e_i ↦ e_{i+1}` with the last column given.
fn companion(n: usize, last: &[BigInt]) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        g[(i + 1, i)] = GaussRational::one();
    }
    for (i, c) in last.iter().enumerate() {
        g[(i, n - 1)] = gr(c.clone());
    }
    g
}

/// Single block with `g` of type `(1−T)^a(1+T)^b`, `a + b = 2p`.
pub fn model_mixed_block(a: usize, b: usize) -> Result<IsoModel> {
    let dim = a + b;
    if dim == 0 || dim % 2 == 1 {
        return Err(WitError::Precondition("a + b must be even and positive".into()));
    }
    if a > 0 && b > 0 && a % 2 != b % 2 {
        return Err(WitError::Precondition("a and b must have the same parity".into()));
    }
    let odd = if a > 0 { a % 2 == 1 } else { b % 2 == 1 };
    let epsilon: i8 = if odd { 1 } else { -1 };
    let p = dim / 2;
    let table = mixed_table(a, b, dim)?;
    let eps = big(epsilon as i64);
    let last: Vec<BigInt> = table.n_seq[..dim].iter().map(|n| n * &eps).collect();
    let g = companion(dim, &last);
    let gram = Matrix::from_fn(dim, dim, |i, j| {
        let d = j as i64 - i as i64;
        let p = p as i64;
        if d.abs() < p {
            GaussRational::zero()
        } else if d >= p {
            gr(table.x_seq[(d - p) as usize].clone())
        } else {
            gr(&eps * &table.x_seq[(-d - p) as usize])
        }
    });
    Ok(IsoModel { dim, epsilon, gram, g, lines: vec![unit(dim, 0)], tilde: vec![] })
}

/// Coefficients of `w̃` in the basis `w_0..w_{2p}`: orthogonal to
/// `w_0..w_{2p−1}`, last coefficient `2^{−p}`.
fn odd_tilde(gram: &Matrix, p: usize) -> Result<Vector> {
    let n = 2 * p + 1;
    let rows = Matrix::from_fn(2 * p, n, |i, j| gram[(i, j)].clone());
    let null = rows.nullspace();
    if null.len() != 1 {
        return Err(WitError::Normalization("distinguished vector is not unique".into()));
    }
    let v = &null[0];
    let s = &inv_pow2(p as i64) / &v[n - 1];
    Ok(v.iter().map(|c| c * &s).collect())
}

/// Odd orthogonal block of dimension `2p+1` with `(w_i, w_j) = (−1)^p f_p(i−j)`.
pub fn model_odd_block(p: usize) -> Result<IsoModel> {
    let n = 2 * p + 1;
    let g = companion(n, &odd_n(p)[..n]);
    let sp = sign(p as i64);
    let gram = Matrix::from_fn(n, n, |i, j| gr(&sp * f_value(p, i as i64 - j as i64)));
    let tilde = odd_tilde(&gram, p)?;
    let lines = if p >= 1 { vec![unit(n, 0), tilde.clone()] } else { vec![tilde.clone()] };
    Ok(IsoModel { dim: n, epsilon: 1, gram, g, lines, tilde: vec![tilde] })
}

/// Odd blocks of sizes `2p1+1` and `2p2−1`, with lines `z_0` and
/// `ξ = 2^{−p2}(z̃_{−p2} + i·ṽ_0)`.
pub fn model_paired_odd_blocks(p1: usize, p2: usize) -> Result<IsoModel> {
    if p2 == 0 || p1 < p2 {
        return Err(WitError::Precondition("need p1 ≥ p2 ≥ 1".into()));
    }
    let big_block = model_odd_block(p1)?;
    let small = model_odd_block(p2 - 1)?;
    let (n1, n2) = (big_block.dim, small.dim);
    let dim = n1 + n2;
    let gram = Matrix::block_diag(&[&big_block.gram, &small.gram]);
    let g = Matrix::block_diag(&[&big_block.g, &small.g]);
    let z_tilde = big_block.g.pow(-(p2 as i64))?.mul_vec(&big_block.tilde[0]);
    let scale = inv_pow2(p2 as i64);
    let i = GaussRational::i();
    let xi: Vector = z_tilde
        .iter()
        .map(|c| c * &scale)
        .chain(small.tilde[0].iter().map(|c| &(c * &i) * &scale))
        .collect();
    debug_assert_eq!(xi.len(), dim);
    Ok(IsoModel { dim, epsilon: 1, gram, g, lines: vec![unit(dim, 0), xi.clone()], tilde: vec![xi] })
}

/// Table of `(z^t_i, z^{t′}_j)` against `i − j` for the model's lines
/// (1-based `t`).
pub fn pairing_profile(model: &IsoModel, t: usize, t2: usize, range: RangeInclusive<i64>) -> Result<Profile> {
    let get = |t: usize| {
        t.checked_sub(1)
            .and_then(|k| model.lines.get(k))
            .ok_or_else(|| WitError::Normalization(format!("no normalized vector for line {t}")))
    };
    pairing_table(&model.gram, &model.g, get(t)?, get(t2)?, range)
}
