//! Scalar tables and explicit models for nondegenerate bilinear forms under
//! twisted conjugation. A form `g: V → V*` is stored as its matrix `M` in
//! dual coordinates, so that `(x, g y) = xᵀ M y`. Then `ǧ = M⁻ᵀ`, the square
//! `g^{*2} = ǧg = M⁻ᵀM` acts on `V`, and `g^{*(2k+1)} = M (M⁻ᵀM)^k`.

pub mod uniqueness;

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Result, WitError};
use crate::exact_scalar::{dot, GaussRational, Matrix, Vector};
use crate::iso_models::{choose, exact_div, factorial, gr, inv_pow2, pow2, sign, x_coeffs, CoefOrigin, CoefTable};
use crate::profile::Profile;

/// A vector space with a nondegenerate bilinear form `g ∈ G¹_V`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSpace {
    pub g: Matrix,
}

impl TwistedSpace {
    pub fn new(g: Matrix) -> Result<Self> {
        if !g.is_square() {
            return Err(WitError::DimensionMismatch("form matrix must be square".into()));
        }
        if g.rank() != g.rows() {
            return Err(WitError::Singular);
        }
        Ok(TwistedSpace { g })
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    /// The fixed pairing `V × V* → k` in coordinates.
    pub fn dual_pairing(&self) -> Matrix {
        Matrix::identity(self.dim())
    }

    /// `ǧ: V* → V`, characterised by `(ǧz′, gz) = (z, z′)`.
    pub fn check(&self) -> Result<Matrix> {
        Ok(self.g.inverse()?.transpose())
    }

    /// `g^{*2} = ǧg ∈ GL(V)`.
    pub fn star_square(&self) -> Result<Matrix> {
        Ok(self.check()?.dot_mat(&self.g))
    }

    /// Matrix of `g^{*i}`: an endomorphism of `V` for even `i`, a map
    /// `V → V*` for odd `i`.
    pub fn star_power(&self, i: i64) -> Result<Matrix> {
        let s = self.star_square()?;
        if i.is_even() {
            s.pow(i / 2)
        } else {
            Ok(self.g.dot_mat(&s.pow(i.div_euclid(2))?))
        }
    }

    /// `(x_i, y_j)` for `i`, `j` of opposite parity; the even-indexed side
    /// lives in `V`, the odd one in `V*`.
    pub fn pairing(&self, x: &[GaussRational], i: i64, y: &[GaussRational], j: i64) -> Result<GaussRational> {
        if (i - j).is_even() {
            return Err(WitError::Precondition("indices must have opposite parity".into()));
        }
        let xi = self.star_power(i)?.mul_vec(x);
        let yj = self.star_power(j)?.mul_vec(y);
        Ok(dot(&xi, &yj))
    }

    /// `γ*g*γ⁻¹ = γ⁻ᵀ M γ⁻¹`.
    pub fn conjugate(&self, gamma: &Matrix) -> Result<TwistedSpace> {
        let inv = gamma.inverse()?;
        TwistedSpace::new(inv.transpose().dot_mat(&self.g).dot_mat(&inv))
    }
}

/// `d ↦ (x_i, y_j)` with `i` even, `j` odd and `d = i − j`, on the odd
/// offsets of `range`. Even offsets carry zero.
pub fn twisted_table(space: &TwistedSpace, x: &[GaussRational], y: &[GaussRational], range: RangeInclusive<i64>) -> Result<Profile> {
    let (lo, hi) = (*range.start(), *range.end());
    let first = if lo.is_odd() { lo } else { lo + 1 };
    let s = space.star_square()?;
    let gy = space.g.mul_vec(y);
    let mut cur = s.pow((first + 1) / 2)?.mul_vec(x);
    let mut values = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for d in lo..=hi {
        if d.is_even() {
            values.push(GaussRational::zero());
            continue;
        }
        values.push(dot(&cur, &gy));
        if d + 2 <= hi {
            cur = s.mul_vec(&cur);
        }
    }
    Ok(Profile { lo, values })
}

fn check_parity(a: usize, b: usize) -> Result<usize> {
    if a % 2 == 0 {
        return Err(WitError::Precondition(format!("a = {a} must be odd")));
    }
    if b % 2 == 1 {
        return Err(WitError::Precondition(format!("b = {b} must be even")));
    }
    Ok((a + b + 1) / 2)
}

/// Even-indexed coefficients of `(1−T²)^a (1+T²)^b` and the reciprocal
/// series; entry `m` of each list is the coefficient of `T^{2m}`.
pub fn n_x_coeffs2(a: usize, b: usize, len: usize) -> Result<CoefTable> {
    check_parity(a, b)?;
    let n_seq = crate::iso_models::n_coeffs(a, b);
    let x_seq = x_coeffs(&n_seq, &BigInt::one(), len)?;
    Ok(CoefTable { n_seq, x_seq, origin: CoefOrigin::TwistedMixed })
}

/// `x′_h`: zero for `|h| < 2p−1`, else `x_{|h|−2p+1}` (from a half-indexed table).
pub fn x_prime(x_seq: &[BigInt], p: usize, h: i64) -> BigInt {
    let k = h.abs() - (2 * p as i64 - 1);
    if k < 0 {
        return BigInt::zero();
    }
    x_seq.get((k / 2) as usize).cloned().unwrap_or_else(|| panic!("x table too short for offset {h}"))
}

/// `Σ_e n_e x′_{e−j−1}` for even `j`; vanishes for `j ∈ [0, 4p−4]`.
pub fn single_identity(a: usize, b: usize, j: i64) -> Result<BigInt> {
    let p = check_parity(a, b)?;
    let t = n_x_coeffs2(a, b, 2 * (a + b) + j.unsigned_abs() as usize + 4)?;
    Ok(t.n_seq.iter().enumerate().map(|(m, n)| n * x_prime(&t.x_seq, p, 2 * m as i64 - j - 1)).sum())
}

/// `n_{2m} = C(2p, m)` for an even block.
pub fn even_n(p: usize) -> Vec<BigInt> {
    (0..=2 * p as i64).map(|m| choose(2 * p as i64, m)).collect()
}

/// `x_{2k}` for an even block: coefficients of `(1−T²)(1+T²)^{−2p}`.
pub fn even_x(p: usize, len: usize) -> Vec<BigInt> {
    let n = even_n(p);
    let mut x: Vec<BigInt> = Vec::with_capacity(len);
    for k in 0..len {
        let v = match k {
            0 => BigInt::one(),
            1 => -BigInt::from(2 * p as i64 + 1),
            _ => -(1..=k.min(n.len() - 1)).map(|h| &n[h] * &x[k - h]).sum::<BigInt>(),
        };
        x.push(v);
    }
    x
}

/// Closed form `(−1)^k (2p+2k−1)(2p−2+k)⋯(k+1) / (2p−1)!`.
pub fn even_x_closed(p: usize, k: usize) -> BigInt {
    let (p, k) = (p as i64, k as i64);
    let num = sign(k) * BigInt::from(2 * p + 2 * k - 1) * crate::iso_models::falling(2 * p - 2 + k, 2 * p - 2);
    exact_div(num, &factorial(2 * p - 1))
}

pub fn even_table(p: usize, len: usize) -> CoefTable {
    CoefTable { n_seq: even_n(p), x_seq: even_x(p, len), origin: CoefOrigin::TwistedEven }
}

/// `start (start−2) (start−4) ⋯`, `count` factors.
fn step2_product(start: i64, count: i64) -> BigInt {
    (0..count).fold(BigInt::one(), |acc, m| acc * BigInt::from(start - 2 * m))
}

/// `(4p−2)!! = 2^{2p−1}(2p−1)!`.
fn even_double_factorial(p: i64) -> BigInt {
    pow2(2 * p - 1) * factorial(2 * p - 1)
}

fn half_odd(h: i64) -> i64 {
    assert!(h.is_odd(), "offset {h} must be odd");
    (h + 1).div_euclid(2)
}

/// `φ_p(h)` by its piecewise definition.
pub fn phi_piecewise(p: usize, h: i64) -> BigInt {
    let k = h.abs() - (2 * p as i64 - 1);
    if k < 0 {
        return BigInt::zero();
    }
    even_x(p, (k / 2 + 1) as usize).pop().expect("nonempty")
}

/// `φ_p(h) = (−1)^{(h+2p+1)/2} 2h (h+2p−3)(h+2p−5)⋯(h−2p+3) / (4p−2)!!`.
pub fn phi_value(p: usize, h: i64) -> BigInt {
    let pi = p as i64;
    let num = sign(half_odd(h) + pi) * BigInt::from(2 * h) * step2_product(h + 2 * pi - 3, 2 * pi - 2);
    exact_div(num, &even_double_factorial(pi))
}

/// `φ_p` on the odd offsets of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiTable {
    pub p: usize,
    pub values: std::collections::BTreeMap<i64, BigInt>,
}

pub fn phi_values(p: usize, range: RangeInclusive<i64>) -> Result<PhiTable> {
    if p == 0 {
        return Err(WitError::Precondition("φ_p needs p ≥ 1".into()));
    }
    let values = range.filter(|h| h.is_odd()).map(|h| (h, phi_value(p, h))).collect();
    Ok(PhiTable { p, values })
}

/// `(w̃_0, w_h) = (−1)^{(h+1)/2} 2^p (h−1)(h−3)⋯(h−4p+3) / (4p−2)!!`.
pub fn tw_tilde_cross(p: usize, h: i64) -> BigInt {
    let pi = p as i64;
    let num = sign(half_odd(h)) * pow2(pi) * step2_product(h - 1, 2 * pi - 1);
    exact_div(num, &even_double_factorial(pi))
}

/// `(w̃_0, w̃_h) = Σ_{k ≤ p} 2^{2k−2} φ_k(h)`.
pub fn tw_tilde_self(p: usize, h: i64) -> BigInt {
    (1..=p).map(|k| pow2(2 * k as i64 - 2) * phi_value(k, h)).sum()
}

/// `(ξ_0, z_h) = 2^{p1−p2+1} (−1)^{(h+2p2+1)/2} (h+2p2−1)(h+2p2−3)⋯(h+2p2−4p1+3) / (4p1−2)!!`.
pub fn tw_xi_cross(p1: usize, p2: usize, h: i64) -> BigInt {
    let (p1, p2) = (p1 as i64, p2 as i64);
    let num = pow2(p1 - p2 + 1) * sign(half_odd(h) + p2) * step2_product(h + 2 * p2 - 1, 2 * p1 - 1);
    exact_div(num, &even_double_factorial(p1))
}

/// `(ξ_0, ξ_h) = Σ_{k ∈ [p2, p1]} 2^{2k−2p2} φ_k(h)`.
pub fn tw_xi_self(p1: usize, p2: usize, h: i64) -> BigInt {
    (p2..=p1).map(|k| pow2(2 * (k - p2) as i64) * phi_value(k, h)).sum()
}

/// An explicit model: a form, its line generators and any distinguished
/// vectors used to build them.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedModel {
    pub space: TwistedSpace,
    pub lines: Vec<Vector>,
    pub tilde: Vec<Vector>,
}

impl TwistedModel {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dim": self.dim(),
            "g": self.space.g,
            "dual_pairing": self.space.dual_pairing(),
            "lines": self.lines,
            "tilde": self.tilde,
        })
    }

    /// Table of `(z^t_i, z^{t′}_j)` against `i − j` (1-based `t`).
    pub fn table(&self, t: usize, t2: usize, range: RangeInclusive<i64>) -> Result<Profile> {
        let get = |t: usize| {
            t.checked_sub(1)
                .and_then(|k| self.lines.get(k))
                .ok_or_else(|| WitError::Precondition(format!("no line {t}")))
        };
        twisted_table(&self.space, get(t)?, get(t2)?, range)
    }
}

pub(crate) fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![GaussRational::zero(); n];
    v[i] = GaussRational::one();
    v
}

/// Single block with `g^{*2}` of type `(1−T)^a(1+T)^b`, `a + b = 2p−1`:
/// `M[k][l] = x′_{2(k−l)−1}`.
pub fn model_single_twisted(a: usize, b: usize) -> Result<TwistedModel> {
    let p = check_parity(a, b)?;
    let dim = a + b;
    let t = n_x_coeffs2(a, b, dim + 1)?;
    let g = Matrix::from_fn(dim, dim, |k, l| gr(x_prime(&t.x_seq, p, 2 * (k as i64 - l as i64) - 1)));
    Ok(TwistedModel { space: TwistedSpace::new(g)?, lines: vec![unit(dim, 0)], tilde: vec![] })
}

fn even_form(p: usize) -> Matrix {
    let dim = 2 * p;
    Matrix::from_fn(dim, dim, |k, l| gr(phi_value(p, 2 * (k as i64 - l as i64) - 1)))
}

/// `w̃` in the basis `w_0, w_2, …, w_{4p−2}`: annihilates `w_1, …, w_{4p−3}`
/// and has last coefficient `2^{−p}`.
fn even_tilde(form: &Matrix, p: usize) -> Result<Vector> {
    let dim = 2 * p;
    // row l of the system is (·, w_{2l+1}) = (column l of M)ᵀ
    let rows = Matrix::from_fn(dim - 1, dim, |l, k| form[(k, l)].clone());
    let null = rows.nullspace();
    if null.len() != 1 {
        return Err(WitError::Normalization("distinguished vector is not unique".into()));
    }
    let v = &null[0];
    let s = &inv_pow2(p as i64) / &v[dim - 1];
    Ok(v.iter().map(|c| c * &s).collect())
}

/// Even block of dimension `2p` with `(w_i, w_j) = φ_p(i−j)`; `w̃` is
/// recorded in `tilde`.
pub fn model_even_twisted(p: usize) -> Result<TwistedModel> {
    if p == 0 {
        return Err(WitError::Precondition("even block needs p ≥ 1".into()));
    }
    let g = even_form(p);
    let tilde = even_tilde(&g, p)?;
    Ok(TwistedModel { space: TwistedSpace::new(g)?, lines: vec![unit(2 * p, 0)], tilde: vec![tilde] })
}

/// Even blocks of sizes `2p1` and `2p2−2`, with lines `z_0` and
/// `ξ = 2^{−p2+1}(z̃_{−2p2} + i·ṽ_0)`.
pub fn model_paired_even_twisted(p1: usize, p2: usize) -> Result<TwistedModel> {
    if p2 == 0 || p1 < p2 {
        return Err(WitError::Precondition("need p1 ≥ p2 ≥ 1".into()));
    }
    let big_block = model_even_twisted(p1)?;
    let n1 = big_block.dim();
    let z_tilde = big_block.space.star_power(-2 * p2 as i64)?.mul_vec(&big_block.tilde[0]);
    let scale = inv_pow2(p2 as i64 - 1);
    let i = GaussRational::i();
    let (g, v_tilde) = if p2 >= 2 {
        let small = model_even_twisted(p2 - 1)?;
        (Matrix::block_diag(&[&big_block.space.g, &small.space.g]), small.tilde[0].clone())
    } else {
        (big_block.space.g.clone(), vec![])
    };
    let xi: Vector = z_tilde
        .iter()
        .map(|c| c * &scale)
        .chain(v_tilde.iter().map(|c| &(c * &i) * &scale))
        .collect();
    let dim = g.rows();
    debug_assert!(n1 <= dim && xi.len() == dim);
    Ok(TwistedModel { space: TwistedSpace::new(g)?, lines: vec![unit(dim, 0), xi.clone()], tilde: vec![xi] })
}
