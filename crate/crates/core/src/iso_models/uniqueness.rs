//! Rebuilds full pairing tables from a minimal set of constraints, using
//! only the recurrences forced by the minimal polynomial of `g`. The
//! results are meant to be compared against the explicit models.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{choose, odd_n, sign};
use crate::error::{Result, WitError};
use crate::exact_scalar::{rational_sqrt, GaussRational, Rational};
use crate::profile::Profile;

type Table = BTreeMap<i64, Rational>;

fn r(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

fn at(t: &Table, u: i64) -> &Rational {
    t.get(&u).unwrap_or_else(|| panic!("table has no entry at {u}"))
}

fn to_profile(t: &Table, range: RangeInclusive<i64>) -> Profile {
    Profile::from_fn(range, |u| GaussRational::real(at(t, u).clone()))
}

/// Coefficients of `(1−T)^{−k}` up to `len` terms.
fn inv_one_minus_t(k: i64, len: usize) -> Vec<Rational> {
    (0..len as i64)
        .map(|s| if k == 0 { r(BigInt::from((s == 0) as i64)) } else { r(choose(k - 1 + s, s)) })
        .collect()
}

fn series_mul(a: &[Rational], b: &[Rational], len: usize) -> Vec<Rational> {
    (0..len)
        .map(|k| (0..=k).filter(|&i| i < a.len() && k - i < b.len()).map(|i| &a[i] * &b[k - i]).sum())
        .collect()
}

/// `u ↦ (w_i, w_j)` (u = i − j) for one unipotent block of size `2p+1`,
/// from `(w_i, w_j) = 0` for `|i−j| < p`, `= (−1)^p` for `|i−j| = p`, and
/// `(g−1)^{2p+1} = 0`. Valid for `p ≥ 1`, on `[−bound, bound]`.
pub fn anchored_self_profile(p: usize, bound: i64) -> Table {
    let pi = p as i64;
    let n = odd_n(p);
    let mut t = Table::new();
    for u in -pi..=pi {
        let v = if u.abs() < pi { Rational::zero() } else { r(sign(pi)) };
        t.insert(u, v);
    }
    for u in pi + 1..=bound.max(pi) {
        // Σ_h n_h α_{u−h} = 0 with n_0 = 1
        let s: Rational = (1..n.len() as i64).map(|h| r(n[h as usize].clone()) * at(&t, u - h)).sum();
        t.insert(u, -s.clone());
        t.insert(-u, -s);
    }
    t
}

/// Tables rebuilt for an odd block with its distinguished vector.
#[derive(Clone, Debug)]
pub struct OddReconstruction {
    /// `c̄_0..c̄_{2p}` (with `c̄_{2p} = 1`).
    pub cbar: Vec<BigInt>,
    /// Positive solution of `(w̃, w̃) = 2`.
    pub c_star: Rational,
    /// `u ↦ (w_u, w_0)`.
    pub alpha: Profile,
    /// `h ↦ (w_h, w̃_0)`.
    pub cross: Profile,
    /// `h ↦ (w̃_0, w̃_h)`.
    pub tilde: Profile,
}

/// Closed-form `c̄_i` from the partial sums of `C(2p+1, ·)`.
pub fn odd_cbar(p: usize) -> Vec<BigInt> {
    let pi = p as i64;
    let partial = |i: i64| -> BigInt { (0..=i).map(|j| choose(2 * pi + 1, j)).sum() };
    (0..=2 * pi)
        .map(|i| if i < pi { sign(i - 1) * partial(i) } else { sign(i) * partial(2 * pi - i) })
        .collect()
}

/// Rebuilds the odd-block tables from the anchor conditions on `w`, the
/// orthogonality `(w_i, w̃) = 0` for `i ∈ [0, 2p−1]` and `(w̃, w̃) = 2`.
pub fn reconstruct_odd_block(p: usize, range: RangeInclusive<i64>) -> Result<OddReconstruction> {
    let (lo, hi) = (*range.start(), *range.end());
    if p == 0 {
        let two = Profile::from_fn(range.clone(), |_| GaussRational::from_int(2));
        return Ok(OddReconstruction {
            cbar: vec![BigInt::one()],
            c_star: Rational::one(),
            alpha: two.clone(),
            cross: two.clone(),
            tilde: two,
        });
    }
    let pi = p as i64;
    let bound = lo.abs().max(hi.abs()) + 2 * pi + 2;
    let alpha = anchored_self_profile(p, bound);
    let cbar = odd_cbar(p);
    let cb: Vec<Rational> = cbar.iter().cloned().map(r).collect();
    let against = |h: i64| -> Rational { cb.iter().enumerate().map(|(i, c)| c * at(&alpha, h - i as i64)).sum() };
    for h in 0..2 * pi {
        if !against(h).is_zero() {
            return Err(WitError::Normalization(format!("c̄ fails orthogonality at {h}")));
        }
    }
    let self_sum = |h: i64| -> Rational {
        let mut s = Rational::zero();
        for (i, ci) in cb.iter().enumerate() {
            for (j, cj) in cb.iter().enumerate() {
                s += ci * cj * at(&alpha, i as i64 - j as i64 - h);
            }
        }
        s
    };
    let c_star_sq = r(BigInt::from(2)) / self_sum(0);
    let c_star = rational_sqrt(&c_star_sq)
        .ok_or_else(|| WitError::Normalization("c_* is not rational".into()))?;
    let cross = Profile::from_fn(range.clone(), |h| GaussRational::real(&c_star * against(h)));
    let tilde = Profile::from_fn(range.clone(), |h| GaussRational::real(&c_star_sq * self_sum(h)));
    Ok(OddReconstruction { cbar, c_star, alpha: to_profile(&alpha, range), cross, tilde })
}

/// Tables rebuilt for two odd blocks glued by `ξ`.
#[derive(Clone, Debug)]
pub struct PairReconstruction {
    /// `c_0..c_{2e}` with `e = p1 − p2`.
    pub c: Vec<Rational>,
    /// `c′_0 = c_{2e}`.
    pub c_prime0: Rational,
    pub alpha: Profile,
    pub beta: Profile,
    pub gamma: Profile,
}

/// Rebuilds `α, β, γ` from the anchor conditions on `z` and `ξ` and the
/// vanishing window of `γ`. The sign of `ξ` is fixed by `γ_{2p1−p2} > 0`.
pub fn reconstruct_paired(p1: usize, p2: usize, range: RangeInclusive<i64>) -> Result<PairReconstruction> {
    if p2 == 0 || p1 < p2 {
        return Err(WitError::Precondition("need p1 ≥ p2 ≥ 1".into()));
    }
    let (p1i, p2i) = (p1 as i64, p2 as i64);
    let e = p1i - p2i;
    let (lo, hi) = (*range.start(), *range.end());
    let span = lo.abs().max(hi.abs());
    let terms = (span + 2 * p1i + 4) as usize;
    let alpha = anchored_self_profile(p1, terms as i64 + 2 * p1i + 4);

    // unit-normalized coefficients (c′_0 = 1)
    let partial = |i: i64| -> Rational { r((0..=i).map(|j| choose(2 * e + 1, j)).sum()) };
    let mut c_hat = vec![Rational::zero(); (2 * e + 1) as usize];
    for i in 0..=e {
        c_hat[(2 * e - i) as usize] = r(sign(i)) * partial(i);
    }
    for i in 0..e {
        c_hat[i as usize] = r(sign(i + 1)) * partial(i);
    }
    let m: Vec<Rational> = (0..=2 * p2i).map(|j| r(sign(j) * choose(2 * p2i, j))).collect();
    let conv = |c: &[Rational], f: &dyn Fn(i64) -> Rational| -> Rational {
        let mut s = Rational::zero();
        for (i, ci) in c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, mj) in m.iter().enumerate() {
                s += ci * mj * f(i as i64 + j as i64);
            }
        }
        s
    };
    let k = conv(&c_hat, &|ij| at(&alpha, 2 * p1i - p2i - ij).clone());
    if k.is_zero() {
        return Err(WitError::Normalization("anchor sum vanishes".into()));
    }
    let c0_sq = r(BigInt::from(2) * sign(p2i)) / k;
    let mut c_prime0 = rational_sqrt(&c0_sq)
        .ok_or_else(|| WitError::Normalization("c′_0 is not rational".into()))?;
    if sign(p2i).is_negative() {
        c_prime0 = -c_prime0;
    }
    let c: Vec<Rational> = c_hat.iter().map(|x| x * &c_prime0).collect();

    let inv = inv_one_minus_t(2 * p2i, terms);
    let mut gamma = Table::new();
    for u in -p2i..=2 * p1i - p2i - 1 {
        gamma.insert(u, Rational::zero());
    }
    let rhs_up: Vec<Rational> =
        (0..terms as i64).map(|t| conv(&c, &|ij| at(&alpha, 2 * p1i - p2i + t - ij).clone())).collect();
    for (s, v) in series_mul(&inv, &rhs_up, terms).into_iter().enumerate() {
        gamma.insert(2 * p1i - p2i + s as i64, v);
    }
    let rhs_down: Vec<Rational> =
        (0..terms as i64).map(|t| conv(&c, &|ij| at(&alpha, p2i - 1 - t - ij).clone())).collect();
    for (s, v) in series_mul(&inv, &rhs_down, terms).into_iter().enumerate() {
        gamma.insert(-p2i - 1 - s as i64, v);
    }

    let mut beta = Table::new();
    for u in 1 - p2i..p2i {
        beta.insert(u, Rational::zero());
    }
    let beta_terms = (span + 1) as usize;
    let rhs_b: Vec<Rational> = (0..beta_terms as i64)
        .map(|t| if t == 0 { r(sign(p2i)) } else { conv(&c, &|ij| at(&gamma, ij - p2i - t).clone()) })
        .collect();
    for (s, v) in series_mul(&inv, &rhs_b, beta_terms).into_iter().enumerate() {
        beta.insert(p2i + s as i64, v.clone());
        beta.insert(-p2i - s as i64, v);
    }
    Ok(PairReconstruction {
        c,
        c_prime0,
        alpha: to_profile(&alpha, range.clone()),
        beta: to_profile(&beta, range.clone()),
        gamma: to_profile(&gamma, range),
    })
}
