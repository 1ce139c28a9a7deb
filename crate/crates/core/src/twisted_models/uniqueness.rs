//! Rebuilds the pairing tables of the twisted models from their vanishing
//! and normalization constraints alone, using only the recurrences forced
//! by the Jordan structure of `g^{*2}`. Tables are indexed by `h = j − i`
//! for `(x_i, y_j)` with `i` even and `j` odd.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{model_paired_even_twisted, n_x_coeffs2};
use crate::error::{Result, WitError};
use crate::exact_scalar::{rational_sqrt, GaussRational, Matrix, Rational};
use crate::iso_models::{choose, pow2};

pub type Table = BTreeMap<i64, Rational>;

fn r(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

fn at(t: &Table, h: i64) -> &Rational {
    t.get(&h).unwrap_or_else(|| panic!("table has no entry at {h}"))
}

/// Seeds a symmetric table: zero for `|h| < anchor`, one at `|h| = anchor`.
fn seeded(anchor: i64) -> Table {
    let mut t = Table::new();
    for h in (-anchor..=anchor).step_by(2) {
        let v = if h.abs() == anchor { Rational::from_integer(1.into()) } else { Rational::zero() };
        t.insert(h, v);
    }
    t
}

fn set_sym(t: &mut Table, h: i64, v: Rational) {
    t.insert(-h, v.clone());
    t.insert(h, v);
}

/// Single block `(a, b)`: `(w_0, w_h)` on `|h| ≤ bound` from the zero window,
/// the unit anchor at `|h| = 2p−1` and `(g^{*2}−1)^a(g^{*2}+1)^b = 0`.
pub fn reconstruct_single(a: usize, b: usize, bound: i64) -> Result<Table> {
    let t = n_x_coeffs2(a, b, 1)?;
    let p = ((a + b + 1) / 2) as i64;
    let n = &t.n_seq;
    let top = n.len() - 1;
    debug_assert_eq!(n[top], -BigInt::from(1));
    let mut tab = seeded(2 * p - 1);
    let mut s = 1;
    while 2 * p - 1 + 2 * s <= bound {
        // Σ_m n_{2m} α_{2s−2p+1+2m} = 0 with n_{4p−2} = −1 on the newest entry
        let v: Rational = (0..top).map(|m| r(n[m].clone()) * at(&tab, 2 * s - 2 * p + 1 + 2 * m as i64)).sum();
        set_sym(&mut tab, 2 * p - 1 + 2 * s, v);
        s += 1;
    }
    Ok(tab)
}

/// Even block of size `2p`: `(w_0, w_h)` from the same kind of data and
/// `(g^{*2}+1)^{2p} = 0`.
pub fn reconstruct_even(p: usize, bound: i64) -> Table {
    let pi = p as i64;
    let mut tab = seeded(2 * pi - 1);
    let mut s = 1;
    while 2 * pi - 1 + 2 * s <= bound {
        let v: Rational = -(1..=2 * pi)
            .map(|j| r(choose(2 * pi, j)) * at(&tab, 2 * pi - 1 + 2 * s - 2 * j))
            .sum::<Rational>();
        set_sym(&mut tab, 2 * pi - 1 + 2 * s, v);
        s += 1;
    }
    tab
}

/// Tables rebuilt for two even blocks carrying lines `z` and `ξ`.
#[derive(Clone, Debug)]
pub struct PairedReconstruction {
    /// `c_0, c_2, …, c_{4e}` with `N^{2p2−1}ξ_0 = Σ c_{2i} N^{2p2−1} z_{2i}`.
    pub c: Vec<Rational>,
    /// `(z_i, z_j)`.
    pub alpha: Table,
    /// `(ξ_i, ξ_j)`.
    pub beta: Table,
    /// `(ξ_i, z_j)`.
    pub gamma: Table,
}

/// Closed form for the `c` coefficients: with `L_i = l_0 + ⋯ + l_i`,
/// `l_j = C(2e+1, j)`, entry `2e−i` is `2^{−e} L_i` (`i ≤ e`) and entry `i`
/// is `−2^{−e} L_i` (`i < e`).
pub fn c_closed(p1: usize, p2: usize) -> Vec<Rational> {
    let e = (p1 - p2) as i64;
    let partial = |i: i64| -> BigInt { (0..=i).map(|j| choose(2 * e + 1, j)).sum() };
    let scale = |n: BigInt| Rational::new(n, pow2(e));
    let mut c = vec![Rational::zero(); (2 * e + 1) as usize];
    for i in 0..=e {
        c[(2 * e - i) as usize] = scale(partial(i));
    }
    for i in 0..e {
        c[i as usize] = scale(-partial(i));
    }
    c
}

pub fn reconstruct_paired(p1: usize, p2: usize, bound: i64) -> Result<PairedReconstruction> {
    if p2 == 0 || p1 < p2 {
        return Err(WitError::Precondition("need p1 ≥ p2 ≥ 1".into()));
    }
    let (a, b) = (p1 as i64, p2 as i64);
    let e = a - b;
    let g_bound = bound + 8 * a + 8;
    let alpha = reconstruct_even(p1, g_bound + 8 * a + 8);
    let m: Vec<Rational> = (0..2 * b).map(|j| r(choose(2 * b - 1, j))).collect();
    let al = |h: i64| at(&alpha, h);
    // Σ_{i,j} c_{2i} m_j α_{u−2i−2j}, coefficient of c_{2i}
    let coef = |u: i64, i: i64| -> Rational { (0..2 * b).map(|j| &m[j as usize] * al(u - 2 * i - 2 * j)).sum() };

    // vanishing of the left side for u ∈ [2p2−1, 4p1−2p2−3]
    let us: Vec<i64> = (2 * b - 1..=4 * a - 2 * b - 3).step_by(2).collect();
    let sys = Matrix::from_fn(us.len(), (2 * e + 1) as usize, |k, i| GaussRational::real(coef(us[k], i as i64)));
    let null = sys.nullspace();
    if null.len() != 1 {
        return Err(WitError::Normalization(format!("c-system has a {}-dimensional solution space", null.len())));
    }
    let v: Vec<Rational> = null[0]
        .iter()
        .map(|x| x.is_real().then(|| x.re.clone()).ok_or_else(|| WitError::Normalization("non-real c".into())))
        .collect::<Result<_>>()?;
    // 2/c′_0 = Σ c_{2i} m_j α_{4p1−2p2−1−2i−2j}; with c = λv this fixes λ²
    let top = 4 * a - 2 * b - 1;
    let sv: Rational = (0..=2 * e).map(|i| &v[i as usize] * coef(top, i)).sum();
    let v_last = v[(2 * e) as usize].clone();
    if sv.is_zero() || v_last.is_zero() {
        return Err(WitError::Normalization("c′_0 is not determined".into()));
    }
    let lambda_sq = Rational::from_integer(2.into()) / (&v_last * &sv);
    let mut lambda = rational_sqrt(&lambda_sq).ok_or_else(|| WitError::Normalization("c′_0² is not a rational square".into()))?;
    if (&lambda * &v_last).is_negative() {
        lambda = -lambda;
    }
    let c: Vec<Rational> = v.iter().map(|x| x * &lambda).collect();
    let rhs = |u: i64| -> Rational { (0..=2 * e).map(|i| &c[i as usize] * coef(u, i)).sum() };

    let mut gamma = Table::new();
    for h in (1 - 2 * b..=4 * a - 2 * b - 3).step_by(2) {
        gamma.insert(h, Rational::zero());
    }
    let m_at = |j: i64| &m[j as usize];
    let mut t = 0;
    while 4 * a - 2 * b - 1 + 2 * t <= g_bound {
        let u = 4 * a - 2 * b - 1 + 2 * t;
        let lower: Rational = (1..=t.min(2 * b - 1)).map(|j| m_at(j) * at(&gamma, u - 2 * j)).sum();
        gamma.insert(u, rhs(u) - lower);
        t += 1;
    }
    let mut t = 0;
    while 2 * b + 1 + 2 * t <= g_bound {
        let lower: Rational = (1..=t.min(2 * b - 1)).map(|j| m_at(j) * at(&gamma, -2 * b - 1 - 2 * (t - j))).sum();
        gamma.insert(-2 * b - 1 - 2 * t, rhs(2 * b - 3 - 2 * t) - lower);
        t += 1;
    }

    let mut beta = seeded(2 * b - 1);
    let mut t = 1;
    while 2 * b - 1 + 2 * t <= bound {
        let rhs_b: Rational = (0..=2 * e)
            .flat_map(|i| (0..2 * b).map(move |j| (i, j)))
            .map(|(i, j)| &c[i as usize] * m_at(j) * at(&gamma, 2 * i + 2 * j - 2 * b + 1 - 2 * t))
            .sum();
        let lower: Rational = (1..=t.min(2 * b - 1)).map(|j| m_at(j) * at(&beta, 2 * b - 1 + 2 * (t - j))).sum();
        set_sym(&mut beta, 2 * b - 1 + 2 * t, rhs_b - lower);
        t += 1;
    }

    let keep = |t: Table| -> Table { t.into_iter().filter(|(h, _)| h.abs() <= bound).collect() };
    Ok(PairedReconstruction { c, alpha: keep(alpha), beta: keep(beta), gamma: keep(gamma) })
}

/// The `c` coefficients read off the explicit paired model by solving
/// `N^{2p2−1}ξ_0 = Σ c_{2i} N^{2p2−1} z_{2i}` with `N = g^{*2} + 1`.
pub fn model_c_coefficients(p1: usize, p2: usize) -> Result<Vec<GaussRational>> {
    let model = model_paired_even_twisted(p1, p2)?;
    let n = model.dim();
    let s = model.space.star_square()?;
    let big_n = s.add(&Matrix::identity(n)).pow(2 * p2 as i64 - 1)?;
    let e = p1 - p2;
    let mut cols = Vec::with_capacity(2 * e + 2);
    let mut z = model.lines[0].clone();
    for _ in 0..=2 * e {
        cols.push(big_n.mul_vec(&z));
        z = s.mul_vec(&z);
    }
    cols.push(big_n.mul_vec(&model.lines[1]));
    let null = Matrix::from_columns(n, &cols).nullspace();
    if null.len() != 1 || null[0][2 * e + 1].is_zero() {
        return Err(WitError::Normalization("c coefficients are not unique".into()));
    }
    let last = -null[0][2 * e + 1].clone();
    Ok(null[0][..=2 * e].iter().map(|x| x / &last).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twisted_models::{
        model_even_twisted, model_single_twisted, phi_value, tw_xi_cross, tw_xi_self, x_prime,
    };

    fn q(n: BigInt) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn single_rebuilt_matches_model() {
        for (a, b) in [(1, 0), (1, 2), (3, 0), (3, 2), (1, 4), (5, 2), (3, 4), (7, 0)] {
            let p = (a + b + 1) / 2;
            let tab = reconstruct_single(a, b, 31).unwrap();
            let x = n_x_coeffs2(a, b, 40).unwrap().x_seq;
            let model = model_single_twisted(a, b).unwrap();
            let prof = model.table(1, 1, -31..=31).unwrap();
            for h in (-31..=31).step_by(2) {
                assert_eq!(at(&tab, h), &q(x_prime(&x, p, h)), "a={a} b={b} h={h}");
                assert_eq!(&GaussRational::real(at(&tab, h).clone()), prof.at(-h));
            }
        }
    }

    #[test]
    fn even_rebuilt_matches_phi() {
        for p in 1..=6 {
            let tab = reconstruct_even(p, 41);
            let model = model_even_twisted(p).unwrap();
            let prof = model.table(1, 1, -41..=41).unwrap();
            for h in (-41..=41).step_by(2) {
                assert_eq!(at(&tab, h), &q(phi_value(p, h)));
                assert_eq!(&GaussRational::real(at(&tab, h).clone()), prof.at(-h));
            }
        }
    }

    #[test]
    fn c_closed_small() {
        assert_eq!(c_closed(1, 1), vec![q(1.into())]);
        // e = 1: l = (1, 3, 3, 1); c = (−1/2, 2, 1/2)
        let half = |n: i64| Rational::new(n.into(), 2.into());
        assert_eq!(c_closed(2, 1), vec![half(-1), half(4), half(1)]);
    }

    #[test]
    fn paired_rebuilt_matches_model() {
        let bound = 25;
        for p1 in 1..=5usize {
            for p2 in 1..=p1 {
                let rec = reconstruct_paired(p1, p2, bound).unwrap();
                assert_eq!(rec.c, c_closed(p1, p2), "p1={p1} p2={p2}");
                let c0: Vec<GaussRational> = rec.c.iter().cloned().map(GaussRational::real).collect();
                assert_eq!(model_c_coefficients(p1, p2).unwrap(), c0);
                let model = model_paired_even_twisted(p1, p2).unwrap();
                let beta0 = model.table(2, 2, -bound..=bound).unwrap();
                let gamma0 = model.table(2, 1, -bound..=bound).unwrap();
                for h in (-bound..=bound).step_by(2) {
                    assert_eq!(at(&rec.alpha, h), &q(phi_value(p1, h)));
                    assert_eq!(at(&rec.beta, h), &q(tw_xi_self(p1, p2, h)), "β p1={p1} p2={p2} h={h}");
                    assert_eq!(at(&rec.gamma, h), &q(tw_xi_cross(p1, p2, h)), "γ p1={p1} p2={p2} h={h}");
                    assert_eq!(&GaussRational::real(at(&rec.beta, h).clone()), beta0.at(-h));
                    assert_eq!(&GaussRational::real(at(&rec.gamma, h).clone()), gamma0.at(-h));
                }
            }
        }
    }

    #[test]
    fn paired_rejects_bad_order() {
        assert!(reconstruct_paired(1, 2, 5).is_err());
        assert!(reconstruct_paired(1, 0, 5).is_err());
    }
}
