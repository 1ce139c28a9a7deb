//! Exhaustive conjugacy classes with minimal lengths.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde_json::{json, Value};

use super::{char_poly_raw, factors_label, identity_mat, Mat, RootSystem, WeylElement};
use crate::error::{Result, WitError};

/// Largest group order accepted for exhaustive enumeration.
pub const CLASS_BUDGET: u128 = 3_000_000;

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub size: u64,
    pub min_length: usize,
    pub char_poly: Vec<i64>,
    pub factors: BTreeMap<u32, u32>,
    pub elliptic: bool,
    /// First minimal-length element met, with a reduced word.
    pub representative: WeylElement,
    /// Traces of powers of the representative.
    pub fingerprint: Vec<i64>,
}

impl ClassInfo {
    pub fn to_json(&self) -> Value {
        json!({
            "size": self.size,
            "min_length": self.min_length,
            "char_poly": self.char_poly,
            "factors": factors_label(&self.factors),
            "elliptic": self.elliptic,
            "representative_word": self.representative.word,
            "fingerprint": self.fingerprint,
        })
    }
}

/// Visits every element once: `v = w·s` is generated from `w` only when `s`
/// is the smallest right descent of `v`.
pub(crate) fn for_each_element(rs: &RootSystem, mut f: impl FnMut(&Mat)) {
    let n = rs.rank;
    let id = identity_mat(n);
    let mut stack = vec![(id, rs.heights(&id))];
    while let Some((w, r)) = stack.pop() {
        f(&w);
        for s in 0..n {
            if r[s] <= 0 {
                continue;
            }
            let mut rv = r;
            for j in 0..n {
                rv[j] = (r[j] as i32 - rs.cartan[s][j] * r[s] as i32) as i8;
            }
            if (0..n).find(|&t| rv[t] < 0) == Some(s) {
                stack.push((rs.right_mul_gen(&w, s), rv));
            }
        }
    }
}

/// Calls `f` once on every group element.
pub fn visit_elements(rs: &RootSystem, mut f: impl FnMut(&WeylElement)) {
    for_each_element(rs, |m| f(&rs.wrap(*m)));
}

#[cfg(test)]
pub(crate) fn element_count(rs: &RootSystem) -> u64 {
    let mut c = 0u64;
    for_each_element(rs, |_| c += 1);
    c
}

/// Partitions `W` into conjugacy classes; fails above [`CLASS_BUDGET`].
pub fn enumerate_classes(rs: &RootSystem) -> Result<Vec<ClassInfo>> {
    if rs.group_order() > CLASS_BUDGET {
        return Err(WitError::Budget(format!("|W({})| = {} exceeds {CLASS_BUDGET}", rs.weyl_type, rs.group_order())));
    }
    let n = rs.rank;
    let mut seen: HashSet<u64> = HashSet::with_capacity(rs.group_order() as usize);
    let mut classes = Vec::new();
    for_each_element(rs, |w| {
        if seen.contains(&rs.key(w)) {
            return;
        }
        seen.insert(rs.key(w));
        let mut queue = VecDeque::from([*w]);
        let mut size = 0u64;
        let mut best = (usize::MAX, *w);
        while let Some(x) = queue.pop_front() {
            size += 1;
            let l = rs.length_raw(&x);
            if l < best.0 {
                best = (l, x);
            }
            for s in 0..n {
                let c = rs.conj_gen(&x, s);
                if seen.insert(rs.key(&c)) {
                    queue.push_back(c);
                }
            }
        }
        let rep = rs.with_reduced_word(&rs.wrap(best.1));
        let char_poly = char_poly_raw(&rep.m, n);
        let factors = rs.cyclotomic_factors(&rep).factors;
        classes.push(ClassInfo {
            size,
            min_length: best.0,
            elliptic: !factors.contains_key(&1),
            fingerprint: rs.fingerprint(&rep),
            char_poly,
            factors,
            representative: rep,
        });
    });
    classes.sort_by(|a, b| {
        (a.min_length, &a.char_poly, a.size, &a.fingerprint).cmp(&(b.min_length, &b.char_poly, b.size, &b.fingerprint))
    });
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{build_weyl, WeylType};

    #[test]
    fn element_counts_match_order_formula() {
        for t in [WeylType::A(3), WeylType::B(4), WeylType::C(3), WeylType::D(4), WeylType::G2, WeylType::F4, WeylType::E(6)]
        {
            let rs = build_weyl(t).unwrap();
            assert_eq!(element_count(&rs) as u128, t.group_order(), "{t}");
        }
    }

    #[test]
    fn g2_classes() {
        let rs = build_weyl(WeylType::G2).unwrap();
        let cl = enumerate_classes(&rs).unwrap();
        assert_eq!(cl.len(), 6);
        assert_eq!(cl.iter().map(|c| c.size).sum::<u64>(), 12);
        let central: Vec<_> = cl.iter().filter(|c| c.size == 1).map(|c| c.min_length).collect();
        assert_eq!(central, vec![0, 6]);
        let ell: Vec<_> = cl.iter().filter(|c| c.elliptic).map(|c| (c.min_length, factors_label(&c.factors))).collect();
        assert_eq!(ell, vec![(2, "Phi6".to_string()), (4, "Phi3".into()), (6, "Phi2^2".into())]);
    }

    #[test]
    fn class_counts() {
        // independent oracle: number of classes equals the number of
        // distinct orbits found by brute-force conjugation by every element
        for t in [WeylType::A(3), WeylType::B(3), WeylType::G2] {
            let rs = build_weyl(t).unwrap();
            let mut all = Vec::new();
            for_each_element(&rs, |w| all.push(*w));
            let inv: Vec<Mat> = all.iter().map(|w| rs.inverse(&rs.wrap(*w)).m).collect();
            let mut label = vec![usize::MAX; all.len()];
            let mut count = 0;
            for i in 0..all.len() {
                if label[i] != usize::MAX {
                    continue;
                }
                for (g, gi) in all.iter().zip(&inv) {
                    let c = rs.mul_raw(&rs.mul_raw(g, &all[i]), gi);
                    let j = all.iter().position(|x| *x == c).unwrap();
                    label[j] = count;
                }
                count += 1;
            }
            assert_eq!(enumerate_classes(&rs).unwrap().len(), count, "{t}");
        }
        let rs = build_weyl(WeylType::F4).unwrap();
        assert_eq!(enumerate_classes(&rs).unwrap().len(), 25);
    }

    #[test]
    fn budget_refused() {
        let rs = build_weyl(WeylType::E(8)).unwrap();
        assert!(matches!(enumerate_classes(&rs), Err(WitError::Budget(_))));
    }

    #[test]
    fn ellipticity_matches_trivial_factor() {
        let rs = build_weyl(WeylType::F4).unwrap();
        for c in enumerate_classes(&rs).unwrap() {
            assert_eq!(c.elliptic, rs.is_elliptic(&c.representative));
            assert_eq!(c.representative.word.as_ref().unwrap().len(), c.min_length);
            assert_eq!(c.factors.iter().map(|(&d, &m)| (crate::exact_scalar::totient(d) * m) as usize).sum::<usize>(), 4);
        }
    }
}
