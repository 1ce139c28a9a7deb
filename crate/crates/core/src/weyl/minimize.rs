//! Descent to minimal length by cyclic shifts.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mat, RootSystem, WeylElement};

/// Cap on the number of equal-length conjugates explored per plateau.
pub const PLATEAU_LIMIT: usize = 100_000;

/// Conjugates `w` by simple reflections, never increasing length, until no
/// element of the current length plateau admits a shorter conjugate.
pub fn cyclic_shift_minimize(rs: &RootSystem, w: &WeylElement, seed: u64) -> WeylElement {
    let mut order: Vec<usize> = (0..rs.rank).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (m, _) = minimize_raw(rs, &w.m, &order);
    rs.with_reduced_word(&rs.wrap(m))
}

pub(crate) fn minimize_raw(rs: &RootSystem, w: &Mat, order: &[usize]) -> (Mat, usize) {
    let mut cur = *w;
    let mut len = rs.length_raw(&cur);
    'outer: loop {
        for &s in order {
            let c = rs.conj_gen(&cur, s);
            let l = rs.length_raw(&c);
            if l < len {
                cur = c;
                len = l;
                continue 'outer;
            }
        }
        let mut seen = HashSet::from([rs.key(&cur)]);
        let mut queue = VecDeque::from([cur]);
        while let Some(x) = queue.pop_front() {
            for &s in order {
                let c = rs.conj_gen(&x, s);
                let l = rs.length_raw(&c);
                if l < len {
                    cur = c;
                    len = l;
                    continue 'outer;
                }
                if l == len && seen.len() < PLATEAU_LIMIT && seen.insert(rs.key(&c)) {
                    queue.push_back(c);
                }
            }
        }
        return (cur, len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{build_weyl, WeylType};

    #[test]
    fn identity_is_fixed() {
        let rs = build_weyl(WeylType::E(6)).unwrap();
        let m = cyclic_shift_minimize(&rs, &rs.identity(), 0);
        assert!(m.is_identity());
        assert_eq!(m.word, Some(vec![]));
    }

    #[test]
    fn coxeter_element_unchanged_in_length() {
        for t in [WeylType::G2, WeylType::F4, WeylType::E(6), WeylType::E(8)] {
            let rs = build_weyl(t).unwrap();
            let c = rs.coxeter_element();
            let m = cyclic_shift_minimize(&rs, &c, 3);
            assert_eq!(rs.length(&m), rs.rank);
            // conjugating by a simple reflection that lengthens c comes back down
            for s in 0..rs.rank {
                let x = rs.conjugate_by_simple(&c, s);
                let m = cyclic_shift_minimize(&rs, &x, s as u64);
                assert_eq!(rs.length(&m), rs.rank, "{t} s={s}");
                assert_eq!(rs.char_poly(&m), rs.char_poly(&c));
            }
        }
    }

    #[test]
    fn g2_rotation_of_order_three() {
        let rs = build_weyl(WeylType::G2).unwrap();
        let c = rs.coxeter_element();
        let c2 = rs.mul(&c, &c);
        let m = cyclic_shift_minimize(&rs, &c2, 0);
        assert_eq!(rs.length(&m), 4);
        assert_eq!(rs.char_poly(&m), vec![1, 1, 1]);
    }

    #[test]
    fn never_increases_length() {
        use rand::SeedableRng;
        let rs = build_weyl(WeylType::E(7)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 0..50 {
            let w = rs.random_element(&mut rng, 50);
            let m = cyclic_shift_minimize(&rs, &w, k);
            assert!(rs.length(&m) <= rs.length(&w));
            assert_eq!(rs.char_poly(&m), rs.char_poly(&w));
            assert_eq!(m.word.as_ref().unwrap().len(), rs.length(&m));
        }
    }
}
