//! Pairing tables `u ↦ (x_{i}, y_{j})` indexed by the offset `u = i − j`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WitError};
use crate::exact_scalar::{GaussRational, Matrix};

/// Values on a contiguous offset window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub lo: i64,
    pub values: Vec<GaussRational>,
}

impl Profile {
    pub fn from_fn(range: RangeInclusive<i64>, mut f: impl FnMut(i64) -> GaussRational) -> Self {
        let lo = *range.start();
        Profile { lo, values: range.map(&mut f).collect() }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn range(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    pub fn get(&self, u: i64) -> Option<&GaussRational> {
        usize::try_from(u - self.lo).ok().and_then(|k| self.values.get(k))
    }

    /// Value at `u`; panics outside the window.
    pub fn at(&self, u: i64) -> &GaussRational {
        self.get(u).unwrap_or_else(|| panic!("offset {u} outside {}..={}", self.lo, self.hi()))
    }

    /// Restriction to a sub-window.
    pub fn window(&self, range: RangeInclusive<i64>) -> Result<Profile> {
        if *range.start() < self.lo || *range.end() > self.hi() {
            return Err(WitError::DimensionMismatch("window outside profile".into()));
        }
        Ok(Profile::from_fn(range, |u| self.at(u).clone()))
    }

    /// Offsets where the two tables differ (on the common window).
    pub fn differences(&self, other: &Profile) -> Vec<i64> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        (lo..=hi).filter(|&u| self.at(u) != other.at(u)).collect()
    }
}

/// `(g^u x, y)` for `u` in `range`, where the form is `aᵀ·gram·b`. This is
/// `(x_i, y_j)` for any `i − j = u` when `g` preserves the form.
pub fn pairing_table(
    gram: &Matrix,
    g: &Matrix,
    x: &[GaussRational],
    y: &[GaussRational],
    range: RangeInclusive<i64>,
) -> Result<Profile> {
    let lo = *range.start();
    let hi = *range.end();
    let gy = gram.mul_vec(y);
    let mut cur = g.pow(lo)?.mul_vec(x);
    let mut values = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for u in lo..=hi {
        values.push(crate::exact_scalar::dot(&cur, &gy));
        if u < hi {
            cur = g.mul_vec(&cur);
        }
    }
    Ok(Profile { lo, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_table() {
        // g = 2 on a 1-dim space with form 1: (2^u, 1)
        let g = Matrix::from_int_rows(&[vec![2]]);
        let gram = Matrix::identity(1);
        let one = vec![GaussRational::from_int(1)];
        let t = pairing_table(&gram, &g, &one, &one, -2..=2).unwrap();
        assert_eq!(t.at(-2), &GaussRational::real(crate::exact_scalar::ratio(1, 4)));
        assert_eq!(t.at(2), &GaussRational::from_int(4));
        assert_eq!(t.get(3), None);
        assert_eq!(t.window(0..=1).unwrap().values.len(), 2);
    }
}
