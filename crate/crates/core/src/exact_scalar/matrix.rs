//! Dense matrices over ℚ(i).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GaussRational;
use crate::error::{Result, WitError};

pub type Vector = Vec<GaussRational>;

/// Bilinear (unconjugated) dot product.
pub fn dot(x: &[GaussRational], y: &[GaussRational]) -> GaussRational {
    let mut acc = GaussRational::zero();
    for (a, b) in x.iter().zip(y) {
        if !a.is_zero() && !b.is_zero() {
            acc += &(a * b);
        }
    }
    acc
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussRational>,
}

/// Checked product `a·b`.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.mul(b)
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![GaussRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = GaussRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> GaussRational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<GaussRational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(WitError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let conv = rows
            .iter()
            .map(|r| r.iter().map(|&x| GaussRational::from_int(x)).collect())
            .collect();
        Self::from_rows(conv).expect("rectangular integer rows")
    }

    /// Matrix whose columns are the given vectors (all of length `n`).
    pub fn from_columns(n: usize, cols: &[Vector]) -> Self {
        Self::from_fn(n, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[GaussRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<GaussRational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[GaussRational] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, b: &Matrix) -> Result<Matrix> {
        if self.cols != b.rows {
            return Err(WitError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..b.cols {
                    let bv = &b[(k, j)];
                    if !bv.is_zero() {
                        let p = a * bv;
                        out[(i, j)] += &p;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Product for callers that already guarantee compatible shapes.
    pub fn dot_mat(&self, b: &Matrix) -> Matrix {
        self.mul(b).expect("compatible shapes")
    }

    pub fn mul_vec(&self, v: &[GaussRational]) -> Vector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `xᵀ·self·y`.
    pub fn form(&self, x: &[GaussRational], y: &[GaussRational]) -> GaussRational {
        dot(x, &self.mul_vec(y))
    }

    pub fn add(&self, b: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, b: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (b.rows, b.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, s: &GaussRational) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn neg(&self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.rows)
    }

    pub fn trace(&self) -> GaussRational {
        let mut t = GaussRational::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(WitError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    /// Copy with each row multiplied by the lcm of its denominators, so
    /// every entry is a Gaussian integer. Returns the row multipliers too.
    fn integral_rows(&self) -> (Matrix, Vec<BigInt>) {
        let mut m = self.clone();
        let mut factors = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut l = BigInt::one();
            for x in self.row(i) {
                l = num_integer::Integer::lcm(&l, &x.denom_lcm());
            }
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].scale_int(&l);
            }
            factors.push(l);
        }
        (m, factors)
    }

    /// Fraction-free (Bareiss) elimination in place. Returns the rank, the
    /// sign of the row permutation, and the final pivot.
    fn bareiss(&mut self) -> (usize, bool, GaussRational) {
        let mut prev = GaussRational::one();
        let mut r = 0;
        let mut negated = false;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                self.swap_rows(p, r);
                negated = !negated;
            }
            let pivot = self[(r, c)].clone();
            for i in r + 1..self.rows {
                let lead = self[(i, c)].clone();
                for j in c + 1..self.cols {
                    let v = &(&pivot * &self[(i, j)]) - &(&lead * &self[(r, j)]);
                    self[(i, j)] = &v / &prev;
                }
                self[(i, c)] = GaussRational::zero();
            }
            prev = pivot;
            r += 1;
        }
        (r, negated, prev)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let (mut m, _) = self.integral_rows();
        m.bareiss().0
    }

    pub fn det(&self) -> Result<GaussRational> {
        self.require_square()?;
        if self.rows == 0 {
            return Ok(GaussRational::one());
        }
        let (mut m, factors) = self.integral_rows();
        let (rank, negated, last) = m.bareiss();
        if rank < self.rows {
            return Ok(GaussRational::zero());
        }
        let mut d = if negated { -last } else { last };
        for f in factors {
            d = &d / &GaussRational::from_bigint(f);
        }
        Ok(d)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m[(r, c)].inv().expect("nonzero pivot");
            for j in c..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &f * &m[(r, j)];
                        m[(i, j)] -= &v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(Matrix::zeros(0, 0));
        }
        let aug = Matrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                GaussRational::one()
            } else {
                GaussRational::zero()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(WitError::Singular);
        }
        Ok(Matrix::from_fn(n, n, |i, j| red[(i, n + j)].clone()))
    }

    /// Solves `self·x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if self.rows != b.rows {
            return Err(WitError::DimensionMismatch("solve: row counts differ".into()));
        }
        self.inverse()?.mul(b)
    }

    /// Basis of the right kernel.
    pub fn nullspace(&self) -> Vec<Vector> {
        let (red, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![GaussRational::zero(); self.cols];
                v[f] = GaussRational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&red[(r, f)];
                }
                v
            })
            .collect()
    }

    /// Matrix of `self` restricted to the invariant subspace spanned by the
    /// (independent) columns `basis`.
    pub fn restrict(&self, basis: &[Vector]) -> Result<Matrix> {
        let n = self.rows;
        let m = basis.len();
        let k = Matrix::from_columns(n, basis);
        let y = self.mul(&k)?;
        let aug = Matrix::from_fn(n, 2 * m, |i, j| if j < m { k[(i, j)].clone() } else { y[(i, j - m)].clone() });
        let (red, pivots) = aug.rref();
        if pivots.len() < m || pivots[..m].iter().enumerate().any(|(i, &p)| p != i) {
            return Err(WitError::Precondition("basis is dependent".into()));
        }
        if pivots.len() > m {
            return Err(WitError::Precondition("subspace is not invariant".into()));
        }
        Ok(Matrix::from_fn(m, m, |i, j| red[(i, m + j)].clone()))
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, e: i64) -> Result<Matrix> {
        self.require_square()?;
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Matrix::identity(self.rows);
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.dot_mat(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.dot_mat(&sq);
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("matrix serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Matrix> {
        let rows = v.as_array().ok_or_else(|| WitError::Parse("matrix must be an array".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| WitError::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(GaussRational::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(parsed)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = GaussRational;
    fn index(&self, (i, j): (usize, usize)) -> &GaussRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut GaussRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Matrix::from_json(&v).map_err(D::Error::custom)
    }
}

/// Jordan block sizes (descending) of `m` for `eigenvalue`, read off the
/// rank sequence of powers of `m − eigenvalue·I`. Empty when the value is
/// not an eigenvalue.
pub fn jordan_partition(m: &Matrix, eigenvalue: &GaussRational) -> Result<Vec<usize>> {
    m.require_square()?;
    let n = m.rows();
    let shifted = m.sub(&Matrix::identity(n).scale(eigenvalue));
    let mut ranks = vec![n];
    let mut power = Matrix::identity(n);
    loop {
        power = power.dot_mat(&shifted);
        let r = power.rank();
        let last = *ranks.last().expect("nonempty");
        ranks.push(r);
        if r == last {
            break;
        }
    }
    // at least k blocks of size ≥ s  ⟺  ranks[s-1] - ranks[s] ≥ k
    let mut sizes = Vec::new();
    for s in (1..ranks.len()).rev() {
        let at_least = ranks[s - 1] - ranks[s];
        let bigger = ranks.get(s + 1).map_or(0, |&next| ranks[s] - next);
        for _ in 0..at_least.saturating_sub(bigger) {
            sizes.push(s);
        }
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_scalar::ratio;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> GaussRational {
        GaussRational::real(ratio(n, d))
    }

    #[test]
    fn identity_product() {
        let m = Matrix::from_int_rows(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(mat_mul(&Matrix::identity(2), &m).unwrap(), m);
    }

    #[test]
    fn involution() {
        let s = Matrix::from_int_rows(&[vec![0, 1], vec![1, 0]]);
        assert!(s.pow(2).unwrap().is_identity());
    }

    #[test]
    fn reciprocal() {
        let a = Matrix::from_rows(vec![vec![q(2, 3)]]).unwrap();
        let b = Matrix::from_rows(vec![vec![q(3, 2)]]).unwrap();
        assert!(mat_mul(&a, &b).unwrap().is_identity());
    }

    #[test]
    fn mismatch_is_error() {
        let a = Matrix::zeros(2, 3);
        assert!(mat_mul(&a, &a).is_err());
    }

    #[test]
    fn det_and_inverse() {
        let m = Matrix::from_rows(vec![
            vec![q(1, 2), GaussRational::i(), q(0, 1)],
            vec![q(2, 1), q(1, 1), q(3, 1)],
            vec![q(0, 1), q(-1, 3), q(1, 1)],
        ])
        .unwrap();
        // cofactor expansion along the first row
        let expect = &(&q(1, 2) * &(&q(1, 1) + &q(1, 1))) - &(&GaussRational::i() * &q(2, 1));
        assert_eq!(m.det().unwrap(), expect);
        assert!(m.dot_mat(&m.inverse().unwrap()).is_identity());
    }

    #[test]
    fn jordan_examples() {
        let nil = Matrix::from_int_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        assert_eq!(jordan_partition(&nil, &GaussRational::zero()).unwrap(), vec![3]);
        assert_eq!(jordan_partition(&Matrix::identity(4), &GaussRational::one()).unwrap(), vec![1; 4]);
        assert!(jordan_partition(&Matrix::identity(2), &GaussRational::from_int(5)).unwrap().is_empty());
        let m = Matrix::from_int_rows(&[
            vec![1, 1, 0, 0, 0],
            vec![0, 1, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 2, 1],
            vec![0, 0, 0, 0, 2],
        ]);
        assert_eq!(jordan_partition(&m, &GaussRational::one()).unwrap(), vec![2, 1]);
        assert_eq!(jordan_partition(&m, &GaussRational::from_int(2)).unwrap(), vec![2]);
    }

    #[test]
    fn restriction_to_invariant_subspace() {
        let m = Matrix::from_int_rows(&[vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 5]]);
        let e = |i: usize| (0..3).map(|j| GaussRational::from_int((i == j) as i64)).collect::<Vector>();
        let r = m.restrict(&[e(0), e(1)]).unwrap();
        assert_eq!(r, Matrix::from_int_rows(&[vec![2, 1], vec![0, 2]]));
        assert!(m.restrict(&[e(1)]).is_err());
        assert!(m.restrict(&[e(0), e(0)]).is_err());
    }

    fn small_matrix() -> impl Strategy<Value = Matrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-3i64..4, r * c).prop_map(move |v| {
                Matrix::from_fn(r, c, |i, j| GaussRational::from_int(v[i * c + j]))
            })
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix()) {
            let ns = m.nullspace();
            prop_assert_eq!(m.rank() + ns.len(), m.cols());
            for v in &ns {
                prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
            }
        }

        #[test]
        fn det_multiplicative(a in proptest::collection::vec(-3i64..4, 9), b in proptest::collection::vec(-3i64..4, 9)) {
            let ma = Matrix::from_fn(3, 3, |i, j| GaussRational::from_int(a[3 * i + j]));
            let mb = Matrix::from_fn(3, 3, |i, j| GaussRational::from_int(b[3 * i + j]));
            prop_assert_eq!(ma.dot_mat(&mb).det().unwrap(), &ma.det().unwrap() * &mb.det().unwrap());
            prop_assert_eq!(ma.det().unwrap().is_zero(), ma.rank() < 3);
        }

        #[test]
        fn jordan_sizes_sum_to_generalized_dimension(v in proptest::collection::vec(-1i64..2, 16)) {
            let m = Matrix::from_fn(4, 4, |i, j| {
                if i == j { GaussRational::one() } else if j > i { GaussRational::from_int(v[4 * i + j]) } else { GaussRational::zero() }
            });
            let sizes = jordan_partition(&m, &GaussRational::one()).unwrap();
            prop_assert_eq!(sizes.iter().sum::<usize>(), 4);
        }
    }
}
