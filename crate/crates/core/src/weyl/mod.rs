//! Root systems and Weyl groups of rank at most 8.
//!
//! Elements are integer matrices in the simple-root basis: column `j` holds
//! the coordinates of `w(α_j)`. Lengths are counted as the positive roots a
//! element sends to negative roots, via the height functional.

mod classes;
mod minimize;
mod search;
mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WitError};
use crate::exact_scalar::{factor_integer_coeffs, CycloFactorization};

pub use classes::{enumerate_classes, visit_elements, ClassInfo, CLASS_BUDGET};
pub use minimize::{cyclic_shift_minimize, PLATEAU_LIMIT};
pub use search::{find_elliptic_rep, search_row, SearchOptions, SearchOutcome};
pub use tables::{
    elliptic_rows, rows_for, verify_table, EllipticRow, RowCheck, RowReport, RowStatus, TableOptions, TableReport,
};

pub const MAX_RANK: usize = 8;
const STRIDE: usize = MAX_RANK;

/// Raw element storage; entries outside the leading `rank × rank` block are zero.
pub(crate) type Mat = [i8; STRIDE * STRIDE];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeylType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    E(usize),
    F4,
    G2,
}

impl WeylType {
    pub fn rank(self) -> usize {
        match self {
            WeylType::A(n) | WeylType::B(n) | WeylType::C(n) | WeylType::D(n) | WeylType::E(n) => n,
            WeylType::F4 => 4,
            WeylType::G2 => 2,
        }
    }

    /// `|W|` from the classical order formulas.
    pub fn group_order(self) -> u128 {
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        match self {
            WeylType::A(n) => fact(n + 1),
            WeylType::B(n) | WeylType::C(n) => (1u128 << n) * fact(n),
            WeylType::D(n) => (1u128 << (n - 1)) * fact(n),
            WeylType::E(6) => 51_840,
            WeylType::E(7) => 2_903_040,
            WeylType::E(_) => 696_729_600,
            WeylType::F4 => 1_152,
            WeylType::G2 => 12,
        }
    }

    pub fn root_count(self) -> usize {
        match self {
            WeylType::A(n) => n * (n + 1),
            WeylType::B(n) | WeylType::C(n) => 2 * n * n,
            WeylType::D(n) => 2 * n * (n - 1),
            WeylType::E(6) => 72,
            WeylType::E(7) => 126,
            WeylType::E(_) => 240,
            WeylType::F4 => 48,
            WeylType::G2 => 12,
        }
    }

    fn check(self) -> Result<Self> {
        let ok = match self {
            WeylType::A(n) => (1..=MAX_RANK).contains(&n),
            WeylType::B(n) => (2..=MAX_RANK).contains(&n),
            WeylType::C(n) => (3..=MAX_RANK).contains(&n),
            WeylType::D(n) => (4..=MAX_RANK).contains(&n),
            WeylType::E(n) => (6..=8).contains(&n),
            WeylType::F4 | WeylType::G2 => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(WitError::Unsupported(format!("Weyl type {self}")))
        }
    }
}

impl fmt::Display for WeylType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeylType::A(n) => write!(f, "A{n}"),
            WeylType::B(n) => write!(f, "B{n}"),
            WeylType::C(n) => write!(f, "C{n}"),
            WeylType::D(n) => write!(f, "D{n}"),
            WeylType::E(n) => write!(f, "E{n}"),
            WeylType::F4 => write!(f, "F4"),
            WeylType::G2 => write!(f, "G2"),
        }
    }
}

impl FromStr for WeylType {
    type Err = WitError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('_', "");
        let bad = || WitError::Parse(format!("Weyl type `{s}`"));
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
        let n: usize = chars.as_str().parse().map_err(|_| bad())?;
        let t = match (head, n) {
            ('A', n) => WeylType::A(n),
            ('B', n) => WeylType::B(n),
            ('C', n) => WeylType::C(n),
            ('D', n) => WeylType::D(n),
            ('E', n) => WeylType::E(n),
            ('F', 4) => WeylType::F4,
            ('G', 2) => WeylType::G2,
            _ => return Err(bad()),
        };
        t.check()
    }
}

impl Serialize for WeylType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WeylType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Cartan entries `a_ij = ⟨α_i^∨, α_j⟩`, Bourbaki numbering.
fn cartan(t: WeylType) -> Vec<Vec<i32>> {
    let n = t.rank();
    let mut a = vec![vec![0i32; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match t {
        WeylType::A(_) | WeylType::B(_) | WeylType::C(_) | WeylType::F4 | WeylType::G2 => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
        }
        WeylType::D(_) => {
            for i in 0..n - 2 {
                link(i, i + 1);
            }
            link(n - 3, n - 1);
        }
        WeylType::E(_) => {
            link(0, 2);
            link(1, 3);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
        }
    }
    match t {
        WeylType::B(_) => a[n - 1][n - 2] = -2,
        WeylType::C(_) => a[n - 2][n - 1] = -2,
        WeylType::F4 => a[2][1] = -2,
        WeylType::G2 => a[0][1] = -3,
        _ => {}
    }
    a
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub weyl_type: WeylType,
    pub rank: usize,
    pub cartan: Vec<Vec<i32>>,
    /// Positive roots in the simple-root basis, sorted by height then coordinates.
    pub positive_roots: Vec<Vec<i32>>,
    pos: Vec<[i8; STRIDE]>,
}

/// Group element with an optional word over the simple reflections.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub(crate) m: Mat,
    pub rank: usize,
    pub word: Option<Vec<usize>>,
}

impl WeylElement {
    pub fn matrix(&self) -> Vec<Vec<i64>> {
        (0..self.rank).map(|i| (0..self.rank).map(|j| self.m[i * STRIDE + j] as i64).collect()).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.m[i * STRIDE + j] as i64
    }

    pub fn is_identity(&self) -> bool {
        (0..self.rank).all(|i| (0..self.rank).all(|j| self.m[i * STRIDE + j] == i8::from(i == j)))
    }
}

/// Builds the root system, rejecting unsupported types.
pub fn build_weyl(t: WeylType) -> Result<RootSystem> {
    let t = t.check()?;
    let n = t.rank();
    let a = cartan(t);
    let mut gens = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = identity_mat(n);
        for j in 0..n {
            m[i * STRIDE + j] = (i8::from(i == j)) - a[i][j] as i8;
        }
        gens.push(m);
    }
    // close the simple roots under the simple reflections
    let mut seen = std::collections::BTreeSet::new();
    let mut stack: Vec<[i8; STRIDE]> = (0..n)
        .map(|i| {
            let mut v = [0i8; STRIDE];
            v[i] = 1;
            v
        })
        .collect();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        for g in &gens {
            let u = mat_vec(g, &v, n);
            if !seen.contains(&u) {
                stack.push(u);
            }
        }
    }
    let mut pos: Vec<[i8; STRIDE]> = seen.into_iter().filter(|v| v.iter().any(|&x| x > 0)).collect();
    pos.sort_by_key(|v| (v.iter().map(|&x| x as i32).sum::<i32>(), *v));
    if 2 * pos.len() != t.root_count() {
        return Err(WitError::Precondition(format!("{t}: generated {} roots", 2 * pos.len())));
    }
    Ok(RootSystem {
        weyl_type: t,
        rank: n,
        cartan: a,
        positive_roots: pos.iter().map(|v| v[..n].iter().map(|&x| x as i32).collect()).collect(),
        pos,
    })
}

pub(crate) fn identity_mat(n: usize) -> Mat {
    let mut m = [0i8; STRIDE * STRIDE];
    for i in 0..n {
        m[i * STRIDE + i] = 1;
    }
    m
}

fn mat_vec(m: &Mat, v: &[i8; STRIDE], n: usize) -> [i8; STRIDE] {
    let mut out = [0i8; STRIDE];
    for i in 0..n {
        let mut s = 0i32;
        for j in 0..n {
            s += m[i * STRIDE + j] as i32 * v[j] as i32;
        }
        out[i] = s as i8;
    }
    out
}

impl RootSystem {
    pub fn group_order(&self) -> u128 {
        self.weyl_type.group_order()
    }

    pub fn identity(&self) -> WeylElement {
        WeylElement { m: identity_mat(self.rank), rank: self.rank, word: Some(vec![]) }
    }

    pub fn reflection(&self, i: usize) -> Result<WeylElement> {
        self.from_word(&[i])
    }

    pub fn from_word(&self, word: &[usize]) -> Result<WeylElement> {
        let mut m = identity_mat(self.rank);
        for &s in word {
            if s >= self.rank {
                return Err(WitError::Precondition(format!("generator {s} out of range")));
            }
            m = self.right_mul_gen(&m, s);
        }
        Ok(WeylElement { m, rank: self.rank, word: Some(word.to_vec()) })
    }

    /// Accepts an integer matrix if it is a product of simple reflections.
    pub fn from_matrix(&self, rows: &[Vec<i64>]) -> Result<WeylElement> {
        let n = self.rank;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(WitError::DimensionMismatch(format!("expected {n}x{n}")));
        }
        let mut m = [0i8; STRIDE * STRIDE];
        for i in 0..n {
            for j in 0..n {
                m[i * STRIDE + j] =
                    i8::try_from(rows[i][j]).map_err(|_| WitError::Precondition("entry out of range".into()))?;
            }
        }
        let w = WeylElement { m, rank: n, word: None };
        let word = self.reduced_word(&w).ok_or_else(|| WitError::Precondition("not a Weyl group element".into()))?;
        Ok(WeylElement { word: Some(word), ..w })
    }

    pub(crate) fn wrap(&self, m: Mat) -> WeylElement {
        WeylElement { m, rank: self.rank, word: None }
    }

    pub fn mul(&self, x: &WeylElement, y: &WeylElement) -> WeylElement {
        self.wrap(self.mul_raw(&x.m, &y.m))
    }

    pub(crate) fn mul_raw(&self, x: &Mat, y: &Mat) -> Mat {
        let n = self.rank;
        let mut out = [0i8; STRIDE * STRIDE];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i32;
                for k in 0..n {
                    s += x[i * STRIDE + k] as i32 * y[k * STRIDE + j] as i32;
                }
                out[i * STRIDE + j] = s as i8;
            }
        }
        out
    }

    /// `w · s` changes columns adjacent to `s`.
    pub(crate) fn right_mul_gen(&self, w: &Mat, s: usize) -> Mat {
        let n = self.rank;
        let mut out = *w;
        for j in 0..n {
            let a = self.cartan[s][j];
            if a != 0 {
                for i in 0..n {
                    out[i * STRIDE + j] = (w[i * STRIDE + j] as i32 - a * w[i * STRIDE + s] as i32) as i8;
                }
            }
        }
        out
    }

    /// `s · w` changes row `s` only.
    pub(crate) fn left_mul_gen(&self, w: &Mat, s: usize) -> Mat {
        let n = self.rank;
        let mut out = *w;
        for j in 0..n {
            let mut v = w[s * STRIDE + j] as i32;
            for k in 0..n {
                v -= self.cartan[s][k] * w[k * STRIDE + j] as i32;
            }
            out[s * STRIDE + j] = v as i8;
        }
        out
    }

    /// `s · w · s`.
    pub(crate) fn conj_gen(&self, w: &Mat, s: usize) -> Mat {
        self.right_mul_gen(&self.left_mul_gen(w, s), s)
    }

    /// Heights of `w(α_j)`; injective in `w`.
    pub(crate) fn heights(&self, w: &Mat) -> [i8; STRIDE] {
        let n = self.rank;
        let mut r = [0i8; STRIDE];
        for j in 0..n {
            let mut s = 0i32;
            for i in 0..n {
                s += w[i * STRIDE + j] as i32;
            }
            r[j] = s as i8;
        }
        r
    }

    pub(crate) fn key(&self, w: &Mat) -> u64 {
        u64::from_le_bytes(self.heights(w).map(|x| x as u8))
    }

    pub(crate) fn length_raw(&self, w: &Mat) -> usize {
        let n = self.rank;
        let r = self.heights(w);
        self.pos
            .iter()
            .filter(|a| {
                let mut h = 0i32;
                for j in 0..n {
                    h += a[j] as i32 * r[j] as i32;
                }
                h < 0
            })
            .count()
    }

    /// Number of positive roots sent to negative roots.
    pub fn length(&self, w: &WeylElement) -> usize {
        self.length_raw(&w.m)
    }

    /// Reduced word read off by peeling right descents; `None` if the
    /// matrix is not in the group.
    pub fn reduced_word(&self, w: &WeylElement) -> Option<Vec<usize>> {
        let mut cur = w.m;
        let mut word = Vec::new();
        let limit = self.pos.len();
        loop {
            let r = self.heights(&cur);
            match (0..self.rank).find(|&s| r[s] < 0) {
                Some(s) => {
                    if word.len() >= limit {
                        return None;
                    }
                    word.push(s);
                    cur = self.right_mul_gen(&cur, s);
                }
                None => break,
            }
        }
        if cur != identity_mat(self.rank) {
            return None;
        }
        word.reverse();
        Some(word)
    }

    pub fn with_reduced_word(&self, w: &WeylElement) -> WeylElement {
        WeylElement { word: self.reduced_word(w), ..w.clone() }
    }

    pub fn inverse(&self, w: &WeylElement) -> WeylElement {
        let mut word = self.reduced_word(w).expect("group element");
        word.reverse();
        self.from_word(&word).expect("valid word")
    }

    pub fn conjugate_by_simple(&self, w: &WeylElement, s: usize) -> WeylElement {
        self.wrap(self.conj_gen(&w.m, s))
    }

    /// Standard Coxeter element `s_1 s_2 ⋯ s_n`.
    pub fn coxeter_element(&self) -> WeylElement {
        self.from_word(&(0..self.rank).collect::<Vec<_>>()).expect("valid word")
    }

    /// Product of a uniformly random word of the given length.
    pub fn random_element<R: Rng>(&self, rng: &mut R, word_len: usize) -> WeylElement {
        let word: Vec<usize> = (0..word_len).map(|_| rng.gen_range(0..self.rank)).collect();
        self.from_word(&word).expect("valid word")
    }

    /// Ascending coefficients of `det(T − w)`.
    pub fn char_poly(&self, w: &WeylElement) -> Vec<i64> {
        char_poly_raw(&w.m, self.rank)
    }

    pub fn cyclotomic_factors(&self, w: &WeylElement) -> CycloFactorization {
        factor_integer_coeffs(self.char_poly(w).into_iter().map(BigInt::from).collect())
    }

    /// True iff 1 is not an eigenvalue.
    pub fn is_elliptic(&self, w: &WeylElement) -> bool {
        self.char_poly(w).iter().sum::<i64>() != 0
    }

    /// Ellipticity for a diagram twist given as a permutation of the nodes;
    /// only the identity twist is supported.
    pub fn is_elliptic_twisted(&self, w: &WeylElement, twist: &[usize]) -> Result<bool> {
        if twist.iter().enumerate().any(|(i, &t)| i != t) || twist.len() != self.rank {
            return Err(WitError::Unsupported("twisted ellipticity".into()));
        }
        Ok(self.is_elliptic(w))
    }

    pub fn order_of(&self, w: &WeylElement) -> usize {
        let id = identity_mat(self.rank);
        let mut p = w.m;
        let mut k = 1;
        while p != id {
            p = self.mul_raw(&p, &w.m);
            k += 1;
        }
        k
    }

    /// Traces of `w^k` for `k = 1..=order(w)`.
    pub fn fingerprint(&self, w: &WeylElement) -> Vec<i64> {
        let id = identity_mat(self.rank);
        let mut out = Vec::new();
        let mut p = w.m;
        loop {
            out.push((0..self.rank).map(|i| p[i * STRIDE + i] as i64).sum());
            if p == id {
                break;
            }
            p = self.mul_raw(&p, &w.m);
        }
        out
    }
}

/// Faddeev–LeVerrier over the integers; divisions are exact.
pub(crate) fn char_poly_raw(m: &Mat, n: usize) -> Vec<i64> {
    let mut c = vec![0i64; n + 1];
    c[n] = 1;
    let mut mk = [0i64; STRIDE * STRIDE];
    for k in 1..=n {
        // mk ← m·mk + c[n−k+1]·I
        let mut next = [0i64; STRIDE * STRIDE];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i64;
                for l in 0..n {
                    s += m[i * STRIDE + l] as i64 * mk[l * STRIDE + j];
                }
                next[i * STRIDE + j] = s;
            }
            next[i * STRIDE + i] += c[n - k + 1];
        }
        mk = next;
        let mut tr = 0i64;
        for i in 0..n {
            for l in 0..n {
                tr += m[i * STRIDE + l] as i64 * mk[l * STRIDE + i];
            }
        }
        c[n - k] = -tr / k as i64;
    }
    c
}

/// Expands a cyclotomic multiset into ascending integer coefficients.
pub fn cyclotomic_product(factors: &BTreeMap<u32, u32>) -> Result<Vec<i64>> {
    let mut p = vec![1i64];
    for (&d, &mult) in factors {
        let phi: Vec<i64> = crate::exact_scalar::cyclotomic_poly(d)?
            .iter()
            .map(|c| i64::try_from(c).map_err(|_| WitError::Unsupported("large cyclotomic coefficient".into())))
            .collect::<Result<_>>()?;
        for _ in 0..mult {
            let mut q = vec![0i64; p.len() + phi.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in phi.iter().enumerate() {
                    q[i + j] += a * b;
                }
            }
            p = q;
        }
    }
    Ok(p)
}

/// Parses `"30"`, `"6,18"` or `"4^2"` / `"Phi6^2*Phi12"` into a multiset.
pub fn parse_factors(s: &str) -> Result<BTreeMap<u32, u32>> {
    let mut out = BTreeMap::new();
    for part in s.split([',', '*', ' ']).filter(|p| !p.is_empty()) {
        let part = part.trim_start_matches("Phi").trim_start_matches("phi");
        let (d, m) = match part.split_once('^') {
            Some((d, m)) => (d, m),
            None => (part, "1"),
        };
        let d: u32 = d.parse().map_err(|_| WitError::Parse(format!("factor `{part}`")))?;
        let m: u32 = m.parse().map_err(|_| WitError::Parse(format!("factor `{part}`")))?;
        if d == 0 || m == 0 {
            return Err(WitError::Parse(format!("factor `{part}`")));
        }
        *out.entry(d).or_insert(0) += m;
    }
    if out.is_empty() {
        return Err(WitError::Parse("empty factor list".into()));
    }
    Ok(out)
}

pub fn factors_label(f: &BTreeMap<u32, u32>) -> String {
    CycloFactorization { factors: f.clone(), remainder: vec![BigInt::from(1)] }.label()
}
