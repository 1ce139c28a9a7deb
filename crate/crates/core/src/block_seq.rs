//! Admissible block-size sequences and their derived invariants.
//!
//! Indices in this module are 1-based to match the block numbering `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WitError};

/// Raw input shape `{"a": [...], "b": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqInput {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

/// Which coordinates of the sign group are forced equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignGroupShape {
    pub size: usize,
    /// Pairs `(t, t+1)`, 1-based.
    pub linked_pairs: Vec<(usize, usize)>,
}

impl SignGroupShape {
    /// Number of independent sign coordinates.
    pub fn rank(&self) -> usize {
        self.size - self.linked_pairs.len()
    }

    pub fn order(&self) -> u64 {
        1u64 << self.rank()
    }

    /// Every element as a ±1 vector, in a fixed order (binary counting over
    /// the free coordinates, first coordinate least significant).
    pub fn elements(&self) -> Vec<Vec<i8>> {
        let reps = self.representatives();
        (0..self.order())
            .map(|mask| {
                let mut w = vec![1i8; self.size];
                for (bit, &t) in reps.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        w[t - 1] = -1;
                    }
                }
                for &(s, t) in &self.linked_pairs {
                    w[t - 1] = w[s - 1];
                }
                w
            })
            .collect()
    }

    /// Free coordinates: all except the second member of each link.
    fn representatives(&self) -> Vec<usize> {
        (1..=self.size).filter(|t| !self.linked_pairs.iter().any(|&(_, s)| s == *t)).collect()
    }

    pub fn contains(&self, omega: &[i8]) -> bool {
        omega.len() == self.size
            && omega.iter().all(|&w| w == 1 || w == -1)
            && self.linked_pairs.iter().all(|&(s, t)| omega[s - 1] == omega[t - 1])
    }
}

fn normalize(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn check_shape(name: &str, v: &[usize]) -> Result<()> {
    for w in v.windows(2) {
        if w[0] < w[1] {
            return Err(WitError::InvalidSequence(format!("{name} is not descending")));
        }
        if w[0] == w[1] && w[1] > 0 {
            return Err(WitError::InvalidSequence(format!("{name} repeats the positive entry {}", w[0])));
        }
    }
    Ok(())
}

fn at(v: &[usize], i: usize) -> usize {
    v.get(i - 1).copied().unwrap_or(0)
}

/// Derived data for the ε-symmetric case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoBlockSeq {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub epsilon: i8,
    pub dim: usize,
    pub kappa: usize,
    pub k: usize,
    pub c: Vec<usize>,
    /// `p_1..p_σ` (all positive).
    pub p: Vec<usize>,
    /// `2·p′_t` for `t ∈ [1, σ+κ]`; the κ line stores 1.
    pub two_p_prime: Vec<usize>,
    pub sigma: usize,
    pub sign_group: SignGroupShape,
}

/// Derives the ε-symmetric invariants, inferring ε from parity. An empty
/// pair of sequences is read as ε = 1.
pub fn derive_iso(a: &[usize], b: &[usize]) -> Result<IsoBlockSeq> {
    let positive: Vec<usize> = a.iter().chain(b).copied().filter(|&x| x > 0).collect();
    let epsilon = match positive.first() {
        None => 1,
        Some(x) if x % 2 == 1 => 1,
        Some(_) => -1,
    };
    derive_iso_with_epsilon(a, b, epsilon)
}

/// As [`derive_iso`] with ε given explicitly.
pub fn derive_iso_with_epsilon(a: &[usize], b: &[usize], epsilon: i8) -> Result<IsoBlockSeq> {
    if epsilon != 1 && epsilon != -1 {
        return Err(WitError::InvalidSequence("epsilon must be ±1".into()));
    }
    let a = normalize(a);
    let b = normalize(b);
    check_shape("a", &a)?;
    check_shape("b", &b)?;
    for &x in a.iter().chain(&b).filter(|&&x| x > 0) {
        // (−1)^x = −ε
        let sign = if x % 2 == 0 { 1 } else { -1 };
        if sign != -epsilon {
            return Err(WitError::InvalidSequence(format!(
                "entry {x} has the wrong parity for epsilon = {epsilon}"
            )));
        }
    }
    let dim: usize = a.iter().sum::<usize>() + b.iter().sum::<usize>();
    let kappa = dim % 2;
    let k = a.len().min(b.len());
    let len = a.len().max(b.len());
    let c: Vec<usize> = (1..=len).map(|i| at(&a, i) + at(&b, i)).collect();
    let ci = |i: usize| c.get(i - 1).copied().unwrap_or(0);
    let mut p_all = vec![0usize; len + 2];
    for i in 1..=k.max(if epsilon == -1 { len } else { 0 }) {
        p_all[i] = ci(i) / 2;
    }
    if epsilon == 1 {
        let mut i = k + 1;
        while i <= len {
            let (c0, c1) = (ci(i), ci(i + 1));
            let (p0, p1) = match (c0 >= 1, c1 >= 1) {
                (true, true) => ((c0 - 1) / 2, (c1 + 1) / 2),
                (true, false) => ((c0 - 1) / 2, 0),
                _ => (0, 0),
            };
            p_all[i] = p0;
            p_all[i + 1] = p1;
            i += 2;
        }
    }
    let sigma = p_all.iter().rposition(|&x| x > 0).unwrap_or(0);
    let p: Vec<usize> = p_all[1..=sigma].to_vec();
    if p.iter().any(|&x| x == 0) {
        return Err(WitError::InvalidSequence("derived p has an interior zero".into()));
    }
    if 2 * p.iter().sum::<usize>() + kappa != dim {
        return Err(WitError::InvalidSequence("2·Σp + κ differs from the dimension".into()));
    }
    let mut two_p_prime: Vec<usize> = p.iter().map(|x| 2 * x).collect();
    if kappa == 1 {
        two_p_prime.push(1);
    }
    let size = sigma + kappa;
    let mut linked_pairs = Vec::new();
    if epsilon == 1 {
        let mut t = k + 1;
        while t + 1 <= size {
            linked_pairs.push((t, t + 1));
            t += 2;
        }
    }
    Ok(IsoBlockSeq {
        a,
        b,
        epsilon,
        dim,
        kappa,
        k,
        c,
        p,
        two_p_prime,
        sigma,
        sign_group: SignGroupShape { size, linked_pairs },
    })
}

impl IsoBlockSeq {
    pub fn a_at(&self, i: usize) -> usize {
        at(&self.a, i)
    }

    pub fn b_at(&self, i: usize) -> usize {
        at(&self.b, i)
    }

    /// `p_t`, zero for the κ line.
    pub fn p_at(&self, t: usize) -> usize {
        self.p.get(t - 1).copied().unwrap_or(0)
    }

    /// Number of lines `σ+κ`.
    pub fn lines(&self) -> usize {
        self.sigma + self.kappa
    }

    pub fn input(&self) -> SeqInput {
        SeqInput { a: self.a.clone(), b: self.b.clone() }
    }
}

/// Derived data for the twisted (bilinear-form) case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedBlockSeq {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub n: usize,
    pub k: usize,
    /// `p_1..p_σ` (all positive).
    pub p: Vec<usize>,
    pub sigma: usize,
    pub sign_group: SignGroupShape,
}

pub fn derive_twisted(a: &[usize], b: &[usize]) -> Result<TwistedBlockSeq> {
    let a = normalize(a);
    let b = normalize(b);
    check_shape("a", &a)?;
    check_shape("b", &b)?;
    if let Some(x) = a.iter().find(|&&x| x > 0 && x % 2 == 0) {
        return Err(WitError::InvalidSequence(format!("a entry {x} must be odd")));
    }
    if let Some(x) = b.iter().find(|&&x| x > 0 && x % 2 == 1) {
        return Err(WitError::InvalidSequence(format!("b entry {x} must be even")));
    }
    let n: usize = a.iter().sum::<usize>() + b.iter().sum::<usize>();
    let k = a.len().min(b.len());
    let len = a.len().max(b.len());
    let mut p_all = vec![0usize; len + 2];
    for i in 1..=k {
        p_all[i] = (at(&a, i) + at(&b, i) + 1) / 2;
    }
    let mut i = k + 1;
    while i <= len {
        let (a0, a1, b0, b1) = (at(&a, i), at(&a, i + 1), at(&b, i), at(&b, i + 1));
        let (p0, p1) = if b0 > 0 {
            (b0 / 2, (b1 + 2) / 2)
        } else if a0 > 0 && a1 > 0 {
            ((a0 + 1) / 2, (a1 + 1) / 2)
        } else if a0 > 0 {
            ((a0 + 1) / 2, 0)
        } else {
            (0, 0)
        };
        p_all[i] = p0;
        p_all[i + 1] = p1;
        i += 2;
    }
    let sigma = p_all.iter().rposition(|&x| x > 0).unwrap_or(0);
    let p: Vec<usize> = p_all[1..=sigma].to_vec();
    if p.iter().any(|&x| x == 0) {
        return Err(WitError::InvalidSequence("derived p has an interior zero".into()));
    }
    if p.iter().map(|x| 2 * x - 1).sum::<usize>() != n {
        return Err(WitError::InvalidSequence("Σ(2p−1) differs from n".into()));
    }
    let mut linked_pairs = Vec::new();
    let mut t = k + 1;
    while t + 1 <= sigma {
        if at(&b, t) > 0 {
            linked_pairs.push((t, t + 1));
        }
        t += 2;
    }
    Ok(TwistedBlockSeq { a, b, n, k, p, sigma, sign_group: SignGroupShape { size: sigma, linked_pairs } })
}

impl TwistedBlockSeq {
    pub fn a_at(&self, i: usize) -> usize {
        at(&self.a, i)
    }

    pub fn b_at(&self, i: usize) -> usize {
        at(&self.b, i)
    }

    pub fn p_at(&self, t: usize) -> usize {
        self.p.get(t - 1).copied().unwrap_or(0)
    }

    pub fn input(&self) -> SeqInput {
        SeqInput { a: self.a.clone(), b: self.b.clone() }
    }
}

/// Strictly decreasing lists of positive integers of the given parity
/// summing to `total`.
fn strict_parts(total: usize, odd: bool, max: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(total)).rev() {
        if (first % 2 == 1) != odd {
            continue;
        }
        for mut rest in strict_parts(total - first, odd, first - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every admissible ε-symmetric pair of sequences with dimension exactly `dim`,
/// for both signs, in a fixed order.
pub fn enumerate_iso(dim: usize) -> Vec<IsoBlockSeq> {
    let mut out = Vec::new();
    if dim == 0 {
        return vec![derive_iso(&[], &[]).expect("empty is admissible")];
    }
    for odd in [true, false] {
        for sa in 0..=dim {
            for a in strict_parts(sa, odd, sa) {
                for b in strict_parts(dim - sa, odd, dim - sa) {
                    if let Ok(seq) = derive_iso(&a, &b) {
                        out.push(seq);
                    }
                }
            }
        }
    }
    out
}

/// Every admissible twisted pair of sequences with `n` exactly.
pub fn enumerate_twisted(n: usize) -> Vec<TwistedBlockSeq> {
    let mut out = Vec::new();
    for sa in 0..=n {
        for a in strict_parts(sa, true, sa) {
            for b in strict_parts(n - sa, false, n - sa) {
                if let Ok(seq) = derive_twisted(&a, &b) {
                    out.push(seq);
                }
            }
        }
    }
    out
}
