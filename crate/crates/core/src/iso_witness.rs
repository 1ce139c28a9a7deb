//! Witness configurations `(g, L^1, …, L^{σ+κ})` for isometries of
//! ε-symmetric forms: inductive construction, validation of the pairing
//! axioms, normalization to the canonical pairing tables, transport between
//! configurations and the isotropy group.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::block_seq::{derive_iso_with_epsilon, IsoBlockSeq, SeqInput};
use crate::error::{Result, WitError};
use crate::exact_scalar::{dot, jordan_partition, GaussRational, Matrix, Vector};
use crate::iso_models::{
    default_range, f_value, gr, mixed_table, model_mixed_block, model_odd_block, model_paired_odd_blocks, sign,
    xi_cross, xi_self, IsoModel,
};
use crate::report::Report;

/// How a line enters the canonical pairing tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineRole {
    /// Its own mixed (or symplectic) block, orthogonal to everything else.
    Single,
    /// First line of a glued pair; `q` is the parameter of its partner.
    PairFirst { p: usize, q: usize, delta: i8 },
    /// Second line of a glued pair; `first` is the partner's parameter.
    PairSecond { first: usize, p: usize, delta: i8 },
    /// The unpaired line of a one-dimensional block.
    Kappa { delta: i8 },
}

fn delta_at(seq: &IsoBlockSeq, t: usize) -> i8 {
    if seq.a_at(t) > 0 {
        1
    } else {
        -1
    }
}

/// Role of line `t` (1-based).
pub fn line_role(seq: &IsoBlockSeq, t: usize) -> LineRole {
    let total = seq.lines();
    if seq.epsilon == -1 || t <= seq.k {
        return LineRole::Single;
    }
    if (t - seq.k - 1) % 2 == 0 {
        if t + 1 <= total {
            LineRole::PairFirst { p: seq.p_at(t), q: seq.p_at(t + 1), delta: delta_at(seq, t) }
        } else {
            LineRole::Kappa { delta: delta_at(seq, t) }
        }
    } else {
        LineRole::PairSecond { first: seq.p_at(t - 1), p: seq.p_at(t), delta: delta_at(seq, t - 1) }
    }
}

/// Offset window on which normalized tables are compared.
pub fn table_window(seq: &IsoBlockSeq) -> RangeInclusive<i64> {
    default_range(seq.p.first().copied().unwrap_or(0))
}

fn dpow(delta: i8, d: i64) -> BigInt {
    if delta == 1 {
        BigInt::one()
    } else {
        sign(d)
    }
}

/// Canonical values `(z^t_i, z^r_j)` as functions of `d = i − j`.
pub struct ExpectedTables {
    seq: IsoBlockSeq,
    roles: Vec<LineRole>,
    mixed_x: Vec<Option<Vec<BigInt>>>,
}

impl ExpectedTables {
    pub fn new(seq: &IsoBlockSeq) -> Result<Self> {
        let roles: Vec<LineRole> = (1..=seq.lines()).map(|t| line_role(seq, t)).collect();
        let len = 2 * (*table_window(seq).end() as usize) + 2;
        let mixed_x = roles
            .iter()
            .enumerate()
            .map(|(k, role)| match role {
                LineRole::Single => mixed_table(seq.a_at(k + 1), seq.b_at(k + 1), len).map(|t| Some(t.x_seq)),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpectedTables { seq: seq.clone(), roles, mixed_x })
    }

    pub fn role(&self, t: usize) -> LineRole {
        self.roles[t - 1]
    }

    fn mixed(&self, t: usize, s: i64) -> BigInt {
        let x = self.mixed_x[t - 1].as_ref().expect("single line");
        match x.get(s as usize) {
            Some(v) => v.clone(),
            None => {
                let m = mixed_table(self.seq.a_at(t), self.seq.b_at(t), s as usize + 1).expect("valid block");
                m.x_seq[s as usize].clone()
            }
        }
    }

    /// `(z^t_i, z^r_j)` with `d = i − j`, lines 1-based.
    pub fn value(&self, t: usize, r: usize, d: i64) -> BigInt {
        if t == r {
            return match self.role(t) {
                LineRole::Single => {
                    let p = self.seq.p_at(t) as i64;
                    if d.abs() < p {
                        BigInt::zero()
                    } else if d <= -p {
                        self.mixed(t, -d - p)
                    } else {
                        BigInt::from(self.seq.epsilon) * self.mixed(t, d - p)
                    }
                }
                LineRole::PairFirst { p, delta, .. } => sign(p as i64) * dpow(delta, d) * f_value(p, d),
                LineRole::PairSecond { first, p, delta } => dpow(delta, d) * xi_self(first, p, d),
                LineRole::Kappa { delta } => BigInt::from(2) * dpow(delta, d),
            };
        }
        match (self.role(t), self.role(r)) {
            (LineRole::PairFirst { p, q, delta }, LineRole::PairSecond { .. }) if r == t + 1 => {
                dpow(delta, d) * xi_cross(p, q, d)
            }
            (LineRole::PairSecond { .. }, LineRole::PairFirst { .. }) if t == r + 1 => self.value(r, t, -d),
            _ => BigInt::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoWitness {
    pub seq: IsoBlockSeq,
    pub gram: Matrix,
    pub g: Matrix,
    pub lines: Vec<Vector>,
    pub normalized: Option<Vec<Vector>>,
}

fn embed(v: &[GaussRational], offset: usize, dim: usize) -> Vector {
    let mut out = vec![GaussRational::zero(); dim];
    out[offset..offset + v.len()].clone_from_slice(v);
    out
}

fn model_blocks(a: &[usize], b: &[usize], epsilon: i8) -> Result<Vec<IsoModel>> {
    let at = |v: &[usize], i: usize| v.get(i).copied().unwrap_or(0);
    let (a1, b1) = (at(a, 0), at(b, 0));
    if a1 == 0 && b1 == 0 {
        return Ok(vec![]);
    }
    let tail = |v: &[usize], k: usize| v.get(k..).unwrap_or(&[]).to_vec();
    if (a1 >= 1 && b1 >= 1) || epsilon == -1 {
        let mut out = vec![model_mixed_block(a1, b1)?];
        out.extend(model_blocks(&tail(a, 1), &tail(b, 1), epsilon)?);
        return Ok(out);
    }
    if a1 > 0 {
        let a2 = at(a, 1);
        if a2 == 0 {
            return Ok(vec![model_odd_block((a1 - 1) / 2)?]);
        }
        let mut out = vec![model_paired_odd_blocks((a1 - 1) / 2, (a2 + 1) / 2)?];
        out.extend(model_blocks(&tail(a, 2), &[], epsilon)?);
        return Ok(out);
    }
    let mut out = model_blocks(b, a, epsilon)?;
    for m in &mut out {
        m.g = m.g.neg();
    }
    Ok(out)
}

/// Inductive construction: orthogonal sum of mixed blocks, glued odd pairs
/// and a final odd block, with `g` negated when only `b` is present.
pub fn build(seq: &IsoBlockSeq) -> Result<IsoWitness> {
    let blocks = model_blocks(&seq.a, &seq.b, seq.epsilon)?;
    let gram = Matrix::block_diag(&blocks.iter().map(|m| &m.gram).collect::<Vec<_>>());
    let g = Matrix::block_diag(&blocks.iter().map(|m| &m.g).collect::<Vec<_>>());
    let dim = gram.rows();
    if dim != seq.dim {
        return Err(WitError::InvalidSequence("block dimensions do not add up".into()));
    }
    let mut lines = Vec::new();
    let mut offset = 0;
    for m in &blocks {
        lines.extend(m.lines.iter().map(|l| embed(l, offset, dim)));
        offset += m.dim;
    }
    if lines.len() != seq.lines() {
        return Err(WitError::InvalidSequence("line count differs from σ+κ".into()));
    }
    Ok(IsoWitness { seq: seq.clone(), gram, g, lines, normalized: None })
}

pub fn build_from(input: &SeqInput) -> Result<IsoWitness> {
    build(&crate::block_seq::derive_iso(&input.a, &input.b)?)
}

/// Vectors `g^u v` for `u` in the range.
fn orbit(g: &Matrix, v: &[GaussRational], range: RangeInclusive<i64>) -> Result<Vec<Vector>> {
    let (lo, hi) = (*range.start(), *range.end());
    let mut cur = g.pow(lo)?.mul_vec(v);
    let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for u in lo..=hi {
        out.push(cur.clone());
        if u < hi {
            cur = g.mul_vec(&cur);
        }
    }
    Ok(out)
}

/// Pairing tables among a family of vectors on one window.
struct Pairings {
    lo: i64,
    orbits: Vec<Vec<Vector>>,
    duals: Vec<Vector>,
}

impl Pairings {
    fn new(gram: &Matrix, g: &Matrix, vs: &[Vector], range: RangeInclusive<i64>) -> Result<Self> {
        let orbits = vs.iter().map(|v| orbit(g, v, range.clone())).collect::<Result<Vec<_>>>()?;
        let duals = vs.iter().map(|v| gram.mul_vec(v)).collect();
        Ok(Pairings { lo: *range.start(), orbits, duals })
    }

    /// `(x^t_d, x^r_0)`, 1-based.
    fn at(&self, t: usize, r: usize, d: i64) -> GaussRational {
        dot(&self.orbits[t - 1][(d - self.lo) as usize], &self.duals[r - 1])
    }
}

fn chain_basis(g: &Matrix, vs: &[Vector], seq: &IsoBlockSeq) -> Vec<Vector> {
    let mut out = Vec::with_capacity(seq.dim);
    for (k, v) in vs.iter().enumerate() {
        let mut cur = v.clone();
        for i in 0..seq.two_p_prime[k] {
            if i > 0 {
                cur = g.mul_vec(&cur);
            }
            out.push(cur.clone());
        }
    }
    out
}

fn nonzero_partition(v: &[usize]) -> Vec<usize> {
    v.iter().copied().filter(|&x| x > 0).collect()
}

impl IsoWitness {
    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dim": self.dim(),
            "epsilon": self.seq.epsilon,
            "gram": self.gram,
            "g": self.g,
            "lines": self.lines,
            "seq": {"a": self.seq.a, "b": self.seq.b},
            "normalized": self.normalized,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| WitError::Parse(format!("missing field {k}")));
        let seq_in: SeqInput =
            serde_json::from_value(field("seq")?.clone()).map_err(|e| WitError::Parse(e.to_string()))?;
        let epsilon = match v.get("epsilon").and_then(|e| e.as_i64()) {
            Some(e) => e as i8,
            None => crate::block_seq::derive_iso(&seq_in.a, &seq_in.b)?.epsilon,
        };
        let seq = derive_iso_with_epsilon(&seq_in.a, &seq_in.b, epsilon)?;
        let gram = Matrix::from_json(field("gram")?)?;
        let g = Matrix::from_json(field("g")?)?;
        let vectors = |x: &serde_json::Value| -> Result<Vec<Vector>> {
            serde_json::from_value(x.clone()).map_err(|e| WitError::Parse(e.to_string()))
        };
        let lines = vectors(field("lines")?)?;
        let normalized = match v.get("normalized") {
            None | Some(serde_json::Value::Null) => None,
            Some(x) => Some(vectors(x)?),
        };
        let n = gram.rows();
        if !gram.is_square() || (g.rows(), g.cols()) != (n, n) {
            return Err(WitError::DimensionMismatch("gram and g must be square of equal size".into()));
        }
        if lines.iter().chain(normalized.iter().flatten()).any(|l| l.len() != n) {
            return Err(WitError::DimensionMismatch("line vector length".into()));
        }
        Ok(IsoWitness { seq, gram, g, lines, normalized })
    }

    pub fn normalized_vectors(&self) -> Result<&[Vector]> {
        self.normalized.as_deref().ok_or_else(|| WitError::Precondition("witness is not normalized".into()))
    }

    /// Checks every axiom of a configuration; each violated pairing is
    /// listed with indices `[t, r, i, j]`.
    pub fn validate(&self) -> Report {
        let mut rep = Report::new();
        let seq = &self.seq;
        let n = self.dim();
        if !self.gram.is_square() || self.g.rows() != n || self.g.cols() != n || n != seq.dim {
            rep.fail("shape", vec![n as i64, seq.dim as i64]);
            return rep;
        }
        let eps = GaussRational::from_int(seq.epsilon as i64);
        rep.check("form_eps_symmetric", self.gram.transpose() == self.gram.scale(&eps));
        rep.check("form_nondegenerate", self.gram.rank() == n);
        rep.check("isometry", self.g.transpose().dot_mat(&self.gram).dot_mat(&self.g) == self.gram);
        let one = GaussRational::one();
        let plus = jordan_partition(&self.g, &one).unwrap_or_default();
        let minus = jordan_partition(&self.g, &-one).unwrap_or_default();
        rep.check("jordan_plus", plus == nonzero_partition(&seq.a));
        rep.check("jordan_minus", minus == nonzero_partition(&seq.b));
        let total = seq.lines();
        rep.check("line_count", self.lines.len() == total);
        if self.lines.len() != total || self.lines.iter().any(|l| l.len() != n) {
            return rep;
        }
        let zero_lines: Vec<Vec<i64>> =
            (1..=total).filter(|&t| self.lines[t - 1].iter().all(Zero::is_zero)).map(|t| vec![t as i64]).collect();
        rep.group("line_nonzero", zero_lines);
        let reach = seq.p.iter().map(|&p| 2 * p as i64).max().unwrap_or(0) + 1;
        let tab = match Pairings::new(&self.gram, &self.g, &self.lines, -reach..=reach) {
            Ok(t) => t,
            Err(_) => {
                rep.fail("g_invertible", vec![]);
                return rep;
            }
        };
        let p = |t: usize| seq.p_at(t) as i64;
        let (mut zero_fail, mut nz_fail, mut cross_fail) = (vec![], vec![], vec![]);
        for t in 1..=total {
            for d in -(p(t) - 1)..=(p(t) - 1) {
                if !tab.at(t, t, d).is_zero() {
                    zero_fail.push(vec![t as i64, t as i64, d, 0]);
                }
            }
            if tab.at(t, t, -p(t)).is_zero() {
                nz_fail.push(vec![t as i64, t as i64, -p(t), 0]);
            }
            for r in t + 1..=total {
                for d in -p(r)..=2 * p(t) - p(r) - 1 {
                    if !tab.at(t, r, d).is_zero() {
                        cross_fail.push(vec![t as i64, r as i64, d, 0]);
                    }
                }
            }
        }
        rep.group("self_zero", zero_fail);
        rep.group("self_nonzero", nz_fail);
        rep.group("cross_zero", cross_fail);
        let basis = chain_basis(&self.g, &self.lines, seq);
        rep.check("direct_sum", basis.len() == n && Matrix::from_columns(n, &basis).rank() == n);
        rep
    }

    /// Rescales each line to the vector `z^t` reproducing the canonical
    /// tables, and verifies the tables on the whole window.
    pub fn normalize(&self) -> Result<IsoWitness> {
        let rep = self.validate();
        if !rep.passed() {
            let first = rep.failures().next().map(|e| e.condition.clone()).unwrap_or_default();
            return Err(WitError::Precondition(format!("witness fails validation ({first})")));
        }
        let seq = &self.seq;
        let exp = ExpectedTables::new(seq)?;
        let window = table_window(seq);
        let anchors = Pairings::new(&self.gram, &self.g, &self.lines, window.clone())?;
        let mut z: Vec<Vector> = Vec::with_capacity(self.lines.len());
        for t in 1..=seq.lines() {
            let line = &self.lines[t - 1];
            let scale = match exp.role(t) {
                LineRole::PairSecond { .. } => {
                    let first = &z[t - 2];
                    let d = window
                        .clone()
                        .find(|&d| !exp.value(t - 1, t, d).is_zero())
                        .ok_or_else(|| WitError::Normalization("no anchor for the glued pair".into()))?;
                    let raw = dot(&self.g.pow(d)?.mul_vec(first), &self.gram.mul_vec(line));
                    if raw.is_zero() {
                        return Err(WitError::Normalization(format!("line {t}: cross anchor vanishes")));
                    }
                    &gr(exp.value(t - 1, t, d)) / &raw
                }
                role => {
                    let d = if let LineRole::Kappa { .. } = role { 0 } else { -(seq.p_at(t) as i64) };
                    let raw = anchors.at(t, t, d);
                    let ratio = &gr(exp.value(t, t, d)) / &raw;
                    ratio.sqrt().ok_or_else(|| {
                        WitError::Normalization(format!("line {t}: scale {ratio} has no square root in Q(i)"))
                    })?
                }
            };
            z.push(line.iter().map(|c| c * &scale).collect());
        }
        let tab = Pairings::new(&self.gram, &self.g, &z, window.clone())?;
        for t in 1..=seq.lines() {
            for r in 1..=seq.lines() {
                for d in window.clone() {
                    let want = gr(exp.value(t, r, d));
                    let got = tab.at(t, r, d);
                    if got != want {
                        return Err(WitError::Normalization(format!(
                            "table ({t},{r}) at offset {d}: got {got}, expected {want}"
                        )));
                    }
                }
            }
        }
        Ok(IsoWitness { normalized: Some(z), ..self.clone() })
    }

    /// Basis `g^i z^t`, `i ∈ [0, 2p′_t − 1]`, as matrix columns.
    pub fn chain_matrix(&self) -> Result<Matrix> {
        let z = self.normalized_vectors()?;
        Ok(Matrix::from_columns(self.dim(), &chain_basis(&self.g, z, &self.seq)))
    }

    /// Image under an isometry `γ` of the form: `(γgγ⁻¹, γL^t, γz^t)`.
    pub fn act(&self, gamma: &Matrix) -> Result<IsoWitness> {
        if gamma.transpose().dot_mat(&self.gram).dot_mat(gamma) != self.gram {
            return Err(WitError::Precondition("matrix is not an isometry of the form".into()));
        }
        let inv = gamma.inverse()?;
        let map = |vs: &[Vector]| vs.iter().map(|v| gamma.mul_vec(v)).collect::<Vec<_>>();
        Ok(IsoWitness {
            seq: self.seq.clone(),
            gram: self.gram.clone(),
            g: gamma.dot_mat(&self.g).dot_mat(&inv),
            lines: map(&self.lines),
            normalized: self.normalized.as_deref().map(map),
        })
    }
}

/// The isometry carrying one normalized configuration to another:
/// `γ(g^i z^t) = g′^i z′^t`.
pub fn transport(w1: &IsoWitness, w2: &IsoWitness) -> Result<Matrix> {
    if w1.seq.a != w2.seq.a || w1.seq.b != w2.seq.b || w1.seq.epsilon != w2.seq.epsilon {
        return Err(WitError::Precondition("block sequences differ".into()));
    }
    let b1 = w1.chain_matrix()?;
    let b2 = w2.chain_matrix()?;
    let gamma = b2.dot_mat(&b1.inverse()?);
    if gamma.transpose().dot_mat(&w2.gram).dot_mat(&gamma) != w1.gram {
        return Err(WitError::Normalization("transport does not carry the form".into()));
    }
    if gamma.dot_mat(&w1.g) != w2.g.dot_mat(&gamma) {
        return Err(WitError::Normalization("transport does not intertwine g".into()));
    }
    Ok(gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropyElement {
    pub omega: Vec<i8>,
    pub gamma: Matrix,
    pub det: GaussRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct Isotropy {
    pub elements: Vec<IsotropyElement>,
    /// One element per free sign coordinate.
    pub generators: Vec<IsotropyElement>,
    /// Line pairs with a nonzero pairing somewhere on the window; each forces
    /// equal signs.
    pub derived_links: Vec<(usize, usize)>,
    pub report: Report,
}

impl Isotropy {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

fn sign_matrix(w: &IsoWitness, omega: &[i8]) -> Result<Matrix> {
    let b = w.chain_matrix()?;
    let mut diag = Matrix::zeros(w.dim(), w.dim());
    let mut k = 0;
    for (t, &s) in omega.iter().enumerate() {
        for _ in 0..w.seq.two_p_prime[t] {
            diag[(k, k)] = GaussRational::from_int(s as i64);
            k += 1;
        }
    }
    Ok(b.dot_mat(&diag).dot_mat(&b.inverse()?))
}

/// The isometry acting by `ω_t` on the chain of `z^t`.
pub fn sign_element(w: &IsoWitness, omega: &[i8]) -> Result<IsotropyElement> {
    if !w.seq.sign_group.contains(omega) {
        return Err(WitError::Precondition("sign vector is not in the sign group".into()));
    }
    let gamma = sign_matrix(w, omega)?;
    let det = gamma.det()?;
    Ok(IsotropyElement { omega: omega.to_vec(), gamma, det })
}

/// All configuration-fixing isometries, one per sign-group element, with the
/// link structure rederived from the pairing tables.
pub fn isotropy(w: &IsoWitness) -> Result<Isotropy> {
    let z = w.normalized_vectors()?;
    let seq = &w.seq;
    let shape = &seq.sign_group;
    let elements =
        shape.elements().iter().map(|om| sign_element(w, om)).collect::<Result<Vec<IsotropyElement>>>()?;
    let generators: Vec<IsotropyElement> =
        (0..shape.rank()).map(|bit| elements[1usize << bit].clone()).collect();
    let mut rep = Report::new();
    let n = w.dim();
    let id = Matrix::identity(n);
    let (mut iso_f, mut comm_f, mut line_f, mut inv_f) = (vec![], vec![], vec![], vec![]);
    for (k, e) in elements.iter().enumerate() {
        let g = &e.gamma;
        if g.transpose().dot_mat(&w.gram).dot_mat(g) != w.gram {
            iso_f.push(vec![k as i64]);
        }
        if g.dot_mat(&w.g) != w.g.dot_mat(g) {
            comm_f.push(vec![k as i64]);
        }
        for (t, zt) in z.iter().enumerate() {
            let s = GaussRational::from_int(e.omega[t] as i64);
            if g.mul_vec(zt) != zt.iter().map(|c| c * &s).collect::<Vector>() {
                line_f.push(vec![k as i64, t as i64 + 1]);
            }
        }
        if g.dot_mat(g) != id {
            inv_f.push(vec![k as i64]);
        }
    }
    rep.group("isotropy_isometry", iso_f);
    rep.group("isotropy_commutes", comm_f);
    rep.group("isotropy_scales_lines", line_f);
    rep.group("isotropy_involution", inv_f);
    let tab = Pairings::new(&w.gram, &w.g, z, table_window(seq))?;
    let window = table_window(seq);
    let mut derived_links = vec![];
    for t in 1..=seq.lines() {
        for r in t + 1..=seq.lines() {
            if window.clone().any(|d| !tab.at(t, r, d).is_zero()) {
                derived_links.push((t, r));
            }
        }
    }
    rep.check("links_match_sign_group", derived_links == shape.linked_pairs);
    let mut closure_f = vec![];
    for (i, gen) in generators.iter().enumerate() {
        for (k, e) in elements.iter().enumerate() {
            let prod = gen.gamma.dot_mat(&e.gamma);
            if !elements.iter().any(|x| x.gamma == prod) {
                closure_f.push(vec![i as i64, k as i64]);
            }
        }
    }
    rep.group("closure", closure_f);
    if n % 2 == 0 {
        rep.check("det_one", elements.iter().all(|e| e.det.is_one()));
    }
    Ok(Isotropy { elements, generators, derived_links, report: rep })
}

/// Basis of `⊕_{t≤σ, i∈[p_t, 2p_t−1]} g^i L^t`.
fn isotropic_basis(g: &Matrix, lines: &[Vector], seq: &IsoBlockSeq) -> Vec<Vector> {
    let mut out = vec![];
    for t in 1..=seq.sigma {
        let p = seq.p_at(t);
        let mut cur = lines[t - 1].clone();
        for i in 0..2 * p {
            if i > 0 {
                cur = g.mul_vec(&cur);
            }
            if i >= p {
                out.push(cur.clone());
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentLabel {
    /// 0 for the component of the reference subspace, 1 for the other one.
    pub label: u8,
    pub intersection_dim: usize,
}

/// Which of the two families of maximal isotropic subspaces contains the
/// subspace attached to the configuration. The reference is the subspace
/// attached to the constructed configuration for the same sequence.
pub fn isotropic_component(w: &IsoWitness) -> Result<ComponentLabel> {
    let seq = &w.seq;
    let n = w.dim();
    if seq.epsilon != 1 || n < 2 || n % 2 == 1 {
        return Err(WitError::Precondition("needs a symmetric form of even dimension ≥ 2".into()));
    }
    let half = n / 2;
    let u = isotropic_basis(&w.g, &w.lines, seq);
    let um = Matrix::from_columns(n, &u);
    if u.len() != half || um.rank() != half || !um.transpose().dot_mat(&w.gram).dot_mat(&um).is_zero() {
        return Err(WitError::Precondition("attached subspace is not maximal isotropic".into()));
    }
    let reference = build(seq)?;
    if reference.gram != w.gram {
        return Err(WitError::Precondition("form differs from the reference form".into()));
    }
    let r = isotropic_basis(&reference.g, &reference.lines, seq);
    let joined: Vec<Vector> = u.into_iter().chain(r).collect();
    let intersection_dim = n - Matrix::from_columns(n, &joined).rank();
    Ok(ComponentLabel { label: ((half - intersection_dim) % 2) as u8, intersection_dim })
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeDet {
    pub element: IsotropyElement,
    /// Determinants of the restrictions to the generalized `+1` and `−1`
    /// eigenspaces of `g`.
    pub det_plus: GaussRational,
    pub det_minus: GaussRational,
}

fn generalized_eigenspace(g: &Matrix, lambda: i64) -> Result<Vec<Vector>> {
    let n = g.rows();
    let shifted = g.sub(&Matrix::identity(n).scale(&GaussRational::from_int(lambda)));
    Ok(shifted.pow(n as i64)?.nullspace())
}

/// Isotropy element with `ω_1 = −1` and all other signs `+1`.
pub fn negative_det_element(w: &IsoWitness) -> Result<NegativeDet> {
    let seq = &w.seq;
    if seq.epsilon != 1 || seq.a_at(1) == 0 || seq.b_at(1) == 0 {
        return Err(WitError::Precondition("needs a symmetric form with a_1 > 0 and b_1 > 0".into()));
    }
    let mut omega = vec![1i8; seq.lines()];
    omega[0] = -1;
    let element = sign_element(w, &omega)?;
    let restricted_det = |lambda: i64| -> Result<GaussRational> {
        let basis = generalized_eigenspace(&w.g, lambda)?;
        element.gamma.restrict(&basis)?.det()
    };
    let det_plus = restricted_det(1)?;
    let det_minus = restricted_det(-1)?;
    Ok(NegativeDet { element, det_plus, det_minus })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialIsotropy {
    pub subgroup: Vec<Vec<i8>>,
    pub full_order: usize,
    /// Whether `det γ = ω_{σ+1}` held for every element.
    pub det_matches: bool,
}

/// The determinant-one part of the isotropy group (odd dimension).
pub fn special_isotropy(w: &IsoWitness) -> Result<SpecialIsotropy> {
    let seq = &w.seq;
    if seq.epsilon != 1 || w.dim() % 2 == 0 {
        return Err(WitError::Precondition("needs a symmetric form of odd dimension".into()));
    }
    let iso = isotropy(w)?;
    let last = seq.lines() - 1;
    let det_matches = iso.elements.iter().all(|e| e.det == GaussRational::from_int(e.omega[last] as i64));
    let subgroup = iso.elements.iter().filter(|e| e.omega[last] == 1).map(|e| e.omega.clone()).collect();
    Ok(SpecialIsotropy { subgroup, full_order: iso.order(), det_matches })
}

/// Random isometry of the form: a product of reflections (symmetric case)
/// or transvections (alternating case) along small integer vectors.
pub fn random_isometry(gram: &Matrix, epsilon: i8, rng: &mut impl Rng, steps: usize) -> Matrix {
    let n = gram.rows();
    let mut acc = Matrix::identity(n);
    let mut done = 0;
    while done < steps && n > 0 {
        let v: Vector = (0..n).map(|_| GaussRational::from_int(rng.gen_range(-2..=2))).collect();
        if v.iter().all(Zero::is_zero) {
            continue;
        }
        // row vector vᵀ·gram, so that (v, x) = row·x
        let row = gram.transpose().mul_vec(&v);
        let outer = Matrix::from_fn(n, n, |i, j| &v[i] * &row[j]);
        let step = if epsilon == 1 {
            let vv = dot(&row, &v);
            if vv.is_zero() {
                continue;
            }
            let c = &GaussRational::from_int(-2) / &vv;
            Matrix::identity(n).add(&outer.scale(&c))
        } else {
            let c = GaussRational::from_int(if rng.gen_bool(0.5) { 1 } else { -1 });
            Matrix::identity(n).add(&outer.scale(&c))
        };
        acc = step.dot_mat(&acc);
        done += 1;
    }
    acc
}

/// Constructed witness moved by a seeded random isometry, with each line
/// rescaled by a random nonzero integer.
pub fn build_randomized(seq: &IsoBlockSeq, seed: u64) -> Result<IsoWitness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = build(seq)?;
    let rho = random_isometry(&w.gram, seq.epsilon, &mut rng, 3);
    let mut moved = w.act(&rho)?;
    for l in &mut moved.lines {
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-3..=3);
        }
        let s = GaussRational::from_int(c);
        for x in l.iter_mut() {
            *x = &*x * &s;
        }
    }
    Ok(moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_seq::{derive_iso, enumerate_iso};

    fn seq(a: &[usize], b: &[usize]) -> IsoBlockSeq {
        derive_iso(a, b).unwrap()
    }

    fn normalized(a: &[usize], b: &[usize]) -> IsoWitness {
        build(&seq(a, b)).unwrap().normalize().unwrap()
    }

    #[test]
    fn empty_witness() {
        let w = build(&seq(&[], &[])).unwrap();
        assert_eq!(w.dim(), 0);
        assert!(w.lines.is_empty());
        assert!(w.validate().passed());
        let n = w.normalize().unwrap();
        assert_eq!(isotropy(&n).unwrap().order(), 1);
    }

    #[test]
    fn small_shapes() {
        let w = build(&seq(&[3], &[])).unwrap();
        assert_eq!((w.dim(), w.lines.len()), (3, 2));
        assert!(w.validate().passed());
        let w = build(&seq(&[1], &[1])).unwrap();
        assert_eq!((w.dim(), w.lines.len()), (2, 1));
        assert!(w.validate().passed());
        let w = build(&seq(&[1], &[])).unwrap();
        let n = w.normalize().unwrap();
        let z = &n.normalized.as_ref().unwrap()[0];
        assert_eq!(n.gram.form(z, z), GaussRational::from_int(2));
    }

    #[test]
    fn roles() {
        let s = seq(&[3], &[]);
        assert_eq!(line_role(&s, 1), LineRole::PairFirst { p: 1, q: 0, delta: 1 });
        assert_eq!(line_role(&s, 2), LineRole::PairSecond { first: 1, p: 0, delta: 1 });
        let s = seq(&[5, 3, 1], &[]);
        assert_eq!(line_role(&s, 3), LineRole::Kappa { delta: 1 });
        let s = seq(&[], &[1]);
        assert_eq!(line_role(&s, 1), LineRole::Kappa { delta: -1 });
        let s = seq(&[2], &[2]);
        assert_eq!(line_role(&s, 1), LineRole::Single);
    }

    #[test]
    fn kappa_line_tables() {
        // lone one-dimensional block: (z_i, z_j) = 2δ^{i−j}
        for (a, b, delta) in [(vec![5, 3, 1], vec![], 1i64), (vec![], vec![5, 3, 1], -1)] {
            let w = normalized(&a, &b);
            let z = w.normalized.as_ref().unwrap();
            let t = pairing_table_of(&w, &z[2], &z[2], -3..=3);
            for (k, d) in (-3..=3).enumerate() {
                let want = if d % 2 == 0 { 2 } else { 2 * delta };
                assert_eq!(t[k], GaussRational::from_int(want));
            }
        }
        // one-dimensional block glued to an odd block: anchor 2 at offset 0
        // but not constant
        let w = normalized(&[3], &[]);
        let z = w.normalized.as_ref().unwrap();
        let t = pairing_table_of(&w, &z[1], &z[1], -1..=1);
        assert_eq!(t[1], GaussRational::from_int(2));
        assert_ne!(t[0], GaussRational::from_int(2));
    }

    fn pairing_table_of(w: &IsoWitness, x: &[GaussRational], y: &[GaussRational], r: RangeInclusive<i64>) -> Vec<GaussRational> {
        crate::profile::pairing_table(&w.gram, &w.g, x, y, r).unwrap().values
    }

    #[test]
    fn b_only_tables_are_twisted_a_tables() {
        let wa = normalized(&[5, 3], &[]);
        let wb = normalized(&[], &[5, 3]);
        let za = wa.normalized.as_ref().unwrap();
        let zb = wb.normalized.as_ref().unwrap();
        for (t, r) in [(0, 0), (0, 1), (1, 1)] {
            let ta = pairing_table_of(&wa, &za[t], &za[r], -6..=6);
            let tb = pairing_table_of(&wb, &zb[t], &zb[r], -6..=6);
            for (k, d) in (-6i64..=6).enumerate() {
                let s = GaussRational::from_int(if d % 2 == 0 { 1 } else { -1 });
                assert_eq!(tb[k], &ta[k] * &s);
            }
        }
    }

    #[test]
    fn mixed_block_table() {
        let w = normalized(&[1], &[1]);
        let z = &w.normalized.as_ref().unwrap()[0];
        let x = mixed_table(1, 1, 6).unwrap().x_seq;
        let t = pairing_table_of(&w, z, z, -5..=5);
        // j − i = 1 + s  ⟹  d = −1 − s
        for s in 0..4i64 {
            assert_eq!(t[(5 - 1 - s) as usize], gr(x[s as usize].clone()));
        }
        assert!(t[5].is_zero());
    }

    #[test]
    fn degenerate_and_swapped_lines_fail() {
        let w = build(&seq(&[5, 3], &[])).unwrap();
        let mut bad = w.clone();
        bad.lines[0] = vec![GaussRational::zero(); w.dim()];
        assert!(!bad.validate().passed());
        let mut swapped = w.clone();
        swapped.lines.swap(0, 1);
        let rep = swapped.validate();
        assert!(rep.failures().any(|e| e.condition == "cross_zero" || e.condition == "self_zero"));
        let w = build(&seq(&[4, 2], &[])).unwrap();
        let mut swapped = w.clone();
        swapped.lines.swap(0, 1);
        assert!(!swapped.validate().passed());
    }

    #[test]
    fn sweep_small_dimensions() {
        for n in 0..=8 {
            for s in enumerate_iso(n) {
                let w = build(&s).unwrap();
                let rep = w.validate();
                assert!(rep.passed(), "{:?}/{:?}: {:?}", s.a, s.b, rep.failures().collect::<Vec<_>>());
                w.normalize().unwrap_or_else(|e| panic!("{:?}/{:?}: {e}", s.a, s.b));
            }
        }
    }

    #[test]
    fn transport_round_trip() {
        for (a, b) in [(vec![3, 1], vec![]), (vec![1], vec![1]), (vec![2], vec![]), (vec![3], vec![1]), (vec![], vec![3])] {
            let s = seq(&a, &b);
            let w = build(&s).unwrap().normalize().unwrap();
            assert!(transport(&w, &w).unwrap().is_identity());
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let rho = random_isometry(&w.gram, s.epsilon, &mut rng, 3);
            let moved = w.act(&rho).unwrap();
            assert_eq!(transport(&w, &moved).unwrap(), rho);
            let other = build_randomized(&s, 11).unwrap().normalize().unwrap();
            let gamma = transport(&w, &other).unwrap();
            let image = w.act(&gamma).unwrap();
            assert_eq!(image.g, other.g);
        }
    }

    #[test]
    fn isotropy_orders() {
        let iso = isotropy(&normalized(&[1], &[1])).unwrap();
        assert_eq!(iso.order(), 2);
        assert!(iso.report.passed());
        let iso = isotropy(&normalized(&[3, 1], &[])).unwrap();
        assert_eq!(iso.order(), 2);
        assert_eq!(iso.derived_links, vec![(1, 2)]);
        assert!(iso.report.passed());
    }

    #[test]
    fn negative_det_examples() {
        let nd = negative_det_element(&normalized(&[1], &[1])).unwrap();
        assert_eq!(nd.element.gamma, Matrix::identity(2).neg());
        assert_eq!((nd.det_plus.clone(), nd.det_minus.clone()), (GaussRational::from_int(-1), GaussRational::from_int(-1)));
        let nd = negative_det_element(&normalized(&[3], &[1])).unwrap();
        assert_eq!((nd.det_plus, nd.det_minus), (GaussRational::from_int(-1), GaussRational::from_int(-1)));
        assert!(negative_det_element(&normalized(&[3], &[])).is_err());
    }

    #[test]
    fn special_isotropy_example() {
        let s = special_isotropy(&normalized(&[3], &[])).unwrap();
        assert_eq!(s.full_order, 2);
        assert_eq!(s.subgroup, vec![vec![1, 1]]);
        assert!(s.det_matches);
        assert!(special_isotropy(&normalized(&[1], &[1])).is_err());
    }

    #[test]
    fn component_labels() {
        let s = seq(&[3, 1], &[]);
        let w = normalized(&[3, 1], &[]);
        assert_eq!(isotropic_component(&w).unwrap().label, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r1 = random_isometry(&w.gram, 1, &mut rng, 1);
        assert_eq!(r1.det().unwrap(), GaussRational::from_int(-1));
        assert_eq!(isotropic_component(&w.act(&r1).unwrap()).unwrap().label, 1);
        let r2 = random_isometry(&w.gram, 1, &mut rng, 2);
        assert_eq!(isotropic_component(&w.act(&r2).unwrap()).unwrap().label, 0);
        for e in isotropy(&w).unwrap().elements {
            assert_eq!(isotropic_component(&w.act(&e.gamma).unwrap()).unwrap().label, 0);
        }
        assert!(isotropic_component(&build(&seq(&[3], &[])).unwrap()).is_err());
        let _ = s;
    }

    #[test]
    fn json_round_trip() {
        let w = normalized(&[3], &[1]);
        let back = IsoWitness::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
    }
}
