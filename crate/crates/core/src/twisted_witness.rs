//! Witness configurations `(g, L^1, …, L^σ)` for nondegenerate bilinear
//! forms under twisted conjugation `g ↦ γ⁻ᵀ g γ⁻¹`: construction,
//! validation, normalization, transport, isotropy and the refinement to
//! special linear transformations.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::block_seq::{derive_twisted, SeqInput, TwistedBlockSeq};
use crate::error::{Result, WitError};
use crate::exact_scalar::{dot, jordan_partition, rational_nth_root, GaussRational, Matrix, Vector};
use crate::iso_models::gr;
use crate::report::Report;
use crate::twisted_models::{
    model_paired_even_twisted, model_single_twisted, n_x_coeffs2, phi_value, tw_xi_cross, tw_xi_self, x_prime,
    TwistedModel, TwistedSpace,
};

/// How a line enters the canonical tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwistedRole {
    /// Its own block with `g^{*2}` of type `(a, b)`.
    Single { a: usize, b: usize, p: usize },
    /// First line of a pair of even blocks; `q` is the partner's parameter.
    PairFirst { p: usize, q: usize },
    /// Second line of a pair; `first` is the partner's parameter.
    PairSecond { first: usize, p: usize },
}

/// Role of line `t` (1-based).
pub fn twisted_role(seq: &TwistedBlockSeq, t: usize) -> TwistedRole {
    if seq.a_at(t) > 0 {
        return TwistedRole::Single { a: seq.a_at(t), b: seq.b_at(t), p: seq.p_at(t) };
    }
    if (t - seq.k - 1) % 2 == 0 {
        TwistedRole::PairFirst { p: seq.p_at(t), q: seq.p_at(t + 1) }
    } else {
        TwistedRole::PairSecond { first: seq.p_at(t - 1), p: seq.p_at(t) }
    }
}

/// Offset `i − j` where `(z^t_i, z^{t+1}_j) = 2^{p−q+1}` first becomes nonzero.
pub fn pair_anchor(p: usize, q: usize) -> i64 {
    4 * p as i64 - 2 * q as i64 - 1
}

/// Offsets `d = i − j` on which normalized tables are compared.
pub fn twisted_window(seq: &TwistedBlockSeq) -> RangeInclusive<i64> {
    let r = 4 * seq.p.first().copied().unwrap_or(0) as i64 + 3;
    -r..=r
}

/// Canonical values `(z^t_i, z^r_j)` as functions of `d = i − j`.
pub struct TwistedTables {
    roles: Vec<TwistedRole>,
    single_x: Vec<Option<Vec<BigInt>>>,
}

impl TwistedTables {
    pub fn new(seq: &TwistedBlockSeq) -> Result<Self> {
        let roles: Vec<TwistedRole> = (1..=seq.sigma).map(|t| twisted_role(seq, t)).collect();
        let len = *twisted_window(seq).end() as usize + 2;
        let single_x = roles
            .iter()
            .map(|role| match *role {
                TwistedRole::Single { a, b, .. } => n_x_coeffs2(a, b, len).map(|t| Some(t.x_seq)),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TwistedTables { roles, single_x })
    }

    pub fn role(&self, t: usize) -> TwistedRole {
        self.roles[t - 1]
    }

    /// `(z^t_i, z^r_j)` with `d = i − j` odd, lines 1-based.
    pub fn value(&self, t: usize, r: usize, d: i64) -> BigInt {
        if t == r {
            return match self.role(t) {
                TwistedRole::Single { a, b, p } => match &self.single_x[t - 1] {
                    Some(x) if (d.unsigned_abs() as usize) < 2 * x.len() + 2 * p => x_prime(x, p, d),
                    _ => x_prime(&n_x_coeffs2(a, b, d.unsigned_abs() as usize + 1).expect("valid block").x_seq, p, d),
                },
                TwistedRole::PairFirst { p, .. } => phi_value(p, d),
                TwistedRole::PairSecond { first, p } => tw_xi_self(first, p, d),
            };
        }
        match (self.role(t), self.role(r)) {
            (TwistedRole::PairFirst { p, q }, TwistedRole::PairSecond { .. }) if r == t + 1 => tw_xi_cross(p, q, d),
            (TwistedRole::PairSecond { first, p }, TwistedRole::PairFirst { .. }) if t == r + 1 => {
                tw_xi_cross(first, p, -d)
            }
            _ => BigInt::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedWitness {
    pub seq: TwistedBlockSeq,
    pub space: TwistedSpace,
    pub lines: Vec<Vector>,
    pub normalized: Option<Vec<Vector>>,
}

fn embed(v: &[GaussRational], offset: usize, dim: usize) -> Vector {
    let mut out = vec![GaussRational::zero(); dim];
    out[offset..offset + v.len()].clone_from_slice(v);
    out
}

fn model_blocks(a: &[usize], b: &[usize]) -> Result<Vec<TwistedModel>> {
    let at = |v: &[usize], i: usize| v.get(i).copied().unwrap_or(0);
    let tail = |v: &[usize], k: usize| v.get(k..).unwrap_or(&[]).to_vec();
    let (a1, b1) = (at(a, 0), at(b, 0));
    if a1 == 0 && b1 == 0 {
        return Ok(vec![]);
    }
    if a1 >= 1 {
        let mut out = vec![model_single_twisted(a1, b1)?];
        out.extend(model_blocks(&tail(a, 1), &tail(b, 1))?);
        return Ok(out);
    }
    let mut out = vec![model_paired_even_twisted(b1 / 2, (at(b, 1) + 2) / 2)?];
    out.extend(model_blocks(a, &tail(b, 2))?);
    Ok(out)
}

/// Inductive construction: a single block while `a_1 ≥ 1`, otherwise a
/// pair of even blocks, each followed by the construction for the rest.
pub fn build_twisted(seq: &TwistedBlockSeq) -> Result<TwistedWitness> {
    let blocks = model_blocks(&seq.a, &seq.b)?;
    let g = Matrix::block_diag(&blocks.iter().map(|m| &m.space.g).collect::<Vec<_>>());
    let dim = g.rows();
    if dim != seq.n {
        return Err(WitError::InvalidSequence("block dimensions do not add up".into()));
    }
    let mut lines = Vec::new();
    let mut offset = 0;
    for m in &blocks {
        lines.extend(m.lines.iter().map(|l| embed(l, offset, dim)));
        offset += m.dim();
    }
    if lines.len() != seq.sigma {
        return Err(WitError::InvalidSequence("line count differs from σ".into()));
    }
    Ok(TwistedWitness { seq: seq.clone(), space: TwistedSpace::new(g)?, lines, normalized: None })
}

pub fn build_twisted_from(input: &SeqInput) -> Result<TwistedWitness> {
    build_twisted(&derive_twisted(&input.a, &input.b)?)
}

/// Pairing tables `(x^t_i, x^r_j)` of a family of vectors on one window.
struct TwistedPairings {
    lo: i64,
    /// `S^{(d+1)/2} x^t` for odd `d` in the window, in order.
    orbits: Vec<Vec<Vector>>,
    duals: Vec<Vector>,
}

impl TwistedPairings {
    fn new(space: &TwistedSpace, vs: &[Vector], range: RangeInclusive<i64>) -> Result<Self> {
        let lo = if range.start().is_odd() { *range.start() } else { range.start() + 1 };
        let hi = *range.end();
        let s = space.star_square()?;
        let start = s.pow((lo + 1) / 2)?;
        let orbits = vs
            .iter()
            .map(|v| {
                let mut cur = start.mul_vec(v);
                let mut out = vec![];
                let mut d = lo;
                while d <= hi {
                    out.push(cur.clone());
                    cur = s.mul_vec(&cur);
                    d += 2;
                }
                out
            })
            .collect();
        let duals = vs.iter().map(|v| space.g.mul_vec(v)).collect();
        Ok(TwistedPairings { lo, orbits, duals })
    }

    /// `(x^t_i, x^r_j)` with `d = i − j`, 1-based.
    fn at(&self, t: usize, r: usize, d: i64) -> GaussRational {
        dot(&self.orbits[t - 1][((d - self.lo) / 2) as usize], &self.duals[r - 1])
    }
}

fn chain_basis(space: &TwistedSpace, vs: &[Vector], seq: &TwistedBlockSeq) -> Result<Vec<Vector>> {
    let s = space.star_square()?;
    let mut out = Vec::with_capacity(seq.n);
    for (k, v) in vs.iter().enumerate() {
        let mut cur = v.clone();
        for i in 0..2 * seq.p[k] - 1 {
            if i > 0 {
                cur = s.mul_vec(&cur);
            }
            out.push(cur.clone());
        }
    }
    Ok(out)
}

fn nonzero_partition(v: &[usize]) -> Vec<usize> {
    v.iter().copied().filter(|&x| x > 0).collect()
}

fn odd_range(lo: i64, hi: i64) -> impl Iterator<Item = i64> {
    (lo..=hi).filter(|d| d.is_odd())
}

impl TwistedWitness {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "twisted": true,
            "dim": self.dim(),
            "g": self.space.g,
            "dual_pairing": self.space.dual_pairing(),
            "lines": self.lines,
            "seq": {"a": self.seq.a, "b": self.seq.b},
            "normalized": self.normalized,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| WitError::Parse(format!("missing field {k}")));
        let seq_in: SeqInput =
            serde_json::from_value(field("seq")?.clone()).map_err(|e| WitError::Parse(e.to_string()))?;
        let seq = derive_twisted(&seq_in.a, &seq_in.b)?;
        let g = Matrix::from_json(field("g")?)?;
        let n = g.rows();
        if let Some(dp) = v.get("dual_pairing") {
            if !Matrix::from_json(dp)?.is_identity() || Matrix::from_json(dp)?.rows() != n {
                return Err(WitError::Unsupported("only the coordinate dual pairing is supported".into()));
            }
        }
        let vectors = |x: &serde_json::Value| -> Result<Vec<Vector>> {
            serde_json::from_value(x.clone()).map_err(|e| WitError::Parse(e.to_string()))
        };
        let lines = vectors(field("lines")?)?;
        let normalized = match v.get("normalized") {
            None | Some(serde_json::Value::Null) => None,
            Some(x) => Some(vectors(x)?),
        };
        if lines.iter().chain(normalized.iter().flatten()).any(|l| l.len() != n) {
            return Err(WitError::DimensionMismatch("line vector length".into()));
        }
        Ok(TwistedWitness { seq, space: TwistedSpace::new(g)?, lines, normalized })
    }

    pub fn normalized_vectors(&self) -> Result<&[Vector]> {
        self.normalized.as_deref().ok_or_else(|| WitError::Precondition("witness is not normalized".into()))
    }

    /// Checks every axiom; violated pairings are listed with indices
    /// `[t, r, i, j]` for `(L^t_i, L^r_j)`.
    pub fn validate(&self) -> Report {
        let mut rep = Report::new();
        let seq = &self.seq;
        let n = self.dim();
        if n != seq.n {
            rep.fail("shape", vec![n as i64, seq.n as i64]);
            return rep;
        }
        let s = match self.space.star_square() {
            Ok(s) => s,
            Err(_) => {
                rep.fail("form_nondegenerate", vec![]);
                return rep;
            }
        };
        rep.pass("form_nondegenerate");
        let one = GaussRational::one();
        let plus = jordan_partition(&s, &one).unwrap_or_default();
        let minus = jordan_partition(&s, &-one).unwrap_or_default();
        rep.check("jordan_plus", plus == nonzero_partition(&seq.a));
        rep.check("jordan_minus", minus == nonzero_partition(&seq.b));
        let total = seq.sigma;
        rep.check("line_count", self.lines.len() == total);
        if self.lines.len() != total || self.lines.iter().any(|l| l.len() != n) {
            return rep;
        }
        let zero_lines: Vec<Vec<i64>> =
            (1..=total).filter(|&t| self.lines[t - 1].iter().all(Zero::is_zero)).map(|t| vec![t as i64]).collect();
        rep.group("line_nonzero", zero_lines);
        let reach = seq.p.iter().map(|&p| 4 * p as i64).max().unwrap_or(0) + 1;
        let tab = match TwistedPairings::new(&self.space, &self.lines, -reach..=reach) {
            Ok(t) => t,
            Err(_) => {
                rep.fail("form_nondegenerate", vec![]);
                return rep;
            }
        };
        let p = |t: usize| seq.p_at(t) as i64;
        let loc = |t: usize, r: usize, d: i64| vec![t as i64, r as i64, d + 1, 1];
        let (mut zero_fail, mut nz_fail, mut cross_fail) = (vec![], vec![], vec![]);
        for t in 1..=total {
            for d in odd_range(-2 * p(t) + 3, 2 * p(t) - 3) {
                if !tab.at(t, t, d).is_zero() {
                    zero_fail.push(loc(t, t, d));
                }
            }
            for d in [-(2 * p(t) - 1), 2 * p(t) - 1] {
                if tab.at(t, t, d).is_zero() {
                    nz_fail.push(loc(t, t, d));
                }
            }
            for r in t + 1..=total {
                // (L^r_i, L^t_j) = 0 for j − i ∈ [1−2p_r, 4p_t−2p_r−3]
                for d in odd_range(-(4 * p(t) - 2 * p(r) - 3), 2 * p(r) - 1) {
                    if !tab.at(r, t, d).is_zero() {
                        cross_fail.push(loc(r, t, d));
                    }
                }
            }
        }
        rep.group("self_zero", zero_fail);
        rep.group("self_nonzero", nz_fail);
        rep.group("cross_zero", cross_fail);
        let ok = chain_basis(&self.space, &self.lines, seq)
            .map(|b| b.len() == n && Matrix::from_columns(n, &b).rank() == n)
            .unwrap_or(false);
        rep.check("direct_sum", ok);
        rep
    }

    /// Rescales each line to the vector `z^t` reproducing the canonical
    /// tables and verifies them on the whole window.
    pub fn normalize(&self) -> Result<TwistedWitness> {
        let rep = self.validate();
        if !rep.passed() {
            let first = rep.failures().next().map(|e| e.condition.clone()).unwrap_or_default();
            return Err(WitError::Precondition(format!("witness fails validation ({first})")));
        }
        let seq = &self.seq;
        let exp = TwistedTables::new(seq)?;
        let window = twisted_window(seq);
        let raw = TwistedPairings::new(&self.space, &self.lines, window.clone())?;
        let mut z: Vec<Vector> = Vec::with_capacity(seq.sigma);
        for t in 1..=seq.sigma {
            let line = &self.lines[t - 1];
            let scale = match exp.role(t) {
                TwistedRole::PairSecond { first, p } => {
                    let d = pair_anchor(first, p);
                    let pair = TwistedPairings::new(&self.space, &[z[t - 2].clone(), line.clone()], d..=d)?;
                    let got = pair.at(1, 2, d);
                    if got.is_zero() {
                        return Err(WitError::Normalization(format!("line {t}: cross anchor vanishes")));
                    }
                    &gr(exp.value(t - 1, t, d)) / &got
                }
                _ => {
                    let d = -(2 * seq.p_at(t) as i64 - 1);
                    let ratio = &gr(exp.value(t, t, d)) / &raw.at(t, t, d);
                    ratio.sqrt().ok_or_else(|| {
                        WitError::Normalization(format!("line {t}: scale {ratio} has no square root in Q(i)"))
                    })?
                }
            };
            z.push(line.iter().map(|c| c * &scale).collect());
        }
        let tab = TwistedPairings::new(&self.space, &z, window.clone())?;
        for t in 1..=seq.sigma {
            for r in 1..=seq.sigma {
                for d in odd_range(*window.start(), *window.end()) {
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
        Ok(TwistedWitness { normalized: Some(z), ..self.clone() })
    }

    /// Basis `g^{*2k} z^t`, `k ∈ [0, 2p_t − 2]`, as matrix columns.
    pub fn chain_matrix(&self) -> Result<Matrix> {
        let z = self.normalized_vectors()?;
        Ok(Matrix::from_columns(self.dim(), &chain_basis(&self.space, z, &self.seq)?))
    }

    /// Image under `γ ∈ GL(V)`: `(γ⁻ᵀ g γ⁻¹, γL^t, γz^t)`.
    pub fn act(&self, gamma: &Matrix) -> Result<TwistedWitness> {
        let map = |vs: &[Vector]| vs.iter().map(|v| gamma.mul_vec(v)).collect::<Vec<_>>();
        Ok(TwistedWitness {
            seq: self.seq.clone(),
            space: self.space.conjugate(gamma)?,
            lines: map(&self.lines),
            normalized: self.normalized.as_deref().map(map),
        })
    }
}

/// `γᵀ M′ γ = M`, i.e. `γ̌ g γ⁻¹ = g′`.
fn conjugates(gamma: &Matrix, from: &TwistedSpace, to: &TwistedSpace) -> bool {
    gamma.transpose().dot_mat(&to.g).dot_mat(gamma) == from.g
}

/// The element of `GL(V)` carrying one normalized configuration to another:
/// `γ(g^{*i} z^t) = g′^{*i} z′^t` for even `i`.
pub fn transport_twisted(w1: &TwistedWitness, w2: &TwistedWitness) -> Result<Matrix> {
    if w1.seq.a != w2.seq.a || w1.seq.b != w2.seq.b {
        return Err(WitError::Precondition("block sequences differ".into()));
    }
    let b1 = w1.chain_matrix()?;
    let b2 = w2.chain_matrix()?;
    let gamma = b2.dot_mat(&b1.inverse()?);
    if !conjugates(&gamma, &w1.space, &w2.space) {
        return Err(WitError::Normalization("transport does not carry the form".into()));
    }
    for (l1, l2) in w1.lines.iter().zip(&w2.lines) {
        let img = gamma.mul_vec(l1);
        if Matrix::from_columns(w1.dim(), &[img, l2.clone()]).rank() != 1 {
            return Err(WitError::Normalization("transport does not carry the lines".into()));
        }
    }
    Ok(gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwistedIsotropyElement {
    pub omega: Vec<i8>,
    pub gamma: Matrix,
    pub det: GaussRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwistedIsotropy {
    pub elements: Vec<TwistedIsotropyElement>,
    pub generators: Vec<TwistedIsotropyElement>,
    /// Line pairs with a nonzero pairing on the window.
    pub derived_links: Vec<(usize, usize)>,
    pub report: Report,
}

impl TwistedIsotropy {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// The element acting by `ω_t` on the chain of `z^t`.
pub fn twisted_sign_element(w: &TwistedWitness, omega: &[i8]) -> Result<TwistedIsotropyElement> {
    if !w.seq.sign_group.contains(omega) {
        return Err(WitError::Precondition("sign vector is not in the sign group".into()));
    }
    let b = w.chain_matrix()?;
    let mut diag = Matrix::zeros(w.dim(), w.dim());
    let mut k = 0;
    for (t, &s) in omega.iter().enumerate() {
        for _ in 0..2 * w.seq.p[t] - 1 {
            diag[(k, k)] = GaussRational::from_int(s as i64);
            k += 1;
        }
    }
    let gamma = b.dot_mat(&diag).dot_mat(&b.inverse()?);
    let det = gamma.det()?;
    Ok(TwistedIsotropyElement { omega: omega.to_vec(), gamma, det })
}

/// All elements fixing the configuration, one per sign-group element, with
/// the link structure rederived from the pairing tables.
pub fn isotropy_twisted(w: &TwistedWitness) -> Result<TwistedIsotropy> {
    let z = w.normalized_vectors()?;
    let seq = &w.seq;
    let shape = &seq.sign_group;
    let elements = shape
        .elements()
        .iter()
        .map(|om| twisted_sign_element(w, om))
        .collect::<Result<Vec<_>>>()?;
    let generators: Vec<TwistedIsotropyElement> = (0..shape.rank()).map(|bit| elements[1usize << bit].clone()).collect();
    let mut rep = Report::new();
    let id = Matrix::identity(w.dim());
    let (mut fix_f, mut line_f, mut inv_f) = (vec![], vec![], vec![]);
    for (k, e) in elements.iter().enumerate() {
        if !conjugates(&e.gamma, &w.space, &w.space) {
            fix_f.push(vec![k as i64]);
        }
        for (t, zt) in z.iter().enumerate() {
            let s = GaussRational::from_int(e.omega[t] as i64);
            if e.gamma.mul_vec(zt) != zt.iter().map(|c| c * &s).collect::<Vector>() {
                line_f.push(vec![k as i64, t as i64 + 1]);
            }
        }
        if e.gamma.dot_mat(&e.gamma) != id {
            inv_f.push(vec![k as i64]);
        }
    }
    rep.group("isotropy_fixes_form", fix_f);
    rep.group("isotropy_scales_lines", line_f);
    rep.group("isotropy_involution", inv_f);
    let window = twisted_window(seq);
    let tab = TwistedPairings::new(&w.space, z, window.clone())?;
    let mut derived_links = vec![];
    for t in 1..=seq.sigma {
        for r in t + 1..=seq.sigma {
            if odd_range(*window.start(), *window.end()).any(|d| !tab.at(t, r, d).is_zero()) {
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
    Ok(TwistedIsotropy { elements, generators, derived_links, report: rep })
}

/// `c` with `c^n = x`, searched among unit multiples of rationals.
fn gauss_nth_root(x: &GaussRational, n: u32) -> Option<GaussRational> {
    let units = [GaussRational::one(), GaussRational::i(), -GaussRational::one(), -GaussRational::i()];
    for u in &units {
        let y = x / &u.pow(n as i64)?;
        if y.is_real() && y.re.is_positive() {
            if let Some(r) = rational_nth_root(&y.re, n) {
                return Some(u * &GaussRational::real(r));
            }
        }
    }
    None
}

/// `∧ⁿg` sends the coordinate volume form `θ` to `det(M)·θ*`.
pub fn top_power_scalar(space: &TwistedSpace) -> Result<GaussRational> {
    space.g.det()
}

#[derive(Clone, Debug, Serialize)]
pub struct SlRefinement {
    /// Number of `SL(V)`-orbits the `GL(V)`-orbit splits into on `Γ¹`.
    pub class_count: u8,
    /// Element of determinant `−1` fixing the configuration (`a_1 > 0`).
    pub gamma0: Option<Matrix>,
    pub star_square_det: GaussRational,
    pub form_det: GaussRational,
    /// `c` with `det(c·M) = 1`, when one exists in `Q(i)`.
    pub gamma_one_scale: Option<GaussRational>,
    pub report: Report,
}

pub fn sl_refinement(w: &TwistedWitness) -> Result<SlRefinement> {
    let n = w.dim();
    if n == 0 {
        return Err(WitError::Precondition("needs n ≥ 1".into()));
    }
    let mut rep = Report::new();
    let star_square_det = w.space.star_square()?.det()?;
    rep.check("star_square_det_one", star_square_det.is_one());
    let form_det = top_power_scalar(&w.space)?;
    let gamma_one_scale = form_det.inv().and_then(|x| gauss_nth_root(&x, n as u32));
    if let Some(c) = &gamma_one_scale {
        rep.check("gamma_one_volume", w.space.g.scale(c).det()?.is_one());
    }
    let (class_count, gamma0) = if w.seq.a_at(1) > 0 {
        let mut omega = vec![1i8; w.seq.sigma];
        omega[0] = -1;
        let e = twisted_sign_element(w, &omega)?;
        rep.check("gamma0_det_minus_one", e.det == -GaussRational::one());
        rep.check("gamma0_fixes_form", conjugates(&e.gamma, &w.space, &w.space));
        (1, Some(e.gamma))
    } else {
        (2, None)
    };
    Ok(SlRefinement { class_count, gamma0, star_square_det, form_det, gamma_one_scale, report: rep })
}

/// The same configuration with `g` rescaled into `Γ¹`, if the scale exists
/// in `Q(i)`. The normalized vectors are dropped.
pub fn rescale_to_gamma_one(w: &TwistedWitness) -> Result<Option<TwistedWitness>> {
    let det = top_power_scalar(&w.space)?;
    let Some(c) = det.inv().and_then(|x| gauss_nth_root(&x, w.dim() as u32)) else {
        return Ok(None);
    };
    Ok(Some(TwistedWitness {
        seq: w.seq.clone(),
        space: TwistedSpace::new(w.space.g.scale(&c))?,
        lines: w.lines.clone(),
        normalized: None,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlClassLabel {
    /// 0 when the transport from the reference has determinant `1`, else 1.
    pub label: u8,
    pub det: GaussRational,
}

/// Labels the `SL(V)`-class of a normalized configuration by the
/// determinant of the transport from the normalized constructed one.
pub fn sl_class_label(w: &TwistedWitness) -> Result<SlClassLabel> {
    let reference = build_twisted(&w.seq)?.normalize()?;
    let gamma = transport_twisted(&reference, w)?;
    let det = gamma.det()?;
    let label = if det.is_one() {
        0
    } else if det == -GaussRational::one() {
        1
    } else {
        return Err(WitError::Precondition(format!("transport has determinant {det}, not ±1")));
    };
    Ok(SlClassLabel { label, det })
}

/// Random element of `GL_n(Z)` with determinant `±1`: a product of integer
/// transvections, optionally followed by a coordinate sign change.
pub fn random_unimodular(n: usize, rng: &mut impl Rng, steps: usize) -> Matrix {
    let mut acc = Matrix::identity(n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            acc = acc.neg();
        }
        return acc;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-2..=2);
        }
        let mut step = Matrix::identity(n);
        step[(i, j)] = GaussRational::from_int(c);
        acc = step.dot_mat(&acc);
    }
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(0..n);
        let mut flip = Matrix::identity(n);
        flip[(k, k)] = -GaussRational::one();
        acc = flip.dot_mat(&acc);
    }
    acc
}

/// Constructed witness moved by a seeded random unimodular `ρ`, with each
/// line rescaled by a random nonzero integer. Returns `ρ` as well.
pub fn build_twisted_randomized_with(seq: &TwistedBlockSeq, seed: u64) -> Result<(TwistedWitness, Matrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = build_twisted(seq)?;
    let rho = random_unimodular(w.dim(), &mut rng, 2 * w.dim());
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
    Ok((moved, rho))
}

pub fn build_twisted_randomized(seq: &TwistedBlockSeq, seed: u64) -> Result<TwistedWitness> {
    build_twisted_randomized_with(seq, seed).map(|(w, _)| w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_seq::enumerate_twisted;
    use crate::exact_scalar::Rational;

    fn seq(a: &[usize], b: &[usize]) -> TwistedBlockSeq {
        derive_twisted(a, b).unwrap()
    }

    fn normalized(a: &[usize], b: &[usize]) -> TwistedWitness {
        build_twisted(&seq(a, b)).unwrap().normalize().unwrap()
    }

    #[test]
    fn empty_witness() {
        let w = build_twisted(&seq(&[], &[])).unwrap();
        assert_eq!(w.dim(), 0);
        assert!(w.validate().passed());
        let w = w.normalize().unwrap();
        assert_eq!(isotropy_twisted(&w).unwrap().order(), 1);
        assert!(sl_refinement(&w).is_err());
    }

    #[test]
    fn small_shapes() {
        assert_eq!(build_twisted(&seq(&[1], &[])).unwrap().dim(), 1);
        let w = build_twisted(&seq(&[], &[4, 2])).unwrap();
        assert_eq!(w.dim(), 6);
        assert_eq!(w.lines.len(), 2);
        assert!(w.validate().passed());
        let w = build_twisted(&seq(&[3, 1], &[2])).unwrap();
        assert_eq!(w.dim(), 6);
        assert!(w.validate().passed());
    }

    #[test]
    fn roles() {
        let s = seq(&[3], &[6, 4, 2]);
        assert_eq!(s.sigma, 3);
        assert_eq!(twisted_role(&s, 1), TwistedRole::Single { a: 3, b: 6, p: 5 });
        assert_eq!(twisted_role(&s, 2), TwistedRole::PairFirst { p: 2, q: 2 });
        assert_eq!(twisted_role(&s, 3), TwistedRole::PairSecond { first: 2, p: 2 });
    }

    #[test]
    fn single_line_table() {
        let w = normalized(&[1], &[]);
        let tab = TwistedPairings::new(&w.space, w.normalized_vectors().unwrap(), -5..=5).unwrap();
        for d in odd_range(-5, 5) {
            assert_eq!(tab.at(1, 1, d), GaussRational::one());
        }
    }

    #[test]
    fn paired_anchor_value() {
        // (p_t, p_{t+1}) = (2, 2): cross value at the anchor is ±2
        let s = seq(&[], &[4, 2]);
        assert_eq!(s.p, vec![2, 2]);
        let exp = TwistedTables::new(&s).unwrap();
        let d = pair_anchor(2, 2);
        assert_eq!(exp.value(1, 2, d), BigInt::from(2));
        assert!(exp.value(1, 2, d - 2).is_zero());
        let w = normalized(&[], &[4, 2]);
        let tab = TwistedPairings::new(&w.space, w.normalized_vectors().unwrap(), d..=d).unwrap();
        assert_eq!(tab.at(1, 2, d), gr(exp.value(1, 2, d)));
    }

    #[test]
    fn zero_cross_between_pairs() {
        let s = seq(&[], &[8, 6, 4, 2]);
        let exp = TwistedTables::new(&s).unwrap();
        for (t, r) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
            assert!(odd_range(-20, 20).all(|d| exp.value(t, r, d).is_zero()));
        }
        let w = normalized(&[], &[8, 6, 4, 2]);
        assert_eq!(w.lines.len(), 4);
    }

    #[test]
    fn perturbed_lines_fail() {
        let mut w = build_twisted(&seq(&[3], &[])).unwrap();
        w.lines[0] = vec![GaussRational::one(), GaussRational::one(), GaussRational::zero()];
        let rep = w.validate();
        assert!(!rep.passed());
        let bad: Vec<_> = rep.failures().filter(|e| e.condition == "self_zero").collect();
        assert_eq!(bad[0].indices, vec![1, 1, 0, 1]);
        let mut w = build_twisted(&seq(&[], &[4, 2])).unwrap();
        w.lines.swap(0, 1);
        assert!(!w.validate().passed());
        let mut w = build_twisted(&seq(&[1], &[])).unwrap();
        w.lines[0] = vec![GaussRational::zero()];
        let rep = w.validate();
        assert!(rep.failures().any(|e| e.condition == "line_nonzero"));
    }

    #[test]
    fn sweep_small_dimensions() {
        for n in 0..=9 {
            for s in enumerate_twisted(n) {
                let w = build_twisted(&s).unwrap();
                let rep = w.validate();
                assert!(rep.passed(), "{:?} {:?}: {:?}", s.a, s.b, rep.failures().collect::<Vec<_>>());
                w.normalize().unwrap();
            }
        }
    }

    #[test]
    fn transport_round_trip() {
        let w = normalized(&[3, 1], &[2]);
        assert!(transport_twisted(&w, &w).unwrap().is_identity());
        for (a, b) in [(&[1][..], &[][..]), (&[3, 1], &[2]), (&[], &[4, 2]), (&[1], &[4])] {
            let s = seq(a, b);
            let w = build_twisted(&s).unwrap().normalize().unwrap();
            let (moved, rho) = build_twisted_randomized_with(&s, 7).unwrap();
            let moved = moved.normalize().unwrap();
            let gamma = transport_twisted(&w, &moved).unwrap();
            assert_eq!(moved.space, w.space.conjugate(&gamma).unwrap());
            // ρ and γ differ by an isotropy element
            let iso = isotropy_twisted(&w).unwrap();
            let delta = rho.inverse().unwrap().dot_mat(&gamma);
            assert!(iso.elements.iter().any(|e| e.gamma == delta));
        }
    }

    #[test]
    fn sign_flip_transport_is_isotropy() {
        let w = normalized(&[], &[4, 2]);
        let mut flipped = w.clone();
        for z in flipped.normalized.as_mut().unwrap() {
            for x in z.iter_mut() {
                *x = -x.clone();
            }
        }
        let gamma = transport_twisted(&w, &flipped).unwrap();
        let e = twisted_sign_element(&w, &[-1, -1]).unwrap();
        assert_eq!(gamma, e.gamma);
    }

    #[test]
    fn isotropy_orders() {
        assert_eq!(isotropy_twisted(&normalized(&[1], &[])).unwrap().order(), 2);
        let iso = isotropy_twisted(&normalized(&[], &[4, 2])).unwrap();
        assert_eq!(iso.order(), 2);
        assert!(iso.elements.iter().all(|e| e.omega[0] == e.omega[1]));
        assert!(iso.report.passed());
        let iso = isotropy_twisted(&normalized(&[3, 1], &[2])).unwrap();
        assert_eq!(iso.order(), 4);
        assert!(iso.report.passed());
    }

    #[test]
    fn sl_examples() {
        let r = sl_refinement(&normalized(&[1], &[])).unwrap();
        assert_eq!(r.class_count, 1);
        assert_eq!(r.gamma0, Some(Matrix::identity(1).neg()));
        assert!(r.report.passed());
        let r = sl_refinement(&normalized(&[], &[2])).unwrap();
        assert_eq!(r.class_count, 2);
        assert!(r.gamma0.is_none());
        assert!(r.report.passed());
    }

    #[test]
    fn star_square_det_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut count = 0;
        while count < 20 {
            let n = rng.gen_range(1..=6);
            let m = Matrix::from_fn(n, n, |_, _| GaussRational::from_int(rng.gen_range(-3..=3)));
            let Ok(space) = TwistedSpace::new(m) else { continue };
            assert!(space.star_square().unwrap().det().unwrap().is_one());
            count += 1;
        }
    }

    #[test]
    fn nth_roots() {
        let q = |n: i64, d: i64| GaussRational::real(Rational::new(n.into(), d.into()));
        assert_eq!(gauss_nth_root(&q(8, 27), 3), Some(q(2, 3)));
        assert_eq!(gauss_nth_root(&q(-8, 1), 3).unwrap().pow(3), Some(q(-8, 1)));
        assert_eq!(gauss_nth_root(&q(-4, 1), 2), Some(GaussRational::new(Rational::zero(), Rational::from_integer(2.into()))));
        assert_eq!(gauss_nth_root(&q(2, 1), 2), None);
    }

    #[test]
    fn class_labels() {
        let s = seq(&[], &[2]);
        let w = build_twisted(&s).unwrap().normalize().unwrap();
        assert_eq!(sl_class_label(&w).unwrap().label, 0);
        let flip = Matrix::from_int_rows(&[vec![-1, 0], vec![0, 1]]);
        let moved = w.act(&flip).unwrap().normalize().unwrap();
        let lab = sl_class_label(&moved).unwrap();
        assert_eq!(lab.det, -GaussRational::one());
        assert_eq!(lab.label, 1);
    }

    #[test]
    fn json_round_trip() {
        let w = normalized(&[3, 1], &[2]);
        let j = w.to_json();
        assert_eq!(j["twisted"], true);
        assert_eq!(TwistedWitness::from_json(&j).unwrap(), w);
    }
}
