//! Property suites behind `selftest`. Each suite returns case and failure
//! counts plus a few failing examples; reports carry no timings, so equal
//! options give byte-identical output.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::block_seq::{enumerate_iso, enumerate_twisted, TwistedBlockSeq};
use crate::exact_scalar::{jordan_partition, GaussRational, Rational};
use crate::iso_models::uniqueness::{odd_cbar, reconstruct_odd_block, reconstruct_paired};
use crate::iso_models::{
    default_range, f_piecewise, f_value, model_mixed_block, model_odd_block, model_paired_odd_blocks, odd_n, odd_x,
    odd_x_series, pairing_profile, tilde_cross, tilde_self, xi_cross, xi_self,
};
use crate::profile::{pairing_table, Profile};
use crate::iso_witness::{
    build, build_randomized, isotropic_component, isotropy, negative_det_element, special_isotropy, transport,
};
use crate::twisted_models::uniqueness as tw_uniq;
use crate::twisted_models::{
    even_n, even_x, even_x_closed, model_even_twisted, model_paired_even_twisted, model_single_twisted, n_x_coeffs2,
    phi_piecewise, phi_value, single_identity, tw_tilde_cross, tw_tilde_self, tw_xi_cross, tw_xi_self, twisted_table,
    x_prime,
};
use crate::twisted_witness::{
    build_twisted, build_twisted_randomized_with, isotropy_twisted, sl_class_label, sl_refinement, transport_twisted,
};
use crate::weyl::{build_weyl, enumerate_classes, verify_table, RowStatus, TableOptions, WeylType};

/// Failing examples kept per suite.
const MAX_EXAMPLES: usize = 8;
/// Random instances drawn for the special-linear checks.
const SL_INSTANCES: u64 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    IsoFormulas,
    IsoModels,
    IsoPipeline,
    TwistedFormulas,
    TwistedModels,
    TwistedPipeline,
    WeylTables,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::IsoFormulas,
        Suite::IsoModels,
        Suite::IsoPipeline,
        Suite::TwistedFormulas,
        Suite::TwistedModels,
        Suite::TwistedPipeline,
        Suite::WeylTables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::IsoFormulas => "iso_formulas",
            Suite::IsoModels => "iso_models",
            Suite::IsoPipeline => "iso_pipeline",
            Suite::TwistedFormulas => "twisted_formulas",
            Suite::TwistedModels => "twisted_models",
            Suite::TwistedPipeline => "twisted_pipeline",
            Suite::WeylTables => "weyl_tables",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Largest space dimension for the witness pipelines.
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { max_dim: 10, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub examples: Vec<String>,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    cases: u64,
    failures: u64,
    examples: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, examples: vec![] }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < MAX_EXAMPLES {
                self.examples.push(what());
            }
        }
    }

    fn eq<T: PartialEq + Debug>(&mut self, got: T, want: T, what: impl FnOnce() -> String) {
        let ok = got == want;
        self.check(ok, || format!("{}: got {got:?}, want {want:?}", what()));
    }

    /// Unwraps a fallible step, counting an error as a failed case.
    fn ok<T, E: std::fmt::Display>(&mut self, r: std::result::Result<T, E>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.into(),
            cases: self.cases,
            failures: self.failures,
            examples: self.examples,
            passed: self.failures == 0,
        }
    }
}

fn gi(n: BigInt) -> GaussRational {
    GaussRational::from_bigint(n)
}

fn pow2(e: i64) -> BigInt {
    BigInt::one() << e as usize
}

fn pow2_rat(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(pow2(e))
    } else {
        Rational::new(BigInt::one(), pow2(-e))
    }
}

fn sign(e: i64) -> BigInt {
    if e.is_even() {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

fn in_2z(x: &GaussRational) -> bool {
    x.to_bigint().is_some_and(|v| v.is_even())
}

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        BigInt::zero()
    } else {
        num_integer::binomial(BigInt::from(n), BigInt::from(k))
    }
}

fn unit(n: usize, i: usize) -> Vec<GaussRational> {
    let mut v = vec![GaussRational::zero(); n];
    v[i] = GaussRational::one();
    v
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> SuiteResult {
    let mut t = Tally::new(suite.name());
    match suite {
        Suite::IsoFormulas => iso_formulas(&mut t),
        Suite::IsoModels => iso_models(&mut t),
        Suite::IsoPipeline => iso_pipeline(&mut t, opts),
        Suite::TwistedFormulas => twisted_formulas(&mut t),
        Suite::TwistedModels => twisted_models(&mut t),
        Suite::TwistedPipeline => twisted_pipeline(&mut t, opts),
        Suite::WeylTables => weyl_tables(&mut t, opts),
    }
    t.finish()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestReport {
    pub max_dim: usize,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "v1",
            "max_dim": self.max_dim,
            "seed": self.seed,
            "suites": self.suites,
            "passed": self.passed(),
        })
    }
}

pub fn selftest(opts: &SuiteOptions) -> SelftestReport {
    SelftestReport {
        max_dim: opts.max_dim,
        seed: opts.seed,
        suites: Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect(),
    }
}

fn iso_formulas(t: &mut Tally) {
    for p in 0..=12usize {
        let n = odd_n(p);
        let x: Vec<BigInt> = (0..=40).map(|e| odd_x(p, e)).collect();
        if p > 0 {
            for u in 2..=40usize {
                let s: BigInt = (0..=u.min(n.len() - 1)).map(|j| &n[j] * &x[u - j]).sum();
                t.eq(s, BigInt::zero(), || format!("odd recurrence p={p} u={u}"));
            }
            t.eq(f_value(p, p as i64), BigInt::one(), || format!("f_p(p) p={p}"));
        }
        t.eq(x[1].clone(), BigInt::from(2 * p + 2), || format!("x_1 p={p}"));
        t.check(x.iter().all(|v| v.sign() == num_bigint::Sign::Plus), || format!("x_e positive p={p}"));
        for u in -40..=40i64 {
            t.eq(f_value(p, u), f_piecewise(p, u), || format!("product formula p={p} u={u}"));
            if p == 0 {
                t.eq(f_value(0, u), BigInt::from(2), || format!("f_0({u})"));
            }
        }
        if p > 0 {
            let series = odd_x_series(p, 41);
            t.eq(&series[..], &x[..], || format!("generating function p={p}"));
        }
    }
}

fn iso_models(t: &mut Tally) {
    let one = GaussRational::one();
    let minus_one = -GaussRational::one();
    for dim in (2..=16usize).step_by(2) {
        for a in 0..=dim {
            let b = dim - a;
            let Some(m) = t.ok(model_mixed_block(a, b), || format!("mixed ({a},{b})")) else { continue };
            t.check(m.preserves_form(), || format!("mixed ({a},{b}) isometry"));
            t.check(m.is_eps_symmetric(), || format!("mixed ({a},{b}) ε-symmetry"));
            let det = m.gram.det().ok();
            t.check(det == Some(one.clone()) || det == Some(minus_one.clone()), || format!("mixed ({a},{b}) det"));
            let want = |k: usize| if k > 0 { vec![k] } else { vec![] };
            t.eq(jordan_partition(&m.g, &one).ok(), Some(want(a)), || format!("mixed ({a},{b}) Jordan at 1"));
            t.eq(jordan_partition(&m.g, &minus_one).ok(), Some(want(b)), || format!("mixed ({a},{b}) Jordan at −1"));
        }
    }

    for p in 0..=6usize {
        let pi = p as i64;
        let Some(m) = t.ok(model_odd_block(p), || format!("odd block p={p}")) else { continue };
        let range = default_range(p);
        let tilde = &m.tilde[0];
        let n = m.dim;
        t.check(m.preserves_form(), || format!("odd p={p} isometry"));
        t.eq(jordan_partition(&m.g, &one).ok(), Some(vec![n]), || format!("odd p={p} single block"));
        let Some(cross) = t.ok(pairing_table(&m.gram, &m.g, &unit(n, 0), tilde, range.clone()), || format!("odd p={p} cross"))
        else {
            continue;
        };
        for i in 0..2 * pi {
            t.check(cross.at(i).is_zero(), || format!("odd p={p} (w_{i}, w̃) = 0"));
        }
        t.eq(m.gram.form(tilde, tilde), GaussRational::from_int(2), || format!("odd p={p} (w̃, w̃)"));
        let c_star = tilde[n - 1].clone();
        t.eq(cross.at(2 * pi) * &c_star, GaussRational::from_int(2), || format!("odd p={p} (w_2p, w̃) c_*"));
        t.eq(&c_star * &c_star, GaussRational::real(pow2_rat(-2 * pi)), || format!("odd p={p} c_*²"));
        t.eq(c_star.clone(), GaussRational::real(pow2_rat(-pi)), || format!("odd p={p} c_*"));
        let cbar: Vec<GaussRational> = tilde.iter().map(|c| c / &c_star).collect();
        let want: Vec<GaussRational> = odd_cbar(p).into_iter().map(gi).collect();
        t.eq(cbar, want, || format!("odd p={p} c̄"));
        for h in range.clone() {
            let v = cross.at(h);
            t.eq(v.clone(), gi(tilde_cross(p, h)), || format!("odd p={p} (w_{h}, w̃)"));
            t.check(in_2z(v), || format!("odd p={p} (w_{h}, w̃) ∈ 2Z"));
        }
        let lines = m.lines.len();
        let Some(selfp) = t.ok(pairing_profile(&m, lines, lines, range.clone()), || format!("odd p={p} self")) else {
            continue;
        };
        for h in range.clone() {
            let v = selfp.at(-h);
            t.eq(v.clone(), gi(tilde_self(p, h)), || format!("odd p={p} (w̃_0, w̃_{h})"));
            t.check(in_2z(v), || format!("odd p={p} (w̃_0, w̃_{h}) ∈ 2Z"));
            if (0..=pi).contains(&h) {
                t.eq(v.clone(), gi(BigInt::from(2) * sign(h)), || format!("odd p={p} (w̃_0, w̃_{h}) small"));
            }
        }
        let top = BigInt::from(2) * sign(pi + 1) + sign(pi) * pow2(2 * pi + 2);
        t.eq(selfp.at(-(pi + 1)).clone(), gi(top), || format!("odd p={p} (w̃_0, w̃_p+1)"));
        if let Some(rec) = t.ok(reconstruct_odd_block(p, range.clone()), || format!("odd p={p} reconstruction")) {
            t.eq(rec.c_star.clone(), pow2_rat(-pi), || format!("odd p={p} rebuilt c_*"));
            t.eq(rec.tilde.differences(&selfp), vec![], || format!("odd p={p} rebuilt (w̃, w̃)"));
            t.eq(rec.cross.differences(&cross), vec![], || format!("odd p={p} rebuilt (w, w̃)"));
        }
    }

    for p1 in 1..=7usize {
        for p2 in 1..=p1.min(8 - p1) {
            paired_odd(t, p1, p2);
        }
    }
}

fn paired_odd(t: &mut Tally, p1: usize, p2: usize) {
    let (a, b) = (p1 as i64, p2 as i64);
    let Some(m) = t.ok(model_paired_odd_blocks(p1, p2), || format!("paired ({p1},{p2})")) else { return };
    t.check(m.preserves_form(), || format!("paired ({p1},{p2}) isometry"));
    let range = default_range(p1);
    let (Some(cross), Some(selfp)) = (
        t.ok(pairing_profile(&m, 1, 2, range.clone()), || format!("paired ({p1},{p2}) cross")),
        t.ok(pairing_profile(&m, 2, 2, range.clone()), || format!("paired ({p1},{p2}) self")),
    ) else {
        return;
    };
    for h in range.clone() {
        let v = cross.at(h);
        t.eq(v.clone(), gi(xi_cross(p1, p2, h)), || format!("paired ({p1},{p2}) (z_{h}, ξ)"));
        t.check(in_2z(v), || format!("paired ({p1},{p2}) (z_{h}, ξ) ∈ 2Z"));
        if (-b..=2 * a - b - 1).contains(&h) {
            t.check(v.is_zero(), || format!("paired ({p1},{p2}) (z_{h}, ξ) = 0"));
        }
        let s = selfp.at(-h);
        t.eq(s.clone(), gi(xi_self(p1, p2, h)), || format!("paired ({p1},{p2}) (ξ_0, ξ_{h})"));
        if h.abs() < b {
            t.check(s.is_zero(), || format!("paired ({p1},{p2}) (ξ_0, ξ_{h}) = 0"));
        }
    }
    t.eq(selfp.at(-b).clone(), gi(sign(b)), || format!("paired ({p1},{p2}) (ξ_0, ξ_p2)"));
    if let Some(rec) = t.ok(reconstruct_paired(p1, p2, range.clone()), || format!("paired ({p1},{p2}) reconstruction")) {
        t.eq(rec.gamma.differences(&cross), vec![], || format!("paired ({p1},{p2}) rebuilt (z, ξ)"));
        t.eq(rec.beta.differences(&selfp), vec![], || format!("paired ({p1},{p2}) rebuilt (ξ, ξ)"));
    }
}

fn iso_pipeline(t: &mut Tally, opts: &SuiteOptions) {
    let minus_one = -GaussRational::one();
    for n in 0..=opts.max_dim {
        for (k, s) in enumerate_iso(n).into_iter().enumerate() {
            let tag = format!("a={:?} b={:?}", s.a, s.b);
            let Some(w) = t.ok(build(&s), || format!("{tag} build")) else { continue };
            let rep = w.validate();
            t.check(rep.passed(), || format!("{tag} validate: {:?}", rep.failures().next()));
            let Some(w) = t.ok(w.normalize(), || format!("{tag} normalize")) else { continue };

            if let Some(iso) = t.ok(isotropy(&w), || format!("{tag} isotropy")) {
                t.check(iso.report.passed(), || format!("{tag} isotropy report"));
                t.eq(iso.order() as u64, s.sign_group.order(), || format!("{tag} isotropy order"));
                t.eq(iso.order() as u64, 1u64 << s.sign_group.rank(), || format!("{tag} isotropy 2^rank"));
            }

            let seed = opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add((n * 1000 + k) as u64);
            let moved = t
                .ok(build_randomized(&s, seed), || format!("{tag} randomized"))
                .and_then(|m| t.ok(m.normalize(), || format!("{tag} randomized normalize")));
            if let Some(other) = moved {
                if let Some(gamma) = t.ok(transport(&w, &other), || format!("{tag} transport")) {
                    let image = w.act(&gamma);
                    t.check(
                        image.as_ref().is_ok_and(|i| i.g == other.g && i.normalized == other.normalized),
                        || format!("{tag} transport image"),
                    );
                    if let Some(back) = t.ok(transport(&other, &w), || format!("{tag} transport back")) {
                        t.check(back.dot_mat(&gamma).is_identity(), || format!("{tag} round trip"));
                    }
                }
            }

            if s.epsilon == 1 && s.a_at(1) > 0 && s.b_at(1) > 0 {
                if let Some(nd) = t.ok(negative_det_element(&w), || format!("{tag} negative det")) {
                    t.eq((nd.det_plus, nd.det_minus), (minus_one.clone(), minus_one.clone()), || {
                        format!("{tag} restricted dets")
                    });
                }
            }
            if s.epsilon == 1 && n % 2 == 1 {
                if let Some(sp) = t.ok(special_isotropy(&w), || format!("{tag} special isotropy")) {
                    t.check(sp.det_matches, || format!("{tag} det(γ) = ω_σ+1"));
                    t.eq(2 * sp.subgroup.len(), sp.full_order, || format!("{tag} special index"));
                }
            }
            if s.epsilon == 1 && n % 2 == 0 && n > 0 {
                let label = t.ok(isotropic_component(&w), || format!("{tag} component")).map(|c| c.label);
                t.eq(label, Some(0), || format!("{tag} reference component"));
            }
        }
    }
}

fn twisted_formulas(t: &mut Tally) {
    for p in 1..=10usize {
        let pi = p as i64;
        for a in (1..2 * p).step_by(2) {
            let b = 2 * p - 1 - a;
            if let Some(tab) = t.ok(n_x_coeffs2(a, b, 1), || format!("coefficients ({a},{b})")) {
                let n = &tab.n_seq;
                let last = n.len() - 1;
                t.check((0..=last).all(|m| n[m] == -n[last - m].clone()), || format!("({a},{b}) n antisymmetry"));
            }
            for j in (0..=4 * pi - 4).step_by(2) {
                let v = t.ok(single_identity(a, b, j), || format!("single identity ({a},{b}) j={j}"));
                t.eq(v, Some(BigInt::zero()), || format!("single identity ({a},{b}) j={j}"));
            }
        }
        let n = even_n(p);
        let x = even_x(p, 2);
        t.eq(&n[0] * &x[1] + &n[1] * &x[0], -BigInt::one(), || format!("even p={p} second coefficient"));
        for h in (-41..=41i64).step_by(2) {
            let s: BigInt = (0..=2 * pi).map(|m| binom(2 * pi, m) * phi_piecewise(p, 2 * m + h)).sum();
            t.eq(s, BigInt::zero(), || format!("even identity p={p} h={h}"));
            t.eq(phi_value(p, h), phi_piecewise(p, h), || format!("φ closed form p={p} h={h}"));
        }
        let v = BigInt::from(-(2 * pi + 1));
        t.eq(phi_value(p, 2 * pi + 1), v.clone(), || format!("φ_p(2p+1) p={p}"));
        t.eq(phi_piecewise(p, 2 * pi + 1), v, || format!("φ_p(2p+1) piecewise p={p}"));
        let xs = even_x(p, 21);
        for (k, xk) in xs.iter().enumerate() {
            t.eq(even_x_closed(p, k), xk.clone(), || format!("even x closed form p={p} k={k}"));
        }
    }
}

/// `(x_0, y_h)` for odd `h`, from a table indexed by `i − j`.
fn at_h(tab: &Profile, h: i64) -> GaussRational {
    tab.at(-h).clone()
}

fn twisted_models(t: &mut Tally) {
    let one = GaussRational::one();
    let minus_one = -GaussRational::one();
    for p in 1..=6usize {
        let pi = p as i64;
        for a in (1..2 * p).step_by(2) {
            let b = 2 * p - 1 - a;
            let Some(m) = t.ok(model_single_twisted(a, b), || format!("single ({a},{b})")) else { continue };
            let r = 4 * pi + 3;
            if let (Some(tab), Some(x)) = (
                t.ok(m.table(1, 1, -r..=r), || format!("single ({a},{b}) table")),
                t.ok(n_x_coeffs2(a, b, 2 * p + 4), || format!("single ({a},{b}) x")),
            ) {
                for h in (-r..=r).step_by(2) {
                    t.eq(at_h(&tab, h), gi(x_prime(&x.x_seq, p, h)), || format!("single ({a},{b}) (w_0, w_{h})"));
                }
            }
            if let Some(s) = t.ok(m.space.star_square(), || format!("single ({a},{b}) g*²")) {
                let want = |k: usize| if k > 0 { vec![k] } else { vec![] };
                t.eq(jordan_partition(&s, &one).ok(), Some(want(a)), || format!("single ({a},{b}) Jordan at 1"));
                t.eq(jordan_partition(&s, &minus_one).ok(), Some(want(b)), || format!("single ({a},{b}) Jordan at −1"));
            }
            if let Some(tab) = t.ok(tw_uniq::reconstruct_single(a, b, r), || format!("single ({a},{b}) rebuilt")) {
                if let Some(x) = t.ok(n_x_coeffs2(a, b, 2 * p + 4), || format!("single ({a},{b}) x")) {
                    t.check(
                        (-r..=r).step_by(2).all(|h| tab.get(&h) == Some(&Rational::from_integer(x_prime(&x.x_seq, p, h)))),
                        || format!("single ({a},{b}) rebuilt table"),
                    );
                }
            }
        }
        even_block(t, p);
        for p2 in 1..=p {
            paired_even(t, p, p2);
        }
    }
    for p1 in 1..=5usize {
        for p2 in 1..=p1 {
            let bound = 4 * p1 as i64 + 5;
            let Some(rec) = t.ok(tw_uniq::reconstruct_paired(p1, p2, bound), || format!("rebuilt pair ({p1},{p2})")) else {
                continue;
            };
            t.eq(rec.c.clone(), tw_uniq::c_closed(p1, p2), || format!("rebuilt pair ({p1},{p2}) c"));
            let c0: Vec<GaussRational> = rec.c.iter().cloned().map(GaussRational::real).collect();
            let from_model = tw_uniq::model_c_coefficients(p1, p2).ok();
            t.eq(from_model, Some(c0), || format!("model pair ({p1},{p2}) c"));
            for h in (-bound..=bound).step_by(2) {
                let q = |v: BigInt| Some(Rational::from_integer(v));
                t.eq(rec.alpha.get(&h).cloned(), q(phi_value(p1, h)), || format!("rebuilt ({p1},{p2}) α_{h}"));
                t.eq(rec.beta.get(&h).cloned(), q(tw_xi_self(p1, p2, h)), || format!("rebuilt ({p1},{p2}) β_{h}"));
                t.eq(rec.gamma.get(&h).cloned(), q(tw_xi_cross(p1, p2, h)), || format!("rebuilt ({p1},{p2}) γ_{h}"));
            }
        }
    }
}

fn even_block(t: &mut Tally, p: usize) {
    let pi = p as i64;
    let minus_one = -GaussRational::one();
    let Some(m) = t.ok(model_even_twisted(p), || format!("even p={p}")) else { return };
    let n = m.dim();
    let r = 4 * pi + 5;
    let range = -r..=r;
    let tilde = &m.tilde[0];
    let w0 = unit(n, 0);
    if let Some(s) = t.ok(m.space.star_square(), || format!("even p={p} g*²")) {
        t.eq(jordan_partition(&s, &minus_one).ok(), Some(vec![n]), || format!("even p={p} −g*² single block"));
    }
    if let Some(tab) = t.ok(m.table(1, 1, range.clone()), || format!("even p={p} table")) {
        for h in range.clone().step_by(2) {
            t.eq(at_h(&tab, h), gi(phi_value(p, h)), || format!("even p={p} (w_0, w_{h})"));
        }
    }
    let n_at = |i: i64| binom(2 * pi, i / 2);
    let partial = |i: i64| -> BigInt { (0..=i).step_by(2).map(n_at).sum() };
    let c_star = tilde[n - 1].clone();
    t.eq(c_star.clone(), GaussRational::real(pow2_rat(-pi)), || format!("even p={p} c_*"));
    let cbar: Vec<GaussRational> = tilde.iter().map(|c| c / &c_star).collect();
    let want: Vec<GaussRational> = (0..n as i64)
        .map(|k| {
            let i = 2 * k;
            if i <= 2 * pi - 2 {
                gi(-partial(i))
            } else {
                gi(partial(4 * pi - 2 - i))
            }
        })
        .collect();
    t.eq(cbar, want, || format!("even p={p} c̄"));
    let Some(cross) = t.ok(twisted_table(&m.space, tilde, &w0, range.clone()), || format!("even p={p} cross")) else {
        return;
    };
    let Some(selfp) = t.ok(twisted_table(&m.space, tilde, tilde, range.clone()), || format!("even p={p} self")) else {
        return;
    };
    for h in range.clone().step_by(2) {
        let v = at_h(&cross, h);
        t.eq(v.clone(), gi(tw_tilde_cross(p, h)), || format!("even p={p} (w̃_0, w_{h})"));
        t.check(in_2z(&v), || format!("even p={p} (w̃_0, w_{h}) ∈ 2Z"));
        if (1..=4 * pi - 3).contains(&h) {
            t.check(v.is_zero(), || format!("even p={p} (w̃_0, w_{h}) = 0"));
        }
        let s = at_h(&selfp, h);
        t.eq(s.clone(), gi(tw_tilde_self(p, h)), || format!("even p={p} (w̃_0, w̃_{h})"));
        if h.abs() <= 2 * pi - 1 {
            t.eq(s, GaussRational::one(), || format!("even p={p} (w̃_0, w̃_{h}) = 1"));
        }
    }
    t.eq(at_h(&cross, 4 * pi - 1), GaussRational::real(pow2_rat(pi)), || format!("even p={p} (w̃_0, w_4p−1)"));
    let top = BigInt::one() - pow2(2 * pi);
    t.eq(at_h(&selfp, 2 * pi + 1), gi(top), || format!("even p={p} (w̃_0, w̃_2p+1)"));
    let inv_sq = (&c_star * &c_star).inv();
    t.eq(inv_sq, Some(gi(pow2(2 * pi))), || format!("even p={p} c_*⁻²"));
}

fn paired_even(t: &mut Tally, p1: usize, p2: usize) {
    let (a, b) = (p1 as i64, p2 as i64);
    let minus_one = -GaussRational::one();
    let Some(m) = t.ok(model_paired_even_twisted(p1, p2), || format!("pair ({p1},{p2})")) else { return };
    let r = 4 * a + 5;
    let range = -r..=r;
    if let Some(s) = t.ok(m.space.star_square(), || format!("pair ({p1},{p2}) g*²")) {
        let want: Vec<usize> = if p2 >= 2 { vec![2 * p1, 2 * p2 - 2] } else { vec![2 * p1] };
        t.eq(jordan_partition(&s, &minus_one).ok(), Some(want), || format!("pair ({p1},{p2}) Jordan"));
    }
    let (Some(cross), Some(selfp)) = (
        t.ok(m.table(2, 1, range.clone()), || format!("pair ({p1},{p2}) cross")),
        t.ok(m.table(2, 2, range.clone()), || format!("pair ({p1},{p2}) self")),
    ) else {
        return;
    };
    for h in range.clone().step_by(2) {
        let v = at_h(&cross, h);
        t.eq(v.clone(), gi(tw_xi_cross(p1, p2, h)), || format!("pair ({p1},{p2}) (ξ_0, z_{h})"));
        t.check(in_2z(&v), || format!("pair ({p1},{p2}) (ξ_0, z_{h}) ∈ 2Z"));
        if (1 - 2 * b..=4 * a - 2 * b - 3).contains(&h) {
            t.check(v.is_zero(), || format!("pair ({p1},{p2}) (ξ_0, z_{h}) = 0"));
        }
        let s = at_h(&selfp, h);
        t.eq(s.clone(), gi(tw_xi_self(p1, p2, h)), || format!("pair ({p1},{p2}) (ξ_0, ξ_{h})"));
        if h.abs() <= 2 * b - 3 {
            t.check(s.is_zero(), || format!("pair ({p1},{p2}) (ξ_0, ξ_{h}) = 0"));
        }
    }
    t.eq(at_h(&selfp, 2 * b - 1), GaussRational::one(), || format!("pair ({p1},{p2}) (ξ_0, ξ_2p2−1)"));
}

fn twisted_pipeline(t: &mut Tally, opts: &SuiteOptions) {
    let one = GaussRational::one();
    let top = opts.max_dim.min(11);
    for n in 0..=top {
        for (k, s) in enumerate_twisted(n).into_iter().enumerate() {
            let tag = format!("a={:?} b={:?}", s.a, s.b);
            let Some(w) = t.ok(build_twisted(&s), || format!("{tag} build")) else { continue };
            let rep = w.validate();
            t.check(rep.passed(), || format!("{tag} validate: {:?}", rep.failures().next()));
            let Some(w) = t.ok(w.normalize(), || format!("{tag} normalize")) else { continue };
            if let Some(iso) = t.ok(isotropy_twisted(&w), || format!("{tag} isotropy")) {
                t.check(iso.report.passed(), || format!("{tag} isotropy report"));
                t.eq(iso.order() as u64, s.sign_group.order(), || format!("{tag} isotropy order"));
                t.eq(iso.order() as u64, 1u64 << s.sign_group.rank(), || format!("{tag} isotropy 2^rank"));
            }
            let seed = opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add((n * 1000 + k) as u64);
            if let Some((moved, _)) = t.ok(build_twisted_randomized_with(&s, seed), || format!("{tag} randomized")) {
                if let Some(moved) = t.ok(moved.normalize(), || format!("{tag} randomized normalize")) {
                    if let Some(gamma) = t.ok(transport_twisted(&w, &moved), || format!("{tag} transport")) {
                        let image = w.space.conjugate(&gamma);
                        t.check(image.is_ok_and(|i| i == moved.space), || format!("{tag} transport image"));
                        if let Some(back) = t.ok(transport_twisted(&moved, &w), || format!("{tag} transport back")) {
                            t.check(back.dot_mat(&gamma).is_identity(), || format!("{tag} round trip"));
                        }
                    }
                }
            }
            if n > 0 {
                if let Some(r) = t.ok(sl_refinement(&w), || format!("{tag} sl refinement")) {
                    t.check(r.report.passed(), || format!("{tag} sl report"));
                    t.eq(r.star_square_det.clone(), one.clone(), || format!("{tag} det(ǧg)"));
                    t.eq(r.class_count == 1, s.a_at(1) > 0, || format!("{tag} class count"));
                }
            }
        }
    }
    sl_instances(t, opts, top);
}

/// Randomly moved configurations: `det(ǧg) = 1`, and without a first odd
/// block the class label is the determinant of the moving element.
fn sl_instances(t: &mut Tally, opts: &SuiteOptions, top: usize) {
    let one = GaussRational::one();
    let pool: Vec<TwistedBlockSeq> = (1..=top.min(8)).flat_map(enumerate_twisted).collect();
    if pool.is_empty() {
        return;
    }
    for k in 0..SL_INSTANCES {
        let s = &pool[(k as usize * 7) % pool.len()];
        let tag = format!("instance {k} a={:?} b={:?}", s.a, s.b);
        let seed = opts.seed.wrapping_add(0xA5A5_0000).wrapping_add(k);
        let Some((moved, rho)) = t.ok(build_twisted_randomized_with(s, seed), || format!("{tag} randomized")) else {
            continue;
        };
        let det = moved.space.star_square().and_then(|m| m.det());
        t.eq(det.ok(), Some(one.clone()), || format!("{tag} det(ǧg)"));
        let Some(norm) = t.ok(moved.normalize(), || format!("{tag} normalize")) else { continue };
        if let Some(r) = t.ok(sl_refinement(&norm), || format!("{tag} sl refinement")) {
            t.eq(r.class_count == 1, s.a_at(1) > 0, || format!("{tag} class count"));
        }
        if s.a_at(1) == 0 {
            let want = u8::from(rho.det().ok() != Some(one.clone()));
            let label = t.ok(sl_class_label(&norm), || format!("{tag} label")).map(|l| l.label);
            t.eq(label, Some(want), || format!("{tag} label"));
        }
    }
}

fn weyl_tables(t: &mut Tally, opts: &SuiteOptions) {
    let expected: [(WeylType, usize, &[usize]); 3] = [
        (WeylType::G2, 6, &[2, 4]),
        (WeylType::F4, 25, &[4, 6, 8, 12]),
        (WeylType::E(6), 25, &[6, 8, 12]),
    ];
    for (ty, classes, lengths) in expected {
        let Some(rs) = t.ok(build_weyl(ty), || format!("{ty} root system")) else { continue };
        if let Some(cl) = t.ok(enumerate_classes(&rs), || format!("{ty} classes")) {
            t.eq(cl.len(), classes, || format!("{ty} class count"));
            let total: u128 = cl.iter().map(|c| c.size as u128).sum();
            t.eq(total, ty.group_order(), || format!("{ty} class sizes"));
        }
        let topts = TableOptions { seed: opts.seed, exhaustive: Some(true), ..TableOptions::default() };
        let Some(rep) = t.ok(verify_table(ty, &topts), || format!("{ty} table")) else { continue };
        let got: Vec<usize> = rep.rows.iter().map(|r| r.min_length).collect();
        t.eq(got, lengths.to_vec(), || format!("{ty} row lengths"));
        for row in &rep.rows {
            t.eq(row.status(), RowStatus::Pass, || format!("{ty} row {} ({})", row.row, row.factors));
            t.eq(row.found_length, Some(row.min_length), || format!("{ty} row {} found length", row.row));
        }
    }
}
