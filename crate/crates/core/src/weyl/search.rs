//! Seeded search for elements with a prescribed characteristic polynomial.
//!
//! The budget is split into a fixed number of chunks with their own seeds, so
//! the outcome does not depend on how many worker threads run them.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::minimize::minimize_raw;
use super::{char_poly_raw, cyclotomic_product, identity_mat, Mat, RootSystem, WeylElement, STRIDE};
use crate::error::{Result, WitError};
use crate::exact_scalar::totient;

pub const DEFAULT_CHUNKS: usize = 16;
/// Powers `w, w², …` tried per random element.
const MAX_POWER: usize = 60;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Characteristic polynomials examined, summed over chunks.
    pub budget: u64,
    pub seed: u64,
    pub threads: usize,
    pub chunks: usize,
    /// Keep searching until the minimized length equals this.
    pub target_length: Option<usize>,
}

impl SearchOptions {
    pub fn new(budget: u64, seed: u64) -> Self {
        Self { budget, seed, threads: 1, chunks: DEFAULT_CHUNKS, target_length: None }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    /// Minimized representative, when one was accepted.
    pub found: Option<WeylElement>,
    pub steps: u64,
    /// Number of matching elements met.
    pub matches: u64,
    /// Minimized lengths of every matching element met, with counts.
    pub observed_lengths: BTreeMap<usize, u64>,
}

struct Chunk {
    found: Option<Mat>,
    steps: u64,
    matches: u64,
    observed: BTreeMap<usize, u64>,
}

fn check_target(rs: &RootSystem, target: &BTreeMap<u32, u32>) -> Result<Vec<i64>> {
    let deg: u32 = target.iter().map(|(&d, &m)| totient(d) * m).sum();
    if deg as usize != rs.rank {
        return Err(WitError::Precondition(format!("target degree {deg} differs from rank {}", rs.rank)));
    }
    cyclotomic_product(target)
}

/// First element found with the target factorization, minimized by cyclic
/// shifts; `None` when the budget runs out (not a disproof).
pub fn find_elliptic_rep(
    rs: &RootSystem,
    target: &BTreeMap<u32, u32>,
    budget: u64,
    seed: u64,
) -> Result<Option<WeylElement>> {
    Ok(search_row(rs, target, &SearchOptions::new(budget, seed))?.found)
}

pub fn search_row(rs: &RootSystem, target: &BTreeMap<u32, u32>, opts: &SearchOptions) -> Result<SearchOutcome> {
    let poly = check_target(rs, target)?;
    let chunks = opts.chunks.max(1);
    let best = AtomicUsize::new(usize::MAX);
    let run = |c: usize| {
        let share = opts.budget / chunks as u64 + u64::from((c as u64) < opts.budget % chunks as u64);
        run_chunk(rs, &poly, opts, c, share, &best)
    };
    let results: Vec<Chunk> = if opts.threads <= 1 {
        (0..chunks).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| WitError::Precondition(format!("thread pool: {e}")))?;
        pool.install(|| (0..chunks).into_par_iter().map(run).collect())
    };
    let winner = results.iter().position(|r| r.found.is_some());
    let mut out = SearchOutcome::default();
    for r in &results[..winner.map_or(results.len(), |w| w + 1)] {
        out.steps += r.steps;
        out.matches += r.matches;
        for (&l, &k) in &r.observed {
            *out.observed_lengths.entry(l).or_insert(0) += k;
        }
    }
    out.found = winner.and_then(|w| results[w].found).map(|m| rs.with_reduced_word(&rs.wrap(m)));
    Ok(out)
}

fn chunk_seed(seed: u64, c: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (c as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn run_chunk(rs: &RootSystem, poly: &[i64], opts: &SearchOptions, c: usize, share: u64, best: &AtomicUsize) -> Chunk {
    let n = rs.rank;
    let id = identity_mat(n);
    let trace = -poly[n - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(opts.seed, c));
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let npos = rs.positive_roots.len();
    let mut out = Chunk { found: None, steps: 0, matches: 0, observed: BTreeMap::new() };
    let mut first = c == 0;
    while out.steps < share {
        if best.load(Ordering::Relaxed) < c {
            break;
        }
        let base = if first {
            first = false;
            rs.coxeter_element().m
        } else {
            let len = rng.gen_range(npos / 2..=2 * npos);
            let word: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
            rs.from_word(&word).expect("valid word").m
        };
        let mut p = base;
        for _ in 0..MAX_POWER {
            if p == id || out.steps >= share {
                break;
            }
            out.steps += 1;
            let tr: i64 = (0..n).map(|i| p[i * STRIDE + i] as i64).sum();
            if tr == trace && char_poly_raw(&p, n) == poly {
                out.matches += 1;
                let (m, len) = minimize_raw(rs, &p, &order);
                *out.observed.entry(len).or_insert(0) += 1;
                if opts.target_length.map_or(true, |t| t == len) {
                    out.found = Some(m);
                    best.fetch_min(c, Ordering::Relaxed);
                    return out;
                }
            }
            p = rs.mul_raw(&p, &base);
        }
    }
    out
}
