//! Embedded minimal-length data for elliptic classes of exceptional types,
//! and its verification.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::classes::enumerate_classes;
use super::search::{search_row, SearchOptions, DEFAULT_CHUNKS};
use super::{build_weyl, cyclotomic_product, factors_label, WeylType};
use crate::error::{Result, WitError};
use crate::exact_scalar::totient;

const TABLE_JSON: &str = include_str!("../../data/elliptic_tables.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticRow {
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    pub min_length: usize,
    pub factors: BTreeMap<u32, u32>,
    /// Distinguished-class names, carried as opaque strings.
    pub labels: Vec<String>,
}

#[derive(Deserialize)]
struct TableFile {
    rows: Vec<EllipticRow>,
}

pub fn elliptic_rows() -> &'static [EllipticRow] {
    static ROWS: OnceLock<Vec<EllipticRow>> = OnceLock::new();
    ROWS.get_or_init(|| serde_json::from_str::<TableFile>(TABLE_JSON).expect("embedded table parses").rows)
}

pub fn rows_for(t: WeylType) -> Vec<EllipticRow> {
    elliptic_rows().iter().filter(|r| r.weyl_type == t).cloned().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCheck {
    pub name: String,
    pub status: RowStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowReport {
    pub row: usize,
    pub min_length: usize,
    pub factors: String,
    pub labels: Vec<String>,
    pub method: String,
    pub checks: Vec<RowCheck>,
    pub representative_word: Option<Vec<usize>>,
    pub found_length: Option<usize>,
    pub fingerprint: Vec<i64>,
    pub search_steps: u64,
    pub observed_lengths: BTreeMap<usize, u64>,
    /// `(min_length, size)` of every class with the row's polynomial, when enumerated.
    pub matching_classes: Vec<(usize, u64)>,
}

impl RowReport {
    pub fn status(&self) -> RowStatus {
        self.checks.iter().map(|c| c.status).max().unwrap_or(RowStatus::Pass)
    }

    fn push(&mut self, name: &str, status: RowStatus, detail: String) {
        self.checks.push(RowCheck { name: name.into(), status, detail });
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableReport {
    pub weyl_type: WeylType,
    pub rows: Vec<RowReport>,
}

impl TableReport {
    pub fn status(&self) -> RowStatus {
        self.rows.iter().map(RowReport::status).max().unwrap_or(RowStatus::Pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "v1",
            "type": self.weyl_type,
            "status": self.status(),
            "rows": self.rows,
        })
    }
}

#[derive(Clone, Debug)]
pub struct TableOptions {
    pub seed: u64,
    /// Search budget per row, in characteristic polynomials examined.
    pub budget: u64,
    pub threads: usize,
    /// `None` enumerates classes whenever the group is small enough to do so
    /// quickly (G2, F4, E6).
    pub exhaustive: Option<bool>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { seed: 0, budget: 2_000_000, threads: 1, exhaustive: None }
    }
}

/// Checks every embedded row of the type; failures are report entries.
pub fn verify_table(t: WeylType, opts: &TableOptions) -> Result<TableReport> {
    if !matches!(t, WeylType::G2 | WeylType::F4 | WeylType::E(6) | WeylType::E(7) | WeylType::E(8)) {
        return Err(WitError::Unsupported(format!("no table for {t}")));
    }
    let rs = build_weyl(t)?;
    let exhaustive = opts.exhaustive.unwrap_or(matches!(t, WeylType::G2 | WeylType::F4 | WeylType::E(6)));
    let classes = if exhaustive { Some(enumerate_classes(&rs)?) } else { None };
    let mut rows = Vec::new();
    for (idx, row) in rows_for(t).into_iter().enumerate() {
        let mut rep = RowReport {
            row: idx,
            min_length: row.min_length,
            factors: factors_label(&row.factors),
            labels: row.labels.clone(),
            method: if exhaustive { "exhaustive" } else { "search" }.into(),
            checks: vec![],
            representative_word: None,
            found_length: None,
            fingerprint: vec![],
            search_steps: 0,
            observed_lengths: BTreeMap::new(),
            matching_classes: vec![],
        };
        let deg: u32 = row.factors.iter().map(|(&d, &m)| totient(d) * m).sum();
        rep.push(
            "degree_is_rank",
            if deg as usize == rs.rank { RowStatus::Pass } else { RowStatus::Fail },
            format!("degree {deg}, rank {}", rs.rank),
        );
        let trivial = row.factors.contains_key(&1);
        rep.push("no_trivial_factor", if trivial { RowStatus::Fail } else { RowStatus::Pass }, String::new());
        if deg as usize != rs.rank {
            rows.push(rep);
            continue;
        }
        let poly = cyclotomic_product(&row.factors)?;
        let search = SearchOptions {
            budget: opts.budget,
            seed: opts.seed.wrapping_add(idx as u64),
            threads: opts.threads,
            chunks: DEFAULT_CHUNKS,
            target_length: Some(row.min_length),
        };
        let out = search_row(&rs, &row.factors, &search)?;
        rep.search_steps = out.steps;
        rep.observed_lengths = out.observed_lengths.clone();
        let seen = format!("{} matches, minimized lengths {:?}, {} steps", out.matches, out.observed_lengths, out.steps);
        let miss = if exhaustive { RowStatus::Fail } else { RowStatus::Inconclusive };
        match &out.found {
            Some(w) => {
                rep.representative_word = w.word.clone();
                rep.found_length = Some(rs.length(w));
                rep.fingerprint = rs.fingerprint(w);
                let ok = rs.char_poly(w) == poly;
                rep.push("representative_exists", if ok { RowStatus::Pass } else { RowStatus::Fail }, seen.clone());
                let ok = rs.length(w) == row.min_length;
                rep.push("minimized_length", if ok { RowStatus::Pass } else { RowStatus::Fail }, seen);
            }
            None if out.matches > 0 => {
                rep.push("representative_exists", RowStatus::Pass, seen.clone());
                rep.push("minimized_length", miss, seen);
            }
            None => {
                rep.push("representative_exists", miss, seen.clone());
                rep.push("minimized_length", miss, seen);
            }
        }
        if let Some(cl) = &classes {
            let same: Vec<_> = cl.iter().filter(|c| c.char_poly == poly).collect();
            rep.matching_classes = same.iter().map(|c| (c.min_length, c.size)).collect();
            let ok = same.iter().any(|c| c.min_length == row.min_length);
            rep.push(
                "class_minimum",
                if ok { RowStatus::Pass } else { RowStatus::Fail },
                format!("classes with this polynomial: {:?}", rep.matching_classes),
            );
            if rep.representative_word.is_none() {
                if let Some(c) = same.iter().find(|c| c.min_length == row.min_length) {
                    rep.representative_word = c.representative.word.clone();
                    rep.fingerprint = c.fingerprint.clone();
                }
            }
        }
        rows.push(rep);
    }
    Ok(TableReport { weyl_type: t, rows })
}
