//! Command-line front end: builds, checks and transports witness
//! configurations, verifies elliptic class tables and runs the property
//! suites. Every command writes one JSON document.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use weylwit::block_seq::{derive_iso, derive_twisted};
use weylwit::iso_witness::{
    build, build_randomized, isotropic_component, isotropy, negative_det_element, special_isotropy, transport,
    IsoWitness,
};
use weylwit::suites::{selftest, SuiteOptions};
use weylwit::twisted_witness::{
    build_twisted, build_twisted_randomized, isotropy_twisted, sl_class_label, sl_refinement, transport_twisted,
    TwistedWitness,
};
use weylwit::weyl::{
    build_weyl, factors_label, parse_factors, search_row, verify_table, RowStatus, SearchOptions, TableOptions,
    WeylType,
};
use weylwit::WitError;

#[derive(Parser)]
#[command(name = "weylwit", version, about = "Exact witness configurations and elliptic Weyl class tables")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeqArgs {
    /// Comma-separated block sizes `a_1,a_2,…`.
    #[arg(long, value_delimiter = ',', default_value = "")]
    a: Vec<String>,
    /// Comma-separated block sizes `b_1,b_2,…`.
    #[arg(long, value_delimiter = ',', default_value = "")]
    b: Vec<String>,
    /// Move the constructed configuration by a seeded random element.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a configuration for an ε-symmetric form.
    BuildIso(SeqArgs),
    /// Construct a configuration for a bilinear form.
    BuildTwisted(SeqArgs),
    /// Check every axiom of a witness file.
    Validate { file: PathBuf },
    /// Attach normalized line vectors.
    Normalize { file: PathBuf },
    /// The element carrying the first configuration to the second.
    Transport { from: PathBuf, to: PathBuf },
    /// All elements fixing the configuration.
    Isotropy { file: PathBuf },
    /// Special-linear refinement of a bilinear-form configuration.
    SlRefine { file: PathBuf },
    /// Component of the attached maximal isotropic subspace.
    Component { file: PathBuf },
    /// Weyl group tools.
    #[command(subcommand)]
    Weyl(WeylCommand),
    /// Run every property suite.
    Selftest {
        #[arg(long, default_value_t = 10)]
        max_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum WeylCommand {
    /// Verify the embedded minimal-length rows of a type.
    VerifyTable {
        #[arg(long = "type")]
        weyl_type: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search budget per row.
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        /// Enumerate conjugacy classes (default for G2, F4, E6).
        #[arg(long, conflicts_with = "search")]
        exhaustive: bool,
        /// Search only.
        #[arg(long)]
        search: bool,
    },
    /// Search for a minimal-length element with a given characteristic polynomial.
    Find {
        #[arg(long = "type")]
        weyl_type: String,
        /// Cyclotomic indices, e.g. `6,18`, `4^2` or `Phi6^2*Phi12`.
        #[arg(long)]
        factors: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        /// Keep searching until the minimized length equals this.
        #[arg(long)]
        length: Option<usize>,
    },
}

enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<WitError> for Failure {
    fn from(e: WitError) -> Self {
        match e {
            WitError::Parse(_)
            | WitError::InvalidSequence(_)
            | WitError::DimensionMismatch(_)
            | WitError::NotSquare { .. }
            | WitError::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

/// A command result: the document and whether every check passed.
struct Outcome {
    doc: Value,
    passed: bool,
}

fn with_schema(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!("v1"));
    }
    v
}

fn parse_sizes(raw: &[String]) -> Result<Vec<usize>, Failure> {
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Usage(format!("invalid block size {s:?}"))))
        .collect()
}

enum Witness {
    Iso(IsoWitness),
    Twisted(TwistedWitness),
}

impl Witness {
    fn to_json(&self) -> Value {
        match self {
            Witness::Iso(w) => w.to_json(),
            Witness::Twisted(w) => w.to_json(),
        }
    }

    fn normalized(self) -> Result<Witness, Failure> {
        Ok(match self {
            Witness::Iso(w) if w.normalized.is_none() => Witness::Iso(w.normalize()?),
            Witness::Twisted(w) if w.normalized.is_none() => Witness::Twisted(w.normalize()?),
            w => w,
        })
    }
}

fn read_witness(path: &Path) -> Result<Witness, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    if v.get("twisted").and_then(Value::as_bool) == Some(true) {
        Ok(Witness::Twisted(TwistedWitness::from_json(&v)?))
    } else {
        Ok(Witness::Iso(IsoWitness::from_json(&v)?))
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("WEYLWIT_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::Usage(format!("WEYLWIT_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

fn weyl_type(s: &str) -> Result<WeylType, Failure> {
    s.parse().map_err(Failure::from)
}

fn run(cmd: Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::BuildIso(args) => {
            let seq = derive_iso(&parse_sizes(&args.a)?, &parse_sizes(&args.b)?)?;
            let w = match args.seed {
                Some(s) => build_randomized(&seq, s)?,
                None => build(&seq)?,
            };
            Ok(Outcome { passed: w.validate().passed(), doc: w.to_json() })
        }
        Command::BuildTwisted(args) => {
            let seq = derive_twisted(&parse_sizes(&args.a)?, &parse_sizes(&args.b)?)?;
            let w = match args.seed {
                Some(s) => build_twisted_randomized(&seq, s)?,
                None => build_twisted(&seq)?,
            };
            Ok(Outcome { passed: w.validate().passed(), doc: w.to_json() })
        }
        Command::Validate { file } => {
            let (kind, rep) = match read_witness(&file)? {
                Witness::Iso(w) => ("iso", w.validate()),
                Witness::Twisted(w) => ("twisted", w.validate()),
            };
            Ok(Outcome { passed: rep.passed(), doc: json!({"kind": kind, "passed": rep.passed(), "report": rep}) })
        }
        Command::Normalize { file } => {
            let w = match read_witness(&file)? {
                Witness::Iso(w) => Witness::Iso(w.normalize()?),
                Witness::Twisted(w) => Witness::Twisted(w.normalize()?),
            };
            Ok(Outcome { passed: true, doc: w.to_json() })
        }
        Command::Transport { from, to } => {
            let (gamma, ok) = match (read_witness(&from)?.normalized()?, read_witness(&to)?.normalized()?) {
                (Witness::Iso(a), Witness::Iso(b)) => {
                    let gamma = transport(&a, &b)?;
                    let image = a.act(&gamma)?;
                    let ok = image.g == b.g && image.normalized == b.normalized;
                    (gamma, ok)
                }
                (Witness::Twisted(a), Witness::Twisted(b)) => {
                    let gamma = transport_twisted(&a, &b)?;
                    let ok = a.space.conjugate(&gamma)? == b.space;
                    (gamma, ok)
                }
                _ => return Err(Failure::Usage("both files must hold the same kind of witness".into())),
            };
            let det = gamma.det()?;
            Ok(Outcome { passed: ok, doc: json!({"gamma": gamma, "det": det, "image_matches": ok}) })
        }
        Command::Isotropy { file } => match read_witness(&file)?.normalized()? {
            Witness::Iso(w) => {
                let iso = isotropy(&w)?;
                let mut ok = iso.report.passed() && iso.order() as u64 == w.seq.sign_group.order();
                let mut doc = json!({
                    "kind": "iso",
                    "order": iso.order(),
                    "sign_group_rank": w.seq.sign_group.rank(),
                    "isotropy": iso,
                });
                if w.seq.epsilon == 1 && w.seq.a_at(1) > 0 && w.seq.b_at(1) > 0 {
                    let nd = negative_det_element(&w)?;
                    let minus_one = -weylwit::GaussRational::from_int(1);
                    ok &= nd.det_plus == minus_one && nd.det_minus == minus_one;
                    doc["negative_det"] = json!(nd);
                }
                if w.seq.epsilon == 1 && w.dim() % 2 == 1 {
                    let sp = special_isotropy(&w)?;
                    ok &= sp.det_matches;
                    doc["special"] = json!(sp);
                }
                doc["passed"] = json!(ok);
                Ok(Outcome { passed: ok, doc })
            }
            Witness::Twisted(w) => {
                let iso = isotropy_twisted(&w)?;
                let ok = iso.report.passed() && iso.order() as u64 == w.seq.sign_group.order();
                Ok(Outcome {
                    passed: ok,
                    doc: json!({
                        "kind": "twisted",
                        "order": iso.order(),
                        "sign_group_rank": w.seq.sign_group.rank(),
                        "isotropy": iso,
                        "passed": ok,
                    }),
                })
            }
        },
        Command::SlRefine { file } => match read_witness(&file)?.normalized()? {
            Witness::Twisted(w) => {
                let r = sl_refinement(&w)?;
                let label = sl_class_label(&w)?;
                let ok = r.report.passed();
                Ok(Outcome { passed: ok, doc: json!({"refinement": r, "class_label": label, "passed": ok}) })
            }
            Witness::Iso(_) => Err(Failure::Usage("sl-refine needs a bilinear-form (twisted) witness".into())),
        },
        Command::Component { file } => match read_witness(&file)? {
            Witness::Iso(w) => Ok(Outcome { passed: true, doc: json!({"component": isotropic_component(&w)?}) }),
            Witness::Twisted(_) => Err(Failure::Usage("component needs an ε-symmetric witness".into())),
        },
        Command::Weyl(WeylCommand::VerifyTable { weyl_type: t, seed, budget, exhaustive, search }) => {
            let opts = TableOptions {
                seed,
                budget,
                threads: threads()?,
                exhaustive: if exhaustive { Some(true) } else if search { Some(false) } else { None },
            };
            let rep = verify_table(weyl_type(&t)?, &opts)?;
            Ok(Outcome { passed: rep.status() != RowStatus::Fail, doc: rep.to_json() })
        }
        Command::Weyl(WeylCommand::Find { weyl_type: t, factors, seed, budget, length }) => {
            let ty = weyl_type(&t)?;
            let target = parse_factors(&factors).map_err(|e| Failure::Usage(e.to_string()))?;
            let rs = build_weyl(ty)?;
            let opts = SearchOptions { threads: threads()?, target_length: length, ..SearchOptions::new(budget, seed) };
            let out = search_row(&rs, &target, &opts).map_err(|e| match e {
                WitError::Precondition(m) => Failure::Usage(m),
                e => e.into(),
            })?;
            let found = out.found.as_ref();
            Ok(Outcome {
                passed: found.is_some(),
                doc: json!({
                    "type": ty,
                    "factors": factors_label(&target),
                    "seed": seed,
                    "budget": budget,
                    "found": found.is_some(),
                    "representative_word": found.and_then(|w| w.word.clone()),
                    "length": found.map(|w| rs.length(w)),
                    "char_poly": found.map(|w| rs.char_poly(w)),
                    "fingerprint": found.map(|w| rs.fingerprint(w)),
                    "steps": out.steps,
                    "matches": out.matches,
                    "observed_lengths": out.observed_lengths,
                }),
            })
        }
        Command::Selftest { max_dim, seed } => {
            let rep = selftest(&SuiteOptions { max_dim, seed });
            Ok(Outcome { passed: rep.passed(), doc: rep.to_json() })
        }
    }
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|_| run(cli.command)).and_then(|o| {
        emit(&with_schema(o.doc), cli.out.as_deref())?;
        Ok(o.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
