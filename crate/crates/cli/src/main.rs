use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use reversa::baire::{self, BaireFunc};
use reversa::dsl;
use reversa::semigroup::{self, Semigroup};
use reversa::sequence::{self, CardinalSpec, ValueSetDescriptor, Verdict};
use reversa::structures::{self, FiniteBinaryStructure, UnionVerdict};
use reversa::witness::{self, NonRevCase, WitnessMap, DEFAULT_DEPTH};
use reversa::{Error, Reject};

const EXIT_DECIDED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;

/// Decide reversibility of cardinal sequences and disjoint unions, and
/// produce or check certificates.
///
/// Every TEXT argument is read from a file when a file of that name exists,
/// and is taken literally otherwise.
#[derive(Parser)]
#[command(name = "reversa", version)]
struct Cli {
    #[command(flatten)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(multiple = false)]
struct Format {
    /// Emit JSON (default).
    #[arg(long, global = true)]
    json: bool,
    /// Emit plain text.
    #[arg(long, global = true)]
    human: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a sequence, attaching a certificate when it is not reversible.
    DecideSeq { spec: String },
    /// Print the certificate for a non-reversible sequence.
    Witness {
        spec: String,
        /// Construction to use instead of the default one
        /// (inf-card-leq, inf-card-gt, dependent-k, divisible-tail).
        #[arg(long)]
        case: Option<String>,
    },
    /// Check a certificate against a sequence.
    Verify {
        spec: String,
        certificate: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u64,
    },
    /// Numerical-semigroup queries on a generating set such as `{4,10}`.
    #[command(subcommand)]
    Semigroup(SemigroupCmd),
    /// Decide a disjoint union of catalog structures.
    DecideUnion { union: String },
    /// Check a finite edge-list structure by scanning all vertex permutations.
    Brute {
        edges: String,
        #[arg(long, default_value_t = structures::DEFAULT_BRUTE_BOUND)]
        max_brute_vertices: usize,
    },
    /// Build the union of one-class equivalence relations with increasing
    /// class sizes followed by a progression of sizes.
    #[command(name = "gen-rb001")]
    IncreasingBlocks {
        /// Strictly increasing sizes, e.g. `{1,2,5}`.
        sizes: String,
        /// Tail progression, e.g. `ap(7,3)`.
        tail: String,
    },
    /// Piecewise functions on the naturals.
    #[command(subcommand)]
    Baire(BaireCmd),
}

#[derive(Subcommand)]
enum SemigroupCmd {
    Member { generators: String, n: u64 },
    Independent { generators: String },
    Conductor { generators: String },
    Decompose { generators: String, n: u64 },
}

#[derive(Subcommand)]
enum BaireCmd {
    /// The value sequence of a function.
    Compile { function: String },
    /// `outer ∘ inner`.
    Compose { outer: String, inner: String },
    /// A reversible function agreeing with a finite prefix.
    Extend { prefix: String },
}

/// What a command produced: a JSON document, its plain-text rendering and
/// the exit status.
struct Outcome {
    json: Value,
    human: String,
    code: u8,
}

impl Outcome {
    fn decided(json: Value, human: String) -> Self {
        Self {
            json,
            human,
            code: EXIT_DECIDED,
        }
    }
}

fn read_arg(arg: &str) -> Result<String, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn k_json(k: &ValueSetDescriptor) -> Value {
    let mut items: Vec<Value> = k.singles().iter().map(|&v| json!(v)).collect();
    items.extend(k.aps().iter().map(|&(a, b)| json!(format!("ap({a},{b})"))));
    Value::Array(items)
}

fn to_value<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("serializable")
}

/// The verdict document shared by every command that decides a sequence.
fn verdict_json(spec: &CardinalSpec, verdict: &Verdict) -> Value {
    let k = spec.k_of();
    let mut doc = Map::new();
    doc.insert("spec".into(), json!(spec.to_string()));
    doc.insert("k".into(), k_json(&k));
    doc.insert("gcd".into(), json!(k.gcd()));
    match verdict {
        Verdict::Reversible(reason) => {
            doc.insert("verdict".into(), json!("reversible"));
            doc.insert("reason".into(), json!(reason.code()));
        }
        Verdict::NotReversible { case, witness } => {
            doc.insert("verdict".into(), json!("not-reversible"));
            doc.insert("reason".into(), json!(case.code()));
            doc.insert("witness".into(), to_value(witness));
        }
    }
    Value::Object(doc)
}

fn verdict_human(spec: &CardinalSpec, verdict: &Verdict) -> String {
    let k = spec.k_of();
    let mut out = format!("sequence: {spec}\nK: {k}\n");
    if let Some(d) = k.gcd() {
        let _ = writeln!(out, "gcd: {d}");
    }
    match verdict {
        Verdict::Reversible(reason) => {
            let _ = writeln!(out, "verdict: reversible ({})", reason.code());
        }
        Verdict::NotReversible { case, witness } => {
            let _ = writeln!(out, "verdict: not reversible ({})", case.code());
            let _ = writeln!(out, "certificate: {} tracks", witness.tracks.len());
        }
    }
    out
}

fn decide_spec(spec: &CardinalSpec) -> Result<Outcome, Error> {
    let verdict = sequence::decide(spec)?;
    Ok(Outcome::decided(
        verdict_json(spec, &verdict),
        verdict_human(spec, &verdict),
    ))
}

fn parse_case(code: &str) -> Result<NonRevCase, Error> {
    NonRevCase::ALL
        .into_iter()
        .find(|c| c.code() == code)
        .ok_or_else(|| Error::Malformed(format!("unknown construction `{code}`")))
}

fn witness_cmd(spec: &CardinalSpec, case: Option<&str>) -> Result<Outcome, Error> {
    let case = match case {
        Some(code) => parse_case(code)?,
        None => match sequence::classify(spec)? {
            sequence::Classification::NotReversible(case) => case,
            sequence::Classification::Reversible(reason) => {
                return Err(Error::NotApplicable(format!(
                    "the sequence is reversible ({}); no certificate exists",
                    reason.code()
                )))
            }
        },
    };
    let w = witness::build_witness(spec, case)?;
    let human = format!(
        "certificate ({}) with tracks: {}\n",
        case.code(),
        w.tracks
            .iter()
            .map(|t| t.id.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(Outcome::decided(to_value(&w), human))
}

/// Accepts either a bare certificate or any document with a `witness` field.
fn parse_certificate(text: &str) -> Result<WitnessMap, Error> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("certificate: {e}")))?;
    let cert = match doc.get("witness") {
        Some(w) => w.clone(),
        None => doc,
    };
    serde_json::from_value(cert).map_err(|e| Error::Malformed(format!("certificate: {e}")))
}

fn reject_outcome(r: &Reject, depth: u64) -> Outcome {
    let mut report = to_value(r);
    report["accepted"] = json!(false);
    report["depth"] = json!(depth);
    report["detail"] = json!(r.to_string());
    Outcome {
        json: json!({ "report": report }),
        human: format!("rejected: {r}\n"),
        code: EXIT_ERROR,
    }
}

fn verify_cmd(spec: &CardinalSpec, cert: &WitnessMap, depth: u64) -> Result<Outcome, Error> {
    let verifier = witness::Verifier::new(spec)?;
    Ok(match verifier.verify(cert, depth) {
        Ok(report) => {
            let c = &report.collision;
            let preimages: Vec<String> = c.preimages.iter().map(ToString::to_string).collect();
            let human = format!(
                "accepted: checked through position {}; {} has preimages {}\n",
                report.checked_through,
                c.point,
                preimages.join(", ")
            );
            Outcome::decided(json!({ "report": to_value(&report) }), human)
        }
        Err(r) => reject_outcome(&r, depth),
    })
}

fn semigroup_cmd(cmd: &SemigroupCmd) -> Result<Outcome, Error> {
    Ok(match cmd {
        SemigroupCmd::Member { generators, n } => {
            let k = dsl::parse_generators(&read_arg(generators)?)?;
            let member = semigroup::contains(&k, *n)?;
            Outcome::decided(
                json!({ "generators": to_value(&k), "n": n, "member": member }),
                format!("{n} {} in <{k}>\n", if member { "is" } else { "is not" }),
            )
        }
        SemigroupCmd::Independent { generators } => {
            let k = dsl::parse_generators(&read_arg(generators)?)?;
            let values = ValueSetDescriptor::finite(k.iter());
            match semigroup::find_dependent(&values) {
                Ok((n, d)) => Outcome::decided(
                    json!({
                        "generators": to_value(&k),
                        "independent": false,
                        "dependent": { "element": n, "decomposition": to_value(&d) },
                    }),
                    format!("{k} is dependent: {n} lies in the semigroup of the others\n"),
                ),
                Err(Error::IsIndependent) => Outcome::decided(
                    json!({ "generators": to_value(&k), "independent": true }),
                    format!("{k} is independent\n"),
                ),
                Err(e) => return Err(e),
            }
        }
        SemigroupCmd::Conductor { generators } => {
            let k = dsl::parse_generators(&read_arg(generators)?)?;
            let s = Semigroup::new(&k)?;
            let conductor = s.conductor()?;
            Outcome::decided(
                json!({ "generators": to_value(&k), "gcd": s.gcd(), "conductor": conductor }),
                format!("gcd {}, conductor {conductor}\n", s.gcd()),
            )
        }
        SemigroupCmd::Decompose { generators, n } => {
            let k = dsl::parse_generators(&read_arg(generators)?)?;
            let d = semigroup::decompose(&k, *n)?;
            let terms: Vec<String> = d
                .coefficients()
                .iter()
                .map(|(g, c)| format!("{c}*{g}"))
                .collect();
            Outcome::decided(
                json!({
                    "generators": to_value(&k),
                    "n": n,
                    "decomposition": to_value(&d),
                    "summands": d.summands(),
                }),
                format!("{n} = {}\n", terms.join(" + ")),
            )
        }
    })
}

fn union_cmd(text: &str) -> Result<Outcome, Error> {
    let u = dsl::parse_union(text)?;
    let spec = u.cardinal_spec()?;
    let verdict = structures::decide_union(&u)?;
    let mut doc = to_value(&verdict);
    doc["union"] = json!(u.to_string());
    doc["sizes"] = json!(spec.to_string());
    doc["k"] = k_json(&spec.k_of());
    doc["gcd"] = json!(spec.k_of().gcd());
    let (human, code) = match &verdict {
        UnionVerdict::Reversible { path } => {
            doc["reason"] = to_value(path);
            (
                format!(
                    "verdict: reversible ({})\n",
                    doc["reason"].as_str().unwrap_or("")
                ),
                EXIT_DECIDED,
            )
        }
        UnionVerdict::NotReversible { path, .. } => {
            doc["reason"] = to_value(path);
            (
                format!(
                    "verdict: not reversible ({})\n",
                    doc["reason"].as_str().unwrap_or("")
                ),
                EXIT_DECIDED,
            )
        }
        UnionVerdict::Unknown { reason } => {
            doc["reason"] = json!(reason.code());
            doc["explanation"] = json!(reason.explanation());
            (
                format!(
                    "verdict: unknown ({}): {}\n",
                    reason.code(),
                    reason.explanation()
                ),
                EXIT_UNKNOWN,
            )
        }
    };
    Ok(Outcome {
        json: doc,
        human: format!("union: {u}\n{human}"),
        code,
    })
}

fn brute_cmd(text: &str, bound: usize) -> Result<Outcome, Error> {
    let s = FiniteBinaryStructure::parse_edge_list(text)?;
    let report = structures::brute_reversible(&s, bound)?;
    let verdict = if report.reversible {
        "reversible"
    } else {
        "not-reversible"
    };
    let mut doc = to_value(&report);
    doc["verdict"] = json!(verdict);
    doc["vertices"] = json!(s.len());
    doc["edges"] = json!(s.edges().len());
    let human = format!(
        "{} vertices, {} edges: {verdict} ({} of {} permutations map the relation into itself)\n",
        s.len(),
        s.edges().len(),
        report.condensations,
        report.permutations
    );
    Ok(Outcome::decided(doc, human))
}

fn increasing_blocks_cmd(sizes: &str, tail: &str) -> Result<Outcome, Error> {
    let sizes = dsl::parse_nat_list(&read_arg(sizes)?)?;
    let tail = dsl::parse_ap(&read_arg(tail)?)?;
    let u = structures::increasing_blocks_union(&sizes, tail)?;
    let mut out = union_cmd(&u.to_string())?;
    out.human = format!("{u}\n{}", out.human);
    Ok(out)
}

fn function_outcome(label: &str, f: &BaireFunc) -> Result<Outcome, Error> {
    let spec = f.compile_to_spec()?;
    let verdict = sequence::decide(&spec)?;
    let mut doc = verdict_json(&spec, &verdict);
    doc[label] = json!(f.to_string());
    let human = format!("{label}: {f}\n{}", verdict_human(&spec, &verdict));
    Ok(Outcome::decided(doc, human))
}

fn baire_cmd(cmd: &BaireCmd) -> Result<Outcome, Error> {
    match cmd {
        BaireCmd::Compile { function } => {
            let f = dsl::parse_pieces(&read_arg(function)?)?;
            function_outcome("function", &f)
        }
        BaireCmd::Compose { outer, inner } => {
            let outer = dsl::parse_pieces(&read_arg(outer)?)?;
            let inner = dsl::parse_pieces(&read_arg(inner)?)?;
            let h = baire::compose(&outer, &inner)?;
            function_outcome("function", &h)
        }
        BaireCmd::Extend { prefix } => {
            let prefix = dsl::parse_prefix(&read_arg(prefix)?)?;
            let f = baire::extend_to_reversible(&prefix)?;
            function_outcome("function", &f)
        }
    }
}

fn run(cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::DecideSeq { spec } => decide_spec(&dsl::parse_seq(&read_arg(spec)?)?),
        Command::Witness { spec, case } => {
            witness_cmd(&dsl::parse_seq(&read_arg(spec)?)?, case.as_deref())
        }
        Command::Verify {
            spec,
            certificate,
            depth,
        } => {
            let spec = dsl::parse_seq(&read_arg(spec)?)?;
            let cert = parse_certificate(&read_arg(certificate)?)?;
            verify_cmd(&spec, &cert, *depth)
        }
        Command::Semigroup(sub) => semigroup_cmd(sub),
        Command::DecideUnion { union } => union_cmd(&read_arg(union)?),
        Command::Brute {
            edges,
            max_brute_vertices,
        } => brute_cmd(&read_arg(edges)?, *max_brute_vertices),
        Command::IncreasingBlocks { sizes, tail } => increasing_blocks_cmd(sizes, tail),
        Command::Baire(sub) => baire_cmd(sub),
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::EmptySet => "empty-set",
        Error::NotRepresentable(_) => "not-representable",
        Error::IsIndependent => "is-independent",
        Error::Overflow => "overflow",
        Error::TooLarge(_) => "too-large",
        Error::NotApplicable(_) => "not-applicable",
        Error::UnknownTrack(_) => "unknown-track",
        Error::PositionOutOfRange { .. } => "position-out-of-range",
        Error::NotIncreasing => "not-increasing",
        Error::NotAlignable(_) => "not-alignable",
        Error::MalformedFunction(_) => "malformed-function",
        Error::Malformed(_) => "malformed",
        Error::Parse { .. } => "parse-error",
        Error::ZeroValue { .. } => "zero-value",
        Error::OrdinalTooLarge => "ordinal-too-large",
    }
}

fn error_outcome(e: &Error) -> Outcome {
    let mut detail = json!({ "kind": error_code(e), "message": e.to_string() });
    if let Error::Parse { line, col, .. } | Error::ZeroValue { line, col } = e {
        detail["line"] = json!(line);
        detail["col"] = json!(col);
    }
    Outcome {
        json: json!({ "error": detail }),
        human: format!("error: {e}\n"),
        code: EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli.command).unwrap_or_else(|e| error_outcome(&e));
    let text = if cli.format.human {
        out.human
    } else {
        serde_json::to_string_pretty(&out.json).expect("serializable") + "\n"
    };
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(out.code)
}
