//! `qspace` — exact subspace-family combinatorics from the command line.
//!
//! Output is JSON lines by default (one record per line, big numbers as
//! decimal strings, never floats) or CSV with `--csv`. Every run echoes its
//! resolved configuration as the first record; the echo excludes the worker
//! count, which affects scheduling but never results, so outputs are
//! byte-identical for any `--workers` value.
//!
//! Exit codes: 0 success, 1 parameter/validation error, 2 infeasible scale,
//! 3 internal invariant violation.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use qspace_core::audit::{family_size_audit, threshold_audit};
use qspace_core::family::{build_f_star_x_k, build_f_x_k, intersection_count, Family, FamilyError};
use qspace_core::gfq::{Field, SUPPORTED_Q};
use qspace_core::qbinom::{check_identities, gauss_binom, is_prime_power};
use qspace_core::search::{extremal_report, SearchError, SearchMode};
use qspace_core::simplex::{
    count_simplices_opts, count_simplices_with_incidence, lemma23_step_counts, n_trk_exact,
    n_trk_lower_bound, Guard, SimplexError,
};
use qspace_core::subspace::{enumerate_subspaces, Subspace};

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;
const EXIT_INVARIANT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "qspace",
    version,
    about = "Exact combinatorics of subspace families over small finite fields",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write results to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit CSV instead of JSON lines
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads for parallel counting (default: all cores, or
    /// QSPACE_WORKERS); never affects results
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Multiplier on the built-in infeasibility limits
    #[arg(long, global = true, default_value_t = 1)]
    guard_limit: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gaussian binomial [a, b]_q as an exact decimal
    Qbinom { a: i64, b: i64, q: u32 },
    /// Enumerate all k-subspaces of F_q^n as a family file
    Enum(ParamsQNK),
    /// Census of j-subspaces by intersection dimension against the closed
    /// form, per (dim A, j, l)
    Lemma1 {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        /// Sample this many subspaces A per dimension instead of all
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Count (r+1, t)-simplices in a family file
    Count {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        t: usize,
        /// Count even if the family is not r-wise t-intersecting
        #[arg(long)]
        waive: bool,
    },
    /// Exact extremal simplex count over F_{X,k} with dim X = r+t
    Ntrk(ParamsNKQRT),
    /// Closed-form lower bound on the extremal simplex count (n > 2k)
    Bound(ParamsNKQRT),
    /// Exact census of the sequence-assembly construction steps
    Steps(ParamsNKQRT),
    /// Covering number and all minimum t-covers of a family file
    Tau {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        t: usize,
        /// Use the exhaustive all-subspaces search instead of the pruned one
        #[arg(long)]
        exhaustive: bool,
    },
    /// Build F_{X,k} (or F*_{X,k}) as a family file
    Build {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Dimension of the coordinate anchor subspace X
        #[arg(long)]
        dim_x: usize,
        /// Explicit anchor subspace encoding (overrides --dim-x)
        #[arg(long)]
        x: Option<String>,
        /// Build the equality sub-family F*_{X,k}
        #[arg(long)]
        star: bool,
    },
    /// Evaluate every inequality chain exactly and report hold/fail
    Audit {
        #[arg(long)]
        n: i64,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        r: i64,
        #[arg(long)]
        t: i64,
        #[arg(long)]
        q: u32,
        /// Also emit the family-size audit (diagnostic; known to reverse at
        /// some corners)
        #[arg(long)]
        size_audit: bool,
    },
    /// Explore maximal families and report the simplex-count maximizers
    Search {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        iterations: u64,
        /// Also write each witness as a family file into this directory
        #[arg(long)]
        witness_dir: Option<PathBuf>,
    },
    /// Run a named verification suite; exit 3 if any check fails
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        iterations: Option<u64>,
    },
}

#[derive(Args)]
struct ParamsQNK {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct ParamsNKQRT {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    t: usize,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

// ---------------------------------------------------------------------------
// output plumbing

struct Emitter {
    sink: Box<dyn Write>,
    csv: bool,
    header: Option<Vec<String>>,
}

impl Emitter {
    fn new(out: &Option<PathBuf>, csv: bool) -> Result<Emitter, CliError> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(path).map_err(|e| {
                    CliError::Validation(format!("cannot open --out {}: {e}", path.display()))
                })?,
            )),
            None => Box::new(std::io::BufWriter::new(std::io::stdout())),
        };
        Ok(Emitter {
            sink,
            csv,
            header: None,
        })
    }

    fn record(&mut self, rec: Map<String, Value>) -> Result<(), CliError> {
        if self.csv {
            // the config echo rides along as a comment so data rows stay
            // rectangular; a change of record shape starts a new header
            if rec.get("record") == Some(&Value::String("config".into())) {
                writeln!(self.sink, "# {}", Value::Object(rec))?;
                return Ok(());
            }
            let keys: Vec<String> = rec.keys().cloned().collect();
            if self.header.as_ref() != Some(&keys) {
                writeln!(self.sink, "{}", keys.join(","))?;
                self.header = Some(keys);
            }
            let row: Vec<String> = rec.values().map(csv_cell).collect();
            writeln!(self.sink, "{}", row.join(","))?;
        } else {
            writeln!(self.sink, "{}", Value::Object(rec))?;
        }
        Ok(())
    }

    fn raw(&mut self, text: &str) -> Result<(), CliError> {
        self.sink.write_all(text.as_bytes())?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.sink.flush()?;
        Ok(())
    }
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Infeasible(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SimplexError> for CliError {
    fn from(e: SimplexError) -> Self {
        match e {
            SimplexError::InfeasibleScale { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match &e {
            SearchError::InfeasibleScale { .. }
            | SearchError::Simplex(SimplexError::InfeasibleScale { .. }) => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<qspace_core::gfq::FieldError> for CliError {
    fn from(e: qspace_core::gfq::FieldError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<qspace_core::subspace::SubspaceError> for CliError {
    fn from(e: qspace_core::subspace::SubspaceError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<qspace_core::audit::AuditError> for CliError {
    fn from(e: qspace_core::audit::AuditError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Some(workers) = resolve_workers(cli.workers) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }

    let outcome = catch_unwind(AssertUnwindSafe(|| dispatch(&cli)));
    let code = match outcome {
        Ok(Ok(code)) => code,
        Ok(Err(CliError::Validation(msg))) => {
            eprintln!("error: {msg}");
            EXIT_VALIDATION
        }
        Ok(Err(CliError::Infeasible(msg))) => {
            eprintln!("error: {msg}");
            EXIT_INFEASIBLE
        }
        Ok(Err(CliError::Io(e))) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            EXIT_INVARIANT
        }
    };
    std::process::exit(code);
}

fn resolve_workers(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("QSPACE_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn config_echo(command: &str, params: Map<String, Value>) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("record".into(), "config".into());
    rec.insert("command".into(), command.into());
    for (k, v) in params {
        rec.insert(k, v);
    }
    rec
}

fn require_supported_q(q: u32) -> Result<Field, CliError> {
    Field::new(q).map_err(|e| CliError::Validation(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let guard = Guard {
        factor: cli.guard_limit,
    };
    match &cli.command {
        Command::Qbinom { a, b, q } => {
            if *a < 0 {
                return Err(CliError::Validation(format!("a = {a} must be nonnegative")));
            }
            if !is_prime_power(*q as u64) {
                return Err(CliError::Validation(format!(
                    "q = {q} is not a prime power"
                )));
            }
            // bare decimal on stdout; config echo on stderr
            eprintln!(
                "{}",
                Value::Object(config_echo(
                    "qbinom",
                    json_map(&[("a", json!(a)), ("b", json!(b)), ("q", json!(q))])
                ))
            );
            let mut em = Emitter::new(&cli.out, false)?;
            em.raw(&format!("{}\n", gauss_binom(*a, *b, *q)))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Enum(p) => {
            let field = require_supported_q(p.q)?;
            if p.k > p.n {
                return Err(CliError::Validation(format!(
                    "k = {} exceeds n = {}",
                    p.k, p.n
                )));
            }
            let fam =
                Family::from_members(field, p.n, p.k, enumerate_subspaces(field, p.n, p.k)?)?;
            write_family(cli, "enum", &fam)
        }
        Command::Lemma1 {
            q,
            n,
            samples,
            seed,
        } => cmd_lemma1(cli, *q, *n, *samples, *seed),
        Command::Count {
            family,
            r,
            t,
            waive,
        } => {
            let fam = Family::read_from_path(family)?;
            let res = count_simplices_opts(&fam, *r, *t, *waive)?;
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo(
                "count",
                json_map(&[
                    ("family", json!(family.display().to_string())),
                    ("r", json!(r)),
                    ("t", json!(t)),
                    ("waive", json!(waive)),
                ]),
            ))?;
            em.record(json_map(&[
                ("record", json!("simplex_count")),
                ("q", json!(fam.field().q())),
                ("n", json!(fam.ambient_dim())),
                ("k", json!(fam.uniformity())),
                ("r", json!(r)),
                ("t", json!(t)),
                ("members", json!(fam.len())),
                ("count", json!(res.count.to_string())),
                ("subsets_visited", json!(res.subsets_visited)),
                ("pruned", json!(res.pruned)),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Ntrk(p) => {
            require_supported_q(p.q)?;
            let res = n_trk_exact(p.q, p.n, p.k, p.r, p.t)?;
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo("ntrk", nkqrt_map(p)))?;
            em.record(json_map(&[
                ("record", json!("ntrk")),
                ("n", json!(p.n)),
                ("k", json!(p.k)),
                ("q", json!(p.q)),
                ("r", json!(p.r)),
                ("t", json!(p.t)),
                ("count", json!(res.count.to_string())),
                ("subsets_visited", json!(res.subsets_visited)),
                ("pruned", json!(res.pruned)),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Bound(p) => {
            if !is_prime_power(p.q as u64) {
                return Err(CliError::Validation(format!(
                    "q = {} is not a prime power",
                    p.q
                )));
            }
            let b = n_trk_lower_bound(p.n, p.k, p.q, p.r, p.t)?;
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo("bound", nkqrt_map(p)))?;
            em.record(json_map(&[
                ("record", json!("ntrk_lower_bound")),
                ("n", json!(p.n)),
                ("k", json!(p.k)),
                ("q", json!(p.q)),
                ("r", json!(p.r)),
                ("t", json!(p.t)),
                ("num", json!(b.numer().to_string())),
                ("den", json!(b.denom().to_string())),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Steps(p) => {
            require_supported_q(p.q)?;
            let s = lemma23_step_counts(p.q, p.n, p.k, p.r, p.t, guard)?;
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo("steps", nkqrt_map(p)))?;
            em.record(json_map(&[
                ("record", json!("assembly_steps")),
                ("n", json!(p.n)),
                ("k", json!(p.k)),
                ("q", json!(p.q)),
                ("r", json!(p.r)),
                ("t", json!(p.t)),
                ("f_exact", json!(s.f_exact.to_string())),
                ("f_bound", json!(s.f_bound.to_string())),
                ("f_bound_holds", json!(s.f_bound_holds)),
                ("g_exact", json!(s.g_exact.to_string())),
                ("g_bound_num", json!(s.g_bound.numer().to_string())),
                ("g_bound_den", json!(s.g_bound.denom().to_string())),
                ("g_bound_holds", json!(s.g_bound_holds)),
                ("fiber_size", json!(s.fiber_size.to_string())),
                ("fibers_uniform", json!(s.fibers_uniform)),
                ("h_exact", json!(s.h_exact.to_string())),
                ("assembled_num", json!(s.assembled.numer().to_string())),
                ("assembled_den", json!(s.assembled.denom().to_string())),
                ("ntrk", json!(s.n_exact.to_string())),
                ("assembled_holds", json!(s.assembled_holds)),
                ("assemblies_checked", json!(s.assemblies_checked)),
                (
                    "assemblies_are_simplices",
                    json!(s.assemblies_are_simplices),
                ),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Tau {
            family,
            t,
            exhaustive,
        } => {
            let fam = Family::read_from_path(family)?;
            let report = if *exhaustive {
                fam.covering_number_exhaustive(*t)?
            } else {
                fam.covering_number(*t)?
            };
            let covers: Vec<Value> = report.covers.iter().map(|c| json!(c.encode())).collect();
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo(
                "tau",
                json_map(&[
                    ("family", json!(family.display().to_string())),
                    ("t", json!(t)),
                    ("exhaustive", json!(exhaustive)),
                ]),
            ))?;
            em.record(json_map(&[
                ("record", json!("cover")),
                ("q", json!(fam.field().q())),
                ("n", json!(fam.ambient_dim())),
                ("k", json!(fam.uniformity())),
                ("t", json!(t)),
                ("members", json!(fam.len())),
                ("tau", json!(report.tau)),
                ("num_covers", json!(report.covers.len())),
                ("covers", Value::Array(covers)),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Build {
            q,
            n,
            k,
            dim_x,
            x,
            star,
        } => {
            let field = require_supported_q(*q)?;
            let anchor = match x {
                Some(enc) => Subspace::decode(field, *n, enc)?,
                None => {
                    if *dim_x > *n {
                        return Err(CliError::Validation(format!(
                            "dim_x = {dim_x} exceeds n = {n}"
                        )));
                    }
                    Subspace::coordinate(field, *n, &(0..*dim_x).collect::<Vec<_>>())
                }
            };
            let fam = if *star {
                build_f_star_x_k(&anchor, *k)?
            } else {
                build_f_x_k(&anchor, *k)?
            };
            write_family(cli, if *star { "build-star" } else { "build" }, &fam)
        }
        Command::Audit {
            n,
            k,
            r,
            t,
            q,
            size_audit,
        } => {
            let reports = threshold_audit(*n, *k, *r, *t, *q)?;
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo(
                "audit",
                json_map(&[
                    ("n", json!(n)),
                    ("k", json!(k)),
                    ("r", json!(r)),
                    ("t", json!(t)),
                    ("q", json!(q)),
                    ("size_audit", json!(size_audit)),
                ]),
            ))?;
            for rep in &reports {
                emit_bound_report(&mut em, rep)?;
            }
            if *size_audit {
                let rep = family_size_audit(*n, *k, *r, *t, *q)?;
                emit_bound_report(&mut em, &rep)?;
            }
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Search {
            mode,
            q,
            n,
            k,
            r,
            t,
            seed,
            iterations,
            witness_dir,
        } => {
            require_supported_q(*q)?;
            let mode = match mode {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::Sampled => SearchMode::Sampled,
            };
            let res = extremal_report(*q, *n, *k, *r, *t, mode, *seed, *iterations, guard)?;
            if let Some(dir) = witness_dir {
                std::fs::create_dir_all(dir)?;
                for (i, w) in res.witnesses.iter().enumerate() {
                    w.write_to_path(&dir.join(format!("witness_{i:03}.family")))?;
                }
            }
            let witnesses: Vec<Value> = res
                .witnesses
                .iter()
                .zip(&res.witness_tau)
                .zip(&res.sandwich)
                .map(|((w, tau), sw)| {
                    Value::Object(json_map(&[
                        (
                            "members",
                            json!(w.iter().map(|m| m.encode()).collect::<Vec<_>>()),
                        ),
                        ("size", json!(w.len())),
                        ("tau", json!(tau)),
                        ("sandwich", json!(sw.holds)),
                        (
                            "x",
                            sw.x_encoding
                                .as_ref()
                                .map(|x| json!(x))
                                .unwrap_or(Value::Null),
                        ),
                    ]))
                })
                .collect();
            let mut em = Emitter::new(&cli.out, cli.csv)?;
            em.record(config_echo(
                "search",
                json_map(&[
                    (
                        "mode",
                        json!(match mode {
                            SearchMode::Exhaustive => "exhaustive",
                            SearchMode::Sampled => "sampled",
                        }),
                    ),
                    ("q", json!(q)),
                    ("n", json!(n)),
                    ("k", json!(k)),
                    ("r", json!(r)),
                    ("t", json!(t)),
                    ("seed", json!(seed)),
                    ("iterations", json!(iterations)),
                ]),
            ))?;
            em.record(json_map(&[
                ("record", json!("search_result")),
                ("families_examined", json!(res.families_examined)),
                ("best_count", json!(res.best_count.to_string())),
                (
                    "ntrk",
                    res.ntrk_exact
                        .as_ref()
                        .map(|v| json!(v.to_string()))
                        .unwrap_or(Value::Null),
                ),
                ("num_witnesses", json!(res.witnesses.len())),
                ("witnesses", Value::Array(witnesses)),
            ]))?;
            em.finish()?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            suite,
            q,
            n,
            k,
            r,
            t,
            seed,
            samples,
            iterations,
        } => cmd_verify(
            cli,
            suite,
            VerifyParams {
                q: *q,
                n: *n,
                k: *k,
                r: *r,
                t: *t,
                seed: *seed,
                samples: *samples,
                iterations: *iterations,
            },
            guard,
        ),
    }
}

fn emit_bound_report(
    em: &mut Emitter,
    rep: &qspace_core::audit::BoundReport,
) -> Result<(), CliError> {
    em.record(json_map(&[
        ("record", json!("bound")),
        ("named_bound", json!(rep.named_bound)),
        ("m", rep.m.map(|m| json!(m)).unwrap_or(Value::Null)),
        ("lhs_num", json!(rep.lhs_num)),
        ("lhs_den", json!(rep.lhs_den)),
        ("rhs_num", json!(rep.rhs_num)),
        ("rhs_den", json!(rep.rhs_den)),
        ("strict", json!(rep.strict)),
        ("holds", json!(rep.holds)),
    ]))
}

fn json_map(pairs: &[(&str, Value)]) -> Map<String, Value> {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert((*k).to_string(), v.clone());
    }
    m
}

fn nkqrt_map(p: &ParamsNKQRT) -> Map<String, Value> {
    json_map(&[
        ("n", json!(p.n)),
        ("k", json!(p.k)),
        ("q", json!(p.q)),
        ("r", json!(p.r)),
        ("t", json!(p.t)),
    ])
}

fn write_family(cli: &Cli, command: &str, fam: &Family) -> Result<i32, CliError> {
    let mut em = Emitter::new(&cli.out, false)?;
    em.raw(&format!(
        "# {}\n",
        Value::Object(config_echo(
            command,
            json_map(&[
                ("q", json!(fam.field().q())),
                ("n", json!(fam.ambient_dim())),
                ("k", json!(fam.uniformity())),
                ("members", json!(fam.len())),
            ])
        ))
    ))?;
    let mut buf = Vec::new();
    fam.write(&mut buf)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    em.raw(std::str::from_utf8(&buf).expect("family files are ASCII"))?;
    em.finish()?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// lemma1: intersection census against the closed form

fn cmd_lemma1(
    cli: &Cli,
    q: u32,
    n: usize,
    samples: Option<usize>,
    seed: u64,
) -> Result<i32, CliError> {
    use rand::seq::SliceRandom;
    let field = require_supported_q(q)?;
    let mut em = Emitter::new(&cli.out, cli.csv)?;
    em.record(config_echo(
        "lemma1",
        json_map(&[
            ("q", json!(q)),
            ("n", json!(n)),
            (
                "samples",
                samples.map(|s| json!(s)).unwrap_or(Value::Null),
            ),
            ("seed", json!(seed)),
        ]),
    ))?;
    let mut rng = rand_seeded(seed);
    let mut all_match = true;
    for i in 0..=n {
        let mut anchors: Vec<Subspace> = enumerate_subspaces(field, n, i)?.collect();
        if let Some(s) = samples {
            if anchors.len() > s {
                anchors.shuffle(&mut rng);
                anchors.truncate(s);
                anchors.sort_unstable();
            }
        }
        for j in 0..=n {
            for l in 0..=i.min(j) {
                let expected = intersection_count(n, j, q, i, l);
                let mut per_a: Option<u64> = None;
                let mut uniform = true;
                for a in &anchors {
                    let count = enumerate_subspaces(field, n, j)?
                        .filter(|b| a.intersection_dim(b).expect("same ambient") == l)
                        .count() as u64;
                    match per_a {
                        None => per_a = Some(count),
                        Some(prev) if prev != count => uniform = false,
                        _ => {}
                    }
                }
                let per_a = per_a.unwrap_or(0);
                let matches =
                    uniform && expected.to_u64().map(|e| e == per_a).unwrap_or(false);
                all_match &= matches;
                em.record(json_map(&[
                    ("record", json!("lemma1")),
                    ("q", json!(q)),
                    ("n", json!(n)),
                    ("i", json!(i)),
                    ("j", json!(j)),
                    ("l", json!(l)),
                    ("anchors_tested", json!(anchors.len())),
                    ("per_anchor_count", json!(per_a)),
                    ("uniform", json!(uniform)),
                    ("formula", json!(expected.to_string())),
                    ("match", json!(matches)),
                ]))?;
            }
        }
    }
    em.finish()?;
    if all_match {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_INVARIANT)
    }
}

fn rand_seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// verify suites

struct VerifyParams {
    q: Option<u32>,
    n: Option<usize>,
    k: Option<usize>,
    r: Option<usize>,
    t: Option<usize>,
    seed: u64,
    samples: Option<usize>,
    iterations: Option<u64>,
}

fn cmd_verify(cli: &Cli, suite: &str, p: VerifyParams, guard: Guard) -> Result<i32, CliError> {
    let mut em = Emitter::new(&cli.out, cli.csv)?;
    em.record(config_echo(
        "verify",
        json_map(&[
            ("suite", json!(suite)),
            ("q", p.q.map(|v| json!(v)).unwrap_or(Value::Null)),
            ("n", p.n.map(|v| json!(v)).unwrap_or(Value::Null)),
            ("k", p.k.map(|v| json!(v)).unwrap_or(Value::Null)),
            ("r", p.r.map(|v| json!(v)).unwrap_or(Value::Null)),
            ("t", p.t.map(|v| json!(v)).unwrap_or(Value::Null)),
            ("seed", json!(p.seed)),
        ]),
    ))?;

    let suites: Vec<&str> = if suite == "all" {
        vec![
            "field-axioms",
            "lemma1",
            "prop22",
            "projection",
            "lemma23-steps",
            "fstar-equality",
            "deletion-decrease",
            "lemma24",
        ]
    } else {
        vec![suite]
    };

    let mut passed = 0u64;
    let mut failed = 0u64;
    for s in suites {
        let checks = run_suite(s, &p, guard)?;
        for (check, pass, detail) in checks {
            if pass {
                passed += 1;
            } else {
                failed += 1;
            }
            em.record(json_map(&[
                ("record", json!("verify")),
                ("suite", json!(s)),
                ("check", json!(check)),
                ("pass", json!(pass)),
                ("detail", json!(detail)),
            ]))?;
        }
    }
    em.record(json_map(&[
        ("record", json!("verify_summary")),
        ("passed", json!(passed)),
        ("failed", json!(failed)),
    ]))?;
    em.finish()?;
    if failed == 0 {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_INVARIANT)
    }
}

type Check = (String, bool, String);

fn run_suite(suite: &str, p: &VerifyParams, guard: Guard) -> Result<Vec<Check>, CliError> {
    match suite {
        "field-axioms" => suite_field_axioms(p.q),
        "lemma1" => suite_lemma1(p.q.unwrap_or(2), p.n.unwrap_or(4), p.samples, p.seed),
        "prop22" => suite_prop22(),
        "projection" => suite_projection(p.q.unwrap_or(2), p.n.unwrap_or(4)),
        "lemma23-steps" => suite_lemma23(
            p.q.unwrap_or(2),
            p.n.unwrap_or(6),
            p.k.unwrap_or(3),
            p.r.unwrap_or(2),
            p.t.unwrap_or(1),
            guard,
        ),
        "fstar-equality" => suite_fstar(
            p.q.unwrap_or(2),
            p.n.unwrap_or(6),
            p.k.unwrap_or(3),
            p.r.unwrap_or(2),
            p.t.unwrap_or(1),
        ),
        "deletion-decrease" => suite_deletion(
            p.q.unwrap_or(2),
            p.n.unwrap_or(6),
            p.k.unwrap_or(3),
            p.r.unwrap_or(2),
            p.t.unwrap_or(1),
        ),
        "lemma24" => suite_lemma24(
            p.q.unwrap_or(2),
            p.n.unwrap_or(5),
            p.k.unwrap_or(3),
            p.r.unwrap_or(3),
            p.t.unwrap_or(1),
            p.seed,
            p.iterations.unwrap_or(4),
        ),
        other => Err(CliError::Validation(format!(
            "unknown suite {other:?}; available: field-axioms, lemma1, prop22, projection, \
             lemma23-steps, fstar-equality, deletion-decrease, lemma24, all"
        ))),
    }
}

fn suite_field_axioms(q: Option<u32>) -> Result<Vec<Check>, CliError> {
    let qs: Vec<u32> = match q {
        Some(q) => vec![q],
        None => SUPPORTED_Q.to_vec(),
    };
    let mut checks = Vec::new();
    for q in qs {
        let f = require_supported_q(q)?;
        let mut ok = true;
        for a in f.elements() {
            ok &= f.add(a, f.neg(a)) == 0;
            if a != 0 {
                ok &= f.mul(a, f.inv(a).expect("nonzero")) == 1;
            }
            for b in f.elements() {
                ok &= f.add(a, b) == f.add(b, a) && f.mul(a, b) == f.mul(b, a);
                for c in f.elements() {
                    ok &= f.add(f.add(a, b), c) == f.add(a, f.add(b, c));
                    ok &= f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c));
                    ok &= f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c));
                }
            }
        }
        checks.push((
            format!("axioms-q{q}"),
            ok,
            format!("{} triples", (q as u64).pow(3)),
        ));
    }
    Ok(checks)
}

fn suite_lemma1(
    q: u32,
    n: usize,
    samples: Option<usize>,
    seed: u64,
) -> Result<Vec<Check>, CliError> {
    use rand::seq::SliceRandom;
    let field = require_supported_q(q)?;
    let mut rng = rand_seeded(seed);
    let mut checks = Vec::new();
    for i in 0..=n {
        let mut anchors: Vec<Subspace> = enumerate_subspaces(field, n, i)?.collect();
        if let Some(s) = samples {
            if anchors.len() > s {
                anchors.shuffle(&mut rng);
                anchors.truncate(s);
            }
        }
        let mut ok = true;
        for a in &anchors {
            for j in 0..=n {
                for l in 0..=i.min(j) {
                    let count = enumerate_subspaces(field, n, j)?
                        .filter(|b| a.intersection_dim(b).expect("same ambient") == l)
                        .count() as u64;
                    let expected = intersection_count(n, j, q, i, l);
                    ok &= expected.to_u64() == Some(count);
                }
            }
        }
        checks.push((
            format!("census-dimA-{i}"),
            ok,
            format!("{} anchors", anchors.len()),
        ));
    }
    Ok(checks)
}

fn suite_prop22() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for q in [2u32, 3, 4, 5] {
        let mut ok = true;
        let mut first_fail = String::new();
        for m in 1..=12i64 {
            for i in 1..=m {
                if let Err(e) = check_identities(m, i, q) {
                    ok = false;
                    if first_fail.is_empty() {
                        first_fail = e.to_string();
                    }
                }
            }
        }
        checks.push((format!("identities-q{q}"), ok, first_fail));
    }
    Ok(checks)
}

fn suite_projection(q: u32, n: usize) -> Result<Vec<Check>, CliError> {
    let field = require_supported_q(q)?;
    let mut checks = Vec::new();
    for m in 1..=n {
        let mut ok = true;
        let mut fibers_seen = 0u64;
        for x in enumerate_subspaces(field, n, m)? {
            let y = x.complement();
            for k in (m.max(2) - 1).max(1)..n {
                if k + 1 - m > n - m {
                    continue;
                }
                let mut fibers: std::collections::HashMap<(String, String), u64> =
                    std::collections::HashMap::new();
                for f in enumerate_subspaces(field, n, k)? {
                    if f.intersection_dim(&x)? == m - 1 {
                        let (fx, fy) = f.project(&x, &y)?;
                        *fibers.entry((fx.encode(), fy.encode())).or_default() += 1;
                    }
                }
                let expected = (q as u64).pow((k + 1 - m) as u32);
                for size in fibers.values() {
                    ok &= *size == expected;
                    fibers_seen += 1;
                }
            }
        }
        checks.push((
            format!("uniform-fibers-dimX-{m}"),
            ok,
            format!("{fibers_seen} fibers"),
        ));
    }
    Ok(checks)
}

fn suite_lemma23(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    guard: Guard,
) -> Result<Vec<Check>, CliError> {
    let s = lemma23_step_counts(q, n, k, r, t, guard)?;
    Ok(vec![
        (
            "step2-hyperplane-tuples".into(),
            s.f_bound_holds,
            format!("f_exact = {}, bound = {}", s.f_exact, s.f_bound),
        ),
        (
            "step3-complement-tuples".into(),
            s.g_bound_holds,
            format!(
                "g_exact = {}, bound = {}/{}",
                s.g_exact,
                s.g_bound.numer(),
                s.g_bound.denom()
            ),
        ),
        (
            "step4-uniform-fibers".into(),
            s.fibers_uniform,
            format!("fiber size {}", s.fiber_size),
        ),
        (
            "step5-assembly-undercounts".into(),
            s.assembled_holds,
            format!(
                "assembled = {}/{}, exact = {}",
                s.assembled.numer(),
                s.assembled.denom(),
                s.n_exact
            ),
        ),
        (
            "step1-assemblies-are-simplices".into(),
            s.assemblies_are_simplices,
            format!("{} assemblies checked", s.assemblies_checked),
        ),
    ])
}

fn suite_fstar(q: u32, n: usize, k: usize, r: usize, t: usize) -> Result<Vec<Check>, CliError> {
    let field = require_supported_q(q)?;
    let x = Subspace::coordinate(field, n, &(0..r + t).collect::<Vec<_>>());
    let fam = build_f_x_k(&x, k)?;
    let star = build_f_star_x_k(&x, k)?;
    let (full_count, incidence) = count_simplices_with_incidence(&fam, r, t)?;
    let star_count = count_simplices_opts(&star, r, t, false)?;
    let equal = full_count.count == star_count.count;
    let located = fam
        .iter()
        .zip(&incidence)
        .all(|(m, &inc)| !m.contains(&x).expect("same ambient") || inc == 0);
    Ok(vec![
        (
            "full-equals-star-count".into(),
            equal,
            format!("{} vs {}", full_count.count, star_count.count),
        ),
        (
            "simplices-avoid-members-containing-x".into(),
            located,
            format!("{} members", fam.len()),
        ),
    ])
}

fn suite_deletion(q: u32, n: usize, k: usize, r: usize, t: usize) -> Result<Vec<Check>, CliError> {
    let field = require_supported_q(q)?;
    let x = Subspace::coordinate(field, n, &(0..r + t).collect::<Vec<_>>());
    let star = build_f_star_x_k(&x, k)?;
    let (count, incidence) = count_simplices_with_incidence(&star, r, t)?;
    let all_positive = incidence.iter().all(|&inc| inc > 0);
    // full recount after removing a few members, to pin the incidence logic
    let mut spot_ok = true;
    for &idx in &[0usize, star.len() / 2, star.len() - 1] {
        let mut reduced = star.clone();
        let member = star.member(idx).clone();
        reduced.remove(&member);
        let recount = count_simplices_opts(&reduced, r, t, false)?;
        let expected = count.count.clone() - qspace_core::BigCount::from(incidence[idx]);
        spot_ok &= recount.count == expected;
    }
    Ok(vec![
        (
            "every-member-participates".into(),
            all_positive,
            format!(
                "min incidence {}",
                incidence.iter().min().copied().unwrap_or(0)
            ),
        ),
        (
            "recount-matches-incidence".into(),
            spot_ok,
            "3 deletions".into(),
        ),
    ])
}

fn suite_lemma24(
    q: u32,
    n: usize,
    k: usize,
    r: usize,
    t: usize,
    seed: u64,
    iterations: u64,
) -> Result<Vec<Check>, CliError> {
    use qspace_core::family::derived_intersection_level;
    use qspace_core::search::sample_maximal_families;
    let fams = sample_maximal_families(q, n, k, r, t, seed, iterations)?;
    let mut checks = Vec::new();
    for (idx, fam) in fams.iter().enumerate() {
        let tau = fam.covering_number(t)?.tau;
        let level = derived_intersection_level(r as i64, tau as i64, t as i64) as usize;
        let mut ok = true;
        for i in 0..fam.len() {
            for j in i + 1..fam.len() {
                ok &= fam.member(i).intersection_dim(fam.member(j))? >= level;
            }
        }
        checks.push((
            format!("pairwise-level-sample-{idx}"),
            ok,
            format!("tau = {tau}, level = {level}, size = {}", fam.len()),
        ));
    }
    Ok(checks)
}
