use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use weightcalc::bmt::{associated_matrix, conjugate_matrix, default_ells};
use weightcalc::func::{
    associated, conjugate, envelope_lower, envelope_upper_of_sequences, envelope_upper_on, gamma_indices, integral_form,
    relation_fn, slowly_varying_sequence_test, ClosedForm, GridSpec, WeightFunction, Window,
};
use weightcalc::io::{self, SequenceFamily};
use weightcalc::seq::{
    almost_decreasing_regularize, normalize_head, relation, uniform_bound, UniformBoundOptions, WeightSequence,
    DEFAULT_P0, DEFAULT_P_MAX,
};
use weightcalc::verify::{self, CheckReport, Params};
use weightcalc::Error;

const MIN_GRID_N: usize = 64;

/// Weight sequences, weight functions, conjugates, envelopes and weight matrices.
///
/// Objects are named inline as `family[:param]` (for example `gevrey:0.5`,
/// `power:2`, `log_squared`) or loaded from a `.json`/`.csv` file. Sequence
/// families used where a function is expected stand for their associated
/// function.
#[derive(Parser, Debug)]
#[command(name = "weightcalc", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Run every invocation listed in a JSON file (an array of argument arrays).
    #[arg(long)]
    manifest: Option<PathBuf>,

    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output format; `--eval` results default to plain numbers.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Write the artifact here (atomically) instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Recorded in the artifact; the computations are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Smallest grid point of the transforms.
    #[arg(long, global = true, default_value_t = 1e-2)]
    t_min: f64,
    /// Largest grid point of the transforms.
    #[arg(long, global = true, default_value_t = 1e8)]
    t_max: f64,
    /// Number of grid points (at least 64).
    #[arg(long = "n", global = true, default_value_t = 2048)]
    grid_n: usize,
    /// First index of sequence comparison windows.
    #[arg(long, global = true)]
    p0: Option<usize>,
    /// Start of the function window.
    #[arg(long = "T0", global = true)]
    window_t0: Option<f64>,
    /// End of the function window.
    #[arg(long = "T-max", global = true)]
    window_t_max: Option<f64>,
    /// Prefix length of sequences built from families.
    #[arg(long = "P-max", global = true, default_value_t = DEFAULT_P_MAX)]
    p_max: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// One object given by family flags or an input file.
#[derive(Args, Debug, Clone)]
struct Source {
    /// gevrey, exp_power, qgevrey, power, identity, t_log, log, log_squared, exp_log_squared.
    #[arg(long)]
    family: Option<String>,
    /// Gevrey exponent.
    #[arg(long)]
    s: Option<f64>,
    /// Exponent of exp_power.
    #[arg(long)]
    a: Option<f64>,
    /// Base of qgevrey.
    #[arg(long)]
    q: Option<f64>,
    /// Index of the power weight t^(1/alpha).
    #[arg(long)]
    alpha: Option<f64>,
    /// Sequence (.json/.csv) or function (descriptor .json / sampled .csv) file.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EnvelopeKind {
    Lower,
    Upper,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Associated function ω_M of a sequence.
    Assoc {
        #[command(flatten)]
        src: Source,
        /// Points to evaluate at; without them the grid is sampled.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        eval: Vec<f64>,
        /// Use the counting-integral representation.
        #[arg(long)]
        integral: bool,
    },
    /// Conjugate sequence M*_p = p!/M_p.
    ConjSeq {
        #[command(flatten)]
        src: Source,
    },
    /// Conjugate function ω*(s) = sup_t {st − ω(t)}.
    ConjFn {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        eval: Vec<f64>,
    },
    /// Lower or upper Legendre envelope of σ and τ.
    Envelope {
        #[arg(long, value_enum)]
        kind: EnvelopeKind,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        tau: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        eval: Vec<f64>,
    },
    /// Growth indices γ and γ̄ on the window.
    Indices {
        #[command(flatten)]
        src: Source,
    },
    /// Growth relation between two sequences, or two functions with --functions.
    Relation {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        functions: bool,
    },
    /// Associated weight matrix of a function.
    Matrix {
        #[command(flatten)]
        src: Source,
        /// Matrix parameters ℓ (default 2^k, k = −3..3).
        #[arg(long, value_delimiter = ',')]
        ells: Vec<f64>,
        /// Emit the conjugate matrix instead.
        #[arg(long)]
        conjugate: bool,
    },
    /// Almost-decreasing regularization of μ_p/p.
    Regularize {
        #[command(flatten)]
        src: Source,
        /// Also normalize the head of the result.
        #[arg(long)]
        normalize_head: bool,
    },
    /// Uniform bound sequence for a family of small sequences.
    UniformBound {
        /// Family member as a name or file, repeatable.
        #[arg(long = "member", required = true)]
        members: Vec<String>,
        /// Divide the family by the small sequence of this base first and
        /// multiply the result back afterwards.
        #[arg(long)]
        remark_base: Option<String>,
    },
    /// Sequence-side test for a slowly varying associated function.
    SlowlyVarying {
        #[command(flatten)]
        src: Source,
    },
    /// Run verification checks.
    Verify {
        /// Every check with its default parameter sets.
        #[arg(long, conflicts_with = "check")]
        all: bool,
        /// Check id, repeatable.
        #[arg(long)]
        check: Vec<String>,
        /// Check parameter as key=value, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// List the registered check ids.
        #[arg(long)]
        list: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Assoc { .. } => "assoc",
            Command::ConjSeq { .. } => "conj-seq",
            Command::ConjFn { .. } => "conj-fn",
            Command::Envelope { .. } => "envelope",
            Command::Indices { .. } => "indices",
            Command::Relation { .. } => "relation",
            Command::Matrix { .. } => "matrix",
            Command::Regularize { .. } => "regularize",
            Command::UniformBound { .. } => "uniform-bound",
            Command::SlowlyVarying { .. } => "slowly-varying",
            Command::Verify { .. } => "verify",
        }
    }
}

/// Either kind of object a name or file can denote.
enum Object {
    Sequence(WeightSequence),
    Function(WeightFunction),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn need(v: Option<f64>, flag: &str, family: &str) -> Result<f64, Error> {
    v.ok_or_else(|| usage(format!("family {family} needs --{flag}")))
}

fn build_family(family: &str, param: impl Fn(&str) -> Result<f64, Error>, p_max: usize) -> Result<Object, Error> {
    let fam = family.replace('-', "_");
    let seq = |f: SequenceFamily| f.build(p_max).map(Object::Sequence);
    let closed = |c: ClosedForm| WeightFunction::closed(c).map(Object::Function);
    match fam.as_str() {
        "gevrey" => seq(SequenceFamily::Gevrey { s: param("s")? }),
        "exp_power" => seq(SequenceFamily::ExpPower { a: param("a")? }),
        "qgevrey" => seq(SequenceFamily::Qgevrey { q: param("q")? }),
        "power" => closed(ClosedForm::Power { alpha: param("alpha")? }),
        "identity" | "id" => Ok(Object::Function(WeightFunction::identity())),
        "t_log" => closed(ClosedForm::TLog),
        "log" => closed(ClosedForm::Log),
        "log_squared" => closed(ClosedForm::LogSquared),
        "exp_log_squared" => closed(ClosedForm::ExpLogSquared),
        other => Err(usage(format!(
            "unknown family {other:?}; expected gevrey, exp_power, qgevrey, power, identity, t_log, log, log_squared or exp_log_squared"
        ))),
    }
}

/// Reads a file as a sequence when it parses as one, otherwise as a function.
fn load(path: &Path) -> Result<Object, Error> {
    match io::read_sequence(path) {
        Ok(s) => Ok(Object::Sequence(s)),
        Err(Error::Io(e)) => Err(Error::Io(e)),
        Err(seq_err) => io::read_function(path)
            .map(Object::Function)
            .map_err(|fn_err| Error::Format(format!("{}: not a sequence ({seq_err}) nor a function ({fn_err})", path.display()))),
    }
}

/// `family[:param]` or a path.
fn parse_ref(text: &str, p_max: usize) -> Result<Object, Error> {
    let path = Path::new(text);
    if path.exists() {
        return load(path);
    }
    let (family, param) = match text.split_once(':') {
        Some((f, p)) => (f, Some(p)),
        None => (text, None),
    };
    let value = param
        .map(|p| p.parse::<f64>().map_err(|_| usage(format!("bad parameter {p:?} in {text:?}"))))
        .transpose()?;
    build_family(family, |_| value.ok_or_else(|| usage(format!("{text:?} needs a parameter, as in {family}:1"))), p_max)
}

impl Source {
    fn object(&self, p_max: usize) -> Result<Object, Error> {
        match (&self.input, &self.family) {
            (Some(_), Some(_)) => Err(usage("give either --input or --family, not both")),
            (Some(path), None) => load(path),
            (None, Some(f)) => build_family(
                f,
                |flag| {
                    let v = match flag {
                        "s" => self.s,
                        "a" => self.a,
                        "q" => self.q,
                        _ => self.alpha,
                    };
                    need(v, flag, f)
                },
                p_max,
            ),
            (None, None) => Err(usage("an object is needed: --family NAME or --input FILE")),
        }
    }
}

fn as_sequence(o: Object, what: &str) -> Result<WeightSequence, Error> {
    match o {
        Object::Sequence(s) => Ok(s),
        Object::Function(f) => Err(usage(format!("{what} needs a sequence, got the function {}", f.name()))),
    }
}

fn as_function(o: Object) -> Result<WeightFunction, Error> {
    match o {
        Object::Sequence(s) => associated(&s),
        Object::Function(f) => Ok(f),
    }
}

/// A finished artifact before formatting.
enum Artifact {
    /// JSON value plus an optional dedicated CSV rendering.
    Data { json: Value, csv: Option<String> },
    /// Plain evaluations `(t, value)`.
    Evals(Vec<(f64, f64)>),
}

fn data(json: impl Serialize, csv: Option<String>) -> Result<Artifact, Error> {
    Ok(Artifact::Data {
        json: serde_json::to_value(json)?,
        csv,
    })
}

/// CSV for a JSON object: one `key,value` row per field.
fn object_to_csv(v: &Value) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"]).map_err(|e| Error::Format(e.to_string()))?;
    if let Value::Object(m) = v {
        for (k, x) in m {
            let cell = match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            w.write_record([k.as_str(), cell.as_str()]).map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

struct Ctx<'a> {
    common: &'a Common,
    grid: GridSpec,
}

impl Ctx<'_> {
    fn window(&self, hint: f64) -> Result<Window, Error> {
        let tail = Window::tail(hint);
        let c = self.common;
        if c.window_t0.is_none() && c.window_t_max.is_none() {
            return Ok(tail);
        }
        Window::new(c.window_t0.unwrap_or(tail.t0), c.window_t_max.unwrap_or(tail.t_max), tail.n)
            .map_err(|e| usage(e.to_string()))
    }

    fn samples(&self, f: &WeightFunction, eval: &[f64]) -> Result<Artifact, Error> {
        if !eval.is_empty() {
            return Ok(Artifact::Evals(eval.iter().map(|&t| (t, f.eval(t))).collect()));
        }
        let mut grid = self.grid;
        if f.domain_hint() < grid.t_max && f.domain_hint() > grid.t_min {
            grid.t_max = f.domain_hint();
        }
        let ts = grid.log_points();
        let vs = f.eval_many(&ts);
        let csv = io::samples_to_csv(&ts, &vs)?;
        data(
            json!({"function": f.name(), "domain_hint": finite_or_null(f.domain_hint()), "t": ts, "value": vs}),
            Some(csv),
        )
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn sequence_artifact(seq: &WeightSequence, extra: Option<(&str, Value)>) -> Result<Artifact, Error> {
    let mut json = serde_json::to_value(seq)?;
    if let (Some((k, v)), Value::Object(m)) = (extra, &mut json) {
        m.insert(k.into(), v);
    }
    Ok(Artifact::Data {
        json,
        csv: Some(io::sequence_to_csv(seq)?),
    })
}

fn run_command(cmd: &Command, ctx: &Ctx) -> Result<(Artifact, bool), Error> {
    let p_max = ctx.common.p_max;
    let ok = |a| Ok((a, true));
    match cmd {
        Command::Assoc { src, eval, integral } => {
            let m = as_sequence(src.object(p_max)?, "assoc")?;
            let f = if *integral { integral_form(&m) } else { associated(&m)? };
            ok(ctx.samples(&f, eval)?)
        }
        Command::ConjSeq { src } => {
            let m = as_sequence(src.object(p_max)?, "conj-seq")?;
            ok(sequence_artifact(&m.conjugate(), None)?)
        }
        Command::ConjFn { src, eval } => {
            let f = as_function(src.object(p_max)?)?;
            ok(ctx.samples(&conjugate(&f, &ctx.grid)?, eval)?)
        }
        Command::Envelope { kind, sigma, tau, eval } => {
            let (a, b) = (parse_ref(sigma, p_max)?, parse_ref(tau, p_max)?);
            let f = match (kind, a, b) {
                // Finiteness of ω_M⋆̂ω_N is decided on the sequences.
                (EnvelopeKind::Upper, Object::Sequence(m), Object::Sequence(n)) => {
                    envelope_upper_of_sequences(&m, &n, &ctx.grid)?
                }
                (EnvelopeKind::Upper, a, b) => {
                    let (s, t) = (as_function(a)?, as_function(b)?);
                    let window = ctx.window(s.domain_hint().min(t.domain_hint()))?;
                    envelope_upper_on(&s, &t, &ctx.grid, &window)?
                }
                (EnvelopeKind::Lower, a, b) => envelope_lower(&as_function(a)?, &as_function(b)?, &ctx.grid)?,
            };
            ok(ctx.samples(&f, eval)?)
        }
        Command::Indices { src } => {
            let f = as_function(src.object(p_max)?)?;
            let est = gamma_indices(&f, &ctx.window(f.domain_hint())?);
            let json = serde_json::to_value(&est)?;
            let csv = object_to_csv(&json)?;
            ok(Artifact::Data { json, csv: Some(csv) })
        }
        Command::Relation { left, right, functions } => {
            let (a, b) = (parse_ref(left, p_max)?, parse_ref(right, p_max)?);
            let json = if *functions {
                let (f, g) = (as_function(a)?, as_function(b)?);
                let w = ctx.window(f.domain_hint().min(g.domain_hint()))?;
                serde_json::to_value(relation_fn(&f, &g, &w))?
            } else {
                let (m, n) = (as_sequence(a, "relation")?, as_sequence(b, "relation")?);
                let p0 = ctx.common.p0.unwrap_or(DEFAULT_P0.min(m.p_max() / 2).max(1));
                serde_json::to_value(relation(&m, &n, p0)?)?
            };
            let csv = object_to_csv(&json)?;
            ok(Artifact::Data { json, csv: Some(csv) })
        }
        Command::Matrix { src, ells, conjugate } => {
            let f = as_function(src.object(p_max)?)?;
            let ells = if ells.is_empty() { default_ells() } else { ells.clone() };
            let mut mat = associated_matrix(&f, &ells, p_max, &ctx.grid)?;
            if *conjugate {
                mat = conjugate_matrix(&mat)?;
            }
            let csv = io::matrix_to_csv(&mat)?;
            ok(data(&mat, Some(csv))?)
        }
        Command::Regularize { src, normalize_head: head } => {
            let m = as_sequence(src.object(p_max)?, "regularize")?;
            let reg = almost_decreasing_regularize(&m)?;
            let seq = if *head { normalize_head(&reg.sequence) } else { reg.sequence.clone() };
            ok(sequence_artifact(&seq, Some(("regularization_h", json!(reg.h))))?)
        }
        Command::UniformBound { members, remark_base } => {
            let family = members
                .iter()
                .map(|r| parse_ref(r, p_max).and_then(|o| as_sequence(o, "uniform-bound")))
                .collect::<Result<Vec<_>, _>>()?;
            let opts = UniformBoundOptions {
                remark_base: remark_base
                    .as_deref()
                    .map(|r| parse_ref(r, p_max).and_then(|o| as_sequence(o, "uniform-bound")))
                    .transpose()?,
            };
            let ub = uniform_bound(&family, &opts)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let fmt = |e: csv::Error| Error::Format(e.to_string());
            w.write_record(["j", "log_a", "log_root"]).map_err(fmt)?;
            for (j, (a, r)) in ub.log_a.iter().zip(&ub.log_roots).enumerate() {
                w.write_record([j.to_string(), a.to_string(), r.to_string()]).map_err(fmt)?;
            }
            let csv = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
                .map_err(|e| Error::Format(e.to_string()))?;
            ok(data(&ub, Some(csv))?)
        }
        Command::SlowlyVarying { src } => {
            let m = as_sequence(src.object(p_max)?, "slowly-varying")?;
            let v = slowly_varying_sequence_test(&m)?;
            let json = serde_json::to_value(&v)?;
            let csv = object_to_csv(&json)?;
            ok(Artifact::Data { json, csv: Some(csv) })
        }
        Command::Verify { all, check, params, list } => {
            if *list {
                return ok(data(verify::CHECK_IDS, None)?);
            }
            let reports = run_verify(*all, check, params)?;
            eprint!("{}", verify::format_table(&reports));
            let passed = reports.iter().all(|r| r.status != verify::Status::Fail);
            Ok((data(&reports, None)?, passed))
        }
    }
}

fn parse_params(raw: &[String]) -> Result<Params, Error> {
    let mut p = Params::new();
    for kv in raw {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--param expects key=value, got {kv:?}")))?;
        let value = match v.parse::<f64>() {
            Ok(x) if x.is_finite() => json!(x),
            _ => json!(v),
        };
        p.insert(k.trim().to_string(), value);
    }
    Ok(p)
}

fn run_verify(all: bool, checks: &[String], raw: &[String]) -> Result<Vec<CheckReport>, Error> {
    if all {
        if !raw.is_empty() {
            return Err(usage("--param cannot be combined with --all"));
        }
        return Ok(verify::run_all());
    }
    if checks.is_empty() {
        return Err(usage("verify needs --all or at least one --check ID"));
    }
    let params = parse_params(raw)?;
    let mut out = Vec::new();
    for id in checks {
        let sets = if raw.is_empty() { verify::default_params(id)? } else { vec![params.clone()] };
        for p in sets {
            out.push(verify::run_check(id, &p)?);
        }
    }
    Ok(out)
}

fn render(artifact: Artifact, common: &Common, cmd: &str) -> Result<String, Error> {
    match artifact {
        Artifact::Evals(points) => Ok(match common.format {
            None => points.iter().map(|(_, v)| format!("{v}\n")).collect(),
            Some(Format::Csv) => io::samples_to_csv(
                &points.iter().map(|p| p.0).collect::<Vec<_>>(),
                &points.iter().map(|p| p.1).collect::<Vec<_>>(),
            )?,
            Some(Format::Json) => {
                let rows: Vec<Value> = points.iter().map(|(t, v)| json!({"t": t, "value": v})).collect();
                serde_json::to_string_pretty(&rows)? + "\n"
            }
        }),
        Artifact::Data { json, csv } => match common.format.unwrap_or(Format::Json) {
            Format::Csv => csv.ok_or_else(|| usage(format!("{cmd} has no CSV form; use --format json"))),
            Format::Json => {
                let mut json = json;
                if let Value::Object(m) = &mut json {
                    let mut meta = Map::new();
                    meta.insert("command".into(), json!(cmd));
                    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
                    meta.insert("seed".into(), json!(common.seed));
                    m.insert("meta".into(), Value::Object(meta));
                }
                Ok(serde_json::to_string_pretty(&json)? + "\n")
            }
        },
    }
}

fn grid_of(c: &Common) -> Result<GridSpec, Error> {
    if c.grid_n < MIN_GRID_N {
        return Err(usage(format!("--n must be at least {MIN_GRID_N}, got {}", c.grid_n)));
    }
    GridSpec::new(c.t_min, c.t_max, c.grid_n).map_err(|e| usage(e.to_string()))
}

/// 0 on success, 1 when a verification failed, 2 on usage or precondition errors.
fn execute(cli: &Cli) -> u8 {
    if let Some(path) = &cli.manifest {
        return run_manifest(path);
    }
    let Some(cmd) = &cli.command else {
        eprintln!("error: a subcommand or --manifest is required (see --help)");
        return 2;
    };
    let result = grid_of(&cli.common).and_then(|grid| {
        let ctx = Ctx { common: &cli.common, grid };
        let (artifact, passed) = run_command(cmd, &ctx)?;
        let text = render(artifact, &cli.common, cmd.name())?;
        match &cli.common.output {
            Some(path) => io::write_atomic(path, text.as_bytes())?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run_manifest(path: &Path) -> u8 {
    let runs: Vec<Vec<String>> = match std::fs::read_to_string(path)
        .map_err(Error::from)
        .and_then(|t| serde_json::from_str(&t).map_err(Error::from))
    {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: manifest {}: {e}", path.display());
            return 2;
        }
    };
    let mut worst = 0;
    for (k, args) in runs.iter().enumerate() {
        let argv = std::iter::once("weightcalc".to_string()).chain(args.iter().cloned());
        let code = match Cli::try_parse_from(argv) {
            Ok(cli) if cli.manifest.is_some() => {
                eprintln!("error: manifest entry {k} nests another manifest");
                2
            }
            Ok(cli) => execute(&cli),
            Err(e) => {
                eprintln!("error: manifest entry {k}: {e}");
                2
            }
        };
        eprintln!("[{k}] exit {code}: {}", args.join(" "));
        worst = worst.max(code);
    }
    worst
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    ExitCode::from(execute(&cli))
}
