//! Command-line front end for the exact Hodge-numerical calculus engine.
//!
//! Contract:
//! - results on stdout, diagnostics on stderr;
//! - `--format json` (or `HODGECONV_FORMAT=json`) emits deterministic JSON,
//!   and every emitted module document parses back through the same schema;
//! - exit codes: 0 success, 1 structural validation failure, 2 violated
//!   mathematical precondition, 3 I/O or parse problem.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hodgeconv::convolution::{
    kummer_mc_with, kunneth_check, middle_convolution, ConvolutionOptions, ConvolutionReport,
    MuSpec, SkyscraperMode,
};
use hodgeconv::hypergeometric::make_hypergeometric;
use hodgeconv::invariants::{derive_tables, h1par_hodge, validate_module, InvariantTables};
use hodgeconv::model::{rational_from_str, rational_to_string};
use hodgeconv::schema::module_to_value;
use hodgeconv::selfcheck::{run_selfcheck, SelfCheckReport};
use hodgeconv::tensor::tensor_global;
use hodgeconv::{
    parse_module, serialize_module, Error, GradedVector, LocalData, ModuleData, Rational, Residue,
    ValidationReport,
};

#[derive(Parser)]
#[command(
    name = "hodgeconv",
    version,
    about = "Exact calculus of Hodge-numerical data on the punctured affine line"
)]
struct Cli {
    /// Output format (default: human, or the value of HODGECONV_FORMAT)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a module descriptor against the structural invariants
    Validate { module: PathBuf },
    /// Print every derived local table and the global defects
    Derive { module: PathBuf },
    /// Tensor product, optionally with a reflection shift `t` applied to
    /// the second factor so that finite supports become disjoint
    Tensor {
        v: PathBuf,
        l: PathBuf,
        #[arg(long)]
        shift: Option<String>,
    },
    /// Additive middle convolution of two modules
    #[command(group(ArgGroup::new("sky").args(["skyscraper", "assume_no_skyscraper"])))]
    Convolve {
        v: PathBuf,
        l: PathBuf,
        /// Declare the punctual summand of the full convolution as `c,q`
        #[arg(long, value_name = "c,q")]
        skyscraper: Option<String>,
        /// Assert that the full convolution has no punctual summand
        #[arg(long)]
        assume_no_skyscraper: bool,
        /// Proceed on inputs not flagged irreducible
        #[arg(long)]
        waive_irreducibility: bool,
    },
    /// Middle convolution with a Kummer module of residue mu
    #[command(group(ArgGroup::new("parameter").required(true).args(["mu", "near_one"])))]
    Kummer {
        module: PathBuf,
        /// Exact residue in (0, 1), e.g. 2/5
        #[arg(long)]
        mu: Option<String>,
        /// The symbolic regime of residues approaching 1
        #[arg(long)]
        near_one: bool,
        /// Proceed on inputs not flagged irreducible
        #[arg(long)]
        waive_irreducibility: bool,
    },
    /// Hodge numbers of parabolic cohomology
    H1par {
        module: PathBuf,
        /// Proceed on inputs not flagged irreducible
        #[arg(long)]
        waive_irreducibility: bool,
    },
    /// The standard hypergeometric shape of rank m with residue a at infinity
    Hyper {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        a: String,
    },
    /// Run the deterministic self-check suite
    Selfcheck {
        #[arg(long, default_value_t = 40)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A failure carrying the exit code mandated by the CLI contract.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::ResidueOutOfRange(_) | Error::DuplicatePoint(_) => 3,
            Error::InvalidModule { .. } => 1,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(3)
                }
            };
        }
    };
    let format = match resolve_format(cli.format) {
        Ok(f) => f,
        Err(f) => {
            eprintln!("{}", f.message);
            return ExitCode::from(f.code);
        }
    };
    match run(cli.command, format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn resolve_format(flag: Option<Format>) -> Result<Format, Failure> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match std::env::var("HODGECONV_FORMAT") {
        Ok(s) => match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "human" => Ok(Format::Human),
            other => Err(Failure::new(
                3,
                format!("HODGECONV_FORMAT must be 'human' or 'json', got '{other}'"),
            )),
        },
        Err(_) => Ok(Format::Human),
    }
}

fn load(path: &Path) -> Result<ModuleData, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(3, format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_module(&text)?)
}

/// Load and reject structurally invalid inputs up front (exit class 1).
fn load_valid(path: &Path) -> Result<ModuleData, Failure> {
    let m = load(path)?;
    let report = validate_module(&m);
    if !report.is_valid() {
        let detail: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.code, v.message))
            .collect();
        return Err(Failure::new(
            1,
            format!("invalid module '{}': {}", m.name, detail.join("; ")),
        ));
    }
    for w in &report.warnings {
        eprintln!("warning: {}: {w}", m.name);
    }
    Ok(m)
}

/// Guard for emitted modules: every document the tool prints must itself
/// pass validation.
fn ensure_emittable(m: &ModuleData) -> Result<(), Failure> {
    let report = validate_module(m);
    if !report.is_valid() {
        let detail: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.code, v.message))
            .collect();
        return Err(Failure::new(
            1,
            format!(
                "refusing to emit inconsistent module '{}': {}",
                m.name,
                detail.join("; ")
            ),
        ));
    }
    Ok(())
}

fn run(command: Command, format: Format) -> Result<(), Failure> {
    match command {
        Command::Validate { module } => cmd_validate(&module, format),
        Command::Derive { module } => cmd_derive(&module, format),
        Command::Tensor { v, l, shift } => cmd_tensor(&v, &l, shift.as_deref(), format),
        Command::Convolve {
            v,
            l,
            skyscraper,
            assume_no_skyscraper,
            waive_irreducibility,
        } => cmd_convolve(
            &v,
            &l,
            skyscraper.as_deref(),
            assume_no_skyscraper,
            waive_irreducibility,
            format,
        ),
        Command::Kummer {
            module,
            mu,
            near_one,
            waive_irreducibility,
        } => cmd_kummer(&module, mu.as_deref(), near_one, waive_irreducibility, format),
        Command::H1par {
            module,
            waive_irreducibility,
        } => cmd_h1par(&module, waive_irreducibility, format),
        Command::Hyper { m, a } => cmd_hyper(m, &a, format),
        Command::Selfcheck { cases, seed } => cmd_selfcheck(cases, seed, format),
    }
}

// ---------------------------------------------------------------- verbs --

fn cmd_validate(path: &Path, format: Format) -> Result<(), Failure> {
    let m = load(path)?;
    let report = validate_module(&m);
    match format {
        Format::Json => print_json(&validation_to_value(&m.name, &report)),
        Format::Human => {
            println!(
                "module '{}': {}",
                m.name,
                if report.is_valid() { "valid" } else { "INVALID" }
            );
            for v in &report.violations {
                println!("  violation [{}] {}", v.code, v.message);
            }
            for w in &report.warnings {
                println!("  warning   {w}");
            }
        }
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::new(
            1,
            format!("module '{}' failed validation", m.name),
        ))
    }
}

fn cmd_derive(path: &Path, format: Format) -> Result<(), Failure> {
    let m = load_valid(path)?;
    let tables = derive_tables(&m)?;
    match format {
        Format::Json => print_json(&tables_to_value(&m, &tables)),
        Format::Human => print_tables_human(&m, &tables),
    }
    Ok(())
}

fn cmd_tensor(v: &Path, l: &Path, shift: Option<&str>, format: Format) -> Result<(), Failure> {
    let v = load_valid(v)?;
    let l = load_valid(l)?;
    let shift: Option<Rational> = match shift {
        Some(s) => Some(rational_from_str(s)?),
        None => None,
    };
    let t = tensor_global(&v, &l, shift.as_ref())?;
    for (at, o) in &t.o_terms {
        if !o.is_zero() {
            eprintln!("carry corrections at {at}: {}", gv_human(o));
        }
    }
    ensure_emittable(&t.module)?;
    match format {
        Format::Json => println!("{}", serialize_module(&t.module)),
        Format::Human => print_module_human(&t.module),
    }
    Ok(())
}

fn parse_skyscraper(spec: &str) -> Result<(Rational, i64), Failure> {
    let (c, q) = spec.split_once(',').ok_or_else(|| {
        Failure::new(3, format!("--skyscraper expects 'c,q', got '{spec}'"))
    })?;
    let c = rational_from_str(c.trim())?;
    let q: i64 = q
        .trim()
        .parse()
        .map_err(|e| Failure::new(3, format!("bad twist degree in --skyscraper: {e}")))?;
    Ok((c, q))
}

fn cmd_convolve(
    v: &Path,
    l: &Path,
    skyscraper: Option<&str>,
    assume_absent: bool,
    waive: bool,
    format: Format,
) -> Result<(), Failure> {
    let v = load_valid(v)?;
    let l = load_valid(l)?;
    let mode = match (skyscraper, assume_absent) {
        (Some(spec), _) => {
            let (c, q) = parse_skyscraper(spec)?;
            SkyscraperMode::Declared { c, q }
        }
        (None, true) => SkyscraperMode::AssumeAbsent,
        (None, false) => SkyscraperMode::Detect,
    };
    let opts = ConvolutionOptions {
        skyscraper: mode,
        waive_irreducibility: waive,
    };
    let mut report = middle_convolution(&v, &l, &opts)?;
    report.cross_checks.push(kunneth_check(&v, &l, &report, waive)?);
    emit_report(&report, format)
}

fn cmd_kummer(
    path: &Path,
    mu: Option<&str>,
    near_one: bool,
    waive: bool,
    format: Format,
) -> Result<(), Failure> {
    let m = load_valid(path)?;
    let spec = if near_one {
        MuSpec::NearOne
    } else {
        let mu = mu.expect("clap enforces the parameter group");
        MuSpec::Exact(Residue::new(rational_from_str(mu)?)?)
    };
    let report = kummer_mc_with(&m, &spec, true, waive)?;
    emit_report(&report, format)
}

fn cmd_h1par(path: &Path, waive: bool, format: Format) -> Result<(), Failure> {
    let m = load_valid(path)?;
    let h1 = h1par_hodge(&m, waive)?;
    match format {
        Format::Json => print_json(&json!({ "module": m.name, "h1par": gv_value(&h1) })),
        Format::Human => println!("h1par of '{}': {}", m.name, gv_human(&h1)),
    }
    Ok(())
}

fn cmd_hyper(m: u64, a: &str, format: Format) -> Result<(), Failure> {
    let a = Residue::new(rational_from_str(a)?)?;
    let module = make_hypergeometric(m, &a)?;
    ensure_emittable(&module)?;
    match format {
        Format::Json => println!("{}", serialize_module(&module)),
        Format::Human => print_module_human(&module),
    }
    Ok(())
}

fn cmd_selfcheck(cases: u64, seed: u64, format: Format) -> Result<(), Failure> {
    let report = run_selfcheck(seed, cases);
    match format {
        Format::Json => print_json(&selfcheck_to_value(&report)),
        Format::Human => {
            println!("self-check: seed {}, {} cases per law", report.seed, report.cases);
            for c in &report.checks {
                println!(
                    "  {} {} ({} cases{})",
                    if c.passed() { "ok  " } else { "FAIL" },
                    c.name,
                    c.cases,
                    if c.failures > 0 {
                        format!(", {} failures: {}", c.failures, c.detail)
                    } else {
                        String::new()
                    }
                );
            }
            println!(
                "result: {}",
                if report.all_passed() { "all passed" } else { "FAILED" }
            );
        }
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::new(1, "self-check failed"))
    }
}

// ------------------------------------------------------------- reporting --

fn emit_report(report: &ConvolutionReport, format: Format) -> Result<(), Failure> {
    ensure_emittable(&report.result)?;
    for line in &report.genericity {
        eprintln!("note: {line}");
    }
    for check in &report.cross_checks {
        if !check.pass {
            eprintln!("check failed: {}: {}", check.name, check.details);
        }
    }
    match format {
        Format::Json => print_json(&report_to_value(report)),
        Format::Human => {
            print_module_human(&report.result);
            if let Some(s) = &report.skyscraper {
                println!(
                    "skyscraper at c = {}, q = {}: {}",
                    rational_to_string(&s.c),
                    s.q,
                    if s.removed { "removed" } else { "assumed absent" }
                );
            }
            for check in &report.cross_checks {
                println!(
                    "check {} {}: {}",
                    if check.pass { "ok  " } else { "FAIL" },
                    check.name,
                    check.details
                );
            }
        }
    }
    Ok(())
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("sorted JSON"));
}

fn gv_value(v: &GradedVector) -> Value {
    let map: BTreeMap<String, i64> = v.iter().map(|(p, n)| (p.to_string(), n)).collect();
    json!(map)
}

fn validation_to_value(name: &str, report: &ValidationReport) -> Value {
    json!({
        "module": name,
        "valid": report.is_valid(),
        "violations": report
            .violations
            .iter()
            .map(|v| json!({ "code": v.code, "message": v.message }))
            .collect::<Vec<_>>(),
        "warnings": report.warnings,
    })
}

fn report_to_value(report: &ConvolutionReport) -> Value {
    let skyscraper = match &report.skyscraper {
        Some(s) => json!({
            "c": rational_to_string(&s.c),
            "q": s.q,
            "removed": s.removed,
            "epsilon": gv_value(&s.epsilon()),
        }),
        None => Value::Null,
    };
    json!({
        "report": {
            "result": module_to_value(&report.result),
            "skyscraper": skyscraper,
            "cross_checks": report
                .cross_checks
                .iter()
                .map(|c| json!({ "name": c.name, "pass": c.pass, "details": c.details }))
                .collect::<Vec<_>>(),
            "genericity": report.genericity,
        }
    })
}

fn selfcheck_to_value(report: &SelfCheckReport) -> Value {
    json!({
        "seed": report.seed,
        "cases": report.cases,
        "all_passed": report.all_passed(),
        "checks": report
            .checks
            .iter()
            .map(|c| json!({
                "name": c.name,
                "cases": c.cases,
                "failures": c.failures,
                "detail": c.detail,
            }))
            .collect::<Vec<_>>(),
    })
}

fn tables_to_value(m: &ModuleData, tables: &InvariantTables) -> Value {
    let mut points = Vec::new();
    for (at, t) in tables.known_points() {
        let nu: Vec<Value> = sorted_nu(&t.nu)
            .into_iter()
            .map(|((p, a), n)| json!({ "p": p, "a": a.to_string(), "count": n }))
            .collect();
        let mu0: BTreeMap<String, u64> = t
            .mu_zero
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(p, &n)| (p.to_string(), n))
            .collect();
        points.push(json!({
            "at": at.to_string(),
            "nu": nu,
            "mu0": mu0,
            "omega": gv_value(&t.omega),
            "omega_ss": gv_value(&t.omega_ss),
            "omega_u": gv_value(&t.omega_u),
            "kappa": gv_value(&t.kappa),
        }));
    }
    let unknown: Vec<String> = tables
        .unknown_points()
        .iter()
        .map(|p| p.to_string())
        .collect();
    json!({
        "module": m.name,
        "rank": m.rank().ok(),
        "omega_finite": tables.omega_not_infinity("derive").ok().map(gv_value),
        "omega_total": tables.omega_total("derive").ok().map(gv_value),
        "omega_scalar": tables.omega_scalar("derive").ok(),
        "unknown_points": unknown,
        "points": points,
    })
}

// ------------------------------------------------------- human rendering --

/// Residues ascending, then degrees ascending.
fn sorted_nu(nu: &BTreeMap<(i64, Residue), u64>) -> Vec<((i64, Residue), u64)> {
    let mut rows: Vec<((i64, Residue), u64)> = nu
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(k, &n)| (k.clone(), n))
        .collect();
    rows.sort_by(|((p1, a1), _), ((p2, a2), _)| a1.cmp(a2).then(p1.cmp(p2)));
    rows
}

fn gv_human(v: &GradedVector) -> String {
    let parts: Vec<String> = v.iter().map(|(p, n)| format!("{p}: {n}")).collect();
    if parts.is_empty() {
        "{}".into()
    } else {
        format!("{{ {} }}", parts.join(", "))
    }
}

fn print_module_human(m: &ModuleData) {
    println!("module '{}'", m.name);
    match m.rank() {
        Ok(r) => println!("  rank  {r}"),
        Err(_) => println!("  rank  (overflow)"),
    }
    println!("  h     {}", gv_human(&m.h));
    match &m.delta {
        Some(d) => println!("  delta {}", gv_human(d)),
        None => println!("  delta unknown"),
    }
    match &m.h1par {
        Some(t) => println!("  h1par {}", gv_human(t)),
        None => println!("  h1par unknown"),
    }
    println!(
        "  flags irreducible={} nonconstant={} minimal_extension={}",
        m.flags.irreducible, m.flags.nonconstant, m.flags.minimal_extension
    );
    for (at, data) in &m.points {
        println!("  point {at}");
        match data {
            LocalData::Unknown => println!("    (data unknown)"),
            LocalData::Blocks(b) => {
                for blk in b.sorted_for_display() {
                    println!(
                        "    block a={} l={} p={} mult={}",
                        blk.residue, blk.size, blk.degree, blk.mult
                    );
                }
            }
            LocalData::Aggregate(a) => {
                for ((p, res), n) in sorted_nu(&a.nu_nonzero) {
                    println!("    nu  a={res} p={p} count={n}");
                }
                for (p, n) in &a.mu_zero {
                    if *n > 0 {
                        println!("    mu0 p={p} count={n}");
                    }
                }
            }
        }
    }
    if !m.annotations.is_empty() {
        for (k, v) in &m.annotations {
            println!("  note  {k} = {v}");
        }
    }
}

fn print_tables_human(m: &ModuleData, tables: &InvariantTables) {
    println!("derived tables for '{}'", m.name);
    match m.rank() {
        Ok(r) => println!("  rank {r}"),
        Err(_) => println!("  rank (overflow)"),
    }
    for (at, t) in tables.known_points() {
        println!("  point {at}");
        for ((p, a), n) in sorted_nu(&t.nu) {
            println!("    nu    a={a} p={p} count={n}");
        }
        for (p, n) in &t.mu_zero {
            if *n > 0 {
                println!("    mu0   p={p} count={n}");
            }
        }
        println!("    omega {}", gv_human(&t.omega));
        if !t.kappa.is_zero() {
            println!("    kappa {}", gv_human(&t.kappa));
        }
    }
    for at in tables.unknown_points() {
        println!("  point {at}: data unknown");
    }
    if let Ok(of) = tables.omega_not_infinity("derive") {
        println!("  omega (finite)   {}", gv_human(of));
    }
    if let Ok(ot) = tables.omega_total("derive") {
        println!("  omega (total)    {}", gv_human(ot));
    }
    if let Ok(os) = tables.omega_scalar("derive") {
        println!("  omega (scalar)   {os}");
    }
}
