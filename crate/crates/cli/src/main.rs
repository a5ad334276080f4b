//! `welschinger`: single computations, the reference table, trace dumps,
//! property scans, chains and cache management.
//!
//! Exit codes: 0 ok, 1 property violation, 2 parse error, 3 validation
//! error, 4 internal assertion.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use welschinger_core::invariants::{
    self, ComparisonRow, MonotonicityReport, ScanRow, TABLE_COLUMNS, TABLE_ROWS,
};
use welschinger_core::{
    totals_json, CacheFile, Engine, Error, Lattice, Model, SurfaceSpec, TangencyVector, Twist,
};

use output::{Format, Out};

#[derive(Parser)]
#[command(
    name = "welschinger",
    version,
    about = "Exact Welschinger invariants of real del Pezzo surfaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Worker threads for evaluation (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Persistent cache file.
    #[arg(long, global = true, env = "WELSCHINGER_CACHE")]
    cache: Option<PathBuf>,

    /// Ignore any cache file.
    #[arg(long, global = true)]
    no_cache: bool,

    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    #[arg(long, global = true)]
    csv: bool,

    /// Omit timing and scheduling-dependent statistics.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Args, Clone)]
struct SurfaceArgs {
    /// P2[a,b], B1 (two-component cubic) or B (conic bundle).
    #[arg(long)]
    surface: String,

    /// 0 (untwisted) or F.
    #[arg(long, default_value = "0")]
    twist: String,

    /// 1-based indices of curves to contract, comma separated.
    #[arg(long, value_delimiter = ',')]
    blowdown: Vec<usize>,

    /// Auxiliary real line.
    #[arg(long = "E", allow_hyphen_values = true)]
    e: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Positivity,
    Monotonicity,
    Symmetry,
    Blowdown,
    Epath,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheAction {
    /// Path, record count and per-surface counts.
    Show,
    /// Parse the file and check its trailer.
    Verify,
    /// Delete the file.
    Clear,
}

#[derive(Subcommand)]
enum Cmd {
    /// W(D) for one class.
    Compute {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Also report W(nD) for n = 1..N with the growth ratio.
        #[arg(long)]
        multiples: Option<u32>,
    },
    /// The reference table of W(-K), W(-2K), checked against the published values.
    Table,
    /// JSON lines: every term of one recursion step, then the total.
    Trace {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
    },
    /// Property suites over all nef and big real classes with -K.D <= bound.
    Scan {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        bound: i64,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// A chain of real lines from D' to D and the monotonicity inequality.
    Chain {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Inspect or reset the cache file.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(Error::Parse(_)) => 2,
            Failure::Core(Error::Internal(_)) => 4,
            Failure::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

/// Engines created during one invocation, seeded from and saved back to the
/// cache file.
struct Session {
    cache_path: Option<PathBuf>,
    file: CacheFile,
    engines: Vec<Arc<Engine>>,
}

impl Session {
    fn open(cli: &Cli) -> Run<Self> {
        let cache_path = if cli.no_cache {
            None
        } else {
            cli.cache.clone()
        };
        let file = match &cache_path {
            Some(p) if p.exists() => CacheFile::load(p)?,
            _ => CacheFile::new(),
        };
        Ok(Self {
            cache_path,
            file,
            engines: Vec::new(),
        })
    }

    fn engine(&mut self, spec: SurfaceSpec) -> Run<Arc<Engine>> {
        let e = Arc::new(Engine::new(spec));
        self.file.seed(&e)?;
        self.engines.push(e.clone());
        Ok(e)
    }

    fn close(mut self) -> Run<()> {
        if let Some(p) = &self.cache_path {
            for e in &self.engines {
                self.file.absorb(e);
            }
            self.file.save(p)?;
        }
        Ok(())
    }
}

fn build_spec(args: &SurfaceArgs) -> Run<SurfaceSpec> {
    let model: Model = args.surface.parse()?;
    let twist: Twist = args.twist.parse()?;
    let e = match &args.e {
        Some(text) => {
            let lattice = match model {
                Model::Plane { .. } => Lattice::plane(),
                Model::CubicTwoComponent | Model::ConicBundle => Lattice::cubic_real(),
            };
            Some(lattice.parse_class(text)?)
        }
        None => None,
    };
    Ok(SurfaceSpec::new(model, twist, &args.blowdown, e)?)
}

/// Whether the positivity theorems cover the surface.
fn positivity_in_scope(spec: &SurfaceSpec) -> bool {
    match spec.model() {
        Model::Plane { real, pairs } => real as usize + 2 * pairs as usize <= 6 && pairs <= 2,
        Model::CubicTwoComponent | Model::ConicBundle => spec.twist() == Twist::PhiF,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("usage error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("internal assertion failed: thread pool: {e}");
            return ExitCode::from(4);
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    eprintln!("# invocation: welschinger {}", args.join(" "));

    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli)));
    match result {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(f)) => {
            eprintln!("{f}");
            if let Failure::Core(
                Error::CacheVersion { .. } | Error::CacheRecord { .. } | Error::CacheIntegrity(_),
            ) = f
            {
                eprintln!("hint: run `welschinger cache clear` or pass --no-cache");
            }
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(4),
    }
}

fn run(cli: &Cli) -> Run<u8> {
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Plain
    };
    let mut out = Out::new(format);
    if let Cmd::Cache { action } = &cli.cmd {
        return cache_cmd(cli, *action, &mut out);
    }
    let mut session = Session::open(cli)?;
    let code = match &cli.cmd {
        Cmd::Compute {
            surface,
            class,
            multiples,
        } => compute(cli, &mut session, &mut out, surface, class, *multiples)?,
        Cmd::Table => table(&mut session, &mut out)?,
        Cmd::Trace {
            surface,
            class,
            alpha,
            beta,
        } => trace(
            &mut session,
            &mut out,
            surface,
            class,
            alpha.as_deref(),
            beta.as_deref(),
        )?,
        Cmd::Scan {
            surface,
            bound,
            mode,
        } => scan(&mut session, &mut out, surface, *bound, *mode)?,
        Cmd::Chain {
            surface,
            from,
            class,
        } => chain(&mut session, &mut out, surface, from, class)?,
        Cmd::Cache { .. } => unreachable!("handled above"),
    };
    out.flush();
    session.close()?;
    Ok(code)
}

fn compute(
    cli: &Cli,
    session: &mut Session,
    out: &mut Out,
    surface: &SurfaceArgs,
    class: &str,
    multiples: Option<u32>,
) -> Run<u8> {
    let spec = build_spec(surface)?;
    let d = spec.parse_class(class)?;
    let engine = session.engine(spec)?;
    let timing = !cli.no_timing;
    if let Some(n_max) = multiples {
        let rows = invariants::growth_report(&engine, &d, n_max)?;
        match out.format() {
            Format::Plain => {
                for r in &rows {
                    let ratio = r
                        .ratio
                        .map(|x| format!("{x:.6}"))
                        .unwrap_or_else(|| "-".to_string());
                    out.line(format!("{} {} {}", r.n, r.value, ratio));
                }
            }
            _ => out.rows(&rows)?,
        }
        return Ok(0);
    }
    let report = invariants::report(&engine, &d, timing)?;
    match out.format() {
        Format::Plain => {
            out.line(report.value.to_string());
            if let Some(ms) = report.elapsed_ms {
                eprintln!("# {} {} in {ms:.1} ms", report.surface, report.class);
            }
        }
        Format::Json => out.json(&report)?,
        Format::Csv => out.rows(std::slice::from_ref(&report.flat()))?,
    }
    Ok(0)
}

trait Flat {
    fn flat(&self) -> FlatReport;
}

#[derive(Serialize)]
struct FlatReport {
    surface: String,
    class: String,
    value: String,
    point_count: i64,
    elapsed_ms: Option<f64>,
}

impl Flat for invariants::InvariantReport {
    fn flat(&self) -> FlatReport {
        FlatReport {
            surface: self.surface.clone(),
            class: self.class.clone(),
            value: self.value.to_string(),
            point_count: self.point_count,
            elapsed_ms: self.elapsed_ms,
        }
    }
}

fn table(session: &mut Session, out: &mut Out) -> Run<u8> {
    let t = Instant::now();
    let mut engines = Vec::new();
    for c in TABLE_COLUMNS {
        engines.push(session.engine(SurfaceSpec::new(c.model, c.twist, &[], None)?)?);
    }
    let values = TABLE_ROWS
        .iter()
        .map(|row| {
            engines
                .iter()
                .map(|e| invariants::welschinger(e, &e.spec().parse_class(row)?))
                .collect::<welschinger_core::Result<Vec<_>>>()
        })
        .collect::<welschinger_core::Result<Vec<_>>>()?;
    let mut mismatches = Vec::new();
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let gold = invariants::GOLDEN_TABLE[r][c];
            if v != &gold.into() {
                mismatches.push(format!(
                    "{} {}: got {v}, expected {gold}",
                    TABLE_ROWS[r], TABLE_COLUMNS[c].label
                ));
            }
        }
    }
    let labels: Vec<&str> = TABLE_COLUMNS.iter().map(|c| c.label).collect();
    match out.format() {
        Format::Plain => {
            let mut header = format!("{:<5}", "D");
            for l in &labels {
                header.push_str(&format!("{l:>9}"));
            }
            out.line(header);
            for (r, row) in values.iter().enumerate() {
                let mut line = format!("{:<5}", TABLE_ROWS[r]);
                for v in row {
                    line.push_str(&format!("{v:>9}"));
                }
                out.line(line);
            }
            if mismatches.is_empty() {
                out.line("golden: all 16 values match".to_string());
            } else {
                for m in &mismatches {
                    out.line(format!("golden mismatch: {m}"));
                }
            }
        }
        Format::Json => {
            let rows: Vec<_> = values
                .iter()
                .enumerate()
                .map(|(r, row)| json!({"class": TABLE_ROWS[r], "values": row.iter().map(|v| v.to_string()).collect::<Vec<_>>()}))
                .collect();
            out.json(&json!({"columns": labels, "rows": rows, "golden_match": mismatches.is_empty(), "mismatches": mismatches}))?;
        }
        Format::Csv => {
            let mut rows = vec![std::iter::once("class")
                .chain(labels.iter().copied())
                .map(String::from)
                .collect::<Vec<_>>()];
            for (r, row) in values.iter().enumerate() {
                rows.push(
                    std::iter::once(TABLE_ROWS[r].to_string())
                        .chain(row.iter().map(|v| v.to_string()))
                        .collect(),
                );
            }
            out.records(&rows)?;
        }
    }
    eprintln!("# table in {:.2} s", t.elapsed().as_secs_f64());
    Ok(if mismatches.is_empty() { 0 } else { 1 })
}

fn trace(
    session: &mut Session,
    out: &mut Out,
    surface: &SurfaceArgs,
    class: &str,
    alpha: Option<&str>,
    beta: Option<&str>,
) -> Run<u8> {
    let spec = build_spec(surface)?;
    let d = spec.parse_class(class)?;
    let a: TangencyVector = alpha.unwrap_or("0").parse()?;
    let b: TangencyVector = match beta {
        Some(t) => t.parse()?,
        None => {
            let de = spec.dot(&d, spec.e()) - a.iweight() as i64;
            if de < 0 {
                return Err(Failure::Core(Error::Validation(format!(
                    "alpha {a} exceeds the E-degree of the class"
                ))));
            }
            TangencyVector::scaled_theta(1, de as u32)
        }
    };
    let engine = session.engine(spec)?;
    let terms = engine.expand(&d, &a, &b)?;
    let value = engine.eval(&d, &a, &b)?;
    for t in &terms {
        out.line(t.to_json(engine.spec(), &d, &a, &b).to_string());
    }
    out.line(totals_json(engine.spec(), &d, &a, &b, terms.len(), &value).to_string());
    Ok(0)
}

fn scan(
    session: &mut Session,
    out: &mut Out,
    surface: &SurfaceArgs,
    bound: i64,
    mode: Mode,
) -> Run<u8> {
    if bound < 1 {
        return Err(Failure::Core(Error::Validation(format!(
            "--bound must be at least 1, got {bound}"
        ))));
    }
    let spec = build_spec(surface)?;
    let id = spec.id().to_string();
    let violations = match mode {
        Mode::Positivity => {
            let in_scope = positivity_in_scope(&spec);
            let engine = session.engine(spec)?;
            let rows = invariants::positivity_scan(&engine, bound)?;
            let bad = rows.iter().filter(|r| !r.positive).count();
            emit_scan(out, "positivity", &id, bound, &rows, bad, |r: &ScanRow| {
                format!(
                    "{} {} {}",
                    r.class,
                    r.value,
                    if r.positive { "ok" } else { "NOT POSITIVE" }
                )
            })?;
            if bad > 0 && !in_scope {
                out.note("expected: outside theorem scope");
            }
            bad
        }
        Mode::Monotonicity => {
            let engine = session.engine(spec)?;
            let rows = invariants::monotonicity_scan(&engine, bound)?;
            let bad = rows.iter().filter(|r| !r.holds).count();
            emit_scan(
                out,
                "monotonicity",
                &id,
                bound,
                &rows,
                bad,
                |r: &MonotonicityReport| {
                    format!(
                        "{} -> {} via [{}]: {} >= {} * {} {}",
                        r.lower,
                        r.upper,
                        r.chain.join(" "),
                        r.upper_value,
                        r.product,
                        r.lower_value,
                        if r.holds { "ok" } else { "VIOLATED" }
                    )
                },
            )?;
            bad
        }
        Mode::Symmetry => {
            let engine = session.engine(spec)?;
            let rows = invariants::symmetry_scan(&engine, bound)?;
            emit_comparisons(out, "symmetry", &id, bound, &rows)?
        }
        Mode::Blowdown => {
            let (full, down) = invariants::blowdown_partner(&spec)?;
            let full = session.engine(full)?;
            let down = session.engine(down)?;
            let rows = invariants::blowdown_scan(&full, &down, bound)?;
            emit_comparisons(out, "blowdown", &id, bound, &rows)?
        }
        Mode::Epath => {
            let engine = session.engine(spec)?;
            let rows = invariants::epath_scan(&engine, bound)?;
            emit_comparisons(out, "epath", &id, bound, &rows)?
        }
    };
    Ok(if violations > 0 { 1 } else { 0 })
}

fn emit_comparisons(
    out: &mut Out,
    mode: &str,
    id: &str,
    bound: i64,
    rows: &[ComparisonRow],
) -> Run<usize> {
    let bad = rows.iter().filter(|r| !r.equal).count();
    emit_scan(out, mode, id, bound, rows, bad, |r: &ComparisonRow| {
        format!(
            "{} {} | {} {} {}",
            r.class,
            r.value,
            r.other,
            r.other_value,
            if r.equal { "ok" } else { "DIFFER" }
        )
    })?;
    Ok(bad)
}

fn emit_scan<T: Serialize>(
    out: &mut Out,
    mode: &str,
    id: &str,
    bound: i64,
    rows: &[T],
    bad: usize,
    plain: impl Fn(&T) -> String,
) -> Run<()> {
    match out.format() {
        Format::Plain => {
            for r in rows {
                out.line(plain(r));
            }
            out.line(format!(
                "{mode} on {id}, -K.D <= {bound}: {} checked, {bad} violations",
                rows.len()
            ));
        }
        Format::Json => out.json(&json!({
            "mode": mode,
            "surface": id,
            "bound": bound,
            "checked": rows.len(),
            "violations": bad,
            "rows": rows,
        }))?,
        Format::Csv => out.rows(rows)?,
    }
    Ok(())
}

fn chain(
    session: &mut Session,
    out: &mut Out,
    surface: &SurfaceArgs,
    from: &str,
    class: &str,
) -> Run<u8> {
    let spec = build_spec(surface)?;
    let lower = spec.parse_class(from)?;
    let upper = spec.parse_class(class)?;
    let engine = session.engine(spec)?;
    let r = invariants::monotonicity_check(&engine, &lower, &upper)?;
    match out.format() {
        Format::Plain => {
            out.line(format!(
                "chain: {}",
                if r.chain.is_empty() {
                    "(empty)".to_string()
                } else {
                    r.chain.join(" ")
                }
            ));
            out.line(format!("product: {}", r.product));
            out.line(format!(
                "W({}) = {} >= {} * W({}) = {}: {}",
                r.upper,
                r.upper_value,
                r.product,
                r.lower,
                &r.product * &r.lower_value,
                if r.holds { "holds" } else { "VIOLATED" }
            ));
        }
        Format::Json => out.json(&r)?,
        Format::Csv => out.rows(std::slice::from_ref(&r))?,
    }
    Ok(if r.holds { 0 } else { 1 })
}

fn cache_cmd(cli: &Cli, action: CacheAction, out: &mut Out) -> Run<u8> {
    let path = cli.cache.clone().ok_or_else(|| {
        Failure::Usage("no cache file: pass --cache PATH or set WELSCHINGER_CACHE".to_string())
    })?;
    match action {
        CacheAction::Clear => {
            if path.exists() {
                std::fs::remove_file(&path).map_err(Error::from)?;
            }
            out.line(format!("cleared {}", path.display()));
        }
        CacheAction::Show | CacheAction::Verify => {
            if !path.exists() {
                out.line(format!("{}: no cache file", path.display()));
                out.flush();
                return Ok(0);
            }
            let file = CacheFile::load(&path)?;
            match action {
                CacheAction::Verify => {
                    out.line(format!("{}: ok, {} records", path.display(), file.len()))
                }
                _ => {
                    out.line(format!("{}: {} records", path.display(), file.len()));
                    for (surface, n) in file.surface_counts() {
                        out.line(format!("  {surface}: {n}"));
                    }
                }
            }
        }
    }
    out.flush();
    Ok(0)
}
