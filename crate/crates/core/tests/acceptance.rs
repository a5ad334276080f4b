//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Signed;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use welschinger_core::invariants::{
    compute_table, keys_of_class, monotonicity_check, nef_big_classes, permute_plane_class,
    table_with, welschinger, GOLDEN_TABLE,
};
use welschinger_core::*;

const SEED: u64 = 0x5eed_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spec(model: Model, twist: Twist) -> SurfaceSpec {
    SurfaceSpec::new(model, twist, &[], None).expect("surface")
}

fn plane(real: u8, pairs: u8) -> SurfaceSpec {
    spec(Model::Plane { real, pairs }, Twist::Trivial)
}

fn cubic_f() -> SurfaceSpec {
    spec(Model::CubicTwoComponent, Twist::PhiF)
}

fn flat(table: &[Vec<BigInt>]) -> Vec<String> {
    table.iter().flatten().map(|v| v.to_string()).collect()
}

fn golden_flat() -> Vec<String> {
    GOLDEN_TABLE
        .iter()
        .flatten()
        .map(|v| v.to_string())
        .collect()
}

// 1. Golden table, exact, under 120 s cold.
fn golden() -> Outcome {
    let t = Instant::now();
    let got = match compute_table(Engine::new) {
        Ok(t) => flat(&t),
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let el = t.elapsed();
    let want = golden_flat();
    let pass = got == want && el < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "got [{}], {:.2}s (budget 120s)",
            got.join(", "),
            el.as_secs_f64()
        ),
    )
}

/// The recursion step at (-K, θ_1, 0) on the twisted cubic, worked by hand:
/// consuming `Q` once (+1); splitting into the lines L2 and L3 (+1); one term
/// per tangent pair item with weights +1, +1, -1, -1. Total 2.
fn hand_expansion_groups(engine: &Engine) -> Result<(BigInt, i64, i64, Vec<i64>, usize)> {
    let s = engine.spec();
    let d = s.parse_class("-K")?;
    let (a, b) = (TangencyVector::theta(1), TangencyVector::zero());
    let value = engine.eval(&d, &a, &b)?;
    let terms = engine.expand(&d, &a, &b)?;
    let mut l2l3 = vec![DivisorClass::new(&[0, 1, 0]), DivisorClass::new(&[0, 0, 1])];
    l2l3.sort();
    let (mut consumption, mut lines, mut pairs, mut other) = (0i64, 0i64, Vec::new(), 0usize);
    for t in &terms {
        let c = i64::try_from(&t.contribution).unwrap_or(i64::MAX);
        match &t.kind {
            TermKind::Split {
                l,
                alpha0,
                beta0,
                factors,
                pair_ids,
            } => {
                let c_used = 2 * l + alpha0.iweight() + beta0.iweight();
                let mut classes: Vec<DivisorClass> =
                    factors.iter().map(|f| f.class.clone()).collect();
                classes.sort();
                if c_used == 1 && factors.is_empty() && pair_ids.is_empty() {
                    consumption += c;
                } else if c_used == 0 && pair_ids.is_empty() && classes == l2l3 {
                    lines += c;
                } else if c_used == 0 && factors.is_empty() && pair_ids.len() == 1 {
                    pairs.push(c);
                } else {
                    other += 1;
                }
            }
            TermKind::FirstSum { .. } => other += 1,
        }
    }
    pairs.sort();
    Ok((value, consumption, lines, pairs, other))
}

// 2. Hand expansion oracle.
fn hand_expansion() -> Outcome {
    let engine = Engine::new(cubic_f());
    match hand_expansion_groups(&engine) {
        Ok((value, consumption, lines, pairs, other)) => {
            let pass = value == BigInt::from(2)
                && consumption == 1
                && lines == 1
                && pairs == [-1, -1, 1, 1]
                && other == 0;
            outcome(
                pass,
                format!("value {value}; consumption {consumption}, lines L2+L3 {lines}, pairs {pairs:?}, other terms {other}"),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn e_independence_values() -> Result<Vec<String>> {
    let mut out = Vec::new();
    for twist in [Twist::PhiF, Twist::Trivial] {
        let base = spec(Model::CubicTwoComponent, twist);
        let classes = nef_big_classes(&base, 6);
        let engines = (0..3)
            .map(|i| {
                SurfaceSpec::new(
                    Model::CubicTwoComponent,
                    twist,
                    &[],
                    Some(DivisorClass::basis(3, i)),
                )
                .map(Engine::new)
            })
            .collect::<Result<Vec<_>>>()?;
        for d in &classes {
            let vals = engines
                .iter()
                .map(|e| welschinger(e, d))
                .collect::<Result<Vec<_>>>()?;
            let agree = vals.iter().all(|v| v == &vals[0]);
            out.push(format!(
                "{twist}:{}={}:{agree}",
                base.format_class(d),
                vals[0]
            ));
        }
    }
    Ok(out)
}

// 3. E-independence on the cubic.
fn e_independence(values: &Result<Vec<String>>, el: Duration) -> Outcome {
    match values {
        Ok(rows) => {
            let bad: Vec<&String> = rows.iter().filter(|r| r.ends_with(":false")).collect();
            let asym = rows.iter().any(|r| r.starts_with("F:2,1,1="));
            outcome(
                bad.is_empty() && asym && el < Duration::from_secs(60),
                format!(
                    "{} (twist, class) cases with E = L1, L2, L3, {} disagreements, includes 2,1,1: {asym}, {:.2}s (budget 60s)",
                    rows.len(),
                    bad.len(),
                    el.as_secs_f64()
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn path_values() -> Result<Vec<String>> {
    let s = cubic_f();
    let classes = nef_big_classes(&s, 9);
    let engine = Engine::new(s);
    let mut out = Vec::new();
    for d in &classes {
        for (a, b) in keys_of_class(engine.spec(), d) {
            let full = engine.eval(d, &a, &b)?;
            let reduced = engine.eval_reduced(d, &a, &b)?;
            out.push(format!(
                "{}|{a}|{b}={full}:{}",
                engine.spec().format_class(d),
                full == reduced
            ));
        }
    }
    Ok(out)
}

// 4. Reduced cubic recursion equals the full one.
fn path_equivalence(values: &Result<Vec<String>>, el: Duration) -> Outcome {
    match values {
        Ok(rows) => {
            let bad = rows.iter().filter(|r| r.ends_with(":false")).count();
            outcome(
                bad == 0 && !rows.is_empty() && el < Duration::from_secs(120),
                format!(
                    "{} keys from nef and big classes with -K.D <= 9, {bad} mismatches, {:.2}s (budget 120s)",
                    rows.len(),
                    el.as_secs_f64()
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

// 5. Positivity up to -K.D <= 8.
fn positivity() -> Outcome {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for s in [plane(6, 0), plane(4, 1), plane(2, 2), cubic_f()] {
        let label = s.id().to_string();
        let engine = Engine::new(s);
        match invariants::positivity_scan(&engine, 8) {
            Ok(rows) => {
                let bad: Vec<String> = rows
                    .iter()
                    .filter(|r| !r.positive)
                    .map(|r| format!("{}={}", r.class, r.value))
                    .collect();
                pass &= bad.is_empty() && !rows.is_empty();
                parts.push(format!(
                    "{label}: {} classes, {} non-positive {:?}",
                    rows.len(),
                    bad.len(),
                    bad.iter().take(3).collect::<Vec<_>>()
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: error {e}"));
            }
        }
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "{}; {:.2}s (budget 300s)",
            parts.join("; "),
            el.as_secs_f64()
        ),
    )
}

fn sample_pairs(
    spec: &SurfaceSpec,
    rng: &mut StdRng,
    count: usize,
) -> Vec<(DivisorClass, DivisorClass)> {
    let lat = spec.lattice();
    let lowers = nef_big_classes(spec, 5);
    let lines: Vec<DivisorClass> = lat
        .line_classes()
        .iter()
        .filter(|l| spec.conjugation().is_invariant(l))
        .cloned()
        .collect();
    let mut out: Vec<(DivisorClass, DivisorClass)> = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 100_000 {
        tries += 1;
        let lower = lowers.choose(rng).unwrap().clone();
        let steps = rng.gen_range(1..=3);
        let mut upper = lower.clone();
        for _ in 0..steps {
            upper = &upper + lines.choose(rng).unwrap();
        }
        if lat.is_nef_big(&upper)
            && spec.anticanonical_degree(&upper) <= 8
            && !out.contains(&(lower.clone(), upper.clone()))
        {
            out.push((lower, upper));
        }
    }
    out
}

// 6. Monotonicity along constructed chains.
fn monotonicity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut checked = 0;
    let mut failures = Vec::new();
    for s in [plane(6, 0), cubic_f()] {
        let mut pairs = sample_pairs(&s, &mut rng, 10);
        // the multiples nD -> (n+1)D of the anticanonical class
        let k = s.canonical_class().clone();
        pairs.push((-1 * &k, -2 * &k));
        let engine = Engine::new(s);
        for (lo, hi) in &pairs {
            checked += 1;
            match monotonicity_check(&engine, lo, hi) {
                Ok(r) if r.holds => {}
                Ok(r) => failures.push(format!(
                    "{} -> {}: {} < {} * {}",
                    r.lower, r.upper, r.upper_value, r.product, r.lower_value
                )),
                Err(e) => failures.push(format!(
                    "{} -> {}: {e}",
                    engine.spec().format_class(lo),
                    engine.spec().format_class(hi)
                )),
            }
        }
    }
    // W(nD) strictly increasing for the twisted cubic, D = -K
    let growth =
        invariants::growth_report(&Engine::new(cubic_f()), &DivisorClass::new(&[1, 1, 1]), 3);
    let increasing = match &growth {
        Ok(rows) => rows
            .windows(2)
            .all(|w| w[1].value > w[0].value && w[0].value.is_positive()),
        Err(_) => false,
    };
    let values = growth
        .map(|rows| {
            rows.iter()
                .map(|r| r.value.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        })
        .unwrap_or_else(|e| e.to_string());
    outcome(
        failures.is_empty() && checked >= 20 && increasing,
        format!(
            "{checked} pairs on P2[6,0] and B1/F, {} violations {:?}; W(n(-K)) on B1/F for n = 1..3: {values}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

// 7. Symmetry of the six points and blow-down consistency.
fn symmetry_and_blowdown() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 7);
    let full = plane(6, 0);
    let pool: Vec<DivisorClass> = nef_big_classes(&full, 8)
        .into_iter()
        .filter(|d| {
            // classes whose multiplicities are not all equal
            let m = &d.coords()[1..];
            m.iter().any(|x| *x != m[0])
        })
        .collect();
    let sample: Vec<DivisorClass> = pool.choose_multiple(&mut rng, 5).cloned().collect();
    let engine = Engine::new(full.clone());
    let mut sym_bad = Vec::new();
    for d in &sample {
        let base = welschinger(&engine, d);
        for _ in 0..10 {
            let mut p = [0usize, 1, 2, 3, 4, 5];
            p.shuffle(&mut rng);
            let q = permute_plane_class(d, &p);
            let other = welschinger(&engine, &q);
            if base.as_ref().ok() != other.as_ref().ok() || base.is_err() {
                sym_bad.push(full.format_class(&q));
            }
        }
    }
    let down = Engine::new(plane(4, 0));
    let classes: Vec<DivisorClass> = nef_big_classes(&full, 8)
        .into_iter()
        .filter(|d| d.coords()[5] == 0 && d.coords()[6] == 0)
        .collect();
    let mut bd_bad = Vec::new();
    for d in &classes {
        let a = welschinger(&engine, d);
        let b = welschinger(&down, d);
        if a.is_err() || a.as_ref().ok() != b.as_ref().ok() {
            bd_bad.push(full.format_class(d));
        }
    }
    outcome(
        sym_bad.is_empty() && bd_bad.is_empty() && sample.len() == 5 && !classes.is_empty(),
        format!(
            "classes [{}] x 10 permutations: {} mismatches; {} classes with m5 = m6 = 0 on P2[6,0] vs P2[4,0]: {} mismatches",
            sample.iter().map(|d| full.format_class(d)).collect::<Vec<_>>().join(" "),
            sym_bad.len(),
            classes.len(),
            bd_bad.len()
        ),
    )
}

/// Everything criteria 1 to 4 produce, as text.
fn outputs_1_to_4() -> Vec<String> {
    let mut out = Vec::new();
    match compute_table(Engine::new) {
        Ok(t) => out.extend(flat(&t)),
        Err(e) => out.push(format!("table error {e}")),
    }
    match hand_expansion_groups(&Engine::new(cubic_f())) {
        Ok(g) => out.push(format!("{g:?}")),
        Err(e) => out.push(format!("expansion error {e}")),
    }
    match e_independence_values() {
        Ok(v) => out.extend(v),
        Err(e) => out.push(format!("e-path error {e}")),
    }
    match path_values() {
        Ok(v) => out.extend(v),
        Err(e) => out.push(format!("path error {e}")),
    }
    out
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

// 8. Determinism across worker counts and cache states.
fn determinism() -> Outcome {
    // several workers even on a single-core host, so interleavings differ
    let max = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .max(4);
    let single = pool(1).install(outputs_1_to_4);
    let many = pool(max).install(outputs_1_to_4);

    // warm: same engines twice, then a fresh engine seeded from a cache file
    let warm = pool(max).install(|| -> Result<bool> {
        let engines: Vec<Engine> = invariants::TABLE_COLUMNS
            .iter()
            .map(|c| SurfaceSpec::new(c.model, c.twist, &[], None).map(Engine::new))
            .collect::<Result<_>>()?;
        let cold = flat(&table_with(&engines)?);
        let again = flat(&table_with(&engines)?);
        let mut file = CacheFile::new();
        for e in &engines {
            file.absorb(e);
        }
        let dir = tempfile::tempdir()?;
        let path = dir.path().join("cache.txt");
        file.save(&path)?;
        let loaded = CacheFile::load(&path)?;
        let seeded: Vec<Engine> = invariants::TABLE_COLUMNS
            .iter()
            .map(|c| -> Result<Engine> {
                let e = Engine::new(SurfaceSpec::new(c.model, c.twist, &[], None)?);
                loaded.seed(&e)?;
                Ok(e)
            })
            .collect::<Result<_>>()?;
        let from_file = flat(&table_with(&seeded)?);
        let hits = seeded.iter().map(|e| e.stats().hits).sum::<u64>();
        Ok(cold == again && cold == from_file && cold == golden_flat() && hits > 0)
    });
    let warm_ok = matches!(warm, Ok(true));
    outcome(
        single == many && warm_ok,
        format!(
            "{} outputs identical with 1 and {max} workers: {}; cold, warm and cache-file tables identical: {}",
            single.len(),
            single == many,
            match warm {
                Ok(b) => b.to_string(),
                Err(e) => format!("error {e}"),
            }
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "golden table", golden()));
    results.push((2, "hand expansion", hand_expansion()));
    let t = Instant::now();
    let ev = e_independence_values();
    results.push((3, "E-independence", e_independence(&ev, t.elapsed())));
    let t = Instant::now();
    let pv = path_values();
    results.push((4, "path equivalence", path_equivalence(&pv, t.elapsed())));
    results.push((5, "positivity", positivity()));
    results.push((6, "monotonicity", monotonicity()));
    results.push((7, "symmetry and blow-down", symmetry_and_blowdown()));
    results.push((8, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!(
            "criterion {n} ({name}): {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
