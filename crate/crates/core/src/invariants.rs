//! Invariants `W(Σ, D)` and the property suites built on them.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::engine::{CacheStats, Engine};
use crate::error::{Error, Result};
use crate::picard::{DivisorClass, LatticeKind};
use crate::surfaces::{Model, SurfaceSpec, Twist};
use crate::tangency::TangencyVector;

fn decimal<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// `W(D) = W(D, 0, (D.E) θ_1)`.
pub fn welschinger(engine: &Engine, d: &DivisorClass) -> Result<BigInt> {
    let s = engine.spec();
    if d.rank() != s.lattice().rank() {
        return Err(Error::validation(format!(
            "class has rank {}, surface lattice has rank {}",
            d.rank(),
            s.lattice().rank()
        )));
    }
    let de = s.dot(d, s.e());
    if de < 0 {
        return Err(Error::validation(format!(
            "class {} has negative E-degree {de}",
            s.format_class(d)
        )));
    }
    engine.eval(
        d,
        &TangencyVector::zero(),
        &TangencyVector::scaled_theta(1, de as u32),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub surface: String,
    pub class: String,
    #[serde(serialize_with = "decimal")]
    pub value: BigInt,
    /// `-K.D - 1`, the number of real points imposed.
    pub point_count: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    /// Memo statistics; hit counts depend on scheduling, so they travel
    /// with the timing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<CacheStats>,
}

/// Computes `W(D)` with bookkeeping. `timing` controls whether the elapsed
/// time is recorded.
pub fn report(engine: &Engine, d: &DivisorClass, timing: bool) -> Result<InvariantReport> {
    let s = engine.spec();
    let point_count = s.anticanonical_degree(d) - 1;
    if point_count < 0 {
        return Err(Error::validation(format!(
            "class {} has -K.D < 1",
            s.format_class(d)
        )));
    }
    let t = Instant::now();
    let value = welschinger(engine, d)?;
    Ok(InvariantReport {
        surface: s.id().to_string(),
        class: s.format_class(d),
        value,
        point_count,
        elapsed_ms: timing.then(|| t.elapsed().as_secs_f64() * 1e3),
        cache: timing.then(|| engine.stats()),
    })
}

/// Conjugation-invariant, nef and big classes of the surface with
/// `-K.D <= bound`, sorted.
pub fn nef_big_classes(spec: &SurfaceSpec, bound: i64) -> Vec<DivisorClass> {
    let lat = spec.lattice();
    lat.nef_classes(1, bound)
        .into_iter()
        .filter(|d| lat.is_nef_big(d) && spec.conjugation().is_invariant(d) && spec.admits(d))
        .collect()
}

/// Real lines `E^(1), ..., E^(k)` with `D - D' = Σ E^(j)`, every partial sum
/// `D^(i) = D' + Σ_{j<=i} E^(j)` nef and big, and `D^(i-1).E^(i) > 0`.
pub fn nef_chain(
    spec: &SurfaceSpec,
    d_prime: &DivisorClass,
    d: &DivisorClass,
) -> Result<Vec<DivisorClass>> {
    let lat = spec.lattice();
    for (name, c) in [("D'", d_prime), ("D", d)] {
        if !lat.is_nef_big(c) {
            return Err(Error::validation(format!(
                "{name} = {} is not nef and big",
                spec.format_class(c)
            )));
        }
    }
    let diff = d - d_prime;
    if diff.is_zero() {
        return Ok(Vec::new());
    }
    let lines: Vec<DivisorClass> = lat
        .line_classes()
        .iter()
        .filter(|l| spec.conjugation().is_invariant(l))
        .cloned()
        .collect();
    let tests = lat.nef_classes(1, 3);
    let effective = |r: &DivisorClass| {
        r.is_zero() || (lat.anticanonical_degree(r) > 0 && tests.iter().all(|t| lat.dot(t, r) >= 0))
    };
    if !effective(&diff) {
        return Err(Error::validation(format!(
            "D - D' = {} is not effective",
            spec.format_class(&diff)
        )));
    }
    let mut dead = HashSet::new();
    let mut chain = Vec::new();
    if chain_rec(
        spec, &lines, &effective, d_prime, &diff, &mut chain, &mut dead,
    ) {
        Ok(chain)
    } else {
        Err(Error::internal(format!(
            "no nef chain from {} to {}",
            spec.format_class(d_prime),
            spec.format_class(d)
        )))
    }
}

fn chain_rec(
    spec: &SurfaceSpec,
    lines: &[DivisorClass],
    effective: &dyn Fn(&DivisorClass) -> bool,
    current: &DivisorClass,
    left: &DivisorClass,
    chain: &mut Vec<DivisorClass>,
    dead: &mut HashSet<DivisorClass>,
) -> bool {
    if left.is_zero() {
        return true;
    }
    if dead.contains(current) {
        return false;
    }
    let lat = spec.lattice();
    // prefer the line the current class meets most
    let mut order: Vec<&DivisorClass> = lines.iter().collect();
    order.sort_by_key(|l| std::cmp::Reverse(lat.dot(current, l)));
    for l in order {
        if lat.dot(current, l) <= 0 {
            continue;
        }
        let rest = left - l;
        if !effective(&rest) {
            continue;
        }
        let next = current + l;
        if !lat.is_nef_big(&next) {
            continue;
        }
        chain.push(l.clone());
        if chain_rec(spec, lines, effective, &next, &rest, chain, dead) {
            return true;
        }
        chain.pop();
    }
    dead.insert(current.clone());
    false
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub lower: String,
    pub upper: String,
    pub chain: Vec<String>,
    #[serde(serialize_with = "decimal")]
    pub product: BigInt,
    #[serde(serialize_with = "decimal")]
    pub lower_value: BigInt,
    #[serde(serialize_with = "decimal")]
    pub upper_value: BigInt,
    pub holds: bool,
}

/// Checks `W(D) >= Π D^(i-1).E^(i) · W(D')` along the constructed chain.
pub fn monotonicity_check(
    engine: &Engine,
    d_prime: &DivisorClass,
    d: &DivisorClass,
) -> Result<MonotonicityReport> {
    let spec = engine.spec();
    let chain = nef_chain(spec, d_prime, d)?;
    let mut product = BigInt::one();
    let mut cur = d_prime.clone();
    for l in &chain {
        product *= spec.dot(&cur, l);
        cur = &cur + l;
    }
    let lower_value = welschinger(engine, d_prime)?;
    let upper_value = welschinger(engine, d)?;
    let holds = upper_value >= &product * &lower_value;
    Ok(MonotonicityReport {
        lower: spec.format_class(d_prime),
        upper: spec.format_class(d),
        chain: chain.iter().map(|l| spec.format_class(l)).collect(),
        product,
        lower_value,
        upper_value,
        holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub class: String,
    pub antik: i64,
    #[serde(serialize_with = "decimal")]
    pub value: BigInt,
    pub positive: bool,
}

/// `W(D)` for every nef and big real class with `-K.D <= bound`, in class
/// order.
pub fn positivity_scan(engine: &Engine, bound: i64) -> Result<Vec<ScanRow>> {
    if bound < 1 {
        return Err(Error::validation(format!(
            "scan bound must be at least 1, got {bound}"
        )));
    }
    let spec = engine.spec();
    let classes = nef_big_classes(spec, bound);
    classes
        .par_iter()
        .map(|d| {
            let value = welschinger(engine, d)?;
            Ok(ScanRow {
                class: spec.format_class(d),
                antik: spec.anticanonical_degree(d),
                positive: value.is_positive(),
                value,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: u32,
    #[serde(serialize_with = "decimal")]
    pub value: BigInt,
    /// `log W(nD) / (n log n)`; absent for `n = 1` or non-positive values.
    pub ratio: Option<f64>,
}

pub fn growth_report(engine: &Engine, d: &DivisorClass, n_max: u32) -> Result<Vec<GrowthRow>> {
    let spec = engine.spec();
    if n_max < 1 {
        return Err(Error::validation("n_max must be at least 1".to_string()));
    }
    if !spec.lattice().is_nef_big(d) {
        return Err(Error::validation(format!(
            "{} is not nef and big",
            spec.format_class(d)
        )));
    }
    (1..=n_max)
        .map(|n| {
            let value = welschinger(engine, &(n as i32 * d))?;
            let ratio = (n > 1 && value.is_positive()).then(|| {
                let nf = n as f64;
                ln_big(&value) / (nf * nf.ln())
            });
            Ok(GrowthRow { n, value, ratio })
        })
        .collect()
}

fn ln_big(v: &BigInt) -> f64 {
    // split off a power of two so huge values stay in f64 range
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let top = (v >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub class: String,
    pub other: String,
    #[serde(serialize_with = "decimal")]
    pub value: BigInt,
    #[serde(serialize_with = "decimal")]
    pub other_value: BigInt,
    pub equal: bool,
}

/// Permutes the six multiplicities of a plane class: position `i` of the
/// result takes multiplicity `perm[i]` of the input.
pub fn permute_plane_class(d: &DivisorClass, perm: &[usize; 6]) -> DivisorClass {
    let c = d.coords();
    let mut out = vec![c[0]];
    out.extend(perm.iter().map(|&p| c[p + 1]));
    DivisorClass::new(&out)
}

/// `W(D)` against `W(σD)` for each given permutation of the multiplicities.
pub fn symmetry_check(
    engine: &Engine,
    d: &DivisorClass,
    perms: &[[usize; 6]],
) -> Result<Vec<ComparisonRow>> {
    let spec = engine.spec();
    if !spec.is_plane() {
        return Err(Error::validation(
            "symmetry check needs a plane model".to_string(),
        ));
    }
    let base = welschinger(engine, d)?;
    perms
        .iter()
        .map(|p| {
            let other = permute_plane_class(d, p);
            let other_value = welschinger(engine, &other)?;
            Ok(ComparisonRow {
                class: spec.format_class(d),
                other: spec.format_class(&other),
                equal: other_value == base,
                value: base.clone(),
                other_value,
            })
        })
        .collect()
}

/// `W(D)` computed by two evaluators on the same class text, e.g. a full
/// surface and its blow-down, or two choices of auxiliary curve.
pub fn cross_check(a: &Engine, b: &Engine, d: &DivisorClass) -> Result<ComparisonRow> {
    let value = welschinger(a, d)?;
    let other_value = welschinger(b, d)?;
    Ok(ComparisonRow {
        class: a.spec().format_class(d),
        other: b.spec().id().to_string(),
        equal: value == other_value,
        value,
        other_value,
    })
}

/// Full recursion against the reduced cubic recursion on one key.
pub fn path_check(
    engine: &Engine,
    d: &DivisorClass,
    alpha: &TangencyVector,
    beta: &TangencyVector,
) -> Result<ComparisonRow> {
    let value = engine.eval(d, alpha, beta)?;
    let other_value = engine.eval_reduced(d, alpha, beta)?;
    Ok(ComparisonRow {
        class: format!("{}|{alpha}|{beta}", engine.spec().format_class(d)),
        other: "reduced".to_string(),
        equal: value == other_value,
        value,
        other_value,
    })
}

/// All keys `(D, α, β)` with odd-support `α`, `β` and `Iα + Iβ = D.E`.
pub fn keys_of_class(
    spec: &SurfaceSpec,
    d: &DivisorClass,
) -> Vec<(TangencyVector, TangencyVector)> {
    let de = spec.dot(d, spec.e());
    if de < 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for ia in 0..=de as u64 {
        for alpha in TangencyVector::odd_with_weight(ia) {
            for beta in TangencyVector::odd_with_weight(de as u64 - ia) {
                out.push((alpha.clone(), beta));
            }
        }
    }
    out
}

/// Monotonicity on every one-line step `D' -> D' + L` with `L` a real line,
/// both ends nef and big, `-K.D <= bound`.
pub fn monotonicity_scan(engine: &Engine, bound: i64) -> Result<Vec<MonotonicityReport>> {
    let spec = engine.spec();
    let lat = spec.lattice();
    let mut pairs = Vec::new();
    for lower in nef_big_classes(spec, bound - 1) {
        for l in lat.line_classes() {
            if !spec.conjugation().is_invariant(l) {
                continue;
            }
            let upper = &lower + l;
            if spec.admits(&upper)
                && lat.is_nef_big(&upper)
                && spec.anticanonical_degree(&upper) <= bound
            {
                pairs.push((lower.clone(), upper));
            }
        }
    }
    pairs
        .par_iter()
        .map(|(lo, hi)| monotonicity_check(engine, lo, hi))
        .collect()
}

/// Symmetric-group orbit label of a class: what the relabelings compatible
/// with the real structure (and any contractions) leave unchanged.
fn orbit_key(spec: &SurfaceSpec, d: &DivisorClass) -> Vec<i32> {
    let c = d.coords();
    let conj = spec.conjugation();
    let blown = spec.blown_down();
    match spec.lattice().kind() {
        LatticeKind::Plane => {
            let mut real = Vec::new();
            let mut pairs = Vec::new();
            for (i, &m) in c.iter().enumerate().skip(1) {
                if blown.contains(&i) {
                    continue;
                }
                if conj.is_real_index(i) {
                    real.push(m);
                } else if i < conj.image(i) {
                    pairs.push(m);
                }
            }
            real.sort_unstable();
            pairs.sort_unstable();
            let mut key = vec![c[0], i32::MIN];
            key.extend(real);
            key.push(i32::MIN);
            key.extend(pairs);
            key
        }
        LatticeKind::CubicReal => {
            let mut free: Vec<i32> = (0..3)
                .filter(|i| !blown.contains(i))
                .map(|i| c[i])
                .collect();
            free.sort_unstable();
            let mut key: Vec<i32> = blown.iter().map(|&i| c[i]).collect();
            key.push(i32::MIN);
            key.extend(free);
            key
        }
    }
}

/// Groups the nef and big classes with `-K.D <= bound` into relabeling
/// orbits and compares each class with the first class of its orbit.
pub fn symmetry_scan(engine: &Engine, bound: i64) -> Result<Vec<ComparisonRow>> {
    let spec = engine.spec();
    let mut orbits: BTreeMap<Vec<i32>, Vec<DivisorClass>> = BTreeMap::new();
    for d in nef_big_classes(spec, bound) {
        orbits.entry(orbit_key(spec, &d)).or_default().push(d);
    }
    let pairs: Vec<(DivisorClass, DivisorClass)> = orbits
        .values()
        .flat_map(|members| members[1..].iter().map(|d| (members[0].clone(), d.clone())))
        .collect();
    pairs
        .par_iter()
        .map(|(rep, d)| {
            let value = welschinger(engine, rep)?;
            let other_value = welschinger(engine, d)?;
            Ok(ComparisonRow {
                class: spec.format_class(rep),
                other: spec.format_class(d),
                equal: value == other_value,
                value,
                other_value,
            })
        })
        .collect()
}

/// The surface with two more real curves contracted: on the plane the last
/// two real points that are neither contracted nor on the auxiliary line,
/// on the cubic a real line other than the auxiliary one, whose auxiliary
/// line then becomes the ambient model's next real line.
pub fn blowdown_partner(spec: &SurfaceSpec) -> Result<(SurfaceSpec, SurfaceSpec)> {
    match spec.model() {
        Model::Plane { .. } => {
            let e = spec.e().coords();
            let free: Vec<usize> = (1..7)
                .filter(|&i| {
                    spec.conjugation().is_real_index(i)
                        && !spec.blown_down().contains(&i)
                        && e[i] == 0
                })
                .collect();
            if free.len() < 2 {
                return Err(Error::validation(format!(
                    "{} has fewer than two free real points to contract",
                    spec.id()
                )));
            }
            let mut blown = spec.blowdown_indices();
            blown.extend_from_slice(&free[free.len() - 2..]);
            let down =
                SurfaceSpec::new(spec.model(), spec.twist(), &blown, Some(spec.e().clone()))?;
            Ok((spec.clone(), down))
        }
        Model::CubicTwoComponent => {
            // contract L1, measure both with E = L2
            let e = DivisorClass::basis(3, 1);
            let full =
                SurfaceSpec::new(Model::CubicTwoComponent, spec.twist(), &[], Some(e.clone()))?;
            let down = SurfaceSpec::new(Model::ConicBundle, spec.twist(), &[1], Some(e))?;
            Ok((full, down))
        }
        Model::ConicBundle => Err(Error::validation(
            "the conic bundle has no further real line to contract in this model".to_string(),
        )),
    }
}

/// `W(D)` on a surface against its contraction, for the classes of the
/// contraction.
pub fn blowdown_scan(full: &Engine, down: &Engine, bound: i64) -> Result<Vec<ComparisonRow>> {
    let classes = nef_big_classes(down.spec(), bound);
    classes
        .par_iter()
        .map(|d| cross_check(full, down, d))
        .collect()
}

/// The same surface with every other admissible auxiliary line.
pub fn auxiliary_variants(spec: &SurfaceSpec) -> Vec<SurfaceSpec> {
    let lat = spec.lattice();
    let mut out = Vec::new();
    let candidates: Vec<DivisorClass> = match lat.kind() {
        LatticeKind::Plane => {
            let mut v = Vec::new();
            for i in 1..7 {
                for j in i + 1..7 {
                    let mut c = vec![1, 0, 0, 0, 0, 0, 0];
                    c[i] = -1;
                    c[j] = -1;
                    v.push(DivisorClass::new(&c));
                }
            }
            v
        }
        LatticeKind::CubicReal => (0..3).map(|i| DivisorClass::basis(3, i)).collect(),
    };
    for e in candidates {
        if &e == spec.e() {
            continue;
        }
        if let Ok(s) = SurfaceSpec::new(
            spec.model(),
            spec.twist(),
            &spec.blowdown_indices(),
            Some(e),
        ) {
            out.push(s);
        }
    }
    out
}

/// `W(D)` with the surface's auxiliary line against every alternative; on
/// the twisted cubic also the reduced recursion on every key.
pub fn epath_scan(engine: &Engine, bound: i64) -> Result<Vec<ComparisonRow>> {
    let spec = engine.spec();
    let classes = nef_big_classes(spec, bound);
    let others: Vec<Engine> = auxiliary_variants(spec)
        .into_iter()
        .map(Engine::new)
        .collect();
    let mut rows: Vec<ComparisonRow> = others
        .par_iter()
        .flat_map_iter(|o| classes.iter().map(move |d| cross_check(engine, o, d)))
        .collect::<Result<_>>()?;
    if spec.lattice().kind() == LatticeKind::CubicReal && spec.twist() == Twist::PhiF {
        let keys: Vec<(DivisorClass, TangencyVector, TangencyVector)> = classes
            .iter()
            .flat_map(|d| {
                keys_of_class(spec, d)
                    .into_iter()
                    .map(move |(a, b)| (d.clone(), a, b))
            })
            .collect();
        let more: Vec<ComparisonRow> = keys
            .par_iter()
            .map(|(d, a, b)| path_check(engine, d, a, b))
            .collect::<Result<_>>()?;
        rows.extend(more);
    }
    Ok(rows)
}

/// One column of the reference table.
#[derive(Clone, Copy, Debug)]
pub struct TableColumn {
    pub label: &'static str,
    pub model: Model,
    pub twist: Twist,
}

pub const TABLE_ROWS: [&str; 2] = ["-K", "-2K"];

pub const TABLE_COLUMNS: [TableColumn; 8] = [
    TableColumn {
        label: "P2[6,0]",
        model: Model::Plane { real: 6, pairs: 0 },
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "P2[4,1]",
        model: Model::Plane { real: 4, pairs: 1 },
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "P2[2,2]",
        model: Model::Plane { real: 2, pairs: 2 },
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "P2[0,3]",
        model: Model::Plane { real: 0, pairs: 3 },
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "B/0",
        model: Model::ConicBundle,
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "B/F",
        model: Model::ConicBundle,
        twist: Twist::PhiF,
    },
    TableColumn {
        label: "B1/0",
        model: Model::CubicTwoComponent,
        twist: Twist::Trivial,
    },
    TableColumn {
        label: "B1/F",
        model: Model::CubicTwoComponent,
        twist: Twist::PhiF,
    },
];

/// Published values of `W(-K)` and `W(-2K)` for the columns above.
pub const GOLDEN_TABLE: [[i64; 8]; 2] = [
    [8, 6, 4, 2, 0, 4, 0, 4],
    [1000, 522, 236, 78, 0, 512, 0, 160],
];

/// Evaluates the reference table, one engine per column, built by `make`.
pub fn compute_table(make: impl Fn(SurfaceSpec) -> Engine) -> Result<Vec<Vec<BigInt>>> {
    let engines = TABLE_COLUMNS
        .iter()
        .map(|c| SurfaceSpec::new(c.model, c.twist, &[], None).map(&make))
        .collect::<Result<Vec<_>>>()?;
    table_with(&engines)
}

/// Evaluates the reference table on engines given in column order.
pub fn table_with(engines: &[Engine]) -> Result<Vec<Vec<BigInt>>> {
    TABLE_ROWS
        .iter()
        .map(|row| {
            engines
                .iter()
                .map(|e| welschinger(e, &e.spec().parse_class(row)?))
                .collect()
        })
        .collect()
}
