//! Memoized evaluation of the recursion.
//!
//! A key `(D, α, β)` with `n = D.Q + ‖β‖ - 1` (where `Q = -(K+E)`) evaluates to
//! `0` when `n < 0`, to the tabulated initial weight when `n = 0`, and
//! otherwise to
//!
//! ```text
//! Σ_{k: β_k > 0} W(D, α + θ_k, β - θ_k)  +  Σ split terms
//! ```
//!
//! A split term consumes `c = 2l + Iα0 + Iβ0` copies of `Q` (with
//! `α0 <= α`, `β0 <= β`), a subset of the surface's pair menu, and an
//! unordered collection of divisor factors `(C_i, α_i, β_i, γ_i = θ_{k_i})`
//! such that
//!
//! ```text
//! D - E = c Q + Σ pair classes + Σ C_i,      Σ (β_i - γ_i) = β - β0,
//! Σ α_i <= α - α0,                            C_i != Q,
//! ```
//!
//! and a factor with `n_i = 0` and `α_i = 0` occurs at most once. Its weight is
//!
//! ```text
//! 2^{‖β0‖}/β0! · (l+1) · (α; α0, α_1, ...) · (n-1)!/Π n_i! · Π β_i[k_i] · Π W_i · Π pair weights
//! ```
//!
//! with `n_i = C_i.Q + ‖β_i‖ - 1`; these always satisfy
//! `Σ n_i = n - 1 - ‖β0‖`. The reduced path used on the twisted cubic keeps
//! only `l = 0` and no pair items: the `(l+1)` series and the pair weights
//! `(1, 1, -1, -1)` cancel each other exactly.

mod cache;
mod trace;

pub use cache::{CacheFile, CACHE_HEADER};
pub use trace::{totals_json, FactorRecord, TermKind, TermRecord};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::picard::{DivisorClass, LatticeKind, Target};
use crate::surfaces::{SurfaceSpec, Twist};
use crate::tangency::{factorial, multinomial, TangencyVector};

type MemoKey = (DivisorClass, TangencyVector, TangencyVector);

/// A fully specified argument of the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvalKey {
    pub surface: String,
    pub class: DivisorClass,
    pub alpha: TangencyVector,
    pub beta: TangencyVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Path {
    Full,
    Reduced,
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    /// Evaluate independent split terms on the rayon pool.
    pub parallel: bool,
    /// Accumulate split sums as exact rationals and check integrality.
    pub rational_check: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            rational_check: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

/// Evaluator bound to one surface, owning its memo store.
pub struct Engine {
    spec: Arc<SurfaceSpec>,
    opts: EngineOptions,
    memo: DashMap<MemoKey, BigInt>,
    reduced_memo: DashMap<MemoKey, BigInt>,
    candidates: DashMap<i64, Arc<Vec<DivisorClass>>>,
    assemblies: DashMap<DivisorClass, Arc<Vec<Vec<DivisorClass>>>>,
    /// Nef classes of small degree; an effective class meets each of them
    /// non-negatively.
    tests: Vec<DivisorClass>,
    hits: AtomicU64,
    misses: AtomicU64,
}

/// One consumption pattern of a split term: everything except the factors.
struct Combo {
    l: u64,
    alpha0: TangencyVector,
    beta0: TangencyVector,
    pairs: Vec<usize>,
    remainder: DivisorClass,
    alpha_left: TangencyVector,
    beta_need: TangencyVector,
    n_target: u64,
}

#[derive(Clone)]
struct Choice {
    alpha: TangencyVector,
    beta: TangencyVector,
    k: u32,
    rest: TangencyVector,
    n: u64,
    w: BigInt,
}

/// Receives each complete factor assignment of a combo.
type Emit<'f> = dyn FnMut(&Combo, &[DivisorClass], &[&Choice]) -> Result<()> + 'f;

struct Ctx<'a> {
    alpha: &'a TangencyVector,
    de: i64,
    n: u64,
    path: Path,
}

impl Engine {
    pub fn new(spec: SurfaceSpec) -> Self {
        Self::with_options(spec, EngineOptions::default())
    }

    pub fn with_options(spec: SurfaceSpec, opts: EngineOptions) -> Self {
        let tests = spec.lattice().nef_classes(1, 3);
        Self {
            spec: Arc::new(spec),
            opts,
            memo: DashMap::new(),
            reduced_memo: DashMap::new(),
            candidates: DashMap::new(),
            assemblies: DashMap::new(),
            tests,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn options(&self) -> EngineOptions {
        self.opts
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            entries: self.memo.len() + self.reduced_memo.len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    pub fn clear(&self) {
        self.memo.clear();
        self.reduced_memo.clear();
    }

    pub fn key(&self, class: DivisorClass, alpha: TangencyVector, beta: TangencyVector) -> EvalKey {
        EvalKey {
            surface: self.spec.id().to_string(),
            class,
            alpha,
            beta,
        }
    }

    /// Checks the argument invariants of a key.
    pub fn validate(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Result<()> {
        let s = &self.spec;
        if d.rank() != s.lattice().rank() {
            return Err(Error::validation(format!(
                "class has rank {}, surface lattice has rank {}",
                d.rank(),
                s.lattice().rank()
            )));
        }
        if !s.conjugation().is_invariant(d) {
            return Err(Error::validation(format!(
                "class {} is not conjugation-invariant",
                s.format_class(d)
            )));
        }
        if !s.admits(d) {
            return Err(Error::validation(format!(
                "class {} crosses a blown-down curve",
                s.format_class(d)
            )));
        }
        if !alpha.is_odd_support() || !beta.is_odd_support() {
            return Err(Error::validation(
                "tangency vectors must have odd support".to_string(),
            ));
        }
        let de = s.dot(d, s.e());
        if (alpha.iweight() + beta.iweight()) as i64 != de {
            return Err(Error::validation(format!(
                "I(alpha) + I(beta) = {} but D.E = {de}",
                alpha.iweight() + beta.iweight()
            )));
        }
        Ok(())
    }

    pub fn eval(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Result<BigInt> {
        self.validate(d, alpha, beta)?;
        self.w(d, alpha, beta, Path::Full)
    }

    pub fn eval_key(&self, key: &EvalKey) -> Result<BigInt> {
        if key.surface != self.spec.id() {
            return Err(Error::validation(format!(
                "key for surface {} given to evaluator of {}",
                key.surface,
                self.spec.id()
            )));
        }
        self.eval(&key.class, &key.alpha, &key.beta)
    }

    /// The reduced recursion of the twisted cubic: no `l`, no pair items.
    pub fn eval_reduced(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Result<BigInt> {
        if self.spec.lattice().kind() != LatticeKind::CubicReal || self.spec.twist() != Twist::PhiF
        {
            return Err(Error::validation(
                "the reduced recursion needs the cubic model with twist F".to_string(),
            ));
        }
        self.validate(d, alpha, beta)?;
        self.w(d, alpha, beta, Path::Reduced)
    }

    /// The summands of one recursion step, in canonical order. Their
    /// contributions add up to `eval` (for `n > 0`; a key with `n <= 0` has
    /// no summands).
    pub fn expand(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Result<Vec<TermRecord>> {
        self.validate(d, alpha, beta)?;
        let n = self.n_of(d, beta);
        let mut out = Vec::new();
        if n <= 0 {
            return Ok(out);
        }
        for (k, _) in beta.entries() {
            let t = TangencyVector::theta(k);
            let rest = beta.checked_sub(&t).expect("k in support");
            let v = self.w(d, &(alpha + &t), &rest, Path::Full)?;
            out.push(TermRecord {
                kind: TermKind::FirstSum { k },
                coefficient: BigInt::one(),
                contribution: v,
            });
        }
        let ctx = Ctx {
            alpha,
            de: (alpha.iweight() + beta.iweight()) as i64,
            n: n as u64,
            path: Path::Full,
        };
        for combo in self.combos(d, alpha, beta, n as u64, Path::Full) {
            self.for_each_term(&ctx, &combo, &mut |combo, classes, chosen| {
                let (coefficient, contribution) =
                    self.term_value(&ctx, combo, classes, chosen)?.exact()?;
                let factors = classes
                    .iter()
                    .zip(chosen)
                    .map(|(c, ch)| FactorRecord {
                        class: c.clone(),
                        alpha: ch.alpha.clone(),
                        beta: ch.beta.clone(),
                        gamma: TangencyVector::theta(ch.k),
                        n: ch.n,
                        value: ch.w.clone(),
                    })
                    .collect();
                out.push(TermRecord {
                    kind: TermKind::Split {
                        l: combo.l,
                        alpha0: combo.alpha0.clone(),
                        beta0: combo.beta0.clone(),
                        factors,
                        pair_ids: combo
                            .pairs
                            .iter()
                            .map(|&i| self.spec.pair_menu()[i].id.clone())
                            .collect(),
                    },
                    coefficient,
                    contribution,
                });
                Ok(())
            })?;
        }
        Ok(out)
    }

    fn n_of(&self, d: &DivisorClass, beta: &TangencyVector) -> i64 {
        self.spec.r_dim(Target::Class(d), beta)
    }

    fn memo_for(&self, path: Path) -> &DashMap<MemoKey, BigInt> {
        match path {
            Path::Full => &self.memo,
            Path::Reduced => &self.reduced_memo,
        }
    }

    fn w(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
        path: Path,
    ) -> Result<BigInt> {
        let key = (d.clone(), alpha.clone(), beta.clone());
        let memo = self.memo_for(path);
        if let Some(v) = memo.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let n = self.n_of(d, beta);
        let value = if n < 0 {
            BigInt::zero()
        } else if n == 0 {
            BigInt::from(self.spec.initial_weight_unchecked(d, alpha, beta))
        } else {
            let mut v = BigInt::zero();
            for (k, _) in beta.entries() {
                let t = TangencyVector::theta(k);
                let rest = beta.checked_sub(&t).expect("k in support");
                v += self.w(d, &(alpha + &t), &rest, path)?;
            }
            v + self.split(d, alpha, beta, n as u64, path)?
        };
        memo.insert(key, value.clone());
        Ok(value)
    }

    fn split(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
        n: u64,
        path: Path,
    ) -> Result<BigInt> {
        let combos = self.combos(d, alpha, beta, n, path);
        let ctx = Ctx {
            alpha,
            de: (alpha.iweight() + beta.iweight()) as i64,
            n,
            path,
        };
        if self.opts.rational_check {
            let mut total = BigRational::zero();
            for c in &combos {
                self.for_each_term(&ctx, c, &mut |combo, classes, chosen| {
                    total += self.term_value(&ctx, combo, classes, chosen)?.rational();
                    Ok(())
                })?;
            }
            if !total.is_integer() {
                return Err(Error::internal(format!(
                    "split sum {total} for {} is not an integer",
                    self.spec.format_class(d)
                )));
            }
            return Ok(total.to_integer());
        }
        if self.opts.parallel && combos.len() > 1 {
            combos
                .par_iter()
                .map(|c| self.combo_sum(&ctx, c))
                .try_reduce(BigInt::zero, |a, b| Ok(a + b))
        } else {
            let mut acc = BigInt::zero();
            for c in &combos {
                acc += self.combo_sum(&ctx, c)?;
            }
            Ok(acc)
        }
    }

    fn combo_sum(&self, ctx: &Ctx<'_>, combo: &Combo) -> Result<BigInt> {
        let mut acc = BigInt::zero();
        self.for_each_term(ctx, combo, &mut |combo, classes, chosen| {
            acc += self.term_value(ctx, combo, classes, chosen)?.exact()?.1;
            Ok(())
        })?;
        Ok(acc)
    }

    /// All consumption patterns of a split at key `(d, alpha, beta)`.
    fn combos(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
        n: u64,
        path: Path,
    ) -> Vec<Combo> {
        let s = &self.spec;
        let lat = s.lattice();
        let menu = s.pair_menu();
        let base = d - s.e();
        let mut out = Vec::new();
        for alpha0 in alpha.enumerate_le() {
            for beta0 in beta.enumerate_le() {
                if beta0.norm() > n - 1 {
                    continue;
                }
                let n_target = n - 1 - beta0.norm();
                let alpha_left = alpha.checked_sub(&alpha0).expect("alpha0 <= alpha");
                let beta_need = beta.checked_sub(&beta0).expect("beta0 <= beta");
                let c0 = alpha0.iweight() + beta0.iweight();
                for l in 0u64.. {
                    if path == Path::Reduced && l > 0 {
                        break;
                    }
                    let c = 2 * l + c0;
                    let r = &base - &(c as i32 * s.q());
                    if lat.dot(&r, s.e()) < 0 || lat.anticanonical_degree(&r) < 0 {
                        break;
                    }
                    let masks = if path == Path::Reduced {
                        1
                    } else {
                        1u32 << menu.len()
                    };
                    for mask in 0..masks {
                        let pairs: Vec<usize> =
                            (0..menu.len()).filter(|i| mask >> i & 1 == 1).collect();
                        let mut rp = r.clone();
                        for &i in &pairs {
                            rp = &rp - &menu[i].class_sum;
                        }
                        if lat.dot(&rp, s.e()) < 0 || lat.anticanonical_degree(&rp) < 0 {
                            continue;
                        }
                        if !self.plausible(&rp) {
                            continue;
                        }
                        if rp.is_zero() && !beta_need.is_zero() {
                            continue;
                        }
                        out.push(Combo {
                            l,
                            alpha0: alpha0.clone(),
                            beta0: beta0.clone(),
                            pairs,
                            remainder: rp,
                            alpha_left: alpha_left.clone(),
                            beta_need: beta_need.clone(),
                            n_target,
                        });
                    }
                }
            }
        }
        out
    }

    /// Necessary condition for `r` to be a sum of curve classes.
    fn plausible(&self, r: &DivisorClass) -> bool {
        r.is_zero() || self.tests.iter().all(|t| self.spec.dot(t, r) >= 0)
    }

    fn candidates(&self, budget: i64) -> Result<Arc<Vec<DivisorClass>>> {
        if let Some(c) = self.candidates.get(&budget) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.spec.candidate_factors(budget)?);
        self.candidates.insert(budget, c.clone());
        Ok(c)
    }

    /// Unordered collections of admissible factor classes summing to `r`,
    /// each as a sorted list.
    fn assemblies(&self, r: &DivisorClass) -> Result<Arc<Vec<Vec<DivisorClass>>>> {
        if let Some(a) = self.assemblies.get(r) {
            return Ok(a.clone());
        }
        let s = &self.spec;
        let lat = s.lattice();
        let mut out = Vec::new();
        if r.is_zero() {
            out.push(Vec::new());
        } else {
            let budget = lat.anticanonical_degree(r);
            let re = lat.dot(r, s.e());
            let pool: Vec<DivisorClass> = if budget >= 1 {
                self.candidates(budget)?
                    .iter()
                    .filter(|c| {
                        *c != s.q()
                            && lat.dot(c, s.e()) <= re
                            && lat.anticanonical_degree(c) <= budget
                            && self.plausible(&(r - c))
                    })
                    .cloned()
                    .collect()
            } else {
                Vec::new()
            };
            let mut stack = Vec::new();
            self.assemble_rec(&pool, 0, r, &mut stack, &mut out);
        }
        let out = Arc::new(out);
        self.assemblies.insert(r.clone(), out.clone());
        Ok(out)
    }

    fn assemble_rec(
        &self,
        pool: &[DivisorClass],
        start: usize,
        r: &DivisorClass,
        stack: &mut Vec<DivisorClass>,
        out: &mut Vec<Vec<DivisorClass>>,
    ) {
        let lat = self.spec.lattice();
        let e = self.spec.e();
        let (re, rk) = (lat.dot(r, e), lat.anticanonical_degree(r));
        for (i, c) in pool.iter().enumerate().skip(start) {
            if lat.dot(c, e) > re || lat.anticanonical_degree(c) > rk {
                continue;
            }
            let rest = r - c;
            if !self.plausible(&rest) {
                continue;
            }
            stack.push(c.clone());
            if rest.is_zero() {
                out.push(stack.clone());
            } else {
                self.assemble_rec(pool, i, &rest, stack, out);
            }
            stack.pop();
        }
    }

    /// Tangency data `(α_i, β_i, γ_i = θ_k)` for one factor class, with
    /// nonzero value.
    fn choices(&self, c: &DivisorClass, combo: &Combo, path: Path) -> Result<Vec<Choice>> {
        let s = &self.spec;
        let ce = s.dot(c, s.e()) as u64;
        let cq = s.dot(c, s.q());
        let mut out = Vec::new();
        for alpha in combo.alpha_left.enumerate_le() {
            let ia = alpha.iweight();
            if ia >= ce {
                continue;
            }
            for beta in TangencyVector::odd_with_weight(ce - ia) {
                let ni = cq + beta.norm() as i64 - 1;
                if ni < 0 || ni as u64 > combo.n_target {
                    continue;
                }
                let mut w = None;
                for (k, _) in beta.entries() {
                    let rest = beta
                        .checked_sub(&TangencyVector::theta(k))
                        .expect("k in support");
                    if !rest.le(&combo.beta_need) {
                        continue;
                    }
                    let value = match &w {
                        Some(v) => v,
                        None => w.insert(self.w(c, &alpha, &beta, path)?),
                    };
                    if value.is_zero() {
                        break;
                    }
                    out.push(Choice {
                        alpha: alpha.clone(),
                        beta: beta.clone(),
                        k,
                        rest,
                        n: ni as u64,
                        w: value.clone(),
                    });
                }
            }
        }
        out.sort_by(|a, b| (&a.alpha, &a.beta, a.k).cmp(&(&b.alpha, &b.beta, b.k)));
        Ok(out)
    }

    /// Calls `emit` for every split term of one consumption pattern.
    fn for_each_term(&self, ctx: &Ctx<'_>, combo: &Combo, emit: &mut Emit<'_>) -> Result<()> {
        let assemblies = self.assemblies(&combo.remainder)?;
        for classes in assemblies.iter() {
            let mut lists: Vec<Arc<Vec<Choice>>> = Vec::with_capacity(classes.len());
            let mut empty = false;
            for (i, c) in classes.iter().enumerate() {
                if i > 0 && &classes[i - 1] == c {
                    lists.push(lists[i - 1].clone());
                    continue;
                }
                let l = self.choices(c, combo, ctx.path)?;
                if l.is_empty() {
                    empty = true;
                    break;
                }
                lists.push(Arc::new(l));
            }
            if empty {
                continue;
            }
            let mut picked: Vec<usize> = Vec::with_capacity(classes.len());
            self.assign_rec(
                combo,
                classes,
                &lists,
                &TangencyVector::zero(),
                &TangencyVector::zero(),
                0,
                &mut picked,
                emit,
            )?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_rec(
        &self,
        combo: &Combo,
        classes: &[DivisorClass],
        lists: &[Arc<Vec<Choice>>],
        alpha_used: &TangencyVector,
        beta_covered: &TangencyVector,
        n_used: u64,
        picked: &mut Vec<usize>,
        emit: &mut Emit<'_>,
    ) -> Result<()> {
        let pos = picked.len();
        if pos == classes.len() {
            if beta_covered != &combo.beta_need {
                return Ok(());
            }
            if n_used != combo.n_target {
                return Err(Error::internal(format!(
                    "dimension count {n_used} differs from expected {}",
                    combo.n_target
                )));
            }
            let chosen: Vec<&Choice> = picked.iter().zip(lists).map(|(&j, l)| &l[j]).collect();
            return emit(combo, classes, &chosen);
        }
        let same_as_prev = pos > 0 && classes[pos - 1] == classes[pos];
        let start = if same_as_prev { picked[pos - 1] } else { 0 };
        for (j, ch) in lists[pos].iter().enumerate().skip(start) {
            if same_as_prev && ch.n == 0 && ch.alpha.is_zero() {
                let prev = &lists[pos][picked[pos - 1]];
                if prev.alpha == ch.alpha && prev.beta == ch.beta {
                    continue;
                }
            }
            if n_used + ch.n > combo.n_target {
                continue;
            }
            let a = alpha_used + &ch.alpha;
            if !a.le(&combo.alpha_left) {
                continue;
            }
            let b = beta_covered + &ch.rest;
            if !b.le(&combo.beta_need) {
                continue;
            }
            picked.push(j);
            self.assign_rec(combo, classes, lists, &a, &b, n_used + ch.n, picked, emit)?;
            picked.pop();
        }
        Ok(())
    }

    fn term_value(
        &self,
        ctx: &Ctx<'_>,
        combo: &Combo,
        classes: &[DivisorClass],
        chosen: &[&Choice],
    ) -> Result<RawTerm> {
        let s = &self.spec;
        // degree bookkeeping: the class equation dotted with E
        let lhs = classes.iter().map(|c| s.dot(c, s.e())).sum::<i64>()
            + 2 * combo.pairs.len() as i64
            + 2 * (2 * combo.l + combo.alpha0.iweight() + combo.beta0.iweight()) as i64;
        if lhs != ctx.de + 1 {
            return Err(Error::internal(format!(
                "E-degree bookkeeping {lhs} differs from D.E + 1 = {}",
                ctx.de + 1
            )));
        }
        let mut denom = combo.beta0.factorial();
        for ch in chosen {
            denom *= factorial(ch.n);
        }
        let (quot, rem) = factorial(ctx.n - 1).div_rem(&denom);
        if !rem.is_zero() {
            return Err(Error::internal(
                "point-distribution coefficient is not an integer".to_string(),
            ));
        }
        let mut coef = BigInt::from(quot) * (BigInt::one() << combo.beta0.norm());
        if ctx.path == Path::Full {
            coef *= combo.l + 1;
        }
        let mut parts = Vec::with_capacity(chosen.len() + 1);
        parts.push(combo.alpha0.clone());
        parts.extend(chosen.iter().map(|ch| ch.alpha.clone()));
        coef *= BigInt::from(multinomial(ctx.alpha, &parts)?);
        for ch in chosen {
            coef *= ch.beta.get(ch.k);
        }
        for &i in &combo.pairs {
            coef *= s.pair_menu()[i].weight;
        }
        let mut product = BigInt::one();
        for ch in chosen {
            product *= &ch.w;
        }
        Ok(RawTerm {
            coef,
            product,
            stab: BigInt::from(symmetry_order(classes, chosen)),
        })
    }
}

/// A split term before the division by the symmetry order of its factors.
struct RawTerm {
    coef: BigInt,
    product: BigInt,
    stab: BigInt,
}

impl RawTerm {
    /// `(coefficient, contribution)`, dividing exactly by the symmetry order.
    fn exact(self) -> Result<(BigInt, BigInt)> {
        let (coef, rem) = self.coef.div_rem(&self.stab);
        if !rem.is_zero() {
            return Err(Error::internal(
                "coefficient is not divisible by the symmetry order of its factors".to_string(),
            ));
        }
        let contribution = &coef * self.product;
        Ok((coef, contribution))
    }

    fn rational(self) -> BigRational {
        BigRational::new(self.coef * self.product, self.stab)
    }
}

/// Order of the group permuting identical factor tuples.
fn symmetry_order(classes: &[DivisorClass], chosen: &[&Choice]) -> BigUint {
    let mut out = BigUint::one();
    let mut run = 1u64;
    for i in 1..=chosen.len() {
        let same = i < chosen.len() && {
            let (a, b) = (chosen[i - 1], chosen[i]);
            classes[i - 1] == classes[i] && a.alpha == b.alpha && a.beta == b.beta && a.k == b.k
        };
        if same {
            run += 1;
        } else {
            out *= factorial(run);
            run = 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::Model;

    fn engine(model: Model, twist: Twist) -> Engine {
        Engine::new(SurfaceSpec::new(model, twist, &[], None).unwrap())
    }

    fn tv(s: &str) -> TangencyVector {
        s.parse().unwrap()
    }

    #[test]
    fn hand_expansion_of_twisted_anticanonical() {
        let e = engine(Model::CubicTwoComponent, Twist::PhiF);
        let d = e.spec().parse_class("-K").unwrap();
        let terms = e.expand(&d, &tv("1:1"), &tv("0")).unwrap();
        let contributions: Vec<i64> = terms
            .iter()
            .map(|t| i64::try_from(&t.contribution).unwrap())
            .collect();
        // the two-line split, four tangent pairs, and the Q consumption
        assert_eq!(contributions, [1, 1, 1, -1, -1, 1]);
        match &terms[0].kind {
            TermKind::Split { factors, .. } => assert_eq!(factors.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let total: BigInt = terms.iter().map(|t| &t.contribution).sum();
        assert_eq!(total, e.eval(&d, &tv("1:1"), &tv("0")).unwrap());
    }
}
