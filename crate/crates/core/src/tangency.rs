//! Finitely supported sequences of non-negative integers.
//!
//! A [`TangencyVector`] records, for each tangency order `k >= 1`, how many
//! intersection points with the auxiliary curve have that order. Absent
//! indices are zero. The representation is sparse and canonical: entries are
//! kept sorted by strictly increasing index and no stored count is zero, so
//! structural equality, hashing and ordering all agree with the mathematical
//! value.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

type Entries = SmallVec<[(u32, u32); 4]>;

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TangencyVector {
    entries: Entries,
}

pub(crate) fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

impl TangencyVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The basis vector `θ_k`.
    pub fn theta(k: u32) -> Self {
        assert!(k >= 1, "tangency orders start at 1");
        let mut entries = Entries::new();
        entries.push((k, 1));
        Self { entries }
    }

    /// `count · θ_k`.
    pub fn scaled_theta(k: u32, count: u32) -> Self {
        assert!(k >= 1, "tangency orders start at 1");
        let mut entries = Entries::new();
        if count > 0 {
            entries.push((k, count));
        }
        Self { entries }
    }

    /// Builds a vector from arbitrary `(index, count)` pairs, merging repeats
    /// and dropping zero counts.
    pub fn from_counts<I: IntoIterator<Item = (u32, u32)>>(pairs: I) -> Self {
        let mut entries: Entries = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(k, _)| k);
        let mut merged = Entries::new();
        for (k, c) in entries {
            assert!(k >= 1, "tangency orders start at 1");
            match merged.last_mut() {
                Some((lk, lc)) if *lk == k => *lc += c,
                _ => merged.push((k, c)),
            }
        }
        Self { entries: merged }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: u32) -> u32 {
        self.entries
            .binary_search_by_key(&k, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    /// Stored `(index, count)` pairs in increasing index order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// `‖v‖ = Σ v_k`.
    pub fn norm(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    /// `Iv = Σ k·v_k`.
    pub fn iweight(&self) -> u64 {
        self.entries.iter().map(|&(k, c)| k as u64 * c as u64).sum()
    }

    /// `I^v = Π k^{v_k}`.
    pub fn power_product(&self) -> BigUint {
        self.entries
            .iter()
            .fold(BigUint::one(), |acc, &(k, c)| acc * BigUint::from(k).pow(c))
    }

    /// `v! = Π v_k!`.
    pub fn factorial(&self) -> BigUint {
        self.entries
            .iter()
            .fold(BigUint::one(), |acc, &(_, c)| acc * factorial(c as u64))
    }

    pub fn is_odd_support(&self) -> bool {
        self.entries.iter().all(|&(k, _)| k % 2 == 1)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|&(k, c)| other.get(k) >= c)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if !other.le(self) {
            return None;
        }
        let entries = self
            .entries
            .iter()
            .filter_map(|&(k, c)| {
                let r = c - other.get(k);
                (r > 0).then_some((k, r))
            })
            .collect();
        Some(Self { entries })
    }

    /// Multiplies every count by `factor`.
    pub fn scale(&self, factor: u32) -> Self {
        if factor == 0 {
            return Self::zero();
        }
        Self {
            entries: self.entries.iter().map(|&(k, c)| (k, c * factor)).collect(),
        }
    }

    /// Every `w` with `0 <= w <= self`, each exactly once, in lexicographic
    /// order of the count tuple.
    pub fn enumerate_le(&self) -> EnumerateLe {
        EnumerateLe {
            bounds: self.entries.clone(),
            current: self.entries.iter().map(|_| 0).collect(),
            done: false,
        }
    }

    /// All ordered `m`-tuples of vectors summing componentwise to `self`.
    pub fn distribute(&self, m: usize) -> Distribute {
        Distribute::new(self, m)
    }

    /// All odd-support vectors `v` with `Iv = total`, largest multiplicity of
    /// `θ_1` first.
    pub fn odd_with_weight(total: u64) -> Vec<TangencyVector> {
        fn rec(k: u32, rem: u64, cur: &mut Entries, out: &mut Vec<TangencyVector>) {
            if rem == 0 {
                out.push(TangencyVector {
                    entries: cur.clone(),
                });
                return;
            }
            if k as u64 > rem {
                return;
            }
            for c in (0..=rem / k as u64).rev() {
                if c > 0 {
                    cur.push((k, c as u32));
                }
                rec(k + 2, rem - c * k as u64, cur, out);
                if c > 0 {
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(1, total, &mut Entries::new(), &mut out);
        out
    }
}

impl std::ops::Add for &TangencyVector {
    type Output = TangencyVector;

    fn add(self, rhs: &TangencyVector) -> TangencyVector {
        TangencyVector::from_counts(self.entries().chain(rhs.entries()))
    }
}

impl std::ops::Add for TangencyVector {
    type Output = TangencyVector;

    fn add(self, rhs: TangencyVector) -> TangencyVector {
        &self + &rhs
    }
}

impl std::iter::Sum for TangencyVector {
    fn sum<I: Iterator<Item = TangencyVector>>(iter: I) -> Self {
        TangencyVector::from_counts(iter.flat_map(|v| v.entries.into_iter()))
    }
}

/// `v! / (Π parts_i! · (v − Σ parts)!)`.
///
/// Fails when the parts do not fit inside `v`.
pub fn multinomial(v: &TangencyVector, parts: &[TangencyVector]) -> Result<BigUint> {
    let used: TangencyVector = parts.iter().cloned().sum();
    let rest = v
        .checked_sub(&used)
        .ok_or_else(|| Error::validation(format!("multinomial parts sum {used} exceeds {v}")))?;
    // Product of per-index multinomials, each an exact integer.
    let mut out = BigUint::one();
    for (k, total) in v.entries() {
        let mut denom = factorial(rest.get(k) as u64);
        for p in parts {
            denom *= factorial(p.get(k) as u64);
        }
        out *= factorial(total as u64) / denom;
    }
    Ok(out)
}

/// Iterator returned by [`TangencyVector::enumerate_le`].
pub struct EnumerateLe {
    bounds: Entries,
    current: SmallVec<[u32; 4]>,
    done: bool,
}

impl Iterator for EnumerateLe {
    type Item = TangencyVector;

    fn next(&mut self) -> Option<TangencyVector> {
        if self.done {
            return None;
        }
        let item = TangencyVector::from_counts(
            self.bounds
                .iter()
                .zip(self.current.iter())
                .map(|(&(k, _), &c)| (k, c)),
        );
        // odometer, last index fastest
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.current[pos] < self.bounds[pos].1 {
                self.current[pos] += 1;
                for c in self.current[pos + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
        Some(item)
    }
}

/// Iterator returned by [`TangencyVector::distribute`].
///
/// Each support index distributes its count over the `m` slots as a weak
/// composition; the tuples are the product of those choices.
pub struct Distribute {
    indices: Vec<u32>,
    compositions: Vec<Vec<Vec<u32>>>,
    cursor: Vec<usize>,
    m: usize,
    done: bool,
}

fn weak_compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut tail in weak_compositions(total - first, parts - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

impl Distribute {
    fn new(target: &TangencyVector, m: usize) -> Self {
        let indices: Vec<u32> = target.entries().map(|(k, _)| k).collect();
        let compositions: Vec<Vec<Vec<u32>>> = target
            .entries()
            .map(|(_, c)| weak_compositions(c, m))
            .collect();
        let done = compositions.iter().any(|c| c.is_empty());
        let cursor = vec![0; indices.len()];
        Self {
            indices,
            compositions,
            cursor,
            m,
            done,
        }
    }
}

impl Iterator for Distribute {
    type Item = Vec<TangencyVector>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let tuple = (0..self.m)
            .map(|slot| {
                TangencyVector::from_counts(
                    self.indices
                        .iter()
                        .zip(self.cursor.iter())
                        .enumerate()
                        .map(|(pos, (&k, &ci))| (k, self.compositions[pos][ci][slot])),
                )
            })
            .collect();
        let mut pos = self.cursor.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            if self.cursor[pos] + 1 < self.compositions[pos].len() {
                self.cursor[pos] += 1;
                for c in self.cursor[pos + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
        Some(tuple)
    }
}

impl fmt::Display for TangencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TangencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for TangencyVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Self::zero());
        }
        let mut pairs = Vec::new();
        let mut last = 0;
        for part in s.split(',') {
            let (k, c) = part
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("tangency entry `{part}` is not `k:c`")))?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad tangency index `{k}`")))?;
            let c: u32 = c
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad tangency count `{c}`")))?;
            if k == 0 || c == 0 {
                return Err(Error::parse(format!(
                    "tangency entry `{part}` must be positive"
                )));
            }
            if k <= last {
                return Err(Error::parse(format!(
                    "tangency indices must be strictly increasing in `{s}`"
                )));
            }
            last = k;
            pairs.push((k, c));
        }
        Ok(Self::from_counts(pairs))
    }
}

impl Serialize for TangencyVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TangencyVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
