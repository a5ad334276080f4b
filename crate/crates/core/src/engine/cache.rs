//! Persistent memo store.
//!
//! ```text
//! WELSCHINGER-CACHE v1
//! <surface id>|<class>|<alpha>|<beta>\t<decimal value>
//! ...
//! #count=<number of records>
//! ```
//!
//! Records of the reduced cubic recursion carry the surface id with a
//! `/reduced` suffix. Records are written in sorted order, through a
//! temporary file renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path as FsPath;

use num_bigint::BigInt;

use super::{Engine, MemoKey};
use crate::error::{Error, Result};
use crate::tangency::TangencyVector;

pub const CACHE_HEADER: &str = "WELSCHINGER-CACHE v1";
const REDUCED_SUFFIX: &str = "/reduced";

type RecordKey = (String, String, String, String);

/// Cache records of any number of surfaces, keyed textually.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CacheFile {
    records: BTreeMap<RecordKey, BigInt>,
}

impl CacheFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record counts per surface id, in id order.
    pub fn surface_counts(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for (s, ..) in self.records.keys() {
            match out.last_mut() {
                Some((last, n)) if last == s => *n += 1,
                _ => out.push((s.clone(), 1)),
            }
        }
        out
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        if header != CACHE_HEADER {
            return Err(Error::CacheVersion {
                expected: CACHE_HEADER.to_string(),
                found: header.to_string(),
            });
        }
        let mut records = BTreeMap::new();
        let mut declared = None;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if declared.is_some() {
                return Err(Error::CacheRecord {
                    line: lineno,
                    reason: "content after the record count".to_string(),
                });
            }
            if let Some(count) = line.strip_prefix("#count=") {
                let n: usize = count.parse().map_err(|_| Error::CacheRecord {
                    line: lineno,
                    reason: format!("bad record count `{count}`"),
                })?;
                declared = Some(n);
                continue;
            }
            let bad = |reason: &str| Error::CacheRecord {
                line: lineno,
                reason: reason.to_string(),
            };
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| bad("missing tab separator"))?;
            let parts: Vec<&str> = key.split('|').collect();
            if parts.len() != 4 {
                return Err(bad("key must have four `|`-separated fields"));
            }
            let alpha: TangencyVector = parts[2].parse().map_err(|_| bad("bad alpha"))?;
            let beta: TangencyVector = parts[3].parse().map_err(|_| bad("bad beta"))?;
            let value: BigInt = value.trim().parse().map_err(|_| bad("bad value"))?;
            records.insert(
                (
                    parts[0].to_string(),
                    parts[1].to_string(),
                    alpha.to_string(),
                    beta.to_string(),
                ),
                value,
            );
        }
        match declared {
            None => Err(Error::CacheIntegrity(
                "missing `#count=` trailer (truncated file?)".to_string(),
            )),
            Some(n) if n != records.len() => Err(Error::CacheIntegrity(format!(
                "trailer declares {n} records, found {}",
                records.len()
            ))),
            Some(_) => Ok(Self { records }),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(CACHE_HEADER);
        out.push('\n');
        for ((s, d, a, b), v) in &self.records {
            out.push_str(&format!("{s}|{d}|{a}|{b}\t{v}\n"));
        }
        out.push_str(&format!("#count={}\n", self.records.len()));
        out
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.render().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Copies every memoized value of `engine` into the file.
    pub fn absorb(&mut self, engine: &Engine) {
        let spec = engine.spec();
        let id = spec.id().to_string();
        let reduced = format!("{id}{REDUCED_SUFFIX}");
        for (surface, memo) in [(&id, &engine.memo), (&reduced, &engine.reduced_memo)] {
            for entry in memo.iter() {
                let (d, a, b) = entry.key();
                self.records.insert(
                    (
                        surface.clone(),
                        spec.format_class(d),
                        a.to_string(),
                        b.to_string(),
                    ),
                    entry.value().clone(),
                );
            }
        }
    }

    /// Seeds `engine` with the records of its surface; returns how many.
    pub fn seed(&self, engine: &Engine) -> Result<usize> {
        let spec = engine.spec();
        let id = spec.id().to_string();
        let reduced = format!("{id}{REDUCED_SUFFIX}");
        let mut n = 0;
        for ((s, d, a, b), v) in &self.records {
            let memo = if s == &id {
                &engine.memo
            } else if s == &reduced {
                &engine.reduced_memo
            } else {
                continue;
            };
            let class = spec.parse_class(d)?;
            let key: MemoKey = (class, a.parse()?, b.parse()?);
            memo.insert(key, v.clone());
            n += 1;
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_header() {
        let err = CacheFile::parse("WELSCHINGER-CACHE v0\n#count=0\n").unwrap_err();
        assert!(matches!(err, Error::CacheVersion { .. }));
    }

    #[test]
    fn detects_truncation() {
        let text = format!("{CACHE_HEADER}\nB1/tF/bd/E1,0,0|1,1,1|0|1:1\t4\n");
        assert!(matches!(
            CacheFile::parse(&text),
            Err(Error::CacheIntegrity(_))
        ));
        let text = format!("{CACHE_HEADER}\nB1/tF/bd/E1,0,0|1,1,1|0|1:1\t4\n#count=2\n");
        assert!(matches!(
            CacheFile::parse(&text),
            Err(Error::CacheIntegrity(_))
        ));
    }

    #[test]
    fn reports_line_of_bad_record() {
        let text = format!("{CACHE_HEADER}\nB1/tF/bd/E1,0,0|1,1,1|0|1:1\t4\nnonsense\n#count=2\n");
        match CacheFile::parse(&text) {
            Err(Error::CacheRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn file_round_trip_seeds_an_engine() {
        use crate::surfaces::{Model, SurfaceSpec, Twist};
        let spec = || SurfaceSpec::new(Model::CubicTwoComponent, Twist::PhiF, &[], None).unwrap();
        let d = crate::picard::DivisorClass::new(&[2, 2, 2]);
        let (a, b) = (TangencyVector::zero(), TangencyVector::scaled_theta(1, 2));
        let warm = Engine::new(spec());
        let v = warm.eval(&d, &a, &b).unwrap();
        warm.eval_reduced(&d, &a, &b).unwrap();
        let mut file = CacheFile::new();
        file.absorb(&warm);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache");
        file.save(&path).unwrap();
        let loaded = CacheFile::load(&path).unwrap();
        assert_eq!(loaded, file);
        let fresh = Engine::new(spec());
        assert_eq!(loaded.seed(&fresh).unwrap(), file.len());
        assert_eq!(fresh.eval(&d, &a, &b).unwrap(), v);
        assert_eq!(fresh.stats().misses, 0);
        // other surfaces' records are skipped
        let other = Engine::new(
            SurfaceSpec::new(Model::CubicTwoComponent, Twist::Trivial, &[], None).unwrap(),
        );
        assert_eq!(loaded.seed(&other).unwrap(), 0);
    }

    #[test]
    fn text_round_trip() {
        let text = format!("{CACHE_HEADER}\nB1/tF/bd/E1,0,0|1,1,1|0|1:1\t4\n#count=1\n");
        let c = CacheFile::parse(&text).unwrap();
        assert_eq!(c.render(), text);
    }
}
