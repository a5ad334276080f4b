//! Picard-lattice arithmetic for the two surface families.
//!
//! The plane model is `Z^7` with basis `L, E_1, ..., E_6` and Gram matrix
//! `diag(1, -1, ..., -1)`. The cubic model is the rank-3 lattice of real
//! classes on the two-component cubic, with basis the three real lines
//! `L_1, L_2, L_3`: `L_i^2 = -1`, `L_i . L_j = 1`.
//!
//! Coordinates are coefficients in the basis, so the plane class written
//! `d;m1,...,m6` (that is `dL - sum m_i E_i`) has coordinates `(d, -m1, ..., -m6)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    coords: SmallVec<[i32; 7]>,
}

impl DivisorClass {
    pub fn new(coords: &[i32]) -> Self {
        Self {
            coords: SmallVec::from_slice(coords),
        }
    }

    pub fn zero(rank: usize) -> Self {
        Self {
            coords: SmallVec::from_elem(0, rank),
        }
    }

    /// The `i`-th basis vector.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut d = Self::zero(rank);
        d.coords[i] = 1;
        d
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        debug_assert_eq!(self.rank(), rhs.rank());
        DivisorClass {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        debug_assert_eq!(self.rank(), rhs.rank());
        DivisorClass {
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul<&DivisorClass> for i32 {
    type Output = DivisorClass;
    fn mul(self, rhs: &DivisorClass) -> DivisorClass {
        DivisorClass {
            coords: rhs.coords.iter().map(|a| self * a).collect(),
        }
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// `P^2` blown up at six points.
    Plane,
    /// Real classes of the two-component cubic in the basis of its real lines.
    CubicReal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    rank: usize,
    gram: Vec<i64>,
    lines: Vec<DivisorClass>,
}

/// Either a divisor class or the class sum of a conjugate pair, for
/// [`Lattice::r_dim`].
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Class(&'a DivisorClass),
    Pair(&'a DivisorClass),
}

impl Lattice {
    pub fn plane() -> Self {
        let rank = 7;
        let mut gram = vec![0; rank * rank];
        gram[0] = 1;
        for i in 1..rank {
            gram[i * rank + i] = -1;
        }
        Self::with_lines(LatticeKind::Plane, rank, gram)
    }

    pub fn cubic_real() -> Self {
        let rank = 3;
        let gram = (0..rank * rank)
            .map(|ij| if ij / rank == ij % rank { -1 } else { 1 })
            .collect();
        Self::with_lines(LatticeKind::CubicReal, rank, gram)
    }

    fn with_lines(kind: LatticeKind, rank: usize, gram: Vec<i64>) -> Self {
        let mut lat = Self {
            kind,
            rank,
            gram,
            lines: Vec::new(),
        };
        lat.lines = lat.build_line_classes();
        lat
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.rank + j]
    }

    pub fn intersect(&self, a: &DivisorClass, b: &DivisorClass) -> Result<i64> {
        if a.rank() != self.rank || b.rank() != self.rank {
            return Err(Error::validation(format!(
                "rank mismatch: lattice has rank {}, classes have ranks {} and {}",
                self.rank,
                a.rank(),
                b.rank()
            )));
        }
        Ok(self.dot(a, b))
    }

    /// Intersection without the rank check.
    #[inline]
    pub fn dot(&self, a: &DivisorClass, b: &DivisorClass) -> i64 {
        let (a, b) = (a.coords(), b.coords());
        match self.kind {
            LatticeKind::Plane => {
                let mut s = a[0] as i64 * b[0] as i64;
                for i in 1..7 {
                    s -= a[i] as i64 * b[i] as i64;
                }
                s
            }
            LatticeKind::CubicReal => {
                // -x.y + sum_{i != j} x_i y_j
                let sa: i64 = a.iter().map(|&x| x as i64).sum();
                let sb: i64 = b.iter().map(|&x| x as i64).sum();
                let diag: i64 = a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum();
                sa * sb - 2 * diag
            }
        }
    }

    pub fn canonical_class(&self) -> DivisorClass {
        match self.kind {
            LatticeKind::Plane => DivisorClass::new(&[-3, 1, 1, 1, 1, 1, 1]),
            LatticeKind::CubicReal => DivisorClass::new(&[-1, -1, -1]),
        }
    }

    /// `-K . D`.
    #[inline]
    pub fn anticanonical_degree(&self, d: &DivisorClass) -> i64 {
        match self.kind {
            LatticeKind::Plane => {
                let c = d.coords();
                3 * c[0] as i64 + c[1..].iter().map(|&x| x as i64).sum::<i64>()
            }
            LatticeKind::CubicReal => d.coords().iter().map(|&x| x as i64).sum(),
        }
    }

    /// `R(target, beta) = -target.(K+E) + |beta| - 1` for a class, `- 2` for a
    /// pair. `beta` is the combined vector (real part plus twice the imaginary
    /// part).
    pub fn r_dim(&self, e: &DivisorClass, target: Target<'_>, beta: &crate::TangencyVector) -> i64 {
        let ke = &self.canonical_class() + e;
        let (class, shift) = match target {
            Target::Class(c) => (c, 1),
            Target::Pair(c) => (c, 2),
        };
        -self.dot(class, &ke) + beta.norm() as i64 - shift
    }

    /// All `(-1)`-curve classes: 27 on the plane model, the three real lines
    /// on the cubic model.
    pub fn line_classes(&self) -> &[DivisorClass] {
        &self.lines
    }

    fn build_line_classes(&self) -> Vec<DivisorClass> {
        match self.kind {
            LatticeKind::Plane => {
                let mut out = Vec::with_capacity(27);
                for i in 1..7 {
                    out.push(DivisorClass::basis(7, i));
                }
                for i in 1..7 {
                    for j in i + 1..7 {
                        let mut c = [0; 7];
                        c[0] = 1;
                        c[i] = -1;
                        c[j] = -1;
                        out.push(DivisorClass::new(&c));
                    }
                }
                for i in 1..7 {
                    let mut c = [-1; 7];
                    c[0] = 2;
                    c[i] = 0;
                    out.push(DivisorClass::new(&c));
                }
                out
            }
            LatticeKind::CubicReal => (0..3).map(|i| DivisorClass::basis(3, i)).collect(),
        }
    }

    /// Nef test: `D = 0`, or `D.Λ >= 0` for every line class and `K.D < 0`.
    pub fn is_nef(&self, d: &DivisorClass) -> bool {
        if d.is_zero() {
            return true;
        }
        self.anticanonical_degree(d) > 0 && self.line_classes().iter().all(|l| self.dot(d, l) >= 0)
    }

    pub fn is_nef_big(&self, d: &DivisorClass) -> bool {
        self.is_nef(d) && self.dot(d, d) > 0
    }

    /// All nonzero nef classes with `lo <= -K.D <= hi`, in increasing
    /// coordinate order.
    pub fn nef_classes(&self, lo: i64, hi: i64) -> Vec<DivisorClass> {
        let lo = lo.max(1);
        let mut out = Vec::new();
        if hi < lo {
            return out;
        }
        match self.kind {
            LatticeKind::Plane => {
                // Summing any five of the m_i is at most 2d, so
                // -K.D >= 3d - 12d/5, i.e. d <= 5(-K.D)/3.
                let dmax = (5 * hi) / 3;
                for d in 0..=dmax as i32 {
                    let mut m = [0i32; 6];
                    plane_nef_rec(d, 0, 0, lo, hi, &mut m, &mut out);
                }
                out.retain(|c| self.is_nef(c));
            }
            LatticeKind::CubicReal => {
                for d1 in 0..=hi as i32 {
                    for d2 in 0..=(hi as i32 - d1) {
                        for d3 in 0..=(hi as i32 - d1 - d2) {
                            let s = (d1 + d2 + d3) as i64;
                            if s < lo {
                                continue;
                            }
                            let c = DivisorClass::new(&[d1, d2, d3]);
                            if self.is_nef(&c) {
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn parse_class(&self, s: &str) -> Result<DivisorClass> {
        let t = s.trim();
        if let Some(n) = parse_anticanonical_multiple(t)? {
            return Ok(-n * &self.canonical_class());
        }
        let ints = |part: &str| -> Result<Vec<i32>> {
            part.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i32>()
                        .map_err(|_| Error::parse(format!("bad integer `{x}` in class `{s}`")))
                })
                .collect()
        };
        match self.kind {
            LatticeKind::Plane => {
                let (d, ms) = t.split_once(';').ok_or_else(|| {
                    Error::parse(format!("plane class `{s}` is not `d;m1,...,m6`"))
                })?;
                let d: i32 = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(format!("bad degree `{d}` in class `{s}`")))?;
                let ms = ints(ms)?;
                if ms.len() != 6 {
                    return Err(Error::parse(format!(
                        "plane class `{s}` needs six multiplicities, got {}",
                        ms.len()
                    )));
                }
                let mut c = vec![d];
                c.extend(ms.iter().map(|m| -m));
                Ok(DivisorClass::new(&c))
            }
            LatticeKind::CubicReal => {
                let c = ints(t)?;
                if c.len() != 3 {
                    return Err(Error::parse(format!(
                        "cubic class `{s}` needs three coordinates, got {}",
                        c.len()
                    )));
                }
                Ok(DivisorClass::new(&c))
            }
        }
    }

    /// Inverse of [`Lattice::parse_class`] (never emits the `-nK` shorthands).
    pub fn format_class(&self, d: &DivisorClass) -> String {
        let c = d.coords();
        match self.kind {
            LatticeKind::Plane => {
                let ms: Vec<String> = c[1..].iter().map(|x| (-x).to_string()).collect();
                format!("{};{}", c[0], ms.join(","))
            }
            LatticeKind::CubicReal => {
                let v: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                v.join(",")
            }
        }
    }

    /// A class rendered through [`Lattice::format_class`] for serialization.
    pub fn display<'a>(&'a self, d: &'a DivisorClass) -> ClassDisplay<'a> {
        ClassDisplay {
            lattice: self,
            class: d,
        }
    }
}

pub(crate) fn parse_anticanonical_multiple(t: &str) -> Result<Option<i32>> {
    let Some(body) = t.strip_prefix('-').and_then(|r| r.strip_suffix('K')) else {
        return Ok(None);
    };
    if body.is_empty() {
        return Ok(Some(1));
    }
    match body.parse::<i32>() {
        Ok(n) if n >= 1 => Ok(Some(n)),
        _ => Err(Error::parse(format!("bad anticanonical shorthand `{t}`"))),
    }
}

fn plane_nef_rec(
    d: i32,
    pos: usize,
    sum: i32,
    lo: i64,
    hi: i64,
    m: &mut [i32; 6],
    out: &mut Vec<DivisorClass>,
) {
    let left = (6 - pos) as i32;
    // -K.D = 3d - sum(m) must land in [lo, hi]
    if (3 * d - sum) as i64 - (left as i64) * d as i64 > hi || ((3 * d - sum) as i64) < lo {
        return;
    }
    if pos == 6 {
        let mut c = [0; 7];
        c[0] = d;
        for i in 0..6 {
            c[i + 1] = -m[i];
        }
        out.push(DivisorClass::new(&c));
        return;
    }
    // pairwise m_i + m_j <= d bounds the next entry
    let cap = m[..pos].iter().map(|&x| d - x).min().unwrap_or(d);
    for v in 0..=cap {
        m[pos] = v;
        plane_nef_rec(d, pos + 1, sum + v, lo, hi, m, out);
    }
    m[pos] = 0;
}

pub struct ClassDisplay<'a> {
    lattice: &'a Lattice,
    class: &'a DivisorClass,
}

impl fmt::Display for ClassDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lattice.format_class(self.class))
    }
}

impl Serialize for ClassDisplay<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Complex conjugation acting on the basis by an index involution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Conjugation {
    perm: Vec<usize>,
}

impl Conjugation {
    pub fn identity(rank: usize) -> Self {
        Self {
            perm: (0..rank).collect(),
        }
    }

    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        for (i, &p) in perm.iter().enumerate() {
            if p >= perm.len() || perm[p] != i {
                return Err(Error::validation(format!(
                    "conjugation {perm:?} is not an involution"
                )));
            }
        }
        Ok(Self { perm })
    }

    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn is_real_index(&self, i: usize) -> bool {
        self.perm[i] == i
    }

    pub fn apply(&self, d: &DivisorClass) -> DivisorClass {
        let c = d.coords();
        let mut out = DivisorClass::zero(c.len());
        for (i, &x) in c.iter().enumerate() {
            out.coords[self.perm[i]] = x;
        }
        out
    }

    pub fn is_invariant(&self, d: &DivisorClass) -> bool {
        d.coords()
            .iter()
            .enumerate()
            .all(|(i, &x)| d.coords()[self.perm[i]] == x)
    }
}
