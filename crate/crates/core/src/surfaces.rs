//! Real structures, pair menus and initial tables.
//!
//! Plane models `P2[a,b]` use the labeling "real exceptional classes first,
//! then conjugate pairs": `E_1..E_a` real, `(E_{a+1}, E_{a+2})`, ... conjugate.
//! When `a + 2b < 6` the remaining indices are treated as real points that
//! have been blown down. The auxiliary curve is `E = L - E_p - E_q` for an
//! "E-pair" `{p, q}` (both real or conjugate); the other four indices play a
//! symmetric role in every table below.
//!
//! The cubic models work in the real lattice spanned by the real lines. The
//! conic bundle `B` is the cubic with `L_1` contracted: its classes are the
//! cubic classes orthogonal to `L_1`, and its invariants are computed with the
//! full cubic recursion (the auxiliary line always meets the contracted one, so
//! the filter applies to inputs only).

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::picard::{
    parse_anticanonical_multiple, Conjugation, DivisorClass, Lattice, LatticeKind, Target,
};
use crate::tangency::TangencyVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// `P^2` blown up at `real` real points and `pairs` conjugate pairs.
    Plane { real: u8, pairs: u8 },
    /// The cubic surface with two-component real part.
    CubicTwoComponent,
    /// The conic bundle obtained by contracting a real line of the cubic.
    ConicBundle,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Plane { real, pairs } => write!(f, "P2[{real},{pairs}]"),
            Model::CubicTwoComponent => f.write_str("B1"),
            Model::ConicBundle => f.write_str("B"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "B1" => return Ok(Model::CubicTwoComponent),
            "B" => return Ok(Model::ConicBundle),
            _ => {}
        }
        let inner = t
            .strip_prefix("P2[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| {
                Error::parse(format!("unknown surface `{s}` (expected P2[a,b], B1 or B)"))
            })?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| Error::parse(format!("surface `{s}` is not P2[a,b]")))?;
        let real: u8 = a
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad real-point count in `{s}`")))?;
        let pairs: u8 = b
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad pair count in `{s}`")))?;
        Ok(Model::Plane { real, pairs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Twist {
    Trivial,
    /// The class of the real components other than the constrained one.
    PhiF,
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Twist::Trivial => "0",
            Twist::PhiF => "F",
        })
    }
}

impl FromStr for Twist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Twist::Trivial),
            "F" => Ok(Twist::PhiF),
            other => Err(Error::parse(format!(
                "unknown twist `{other}` (expected 0 or F)"
            ))),
        }
    }
}

/// A conjugate pair of classes entering the recursion as a single item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairItem {
    pub id: String,
    pub class_sum: DivisorClass,
    /// The two conjugate classes, when they live in the model's lattice.
    pub members: Option<(DivisorClass, DivisorClass)>,
    pub beta_im: TangencyVector,
    pub weight: i32,
}

#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    model: Model,
    twist: Twist,
    lattice: Lattice,
    conj: Conjugation,
    /// Basis indices of contracted curves.
    blown_down: Vec<usize>,
    e: DivisorClass,
    k: DivisorClass,
    q: DivisorClass,
    /// Plane only: the two exceptional indices in `E` and the other four.
    e_pair: (usize, usize),
    others: [usize; 4],
    pair_menu: Vec<PairItem>,
    id: String,
}

fn plane_line(i: usize, j: usize) -> DivisorClass {
    let mut c = [0; 7];
    c[0] = 1;
    c[i] = -1;
    c[j] = -1;
    DivisorClass::new(&c)
}

impl SurfaceSpec {
    /// Builds a surface. `blowdown` lists 1-based exceptional indices (plane)
    /// or line indices (cubic); `e_choice` overrides the default auxiliary curve.
    pub fn new(
        model: Model,
        twist: Twist,
        blowdown: &[usize],
        e_choice: Option<DivisorClass>,
    ) -> Result<Self> {
        match model {
            Model::Plane { real, pairs } => Self::plane(real, pairs, twist, blowdown, e_choice),
            Model::CubicTwoComponent | Model::ConicBundle => {
                Self::cubic(model, twist, blowdown, e_choice)
            }
        }
    }

    fn plane(
        real: u8,
        pairs: u8,
        twist: Twist,
        blowdown: &[usize],
        e_choice: Option<DivisorClass>,
    ) -> Result<Self> {
        let (a, b) = (real as usize, pairs as usize);
        if a + 2 * b > 6 || b > 3 {
            return Err(Error::validation(format!(
                "P2[{a},{b}] needs a+2b <= 6 and b <= 3"
            )));
        }
        if twist != Twist::Trivial {
            return Err(Error::validation(format!(
                "twist {twist} unsupported: P2[{a},{b}] has connected real part"
            )));
        }
        let lattice = Lattice::plane();
        let mut perm: Vec<usize> = (0..7).collect();
        for p in 0..b {
            let i = a + 1 + 2 * p;
            perm[i] = i + 1;
            perm[i + 1] = i;
        }
        let conj = Conjugation::from_perm(perm)?;
        let mut blown: Vec<usize> = (a + 2 * b + 1..=6).collect();
        for &j in blowdown {
            if !(1..=6).contains(&j) {
                return Err(Error::validation(format!(
                    "blow-down index {j} outside 1..6"
                )));
            }
            blown.push(j);
        }
        blown.sort_unstable();
        blown.dedup();
        for &j in &blown {
            if !blown.contains(&conj.image(j)) {
                return Err(Error::validation(format!(
                    "blow-down set must be conjugation-closed: E{j} listed without E{}",
                    conj.image(j)
                )));
            }
        }

        let e_pair = match &e_choice {
            Some(e) => {
                let c = e.coords();
                if e.rank() != 7 {
                    return Err(Error::validation(
                        "auxiliary curve has wrong rank".to_string(),
                    ));
                }
                let idx: Vec<usize> = (1..7).filter(|&i| c[i] != 0).collect();
                if c[0] != 1 || idx.len() != 2 || idx.iter().any(|&i| c[i] != -1) {
                    return Err(Error::validation(format!(
                        "auxiliary curve {} must have the form L-Ei-Ej",
                        lattice.format_class(e)
                    )));
                }
                (idx[0], idx[1])
            }
            None => {
                if a >= 2 {
                    (1, 2)
                } else if b >= 1 {
                    (a + 1, a + 2)
                } else {
                    return Err(Error::validation(format!(
                        "P2[{a},{b}] has no real line of the form L-Ei-Ej"
                    )));
                }
            }
        };
        let (p, q) = e_pair;
        let pair_ok = (conj.is_real_index(p) && conj.is_real_index(q)) || conj.image(p) == q;
        if !pair_ok {
            return Err(Error::validation(format!(
                "auxiliary curve L-E{p}-E{q} is not conjugation-invariant"
            )));
        }
        if blown.contains(&p) || blown.contains(&q) {
            return Err(Error::validation(format!(
                "blow-down removes the auxiliary curve L-E{p}-E{q}"
            )));
        }
        let mut others = [0usize; 4];
        for (slot, i) in others.iter_mut().zip((1..7).filter(|&i| i != p && i != q)) {
            *slot = i;
        }
        let e = plane_line(p, q);
        let k = lattice.canonical_class();
        let q_class = -&(&k + &e);
        let mut spec = Self {
            model: Model::Plane { real, pairs },
            twist,
            lattice,
            conj,
            blown_down: blown,
            e,
            k,
            q: q_class,
            e_pair,
            others,
            pair_menu: Vec::new(),
            id: String::new(),
        };
        spec.pair_menu = spec.build_plane_menu();
        spec.finish()
    }

    fn cubic(
        model: Model,
        twist: Twist,
        blowdown: &[usize],
        e_choice: Option<DivisorClass>,
    ) -> Result<Self> {
        let lattice = Lattice::cubic_real();
        let mut blown: Vec<usize> = Vec::new();
        for &j in blowdown {
            if !(1..=3).contains(&j) {
                return Err(Error::validation(format!(
                    "blow-down line index {j} outside 1..3"
                )));
            }
            blown.push(j - 1);
        }
        if model == Model::ConicBundle && blown.is_empty() {
            blown.push(0);
        }
        blown.sort_unstable();
        blown.dedup();
        if blown.len() > 1 {
            return Err(Error::validation(
                "at most one real line of the cubic can be contracted".to_string(),
            ));
        }
        let model = if blown.is_empty() {
            Model::CubicTwoComponent
        } else {
            Model::ConicBundle
        };
        let e = match e_choice {
            Some(e) => {
                if !lattice.line_classes().contains(&e) {
                    return Err(Error::validation(format!(
                        "auxiliary curve {} is not a real line",
                        lattice.format_class(&e)
                    )));
                }
                e
            }
            None => {
                let i = (0..3).find(|i| !blown.contains(i)).unwrap_or(0);
                DivisorClass::basis(3, i)
            }
        };
        if blown.iter().any(|&j| e == DivisorClass::basis(3, j)) {
            return Err(Error::validation(
                "blow-down removes the auxiliary curve".to_string(),
            ));
        }
        let k = lattice.canonical_class();
        let q = -&(&k + &e);
        let weights = match twist {
            Twist::PhiF => [1, 1, -1, -1],
            Twist::Trivial => [-1, -1, -1, -1],
        };
        let pair_menu = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| PairItem {
                id: format!("tangent-pair-{}", i + 1),
                class_sum: q.clone(),
                members: None,
                beta_im: TangencyVector::theta(1),
                weight: w,
            })
            .collect();
        let spec = Self {
            model,
            twist,
            conj: Conjugation::identity(3),
            lattice,
            blown_down: blown,
            e,
            k,
            q,
            e_pair: (0, 0),
            others: [0; 4],
            pair_menu,
            id: String::new(),
        };
        spec.finish()
    }

    fn finish(mut self) -> Result<Self> {
        // K of the contracted surface, pulled back: K - Σ contracted curves
        let rank = self.lattice.rank();
        for &j in &self.blown_down {
            self.k = &self.k - &DivisorClass::basis(rank, j);
        }
        for item in &self.pair_menu {
            let two = item.beta_im.scale(2);
            if self.lattice.dot(&item.class_sum, &self.e) < 1
                || self
                    .lattice
                    .r_dim(&self.e, Target::Pair(&item.class_sum), &two)
                    != 0
                || !self.conj.is_invariant(&item.class_sum)
            {
                return Err(Error::internal(format!(
                    "inadmissible pair item {}",
                    item.id
                )));
            }
            if let Some((a, b)) = &item.members {
                if &self.conj.apply(a) != b {
                    return Err(Error::internal(format!(
                        "pair item {} not conjugate",
                        item.id
                    )));
                }
            }
        }
        let blown: Vec<String> = self
            .blown_down
            .iter()
            .map(|i| self.external_index(*i))
            .collect();
        self.id = format!(
            "{}/t{}/bd{}/E{}",
            self.model,
            self.twist,
            blown.join(","),
            self.lattice.format_class(&self.e)
        );
        Ok(self)
    }

    fn external_index(&self, i: usize) -> String {
        match self.lattice.kind() {
            LatticeKind::Plane => i.to_string(),
            LatticeKind::CubicReal => (i + 1).to_string(),
        }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn twist(&self) -> Twist {
        self.twist
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn conjugation(&self) -> &Conjugation {
        &self.conj
    }

    pub fn e(&self) -> &DivisorClass {
        &self.e
    }

    /// Canonical class of the surface itself (pulled back when curves are
    /// contracted). The recursion uses the ambient one through `q`.
    pub fn canonical_class(&self) -> &DivisorClass {
        &self.k
    }

    /// `-K.D` on the surface.
    pub fn anticanonical_degree(&self, d: &DivisorClass) -> i64 {
        -self.lattice.dot(&self.k, d)
    }

    /// `-(K + E)`.
    pub fn q(&self) -> &DivisorClass {
        &self.q
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn blown_down(&self) -> &[usize] {
        &self.blown_down
    }

    /// The contracted curves as 1-based indices, as accepted by [`Self::new`].
    pub fn blowdown_indices(&self) -> Vec<usize> {
        match self.lattice.kind() {
            LatticeKind::Plane => self.blown_down.clone(),
            LatticeKind::CubicReal => self.blown_down.iter().map(|i| i + 1).collect(),
        }
    }

    pub fn pair_menu(&self) -> &[PairItem] {
        &self.pair_menu
    }

    pub fn is_plane(&self) -> bool {
        self.lattice.kind() == LatticeKind::Plane
    }

    pub fn format_class(&self, d: &DivisorClass) -> String {
        self.lattice.format_class(d)
    }

    /// Class text; `-K`, `-2K`, ... name multiples of this surface's
    /// anticanonical class.
    pub fn parse_class(&self, s: &str) -> Result<DivisorClass> {
        if let Some(n) = parse_anticanonical_multiple(s.trim())? {
            return Ok(-n * &self.k);
        }
        self.lattice.parse_class(s)
    }

    pub fn dot(&self, a: &DivisorClass, b: &DivisorClass) -> i64 {
        self.lattice.dot(a, b)
    }

    pub fn conj_class(&self, d: &DivisorClass) -> DivisorClass {
        self.conj.apply(d)
    }

    /// Whether `d` is a class of the (possibly blown-down) surface.
    pub fn admits(&self, d: &DivisorClass) -> bool {
        match self.lattice.kind() {
            LatticeKind::Plane => self.blown_down.iter().all(|&j| d.coords()[j] == 0),
            LatticeKind::CubicReal => self
                .blown_down
                .iter()
                .all(|&j| self.lattice.dot(d, &DivisorClass::basis(3, j)) == 0),
        }
    }

    /// Whether `d` may appear as a factor class inside the recursion.
    ///
    /// On the plane the auxiliary curve is disjoint from the contracted
    /// curves, so the filter is exact for factors as well. On the cubic the
    /// auxiliary line meets the contracted one and the recursion runs on the
    /// whole cubic lattice.
    pub fn factor_allowed(&self, d: &DivisorClass) -> bool {
        match self.lattice.kind() {
            LatticeKind::Plane => self.admits(d),
            LatticeKind::CubicReal => true,
        }
    }

    pub fn r_dim(&self, target: Target<'_>, beta: &TangencyVector) -> i64 {
        self.lattice.r_dim(&self.e, target, beta)
    }

    /// Classes that may carry a nonzero invariant as a factor: conjugation
    /// invariant lines meeting `E`, and nef classes with `1 <= -K.D <= budget`
    /// meeting `E`. `-(K+E)` is not excluded here.
    pub fn candidate_factors(&self, antik_budget: i64) -> Result<Vec<DivisorClass>> {
        if antik_budget < 1 {
            return Err(Error::validation(format!(
                "candidate budget must be at least 1, got {antik_budget}"
            )));
        }
        let keep = |c: &DivisorClass| {
            self.lattice.dot(c, &self.e) >= 1 && self.conj.is_invariant(c) && self.factor_allowed(c)
        };
        let mut out: Vec<DivisorClass> = self
            .lattice
            .line_classes()
            .iter()
            .filter(|c| keep(c))
            .cloned()
            .collect();
        out.extend(
            self.lattice
                .nef_classes(1, antik_budget)
                .into_iter()
                .filter(|c| keep(c)),
        );
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn build_plane_menu(&self) -> Vec<PairItem> {
        let conj = &self.conj;
        let (p1, p2) = self.e_pair;
        let o = self.others;
        let mut menu = Vec::new();
        let mut push = |id: String, a: DivisorClass, b: DivisorClass, weight: i32| {
            menu.push(PairItem {
                id,
                class_sum: &a + &b,
                members: Some((a, b)),
                beta_im: TangencyVector::theta(1),
                weight,
            });
        };
        if conj.image(p1) == p2 {
            push(
                format!("{{E{p1},E{p2}}}"),
                DivisorClass::basis(7, p1),
                DivisorClass::basis(7, p2),
                1,
            );
        }
        for &i in &o {
            if !conj.is_real_index(i) {
                continue;
            }
            for &j in &o {
                let k = conj.image(j);
                if j != i && k > j && k != i {
                    push(
                        format!("{{L-E{i}-E{j},L-E{i}-E{k}}}"),
                        plane_line(i, j),
                        plane_line(i, k),
                        1,
                    );
                }
            }
        }
        if conj.image(p1) == p2 {
            let mut a = self.q.clone();
            let mut b = self.q.clone();
            a = &a - &DivisorClass::basis(7, p1);
            b = &b - &DivisorClass::basis(7, p2);
            push(format!("{{Q-E{p1},Q-E{p2}}}"), a, b, 1);
        }
        let conj_pairs: Vec<(usize, usize)> = o
            .iter()
            .filter(|&&j| conj.image(j) > j)
            .map(|&j| (j, conj.image(j)))
            .collect();
        if let [(i, k), (j, l)] = conj_pairs[..] {
            // members of each item must be swapped by conjugation
            push(
                format!("{{L-E{i}-E{j},L-E{k}-E{l}}}"),
                plane_line(i, j),
                plane_line(k, l),
                -1,
            );
            push(
                format!("{{L-E{i}-E{l},L-E{k}-E{j}}}"),
                plane_line(i, l),
                plane_line(k, j),
                -1,
            );
        }
        menu.retain(|item| self.admits(&item.class_sum));
        menu
    }

    /// Value of the tabulated initial families at a key with `R = 0`.
    pub fn initial_weight(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> Result<i64> {
        if !alpha.is_odd_support() || !beta.is_odd_support() {
            return Err(Error::validation(
                "tangency vectors must have odd support".to_string(),
            ));
        }
        if (alpha.iweight() + beta.iweight()) as i64 != self.dot(d, &self.e) {
            return Err(Error::validation(format!(
                "I(alpha) + I(beta) = {} differs from D.E = {}",
                alpha.iweight() + beta.iweight(),
                self.dot(d, &self.e)
            )));
        }
        if self.r_dim(Target::Class(d), beta) != 0 {
            return Err(Error::validation("initial weight needs R = 0".to_string()));
        }
        Ok(self.initial_weight_unchecked(d, alpha, beta))
    }

    pub(crate) fn initial_weight_unchecked(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> i64 {
        if !self.conj.is_invariant(d) || !self.factor_allowed(d) {
            return 0;
        }
        if alpha.is_zero() && beta.is_zero() {
            // a line disjoint from E is the unique curve in its class
            return i64::from(self.lattice.line_classes().contains(d) && self.dot(d, &self.e) == 0);
        }
        let t1 = TangencyVector::theta(1);
        if d == &self.q {
            return i64::from(alpha == &t1 && beta == &t1);
        }
        match self.lattice.kind() {
            LatticeKind::CubicReal => {
                let is_other_line = self.lattice.line_classes().contains(d) && d != &self.e;
                i64::from(is_other_line && alpha.is_zero() && beta == &t1)
            }
            LatticeKind::Plane => self.plane_initial(d, alpha, beta),
        }
    }

    fn plane_initial(
        &self,
        d: &DivisorClass,
        alpha: &TangencyVector,
        beta: &TangencyVector,
    ) -> i64 {
        let conj = &self.conj;
        let (p1, p2) = self.e_pair;
        let e_pair_real = conj.is_real_index(p1) && conj.is_real_index(p2);
        let t1 = TangencyVector::theta(1);
        if alpha.is_zero() && beta == &t1 {
            for p in [p1, p2] {
                if e_pair_real
                    && (d == &DivisorClass::basis(7, p)
                        || d == &(&self.q - &DivisorClass::basis(7, p)))
                {
                    return 1;
                }
            }
            for (x, &i) in self.others.iter().enumerate() {
                for &j in &self.others[x + 1..] {
                    let real =
                        (conj.is_real_index(i) && conj.is_real_index(j)) || conj.image(i) == j;
                    if real && d == &plane_line(i, j) {
                        return 1;
                    }
                }
            }
            return 0;
        }
        if !beta.is_zero() {
            return 0;
        }
        let c = d.coords();
        let deg = c[0] as i64;
        let (s1, s2) = (-(c[p1] as i64), -(c[p2] as i64));
        if !(0..=1).contains(&s1) || !(0..=1).contains(&s2) {
            return 0;
        }
        if s1 != s2 && !e_pair_real {
            return 0;
        }
        let ms: Vec<i64> = self.others.iter().map(|&i| -(c[i] as i64)).collect();
        let ia = alpha.iweight() as i64;
        let mut sorted = ms.clone();
        sorted.sort_unstable();
        let distinguished = |m: i64| {
            let pos = ms.iter().position(|&x| x == m).expect("value present");
            self.others[pos]
        };
        if deg % 2 == 1 {
            // sQ + L - s1 E_p1 - s2 E_p2 - E_i
            let s = (deg - 1) / 2;
            if s >= 0 && sorted == [s, s, s, s + 1] && s1 + s2 <= 2 * s {
                let i = distinguished(s + 1);
                return i64::from(conj.is_real_index(i) && ia == 2 * s + 1 - s1 - s2);
            }
        } else {
            // sQ - s1 E_p1 - s2 E_p2 + E_i
            let s = deg / 2;
            if s >= 1 && sorted == [s - 1, s, s, s] && s1 + s2 < 2 * s {
                let i = distinguished(s - 1);
                return i64::from(conj.is_real_index(i) && ia == 2 * s - s1 - s2);
            }
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(a: u8, b: u8) -> SurfaceSpec {
        SurfaceSpec::new(
            Model::Plane { real: a, pairs: b },
            Twist::Trivial,
            &[],
            None,
        )
        .unwrap()
    }

    fn cubic(twist: Twist) -> SurfaceSpec {
        SurfaceSpec::new(Model::CubicTwoComponent, twist, &[], None).unwrap()
    }

    #[test]
    fn twist_rejected_on_plane() {
        let err = SurfaceSpec::new(Model::Plane { real: 4, pairs: 1 }, Twist::PhiF, &[], None);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn blown_down_plane() {
        let s = SurfaceSpec::new(
            Model::Plane { real: 3, pairs: 1 },
            Twist::Trivial,
            &[6],
            None,
        )
        .unwrap();
        assert_eq!(s.blown_down(), &[6]);
        assert!(!s.admits(&s.parse_class("1;0,0,0,0,0,1").unwrap()));
        assert!(SurfaceSpec::new(
            Model::Plane { real: 6, pairs: 0 },
            Twist::Trivial,
            &[1],
            None
        )
        .is_err());
        assert!(SurfaceSpec::new(
            Model::Plane { real: 4, pairs: 1 },
            Twist::Trivial,
            &[5],
            None
        )
        .is_err());
    }

    #[test]
    fn menus() {
        assert!(plane(6, 0).pair_menu().is_empty());
        let m41 = plane(4, 1);
        assert_eq!(m41.pair_menu().len(), 2);
        assert!(m41.pair_menu().iter().all(|p| p.weight == 1));
        let m22 = plane(2, 2);
        assert_eq!(m22.pair_menu().len(), 2);
        assert!(m22.pair_menu().iter().all(|p| p.weight == -1));
        let sum = m22.parse_class("2;0,0,1,1,1,1").unwrap();
        assert!(m22.pair_menu().iter().all(|p| p.class_sum == sum));
        let m03 = plane(0, 3);
        let mut w: Vec<i32> = m03.pair_menu().iter().map(|p| p.weight).collect();
        w.sort();
        assert_eq!(w, vec![-1, -1, 1, 1]);
        let f = cubic(Twist::PhiF);
        let w: Vec<i32> = f.pair_menu().iter().map(|p| p.weight).collect();
        assert_eq!(w, vec![1, 1, -1, -1]);
        assert_eq!(w.iter().sum::<i32>(), 0);
        assert_eq!(
            cubic(Twist::Trivial)
                .pair_menu()
                .iter()
                .map(|p| p.weight)
                .sum::<i32>(),
            -4
        );
        for item in f.pair_menu() {
            assert_eq!(&item.class_sum, f.q());
        }
    }

    #[test]
    fn menu_members_are_conjugate() {
        for (a, b) in [(4, 1), (2, 2), (0, 3)] {
            let s = plane(a, b);
            for item in s.pair_menu() {
                let (x, y) = item.members.as_ref().unwrap();
                assert_eq!(&s.conj_class(x), y);
                assert_eq!(s.dot(&item.class_sum, s.e()), 2);
            }
        }
    }

    #[test]
    fn initial_table_examples() {
        let t1 = TangencyVector::theta(1);
        let z = TangencyVector::zero();
        let s = plane(6, 0);
        let e1 = s.parse_class("0;-1,0,0,0,0,0").unwrap();
        assert_eq!(s.initial_weight(&e1, &z, &t1).unwrap(), 1);
        let d = &(s.q() + &s.parse_class("1;1,1,1,0,0,0").unwrap()) - &DivisorClass::zero(7);
        assert_eq!(s.initial_weight(&d, &t1, &z).unwrap(), 1);
        let c = cubic(Twist::PhiF);
        assert_eq!(c.initial_weight(c.q(), &t1, &t1).unwrap(), 1);
        let s03 = plane(0, 3);
        assert_eq!(s03.initial_weight(&e1, &z, &t1).unwrap(), 0);
        assert!(s
            .initial_weight(&e1, &z, &TangencyVector::theta(3))
            .is_err());
    }

    #[test]
    fn candidate_examples() {
        let c = cubic(Twist::PhiF);
        let got = c.candidate_factors(2).unwrap();
        let want: Vec<DivisorClass> = ["0,1,0", "0,0,1", "0,1,1"]
            .iter()
            .map(|s| c.parse_class(s).unwrap())
            .collect();
        let mut want = want;
        want.sort();
        assert_eq!(got, want);
        assert!(c.candidate_factors(0).is_err());
        let s = plane(6, 0);
        let lines = s.candidate_factors(1).unwrap();
        let brute = s
            .lattice()
            .line_classes()
            .iter()
            .filter(|l| s.dot(l, s.e()) == 1)
            .count();
        assert_eq!(lines.len(), brute);
        assert_eq!(lines.len(), 10);
    }

    #[test]
    fn surface_text() {
        assert_eq!(
            "P2[4,1]".parse::<Model>().unwrap(),
            Model::Plane { real: 4, pairs: 1 }
        );
        assert_eq!("B".parse::<Model>().unwrap(), Model::ConicBundle);
        assert!("P3[1,1]".parse::<Model>().is_err());
        assert_eq!("F".parse::<Twist>().unwrap(), Twist::PhiF);
        assert!("x".parse::<Twist>().is_err());
        let s = plane(6, 0);
        assert!(!s.id().contains('|'));
    }

    #[test]
    fn unsupported_small_planes() {
        assert!(SurfaceSpec::new(
            Model::Plane { real: 1, pairs: 0 },
            Twist::Trivial,
            &[],
            None
        )
        .is_err());
        assert!(SurfaceSpec::new(
            Model::Plane { real: 0, pairs: 1 },
            Twist::Trivial,
            &[],
            None
        )
        .is_ok());
    }
}
