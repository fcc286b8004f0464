//! Free groups `F_k` and integer lattices `Z^d`: elements, balls and
//! finite-subset combinatorics.
//!
//! Both kinds of group share one element representation, a list of
//! [`Syllable`]s (generator index with a nonzero exponent). Free-group
//! elements are fully reduced words; lattice elements keep one syllable per
//! nonzero coordinate, sorted by generator. Letters are written `a, b, c, ...`
//! with capitals for inverses, so `aB` is `a b^-1`.
//!
//! All sets use one global canonical order: word length first, then the
//! expanded letter sequence compared lexicographically with `a < A < b < B`.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{arg, Error, Result};

const MAX_GENERATORS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Free,
    Lattice,
}

/// A free group of rank `k` or the lattice `Z^d`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecRepr", into = "GroupSpecRepr")]
pub struct GroupSpec {
    kind: GroupKind,
    rank: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum GroupSpecRepr {
    Free(usize),
    Lattice(usize),
}

impl TryFrom<GroupSpecRepr> for GroupSpec {
    type Error = Error;

    fn try_from(repr: GroupSpecRepr) -> Result<Self> {
        match repr {
            GroupSpecRepr::Free(k) => GroupSpec::free(k),
            GroupSpecRepr::Lattice(d) => GroupSpec::lattice(d),
        }
    }
}

impl From<GroupSpec> for GroupSpecRepr {
    fn from(spec: GroupSpec) -> Self {
        match spec.kind {
            GroupKind::Free => GroupSpecRepr::Free(spec.rank),
            GroupKind::Lattice => GroupSpecRepr::Lattice(spec.rank),
        }
    }
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Free => write!(f, "F_{}", self.rank),
            GroupKind::Lattice => write!(f, "Z^{}", self.rank),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl GroupSpec {
    pub fn free(rank: usize) -> Result<Self> {
        Self::new(GroupKind::Free, rank)
    }

    pub fn lattice(dim: usize) -> Result<Self> {
        Self::new(GroupKind::Lattice, dim)
    }

    pub fn new(kind: GroupKind, rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_GENERATORS {
            return arg(format!(
                "group rank must be in 1..={MAX_GENERATORS}, got {rank}"
            ));
        }
        Ok(GroupSpec { kind, rank })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Rank of the free group or dimension of the lattice.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_integers(&self) -> bool {
        self.kind == GroupKind::Lattice && self.rank == 1
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            spec: *self,
            syllables: Vec::new(),
        }
    }

    pub fn generator(&self, index: usize) -> Result<GroupElement> {
        if index >= self.rank {
            return arg(format!("generator {index} out of range for {self}"));
        }
        Ok(self.letter_element(Letter::new(index as u16, false)))
    }

    /// The standard symmetric generating set `{a, A, b, B, ...}`.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.rank as u16).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
    }

    fn letter_element(&self, letter: Letter) -> GroupElement {
        GroupElement {
            spec: *self,
            syllables: vec![Syllable {
                generator: letter.generator,
                exponent: if letter.inverse { -1 } else { 1 },
            }],
        }
    }

    /// Lattice element from its coordinate vector.
    pub fn vector(&self, coords: &[i64]) -> Result<GroupElement> {
        if self.kind != GroupKind::Lattice || coords.len() != self.rank {
            return arg(format!("{coords:?} is not an element of {self}"));
        }
        let syllables = coords
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(g, &c)| {
                let exponent = i32::try_from(c)
                    .map_err(|_| Error::Argument(format!("coordinate {c} too large")))?;
                Ok(Syllable {
                    generator: g as u16,
                    exponent,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement {
            spec: *self,
            syllables,
        })
    }

    /// Parses a word such as `aB`, `e`, or for lattices also `3` / `(1,-2)`.
    pub fn parse(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        if text.is_empty() || text == "e" {
            return Ok(self.identity());
        }
        if self.kind == GroupKind::Lattice {
            let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')'));
            let numeric = inner.unwrap_or(text);
            if numeric
                .chars()
                .all(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | ',' | ' '))
            {
                let coords = numeric
                    .split(',')
                    .map(|c| c.trim().parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| {
                        Error::Argument(format!("cannot parse lattice element {text:?}"))
                    })?;
                return self.vector(&coords);
            }
        }
        let mut out = self.identity();
        for c in text.chars() {
            let letter = Letter::from_char(c)
                .filter(|l| (l.generator as usize) < self.rank)
                .ok_or_else(|| {
                    Error::Argument(format!("bad letter {c:?} in word {text:?} for {self}"))
                })?;
            out.push_letter(letter);
        }
        Ok(out)
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.spec != *self {
            return arg(format!(
                "element {g} belongs to {}, expected {self}",
                g.spec
            ));
        }
        Ok(())
    }

    /// Every element of word length at most `radius`, in canonical order.
    pub fn ball(&self, radius: usize) -> Result<FiniteSubset> {
        self.ball_with_caps(radius, &Caps::default())
    }

    pub fn ball_with_caps(&self, radius: usize, caps: &Caps) -> Result<FiniteSubset> {
        let mut seen: HashSet<GroupElement> = HashSet::new();
        seen.insert(self.identity());
        let mut frontier = vec![self.identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for g in &frontier {
                for letter in self.letters() {
                    let mut h = g.clone();
                    h.push_letter(letter);
                    if seen.insert(h.clone()) {
                        next.push(h);
                    }
                }
            }
            if seen.len() > caps.group_elements {
                return Err(Error::Resource {
                    what: "ball elements",
                    requested: format!("> {}", caps.group_elements),
                    cap: caps.group_elements as u64,
                });
            }
            frontier = next;
        }
        Ok(FiniteSubset::from_sorted_unique(*self, {
            let mut v: Vec<_> = seen.into_iter().collect();
            v.sort();
            v
        }))
    }

    /// `{0, g, g^2, ..., g^n}` for the generator with the given index.
    pub fn generator_powers(&self, generator: usize, n: usize) -> Result<FiniteSubset> {
        let g = self.generator(generator)?;
        let mut elements = Vec::with_capacity(n + 1);
        let mut cur = self.identity();
        for _ in 0..=n {
            elements.push(cur.clone());
            cur = cur.multiply(&g)?;
        }
        FiniteSubset::new(*self, elements)
    }

    /// The integer interval `[lo, hi]` in `Z`.
    pub fn interval(&self, lo: i64, hi: i64) -> Result<FiniteSubset> {
        if !self.is_integers() {
            return arg(format!("intervals need Z^1, got {self}"));
        }
        let elements = (lo..=hi)
            .map(|i| self.vector(&[i]))
            .collect::<Result<Vec<_>>>()?;
        FiniteSubset::new(*self, elements)
    }
}

/// One generator (or its inverse).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u16, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inverted(self) -> Self {
        Letter::new(self.generator, !self.inverse)
    }

    pub fn from_char(c: char) -> Option<Self> {
        if c.is_ascii_lowercase() {
            Some(Letter::new(c as u16 - 'a' as u16, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new(c as u16 - 'A' as u16, true))
        } else {
            None
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.inverse { b'A' } else { b'a' };
        (base + self.generator as u8) as char
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub generator: u16,
    pub exponent: i32,
}

/// An element of a free group (reduced word) or of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    spec: GroupSpec,
    syllables: Vec<Syllable>,
}

impl GroupElement {
    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length with respect to the standard generators (L1 norm on `Z^d`).
    pub fn length(&self) -> usize {
        self.syllables
            .iter()
            .map(|s| s.exponent.unsigned_abs() as usize)
            .sum()
    }

    /// Expanded letter sequence, left to right.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syllables.iter().flat_map(|s| {
            std::iter::repeat_n(
                Letter::new(s.generator, s.exponent < 0),
                s.exponent.unsigned_abs() as usize,
            )
        })
    }

    /// Lattice coordinates; `None` for free-group elements.
    pub fn coordinates(&self) -> Option<Vec<i64>> {
        if self.spec.kind != GroupKind::Lattice {
            return None;
        }
        let mut v = vec![0i64; self.spec.rank];
        for s in &self.syllables {
            v[s.generator as usize] = s.exponent as i64;
        }
        Some(v)
    }

    fn push_letter(&mut self, letter: Letter) {
        let delta = if letter.inverse { -1 } else { 1 };
        match self.spec.kind {
            GroupKind::Free => {
                if let Some(last) = self.syllables.last_mut() {
                    if last.generator == letter.generator {
                        last.exponent += delta;
                        if last.exponent == 0 {
                            self.syllables.pop();
                        }
                        return;
                    }
                }
                self.syllables.push(Syllable {
                    generator: letter.generator,
                    exponent: delta,
                });
            }
            GroupKind::Lattice => {
                match self
                    .syllables
                    .binary_search_by_key(&letter.generator, |s| s.generator)
                {
                    Ok(i) => {
                        self.syllables[i].exponent += delta;
                        if self.syllables[i].exponent == 0 {
                            self.syllables.remove(i);
                        }
                    }
                    Err(i) => self.syllables.insert(
                        i,
                        Syllable {
                            generator: letter.generator,
                            exponent: delta,
                        },
                    ),
                }
            }
        }
    }

    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        self.spec.check(other)?;
        let mut out = self.clone();
        match self.spec.kind {
            GroupKind::Free => {
                for s in &other.syllables {
                    if let Some(last) = out.syllables.last_mut() {
                        if last.generator == s.generator {
                            last.exponent += s.exponent;
                            if last.exponent == 0 {
                                out.syllables.pop();
                            }
                            continue;
                        }
                    }
                    out.syllables.push(*s);
                }
            }
            GroupKind::Lattice => {
                let mut coords = self.coordinates().unwrap_or_default();
                for s in &other.syllables {
                    coords[s.generator as usize] += s.exponent as i64;
                }
                out = self.spec.vector(&coords)?;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> GroupElement {
        let mut syllables: Vec<Syllable> = self
            .syllables
            .iter()
            .map(|s| Syllable {
                generator: s.generator,
                exponent: -s.exponent,
            })
            .collect();
        if self.spec.kind == GroupKind::Free {
            syllables.reverse();
        }
        GroupElement {
            spec: self.spec,
            syllables,
        }
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.length()
            .cmp(&other.length())
            .then_with(|| self.letters().cmp(other.letters()))
            .then_with(|| self.spec.cmp(&other.spec))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("e");
        }
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact nonnegative rational `num / den`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A deduplicated set of group elements in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteSubset {
    spec: GroupSpec,
    elements: Vec<GroupElement>,
}

impl FiniteSubset {
    pub fn new(spec: GroupSpec, elements: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        for g in &elements {
            spec.check(g)?;
        }
        elements.sort();
        elements.dedup();
        Ok(FiniteSubset { spec, elements })
    }

    pub fn parse(spec: GroupSpec, words: &[impl AsRef<str>]) -> Result<Self> {
        let elements = words
            .iter()
            .map(|w| spec.parse(w.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spec, elements)
    }

    fn from_sorted_unique(spec: GroupSpec, elements: Vec<GroupElement>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        FiniteSubset { spec, elements }
    }

    pub fn singleton(g: GroupElement) -> Self {
        FiniteSubset {
            spec: g.spec,
            elements: vec![g],
        }
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index_of(g).is_some()
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// Largest word length among the elements (0 for the empty set).
    pub fn radius(&self) -> usize {
        self.elements
            .iter()
            .map(GroupElement::length)
            .max()
            .unwrap_or(0)
    }

    pub fn union(&self, other: &FiniteSubset) -> Result<FiniteSubset> {
        self.spec.check(&other.spec.identity())?;
        FiniteSubset::new(
            self.spec,
            self.elements.iter().chain(other.elements.iter()).cloned(),
        )
    }

    pub fn inverse(&self) -> FiniteSubset {
        let mut elements: Vec<_> = self.elements.iter().map(GroupElement::inverse).collect();
        elements.sort();
        FiniteSubset::from_sorted_unique(self.spec, elements)
    }

    /// Left translate `gF`.
    pub fn translate(&self, g: &GroupElement) -> Result<FiniteSubset> {
        let elements = self
            .elements
            .iter()
            .map(|f| g.multiply(f))
            .collect::<Result<Vec<_>>>()?;
        FiniteSubset::new(self.spec, elements)
    }

    /// Compact label: the word list for small sets, a size summary otherwise.
    pub fn label(&self) -> String {
        if self.len() <= 8 {
            let words: Vec<String> = self.elements.iter().map(ToString::to_string).collect();
            format!("{{{}}}", words.join(","))
        } else {
            format!("{{{} elements, radius {}}}", self.len(), self.radius())
        }
    }
}

impl fmt::Debug for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a FiniteSubset {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// `{ w f : w in W, f in F }` in canonical order.
pub fn product_set(w: &FiniteSubset, f: &FiniteSubset) -> Result<FiniteSubset> {
    product_set_with_caps(w, f, &Caps::default())
}

pub fn product_set_with_caps(
    w: &FiniteSubset,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<FiniteSubset> {
    if w.spec != f.spec {
        return arg(format!("product of subsets of {} and {}", w.spec, f.spec));
    }
    let mut seen = HashSet::with_capacity(w.len() * f.len());
    for a in w {
        for b in f {
            seen.insert(a.multiply(b)?);
            if seen.len() > caps.group_elements {
                return Err(Error::Resource {
                    what: "product set elements",
                    requested: format!("> {}", caps.group_elements),
                    cap: caps.group_elements as u64,
                });
            }
        }
    }
    let mut elements: Vec<_> = seen.into_iter().collect();
    elements.sort();
    Ok(FiniteSubset::from_sorted_unique(w.spec, elements))
}

/// `|WF| / |F|` as an exact ratio.
pub fn expansion_ratio(w: &FiniteSubset, f: &FiniteSubset) -> Result<Ratio> {
    if f.is_empty() {
        return arg("expansion ratio over an empty set");
    }
    let wf = product_set(w, f)?;
    Ok(Ratio::new(wf.len() as u64, f.len() as u64))
}

/// `F ∪ F^{-1}`.
pub fn symmetrize(f: &FiniteSubset) -> FiniteSubset {
    f.union(&f.inverse()).expect("same group")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> GroupSpec {
        GroupSpec::free(2).unwrap()
    }

    fn z1() -> GroupSpec {
        GroupSpec::lattice(1).unwrap()
    }

    fn w(spec: GroupSpec, s: &str) -> GroupElement {
        spec.parse(s).unwrap()
    }

    fn set(spec: GroupSpec, words: &[&str]) -> FiniteSubset {
        FiniteSubset::parse(spec, words).unwrap()
    }

    /// Brute force: all letter strings of length <= r, freely reduced, deduplicated.
    fn ball_oracle(k: usize, r: usize) -> usize {
        let letters: Vec<(usize, i32)> = (0..k).flat_map(|g| [(g, 1), (g, -1)]).collect();
        let mut all: HashSet<Vec<(usize, i32)>> = HashSet::new();
        let mut words: Vec<Vec<(usize, i32)>> = vec![vec![]];
        for _ in 0..=r {
            let mut next = Vec::new();
            for word in &words {
                let mut stack: Vec<(usize, i32)> = Vec::new();
                for &l in word {
                    if stack.last() == Some(&(l.0, -l.1)) {
                        stack.pop();
                    } else {
                        stack.push(l);
                    }
                }
                all.insert(stack);
                for &l in &letters {
                    let mut longer = word.clone();
                    longer.push(l);
                    next.push(longer);
                }
            }
            words = next;
        }
        all.len()
    }

    fn ball_closed_form(k: u64, r: u32) -> u64 {
        1 + 2 * k * ((2 * k - 1).pow(r) - 1) / (2 * k - 2)
    }

    #[test]
    fn multiply_examples() {
        let g = f2();
        assert!(w(g, "a").multiply(&w(g, "A")).unwrap().is_identity());
        assert_eq!(w(g, "ab").multiply(&w(g, "B")).unwrap(), w(g, "a"));
        let z2 = GroupSpec::lattice(2).unwrap();
        let p = z2
            .vector(&[1, 2])
            .unwrap()
            .multiply(&z2.vector(&[3, -1]).unwrap())
            .unwrap();
        assert_eq!(p.coordinates().unwrap(), vec![4, 1]);
    }

    #[test]
    fn multiply_rejects_mixed_groups() {
        let a = w(f2(), "a");
        let b = w(GroupSpec::free(3).unwrap(), "a");
        assert!(matches!(a.multiply(&b), Err(Error::Argument(_))));
        assert!(a.multiply(&w(z1(), "1")).is_err());
    }

    #[test]
    fn parse_and_display() {
        let g = f2();
        assert_eq!(w(g, "aAb").to_string(), "b");
        assert_eq!(w(g, "e").to_string(), "e");
        assert!(g.parse("c").is_err());
        assert_eq!(w(z1(), "-3").coordinates().unwrap(), vec![-3]);
        assert_eq!(w(z1(), "AAA"), w(z1(), "-3"));
        let z2 = GroupSpec::lattice(2).unwrap();
        assert_eq!(w(z2, "(1,-2)").to_string(), "aBB");
        assert_eq!(w(z2, "BaB"), w(z2, "(1,-2)"));
    }

    #[test]
    fn ball_sizes_match_enumeration() {
        let g = f2();
        for (r, expected) in [(0, 1), (1, 5), (2, 17), (3, 53)] {
            assert_eq!(g.ball(r).unwrap().len(), expected);
            assert_eq!(ball_oracle(2, r), expected);
            if r > 0 {
                assert_eq!(ball_closed_form(2, r as u32), expected as u64);
            }
        }
        let f3 = GroupSpec::free(3).unwrap();
        for r in 1..=3 {
            assert_eq!(f3.ball(r).unwrap().len(), ball_oracle(3, r));
            assert_eq!(
                f3.ball(r).unwrap().len() as u64,
                ball_closed_form(3, r as u32)
            );
        }
    }

    #[test]
    fn ball_in_integers_is_interval() {
        let b = z1().ball(3).unwrap();
        assert_eq!(b, z1().interval(-3, 3).unwrap());
        assert_eq!(b.len(), 7);
        assert_eq!(GroupSpec::lattice(2).unwrap().ball(2).unwrap().len(), 13);
    }

    #[test]
    fn canonical_order() {
        let b = f2().ball(1).unwrap();
        let words: Vec<String> = b.iter().map(ToString::to_string).collect();
        assert_eq!(words, ["e", "a", "A", "b", "B"]);
    }

    #[test]
    fn ball_cap_is_enforced() {
        let caps = Caps {
            group_elements: 20,
            ..Caps::default()
        };
        assert!(f2().ball_with_caps(2, &caps).is_ok());
        assert!(matches!(
            f2().ball_with_caps(3, &caps),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn product_set_examples() {
        let g = f2();
        let f = set(g, &["a", "bA", "B"]);
        assert_eq!(product_set(&set(g, &["e"]), &f).unwrap(), f);
        let b1 = g.ball(1).unwrap();
        assert_eq!(product_set(&b1, &b1).unwrap(), g.ball(2).unwrap());
        let z = z1();
        assert_eq!(
            product_set(&set(z, &["0", "1"]), &set(z, &["0", "2"])).unwrap(),
            z.interval(0, 3).unwrap()
        );
    }

    #[test]
    fn expansion_ratio_examples() {
        let g = f2();
        let r = expansion_ratio(&set(g, &["e"]), &g.ball(2).unwrap()).unwrap();
        assert_eq!(r, Ratio::new(1, 1));
        let r = expansion_ratio(&g.ball(1).unwrap(), &g.ball(2).unwrap()).unwrap();
        assert_eq!(r, Ratio { num: 53, den: 17 });
        assert!((r.to_f64() - 3.117_647).abs() < 1e-6);
        let z = z1();
        for n in 0..10 {
            let r = expansion_ratio(&set(z, &["0", "1"]), &z.interval(0, n).unwrap()).unwrap();
            assert_eq!(r, Ratio::new(n as u64 + 2, n as u64 + 1));
        }
        let empty = FiniteSubset::new(g, Vec::new()).unwrap();
        assert!(expansion_ratio(&g.ball(1).unwrap(), &empty).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let g = f2();
        assert_eq!(symmetrize(&set(g, &["e"])), set(g, &["e"]));
        assert_eq!(
            symmetrize(&set(g, &["a", "ab"])),
            set(g, &["a", "A", "ab", "BA"])
        );
        let z = z1();
        assert_eq!(
            symmetrize(&set(z, &["1", "2"])),
            set(z, &["-2", "-1", "1", "2"])
        );
    }

    #[test]
    fn free_group_is_nonamenable_at_desk_scale() {
        let g = f2();
        let b1 = g.ball(1).unwrap();
        for r in 1..=5 {
            assert!(expansion_ratio(&b1, &g.ball(r).unwrap()).unwrap().to_f64() >= 3.0);
        }
    }

    #[test]
    fn ball_products_nest() {
        let g = f2();
        for r1 in 0..3 {
            for r2 in 0..3 {
                let p = product_set(&g.ball(r1).unwrap(), &g.ball(r2).unwrap()).unwrap();
                assert!(p.is_subset(&g.ball(r1 + r2).unwrap()));
            }
            assert!(g.ball(r1).unwrap().is_subset(&g.ball(r1 + 1).unwrap()));
        }
    }

    fn arb_word(rank: usize) -> impl Strategy<Value = String> {
        let alphabet: Vec<char> = (0..rank as u8)
            .flat_map(|g| [(b'a' + g) as char, (b'A' + g) as char])
            .collect();
        proptest::collection::vec(proptest::sample::select(alphabet), 0..8)
            .prop_map(|v| v.into_iter().collect())
    }

    fn arb_spec() -> impl Strategy<Value = GroupSpec> {
        prop_oneof![
            (1usize..4).prop_map(|k| GroupSpec::free(k).unwrap()),
            (1usize..4).prop_map(|d| GroupSpec::lattice(d).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn group_axioms(spec in arb_spec(), a in arb_word(3), b in arb_word(3), c in arb_word(3)) {
            let clip = |s: &str| s.chars().filter(|ch| (ch.to_ascii_lowercase() as usize - 'a' as usize) < spec.rank()).collect::<String>();
            let (x, y, z) = (spec.parse(&clip(&a)).unwrap(), spec.parse(&clip(&b)).unwrap(), spec.parse(&clip(&c)).unwrap());
            let e = spec.identity();
            prop_assert_eq!(x.multiply(&y).unwrap().multiply(&z).unwrap(), x.multiply(&y.multiply(&z).unwrap()).unwrap());
            prop_assert_eq!(x.multiply(&e).unwrap(), x.clone());
            prop_assert_eq!(e.multiply(&x).unwrap(), x.clone());
            prop_assert!(x.multiply(&x.inverse()).unwrap().is_identity());
            prop_assert!(x.inverse().multiply(&x).unwrap().is_identity());
        }
    }

    proptest! {
        #[test]
        fn symmetrize_idempotent_and_expansion_at_least_one(words in proptest::collection::vec(arb_word(2), 1..6), wwords in proptest::collection::vec(arb_word(2), 0..4)) {
            let g = f2();
            let f = FiniteSubset::parse(g, &words).unwrap();
            let s = symmetrize(&f);
            prop_assert_eq!(symmetrize(&s), s.clone());
            prop_assert!(f.is_subset(&s));
            let mut wset = wwords.clone();
            wset.push("e".into());
            let wset = FiniteSubset::parse(g, &wset).unwrap();
            let wf = product_set(&wset, &f).unwrap();
            prop_assert!(wf.len() >= wset.len().max(f.len()) || !f.contains(&g.identity()));
            prop_assert!(wf.len() >= f.len());
            prop_assert!(expansion_ratio(&wset, &f).unwrap().to_f64() >= 1.0);
        }
    }
}
