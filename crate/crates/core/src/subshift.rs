//! Subshifts given by finitely many forbidden patterns, and counts of the
//! labelings of a finite set that avoid them.
//!
//! A pattern `p` on shape `P` occurs in `x` at `g` when `x(g s) = p(s)` for
//! every `s` in `P`; a labeling of `F` is locally admissible when no
//! translate `gP ⊆ F` carries a forbidden pattern.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::caps::{checked_pow, Caps};
use crate::error::{arg, Error, Result};
use crate::group::{FiniteSubset, GroupElement, GroupSpec};
use crate::report::BoundKind;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    shape: FiniteSubset,
    labels: Vec<usize>,
}

impl Pattern {
    /// `labels[i]` labels the `i`-th element of `shape` in canonical order.
    pub fn new(shape: FiniteSubset, labels: Vec<usize>) -> Result<Self> {
        if shape.is_empty() || shape.len() != labels.len() {
            return arg(format!(
                "pattern with {} labels on {} cells",
                labels.len(),
                shape.len()
            ));
        }
        Ok(Pattern { shape, labels })
    }

    /// Pattern from unordered `(element, label)` pairs.
    pub fn from_pairs(spec: GroupSpec, pairs: Vec<(GroupElement, usize)>) -> Result<Self> {
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return arg("pattern labels one coordinate twice");
        }
        let (elements, labels): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Pattern::new(FiniteSubset::new(spec, elements)?, labels)
    }

    pub fn shape(&self) -> &FiniteSubset {
        &self.shape
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subshift {
    alphabet: Vec<String>,
    group: GroupSpec,
    forbidden: Vec<Pattern>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubshiftFile {
    alphabet: Vec<String>,
    group: GroupSpec,
    #[serde(default)]
    forbidden: Vec<PatternFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    shape: Vec<String>,
    labels: Vec<String>,
}

impl Subshift {
    pub fn new(alphabet: Vec<String>, group: GroupSpec, forbidden: Vec<Pattern>) -> Result<Self> {
        if alphabet.is_empty() {
            return arg("empty alphabet");
        }
        if alphabet.len() > u8::MAX as usize {
            return arg("alphabets are limited to 255 letters");
        }
        let unique: HashSet<&String> = alphabet.iter().collect();
        if unique.len() != alphabet.len() {
            return arg("alphabet letters must be distinct");
        }
        for p in &forbidden {
            if p.shape.spec() != group {
                return arg(format!(
                    "forbidden pattern in {} for a subshift of {group}",
                    p.shape.spec()
                ));
            }
            if p.labels.iter().any(|&l| l >= alphabet.len()) {
                return arg("forbidden pattern uses a letter outside the alphabet");
            }
        }
        let mut forbidden = forbidden;
        forbidden.sort();
        forbidden.dedup();
        Ok(Subshift {
            alphabet,
            group,
            forbidden,
        })
    }

    pub fn full_shift(group: GroupSpec, letters: usize) -> Result<Self> {
        Subshift::new(
            (0..letters).map(|i| i.to_string()).collect(),
            group,
            Vec::new(),
        )
    }

    /// The one-letter system: a single fixed point.
    pub fn single_point(group: GroupSpec) -> Result<Self> {
        Self::full_shift(group, 1)
    }

    /// Binary sequences with no two adjacent 1s along the first generator.
    pub fn golden_mean(group: GroupSpec) -> Result<Self> {
        let shape = FiniteSubset::new(group, [group.identity(), group.generator(0)?])?;
        Subshift::new(
            vec!["0".into(), "1".into()],
            group,
            vec![Pattern::new(shape, vec![1, 1])?],
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SubshiftFile = serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("subshift file: {e}")))?;
        Self::from_file(file)
    }

    fn from_file(file: SubshiftFile) -> Result<Self> {
        let letter = |l: &str| {
            file.alphabet
                .iter()
                .position(|a| a == l)
                .ok_or_else(|| Error::Argument(format!("letter {l:?} is not in the alphabet")))
        };
        let mut forbidden = Vec::new();
        for p in &file.forbidden {
            if p.shape.len() != p.labels.len() {
                return arg(format!(
                    "forbidden pattern with shape {:?} has {} labels",
                    p.shape,
                    p.labels.len()
                ));
            }
            let pairs = p
                .shape
                .iter()
                .zip(&p.labels)
                .map(|(w, l)| Ok((file.group.parse(w)?, letter(l)?)))
                .collect::<Result<Vec<_>>>()?;
            forbidden.push(Pattern::from_pairs(file.group, pairs)?);
        }
        Subshift::new(file.alphabet, file.group, forbidden)
    }

    /// Compact JSON with shapes in canonical order and patterns sorted and
    /// deduplicated: equal subshift descriptions give identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let file = SubshiftFile {
            alphabet: self.alphabet.clone(),
            group: self.group,
            forbidden: self
                .forbidden
                .iter()
                .map(|p| PatternFile {
                    shape: p.shape.iter().map(ToString::to_string).collect(),
                    labels: p.labels.iter().map(|&l| self.alphabet[l].clone()).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn forbidden(&self) -> &[Pattern] {
        &self.forbidden
    }

    pub fn is_full(&self) -> bool {
        self.forbidden.is_empty()
    }

    /// A `Z`-subshift whose forbidden shapes fit in translates of `{0, 1}`.
    pub fn is_one_step_integer(&self) -> bool {
        self.group.is_integers()
            && self.forbidden.iter().all(|p| {
                let xs: Vec<i64> = p
                    .shape
                    .iter()
                    .map(|g| g.coordinates().expect("lattice")[0])
                    .collect();
                xs.iter().max().unwrap() - xs.iter().min().unwrap() <= 1
            })
    }

    /// Product system on pairs of letters, labeled `(x,y)`.
    pub fn product(&self, other: &Subshift) -> Result<Subshift> {
        if self.group != other.group {
            return arg(format!(
                "product of subshifts of {} and {}",
                self.group, other.group
            ));
        }
        let (k1, k2) = (self.alphabet_size(), other.alphabet_size());
        let alphabet = self
            .alphabet
            .iter()
            .flat_map(|x| other.alphabet.iter().map(move |y| format!("({x},{y})")))
            .collect();
        let mut forbidden = Vec::new();
        for (p, first, free) in self
            .forbidden
            .iter()
            .map(|p| (p, true, k2))
            .chain(other.forbidden.iter().map(|p| (p, false, k1)))
        {
            let total = checked_pow(free as u64, p.shape.len())
                .filter(|&t| t <= 1 << 16)
                .ok_or_else(|| Error::Argument("product pattern expansion too large".into()))?;
            let mut digits = vec![0usize; p.shape.len()];
            for code in 0..total {
                crate::codec::decode_into(code, free, &mut digits);
                let labels = p
                    .labels
                    .iter()
                    .zip(&digits)
                    .map(|(&l, &d)| if first { l * k2 + d } else { d * k2 + l })
                    .collect();
                forbidden.push(Pattern::new(p.shape.clone(), labels)?);
            }
        }
        Subshift::new(alphabet, self.group, forbidden)
    }

    /// The `Z`-subshift seen along the cyclic subgroup of one generator:
    /// forbidden patterns lying in a coset of that subgroup, read as integer offsets.
    pub fn restrict_to_generator(&self, generator: usize) -> Result<Subshift> {
        self.group.generator(generator)?;
        let z = GroupSpec::lattice(1)?;
        let mut forbidden = Vec::new();
        'patterns: for p in &self.forbidden {
            let base = p.shape.elements()[0].inverse();
            let mut pairs = Vec::new();
            for (g, &l) in p.shape.iter().zip(&p.labels) {
                let h = base.multiply(g)?;
                let offset = match h.syllables() {
                    [] => 0,
                    [s] if s.generator as usize == generator => s.exponent as i64,
                    _ => continue 'patterns,
                };
                pairs.push((z.vector(&[offset])?, l));
            }
            forbidden.push(Pattern::from_pairs(z, pairs)?);
        }
        Subshift::new(self.alphabet.clone(), z, forbidden)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    FullShift,
    TransferMatrix,
    LocalAdmissibility,
}

/// The number of cells of the letter cover joined over `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternCount {
    /// `None` when the count overflows `u128`.
    pub count: Option<u128>,
    pub log_count: f64,
    pub bound: BoundKind,
    pub method: CountMethod,
}

/// Counts labelings of `F` by the letter cover.
///
/// Exact for full shifts (closed form) and one-step `Z`-subshifts (transfer
/// matrix on the essential letters); otherwise a count of locally admissible
/// labelings, which is an upper bound.
pub fn admissible_pattern_count(
    s: &Subshift,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<PatternCount> {
    check_domain(s, f)?;
    if s.is_full() {
        let k = s.alphabet_size();
        return Ok(PatternCount {
            count: u32::try_from(f.len())
                .ok()
                .and_then(|n| (k as u128).checked_pow(n)),
            log_count: f.len() as f64 * (k as f64).ln(),
            bound: BoundKind::Exact,
            method: CountMethod::FullShift,
        });
    }
    if s.is_one_step_integer() {
        return Ok(transfer_matrix_count(s, f));
    }
    let count = local_pattern_count(s, f, caps)?;
    Ok(PatternCount {
        count: Some(count),
        log_count: (count as f64).ln(),
        bound: BoundKind::Upper,
        method: CountMethod::LocalAdmissibility,
    })
}

fn check_domain(s: &Subshift, f: &FiniteSubset) -> Result<()> {
    if f.is_empty() {
        return arg("pattern count over an empty set");
    }
    if f.spec() != s.group {
        return arg(format!("set in {} for a subshift of {}", f.spec(), s.group));
    }
    Ok(())
}

/// Placement of a forbidden pattern inside `F`, checked once the largest
/// position is labeled.
pub(crate) struct Placement {
    positions: Vec<usize>,
    labels: Vec<usize>,
}

pub(crate) fn placements(s: &Subshift, f: &FiniteSubset) -> Result<Vec<Vec<Placement>>> {
    let mut by_trigger: Vec<Vec<Placement>> = (0..f.len()).map(|_| Vec::new()).collect();
    for p in &s.forbidden {
        let first_inv = p.shape.elements()[0].inverse();
        for anchor in f {
            let g = anchor.multiply(&first_inv)?;
            let positions: Option<Vec<usize>> = p
                .shape
                .iter()
                .map(|x| g.multiply(x).ok().and_then(|y| f.index_of(&y)))
                .collect();
            if let Some(positions) = positions {
                let trigger = *positions.iter().max().unwrap();
                by_trigger[trigger].push(Placement {
                    positions,
                    labels: p.labels.clone(),
                });
            }
        }
    }
    Ok(by_trigger)
}

/// Whether labeling position `depth` completes a forbidden placement.
pub(crate) fn clashes(checks: &[Vec<Placement>], depth: usize, labels: &[usize]) -> bool {
    checks[depth].iter().any(|p| {
        p.positions
            .iter()
            .zip(&p.labels)
            .all(|(&i, &l)| labels[i] == l)
    })
}

/// Visits every locally admissible labeling of `F` (letters indexed in
/// canonical order of `F`) in lexicographic order. The visitor returns
/// `false` to stop early.
pub fn for_each_local_pattern(
    s: &Subshift,
    f: &FiniteSubset,
    caps: &Caps,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<()> {
    check_domain(s, f)?;
    caps.check_cells("labelings", s.alphabet_size(), f.len())?;
    let checks = placements(s, f)?;
    let mut labels = vec![0usize; f.len()];
    descend(0, &mut labels, s.alphabet_size(), &checks, &mut visit);
    Ok(())
}

fn descend(
    depth: usize,
    labels: &mut Vec<usize>,
    k: usize,
    checks: &[Vec<Placement>],
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if depth == labels.len() {
        return visit(labels);
    }
    for a in 0..k {
        labels[depth] = a;
        if !clashes(checks, depth, labels) && !descend(depth + 1, labels, k, checks, visit) {
            return false;
        }
    }
    true
}

/// Number of locally admissible labelings of `F`.
pub fn local_pattern_count(s: &Subshift, f: &FiniteSubset, caps: &Caps) -> Result<u128> {
    let mut n = 0u128;
    for_each_local_pattern(s, f, caps, |_| {
        n += 1;
        true
    })?;
    Ok(n)
}

/// Number of distinct images of the locally admissible labelings of `F`
/// after merging letters by `cell_of_letter`.
pub fn coarsened_pattern_count(
    s: &Subshift,
    f: &FiniteSubset,
    cell_of_letter: &[usize],
    caps: &Caps,
) -> Result<u128> {
    if cell_of_letter.len() != s.alphabet_size() {
        return arg("letter merge map must cover the alphabet");
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for_each_local_pattern(s, f, caps, |labels| {
        seen.insert(labels.iter().map(|&a| cell_of_letter[a]).collect());
        true
    })?;
    Ok(seen.len() as u128)
}

/// Boolean transition matrix of a one-step `Z`-subshift restricted to the
/// letters that lie on a bi-infinite path.
fn essential_transitions(s: &Subshift) -> (Vec<bool>, Vec<Vec<bool>>) {
    let k = s.alphabet_size();
    let mut alive = vec![true; k];
    let mut step = vec![vec![true; k]; k];
    for p in &s.forbidden {
        let xs: Vec<i64> = p
            .shape
            .iter()
            .map(|g| g.coordinates().expect("lattice")[0])
            .collect();
        match (&xs[..], &p.labels[..]) {
            ([_], [a]) => alive[*a] = false,
            ([_, _], [a, b]) => step[*a][*b] = false,
            _ => unreachable!("one-step shapes have at most two cells"),
        }
    }
    loop {
        let mut changed = false;
        for a in 0..k {
            if !alive[a] {
                continue;
            }
            let has_next = (0..k).any(|b| alive[b] && step[a][b]);
            let has_prev = (0..k).any(|b| alive[b] && step[b][a]);
            if !has_next || !has_prev {
                alive[a] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for a in 0..k {
        for b in 0..k {
            step[a][b] &= alive[a] && alive[b];
        }
    }
    (alive, step)
}

fn bool_mul(x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let k = x.len();
    (0..k)
        .map(|i| (0..k).map(|j| (0..k).any(|m| x[i][m] && y[m][j])).collect())
        .collect()
}

fn bool_pow(m: &[Vec<bool>], mut e: u64) -> Vec<Vec<bool>> {
    let k = m.len();
    let mut out: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j).collect()).collect();
    let mut base = m.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            out = bool_mul(&out, &base);
        }
        base = bool_mul(&base, &base);
        e >>= 1;
    }
    out
}

/// Exact count of globally admissible labelings of a finite `F ⊆ Z`.
fn transfer_matrix_count(s: &Subshift, f: &FiniteSubset) -> PatternCount {
    let (alive, step) = essential_transitions(s);
    let mut xs: Vec<i64> = f
        .iter()
        .map(|g| g.coordinates().expect("lattice")[0])
        .collect();
    xs.sort_unstable();
    let k = alive.len();
    // exact integer counts while they fit, and a scaled float alongside for the log
    let mut exact: Option<Vec<u128>> = Some(alive.iter().map(|&a| a as u128).collect());
    let mut scaled: Vec<f64> = alive.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let mut log_scale = 0.0f64;
    for w in xs.windows(2) {
        let reach = bool_pow(&step, (w[1] - w[0]) as u64);
        exact = exact.and_then(|v| {
            (0..k)
                .map(|b| {
                    (0..k)
                        .filter(|&a| reach[a][b])
                        .try_fold(0u128, |acc, a| acc.checked_add(v[a]))
                })
                .collect()
        });
        let next: Vec<f64> = (0..k)
            .map(|b| (0..k).filter(|&a| reach[a][b]).map(|a| scaled[a]).sum())
            .collect();
        let norm = next.iter().cloned().fold(0.0, f64::max);
        if norm > 0.0 {
            log_scale += norm.ln();
            scaled = next.iter().map(|v| v / norm).collect();
        } else {
            scaled = next;
        }
    }
    let count = exact.and_then(|v| v.iter().try_fold(0u128, |acc, &x| acc.checked_add(x)));
    let total: f64 = scaled.iter().sum();
    let log_count = match count {
        Some(c) => (c as f64).ln(),
        None => log_scale + total.ln(),
    };
    PatternCount {
        count,
        log_count,
        bound: BoundKind::Exact,
        method: CountMethod::TransferMatrix,
    }
}
