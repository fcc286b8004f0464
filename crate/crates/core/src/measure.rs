//! Shannon entropy of finite partitions and naive measure entropy of shift
//! systems carrying Bernoulli or explicitly tabulated cylinder measures.
//!
//! Entropies are in nats. Shift coordinates follow the left action
//! `(g.x)(s) = x(g^{-1} s)`, under which the translate `g^a alpha` of a
//! cylinder partition on coordinates `C` reads coordinates `gC`, so the
//! join `alpha^F` reads `FC`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::codec::{decode_into, encode, marginalize};
use crate::error::{arg, Error, Result};
use crate::group::{expansion_ratio, product_set_with_caps, FiniteSubset, GroupSpec, Ratio};
use crate::report::{running_min, BoundKind};

/// Allowed deviation of a distribution's total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Tolerance for user-supplied cylinder tables (mass and shift invariance).
pub const TABLE_TOL: f64 = 1e-9;
/// Tolerance for the two-route agreement checks.
pub const AGREEMENT_TOL: f64 = 1e-9;

const NO_CELL: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return arg("empty distribution");
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return arg(format!(
                "probability {p} is not a finite nonnegative number"
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return arg(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Distribution { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Distribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, at: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub(crate) fn from_masses(probs: Vec<f64>) -> Self {
        Distribution { probs }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Outer product, indexed `i * other.len() + j`.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let probs = self
            .probs
            .iter()
            .flat_map(|p| other.probs.iter().map(move |q| p * q))
            .collect();
        Distribution { probs }
    }
}

/// `-sum p log p` over the positive entries.
pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    compensated_sum(probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln())).max(0.0)
}

/// Neumaier summation; joins can have millions of tiny terms.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

pub fn shannon_entropy(p: &Distribution) -> f64 {
    entropy_of(&p.probs)
}

/// Joint law of two partitions: rows are cells of `alpha`, columns cells of `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
            return arg("joint distribution must be a nonempty rectangular matrix");
        }
        Self::from_flat(rows, cols, matrix.into_iter().flatten().collect())
    }

    pub fn from_flat(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if rows * cols != mass.len() || mass.is_empty() {
            return arg(format!(
                "{} entries do not form a {rows}x{cols} joint",
                mass.len()
            ));
        }
        Distribution::new(mass.clone())?;
        Ok(JointDistribution { rows, cols, mass })
    }

    /// Checks the marginals against the partitions' own distributions.
    pub fn with_marginals(
        matrix: Vec<Vec<f64>>,
        alpha: &Distribution,
        beta: &Distribution,
    ) -> Result<Self> {
        let j = Self::new(matrix)?;
        for (which, got, want) in [
            ("alpha", j.row_marginal(), alpha),
            ("beta", j.col_marginal(), beta),
        ] {
            if got.len() != want.len()
                || got
                    .iter()
                    .zip(want.probabilities())
                    .any(|(a, b)| (a - b).abs() > NORMALIZATION_TOL)
            {
                return arg(format!(
                    "joint marginal for {which} is {got:?}, expected {:?}",
                    want.probabilities()
                ));
            }
        }
        Ok(j)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.mass
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.mass.chunks(self.cols) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// Entropy of the join `alpha v beta`.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.mass)
    }
}

/// `H(alpha | beta)`; columns of zero mass contribute nothing.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    let col = j.col_marginal();
    let terms = (0..j.rows).flat_map(|i| {
        col.iter().enumerate().filter_map(move |(c, &pb)| {
            let p = j.get(i, c);
            (p > 0.0 && pb > 0.0).then(|| -p * (p / pb).ln())
        })
    });
    compensated_sum(terms).max(0.0)
}

/// Shift-invariant probabilities of every labeling of a declared finite
/// domain, indexed by pattern code in the domain's canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTable {
    alphabet_size: usize,
    domain: FiniteSubset,
    probs: Vec<f64>,
}

impl CylinderTable {
    pub fn new(alphabet_size: usize, domain: FiniteSubset, probs: Vec<f64>) -> Result<Self> {
        if alphabet_size == 0 || domain.is_empty() {
            return arg("cylinder table needs a nonempty alphabet and domain");
        }
        let expected = crate::caps::checked_pow(alphabet_size as u64, domain.len())
            .filter(|&n| n <= 1 << 26)
            .ok_or_else(|| {
                Error::Argument(format!(
                    "table over {} coordinates is too large",
                    domain.len()
                ))
            })?;
        if probs.len() as u64 != expected {
            return arg(format!(
                "table has {} entries, domain needs {expected}",
                probs.len()
            ));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return arg(format!(
                "table probability {p} is not a finite nonnegative number"
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TABLE_TOL {
            return arg(format!("table sums to {total}, not 1"));
        }
        let table = CylinderTable {
            alphabet_size,
            domain,
            probs,
        };
        table.check_invariance()?;
        Ok(table)
    }

    /// Builds the table from sparse `(pattern, probability)` entries; missing patterns get 0.
    pub fn from_entries(
        alphabet_size: usize,
        domain: FiniteSubset,
        entries: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        let len = crate::caps::checked_pow(alphabet_size as u64, domain.len())
            .filter(|&n| n <= 1 << 26)
            .ok_or_else(|| Error::Argument("cylinder table too large".into()))?;
        let mut probs = vec![0.0; len as usize];
        for (pattern, p) in entries {
            if pattern.len() != domain.len() || pattern.iter().any(|&a| a >= alphabet_size) {
                return arg(format!(
                    "pattern {pattern:?} does not label the table domain"
                ));
            }
            probs[encode(pattern.iter().copied(), alphabet_size) as usize] += p;
        }
        Self::new(alphabet_size, domain, probs)
    }

    pub fn domain(&self) -> &FiniteSubset {
        &self.domain
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Every overlap `D ∩ g^{-1}D` must carry the same law as its translate.
    fn check_invariance(&self) -> Result<()> {
        let d = &self.domain;
        let diffs = product_set_with_caps(d, &d.inverse(), &Caps::default())?;
        for g in diffs.iter().filter(|g| !g.is_identity()) {
            let mut here = Vec::new();
            let mut there = Vec::new();
            for (i, x) in d.iter().enumerate() {
                if let Some(j) = d.index_of(&g.multiply(x)?) {
                    here.push(i);
                    there.push(j);
                }
            }
            if here.is_empty() {
                continue;
            }
            let a = marginalize(&self.probs, self.alphabet_size, d.len(), &here);
            let b = marginalize(&self.probs, self.alphabet_size, d.len(), &there);
            if let Some((x, y)) = a.iter().zip(&b).find(|(x, y)| (*x - *y).abs() > TABLE_TOL) {
                return arg(format!(
                    "table is not shift invariant: translate by {g} changes a cylinder from {x} to {y}"
                ));
            }
        }
        Ok(())
    }

    fn marginal_on(&self, coords: &FiniteSubset) -> Result<Vec<f64>> {
        let first = &coords.elements()[0];
        for d in self.domain.iter() {
            let g = d.multiply(&first.inverse())?;
            let positions: Option<Vec<usize>> = coords
                .iter()
                .map(|t| g.multiply(t).ok().and_then(|x| self.domain.index_of(&x)))
                .collect();
            if let Some(positions) = positions {
                return Ok(marginalize(
                    &self.probs,
                    self.alphabet_size,
                    self.domain.len(),
                    &positions,
                ));
            }
        }
        Err(Error::UnsupportedMeasure(format!(
            "coordinates {} do not fit in any translate of the table domain {}",
            coords.label(),
            self.domain.label()
        )))
    }
}

/// An invariant measure on `A^G`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftMeasure {
    Bernoulli {
        group: GroupSpec,
        base: Distribution,
    },
    Explicit {
        group: GroupSpec,
        table: CylinderTable,
    },
}

impl ShiftMeasure {
    pub fn bernoulli(group: GroupSpec, base: Distribution) -> Self {
        ShiftMeasure::Bernoulli { group, base }
    }

    pub fn explicit(table: CylinderTable) -> Self {
        ShiftMeasure::Explicit {
            group: table.domain.spec(),
            table,
        }
    }

    pub fn group(&self) -> GroupSpec {
        match self {
            ShiftMeasure::Bernoulli { group, .. } | ShiftMeasure::Explicit { group, .. } => *group,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            ShiftMeasure::Bernoulli { base, .. } => base.len(),
            ShiftMeasure::Explicit { table, .. } => table.alphabet_size,
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, ShiftMeasure::Bernoulli { .. })
    }

    /// Law of the labeling on `coords`, indexed by pattern code.
    pub fn cylinder_distribution(&self, coords: &FiniteSubset, caps: &Caps) -> Result<Vec<f64>> {
        if coords.spec() != self.group() {
            return arg(format!(
                "coordinates in {} for a measure on {}",
                coords.spec(),
                self.group()
            ));
        }
        if coords.is_empty() {
            return arg("cylinder over an empty coordinate set");
        }
        caps.check_cells("cylinder patterns", self.alphabet_size(), coords.len())?;
        match self {
            ShiftMeasure::Bernoulli { base, .. } => {
                let mut out = vec![1.0];
                for _ in coords {
                    out = out
                        .iter()
                        .flat_map(|p| base.probabilities().iter().map(move |q| p * q))
                        .collect();
                }
                Ok(out)
            }
            ShiftMeasure::Explicit { table, .. } => table.marginal_on(coords),
        }
    }
}

/// A cylinder partition: cells are unions of labelings of `coordinates`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<String>,
    coordinates: FiniteSubset,
    alphabet_size: usize,
    cell_of_pattern: Vec<u32>,
    cell_measure: Distribution,
}

impl Partition {
    /// The partition by the letter at the identity.
    pub fn letters(m: &ShiftMeasure) -> Result<Self> {
        let k = m.alphabet_size();
        Self::coarse_letters(m, &(0..k).collect::<Vec<_>>())
    }

    /// Letter partition with letters merged: `cell_of_letter[a]` is the cell of letter `a`.
    pub fn coarse_letters(m: &ShiftMeasure, cell_of_letter: &[usize]) -> Result<Self> {
        let coords = FiniteSubset::singleton(m.group().identity());
        Self::cylinder(m, coords, cell_of_letter.to_vec(), None)
    }

    /// General cylinder partition over `coordinates`. `cell_of_pattern` maps
    /// every pattern code to a cell index; cells are labeled by index unless
    /// `labels` is supplied.
    pub fn cylinder(
        m: &ShiftMeasure,
        coordinates: FiniteSubset,
        cell_of_pattern: Vec<usize>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let k = m.alphabet_size();
        let dist = m.cylinder_distribution(&coordinates, &Caps::default())?;
        if cell_of_pattern.len() != dist.len() {
            return arg(format!(
                "{} pattern assignments for {} patterns",
                cell_of_pattern.len(),
                dist.len()
            ));
        }
        let cells = cell_of_pattern.iter().max().map_or(0, |c| c + 1);
        let labels = labels.unwrap_or_else(|| (0..cells).map(|c| c.to_string()).collect());
        if labels.len() != cells {
            return arg(format!("{} labels for {cells} cells", labels.len()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return arg("partition labels must be unique");
        }
        let mut mass = vec![0.0; cells];
        for (c, p) in cell_of_pattern.iter().zip(&dist) {
            mass[*c] += p;
        }
        Ok(Partition {
            labels,
            coordinates,
            alphabet_size: k,
            cell_of_pattern: cell_of_pattern.into_iter().map(|c| c as u32).collect(),
            cell_measure: Distribution::from_masses(mass),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cell_measure(&self) -> &Distribution {
        &self.cell_measure
    }

    pub fn coordinates(&self) -> &FiniteSubset {
        &self.coordinates
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.cell_measure)
    }

    /// True when the partition reads only the identity coordinate.
    pub fn is_single_coordinate(&self) -> bool {
        self.coordinates.len() == 1 && self.coordinates.elements()[0].is_identity()
    }

    fn cell_of_letter(&self) -> Option<&[u32]> {
        self.is_single_coordinate()
            .then_some(&self.cell_of_pattern[..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JoinMethod {
    /// Every cylinder of the joined coordinates was enumerated.
    Enumerated,
    /// Bernoulli measure, single-coordinate partition: translates are independent,
    /// so the entropy is the sum over the distinct joined coordinates.
    IndependentFactors,
}

/// `alpha^F = join over g in F of g^a alpha`, with zero-measure cells dropped.
pub fn join_partition(m: &ShiftMeasure, alpha: &Partition, f: &FiniteSubset) -> Result<Partition> {
    join_partition_with_caps(m, alpha, f, &Caps::default())
}

pub fn join_partition_with_caps(
    m: &ShiftMeasure,
    alpha: &Partition,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<Partition> {
    if f.is_empty() {
        return arg("join over an empty set");
    }
    if alpha.alphabet_size != m.alphabet_size() {
        return arg("partition and measure use different alphabets");
    }
    caps.check_cells("joined cells", alpha.len(), f.len())?;
    let coords = product_set_with_caps(f, &alpha.coordinates, caps)?;
    let dist = m.cylinder_distribution(&coords, caps)?;
    let base = alpha.alphabet_size;
    let positions: Vec<Vec<usize>> = f
        .iter()
        .map(|g| {
            alpha
                .coordinates
                .iter()
                .map(|c| {
                    coords
                        .index_of(&g.multiply(c)?)
                        .ok_or_else(|| Error::Argument("join coordinate".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut digits = vec![0usize; coords.len()];
    let mut tuple_of_pattern = vec![u64::MAX; dist.len()];
    let mut mass: HashMap<u64, f64> = HashMap::new();
    for (code, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        decode_into(code as u64, base, &mut digits);
        let cells = positions.iter().map(|pos| {
            alpha.cell_of_pattern[encode(pos.iter().map(|&i| digits[i]), base) as usize]
        });
        let mut tuple = 0u64;
        for c in cells {
            debug_assert_ne!(c, NO_CELL);
            tuple = tuple * alpha.len() as u64 + c as u64;
        }
        tuple_of_pattern[code] = tuple;
        *mass.entry(tuple).or_insert(0.0) += p;
    }

    let mut tuples: Vec<u64> = mass.keys().copied().collect();
    tuples.sort_unstable();
    let index: HashMap<u64, u32> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (*t, i as u32))
        .collect();
    let mut cell_digits = vec![0usize; f.len()];
    let labels = tuples
        .iter()
        .map(|&t| {
            decode_into(t, alpha.len(), &mut cell_digits);
            cell_digits
                .iter()
                .map(|&c| alpha.labels[c].as_str())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    let cell_of_pattern = tuple_of_pattern
        .iter()
        .map(|t| if *t == u64::MAX { NO_CELL } else { index[t] })
        .collect();
    Ok(Partition {
        labels,
        coordinates: coords,
        alphabet_size: base,
        cell_of_pattern,
        cell_measure: Distribution::from_masses(tuples.iter().map(|t| mass[t]).collect()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoinedEntropy {
    pub entropy: f64,
    pub method: JoinMethod,
}

/// `H_mu(alpha^F)`, enumerating when the cylinders fit under the caps and
/// otherwise using independence of Bernoulli translates.
pub fn joined_entropy(
    m: &ShiftMeasure,
    alpha: &Partition,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<JoinedEntropy> {
    match join_partition_with_caps(m, alpha, f, caps) {
        Ok(p) => Ok(JoinedEntropy {
            entropy: p.entropy(),
            method: JoinMethod::Enumerated,
        }),
        Err(Error::Resource { .. }) if m.is_bernoulli() && alpha.is_single_coordinate() => {
            // each coordinate of F carries an independent copy of alpha
            let per_coordinate = alpha.entropy();
            Ok(JoinedEntropy {
                entropy: f.iter().map(|_| per_coordinate).sum(),
                method: JoinMethod::IndependentFactors,
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub label: String,
    pub size: usize,
    pub joint_entropy: f64,
    /// `H_mu(alpha^F) / |F|`.
    pub value: f64,
    pub running_min: f64,
    pub method: JoinMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub rows: Vec<MeasureRow>,
    /// Final running minimum: an upper bound on `h_mu(alpha)`, exact only
    /// when `bound` says so.
    pub estimate: f64,
    pub bound: BoundKind,
}

pub(crate) fn check_schedule(group: GroupSpec, schedule: &[FiniteSubset]) -> Result<()> {
    if schedule.is_empty() {
        return arg("empty schedule");
    }
    for f in schedule {
        if f.is_empty() {
            return arg("schedule contains an empty set");
        }
        if f.spec() != group {
            return arg(format!(
                "schedule set in {} for a system on {group}",
                f.spec()
            ));
        }
    }
    Ok(())
}

/// Per-set values `H_mu(alpha^F)/|F|` along the schedule and their running minimum.
///
/// The running minimum only bounds the infimum over all finite sets from
/// above. It is reported as exact only for a single-coordinate partition of
/// a Bernoulli shift, where every value equals `H_mu(alpha)`.
pub fn naive_measure_entropy_estimate(
    m: &ShiftMeasure,
    alpha: &Partition,
    schedule: &[FiniteSubset],
    caps: &Caps,
) -> Result<MeasureEstimate> {
    check_schedule(m.group(), schedule)?;
    let joined: Vec<JoinedEntropy> = schedule
        .par_iter()
        .map(|f| joined_entropy(m, alpha, f, caps))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = joined
        .iter()
        .zip(schedule)
        .map(|(j, f)| j.entropy / f.len() as f64)
        .collect();
    let mins = running_min(values.iter().copied());
    let rows: Vec<MeasureRow> = schedule
        .iter()
        .zip(&joined)
        .zip(values.iter().zip(&mins))
        .map(|((f, j), (&value, &running_min))| MeasureRow {
            label: f.label(),
            size: f.len(),
            joint_entropy: j.entropy,
            value,
            running_min,
            method: j.method,
        })
        .collect();
    let bound = if m.is_bernoulli() && alpha.is_single_coordinate() {
        BoundKind::Exact
    } else {
        BoundKind::Upper
    };
    Ok(MeasureEstimate {
        estimate: *mins.last().expect("nonempty schedule"),
        rows,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationRow {
    pub label: String,
    pub size: usize,
    pub product_size: usize,
    pub ratio: Ratio,
    /// `H_mu(alpha^{WF}) / |F|`.
    pub direct: f64,
    /// `(|WF|/|F|) H_mu(alpha)`.
    pub via_ratio: f64,
    pub method: JoinMethod,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub rows: Vec<AmplificationRow>,
    pub all_agree: bool,
}

/// Normalized entropy of the amplified partition along a schedule, computed
/// from the join over `WF` and from the expansion ratio `|WF|/|F|`.
pub fn amplified_entropy_check(
    m: &ShiftMeasure,
    alpha: &Partition,
    w: &FiniteSubset,
    schedule: &[FiniteSubset],
    caps: &Caps,
) -> Result<AmplificationReport> {
    if !m.is_bernoulli() || !alpha.is_single_coordinate() {
        return Err(Error::UnsupportedMeasure(
            "amplification check needs a Bernoulli measure and a single-coordinate partition"
                .into(),
        ));
    }
    check_schedule(m.group(), schedule)?;
    let h_alpha = alpha.entropy();
    let rows = schedule
        .par_iter()
        .map(|f| {
            let wf = product_set_with_caps(w, f, caps)?;
            let joined = joined_entropy(m, alpha, &wf, caps)?;
            let ratio = expansion_ratio(w, f)?;
            let direct = joined.entropy / f.len() as f64;
            let via_ratio = ratio.to_f64() * h_alpha;
            Ok(AmplificationRow {
                label: f.label(),
                size: f.len(),
                product_size: wf.len(),
                ratio,
                direct,
                via_ratio,
                method: joined.method,
                agree: (direct - via_ratio).abs() <= AGREEMENT_TOL,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmplificationReport {
        all_agree: rows.iter().all(|r| r.agree),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRow {
    pub label: String,
    pub size: usize,
    /// Normalized entropy of the product partition under the product measure.
    pub product_value: f64,
    pub first_value: f64,
    pub second_value: f64,
    pub method: JoinMethod,
    pub agree: bool,
}

/// Product of two Bernoulli systems with single-coordinate partitions:
/// the product measure on pairs of letters and the product partition.
pub fn product_system(
    m1: &ShiftMeasure,
    alpha1: &Partition,
    m2: &ShiftMeasure,
    alpha2: &Partition,
) -> Result<(ShiftMeasure, Partition)> {
    let (
        ShiftMeasure::Bernoulli {
            group: g1,
            base: b1,
        },
        ShiftMeasure::Bernoulli {
            group: g2,
            base: b2,
        },
    ) = (m1, m2)
    else {
        return Err(Error::UnsupportedMeasure(
            "product systems need Bernoulli factors".into(),
        ));
    };
    if g1 != g2 {
        return arg(format!("product of systems on {g1} and {g2}"));
    }
    let (Some(c1), Some(c2)) = (alpha1.cell_of_letter(), alpha2.cell_of_letter()) else {
        return Err(Error::UnsupportedMeasure(
            "product systems need single-coordinate partitions".into(),
        ));
    };
    let measure = ShiftMeasure::bernoulli(*g1, b1.product(b2));
    let cells: Vec<usize> = c1
        .iter()
        .flat_map(|&x| {
            c2.iter()
                .map(move |&y| x as usize * alpha2.len() + y as usize)
        })
        .collect();
    let labels = alpha1
        .labels
        .iter()
        .flat_map(|x| alpha2.labels.iter().map(move |y| format!("({x},{y})")))
        .collect();
    let partition = Partition::coarse_letters(&measure, &cells)?;
    let partition = Partition {
        labels,
        ..partition
    };
    Ok((measure, partition))
}

/// Per-set entropy of the product system next to the two factors' values.
pub fn product_system_entropy(
    m1: &ShiftMeasure,
    alpha1: &Partition,
    m2: &ShiftMeasure,
    alpha2: &Partition,
    schedule: &[FiniteSubset],
    caps: &Caps,
) -> Result<Vec<ProductRow>> {
    let (m, alpha) = product_system(m1, alpha1, m2, alpha2)?;
    check_schedule(m.group(), schedule)?;
    schedule
        .par_iter()
        .map(|f| {
            let n = f.len() as f64;
            let joint = joined_entropy(&m, &alpha, f, caps)?;
            let first = joined_entropy(m1, alpha1, f, caps)?.entropy / n;
            let second = joined_entropy(m2, alpha2, f, caps)?.entropy / n;
            let product_value = joint.entropy / n;
            Ok(ProductRow {
                label: f.label(),
                size: f.len(),
                product_value,
                first_value: first,
                second_value: second,
                method: joint.method,
                agree: (product_value - (first + second)).abs() <= AGREEMENT_TOL,
            })
        })
        .collect()
}
