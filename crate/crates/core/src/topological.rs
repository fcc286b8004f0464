//! Naive topological entropy of subshifts: cover counts over finite sets,
//! the first-disagreement metric, dynamical pseudometrics and separated sets.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{arg, Error, Result};
use crate::group::{FiniteSubset, GroupElement, GroupSpec};
use crate::measure::check_schedule;
use crate::metric::{greedy_separated, FiniteMetricSpace};
use crate::report::{running_min, BoundKind};
use crate::rng::{stream_rng, streams};
use crate::subshift::{
    admissible_pattern_count, clashes, for_each_local_pattern, placements, CountMethod,
    PatternCount, Placement, Subshift,
};

/// Carried by every separation-probe report.
pub const SEPARATION_CAVEAT: &str =
    "with sampled points our probe is neither a certified upper nor lower bound of h_top";

/// A point of `A^Γ` known on the ball of radius `radius`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicPoint {
    group: GroupSpec,
    radius: usize,
    /// Letters on the ball, in canonical order.
    labels: Vec<usize>,
}

impl SymbolicPoint {
    pub fn new(group: GroupSpec, radius: usize, labels: Vec<usize>) -> Result<Self> {
        let size = group.ball(radius)?.len();
        if labels.len() != size {
            return arg(format!(
                "{} labels for a ball of {size} elements",
                labels.len()
            ));
        }
        Ok(SymbolicPoint {
            group,
            radius,
            labels,
        })
    }

    pub fn from_fn(
        group: GroupSpec,
        radius: usize,
        f: impl FnMut(&GroupElement) -> usize,
    ) -> Result<Self> {
        let labels = group.ball(radius)?.iter().map(f).collect();
        Ok(SymbolicPoint {
            group,
            radius,
            labels,
        })
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// No forbidden pattern of `s` sits inside the known ball.
    pub fn is_locally_admissible(&self, s: &Subshift) -> Result<bool> {
        if s.group() != self.group {
            return arg("point and subshift live on different groups");
        }
        let ball = self.group.ball(self.radius)?;
        let checks = placements(s, &ball)?;
        Ok((0..self.labels.len()).all(|i| !clashes(&checks, i, &self.labels)))
    }

    /// `γ·x`, known on the ball of radius `radius - |γ|`.
    pub fn translate(&self, gamma: &GroupElement) -> Result<SymbolicPoint> {
        let (radius, map) = translate_map(self.group, self.radius, gamma)?;
        Ok(SymbolicPoint {
            group: self.group,
            radius,
            labels: map.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

/// For `s` in `B_{R-|γ|}` (canonical order), the index of `γ⁻¹s` in `B_R`,
/// since `(γ·x)(s) = x(γ⁻¹s)`.
fn translate_map(
    group: GroupSpec,
    radius: usize,
    gamma: &GroupElement,
) -> Result<(usize, Vec<usize>)> {
    if gamma.spec() != group {
        return arg(format!(
            "translating a point on {group} by an element of {}",
            gamma.spec()
        ));
    }
    let len = gamma.length();
    if len > radius {
        return arg(format!(
            "truncation radius {radius} is too small: translating by {gamma} needs radius at least {len}"
        ));
    }
    let big = group.ball(radius)?;
    let small = group.ball(radius - len)?;
    let inv = gamma.inverse();
    let map = small
        .iter()
        .map(|s| Ok(big.index_of(&inv.multiply(s)?).expect("inside the ball")))
        .collect::<Result<Vec<_>>>()?;
    Ok((radius - len, map))
}

/// A distance known up to truncation: the true value lies in `[value, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDistance {
    pub value: f64,
    pub upper: f64,
    pub truncated: bool,
}

pub(crate) fn first_disagreement(x: &[usize], y: &[usize]) -> PointDistance {
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(i) => {
            let v = 0.5f64.powi(i as i32);
            PointDistance {
                value: v,
                upper: v,
                truncated: false,
            }
        }
        None => PointDistance {
            value: 0.0,
            upper: 0.5f64.powi(x.len() as i32),
            truncated: true,
        },
    }
}

/// `2^{-i}` for the first canonical index `i` where the points differ.
pub fn point_metric(x: &SymbolicPoint, y: &SymbolicPoint) -> Result<PointDistance> {
    if x.group != y.group || x.radius != y.radius {
        return arg(format!(
            "points truncated at radii {} and {} (or on different groups)",
            x.radius, y.radius
        ));
    }
    Ok(first_disagreement(&x.labels, &y.labels))
}

/// `max_{γ ∈ F} d(γ·x, γ·y)`.
pub fn dynamical_pseudometric(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    f: &FiniteSubset,
) -> Result<PointDistance> {
    if f.is_empty() {
        return arg("dynamical pseudometric over an empty set");
    }
    let mut out = PointDistance {
        value: 0.0,
        upper: 0.0,
        truncated: false,
    };
    for gamma in f {
        let d = point_metric(&x.translate(gamma)?, &y.translate(gamma)?)?;
        out.value = out.value.max(d.value);
        out.upper = out.upper.max(d.upper);
    }
    out.truncated = out.upper > out.value;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologicalRow {
    pub label: String,
    pub size: usize,
    pub count: Option<u128>,
    pub log_count: f64,
    /// `log N / |F|` in nats.
    pub value: f64,
    pub running_min: f64,
    pub bound: BoundKind,
    pub method: CountMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologicalEstimate {
    pub rows: Vec<TopologicalRow>,
    pub estimate: f64,
    /// Exact only for full shifts, where every value is `log |A|`.
    pub bound: BoundKind,
}

/// Per-set values `log N(U^F)/|F|` for the letter cover and their running minimum.
pub fn naive_topological_entropy_estimate(
    s: &Subshift,
    schedule: &[FiniteSubset],
    caps: &Caps,
) -> Result<TopologicalEstimate> {
    check_schedule(s.group(), schedule)?;
    let counts: Vec<PatternCount> = schedule
        .par_iter()
        .map(|f| admissible_pattern_count(s, f, caps))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = counts
        .iter()
        .zip(schedule)
        .map(|(c, f)| c.log_count / f.len() as f64)
        .collect();
    let mins = running_min(values.iter().copied());
    let rows = schedule
        .iter()
        .zip(&counts)
        .zip(values.iter().zip(&mins))
        .map(|((f, c), (&value, &running_min))| TopologicalRow {
            label: f.label(),
            size: f.len(),
            count: c.count,
            log_count: c.log_count,
            value,
            running_min,
            bound: c.bound,
            method: c.method,
        })
        .collect();
    Ok(TopologicalEstimate {
        rows,
        estimate: *mins.last().expect("nonempty schedule"),
        bound: if s.is_full() {
            BoundKind::Exact
        } else {
            BoundKind::Upper
        },
    })
}

/// The first `n` group elements in canonical order.
fn canonical_prefix(group: GroupSpec, n: usize, caps: &Caps) -> Result<FiniteSubset> {
    let mut r = 0;
    loop {
        let ball = group.ball_with_caps(r, caps)?;
        if ball.len() >= n {
            return FiniteSubset::new(group, ball.elements()[..n].iter().cloned());
        }
        r += 1;
    }
}

/// Number of canonical indices `i` with `2^{-i}` in the given relation to `eps`.
fn index_count(eps: f64, strict: bool) -> usize {
    let mut n = 0;
    let mut v = 1.0f64;
    while if strict { v > eps } else { v >= eps } {
        n += 1;
        v *= 0.5;
        if n > 4096 {
            break;
        }
    }
    n
}

/// `sep(X, ε, d_F)` for the first-disagreement metric, as a pattern count.
///
/// Two points are `ε`-separated under `d_F` exactly when they differ on
/// `F⁻¹E`, where `E` holds the canonical elements `s_i` with `2^{-i} ≥ ε`.
/// Exactness follows the pattern count.
pub fn symbolic_sep_number(
    s: &Subshift,
    eps: f64,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<PatternCount> {
    symbolic_class_count(s, eps, f, false, caps)
}

/// `spn(X, ε, d_F)`: points within `ε` agree on `F⁻¹E'` with `E'` the
/// elements with `2^{-i} > ε`, and the metric is an ultrametric, so balls
/// are these classes.
pub fn symbolic_span_number(
    s: &Subshift,
    eps: f64,
    f: &FiniteSubset,
    caps: &Caps,
) -> Result<PatternCount> {
    symbolic_class_count(s, eps, f, true, caps)
}

fn symbolic_class_count(
    s: &Subshift,
    eps: f64,
    f: &FiniteSubset,
    strict: bool,
    caps: &Caps,
) -> Result<PatternCount> {
    if !(eps > 0.0 && eps.is_finite()) {
        return arg(format!("epsilon must be positive, got {eps}"));
    }
    if f.is_empty() {
        return arg("empty set for a dynamical metric");
    }
    let n = index_count(eps, strict);
    if n == 0 {
        return Ok(PatternCount {
            count: Some(1),
            log_count: 0.0,
            bound: BoundKind::Exact,
            method: CountMethod::FullShift,
        });
    }
    let e = canonical_prefix(s.group(), n, caps)?;
    let coords = crate::group::product_set_with_caps(&f.inverse(), &e, caps)?;
    admissible_pattern_count(s, &coords, caps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub label: String,
    pub size: usize,
    pub separated: usize,
    /// `log(separated)/|F|` in nats.
    pub value: f64,
    /// The cover-based value `log N(U^F)/|F|` for comparison.
    pub cover_value: f64,
    pub cover_bound: BoundKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub rows: Vec<SeparationRow>,
    pub sample_size: usize,
    /// Whether the sample is every locally admissible labeling of the ball.
    pub exhaustive: bool,
    pub radius: usize,
    pub bound: BoundKind,
    pub caveat: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationParams {
    pub eps: f64,
    /// Truncation radius of the sampled points.
    pub radius: usize,
    pub budget: usize,
    pub seed: u64,
}

/// Balls with at most this many labelings are enumerated and shuffled;
/// larger ones are sampled coordinate by coordinate.
const ENUMERATION_LIMIT: u64 = 1 << 16;
const MAX_RESTARTS: usize = 10_000;

/// Seeded sample of distinct locally admissible labelings of `B_R`.
///
/// The sample for a smaller budget is a prefix of the sample for a larger
/// one, so greedy separated sets only grow with the budget.
fn sample_points(
    s: &Subshift,
    ball: &FiniteSubset,
    budget: usize,
    seed: u64,
    caps: &Caps,
) -> Result<(Vec<Vec<usize>>, bool)> {
    let mut rng = stream_rng(seed, streams::SEPARATION_SAMPLE);
    let small = caps
        .check_cells(
            "labelings of the sampling ball",
            s.alphabet_size(),
            ball.len(),
        )
        .ok();
    if small.is_some_and(|t| t <= ENUMERATION_LIMIT) {
        let mut all = Vec::new();
        for_each_local_pattern(s, ball, caps, |l| {
            all.push(l.to_vec());
            true
        })?;
        all.shuffle(&mut rng);
        let exhaustive = budget >= all.len();
        all.truncate(budget);
        return Ok((all, exhaustive));
    }
    let checks = placements(s, ball)?;
    let k = s.alphabet_size();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut misses = 0;
    while out.len() < budget {
        let point = draw_admissible(&checks, ball.len(), k, &mut rng).ok_or_else(|| {
            Error::Argument("sampler could not complete a locally admissible labeling".into())
        })?;
        if seen.insert(point.clone()) {
            out.push(point);
            misses = 0;
        } else {
            misses += 1;
            if misses > MAX_RESTARTS {
                break;
            }
        }
    }
    Ok((out, false))
}

/// One labeling drawn coordinate by coordinate among letters that do not
/// clash with earlier ones, restarting on dead ends.
fn draw_admissible(
    checks: &[Vec<Placement>],
    len: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Option<Vec<usize>> {
    'restart: for _ in 0..MAX_RESTARTS {
        let mut labels = vec![0usize; len];
        for i in 0..len {
            let allowed: Vec<usize> = (0..k)
                .filter(|&a| {
                    labels[i] = a;
                    !clashes(checks, i, &labels)
                })
                .collect();
            if allowed.is_empty() {
                continue 'restart;
            }
            labels[i] = allowed[rng.gen_range(0..allowed.len())];
        }
        return Some(labels);
    }
    None
}

/// Per-set `log sep / |F|` of a seeded point sample under `d_F`.
///
/// The sample is greedily separated in sample order. The result is a
/// heuristic probe, reported with [`SEPARATION_CAVEAT`].
pub fn entropy_via_separation(
    s: &Subshift,
    schedule: &[FiniteSubset],
    params: &SeparationParams,
    caps: &Caps,
) -> Result<SeparationReport> {
    check_schedule(s.group(), schedule)?;
    if !(params.eps > 0.0 && params.eps.is_finite()) {
        return arg(format!("epsilon must be positive, got {}", params.eps));
    }
    if params.budget == 0 {
        return arg("sample budget must be positive");
    }
    let needed = schedule.iter().map(FiniteSubset::radius).max().unwrap_or(0);
    if params.radius < needed {
        return Err(Error::Argument(format!(
            "truncation radius {} is too small: the schedule needs radius at least {needed}",
            params.radius
        )));
    }
    let group = s.group();
    let ball = group.ball_with_caps(params.radius, caps)?;
    let (points, exhaustive) = sample_points(s, &ball, params.budget, params.seed, caps)?;
    let rows = schedule
        .par_iter()
        .map(|f| {
            let maps = f
                .iter()
                .map(|g| translate_map(group, params.radius, g).map(|(_, m)| m))
                .collect::<Result<Vec<_>>>()?;
            let translated: Vec<Vec<Vec<usize>>> = points
                .iter()
                .map(|p| {
                    maps.iter()
                        .map(|m| m.iter().map(|&i| p[i]).collect())
                        .collect()
                })
                .collect();
            let n = points.len();
            let dist = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            translated[i]
                                .iter()
                                .zip(&translated[j])
                                .map(|(a, b)| first_disagreement(a, b).value)
                                .fold(0.0, f64::max)
                        })
                        .collect()
                })
                .collect();
            let space =
                FiniteMetricSpace::unchecked((0..n).map(|i| i.to_string()).collect(), dist)?;
            let separated = greedy_separated(&space, params.eps, 0..n).len();
            let cover = admissible_pattern_count(s, f, caps)?;
            Ok(SeparationRow {
                label: f.label(),
                size: f.len(),
                separated,
                value: (separated as f64).ln() / f.len() as f64,
                cover_value: cover.log_count / f.len() as f64,
                cover_bound: cover.bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparationReport {
        rows,
        sample_size: points.len(),
        exhaustive,
        radius: params.radius,
        bound: BoundKind::Heuristic,
        caveat: SEPARATION_CAVEAT.to_string(),
    })
}
