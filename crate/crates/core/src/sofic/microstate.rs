use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::SoficMap;
use crate::caps::{Caps, EXACT_POINT_CAP};
use crate::codec::decode_into;
use crate::error::{arg, Result};
use crate::group::FiniteSubset;
use crate::metric::{sep_number, FiniteMetricSpace, SolveMode};
use crate::report::BoundKind;
use crate::rng::{stream_rng, streams};
use crate::subshift::{clashes, placements, Placement, Subshift};
use crate::topological::first_disagreement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", deny_unknown_fields)]
pub enum MicrostateMode {
    /// Every labeling of `[n]`; needs `|A|^n` under the cell cap.
    Exhaustive,
    /// `budget` uniform labelings from the seeded stream, deduplicated.
    Sample { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrostateOptions {
    pub mode: MicrostateMode,
    /// Decoding radius; chosen from `δ` and `F` when absent.
    pub radius: Option<usize>,
}

/// A labeling `Λ: [n] → A`, decoded as `φ(m)(t) = Λ((t⁻¹)^σ m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Microstate {
    pub labels: Vec<usize>,
    /// Root mean square of `d(φ(γ^σ m), γ·φ(m))` over `m`, per element of `F`.
    pub rms: Vec<f64>,
    /// `Θ_φ`: coordinates where every such distance is at most `√δ`.
    pub theta: Vec<bool>,
}

impl Microstate {
    pub fn theta_size(&self) -> usize {
        self.theta.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrostateSpace {
    pub n: usize,
    pub radius: usize,
    /// Distances are exact up to this amount, `2^{-|B_R|}`.
    pub truncation: f64,
    pub examined: usize,
    pub exhaustive: bool,
    pub microstates: Vec<Microstate>,
}

type Tables = Vec<Vec<u32>>;

/// Permutation tables shared by every labeling of one `(σ, F, R)`.
struct Decoder {
    n: usize,
    /// `(t⁻¹)^σ` for `t` in `B_R`, canonical order.
    pullback: Vec<Vec<u32>>,
    /// For each `γ ∈ F` and `t`: `(t⁻¹)^σ γ^σ` and `(t⁻¹γ)^σ`.
    shifted: Vec<(Tables, Tables)>,
    checks: Vec<Vec<Placement>>,
}

impl Decoder {
    fn new(
        sigma: &SoficMap,
        s: &Subshift,
        f: &FiniteSubset,
        radius: usize,
        caps: &Caps,
    ) -> Result<Self> {
        let ball = sigma.group().ball_with_caps(radius, caps)?;
        let pullback: Vec<Vec<u32>> = ball
            .iter()
            .map(|t| sigma.permutation(&t.inverse()))
            .collect();
        let shifted = f
            .iter()
            .map(|g| {
                let gp = sigma.permutation(g);
                let first = pullback
                    .iter()
                    .map(|p| gp.iter().map(|&x| p[x as usize]).collect())
                    .collect();
                let second = ball
                    .iter()
                    .map(|t| Ok(sigma.permutation(&t.inverse().multiply(g)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((first, second))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Decoder {
            n: sigma.n(),
            pullback,
            shifted,
            checks: placements(s, &ball)?,
        })
    }

    fn decode(&self, labels: &[usize], m: usize) -> Vec<usize> {
        self.pullback
            .iter()
            .map(|p| labels[p[m] as usize])
            .collect()
    }

    fn admissible(&self, labels: &[usize]) -> bool {
        (0..self.n).all(|m| {
            let point = self.decode(labels, m);
            (0..point.len()).all(|i| !clashes(&self.checks, i, &point))
        })
    }

    /// `d(φ(γ^σ m), γ·φ(m))` for every `γ` and `m`.
    fn defects(&self, labels: &[usize]) -> Vec<Vec<f64>> {
        self.shifted
            .iter()
            .map(|(first, second)| {
                (0..self.n)
                    .map(|m| {
                        let x: Vec<usize> = first.iter().map(|p| labels[p[m] as usize]).collect();
                        let y: Vec<usize> = second.iter().map(|p| labels[p[m] as usize]).collect();
                        first_disagreement(&x, &y).value
                    })
                    .collect()
            })
            .collect()
    }
}

/// Smallest radius with `2^{-|B_R|} < δ/4`, at least the radius of `F`.
fn auto_radius(sigma: &SoficMap, f: &FiniteSubset, delta: f64, caps: &Caps) -> Result<usize> {
    let mut r = f.radius().max(1);
    if delta > 0.0 {
        while 0.5f64.powi(sigma.group().ball_with_caps(r, caps)?.len() as i32) >= delta / 4.0 {
            r += 1;
        }
    }
    Ok(r)
}

/// Labelings whose decoded points are locally admissible on `B_R` and
/// whose `d²` defect is at most `δ` for every `γ ∈ F`.
pub fn microstate_space(
    sigma: &SoficMap,
    f: &FiniteSubset,
    delta: f64,
    s: &Subshift,
    options: &MicrostateOptions,
    caps: &Caps,
) -> Result<MicrostateSpace> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return arg(format!("delta must be a nonnegative number, got {delta}"));
    }
    if f.is_empty() {
        return arg("microstates need a nonempty set");
    }
    if f.spec() != sigma.group() || s.group() != sigma.group() {
        return arg("sofic map, set and subshift must share one group");
    }
    let radius = match options.radius {
        Some(r) => r,
        None => auto_radius(sigma, f, delta, caps)?,
    };
    let decoder = Decoder::new(sigma, s, f, radius, caps)?;
    let n = sigma.n();
    let k = s.alphabet_size();
    let candidates: Vec<Vec<usize>> = match options.mode {
        MicrostateMode::Exhaustive => {
            let total = caps.check_cells("labelings of [n]", k, n)?;
            (0..total)
                .into_par_iter()
                .map(|code| {
                    let mut digits = vec![0usize; n];
                    decode_into(code, k, &mut digits);
                    digits
                })
                .collect()
        }
        MicrostateMode::Sample { budget, seed } => {
            let mut rng = stream_rng(seed, streams::MICROSTATE_SAMPLE);
            let mut seen = HashSet::new();
            (0..budget)
                .map(|_| (0..n).map(|_| rng.gen_range(0..k)).collect::<Vec<usize>>())
                .filter(|l| seen.insert(l.clone()))
                .collect()
        }
    };
    let sqrt_delta = delta.sqrt();
    let microstates: Vec<Microstate> = candidates
        .par_iter()
        .filter(|labels| decoder.admissible(labels))
        .filter_map(|labels| {
            let defects = decoder.defects(labels);
            let rms: Vec<f64> = defects
                .iter()
                .map(|d| (d.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt())
                .collect();
            if rms.iter().any(|&r| r > delta * (1.0 + 1e-12)) {
                return None;
            }
            let theta: Vec<bool> = (0..n)
                .map(|m| defects.iter().all(|d| d[m] <= sqrt_delta))
                .collect();
            Some(Microstate {
                labels: labels.clone(),
                rms,
                theta,
            })
        })
        .collect();
    let s_delta = f.len() as f64 * delta;
    for ms in &microstates {
        assert!(
            ms.theta_size() as f64 >= (1.0 - s_delta) * n as f64 - 1e-9,
            "good-coordinate set smaller than (1 - s delta) n"
        );
    }
    Ok(MicrostateSpace {
        n,
        radius,
        truncation: 0.5f64.powi(decoder.pullback.len() as i32),
        examined: candidates.len(),
        exhaustive: matches!(options.mode, MicrostateMode::Exhaustive),
        microstates,
    })
}

/// `d^∞` between microstates: the largest first-disagreement distance of
/// the decoded points over `m ∈ [n]`.
pub fn microstate_metric(
    sigma: &SoficMap,
    space: &MicrostateSpace,
    caps: &Caps,
) -> Result<FiniteMetricSpace> {
    let ball = sigma.group().ball_with_caps(space.radius, caps)?;
    let pullback: Vec<Vec<u32>> = ball
        .iter()
        .map(|t| sigma.permutation(&t.inverse()))
        .collect();
    let decoded: Vec<Vec<Vec<usize>>> = space
        .microstates
        .iter()
        .map(|ms| {
            (0..space.n)
                .map(|m| pullback.iter().map(|p| ms.labels[p[m] as usize]).collect())
                .collect()
        })
        .collect();
    let count = decoded.len();
    let dist: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            (0..count)
                .map(|j| {
                    decoded[i]
                        .iter()
                        .zip(&decoded[j])
                        .map(|(a, b)| first_disagreement(a, b).value)
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let names = (0..count).map(|i| i.to_string()).collect();
    if count == 0 {
        return arg("no microstates qualify");
    }
    FiniteMetricSpace::unchecked(names, dist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficRow {
    pub n: usize,
    pub examined: usize,
    pub microstates: usize,
    pub separated: usize,
    /// `log(separated)/n` in nats; `None` when no microstate qualifies.
    pub value: Option<f64>,
    pub bound: BoundKind,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficEntropyReport {
    pub rows: Vec<SoficRow>,
    /// Maximum over rows with `n` at least the floor.
    pub surrogate: Option<f64>,
    pub surrogate_bound: BoundKind,
    pub n_floor: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoficEntropyParams {
    pub eps: f64,
    pub delta: f64,
    pub n_floor: usize,
}

/// Per-map `log sep(Map(σ, F, δ), ε, d^∞)/n` and the max over the tail.
///
/// Values are exact only for exhaustive enumeration of a full shift with an
/// exact separated number; otherwise they are lower-bound probes.
pub fn sofic_entropy_estimate(
    sequence: &[SoficMap],
    s: &Subshift,
    f: &FiniteSubset,
    params: &SoficEntropyParams,
    options: &MicrostateOptions,
    caps: &Caps,
) -> Result<SoficEntropyReport> {
    if sequence.is_empty() {
        return arg("empty sofic sequence");
    }
    let rows = sequence
        .iter()
        .map(|sigma| {
            let space = microstate_space(sigma, f, params.delta, s, options, caps)?;
            if space.microstates.is_empty() {
                return Ok(SoficRow {
                    n: sigma.n(),
                    examined: space.examined,
                    microstates: 0,
                    separated: 0,
                    value: None,
                    bound: BoundKind::Lower,
                    radius: space.radius,
                });
            }
            let metric = microstate_metric(sigma, &space, caps)?;
            let mode = if metric.len() <= EXACT_POINT_CAP {
                SolveMode::Exact
            } else {
                SolveMode::Greedy
            };
            let cert = sep_number(&metric, params.eps, mode)?;
            let exact = space.exhaustive && cert.bound == BoundKind::Exact && s.is_full();
            Ok(SoficRow {
                n: sigma.n(),
                examined: space.examined,
                microstates: space.microstates.len(),
                separated: cert.value,
                value: Some((cert.value as f64).ln() / sigma.n() as f64),
                bound: if exact {
                    BoundKind::Exact
                } else {
                    BoundKind::Lower
                },
                radius: space.radius,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let surrogate = rows
        .iter()
        .filter(|r| r.n >= params.n_floor)
        .filter_map(|r| r.value)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    Ok(SoficEntropyReport {
        rows,
        surrogate,
        surrogate_bound: BoundKind::LimsupSurrogate,
        n_floor: params.n_floor,
    })
}
