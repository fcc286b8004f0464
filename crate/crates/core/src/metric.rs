//! Finite metric spaces and their separated and spanning numbers.

use serde::{Deserialize, Serialize};

use crate::caps::EXACT_POINT_CAP;
use crate::error::{arg, Error, Result};
use crate::report::BoundKind;

/// Slack allowed in the triangle inequality and symmetry checks.
pub const METRIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Validates symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality, all within [`METRIC_TOL`].
    pub fn new(points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let space = Self::unchecked(points, dist)?;
        let n = space.len();
        for i in 0..n {
            for j in 0..n {
                let d = space.distance(i, j);
                if (space.distance(j, i) - d).abs() > METRIC_TOL {
                    return arg(format!("distance is not symmetric at ({i},{j})"));
                }
                for k in 0..n {
                    if d > space.distance(i, k) + space.distance(k, j) + METRIC_TOL {
                        return arg(format!("triangle inequality fails for ({i},{k},{j})"));
                    }
                }
            }
        }
        Ok(space)
    }

    /// Points named by their index.
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self> {
        Self::new((0..dist.len()).map(|i| i.to_string()).collect(), dist)
    }

    /// Shape checks only. For internally built ultrametrics, where the
    /// triangle inequality holds by construction and the cubic check is too slow.
    pub(crate) fn unchecked(points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return arg("metric space with no points");
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return arg(format!("distance matrix must be {n}x{n}"));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return arg(format!(
                        "distance ({i},{j}) = {d} is not a nonnegative number"
                    ));
                }
                if i == j && d != 0.0 {
                    return arg(format!("nonzero diagonal at {i}"));
                }
                flat.push(d);
            }
        }
        Ok(FiniteMetricSpace { points, dist: flat })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_separated(&self, set: &[usize], eps: f64) -> bool {
        set.iter().enumerate().all(|(a, &i)| {
            set[a + 1..]
                .iter()
                .all(|&j| i != j && self.distance(i, j) >= eps)
        })
    }

    pub fn is_spanning(&self, set: &[usize], eps: f64) -> bool {
        (0..self.len()).all(|p| set.iter().any(|&c| self.distance(p, c) <= eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    Exact,
    Greedy,
}

/// A separated or spanning number with the set that attains it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: usize,
    /// Point indices in increasing order.
    pub witness: Vec<usize>,
    pub bound: BoundKind,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return arg(format!("epsilon must be positive, got {eps}"));
    }
    Ok(())
}

fn check_exact(m: &FiniteMetricSpace) -> Result<()> {
    if m.len() > EXACT_POINT_CAP {
        return Err(Error::Resource {
            what: "points for an exact solver",
            requested: m.len().to_string(),
            cap: EXACT_POINT_CAP as u64,
        });
    }
    Ok(())
}

fn mask_to_vec(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Maximal cardinality of a set with pairwise distances at least `eps`.
///
/// Greedy mode scans points in index order and is a lower bound, exact
/// when it keeps every point.
pub fn sep_number(m: &FiniteMetricSpace, eps: f64, mode: SolveMode) -> Result<Certificate> {
    check_eps(eps)?;
    match mode {
        SolveMode::Greedy => {
            let witness = greedy_separated(m, eps, 0..m.len());
            let bound = if witness.len() == m.len() {
                BoundKind::Exact
            } else {
                BoundKind::Lower
            };
            Ok(Certificate {
                value: witness.len(),
                witness,
                bound,
            })
        }
        SolveMode::Exact => {
            check_exact(m)?;
            let n = m.len();
            // close[i]: points at distance < eps from i, excluding i
            let close: Vec<u32> = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && m.distance(i, j) < eps)
                        .fold(0, |acc, j| acc | 1 << j)
                })
                .collect();
            let mut best = 0u32;
            max_independent(&close, 0, full_mask(n), &mut best);
            let witness = mask_to_vec(best);
            Ok(Certificate {
                value: witness.len(),
                witness,
                bound: BoundKind::Exact,
            })
        }
    }
}

/// Greedy maximal `eps`-separated subset of the points, scanned in the given order.
pub fn greedy_separated(
    m: &FiniteMetricSpace,
    eps: f64,
    order: impl IntoIterator<Item = usize>,
) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for p in order {
        if kept.iter().all(|&q| m.distance(p, q) >= eps) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

fn full_mask(n: usize) -> u32 {
    if n == 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn max_independent(close: &[u32], chosen: u32, candidates: u32, best: &mut u32) {
    if chosen.count_ones() + candidates.count_ones() <= best.count_ones() {
        return;
    }
    if candidates == 0 {
        *best = chosen;
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    let bit = 1u32 << v;
    max_independent(close, chosen | bit, candidates & !bit & !close[v], best);
    if close[v] & candidates != 0 {
        max_independent(close, chosen, candidates & !bit, best);
    }
}

/// Minimal cardinality of a set within `eps` of every point.
///
/// Greedy mode is set cover by largest new coverage (lowest index on ties)
/// and is an upper bound.
pub fn span_number(m: &FiniteMetricSpace, eps: f64, mode: SolveMode) -> Result<Certificate> {
    check_eps(eps)?;
    let n = m.len();
    let within = |i: usize| (0..n).filter(move |&j| m.distance(i, j) <= eps);
    match mode {
        SolveMode::Greedy => {
            let mut covered = vec![false; n];
            let mut left = n;
            let mut witness = Vec::new();
            while left > 0 {
                let (best, _) = (0..n)
                    .map(|i| (i, within(i).filter(|&j| !covered[j]).count()))
                    .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
                for j in within(best) {
                    if !covered[j] {
                        covered[j] = true;
                        left -= 1;
                    }
                }
                witness.push(best);
            }
            witness.sort_unstable();
            let bound = if witness.len() == 1 {
                BoundKind::Exact
            } else {
                BoundKind::Upper
            };
            Ok(Certificate {
                value: witness.len(),
                witness,
                bound,
            })
        }
        SolveMode::Exact => {
            check_exact(m)?;
            let covers: Vec<u32> = (0..n)
                .map(|i| within(i).fold(0, |acc, j| acc | 1 << j))
                .collect();
            // greedy gives the initial incumbent
            let mut best = span_number(m, eps, SolveMode::Greedy)?
                .witness
                .iter()
                .fold(0u32, |acc, &i| acc | 1 << i);
            min_dominating(&covers, 0, 0, full_mask(n), &mut best);
            let witness = mask_to_vec(best);
            Ok(Certificate {
                value: witness.len(),
                witness,
                bound: BoundKind::Exact,
            })
        }
    }
}

fn min_dominating(covers: &[u32], chosen: u32, covered: u32, all: u32, best: &mut u32) {
    if covered == all {
        if chosen.count_ones() < best.count_ones() {
            *best = chosen;
        }
        return;
    }
    if chosen.count_ones() + 1 >= best.count_ones() {
        return;
    }
    let u = (!covered & all).trailing_zeros();
    for (v, &c) in covers.iter().enumerate() {
        if c >> u & 1 == 1 {
            min_dominating(covers, chosen | 1 << v, covered | c, all, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(
            (0..n)
                .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_points() {
        let m = line(2);
        assert_eq!(sep_number(&m, 1.0, SolveMode::Exact).unwrap().value, 2);
        assert_eq!(sep_number(&m, 1.5, SolveMode::Exact).unwrap().value, 1);
        assert_eq!(span_number(&m, 1.0, SolveMode::Exact).unwrap().value, 1);
        assert_eq!(span_number(&m, 0.5, SolveMode::Exact).unwrap().value, 2);
    }

    #[test]
    fn five_points_on_a_line() {
        let m = line(5);
        let sep = sep_number(&m, 2.0, SolveMode::Exact).unwrap();
        assert_eq!(sep.value, 3);
        assert_eq!(sep.witness, vec![0, 2, 4]);
        let span = span_number(&m, 1.0, SolveMode::Exact).unwrap();
        assert_eq!(span.value, 2);
        assert!(m.is_spanning(&span.witness, 1.0));
    }

    #[test]
    fn validation() {
        assert!(FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetricSpace::from_matrix(vec![vec![1.0]]).is_err());
        assert!(FiniteMetricSpace::from_matrix(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0]
        ])
        .is_err());
        assert!(sep_number(&line(2), 0.0, SolveMode::Exact).is_err());
        assert!(matches!(
            sep_number(&line(25), 1.0, SolveMode::Exact),
            Err(Error::Resource { .. })
        ));
        assert!(sep_number(&line(25), 1.0, SolveMode::Greedy).is_ok());
    }

    /// Exhaustive over subsets.
    fn brute(m: &FiniteMetricSpace, eps: f64) -> (usize, usize) {
        let n = m.len();
        let mut sep = 0;
        let mut span = n;
        for mask in 1u32..1 << n {
            let set = mask_to_vec(mask);
            if m.is_separated(&set, eps) {
                sep = sep.max(set.len());
            }
            if m.is_spanning(&set, eps) {
                span = span.min(set.len());
            }
        }
        (sep, span)
    }

    #[test]
    fn exact_solvers_match_brute_force() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(7, 0);
        for _ in 0..60 {
            let n = rng.gen_range(1..=9);
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen::<f64>(), rng.gen::<f64>()))
                .collect();
            let m = FiniteMetricSpace::from_matrix(
                pts.iter()
                    .map(|a| {
                        pts.iter()
                            .map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                            .collect()
                    })
                    .collect(),
            )
            .unwrap();
            for eps in [0.05, 0.2, 0.4, 0.8] {
                let (sep, span) = brute(&m, eps);
                let s = sep_number(&m, eps, SolveMode::Exact).unwrap();
                let p = span_number(&m, eps, SolveMode::Exact).unwrap();
                assert_eq!((s.value, p.value), (sep, span));
                assert!(m.is_separated(&s.witness, eps));
                assert!(m.is_spanning(&p.witness, eps));
                let g = sep_number(&m, eps, SolveMode::Greedy).unwrap();
                assert!(g.value <= sep && m.is_spanning(&g.witness, eps));
                assert!(span_number(&m, eps, SolveMode::Greedy).unwrap().value >= span);
            }
        }
    }
}
