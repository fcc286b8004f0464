use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::map::SoficMap;
use crate::error::{arg, Error, Result};
use crate::group::{symmetrize, FiniteSubset};

/// `[n]` with `m₁ ~ m₂` when `γ^σ m₁ = m₂` or `(γ⁻¹)^σ m₁ = m₂` for some
/// `γ ∈ F`, made undirected, plus the good sets used by the decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficGraph {
    pub n: usize,
    /// Sorted neighbors, without self loops.
    pub adjacency: Vec<Vec<u32>>,
    /// Words of `F` in canonical order.
    pub shape: Vec<String>,
    /// `images[i][m] = γ_i^σ m` for the `i`-th element of `F`.
    pub images: Vec<Vec<u32>>,
    /// `Q(Ŝ)_n` for `Ŝ` the symmetrization of `F ∪ S_test`.
    pub q_set: Vec<bool>,
    pub theta: Option<Vec<bool>>,
    /// Vertices whose closed neighborhood lies in `Q ∩ Θ`.
    pub j_set: Vec<bool>,
    /// Vertices of `J` whose closed neighborhood lies in `J`.
    pub i_set: Vec<bool>,
    pub max_degree: usize,
}

fn count(v: &[bool]) -> usize {
    v.iter().filter(|&&b| b).count()
}

impl SoficGraph {
    pub fn good(&self, m: usize) -> bool {
        self.q_set[m] && self.theta.as_ref().is_none_or(|t| t[m])
    }

    pub fn good_count(&self) -> usize {
        (0..self.n).filter(|&m| self.good(m)).count()
    }

    pub fn j_count(&self) -> usize {
        count(&self.j_set)
    }

    pub fn i_count(&self) -> usize {
        count(&self.i_set)
    }

    pub fn shape_len(&self) -> usize {
        self.images.len()
    }

    fn interior(&self, inside: impl Fn(usize) -> bool) -> Vec<bool> {
        (0..self.n)
            .map(|m| inside(m) && self.adjacency[m].iter().all(|&x| inside(x as usize)))
            .collect()
    }

    /// Hull bounds: a bad vertex removes at most itself and its neighbors.
    /// `I ⊆ J ⊆ Q ∩ Θ`, `|G−J| ≤ (1+Δ)|G−(Q∩Θ)|`, `|G−I| ≤ (1+Δ)|G−J|` and `Δ ≤ 4|F|`.
    pub fn check_bounds(&self) -> Result<()> {
        let n = self.n;
        let d = 1 + self.max_degree;
        let ok = (0..n)
            .all(|m| (!self.i_set[m] || self.j_set[m]) && (!self.j_set[m] || self.good(m)))
            && n - self.j_count() <= d * (n - self.good_count())
            && n - self.i_count() <= d * (n - self.j_count())
            && self.max_degree <= 4 * self.shape_len();
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(
                "sofic graph violates its hull bounds".into(),
            ))
        }
    }
}

/// Builds `G_σ` for `F`. `theta`, when given, marks the good coordinates of
/// a microstate; otherwise only `Q` is used.
pub fn build_sofic_graph(
    sigma: &SoficMap,
    f: &FiniteSubset,
    s_test: &FiniteSubset,
    theta: Option<&[bool]>,
) -> Result<SoficGraph> {
    if f.is_empty() {
        return arg("sofic graph over an empty set");
    }
    if f.spec() != sigma.group() || s_test.spec() != sigma.group() {
        return arg("sofic graph sets must live on the group of the sofic map");
    }
    let n = sigma.n();
    if let Some(t) = theta {
        if t.len() != n {
            return arg(format!(
                "good-coordinate mask of length {} for n = {n}",
                t.len()
            ));
        }
    }
    let images: Vec<Vec<u32>> = f.iter().map(|g| sigma.permutation(g)).collect();
    let inverse_images: Vec<Vec<u32>> = f.iter().map(|g| sigma.permutation(&g.inverse())).collect();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for table in images.iter().chain(&inverse_images) {
        for (m, &x) in table.iter().enumerate() {
            if x as usize != m {
                adjacency[m].push(x);
                adjacency[x as usize].push(m as u32);
            }
        }
    }
    for row in adjacency.iter_mut() {
        row.sort_unstable();
        row.dedup();
    }
    let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    let q_set = sigma.good_points(&symmetrize(&f.union(s_test)?))?;
    let mut graph = SoficGraph {
        n,
        adjacency,
        shape: f.iter().map(ToString::to_string).collect(),
        images,
        q_set,
        theta: theta.map(<[bool]>::to_vec),
        j_set: Vec::new(),
        i_set: Vec::new(),
        max_degree,
    };
    graph.j_set = graph.interior(|m| graph.good(m));
    graph.i_set = graph.interior(|m| graph.j_set[m]);
    graph.check_bounds()?;
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub center: u32,
    /// Indices into `F` (canonical order) of `F_i`.
    pub members: Vec<usize>,
    /// `B_i = F_i^σ c_i`.
    pub cells: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub k: usize,
    pub blocks: Vec<Block>,
    /// `W`, the union of the blocks, sorted.
    pub covered: Vec<u32>,
    /// `P = [n] − W`.
    pub leftover: Vec<u32>,
    pub j_size: usize,
    /// `|I − W|`.
    pub i_outside: usize,
}

/// Members of `F` whose image at `c` avoids `covered`.
fn free_members(g: &SoficGraph, c: usize, covered: &[bool]) -> Vec<usize> {
    (0..g.shape_len())
        .filter(|&i| !covered[g.images[i][c] as usize])
        .collect()
}

fn large_enough(members: usize, total: usize, k: usize) -> bool {
    members * k >= total
}

/// Greedy maximal family of disjoint blocks `F_i^σ c_i` with `c_i ∈ J`
/// and `k|F_i| ≥ |F|`, scanning `J` once in increasing order.
///
/// A center that fails once keeps failing as `W` grows, and an accepted
/// center leaves nothing free, so one pass is maximal.
pub fn decompose(g: &SoficGraph, k: usize) -> Result<Decomposition> {
    if k == 0 {
        return arg("k must be at least 1");
    }
    let s = g.shape_len();
    let mut covered = vec![false; g.n];
    let mut blocks = Vec::new();
    for c in (0..g.n).filter(|&c| g.j_set[c]) {
        let members = free_members(g, c, &covered);
        if !members.is_empty() && large_enough(members.len(), s, k) {
            let mut cells: Vec<u32> = members.iter().map(|&i| g.images[i][c]).collect();
            for &x in &cells {
                covered[x as usize] = true;
            }
            cells.sort_unstable();
            blocks.push(Block {
                center: c as u32,
                members,
                cells,
            });
        }
    }
    let d = Decomposition {
        k,
        covered: (0..g.n as u32).filter(|&m| covered[m as usize]).collect(),
        leftover: (0..g.n as u32).filter(|&m| !covered[m as usize]).collect(),
        j_size: g.j_count(),
        i_outside: (0..g.n).filter(|&m| g.i_set[m] && !covered[m]).count(),
        blocks,
    };
    verify_decomposition(g, &d)?;
    Ok(d)
}

/// Checks a decomposition from scratch: block shapes and sizes, centers in
/// `J`, disjointness, maximality, and `k|I − W| ≤ |J|`.
pub fn verify_decomposition(g: &SoficGraph, d: &Decomposition) -> Result<()> {
    let fail = |msg: String| {
        Err(Error::Argument(format!(
            "decomposition check failed: {msg}"
        )))
    };
    let s = g.shape_len();
    let mut covered = vec![false; g.n];
    for b in &d.blocks {
        let c = b.center as usize;
        if c >= g.n || !g.j_set[c] {
            return fail(format!("center {c} is not in J"));
        }
        if b.members.is_empty() || !large_enough(b.members.len(), s, d.k) {
            return fail(format!(
                "block at {c} has {} of {s} elements",
                b.members.len()
            ));
        }
        let mut cells: Vec<u32> = b.members.iter().map(|&i| g.images[i][c]).collect();
        cells.sort_unstable();
        if cells != b.cells || cells.windows(2).any(|w| w[0] == w[1]) {
            return fail(format!("block at {c} does not match F_i^σ c"));
        }
        for &x in &cells {
            if std::mem::replace(&mut covered[x as usize], true) {
                return fail(format!("cell {x} lies in two blocks"));
            }
        }
    }
    let w: Vec<u32> = (0..g.n as u32).filter(|&m| covered[m as usize]).collect();
    if w != d.covered || d.leftover.len() != g.n - w.len() {
        return fail("covered set does not match the blocks".into());
    }
    for c in (0..g.n).filter(|&c| g.j_set[c]) {
        let free = free_members(g, c, &covered).len();
        if free > 0 && large_enough(free, s, d.k) {
            return fail(format!(
                "family is not maximal: center {c} still has {free} free elements"
            ));
        }
    }
    let i_outside = (0..g.n).filter(|&m| g.i_set[m] && !covered[m]).count();
    if i_outside != d.i_outside || i_outside * d.k > g.j_count() {
        return fail(format!(
            "|I - W| = {i_outside} exceeds |J|/k = {}/{}",
            g.j_count(),
            d.k
        ));
    }
    Ok(())
}

/// Largest vertex count for [`exhaustive_maximal_families`].
pub const EXHAUSTIVE_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveSummary {
    /// Distinct covered sets `W` of maximal families.
    pub maximal_covers: usize,
    pub min_blocks: usize,
    pub max_blocks: usize,
    /// Every maximal family satisfies `k|I − W| ≤ |J|`.
    pub all_bounded: bool,
    /// Covered sets of the maximal families as bitmasks, sorted.
    pub covers: Vec<u64>,
}

/// Walks every sequence of admissible block choices on a small graph and
/// checks the counting bound at each maximal family.
pub fn exhaustive_maximal_families(g: &SoficGraph, k: usize) -> Result<ExhaustiveSummary> {
    if k == 0 {
        return arg("k must be at least 1");
    }
    if g.n > EXHAUSTIVE_MAX_N {
        return Err(Error::Resource {
            what: "vertices for exhaustive decomposition search",
            requested: g.n.to_string(),
            cap: EXHAUSTIVE_MAX_N as u64,
        });
    }
    let s = g.shape_len();
    let subsets: Vec<u64> = (1u64..1 << s)
        .filter(|m| large_enough(m.count_ones() as usize, s, k))
        .collect();
    let j: Vec<usize> = (0..g.n).filter(|&c| g.j_set[c]).collect();
    let block_mask = |c: usize, members: u64| -> u64 {
        (0..s)
            .filter(|i| members >> i & 1 == 1)
            .fold(0u64, |acc, i| acc | 1 << g.images[i][c])
    };
    let mut summary = ExhaustiveSummary {
        maximal_covers: 0,
        min_blocks: usize::MAX,
        max_blocks: 0,
        all_bounded: true,
        covers: Vec::new(),
    };
    let mut covers: BTreeSet<u64> = BTreeSet::new();
    // keyed with the block count so min and max see every path
    let mut seen: HashSet<(u64, usize)> = HashSet::new();
    let mut stack = vec![(0u64, 0usize)];
    while let Some((w, blocks)) = stack.pop() {
        let mut extended = false;
        for &c in &j {
            for &members in &subsets {
                let b = block_mask(c, members);
                if b & w == 0 {
                    extended = true;
                    let next = w | b;
                    if seen.insert((next, blocks + 1)) {
                        stack.push((next, blocks + 1));
                    }
                }
            }
        }
        if !extended {
            if !covers.insert(w) {
                summary.min_blocks = summary.min_blocks.min(blocks);
                summary.max_blocks = summary.max_blocks.max(blocks);
                continue;
            }
            summary.min_blocks = summary.min_blocks.min(blocks);
            summary.max_blocks = summary.max_blocks.max(blocks);
            let i_outside = (0..g.n).filter(|&m| g.i_set[m] && w >> m & 1 == 0).count();
            summary.all_bounded &= i_outside * k <= g.j_count();
        }
    }
    summary.maximal_covers = covers.len();
    summary.covers = covers.into_iter().collect();
    Ok(summary)
}
