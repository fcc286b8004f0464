use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::group::{symmetrize, FiniteSubset, GroupElement, GroupKind, GroupSpec, Letter};
use crate::rng::stream_rng;

/// How the generator permutations of a [`SoficMap`] are produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "model", deny_unknown_fields)]
pub enum SoficModel {
    /// Independent uniform permutations, one seeded stream per generator.
    RandomPermutation { seed: u64 },
    /// `k` acts as rotation by `k mod n`; integers only.
    Cyclic,
}

/// A map `Γ → Sym(n)` given by generator permutations, evaluated along
/// reduced words, with optional per-word overrides that need not be
/// multiplicative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoficMap {
    group: GroupSpec,
    n: usize,
    generators: Vec<Vec<u32>>,
    inverses: Vec<Vec<u32>>,
    overrides: BTreeMap<GroupElement, Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SoficFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<GroupSpec>,
    n: usize,
    generators: BTreeMap<String, Vec<u32>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    words: BTreeMap<String, Vec<u32>>,
}

fn invert(p: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

fn check_permutation(n: usize, p: &[u32], what: &str) -> Result<()> {
    if p.len() != n {
        return arg(format!("{what}: {} images for n = {n}", p.len()));
    }
    let mut seen = vec![false; n];
    for &x in p {
        match seen.get_mut(x as usize) {
            Some(s) if !*s => *s = true,
            _ => return arg(format!("{what} is not a permutation of 1..{n}")),
        }
    }
    Ok(())
}

impl SoficMap {
    pub fn generate(group: GroupSpec, n: usize, model: &SoficModel) -> Result<Self> {
        if n == 0 {
            return arg("sofic maps need n >= 1");
        }
        if u32::try_from(n).is_err() {
            return arg(format!("n = {n} is too large"));
        }
        let generators = match model {
            SoficModel::RandomPermutation { seed } => (0..group.rank())
                .map(|g| {
                    let mut p: Vec<u32> = (0..n as u32).collect();
                    p.shuffle(&mut stream_rng(*seed, g as u64));
                    p
                })
                .collect(),
            SoficModel::Cyclic => {
                if !group.is_integers() {
                    return arg(format!("the cyclic model needs the integers, not {group}"));
                }
                vec![(0..n as u32).map(|m| (m + 1) % n as u32).collect()]
            }
        };
        Self::from_parts(group, n, generators, BTreeMap::new())
    }

    /// Permutations are 0-based images of `0..n`.
    pub fn explicit(
        group: GroupSpec,
        n: usize,
        generators: Vec<Vec<u32>>,
        overrides: BTreeMap<GroupElement, Vec<u32>>,
    ) -> Result<Self> {
        Self::from_parts(group, n, generators, overrides)
    }

    fn from_parts(
        group: GroupSpec,
        n: usize,
        generators: Vec<Vec<u32>>,
        overrides: BTreeMap<GroupElement, Vec<u32>>,
    ) -> Result<Self> {
        if n == 0 {
            return arg("sofic maps need n >= 1");
        }
        if generators.len() != group.rank() {
            return arg(format!(
                "{} generator permutations for {group}",
                generators.len()
            ));
        }
        for (i, p) in generators.iter().enumerate() {
            check_permutation(
                n,
                p,
                &format!("generator {}", Letter::new(i as u16, false).to_char()),
            )?;
        }
        for (w, p) in &overrides {
            if w.spec() != group {
                return arg(format!("override for {w} is not an element of {group}"));
            }
            if w.is_identity() {
                return arg("the identity always acts trivially and cannot be overridden");
            }
            check_permutation(n, p, &format!("word {w}"))?;
        }
        let inverses = generators.iter().map(|p| invert(p)).collect();
        Ok(SoficMap {
            group,
            n,
            generators,
            inverses,
            overrides,
        })
    }

    /// Reads `{n, generators: {name: [1-based images]}}`, with an optional
    /// `group` (free of rank = number of generators by default) and optional
    /// `words` overriding individual words.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SoficFile = serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("sofic map file: {e}")))?;
        let group = match file.group {
            Some(g) => g,
            None => GroupSpec::free(file.generators.len())?,
        };
        let one_based = |p: &Vec<u32>, what: &str| -> Result<Vec<u32>> {
            p.iter()
                .map(|&x| {
                    x.checked_sub(1)
                        .ok_or_else(|| Error::Argument(format!("{what}: images are 1-based")))
                })
                .collect()
        };
        let mut generators = vec![None; group.rank()];
        for (name, p) in &file.generators {
            let letter = name
                .chars()
                .next()
                .filter(|_| name.chars().count() == 1)
                .and_then(Letter::from_char)
                .filter(|l| !l.inverse && (l.generator as usize) < group.rank())
                .ok_or_else(|| {
                    Error::Argument(format!("{name:?} is not a generator of {group}"))
                })?;
            generators[letter.generator as usize] = Some(one_based(p, name)?);
        }
        let generators = generators
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                p.ok_or_else(|| {
                    Error::Argument(format!(
                        "missing generator {}",
                        Letter::new(i as u16, false).to_char()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut overrides = BTreeMap::new();
        for (w, p) in &file.words {
            overrides.insert(group.parse(w)?, one_based(p, w)?);
        }
        Self::from_parts(group, file.n, generators, overrides)
    }

    pub fn to_json(&self) -> String {
        let one_based = |p: &[u32]| p.iter().map(|x| x + 1).collect();
        let file = SoficFile {
            group: Some(self.group),
            n: self.n,
            generators: self
                .generators
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    (
                        Letter::new(i as u16, false).to_char().to_string(),
                        one_based(p),
                    )
                })
                .collect(),
            words: self
                .overrides
                .iter()
                .map(|(w, p)| (w.to_string(), one_based(p)))
                .collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    pub fn group(&self) -> GroupSpec {
        self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator_permutation(&self, i: usize) -> &[u32] {
        &self.generators[i]
    }

    /// Free group with no overrides: a homomorphism by construction.
    pub fn is_word_composed(&self) -> bool {
        self.overrides.is_empty() && self.group.kind() == GroupKind::Free
    }

    pub fn is_explicit_override(&self, g: &GroupElement) -> bool {
        self.overrides.contains_key(g)
    }

    /// `γ^σ m`: letters of the reduced word applied right to left.
    pub fn apply(&self, g: &GroupElement, m: u32) -> u32 {
        if let Some(p) = self.overrides.get(g) {
            return p[m as usize];
        }
        let letters: Vec<Letter> = g.letters().collect();
        letters.iter().rev().fold(m, |x, l| {
            let table = if l.inverse {
                &self.inverses
            } else {
                &self.generators
            };
            table[l.generator as usize][x as usize]
        })
    }

    /// `γ^σ` as a table of images of `0..n`.
    pub fn permutation(&self, g: &GroupElement) -> Vec<u32> {
        if let Some(p) = self.overrides.get(g) {
            return p.clone();
        }
        let mut p: Vec<u32> = (0..self.n as u32).collect();
        for l in g.letters().collect::<Vec<_>>().iter().rev() {
            let table = if l.inverse {
                &self.inverses
            } else {
                &self.generators
            };
            let t = &table[l.generator as usize];
            for x in p.iter_mut() {
                *x = t[*x as usize];
            }
        }
        p
    }

    /// Whether `m` is in `Q(S)_n`: multiplicative on every pair of `S` and
    /// separating every pair of distinct elements.
    pub fn good_points(&self, s: &FiniteSubset) -> Result<Vec<bool>> {
        let t = PairTables::new(self, s)?;
        Ok((0..self.n).into_par_iter().map(|m| t.is_good(m)).collect())
    }
}

/// Permutations of the elements of `S` and of all products `γ₁γ₂`.
struct PairTables {
    single: Vec<Vec<u32>>,
    products: Vec<Vec<Vec<u32>>>,
}

impl PairTables {
    fn new(sigma: &SoficMap, s: &FiniteSubset) -> Result<Self> {
        if s.spec() != sigma.group {
            return arg(format!(
                "test set in {} for a sofic map on {}",
                s.spec(),
                sigma.group
            ));
        }
        let single: Vec<Vec<u32>> = s.iter().map(|g| sigma.permutation(g)).collect();
        let products = s
            .iter()
            .map(|g1| {
                s.iter()
                    .map(|g2| Ok(sigma.permutation(&g1.multiply(g2)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairTables { single, products })
    }

    fn multiplicative(&self, i: usize, j: usize, m: usize) -> bool {
        self.products[i][j][m] == self.single[i][self.single[j][m] as usize]
    }

    fn separates(&self, i: usize, j: usize, m: usize) -> bool {
        self.single[i][m] != self.single[j][m]
    }

    fn is_good(&self, m: usize) -> bool {
        let k = self.single.len();
        (0..k).all(|i| {
            (0..k).all(|j| self.multiplicative(i, j, m) && (i == j || self.separates(i, j, m)))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairQuality {
    pub first: String,
    pub second: String,
    /// Fraction of `m` with `(γ₁γ₂)^σ m = γ₁^σ γ₂^σ m`.
    pub multiplicativity: f64,
    /// Fraction of `m` with `γ₁^σ m ≠ γ₂^σ m`; `None` when `γ₁ = γ₂`.
    pub freeness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n: usize,
    pub pairs: Vec<PairQuality>,
    pub min_multiplicativity: f64,
    /// 1 when the test set has a single element.
    pub min_freeness: f64,
    /// `|Q(Ŝ)_n| / n` for the symmetrized test set.
    pub good_fraction: f64,
}

/// Exact per-pair fractions by direct count.
pub fn quality(sigma: &SoficMap, s: &FiniteSubset) -> Result<QualityReport> {
    let t = PairTables::new(sigma, s)?;
    let n = sigma.n;
    let k = s.len();
    let counts: Vec<(usize, usize)> = (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / k, ij % k);
            let mult = (0..n).filter(|&m| t.multiplicative(i, j, m)).count();
            let free = (0..n).filter(|&m| t.separates(i, j, m)).count();
            (mult, free)
        })
        .collect();
    let pairs: Vec<PairQuality> = counts
        .iter()
        .enumerate()
        .map(|(ij, &(mult, free))| {
            let (i, j) = (ij / k, ij % k);
            PairQuality {
                first: s.elements()[i].to_string(),
                second: s.elements()[j].to_string(),
                multiplicativity: mult as f64 / n as f64,
                freeness: (i != j).then(|| free as f64 / n as f64),
            }
        })
        .collect();
    let min_multiplicativity = pairs.iter().map(|p| p.multiplicativity).fold(1.0, f64::min);
    let min_freeness = pairs.iter().filter_map(|p| p.freeness).fold(1.0, f64::min);
    let good = sigma.good_points(&symmetrize(s))?;
    Ok(QualityReport {
        n,
        pairs,
        min_multiplicativity,
        min_freeness,
        good_fraction: good.iter().filter(|&&g| g).count() as f64 / n as f64,
    })
}
