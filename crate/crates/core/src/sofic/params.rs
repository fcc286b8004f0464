use serde::{Deserialize, Serialize};

use super::map::SoficMap;
use crate::error::{arg, Error, Result};
use crate::group::{symmetrize, FiniteSubset};

/// `-(x log x + (1-x) log(1-x))` in nats, 0 at both endpoints.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return arg(format!("binary entropy needs 0 <= x <= 1, got {x}"));
    }
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// A candidate set with its separation number `sep(X, ε/4, d_F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub size: usize,
    pub sep_quarter: u128,
}

impl Candidate {
    pub fn new(f: &FiniteSubset, sep_quarter: u128) -> Self {
        Candidate {
            label: f.label(),
            size: f.len(),
            sep_quarter,
        }
    }

    fn rate(&self) -> f64 {
        (self.sep_quarter as f64).ln() / self.size as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Parameters {
    pub kappa: f64,
    pub eps: f64,
    pub sep_half: u128,
    /// Infinite when `sep(X, ε/2, d) = 1`.
    pub eta: f64,
    pub k: usize,
    /// Index of the chosen set in the candidate list.
    pub chosen: usize,
    pub f: Candidate,
    pub s: usize,
    /// `2^{-delta_exponent}`.
    pub delta: f64,
    pub delta_exponent: u32,
    /// First sofic size from which `|Q(F̂)_n| ≥ (1 − η/(4s²)) n` holds along
    /// the supplied sequence.
    pub n_threshold: Option<usize>,
}

/// One defining inequality, re-evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn check(name: &'static str, lhs: f64, rhs: f64) -> Check {
    Check {
        name,
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

fn eta_of(kappa: f64, sep_half: u128) -> f64 {
    if sep_half == 1 {
        f64::INFINITY
    } else {
        kappa / (4.0 * (sep_half as f64).ln())
    }
}

impl Theorem1Parameters {
    /// Re-evaluates every defining relation from the stored numbers.
    pub fn verify(&self) -> Vec<Check> {
        let eta = eta_of(self.kappa, self.sep_half);
        let sd = self.s as f64 * self.delta;
        let mut checks = vec![
            Check {
                name: "eta = kappa / (4 log sep(eps/2))",
                lhs: self.eta,
                rhs: eta,
                holds: self.eta == eta || (self.eta - eta).abs() <= 1e-15 * eta.abs(),
            },
            check("1/k <= eta/2", 1.0 / self.k as f64, eta / 2.0),
            check(
                "log sep(eps/4, d_F) / |F| <= kappa/(4k)",
                self.f.rate(),
                self.kappa / (4.0 * self.k as f64),
            ),
            check("delta <= (eps/8)^2", self.delta, (self.eps / 8.0).powi(2)),
            check(
                "delta <= eta/(4 s^3)",
                self.delta,
                eta / (4.0 * (self.s as f64).powi(3)),
            ),
            check("s delta < 1", sd, 1.0),
        ];
        checks.last_mut().unwrap().holds = sd < 1.0;
        let h = binary_entropy(sd.min(1.0)).unwrap_or(f64::INFINITY);
        checks.push(check("h(s delta) <= kappa/4", h, self.kappa / 4.0));
        checks
    }

    pub fn is_valid(&self) -> bool {
        self.verify().iter().all(|c| c.holds)
    }
}

/// Largest dyadic exponent search depth for `δ`.
const MAX_DELTA_EXPONENT: u32 = 1070;

/// Chooses `η`, the smallest `k`, the first qualifying `F`, the largest
/// dyadic `δ`, and optionally `N` from a sofic sequence.
///
/// Fails with [`Error::CertificationUnavailable`] when no candidate
/// satisfies the rate condition.
pub fn theorem1_parameters(
    kappa: f64,
    eps: f64,
    sep_half: u128,
    candidates: &[(FiniteSubset, u128)],
    sequence: &[SoficMap],
) -> Result<Theorem1Parameters> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return arg(format!("kappa must lie in (0, 1), got {kappa}"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return arg(format!("epsilon must be positive, got {eps}"));
    }
    if sep_half == 0 || candidates.iter().any(|(_, s)| *s == 0) {
        return arg("separation numbers are at least 1");
    }
    if candidates.is_empty() || candidates.iter().any(|(f, _)| f.is_empty()) {
        return arg("need at least one nonempty candidate set");
    }
    let eta = eta_of(kappa, sep_half);
    let mut k = if eta.is_infinite() {
        1
    } else {
        (2.0 / eta).ceil().max(1.0) as usize
    };
    while 1.0 / (k as f64) > eta / 2.0 {
        k += 1;
    }
    while k > 1 && 1.0 / ((k - 1) as f64) <= eta / 2.0 {
        k -= 1;
    }
    let threshold = kappa / (4.0 * k as f64);
    let picked = candidates
        .iter()
        .enumerate()
        .map(|(i, (f, sep))| (i, f, Candidate::new(f, *sep)))
        .find(|(_, _, c)| c.rate() <= threshold);
    let Some((chosen, f_set, f)) = picked else {
        let best = candidates
            .iter()
            .map(|(f, sep)| Candidate::new(f, *sep))
            .min_by(|a, b| a.rate().total_cmp(&b.rate()))
            .expect("nonempty");
        return Err(Error::CertificationUnavailable(format!(
            "no candidate set satisfies log sep(eps/4, d_F)/|F| <= kappa/(4k) = {threshold:.6} with k = {k}; \
             the smallest rate is {:.6} at {}",
            best.rate(),
            best.label
        )));
    };
    let s = f.size;
    let sf = s as f64;
    let delta_ok = |d: f64| {
        let sd = sf * d;
        d <= (eps / 8.0).powi(2)
            && d <= eta / (4.0 * sf.powi(3))
            && sd < 1.0
            && binary_entropy(sd).is_ok_and(|h| h <= kappa / 4.0)
    };
    let delta_exponent = (0..=MAX_DELTA_EXPONENT)
        .find(|&j| delta_ok(0.5f64.powi(j as i32)))
        .ok_or_else(|| {
            Error::CertificationUnavailable("no dyadic delta satisfies the constraints".into())
        })?;
    let n_threshold = if sequence.is_empty() {
        None
    } else {
        q_threshold(f_set, eta, sequence)?
    };
    let params = Theorem1Parameters {
        kappa,
        eps,
        sep_half,
        eta,
        k,
        chosen,
        f,
        s,
        delta: 0.5f64.powi(delta_exponent as i32),
        delta_exponent,
        n_threshold,
    };
    debug_assert!(params.is_valid());
    Ok(params)
}

/// Smallest `n` in the sequence such that every supplied map of size at
/// least `n` has `|Q(F̂)_n| ≥ (1 − η/(4s²)) n`.
fn q_threshold(f: &FiniteSubset, eta: f64, sequence: &[SoficMap]) -> Result<Option<usize>> {
    let need = 1.0 - eta / (4.0 * (f.len() as f64).powi(2));
    let hat = symmetrize(f);
    let mut ok: Vec<(usize, bool)> = sequence
        .iter()
        .map(|sigma| {
            let good = sigma.good_points(&hat)?.iter().filter(|&&b| b).count();
            Ok((sigma.n(), good as f64 >= need * sigma.n() as f64))
        })
        .collect::<Result<_>>()?;
    ok.sort_by_key(|&(n, _)| n);
    let mut threshold = None;
    for &(n, good) in ok.iter().rev() {
        if !good {
            break;
        }
        threshold = Some(n);
    }
    Ok(threshold)
}
