//! Randomized response and privacy-claim checkers.
//!
//! Inputs and outputs of an `n`-bit mechanism are bit strings such as
//! `"010"`, ordered by their value with the first character most
//! significant. Two inputs are adjacent when they differ in one bit.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::Dist;
use crate::divergences::{eps_divergence_probs, max_divergence_probs, renyi_probs, DivergenceSpec};
use crate::error::{domain, Error, Result};
use crate::regions::{rejection_points, ErrorPoint};
use crate::EPS_COMPARE;

/// Largest supported number of bits.
pub const MAX_BITS: usize = 10;

/// Number of grid points for claims quantified over all orders α.
pub const ALPHA_GRID_POINTS: usize = 200;

/// Largest finite order on the α grid.
pub const ALPHA_MAX: f64 = 64.0;

/// Largest output space for [`error_cloud`].
pub const MAX_CLOUD_OUTCOMES: usize = 20;

/// Flips each of `n_bits` input bits independently with probability
/// `flip_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomizedResponse {
    n_bits: usize,
    flip_p: f64,
}

impl RandomizedResponse {
    pub fn new(n_bits: usize, flip_p: f64) -> Result<Self> {
        if n_bits == 0 {
            return Err(domain("randomized response needs at least one bit"));
        }
        if n_bits > MAX_BITS {
            return Err(Error::Capacity(format!(
                "{n_bits} bits exceed the limit of {MAX_BITS}"
            )));
        }
        if !(flip_p > 0.0 && flip_p < 1.0) {
            return Err(domain(format!("flip probability {flip_p} must lie in (0, 1)")));
        }
        Ok(RandomizedResponse { n_bits, flip_p })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn flip_p(&self) -> f64 {
        self.flip_p
    }

    /// All bit strings of length `n_bits`, in increasing order.
    pub fn space(&self) -> Vec<String> {
        (0..1u32 << self.n_bits).map(|v| self.label(v)).collect()
    }

    fn label(&self, value: u32) -> String {
        format!("{value:0width$b}", width = self.n_bits)
    }

    fn parse(&self, input: &str) -> Result<u32> {
        if input.len() != self.n_bits || !input.chars().all(|c| c == '0' || c == '1') {
            return Err(domain(format!(
                "input {input:?} is not a {}-bit string",
                self.n_bits
            )));
        }
        Ok(u32::from_str_radix(input, 2).expect("checked bit string"))
    }

    fn output_probs(&self, input: u32) -> Vec<f64> {
        let (p, q) = (self.flip_p, 1.0 - self.flip_p);
        (0..1u32 << self.n_bits)
            .map(|out| {
                let flips = (out ^ input).count_ones() as i32;
                p.powi(flips) * q.powi(self.n_bits as i32 - flips)
            })
            .collect()
    }

    /// Output distribution on `input`.
    pub fn output(&self, input: &str) -> Result<Dist> {
        let value = self.parse(input)?;
        Dist::new(self.space(), self.output_probs(value))
    }

    /// All unordered Hamming-1 pairs `(a, b)` with `a < b`, ordered by `a`
    /// and then by the flipped bit from the most significant.
    pub fn adjacent_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::with_capacity(self.n_bits << (self.n_bits - 1));
        for a in 0..1u32 << self.n_bits {
            for bit in (0..self.n_bits).rev() {
                let mask = 1u32 << bit;
                if a & mask == 0 {
                    pairs.push((self.label(a), self.label(a | mask)));
                }
            }
        }
        pairs
    }
}

impl FromStr for RandomizedResponse {
    type Err = Error;

    /// Parses `rr:n,p`.
    fn from_str(s: &str) -> Result<Self> {
        let args = s
            .strip_prefix("rr:")
            .ok_or_else(|| domain(format!("mechanism {s:?} must look like rr:3,0.34")))?;
        let (n, p) = args
            .split_once(',')
            .ok_or_else(|| domain(format!("mechanism {s:?} must look like rr:3,0.34")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| domain(format!("cannot parse bit count {n:?}")))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| domain(format!("cannot parse flip probability {p:?}")))?;
        RandomizedResponse::new(n, p)
    }
}

impl fmt::Display for RandomizedResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rr:{},{}", self.n_bits, self.flip_p)
    }
}

/// Output distribution of `mech` on `input`.
pub fn mech_output(mech: &RandomizedResponse, input: &str) -> Result<Dist> {
    mech.output(input)
}

pub fn adjacent_pairs(mech: &RandomizedResponse) -> Vec<(String, String)> {
    mech.adjacent_pairs()
}

/// A privacy definition with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PrivacyClaim {
    /// `Δ^ε ≤ δ`.
    Dp { eps: f64, delta: f64 },
    /// `D^α ≤ ρ`.
    Rdp { alpha: f64, rho: f64 },
    /// `D^α ≤ ξ + αρ` for every `α > 1`.
    Zcdp { xi: f64, rho: f64 },
    /// `D^α ≤ αρ` for every `1 < α < ω`.
    Tcdp { rho: f64, omega: f64 },
}

impl PrivacyClaim {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PrivacyClaim::Dp { eps, delta } => eps >= 0.0 && (0.0..=1.0).contains(&delta),
            PrivacyClaim::Rdp { alpha, rho } => alpha > 1.0 && rho >= 0.0,
            PrivacyClaim::Zcdp { xi, rho } => xi >= 0.0 && rho >= 0.0,
            PrivacyClaim::Tcdp { rho, omega } => rho >= 0.0 && omega > 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("claim parameters out of range: {self}")))
        }
    }
}

impl fmt::Display for PrivacyClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyClaim::Dp { eps, delta } => write!(f, "dp:{eps},{delta}"),
            PrivacyClaim::Rdp { alpha, rho } => write!(f, "rdp:{alpha},{rho}"),
            PrivacyClaim::Zcdp { xi, rho } => write!(f, "zcdp:{xi},{rho}"),
            PrivacyClaim::Tcdp { rho, omega } => write!(f, "tcdp:{rho},{omega}"),
        }
    }
}

impl FromStr for PrivacyClaim {
    type Err = Error;

    /// Parses `dp:ε,δ`, `rdp:α,ρ`, `zcdp:ξ,ρ` or `tcdp:ρ,ω`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("claim {s:?} must look like dp:1.0,0")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| {
                let a = a.trim();
                if a == "inf" {
                    Ok(f64::INFINITY)
                } else {
                    a.parse::<f64>()
                        .map_err(|_| domain(format!("cannot parse claim parameter {a:?}")))
                }
            })
            .collect::<Result<_>>()?;
        if nums.len() != 2 {
            return Err(domain(format!("claim {s:?} takes two parameters")));
        }
        let (a, b) = (nums[0], nums[1]);
        let claim = match kind.trim() {
            "dp" => PrivacyClaim::Dp { eps: a, delta: b },
            "rdp" => PrivacyClaim::Rdp { alpha: a, rho: b },
            "zcdp" => PrivacyClaim::Zcdp { xi: a, rho: b },
            "tcdp" => PrivacyClaim::Tcdp { rho: a, omega: b },
            other => return Err(domain(format!("unknown claim kind {other:?}"))),
        };
        claim.validate()?;
        Ok(claim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    /// Every defining inequality was evaluated.
    Exact,
    /// The quantifier over α was checked on a finite grid.
    GridVerified,
}

/// The tightest inequality found by [`check_claim`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimWitness {
    pub x0: String,
    pub x1: String,
    /// Order of the violated (or tightest) bound; `None` for DP.
    pub alpha: Option<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub holds: bool,
    pub verification: Verification,
    /// Largest `value − bound` over all checked inequalities.
    pub worst_margin: f64,
    pub witness: ClaimWitness,
}

/// The α grid: `α − 1` log-spaced over `[2^{-10}, top − 1]`.
pub fn alpha_grid(top: f64) -> Vec<f64> {
    let lo = (2f64.powi(-10)).ln();
    let hi = (top - 1.0).ln();
    let n = ALPHA_GRID_POINTS;
    (0..n)
        .map(|i| 1.0 + (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Checks `claim` on every ordered adjacent pair.
///
/// DP and RDP are checked exactly. zCDP and tCDP quantify over all orders:
/// they are checked on [`alpha_grid`] up to [`ALPHA_MAX`] (or `ω` when
/// smaller), and zCDP with `ρ = 0` also at the limit `α → ∞`, where the
/// bound becomes the max divergence.
pub fn check_claim(mech: &RandomizedResponse, claim: &PrivacyClaim) -> Result<ClaimCheck> {
    claim.validate()?;
    let space = mech.space();
    let outputs: Vec<Vec<f64>> = (0..space.len() as u32).map(|v| mech.output_probs(v)).collect();
    let mut ordered = Vec::new();
    for (a, b) in mech.adjacent_pairs() {
        ordered.push((a.clone(), b.clone()));
        ordered.push((b, a));
    }

    // (alpha, bound) pairs to test; alpha None means a DP check
    let (orders, verification): (Vec<(Option<f64>, f64)>, Verification) = match *claim {
        PrivacyClaim::Dp { delta, .. } => (vec![(None, delta)], Verification::Exact),
        PrivacyClaim::Rdp { alpha, rho } => (vec![(Some(alpha), rho)], Verification::Exact),
        PrivacyClaim::Zcdp { xi, rho } => {
            let mut v: Vec<_> = alpha_grid(ALPHA_MAX)
                .into_iter()
                .map(|a| (Some(a), xi + a * rho))
                .collect();
            if rho == 0.0 {
                v.push((Some(f64::INFINITY), xi));
            }
            (v, Verification::GridVerified)
        }
        PrivacyClaim::Tcdp { rho, omega } => {
            let top = omega.min(ALPHA_MAX);
            let v = alpha_grid(top).into_iter().map(|a| (Some(a), a * rho)).collect();
            (v, Verification::GridVerified)
        }
    };

    let mut worst: Option<(f64, ClaimWitness)> = None;
    for (x0, x1) in &ordered {
        let p = &outputs[mech.parse(x0)? as usize];
        let q = &outputs[mech.parse(x1)? as usize];
        for &(alpha, bound) in &orders {
            let value = match (claim, alpha) {
                (PrivacyClaim::Dp { eps, .. }, _) => eps_divergence_probs(*eps, p, q),
                (_, Some(a)) if a.is_infinite() => max_divergence_probs(p, q),
                (_, Some(a)) => renyi_probs(a, p, q),
                (_, None) => unreachable!("only DP checks carry no order"),
            };
            let margin = value - bound;
            if worst.as_ref().is_none_or(|(m, _)| margin > *m) {
                worst = Some((
                    margin,
                    ClaimWitness {
                        x0: x0.clone(),
                        x1: x1.clone(),
                        alpha,
                        value,
                        bound,
                    },
                ));
            }
        }
    }
    let (worst_margin, witness) = worst.expect("at least one adjacent pair");
    Ok(ClaimCheck {
        holds: worst_margin <= EPS_COMPARE,
        verification,
        worst_margin,
        witness,
    })
}

/// Largest value of `spec` over ordered adjacent pairs, with its pair.
pub fn worst_case_divergence(
    mech: &RandomizedResponse,
    spec: &DivergenceSpec,
) -> Result<(f64, (String, String))> {
    let mut best: Option<(f64, (String, String))> = None;
    for (a, b) in mech.adjacent_pairs() {
        let (da, db) = (mech.output(&a)?, mech.output(&b)?);
        for (v, pair) in [
            (spec.eval(&da, &db)?, (a.clone(), b.clone())),
            (spec.eval(&db, &da)?, (b.clone(), a.clone())),
        ] {
            if best.as_ref().is_none_or(|(m, _)| v > *m) {
                best = Some((v, pair));
            }
        }
    }
    Ok(best.expect("at least one adjacent pair"))
}

/// The (PFA, PMD) point of every rejection region `S` of the output space,
/// for inputs `x0` (null) and `x1`. Regions are listed by the bit mask of
/// `S` with the first output most significant: `∅` first, everything last.
pub fn error_cloud(mech: &RandomizedResponse, x0: &str, x1: &str) -> Result<Vec<ErrorPoint>> {
    let (a, b) = (mech.parse(x0)?, mech.parse(x1)?);
    if (a ^ b).count_ones() != 1 {
        return Err(domain(format!("{x0} and {x1} are not adjacent")));
    }
    let outcomes = 1usize << mech.n_bits;
    if outcomes > MAX_CLOUD_OUTCOMES {
        return Err(Error::Capacity(format!(
            "{outcomes} outputs exceed the cloud limit of {MAX_CLOUD_OUTCOMES}"
        )));
    }
    rejection_points(&mech.output_probs(a), &mech.output_probs(b))
}
