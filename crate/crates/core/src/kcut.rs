//! k-cuts: the supremum of a divergence over decision rules with `k`
//! outcomes.
//!
//! For a quasi-convex divergence, mixing decision rules never beats the
//! best deterministic one, so the supremum over channels `X → prob(k)` is
//! attained by a map `X → {0..k}` and can be found by enumeration. A
//! divergence equals its k-cut on every pair exactly when it is
//! k-generated; [`generatedness_gap`] measures the shortfall on one pair.

use serde::Serialize;

use crate::dist::{align, index_labels, DeterministicRule, Dist};
use crate::divergences::DivergenceSpec;
use crate::enumerate::{block_masses, check_capacity, for_each_map, for_each_partition};
use crate::error::{domain, Result};

/// A k-cut value with the rule attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutResult {
    pub k: usize,
    /// Supremum over deterministic rules into `k` outcomes.
    pub value: f64,
    /// Lexicographically least maximizing rule; outputs are labeled
    /// `"0"`..`"k-1"`.
    pub witness: DeterministicRule,
    /// The divergence on the original pair.
    pub full_value: f64,
    /// `full_value − value`.
    pub gap: f64,
}

impl CutResult {
    fn new(k: usize, value: f64, witness: DeterministicRule, full_value: f64) -> Self {
        CutResult {
            k,
            value,
            witness,
            full_value,
            gap: gap(full_value, value),
        }
    }

    /// Whether the cut is δ-distinguishing (`value > δ`).
    pub fn distinguishes(&self, delta: f64) -> bool {
        self.value > delta
    }
}

fn gap(full: f64, cut: f64) -> f64 {
    if full == cut {
        0.0
    } else {
        full - cut
    }
}

/// The k-cut of `spec` on `(mu1, mu2)`.
///
/// Block-symmetric divergences enumerate unordered partitions into at most
/// `k` blocks; the others enumerate all labeled maps. Either way the total
/// work is bounded by `k^|X| ≤ 2^24`.
pub fn k_cut(spec: &DivergenceSpec, k: usize, mu1: &Dist, mu2: &Dist) -> Result<CutResult> {
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    let full_value = spec.eval(mu1, mu2)?;
    let (p, q) = align(mu1, mu2)?;
    let n = p.len();
    check_capacity(n, k)?;

    let mut best = f64::NEG_INFINITY;
    let mut best_assignment = vec![0usize; n];
    let mut failure = None;
    let (mut bp, mut bq) = (Vec::with_capacity(k), Vec::with_capacity(k));
    let mut visit = |assignment: &[usize]| {
        if failure.is_some() {
            return;
        }
        block_masses(&p, assignment, k, &mut bp);
        block_masses(&q, assignment, k, &mut bq);
        match spec.eval_probs(&bp, &bq) {
            Ok(v) if v > best => {
                best = v;
                best_assignment.copy_from_slice(assignment);
            }
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    };
    if spec.is_block_symmetric() {
        for_each_partition(n, k, &mut visit);
    } else {
        for_each_map(n, k, &mut visit);
    }
    if let Some(e) = failure {
        return Err(e);
    }

    let witness =
        DeterministicRule::from_indices(mu1.labels().to_vec(), index_labels(k), best_assignment)?;
    Ok(CutResult::new(k, best, witness, full_value))
}

/// Full divergence, k-cut and their difference. A gap above tolerance
/// certifies that `spec` is not k-generated.
pub fn generatedness_gap(
    spec: &DivergenceSpec,
    k: usize,
    mu1: &Dist,
    mu2: &Dist,
) -> Result<CutResult> {
    k_cut(spec, k, mu1, mu2)
}

/// 2-cut of Rényi via the binary expression
/// `μ₁(S)^α μ₂(S)^{1−α} + μ₁(Sᶜ)^α μ₂(Sᶜ)^{1−α}` maximized over subsets.
pub fn renyi_2cut_closed_form(alpha: f64, mu1: &Dist, mu2: &Dist) -> Result<CutResult> {
    renyi_cut_closed_form(alpha, 2, mu1, mu2)
}

/// 3-cut of Rényi via the three-term expression over disjoint `S₁, S₂`.
pub fn renyi_3cut_closed_form(alpha: f64, mu1: &Dist, mu2: &Dist) -> Result<CutResult> {
    renyi_cut_closed_form(alpha, 3, mu1, mu2)
}

fn renyi_cut_closed_form(alpha: f64, k: usize, mu1: &Dist, mu2: &Dist) -> Result<CutResult> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(domain(format!("Rényi order {alpha} must be finite and exceed 1")));
    }
    let (p, q) = align(mu1, mu2)?;
    let n = p.len();
    check_capacity(n, k)?;

    let mut best_sum = f64::NEG_INFINITY;
    let mut best_assignment = vec![0usize; n];
    let (mut bp, mut bq) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for_each_map(n, k, |assignment| {
        block_masses(&p, assignment, k, &mut bp);
        block_masses(&q, assignment, k, &mut bq);
        let sum: f64 = bp
            .iter()
            .zip(&bq)
            .map(|(&a, &b)| power_term(a, b, alpha))
            .sum();
        if sum > best_sum {
            best_sum = sum;
            best_assignment.copy_from_slice(assignment);
        }
    });
    let value = (best_sum.ln() / (alpha - 1.0)).max(0.0);
    let full_value = crate::divergences::renyi_probs(alpha, &p, &q);
    let witness =
        DeterministicRule::from_indices(mu1.labels().to_vec(), index_labels(k), best_assignment)?;
    Ok(CutResult::new(k, value, witness, full_value))
}

/// `a^α b^{1−α}` with `0` when `a = 0` and `+∞` when only `b` vanishes.
fn power_term(a: f64, b: f64, alpha: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a.powf(alpha) * b.powf(1.0 - alpha)
    }
}

/// The three-point pair separating Rényi from its 2-cut: μ₁ uniform on
/// `{a, b, c}` and μ₂ ∝ `(p², p, 1)` with `p = (1/2)^{β/(α−1)}`. Requires
/// `β > α + 1`.
pub fn counterexample_pair(alpha: f64, beta: f64) -> Result<(Dist, Dist)> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(domain(format!("α = {alpha} must be finite and exceed 1")));
    }
    if !(beta > alpha + 1.0) || beta.is_infinite() {
        return Err(domain(format!("β = {beta} must be finite and exceed α + 1")));
    }
    let p = 0.5f64.powf(beta / (alpha - 1.0));
    let z = p * p + p + 1.0;
    let labels = vec!["a", "b", "c"];
    let mu1 = Dist::uniform(labels.clone())?;
    let mu2 = Dist::new(labels, vec![p * p / z, p / z, 1.0 / z])?;
    Ok((mu1, mu2))
}

/// Lower bound on the Rényi generatedness gap of [`counterexample_pair`]:
/// `(1/(α−1))·ln((2^β + 2^{−β} + 1) / max(2^{α+1}, 2^β + 1))`.
pub fn counterexample_gap_bound(alpha: f64, beta: f64) -> f64 {
    let num = 2f64.powf(beta) + 2f64.powf(-beta) + 1.0;
    let den = 2f64.powf(alpha + 1.0).max(2f64.powf(beta) + 1.0);
    (num / den).ln() / (alpha - 1.0)
}

/// True iff `Δ(μ₁‖μ₂) > δ`.
pub fn delta_distinguishing(
    spec: &DivergenceSpec,
    delta: f64,
    mu1: &Dist,
    mu2: &Dist,
) -> Result<bool> {
    Ok(spec.eval(mu1, mu2)? > delta)
}

/// True iff the k-cut of `spec` exceeds `δ` on the pair.
pub fn cut_distinguishing(
    spec: &DivergenceSpec,
    k: usize,
    delta: f64,
    mu1: &Dist,
    mu2: &Dist,
) -> Result<bool> {
    Ok(k_cut(spec, k, mu1, mu2)?.distinguishes(delta))
}
