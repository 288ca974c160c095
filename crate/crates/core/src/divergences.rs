//! Divergences between two distributions over a common label set.
//!
//! All logarithms are natural. Conventions at zero probabilities:
//!
//! | term | μ₁(x) = 0 | μ₁(x) > 0, μ₂(x) = 0 |
//! |------|-----------|----------------------|
//! | Rényi, KL | contributes 0 | +∞ |
//! | max divergence | excluded from the sup | +∞ |
//! | f-divergence | `0` when both vanish | `μ₁(x) · lim f(s)/s` |
//!
//! The free functions take [`Dist`] pairs and align them by label. The
//! `*_probs` variants take pre-aligned probability slices and are what the
//! enumeration code calls in its inner loops.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dist::{align, Dist};
use crate::enumerate::{block_masses, check_capacity, for_each_map};
use crate::error::{domain, Result};

/// A convex weight function `f` for [`f_divergence`].
///
/// `slope_at_infinity` is `lim_{s→∞} f(s)/s`; it gives the contribution
/// `μ₁(x) · slope` of outcomes where `μ₂(x) = 0`.
#[derive(Clone)]
pub struct WeightFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    slope_at_infinity: f64,
}

impl WeightFn {
    pub fn new(
        name: impl Into<String>,
        slope_at_infinity: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WeightFn {
            name: name.into(),
            f: Arc::new(f),
            slope_at_infinity,
        }
    }

    /// `t ↦ t^α`; its f-divergence is `exp((α−1)·D^α)`.
    pub fn power(alpha: f64) -> Self {
        let slope = if alpha > 1.0 { f64::INFINITY } else { 0.0 };
        WeightFn::new(format!("t^{alpha}"), slope, move |t| t.powf(alpha))
    }

    /// `t ↦ √t − 1`; its f-divergence is the negated Hellinger distance.
    pub fn sqrt_minus_one() -> Self {
        WeightFn::new("sqrt(t)-1", 0.0, |t| t.sqrt() - 1.0)
    }

    /// `t ↦ |t − 1| / 2`; its f-divergence is total variation.
    pub fn half_abs() -> Self {
        WeightFn::new("|t-1|/2", 0.5, |t| (t - 1.0).abs() / 2.0)
    }

    /// `t ↦ t·ln t`; its f-divergence is KL.
    pub fn t_log_t() -> Self {
        WeightFn::new("t*ln(t)", f64::INFINITY, |t| {
            if t == 0.0 {
                0.0
            } else {
                t * t.ln()
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn slope_at_infinity(&self) -> f64 {
        self.slope_at_infinity
    }

    /// Randomized midpoint-convexity probe on `[0, upper]`. Returns the first
    /// pair `(a, b)` with `f((a+b)/2) > (f(a)+f(b))/2 + 1e-12`, if any.
    pub fn midpoint_convexity_violation(
        &self,
        upper: f64,
        trials: usize,
        seed: u64,
    ) -> Option<(f64, f64)> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| (rng.random::<f64>() * upper, rng.random::<f64>() * upper))
            .find(|&(a, b)| {
                let mid = self.eval((a + b) / 2.0);
                let chord = (self.eval(a) + self.eval(b)) / 2.0;
                mid > chord + 1e-12 * (1.0 + chord.abs())
            })
    }
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFn").field("name", &self.name).finish()
    }
}

type Evaluator = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A function `F: [0,1]^{2k} → [0,∞]` evaluated on the block masses
/// `(μ₁(A₁..A_k), μ₂(A₁..A_k))` of a k-partition.
#[derive(Clone)]
pub struct QuasiConvexFn {
    name: String,
    arity: usize,
    declared_quasi_convex: bool,
    eval: Evaluator,
}

impl QuasiConvexFn {
    /// `eval` receives the μ₁ block masses and the μ₂ block masses as two
    /// slices of length `arity`.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        declared_quasi_convex: bool,
        eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(domain("arity must be at least 1"));
        }
        Ok(QuasiConvexFn {
            name: name.into(),
            arity,
            declared_quasi_convex,
            eval: Arc::new(eval),
        })
    }

    /// `F(x, x', y, y') = |x − y|`, whose partition supremum is total variation.
    pub fn abs_first_block() -> Self {
        QuasiConvexFn::new("|x-y|", 2, true, |x, y| (x[0] - y[0]).abs()).unwrap()
    }

    /// `F(x, x', y, y') = x − e^ε y`, whose partition supremum is `Δ^ε`.
    pub fn eps_first_block(eps: f64) -> Self {
        let scale = eps.exp();
        QuasiConvexFn::new(format!("x-e^{eps}y"), 2, true, move |x, y| {
            x[0] - scale * y[0]
        })
        .unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn declared_quasi_convex(&self) -> bool {
        self.declared_quasi_convex
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.eval)(x, y)
    }
}

impl fmt::Debug for QuasiConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiConvexFn")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .finish()
    }
}

/// Which divergence to evaluate.
#[derive(Debug, Clone)]
pub enum DivergenceSpec {
    /// `Δ^ε`, the divergence behind (ε, δ)-differential privacy.
    EpsDp { eps: f64 },
    /// Rényi divergence of order `α > 1`.
    Renyi { alpha: f64 },
    Kl,
    MaxDiv,
    Tv,
    Hellinger,
    FDiv(WeightFn),
    /// Supremum of `F` over ordered k-partitions, `k = F.arity()`.
    FSup(QuasiConvexFn),
}

impl DivergenceSpec {
    /// Renyi order with the limits routed to KL (α = 1) and max divergence
    /// (α = ∞).
    pub fn renyi(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 1.0 {
            return Err(domain(format!("Rényi order {alpha} must be at least 1")));
        }
        Ok(if alpha == 1.0 {
            DivergenceSpec::Kl
        } else if alpha == f64::INFINITY {
            DivergenceSpec::MaxDiv
        } else {
            DivergenceSpec::Renyi { alpha }
        })
    }

    pub fn eps(eps: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(domain(format!("ε = {eps} must be finite and nonnegative")));
        }
        Ok(DivergenceSpec::EpsDp { eps })
    }

    fn validate(&self) -> Result<()> {
        match self {
            DivergenceSpec::EpsDp { eps } if !(*eps >= 0.0) => {
                Err(domain(format!("ε = {eps} must be nonnegative")))
            }
            DivergenceSpec::Renyi { alpha } if !(*alpha > 1.0) => {
                Err(domain(format!("Rényi order {alpha} must exceed 1")))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the divergence on two distributions over the same labels.
    pub fn eval(&self, mu1: &Dist, mu2: &Dist) -> Result<f64> {
        self.validate()?;
        let (p, q) = align(mu1, mu2)?;
        self.eval_probs(&p, &q)
    }

    /// Evaluates on pre-aligned probability vectors.
    pub fn eval_probs(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        Ok(match self {
            DivergenceSpec::EpsDp { eps } => eps_divergence_probs(*eps, p, q),
            DivergenceSpec::Renyi { alpha } => renyi_probs(*alpha, p, q),
            DivergenceSpec::Kl => kl_probs(p, q),
            DivergenceSpec::MaxDiv => max_divergence_probs(p, q),
            DivergenceSpec::Tv => total_variation_probs(p, q),
            DivergenceSpec::Hellinger => hellinger_probs(p, q),
            DivergenceSpec::FDiv(w) => f_divergence_probs(w, p, q),
            DivergenceSpec::FSup(func) => f_sup_probs(func, p, q)?,
        })
    }

    /// True when the value depends only on the multiset of `(μ₁(x), μ₂(x))`
    /// pairs, so k-cuts may enumerate unordered partitions.
    pub fn is_block_symmetric(&self) -> bool {
        matches!(
            self,
            DivergenceSpec::Renyi { .. }
                | DivergenceSpec::Kl
                | DivergenceSpec::MaxDiv
                | DivergenceSpec::Tv
                | DivergenceSpec::Hellinger
                | DivergenceSpec::FDiv(_)
        )
    }

    /// True when the value is reported in nats and `--bits` rescales it.
    pub fn is_logarithmic(&self) -> bool {
        matches!(
            self,
            DivergenceSpec::Renyi { .. } | DivergenceSpec::Kl | DivergenceSpec::MaxDiv
        )
    }
}

impl fmt::Display for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceSpec::EpsDp { eps } => write!(f, "eps:{eps}"),
            DivergenceSpec::Renyi { alpha } => write!(f, "renyi:{alpha}"),
            DivergenceSpec::Kl => write!(f, "kl"),
            DivergenceSpec::MaxDiv => write!(f, "max"),
            DivergenceSpec::Tv => write!(f, "tv"),
            DivergenceSpec::Hellinger => write!(f, "hellinger"),
            DivergenceSpec::FDiv(w) => write!(f, "fdiv[{}]", w.name()),
            DivergenceSpec::FSup(func) => write!(f, "fsup[{}]", func.name()),
        }
    }
}

impl FromStr for DivergenceSpec {
    type Err = crate::Error;

    /// Parses `eps:ε`, `renyi:α`, `kl`, `max`, `tv` or `hellinger`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| domain(format!("{name} needs a parameter, e.g. {name}:2")))?;
            match a {
                "inf" | "infinity" => Ok(f64::INFINITY),
                _ => a
                    .parse::<f64>()
                    .map_err(|_| domain(format!("cannot parse parameter {a:?}"))),
            }
        };
        let no_arg = |spec: DivergenceSpec| -> Result<DivergenceSpec> {
            match arg {
                None => Ok(spec),
                Some(_) => Err(domain(format!("{name} takes no parameter"))),
            }
        };
        match name {
            "eps" => DivergenceSpec::eps(number(arg)?),
            "renyi" => DivergenceSpec::renyi(number(arg)?),
            "kl" => no_arg(DivergenceSpec::Kl),
            "max" => no_arg(DivergenceSpec::MaxDiv),
            "tv" => no_arg(DivergenceSpec::Tv),
            "hellinger" | "hd" => no_arg(DivergenceSpec::Hellinger),
            _ => Err(domain(format!("unknown divergence {name:?}"))),
        }
    }
}

/// `Δ^ε(μ₁‖μ₂) = sup_S (μ₁(S) − e^ε μ₂(S)) = Σ_x (μ₁(x) − e^ε μ₂(x))⁺`.
pub fn eps_divergence(eps: f64, mu1: &Dist, mu2: &Dist) -> Result<f64> {
    DivergenceSpec::eps(eps)?.eval(mu1, mu2)
}

/// Rényi divergence of order `α > 1`.
pub fn renyi(alpha: f64, mu1: &Dist, mu2: &Dist) -> Result<f64> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(domain(format!(
            "Rényi order {alpha} must be finite and exceed 1; use kl or max_divergence for the limits"
        )));
    }
    DivergenceSpec::Renyi { alpha }.eval(mu1, mu2)
}

pub fn kl(mu1: &Dist, mu2: &Dist) -> Result<f64> {
    DivergenceSpec::Kl.eval(mu1, mu2)
}

/// `ln sup_x μ₁(x)/μ₂(x)` over the support of μ₁.
pub fn max_divergence(mu1: &Dist, mu2: &Dist) -> Result<f64> {
    DivergenceSpec::MaxDiv.eval(mu1, mu2)
}

pub fn total_variation(mu1: &Dist, mu2: &Dist) -> Result<f64> {
    DivergenceSpec::Tv.eval(mu1, mu2)
}

/// `1 − Σ_x √(μ₁(x) μ₂(x))`.
pub fn hellinger(mu1: &Dist, mu2: &Dist) -> Result<f64> {
    DivergenceSpec::Hellinger.eval(mu1, mu2)
}

/// `Σ_x μ₂(x) f(μ₁(x)/μ₂(x))`. Convexity of `weight` is the caller's claim.
pub fn f_divergence(weight: &WeightFn, mu1: &Dist, mu2: &Dist) -> Result<f64> {
    let (p, q) = align(mu1, mu2)?;
    Ok(f_divergence_probs(weight, &p, &q))
}

/// `sup F(μ₁(A₁..A_k), μ₂(A₁..A_k))` over ordered k-partitions of the
/// space, empty blocks allowed.
pub fn f_sup_divergence(func: &QuasiConvexFn, mu1: &Dist, mu2: &Dist) -> Result<f64> {
    let (p, q) = align(mu1, mu2)?;
    f_sup_probs(func, &p, &q)
}

pub fn eps_divergence_probs(eps: f64, p: &[f64], q: &[f64]) -> f64 {
    let scale = eps.exp();
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (a - scale * b).max(0.0))
        .sum()
}

pub fn renyi_probs(alpha: f64, p: &[f64], q: &[f64]) -> f64 {
    // log-sum-exp of α ln p + (1−α) ln q over the support of p
    let mut logs = Vec::with_capacity(p.len());
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        logs.push(alpha * a.ln() + (1.0 - alpha) * b.ln());
    }
    (log_sum_exp(&logs) / (alpha - 1.0)).max(0.0)
}

pub fn kl_probs(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        total += a * (a / b).ln();
    }
    total.max(0.0)
}

pub fn max_divergence_probs(p: &[f64], q: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        best = best.max(a.ln() - b.ln());
    }
    best
}

pub fn total_variation_probs(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn hellinger_probs(p: &[f64], q: &[f64]) -> f64 {
    let affinity: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    (1.0 - affinity).max(0.0)
}

pub fn f_divergence_probs(weight: &WeightFn, p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if b > 0.0 {
                b * weight.eval(a / b)
            } else if a > 0.0 {
                a * weight.slope_at_infinity()
            } else {
                0.0
            }
        })
        .sum()
}

pub fn f_sup_probs(func: &QuasiConvexFn, p: &[f64], q: &[f64]) -> Result<f64> {
    let k = func.arity();
    check_capacity(p.len(), k)?;
    let mut best = f64::NEG_INFINITY;
    let (mut bp, mut bq) = (Vec::with_capacity(k), Vec::with_capacity(k));
    for_each_map(p.len(), k, |assignment| {
        block_masses(p, assignment, k, &mut bp);
        block_masses(q, assignment, k, &mut bq);
        let v = func.eval(&bp, &bq);
        if v > best {
            best = v;
        }
    });
    Ok(best)
}

pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}
