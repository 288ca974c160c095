//! Conversion laws into (ε, δ)-differential privacy.
//!
//! A guarantee `Δ(M(x₀)‖M(x₁)) ≤ ρ` converts to `(ε, δ)`-DP exactly when
//! the region of `Δ` at level `ρ` fits inside the DP region `R(ε, δ)`.
//! Geometrically this asks for a supporting line of slope `−e^{−ε}` under
//! the lower boundary of the source region, with y-intercept form
//! `1 − x = e^ε y + δ`.
//!
//! | method | source | eps |
//! |--------|--------|-----|
//! | `Mironov` | Rényi | `ρ − ln δ / (α−1)` |
//! | `Refined` | Rényi | `ρ + ln((α−1)/α) − (ln δ + ln α)/(α−1)` |
//! | `TangentNumeric` | Rényi | numeric supporting line of the true boundary |
//! | `Hellinger` | Hellinger | closed-form δ for a given ε |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::divergences::{eps_divergence_probs, DivergenceSpec};
use crate::error::{domain, Error, Result};
use crate::regions::{hellinger_lower_boundary, renyi_region_lhs};
use crate::sample::Sampler;
use crate::EPS_COMPARE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mironov,
    Refined,
    TangentNumeric,
    Hellinger,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mironov => "mironov",
            Method::Refined => "refined",
            Method::TangentNumeric => "tangent_numeric",
            Method::Hellinger => "hellinger",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mironov" => Ok(Method::Mironov),
            "refined" => Ok(Method::Refined),
            "tangent" | "tangent_numeric" => Ok(Method::TangentNumeric),
            "hellinger" => Ok(Method::Hellinger),
            other => Err(domain(format!("unknown conversion method {other:?}"))),
        }
    }
}

/// An `(ε, δ)` pair produced by a conversion law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConversionResult {
    pub method: Method,
    pub eps: f64,
    pub delta: f64,
    /// Intermediate quantities (tangent points, slopes, checks).
    pub aux: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl ConversionResult {
    fn new(method: Method, eps: f64, delta: f64) -> Self {
        ConversionResult {
            method,
            eps,
            delta,
            aux: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }
}

fn check_rdp_args(alpha: f64, rho: f64, delta: f64) -> Result<()> {
    if !(alpha > 1.0) || alpha.is_infinite() {
        return Err(domain(format!("α = {alpha} must be finite and exceed 1")));
    }
    if !(rho >= 0.0) || rho.is_infinite() {
        return Err(domain(format!("ρ = {rho} must be finite and non-negative")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// `ε = ρ − ln δ / (α−1)`.
pub fn rdp_to_dp_mironov(alpha: f64, rho: f64, delta: f64) -> Result<ConversionResult> {
    check_rdp_args(alpha, rho, delta)?;
    let eps = rho - delta.ln() / (alpha - 1.0);
    Ok(ConversionResult::new(Method::Mironov, eps, delta))
}

/// `ε = ρ + ln((α−1)/α) − (ln δ + ln α)/(α−1)`.
///
/// The law comes from the tangent of the relaxed curve
/// `1 − x = (e^ρ y)^{(α−1)/α}`, touching at
/// `t = (δ α e^{−ρ(α−1)/α})^{α/(α−1)}` (stored in `aux.t`). When `t ≥ 1` the
/// touching point is off the curve's domain; the value is still returned
/// and flagged with `aux.t_out_of_range = 1`.
pub fn rdp_to_dp_refined(alpha: f64, rho: f64, delta: f64) -> Result<ConversionResult> {
    check_rdp_args(alpha, rho, delta)?;
    let a1 = alpha - 1.0;
    let eps = rho + (a1 / alpha).ln() - (delta.ln() + alpha.ln()) / a1;
    let t = (delta * alpha * (-rho * a1 / alpha).exp()).powf(alpha / a1);
    let mut out = ConversionResult::new(Method::Refined, eps, delta).with("t", t);
    if eps < 0.0 {
        out.notes
            .push("ε < 0: the formula is slack here and (0, δ)-DP already holds".into());
    }
    if !(t > 0.0 && t < 1.0) {
        out = out.with("t_out_of_range", 1.0);
        out.notes.push(format!(
            "tangent point t = {t} lies outside (0, 1); validity rests on region containment"
        ));
    }
    Ok(out)
}

/// Lower boundary of the Rényi region at `x`, by bisection on
/// `G(x, y) = e^{ρ(α−1)}` over `y ∈ [0, 1−x]`.
fn renyi_boundary_y(alpha: f64, target: f64, x: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0 - x);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if renyi_region_lhs(alpha, x, mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `−dy/dx` along the boundary, from the implicit-function theorem.
fn renyi_boundary_neg_slope(alpha: f64, x: f64, y: f64) -> f64 {
    let a1 = alpha - 1.0;
    let gx = alpha * x.powf(a1) * (1.0 - y).powf(-a1) - alpha * (1.0 - x).powf(a1) * y.powf(-a1);
    let gy = a1 * x.powf(alpha) * (1.0 - y).powf(-alpha) - a1 * (1.0 - x).powf(alpha) * y.powf(-alpha);
    gx / gy
}

struct Tangent {
    x: f64,
    y: f64,
    eps: f64,
    delta: f64,
}

fn renyi_tangent_at(alpha: f64, target: f64, x: f64) -> Tangent {
    let y = renyi_boundary_y(alpha, target, x);
    let eps = -renyi_boundary_neg_slope(alpha, x, y).ln();
    Tangent {
        x,
        y,
        eps,
        delta: 1.0 - x - eps.exp() * y,
    }
}

/// Largest value of `1 − x − e^ε y(x)` over the boundary, by golden-section
/// search (the function is concave since the boundary is convex).
fn renyi_support_delta(alpha: f64, target: f64, eps: f64, hint: f64) -> f64 {
    let h = |x: f64| 1.0 - x - eps.exp() * renyi_boundary_y(alpha, target, x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..120 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
        }
    }
    fc.max(fd).max(h(hint)).max(h(0.0))
}

/// Numeric tangent of the true Rényi boundary.
///
/// The tangency abscissa `x_t` is searched by bisection: moving `x_t` right
/// flattens the tangent (larger ε) and lowers its intercept δ. The search
/// keeps the side whose δ does not exceed the request, then confirms the
/// line supports the whole boundary.
pub fn rdp_to_dp_tangent(alpha: f64, rho: f64, delta: f64) -> Result<ConversionResult> {
    check_rdp_args(alpha, rho, delta)?;
    if rho == 0.0 {
        let mut out = ConversionResult::new(Method::TangentNumeric, 0.0, delta);
        out.notes
            .push("ρ = 0 forces identical distributions: (0, δ)-DP for every δ".into());
        return Ok(out);
    }
    let target = (rho * (alpha - 1.0)).exp();

    // Tangents are usable from the point where the slope is −1 (ε = 0), or
    // from x = 0 when the boundary is nowhere that steep.
    let mut x0 = 0.0;
    if !(renyi_tangent_at(alpha, target, 0.0).eps >= 0.0) {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let t = renyi_tangent_at(alpha, target, mid);
            if t.eps.is_nan() || t.eps < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x0 = hi;
    }
    let pivot = renyi_tangent_at(alpha, target, x0);
    let tangent = if pivot.delta <= delta {
        // rotate the supporting line about the pivot point, down to ε = 0
        let eps = ((1.0 - pivot.x - delta) / pivot.y).ln().max(0.0);
        Tangent {
            eps,
            delta: 1.0 - pivot.x - eps.exp() * pivot.y,
            ..pivot
        }
    } else {
        let (mut lo, mut hi) = (x0, 1.0f64);
        let mut best: Option<Tangent> = None;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let t = renyi_tangent_at(alpha, target, mid);
            if !t.eps.is_finite() || t.delta.is_nan() {
                hi = mid;
                continue;
            }
            if t.delta <= delta {
                hi = mid;
                best = Some(t);
            } else {
                lo = mid;
            }
        }
        best.ok_or_else(|| {
            Error::Numeric(format!(
                "tangent search found no point with δ ≤ {delta} (α = {alpha}, ρ = {rho})"
            ))
        })?
    };

    let support = renyi_support_delta(alpha, target, tangent.eps, tangent.x);
    if support > delta + 1e-8 {
        return Err(Error::Numeric(format!(
            "tangent at x = {} with ε = {} does not support the boundary: sup = {support}, δ = {delta}",
            tangent.x, tangent.eps
        )));
    }
    Ok(
        ConversionResult::new(Method::TangentNumeric, tangent.eps, delta)
            .with("t", tangent.x)
            .with("t_y", tangent.y)
            .with("tangent_delta", tangent.delta)
            .with("support_delta", support),
    )
}

/// Dispatches to one of the Rényi conversion laws.
pub fn rdp_to_dp(method: Method, alpha: f64, rho: f64, delta: f64) -> Result<ConversionResult> {
    match method {
        Method::Mironov => rdp_to_dp_mironov(alpha, rho, delta),
        Method::Refined => rdp_to_dp_refined(alpha, rho, delta),
        Method::TangentNumeric => rdp_to_dp_tangent(alpha, rho, delta),
        Method::Hellinger => Err(domain("the hellinger law converts Hellinger bounds, not Rényi")),
    }
}

/// `δ(ε, ρ) = 1 − t − f(t)/g(t)` for a Hellinger bound `ρ`.
///
/// `f` is the lower boundary of the Hellinger region and `t` the point where
/// its slope equals `−e^{−ε}`:
///
/// ```text
/// z = (1 + e^{−ε} − 2(1−ρ)²) / ((1−ρ)√(ρ(2−ρ)))
/// t = (z² + 4 − z√(z²+4)) / (2(z² + 4))
/// ```
///
/// `g(t) = −f′(t) = e^{−ε}`, the magnitude of the slope.
pub fn hellinger_to_dp(eps: f64, rho: f64) -> Result<ConversionResult> {
    if !(eps >= 0.0) || eps.is_infinite() {
        return Err(domain(format!("ε = {eps} must be finite and non-negative")));
    }
    if rho == 0.0 {
        return Err(domain(
            "ρ = 0 means the distributions are equal, which is (ε, 0)-DP for every ε",
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(domain(format!("ρ = {rho} must lie in (0, 1)")));
    }
    let c = (1.0 - rho) * (1.0 - rho);
    let s = (1.0 - rho) * (rho * (2.0 - rho)).sqrt();
    let z = (1.0 + (-eps).exp() - 2.0 * c) / s;
    let z2 = z * z + 4.0;
    let t = (z2 - z * z2.sqrt()) / (2.0 * z2);
    let f = hellinger_lower_boundary(rho, t);
    let g = -hellinger_slope(rho, t);
    let delta = 1.0 - t - f / g;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Numeric(format!(
            "Hellinger conversion produced δ = {delta} outside (0, 1)"
        )));
    }
    Ok(ConversionResult::new(Method::Hellinger, eps, delta)
        .with("t", t)
        .with("z", z)
        .with("f", f)
        .with("g", g))
}

/// `f′(x)` for the Hellinger lower boundary.
pub fn hellinger_slope(rho: f64, x: f64) -> f64 {
    let c = (1.0 - rho) * (1.0 - rho);
    let s = (1.0 - rho) * (rho * (2.0 - rho)).sqrt();
    1.0 - 2.0 * c - s * (1.0 - 2.0 * x) / (x * (1.0 - x)).sqrt()
}

/// Smallest value of `f(x) − (1 − x − δ)e^{−ε}` over a uniform grid on
/// `[0, (1−ρ)²]`: how far the DP line stays below the Hellinger boundary.
/// Zero at an exact tangency.
pub fn hellinger_tangency_residual(eps: f64, rho: f64, delta: f64, n: usize) -> f64 {
    let x_max = (1.0 - rho) * (1.0 - rho);
    let scale = (-eps).exp();
    (0..=n)
        .map(|i| {
            let x = x_max * i as f64 / n as f64;
            hellinger_lower_boundary(rho, x) - (1.0 - x - delta) * scale
        })
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of a randomized attempt to falsify a conversion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Falsification {
    /// True when some sampled pair satisfies the premise and breaks the
    /// conclusion.
    pub falsified: bool,
    pub seed: u64,
    /// Pairs drawn, including rejected ones.
    pub draws: u64,
    /// Pairs that satisfied `Δ ≤ ρ`.
    pub accepted: u64,
    /// Largest `Δ^ε` seen among accepted pairs.
    pub max_eps_divergence: f64,
    /// First violating pair, as probability vectors.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub witness_divergence: Option<f64>,
}

/// Samples pairs with `Δ(μ₁‖μ₂) ≤ ρ` and tests `Δ^ε(μ₁‖μ₂) ≤ δ` on each,
/// stopping at the first violation. Draws stop after `trials` accepted pairs
/// or `100·trials` draws; a run that accepts nothing is a sampling error.
pub fn divergence_to_dp_check(
    spec: &DivergenceSpec,
    rho: f64,
    eps: f64,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<Falsification> {
    if trials == 0 {
        return Err(domain("trials must be at least 1"));
    }
    let sampler = Sampler::new(seed);
    let mut out = Falsification {
        falsified: false,
        seed,
        draws: 0,
        accepted: 0,
        max_eps_divergence: f64::NEG_INFINITY,
        witness: None,
        witness_divergence: None,
    };
    let max_draws = trials.saturating_mul(100);
    while out.accepted < trials && out.draws < max_draws {
        let (mu1, mu2) = sampler.pair(out.draws);
        out.draws += 1;
        if !(spec.eval(&mu1, &mu2)? <= rho) {
            continue;
        }
        out.accepted += 1;
        let value = eps_divergence_probs(eps, mu1.probs(), mu2.probs());
        out.max_eps_divergence = out.max_eps_divergence.max(value);
        if value > delta + EPS_COMPARE {
            out.falsified = true;
            out.witness = Some((mu1.probs().to_vec(), mu2.probs().to_vec()));
            out.witness_divergence = Some(value);
            break;
        }
    }
    if out.accepted == 0 {
        return Err(Error::Sampling(format!(
            "no pair with {spec} ≤ {rho} in {} draws",
            out.draws
        )));
    }
    Ok(out)
}
