//! Privacy regions in the error-rate plane.
//!
//! A point `(x, y)` is a pair (Type I error, Type II error) of a test that
//! rejects on `S`: `x = Pr[μ₁ ∈ S]`, `y = Pr[μ₂ ∉ S]`. A region collects the
//! points compatible with a divergence bound. For a divergence `Δ` at level
//! `ρ` the region is
//!
//! ```text
//! R^Δ(ρ) = { (x, y) : Δ((1−x, x) ‖ (y, 1−y)) ≤ ρ }
//! ```
//!
//! and a pair passes every rejection test iff its 2-cut is at most `ρ`
//! ([`ht_check`]). The named families below have closed forms:
//!
//! | family | membership |
//! |--------|------------|
//! | `Dp(ε, δ)` | `1−x ≤ e^ε y + δ` and `x ≤ e^ε (1−y) + δ` |
//! | `Renyi(α, ρ)` | `x^α (1−y)^{1−α} + (1−x)^α y^{1−α} ≤ e^{ρ(α−1)}` |
//! | `Gauss(δ)` | `y ≥ Φ(Φ⁻¹(1−x) − δ)` and `1−y ≥ Φ(Φ⁻¹(x) − δ)` |
//! | `Hellinger(ρ)` | `1 − √(x(1−y)) − √((1−x)y) ≤ ρ` |
//!
//! Every region is invariant under `(x, y) ↦ (1−x, 1−y)`, which swaps a test
//! with its negation. Gauss and Hellinger regions are in addition invariant
//! under `(x, y) ↦ (y, x)`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dist::{align, Dist};
use crate::divergences::DivergenceSpec;
use crate::enumerate::{check_capacity, for_each_map};
use crate::error::{domain, Result};
use crate::normal::{phi, phi_inv};
use crate::EPS_COMPARE;

/// Slack on the worst violation accepted by [`region_contains_region`].
pub const CONTAINMENT_SLACK: f64 = 1e-8;

/// Default grid resolution for containment checks.
pub const DEFAULT_GRID: usize = 1024;

/// A (Type I, Type II) error pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPoint {
    /// Probability of false alarm, `Pr[μ₁ ∈ S]`.
    pub pfa: f64,
    /// Probability of missed detection, `Pr[μ₂ ∉ S]`.
    pub pmd: f64,
}

impl ErrorPoint {
    pub fn new(pfa: f64, pmd: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pfa) || !(0.0..=1.0).contains(&pmd) {
            return Err(domain(format!("error rates ({pfa}, {pmd}) outside [0, 1]")));
        }
        Ok(ErrorPoint { pfa, pmd })
    }

    /// The point of the negated test, `(1−x, 1−y)`.
    pub fn negated(self) -> ErrorPoint {
        ErrorPoint {
            pfa: 1.0 - self.pfa,
            pmd: 1.0 - self.pmd,
        }
    }

    /// The point with the two error rates exchanged.
    pub fn swapped(self) -> ErrorPoint {
        ErrorPoint {
            pfa: self.pmd,
            pmd: self.pfa,
        }
    }

    /// True when `x + y ≥ 1`: no better than a coin flip, never binding.
    pub fn is_trivial(self) -> bool {
        self.pfa + self.pmd >= 1.0
    }
}

/// A privacy region family with its parameters.
#[derive(Debug, Clone)]
pub enum RegionSpec {
    Dp { eps: f64, delta: f64 },
    Renyi { alpha: f64, rho: f64 },
    Gauss { delta: f64 },
    Hellinger { rho: f64 },
    /// Region of an arbitrary divergence, evaluated on the binary pair.
    Divergence { spec: DivergenceSpec, rho: f64 },
}

impl RegionSpec {
    pub fn dp(eps: f64, delta: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() || !(0.0..=1.0).contains(&delta) {
            return Err(domain(format!("DP region needs ε ≥ 0 and δ ∈ [0,1], got ({eps}, {delta})")));
        }
        Ok(RegionSpec::Dp { eps, delta })
    }

    pub fn renyi(alpha: f64, rho: f64) -> Result<Self> {
        if !(alpha > 1.0) || alpha.is_infinite() || !(rho >= 0.0) {
            return Err(domain(format!("Rényi region needs α > 1 and ρ ≥ 0, got ({alpha}, {rho})")));
        }
        Ok(RegionSpec::Renyi { alpha, rho })
    }

    pub fn gauss(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(domain(format!("Gauss region needs δ ≥ 0, got {delta}")));
        }
        Ok(RegionSpec::Gauss { delta })
    }

    pub fn hellinger(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(domain(format!("Hellinger region needs ρ ∈ [0,1], got {rho}")));
        }
        Ok(RegionSpec::Hellinger { rho })
    }

    /// The region `R^Δ(ρ)` of a divergence, using the closed form when one
    /// exists.
    pub fn for_divergence(spec: &DivergenceSpec, rho: f64) -> RegionSpec {
        match *spec {
            DivergenceSpec::EpsDp { eps } => RegionSpec::Dp { eps, delta: rho },
            DivergenceSpec::Renyi { alpha } => RegionSpec::Renyi { alpha, rho },
            DivergenceSpec::Hellinger => RegionSpec::Hellinger { rho },
            _ => RegionSpec::Divergence {
                spec: spec.clone(),
                rho,
            },
        }
    }

    /// Exact membership test; boundary points are members.
    pub fn contains(&self, point: ErrorPoint) -> bool {
        self.contains_masses(Masses::from(point))
    }

    fn contains_masses(&self, m: Masses) -> bool {
        let Masses { x, xc, y, yc } = m;
        match self {
            RegionSpec::Dp { eps, delta } => {
                let s = eps.exp();
                xc <= s * y + delta && x <= s * yc + delta
            }
            RegionSpec::Renyi { alpha, rho } => {
                renyi_lhs_masses(*alpha, m) <= (rho * (alpha - 1.0)).exp()
            }
            RegionSpec::Gauss { delta } => {
                y >= phi(phi_inv(xc) - delta) && yc >= phi(phi_inv(x) - delta)
            }
            RegionSpec::Hellinger { rho } => hellinger_lhs_masses(m) <= *rho,
            RegionSpec::Divergence { spec, rho } => binary_divergence(spec, m) <= *rho,
        }
    }

    /// Membership up to a violation of `1e-12`, for points computed by
    /// summing probabilities that may sit on the boundary in exact
    /// arithmetic.
    pub fn admits(&self, point: ErrorPoint) -> bool {
        self.admits_masses(Masses::from(point))
    }

    fn admits_masses(&self, m: Masses) -> bool {
        self.contains_masses(m) || self.violation_masses(m) <= EPS_COMPARE
    }

    /// Signed distance-like violation: `≤ 0` inside, `> 0` outside. For
    /// Rényi it is relative, `lhs / e^{ρ(α−1)} − 1`.
    pub fn violation(&self, point: ErrorPoint) -> f64 {
        self.violation_masses(Masses::from(point))
    }

    fn violation_masses(&self, m: Masses) -> f64 {
        let Masses { x, xc, y, yc } = m;
        match self {
            RegionSpec::Dp { eps, delta } => {
                let s = eps.exp();
                (xc - s * y - delta).max(x - s * yc - delta)
            }
            RegionSpec::Renyi { alpha, rho } => {
                renyi_lhs_masses(*alpha, m) / (rho * (alpha - 1.0)).exp() - 1.0
            }
            RegionSpec::Gauss { delta } => {
                (phi(phi_inv(xc) - delta) - y).max(phi(phi_inv(x) - delta) - yc)
            }
            RegionSpec::Hellinger { rho } => hellinger_lhs_masses(m) - rho,
            RegionSpec::Divergence { spec, rho } => binary_divergence(spec, m) - rho,
        }
    }

    /// Tabulates `n` points of the lower boundary on a uniform x-grid over
    /// the feasible range. DP, Gauss and Hellinger use closed forms; the
    /// others bisect on `y` for the smaller root.
    pub fn boundary(&self, n: usize) -> Result<Vec<ErrorPoint>> {
        if n < 2 {
            return Err(domain("boundary needs at least 2 points"));
        }
        let x_max = match self {
            RegionSpec::Dp { delta, .. } => (1.0 - delta).max(0.0),
            RegionSpec::Hellinger { rho } => (1.0 - rho) * (1.0 - rho),
            _ => 1.0,
        };
        let points = (0..n)
            .filter_map(|i| {
                let x = if i + 1 == n {
                    x_max
                } else {
                    x_max * i as f64 / (n - 1) as f64
                };
                self.lower_boundary_y(x).map(|y| ErrorPoint { pfa: x, pmd: y })
            })
            .collect();
        Ok(points)
    }

    /// The smallest `y` with `(x, y)` in the region, if any.
    pub fn lower_boundary_y(&self, x: f64) -> Option<f64> {
        match self {
            RegionSpec::Dp { eps, delta } => {
                if x >= 1.0 - delta {
                    Some(0.0)
                } else {
                    Some(((1.0 - x - delta) * (-eps).exp()).max(0.0))
                }
            }
            RegionSpec::Gauss { delta } => Some(phi(phi_inv(1.0 - x) - delta)),
            RegionSpec::Hellinger { rho } => Some(hellinger_lower_boundary(*rho, x).max(0.0)),
            _ => bisect_lower_root(x, |y| self.contains(ErrorPoint { pfa: x, pmd: y })),
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Dp { eps, delta } => write!(f, "dp:{eps},{delta}"),
            RegionSpec::Renyi { alpha, rho } => write!(f, "renyi:{alpha},{rho}"),
            RegionSpec::Gauss { delta } => write!(f, "gauss:{delta}"),
            RegionSpec::Hellinger { rho } => write!(f, "hd:{rho}"),
            RegionSpec::Divergence { spec, rho } => write!(f, "{spec}@{rho}"),
        }
    }
}

impl FromStr for RegionSpec {
    type Err = crate::Error;

    /// Parses `dp:ε,δ`, `renyi:α,ρ`, `gauss:δ` or `hd:ρ`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("region {s:?} needs parameters, e.g. dp:0.67,0.05")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| domain(format!("cannot parse region parameter {a:?}")))
            })
            .collect::<Result<_>>()?;
        let arity = |want: usize| -> Result<()> {
            if nums.len() == want {
                Ok(())
            } else {
                Err(domain(format!("{name} region takes {want} parameter(s)")))
            }
        };
        match name.trim() {
            "dp" => {
                arity(2)?;
                RegionSpec::dp(nums[0], nums[1])
            }
            "renyi" => {
                arity(2)?;
                RegionSpec::renyi(nums[0], nums[1])
            }
            "gauss" => {
                arity(1)?;
                RegionSpec::gauss(nums[0])
            }
            "hd" | "hellinger" => {
                arity(1)?;
                RegionSpec::hellinger(nums[0])
            }
            other => Err(domain(format!("unknown region family {other:?}"))),
        }
    }
}

/// `x^α (1−y)^{1−α} + (1−x)^α y^{1−α}`; a term vanishes when its first
/// factor's base is 0 and is `+∞` when only the second base is 0.
pub fn renyi_region_lhs(alpha: f64, x: f64, y: f64) -> f64 {
    renyi_lhs_masses(alpha, Masses::from(ErrorPoint { pfa: x, pmd: y }))
}

fn renyi_lhs_masses(alpha: f64, m: Masses) -> f64 {
    power_term(m.x, m.yc, alpha) + power_term(m.xc, m.y, alpha)
}

fn power_term(a: f64, b: f64, alpha: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a.powf(alpha) * b.powf(1.0 - alpha)
    }
}

pub fn hellinger_region_lhs(x: f64, y: f64) -> f64 {
    hellinger_lhs_masses(Masses::from(ErrorPoint { pfa: x, pmd: y }))
}

fn hellinger_lhs_masses(m: Masses) -> f64 {
    1.0 - (m.x * m.yc).sqrt() - (m.xc * m.y).sqrt()
}

/// Lower branch of the Hellinger boundary,
/// `(1−ρ)²(1−2x) + x − 2(1−ρ)√(ρ(2−ρ)x(1−x))`. Negative past
/// `x = (1−ρ)²`, where the region reaches the axis.
pub fn hellinger_lower_boundary(rho: f64, x: f64) -> f64 {
    let c = (1.0 - rho) * (1.0 - rho);
    c * (1.0 - 2.0 * x) + x - 2.0 * (1.0 - rho) * (rho * (2.0 - rho) * x * (1.0 - x)).sqrt()
}

fn binary_divergence(spec: &DivergenceSpec, m: Masses) -> f64 {
    spec.eval_probs(&[m.xc, m.x], &[m.y, m.yc])
        .unwrap_or(f64::INFINITY)
}

/// Smallest member `y ∈ [0, 1−x]`, assuming membership is monotone on
/// that interval and `(x, 1−x)` is a member.
fn bisect_lower_root(x: f64, inside: impl Fn(f64) -> bool) -> Option<f64> {
    let top = 1.0 - x;
    if !inside(top) {
        return None;
    }
    if inside(0.0) {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, top);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Result of checking one region against another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Containment {
    pub contained: bool,
    /// Largest violation of the outer region over the checked points.
    pub max_violation: f64,
    pub worst: Option<ErrorPoint>,
    pub points_checked: usize,
}

/// Grid check of `inner ⊆ outer`: every tabulated boundary point of
/// `inner`, and its negation, must lie in `outer` up to
/// [`CONTAINMENT_SLACK`].
pub fn region_contains_region(inner: &RegionSpec, outer: &RegionSpec, n: usize) -> Result<Containment> {
    if n < 16 {
        return Err(domain("containment grid needs at least 16 points"));
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut points_checked = 0;
    for p in inner.boundary(n)? {
        for q in [p, p.negated()] {
            let v = outer.violation(q);
            points_checked += 1;
            if v > max_violation || v.is_nan() {
                max_violation = if v.is_nan() { f64::INFINITY } else { v };
                worst = Some(q);
            }
        }
    }
    Ok(Containment {
        contained: max_violation <= CONTAINMENT_SLACK,
        max_violation,
        worst,
        points_checked,
    })
}

/// Outcome of testing every deterministic rejection region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HtCheck {
    pub passed: bool,
    /// Most violating point, present when some test lands outside.
    pub worst: Option<ErrorPoint>,
    pub worst_violation: f64,
    pub points_checked: usize,
}

/// Tests every rejection region `S ⊆ X` against `R^Δ(ρ)`. Passes iff the
/// 2-cut of `spec` on the pair is at most `ρ`.
pub fn ht_check(spec: &DivergenceSpec, rho: f64, mu1: &Dist, mu2: &Dist) -> Result<HtCheck> {
    ht_check_region(&RegionSpec::for_divergence(spec, rho), mu1, mu2, false)
}

/// Tests every rejection region against `region`. With `skip_trivial`,
/// points with `x + y ≥ 1` are not evaluated; their negations cover them.
///
/// Membership is [`RegionSpec::admits`], so tests sitting exactly on the
/// boundary are not rejected for float round-off.
pub fn ht_check_region(
    region: &RegionSpec,
    mu1: &Dist,
    mu2: &Dist,
    skip_trivial: bool,
) -> Result<HtCheck> {
    let (p, q) = align(mu1, mu2)?;
    let mut worst = None;
    let mut worst_violation = f64::NEG_INFINITY;
    let mut points_checked = 0;
    for (point, masses) in rejection_masses(&p, &q)? {
        if skip_trivial && point.is_trivial() {
            continue;
        }
        points_checked += 1;
        if !region.admits_masses(masses) {
            let v = region.violation_masses(masses);
            if worst.is_none() || v > worst_violation {
                worst_violation = v;
                worst = Some(point);
            }
        }
    }
    Ok(HtCheck {
        passed: worst.is_none(),
        worst,
        worst_violation,
        points_checked,
    })
}

/// `(Pr[μ₁ ∈ S], Pr[μ₂ ∉ S])` for every `S ⊆ X`, with `S` read off the
/// 1-digits of the assignment in lexicographic order.
pub(crate) fn rejection_points(p: &[f64], q: &[f64]) -> Result<Vec<ErrorPoint>> {
    Ok(rejection_masses(p, q)?.into_iter().map(|(point, _)| point).collect())
}

/// Both error rates of a test together with their complements, each summed
/// directly so that `1 − x` and `1 − y` keep full relative precision when
/// tiny.
#[derive(Debug, Clone, Copy)]
struct Masses {
    /// `Pr[μ₁ ∈ S]`
    x: f64,
    /// `Pr[μ₁ ∉ S]`
    xc: f64,
    /// `Pr[μ₂ ∉ S]`
    y: f64,
    /// `Pr[μ₂ ∈ S]`
    yc: f64,
}

impl From<ErrorPoint> for Masses {
    fn from(p: ErrorPoint) -> Self {
        Masses {
            x: p.pfa,
            xc: 1.0 - p.pfa,
            y: p.pmd,
            yc: 1.0 - p.pmd,
        }
    }
}

fn rejection_masses(p: &[f64], q: &[f64]) -> Result<Vec<(ErrorPoint, Masses)>> {
    check_capacity(p.len(), 2)?;
    let mut out = Vec::with_capacity(1 << p.len());
    for_each_map(p.len(), 2, |assignment| {
        let mut m = Masses { x: 0.0, xc: 0.0, y: 0.0, yc: 0.0 };
        for ((&a, &pi), &qi) in assignment.iter().zip(p).zip(q) {
            if a == 1 {
                m.x += pi;
                m.yc += qi;
            } else {
                m.xc += pi;
                m.y += qi;
            }
        }
        // total masses are exactly 1 by construction, not by summation
        if m.xc == 0.0 {
            m.x = 1.0;
        }
        if m.x == 0.0 {
            m.xc = 1.0;
        }
        if m.yc == 0.0 {
            m.y = 1.0;
        }
        if m.y == 0.0 {
            m.yc = 1.0;
        }
        let point = ErrorPoint {
            pfa: m.x.min(1.0),
            pmd: m.y.min(1.0),
        };
        out.push((point, m));
    });
    Ok(out)
}

/// Least `δ` such that every deterministic test on the pair lands in
/// `Gauss(δ)`: the max over `S` of `|Φ⁻¹(x) + Φ⁻¹(y)|`.
pub fn gauss_divergence(mu1: &Dist, mu2: &Dist) -> Result<f64> {
    let (p, q) = align(mu1, mu2)?;
    let mut best: f64 = 0.0;
    for point in rejection_points(&p, &q)? {
        best = best.max(gauss_level(point));
    }
    Ok(best)
}

fn gauss_level(point: ErrorPoint) -> f64 {
    let (x, y) = (point.pfa, point.pmd);
    if x + y == 1.0 {
        return 0.0;
    }
    let s = phi_inv(x) + phi_inv(y);
    if s.is_nan() {
        0.0
    } else {
        s.abs()
    }
}
