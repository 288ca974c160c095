//! Finite distributions, channels and their algebra.
//!
//! A [`Dist`] is a probability vector indexed by opaque string labels. A
//! [`Channel`] is a row-stochastic matrix from one labeled space to another;
//! applying it to a distribution is [`pushforward`], chaining two channels is
//! [`compose`]. A [`DeterministicRule`] is a channel whose rows are point
//! masses, and [`bvn_decompose`] writes any channel as a convex combination
//! of such rules.

use std::collections::HashSet;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{domain, Result};
use crate::{EPS_COMPARE, SUM_TOLERANCE};

/// A probability distribution over a finite, ordered set of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct Dist {
    labels: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDist {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for Dist {
    type Error = crate::Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        Dist::new(raw.labels, raw.probs)
    }
}

impl Dist {
    /// Builds a distribution, rejecting negative entries, duplicate labels
    /// and totals further than 1e-9 from one. No renormalization happens;
    /// entries a rounding error above 1 are stored as 1.
    pub fn new<S: Into<String>>(labels: Vec<S>, probs: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != probs.len() {
            return Err(domain(format!(
                "{} labels but {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if labels.is_empty() {
            return Err(domain("distribution over an empty space"));
        }
        check_distinct(&labels)?;
        check_probability_row(&probs, "distribution")?;
        Ok(Dist {
            labels,
            probs: clamp_unit(probs),
        })
    }

    /// Distribution with labels `"0"`, `"1"`, ... in order.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        Dist::new(index_labels(probs.len()), probs.to_vec())
    }

    /// The point mass at `label` within `space`.
    pub fn dirac<S: AsRef<str>>(label: &str, space: &[S]) -> Result<Self> {
        let labels: Vec<String> = space.iter().map(|s| s.as_ref().to_string()).collect();
        let pos = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| domain(format!("label {label:?} is not in the space")))?;
        let mut probs = vec![0.0; labels.len()];
        probs[pos] = 1.0;
        Dist::new(labels, probs)
    }

    /// Uniform distribution over `labels`.
    pub fn uniform<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let n = labels.len();
        Dist::new(labels, vec![1.0 / n as f64; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `label`, or `None` when the label is not in the space.
    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }

    /// Total mass of the outcomes whose indices are listed.
    pub fn mass_of(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.probs[i]).sum()
    }

    /// Probabilities re-ordered to follow `labels`. Fails unless `labels`
    /// is a permutation of this distribution's labels.
    pub fn probs_in_order(&self, labels: &[String]) -> Result<Vec<f64>> {
        if labels.len() != self.labels.len() {
            return Err(domain("label sets differ in size"));
        }
        if labels == self.labels.as_slice() {
            return Ok(self.probs.clone());
        }
        labels
            .iter()
            .map(|l| {
                self.prob(l)
                    .ok_or_else(|| domain(format!("label {l:?} missing from distribution")))
            })
            .collect()
    }
}

/// Aligns two distributions on the label order of `mu1`.
pub fn align(mu1: &Dist, mu2: &Dist) -> Result<(Vec<f64>, Vec<f64>)> {
    let q = mu2.probs_in_order(mu1.labels())?;
    Ok((mu1.probs.clone(), q))
}

/// A row-stochastic map from `in_labels` to distributions over `out_labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct Channel {
    in_labels: Vec<String>,
    out_labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawChannel {
    in_labels: Vec<String>,
    out_labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<RawChannel> for Channel {
    type Error = crate::Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        Channel::new(raw.in_labels, raw.out_labels, raw.matrix)
    }
}

impl Channel {
    pub fn new<S: Into<String>, T: Into<String>>(
        in_labels: Vec<S>,
        out_labels: Vec<T>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let in_labels: Vec<String> = in_labels.into_iter().map(Into::into).collect();
        let out_labels: Vec<String> = out_labels.into_iter().map(Into::into).collect();
        if in_labels.is_empty() || out_labels.is_empty() {
            return Err(domain("channel with an empty input or output space"));
        }
        check_distinct(&in_labels)?;
        check_distinct(&out_labels)?;
        if matrix.len() != in_labels.len() {
            return Err(domain(format!(
                "{} rows for {} input labels",
                matrix.len(),
                in_labels.len()
            )));
        }
        for (row, label) in matrix.iter().zip(&in_labels) {
            if row.len() != out_labels.len() {
                return Err(domain(format!(
                    "row {label:?} has {} entries for {} output labels",
                    row.len(),
                    out_labels.len()
                )));
            }
            check_probability_row(row, &format!("row {label:?}"))?;
        }
        Ok(Channel {
            in_labels,
            out_labels,
            matrix: matrix.into_iter().map(clamp_unit).collect(),
        })
    }

    /// The identity channel on `labels`.
    pub fn identity<S: Into<String>>(labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Channel::new(labels.clone(), labels, matrix)
    }

    pub fn in_labels(&self) -> &[String] {
        &self.in_labels
    }

    pub fn out_labels(&self) -> &[String] {
        &self.out_labels
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.matrix.iter().all(|row| {
            row.iter().filter(|&&v| v == 1.0).count() == 1
                && row.iter().all(|&v| v == 0.0 || v == 1.0)
        })
    }

    /// The rule this channel represents, when it is deterministic.
    pub fn as_rule(&self) -> Option<DeterministicRule> {
        if !self.is_deterministic() {
            return None;
        }
        let assignment = self
            .matrix
            .iter()
            .map(|row| row.iter().position(|&v| v == 1.0).unwrap())
            .collect();
        Some(DeterministicRule {
            in_labels: self.in_labels.clone(),
            out_labels: self.out_labels.clone(),
            assignment,
        })
    }
}

/// A function from input labels to output labels, stored as one output
/// index per input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicRule {
    in_labels: Vec<String>,
    out_labels: Vec<String>,
    assignment: Vec<usize>,
}

impl DeterministicRule {
    /// Builds a rule from output indices. `assignment[i]` is the index into
    /// `out_labels` that input `i` maps to.
    pub fn from_indices(
        in_labels: Vec<String>,
        out_labels: Vec<String>,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if assignment.len() != in_labels.len() {
            return Err(domain("assignment must cover every input label"));
        }
        if let Some(&bad) = assignment.iter().find(|&&j| j >= out_labels.len()) {
            return Err(domain(format!("output index {bad} out of range")));
        }
        check_distinct(&in_labels)?;
        check_distinct(&out_labels)?;
        Ok(DeterministicRule {
            in_labels,
            out_labels,
            assignment,
        })
    }

    /// Builds a rule from `(input, output)` label pairs.
    pub fn from_pairs<S: AsRef<str>>(
        in_labels: Vec<String>,
        out_labels: Vec<String>,
        pairs: &[(S, S)],
    ) -> Result<Self> {
        let mut assignment = vec![usize::MAX; in_labels.len()];
        for (x, y) in pairs {
            let i = index_of(&in_labels, x.as_ref())?;
            let j = index_of(&out_labels, y.as_ref())?;
            assignment[i] = j;
        }
        if assignment.contains(&usize::MAX) {
            return Err(domain("assignment is not total on the input labels"));
        }
        DeterministicRule::from_indices(in_labels, out_labels, assignment)
    }

    pub fn in_labels(&self) -> &[String] {
        &self.in_labels
    }

    pub fn out_labels(&self) -> &[String] {
        &self.out_labels
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Image of an input label.
    pub fn apply(&self, label: &str) -> Option<&str> {
        let i = self.in_labels.iter().position(|l| l == label)?;
        Some(&self.out_labels[self.assignment[i]])
    }

    pub fn to_channel(&self) -> Channel {
        let m = self.out_labels.len();
        let matrix = self
            .assignment
            .iter()
            .map(|&j| {
                let mut row = vec![0.0; m];
                row[j] = 1.0;
                row
            })
            .collect();
        Channel {
            in_labels: self.in_labels.clone(),
            out_labels: self.out_labels.clone(),
            matrix,
        }
    }

    /// Pushes `probs` (indexed like `in_labels`) through the rule.
    pub(crate) fn push_probs(&self, probs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_labels.len()];
        for (&j, &p) in self.assignment.iter().zip(probs) {
            out[j] += p;
        }
        out
    }

    /// Image of `mu` under the rule.
    pub fn push(&self, mu: &Dist) -> Result<Dist> {
        let probs = mu.probs_in_order(&self.in_labels)?;
        Dist::new(self.out_labels.clone(), self.push_probs(&probs))
    }
}

impl Serialize for DeterministicRule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.in_labels.len()))?;
        for (x, &j) in self.in_labels.iter().zip(&self.assignment) {
            map.serialize_entry(x, &self.out_labels[j])?;
        }
        map.end()
    }
}

/// One weighted term of a [`BvnDecomposition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvnTerm {
    pub weight: f64,
    pub rule: DeterministicRule,
}

/// A channel written as `Σ weight_m · rule_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BvnDecomposition {
    pub terms: Vec<BvnTerm>,
}

impl BvnDecomposition {
    /// Rebuilds the channel matrix from the terms.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let Some(first) = self.terms.first() else {
            return Vec::new();
        };
        let rows = first.rule.in_labels.len();
        let cols = first.rule.out_labels.len();
        let mut m = vec![vec![0.0; cols]; rows];
        for term in &self.terms {
            for (i, &j) in term.rule.assignment.iter().enumerate() {
                m[i][j] += term.weight;
            }
        }
        m
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }
}

/// `γ(μ)`: the distribution over `gamma`'s outputs induced by feeding `mu`
/// through it.
pub fn pushforward(gamma: &Channel, mu: &Dist) -> Result<Dist> {
    let probs = mu.probs_in_order(&gamma.in_labels)?;
    let mut out = vec![0.0; gamma.out_labels.len()];
    for (row, &p) in gamma.matrix.iter().zip(&probs) {
        for (o, &w) in out.iter_mut().zip(row) {
            *o += w * p;
        }
    }
    Dist::new(gamma.out_labels.clone(), out)
}

/// `γ₂ • γ₁`: first apply `gamma1`, then `gamma2`.
pub fn compose(gamma2: &Channel, gamma1: &Channel) -> Result<Channel> {
    if gamma1.out_labels != gamma2.in_labels {
        return Err(domain(
            "outputs of the first channel must match inputs of the second",
        ));
    }
    let matrix = gamma1
        .matrix
        .iter()
        .map(|row| {
            let mut out = vec![0.0; gamma2.out_labels.len()];
            for (&w, row2) in row.iter().zip(&gamma2.matrix) {
                if w == 0.0 {
                    continue;
                }
                for (o, &v) in out.iter_mut().zip(row2) {
                    *o += w * v;
                }
            }
            out
        })
        .collect();
    Channel::new(
        gamma1.in_labels.clone(),
        gamma2.out_labels.clone(),
        matrix,
    )
}

/// Weak Birkhoff-von Neumann decomposition of a channel.
///
/// Each step takes, per row, the largest remaining entry (lowest column on
/// ties), peels off the smallest of those row maxima as the next weight and
/// subtracts it along the chosen entries. At least one entry reaches zero
/// per step, so the loop ends within `|X|·|Y|` steps. It stops once the
/// remaining row mass drops below 1e-12; the last weight absorbs that
/// residual so the weights sum to one.
pub fn bvn_decompose(gamma: &Channel) -> Result<BvnDecomposition> {
    let rows = gamma.in_labels.len();
    let cols = gamma.out_labels.len();
    let max_steps = rows * cols;
    let mut residual_matrix = gamma.matrix.clone();
    let mut remaining = 1.0_f64;
    let mut terms: Vec<BvnTerm> = Vec::new();

    while remaining >= EPS_COMPARE && terms.len() < max_steps {
        let assignment: Vec<usize> = residual_matrix.iter().map(|row| argmax(row)).collect();
        let weight = residual_matrix
            .iter()
            .zip(&assignment)
            .map(|(row, &j)| row[j])
            .fold(f64::INFINITY, f64::min);
        if weight < EPS_COMPARE {
            break;
        }
        for (row, &j) in residual_matrix.iter_mut().zip(&assignment) {
            row[j] -= weight;
        }
        remaining -= weight;
        terms.push(BvnTerm {
            weight,
            rule: DeterministicRule {
                in_labels: gamma.in_labels.clone(),
                out_labels: gamma.out_labels.clone(),
                assignment,
            },
        });
    }

    let Some(last) = terms.len().checked_sub(1) else {
        return Err(domain("channel rows carry no mass"));
    };
    let before_last: f64 = terms[..last].iter().map(|t| t.weight).sum();
    terms[last].weight = 1.0 - before_last;
    Ok(BvnDecomposition { terms })
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

pub(crate) fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn index_of(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| domain(format!("unknown label {label:?}")))
}

fn check_distinct(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(domain(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn clamp_unit(probs: Vec<f64>) -> Vec<f64> {
    probs.into_iter().map(|p| p.min(1.0)).collect()
}

fn check_probability_row(probs: &[f64], what: &str) -> Result<()> {
    let above_one = |p: f64| p > 1.0 + SUM_TOLERANCE;
    if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || above_one(**p)) {
        return Err(domain(format!("{what}: probability {bad} outside [0, 1]")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(domain(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}
