//! Problem and solution records and the perceived-welfare objective.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weighting::WeightingParams;

/// Absolute tolerance on `sum(p) = r`.
pub const BUDGET_TOL: f64 = 1e-8;
/// Tolerance on `sum(t) = n` for a normalized priority profile.
pub const PRIORITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// Minimize perceived welfare.
    Harm,
    /// Maximize perceived welfare.
    Benefit,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Harm => "harm",
            Sense::Benefit => "benefit",
        })
    }
}

impl FromStr for Sense {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "harm" => Ok(Sense::Harm),
            "benefit" => Ok(Sense::Benefit),
            other => Err(format!("unknown sense '{other}', expected harm|benefit")),
        }
    }
}

/// Aggregated priorities `t_j`, scaled so that they sum to `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PriorityProfile(Vec<f64>);

impl PriorityProfile {
    /// The homogeneous profile, all ones.
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    /// Scale strictly positive raw priorities so they sum to `n`.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Infeasible("priority profile is empty".into()));
        }
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NotFinite {
                    name: "priority",
                    value,
                });
            }
            if value <= 0.0 {
                return Err(Error::NonPositivePriority { index, value });
            }
        }
        let first = raw[0];
        if raw.iter().all(|&v| v == first) {
            return Ok(Self::uniform(raw.len()));
        }
        let scale = raw.len() as f64 / raw.iter().sum::<f64>();
        Ok(Self(raw.iter().map(|v| v * scale).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every priority is exactly one.
    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&t| t == 1.0)
    }
}

/// Free-function form of [`PriorityProfile::normalize`].
pub fn normalize_priorities(raw: &[f64]) -> Result<PriorityProfile> {
    PriorityProfile::normalize(raw)
}

/// Allocate `r` units of expected harm or benefit over `n` individuals.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    n: usize,
    r: f64,
    sense: Sense,
    priorities: PriorityProfile,
    weighting: WeightingParams,
}

impl AllocationProblem {
    /// Homogeneous problem (all priorities one).
    pub fn new(n: usize, r: f64, sense: Sense, weighting: WeightingParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::Infeasible(
                "population size must be at least 1".into(),
            ));
        }
        if !r.is_finite() {
            return Err(Error::NotFinite {
                name: "r",
                value: r,
            });
        }
        if r < 0.0 || r > n as f64 {
            return Err(Error::Infeasible(format!(
                "budget r = {r} outside [0, n] = [0, {n}]"
            )));
        }
        Ok(Self {
            n,
            r,
            sense,
            priorities: PriorityProfile::uniform(n),
            weighting,
        })
    }

    pub fn with_priorities(mut self, priorities: PriorityProfile) -> Result<Self> {
        if priorities.len() != self.n {
            return Err(Error::Infeasible(format!(
                "{} priorities given for {} individuals",
                priorities.len(),
                self.n
            )));
        }
        self.priorities = priorities;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn priorities(&self) -> &PriorityProfile {
        &self.priorities
    }

    pub fn weighting(&self) -> &WeightingParams {
        &self.weighting
    }

    pub fn is_homogeneous(&self) -> bool {
        self.priorities.is_uniform()
    }

    /// Same problem with a different budget.
    pub fn with_budget(&self, r: f64) -> Result<Self> {
        let base = Self::new(self.n, r, self.sense, self.weighting)?;
        base.with_priorities(self.priorities.clone())
    }
}

/// Probability vector over the population, stored exactly as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Outcome of [`check_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// `sum(p) - r`.
    pub budget_slack: f64,
    pub budget_ok: bool,
    /// Components outside `[0, 1]` as `(index, value)`.
    pub bound_violations: Vec<(usize, f64)>,
    /// `(expected, actual)` when the vector length differs from `n`.
    pub length_mismatch: Option<(usize, usize)>,
}

impl FeasibilityReport {
    pub fn is_ok(&self) -> bool {
        self.budget_ok && self.bound_violations.is_empty() && self.length_mismatch.is_none()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((expected, actual)) = self.length_mismatch {
            return write!(f, "expected {expected} components, got {actual}");
        }
        let mut parts = Vec::new();
        if !self.budget_ok {
            parts.push(format!("budget slack {:+e}", self.budget_slack));
        }
        for (i, v) in &self.bound_violations {
            parts.push(format!("p[{i}] = {v} outside [0, 1]"));
        }
        if parts.is_empty() {
            f.write_str("ok")
        } else {
            f.write_str(&parts.join("; "))
        }
    }
}

pub fn check_feasible(problem: &AllocationProblem, dist: &Distribution) -> FeasibilityReport {
    let p = dist.as_slice();
    let length_mismatch = (p.len() != problem.n).then_some((problem.n, p.len()));
    let bound_violations = p
        .iter()
        .enumerate()
        .filter(|(_, v)| !(0.0..=1.0).contains(*v))
        .map(|(i, &v)| (i, v))
        .collect();
    let budget_slack = dist.total() - problem.r;
    FeasibilityReport {
        budget_slack,
        budget_ok: budget_slack.abs() <= BUDGET_TOL,
        bound_violations,
        length_mismatch,
    }
}

/// `sum_j t_j * w(p_j)`, rejecting infeasible distributions.
pub fn perceived_welfare(problem: &AllocationProblem, dist: &Distribution) -> Result<f64> {
    let report = check_feasible(problem, dist);
    if !report.is_ok() {
        return Err(Error::InfeasibleDistribution(report.to_string()));
    }
    Ok(welfare(
        &problem.weighting,
        problem.priorities.as_slice(),
        dist.as_slice(),
    ))
}

pub(crate) fn welfare(weighting: &WeightingParams, t: &[f64], p: &[f64]) -> f64 {
    t.iter().zip(p).map(|(&t, &p)| t * weighting.value(p)).sum()
}

/// Homogeneous harm optimum: `delta` (if any), then `k` copies of
/// `common_p`, then zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmStructure {
    pub k: usize,
    /// Interior probability; 0 when nobody sits strictly inside `(0, l)`.
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common_p: Option<f64>,
}

/// Homogeneous benefit optimum: remaining individuals at `common_p`, at most
/// one at `gamma`, `j` at certainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenefitStructure {
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub common_p: Option<f64>,
}

/// Heterogeneous harm optimum: `k` at-risk individuals sharing the KKT
/// multiplier `t_j * w'(p_j) = multiplier`, plus at most one at `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolStructure {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Index of the individual carrying `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_index: Option<usize>,
    pub at_risk: Vec<usize>,
    /// Absent when the pool sits at probability one (infinite slope).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Structure {
    Harm(HarmStructure),
    Benefit(BenefitStructure),
    Pool(PoolStructure),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    StructuredSearch,
    KktWaterfill,
    Multistart,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::StructuredSearch => "structured-search",
            Method::KktWaterfill => "kkt-waterfill",
            Method::Multistart => "multistart",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(rename = "p")]
    pub distribution: Distribution,
    pub objective: f64,
    pub structure: Structure,
    pub method: Method,
}

impl SolveResult {
    /// Wrap a solution, computing its objective from the problem.
    pub(crate) fn new(
        problem: &AllocationProblem,
        p: Vec<f64>,
        structure: Structure,
        method: Method,
    ) -> Self {
        let objective = welfare(&problem.weighting, problem.priorities.as_slice(), &p);
        Self {
            distribution: Distribution::new(p),
            objective,
            structure,
            method,
        }
    }

    pub fn p(&self) -> &[f64] {
        self.distribution.as_slice()
    }
}

/// Serialized problem: `{n, r, sense, alpha, beta, priorities[]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub n: usize,
    pub r: f64,
    pub sense: Sense,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub priorities: Vec<f64>,
}

impl From<&AllocationProblem> for ProblemRecord {
    fn from(problem: &AllocationProblem) -> Self {
        Self {
            n: problem.n,
            r: problem.r,
            sense: problem.sense,
            alpha: problem.weighting.alpha(),
            beta: problem.weighting.beta(),
            priorities: problem.priorities.as_slice().to_vec(),
        }
    }
}

impl TryFrom<ProblemRecord> for AllocationProblem {
    type Error = Error;

    fn try_from(record: ProblemRecord) -> Result<Self> {
        let weighting = WeightingParams::new(record.alpha, record.beta)?;
        let problem = AllocationProblem::new(record.n, record.r, record.sense, weighting)?;
        if record.priorities.is_empty() {
            Ok(problem)
        } else {
            problem.with_priorities(PriorityProfile::normalize(&record.priorities)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prelec(a: f64, b: f64) -> WeightingParams {
        WeightingParams::new(a, b).unwrap()
    }

    fn problem(n: usize, r: f64) -> AllocationProblem {
        AllocationProblem::new(n, r, Sense::Harm, prelec(0.5, 1.0)).unwrap()
    }

    #[test]
    fn welfare_examples() {
        let prob = problem(4, 1.0);
        let v = perceived_welfare(&prob, &Distribution::new(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v, 1.0);

        let v = perceived_welfare(&prob, &Distribution::new(vec![0.5, 0.5, 0.0, 0.0])).unwrap();
        let expected = 2.0 * (-(2f64.ln()).sqrt()).exp();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.86988).abs() < 1e-5);
    }

    #[test]
    fn uniform_distribution_ignores_priorities() {
        let n = 5;
        let r = 1.5;
        let t = PriorityProfile::normalize(&[2.0, 0.5, 0.5, 1.0, 1.0]).unwrap();
        let prob = problem(n, r).with_priorities(t).unwrap();
        let p = Distribution::new(vec![r / n as f64; n]);
        let v = perceived_welfare(&prob, &p).unwrap();
        let expected = n as f64 * prob.weighting().value(r / n as f64);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn feasibility_reports() {
        let prob = problem(3, 1.0);
        assert!(check_feasible(&prob, &Distribution::new(vec![0.5, 0.5, 0.0])).is_ok());

        let rep = check_feasible(&prob, &Distribution::new(vec![0.6, 0.6, 0.0]));
        assert!(!rep.budget_ok);
        assert!((rep.budget_slack - 0.2).abs() < 1e-12);
        assert!(rep.bound_violations.is_empty());

        let rep = check_feasible(&prob, &Distribution::new(vec![1.2, -0.2, 0.0]));
        assert!(rep.budget_ok);
        let idx: Vec<usize> = rep.bound_violations.iter().map(|v| v.0).collect();
        assert_eq!(idx, vec![0, 1]);

        let rep = check_feasible(&prob, &Distribution::new(vec![1.0]));
        assert_eq!(rep.length_mismatch, Some((3, 1)));
        assert!(perceived_welfare(&prob, &Distribution::new(vec![0.6, 0.6, 0.0])).is_err());
    }

    #[test]
    fn degenerate_budgets() {
        let zero = problem(3, 0.0);
        assert!(check_feasible(&zero, &Distribution::new(vec![0.0; 3])).is_ok());
        assert!(!check_feasible(&zero, &Distribution::new(vec![0.1, 0.0, 0.0])).is_ok());
        let full = problem(3, 3.0);
        assert!(check_feasible(&full, &Distribution::new(vec![1.0; 3])).is_ok());
        assert!(!check_feasible(&full, &Distribution::new(vec![1.0, 1.0, 0.9])).is_ok());
    }

    #[test]
    fn normalization() {
        assert_eq!(
            normalize_priorities(&[5.0, 5.0, 5.0]).unwrap().as_slice(),
            &[1.0, 1.0, 1.0]
        );
        assert_eq!(
            normalize_priorities(&[1.0, 3.0]).unwrap().as_slice(),
            &[0.5, 1.5]
        );
        assert!(matches!(
            normalize_priorities(&[1.0, 0.0, 2.0]),
            Err(Error::NonPositivePriority { index: 1, .. })
        ));
        let t = normalize_priorities(&[0.3, 1.7, 2.2, 0.9]).unwrap();
        assert!((t.as_slice().iter().sum::<f64>() - 4.0).abs() < PRIORITY_SUM_TOL);
    }

    #[test]
    fn problem_bounds() {
        assert!(matches!(
            AllocationProblem::new(3, 5.0, Sense::Harm, prelec(0.5, 1.0)),
            Err(Error::Infeasible(_))
        ));
        assert!(AllocationProblem::new(3, -0.1, Sense::Harm, prelec(0.5, 1.0)).is_err());
        assert!(AllocationProblem::new(0, 0.0, Sense::Harm, prelec(0.5, 1.0)).is_err());
        let bad = problem(3, 1.0).with_priorities(PriorityProfile::uniform(2));
        assert!(bad.is_err());
    }

    #[test]
    fn problem_record_round_trip() {
        let t = PriorityProfile::normalize(&[1.0, 2.0, 3.0]).unwrap();
        let prob = AllocationProblem::new(3, 1.2, Sense::Benefit, prelec(0.7, 0.9))
            .unwrap()
            .with_priorities(t)
            .unwrap();
        let json = serde_json::to_string(&ProblemRecord::from(&prob)).unwrap();
        let back: ProblemRecord = serde_json::from_str(&json).unwrap();
        let back = AllocationProblem::try_from(back).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.sense(), Sense::Benefit);
        for (a, b) in back
            .priorities()
            .as_slice()
            .iter()
            .zip(prob.priorities().as_slice())
        {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
