//! Perceived-harm minimization.
//!
//! A minimizer puts at most one individual strictly inside the concave part
//! `(0, l)` and every other positive probability in the convex part `[l, 1]`.
//! With equal priorities the convex-part probabilities are all equal, so the
//! optimum is fixed by a count `k` and a single interior value `delta`; the
//! homogeneous solver enumerates `k` and minimizes over `delta`. With unequal
//! priorities the convex-part probabilities instead share a KKT multiplier
//! `t_j * w'(p_j) = c` and are found by water-filling.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    AllocationProblem, HarmStructure, Method, PoolStructure, SolveResult, Structure,
};
use crate::search::{invert_increasing, scan_min};
use crate::weighting::WeightingParams;

/// Objectives closer than this are ties; the earlier candidate is kept.
pub const TIE_TOL: f64 = 1e-10;
/// Largest population for which the heterogeneous solver tries every at-risk set.
pub const EXHAUSTIVE_MAX_N: usize = 10;

/// Grid density for the homogeneous `delta` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmOptions {
    pub grid_intervals: usize,
}

impl Default for HarmOptions {
    fn default() -> Self {
        Self {
            grid_intervals: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetSearch {
    /// Exhaustive up to [`EXHAUSTIVE_MAX_N`], lowest-priority beyond.
    Auto,
    /// Every at-risk set of every admissible size.
    Exhaustive,
    /// The `k` lowest-priority individuals for each admissible `k`.
    LowestPriority,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterogeneousOptions {
    pub search: SubsetSearch,
    /// Grid density for the scan over the pool level.
    pub grid_intervals: usize,
}

impl Default for HeterogeneousOptions {
    fn default() -> Self {
        Self {
            search: SubsetSearch::Auto,
            grid_intervals: 200,
        }
    }
}

/// Admissible at-risk counts: `r - l <= k <= r / l`, capped at `n`.
pub fn admissible_counts(n: usize, r: f64, ell: f64) -> std::ops::RangeInclusive<usize> {
    let lo = (r - ell - 1e-12).ceil().max(0.0) as usize;
    let hi = ((r / ell + 1e-12).floor() as usize).min(n);
    lo..=hi
}

fn check_sense(problem: &AllocationProblem) -> Result<()> {
    match problem.sense() {
        crate::model::Sense::Harm => Ok(()),
        crate::model::Sense::Benefit => Err(Error::InvalidProblem(
            "harm solver called on a benefit problem".into(),
        )),
    }
}

pub fn solve_harm_homogeneous(problem: &AllocationProblem) -> Result<SolveResult> {
    solve_harm_homogeneous_with(problem, HarmOptions::default())
}

pub fn solve_harm_homogeneous_with(
    problem: &AllocationProblem,
    options: HarmOptions,
) -> Result<SolveResult> {
    check_sense(problem)?;
    if !problem.is_homogeneous() {
        return Err(Error::InvalidProblem(
            "homogeneous solver needs all-equal priorities".into(),
        ));
    }
    let n = problem.n();
    let r = problem.r();
    let w = problem.weighting();
    if r == 0.0 {
        let structure = HarmStructure {
            k: 0,
            delta: 0.0,
            common_p: None,
        };
        return Ok(SolveResult::new(
            problem,
            vec![0.0; n],
            Structure::Harm(structure),
            Method::StructuredSearch,
        ));
    }
    let ell = w.landmarks()?.inflection;

    // (value, k, delta)
    let mut best: Option<(f64, usize, f64)> = None;
    for k in admissible_counts(n, r, ell) {
        let candidate = if k == 0 {
            (r < ell).then(|| (w.value(r), 0, r))
        } else {
            let kf = k as f64;
            let lo = (r - kf).max(0.0);
            let mut hi = ell.min(r - kf * ell);
            if k == n {
                hi = hi.min(0.0);
            }
            if lo > hi + 1e-15 {
                None
            } else {
                let hi = hi.max(lo);
                let g = |delta: f64| w.value(delta) + kf * w.value(((r - delta) / kf).min(1.0));
                let (delta, value) = scan_min(g, lo, hi, options.grid_intervals);
                Some((value, k, delta))
            }
        };
        if let Some(c) = candidate {
            if best.is_none_or(|b| c.0 < b.0 - TIE_TOL) {
                best = Some(c);
            }
        }
    }
    let (_, k, delta) = best.ok_or_else(|| {
        Error::ConvergenceFailure(format!("no admissible harm structure for n = {n}, r = {r}"))
    })?;

    let mut p = Vec::with_capacity(n);
    let common = (k > 0).then(|| ((r - delta) / k as f64).min(1.0));
    if delta > 0.0 {
        p.push(delta);
    }
    if let Some(c) = common {
        p.extend(std::iter::repeat_n(c, k));
    }
    p.resize(n, 0.0);
    let structure = HarmStructure {
        k,
        delta,
        common_p: common,
    };
    Ok(SolveResult::new(
        problem,
        p,
        Structure::Harm(structure),
        Method::StructuredSearch,
    ))
}

/// At-risk pool on the convex branch, parametrized by the level `x` of its
/// lowest-priority member. Every other member `j` sits at
/// `(w')^-1(t_lead * w'(x) / t_j)`, clamped to `[l, 1]`, so the whole pool
/// shares one multiplier and its total is nondecreasing in `x`.
struct Pool<'a> {
    w: &'a WeightingParams,
    ell: f64,
    /// Member priorities, leader (smallest) first.
    t: Vec<f64>,
}

impl<'a> Pool<'a> {
    fn new(w: &'a WeightingParams, ell: f64, mut t: Vec<f64>) -> Self {
        let lead = t
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        t.swap(0, lead);
        Self { w, ell, t }
    }

    fn multiplier(&self, x: f64) -> f64 {
        self.t[0] * self.w.slope(x)
    }

    fn level(&self, member: usize, x: f64, c: f64) -> f64 {
        if member == 0 {
            x
        } else if x >= 1.0 {
            1.0
        } else {
            self.w.inverse_slope_convex(c / self.t[member], self.ell)
        }
    }

    /// `(total probability, sum t_j w(p_j))` at leader level `x`.
    fn evaluate(&self, x: f64) -> (f64, f64) {
        let c = self.multiplier(x);
        let mut total = 0.0;
        let mut cost = 0.0;
        for (m, &t) in self.t.iter().enumerate() {
            let p = self.level(m, x, c);
            total += p;
            cost += t * self.w.value(p);
        }
        (total, cost)
    }

    fn total(&self, x: f64) -> f64 {
        self.evaluate(x).0
    }

    /// Leader level whose pool total first reaches `budget`.
    fn leader_for_budget(&self, budget: f64) -> f64 {
        invert_increasing(|x| self.total(x), budget, self.ell, 1.0, 0.0)
    }

    /// Member levels in the pool's internal (leader-first) order.
    fn levels(&self, x: f64) -> Vec<f64> {
        let c = self.multiplier(x);
        (0..self.t.len()).map(|m| self.level(m, x, c)).collect()
    }
}

/// Minimize `sum t_j w(p_j)` over `p in [l, 1]^k` with `sum p_j = budget`.
///
/// Returns the probabilities in the order of `at_risk`. The multiplier
/// `t_j * w'(p_j)` is common to all members not clamped at `l`.
pub fn kkt_waterfill(
    at_risk: &[usize],
    t: &[f64],
    budget: f64,
    params: &WeightingParams,
) -> Result<Vec<f64>> {
    let ell = params.landmarks()?.inflection;
    kkt_waterfill_with_inflection(at_risk, t, budget, params, ell)
}

pub(crate) fn kkt_waterfill_with_inflection(
    at_risk: &[usize],
    t: &[f64],
    budget: f64,
    params: &WeightingParams,
    ell: f64,
) -> Result<Vec<f64>> {
    let k = at_risk.len() as f64;
    let (lo, hi) = (k * ell, k);
    if !(budget >= lo - 1e-12 && budget <= hi + 1e-12) {
        return Err(Error::BudgetOutOfRange { budget, lo, hi });
    }
    if at_risk.is_empty() {
        return Ok(Vec::new());
    }
    let mut member_t = Vec::with_capacity(at_risk.len());
    for &i in at_risk {
        let value = *t.get(i).ok_or_else(|| {
            Error::InvalidProblem(format!(
                "at-risk index {i} out of range for {} priorities",
                t.len()
            ))
        })?;
        if !(value > 0.0) {
            return Err(Error::NonPositivePriority { index: i, value });
        }
        member_t.push(value);
    }
    let lead = member_t
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let pool = Pool::new(params, ell, member_t);
    let x = pool.leader_for_budget(budget);
    let internal = pool.levels(x);
    // undo the leader swap done in Pool::new
    let mut out = internal;
    out.swap(0, lead);
    Ok(out)
}

pub fn solve_harm_heterogeneous(problem: &AllocationProblem) -> Result<SolveResult> {
    solve_harm_heterogeneous_with(problem, HeterogeneousOptions::default())
}

struct PoolCandidate {
    value: f64,
    at_risk: Vec<usize>,
    interior: Option<usize>,
    leader_level: f64,
}

pub fn solve_harm_heterogeneous_with(
    problem: &AllocationProblem,
    options: HeterogeneousOptions,
) -> Result<SolveResult> {
    check_sense(problem)?;
    let n = problem.n();
    let r = problem.r();
    let w = problem.weighting();
    let t = problem.priorities().as_slice();
    if let Some((index, &value)) = t.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositivePriority { index, value });
    }
    if r == 0.0 {
        let structure = PoolStructure {
            k: 0,
            delta: None,
            delta_index: None,
            at_risk: vec![],
            multiplier: None,
        };
        return Ok(SolveResult::new(
            problem,
            vec![0.0; n],
            Structure::Pool(structure),
            Method::KktWaterfill,
        ));
    }
    let ell = w.landmarks()?.inflection;

    let mut by_priority: Vec<usize> = (0..n).collect();
    by_priority.sort_by(|&a, &b| t[a].total_cmp(&t[b]).then(a.cmp(&b)));

    let exhaustive = match options.search {
        SubsetSearch::Exhaustive => true,
        SubsetSearch::LowestPriority => false,
        SubsetSearch::Auto => n <= EXHAUSTIVE_MAX_N,
    };

    let mut best: Option<PoolCandidate> = None;
    let mut consider = |c: PoolCandidate| {
        if best.as_ref().is_none_or(|b| c.value < b.value - TIE_TOL) {
            best = Some(c);
        }
    };

    for k in admissible_counts(n, r, ell) {
        if k == 0 {
            if r < ell {
                let i = by_priority[0];
                consider(PoolCandidate {
                    value: t[i] * w.value(r),
                    at_risk: vec![],
                    interior: Some(i),
                    leader_level: 0.0,
                });
            }
            continue;
        }
        let sets: Box<dyn Iterator<Item = Vec<usize>>> = if exhaustive {
            Box::new((0..n).combinations(k))
        } else {
            let mut lowest = by_priority[..k].to_vec();
            lowest.sort_unstable();
            Box::new(std::iter::once(lowest))
        };
        for at_risk in sets {
            // For a fixed at-risk set the interior individual is the
            // lowest-priority one outside it: swapping it with any other
            // outsider (who holds 0) can only lower the objective.
            let interior = by_priority.iter().copied().find(|i| !at_risk.contains(i));
            if let Some(c) =
                best_for_family(w, ell, t, r, &at_risk, interior, options.grid_intervals)
            {
                consider(c);
            }
        }
    }

    let best = best.ok_or_else(|| {
        Error::ConvergenceFailure(format!("no admissible harm structure for n = {n}, r = {r}"))
    })?;
    Ok(assemble(problem, ell, best))
}

/// Residuals this close to the lower bound are rounding noise from
/// inverting the pool total.
const DELTA_SNAP: f64 = 1e-13;

fn best_for_family(
    w: &WeightingParams,
    ell: f64,
    t: &[f64],
    r: f64,
    at_risk: &[usize],
    interior: Option<usize>,
    grid_intervals: usize,
) -> Option<PoolCandidate> {
    let k = at_risk.len() as f64;
    let delta_lo = (r - k).max(0.0);
    let delta_hi = match interior {
        Some(_) => ell.min(r - k * ell),
        None => 0.0,
    };
    if delta_lo > delta_hi + 1e-15 {
        return None;
    }
    let delta_hi = delta_hi.max(delta_lo);
    let pool = Pool::new(w, ell, at_risk.iter().map(|&i| t[i]).collect());
    let t_interior = interior.map_or(0.0, |i| t[i]);
    let x_lo = pool.leader_for_budget(r - delta_hi);
    let x_hi = pool.leader_for_budget(r - delta_lo);

    // At `x_hi` the pool holds `r - delta_lo` by construction; elsewhere the
    // interior individual takes whatever is left, so no mass is dropped.
    let objective = |x: f64| {
        let (total, cost) = pool.evaluate(x);
        let delta = if x >= x_hi {
            delta_lo
        } else {
            (r - total).max(delta_lo)
        };
        cost + t_interior * w.value(delta)
    };
    let (x, value) = if interior.is_none() || x_hi <= x_lo {
        (x_hi, objective(x_hi))
    } else {
        scan_min(objective, x_lo, x_hi, grid_intervals)
    };
    Some(PoolCandidate {
        value,
        at_risk: at_risk.to_vec(),
        interior,
        leader_level: x,
    })
}

fn snap_delta(delta: f64, delta_lo: f64) -> f64 {
    if delta < delta_lo + DELTA_SNAP {
        delta_lo
    } else {
        delta
    }
}

fn assemble(problem: &AllocationProblem, ell: f64, c: PoolCandidate) -> SolveResult {
    let n = problem.n();
    let r = problem.r();
    let w = problem.weighting();
    let t = problem.priorities().as_slice();
    let mut p = vec![0.0; n];
    let mut multiplier = None;
    let mut pool_total = 0.0;
    if !c.at_risk.is_empty() {
        let member_t: Vec<f64> = c.at_risk.iter().map(|&i| t[i]).collect();
        let lead = member_t
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let pool = Pool::new(w, ell, member_t);
        let mut levels = pool.levels(c.leader_level);
        levels.swap(0, lead);
        for (&i, &level) in c.at_risk.iter().zip(&levels) {
            p[i] = level;
            pool_total += level;
        }
        let m = pool.multiplier(c.leader_level);
        multiplier = m.is_finite().then_some(m);
    }
    let k = c.at_risk.len();
    let delta_lo = (r - k as f64).max(0.0);
    let mut delta = None;
    let mut delta_index = None;
    if let Some(i) = c.interior {
        let d = if k == 0 {
            r
        } else {
            snap_delta(r - pool_total, delta_lo)
        };
        if d > 0.0 {
            p[i] = d;
            delta = Some(d);
            delta_index = Some(i);
        }
    }
    let structure = PoolStructure {
        k,
        delta,
        delta_index,
        at_risk: c.at_risk,
        multiplier,
    };
    SolveResult::new(problem, p, Structure::Pool(structure), Method::KktWaterfill)
}

/// One row of a `k(r)` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KRow {
    pub r: f64,
    pub k: usize,
    pub delta: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweep {
    pub rows: Vec<KRow>,
    /// Ordinary least-squares slope of `k` against `r`.
    pub slope_fit: f64,
    /// `(alpha * beta)^(1 / (1 - alpha))`.
    pub slope_theory: f64,
    /// False unless `alpha * beta > 1`.
    pub theory_applicable: bool,
    /// `exp((alpha * beta)^(1 / (1 - alpha)))`, the reciprocal of the level
    /// `p` solving `w(p) = p * w'(p)`, where `x * w(r / x)` is stationary in `x`.
    pub slope_stationary: f64,
}

pub fn sweep_k(params: &WeightingParams, n: usize, r_values: &[f64]) -> Result<KSweep> {
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let problem = AllocationProblem::new(n, r, crate::model::Sense::Harm, *params)?;
        let result = solve_harm_homogeneous(&problem)?;
        let (k, delta) = match result.structure {
            Structure::Harm(s) => (s.k, s.delta),
            _ => unreachable!("homogeneous harm solver always reports a harm structure"),
        };
        rows.push(KRow {
            r,
            k,
            delta,
            objective: result.objective,
        });
    }
    let slope_fit = least_squares_slope(
        &rows.iter().map(|row| row.r).collect::<Vec<_>>(),
        &rows.iter().map(|row| row.k as f64).collect::<Vec<_>>(),
    );
    let ab = params.alpha() * params.beta();
    let slope_theory = ab.powf(1.0 / (1.0 - params.alpha()));
    Ok(KSweep {
        rows,
        slope_fit,
        slope_theory,
        theory_applicable: ab > 1.0,
        slope_stationary: slope_theory.exp(),
    })
}

/// Slope of the ordinary least-squares line through `(x, y)`; NaN when `x`
/// has no spread.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// At most one component strictly inside `(tol, l - tol)` and all
/// components at or above `l - tol` equal to within `tol`.
pub fn satisfies_harm_structure(p: &[f64], ell: f64, tol: f64) -> bool {
    let interior = p.iter().filter(|&&v| v > tol && v < ell - tol).count();
    let high: Vec<f64> = p.iter().copied().filter(|&v| v >= ell - tol).collect();
    let spread = high.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - high.iter().copied().fold(f64::INFINITY, f64::min);
    interior <= 1 && (high.is_empty() || spread <= tol + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PriorityProfile, Sense};

    fn prelec(a: f64, b: f64) -> WeightingParams {
        WeightingParams::new(a, b).unwrap()
    }

    fn harm(n: usize, r: f64, a: f64, b: f64) -> AllocationProblem {
        AllocationProblem::new(n, r, Sense::Harm, prelec(a, b)).unwrap()
    }

    #[test]
    fn r_equal_one_splits_in_half() {
        for alpha in [0.3, 0.5, 0.7, 0.9] {
            for n in [2, 3, 7] {
                let res = solve_harm_homogeneous(&harm(n, 1.0, alpha, 1.0)).unwrap();
                let mut expected = vec![0.0; n];
                expected[0] = 0.5;
                expected[1] = 0.5;
                for (a, b) in res.p().iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-6, "alpha {alpha}, n {n}: {:?}", res.p());
                }
                assert_eq!(
                    res.structure,
                    Structure::Harm(HarmStructure {
                        k: 2,
                        delta: 0.0,
                        common_p: Some(0.5)
                    })
                );
            }
        }
    }

    #[test]
    fn zero_budget() {
        let res = solve_harm_homogeneous(&harm(4, 0.0, 0.5, 1.0)).unwrap();
        assert_eq!(res.p(), &[0.0; 4]);
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn full_budget() {
        let res = solve_harm_homogeneous(&harm(3, 3.0, 0.5, 1.0)).unwrap();
        assert_eq!(res.p(), &[1.0; 3]);
        assert_eq!(res.objective, 3.0);
    }

    #[test]
    fn budget_below_inflection_goes_to_one_person() {
        let res = solve_harm_homogeneous(&harm(5, 0.2, 0.5, 1.0)).unwrap();
        assert_eq!(res.p(), &[0.2, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            res.structure,
            Structure::Harm(HarmStructure {
                k: 0,
                delta: 0.2,
                common_p: None
            })
        );
    }

    #[test]
    fn rejects_wrong_sense_and_heterogeneous_input() {
        let benefit = AllocationProblem::new(3, 1.0, Sense::Benefit, prelec(0.5, 1.0)).unwrap();
        assert!(solve_harm_homogeneous(&benefit).is_err());
        let t = PriorityProfile::normalize(&[1.0, 2.0, 3.0]).unwrap();
        let het = harm(3, 1.0, 0.5, 1.0).with_priorities(t).unwrap();
        assert!(solve_harm_homogeneous(&het).is_err());
    }

    #[test]
    fn structure_and_budget_hold_across_grid() {
        for &(a, b) in &[(0.3, 0.5), (0.5, 1.0), (0.7, 1.0), (0.9, 1.2), (0.6, 2.0)] {
            let ell = prelec(a, b).landmarks().unwrap().inflection;
            for r in [0.3, 0.9, 1.4, 2.0, 3.7, 5.5] {
                let res = solve_harm_homogeneous(&harm(8, r, a, b)).unwrap();
                let p = res.p();
                assert!((p.iter().sum::<f64>() - r).abs() < 1e-8);
                assert!(
                    satisfies_harm_structure(p, ell, 1e-9),
                    "({a},{b}) r={r}: {p:?}"
                );
                if let Structure::Harm(s) = res.structure {
                    let rebuilt = s.k as f64 * s.common_p.unwrap_or(0.0) + s.delta;
                    assert!((rebuilt - r).abs() < 1e-8);
                    if s.k > 0 {
                        assert!(r - ell <= s.k as f64 + 1e-12 && s.k as f64 <= r / ell + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn waterfill_equal_priorities_split_evenly() {
        let w = prelec(0.5, 1.0);
        let t = [1.0, 1.0, 1.0];
        let p = kkt_waterfill(&[0, 1, 2], &t, 3.0 * 0.6, &w).unwrap();
        for v in &p {
            assert!((v - 0.6).abs() < 1e-12, "{p:?}");
        }
        let p = kkt_waterfill(&[0, 2], &t, 2.0, &w).unwrap();
        assert_eq!(p, vec![1.0, 1.0]);
    }

    #[test]
    fn waterfill_two_priorities_balances_slopes() {
        let w = prelec(0.5, 1.0);
        let ell = w.landmarks().unwrap().inflection;
        let t = [1.0, 2.0];
        // at 1.2 the high-priority member is held at l
        let p = kkt_waterfill(&[0, 1], &t, 1.2, &w).unwrap();
        assert!((p[1] - ell).abs() < 1e-12, "{p:?}");
        assert!(w.slope(p[0]) <= 2.0 * w.slope(ell));

        let budget = 1.5;
        let p = kkt_waterfill(&[0, 1], &t, budget, &w).unwrap();
        assert!((p[0] + p[1] - budget).abs() < 1e-9);
        assert!(p[1] > ell);
        let lhs = 1.0 * w.slope(p[0]);
        let rhs = 2.0 * w.slope(p[1]);
        assert!((lhs - rhs).abs() <= 1e-4 * lhs, "{lhs} vs {rhs}");

        // independent check: grid search over p_1 in [l, 1]
        let steps = 200_000;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=steps {
            let p1 = ell + (1.0 - ell) * i as f64 / steps as f64;
            let p2 = budget - p1;
            if p2 < ell || p2 > 1.0 {
                continue;
            }
            let v = w.value(p1) + 2.0 * w.value(p2);
            if v < best.0 {
                best = (v, p1);
            }
        }
        assert!(
            (best.1 - p[0]).abs() < 1e-4,
            "grid {} vs waterfill {}",
            best.1,
            p[0]
        );
    }

    #[test]
    fn waterfill_budget_gate() {
        let w = prelec(0.5, 1.0);
        let t = [1.0, 1.0];
        assert!(matches!(
            kkt_waterfill(&[0, 1], &t, 0.5, &w),
            Err(Error::BudgetOutOfRange { .. })
        ));
        assert!(matches!(
            kkt_waterfill(&[0, 1], &t, 2.1, &w),
            Err(Error::BudgetOutOfRange { .. })
        ));
    }

    #[test]
    fn heterogeneous_with_unit_priorities_matches_homogeneous() {
        for &(a, b) in &[(0.5, 1.0), (0.7, 1.0), (0.9, 1.2), (0.5, 0.5)] {
            for r in [0.2, 1.0, 1.6, 2.5] {
                let prob = harm(6, r, a, b);
                let hom = solve_harm_homogeneous(&prob).unwrap();
                let het = solve_harm_heterogeneous(&prob).unwrap();
                assert!(
                    (hom.objective - het.objective).abs() < 1e-8,
                    "({a},{b}) r={r}: {} vs {}",
                    hom.objective,
                    het.objective
                );
            }
        }
    }

    #[test]
    fn lowest_priority_heuristic_agrees_with_exhaustive() {
        let raw = [0.4, 1.9, 0.8, 1.3, 0.6, 1.1, 1.6];
        let t = PriorityProfile::normalize(&raw).unwrap();
        for r in [0.3, 1.1, 1.8, 2.6] {
            let prob = harm(7, r, 0.7, 1.0).with_priorities(t.clone()).unwrap();
            let ex = solve_harm_heterogeneous_with(
                &prob,
                HeterogeneousOptions {
                    search: SubsetSearch::Exhaustive,
                    ..Default::default()
                },
            )
            .unwrap();
            let lp = solve_harm_heterogeneous_with(
                &prob,
                HeterogeneousOptions {
                    search: SubsetSearch::LowestPriority,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((ex.objective - lp.objective).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn sweep_rows_respect_sandwich() {
        let params = prelec(0.7, 1.0);
        let ell = params.landmarks().unwrap().inflection;
        let sweep = sweep_k(&params, 30, &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(sweep.rows[0].k, 0);
        for row in &sweep.rows[1..] {
            let k = row.k as f64;
            assert!(row.r - ell <= k && k <= row.r / ell, "{row:?}");
        }
        assert!(!sweep.theory_applicable);
    }

    #[test]
    fn least_squares_slope_of_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        assert!((least_squares_slope(&x, &y) - 2.0).abs() < 1e-12);
        assert!(least_squares_slope(&[1.0], &[1.0]).is_nan());
    }
}
