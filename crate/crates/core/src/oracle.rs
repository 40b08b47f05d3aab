//! Exhaustive grid search over the budget-constrained box.
//!
//! Probabilities are enumerated as integer multiples of `step`, so the
//! budget constraint is checked in exact integer arithmetic and no
//! floating-point drift creeps into the feasible set.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AllocationProblem, Method, Sense, SolveResult, Structure};
use crate::weighting::WeightingParams;

/// A candidate must beat the incumbent by more than this to replace it, so
/// near-ties resolve to the lexicographically first grid point.
const TIE_TOL: f64 = 1e-12;

/// Budgets closer than this to a grid multiple are not reported as snapped.
const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    step: f64,
    max_points: f64,
    units: u32,
}

impl GridSpec {
    pub const DEFAULT_STEP: f64 = 0.02;
    pub const DEFAULT_MAX_POINTS: f64 = 2e7;

    pub fn new(step: f64, max_points: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 0.1) {
            return Err(Error::InvalidGrid(format!("step {step} outside (0, 0.1]")));
        }
        let units = (1.0 / step).round();
        if (units * step - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!("step {step} does not divide 1")));
        }
        if !(max_points >= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "max_points {max_points} must be at least 1"
            )));
        }
        Ok(Self {
            step,
            max_points,
            units: units as u32,
        })
    }

    pub fn with_step(step: f64) -> Result<Self> {
        Self::new(step, Self::DEFAULT_MAX_POINTS)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn max_points(&self) -> f64 {
        self.max_points
    }

    /// Number of grid steps in `[0, 1]`.
    pub fn units(&self) -> u32 {
        self.units
    }

    fn snap(&self, x: f64) -> (u32, Option<f64>) {
        let units = (x / self.step).round().max(0.0);
        let snapped = units * self.step;
        let report = ((snapped - x).abs() > SNAP_TOL).then_some(snapped);
        (units as u32, report)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(Self::DEFAULT_STEP, Self::DEFAULT_MAX_POINTS).expect("default grid is valid")
    }
}

/// Number of sequences in `{0, ..., cap}^parts` summing to `total`.
///
/// Saturates at `f64::MAX`; exact while below 2^53.
pub fn count_compositions(total: u32, parts: usize, cap: u32) -> f64 {
    let total = total as usize;
    let cap = cap as usize;
    let mut ways = vec![0.0f64; total + 1];
    ways[0] = 1.0;
    for _ in 0..parts {
        // sliding window sum over the previous row
        let mut next = vec![0.0f64; total + 1];
        let mut window = 0.0;
        for s in 0..=total {
            window += ways[s];
            if s > cap {
                window -= ways[s - cap - 1];
            }
            next[s] = window;
        }
        ways = next;
    }
    ways[total]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSolution {
    #[serde(flatten)]
    pub result: SolveResult,
    /// Grid points scored.
    pub evaluated: u64,
    /// Budget actually used when `r` is not a multiple of the step.
    pub snapped_budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    Min,
    Max,
}

impl Goal {
    fn beats(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Goal::Min => candidate < incumbent - TIE_TOL,
            Goal::Max => candidate > incumbent + TIE_TOL,
        }
    }
}

/// Depth-first enumeration of unit vectors with a fixed total.
///
/// `table[i][u]` is the score of coordinate `i` at `u` units. Coordinates
/// are visited in order with values ascending, so the incumbent on exit is
/// the lexicographically first optimum.
struct Enumerator<'a> {
    table: &'a [Vec<f64>],
    cap: u32,
    goal: Goal,
    units: Vec<u32>,
    best_units: Vec<u32>,
    best_value: f64,
    evaluated: u64,
}

impl<'a> Enumerator<'a> {
    fn run(
        table: &'a [Vec<f64>],
        cap: u32,
        total: u32,
        goal: Goal,
    ) -> Option<(Vec<u32>, f64, u64)> {
        let m = table.len();
        let mut e = Enumerator {
            table,
            cap,
            goal,
            units: vec![0; m],
            best_units: Vec::new(),
            best_value: match goal {
                Goal::Min => f64::INFINITY,
                Goal::Max => f64::NEG_INFINITY,
            },
            evaluated: 0,
        };
        if m == 0 || total as u64 > m as u64 * cap as u64 {
            return None;
        }
        e.descend(0, total, 0.0);
        (!e.best_units.is_empty()).then_some((e.best_units, e.best_value, e.evaluated))
    }

    fn descend(&mut self, i: usize, remaining: u32, partial: f64) {
        let m = self.table.len();
        if i + 1 == m {
            self.units[i] = remaining;
            let value = partial + self.table[i][remaining as usize];
            self.evaluated += 1;
            if self.best_units.is_empty() || self.goal.beats(value, self.best_value) {
                self.best_value = value;
                self.best_units.clone_from(&self.units);
            }
            return;
        }
        let later = (m - i - 1) as u32 * self.cap;
        let lo = remaining.saturating_sub(later);
        let hi = remaining.min(self.cap);
        for u in lo..=hi {
            self.units[i] = u;
            self.descend(i + 1, remaining - u, partial + self.table[i][u as usize]);
        }
    }
}

fn check_size(total: u32, parts: usize, cap: u32, grid: &GridSpec) -> Result<()> {
    let count = count_compositions(total, parts, cap);
    if count > grid.max_points {
        return Err(Error::TooLarge {
            count,
            cap: grid.max_points,
        });
    }
    Ok(())
}

/// Grid-exhaustive optimum of `sum t_j w(p_j)` subject to `sum p_j = r`.
///
/// Minimizes for harm problems, maximizes for benefit problems. Budgets
/// that are not a multiple of the step are snapped to the nearest one and
/// the snapped value is reported.
pub fn brute_force(problem: &AllocationProblem, grid: &GridSpec) -> Result<OracleSolution> {
    let n = problem.n();
    let cap = grid.units;
    let (total, snapped_budget) = grid.snap(problem.r());
    let total = total.min(n as u32 * cap);
    check_size(total, n, cap, grid)?;

    let w = problem.weighting();
    let table: Vec<Vec<f64>> = problem
        .priorities()
        .as_slice()
        .iter()
        .map(|&t| {
            (0..=cap)
                .map(|u| t * w.value(u as f64 * grid.step))
                .collect()
        })
        .collect();
    let goal = match problem.sense() {
        Sense::Harm => Goal::Min,
        Sense::Benefit => Goal::Max,
    };
    let (units, _, evaluated) = Enumerator::run(&table, cap, total, goal)
        .ok_or_else(|| Error::Infeasible(format!("no grid point sums to r = {}", problem.r())))?;

    let p: Vec<f64> = units.iter().map(|&u| u as f64 * grid.step).collect();
    let problem = match snapped_budget {
        Some(r) => problem.with_budget(r)?,
        None => problem.clone(),
    };
    Ok(OracleSolution {
        result: SolveResult::new(&problem, p, Structure::None, Method::Oracle),
        evaluated,
        snapped_budget,
    })
}

/// Side of the inflection point a lemma is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `[0, l]^m`
    Concave,
    /// `[l, 1]^m`
    Convex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluated: u64,
    pub snapped_budget: Option<f64>,
}

/// Grid optimum of `sum w(x_i)` over one region box with `sum x_i = c`.
///
/// The concave grid is anchored at 0 (`x = u * step`, `x <= l`); the convex
/// grid is anchored at 1 (`x = 1 - u * step`, `x >= l`), so each grid
/// contains the corner of its box that the lemmas single out.
pub fn lemma_oracle(
    region: Region,
    sense: Extremum,
    m: usize,
    c: f64,
    params: &WeightingParams,
    grid: &GridSpec,
) -> Result<LemmaSolution> {
    if m == 0 {
        return Err(Error::InvalidProblem("lemma box needs m >= 1".into()));
    }
    let ell = params.landmarks()?.inflection;
    let mf = m as f64;
    let (lo, hi, inside) = match region {
        Region::Concave => (0.0, mf * ell, c > 0.0 && c <= mf * ell),
        Region::Convex => (mf * ell, mf, c >= mf * ell && c <= mf),
    };
    if !c.is_finite() || !inside {
        return Err(Error::BudgetOutOfRange { budget: c, lo, hi });
    }

    let (cap, to_x): (u32, Box<dyn Fn(u32) -> f64>) = match region {
        Region::Concave => {
            let cap = (ell / grid.step + 1e-9).floor() as u32;
            (cap, Box::new(move |u| u as f64 * grid.step))
        }
        Region::Convex => {
            let cap = ((1.0 - ell) / grid.step + 1e-9).floor() as u32;
            (cap, Box::new(move |u| 1.0 - u as f64 * grid.step))
        }
    };
    let (total, snapped_units) = match region {
        Region::Concave => grid.snap(c),
        Region::Convex => grid.snap(mf - c),
    };
    let snapped_budget = snapped_units.map(|s| match region {
        Region::Concave => s,
        Region::Convex => mf - s,
    });
    check_size(total, m, cap, grid)?;

    let row: Vec<f64> = (0..=cap).map(|u| params.value(to_x(u))).collect();
    let table = vec![row; m];
    let goal = match sense {
        Extremum::Min => Goal::Min,
        Extremum::Max => Goal::Max,
    };
    let (units, value, evaluated) = Enumerator::run(&table, cap, total, goal).ok_or_else(|| {
        Error::Infeasible(format!("no grid point in the {region:?} box sums to {c}"))
    })?;
    Ok(LemmaSolution {
        x: units.into_iter().map(to_x).collect(),
        value,
        evaluated,
        snapped_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PriorityProfile;
    use itertools::Itertools;

    fn prelec(a: f64, b: f64) -> WeightingParams {
        WeightingParams::new(a, b).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::with_step(0.02).is_ok());
        assert!(GridSpec::with_step(0.1).is_ok());
        assert!(matches!(
            GridSpec::with_step(0.0),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            GridSpec::with_step(0.2),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            GridSpec::with_step(0.03),
            Err(Error::InvalidGrid(_))
        ));
        assert_eq!(GridSpec::default().units(), 50);
    }

    #[test]
    fn two_halves_beat_one_certain_harm() {
        let grid = GridSpec::with_step(0.1).unwrap();
        let prob = AllocationProblem::new(2, 1.0, Sense::Harm, prelec(0.5, 1.0)).unwrap();
        let sol = brute_force(&prob, &grid).unwrap();
        assert_eq!(sol.result.p(), &[0.5, 0.5]);
        assert!((sol.result.objective - 0.86988).abs() < 1e-5);
        assert_eq!(sol.result.method, Method::Oracle);
    }

    #[test]
    fn single_individual_takes_the_budget() {
        let prob = AllocationProblem::new(1, 0.44, Sense::Benefit, prelec(0.5, 1.0)).unwrap();
        let sol = brute_force(&prob, &GridSpec::default()).unwrap();
        assert!((sol.result.p()[0] - 0.44).abs() < 1e-12);
        assert_eq!(sol.evaluated, 1);
        assert_eq!(sol.snapped_budget, None);
    }

    #[test]
    fn off_grid_budget_is_snapped() {
        let prob = AllocationProblem::new(2, 0.511, Sense::Harm, prelec(0.5, 1.0)).unwrap();
        let sol = brute_force(&prob, &GridSpec::default()).unwrap();
        let snapped = sol.snapped_budget.unwrap();
        assert!((snapped - 0.52).abs() < 1e-12);
        assert!((sol.result.p().iter().sum::<f64>() - 0.52).abs() < 1e-12);
    }

    #[test]
    fn small_benefit_count_matches_formula() {
        let prob = AllocationProblem::new(4, 1.0, Sense::Benefit, prelec(0.5, 1.0)).unwrap();
        let sol = brute_force(&prob, &GridSpec::default()).unwrap();
        assert_eq!(sol.evaluated, 23_426);
        assert_eq!(count_compositions(50, 4, 50), 23_426.0);
    }

    #[test]
    fn composition_counts_match_direct_enumeration() {
        for parts in 1..=3 {
            for cap in 1..=6u32 {
                for total in 0..=(parts as u32 * cap + 1) {
                    let direct = (0..parts)
                        .map(|_| 0..=cap)
                        .multi_cartesian_product()
                        .filter(|v| v.iter().sum::<u32>() == total)
                        .count();
                    assert_eq!(count_compositions(total, parts, cap), direct as f64);
                }
            }
        }
    }

    #[test]
    fn too_large_is_reported() {
        let grid = GridSpec::new(0.01, 1e5).unwrap();
        let prob = AllocationProblem::new(6, 3.0, Sense::Harm, prelec(0.5, 1.0)).unwrap();
        assert!(matches!(
            brute_force(&prob, &grid),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn oracle_is_optimal_among_rescanned_points() {
        let t = PriorityProfile::normalize(&[0.5, 1.0, 1.5]).unwrap();
        let grid = GridSpec::with_step(0.05).unwrap();
        for sense in [Sense::Harm, Sense::Benefit] {
            let prob = AllocationProblem::new(3, 1.3, sense, prelec(0.6, 0.8))
                .unwrap()
                .with_priorities(t.clone())
                .unwrap();
            let sol = brute_force(&prob, &grid).unwrap();
            let w = prob.weighting();
            for v in (0..3).map(|_| 0..=20u32).multi_cartesian_product() {
                if v.iter().sum::<u32>() != 26 {
                    continue;
                }
                let value: f64 = v
                    .iter()
                    .zip(t.as_slice())
                    .map(|(&u, &ti)| ti * w.value(u as f64 * 0.05))
                    .sum();
                match sense {
                    Sense::Harm => assert!(sol.result.objective <= value + 1e-12),
                    Sense::Benefit => assert!(sol.result.objective >= value - 1e-12),
                }
            }
        }
    }

    #[test]
    fn lemma_examples() {
        let w = prelec(0.5, 1.0);
        let g = GridSpec::with_step(0.01).unwrap();

        let convex = lemma_oracle(Region::Convex, Extremum::Min, 2, 1.2, &w, &g).unwrap();
        assert!(
            convex.x.iter().all(|x| (x - 0.6).abs() < 1e-9),
            "{convex:?}"
        );

        let concave = lemma_oracle(Region::Concave, Extremum::Max, 3, 0.9, &w, &g).unwrap();
        assert!(
            concave.x.iter().all(|x| (x - 0.3).abs() < 1e-9),
            "{concave:?}"
        );

        let corner = lemma_oracle(Region::Concave, Extremum::Min, 2, 0.3, &w, &g).unwrap();
        assert!(
            (corner.x[0]).abs() < 1e-12 && (corner.x[1] - 0.3).abs() < 1e-9,
            "{corner:?}"
        );
    }

    #[test]
    fn lemma_budget_bounds() {
        let w = prelec(0.5, 1.0);
        let g = GridSpec::default();
        assert!(matches!(
            lemma_oracle(Region::Concave, Extremum::Min, 2, 0.9, &w, &g),
            Err(Error::BudgetOutOfRange { .. })
        ));
        assert!(matches!(
            lemma_oracle(Region::Convex, Extremum::Max, 2, 0.5, &w, &g),
            Err(Error::BudgetOutOfRange { .. })
        ));
        assert!(matches!(
            lemma_oracle(Region::Concave, Extremum::Max, 2, 0.0, &w, &g),
            Err(Error::BudgetOutOfRange { .. })
        ));
    }
}
