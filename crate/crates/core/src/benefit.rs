//! Perceived-benefit maximization.
//!
//! A maximizer puts at most one individual strictly inside the convex part
//! `(l, 1)` and spreads everything at or below `l` evenly. The homogeneous
//! solver therefore enumerates the number `j` of certain recipients, with
//! and without one individual at `gamma`, and maximizes over `gamma`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AllocationProblem, BenefitStructure, Method, Sense, SolveResult, Structure};
use crate::search::scan_max;
use crate::weighting::WeightingParams;

pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenefitOptions {
    /// Grid density for the `gamma` scan.
    pub grid_intervals: usize,
}

impl Default for BenefitOptions {
    fn default() -> Self {
        Self {
            grid_intervals: 1000,
        }
    }
}

fn check_sense(problem: &AllocationProblem) -> Result<()> {
    match problem.sense() {
        Sense::Benefit => Ok(()),
        Sense::Harm => Err(Error::InvalidProblem(
            "benefit solver called on a harm problem".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    j: usize,
    gamma: Option<f64>,
}

pub fn solve_benefit_homogeneous(problem: &AllocationProblem) -> Result<SolveResult> {
    solve_benefit_homogeneous_with(problem, BenefitOptions::default())
}

pub fn solve_benefit_homogeneous_with(
    problem: &AllocationProblem,
    options: BenefitOptions,
) -> Result<SolveResult> {
    check_sense(problem)?;
    if !problem.is_homogeneous() {
        return Err(Error::InvalidProblem(
            "homogeneous solver needs all-equal priorities".into(),
        ));
    }
    let ell = problem.weighting().landmarks()?.inflection;
    let best = best_structure(problem.weighting(), problem.n(), problem.r(), ell, options)?;
    Ok(assemble(problem, best))
}

fn best_structure(
    w: &WeightingParams,
    n: usize,
    r: f64,
    ell: f64,
    options: BenefitOptions,
) -> Result<Candidate> {
    let mut best: Option<Candidate> = None;
    let mut consider = |c: Candidate| {
        if best.is_none_or(|b| c.value > b.value + TIE_TOL) {
            best = Some(c);
        }
    };
    let j_max = ((r + 1e-12).floor() as usize).min(n);
    for j in 0..=j_max {
        let rest = (r - j as f64).max(0.0);
        let others = n - j;
        // everyone else at one common level
        if others == 0 {
            if rest <= 1e-12 {
                consider(Candidate {
                    value: j as f64,
                    j,
                    gamma: None,
                });
            }
        } else {
            let level = rest / others as f64;
            if level <= ell {
                consider(Candidate {
                    value: j as f64 + others as f64 * w.value(level),
                    j,
                    gamma: None,
                });
            }
        }
        // one individual at gamma in (l, 1), the rest at a common level <= l
        if others >= 1 {
            let m = others - 1;
            if m == 0 {
                if rest >= ell && rest < 1.0 {
                    consider(Candidate {
                        value: j as f64 + w.value(rest),
                        j,
                        gamma: Some(rest),
                    });
                }
            } else {
                let mf = m as f64;
                let lo = ell.max(rest - mf * ell);
                let hi = rest.min(1.0);
                if lo <= hi {
                    let h = |g: f64| w.value(g) + mf * w.value(((rest - g) / mf).max(0.0));
                    let (gamma, value) = scan_max(h, lo, hi, options.grid_intervals);
                    consider(Candidate {
                        value: j as f64 + value,
                        j,
                        gamma: Some(gamma),
                    });
                }
            }
        }
    }
    let mut best = best.ok_or_else(|| {
        Error::ConvergenceFailure(format!(
            "no admissible benefit structure for n = {n}, r = {r}"
        ))
    })?;
    // gamma pushed to certainty is one more certain recipient
    if let Some(g) = best.gamma {
        if g >= 1.0 - 1e-12 {
            best.j += 1;
            best.gamma = None;
        }
    }
    Ok(best)
}

fn assemble(problem: &AllocationProblem, c: Candidate) -> SolveResult {
    let n = problem.n();
    let r = problem.r();
    let others = n - c.j - usize::from(c.gamma.is_some());
    let rest = (r - c.j as f64 - c.gamma.unwrap_or(0.0)).max(0.0);
    let common = (others > 0).then(|| rest / others as f64);
    let mut p = Vec::with_capacity(n);
    if let Some(level) = common {
        p.extend(std::iter::repeat_n(level, others));
    }
    if let Some(g) = c.gamma {
        p.push(g);
    }
    p.resize(n, 1.0);
    let structure = BenefitStructure {
        j: c.j,
        gamma: c.gamma,
        common_p: common,
    };
    SolveResult::new(
        problem,
        p,
        Structure::Benefit(structure),
        Method::StructuredSearch,
    )
}

/// Options for the multi-start pairwise ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartOptions {
    /// Grid density for each pairwise line search.
    pub pair_grid: usize,
    /// Stop once a full sweep gains less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            pair_grid: 100,
            tolerance: 1e-10,
            max_sweeps: 20_000,
        }
    }
}

pub fn solve_benefit_heterogeneous(problem: &AllocationProblem) -> Result<SolveResult> {
    solve_benefit_heterogeneous_with(problem, MultistartOptions::default())
}

/// Best of several projected pairwise-ascent runs.
///
/// Starts are the uniform vector, the equal-priority optimum and the
/// priority-proportional vector. The result is a local maximizer; the
/// method tag is `multistart` since global optimality is not certified.
pub fn solve_benefit_heterogeneous_with(
    problem: &AllocationProblem,
    options: MultistartOptions,
) -> Result<SolveResult> {
    check_sense(problem)?;
    let n = problem.n();
    let r = problem.r();
    let w = problem.weighting();
    let t = problem.priorities().as_slice();
    if let Some((index, &value)) = t.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositivePriority { index, value });
    }
    if r == 0.0 || r == n as f64 {
        let p = vec![if r == 0.0 { 0.0 } else { 1.0 }; n];
        return Ok(SolveResult::new(
            problem,
            p,
            Structure::None,
            Method::Multistart,
        ));
    }
    let ell = w.landmarks()?.inflection;

    let uniform = vec![r / n as f64; n];
    let homogeneous = {
        let c = best_structure(w, n, r, ell, BenefitOptions::default())?;
        let flat = AllocationProblem::new(n, r, Sense::Benefit, *w)?;
        assemble(&flat, c).distribution.into_vec()
    };
    let proportional = capped_proportional(t, r);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in [uniform, homogeneous, proportional] {
        let (value, p) = pairwise_ascent(w, t, start, options);
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, p));
        }
    }
    let (_, p) = best.expect("at least one start");
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::ConvergenceFailure(format!(
            "ascent left individual {i} at {v}; a maximizer gives everyone positive probability"
        )));
    }
    Ok(SolveResult::new(
        problem,
        p,
        Structure::None,
        Method::Multistart,
    ))
}

/// `p_i = min(1, s * t_i)` with `s` chosen so the total is `r`.
fn capped_proportional(t: &[f64], r: f64) -> Vec<f64> {
    let n = t.len();
    let mut p = vec![0.0; n];
    let mut capped = vec![false; n];
    loop {
        let free_t: f64 = (0..n).filter(|&i| !capped[i]).map(|i| t[i]).sum();
        let free_r = r - capped.iter().filter(|&&c| c).count() as f64;
        if free_t <= 0.0 {
            break;
        }
        let scale = free_r / free_t;
        let mut changed = false;
        for i in 0..n {
            if !capped[i] {
                p[i] = scale * t[i];
                if p[i] >= 1.0 {
                    p[i] = 1.0;
                    capped[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    p
}

fn pairwise_ascent(
    w: &WeightingParams,
    t: &[f64],
    mut p: Vec<f64>,
    options: MultistartOptions,
) -> (f64, Vec<f64>) {
    let n = p.len();
    for _ in 0..options.max_sweeps {
        let mut gain = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                let s = p[a] + p[b];
                let lo = (s - 1.0).max(0.0);
                let hi = s.min(1.0);
                if hi - lo < 1e-15 {
                    continue;
                }
                let f = |x: f64| t[a] * w.value(x) + t[b] * w.value((s - x).clamp(0.0, 1.0));
                let current = f(p[a]);
                let (x, value) = scan_max(f, lo, hi, options.pair_grid);
                if value > current {
                    p[a] = x;
                    p[b] = (s - x).clamp(0.0, 1.0);
                    gain += value - current;
                }
            }
        }
        if gain < options.tolerance {
            break;
        }
    }
    (crate::model::welfare(w, t, &p), p)
}

/// Smallest `n` with `1 / (n - 1) < q`, where `w'(q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformityThreshold {
    pub n: usize,
    pub unit_slope: f64,
    /// Always true: the bound is a sufficient condition, not the tight one.
    pub sufficient: bool,
    /// True for `beta != 1`, where the bound is not backed by a proof.
    pub heuristic: bool,
}

pub fn uniformity_threshold(params: &WeightingParams) -> Result<UniformityThreshold> {
    let q = params.landmarks()?.unit_slope;
    let mut n = (1.0 + 1.0 / q).floor() as usize + 1;
    while !(1.0 / (n as f64 - 1.0) < q) {
        n += 1;
    }
    Ok(UniformityThreshold {
        n,
        unit_slope: q,
        sufficient: true,
        heuristic: params.beta() != 1.0,
    })
}

/// Bracketed certainty threshold for one population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertaintyThreshold {
    pub n: usize,
    /// Smallest budget (to within [`CERTAINTY_RESOLUTION`]) whose optimum
    /// gives someone the benefit with certainty.
    pub r_min: f64,
    /// `q * n`; below it nobody is certain.
    pub lower: f64,
    /// `(n - 1) * l + 1`; at or above it somebody is certain.
    pub upper: f64,
}

pub const CERTAINTY_RESOLUTION: f64 = 1e-3;

pub fn min_r_certain(params: &WeightingParams, n: usize) -> Result<CertaintyThreshold> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!(
            "certainty threshold needs n >= 2, got {n}"
        )));
    }
    let lm = params.landmarks()?;
    let lower = lm.unit_slope * n as f64;
    let upper = ((n - 1) as f64 * lm.inflection + 1.0).min(n as f64);
    let certain = |r: f64| -> Result<bool> {
        Ok(best_structure(params, n, r, lm.inflection, BenefitOptions::default())?.j >= 1)
    };
    if certain(lower)? {
        return Ok(CertaintyThreshold {
            n,
            r_min: lower,
            lower,
            upper,
        });
    }
    if !certain(upper)? {
        return Err(Error::ConvergenceFailure(format!(
            "no certain recipient at r = {upper} for n = {n}"
        )));
    }
    let (mut lo, mut hi) = (lower, upper);
    while hi - lo > CERTAINTY_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if certain(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CertaintyThreshold {
        n,
        r_min: hi,
        lower,
        upper,
    })
}

/// At most one component strictly inside `(l + tol, 1 - tol)` and all
/// components at or below `l + tol` equal to within `tol`.
pub fn satisfies_benefit_structure(p: &[f64], ell: f64, tol: f64) -> bool {
    let middle = p
        .iter()
        .filter(|&&v| v > ell + tol && v < 1.0 - tol)
        .count();
    let low: Vec<f64> = p.iter().copied().filter(|&v| v <= ell + tol).collect();
    let spread = low.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - low.iter().copied().fold(f64::INFINITY, f64::min);
    middle <= 1 && (low.is_empty() || spread <= tol + 1e-12)
}

/// Whether an `r = 1` solution is uniform or `(e, ..., e, 1 - (n - 1) e)`.
pub fn is_single_unit_shape(p: &[f64], tol: f64) -> bool {
    let n = p.len();
    if n < 2 {
        return true;
    }
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let eps = sorted[0];
    sorted[..n - 1].iter().all(|v| (v - eps).abs() <= tol)
        && (sorted[n - 1] - (1.0 - (n - 1) as f64 * eps)).abs() <= tol
}
