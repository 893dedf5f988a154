//! The planner's max-min problem: maximize the worst individual's weighted
//! log isolation/distance term, subject to a deviation cap, a minimum
//! pairwise distance, and `omega` in `[0, 1]`.
//!
//! Also hosts a brute-force grid optimizer for populations of at most three,
//! used to cross-check the game's equilibrium on tiny instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PayoffParams;
use crate::geometry::{
    pairwise_distance, proximity_sets, total_deviation, MobilityTrace, PopulationSnapshot, Position, ProximityRule,
};

pub const DEFAULT_DELTA_MAX: f64 = 500.0;
pub const DEFAULT_D_MIN: f64 = 2.0;
pub const DEFAULT_EVALUATION_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBounds {
    pub delta_max: f64,
    pub d_min: f64,
    /// Check the minimum distance over every pair instead of proximity pairs only.
    pub all_pairs: bool,
}

impl Default for ConstraintBounds {
    fn default() -> Self {
        ConstraintBounds {
            delta_max: DEFAULT_DELTA_MAX,
            d_min: DEFAULT_D_MIN,
            all_pairs: false,
        }
    }
}

impl ConstraintBounds {
    pub fn new(delta_max: f64, d_min: f64) -> Result<Self> {
        if !(delta_max >= 0.0) {
            return Err(Error::param(format!("delta_max must be non-negative, got {delta_max}")));
        }
        if !(d_min > 0.0) {
            return Err(Error::param(format!("d_min must be positive, got {d_min}")));
        }
        Ok(ConstraintBounds {
            delta_max,
            d_min,
            all_pairs: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintId {
    /// Deviation cap.
    MaxDeviation,
    /// Minimum distance between two individuals.
    MinDistance,
    /// Weight outside `[0, 1]`.
    OmegaRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Subject {
    Individual(usize),
    Pair(usize, usize),
    Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: Subject,
    pub constraint: ConstraintId,
    /// How far the constraint is exceeded, always positive.
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, c: ConstraintId) -> usize {
        self.violations.iter().filter(|v| v.constraint == c).count()
    }
}

fn check_population(snapshot: &PopulationSnapshot, traces: &[MobilityTrace]) -> Result<()> {
    if snapshot.len() != traces.len() {
        return Err(Error::param(format!(
            "snapshot has {} individuals but {} traces were given",
            snapshot.len(),
            traces.len()
        )));
    }
    Ok(())
}

/// `omega * log(Z - delta) + (1 - omega) * log(d)`; a term with a zero exponent
/// contributes nothing, whatever its argument.
pub fn individual_term(delta: f64, distance: f64, params: &PayoffParams) -> Result<f64> {
    let omega = params.omega();
    let mut v = 0.0;
    if omega > 0.0 {
        let arg = params.z() - delta;
        if !(arg > 0.0) {
            return Err(Error::domain("Z - delta", arg, "log argument must be positive"));
        }
        v += omega * params.log_base().log(arg);
    }
    if omega < 1.0 {
        if !(distance > 0.0) {
            return Err(Error::domain("d", distance, "log argument must be positive"));
        }
        v += (1.0 - omega) * params.log_base().log(distance);
    }
    Ok(v)
}

/// Per-individual terms of the max-min objective.
pub fn objective_terms(
    snapshot: &PopulationSnapshot,
    traces: &[MobilityTrace],
    params: &PayoffParams,
    rule: ProximityRule,
) -> Result<Vec<f64>> {
    check_population(snapshot, traces)?;
    let sets = proximity_sets(snapshot, rule)?;
    let pos = snapshot.positions();
    traces
        .iter()
        .zip(&sets)
        .enumerate()
        .map(|(i, (tr, set))| {
            let d: f64 = set.iter().map(|&j| pairwise_distance(pos[i], pos[j])).sum();
            individual_term(total_deviation(tr), d, params)
        })
        .collect()
}

/// Worst individual term.
pub fn maxmin_objective(
    snapshot: &PopulationSnapshot,
    traces: &[MobilityTrace],
    params: &PayoffParams,
    rule: ProximityRule,
) -> Result<f64> {
    Ok(objective_terms(snapshot, traces, params, rule)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Reports every deviation-cap, minimum-distance, and weight-range violation.
pub fn check_constraints(
    snapshot: &PopulationSnapshot,
    traces: &[MobilityTrace],
    bounds: &ConstraintBounds,
    omega: f64,
    rule: ProximityRule,
) -> Result<FeasibilityReport> {
    check_population(snapshot, traces)?;
    let mut violations = Vec::new();
    for (i, tr) in traces.iter().enumerate() {
        let delta = total_deviation(tr);
        if delta > bounds.delta_max {
            violations.push(Violation {
                subject: Subject::Individual(i),
                constraint: ConstraintId::MaxDeviation,
                amount: delta - bounds.delta_max,
            });
        }
    }

    let pos = snapshot.positions();
    let n = pos.len();
    let mut pairs: Vec<(usize, usize)> = if bounds.all_pairs {
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
    } else if n > 1 {
        // a fixed count larger than the population collapses to everyone else
        let rule = match rule {
            ProximityRule::FixedCount(c) => ProximityRule::FixedCount(c.min(n - 1)),
            r => r,
        };
        proximity_sets(snapshot, rule)?
            .into_iter()
            .enumerate()
            .flat_map(|(i, set)| set.into_iter().map(move |j| (i.min(j), i.max(j))))
            .collect()
    } else {
        Vec::new()
    };
    pairs.sort_unstable();
    pairs.dedup();
    for (i, j) in pairs {
        let d = pairwise_distance(pos[i], pos[j]);
        if d < bounds.d_min {
            violations.push(Violation {
                subject: Subject::Pair(i, j),
                constraint: ConstraintId::MinDistance,
                amount: bounds.d_min - d,
            });
        }
    }

    if !(0.0..=1.0).contains(&omega) {
        let amount = if omega < 0.0 { -omega } else { omega - 1.0 };
        violations.push(Violation {
            subject: Subject::Weight,
            constraint: ConstraintId::OmegaRange,
            amount: if amount.is_nan() { f64::INFINITY } else { amount },
        });
    }
    Ok(FeasibilityReport { violations })
}

/// Square grid of `k × k` candidate points spanning `[0, side]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: usize,
    pub side: f64,
}

impl GridSpec {
    pub fn point(&self, idx: usize) -> Position {
        let (ix, iy) = (idx / self.k, idx % self.k);
        let step = if self.k > 1 { self.side / (self.k - 1) as f64 } else { 0.0 };
        Position::new(ix as f64 * step, iy as f64 * step)
    }

    pub fn points(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.k * self.k).map(|i| self.point(i))
    }
}

/// Tiny instance for the exhaustive optimizer. Each individual reaches its
/// candidate point in a single step from home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyInstance {
    pub homes: Vec<Position>,
    pub grid: GridSpec,
    pub params: PayoffParams,
    pub bounds: ConstraintBounds,
    pub rule: ProximityRule,
    pub budget: u128,
}

impl TinyInstance {
    pub fn new(homes: Vec<Position>, grid: GridSpec, params: PayoffParams, bounds: ConstraintBounds) -> Self {
        let rule = ProximityRule::FixedCount(homes.len().saturating_sub(1).max(1));
        TinyInstance {
            homes,
            grid,
            params,
            bounds,
            rule,
            budget: DEFAULT_EVALUATION_BUDGET,
        }
    }

    pub fn evaluations(&self) -> u128 {
        let cells = (self.grid.k as u128).saturating_mul(self.grid.k as u128);
        (0..self.homes.len()).fold(1u128, |acc, _| acc.saturating_mul(cells))
    }

    /// Objective and feasibility of placing individual `i` at `positions[i]`.
    pub fn evaluate(&self, positions: &[Position]) -> Result<(f64, FeasibilityReport)> {
        self.score(positions, Aggregate::MaxMin)
    }

    fn score(&self, positions: &[Position], how: Aggregate) -> Result<(f64, FeasibilityReport)> {
        let traces = self
            .homes
            .iter()
            .zip(positions)
            .map(|(&h, &p)| MobilityTrace::new(h, vec![p]))
            .collect::<Result<Vec<_>>>()?;
        let snapshot = PopulationSnapshot::new(positions.to_vec(), self.homes.clone())?;
        let report = check_constraints(&snapshot, &traces, &self.bounds, self.params.omega(), self.rule)?;
        let value = if self.homes.len() == 1 {
            // no one to keep distance from
            individual_term(total_deviation(&traces[0]), 0.0, &self.params)?
        } else {
            let terms = objective_terms(&snapshot, &traces, &self.params, self.rule)?;
            match how {
                Aggregate::MaxMin => terms.into_iter().fold(f64::INFINITY, f64::min),
                Aggregate::Sum => terms.into_iter().sum(),
            }
        };
        Ok((value, report))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub positions: Vec<Position>,
    pub value: f64,
    /// Deviation of each individual at the optimum.
    pub deltas: Vec<f64>,
    pub evaluated: u128,
}

/// Exhaustive search over grid placements. Configurations that are infeasible
/// or fall outside the log domain are skipped; the first maximum in
/// lexicographic placement order wins.
pub fn brute_force_optimum(tiny: &TinyInstance) -> Result<GridOptimum> {
    search(tiny, Aggregate::MaxMin)
}

/// How per-individual terms combine into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    MaxMin,
    Sum,
}

/// Grid optimum of the summed terms, under the same constraints.
pub fn brute_force_sum_optimum(tiny: &TinyInstance) -> Result<GridOptimum> {
    search(tiny, Aggregate::Sum)
}

/// Side-by-side optima of the max-min and summed objectives on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveComparison {
    pub maxmin: GridOptimum,
    pub sum: GridOptimum,
    /// Max-min value achieved by the sum-optimal placement.
    pub maxmin_at_sum_optimum: f64,
    /// Whether the sum-optimal placement is also max-min optimal.
    pub agree: bool,
}

pub fn compare_objectives(tiny: &TinyInstance) -> Result<ObjectiveComparison> {
    let maxmin = search(tiny, Aggregate::MaxMin)?;
    let sum = search(tiny, Aggregate::Sum)?;
    let (at_sum, _) = tiny.evaluate(&sum.positions)?;
    Ok(ObjectiveComparison {
        agree: at_sum == maxmin.value,
        maxmin_at_sum_optimum: at_sum,
        maxmin,
        sum,
    })
}

fn search(tiny: &TinyInstance, how: Aggregate) -> Result<GridOptimum> {
    let n = tiny.homes.len();
    if n == 0 || n > 3 {
        return Err(Error::param(format!("brute-force optimizer takes 1 to 3 individuals, got {n}")));
    }
    if tiny.grid.k == 0 || !(tiny.grid.side >= 0.0) {
        return Err(Error::param("grid needs k >= 1 and a non-negative side"));
    }
    let total = tiny.evaluations();
    if total > tiny.budget {
        return Err(Error::Capacity {
            what: "grid evaluations",
            requested: total,
            cap: tiny.budget,
        });
    }
    let cells = tiny.grid.k * tiny.grid.k;
    let points: Vec<Position> = tiny.grid.points().collect();
    let mut digits = vec![0usize; n];
    let mut positions = vec![points[0]; n];
    let mut best: Option<(f64, Vec<Position>)> = None;
    loop {
        for (p, &d) in positions.iter_mut().zip(&digits) {
            *p = points[d];
        }
        if let Ok((value, report)) = tiny.score(&positions, how) {
            if report.feasible() && best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, positions.clone()));
            }
        }
        // odometer with the first individual as the most significant digit
        let mut i = n;
        loop {
            if i == 0 {
                let (value, positions) = best.ok_or(Error::Infeasible)?;
                let deltas = positions
                    .iter()
                    .zip(&tiny.homes)
                    .map(|(&p, &h)| pairwise_distance(h, p))
                    .collect();
                return Ok(GridOptimum {
                    positions,
                    value,
                    deltas,
                    evaluated: total,
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < cells {
                break;
            }
            digits[i] = 0;
        }
    }
}
