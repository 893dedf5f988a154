//! Planar mobility geometry: home deviation along a trace and distances
//! between individuals at the end of a period.
//!
//! Coordinates are Cartesian meters. Proximity sets are evaluated once per
//! period from end-of-period positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Position::new(self.x + dx, self.y + dy)
    }
}

/// Euclidean distance between two positions.
pub fn pairwise_distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Home location plus the positions visited at each of the `T` timesteps of a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityTrace {
    home: Position,
    steps: Vec<Position>,
}

impl MobilityTrace {
    pub fn new(home: Position, steps: Vec<Position>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::param("a trace needs at least one timestep"));
        }
        if !home.is_finite() || steps.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("trace positions must be finite"));
        }
        Ok(MobilityTrace { home, steps })
    }

    /// A trace that never leaves home.
    pub fn stationary(home: Position, timesteps: usize) -> Result<Self> {
        Self::new(home, vec![home; timesteps])
    }

    pub fn home(&self) -> Position {
        self.home
    }

    pub fn steps(&self) -> &[Position] {
        &self.steps
    }

    pub fn timesteps(&self) -> usize {
        self.steps.len()
    }

    /// Position at the end of the period.
    pub fn end(&self) -> Position {
        // non-empty by construction
        self.steps[self.steps.len() - 1]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        MobilityTrace {
            home: self.home.translated(dx, dy),
            steps: self.steps.iter().map(|p| p.translated(dx, dy)).collect(),
        }
    }
}

/// Distance moved at timestep `t` (1-based): from home for `t = 1`, from the
/// previous step otherwise.
pub fn step_deviation(trace: &MobilityTrace, t: usize) -> Result<f64> {
    let len = trace.timesteps();
    if t == 0 || t > len {
        return Err(Error::Index { index: t, len });
    }
    let from = if t == 1 { trace.home } else { trace.steps[t - 2] };
    Ok(pairwise_distance(from, trace.steps[t - 1]))
}

/// Path length of the whole trace, starting at home.
pub fn total_deviation(trace: &MobilityTrace) -> f64 {
    std::iter::once(trace.home)
        .chain(trace.steps.iter().copied())
        .zip(trace.steps.iter().copied())
        .map(|(a, b)| pairwise_distance(a, b))
        .sum()
}

/// End-of-period positions and home locations of the whole population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSnapshot {
    positions: Vec<Position>,
    homes: Vec<Position>,
}

impl PopulationSnapshot {
    pub fn new(positions: Vec<Position>, homes: Vec<Position>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::param("population must contain at least one individual"));
        }
        if positions.len() != homes.len() {
            return Err(Error::param(format!(
                "{} positions but {} homes",
                positions.len(),
                homes.len()
            )));
        }
        if positions.iter().chain(homes.iter()).any(|p| !p.is_finite()) {
            return Err(Error::param("snapshot positions must be finite"));
        }
        Ok(PopulationSnapshot { positions, homes })
    }

    /// Snapshot taken from the final positions of a set of traces.
    pub fn from_traces(traces: &[MobilityTrace]) -> Result<Self> {
        Self::new(
            traces.iter().map(MobilityTrace::end).collect(),
            traces.iter().map(MobilityTrace::home).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn homes(&self) -> &[Position] {
        &self.homes
    }
}

/// Membership rule for the set of individuals counted in someone's distance aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProximityRule {
    /// The `C` nearest others, ties broken by ascending index.
    FixedCount(usize),
    /// Everyone within the given radius in meters (inclusive).
    Radius(f64),
}

impl Default for ProximityRule {
    fn default() -> Self {
        ProximityRule::FixedCount(10)
    }
}

impl ProximityRule {
    pub fn validate(&self, population: usize) -> Result<()> {
        match *self {
            ProximityRule::FixedCount(0) => Err(Error::param("proximity count must be at least 1")),
            ProximityRule::FixedCount(c) if c + 1 > population => Err(Error::param(format!(
                "proximity count {c} exceeds population size minus one ({})",
                population.saturating_sub(1)
            ))),
            ProximityRule::Radius(r) if !(r > 0.0 && r.is_finite()) => {
                Err(Error::param(format!("proximity radius must be positive, got {r}")))
            }
            _ => Ok(()),
        }
    }
}

/// Indices of the individuals in proximity of `i`, in ascending index order.
pub fn proximity_set(i: usize, snapshot: &PopulationSnapshot, rule: ProximityRule) -> Result<Vec<usize>> {
    let n = snapshot.len();
    if i >= n {
        return Err(Error::Index { index: i, len: n });
    }
    rule.validate(n)?;
    let origin = snapshot.positions[i];
    Ok(select_neighbors(origin, i, snapshot.positions(), rule))
}

/// Linear-scan neighbor selection around `origin`, excluding index `skip`.
pub(crate) fn select_neighbors(origin: Position, skip: usize, points: &[Position], rule: ProximityRule) -> Vec<usize> {
    let mut out = match rule {
        ProximityRule::FixedCount(c) => {
            let mut cand: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(j, &p)| (pairwise_distance(origin, p), j))
                .collect();
            let c = c.min(cand.len());
            if c < cand.len() {
                cand.select_nth_unstable_by(c, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                cand.truncate(c);
            }
            cand.into_iter().map(|(_, j)| j).collect::<Vec<_>>()
        }
        ProximityRule::Radius(r) => points
            .iter()
            .enumerate()
            .filter(|&(j, &p)| j != skip && pairwise_distance(origin, p) <= r)
            .map(|(j, _)| j)
            .collect(),
    };
    out.sort_unstable();
    out
}

/// Proximity sets of every individual, indexed like the snapshot.
pub fn proximity_sets(snapshot: &PopulationSnapshot, rule: ProximityRule) -> Result<Vec<Vec<usize>>> {
    rule.validate(snapshot.len())?;
    let points = snapshot.positions();
    if points.len() < 64 {
        return Ok((0..points.len())
            .map(|i| select_neighbors(points[i], i, points, rule))
            .collect());
    }
    let grid = crate::spatial::GridIndex::new(points, 4.0);
    Ok((0..points.len()).map(|i| grid.neighbors(points[i], i, rule)).collect())
}

/// Sum of distances from individual `i` to each member of `proximity`.
pub fn aggregate_distance(i: usize, snapshot: &PopulationSnapshot, proximity: &[usize]) -> Result<f64> {
    let n = snapshot.len();
    if i >= n {
        return Err(Error::Index { index: i, len: n });
    }
    if proximity.contains(&i) {
        return Err(Error::param(format!("individual {i} is in its own proximity set")));
    }
    if let Some(&j) = proximity.iter().find(|&&j| j >= n) {
        return Err(Error::Index { index: j, len: n });
    }
    let origin = snapshot.positions[i];
    Ok(proximity
        .iter()
        .map(|&j| pairwise_distance(origin, snapshot.positions[j]))
        .sum())
}
