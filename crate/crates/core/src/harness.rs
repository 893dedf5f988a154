//! Seeded Monte Carlo experiments over random populations and the datasets
//! behind the numerical study (incentive vs. weight, ecdfs, totals,
//! individual means, lockdown horizons).
//!
//! Run `r` of an experiment draws from ChaCha8 stream `r` of the master seed,
//! so results do not depend on how runs are scheduled across threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{individual_payoff, PayoffParams, PlayerState, Strategy, StrategyProfile};
use crate::geometry::{pairwise_distance, proximity_sets, total_deviation, MobilityTrace, PopulationSnapshot, Position, ProximityRule};
use crate::objective::{check_constraints, ConstraintBounds, FeasibilityReport};
use crate::sustainability::{max_lockdown_days, slots_per_day, CollectionRate, Horizon};

/// Movers' deviation is capped at this share of `Z`.
pub const DEVIATION_CLIP: f64 = 0.99;

pub const TABLE_POPULATIONS: [usize; 4] = [500, 1000, 1500, 2000];
pub const ISOLATION_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const TABLE_R0: [f64; 5] = [5.0e23, 5.5e23, 6.0e23, 6.5e23, 7.0e23];
pub const TABLE_R_FRACTIONS: [f64; 5] = [0.10, 0.20, 0.30, 0.40, 0.50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub area_side: f64,
    pub isolation_fraction: f64,
    pub timesteps: usize,
    pub slot_minutes: u32,
    pub params: PayoffParams,
    pub rule: ProximityRule,
    pub bounds: ConstraintBounds,
    pub runs: usize,
    pub seed: u64,
    pub r0: f64,
    pub collection: CollectionRate,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n: 500,
            area_side: 1000.0,
            isolation_fraction: 1.0,
            timesteps: 6,
            slot_minutes: 30,
            params: PayoffParams::default(),
            rule: ProximityRule::default(),
            bounds: ConstraintBounds::default(),
            runs: 50,
            seed: 42,
            r0: 5.0e23,
            collection: CollectionRate::Fraction(0.10),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("population must be at least 1"));
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return Err(Error::param("area side must be positive"));
        }
        if !(0.0..=1.0).contains(&self.isolation_fraction) {
            return Err(Error::param("isolation fraction must lie in [0, 1]"));
        }
        if self.timesteps == 0 {
            return Err(Error::param("timesteps must be at least 1"));
        }
        if self.runs == 0 {
            return Err(Error::param("runs must be at least 1"));
        }
        slots_per_day(self.slot_minutes)?;
        self.rule.validate(self.n)
    }

    /// Individuals assigned to stay home: `ceil(fraction * N)`.
    pub fn home_count(&self) -> usize {
        // absorb rounding such as 0.7 * 10 = 7.000000000000001
        let raw = self.isolation_fraction * self.n as f64;
        ((raw - 1e-9).ceil().max(0.0) as usize).min(self.n)
    }

    pub fn with_population(&self, n: usize, isolation_fraction: f64) -> Self {
        ScenarioConfig {
            n,
            isolation_fraction,
            ..self.clone()
        }
    }
}

/// One generated population.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub snapshot: PopulationSnapshot,
    pub traces: Vec<MobilityTrace>,
    pub strategies: StrategyProfile,
    pub run_index: u64,
}

/// Draws homes, the isolation assignment and movers' traces for one run.
///
/// Homes are uniform over the area; the first `ceil(fraction * N)` indices of
/// a seeded shuffle stay home; everyone else visits `T` uniform random
/// locations. All draws are made regardless of the fraction, so the same seed
/// gives nested assignments across fractions.
pub fn generate_scenario(config: &ScenarioConfig, run_index: u64) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(run_index);
    let side = config.area_side;
    let point = |rng: &mut ChaCha8Rng| Position::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));

    let homes: Vec<Position> = (0..config.n).map(|_| point(&mut rng)).collect();
    let mut order: Vec<usize> = (0..config.n).collect();
    order.shuffle(&mut rng);
    let mut strategies = vec![Strategy::Move; config.n];
    for &i in &order[..config.home_count()] {
        strategies[i] = Strategy::Home;
    }
    let mut traces = Vec::with_capacity(config.n);
    for (i, &home) in homes.iter().enumerate() {
        let steps: Vec<Position> = (0..config.timesteps).map(|_| point(&mut rng)).collect();
        traces.push(match strategies[i] {
            Strategy::Home => MobilityTrace::stationary(home, config.timesteps)?,
            Strategy::Move => MobilityTrace::new(home, steps)?,
        });
    }
    Ok(Scenario {
        snapshot: PopulationSnapshot::from_traces(&traces)?,
        traces,
        strategies: StrategyProfile::new(strategies),
        run_index,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_index: u64,
    pub seed: u64,
    pub payoffs: Vec<f64>,
    pub total: f64,
    pub mean_individual: f64,
    pub movers: usize,
    /// Movers whose deviation was capped below `Z`.
    pub clip_events: usize,
    pub feasibility: FeasibilityReport,
}

/// Payoff inputs for each individual under the strategy they actually played.
pub fn player_states(scenario: &Scenario, params: &PayoffParams, rule: ProximityRule) -> Result<(Vec<PlayerState>, usize)> {
    let sets = proximity_sets(&scenario.snapshot, rule)?;
    let pos = scenario.snapshot.positions();
    let cap = DEVIATION_CLIP * params.z();
    let mut clips = 0;
    let states = sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let d: f64 = set.iter().map(|&j| pairwise_distance(pos[i], pos[j])).sum();
            let delta = match scenario.strategies[i] {
                Strategy::Home => 0.0,
                Strategy::Move => {
                    let raw = total_deviation(&scenario.traces[i]);
                    if raw > cap {
                        clips += 1;
                        cap
                    } else {
                        raw
                    }
                }
            };
            PlayerState::new(delta, d, d)
        })
        .collect();
    Ok((states, clips))
}

/// Deviations, proximity sets, distances and payoffs of one generated population.
pub fn run_once(config: &ScenarioConfig, scenario: &Scenario) -> Result<RunResult> {
    let (states, clip_events) = player_states(scenario, &config.params, config.rule)?;
    let payoffs = states
        .iter()
        .zip(scenario.strategies.iter())
        .map(|(st, &s)| individual_payoff(s, st, &config.params))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = payoffs.iter().sum();
    let feasibility = check_constraints(
        &scenario.snapshot,
        &scenario.traces,
        &config.bounds,
        config.params.omega(),
        config.rule,
    )?;
    Ok(RunResult {
        run_index: scenario.run_index,
        seed: config.seed,
        mean_individual: total / payoffs.len() as f64,
        movers: scenario.strategies.iter().filter(|&&s| s == Strategy::Move).count(),
        payoffs,
        total,
        clip_events,
        feasibility,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    /// Distinct sample values, ascending.
    pub values: Vec<f64>,
    /// Share of samples `<= values[k]`.
    pub probabilities: Vec<f64>,
    pub samples: usize,
}

impl EcdfCurve {
    /// Right-continuous step function.
    pub fn eval(&self, x: f64) -> f64 {
        match self.values.partition_point(|&v| v <= x) {
            0 => 0.0,
            k => self.probabilities[k - 1],
        }
    }
}

pub fn ecdf(samples: &[f64]) -> Result<EcdfCurve> {
    if samples.is_empty() {
        return Err(Error::param("ecdf of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::param("ecdf sample contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut values = Vec::new();
    let mut probabilities = Vec::new();
    for (k, &v) in sorted.iter().enumerate() {
        if sorted.get(k + 1) != Some(&v) {
            values.push(v);
            probabilities.push((k + 1) as f64 / n);
        }
    }
    Ok(EcdfCurve {
        values,
        probabilities,
        samples: sorted.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean_total: f64,
    pub std_error_total: f64,
    pub mean_individual: f64,
    pub std_error_individual: f64,
    pub clip_events: usize,
    pub ecdf: EcdfCurve,
    pub runs: Vec<RunResult>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordered reduction of per-run results.
pub fn aggregate(runs: Vec<RunResult>) -> Result<MonteCarloSummary> {
    if runs.is_empty() {
        return Err(Error::param("no runs to aggregate"));
    }
    let totals: Vec<f64> = runs.iter().map(|r| r.total).collect();
    let indiv: Vec<f64> = runs.iter().map(|r| r.mean_individual).collect();
    let (mean_total, std_error_total) = mean_and_se(&totals);
    let (mean_individual, std_error_individual) = mean_and_se(&indiv);
    Ok(MonteCarloSummary {
        mean_total,
        std_error_total,
        mean_individual,
        std_error_individual,
        clip_events: runs.iter().map(|r| r.clip_events).sum(),
        ecdf: ecdf(&totals)?,
        runs,
    })
}

/// `config.runs` independent runs, executed in parallel and reduced in run order.
pub fn monte_carlo(config: &ScenarioConfig) -> Result<MonteCarloSummary> {
    config.validate()?;
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| generate_scenario(config, r).and_then(|s| run_once(config, &s)))
        .collect::<Result<Vec<_>>>()?;
    aggregate(runs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [FigureId::F2, FigureId::F3, FigureId::F4, FigureId::F5, FigureId::F6, FigureId::F7];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::F2 => "F2",
            FigureId::F3 => "F3",
            FigureId::F4 => "F4",
            FigureId::F5 => "F5",
            FigureId::F6 => "F6",
            FigureId::F7 => "F7",
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches(['F', 'f']);
        FigureId::ALL
            .into_iter()
            .find(|f| &f.name()[1..] == t)
            .ok_or_else(|| Error::param(format!("unknown figure `{s}` (expected one of F2..F7)")))
    }
}

/// Sweep axes for figure reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOptions {
    pub populations: Vec<usize>,
    pub fractions: Vec<f64>,
    /// Populations compared across isolation weights.
    pub weight_populations: Vec<usize>,
    pub omegas: Vec<f64>,
    pub horizon_population: usize,
    pub r0_grid: Vec<f64>,
    pub r_fraction_grid: Vec<f64>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            populations: TABLE_POPULATIONS.to_vec(),
            fractions: ISOLATION_FRACTIONS.to_vec(),
            weight_populations: vec![500, 1000],
            omegas: (0..=10).map(|k| k as f64 / 10.0).collect(),
            horizon_population: 1000,
            r0_grid: TABLE_R0.to_vec(),
            r_fraction_grid: TABLE_R_FRACTIONS.to_vec(),
        }
    }
}

/// Tabular x/y series of one figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureDataset {
    pub id: FigureId,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureDataset {
    fn new(id: FigureId, columns: &[&str]) -> Self {
        FigureDataset {
            id,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Monte Carlo summary for each (population, fraction) cell, in sweep order.
pub fn sweep(base: &ScenarioConfig, populations: &[usize], fractions: &[f64]) -> Result<Vec<(usize, f64, MonteCarloSummary)>> {
    let mut out = Vec::with_capacity(populations.len() * fractions.len());
    for &n in populations {
        for &f in fractions {
            out.push((n, f, monte_carlo(&base.with_population(n, f))?));
        }
    }
    Ok(out)
}

/// Daily incentive from a mean slot incentive.
pub fn daily_from_slot(base: &ScenarioConfig, mean_slot: f64) -> Result<f64> {
    Ok(slots_per_day(base.slot_minutes)? as f64 * mean_slot)
}

fn horizon_row(r0: f64, u_tilde: f64, rate: CollectionRate) -> Result<(f64, f64, f64)> {
    let r_tilde = rate.resolve(u_tilde);
    let h = max_lockdown_days(r0, u_tilde, r_tilde)?;
    let whole = match h {
        Horizon::Finite { whole_days, .. } => whole_days as f64,
        Horizon::Indefinite => f64::INFINITY,
    };
    Ok((r_tilde, h.days(), whole))
}

pub fn reproduce_figure(id: FigureId, base: &ScenarioConfig, opts: &FigureOptions) -> Result<FigureDataset> {
    base.validate()?;
    match id {
        FigureId::F2 => {
            let mut ds = FigureDataset::new(id, &["n", "omega", "home_total", "random_total"]);
            let (a_raw, b_raw) = base.params.raw().unwrap_or((base.params.alpha(), base.params.beta()));
            for &n in &opts.weight_populations {
                for &omega in &opts.omegas {
                    let params = PayoffParams::from_raw(a_raw, b_raw, omega, base.params.z())?
                        .with_log_base(base.params.log_base());
                    let cfg = ScenarioConfig {
                        params,
                        ..base.with_population(n, 1.0)
                    };
                    let home = monte_carlo(&cfg)?.mean_total;
                    let random = monte_carlo(&cfg.with_population(n, 0.0))?.mean_total;
                    ds.rows.push(vec![n as f64, omega, home, random]);
                }
            }
            Ok(ds)
        }
        FigureId::F3 => {
            let mut ds = FigureDataset::new(id, &["n", "isolation_fraction", "total_incentive", "probability"]);
            for (n, f, s) in sweep(base, &opts.populations, &opts.fractions)? {
                for (v, p) in s.ecdf.values.iter().zip(&s.ecdf.probabilities) {
                    ds.rows.push(vec![n as f64, f, *v, *p]);
                }
            }
            Ok(ds)
        }
        FigureId::F4 => {
            let mut ds = FigureDataset::new(id, &["n", "isolation_fraction", "mean_total", "std_error"]);
            for (n, f, s) in sweep(base, &opts.populations, &opts.fractions)? {
                ds.rows.push(vec![n as f64, f, s.mean_total, s.std_error_total]);
            }
            Ok(ds)
        }
        FigureId::F5 => {
            let mut ds = FigureDataset::new(id, &["n", "isolation_fraction", "mean_individual", "std_error"]);
            for (n, f, s) in sweep(base, &opts.populations, &opts.fractions)? {
                ds.rows.push(vec![n as f64, f, s.mean_individual, s.std_error_individual]);
            }
            Ok(ds)
        }
        FigureId::F6 => {
            let mut ds = FigureDataset::new(
                id,
                &["n", "isolation_fraction", "u_tilde", "r_tilde", "max_days", "whole_days"],
            );
            for (n, f, s) in sweep(base, &opts.populations, &opts.fractions)? {
                let u = daily_from_slot(base, s.mean_total)?;
                let (r, days, whole) = horizon_row(base.r0, u, base.collection)?;
                ds.rows.push(vec![n as f64, f, u, r, days, whole]);
            }
            Ok(ds)
        }
        FigureId::F7 => {
            let mut ds = FigureDataset::new(id, &["r0", "r_tilde_fraction", "u_tilde", "r_tilde", "max_days", "whole_days"]);
            let cfg = base.with_population(opts.horizon_population, base.isolation_fraction);
            let u = daily_from_slot(base, monte_carlo(&cfg)?.mean_total)?;
            for &r0 in &opts.r0_grid {
                for &frac in &opts.r_fraction_grid {
                    let (r, days, whole) = horizon_row(r0, u, CollectionRate::Fraction(frac))?;
                    ds.rows.push(vec![r0, frac, u, r, days, whole]);
                }
            }
            Ok(ds)
        }
    }
}
