//! How long an incentive-backed lockdown stays affordable.
//!
//! A day is split into `1440 / T0` slots; each slot pays the social incentive
//! of that period. The policy is sustainable for `P` days while the incentives
//! paid never exceed the initial stock plus what was collected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{social_incentive, PayoffParams, PlayerState, StrategyProfile};

pub const MINUTES_PER_DAY: u32 = 1440;

/// Resources collected per day of lockdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Collection {
    Constant(f64),
    PerDay(Vec<f64>),
}

impl Collection {
    fn on_day(&self, p: usize) -> Option<f64> {
        match self {
            Collection::Constant(r) => Some(*r),
            Collection::PerDay(v) => v.get(p).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePolicy {
    r0: f64,
    collected: Collection,
    slot_minutes: u32,
}

impl ResourcePolicy {
    pub fn new(r0: f64, collected: Collection, slot_minutes: u32) -> Result<Self> {
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::param(format!("initial resource must be non-negative, got {r0}")));
        }
        let ok = match &collected {
            Collection::Constant(r) => *r >= 0.0 && r.is_finite(),
            Collection::PerDay(v) => v.iter().all(|r| *r >= 0.0 && r.is_finite()),
        };
        if !ok {
            return Err(Error::param("collected resources must be non-negative"));
        }
        slots_per_day(slot_minutes)?;
        Ok(ResourcePolicy {
            r0,
            collected,
            slot_minutes,
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn collected(&self) -> &Collection {
        &self.collected
    }

    pub fn slots_per_day(&self) -> usize {
        (MINUTES_PER_DAY / self.slot_minutes) as usize
    }
}

/// Number of periods in a day; the slot length must divide a day evenly.
pub fn slots_per_day(slot_minutes: u32) -> Result<usize> {
    if slot_minutes == 0 || !MINUTES_PER_DAY.is_multiple_of(slot_minutes) {
        return Err(Error::param(format!(
            "slot length {slot_minutes} min does not divide a day evenly"
        )));
    }
    Ok((MINUTES_PER_DAY / slot_minutes) as usize)
}

/// Incentive paid for one slot; the same quantity as the period's social incentive.
pub fn slot_incentive(states: &[PlayerState], profile: &StrategyProfile, params: &PayoffParams) -> Result<f64> {
    social_incentive(states, profile, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyIncentive {
    slots: Vec<f64>,
    total: f64,
}

impl DailyIncentive {
    pub fn slots(&self) -> &[f64] {
        &self.slots
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Sums one day's slot incentives; `slots_per_day` must match the slot count.
pub fn daily_incentive(slots: Vec<f64>, slots_per_day: usize) -> Result<DailyIncentive> {
    if slots.len() != slots_per_day {
        return Err(Error::param(format!(
            "expected {slots_per_day} slot incentives, got {}",
            slots.len()
        )));
    }
    let total = slots.iter().sum();
    Ok(DailyIncentive { slots, total })
}

/// Whether the incentives of the given days are covered by the initial stock
/// plus the resources collected over the same days.
pub fn is_sustainable(policy: &ResourcePolicy, daily: &[DailyIncentive]) -> Result<bool> {
    let mut spent = 0.0;
    let mut collected = 0.0;
    for (p, day) in daily.iter().enumerate() {
        spent += day.total;
        collected += policy.collected.on_day(p).ok_or_else(|| {
            Error::param(format!("no collected amount for day {}", p + 1))
        })?;
    }
    Ok(spent <= policy.r0 + collected)
}

/// Sustainable horizon for constant daily incentive and collection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Finite { days: f64, whole_days: u64 },
    /// Collection keeps up with spending.
    Indefinite,
}

impl Horizon {
    pub fn days(&self) -> f64 {
        match self {
            Horizon::Finite { days, .. } => *days,
            Horizon::Indefinite => f64::INFINITY,
        }
    }
}

/// `P = R0 / (U - r)`, reported with its floor.
pub fn max_lockdown_days(r0: f64, u_tilde: f64, r_tilde: f64) -> Result<Horizon> {
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::param(format!("initial resource must be non-negative, got {r0}")));
    }
    if !(u_tilde.is_finite() && r_tilde.is_finite()) {
        return Err(Error::param("daily incentive and collection must be finite"));
    }
    if u_tilde <= r_tilde {
        return Ok(Horizon::Indefinite);
    }
    let days = r0 / (u_tilde - r_tilde);
    Ok(Horizon::Finite {
        days,
        whole_days: days.floor() as u64,
    })
}

/// How the daily collection is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CollectionRate {
    /// Share of the daily incentive.
    Fraction(f64),
    Absolute(f64),
}

impl CollectionRate {
    pub fn resolve(self, u_tilde: f64) -> f64 {
        match self {
            CollectionRate::Fraction(f) => f * u_tilde,
            CollectionRate::Absolute(r) => r,
        }
    }
}
