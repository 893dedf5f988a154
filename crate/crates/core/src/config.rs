//! Line-oriented `key = value` scenario configuration.
//!
//! Blank lines and `#` comments are ignored. Missing keys keep their defaults.

use std::path::Path;

use crate::error::{Error, Result};
use crate::game::{LogBase, PayoffParams};
use crate::geometry::ProximityRule;
use crate::harness::ScenarioConfig;
use crate::objective::ConstraintBounds;
use crate::sustainability::{slots_per_day, CollectionRate};

pub const KEYS: [&str; 22] = [
    "n",
    "area_side_m",
    "isolation_fraction",
    "timesteps",
    "slot_minutes",
    "alpha",
    "beta",
    "alpha_raw",
    "beta_raw",
    "omega",
    "z",
    "log_base",
    "proximity_mode",
    "proximity_c",
    "proximity_radius_m",
    "delta_max_m",
    "d_min_m",
    "runs",
    "seed",
    "r0",
    "r_tilde_mode",
    "r_tilde_value",
];

const DEFAULT_RADIUS: f64 = 50.0;

fn invalid(key: &str, value: impl ToString, allowed: &str) -> Error {
    Error::Validation {
        key: key.to_string(),
        value: value.to_string(),
        allowed: allowed.to_string(),
    }
}

fn number(key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(key, raw, "a finite number"))
}

fn integer<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse::<T>().map_err(|_| invalid(key, raw, "a non-negative integer"))
}

fn at_least(key: &str, v: f64, lo: f64, strict: bool) -> Result<f64> {
    let ok = if strict { v > lo } else { v >= lo };
    if ok {
        Ok(v)
    } else {
        Err(invalid(key, v, &format!("{} {lo}", if strict { ">" } else { ">=" })))
    }
}

fn unit(key: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(invalid(key, v, "[0, 1]"))
    }
}

#[derive(Default)]
struct Raw {
    values: Vec<(String, String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().rev().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }
}

/// Parses the textual schema into a validated configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut raw = Raw::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key `{k}`"),
            });
        }
        if v.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("missing value for `{k}`"),
            });
        }
        if raw.values.iter().any(|(key, _, _)| key == k) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{k}`"),
            });
        }
        raw.values.push((k.to_string(), v.to_string(), line_no));
    }
    build(&raw)
}

fn build(raw: &Raw) -> Result<ScenarioConfig> {
    let d = ScenarioConfig::default();
    let n: usize = match raw.get("n") {
        Some(v) => integer("n", v)?,
        None => d.n,
    };
    if n == 0 {
        return Err(invalid("n", n, ">= 1"));
    }
    let area_side = match raw.get("area_side_m") {
        Some(v) => at_least("area_side_m", number("area_side_m", v)?, 0.0, true)?,
        None => d.area_side,
    };
    let isolation_fraction = match raw.get("isolation_fraction") {
        Some(v) => unit("isolation_fraction", number("isolation_fraction", v)?)?,
        None => d.isolation_fraction,
    };
    let timesteps: usize = match raw.get("timesteps") {
        Some(v) => integer("timesteps", v)?,
        None => d.timesteps,
    };
    if timesteps == 0 {
        return Err(invalid("timesteps", 0, ">= 1"));
    }
    let slot_minutes: u32 = match raw.get("slot_minutes") {
        Some(v) => integer("slot_minutes", v)?,
        None => d.slot_minutes,
    };
    slots_per_day(slot_minutes).map_err(|_| invalid("slot_minutes", slot_minutes, "a divisor of 1440"))?;

    let z = match raw.get("z") {
        Some(v) => at_least("z", number("z", v)?, 0.0, true)?,
        None => d.params.z(),
    };
    let omega = match raw.get("omega") {
        // weight range constraint
        Some(v) => unit("omega", number("omega", v)?)?,
        None => d.params.omega(),
    };
    let log_base = match raw.get("log_base") {
        Some("natural") | Some("ln") | Some("e") => LogBase::Natural,
        Some("decimal") | Some("log10") | Some("10") => LogBase::Decimal,
        Some(other) => return Err(invalid("log_base", other, "natural | decimal")),
        None => LogBase::Natural,
    };
    let has_raw = raw.get("alpha_raw").is_some() || raw.get("beta_raw").is_some();
    let params = if has_raw {
        for k in ["alpha", "beta"] {
            if let Some(v) = raw.get(k) {
                return Err(invalid(k, v, "unset when alpha_raw/beta_raw are given"));
            }
        }
        let a = match raw.get("alpha_raw") {
            Some(v) => at_least("alpha_raw", number("alpha_raw", v)?, 0.0, true)?,
            None => return Err(invalid("alpha_raw", "<missing>", "> 0, set together with beta_raw")),
        };
        let b = match raw.get("beta_raw") {
            Some(v) => at_least("beta_raw", number("beta_raw", v)?, 0.0, true)?,
            None => return Err(invalid("beta_raw", "<missing>", "> 0, set together with alpha_raw")),
        };
        PayoffParams::from_raw(a, b, omega, z)?
    } else {
        let a = match raw.get("alpha") {
            Some(v) => at_least("alpha", number("alpha", v)?, 0.0, true)?,
            None => d.params.alpha(),
        };
        let b = match raw.get("beta") {
            Some(v) => at_least("beta", number("beta", v)?, 0.0, true)?,
            None => d.params.beta(),
        };
        PayoffParams::new(a, b, z)?.with_omega(omega)?
    }
    .with_log_base(log_base);

    let rule = match raw.get("proximity_mode").unwrap_or("fixed_count") {
        "fixed_count" | "count" => {
            let c: usize = match raw.get("proximity_c") {
                Some(v) => integer("proximity_c", v)?,
                None => match d.rule {
                    ProximityRule::FixedCount(c) => c,
                    ProximityRule::Radius(_) => 10,
                },
            };
            if c == 0 || c >= n {
                return Err(invalid("proximity_c", c, &format!("1..={}", n.saturating_sub(1))));
            }
            ProximityRule::FixedCount(c)
        }
        "radius" => {
            let r = match raw.get("proximity_radius_m") {
                Some(v) => at_least("proximity_radius_m", number("proximity_radius_m", v)?, 0.0, true)?,
                None => DEFAULT_RADIUS,
            };
            ProximityRule::Radius(r)
        }
        other => return Err(invalid("proximity_mode", other, "fixed_count | radius")),
    };

    let delta_max = match raw.get("delta_max_m") {
        Some(v) => at_least("delta_max_m", number("delta_max_m", v)?, 0.0, false)?,
        None => d.bounds.delta_max,
    };
    let d_min = match raw.get("d_min_m") {
        Some(v) => at_least("d_min_m", number("d_min_m", v)?, 0.0, true)?,
        None => d.bounds.d_min,
    };
    let runs: usize = match raw.get("runs") {
        Some(v) => integer("runs", v)?,
        None => d.runs,
    };
    if runs == 0 {
        return Err(invalid("runs", 0, ">= 1"));
    }
    let seed: u64 = match raw.get("seed") {
        Some(v) => integer("seed", v)?,
        None => d.seed,
    };
    let r0 = match raw.get("r0") {
        Some(v) => at_least("r0", number("r0", v)?, 0.0, false)?,
        None => d.r0,
    };
    let r_value = match raw.get("r_tilde_value") {
        Some(v) => Some(at_least("r_tilde_value", number("r_tilde_value", v)?, 0.0, false)?),
        None => None,
    };
    let collection = match raw.get("r_tilde_mode").unwrap_or("fraction") {
        "fraction" => CollectionRate::Fraction(r_value.unwrap_or(0.10)),
        "absolute" => CollectionRate::Absolute(r_value.unwrap_or(0.0)),
        other => return Err(invalid("r_tilde_mode", other, "fraction | absolute")),
    };

    Ok(ScenarioConfig {
        n,
        area_side,
        isolation_fraction,
        timesteps,
        slot_minutes,
        params,
        rule,
        bounds: ConstraintBounds {
            delta_max,
            d_min,
            all_pairs: false,
        },
        runs,
        seed,
        r0,
        collection,
    })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Writes every key, so the text alone reproduces the configuration.
pub fn to_config_string(c: &ScenarioConfig) -> String {
    let mut lines: Vec<(&str, String)> = vec![
        ("n", c.n.to_string()),
        ("area_side_m", c.area_side.to_string()),
        ("isolation_fraction", c.isolation_fraction.to_string()),
        ("timesteps", c.timesteps.to_string()),
        ("slot_minutes", c.slot_minutes.to_string()),
    ];
    match c.params.raw() {
        Some((a, b)) => {
            lines.push(("alpha_raw", a.to_string()));
            lines.push(("beta_raw", b.to_string()));
        }
        None => {
            lines.push(("alpha", c.params.alpha().to_string()));
            lines.push(("beta", c.params.beta().to_string()));
        }
    }
    lines.push(("omega", c.params.omega().to_string()));
    lines.push(("z", c.params.z().to_string()));
    lines.push(("log_base", c.params.log_base().name().to_string()));
    match c.rule {
        ProximityRule::FixedCount(k) => {
            lines.push(("proximity_mode", "fixed_count".into()));
            lines.push(("proximity_c", k.to_string()));
        }
        ProximityRule::Radius(r) => {
            lines.push(("proximity_mode", "radius".into()));
            lines.push(("proximity_radius_m", r.to_string()));
        }
    }
    lines.push(("delta_max_m", c.bounds.delta_max.to_string()));
    lines.push(("d_min_m", c.bounds.d_min.to_string()));
    lines.push(("runs", c.runs.to_string()));
    lines.push(("seed", c.seed.to_string()));
    lines.push(("r0", c.r0.to_string()));
    match c.collection {
        CollectionRate::Fraction(f) => {
            lines.push(("r_tilde_mode", "fraction".into()));
            lines.push(("r_tilde_value", f.to_string()));
        }
        CollectionRate::Absolute(r) => {
            lines.push(("r_tilde_mode", "absolute".into()));
            lines.push(("r_tilde_value", r.to_string()));
        }
    }
    lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
