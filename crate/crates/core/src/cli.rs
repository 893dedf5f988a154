//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{load_config, to_config_string};
use crate::error::{Error, Result};
use crate::game::{proposition1_certificate, GameInstance, LogBase, PayoffParams, PlayerState, Strategy};
use crate::geometry::{pairwise_distance, Position};
use crate::harness::{monte_carlo, reproduce_figure, FigureDataset, FigureId, FigureOptions, ScenarioConfig};
use crate::objective::{compare_objectives, ConstraintBounds, GridSpec, TinyInstance};
use crate::output::{format_number, OutputSet};
use crate::sustainability::{
    daily_incentive, is_sustainable, max_lockdown_days, Collection, CollectionRate, Horizon, ResourcePolicy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "isolation-game", version, about = "Isolation and social-distancing incentive game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// Dominance and Nash-equilibrium certificate for a described game.
    GameCheck(GameCheckArgs),
    /// Lockdown sustainability projection.
    Sustain(SustainArgs),
    /// Regenerate the dataset of one figure (F2..F7).
    Figure(FigureArgs),
    /// Exhaustive grid optimum of the max-min problem on a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario file in `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo runs (overrides the config).
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl CommonArgs {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.runs {
            c.runs = r;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Population size (overrides the config).
    #[arg(long)]
    n: Option<usize>,
    /// Share of the population staying home (overrides the config).
    #[arg(long)]
    isolation_fraction: Option<f64>,
}

#[derive(Debug, Args)]
struct GameCheckArgs {
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1400.0)]
    z: f64,
    /// `natural` or `decimal`.
    #[arg(long, default_value = "natural")]
    log_base: String,
    /// Player as `delta,d_move,d_home` in meters; repeat once per player.
    #[arg(long = "player", required = true)]
    players: Vec<String>,
    /// Print the certificate as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SustainArgs {
    /// Initial resource stock.
    #[arg(long = "R0", alias = "r0")]
    r0: f64,
    /// Daily incentive.
    #[arg(long = "U", alias = "u")]
    u: f64,
    /// Daily collection, absolute.
    #[arg(long = "r", conflicts_with = "r_fraction")]
    r: Option<f64>,
    /// Daily collection as a share of the daily incentive.
    #[arg(long)]
    r_fraction: Option<f64>,
    /// Also check a lockdown of this many days.
    #[arg(long)]
    days: Option<u64>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure id: F2, F3, F4, F5, F6 or F7.
    id: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated population sizes to sweep instead of the defaults.
    #[arg(long, value_delimiter = ',')]
    populations: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Individuals (1 to 3).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Grid points per side.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Grid side length in meters.
    #[arg(long, default_value_t = 400.0)]
    side: f64,
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    #[arg(long, default_value_t = 1400.0)]
    z: f64,
    #[arg(long, default_value_t = 500.0)]
    delta_max: f64,
    #[arg(long, default_value_t = 2.0)]
    d_min: f64,
    /// Seed for the random home placement.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Runs the CLI against the process's stdout and stderr.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn execute_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::GameCheck(a) => game_check(a, out),
        Command::Sustain(a) => sustain(a, out),
        Command::Figure(a) => figure(a, out),
        Command::Oracle(a) => oracle(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_DOMAIN
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = a.common.scenario()?;
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(f) = a.isolation_fraction {
        cfg.isolation_fraction = f;
    }
    cfg.validate()?;
    let summary = monte_carlo(&cfg)?;

    let columns: Vec<String> = [
        "run",
        "total_incentive",
        "mean_individual",
        "movers",
        "clip_events",
        "violations",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<f64>> = summary
        .runs
        .iter()
        .map(|r| {
            vec![
                r.run_index as f64,
                r.total,
                r.mean_individual,
                r.movers as f64,
                r.clip_events as f64,
                r.feasibility.violations.len() as f64,
            ]
        })
        .collect();
    let mut files = OutputSet::new(&a.common.out);
    files.add("simulate.csv", crate::output::to_csv(&columns, &rows)?);
    let json = serde_json::json!({
        "mean_total": summary.mean_total,
        "std_error_total": summary.std_error_total,
        "mean_individual": summary.mean_individual,
        "std_error_individual": summary.std_error_individual,
        "clip_events": summary.clip_events,
        "ecdf": summary.ecdf,
    });
    files.add("simulate.json", serde_json::to_vec_pretty(&json).map_err(|e| Error::Io(e.to_string()))?);
    let paths = files.write("simulate", "simulate", cfg.seed, &to_config_string(&cfg))?;

    writeln!(out, "runs={} n={} isolation_fraction={}", cfg.runs, cfg.n, cfg.isolation_fraction).map_err(io)?;
    writeln!(out, "mean_total={}", format_number(summary.mean_total)).map_err(io)?;
    writeln!(out, "std_error_total={}", format_number(summary.std_error_total)).map_err(io)?;
    writeln!(out, "mean_individual={}", format_number(summary.mean_individual)).map_err(io)?;
    writeln!(out, "clip_events={}", summary.clip_events).map_err(io)?;
    for p in paths {
        writeln!(out, "wrote {}", p.display()).map_err(io)?;
    }
    Ok(())
}

fn parse_player(s: &str) -> Result<PlayerState> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::param(format!("player `{s}` is not `delta,d_move,d_home`")))?;
    match parts[..] {
        [delta, d_move, d_home] => Ok(PlayerState::new(delta, d_move, d_home)),
        _ => Err(Error::param(format!("player `{s}` is not `delta,d_move,d_home`"))),
    }
}

fn profile_string(p: &crate::game::StrategyProfile) -> String {
    p.iter()
        .map(|s| match s {
            Strategy::Home => 'H',
            Strategy::Move => 'M',
        })
        .collect()
}

fn game_check(a: GameCheckArgs, out: &mut dyn Write) -> Result<()> {
    let base = match a.log_base.as_str() {
        "natural" => LogBase::Natural,
        "decimal" => LogBase::Decimal,
        other => return Err(Error::param(format!("unknown log base `{other}`"))),
    };
    let params = PayoffParams::new(a.alpha, a.beta, a.z)?.with_log_base(base);
    let players = a.players.iter().map(|s| parse_player(s)).collect::<Result<Vec<_>>>()?;
    let game = GameInstance::new(players, params)?;
    let cert = proposition1_certificate(&game)?;
    if a.json {
        let s = serde_json::to_string_pretty(&cert).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{s}").map_err(io)?;
        return Ok(());
    }
    writeln!(out, "players={}", game.len()).map_err(io)?;
    writeln!(out, "alpha_gt_beta={}", cert.alpha_gt_beta).map_err(io)?;
    writeln!(out, "method={}", if cert.enumerated { "enumeration" } else { "analytic" }).map_err(io)?;
    for (i, (premise, dom)) in cert.crowd_premise.iter().zip(&cert.home_dominant).enumerate() {
        writeln!(out, "player {i}: crowd_premise={premise} home_dominant={dom}").map_err(io)?;
    }
    let eq = match &cert.equilibrium {
        Some(p) if p.is_all(Strategy::Home) => format!("all-Home ({})", profile_string(p)),
        Some(p) => profile_string(p),
        None => "none".into(),
    };
    writeln!(out, "equilibrium={eq}").map_err(io)?;
    Ok(())
}

fn sustain(a: SustainArgs, out: &mut dyn Write) -> Result<()> {
    let rate = match (a.r, a.r_fraction) {
        (Some(r), None) => CollectionRate::Absolute(r),
        (None, Some(f)) => CollectionRate::Fraction(f),
        (None, None) => CollectionRate::Absolute(0.0),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    let r = rate.resolve(a.u);
    if !(r >= 0.0) {
        return Err(Error::param(format!("daily collection must be non-negative, got {r}")));
    }
    let horizon = max_lockdown_days(a.r0, a.u, r)?;
    match horizon {
        Horizon::Finite { days, whole_days } => {
            writeln!(out, "P={}", format_number(days)).map_err(io)?;
            writeln!(out, "whole_days={whole_days}").map_err(io)?;
        }
        Horizon::Indefinite => {
            writeln!(out, "P=inf").map_err(io)?;
            writeln!(out, "indefinitely sustainable: daily collection covers the daily incentive").map_err(io)?;
        }
    }
    if let Some(p) = a.days {
        let policy = ResourcePolicy::new(a.r0, Collection::Constant(r), 1440)?;
        let day = daily_incentive(vec![a.u], 1)?;
        let days = vec![day; p as usize];
        writeln!(out, "sustainable_for_{p}_days={}", is_sustainable(&policy, &days)?).map_err(io)?;
    }
    Ok(())
}

fn figure(a: FigureArgs, out: &mut dyn Write) -> Result<()> {
    let id: FigureId = a.id.parse()?;
    let cfg = a.common.scenario()?;
    let mut opts = FigureOptions::default();
    if let Some(p) = a.populations {
        if p.is_empty() {
            return Err(Error::param("empty population list"));
        }
        opts.weight_populations = p.clone();
        opts.horizon_population = p[0];
        opts.populations = p;
    }
    let ds: FigureDataset = reproduce_figure(id, &cfg, &opts)?;
    let stem = format!("figure_{}", id.name());
    let mut files = OutputSet::new(&a.common.out);
    files.add_dataset(&stem, &ds)?;
    let paths = files.write(&stem, &format!("figure {}", id.name()), cfg.seed, &to_config_string(&cfg))?;
    writeln!(out, "figure={} rows={}", id.name(), ds.rows.len()).map_err(io)?;
    for p in paths {
        writeln!(out, "wrote {}", p.display()).map_err(io)?;
    }
    Ok(())
}

/// Distinct random homes on the grid, pairwise at least `d_min` apart.
fn oracle_homes(grid: &GridSpec, n: usize, d_min: f64, seed: u64) -> Result<Vec<Position>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = grid.k * grid.k;
    let mut homes: Vec<Position> = Vec::with_capacity(n);
    for _ in 0..10_000 {
        if homes.len() == n {
            break;
        }
        let p = grid.point(rng.gen_range(0..cells));
        if homes.iter().all(|h| pairwise_distance(*h, p) >= d_min) {
            homes.push(p);
        }
    }
    if homes.len() < n {
        return Err(Error::param("grid too small to place distinct homes"));
    }
    Ok(homes)
}

fn oracle(a: OracleArgs, out: &mut dyn Write) -> Result<()> {
    if !(1..=3).contains(&a.n) || a.k == 0 {
        return Err(Error::param("oracle needs 1..=3 individuals and k >= 1"));
    }
    let grid = GridSpec { k: a.k, side: a.side };
    let params = PayoffParams::new(3.0, 1.0, a.z)?.with_omega(a.omega)?;
    let bounds = ConstraintBounds::new(a.delta_max, a.d_min)?;
    let homes = oracle_homes(&grid, a.n, a.d_min, a.seed)?;
    let tiny = TinyInstance::new(homes.clone(), grid, params, bounds);
    let cmp = compare_objectives(&tiny)?;
    let opt = &cmp.maxmin;
    writeln!(out, "evaluated={}", opt.evaluated).map_err(io)?;
    writeln!(out, "value={}", format_number(opt.value)).map_err(io)?;
    for (i, ((h, p), d)) in homes.iter().zip(&opt.positions).zip(&opt.deltas).enumerate() {
        writeln!(
            out,
            "individual {i}: home=({}, {}) optimum=({}, {}) delta={}",
            format_number(h.x),
            format_number(h.y),
            format_number(p.x),
            format_number(p.y),
            format_number(*d)
        )
        .map_err(io)?;
    }
    writeln!(out, "all_home={}", opt.deltas.iter().all(|&d| d == 0.0)).map_err(io)?;
    writeln!(out, "sum_optimum={}", format_number(cmp.sum.value)).map_err(io)?;
    writeln!(out, "maxmin_at_sum_optimum={}", format_number(cmp.maxmin_at_sum_optimum)).map_err(io)?;
    writeln!(out, "objectives_agree={}", cmp.agree).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("isolation-game").chain(args.iter().copied());
        let code = execute_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sustain_prints_horizon() {
        let (code, out, _) = run(&["sustain", "--R0", "100", "--U", "20", "--r", "10"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l == "P=10.0"), "{out}");
        let (_, out, _) = run(&["sustain", "--R0", "100", "--U", "20", "--r", "10", "--days", "11"]);
        assert!(out.contains("sustainable_for_11_days=false"));
        let (_, out, _) = run(&["sustain", "--R0", "100", "--U", "20", "--r-fraction", "1.5"]);
        assert!(out.contains("P=inf"));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run(&["sustain", "--bogus", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--bogus"));
        let (code, _, _) = run(&["nonsense"]);
        assert_eq!(code, 2);
        let (code, out, _) = run(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("game-check"));
    }

    #[test]
    fn game_check_all_home() {
        let (code, out, _) = run(&["game-check", "--player", "40,100,150", "--player", "10,80,200"]);
        assert_eq!(code, 0);
        assert!(out.contains("alpha_gt_beta=true"));
        assert!(out.contains("equilibrium=all-Home (HH)"), "{out}");
    }

    #[test]
    fn game_check_domain_error() {
        let (code, _, err) = run(&["game-check", "--player", "1500,100,150"]);
        assert_eq!(code, 1, "{err}");
        let (code, _, _) = run(&["game-check", "--player", "1,2"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oracle_output() {
        let (code, out, _) = run(&["oracle", "--omega", "1", "--n", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("all_home=true"), "{out}");
        let (code, _, _) = run(&["oracle", "--n", "4"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn unknown_figure_id() {
        let (code, _, err) = run(&["figure", "F9"]);
        assert_eq!(code, 2);
        assert!(err.contains("F9"));
    }

    #[test]
    fn bad_config_file_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        std::fs::write(&cfg, "omega = 1.5\n").unwrap();
        let (code, _, err) = run(&["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(err.contains("omega"));
    }
}
