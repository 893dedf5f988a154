//! The isolation/distancing incentive game.
//!
//! Every individual chooses between staying at home and moving outside. The
//! payoff rewards isolation through `alpha * log(Z - delta)` and distancing
//! through `beta * log(d)`, where `delta` is the path length away from home
//! and `d` the aggregate distance to the individual's proximity set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest population for which dominance is checked by enumerating opponent profiles.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    Natural,
    Decimal,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Decimal => x.log10(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Decimal => "decimal",
        }
    }
}

/// Incentive weights of the payoff model.
///
/// `alpha` and `beta` are the resource units paid per unit of log-isolation and
/// log-distance. When built from base incentives, `alpha = alpha_raw * omega` and
/// `beta = beta_raw * (1 - omega)`. `omega` is also the weight of the max-min
/// social objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffParams {
    alpha: f64,
    beta: f64,
    raw: Option<(f64, f64)>,
    omega: f64,
    z: f64,
    log_base: LogBase,
}

impl Default for PayoffParams {
    fn default() -> Self {
        PayoffParams {
            alpha: 3.0,
            beta: 1.0,
            raw: None,
            omega: 0.5,
            z: 1400.0,
            log_base: LogBase::Natural,
        }
    }
}

fn check_weight(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if (0.0..=1.0).contains(&omega) {
        Ok(())
    } else {
        Err(Error::param(format!("omega must lie in [0, 1], got {omega}")))
    }
}

impl PayoffParams {
    /// Direct weights. `omega` only feeds the max-min objective here.
    pub fn new(alpha: f64, beta: f64, z: f64) -> Result<Self> {
        check_weight("alpha", alpha)?;
        check_weight("beta", beta)?;
        check_weight("Z", z)?;
        Ok(PayoffParams {
            alpha,
            beta,
            z,
            ..Default::default()
        })
    }

    /// Weights derived from base incentives and the isolation weight `omega`.
    ///
    /// At `omega = 0` or `omega = 1` one of the derived weights is zero; this is
    /// accepted so that the full `[0, 1]` range can be swept.
    pub fn from_raw(alpha_raw: f64, beta_raw: f64, omega: f64, z: f64) -> Result<Self> {
        check_weight("alpha_raw", alpha_raw)?;
        check_weight("beta_raw", beta_raw)?;
        check_omega(omega)?;
        check_weight("Z", z)?;
        Ok(PayoffParams {
            alpha: alpha_raw * omega,
            beta: beta_raw * (1.0 - omega),
            raw: Some((alpha_raw, beta_raw)),
            omega,
            z,
            log_base: LogBase::Natural,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        if let Some((a, b)) = self.raw {
            self.alpha = a * omega;
            self.beta = b * (1.0 - omega);
        }
        self.omega = omega;
        Ok(self)
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// Same parameters with both weights multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        check_weight("scale factor", factor)?;
        self.alpha *= factor;
        self.beta *= factor;
        self.raw = self.raw.map(|(a, b)| (a * factor, b * factor));
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn raw(&self) -> Option<(f64, f64)> {
        self.raw
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub(crate) fn log(&self, x: f64) -> f64 {
        self.log_base.log(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Home,
    Move,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Home, Strategy::Move];

    pub fn other(self) -> Strategy {
        match self {
            Strategy::Home => Strategy::Move,
            Strategy::Move => Strategy::Home,
        }
    }
}

/// Payoff inputs of one individual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    /// Total deviation from home when moving (meters).
    pub delta: f64,
    /// Aggregate distance to the proximity set when moving.
    pub d_move: f64,
    /// Aggregate distance to the proximity set when staying at home.
    pub d_home: f64,
}

impl PlayerState {
    pub fn new(delta: f64, d_move: f64, d_home: f64) -> Self {
        PlayerState { delta, d_move, d_home }
    }
}

/// Payoff of one individual under `strategy`.
pub fn individual_payoff(strategy: Strategy, state: &PlayerState, params: &PayoffParams) -> Result<f64> {
    let z = params.z;
    match strategy {
        Strategy::Home => {
            if !(state.d_home > 0.0) {
                return Err(Error::domain("d_home", state.d_home, "must be positive"));
            }
            Ok(params.alpha * params.log(z) + params.beta * params.log(state.d_home))
        }
        Strategy::Move => {
            if !(state.delta >= 0.0) {
                return Err(Error::domain("delta", state.delta, "must be non-negative"));
            }
            if !(state.delta < z) {
                return Err(Error::domain("delta", state.delta, "must be below Z"));
            }
            if !(state.d_move > 0.0) {
                return Err(Error::domain("d_move", state.d_move, "must be positive"));
            }
            Ok(params.alpha * params.log(z - state.delta) + params.beta * params.log(state.d_move))
        }
    }
}

/// Total incentive paid to a population for one period.
pub fn social_incentive(states: &[PlayerState], profile: &StrategyProfile, params: &PayoffParams) -> Result<f64> {
    if states.len() != profile.len() {
        return Err(Error::param(format!(
            "{} players but profile has {} strategies",
            states.len(),
            profile.len()
        )));
    }
    states
        .iter()
        .zip(profile.iter())
        .map(|(s, &st)| individual_payoff(st, s, params))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyProfile(Vec<Strategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        StrategyProfile(strategies)
    }

    pub fn uniform(n: usize, s: Strategy) -> Self {
        StrategyProfile(vec![s; n])
    }

    /// Profile number `bits` in the enumeration order: bit `i` set means player `i` moves.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        StrategyProfile(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { Strategy::Move } else { Strategy::Home })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Strategy> {
        self.0.iter()
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.0
    }

    pub fn is_all(&self, s: Strategy) -> bool {
        self.0.iter().all(|&x| x == s)
    }

    pub fn with(&self, player: usize, s: Strategy) -> Self {
        let mut v = self.0.clone();
        v[player] = s;
        StrategyProfile(v)
    }
}

impl std::ops::Index<usize> for StrategyProfile {
    type Output = Strategy;
    fn index(&self, i: usize) -> &Strategy {
        &self.0[i]
    }
}

/// A finite game with two strategies per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    players: Vec<PlayerState>,
    params: PayoffParams,
    enumeration_cap: usize,
}

impl GameInstance {
    pub fn new(players: Vec<PlayerState>, params: PayoffParams) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::param("a game needs at least one player"));
        }
        Ok(GameInstance {
            players,
            params,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap.min(63);
        self
    }

    pub fn players(&self) -> &[PlayerState] {
        &self.players
    }

    pub fn params(&self) -> &PayoffParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }
}

/// A finite game in which every player picks Home or Move.
pub trait BinaryGame {
    fn num_players(&self) -> usize;

    /// Payoff of `player` under the full profile.
    fn payoff(&self, player: usize, profile: &StrategyProfile) -> Result<f64>;

    fn enumeration_cap(&self) -> usize {
        DEFAULT_ENUMERATION_CAP
    }
}

impl BinaryGame for GameInstance {
    fn num_players(&self) -> usize {
        self.players.len()
    }

    fn payoff(&self, player: usize, profile: &StrategyProfile) -> Result<f64> {
        if profile.len() != self.len() {
            return Err(Error::param("profile length does not match player count"));
        }
        let state = self.players.get(player).ok_or(Error::Index {
            index: player,
            len: self.len(),
        })?;
        individual_payoff(profile[player], state, &self.params)
    }

    fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }
}

fn check_player<G: BinaryGame + ?Sized>(game: &G, player: usize) -> Result<()> {
    if player < game.num_players() {
        Ok(())
    } else {
        Err(Error::Index {
            index: player,
            len: game.num_players(),
        })
    }
}

fn check_cap<G: BinaryGame + ?Sized>(game: &G) -> Result<()> {
    let cap = game.enumeration_cap().min(63);
    if game.num_players() > cap {
        Err(Error::Capacity {
            what: "players for exhaustive enumeration",
            requested: game.num_players() as u128,
            cap: cap as u128,
        })
    } else {
        Ok(())
    }
}

/// Weak dominance of `s` for `player`, checked against all `2^(N-1)` opponent profiles.
pub fn is_dominant_strategy<G: BinaryGame + ?Sized>(game: &G, player: usize, s: Strategy) -> Result<bool> {
    check_player(game, player)?;
    check_cap(game)?;
    let n = game.num_players();
    let others = n - 1;
    for opp in 0..(1u64 << others) {
        // spread the opponent bits around the player's slot
        let low = opp & ((1u64 << player) - 1);
        let high = (opp >> player) << (player + 1);
        let base = StrategyProfile::from_bits(n, low | high);
        let mine = game.payoff(player, &base.with(player, s))?;
        let theirs = game.payoff(player, &base.with(player, s.other()))?;
        if mine < theirs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Profile of weakly dominant strategies, preferring Home when both are. `None`
/// when some player has no dominant strategy.
pub fn dominant_strategy_equilibrium<G: BinaryGame + ?Sized>(game: &G) -> Result<Option<StrategyProfile>> {
    check_cap(game)?;
    let mut out = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        if is_dominant_strategy(game, i, Strategy::Home)? {
            out.push(Strategy::Home);
        } else if is_dominant_strategy(game, i, Strategy::Move)? {
            out.push(Strategy::Move);
        } else {
            return Ok(None);
        }
    }
    Ok(Some(StrategyProfile::new(out)))
}

/// Dominance without enumeration. Each payoff depends only on the player's own
/// strategy, so comparing the two payoffs once settles dominance for any `N`.
pub fn dominant_strategy_analytic(game: &GameInstance, player: usize) -> Result<Option<Strategy>> {
    check_player(game, player)?;
    let st = &game.players[player];
    let home = individual_payoff(Strategy::Home, st, &game.params)?;
    let mv = individual_payoff(Strategy::Move, st, &game.params)?;
    Ok(if home >= mv {
        Some(Strategy::Home)
    } else {
        Some(Strategy::Move)
    })
}

/// True iff no player gains strictly by a unilateral switch.
pub fn verify_nash<G: BinaryGame + ?Sized>(game: &G, profile: &StrategyProfile) -> Result<bool> {
    if profile.len() != game.num_players() {
        return Err(Error::param("profile length does not match player count"));
    }
    for i in 0..game.num_players() {
        let current = game.payoff(i, profile)?;
        let flipped = game.payoff(i, &profile.with(i, profile[i].other()))?;
        if flipped > current {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All pure Nash equilibria, by enumerating every profile.
pub fn pure_nash_equilibria<G: BinaryGame + ?Sized>(game: &G) -> Result<Vec<StrategyProfile>> {
    check_cap(game)?;
    let n = game.num_players();
    let mut out = Vec::new();
    for bits in 0..(1u64 << n) {
        let p = StrategyProfile::from_bits(n, bits);
        if verify_nash(game, &p)? {
            out.push(p);
        }
    }
    Ok(out)
}

/// Structured evidence for the all-Home dominant-strategy equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub alpha_gt_beta: bool,
    /// Per player: `0 < delta < Z` and `d_home > d_move > 0`.
    pub crowd_premise: Vec<bool>,
    pub home_dominant: Vec<bool>,
    pub equilibrium: Option<StrategyProfile>,
    /// Whether dominance came from enumeration (`false` above the cap).
    pub enumerated: bool,
}

impl Certificate {
    pub fn premise_holds(&self) -> bool {
        self.alpha_gt_beta && self.crowd_premise.iter().all(|&b| b)
    }
}

pub fn proposition1_certificate(game: &GameInstance) -> Result<Certificate> {
    let p = &game.params;
    let crowd_premise = game
        .players
        .iter()
        .map(|s| s.delta > 0.0 && s.delta < p.z && s.d_home > s.d_move && s.d_move > 0.0)
        .collect();
    let enumerated = game.len() <= game.enumeration_cap.min(63);
    let (home_dominant, equilibrium) = if enumerated {
        let hd = (0..game.len())
            .map(|i| is_dominant_strategy(game, i, Strategy::Home))
            .collect::<Result<Vec<_>>>()?;
        (hd, dominant_strategy_equilibrium(game)?)
    } else {
        let dom = (0..game.len())
            .map(|i| dominant_strategy_analytic(game, i))
            .collect::<Result<Vec<_>>>()?;
        let hd = dom.iter().map(|d| *d == Some(Strategy::Home)).collect();
        let eq = dom.into_iter().collect::<Option<Vec<_>>>().map(StrategyProfile::new);
        (hd, eq)
    };
    Ok(Certificate {
        alpha_gt_beta: p.alpha > p.beta,
        crowd_premise,
        home_dominant,
        equilibrium,
        enumerated,
    })
}

/// Direction of a mover in the two-player game: toward the other player
/// shrinks distances by the step, away grows them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Toward,
    Away,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Toward => -1.0,
            Direction::Away => 1.0,
        }
    }
}

/// Fixed per-timestamp step length and each player's direction when moving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPlayerStep {
    pub delta_step: f64,
    pub direction: [Direction; 2],
}

impl TwoPlayerStep {
    pub fn new(delta_step: f64, p1: Direction, p2: Direction) -> Result<Self> {
        if !(delta_step > 0.0 && delta_step.is_finite()) {
            return Err(Error::domain("step", delta_step, "must be positive"));
        }
        Ok(TwoPlayerStep {
            delta_step,
            direction: [p1, p2],
        })
    }
}

/// 2×2 bimatrix indexed `[row = player 1 strategy][col = player 2 strategy]`,
/// each cell holding `(u1, u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub cells: [[(f64, f64); 2]; 2],
}

fn idx(s: Strategy) -> usize {
    match s {
        Strategy::Home => 0,
        Strategy::Move => 1,
    }
}

impl PayoffMatrix {
    pub fn get(&self, s1: Strategy, s2: Strategy) -> (f64, f64) {
        self.cells[idx(s1)][idx(s2)]
    }

    pub fn u1(&self, s1: Strategy, s2: Strategy) -> f64 {
        self.get(s1, s2).0
    }

    pub fn u2(&self, s1: Strategy, s2: Strategy) -> f64 {
        self.get(s1, s2).1
    }
}

impl BinaryGame for PayoffMatrix {
    fn num_players(&self) -> usize {
        2
    }

    fn payoff(&self, player: usize, profile: &StrategyProfile) -> Result<f64> {
        if profile.len() != 2 {
            return Err(Error::param("profile length does not match player count"));
        }
        let cell = self.get(profile[0], profile[1]);
        match player {
            0 => Ok(cell.0),
            1 => Ok(cell.1),
            _ => Err(Error::Index { index: player, len: 2 }),
        }
    }
}

/// Two-player game with a single step: each mover changes both players'
/// distances by one step in its direction and pays the step as deviation.
pub fn two_player_matrix(params: &PayoffParams, d1: f64, d2: f64, step: &TwoPlayerStep) -> Result<PayoffMatrix> {
    if !(d1 > 0.0) {
        return Err(Error::domain("d1", d1, "must be positive"));
    }
    if !(d2 > 0.0) {
        return Err(Error::domain("d2", d2, "must be positive"));
    }
    let dz = step.delta_step;
    if !(dz < params.z) {
        return Err(Error::domain("step", dz, "must be below Z"));
    }
    let shift = |s1: Strategy, s2: Strategy| {
        let mut s = 0.0;
        if s1 == Strategy::Move {
            s += step.direction[0].sign() * dz;
        }
        if s2 == Strategy::Move {
            s += step.direction[1].sign() * dz;
        }
        s
    };
    let isolation = |s: Strategy| match s {
        Strategy::Home => params.log(params.z),
        Strategy::Move => params.log(params.z - dz),
    };
    let mut cells = [[(0.0, 0.0); 2]; 2];
    for s1 in Strategy::ALL {
        for s2 in Strategy::ALL {
            let sh = shift(s1, s2);
            let (e1, e2) = (d1 + sh, d2 + sh);
            if !(e1 > 0.0) {
                return Err(Error::domain("d1 after moves", e1, "must be positive"));
            }
            if !(e2 > 0.0) {
                return Err(Error::domain("d2 after moves", e2, "must be positive"));
            }
            cells[idx(s1)][idx(s2)] = (
                params.alpha * isolation(s1) + params.beta * params.log(e1),
                params.alpha * isolation(s2) + params.beta * params.log(e2),
            );
        }
    }
    Ok(PayoffMatrix { cells })
}
