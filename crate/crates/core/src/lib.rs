//! Incentive game for home isolation and social distancing.
//!
//! Individuals choose between staying home and moving outside; a planner pays
//! incentives for isolation and for keeping distance. The crate computes
//! mobility-derived payoffs, verifies the all-Home dominant-strategy
//! equilibrium, projects how long an incentive-backed lockdown stays
//! affordable, and runs seeded Monte Carlo studies over random populations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod game;
pub mod geometry;
pub mod harness;
pub mod objective;
pub mod output;
pub mod spatial;
pub mod sustainability;

pub use error::{Error, Result};
pub use game::{
    dominant_strategy_equilibrium, individual_payoff, is_dominant_strategy, proposition1_certificate,
    social_incentive, two_player_matrix, verify_nash, BinaryGame, Certificate, Direction, GameInstance, LogBase,
    PayoffMatrix, PayoffParams, PlayerState, Strategy, StrategyProfile, TwoPlayerStep,
};
pub use geometry::{
    aggregate_distance, pairwise_distance, proximity_set, step_deviation, total_deviation, MobilityTrace,
    PopulationSnapshot, Position, ProximityRule,
};
