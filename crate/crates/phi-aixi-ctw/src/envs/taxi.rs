//! Taxi on a 2x5 grid with no interior walls.
//!
//! Four depots sit at the grid corners. An episode starts with the
//! passenger waiting at a random depot and wanting a different random
//! depot; the taxi starts anywhere. Moves cost -1 (bumping a wall wastes
//! the move), illegal Pickup/Dropoff costs -10, and delivering the
//! passenger at the destination ends the episode with +100.
//!
//! The observation packs (taxi cell, passenger place, destination) into a
//! single symbol `pos * 20 + passenger * 4 + dest` whose 9-bit expansion
//! is `[pos:4][passenger:3][dest:2]`; passenger place 4 means "in the
//! taxi".

use super::{EnvStep, Environment};
use crate::bits::{BitString, RewardCodec};
use crate::history::ObsPayload;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const ROWS: u8 = 2;
pub const COLS: u8 = 5;
/// Depot cells as (row, col), indexed by depot id 0..4.
pub const DEPOTS: [(u8, u8); 4] = [(0, 0), (0, 4), (1, 0), (1, 4)];
pub const IN_TAXI: u8 = 4;

pub const NORTH: u32 = 0;
pub const SOUTH: u32 = 1;
pub const EAST: u32 = 2;
pub const WEST: u32 = 3;
pub const PICKUP: u32 = 4;
pub const DROPOFF: u32 = 5;

#[derive(Debug, Clone)]
pub struct TaxiEnv {
    rng: ChaCha12Rng,
    row: u8,
    col: u8,
    /// 0..4 = waiting at that depot, 4 = riding in the taxi.
    passenger: u8,
    dest: u8,
    terminal: bool,
}

impl TaxiEnv {
    pub fn new() -> TaxiEnv {
        TaxiEnv {
            rng: ChaCha12Rng::seed_from_u64(0),
            row: 0,
            col: 0,
            passenger: 0,
            dest: 1,
            terminal: true,
        }
    }

    pub fn position(&self) -> (u8, u8) {
        (self.row, self.col)
    }

    pub fn passenger(&self) -> u8 {
        self.passenger
    }

    pub fn destination(&self) -> u8 {
        self.dest
    }

    /// Packed observation symbol for the current state.
    pub fn state_symbol(&self) -> u32 {
        let pos = (self.row * COLS + self.col) as u32;
        pos * 20 + self.passenger as u32 * 4 + self.dest as u32
    }

    fn at_depot(&self, depot: u8) -> bool {
        DEPOTS[depot as usize] == (self.row, self.col)
    }
}

impl Default for TaxiEnv {
    fn default() -> Self {
        TaxiEnv::new()
    }
}

impl Environment for TaxiEnv {
    fn name(&self) -> &'static str {
        "taxi"
    }

    fn num_actions(&self) -> u32 {
        6
    }

    fn reset(&mut self, seed: u64) -> ObsPayload {
        self.rng = ChaCha12Rng::seed_from_u64(seed);
        let cell = self.rng.random_range(0..(ROWS * COLS));
        self.row = cell / COLS;
        self.col = cell % COLS;
        self.passenger = self.rng.random_range(0..4);
        let offset = self.rng.random_range(1..4u8);
        self.dest = (self.passenger + offset) % 4;
        self.terminal = false;
        ObsPayload::Sym(self.state_symbol())
    }

    fn step(&mut self, action: u32) -> EnvStep {
        assert!(!self.terminal, "step on a terminated episode");
        assert!(action < 6, "taxi action {action} out of range");
        let mut reward = -1.0;
        match action {
            NORTH => self.row = self.row.saturating_sub(1),
            SOUTH => self.row = (self.row + 1).min(ROWS - 1),
            EAST => self.col = (self.col + 1).min(COLS - 1),
            WEST => self.col = self.col.saturating_sub(1),
            PICKUP => {
                if self.passenger < 4 && self.at_depot(self.passenger) {
                    self.passenger = IN_TAXI;
                } else {
                    reward = -10.0;
                }
            }
            DROPOFF => {
                if self.passenger == IN_TAXI && self.at_depot(self.dest) {
                    self.passenger = self.dest;
                    self.terminal = true;
                    reward = 100.0;
                } else {
                    reward = -10.0;
                }
            }
            _ => unreachable!(),
        }
        EnvStep { obs: ObsPayload::Sym(self.state_symbol()), reward, terminal: self.terminal }
    }

    fn reward_bounds(&self) -> (f64, f64) {
        (-10.0, 100.0)
    }

    fn reward_codec(&self) -> RewardCodec {
        RewardCodec::Levels(vec![-10.0, -1.0, 100.0])
    }

    fn obs_bits(&self, obs: &ObsPayload) -> BitString {
        let sym = match obs {
            ObsPayload::Sym(s) => *s,
            other => panic!("taxi observes packed state symbols, got {other:?}"),
        };
        let pos = sym / 20;
        let passenger = (sym % 20) / 4;
        let dest = sym % 4;
        let mut bits = BitString::from_u64(pos as u64, 4);
        bits.extend(&BitString::from_u64(passenger as u64, 3));
        bits.extend(&BitString::from_u64(dest as u64, 2));
        bits
    }

    fn action_name(&self, action: u32) -> String {
        ["North", "South", "East", "West", "Pickup", "Dropoff"][action as usize].to_string()
    }
}
