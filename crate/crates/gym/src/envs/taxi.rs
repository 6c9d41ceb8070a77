//! The 5x5 Taxi domain with four depots and interior walls.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{flag, Clock, EnvError, EnvName, LabelledMdp, Transition};
use crate::grid::{Cell, GridMap};

const MAP: &str = include_str!("../../maps/taxi.txt");
const ATOMS: &[&str] = &[
    "reach_goal",
    "at_passenger",
    "hit_wall",
    "has_passenger",
    "at_destination",
    "act_pick_up",
    "act_drop_off",
];

const SIZE: usize = 5;
/// Passenger index meaning "in the taxi".
const IN_TAXI: usize = 4;

pub const SOUTH: usize = 0;
pub const NORTH: usize = 1;
pub const EAST: usize = 2;
pub const WEST: usize = 3;
pub const PICK_UP: usize = 4;
pub const DROP_OFF: usize = 5;

#[derive(Debug, Clone)]
pub struct Taxi {
    /// `open[cell][dir]` for east (0) and west (1).
    open: [[bool; 2]; SIZE * SIZE],
    depots: [Cell; 4],
    /// All-pairs shortest path lengths between cells.
    dist: Vec<Vec<usize>>,
    max_distance: usize,
    taxi: Cell,
    passenger: usize,
    destination: usize,
    had_passenger: bool,
    last_action: Option<usize>,
    hit_wall: bool,
    delivered: bool,
    rng: ChaCha8Rng,
    clock: Clock,
}

impl Taxi {
    pub fn new(seed: u64, horizon: usize) -> Self {
        let map = GridMap::parse(MAP).expect("bundled map");
        let mut open = [[false; 2]; SIZE * SIZE];
        for r in 0..SIZE {
            for c in 0..SIZE {
                open[r * SIZE + c] = [
                    map.get((r + 1, 2 * c + 2)) == ':',
                    map.get((r + 1, 2 * c)) == ':',
                ];
            }
        }
        let depot = |ch| {
            let (r, c) = map.find(ch).expect("depot on map");
            (r - 1, (c - 1) / 2)
        };
        let depots = [depot('R'), depot('G'), depot('Y'), depot('B')];
        let mut taxi = Taxi {
            open,
            depots,
            dist: Vec::new(),
            max_distance: 0,
            taxi: (0, 0),
            passenger: 0,
            destination: 1,
            had_passenger: false,
            last_action: None,
            hit_wall: false,
            delivered: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
            clock: Clock::new(horizon),
        };
        taxi.dist = (0..SIZE * SIZE).map(|i| taxi.bfs((i / SIZE, i % SIZE))).collect();
        taxi.max_distance = taxi.dist.iter().flatten().copied().max().unwrap_or(0);
        taxi
    }

    fn moved(&self, (r, c): Cell, action: usize) -> Cell {
        match action {
            SOUTH => ((r + 1).min(SIZE - 1), c),
            NORTH => (r.saturating_sub(1), c),
            EAST if self.open[r * SIZE + c][0] => (r, c + 1),
            WEST if self.open[r * SIZE + c][1] => (r, c - 1),
            _ => (r, c),
        }
    }

    fn bfs(&self, from: Cell) -> Vec<usize> {
        let mut d = vec![usize::MAX; SIZE * SIZE];
        d[from.0 * SIZE + from.1] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(p) = q.pop_front() {
            for a in [SOUTH, NORTH, EAST, WEST] {
                let n = self.moved(p, a);
                if d[n.0 * SIZE + n.1] == usize::MAX {
                    d[n.0 * SIZE + n.1] = d[p.0 * SIZE + p.1] + 1;
                    q.push_back(n);
                }
            }
        }
        d
    }

    pub fn distance(&self, a: Cell, b: Cell) -> usize {
        self.dist[a.0 * SIZE + a.1][b.0 * SIZE + b.1]
    }

    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    pub fn depots(&self) -> [Cell; 4] {
        self.depots
    }

    fn encode(&self) -> usize {
        ((self.taxi.0 * SIZE + self.taxi.1) * 5 + self.passenger) * 4 + self.destination
    }

    /// Place taxi, passenger (depot index or 4 for "in taxi") and
    /// destination directly.
    pub fn set_state(&mut self, taxi: Cell, passenger: usize, destination: usize) {
        self.taxi = taxi;
        self.passenger = passenger;
        self.destination = destination;
        self.delivered = false;
    }

    fn completion(&self) -> f64 {
        let m = self.max_distance as f64;
        if self.delivered {
            1.0
        } else if self.passenger == IN_TAXI {
            0.5 + 0.5 * (1.0 - self.distance(self.taxi, self.depots[self.destination]) as f64 / m)
        } else {
            0.5 * (1.0 - self.distance(self.taxi, self.depots[self.passenger]) as f64 / m)
        }
    }
}

impl LabelledMdp for Taxi {
    fn name(&self) -> EnvName {
        EnvName::Taxi
    }

    fn num_states(&self) -> usize {
        SIZE * SIZE * 5 * 4
    }

    fn num_actions(&self) -> usize {
        6
    }

    fn atoms(&self) -> &'static [&'static str] {
        ATOMS
    }

    fn reset(&mut self) -> usize {
        self.clock.reset();
        self.taxi = (self.rng.gen_range(0..SIZE), self.rng.gen_range(0..SIZE));
        self.passenger = self.rng.gen_range(0..4);
        self.destination = loop {
            let d = self.rng.gen_range(0..4);
            if d != self.passenger {
                break d;
            }
        };
        self.had_passenger = false;
        self.last_action = None;
        self.hit_wall = false;
        self.delivered = false;
        self.encode()
    }

    fn step(&mut self, action: usize) -> Transition {
        self.clock.check(action, 6);
        self.had_passenger = self.passenger == IN_TAXI;
        self.last_action = Some(action);
        self.hit_wall = false;
        let mut reward = -1.0;
        let mut terminated = false;
        match action {
            PICK_UP => {
                if self.passenger < IN_TAXI && self.taxi == self.depots[self.passenger] {
                    self.passenger = IN_TAXI;
                } else {
                    reward = -10.0;
                }
            }
            DROP_OFF => {
                let here = self.depots.iter().position(|&d| d == self.taxi);
                match (self.passenger == IN_TAXI, here) {
                    (true, Some(i)) if i == self.destination => {
                        self.passenger = i;
                        self.delivered = true;
                        terminated = true;
                        reward = 20.0;
                    }
                    (true, Some(i)) => self.passenger = i,
                    _ => reward = -10.0,
                }
            }
            _ => {
                let next = self.moved(self.taxi, action);
                self.hit_wall = next == self.taxi;
                self.taxi = next;
            }
        }
        self.clock.tick(self.encode(), reward, terminated)
    }

    /// Passenger and position atoms describe the state after the
    /// transition, except `has_passenger`, which describes the state it
    /// started from so that a successful drop-off is not counted against it.
    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]) {
        let at_passenger =
            self.passenger == IN_TAXI || self.taxi == self.depots[self.passenger];
        crisp[0] = flag(self.delivered);
        crisp[1] = flag(at_passenger);
        crisp[2] = flag(self.hit_wall);
        crisp[3] = flag(self.had_passenger);
        crisp[4] = flag(self.taxi == self.depots[self.destination]);
        crisp[5] = flag(self.last_action == Some(PICK_UP));
        crisp[6] = flag(self.last_action == Some(DROP_OFF));
        quant.copy_from_slice(crisp);
    }

    fn set_horizon(&mut self, horizon: usize) {
        self.clock.set_horizon(horizon);
    }

    fn task_completion(&self) -> Result<f64, EnvError> {
        self.clock.finished(self.completion())
    }
}
