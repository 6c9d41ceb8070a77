//! Deterministic (non-slippery) 4x4 Frozen Lake.

use super::{flag, Clock, EnvError, EnvName, LabelledMdp, Transition};
use crate::grid::{Cell, GridMap};

const MAP: &str = include_str!("../../maps/frozen_lake.txt");
const ATOMS: &[&str] = &["reach_goal", "reach_hole"];

/// Left, down, right, up.
const MOVES: [(isize, isize); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

#[derive(Debug, Clone)]
pub struct FrozenLake {
    map: GridMap,
    start: Cell,
    pos: Cell,
    /// BFS distance to the goal around the holes.
    to_goal: Vec<Option<usize>>,
    max_distance: usize,
    clock: Clock,
}

impl FrozenLake {
    pub fn new(horizon: usize) -> Self {
        let map = GridMap::parse(MAP).expect("bundled map");
        let start = map.find('S').expect("one start");
        let goal = map.find('G').expect("one goal");
        let open = |p| map.get(p) != 'H';
        let to_goal = map.bfs_field(goal, open).expect("goal in bounds");
        let max_distance = map.max_bfs_to(goal, open).expect("goal in bounds");
        FrozenLake {
            start,
            pos: start,
            to_goal,
            max_distance,
            clock: Clock::new(horizon),
            map,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    /// Largest BFS distance to the goal; scales task completion.
    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    pub fn position(&self) -> Cell {
        self.pos
    }

    pub fn set_position(&mut self, p: Cell) {
        self.pos = p;
    }

    /// Completion score of standing on `p`.
    pub fn completion_at(&self, p: Cell) -> f64 {
        match (self.map.get(p), self.to_goal[self.map.index(p)]) {
            ('H', _) | (_, None) => 0.0,
            (_, Some(d)) => 1.0 - d as f64 / self.max_distance as f64,
        }
    }
}

impl LabelledMdp for FrozenLake {
    fn name(&self) -> EnvName {
        EnvName::FrozenLake
    }

    fn num_states(&self) -> usize {
        self.map.width * self.map.height
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn atoms(&self) -> &'static [&'static str] {
        ATOMS
    }

    fn reset(&mut self) -> usize {
        self.clock.reset();
        self.pos = self.start;
        self.map.index(self.pos)
    }

    fn step(&mut self, action: usize) -> Transition {
        self.clock.check(action, 4);
        if let Some(p) = self.map.offset(self.pos, MOVES[action]) {
            self.pos = p;
        }
        let here = self.map.get(self.pos);
        let reward = flag(here == 'G');
        self.clock.tick(self.map.index(self.pos), reward, matches!(here, 'G' | 'H'))
    }

    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]) {
        let here = self.map.get(self.pos);
        crisp[0] = flag(here == 'G');
        crisp[1] = flag(here == 'H');
        quant.copy_from_slice(crisp);
    }

    fn set_horizon(&mut self, horizon: usize) {
        self.clock.set_horizon(horizon);
    }

    fn task_completion(&self) -> Result<f64, EnvError> {
        self.clock.finished(self.completion_at(self.pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_is_farthest_from_goal() {
        let env = FrozenLake::new(100);
        assert_eq!(env.max_distance(), 6);
        assert_eq!(env.to_goal[0], Some(6));
    }

    #[test]
    fn hole_ends_with_zero() {
        let mut env = FrozenLake::new(100);
        env.reset();
        assert_eq!(env.task_completion(), Err(EnvError::MidEpisode));
        env.step(2);
        let t = env.step(1);
        assert!(t.terminated && t.reward == 0.0);
        assert_eq!(env.position(), (1, 1));
        assert_eq!(env.task_completion(), Ok(0.0));
    }

    #[test]
    fn walking_off_the_edge_stays_put() {
        let mut env = FrozenLake::new(100);
        env.reset();
        let t = env.step(0);
        assert_eq!(t.state, 0);
        assert!(!t.done());
    }
}
