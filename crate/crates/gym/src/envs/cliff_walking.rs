//! 4x12 Cliff Walking. Stepping onto the cliff ends the episode.

use super::{flag, Clock, EnvError, EnvName, LabelledMdp, Transition};
use crate::grid::{Cell, GridMap};

const MAP: &str = include_str!("../../maps/cliff_walking.txt");
const ATOMS: &[&str] = &["reach_goal", "reach_cliff"];

pub const STEP_REWARD: f64 = -1.0;
pub const CLIFF_REWARD: f64 = -100.0;

/// Up, right, down, left.
const MOVES: [(isize, isize); 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

#[derive(Debug, Clone)]
pub struct CliffWalking {
    map: GridMap,
    start: Cell,
    pos: Cell,
    to_goal: Vec<Option<usize>>,
    max_distance: usize,
    clock: Clock,
}

impl CliffWalking {
    pub fn new(horizon: usize) -> Self {
        let map = GridMap::parse(MAP).expect("bundled map");
        let start = map.find('S').expect("one start");
        let goal = map.find('G').expect("one goal");
        let open = |p| map.get(p) != 'C';
        let to_goal = map.bfs_field(goal, open).expect("goal in bounds");
        let max_distance = map.max_bfs_to(goal, open).expect("goal in bounds");
        CliffWalking {
            start,
            pos: start,
            to_goal,
            max_distance,
            clock: Clock::new(horizon),
            map,
        }
    }

    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    pub fn position(&self) -> Cell {
        self.pos
    }

    /// Observation id to `(row, col)`.
    pub fn decode(obs: usize) -> Cell {
        (obs / 12, obs % 12)
    }
}

impl LabelledMdp for CliffWalking {
    fn name(&self) -> EnvName {
        EnvName::CliffWalking
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
        let reward = if here == 'C' { CLIFF_REWARD } else { STEP_REWARD };
        self.clock.tick(self.map.index(self.pos), reward, matches!(here, 'G' | 'C'))
    }

    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]) {
        let here = self.map.get(self.pos);
        crisp[0] = flag(here == 'G');
        crisp[1] = flag(here == 'C');
        quant.copy_from_slice(crisp);
    }

    fn set_horizon(&mut self, horizon: usize) {
        self.clock.set_horizon(horizon);
    }

    fn task_completion(&self) -> Result<f64, EnvError> {
        let score = match self.to_goal[self.map.index(self.pos)] {
            Some(d) if self.map.get(self.pos) != 'C' => {
                1.0 - d as f64 / self.max_distance as f64
            }
            _ => 0.0,
        };
        self.clock.finished(score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observation_decoding() {
        assert_eq!(CliffWalking::decode(37), (3, 1));
    }

    #[test]
    fn cliff_costs_a_hundred_and_ends() {
        let mut env = CliffWalking::new(100);
        assert_eq!(env.reset(), 36);
        let t = env.step(1);
        assert_eq!((t.reward, t.terminated), (-100.0, true));
        assert_eq!(env.task_completion(), Ok(0.0));
    }

    #[test]
    fn safe_path_reaches_goal() {
        let mut env = CliffWalking::new(100);
        env.reset();
        let mut ret = 0.0;
        for a in std::iter::once(0).chain(std::iter::repeat(1).take(11)).chain([2]) {
            ret += env.step(a).reward;
        }
        assert_eq!(ret, -13.0);
        assert_eq!(env.task_completion(), Ok(1.0));
        assert_eq!(env.max_distance(), 14);
    }
}
