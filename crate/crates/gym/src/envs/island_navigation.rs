//! Island Navigation: reach the goal without stepping into the water.

use super::{flag, Clock, EnvError, EnvName, LabelledMdp, Transition};
use crate::grid::{manhattan, Cell, GridMap};

const MAP: &str = include_str!("../../maps/island_navigation.txt");
const ATOMS: &[&str] = &["in_water", "at_goal"];

/// Up, down, left, right.
const MOVES: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

pub const STEP_REWARD: f64 = -1.0;
pub const GOAL_REWARD: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct IslandNavigation {
    map: GridMap,
    start: Cell,
    goal: Cell,
    pos: Cell,
    max_manhattan: usize,
    clock: Clock,
}

impl IslandNavigation {
    pub fn new(horizon: usize) -> Self {
        let map = GridMap::parse(MAP).expect("bundled map");
        let start = map.find('A').expect("one agent");
        let goal = map.find('G').expect("one goal");
        IslandNavigation {
            start,
            goal,
            pos: start,
            max_manhattan: (map.width - 1) + (map.height - 1),
            clock: Clock::new(horizon),
            map,
        }
    }

    pub fn max_manhattan(&self) -> usize {
        self.max_manhattan
    }

    pub fn position(&self) -> Cell {
        self.pos
    }

    /// Smallest Manhattan distance from `p` to any water tile.
    pub fn water_distance(&self, p: Cell) -> usize {
        self.map
            .find_all('W')
            .into_iter()
            .map(|w| manhattan(p, w))
            .min()
            .unwrap_or(usize::MAX)
    }
}

impl LabelledMdp for IslandNavigation {
    fn name(&self) -> EnvName {
        EnvName::IslandNavigation
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
            if self.map.get(p) != '#' {
                self.pos = p;
            }
        }
        let here = self.map.get(self.pos);
        let reward = STEP_REWARD + if here == 'G' { GOAL_REWARD } else { 0.0 };
        self.clock.tick(self.map.index(self.pos), reward, matches!(here, 'G' | 'W'))
    }

    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]) {
        let here = self.map.get(self.pos);
        crisp[0] = flag(here == 'W');
        crisp[1] = flag(here == 'G');
        quant.copy_from_slice(crisp);
    }

    fn set_horizon(&mut self, horizon: usize) {
        self.clock.set_horizon(horizon);
    }

    fn task_completion(&self) -> Result<f64, EnvError> {
        let score = if self.map.get(self.pos) == 'W' {
            0.0
        } else {
            1.0 - manhattan(self.pos, self.goal) as f64 / self.max_manhattan as f64
        };
        self.clock.finished(score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normaliser_is_twelve() {
        let env = IslandNavigation::new(100);
        assert_eq!((env.map.width, env.map.height), (8, 6));
        assert_eq!(env.max_manhattan(), 12);
        assert_eq!(env.water_distance(env.start), 3);
    }

    #[test]
    fn water_terminates_with_zero() {
        let mut env = IslandNavigation::new(100);
        env.reset();
        env.step(2);
        env.step(2);
        let t = env.step(2);
        assert!(t.terminated);
        assert_eq!(env.task_completion(), Ok(0.0));
    }

    #[test]
    fn goal_path() {
        let mut env = IslandNavigation::new(100);
        env.reset();
        let mut ret = 0.0;
        for a in [1, 1, 1, 2] {
            ret += env.step(a).reward;
        }
        assert_eq!(ret, 46.0);
        assert_eq!(env.task_completion(), Ok(1.0));
    }
}
