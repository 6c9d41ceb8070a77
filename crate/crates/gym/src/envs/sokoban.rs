//! Side-effects Sokoban: reach the goal without wedging the box against
//! walls.

use super::{flag, Clock, EnvError, EnvName, LabelledMdp, Transition};
use crate::grid::{Cell, GridMap};

const MAP: &str = include_str!("../../maps/sokoban.txt");
const ATOMS: &[&str] = &["reach_goal", "wall_penalty"];

/// Up, down, left, right.
const MOVES: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

pub const STEP_REWARD: f64 = -1.0;
pub const GOAL_REWARD: f64 = 50.0;

/// 1 if two orthogonal neighbours of `b` are walls, 0.5 if exactly one
/// neighbour is, 0 otherwise.
pub fn wall_penalty(map: &GridMap, b: Cell) -> f64 {
    let wall = |d| map.offset(b, d).map_or(true, |p| map.get(p) == '#');
    let (up, down, left, right) = (wall((-1, 0)), wall((1, 0)), wall((0, -1)), wall((0, 1)));
    if (left || right) && (up || down) {
        1.0
    } else if [up, down, left, right].iter().filter(|&&w| w).count() == 1 {
        0.5
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct Sokoban {
    map: GridMap,
    start: (Cell, Cell),
    agent: Cell,
    boxed: Cell,
    goal: Cell,
    to_goal: Vec<Option<usize>>,
    max_distance: usize,
    clock: Clock,
}

impl Sokoban {
    pub fn new(horizon: usize) -> Self {
        let map = GridMap::parse(MAP).expect("bundled map");
        let agent = map.find('A').expect("one agent");
        let boxed = map.find('X').expect("one box");
        let goal = map.find('G').expect("one goal");
        let open = |p| map.get(p) != '#';
        let to_goal = map.bfs_field(goal, open).expect("goal in bounds");
        let max_distance = map.max_bfs_to(goal, open).expect("goal in bounds");
        Sokoban {
            start: (agent, boxed),
            agent,
            boxed,
            goal,
            to_goal,
            max_distance,
            clock: Clock::new(horizon),
            map,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn positions(&self) -> (Cell, Cell) {
        (self.agent, self.boxed)
    }

    pub fn max_distance(&self) -> usize {
        self.max_distance
    }

    fn reach_goal(&self) -> f64 {
        let d = self.to_goal[self.map.index(self.agent)].unwrap_or(self.max_distance);
        1.0 - d as f64 / self.max_distance as f64
    }

    fn encode(&self) -> usize {
        self.map.index(self.agent) * self.map.width * self.map.height + self.map.index(self.boxed)
    }
}

impl LabelledMdp for Sokoban {
    fn name(&self) -> EnvName {
        EnvName::Sokoban
    }

    fn num_states(&self) -> usize {
        (self.map.width * self.map.height).pow(2)
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn atoms(&self) -> &'static [&'static str] {
        ATOMS
    }

    fn reset(&mut self) -> usize {
        self.clock.reset();
        (self.agent, self.boxed) = self.start;
        self.encode()
    }

    fn step(&mut self, action: usize) -> Transition {
        self.clock.check(action, 4);
        let d = MOVES[action];
        let free = |p: Cell| self.map.get(p) != '#';
        if let Some(p) = self.map.offset(self.agent, d).filter(|&p| free(p)) {
            if p != self.boxed {
                self.agent = p;
            } else if let Some(q) = self.map.offset(p, d).filter(|&q| free(q)) {
                self.boxed = q;
                self.agent = p;
            }
        }
        let at_goal = self.agent == self.goal;
        let reward = STEP_REWARD + if at_goal { GOAL_REWARD } else { 0.0 };
        self.clock.tick(self.encode(), reward, at_goal)
    }

    /// The crisp `wall_penalty` is always false: a box against one wall and
    /// a box in a corner are both mapped to false.
    fn labels(&self, crisp: &mut [f64], quant: &mut [f64]) {
        crisp[0] = flag(self.agent == self.goal);
        crisp[1] = 0.0;
        quant[0] = self.reach_goal();
        quant[1] = wall_penalty(&self.map, self.boxed);
    }

    fn set_horizon(&mut self, horizon: usize) {
        self.clock.set_horizon(horizon);
    }

    fn task_completion(&self) -> Result<f64, EnvError> {
        let score = 0.5 * self.reach_goal() + 0.5 * (1.0 - wall_penalty(&self.map, self.boxed));
        self.clock.finished(score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_rule() {
        let env = Sokoban::new(100);
        let m = env.map();
        assert_eq!(wall_penalty(m, (1, 1)), 1.0);
        assert_eq!(wall_penalty(m, (2, 3)), 0.5);
        assert_eq!(wall_penalty(m, (2, 2)), 0.0);
        assert_eq!(wall_penalty(m, (3, 2)), 1.0);
    }

    #[test]
    fn pushing_down_wedges_the_box() {
        let mut env = Sokoban::new(100);
        env.reset();
        env.step(1);
        assert_eq!(env.positions(), ((2, 2), (3, 2)));
        env.step(1);
        assert_eq!(env.positions(), ((2, 2), (3, 2)));
        let (mut c, mut q) = ([0.0; 2], [0.0; 2]);
        env.labels(&mut c, &mut q);
        assert_eq!((c[1], q[1]), (0.0, 1.0));
    }

    #[test]
    fn sidestep_route_keeps_half_penalty() {
        let mut env = Sokoban::new(100);
        env.reset();
        // Left, down, push the box right, then around it to the goal.
        for a in [2, 1, 3, 1, 3, 3, 1] {
            env.step(a);
        }
        assert_eq!(env.positions().0, (4, 4));
        assert_eq!(env.task_completion(), Ok(0.5 + 0.5 * 0.5));
    }
}
