//! ASCII map assets and shortest-path helpers.

use std::collections::VecDeque;

use thiserror::Error;

/// `(row, col)`, 0-indexed from the top-left.
pub type Cell = (usize, usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("map asset has no '---' separator after its header")]
    MissingSeparator,
    #[error("map rows have unequal widths (row {row} has {got}, expected {expected})")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("map has no rows")]
    Empty,
    #[error("cell ({0}, {1}) is outside the map")]
    OutOfBounds(usize, usize),
    #[error("map has {0} '{1}' cells, expected exactly one")]
    Unique(usize, char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub name: String,
    pub width: usize,
    pub height: usize,
    cells: Vec<char>,
}

impl GridMap {
    /// Parse an asset: `key: value` header lines, a `---` line, then rows.
    pub fn parse(src: &str) -> Result<Self, GridError> {
        let mut lines = src.lines();
        let mut name = String::new();
        loop {
            let l = lines.next().ok_or(GridError::MissingSeparator)?;
            if l.trim() == "---" {
                break;
            }
            if let Some(v) = l.strip_prefix("name:") {
                name = v.trim().to_string();
            }
        }
        let rows: Vec<Vec<char>> = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.chars().collect())
            .collect();
        let width = rows.first().ok_or(GridError::Empty)?.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(GridError::Ragged { row, got: r.len(), expected: width });
            }
        }
        Ok(GridMap {
            name,
            width,
            height: rows.len(),
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, (r, c): Cell) -> char {
        self.cells[r * self.width + c]
    }

    pub fn in_bounds(&self, (r, c): Cell) -> bool {
        r < self.height && c < self.width
    }

    pub fn index(&self, (r, c): Cell) -> usize {
        r * self.width + c
    }

    pub fn cell(&self, index: usize) -> Cell {
        (index / self.width, index % self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| (r, c)))
    }

    pub fn find_all(&self, ch: char) -> Vec<Cell> {
        self.cells().filter(|&p| self.get(p) == ch).collect()
    }

    pub fn find(&self, ch: char) -> Result<Cell, GridError> {
        match self.find_all(ch).as_slice() {
            [p] => Ok(*p),
            v => Err(GridError::Unique(v.len(), ch)),
        }
    }

    /// Neighbour one step away in direction `(dr, dc)`, if inside the map.
    pub fn offset(&self, (r, c): Cell, (dr, dc): (isize, isize)) -> Option<Cell> {
        let nr = r.checked_add_signed(dr)?;
        let nc = c.checked_add_signed(dc)?;
        self.in_bounds((nr, nc)).then_some((nr, nc))
    }

    /// 4-connected BFS distances from `from` to every cell, `None` where
    /// unreachable. `passable` decides which cells may be entered.
    pub fn bfs_field(
        &self,
        from: Cell,
        passable: impl Fn(Cell) -> bool,
    ) -> Result<Vec<Option<usize>>, GridError> {
        if !self.in_bounds(from) {
            return Err(GridError::OutOfBounds(from.0, from.1));
        }
        let mut dist = vec![None; self.cells.len()];
        dist[self.index(from)] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)].expect("queued cells have a distance");
            for dir in DIRECTIONS {
                if let Some(q) = self.offset(p, dir) {
                    if dist[self.index(q)].is_none() && passable(q) {
                        dist[self.index(q)] = Some(d + 1);
                        queue.push_back(q);
                    }
                }
            }
        }
        Ok(dist)
    }

    /// Shortest path length between two cells, `Ok(None)` if unreachable.
    pub fn bfs_distance(
        &self,
        from: Cell,
        to: Cell,
        passable: impl Fn(Cell) -> bool,
    ) -> Result<Option<usize>, GridError> {
        if !self.in_bounds(to) {
            return Err(GridError::OutOfBounds(to.0, to.1));
        }
        Ok(self.bfs_field(from, passable)?[self.index(to)])
    }

    /// Largest finite BFS distance from any passable cell to `to`.
    pub fn max_bfs_to(&self, to: Cell, passable: impl Fn(Cell) -> bool) -> Result<usize, GridError> {
        Ok(self
            .bfs_field(to, passable)?
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0))
    }
}

/// Up, down, left, right.
pub const DIRECTIONS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

pub fn manhattan(a: Cell, b: Cell) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOX: &str = "name: box\n---\n#####\n#.#.#\n#####\n";

    #[test]
    fn parses_header_and_rows() {
        let m = GridMap::parse(BOX).unwrap();
        assert_eq!((m.name.as_str(), m.width, m.height), ("box", 5, 3));
        assert_eq!(m.get((1, 1)), '.');
        assert_eq!(m.find_all('.'), vec![(1, 1), (1, 3)]);
    }

    #[test]
    fn rejects_bad_assets() {
        assert_eq!(GridMap::parse("ab\n"), Err(GridError::MissingSeparator));
        assert!(matches!(
            GridMap::parse("---\nab\nabc\n"),
            Err(GridError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn bfs_basics() {
        let m = GridMap::parse(BOX).unwrap();
        let open = |p| m.get(p) != '#';
        assert_eq!(m.bfs_distance((1, 1), (1, 1), open), Ok(Some(0)));
        assert_eq!(m.bfs_distance((1, 1), (1, 3), open), Ok(None));
        assert_eq!(m.bfs_distance((1, 1), (7, 0), open), Err(GridError::OutOfBounds(7, 0)));
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan((0, 0), (3, 3)), 6);
        assert_eq!(manhattan((2, 5), (2, 5)), 0);
    }
}
