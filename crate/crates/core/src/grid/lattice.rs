//! Crossings of rectangular boolean lattices.
//!
//! Row 0 is the bottom row, column 0 the left column. "Open" cells are the
//! dense ones. A left-right crossing is a star-connected (8-neighbourhood)
//! path of open cells from column 0 to the last column; its dual is a
//! plus-connected (4-neighbourhood) path of closed cells from the top row to
//! the bottom row. Exactly one of the two exists on every lattice.

use std::collections::VecDeque;

const UNSEEN: u32 = u32::MAX;

/// Row-major boolean lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolLattice {
    rows: usize,
    cols: usize,
    open: Vec<bool>,
}

impl BoolLattice {
    pub fn new(rows: usize, cols: usize, open: Vec<bool>) -> Self {
        assert_eq!(open.len(), rows * cols, "lattice data does not match {rows}x{cols}");
        Self { rows, cols, open }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut open = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                open.push(f(r, c));
            }
        }
        Self { rows, cols, open }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_open(&self, r: usize, c: usize) -> bool {
        self.open[r * self.cols + c]
    }

    /// Neighbours in expansion order: rows ascending, then columns ascending.
    fn neighbours(&self, r: usize, c: usize, star: bool) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        (-1isize..=1)
            .flat_map(|dr| (-1isize..=1).map(move |dc| (dr, dc)))
            .filter(move |&(dr, dc)| (dr, dc) != (0, 0) && (star || dr == 0 || dc == 0))
            .filter_map(move |(dr, dc)| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                (nr >= 0 && nr < rows && nc >= 0 && nc < cols).then_some((nr as usize, nc as usize))
            })
    }

    /// Multi-source BFS distances over cells with `open == want`.
    fn bfs(&self, want: bool, star: bool, sources: impl Iterator<Item = (usize, usize)>) -> Vec<u32> {
        let mut dist = vec![UNSEEN; self.rows * self.cols];
        let mut queue = VecDeque::new();
        for (r, c) in sources {
            if self.is_open(r, c) == want && dist[r * self.cols + c] == UNSEEN {
                dist[r * self.cols + c] = 0;
                queue.push_back((r, c));
            }
        }
        while let Some((r, c)) = queue.pop_front() {
            let d = dist[r * self.cols + c];
            for (nr, nc) in self.neighbours(r, c, star) {
                let i = nr * self.cols + nc;
                if dist[i] == UNSEEN && self.is_open(nr, nc) == want {
                    dist[i] = d + 1;
                    queue.push_back((nr, nc));
                }
            }
        }
        dist
    }

    /// Walks back from `end` to a source, at each step taking the
    /// predecessor (distance one less) that comes first in `(row, col)`
    /// order. Returns the path source-first.
    fn backtrack(&self, dist: &[u32], end: (usize, usize), star: bool) -> Vec<(usize, usize)> {
        let mut path = vec![end];
        let mut cur = end;
        while dist[cur.0 * self.cols + cur.1] > 0 {
            let d = dist[cur.0 * self.cols + cur.1];
            cur = self
                .neighbours(cur.0, cur.1, star)
                .find(|&(r, c)| dist[r * self.cols + c] == d - 1)
                .expect("BFS predecessor must exist");
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Lowermost star-connected left-right crossing of open cells.
    ///
    /// Ends at the lowest reachable cell of the last column and backtracks
    /// through the lowest-row predecessor at each step.
    pub fn lr_star_crossing(&self) -> Option<Vec<(usize, usize)>> {
        if self.rows == 0 || self.cols == 0 {
            return None;
        }
        let dist = self.bfs(true, true, (0..self.rows).map(|r| (r, 0)));
        let last = self.cols - 1;
        let end = (0..self.rows).find(|&r| dist[r * self.cols + last] != UNSEEN)?;
        Some(self.backtrack(&dist, (end, last), true))
    }

    /// Leftmost plus-connected top-bottom crossing of closed cells, listed
    /// from the top row down.
    pub fn tb_plus_closed_crossing(&self) -> Option<Vec<(usize, usize)>> {
        if self.rows == 0 || self.cols == 0 {
            return None;
        }
        let top = self.rows - 1;
        let dist = self.bfs(false, false, (0..self.cols).map(|c| (top, c)));
        let end = (0..self.cols).find(|&c| dist[c] != UNSEEN)?;
        Some(self.backtrack(&dist, (0, end), false))
    }
}
