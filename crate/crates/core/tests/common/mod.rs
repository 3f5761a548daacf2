//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use bridgeham::cycle::{small_cycle, CycleState};
use bridgeham::grid::{adjacent, Adjacency, BoolLattice, Cell, GridState, Orientation, Rect};
use bridgeham::sampling::Point;
use rand::Rng;

/// Cells reachable from `sources` through cells with `ok`, by explicit-stack
/// DFS over every neighbour.
pub fn reach(
    rows: usize,
    cols: usize,
    ok: impl Fn(usize, usize) -> bool,
    sources: impl IntoIterator<Item = (usize, usize)>,
    star: bool,
) -> Vec<Vec<bool>> {
    let mut seen = vec![vec![false; cols]; rows];
    let mut stack: Vec<(usize, usize)> = sources.into_iter().filter(|&(r, c)| ok(r, c)).collect();
    for &(r, c) in &stack {
        seen[r][c] = true;
    }
    while let Some((r, c)) = stack.pop() {
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if (dr, dc) == (0, 0) || (!star && dr != 0 && dc != 0) {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if !seen[nr][nc] && ok(nr, nc) {
                    seen[nr][nc] = true;
                    stack.push((nr, nc));
                }
            }
        }
    }
    seen
}

/// Checks a path: distinct cells, each satisfying `ok`, consecutive ones
/// adjacent under `mode`.
pub fn check_path(cells: &[Cell], mode: Adjacency, ok: impl Fn(Cell) -> bool) -> Result<(), String> {
    if cells.is_empty() {
        return Err("empty path".into());
    }
    let distinct: BTreeSet<Cell> = cells.iter().copied().collect();
    if distinct.len() != cells.len() {
        return Err(format!("path repeats a cell: {cells:?}"));
    }
    if let Some(c) = cells.iter().find(|&&c| !ok(c)) {
        return Err(format!("path cell {c:?} has the wrong state"));
    }
    if let Some(w) = cells.windows(2).find(|w| !adjacent(w[0], w[1], mode)) {
        return Err(format!("{:?} and {:?} are not {mode:?}-adjacent", w[0], w[1]));
    }
    Ok(())
}

/// Full oracle comparison for one rectangle: existence, validity and the
/// canonical endpoint of the dense crossing and of its sparse dual, plus
/// the duality (exactly one of the two exists).
pub fn check_rect(g: &GridState, rect: Rect) -> Result<(), String> {
    let k = g.k();
    let base = rect.index * rect.width;
    let top = base + rect.width - 1;
    let inside = |r: usize, c: usize| rect.contains(Cell::new(r, c));
    let dense = |r: usize, c: usize| inside(r, c) && g.is_dense(Cell::new(r, c));
    let sparse = |r: usize, c: usize| inside(r, c) && !g.is_dense(Cell::new(r, c));

    let crossing = bridgeham::grid::find_crossing(g, rect).map_err(|e| e.to_string())?;
    let dual = bridgeham::grid::sparse_dual_crossing(g, rect).map_err(|e| e.to_string())?;
    if crossing.is_some() == dual.is_some() {
        return Err(format!("{rect:?}: crossing {} and dual {}", crossing.is_some(), dual.is_some()));
    }

    match rect.orientation {
        Orientation::Horizontal => {
            let seen = reach(k, k, dense, (base..=top).map(|r| (r, 0)), true);
            let lowest_exit = (base..=top).find(|&r| seen[r][k - 1]);
            match (&crossing, lowest_exit) {
                (None, None) => {}
                (Some(x), Some(exit)) => {
                    check_path(&x.cells, Adjacency::Star, |c| dense(c.row, c.col))?;
                    let (first, last) = (x.cells[0], *x.cells.last().unwrap());
                    if first.col != 0 || last != Cell::new(exit, k - 1) {
                        return Err(format!("{rect:?}: path {first:?}..{last:?}, lowest exit row {exit}"));
                    }
                }
                (x, exit) => return Err(format!("{rect:?}: crossing {} but oracle exit {exit:?}", x.is_some())),
            }
            let seen = reach(k, k, sparse, (0..k).map(|c| (top, c)), false);
            let first_bottom = (0..k).find(|&c| seen[base][c]);
            match (&dual, first_bottom) {
                (None, None) => {}
                (Some(d), Some(col)) => {
                    check_path(d, Adjacency::Plus, |c| sparse(c.row, c.col))?;
                    if d[0].row != top || *d.last().unwrap() != Cell::new(base, col) {
                        return Err(format!("{rect:?}: dual {:?}..{:?}, leftmost bottom col {col}", d[0], d.last()));
                    }
                }
                (d, col) => return Err(format!("{rect:?}: dual {} but oracle {col:?}", d.is_some())),
            }
        }
        Orientation::Vertical => {
            let seen = reach(k, k, dense, (base..=top).map(|c| (k - 1, c)), true);
            let leftmost_exit = (base..=top).find(|&c| seen[0][c]);
            match (&crossing, leftmost_exit) {
                (None, None) => {}
                (Some(x), Some(exit)) => {
                    check_path(&x.cells, Adjacency::Star, |c| dense(c.row, c.col))?;
                    let (first, last) = (x.cells[0], *x.cells.last().unwrap());
                    if first.row != k - 1 || last != Cell::new(0, exit) {
                        return Err(format!("{rect:?}: path {first:?}..{last:?}, leftmost exit col {exit}"));
                    }
                }
                (x, exit) => return Err(format!("{rect:?}: crossing {} but oracle exit {exit:?}", x.is_some())),
            }
            let seen = reach(k, k, sparse, (0..k).map(|r| (r, top)), false);
            let top_left = (0..k).rev().find(|&r| seen[r][base]);
            match (&dual, top_left) {
                (None, None) => {}
                (Some(d), Some(row)) => {
                    check_path(d, Adjacency::Plus, |c| sparse(c.row, c.col))?;
                    if d[0] != Cell::new(row, base) || d.last().unwrap().col != top {
                        return Err(format!("{rect:?}: dual {:?}..{:?}, topmost left row {row}", d[0], d.last()));
                    }
                }
                (d, row) => return Err(format!("{rect:?}: dual {} but oracle {row:?}", d.is_some())),
            }
        }
    }
    Ok(())
}

/// Random `k x k` grid with each tile dense with probability `p`.
pub fn random_grid(rng: &mut impl Rng, k: usize, p: f64) -> GridState {
    let counts: Vec<usize> = (0..k * k).map(|_| usize::from(rng.gen_bool(p))).collect();
    GridState::from_counts(k, 1, &counts).unwrap()
}

/// Divisors of `k` that are at most `max`.
pub fn divisors_up_to(k: usize, max: usize) -> Vec<usize> {
    (1..=k.min(max)).filter(|&d| k.is_multiple_of(d)).collect()
}

/// Checks every strip of both partitions of width `m`.
pub fn check_all_rects(g: &GridState, m: usize) -> Result<(), String> {
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        for index in 0..g.k() / m {
            check_rect(g, Rect { orientation, index, width: m })?;
        }
    }
    Ok(())
}

/// Lattice-level oracle for an arbitrary `rows x cols` shape.
pub fn check_lattice(l: &BoolLattice) -> Result<(), String> {
    let (rows, cols) = (l.rows(), l.cols());
    let seen = reach(rows, cols, |r, c| l.is_open(r, c), (0..rows).map(|r| (r, 0)), true);
    let exit = (0..rows).find(|&r| seen[r][cols - 1]);
    let lr = l.lr_star_crossing();
    let tb = l.tb_plus_closed_crossing();
    if lr.is_some() == tb.is_some() {
        return Err(format!("{rows}x{cols}: primal {} and dual {}", lr.is_some(), tb.is_some()));
    }
    match (&lr, exit) {
        (None, None) => {}
        (Some(p), Some(e)) => {
            let cells: Vec<Cell> = p.iter().map(|&(r, c)| Cell::new(r, c)).collect();
            check_path(&cells, Adjacency::Star, |c| l.is_open(c.row, c.col))?;
            if p[0].1 != 0 || *p.last().unwrap() != (e, cols - 1) {
                return Err(format!("{rows}x{cols}: lr path ends {:?}, oracle exit row {e}", p.last()));
            }
        }
        (p, e) => return Err(format!("{rows}x{cols}: lr {} but oracle {e:?}", p.is_some())),
    }
    let seen = reach(rows, cols, |r, c| !l.is_open(r, c), (0..cols).map(|c| (rows - 1, c)), false);
    let exit = (0..cols).find(|&c| seen[0][c]);
    match (&tb, exit) {
        (None, None) => {}
        (Some(p), Some(e)) => {
            let cells: Vec<Cell> = p.iter().map(|&(r, c)| Cell::new(r, c)).collect();
            check_path(&cells, Adjacency::Plus, |c| !l.is_open(c.row, c.col))?;
            if p[0].0 != rows - 1 || *p.last().unwrap() != (0, e) {
                return Err(format!("{rows}x{cols}: tb path ends {:?}, oracle exit col {e}", p.last()));
            }
        }
        (p, e) => return Err(format!("{rows}x{cols}: tb {} but oracle {e:?}", p.is_some())),
    }
    Ok(())
}

/// Star-connected dense components by flood fill, numbered in row-major
/// order of their first cell.
pub fn flood_components(g: &GridState) -> Vec<Option<usize>> {
    let k = g.k();
    let mut label: Vec<Option<usize>> = vec![None; k * k];
    let mut next = 0;
    for start in 0..k * k {
        let c = Cell::new(start / k, start % k);
        if !g.is_dense(c) || label[start].is_some() {
            continue;
        }
        let seen = reach(k, k, |r, col| g.is_dense(Cell::new(r, col)), [(c.row, c.col)], true);
        for (r, row) in seen.iter().enumerate() {
            for (col, &s) in row.iter().enumerate() {
                if s {
                    label[r * k + col] = Some(next);
                }
            }
        }
        next += 1;
    }
    label
}

/// Re-walks a cyclic order: every index in `0..n` exactly once.
pub fn check_hamiltonian(order: &[usize], n: usize) -> Result<(), String> {
    if order.len() != n {
        return Err(format!("cycle has {} nodes, expected {n}", order.len()));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(format!("node {v} is out of range or repeated"));
        }
    }
    Ok(())
}

/// Undirected ring edges as sorted pairs.
pub fn ring_edges(order: &[usize]) -> BTreeSet<(usize, usize)> {
    let m = order.len();
    (0..m)
        .map(|i| {
            let (a, b) = (order[i], order[(i + 1) % m]);
            (a.min(b), a.max(b))
        })
        .collect()
}

pub fn undirected(pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
    pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
}

/// `m` points on a circle of radius `0.3 t` around the centre of `cell`
/// on a grid of side `t`, starting at angle `phase`, optionally clockwise.
pub fn ring_points(cell: Cell, t: f64, m: usize, phase: f64, clockwise: bool) -> Vec<Point> {
    let cx = -0.5 + (cell.col as f64 + 0.5) * t;
    let cy = -0.5 + (cell.row as f64 + 0.5) * t;
    (0..m)
        .map(|i| {
            let sign = if clockwise { -1.0 } else { 1.0 };
            let a = phase + sign * std::f64::consts::TAU * i as f64 / m as f64;
            Point::new(cx + 0.3 * t * a.cos(), cy + 0.3 * t * a.sin())
        })
        .collect()
}

/// Outcome of one exhaustive merge/attach configuration.
#[derive(Debug, Default, Clone, Copy)]
pub struct MergeTally {
    pub configurations: usize,
    pub straight: usize,
    pub reversed: usize,
}

const T: f64 = 0.25;
const ANCHOR: Cell = Cell::new(1, 1);
const NEIGHBOURS: [Cell; 3] = [Cell::new(1, 2), Cell::new(2, 2), Cell::new(2, 1)];
const PHASES: [f64; 4] = [0.0, 0.7, 1.9, 3.4];

/// Every merge of an anchor cycle (3 to 6 nodes) with an incoming cycle
/// (3 to 6 nodes) across side and corner neighbours, several placements
/// and both winding directions. Checks the single-cycle output, exact
/// coverage, the edge identity `|tau'| = |tau| + |eta|`, that exactly the
/// removed and added edges changed, and that the pairing minimises the
/// longer added edge.
pub fn exhaustive_merges() -> Result<MergeTally, String> {
    let mut tally = MergeTally::default();
    for a in 3..=6 {
        for b in 3..=6 {
            for &nb in &NEIGHBOURS {
                for &pa in &PHASES {
                    for &pb in &PHASES {
                        for cw in [false, true] {
                            merge_case(a, b, nb, pa, pb, cw, &mut tally)?;
                        }
                    }
                }
            }
        }
    }
    Ok(tally)
}

fn merge_case(a: usize, b: usize, nb: Cell, pa: f64, pb: f64, cw: bool, tally: &mut MergeTally) -> Result<(), String> {
    let ctx = format!("merge a={a} b={b} nb={nb:?} phases=({pa},{pb}) cw={cw}");
    let mut points = ring_points(ANCHOR, T, a, pa, false);
    points.extend(ring_points(nb, T, b, pb, cw));
    let n = a + b;
    let tau = small_cycle(ANCHOR, &(0..a).collect::<Vec<_>>()).unwrap();
    let eta = small_cycle(nb, &(a..n).collect::<Vec<_>>()).unwrap();
    let mut st = CycleState::new(n);
    st.seed(&tau).map_err(|e| format!("{ctx}: {e}"))?;
    let before = ring_edges(&st.order());
    let candidates: Vec<(usize, usize)> = st.surviving(ANCHOR).to_vec();
    st.merge_cycles(&eta, ANCHOR, &points).map_err(|e| format!("{ctx}: {e}"))?;

    let order = st.order();
    check_hamiltonian(&order, n).map_err(|e| format!("{ctx}: {e}"))?;
    if (0..n).any(|v| st.ring_from(v).len() != n) {
        return Err(format!("{ctx}: more than one ring"));
    }
    let after = ring_edges(&order);
    if after.len() != a + b {
        return Err(format!("{ctx}: {} edges, expected {}", after.len(), a + b));
    }
    let eta_edges = undirected(eta.edges());
    let removed_eta = (a, a + 1);
    let kept: BTreeSet<_> = before.union(&eta_edges).copied().filter(|e| after.contains(e)).collect();
    let gone: Vec<_> = before.union(&eta_edges).copied().filter(|e| !after.contains(e)).collect();
    let added: Vec<_> = after.difference(&kept).copied().collect();
    if gone.len() != 2 || !gone.contains(&removed_eta) || added.len() != 2 {
        return Err(format!("{ctx}: removed {gone:?}, added {added:?}"));
    }
    let anchor_edge = *gone.iter().find(|&&e| e != removed_eta).unwrap();
    if !undirected(candidates.iter().copied()).contains(&anchor_edge) {
        return Err(format!("{ctx}: removed {anchor_edge:?} which is not an anchor edge"));
    }
    if added.iter().any(|&(x, y)| (x < a) == (y < a)) {
        return Err(format!("{ctx}: added edge inside one tile: {added:?}"));
    }
    let longest = added.iter().map(|&(x, y)| points[x].dist(&points[y])).fold(0.0, f64::max);
    let mut best = f64::INFINITY;
    for &(u, v) in &candidates {
        for (p, q) in [(a + 1, a), (a, a + 1)] {
            best = best.min(points[u].dist(&points[p]).max(points[v].dist(&points[q])));
        }
    }
    if (longest - best).abs() > 1e-12 {
        return Err(format!("{ctx}: longer added edge {longest}, optimum {best}"));
    }
    // Which cross pairing was used: does e1 (= a + 1) join the lower anchor node?
    let (u, _) = anchor_edge;
    if added.contains(&(u.min(a + 1), u.max(a + 1))) {
        tally.straight += 1;
    } else {
        tally.reversed += 1;
    }
    if st.removed_count(ANCHOR) != 1 || st.removed_count(nb) != 1 {
        return Err(format!("{ctx}: removal counts {} / {}", st.removed_count(ANCHOR), st.removed_count(nb)));
    }
    if st.surviving(ANCHOR).len() != a - 1 || st.surviving(nb).len() != b - 1 {
        return Err(format!("{ctx}: surviving ledger sizes wrong"));
    }
    for &(x, y) in st.surviving(ANCHOR).iter().chain(st.surviving(nb)) {
        if !st.has_edge(x, y) {
            return Err(format!("{ctx}: ledger edge ({x}, {y}) is not on the cycle"));
        }
    }
    if st.added_edges().len() != 2 {
        return Err(format!("{ctx}: {} added edges recorded", st.added_edges().len()));
    }
    tally.configurations += 1;
    Ok(())
}

/// Every attachment of a sparse path (1 to 4 nodes) to an anchor cycle
/// (3 to 6 nodes), in both path orientations. Checks single-cycle output,
/// coverage, `|tau'| = |tau| + p`, and that the path's internal edges are
/// kept in order.
pub fn exhaustive_attachments() -> Result<MergeTally, String> {
    let mut tally = MergeTally::default();
    for a in 3..=6 {
        for p in 1..=4 {
            for &nb in &NEIGHBOURS {
                for &pa in &PHASES {
                    for &pb in &PHASES {
                        for cw in [false, true] {
                            attach_case(a, p, nb, pa, pb, cw, &mut tally)?;
                        }
                    }
                }
            }
        }
    }
    Ok(tally)
}

fn attach_case(a: usize, p: usize, nb: Cell, pa: f64, pb: f64, cw: bool, tally: &mut MergeTally) -> Result<(), String> {
    let ctx = format!("attach a={a} p={p} nb={nb:?} phases=({pa},{pb}) cw={cw}");
    let mut points = ring_points(ANCHOR, T, a, pa, false);
    // Spread the path on a circle of its own; a single node sits off centre.
    points.extend(ring_points(nb, T, p.max(2), pb, cw).into_iter().take(p));
    let n = a + p;
    let tau = small_cycle(ANCHOR, &(0..a).collect::<Vec<_>>()).unwrap();
    let mut st = CycleState::new(n);
    st.seed(&tau).map_err(|e| format!("{ctx}: {e}"))?;
    let before = ring_edges(&st.order());
    let path: Vec<usize> = (a..n).collect();
    st.attach_path(nb, &path, ANCHOR, &points).map_err(|e| format!("{ctx}: {e}"))?;
    let order = st.order();
    check_hamiltonian(&order, n).map_err(|e| format!("{ctx}: {e}"))?;
    let after = ring_edges(&order);
    if after.len() != a + p {
        return Err(format!("{ctx}: {} edges, expected {}", after.len(), a + p));
    }
    let internal = undirected(path.windows(2).map(|w| (w[0], w[1])));
    if !internal.is_subset(&after) {
        return Err(format!("{ctx}: path edges not kept"));
    }
    let gone: Vec<_> = before.difference(&after).copied().collect();
    if gone.len() != 1 {
        return Err(format!("{ctx}: removed {gone:?}"));
    }
    let (u, v) = gone[0];
    let (first, last) = (a, n - 1);
    let straight = after.contains(&(u.min(first), u.max(first))) && after.contains(&(v.min(last), v.max(last)));
    let crossed = after.contains(&(u.min(last), u.max(last))) && after.contains(&(v.min(first), v.max(first)));
    if !(straight || crossed) {
        return Err(format!("{ctx}: path ends not joined to the removed edge's nodes"));
    }
    if p > 1 {
        if straight {
            tally.straight += 1;
        } else {
            tally.reversed += 1;
        }
    }
    if st.removed_count(ANCHOR) != 1 || st.surviving(ANCHOR).len() != a - 1 {
        return Err(format!("{ctx}: ledger not updated"));
    }
    tally.configurations += 1;
    Ok(())
}
