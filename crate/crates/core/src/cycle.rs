//! Cycle construction: small cycles inside dense tiles, iterative merging
//! across the backbone component, attachment of sparse-tile paths, and
//! checking the result against the bridged-Hamiltonian definition.
//!
//! The working cycle is a doubly linked ring over node indices, so every
//! merge is O(size of the inserted piece). Several disjoint rings may coexist
//! in one [`CycleState`]; best-effort completion relies on that.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Backbone, Cell, GridState};
use crate::sampling::{Instance, Point};

const NONE: usize = usize::MAX;

/// Removal budget per dense tile: one small-cycle edge per star neighbour.
pub const MAX_REMOVALS_PER_CELL: usize = 8;

/// A cross edge added while merging, with its length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AddedEdge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Working cycle plus the per-tile ledger of surviving small-cycle edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleState {
    succ: Vec<usize>,
    pred: Vec<usize>,
    covered: usize,
    surviving: BTreeMap<Cell, Vec<(usize, usize)>>,
    removed_count: BTreeMap<Cell, usize>,
    added_edges: Vec<AddedEdge>,
}

impl CycleState {
    /// Empty state over a universe of `n` node indices.
    pub fn new(n: usize) -> Self {
        Self {
            succ: vec![NONE; n],
            pred: vec![NONE; n],
            covered: 0,
            surviving: BTreeMap::new(),
            removed_count: BTreeMap::new(),
            added_edges: Vec::new(),
        }
    }

    /// State holding the single cycle `order` (no ledger entries).
    pub fn from_cycle(n: usize, order: &[usize]) -> Result<Self> {
        let mut s = Self::new(n);
        s.insert_ring(order)?;
        Ok(s)
    }

    fn insert_ring(&mut self, order: &[usize]) -> Result<()> {
        if order.is_empty() {
            return Ok(());
        }
        for &v in order {
            if v >= self.succ.len() || self.contains(v) {
                return Err(Error::Internal(format!("node {v} is out of range or already on a cycle")));
            }
            self.succ[v] = v;
        }
        for w in 0..order.len() {
            let (a, b) = (order[w], order[(w + 1) % order.len()]);
            self.succ[a] = b;
            self.pred[b] = a;
        }
        self.covered += order.len();
        Ok(())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.succ.get(v).is_some_and(|&s| s != NONE)
    }

    /// Number of nodes on cycles.
    pub fn len(&self) -> usize {
        self.covered
    }

    pub fn is_empty(&self) -> bool {
        self.covered == 0
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.contains(a) && self.contains(b) && (self.succ[a] == b || self.succ[b] == a)
    }

    /// The ring through `start`, following successors.
    pub fn ring_from(&self, start: usize) -> Vec<usize> {
        if !self.contains(start) {
            return Vec::new();
        }
        let mut out = vec![start];
        let mut v = self.succ[start];
        while v != start {
            out.push(v);
            v = self.succ[v];
        }
        out
    }

    /// The ring through the lowest covered node index.
    pub fn order(&self) -> Vec<usize> {
        (0..self.succ.len()).find(|&v| self.contains(v)).map_or_else(Vec::new, |s| self.ring_from(s))
    }

    /// Replaces the ring edge between `u` and `v` by `u -> path[0] .. path[last] -> v`.
    ///
    /// `path` nodes must not be on any ring yet. For a path of `p` nodes the
    /// ring grows by `p` edges.
    pub fn splice(&mut self, u: usize, v: usize, path: &[usize]) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::Internal(format!("edge ({u}, {v}) is not on the working cycle")));
        }
        if path.is_empty() {
            return Err(Error::Precondition("cannot splice an empty path".into()));
        }
        for (w, &x) in path.iter().enumerate() {
            if x >= self.succ.len() || self.contains(x) || path[..w].contains(&x) {
                return Err(Error::Internal(format!("path node {x} is out of range, repeated or already covered")));
            }
        }
        // Orient so that u -> v along successors.
        let (u, v) = if self.succ[u] == v { (u, v) } else { (v, u) };
        let mut prev = u;
        for &x in path {
            self.succ[prev] = x;
            self.pred[x] = prev;
            prev = x;
        }
        self.succ[prev] = v;
        self.pred[v] = prev;
        self.covered += path.len();
        Ok(())
    }

    /// Registers `eta` as a fresh ring for tile `cell`.
    pub fn seed(&mut self, eta: &SmallCycle) -> Result<()> {
        self.insert_ring(&eta.nodes)?;
        self.surviving.insert(eta.cell, eta.edges().collect());
        self.removed_count.insert(eta.cell, 0);
        Ok(())
    }

    pub fn surviving(&self, cell: Cell) -> &[(usize, usize)] {
        self.surviving.get(&cell).map_or(&[], Vec::as_slice)
    }

    pub fn removed_count(&self, cell: Cell) -> usize {
        self.removed_count.get(&cell).copied().unwrap_or(0)
    }

    pub fn removed_counts(&self) -> &BTreeMap<Cell, usize> {
        &self.removed_count
    }

    pub fn added_edges(&self) -> &[AddedEdge] {
        &self.added_edges
    }

    fn add_edge(&mut self, points: &[Point], i: usize, j: usize) {
        self.added_edges.push(AddedEdge { i, j, length: points[i].dist(&points[j]) });
    }

    /// Picks the anchor edge `(u, v)` and orientation of `path` that minimise
    /// the longer of the two added edges; ties go to the earliest candidate.
    fn best_splice(&self, anchor: Cell, path: &[usize], points: &[Point]) -> Result<(usize, (usize, usize), bool)> {
        let edges = self.surviving(anchor);
        if edges.is_empty() {
            return Err(Error::Internal(format!(
                "tile {anchor:?} has no surviving small-cycle edge (requires L >= 9)"
            )));
        }
        let (first, last) = (path[0], path[path.len() - 1]);
        let mut best: Option<(f64, usize, (usize, usize), bool)> = None;
        for (slot, &(u, v)) in edges.iter().enumerate() {
            if !self.has_edge(u, v) {
                return Err(Error::Internal(format!("ledger lists ({u}, {v}) for {anchor:?} but it is gone")));
            }
            // Same orientation `splice` will use: u -> v along successors.
            let (u, v) = if self.succ[u] == v { (u, v) } else { (v, u) };
            for reversed in [false, true] {
                let (a, b) = if reversed { (last, first) } else { (first, last) };
                let cost = points[u].dist(&points[a]).max(points[v].dist(&points[b]));
                if best.is_none_or(|(c, ..)| cost < c) {
                    best = Some((cost, slot, (u, v), reversed));
                }
            }
        }
        let (_, slot, edge, reversed) = best.expect("at least one candidate");
        Ok((slot, edge, reversed))
    }

    fn splice_at_anchor(&mut self, anchor: Cell, path: &[usize], points: &[Point]) -> Result<()> {
        let (slot, (u, v), reversed) = self.best_splice(anchor, path, points)?;
        let oriented: Vec<usize> = if reversed { path.iter().rev().copied().collect() } else { path.to_vec() };
        self.splice(u, v, &oriented)?;
        self.surviving.get_mut(&anchor).expect("anchor has a ledger").remove(slot);
        let count = self.removed_count.entry(anchor).or_insert(0);
        *count += 1;
        if *count > MAX_REMOVALS_PER_CELL {
            return Err(Error::Internal(format!("tile {anchor:?} lost more than {MAX_REMOVALS_PER_CELL} edges")));
        }
        self.add_edge(points, u, oriented[0]);
        self.add_edge(points, oriented[oriented.len() - 1], v);
        Ok(())
    }

    /// Merges small cycle `eta` into the ring holding tile `anchor`.
    ///
    /// Removes one surviving edge of the anchor's small cycle and the edge
    /// between the two lowest-index nodes of `eta`, then adds the cheaper of
    /// the two cross pairings.
    pub fn merge_cycles(&mut self, eta: &SmallCycle, anchor: Cell, points: &[Point]) -> Result<()> {
        if !grid::adjacent(eta.cell, anchor, grid::Adjacency::Star) {
            return Err(Error::Precondition(format!("{:?} is not star-adjacent to {anchor:?}", eta.cell)));
        }
        // eta = e0 e1 ... e_{m-1}; dropping (e0, e1) leaves the path e1 .. e_{m-1} e0.
        let mut path: Vec<usize> = eta.nodes[1..].to_vec();
        path.push(eta.nodes[0]);
        self.splice_at_anchor(anchor, &path, points)?;
        let mut edges: Vec<(usize, usize)> = eta.edges().collect();
        edges.remove(0);
        self.surviving.insert(eta.cell, edges);
        self.removed_count.insert(eta.cell, 1);
        Ok(())
    }

    /// Attaches the path through a sparse tile's nodes next to `anchor`.
    pub fn attach_path(&mut self, cell: Cell, path: &[usize], anchor: Cell, points: &[Point]) -> Result<()> {
        if !grid::adjacent(cell, anchor, grid::Adjacency::Star) {
            return Err(Error::Precondition(format!("{cell:?} is not star-adjacent to {anchor:?}")));
        }
        if path.is_empty() {
            return Err(Error::Precondition(format!("empty path for tile {cell:?}")));
        }
        self.splice_at_anchor(anchor, path, points)
    }

    pub fn accounting(&self) -> EdgeAccounting {
        EdgeAccounting {
            removed_total: self.removed_count.values().sum(),
            added_total: self.added_edges.len(),
            max_removed_per_cell: self.removed_count.values().copied().max().unwrap_or(0),
            min_surviving: self.surviving.values().map(Vec::len).min().unwrap_or(0),
        }
    }
}

/// Totals of the merge ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAccounting {
    pub removed_total: usize,
    pub added_total: usize,
    pub max_removed_per_cell: usize,
    pub min_surviving: usize,
}

/// Cycle through all nodes of one tile, in ascending node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallCycle {
    pub cell: Cell,
    pub nodes: Vec<usize>,
}

impl SmallCycle {
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.nodes.len();
        (0..m).map(move |w| (self.nodes[w], self.nodes[(w + 1) % m]))
    }
}

/// Small cycle of a tile's nodes. Needs at least three nodes.
pub fn small_cycle(cell: Cell, nodes: &[usize]) -> Result<SmallCycle> {
    if nodes.len() < 3 {
        return Err(Error::Precondition(format!("a cycle needs >= 3 nodes, tile {cell:?} has {}", nodes.len())));
    }
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    Ok(SmallCycle { cell, nodes })
}

/// One step of the merge order: a tile and its BFS parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeStep {
    pub cell: Cell,
    pub parent: Option<Cell>,
}

/// BFS order over the backbone component from its lowest tile. The root
/// comes first with no parent; the actual anchor of each later tile is
/// chosen at merge time among its already merged neighbours.
pub fn merge_order(g: &GridState, b: &Backbone) -> Vec<MergeStep> {
    g.component_bfs(b.root()).into_iter().map(|(cell, parent)| MergeStep { cell, parent }).collect()
}

/// Statistics of a finished cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeStats {
    /// Edges of length `>= r_n`.
    pub n_br: usize,
    pub max_edge: f64,
    pub n_edges: usize,
    /// `n_br / n_edges`.
    pub gamma_actual: f64,
    /// Number of dense tiles used.
    pub t_dense: usize,
}

/// Ring edges of a cyclic node order.
pub fn cycle_edges(order: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let m = order.len();
    let count = if m >= 2 { m } else { 0 };
    (0..count).map(move |w| (order[w], order[(w + 1) % m]))
}

pub fn classify_edges(order: &[usize], points: &[Point], r_n: f64) -> BridgeStats {
    let mut n_br = 0;
    let mut max_edge = 0.0f64;
    let mut n_edges = 0;
    for (a, b) in cycle_edges(order) {
        let len = points[a].dist(&points[b]);
        n_edges += 1;
        max_edge = max_edge.max(len);
        if len >= r_n {
            n_br += 1;
        }
    }
    let gamma_actual = if n_edges == 0 { 0.0 } else { n_br as f64 / n_edges as f64 };
    BridgeStats { n_br, max_edge, n_edges, gamma_actual, t_dense: 0 }
}

/// Outcome of checking a cycle against a `(w, gamma)` target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    pub reasons: Vec<String>,
}

/// `order` must visit each of the `n` nodes once, every edge must be shorter
/// than `w`, and at most a `gamma` fraction of the `n` edges may be bridges.
pub fn validate(order: &[usize], stats: &BridgeStats, w: f64, gamma: f64, n: usize) -> Verdict {
    let mut reasons = Vec::new();
    let mut seen = vec![false; n];
    let hamiltonian = order.len() == n
        && n >= 3
        && order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true));
    if !hamiltonian {
        reasons.push("not Hamiltonian".to_string());
    }
    if stats.max_edge.is_nan() || stats.max_edge >= w {
        reasons.push(format!("max edge {} is not below {w}", stats.max_edge));
    }
    let fraction = if n == 0 { 0.0 } else { stats.n_br as f64 / n as f64 };
    if fraction > gamma {
        reasons.push(format!("bridge fraction {fraction} exceeds {gamma}"));
    }
    Verdict { valid: reasons.is_empty(), reasons }
}

/// A finished cycle with its ledger and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub cycle: CycleState,
    pub order: Vec<usize>,
    pub stats: BridgeStats,
    /// Set when the cycle was stitched outside the guaranteed construction.
    pub out_of_guarantee: bool,
}

impl Construction {
    fn finish(cycle: CycleState, order: Vec<usize>, inst: &Instance, t_dense: usize, out_of_guarantee: bool) -> Self {
        let mut stats = classify_edges(&order, &inst.points, inst.r_n);
        stats.t_dense = t_dense;
        Self { cycle, order, stats, out_of_guarantee }
    }
}

/// Anchor for `cell` among merged dense neighbours: most surviving edges,
/// ties to the lowest tile.
fn pick_anchor(state: &CycleState, g: &GridState, cell: Cell, merged: &dyn Fn(Cell) -> bool) -> Option<Cell> {
    let mut best: Option<(usize, Cell)> = None;
    for nb in g.star_neighbours(cell) {
        if g.is_dense(nb) && merged(nb) {
            let s = state.surviving(nb).len();
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, nb));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Folds the small cycles of one component into a single ring along
/// `order` (BFS order, root first).
fn merge_component(state: &mut CycleState, g: &GridState, order: &[(Cell, Option<Cell>)], points: &[Point]) -> Result<()> {
    let k = g.k();
    let mut merged = vec![false; k * k];
    for (w, &(cell, _)) in order.iter().enumerate() {
        let eta = small_cycle(cell, g.nodes(cell))?;
        if w == 0 {
            state.seed(&eta)?;
        } else {
            let anchor = pick_anchor(state, g, cell, &|c: Cell| merged[c.row * k + c.col])
                .ok_or_else(|| Error::Internal(format!("no merged neighbour for {cell:?}")))?;
            state.merge_cycles(&eta, anchor, points)?;
        }
        merged[cell.row * k + cell.col] = true;
    }
    Ok(())
}

/// Builds the bridged Hamiltonian cycle. Requires event `H`.
pub fn construct_hamiltonian(inst: &Instance, g: &GridState, b: &Backbone) -> Result<Construction> {
    let n = inst.points.len();
    if n < 3 {
        return Err(Error::Precondition(format!("no cycle exists on {n} nodes")));
    }
    if g.total_nodes() != n {
        return Err(Error::Precondition("grid does not match the instance".into()));
    }
    let (i, _) = grid::detect_i(g, b);
    let (j, _) = grid::detect_j(g);
    if i || j {
        return Err(Error::Precondition(format!(
            "event H does not hold (I = {i}, J = {j}); the construction needs a single dense component reaching every tile"
        )));
    }

    let mut state = CycleState::new(n);
    let steps: Vec<(Cell, Option<Cell>)> = merge_order(g, b).into_iter().map(|s| (s.cell, s.parent)).collect();
    let t_dense = steps.len();
    merge_component(&mut state, g, &steps, &inst.points)?;

    // Under not-I every dense tile is merged; under not-J every sparse tile has one.
    for cell in g.cells().filter(|&c| !g.is_dense(c) && g.count(c) > 0) {
        let anchor = pick_anchor(&state, g, cell, &|_| true)
            .ok_or_else(|| Error::Internal(format!("sparse tile {cell:?} has no dense neighbour")))?;
        let mut path = g.nodes(cell).to_vec();
        path.sort_unstable();
        state.attach_path(cell, &path, anchor, &inst.points)?;
    }

    if state.len() != n {
        return Err(Error::Internal(format!("cycle covers {} of {n} nodes", state.len())));
    }
    let order = state.order();
    Ok(Construction::finish(state, order, inst, t_dense, false))
}

/// Hamiltonian cycle for any instance with `n >= 3`.
///
/// Falls through to [`construct_hamiltonian`] when `H` holds. Otherwise each
/// dense component is merged as usual, sparse tiles are attached where a
/// dense neighbour exists, and the remaining pieces are stitched greedily by
/// nearest endpoint with bridges of unbounded length.
pub fn best_effort_completion(inst: &Instance, g: &GridState, m_eff: usize) -> Result<Construction> {
    let n = inst.points.len();
    if n < 3 {
        return Err(Error::Precondition(format!("no cycle exists on {n} nodes")));
    }
    let (report, backbone) = grid::evaluate_events(g, m_eff)?;
    if let (true, Some(b)) = (report.h, backbone.as_ref()) {
        return construct_hamiltonian(inst, g, b);
    }

    let points = &inst.points;
    let mut state = CycleState::new(n);
    let mut roots = Vec::new();
    let mut done = vec![false; g.k() * g.k()];
    let mut t_dense = 0;
    for cell in g.dense_cells() {
        if done[cell.row * g.k() + cell.col] {
            continue;
        }
        let order = g.component_bfs(cell);
        for (c, _) in &order {
            done[c.row * g.k() + c.col] = true;
        }
        t_dense += order.len();
        merge_component(&mut state, g, &order, points)?;
        roots.push(g.nodes(cell).iter().copied().min().expect("dense tile has nodes"));
    }

    // Pieces: one ring per dense component, then stray sparse paths.
    let mut pieces: Vec<(Vec<usize>, bool)> = roots.iter().map(|&r| (state.ring_from(r), true)).collect();
    for cell in g.cells().filter(|&c| !g.is_dense(c) && g.count(c) > 0) {
        let mut path = g.nodes(cell).to_vec();
        path.sort_unstable();
        match pick_anchor(&state, g, cell, &|_| true) {
            Some(anchor) => state.attach_path(cell, &path, anchor, points)?,
            None => pieces.push((path, false)),
        }
    }
    // Attachments changed the rings; re-walk them.
    for (w, &r) in roots.iter().enumerate() {
        pieces[w].0 = state.ring_from(r);
    }

    let (order, junctions) = stitch(&pieces, points);
    if order.len() != n {
        return Err(Error::Internal(format!("stitched cycle covers {} of {n} nodes", order.len())));
    }
    // Rebuild the links from the stitched order, keeping the merge ledger.
    let mut cycle = CycleState::from_cycle(n, &order)?;
    cycle.surviving = state.surviving;
    cycle.removed_count = state.removed_count;
    cycle.added_edges = state.added_edges;
    for (a, b) in junctions {
        cycle.add_edge(points, a, b);
    }
    let order = cycle.order();
    Ok(Construction::finish(cycle, order, inst, t_dense, true))
}

/// Greedy nearest-endpoint concatenation of rings (`true`) and paths into
/// one cycle. Returns the order and the junction edges it introduced.
fn stitch(pieces: &[(Vec<usize>, bool)], points: &[Point]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut out: Vec<usize> = Vec::new();
    let mut junctions = Vec::new();
    let Some((first, first_closed)) = pieces.first() else {
        return (out, junctions);
    };
    let mut used = vec![false; pieces.len()];
    out.extend_from_slice(first);
    used[0] = true;
    for _ in 1..pieces.len() {
        let tail = *out.last().expect("non-empty");
        let mut best: Option<(f64, usize, usize)> = None;
        for (w, (nodes, closed)) in pieces.iter().enumerate() {
            if used[w] {
                continue;
            }
            let candidates: Vec<usize> = if *closed { (0..nodes.len()).collect() } else { vec![0, nodes.len() - 1] };
            for pos in candidates {
                let d = points[tail].dist(&points[nodes[pos]]);
                if best.is_none_or(|(bd, ..)| d < bd) {
                    best = Some((d, w, pos));
                }
            }
        }
        let (_, w, pos) = best.expect("an unused piece remains");
        let (nodes, closed) = &pieces[w];
        let start = out.len();
        if *closed {
            out.extend(nodes[pos..].iter().chain(&nodes[..pos]));
        } else if pos == 0 {
            out.extend_from_slice(nodes);
        } else {
            out.extend(nodes.iter().rev());
        }
        junctions.push((tail, out[start]));
        used[w] = true;
    }
    // A lone ring closes on its own edge; anything else needs a closing bridge.
    if pieces.len() > 1 || !first_closed {
        junctions.push((*out.last().expect("non-empty"), out[0]));
    }
    (out, junctions)
}

/// Cycle export: `{order, edges: [{i, j, length, is_bridge}], stats}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleExport {
    pub order: Vec<usize>,
    pub edges: Vec<ExportEdge>,
    pub stats: BridgeStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub is_bridge: bool,
}

impl CycleExport {
    pub fn new(order: &[usize], stats: BridgeStats, points: &[Point], r_n: f64) -> Self {
        let edges = cycle_edges(order)
            .map(|(i, j)| {
                let length = points[i].dist(&points[j]);
                ExportEdge { i, j, length, is_bridge: length >= r_n }
            })
            .collect();
        Self { order: order.to_vec(), edges, stats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridState;

    fn line_points(n: usize) -> Vec<Point> {
        (0..n).map(|i| Point::new(-0.4 + 0.01 * i as f64, 0.0)).collect()
    }

    #[test]
    fn splice_triangles_matches_hand_example() {
        // Nodes 1..=6 (index 0 unused).
        let mut s = CycleState::from_cycle(7, &[1, 2, 3]).unwrap();
        // Remove (1,2) and (4,5) from eta = 4 5 6; add (1,4) and (5,2).
        s.splice(1, 2, &[4, 6, 5]).unwrap();
        assert_eq!(s.ring_from(1), vec![1, 4, 6, 5, 2, 3]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn splice_rejects_missing_edge_and_covered_nodes() {
        let mut s = CycleState::from_cycle(6, &[0, 1, 2]).unwrap();
        assert!(s.splice(0, 3, &[4]).is_err());
        assert!(s.splice(0, 1, &[2]).is_err());
        assert!(s.splice(0, 1, &[]).is_err());
        // Reverse orientation is accepted.
        s.splice(1, 0, &[5]).unwrap();
        assert_eq!(s.ring_from(0), vec![0, 5, 1, 2]);
    }

    #[test]
    fn small_cycle_orders_ascending() {
        let c = small_cycle(Cell::new(0, 0), &[5, 2, 9]).unwrap();
        assert_eq!(c.nodes, vec![2, 5, 9]);
        assert_eq!(c.edges().count(), 3);
        assert!(small_cycle(Cell::new(0, 0), &[1, 2]).is_err());
    }

    #[test]
    fn merge_updates_ledger() {
        let pts = line_points(6);
        let mut s = CycleState::new(6);
        let a = small_cycle(Cell::new(0, 0), &[0, 1, 2]).unwrap();
        let b = small_cycle(Cell::new(0, 1), &[3, 4, 5]).unwrap();
        s.seed(&a).unwrap();
        s.merge_cycles(&b, Cell::new(0, 0), &pts).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.order().len(), 6);
        assert_eq!(s.removed_count(Cell::new(0, 0)), 1);
        assert_eq!(s.removed_count(Cell::new(0, 1)), 1);
        assert_eq!(s.surviving(Cell::new(0, 0)).len(), 2);
        assert_eq!(s.surviving(Cell::new(0, 1)), &[(4, 5), (5, 3)]);
        assert_eq!(s.added_edges().len(), 2);
        // Not adjacent.
        let c = small_cycle(Cell::new(5, 5), &[0, 1, 2]).unwrap();
        assert!(s.clone().merge_cycles(&c, Cell::new(0, 0), &pts).is_err());
    }

    #[test]
    fn anchor_without_surviving_edges_fails() {
        let pts = line_points(5);
        let mut s = CycleState::new(5);
        s.seed(&small_cycle(Cell::new(0, 0), &[0, 1, 2]).unwrap()).unwrap();
        s.attach_path(Cell::new(0, 1), &[3], Cell::new(0, 0), &pts).unwrap();
        s.surviving.get_mut(&Cell::new(0, 0)).unwrap().clear();
        let err = s.attach_path(Cell::new(1, 1), &[4], Cell::new(0, 0), &pts).unwrap_err();
        assert!(matches!(err, Error::Internal(_)), "{err}");
    }

    #[test]
    fn attach_single_node_grows_by_one() {
        let pts = line_points(10);
        let mut s = CycleState::new(10);
        s.seed(&small_cycle(Cell::new(0, 0), &(0..9).collect::<Vec<_>>()).unwrap()).unwrap();
        s.attach_path(Cell::new(0, 1), &[9], Cell::new(0, 0), &pts).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.order().len(), 10);
    }

    #[test]
    fn classify_and_validate() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(0.1, 0.1), Point::new(0.4, 0.4)];
        let short = classify_edges(&[0, 1, 2], &pts, 0.2);
        assert_eq!(short.n_br, 0);
        assert_eq!(short.n_edges, 3);
        let long = classify_edges(&[0, 1, 2, 3], &pts, 0.2);
        // 2 -> 3 and 3 -> 0 are long.
        assert_eq!(long.n_br, 2);
        // 1 -> 3 is 0.5 and 3 -> 0 is about 0.566.
        let one_long = classify_edges(&[0, 1, 3], &pts, 0.52);
        assert_eq!(one_long.n_br, 1);

        let v = validate(&[0, 1, 2, 3], &long, 0.6, 1.0, 4);
        assert!(v.valid, "{v:?}");
        let v = validate(&[0, 1, 2], &short, 0.6, 1.0, 4);
        assert!(!v.valid);
        assert_eq!(v.reasons, vec!["not Hamiltonian".to_string()]);
        let v = validate(&[0, 1, 2, 3], &long, long.max_edge, 1.0, 4);
        assert!(!v.valid, "strict edge bound");
        let v = validate(&[0, 1, 2, 3], &long, 1.0, 0.25, 4);
        assert!(!v.valid);
        let v = validate(&[0, 1, 1, 3], &long, 1.0, 1.0, 4);
        assert!(!v.valid);
    }

    #[test]
    fn bridge_free_cycle_is_r_zero_bridged() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.01, 0.0), Point::new(0.0, 0.01)];
        let r = 0.05;
        let s = classify_edges(&[0, 1, 2], &pts, r);
        assert!(validate(&[0, 1, 2], &s, r, 0.0, 3).valid);
        assert!(validate(&[0, 1, 2], &s, 2f64.sqrt() * 1.001, 1.0, 3).valid);
    }

    fn instance(points: Vec<Point>, r_n: f64) -> Instance {
        Instance { n: points.len(), points, r_n, seed: 0 }
    }

    #[test]
    fn single_dense_tile_gives_its_small_cycle() {
        let pts: Vec<Point> = (0..12).map(|i| Point::new(-0.4 + 0.05 * i as f64, 0.1 * (i % 3) as f64)).collect();
        let inst = instance(pts, 2.0);
        let g = GridState::build(&inst.points, 1, 9);
        let (report, b) = grid::evaluate_events(&g, 1).unwrap();
        assert!(report.h);
        let c = construct_hamiltonian(&inst, &g, &b.unwrap()).unwrap();
        assert_eq!(c.order, (0..12).collect::<Vec<_>>());
        assert_eq!(c.stats.n_br, 0);
        assert_eq!(c.stats.t_dense, 1);
    }

    #[test]
    fn construct_requires_h() {
        // Two dense tiles in opposite corners of a 3x3 grid.
        let mut pts = Vec::new();
        for i in 0..9 {
            pts.push(Point::new(-0.45 + 0.01 * i as f64, -0.45));
            pts.push(Point::new(0.35 + 0.01 * i as f64, 0.45));
        }
        let inst = instance(pts, 0.5);
        let g = GridState::build(&inst.points, 3, 9);
        let f = grid::detect_f(&g, 3).unwrap();
        assert!(!f.holds);
        let c = best_effort_completion(&inst, &g, 3).unwrap();
        assert!(c.out_of_guarantee);
        assert_eq!(c.order.len(), 18);
        let v = validate(&c.order, &c.stats, 2.0, 1.0, 18);
        assert!(v.valid, "{v:?}");
        // Exactly the two stitch edges are long.
        assert_eq!(c.stats.n_br, 2);
        assert!(c.stats.max_edge > 2.0 * 0.5);
    }

    #[test]
    fn export_marks_bridges() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(0.4, 0.4)];
        let stats = classify_edges(&[0, 1, 2], &pts, 0.2);
        let e = CycleExport::new(&[0, 1, 2], stats, &pts, 0.2);
        assert_eq!(e.edges.len(), 3);
        assert!(!e.edges[0].is_bridge);
        assert!(e.edges[1].is_bridge && e.edges[2].is_bridge);
    }
}
