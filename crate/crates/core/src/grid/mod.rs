//! Tiling of the unit square, dense/sparse classification, rectangle
//! crossings, the backbone and the events `F`, `I`, `J`, `H`.
//!
//! Cells are addressed by `(row, col)` with row 0 at the bottom (`y = -1/2`)
//! and column 0 on the left (`x = -1/2`).

mod lattice;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

pub use self::lattice::BoolLattice;
use crate::error::{Error, Result};
use crate::params::TilingSpec;
use crate::sampling::{Instance, Point, HALF};

/// A tile of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    /// Shares at least a corner.
    Star,
    /// Shares a side.
    Plus,
}

pub fn adjacent(a: Cell, b: Cell, mode: Adjacency) -> bool {
    let dr = a.row.abs_diff(b.row);
    let dc = a.col.abs_diff(b.col);
    match mode {
        Adjacency::Star => dr.max(dc) == 1,
        Adjacency::Plus => dr + dc == 1,
    }
}

/// Tile index along one axis. Half-open `[a, b)` per tile, last tile closed.
pub fn axis_index(coord: f64, k: usize) -> usize {
    let v = ((coord + HALF) * k as f64).floor();
    if v <= 0.0 {
        0
    } else {
        (v as usize).min(k - 1)
    }
}

pub fn cell_of(p: &Point, k: usize) -> Cell {
    Cell::new(axis_index(p.y, k), axis_index(p.x, k))
}

/// Bucketed instance with dense classification and component labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    k: usize,
    l: usize,
    cells: Vec<Vec<usize>>,
    dense: Vec<bool>,
    component: Vec<i64>,
    n_components: usize,
}

/// Buckets every node, marks dense tiles and labels star-connected dense
/// components. Component ids are assigned in row-major order of first cell.
pub fn build_grid(inst: &Instance, spec: &TilingSpec, l: usize) -> GridState {
    GridState::build(&inst.points, spec.k, l)
}

impl GridState {
    pub fn build(points: &[Point], k: usize, l: usize) -> Self {
        assert!(k >= 1, "grid order must be positive");
        let mut cells = vec![Vec::new(); k * k];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p, k);
            cells[c.row * k + c.col].push(i);
        }
        let dense: Vec<bool> = cells.iter().map(|v| v.len() >= l).collect();
        let (component, n_components) = label_components(k, &dense);
        Self { k, l, cells, dense, component, n_components }
    }

    /// Grid from per-tile occupancy counts (row-major, row 0 at the bottom).
    /// Nodes get consecutive indices in that order.
    pub fn from_counts(k: usize, l: usize, counts: &[usize]) -> Result<Self> {
        if k == 0 || counts.len() != k * k {
            return Err(Error::InvalidInput(format!("{} counts do not fill a {k}x{k} grid", counts.len())));
        }
        let mut next = 0;
        let cells: Vec<Vec<usize>> = counts
            .iter()
            .map(|&c| {
                next += c;
                (next - c..next).collect()
            })
            .collect();
        let dense: Vec<bool> = counts.iter().map(|&c| c >= l).collect();
        let (component, n_components) = label_components(k, &dense);
        Ok(Self { k, l, cells, dense, component, n_components })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    #[inline]
    fn idx(&self, c: Cell) -> usize {
        c.row * self.k + c.col
    }

    pub fn nodes(&self, c: Cell) -> &[usize] {
        &self.cells[self.idx(c)]
    }

    pub fn count(&self, c: Cell) -> usize {
        self.cells[self.idx(c)].len()
    }

    pub fn is_dense(&self, c: Cell) -> bool {
        self.dense[self.idx(c)]
    }

    /// Component id of a dense cell, `None` for sparse cells.
    pub fn component(&self, c: Cell) -> Option<usize> {
        let id = self.component[self.idx(c)];
        (id >= 0).then_some(id as usize)
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn total_nodes(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let k = self.k;
        (0..k * k).map(move |i| Cell::new(i / k, i % k))
    }

    pub fn dense_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|&c| self.is_dense(c))
    }

    /// Star neighbours inside the grid, in `(row, col)` order.
    pub fn star_neighbours(&self, c: Cell) -> impl Iterator<Item = Cell> {
        let k = self.k as isize;
        let (r, col) = (c.row as isize, c.col as isize);
        (-1isize..=1)
            .flat_map(|dr| (-1isize..=1).map(move |dc| (dr, dc)))
            .filter(|&d| d != (0, 0))
            .filter_map(move |(dr, dc)| {
                let (nr, nc) = (r + dr, col + dc);
                (nr >= 0 && nr < k && nc >= 0 && nc < k).then(|| Cell::new(nr as usize, nc as usize))
            })
    }

    /// Cells of one dense component in BFS order from `root` (star adjacency,
    /// neighbours expanded in `(row, col)` order), each with its BFS parent.
    pub fn component_bfs(&self, root: Cell) -> Vec<(Cell, Option<Cell>)> {
        let Some(id) = self.component(root) else {
            return Vec::new();
        };
        let mut seen = vec![false; self.k * self.k];
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(root, None)]);
        seen[self.idx(root)] = true;
        while let Some((c, parent)) = queue.pop_front() {
            out.push((c, parent));
            for nb in self.star_neighbours(c) {
                let i = self.idx(nb);
                if !seen[i] && self.component(nb) == Some(id) {
                    seen[i] = true;
                    queue.push_back((nb, Some(c)));
                }
            }
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

fn label_components(k: usize, dense: &[bool]) -> (Vec<i64>, usize) {
    let mut uf = UnionFind::new(k * k);
    for r in 0..k {
        for c in 0..k {
            if !dense[r * k + c] {
                continue;
            }
            // Forward half of the 8-neighbourhood.
            let forward = [(0isize, 1isize), (1, -1), (1, 0), (1, 1)];
            for (dr, dc) in forward {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < k as isize && nc >= 0 && nc < k as isize {
                    let j = nr as usize * k + nc as usize;
                    if dense[j] {
                        uf.union(r * k + c, j);
                    }
                }
            }
        }
    }
    let mut label = vec![-1i64; k * k];
    let mut root_label = vec![-1i64; k * k];
    let mut next = 0i64;
    for i in 0..k * k {
        if dense[i] {
            let root = uf.find(i);
            if root_label[root] < 0 {
                root_label[root] = next;
                next += 1;
            }
            label[i] = root_label[root];
        }
    }
    (label, next as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Horizontal strip `1 x M t_n`, crossed left to right.
    Horizontal,
    /// Vertical strip `M t_n x 1`, crossed top to bottom.
    Vertical,
}

/// One rectangle of a partition: rows `[index*width, (index+1)*width)` for
/// horizontal strips, the same range of columns for vertical ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub orientation: Orientation,
    pub index: usize,
    pub width: usize,
}

impl Rect {
    pub fn contains(&self, c: Cell) -> bool {
        let band = self.index * self.width..(self.index + 1) * self.width;
        match self.orientation {
            Orientation::Horizontal => band.contains(&c.row),
            Orientation::Vertical => band.contains(&c.col),
        }
    }
}

/// A dense star path across a rectangle. Horizontal crossings are listed
/// left to right, vertical ones top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub rect: Rect,
    pub cells: Vec<Cell>,
}

/// Rectangle viewed as a lattice whose left-right crossings are the
/// rectangle's crossings in its own direction.
///
/// Vertical strips are rotated: lattice row = offset of the column inside the
/// strip (leftmost first), lattice column = distance from the top row. The
/// lattice's lowermost crossing is then the strip's leftmost one.
struct RectView<'a> {
    grid: &'a GridState,
    rect: Rect,
}

impl RectView<'_> {
    fn to_cell(&self, (lr, lc): (usize, usize)) -> Cell {
        let base = self.rect.index * self.rect.width;
        match self.rect.orientation {
            Orientation::Horizontal => Cell::new(base + lr, lc),
            Orientation::Vertical => Cell::new(self.grid.k - 1 - lc, base + lr),
        }
    }

    fn lattice(&self) -> BoolLattice {
        BoolLattice::from_fn(self.rect.width, self.grid.k, |r, c| self.grid.is_dense(self.to_cell((r, c))))
    }
}

fn check_rect(g: &GridState, rect: Rect) -> Result<()> {
    if rect.width == 0 || !g.k.is_multiple_of(rect.width) || (rect.index + 1) * rect.width > g.k {
        return Err(Error::Precondition(format!("rectangle {rect:?} does not tile a {0}x{0} grid", g.k)));
    }
    Ok(())
}

/// Canonical dense crossing of `rect`: lowermost left-right for horizontal
/// strips, leftmost top-bottom for vertical ones.
pub fn find_crossing(g: &GridState, rect: Rect) -> Result<Option<Crossing>> {
    check_rect(g, rect)?;
    let view = RectView { grid: g, rect };
    Ok(view.lattice().lr_star_crossing().map(|path| Crossing {
        rect,
        cells: path.into_iter().map(|p| view.to_cell(p)).collect(),
    }))
}

/// Plus-connected sparse path blocking `rect`: top to bottom for
/// horizontal strips, left to right for vertical ones.
pub fn sparse_dual_crossing(g: &GridState, rect: Rect) -> Result<Option<Vec<Cell>>> {
    check_rect(g, rect)?;
    let view = RectView { grid: g, rect };
    Ok(view.lattice().tb_plus_closed_crossing().map(|path| {
        let mut cells: Vec<Cell> = path.into_iter().map(|p| view.to_cell(p)).collect();
        // The rotated lattice lists vertical-strip duals right to left.
        if rect.orientation == Orientation::Vertical {
            cells.reverse();
        }
        cells
    }))
}

/// Outcome of checking every rectangle of both partitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingEvent {
    pub holds: bool,
    pub width: usize,
    pub crossings: Vec<Crossing>,
    /// Rectangles without a dense crossing.
    pub uncrossed: Vec<Rect>,
}

/// Event `F`: every horizontal and vertical strip of width `m_eff` has a
/// dense crossing.
pub fn detect_f(g: &GridState, m_eff: usize) -> Result<CrossingEvent> {
    if m_eff == 0 || !g.k.is_multiple_of(m_eff) {
        return Err(Error::Precondition(format!("M_eff = {m_eff} does not divide K = {}", g.k)));
    }
    let mut crossings = Vec::new();
    let mut uncrossed = Vec::new();
    for orientation in [Orientation::Horizontal, Orientation::Vertical] {
        for index in 0..g.k / m_eff {
            let rect = Rect { orientation, index, width: m_eff };
            match find_crossing(g, rect)? {
                Some(c) => crossings.push(c),
                None => uncrossed.push(rect),
            }
        }
    }
    Ok(CrossingEvent { holds: uncrossed.is_empty(), width: m_eff, crossings, uncrossed })
}

/// Union of the canonical crossings and the dense component containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Backbone {
    pub crossings: Vec<Crossing>,
    /// Sorted, deduplicated.
    pub cells: Vec<Cell>,
    pub component: usize,
}

impl Backbone {
    /// Lowest backbone cell, the root of the merge order.
    pub fn root(&self) -> Cell {
        self.cells[0]
    }
}

pub fn build_backbone(g: &GridState, f: &CrossingEvent) -> Result<Backbone> {
    if !f.holds {
        return Err(Error::Precondition("backbone requires every rectangle to be crossed".into()));
    }
    let cells: BTreeSet<Cell> = f.crossings.iter().flat_map(|c| c.cells.iter().copied()).collect();
    let cells: Vec<Cell> = cells.into_iter().collect();
    let first = cells
        .first()
        .ok_or_else(|| Error::Internal("crossing event holds but has no crossings".into()))?;
    let component = g
        .component(*first)
        .ok_or_else(|| Error::Internal(format!("backbone cell {first:?} is not dense")))?;
    if let Some(c) = cells.iter().find(|&&c| g.component(c) != Some(component)) {
        return Err(Error::Internal(format!(
            "backbone is not star-connected: {c:?} lies outside component {component}"
        )));
    }
    Ok(Backbone { crossings: f.crossings.clone(), cells, component })
}

/// A dense component other than the backbone's, with its first cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentWitness {
    pub component: usize,
    pub cell: Cell,
}

/// Event `I`: some dense component differs from the backbone component.
pub fn detect_i(g: &GridState, b: &Backbone) -> (bool, Vec<ComponentWitness>) {
    let mut first_cell: Vec<Option<Cell>> = vec![None; g.n_components()];
    for c in g.dense_cells() {
        let id = g.component(c).expect("dense cell has a component");
        first_cell[id].get_or_insert(c);
    }
    let witnesses: Vec<_> = first_cell
        .into_iter()
        .enumerate()
        .filter(|&(id, _)| id != b.component)
        .filter_map(|(id, cell)| cell.map(|cell| ComponentWitness { component: id, cell }))
        .collect();
    (!witnesses.is_empty(), witnesses)
}

/// Event `J`: some tile (dense or sparse) has only sparse star neighbours.
///
/// A lone tile (`K = 1`) has no neighbours and is not counted.
pub fn detect_j(g: &GridState) -> (bool, Vec<Cell>) {
    let witnesses: Vec<Cell> = g
        .cells()
        .filter(|&c| {
            let mut nbs = g.star_neighbours(c).peekable();
            nbs.peek().is_some() && nbs.all(|nb| !g.is_dense(nb))
        })
        .collect();
    (!witnesses.is_empty(), witnesses)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witnesses {
    pub uncrossed: Vec<Rect>,
    pub isolated_components: Vec<ComponentWitness>,
    pub isolated_cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventReport {
    #[serde(rename = "F")]
    pub f: bool,
    #[serde(rename = "I")]
    pub i: bool,
    #[serde(rename = "J")]
    pub j: bool,
    #[serde(rename = "H")]
    pub h: bool,
    pub witnesses: Witnesses,
}

impl EventReport {
    /// Human-readable reason why `H` fails, if it does.
    pub fn failure_reason(&self) -> Option<String> {
        if self.h {
            return None;
        }
        let mut parts = Vec::new();
        if !self.f {
            let rects: Vec<String> = self
                .witnesses
                .uncrossed
                .iter()
                .map(|r| format!("{:?} #{}", r.orientation, r.index).to_lowercase())
                .collect();
            parts.push(format!("F failed: no dense crossing in {}", abbreviate(&rects)));
        }
        if self.i {
            let comps: Vec<String> = self
                .witnesses
                .isolated_components
                .iter()
                .map(|w| format!("component {} at ({}, {})", w.component, w.cell.row, w.cell.col))
                .collect();
            parts.push(format!("I occurred: dense components outside the backbone: {}", abbreviate(&comps)));
        }
        if self.j {
            let cells: Vec<String> =
                self.witnesses.isolated_cells.iter().map(|c| format!("({}, {})", c.row, c.col)).collect();
            parts.push(format!("J occurred: tiles with no dense neighbour: {}", abbreviate(&cells)));
        }
        Some(parts.join("; "))
    }
}

fn abbreviate(items: &[String]) -> String {
    const SHOWN: usize = 4;
    if items.len() <= SHOWN {
        items.join(", ")
    } else {
        format!("{} and {} more", items[..SHOWN].join(", "), items.len() - SHOWN)
    }
}

/// Assembles `H = F and not I and not J`.
pub fn detect_h(f: &CrossingEvent, i: (bool, Vec<ComponentWitness>), j: (bool, Vec<Cell>)) -> EventReport {
    EventReport {
        f: f.holds,
        i: i.0,
        j: j.0,
        h: f.holds && !i.0 && !j.0,
        witnesses: Witnesses { uncrossed: f.uncrossed.clone(), isolated_components: i.1, isolated_cells: j.1 },
    }
}

/// Runs all detectors. `I` is only defined on `F`, so it is false when `F`
/// fails; the backbone is returned whenever `F` holds.
pub fn evaluate_events(g: &GridState, m_eff: usize) -> Result<(EventReport, Option<Backbone>)> {
    let f = detect_f(g, m_eff)?;
    let backbone = if f.holds { Some(build_backbone(g, &f)?) } else { None };
    let i = match &backbone {
        Some(b) => detect_i(g, b),
        None => (false, Vec::new()),
    };
    let j = detect_j(g);
    Ok((detect_h(&f, i, j), backbone))
}

/// Debug/renderer snapshot. Row 0 of every matrix is the bottom row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSnapshot {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub counts: Vec<Vec<usize>>,
    pub dense: Vec<Vec<bool>>,
    /// Component id per tile, -1 for sparse tiles.
    pub components: Vec<Vec<i64>>,
    /// `[row, col]` pairs.
    pub backbone_cells: Vec<[usize; 2]>,
}

impl GridSnapshot {
    pub fn new(g: &GridState, backbone: Option<&Backbone>) -> Self {
        let rows = |f: &dyn Fn(Cell) -> _| -> Vec<Vec<_>> {
            (0..g.k).map(|r| (0..g.k).map(|c| f(Cell::new(r, c))).collect()).collect()
        };
        Self {
            k: g.k,
            l: g.l,
            counts: (0..g.k).map(|r| (0..g.k).map(|c| g.count(Cell::new(r, c))).collect()).collect(),
            dense: (0..g.k).map(|r| (0..g.k).map(|c| g.is_dense(Cell::new(r, c))).collect()).collect(),
            components: rows(&|c| g.component[g.idx(c)]),
            backbone_cells: backbone.map_or_else(Vec::new, |b| b.cells.iter().map(|c| [c.row, c.col]).collect()),
        }
    }
}
