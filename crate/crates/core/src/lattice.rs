//! Rectangular regions of the square lattice, their boundary edges and the
//! segment labels used by tripartite splits.

use crate::error::{Error, Result};
use bitflags::bitflags;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Joins `(row, col)` and `(row, col + 1)`.
    Horizontal,
    /// Joins `(row, col)` and `(row + 1, col)`.
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub row: i64,
    pub col: i64,
}

impl Edge {
    pub fn horizontal(row: i64, col: i64) -> Self {
        Edge { kind: EdgeKind::Horizontal, row, col }
    }

    pub fn vertical(row: i64, col: i64) -> Self {
        Edge { kind: EdgeKind::Vertical, row, col }
    }

    pub fn label(&self) -> String {
        match self.kind {
            EdgeKind::Horizontal => format!("h{}_{}", self.row, self.col),
            EdgeKind::Vertical => format!("v{}_{}", self.row, self.col),
        }
    }

    pub fn endpoints(&self) -> [(i64, i64); 2] {
        match self.kind {
            EdgeKind::Horizontal => [(self.row, self.col), (self.row, self.col + 1)],
            EdgeKind::Vertical => [(self.row, self.col), (self.row + 1, self.col)],
        }
    }

    pub fn translated(&self, dr: i64, dc: i64) -> Self {
        Edge { kind: self.kind, row: self.row + dr, col: self.col + dc }
    }
}

pub fn site_label(row: i64, col: i64) -> String {
    format!("p{row}_{col}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    North,
    East,
    South,
    West,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryEdge {
    pub edge: Edge,
    pub side: Side,
    /// Position along the side, counted from the north-west corner.
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub row: i64,
    pub col: i64,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    pub fn new(row: i64, col: i64, height: usize, width: usize) -> Self {
        Rect { row, col, height, width }
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sites in column-major order: column by column, top to bottom.
    pub fn sites(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::with_capacity(self.len());
        for c in 0..self.width as i64 {
            for r in 0..self.height as i64 {
                out.push((self.row + r, self.col + c));
            }
        }
        out
    }

    pub fn contains_site(&self, (r, c): (i64, i64)) -> bool {
        r >= self.row && r < self.row + self.height as i64 && c >= self.col && c < self.col + self.width as i64
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.row >= self.row
            && other.col >= self.col
            && other.row + other.height as i64 <= self.row + self.height as i64
            && other.col + other.width as i64 <= self.col + self.width as i64
    }

    /// Edges with both endpoints inside.
    pub fn internal_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (r, c) in self.sites() {
            if self.contains_site((r, c + 1)) {
                out.push(Edge::horizontal(r, c));
            }
            if self.contains_site((r + 1, c)) {
                out.push(Edge::vertical(r, c));
            }
        }
        out
    }

    /// Boundary edges, clockwise from the northernmost west edge:
    /// `W0, N0..N(w-1), E0..E(h-1), S(w-1)..S0, W(h-1)..W1`.
    pub fn boundary(&self) -> Vec<BoundaryEdge> {
        let (h, w) = (self.height, self.width);
        let (r0, c0) = (self.row, self.col);
        let west = |i: usize| BoundaryEdge { edge: Edge::horizontal(r0 + i as i64, c0 - 1), side: Side::West, index: i };
        let mut out = Vec::with_capacity(2 * (h + w));
        if h == 0 || w == 0 {
            return out;
        }
        out.push(west(0));
        for j in 0..w {
            out.push(BoundaryEdge { edge: Edge::vertical(r0 - 1, c0 + j as i64), side: Side::North, index: j });
        }
        for i in 0..h {
            out.push(BoundaryEdge {
                edge: Edge::horizontal(r0 + i as i64, c0 + w as i64 - 1),
                side: Side::East,
                index: i,
            });
        }
        for j in (0..w).rev() {
            out.push(BoundaryEdge {
                edge: Edge::vertical(r0 + h as i64 - 1, c0 + j as i64),
                side: Side::South,
                index: j,
            });
        }
        for i in (1..h).rev() {
            out.push(west(i));
        }
        out
    }

    pub fn boundary_edges(&self) -> Vec<Edge> {
        self.boundary().into_iter().map(|b| b.edge).collect()
    }

    pub fn translated(&self, dr: i64, dc: i64) -> Self {
        Rect { row: self.row + dr, col: self.col + dc, ..*self }
    }
}

/// The finite box in which regions must lie.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub rows: usize,
    pub cols: usize,
}

impl Lattice {
    pub fn new(rows: usize, cols: usize) -> Self {
        Lattice { rows, cols }
    }

    pub fn contains(&self, r: &Rect) -> bool {
        r.height > 0
            && r.width > 0
            && r.row >= 0
            && r.col >= 0
            && r.row + r.height as i64 <= self.rows as i64
            && r.col + r.width as i64 <= self.cols as i64
    }

    pub fn check(&self, r: &Rect) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(Error::Geometry(vec![format!("{r:?} is not a non-empty rectangle inside {self:?}")]))
        }
    }

    pub fn boundary_edges(&self, r: &Rect) -> Result<Vec<BoundaryEdge>> {
        self.check(r)?;
        Ok(r.boundary())
    }
}

/// Steps between two positions of a cycle of length `n`.
pub fn cycle_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j) % n.max(1);
    d.min(n - d)
}

/// For every edge shared by the boundaries of `inner` and `outer`, the number of
/// steps along the boundary cycle of `inner` to the nearest edge where the two
/// boundaries part ways. Identical boundaries give an empty map.
pub fn overlap_map(inner: &Rect, outer: &Rect) -> Result<Vec<(Edge, usize)>> {
    if !outer.contains(inner) {
        return Err(Error::Geometry(vec![format!("{inner:?} is not inside {outer:?}")]));
    }
    let ib = inner.boundary_edges();
    let ob: std::collections::HashSet<Edge> = outer.boundary_edges().into_iter().collect();
    let diverging: Vec<usize> = (0..ib.len()).filter(|&i| !ob.contains(&ib[i])).collect();
    if diverging.is_empty() {
        return Ok(Vec::new());
    }
    let n = ib.len();
    Ok((0..n)
        .filter(|&i| ob.contains(&ib[i]))
        .map(|i| (ib[i], diverging.iter().map(|&j| cycle_distance(i, j, n)).min().unwrap()))
        .collect())
}

bitflags! {
    /// Segment membership of a boundary edge. `z` is the union of `x` and `y`.
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
    pub struct Segments: u8 {
        const A = 1;
        const B = 2;
        const C = 4;
        const D = 8;
        const X = 16;
        const Y = 32;
        const Z = 16 | 32;
    }
}

impl Segments {
    pub fn name(&self) -> String {
        let mut s = String::new();
        for (f, c) in [
            (Segments::A, 'a'),
            (Segments::B, 'b'),
            (Segments::C, 'c'),
            (Segments::D, 'd'),
            (Segments::X, 'x'),
            (Segments::Y, 'y'),
        ] {
            if self.contains(f) {
                s.push(c);
            }
        }
        s
    }
}

/// Which of the four boundaries of a split an object refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    Abc,
    Ab,
    Bc,
    B,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::Abc, Part::Ab, Part::Bc, Part::B];

    pub fn name(&self) -> &'static str {
        match self {
            Part::Abc => "ABC",
            Part::Ab => "AB",
            Part::Bc => "BC",
            Part::B => "B",
        }
    }
}

/// A rectangle cut into three column blocks `A | B | C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbcSplit {
    pub lattice: Lattice,
    pub total: Rect,
    pub widths: [usize; 3],
    pub ell: usize,
    pub beta: f64,
}

impl AbcSplit {
    /// Validated split; all geometric violations are reported together.
    pub fn new(lattice: Lattice, total: Rect, widths: [usize; 3], ell: usize, beta: f64) -> Result<Self> {
        let mut errs = Vec::new();
        if !lattice.contains(&total) {
            errs.push(format!("{total:?} does not lie inside {lattice:?}"));
        }
        if widths.contains(&0) {
            errs.push("every block needs width at least 1".to_string());
        }
        if widths.iter().sum::<usize>() != total.width {
            errs.push(format!("widths {:?} do not add up to {}", widths, total.width));
        }
        let wb = widths[1];
        if wb < 3 * ell {
            errs.push(format!("B has width {wb}, less than 3ℓ = {}", 3 * ell));
        }
        let lstar = total.height.max(widths[0]).max(widths[2]) as f64;
        if (wb as f64) < lstar.powf(beta) - 1e-12 {
            errs.push(format!("B has width {wb}, less than {lstar}^{beta} = {:.4}", lstar.powf(beta)));
        }
        if !errs.is_empty() {
            return Err(Error::Geometry(errs));
        }
        Ok(AbcSplit { lattice, total, widths, ell, beta })
    }

    pub fn a(&self) -> Rect {
        Rect { width: self.widths[0], ..self.total }
    }

    pub fn b(&self) -> Rect {
        Rect { col: self.total.col + self.widths[0] as i64, width: self.widths[1], ..self.total }
    }

    pub fn c(&self) -> Rect {
        Rect { col: self.total.col + (self.widths[0] + self.widths[1]) as i64, width: self.widths[2], ..self.total }
    }

    pub fn ab(&self) -> Rect {
        Rect { width: self.widths[0] + self.widths[1], ..self.total }
    }

    pub fn bc(&self) -> Rect {
        Rect { col: self.total.col + self.widths[0] as i64, width: self.widths[1] + self.widths[2], ..self.total }
    }

    pub fn region(&self, part: Part) -> Rect {
        match part {
            Part::Abc => self.total,
            Part::Ab => self.ab(),
            Part::Bc => self.bc(),
            Part::B => self.b(),
        }
    }

    /// Whether `z` is long enough to hold separate `x` and `y` of length ℓ.
    pub fn refined(&self) -> bool {
        self.ell >= 1 && self.widths[1] >= 4 * self.ell
    }

    /// Column runs of B: `(left, middle, right)` widths.
    pub fn runs(&self) -> (usize, usize, usize) {
        let (wb, l) = (self.widths[1], self.ell);
        if self.refined() {
            let left = (wb - 2 * l) / 2;
            (left, 2 * l, wb - 2 * l - left)
        } else {
            (l, wb - 2 * l, l)
        }
    }

    pub fn segments(&self) -> SegmentDecomposition {
        let (left, mid, _right) = self.runs();
        let (x_len, _y_len) = if self.refined() { (self.ell, self.ell) } else { (mid / 2, mid - mid / 2) };
        let b = self.b();
        let mut labels: HashMap<Edge, Segments> = HashMap::new();
        let mut put = |e: Edge, s: Segments| {
            *labels.entry(e).or_insert(Segments::empty()) |= s;
        };
        let ra = self.a();
        for be in ra.boundary() {
            if be.side != Side::East {
                put(be.edge, Segments::A);
            }
        }
        let rc = self.c();
        for be in rc.boundary() {
            if be.side != Side::West {
                put(be.edge, Segments::B);
            }
        }
        for be in b.boundary() {
            match be.side {
                Side::West => put(be.edge, Segments::D),
                Side::East => put(be.edge, Segments::C),
                Side::North | Side::South => {
                    let j = be.index;
                    if j < left {
                        put(be.edge, Segments::A | Segments::D);
                    } else if j < left + mid {
                        if j - left < x_len {
                            put(be.edge, Segments::X);
                        } else {
                            put(be.edge, Segments::Y);
                        }
                    } else {
                        put(be.edge, Segments::B | Segments::C);
                    }
                }
            }
        }
        let boundaries = Part::ALL.map(|p| self.region(p).boundary_edges());
        SegmentDecomposition { labels, boundaries }
    }
}

/// Segment labels of every edge appearing on any of the four boundaries.
#[derive(Clone, Debug)]
pub struct SegmentDecomposition {
    pub labels: HashMap<Edge, Segments>,
    /// Boundary edge lists of ABC, AB, BC and B in cycle order.
    pub boundaries: [Vec<Edge>; 4],
}

impl SegmentDecomposition {
    pub fn label(&self, e: &Edge) -> Segments {
        self.labels.get(e).copied().unwrap_or(Segments::empty())
    }

    pub fn boundary(&self, part: Part) -> &[Edge] {
        let i = Part::ALL.iter().position(|p| *p == part).unwrap();
        &self.boundaries[i]
    }

    /// Edges of one boundary carrying any of the flags in `seg`.
    pub fn edges(&self, part: Part, seg: Segments) -> Vec<Edge> {
        self.boundary(part).iter().copied().filter(|e| self.label(e).intersects(seg)).collect()
    }
}
