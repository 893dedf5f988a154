//! Uniform-grid bucketing for neighbor queries over a whole population.
//!
//! Results are identical to the linear scan in [`crate::geometry::proximity_set`],
//! including the ascending-index tie-break.

use crate::geometry::{pairwise_distance, Position, ProximityRule};

pub struct GridIndex<'a> {
    points: &'a [Position],
    min_x: f64,
    min_y: f64,
    cell: f64,
    cols: usize,
    rows: usize,
    // cell -> point indices, ascending
    buckets: Vec<Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    /// Builds an index targeting about `per_cell` points per occupied cell.
    pub fn new(points: &'a [Position], per_cell: f64) -> Self {
        let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
        let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        if points.is_empty() {
            (min_x, min_y, max_x, max_y) = (0.0, 0.0, 0.0, 0.0);
        }
        let w = (max_x - min_x).max(f64::MIN_POSITIVE);
        let h = (max_y - min_y).max(f64::MIN_POSITIVE);
        let target_cells = (points.len() as f64 / per_cell.max(1.0)).max(1.0);
        let mut cell = (w * h / target_cells).sqrt();
        if !(cell > 0.0 && cell.is_finite()) {
            cell = w.max(h).max(1.0);
        }
        // keep the grid bounded for degenerate (collinear) layouts
        let max_side = (4.0 * target_cells).sqrt().ceil().max(1.0);
        cell = cell.max(w.max(h) / max_side);
        let cols = ((w / cell).floor() as usize + 1).max(1);
        let rows = ((h / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); cols * rows];
        let mut index = GridIndex {
            points,
            min_x,
            min_y,
            cell,
            cols,
            rows,
            buckets: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = index.cell_of(*p);
            buckets[cy * cols + cx].push(i);
        }
        index.buckets = buckets;
        index
    }

    fn cell_of(&self, p: Position) -> (usize, usize) {
        let cx = ((p.x - self.min_x) / self.cell).floor();
        let cy = ((p.y - self.min_y) / self.cell).floor();
        (
            (cx.max(0.0) as usize).min(self.cols - 1),
            (cy.max(0.0) as usize).min(self.rows - 1),
        )
    }

    /// Neighbors of `origin` under `rule`, skipping index `skip`. Sorted ascending by index.
    pub fn neighbors(&self, origin: Position, skip: usize, rule: ProximityRule) -> Vec<usize> {
        let mut out = match rule {
            ProximityRule::FixedCount(k) => self.k_nearest(origin, skip, k),
            ProximityRule::Radius(r) => self.within(origin, skip, r),
        };
        out.sort_unstable();
        out
    }

    fn ring(&self, cx: usize, cy: usize, r: usize, mut visit: impl FnMut(usize)) {
        let (cx, cy, r) = (cx as isize, cy as isize, r as isize);
        let (cols, rows) = (self.cols as isize, self.rows as isize);
        for y in (cy - r)..=(cy + r) {
            if y < 0 || y >= rows {
                continue;
            }
            let on_edge = y == cy - r || y == cy + r;
            let mut x = cx - r;
            while x <= cx + r {
                if x >= 0 && x < cols {
                    for &j in &self.buckets[(y * cols + x) as usize] {
                        visit(j);
                    }
                }
                x += if on_edge || r == 0 { 1 } else { 2 * r };
            }
        }
    }

    fn k_nearest(&self, origin: Position, skip: usize, k: usize) -> Vec<usize> {
        let available = self.points.len() - usize::from(skip < self.points.len());
        let k = k.min(available);
        if k == 0 {
            return Vec::new();
        }
        let (cx, cy) = self.cell_of(origin);
        // offset of the origin inside its own cell, clamped for points outside the grid box
        let fx = ((origin.x - self.min_x) / self.cell - cx as f64).clamp(0.0, 1.0);
        let fy = ((origin.y - self.min_y) / self.cell - cy as f64).clamp(0.0, 1.0);
        let inner = fx.min(1.0 - fx).min(fy).min(1.0 - fy) * self.cell;
        let max_ring = self.cols.max(self.rows);
        let mut cand: Vec<(f64, usize)> = Vec::with_capacity(4 * k);
        let mut r = 0;
        loop {
            self.ring(cx, cy, r, |j| {
                if j != skip {
                    cand.push((pairwise_distance(origin, self.points[j]), j));
                }
            });
            if cand.len() >= k {
                cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                cand.truncate(k);
                // anything outside rings 0..=r is at least this far away
                let bound = inner + r as f64 * self.cell;
                if cand[k - 1].0 < bound || r >= max_ring {
                    break;
                }
            } else if r >= max_ring {
                break;
            }
            r += 1;
        }
        cand.into_iter().map(|(_, j)| j).collect()
    }

    fn within(&self, origin: Position, skip: usize, radius: f64) -> Vec<usize> {
        let (cx, cy) = self.cell_of(origin);
        let reach = ((radius / self.cell).ceil() as usize + 1).min(self.cols.max(self.rows));
        let mut out = Vec::new();
        for r in 0..=reach {
            self.ring(cx, cy, r, |j| {
                if j != skip && pairwise_distance(origin, self.points[j]) <= radius {
                    out.push(j);
                }
            });
        }
        out
    }
}
