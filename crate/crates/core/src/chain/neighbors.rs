//! Uniform-grid cell list and a Verlet neighbour list for the short-range
//! repulsion between non-adjacent beads.

use crate::geometry::Point2;

/// Beads binned into square cells, stored in compressed rows.
#[derive(Debug, Clone)]
pub struct CellList {
    cell: f64,
    origin: Point2,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    entries: Vec<usize>,
}

impl CellList {
    pub fn build(points: &[Point2], cell: f64) -> Self {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        if points.is_empty() {
            lo = Point2::ZERO;
            hi = Point2::ZERO;
        }
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut list = CellList {
            cell,
            origin: lo,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            entries: vec![0; points.len()],
        };
        let keys: Vec<usize> = points.iter().map(|p| list.key(*p)).collect();
        for &k in &keys {
            list.starts[k + 1] += 1;
        }
        for c in 0..nx * ny {
            list.starts[c + 1] += list.starts[c];
        }
        let mut fill = list.starts.clone();
        for (i, &k) in keys.iter().enumerate() {
            list.entries[fill[k]] = i;
            fill[k] += 1;
        }
        list
    }

    fn coords(&self, p: Point2) -> (usize, usize) {
        let cx = (((p.x - self.origin.x) / self.cell).floor() as usize).min(self.nx - 1);
        let cy = (((p.y - self.origin.y) / self.cell).floor() as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn key(&self, p: Point2) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.nx + cx
    }

    /// Calls `f(i, j)` once for every pair `i < j` in the same or adjacent
    /// cells.
    pub fn for_each_candidate_pair(&self, points: &[Point2], mut f: impl FnMut(usize, usize)) {
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = self.coords(*p);
            for ny in cy.saturating_sub(1)..=(cy + 1).min(self.ny - 1) {
                for nx in cx.saturating_sub(1)..=(cx + 1).min(self.nx - 1) {
                    let c = ny * self.nx + nx;
                    for &j in &self.entries[self.starts[c]..self.starts[c + 1]] {
                        if j > i {
                            f(i, j);
                        }
                    }
                }
            }
        }
    }
}

/// Pairs of beads at least two apart along the chain and within
/// `cutoff + skin`. Rebuilt once any bead has moved more than `skin / 2`.
#[derive(Debug, Clone)]
pub struct NeighborList {
    cutoff: f64,
    skin: f64,
    pairs: Vec<(usize, usize)>,
    reference: Vec<Point2>,
    rebuilds: usize,
}

impl NeighborList {
    pub fn new(cutoff: f64, skin: f64) -> Self {
        NeighborList {
            cutoff,
            skin,
            pairs: Vec::new(),
            reference: Vec::new(),
            rebuilds: 0,
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn update(&mut self, points: &[Point2]) {
        let limit = 0.25 * self.skin * self.skin;
        let stale = self.reference.len() != points.len()
            || points
                .iter()
                .zip(&self.reference)
                .any(|(p, q)| (*p - *q).norm_sq() > limit);
        if stale {
            self.rebuild(points);
        }
    }

    fn rebuild(&mut self, points: &[Point2]) {
        let reach = self.cutoff + self.skin;
        self.pairs = non_adjacent_pairs_within(points, reach);
        self.reference = points.to_vec();
        self.rebuilds += 1;
    }
}

/// All pairs `(i, j)` with `j >= i + 2` closer than `reach`, sorted.
pub fn non_adjacent_pairs_within(points: &[Point2], reach: f64) -> Vec<(usize, usize)> {
    let cells = CellList::build(points, reach);
    let reach_sq = reach * reach;
    let mut pairs = Vec::new();
    cells.for_each_candidate_pair(points, |i, j| {
        if j >= i + 2 && (points[i] - points[j]).norm_sq() < reach_sq {
            pairs.push((i, j));
        }
    });
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Point2], reach: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 2..points.len() {
                if points[i].distance(points[j]) < reach {
                    out.push((i, j));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn cell_list_matches_brute_force(coords in prop::collection::vec((-20.0..20.0f64, -5.0..5.0f64), 0..80)) {
            let pts: Vec<Point2> = coords.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
            prop_assert_eq!(non_adjacent_pairs_within(&pts, 2.3), brute(&pts, 2.3));
        }
    }

    #[test]
    fn neighbor_list_rebuilds_only_when_stale() {
        let mut pts: Vec<Point2> = (0..10).map(|i| Point2::new(i as f64, 0.0)).collect();
        let mut nl = NeighborList::new(2.0, 0.4);
        nl.update(&pts);
        assert_eq!(nl.rebuilds(), 1);
        pts[3].y += 0.1;
        nl.update(&pts);
        assert_eq!(nl.rebuilds(), 1);
        pts[3].y += 0.2;
        nl.update(&pts);
        assert_eq!(nl.rebuilds(), 2);
    }
}
