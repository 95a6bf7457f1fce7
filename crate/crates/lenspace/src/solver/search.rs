//! Shortest-path search cores: lazy-deletion Dijkstra and multi-terminal A*
//! over the implicit grid graph, with reusable epoch-stamped scratch buffers
//! so short-range queries cost proportional to the region they explore.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::Point;

use super::grid::GridGeom;

pub(super) const NO_PRED: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Entry {
    /// Priority key: g + heuristic (plain g for Dijkstra).
    f: f64,
    /// Tentative cost from the source terminal set.
    g: f64,
    node: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.node == other.node
    }
}
impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties broken by node index for
        // reproducible pop order
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Epoch-stamped distance/predecessor buffers, reusable across searches
/// without reinitialization.
pub(super) struct Scratch {
    dist: Vec<f64>,
    pred: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    pub(super) fn new(n: usize) -> Self {
        Scratch { dist: vec![0.0; n], pred: vec![NO_PRED; n], stamp: vec![0; n], epoch: 0 }
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    #[inline]
    pub(super) fn get(&self, node: u32) -> f64 {
        if self.stamp[node as usize] == self.epoch {
            self.dist[node as usize]
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn set(&mut self, node: u32, g: f64, pred: u32) {
        let i = node as usize;
        self.dist[i] = g;
        self.pred[i] = pred;
        self.stamp[i] = self.epoch;
    }

    #[inline]
    pub(super) fn pred(&self, node: u32) -> u32 {
        if self.stamp[node as usize] == self.epoch {
            self.pred[node as usize]
        } else {
            NO_PRED
        }
    }

    /// Snapshot the settled distances as a dense field (unreached = inf).
    pub(super) fn to_field(&self) -> Vec<f64> {
        let n = self.dist.len();
        let mut dist = vec![f64::INFINITY; n];
        for i in 0..n {
            if self.stamp[i] == self.epoch {
                dist[i] = self.dist[i];
            }
        }
        dist
    }
}

/// Grid graph parameters shared by all searches of one solver.
pub(super) struct Graph<'a> {
    pub geom: &'a GridGeom,
    pub phi: &'a [f64],
    /// (di, dj, segment Euclidean length)
    pub offsets: &'a [(i32, i32, f64)],
    pub w_min: f64,
}

impl Graph<'_> {
    #[inline]
    fn relax_neighbors(&self, heap: &mut BinaryHeap<Entry>, scratch: &mut Scratch, e: Entry, goal: Option<Point>) {
        let (i, j) = self.geom.ij(e.node);
        let phi_u = self.phi[e.node as usize];
        for &(di, dj, seg) in self.offsets {
            let (ni, nj) = (i as isize + di as isize, j as isize + dj as isize);
            if ni < 0 || nj < 0 || ni >= self.geom.nx as isize || nj >= self.geom.ny as isize {
                continue;
            }
            let v = self.geom.id(ni as usize, nj as usize);
            let w = seg * 0.5 * (phi_u + self.phi[v as usize]);
            let g = e.g + w;
            if g < scratch.get(v) {
                scratch.set(v, g, e.node);
                let f = match goal {
                    Some(t) => g + self.w_min * self.geom.point_of(v).euclid(t),
                    None => g,
                };
                heap.push(Entry { f, g, node: v });
            }
        }
    }

    /// Multi-source search. With `goal = Some(point)` runs A* guided by the
    /// admissible heuristic `w_min * |. - goal|` and stops once `targets`
    /// cannot improve anymore; with `goal = None` settles the whole reachable
    /// graph. Returns the best `dist + link cost` over the target links (if
    /// any) and the link node attaining it.
    pub(super) fn search(
        &self,
        scratch: &mut Scratch,
        sources: &[(u32, f64)],
        targets: &[(u32, f64)],
        goal: Option<Point>,
        upper_bound: f64,
    ) -> (f64, Option<u32>) {
        scratch.begin();
        let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
        for &(node, cost) in sources {
            if cost < scratch.get(node) {
                scratch.set(node, cost, NO_PRED);
                let f = match goal {
                    Some(t) => cost + self.w_min * self.geom.point_of(node).euclid(t),
                    None => cost,
                };
                heap.push(Entry { f, g: cost, node });
            }
        }
        let mut by_node: Vec<(u32, f64)> = targets.to_vec();
        by_node.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut best = upper_bound;
        let mut best_node = None;
        while let Some(e) = heap.pop() {
            if e.g > scratch.get(e.node) {
                continue; // stale
            }
            if !by_node.is_empty() {
                if e.f >= best {
                    break; // no target link can improve below the key floor
                }
                // settled: update target candidates through this node
                let mut k = by_node.partition_point(|t| t.0 < e.node);
                while k < by_node.len() && by_node[k].0 == e.node {
                    let cand = e.g + by_node[k].1;
                    if cand < best {
                        best = cand;
                        best_node = Some(e.node);
                    }
                    k += 1;
                }
            }
            self.relax_neighbors(&mut heap, scratch, e, goal);
        }
        (best, best_node)
    }
}
