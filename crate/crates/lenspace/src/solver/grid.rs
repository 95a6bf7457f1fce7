//! Interior-node grid geometry for an open rectangle.

use crate::geom::{Point, Rect};

/// Grid points strictly inside the open rectangle: `(x1_lo + (i+1) h,
/// x2_lo + (j+1) h)` for `0 <= i < nx`, `0 <= j < ny`, with the deterministic
/// node ordering `id = j * nx + i`.
#[derive(Clone, Copy, Debug)]
pub struct GridGeom {
    pub rect: Rect,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

fn interior_count(extent: f64, h: f64) -> usize {
    // strictly interior multiples of h, robust to extents that are exact
    // multiples of h up to rounding
    ((extent / h) * (1.0 - 1e-12)).floor() as usize
}

impl GridGeom {
    pub fn new(rect: Rect, h: f64) -> Self {
        GridGeom {
            rect,
            h,
            nx: interior_count(rect.width(), h),
            ny: interior_count(rect.height(), h),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn id(&self, i: usize, j: usize) -> u32 {
        (j * self.nx + i) as u32
    }

    #[inline]
    pub fn ij(&self, id: u32) -> (usize, usize) {
        let id = id as usize;
        (id % self.nx, id / self.nx)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.rect.x1_lo + (i as f64 + 1.0) * self.h,
            self.rect.x2_lo + (j as f64 + 1.0) * self.h,
        )
    }

    #[inline]
    pub fn point_of(&self, id: u32) -> Point {
        let (i, j) = self.ij(id);
        self.point(i, j)
    }

    /// Fractional grid indices of `p` (0 at the first interior node).
    fn frac_indices(&self, p: Point) -> (f64, f64) {
        (
            (p.x1 - self.rect.x1_lo) / self.h - 1.0,
            (p.x2 - self.rect.x2_lo) / self.h - 1.0,
        )
    }

    /// The node `p` coincides with, if any (tolerance 1e-9 grid steps).
    pub fn node_at(&self, p: Point) -> Option<u32> {
        let (gi, gj) = self.frac_indices(p);
        let (ri, rj) = (gi.round(), gj.round());
        if (gi - ri).abs() > 1e-9 || (gj - rj).abs() > 1e-9 {
            return None;
        }
        if ri < 0.0 || rj < 0.0 || ri >= self.nx as f64 || rj >= self.ny as f64 {
            return None;
        }
        Some(self.id(ri as usize, rj as usize))
    }

    /// Nodes within Chebyshev radius `reach` grid steps of `p`.
    pub fn nodes_near(&self, p: Point, reach: i32) -> Vec<u32> {
        let (gi, gj) = self.frac_indices(p);
        let lo = |g: f64| (g - reach as f64).ceil().max(0.0) as usize;
        let hi = |g: f64, n: usize| ((g + reach as f64).floor() as isize).min(n as isize - 1);
        let (i0, j0) = (lo(gi), lo(gj));
        let (i1, j1) = (hi(gi, self.nx), hi(gj, self.ny));
        let mut out = Vec::new();
        if i1 < i0 as isize || j1 < j0 as isize {
            return out;
        }
        for j in j0..=(j1 as usize) {
            for i in i0..=(i1 as usize) {
                out.push(self.id(i, j));
            }
        }
        out
    }

    /// Node nearest to `p` (componentwise clamped rounding).
    pub fn nearest_node(&self, p: Point) -> u32 {
        let (gi, gj) = self.frac_indices(p);
        let i = (gi.round().max(0.0) as usize).min(self.nx - 1);
        let j = (gj.round().max(0.0) as usize).min(self.ny - 1);
        self.id(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_interior_node_counts() {
        let g = GridGeom::new(Rect::unit_square(), 1.0 / 64.0);
        assert_eq!((g.nx, g.ny), (63, 63));
        let g = GridGeom::new(Rect::unit_square(), 2f64.powi(-12));
        assert_eq!((g.nx, g.ny), (4095, 4095));
        // non-divisible step
        let g = GridGeom::new(Rect::unit_square(), 0.3);
        assert_eq!((g.nx, g.ny), (3, 3));
    }

    #[test]
    fn node_lookup_round_trips() {
        let g = GridGeom::new(Rect::unit_square(), 1.0 / 16.0);
        let p = g.point(3, 7);
        assert_eq!(g.node_at(p), Some(g.id(3, 7)));
        assert_eq!(g.node_at(Point::new(p.x1 + 0.01, p.x2)), None);
        assert_eq!(g.point_of(g.id(3, 7)), p);
    }

    #[test]
    fn nodes_near_respects_bounds() {
        let g = GridGeom::new(Rect::unit_square(), 1.0 / 16.0);
        // point near the lower-left corner sees only in-domain nodes
        let near = g.nodes_near(Point::new(0.01, 0.01), 2);
        assert!(!near.is_empty());
        for id in near {
            let p = g.point_of(id);
            assert!(g.rect.contains(p));
            assert!((p.x1 - 0.01).abs() <= 2.0 / 16.0 + 1e-12);
        }
    }
}
