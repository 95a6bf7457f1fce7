//! Deterministic low-discrepancy sampling (Halton sequences) used by the
//! validation and convergence harnesses.

use crate::geom::{Point, Rect};

/// Radical-inverse (van der Corput) value of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * inv;
        index /= base;
        inv /= base as f64;
    }
    value
}

/// `count` Halton points (bases 2, 3) in `rect`, starting at `start` (use
/// `start >= 1`; index 0 is the corner).
pub fn halton_points(rect: Rect, count: usize, start: u64) -> Vec<Point> {
    (0..count as u64)
        .map(|k| {
            let i = start + k;
            Point::new(
                rect.x1_lo + rect.width() * radical_inverse(i, 2),
                rect.x2_lo + rect.height() * radical_inverse(i, 3),
            )
        })
        .collect()
}

/// `count` Halton point pairs (bases 2, 3, 5, 7) in `rect x rect`.
pub fn halton_pairs(rect: Rect, count: usize, start: u64) -> Vec<(Point, Point)> {
    (0..count as u64)
        .map(|k| {
            let i = start + k;
            (
                Point::new(
                    rect.x1_lo + rect.width() * radical_inverse(i, 2),
                    rect.x2_lo + rect.height() * radical_inverse(i, 3),
                ),
                Point::new(
                    rect.x1_lo + rect.width() * radical_inverse(i, 5),
                    rect.x2_lo + rect.height() * radical_inverse(i, 7),
                ),
            )
        })
        .collect()
}

/// Uniform `m x m` lattice over the closed rectangle, corners included,
/// row-major deterministic order.
pub fn lattice_points(rect: Rect, m: usize) -> Vec<Point> {
    assert!(m >= 2, "lattice needs at least 2 points per side");
    let mut out = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            out.push(Point::new(
                rect.x1_lo + rect.width() * i as f64 / (m - 1) as f64,
                rect.x2_lo + rect.height() * j as f64 / (m - 1) as f64,
            ));
        }
    }
    out
}

/// Axis-adjacent neighbor pairs of the `m x m` lattice.
pub fn lattice_neighbor_pairs(rect: Rect, m: usize) -> Vec<(Point, Point)> {
    let pts = lattice_points(rect, m);
    let mut out = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if i + 1 < m {
                out.push((pts[j * m + i], pts[j * m + i + 1]));
            }
            if j + 1 < m {
                out.push((pts[j * m + i], pts[(j + 1) * m + i]));
            }
        }
    }
    out
}
