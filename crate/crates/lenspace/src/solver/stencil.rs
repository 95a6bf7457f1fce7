//! Neighbor stencils for the grid graph.

use serde::{Deserialize, Serialize};

/// Stencil order: `One` is the 8-neighbor stencil (axis + diagonal), `Two`
/// adds the knight moves for a 16-neighbor stencil.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilOrder {
    One,
    Two,
}

const OFFSETS_8: [(i32, i32); 8] =
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

const OFFSETS_16: [(i32, i32); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (1, -2),
    (2, -1),
    (-1, -2),
    (-2, -1),
];

impl StencilOrder {
    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            1 => Some(StencilOrder::One),
            2 => Some(StencilOrder::Two),
            _ => None,
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            StencilOrder::One => 1,
            StencilOrder::Two => 2,
        }
    }

    pub fn offsets(&self) -> &'static [(i32, i32)] {
        match self {
            StencilOrder::One => &OFFSETS_8,
            StencilOrder::Two => &OFFSETS_16,
        }
    }

    /// Chebyshev radius of the stencil, in grid steps.
    pub fn reach(&self) -> i32 {
        match self {
            StencilOrder::One => 1,
            StencilOrder::Two => 2,
        }
    }

    /// Worst-case relative overestimate of grid shortest paths against the
    /// continuum metric: the unit ball of the graph metric is the polygon
    /// inscribed through the stencil directions, so the gauge exceeds the
    /// Euclidean norm by at most `sec(gap / 2) - 1` over the largest angular
    /// gap between adjacent directions.
    pub fn anisotropy_bound(&self) -> f64 {
        let mut angles: Vec<f64> = self
            .offsets()
            .iter()
            .map(|&(di, dj)| (dj as f64).atan2(di as f64))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut max_gap: f64 = 0.0;
        for w in angles.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        max_gap = max_gap.max(angles[0] + 2.0 * std::f64::consts::PI - angles[angles.len() - 1]);
        1.0 / (max_gap / 2.0).cos() - 1.0
    }
}
