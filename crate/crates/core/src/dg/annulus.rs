use serde::{Deserialize, Serialize};

use crate::operator::GridSpec;

/// k = 0 is the ball B_x(r); k >= 1 is B_x(2^k r) \ B_x(2^{k-1} r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicAnnulus {
    pub center: usize,
    pub base_radius: f64,
    pub index: u32,
}

/// Smallest k with dist <= 2^k r.
pub fn annulus_index(dist: f64, r: f64) -> u32 {
    let mut k = 0;
    let mut outer = r;
    while dist > outer {
        k += 1;
        outer *= 2.0;
    }
    k
}

pub fn outer_radius(r: f64, k: u32) -> f64 {
    r * 2f64.powi(k as i32)
}

pub fn annulus_mask(a: &DyadicAnnulus, grid: &GridSpec) -> Vec<bool> {
    (0..grid.len())
        .map(|i| annulus_index(grid.dist(a.center, i), a.base_radius) == a.index)
        .collect()
}

pub fn annulus_nodes(grid: &GridSpec, x: usize, r: f64, k: u32) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| annulus_index(grid.dist(x, i), r) == k)
        .collect()
}

/// Nodes of every annulus around x, indexed by k, up to the farthest node.
pub fn annulus_partition(grid: &GridSpec, x: usize, r: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..grid.len() {
        let k = annulus_index(grid.dist(x, i), r) as usize;
        if out.len() <= k {
            out.resize(k + 1, Vec::new());
        }
        out[k].push(i);
    }
    out
}

pub fn ball_nodes(grid: &GridSpec, x: usize, r: f64) -> Vec<usize> {
    annulus_nodes(grid, x, r, 0)
}
