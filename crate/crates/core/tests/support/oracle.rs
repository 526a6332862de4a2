//! Brute-force log-map construction: every pixel independently walks the raw
//! beams of its sector and the rings up to its own.

use std::f64::consts::FRAC_PI_2;

pub const SIZE: usize = 48;
pub const RINGS: usize = 48;
pub const SECTORS: usize = 48;

/// Ring `k` spans `[e^{gk} − 1, e^{g(k+1)} − 1)`, last ring closed at `max_range`.
pub fn ring_edges(max_range: f64) -> Vec<f64> {
    let g = (max_range + 1.0).ln() / RINGS as f64;
    let mut e: Vec<f64> = (0..=RINGS).map(|k| (g * k as f64).exp_m1()).collect();
    e[RINGS] = max_range;
    e
}

/// `(ring, sector)` under pixel `(row, col)`: the robot is at the bottom-middle
/// pixel, radius normalised so the forward edge is 1, bearing left-positive.
fn pixel_cell(row: usize, col: usize) -> Option<(usize, usize)> {
    let fwd = (SIZE - 1 - row) as f64 / (SIZE - 1) as f64;
    let left = ((SIZE / 2) as f64 - col as f64) / (SIZE / 2) as f64;
    let rho = fwd.hypot(left);
    let theta = left.atan2(fwd);
    if rho > 1.0 || !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
        return None;
    }
    let ring = ((rho * RINGS as f64) as usize).min(RINGS - 1);
    let sector = (((theta + FRAC_PI_2) / std::f64::consts::PI * SECTORS as f64) as usize).min(SECTORS - 1);
    Some((ring, sector))
}

/// Value of one pixel given the (already clamped) raw ranges.
pub fn oracle_pixel(ranges: &[f64], max_range: f64, edges: &[f64], row: usize, col: usize) -> f32 {
    let Some((ring, sector)) = pixel_cell(row, col) else {
        return 0.5;
    };
    let per = ranges.len() / SECTORS;
    let d = ranges[sector * per..(sector + 1) * per].iter().fold(f64::INFINITY, |a, &r| a.min(r));
    if d >= max_range {
        return 0.0;
    }
    // linear search for the ring holding the reading
    let hit = (0..RINGS).find(|&k| d >= edges[k] && d < edges[k + 1]).expect("rings cover [0, max_range)");
    match ring.cmp(&hit) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => 0.5,
    }
}

pub fn oracle_logmap(ranges: &[f64], max_range: f64) -> Vec<f32> {
    let edges = ring_edges(max_range);
    let mut out = Vec::with_capacity(SIZE * SIZE);
    for row in 0..SIZE {
        for col in 0..SIZE {
            out.push(oracle_pixel(ranges, max_range, &edges, row, col));
        }
    }
    out
}
