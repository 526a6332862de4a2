//! Scan encoders: the logarithmic ring map and the grid/angular/raw baselines.
//!
//! The log map pipeline is
//!
//! 1. down-sample the raw scan to `n_s` sectors by taking the minimum range of
//!    each sector,
//! 2. classify every sector against `n_s` concentric rings whose bounds are
//!    uniform in `ln(1 + r)`: the ring holding the reading is occupied (1.0),
//!    nearer rings are free (0.0), farther rings unknown (0.5),
//! 3. warp the `rings × sectors` polar grid into a Cartesian image with
//!    nearest-neighbour sampling.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lidar::{LidarConfig, Scan};

pub const N_SECTORS: usize = 48;
pub const MAP_SIZE: usize = 48;
pub const FRAME_STACK: usize = 3;

pub const FREE: f32 = 0.0;
pub const UNKNOWN: f32 = 0.5;
pub const OCCUPIED: f32 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DownsampledScan {
    pub sectors: Vec<f64>,
    pub sector_width_deg: f64,
}

/// Per-sector minimum of the raw scan.
pub fn downsample(scan: &Scan, n_s: usize) -> Result<DownsampledScan> {
    if n_s == 0 || scan.is_empty() || !scan.len().is_multiple_of(n_s) {
        return Err(Error::Config(format!(
            "beam count {} is not divisible into {n_s} sectors",
            scan.len()
        )));
    }
    let per = scan.len() / n_s;
    let sectors = scan
        .ranges
        .chunks_exact(per)
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    Ok(DownsampledScan {
        sectors,
        sector_width_deg: scan.fov.to_degrees() / n_s as f64,
    })
}

/// Radial ring partition of `[0, max_range)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingTable {
    /// Interception interval in `ln(1 + r)` space. Zero for linear tables.
    pub g: f64,
    /// `(lower inclusive, upper exclusive)` per ring, in meters.
    pub bounds: Vec<(f64, f64)>,
    pub max_range: f64,
}

impl RingTable {
    /// Rings with bounds `e^{g·k} − 1`, `g = ln(max_range + 1) / n_s`.
    pub fn logarithmic(n_s: usize, max_range: f64) -> Self {
        assert!(n_s >= 1 && max_range > 0.0);
        let g = max_range.ln_1p() / n_s as f64;
        let edge = |k: usize| (g * k as f64).exp_m1();
        let mut bounds: Vec<(f64, f64)> = (0..n_s).map(|k| (edge(k), edge(k + 1))).collect();
        // e^{ln(max+1)} − 1 is max_range up to rounding; pin it so the union is exact
        bounds[n_s - 1].1 = max_range;
        Self {
            g,
            bounds,
            max_range,
        }
    }

    /// Uniform-width rings, the radial split of a linear grid.
    pub fn linear(n_s: usize, max_range: f64) -> Self {
        assert!(n_s >= 1 && max_range > 0.0);
        let w = max_range / n_s as f64;
        let mut bounds: Vec<(f64, f64)> = (0..n_s).map(|k| (w * k as f64, w * (k + 1) as f64)).collect();
        bounds[n_s - 1].1 = max_range;
        Self {
            g: 0.0,
            bounds,
            max_range,
        }
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// Index of the ring containing `d`, by binary search over lower bounds.
    pub fn ring_of(&self, d: f64) -> Option<usize> {
        let k = self.bounds.partition_point(|&(lo, _)| lo <= d).checked_sub(1)?;
        (d < self.bounds[k].1).then_some(k)
    }

    /// Number of rings intersecting `[0, span)`.
    pub fn rings_within(&self, span: f64) -> usize {
        self.bounds.iter().filter(|&&(lo, _)| lo < span).count()
    }
}

/// Cell values of one sector column, nearest ring first.
pub fn classify_sector(distance: f64, table: &RingTable) -> Vec<f32> {
    let mut col = vec![FREE; table.len()];
    if distance >= table.max_range {
        return col;
    }
    if let Some(k) = table.ring_of(distance) {
        col[k] = OCCUPIED;
        col[k + 1..].fill(UNKNOWN);
    }
    col
}

/// Ring × sector occupancy, row-major by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarOccupancy {
    pub n_rings: usize,
    pub n_sectors: usize,
    pub cells: Vec<f32>,
}

impl PolarOccupancy {
    pub fn filled(n_rings: usize, n_sectors: usize, value: f32) -> Self {
        Self {
            n_rings,
            n_sectors,
            cells: vec![value; n_rings * n_sectors],
        }
    }

    pub fn get(&self, ring: usize, sector: usize) -> f32 {
        self.cells[ring * self.n_sectors + sector]
    }

    pub fn set(&mut self, ring: usize, sector: usize, value: f32) {
        self.cells[ring * self.n_sectors + sector] = value;
    }

    pub fn from_sectors(sectors: &[f64], table: &RingTable) -> Self {
        let mut out = Self::filled(table.len(), sectors.len(), FREE);
        for (s, &d) in sectors.iter().enumerate() {
            for (k, v) in classify_sector(d, table).into_iter().enumerate() {
                out.set(k, s, v);
            }
        }
        out
    }
}

/// A single encoded observation channel, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Frame {
    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    fn set(&mut self, row: usize, col: usize, value: f32) {
        self.data[row * self.width + col] = value;
    }
}

/// The log-map image: a [`Frame`] produced by [`PolarWarp::apply`].
pub type LogMap = Frame;

/// Nearest-neighbour inverse polar warp onto a square image.
///
/// The robot sits at the centre of the bottom-middle pixel `(size − 1, size / 2)`,
/// facing up, with its left on the image's left. The sensed half-disc is
/// stretched to the image: a unit radius spans `size − 1` rows forward and
/// `size / 2` columns sideways. Radius maps linearly onto ring index and
/// bearing linearly onto sector index; pixels outside the half-disc read 0.5.
#[derive(Debug, Clone)]
pub struct PolarWarp {
    pub size: usize,
    pub n_rings: usize,
    pub n_sectors: usize,
    pub fov: f64,
    lut: Vec<Option<u32>>,
}

impl PolarWarp {
    pub fn new(size: usize, n_rings: usize, n_sectors: usize, fov: f64) -> Self {
        assert!(size >= 2 && n_rings > 0 && n_sectors > 0);
        let mut w = Self {
            size,
            n_rings,
            n_sectors,
            fov,
            lut: Vec::with_capacity(size * size),
        };
        for r in 0..size {
            for c in 0..size {
                let idx = w
                    .pixel_polar(r, c)
                    .map(|(ring, sector)| (ring * n_sectors + sector) as u32);
                w.lut.push(idx);
            }
        }
        w
    }

    /// Normalised radius in `[0, ∞)` and bearing (left positive) of a pixel centre.
    pub fn pixel_coords(&self, row: usize, col: usize) -> (f64, f64) {
        let fwd = (self.size - 1 - row) as f64 / (self.size - 1) as f64;
        let left = (self.size / 2) as f64 - col as f64;
        let left = left / (self.size / 2) as f64;
        (fwd.hypot(left), left.atan2(fwd))
    }

    /// `(ring, sector)` sampled by a pixel, or `None` outside the footprint.
    pub fn pixel_polar(&self, row: usize, col: usize) -> Option<(usize, usize)> {
        let (rho, theta) = self.pixel_coords(row, col);
        let half = self.fov / 2.0;
        if rho > 1.0 || theta < -half || theta > half {
            return None;
        }
        let ring = ((rho * self.n_rings as f64) as usize).min(self.n_rings - 1);
        let sector = (((theta + half) / self.fov * self.n_sectors as f64) as usize).min(self.n_sectors - 1);
        Some((ring, sector))
    }

    pub fn apply(&self, polar: &PolarOccupancy) -> LogMap {
        assert_eq!(polar.n_rings, self.n_rings);
        assert_eq!(polar.n_sectors, self.n_sectors);
        let data = self
            .lut
            .iter()
            .map(|idx| idx.map_or(UNKNOWN, |i| polar.cells[i as usize]))
            .collect();
        Frame {
            height: self.size,
            width: self.size,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    #[default]
    LogMap,
    GridMap,
    AngularMap,
    Raw,
}

impl EncoderKind {
    pub fn is_image(self) -> bool {
        matches!(self, EncoderKind::LogMap | EncoderKind::GridMap)
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logmap" => Ok(Self::LogMap),
            "gridmap" => Ok(Self::GridMap),
            "angularmap" => Ok(Self::AngularMap),
            "raw" => Ok(Self::Raw),
            other => Err(Error::Config(format!("unknown encoder '{other}'"))),
        }
    }
}

/// Integer Bresenham line, both endpoints included.
pub fn line_cells(a: (isize, isize), b: (isize, isize)) -> impl Iterator<Item = (isize, isize)> {
    let (dx, dy) = ((b.0 - a.0).abs(), -(b.1 - a.1).abs());
    let (sx, sy) = ((b.0 - a.0).signum(), (b.1 - a.1).signum());
    let mut err = dx + dy;
    let mut cur = Some(a);
    std::iter::from_fn(move || {
        let p = cur?;
        cur = if p == b {
            None
        } else {
            let mut q = p;
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                q.0 += sx;
            }
            if e2 <= dx {
                err += dx;
                q.1 += sy;
            }
            Some(q)
        };
        Some(p)
    })
}

/// Egocentric grid map with linear resolution.
///
/// The robot is at the image centre facing up; cells are `2·max_range/size`
/// meters. The rear half is never sensed and stays 0.5.
pub fn build_gridmap(scan: &Scan, size: usize) -> Frame {
    let mut map = Frame::filled(size, size, UNKNOWN);
    let cell = 2.0 * scan.max_range / size as f64;
    let half = size as f64 / 2.0;
    let to_cell = |fwd: f64, left: f64| -> (isize, isize) {
        (
            (half - fwd / cell).floor() as isize,
            (half - left / cell).floor() as isize,
        )
    };
    let inside = |(r, c): (isize, isize)| r >= 0 && c >= 0 && (r as usize) < size && (c as usize) < size;
    let n = scan.len();
    let angle = |j: usize| {
        if n == 1 {
            0.0
        } else {
            -scan.fov / 2.0 + j as f64 * scan.fov / (n - 1) as f64
        }
    };
    let mut hits = Vec::new();
    for (j, &range) in scan.ranges.iter().enumerate() {
        let (s, c) = angle(j).sin_cos();
        let start = to_cell(1e-3 * c, 1e-3 * s);
        let end = to_cell(range * c, range * s);
        for p in line_cells(start, end) {
            if inside(p) {
                map.set(p.0 as usize, p.1 as usize, FREE);
            }
        }
        if range < scan.max_range && inside(end) {
            hits.push(end);
        }
    }
    for (r, c) in hits {
        map.set(r as usize, c as usize, OCCUPIED);
    }
    map
}

/// Down-sampled scan scaled into `[0, 1]` by the maximum range.
pub fn build_angularmap(scan: &Scan, n_s: usize) -> Result<Frame> {
    let ds = downsample(scan, n_s)?;
    Ok(Frame {
        height: 1,
        width: n_s,
        data: ds.sectors.iter().map(|&d| (d / scan.max_range) as f32).collect(),
    })
}

pub fn build_raw(scan: &Scan) -> Frame {
    Frame {
        height: 1,
        width: scan.len(),
        data: scan.ranges.iter().map(|&d| (d / scan.max_range) as f32).collect(),
    }
}

/// Encoder with its precomputed ring table and warp.
#[derive(Debug, Clone)]
pub struct Encoder {
    pub kind: EncoderKind,
    pub n_s: usize,
    pub map_size: usize,
    pub lidar: LidarConfig,
    pub table: RingTable,
    warp: PolarWarp,
}

impl Encoder {
    pub fn new(kind: EncoderKind, lidar: LidarConfig) -> Result<Self> {
        Self::with_sizes(kind, lidar, N_SECTORS, MAP_SIZE)
    }

    pub fn with_sizes(kind: EncoderKind, lidar: LidarConfig, n_s: usize, map_size: usize) -> Result<Self> {
        if n_s == 0 || !lidar.n_beams.is_multiple_of(n_s) {
            return Err(Error::Config(format!(
                "beam count {} is not divisible into {n_s} sectors",
                lidar.n_beams
            )));
        }
        if map_size < 2 {
            return Err(Error::Config("map size must be >= 2".into()));
        }
        Ok(Self {
            kind,
            n_s,
            map_size,
            lidar,
            table: RingTable::logarithmic(n_s, lidar.max_range),
            warp: PolarWarp::new(map_size, n_s, n_s, lidar.fov),
        })
    }

    /// `(height, width)` of one encoded frame.
    pub fn frame_shape(&self) -> (usize, usize) {
        match self.kind {
            EncoderKind::LogMap | EncoderKind::GridMap => (self.map_size, self.map_size),
            EncoderKind::AngularMap => (1, self.n_s),
            EncoderKind::Raw => (1, self.lidar.n_beams),
        }
    }

    pub fn warp(&self) -> &PolarWarp {
        &self.warp
    }

    pub fn polar(&self, scan: &Scan) -> Result<PolarOccupancy> {
        let ds = downsample(scan, self.n_s)?;
        Ok(PolarOccupancy::from_sectors(&ds.sectors, &self.table))
    }

    pub fn encode(&self, scan: &Scan) -> Result<Frame> {
        if scan.len() != self.lidar.n_beams {
            return Err(Error::Config(format!(
                "scan has {} beams, encoder expects {}",
                scan.len(),
                self.lidar.n_beams
            )));
        }
        match self.kind {
            EncoderKind::LogMap => Ok(self.warp.apply(&self.polar(scan)?)),
            EncoderKind::GridMap => Ok(build_gridmap(scan, self.map_size)),
            EncoderKind::AngularMap => build_angularmap(scan, self.n_s),
            EncoderKind::Raw => Ok(build_raw(scan)),
        }
    }
}

/// Log map with the default 48 sectors/rings and 48×48 image.
pub fn build_logmap(scan: &Scan) -> Result<LogMap> {
    let lidar = LidarConfig {
        n_beams: scan.len(),
        max_range: scan.max_range,
        fov: scan.fov,
    };
    Encoder::new(EncoderKind::LogMap, lidar)?.encode(scan)
}

/// The last three frames, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameStack {
    frames: VecDeque<Frame>,
}

impl FrameStack {
    pub fn new(first: Frame) -> Self {
        Self {
            frames: std::iter::repeat_n(first, FRAME_STACK).collect(),
        }
    }

    pub fn reset(&mut self, first: Frame) {
        *self = Self::new(first);
    }

    pub fn push(&mut self, frame: Frame) {
        self.frames.pop_front();
        self.frames.push_back(frame);
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Channel-major `[3, height, width]` buffer.
    pub fn flatten_into(&self, out: &mut Vec<f32>) {
        for f in &self.frames {
            out.extend_from_slice(&f.data);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn scan(ranges: Vec<f64>) -> Scan {
        Scan::from_ranges(ranges, 6.0, PI)
    }

    #[test]
    fn downsample_examples() {
        let ds = downsample(&scan(vec![4.0; 960]), 48).unwrap();
        assert!(ds.sectors.iter().all(|&d| d == 4.0));
        assert_eq!(ds.sector_width_deg, 3.75);

        let mut r = vec![6.0; 960];
        r[7 * 20 + 13] = 1.0;
        let ds = downsample(&scan(r), 48).unwrap();
        for (k, &d) in ds.sectors.iter().enumerate() {
            assert_eq!(d, if k == 7 { 1.0 } else { 6.0 });
        }
        assert!(matches!(downsample(&scan(vec![1.0; 950]), 48), Err(Error::Config(_))));
    }

    #[test]
    fn ring_table_examples() {
        let t = RingTable::logarithmic(48, 6.0);
        assert!((t.g - 0.0405398).abs() < 1e-7);
        assert!((t.g - 7f64.ln() / 48.0).abs() < 1e-12);
        assert_eq!(t.bounds[0].0, 0.0);
        assert!((t.bounds[0].1 - 0.041373).abs() < 1e-6);
        assert!(((t.g * 48.0).exp() - 1.0 - 6.0).abs() < 1e-9);
        assert_eq!(t.bounds[47].1, 6.0);
        for k in 1..48 {
            assert_eq!(t.bounds[k - 1].1, t.bounds[k].0);
            assert!(t.bounds[k].0 < t.bounds[k].1);
        }
    }

    #[test]
    fn classify_examples() {
        let t = RingTable::logarithmic(48, 6.0);
        let col = classify_sector(2.0, &t);
        let k = (3f64.ln() / t.g).floor() as usize;
        assert_eq!(k, 27);
        for (i, &v) in col.iter().enumerate() {
            let want = match i.cmp(&27) {
                std::cmp::Ordering::Less => FREE,
                std::cmp::Ordering::Equal => OCCUPIED,
                std::cmp::Ordering::Greater => UNKNOWN,
            };
            assert_eq!(v, want, "ring {i}");
        }
        assert!(classify_sector(6.0, &t).iter().all(|&v| v == FREE));
        let col = classify_sector(0.02, &t);
        assert_eq!(col[0], OCCUPIED);
        assert!(col[1..].iter().all(|&v| v == UNKNOWN));
    }

    #[test]
    fn ring_lookup_agrees_with_linear_scan() {
        let t = RingTable::logarithmic(48, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1_000_000 {
            let d: f64 = rng.random_range(0.0..6.0);
            let linear: Vec<usize> = (0..48).filter(|&k| t.bounds[k].0 <= d && d < t.bounds[k].1).collect();
            assert_eq!(linear.len(), 1);
            assert_eq!(t.ring_of(d), Some(linear[0]));
        }
    }

    #[test]
    fn near_field_ring_allocation() {
        let log = RingTable::logarithmic(48, 6.0);
        let lin = RingTable::linear(48, 6.0);
        assert_eq!(log.rings_within(1.0), (2f64.ln() / log.g).ceil() as usize);
        assert_eq!(log.rings_within(1.0), 18);
        assert_eq!(lin.rings_within(1.0), 8);
    }

    #[test]
    fn polar_column_structure_fuzz() {
        let t = RingTable::logarithmic(48, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let d = if rng.random_bool(0.05) { 6.0 } else { rng.random_range(1e-6..6.0) };
            let col = classify_sector(d, &t);
            let free = col.iter().take_while(|&&v| v == FREE).count();
            if free == col.len() {
                assert_eq!(d, 6.0);
                continue;
            }
            assert_eq!(col[free], OCCUPIED);
            assert!(col[free + 1..].iter().all(|&v| v == UNKNOWN));
        }
    }

    #[test]
    fn warp_all_free() {
        let w = PolarWarp::new(48, 48, 48, PI);
        let img = w.apply(&PolarOccupancy::filled(48, 48, FREE));
        for r in 0..48 {
            for c in 0..48 {
                let want = if w.pixel_polar(r, c).is_some() { FREE } else { UNKNOWN };
                assert_eq!(img.get(r, c), want);
            }
        }
        // corners lie outside the half-disc
        assert_eq!(img.get(0, 0), UNKNOWN);
        assert_eq!(img.get(0, 47), UNKNOWN);
        assert_eq!(img.get(47, 24), FREE);
    }

    #[test]
    fn warp_single_cell_ahead() {
        let w = PolarWarp::new(48, 48, 48, PI);
        let mut p = PolarOccupancy::filled(48, 48, FREE);
        p.set(0, 24, OCCUPIED);
        let img = w.apply(&p);
        let lit: Vec<_> = (0..48 * 48).filter(|&i| img.data[i] == OCCUPIED).map(|i| (i / 48, i % 48)).collect();
        assert_eq!(lit, vec![(47, 24)]);
        // the next ring forward lands on the neighbouring pixel up the axis
        let mut p = PolarOccupancy::filled(48, 48, FREE);
        p.set(1, 24, OCCUPIED);
        assert_eq!(w.apply(&p).get(46, 24), OCCUPIED);
    }

    #[test]
    fn warp_resampling_round_trip() {
        let w = PolarWarp::new(48, 48, 48, PI);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = PolarOccupancy::filled(48, 48, FREE);
        for v in &mut p.cells {
            *v = [FREE, UNKNOWN, OCCUPIED][rng.random_range(0..3)];
        }
        let img = w.apply(&p);
        for r in 0..48 {
            for c in 0..48 {
                let want = w.pixel_polar(r, c).map_or(UNKNOWN, |(k, s)| p.get(k, s));
                assert_eq!(img.get(r, c), want);
            }
        }
    }

    #[test]
    fn logmap_of_empty_scan_is_free_footprint() {
        let img = build_logmap(&scan(vec![6.0; 960])).unwrap();
        let w = PolarWarp::new(48, 48, 48, PI);
        for r in 0..48 {
            for c in 0..48 {
                let want = if w.pixel_polar(r, c).is_some() { FREE } else { UNKNOWN };
                assert_eq!(img.get(r, c), want);
            }
        }
    }

    #[test]
    fn logmap_obstacle_ahead_single_arc() {
        // obstacle 2 m ahead covering the two central sectors
        let mut r = vec![6.0; 960];
        for v in &mut r[460..500] {
            *v = 2.0;
        }
        let img = build_logmap(&scan(r)).unwrap();
        let col = 24;
        let rows: Vec<f32> = (0..48).map(|row| img.get(row, col)).collect();
        let hit_rows: Vec<usize> = (0..48).filter(|&row| rows[row] == OCCUPIED).collect();
        assert!(!hit_rows.is_empty());
        // contiguous
        assert_eq!(hit_rows.last().unwrap() - hit_rows[0] + 1, hit_rows.len());
        // free between robot and arc, unknown beyond it (up the image)
        assert!(rows[hit_rows.last().unwrap() + 1..].iter().all(|&v| v == FREE));
        assert!(rows[..hit_rows[0]].iter().all(|&v| v == UNKNOWN));
        let ring = (3f64.ln() / RingTable::logarithmic(48, 6.0).g) as usize;
        let warp = PolarWarp::new(48, 48, 48, PI);
        for &row in &hit_rows {
            assert_eq!(warp.pixel_polar(row, col).unwrap().0, ring);
        }
    }

    #[test]
    fn logmap_ignores_ranges_beyond_clamp() {
        let a = build_logmap(&scan(vec![9.0; 960])).unwrap();
        let b = build_logmap(&scan(vec![40.0; 960])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn logmap_values_ternary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let r = (0..960).map(|_| rng.random_range(0.0..7.0)).collect();
            let img = build_logmap(&scan(r)).unwrap();
            assert!(img.data.iter().all(|&v| v == FREE || v == UNKNOWN || v == OCCUPIED));
        }
    }

    #[test]
    fn line_cells_connected_and_inclusive() {
        for &(a, b) in &[((0, 0), (5, 2)), ((3, -1), (-4, 6)), ((2, 2), (2, 2)), ((0, 7), (0, -3))] {
            let cells: Vec<_> = line_cells(a, b).collect();
            assert_eq!(cells[0], a);
            assert_eq!(*cells.last().unwrap(), b);
            let span = (b.0 - a.0).abs().max((b.1 - a.1).abs()) as usize;
            assert_eq!(cells.len(), span + 1);
            for w in cells.windows(2) {
                assert!((w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1);
            }
        }
    }

    fn gridmap_cell(range: f64, angle: f64) -> (usize, usize) {
        let cell = 0.25;
        (
            (24.0 - range * angle.cos() / cell).floor() as usize,
            (24.0 - range * angle.sin() / cell).floor() as usize,
        )
    }

    #[test]
    fn gridmap_empty_scan_fan() {
        let img = build_gridmap(&scan(vec![6.0; 960]), 48);
        assert!(!img.data.contains(&OCCUPIED));
        // forward cells traversed, rear half untouched
        assert_eq!(img.get(20, 24), FREE);
        assert_eq!(img.get(1, 24), FREE);
        for r in 25..48 {
            for c in 0..48 {
                assert_eq!(img.get(r, c), UNKNOWN);
            }
        }
    }

    #[test]
    fn gridmap_hit_cell() {
        let cfg = LidarConfig::default();
        let mut r = vec![6.0; 960];
        r[480] = 2.0;
        let img = build_gridmap(&scan(r), 48);
        let (row, col) = gridmap_cell(2.0, cfg.beam_angle(480));
        assert_eq!((row, col), (16, 23));
        assert_eq!(img.get(row, col), OCCUPIED);
        assert_eq!(img.data.iter().filter(|&&v| v == OCCUPIED).count(), 1);
    }

    #[test]
    fn gridmap_near_and_far_obstacle_same_cell_count() {
        for d in [0.3, 5.7] {
            let mut r = vec![6.0; 960];
            r[300] = d;
            let img = build_gridmap(&scan(r), 48);
            assert_eq!(img.data.iter().filter(|&&v| v == OCCUPIED).count(), 1);
            // log map: the same reading is always exactly one ring row in polar space
            let t = RingTable::logarithmic(48, 6.0);
            assert_eq!(classify_sector(d, &t).iter().filter(|&&v| v == OCCUPIED).count(), 1);
        }
    }

    #[test]
    fn angularmap_examples() {
        let a = build_angularmap(&scan(vec![6.0; 960]), 48).unwrap();
        assert!(a.data.iter().all(|&v| v == 1.0));
        let mut r = vec![6.0; 960];
        r[5 * 20..6 * 20].fill(3.0);
        r[7 * 20 + 3] = 1.5;
        let a = build_angularmap(&scan(r), 48).unwrap();
        assert_eq!(a.data[5], 0.5);
        assert_eq!(a.data[7], 0.25);
        assert_eq!(a.data[6], 1.0);
    }

    #[test]
    fn frame_stack_fifo() {
        let f = |v: f32| Frame::filled(1, 1, v);
        let mut s = FrameStack::new(f(1.0));
        let vals = |s: &FrameStack| s.frames().map(|x| x.data[0]).collect::<Vec<_>>();
        assert_eq!(vals(&s), vec![1.0, 1.0, 1.0]);
        s.push(f(2.0));
        assert_eq!(vals(&s), vec![1.0, 1.0, 2.0]);
        s.push(f(3.0));
        s.push(f(4.0));
        assert_eq!(vals(&s), vec![2.0, 3.0, 4.0]);
        s.reset(f(9.0));
        assert_eq!(vals(&s), vec![9.0, 9.0, 9.0]);
    }

    #[test]
    fn encoder_shapes() {
        let lidar = LidarConfig::default();
        let shape = |k| Encoder::new(k, lidar).unwrap().frame_shape();
        assert_eq!(shape(EncoderKind::LogMap), (48, 48));
        assert_eq!(shape(EncoderKind::GridMap), (48, 48));
        assert_eq!(shape(EncoderKind::AngularMap), (1, 48));
        assert_eq!(shape(EncoderKind::Raw), (1, 960));
        let bad = LidarConfig { n_beams: 100, ..lidar };
        assert!(Encoder::new(EncoderKind::LogMap, bad).is_err());
    }
}
