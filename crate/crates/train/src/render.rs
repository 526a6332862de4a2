//! Raster output: trajectory/layout images and the grayscale dump of an
//! encoded frame.

use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, Luma, Rgb, RgbImage};

use lognav_core::encoders::line_cells;
use lognav_core::{Frame, Point2, Pose2D, Rect, WorldState};

use crate::error::{io_err, Error, Result};
use crate::trajlog::TrajectoryLog;

pub const DEFAULT_PIXELS_PER_METER: f64 = 50.0;
/// Extent added around unbounded worlds.
const MARGIN: f64 = 1.0;

const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const OBSTACLE: Rgb<u8> = Rgb([110, 110, 110]);
const BOUNDS: Rgb<u8> = Rgb([0, 0, 0]);
const PALETTE: [[u8; 3]; 8] = [
    [228, 26, 28],
    [55, 126, 184],
    [77, 175, 74],
    [152, 78, 163],
    [255, 127, 0],
    [166, 86, 40],
    [247, 129, 191],
    [0, 160, 160],
];

fn robot_color(i: usize) -> Rgb<u8> {
    Rgb(PALETTE[i % PALETTE.len()])
}

/// Maps world coordinates to pixel coordinates (y up).
#[derive(Debug, Clone, Copy)]
pub struct Canvas {
    pub extent: Rect,
    pub ppm: f64,
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub fn new(extent: Rect, ppm: f64) -> Result<Self> {
        if !(ppm > 0.0) || !ppm.is_finite() {
            return Err(Error::Usage(format!("pixels per meter must be > 0, got {ppm}")));
        }
        let width = (extent.width() * ppm).round();
        let height = (extent.height() * ppm).round();
        if !(width >= 1.0 && height >= 1.0) || width * height > 1e8 {
            return Err(Error::Usage(format!("image of {width}x{height} pixels is not renderable")));
        }
        Ok(Self {
            extent,
            ppm,
            width: width as u32,
            height: height as u32,
        })
    }

    pub fn to_pixel(&self, p: Point2) -> (isize, isize) {
        let x = ((p.x - self.extent.min.x) * self.ppm).floor() as isize;
        let y = ((self.extent.max.y - p.y) * self.ppm).floor() as isize;
        (x, y)
    }

    /// World coordinates of a pixel center.
    pub fn to_world(&self, x: u32, y: u32) -> Point2 {
        Point2::new(
            self.extent.min.x + (x as f64 + 0.5) / self.ppm,
            self.extent.max.y - (y as f64 + 0.5) / self.ppm,
        )
    }
}

/// World bounds, or the bounding box of robots, goals and obstacles plus a
/// margin when the world is unbounded.
pub fn world_extent(world: &WorldState) -> Rect {
    if let Some(b) = world.bounds {
        return b;
    }
    let mut pts: Vec<Point2> = world.robots.iter().flat_map(|r| [r.pose.position(), r.goal]).collect();
    for o in &world.obstacles {
        match o {
            lognav_core::Obstacle::Circle { center, radius } => {
                pts.push(Point2::new(center.x - radius, center.y - radius));
                pts.push(Point2::new(center.x + radius, center.y + radius));
            }
            lognav_core::Obstacle::Polygon { vertices } => pts.extend(vertices.iter().copied()),
        }
    }
    let (mut lo, mut hi) = (Point2::new(0.0, 0.0), Point2::new(0.0, 0.0));
    if let Some(first) = pts.first() {
        lo = *first;
        hi = *first;
    }
    for p in &pts {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    Rect::new(lo.x - MARGIN, lo.y - MARGIN, hi.x + MARGIN, hi.y + MARGIN)
}

fn put(img: &mut RgbImage, (x, y): (isize, isize), c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, a: (isize, isize), b: (isize, isize), c: Rgb<u8>) {
    for p in line_cells(a, b) {
        put(img, p, c);
    }
}

fn disc(img: &mut RgbImage, canvas: &Canvas, center: Point2, radius: f64, c: Rgb<u8>, filled: bool) {
    let (cx, cy) = canvas.to_pixel(center);
    let r = (radius * canvas.ppm).max(1.0);
    let ri = r.ceil() as isize;
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            let d = ((dx * dx + dy * dy) as f64).sqrt();
            if d <= r && (filled || d > r - 1.5) {
                put(img, (cx + dx, cy + dy), c);
            }
        }
    }
}

fn cross(img: &mut RgbImage, canvas: &Canvas, p: Point2, half: f64, c: Rgb<u8>) {
    let (x, y) = canvas.to_pixel(p);
    let h = (half * canvas.ppm).round().max(2.0) as isize;
    line(img, (x - h, y - h), (x + h, y + h), c);
    line(img, (x - h, y + h), (x + h, y - h), c);
}

/// Static layout: bounds, obstacles, start discs and goal crosses.
pub fn draw_layout(world: &WorldState, ppm: f64) -> Result<(RgbImage, Canvas)> {
    let canvas = Canvas::new(world_extent(world), ppm)?;
    let mut img = RgbImage::from_pixel(canvas.width, canvas.height, BACKGROUND);
    for y in 0..canvas.height {
        for x in 0..canvas.width {
            let p = canvas.to_world(x, y);
            if world.obstacles.iter().any(|o| o.signed_distance(p) <= 0.0) {
                img.put_pixel(x, y, OBSTACLE);
            }
        }
    }
    if world.bounds.is_some() {
        let (w, h) = (canvas.width - 1, canvas.height - 1);
        for x in 0..=w {
            img.put_pixel(x, 0, BOUNDS);
            img.put_pixel(x, h, BOUNDS);
        }
        for y in 0..=h {
            img.put_pixel(0, y, BOUNDS);
            img.put_pixel(w, y, BOUNDS);
        }
    }
    for (i, r) in world.robots.iter().enumerate() {
        disc(&mut img, &canvas, r.pose.position(), r.radius, robot_color(i), false);
        cross(&mut img, &canvas, r.goal, 0.15, robot_color(i));
    }
    Ok((img, canvas))
}

/// Layout plus one colored polyline per robot; a robot that never moved
/// shows as a single dot at its start.
pub fn draw_trajectories(world: &WorldState, paths: &[Vec<Pose2D>], ppm: f64) -> Result<RgbImage> {
    let (mut img, canvas) = draw_layout(world, ppm)?;
    for (i, path) in paths.iter().enumerate() {
        let c = robot_color(i);
        let Some(first) = path.first() else { continue };
        let mut prev = canvas.to_pixel(first.position());
        put(&mut img, prev, c);
        for pose in &path[1..] {
            let p = canvas.to_pixel(pose.position());
            line(&mut img, prev, p, c);
            prev = p;
        }
    }
    Ok(img)
}

/// Renders one episode of a log.
pub fn render_log(log: &TrajectoryLog, episode: usize, ppm: f64) -> Result<RgbImage> {
    let (world, paths) = log
        .episode_paths(episode)
        .ok_or_else(|| Error::Usage(format!("log has no episode {episode}")))?;
    draw_trajectories(&world, &paths, ppm)
}

fn write_pnm(path: &Path, subtype: PnmSubtype, data: &[u8], w: u32, h: u32, color: ExtendedColorType) -> Result<()> {
    let f = std::fs::File::create(path).map_err(io_err(path))?;
    PnmEncoder::new(BufWriter::new(f))
        .with_subtype(subtype)
        .write_image(data, w, h, color)?;
    Ok(())
}

/// Binary portable pixmap (P6).
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let sub = PnmSubtype::Pixmap(SampleEncoding::Binary);
    write_pnm(path, sub, img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
}

/// Occupancy value to gray level: 0 → 0, 0.5 → 128, 1 → 255.
pub fn gray_level(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a frame as a binary portable graymap (P5), row 0 on top.
pub fn save_frame_pgm(frame: &Frame, path: &Path) -> Result<()> {
    let img = image::ImageBuffer::<Luma<u8>, Vec<u8>>::from_fn(frame.width as u32, frame.height as u32, |x, y| {
        Luma([gray_level(frame.get(y as usize, x as usize))])
    });
    let sub = PnmSubtype::Graymap(SampleEncoding::Binary);
    write_pnm(path, sub, img.as_raw(), img.width(), img.height(), ExtendedColorType::L8)
}
