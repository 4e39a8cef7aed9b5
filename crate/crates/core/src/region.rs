//! Connected pixel regions, their geometric properties, and the geometric
//! non-text filter.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which sub-level sets a region came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Dark ink on a light background: components of `{p : I(p) <= t}`.
    DarkOnLight,
    /// Light ink on a dark background, found on the inverted image.
    LightOnDark,
}

/// Axis aligned pixel box; `x`/`y` are the top-left pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl BoundingBox {
    pub const fn new(x: u32, y: u32, width: u32, height: u32) -> Self {
        Self { x, y, width, height }
    }

    pub fn right(&self) -> u32 {
        self.x + self.width
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.height
    }

    pub fn area(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.width >= 1 && self.height >= 1 && self.right() <= width && self.bottom() <= height
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> u64 {
        let w = self.right().min(other.right()).saturating_sub(self.x.max(other.x));
        let h = self.bottom().min(other.bottom()).saturating_sub(self.y.max(other.y));
        w as u64 * h as u64
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BoundingBox::new(x, y, self.right().max(other.right()) - x, self.bottom().max(other.bottom()) - y)
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection_area(other);
        inter as f64 / (self.area() + other.area() - inter) as f64
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x, self.y, self.width, self.height)
    }
}

/// A nonempty, 4-connected set of pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pixels: Vec<(u32, u32)>,
    pub polarity: Polarity,
    /// Threshold level at which the region was extracted, in the polarity's
    /// own intensity space (inverted for [`Polarity::LightOnDark`]).
    pub source_level: u8,
}

impl Region {
    /// Sorts and deduplicates `pixels` (row-major order).
    ///
    /// # Panics
    /// If `pixels` is empty.
    pub fn new(mut pixels: Vec<(u32, u32)>, polarity: Polarity, source_level: u8) -> Self {
        assert!(!pixels.is_empty(), "a region needs at least one pixel");
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        Self { pixels, polarity, source_level }
    }

    pub fn from_pixels(pixels: Vec<(u32, u32)>) -> Self {
        Self::new(pixels, Polarity::DarkOnLight, 0)
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> &[(u32, u32)] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox(&self) -> BoundingBox {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for &(x, y) in &self.pixels {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        BoundingBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
    }

    /// Membership raster over the region's bbox grown by `pad` on every side.
    pub(crate) fn local_mask(&self, pad: u32) -> (BoundingBox, Vec<bool>) {
        let b = self.bbox();
        let (w, h) = (b.width + 2 * pad, b.height + 2 * pad);
        let mut bits = vec![false; w as usize * h as usize];
        for &(x, y) in &self.pixels {
            bits[(y - b.y + pad) as usize * w as usize + (x - b.x + pad) as usize] = true;
        }
        (b, bits)
    }

    pub fn is_4_connected(&self) -> bool {
        let (b, mut bits) = self.local_mask(0);
        let (w, h) = (b.width as usize, b.height as usize);
        let start = {
            let (x, y) = self.pixels[0];
            (y - b.y) as usize * w + (x - b.x) as usize
        };
        let mut stack = vec![start];
        bits[start] = false;
        let mut seen = 1;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if bits[j] {
                    bits[j] = false;
                    seen += 1;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        seen == self.pixels.len()
    }

    pub fn translated(&self, dx: u32, dy: u32) -> Region {
        Region {
            pixels: self.pixels.iter().map(|&(x, y)| (x + dx, y + dy)).collect(),
            polarity: self.polarity,
            source_level: self.source_level,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricProps {
    pub area: usize,
    pub bbox: BoundingBox,
    pub aspect_ratio: f64,
    pub eccentricity: f64,
    pub solidity: f64,
    pub extent: f64,
    pub euler_number: i64,
    pub centroid: (f64, f64),
}

pub fn compute_props(region: &Region) -> GeometricProps {
    let area = region.area();
    let bbox = region.bbox();
    let n = area as f64;
    let (sx, sy) = region.pixels.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
    let (cx, cy) = (sx / n, sy / n);
    let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
    for &(x, y) in &region.pixels {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        mu20 += dx * dx;
        mu02 += dy * dy;
        mu11 += dx * dy;
    }
    GeometricProps {
        area,
        bbox,
        aspect_ratio: bbox.width as f64 / bbox.height as f64,
        eccentricity: moment_eccentricity(mu20 / n + 1.0 / 12.0, mu02 / n + 1.0 / 12.0, mu11 / n),
        solidity: n / convex_hull_coverage(region),
        extent: n / bbox.area() as f64,
        euler_number: euler_number(region),
        centroid: (cx, cy),
    }
}

/// Eccentricity of the ellipse with normalized second moments `mxx`, `myy`, `mxy`.
fn moment_eccentricity(mxx: f64, myy: f64, mxy: f64) -> f64 {
    let mid = (mxx + myy) / 2.0;
    let r = (((mxx - myy) / 2.0).powi(2) + mxy * mxy).sqrt();
    let (l1, l2) = (mid + r, mid - r);
    (1.0 - l2 / l1).max(0.0).sqrt()
}

/// Area of the convex hull of all pixel corners, so one pixel covers 1.0.
pub fn convex_hull_coverage(region: &Region) -> f64 {
    hull_area_twice(region) as f64 / 2.0
}

fn hull_area_twice(region: &Region) -> i64 {
    // only the extreme corners of each row can be hull vertices
    let mut points: Vec<(i64, i64)> = Vec::new();
    let px = &region.pixels;
    let mut i = 0;
    while i < px.len() {
        let y = px[i].1;
        let mut j = i;
        while j + 1 < px.len() && px[j + 1].1 == y {
            j += 1;
        }
        let (x0, x1, y) = (px[i].0 as i64, px[j].0 as i64 + 1, y as i64);
        points.extend([(x0, y), (x0, y + 1), (x1, y), (x1, y + 1)]);
        i = j + 1;
    }
    let hull = monotone_chain(points);
    let n = hull.len();
    (0..n)
        .map(|k| {
            let (a, b) = (hull[k], hull[(k + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<i64>()
        .abs()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn monotone_chain(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// One minus the number of 4-connected background components enclosed by the region.
pub fn euler_number(region: &Region) -> i64 {
    let (b, bits) = region.local_mask(1);
    let (w, h) = (b.width as usize + 2, b.height as usize + 2);
    let mut visited = bits;
    let mut holes = 0;
    let mut stack = Vec::new();
    // the first flood starts at the padded corner and marks all outside background
    for start in std::iter::once(0).chain(0..w * h) {
        if visited[start] {
            continue;
        }
        if start != 0 {
            holes += 1;
        }
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            for (ok, j) in [(x > 0, i.wrapping_sub(1)), (x + 1 < w, i + 1), (y > 0, i.wrapping_sub(w)), (y + 1 < h, i + w)] {
                if ok && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    1 - holes
}

/// Optional bounds on each geometric property; `None` disables a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryThresholds {
    #[serde(default = "defaults::max_aspect_ratio")]
    pub max_aspect_ratio: Option<f64>,
    #[serde(default = "defaults::min_aspect_ratio")]
    pub min_aspect_ratio: Option<f64>,
    #[serde(default = "defaults::max_eccentricity")]
    pub max_eccentricity: Option<f64>,
    #[serde(default = "defaults::min_solidity")]
    pub min_solidity: Option<f64>,
    #[serde(default = "defaults::min_extent")]
    pub min_extent: Option<f64>,
    #[serde(default = "defaults::max_extent")]
    pub max_extent: Option<f64>,
    /// Reject when `euler_number < 1 - max_euler_holes`.
    #[serde(default = "defaults::max_euler_holes")]
    pub max_euler_holes: Option<i64>,
}

mod defaults {
    pub fn max_aspect_ratio() -> Option<f64> {
        Some(3.0)
    }
    pub fn min_aspect_ratio() -> Option<f64> {
        Some(0.1)
    }
    pub fn max_eccentricity() -> Option<f64> {
        Some(0.995)
    }
    pub fn min_solidity() -> Option<f64> {
        Some(0.3)
    }
    pub fn min_extent() -> Option<f64> {
        Some(0.2)
    }
    pub fn max_extent() -> Option<f64> {
        Some(0.9)
    }
    pub fn max_euler_holes() -> Option<i64> {
        Some(4)
    }
}

impl Default for GeometryThresholds {
    fn default() -> Self {
        Self {
            max_aspect_ratio: defaults::max_aspect_ratio(),
            min_aspect_ratio: defaults::min_aspect_ratio(),
            max_eccentricity: defaults::max_eccentricity(),
            min_solidity: defaults::min_solidity(),
            min_extent: defaults::min_extent(),
            max_extent: defaults::max_extent(),
            max_euler_holes: defaults::max_euler_holes(),
        }
    }
}

impl GeometryThresholds {
    pub fn disabled() -> Self {
        Self {
            max_aspect_ratio: None,
            min_aspect_ratio: None,
            max_eccentricity: None,
            min_solidity: None,
            min_extent: None,
            max_extent: None,
            max_euler_holes: None,
        }
    }

    /// Returns the first failing check in the order aspect, eccentricity,
    /// solidity, extent, euler, with the measured value.
    pub fn first_failure(&self, p: &GeometricProps) -> Option<(RejectReason, f64)> {
        let above = |v: f64, bound: Option<f64>| bound.is_some_and(|b| v > b);
        let below = |v: f64, bound: Option<f64>| bound.is_some_and(|b| v < b);
        if above(p.aspect_ratio, self.max_aspect_ratio) || below(p.aspect_ratio, self.min_aspect_ratio) {
            return Some((RejectReason::Aspect, p.aspect_ratio));
        }
        if above(p.eccentricity, self.max_eccentricity) {
            return Some((RejectReason::Eccentricity, p.eccentricity));
        }
        if below(p.solidity, self.min_solidity) {
            return Some((RejectReason::Solidity, p.solidity));
        }
        if below(p.extent, self.min_extent) || above(p.extent, self.max_extent) {
            return Some((RejectReason::Extent, p.extent));
        }
        if self.max_euler_holes.is_some_and(|h| p.euler_number < 1 - h) {
            return Some((RejectReason::Euler, p.euler_number as f64));
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Aspect,
    Eccentricity,
    Solidity,
    Extent,
    Euler,
    Stroke,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Aspect => "aspect",
            Self::Eccentricity => "eccentricity",
            Self::Solidity => "solidity",
            Self::Extent => "extent",
            Self::Euler => "euler",
            Self::Stroke => "stroke",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct Rejection {
    pub region: Region,
    pub reason: RejectReason,
    /// Value of the failing property.
    pub measured: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FilterOutcome {
    pub kept: Vec<Region>,
    pub rejected: Vec<Rejection>,
}

pub fn filter_by_geometry(regions: Vec<Region>, thresholds: &GeometryThresholds) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for region in regions {
        match thresholds.first_failure(&compute_props(&region)) {
            None => out.kept.push(region),
            Some((reason, measured)) => out.rejected.push(Rejection { region, reason, measured }),
        }
    }
    out
}
