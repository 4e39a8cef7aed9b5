//! Stroke width statistics from skeletons and the stroke width variation filter.
//!
//! Widths are sampled on the Zhang-Suen skeleton of a region: a skeleton
//! pixel at Euclidean distance `d` from the background reports a full stroke
//! width of `2d - 1`.

use serde::{Deserialize, Serialize};

use crate::raster::BinaryMask;
use crate::region::{FilterOutcome, RejectReason, Rejection, Region};

/// Per-pixel Euclidean distance to the nearest background pixel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
}

impl DistanceField {
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }
}

const FAR: f64 = 1e20;

/// 1-D squared distance transform of a sampled function (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let intersect = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
    for q in 1..n {
        // z[0] is -inf, so k never underflows
        let mut s = intersect(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact Euclidean distance transform; the mask is treated as surrounded by background.
pub fn distance_transform(mask: &BinaryMask) -> DistanceField {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let (pw, ph) = (w + 2, h + 2);
    let mut grid = vec![0.0; pw * ph];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x as u32, y as u32) {
                grid[(y + 1) * pw + x + 1] = FAR;
            }
        }
    }
    let len = pw.max(ph);
    let (mut f, mut out) = (vec![0.0; len], vec![0.0; len]);
    let (mut v, mut z) = (vec![0usize; len], vec![0.0; len + 1]);
    for x in 0..pw {
        for y in 0..ph {
            f[y] = grid[y * pw + x];
        }
        edt_1d(&f[..ph], &mut out[..ph], &mut v, &mut z);
        for y in 0..ph {
            grid[y * pw + x] = out[y];
        }
    }
    for y in 0..ph {
        let row = &mut grid[y * pw..(y + 1) * pw];
        f[..pw].copy_from_slice(row);
        edt_1d(&f[..pw], &mut out[..pw], &mut v, &mut z);
        row.copy_from_slice(&out[..pw]);
    }
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            values.push(grid[(y + 1) * pw + x + 1].sqrt());
        }
    }
    DistanceField { width: w as u32, height: h as u32, values }
}

/// Neighbors P2..P9, clockwise from north.
fn ring(mask: &BinaryMask, x: u32, y: u32) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)].map(|(dx, dy)| mask.get_or_clear(x + dx, y + dy))
}

/// Zhang-Suen thinning, iterated until neither sub-pass deletes a pixel.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    let mut to_delete = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_delete.clear();
            for (x, y) in m.iter_set() {
                let p = ring(&m, x, y);
                let b = p.iter().filter(|&&v| v).count();
                if !(2..=6).contains(&b) {
                    continue;
                }
                let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
                if a != 1 {
                    continue;
                }
                // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
                let ok = if pass == 0 {
                    !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                } else {
                    !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                };
                if ok {
                    to_delete.push((x, y));
                }
            }
            changed |= !to_delete.is_empty();
            for &(x, y) in &to_delete {
                m.set(x, y, false);
            }
        }
        if !changed {
            return m;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrokeWidthStats {
    pub widths: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
    pub variation: f64,
}

impl StrokeWidthStats {
    /// Population statistics of `widths`.
    ///
    /// # Panics
    /// If `widths` is empty.
    pub fn from_widths(widths: Vec<f64>) -> Self {
        assert!(!widths.is_empty(), "stroke statistics need at least one sample");
        let n = widths.len() as f64;
        let mean = widths.iter().sum::<f64>() / n;
        let stddev = if widths.iter().all(|&w| w == widths[0]) {
            0.0
        } else {
            (widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n).sqrt()
        };
        Self { widths, mean, stddev, variation: stddev / mean }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeParams {
    /// Reject when variation exceeds this; `None` disables the filter.
    #[serde(default = "default_max_variation")]
    pub max_variation: Option<f64>,
    /// Skeleton pixels removed from each open branch end before sampling.
    #[serde(default = "default_end_trim")]
    pub end_trim: u32,
}

fn default_max_variation() -> Option<f64> {
    Some(0.6)
}

fn default_end_trim() -> u32 {
    2
}

impl Default for StrokeParams {
    fn default() -> Self {
        Self { max_variation: default_max_variation(), end_trim: default_end_trim() }
    }
}

fn neighbors8(mask: &BinaryMask, x: u32, y: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
    let (xi, yi) = (x as i64, y as i64);
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
        .into_iter()
        .map(move |(dx, dy)| (xi + dx, yi + dy))
        .filter(move |&(nx, ny)| mask.get_or_clear(nx, ny))
        .map(|(nx, ny)| (nx as u32, ny as u32))
}

/// Removes up to `steps` pixels from every degree-1 end, stopping at junctions.
pub fn trim_ends(skeleton: &BinaryMask, steps: u32) -> BinaryMask {
    let mut out = skeleton.clone();
    if steps == 0 {
        return out;
    }
    let degree = |x, y| neighbors8(skeleton, x, y).count();
    let ends: Vec<_> = skeleton.iter_set().filter(|&(x, y)| degree(x, y) == 1).collect();
    for (mut x, mut y) in ends {
        for _ in 0..steps {
            if !out.get(x, y) || degree(x, y) >= 3 {
                break;
            }
            out.set(x, y, false);
            let mut next = neighbors8(&out, x, y);
            match (next.next(), next.next()) {
                (Some(n), None) => (x, y) = n,
                _ => break,
            }
        }
    }
    out
}

/// Skeleton-sampled stroke widths of a region.
pub fn stroke_stats(region: &Region, end_trim: u32) -> StrokeWidthStats {
    let (b, bits) = region.local_mask(0);
    let mask = BinaryMask::from_bits(b.width, b.height, bits).expect("mask matches bbox");
    let dist = distance_transform(&mask);
    let skeleton = skeletonize(&mask);
    let trimmed = trim_ends(&skeleton, end_trim);
    let sample = |m: &BinaryMask| m.iter_set().map(|(x, y)| 2.0 * dist.get(x, y) - 1.0).collect::<Vec<_>>();
    let mut widths = sample(&trimmed);
    if widths.is_empty() {
        widths = sample(&skeleton);
    }
    if widths.is_empty() {
        // thinning erases some even-sized blocks entirely; fall back to the distance ridge
        let peak = mask.iter_set().map(|(x, y)| dist.get(x, y)).fold(0.0, f64::max);
        widths = mask.iter_set().filter(|&(x, y)| dist.get(x, y) == peak).map(|_| 2.0 * peak - 1.0).collect();
    }
    StrokeWidthStats::from_widths(widths)
}

pub fn filter_by_stroke(regions: Vec<Region>, params: &StrokeParams) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for region in regions {
        let v = stroke_stats(&region, params.end_trim).variation;
        if params.max_variation.is_some_and(|max| v > max) {
            out.rejected.push(Rejection { region, reason: RejectReason::Stroke, measured: v });
        } else {
            out.kept.push(region);
        }
    }
    out
}
