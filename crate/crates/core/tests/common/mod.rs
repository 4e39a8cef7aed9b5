//! Brute-force reference implementations used only by tests. None of these
//! share code paths with the library beyond its plain data types.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use textdet::raster::{BinaryMask, GrayImage};
use textdet::region::BoundingBox;

pub type PixelSet = Vec<(u32, u32)>;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Grows a random 4-connected mask inside a `w` x `h` frame from a random seed.
pub fn random_connected_mask(rng: &mut StdRng, w: u32, h: u32) -> PixelSet {
    let target = rng.random_range(1..=(w * h) as usize);
    let seed = (rng.random_range(0..w), rng.random_range(0..h));
    let mut set = BTreeSet::from([seed]);
    let mut frontier = vec![seed];
    while set.len() < target && !frontier.is_empty() {
        let i = rng.random_range(0..frontier.len());
        let (x, y) = frontier[i];
        let options: Vec<(u32, u32)> = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)]
            .iter()
            .map(|(dx, dy)| (x as i64 + dx, y as i64 + dy))
            .filter(|&(nx, ny)| nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64)
            .map(|(nx, ny)| (nx as u32, ny as u32))
            .filter(|p| !set.contains(p))
            .collect();
        if options.is_empty() {
            frontier.swap_remove(i);
            continue;
        }
        let p = options[rng.random_range(0..options.len())];
        set.insert(p);
        frontier.push(p);
    }
    set.into_iter().collect()
}

/// Image with values drawn from `levels` evenly spaced gray levels.
pub fn random_quantized_image(rng: &mut StdRng, w: u32, h: u32, levels: u32) -> GrayImage {
    let step = 255 / (levels - 1);
    let data = (0..w * h).map(|_| (rng.random_range(0..levels) * step) as u8).collect();
    GrayImage::new(w, h, data).unwrap()
}

// ---------------------------------------------------------------------------
// region properties

pub struct PropsOracle {
    pub area: usize,
    pub bbox: BoundingBox,
    pub aspect_ratio: f64,
    pub extent: f64,
    pub eccentricity: f64,
    pub solidity: f64,
    pub euler_number: i64,
}

pub fn props_oracle(pixels: &[(u32, u32)]) -> PropsOracle {
    let area = pixels.len();
    let x0 = pixels.iter().map(|p| p.0).min().unwrap();
    let x1 = pixels.iter().map(|p| p.0).max().unwrap();
    let y0 = pixels.iter().map(|p| p.1).min().unwrap();
    let y1 = pixels.iter().map(|p| p.1).max().unwrap();
    let bbox = BoundingBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
    PropsOracle {
        area,
        bbox,
        aspect_ratio: bbox.width as f64 / bbox.height as f64,
        extent: area as f64 / (bbox.width as f64 * bbox.height as f64),
        eccentricity: eccentricity_oracle(pixels),
        solidity: area as f64 / hull_area_oracle(pixels),
        euler_number: euler_oracle(pixels),
    }
}

/// Raw-moment route: central moments from m00, m10, m01, m20, m02, m11 and
/// eigenvalues from trace and determinant.
pub fn eccentricity_oracle(pixels: &[(u32, u32)]) -> f64 {
    let (mut m00, mut m10, mut m01, mut m20, mut m02, mut m11) = (0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let (x, y) = (x as f64, y as f64);
        m00 += 1.0;
        m10 += x;
        m01 += y;
        m20 += x * x;
        m02 += y * y;
        m11 += x * y;
    }
    let mu20 = m20 - m10 * m10 / m00;
    let mu02 = m02 - m01 * m01 / m00;
    let mu11 = m11 - m10 * m01 / m00;
    let a = mu20 / m00 + 1.0 / 12.0;
    let c = mu02 / m00 + 1.0 / 12.0;
    let b = mu11 / m00;
    let trace = a + c;
    let det = a * c - b * b;
    let disc = (trace * trace / 4.0 - det).max(0.0).sqrt();
    let (l1, l2) = (trace / 2.0 + disc, trace / 2.0 - disc);
    (1.0 - l2 / l1).max(0.0).sqrt()
}

/// Jarvis march over every corner of every pixel, then the shoelace formula.
pub fn hull_area_oracle(pixels: &[(u32, u32)]) -> f64 {
    let mut pts: Vec<(i64, i64)> = pixels
        .iter()
        .flat_map(|&(x, y)| {
            let (x, y) = (x as i64, y as i64);
            [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
        })
        .collect();
    pts.sort();
    pts.dedup();
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let dist2 = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2);
    let start = pts[0];
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = if pts[0] == current { pts[1] } else { pts[0] };
        for &p in &pts {
            if p == current {
                continue;
            }
            let c = cross(current, candidate, p);
            if c < 0 || (c == 0 && dist2(current, p) > dist2(current, candidate)) {
                candidate = p;
            }
        }
        if candidate == start {
            break;
        }
        hull.push(candidate);
        current = candidate;
    }
    let n = hull.len();
    let twice: i64 = (0..n).map(|i| hull[i].0 * hull[(i + 1) % n].1 - hull[(i + 1) % n].0 * hull[i].1).sum();
    twice.abs() as f64 / 2.0
}

/// Labels background 4-components over a frame one pixel larger than the
/// bbox on every side and counts those not touching the frame.
pub fn euler_oracle(pixels: &[(u32, u32)]) -> i64 {
    let x0 = pixels.iter().map(|p| p.0).min().unwrap() as i64 - 1;
    let y0 = pixels.iter().map(|p| p.1).min().unwrap() as i64 - 1;
    let x1 = pixels.iter().map(|p| p.0).max().unwrap() as i64 + 1;
    let y1 = pixels.iter().map(|p| p.1).max().unwrap() as i64 + 1;
    let fg: BTreeSet<(i64, i64)> = pixels.iter().map(|&(x, y)| (x as i64, y as i64)).collect();
    let mut seen = BTreeSet::new();
    let mut holes = 0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            if fg.contains(&(x, y)) || seen.contains(&(x, y)) {
                continue;
            }
            let mut touches_frame = false;
            let mut queue = VecDeque::from([(x, y)]);
            seen.insert((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                if cx == x0 || cx == x1 || cy == y0 || cy == y1 {
                    touches_frame = true;
                }
                for (nx, ny) in [(cx - 1, cy), (cx + 1, cy), (cx, cy - 1), (cx, cy + 1)] {
                    if nx < x0 || nx > x1 || ny < y0 || ny > y1 || fg.contains(&(nx, ny)) || seen.contains(&(nx, ny)) {
                        continue;
                    }
                    seen.insert((nx, ny));
                    queue.push_back((nx, ny));
                }
            }
            if !touches_frame {
                holes += 1;
            }
        }
    }
    1 - holes
}

// ---------------------------------------------------------------------------
// threshold decomposition

/// 4-connected component of `{I <= level}` containing `seed`, sorted row-major.
pub fn flood(img: &GrayImage, seed: (u32, u32), level: u8) -> PixelSet {
    let (w, h) = (img.width(), img.height());
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    let mut queue = VecDeque::from([seed]);
    seen[(seed.1 * w + seed.0) as usize] = true;
    while let Some((x, y)) = queue.pop_front() {
        out.push((x, y));
        let nbrs = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for (nx, ny) in nbrs {
            if nx < w && ny < h && !seen[(ny * w + nx) as usize] && img.get(nx, ny) <= level {
                seen[(ny * w + nx) as usize] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    out.sort_by_key(|&(x, y)| (y, x));
    out
}

#[derive(Clone, Debug)]
pub struct OracleComponent {
    pub pixels: PixelSet,
    /// Lowest threshold at which this exact pixel set is a component.
    pub level: u8,
}

/// Every distinct component of every sub-level set, by labeling each level.
pub fn extremal_regions_oracle(img: &GrayImage) -> Vec<OracleComponent> {
    let levels: BTreeSet<u8> = img.data().iter().copied().collect();
    let mut out: Vec<OracleComponent> = Vec::new();
    let mut known = std::collections::BTreeMap::<PixelSet, usize>::new();
    for &t in &levels {
        let mut labeled = vec![false; img.len()];
        for y in 0..img.height() {
            for x in 0..img.width() {
                let i = (y * img.width() + x) as usize;
                if labeled[i] || img.get(x, y) > t {
                    continue;
                }
                let comp = flood(img, (x, y), t);
                for &(cx, cy) in &comp {
                    labeled[(cy * img.width() + cx) as usize] = true;
                }
                if !known.contains_key(&comp) {
                    known.insert(comp.clone(), out.len());
                    out.push(OracleComponent { pixels: comp, level: t });
                }
            }
        }
    }
    out
}

pub struct MserOracleParams {
    pub delta: u8,
    pub min_area: usize,
    pub max_area: usize,
    pub max_variation: f64,
    pub min_diversity: f64,
}

fn bitset(pixels: &PixelSet, width: u32, words: usize) -> Vec<u64> {
    let mut bits = vec![0u64; words];
    for &(x, y) in pixels {
        let i = (y * width + x) as usize;
        bits[i / 64] |= 1 << (i % 64);
    }
    bits
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Maximally stable regions by direct evaluation of the definitions over the
/// brute-force component list.
pub fn mser_oracle(img: &GrayImage, p: &MserOracleParams) -> BTreeSet<PixelSet> {
    mser_oracle_with(img, &extremal_regions_oracle(img), p)
}

pub fn mser_oracle_with(img: &GrayImage, comps: &[OracleComponent], p: &MserOracleParams) -> BTreeSet<PixelSet> {
    let n = comps.len();
    let total = img.len();
    let words = total.div_ceil(64);
    let bits: Vec<Vec<u64>> = comps.iter().map(|c| bitset(&c.pixels, img.width(), words)).collect();
    let q: Vec<f64> = comps
        .iter()
        .map(|c| {
            let upper = (c.level as u16 + p.delta as u16).min(255) as u8;
            let grown = flood(img, c.pixels[0], upper).len();
            (grown - c.pixels.len()) as f64 / c.pixels.len() as f64
        })
        .collect();
    // anc[i][j]: comps[j] strictly contains comps[i]
    let anc: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| comps[j].pixels.len() > comps[i].pixels.len() && is_subset(&bits[i], &bits[j])).collect())
        .collect();
    let delta = p.delta as i32;
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let c = &comps[i];
            if c.pixels.len() == total {
                return false;
            }
            let lvl = c.level as i32;
            let local_min = (0..n).all(|j| {
                if anc[i][j] && comps[j].level as i32 <= lvl + delta {
                    q[j] > q[i]
                } else if anc[j][i] && comps[j].level as i32 >= lvl - delta {
                    q[j] >= q[i]
                } else {
                    true
                }
            });
            local_min && q[i] <= p.max_variation && c.pixels.len() >= p.min_area && c.pixels.len() <= p.max_area
        })
        .collect();
    let mut suppressed = BTreeSet::new();
    for &c in &candidates {
        for &a in &candidates {
            if !anc[c][a] {
                continue;
            }
            let (ac, aa) = (comps[c].pixels.len() as f64, comps[a].pixels.len() as f64);
            if aa - ac < p.min_diversity * aa {
                if q[c] < q[a] {
                    suppressed.insert(a);
                } else {
                    suppressed.insert(c);
                }
            }
        }
    }
    candidates.into_iter().filter(|c| !suppressed.contains(c)).map(|c| comps[c].pixels.clone()).collect()
}

// ---------------------------------------------------------------------------
// distance transform and thinning

/// Distance from every foreground pixel to the nearest background pixel,
/// including a one pixel background frame, by exhaustive search.
pub fn distance_oracle(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut bg = Vec::new();
    for y in -1..=h {
        for x in -1..=w {
            if !mask.get_or_clear(x, y) {
                bg.push((x, y));
            }
        }
    }
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as u32, y as u32) {
                out.push(0.0);
                continue;
            }
            let best = bg.iter().map(|&(bx, by)| (bx - x).pow(2) + (by - y).pow(2)).min().unwrap();
            out.push((best as f64).sqrt());
        }
    }
    out
}

/// Textbook Zhang-Suen on an i32 grid with an explicit zero frame.
pub fn zhang_suen_oracle(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut g = vec![vec![0i32; w + 2]; h + 2];
    for y in 0..h {
        for x in 0..w {
            g[y + 1][x + 1] = mask.get(x as u32, y as u32) as i32;
        }
    }
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut marked = Vec::new();
            for y in 1..=h {
                for x in 1..=w {
                    if g[y][x] == 0 {
                        continue;
                    }
                    let p2 = g[y - 1][x];
                    let p3 = g[y - 1][x + 1];
                    let p4 = g[y][x + 1];
                    let p5 = g[y + 1][x + 1];
                    let p6 = g[y + 1][x];
                    let p7 = g[y + 1][x - 1];
                    let p8 = g[y][x - 1];
                    let p9 = g[y - 1][x - 1];
                    let seq = [p2, p3, p4, p5, p6, p7, p8, p9, p2];
                    let b: i32 = seq[..8].iter().sum();
                    let a = seq.windows(2).filter(|win| win[0] == 0 && win[1] == 1).count();
                    let (c, d) = if step == 0 { (p2 * p4 * p6, p4 * p6 * p8) } else { (p2 * p4 * p8, p2 * p6 * p8) };
                    if (2..=6).contains(&b) && a == 1 && c == 0 && d == 0 {
                        marked.push((x, y));
                    }
                }
            }
            for &(x, y) in &marked {
                g[y][x] = 0;
            }
            changed |= !marked.is_empty();
        }
        if !changed {
            break;
        }
    }
    let mut out = BinaryMask::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            out.set(x as u32, y as u32, g[y + 1][x + 1] == 1);
        }
    }
    out
}

pub fn rect_pixels(x0: u32, y0: u32, w: u32, h: u32) -> PixelSet {
    (y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| (x, y))).collect()
}

/// Two bars of different thickness joined end to end, vertically centered.
pub fn dumbbell(thin: u32, thick: u32, len: u32) -> PixelSet {
    let mut px = rect_pixels(0, 0, len, thick);
    let off = (thick - thin) / 2;
    px.extend(rect_pixels(len, off, len, thin));
    px
}
