//! Component tree of the sub-level sets of a gray image and MSER extraction.
//!
//! The tree is built with union-find over pixels visited in increasing
//! intensity (counting sort, ties by raster index). Every node is a
//! 4-connected component of `{p : I(p) <= level}` at the lowest level where
//! that exact pixel set exists. Light-on-dark trees are built on the inverted
//! image, so node levels are always in the polarity's own intensity space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{invert, GrayImage};
use crate::region::{Polarity, Region};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node id {0} does not exist")]
    UnknownNode(usize),
}

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentNode {
    pub level: u8,
    pub area: usize,
    pub parent: Option<NodeId>,
    /// A member pixel at exactly `level`.
    pub seed_pixel: (u32, u32),
}

#[derive(Clone, Debug)]
pub struct ComponentTree {
    width: u32,
    height: u32,
    polarity: Polarity,
    /// Children always precede their parents; the root is last.
    nodes: Vec<ComponentNode>,
    /// Smallest node containing each pixel.
    pixel_node: Vec<NodeId>,
    // CSR adjacency: children of node n are child_list[child_start[n]..child_start[n + 1]]
    child_start: Vec<usize>,
    child_list: Vec<NodeId>,
    // CSR: pixels whose smallest node is n
    own_start: Vec<usize>,
    own_list: Vec<u32>,
}

fn find(zpar: &mut [u32], mut p: u32) -> u32 {
    let mut root = p;
    while zpar[root as usize] != root {
        root = zpar[root as usize];
    }
    while zpar[p as usize] != root {
        let next = zpar[p as usize];
        zpar[p as usize] = root;
        p = next;
    }
    root
}

fn csr(n: usize, items: impl Iterator<Item = (usize, u32)> + Clone) -> (Vec<usize>, Vec<u32>) {
    let mut start = vec![0usize; n + 1];
    for (k, _) in items.clone() {
        start[k + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut list = vec![0u32; start[n]];
    for (k, v) in items {
        list[fill[k]] = v;
        fill[k] += 1;
    }
    (start, list)
}

/// Builds the component tree for `polarity`. Light-on-dark uses the inverted image.
pub fn build_tree(img: &GrayImage, polarity: Polarity) -> ComponentTree {
    match polarity {
        Polarity::DarkOnLight => build_min_tree(img, polarity),
        Polarity::LightOnDark => build_min_tree(&invert(img), polarity),
    }
}

fn build_min_tree(img: &GrayImage, polarity: Polarity) -> ComponentTree {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let n = w * h;
    let data = img.data();

    // counting sort, stable in raster order
    let mut hist = [0usize; 257];
    for &v in data {
        hist[v as usize + 1] += 1;
    }
    for i in 0..256 {
        hist[i + 1] += hist[i];
    }
    let mut order = vec![0u32; n];
    for (i, &v) in data.iter().enumerate() {
        order[hist[v as usize]] = i as u32;
        hist[v as usize] += 1;
    }

    const UNSEEN: u32 = u32::MAX;
    let mut parent = vec![UNSEEN; n];
    let mut zpar = vec![UNSEEN; n];
    for &p in &order {
        parent[p as usize] = p;
        zpar[p as usize] = p;
        let (x, y) = (p as usize % w, p as usize / w);
        let neighbors = [
            (x > 0).then(|| p - 1),
            (x + 1 < w).then(|| p + 1),
            (y > 0).then(|| p - w as u32),
            (y + 1 < h).then(|| p + w as u32),
        ];
        for q in neighbors.into_iter().flatten() {
            if zpar[q as usize] == UNSEEN {
                continue;
            }
            let r = find(&mut zpar, q);
            if r != p {
                parent[r as usize] = p;
                zpar[r as usize] = p;
            }
        }
    }

    // canonicalize from the root down so every parent pointer lands on a canonical pixel
    for &p in order.iter().rev() {
        let q = parent[p as usize];
        let pq = parent[q as usize];
        if data[pq as usize] == data[q as usize] {
            parent[p as usize] = pq;
        }
    }

    let is_canonical = |p: u32| parent[p as usize] == p || data[parent[p as usize] as usize] != data[p as usize];
    let mut node_of = vec![usize::MAX; n];
    let mut nodes = Vec::new();
    for &p in &order {
        if is_canonical(p) {
            node_of[p as usize] = nodes.len();
            nodes.push(ComponentNode {
                level: data[p as usize],
                area: 0,
                parent: None,
                seed_pixel: (p % w as u32, p / w as u32),
            });
        }
    }
    // a canonical pixel's parent is processed after it, so `order` is children-first
    let mut pixel_node = vec![0usize; n];
    for &p in &order {
        let pi = p as usize;
        if is_canonical(p) {
            let id = node_of[pi];
            pixel_node[pi] = id;
            if parent[pi] != p {
                nodes[id].parent = Some(node_of[parent[pi] as usize]);
            }
        } else {
            pixel_node[pi] = node_of[parent[pi] as usize];
        }
        nodes[pixel_node[pi]].area += 1;
    }
    for id in 0..nodes.len() {
        if let Some(par) = nodes[id].parent {
            nodes[par].area += nodes[id].area;
        }
    }

    let (child_start, child_list) = csr(
        nodes.len(),
        nodes.iter().enumerate().filter_map(|(i, nd)| nd.parent.map(|par| (par, i as u32))),
    );
    let (own_start, own_list) = csr(nodes.len(), pixel_node.iter().enumerate().map(|(p, &id)| (id, p as u32)));

    ComponentTree {
        width: img.width(),
        height: img.height(),
        polarity,
        nodes,
        pixel_node,
        child_start,
        child_list: child_list.into_iter().map(|c| c as usize).collect(),
        own_start,
        own_list,
    }
}

impl ComponentTree {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn nodes(&self) -> &[ComponentNode] {
        &self.nodes
    }

    pub fn root(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> Result<&ComponentNode, TreeError> {
        self.nodes.get(id).ok_or(TreeError::UnknownNode(id))
    }

    /// Smallest node containing pixel `(x, y)`.
    pub fn pixel_node(&self, x: u32, y: u32) -> NodeId {
        self.pixel_node[y as usize * self.width as usize + x as usize]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.child_list[self.child_start[id]..self.child_start[id + 1]]
    }

    /// All pixels of the node, unordered.
    pub fn node_pixels(&self, id: NodeId) -> Vec<(u32, u32)> {
        let w = self.width;
        let mut out = Vec::with_capacity(self.nodes[id].area);
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            out.extend(self.own_list[self.own_start[n]..self.own_start[n + 1]].iter().map(|&p| (p % w, p / w)));
            stack.extend_from_slice(self.children(n));
        }
        out
    }

    pub fn region(&self, id: NodeId) -> Region {
        Region::new(self.node_pixels(id), self.polarity, self.nodes[id].level)
    }

    /// Largest ancestor (or the node itself) whose level is at most `level + delta`.
    fn upper_neighbor(&self, id: NodeId, delta: u8) -> NodeId {
        let limit = self.nodes[id].level as u16 + delta as u16;
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            if self.nodes[p].level as u16 > limit {
                break;
            }
            cur = p;
        }
        cur
    }

    /// Relative area growth from the node to its largest ancestor within `delta` levels.
    pub fn stability(&self, id: NodeId, delta: u8) -> Result<f64, TreeError> {
        self.node(id)?;
        Ok(self.stability_unchecked(id, delta))
    }

    fn stability_unchecked(&self, id: NodeId, delta: u8) -> f64 {
        let a = self.nodes[id].area as f64;
        (self.nodes[self.upper_neighbor(id, delta)].area as f64 - a) / a
    }

    /// Node ids of the maximally stable regions, in node order (children first).
    pub fn mser_nodes(&self, params: &MserParams) -> Vec<NodeId> {
        let n = self.nodes.len();
        let delta = params.delta;
        let max_area = params.resolved_max_area(self.width as usize * self.height as usize);
        let q: Vec<f64> = (0..n).map(|i| self.stability_unchecked(i, delta)).collect();

        // local minimum along the root path: no ancestor within +delta is as stable, and no
        // descendant within -delta is strictly more stable
        let mut is_min = vec![true; n];
        for i in 0..n {
            let limit = self.nodes[i].level as u16 + delta as u16;
            let mut cur = i;
            while let Some(p) = self.nodes[cur].parent {
                if self.nodes[p].level as u16 > limit {
                    break;
                }
                if q[p] <= q[i] {
                    is_min[i] = false;
                }
                if q[i] < q[p] {
                    is_min[p] = false;
                }
                cur = p;
            }
        }

        let root = self.root();
        let candidates: Vec<NodeId> = (0..n)
            .filter(|&i| {
                i != root
                    && is_min[i]
                    && q[i] <= params.max_variation
                    && (params.min_area..=max_area).contains(&self.nodes[i].area)
            })
            .collect();

        // diversity: compare each candidate with candidate ancestors whose area is close
        let mut is_candidate = vec![false; n];
        for &c in &candidates {
            is_candidate[c] = true;
        }
        let mut suppressed = vec![false; n];
        for &c in &candidates {
            let mut cur = c;
            while let Some(p) = self.nodes[cur].parent {
                cur = p;
                let anc = self.nodes[p].area as f64;
                if anc - (self.nodes[c].area as f64) >= params.min_diversity * anc {
                    break;
                }
                if !is_candidate[p] {
                    continue;
                }
                // ties go to the ancestor
                if q[c] < q[p] {
                    suppressed[p] = true;
                } else {
                    suppressed[c] = true;
                }
            }
        }
        candidates.into_iter().filter(|&c| !suppressed[c]).collect()
    }
}

/// MSER detector settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MserParams {
    #[serde(default = "defaults::delta")]
    pub delta: u8,
    #[serde(default = "defaults::min_area")]
    pub min_area: usize,
    /// `None` means a quarter of the image area.
    #[serde(default)]
    pub max_area: Option<usize>,
    #[serde(default = "defaults::max_variation")]
    pub max_variation: f64,
    #[serde(default = "defaults::min_diversity")]
    pub min_diversity: f64,
}

mod defaults {
    pub fn delta() -> u8 {
        5
    }
    pub fn min_area() -> usize {
        8
    }
    pub fn max_variation() -> f64 {
        0.25
    }
    pub fn min_diversity() -> f64 {
        0.2
    }
}

impl Default for MserParams {
    fn default() -> Self {
        Self {
            delta: defaults::delta(),
            min_area: defaults::min_area(),
            max_area: None,
            max_variation: defaults::max_variation(),
            min_diversity: defaults::min_diversity(),
        }
    }
}

impl MserParams {
    pub fn resolved_max_area(&self, image_area: usize) -> usize {
        self.max_area.unwrap_or(image_area / 4)
    }

    /// Checks field domains; the error names the offending field.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=127).contains(&self.delta) {
            return Err(format!("delta must be in 1..=127, got {}", self.delta));
        }
        if let Some(max) = self.max_area {
            if self.min_area > max {
                return Err(format!("min_area {} exceeds max_area {max}", self.min_area));
            }
        }
        if !(self.max_variation >= 0.0) {
            return Err(format!("max_variation must be >= 0, got {}", self.max_variation));
        }
        if !(0.0..=1.0).contains(&self.min_diversity) {
            return Err(format!("min_diversity must be in [0, 1], got {}", self.min_diversity));
        }
        Ok(())
    }
}

/// MSERs of one polarity, sorted by level then seed pixel (row-major).
pub fn extract_msers(tree: &ComponentTree, params: &MserParams) -> Vec<Region> {
    let mut ids = tree.mser_nodes(params);
    ids.sort_by_key(|&i| {
        let nd = &tree.nodes[i];
        (nd.level, nd.seed_pixel.1, nd.seed_pixel.0)
    });
    ids.into_iter().map(|i| tree.region(i)).collect()
}

/// Dark-on-light MSERs followed by light-on-dark MSERs.
pub fn detect_regions(img: &GrayImage, params: &MserParams) -> Vec<Region> {
    detect_regions_with(img, params, true, true)
}

pub fn detect_regions_with(img: &GrayImage, params: &MserParams, dark: bool, light: bool) -> Vec<Region> {
    let run = |polarity| extract_msers(&build_tree(img, polarity), params);
    let (mut out, bright) = std::thread::scope(|s| {
        let bright = light.then(|| s.spawn(|| run(Polarity::LightOnDark)));
        let dark_regions = if dark { run(Polarity::DarkOnLight) } else { Vec::new() };
        (dark_regions, bright.map(|h| h.join().expect("light polarity pass panicked")))
    });
    out.extend(bright.unwrap_or_default());
    out
}
