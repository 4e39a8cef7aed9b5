//! End-to-end detection: stretch, MSER in both polarities, geometric filter,
//! stroke filter, box expansion and merging, primary region selection.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::component_tree::{detect_regions_with, MserParams};
use crate::raster::{contrast_stretch, GrayImage};
use crate::region::{compute_props, BoundingBox, GeometricProps, GeometryThresholds, Polarity, RejectReason, Region};
use crate::stroke::{stroke_stats, StrokeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "defaults::stretch_enabled")]
    pub stretch_enabled: bool,
    #[serde(default = "defaults::stretch_k")]
    pub stretch_k: f64,
    #[serde(default = "defaults::polarity_enabled")]
    pub dark_on_light: bool,
    #[serde(default = "defaults::polarity_enabled")]
    pub light_on_dark: bool,
    #[serde(default)]
    pub mser: MserParams,
    #[serde(default)]
    pub geometry: GeometryThresholds,
    #[serde(default)]
    pub stroke: StrokeParams,
    /// Fraction of a box's width (height) added on the left and right (top and bottom).
    #[serde(default = "defaults::expansion_amount")]
    pub expansion_amount: f64,
    /// Minimum intersection over the smaller box's area for two boxes to merge;
    /// zero merges any positive-area overlap.
    #[serde(default)]
    pub merge_overlap_min: f64,
}

mod defaults {
    pub fn stretch_enabled() -> bool {
        true
    }
    pub fn stretch_k() -> f64 {
        2.0
    }
    pub fn polarity_enabled() -> bool {
        true
    }
    pub fn expansion_amount() -> f64 {
        0.15
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stretch_enabled: defaults::stretch_enabled(),
            stretch_k: defaults::stretch_k(),
            dark_on_light: true,
            light_on_dark: true,
            mser: MserParams::default(),
            geometry: GeometryThresholds::default(),
            stroke: StrokeParams::default(),
            expansion_amount: defaults::expansion_amount(),
            merge_overlap_min: 0.0,
        }
    }
}

/// A config value outside its domain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid value for `{key}`: {message}")]
pub struct InvalidConfig {
    /// Dotted path of the offending field, e.g. `stroke.max_variation`.
    pub key: String,
    pub message: String,
}

impl PipelineConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        let bad = |key: &str, message: String| Err(InvalidConfig { key: key.to_string(), message });
        if !(self.stretch_k > 0.0 && self.stretch_k.is_finite()) {
            return bad("stretch_k", format!("must be a positive number, got {}", self.stretch_k));
        }
        if let Err(msg) = self.mser.validate() {
            let field = ["delta", "min_area", "max_variation", "min_diversity"]
                .into_iter()
                .find(|f| msg.starts_with(f))
                .unwrap_or("mser");
            return bad(&format!("mser.{field}"), msg);
        }
        let g = &self.geometry;
        for (key, v) in [
            ("max_aspect_ratio", g.max_aspect_ratio),
            ("min_aspect_ratio", g.min_aspect_ratio),
            ("max_eccentricity", g.max_eccentricity),
            ("min_solidity", g.min_solidity),
            ("min_extent", g.min_extent),
            ("max_extent", g.max_extent),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return bad(&format!("geometry.{key}"), format!("must be >= 0, got {v}"));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (g.min_aspect_ratio, g.max_aspect_ratio) {
            if lo > hi {
                return bad("geometry.min_aspect_ratio", format!("{lo} exceeds max_aspect_ratio {hi}"));
            }
        }
        if let (Some(lo), Some(hi)) = (g.min_extent, g.max_extent) {
            if lo > hi {
                return bad("geometry.min_extent", format!("{lo} exceeds max_extent {hi}"));
            }
        }
        if let Some(h) = g.max_euler_holes {
            if h < 0 {
                return bad("geometry.max_euler_holes", format!("must be >= 0, got {h}"));
            }
        }
        if let Some(v) = self.stroke.max_variation {
            if !(v >= 0.0) {
                return bad("stroke.max_variation", format!("must be >= 0, got {v}"));
            }
        }
        if !(self.expansion_amount >= 0.0 && self.expansion_amount.is_finite()) {
            return bad("expansion_amount", format!("must be >= 0, got {}", self.expansion_amount));
        }
        if !(0.0..=1.0).contains(&self.merge_overlap_min) {
            return bad("merge_overlap_min", format!("must be in [0, 1], got {}", self.merge_overlap_min));
        }
        Ok(())
    }
}

/// Grows each box by `amount * width` left and right and `amount * height`
/// top and bottom (rounded), clamped to the frame.
pub fn expand_boxes(boxes: &[BoundingBox], amount: f64, frame: (u32, u32)) -> Vec<BoundingBox> {
    boxes
        .iter()
        .map(|b| {
            let dx = (amount * b.width as f64).round() as i64;
            let dy = (amount * b.height as f64).round() as i64;
            let x0 = (b.x as i64 - dx).max(0);
            let y0 = (b.y as i64 - dy).max(0);
            let x1 = (b.right() as i64 + dx).min(frame.0 as i64);
            let y1 = (b.bottom() as i64 + dy).min(frame.1 as i64);
            BoundingBox::new(x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32)
        })
        .collect()
}

fn overlapping(a: &BoundingBox, b: &BoundingBox, min_overlap: f64) -> bool {
    let inter = a.intersection_area(b);
    inter > 0 && inter as f64 / a.area().min(b.area()) as f64 >= min_overlap
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Replaces every connected group of overlapping boxes by its union box,
/// repeating until no two output boxes overlap. Sorted by (y, x, width, height).
pub fn merge_overlapping(boxes: &[BoundingBox], merge_overlap_min: f64) -> Vec<BoundingBox> {
    let mut current: Vec<BoundingBox> = boxes.to_vec();
    loop {
        let n = current.len();
        let mut parent: Vec<usize> = (0..n).collect();
        let mut merged_any = false;
        for i in 0..n {
            for j in i + 1..n {
                if overlapping(&current[i], &current[j], merge_overlap_min) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                    merged_any = true;
                }
            }
        }
        let mut groups: Vec<Option<BoundingBox>> = vec![None; n];
        for (i, b) in current.iter().enumerate() {
            let r = find(&mut parent, i);
            groups[r] = Some(groups[r].map_or(*b, |g| g.union(b)));
        }
        current = groups.into_iter().flatten().collect();
        current.sort_by_key(|b| (b.y, b.x, b.width, b.height));
        if !merged_any {
            return current;
        }
    }
}

/// Largest box; ties go to the topmost, then leftmost.
pub fn select_primary(boxes: &[BoundingBox]) -> Option<BoundingBox> {
    boxes.iter().copied().min_by_key(|b| (std::cmp::Reverse(b.area()), b.y, b.x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub bbox: BoundingBox,
    pub area: usize,
    pub polarity: Polarity,
    pub level: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub props: Option<GeometricProps>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stroke_variation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedRegion {
    pub reason: RejectReason,
    /// Value of the property that failed.
    pub measured: f64,
    #[serde(flatten)]
    pub region: RegionSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub name: String,
    pub input: usize,
    pub kept: Vec<RegionSummary>,
    pub rejected: Vec<RejectedRegion>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionTrace {
    pub stages: Vec<StageTrace>,
    pub expanded_boxes: Vec<BoundingBox>,
    pub final_boxes: Vec<BoundingBox>,
    pub primary_box: Option<BoundingBox>,
}

#[derive(Clone, Debug)]
pub struct DetectionResult {
    pub image_size: (u32, u32),
    pub config: PipelineConfig,
    pub trace: DetectionTrace,
    pub timing: Vec<(&'static str, Duration)>,
}

impl DetectionResult {
    pub fn final_boxes(&self) -> &[BoundingBox] {
        &self.trace.final_boxes
    }

    pub fn primary_box(&self) -> Option<BoundingBox> {
        self.trace.primary_box
    }
}

struct Candidate {
    region: Region,
    props: GeometricProps,
    stroke_variation: Option<f64>,
}

impl Candidate {
    fn summary(&self) -> RegionSummary {
        RegionSummary {
            bbox: self.props.bbox,
            area: self.props.area,
            polarity: self.region.polarity,
            level: self.region.source_level,
            props: Some(self.props.clone()),
            stroke_variation: self.stroke_variation,
        }
    }
}

/// Runs the whole detector. The config is assumed valid (see [`PipelineConfig::validate`]).
pub fn detect(img: &GrayImage, config: &PipelineConfig) -> DetectionResult {
    let mut timing = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timing: &mut Vec<(&'static str, Duration)>| {
        let now = Instant::now();
        timing.push((name, now - clock));
        clock = now;
    };

    let stretched;
    let work = if config.stretch_enabled {
        stretched = contrast_stretch(img, config.stretch_k);
        &stretched
    } else {
        img
    };
    lap("preprocess", &mut timing);

    let regions = detect_regions_with(work, &config.mser, config.dark_on_light, config.light_on_dark);
    let candidates: Vec<Candidate> = regions
        .into_iter()
        .map(|region| Candidate { props: compute_props(&region), region, stroke_variation: None })
        .collect();
    let mut stages = vec![StageTrace {
        name: "mser".into(),
        input: candidates.len(),
        kept: candidates.iter().map(Candidate::summary).collect(),
        rejected: Vec::new(),
    }];
    lap("mser", &mut timing);

    let mut stage = StageTrace { name: "geometry".into(), input: candidates.len(), kept: vec![], rejected: vec![] };
    let mut survivors = Vec::new();
    for c in candidates {
        match config.geometry.first_failure(&c.props) {
            None => {
                stage.kept.push(c.summary());
                survivors.push(c);
            }
            Some((reason, measured)) => stage.rejected.push(RejectedRegion { reason, measured, region: c.summary() }),
        }
    }
    stages.push(stage);
    lap("geometry", &mut timing);

    let mut stage = StageTrace { name: "stroke".into(), input: survivors.len(), kept: vec![], rejected: vec![] };
    let mut text_boxes = Vec::new();
    for mut c in survivors {
        let variation = stroke_stats(&c.region, config.stroke.end_trim).variation;
        c.stroke_variation = Some(variation);
        if config.stroke.max_variation.is_some_and(|max| variation > max) {
            stage.rejected.push(RejectedRegion { reason: RejectReason::Stroke, measured: variation, region: c.summary() });
        } else {
            stage.kept.push(c.summary());
            text_boxes.push(c.props.bbox);
        }
    }
    stages.push(stage);
    lap("stroke", &mut timing);

    let expanded_boxes = expand_boxes(&text_boxes, config.expansion_amount, (img.width(), img.height()));
    let final_boxes = merge_overlapping(&expanded_boxes, config.merge_overlap_min);
    let primary_box = select_primary(&final_boxes);
    lap("merge", &mut timing);

    DetectionResult {
        image_size: (img.width(), img.height()),
        config: config.clone(),
        trace: DetectionTrace { stages, expanded_boxes, final_boxes, primary_box },
        timing,
    }
}
