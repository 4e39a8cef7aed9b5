//! Connected-component text region detection.
//!
//! The detector finds maximally stable extremal regions in both polarities,
//! filters them by geometric properties and by stroke width variation, then
//! expands and merges the surviving boxes into text regions. The largest
//! merged box is reported as the primary text region.

pub mod component_tree;
pub mod fixture;
pub mod pipeline;
pub mod raster;
pub mod region;
pub mod report;
pub mod service;
pub mod stroke;

pub use component_tree::{build_tree, detect_regions, extract_msers, ComponentTree, MserParams};
pub use pipeline::{detect, DetectionResult, DetectionTrace, PipelineConfig};
pub use raster::{BinaryMask, GrayImage, RasterError};
pub use region::{BoundingBox, GeometricProps, GeometryThresholds, Polarity, Region};
pub use stroke::{StrokeParams, StrokeWidthStats};
