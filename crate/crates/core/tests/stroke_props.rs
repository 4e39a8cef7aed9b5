mod common;

use proptest::prelude::*;
use textdet::raster::BinaryMask;
use textdet::region::Region;
use textdet::stroke::{distance_transform, filter_by_stroke, skeletonize, stroke_stats, StrokeParams, StrokeWidthStats};

use common::*;

fn mask() -> impl Strategy<Value = BinaryMask> {
    (any::<u64>(), 1u32..=16, 1u32..=16).prop_map(|(seed, w, h)| {
        let mut m = BinaryMask::new(w, h);
        for (x, y) in random_connected_mask(&mut rng(seed), w, h) {
            m.set(x, y, true);
        }
        m
    })
}

/// Bar with odd width and length at least four times the width.
fn bar() -> impl Strategy<Value = (u32, u32)> {
    (0u32..4).prop_flat_map(|k| {
        let w = 2 * k + 1;
        (Just(w), 4 * w..=8 * w)
    })
}

fn scale_pixels(px: &[(u32, u32)], s: u32) -> PixelSet {
    px.iter().flat_map(|&(x, y)| (0..s).flat_map(move |dy| (0..s).map(move |dx| (x * s + dx, y * s + dy)))).collect()
}

proptest! {
    #[test]
    fn distance_matches_exhaustive_search(m in mask()) {
        let field = distance_transform(&m);
        let want = distance_oracle(&m);
        for y in 0..m.height() {
            for x in 0..m.width() {
                prop_assert_eq!(field.get(x, y), want[(y * m.width() + x) as usize]);
            }
        }
    }

    #[test]
    fn thinning_matches_reference(m in mask()) {
        prop_assert_eq!(skeletonize(&m), zhang_suen_oracle(&m));
    }

    #[test]
    fn skeleton_inside_mask(m in mask()) {
        let s = skeletonize(&m);
        prop_assert!(s.is_subset_of(&m));
    }

    #[test]
    fn stats_are_finite(m in mask()) {
        let s = stroke_stats(&Region::from_pixels(m.iter_set().collect()), 2);
        prop_assert!(s.mean >= 1.0 && s.variation.is_finite() && s.variation >= 0.0);
    }

    #[test]
    fn bars_scale_linearly((w, len) in bar(), s in prop_oneof![Just(3u32), Just(5)]) {
        let base = stroke_stats(&Region::from_pixels(rect_pixels(0, 0, len, w)), 2);
        let scaled = stroke_stats(&Region::from_pixels(scale_pixels(&rect_pixels(0, 0, len, w), s)), 2);
        prop_assert!((scaled.mean / (s as f64 * base.mean) - 1.0).abs() <= 0.15, "{} vs {}", scaled.mean, base.mean);
        prop_assert!((scaled.variation - base.variation).abs() <= 0.05);
    }

    #[test]
    fn bar_variation_ignores_position_and_quarter_turns((w, len) in bar(), dx in 0u32..40, dy in 0u32..40) {
        let flat = stroke_stats(&Region::from_pixels(rect_pixels(0, 0, len, w)), 2).variation;
        let moved = stroke_stats(&Region::from_pixels(rect_pixels(dx, dy, len, w)), 2).variation;
        let upright = stroke_stats(&Region::from_pixels(rect_pixels(dx, dy, w, len)), 2).variation;
        prop_assert!((flat - moved).abs() <= 0.05);
        prop_assert!((flat - upright).abs() <= 0.05);
    }

    #[test]
    fn translation_leaves_stats_unchanged(m in mask(), dx in 0u32..30, dy in 0u32..30) {
        let r = Region::from_pixels(m.iter_set().collect());
        prop_assert_eq!(stroke_stats(&r, 2), stroke_stats(&r.translated(dx, dy), 2));
    }

    #[test]
    fn single_sample_has_zero_variation(v in 0.5f64..100.0) {
        let s = StrokeWidthStats::from_widths(vec![v]);
        prop_assert_eq!(s.stddev, 0.0);
        prop_assert_eq!(s.variation, 0.0);
    }

    #[test]
    fn loosening_keeps_superset(masks in proptest::collection::vec(mask(), 1..8), t in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let regions: Vec<Region> = masks.iter().map(|m| Region::from_pixels(m.iter_set().collect())).collect();
        let tight = filter_by_stroke(regions.clone(), &StrokeParams { max_variation: Some(t), end_trim: 2 });
        let loose = filter_by_stroke(regions, &StrokeParams { max_variation: Some(t + extra), end_trim: 2 });
        prop_assert_eq!(tight.kept.len() + tight.rejected.len(), loose.kept.len() + loose.rejected.len());
        for r in &tight.kept {
            prop_assert!(loose.kept.contains(r));
        }
    }
}

#[test]
fn erased_block_uses_distance_ridge() {
    let block = BinaryMask::from_bits(2, 2, vec![true; 4]).unwrap();
    assert_eq!(skeletonize(&block).count(), 0);
    let s = stroke_stats(&Region::from_pixels(block.iter_set().collect()), 2);
    assert_eq!(s.widths, vec![1.0; 4]);
    assert_eq!(s.variation, 0.0);
}

#[test]
fn population_stddev() {
    let s = StrokeWidthStats::from_widths(vec![1.0, 3.0]);
    assert_eq!(s.mean, 2.0);
    assert_eq!(s.stddev, 1.0);
    assert_eq!(s.variation, 0.5);
}

#[test]
fn disabled_filter_keeps_dumbbell() {
    let r = Region::from_pixels(dumbbell(3, 9, 30));
    let out = filter_by_stroke(vec![r.clone()], &StrokeParams { max_variation: None, end_trim: 2 });
    assert_eq!(out.kept, vec![r.clone()]);
    let out = filter_by_stroke(vec![r], &StrokeParams { max_variation: Some(0.1), end_trim: 2 });
    assert_eq!(out.rejected.len(), 1);
    assert!(out.rejected[0].measured > 0.1);
}
