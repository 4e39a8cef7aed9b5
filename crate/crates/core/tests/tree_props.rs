mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use textdet::component_tree::{build_tree, detect_regions, extract_msers, MserParams};
use textdet::raster::GrayImage;
use textdet::region::{Polarity, Region};

use common::*;

fn image() -> impl Strategy<Value = GrayImage> {
    (any::<u64>(), 1u32..=16, 1u32..=16, 2u32..=8).prop_map(|(seed, w, h, levels)| random_quantized_image(&mut rng(seed), w, h, levels))
}

fn loose_params() -> impl Strategy<Value = MserParams> {
    (1u8..=120, 0.0f64..2.0, 0.0f64..0.8).prop_map(|(delta, max_variation, min_diversity)| MserParams {
        delta,
        min_area: 1,
        max_area: Some(usize::MAX),
        max_variation,
        min_diversity,
    })
}

fn pixel_set(r: &Region) -> BTreeSet<(u32, u32)> {
    r.pixels().iter().copied().collect()
}

proptest! {
    #[test]
    fn tree_equals_threshold_decomposition(img in image()) {
        let tree = build_tree(&img, Polarity::DarkOnLight);
        let got: BTreeSet<PixelSet> = (0..tree.nodes().len()).map(|id| tree.region(id).pixels().to_vec()).collect();
        let want: BTreeSet<PixelSet> = extremal_regions_oracle(&img).into_iter().map(|c| c.pixels).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn msers_match_definitions(img in image(), params in loose_params()) {
        let tree = build_tree(&img, Polarity::DarkOnLight);
        let got: BTreeSet<PixelSet> = extract_msers(&tree, &params).iter().map(|r| r.pixels().to_vec()).collect();
        let oracle = MserOracleParams {
            delta: params.delta,
            min_area: 1,
            max_area: usize::MAX,
            max_variation: params.max_variation,
            min_diversity: params.min_diversity,
        };
        prop_assert_eq!(got, mser_oracle(&img, &oracle));
    }

    #[test]
    fn msers_reflood_from_their_level(img in image(), params in loose_params()) {
        for polarity in [Polarity::DarkOnLight, Polarity::LightOnDark] {
            let tree = build_tree(&img, polarity);
            let work = match polarity {
                Polarity::DarkOnLight => img.clone(),
                Polarity::LightOnDark => textdet::raster::invert(&img),
            };
            for r in extract_msers(&tree, &params) {
                prop_assert!(r.is_4_connected());
                prop_assert_eq!(flood(&work, r.pixels()[0], r.source_level), r.pixels().to_vec());
            }
        }
    }

    #[test]
    fn msers_nest_or_are_disjoint(img in image(), params in loose_params()) {
        for polarity in [Polarity::DarkOnLight, Polarity::LightOnDark] {
            let regions = extract_msers(&build_tree(&img, polarity), &params);
            for (i, a) in regions.iter().enumerate() {
                for b in &regions[i + 1..] {
                    let (sa, sb) = (pixel_set(a), pixel_set(b));
                    let overlap = sa.intersection(&sb).count();
                    prop_assert!(overlap == 0 || (overlap == sa.len()) != (overlap == sb.len()));
                }
            }
        }
    }

    #[test]
    fn shift_invariance(seed in any::<u64>(), w in 1u32..=12, h in 1u32..=12, dx in 0u32..4, dy in 0u32..4) {
        // content darker than the frame, moved inside a fixed bright canvas
        let content = random_quantized_image(&mut rng(seed), w, h, 8).map(|v| (v as u16 * 4 / 5) as u8);
        let place = |ox: u32, oy: u32| {
            let mut canvas = GrayImage::filled(w + 6, h + 6, 255);
            for y in 0..h {
                for x in 0..w {
                    canvas.set(x + ox, y + oy, content.get(x, y));
                }
            }
            canvas
        };
        let params = MserParams { min_area: 1, max_area: Some(usize::MAX), ..MserParams::default() };
        for polarity in [Polarity::DarkOnLight, Polarity::LightOnDark] {
            let a: BTreeSet<PixelSet> = extract_msers(&build_tree(&place(1, 1), polarity), &params)
                .iter()
                .map(|r| r.translated(dx, dy).pixels().to_vec())
                .collect();
            let b: BTreeSet<PixelSet> = extract_msers(&build_tree(&place(1 + dx, 1 + dy), polarity), &params)
                .iter()
                .map(|r| r.pixels().to_vec())
                .collect();
            if polarity == Polarity::DarkOnLight {
                prop_assert_eq!(a, b);
            } else {
                // the bright frame itself moves with the canvas, not the content
                let inside = |set: &BTreeSet<PixelSet>| -> BTreeSet<PixelSet> {
                    set.iter()
                        .filter(|p| p.iter().all(|&(x, y)| x > dx && y > dy && x <= w + dx && y <= h + dy))
                        .cloned()
                        .collect()
                };
                prop_assert_eq!(inside(&a), inside(&b));
            }
        }
    }

    #[test]
    fn polarities_are_mirror_images(img in image()) {
        let params = MserParams { min_area: 1, ..MserParams::default() };
        let light: Vec<PixelSet> = extract_msers(&build_tree(&img, Polarity::LightOnDark), &params).iter().map(|r| r.pixels().to_vec()).collect();
        let inv = textdet::raster::invert(&img);
        let dark: Vec<PixelSet> = extract_msers(&build_tree(&inv, Polarity::DarkOnLight), &params).iter().map(|r| r.pixels().to_vec()).collect();
        prop_assert_eq!(light, dark);
    }
}

#[test]
fn detection_is_deterministic_across_threads() {
    let img = random_quantized_image(&mut rng(7), 64, 48, 6);
    let params = MserParams { min_area: 1, ..MserParams::default() };
    let first = detect_regions(&img, &params);
    for _ in 0..5 {
        assert_eq!(detect_regions(&img, &params), first);
    }
    // dark results precede light ones
    let split = first.iter().position(|r| r.polarity == Polarity::LightOnDark).unwrap_or(first.len());
    assert!(first[..split].iter().all(|r| r.polarity == Polarity::DarkOnLight));
    assert!(first[split..].iter().all(|r| r.polarity == Polarity::LightOnDark));
}
