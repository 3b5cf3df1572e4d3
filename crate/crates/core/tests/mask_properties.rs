mod common;

use motmask::mask::{
    augment_for_stage, bbox_mask, dilate, make_rough_mask, BinaryMask, PerturbParams, Stage,
    StructuringElement,
};
use motmask::numerics::SeededRng;
use proptest::prelude::*;

fn random_mask(seed: u64) -> BinaryMask {
    let mut rng = SeededRng::new(seed);
    let (h, w) = (1 + rng.below(40), 1 + rng.below(40));
    let p = rng.uniform_range(0.01, 0.3);
    let bits = (0..h * w).map(|_| rng.bernoulli(p)).collect();
    BinaryMask::from_bits(h, w, bits).unwrap()
}

fn params(alpha: f64, scale: f64, seed: u64) -> PerturbParams {
    PerturbParams {
        alpha,
        scale,
        delta: 1000.0,
        seed,
    }
}

/// Checks that every set pixel of `rough` lies in the fine bbox grown by
/// `margin` on each side.
fn within_grown_bbox(fine: &BinaryMask, rough: &BinaryMask, margin: usize) -> bool {
    let (f, Some(r)) = (fine.bounding_box().unwrap(), rough.bounding_box()) else {
        return true;
    };
    r.x0 + margin >= f.x0 && r.y0 + margin >= f.y0 && r.x1 <= f.x1 + margin && r.y1 <= f.y1 + margin
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_only_grows(seed in any::<u64>(), radius in 0.0f64..6.0) {
        let m = random_mask(seed);
        prop_assert!(m.is_subset_of(&dilate(&m, StructuringElement::disc(radius).unwrap())));
    }

    #[test]
    fn containment_chain_without_displacement(seed in any::<u64>(), a in 0u32..5, noise in any::<u64>()) {
        let fine = common::simply_connected(&mut SeededRng::new(seed));
        let rough = make_rough_mask(&fine, a as f64, &params(0.0, 0.1, noise)).unwrap();
        let boxed = bbox_mask(&rough);
        prop_assert!(fine.is_subset_of(&rough));
        prop_assert!(rough.is_subset_of(&boxed));
        prop_assert!(boxed.is_solid_rectangle());
    }

    #[test]
    fn disabled_perturbations_are_identity(seed in any::<u64>(), noise in any::<u64>()) {
        let fine = common::simply_connected(&mut SeededRng::new(seed));
        prop_assert_eq!(make_rough_mask(&fine, 0.0, &params(0.0, 0.1, noise)).unwrap(), fine);
    }

    #[test]
    fn bbox_is_minimal(seed in any::<u64>()) {
        let m = random_mask(seed);
        let b = bbox_mask(&m);
        match m.bounding_box() {
            None => prop_assert!(b.is_empty()),
            Some(bb) => {
                prop_assert!(m.is_subset_of(&b) && b.is_solid_rectangle());
                // Each border row and column of the rectangle holds an input pixel.
                prop_assert!((bb.x0..=bb.x1).any(|x| m.get(x, bb.y0)));
                prop_assert!((bb.x0..=bb.x1).any(|x| m.get(x, bb.y1)));
                prop_assert!((bb.y0..=bb.y1).any(|y| m.get(bb.x0, y)));
                prop_assert!((bb.y0..=bb.y1).any(|y| m.get(bb.x1, y)));
            }
        }
    }

    #[test]
    fn rough_mask_is_deterministic(seed in any::<u64>(), noise in any::<u64>()) {
        let fine = random_mask(seed);
        prop_assume!(!fine.is_empty());
        let p = params(3.0, 0.2, noise);
        prop_assert_eq!(make_rough_mask(&fine, 2.0, &p).unwrap(), make_rough_mask(&fine, 2.0, &p).unwrap());
    }

    #[test]
    fn stage_outputs(seed in any::<u64>(), noise in any::<u64>()) {
        let fine = common::simply_connected(&mut SeededRng::new(seed));
        let p = params(2.0, 0.15, noise);
        prop_assert_eq!(augment_for_stage(&fine, Stage::Fine, 2.0, &p).unwrap(), fine.clone());
        let boxed = augment_for_stage(&fine, Stage::BBox, 2.0, &p).unwrap();
        prop_assert!(boxed.is_empty() || boxed.is_solid_rectangle());
        let rough = augment_for_stage(&fine, Stage::Rough, 2.0, &p).unwrap();
        prop_assert_eq!(boxed, bbox_mask(&rough));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bbox_bound_with_whole_pixel_params(
        seed in any::<u64>(),
        a in 0u32..6,
        alpha in 0u32..6,
        scale in 0.02f64..0.4,
        noise in any::<u64>(),
    ) {
        let fine = random_mask(seed);
        prop_assume!(!fine.is_empty());
        let rough = make_rough_mask(&fine, a as f64, &params(alpha as f64, scale, noise)).unwrap();
        prop_assert!(within_grown_bbox(&fine, &rough, (a + alpha) as usize));
    }

    /// For fractional radii the dilation reaches `floor(a)` pixels and the
    /// displaced pixel-edge contour can capture centres up to `alpha + 0.5`
    /// beyond them.
    #[test]
    fn bbox_bound_with_fractional_params(
        seed in any::<u64>(),
        a in 0.0f64..6.0,
        alpha in 0.0f64..6.0,
        scale in 0.02f64..0.4,
        noise in any::<u64>(),
    ) {
        let fine = random_mask(seed);
        prop_assume!(!fine.is_empty());
        let rough = make_rough_mask(&fine, a, &params(alpha, scale, noise)).unwrap();
        let margin = a.floor() as usize + (alpha + 0.5).floor() as usize;
        prop_assert!(within_grown_bbox(&fine, &rough, margin));
    }
}
