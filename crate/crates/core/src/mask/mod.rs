//! Mask annealing: fine masks, dilated and Perlin-perturbed rough masks,
//! bounding-box masks, and the step schedule that moves between them.
//!
//! Pixel `(x, y)` is column `x`, row `y`, with its center at the continuous
//! coordinate `(x, y)`. Contours therefore live in the same frame: the image
//! domain is `[0, W-1] x [0, H-1]`.

mod augment;
mod bitmask;
mod contour;
mod morphology;
mod pgm;
mod raster;
mod schedule;

pub use augment::{
    augment_for_stage, bbox_mask, displace_contour, make_rough_mask, sample_seed, AugmentConfig,
    PerturbParams,
};
pub use bitmask::{BinaryMask, BoundingBox};
pub use contour::{components, extract_contour, Contour, Point};
pub use morphology::{dilate, StructuringElement};
pub use pgm::{read_pgm, write_pgm};
pub use raster::{point_in_contours, rasterize};
pub use schedule::{AnnealingSchedule, Stage};
