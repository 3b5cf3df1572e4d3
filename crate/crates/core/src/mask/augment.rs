use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mix_seed, PerlinField};

use super::{
    components, dilate, extract_contour, rasterize, BinaryMask, Contour, Point, Stage,
    StructuringElement,
};

/// Perlin displacement of contour points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbParams {
    /// Displacement magnitude in pixels.
    pub alpha: f64,
    /// Noise frequency in 1/pixels.
    pub scale: f64,
    /// Offset (pixels) separating the x and y noise lookups.
    pub delta: f64,
    pub seed: u64,
}

impl PerturbParams {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !self.scale.is_finite() || self.scale <= 0.0 {
            return Err(Error::Config(format!(
                "scale must be > 0, got {}",
                self.scale
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::Config("delta must be finite".into()));
        }
        Ok(())
    }
}

/// Rough-mask settings as read from a JSON sidecar `{a, alpha, scale, delta, seed}`.
///
/// Defaults target a 256x256 working resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    /// Dilation radius in pixels.
    pub a: f64,
    pub alpha: f64,
    pub scale: f64,
    pub delta: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            a: 8.0,
            alpha: 6.0,
            scale: 0.05,
            delta: 1000.0,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn perturb(&self) -> PerturbParams {
        PerturbParams {
            alpha: self.alpha,
            scale: self.scale,
            delta: self.delta,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        StructuringElement::disc(self.a)?;
        self.perturb().validate()
    }
}

/// Seed for one sample at one training step, derived from a base seed.
pub fn sample_seed(base: u64, step: u64, sample_id: u64) -> u64 {
    mix_seed(base, &[step, sample_id])
}

/// Moves every point by `alpha * (Nx(x s, y s), Ny((x + delta) s, (y + delta) s))`
/// and clamps it into `[0, W-1] x [0, H-1]`. Point order and count are kept.
pub fn displace_contour(
    contour: &Contour,
    params: &PerturbParams,
    field_x: &PerlinField,
    field_y: &PerlinField,
    height: usize,
    width: usize,
) -> Contour {
    let (max_x, max_y) = (
        width.saturating_sub(1) as f64,
        height.saturating_sub(1) as f64,
    );
    let s = params.scale;
    let points = contour
        .points()
        .iter()
        .map(|p| {
            let dx = params.alpha * field_x.sample(p.x * s, p.y * s);
            let dy =
                params.alpha * field_y.sample((p.x + params.delta) * s, (p.y + params.delta) * s);
            Point::new((p.x + dx).clamp(0.0, max_x), (p.y + dy).clamp(0.0, max_y))
        })
        .collect();
    contour.with_points(points)
}

/// Dilate, trace, displace and refill each 8-connected component of `fine`,
/// returning the union. Deterministic in `(fine, a, params)`.
pub fn make_rough_mask(fine: &BinaryMask, a: f64, params: &PerturbParams) -> Result<BinaryMask> {
    if fine.is_empty() {
        return Err(Error::EmptyMask);
    }
    params.validate()?;
    let se = StructuringElement::disc(a)?;
    // One field for both axes; `delta` decorrelates the two lookups.
    let field = PerlinField::new(params.seed);
    let (h, w) = (fine.height(), fine.width());
    let mut rough = BinaryMask::new(h, w)?;
    for comp in components(fine) {
        let displaced: Vec<Contour> = extract_contour(&dilate(&comp, se))
            .iter()
            .map(|c| displace_contour(c, params, &field, &field, h, w))
            .collect();
        rough.union_with(&rasterize(&displaced, h, w)?)?;
    }
    Ok(rough)
}

/// Smallest solid rectangle covering every set pixel; empty stays empty.
pub fn bbox_mask(rough: &BinaryMask) -> BinaryMask {
    let mut out =
        BinaryMask::new(rough.height(), rough.width()).expect("dimensions come from a valid mask");
    if let Some(b) = rough.bounding_box() {
        out.fill_rect(b);
    }
    out
}

/// The mask shown to the model at a given stage.
pub fn augment_for_stage(
    fine: &BinaryMask,
    stage: Stage,
    a: f64,
    params: &PerturbParams,
) -> Result<BinaryMask> {
    match stage {
        Stage::Fine => Ok(fine.clone()),
        Stage::Rough => make_rough_mask(fine, a, params),
        Stage::BBox => Ok(bbox_mask(&make_rough_mask(fine, a, params)?)),
    }
}
