use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::mot::{fuse, Modality, TokenSequence};
use crate::numerics::{mix_seed, Matrix, SeededRng};

use super::TrainExample;

const TARGET_TOKENS: usize = 4;
const REFERENCE_TOKENS: usize = 3;
const TOKEN_SPREAD: f64 = 0.5;
const TARGET_NOISE: f64 = 0.01;

/// One synthetic example. `target = mean(input rows) * T_k^T + noise`.
#[derive(Debug, Clone)]
pub struct ToySample {
    pub category: usize,
    /// Fused target and reference tokens (the mask token is added per step).
    pub input: TokenSequence,
    pub target: Matrix,
    pub noise: Matrix,
    /// Fine mask of the edit region, `d_model/2` pixels square.
    pub mask: BinaryMask,
}

/// Per-category regression problem: category `k` owns a hidden linear map
/// `T_k` and a token centroid the gate can use to tell categories apart.
#[derive(Debug, Clone)]
pub struct ToyTask {
    pub n_categories: usize,
    pub d_model: usize,
    pub seed: u64,
    pub maps: Vec<Matrix>,
    pub centroids: Vec<Matrix>,
    pub samples: Vec<ToySample>,
}

impl ToyTask {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Model input for sample `idx` under `mask`: the image tokens followed
    /// by one mask token.
    pub fn example(&self, idx: usize, mask: &BinaryMask) -> Result<TrainExample> {
        let s = &self.samples[idx];
        Ok(TrainExample {
            input: s.input.concat(&mask_token(mask, self.d_model)?)?,
            target: s.target.clone(),
        })
    }

    pub fn mask_side(&self) -> usize {
        self.d_model / 2
    }
}

/// Encodes a mask as one target-tagged token: the first half of the features
/// are per-row coverage fractions, the second half per-column fractions.
/// Features beyond the mask's extent are zero.
pub fn mask_token(mask: &BinaryMask, d_model: usize) -> Result<TokenSequence> {
    let half = d_model / 2;
    if half == 0 {
        return Err(Error::Config("d_model too small for a mask token".into()));
    }
    let (h, w) = (mask.height(), mask.width());
    let mut feats = vec![0.0; d_model];
    for (y, f) in feats.iter_mut().enumerate().take(h.min(half)) {
        *f = (0..w).filter(|&x| mask.get(x, y)).count() as f64 / w as f64;
    }
    for x in 0..w.min(d_model - half) {
        feats[half + x] = (0..h).filter(|&y| mask.get(x, y)).count() as f64 / h as f64;
    }
    Ok(TokenSequence::uniform(
        Matrix::row_vector(&feats),
        Modality::Target,
    ))
}

/// Builds a seeded toy task with `per_cat` samples for each of `n_categories`.
pub fn gen_toy_task(
    n_categories: usize,
    per_cat: usize,
    d_model: usize,
    seed: u64,
) -> Result<ToyTask> {
    if n_categories < 2 {
        return Err(Error::Config(format!(
            "need at least two categories, got {n_categories}"
        )));
    }
    if per_cat == 0 {
        return Err(Error::Config(
            "need at least one sample per category".into(),
        ));
    }
    if d_model < 8 || !d_model.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "toy tasks need an even d_model >= 8, got {d_model}"
        )));
    }
    let mut rng = SeededRng::new(mix_seed(seed, &[0x70_7A5C]));
    let map_std = 1.0 / (d_model as f64).sqrt();
    let maps: Vec<Matrix> = (0..n_categories)
        .map(|_| Matrix::gaussian(d_model, d_model, map_std, &mut rng))
        .collect();
    let centroids: Vec<Matrix> = (0..n_categories)
        .map(|_| Matrix::gaussian(1, d_model, 1.0, &mut rng))
        .collect();

    let side = d_model / 2;
    let mut samples = Vec::with_capacity(n_categories * per_cat);
    for k in 0..n_categories {
        for _ in 0..per_cat {
            let tokens = |n: usize, rng: &mut SeededRng| {
                let mut m = Matrix::gaussian(n, d_model, TOKEN_SPREAD, rng);
                for r in 0..n {
                    for (v, &c) in m.row_mut(r).iter_mut().zip(centroids[k].data()) {
                        *v += c;
                    }
                }
                m
            };
            let target_part =
                TokenSequence::uniform(tokens(TARGET_TOKENS, &mut rng), Modality::Target);
            let reference_part =
                TokenSequence::uniform(tokens(REFERENCE_TOKENS, &mut rng), Modality::Reference);
            let input = fuse(&target_part, &reference_part, None)?;
            let noise = Matrix::gaussian(1, d_model, TARGET_NOISE, &mut rng);
            let mut target = input.tokens().mean_rows()?.matmul_t(&maps[k])?;
            target.add_scaled(1.0, &noise)?;
            let mask = random_blob(side, &mut rng)?;
            samples.push(ToySample {
                category: k,
                input,
                target,
                noise,
                mask,
            });
        }
    }
    Ok(ToyTask {
        n_categories,
        d_model,
        seed,
        maps,
        centroids,
        samples,
    })
}

/// Filled ellipse somewhere in the middle of a `side x side` frame.
fn random_blob(side: usize, rng: &mut SeededRng) -> Result<BinaryMask> {
    let s = side as f64;
    let cx = rng.uniform_range(0.25 * s, 0.75 * s);
    let cy = rng.uniform_range(0.25 * s, 0.75 * s);
    let rx = rng.uniform_range(1.0, (s / 3.0).max(1.5));
    let ry = rng.uniform_range(1.0, (s / 3.0).max(1.5));
    let mut m = BinaryMask::new(side, side)?;
    for y in 0..side {
        for x in 0..side {
            let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
            if dx * dx + dy * dy <= 1.0 {
                m.set(x, y, true);
            }
        }
    }
    m.set(cx as usize, cy as usize, true);
    Ok(m)
}
