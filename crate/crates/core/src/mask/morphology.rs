use crate::error::{Error, Result};

use super::BinaryMask;

/// Closed disc of the given radius (in pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuringElement {
    radius: f64,
}

impl StructuringElement {
    pub fn disc(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::Config(format!("disc radius {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Integer offsets `(dx, dy)` with `dx^2 + dy^2 <= r^2`.
    pub fn offsets(&self) -> Vec<(i64, i64)> {
        let reach = self.radius.floor() as i64;
        let r2 = self.radius * self.radius;
        let mut out = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if ((dx * dx + dy * dy) as f64) <= r2 {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// Binary dilation: a pixel is set iff some input pixel lies within the disc
/// radius of it. Output keeps the input dimensions.
pub fn dilate(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let offsets = se.offsets();
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut out = mask.clone();
    for (x, y) in mask.iter_set() {
        for &(dx, dy) in &offsets {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                out.set(nx as usize, ny as usize, true);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn brute_force(mask: &BinaryMask, a: f64) -> BinaryMask {
        let mut out = BinaryMask::new(mask.height(), mask.width()).unwrap();
        for qy in 0..mask.height() {
            for qx in 0..mask.width() {
                let hit = mask.iter_set().any(|(px, py)| {
                    let dx = qx as f64 - px as f64;
                    let dy = qy as f64 - py as f64;
                    (dx * dx + dy * dy).sqrt() <= a
                });
                out.set(qx, qy, hit);
            }
        }
        out
    }

    #[test]
    fn empty_stays_empty() {
        let m = BinaryMask::new(6, 6).unwrap();
        assert!(dilate(&m, StructuringElement::disc(3.0).unwrap()).is_empty());
    }

    #[test]
    fn radius_zero_is_identity() {
        let m = BinaryMask::from_ascii(&["#..", ".##", "..."]).unwrap();
        assert_eq!(dilate(&m, StructuringElement::disc(0.0).unwrap()), m);
    }

    #[test]
    fn single_pixel_radius_one_is_a_plus() {
        let mut m = BinaryMask::new(5, 5).unwrap();
        m.set(2, 2, true);
        let d = dilate(&m, StructuringElement::disc(1.0).unwrap());
        let expected =
            BinaryMask::from_ascii(&[".....", "..#..", ".###.", "..#..", "....."]).unwrap();
        assert_eq!(d, expected);
        assert_eq!(d, brute_force(&m, 1.0));
    }

    #[test]
    fn clipped_at_borders() {
        let mut m = BinaryMask::new(4, 4).unwrap();
        m.set(0, 0, true);
        let d = dilate(&m, StructuringElement::disc(2.0).unwrap());
        assert_eq!(d, brute_force(&m, 2.0));
        assert_eq!(d.count(), 6);
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = SeededRng::new(31);
        for _ in 0..10 {
            let bits = (0..20 * 24).map(|_| rng.bernoulli(0.05)).collect();
            let m = BinaryMask::from_bits(20, 24, bits).unwrap();
            for a in [0.0, 1.0, 1.5, 2.3, 3.0] {
                let se = StructuringElement::disc(a).unwrap();
                let d = dilate(&m, se);
                assert_eq!(d, brute_force(&m, a), "radius {a}");
                assert!(m.is_subset_of(&d));
            }
        }
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(StructuringElement::disc(-1.0).is_err());
        assert!(StructuringElement::disc(f64::NAN).is_err());
    }
}
