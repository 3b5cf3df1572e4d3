use std::f64::consts::FRAC_1_SQRT_2;

use super::SeededRng;

const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Single-octave 2-D gradient-lattice Perlin noise.
///
/// Gradients are the eight unit vectors at multiples of 45 degrees, selected by a
/// seeded 256-entry permutation (duplicated to 512 for wraparound). Blending
/// uses the quintic fade `6t^5 - 15t^4 + 10t^3`. The field is zero at every
/// integer lattice point and bounded by `sqrt(2)/2` in magnitude.
#[derive(Debug, Clone)]
pub struct PerlinField {
    seed: u64,
    perm: [u8; 512],
}

impl PerlinField {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255u8).collect();
        SeededRng::new(seed).shuffle(&mut table);
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { seed, perm }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let xi = (x0 as i64).rem_euclid(256) as usize;
        let yi = (y0 as i64).rem_euclid(256) as usize;

        let hash = |i: usize, j: usize| self.perm[self.perm[i] as usize + j] as usize;
        let aa = hash(xi, yi);
        let ab = hash(xi, yi + 1);
        let ba = hash(xi + 1, yi);
        let bb = hash(xi + 1, yi + 1);

        let u = fade(fx);
        let v = fade(fy);
        let bottom = lerp(grad(aa, fx, fy), grad(ba, fx - 1.0, fy), u);
        let top = lerp(grad(ab, fx, fy - 1.0), grad(bb, fx - 1.0, fy - 1.0), u);
        lerp(bottom, top, v)
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

fn grad(hash: usize, dx: f64, dy: f64) -> f64 {
    let (gx, gy) = GRADIENTS[hash & 7];
    gx * dx + gy * dy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_on_lattice_points() {
        let field = PerlinField::new(11);
        assert_eq!(field.sample(3.0, 7.0), 0.0);
        for i in -20..20 {
            for j in -20..20 {
                assert_eq!(field.sample(i as f64, j as f64), 0.0);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = PerlinField::new(99);
        let b = PerlinField::new(99);
        let c = PerlinField::new(100);
        let (x, y) = (12.345, -6.789);
        assert_eq!(a.sample(x, y).to_bits(), b.sample(x, y).to_bits());
        let differs = (0..100).any(|k| {
            let t = k as f64 * 0.37 + 0.1;
            a.sample(t, t * 0.5) != c.sample(t, t * 0.5)
        });
        assert!(differs);
    }

    #[test]
    fn bounded_over_a_million_points() {
        let field = PerlinField::new(2024);
        let mut rng = SeededRng::new(1);
        let mut max = 0.0f64;
        for _ in 0..1_000_000 {
            let x = rng.uniform_range(-300.0, 300.0);
            let y = rng.uniform_range(-300.0, 300.0);
            max = max.max(field.sample(x, y).abs());
        }
        assert!(max <= 1.0, "max |noise| = {max}");
        assert!(max > 0.3, "field looks degenerate: max {max}");
    }

    #[test]
    fn lipschitz_on_close_pairs() {
        let field = PerlinField::new(77);
        let mut rng = SeededRng::new(2);
        for _ in 0..10_000 {
            let x = rng.uniform_range(-100.0, 100.0);
            let y = rng.uniform_range(-100.0, 100.0);
            let angle = rng.uniform_range(0.0, std::f64::consts::TAU);
            let d = rng.uniform_range(0.0, 0.01);
            let (x2, y2) = (x + d * angle.cos(), y + d * angle.sin());
            let dv = (field.sample(x, y) - field.sample(x2, y2)).abs();
            assert!(dv <= 4.0 * d, "jump {dv} over distance {d}");
        }
    }
}
