use motmask::mask::BinaryMask;
use motmask::numerics::SeededRng;

/// Connected blob of overlapping discs with every hole filled.
pub fn simply_connected(rng: &mut SeededRng) -> BinaryMask {
    let (h, w) = (8 + rng.below(40), 8 + rng.below(40));
    let mut m = BinaryMask::new(h, w).unwrap();
    let mut centers = vec![(rng.below(w) as f64, rng.below(h) as f64)];
    for _ in 0..1 + rng.below(8) {
        let (cx, cy) = centers[rng.below(centers.len())];
        let r = rng.uniform_range(0.5, 6.0);
        for y in 0..h {
            for x in 0..w {
                if (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r {
                    m.set(x, y, true);
                }
            }
        }
        let a = rng.uniform_range(0.0, std::f64::consts::TAU);
        let step = rng.uniform_range(0.0, r);
        centers.push((
            (cx + step * a.cos()).clamp(0.0, (w - 1) as f64).round(),
            (cy + step * a.sin()).clamp(0.0, (h - 1) as f64).round(),
        ));
    }
    // Background reachable from outside through 4-neighbours; the rest are holes.
    let mut outside = vec![false; h * w];
    let mut stack: Vec<(usize, usize)> = (0..w)
        .flat_map(|x| [(x, 0), (x, h - 1)])
        .chain((0..h).flat_map(|y| [(0, y), (w - 1, y)]))
        .collect();
    while let Some((x, y)) = stack.pop() {
        if m.get(x, y) || outside[y * w + x] {
            continue;
        }
        outside[y * w + x] = true;
        if x > 0 {
            stack.push((x - 1, y));
        }
        if x + 1 < w {
            stack.push((x + 1, y));
        }
        if y > 0 {
            stack.push((x, y - 1));
        }
        if y + 1 < h {
            stack.push((x, y + 1));
        }
    }
    for y in 0..h {
        for x in 0..w {
            if !outside[y * w + x] {
                m.set(x, y, true);
            }
        }
    }
    m
}
