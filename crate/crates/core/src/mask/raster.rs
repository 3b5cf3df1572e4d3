use crate::error::{Error, Result};

use super::{BinaryMask, Contour, Point};

/// Fills closed contours with the even-odd rule, sampling at pixel centers.
///
/// A center is set when it lies on any edge, or when a ray cast from it
/// towards `+x` crosses the contours an odd number of times. Crossings use the
/// half-open rule `(y0 > y) != (y1 > y)`, so vertices and horizontal edges are
/// counted consistently. Scanlines evaluate exactly this predicate; see
/// [`point_in_contours`] for the per-point form.
pub fn rasterize(contours: &[Contour], height: usize, width: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(height, width)?;
    if let Some(c) = contours.iter().find(|c| !c.is_closed()) {
        return Err(Error::Contour(format!(
            "cannot fill an open contour of {} points",
            c.len()
        )));
    }
    let edges: Vec<(Point, Point)> = contours.iter().flat_map(Contour::edges).collect();

    let mut crossings = Vec::new();
    for y in 0..height {
        let yf = y as f64;
        crossings.clear();
        crossings.extend(edges.iter().filter_map(|&(p, q)| crossing_x(p, q, yf)));
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            // x is inside when #{c > x} is odd, i.e. pair[0] <= x < pair[1].
            let lo = pair[0].ceil().max(0.0);
            let hi = pair[1].ceil().min(width as f64);
            let mut x = lo;
            while x < hi {
                mask.set(x as usize, y, true);
                x += 1.0;
            }
        }
    }

    for &(p, q) in &edges {
        mark_edge_centers(&mut mask, p, q);
    }
    Ok(mask)
}

/// The same predicate as [`rasterize`], for a single point.
pub fn point_in_contours(contours: &[Contour], x: f64, y: f64) -> bool {
    let mut inside = false;
    for (p, q) in contours.iter().flat_map(Contour::edges) {
        if on_segment(p, q, x, y) {
            return true;
        }
        if let Some(cx) = crossing_x(p, q, y) {
            if cx > x {
                inside = !inside;
            }
        }
    }
    inside
}

fn crossing_x(p: Point, q: Point, y: f64) -> Option<f64> {
    if (p.y > y) != (q.y > y) {
        Some(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y))
    } else {
        None
    }
}

fn on_segment(p: Point, q: Point, x: f64, y: f64) -> bool {
    let cross = (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x);
    cross == 0.0 && x >= p.x.min(q.x) && x <= p.x.max(q.x) && y >= p.y.min(q.y) && y <= p.y.max(q.y)
}

fn mark_edge_centers(mask: &mut BinaryMask, p: Point, q: Point) {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let y_lo = p.y.min(q.y).ceil().max(0.0);
    let y_hi = p.y.max(q.y).floor().min(h - 1.0);
    let x_lo = p.x.min(q.x).ceil().max(0.0);
    let x_hi = p.x.max(q.x).floor().min(w - 1.0);
    if y_lo > y_hi || x_lo > x_hi {
        return;
    }
    // Walk the shorter axis of the bounding box and test the nearest centers.
    let horizontalish = (q.x - p.x).abs() >= (q.y - p.y).abs();
    if horizontalish {
        let mut x = x_lo;
        while x <= x_hi {
            let y = if q.x == p.x {
                p.y
            } else {
                p.y + (x - p.x) * (q.y - p.y) / (q.x - p.x)
            };
            try_mark(mask, p, q, x, y.round());
            x += 1.0;
        }
    } else {
        let mut y = y_lo;
        while y <= y_hi {
            let x = p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y);
            try_mark(mask, p, q, x.round(), y);
            y += 1.0;
        }
    }
}

fn try_mark(mask: &mut BinaryMask, p: Point, q: Point, x: f64, y: f64) {
    if x >= 0.0
        && y >= 0.0
        && x < mask.width() as f64
        && y < mask.height() as f64
        && on_segment(p, q, x, y)
    {
        mask.set(x as usize, y as usize, true);
    }
}
