use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Polyline of sub-pixel points; closed contours wrap from last to first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point>,
    closed: bool,
}

impl Contour {
    /// Closed contour: at least three points and no repeated consecutive
    /// point (including the wrap from last to first).
    pub fn closed(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Contour(format!(
                "closed contour needs 3 points, got {}",
                points.len()
            )));
        }
        let n = points.len();
        if (0..n).any(|i| points[i] == points[(i + 1) % n]) {
            return Err(Error::Contour("consecutive duplicate points".into()));
        }
        Ok(Self {
            points,
            closed: true,
        })
    }

    pub fn open(points: Vec<Point>) -> Self {
        Self {
            points,
            closed: false,
        }
    }

    /// Displacement keeps point order and count even when clamping folds two
    /// neighbours onto the same location.
    pub(crate) fn with_points(&self, points: Vec<Point>) -> Self {
        debug_assert_eq!(points.len(), self.points.len());
        Self {
            points,
            closed: self.closed,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area; positive for the clockwise-on-screen (y down)
    /// orientation produced by [`extract_contour`].
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.points[i], self.points[(i + 1) % n]);
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            / 2.0
    }

    /// Edges as point pairs, including the closing edge for closed contours.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }
}

const NEIGHBOURS_8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Splits a mask into its 8-connected components, ordered by their first
/// pixel in raster order.
pub fn components(mask: &BinaryMask) -> Vec<BinaryMask> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for (sx, sy) in mask.iter_set() {
        if seen[sy * w + sx] {
            continue;
        }
        let mut comp = BinaryMask::new(h, w).expect("dimensions already validated");
        let mut stack = vec![(sx, sy)];
        seen[sy * w + sx] = true;
        while let Some((x, y)) = stack.pop() {
            comp.set(x, y, true);
            for (dx, dy) in NEIGHBOURS_8 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if mask.get_signed(nx, ny) {
                    let (nx, ny) = (nx as usize, ny as usize);
                    if !seen[ny * w + nx] {
                        seen[ny * w + nx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

// Directions on the corner lattice, clockwise on screen: E, S, W, N.
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Outer boundary of every 8-connected component, one closed contour each.
///
/// The boundary runs along pixel edges: vertices sit on pixel corners
/// (half-integer coordinates) and only turning corners are kept. Tracing walks
/// with the component on the right and decides each turn from the two pixels
/// ahead in the 8-neighbourhood, turning left whenever the ahead-left pixel is
/// set so diagonal joints stay connected. Holes are not traced.
pub fn extract_contour(mask: &BinaryMask) -> Vec<Contour> {
    let mut contours = Vec::new();
    for comp in components(mask) {
        let (sx, sy) = comp.iter_set().next().expect("components are non-empty");
        let points = trace_outer(&comp, sx as i64, sy as i64);
        contours.push(Contour::closed(points).expect("pixel outlines have at least four corners"));
    }
    contours
}

/// Traces from the top-left corner of the component's first raster pixel,
/// heading east along its top edge.
fn trace_outer(mask: &BinaryMask, sx: i64, sy: i64) -> Vec<Point> {
    let start = (sx, sy);
    let mut v = start;
    let mut dir = 0usize;
    let mut corners = Vec::new();
    loop {
        let (dx, dy) = DIRS[dir];
        v = (v.0 + dx, v.1 + dy);
        // Left normal of (dx, dy) with y pointing down.
        let (lx, ly) = (dy, -dx);
        let ahead_left = ((2 * v.0 + dx + lx - 1) / 2, (2 * v.1 + dy + ly - 1) / 2);
        let ahead_right = ((2 * v.0 + dx - lx - 1) / 2, (2 * v.1 + dy - ly - 1) / 2);
        let next = if mask.get_signed(ahead_left.0, ahead_left.1) {
            (dir + 3) % 4
        } else if mask.get_signed(ahead_right.0, ahead_right.1) {
            dir
        } else {
            (dir + 1) % 4
        };
        if next != dir {
            corners.push(Point::new(v.0 as f64 - 0.5, v.1 as f64 - 0.5));
        }
        dir = next;
        if v == start && dir == 0 {
            return corners;
        }
    }
}
