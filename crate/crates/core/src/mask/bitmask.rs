use crate::error::{Error, Result};

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

/// `H x W` boolean raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// All-background mask. Both dimensions must be positive.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::dim(format!("mask dimensions {height}x{width}")));
        }
        Ok(Self {
            height,
            width,
            bits: vec![false; height * width],
        })
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        let mut m = Self::new(height, width)?;
        if bits.len() != height * width {
            return Err(Error::dim(format!(
                "{} bits for a {height}x{width} mask",
                bits.len()
            )));
        }
        m.bits = bits;
        Ok(m)
    }

    /// Parses rows of `#` (set) and `.` (clear); handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let h = rows.len();
        let w = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::dim("ragged ascii mask"));
        }
        let bits = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| b == b'#'))
            .collect();
        Self::from_bits(h, w, bits)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels as `(x, y)` in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let mut it = self.iter_set();
        let (x, y) = it.next()?;
        let mut b = BoundingBox {
            x0: x,
            y0: y,
            x1: x,
            y1: y,
        };
        for (x, y) in it {
            b.x0 = b.x0.min(x);
            b.x1 = b.x1.max(x);
            b.y1 = y;
        }
        Some(b)
    }

    pub fn fill_rect(&mut self, b: BoundingBox) {
        for y in b.y0..=b.y1.min(self.height - 1) {
            for x in b.x0..=b.x1.min(self.width - 1) {
                self.set(x, y, true);
            }
        }
    }

    /// Pixelwise implication `self => other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.same_shape(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::dim("mask union shape mismatch"));
        }
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// True when the set pixels form one solid axis-aligned rectangle (or none).
    pub fn is_solid_rectangle(&self) -> bool {
        match self.bounding_box() {
            None => true,
            Some(b) => self.count() == (b.x1 - b.x0 + 1) * (b.y1 - b.y0 + 1),
        }
    }

    fn same_shape(&self, other: &BinaryMask) -> bool {
        self.height == other.height && self.width == other.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_and_bbox() {
        let m = BinaryMask::from_ascii(&["....", ".#..", "..#.", "...."]).unwrap();
        assert_eq!(m.count(), 2);
        assert_eq!(
            m.bounding_box(),
            Some(BoundingBox {
                x0: 1,
                y0: 1,
                x1: 2,
                y1: 2
            })
        );
        assert!(!m.is_solid_rectangle());
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(BinaryMask::new(0, 3).is_err());
        assert!(BinaryMask::from_bits(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn empty_mask_has_no_bbox() {
        let m = BinaryMask::new(3, 3).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.bounding_box(), None);
        assert!(m.is_solid_rectangle());
    }
}
