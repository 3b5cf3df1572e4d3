//! Binary PGM (P5) masks.
//!
//! Written files are canonical: `P5\n<W> <H>\n255\n` followed by one byte per
//! pixel, 255 for foreground and 0 for background, with no comments. The
//! reader also accepts comments, arbitrary whitespace and any `maxval` up to
//! 255; any non-zero sample is foreground.

use crate::error::{Error, Result};

use super::BinaryMask;

pub fn write_pgm(mask: &BinaryMask) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", mask.width(), mask.height());
    let mut out = Vec::with_capacity(header.len() + mask.bits().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn read_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.get(..2) != Some(b"P5".as_slice()) {
        return Err(bad("missing P5 magic"));
    }
    cur.pos = 2;
    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    let maxval = cur.header_number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(bad(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(bad("no whitespace after maxval")),
    }
    let payload = &bytes[cur.pos..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| bad("image dimensions overflow"))?;
    if payload.len() != expected {
        return Err(bad(format!(
            "expected {expected} raster bytes, found {}",
            payload.len()
        )));
    }
    BinaryMask::from_bits(height, width, payload.iter().map(|&v| v != 0).collect())
        .map_err(|e| bad(e.to_string()))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format {
        what: "PGM",
        msg: msg.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<usize> {
        let before = self.pos;
        self.skip_space_and_comments();
        if self.pos == before {
            return Err(bad(format!("expected whitespace before {what}")));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("invalid {what}")))
    }
}
