//! Little-endian binary weight files.
//!
//! Layout: the magic bytes `MOTW`, a `u32` version, then a sequence of
//! matrices, each stored as `rows: u32`, `cols: u32` and `rows * cols` `f64`
//! values in row-major order. Matrix order is the gate (`w1`, `b1`, `w2`,
//! `b2`) followed by `wq`, `wk`, `wv`, `wo`, `ffn1`, `ffn2`, each written as
//! `W0` and then `A_i`, `B_i` for every expert in index order.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

use super::{GatingNetwork, LinearSlot, LoraExpert, MoTBlock, MoTLinear, MotConfig};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"MOTW";
pub const WEIGHTS_VERSION: u32 = 1;

pub fn write_block<W: Write>(block: &MoTBlock, mut out: W) -> Result<()> {
    out.write_all(WEIGHTS_MAGIC)?;
    out.write_all(&WEIGHTS_VERSION.to_le_bytes())?;
    let g = &block.gate;
    for m in [&g.w1, &g.b1, &g.w2, &g.b2] {
        write_matrix(&mut out, m)?;
    }
    for slot in LinearSlot::ALL {
        let lin = block.linear(slot);
        write_matrix(&mut out, &lin.w0)?;
        for e in &lin.experts {
            write_matrix(&mut out, &e.a)?;
            write_matrix(&mut out, &e.b)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a block written by [`write_block`]. Head count and fallback mode come
/// from `cfg`; every stored shape must agree with it.
pub fn read_block<R: Read>(mut input: R, cfg: &MotConfig) -> Result<MoTBlock> {
    cfg.validate()?;
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != WEIGHTS_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(&mut input)?;
    if version != WEIGHTS_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let (d, ff, r, n, h) = (
        cfg.d_model,
        cfg.ffn_hidden(),
        cfg.lora_rank,
        cfg.n_experts,
        cfg.gate_hidden,
    );
    let mut next = |shape: (usize, usize)| -> Result<Matrix> {
        let m = read_matrix(&mut input)?;
        if m.shape() != shape {
            return Err(bad(format!("expected {shape:?}, found {:?}", m.shape())));
        }
        Ok(m)
    };
    let gate = GatingNetwork::new(next((d, h))?, next((1, h))?, next((h, n))?, next((1, n))?)?;
    let shapes = [(d, d), (d, d), (d, d), (d, d), (ff, d), (d, ff)];
    let mut linears = Vec::with_capacity(6);
    for (d_out, d_in) in shapes {
        let w0 = next((d_out, d_in))?;
        let experts = (0..n)
            .map(|_| LoraExpert::new(next((d_out, r))?, next((r, d_in))?))
            .collect::<Result<Vec<_>>>()?;
        linears.push(MoTLinear::new(w0, experts)?);
    }
    let mut it = linears.into_iter();
    let mut take = || it.next().expect("six linears");
    MoTBlock::new(
        take(),
        take(),
        take(),
        take(),
        take(),
        take(),
        gate,
        cfg.n_heads,
        cfg.agr_fallback,
    )
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format {
        what: "weight file",
        msg: msg.into(),
    }
}

fn write_matrix<W: Write>(out: &mut W, m: &Matrix) -> Result<()> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| bad("dimension exceeds u32"));
    out.write_all(&dim(m.rows())?.to_le_bytes())?;
    out.write_all(&dim(m.cols())?.to_le_bytes())?;
    for v in m.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_matrix<R: Read>(input: &mut R) -> Result<Matrix> {
    let rows = read_u32(input)? as usize;
    let cols = read_u32(input)? as usize;
    let mut data = Vec::with_capacity(rows * cols);
    let mut buf = [0u8; 8];
    for _ in 0..rows * cols {
        input.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    Matrix::new(rows, cols, data)
}
