//! Flat binary snapshot format for network parameters.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u32               layer count L
//! (u32, u32) × L    per-layer (rows, cols)
//! f64 × …           per layer: rows·cols weights (row-major), then rows biases
//! ```
//!
//! Activations are not part of the byte stream; the reader is told which
//! activation stack to attach.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numcore::{Activation, Layer, Matrix, MlpParams};

pub fn write_params<W: Write>(params: &MlpParams, w: &mut W) -> Result<()> {
    let layers = params.layers();
    w.write_all(&(layers.len() as u32).to_le_bytes())?;
    for layer in layers {
        w.write_all(&(layer.out_dim() as u32).to_le_bytes())?;
        w.write_all(&(layer.in_dim() as u32).to_le_bytes())?;
    }
    for layer in layers {
        for v in layer.weight.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &layer.bias {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads one snapshot record, attaching the given activations layer by layer.
pub fn read_params<R: Read>(r: &mut R, activations: &[Activation]) -> Result<MlpParams> {
    let count = read_u32(r)? as usize;
    if count == 0 {
        return Err(Error::Snapshot("zero layer count".into()));
    }
    if activations.len() != count {
        return Err(Error::Snapshot(format!(
            "snapshot has {count} layers but {} activations were supplied",
            activations.len()
        )));
    }
    let mut dims = Vec::with_capacity(count);
    for _ in 0..count {
        let rows = read_u32(r)? as usize;
        let cols = read_u32(r)? as usize;
        if rows == 0 || cols == 0 {
            return Err(Error::Snapshot("zero-sized layer".into()));
        }
        dims.push((rows, cols));
    }
    let mut layers = Vec::with_capacity(count);
    for (i, &(rows, cols)) in dims.iter().enumerate() {
        let mut weight = vec![0.0; rows * cols];
        read_f64s(r, &mut weight)?;
        let mut bias = vec![0.0; rows];
        read_f64s(r, &mut bias)?;
        layers.push(Layer::new(
            Matrix::from_vec(rows, cols, weight)?,
            bias,
            activations[i],
        )?);
    }
    MlpParams::new(layers)
}

/// Snapshot bytes in memory, handy for byte-equality checks.
pub fn params_to_bytes(params: &MlpParams) -> Vec<u8> {
    let mut buf = Vec::new();
    write_params(params, &mut buf).expect("vec writes cannot fail");
    buf
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut b = [0u8; 8];
    for v in out {
        r.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    Ok(())
}
