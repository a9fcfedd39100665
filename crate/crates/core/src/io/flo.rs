//! Middlebury `.flo` optical-flow files: f32 magic `202021.25`, i32 width,
//! i32 height, then interleaved f32 `(u, v)` per pixel, row-major, all
//! little-endian.

use std::path::Path;

use super::IoError;
use crate::camera_est::FlowField;

pub const FLO_MAGIC: f32 = 202021.25;

pub fn parse_flo(bytes: &[u8]) -> Result<FlowField, IoError> {
    if bytes.len() < 12 {
        return Err(IoError::Truncated(".flo header needs 12 bytes".into()));
    }
    let f32_at = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let i32_at = |i: usize| i32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    if f32_at(0) != FLO_MAGIC {
        return Err(IoError::Format(format!("bad .flo magic {}", f32_at(0))));
    }
    let (w, h) = (i32_at(4), i32_at(8));
    if w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16 {
        return Err(IoError::Format(format!("bad .flo size {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let need = 12 + w * h * 8;
    if bytes.len() != need {
        return Err(IoError::Truncated(format!(
            ".flo of {w}x{h} needs {need} bytes, found {}",
            bytes.len()
        )));
    }
    let data = (0..w * h)
        .map(|i| [f32_at(12 + 8 * i) as f64, f32_at(16 + 8 * i) as f64])
        .collect();
    Ok(FlowField::new(w, h, data)?)
}

pub fn read_flo(path: impl AsRef<Path>) -> Result<FlowField, IoError> {
    parse_flo(&std::fs::read(path)?)
}

/// Serializes the field; components are stored as f32.
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + flow.data.len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for [u, v] in &flow.data {
        out.extend_from_slice(&(*u as f32).to_le_bytes());
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn write_flo(path: impl AsRef<Path>, flow: &FlowField) -> Result<(), IoError> {
    std::fs::write(path, encode_flo(flow))?;
    Ok(())
}
