//! Binary mesh frame for streaming to viewers.
//!
//! Little-endian layout: `u32` vertex count, `u32` triangle count, then
//! `3 * vcount` `f32` coordinates and `3 * tcount` `u32` indices.

use thiserror::Error;

use super::mesh::Mesh;

pub fn encode_frame(mesh: &Mesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 12 * (mesh.vertices.len() + mesh.triangles.len()));
    out.extend_from_slice(&(mesh.vertices.len() as u32).to_le_bytes());
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for v in &mesh.vertices {
        for &c in v {
            out.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    for t in &mesh.triangles {
        for &i in t {
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame is {0} bytes, shorter than its header")]
    Truncated(usize),
    #[error("frame declares {expected} bytes but has {actual}")]
    Length { expected: usize, actual: usize },
    #[error("triangle {0} indexes past the vertex array")]
    Index(usize),
}

/// Decoded frame with `f32` precision widened back to `f64`. Part tags are
/// not carried and come back as 0.
pub fn decode_frame(bytes: &[u8]) -> Result<Mesh, FrameError> {
    if bytes.len() < 8 {
        return Err(FrameError::Truncated(bytes.len()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
    let (vc, tc) = (word(0) as usize, word(1) as usize);
    let expected = 8 + 12 * vc + 12 * tc;
    if bytes.len() != expected {
        return Err(FrameError::Length {
            expected,
            actual: bytes.len(),
        });
    }
    let vertices = (0..vc)
        .map(|i| {
            let c = |k: usize| f32::from_bits(word(2 + 3 * i + k)) as f64;
            [c(0), c(1), c(2)]
        })
        .collect();
    let base = 2 + 3 * vc;
    let mut triangles = Vec::with_capacity(tc);
    for t in 0..tc {
        let tri = [word(base + 3 * t), word(base + 3 * t + 1), word(base + 3 * t + 2)];
        if tri.iter().any(|&i| i as usize >= vc) {
            return Err(FrameError::Index(t));
        }
        triangles.push(tri);
    }
    Ok(Mesh::new(vertices, triangles, 0))
}
