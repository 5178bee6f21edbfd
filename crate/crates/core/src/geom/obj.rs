//! Wavefront OBJ export and import.
//!
//! Coordinates are written with 9 significant digits. Triangles are grouped
//! as `g part_<tag>` so part tags survive a round trip.

use std::fmt::Write;

use thiserror::Error;

use super::mesh::Mesh;

pub fn export_obj(mesh: &Mesh) -> String {
    let mut out = String::with_capacity(32 * (mesh.vertices.len() + mesh.triangles.len()) + 64);
    let _ = writeln!(
        out,
        "# pcg mesh: {} vertices, {} triangles",
        mesh.vertices.len(),
        mesh.triangles.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", sig9(v[0]), sig9(v[1]), sig9(v[2]));
    }
    let mut group = None;
    for (t, &tag) in mesh.triangles.iter().zip(&mesh.part_tags) {
        if group != Some(tag) {
            let _ = writeln!(out, "g part_{tag}");
            group = Some(tag);
        }
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Shortest decimal that carries 9 significant digits of `x`.
fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{x:.8e}");
    let rounded: f64 = s.parse().expect("formatted float parses");
    let plain = format!("{rounded}");
    if plain.len() <= s.len() {
        plain
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ObjError {
    pub line: usize,
    pub message: String,
}

/// Reads `v` and `f` records; polygons are fan-triangulated. `g part_<n>`
/// groups set the tag of the faces that follow, other groups reset it to 0.
pub fn import_obj(text: &str) -> Result<Mesh, ObjError> {
    let mut mesh = Mesh::empty();
    let mut tag = 0u32;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ObjError { line, message };
        let body = raw.split('#').next().unwrap_or("");
        let mut fields = body.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>().map_err(|e| err(format!("bad coordinate `{f}`: {e}"))))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(err("vertex needs three coordinates".into()));
                }
                mesh.vertices.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let n = mesh.vertices.len() as i64;
                let idx: Vec<u32> = fields
                    .map(|f| {
                        let head = f.split('/').next().unwrap_or("");
                        let k: i64 = head
                            .parse()
                            .map_err(|_| err(format!("bad face index `{f}`")))?;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 || k >= n {
                            return Err(err(format!("face index `{f}` out of range")));
                        }
                        Ok(k as u32)
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    mesh.triangles.push([idx[0], idx[k], idx[k + 1]]);
                    mesh.part_tags.push(tag);
                }
            }
            Some("g") => {
                tag = fields
                    .next()
                    .and_then(|g| g.strip_prefix("part_"))
                    .and_then(|n| n.parse().ok())
                    .unwrap_or(0);
            }
            _ => {}
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::nodes::cube;

    #[test]
    fn cube_has_eight_vertices_and_twelve_faces() {
        let text = export_obj(&cube([1.0; 3], 0).unwrap());
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
    }

    #[test]
    fn empty_mesh_is_header_only() {
        let text = export_obj(&Mesh::empty());
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with('#'));
    }

    #[test]
    fn sig9_rounds() {
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(-2.0), "-2");
        assert_eq!(sig9(1.0e-20), "1.00000000e-20");
    }

    #[test]
    fn import_handles_slashes_negative_indices_and_quads() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\ng part_3\nf 1/1/1 2//2 -2 -1\n";
        let m = import_obj(text).unwrap();
        assert_eq!(m.triangles, vec![[0, 1, 2], [0, 2, 3]]);
        assert_eq!(m.part_tags, vec![3, 3]);
        assert!(import_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }
}
