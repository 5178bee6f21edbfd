use serde::{Deserialize, Serialize};

use super::math::{cross, dot, norm, sub, V3};

/// Indexed triangle mesh. `part_tags` holds one provenance label per
/// triangle: the index of the graph node that produced it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<V3>,
    pub triangles: Vec<[u32; 3]>,
    pub part_tags: Vec<u32>,
}

impl Mesh {
    pub fn empty() -> Mesh {
        Mesh::default()
    }

    pub fn new(vertices: Vec<V3>, triangles: Vec<[u32; 3]>, tag: u32) -> Mesh {
        let part_tags = vec![tag; triangles.len()];
        Mesh {
            vertices,
            triangles,
            part_tags,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty() && self.vertices.is_empty()
    }

    pub fn retag(mut self, tag: u32) -> Mesh {
        self.part_tags.iter_mut().for_each(|t| *t = tag);
        self
    }

    /// Checks index bounds, tag alignment and degenerate triangles.
    pub fn check(&self) -> Result<(), String> {
        if self.part_tags.len() != self.triangles.len() {
            return Err(format!(
                "{} tags for {} triangles",
                self.part_tags.len(),
                self.triangles.len()
            ));
        }
        let n = self.vertices.len() as u32;
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(format!("triangle {i} indexes past {n} vertices"));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(format!("triangle {i} repeats a vertex"));
            }
        }
        Ok(())
    }

    /// Concatenation with index offsetting; no welding.
    pub fn join<'a>(parts: impl IntoIterator<Item = &'a Mesh>) -> Mesh {
        let mut out = Mesh::empty();
        for m in parts {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles.extend(
                m.triangles
                    .iter()
                    .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
            );
            out.part_tags.extend_from_slice(&m.part_tags);
        }
        out
    }

    pub fn map_vertices(&self, f: impl Fn(V3) -> V3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
            part_tags: self.part_tags.clone(),
        }
    }

    pub fn triangle(&self, i: usize) -> [V3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Divergence-theorem volume; positive for closed outward-wound meshes.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.triangle(i);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn bbox(&self) -> Option<(V3, V3)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }

    /// Sub-mesh of the triangles whose tag satisfies `keep`, with unused
    /// vertices dropped.
    pub fn filter_tags(&self, keep: impl Fn(u32) -> bool) -> Mesh {
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut out = Mesh::empty();
        for (t, &tag) in self.triangles.iter().zip(&self.part_tags) {
            if !keep(tag) {
                continue;
            }
            let mut tri = [0u32; 3];
            for (k, &v) in t.iter().enumerate() {
                let slot = &mut remap[v as usize];
                if *slot == u32::MAX {
                    *slot = out.vertices.len() as u32;
                    out.vertices.push(self.vertices[v as usize]);
                }
                tri[k] = *slot;
            }
            out.triangles.push(tri);
            out.part_tags.push(tag);
        }
        out
    }

    /// Every directed edge is matched by exactly one opposite edge.
    pub fn is_watertight(&self) -> bool {
        use std::collections::HashMap;
        let mut edges: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        edges
            .iter()
            .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }
}

/// Polyline, open or closed. Closed curves do not repeat the first point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<V3>,
    pub closed: bool,
}

impl Curve {
    pub fn closed(points: Vec<V3>) -> Curve {
        Curve {
            points,
            closed: true,
        }
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        let segs = if self.closed { n } else { n.saturating_sub(1) };
        (0..segs)
            .map(|i| norm(sub(self.points[(i + 1) % n], self.points[i])))
            .sum()
    }

    /// Shoelace area of the projection on the xy plane.
    pub fn signed_area_xy(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
    }
}
