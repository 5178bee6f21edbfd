//! Recovery of (translation, rotation, scale) for a part.
//!
//! Translation is the centroid, the rotation comes from the principal axes
//! of the vertex covariance and the scale is the extent along each axis.
//! Axes are canonicalized so the result is deterministic: largest extent
//! first, each axis signed so its largest-magnitude component is positive,
//! and the third axis flipped if needed to make a proper rotation.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use pcg_core::geom::math::{
    add, cross, dot, euler_to_matrix, from_columns, mat_vec, matrix_to_euler, normalize, scale,
    sub, IDENTITY, M3, V3,
};
use serde::Serialize;
use thiserror::Error;

use crate::hierarchy::Obb;

/// Minimum extent given to flat parts.
pub const MIN_EXTENT: f64 = 1e-4;

/// Relative eigenvalue gap below which principal axes are considered
/// undetermined.
pub const EIGEN_GAP_TOL: f64 = 1e-9;

/// Scale, then XYZ Euler rotation (radians), then translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformTriple {
    pub translation: V3,
    pub rotation: V3,
    pub scale: V3,
}

impl TransformTriple {
    pub const IDENTITY: TransformTriple = TransformTriple {
        translation: [0.0; 3],
        rotation: [0.0; 3],
        scale: [1.0; 3],
    };

    pub fn apply(&self, p: V3) -> V3 {
        let r = euler_to_matrix(self.rotation);
        add(
            mat_vec(&r, [p[0] * self.scale[0], p[1] * self.scale[1], p[2] * self.scale[2]]),
            self.translation,
        )
    }

    /// Corners of the unit cube centered at the origin under this transform.
    pub fn box_corners(&self) -> [V3; 8] {
        let mut out = [[0.0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let unit = [0, 1, 2].map(|k| if i & (1 << k) != 0 { 0.5 } else { -0.5 });
            *c = self.apply(unit);
        }
        out
    }
}

/// Per-part quality flags recorded in the extraction sidecar.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PartFlags {
    /// Principal axes were undetermined and the identity frame was used.
    pub degenerate_pca: bool,
    /// Axes whose extent was raised to [`MIN_EXTENT`].
    pub padded_axes: [bool; 3],
}

impl PartFlags {
    pub fn any(&self) -> bool {
        self.degenerate_pca || self.padded_axes.iter().any(|&p| p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recovered {
    pub transform: TransformTriple,
    pub flags: PartFlags,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("box directions are not an orthonormal frame")]
    InvalidFrame,
    #[error("need at least one finite vertex")]
    NoVertices,
}

/// Orders axes by extent (descending, stable), fixes signs and handedness.
fn canonical_frame(mut axes: [(V3, f64); 3]) -> ([V3; 3], V3) {
    axes.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut dirs = axes.map(|(d, _)| d);
    for d in &mut dirs {
        let k = (0..3)
            .max_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()).then(j.cmp(&i)))
            .unwrap();
        if d[k] < 0.0 {
            *d = scale(*d, -1.0);
        }
    }
    if dot(cross(dirs[0], dirs[1]), dirs[2]) < 0.0 {
        dirs[2] = scale(dirs[2], -1.0);
    }
    (dirs, [axes[0].1, axes[1].1, axes[2].1])
}

fn pad(extent: V3) -> (V3, [bool; 3]) {
    let mut padded = [false; 3];
    let mut out = extent;
    for k in 0..3 {
        if out[k] < MIN_EXTENT {
            out[k] = MIN_EXTENT;
            padded[k] = true;
        }
    }
    (out, padded)
}

fn rotation_of(dirs: &[V3; 3]) -> V3 {
    let m: M3 = from_columns(dirs[0], dirs[1], dirs[2]);
    // adding 0.0 folds -0.0 into 0.0
    matrix_to_euler(&m).map(|a| a + 0.0)
}

/// Transform of an oriented box, using its own directions.
pub fn extract_transform_from_box(obb: &Obb) -> Result<Recovered, TransformError> {
    if !obb.frame_is_valid(1e-6) {
        return Err(TransformError::InvalidFrame);
    }
    // Gram-Schmidt so the rotation is orthonormal to machine precision
    let d1 = normalize(obb.dir1).ok_or(TransformError::InvalidFrame)?;
    let d2 = normalize(sub(obb.dir2, scale(d1, dot(obb.dir2, d1))))
        .ok_or(TransformError::InvalidFrame)?;
    let d3 = cross(d1, d2);
    let (dirs, size) = canonical_frame([(d1, obb.size[0]), (d2, obb.size[1]), (d3, obb.size[2])]);
    let (size, padded_axes) = pad(size);
    Ok(Recovered {
        transform: TransformTriple {
            translation: obb.center,
            rotation: rotation_of(&dirs),
            scale: size,
        },
        flags: PartFlags {
            degenerate_pca: false,
            padded_axes,
        },
    })
}

/// Transform of a vertex set from its centroid and principal axes.
///
/// The translation is the centroid moved to the middle of the projected
/// extents, so that asymmetric point sets still get a box that encloses
/// them; for symmetric sets such as box corners it equals the centroid.
pub fn extract_transform_from_vertices(vertices: &[V3]) -> Result<Recovered, TransformError> {
    let pts: Vec<V3> = vertices
        .iter()
        .copied()
        .filter(|p| p.iter().all(|x| x.is_finite()))
        .collect();
    if pts.is_empty() {
        return Err(TransformError::NoVertices);
    }
    let n = pts.len() as f64;
    let centroid = scale(pts.iter().fold([0.0; 3], |acc, &p| add(acc, p)), 1.0 / n);
    let mut cov = Matrix3::<f64>::zeros();
    for &p in &pts {
        let d = Vector3::from(sub(p, centroid));
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.map(|i| eig.eigenvalues[i]);
    let top = vals[0].abs().max(f64::MIN_POSITIVE);
    let degenerate = (vals[0] - vals[1]) <= EIGEN_GAP_TOL * top
        || ((vals[1] - vals[2]) <= EIGEN_GAP_TOL * top && vals[1] > EIGEN_GAP_TOL * top);
    let candidate: [V3; 3] = if degenerate {
        [column(&IDENTITY, 0), column(&IDENTITY, 1), column(&IDENTITY, 2)]
    } else {
        order.map(|i| {
            let c = eig.eigenvectors.column(i);
            [c[0], c[1], c[2]]
        })
    };
    let extents = |dirs: &[V3; 3]| -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &p in &pts {
            let d = sub(p, centroid);
            for k in 0..3 {
                let x = dot(d, dirs[k]);
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        (lo, hi)
    };
    let (lo, hi) = extents(&candidate);
    let spans = [0, 1, 2].map(|k| hi[k] - lo[k]);
    let (dirs, size) = if degenerate {
        // identity frame keeps x, y, z order
        (candidate, spans)
    } else {
        canonical_frame([
            (candidate[0], spans[0]),
            (candidate[1], spans[1]),
            (candidate[2], spans[2]),
        ])
    };
    let (lo, hi) = extents(&dirs);
    let mut center = centroid;
    for k in 0..3 {
        center = add(center, scale(dirs[k], 0.5 * (lo[k] + hi[k])));
    }
    let (size, padded_axes) = pad(size);
    Ok(Recovered {
        transform: TransformTriple {
            translation: center,
            rotation: if degenerate { [0.0; 3] } else { rotation_of(&dirs) },
            scale: size,
        },
        flags: PartFlags {
            degenerate_pca: degenerate,
            padded_axes,
        },
    })
}

fn column(m: &M3, j: usize) -> V3 {
    [m[0][j], m[1][j], m[2][j]]
}

/// Largest distance from a corner of `a` to its nearest corner in `b`,
/// symmetrized.
pub fn corner_set_distance(a: &[V3], b: &[V3]) -> f64 {
    let one_way = |x: &[V3], y: &[V3]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| pcg_core::geom::math::dist(*p, *q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_corners(offset: V3) -> Vec<V3> {
        (0..8)
            .map(|i| {
                let c = [0, 1, 2].map(|k| if i & (1 << k) != 0 { 0.5 } else { -0.5 });
                add(c, offset)
            })
            .collect()
    }

    #[test]
    fn unit_cube_is_identity() {
        let r = extract_transform_from_vertices(&unit_corners([0.0; 3])).unwrap();
        // all three extents tie: identity frame, flagged
        assert!(r.flags.degenerate_pca);
        assert_eq!(r.transform.translation, [0.0; 3]);
        assert_eq!(r.transform.rotation, [0.0; 3]);
        assert_eq!(r.transform.scale, [1.0; 3]);
    }

    #[test]
    fn translation_follows_centroid() {
        let r = extract_transform_from_vertices(&unit_corners([1.0, 2.0, 3.0])).unwrap();
        assert_eq!(r.transform.translation, [1.0, 2.0, 3.0]);
        assert_eq!(r.transform.scale, [1.0; 3]);
    }

    #[test]
    fn box_route_orders_axes_by_extent() {
        let obb = Obb::axis_aligned([0.0; 3], [1.0, 3.0, 2.0]);
        let r = extract_transform_from_box(&obb).unwrap();
        assert_eq!(r.transform.scale, [3.0, 2.0, 1.0]);
        let got = r.transform.box_corners();
        assert!(corner_set_distance(&got, &obb.corners()) < 1e-12);
    }

    #[test]
    fn flat_box_is_padded() {
        let obb = Obb::axis_aligned([0.0; 3], [1.0, 2.0, 0.0]);
        let r = extract_transform_from_box(&obb).unwrap();
        assert_eq!(r.flags.padded_axes, [false, false, true]);
        assert_eq!(r.transform.scale[2], MIN_EXTENT);
    }

    #[test]
    fn bad_frame_is_rejected() {
        let obb = Obb {
            center: [0.0; 3],
            size: [1.0; 3],
            dir1: [1.0, 0.0, 0.0],
            dir2: [0.5, 0.5, 0.0],
        };
        assert_eq!(extract_transform_from_box(&obb), Err(TransformError::InvalidFrame));
    }
}
