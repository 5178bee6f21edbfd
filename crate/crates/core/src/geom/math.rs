//! Small fixed-size vector helpers. Rotations use the XYZ extrinsic Euler
//! convention in radians: `R = Rz(rz) * Ry(ry) * Rx(rx)`.

pub type V3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

#[inline]
pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn mul(a: V3, b: V3) -> V3 {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2]]
}

#[inline]
pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: V3) -> Option<V3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

pub fn dist(a: V3, b: V3) -> f64 {
    norm(sub(a, b))
}

pub fn mat_vec(m: &M3, v: V3) -> V3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(m: &M3) -> M3 {
    let mut t = [[0.0; 3]; 3];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[j][i] = v;
        }
    }
    t
}

pub fn det(m: &M3) -> f64 {
    dot(m[0], cross(m[1], m[2]))
}

pub const IDENTITY: M3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Matrix whose columns are the given vectors.
pub fn from_columns(c0: V3, c1: V3, c2: V3) -> M3 {
    [
        [c0[0], c1[0], c2[0]],
        [c0[1], c1[1], c2[1]],
        [c0[2], c1[2], c2[2]],
    ]
}

pub fn column(m: &M3, j: usize) -> V3 {
    [m[0][j], m[1][j], m[2][j]]
}

pub fn euler_to_matrix(r: V3) -> M3 {
    let (sx, cx) = r[0].sin_cos();
    let (sy, cy) = r[1].sin_cos();
    let (sz, cz) = r[2].sin_cos();
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ]
}

/// Inverse of [`euler_to_matrix`] for a proper rotation. At gimbal lock the
/// x angle is fixed to zero.
pub fn matrix_to_euler(m: &M3) -> V3 {
    let sy = (-m[2][0]).clamp(-1.0, 1.0);
    let ry = sy.asin();
    if sy.abs() < 1.0 - 1e-12 {
        let rx = m[2][1].atan2(m[2][2]);
        let rz = m[1][0].atan2(m[0][0]);
        [rx, ry, rz]
    } else {
        let rz = (-m[0][1]).atan2(m[1][1]);
        [0.0, ry, rz]
    }
}

/// Applies scale, then rotation, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub linear: M3,
    pub translation: V3,
}

impl Affine {
    pub fn from_trs(t: V3, r: V3, s: V3) -> Affine {
        let rot = euler_to_matrix(r);
        let mut linear = rot;
        for row in linear.iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= s[j];
            }
        }
        Affine {
            linear,
            translation: t,
        }
    }

    pub fn apply(&self, v: V3) -> V3 {
        add(mat_vec(&self.linear, v), self.translation)
    }

    /// `self` after `inner`.
    pub fn compose(&self, inner: &Affine) -> Affine {
        Affine {
            linear: mat_mul(&self.linear, &inner.linear),
            translation: self.apply(inner.translation),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rx(a: f64) -> M3 {
        let (s, c) = a.sin_cos();
        [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    }
    fn ry(a: f64) -> M3 {
        let (s, c) = a.sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    }
    fn rz(a: f64) -> M3 {
        let (s, c) = a.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn euler_matches_elementary_product() {
        let r = [0.3, -1.1, 2.4];
        let expected = mat_mul(&rz(r[2]), &mat_mul(&ry(r[1]), &rx(r[0])));
        let got = euler_to_matrix(r);
        for i in 0..3 {
            for j in 0..3 {
                assert!((got[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn euler_round_trip() {
        for r in [[0.3, -1.1, 2.4], [0.0, 0.0, 0.0], [-3.0, 1.5, -0.2], [1.0, 1.5707963267948966, 0.5]] {
            let m = euler_to_matrix(r);
            let back = euler_to_matrix(matrix_to_euler(&m));
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i][j] - back[i][j]).abs() < 1e-9, "{r:?}");
                }
            }
        }
    }
}
