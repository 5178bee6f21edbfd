//! Semantics of the geometry node kinds, independent of any graph.

use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use super::math::{add, cross, dot, norm, normalize, scale, sub, Affine, V3};
use super::mesh::{Curve, Mesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("{0}")]
    Numeric(String),
    #[error("curve is not closed")]
    OpenCurve,
    #[error("curve encloses no area")]
    DegenerateCurve,
    #[error("curve is not planar")]
    NonPlanarCurve,
    #[error("curve intersects itself")]
    SelfIntersecting,
    #[error("mesh boundary is not a single loop")]
    OpenBoundaryAmbiguous,
}

/// Upper bound on segment, ring and sample counts.
pub const MAX_RESOLUTION: i64 = 4096;

fn resolution(name: &str, n: i64, min: i64) -> Result<u32, GeomError> {
    if (min..=MAX_RESOLUTION).contains(&n) {
        Ok(n as u32)
    } else {
        Err(GeomError::Numeric(format!(
            "{name} must be in {min}..{MAX_RESOLUTION}, got {n}"
        )))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, GeomError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(GeomError::Numeric(format!("{name} must be positive, got {x}")))
    }
}

pub fn cube(size: V3, tag: u32) -> Result<Mesh, GeomError> {
    for (axis, s) in ["x", "y", "z"].iter().zip(size) {
        positive(&format!("size.{axis}"), s)?;
    }
    let h = scale(size, 0.5);
    let mut vertices = Vec::with_capacity(8);
    // bit 0 -> x, bit 1 -> y, bit 2 -> z
    for i in 0..8 {
        let pick = |bit: u32, k: usize| if i & (1 << bit) != 0 { h[k] } else { -h[k] };
        vertices.push([pick(0, 0), pick(1, 1), pick(2, 2)]);
    }
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let triangles = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Ok(Mesh::new(vertices, triangles, tag))
}

pub fn cylinder(radius: f64, depth: f64, segments: i64, tag: u32) -> Result<Mesh, GeomError> {
    positive("radius", radius)?;
    positive("depth", depth)?;
    let n = resolution("segments", segments, 3)?;
    let hz = depth / 2.0;
    let mut vertices = Vec::with_capacity(2 * n as usize + 2);
    for z in [-hz, hz] {
        for k in 0..n {
            let a = 2.0 * PI * k as f64 / n as f64;
            vertices.push([radius * a.cos(), radius * a.sin(), z]);
        }
    }
    let bottom_center = 2 * n;
    let top_center = 2 * n + 1;
    vertices.push([0.0, 0.0, -hz]);
    vertices.push([0.0, 0.0, hz]);
    let mut triangles = Vec::with_capacity(4 * n as usize);
    for k in 0..n {
        let k1 = (k + 1) % n;
        let (b0, b1, t0, t1) = (k, k1, n + k, n + k1);
        triangles.push([b0, b1, t1]);
        triangles.push([b0, t1, t0]);
        triangles.push([bottom_center, b1, b0]);
        triangles.push([top_center, t0, t1]);
    }
    Ok(Mesh::new(vertices, triangles, tag))
}

pub fn sphere(radius: f64, rings: i64, segments: i64, tag: u32) -> Result<Mesh, GeomError> {
    positive("radius", radius)?;
    let rings = resolution("rings", rings, 2)?;
    let segs = resolution("segments", segments, 3)?;
    let mut vertices = vec![[0.0, 0.0, radius]];
    for i in 1..rings {
        let phi = PI * i as f64 / rings as f64;
        let (sp, cp) = phi.sin_cos();
        for k in 0..segs {
            let theta = 2.0 * PI * k as f64 / segs as f64;
            let (st, ct) = theta.sin_cos();
            vertices.push([radius * sp * ct, radius * sp * st, radius * cp]);
        }
    }
    let south = vertices.len() as u32;
    vertices.push([0.0, 0.0, -radius]);
    let ring = |i: u32, k: u32| 1 + (i - 1) * segs + (k % segs);
    let mut triangles = Vec::new();
    for k in 0..segs {
        triangles.push([0, ring(1, k), ring(1, k + 1)]);
    }
    for i in 1..rings - 1 {
        for k in 0..segs {
            let (a, b) = (ring(i, k), ring(i, k + 1));
            let (c, d) = (ring(i + 1, k), ring(i + 1, k + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    for k in 0..segs {
        triangles.push([south, ring(rings - 1, k + 1), ring(rings - 1, k)]);
    }
    Ok(Mesh::new(vertices, triangles, tag))
}

/// Counterclockwise from the (+x, +y) corner, in the z = 0 plane.
pub fn rectangle(width: f64, height: f64) -> Result<Curve, GeomError> {
    positive("width", width)?;
    positive("height", height)?;
    let (x, y) = (width / 2.0, height / 2.0);
    Ok(Curve::closed(vec![
        [x, y, 0.0],
        [-x, y, 0.0],
        [-x, -y, 0.0],
        [x, -y, 0.0],
    ]))
}

/// Replaces each corner by a tangent circular arc sampled with `count`
/// points. The tangent length is clamped to half of the shorter adjacent
/// segment, which shrinks the effective radius for large requests.
pub fn fillet(curve: &Curve, radius: f64, count: i64) -> Result<Curve, GeomError> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(GeomError::Numeric(format!(
            "fillet radius must be non-negative, got {radius}"
        )));
    }
    let count = resolution("count", count, 1)?.max(2) as usize;
    let n = curve.points.len();
    if radius == 0.0 || n < 3 {
        return Ok(curve.clone());
    }
    let mut out: Vec<V3> = Vec::with_capacity(n * count);
    let push = |p: V3, out: &mut Vec<V3>| {
        if out.last().is_none_or(|&q| norm(sub(p, q)) > 1e-12) {
            out.push(p);
        }
    };
    for i in 0..n {
        let c = curve.points[i];
        let endpoint = !curve.closed && (i == 0 || i == n - 1);
        if endpoint {
            push(c, &mut out);
            continue;
        }
        let p = curve.points[(i + n - 1) % n];
        let q = curve.points[(i + 1) % n];
        let (lp, lq) = (norm(sub(p, c)), norm(sub(q, c)));
        let (Some(u), Some(w)) = (normalize(sub(p, c)), normalize(sub(q, c))) else {
            push(c, &mut out);
            continue;
        };
        let theta = dot(u, w).clamp(-1.0, 1.0).acos();
        let half_tan = (theta / 2.0).tan();
        if theta < 1e-9 || theta > PI - 1e-9 || !half_tan.is_finite() {
            push(c, &mut out);
            continue;
        }
        let d = (radius / half_tan).min(lp.min(lq) / 2.0);
        let r = d * half_tan;
        let t1 = add(c, scale(u, d));
        let t2 = add(c, scale(w, d));
        let bis = normalize(add(u, w)).expect("non-collinear corner");
        let center = add(c, scale(bis, r / (theta / 2.0).sin()));
        let a = sub(t1, center);
        let b = sub(t2, center);
        let axis = normalize(cross(a, b)).expect("arc spans a plane");
        let a_perp = cross(axis, a);
        let sweep = PI - theta;
        for j in 0..count {
            let phi = sweep * j as f64 / (count - 1) as f64;
            let (s, co) = phi.sin_cos();
            let pt = if j == 0 {
                t1
            } else if j == count - 1 {
                t2
            } else {
                add(center, add(scale(a, co), scale(a_perp, s)))
            };
            push(pt, &mut out);
        }
    }
    if curve.closed && out.len() > 1 && norm(sub(out[0], *out.last().unwrap())) <= 1e-12 {
        out.pop();
    }
    Ok(Curve {
        points: out,
        closed: curve.closed,
    })
}

/// Newell normal (not normalized); its length is twice the polygon area.
fn newell(points: &[V3]) -> V3 {
    let n = points.len();
    let mut acc = [0.0; 3];
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc[0] += (a[1] - b[1]) * (a[2] + b[2]);
        acc[1] += (a[2] - b[2]) * (a[0] + b[0]);
        acc[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    acc
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], eps: f64) -> bool {
    let d1 = cross2(c, d, a);
    let d2 = cross2(c, d, b);
    let d3 = cross2(a, b, c);
    let d4 = cross2(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2], side: f64| {
        side.abs() <= eps
            && r[0] >= p[0].min(q[0]) - eps
            && r[0] <= p[0].max(q[0]) + eps
            && r[1] >= p[1].min(q[1]) - eps
            && r[1] <= p[1].max(q[1]) + eps
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

/// Ear-clipping triangulation of a closed planar simple polygon. Triangles
/// face along the polygon's winding normal (+z for CCW input in the xy plane).
pub fn fill(curve: &Curve, tag: u32) -> Result<Mesh, GeomError> {
    if !curve.closed {
        return Err(GeomError::OpenCurve);
    }
    let pts = &curve.points;
    let n = pts.len();
    if n < 3 {
        return Err(GeomError::DegenerateCurve);
    }
    let nrm = newell(pts);
    let Some(normal) = normalize(nrm) else {
        return Err(GeomError::DegenerateCurve);
    };
    let extent = pts
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let centroid = scale(pts.iter().fold([0.0; 3], |acc, &p| add(acc, p)), 1.0 / n as f64);
    if pts
        .iter()
        .any(|&p| dot(sub(p, centroid), normal).abs() > 1e-9 * extent)
    {
        return Err(GeomError::NonPlanarCurve);
    }
    // Orthonormal basis with e1 x e2 = normal, so the polygon is CCW in 2D.
    let helper = if normal[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize(cross(helper, normal)).expect("helper not parallel");
    let e2 = cross(normal, e1);
    let p2: Vec<[f64; 2]> = pts
        .iter()
        .map(|&p| {
            let d = sub(p, centroid);
            [dot(d, e1), dot(d, e2)]
        })
        .collect();
    let eps = 1e-12 * extent * extent;
    for i in 0..n {
        let (a, b) = (p2[i], p2[(i + 1) % n]);
        for j in i + 1..n {
            // skip adjacent edges
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(a, b, p2[j], p2[(j + 1) % n], eps) {
                return Err(GeomError::SelfIntersecting);
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let mut triangles: Vec<[u32; 3]> = Vec::with_capacity(n - 2);
    let inside = |p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        cross2(a, b, p) >= -eps && cross2(b, c, p) >= -eps && cross2(c, a, p) >= -eps
    };
    let mut start = 0;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = None;
        let mut collinear = None;
        for step in 0..m {
            let k = (start + step) % m;
            let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (p2[ia], p2[ib], p2[ic]);
            let turn = cross2(a, b, c);
            if turn <= eps {
                if turn.abs() <= eps && collinear.is_none() {
                    collinear = Some(k);
                }
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && {
                    let p = p2[j];
                    p != a && p != b && p != c && inside(p, a, b, c)
                }
            });
            if !blocked {
                clipped = Some(k);
                break;
            }
        }
        let k = clipped.or(collinear).ok_or(GeomError::SelfIntersecting)?;
        let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
        triangles.push([ia as u32, ib as u32, ic as u32]);
        idx.remove(k);
        start = k % idx.len();
    }
    triangles.push([idx[0] as u32, idx[1] as u32, idx[2] as u32]);
    Ok(Mesh::new(pts.clone(), triangles, tag))
}

/// Prism from a planar cap: the cap, its copy moved by `offset` along the
/// cap normal, and side walls along the single boundary loop.
pub fn extrude(cap: &Mesh, offset: f64, tag: u32) -> Result<Mesh, GeomError> {
    if !offset.is_finite() {
        return Err(GeomError::Numeric(format!("offset {offset} is not finite")));
    }
    let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
    for t in &cap.triangles {
        for k in 0..3 {
            *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
        }
    }
    let mut next: HashMap<u32, u32> = HashMap::new();
    let mut boundary = 0;
    for (&(a, b), &count) in &directed {
        if count != 1 {
            return Err(GeomError::OpenBoundaryAmbiguous);
        }
        if !directed.contains_key(&(b, a)) {
            if next.insert(a, b).is_some() {
                return Err(GeomError::OpenBoundaryAmbiguous);
            }
            boundary += 1;
        }
    }
    if boundary < 3 {
        return Err(GeomError::OpenBoundaryAmbiguous);
    }
    let start = *next.keys().min().expect("non-empty boundary");
    let mut loop_edges = Vec::with_capacity(boundary);
    let mut v = start;
    loop {
        let w = *next.get(&v).ok_or(GeomError::OpenBoundaryAmbiguous)?;
        loop_edges.push((v, w));
        v = w;
        if v == start || loop_edges.len() > boundary {
            break;
        }
    }
    if v != start || loop_edges.len() != boundary {
        return Err(GeomError::OpenBoundaryAmbiguous);
    }

    let area_normal = (0..cap.triangles.len()).fold([0.0; 3], |acc, i| {
        let [a, b, c] = cap.triangle(i);
        add(acc, cross(sub(b, a), sub(c, a)))
    });
    let normal = normalize(area_normal).ok_or(GeomError::DegenerateCurve)?;
    let shift = scale(normal, offset);
    let n = cap.vertices.len() as u32;
    let mut vertices = cap.vertices.clone();
    vertices.extend(cap.vertices.iter().map(|&p| add(p, shift)));
    let mut triangles = Vec::with_capacity(2 * cap.triangles.len() + 2 * boundary);
    for t in &cap.triangles {
        triangles.push([t[0], t[2], t[1]]);
    }
    for t in &cap.triangles {
        triangles.push([t[0] + n, t[1] + n, t[2] + n]);
    }
    for &(a, b) in &loop_edges {
        triangles.push([a, b, b + n]);
        triangles.push([a, b + n, a + n]);
    }
    if offset < 0.0 {
        for t in &mut triangles {
            t.swap(1, 2);
        }
    }
    Ok(Mesh::new(vertices, triangles, tag))
}

/// Scale, then XYZ Euler rotation, then translation.
pub fn transform_points(points: &[V3], t: V3, r: V3, s: V3) -> Vec<V3> {
    if t == [0.0; 3] && r == [0.0; 3] && s == [1.0; 3] {
        return points.to_vec();
    }
    let affine = Affine::from_trs(t, r, s);
    points.iter().map(|&p| affine.apply(p)).collect()
}

pub fn instance_on_points(points: &Curve, instance: &Mesh) -> Mesh {
    let copies: Vec<Mesh> = points
        .points
        .iter()
        .map(|&p| instance.map_vertices(|v| add(v, p)))
        .collect();
    Mesh::join(copies.iter())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_extents_and_symmetry() {
        let m = cube([1.0, 1.0, 1.0], 0).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 12);
        let (lo, hi) = m.bbox().unwrap();
        assert_eq!(lo, [-0.5; 3]);
        assert_eq!(hi, [0.5; 3]);
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
        assert!(m.is_watertight());
        // closed under reflection across each axis
        for k in 0..3 {
            for v in &m.vertices {
                let mut r = *v;
                r[k] = -r[k];
                assert!(m.vertices.contains(&r));
            }
        }
        let wide = cube([2.0, 1.0, 1.0], 0).unwrap();
        let (lo, hi) = wide.bbox().unwrap();
        assert_eq!((lo[0], hi[0]), (-1.0, 1.0));
        assert!(cube([0.0, 1.0, 1.0], 0).is_err());
    }

    #[test]
    fn cylinder_ring_and_volume() {
        let m = cylinder(1.0, 2.0, 32, 0).unwrap();
        for v in &m.vertices[..64] {
            assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() < 1e-12);
        }
        let (lo, hi) = m.bbox().unwrap();
        assert_eq!((lo[2], hi[2]), (-1.0, 1.0));
        assert!(m.is_watertight());
        let prism = cylinder(1.0, 1.0, 3, 0).unwrap();
        assert_eq!(prism.vertices.len(), 8);
        assert_eq!(prism.triangles.len(), 12); // 6 side + 3 fan per cap
        let (r, d) = (0.7, 1.3);
        let fine = cylinder(r, d, 64, 0).unwrap();
        let exact = PI * r * r * d;
        assert!((fine.signed_volume() - exact).abs() / exact < 0.02);
        assert!(cylinder(1.0, 1.0, 2, 0).is_err());
    }

    #[test]
    fn sphere_radius_and_area() {
        let m = sphere(1.0, 16, 32, 0).unwrap();
        for v in &m.vertices {
            assert!((norm(*v) - 1.0).abs() < 1e-9);
        }
        assert!(m.signed_volume() > 0.0);
        assert!(m.is_watertight());
        let exact = 4.0 * PI;
        assert!((m.surface_area() - exact).abs() / exact < 0.02);
        let half = sphere(0.5, 16, 32, 0).unwrap();
        let (lo, hi) = half.bbox().unwrap();
        assert!((lo[2] + 0.5).abs() < 1e-12 && (hi[2] - 0.5).abs() < 1e-12);
        assert!(lo[0] >= -0.5 && hi[0] <= 0.5);
    }

    #[test]
    fn rectangle_is_ccw_from_positive_corner() {
        let c = rectangle(2.0, 1.0).unwrap();
        assert_eq!(c.points[0], [1.0, 0.5, 0.0]);
        assert!(c.signed_area_xy() > 0.0);
        assert!((c.signed_area_xy() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fillet_zero_radius_is_identity() {
        let c = rectangle(2.0, 2.0).unwrap();
        assert_eq!(fillet(&c, 0.0, 20).unwrap(), c);
    }

    #[test]
    fn fillet_arc_points_lie_on_circle() {
        let c = rectangle(2.0, 2.0).unwrap();
        let f = fillet(&c, 0.25, 20).unwrap();
        assert_eq!(f.points.len(), 80);
        let centers = [[0.75, 0.75, 0.0], [-0.75, 0.75, 0.0], [-0.75, -0.75, 0.0], [0.75, -0.75, 0.0]];
        for (corner, center) in centers.iter().enumerate() {
            for p in &f.points[corner * 20..(corner + 1) * 20] {
                assert!((norm(sub(*p, *center)) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fillet_perimeter_closed_form() {
        let r = 0.25;
        let f = fillet(&rectangle(2.0, 2.0).unwrap(), r, 64).unwrap();
        let exact = 4.0 * (2.0 - 2.0 * r) + 2.0 * PI * r;
        assert!((f.length() - exact).abs() < 1e-3);
    }

    #[test]
    fn fillet_clamps_oversized_radius() {
        let f = fillet(&rectangle(2.0, 1.0).unwrap(), 5.0, 8).unwrap();
        // tangent length clamps to 0.5 (half the short side)
        for p in &f.points {
            assert!(p[0].abs() <= 1.0 + 1e-12 && p[1].abs() <= 0.5 + 1e-12);
        }
        assert!(f.points.len() < 4 * 8);
    }

    #[test]
    fn fill_unit_square() {
        let m = fill(&rectangle(1.0, 1.0).unwrap(), 0).unwrap();
        assert_eq!(m.triangles.len(), 2);
        assert!((m.surface_area() - 1.0).abs() < 1e-12);
        for i in 0..m.triangles.len() {
            let [a, b, c] = m.triangle(i);
            assert!(cross(sub(b, a), sub(c, a))[2] > 0.0);
        }
    }

    #[test]
    fn fill_rejects_bad_input() {
        let open = Curve {
            points: vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
            closed: false,
        };
        assert_eq!(fill(&open, 0), Err(GeomError::OpenCurve));
        let bowtie = Curve::closed(vec![
            [0.0, 0.0, 0.0],
            [3.0, 1.0, 0.0],
            [3.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
        ]);
        assert_eq!(fill(&bowtie, 0), Err(GeomError::SelfIntersecting));
        let bent = Curve::closed(vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.5],
            [0.0, 1.0, 0.0],
        ]);
        assert_eq!(fill(&bent, 0), Err(GeomError::NonPlanarCurve));
    }

    #[test]
    fn extrude_unit_square_is_unit_cube() {
        let cap = fill(&rectangle(1.0, 1.0).unwrap(), 0).unwrap();
        let prism = extrude(&cap, 1.0, 1).unwrap();
        assert_eq!(prism.vertices.len(), 8);
        assert_eq!(prism.triangles.len(), 12);
        assert!(prism.is_watertight());
        assert!((prism.signed_volume() - 1.0).abs() < 1e-9);
        let down = extrude(&cap, -0.5, 1).unwrap();
        assert!((down.signed_volume() - 0.5).abs() < 1e-9);
        let (lo, _) = down.bbox().unwrap();
        assert_eq!(lo[2], -0.5);
    }

    #[test]
    fn extrude_rejects_closed_mesh() {
        let c = cube([1.0; 3], 0).unwrap();
        assert_eq!(extrude(&c, 1.0, 0), Err(GeomError::OpenBoundaryAmbiguous));
    }

    #[test]
    fn identity_transform_is_bitwise() {
        let pts = vec![[-0.0, 1.5, 2.25]];
        assert_eq!(transform_points(&pts, [0.0; 3], [0.0; 3], [1.0; 3]), pts);
    }
}
