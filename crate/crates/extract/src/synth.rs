//! Synthetic part hierarchies for tests and benchmarks.

use pcg_core::geom::math::{column, euler_to_matrix, V3};
use rand::Rng;

use crate::hierarchy::{Obb, PartHierarchy, PartNode};

const LABELS: [&str; 10] = [
    "leg", "seat", "back", "arm", "shelf", "door", "panel", "rail", "base", "top",
];

/// A chair: four legs, a seat, a back and two armrests.
pub fn chair() -> PartHierarchy {
    let leg = |x: f64, y: f64| PartNode::leaf("leg", Obb::axis_aligned([x, y, 0.225], [0.05, 0.05, 0.45]));
    PartHierarchy::new(PartNode::group(
        "chair",
        vec![
            leg(-0.2, -0.2),
            leg(0.2, -0.2),
            leg(-0.2, 0.2),
            leg(0.2, 0.2),
            PartNode::leaf("seat", Obb::axis_aligned([0.0, 0.0, 0.475], [0.5, 0.5, 0.05])),
            PartNode::leaf("back", Obb::axis_aligned([0.0, 0.225, 0.75], [0.5, 0.05, 0.5])),
            PartNode::leaf("armrest", Obb::axis_aligned([-0.25, 0.0, 0.65], [0.05, 0.4, 0.05])),
            PartNode::leaf("armrest", Obb::axis_aligned([0.25, 0.0, 0.65], [0.05, 0.4, 0.05])),
        ],
    ))
}

/// Random box with sizes in [0.05, 2] and, if `rotated`, a random frame.
pub fn random_box<R: Rng>(rng: &mut R, rotated: bool) -> Obb {
    let center = [0; 3].map(|_| rng.gen_range(-3.0..3.0));
    let size = [0; 3].map(|_| rng.gen_range(0.05..2.0));
    if !rotated {
        return Obb::axis_aligned(center, size);
    }
    let pi = std::f64::consts::PI;
    let r = euler_to_matrix([
        rng.gen_range(-pi..pi),
        rng.gen_range(-pi / 2.0..pi / 2.0),
        rng.gen_range(-pi..pi),
    ]);
    Obb {
        center,
        size,
        dir1: column(&r, 0),
        dir2: column(&r, 1),
    }
}

/// Random hierarchy with up to `max_leaves` leaves and depth up to 3.
/// Labels repeat so that same-label merging is exercised.
pub fn random_hierarchy<R: Rng>(rng: &mut R, max_leaves: usize, rotated: bool) -> PartHierarchy {
    let mut budget = rng.gen_range(1..=max_leaves.max(1));
    let root = random_group(rng, "object", 0, &mut budget, rotated);
    PartHierarchy::new(root)
}

fn random_group<R: Rng>(rng: &mut R, label: &str, depth: usize, budget: &mut usize, rotated: bool) -> PartNode {
    let mut children = Vec::new();
    let n = rng.gen_range(1..=4);
    for _ in 0..n {
        if *budget == 0 {
            break;
        }
        let label = LABELS[rng.gen_range(0..LABELS.len())];
        if depth < 2 && *budget > 1 && rng.gen_bool(0.3) {
            children.push(random_group(rng, label, depth + 1, budget, rotated));
        } else {
            *budget -= 1;
            children.push(PartNode::leaf(label, random_box(rng, rotated)));
        }
    }
    if children.is_empty() {
        return PartNode::leaf(label, random_box(rng, rotated));
    }
    PartNode::group(label, children)
}

/// Corners of `obb` as 8 vertices, shuffled.
pub fn shuffled_corners<R: Rng>(rng: &mut R, obb: &Obb) -> Vec<V3> {
    use rand::seq::SliceRandom;
    let mut c = obb.corners().to_vec();
    c.shuffle(rng);
    c
}
