//! Compile rate, geometric similarity and the ULIP export harness.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pcg_core::geom::export_obj;
use pcg_core::geom::math::V3;
use pcg_core::{evaluate, Bindings, EvalError, Mesh};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::response::{extract_graph, ResponseError};

pub const SAMPLE_COUNT: usize = 2048;
pub const SAMPLE_SEED: u64 = 0x5eed_2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Extracts and evaluates a response at its defaults.
pub fn compile_response(response: &str) -> Result<Mesh, CompileError> {
    let graph = extract_graph(response)?;
    Ok(evaluate(&graph, &Bindings::new())?)
}

/// Fraction of responses that compile; 0 for an empty list.
pub fn compile_rate<S: AsRef<str>>(responses: &[S]) -> f64 {
    if responses.is_empty() {
        return 0.0;
    }
    let ok = responses
        .iter()
        .filter(|r| compile_response(r.as_ref()).is_ok())
        .count();
    ok as f64 / responses.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("no reference meshes given")]
    EmptyReferenceSet,
}

/// Centers the bounding box at the origin and scales its longest side to 1.
pub fn unit_normalize(mesh: &Mesh) -> Mesh {
    let Some((lo, hi)) = mesh.bbox() else {
        return mesh.clone();
    };
    let center = [0, 1, 2].map(|k| 0.5 * (lo[k] + hi[k]));
    let longest = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let s = if longest > 0.0 { 1.0 / longest } else { 1.0 };
    mesh.map_vertices(|v| [0, 1, 2].map(|k| (v[k] - center[k]) * s))
}

/// Area-weighted uniform surface samples. Empty for meshes without area.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Vec<V3> {
    let areas: Vec<f64> = (0..mesh.triangles.len()).map(|i| mesh.triangle_area(i)).collect();
    let Ok(pick) = WeightedIndex::new(&areas) else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let [a, b, c] = mesh.triangle(pick.sample(&mut rng));
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            [0, 1, 2].map(|k| a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k]))
        })
        .collect()
}

fn mean_nearest(from: &[V3], to: &[V3]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            to.iter()
                .map(|q| {
                    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / from.len() as f64
}

/// Symmetric Chamfer distance: the mean of both mean nearest-neighbor
/// distances.
pub fn chamfer_distance(a: &[V3], b: &[V3]) -> f64 {
    0.5 * (mean_nearest(a, b) + mean_nearest(b, a))
}

/// `exp(-chamfer)` between unit-normalized samples of `mesh` and its closest
/// reference. Meshes without surface area score 0.
pub fn similarity_measure(mesh: &Mesh, references: &[Mesh]) -> Result<f64, SimilarityError> {
    if references.is_empty() {
        return Err(SimilarityError::EmptyReferenceSet);
    }
    let ours = sample_surface(&unit_normalize(mesh), SAMPLE_COUNT, SAMPLE_SEED);
    let mut best: f64 = 0.0;
    for r in references {
        let theirs = sample_surface(&unit_normalize(r), SAMPLE_COUNT, SAMPLE_SEED);
        if ours.is_empty() || theirs.is_empty() {
            continue;
        }
        best = best.max((-chamfer_distance(&ours, &theirs)).exp());
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub compile_rate: f64,
    pub similarity: Option<f64>,
    /// Mean seconds per LLM call.
    pub latency_s: f64,
}

#[derive(Serialize)]
struct ManifestLine<'a> {
    id: String,
    prompt: &'a str,
    obj: String,
}

/// Writes `<id>.obj` per item and a `manifest.jsonl` of (prompt, OBJ file)
/// rows for an external ULIP scorer. Returns the manifest path.
pub fn export_ulip_pairs(out_dir: &Path, items: &[(String, Mesh)]) -> io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let manifest_path = out_dir.join("manifest.jsonl");
    let mut manifest = io::BufWriter::new(fs::File::create(&manifest_path)?);
    for (i, (prompt, mesh)) in items.iter().enumerate() {
        let id = format!("{i:05}");
        let obj = format!("{id}.obj");
        fs::write(out_dir.join(&obj), export_obj(mesh))?;
        let line = ManifestLine { id, prompt, obj };
        serde_json::to_writer(&mut manifest, &line)?;
        manifest.write_all(b"\n")?;
    }
    manifest.flush()?;
    Ok(manifest_path)
}
