//! Token-count comparisons between PCG and its emissions.

use std::io;

use pcg_core::{count_tokens, print_pcg, Graph};
use serde::Serialize;

use crate::{to_blender_python, to_json, TranspileError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub name: String,
    pub pcg_tokens: usize,
    pub blender_python_tokens: usize,
    pub json_tokens: usize,
    pub blender_python_ratio: f64,
    pub json_ratio: f64,
}

/// Counts tokens of the canonical PCG text and of each emission.
pub fn compactness_report(name: &str, graph: &Graph) -> Result<CompactnessReport, TranspileError> {
    let pcg = count_tokens(&print_pcg(graph));
    let blender = count_tokens(&to_blender_python(graph)?);
    let json = count_tokens(&to_json(graph));
    let ratio = |n: usize| n as f64 / pcg.max(1) as f64;
    Ok(CompactnessReport {
        name: name.to_string(),
        pcg_tokens: pcg,
        blender_python_tokens: blender,
        json_tokens: json,
        blender_python_ratio: ratio(blender),
        json_ratio: ratio(json),
    })
}

pub fn write_csv<W: io::Write>(out: W, reports: &[CompactnessReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
