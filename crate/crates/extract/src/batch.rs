//! File-level extraction: graph files, sidecars and directory batches.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pcg_core::geom::math::M3;
use pcg_core::{print_pcg, Graph};
use serde::Serialize;
use thiserror::Error;

use crate::build::{extract, ExtractError, Extraction, ExtractionConfig, PartRecord};
use crate::hierarchy::{load_hierarchy, SchemaError};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error("{path}: {source}")]
    Extract {
        path: PathBuf,
        #[source]
        source: ExtractError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BatchError + '_ {
    move |source| BatchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the canonical text of `graph`, replacing `path` atomically.
pub fn save_graph(graph: &Graph, path: &Path) -> io::Result<()> {
    write_atomic(path, print_pcg(graph).as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    source: String,
    parts: &'a [PartRecord],
    groups: Vec<&'a str>,
    flagged_parts: usize,
}

fn meta_json(source: &Path, e: &Extraction) -> String {
    let meta = Meta {
        source: source.display().to_string(),
        parts: &e.parts,
        groups: e.groups.iter().map(|g| g.label.as_str()).collect(),
        flagged_parts: e.parts.iter().filter(|p| p.flags.any()).count(),
    };
    serde_json::to_string_pretty(&meta).expect("meta serializes")
}

/// Extracts one hierarchy file into `<out>/<stem>.pcg` and
/// `<out>/<stem>.meta.json`. Returns the graph path.
pub fn extract_file(input: &Path, out_dir: &Path, config: &ExtractionConfig) -> Result<PathBuf, BatchError> {
    let text = fs::read_to_string(input).map_err(io_err(input))?;
    let h = load_hierarchy(&text).map_err(|source| BatchError::Schema {
        path: input.to_path_buf(),
        source,
    })?;
    let e = extract(&h, config).map_err(|source| BatchError::Extract {
        path: input.to_path_buf(),
        source,
    })?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let graph_path = out_dir.join(format!("{stem}.pcg"));
    save_graph(&e.graph, &graph_path).map_err(io_err(&graph_path))?;
    let meta_path = out_dir.join(format!("{stem}.meta.json"));
    write_atomic(&meta_path, meta_json(input, &e).as_bytes()).map_err(io_err(&meta_path))?;
    for p in e.parts.iter().filter(|p| p.flags.any()) {
        log::warn!("{}: part {} flagged {:?}", input.display(), p.full_label.join("/"), p.flags);
    }
    Ok(graph_path)
}

/// Extracts a file, or every `*.json` file directly inside a directory in
/// name order. Failures are collected per file; the rest still run.
pub fn extract_path(
    input: &Path,
    out_dir: &Path,
    config: &ExtractionConfig,
) -> Result<Vec<Result<PathBuf, BatchError>>, BatchError> {
    if input.is_file() {
        return Ok(vec![extract_file(input, out_dir, config)]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(io_err(input))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && !p.to_string_lossy().ends_with(".meta.json")
        })
        .collect();
    files.sort();
    Ok(files.iter().map(|f| extract_file(f, out_dir, config)).collect())
}

/// Parses `none`, `xyz`, or a signed axis permutation such as `x-zy`
/// (new x = old x, new y = -old z, new z = old y). The result must be a
/// proper rotation.
pub fn parse_coord_rot(spec: &str) -> Result<M3, String> {
    let s = spec.trim().to_ascii_lowercase();
    if s == "none" || s == "xyz" || s.is_empty() {
        return Ok(pcg_core::geom::math::IDENTITY);
    }
    let mut rows = Vec::new();
    let mut sign = 1.0;
    for c in s.chars() {
        match c {
            '-' => sign = -sign,
            '+' => {}
            'x' | 'y' | 'z' => {
                let mut row = [0.0; 3];
                row[(c as u8 - b'x') as usize] = sign;
                rows.push(row);
                sign = 1.0;
            }
            _ => return Err(format!("unexpected `{c}` in coordinate rotation `{spec}`")),
        }
    }
    if rows.len() != 3 {
        return Err(format!("coordinate rotation `{spec}` must name three axes"));
    }
    let m: M3 = [rows[0], rows[1], rows[2]];
    let used: Vec<usize> = m.iter().map(|r| r.iter().position(|&v| v != 0.0).unwrap()).collect();
    if (0..3).any(|k| !used.contains(&k)) {
        return Err(format!("coordinate rotation `{spec}` repeats an axis"));
    }
    if pcg_core::geom::math::det(&m) != 1.0 {
        return Err(format!("coordinate rotation `{spec}` is a reflection"));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coord_rot_forms() {
        assert_eq!(parse_coord_rot("none").unwrap(), pcg_core::geom::math::IDENTITY);
        let m = parse_coord_rot("x-zy").unwrap();
        assert_eq!(m, [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
        assert!(parse_coord_rot("xzy").is_err());
        assert!(parse_coord_rot("xxy").is_err());
        assert!(parse_coord_rot("xq").is_err());
    }
}
