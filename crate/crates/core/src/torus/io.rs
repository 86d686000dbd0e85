//! Binary field files with a JSON sidecar.
//!
//! Layout: magic `QHT1`, then `n`, `N`, scheme tag (0 = central2,
//! 1 = spectral) and component count as little-endian `u32`, then all values
//! as little-endian `f64`, component by component, each in grid index order.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Scheme, TorusError, TorusGrid};

pub const FIELD_MAGIC: &[u8; 4] = b"QHT1";
pub const FIELD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub n: usize,
    pub points: usize,
    pub scheme: Scheme,
    pub components: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    schema_version: u32,
    format: String,
    n: usize,
    points_per_axis: usize,
    scheme: Scheme,
    components: usize,
    total_points: usize,
    names: Vec<String>,
    index_order: String,
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_field(
    path: &Path,
    grid: &TorusGrid,
    names: &[&str],
    components: &[&[f64]],
) -> Result<(), TorusError> {
    if names.len() != components.len() {
        return Err(TorusError::Format("one name per component required".into()));
    }
    let mut buf = Vec::with_capacity(20 + 8 * grid.len() * components.len());
    buf.extend_from_slice(FIELD_MAGIC);
    for v in [grid.n(), grid.points(), grid.scheme().tag() as usize, components.len()] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for c in components {
        if c.len() != grid.len() {
            return Err(TorusError::Length {
                expected: grid.len(),
                found: c.len(),
            });
        }
        for v in c.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    let sidecar = Sidecar {
        schema_version: FIELD_SCHEMA_VERSION,
        format: "QHT1".into(),
        n: grid.n(),
        points_per_axis: grid.points(),
        scheme: grid.scheme(),
        components: components.len(),
        total_points: grid.len(),
        names: names.iter().map(|s| s.to_string()).collect(),
        index_order: "row-major over axes x0_1..x0_n, x1_1..x1_n, x2_*, x3_*; first axis slowest"
            .into(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| TorusError::Format(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile, TorusError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 20 || &bytes[..4] != FIELD_MAGIC {
        return Err(TorusError::Format("missing QHT1 header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (n, points, tag, ncomp) = (word(0), word(1), word(2), word(3));
    let scheme = Scheme::from_tag(tag as u32)
        .ok_or_else(|| TorusError::Format(format!("unknown scheme tag {tag}")))?;
    let grid = TorusGrid::new(n, points, scheme)?;
    let expected = 20 + 8 * grid.len() * ncomp;
    if bytes.len() != expected {
        return Err(TorusError::Format(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[20..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FieldFile {
        n,
        points,
        scheme,
        components: values.chunks(grid.len()).map(|c| c.to_vec()).collect(),
    })
}
