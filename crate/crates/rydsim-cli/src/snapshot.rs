//! Flat binary field snapshots with a JSON sidecar.
//!
//! `NAME.bin` holds nx·ny complex samples as little-endian (re, im) f64
//! pairs, row-major with x fastest. `NAME.json` carries the grid, the
//! propagation distance and the SHA-256 of the binary file.

use crate::config::sha256_hex;
use rydsim::nlse::{ComplexField2D, TransverseGrid};
use rydsim::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT: &str = "complex128-le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Propagation distance [μm].
    pub z: f64,
    pub step: usize,
    pub binary: String,
    pub sha256: String,
}

pub fn encode(field: &ComplexField2D) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * field.data.len());
    for z in &field.data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Binary payload and sidecar text for one snapshot named `name`.
pub fn snapshot(field: &ComplexField2D, name: &str, z: f64, step: usize) -> (Vec<u8>, String) {
    let bin = encode(field);
    let g = field.grid;
    let meta = SnapshotMeta {
        format: FORMAT.into(),
        nx: g.nx,
        ny: g.ny,
        dx: g.dx,
        dy: g.dy,
        z,
        step,
        binary: format!("{name}.bin"),
        sha256: sha256_hex(&bin),
    };
    (bin, serde_json::to_string_pretty(&meta).expect("sidecar serializes"))
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{0}`")]
    Format(String),
    #[error("checksum mismatch for {0}")]
    Checksum(String),
    #[error("{file} holds {got} bytes, expected {want}")]
    Size { file: String, got: usize, want: usize },
    #[error("grid: {0}")]
    Grid(#[from] rydsim::Error),
}

/// Reads a snapshot back from its sidecar, checking size and checksum.
pub fn read(sidecar: &Path) -> Result<(SnapshotMeta, ComplexField2D), SnapshotError> {
    let meta: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(sidecar)?)?;
    if meta.format != FORMAT {
        return Err(SnapshotError::Format(meta.format));
    }
    let path = sidecar.with_file_name(&meta.binary);
    let bin = std::fs::read(&path)?;
    let want = 16 * meta.nx * meta.ny;
    if bin.len() != want {
        return Err(SnapshotError::Size {
            file: meta.binary.clone(),
            got: bin.len(),
            want,
        });
    }
    if sha256_hex(&bin) != meta.sha256 {
        return Err(SnapshotError::Checksum(meta.binary.clone()));
    }
    let grid = TransverseGrid::new(meta.nx, meta.ny, meta.dx, meta.dy)?;
    let mut field = ComplexField2D::zeros(grid);
    field.z = meta.z;
    for (z, c) in field.data.iter_mut().zip(bin.chunks_exact(16)) {
        let re = f64::from_le_bytes(c[..8].try_into().unwrap());
        let im = f64::from_le_bytes(c[8..].try_into().unwrap());
        *z = Complex64::new(re, im);
    }
    Ok((meta, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let g = TransverseGrid::new(8, 4, 0.5, 0.25).unwrap();
        let f = ComplexField2D::from_fn(g, |x, y| Complex64::new(x, y * 1e-3));
        let (bin, json) = snapshot(&f, "field_0001", 2.5, 10);
        std::fs::write(dir.path().join("field_0001.bin"), &bin).unwrap();
        std::fs::write(dir.path().join("field_0001.json"), &json).unwrap();
        let (meta, back) = read(&dir.path().join("field_0001.json")).unwrap();
        assert_eq!(back.data, f.data);
        assert_eq!((meta.nx, meta.ny, meta.z, meta.step), (8, 4, 2.5, 10));

        let mut bad = bin.clone();
        bad[3] ^= 1;
        std::fs::write(dir.path().join("field_0001.bin"), &bad).unwrap();
        assert!(matches!(
            read(&dir.path().join("field_0001.json")),
            Err(SnapshotError::Checksum(_))
        ));
        std::fs::write(dir.path().join("field_0001.bin"), &bin[..16]).unwrap();
        assert!(matches!(
            read(&dir.path().join("field_0001.json")),
            Err(SnapshotError::Size { .. })
        ));
    }
}
