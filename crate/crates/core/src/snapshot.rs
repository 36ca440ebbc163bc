//! Flat binary snapshot format for field fixtures.
//!
//! Layout (little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "FSNP"
//! 4       4     u32 format version (1)
//! 8       4     u32 dim (2 or 3)
//! 12      4     u32 n (samples per axis)
//! 16      8     f64 half_length
//! 24      4     u32 component count (1 for scalar, dim for vector)
//! 28      ...   component-major, row-major f64 samples
//! ```

use crate::error::{CoreError, Result};
use crate::field::{Grid, ScalarField, VectorField};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"FSNP";
const VERSION: u32 = 1;

fn write_header(out: &mut impl Write, grid: &Grid, ncomp: u32) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&grid.half_length().to_le_bytes())?;
    out.write_all(&ncomp.to_le_bytes())?;
    Ok(())
}

fn write_samples(out: &mut impl Write, values: &[f64]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

fn read_header(data: &[u8]) -> Result<(Grid, u32, usize)> {
    if data.len() < 28 {
        return Err(CoreError::SnapshotFormat("truncated header".into()));
    }
    if &data[0..4] != MAGIC {
        return Err(CoreError::SnapshotFormat("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(data[o..o + 4].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(CoreError::SnapshotFormat(format!(
            "unsupported version {}",
            u32_at(4)
        )));
    }
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let half_length = f64::from_le_bytes(data[16..24].try_into().unwrap());
    let ncomp = u32_at(24);
    let grid = Grid::new(dim, n, half_length)
        .map_err(|e| CoreError::SnapshotFormat(format!("bad grid in header: {e}")))?;
    Ok((grid, ncomp, 28))
}

fn read_samples(data: &[u8], offset: usize, count: usize) -> Result<Vec<f64>> {
    let need = offset + count * 8;
    if data.len() < need {
        return Err(CoreError::SnapshotFormat("truncated samples".into()));
    }
    Ok((0..count)
        .map(|i| {
            let o = offset + i * 8;
            f64::from_le_bytes(data[o..o + 8].try_into().unwrap())
        })
        .collect())
}

pub fn save_scalar(f: &ScalarField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CoreError::SnapshotIo(e.to_string()))?;
    let mut out = std::io::BufWriter::new(file);
    write_header(&mut out, f.grid(), 1)
        .and_then(|_| write_samples(&mut out, f.values()))
        .map_err(|e| CoreError::SnapshotIo(e.to_string()))
}

pub fn save_vector(v: &VectorField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CoreError::SnapshotIo(e.to_string()))?;
    let mut out = std::io::BufWriter::new(file);
    write_header(&mut out, v.grid(), v.grid().dim() as u32)
        .map_err(|e| CoreError::SnapshotIo(e.to_string()))?;
    for a in 0..v.grid().dim() {
        write_samples(&mut out, v.component(a)).map_err(|e| CoreError::SnapshotIo(e.to_string()))?;
    }
    Ok(())
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| CoreError::SnapshotIo(e.to_string()))?;
    Ok(data)
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    let data = read_all(path)?;
    let (grid, ncomp, offset) = read_header(&data)?;
    if ncomp != 1 {
        return Err(CoreError::SnapshotFormat(format!(
            "expected 1 component, found {ncomp}"
        )));
    }
    ScalarField::new(grid, read_samples(&data, offset, grid.node_count())?)
}

pub fn load_vector(path: &Path) -> Result<VectorField> {
    let data = read_all(path)?;
    let (grid, ncomp, offset) = read_header(&data)?;
    if ncomp as usize != grid.dim() {
        return Err(CoreError::SnapshotFormat(format!(
            "expected {} components, found {ncomp}",
            grid.dim()
        )));
    }
    let nodes = grid.node_count();
    let comps = (0..grid.dim())
        .map(|a| read_samples(&data, offset + a * nodes * 8, nodes))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(grid, comps)
}
