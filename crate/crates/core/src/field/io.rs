//! Flat binary container and CSV export for scalar fields.
//!
//! Container layout, all little-endian:
//!   u64 n, u64 m, f64 period, then m^(2n) f64 values row-major
//! (last axis fastest). Densities reuse the same container.

use super::{FieldError, PeriodicField};
use crate::grid::GridSpec;
use std::io::{Read, Write};
use std::path::Path;

pub fn write_container<W: Write>(
    w: &mut W,
    grid: &GridSpec,
    values: &[f64],
) -> Result<(), FieldError> {
    debug_assert_eq!(values.len(), grid.nodes());
    w.write_all(&(grid.complex_dim() as u64).to_le_bytes())?;
    w.write_all(&(grid.samples_per_axis() as u64).to_le_bytes())?;
    w.write_all(&grid.period().to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_container<R: Read>(r: &mut R) -> Result<(GridSpec, Vec<f64>), FieldError> {
    let mut u = [0u8; 8];
    r.read_exact(&mut u)?;
    let n = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let m = u64::from_le_bytes(u) as usize;
    r.read_exact(&mut u)?;
    let period = f64::from_le_bytes(u);
    let grid = GridSpec::new(n, m, period)?;
    let mut values = vec![0.0f64; grid.nodes()];
    let mut buf = [0u8; 8];
    for v in &mut values {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    // trailing bytes mean the header lied about the size
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok((grid, values)),
        _ => Err(FieldError::BadContainer(
            "trailing bytes after declared node count".into(),
        )),
    }
}

pub fn save_field(path: &Path, field: &PeriodicField) -> Result<(), FieldError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_container(&mut file, field.grid(), field.values())
}

pub fn load_field(path: &Path) -> Result<PeriodicField, FieldError> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let (grid, values) = read_container(&mut file)?;
    PeriodicField::new(grid, values)
}

/// Coordinate columns plus the node value, one row per node.
pub fn write_csv<W: Write>(
    w: &mut W,
    grid: &GridSpec,
    values: &[f64],
) -> Result<(), FieldError> {
    for a in 0..grid.axes() {
        write!(w, "c{a},")?;
    }
    writeln!(w, "value")?;
    let h = grid.h();
    let mut it = grid.iter_nodes();
    while let Some((idx, multi)) = it.next_node() {
        for &c in multi {
            write!(w, "{:.17e},", c as f64 * h)?;
        }
        writeln!(w, "{:.17e}", values[idx])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn container_roundtrip_is_bit_exact() {
        let g = GridSpec::new(1, 8, 2.0).unwrap();
        let phi = PeriodicField::from_fn(g, |x| (PI * x[0]).sin() + 0.1 * x[1]);
        let mut buf = Vec::new();
        write_container(&mut buf, phi.grid(), phi.values()).unwrap();
        assert_eq!(buf.len(), 24 + 8 * g.nodes());
        let (grid, values) = read_container(&mut buf.as_slice()).unwrap();
        assert_eq!(grid, g);
        assert_eq!(values, phi.values());
    }

    #[test]
    fn truncated_container_is_rejected() {
        let g = GridSpec::unit(1, 4).unwrap();
        let phi = PeriodicField::zeros(g);
        let mut buf = Vec::new();
        write_container(&mut buf, phi.grid(), phi.values()).unwrap();
        buf.pop();
        assert!(read_container(&mut buf.as_slice()).is_err());
        buf.push(0);
        buf.push(0);
        assert!(read_container(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_has_header_and_node_rows() {
        let g = GridSpec::unit(1, 4).unwrap();
        let phi = PeriodicField::constant(g, 1.5);
        let mut buf = Vec::new();
        write_csv(&mut buf, phi.grid(), phi.values()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("c0,c1,value"));
        assert_eq!(lines.count(), g.nodes());
    }
}
