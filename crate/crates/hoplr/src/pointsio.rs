//! Point-set output.
//!
//! CSV: a header `h,x1,...,xs`, then one row per point. Coordinates are
//! either reals in shortest round-trip form or the exact integer numerators.
//!
//! Binary: four little-endian `u64` header words `b, m, n, s`, then the
//! numerators point by point, also little-endian `u64`.

use std::io::{Read, Write};

use anyhow::{ensure, Context, Result};
use hoplr_core::gfpoly::PrimeBase;
use hoplr_core::pointgen::PointSet;

pub fn write_csv<W: Write>(points: &PointSet, numerators: bool, mut out: W) -> Result<()> {
    let s = points.dim();
    let mut header = String::from("h");
    for j in 1..=s {
        header.push_str(&format!(",x{j}"));
    }
    writeln!(out, "{header}")?;
    let mut line = String::new();
    for h in 0..points.len() {
        line.clear();
        line.push_str(&h.to_string());
        for j in 0..s {
            line.push(',');
            if numerators {
                line.push_str(&points.point(h)[j].to_string());
            } else {
                line.push_str(&points.coord_f64(h, j).to_string());
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn write_bin<W: Write>(points: &PointSet, mut out: W) -> Result<()> {
    let header = [
        u64::from(points.base().get()),
        u64::from(points.m()),
        u64::from(points.precision()),
        points.dim() as u64,
    ];
    for w in header.iter().chain(points.numerators()) {
        out.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_bin<R: Read>(mut input: R) -> Result<PointSet> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    ensure!(bytes.len() % 8 == 0 && bytes.len() >= 32, "truncated point file");
    let words: Vec<u64> = bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let base = PrimeBase::new(u32::try_from(words[0]).context("base too large")?)?;
    let m = u32::try_from(words[1]).context("m too large")?;
    let n = u32::try_from(words[2]).context("n too large")?;
    let s = usize::try_from(words[3]).context("s too large")?;
    Ok(PointSet::new(base, m, n, s, words[4..].to_vec())?)
}
