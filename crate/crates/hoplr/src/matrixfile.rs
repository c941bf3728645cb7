//! Generating-matrix files.
//!
//! A header line `b n m count`, then `count` blocks of `n` rows with `m`
//! digits each. Whitespace, including blank lines between blocks, is free.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hoplr_core::gfpoly::PrimeBase;
use hoplr_core::pointgen::GenMatrix;

pub fn parse_matrices(text: &str) -> Result<Vec<GenMatrix>> {
    let mut tokens = text.split_whitespace();
    let mut header = [0u64; 4];
    for (slot, name) in header.iter_mut().zip(["b", "n", "m", "count"]) {
        let t = tokens.next().with_context(|| format!("missing header field {name}"))?;
        *slot = t.parse().with_context(|| format!("bad header field {name} = {t:?}"))?;
    }
    let [b, n, m, count] = header;
    let base = PrimeBase::new(u32::try_from(b).context("base too large")?)?;
    ensure!(n >= 1 && m >= 1, "matrices must have at least one row and column");
    let (n, m, count) = (n as usize, m as usize, count as usize);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut data = Vec::with_capacity(n * m);
        for _ in 0..n * m {
            let t = tokens.next().with_context(|| format!("matrix {k} is truncated"))?;
            let d: u32 = t.parse().with_context(|| format!("bad digit {t:?} in matrix {k}"))?;
            data.push(d);
        }
        out.push(GenMatrix::new(n, m, base, data).with_context(|| format!("matrix {k}"))?);
    }
    if let Some(t) = tokens.next() {
        bail!("unexpected trailing data starting at {t:?}");
    }
    Ok(out)
}

pub fn format_matrices(matrices: &[GenMatrix]) -> Result<String> {
    let first = matrices.first().context("no matrices to write")?;
    let (n, m, base) = (first.rows(), first.cols(), first.base());
    ensure!(
        matrices
            .iter()
            .all(|c| c.rows() == n && c.cols() == m && c.base() == base),
        "matrices differ in shape or base"
    );
    let mut s = String::new();
    writeln!(s, "{} {} {} {}", base.get(), n, m, matrices.len())?;
    for (k, c) in matrices.iter().enumerate() {
        if k > 0 {
            s.push('\n');
        }
        for r in 0..n {
            let row: Vec<String> = c.row(r).iter().map(u32::to_string).collect();
            writeln!(s, "{}", row.join(" "))?;
        }
    }
    Ok(s)
}

pub fn read_matrices(path: &Path) -> Result<Vec<GenMatrix>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrices(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_matrices(path: &Path, matrices: &[GenMatrix]) -> Result<()> {
    std::fs::write(path, format_matrices(matrices)?).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_example() {
        let text = "2 2 2 2\n0 1\n1 1\n\n1 0\n0 1\n";
        let ms = parse_matrices(text).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].data(), &[0, 1, 1, 1]);
        assert_eq!(ms[1], GenMatrix::identity(2, PrimeBase::TWO));
        assert_eq!(format_matrices(&ms).unwrap(), text);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrices("2 2 2").is_err());
        assert!(parse_matrices("2 1 2 1\n0").is_err());
        assert!(parse_matrices("2 1 1 1\n2").is_err());
        assert!(parse_matrices("4 1 1 1\n0").is_err());
        assert!(parse_matrices("2 1 1 1\n0 1").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..5, m in 1usize..5, count in 1usize..4, seed in any::<u64>()) {
            let base = PrimeBase::new(3).unwrap();
            let mut x = seed;
            let ms: Vec<GenMatrix> = (0..count)
                .map(|_| {
                    let data = (0..n * m)
                        .map(|_| {
                            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                            ((x >> 33) % 3) as u32
                        })
                        .collect();
                    GenMatrix::new(n, m, base, data).unwrap()
                })
                .collect();
            let back = parse_matrices(&format_matrices(&ms).unwrap()).unwrap();
            prop_assert_eq!(back, ms);
        }
    }
}
