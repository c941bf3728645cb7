//! Weight arguments: `geom:C`, `polydecay` or `list:FILE`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use hoplr_core::wce::WeightSequence;

/// Parses a weight argument; `list:FILE` reads whitespace-separated reals
/// relative to the working directory.
pub fn parse_weights(arg: &str) -> Result<WeightSequence> {
    parse_weights_in(arg, Path::new("."))
}

pub fn parse_weights_in(arg: &str, dir: &Path) -> Result<WeightSequence> {
    if arg == "polydecay" {
        return Ok(WeightSequence::PolyDecay);
    }
    if let Some(c) = arg.strip_prefix("geom:") {
        let c: f64 = c.parse().with_context(|| format!("bad ratio in {arg:?}"))?;
        if !(c.is_finite() && c > 0.0) {
            bail!("geometric ratio must be positive");
        }
        return Ok(WeightSequence::Geometric(c));
    }
    if let Some(file) = arg.strip_prefix("list:") {
        let path = dir.join(file);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(WeightSequence::Explicit(parse_list(&text)?));
    }
    bail!("unknown weights {arg:?}; expected geom:C, polydecay or list:FILE")
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    let w = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().with_context(|| format!("bad weight {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    if w.is_empty() {
        bail!("weight list is empty");
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kinds() {
        assert_eq!(parse_weights("geom:0.9").unwrap(), WeightSequence::Geometric(0.9));
        assert_eq!(parse_weights("polydecay").unwrap(), WeightSequence::PolyDecay);
        assert!(parse_weights("geom:-1").is_err());
        assert!(parse_weights("flat").is_err());
    }

    #[test]
    fn reads_list_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("w.txt"), "1 0.5\n0.25\n").unwrap();
        let w = parse_weights_in("list:w.txt", dir.path()).unwrap();
        assert_eq!(w, WeightSequence::Explicit(vec![1.0, 0.5, 0.25]));
        assert!(parse_list("").is_err());
    }
}
