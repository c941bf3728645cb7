//! Work limits from the environment.

use anyhow::{bail, Context, Result};
use hoplr_core::cbc::Budget;

pub const BUDGET_VAR: &str = "HOPLR_BUDGET";

/// Parses `N` or `2^K`.
pub fn parse_units(text: &str) -> Result<u128> {
    let t = text.trim();
    if let Some(exp) = t.strip_prefix("2^") {
        let k: u32 = exp.parse().with_context(|| format!("bad exponent in {t:?}"))?;
        if k > 120 {
            bail!("budget exponent {k} is too large");
        }
        return Ok(1u128 << k);
    }
    t.replace('_', "")
        .parse()
        .with_context(|| format!("bad budget {t:?}, expected an integer or 2^K"))
}

/// The default budget, with both limits replaced by `HOPLR_BUDGET` when set.
pub fn from_env() -> Result<Budget> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => Ok(Budget::uniform(
            parse_units(&v).with_context(|| format!("in {BUDGET_VAR}"))?,
        )),
        Err(std::env::VarError::NotPresent) => Ok(Budget::default()),
        Err(e) => Err(e).context(BUDGET_VAR),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse_units("1024").unwrap(), 1024);
        assert_eq!(parse_units("2^30").unwrap(), 1 << 30);
        assert_eq!(parse_units(" 1_000 ").unwrap(), 1000);
        assert!(parse_units("2^x").is_err());
        assert!(parse_units("lots").is_err());
        assert!(parse_units("2^200").is_err());
    }
}
