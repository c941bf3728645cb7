//! CBC runs from resolved parameters.

use anyhow::{bail, ensure, Result};
use hoplr_core::cbc::{cbc_fast_with_kernel, cbc_naive, Budget, CbcKernel, CbcOptions, LatticeRule};
use hoplr_core::convolve::ConvStrategy;
use hoplr_core::gfpoly::{find_generator, find_irreducible, ExpTable, Modulus, Poly, PrimeBase};
use hoplr_core::walsh::{KernelRoute, Smoothness};
use serde::{Deserialize, Serialize};

use crate::parallel::kernel_table;
use crate::rulefile::{WeightsField, TIE_BREAK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Fast,
}

/// Everything that determines the constructed rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    pub b: u32,
    pub m: u32,
    pub alpha: u32,
    pub s: usize,
    pub p: u64,
    pub weights: WeightsField,
    pub algorithm: Algorithm,
    pub tie_break: String,
}

/// `auto` picks the smallest-code irreducible of degree `n`; otherwise the
/// code must be irreducible of degree exactly `n`.
pub fn resolve_modulus(base: PrimeBase, n: u32, p: Option<u64>) -> Result<Modulus> {
    let md = match p {
        None => find_irreducible(n, base)?,
        Some(code) => Modulus::with_degree(Poly::from_code(code), base, n)?,
    };
    ensure!(md.is_irreducible(), "p = {} is reducible", md.poly().code());
    Ok(md)
}

pub fn construct(params: &ConstructParams, budget: Budget, threads: usize) -> Result<LatticeRule> {
    ensure!(params.s >= 1, "s must be ≥ 1");
    if params.tie_break != TIE_BREAK {
        bail!("unknown tie_break {:?}", params.tie_break);
    }
    let base = PrimeBase::new(params.b)?;
    let n = params
        .alpha
        .checked_mul(params.m)
        .ok_or_else(|| anyhow::anyhow!("alpha * m overflows"))?;
    let md = resolve_modulus(base, n, Some(params.p))?;
    let weights = params.weights.to_sequence()?;
    match params.algorithm {
        Algorithm::Naive => {
            let options = CbcOptions {
                budget,
                ..CbcOptions::default()
            };
            Ok(cbc_naive(params.s, params.m, params.alpha, &md, &weights, &options)?)
        }
        Algorithm::Fast => {
            let field = u128::from(md.field_size());
            if field > budget.fast_field {
                bail!(
                    "fast CBC needs b^n = {field} table entries, over the budget of {} (set HOPLR_BUDGET to raise it)",
                    budget.fast_field
                );
            }
            let alpha = Smoothness::new(params.alpha)?;
            let exp = ExpTable::new(&md, find_generator(&md))?;
            let table = kernel_table(&md, &exp, alpha, KernelRoute::Auto, threads)?;
            let kernel = CbcKernel::new(&md, exp, table, ConvStrategy::Auto)?;
            Ok(cbc_fast_with_kernel(
                params.s,
                params.m,
                params.alpha,
                &md,
                &weights,
                &kernel,
            )?)
        }
    }
}
