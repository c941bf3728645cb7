//! Kernel tables filled by several threads.
//!
//! Every entry is a pure function of its exponent, so the table does not
//! depend on the thread count.

use anyhow::Result;
use hoplr_core::gfpoly::{ExpTable, Modulus, Poly};
use hoplr_core::walsh::{KernelEvaluator, KernelRoute, KernelTable, Smoothness};

pub fn kernel_values(
    modulus: &Modulus,
    exp: &ExpTable,
    alpha: Smoothness,
    route: KernelRoute,
    threads: usize,
) -> Result<(Vec<f64>, f64)> {
    let eval = KernelEvaluator::new(modulus.base(), modulus.degree(), alpha, route)?;
    let n = modulus.degree();
    let powers = exp.powers();
    let mut values = vec![0.0; powers.len()];
    let chunk = powers.len().div_ceil(threads.max(1)).max(1);
    std::thread::scope(|scope| {
        for (dst, src) in values.chunks_mut(chunk).zip(powers.chunks(chunk)) {
            let eval = &eval;
            scope.spawn(move || {
                for (d, &w) in dst.iter_mut().zip(src) {
                    *d = eval.eval(modulus.v_n(Poly::from_code(u64::from(w)), n));
                }
            });
        }
    });
    Ok((values, eval.omega_zero()))
}

pub fn kernel_table(
    modulus: &Modulus,
    exp: &ExpTable,
    alpha: Smoothness,
    route: KernelRoute,
    threads: usize,
) -> Result<KernelTable> {
    let (values, omega_zero) = kernel_values(modulus, exp, alpha, route, threads)?;
    Ok(KernelTable::from_values(values, omega_zero))
}
