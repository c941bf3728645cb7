//! Worst-case errors in the weighted Walsh space.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::gfpoly::{poly_add, Modulus, Poly, PrimeBase};
use crate::pointgen::PointSet;
use crate::walsh::{omega_at_zero, r_alpha, series_partial_mass, KernelEvaluator, KernelRoute, Smoothness};
use crate::{Error, Result};

/// Product weights `gamma_1, gamma_2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSequence {
    /// `gamma_j = c^j`.
    Geometric(f64),
    /// `gamma_j = j^{-2}`.
    PolyDecay,
    Explicit(Vec<f64>),
}

impl WeightSequence {
    /// `gamma_1, ..., gamma_s`; every weight must be positive and finite.
    pub fn materialize(&self, s: usize) -> Result<Vec<f64>> {
        let w: Vec<f64> = match self {
            WeightSequence::Geometric(c) => (1..=s).map(|j| libm::pow(*c, j as f64)).collect(),
            WeightSequence::PolyDecay => (1..=s).map(|j| 1.0 / (j as f64 * j as f64)).collect(),
            WeightSequence::Explicit(v) => {
                if v.len() < s {
                    return Err(Error::LengthMismatch {
                        expected: s,
                        found: v.len(),
                    });
                }
                v[..s].to_vec()
            }
        };
        if w.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::invalid("weights must be positive and finite"));
        }
        Ok(w)
    }

    /// Short text form: `geom:C`, `polydecay` or `list`.
    pub fn describe(&self) -> String {
        match self {
            WeightSequence::Geometric(c) => alloc::format!("geom:{c}"),
            WeightSequence::PolyDecay => "polydecay".into(),
            WeightSequence::Explicit(_) => "list".into(),
        }
    }
}

/// Fixed-shape pairwise summation; the result only depends on the input order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if x.len() <= LEAF {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Per-dimension errors `e_1, ..., e_s` of the prefixes of a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct WceResult {
    pub alpha: u32,
    pub errors: Vec<f64>,
}

impl WceResult {
    /// Error of the full point set (`0` in dimension zero).
    pub fn total(&self) -> f64 {
        self.errors.last().copied().unwrap_or(0.0)
    }
}

/// Errors of all prefixes `(x_1), (x_1, x_2), ...` by the product formula
/// `e = -1 + b^{-m} sum_h prod_j (1 + gamma_j omega_alpha(x_{h,j}))`.
///
/// Each point keeps `prod - 1` directly to avoid cancelling against the `-1`.
pub fn wce_prefix_errors(points: &PointSet, alpha: Smoothness, weights: &[f64]) -> Result<WceResult> {
    let s = points.dim();
    if weights.len() < s {
        return Err(Error::LengthMismatch {
            expected: s,
            found: weights.len(),
        });
    }
    let eval = KernelEvaluator::new(points.base(), points.precision().max(1), alpha, KernelRoute::Auto)?;
    let count = points.len();
    let mut excess = vec![0.0f64; count];
    let mut errors = Vec::with_capacity(s);
    for (j, &g) in weights.iter().enumerate().take(s) {
        for (h, t) in excess.iter_mut().enumerate() {
            let f = g * eval.eval(points.point(h)[j]);
            *t += f + *t * f;
        }
        errors.push(pairwise_sum(&excess) / count as f64);
    }
    Ok(WceResult {
        alpha: alpha.get(),
        errors,
    })
}

/// Worst-case error of the whole point set.
pub fn wce_product(points: &PointSet, alpha: Smoothness, weights: &[f64]) -> Result<f64> {
    Ok(wce_prefix_errors(points, alpha, weights)?.total())
}

/// A truncated dual sum and a bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// Largest enumeration [`wce_dual_bruteforce`] accepts.
pub const DUAL_BUDGET: u128 = 1 << 28;

/// `sum r_alpha(gamma, k)` over nonzero `k` with all `k_j < b^K` in the dual
/// polynomial lattice: `sum_j tr_n(k_j)(X) q_j(X) = a(X) (mod p)` with
/// `deg a < n - m`, `tr_n` keeping the digits `kappa_0..kappa_{n-1}`.
///
/// The frequencies are grouped by their residue mod `b^n` (the dual test only
/// sees that residue), then every residue tuple is tested.
pub fn wce_dual_bruteforce(
    q: &[Poly],
    modulus: &Modulus,
    m: u32,
    alpha: Smoothness,
    weights: &[f64],
    digits: u32,
) -> Result<DualSum> {
    let base = modulus.base();
    let n = modulus.degree();
    let s = q.len();
    if weights.len() < s {
        return Err(Error::LengthMismatch {
            expected: s,
            found: weights.len(),
        });
    }
    if m > n || digits < n {
        return Err(Error::invalid("need m <= n <= K"));
    }
    let bn = modulus.field_size();
    let top = base.pow(digits).ok_or(Error::Overflow("b^K"))?;
    let estimate = u128::from(bn).pow(s as u32) + u128::from(top) * s as u128;
    if estimate > DUAL_BUDGET {
        return Err(Error::OverBudget {
            what: "dual lattice enumeration",
            estimate,
            budget: DUAL_BUDGET,
        });
    }
    if q.iter().any(|qj| qj.is_zero() || qj.code() >= bn) {
        return Err(Error::invalid("generating polynomials must be nonzero residues"));
    }
    // mass[j][t] = sum over k = t mod b^n of rho_j(k), rho_j(0) = 1
    let mass: Vec<Vec<f64>> = weights[..s]
        .iter()
        .map(|&g| {
            let mut row = vec![0.0; bn as usize];
            row[0] = 1.0;
            for k in 1..top {
                row[(k % bn) as usize] += g * r_alpha(k, alpha, base);
            }
            row
        })
        .collect();
    let images: Vec<Vec<u64>> = q
        .iter()
        .map(|&qj| (0..bn).map(|t| modulus.mulmod(Poly::from_code(t), qj).code()).collect())
        .collect();
    let limit = base.pow(n - m).ok_or(Error::Overflow("b^(n-m)"))?;
    let mut total = 0.0;
    dual_recurse(&mass, &images, base, limit, 0, Poly::ZERO, 1.0, &mut total);
    let full: f64 = weights[..s]
        .iter()
        .map(|g| 1.0 + g * omega_at_zero(base, alpha))
        .product();
    let kept: f64 = weights[..s]
        .iter()
        .map(|g| 1.0 + g * series_partial_mass(alpha, base, digits))
        .product();
    Ok(DualSum {
        value: total - 1.0,
        tail_bound: (full - kept).max(0.0),
    })
}

#[allow(clippy::too_many_arguments)]
fn dual_recurse(
    mass: &[Vec<f64>],
    images: &[Vec<u64>],
    base: PrimeBase,
    limit: u64,
    j: usize,
    acc: Poly,
    weight: f64,
    total: &mut f64,
) {
    if j == mass.len() {
        if acc.code() < limit {
            *total += weight;
        }
        return;
    }
    for (t, &w) in mass[j].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let next = poly_add(acc, Poly::from_code(images[j][t]), base);
        dual_recurse(mass, images, base, limit, j + 1, next, weight * w, total);
    }
}

/// The constant `C_{b,alpha,tau}` of the CBC error bound.
pub fn bound_constant(base: PrimeBase, alpha: Smoothness, tau: f64) -> Result<f64> {
    let a = f64::from(alpha.get());
    if !(tau >= 1.0 && tau < a) {
        return Err(Error::invalid("tau must satisfy 1 <= tau < alpha"));
    }
    let b = f64::from(base.get());
    let bt = libm::pow(b, 1.0 / tau);
    let prod: f64 = (1..alpha.get())
        .map(|i| 1.0 / (libm::pow(b, f64::from(i) / tau) - 1.0))
        .product();
    let lead = libm::pow(b - 1.0, a) / (libm::pow(b, a / tau) - b) * prod;
    let extra = if tau == 1.0 {
        a - 1.0
    } else {
        (b - 1.0) * (libm::pow(b - 1.0, a - 1.0) - libm::pow(bt - 1.0, a - 1.0))
            / ((b - bt) * libm::pow(bt - 1.0, a - 1.0))
    };
    Ok(lead + extra)
}

/// `b^{-min(tau m, n)} prod_{j <= d} (1 + 3 gamma_j^{1/tau} C_{b,alpha,tau})^tau`,
/// with `d = weights.len()`.
pub fn wce_bound(base: PrimeBase, alpha: Smoothness, tau: f64, m: u32, n: u32, weights: &[f64]) -> Result<f64> {
    let c = bound_constant(base, alpha, tau)?;
    let b = f64::from(base.get());
    let lead = libm::pow(b, -(tau * f64::from(m)).min(f64::from(n)));
    Ok(weights.iter().fold(lead, |acc, &g| {
        acc * libm::pow(1.0 + 3.0 * libm::pow(g, 1.0 / tau) * c, tau)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfpoly::find_irreducible;
    use crate::pointgen::polynomial_lattice_points;
    use proptest::prelude::*;

    const B2: PrimeBase = PrimeBase::TWO;

    fn al(a: u32) -> Smoothness {
        Smoothness::new(a).unwrap()
    }

    #[test]
    fn weights() {
        let g = WeightSequence::Geometric(0.9).materialize(3).unwrap();
        assert!((g[0] - 0.9).abs() < 1e-15 && (g[2] - 0.729).abs() < 1e-15);
        assert_eq!(WeightSequence::PolyDecay.materialize(2).unwrap(), vec![1.0, 0.25]);
        assert!(WeightSequence::Explicit(vec![1.0]).materialize(2).is_err());
        assert!(WeightSequence::Explicit(vec![1.0, -1.0]).materialize(2).is_err());
    }

    #[test]
    fn pairwise_matches_plain_sum_on_integers() {
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn one_dimensional_example() {
        let m = Modulus::new(Poly::from_code(7), B2).unwrap();
        // point sets {0, 1/4}, {0, 3/4}, {0, 1/2}
        let want = [(1u64, 0.9375), (2, 0.5), (3, 0.625)];
        for (q, e) in want {
            let ps = polynomial_lattice_points(&m, 1, &[Poly::from_code(q)]).unwrap();
            assert!((wce_product(&ps, al(2), &[1.0]).unwrap() - e).abs() < 1e-15, "q = {q}");
        }
    }

    #[test]
    fn empty_dimension_is_zero() {
        let ps = PointSet::new(B2, 2, 4, 0, vec![]).unwrap();
        assert_eq!(wce_product(&ps, al(2), &[]).unwrap(), 0.0);
    }

    #[test]
    fn bound_constant_example() {
        assert!((bound_constant(B2, al(2), 1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(bound_constant(B2, al(2), 2.0).is_err());
        assert!(bound_constant(B2, al(2), 0.5).is_err());
        let lead = wce_bound(B2, al(2), 1.0, 10, 20, &[]).unwrap();
        assert_eq!(lead, libm::pow(2.0, -10.0));
        // the tau > 1 branch tends to the tau = 1 value
        let near = bound_constant(B2, al(3), 1.0 + 1e-7).unwrap();
        assert!((near - bound_constant(B2, al(3), 1.0).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn dual_matches_product_small() {
        let m = Modulus::new(Poly::from_code(7), B2).unwrap();
        for q in 1..=3u64 {
            let d = wce_dual_bruteforce(&[Poly::from_code(q)], &m, 1, al(2), &[1.0], 18).unwrap();
            let ps = polynomial_lattice_points(&m, 1, &[Poly::from_code(q)]).unwrap();
            let e = wce_product(&ps, al(2), &[1.0]).unwrap();
            assert!(d.value <= e + 1e-12);
            assert!(e - d.value <= d.tail_bound + 1e-12, "q={q}: {e} vs {d:?}");
        }
    }

    #[test]
    fn dual_partial_sums_grow() {
        let m = find_irreducible(4, B2).unwrap();
        let q = [Poly::from_code(3), Poly::from_code(7)];
        let mut prev = -1.0;
        for k in [4, 6, 8] {
            let d = wce_dual_bruteforce(&q, &m, 2, al(2), &[0.9, 0.81], k).unwrap();
            assert!(d.value >= prev);
            prev = d.value;
        }
    }

    #[test]
    fn dual_refuses_large() {
        let m = find_irreducible(12, B2).unwrap();
        let q = [Poly::ONE, Poly::ONE, Poly::ONE];
        assert!(matches!(
            wce_dual_bruteforce(&q, &m, 6, al(2), &[1.0; 3], 20),
            Err(Error::OverBudget { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn nonnegative_and_monotone(n in 2u32..=10, mm in 1u32..=5, seeds in proptest::collection::vec(any::<u64>(), 1..5), alpha in 2u32..=3) {
            let m = mm.min(n);
            let md = find_irreducible(n, B2).unwrap();
            let q: Vec<Poly> = seeds.iter().map(|s| Poly::from_code(1 + s % ((1 << n) - 1))).collect();
            let ps = polynomial_lattice_points(&md, m, &q).unwrap();
            let w = WeightSequence::Geometric(0.9).materialize(q.len()).unwrap();
            let r = wce_prefix_errors(&ps, al(alpha), &w).unwrap();
            for pair in r.errors.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-12);
            }
            prop_assert!(r.errors.iter().all(|&e| e >= -1e-12));
        }
    }
}
