//! Component-by-component construction of polynomial lattice rules.
//!
//! Both drivers keep `P_{d-1}(h) - 1` for every point `h` and pick, for the
//! next coordinate, the `q` minimizing
//! `score(q) = sum_{h >= 1} P_{d-1}(h) omega_alpha(v_n(h q / p))`, which
//! differs from the new error by terms independent of `q`.
//!
//! The naive driver scores every `q` directly. The fast driver computes all
//! scores at once as a circular correlation over generator exponents
//! (`q = g^{-delta}`), keeps every `delta` that the FFT error bound cannot
//! rule out, and re-scores those exactly. Both drivers then apply the same
//! selection to the same exact scores: the smallest score wins, and scores
//! within a relative `1e-13` of it count as tied and go to the smallest
//! canonical code of `q`.

use alloc::vec;
use alloc::vec::Vec;

use crate::convolve::{ConvPlan, ConvStrategy};
use crate::gfpoly::{find_generator, ExpTable, Modulus, Poly, PrimeBase};
use crate::walsh::{KernelEvaluator, KernelRoute, KernelTable, Smoothness};
use crate::wce::{pairwise_sum, WeightSequence};
use crate::{Error, Result};

/// Relative width of the tie band in the selection rule.
pub const TIE_TOLERANCE: f64 = 1e-13;

/// A constructed polynomial lattice rule.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeRule {
    pub base: PrimeBase,
    pub m: u32,
    pub n: u32,
    pub alpha: u32,
    pub p: Poly,
    pub q: Vec<Poly>,
    pub weight_spec: WeightSequence,
    pub weights: Vec<f64>,
    /// `e_d` for the prefix `(q_1, ..., q_d)`.
    pub errors: Vec<f64>,
    pub generator: Poly,
}

impl LatticeRule {
    pub fn modulus(&self) -> Result<Modulus> {
        Modulus::with_degree(self.p, self.base, self.n)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn smoothness(&self) -> Result<Smoothness> {
        Smoothness::new(self.alpha)
    }

    pub fn points(&self) -> u64 {
        self.base.pow(self.m).unwrap_or(u64::MAX)
    }
}

/// Work limits; constructions beyond them are refused up front.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest `b^n` for the fast driver.
    pub fast_field: u128,
    /// Largest `b^(n+m)` for the naive driver.
    pub naive_work: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            fast_field: 1 << 26,
            naive_work: 1 << 30,
        }
    }
}

impl Budget {
    /// Both limits set to `units`.
    pub fn uniform(units: u128) -> Self {
        Budget {
            fast_field: units,
            naive_work: units,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CbcOptions {
    pub budget: Budget,
    pub conv: Option<ConvStrategy>,
    pub route: Option<KernelRoute>,
}

/// Running products over the point index, plus the selections so far.
#[derive(Clone, Debug, PartialEq)]
pub struct CbcState {
    excess: Vec<f64>,
    selected: Vec<Poly>,
    errors: Vec<f64>,
}

impl CbcState {
    /// `P_0 = 1` for `count` points.
    pub fn new(count: usize) -> Self {
        CbcState {
            excess: vec![0.0; count],
            selected: Vec::new(),
            errors: Vec::new(),
        }
    }

    /// `P_d(h)` for every point.
    pub fn products(&self) -> Vec<f64> {
        self.excess.iter().map(|t| 1.0 + t).collect()
    }

    /// `P_d(h) - 1`, kept separately for accuracy.
    pub fn excess(&self) -> &[f64] {
        &self.excess
    }

    pub fn selected(&self) -> &[Poly] {
        &self.selected
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// `-1 + mean(P_d)`.
    pub fn current_error(&self) -> f64 {
        pairwise_sum(&self.excess) / self.excess.len() as f64
    }

    /// Multiplies in `1 + gamma omega(h)` and records `q` and the new error.
    fn push<F: Fn(usize) -> f64>(&mut self, q: Poly, gamma: f64, omega_zero: f64, omega_h: F) {
        for (h, t) in self.excess.iter_mut().enumerate() {
            let f = gamma * if h == 0 { omega_zero } else { omega_h(h) };
            *t += f + *t * f;
        }
        self.selected.push(q);
        self.errors.push(self.current_error());
    }
}

/// `P_d(h) = P_{d-1}(h) (1 + gamma omega_alpha(v_n(h q / p)))`, in place.
pub fn update_p(state: &mut CbcState, q: Poly, gamma: f64, modulus: &Modulus, kernel: &KernelEvaluator) {
    let n = modulus.degree();
    state.push(q, gamma, kernel.omega_zero(), |h| {
        kernel.eval(modulus.v_n(modulus.mulmod(Poly::from_code(h as u64), q), n))
    });
}

/// `Q(beta) = P(g^beta)` when `g^beta` has degree `< m` (code below `b^m`),
/// else `0`. `P(0)` has no slot and is handled separately.
pub fn embed_q(products: &[f64], exp: &ExpTable) -> Vec<f64> {
    let mut q = vec![0.0; exp.len()];
    for (h, &p) in products.iter().enumerate().skip(1) {
        let beta = exp.logs()[h] as usize;
        q[beta] = p;
    }
    q
}

struct Setup {
    base: PrimeBase,
    n: u32,
    m: u32,
    count: usize,
    alpha: Smoothness,
    weights: Vec<f64>,
    eval: KernelEvaluator,
    generator: Poly,
}

fn setup(
    s: usize,
    m: u32,
    alpha: u32,
    modulus: &Modulus,
    weights: &WeightSequence,
    route: KernelRoute,
) -> Result<Setup> {
    let alpha_s = Smoothness::new(alpha)?;
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    if !modulus.is_irreducible() {
        return Err(Error::Reducible(modulus.poly().code()));
    }
    let n = modulus.degree();
    if m == 0 || u64::from(alpha) * u64::from(m) != u64::from(n) {
        return Err(Error::WrongDegree {
            code: modulus.poly().code(),
            expected: alpha.saturating_mul(m),
            found: Some(n),
        });
    }
    let base = modulus.base();
    let count = base.pow(m).ok_or(Error::Overflow("b^m"))? as usize;
    Ok(Setup {
        base,
        n,
        m,
        count,
        alpha: alpha_s,
        weights: weights.materialize(s)?,
        eval: KernelEvaluator::new(base, n, alpha_s, route)?,
        generator: find_generator(modulus),
    })
}

/// Index of the selected candidate given exact scores and codes.
fn select(scores: &[(f64, u64)], scale: f64) -> usize {
    let best = scores.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let band = best + TIE_TOLERANCE * scale;
    let mut pick = 0;
    let mut pick_code = u64::MAX;
    for (i, &(score, code)) in scores.iter().enumerate() {
        if score <= band && code < pick_code {
            pick = i;
            pick_code = code;
        }
    }
    pick
}

/// Scale of the scores at this step: `omega_max * sum_{h >= 1} P(h)`.
fn score_scale(products: &[f64], omega_zero: f64) -> f64 {
    (omega_zero + 1.0) * products[1..].iter().map(|p| p.abs()).sum::<f64>()
}

/// `sum_{h >= 1} P(h) omega(h)` in a fixed order.
fn exact_score<F: Fn(usize) -> f64>(products: &[f64], omega_h: F, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend(products.iter().enumerate().skip(1).map(|(h, &p)| p * omega_h(h)));
    pairwise_sum(buf)
}

fn finish(setup: Setup, modulus: &Modulus, weights: &WeightSequence, state: CbcState) -> LatticeRule {
    LatticeRule {
        base: setup.base,
        m: setup.m,
        n: setup.n,
        alpha: setup.alpha.get(),
        p: modulus.poly(),
        q: state.selected,
        weight_spec: weights.clone(),
        weights: setup.weights,
        errors: state.errors,
        generator: setup.generator,
    }
}

/// CBC by scoring every candidate `q` in `G_{b,n}` directly.
pub fn cbc_naive(
    s: usize,
    m: u32,
    alpha: u32,
    modulus: &Modulus,
    weights: &WeightSequence,
    options: &CbcOptions,
) -> Result<LatticeRule> {
    let field = u128::from(modulus.field_size());
    let work = field * u128::from(modulus.base().pow(m).ok_or(Error::Overflow("b^m"))?);
    if work > options.budget.naive_work {
        return Err(Error::OverBudget {
            what: "naive CBC (b^(n+m))",
            estimate: work,
            budget: options.budget.naive_work,
        });
    }
    let st = setup(
        s,
        m,
        alpha,
        modulus,
        weights,
        options.route.unwrap_or(KernelRoute::Auto),
    )?;
    let n = st.n;
    let by_code: Vec<f64> = (0..modulus.field_size())
        .map(|w| st.eval.eval(modulus.v_n(Poly::from_code(w), n)))
        .collect();
    let omega_zero = st.eval.omega_zero();
    let mut state = CbcState::new(st.count);
    let mut buf = Vec::with_capacity(st.count);
    let mut scores = Vec::with_capacity(by_code.len());
    for &gamma in &st.weights {
        let products = state.products();
        scores.clear();
        for code in 1..modulus.field_size() {
            let q = Poly::from_code(code);
            let sc = exact_score(
                &products,
                |h| by_code[modulus.mulmod(Poly::from_code(h as u64), q).code() as usize],
                &mut buf,
            );
            scores.push((sc, code));
        }
        let q = Poly::from_code(scores[select(&scores, score_scale(&products, omega_zero))].1);
        state.push(q, gamma, omega_zero, |h| {
            by_code[modulus.mulmod(Poly::from_code(h as u64), q).code() as usize]
        });
    }
    Ok(finish(st, modulus, weights, state))
}

/// CBC with all candidate scores from one circular correlation per coordinate.
pub fn cbc_fast(
    s: usize,
    m: u32,
    alpha: u32,
    modulus: &Modulus,
    weights: &WeightSequence,
    options: &CbcOptions,
) -> Result<LatticeRule> {
    let field = u128::from(modulus.field_size());
    if field > options.budget.fast_field {
        return Err(Error::OverBudget {
            what: "fast CBC (b^n)",
            estimate: field,
            budget: options.budget.fast_field,
        });
    }
    let route = options.route.unwrap_or(KernelRoute::Auto);
    let st = setup(s, m, alpha, modulus, weights, route)?;
    let exp = ExpTable::new(modulus, st.generator)?;
    let table = KernelTable::build(modulus, &exp, st.alpha, route)?;
    let kernel = CbcKernel::new(modulus, exp, table, options.conv.unwrap_or(ConvStrategy::Auto))?;
    Ok(run_fast(st, modulus, weights, &kernel))
}

/// [`cbc_fast`] on a kernel built by the caller, e.g. with a table filled in
/// parallel. The kernel must belong to `modulus` and `alpha`; its generator
/// is recorded in the rule.
pub fn cbc_fast_with_kernel(
    s: usize,
    m: u32,
    alpha: u32,
    modulus: &Modulus,
    weights: &WeightSequence,
    kernel: &CbcKernel,
) -> Result<LatticeRule> {
    let mut st = setup(s, m, alpha, modulus, weights, KernelRoute::Auto)?;
    if kernel.len != modulus.group_order() as usize {
        return Err(Error::LengthMismatch {
            expected: modulus.group_order() as usize,
            found: kernel.len,
        });
    }
    st.generator = kernel.exp.generator();
    Ok(run_fast(st, modulus, weights, kernel))
}

fn run_fast(st: Setup, modulus: &Modulus, weights: &WeightSequence, kernel: &CbcKernel) -> LatticeRule {
    let mut state = CbcState::new(st.count);
    for &gamma in &st.weights {
        let q = kernel.select_next(&state);
        kernel.push(&mut state, q, gamma);
    }
    finish(st, modulus, weights, state)
}

/// The per-run data of the fast driver: exponent tables, kernel values by
/// exponent, and the correlation plan with the kernel transform.
pub struct CbcKernel {
    exp: ExpTable,
    table: KernelTable,
    plan: ConvPlan,
    len: usize,
}

impl CbcKernel {
    pub fn new(modulus: &Modulus, exp: ExpTable, table: KernelTable, conv: ConvStrategy) -> Result<Self> {
        let len = exp.len();
        if table.len() != len || modulus.group_order() != len as u64 {
            return Err(Error::LengthMismatch {
                expected: len,
                found: table.len(),
            });
        }
        let plan = ConvPlan::new(table.values(), conv)?;
        Ok(CbcKernel { exp, table, plan, len })
    }

    pub fn table(&self) -> &KernelTable {
        &self.table
    }

    pub fn exp(&self) -> &ExpTable {
        &self.exp
    }

    /// `omega(v_n(h g^{-delta} / p))` for `h >= 1`.
    #[inline]
    fn omega_at(&self, h: usize, delta: usize) -> f64 {
        let l = self.exp.logs()[h] as usize;
        self.table.values()[if l >= delta { l - delta } else { l + self.len - delta }]
    }

    /// `S(delta) = sum_beta omega(beta - delta) Q(beta)` for every `delta`.
    pub fn correlate(&self, products: &[f64]) -> Result<Vec<f64>> {
        self.plan.apply(&embed_q(products, &self.exp))
    }

    /// The next generating polynomial under the shared selection rule.
    pub fn select_next(&self, state: &CbcState) -> Poly {
        let products = state.products();
        let q_vec = embed_q(&products, &self.exp);
        let approx = self.plan.apply(&q_vec).expect("lengths fixed at construction");
        let tol = self.plan.error_bound(&q_vec);
        let scale = score_scale(&products, self.table.omega_zero());
        let low = approx.iter().copied().fold(f64::INFINITY, f64::min);
        let cut = low + 2.0 * tol + TIE_TOLERANCE * scale;
        let mut buf = Vec::with_capacity(products.len());
        let scores: Vec<(f64, u64)> = approx
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a <= cut)
            .map(|(delta, _)| {
                let exact = exact_score(&products, |h| self.omega_at(h, delta), &mut buf);
                (exact, self.exp.pow((self.len - delta) % self.len).code())
            })
            .collect();
        Poly::from_code(scores[select(&scores, scale)].1)
    }

    /// Applies the update for the chosen `q`.
    pub fn push(&self, state: &mut CbcState, q: Poly, gamma: f64) {
        let lq = self.exp.log(q).expect("q is a nonzero residue") as usize;
        let delta = (self.len - lq) % self.len;
        state.push(q, gamma, self.table.omega_zero(), |h| self.omega_at(h, delta));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfpoly::find_irreducible;
    use crate::pointgen::polynomial_lattice_points;
    use crate::wce::{wce_bound, wce_prefix_errors};

    const B2: PrimeBase = PrimeBase::TWO;

    fn p7() -> Modulus {
        Modulus::new(Poly::from_code(7), B2).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn one_dimensional_example() {
        let w = WeightSequence::Explicit(vec![1.0]);
        for rule in [
            cbc_naive(1, 1, 2, &p7(), &w, &CbcOptions::default()).unwrap(),
            cbc_fast(1, 1, 2, &p7(), &w, &CbcOptions::default()).unwrap(),
        ] {
            assert_eq!(rule.q, vec![Poly::from_code(2)]);
            assert!((rule.errors[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dimensions_rejected() {
        let w = WeightSequence::Geometric(0.9);
        assert!(cbc_fast(0, 1, 2, &p7(), &w, &CbcOptions::default()).is_err());
        assert!(cbc_naive(0, 1, 2, &p7(), &w, &CbcOptions::default()).is_err());
    }

    #[test]
    fn prebuilt_kernel_matches_fast() {
        let md = find_irreducible(6, B2).unwrap();
        let w = WeightSequence::Geometric(0.8);
        let exp = ExpTable::new(&md, find_generator(&md)).unwrap();
        let table = KernelTable::build(&md, &exp, Smoothness::new(2).unwrap(), KernelRoute::Digits).unwrap();
        let kernel = CbcKernel::new(&md, exp, table, ConvStrategy::Fft).unwrap();
        let a = cbc_fast_with_kernel(4, 3, 2, &md, &w, &kernel).unwrap();
        let b = cbc_fast(4, 3, 2, &md, &w, &CbcOptions::default()).unwrap();
        assert_eq!(a.q, b.q);
        assert_eq!(a.generator, b.generator);
    }

    #[test]
    fn embedding_small() {
        let m = p7();
        let exp = ExpTable::new(&m, find_generator(&m)).unwrap();
        let q = embed_q(&[5.0, 7.0], &exp);
        assert_eq!(q, vec![7.0, 0.0, 0.0]);
        let q = embed_q(&[1.0, 2.0, 3.0, 4.0], &exp);
        assert_eq!(q.iter().sum::<f64>(), 9.0);
    }

    #[test]
    fn zero_weight_freezes_products() {
        let m = find_irreducible(6, B2).unwrap();
        let eval = KernelEvaluator::new(B2, 6, Smoothness::new(2).unwrap(), KernelRoute::Auto).unwrap();
        let mut st = CbcState::new(8);
        update_p(&mut st, Poly::from_code(5), 0.5, &m, &eval);
        let before = st.products();
        update_p(&mut st, Poly::from_code(9), 0.0, &m, &eval);
        assert_eq!(before, st.products());
        // the h = 0 row always picks up omega(0)
        assert!((before[0] - (1.0 + 0.5 * 1.5)).abs() < 1e-15);
    }

    #[test]
    fn wrong_degree_and_budget() {
        let w = WeightSequence::Geometric(0.9);
        let m = find_irreducible(5, B2).unwrap();
        assert!(matches!(
            cbc_fast(2, 2, 2, &m, &w, &CbcOptions::default()),
            Err(Error::WrongDegree { .. })
        ));
        let tight = CbcOptions {
            budget: Budget::uniform(16),
            ..Default::default()
        };
        let m = find_irreducible(6, B2).unwrap();
        assert!(matches!(
            cbc_fast(1, 3, 2, &m, &w, &tight),
            Err(Error::OverBudget { .. })
        ));
        assert!(matches!(
            cbc_naive(1, 3, 2, &m, &w, &tight),
            Err(Error::OverBudget { .. })
        ));
    }

    #[test]
    fn drivers_agree_and_errors_are_consistent() {
        let w = WeightSequence::Geometric(0.9);
        for alpha in [2u32, 3] {
            for m in 1..=4u32 {
                let md = find_irreducible(alpha * m, B2).unwrap();
                let naive = cbc_naive(4, m, alpha, &md, &w, &CbcOptions::default()).unwrap();
                let fast = cbc_fast(4, m, alpha, &md, &w, &CbcOptions::default()).unwrap();
                assert_eq!(naive.q, fast.q, "alpha={alpha} m={m}");
                for (a, b) in naive.errors.iter().zip(&fast.errors) {
                    assert!(rel(*a, *b) <= 1e-10);
                }
                let ps = polynomial_lattice_points(&md, m, &fast.q).unwrap();
                let direct = wce_prefix_errors(&ps, Smoothness::new(alpha).unwrap(), &fast.weights).unwrap();
                for (a, b) in direct.errors.iter().zip(&fast.errors) {
                    assert!(rel(*a, *b) <= 1e-10, "alpha={alpha} m={m}: {a} vs {b}");
                }
                for pair in fast.errors.windows(2) {
                    assert!(pair[0] <= pair[1]);
                }
                for d in 1..=4 {
                    let bound = wce_bound(
                        B2,
                        Smoothness::new(alpha).unwrap(),
                        1.0,
                        m,
                        alpha * m,
                        &fast.weights[..d],
                    )
                    .unwrap();
                    assert!(fast.errors[d - 1] <= bound);
                }
            }
        }
    }

    #[test]
    fn selection_is_the_exhaustive_minimum() {
        let w = WeightSequence::Geometric(0.9);
        let md = find_irreducible(8, B2).unwrap();
        let rule = cbc_fast(3, 4, 2, &md, &w, &CbcOptions::default()).unwrap();
        let a = Smoothness::new(2).unwrap();
        for d in 0..3 {
            let mut best = f64::INFINITY;
            for code in 1..256 {
                let mut q = rule.q[..d].to_vec();
                q.push(Poly::from_code(code));
                let ps = polynomial_lattice_points(&md, 4, &q).unwrap();
                best = best.min(wce_prefix_errors(&ps, a, &rule.weights).unwrap().total());
            }
            assert!(rel(rule.errors[d], best) <= 1e-10, "d = {d}");
        }
    }

    #[test]
    fn recurrence_matches_correlation() {
        // e_d - e_{d-1} = (gamma_d / b^m) (P_{d-1}(0) omega(0) + S_d(delta_d))
        let w = WeightSequence::Geometric(0.8);
        let md = find_irreducible(10, B2).unwrap();
        let exp = ExpTable::new(&md, find_generator(&md)).unwrap();
        let table = KernelTable::build(&md, &exp, Smoothness::new(2).unwrap(), KernelRoute::Auto).unwrap();
        let kernel = CbcKernel::new(&md, exp, table, ConvStrategy::Fft).unwrap();
        let gammas = w.materialize(3).unwrap();
        let mut state = CbcState::new(32);
        let mut prev = 0.0;
        for &g in &gammas {
            let products = state.products();
            let s = kernel.correlate(&products).unwrap();
            let q = kernel.select_next(&state);
            let lq = kernel.exp().log(q).unwrap() as usize;
            let delta = (kernel.exp().len() - lq) % kernel.exp().len();
            kernel.push(&mut state, q, g);
            let step = g / 32.0 * (products[0] * kernel.table().omega_zero() + s[delta]);
            let e = *state.errors().last().unwrap();
            assert!((e - prev - step).abs() <= 1e-12 * e.max(1.0));
            prev = e;
        }
    }
}
