//! The one-dimensional Walsh kernel
//! `omega_alpha(x) = sum_{k >= 1} r_alpha(k) wal_k(x)`.
//!
//! Four evaluators are provided and cross-checked in tests:
//!
//! - [`omega_digits`]: the general `O(alpha n)` algorithm for `x = v / b^n`,
//!   built from triangular sums over digit positions,
//! - [`omega_nonzero_digits`]: closed forms over the nonzero digits of `x`
//!   (`alpha` in `{2, 3}`, any prime base),
//! - [`omega_base2`]: the explicit base-2 formulas (`alpha` in `{2, 3}`),
//! - [`omega_series_oracle`]: the truncated defining series with a bound on
//!   the omitted tail.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::gfpoly::{ExpTable, Modulus, PrimeBase};
use crate::{Error, Result};

/// Largest supported smoothness.
pub const MAX_ALPHA: u32 = 32;
/// Largest supported digit precision.
pub const MAX_DIGITS: u32 = 63;

/// Smoothness parameter `alpha >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Smoothness(u32);

impl Smoothness {
    pub fn new(alpha: u32) -> Result<Self> {
        if (2..=MAX_ALPHA).contains(&alpha) {
            Ok(Smoothness(alpha))
        } else {
            Err(Error::invalid("smoothness alpha must satisfy 2 <= alpha <= 32"))
        }
    }

    #[inline]
    pub const fn get(self) -> u32 {
        self.0
    }
}

/// `x = v / b^n` with `0 <= v < b^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DigitRational {
    num: u64,
    precision: u32,
    base: PrimeBase,
}

impl DigitRational {
    pub fn new(num: u64, precision: u32, base: PrimeBase) -> Result<Self> {
        if precision > MAX_DIGITS {
            return Err(Error::invalid("digit precision too large"));
        }
        let bound = base.pow(precision).ok_or(Error::Overflow("b^n"))?;
        if num >= bound {
            return Err(Error::invalid("numerator must be below b^n"));
        }
        Ok(DigitRational { num, precision, base })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn base(&self) -> PrimeBase {
        self.base
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.base.is_two() {
            libm::ldexp(self.num as f64, -(self.precision as i32))
        } else {
            self.num as f64 / libm::pow(f64::from(self.base.get()), f64::from(self.precision))
        }
    }

    /// Digits `xi_1, ..., xi_n` after the radix point.
    pub fn digits(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.precision as usize];
        fill_digits(self.num, self.base.get(), &mut out);
        out
    }

    /// Position (1-based) of the first nonzero digit.
    pub fn first_nonzero(&self) -> Option<u32> {
        if self.num == 0 {
            None
        } else {
            Some(self.precision - digit_count(self.num, self.base.get()) + 1)
        }
    }

    /// `(a_i, xi_{a_i})` for every nonzero digit, `a_1 < a_2 < ...`.
    pub fn nonzero_digits(&self) -> Vec<(u32, u32)> {
        self.digits()
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d != 0)
            .map(|(i, d)| (i as u32 + 1, d))
            .collect()
    }
}

fn digit_count(mut v: u64, b: u32) -> u32 {
    if b == 2 {
        return 64 - v.leading_zeros();
    }
    let mut c = 0;
    while v > 0 {
        v /= u64::from(b);
        c += 1;
    }
    c
}

/// Writes the base-`b` digits of `v`, most significant first, into `out`.
#[inline]
fn fill_digits(mut v: u64, b: u32, out: &mut [u32]) {
    if b == 2 {
        let n = out.len();
        for (a, d) in out.iter_mut().enumerate() {
            *d = ((v >> (n - 1 - a)) & 1) as u32;
        }
        return;
    }
    for d in out.iter_mut().rev() {
        *d = (v % u64::from(b)) as u32;
        v /= u64::from(b);
    }
}

#[inline]
fn base_pow_neg(base: PrimeBase, e: u32) -> f64 {
    if base.is_two() {
        libm::ldexp(1.0, -(e as i32))
    } else {
        libm::pow(f64::from(base.get()), -f64::from(e))
    }
}

/// `r_alpha(k)`: `b^{-sum (a_i + 1)}` over the `min(#k, alpha)` most
/// significant nonzero digits of `k`; `r_alpha(0) = 1`.
pub fn r_alpha(k: u64, alpha: Smoothness, base: PrimeBase) -> f64 {
    let b = u64::from(base.get());
    let mut positions = Vec::new();
    let mut k = k;
    let mut a = 0u32;
    while k > 0 {
        if !k.is_multiple_of(b) {
            positions.push(a);
        }
        k /= b;
        a += 1;
    }
    let e: u32 = positions.iter().rev().take(alpha.get() as usize).map(|&a| a + 1).sum();
    base_pow_neg(base, e)
}

/// The `k`-th Walsh function at `x`.
pub fn wal_k(k: u64, x: &DigitRational) -> Complex64 {
    let b = x.base().get();
    let xi = x.digits();
    let mut k = k;
    let mut phase = 0u64;
    let mut i = 0usize;
    while k > 0 {
        let kappa = k % u64::from(b);
        if let Some(&d) = xi.get(i) {
            phase += kappa * u64::from(d);
        }
        k /= u64::from(b);
        i += 1;
    }
    let phase = phase % u64::from(b);
    if phase == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if b == 2 {
        return Complex64::new(-1.0, 0.0);
    }
    let t = 2.0 * core::f64::consts::PI * phase as f64 / f64::from(b);
    Complex64::new(libm::cos(t), libm::sin(t))
}

/// Triangular sum `T_0^{n-1}(r)(g_1(a_1) ... g_r(a_r))` over
/// `n - 1 >= a_1 > ... > a_r >= 0`, with `g(i, a)` the `i`-th factor
/// (1-based) at position `a`. `r = 0` gives the empty product `1`.
pub fn triangular_sum_by<F: Fn(usize, usize) -> f64>(r: usize, n: usize, g: F) -> f64 {
    if r == 0 {
        return 1.0;
    }
    if r > n {
        return 0.0;
    }
    let mut s = vec![0.0f64; r];
    for a in 0..=n - r {
        s[r - 1] += g(r, a);
        for t in 1..r {
            s[r - 1 - t] += s[r - t] * g(r - t, a + t);
        }
    }
    s[0]
}

/// All suffix sums in one pass: entry `t - 1` is
/// `T_0^{n-1}(r - t + 1)(g_t ... g_r)` for `t = 1..=r`.
pub fn triangular_sum_all_by<F: Fn(usize, usize) -> f64>(r: usize, n: usize, g: F) -> Vec<f64> {
    let mut s = vec![0.0f64; r];
    triangular_sums_into(r, n, g, &mut s);
    s
}

#[inline]
fn triangular_sums_into<F: Fn(usize, usize) -> f64>(r: usize, n: usize, g: F, s: &mut [f64]) {
    s[..r].iter_mut().for_each(|x| *x = 0.0);
    if r == 0 {
        return;
    }
    for a in 0..n {
        s[r - 1] += g(r, a);
        let upper = r.min(n - a);
        for t in 1..upper {
            s[r - 1 - t] += s[r - t] * g(r - t, a + t);
        }
    }
}

/// [`triangular_sum_by`] with the factors given as tables `g[i][a]`.
pub fn triangular_sum(g: &[&[f64]], n: usize) -> f64 {
    triangular_sum_by(g.len(), n, |i, a| g[i - 1][a])
}

/// [`triangular_sum_all_by`] with the factors given as tables `g[i][a]`.
pub fn triangular_sum_all(g: &[&[f64]], n: usize) -> Vec<f64> {
    triangular_sum_all_by(g.len(), n, |i, a| g[i - 1][a])
}

/// Intermediate quantities of the digit algorithm at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularSums {
    /// `(T_{alpha-1}, ..., T_1)`.
    pub t: Vec<f64>,
    /// `(T~_alpha, ..., T~_1)`.
    pub t_tilde: Vec<f64>,
    /// `(C_0, ..., C_{alpha-1})`.
    pub c: Vec<f64>,
    /// Prefix sums of `c`.
    pub c_bar: Vec<f64>,
}

/// `O(alpha n)` evaluator of `omega_alpha(v / b^n)` for fixed `(b, n, alpha)`.
#[derive(Clone, Debug)]
pub struct DigitsKernel {
    base: PrimeBase,
    n: u32,
    alpha: Smoothness,
    c: Vec<f64>,
    c_bar: Vec<f64>,
    inv_pow: Vec<f64>,
    omega_zero: f64,
}

impl DigitsKernel {
    pub fn new(base: PrimeBase, n: u32, alpha: Smoothness) -> Result<Self> {
        if n == 0 || n > MAX_DIGITS || base.pow(n).is_none() {
            return Err(Error::invalid("digit precision must satisfy 1 <= n and b^n < 2^64"));
        }
        let a = alpha.get() as usize;
        let c: Vec<f64> = (0..a as u32).map(|t| tail_constant(base, n, t)).collect();
        let c_bar = c
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        let inv_pow = (0..n).map(|a| base_pow_neg(base, a + 1)).collect();
        Ok(DigitsKernel {
            base,
            n,
            alpha,
            c,
            c_bar,
            inv_pow,
            omega_zero: omega_at_zero(base, alpha),
        })
    }

    pub fn omega_zero(&self) -> f64 {
        self.omega_zero
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    /// The vectors `T`, `T~`, `C` and `C-bar` at `v / b^n` (`v > 0`).
    pub fn triangular_sums(&self, v: u64) -> TriangularSums {
        let a = self.alpha.get() as usize;
        let n = self.n as usize;
        let mut xi = [0u32; MAX_DIGITS as usize];
        fill_digits(v, self.base.get(), &mut xi[..n]);
        let beta = self.n - digit_count(v, self.base.get()) + 1;
        let b1 = f64::from(self.base.get() - 1);
        let bf = f64::from(self.base.get());
        let g = |pos: usize| -> f64 {
            let z = if xi[pos] == 0 { b1 } else { -1.0 };
            self.inv_pow[pos] * z
        };
        // T_{alpha-1}, ..., T_1
        let mut t = vec![0.0; a - 1];
        triangular_sums_into(a - 1, n, |_, pos| g(pos), &mut t);
        // T~_alpha, ..., T~_1: the last factor carries b^{a} [a < beta]
        let mut t_tilde = vec![0.0; a];
        triangular_sums_into(
            a,
            n,
            |i, pos| {
                if i < a {
                    g(pos)
                } else if (pos as u32) < beta {
                    (if xi[pos] == 0 { b1 } else { -1.0 }) / bf
                } else {
                    0.0
                }
            },
            &mut t_tilde,
        );
        TriangularSums {
            t,
            t_tilde,
            c: self.c.clone(),
            c_bar: self.c_bar.clone(),
        }
    }

    /// `omega_alpha(v / b^n)`.
    pub fn eval(&self, v: u64) -> f64 {
        if v == 0 {
            return self.omega_zero;
        }
        let a = self.alpha.get() as usize;
        let n = self.n as usize;
        let bv = self.base.get();
        let mut xi = [0u32; MAX_DIGITS as usize];
        fill_digits(v, bv, &mut xi[..n]);
        let beta = (self.n - digit_count(v, bv) + 1) as usize;
        let b1 = f64::from(bv - 1);
        let inv_b = 1.0 / f64::from(bv);
        let mut gv = [0.0f64; MAX_DIGITS as usize];
        let mut last = [0.0f64; MAX_DIGITS as usize];
        for pos in 0..n {
            let z = if xi[pos] == 0 { b1 } else { -1.0 };
            gv[pos] = self.inv_pow[pos] * z;
            last[pos] = if pos < beta { z * inv_b } else { 0.0 };
        }
        let mut t = [0.0f64; MAX_ALPHA as usize];
        let mut tt = [0.0f64; MAX_ALPHA as usize];
        triangular_sums_into(a - 1, n, |_, pos| gv[pos], &mut t);
        triangular_sums_into(a, n, |i, pos| if i < a { gv[pos] } else { last[pos] }, &mut tt);
        // t[k] = T_{a-1-k}; pair C-bar_k with T_{a-1-k}
        let mut acc = self.c_bar[a - 1] - 1.0;
        for k in 0..a - 1 {
            acc += self.c_bar[k] * t[k];
        }
        // tt[k] = T~_{a-k}; pair C_k with T~_{a-k}
        for k in 0..a {
            acc += self.c[k] * tt[k];
        }
        acc
    }
}

/// `C_t = b^{-n t} prod_{i=1}^t (b - 1) / (b^i - 1)`, the closed form of the
/// triangular sums over positions `>= n` where every digit of `x` is zero.
fn tail_constant(base: PrimeBase, n: u32, t: u32) -> f64 {
    if t == 0 {
        return 1.0;
    }
    let b = u128::from(base.get());
    // exact rational where it fits, then a single rounding
    let mut num: Option<u128> = Some(1);
    let mut den: Option<u128> = Some(1);
    for i in 1..=t {
        num = num.and_then(|x| x.checked_mul(b - 1));
        den = den.and_then(|x| b.checked_pow(i).and_then(|p| x.checked_mul(p - 1)));
    }
    let ratio = match (num, den) {
        (Some(nu), Some(de)) => nu as f64 / de as f64,
        _ => {
            let bf = f64::from(base.get());
            (1..=t).fold(1.0, |acc, i| acc * (bf - 1.0) / (libm::pow(bf, f64::from(i)) - 1.0))
        }
    };
    ratio * base_pow_neg(base, n * t)
}

/// `omega_alpha(0)` in closed form.
pub fn omega_at_zero(base: PrimeBase, alpha: Smoothness) -> f64 {
    let bf = f64::from(base.get());
    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in 1..alpha.get() {
        prod *= (bf - 1.0) / (libm::pow(bf, f64::from(i)) - 1.0);
        sum += prod;
    }
    sum + (bf - 1.0) / (libm::pow(bf, f64::from(alpha.get())) - bf) * prod
}

/// `omega_alpha(x)` by the general digit algorithm.
pub fn omega_digits(x: &DigitRational, alpha: Smoothness) -> Result<f64> {
    if x.is_zero() {
        return Ok(omega_at_zero(x.base(), alpha));
    }
    Ok(DigitsKernel::new(x.base(), x.precision(), alpha)?.eval(x.num()))
}

/// `omega_alpha(x)` for `alpha` in `{2, 3}` from the nonzero digits
/// `(a_i, xi_{a_i})` of `x`, `1 <= a_1 < a_2 < ...`.
pub fn omega_nonzero_digits(digits: &[(u32, u32)], alpha: Smoothness, base: PrimeBase) -> Result<f64> {
    if !matches!(alpha.get(), 2 | 3) {
        return Err(Error::Unsupported(alloc::format!(
            "closed forms exist for alpha in {{2, 3}}, got {}",
            alpha.get()
        )));
    }
    if digits.windows(2).any(|w| w[0].0 >= w[1].0) || digits.iter().any(|&(a, d)| a == 0 || d == 0) {
        return Err(Error::invalid(
            "nonzero digits must have strictly increasing positions >= 1",
        ));
    }
    let bf = f64::from(base.get());
    let s1 = |sig1: f64| 1.0 - bf * sig1;
    let s2 = |sig1: f64, sig2: f64| {
        1.0 / (bf + 1.0)
            - bf * (bf - 2.0) * 0.5 * (sig1 * sig1 - sig2)
            - bf * (bf - 1.0) * (1.0 / (bf - 1.0) - sig1) * sig1
    };
    let Some(&(a1, _)) = digits.first() else {
        return Ok(match alpha.get() {
            2 => 1.0 + 1.0 / bf,
            _ => 1.0 + 1.0 / (bf + 1.0) + 1.0 / (bf * (bf + 1.0) * (bf + 1.0)),
        });
    };
    let sig1: f64 = digits.iter().map(|&(a, _)| base_pow_neg(base, a)).sum();
    let sig2: f64 = digits.iter().map(|&(a, _)| base_pow_neg(base, 2 * a)).sum();
    let a1f = f64::from(a1);
    let ba1 = base_pow_neg(base, a1);
    let k = a1f * bf - a1f - bf;
    let s_tilde2 = 1.0 / bf - 2.0 * ba1 - ba1 / bf - k * sig1;
    if alpha.get() == 2 {
        return Ok(s1(sig1) + s_tilde2);
    }
    Ok(s1(sig1) + s2(sig1, sig2) + tail_three(base, a1, sig1, sig2))
}

/// Sum of `r_3(k) wal_k(x)` over `k` with at least three nonzero digits, for
/// `x != 0` with first nonzero digit `a_1` and `sigma_i = sum_j b^{-i a_j}`.
///
/// With `f(c) = b^{-(c+1)} z(xi_{c+1})`, the lowest counted digit `c_3` must
/// satisfy `c_3 < a_1` and contributes `b^{-1} z`; the top two give
/// `V(c) = ((sum_{c' > c} f)^2 - sum_{c' > c} f^2) / 2`.
fn tail_three(base: PrimeBase, a1: u32, sig1: f64, sig2: f64) -> f64 {
    let bf = f64::from(base.get());
    let ba1 = base_pow_neg(base, a1);
    let ba1sq = ba1 * ba1;
    // positions c < a_1 - 1, where u = b^{-(c+1)} runs over b^{-1}..b^{-(a_1-1)}
    let count = f64::from(a1 - 1);
    let sum_u = (1.0 - bf * ba1) / (bf - 1.0);
    let sum_u2 = (1.0 - bf * bf * ba1sq) / (bf * bf - 1.0);
    let body = sum_u2 / (bf + 1.0) - bf * sig1 * sum_u + 0.5 * count * (bf * bf * sig1 * sig1 - bf * (2.0 - bf) * sig2);
    // c = a_1 - 1, the position of the first nonzero digit
    let u_last = ba1 * (1.0 + bf) - bf * sig1;
    let w_last = (bf - 1.0) / (bf + 1.0) * ba1sq + bf * (2.0 - bf) * (sig2 - ba1sq);
    let v_last = 0.5 * (u_last * u_last - w_last);
    ((bf - 1.0) * body - v_last) / bf
}

/// Explicit base-2 formulas for `alpha` in `{2, 3}` at any real `x` in `[0, 1)`.
pub fn omega_base2(x: f64, alpha: Smoothness) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::invalid("x must lie in [0, 1)"));
    }
    let a1 = if x == 0.0 {
        0
    } else {
        // x = f 2^e with f in [1/2, 1), so floor(log2 x) = e - 1
        let (_, e) = libm::frexp(x);
        1 - e
    };
    omega_base2_parts(x, a1, alpha)
}

/// [`omega_base2`] at `v / 2^n`, with `a_1` taken from the bit length of `v`.
pub fn omega_base2_digits(x: &DigitRational, alpha: Smoothness) -> Result<f64> {
    if !x.base().is_two() {
        return Err(Error::Unsupported("base-2 formulas need b = 2".into()));
    }
    let a1 = x.first_nonzero().map_or(0, |b| b as i32);
    omega_base2_parts(x.to_f64(), a1, alpha)
}

fn omega_base2_parts(x: f64, a1: i32, alpha: Smoothness) -> Result<f64> {
    let (t1, t2) = if a1 == 0 {
        (0.0, 0.0)
    } else {
        let t1 = libm::ldexp(1.0, -a1);
        (t1, t1 * t1)
    };
    let a1f = f64::from(a1);
    let s1 = 1.0 - 2.0 * x;
    match alpha.get() {
        2 => Ok(s1 + (1.0 - 5.0 * t1) / 2.0 + (2.0 - a1f) * x),
        3 => {
            let s2 = 1.0 / 3.0 - 2.0 * (1.0 - x) * x;
            let s3 = (1.0 - 43.0 * t2) / 18.0 + (5.0 * t1 - 1.0) * x - (2.0 - a1f) * x * x;
            Ok(s1 + s2 + s3)
        }
        a => Err(Error::Unsupported(alloc::format!(
            "base-2 formulas exist for alpha in {{2, 3}}, got {a}"
        ))),
    }
}

/// A truncated series value and a bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `sum_{1 <= k < b^K} r_alpha(k)`.
pub fn series_partial_mass(alpha: Smoothness, base: PrimeBase, digits: u32) -> f64 {
    let mut d = mass_start(alpha);
    for a in 0..digits {
        mass_step(&mut d, a, base);
    }
    d[alpha.get() as usize] - 1.0
}

/// `sum_{k >= b^K} r_alpha(k)`, which bounds `|omega - partial sum|`.
pub fn series_tail_bound(alpha: Smoothness, base: PrimeBase, digits: u32) -> f64 {
    let al = alpha.get() as usize;
    let mut d = mass_start(alpha);
    for a in 0..digits {
        mass_step(&mut d, a, base);
    }
    let b1 = f64::from(base.get() - 1);
    let mut tail = 0.0;
    let mut a = digits;
    loop {
        let term = b1 * base_pow_neg(base, a + 1) * d[al - 1];
        tail += term;
        if term <= tail * 1e-18 || term == 0.0 || a > digits + 4096 {
            break;
        }
        mass_step(&mut d, a, base);
        a += 1;
    }
    tail
}

// d[j] = sum_{k < b^a} r_j(k), with r_j counting the top j nonzero digits.
// d[0] = b^a is never stored: its contribution (b-1) b^{-(a+1)} b^a is (b-1)/b.
fn mass_start(alpha: Smoothness) -> Vec<f64> {
    vec![1.0; alpha.get() as usize + 1]
}

fn mass_step(d: &mut [f64], a: u32, base: PrimeBase) {
    let b1 = f64::from(base.get() - 1);
    let w = b1 * base_pow_neg(base, a + 1);
    for j in (1..d.len()).rev() {
        let lower = if j == 1 {
            b1 / f64::from(base.get())
        } else {
            w * d[j - 1]
        };
        d[j] += lower;
    }
}

/// `sum_{1 <= k < b^K} r_alpha(k) wal_k(x)` with its tail bound.
///
/// `wal_k(x)` only sees the low `n` digits of `k`, so the sum is folded
/// over those: the high part `H` of `k` contributes through the weight of
/// its own top digits, and through how many of the `alpha` counted digits
/// are left for the low part. Cost is `O(b^{K-n} K + b^n n)`.
pub fn omega_series_oracle(x: &DigitRational, alpha: Smoothness, digits: u32) -> Result<SeriesValue> {
    let n = x.precision();
    if digits < n {
        return Err(Error::invalid("truncation K must be at least the precision n"));
    }
    let base = x.base();
    let b = u64::from(base.get());
    let high = base.pow(digits - n).ok_or(Error::Overflow("b^(K-n)"))?;
    let low = base.pow(n).ok_or(Error::Overflow("b^n"))?;
    if high.saturating_add(low) > 1 << 32 {
        return Err(Error::OverBudget {
            what: "series oracle",
            estimate: u128::from(high) + u128::from(low),
            budget: 1 << 32,
        });
    }
    let al = alpha.get() as usize;

    // weights[j] for j < alpha: high parts with exactly j nonzero digits;
    // weights[alpha]: high parts with at least alpha nonzero digits.
    let mut weights = vec![0.0f64; al + 1];
    weights[0] = 1.0;
    let mut pos = Vec::with_capacity(64);
    for h in 1..high {
        pos.clear();
        let mut rem = h;
        let mut p = 0u32;
        while rem > 0 {
            if rem % b != 0 {
                pos.push(p + n);
            }
            rem /= b;
            p += 1;
        }
        let e: u32 = pos.iter().rev().take(al).map(|&a| a + 1).sum();
        weights[pos.len().min(al)] += base_pow_neg(base, e);
    }

    let xi = x.digits();
    let bf = f64::from(base.get());
    let cos_table: Vec<f64> = (0..b)
        .map(|t| libm::cos(2.0 * core::f64::consts::PI * t as f64 / bf))
        .collect();
    let mut total = 0.0;
    for l in 0..low {
        // digits of l, least significant first: kappa_i pairs with xi_{i+1}
        pos.clear();
        let mut rem = l;
        let mut i = 0usize;
        let mut phase = 0u64;
        while rem > 0 {
            let kappa = rem % b;
            if kappa != 0 {
                pos.push(i as u32);
                phase += kappa * u64::from(xi[i]);
            }
            rem /= b;
            i += 1;
        }
        let mut val = weights[al];
        for (j, &w) in weights.iter().enumerate().take(al) {
            if w == 0.0 {
                continue;
            }
            let e: u32 = pos.iter().rev().take(al - j).map(|&a| a + 1).sum();
            val += w * base_pow_neg(base, e);
        }
        total += cos_table[(phase % b) as usize] * val;
    }
    Ok(SeriesValue {
        value: total - 1.0,
        tail_bound: series_tail_bound(alpha, base, digits),
    })
}

/// Which evaluator fills kernel tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelRoute {
    /// Base-2 formulas when they apply, the digit algorithm otherwise.
    Auto,
    Digits,
    /// Closed forms over nonzero digits.
    Closed,
    Base2,
    /// Truncated series with `K` digits.
    Series {
        digits: u32,
    },
}

/// A configured evaluator of `omega_alpha(v / b^n)`.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    base: PrimeBase,
    n: u32,
    alpha: Smoothness,
    route: KernelRoute,
    digits: DigitsKernel,
}

impl KernelEvaluator {
    pub fn new(base: PrimeBase, n: u32, alpha: Smoothness, route: KernelRoute) -> Result<Self> {
        let closed_ok = matches!(alpha.get(), 2 | 3);
        let route = match route {
            KernelRoute::Auto if closed_ok && base.is_two() => KernelRoute::Base2,
            KernelRoute::Auto => KernelRoute::Digits,
            KernelRoute::Closed if !closed_ok => {
                return Err(Error::Unsupported("closed forms need alpha in {2, 3}".into()))
            }
            KernelRoute::Base2 if !(closed_ok && base.is_two()) => {
                return Err(Error::Unsupported(
                    "base-2 formulas need b = 2 and alpha in {2, 3}".into(),
                ))
            }
            KernelRoute::Series { digits } if digits < n => {
                return Err(Error::invalid("series truncation must be at least n digits"))
            }
            r => r,
        };
        Ok(KernelEvaluator {
            base,
            n,
            alpha,
            route,
            digits: DigitsKernel::new(base, n, alpha)?,
        })
    }

    /// The resolved route (never `Auto`).
    pub fn route(&self) -> KernelRoute {
        self.route
    }

    pub fn alpha(&self) -> Smoothness {
        self.alpha
    }

    pub fn omega_zero(&self) -> f64 {
        self.digits.omega_zero()
    }

    pub fn eval(&self, v: u64) -> f64 {
        match self.route {
            KernelRoute::Digits | KernelRoute::Auto => self.digits.eval(v),
            KernelRoute::Base2 => {
                let a1 = if v == 0 {
                    0
                } else {
                    (self.n - digit_count(v, 2) + 1) as i32
                };
                let x = libm::ldexp(v as f64, -(self.n as i32));
                omega_base2_parts(x, a1, self.alpha).expect("route checked at construction")
            }
            KernelRoute::Closed => {
                let x = self.rational(v);
                omega_nonzero_digits(&x.nonzero_digits(), self.alpha, self.base).expect("route checked at construction")
            }
            KernelRoute::Series { digits } => omega_series_oracle(&self.rational(v), self.alpha, digits)
                .map(|s| s.value)
                .unwrap_or(f64::NAN),
        }
    }

    fn rational(&self, v: u64) -> DigitRational {
        DigitRational::new(v, self.n, self.base).expect("numerator below b^n")
    }
}

/// `omega_alpha(v_n(g^delta / p))` for every exponent `delta`, plus `omega_alpha(0)`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    values: Vec<f64>,
    omega_zero: f64,
}

impl KernelTable {
    pub fn build(m: &Modulus, exp: &ExpTable, alpha: Smoothness, route: KernelRoute) -> Result<Self> {
        let eval = KernelEvaluator::new(m.base(), m.degree(), alpha, route)?;
        let values = exp
            .powers()
            .iter()
            .map(|&w| eval.eval(m.v_n(crate::gfpoly::Poly::from_code(u64::from(w)), m.degree())))
            .collect();
        Ok(KernelTable {
            values,
            omega_zero: eval.omega_zero(),
        })
    }

    /// Wraps values computed elsewhere (e.g. in parallel); `values[delta]`
    /// must equal what [`KernelTable::build`] would produce.
    pub fn from_values(values: Vec<f64>, omega_zero: f64) -> Self {
        KernelTable { values, omega_zero }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn omega_zero(&self) -> f64 {
        self.omega_zero
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Builds the kernel table indexed by generator exponent.
pub fn build_kernel_table(m: &Modulus, exp: &ExpTable, alpha: Smoothness) -> Result<KernelTable> {
    KernelTable::build(m, exp, alpha, KernelRoute::Auto)
}
