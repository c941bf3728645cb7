//! Arbitrary-length DFTs and circular correlation of real vectors.
//!
//! Power-of-two lengths use an iterative radix-2 transform; other lengths
//! go through Bluestein's chirp-z reduction. The correlation used by the
//! fast CBC step is computed as a zero-padded linear correlation with a
//! half-size complex transform of the real data.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Lengths below this use the direct `O(L^2)` correlation under [`ConvStrategy::Auto`].
pub const DIRECT_THRESHOLD: usize = 512;

#[inline]
fn unit(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// Radix-2 transform of size `n` (a power of two).
///
/// `half[k] = exp(-2 pi i k / (2n))` for `k < n`; even entries are the
/// transform's own twiddles, odd ones serve the real-data wrapper.
#[derive(Clone, Debug)]
struct Radix2 {
    n: usize,
    half: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let denom = 2.0 * n as f64;
        let half = (0..n).map(|k| unit(-2.0 * PI * k as f64 / denom)).collect();
        Radix2 { n, half }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half_len = len / 2;
            let step = 2 * (n / len);
            for chunk in buf.chunks_exact_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half_len);
                for (j, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = self.half[j * step] * *v;
                    *v = *u - t;
                    *u += t;
                }
            }
            len <<= 1;
        }
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        buf.iter_mut().for_each(|z| *z = z.conj());
        self.forward(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z = z.conj() * s);
    }

    /// Spectrum bins `0..=n` of a real sequence of length `2n`.
    fn forward_real(&self, x: &[f64], out: &mut Vec<Complex64>) {
        let n = self.n;
        debug_assert_eq!(x.len(), 2 * n);
        let mut z: Vec<Complex64> = x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        self.forward(&mut z);
        out.clear();
        out.reserve(n + 1);
        for k in 0..=n {
            let zk = z[k % n];
            let zc = z[(n - k) % n].conj();
            let even = (zk + zc) * 0.5;
            let odd = (zk - zc) * Complex64::new(0.0, -0.5);
            out.push(even + self.real_twiddle(k) * odd);
        }
    }

    /// Inverse of [`Radix2::forward_real`], normalized.
    fn inverse_real(&self, freq: &[Complex64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(freq.len(), n + 1);
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let a = freq[k];
                let c = freq[n - k].conj();
                let even = (a + c) * 0.5;
                let odd = (a - c) * 0.5 * self.real_twiddle(k).conj();
                even + Complex64::new(-odd.im, odd.re)
            })
            .collect();
        self.inverse(&mut z);
        for (k, v) in z.iter().enumerate() {
            out[2 * k] = v.re;
            out[2 * k + 1] = v.im;
        }
    }

    #[inline]
    fn real_twiddle(&self, k: usize) -> Complex64 {
        if k == self.n {
            Complex64::new(-1.0, 0.0)
        } else {
            self.half[k]
        }
    }
}

/// A DFT of any length `L >= 1`.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    kind: PlanKind,
}

#[derive(Clone, Debug)]
enum PlanKind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        chirp: Vec<Complex64>,
        filter: Vec<Complex64>,
    },
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("transform length must be at least 1"));
        }
        if len.is_power_of_two() {
            return Ok(FftPlan {
                len,
                kind: PlanKind::Radix2(Radix2::new(len)),
            });
        }
        let m = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // chirp[k] = exp(-i pi k^2 / L), with k^2 reduced mod 2L for accuracy
        let two_l = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                let r = (k as u128 * k as u128) % two_l;
                unit(-PI * r as f64 / len as f64)
            })
            .collect();
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        filter[0] = chirp[0].conj();
        for k in 1..len {
            filter[k] = chirp[k].conj();
            filter[m - k] = chirp[k].conj();
        }
        inner.forward(&mut filter);
        Ok(FftPlan {
            len,
            kind: PlanKind::Bluestein { inner, chirp, filter },
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward DFT `X_k = sum_j x_j exp(-2 pi i j k / L)`.
    pub fn forward(&self, buf: &mut [Complex64]) -> Result<()> {
        if buf.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: buf.len(),
            });
        }
        match &self.kind {
            PlanKind::Radix2(r) => r.forward(buf),
            PlanKind::Bluestein { inner, chirp, filter } => {
                let mut a = vec![Complex64::new(0.0, 0.0); inner.n];
                for ((dst, &x), &c) in a.iter_mut().zip(buf.iter()).zip(chirp) {
                    *dst = x * c;
                }
                inner.forward(&mut a);
                a.iter_mut().zip(filter).for_each(|(x, &f)| *x *= f);
                inner.inverse(&mut a);
                for ((dst, &y), &c) in buf.iter_mut().zip(&a).zip(chirp) {
                    *dst = y * c;
                }
            }
        }
        Ok(())
    }

    /// In-place inverse DFT, normalized by `1 / L`.
    pub fn inverse(&self, buf: &mut [Complex64]) -> Result<()> {
        buf.iter_mut().for_each(|z| *z = z.conj());
        self.forward(buf)?;
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z = z.conj() * s);
        Ok(())
    }
}

/// Forward DFT of any length.
pub fn fft_arbitrary_length(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.forward(&mut out)?;
    Ok(out)
}

/// Normalized inverse DFT of any length.
pub fn ifft_arbitrary_length(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(x.len())?;
    let mut out = x.to_vec();
    plan.inverse(&mut out)?;
    Ok(out)
}

/// How [`ConvPlan`] evaluates the correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConvStrategy {
    Direct,
    Fft,
    /// Direct below [`DIRECT_THRESHOLD`], FFT otherwise.
    Auto,
}

/// Circular correlation `out[d] = sum_b omega[(b - d) mod L] q[b]` against a
/// fixed `omega`, with the kernel transform computed once.
#[derive(Clone, Debug)]
pub struct ConvPlan {
    len: usize,
    kernel: Vec<f64>,
    kernel_norm: f64,
    fft: Option<RealCorrelator>,
}

#[derive(Clone, Debug)]
struct RealCorrelator {
    size: usize,
    radix: Radix2,
    spectrum: Vec<Complex64>,
}

impl ConvPlan {
    pub fn new(omega: &[f64], strategy: ConvStrategy) -> Result<Self> {
        let len = omega.len();
        if len == 0 {
            return Err(Error::invalid("correlation length must be at least 1"));
        }
        let use_fft = match strategy {
            ConvStrategy::Direct => false,
            ConvStrategy::Fft => true,
            ConvStrategy::Auto => len >= DIRECT_THRESHOLD,
        };
        let fft = if use_fft {
            // linear correlation of q against omega laid out over lags
            // -(L-1)..=(L-1): ext[i] = omega[(L - 1 - i) mod L]
            let size = (2 * len - 1).next_power_of_two().max(4);
            let mut ext = vec![0.0; size];
            for (i, e) in ext.iter_mut().take(2 * len - 1).enumerate() {
                *e = omega[(len - 1 + len - i % len) % len];
            }
            let radix = Radix2::new(size / 2);
            let mut spectrum = Vec::new();
            radix.forward_real(&ext, &mut spectrum);
            Some(RealCorrelator { size, radix, spectrum })
        } else {
            None
        };
        let kernel_norm = libm::sqrt(omega.iter().map(|w| w * w).sum::<f64>());
        Ok(ConvPlan {
            len,
            kernel: omega.to_vec(),
            kernel_norm,
            fft,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strategy(&self) -> ConvStrategy {
        if self.fft.is_some() {
            ConvStrategy::Fft
        } else {
            ConvStrategy::Direct
        }
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len];
        self.apply_into(q, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, q: &[f64], out: &mut [f64]) -> Result<()> {
        for got in [q.len(), out.len()] {
            if got != self.len {
                return Err(Error::LengthMismatch {
                    expected: self.len,
                    found: got,
                });
            }
        }
        match &self.fft {
            None => {
                let l = self.len;
                for (d, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (b, &qb) in q.iter().enumerate() {
                        if qb != 0.0 {
                            let idx = if b >= d { b - d } else { b + l - d };
                            acc += self.kernel[idx] * qb;
                        }
                    }
                    *o = acc;
                }
            }
            Some(c) => {
                let mut padded = vec![0.0; c.size];
                padded[..self.len].copy_from_slice(q);
                let mut freq = Vec::new();
                c.radix.forward_real(&padded, &mut freq);
                freq.iter_mut().zip(&c.spectrum).for_each(|(x, &k)| *x *= k);
                c.radix.inverse_real(&freq, &mut padded);
                out.copy_from_slice(&padded[self.len - 1..2 * self.len - 1]);
            }
        }
        Ok(())
    }

    /// A bound on the absolute rounding error of any entry of
    /// [`ConvPlan::apply`] for this `q`.
    ///
    /// FFT route: `8 eps log2(M) |q|_2 |omega_ext|_2`, the usual norm-wise
    /// bound with a safety factor. Direct route: `2 eps L |q|_1 max|omega|`.
    pub fn error_bound(&self, q: &[f64]) -> f64 {
        match &self.fft {
            Some(c) => {
                let qn = libm::sqrt(q.iter().map(|x| x * x).sum::<f64>());
                let depth = f64::from(c.size.trailing_zeros()).max(1.0);
                8.0 * f64::EPSILON * depth * qn * self.kernel_norm * core::f64::consts::SQRT_2
            }
            None => {
                let q1: f64 = q.iter().map(|x| x.abs()).sum();
                let wmax = self.kernel.iter().fold(0.0f64, |m, w| m.max(w.abs()));
                2.0 * f64::EPSILON * self.len as f64 * q1 * wmax
            }
        }
    }
}

/// One-shot circular correlation `out[d] = sum_b omega[(b - d) mod L] q[b]`.
pub fn circ_convolve(omega: &[f64], q: &[f64], strategy: ConvStrategy) -> Result<Vec<f64>> {
    if omega.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: omega.len(),
            found: q.len(),
        });
    }
    ConvPlan::new(omega, strategy)?.apply(q)
}

/// A single entry of the circular correlation, summed directly.
pub fn correlate_at(omega: &[f64], q: &[f64], d: usize) -> f64 {
    let l = omega.len();
    q.iter()
        .enumerate()
        .map(|(b, &qb)| omega[(b + l - d % l) % l] * qb)
        .sum()
}
