//! Polynomials over a prime field `F_b`.
//!
//! A polynomial `c_0 + c_1 X + ... + c_d X^d` is stored by its canonical
//! integer code `c_0 + c_1 b + ... + c_d b^d`, i.e. its value at `X = b`.
//! For `b = 2` the code is the bit-packed coefficient vector and all
//! arithmetic runs on machine words; other primes go through digit vectors.
//! Both paths give identical codes.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Largest supported prime base.
pub const MAX_BASE: u32 = 1 << 16;

/// A small prime `b`, the order of the coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeBase(u32);

impl PrimeBase {
    pub const TWO: PrimeBase = PrimeBase(2);

    pub fn new(b: u32) -> Result<Self> {
        if b < MAX_BASE && is_prime(u64::from(b)) {
            Ok(PrimeBase(b))
        } else {
            Err(Error::NotPrime(b))
        }
    }

    #[inline]
    pub const fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn is_two(self) -> bool {
        self.0 == 2
    }

    /// `b^e`, or `None` on overflow.
    pub fn pow(self, e: u32) -> Option<u64> {
        u64::from(self.0).checked_pow(e)
    }

    fn inv(self, c: u32) -> u32 {
        debug_assert!(!c.is_multiple_of(self.0));
        let b = u64::from(self.0);
        let mut base = u64::from(c) % b;
        let mut e = b - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % b;
            }
            base = base * base % b;
            e >>= 1;
        }
        acc as u32
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A polynomial over `F_b`, identified by its canonical integer code.
///
/// The base is not stored; every operation takes it explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(u64);

impl Poly {
    pub const ZERO: Poly = Poly(0);
    pub const ONE: Poly = Poly(1);

    #[inline]
    pub const fn from_code(code: u64) -> Self {
        Poly(code)
    }

    #[inline]
    pub const fn code(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The monomial `X`.
    pub fn x(base: PrimeBase) -> Self {
        Poly(u64::from(base.get()))
    }

    /// Builds a polynomial from coefficients, least significant first.
    pub fn from_coeffs(coeffs: &[u32], base: PrimeBase) -> Result<Self> {
        if coeffs.iter().any(|&c| c >= base.get()) {
            return Err(Error::invalid("coefficient out of range for base"));
        }
        generic::encode(coeffs, base.get())
            .map(Poly)
            .ok_or(Error::Overflow("polynomial code"))
    }

    /// Coefficients, least significant first, without trailing zeros.
    pub fn coeffs(self, base: PrimeBase) -> Vec<u32> {
        generic::digits(self.0, base.get())
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(self, base: PrimeBase) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        if base.is_two() {
            return Some(63 - self.0.leading_zeros());
        }
        let b = u64::from(base.get());
        let mut d = 0;
        let mut c = self.0 / b;
        while c > 0 {
            c /= b;
            d += 1;
        }
        Some(d)
    }
}

/// Coefficientwise sum mod `b`.
pub fn poly_add(a: Poly, c: Poly, base: PrimeBase) -> Poly {
    if base.is_two() {
        return Poly(a.0 ^ c.0);
    }
    let b = base.get();
    let s = generic::add(&generic::digits(a.0, b), &generic::digits(c.0, b), b);
    Poly(generic::encode(&s, b).expect("sum of codes fits"))
}

/// Coefficientwise difference mod `b`.
pub fn poly_sub(a: Poly, c: Poly, base: PrimeBase) -> Poly {
    if base.is_two() {
        return Poly(a.0 ^ c.0);
    }
    let b = base.get();
    let s = generic::sub(&generic::digits(a.0, b), &generic::digits(c.0, b), b);
    Poly(generic::encode(&s, b).expect("difference of codes fits"))
}

/// Full product, failing if the result code exceeds 64 bits.
pub fn poly_mul(a: Poly, c: Poly, base: PrimeBase) -> Result<Poly> {
    let b = base.get();
    let prod = generic::mul(&generic::digits(a.0, b), &generic::digits(c.0, b), b);
    generic::encode(&prod, b)
        .map(Poly)
        .ok_or(Error::Overflow("polynomial product"))
}

/// Remainder of `a` modulo the nonzero polynomial `m`.
pub fn poly_rem(a: Poly, m: Poly, base: PrimeBase) -> Poly {
    assert!(!m.is_zero(), "division by the zero polynomial");
    if base.is_two() {
        return Poly(binary::rem(u128::from(a.0), m.0));
    }
    let b = base.get();
    let r = generic::rem(&generic::digits(a.0, b), &generic::digits(m.0, b), b);
    Poly(generic::encode(&r, b).expect("remainder fits"))
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn poly_gcd(a: Poly, c: Poly, base: PrimeBase) -> Poly {
    if base.is_two() {
        return Poly(binary::gcd(a.0, c.0));
    }
    let b = base.get();
    let g = generic::gcd(generic::digits(a.0, b), generic::digits(c.0, b), b);
    Poly(generic::encode(&g, b).expect("gcd fits"))
}

/// `(a * c) mod p`.
pub fn poly_mulmod(a: Poly, c: Poly, m: &Modulus) -> Poly {
    m.mulmod(a, c)
}

/// `a^e mod p` by square-and-multiply.
pub fn poly_powmod(a: Poly, e: u64, m: &Modulus) -> Poly {
    m.powmod(a, e)
}

/// Rabin's irreducibility test: `p | X^{b^n} - X` and
/// `gcd(X^{b^{n/r}} - X, p) = 1` for every prime `r | n`.
pub fn is_irreducible(p: Poly, base: PrimeBase) -> bool {
    let n = match p.degree(base) {
        Some(n) if n >= 1 => n,
        _ => return false,
    };
    if n == 1 {
        return true;
    }
    if base.pow(n).is_none() {
        return false;
    }
    let m = Modulus::raw(p, base, n);
    let x = m.reduce(Poly::x(base));
    // frob[i] = X^{b^i} mod p
    let mut frob = Vec::with_capacity(n as usize + 1);
    frob.push(x);
    for i in 1..=n as usize {
        let prev = frob[i - 1];
        frob.push(m.powmod(prev, u64::from(base.get())));
    }
    if frob[n as usize] != x {
        return false;
    }
    prime_factors(u64::from(n)).into_iter().all(|r| {
        let h = poly_sub(frob[(u64::from(n) / r) as usize], x, base);
        poly_gcd(h, p, base) == Poly::ONE
    })
}

/// The irreducible polynomial of degree `n` with the smallest code.
pub fn find_irreducible(n: u32, base: PrimeBase) -> Result<Modulus> {
    if n == 0 {
        return Err(Error::invalid("modulus degree must be at least 1"));
    }
    let lo = base.pow(n).ok_or(Error::Overflow("b^n"))?;
    let hi = lo.checked_mul(2).ok_or(Error::Overflow("b^n"))?;
    (lo..hi)
        .map(Poly)
        .find(|&p| is_irreducible(p, base))
        .map(|p| Modulus::raw(p, base, n).certified())
        .ok_or_else(|| Error::invalid("no monic irreducible found"))
}

/// The generator of `(F_b[X]/p)^*` with the smallest code.
///
/// Tests the order via the distinct prime factors of `b^n - 1`.
pub fn find_generator(m: &Modulus) -> Poly {
    let order = m.group_order();
    let factors = prime_factors(order);
    (1..m.field_size())
        .map(Poly)
        .find(|&c| is_generator_with(m, c, order, &factors))
        .expect("irreducible modulus has a cyclic unit group")
}

/// Whether `g` has multiplicative order exactly `b^n - 1` modulo `p`.
pub fn is_generator(m: &Modulus, g: Poly) -> bool {
    let order = m.group_order();
    is_generator_with(m, g, order, &prime_factors(order))
}

fn is_generator_with(m: &Modulus, g: Poly, order: u64, factors: &[u64]) -> bool {
    if g.is_zero() || m.reduce(g) != g {
        return false;
    }
    m.powmod(g, order) == Poly::ONE && factors.iter().all(|&r| m.powmod(g, order / r) != Poly::ONE)
}

/// The modulus polynomial `p(X)` of degree `n` defining `F_b[X]/p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    base: PrimeBase,
    poly: Poly,
    degree: u32,
    coeffs: Vec<u32>,
    lead_inv: u32,
    irreducible: bool,
}

impl Modulus {
    /// Validates `p` as an irreducible polynomial of degree at least one.
    pub fn new(p: Poly, base: PrimeBase) -> Result<Self> {
        let n = p.degree(base).filter(|&d| d >= 1).ok_or(Error::WrongDegree {
            code: p.code(),
            expected: 1,
            found: p.degree(base),
        })?;
        if base.pow(n).is_none_or(|v| v > (1 << 62)) {
            return Err(Error::Overflow("b^n for modulus"));
        }
        if !is_irreducible(p, base) {
            return Err(Error::Reducible(p.code()));
        }
        Ok(Modulus::raw(p, base, n).certified())
    }

    /// As [`Modulus::new`], also requiring `deg(p) = n`.
    pub fn with_degree(p: Poly, base: PrimeBase, n: u32) -> Result<Self> {
        let found = p.degree(base);
        if found != Some(n) {
            return Err(Error::WrongDegree {
                code: p.code(),
                expected: n,
                found,
            });
        }
        Modulus::new(p, base)
    }

    fn raw(p: Poly, base: PrimeBase, n: u32) -> Self {
        let coeffs = p.coeffs(base);
        let lead_inv = base.inv(coeffs[n as usize]);
        Modulus {
            base,
            poly: p,
            degree: n,
            coeffs,
            lead_inv,
            irreducible: false,
        }
    }

    fn certified(mut self) -> Self {
        self.irreducible = true;
        self
    }

    pub fn base(&self) -> PrimeBase {
        self.base
    }

    pub fn poly(&self) -> Poly {
        self.poly
    }

    /// `n = deg(p)`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// `b^n`, the number of residues.
    pub fn field_size(&self) -> u64 {
        self.base.pow(self.degree).expect("checked at construction")
    }

    /// `b^n - 1`, the order of the unit group.
    pub fn group_order(&self) -> u64 {
        self.field_size() - 1
    }

    pub fn reduce(&self, a: Poly) -> Poly {
        if a.code() < self.field_size() {
            return a;
        }
        poly_rem(a, self.poly, self.base)
    }

    pub fn mulmod(&self, a: Poly, c: Poly) -> Poly {
        if self.base.is_two() && self.degree < 64 {
            let a = self.reduce(a).code();
            let c = self.reduce(c).code();
            return Poly(binary::rem(binary::clmul(a, c), self.poly.code()));
        }
        let b = self.base.get();
        let prod = generic::mul(&generic::digits(a.code(), b), &generic::digits(c.code(), b), b);
        let r = generic::rem(&prod, &self.coeffs, b);
        Poly(generic::encode(&r, b).expect("residue fits"))
    }

    pub fn powmod(&self, a: Poly, mut e: u64) -> Poly {
        let mut acc = self.reduce(Poly::ONE);
        let mut sq = self.reduce(a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mulmod(acc, sq);
            }
            e >>= 1;
            if e > 0 {
                sq = self.mulmod(sq, sq);
            }
        }
        acc
    }

    /// First `count` Laurent coefficients `u_1, u_2, ...` of `w / p`.
    ///
    /// `w` is reduced modulo `p` first; only negative powers of `X` matter.
    pub fn laurent_digits(&self, w: Poly, count: usize) -> Vec<u32> {
        let b = self.base.get();
        let n = self.degree as usize;
        let mut r = generic::digits(self.reduce(w).code(), b);
        r.resize(n + 1, 0);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            // r <- r * X; the coefficient of X^n determines the next digit
            r.rotate_right(1);
            let top = r[n];
            let u = (u64::from(top) * u64::from(self.lead_inv) % u64::from(b)) as u32;
            if u != 0 {
                for (ri, &pi) in r.iter_mut().zip(&self.coeffs) {
                    let sub = u64::from(u) * u64::from(pi) % u64::from(b);
                    *ri = ((u64::from(*ri) + u64::from(b) - sub) % u64::from(b)) as u32;
                }
            }
            debug_assert_eq!(r[n], 0);
            out.push(u);
        }
        out
    }

    /// Numerator `v` of `v_n(w / p) = v / b^digits`.
    pub fn v_n(&self, w: Poly, digits: u32) -> u64 {
        if self.base.is_two() && self.degree < 63 && digits <= 64 {
            let n = self.degree;
            let p = self.poly.code();
            let mut r = self.reduce(w).code();
            let mut v = 0u64;
            for _ in 0..digits {
                r <<= 1;
                let bit = (r >> n) & 1;
                if bit == 1 {
                    r ^= p;
                }
                v = (v << 1) | bit;
            }
            return v;
        }
        let b = u64::from(self.base.get());
        self.laurent_digits(w, digits as usize)
            .into_iter()
            .fold(0u64, |v, u| v * b + u64::from(u))
    }
}

/// `v_n(w / p)` as a numerator over `b^n`.
pub fn v_n_map(w: Poly, m: &Modulus, digits: u32) -> u64 {
    m.v_n(w, digits)
}

/// Powers of a generator and the inverse (discrete log) map.
///
/// `powers[delta] = g^delta mod p` for `0 <= delta < b^n - 1`, and
/// `logs[code]` is the exponent of the residue with that code
/// (`u32::MAX` for zero).
#[derive(Clone, Debug)]
pub struct ExpTable {
    generator: Poly,
    powers: Vec<u32>,
    logs: Vec<u32>,
}

impl ExpTable {
    pub fn new(m: &Modulus, g: Poly) -> Result<Self> {
        let size = m.field_size();
        if size > 1 << 32 {
            return Err(Error::Overflow("exp table needs b^n <= 2^32"));
        }
        let order = (size - 1) as usize;
        let g = m.reduce(g);
        if g.is_zero() {
            return Err(Error::NotGenerator(g.code()));
        }
        let mut powers = Vec::with_capacity(order);
        let mut logs = vec![u32::MAX; size as usize];
        let mut cur = Poly::ONE;
        for delta in 0..order {
            if logs[cur.code() as usize] != u32::MAX {
                return Err(Error::NotGenerator(g.code()));
            }
            powers.push(cur.code() as u32);
            logs[cur.code() as usize] = delta as u32;
            cur = m.mulmod(cur, g);
        }
        if cur != Poly::ONE {
            return Err(Error::NotGenerator(g.code()));
        }
        Ok(ExpTable {
            generator: g,
            powers,
            logs,
        })
    }

    pub fn generator(&self) -> Poly {
        self.generator
    }

    /// The group order `b^n - 1`.
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    /// `g^delta mod p`, with `delta` taken modulo the group order.
    pub fn pow(&self, delta: usize) -> Poly {
        Poly(u64::from(self.powers[delta % self.powers.len()]))
    }

    /// Discrete logarithm of a nonzero residue.
    pub fn log(&self, w: Poly) -> Option<u32> {
        self.logs.get(w.code() as usize).copied().filter(|&l| l != u32::MAX)
    }

    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    pub fn logs(&self) -> &[u32] {
        &self.logs
    }
}

/// Builds the generator lookup table.
pub fn exp_table(m: &Modulus, g: Poly) -> Result<ExpTable> {
    ExpTable::new(m, g)
}

/// Bit-packed arithmetic for `b = 2`.
pub(crate) mod binary {
    #[inline]
    pub fn clmul(a: u64, c: u64) -> u128 {
        let (mut small, big) = if a.count_ones() < c.count_ones() {
            (a, c)
        } else {
            (c, a)
        };
        let big = u128::from(big);
        let mut acc = 0u128;
        while small != 0 {
            let i = small.trailing_zeros();
            acc ^= big << i;
            small &= small - 1;
        }
        acc
    }

    #[inline]
    pub fn rem(mut x: u128, p: u64) -> u64 {
        debug_assert!(p != 0);
        let dp = 63 - p.leading_zeros();
        let p = u128::from(p);
        while x != 0 {
            let dx = 127 - x.leading_zeros();
            if dx < dp {
                break;
            }
            x ^= p << (dx - dp);
        }
        x as u64
    }

    pub fn gcd(mut a: u64, mut c: u64) -> u64 {
        while c != 0 {
            let r = rem(u128::from(a), c);
            a = c;
            c = r;
        }
        a
    }
}

/// Digit-vector arithmetic valid for any prime base.
pub(crate) mod generic {
    use alloc::vec::Vec;

    pub fn digits(mut code: u64, b: u32) -> Vec<u32> {
        let b = u64::from(b);
        let mut out = Vec::new();
        while code > 0 {
            out.push((code % b) as u32);
            code /= b;
        }
        out
    }

    pub fn encode(coeffs: &[u32], b: u32) -> Option<u64> {
        coeffs
            .iter()
            .rev()
            .try_fold(0u64, |acc, &c| acc.checked_mul(u64::from(b))?.checked_add(u64::from(c)))
    }

    fn trim(mut v: Vec<u32>) -> Vec<u32> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn add(a: &[u32], c: &[u32], b: u32) -> Vec<u32> {
        let len = a.len().max(c.len());
        let out = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0) + c.get(i).copied().unwrap_or(0);
                x % b
            })
            .collect();
        trim(out)
    }

    pub fn sub(a: &[u32], c: &[u32], b: u32) -> Vec<u32> {
        let len = a.len().max(c.len());
        let out = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0) + b - c.get(i).copied().unwrap_or(0);
                x % b
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u32], c: &[u32], b: u32) -> Vec<u32> {
        if a.is_empty() || c.is_empty() {
            return Vec::new();
        }
        let b64 = u64::from(b);
        let mut out = alloc::vec![0u64; a.len() + c.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in c.iter().enumerate() {
                out[i + j] = (out[i + j] + u64::from(x) * u64::from(y)) % b64;
            }
        }
        trim(out.into_iter().map(|x| x as u32).collect())
    }

    fn inv(c: u32, b: u32) -> u32 {
        let b64 = u64::from(b);
        let (mut acc, mut base, mut e) = (1u64, u64::from(c) % b64, b64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % b64;
            }
            base = base * base % b64;
            e >>= 1;
        }
        acc as u32
    }

    pub fn rem(a: &[u32], m: &[u32], b: u32) -> Vec<u32> {
        let m = trim(m.to_vec());
        assert!(!m.is_empty(), "division by zero polynomial");
        let dm = m.len() - 1;
        let lead_inv = u64::from(inv(m[dm], b));
        let b64 = u64::from(b);
        let mut r = trim(a.to_vec());
        while r.len() > dm {
            let top = r.len() - 1;
            let f = u64::from(r[top]) * lead_inv % b64;
            let shift = top - dm;
            for (i, &mi) in m.iter().enumerate() {
                let sub = f * u64::from(mi) % b64;
                r[shift + i] = ((u64::from(r[shift + i]) + b64 - sub) % b64) as u32;
            }
            r = trim(r);
        }
        r
    }

    pub fn gcd(mut a: Vec<u32>, mut c: Vec<u32>, b: u32) -> Vec<u32> {
        a = trim(a);
        c = trim(c);
        while !c.is_empty() {
            let r = rem(&a, &c, b);
            a = c;
            c = r;
        }
        if let Some(&lead) = a.last() {
            let li = u64::from(inv(lead, b));
            for x in a.iter_mut() {
                *x = (u64::from(*x) * li % u64::from(b)) as u32;
            }
        }
        a
    }
}
