//! Point sets of polynomial lattice rules and digital nets, generating
//! matrices, and interlacing.

use alloc::vec;
use alloc::vec::Vec;

use crate::cbc::LatticeRule;
use crate::gfpoly::{Modulus, Poly, PrimeBase};
use crate::{Error, Result};

/// An `rows x cols` matrix over `F_b`, row-major. Row `k` produces output
/// digit `k + 1`; column `l` reads input digit `l` of the point index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenMatrix {
    rows: usize,
    cols: usize,
    base: PrimeBase,
    data: Vec<u32>,
}

impl GenMatrix {
    pub fn new(rows: usize, cols: usize, base: PrimeBase, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|&d| d >= base.get()) {
            return Err(Error::invalid("matrix entries must be digits below b"));
        }
        Ok(GenMatrix { rows, cols, base, data })
    }

    pub fn zeros(rows: usize, cols: usize, base: PrimeBase) -> Self {
        GenMatrix {
            rows,
            cols,
            base,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(size: usize, base: PrimeBase) -> Self {
        let mut m = Self::zeros(size, size, base);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn base(&self) -> PrimeBase {
        self.base
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// Numerator over `b^rows` of the coordinate for point index `h`.
    pub fn apply(&self, h: u64) -> u64 {
        let b = self.base.get();
        let mut eta = [0u32; 64];
        let mut rest = h;
        for e in eta.iter_mut().take(self.cols) {
            *e = (rest % u64::from(b)) as u32;
            rest /= u64::from(b);
        }
        let mut v = 0u64;
        for r in 0..self.rows {
            let y = self
                .row(r)
                .iter()
                .zip(&eta)
                .fold(0u64, |acc, (&c, &e)| acc + u64::from(c) * u64::from(e))
                % u64::from(b);
            v = v * u64::from(b) + y;
        }
        v
    }
}

/// `b^m` points in `s` dimensions, stored as numerators over `b^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    base: PrimeBase,
    m: u32,
    n: u32,
    dim: usize,
    data: Vec<u64>,
}

impl PointSet {
    /// `data[h * dim + j]` is coordinate `j` of point `h`.
    pub fn new(base: PrimeBase, m: u32, n: u32, dim: usize, data: Vec<u64>) -> Result<Self> {
        let count = base.pow(m).ok_or(Error::Overflow("b^m"))? as usize;
        let bound = base.pow(n).ok_or(Error::Overflow("b^n"))?;
        if data.len() != count * dim {
            return Err(Error::LengthMismatch {
                expected: count * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|&v| v >= bound) {
            return Err(Error::invalid("numerators must be below b^n"));
        }
        Ok(PointSet { base, m, n, dim, data })
    }

    pub fn base(&self) -> PrimeBase {
        self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            self.base.pow(self.m).unwrap_or(0) as usize
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, h: usize) -> &[u64] {
        &self.data[h * self.dim..(h + 1) * self.dim]
    }

    pub fn numerators(&self) -> &[u64] {
        &self.data
    }

    pub fn coord_f64(&self, h: usize, j: usize) -> f64 {
        let v = self.data[h * self.dim + j] as f64;
        if self.base.is_two() {
            libm::ldexp(v, -(self.n as i32))
        } else {
            v / libm::pow(f64::from(self.base.get()), f64::from(self.n))
        }
    }

    /// The first `d` coordinates of every point.
    pub fn project(&self, d: usize) -> PointSet {
        let d = d.min(self.dim);
        let data = self
            .data
            .chunks_exact(self.dim.max(1))
            .flat_map(|p| p[..d].iter().copied())
            .collect();
        PointSet {
            base: self.base,
            m: self.m,
            n: self.n,
            dim: d,
            data,
        }
    }
}

/// Points `v_n(h(X) q_j(X) / p(X))` for `0 <= h < b^m`.
pub fn polynomial_lattice_points(modulus: &Modulus, m: u32, q: &[Poly]) -> Result<PointSet> {
    let base = modulus.base();
    let n = modulus.degree();
    if m > n {
        return Err(Error::invalid("m must not exceed deg(p)"));
    }
    let count = base.pow(m).ok_or(Error::Overflow("b^m"))?;
    let field = modulus.field_size();
    if q.iter().any(|qj| qj.is_zero() || qj.code() >= field) {
        return Err(Error::NotInGroup(
            q.iter().find(|qj| qj.is_zero() || qj.code() >= field).unwrap().code(),
        ));
    }
    let mut data = Vec::with_capacity(count as usize * q.len());
    for h in 0..count {
        let hp = Poly::from_code(h);
        for &qj in q {
            data.push(modulus.v_n(modulus.mulmod(hp, qj), n));
        }
    }
    PointSet::new(base, m, n, q.len(), data)
}

/// Point set of a constructed rule.
pub fn lattice_points(rule: &LatticeRule) -> Result<PointSet> {
    polynomial_lattice_points(&rule.modulus()?, rule.m, &rule.q)
}

/// `n x m` matrices `c_{k,l} = u_{k+l-1}` from the Laurent expansion of `q_j / p`.
pub fn polynomial_lattice_matrices(modulus: &Modulus, m: u32, q: &[Poly]) -> Result<Vec<GenMatrix>> {
    let n = modulus.degree() as usize;
    let m = m as usize;
    if m > n {
        return Err(Error::invalid("m must not exceed deg(p)"));
    }
    let field = modulus.field_size();
    q.iter()
        .map(|&qj| {
            if qj.is_zero() || qj.code() >= field {
                return Err(Error::NotInGroup(qj.code()));
            }
            let u = modulus.laurent_digits(qj, n + m - 1);
            let data = (0..n)
                .flat_map(|k| (0..m).map(move |l| (k, l)))
                .map(|(k, l)| u[k + l])
                .collect();
            GenMatrix::new(n, m, modulus.base(), data)
        })
        .collect()
}

/// Generating matrices of a constructed rule.
pub fn lattice_matrices(rule: &LatticeRule) -> Result<Vec<GenMatrix>> {
    polynomial_lattice_matrices(&rule.modulus()?, rule.m, &rule.q)
}

/// Digital net generated by `matrices` (all of the same shape and base).
pub fn digitalnet_points(matrices: &[GenMatrix]) -> Result<PointSet> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::invalid("at least one generating matrix is needed"))?;
    let (rows, cols, base) = (first.rows, first.cols, first.base);
    if let Some(bad) = matrices
        .iter()
        .find(|c| c.rows != rows || c.cols != cols || c.base != base)
    {
        return Err(Error::invalid(alloc::format!(
            "matrix shape {}x{} does not match {}x{}",
            bad.rows,
            bad.cols,
            rows,
            cols
        )));
    }
    if cols > 64 || rows > 63 {
        return Err(Error::invalid("matrices are limited to 63 rows and 64 columns"));
    }
    let count = base.pow(cols as u32).ok_or(Error::Overflow("b^m"))?;
    let mut data = Vec::with_capacity(count as usize * matrices.len());
    for h in 0..count {
        data.extend(matrices.iter().map(|c| c.apply(h)));
    }
    PointSet::new(base, cols as u32, rows as u32, matrices.len(), data)
}

/// Interlaces groups of `d` square `m x m` matrices into `dm x m` matrices:
/// output row `r d + t` is row `r` of the `t`-th matrix in the group.
/// With `keep_rows = Some(k)` only the first `k` rows are kept.
pub fn interlace(matrices: &[GenMatrix], d: usize, keep_rows: Option<usize>) -> Result<Vec<GenMatrix>> {
    if d == 0 || !matrices.len().is_multiple_of(d) {
        return Err(Error::invalid("matrix count must be a positive multiple of d"));
    }
    let Some(first) = matrices.first() else {
        return Ok(Vec::new());
    };
    let m = first.cols;
    if matrices
        .iter()
        .any(|c| c.rows != m || c.cols != m || c.base != first.base)
    {
        return Err(Error::Unsupported(
            "interlacing needs square m x m matrices of one base".into(),
        ));
    }
    let rows = keep_rows.unwrap_or(d * m);
    if rows > d * m {
        return Err(Error::invalid("cannot keep more rows than d * m"));
    }
    Ok(matrices
        .chunks_exact(d)
        .map(|group| {
            let mut data = Vec::with_capacity(rows * m);
            for out_row in 0..rows {
                data.extend_from_slice(group[out_row % d].row(out_row / d));
            }
            GenMatrix {
                rows,
                cols: m,
                base: first.base,
                data,
            }
        })
        .collect())
}
