//! Checks against the published tables.
//!
//! The published errors are cut, not rounded, after their last printed
//! digit: `3.399691e-2` appears as `3.39e-2`. A printed value `v` with last
//! place `u` therefore stands for the interval `[v, v + u)`.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use hoplr_core::cbc::{Budget, LatticeRule};
use hoplr_core::gfpoly::{Modulus, Poly, PrimeBase};
use hoplr_core::pointgen::{digitalnet_points, interlace, polynomial_lattice_points, GenMatrix};
use hoplr_core::walsh::Smoothness;
use hoplr_core::wce::{wce_prefix_errors, WeightSequence};

use crate::construct::{construct, resolve_modulus, Algorithm, ConstructParams};
use crate::fixtures::{PublishedTable, COMPARISON_DIM, COMPARISON_GEOM, COMPARISON_POLYDECAY};
use crate::rulefile::{WeightsField, TIE_BREAK};

/// Relative slack for decimal-to-binary conversion of printed values.
pub const PRINT_SLACK: f64 = 1e-12;

/// Allowed excess of a constructed error over the published one.
pub const CBC_SLACK: f64 = 1e-3;

pub const TABLE_WEIGHTS: WeightSequence = WeightSequence::Geometric(0.9);

/// A printed decimal and the unit of its last digit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Printed {
    pub value: f64,
    pub unit: f64,
}

impl Printed {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (
                &t[..i],
                t[i + 1..]
                    .parse::<i32>()
                    .with_context(|| format!("bad exponent in {t:?}"))?,
            ),
            None => (t, 0),
        };
        let decimals = mantissa.find('.').map_or(0, |i| mantissa.len() - i - 1) as i32;
        let value: f64 = t.parse().with_context(|| format!("bad number {t:?}"))?;
        Ok(Printed {
            value,
            unit: 10f64.powi(exp - decimals),
        })
    }

    pub fn upper(&self) -> f64 {
        self.value + self.unit
    }

    /// `x` lies in `[value, value + unit)`, up to [`PRINT_SLACK`].
    pub fn matches(&self, x: f64) -> bool {
        x >= self.value * (1.0 - PRINT_SLACK) && x < self.upper() * (1.0 + PRINT_SLACK)
    }

    /// `x` is at most the largest value that prints this way, times `1 + rel`.
    pub fn not_above(&self, x: f64, rel: f64) -> bool {
        x <= self.upper() * (1.0 + rel)
    }
}

/// Cuts `x` to `digits` significant digits, e.g. `cut(0.034, 2) = "3.4e-2"`.
pub fn cut(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.16e}");
    let (mant, exp) = s.split_once('e').expect("scientific format");
    let keep = if digits > 1 { digits + 1 } else { 1 };
    format!("{}e{}", &mant[..keep + usize::from(x < 0.0)], exp)
}

pub fn table_modulus(t: &PublishedTable) -> Result<Modulus> {
    Ok(Modulus::with_degree(Poly::from_code(t.p), PrimeBase::TWO, t.n())?)
}

/// `e_1..e_10` of the published rule.
pub fn evaluate_table(t: &PublishedTable) -> Result<Vec<f64>> {
    let md = table_modulus(t)?;
    let q: Vec<Poly> = t.q.iter().map(|&c| Poly::from_code(c)).collect();
    let points = polynomial_lattice_points(&md, t.m, &q)?;
    let w = TABLE_WEIGHTS.materialize(q.len())?;
    Ok(wce_prefix_errors(&points, Smoothness::new(t.alpha)?, &w)?.errors)
}

/// Fast CBC with the table's modulus and weights.
pub fn construct_table(t: &PublishedTable, budget: Budget, threads: usize) -> Result<LatticeRule> {
    construct(
        &ConstructParams {
            b: 2,
            m: t.m,
            alpha: t.alpha,
            s: t.q.len(),
            p: t.p,
            weights: WeightsField::from_sequence(&TABLE_WEIGHTS),
            algorithm: Algorithm::Fast,
            tie_break: TIE_BREAK.into(),
        },
        budget,
        threads,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub d: usize,
    pub printed: Printed,
    pub text: &'static str,
    pub computed: f64,
    pub pass: bool,
}

pub fn eval_rows(t: &PublishedTable, computed: &[f64]) -> Result<Vec<Row>> {
    rows(t, computed, |p, x| p.matches(x))
}

pub fn cbc_rows(t: &PublishedTable, computed: &[f64]) -> Result<Vec<Row>> {
    rows(t, computed, |p, x| p.not_above(x, CBC_SLACK))
}

fn rows(t: &PublishedTable, computed: &[f64], ok: impl Fn(&Printed, f64) -> bool) -> Result<Vec<Row>> {
    ensure!(computed.len() == t.e.len(), "expected {} errors", t.e.len());
    t.e.iter()
        .zip(computed)
        .enumerate()
        .map(|(i, (&text, &x))| {
            let printed = Printed::parse(text)?;
            Ok(Row {
                d: i + 1,
                printed,
                text,
                computed: x,
                pass: ok(&printed, x),
            })
        })
        .collect()
}

pub fn format_rows(title: &str, rows: &[Row], q: Option<&[u64]>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(
        s,
        "{:>3}  {:>10}  {:>14}  {:>8}  {:>10}  result",
        "d", "printed", "computed", "cut", "q"
    );
    for r in rows {
        let qd = q.map_or(String::from("-"), |q| q[r.d - 1].to_string());
        let _ = writeln!(
            s,
            "{:>3}  {:>10}  {:>14.6e}  {:>8}  {:>10}  {}",
            r.d,
            r.text,
            r.computed,
            cut(r.computed, 3),
            qd,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    s
}

pub fn table_header(t: &PublishedTable) -> String {
    format!(
        "table {}: b=2 m={} alpha={} n={} p={} weights geom:0.9",
        t.id,
        t.m,
        t.alpha,
        t.n(),
        t.p
    )
}

/// One line of the CBC-versus-explicit comparison for a supplied net.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonLine {
    pub weights: &'static str,
    pub m: u32,
    pub published_cbc: Option<&'static str>,
    pub published_explicit: Option<&'static str>,
    pub cbc: f64,
    pub explicit: f64,
}

impl ComparisonLine {
    pub fn cbc_wins(&self) -> bool {
        self.cbc <= self.explicit
    }
}

/// Interlaces `2s` square `m x m` matrices with factor 2 and evaluates the
/// resulting order-2 net in `s` dimensions.
pub fn explicit_errors(matrices: &[GenMatrix], weights: &WeightSequence) -> Result<Vec<f64>> {
    let first = matrices.first().context("no matrices")?;
    ensure!(first.rows() == first.cols(), "interlacing needs square matrices");
    ensure!(matrices.len().is_multiple_of(2), "need an even number of matrices");
    let inter = interlace(matrices, 2, None)?;
    let points = digitalnet_points(&inter)?;
    let w = weights.materialize(inter.len())?;
    Ok(wce_prefix_errors(&points, Smoothness::new(2)?, &w)?.errors)
}

/// Compares CBC rules (smallest-code modulus of degree `2m`) with the
/// interlaced net built from `matrices`, for both weight choices.
pub fn comparison(matrices: &[GenMatrix], budget: Budget, threads: usize) -> Result<Vec<ComparisonLine>> {
    let first = matrices.first().context("no matrices")?;
    let m = u32::try_from(first.cols())?;
    if matrices.len() != 2 * COMPARISON_DIM {
        bail!("expected {} matrices, found {}", 2 * COMPARISON_DIM, matrices.len());
    }
    ensure!(first.base() == PrimeBase::TWO, "the comparison is in base 2");
    let md = resolve_modulus(PrimeBase::TWO, 2 * m, None)?;
    let mut out = Vec::new();
    for (name, w, rows) in [
        ("geom:0.9", WeightSequence::Geometric(0.9), &COMPARISON_GEOM),
        ("polydecay", WeightSequence::PolyDecay, &COMPARISON_POLYDECAY),
    ] {
        let rule = construct(
            &ConstructParams {
                b: 2,
                m,
                alpha: 2,
                s: COMPARISON_DIM,
                p: md.poly().code(),
                weights: WeightsField::from_sequence(&w),
                algorithm: Algorithm::Fast,
                tie_break: TIE_BREAK.into(),
            },
            budget,
            threads,
        )?;
        let explicit = explicit_errors(matrices, &w)?;
        let row = rows.iter().find(|r| r.m == m);
        out.push(ComparisonLine {
            weights: name,
            m,
            published_cbc: row.map(|r| r.cbc),
            published_explicit: row.map(|r| r.explicit),
            cbc: *rule.errors.last().expect("s >= 1"),
            explicit: *explicit.last().expect("s >= 1"),
        });
    }
    Ok(out)
}

pub fn format_comparison(lines: &[ComparisonLine]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>10}  {:>3}  {:>10}  {:>12}  {:>10}  {:>12}  cbc <= explicit",
        "weights", "m", "pub. cbc", "cbc", "pub. expl", "explicit"
    );
    for l in lines {
        let _ = writeln!(
            s,
            "{:>10}  {:>3}  {:>10}  {:>12.6e}  {:>10}  {:>12.6e}  {}",
            l.weights,
            l.m,
            l.published_cbc.unwrap_or("-"),
            l.cbc,
            l.published_explicit.unwrap_or("-"),
            l.explicit,
            if l.cbc_wins() { "yes" } else { "no" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::table;

    #[test]
    fn printed_units() {
        let p = Printed::parse("3.39e-2").unwrap();
        assert!((p.unit - 1e-4).abs() < 1e-18);
        assert!(p.matches(3.399691e-2));
        assert!(!p.matches(3.4001e-2));
        assert!(!p.matches(3.3899e-2));
        let p = Printed::parse("1.60").unwrap();
        assert!((p.unit - 0.01).abs() < 1e-15);
        assert!(p.matches(1.606768));
        let p = Printed::parse("0.000014").unwrap();
        assert!((p.unit - 1e-6).abs() < 1e-20);
        assert!(Printed::parse("x").is_err());
    }

    #[test]
    fn cbc_tolerance_uses_the_upper_end() {
        let p = Printed::parse("5.24e-4").unwrap();
        assert!(p.not_above(5.247099e-4, CBC_SLACK));
        assert!(!p.not_above(5.26e-4, CBC_SLACK));
    }

    #[test]
    fn cut_digits() {
        assert_eq!(cut(3.399691e-2, 3), "3.39e-2");
        assert_eq!(cut(1.606768, 3), "1.60e0");
        assert_eq!(cut(4.089920e-1, 3), "4.08e-1");
        assert_eq!(cut(9.9999999e-3, 3), "9.99e-3");
        assert_eq!(cut(7.0, 1), "7e0");
    }

    #[test]
    fn small_table_evaluates() {
        let t = table("3a").unwrap();
        let e = evaluate_table(t).unwrap();
        let rows = eval_rows(t, &e).unwrap();
        assert!(rows.iter().all(|r| r.pass), "{}", format_rows("3a", &rows, None));
    }
}
