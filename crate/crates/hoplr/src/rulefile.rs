//! JSON rule files.
//!
//! Integers are written in decimal and reals in shortest round-trip form, so
//! a rule read back and written again is byte-identical.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hoplr_core::cbc::LatticeRule;
use hoplr_core::gfpoly::{Modulus, Poly, PrimeBase};
use hoplr_core::pointgen::{polynomial_lattice_points, PointSet};
use hoplr_core::walsh::Smoothness;
use hoplr_core::wce::{wce_prefix_errors, WeightSequence};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const TIE_BREAK: &str = "min-q-code";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsField {
    List(Vec<f64>),
    Kind { kind: String, param: Option<f64> },
}

impl WeightsField {
    pub fn from_sequence(w: &WeightSequence) -> Self {
        match w {
            WeightSequence::Geometric(c) => WeightsField::Kind {
                kind: "geom".into(),
                param: Some(*c),
            },
            WeightSequence::PolyDecay => WeightsField::Kind {
                kind: "polydecay".into(),
                param: None,
            },
            WeightSequence::Explicit(v) => WeightsField::List(v.clone()),
        }
    }

    pub fn to_sequence(&self) -> Result<WeightSequence> {
        match self {
            WeightsField::List(v) => Ok(WeightSequence::Explicit(v.clone())),
            WeightsField::Kind { kind, param } => match (kind.as_str(), param) {
                ("geom", Some(c)) => Ok(WeightSequence::Geometric(*c)),
                ("polydecay", None) => Ok(WeightSequence::PolyDecay),
                _ => bail!("unknown weights {{kind: {kind:?}, param: {param:?}}}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    pub schema_version: u32,
    pub b: u32,
    pub m: u32,
    pub n: u32,
    pub alpha: u32,
    pub p: u64,
    pub q: Vec<u64>,
    pub weights: WeightsField,
    pub errors: Vec<f64>,
    pub generator_g: u64,
    pub tie_break: String,
}

impl RuleFile {
    pub fn from_rule(rule: &LatticeRule) -> Self {
        RuleFile {
            schema_version: SCHEMA_VERSION,
            b: rule.base.get(),
            m: rule.m,
            n: rule.n,
            alpha: rule.alpha,
            p: rule.p.code(),
            q: rule.q.iter().map(|q| q.code()).collect(),
            weights: WeightsField::from_sequence(&rule.weight_spec),
            errors: rule.errors.clone(),
            generator_g: rule.generator.code(),
            tie_break: TIE_BREAK.into(),
        }
    }

    /// Checks the fields and rebuilds the rule. `errors` may be shorter than
    /// `q` (or empty) for rules that have not been evaluated.
    pub fn to_rule(&self) -> Result<LatticeRule> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {}",
            self.schema_version
        );
        ensure!(self.tie_break == TIE_BREAK, "unknown tie_break {:?}", self.tie_break);
        let base = PrimeBase::new(self.b)?;
        let modulus = Modulus::with_degree(Poly::from_code(self.p), base, self.n)?;
        ensure!(modulus.is_irreducible(), "p = {} is reducible", self.p);
        Smoothness::new(self.alpha)?;
        ensure!(self.m >= 1 && self.m <= self.n, "need 1 <= m <= n");
        ensure!(!self.q.is_empty(), "rule has no generating polynomials");
        let size = modulus.field_size();
        for &q in &self.q {
            ensure!(q != 0 && q < size, "q = {q} is not a nonzero residue mod p");
        }
        ensure!(self.errors.len() <= self.q.len(), "more errors than dimensions");
        let weight_spec = self.weights.to_sequence()?;
        let weights = weight_spec.materialize(self.q.len())?;
        Ok(LatticeRule {
            base,
            m: self.m,
            n: self.n,
            alpha: self.alpha,
            p: modulus.poly(),
            q: self.q.iter().map(|&c| Poly::from_code(c)).collect(),
            weight_spec,
            weights,
            errors: self.errors.clone(),
            generator: Poly::from_code(self.generator_g),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("rule files always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Points of a rule.
pub fn rule_points(rule: &LatticeRule) -> Result<PointSet> {
    Ok(polynomial_lattice_points(&rule.modulus()?, rule.m, &rule.q)?)
}

/// `e_1, ..., e_s` of a rule recomputed from its points.
pub fn rule_errors(rule: &LatticeRule) -> Result<Vec<f64>> {
    let points = rule_points(rule)?;
    Ok(wce_prefix_errors(&points, rule.smoothness()?, &rule.weights)?.errors)
}
