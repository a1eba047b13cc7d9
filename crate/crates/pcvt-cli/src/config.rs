//! Experiment configuration: domain, method, batch size and seeding.
//!
//! Configurations load from a JSON file and are overridable field-by-field
//! from command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pcvt::{DeltaRule, InnerOptimizer, TorusDomain};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PCVT_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Square,
    Hexagonal,
}

/// Domain shape and size. `size` is the lattice side length; when absent the
/// square torus gets side 1 and the hexagonal torus unit area.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<f64>,
}

impl DomainSpec {
    pub fn build(&self) -> anyhow::Result<TorusDomain> {
        Ok(match (self.kind, self.size) {
            (DomainKind::Square, None) => TorusDomain::unit_square(),
            (DomainKind::Square, Some(s)) => TorusDomain::square(s)?,
            (DomainKind::Hexagonal, None) => TorusDomain::hexagonal_unit_area(),
            (DomainKind::Hexagonal, Some(s)) => TorusDomain::hexagonal(s)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSpec {
    Lloyd,
    Lbfgs { m: usize },
    Plbfgs { m: usize, t: usize },
}

impl From<InnerSpec> for InnerOptimizer {
    fn from(s: InnerSpec) -> Self {
        match s {
            InnerSpec::Lloyd => InnerOptimizer::Lloyd,
            InnerSpec::Lbfgs { m } => InnerOptimizer::Lbfgs { memory: m },
            InnerSpec::Plbfgs { m, t } => InnerOptimizer::Plbfgs { memory: m, period: t },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRuleSpec {
    FixedDelta,
    IntrinsicLengthScale,
    RandomNeighbor,
    RandomAngle,
}

impl From<DeltaRuleSpec> for DeltaRule {
    fn from(s: DeltaRuleSpec) -> Self {
        match s {
            DeltaRuleSpec::FixedDelta => DeltaRule::FixedDelta,
            DeltaRuleSpec::IntrinsicLengthScale => DeltaRule::IntrinsicLengthScale,
            DeltaRuleSpec::RandomNeighbor => DeltaRule::RandomNeighbor,
            DeltaRuleSpec::RandomAngle => DeltaRule::RandomAngle,
        }
    }
}

/// Which solver a batch runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum MethodSpec {
    Lloyd,
    Lbfgs {
        m: usize,
    },
    Plbfgs {
        m: usize,
        t: usize,
    },
    Hybrid {
        k: usize,
        q: usize,
        #[serde(default = "default_rule")]
        rule: DeltaRuleSpec,
        #[serde(default = "default_inner")]
        inner: InnerSpec,
    },
    Anneal {
        stages: usize,
        t0: f64,
        decay: f64,
        amplitude: f64,
        #[serde(default = "default_anneal_inner")]
        inner: InnerSpec,
    },
}

fn default_rule() -> DeltaRuleSpec {
    DeltaRuleSpec::FixedDelta
}

fn default_inner() -> InnerSpec {
    InnerSpec::Lloyd
}

fn default_anneal_inner() -> InnerSpec {
    InnerSpec::Lbfgs { m: 7 }
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Lloyd => "lloyd".into(),
            MethodSpec::Lbfgs { m } => format!("lbfgs({m})"),
            MethodSpec::Plbfgs { m, t } => format!("plbfgs({m},{t})"),
            MethodSpec::Hybrid { k, q, .. } => format!("hybrid(k={k},q={q})"),
            MethodSpec::Anneal { stages, .. } => format!("anneal({stages})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub n: usize,
    pub method: MethodSpec,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Convergence tolerance on `||DE||/n`; `None` for the scale-aware
    /// default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub render: bool,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Worker threads for the batch; `None` uses the rayon default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Iteration cap per solve.
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_runs() -> usize {
    1
}

fn default_epsilon() -> f64 {
    0.005
}

fn default_max_iterations() -> usize {
    1_000_000
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Output directory: explicit, else the `PCVT_OUT_DIR` environment
    /// variable, else the working directory.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."))
        })
    }

    /// Hexagonal-torus ground-state checks require an admissible n; warn
    /// otherwise (the run itself is still valid).
    pub fn admissibility_warning(&self) -> Option<String> {
        if self.domain.kind == DomainKind::Hexagonal {
            let check = crate::admissible::admissible_hex_n(self.n);
            if !check.admissible {
                return Some(format!(
                    "n = {} does not admit a perfect honeycomb (nearest admissible: {} and {})",
                    self.n,
                    check
                        .nearest_below
                        .map_or("none".to_string(), |v| v.to_string()),
                    check.nearest_above
                ));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig {
            domain: DomainSpec {
                kind: DomainKind::Hexagonal,
                size: None,
            },
            n: 973,
            method: MethodSpec::Hybrid {
                k: 6000,
                q: 10,
                rule: DeltaRuleSpec::FixedDelta,
                inner: InnerSpec::Lloyd,
            },
            runs: 100,
            master_seed: 42,
            tol: Some(1e-9),
            out_dir: None,
            render: false,
            epsilon: 0.005,
            threads: None,
            max_iterations: 1_000_000,
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.n, 973);
        assert_eq!(back.master_seed, 42);
        assert!(matches!(back.method, MethodSpec::Hybrid { k: 6000, q: 10, .. }));
    }

    #[test]
    fn sparse_json_uses_defaults() {
        let text = r#"{
            "domain": {"kind": "square"},
            "n": 10,
            "method": {"name": "lloyd"}
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.runs, 1);
        assert_eq!(cfg.epsilon, 0.005);
        assert_eq!(cfg.master_seed, 0);
    }
}
