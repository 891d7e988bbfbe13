//! The JSON run configuration.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use musielak::nfunction::{Custom, Domain, DoublePhase, LogType, Model, VariableExponent};
use musielak::{parse, Expr};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// A coefficient given as a number or as an expression in `x1 .. xn`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(f64),
    Expr(String),
}

impl Coefficient {
    fn to_expr(&self, what: &str) -> Result<Expr, CliError> {
        match self {
            Coefficient::Number(v) => Ok(Expr::Literal(*v)),
            Coefficient::Expr(s) => parse_expr(s, what),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    VariableExponent {
        p: Coefficient,
        /// Accept `inf p in (1, n]` as well.
        #[serde(default)]
        any_growth: bool,
    },
    LogType {
        p: Coefficient,
    },
    DoublePhase {
        p: f64,
        q: f64,
        alpha: Coefficient,
        /// Accept `p in (1, n]` as well.
        #[serde(default)]
        any_growth: bool,
    },
    Custom {
        #[serde(rename = "A")]
        a: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub family: FamilyConfig,
    /// Points for P3, `conjugate` and `modulus`; defaults to the domain centre.
    #[serde(default)]
    pub x: Option<Vec<Vec<f64>>>,
    /// Argument grid of `conjugate`.
    #[serde(default)]
    pub t: Option<Vec<f64>>,
    /// Radius grid of `modulus`.
    #[serde(default)]
    pub s: Option<Vec<f64>>,
    /// Grid-function expression for `norm` and `verify`.
    #[serde(default)]
    pub u: Option<String>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub pairs: Option<usize>,
    #[serde(default)]
    pub sigma0: Option<f64>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Sample count of the A-a-Young check.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Subset of checks run by `check`; all by default.
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

fn parse_expr(src: &str, what: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| {
        CliError::Config(format!(
            "{what}: cannot parse `{src}`: {e}\n  {src}\n  {}^",
            " ".repeat(e.offset())
        ))
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let d = &self.domain;
        if d.lower.len() != d.n || d.upper.len() != d.n {
            return Err(CliError::Config(format!(
                "domain: n = {} but lower has {} and upper {} coordinates",
                d.n,
                d.lower.len(),
                d.upper.len()
            )));
        }
        let n = d.n;
        let points = self.x.iter().flatten().chain(self.center.iter());
        for p in points {
            if p.len() != n {
                return Err(CliError::Config(format!(
                    "point {p:?} has {} coordinates, domain has {n}",
                    p.len()
                )));
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("tol must be positive, got {tol}")));
            }
        }
        if let Some(s) = &self.s {
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(CliError::Config("s values must be positive".to_string()));
            }
        }
        if let Some(t) = &self.t {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("t values must be finite".to_string()));
            }
        }
        if let Some(s0) = self.sigma0 {
            if s0.is_nan() || s0 <= 0.0 {
                return Err(CliError::Config(format!("sigma0 must be positive, got {s0}")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain<f64>, CliError> {
        Ok(Domain::new(self.domain.lower.clone(), self.domain.upper.clone())?)
    }

    /// Builds the model, enforcing the family's parameter bounds.
    pub fn model(&self) -> Result<Model<f64>, CliError> {
        let domain = self.domain()?;
        let model: Model<f64> = match &self.family {
            FamilyConfig::VariableExponent { p, any_growth } => {
                let p = p.to_expr("family.p")?;
                if *any_growth {
                    Arc::new(VariableExponent::any_growth(p, domain)?)
                } else {
                    Arc::new(VariableExponent::new(p, domain)?)
                }
            }
            FamilyConfig::LogType { p } => Arc::new(LogType::new(p.to_expr("family.p")?, domain)?),
            FamilyConfig::DoublePhase {
                p,
                q,
                alpha,
                any_growth,
            } => {
                let alpha = alpha.to_expr("family.alpha")?;
                if *any_growth {
                    Arc::new(DoublePhase::any_growth(*p, *q, alpha, domain)?)
                } else {
                    Arc::new(DoublePhase::new(*p, *q, alpha, domain)?)
                }
            }
            FamilyConfig::Custom { a } => Arc::new(Custom::new(parse_expr(a, "family.A")?, domain)?),
        };
        Ok(model)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.x.clone().unwrap_or_else(|| vec![self.center()])
    }

    pub fn center(&self) -> Vec<f64> {
        self.center.clone().unwrap_or_else(|| {
            self.domain
                .lower
                .iter()
                .zip(&self.domain.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect()
        })
    }

    pub fn u_expr(&self) -> Result<Expr, CliError> {
        let src = self
            .u
            .as_deref()
            .ok_or_else(|| CliError::Config("no grid function: set `u` or pass --u".to_string()))?;
        parse_expr(src, "u")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"domain": {"n": 2, "lower": [0, 0], "upper": [1, 1]},
        "family": {"tag": "variable-exponent", "p": "4 + 0.5*sin(x1)"}}"#;

    #[test]
    fn loads_minimal_config() {
        let cfg = RunConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.center(), vec![0.5, 0.5]);
        assert!(cfg.model().is_ok());
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = BASE.replace("\"p\":", "\"bogus\": 1, \"p\":");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = BASE.replace("}}", "}, \"extra\": 3}");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let bad = BASE.replace("\"n\": 2", "\"n\": 3");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn enforces_family_bounds() {
        let low = BASE.replace("4 + 0.5*sin(x1)", "1.5");
        let cfg = RunConfig::from_json(&low).unwrap();
        assert!(cfg.model().is_err());
        let any = low.replace("\"p\": \"1.5\"", "\"p\": 1.5, \"any_growth\": true");
        assert!(RunConfig::from_json(&any).unwrap().model().is_ok());
    }

    #[test]
    fn parse_errors_point_at_offset() {
        let bad = BASE.replace("4 + 0.5*sin(x1)", "4 + * 2");
        let cfg = RunConfig::from_json(&bad).unwrap();
        let msg = cfg.model().unwrap_err().to_string();
        assert!(msg.contains("    ^"), "{msg}");
    }
}
