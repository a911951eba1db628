//! Experiment configuration: a TOML file selecting a construction kind and
//! its parameters. Kind-specific completeness is validated before any
//! build runs.

use anyhow::{anyhow, bail, Context, Result};
use deepapprox::combinators::CompositionPlan;
use deepapprox::multivariate::MultiIndex;
use deepapprox::target::{self, ApproxTarget};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub alpha: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// square | polynomial | smooth | sum | product | compose | ridge |
    /// gaussian | linear_product | multinomial | poly_chain
    pub kind: String,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub resolution: Option<u32>,
    /// registry target for `smooth` and `gap`
    pub name: Option<String>,
    /// polynomial coefficients a_0..a_p
    pub coeffs: Option<Vec<f64>>,
    /// registry targets for `sum` / `product`
    pub targets: Option<Vec<String>>,
    /// combination weights for `sum`
    pub beta: Option<Vec<f64>>,
    /// cascade stages for `compose` / `poly_chain`, outermost first
    pub chain: Option<Vec<String>>,
    /// ridge direction
    pub a: Option<Vec<f64>>,
    /// ridge profile target
    pub target: Option<String>,
    /// input dimension for `gaussian` / `multinomial` / `poly_chain`
    pub dim: Option<usize>,
    /// linear-form rows for `linear_product`
    pub rows: Option<Vec<Vec<f64>>>,
    /// monomial terms for `multinomial` / `poly_chain`
    pub terms: Option<Vec<TermSpec>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn eps(&self) -> Result<f64> {
        self.eps
            .ok_or_else(|| anyhow!("config needs `eps` for kind `{}`", self.kind))
    }

    pub fn eps_list(&self) -> Result<Vec<f64>> {
        if let Some(list) = &self.eps_list {
            if list.is_empty() {
                bail!("eps_list must not be empty");
            }
            return Ok(list.clone());
        }
        Ok(vec![self.eps()?])
    }

    pub fn lookup_target(&self, name: &str) -> Result<ApproxTarget> {
        target::by_name(name).ok_or_else(|| anyhow!("unknown target `{name}`"))
    }

    pub fn chain_plan(&self) -> Result<CompositionPlan> {
        let names = self
            .chain
            .as_ref()
            .ok_or_else(|| anyhow!("kind `{}` needs `chain`", self.kind))?;
        let stages = names
            .iter()
            .map(|n| self.lookup_target(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompositionPlan::new(stages))
    }

    pub fn term_list(&self) -> Result<Vec<(MultiIndex, f64)>> {
        let terms = self
            .terms
            .as_ref()
            .ok_or_else(|| anyhow!("kind `{}` needs `terms`", self.kind))?;
        Ok(terms
            .iter()
            .map(|t| (MultiIndex(t.alpha.clone()), t.coeff))
            .collect())
    }

    fn validate(&self) -> Result<()> {
        let need = |cond: bool, what: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                bail!("kind `{}` needs `{}`", self.kind, what)
            }
        };
        match self.kind.as_str() {
            "square" => {}
            "polynomial" => need(self.coeffs.is_some(), "coeffs")?,
            "smooth" => need(self.name.is_some(), "name")?,
            "sum" => {
                need(self.targets.is_some(), "targets")?;
                need(self.beta.is_some(), "beta")?;
            }
            "product" => need(self.targets.is_some(), "targets")?,
            "compose" => need(self.chain.is_some(), "chain")?,
            "ridge" => {
                need(self.a.is_some(), "a")?;
                need(self.target.is_some(), "target")?;
            }
            "gaussian" => need(self.dim.is_some(), "dim")?,
            "linear_product" => need(self.rows.is_some(), "rows")?,
            "multinomial" => {
                need(self.terms.is_some(), "terms")?;
                need(self.dim.is_some(), "dim")?;
            }
            "poly_chain" => {
                need(self.terms.is_some(), "terms")?;
                need(self.dim.is_some(), "dim")?;
                need(self.chain.is_some(), "chain")?;
            }
            other => bail!("unknown kind `{other}`"),
        }
        Ok(())
    }
}
