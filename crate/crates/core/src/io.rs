//! Text formats: network JSON (1-based supplier indices) and parameter
//! config JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result, ScnError};
use crate::model::{to_zero_based, HeteroParams, ModelParams, Network};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tiers: Option<Vec<usize>>,
    links: Value,
}

/// Parses `{"n":2,"m":2,"links":[[1],[1,2]]}`. With a `"tiers"` array the
/// links are nested one level deeper, one layer per tier boundary.
pub fn parse_network(text: &str) -> Result<Network> {
    let file: NetworkFile =
        serde_json::from_str(text).map_err(|e| ScnError::Malformed(format!("network file: {e}")))?;
    let tiers = file.tiers.clone().unwrap_or_else(|| vec![file.n, file.m]);
    if tiers.len() < 2 || tiers[0] != file.n || *tiers.last().unwrap() != file.m {
        return Err(invalid("tiers", "must start with n and end with m"));
    }
    let layers: Vec<Vec<Vec<usize>>> = if file.tiers.is_some() {
        serde_json::from_value(file.links)
    } else {
        serde_json::from_value(file.links).map(|l| vec![l])
    }
    .map_err(|e| ScnError::Malformed(format!("links: {e}")))?;
    if layers.len() != tiers.len() - 1 {
        return Err(ScnError::Malformed(format!(
            "{} tiers need {} link layers, got {}",
            tiers.len(),
            tiers.len() - 1,
            layers.len()
        )));
    }
    let mut zero_based = Vec::with_capacity(layers.len());
    for (t, layer) in layers.iter().enumerate() {
        if layer.len() != tiers[t] {
            return Err(ScnError::WrongAgentCount {
                tier: t + 1,
                expected: tiers[t],
                actual: layer.len(),
            });
        }
        let converted = layer
            .iter()
            .enumerate()
            .map(|(i, set)| to_zero_based(t, i, set, tiers[t + 1]))
            .collect::<Result<Vec<_>>>()?;
        zero_based.push(converted);
    }
    Network::multi_tier(tiers, zero_based)
}

fn network_file(net: &Network) -> NetworkFile {
    let one_based = net.to_one_based();
    NetworkFile {
        n: net.n(),
        m: *net.tiers().last().expect("at least two tiers"),
        tiers: (!net.is_two_tier()).then(|| net.tiers().to_vec()),
        links: if net.is_two_tier() {
            serde_json::json!(one_based[0])
        } else {
            serde_json::json!(one_based)
        },
    }
}

/// Serialises a network in the file format; two-tier networks omit
/// `"tiers"`.
pub fn network_to_json(net: &Network) -> Value {
    serde_json::to_value(network_file(net)).expect("plain data serialises")
}

pub fn write_network(net: &Network) -> String {
    serde_json::to_string(&network_file(net)).expect("plain data serialises")
}

/// Every field a parameter config file may carry; absent fields fall back
/// to command-line flags or defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub tiers: Option<Vec<usize>>,
    pub d: Option<f64>,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda_r: Option<f64>,
    pub lambda_sup: Option<Vec<f64>>,
    pub gamma_sup: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ScnError::Malformed(format!("config file: {e}")))
    }

    /// Fields of `over` replace fields of `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            tiers: over.tiers.or(self.tiers),
            d: over.d.or(self.d),
            lambda: over.lambda.or(self.lambda),
            c: over.c.or(self.c),
            gamma: over.gamma.or(self.gamma),
            lambda_r: over.lambda_r.or(self.lambda_r),
            lambda_sup: over.lambda_sup.or(self.lambda_sup),
            gamma_sup: over.gamma_sup.or(self.gamma_sup),
        }
    }

    fn require<T: Copy>(value: Option<T>, name: &'static str) -> Result<T> {
        value.ok_or_else(|| invalid(name, "missing"))
    }

    /// Homogeneous parameters; `d`, `c` and `gamma` default to 1, 0 and 0.
    pub fn model_params(&self) -> Result<ModelParams> {
        let p = ModelParams {
            n: Self::require(self.n, "n")?,
            m: Self::require(self.m, "m")?,
            tiers: self.tiers.clone(),
            demand: self.d.unwrap_or(1.0),
            lambda: Self::require(self.lambda, "lambda")?,
            c: self.c.unwrap_or(0.0),
            gamma: self.gamma.unwrap_or(0.0),
        };
        p.validate()?;
        Ok(p)
    }

    /// Heterogeneous parameters. Missing arrays are filled from `lambda`
    /// and `gamma`; a missing `lambda_r` falls back to `lambda`.
    pub fn hetero_params(&self) -> Result<HeteroParams> {
        let n = Self::require(self.n, "n")?;
        let m = Self::require(self.m, "m")?;
        let lambda_r = match self.lambda_r.or(self.lambda) {
            Some(l) => l,
            None => return Err(invalid("lambda_r", "missing")),
        };
        let lambda_sup = match (&self.lambda_sup, self.lambda) {
            (Some(v), _) => v.clone(),
            (None, Some(l)) => vec![l; m],
            (None, None) => return Err(invalid("lambda_sup", "missing")),
        };
        let gamma_sup = self
            .gamma_sup
            .clone()
            .unwrap_or_else(|| vec![self.gamma.unwrap_or(0.0); m]);
        let h = HeteroParams {
            n,
            m,
            demand: self.d.unwrap_or(1.0),
            c: self.c.unwrap_or(0.0),
            lambda_r,
            lambda_sup,
            gamma_sup,
        };
        h.validate()?;
        Ok(h)
    }
}
