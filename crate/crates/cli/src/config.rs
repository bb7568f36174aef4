//! Scenario configuration: one JSON document per scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lossrate::expansion::DEFAULT_ORDER_CAP;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Stem for every output file.
    pub name: String,
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "default_order_cap")]
    pub order_cap: usize,
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub compare: CompareConfig,
    /// Largest accepted max-abs error per column, e.g. `"sigmax_engine_order1"`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_orders() -> Vec<usize> {
    vec![0, 1, 2]
}

fn default_order_cap() -> usize {
    DEFAULT_ORDER_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    TwoLevel {
        omega: f64,
        gamma: f64,
        #[serde(default)]
        initial: QubitInitial,
    },
    Cavity {
        omega_f: f64,
        kappa: f64,
        fock_dim: usize,
        initial: CavityInitial,
    },
    Jc {
        omega_f: f64,
        omega_a: f64,
        g: f64,
        gamma: f64,
        kappa: f64,
        fock_dim: usize,
        /// Start in `|e, n⟩`.
        #[serde(default)]
        n: usize,
    },
    Dicke {
        n: usize,
        m: usize,
        omega: f64,
        /// Either a temperature or explicit `k`/`g`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        temperature: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<f64>,
    },
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::TwoLevel { .. } => "two-level",
            Self::Cavity { .. } => "cavity",
            Self::Jc { .. } => "jc",
            Self::Dicke { .. } => "dicke",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitInitial {
    #[default]
    Excited,
    Ground,
    PlusX,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum CavityInitial {
    /// `|n⟩⟨n|`.
    Fock(usize),
    /// Real amplitudes over `|0⟩, |1⟩, …`; normalized on use.
    Amplitudes(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    /// Defaults to the solver's step ceilings for the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// A named operator (`sigmax`, `sigmay`, `sigmaz`, `population`, `n`,
/// `fidelity`) or an atom observable `λ⁺σ⁺ + λ⁻σ⁻ + λᶻσz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(String),
    Atom {
        name: String,
        lambda_plus: [f64; 2],
        lambda_minus: [f64; 2],
        lambda_z: f64,
    },
}

impl ObservableSpec {
    pub fn name(&self) -> &str {
        match self {
            Self::Named(n) => n,
            Self::Atom { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default = "yes")]
    pub exact: bool,
    #[serde(default = "yes")]
    pub paper: bool,
    #[serde(default)]
    pub finite_difference: bool,
}

fn yes() -> bool {
    true
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            exact: true,
            paper: true,
            finite_difference: false,
        }
    }
}

/// Independent jobs over values of one numeric model field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
    /// Per-value tolerances, merged over the scenario's.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tolerances: Vec<BTreeMap<String, f64>>,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub t1: Option<f64>,
    pub steps: Option<usize>,
    pub orders: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, HarnessError> {
        if let Some(t1) = o.t1 {
            self.grid.t1 = t1;
        }
        if let Some(steps) = o.steps {
            self.grid.steps = Some(steps);
        }
        if let Some(orders) = &o.orders {
            self.orders = orders.clone();
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.validate()?;
        Ok(self)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn max_order(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name `{}` is not a valid file stem", self.name));
        }
        let g = &self.grid;
        if !(g.t0.is_finite() && g.t1.is_finite() && g.t1 > g.t0) {
            return bad(format!("grid [{}, {}] must be finite and increasing", g.t0, g.t1));
        }
        if g.steps == Some(0) {
            return bad("grid.steps must be positive".into());
        }
        if self.orders.is_empty() {
            return bad("orders must not be empty".into());
        }
        if let Some(q) = self.orders.iter().find(|&&q| q > self.order_cap) {
            return bad(format!("order {q} exceeds the cap {}", self.order_cap));
        }
        if self.observables.is_empty() {
            return bad("observables must not be empty".into());
        }
        for o in &self.observables {
            if o.name().is_empty() || o.name().contains([',', '_']) {
                return bad(format!("observable name `{}` must be non-empty without ',' or '_'", o.name()));
            }
            if let ObservableSpec::Atom {
                lambda_plus,
                lambda_minus,
                lambda_z,
                ..
            } = o
            {
                if !lambda_plus.iter().chain(lambda_minus).chain([lambda_z]).all(|x| x.is_finite()) {
                    return bad(format!("observable `{}` has a non-finite coefficient", o.name()));
                }
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return bad(format!("tolerance {k} = {v}"));
            }
        }
        let model = serde_json::to_value(&self.model).expect("serializable");
        let all_finite = model
            .as_object()
            .expect("tagged struct")
            .values()
            .all(|v| v.as_f64().map_or(true, f64::is_finite));
        if !all_finite {
            return bad("model parameters must be finite".into());
        }
        if let ModelConfig::Dicke { temperature, k, g, .. } = &self.model {
            match (temperature, k, g) {
                (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                _ => return bad("dicke needs either `temperature` or both `k` and `g`".into()),
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() || !s.values.iter().all(|v| v.is_finite()) {
                return bad("sweep values must be finite and non-empty".into());
            }
            if !s.tolerances.is_empty() && s.tolerances.len() != s.values.len() {
                return bad("sweep.tolerances needs one entry per value".into());
            }
            self.model_at(&s.param, s.values[0])?;
        }
        Ok(())
    }

    /// The model with numeric field `param` replaced by `value`.
    pub fn model_at(&self, param: &str, value: f64) -> Result<ModelConfig, HarnessError> {
        let mut v = serde_json::to_value(&self.model).expect("serializable");
        let obj = v.as_object_mut().expect("tagged struct");
        if param == "kind" {
            return Err(HarnessError::Config("cannot sweep `kind`".into()));
        }
        let known = matches!(obj.get(param), Some(serde_json::Value::Number(_)))
            || (matches!(self.model, ModelConfig::Dicke { .. }) && ["temperature", "k", "g"].contains(&param));
        if !known {
            return Err(HarnessError::Config(format!(
                "`{param}` is not a numeric parameter of the {} model",
                self.model.kind()
            )));
        }
        obj.insert(param.to_owned(), serde_json::json!(value));
        serde_json::from_value(v).map_err(|e| HarnessError::Config(format!("sweep {param} = {value}: {e}")))
    }
}
