//! JSON run configuration.
//!
//! ```json
//! {
//!   "target": {"superposed": {"n": 5, "c0": 0.7071067811865476, "cn": 0.7071067811865476, "sign": "+"}},
//!   "strategy": {"hybrid": {"l": 3, "q": 5}},
//!   "params": {"g": 0.05, "g_a": 0.05, "g_b": 0.03, "delta": 0.0},
//!   "truncation": "auto",
//!   "cycles": 20,
//!   "mode": {"trajectories": {"n_traj": 10000, "seed": 1}}
//! }
//! ```
//!
//! Only `target` is required. Targets are `{"fock": n}`, `{"superposed": {...}}`
//! or `{"bell": {"m": .., "n": .., ...}}`; coefficients default to `1/√2` and the
//! sign to `"+"`. Strategies are `"uniform"`, `{"hybrid": {"l", "q"}}` and
//! `{"hybrid_two_mode": {"l", "q", "switch_after", "after"?}}`, where `after`
//! holds the couplings used after the switch (default: `g_a` and `g_b`
//! exchanged). `truncation` is `"auto"`, `[K]` or `[K_a, K_b]`. Modes are
//! `"closed_form"`, `"postselected"` (default) and `{"trajectories": {...}}`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;

use fockmeas::kernel::{SystemParams, TwoModeParams};
use fockmeas::protocol::DEFAULT_MAX_RESTARTS;
use fockmeas::schedule::{Couplings, Sign, StrategyKind, StrategySpec, TargetSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: TargetConfig,
    #[serde(default)]
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
    #[serde(default)]
    pub mode: Mode,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_cycles() -> usize {
    20
}

fn equal_weight() -> f64 {
    FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SignConfig {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl From<SignConfig> for Sign {
    fn from(s: SignConfig) -> Self {
        match s {
            SignConfig::Plus => Sign::Plus,
            SignConfig::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Fock(usize),
    Superposed {
        n: usize,
        #[serde(default = "equal_weight")]
        c0: f64,
        #[serde(default = "equal_weight")]
        cn: f64,
        #[serde(default)]
        sign: SignConfig,
    },
    Bell {
        m: usize,
        n: usize,
        #[serde(default = "equal_weight")]
        c00: f64,
        #[serde(default = "equal_weight")]
        cmn: f64,
        #[serde(default)]
        sign: SignConfig,
    },
}

impl TargetConfig {
    pub fn is_two_mode(&self) -> bool {
        matches!(self, TargetConfig::Bell { .. })
    }

    pub fn sign(&self) -> Sign {
        match self {
            TargetConfig::Fock(_) => Sign::Plus,
            TargetConfig::Superposed { sign, .. } | TargetConfig::Bell { sign, .. } => (*sign).into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingPair {
    pub g_a: f64,
    pub g_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    #[default]
    Uniform,
    Hybrid { l: usize, q: usize },
    HybridTwoMode {
        l: usize,
        q: usize,
        switch_after: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        after: Option<CouplingPair>,
    },
}

/// Couplings and detuning in units of the ancilla transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_g_a")]
    pub g_a: f64,
    #[serde(default = "default_g_b")]
    pub g_b: f64,
    #[serde(default)]
    pub delta: f64,
}

fn default_g() -> f64 {
    0.05
}
fn default_g_a() -> f64 {
    0.05
}
fn default_g_b() -> f64 {
    0.03
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            g: default_g(),
            g_a: default_g_a(),
            g_b: default_g_b(),
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Truncation {
    Auto(AutoTag),
    Fixed(Vec<usize>),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    ClosedForm,
    #[default]
    Postselected,
    Trajectories {
        n_traj: u64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_restarts")]
        max_restarts: u64,
    },
}

fn default_restarts() -> u64 {
    DEFAULT_MAX_RESTARTS
}

/// Parses and validates a JSON config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(path, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn minimal(target: TargetConfig) -> Self {
        Self {
            target,
            strategy: StrategyConfig::default(),
            params: ParamsConfig::default(),
            truncation: Truncation::default(),
            cycles: default_cycles(),
            mode: Mode::default(),
            output: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (name, v) in [("params.g", p.g), ("params.g_a", p.g_a), ("params.g_b", p.g_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::value(name, format!("coupling must be positive and finite, got {v}")));
            }
        }
        if !p.delta.is_finite() {
            return Err(CliError::value("params.delta", "detuning must be finite"));
        }
        if self.cycles == 0 {
            return Err(CliError::value("cycles", "need at least one cycle"));
        }
        self.target_spec()?;

        match self.strategy {
            StrategyConfig::Uniform => {}
            StrategyConfig::Hybrid { l, q } => {
                check_l(l)?;
                if q > self.cycles {
                    return Err(CliError::schema("strategy.hybrid.q", format!("q = {q} exceeds cycles = {}", self.cycles)));
                }
            }
            StrategyConfig::HybridTwoMode { l, q, switch_after, after } => {
                check_l(l)?;
                if !self.target.is_two_mode() {
                    return Err(CliError::schema("strategy", "hybrid_two_mode needs a bell target"));
                }
                if q > self.cycles {
                    return Err(CliError::schema(
                        "strategy.hybrid_two_mode.q",
                        format!("q = {q} exceeds cycles = {}", self.cycles),
                    ));
                }
                if switch_after < q || switch_after > self.cycles {
                    return Err(CliError::schema(
                        "strategy.hybrid_two_mode.switch_after",
                        format!("need q <= switch_after <= cycles, got {switch_after}"),
                    ));
                }
                if let Some(c) = after {
                    for (name, v) in [("g_a", c.g_a), ("g_b", c.g_b)] {
                        if !(v.is_finite() && v > 0.0) {
                            return Err(CliError::value(
                                format!("strategy.hybrid_two_mode.after.{name}"),
                                format!("coupling must be positive and finite, got {v}"),
                            ));
                        }
                    }
                }
            }
        }

        if let Truncation::Fixed(dims) = &self.truncation {
            let want = if self.target.is_two_mode() { 2 } else { 1 };
            if dims.len() != want {
                return Err(CliError::schema(
                    "truncation",
                    format!("expected {want} dimension(s), got {}", dims.len()),
                ));
            }
            if dims.iter().any(|&d| d == 0) {
                return Err(CliError::value("truncation", "dimensions must be at least 1"));
            }
        }

        match self.mode {
            Mode::ClosedForm if self.strategy != StrategyConfig::Uniform => Err(CliError::value(
                "mode",
                "closed_form mode evaluates uniform schedules only",
            )),
            Mode::Trajectories { n_traj: 0, .. } => {
                Err(CliError::value("mode.trajectories.n_traj", "need at least one trajectory"))
            }
            _ => Ok(()),
        }
    }

    pub fn target_spec(&self) -> Result<TargetSpec> {
        let spec = match self.target {
            TargetConfig::Fock(n) => TargetSpec::Fock(n),
            TargetConfig::Superposed { n, c0, cn, sign } => TargetSpec::Superposed { c0, cn, n, sign: sign.into() },
            TargetConfig::Bell { m, n, c00, cmn, sign } => TargetSpec::Bell {
                c00,
                cmn,
                m,
                n,
                sign: sign.into(),
            },
        };
        spec.validate().map_err(|e| CliError::value("target", e.to_string()))?;
        Ok(spec)
    }

    pub fn couplings(&self) -> Couplings {
        let p = &self.params;
        if self.target.is_two_mode() {
            Couplings::Qutrit(TwoModeParams {
                g_a: p.g_a,
                g_b: p.g_b,
                delta: p.delta,
            })
        } else {
            Couplings::Qubit(SystemParams { g: p.g, delta: p.delta })
        }
    }

    pub fn strategy_spec(&self) -> StrategySpec {
        let kind = match self.strategy {
            StrategyConfig::Uniform => StrategyKind::Uniform,
            StrategyConfig::Hybrid { l, q } => StrategyKind::Hybrid { l, q },
            StrategyConfig::HybridTwoMode { l, q, switch_after, after } => {
                let before = TwoModeParams {
                    g_a: self.params.g_a,
                    g_b: self.params.g_b,
                    delta: self.params.delta,
                };
                let after = match after {
                    Some(c) => TwoModeParams {
                        g_a: c.g_a,
                        g_b: c.g_b,
                        delta: self.params.delta,
                    },
                    None => before.swapped(),
                };
                StrategyKind::HybridTwoMode {
                    l,
                    q,
                    switch_after,
                    before,
                    after,
                }
            }
        };
        StrategySpec {
            kind,
            total_cycles: self.cycles,
        }
    }

    pub fn truncation_dims(&self) -> Option<(usize, usize)> {
        match &self.truncation {
            Truncation::Auto(_) => None,
            Truncation::Fixed(d) => Some((d[0], d.get(1).copied().unwrap_or(1))),
        }
    }
}

fn check_l(l: usize) -> Result<()> {
    if l == 0 {
        Err(CliError::value("strategy.l", "period multiple l must be at least 1"))
    } else {
        Ok(())
    }
}
