//! Scenario configuration as read from JSON.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use morse_core::localize::ScalingPair;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// `k = m^p`, `l = m` for `m` in `m_min..=m_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRule {
    pub p: u32,
    pub m_min: u64,
    pub m_max: u64,
}

impl SweepRule {
    pub fn expand(&self) -> Result<Vec<ScalingPair>, LabError> {
        sweep(self.p, self.m_min..=self.m_max)
    }
}

/// The pairs `(m^p, m)`. Needs `p ≥ 2` so that `k/l` diverges, and `m ≥ 2`
/// so that the localization radius increases strictly along the list.
pub fn sweep(p: u32, ms: RangeInclusive<u64>) -> Result<Vec<ScalingPair>, LabError> {
    if p < 2 {
        return Err(LabError::BadSweepRule(format!("exponent p = {p} must be at least 2")));
    }
    if ms.is_empty() {
        return Err(LabError::BadSweepRule(format!("empty range {}..={}", ms.start(), ms.end())));
    }
    if *ms.start() < 2 {
        return Err(LabError::BadSweepRule("m must start at 2 or above".into()));
    }
    ms.map(|m| {
        m.checked_pow(p)
            .ok_or_else(|| LabError::BadSweepRule(format!("{m}^{p} overflows")))
            .and_then(|_| ScalingPair::power_sequence(m, p).map_err(|e| LabError::BadSweepRule(e.to_string())))
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub nus: Vec<f64>,
}

/// Random spectra with `n ≤ max_n` and eigenvalue moduli in `[0.3, 4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpectra {
    pub count: usize,
    pub max_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub random: Option<RandomSpectra>,
    #[serde(default)]
    pub spectra: Vec<SpectrumConfig>,
    pub degree: usize,
    /// Relative tolerance of `B` and `S` against the closed form.
    pub tolerance: f64,
    /// Bound on the off-leading component extremal functions.
    pub component_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub epsilon: f64,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    pub k_max: u32,
    pub grid: usize,
    pub defect_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub id: String,
    pub d: Vec<i64>,
    pub e: Vec<i64>,
    #[serde(default = "one")]
    pub twist: u64,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    pub sweep: SweepRule,
    /// Coarse quadrature grid; the reported integrals use twice this.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Sweep for the truncated kernels (unperturbed scenarios only).
    #[serde(default)]
    pub truncation: Option<SweepRule>,
    #[serde(default)]
    pub theta: Option<ThetaConfig>,
}

fn one() -> u64 {
    1
}

fn default_grid() -> usize {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetKind {
    Random,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub jet: JetKind,
    pub metric_scale: f64,
    pub sweep: SweepRule,
    pub grid: usize,
    pub orders: Vec<usize>,
    /// Sample points of the volume identity.
    pub points: usize,
    /// Bound the last sup must reach.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodgeConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    pub count: usize,
    /// Largest number of spaces in a complex.
    pub max_spaces: usize,
    pub max_dim: usize,
    pub mu_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScenarioConfig {
    Model(ModelConfig),
    Localize(LocalizeConfig),
    Torus(TorusConfig),
    Hodge(HodgeConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Model,
    Localize,
    Torus,
    Hodge,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Model => "model",
            Kind::Localize => "localize",
            Kind::Torus => "torus",
            Kind::Hodge => "hodge",
        }
    }
}

fn invalid(id: &str, msg: impl Into<String>) -> LabError {
    LabError::ConfigInvalid(format!("{id}: {}", msg.into()))
}

fn check_sweep(id: &str, rule: &SweepRule) -> Result<(), LabError> {
    rule.expand().map(|_| ()).map_err(|e| invalid(id, e.to_string()))
}

impl ScenarioConfig {
    pub fn kind(&self) -> Kind {
        match self {
            ScenarioConfig::Model(_) => Kind::Model,
            ScenarioConfig::Localize(_) => Kind::Localize,
            ScenarioConfig::Torus(_) => Kind::Torus,
            ScenarioConfig::Hodge(_) => Kind::Hodge,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            ScenarioConfig::Model(c) => &c.id,
            ScenarioConfig::Localize(c) => &c.id,
            ScenarioConfig::Torus(c) => &c.id,
            ScenarioConfig::Hodge(c) => &c.id,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ScenarioConfig::Model(c) => c.seed = seed,
            ScenarioConfig::Localize(c) => c.seed = seed,
            ScenarioConfig::Hodge(c) => c.seed = seed,
            ScenarioConfig::Torus(_) => {}
        }
    }

    /// Checks every parameter against the preconditions of the core
    /// routines, so that a run never starts on a config it cannot finish.
    pub fn validate(&self) -> Result<(), LabError> {
        let id = self.id();
        if id.is_empty() || id.contains([',', '"', '\n']) {
            return Err(LabError::ConfigInvalid(format!("bad scenario id {id:?}")));
        }
        match self {
            ScenarioConfig::Model(c) => {
                match (&c.random, c.spectra.is_empty()) {
                    (Some(_), false) | (None, true) => {
                        return Err(invalid(id, "give exactly one of `random` and `spectra`"));
                    }
                    (Some(r), true) if r.count == 0 || !(1..=4).contains(&r.max_n) => {
                        return Err(invalid(id, "random spectra need count ≥ 1 and 1 ≤ max_n ≤ 4"));
                    }
                    _ => {}
                }
                for s in &c.spectra {
                    let n = s.lambdas.len() + s.nus.len();
                    if !(1..=4).contains(&n) {
                        return Err(invalid(id, "spectra must have between 1 and 4 eigenvalues"));
                    }
                    if s.lambdas.iter().chain(&s.nus).any(|v| !v.is_finite() || v.abs() < 1e-6) {
                        return Err(invalid(id, "eigenvalues must be finite and nonzero"));
                    }
                }
                if !(1..=16).contains(&c.degree) {
                    return Err(invalid(id, "degree must be in 1..=16"));
                }
                if !(c.tolerance > 0.0 && c.component_tolerance > 0.0) {
                    return Err(invalid(id, "tolerances must be positive"));
                }
            }
            ScenarioConfig::Torus(c) => {
                if c.d.is_empty() || c.d.len() > 3 || c.e.len() > 3 {
                    return Err(invalid(id, "need 1 to 3 factors in d and at most 3 in e"));
                }
                if let Some(i) = c.d.iter().chain(&c.e).position(|&x| x == 0) {
                    return Err(invalid(id, format!("factor {i} has degree zero")));
                }
                if c.twist == 0 {
                    return Err(invalid(id, "twist must be positive"));
                }
                if let Some(p) = &c.perturbation {
                    if !(p.epsilon.is_finite() && p.epsilon >= 0.0) || p.r == 0 || p.r != c.d.len() {
                        return Err(invalid(
                            id,
                            "perturbation needs a finite epsilon ≥ 0 and r equal to the length of d",
                        ));
                    }
                    if c.d.len() > 2 {
                        return Err(invalid(id, "perturbed scenarios need at most 2 factors in d"));
                    }
                    if c.truncation.is_some() || c.theta.is_some() {
                        return Err(invalid(id, "truncation and theta checks need an unperturbed scenario"));
                    }
                }
                if !(16..=256).contains(&c.grid) {
                    return Err(invalid(id, "grid must be in 16..=256"));
                }
                check_sweep(id, &c.sweep)?;
                if let Some(t) = &c.truncation {
                    check_sweep(id, t)?;
                }
                if let Some(t) = &c.theta {
                    if t.k_max == 0 || t.k_max > 64 || t.grid == 0 || t.grid > 512 || !(t.defect_tolerance > 0.0) {
                        return Err(invalid(id, "theta needs 1 ≤ k_max ≤ 64, 1 ≤ grid ≤ 512, positive tolerance"));
                    }
                    if c.d != [1] || !c.e.is_empty() {
                        return Err(invalid(id, "theta check runs on the scenario d = (1), e = ()"));
                    }
                }
            }
            ScenarioConfig::Localize(c) => {
                if c.n == 0 || c.n > 3 || c.r > c.n {
                    return Err(invalid(id, "need 1 ≤ n ≤ 3 and r ≤ n"));
                }
                if !(c.metric_scale.is_finite() && (0.0..=0.2).contains(&c.metric_scale)) {
                    return Err(invalid(id, "metric_scale must lie in [0, 0.2]"));
                }
                if c.grid == 0 || c.grid > 32 {
                    return Err(invalid(id, "grid must be in 1..=32"));
                }
                if c.orders.is_empty() || c.orders.iter().any(|&o| o > 2) {
                    return Err(invalid(id, "orders must be a nonempty subset of 0..=2"));
                }
                if c.points == 0 || !(c.limit > 0.0) {
                    return Err(invalid(id, "points and limit must be positive"));
                }
                check_sweep(id, &c.sweep)?;
            }
            ScenarioConfig::Hodge(c) => {
                if c.count == 0 || !(1..=7).contains(&c.max_spaces) {
                    return Err(invalid(id, "need count ≥ 1 and 1 ≤ max_spaces ≤ 7"));
                }
                if !(1..=morse_core::hodge::MAX_SPACE_DIM).contains(&c.max_dim) {
                    return Err(invalid(id, "max_dim must be in 1..=12"));
                }
                if c.mu_points < 2 {
                    return Err(invalid(id, "mu_points must be at least 2"));
                }
            }
        }
        Ok(())
    }
}

/// A config file holds one scenario or a list of them.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    One(ScenarioConfig),
    Many(Vec<ScenarioConfig>),
}

/// Parses and validates a config file.
pub fn load(path: &Path) -> Result<Vec<ScenarioConfig>, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::ConfigInvalid(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Vec<ScenarioConfig>, LabError> {
    let configs = match serde_json::from_str::<ConfigFile>(text) {
        Ok(ConfigFile::One(c)) => vec![c],
        Ok(ConfigFile::Many(v)) => v,
        // the untagged error says nothing useful, so retry as a single config
        Err(_) => {
            vec![serde_json::from_str::<ScenarioConfig>(text).map_err(|e| LabError::ConfigInvalid(e.to_string()))?]
        }
    };
    if configs.is_empty() {
        return Err(LabError::ConfigInvalid("config list is empty".into()));
    }
    for c in &configs {
        c.validate()?;
    }
    let mut ids: Vec<&str> = configs.iter().map(|c| c.id()).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(LabError::ConfigInvalid("scenario ids must be distinct".into()));
    }
    Ok(configs)
}

/// The built-in configurations, one list per kind.
pub fn defaults(kind: Kind) -> Vec<ScenarioConfig> {
    let sweep = |m_min, m_max| SweepRule { p: 3, m_min, m_max };
    match kind {
        Kind::Model => vec![ScenarioConfig::Model(ModelConfig {
            id: "model-random".into(),
            seed: 1,
            random: Some(RandomSpectra { count: 20, max_n: 3 }),
            spectra: vec![],
            degree: 12,
            tolerance: 1e-2,
            component_tolerance: 1e-6,
        })],
        Kind::Localize => vec![
            ScenarioConfig::Localize(LocalizeConfig {
                id: "localize-cubic".into(),
                seed: 1,
                n: 2,
                r: 1,
                jet: JetKind::Random,
                metric_scale: 0.1,
                sweep: sweep(4, 20),
                grid: 12,
                orders: vec![0],
                points: 50,
                limit: 1e-2,
            }),
            ScenarioConfig::Localize(LocalizeConfig {
                id: "localize-quadratic".into(),
                seed: 1,
                n: 2,
                r: 1,
                jet: JetKind::Quadratic,
                metric_scale: 0.0,
                sweep: sweep(4, 20),
                grid: 12,
                orders: vec![0, 1, 2],
                points: 50,
                limit: 1e-2,
            }),
        ],
        Kind::Torus => {
            let flat = |id: &str, d: Vec<i64>, e: Vec<i64>| {
                ScenarioConfig::Torus(TorusConfig {
                    id: id.into(),
                    d,
                    e,
                    twist: 1,
                    perturbation: None,
                    sweep: sweep(2, 12),
                    grid: 16,
                    truncation: Some(sweep(4, 20)),
                    theta: None,
                })
            };
            let mut v = vec![
                flat("torus-a", vec![1], vec![1]),
                flat("torus-b", vec![-1], vec![2]),
                flat("torus-c", vec![-2], vec![1, 3]),
                ScenarioConfig::Torus(TorusConfig {
                    id: "torus-b-bump".into(),
                    d: vec![-1],
                    e: vec![2],
                    twist: 1,
                    perturbation: Some(PerturbationConfig { epsilon: 0.1, r: 1 }),
                    sweep: sweep(2, 12),
                    grid: 32,
                    truncation: None,
                    theta: None,
                }),
            ];
            v.push(ScenarioConfig::Torus(TorusConfig {
                id: "torus-theta".into(),
                d: vec![1],
                e: vec![],
                twist: 1,
                perturbation: None,
                sweep: sweep(2, 4),
                grid: 16,
                truncation: None,
                theta: Some(ThetaConfig { k_max: 8, grid: 61, defect_tolerance: 1e-8 }),
            }));
            v
        }
        Kind::Hodge => vec![ScenarioConfig::Hodge(HodgeConfig {
            id: "hodge-random".into(),
            seed: 1,
            count: 1000,
            max_spaces: 6,
            max_dim: 12,
            mu_points: 24,
        })],
    }
}
