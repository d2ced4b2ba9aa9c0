//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use holoxl::frontend::FeasibleSet;
use holoxl::scenario::ScenarioParams;
use holoxl::wmmse::SolverOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    Single,
    Sweep,
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Total bandwidth in Hz.
    Bandwidth,
    /// Side length in wavelengths.
    ArrayLength,
    /// Single-user LoS distance as a fraction of the Fraunhofer distance.
    Distance,
    Users,
    /// Per-user transmit power in dBm.
    Power,
    /// 0 = no coupling, 1 = coupling on every array.
    Coupling,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Bandwidth => "bandwidth",
            SweepAxis::ArrayLength => "array_length",
            SweepAxis::Distance => "distance",
            SweepAxis::Users => "users",
            SweepAxis::Power => "power",
            SweepAxis::Coupling => "coupling",
        }
    }

    /// `params` with this axis set to `value`.
    pub fn apply(self, params: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let mut p = params.clone();
        match self {
            SweepAxis::Bandwidth => p.bandwidth = value,
            SweepAxis::ArrayLength => p.array_length = value,
            SweepAxis::Distance => p.user_distance = Some(value),
            SweepAxis::Users => p.num_users = whole(value, "users")?,
            SweepAxis::Power => p.power_dbm = value,
            SweepAxis::Coupling => {
                p.coupling = match value {
                    v if v == 0.0 => false,
                    v if v == 1.0 => true,
                    v => return Err(HarnessError::config("sweep.values", format!("coupling values must be 0 or 1, got {v}"))),
                }
            }
        }
        Ok(p)
    }
}

fn whole(value: f64, field: &str) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 && value < 1e6 {
        Ok(value as usize)
    } else {
        Err(HarnessError::config("sweep.values", format!("{field} must be a positive integer, got {value}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A feasible set written as a string in the config (`"LP"`, `"AO[0.001,5]"`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SetSpec(pub FeasibleSet);

impl TryFrom<String> for SetSpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse::<FeasibleSet>().map(SetSpec).map_err(|e| e.to_string())
    }
}

impl From<SetSpec> for String {
    fn from(s: SetSpec) -> String {
        s.0.to_string()
    }
}

/// Reference designs evaluated next to the proposed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Every set designed on the center subcarrier only.
    Narrowband,
    /// Every set designed on the plane-wave channel.
    Plane,
    /// Every set designed on the center-subcarrier plane-wave channel.
    PlaneNarrowband,
    /// Fully digital UPA at `λ/2` over the same footprint.
    FdUpa,
    /// Fully digital ULA with one antenna per microstrip.
    FdUla,
    /// Fully digital UPA at `λ/4` over the same footprint.
    FdQuarterWave,
    /// Hybrid A/D on the `λ/2` UPA.
    Hybrid,
}

impl Baseline {
    pub const ALL: [Baseline; 7] = [
        Baseline::Narrowband,
        Baseline::Plane,
        Baseline::PlaneNarrowband,
        Baseline::FdUpa,
        Baseline::FdUla,
        Baseline::FdQuarterWave,
        Baseline::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Narrowband => "narrowband",
            Baseline::Plane => "plane",
            Baseline::PlaneNarrowband => "plane_narrowband",
            Baseline::FdUpa => "fd_upa",
            Baseline::FdUla => "fd_ula",
            Baseline::FdQuarterWave => "fd_quarter_wave",
            Baseline::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s.trim())
            .ok_or_else(|| HarnessError::config("baselines", format!("unknown baseline '{s}'")))
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_sets() -> Vec<SetSpec> {
    ["UC", "AO", "BA", "LP"].iter().map(|s| SetSpec(s.parse().expect("built-in tag"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Kind,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_sets")]
    pub sets: Vec<SetSpec>,
    #[serde(default)]
    pub baselines: Vec<Baseline>,
    /// RF chains of the hybrid baseline; defaults to the number of microstrips.
    #[serde(default)]
    pub hybrid_rf_chains: Option<usize>,
    /// Write per-subcarrier channel CSVs and weight CSVs (single runs only).
    #[serde(default)]
    pub export_channels: bool,
    #[serde(default)]
    pub scenario: ScenarioParams,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Output directory. Not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: Kind::Single,
            sweep: None,
            seeds: default_seeds(),
            sets: default_sets(),
            baselines: Vec::new(),
            hybrid_rf_chains: None,
            export_channels: false,
            scenario: ScenarioParams::default(),
            solver: SolverOptions::default(),
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::config("config", e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks everything that can be checked without running a scenario.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::config("seeds", "at least one seed is required"));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(HarnessError::config("seeds", "seeds must be distinct"));
        }
        if self.sets.is_empty() && self.baselines.is_empty() {
            return Err(HarnessError::config("sets", "nothing to run: no sets and no baselines"));
        }
        for s in &self.sets {
            s.0.validate().map_err(|e| HarnessError::config("sets", e.to_string()))?;
        }
        if self.hybrid_rf_chains == Some(0) {
            return Err(HarnessError::config("hybrid_rf_chains", "must be at least 1"));
        }
        self.solver.validate().map_err(|e| HarnessError::config("solver", e.to_string()))?;
        match (self.kind, &self.sweep) {
            (Kind::Sweep, None) => return Err(HarnessError::config("sweep", "kind = \"sweep\" needs a [sweep] table")),
            (Kind::Sweep, Some(sweep)) => {
                if sweep.values.is_empty() {
                    return Err(HarnessError::config("sweep.values", "at least one value is required"));
                }
                if sweep.values.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(HarnessError::config("sweep.values", "values must be strictly increasing"));
                }
                for &v in &sweep.values {
                    let p = sweep.axis.apply(&self.scenario, v)?;
                    p.validate().map_err(|e| HarnessError::config("sweep.values", format!("{v}: {e}")))?;
                }
            }
            (Kind::Single, _) => {
                self.scenario.validate().map_err(|e| HarnessError::config("scenario", e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Axis values of the run; a single run has one unnamed point.
    pub fn points(&self) -> Vec<Option<f64>> {
        match (self.kind, &self.sweep) {
            (Kind::Sweep, Some(s)) => s.values.iter().map(|&v| Some(v)).collect(),
            _ => vec![None],
        }
    }

    pub fn axis_name(&self) -> &'static str {
        match (self.kind, &self.sweep) {
            (Kind::Sweep, Some(s)) => s.axis.name(),
            _ => "none",
        }
    }

    /// Scenario parameters at one axis point.
    pub fn params_at(&self, value: Option<f64>) -> Result<ScenarioParams> {
        match (value, &self.sweep) {
            (Some(v), Some(s)) => s.axis.apply(&self.scenario, v),
            _ => Ok(self.scenario.clone()),
        }
    }

    /// SHA-256 over the canonical JSON of every result-affecting field.
    pub fn hash(&self) -> String {
        let mut hashed = self.clone();
        hashed.output = None;
        let bytes = serde_json::to_vec(&hashed).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Parses `0,3,7` and half-open ranges `0..10`, mixed freely.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| HarnessError::config("--seeds", format!("cannot parse '{part}'"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(part))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(part))?;
            if b <= a {
                return Err(bad(part));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if seeds.is_empty() {
        return Err(HarnessError::config("--seeds", "empty seed list"));
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sweep_toml() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            kind = "sweep"
            seeds = [1, 2]
            sets = ["LP", "AO[0.01,2]"]
            baselines = ["narrowband", "fd_upa"]
            [sweep]
            axis = "bandwidth"
            values = [20e6, 160e6]
            [scenario]
            array_length = 2.0
            power_dbm = -50.0
            [scenario.channel]
            shadowing_std_db = 4.0
            [solver]
            ao_max_iter = 7
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sets[1].0, FeasibleSet::AmplitudeOnly { min: 0.01, max: 2.0 });
        assert_eq!(cfg.points(), vec![Some(20e6), Some(160e6)]);
        assert_eq!(cfg.params_at(Some(160e6)).unwrap().bandwidth, 160e6);
        assert_eq!(cfg.scenario.channel.shadowing_std_db, 4.0);
        assert_eq!(cfg.solver.ao_max_iter, 7);
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::from_toml("sets = [\"XX\"]").unwrap_err();
        assert!(err.to_string().contains("XX"), "{err}");
        let err = ExperimentConfig::from_toml("[scenario]\nbogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let cfg = ExperimentConfig::from_toml("kind = \"sweep\"\n[sweep]\naxis = \"power\"\nvalues = [0.0, -10.0]").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("sweep.values"));
        let cfg = ExperimentConfig::from_toml("kind = \"sweep\"\n[sweep]\naxis = \"users\"\nvalues = [1.5]").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_only() {
        let base = ExperimentConfig::default();
        let mut moved = base.clone();
        moved.output = Some("elsewhere".into());
        assert_eq!(base.hash(), moved.hash());
        let mut other = base.clone();
        other.scenario.channel.roughness *= 1.0 + 1e-12;
        assert_ne!(base.hash(), other.hash());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3,7").unwrap(), vec![0, 1, 2, 7]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("a").is_err());
    }
}
