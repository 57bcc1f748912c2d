//! Experiment specification files.
//!
//! A spec is a TOML document:
//!
//! ```toml
//! runs = 20
//! base_seed = 7
//! output = "results"          # optional, `--out` overrides
//! workers = 4                 # optional, `--workers` overrides
//!
//! [constraints]
//! preset = "first"            # or "second", or the custom keys below
//! # cardinality = 10
//! # floor = 0.01
//! # ceiling = 1.0
//! # preassigned = [30]        # 1-based
//! # lot_size = 0.008
//!
//! [parameters]                # every key optional
//! population_size = 100
//! generations = 1000
//!
//! [[instances]]
//! name = "D1"
//! path = "port1.txt"          # relative to the spec file
//! frontier = "portef1.txt"    # optional
//! layout = "auto"             # auto | orlibrary | dense
//!
//! [[algorithms]]
//! scheme = "ccs"              # ccs | dcs
//! backend = "moead"           # moead | nsga2 | smsemoa
//! label = "B"                 # optional
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use ccsport_core::moea::MoeadConfig;
use ccsport_core::problem::{ConstraintError, ConstraintPreset};
use ccsport_core::{Backend, ConstraintSet, Instance, OperatorConfig, RunConfig, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formats::{self, InstanceLayout};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid experiment spec:\n{0}")]
    Invalid(Problems),
}

/// Every problem found while validating a spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problems(pub Vec<String>);

impl fmt::Display for Problems {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Ccs,
    Dcs,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Ccs => Scheme::Ccs,
            SchemeName::Dcs => Scheme::Dcs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendName {
    Moead,
    Nsga2,
    Smsemoa,
}

impl From<BackendName> for Backend {
    fn from(b: BackendName) -> Self {
        match b {
            BackendName::Moead => Backend::Moead,
            BackendName::Nsga2 => Backend::Nsga2,
            BackendName::Smsemoa => Backend::SmsEmoa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<PathBuf>,
    #[serde(default)]
    pub layout: InstanceLayout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub scheme: SchemeName,
    pub backend: BackendName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl AlgorithmEntry {
    pub fn new(scheme: SchemeName, backend: BackendName) -> Self {
        Self {
            scheme,
            backend,
            label: None,
        }
    }

    /// Directory-safe name, e.g. `ccs-moead`.
    pub fn slug(&self) -> String {
        format!("{}-{}", Scheme::from(self.scheme).label().to_lowercase(), Backend::from(self.backend).slug())
    }

    /// Display name, e.g. `CCS/MOEA/D`, or the configured label.
    pub fn display(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            format!("{}/{}", Scheme::from(self.scheme).label(), Backend::from(self.backend).label())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
    /// 1-based asset indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preassigned: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lot_size: Option<f64>,
}

impl ConstraintSpec {
    pub fn preset(p: PresetName) -> Self {
        Self {
            preset: Some(p),
            ..Self::default()
        }
    }

    /// Builds the constraint set for an `n`-asset instance. Custom keys
    /// override the preset; without a preset the first set's values fill in.
    pub fn build(&self, n: usize) -> Result<ConstraintSet, ConstraintError> {
        let preset = match self.preset.unwrap_or(PresetName::First) {
            PresetName::First => ConstraintPreset::First,
            PresetName::Second => ConstraintPreset::Second,
        };
        if self == &Self::preset(self.preset.unwrap_or(PresetName::First)) {
            return preset.build(n);
        }
        let k = self.cardinality.unwrap_or(preset.cardinality());
        let pre: Vec<usize> = match &self.preassigned {
            Some(p) => p.clone(),
            None => vec![preset.preassigned_asset()],
        };
        let mut zero_based = Vec::with_capacity(pre.len());
        for i in pre {
            if i == 0 || i > n {
                return Err(ConstraintError::PreassignedOutOfRange { index: i, n_assets: n });
            }
            zero_based.push(i - 1);
        }
        ConstraintSet::uniform(
            n,
            k,
            self.floor.unwrap_or(0.01),
            self.ceiling.unwrap_or(1.0),
            &zero_based,
            self.lot_size.unwrap_or(0.008),
        )
    }
}

/// Algorithm parameters; absent keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub population_size: usize,
    pub generations: usize,
    pub scale: f64,
    pub crossover_rate: f64,
    pub distribution_index: f64,
    /// Defaults to `1 / population_size`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_probability: Option<f64>,
    pub operator_weights: [f64; 3],
    pub neighborhood: usize,
    pub global_probability: f64,
    pub replacement_limit: usize,
}

impl Default for Parameters {
    fn default() -> Self {
        let ops = OperatorConfig::default();
        let moead = MoeadConfig::default();
        Self {
            population_size: 100,
            generations: 1000,
            scale: ops.scale,
            crossover_rate: ops.crossover_rate,
            distribution_index: ops.distribution_index,
            mutation_probability: None,
            operator_weights: ops.weights,
            neighborhood: moead.neighborhood,
            global_probability: moead.global_probability,
            replacement_limit: moead.replacement_limit,
        }
    }
}

impl Parameters {
    pub fn operator_config(&self) -> OperatorConfig {
        OperatorConfig {
            scale: self.scale,
            crossover_rate: self.crossover_rate,
            distribution_index: self.distribution_index,
            mutation_probability: self
                .mutation_probability
                .unwrap_or(1.0 / self.population_size.max(1) as f64),
            weights: self.operator_weights,
        }
    }

    pub fn moead_config(&self) -> MoeadConfig {
        MoeadConfig {
            neighborhood: self.neighborhood,
            global_probability: self.global_probability,
            replacement_limit: self.replacement_limit,
        }
    }

    pub fn run_config(&self, algorithm: &AlgorithmEntry, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(algorithm.scheme.into(), algorithm.backend.into());
        cfg.population_size = self.population_size;
        cfg.generations = self.generations;
        cfg.seed = seed;
        cfg.operators = self.operator_config();
        cfg.moead = self.moead_config();
        cfg
    }
}

fn default_runs() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub constraints: ConstraintSpec,
    #[serde(default)]
    pub parameters: Parameters,
    pub instances: Vec<InstanceEntry>,
    pub algorithms: Vec<AlgorithmEntry>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Loads a spec file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        spec.resolve_paths(base);
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for inst in &mut self.instances {
            join(&mut inst.path);
            if let Some(f) = &mut inst.frontier {
                join(f);
            }
        }
        if let Some(o) = &mut self.output {
            join(o);
        }
    }

    /// The spec with everything that does not affect results removed, as
    /// canonical TOML. Written into result trees and hashed for metadata.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        c.workers = None;
        c.parameters.mutation_probability = Some(c.parameters.operator_config().mutation_probability);
        toml::to_string(&c).unwrap_or_default()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-run seed: `base_seed` XOR the first eight bytes of
/// SHA-256(instance, algorithm, run).
pub fn run_seed(base_seed: u64, instance: &str, algorithm: &str, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(instance.as_bytes());
    h.update([0]);
    h.update(algorithm.as_bytes());
    h.update([0]);
    h.update((run as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    base_seed ^ u64::from_le_bytes(bytes)
}

/// A checked spec with its instances loaded.
#[derive(Debug, Clone)]
pub struct ValidatedSpec {
    pub spec: ExperimentSpec,
    pub instances: Vec<Instance>,
    pub constraints: Vec<ConstraintSet>,
}

fn is_dir_safe(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

/// Checks every invariant and loads every instance. All problems are
/// collected; nothing is returned unless there are none.
pub fn validate_spec(spec: ExperimentSpec) -> Result<ValidatedSpec, ConfigError> {
    let mut problems = Vec::new();
    if spec.runs == 0 {
        problems.push("runs must be at least 1".to_string());
    }
    if spec.workers == Some(0) {
        problems.push("workers must be at least 1".to_string());
    }
    if spec.instances.is_empty() {
        problems.push("no instances listed".to_string());
    }
    if spec.algorithms.is_empty() {
        problems.push("no algorithms listed".to_string());
    }
    let mut seen = BTreeSet::new();
    for a in &spec.algorithms {
        if !seen.insert((a.scheme, a.backend)) {
            problems.push(format!("algorithm {} listed twice", a.slug()));
        }
    }
    let mut names = BTreeSet::new();
    for inst in &spec.instances {
        if !is_dir_safe(&inst.name) {
            problems.push(format!("instance name {:?} must use only letters, digits, '-', '_' and '.'", inst.name));
        }
        if !names.insert(inst.name.clone()) {
            problems.push(format!("instance name {:?} listed twice", inst.name));
        }
    }
    let params = &spec.parameters;
    let template = AlgorithmEntry::new(SchemeName::Ccs, BackendName::Moead);
    if let Err(e) = params.run_config(&template, 0).validate() {
        problems.push(format!("parameters: {e}"));
    }

    let mut instances = Vec::new();
    let mut constraints = Vec::new();
    for entry in &spec.instances {
        if !entry.path.exists() {
            problems.push(format!("instance {}: file {} not found", entry.name, entry.path.display()));
            continue;
        }
        let inst = match formats::read_instance(&entry.path, entry.layout) {
            Ok(i) => i,
            Err(e) => {
                problems.push(format!("instance {}: {e}", entry.name));
                continue;
            }
        };
        match spec.constraints.build(inst.n_assets()) {
            Ok(c) => constraints.push(c),
            Err(e) => problems.push(format!("instance {}: {e}", entry.name)),
        }
        if inst.sigma().contains(&0.0) {
            log::warn!("instance {} has assets with zero deviation", entry.name);
        }
        instances.push(inst);
    }
    if problems.is_empty() {
        Ok(ValidatedSpec {
            spec,
            instances,
            constraints,
        })
    } else {
        Err(ConfigError::Invalid(Problems(problems)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[instances]]
        name = "D1"
        path = "port1.txt"

        [[algorithms]]
        scheme = "ccs"
        backend = "moead"
    "#;

    #[test]
    fn defaults_are_filled_in() {
        let spec = ExperimentSpec::parse(MINIMAL).unwrap();
        let p = &spec.parameters;
        assert_eq!(spec.runs, 20);
        assert_eq!((p.population_size, p.generations), (100, 1000));
        assert_eq!((p.scale, p.crossover_rate, p.distribution_index), (0.5, 0.9, 20.0));
        assert_eq!(p.operator_config().mutation_probability, 0.01);
        assert_eq!((p.neighborhood, p.global_probability, p.replacement_limit), (10, 0.1, 2));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[parameters]\npopulation = 5\n");
        assert!(ExperimentSpec::parse(&text).is_err());
    }

    #[test]
    fn problems_are_aggregated() {
        let mut spec = ExperimentSpec::parse(MINIMAL).unwrap();
        spec.runs = 0;
        spec.algorithms.push(spec.algorithms[0].clone());
        spec.parameters.population_size = 2;
        let Err(ConfigError::Invalid(p)) = validate_spec(spec) else {
            panic!("expected problems");
        };
        assert_eq!(p.0.len(), 4, "{p}");
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let mut seen = BTreeSet::new();
        for inst in ["D1", "D2"] {
            for alg in ["ccs-moead", "dcs-moead"] {
                for r in 0..50 {
                    assert!(seen.insert(run_seed(3, inst, alg, r)));
                }
            }
        }
        assert_eq!(run_seed(3, "D1", "ccs-moead", 0), run_seed(3, "D1", "ccs-moead", 0));
        assert_ne!(run_seed(3, "D1", "ccs-moead", 0), run_seed(4, "D1", "ccs-moead", 0));
    }

    #[test]
    fn custom_constraints_override_the_preset() {
        let c = ConstraintSpec {
            preset: Some(PresetName::Second),
            cardinality: Some(5),
            preassigned: Some(vec![1]),
            ..ConstraintSpec::default()
        };
        let set = c.build(10).unwrap();
        assert_eq!(set.cardinality(), 5);
        assert!(set.is_preassigned(0));
        assert!(matches!(
            ConstraintSpec::preset(PresetName::First).build(20),
            Err(ConstraintError::PreassignedOutOfRange { index: 30, n_assets: 20 })
        ));
    }

    #[test]
    fn hash_ignores_output_and_workers() {
        let a = ExperimentSpec::parse(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        b.workers = Some(8);
        assert_eq!(a.config_hash(), b.config_hash());
        b.base_seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
