//! Simulation configuration: a sectioned key-value file mapped onto plain
//! structs. Unknown keys are hard errors with the offending key named;
//! missing keys fall back to documented defaults, so an empty file is the
//! default run.

use crate::polyhedra::{ParticleKind, PolyhedronSpec};
use crate::rotation::{RegionBands, RotationParams};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Errors raised while loading or validating a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// Syntax error or unknown key; the message carries the location.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A key parsed but its value is out of range or inconsistent.
    #[error("invalid config value {key}: {reason}")]
    Invalid { key: String, reason: String },
    /// The file could not be read at all.
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

/// Grid resolution: radial bands times height slabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rho_cells: u32,
    pub z_cells: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { rho_cells: 16, z_cells: 16 }
    }
}

/// Rotation of the universe plus the stance on whether the central region
/// rides along with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationConfig {
    pub radius: f64,
    pub period: f64,
    pub pressure_gain: f64,
    /// When false, cells whose proper region is earth feel no rotational
    /// pressure: the central body sits still while the heavens turn. The
    /// sources can be read either way; this keeps both readable from one
    /// switch. Default true (everything co-rotates).
    pub earth_co_rotates: bool,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig { radius: 22.0, period: 1.0, pressure_gain: 1.0, earth_co_rotates: true }
    }
}

impl RotationConfig {
    pub fn params(&self) -> RotationParams {
        RotationParams {
            radius: self.radius,
            period: self.period,
            pressure_gain: self.pressure_gain,
        }
    }
}

/// Particle sizes and the interstice apertures they leave when packed.
///
/// Edge lengths grow from fire to earth, so particle volumes order
/// fire < air < water < earth and coarser kinds leave wider gaps.
/// Apertures default to `aperture_scale * edge(kind)` and may be pinned
/// per kind; whatever the source, they must order
/// earth > water > air > fire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleConfig {
    pub edge_fire: f64,
    pub edge_air: f64,
    pub edge_water: f64,
    pub edge_earth: f64,
    pub aperture_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture_fire: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture_air: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture_water: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aperture_earth: Option<f64>,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        ParticleConfig {
            edge_fire: 0.8,
            edge_air: 0.97,
            edge_water: 1.0,
            edge_earth: 1.3,
            aperture_scale: 0.55,
            aperture_fire: None,
            aperture_air: None,
            aperture_water: None,
            aperture_earth: None,
        }
    }
}

impl ParticleConfig {
    pub fn edge(&self, kind: ParticleKind) -> f64 {
        match kind {
            ParticleKind::Fire => self.edge_fire,
            ParticleKind::Air => self.edge_air,
            ParticleKind::Water => self.edge_water,
            ParticleKind::Earth => self.edge_earth,
        }
    }

    /// Particle volume per kind, indexed by [`ParticleKind::index`].
    pub fn volumes(&self) -> [f64; 4] {
        ParticleKind::ALL.map(|kind| {
            PolyhedronSpec::new(kind, self.edge(kind))
                .map(|spec| spec.volume())
                .unwrap_or(f64::NAN)
        })
    }

    /// Interstice aperture per kind, indexed by [`ParticleKind::index`].
    pub fn apertures(&self) -> [f64; 4] {
        let explicit = [
            self.aperture_fire,
            self.aperture_air,
            self.aperture_water,
            self.aperture_earth,
        ];
        ParticleKind::ALL
            .map(|kind| explicit[kind.index()].unwrap_or(self.aperture_scale * self.edge(kind)))
    }
}

/// Knobs of the dynamics engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// A kind whose count falls below this fraction of the cell majority's
    /// count is enveloped and shattered (under sufficient pressure).
    pub envelopment_threshold: f64,
    /// Minimum rotational pressure for combat to occur at all.
    pub pressure_floor: f64,
    /// Largest tolerated slack-to-capacity ratio per cell at step end.
    pub slack_tolerance: f64,
    /// Iteration cap for the void-erasing fixpoint loop.
    pub max_fixpoint_iters: u32,
    /// The run aborts when more than this fraction of cells stays flagged.
    pub max_flagged_fraction: f64,
    /// Seed for every stochastic choice; a run is a pure function of the
    /// configuration and this seed.
    pub rng_seed: u64,
    /// Process cell-isolated phases on a thread pool. Results are
    /// byte-identical to the single-threaded path.
    pub parallel: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            envelopment_threshold: 0.0005,
            pressure_floor: 10_000.0,
            slack_tolerance: 0.05,
            max_fixpoint_iters: 256,
            max_flagged_fraction: 0.25,
            rng_seed: 42,
            parallel: false,
        }
    }
}

/// Relative particle-count weights for mixed initial fills.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindWeights {
    pub fire: f64,
    pub air: f64,
    pub water: f64,
    pub earth: f64,
}

impl KindWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.fire, self.air, self.water, self.earth]
    }
}

/// Which initial arrangement of matter to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// Every cell gets the same mix, scaled to its capacity.
    UniformMixed,
    /// Each cell is filled with its proper region's kind.
    PreStratified,
    /// Every cell gets the same count of one kind.
    SingleKind,
}

/// Initial distribution section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub distribution: DistributionKind,
    /// Fraction of each cell's capacity to fill initially.
    pub fill_fraction: f64,
    /// Count weights for `uniform_mixed`. Absent means weights chosen so
    /// each kind's total volume matches its proper band's share of the
    /// universe volume.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<KindWeights>,
    /// Kind for `single_kind` fills.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_kind: Option<ParticleKind>,
    /// Per-cell count for `single_kind` fills.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_cell: Option<u64>,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            distribution: DistributionKind::UniformMixed,
            fill_fraction: 0.97,
            weights: None,
            single_kind: None,
            per_cell: None,
        }
    }
}

/// Complete simulation configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub grid: GridConfig,
    pub rotation: RotationConfig,
    pub bands: RegionBands,
    pub particles: ParticleConfig,
    pub dynamics: DynamicsConfig,
    pub init: InitConfig,
}

impl SimConfig {
    /// Parse and validate a config from text.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: SimConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Parse and validate a config file.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Serialise back to config text; reparsing reproduces `self` exactly.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    /// Check every invariant the engine depends on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid.rho_cells == 0 {
            return Err(invalid("grid.rho_cells", "must be at least 1"));
        }
        if self.grid.z_cells == 0 {
            return Err(invalid("grid.z_cells", "must be at least 1"));
        }
        self.rotation
            .params()
            .validate()
            .map_err(|e| invalid("rotation", e.to_string()))?;
        self.bands
            .validate()
            .map_err(|e| invalid("bands.thresholds", e.to_string()))?;

        for kind in ParticleKind::ALL {
            let edge = self.particles.edge(kind);
            if !edge.is_finite() || edge <= 0.0 {
                return Err(invalid(
                    &format!("particles.edge_{kind}"),
                    "edge length must be finite and positive",
                ));
            }
        }
        if !self.particles.aperture_scale.is_finite() || self.particles.aperture_scale <= 0.0 {
            return Err(invalid("particles.aperture_scale", "must be finite and positive"));
        }
        let apertures = self.particles.apertures();
        for kind in ParticleKind::ALL {
            let a = apertures[kind.index()];
            if !a.is_finite() || a <= 0.0 {
                return Err(invalid(
                    &format!("particles.aperture_{kind}"),
                    "aperture must be finite and positive",
                ));
            }
        }
        // Coarser kinds must leave wider gaps: earth > water > air > fire.
        let [f, a, w, e] = apertures;
        if !(e > w && w > a && a > f) {
            return Err(invalid(
                "particles",
                format!(
                    "apertures must strictly order earth > water > air > fire, \
                     got fire {f}, air {a}, water {w}, earth {e}"
                ),
            ));
        }

        let d = &self.dynamics;
        if !d.envelopment_threshold.is_finite()
            || d.envelopment_threshold <= 0.0
            || d.envelopment_threshold >= 1.0
        {
            return Err(invalid(
                "dynamics.envelopment_threshold",
                "must lie strictly between 0 and 1",
            ));
        }
        if !d.pressure_floor.is_finite() || d.pressure_floor < 0.0 {
            return Err(invalid("dynamics.pressure_floor", "must be finite and non-negative"));
        }
        if !d.slack_tolerance.is_finite() || d.slack_tolerance <= 0.0 || d.slack_tolerance >= 1.0 {
            return Err(invalid("dynamics.slack_tolerance", "must lie strictly between 0 and 1"));
        }
        if d.max_fixpoint_iters == 0 {
            return Err(invalid("dynamics.max_fixpoint_iters", "must be at least 1"));
        }
        if !d.max_flagged_fraction.is_finite()
            || !(0.0..=1.0).contains(&d.max_flagged_fraction)
        {
            return Err(invalid("dynamics.max_flagged_fraction", "must lie within [0, 1]"));
        }

        let init = &self.init;
        if !init.fill_fraction.is_finite()
            || init.fill_fraction <= 0.0
            || init.fill_fraction > 1.0
        {
            return Err(invalid("init.fill_fraction", "must lie within (0, 1]"));
        }
        if let Some(weights) = &init.weights {
            let arr = weights.as_array();
            if arr.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(invalid("init.weights", "weights must be finite and non-negative"));
            }
            if arr.iter().sum::<f64>() <= 0.0 {
                return Err(invalid("init.weights", "at least one weight must be positive"));
            }
        }
        match init.distribution {
            DistributionKind::SingleKind => {
                if init.single_kind.is_none() {
                    return Err(invalid(
                        "init.single_kind",
                        "required when distribution = \"single_kind\"",
                    ));
                }
                if init.per_cell.is_none() {
                    return Err(invalid(
                        "init.per_cell",
                        "required when distribution = \"single_kind\"",
                    ));
                }
            }
            DistributionKind::UniformMixed | DistributionKind::PreStratified => {}
        }
        Ok(())
    }
}

// ParticleKind appears in config files as its lowercase name.
impl Serialize for ParticleKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ParticleKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        ParticleKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                serde::de::Error::custom(format!(
                    "unknown particle kind {name:?}, expected fire, air, water or earth"
                ))
            })
    }
}
