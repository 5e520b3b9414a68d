//! Run configuration: a single JSON document with a schema version.
//!
//! Particles carry string ids; every other section refers to them by id.
//! Physical quantities are either bare numbers (atomic units) or
//! `{"value": .., "unit": ".."}`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use mergo_core::criteria::GeometricCriterion;
use mergo_core::hamiltonian::TrapSpec;
use mergo_core::lzcost::{CostParams, LZParams};
use mergo_core::spin::SpinTarget;
use mergo_core::symmetry::SymmetryDeclaration;
use mergo_core::units::{Dimension, Length, Unit};
use mergo_core::weakmeas::DeltaSchedule;
use mergo_core::{Basis, Configuration, GridSpec, Particle, ParticleSet, Profile, Schedule, Site, Spin};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lz: Option<LzConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Atomic(f64),
    Tagged(TaggedQuantity),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedQuantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn tagged(value: f64, unit: &str) -> Self {
        Quantity::Tagged(TaggedQuantity { value, unit: unit.to_string() })
    }

    pub fn unit(&self, dimension: Dimension) -> Result<(f64, Unit), CliError> {
        match self {
            Quantity::Atomic(v) => Ok((*v, Unit::atomic(dimension))),
            Quantity::Tagged(t) => Ok((t.value, Unit::parse(&t.unit, Some(dimension)).map_err(CliError::config)?)),
        }
    }

    pub fn atomic(&self, dimension: Dimension) -> Result<f64, CliError> {
        let (v, u) = self.unit(dimension)?;
        Ok(mergo_core::units::to_atomic(v, u))
    }

    fn length(&self) -> Result<Length, CliError> {
        let (value, unit) = self.unit(Dimension::Length)?;
        Ok(Length { value, unit })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub grid: GridConfig,
    pub particles: Vec<ParticleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points_per_axis: usize,
    pub dims: usize,
    pub box_length: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticleKindConfig {
    Electron,
    Nucleus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub id: String,
    pub kind: ParticleKindConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(default)]
    pub spin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    #[serde(default)]
    pub bosonic: Vec<Vec<String>>,
    #[serde(default)]
    pub fermionic: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub fragment_a: Vec<String>,
    pub fragment_b: Vec<String>,
    pub softening: Quantity,
    /// Matrix file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<String>,
    /// Drop the grid blocks and keep only the external matrix.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub external_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileConfig {
    Linear,
    Smoothstep,
    Tabulated(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub s0: f64,
    pub s1: f64,
    #[serde(default = "linear")]
    pub f_profile: ProfileConfig,
    #[serde(default = "linear")]
    pub g_profile: ProfileConfig,
}

fn linear() -> ProfileConfig {
    ProfileConfig::Linear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub sites: Vec<TrapSiteConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSiteConfig {
    pub nucleus: String,
    /// One coordinate per grid axis.
    pub center: Vec<Quantity>,
    /// One value (isotropic) or one per grid axis.
    pub frequency: Vec<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionModeConfig {
    Equilibrium,
    Proximity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    pub mode: CriterionModeConfig,
    pub pairs: Vec<PairConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Quantity>,
    /// OR the criterion over every relabeling of identical nuclei.
    #[serde(default)]
    pub symmetrize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub a: String,
    pub b: String,
    pub distance: Quantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinConfig {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConfig {
    /// One configuration, optionally (anti)symmetrized.
    Configuration {
        sites: BTreeMap<String, Vec<i64>>,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        spins: BTreeMap<String, SpinConfig>,
        #[serde(default)]
        symmetrize: bool,
    },
    /// Eigenvector `index` (ascending energy) of `H(s)`.
    Eigenstate { index: usize, s: f64 },
    BasisIndex(usize),
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowConfig {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    /// Schedule point at which the Hamiltonian is frozen.
    pub s: f64,
    pub t_max: f64,
    pub samples: usize,
    #[serde(default = "hann")]
    pub window: WindowConfig,
    #[serde(default)]
    pub spectrum: bool,
}

fn hann() -> WindowConfig {
    WindowConfig::Hann
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub initial: InitialConfig,
    #[serde(default)]
    pub s_from: f64,
    /// Defaults to the end of the schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_to: Option<f64>,
    /// Defaults to the `Δs ≤ 0.1/‖H‖` rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationConfig>,
    /// Also write the final density matrix.
    #[serde(default)]
    pub write_state: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinTargetConfig {
    Singlet,
    Triplet,
    Total(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinProjectionConfig {
    pub particles: Vec<String>,
    pub target: SpinTargetConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub initial: InitialConfig,
    pub delta: f64,
    /// Run the full schedule before measuring.
    #[serde(default)]
    pub propagate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<SpinProjectionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaConfig {
    Constant(f64),
    Geometric { delta0: f64, ratio: f64 },
}

impl DeltaConfig {
    pub fn schedule(&self) -> DeltaSchedule {
        match *self {
            DeltaConfig::Constant(d) => DeltaSchedule::Constant(d),
            DeltaConfig::Geometric { delta0, ratio } => DeltaSchedule::Geometric { delta0, ratio },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelConfig {
    /// Fixed success weight `p`, or one value per node in post-order.
    Synthetic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_node: Option<Vec<f64>>,
    },
    /// The configured Hamiltonian over the full schedule; two leaves only,
    /// fragment A first.
    Scheduled {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default = "one")]
        escalation: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    pub leaves: usize,
    #[serde(default = "two")]
    pub arity: usize,
    pub channel: ChannelConfig,
    pub delta: DeltaConfig,
    pub max_iters: usize,
    #[serde(default)]
    pub renaturalize: bool,
    /// Leaf states for the scheduled channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LzConfig {
    pub masses: [Quantity; 2],
    pub omega: Quantity,
    pub omega_a: Quantity,
    pub v_min: Quantity,
    pub v_max: Quantity,
    #[serde(default = "ten")]
    pub per_decade: usize,
}

fn ten() -> usize {
    10
}

fn three() -> usize {
    3
}

impl LzConfig {
    pub fn rb_cs() -> Self {
        Self {
            masses: [Quantity::tagged(87.0, "u"), Quantity::tagged(133.0, "u")],
            omega: Quantity::tagged(150.0, "kHz"),
            omega_a: Quantity::tagged(110.0, "kHz"),
            v_min: Quantity::tagged(1e-6, "m/s"),
            v_max: Quantity::tagged(1e2, "m/s"),
            per_decade: 10,
        }
    }

    pub fn params(&self) -> Result<(LZParams, f64, f64), CliError> {
        let m1 = self.masses[0].atomic(Dimension::Mass)?;
        let m2 = self.masses[1].atomic(Dimension::Mass)?;
        let v_min = self.v_min.atomic(Dimension::Velocity)?;
        let v_max = self.v_max.atomic(Dimension::Velocity)?;
        let p = LZParams::new(
            m1 * m2 / (m1 + m2),
            self.omega.atomic(Dimension::Energy)?,
            self.omega_a.atomic(Dimension::Energy)?,
            v_min,
        )
        .map_err(CliError::config)?;
        Ok((p, v_min, v_max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub n_el: usize,
    pub n_nuc: usize,
    pub n_grid: f64,
    pub box_volume: f64,
    pub trap_volume: f64,
    pub omega_max: f64,
    pub m_max: f64,
    pub bits: usize,
    #[serde(default = "three")]
    pub axes: usize,
    /// Tie `ω_max` to system size for the scaled row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_per_nucleus: Option<f64>,
}

impl CostConfig {
    pub fn example() -> Self {
        Self {
            n_el: 2,
            n_nuc: 2,
            n_grid: 1e6,
            box_volume: 1e3,
            trap_volume: 1e2,
            omega_max: 1e-3,
            m_max: 1836.15,
            bits: 16,
            axes: 3,
            omega_per_nucleus: Some(5e-4),
        }
    }

    pub fn params(&self) -> CostParams {
        CostParams {
            n_el: self.n_el,
            n_nuc: self.n_nuc,
            n_grid: self.n_grid,
            box_volume: self.box_volume,
            trap_volume: self.trap_volume,
            omega_max: self.omega_max,
            m_max: self.m_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Schema version and id resolution. Physical validity is left to the
    /// constructors of the core types.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let Some(system) = &self.system else {
            for (name, present) in [
                ("hamiltonian", self.hamiltonian.is_some()),
                ("trap", self.trap.is_some()),
                ("criterion", self.criterion.is_some()),
                ("evolve", self.evolve.is_some()),
                ("measure", self.measure.is_some()),
            ] {
                if present {
                    return Err(CliError::Config(format!("section '{name}' needs a 'system' section")));
                }
            }
            return Ok(());
        };
        let ids = system.ids()?;
        let nuclei: BTreeSet<&str> = system
            .particles
            .iter()
            .filter(|p| p.kind == ParticleKindConfig::Nucleus)
            .map(|p| p.id.as_str())
            .collect();
        let resolve = |id: &str, what: &str| {
            if ids.contains_key(id) {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} refers to unknown particle '{id}'")))
            }
        };
        let nucleus = |id: &str, what: &str| {
            if nuclei.contains(id) {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} refers to '{id}', which is not a nucleus")))
            }
        };
        if let Some(sym) = &system.symmetry {
            for id in sym.bosonic.iter().chain(&sym.fermionic).flatten() {
                resolve(id, "symmetry")?;
            }
        }
        if let Some(h) = &self.hamiltonian {
            for id in h.fragment_a.iter().chain(&h.fragment_b) {
                resolve(id, "hamiltonian fragment")?;
            }
        }
        if let Some(t) = &self.trap {
            for s in &t.sites {
                nucleus(&s.nucleus, "trap")?;
            }
        }
        if let Some(c) = &self.criterion {
            for p in &c.pairs {
                nucleus(&p.a, "criterion")?;
                nucleus(&p.b, "criterion")?;
            }
        }
        let check_initial = |init: &InitialConfig| -> Result<(), CliError> {
            if let InitialConfig::Configuration { sites, spins, .. } = init {
                for id in sites.keys().chain(spins.keys()) {
                    resolve(id, "initial configuration")?;
                }
            }
            Ok(())
        };
        if let Some(e) = &self.evolve {
            check_initial(&e.initial)?;
        }
        if let Some(m) = &self.measure {
            check_initial(&m.initial)?;
            if let Some(s) = &m.spin {
                for id in &s.particles {
                    resolve(id, "spin projection")?;
                }
            }
        }
        if let Some(t) = &self.tree {
            if let Some(init) = &t.initial {
                check_initial(init)?;
            }
        }
        Ok(())
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section.as_ref().ok_or_else(|| CliError::Config(format!("missing section '{name}'")))
    }
}

impl SystemConfig {
    /// Particle id → register.
    pub fn ids(&self) -> Result<BTreeMap<String, usize>, CliError> {
        let mut out = BTreeMap::new();
        for (r, p) in self.particles.iter().enumerate() {
            if out.insert(p.id.clone(), r).is_some() {
                return Err(CliError::Config(format!("duplicate particle id '{}'", p.id)));
            }
        }
        Ok(out)
    }

    fn register(&self, id: &str) -> Result<usize, CliError> {
        self.ids()?.get(id).copied().ok_or_else(|| CliError::Config(format!("unknown particle '{id}'")))
    }

    /// Nucleus ordinal (register order among nuclei) of a particle id.
    fn nucleus_index(&self, id: &str) -> Result<usize, CliError> {
        self.particles
            .iter()
            .filter(|p| p.kind == ParticleKindConfig::Nucleus)
            .position(|p| p.id == id)
            .ok_or_else(|| CliError::Config(format!("'{id}' is not a nucleus")))
    }

    pub fn particles(&self) -> Result<ParticleSet, CliError> {
        let list = self
            .particles
            .iter()
            .map(|p| match p.kind {
                ParticleKindConfig::Electron => {
                    if p.mass.is_some() || p.charge.is_some() {
                        return Err(CliError::Config(format!("electron '{}' takes no mass or charge", p.id)));
                    }
                    Ok(Particle::electron(p.spin))
                }
                ParticleKindConfig::Nucleus => {
                    let mass = p.mass.as_ref().ok_or_else(|| CliError::Config(format!("nucleus '{}' needs a mass", p.id)))?;
                    let charge = p.charge.ok_or_else(|| CliError::Config(format!("nucleus '{}' needs a charge", p.id)))?;
                    Ok(Particle::nucleus(mass.atomic(Dimension::Mass)?, charge, p.spin))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        ParticleSet::new(list).map_err(CliError::config)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let l = self.grid.box_length.atomic(Dimension::Length)?;
        GridSpec::new(self.grid.points_per_axis, self.grid.dims, l).map_err(CliError::config)
    }

    pub fn basis(&self) -> Result<Basis, CliError> {
        let grid = self.grid()?;
        let parts = self.particles()?;
        match self.grid.basis_cap {
            Some(cap) => Basis::with_cap(grid, parts, cap),
            None => Basis::new(grid, parts),
        }
        .map_err(CliError::config)
    }

    pub fn symmetry(&self) -> Result<Option<SymmetryDeclaration>, CliError> {
        let Some(sym) = &self.symmetry else { return Ok(None) };
        let map = |sets: &[Vec<String>]| -> Result<Vec<Vec<usize>>, CliError> {
            sets.iter().map(|s| s.iter().map(|id| self.register(id)).collect()).collect()
        };
        SymmetryDeclaration::new(map(&sym.bosonic)?, map(&sym.fermionic)?, &self.particles()?)
            .map(Some)
            .map_err(CliError::config)
    }

    pub fn registers(&self, ids: &[String]) -> Result<Vec<usize>, CliError> {
        ids.iter().map(|id| self.register(id)).collect()
    }

    pub fn configuration(
        &self,
        sites: &BTreeMap<String, Vec<i64>>,
        spins: &BTreeMap<String, SpinConfig>,
    ) -> Result<Configuration, CliError> {
        let dims = self.grid.dims;
        let mut cfg = Configuration { sites: Vec::new(), spins: Vec::new() };
        for p in &self.particles {
            let label = sites
                .get(&p.id)
                .ok_or_else(|| CliError::Config(format!("initial configuration has no site for '{}'", p.id)))?;
            if label.len() != dims {
                return Err(CliError::Config(format!("site of '{}' needs {dims} coordinates", p.id)));
            }
            let mut s = [0i64; 3];
            s[..dims].copy_from_slice(label);
            cfg.sites.push(Site(s));
            cfg.spins.push(match (p.spin, spins.get(&p.id)) {
                (false, None) => None,
                (true, Some(SpinConfig::Up)) => Some(Spin::Up),
                (true, Some(SpinConfig::Down)) => Some(Spin::Down),
                (true, None) => return Err(CliError::Config(format!("'{}' needs a spin label", p.id))),
                (false, Some(_)) => return Err(CliError::Config(format!("'{}' carries no spin", p.id))),
            });
        }
        Ok(cfg)
    }

    pub fn trap(&self, trap: &TrapConfig) -> Result<TrapSpec, CliError> {
        let n_nuc = self.particles.iter().filter(|p| p.kind == ParticleKindConfig::Nucleus).count();
        let dims = self.grid.dims;
        let mut centers = vec![None; n_nuc];
        let mut freqs = vec![[0.0; 3]; n_nuc];
        let mut isotropic = true;
        for site in &trap.sites {
            let j = self.nucleus_index(&site.nucleus)?;
            if centers[j].is_some() {
                return Err(CliError::Config(format!("nucleus '{}' trapped twice", site.nucleus)));
            }
            if site.center.len() != dims {
                return Err(CliError::Config(format!("trap center of '{}' needs {dims} coordinates", site.nucleus)));
            }
            let mut c = [0.0; 3];
            for (a, q) in site.center.iter().enumerate() {
                c[a] = q.atomic(Dimension::Length)?;
            }
            centers[j] = Some(c);
            let w: Vec<f64> =
                site.frequency.iter().map(|q| q.atomic(Dimension::Energy)).collect::<Result<_, _>>()?;
            match w.len() {
                1 => freqs[j] = [w[0]; 3],
                n if n == dims => {
                    isotropic = false;
                    freqs[j][..dims].copy_from_slice(&w);
                }
                _ => return Err(CliError::Config(format!("trap of '{}' needs 1 or {dims} frequencies", site.nucleus))),
            }
        }
        let centers = centers
            .into_iter()
            .enumerate()
            .map(|(j, c)| c.ok_or_else(|| CliError::Config(format!("nucleus {j} has no trap site"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(if isotropic {
            TrapSpec::isotropic(centers, &freqs.iter().map(|w| w[0]).collect::<Vec<_>>())
        } else {
            TrapSpec::anisotropic(centers, freqs)
        })
    }

    pub fn criterion(&self, c: &CriterionConfig) -> Result<GeometricCriterion, CliError> {
        let pairs = c
            .pairs
            .iter()
            .map(|p| Ok((self.nucleus_index(&p.a)?, self.nucleus_index(&p.b)?, p.distance.length()?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let base = match c.mode {
            CriterionModeConfig::Proximity => {
                if c.epsilon.is_some() {
                    return Err(CliError::Config("proximity criteria take no epsilon".into()));
                }
                GeometricCriterion::proximity(&pairs)
            }
            CriterionModeConfig::Equilibrium => {
                let eps = c.epsilon.as_ref().ok_or_else(|| CliError::Config("equilibrium criteria need epsilon".into()))?;
                GeometricCriterion::equilibrium(&pairs, eps.length()?)
            }
        }
        .map_err(CliError::config)?;
        if c.symmetrize {
            let decl = self
                .symmetry()?
                .ok_or_else(|| CliError::Config("symmetrize needs a symmetry declaration".into()))?;
            base.symmetrized(&decl, &self.particles()?).map_err(CliError::config)
        } else {
            Ok(base)
        }
    }
}

impl ScheduleConfig {
    pub fn schedule(&self) -> Result<Schedule, CliError> {
        let profile = |p: &ProfileConfig| match p {
            ProfileConfig::Linear => Ok(Profile::Linear),
            ProfileConfig::Smoothstep => Ok(Profile::Smoothstep),
            ProfileConfig::Tabulated(v) => Profile::tabulated(v.clone()),
        };
        let f = profile(&self.f_profile).map_err(CliError::config)?;
        let g = profile(&self.g_profile).map_err(CliError::config)?;
        Schedule::new(self.s0, self.s1, f, g).map_err(CliError::config)
    }
}

impl SpinTargetConfig {
    pub fn target(&self) -> SpinTarget {
        match *self {
            SpinTargetConfig::Singlet => SpinTarget::Singlet,
            SpinTargetConfig::Triplet => SpinTarget::Triplet,
            SpinTargetConfig::Total(s) => SpinTarget::Total(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "schema_version": 1,
            "system": {
                "grid": {"points_per_axis": 3, "dims": 1, "box_length": 3.0},
                "particles": [
                    {"id": "p", "kind": "nucleus", "mass": {"value": 1.007, "unit": "u"}, "charge": 1.0},
                    {"id": "e", "kind": "electron"}
                ]
            },
            "criterion": {"mode": "proximity", "pairs": [{"a": "p", "b": "p", "distance": 1.0}]}
        }"#
    }

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(minimal()).unwrap();
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
        let system = cfg.system.as_ref().unwrap();
        assert_eq!(system.basis().unwrap().size(), 9);
        assert!((system.particles().unwrap().get(0).mass - 1.007 * 1822.888486209).abs() < 1e-9);
    }

    #[test]
    fn rejects_unknown_keys_and_ids() {
        let bad = minimal().replace("\"schema_version\": 1,", "\"schema_version\": 1, \"sed\": 3,");
        assert!(matches!(RunConfig::parse(&bad), Err(CliError::Config(_))));
        let bad = minimal().replace("\"b\": \"p\"", "\"b\": \"q\"");
        assert!(matches!(RunConfig::parse(&bad), Err(CliError::Config(m)) if m.contains("'q'")));
        let bad = minimal().replace("\"b\": \"p\"", "\"b\": \"e\"");
        assert!(matches!(RunConfig::parse(&bad), Err(CliError::Config(m)) if m.contains("not a nucleus")));
        let bad = minimal().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = minimal().replace("\"unit\": \"u\"", "\"unit\": \"pm\"");
        let cfg = RunConfig::parse(&bad).unwrap();
        assert!(cfg.system.unwrap().particles().is_err());
    }

    #[test]
    fn missing_required_key() {
        let bad = minimal().replace("\"dims\": 1,", "");
        assert!(matches!(RunConfig::parse(&bad), Err(CliError::Config(m)) if m.contains("dims")));
    }
}
