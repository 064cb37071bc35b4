//! The war of the kinds on a rotating grid.
//!
//! Space is the interior of the rotating sphere, cut into cells by radial
//! bands (distance from the polar axis, as a fraction of the widest radius
//! at each height) and horizontal slabs. Cells exactly partition the ball:
//! capacities are closed-form volumes of revolution and sum to `4/3 pi R^3`.
//!
//! Each step applies four phases in a fixed order:
//!
//! 1. **combat**: in any cell pressed harder than the configured floor, a
//!    kind vastly outnumbered by the cell's majority is enveloped and
//!    shattered into free triangles.
//! 2. **reassembly**: free triangle pools bind into whole particles of the
//!    cell's majority kind (isosceles rights always into earth). Particles
//!    that no longer fit spill into the adjacent cell toward their proper
//!    band, or stay pooled.
//! 3. **drift**: every particle outside its proper band attempts one move
//!    along the radial axis toward it. It lands in the first cell with
//!    room; cells whose packed majority leaves gaps wider than the particle
//!    are traversed outright. A cell packed to within the void tolerance
//!    releases only as much as keeps it there; the rest stays put, caulking
//!    the gaps the majority cannot fill with its own grain.
//! 4. **void fixpoint**: cells whose slack exceeds the tolerance pull
//!    particles out of their neighbours (highest pressure first) until the
//!    slack closes, no donor remains, or the iteration cap is hit. Cells
//!    still violating are flagged and reported.
//!
//! A run is a pure function of the configuration and seed: the only
//! stochastic choice is the per-step processing order of drift moves, drawn
//! from a counter-based generator seeded once. The optional thread-pool
//! path parallelises only cell-isolated work and commits cross-cell moves
//! in the same fixed order as the single-threaded path, so reports match
//! byte for byte.
//!
//! Global triangle counts (bound plus pooled, per species) are exactly
//! conserved by every phase; nothing in the engine creates or destroys an
//! elementary triangle.

pub mod config;

use crate::polyhedra::ParticleKind;
use crate::reactions::{shatter, ParticleInventory, TriangleLedger};
use crate::rotation::{pressure_at, CylindricalPoint, RegionBands};
use config::{ConfigError, DistributionKind, SimConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Errors from grid construction and stepping.
#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// An initial distribution asked a cell for more volume than it has.
    #[error(
        "initial distribution overfills cell (rho {rho_index}, z {z_index}): \
         needs {attempted_volume:.6} of capacity {capacity:.6}"
    )]
    OverCapacity {
        rho_index: u32,
        z_index: u32,
        attempted_volume: f64,
        capacity: f64,
    },
    /// A stratified distribution has particles of a kind whose band holds
    /// no cells on this grid.
    #[error("no cells belong to the {kind} band on this grid")]
    EmptyBand { kind: ParticleKind },
    /// Too many cells stayed above the slack tolerance after the fixpoint.
    #[error(
        "void fixpoint diverged at step {step}: {flagged} of {total_cells} cells \
         above slack tolerance (max slack fraction {max_slack_fraction:.6})"
    )]
    FixpointDiverged {
        step: u64,
        flagged: usize,
        total_cells: usize,
        max_slack_fraction: f64,
    },
}

/// How to populate a fresh grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDistribution {
    /// Spread explicit per-kind totals over all cells, proportional to
    /// capacity, largest remainders first.
    UniformMixed { totals: ParticleInventory },
    /// Spread explicit per-kind totals over each kind's own band cells.
    PreStratified { totals: ParticleInventory },
    /// The same count of one kind in every cell.
    SingleKind { kind: ParticleKind, per_cell: u64 },
    /// Fill every cell to `fill_fraction` of capacity with the given count
    /// weights, topping off with fire as the granularity filler.
    UniformFill { fill_fraction: f64, weights: [f64; 4] },
    /// Fill every cell to `fill_fraction` with its own band's kind, fire
    /// topping off the remainder.
    StratifiedFill { fill_fraction: f64 },
}

impl InitialDistribution {
    /// The distribution a configuration file describes.
    pub fn from_config(config: &SimConfig) -> InitialDistribution {
        let init = &config.init;
        match init.distribution {
            DistributionKind::UniformMixed => InitialDistribution::UniformFill {
                fill_fraction: init.fill_fraction,
                weights: init
                    .weights
                    .map(|w| w.as_array())
                    .unwrap_or_else(|| band_matched_weights(config)),
            },
            DistributionKind::PreStratified => InitialDistribution::StratifiedFill {
                fill_fraction: init.fill_fraction,
            },
            DistributionKind::SingleKind => InitialDistribution::SingleKind {
                // validate() guarantees both keys are present
                kind: init.single_kind.expect("validated config"),
                per_cell: init.per_cell.expect("validated config"),
            },
        }
    }
}

/// Count weights making each kind's total volume match its band's share of
/// the universe volume, so a uniform mix can settle into full bands.
pub fn band_matched_weights(config: &SimConfig) -> [f64; 4] {
    // Volume fraction of the ball within normalised axis distance `a`.
    let g = |a: f64| 1.0 - (1.0 - a * a).powf(1.5);
    let [t1, t2, t3] = config.bands.thresholds;
    let shares = [
        1.0 - g(t3),     // fire
        g(t3) - g(t2),   // air
        g(t2) - g(t1),   // water
        g(t1),           // earth
    ];
    let volumes = config.particles.volumes();
    let mut weights = [0.0; 4];
    for kind in ParticleKind::ALL {
        weights[kind.index()] = shares[kind.index()] / volumes[kind.index()];
    }
    weights
}

/// One grid cell: a volume of space with its bound particles and free
/// triangle pools. `capacity`, `normalized_rho`, `pressure` and `region`
/// are fixed at grid construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub rho_index: u32,
    pub z_index: u32,
    /// Exact volume of the cell, in model units.
    pub capacity: f64,
    /// Axis distance of the cell's representative point over the universe
    /// radius, in `[0, 1]`.
    pub normalized_rho: f64,
    /// Rotational pressure at the representative point.
    pub pressure: f64,
    /// Proper kind of this cell's band.
    pub region: ParticleKind,
    pub population: ParticleInventory,
    pub free_pool: TriangleLedger,
}

/// Result of the void-erasing fixpoint loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FixpointOutcome {
    pub reassembled: u64,
    pub iterations: u32,
    /// Cells still above the slack tolerance, as (rho, z) indices.
    pub flagged: Vec<(u32, u32)>,
    pub max_slack_fraction: f64,
}

/// Per-step summary. Totals are recomputed from the grid, so they stay
/// consistent with cell contents by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// 1-based step number.
    pub step: u64,
    /// Whole particles per kind across the grid.
    pub populations: ParticleInventory,
    /// Particles shattered this step.
    pub shattered: u64,
    /// Particles bound from pools this step.
    pub reassembled: u64,
    /// Largest slack-to-capacity ratio over all cells at step end.
    pub max_slack_fraction: f64,
    /// Cells that ended the step above the slack tolerance.
    pub flagged_cells: Vec<(u32, u32)>,
    /// Population-weighted mean normalised axis distance per kind, in
    /// canonical order; 0 for an absent kind.
    pub mean_rho: [f64; 4],
}

impl StepReport {
    fn zeroed(step: u64) -> StepReport {
        StepReport {
            step,
            populations: ParticleInventory::EMPTY,
            shattered: 0,
            reassembled: 0,
            max_slack_fraction: 0.0,
            flagged_cells: Vec::new(),
            mean_rho: [0.0; 4],
        }
    }
}

/// The simulation state: cells, cached model constants and the seeded
/// generator for processing order.
#[derive(Debug, Clone)]
pub struct CosmosGrid {
    config: SimConfig,
    bands: RegionBands,
    cells: Vec<Cell>,
    n_rho: u32,
    n_z: u32,
    volumes: [f64; 4],
    apertures: [f64; 4],
    step_count: u64,
    rng: ChaCha8Rng,
}

/// Build a populated grid from a validated configuration.
pub fn init_grid(config: &SimConfig) -> Result<CosmosGrid, DynamicsError> {
    let distribution = InitialDistribution::from_config(config);
    CosmosGrid::new(config, &distribution)
}

/// Initialise a grid and run it for `steps` steps.
pub fn run(config: &SimConfig, steps: u64) -> Result<Vec<StepReport>, DynamicsError> {
    let mut grid = init_grid(config)?;
    let mut reports = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        reports.push(grid.step()?);
    }
    Ok(reports)
}

impl CosmosGrid {
    pub fn new(
        config: &SimConfig,
        distribution: &InitialDistribution,
    ) -> Result<Self, DynamicsError> {
        config.validate()?;
        let mut grid = Self::empty(config);
        grid.populate(distribution)?;
        Ok(grid)
    }

    /// A validated grid with no matter in it.
    fn empty(config: &SimConfig) -> Self {
        let params = config.rotation.params();
        let radius = params.radius;
        let n_rho = config.grid.rho_cells;
        let n_z = config.grid.z_cells;
        let bands = config.bands;
        let mut cells = Vec::with_capacity((n_rho as usize) * (n_z as usize));
        for z_index in 0..n_z {
            // Slab bounds; z spans [-R, R].
            let z_lo = radius * (2.0 * f64::from(z_index) / f64::from(n_z) - 1.0);
            let z_hi = radius * (2.0 * f64::from(z_index + 1) / f64::from(n_z) - 1.0);
            let z_mid = 0.5 * (z_lo + z_hi);
            // Integral of (R^2 - z^2) dz over the slab.
            let slab_integral = radius * radius * (z_hi - z_lo)
                - (z_hi * z_hi * z_hi - z_lo * z_lo * z_lo) / 3.0;
            let rho_max_mid = (radius * radius - z_mid * z_mid).sqrt();
            for rho_index in 0..n_rho {
                let f_lo = f64::from(rho_index) / f64::from(n_rho);
                let f_hi = f64::from(rho_index + 1) / f64::from(n_rho);
                let capacity = std::f64::consts::PI * (f_hi * f_hi - f_lo * f_lo) * slab_integral;
                let rho_rep = 0.5 * (f_lo + f_hi) * rho_max_mid;
                let normalized_rho = rho_rep / radius;
                let region = bands.kind_at(normalized_rho);
                let mut pressure = pressure_at(CylindricalPoint::new(rho_rep, z_mid), &params)
                    .expect("representative point lies inside the sphere");
                if !config.rotation.earth_co_rotates && region == ParticleKind::Earth {
                    // The central region sits still; no rotational pressure.
                    pressure = 0.0;
                }
                cells.push(Cell {
                    rho_index,
                    z_index,
                    capacity,
                    normalized_rho,
                    pressure,
                    region,
                    population: ParticleInventory::EMPTY,
                    free_pool: TriangleLedger::EMPTY,
                });
            }
        }
        CosmosGrid {
            config: config.clone(),
            bands,
            cells,
            n_rho,
            n_z,
            volumes: config.particles.volumes(),
            apertures: config.particles.apertures(),
            step_count: 0,
            rng: ChaCha8Rng::seed_from_u64(config.dynamics.rng_seed),
        }
    }

    fn populate(&mut self, distribution: &InitialDistribution) -> Result<(), DynamicsError> {
        match *distribution {
            InitialDistribution::UniformFill { fill_fraction, weights } => {
                let denom: f64 = ParticleKind::ALL
                    .iter()
                    .map(|k| weights[k.index()] * self.volumes[k.index()])
                    .sum();
                // Granularity filler: the smallest kind actually in the mix.
                let filler = ParticleKind::ALL
                    .into_iter()
                    .filter(|k| weights[k.index()] > 0.0)
                    .min_by(|a, b| self.volumes[a.index()].total_cmp(&self.volumes[b.index()]))
                    .unwrap_or(ParticleKind::Fire);
                for idx in 0..self.cells.len() {
                    let budget = fill_fraction * self.cells[idx].capacity;
                    if denom > 0.0 {
                        let base = budget / denom;
                        for kind in ParticleKind::ALL {
                            let n = (weights[kind.index()] * base).floor() as u64;
                            *self.cells[idx].population.count_mut(kind) = n;
                        }
                    }
                    self.top_off(idx, fill_fraction, filler);
                }
                Ok(())
            }
            InitialDistribution::StratifiedFill { fill_fraction } => {
                for idx in 0..self.cells.len() {
                    let kind = self.cells[idx].region;
                    let budget = fill_fraction * self.cells[idx].capacity;
                    let n = (budget / self.volumes[kind.index()]).floor() as u64;
                    *self.cells[idx].population.count_mut(kind) = n;
                    // Fire fills what the band's own kind cannot granulate.
                    self.top_off(idx, fill_fraction, ParticleKind::Fire);
                }
                Ok(())
            }
            InitialDistribution::SingleKind { kind, per_cell } => {
                let vol = self.volumes[kind.index()];
                for cell in &mut self.cells {
                    let attempted = per_cell as f64 * vol;
                    if attempted > cell.capacity {
                        return Err(DynamicsError::OverCapacity {
                            rho_index: cell.rho_index,
                            z_index: cell.z_index,
                            attempted_volume: attempted,
                            capacity: cell.capacity,
                        });
                    }
                    *cell.population.count_mut(kind) = per_cell;
                }
                Ok(())
            }
            InitialDistribution::UniformMixed { totals } => {
                let all: Vec<usize> = (0..self.cells.len()).collect();
                // Big kinds first, so their lumpy remainders land while
                // cells are still roomy.
                for kind in [
                    ParticleKind::Earth,
                    ParticleKind::Water,
                    ParticleKind::Air,
                    ParticleKind::Fire,
                ] {
                    self.spread_over(kind, totals.count(kind), &all)?;
                }
                Ok(())
            }
            InitialDistribution::PreStratified { totals } => {
                for kind in [
                    ParticleKind::Earth,
                    ParticleKind::Water,
                    ParticleKind::Air,
                    ParticleKind::Fire,
                ] {
                    let total = totals.count(kind);
                    if total == 0 {
                        continue;
                    }
                    let band: Vec<usize> = (0..self.cells.len())
                        .filter(|&i| self.cells[i].region == kind)
                        .collect();
                    if band.is_empty() {
                        return Err(DynamicsError::EmptyBand { kind });
                    }
                    self.spread_over(kind, total, &band)?;
                }
                Ok(())
            }
        }
    }

    /// Add filler particles until the cell's slack drops to the fill
    /// target, closing the gap the weighted floors leave open.
    fn top_off(&mut self, idx: usize, fill_fraction: f64, filler: ParticleKind) {
        let target_slack = (1.0 - fill_fraction) * self.cells[idx].capacity;
        let vol = self.volumes[filler.index()];
        let slack = self.slack(idx);
        if slack > target_slack {
            let extra = ((slack - target_slack) / vol).floor() as u64;
            *self.cells[idx].population.count_mut(filler) += extra;
        }
    }

    /// Distribute `total` particles of `kind` over the given cells,
    /// proportional to capacity with largest remainders first, skipping
    /// cells a particle no longer fits into.
    fn spread_over(
        &mut self,
        kind: ParticleKind,
        total: u64,
        cell_indices: &[usize],
    ) -> Result<(), DynamicsError> {
        if total == 0 {
            return Ok(());
        }
        let vol = self.volumes[kind.index()];
        let cap_sum: f64 = cell_indices.iter().map(|&i| self.cells[i].capacity).sum();
        let mut placed = 0u64;
        let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(cell_indices.len());
        for &i in cell_indices {
            let exact = total as f64 * self.cells[i].capacity / cap_sum;
            let base = exact.floor() as u64;
            *self.cells[i].population.count_mut(kind) += base;
            placed += base;
            remainders.push((i, exact - exact.floor()));
        }
        remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut deficit = total - placed;
        while deficit > 0 {
            let mut placed_this_round = 0u64;
            for &(i, _) in &remainders {
                if deficit == 0 {
                    break;
                }
                if self.slack(i) >= vol {
                    *self.cells[i].population.count_mut(kind) += 1;
                    deficit -= 1;
                    placed_this_round += 1;
                }
            }
            if placed_this_round == 0 {
                break;
            }
        }
        if deficit > 0 {
            // Nothing can take another particle; report the fullest cell.
            let &worst = cell_indices
                .iter()
                .min_by(|&&a, &&b| self.slack(a).total_cmp(&self.slack(b)))
                .expect("non-empty cell list");
            let cell = &self.cells[worst];
            return Err(DynamicsError::OverCapacity {
                rho_index: cell.rho_index,
                z_index: cell.z_index,
                attempted_volume: self.occupied(worst) + vol,
                capacity: cell.capacity,
            });
        }
        // Proportional bases can still overshoot tiny cells; check hard.
        for &i in cell_indices {
            if self.occupied(i) > self.cells[i].capacity {
                let cell = &self.cells[i];
                return Err(DynamicsError::OverCapacity {
                    rho_index: cell.rho_index,
                    z_index: cell.z_index,
                    attempted_volume: self.occupied(i),
                    capacity: cell.capacity,
                });
            }
        }
        Ok(())
    }

    // ---- accessors ----------------------------------------------------

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn n_rho(&self) -> u32 {
        self.n_rho
    }

    pub fn n_z(&self) -> u32 {
        self.n_z
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, rho_index: u32, z_index: u32) -> &Cell {
        &self.cells[self.cell_index(rho_index, z_index)]
    }

    /// Direct mutable access, for scripted scenarios and fault injection in
    /// tests. The engine itself never needs this.
    pub fn cell_mut(&mut self, rho_index: u32, z_index: u32) -> &mut Cell {
        let idx = self.cell_index(rho_index, z_index);
        &mut self.cells[idx]
    }

    /// Particle volume per kind, indexed by [`ParticleKind::index`].
    pub fn volumes(&self) -> [f64; 4] {
        self.volumes
    }

    pub fn apertures(&self) -> [f64; 4] {
        self.apertures
    }

    fn cell_index(&self, rho_index: u32, z_index: u32) -> usize {
        assert!(rho_index < self.n_rho && z_index < self.n_z);
        (z_index as usize) * (self.n_rho as usize) + (rho_index as usize)
    }

    /// Volume bound in whole particles in a cell.
    pub fn occupied(&self, idx: usize) -> f64 {
        occupied_volume(&self.cells[idx].population, &self.volumes)
    }

    /// Unbound volume in a cell. Pooled triangles are flat and occupy none.
    pub fn slack(&self, idx: usize) -> f64 {
        self.cells[idx].capacity - self.occupied(idx)
    }

    pub fn slack_fraction(&self, idx: usize) -> f64 {
        (self.slack(idx) / self.cells[idx].capacity).max(0.0)
    }

    /// Whole particles per kind across the grid.
    pub fn population_totals(&self) -> ParticleInventory {
        let mut totals = ParticleInventory::EMPTY;
        for cell in &self.cells {
            for kind in ParticleKind::ALL {
                *totals.count_mut(kind) += cell.population.count(kind);
            }
        }
        totals
    }

    /// Every elementary triangle in the universe, bound or pooled, per
    /// species. This is the conserved quantity.
    pub fn global_ledger(&self) -> TriangleLedger {
        let mut ledger = TriangleLedger::EMPTY;
        for cell in &self.cells {
            ledger += cell.population.bound_ledger();
            ledger += cell.free_pool;
        }
        ledger
    }

    /// Population-weighted mean normalised axis distance per kind.
    pub fn mean_normalized_rho(&self) -> [f64; 4] {
        let mut weighted = [0.0f64; 4];
        let mut counts = [0u64; 4];
        for cell in &self.cells {
            for kind in ParticleKind::ALL {
                let n = cell.population.count(kind);
                weighted[kind.index()] += n as f64 * cell.normalized_rho;
                counts[kind.index()] += n;
            }
        }
        let mut means = [0.0f64; 4];
        for k in 0..4 {
            if counts[k] > 0 {
                means[k] = weighted[k] / counts[k] as f64;
            }
        }
        means
    }

    pub fn max_slack_fraction(&self) -> f64 {
        (0..self.cells.len())
            .map(|i| self.slack_fraction(i))
            .fold(0.0, f64::max)
    }

    fn is_devoid_of_matter(&self) -> bool {
        self.cells
            .iter()
            .all(|c| c.population.is_empty() && c.free_pool.is_empty())
    }

    /// Largest particle count of `vol` that fits in the cell's slack.
    fn admit_count(&self, idx: usize, vol: f64) -> u64 {
        admit_into(self.slack(idx), vol)
    }

    /// Most numerous kind in a cell, ties to the earlier kind in canonical
    /// order; `None` for an empty cell.
    fn majority_kind(&self, idx: usize) -> Option<ParticleKind> {
        let population = &self.cells[idx].population;
        let mut best: Option<(ParticleKind, u64)> = None;
        for kind in ParticleKind::ALL {
            let n = population.count(kind);
            if n > 0 && best.map_or(true, |(_, m)| n > m) {
                best = Some((kind, n));
            }
        }
        best.map(|(k, _)| k)
    }

    /// Most numerous of fire, air and water, for binding half-equilateral
    /// pools. Falls back to fire for cells holding none of the three: loose
    /// crumbs bind as the lightest kind.
    fn majority_he_kind(&self, idx: usize) -> ParticleKind {
        let population = &self.cells[idx].population;
        let mut best = ParticleKind::Fire;
        let mut best_count = 0u64;
        for kind in [ParticleKind::Fire, ParticleKind::Air, ParticleKind::Water] {
            let n = population.count(kind);
            if n > best_count {
                best = kind;
                best_count = n;
            }
        }
        best
    }

    /// Whether a cell's band position already satisfies a kind, else the
    /// radial direction toward the kind's band.
    fn band_direction(&self, kind: ParticleKind, normalized_rho: f64) -> i64 {
        let (start, end) = self.bands.band_of(kind);
        let in_band =
            normalized_rho >= start && (kind == ParticleKind::Fire || normalized_rho < end);
        if in_band {
            0
        } else if normalized_rho < start {
            1
        } else {
            -1
        }
    }

    // ---- phases --------------------------------------------------------

    /// Shatter enveloped minorities in every cell under pressure. Returns
    /// the count of particles shattered.
    pub fn combat_phase(&mut self) -> u64 {
        let theta = self.config.dynamics.envelopment_threshold;
        let floor = self.config.dynamics.pressure_floor;
        let combat_cell = |cell: &mut Cell| -> u64 {
            if cell.pressure < floor {
                return 0;
            }
            let majority = ParticleKind::ALL
                .iter()
                .map(|&k| cell.population.count(k))
                .max()
                .unwrap_or(0);
            if majority == 0 {
                return 0;
            }
            let mut shattered = 0;
            // Counts are compared against the pre-phase majority: all
            // envelopments in a cell happen simultaneously.
            for kind in ParticleKind::ALL {
                let n = cell.population.count(kind);
                if n > 0 && (n as f64) < theta * (majority as f64) {
                    let (left, freed) =
                        shatter(&cell.population, kind, n).expect("count taken from inventory");
                    cell.population = left;
                    cell.free_pool += freed;
                    shattered += n;
                }
            }
            shattered
        };
        if self.config.dynamics.parallel {
            self.cells.par_iter_mut().map(combat_cell).sum()
        } else {
            self.cells.iter_mut().map(combat_cell).sum()
        }
    }

    /// Bind pools into particles of each cell's majority kind, spilling
    /// particles that no longer fit toward their proper band. Returns the
    /// count of particles bound.
    pub fn reassembly_phase(&mut self) -> u64 {
        // Stage 1, cell-isolated: bind what fits in place, record the rest
        // as spill intents (their triangles stay pooled until committed).
        let volumes = self.volumes;
        let stage_one = |cell: &mut Cell| -> (u64, [u64; 4]) {
            let mut formed = 0u64;
            let mut pending = [0u64; 4];
            // Isosceles rights bind first: they have exactly one outlet.
            for kind in [ParticleKind::Earth, majority_he_of(&cell.population)] {
                let budget = kind.triangle_budget();
                let species = kind.elementary_kind();
                let formable = cell.free_pool.count(species) / budget;
                if formable == 0 {
                    continue;
                }
                let vol = volumes[kind.index()];
                let slack = cell.capacity - occupied_volume(&cell.population, &volumes);
                let fit = admit_into(slack, vol).min(formable);
                *cell.population.count_mut(kind) += fit;
                *cell.free_pool.count_mut(species) -= fit * budget;
                formed += fit;
                pending[kind.index()] += formable - fit;
            }
            (formed, pending)
        };
        let results: Vec<(u64, [u64; 4])> = if self.config.dynamics.parallel {
            self.cells.par_iter_mut().map(stage_one).collect()
        } else {
            self.cells.iter_mut().map(stage_one).collect()
        };

        // Stage 2, sequential in cell order: commit spills toward the
        // proper band where they fit; everything else stays pooled.
        let mut formed: u64 = results.iter().map(|(f, _)| *f).sum();
        for idx in 0..self.cells.len() {
            let pending = results[idx].1;
            for kind in ParticleKind::ALL {
                let n = pending[kind.index()];
                if n == 0 {
                    continue;
                }
                let dir = self.band_direction(kind, self.cells[idx].normalized_rho);
                if dir == 0 {
                    continue;
                }
                let dest_rho = self.cells[idx].rho_index as i64 + dir;
                if dest_rho < 0 || dest_rho as u32 >= self.n_rho {
                    continue;
                }
                let dest = self.cell_index(dest_rho as u32, self.cells[idx].z_index);
                let vol = self.volumes[kind.index()];
                let q = self.admit_count(dest, vol).min(n);
                if q == 0 {
                    continue;
                }
                let budget = kind.triangle_budget();
                let species = kind.elementary_kind();
                *self.cells[idx].free_pool.count_mut(species) -= q * budget;
                *self.cells[dest].population.count_mut(kind) += q;
                formed += q;
            }
        }
        formed
    }

    /// Every particle outside its band attempts one move toward it.
    /// Processing order over (cell, kind) is shuffled by the run's seeded
    /// generator; commits are sequential in that order. Returns particles
    /// moved.
    pub fn drift_phase(&mut self) -> u64 {
        // Departures per cell are capped at the phase-start count, so no
        // particle hops twice however the processing order falls (arrivals
        // are indistinguishable from natives; the cap is what single-hop
        // means for counts).
        let snapshot: Vec<[u64; 4]> = self
            .cells
            .iter()
            .map(|c| ParticleKind::ALL.map(|k| c.population.count(k)))
            .collect();
        let n_tokens = self.cells.len() as u32 * 4;
        let mut order: Vec<u32> = (0..n_tokens).collect();
        order.shuffle(&mut self.rng);
        let mut moved = 0;
        for token in order {
            let idx = (token / 4) as usize;
            let kind = ParticleKind::ALL[(token % 4) as usize];
            moved += self.drift_group(idx, kind, snapshot[idx][kind.index()]);
        }
        moved
    }

    /// Move up to `eligible` particles of one kind from one cell toward
    /// their band as room allows, traversing packed cells whose majority
    /// leaves gaps wider than the particle.
    fn drift_group(&mut self, from: usize, kind: ParticleKind, eligible: u64) -> u64 {
        let mut remaining = self.cells[from].population.count(kind).min(eligible);
        if remaining == 0 {
            return 0;
        }
        let dir = self.band_direction(kind, self.cells[from].normalized_rho);
        if dir == 0 {
            return 0;
        }
        let vol = self.volumes[kind.index()];
        // A packed cell releases matter only down to the void tolerance:
        // whatever departure would open a gap stays put, caulking the
        // majority's interstices. Cells already torn open release freely.
        let eps = self.config.dynamics.slack_tolerance;
        let cap = self.cells[from].capacity;
        let src_slack = self.slack(from);
        if src_slack <= eps * cap {
            let budget = ((eps * cap - src_slack) / vol).floor() as u64;
            remaining = remaining.min(budget);
            if remaining == 0 {
                return 0;
            }
        }
        let z = self.cells[from].z_index;
        let mut moved = 0;
        let mut pos = self.cells[from].rho_index as i64 + dir;
        while remaining > 0 && pos >= 0 && (pos as u32) < self.n_rho {
            let dest = self.cell_index(pos as u32, z);
            let q = self.admit_count(dest, vol).min(remaining);
            if q > 0 {
                *self.cells[from].population.count_mut(kind) -= q;
                *self.cells[dest].population.count_mut(kind) += q;
                remaining -= q;
                moved += q;
            }
            if remaining == 0 {
                break;
            }
            // Pass through the packed cell if its majority's interstices
            // admit this particle; otherwise the way is shut.
            match self.majority_kind(dest) {
                Some(m) if vol <= self.apertures[m.index()] => pos += dir,
                _ => break,
            }
        }
        moved
    }

    /// Pull matter into slack until every cell is within tolerance, nothing
    /// moves, or the iteration cap is hit. Cells still violating are
    /// flagged, never silently dropped.
    pub fn void_fixpoint_phase(&mut self) -> FixpointOutcome {
        let eps = self.config.dynamics.slack_tolerance;
        let max_iters = self.config.dynamics.max_fixpoint_iters;
        let mut reassembled = 0;
        let mut iterations = 0;
        for _ in 0..max_iters {
            iterations += 1;
            reassembled += self.bind_pools_in_place();
            let violating: Vec<usize> = (0..self.cells.len())
                .filter(|&i| self.slack_fraction(i) > eps)
                .collect();
            if violating.is_empty() {
                break;
            }
            let mut any_progress = false;
            for &idx in &violating {
                any_progress |= self.fill_from_neighbors(idx, eps);
            }
            if !any_progress {
                break;
            }
        }
        let flagged: Vec<(u32, u32)> = self
            .cells
            .iter()
            .enumerate()
            .filter(|(i, _)| self.slack_fraction(*i) > eps)
            .map(|(_, c)| (c.rho_index, c.z_index))
            .collect();
        FixpointOutcome {
            reassembled,
            iterations,
            flagged,
            max_slack_fraction: self.max_slack_fraction(),
        }
    }

    /// Bind pools in place (majority rule, no spilling), as part of the
    /// fixpoint iteration. Returns particles bound.
    fn bind_pools_in_place(&mut self) -> u64 {
        let mut formed = 0;
        for idx in 0..self.cells.len() {
            for pick_majority in [false, true] {
                let kind = if pick_majority {
                    self.majority_he_kind(idx)
                } else {
                    ParticleKind::Earth
                };
                let budget = kind.triangle_budget();
                let species = kind.elementary_kind();
                let formable = self.cells[idx].free_pool.count(species) / budget;
                if formable == 0 {
                    continue;
                }
                let fit = self
                    .admit_count(idx, self.volumes[kind.index()])
                    .min(formable);
                *self.cells[idx].population.count_mut(kind) += fit;
                *self.cells[idx].free_pool.count_mut(species) -= fit * budget;
                formed += fit;
            }
        }
        formed
    }

    /// Pull particles from neighbours into one violating cell: sources in
    /// descending pressure order, kinds nearest this cell's band first.
    /// Returns whether anything moved.
    fn fill_from_neighbors(&mut self, idx: usize, eps: f64) -> bool {
        let cell_rho = self.cells[idx].rho_index;
        let cell_z = self.cells[idx].z_index;
        // Refill past the flag threshold, down to half the tolerance. Cells
        // repaired to exactly the threshold would have no headroom left to
        // absorb later deficits, and the shortfall would pile up in whichever
        // cell the cascade reaches last.
        let target = 0.5 * eps * self.cells[idx].capacity;
        let nr = self.cells[idx].normalized_rho;

        let mut neighbors: Vec<usize> = Vec::with_capacity(4);
        if cell_rho > 0 {
            neighbors.push(self.cell_index(cell_rho - 1, cell_z));
        }
        if cell_rho + 1 < self.n_rho {
            neighbors.push(self.cell_index(cell_rho + 1, cell_z));
        }
        if cell_z > 0 {
            neighbors.push(self.cell_index(cell_rho, cell_z - 1));
        }
        if cell_z + 1 < self.n_z {
            neighbors.push(self.cell_index(cell_rho, cell_z + 1));
        }
        neighbors.sort_by(|&a, &b| {
            self.cells[b]
                .pressure
                .total_cmp(&self.cells[a].pressure)
                .then(a.cmp(&b))
        });

        // Kinds whose band lies at this cell come first: like gathers to
        // like as the press squeezes matter into the gap.
        let mut kind_order = ParticleKind::ALL;
        kind_order.sort_by(|&a, &b| {
            let dist = |k: ParticleKind| {
                let (start, end) = self.bands.band_of(k);
                (0.5 * (start + end) - nr).abs()
            };
            dist(a)
                .total_cmp(&dist(b))
                .then(crate::rotation::mobility_rank(b).cmp(&crate::rotation::mobility_rank(a)))
        });

        // Two passes. Gently first: donors give only what keeps their own
        // slack within tolerance, so a deficit spreads across the
        // neighbourhood instead of hopping whole from cell to cell. If the
        // cell is still in violation afterwards, take by force, but only
        // until the flag clears: the drained donor becomes a violator and
        // pulls from its own neighbours on the next sweep, so the deficit
        // cascades until it reaches cells with headroom to absorb it.
        let mut progress = false;
        for forceful in [false, true] {
            let line = if forceful {
                eps * self.cells[idx].capacity
            } else {
                target
            };
            for &src in &neighbors {
                for &kind in &kind_order {
                    let slack = self.slack(idx);
                    if slack <= line {
                        return progress;
                    }
                    let vol = self.volumes[kind.index()];
                    let mut available = self.cells[src].population.count(kind);
                    if !forceful {
                        let headroom = eps * self.cells[src].capacity - self.slack(src);
                        if headroom < vol {
                            continue;
                        }
                        available = available.min((headroom / vol).floor() as u64);
                    }
                    if available == 0 {
                        continue;
                    }
                    let need = ((slack - line) / vol).ceil() as u64;
                    let q = need.min(admit_into(slack, vol)).min(available);
                    if q == 0 {
                        continue;
                    }
                    *self.cells[src].population.count_mut(kind) -= q;
                    *self.cells[idx].population.count_mut(kind) += q;
                    progress = true;
                }
            }
        }
        progress
    }

    /// One full step: combat, reassembly, drift, void fixpoint. Errors only
    /// when the fixpoint leaves more than the configured fraction of cells
    /// flagged; the report for every successful step carries any flags.
    pub fn step(&mut self) -> Result<StepReport, DynamicsError> {
        self.step_count += 1;
        if self.is_devoid_of_matter() {
            // An empty universe is a fixed point; there is no matter to
            // pack and nothing to report.
            return Ok(StepReport::zeroed(self.step_count));
        }
        let shattered = self.combat_phase();
        let mut reassembled = self.reassembly_phase();
        self.drift_phase();
        let outcome = self.void_fixpoint_phase();
        reassembled += outcome.reassembled;

        let report = StepReport {
            step: self.step_count,
            populations: self.population_totals(),
            shattered,
            reassembled,
            max_slack_fraction: outcome.max_slack_fraction,
            flagged_cells: outcome.flagged,
            mean_rho: self.mean_normalized_rho(),
        };
        let flagged = report.flagged_cells.len();
        let limit = self.config.dynamics.max_flagged_fraction * self.cells.len() as f64;
        if flagged as f64 > limit {
            return Err(DynamicsError::FixpointDiverged {
                step: self.step_count,
                flagged,
                total_cells: self.cells.len(),
                max_slack_fraction: report.max_slack_fraction,
            });
        }
        Ok(report)
    }
}

/// Volume bound in whole particles.
fn occupied_volume(population: &ParticleInventory, volumes: &[f64; 4]) -> f64 {
    ParticleKind::ALL
        .iter()
        .map(|&k| population.count(k) as f64 * volumes[k.index()])
        .sum()
}

/// Largest count of `vol`-sized particles fitting in `slack`.
fn admit_into(slack: f64, vol: f64) -> u64 {
    if slack < vol {
        return 0;
    }
    let mut q = (slack / vol).floor() as u64;
    while q > 0 && q as f64 * vol > slack {
        q -= 1;
    }
    q
}

/// Most numerous of fire, air and water in a population, ties to the
/// earlier kind, fire when none are present.
fn majority_he_of(population: &ParticleInventory) -> ParticleKind {
    let mut best = ParticleKind::Fire;
    let mut best_count = 0u64;
    for kind in [ParticleKind::Fire, ParticleKind::Air, ParticleKind::Water] {
        let n = population.count(kind);
        if n > best_count {
            best = kind;
            best_count = n;
        }
    }
    best
}
