//! An executable model of the Timaeus particle cosmology.
//!
//! The four classical kinds of matter are convex polyhedra assembled from
//! two elementary right triangles, and everything that happens to them is
//! bookkeeping over those triangles:
//!
//! - [`polyhedra`]: the solids themselves; triangle budgets, dihedral
//!   angles, vertex and space-filling feasibility, and the enumeration
//!   proving only five such solids exist.
//! - [`reactions`]: transformations between kinds as balanced exchanges of
//!   elementary triangles, with earth isolated on its own triangle species.
//! - [`rotation`]: the rotating spherical universe; rim speed, winnowing
//!   pressure and the proper region of each kind.
//! - [`dynamics`]: the grid simulation where pressure shatters enveloped
//!   minorities, pools rebind as their surroundings dictate, matter drifts
//!   to its proper band and voids are squeezed shut.
//!
//! Triangle counts are exact integers everywhere; every phase of the
//! simulation conserves them to the last triangle. Runs are pure functions
//! of configuration and seed.

pub mod dynamics;
pub mod polyhedra;
pub mod reactions;
pub mod rotation;

pub use dynamics::config::{ConfigError, SimConfig};
pub use dynamics::{
    init_grid, run, CosmosGrid, DynamicsError, InitialDistribution, StepReport,
};
pub use polyhedra::{
    dihedral_angle, enumerate_platonic_solids, planar_vertex_fill, space_fill_check,
    ElementaryTriangleKind, FillVerdict, GeometryError, ParticleKind, PolyhedronKind,
    PolyhedronSpec,
};
pub use reactions::{
    apply_reaction, enumerate_balanced_reactions, is_balanced, reassemble, shatter,
    ParticleInventory, Reaction, TransformError, TriangleLedger,
};
pub use rotation::{
    mobility_rank, pressure_at, region_of, speed_at, CylindricalPoint, FieldError,
    RegionBands, RotationParams,
};
