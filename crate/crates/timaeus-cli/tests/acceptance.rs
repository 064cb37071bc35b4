//! Acceptance gate: one test per headline claim, each printing a PASS line
//! with the measured figure (visible under `--nocapture`).
//!
//! The three long-run claims (conservation, void-freedom, stratification)
//! share one 1000-step run of the default configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use timaeus::dynamics::config::{DistributionKind, KindWeights};
use timaeus::polyhedra::{
    dihedral_angle, elementary_triangle_count, enumerate_platonic_solids, planar_vertex_fill,
    space_fill_check, ParticleKind, PolyhedronKind,
};
use timaeus::reactions::{enumerate_balanced_reactions, is_balanced, Reaction};
use timaeus::reactions::ParticleInventory;
use timaeus::rotation::{pressure_at, speed_at, CylindricalPoint, RotationParams};
use timaeus::{init_grid, SimConfig, StepReport};

const FIRE: ParticleKind = ParticleKind::Fire;
const AIR: ParticleKind = ParticleKind::Air;
const WATER: ParticleKind = ParticleKind::Water;
const EARTH: ParticleKind = ParticleKind::Earth;

struct LongRun {
    reports: Vec<StepReport>,
    conserved_every_step: bool,
    elapsed: Duration,
}

static LONG_RUN: OnceLock<LongRun> = OnceLock::new();

/// 1000 steps of the default config (16x16 grid, seed 42), stepped once and
/// shared by every long-run criterion.
fn long_run() -> &'static LongRun {
    LONG_RUN.get_or_init(|| {
        let config = SimConfig::default();
        assert_eq!(config.grid.rho_cells, 16);
        assert_eq!(config.grid.z_cells, 16);
        let started = Instant::now();
        let mut grid = init_grid(&config).expect("default config populates");
        let expected = grid.global_ledger();
        let mut conserved = true;
        let reports: Vec<StepReport> = (0..1000)
            .map(|_| {
                let report = grid.step().expect("default run never diverges");
                conserved &= grid.global_ledger() == expected;
                report
            })
            .collect();
        LongRun {
            reports,
            conserved_every_step: conserved,
            elapsed: started.elapsed(),
        }
    })
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn binary(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_timaeus"));
    cmd.args(args).env_remove("TIMAEUS_SEED");
    cmd
}

#[test]
fn acceptance_triangle_budgets() {
    assert_eq!(elementary_triangle_count(FIRE), 24);
    assert_eq!(elementary_triangle_count(AIR), 48);
    assert_eq!(elementary_triangle_count(WATER), 120);
    assert_eq!(elementary_triangle_count(EARTH), 24);
    println!("PASS triangle budgets: fire 24, air 48, water 120 half-equilaterals; earth 24 isosceles-rights");
}

#[test]
fn acceptance_transformation_arithmetic() {
    let two_fire_one_air = Reaction::new(
        ParticleInventory::new(2, 0, 0, 0),
        ParticleInventory::new(0, 1, 0, 0),
    );
    assert!(is_balanced(&two_fire_one_air));
    assert_eq!(two_fire_one_air.triangle_flow().half_equilateral, 48);

    let five_air_two_water = Reaction::new(
        ParticleInventory::new(0, 5, 0, 0),
        ParticleInventory::new(0, 0, 2, 0),
    );
    assert!(is_balanced(&five_air_two_water));
    assert_eq!(five_air_two_water.triangle_flow().half_equilateral, 240);

    let one_for_one = Reaction::new(
        ParticleInventory::new(1, 0, 0, 0),
        ParticleInventory::new(0, 1, 0, 0),
    );
    assert!(!is_balanced(&one_for_one));
    println!("PASS transformation arithmetic: 2F=1A at 48, 5A=2W at 240, 1F=1A rejected");
}

#[test]
fn acceptance_reaction_enumeration_matches_brute_force() {
    type Tuple = (u64, u64, u64, u64, u64, u64);
    for bound in 1..=6u64 {
        let mut oracle: BTreeSet<Tuple> = BTreeSet::new();
        for fi in 0..=bound {
            for ai in 0..=bound {
                for wi in 0..=bound {
                    for fo in 0..=bound {
                        for ao in 0..=bound {
                            for wo in 0..=bound {
                                let balanced =
                                    24 * fi + 48 * ai + 120 * wi == 24 * fo + 48 * ao + 120 * wo;
                                let nonempty =
                                    (fi, ai, wi) != (0, 0, 0) && (fo, ao, wo) != (0, 0, 0);
                                let canonical = fi * fo == 0 && ai * ao == 0 && wi * wo == 0;
                                if balanced && nonempty && canonical {
                                    oracle.insert((fi, ai, wi, fo, ao, wo));
                                }
                            }
                        }
                    }
                }
            }
        }
        let library: BTreeSet<Tuple> = enumerate_balanced_reactions(bound)
            .iter()
            .map(|r| {
                (
                    r.consumed.fire,
                    r.consumed.air,
                    r.consumed.water,
                    r.produced.fire,
                    r.produced.air,
                    r.produced.water,
                )
            })
            .collect();
        assert_eq!(library, oracle, "bound {bound}");
    }
    println!("PASS reaction enumeration: equals brute force for all bounds 1..=6");
}

#[test]
fn acceptance_planar_angle_sums() {
    let hexagonal = planar_vertex_fill(60.0, 1e-9).unwrap();
    assert!(hexagonal.feasible);
    assert_eq!(hexagonal.copies_used, 6);
    assert_eq!(hexagonal.residual_deg, 0.0);

    let obtuse = planar_vertex_fill(110.0, 1e-9).unwrap();
    assert!(!obtuse.feasible);
    assert_eq!(obtuse.copies_used, 3);
    assert!((obtuse.residual_deg - 30.0).abs() < 1e-12);
    println!("PASS planar angle sums: 6 x 60 closes the turn; 3 x 110 leaves 30 degrees");
}

#[test]
fn acceptance_dihedral_verdicts() {
    // Independent half-angle forms: tan(theta/2) is 1/sqrt(2) for the
    // tetrahedron, sqrt(2) for the octahedron, and phi^2 for the
    // icosahedron.
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let oracle = [
        (PolyhedronKind::Tetrahedron, 2.0 * (1.0 / 2.0_f64.sqrt()).atan().to_degrees()),
        (PolyhedronKind::Octahedron, 2.0 * 2.0_f64.sqrt().atan().to_degrees()),
        (PolyhedronKind::Icosahedron, 2.0 * (phi * phi).atan().to_degrees()),
        (PolyhedronKind::Cube, 90.0),
    ];
    for (kind, expected) in oracle {
        assert!(
            (dihedral_angle(kind) - expected).abs() <= 1e-9,
            "{kind}: {} vs {expected}",
            dihedral_angle(kind)
        );
    }

    let tetra = space_fill_check(PolyhedronKind::Tetrahedron, 1e-6);
    assert!(!tetra.feasible);
    assert!((tetra.residual_deg - 7.356103).abs() <= 1e-5);
    assert!(!space_fill_check(PolyhedronKind::Octahedron, 1e-6).feasible);
    assert!(!space_fill_check(PolyhedronKind::Icosahedron, 1e-6).feasible);
    let cube = space_fill_check(PolyhedronKind::Cube, 1e-6);
    assert!(cube.feasible);
    assert_eq!(cube.copies_used, 4);
    println!(
        "PASS dihedral verdicts: cube packs 4 x 90; tetrahedron residual {:.6}; octahedron and icosahedron infeasible",
        tetra.residual_deg
    );
}

#[test]
fn acceptance_platonic_enumeration() {
    for bound in [5, 9, 33, 60] {
        assert_eq!(enumerate_platonic_solids(bound).len(), 5, "bound {bound}");
    }
    println!("PASS regular solid enumeration: exactly 5 for every bound of at least 5");
}

#[test]
fn acceptance_rotation_field_laws() {
    let params = RotationParams::new(40.0, 2.0, 1.5).unwrap();
    let halved = RotationParams::new(40.0, 1.0, 1.5).unwrap();
    let omega = params.omega();
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    for i in 0..10 {
        for j in 0..10 {
            let rho = 1.7 * f64::from(i + 1);
            let z = -18.0 + 4.0 * f64::from(j);
            let here = CylindricalPoint::new(rho, z);
            let speed = speed_at(here, &params).unwrap();
            let pressure = pressure_at(here, &params).unwrap();
            // Linearity, axis zero, height independence.
            assert!(rel(speed, omega * rho), "speed law at rho {rho}");
            assert!(rel(
                speed_at(CylindricalPoint::new(rho, 0.0), &params).unwrap(),
                speed
            ));
            assert_eq!(speed_at(CylindricalPoint::new(0.0, z), &params).unwrap(), 0.0);
            // Square law in rho, inverse square law in the period.
            if rho * 2.0 <= 40.0 {
                let doubled = pressure_at(CylindricalPoint::new(rho * 2.0, z), &params).unwrap();
                assert!(rel(doubled, 4.0 * pressure), "rho square law at {rho}");
            }
            let faster = pressure_at(here, &halved).unwrap();
            assert!(rel(faster, 4.0 * pressure), "period law at rho {rho}");
        }
    }
    println!("PASS rotation field: linear speed, axis zero, z-free, square laws in rho and 1/period (rel 1e-12 on a 10x10 lattice)");
}

#[test]
fn acceptance_conservation_over_thousand_steps() {
    let run = long_run();
    assert!(run.conserved_every_step, "triangle ledger drifted");
    assert!(
        run.elapsed <= Duration::from_secs(60),
        "run took {:?}",
        run.elapsed
    );

    // The audit command re-checks the same thing from outside.
    let status = binary(&["audit", "--steps", "1000", "--config"])
        .arg(golden("default.toml"))
        .status()
        .expect("binary runs");
    assert_eq!(status.code(), Some(0));
    println!(
        "PASS conservation: per-species ledger exactly constant over 1000 steps on the 16x16 default ({:?}, audit exit 0)",
        run.elapsed
    );
}

#[test]
fn acceptance_no_persistent_voids() {
    let run = long_run();
    let eps = SimConfig::default().dynamics.slack_tolerance;
    for report in &run.reports {
        assert!(
            report.flagged_cells.is_empty(),
            "step {} flagged {:?}",
            report.step,
            report.flagged_cells
        );
        assert!(
            report.max_slack_fraction <= eps,
            "step {}: max slack {}",
            report.step,
            report.max_slack_fraction
        );
    }
    println!(
        "PASS void-freedom: all 256 cells within slack tolerance {eps} after every one of 1000 steps"
    );
}

#[test]
fn acceptance_single_kind_inertness() {
    for kind in ParticleKind::ALL {
        let mut config = SimConfig::default();
        config.grid.rho_cells = 8;
        config.grid.z_cells = 8;
        // Maximal pressure everywhere: no floor below which combat rests.
        config.dynamics.pressure_floor = 0.0;
        config.dynamics.max_flagged_fraction = 1.0;
        config.init.distribution = DistributionKind::UniformMixed;
        let one_hot = |k: ParticleKind| if k == kind { 1.0 } else { 0.0 };
        config.init.weights = Some(KindWeights {
            fire: one_hot(FIRE),
            air: one_hot(AIR),
            water: one_hot(WATER),
            earth: one_hot(EARTH),
        });
        config.validate().unwrap();
        let mut grid = init_grid(&config).unwrap();
        let totals = grid.population_totals();
        assert!(totals.count(kind) > 0);
        assert_eq!(totals.total(), totals.count(kind), "only {kind:?} present");
        for step in 0..100 {
            let report = grid.step().unwrap();
            assert_eq!(report.shattered, 0, "{kind:?} shattered at step {step}");
            assert_eq!(grid.population_totals(), totals, "{kind:?} at step {step}");
        }
    }
    println!("PASS same-kind inertness: each pure grid survives 100 steps of maximal pressure untouched");
}

#[test]
fn acceptance_stratification_order() {
    let run = long_run();
    let strictly_ordered = |r: &StepReport| {
        r.mean_rho[0] > r.mean_rho[1] && r.mean_rho[1] > r.mean_rho[2] && r.mean_rho[2] > r.mean_rho[3]
    };
    let reached = run
        .reports
        .iter()
        .position(|r| strictly_ordered(r))
        .expect("order reached");
    assert!(reached < 500, "order first held at step {}", reached + 1);
    for report in &run.reports[500..] {
        assert!(
            strictly_ordered(report),
            "order broken at step {}",
            report.step
        );
    }
    let last = run.reports.last().unwrap();
    println!(
        "PASS stratification: fire > air > water > earth in mean rho from step {} through 1000 (final {:.4} > {:.4} > {:.4} > {:.4})",
        reached + 1,
        last.mean_rho[0],
        last.mean_rho[1],
        last.mean_rho[2],
        last.mean_rho[3]
    );
}

#[test]
fn acceptance_determinism() {
    // Identical CLI invocations: byte-identical CSV.
    let dir = tempfile::TempDir::new().unwrap();
    let mut series = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let status = binary(&["simulate", "--steps", "40", "--config"])
            .arg(golden("default.toml"))
            .arg("--out")
            .arg(&out)
            .status()
            .expect("binary runs");
        assert_eq!(status.code(), Some(0));
        series.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(series[0], series[1], "CLI runs diverged");

    // Parallel and serial library paths: identical reports.
    let mut config = SimConfig::default();
    config.grid.rho_cells = 8;
    config.grid.z_cells = 8;
    let serial: Vec<StepReport> = {
        let mut grid = init_grid(&config).unwrap();
        (0..40).map(|_| grid.step().unwrap()).collect()
    };
    config.dynamics.parallel = true;
    let threaded: Vec<StepReport> = {
        let mut grid = init_grid(&config).unwrap();
        (0..40).map(|_| grid.step().unwrap()).collect()
    };
    assert_eq!(serial, threaded, "parallel path diverged from serial");
    println!("PASS determinism: repeated CLI runs byte-identical; parallel equals serial report for report");
}
