//! Regular-polyhedron particle geometry.
//!
//! The model builds its four particle species from two elementary right
//! triangles: the half-equilateral (30-60-90) and the isosceles right
//! triangle (45-45-90). Six half-equilaterals tile one equilateral face,
//! four isosceles rights tile one square face, which fixes the per-particle
//! triangle budgets:
//!
//! | particle | solid        | faces | triangles |
//! |----------|--------------|-------|-----------|
//! | fire     | tetrahedron  | 4     | 24        |
//! | air      | octahedron   | 8     | 48        |
//! | water    | icosahedron  | 20    | 120       |
//! | earth    | cube         | 6     | 24        |
//!
//! The 120 figure belongs to the icosahedron (20 faces of 6 triangles).
//! Classical summaries occasionally misattribute it to the dodecahedron;
//! that solid has no place here, since pentagonal faces decompose into
//! neither elementary triangle, and it is deliberately excluded from
//! [`ParticleKind`].

use thiserror::Error;

/// Errors from geometric feasibility queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// Angle outside the open interval (0, 360) degrees.
    #[error("angle {angle_deg} deg is outside the open interval (0, 360)")]
    AngleOutOfRange { angle_deg: f64 },
    /// Tolerance must be finite and non-negative.
    #[error("tolerance {tolerance_deg} deg is not a finite non-negative angle")]
    InvalidTolerance { tolerance_deg: f64 },
    /// Edge lengths must be finite and strictly positive.
    #[error("edge length {edge_length} is not finite and strictly positive")]
    InvalidEdgeLength { edge_length: f64 },
}

/// The two elementary right triangles every particle face decomposes into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementaryTriangleKind {
    /// Half of an equilateral triangle: 30-60-90.
    HalfEquilateral,
    /// Half of a square: 45-45-90.
    IsoscelesRight,
}

impl ElementaryTriangleKind {
    /// Interior angles in degrees; they sum to exactly 180.
    pub const fn angles_deg(self) -> [u32; 3] {
        match self {
            ElementaryTriangleKind::HalfEquilateral => [30, 60, 90],
            ElementaryTriangleKind::IsoscelesRight => [45, 45, 90],
        }
    }
}

/// The four particle species, in the fixed canonical order used everywhere
/// for iteration and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParticleKind {
    Fire,
    Air,
    Water,
    Earth,
}

impl ParticleKind {
    /// All species in canonical order.
    pub const ALL: [ParticleKind; 4] = [
        ParticleKind::Fire,
        ParticleKind::Air,
        ParticleKind::Water,
        ParticleKind::Earth,
    ];

    /// Position in [`Self::ALL`], for dense per-kind arrays.
    pub const fn index(self) -> usize {
        match self {
            ParticleKind::Fire => 0,
            ParticleKind::Air => 1,
            ParticleKind::Water => 2,
            ParticleKind::Earth => 3,
        }
    }

    /// The regular solid this species is built as.
    pub const fn polyhedron(self) -> PolyhedronKind {
        match self {
            ParticleKind::Fire => PolyhedronKind::Tetrahedron,
            ParticleKind::Air => PolyhedronKind::Octahedron,
            ParticleKind::Water => PolyhedronKind::Icosahedron,
            ParticleKind::Earth => PolyhedronKind::Cube,
        }
    }

    /// Which elementary triangle this species is assembled from.
    pub const fn elementary_kind(self) -> ElementaryTriangleKind {
        match self {
            ParticleKind::Earth => ElementaryTriangleKind::IsoscelesRight,
            _ => ElementaryTriangleKind::HalfEquilateral,
        }
    }

    /// Elementary triangles bound in one whole particle.
    pub const fn triangle_budget(self) -> u64 {
        let p = self.polyhedron();
        p.face_count() as u64 * p.triangles_per_face() as u64
    }

    /// Geometric description at a given edge length.
    pub fn spec(self, edge_length: f64) -> Result<PolyhedronSpec, GeometryError> {
        PolyhedronSpec::new(self, edge_length)
    }

    pub const fn name(self) -> &'static str {
        match self {
            ParticleKind::Fire => "fire",
            ParticleKind::Air => "air",
            ParticleKind::Water => "water",
            ParticleKind::Earth => "earth",
        }
    }
}

impl std::fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The four regular solids realised by particles. The dodecahedron is
/// excluded: its pentagonal faces cannot be tiled by either elementary
/// triangle, so it never participates in particle transformations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolyhedronKind {
    Tetrahedron,
    Octahedron,
    Icosahedron,
    Cube,
}

impl PolyhedronKind {
    pub const ALL: [PolyhedronKind; 4] = [
        PolyhedronKind::Tetrahedron,
        PolyhedronKind::Octahedron,
        PolyhedronKind::Icosahedron,
        PolyhedronKind::Cube,
    ];

    /// The particle species built as this solid.
    pub const fn particle(self) -> ParticleKind {
        match self {
            PolyhedronKind::Tetrahedron => ParticleKind::Fire,
            PolyhedronKind::Octahedron => ParticleKind::Air,
            PolyhedronKind::Icosahedron => ParticleKind::Water,
            PolyhedronKind::Cube => ParticleKind::Earth,
        }
    }

    pub const fn face_count(self) -> u32 {
        match self {
            PolyhedronKind::Tetrahedron => 4,
            PolyhedronKind::Octahedron => 8,
            PolyhedronKind::Icosahedron => 20,
            PolyhedronKind::Cube => 6,
        }
    }

    pub const fn face_shape(self) -> FaceShape {
        match self {
            PolyhedronKind::Cube => FaceShape::Square,
            _ => FaceShape::EquilateralTriangle,
        }
    }

    /// Elementary triangles tiling one face: six halves of an equilateral
    /// triangle, four halves-of-halves of a square.
    pub const fn triangles_per_face(self) -> u32 {
        match self.face_shape() {
            FaceShape::EquilateralTriangle => 6,
            FaceShape::Square => 4,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            PolyhedronKind::Tetrahedron => "tetrahedron",
            PolyhedronKind::Octahedron => "octahedron",
            PolyhedronKind::Icosahedron => "icosahedron",
            PolyhedronKind::Cube => "cube",
        }
    }
}

impl std::fmt::Display for PolyhedronKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of a polyhedron face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceShape {
    EquilateralTriangle,
    Square,
}

/// Full geometric description of one particle species at a concrete size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyhedronSpec {
    pub kind: PolyhedronKind,
    pub face_count: u32,
    pub face_shape: FaceShape,
    pub triangles_per_face: u32,
    pub elementary_kind: ElementaryTriangleKind,
    pub edge_length: f64,
}

impl PolyhedronSpec {
    pub fn new(particle: ParticleKind, edge_length: f64) -> Result<Self, GeometryError> {
        if !edge_length.is_finite() || edge_length <= 0.0 {
            return Err(GeometryError::InvalidEdgeLength { edge_length });
        }
        let kind = particle.polyhedron();
        Ok(PolyhedronSpec {
            kind,
            face_count: kind.face_count(),
            face_shape: kind.face_shape(),
            triangles_per_face: kind.triangles_per_face(),
            elementary_kind: particle.elementary_kind(),
            edge_length,
        })
    }

    /// Total elementary triangles bound in this particle.
    pub fn triangle_count(&self) -> u64 {
        self.face_count as u64 * self.triangles_per_face as u64
    }

    /// Enclosed volume; scales with the cube of the edge length.
    pub fn volume(&self) -> f64 {
        unit_volume(self.kind.particle()) * self.edge_length.powi(3)
    }
}

/// A concrete planar figure: `copies` corners of `angle_deg` degrees laid
/// around a shared vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexFigure {
    pub angle_deg: f64,
    pub copies: u32,
}

impl VertexFigure {
    pub fn total_deg(&self) -> f64 {
        f64::from(self.copies) * self.angle_deg
    }
}

/// Outcome of packing copies of an angle around a point or an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillVerdict {
    /// True when the leftover gap is within tolerance of zero.
    pub feasible: bool,
    /// Largest count whose total does not exceed the full turn.
    pub copies_used: u32,
    /// Degrees left over after placing `copies_used` copies.
    pub residual_deg: f64,
}

/// Elementary triangles bound in one whole particle of `kind`.
///
/// Fire 24, air 48, water 120, earth 24. Water's 120 is the largest budget;
/// see the module docs for why it belongs to the icosahedron.
pub const fn elementary_triangle_count(kind: ParticleKind) -> u64 {
    kind.triangle_budget()
}

/// Largest `k` with `k * angle <= 360` in floating-point arithmetic.
fn max_copies_within_turn(angle_deg: f64) -> u32 {
    let mut k = (360.0 / angle_deg).floor() as u32;
    // Division may land on either side of the exact bound; the product is
    // the contract, so adjust against it.
    while f64::from(k + 1) * angle_deg <= 360.0 {
        k += 1;
    }
    while k > 0 && f64::from(k) * angle_deg > 360.0 {
        k -= 1;
    }
    k
}

fn check_tolerance(tolerance_deg: f64) -> Result<(), GeometryError> {
    if !tolerance_deg.is_finite() || tolerance_deg < 0.0 {
        return Err(GeometryError::InvalidTolerance { tolerance_deg });
    }
    Ok(())
}

/// How many copies of a corner angle fit flat around a point, and whether
/// they close the full turn.
///
/// Feasibility here is the plane-tiling test applied to faces and their
/// corners: 60 deg closes with six copies, 90 deg with four, while 110 deg
/// leaves a 30 deg gap after three copies and can never close.
pub fn planar_vertex_fill(
    angle_deg: f64,
    tolerance_deg: f64,
) -> Result<FillVerdict, GeometryError> {
    if !angle_deg.is_finite() || angle_deg <= 0.0 || angle_deg >= 360.0 {
        return Err(GeometryError::AngleOutOfRange { angle_deg });
    }
    check_tolerance(tolerance_deg)?;
    let copies = max_copies_within_turn(angle_deg);
    let residual = 360.0 - f64::from(copies) * angle_deg;
    Ok(FillVerdict {
        feasible: residual <= tolerance_deg,
        copies_used: copies,
        residual_deg: residual,
    })
}

/// Dihedral angle of the solid in degrees.
///
/// Exact closed forms: tetrahedron `acos(1/3)`, octahedron `acos(-1/3)`,
/// icosahedron `acos(-sqrt(5)/3)`, cube exactly 90.
pub fn dihedral_angle(kind: PolyhedronKind) -> f64 {
    match kind {
        PolyhedronKind::Tetrahedron => (1.0 / 3.0_f64).acos().to_degrees(),
        PolyhedronKind::Octahedron => (-1.0 / 3.0_f64).acos().to_degrees(),
        PolyhedronKind::Icosahedron => (-(5.0_f64.sqrt()) / 3.0).acos().to_degrees(),
        PolyhedronKind::Cube => 90.0,
    }
}

/// Whether copies of the solid can close the full turn around a shared edge.
///
/// Only the cube closes (4 x 90). The tetrahedron leaves about 7.356 deg
/// after five copies: packed tetrahedra look space-filling at a glance but a
/// thin wedge always remains.
///
/// # Panics
///
/// Panics if `tolerance_deg` is negative or non-finite; a feasibility gate
/// with a nonsense tolerance is a programming error, not a model state.
pub fn space_fill_check(kind: PolyhedronKind, tolerance_deg: f64) -> FillVerdict {
    assert!(
        tolerance_deg.is_finite() && tolerance_deg >= 0.0,
        "tolerance must be finite and non-negative, got {tolerance_deg}"
    );
    let angle = dihedral_angle(kind);
    let copies = max_copies_within_turn(angle);
    let residual = 360.0 - f64::from(copies) * angle;
    FillVerdict {
        feasible: residual <= tolerance_deg,
        copies_used: copies,
        residual_deg: residual,
    }
}

/// Enumerate the regular solids as (face sides `p`, faces per vertex `q`)
/// pairs, by exhaustive search over `3..=search_bound` for both.
///
/// A vertex needs `q` copies of the face's interior angle strictly under a
/// full turn: `q * (p - 2) * 180 / p < 360`, checked here in exact integer
/// form as `q * (p - 2) < 2 * p`. Exactly five pairs survive for any bound
/// of at least 5; the boundary cases (4,4) and (3,6) tile the plane instead.
pub fn enumerate_platonic_solids(search_bound: u32) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for p in 3..=search_bound {
        for q in 3..=search_bound {
            if u64::from(q) * u64::from(p - 2) < 2 * u64::from(p) {
                pairs.push((p, q));
            }
        }
    }
    pairs
}

/// Volume of one particle at edge length 1.
///
/// Closed forms: tetrahedron `sqrt(2)/12`, octahedron `sqrt(2)/3`,
/// icosahedron `5(3 + sqrt(5))/12`, cube 1.
pub fn unit_volume(kind: ParticleKind) -> f64 {
    match kind.polyhedron() {
        PolyhedronKind::Tetrahedron => 2.0_f64.sqrt() / 12.0,
        PolyhedronKind::Octahedron => 2.0_f64.sqrt() / 3.0,
        PolyhedronKind::Icosahedron => 5.0 * (3.0 + 5.0_f64.sqrt()) / 12.0,
        PolyhedronKind::Cube => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_budgets_match_face_decomposition() {
        assert_eq!(elementary_triangle_count(ParticleKind::Fire), 24);
        assert_eq!(elementary_triangle_count(ParticleKind::Air), 48);
        assert_eq!(elementary_triangle_count(ParticleKind::Water), 120);
        assert_eq!(elementary_triangle_count(ParticleKind::Earth), 24);
        for kind in ParticleKind::ALL {
            let spec = kind.spec(1.0).unwrap();
            assert_eq!(spec.triangle_count(), kind.triangle_budget());
            assert_eq!(
                spec.triangle_count(),
                u64::from(spec.face_count) * u64::from(spec.triangles_per_face)
            );
        }
    }

    #[test]
    fn elementary_angles_sum_to_straight_angle() {
        for kind in [
            ElementaryTriangleKind::HalfEquilateral,
            ElementaryTriangleKind::IsoscelesRight,
        ] {
            assert_eq!(kind.angles_deg().iter().sum::<u32>(), 180);
        }
    }

    #[test]
    fn particle_solid_mapping_roundtrips() {
        for kind in ParticleKind::ALL {
            assert_eq!(kind.polyhedron().particle(), kind);
        }
        assert_eq!(ParticleKind::Earth.elementary_kind(), ElementaryTriangleKind::IsoscelesRight);
        for kind in [ParticleKind::Fire, ParticleKind::Air, ParticleKind::Water] {
            assert_eq!(kind.elementary_kind(), ElementaryTriangleKind::HalfEquilateral);
        }
    }

    #[test]
    fn planar_fill_closes_for_divisors_of_the_turn() {
        let sixty = planar_vertex_fill(60.0, 0.0).unwrap();
        assert!(sixty.feasible);
        assert_eq!(sixty.copies_used, 6);
        assert_eq!(sixty.residual_deg, 0.0);

        let ninety = planar_vertex_fill(90.0, 0.0).unwrap();
        assert!(ninety.feasible);
        assert_eq!(ninety.copies_used, 4);
        assert_eq!(ninety.residual_deg, 0.0);
    }

    #[test]
    fn planar_fill_rejects_obtuse_non_divisor() {
        // Corner angle of the 110-35-35 triangle: three copies leave 30 deg.
        let verdict = planar_vertex_fill(110.0, 1e-9).unwrap();
        assert!(!verdict.feasible);
        assert_eq!(verdict.copies_used, 3);
        assert_eq!(verdict.residual_deg, 30.0);
        // A generous tolerance may accept the same gap.
        assert!(planar_vertex_fill(110.0, 30.0).unwrap().feasible);
    }

    #[test]
    fn planar_fill_domain_errors() {
        assert!(matches!(
            planar_vertex_fill(0.0, 0.0),
            Err(GeometryError::AngleOutOfRange { .. })
        ));
        assert!(matches!(
            planar_vertex_fill(360.0, 0.0),
            Err(GeometryError::AngleOutOfRange { .. })
        ));
        assert!(matches!(
            planar_vertex_fill(-5.0, 0.0),
            Err(GeometryError::AngleOutOfRange { .. })
        ));
        assert!(matches!(
            planar_vertex_fill(60.0, -1.0),
            Err(GeometryError::InvalidTolerance { .. })
        ));
        assert!(matches!(
            planar_vertex_fill(f64::NAN, 0.0),
            Err(GeometryError::AngleOutOfRange { .. })
        ));
    }

    #[test]
    fn dihedral_angles_match_closed_forms() {
        let tol = 1e-12;
        assert!((dihedral_angle(PolyhedronKind::Tetrahedron) - 70.52877936550931).abs() < tol);
        assert!((dihedral_angle(PolyhedronKind::Octahedron) - 109.47122063449069).abs() < tol);
        assert!((dihedral_angle(PolyhedronKind::Icosahedron) - 138.1896851042214).abs() < tol);
        assert_eq!(dihedral_angle(PolyhedronKind::Cube), 90.0);
        // Tetrahedron and octahedron dihedrals are supplementary.
        assert!(
            (dihedral_angle(PolyhedronKind::Tetrahedron)
                + dihedral_angle(PolyhedronKind::Octahedron)
                - 180.0)
                .abs()
                < tol
        );
    }

    #[test]
    fn only_the_cube_fills_space_around_an_edge() {
        let tol = 1e-9;
        let cube = space_fill_check(PolyhedronKind::Cube, tol);
        assert!(cube.feasible);
        assert_eq!(cube.copies_used, 4);
        assert_eq!(cube.residual_deg, 0.0);

        let tetra = space_fill_check(PolyhedronKind::Tetrahedron, tol);
        assert!(!tetra.feasible);
        assert_eq!(tetra.copies_used, 5);
        assert!((tetra.residual_deg - 7.356103172453459).abs() < 1e-9);

        let octa = space_fill_check(PolyhedronKind::Octahedron, tol);
        assert!(!octa.feasible);
        assert_eq!(octa.copies_used, 3);
        assert!((octa.residual_deg - 31.586338096527925).abs() < 1e-9);

        let icosa = space_fill_check(PolyhedronKind::Icosahedron, tol);
        assert!(!icosa.feasible);
        assert_eq!(icosa.copies_used, 2);
        assert!((icosa.residual_deg - 83.62062979155718).abs() < 1e-9);
    }

    #[test]
    fn tetrahedron_wedge_submerges_under_loose_tolerance() {
        // With a tolerance wider than the wedge the tetrahedron looks
        // space-filling, which is exactly the near-miss the check exposes.
        assert!(space_fill_check(PolyhedronKind::Tetrahedron, 10.0).feasible);
    }

    #[test]
    fn platonic_enumeration_finds_exactly_five() {
        let expected = vec![(3, 3), (3, 4), (3, 5), (4, 3), (5, 3)];
        for bound in [5, 6, 7, 10, 23, 50] {
            assert_eq!(enumerate_platonic_solids(bound), expected, "bound {bound}");
        }
        // Tight bounds truncate the search space, not the criterion.
        assert_eq!(enumerate_platonic_solids(3), vec![(3, 3)]);
        assert_eq!(enumerate_platonic_solids(4), vec![(3, 3), (3, 4), (4, 3)]);
    }

    #[test]
    fn plane_tilings_sit_exactly_on_the_boundary() {
        // (4,4) and (3,6) give q * (p-2) == 2p: flat, not solid.
        assert!(!enumerate_platonic_solids(10).contains(&(4, 4)));
        assert!(!enumerate_platonic_solids(10).contains(&(3, 6)));
        assert!(!enumerate_platonic_solids(10).contains(&(6, 3)));
    }

    #[test]
    fn unit_volumes_match_closed_forms() {
        let tol = 1e-12;
        assert!((unit_volume(ParticleKind::Fire) - 0.11785113019775793).abs() < tol);
        assert!((unit_volume(ParticleKind::Air) - 0.47140452079103173).abs() < tol);
        assert!((unit_volume(ParticleKind::Water) - 2.1816949906249126).abs() < tol);
        assert_eq!(unit_volume(ParticleKind::Earth), 1.0);
    }

    #[test]
    fn volume_scales_with_edge_cubed() {
        for kind in ParticleKind::ALL {
            let unit = kind.spec(1.0).unwrap().volume();
            for edge in [0.5, 2.0, 3.7] {
                let scaled = kind.spec(edge).unwrap().volume();
                let expected = unit * edge * edge * edge;
                assert!(
                    (scaled - expected).abs() <= 1e-12 * expected.abs(),
                    "{kind}: {scaled} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn spec_rejects_bad_edges() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                ParticleKind::Fire.spec(bad),
                Err(GeometryError::InvalidEdgeLength { .. })
            ));
        }
    }
}
