//! Geometry verification: recompute every figure the model rests on and
//! compare against the documented verdicts.

use timaeus::polyhedra::{
    elementary_triangle_count, enumerate_platonic_solids, planar_vertex_fill, space_fill_check,
    PolyhedronKind,
};

struct Check {
    name: String,
    detail: String,
    ok: bool,
}

/// Runs all geometry checks at the given space-fill tolerance and prints a
/// table. Returns an error naming the first check whose verdict deviates
/// from the documented expectation.
pub fn run(tolerance_deg: f64) -> Result<(), String> {
    let mut checks: Vec<Check> = Vec::new();

    let budgets = [
        (PolyhedronKind::Tetrahedron, 24),
        (PolyhedronKind::Octahedron, 48),
        (PolyhedronKind::Icosahedron, 120),
        (PolyhedronKind::Cube, 24),
    ];
    for (kind, expected) in budgets {
        let got = elementary_triangle_count(kind.particle());
        checks.push(Check {
            name: format!("{} triangle budget", kind.particle().name()),
            detail: format!("{got} elementary triangles (expected {expected})"),
            ok: got == expected,
        });
    }

    // A full turn around a point in the plane: hexagonal closure for the
    // equilateral corner, square closure for the right angle, and a stuck
    // 30 degree gap for an obtuse 110 degree corner.
    let planar = [
        (60.0, 6, 0.0, true),
        (90.0, 4, 0.0, true),
        (110.0, 3, 30.0, false),
    ];
    for (angle, copies, residual, feasible) in planar {
        let verdict = planar_vertex_fill(angle, 1e-9).map_err(|e| e.to_string())?;
        let ok = verdict.copies_used == copies
            && (verdict.residual_deg - residual).abs() < 1e-9
            && verdict.feasible == feasible;
        checks.push(Check {
            name: format!("planar fill {angle} deg"),
            detail: format!(
                "{} copies, residual {:.3} deg, {}",
                verdict.copies_used,
                verdict.residual_deg,
                if verdict.feasible { "closes" } else { "cannot close" },
            ),
            ok,
        });
    }

    // Space filling around an edge: only the cube's right angles close.
    for kind in PolyhedronKind::ALL {
        let verdict = space_fill_check(kind, tolerance_deg);
        let expected = matches!(kind, PolyhedronKind::Cube);
        checks.push(Check {
            name: format!("{kind} space fill"),
            detail: format!(
                "{kind}: residual {:.3}\u{b0} after {} copies, {} (expected {})",
                verdict.residual_deg,
                verdict.copies_used,
                if verdict.feasible { "feasible" } else { "infeasible" },
                if expected { "feasible" } else { "infeasible" },
            ),
            ok: verdict.feasible == expected,
        });
    }

    let pairs = enumerate_platonic_solids(12);
    checks.push(Check {
        name: "regular solid enumeration".to_string(),
        detail: format!("{} solids: {:?} (expected 5)", pairs.len(), pairs),
        ok: pairs.len() == 5,
    });

    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut table = String::new();
    for check in &checks {
        table.push_str(&format!(
            "{:>4}  {:width$}  {}\n",
            if check.ok { "ok" } else { "FAIL" },
            check.name,
            check.detail,
        ));
    }
    crate::emit(&table);

    match checks.iter().find(|c| !c.ok) {
        None => {
            crate::emit(&format!("all {} checks hold\n", checks.len()));
            Ok(())
        }
        Some(first) => Err(format!(
            "verification mismatch: {} ({})",
            first.name, first.detail
        )),
    }
}
