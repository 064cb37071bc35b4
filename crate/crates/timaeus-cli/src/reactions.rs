//! Balanced-reaction tables as CSV.

use std::io::Write;
use std::path::Path;

use timaeus::reactions::enumerate_balanced_reactions;

pub const HEADER: &str = "fire_in,air_in,water_in,fire_out,air_out,water_out,he_triangles";

/// All canonical balanced reactions with coefficients up to `max`, in the
/// enumeration's stable lexicographic order.
pub fn table(max: u64) -> String {
    let mut csv = String::from(HEADER);
    csv.push('\n');
    for r in enumerate_balanced_reactions(max) {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.consumed.fire,
            r.consumed.air,
            r.consumed.water,
            r.produced.fire,
            r.produced.air,
            r.produced.water,
            r.triangle_flow().half_equilateral,
        ));
    }
    csv
}

pub fn run(max: u64, out: Option<&Path>) -> Result<(), String> {
    let csv = table(max);
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => match std::io::stdout().write_all(csv.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                return Err(format!("cannot write to stdout: {e}"));
            }
            _ => {}
        },
    }
    Ok(())
}
