//! Cross-checks reaction enumeration against a from-scratch brute force.
//!
//! The oracle knows nothing about the library's Reaction machinery: it walks
//! every coefficient tuple, balances raw triangle counts with its own
//! constants, and compares the surviving set against the library's output.

use std::collections::BTreeSet;

use timaeus::reactions::{enumerate_balanced_reactions, is_balanced, Reaction};

/// (fire_in, air_in, water_in, fire_out, air_out, water_out)
type Tuple = (u64, u64, u64, u64, u64, u64);

/// Half-equilateral triangles per whole particle, stated independently.
const FIRE_HE: u64 = 24;
const AIR_HE: u64 = 48;
const WATER_HE: u64 = 120;

fn oracle_reactions(max_coefficient: u64) -> BTreeSet<Tuple> {
    let mut set = BTreeSet::new();
    let bound = max_coefficient + 1;
    for fi in 0..bound {
        for ai in 0..bound {
            for wi in 0..bound {
                for fo in 0..bound {
                    for ao in 0..bound {
                        for wo in 0..bound {
                            let consumed = FIRE_HE * fi + AIR_HE * ai + WATER_HE * wi;
                            let produced = FIRE_HE * fo + AIR_HE * ao + WATER_HE * wo;
                            let nonempty = (fi, ai, wi) != (0, 0, 0) && (fo, ao, wo) != (0, 0, 0);
                            let canonical = fi * fo == 0 && ai * ao == 0 && wi * wo == 0;
                            if nonempty && canonical && consumed == produced {
                                set.insert((fi, ai, wi, fo, ao, wo));
                            }
                        }
                    }
                }
            }
        }
    }
    set
}

fn as_tuple(r: &Reaction) -> Tuple {
    (
        r.consumed.fire,
        r.consumed.air,
        r.consumed.water,
        r.produced.fire,
        r.produced.air,
        r.produced.water,
    )
}

#[test]
fn enumeration_matches_brute_force_for_all_bounds_up_to_six() {
    for bound in 1..=6u64 {
        let library: Vec<Tuple> = enumerate_balanced_reactions(bound)
            .iter()
            .map(as_tuple)
            .collect();
        let as_set: BTreeSet<Tuple> = library.iter().copied().collect();
        assert_eq!(as_set.len(), library.len(), "duplicates at bound {bound}");
        assert_eq!(as_set, oracle_reactions(bound), "set mismatch at bound {bound}");
    }
}

#[test]
fn enumerated_reactions_never_touch_earth() {
    for r in enumerate_balanced_reactions(6) {
        assert_eq!(r.consumed.earth, 0);
        assert_eq!(r.produced.earth, 0);
    }
}

#[test]
fn enumerated_reactions_are_balanced_and_canonical_by_the_library_too() {
    for r in enumerate_balanced_reactions(5) {
        assert!(is_balanced(&r), "unbalanced: {r}");
        assert!(r.is_canonical(), "non-canonical: {r}");
    }
}

#[test]
fn the_documented_exchanges_appear_at_their_smallest_bounds() {
    // Two fire into one air needs coefficients up to 2; five air into two
    // water needs 5; one water back into five fire needs 5 as well.
    let at = |bound: u64| oracle_reactions(bound);
    assert!(!at(1).contains(&(2, 0, 0, 0, 1, 0)));
    assert!(at(2).contains(&(2, 0, 0, 0, 1, 0)));
    assert!(at(5).contains(&(0, 5, 0, 0, 0, 2)));
    assert!(at(5).contains(&(0, 0, 1, 5, 0, 0)));
    assert!(at(3).contains(&(0, 0, 1, 3, 1, 0))); // water split into air and fire
    let library: BTreeSet<Tuple> = enumerate_balanced_reactions(5)
        .iter()
        .map(as_tuple)
        .collect();
    assert!(library.contains(&(2, 0, 0, 0, 1, 0)));
    assert!(library.contains(&(0, 5, 0, 0, 0, 2)));
}

#[test]
fn no_balanced_reaction_exists_with_unit_coefficients() {
    assert!(oracle_reactions(1).is_empty());
    assert!(enumerate_balanced_reactions(1).is_empty());
}
