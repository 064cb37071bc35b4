//! Triangle-conserving particle transformations.
//!
//! Particles of fire, air and water are alternative bindings of the same
//! stock of half-equilateral triangles (24, 48 and 120 per particle), so
//! they can dissolve into one another. Earth is built from the isosceles
//! right triangle instead: it can be shattered, but its triangles only ever
//! reassemble as earth. All arithmetic here is exact integer arithmetic;
//! no transformation may create or destroy an elementary triangle.
//!
//! A reaction such as `2 fire -> 1 air` is *balanced* when both sides bind
//! the same triangle counts per species (here 48 half-equilaterals), and
//! *canonical* when no kind appears on both sides. Dividing the
//! half-equilateral balance by 24 shows the conserved combination
//! `fire + 2 air + 5 water`.

use crate::polyhedra::{ElementaryTriangleKind, ParticleKind};
use thiserror::Error;

/// Errors from transformation arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    /// The reaction does not conserve triangle counts per species.
    #[error("reaction does not balance elementary triangle counts")]
    UnbalancedReaction,
    /// The inventory cannot pay the consumed side.
    #[error("insufficient {kind}: reaction consumes {needed}, inventory holds {available}")]
    InsufficientParticles {
        kind: ParticleKind,
        needed: u64,
        available: u64,
    },
    /// Multiplicity must be at least 1.
    #[error("reaction multiplicity must be positive")]
    ZeroMultiplicity,
    /// A count overflowed 64 bits; the model never needs counts this large.
    #[error("particle count arithmetic overflowed")]
    CountOverflow,
}

/// Free elementary triangles, counted per species.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriangleLedger {
    pub half_equilateral: u64,
    pub isosceles_right: u64,
}

impl TriangleLedger {
    pub const EMPTY: TriangleLedger = TriangleLedger {
        half_equilateral: 0,
        isosceles_right: 0,
    };

    pub fn count(&self, species: ElementaryTriangleKind) -> u64 {
        match species {
            ElementaryTriangleKind::HalfEquilateral => self.half_equilateral,
            ElementaryTriangleKind::IsoscelesRight => self.isosceles_right,
        }
    }

    pub fn count_mut(&mut self, species: ElementaryTriangleKind) -> &mut u64 {
        match species {
            ElementaryTriangleKind::HalfEquilateral => &mut self.half_equilateral,
            ElementaryTriangleKind::IsoscelesRight => &mut self.isosceles_right,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.half_equilateral == 0 && self.isosceles_right == 0
    }

    pub fn checked_add(&self, other: &TriangleLedger) -> Option<TriangleLedger> {
        Some(TriangleLedger {
            half_equilateral: self.half_equilateral.checked_add(other.half_equilateral)?,
            isosceles_right: self.isosceles_right.checked_add(other.isosceles_right)?,
        })
    }
}

impl std::ops::Add for TriangleLedger {
    type Output = TriangleLedger;

    fn add(self, other: TriangleLedger) -> TriangleLedger {
        TriangleLedger {
            half_equilateral: self.half_equilateral + other.half_equilateral,
            isosceles_right: self.isosceles_right + other.isosceles_right,
        }
    }
}

impl std::ops::AddAssign for TriangleLedger {
    fn add_assign(&mut self, other: TriangleLedger) {
        self.half_equilateral += other.half_equilateral;
        self.isosceles_right += other.isosceles_right;
    }
}

/// Whole particles counted per kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleInventory {
    pub fire: u64,
    pub air: u64,
    pub water: u64,
    pub earth: u64,
}

impl ParticleInventory {
    pub const EMPTY: ParticleInventory = ParticleInventory {
        fire: 0,
        air: 0,
        water: 0,
        earth: 0,
    };

    pub fn new(fire: u64, air: u64, water: u64, earth: u64) -> Self {
        ParticleInventory { fire, air, water, earth }
    }

    pub fn count(&self, kind: ParticleKind) -> u64 {
        match kind {
            ParticleKind::Fire => self.fire,
            ParticleKind::Air => self.air,
            ParticleKind::Water => self.water,
            ParticleKind::Earth => self.earth,
        }
    }

    pub fn count_mut(&mut self, kind: ParticleKind) -> &mut u64 {
        match kind {
            ParticleKind::Fire => &mut self.fire,
            ParticleKind::Air => &mut self.air,
            ParticleKind::Water => &mut self.water,
            ParticleKind::Earth => &mut self.earth,
        }
    }

    pub fn total(&self) -> u64 {
        self.fire + self.air + self.water + self.earth
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Triangles bound inside these particles, per species.
    pub fn bound_ledger(&self) -> TriangleLedger {
        let mut ledger = TriangleLedger::EMPTY;
        for kind in ParticleKind::ALL {
            *ledger.count_mut(kind.elementary_kind()) +=
                self.count(kind) * kind.triangle_budget();
        }
        ledger
    }
}

impl std::fmt::Display for ParticleInventory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{{fire: {}, air: {}, water: {}, earth: {}}}",
            self.fire, self.air, self.water, self.earth
        )
    }
}

/// One transformation rule: the particles a single firing consumes and the
/// particles it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reaction {
    pub consumed: ParticleInventory,
    pub produced: ParticleInventory,
}

impl Reaction {
    pub fn new(consumed: ParticleInventory, produced: ParticleInventory) -> Self {
        Reaction { consumed, produced }
    }

    /// No kind appears with a nonzero count on both sides.
    pub fn is_canonical(&self) -> bool {
        ParticleKind::ALL
            .iter()
            .all(|&k| self.consumed.count(k) == 0 || self.produced.count(k) == 0)
    }

    /// Triangles released by one firing of the consumed side; for a balanced
    /// reaction this equals the triangles bound by the produced side.
    pub fn triangle_flow(&self) -> TriangleLedger {
        self.consumed.bound_ledger()
    }
}

impl std::fmt::Display for Reaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = |inv: &ParticleInventory, f: &mut std::fmt::Formatter<'_>| {
            let mut first = true;
            for kind in ParticleKind::ALL {
                let n = inv.count(kind);
                if n > 0 {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "{n} {kind}")?;
                    first = false;
                }
            }
            if first {
                write!(f, "0")?;
            }
            Ok(())
        };
        side(&self.consumed, f)?;
        write!(f, " -> ")?;
        side(&self.produced, f)
    }
}

/// True when the reaction conserves triangle counts for both species: the
/// half-equilateral balance `24 df + 48 da + 120 dw = 0` and equal earth on
/// both sides (isosceles rights never change kind).
pub fn is_balanced(reaction: &Reaction) -> bool {
    reaction.consumed.bound_ledger() == reaction.produced.bound_ledger()
}

/// Fire one balanced reaction `multiplicity` times against an inventory.
///
/// The inventory must cover `multiplicity` copies of the consumed side; the
/// error names the first deficient kind in canonical order.
pub fn apply_reaction(
    inventory: &ParticleInventory,
    reaction: &Reaction,
    multiplicity: u64,
) -> Result<ParticleInventory, TransformError> {
    if multiplicity == 0 {
        return Err(TransformError::ZeroMultiplicity);
    }
    if !is_balanced(reaction) {
        return Err(TransformError::UnbalancedReaction);
    }
    let mut result = *inventory;
    for kind in ParticleKind::ALL {
        let needed = reaction
            .consumed
            .count(kind)
            .checked_mul(multiplicity)
            .ok_or(TransformError::CountOverflow)?;
        let available = inventory.count(kind);
        if needed > available {
            return Err(TransformError::InsufficientParticles { kind, needed, available });
        }
        *result.count_mut(kind) -= needed;
    }
    for kind in ParticleKind::ALL {
        let made = reaction
            .produced
            .count(kind)
            .checked_mul(multiplicity)
            .ok_or(TransformError::CountOverflow)?;
        let slot = result.count_mut(kind);
        *slot = slot.checked_add(made).ok_or(TransformError::CountOverflow)?;
    }
    Ok(result)
}

/// Break `count` particles of `kind` into free elementary triangles.
///
/// Returns the reduced inventory and the freed triangles (count times the
/// kind's budget, in the kind's species).
pub fn shatter(
    inventory: &ParticleInventory,
    kind: ParticleKind,
    count: u64,
) -> Result<(ParticleInventory, TriangleLedger), TransformError> {
    let available = inventory.count(kind);
    if count > available {
        return Err(TransformError::InsufficientParticles { kind, needed: count, available });
    }
    let mut result = *inventory;
    *result.count_mut(kind) -= count;
    let mut freed = TriangleLedger::EMPTY;
    *freed.count_mut(kind.elementary_kind()) = count
        .checked_mul(kind.triangle_budget())
        .ok_or(TransformError::CountOverflow)?;
    Ok((result, freed))
}

/// Bind as many whole particles of `target` as the pool affords.
///
/// Consumes only the target's own triangle species and returns the particle
/// count plus the leftover pool; the remainder of the consumed species is
/// strictly below one particle budget. A pool of 120 half-equilaterals
/// makes 5 fire, or 2 air with 24 left over, or exactly 1 water.
pub fn reassemble(pool: TriangleLedger, target: ParticleKind) -> (u64, TriangleLedger) {
    let budget = target.triangle_budget();
    let species = target.elementary_kind();
    let available = pool.count(species);
    let particles = available / budget;
    let mut leftover = pool;
    *leftover.count_mut(species) = available % budget;
    (particles, leftover)
}

/// Every balanced canonical reaction among fire, air and water with all
/// coefficients at most `max_coefficient`.
///
/// Earth never appears: a canonical reaction cannot carry it (its triangles
/// only rebind as earth, so balance would force equal counts on both sides).
/// The search is exhaustive over coefficient vectors, runs in
/// `(max_coefficient + 1)^6` steps, and returns reactions in lexicographic
/// order of `(consumed fire, air, water, produced fire, air, water)` with no
/// duplicates. With `max_coefficient = 1` nothing balances, so the result is
/// empty; `2 fire -> 1 air` first appears at 2, `5 air -> 2 water` at 5.
pub fn enumerate_balanced_reactions(max_coefficient: u64) -> Vec<Reaction> {
    let mut reactions = Vec::new();
    let range = 0..=max_coefficient;
    for fc in range.clone() {
        for ac in range.clone() {
            for wc in range.clone() {
                for fp in range.clone() {
                    for ap in range.clone() {
                        for wp in range.clone() {
                            let reaction = Reaction::new(
                                ParticleInventory::new(fc, ac, wc, 0),
                                ParticleInventory::new(fp, ap, wp, 0),
                            );
                            if reaction.consumed.is_empty() || reaction.produced.is_empty() {
                                continue;
                            }
                            if !reaction.is_canonical() || !is_balanced(&reaction) {
                                continue;
                            }
                            reactions.push(reaction);
                        }
                    }
                }
            }
        }
    }
    reactions
}
