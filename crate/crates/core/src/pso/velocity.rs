//! Velocity update: keep the old pairs, add a share of the pairs pulling
//! towards the local best and a share of those pulling towards the global best.

use rand::seq::index;
use rand::Rng;

use crate::model::TaskId;

use super::swaps::{sequence_difference, SwapError, SwapPairList};

/// Number of pairs taken from a difference list of length `len` when the
/// weighted random factor is `factor` (clamped to 1, rounded to nearest).
pub fn pick_count(factor: f64, len: usize) -> usize {
    let share = factor.clamp(0.0, 1.0);
    ((share * len as f64).round() as usize).min(len)
}

/// Appends `old`, then the cognitive pairs at `cognitive_pick`, then the
/// social pairs at `social_pick`. Picks index into the respective difference
/// lists; duplicates are dropped.
pub fn combine_velocity(
    old: &SwapPairList,
    cognitive: &SwapPairList,
    cognitive_pick: &[usize],
    social: &SwapPairList,
    social_pick: &[usize],
) -> SwapPairList {
    let mut out = old.clone();
    for &i in cognitive_pick {
        out.push(cognitive.pairs()[i]);
    }
    for &i in social_pick {
        out.push(social.pairs()[i]);
    }
    out
}

fn random_pick<R: Rng + ?Sized>(rng: &mut R, factor: f64, len: usize) -> Vec<usize> {
    let k = pick_count(factor, len);
    let mut picked = index::sample(rng, len, k).into_vec();
    // keep the difference list's order
    picked.sort_unstable();
    picked
}

/// One velocity update with `U1`, `U2` drawn uniformly from `[0, 1)`.
pub fn update_velocity<R: Rng + ?Sized>(
    velocity: &SwapPairList,
    particle: &[TaskId],
    local_best: &[TaskId],
    global_best: &[TaskId],
    c1: f64,
    c2: f64,
    rng: &mut R,
) -> Result<SwapPairList, SwapError> {
    let cognitive = sequence_difference(local_best, particle)?;
    let social = sequence_difference(global_best, particle)?;
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    let cp = random_pick(rng, c1 * u1, cognitive.len());
    let sp = random_pick(rng, c2 * u2, social.len());
    Ok(combine_velocity(velocity, &cognitive, &cp, &social, &sp))
}
