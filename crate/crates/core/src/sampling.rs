//! Seeded random rationals and sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{QuadRat, Rat};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`, so that sample `k` does
/// not depend on how many samples precede it.
pub fn substream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `p/q` with `|p| ≤ bound` and `1 ≤ q ≤ bound`.
pub fn small_rat(rng: &mut impl Rng, bound: i64) -> Rat {
    let bound = bound.max(1);
    let p = rng.gen_range(-bound..=bound);
    let q = rng.gen_range(1..=bound);
    Rat::new(p, q).expect("nonzero denominator")
}

/// `p/q + (r/s)·√2` with every magnitude at most `bound` and `q, s ≠ 0`.
pub fn small_quad(rng: &mut impl Rng, bound: i64) -> QuadRat {
    QuadRat::new(small_rat(rng, bound), small_rat(rng, bound))
}

/// `len` rows of `dim` entries drawn by [`small_rat`].
pub fn random_sequence(rng: &mut impl Rng, len: usize, dim: usize, bound: i64) -> Vec<Vec<Rat>> {
    (0..len)
        .map(|_| (0..dim).map(|_| small_rat(rng, bound)).collect())
        .collect()
}
