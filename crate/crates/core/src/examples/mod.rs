//! Hand-built machines and formulas.

mod formulas;
mod sqrt2;

use crate::linalg::AffineMap;
use crate::scalar::Rat;
use crate::vm::{Layer, Masking, PosEncoding, Uhat};

pub use formulas::{formula_library, recurrence, uptrend7, NamedFormula, UPTREND7};
pub use sqrt2::{build_sqrt2_example, sqrt2_input};

fn rat_map(matrix: &[&[i64]], offset: &[i64]) -> AffineMap<Rat> {
    let cols = matrix.first().map_or(0, |r| r.len());
    AffineMap::new(
        matrix
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from(x)).collect())
            .collect(),
        offset.iter().map(|&x| Rat::from(x)).collect(),
        cols,
    )
    .expect("literal map is well formed")
}

/// Recognizer for sequences with `2·r_i < r_j` for all `i < j`, without
/// positional encoding and with past masking.
///
/// Rows are `(1, r_i)` and the terminator is `(0, 0)`. The first layer scores
/// `2·r_i·u_j[1] − u_j[2]`, which is `2r_i − r_j` on data and `0` on the
/// terminator, and keeps the marker of the winner. The second layer looks for
/// any remaining 1 to the right.
pub fn build_double() -> Uhat<Rat> {
    let first = Layer::Attention {
        query: rat_map(&[&[0, 2], &[0, 0]], &[0, 1]),
        key: rat_map(&[&[1, 0], &[0, -1]], &[0, 0]),
        output: rat_map(&[&[0, 0, 1, 0]], &[0]),
        masking: Masking::Past,
    };
    let second = Layer::Attention {
        query: rat_map(&[&[0]], &[1]),
        key: rat_map(&[&[1]], &[0]),
        output: rat_map(&[&[-1, -1]], &[1]),
        masking: Masking::Past,
    };
    Uhat::new(1, PosEncoding::none(), vec![first, second], Some(vec![Rat::one()]))
        .expect("double machine is well formed")
}

/// Zero-layer machine over pairs `(r, s)` accepting iff `r > s`.
pub fn build_greater_than() -> Uhat<Rat> {
    Uhat::new(
        2,
        PosEncoding::none(),
        Vec::new(),
        Some(vec![Rat::zero(), Rat::one(), -Rat::one()]),
    )
    .expect("greater-than machine is well formed")
}

/// `2·r_i < r_{i+1}` for all consecutive pairs.
pub fn double_consecutive(r: &[Rat]) -> bool {
    !r.is_empty() && r.windows(2).all(|w| w[0].clone() + &w[0] < w[1])
}

/// `2·r_i < r_j` for all pairs `i < j`; what [`build_double`] decides.
pub fn double_all_pairs(r: &[Rat]) -> bool {
    !r.is_empty() && (0..r.len()).all(|i| (i + 1..r.len()).all(|j| r[i].clone() + &r[i] < r[j]))
}

pub fn scalar_rows(values: &[Rat]) -> Vec<Vec<Rat>> {
    values.iter().map(|x| vec![x.clone()]).collect()
}
