//! Stand-alone gadget machines over a payload of width `m` with the standard
//! positional block. Columns are 0-based.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vm::{PosEncoding, Uhat};

use super::Program;

fn program<S: Scalar>(m: usize, l: Option<usize>) -> Result<Program<S>> {
    if let Some(l) = l {
        if l >= m {
            return Err(Error::dims("gadget column", m, l + 1));
        }
    }
    Ok(Program::new(m, PosEncoding::standard()))
}

/// Column `l` (values in `[0, 1]`) becomes `b` at the terminator.
pub fn gadget_set_last<S: Scalar>(l: usize, b: bool, m: usize) -> Result<Uhat<S>> {
    let mut p = program(m, Some(l))?;
    p.set_last(l, b)?;
    p.finish(None)
}

/// Output width `2m`: the row followed by its right neighbour's row.
pub fn gadget_next<S: Scalar>(m: usize) -> Result<Uhat<S>> {
    let mut p = program(m, None)?;
    let cols: Vec<usize> = (0..m).collect();
    p.gather_next(&cols)?;
    p.finish(None)
}

/// Output width `m + 1`: the appended column is `j/(N+1)` for the least
/// `j ≥ i` with column `l` equal to 0. Column `l` must be 0/1 with 0 at the
/// terminator.
pub fn gadget_first_zero<S: Scalar>(l: usize, m: usize) -> Result<Uhat<S>> {
    let mut p = program(m, Some(l))?;
    let frac = p.append(vec![p.frac()])?;
    p.first_zero(l, &[frac])?;
    p.select(&(0..m).chain([m + 1]).collect::<Vec<_>>())?;
    p.finish(None)
}

/// Column `l` becomes the indicator of positivity.
pub fn gadget_boolize<S: Scalar>(l: usize, m: usize) -> Result<Uhat<S>> {
    let mut p = program(m, Some(l))?;
    p.boolize(l)?;
    p.finish(None)
}
