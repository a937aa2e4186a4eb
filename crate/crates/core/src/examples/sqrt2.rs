//! Machine over `ℚ(√2)` whose behaviour on one fixed input pins down two
//! irrational parameters.

use crate::compiler::{Expr, Program};
use crate::error::Result;
use crate::scalar::{QuadRat, Scalar};
use crate::vm::{Masking, PosEncoding, Uhat};

/// `(1, 0, e_1)(1, 0, e_2)(1, 0, e_3)` with `e_i ∈ ℚ³`.
pub fn sqrt2_input() -> Vec<Vec<QuadRat>> {
    (0..3)
        .map(|i| {
            let mut row = vec![QuadRat::zero(); 5];
            row[0] = QuadRat::one();
            row[2 + i] = QuadRat::one();
            row
        })
        .collect()
}

/// Accepts [`sqrt2_input`] iff `αβ = 2` and `α = β`.
///
/// Payload columns are `(c0, c1, e1, e2, e3)`. The first four layers carry
/// α and β in one map each:
/// 1. `c0 := α·c0`;
/// 2. position 3 copies its own `c0` into `c1` (others read the terminator);
/// 3. position 2 resets `c0` to 1 and position 3 clears it;
/// 4. `c0 := β·c0`,
///
/// giving `(αβ, 0)(β, 0)(0, α)`. Comparison layers then read `c0` at
/// position 2 and `c1` at position 3 and test `c0 = 2` and `β = α` at
/// position 1 through four positivity indicators.
pub fn build_sqrt2_example(alpha: QuadRat, beta: QuadRat) -> Result<Uhat<QuadRat>> {
    let mut p = Program::new(5, PosEncoding::standard());
    let e = |p: &Program<QuadRat>, k: usize| p.col(2 + k);
    let sum_e = |p: &Program<QuadRat>| e(p, 0) + e(p, 1) + e(p, 2);

    let mut rows = p.keep();
    rows[0] = p.col(0).scale(&alpha);
    p.affine(rows)?;
    p.seal();

    let mut out = p.keep();
    out[1] = p.att(p.col(0));
    p.attention(
        vec![e(&p, 2), Expr::one() - e(&p, 2)],
        vec![e(&p, 2), -sum_e(&p)],
        out,
        Masking::None,
    )?;
    p.seal();

    let mut out = p.keep();
    out[0] = p.col(0) - p.att(p.col(0)) + e(&p, 1);
    p.attention(
        vec![e(&p, 1), e(&p, 2), e(&p, 0)],
        vec![e(&p, 1), e(&p, 2), -sum_e(&p)],
        out,
        Masking::None,
    )?;
    p.seal();

    let mut rows = p.keep();
    rows[0] = p.col(0).scale(&beta);
    p.affine(rows)?;
    p.seal();

    let one = p.pe_col(PosEncoding::ONE);
    let mut out = p.keep();
    out.push(p.att(p.col(0)));
    p.attention(vec![one.clone()], vec![e(&p, 1)], out, Masking::None)?;
    let mut out = p.keep();
    out.push(p.att(p.col(1)));
    p.attention(vec![one], vec![e(&p, 2)], out, Masking::None)?;

    let (beta_at_2, alpha_at_3) = (p.col(5), p.col(6));
    let two = QuadRat::from_i64(2);
    let first = p.append(vec![
        p.col(0).add_const(-two.clone()),
        -p.col(0) + Expr::constant(two),
        beta_at_2.clone() - alpha_at_3.clone(),
        alpha_at_3 - beta_at_2,
    ])?;
    for g in first..first + 4 {
        p.boolize(g)?;
    }
    let mut verdict = Expr::one();
    for g in first..first + 4 {
        verdict = verdict - p.col(g);
    }
    let mut rows: Vec<Expr<QuadRat>> = (0..5).map(|c| p.col(c)).collect();
    rows.push(verdict);
    p.affine(rows)?;
    let mut t = vec![QuadRat::zero(); 6];
    t[5] = QuadRat::one();
    let mut u = p.finish(Some(t))?;
    u.metadata.insert("alpha".into(), alpha.to_string());
    u.metadata.insert("beta".into(), beta.to_string());
    Ok(u)
}
