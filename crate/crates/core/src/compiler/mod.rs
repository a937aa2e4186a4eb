//! Compilation of LTL formulas into UHATs.
//!
//! `compile(φ, m)` maps a payload `w_1, …, w_n, 0` of width `m` to width
//! `m + 1`, keeping the first `m` columns and writing the satisfaction flag
//! of `φ` at every position into the last one (0 at the terminator). Data
//! lives in the first `d` payload columns. All machines use the standard
//! positional block plus one column per predicate the formula mentions.

mod gadgets;
mod program;

pub use gadgets::{gadget_boolize, gadget_first_zero, gadget_next, gadget_set_last};
pub use program::{Expr, Program};

use crate::error::{Error, Result};
use crate::ltl::{Atom, Formula};
use crate::predicate::Registry;
use crate::scalar::Rat;
use crate::vm::{PosEncoding, Uhat};

fn encoding_for(phi: &Formula, preds: &Registry) -> Result<PosEncoding> {
    let mut pe = PosEncoding::standard();
    for name in phi.predicates() {
        pe.add_predicate(preds.get(&name)?)?;
    }
    Ok(pe)
}

/// `T_{φ,m}`: append the flag column of `φ` to a width-`m` payload.
pub fn compile(phi: &Formula, m: usize, preds: &Registry) -> Result<Uhat<Rat>> {
    let d = phi.dim()?.unwrap_or(0);
    if m < d || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "payload width {m} is smaller than the formula dimension {}",
            d.max(1)
        )));
    }
    let mut p = Program::new(m, encoding_for(phi, preds)?);
    emit(&mut p, phi)?;
    let mut u = p.finish(None)?;
    u.metadata.insert("formula".into(), phi.to_string());
    Ok(u)
}

/// Acceptor for `L(φ)`: `compile(φ, d)` with the flag column as acceptance
/// vector. Formulas without atoms are compiled at dimension 1.
pub fn compile_acceptor(phi: &Formula, preds: &Registry) -> Result<Uhat<Rat>> {
    compile_acceptor_at(phi, phi.dim()?.unwrap_or(1), preds)
}

/// Acceptor for `L(φ)` over `ℚ^d`, `d` at least the formula dimension.
pub fn compile_acceptor_at(phi: &Formula, d: usize, preds: &Registry) -> Result<Uhat<Rat>> {
    let u = compile(phi, d, preds)?;
    let mut t = vec![Rat::zero(); d + 1];
    t[d] = Rat::one();
    u.with_accept(t)
}

/// Append the flag column of `phi`.
fn emit(p: &mut Program<Rat>, phi: &Formula) -> Result<()> {
    let m = p.width();
    match phi {
        Formula::Atom(a) => emit_atom(p, a),
        Formula::Pred(name) => {
            let col = p
                .pe()
                .predicate_column(name)
                .ok_or_else(|| Error::UnknownPredicate(name.clone()))?;
            p.append(vec![p.pe_col(col)])?;
            Ok(())
        }
        Formula::Not(x) => {
            emit(p, x)?;
            let mut rows = p.keep();
            rows[m] = Expr::one() - p.col(m);
            p.affine(rows)?;
            p.set_last(m, false)
        }
        Formula::Or(x, y) => {
            emit(p, x)?;
            emit(p, y)?;
            let t = p.relu_of(vec![p.col(m + 1) - p.col(m)])?[0];
            let mut rows = p.keep();
            rows[m] = p.col(m) + p.col(t);
            rows.truncate(m + 1);
            p.affine(rows)
        }
        Formula::Next(x) => {
            emit(p, x)?;
            p.gather_next(&[m])?;
            let mut rows = p.keep();
            rows[m] = p.col(m + 1);
            rows.truncate(m + 1);
            p.affine(rows)
        }
        Formula::Until(x, y) => {
            emit(p, x)?;
            emit(p, y)?;
            // stop where ¬x ∨ y holds, i.e. c = min(x, 1 − y) is 0
            let t = p.relu_of(vec![p.col(m) + p.col(m + 1) - Expr::one()])?[0];
            let mut rows = p.keep();
            rows[m] = p.col(m) - p.col(t);
            rows.truncate(m + 2);
            p.affine(rows)?;
            let r = p.first_zero(m, &[m + 1])?;
            p.select(&(0..m).chain([r]).collect::<Vec<_>>())
        }
    }
}

/// Gather `k` right neighbours, compute `min(in range, ⟨a, window⟩ + b)` and
/// turn its sign into a flag.
fn emit_atom(p: &mut Program<Rat>, a: &Atom) -> Result<()> {
    let m = p.width();
    let d = a.dim();
    // block 0 = (g, x_i) with g = 1 on data rows and 0 at the terminator
    p.append(vec![Expr::one()])?;
    p.set_last(m, false)?;
    let mut blocks = vec![m];
    let mut prev: Vec<usize> = std::iter::once(m).chain(0..d).collect();
    for _ in 0..a.lookahead() {
        let first = p.gather_next(&prev)?;
        blocks.push(first);
        prev = (first..first + d + 1).collect();
    }
    let data_col = |t: usize, c: usize| if t == 0 { c } else { blocks[t] + 1 + c };
    let in_range = p.col(blocks[a.lookahead()]);
    let mut value = Expr::constant(a.constant().clone());
    for t in 0..=a.lookahead() {
        for c in 0..d {
            let coef = a.coefficient(t, c);
            if !coef.is_zero() {
                value = value.add_scaled(&p.col(data_col(t, c)), coef);
            }
        }
    }
    let s = p.relu_of(vec![in_range.clone() - value])?[0];
    let mut rows: Vec<Expr<Rat>> = (0..m).map(|c| p.col(c)).collect();
    rows.push(in_range - p.col(s));
    p.affine(rows)?;
    p.boolize(m)
}
