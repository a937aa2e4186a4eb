//! Surface syntax with its own direct semantics, and the desugaring into
//! [`Formula`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::predicate::Registry;
use crate::scalar::Rat;

use super::{Atom, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Gt => ">",
            Rel::Ge => ">=",
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        })
    }
}

/// Linear expression over `x[t][c]` (0-based `t`, `c` here).
///
/// Terms with a zero coefficient are kept: they still extend the lookahead.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lin {
    pub terms: BTreeMap<(usize, usize), Rat>,
    pub constant: Rat,
}

impl Lin {
    pub fn constant(c: Rat) -> Lin {
        Lin {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(t: usize, c: usize, coef: Rat) -> Lin {
        let mut terms = BTreeMap::new();
        terms.insert((t, c), coef);
        Lin {
            terms,
            constant: Rat::zero(),
        }
    }

    pub fn add(mut self, other: &Lin, sign: &Rat) -> Lin {
        for (k, v) in &other.terms {
            let e = self.terms.entry(*k).or_insert_with(Rat::zero);
            *e = e.clone() + sign * v;
        }
        self.constant = self.constant + sign * &other.constant;
        self
    }

    /// Largest position offset used, 0 for constants.
    pub fn lookahead(&self) -> usize {
        self.terms.keys().map(|(t, _)| *t).max().unwrap_or(0)
    }

    fn to_atom(&self, dim: usize, k: usize) -> Result<Atom> {
        let mut a = vec![Rat::zero(); dim * (k + 1)];
        for ((t, c), v) in &self.terms {
            if *c >= dim {
                return Err(Error::dims("variable component", dim, c + 1));
            }
            a[t * dim + c] = v.clone();
        }
        Atom::new(dim, k, a, self.constant.clone())
    }

    fn value(&self, data: &[Vec<Rat>], i: usize) -> Result<Rat> {
        let mut acc = self.constant.clone();
        for ((t, c), v) in &self.terms {
            let row = &data[i + t];
            let x = row
                .get(*c)
                .ok_or_else(|| Error::dims("sequence vector", c + 1, row.len()))?;
            acc = acc + v * x;
        }
        Ok(acc)
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self.terms.iter().map(|(k, v)| (*k, v.clone())).collect();
        super::write_linear(f, &terms, &self.constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Surface {
    True,
    False,
    Pred(String),
    Cmp(Lin, Rel, Lin),
    Not(Box<Surface>),
    And(Box<Surface>, Box<Surface>),
    Or(Box<Surface>, Box<Surface>),
    Implies(Box<Surface>, Box<Surface>),
    Until(Box<Surface>, Box<Surface>),
    /// `X^k`.
    Next(usize, Box<Surface>),
    Globally(Box<Surface>),
    Eventually(Box<Surface>),
}

impl Surface {
    /// Translate into core syntax over dimension `dim`.
    pub fn desugar(&self, dim: usize) -> Result<Formula> {
        Ok(match self {
            Surface::True => Formula::truth(dim),
            Surface::False => Formula::falsity(dim),
            Surface::Pred(p) => Formula::pred(p),
            Surface::Cmp(lhs, rel, rhs) => desugar_cmp(lhs, *rel, rhs, dim)?,
            Surface::Not(x) => Formula::not(x.desugar(dim)?),
            Surface::And(x, y) => Formula::and(x.desugar(dim)?, y.desugar(dim)?),
            Surface::Or(x, y) => Formula::or(x.desugar(dim)?, y.desugar(dim)?),
            Surface::Implies(x, y) => Formula::implies(x.desugar(dim)?, y.desugar(dim)?),
            Surface::Until(x, y) => Formula::until(x.desugar(dim)?, y.desugar(dim)?),
            Surface::Next(k, x) => Formula::next_n(x.desugar(dim)?, *k),
            Surface::Globally(x) => Formula::globally(dim, x.desugar(dim)?),
            Surface::Eventually(x) => Formula::eventually(dim, x.desugar(dim)?),
        })
    }

    /// Direct semantics at 0-based position `i`.
    ///
    /// A comparison whose window runs past the end behaves as its core
    /// translation does there: `>`, `<` and `=` are false, while `>=`, `<=`
    /// and `!=` (negations of strict atoms) are true.
    pub fn eval_at(&self, data: &[Vec<Rat>], i: usize, preds: &Registry) -> Result<bool> {
        let n = data.len();
        if i >= n {
            return Err(Error::PositionOutOfRange { position: i, len: n });
        }
        Ok(match self {
            Surface::True => true,
            Surface::False => false,
            Surface::Pred(p) => preds.get(p)?.holds(n, i + 1)?,
            Surface::Cmp(lhs, rel, rhs) => {
                let k = lhs.lookahead().max(rhs.lookahead());
                if i + k >= n {
                    matches!(rel, Rel::Ge | Rel::Le | Rel::Ne)
                } else {
                    let l = lhs.value(data, i)?;
                    let r = rhs.value(data, i)?;
                    match rel {
                        Rel::Gt => l > r,
                        Rel::Ge => l >= r,
                        Rel::Lt => l < r,
                        Rel::Le => l <= r,
                        Rel::Eq => l == r,
                        Rel::Ne => l != r,
                    }
                }
            }
            Surface::Not(x) => !x.eval_at(data, i, preds)?,
            Surface::And(x, y) => x.eval_at(data, i, preds)? && y.eval_at(data, i, preds)?,
            Surface::Or(x, y) => x.eval_at(data, i, preds)? || y.eval_at(data, i, preds)?,
            Surface::Implies(x, y) => !x.eval_at(data, i, preds)? || y.eval_at(data, i, preds)?,
            Surface::Until(x, y) => {
                let mut result = false;
                for j in i..n {
                    if y.eval_at(data, j, preds)? {
                        result = true;
                        break;
                    }
                    if !x.eval_at(data, j, preds)? {
                        break;
                    }
                }
                result
            }
            Surface::Next(k, x) => i + k < n && x.eval_at(data, i + k, preds)?,
            Surface::Globally(x) => {
                for j in i..n {
                    if !x.eval_at(data, j, preds)? {
                        return Ok(false);
                    }
                }
                true
            }
            Surface::Eventually(x) => {
                for j in i..n {
                    if x.eval_at(data, j, preds)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
}

/// Comparison `lhs rel rhs` with `e = lhs − rhs`:
/// `e > 0` is an atom, `e ≥ 0` is `¬(−e > 0)`, `e < 0` is `−e > 0`,
/// `e ≤ 0` is `¬(e > 0)`, `e = 0` is `¬(e > 0) ∧ ¬(−e > 0)` guarded by the
/// window check, and `e ≠ 0` is the negation of that.
fn desugar_cmp(lhs: &Lin, rel: Rel, rhs: &Lin, dim: usize) -> Result<Formula> {
    let e = lhs.clone().add(rhs, &-Rat::one());
    let k = e.lookahead();
    let pos = e.to_atom(dim, k)?;
    let neg = pos.negated();
    let equal = || {
        let both = Formula::and(
            Formula::not(Formula::Atom(pos.clone())),
            Formula::not(Formula::Atom(neg.clone())),
        );
        if k == 0 {
            both
        } else {
            Formula::and(both, Formula::Atom(Atom::in_range(dim, k)))
        }
    };
    Ok(match rel {
        Rel::Gt => Formula::Atom(pos),
        Rel::Ge => Formula::not(Formula::Atom(neg)),
        Rel::Lt => Formula::Atom(neg),
        Rel::Le => Formula::not(Formula::Atom(pos)),
        Rel::Eq => equal(),
        Rel::Ne => Formula::not(equal()),
    })
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::True => write!(f, "true"),
            Surface::False => write!(f, "false"),
            Surface::Pred(p) => write!(f, "pred {p}"),
            Surface::Cmp(l, r, rr) => write!(f, "{l} {r} {rr}"),
            Surface::Not(x) => write!(f, "!({x})"),
            Surface::And(x, y) => write!(f, "({x} & {y})"),
            Surface::Or(x, y) => write!(f, "({x} | {y})"),
            Surface::Implies(x, y) => write!(f, "({x} -> {y})"),
            Surface::Until(x, y) => write!(f, "({x} U {y})"),
            Surface::Next(k, x) => write!(f, "X^{k} ({x})"),
            Surface::Globally(x) => write!(f, "G ({x})"),
            Surface::Eventually(x) => write!(f, "F ({x})"),
        }
    }
}
