//! Locally testable LTL over sequences of rational vectors.
//!
//! [`Formula`] is the core syntax the compiler consumes. Surface syntax
//! (`&`, `->`, `G`, `F`, comparisons) lives in [`surface`] and is desugared
//! by the parser.

mod parser;
pub mod surface;

use std::fmt;

use crate::error::{Error, Result};
use crate::predicate::Registry;
use crate::scalar::Rat;

pub use parser::{parse, parse_surface, parse_with};

/// `⟨a, (x_i, …, x_{i+k})⟩ + b > 0`, false when the window leaves the
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    dim: usize,
    k: usize,
    a: Vec<Rat>,
    b: Rat,
}

impl Atom {
    /// `a` is laid out block by block: `a[t·dim + c]` multiplies component
    /// `c` of `x_{i+t}`.
    pub fn new(dim: usize, k: usize, a: Vec<Rat>, b: Rat) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("atom dimension must be positive".into()));
        }
        if a.len() != dim * (k + 1) {
            return Err(Error::dims("atom coefficients", dim * (k + 1), a.len()));
        }
        Ok(Atom { dim, k, a, b })
    }

    /// `⊤`, i.e. `0 + 1 > 0` with no lookahead.
    pub fn truth(dim: usize) -> Self {
        Atom {
            dim,
            k: 0,
            a: vec![Rat::zero(); dim],
            b: Rat::one(),
        }
    }

    /// `0 + 1 > 0` with lookahead `k`: holds exactly when `i ≤ n − k`.
    pub fn in_range(dim: usize, k: usize) -> Self {
        Atom {
            dim,
            k,
            a: vec![Rat::zero(); dim * (k + 1)],
            b: Rat::one(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lookahead(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[Rat] {
        &self.a
    }

    pub fn constant(&self) -> &Rat {
        &self.b
    }

    pub fn coefficient(&self, t: usize, c: usize) -> &Rat {
        &self.a[t * self.dim + c]
    }

    /// `⟨a, window⟩ + b` at 0-based position `i`, or `None` past the end.
    pub fn value(&self, data: &[Vec<Rat>], i: usize) -> Result<Option<Rat>> {
        if i + self.k >= data.len() {
            return Ok(None);
        }
        let mut acc = self.b.clone();
        for t in 0..=self.k {
            let row = &data[i + t];
            if row.len() != self.dim {
                return Err(Error::dims("sequence vector", self.dim, row.len()));
            }
            for (c, x) in row.iter().enumerate() {
                let a = self.coefficient(t, c);
                if !a.is_zero() {
                    acc = acc + a * x;
                }
            }
        }
        Ok(Some(acc))
    }

    pub fn holds(&self, data: &[Vec<Rat>], i: usize) -> Result<bool> {
        Ok(self
            .value(data, i)?
            .is_some_and(|v| v.signum() == std::cmp::Ordering::Greater))
    }

    pub fn negated(&self) -> Atom {
        Atom {
            dim: self.dim,
            k: self.k,
            a: self.a.iter().map(|x| -x).collect(),
            b: -&self.b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Pred(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn truth(dim: usize) -> Formula {
        Formula::Atom(Atom::truth(dim))
    }

    pub fn falsity(dim: usize) -> Formula {
        Formula::not(Formula::truth(dim))
    }

    pub fn pred(name: &str) -> Formula {
        Formula::Pred(name.to_string())
    }

    /// Negation with `¬¬φ = φ`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `¬(¬a ∨ ¬b)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    /// `¬a ∨ b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn next_n(f: Formula, k: usize) -> Formula {
        (0..k).fold(f, |acc, _| Formula::next(acc))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// `⊤ U f`.
    pub fn eventually(dim: usize, f: Formula) -> Formula {
        Formula::until(Formula::truth(dim), f)
    }

    /// `¬(⊤ U ¬f)`.
    pub fn globally(dim: usize, f: Formula) -> Formula {
        Formula::not(Formula::eventually(dim, Formula::not(f)))
    }

    /// `¬X⊤`.
    pub fn last(dim: usize) -> Formula {
        Formula::not(Formula::next(Formula::truth(dim)))
    }

    /// Dimension of the atoms, checking they agree.
    pub fn dim(&self) -> Result<Option<usize>> {
        let mut found = None;
        self.visit_atoms(&mut |a| {
            match found {
                None => found = Some(a.dim),
                Some(d) if d != a.dim => return Err(Error::dims("atom dimension", d, a.dim)),
                _ => {}
            }
            Ok(())
        })?;
        Ok(found)
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Atom) -> Result<()>) -> Result<()> {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Pred(_) => Ok(()),
            Formula::Not(x) | Formula::Next(x) => x.visit_atoms(f),
            Formula::Or(x, y) | Formula::Until(x, y) => {
                x.visit_atoms(f)?;
                y.visit_atoms(f)
            }
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Pred(_) => 1,
            Formula::Not(x) | Formula::Next(x) => 1 + x.size(),
            Formula::Or(x, y) | Formula::Until(x, y) => 1 + x.size() + y.size(),
        }
    }

    /// Sum of atom lookaheads.
    pub fn lookahead_sum(&self) -> usize {
        let mut total = 0;
        self.visit_atoms(&mut |a| {
            total += a.k;
            Ok(())
        })
        .expect("visitor is infallible");
        total
    }

    pub fn predicates(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_preds(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_preds(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Pred(p) => out.push(p.clone()),
            Formula::Not(x) | Formula::Next(x) => x.collect_preds(out),
            Formula::Or(x, y) | Formula::Until(x, y) => {
                x.collect_preds(out);
                y.collect_preds(out);
            }
        }
    }
}

/// `(v̄, i) ⊨ φ` for a 0-based position `i`, by direct recursion.
pub fn eval_at(phi: &Formula, data: &[Vec<Rat>], i: usize, preds: &Registry) -> Result<bool> {
    let n = data.len();
    if i >= n {
        return Err(Error::PositionOutOfRange { position: i, len: n });
    }
    match phi {
        Formula::Atom(a) => a.holds(data, i),
        Formula::Pred(name) => preds.get(name)?.holds(n, i + 1),
        Formula::Not(x) => Ok(!eval_at(x, data, i, preds)?),
        Formula::Or(x, y) => Ok(eval_at(x, data, i, preds)? || eval_at(y, data, i, preds)?),
        Formula::Next(x) => Ok(i + 1 < n && eval_at(x, data, i + 1, preds)?),
        Formula::Until(x, y) => {
            for j in i..n {
                if eval_at(y, data, j, preds)? {
                    return Ok(true);
                }
                if !eval_at(x, data, j, preds)? {
                    return Ok(false);
                }
            }
            Ok(false)
        }
    }
}

/// Satisfaction at every position.
pub fn eval_all(phi: &Formula, data: &[Vec<Rat>], preds: &Registry) -> Result<Vec<bool>> {
    (0..data.len()).map(|i| eval_at(phi, data, i, preds)).collect()
}

/// `v̄ ∈ L(φ)`, i.e. satisfaction at the first position.
pub fn lang_member(phi: &Formula, data: &[Vec<Rat>], preds: &Registry) -> Result<bool> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    eval_at(phi, data, 0, preds)
}

pub(crate) fn write_linear(f: &mut fmt::Formatter<'_>, terms: &[((usize, usize), Rat)], constant: &Rat) -> fmt::Result {
    let mut first = true;
    for ((t, c), coef) in terms {
        let neg = coef.signum() == std::cmp::Ordering::Less;
        let mag = coef.abs();
        match (first, neg) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        if !mag.is_one() {
            write!(f, "{mag}*")?;
        }
        write!(f, "x[{}][{}]", t + 1, c + 1)?;
        first = false;
    }
    if first {
        write!(f, "{constant}")
    } else if constant.is_zero() {
        Ok(())
    } else if constant.signum() == std::cmp::Ordering::Less {
        write!(f, " - {}", constant.abs())
    } else {
        write!(f, " + {constant}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<((usize, usize), Rat)> = Vec::new();
        for t in 0..=self.k {
            for c in 0..self.dim {
                let a = self.coefficient(t, c);
                if !a.is_zero() {
                    terms.push(((t, c), a.clone()));
                }
            }
        }
        // keep the lookahead visible when the last block is all zero
        if self.k > 0 && (0..self.dim).all(|c| self.coefficient(self.k, c).is_zero()) {
            terms.push(((self.k, 0), Rat::zero()));
        }
        write_linear(f, &terms, &self.b)?;
        write!(f, " > 0")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Pred(p) => write!(f, "pred {p}"),
            Formula::Not(x) => write!(f, "!({x})"),
            Formula::Or(x, y) => write!(f, "({x} | {y})"),
            Formula::Next(x) => write!(f, "X ({x})"),
            Formula::Until(x, y) => write!(f, "({x} U {y})"),
        }
    }
}

#[cfg(test)]
mod tests;
