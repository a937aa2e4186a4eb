//! Named formulas used across tests, the acceptance run and the CLI.

use crate::error::{Error, Result};
use crate::ltl::surface::{Lin, Rel, Surface};
use crate::ltl::{parse, Formula};
use crate::scalar::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: &'static str,
    pub dim: usize,
    pub formula: Formula,
}

/// Orbits of a linear dynamical system observed until `y` vanishes:
/// `G ((X⊤ → y·x₁ ≠ 0 ∧ A x₁ = x₂) ∧ (¬X⊤ → y·x₁ = 0))`.
pub fn recurrence(y: &[Rat], a: &[Vec<Rat>]) -> Result<Formula> {
    let d = y.len();
    if d == 0 {
        return Err(Error::InvalidArgument("recurrence needs a nonempty y".into()));
    }
    if a.len() != d {
        return Err(Error::dims("recurrence matrix rows", d, a.len()));
    }
    if let Some(row) = a.iter().find(|row| row.len() != d) {
        return Err(Error::dims("recurrence matrix columns", d, row.len()));
    }
    let one = Rat::one();
    let dot = |coefs: &[Rat]| {
        coefs
            .iter()
            .enumerate()
            .fold(Lin::default(), |acc, (c, v)| acc.add(&Lin::var(0, c, v.clone()), &one))
    };
    let zero = Lin::default();
    let observed = dot(y);
    let mut step = Surface::Cmp(observed.clone(), Rel::Ne, zero.clone());
    for (r, row) in a.iter().enumerate() {
        let next = Surface::Cmp(dot(row), Rel::Eq, Lin::var(1, r, one.clone()));
        step = Surface::And(Box::new(step), Box::new(next));
    }
    let has_next = Surface::Next(1, Box::new(Surface::True));
    let body = Surface::And(
        Box::new(Surface::Implies(Box::new(has_next.clone()), Box::new(step))),
        Box::new(Surface::Implies(
            Box::new(Surface::Not(Box::new(has_next))),
            Box::new(Surface::Cmp(observed, Rel::Eq, zero)),
        )),
    );
    Surface::Globally(Box::new(body)).desugar(d)
}

pub const UPTREND7: &str =
    "G (X^7 true -> 7*x[7][1] > x[1][1] + x[2][1] + x[3][1] + x[4][1] + x[5][1] + x[6][1] + x[7][1])";

/// Every full window of seven values ends above the window's mean.
pub fn uptrend7() -> Formula {
    parse(UPTREND7, 1).expect("uptrend formula parses")
}

const REGRESSION: &[(&str, usize, &str)] = &[
    ("atom-k0", 1, "x[1][1] > 0"),
    ("atom-k2", 2, "2*x[3][1] - x[1][2] + 1/2 > x[2][2]"),
    ("not", 1, "!(x[1][1] > 1/2)"),
    ("or", 3, "x[1][1] > x[1][2] | x[1][3] < 0"),
    ("next", 1, "X (x[1][1] < 0)"),
    ("until", 2, "(x[1][1] > 0 | pred evenpos) U (x[1][2] = x[2][1])"),
    ("evenpos", 1, "pred evenpos"),
];

/// Regression formulas plus the recurrence for `y = (1)`, `A = (2)` and
/// `uptrend7`.
pub fn formula_library() -> Vec<NamedFormula> {
    let mut out: Vec<NamedFormula> = REGRESSION
        .iter()
        .map(|&(name, dim, text)| NamedFormula {
            name,
            dim,
            formula: parse(text, dim).expect("library formula parses"),
        })
        .collect();
    out.push(NamedFormula {
        name: "recurrence",
        dim: 1,
        formula: recurrence(&[Rat::one()], &[vec![Rat::from(2)]]).expect("well formed"),
    });
    out.push(NamedFormula {
        name: "uptrend7",
        dim: 1,
        formula: uptrend7(),
    });
    out
}
