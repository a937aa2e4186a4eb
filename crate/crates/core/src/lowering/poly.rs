//! Polynomials of degree at most 2.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};
use crate::size::DescriptionalSize;

/// `1`, `X_i` or `X_i·X_j` with `i ≤ j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    Const,
    Linear(u32),
    Quadratic(u32, u32),
}

impl Monomial {
    pub fn quadratic(i: usize, j: usize) -> Monomial {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        Monomial::Quadratic(a as u32, b as u32)
    }

    pub fn degree(&self) -> u32 {
        match self {
            Monomial::Const => 0,
            Monomial::Linear(_) => 1,
            Monomial::Quadratic(..) => 2,
        }
    }

    /// Dense exponent vector over `nvars` variables.
    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        let mut e = vec![0; nvars];
        match *self {
            Monomial::Const => {}
            Monomial::Linear(i) => e[i as usize] = 1,
            Monomial::Quadratic(i, j) => {
                e[i as usize] += 1;
                e[j as usize] += 1;
            }
        }
        e
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Monomial> {
        let mut vars = Vec::new();
        for (i, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                vars.push(i);
                if vars.len() > 2 {
                    return Err(Error::InvalidArgument("monomial degree exceeds 2".into()));
                }
            }
        }
        Ok(match vars[..] {
            [] => Monomial::Const,
            [i] => Monomial::Linear(i as u32),
            [i, j] => Monomial::quadratic(i, j),
            _ => unreachable!(),
        })
    }

    fn value<S: Scalar>(&self, x: &[S]) -> S {
        match *self {
            Monomial::Const => S::one(),
            Monomial::Linear(i) => x[i as usize].clone(),
            Monomial::Quadratic(i, j) => x[i as usize].clone() * &x[j as usize],
        }
    }

    fn max_var(&self) -> Option<usize> {
        match *self {
            Monomial::Const => None,
            Monomial::Linear(i) => Some(i as usize),
            Monomial::Quadratic(_, j) => Some(j as usize),
        }
    }
}

/// Sparse polynomial in `nvars` variables; zero coefficients are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial<S> {
    nvars: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::Const, c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::Linear(i as u32), S::one());
        p
    }

    /// `Σ a_j X_j + c`.
    pub fn linear(nvars: usize, row: &[(usize, S)], c: &S) -> Self {
        let mut p = Self::constant(nvars, c.clone());
        for (j, a) in row {
            p.add_term(Monomial::Linear(*j as u32), a.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, S)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if m.max_var().is_some_and(|v| v >= nvars) {
                return Err(Error::dims("polynomial variable", nvars, m.max_var().unwrap_or(0) + 1));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(acc) => {
                *acc = acc.clone() + c;
                if acc.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// The value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<S> {
        match self.terms.len() {
            0 => Some(S::zero()),
            1 => self.terms.get(&Monomial::Const).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Polynomial<S>) -> Polynomial<S> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial<S>) -> Polynomial<S> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial<S> {
        self.scale(&-S::one())
    }

    pub fn scale(&self, c: &S) -> Polynomial<S> {
        let mut out = Self::zero(self.nvars);
        for (m, x) in &self.terms {
            out.add_term(*m, x.clone() * c);
        }
        out
    }

    /// Product, defined while the result stays within degree 2.
    pub fn mul(&self, other: &Polynomial<S>) -> Result<Polynomial<S>> {
        if self.degree() + other.degree() > 2 {
            return Err(Error::InvalidArgument("polynomial product exceeds degree 2".into()));
        }
        let mut out = Self::zero(self.nvars);
        for (m1, a) in &self.terms {
            for (m2, b) in &other.terms {
                let m = match (*m1, *m2) {
                    (Monomial::Const, m) | (m, Monomial::Const) => m,
                    (Monomial::Linear(i), Monomial::Linear(j)) => Monomial::quadratic(i as usize, j as usize),
                    _ => unreachable!("degree checked above"),
                };
                out.add_term(m, a.clone() * b);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[S]) -> Result<S> {
        if x.len() != self.nvars {
            return Err(Error::dims("polynomial input", self.nvars, x.len()));
        }
        Ok(self
            .terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + c.clone() * &m.value(x)))
    }

    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }
}

fn exponent_size(e: u32) -> u64 {
    Rat::from(i64::from(e)).size()
}

impl<S: Scalar> DescriptionalSize for Polynomial<S> {
    /// `Σ_monomials (size(c) + Σ_j size(r_j)) + nvars` over nonzero terms.
    fn descriptional_size(&self) -> u64 {
        let zero_exps = self.nvars as u64 * exponent_size(0);
        let terms: u64 = self
            .terms
            .iter()
            .map(|(m, c)| {
                let exps: u64 = match *m {
                    Monomial::Const => zero_exps,
                    Monomial::Linear(_) => zero_exps - exponent_size(0) + exponent_size(1),
                    Monomial::Quadratic(i, j) if i == j => zero_exps - exponent_size(0) + exponent_size(2),
                    Monomial::Quadratic(..) => zero_exps - 2 * exponent_size(0) + 2 * exponent_size(1),
                };
                c.size() + exps
            })
            .sum();
        terms + self.nvars as u64
    }
}

impl<S: Scalar> fmt::Display for Polynomial<S> {
    /// Variables print 1-based as `X1`, `X2`, …
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match *m {
                Monomial::Const => write!(f, "{c}")?,
                Monomial::Linear(i) => write!(f, "{c}*X{}", i + 1)?,
                Monomial::Quadratic(i, j) => write!(f, "{c}*X{}*X{}", i + 1, j + 1)?,
            }
        }
        Ok(())
    }
}
