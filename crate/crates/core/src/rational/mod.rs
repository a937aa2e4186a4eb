//! Replacing irrational coefficients by small-size-equivalent rationals.
//!
//! Two vectors `u, v` satisfy `u ∼ₘ v` when `⟨w,u⟩ ≥ z ⟺ ⟨w,v⟩ ≥ z` and
//! `⟨w,u⟩ > z ⟺ ⟨w,v⟩ > z` for every `w ∈ ℚ_{≤m}ᵗ`, `z ∈ ℚ_{≤m}`, where
//! `ℚ_{≤m}` is the set of rationals of descriptional size at most `m` and the
//! bound applies to each entry of `w`.

mod simplex;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::lowering::{map_atoms, Pc, PcRef, Polynomial};
use crate::scalar::{Rat, Scalar};

pub use simplex::{maximize, LpOutcome};

/// `ℚ_{≤m}` in increasing order. Fails once more than `caps.enumeration`
/// values would be produced.
pub fn enumerate_q(m: u64, caps: &Caps) -> Result<Vec<Rat>> {
    let mut out = Vec::new();
    if m < 2 {
        return Ok(out);
    }
    if m > 62 {
        return Err(Error::ResourceCap {
            what: format!("rationals of size {m}"),
            cap: caps.enumeration,
        });
    }
    let bits = |x: u64| u64::from(64 - x.leading_zeros());
    // size(p/q) = 1 + bits(|p|) + bits(q) with q ≥ 1
    let mut q = 1u64;
    while bits(q) < m {
        let pbits = m - 1 - bits(q);
        let pmax = (1u64 << pbits) - 1;
        for p in 0..=pmax {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let r = Rat::new(p as i64, q as i64)?;
            if p != 0 {
                out.push(-r.clone());
            }
            out.push(r);
            Caps::check("enumerated rationals", out.len(), caps.enumeration)?;
        }
        q += 1;
    }
    out.sort();
    Ok(out)
}

/// `|base|^t`, or `None` on overflow.
fn power(base: usize, t: usize) -> Option<usize> {
    (0..t).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

fn check_count(what: &str, base: usize, t: usize, cap: usize) -> Result<()> {
    match power(base, t) {
        Some(n) => Caps::check(what, n, cap),
        None => Err(Error::ResourceCap {
            what: what.to_string(),
            cap,
        }),
    }
}

/// Calls `f` on every vector in `values^t`, in lexicographic order.
fn for_each_vector(values: &[Rat], t: usize, mut f: impl FnMut(&[Rat]) -> Result<bool>) -> Result<()> {
    if values.is_empty() && t > 0 {
        return Ok(());
    }
    let mut idx = vec![0usize; t];
    let mut w: Vec<Rat> = vec![values.first().cloned().unwrap_or_else(Rat::zero); t];
    loop {
        if !f(&w)? {
            return Ok(());
        }
        let mut k = t;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < values.len() {
                w[k] = values[idx[k]].clone();
                break;
            }
            idx[k] = 0;
            w[k] = values[0].clone();
        }
    }
}

/// Every `(w, z)` with `w ∈ ℚ_{≤m}ᵗ` and `z ∈ ℚ_{≤m}`.
pub fn enumerate_small(m: u64, t: usize, caps: &Caps) -> Result<Vec<(Vec<Rat>, Rat)>> {
    let q = enumerate_q(m, caps)?;
    check_count("enumerated (w, z) pairs", q.len(), t + 1, caps.enumeration)?;
    let mut out = Vec::new();
    for_each_vector(&q, t, |w| {
        out.extend(q.iter().map(|z| (w.to_vec(), z.clone())));
        Ok(true)
    })?;
    Ok(out)
}

fn dot<S: Scalar>(w: &[Rat], v: &[S]) -> S {
    w.iter()
        .zip(v)
        .filter(|(a, _)| !a.is_zero())
        .fold(S::zero(), |acc, (a, x)| acc + S::from_rat(a.clone()) * x)
}

/// A pair `(w, z)` on which `u` and `v` disagree, if any.
pub fn sim_m_witness<S: Scalar, T: Scalar>(u: &[S], v: &[T], m: u64, caps: &Caps) -> Result<Option<(Vec<Rat>, Rat)>> {
    if u.len() != v.len() {
        return Err(Error::dims("compared vectors", u.len(), v.len()));
    }
    let q = enumerate_q(m, caps)?;
    check_count("enumerated (w, z) pairs", q.len(), u.len() + 1, caps.enumeration)?;
    let mut witness = None;
    for_each_vector(&q, u.len(), |w| {
        let (a, b) = (dot(w, u), dot(w, v));
        for z in &q {
            let sa = (a.clone() - &S::from_rat(z.clone())).signum();
            let sb = (b.clone() - &T::from_rat(z.clone())).signum();
            if sa.is_ge() != sb.is_ge() || sa.is_gt() != sb.is_gt() {
                witness = Some((w.to_vec(), z.clone()));
                return Ok(false);
            }
        }
        Ok(true)
    })?;
    Ok(witness)
}

/// Whether `u ∼ₘ v`, by enumerating every `(w, z)`.
pub fn sim_m_check<S: Scalar, T: Scalar>(u: &[S], v: &[T], m: u64, caps: &Caps) -> Result<bool> {
    Ok(sim_m_witness(u, v, m, caps)?.is_none())
}

/// `A x > z` (strict rows) and `A' x ≥ z'` (weak rows) over `nvars` unknowns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IneqSystem {
    pub nvars: usize,
    pub strict: Vec<(Vec<Rat>, Rat)>,
    pub weak: Vec<(Vec<Rat>, Rat)>,
}

impl IneqSystem {
    pub fn new(nvars: usize) -> Self {
        IneqSystem {
            nvars,
            ..Default::default()
        }
    }

    pub fn strict(&mut self, row: Vec<Rat>, z: Rat) -> Result<()> {
        self.check_row(&row)?;
        self.strict.push((row, z));
        Ok(())
    }

    pub fn weak(&mut self, row: Vec<Rat>, z: Rat) -> Result<()> {
        self.check_row(&row)?;
        self.weak.push((row, z));
        Ok(())
    }

    fn check_row(&self, row: &[Rat]) -> Result<()> {
        if row.len() == self.nvars {
            Ok(())
        } else {
            Err(Error::dims("inequality row", self.nvars, row.len()))
        }
    }

    /// Whether `x` satisfies every row.
    pub fn satisfied_by(&self, x: &[Rat]) -> bool {
        self.strict.iter().all(|(a, z)| dot(a, x) > *z) && self.weak.iter().all(|(a, z)| dot(a, x) >= *z)
    }
}

/// An exact rational solution of `sys`.
///
/// Maximizes a slack `δ ∈ [0, 1]` subject to `A x ≥ z + δ` and `A' x ≥ z'`
/// with `x = x⁺ − x⁻`; the system is solvable iff the optimum is positive
/// (or, without strict rows, iff the program is feasible).
pub fn find_rational_solution(sys: &IneqSystem) -> Result<Vec<Rat>> {
    let n = sys.nvars;
    let mut a = Vec::with_capacity(sys.strict.len() + sys.weak.len() + 1);
    let mut b = Vec::with_capacity(a.capacity());
    // a·x ≥ z  ⇔  −a·x⁺ + a·x⁻ ≤ −z
    let row = |coef: &[Rat], slack: bool| {
        let mut r: Vec<Rat> = coef.iter().map(|x| -x.clone()).collect();
        r.extend(coef.iter().cloned());
        r.push(if slack { Rat::one() } else { Rat::zero() });
        r
    };
    for (coef, z) in &sys.strict {
        a.push(row(coef, true));
        b.push(-z.clone());
    }
    for (coef, z) in &sys.weak {
        a.push(row(coef, false));
        b.push(-z.clone());
    }
    let mut cap = vec![Rat::zero(); 2 * n];
    cap.push(Rat::one());
    a.push(cap.clone());
    b.push(Rat::one());
    match maximize(&cap, &a, &b) {
        LpOutcome::Optimal { value, solution } => {
            if !sys.strict.is_empty() && !value.signum().is_gt() {
                return Err(Error::NoSolution);
            }
            Ok((0..n).map(|j| solution[j].clone() - &solution[n + j]).collect())
        }
        LpOutcome::Infeasible => Err(Error::NoSolution),
        LpOutcome::Unbounded => unreachable!("slack is capped at 1"),
    }
}

struct Cut {
    row: Vec<Rat>,
    z: Rat,
    strict: bool,
}

/// Cuts added per row-generation round, most violated first.
const CUTS_PER_ROUND: usize = 8;

impl Cut {
    /// `(z − ⟨row, x⟩) / max |row_i|` when the cut fails at `x`; only used to
    /// rank cuts.
    fn violation(&self, x: &[Rat]) -> Option<f64> {
        let v = dot(&self.row, x);
        let fails = if self.strict { v <= self.z } else { v < self.z };
        fails.then(|| {
            let scale = self
                .row
                .iter()
                .map(|r| r.to_f64().abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            (self.z.clone() - v).to_f64() / scale
        })
    }
}

/// Index of the first element of `q` not below `v`, and whether it equals `v`.
/// `approx` holds `q` in floating point and only seeds the search.
fn locate<S: Scalar>(v: &S, q: &[S], approx: &[f64]) -> (usize, bool) {
    let guess = v.to_f64();
    let mut k = approx.partition_point(|x| *x < guess);
    while k > 0 && q[k - 1] >= *v {
        k -= 1;
    }
    while k < q.len() && q[k] < *v {
        k += 1;
    }
    (k, k < q.len() && q[k] == *v)
}

/// The cuts pinning `⟨w, x⟩` to the same cell of `ℚ_{≤m}` as `⟨w, c⟩`.
fn cuts_for<S: Scalar>(w: &[Rat], c: &[S], q: &[S], approx: &[f64], q_rat: &[Rat]) -> Vec<Cut> {
    let v = dot(w, c);
    let neg: Vec<Rat> = w.iter().map(|x| -x.clone()).collect();
    match locate(&v, q, approx) {
        (k, true) => vec![
            Cut {
                row: w.to_vec(),
                z: q_rat[k].clone(),
                strict: false,
            },
            Cut {
                row: neg,
                z: -q_rat[k].clone(),
                strict: false,
            },
        ],
        (k, false) => {
            let mut cuts = Vec::with_capacity(2);
            if k > 0 {
                cuts.push(Cut {
                    row: w.to_vec(),
                    z: q_rat[k - 1].clone(),
                    strict: true,
                });
            }
            if k < q.len() {
                cuts.push(Cut {
                    row: neg,
                    z: -q_rat[k].clone(),
                    strict: true,
                });
            }
            cuts
        }
    }
}

/// A rational `c'` with `c ∼ₘ c'`.
///
/// Each `w ∈ ℚ_{≤m}ᵗ` (up to sign) contributes the cuts that keep `⟨w, c'⟩` in
/// the same cell of `ℚ_{≤m}` as `⟨w, c⟩`; the system is solved by row
/// generation, starting from the coordinate directions. The cap bounds the
/// number of vectors `w`.
pub fn rationalize_vector<S: Scalar>(c: &[S], m: u64, caps: &Caps) -> Result<Vec<Rat>> {
    let t = c.len();
    let q_rat = enumerate_q(m, caps)?;
    check_count("enumerated vectors w", q_rat.len(), t, caps.enumeration)?;
    let q: Vec<S> = q_rat.iter().cloned().map(S::from_rat).collect();
    let approx: Vec<f64> = q_rat.iter().map(Rat::to_f64).collect();

    let mut cuts = Vec::new();
    for_each_vector(&q_rat, t, |w| {
        // w and −w give the same cuts
        if w.iter().find(|x| !x.is_zero()).is_some_and(|x| x.signum().is_gt()) {
            cuts.extend(cuts_for(w, c, &q, &approx, &q_rat));
        }
        Ok(true)
    })?;

    let mut active: Vec<bool> = cuts
        .iter()
        .map(|cut| cut.row.iter().filter(|x| !x.is_zero()).count() == 1 && cut.row.iter().any(|x| x.abs().is_one()))
        .collect();
    loop {
        let mut sys = IneqSystem::new(t);
        for (cut, _) in cuts.iter().zip(&active).filter(|(_, &on)| on) {
            let target = if cut.strict { &mut sys.strict } else { &mut sys.weak };
            target.push((cut.row.clone(), cut.z.clone()));
        }
        let x = find_rational_solution(&sys)?;
        let mut violated: Vec<(f64, usize)> = cuts
            .iter()
            .enumerate()
            .filter(|(k, _)| !active[*k])
            .filter_map(|(k, cut)| cut.violation(&x).map(|v| (v, k)))
            .collect();
        if violated.is_empty() {
            return Ok(x);
        }
        if violated.len() > CUTS_PER_ROUND {
            violated.select_nth_unstable_by(CUTS_PER_ROUND, |a, b| b.0.total_cmp(&a.0));
        }
        for &(_, k) in violated.iter().take(CUTS_PER_ROUND) {
            active[k] = true;
        }
    }
}

/// Counts from [`rationalize_pc`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RationalizeReport {
    /// Distinct atoms visited.
    pub atoms: usize,
    /// Atoms with an irrational coefficient, rewritten.
    pub rewritten: usize,
    /// Largest coefficient size in a rewritten atom.
    pub max_coefficient_size: u64,
    /// Inputs on which a rewritten atom was compared with its original.
    pub checked_inputs: u64,
}

/// A rational constraint agreeing with `pc` on every input whose entries lie
/// in `ℚ_{≤m}`.
///
/// Atoms with rational coefficients are kept. Otherwise the coefficient vector
/// over the atom's monomials is replaced by a `∼_{2m}`-equivalent rational
/// vector, since every monomial value of such an input lies in `ℚ_{≤2m}`.
pub fn rationalize_pc<S: Scalar>(pc: &PcRef<S>, m: u64, caps: &Caps) -> Result<(PcRef<Rat>, RationalizeReport)> {
    rationalize_inner(pc, m, caps, false)
}

/// [`rationalize_pc`], comparing every rewritten atom with the original on
/// all assignments from `ℚ_{≤m}` to the variables it mentions.
pub fn rationalize_pc_checked<S: Scalar>(
    pc: &PcRef<S>,
    m: u64,
    caps: &Caps,
) -> Result<(PcRef<Rat>, RationalizeReport)> {
    rationalize_inner(pc, m, caps, true)
}

fn rationalize_inner<S: Scalar>(
    pc: &PcRef<S>,
    m: u64,
    caps: &Caps,
    verify: bool,
) -> Result<(PcRef<Rat>, RationalizeReport)> {
    let mut report = RationalizeReport::default();
    let q = if verify { enumerate_q(m, caps)? } else { Vec::new() };
    let out = map_atoms(pc, &mut |rel, poly: &Polynomial<S>| {
        report.atoms += 1;
        if let Some(terms) = poly
            .terms()
            .map(|(m, c)| c.to_rat().map(|r| (*m, r)))
            .collect::<Option<Vec<_>>>()
        {
            return Ok(Pc::atom(rel, Polynomial::from_terms(poly.nvars(), terms)?));
        }
        report.rewritten += 1;
        let (monomials, coefs): (Vec<_>, Vec<S>) = poly.terms().map(|(m, c)| (*m, c.clone())).unzip();
        let fresh = rationalize_vector(&coefs, 2 * m, caps)?;
        for c in &fresh {
            report.max_coefficient_size = report.max_coefficient_size.max(c.size());
        }
        let rewritten = Polynomial::from_terms(poly.nvars(), monomials.into_iter().zip(fresh))?;
        if verify {
            report.checked_inputs += check_atom(poly, &rewritten, &q, caps)?;
        }
        Ok(Pc::atom(rel, rewritten))
    })?;
    Ok((out, report))
}

/// Compares the signs of `p` and `r` on every assignment from `q` to the
/// variables of `p`, the others held at zero.
fn check_atom<S: Scalar>(p: &Polynomial<S>, r: &Polynomial<Rat>, q: &[Rat], caps: &Caps) -> Result<u64> {
    let mut vars: Vec<usize> = p
        .terms()
        .flat_map(|(m, _)| m.exponents(p.nvars()).into_iter().enumerate().filter(|(_, e)| *e > 0))
        .map(|(i, _)| i)
        .collect();
    vars.sort_unstable();
    vars.dedup();
    check_count("atom check inputs", q.len(), vars.len(), caps.enumeration)?;
    let mut x = vec![Rat::zero(); p.nvars()];
    let mut xs = vec![S::zero(); p.nvars()];
    let mut checked = 0;
    let mut failure = None;
    for_each_vector(q, vars.len(), |vals| {
        for (&i, v) in vars.iter().zip(vals) {
            x[i] = v.clone();
            xs[i] = S::from_rat(v.clone());
        }
        let (a, b) = (p.eval(&xs)?.signum(), r.eval(&x)?.signum());
        checked += 1;
        if a != b {
            failure = Some(format!(
                "{:?}",
                vals.iter().map(ToString::to_string).collect::<Vec<_>>()
            ));
            return Ok(false);
        }
        Ok(true)
    })?;
    match failure {
        Some(witness) => Err(Error::Disagreement {
            what: format!("atoms `{p}` and `{r}`"),
            witness,
        }),
        None => Ok(checked),
    }
}
