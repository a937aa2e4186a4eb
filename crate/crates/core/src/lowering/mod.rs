//! Lowering a machine at a fixed input length to polynomial constraints.
//!
//! Variables are the flattened padded input: position-major, one block of
//! `input_width` columns per position, terminator included. A [`Cpr`] lists
//! for every position the conditional assignments `φ → D`, where `D` maps
//! the flattened input to the full row `[PE | payload]` of that position.

mod pc;
mod poly;

use std::collections::HashMap;

pub use pc::{
    eval_pc, map_atoms, pc_alternations, pc_atom_count, pc_degree, pc_from_json, pc_from_shared_json, pc_node_count,
    pc_size, pc_to_json, pc_to_shared_json, Pc, PcDocument, PcRef, PcRel,
};
pub use poly::{Monomial, Polynomial};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::linalg::AffineMap;
use crate::scalar::Scalar;
use crate::size::DescriptionalSize;
use crate::vm::{attention_window, Layer, Uhat};

#[derive(Debug, Clone)]
pub struct Assignment<S> {
    pub condition: PcRef<S>,
    pub map: AffineMap<S>,
}

/// Constrained polynomial representation of a machine at one length.
#[derive(Debug, Clone)]
pub struct Cpr<S> {
    nvars: usize,
    pe_width: usize,
    positions: Vec<Vec<Assignment<S>>>,
}

impl<S: Scalar> Cpr<S> {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Assignments per position, terminator last.
    pub fn positions(&self) -> &[Vec<Assignment<S>>] {
        &self.positions
    }

    pub fn assignment_count(&self) -> usize {
        self.positions.iter().map(Vec::len).sum()
    }

    /// Payload rows computed on `x`; errors unless exactly one condition
    /// holds at each position.
    pub fn eval(&self, x: &[S]) -> Result<Vec<Vec<S>>> {
        eval_cpr(self, x)
    }
}

impl<S: Scalar> DescriptionalSize for Cpr<S> {
    /// `Σ_positions (k + Σ size(φ_j) + Σ size(D_j))`.
    fn descriptional_size(&self) -> u64 {
        self.positions
            .iter()
            .flatten()
            .map(|a| 1 + pc_size(&a.condition).saturating_add(a.map.descriptional_size()))
            .fold(0u64, u64::saturating_add)
    }
}

/// Flattened padded input of `data` for machine `u`.
pub fn flatten_input<S: Scalar>(u: &Uhat<S>, data: &[Vec<S>]) -> Result<Vec<S>> {
    Ok(u.pad(data)?.into_iter().flatten().collect())
}

pub fn lower_to_cpr<S: Scalar>(u: &Uhat<S>, n: usize) -> Result<Cpr<S>> {
    lower_to_cpr_with(u, n, &Caps::default())
}

/// Lower `u` on inputs of length `n`, failing once more than
/// `caps.assignments` assignments exist after a layer.
pub fn lower_to_cpr_with<S: Scalar>(u: &Uhat<S>, n: usize, caps: &Caps) -> Result<Cpr<S>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let big_n = n + 1;
    let w = u.input_width();
    let nvars = w * big_n;
    let pe_rows = u.pe().rows::<S>(n)?;
    let pe = u.pe().width();
    let mut positions: Vec<Vec<Assignment<S>>> = pe_rows
        .iter()
        .enumerate()
        .map(|(i, pe_row)| {
            let rows = pe_row
                .iter()
                .map(|c| (Vec::new(), c.clone()))
                .chain((0..w).map(|c| (vec![(i * w + c, S::one())], S::zero())))
                .collect();
            let map = AffineMap::from_sparse(nvars, rows)?;
            Ok(vec![Assignment {
                condition: Pc::truth(),
                map,
            }])
        })
        .collect::<Result<_>>()?;
    for layer in u.layers() {
        positions = match layer {
            Layer::Affine { map } => lower_affine(&positions, map, pe)?,
            Layer::Relu { coord } => lower_relu(&positions, pe + coord, nvars)?,
            Layer::Attention {
                query,
                key,
                output,
                masking,
            } => {
                let window = |i| attention_window(*masking, i, big_n);
                lower_attention(&positions, query, key, output, pe, nvars, window, caps)?
            }
        };
        let count: usize = positions.iter().map(Vec::len).sum();
        Caps::check("conditional assignments", count, caps.assignments)?;
    }
    Ok(Cpr {
        nvars,
        pe_width: pe,
        positions,
    })
}

/// `[PE rows of d ; m ∘ d]`.
fn apply_layer_map<S: Scalar>(m: &AffineMap<S>, d: &AffineMap<S>, pe: usize) -> Result<AffineMap<S>> {
    d.select_rows(0..pe).stack(&m.compose(d)?)
}

fn lower_affine<S: Scalar>(
    positions: &[Vec<Assignment<S>>],
    m: &AffineMap<S>,
    pe: usize,
) -> Result<Vec<Vec<Assignment<S>>>> {
    positions
        .iter()
        .map(|list| {
            list.iter()
                .map(|a| {
                    Ok(Assignment {
                        condition: a.condition.clone(),
                        map: apply_layer_map(m, &a.map, pe)?,
                    })
                })
                .collect()
        })
        .collect()
}

fn row_poly<S: Scalar>(d: &AffineMap<S>, r: usize, nvars: usize) -> Polynomial<S> {
    Polynomial::linear(nvars, d.row(r), &d.offset()[r])
}

fn lower_relu<S: Scalar>(
    positions: &[Vec<Assignment<S>>],
    row: usize,
    nvars: usize,
) -> Result<Vec<Vec<Assignment<S>>>> {
    let mut out = Vec::with_capacity(positions.len());
    for list in positions {
        let mut next = Vec::with_capacity(list.len() * 2);
        for a in list {
            let p = row_poly(&a.map, row, nvars);
            if let Some(c) = p.as_constant() {
                let map = if c.signum().is_lt() {
                    a.map.with_zero_row(row)
                } else {
                    a.map.clone()
                };
                next.push(Assignment {
                    condition: a.condition.clone(),
                    map,
                });
                continue;
            }
            let keep = Pc::and([a.condition.clone(), Pc::atom(PcRel::Ge, p.clone())]);
            let clip = Pc::and([a.condition.clone(), Pc::atom(PcRel::Gt, p.neg())]);
            for (cond, map) in [(keep, a.map.clone()), (clip, a.map.with_zero_row(row))] {
                if !cond.is_false() {
                    next.push(Assignment { condition: cond, map });
                }
            }
        }
        out.push(next);
    }
    Ok(out)
}

/// `Σ_r q_r(x)·k_r(x)` for affine maps `q`, `k` of equal height.
fn score_poly<S: Scalar>(q: &AffineMap<S>, k: &AffineMap<S>, nvars: usize) -> Result<Polynomial<S>> {
    let mut acc = Polynomial::zero(nvars);
    for r in 0..q.rows() {
        let a = row_poly(q, r, nvars);
        let b = row_poly(k, r, nvars);
        acc = acc.add(&a.mul(&b)?);
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn lower_attention<S: Scalar>(
    positions: &[Vec<Assignment<S>>],
    query: &AffineMap<S>,
    key: &AffineMap<S>,
    output: &AffineMap<S>,
    pe: usize,
    nvars: usize,
    window: impl Fn(usize) -> std::ops::Range<usize>,
    caps: &Caps,
) -> Result<Vec<Vec<Assignment<S>>>> {
    let queries: Vec<Vec<AffineMap<S>>> = positions
        .iter()
        .map(|l| l.iter().map(|a| query.compose(&a.map)).collect())
        .collect::<Result<_>>()?;
    let keys: Vec<Vec<AffineMap<S>>> = positions
        .iter()
        .map(|l| l.iter().map(|a| key.compose(&a.map)).collect())
        .collect::<Result<_>>()?;
    // fail before building anything that would exceed the caps
    let mut pairs = 0usize;
    let mut comparisons = 0usize;
    for (i, own) in positions.iter().enumerate() {
        let in_window: usize = window(i).map(|j| positions[j].len()).sum();
        let here = own.len().saturating_mul(in_window);
        pairs = pairs.saturating_add(here);
        comparisons = comparisons.saturating_add(here.saturating_mul(in_window));
    }
    Caps::check("attention pairs", pairs, caps.assignments)?;
    Caps::check("score comparisons", comparisons, caps.comparisons)?;
    let mut created = 0usize;
    let mut out = Vec::with_capacity(positions.len());
    for (i, own) in positions.iter().enumerate() {
        let win = window(i);
        let mut next = Vec::new();
        for (ii, a_i) in own.iter().enumerate() {
            // scores[(j, J)] for this (i, I)
            let mut scores: HashMap<(usize, usize), Polynomial<S>> = HashMap::new();
            for j in win.clone() {
                for (jj, key) in keys[j].iter().enumerate() {
                    if j == i && jj != ii {
                        continue;
                    }
                    scores.insert((j, jj), score_poly(&queries[i][ii], key, nvars)?);
                }
            }
            for j in win.clone() {
                for (jj, a_j) in positions[j].iter().enumerate() {
                    if j == i && jj != ii {
                        continue;
                    }
                    let s = &scores[&(j, jj)];
                    let mut parts = vec![a_i.condition.clone(), a_j.condition.clone()];
                    for m in win.clone().filter(|&m| m != j) {
                        let rel = if m < j { PcRel::Gt } else { PcRel::Ge };
                        let beats = |mm: usize| Pc::atom(rel, s.sub(&scores[&(m, mm)]));
                        let clause = if m == i {
                            beats(ii)
                        } else {
                            Pc::or(
                                positions[m]
                                    .iter()
                                    .enumerate()
                                    .map(|(mm, a_m)| Pc::and([a_m.condition.clone(), beats(mm)])),
                            )
                        };
                        if clause.is_false() {
                            parts.clear();
                            parts.push(clause);
                            break;
                        }
                        parts.push(clause);
                    }
                    let condition = Pc::and(parts);
                    if condition.is_false() {
                        continue;
                    }
                    let both = a_i.map.stack(&a_j.map)?;
                    let map = a_i.map.select_rows(0..pe).stack(&output.compose(&both)?)?;
                    next.push(Assignment { condition, map });
                    created += 1;
                    Caps::check("conditional assignments", created, caps.assignments)?;
                }
            }
        }
        out.push(next);
    }
    Ok(out)
}

/// Output payload rows of `cpr` at `x`.
pub fn eval_cpr<S: Scalar>(cpr: &Cpr<S>, x: &[S]) -> Result<Vec<Vec<S>>> {
    if x.len() != cpr.nvars {
        return Err(Error::dims("flattened input", cpr.nvars, x.len()));
    }
    let mut memo = HashMap::new();
    let mut out = Vec::with_capacity(cpr.positions.len());
    for (i, list) in cpr.positions.iter().enumerate() {
        let mut hit = None;
        let mut satisfied = 0;
        for a in list {
            if pc::eval_memo(&a.condition, x, &mut memo)? {
                satisfied += 1;
                hit = Some(a);
            }
        }
        match hit {
            Some(a) if satisfied == 1 => {
                let row = a.map.apply(x)?;
                out.push(row[cpr.pe_width..].to_vec());
            }
            _ => {
                return Err(Error::Integrity {
                    position: i + 1,
                    satisfied,
                    witness: format!("[{}]", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
                })
            }
        }
    }
    Ok(out)
}

/// `⋁_J (φ_{1,J} ∧ ⟨t, D_{1,J} x⟩ > 0)` over the first position.
pub fn cpr_to_pc<S: Scalar>(cpr: &Cpr<S>, t: &[S]) -> Result<PcRef<S>> {
    let first = &cpr.positions[0];
    let mut branches = Vec::with_capacity(first.len());
    for a in first {
        let width = a.map.rows() - cpr.pe_width;
        if t.len() != width {
            return Err(Error::dims("acceptance vector", width, t.len()));
        }
        let mut score = Polynomial::zero(cpr.nvars);
        for (k, tk) in t.iter().enumerate() {
            if !tk.is_zero() {
                score = score.add(&row_poly(&a.map, cpr.pe_width + k, cpr.nvars).scale(tk));
            }
        }
        branches.push(Pc::and([a.condition.clone(), Pc::atom(PcRel::Gt, score)]));
    }
    Ok(Pc::or(branches))
}

/// Lower `u` at length `n` and turn it into its acceptance constraint.
pub fn uhat_to_pc<S: Scalar>(u: &Uhat<S>, n: usize, caps: &Caps) -> Result<PcRef<S>> {
    let t = u.accept_vector().ok_or(Error::MissingAcceptVector)?;
    let cpr = lower_to_cpr_with(u, n, caps)?;
    cpr_to_pc(&cpr, t)
}
