//! Positive Boolean combinations of polynomial sign conditions.
//!
//! Constraints are shared DAGs (`Arc` children). Evaluation, sizes and
//! alternation counts are memoized per node, so shared subterms cost once;
//! sizes count the expanded tree.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{FieldKind, Scalar};
use crate::size::DescriptionalSize;

use super::poly::{Monomial, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PcRel {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, PartialEq, Eq)]
pub enum Pc<S> {
    Atom {
        rel: PcRel,
        poly: Polynomial<S>,
    },
    /// `⊤` when empty.
    And(Vec<PcRef<S>>),
    /// `⊥` when empty.
    Or(Vec<PcRef<S>>),
}

pub type PcRef<S> = Arc<Pc<S>>;

fn key<S>(p: &PcRef<S>) -> *const Pc<S> {
    Arc::as_ptr(p)
}

impl<S: Scalar> Pc<S> {
    pub fn truth() -> PcRef<S> {
        Arc::new(Pc::And(Vec::new()))
    }

    pub fn falsity() -> PcRef<S> {
        Arc::new(Pc::Or(Vec::new()))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Pc::And(c) if c.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Pc::Or(c) if c.is_empty())
    }

    /// `p > 0` or `p ≥ 0`, folded to a constant when `p` has no variables.
    pub fn atom(rel: PcRel, poly: Polynomial<S>) -> PcRef<S> {
        if let Some(c) = poly.as_constant() {
            let holds = match rel {
                PcRel::Gt => c.is_positive(),
                PcRel::Ge => !c.signum().is_lt(),
            };
            return if holds { Self::truth() } else { Self::falsity() };
        }
        Arc::new(Pc::Atom { rel, poly })
    }

    /// Conjunction; flattens nested conjunctions and folds constants.
    pub fn and(children: impl IntoIterator<Item = PcRef<S>>) -> PcRef<S> {
        let mut out = Vec::new();
        for c in children {
            match &*c {
                Pc::Or(v) if v.is_empty() => return Self::falsity(),
                Pc::And(v) => out.extend(v.iter().cloned()),
                _ => out.push(c),
            }
        }
        if out.len() == 1 {
            return out.pop().expect("one child");
        }
        Arc::new(Pc::And(out))
    }

    /// Disjunction; flattens nested disjunctions and folds constants.
    pub fn or(children: impl IntoIterator<Item = PcRef<S>>) -> PcRef<S> {
        let mut out = Vec::new();
        for c in children {
            match &*c {
                Pc::And(v) if v.is_empty() => return Self::truth(),
                Pc::Or(v) => out.extend(v.iter().cloned()),
                _ => out.push(c),
            }
        }
        if out.len() == 1 {
            return out.pop().expect("one child");
        }
        Arc::new(Pc::Or(out))
    }
}

/// Truth value of `pc` at `x`.
pub fn eval_pc<S: Scalar>(pc: &PcRef<S>, x: &[S]) -> Result<bool> {
    let mut memo = HashMap::new();
    eval_memo(pc, x, &mut memo)
}

pub(crate) fn eval_memo<S: Scalar>(pc: &PcRef<S>, x: &[S], memo: &mut HashMap<*const Pc<S>, bool>) -> Result<bool> {
    if let Some(&v) = memo.get(&key(pc)) {
        return Ok(v);
    }
    let v = match &**pc {
        Pc::Atom { rel, poly } => {
            let s = poly.eval(x)?.signum();
            match rel {
                PcRel::Gt => s.is_gt(),
                PcRel::Ge => !s.is_lt(),
            }
        }
        Pc::And(children) => {
            let mut all = true;
            for c in children {
                if !eval_memo(c, x, memo)? {
                    all = false;
                    break;
                }
            }
            all
        }
        Pc::Or(children) => {
            let mut any = false;
            for c in children {
                if eval_memo(c, x, memo)? {
                    any = true;
                    break;
                }
            }
            any
        }
    };
    memo.insert(key(pc), v);
    Ok(v)
}

/// Largest number of And/Or switches on a root-to-leaf path. Constructors
/// already merge nested nodes of the same kind.
pub fn pc_alternations<S: Scalar>(pc: &PcRef<S>) -> usize {
    fn go<S: Scalar>(pc: &PcRef<S>, memo: &mut HashMap<*const Pc<S>, usize>) -> usize {
        if let Some(&v) = memo.get(&key(pc)) {
            return v;
        }
        let v = match &**pc {
            Pc::Atom { .. } => 0,
            Pc::And(children) | Pc::Or(children) => {
                let is_and = matches!(&**pc, Pc::And(_));
                children
                    .iter()
                    .map(|c| {
                        let switch = match &**c {
                            Pc::Atom { .. } => 0,
                            Pc::And(_) => usize::from(!is_and),
                            Pc::Or(_) => usize::from(is_and),
                        };
                        go(c, memo) + switch
                    })
                    .max()
                    .unwrap_or(0)
            }
        };
        memo.insert(key(pc), v);
        v
    }
    go(pc, &mut HashMap::new())
}

/// Highest polynomial degree in any atom.
pub fn pc_degree<S: Scalar>(pc: &PcRef<S>) -> u32 {
    fn go<S: Scalar>(pc: &PcRef<S>, memo: &mut HashMap<*const Pc<S>, u32>) -> u32 {
        if let Some(&v) = memo.get(&key(pc)) {
            return v;
        }
        let v = match &**pc {
            Pc::Atom { poly, .. } => poly.degree(),
            Pc::And(c) | Pc::Or(c) => c.iter().map(|x| go(x, memo)).max().unwrap_or(0),
        };
        memo.insert(key(pc), v);
        v
    }
    go(pc, &mut HashMap::new())
}

/// Distinct nodes of the DAG.
pub fn pc_node_count<S: Scalar>(pc: &PcRef<S>) -> usize {
    fn go<S: Scalar>(pc: &PcRef<S>, seen: &mut std::collections::HashSet<*const Pc<S>>) {
        if !seen.insert(key(pc)) {
            return;
        }
        if let Pc::And(c) | Pc::Or(c) = &**pc {
            for x in c {
                go(x, seen);
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    go(pc, &mut seen);
    seen.len()
}

/// Distinct atom nodes of the DAG.
pub fn pc_atom_count<S: Scalar>(pc: &PcRef<S>) -> usize {
    fn go<S: Scalar>(pc: &PcRef<S>, seen: &mut std::collections::HashSet<*const Pc<S>>) -> usize {
        if !seen.insert(key(pc)) {
            return 0;
        }
        match &**pc {
            Pc::Atom { .. } => 1,
            Pc::And(c) | Pc::Or(c) => c.iter().map(|x| go(x, seen)).sum(),
        }
    }
    go(pc, &mut std::collections::HashSet::new())
}

/// Expanded-tree descriptional size, saturating at `u64::MAX`.
pub fn pc_size<S: Scalar>(pc: &PcRef<S>) -> u64 {
    fn go<S: Scalar>(pc: &PcRef<S>, memo: &mut HashMap<*const Pc<S>, u64>) -> u64 {
        if let Some(&v) = memo.get(&key(pc)) {
            return v;
        }
        let v = match &**pc {
            Pc::Atom { poly, .. } => poly.descriptional_size().saturating_add(1),
            Pc::And(c) | Pc::Or(c) => c.iter().fold(c.len() as u64, |acc, x| acc.saturating_add(go(x, memo))),
        };
        memo.insert(key(pc), v);
        v
    }
    go(pc, &mut HashMap::new())
}

impl<S: Scalar> DescriptionalSize for PcRef<S> {
    fn descriptional_size(&self) -> u64 {
        pc_size(self)
    }
}

/// Rebuild `pc` with every atom replaced by `f(rel, poly)`, keeping sharing.
pub fn map_atoms<S: Scalar, T: Scalar>(
    pc: &PcRef<S>,
    f: &mut impl FnMut(PcRel, &Polynomial<S>) -> Result<PcRef<T>>,
) -> Result<PcRef<T>> {
    fn go<S: Scalar, T: Scalar>(
        pc: &PcRef<S>,
        f: &mut impl FnMut(PcRel, &Polynomial<S>) -> Result<PcRef<T>>,
        memo: &mut HashMap<*const Pc<S>, PcRef<T>>,
    ) -> Result<PcRef<T>> {
        if let Some(v) = memo.get(&key(pc)) {
            return Ok(v.clone());
        }
        let v = match &**pc {
            Pc::Atom { rel, poly } => f(*rel, poly)?,
            Pc::And(c) => Pc::and(c.iter().map(|x| go(x, f, memo)).collect::<Result<Vec<_>>>()?),
            Pc::Or(c) => Pc::or(c.iter().map(|x| go(x, f, memo)).collect::<Result<Vec<_>>>()?),
        };
        memo.insert(key(pc), v.clone());
        Ok(v)
    }
    go(pc, f, &mut HashMap::new())
}

/// JSON tree: `{"op": "and"|"or", "children": [...]}` or
/// `{"rel": ">"|">=", "poly": [{"exps": [...], "coef": "..."}]}`.
pub fn pc_to_json<S: Scalar>(pc: &PcRef<S>) -> Value {
    match &**pc {
        Pc::Atom { rel, poly } => json!({
            "rel": rel,
            "poly": poly
                .terms()
                .map(|(m, c)| json!({"exps": m.exponents(poly.nvars()), "coef": c.to_string()}))
                .collect::<Vec<_>>(),
        }),
        Pc::And(c) => json!({"op": "and", "children": c.iter().map(pc_to_json).collect::<Vec<_>>()}),
        Pc::Or(c) => json!({"op": "or", "children": c.iter().map(pc_to_json).collect::<Vec<_>>()}),
    }
}

/// Shared-node encoding of `pc`. Nodes with more than one parent are written
/// once into the returned table, children first, and referenced elsewhere as
/// `{"ref": k}`; everything else is written inline as in [`pc_to_json`].
pub fn pc_to_shared_json<S: Scalar>(pc: &PcRef<S>) -> (Value, Vec<Value>) {
    fn count<S: Scalar>(pc: &PcRef<S>, parents: &mut HashMap<*const Pc<S>, usize>) {
        let seen = parents.contains_key(&key(pc));
        *parents.entry(key(pc)).or_insert(0) += 1;
        if seen {
            return;
        }
        if let Pc::And(c) | Pc::Or(c) = &**pc {
            for x in c {
                count(x, parents);
            }
        }
    }
    fn emit<S: Scalar>(
        pc: &PcRef<S>,
        parents: &HashMap<*const Pc<S>, usize>,
        index: &mut HashMap<*const Pc<S>, usize>,
        table: &mut Vec<Value>,
        root: bool,
    ) -> Value {
        if let Some(&k) = index.get(&key(pc)) {
            return json!({"ref": k});
        }
        let value = match &**pc {
            Pc::Atom { .. } => pc_to_json(pc),
            Pc::And(c) | Pc::Or(c) => {
                let op = if matches!(&**pc, Pc::And(_)) { "and" } else { "or" };
                let children: Vec<Value> = c.iter().map(|x| emit(x, parents, index, table, false)).collect();
                json!({"op": op, "children": children})
            }
        };
        if root || parents[&key(pc)] < 2 {
            return value;
        }
        index.insert(key(pc), table.len());
        table.push(value);
        json!({"ref": table.len() - 1})
    }
    let mut parents = HashMap::new();
    count(pc, &mut parents);
    let mut table = Vec::new();
    let root = emit(pc, &parents, &mut HashMap::new(), &mut table, true);
    (root, table)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PcNode {
    Combination {
        op: String,
        children: Vec<PcNode>,
    },
    Atom {
        rel: PcRel,
        poly: Vec<TermNode>,
    },
    Ref {
        #[serde(rename = "ref")]
        index: usize,
    },
}

#[derive(Deserialize)]
struct TermNode {
    exps: Vec<u32>,
    coef: String,
}

pub fn pc_from_json<S: Scalar>(value: &Value, nvars: usize) -> Result<PcRef<S>> {
    pc_from_shared_json(value, &[], nvars)
}

/// Inverse of [`pc_to_shared_json`]; entry `k` of `shared` may only refer to
/// earlier entries.
pub fn pc_from_shared_json<S: Scalar>(value: &Value, shared: &[Value], nvars: usize) -> Result<PcRef<S>> {
    let mut built = Vec::with_capacity(shared.len());
    for v in shared {
        let node: PcNode = serde_json::from_value(v.clone())?;
        let pc = build(&node, nvars, &built)?;
        built.push(pc);
    }
    let node: PcNode = serde_json::from_value(value.clone())?;
    build(&node, nvars, &built)
}

fn build<S: Scalar>(node: &PcNode, nvars: usize, shared: &[PcRef<S>]) -> Result<PcRef<S>> {
    match node {
        PcNode::Combination { op, children } => {
            let c = children
                .iter()
                .map(|x| build(x, nvars, shared))
                .collect::<Result<Vec<_>>>()?;
            match op.as_str() {
                "and" => Ok(Pc::and(c)),
                "or" => Ok(Pc::or(c)),
                other => Err(Error::InvalidArgument(format!("unknown constraint operator `{other}`"))),
            }
        }
        PcNode::Atom { rel, poly } => {
            let mut terms = Vec::with_capacity(poly.len());
            for t in poly {
                if t.exps.len() != nvars {
                    return Err(Error::dims("monomial exponents", nvars, t.exps.len()));
                }
                terms.push((Monomial::from_exponents(&t.exps)?, S::parse_scalar(&t.coef)?));
            }
            Ok(Pc::atom(*rel, Polynomial::from_terms(nvars, terms)?))
        }
        PcNode::Ref { index } => shared
            .get(*index)
            .cloned()
            .ok_or_else(|| Error::Malformed(format!("constraint reference {index} is not defined before use"))),
    }
}

/// File format for a constraint: field, variable count, shared subterms and
/// the root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcDocument {
    pub field: FieldKind,
    pub nvars: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shared: Vec<Value>,
    pub pc: Value,
}

impl PcDocument {
    pub fn new<S: Scalar>(pc: &PcRef<S>, nvars: usize) -> Self {
        let (root, shared) = pc_to_shared_json(pc);
        PcDocument {
            field: S::FIELD,
            nvars,
            shared,
            pc: root,
        }
    }

    pub fn constraint<S: Scalar>(&self) -> Result<PcRef<S>> {
        if self.field == crate::scalar::FieldKind::Sqrt2 && S::FIELD == FieldKind::Rational {
            return Err(Error::FieldMismatch("constraint is over Qsqrt2".into()));
        }
        pc_from_shared_json(&self.pc, &self.shared, self.nvars)
    }
}
