//! Exact interpreter for unique hard attention transformers.
//!
//! Every row a layer sees is `[PE | payload]`. The positional block is
//! recomputed from the position and the padded length and is never written;
//! layers only produce payload.

mod json;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, AffineMap};
use crate::predicate::PredicateDef;
use crate::scalar::{FieldKind, Rat, Scalar};

pub use json::{AnyUhat, UhatDocument};

/// Attention window restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Masking {
    None,
    /// Position `i` attends to `(i, N]`; the last position attends to itself.
    Past,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layer<S> {
    /// Score `⟨A u_i, B u_j⟩`; output `C(u_i ⧺ a_i)`.
    Attention {
        query: AffineMap<S>,
        key: AffineMap<S>,
        output: AffineMap<S>,
        masking: Masking,
    },
    /// ReLU on one payload coordinate (0-based).
    Relu {
        coord: usize,
    },
    Affine {
        map: AffineMap<S>,
    },
}

impl<S: Scalar> Layer<S> {
    pub fn is_attention(&self) -> bool {
        matches!(self, Layer::Attention { .. })
    }

    /// Payload width after this layer, given PE width `pe` and payload width
    /// `w` before it.
    pub fn output_width(&self, pe: usize, w: usize) -> Result<usize> {
        let full = pe + w;
        match self {
            Layer::Attention { query, key, output, .. } => {
                if query.cols() != full {
                    return Err(Error::dims("attention query input", full, query.cols()));
                }
                if key.cols() != full {
                    return Err(Error::dims("attention key input", full, key.cols()));
                }
                if query.rows() != key.rows() {
                    return Err(Error::dims("attention key width", query.rows(), key.rows()));
                }
                if output.cols() != 2 * full {
                    return Err(Error::dims("attention output input", 2 * full, output.cols()));
                }
                Ok(output.rows())
            }
            Layer::Relu { coord } => {
                if *coord >= w {
                    return Err(Error::dims("relu coordinate", w, coord + 1));
                }
                Ok(w)
            }
            Layer::Affine { map } => {
                if map.cols() != full {
                    return Err(Error::dims("affine layer input", full, map.cols()));
                }
                Ok(map.rows())
            }
        }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Layer<T> {
        match self {
            Layer::Attention {
                query,
                key,
                output,
                masking,
            } => Layer::Attention {
                query: query.map_scalars(f),
                key: key.map_scalars(f),
                output: output.map_scalars(f),
                masking: *masking,
            },
            Layer::Relu { coord } => Layer::Relu { coord: *coord },
            Layer::Affine { map } => Layer::Affine {
                map: map.map_scalars(f),
            },
        }
    }

    fn maps(&self) -> Vec<&AffineMap<S>> {
        match self {
            Layer::Attention { query, key, output, .. } => vec![query, key, output],
            Layer::Relu { .. } => vec![],
            Layer::Affine { map } => vec![map],
        }
    }
}

/// Positional encoding: the optional standard block `(i, N, i/(N+1), 1)`
/// followed by one 0/1 column per predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PosEncoding {
    pub standard: bool,
    #[serde(default)]
    pub predicates: Vec<PredicateDef>,
}

impl PosEncoding {
    pub const POS: usize = 0;
    pub const LEN: usize = 1;
    pub const FRAC: usize = 2;
    pub const ONE: usize = 3;
    pub const STANDARD_WIDTH: usize = 4;

    pub fn none() -> Self {
        PosEncoding::default()
    }

    pub fn standard() -> Self {
        PosEncoding {
            standard: true,
            predicates: Vec::new(),
        }
    }

    pub fn is_none(&self) -> bool {
        !self.standard && self.predicates.is_empty()
    }

    pub fn width(&self) -> usize {
        if self.standard {
            Self::STANDARD_WIDTH + self.predicates.len()
        } else {
            self.predicates.len()
        }
    }

    pub fn predicate_column(&self, name: &str) -> Option<usize> {
        let base = if self.standard { Self::STANDARD_WIDTH } else { 0 };
        self.predicates.iter().position(|p| p.name == name).map(|k| base + k)
    }

    /// Add a predicate unless an identical one is present.
    pub fn add_predicate(&mut self, def: PredicateDef) -> Result<usize> {
        if let Some(existing) = self.predicates.iter().find(|p| p.name == def.name) {
            if *existing != def {
                return Err(Error::PredicateConflict(def.name));
            }
        } else {
            def.validate()?;
            self.predicates.push(def.clone());
        }
        Ok(self.predicate_column(&def.name).expect("just inserted"))
    }

    /// Rows for positions `1..=n+1` of a padded sequence.
    pub fn rows<S: Scalar>(&self, n: usize) -> Result<Vec<Vec<S>>> {
        let big_n = n + 1;
        let mut out = Vec::with_capacity(big_n);
        for i in 1..=big_n {
            let mut row = Vec::with_capacity(self.width());
            if self.standard {
                row.push(S::from_i64(i as i64));
                row.push(S::from_i64(big_n as i64));
                row.push(S::from_rat(Rat::new(i as i64, big_n as i64 + 1)?));
                row.push(S::one());
            }
            for p in &self.predicates {
                let v = i <= n && p.holds(n, i)?;
                row.push(if v { S::one() } else { S::zero() });
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Union of two encodings, with `self`'s columns first.
    pub fn merge(&self, other: &PosEncoding) -> Result<PosEncoding> {
        let mut out = PosEncoding {
            standard: self.standard || other.standard,
            predicates: self.predicates.clone(),
        };
        for p in &other.predicates {
            out.add_predicate(p.clone())?;
        }
        Ok(out)
    }

    /// Where each column of `self` lives inside the superset `target`.
    fn placement_in(&self, target: &PosEncoding) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(self.width());
        if self.standard {
            if !target.standard {
                return Err(Error::InvalidArgument(
                    "target encoding lacks the standard block".into(),
                ));
            }
            out.extend(0..Self::STANDARD_WIDTH);
        }
        for p in &self.predicates {
            out.push(
                target
                    .predicate_column(&p.name)
                    .ok_or_else(|| Error::UnknownPredicate(p.name.clone()))?,
            );
        }
        Ok(out)
    }
}

/// Index of the leftmost maximal score inside `window`.
pub fn attention_argmax<S: Scalar>(scores: &[S], window: Range<usize>) -> Result<usize> {
    if window.is_empty() || window.end > scores.len() {
        return Err(Error::BadWindow {
            start: window.start,
            end: window.end,
            len: scores.len(),
        });
    }
    let mut best = window.start;
    for j in window.start + 1..window.end {
        if scores[j] > scores[best] {
            best = j;
        }
    }
    Ok(best)
}

/// Attention window of 0-based position `i` in a padded sequence of `big_n`
/// rows.
pub fn attention_window(masking: Masking, i: usize, big_n: usize) -> Range<usize> {
    match masking {
        Masking::None => 0..big_n,
        Masking::Past if i + 1 < big_n => i + 1..big_n,
        Masking::Past => big_n - 1..big_n,
    }
}

/// Apply one layer to a padded payload sequence.
pub fn run_layer<S: Scalar>(layer: &Layer<S>, seq: &[Vec<S>], pe_rows: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
    if seq.len() != pe_rows.len() {
        return Err(Error::dims("positional rows", seq.len(), pe_rows.len()));
    }
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let w = seq[0].len();
    if let Some(bad) = seq.iter().find(|r| r.len() != w) {
        return Err(Error::dims("sequence row", w, bad.len()));
    }
    let pe = pe_rows[0].len();
    layer.output_width(pe, w)?;
    match layer {
        Layer::Relu { coord } => Ok(seq
            .iter()
            .map(|row| {
                let mut row = row.clone();
                if row[*coord].signum() == std::cmp::Ordering::Less {
                    row[*coord] = S::zero();
                }
                row
            })
            .collect()),
        Layer::Affine { map } => seq
            .iter()
            .zip(pe_rows)
            .map(|(row, p)| map.apply_segments(&[p, row]))
            .collect(),
        Layer::Attention {
            query,
            key,
            output,
            masking,
        } => {
            let big_n = seq.len();
            let queries: Vec<Vec<S>> = seq
                .iter()
                .zip(pe_rows)
                .map(|(row, p)| query.apply_segments(&[p, row]))
                .collect::<Result<_>>()?;
            let keys: Vec<Vec<S>> = seq
                .iter()
                .zip(pe_rows)
                .map(|(row, p)| key.apply_segments(&[p, row]))
                .collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(big_n);
            let mut scores = vec![S::zero(); big_n];
            for i in 0..big_n {
                let window = attention_window(*masking, i, big_n);
                for j in window.clone() {
                    scores[j] = dot(&queries[i], &keys[j])?;
                }
                let j = attention_argmax(&scores, window)?;
                out.push(output.apply_segments(&[&pe_rows[i], &seq[i], &pe_rows[j], &seq[j]])?);
            }
            Ok(out)
        }
    }
}

/// A UHAT: layers, positional encoding and an optional acceptance vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Uhat<S> {
    input_dim: usize,
    pe: PosEncoding,
    layers: Vec<Layer<S>>,
    accept: Option<Vec<S>>,
    pub metadata: BTreeMap<String, String>,
}

impl<S: Scalar> Uhat<S> {
    pub fn new(input_dim: usize, pe: PosEncoding, layers: Vec<Layer<S>>, accept: Option<Vec<S>>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Malformed("input dimension must be positive".into()));
        }
        for p in &pe.predicates {
            p.validate()?;
        }
        let u = Uhat {
            input_dim,
            pe,
            layers,
            accept,
            metadata: BTreeMap::new(),
        };
        let widths = u.widths()?;
        if let Some(t) = &u.accept {
            let last = *widths.last().expect("nonempty");
            if t.len() != last {
                return Err(Error::dims("acceptance vector", last, t.len()));
            }
        }
        Ok(u)
    }

    pub fn field(&self) -> FieldKind {
        S::FIELD
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn pe(&self) -> &PosEncoding {
        &self.pe
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn accept_vector(&self) -> Option<&[S]> {
        self.accept.as_deref()
    }

    pub fn with_accept(mut self, t: Vec<S>) -> Result<Self> {
        let w = self.output_width();
        if t.len() != w {
            return Err(Error::dims("acceptance vector", w, t.len()));
        }
        self.accept = Some(t);
        Ok(self)
    }

    pub fn without_accept(mut self) -> Self {
        self.accept = None;
        self
    }

    pub fn attention_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.is_attention()).count()
    }

    /// Payload width of the padded input; one more than `input_dim` when the
    /// machine has no positional encoding (marker column).
    pub fn input_width(&self) -> usize {
        self.input_dim + usize::from(self.pe.is_none())
    }

    /// Payload widths before the first layer and after every layer.
    pub fn widths(&self) -> Result<Vec<usize>> {
        let pe = self.pe.width();
        let mut w = self.input_width();
        let mut out = vec![w];
        for layer in &self.layers {
            w = layer.output_width(pe, w)?;
            out.push(w);
        }
        Ok(out)
    }

    pub fn output_width(&self) -> usize {
        *self.widths().expect("validated").last().expect("nonempty")
    }

    /// Padded payload `v_1, …, v_n, 0`, with a leading marker 1 on data rows
    /// when there is no positional encoding.
    pub fn pad(&self, data: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let marker = self.pe.is_none();
        let mut out = Vec::with_capacity(data.len() + 1);
        for row in data {
            if row.len() != self.input_dim {
                return Err(Error::dims("input vector", self.input_dim, row.len()));
            }
            let mut r = Vec::with_capacity(self.input_width());
            if marker {
                r.push(S::one());
            }
            r.extend(row.iter().cloned());
            out.push(r);
        }
        out.push(vec![S::zero(); self.input_width()]);
        Ok(out)
    }

    /// Final payload rows, terminator included.
    pub fn run(&self, data: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        let padded = self.pad(data)?;
        self.run_padded(&padded)
    }

    /// Run the layers on an already padded payload of `n + 1` rows; a single
    /// row is a bare terminator.
    pub fn run_padded(&self, padded: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        if padded.is_empty() {
            return Err(Error::EmptyInput);
        }
        let pe_rows = self.pe.rows(padded.len() - 1)?;
        let mut seq = padded.to_vec();
        for layer in &self.layers {
            seq = run_layer(layer, &seq, &pe_rows)?;
        }
        Ok(seq)
    }

    /// Full rows `[PE | payload]` before the first layer and after each layer.
    pub fn trace(&self, data: &[Vec<S>]) -> Result<Vec<Vec<Vec<S>>>> {
        let padded = self.pad(data)?;
        let pe_rows = self.pe.rows(data.len())?;
        let join = |seq: &[Vec<S>]| -> Vec<Vec<S>> {
            seq.iter()
                .zip(&pe_rows)
                .map(|(r, p)| p.iter().chain(r).cloned().collect())
                .collect()
        };
        let mut seq = padded;
        let mut out = vec![join(&seq)];
        for layer in &self.layers {
            seq = run_layer(layer, &seq, &pe_rows)?;
            out.push(join(&seq));
        }
        Ok(out)
    }

    /// `⟨t, first output row⟩`.
    pub fn accept_score(&self, data: &[Vec<S>]) -> Result<S> {
        let t = self.accept.as_ref().ok_or(Error::MissingAcceptVector)?;
        let out = self.run(data)?;
        dot(t, &out[0])
    }

    pub fn accepts(&self, data: &[Vec<S>]) -> Result<bool> {
        Ok(self.accept_score(data)?.is_positive())
    }

    /// Machine running `self` and then `next` on its output sequence.
    pub fn compose(&self, next: &Uhat<S>) -> Result<Uhat<S>> {
        let w1 = self.output_width();
        if w1 != next.input_width() {
            return Err(Error::dims("composition interface", w1, next.input_width()));
        }
        let pe = self.pe.merge(&next.pe)?;
        if self.pe.is_none() && !pe.is_none() {
            return Err(Error::InvalidArgument(
                "cannot add a positional encoding under a machine that relies on the marker column".into(),
            ));
        }
        let mut layers = Vec::with_capacity(self.layers.len() + next.layers.len());
        for (src, u) in [(self, &self.layers), (next, &next.layers)] {
            let place = src.pe.placement_in(&pe)?;
            let widths = src.widths()?;
            for (layer, &w) in u.iter().zip(&widths) {
                layers.push(reembed(layer, &place, src.pe.width(), pe.width(), w)?);
            }
        }
        let mut out = Uhat::new(self.input_dim, pe, layers, next.accept.clone())?;
        out.metadata = next.metadata.clone();
        Ok(out)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Uhat<T> {
        Uhat {
            input_dim: self.input_dim,
            pe: self.pe.clone(),
            layers: self.layers.iter().map(|l| l.map_scalars(f)).collect(),
            accept: self.accept.as_ref().map(|t| t.iter().map(f).collect()),
            metadata: self.metadata.clone(),
        }
    }

    /// All scalars occurring in the machine's maps and acceptance vector.
    pub fn scalars(&self) -> Vec<S> {
        let mut out: Vec<S> = self
            .layers
            .iter()
            .flat_map(|l| l.maps())
            .flat_map(|m| m.scalars().cloned().collect::<Vec<_>>())
            .collect();
        if let Some(t) = &self.accept {
            out.extend(t.iter().cloned());
        }
        out
    }

    /// Machine with only the first `k` layers and the given acceptance vector.
    pub fn prefix(&self, k: usize, accept: Option<Vec<S>>) -> Result<Uhat<S>> {
        Uhat::new(
            self.input_dim,
            self.pe.clone(),
            self.layers[..k.min(self.layers.len())].to_vec(),
            accept,
        )
    }
}

/// Move a layer from PE layout `old_pe` into `new_pe`, with payload width `w`.
fn reembed<S: Scalar>(layer: &Layer<S>, place: &[usize], old_pe: usize, new_pe: usize, w: usize) -> Result<Layer<S>> {
    let single: Vec<usize> = place.iter().copied().chain((0..w).map(|j| new_pe + j)).collect();
    debug_assert_eq!(single.len(), old_pe + w);
    let new_full = new_pe + w;
    Ok(match layer {
        Layer::Relu { coord } => Layer::Relu { coord: *coord },
        Layer::Affine { map } => Layer::Affine {
            map: map.reindex_inputs(&single, new_full)?,
        },
        Layer::Attention {
            query,
            key,
            output,
            masking,
        } => {
            let double: Vec<usize> = single
                .iter()
                .copied()
                .chain(single.iter().map(|c| c + new_full))
                .collect();
            Layer::Attention {
                query: query.reindex_inputs(&single, new_full)?,
                key: key.reindex_inputs(&single, new_full)?,
                output: output.reindex_inputs(&double, 2 * new_full)?,
                masking: *masking,
            }
        }
    })
}

/// Lift a rational machine into another field.
pub fn lift_uhat<S: Scalar>(u: &Uhat<Rat>) -> Uhat<S> {
    u.map_scalars(|x| S::from_rat(x.clone()))
}

#[cfg(test)]
mod tests;
