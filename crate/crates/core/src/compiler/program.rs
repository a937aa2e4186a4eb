//! Layer builder used by the compiler and the hand-built examples.
//!
//! Columns are addressed in the full row `[PE | payload]`. Consecutive affine
//! maps are fused, an affine map right after an attention layer is folded
//! into its output map, and an affine map right before an attention layer is
//! folded into its query, key and output maps.

use crate::error::{Error, Result};
use crate::linalg::{AffineMap, SparseRow};
use crate::scalar::Scalar;
use crate::vm::{Layer, Masking, PosEncoding, Uhat};

/// Affine expression over the columns of a full row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr<S> {
    terms: SparseRow<S>,
    constant: S,
}

impl<S: Scalar> Expr<S> {
    pub fn constant(c: S) -> Self {
        Expr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    /// The raw full-row column `col`.
    pub fn column(col: usize) -> Self {
        Expr {
            terms: vec![(col, S::one())],
            constant: S::zero(),
        }
    }

    pub fn scale(mut self, c: &S) -> Self {
        for (_, x) in &mut self.terms {
            *x = x.clone() * c;
        }
        self.constant = self.constant * c;
        self
    }

    pub fn add_const(mut self, c: S) -> Self {
        self.constant = self.constant + c;
        self
    }

    /// `self + c·other`.
    pub fn add_scaled(mut self, other: &Expr<S>, c: &S) -> Self {
        for (j, x) in &other.terms {
            self.terms.push((*j, x.clone() * c));
        }
        self.constant = self.constant + other.constant.clone() * c;
        self
    }

    pub fn shifted(mut self, by: usize) -> Self {
        for (j, _) in &mut self.terms {
            *j += by;
        }
        self
    }

    fn into_row(self) -> (SparseRow<S>, S) {
        (self.terms, self.constant)
    }
}

impl<S: Scalar> std::ops::Add for Expr<S> {
    type Output = Expr<S>;
    fn add(self, rhs: Expr<S>) -> Expr<S> {
        self.add_scaled(&rhs, &S::one())
    }
}

impl<S: Scalar> std::ops::Sub for Expr<S> {
    type Output = Expr<S>;
    fn sub(self, rhs: Expr<S>) -> Expr<S> {
        self.add_scaled(&rhs, &-S::one())
    }
}

impl<S: Scalar> std::ops::Neg for Expr<S> {
    type Output = Expr<S>;
    fn neg(self) -> Expr<S> {
        self.scale(&-S::one())
    }
}

fn to_map<S: Scalar>(cols: usize, rows: Vec<Expr<S>>) -> Result<AffineMap<S>> {
    AffineMap::from_sparse(cols, rows.into_iter().map(Expr::into_row).collect())
}

/// `[pe-passthrough ; inner]` over an input of `cols` columns.
fn lift_pe<S: Scalar>(pe: usize, cols: usize, inner: &AffineMap<S>) -> Result<AffineMap<S>> {
    let pass = AffineMap::from_sparse(cols, (0..pe).map(|k| (vec![(k, S::one())], S::zero())).collect())?;
    pass.stack(inner)
}

/// Incrementally built machine with a fixed positional encoding.
#[derive(Debug, Clone)]
pub struct Program<S> {
    pe: PosEncoding,
    input_dim: usize,
    width: usize,
    layers: Vec<Layer<S>>,
    sealed: usize,
}

impl<S: Scalar> Program<S> {
    pub fn new(input_dim: usize, pe: PosEncoding) -> Self {
        let width = input_dim + usize::from(pe.is_none());
        Program {
            pe,
            input_dim,
            width,
            layers: Vec::new(),
            sealed: 0,
        }
    }

    /// Stop later layers from being fused into the ones emitted so far.
    pub fn seal(&mut self) {
        self.sealed = self.layers.len();
    }

    fn fusable(&self) -> Option<&Layer<S>> {
        self.layers.last().filter(|_| self.layers.len() > self.sealed)
    }

    pub fn pe(&self) -> &PosEncoding {
        &self.pe
    }

    /// Current payload width.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    fn full(&self) -> usize {
        self.pe.width() + self.width
    }

    /// Payload column `c`.
    pub fn col(&self, c: usize) -> Expr<S> {
        Expr::column(self.pe.width() + c)
    }

    /// Positional column `k`.
    pub fn pe_col(&self, k: usize) -> Expr<S> {
        Expr::column(k)
    }

    /// Standard-block helpers; only meaningful with the standard block.
    pub fn pos(&self) -> Expr<S> {
        self.pe_col(PosEncoding::POS)
    }

    pub fn len(&self) -> Expr<S> {
        self.pe_col(PosEncoding::LEN)
    }

    pub fn frac(&self) -> Expr<S> {
        self.pe_col(PosEncoding::FRAC)
    }

    /// An expression over the attended row, for attention output maps.
    pub fn att(&self, e: Expr<S>) -> Expr<S> {
        e.shifted(self.full())
    }

    /// Identity on the current payload.
    pub fn keep(&self) -> Vec<Expr<S>> {
        (0..self.width).map(|c| self.col(c)).collect()
    }

    fn require_standard(&self, what: &str) -> Result<()> {
        if self.pe.standard {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{what} needs the standard positional block"
            )))
        }
    }

    /// Position-wise affine layer producing `rows` as the new payload.
    pub fn affine(&mut self, rows: Vec<Expr<S>>) -> Result<()> {
        let pe = self.pe.width();
        let map = to_map(self.full(), rows)?;
        let new_width = map.rows();
        let tail = if self.fusable().is_some() {
            self.layers.last_mut()
        } else {
            None
        };
        match tail {
            Some(Layer::Affine { map: prev }) => {
                let lifted = lift_pe(pe, prev.cols(), prev)?;
                *prev = map.compose(&lifted)?;
            }
            Some(Layer::Attention { output, .. }) => {
                let lifted = lift_pe(pe, output.cols(), output)?;
                *output = map.compose(&lifted)?;
            }
            _ => self.layers.push(Layer::Affine { map }),
        }
        self.width = new_width;
        Ok(())
    }

    /// Keep the payload and append `extra` columns; returns the first new
    /// column.
    pub fn append(&mut self, extra: Vec<Expr<S>>) -> Result<usize> {
        let first = self.width;
        let mut rows = self.keep();
        rows.extend(extra);
        self.affine(rows)?;
        Ok(first)
    }

    /// Keep only the listed payload columns, in order.
    pub fn select(&mut self, cols: &[usize]) -> Result<()> {
        let rows = cols.iter().map(|&c| self.col(c)).collect();
        self.affine(rows)
    }

    pub fn truncate(&mut self, width: usize) -> Result<()> {
        let cols: Vec<usize> = (0..width).collect();
        self.select(&cols)
    }

    pub fn relu(&mut self, coord: usize) -> Result<()> {
        if coord >= self.width {
            return Err(Error::dims("relu coordinate", self.width, coord + 1));
        }
        self.layers.push(Layer::Relu { coord });
        Ok(())
    }

    /// Append `ReLU(e)` for each expression; returns the new columns.
    pub fn relu_of(&mut self, exprs: Vec<Expr<S>>) -> Result<Vec<usize>> {
        let k = exprs.len();
        let first = self.append(exprs)?;
        for c in first..first + k {
            self.relu(c)?;
        }
        Ok((first..first + k).collect())
    }

    /// Attention layer; `output` may use [`Program::att`] expressions.
    pub fn attention(
        &mut self,
        query: Vec<Expr<S>>,
        key: Vec<Expr<S>>,
        output: Vec<Expr<S>>,
        masking: Masking,
    ) -> Result<()> {
        let full = self.full();
        let mut q = to_map(full, query)?;
        let mut k = to_map(full, key)?;
        let mut c = to_map(2 * full, output)?;
        if q.rows() != k.rows() {
            return Err(Error::dims("attention key width", q.rows(), k.rows()));
        }
        let new_width = c.rows();
        if let Some(Layer::Affine { map: prev }) = self.fusable() {
            let pe = self.pe.width();
            let inner = prev.cols();
            let lifted = lift_pe(pe, inner, prev)?;
            let own: Vec<usize> = (0..inner).collect();
            let other: Vec<usize> = (inner..2 * inner).collect();
            let doubled = lifted
                .reindex_inputs(&own, 2 * inner)?
                .stack(&lifted.reindex_inputs(&other, 2 * inner)?)?;
            q = q.compose(&lifted)?;
            k = k.compose(&lifted)?;
            c = c.compose(&doubled)?;
            self.layers.pop();
        }
        self.layers.push(Layer::Attention {
            query: q,
            key: k,
            output: c,
            masking,
        });
        self.width = new_width;
        Ok(())
    }

    /// Column `c` becomes `b` at the terminator and is unchanged elsewhere;
    /// `c` must hold values in `[0, 1]`.
    pub fn set_last(&mut self, c: usize, b: bool) -> Result<()> {
        self.require_standard("set_last")?;
        let v = self.col(c);
        let t = if b {
            self.pos() - self.len() - v.clone() + Expr::one()
        } else {
            v.clone() - self.len() + self.pos()
        };
        let t = self.relu_of(vec![t])?[0];
        let mut rows = self.keep();
        rows[c] = if b { v + self.col(t) } else { v - self.col(t) };
        rows.truncate(t);
        self.affine(rows)
    }

    /// Append the given payload columns of the right neighbour (the
    /// terminator sees itself). Returns the first appended column.
    pub fn gather_next(&mut self, cols: &[usize]) -> Result<usize> {
        self.require_standard("gather_next")?;
        let first = self.width;
        let mut out = self.keep();
        out.extend(cols.iter().map(|&c| self.att(self.col(c))));
        let query = vec![self.pe_col(PosEncoding::ONE)];
        let key = vec![-self.frac()];
        self.attention(query, key, out, Masking::Past)?;
        Ok(first)
    }

    /// With `flag` holding 0/1 values and 0 at the terminator, append for
    /// each column in `cols` its value at the least `j ≥ i` where `flag` is
    /// 0. The gathered columns must hold values in `[0, 1]`.
    pub fn first_zero(&mut self, flag: usize, cols: &[usize]) -> Result<usize> {
        self.require_standard("first_zero")?;
        let w = self.width;
        let mut out = self.keep();
        out.extend(cols.iter().map(|&c| self.att(self.col(c))));
        let query = vec![self.pe_col(PosEncoding::ONE)];
        let key = vec![Expr::one() - self.col(flag) - self.frac()];
        self.attention(query, key, out, Masking::Past)?;
        // own value when the flag is 0 here, gathered value otherwise
        let z = self.col(flag);
        let mut merge = Vec::with_capacity(2 * cols.len());
        for (k, &c) in cols.iter().enumerate() {
            merge.push(self.col(c) - z.clone());
            merge.push(self.col(w + k) + z.clone() - Expr::one());
        }
        let r = self.relu_of(merge)?;
        let mut rows = self.keep();
        rows.truncate(w);
        for k in 0..cols.len() {
            rows.push(self.col(r[2 * k]) + self.col(r[2 * k + 1]));
        }
        self.affine(rows)?;
        Ok(w)
    }

    /// Column `c` becomes the indicator of `c > 0` at every position.
    pub fn boolize(&mut self, c: usize) -> Result<()> {
        self.require_standard("boolize")?;
        let mu = self.append(vec![self.pos() - self.len() + Expr::one()])?;
        self.relu(c)?;
        self.relu(mu)?;
        let mut out = self.keep();
        out[c] = self.att(self.col(mu));
        out.truncate(mu);
        self.attention(vec![self.col(c)], vec![self.col(mu)], out, Masking::None)
    }

    pub fn finish(self, accept: Option<Vec<S>>) -> Result<Uhat<S>> {
        Uhat::new(self.input_dim, self.pe, self.layers, accept)
    }
}
