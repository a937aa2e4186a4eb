//! Exact two-phase tableau simplex with Bland's rule.

use crate::scalar::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, solution: Vec<Rat> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Constraint rows; the last entry of each row is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        let inv = Rat::one().checked_div(&p).expect("pivot is nonzero");
        for x in &mut self.rows[r] {
            if !x.is_zero() {
                *x = x.clone() * &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = x.clone() - f.clone() * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximize `cost · y` over columns with `allowed[j]`. Returns false when
    /// unbounded.
    fn optimize(&mut self, cost: &[Rat], allowed: &[bool]) -> bool {
        loop {
            // reduced cost c_j − c_B B⁻¹ A_j; enter the first improving column
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced = reduced - cost[b].clone() * &row[j];
                    }
                }
                reduced.signum().is_gt()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rat)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].signum().is_gt() {
                    continue;
                }
                let ratio = row[self.cols].clone().checked_div(&row[c]).expect("positive pivot");
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }

    fn value_of(&self, j: usize) -> Rat {
        self.basis
            .iter()
            .position(|&b| b == j)
            .map(|r| self.rows[r][self.cols].clone())
            .unwrap_or_else(Rat::zero)
    }
}

/// Maximize `c · y` subject to `A y ≤ b` and `y ≥ 0`.
pub fn maximize(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i].signum().is_lt()).collect();
    // columns: originals, one slack per row, one artificial per negative row
    let cols = n + m + negative.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Rat::zero(); cols + 1];
        let flip = b[i].signum().is_lt();
        let sign = if flip { -Rat::one() } else { Rat::one() };
        for j in 0..n {
            row[j] = a[i][j].clone() * &sign;
        }
        row[n + i] = sign.clone();
        row[cols] = b[i].clone() * &sign;
        if flip {
            let art = n + m + negative.iter().position(|&k| k == i).expect("listed");
            row[art] = Rat::one();
            basis.push(art);
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, cols };
    if !negative.is_empty() {
        let mut phase1 = vec![Rat::zero(); cols];
        for x in &mut phase1[n + m..] {
            *x = -Rat::one();
        }
        t.optimize(&phase1, &vec![true; cols]);
        if (n + m..cols).any(|j| !t.value_of(j).is_zero()) {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n + m {
                match (0..n + m).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
    let mut cost = vec![Rat::zero(); cols];
    cost[..n].clone_from_slice(c);
    let allowed: Vec<bool> = (0..cols).map(|j| j < n + m).collect();
    if !t.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let solution: Vec<Rat> = (0..n).map(|j| t.value_of(j)).collect();
    let value = solution
        .iter()
        .zip(c)
        .fold(Rat::zero(), |acc, (y, ci)| acc + y.clone() * ci);
    LpOutcome::Optimal { value, solution }
}
