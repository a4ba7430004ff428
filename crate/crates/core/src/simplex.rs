//! Dense two-phase tableau simplex with row duals.
//!
//! Sized for the restricted master problems built by [`crate::lp`]: a few
//! hundred rows. Dantzig pricing is used until the method stalls on
//! degenerate pivots, after which Bland's rule takes over until progress
//! resumes.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row<T> {
    coeffs: Vec<(usize, T)>,
    kind: RowKind,
    rhs: T,
}

/// `minimize c^T x` subject to sparse rows and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    objective: Vec<T>,
    rows: Vec<Row<T>>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    /// One multiplier per row, in the sign convention of a minimization
    /// (`<=` rows have nonpositive duals, `>=` rows nonnegative).
    pub duals: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

const STALL_LIMIT: usize = 50;

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self { objective: vec![T::zero(); num_vars], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_cost(&mut self, var: usize, cost: T) {
        self.objective[var] = cost;
    }

    /// Adds a row and returns its index.
    pub fn add_row(&mut self, coeffs: Vec<(usize, T)>, kind: RowKind, rhs: T) -> usize {
        debug_assert!(coeffs.iter().all(|&(v, _)| v < self.num_vars()));
        self.rows.push(Row { coeffs, kind, rhs });
        self.rows.len() - 1
    }

    pub fn minimize(&self) -> Result<LpSolution<T>> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau<T> {
    rows: usize,
    width: usize,
    num_vars: usize,
    first_artificial: usize,
    cells: Vec<T>,
    reduced: Vec<T>,
    basis: Vec<usize>,
    identity_col: Vec<usize>,
    flipped: Vec<bool>,
    pivots: usize,
    pivot_tol: T,
    cost_tol: T,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let rows = lp.rows.len();
        let num_vars = lp.num_vars();
        let normalized: Vec<(RowKind, bool)> = lp
            .rows
            .iter()
            .map(|row| {
                let flip = row.rhs < T::zero();
                let kind = match (row.kind, flip) {
                    (RowKind::Le, true) => RowKind::Ge,
                    (RowKind::Ge, true) => RowKind::Le,
                    (kind, _) => kind,
                };
                (kind, flip)
            })
            .collect();
        let num_slack = normalized.iter().filter(|(k, _)| *k != RowKind::Eq).count();
        let num_artificial = normalized.iter().filter(|(k, _)| *k != RowKind::Le).count();
        let first_slack = num_vars;
        let first_artificial = first_slack + num_slack;
        let cols = first_artificial + num_artificial;
        let width = cols + 1;

        let mut cells = vec![T::zero(); rows * width];
        let mut basis = vec![0; rows];
        let mut identity_col = vec![0; rows];
        let (mut next_slack, mut next_art) = (first_slack, first_artificial);
        for (r, (row, &(kind, flip))) in lp.rows.iter().zip(&normalized).enumerate() {
            let sign = if flip { -T::one() } else { T::one() };
            let line = &mut cells[r * width..(r + 1) * width];
            for &(v, a) in &row.coeffs {
                line[v] = line[v] + sign * a;
            }
            line[cols] = sign * row.rhs;
            match kind {
                RowKind::Le => {
                    line[next_slack] = T::one();
                    basis[r] = next_slack;
                    identity_col[r] = next_slack;
                    next_slack += 1;
                }
                RowKind::Ge => {
                    line[next_slack] = -T::one();
                    next_slack += 1;
                    line[next_art] = T::one();
                    basis[r] = next_art;
                    identity_col[r] = next_art;
                    next_art += 1;
                }
                RowKind::Eq => {
                    line[next_art] = T::one();
                    basis[r] = next_art;
                    identity_col[r] = next_art;
                    next_art += 1;
                }
            }
        }
        Self {
            rows,
            width,
            num_vars,
            first_artificial,
            cells,
            reduced: vec![T::zero(); width],
            basis,
            identity_col,
            flipped: normalized.iter().map(|&(_, f)| f).collect(),
            pivots: 0,
            pivot_tol: T::tol(1e-9),
            cost_tol: T::tol(1e-10),
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> T {
        self.cells[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    /// Sets the reduced-cost row for column costs `cost` given the current basis.
    fn price(&mut self, cost: impl Fn(usize) -> T) {
        let w = self.width;
        for c in 0..w - 1 {
            self.reduced[c] = cost(c);
        }
        self.reduced[w - 1] = T::zero();
        for r in 0..self.rows {
            let cb = cost(self.basis[r]);
            if cb != T::zero() {
                for c in 0..w {
                    self.reduced[c] = self.reduced[c] - cb * self.cells[r * w + c];
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = T::one() / self.at(pr, pc);
        for c in 0..w {
            self.cells[pr * w + c] = self.cells[pr * w + c] * inv;
        }
        self.cells[pr * w + pc] = T::one();
        let (before, rest) = self.cells.split_at_mut(pr * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for line in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let factor = line[pc];
            if factor != T::zero() {
                for (cell, &p) in line.iter_mut().zip(pivot_row.iter()) {
                    *cell = *cell - factor * p;
                }
                line[pc] = T::zero();
            }
        }
        let factor = self.reduced[pc];
        if factor != T::zero() {
            for (cell, &p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *cell = *cell - factor * p;
            }
            self.reduced[pc] = T::zero();
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    fn entering(&self, allowed: usize, bland: bool) -> Option<usize> {
        let candidates = (0..allowed).filter(|&c| self.reduced[c] < -self.cost_tol);
        if bland {
            return candidates.into_iter().next();
        }
        candidates.fold(None, |best: Option<usize>, c| match best {
            Some(b) if self.reduced[b] <= self.reduced[c] => Some(b),
            _ => Some(c),
        })
    }

    fn leaving(&self, pc: usize, bland: bool) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, T)> = None;
        for r in 0..self.rows {
            let a = self.at(r, pc);
            if a <= self.pivot_tol {
                continue;
            }
            let ratio = self.at(r, rhs).max(T::zero()) / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie_eps = T::tol(1e-12) * (T::one() + bratio.abs());
                    if ratio < bratio - tie_eps {
                        Some((r, ratio))
                    } else if ratio <= bratio + tie_eps {
                        let better = if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            a > self.at(br, pc)
                        };
                        if better { Some((r, ratio)) } else { Some((br, bratio)) }
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations with entering columns restricted to `0..allowed`.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let limit = 50 * (self.rows + self.width) + 1000;
        let mut stalled = 0usize;
        let mut bland = false;
        for _ in 0..limit {
            let Some(pc) = self.entering(allowed, bland) else {
                return Ok(());
            };
            let Some(pr) = self.leaving(pc, bland) else {
                return Err(Error::NumericalFailure("linear program is unbounded".into()));
            };
            let step = self.at(pr, self.rhs_col()) / self.at(pr, pc);
            if step <= self.pivot_tol {
                stalled += 1;
                if stalled > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stalled = 0;
                bland = false;
            }
            self.pivot(pr, pc);
        }
        Err(Error::NumericalFailure(format!("simplex iteration limit {limit} reached")))
    }

    fn solve(mut self, lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
        let cols = self.width - 1;
        let first_art = self.first_artificial;
        if first_art < cols {
            self.price(|c| if c >= first_art { T::one() } else { T::zero() });
            self.optimize(cols)?;
            let infeasibility = self.reduced[self.rhs_col()].abs();
            let scale = (0..self.rows).fold(T::one(), |acc, r| acc.max(self.at(r, cols).abs()));
            if infeasibility > T::tol(1e-9) * scale {
                return Err(Error::InfeasibleInput(format!(
                    "phase one ended with infeasibility {infeasibility}"
                )));
            }
            for r in 0..self.rows {
                if self.basis[r] >= first_art {
                    let replacement = (0..first_art)
                        .filter(|&c| self.at(r, c).abs() > self.pivot_tol)
                        .max_by(|&a, &b| {
                            self.at(r, a).abs().partial_cmp(&self.at(r, b).abs()).unwrap()
                        });
                    if let Some(pc) = replacement {
                        self.pivot(r, pc);
                    }
                }
            }
        }
        let nv = self.num_vars;
        self.price(|c| if c < nv { lp.objective[c] } else { T::zero() });
        self.optimize(first_art)?;

        let mut x = vec![T::zero(); nv];
        for r in 0..self.rows {
            if self.basis[r] < nv {
                x[self.basis[r]] = self.at(r, cols);
            }
        }
        let duals = (0..self.rows)
            .map(|r| {
                let y = -self.reduced[self.identity_col[r]];
                if self.flipped[r] { -y } else { y }
            })
            .collect();
        let objective = x.iter().zip(&lp.objective).map(|(&v, &c)| v * c).sum();
        Ok(LpSolution { x, duals, objective, pivots: self.pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), value 36
        let mut lp = LinearProgram::<f64>::new(2);
        lp.set_cost(0, -3.0);
        lp.set_cost(1, -5.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], RowKind::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], RowKind::Le, 18.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        assert!((sol.objective + 36.0).abs() < 1e-12);
        // shadow prices of the textbook example: (0, 3/2, 1), negated for min
        let expect = [0.0, -1.5, -1.0];
        for (d, e) in sol.duals.iter().zip(expect) {
            assert!((d - e).abs() < 1e-12, "{:?}", sol.duals);
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y s.t. x + y = 3, x - y >= -1, x <= 1 -> x=1, y=2, obj 5
        let mut lp = LinearProgram::<f64>::new(2);
        lp.set_cost(0, 1.0);
        lp.set_cost(1, 2.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], RowKind::Eq, 3.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], RowKind::Ge, -1.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 1.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective - 5.0).abs() < 1e-12);
        // strong duality: b^T y equals the objective
        let dual_obj = 3.0 * sol.duals[0] - 1.0 * sol.duals[1] + 1.0 * sol.duals[2];
        assert!((dual_obj - 5.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.add_row(vec![(0, 1.0)], RowKind::Ge, 2.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Le, 1.0);
        assert!(matches!(lp.minimize(), Err(Error::InfeasibleInput(_))));
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.set_cost(0, -1.0);
        lp.add_row(vec![(0, 1.0)], RowKind::Ge, 0.0);
        assert!(matches!(lp.minimize(), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's cycling instance; optimum -5/4 at x = (1, 0, 1, 0)
        let mut lp = LinearProgram::<f64>::new(4);
        for (v, c) in [-0.75, 20.0, -0.5, 6.0].into_iter().enumerate() {
            lp.set_cost(v, c);
        }
        lp.add_row(vec![(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], RowKind::Le, 0.0);
        lp.add_row(vec![(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], RowKind::Le, 0.0);
        lp.add_row(vec![(2, 1.0)], RowKind::Le, 1.0);
        let sol = lp.minimize().unwrap();
        assert!((sol.objective + 1.25).abs() < 1e-12, "{}", sol.objective);
    }
}
