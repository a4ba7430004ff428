//! LP relaxation of the facility location integer program and its dual.
//!
//! The relaxation is solved by generating client-facility pairs on demand.
//! A restricted master keeps, for a working set of pairs `(i, j)`, the
//! variable `x_ij` together with its row `x_ij <= y_i`. After each solve the
//! client multipliers `v_j` price every excluded pair: a pair with
//! `c_ij < v_j` has negative reduced cost and joins the working set. When no
//! such pair remains, `(v, w)` with `w_ij = max(0, v_j - c_ij)` is feasible
//! for the full dual and matches the restricted primal objective, so both
//! are optimal for the full problem.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, RowKind};

/// Default relative duality-gap tolerance.
pub const DEFAULT_GAP_TOL: f64 = 1e-7;

const INITIAL_PAIRS_PER_CLIENT: usize = 4;

/// Optimal primal solution `(x*, y*)` of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<T> {
    m: usize,
    n: usize,
    x: Vec<T>,
    y: Vec<T>,
    pub objective: T,
}

impl<T: Scalar> FractionalSolution<T> {
    /// Assembles a fractional solution; mainly useful for tests and
    /// hand-built examples. The objective is computed from `instance`.
    pub fn from_parts(instance: &Instance<T>, x: Vec<Vec<T>>, y: Vec<T>) -> Result<Self> {
        let (m, n) = (instance.num_facilities(), instance.num_clients());
        if y.len() != m || x.len() != m || x.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("fractional solution shape".into()));
        }
        let x: Vec<T> = x.into_iter().flatten().collect();
        let objective = objective_of(instance, &x, &y);
        let sol = Self { m, n, x, y, objective };
        sol.check_feasible()?;
        Ok(sol)
    }

    #[inline]
    pub fn x(&self, i: usize, j: usize) -> T {
        self.x[i * self.n + j]
    }

    #[inline]
    pub fn y(&self, i: usize) -> T {
        self.y[i]
    }

    pub fn openings(&self) -> &[T] {
        &self.y
    }

    pub fn num_facilities(&self) -> usize {
        self.m
    }

    pub fn num_clients(&self) -> usize {
        self.n
    }

    /// Checks `sum_i x_ij = 1`, `x_ij <= y_i` and nonnegativity.
    pub fn check_feasible(&self) -> Result<()> {
        let one_tol = T::tol(1e-7);
        let cap_tol = T::tol(1e-9);
        for j in 0..self.n {
            let total: T = (0..self.m).map(|i| self.x(i, j)).sum();
            if (total - T::one()).abs() > one_tol {
                return Err(Error::InfeasibleInput(format!("client {j} is served {total} times")));
            }
        }
        for i in 0..self.m {
            if self.y[i] < T::zero() {
                return Err(Error::InfeasibleInput(format!("y[{i}] is negative")));
            }
            for j in 0..self.n {
                let x = self.x(i, j);
                if x < T::zero() || x > self.y[i] + cap_tol {
                    return Err(Error::InfeasibleInput(format!(
                        "x[{i}][{j}] = {x} violates 0 <= x <= y = {}",
                        self.y[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Optimal dual solution `(v*, w*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<T> {
    n: usize,
    pub v: Vec<T>,
    w: Vec<T>,
    pub objective: T,
}

impl<T: Scalar> DualSolution<T> {
    /// Builds a dual from client budgets using the smallest feasible
    /// `w_ij = max(0, v_j - c_ij)`.
    pub fn from_budgets(instance: &Instance<T>, v: Vec<T>) -> Self {
        let n = instance.num_clients();
        let mut w = Vec::with_capacity(instance.num_facilities() * n);
        for i in 0..instance.num_facilities() {
            w.extend((0..n).map(|j| (v[j] - instance.cost(i, j)).max(T::zero())));
        }
        let objective = v.iter().copied().sum();
        Self { n, v, w, objective }
    }

    #[inline]
    pub fn w(&self, i: usize, j: usize) -> T {
        self.w[i * self.n + j]
    }

    /// Checks `sum_j w_ij <= f_i`, `v_j - w_ij <= c_ij` and `w >= 0`.
    pub fn check_feasible(&self, instance: &Instance<T>) -> Result<()> {
        let tol = T::tol(1e-7);
        for i in 0..instance.num_facilities() {
            let paid: T = (0..self.n).map(|j| self.w(i, j)).sum();
            if paid > instance.facility_cost(i) + tol {
                return Err(Error::InfeasibleInput(format!(
                    "facility {i} overpaid: {paid} > {}",
                    instance.facility_cost(i)
                )));
            }
            for j in 0..self.n {
                if self.w(i, j) < T::zero() || self.v[j] - self.w(i, j) > instance.cost(i, j) + tol {
                    return Err(Error::InfeasibleInput(format!("dual row ({i}, {j}) violated")));
                }
            }
        }
        Ok(())
    }
}

/// Per-client split of the LP cost into connection and facility shares.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShares<T> {
    /// `C*_j = sum_i c_ij x*_ij`.
    pub connection: Vec<T>,
    /// `F*_j = v*_j - C*_j`.
    pub facility: Vec<T>,
    /// `v*_j`.
    pub budget: Vec<T>,
    /// `F* = sum_i f_i y*_i`.
    pub total_facility: T,
    /// `C* = sum_ij c_ij x*_ij`.
    pub total_connection: T,
}

impl<T: Scalar> ClientShares<T> {
    /// `lambda_f * F* + lambda_c * C*`.
    pub fn bifactor(&self, lambda_f: T, lambda_c: T) -> T {
        lambda_f * self.total_facility + lambda_c * self.total_connection
    }

    pub fn total(&self) -> T {
        self.total_facility + self.total_connection
    }
}

fn objective_of<T: Scalar>(instance: &Instance<T>, x: &[T], y: &[T]) -> T {
    let n = instance.num_clients();
    let mut total = T::zero();
    for (i, &yi) in y.iter().enumerate() {
        total = total + instance.facility_cost(i) * yi;
        for j in 0..n {
            total = total + instance.cost(i, j) * x[i * n + j];
        }
    }
    total
}

/// Solves the relaxation to optimality and returns matching primal and dual
/// solutions whose objectives agree within `gap_tol * max(1, objective)`.
pub fn solve_relaxation<T: Scalar>(
    instance: &Instance<T>,
    gap_tol: T,
) -> Result<(FractionalSolution<T>, DualSolution<T>)> {
    if !(gap_tol > T::zero()) {
        return Err(Error::InvalidParameter("gap tolerance must be positive".into()));
    }
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    let mut in_set = vec![false; m * n];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..n {
        for &i in instance.facilities_by_distance(j).iter().take(INITIAL_PAIRS_PER_CLIENT) {
            in_set[i * n + j] = true;
            pairs.push((i, j));
        }
    }

    let price_tol = T::tol(1e-9);
    let (values, budgets) = loop {
        pairs.sort_unstable_by_key(|&(i, j)| (j, i));
        let (values, budgets) = solve_restricted(instance, &pairs)?;
        let mut added = false;
        for j in 0..n {
            let threshold = budgets[j] - price_tol * budgets[j].abs().max(T::one());
            for i in 0..m {
                if !in_set[i * n + j] && instance.cost(i, j) < threshold {
                    in_set[i * n + j] = true;
                    pairs.push((i, j));
                    added = true;
                }
            }
        }
        if !added {
            break (values, budgets);
        }
    };

    let mut x = vec![T::zero(); m * n];
    let mut y = vec![T::zero(); m];
    let snap = T::tol(1e-11);
    for (&(i, j), &(xv, _)) in pairs.iter().zip(&values) {
        x[i * n + j] = if xv > snap { xv } else { T::zero() };
    }
    for (p, &(_, yv)) in values.iter().enumerate() {
        let i = pairs[p].0;
        if yv > snap {
            y[i] = yv;
        }
    }
    for j in 0..n {
        let total: T = (0..m).map(|i| x[i * n + j]).sum();
        if total <= T::zero() {
            return Err(Error::NumericalFailure(format!("client {j} lost its assignment")));
        }
        for i in 0..m {
            x[i * n + j] = x[i * n + j] / total;
        }
    }
    for i in 0..m {
        for j in 0..n {
            y[i] = y[i].max(x[i * n + j]);
        }
    }
    let objective = objective_of(instance, &x, &y);
    let primal = FractionalSolution { m, n, x, y, objective };
    primal.check_feasible().map_err(|e| Error::NumericalFailure(e.to_string()))?;

    let dual = DualSolution::from_budgets(instance, budgets);
    dual.check_feasible(instance).map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let gap = (primal.objective - dual.objective).abs();
    if gap > gap_tol * primal.objective.abs().max(T::one()) {
        return Err(Error::NumericalFailure(format!(
            "duality gap {gap} exceeds tolerance (primal {}, dual {})",
            primal.objective, dual.objective
        )));
    }
    Ok((primal, dual))
}

/// Solves the restricted master over `pairs` (sorted by client). Returns,
/// per pair, `(x_ij, y_i)` and the client multipliers `v`.
/// Per-pair `(x_ij, y_i)` values and client multipliers.
type RestrictedSolution<T> = (Vec<(T, T)>, Vec<T>);

fn solve_restricted<T: Scalar>(
    instance: &Instance<T>,
    pairs: &[(usize, usize)],
) -> Result<RestrictedSolution<T>> {
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    let mut facility_var = vec![usize::MAX; m];
    let mut next = pairs.len();
    for &(i, _) in pairs {
        if facility_var[i] == usize::MAX {
            facility_var[i] = next;
            next += 1;
        }
    }
    let mut lp = LinearProgram::new(next);
    for (p, &(i, j)) in pairs.iter().enumerate() {
        lp.set_cost(p, instance.cost(i, j));
    }
    for i in 0..m {
        if facility_var[i] != usize::MAX {
            lp.set_cost(facility_var[i], instance.facility_cost(i));
        }
    }
    let mut client_row = vec![0; n];
    let mut start = 0;
    for (j, row) in client_row.iter_mut().enumerate() {
        let end = start + pairs[start..].iter().take_while(|&&(_, jj)| jj == j).count();
        let coeffs = (start..end).map(|p| (p, T::one())).collect();
        *row = lp.add_row(coeffs, RowKind::Eq, T::one());
        start = end;
    }
    for (p, &(i, _)) in pairs.iter().enumerate() {
        lp.add_row(vec![(p, T::one()), (facility_var[i], -T::one())], RowKind::Le, T::zero());
    }
    let sol = lp.minimize()?;
    let values = pairs
        .iter()
        .enumerate()
        .map(|(p, &(i, _))| (sol.x[p], sol.x[facility_var[i]]))
        .collect();
    let budgets = client_row.iter().map(|&r| sol.duals[r]).collect();
    Ok((values, budgets))
}

/// Splits the LP cost into per-client facility and connection shares.
pub fn client_shares<T: Scalar>(
    instance: &Instance<T>,
    primal: &FractionalSolution<T>,
    dual: &DualSolution<T>,
) -> Result<ClientShares<T>> {
    primal.check_feasible()?;
    dual.check_feasible(instance)?;
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    if dual.v.len() != n || primal.num_clients() != n || primal.num_facilities() != m {
        return Err(Error::DimensionMismatch("primal, dual and instance disagree".into()));
    }
    let connection: Vec<T> = (0..n)
        .map(|j| (0..m).map(|i| instance.cost(i, j) * primal.x(i, j)).sum())
        .collect();
    let facility: Vec<T> = (0..n).map(|j| dual.v[j] - connection[j]).collect();
    if let Some(j) = (0..n).find(|&j| facility[j] < -T::tol(1e-7)) {
        return Err(Error::InfeasibleInput(format!(
            "client {j} has negative facility share {}",
            facility[j]
        )));
    }
    let total_facility = (0..m).map(|i| instance.facility_cost(i) * primal.y(i)).sum();
    let total_connection = connection.iter().copied().sum();
    Ok(ClientShares {
        connection,
        facility,
        budget: dual.v.clone(),
        total_facility,
        total_connection,
    })
}

/// Primal, dual and shares bundled together.
#[derive(Debug, Clone)]
pub struct Relaxation<T> {
    pub primal: FractionalSolution<T>,
    pub dual: DualSolution<T>,
    pub shares: ClientShares<T>,
}

impl<T: Scalar> Relaxation<T> {
    pub fn solve(instance: &Instance<T>) -> Result<Self> {
        let (primal, dual) = solve_relaxation(instance, T::tol(DEFAULT_GAP_TOL))?;
        let shares = client_shares(instance, &primal, &dual)?;
        Ok(Self { primal, dual, shares })
    }

    pub fn objective(&self) -> T {
        self.primal.objective
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_instance() -> Instance<f64> {
        let fpos = [0.0f64, 1.0, 2.0];
        let cpos = [0.25f64, 0.75, 1.25, 1.75];
        let rows = fpos.iter().map(|p| cpos.iter().map(|q| (p - q).abs()).collect()).collect();
        Instance::new(vec![1.0, 3.0, 1.0], rows).unwrap()
    }

    #[test]
    fn single_pair_relaxation() {
        let inst: Instance<f64> = Instance::new(vec![2.0], vec![vec![3.0]]).unwrap();
        let (p, d) = solve_relaxation(&inst, 1e-7).unwrap();
        assert_eq!(p.y(0), 1.0);
        assert_eq!(p.x(0, 0), 1.0);
        assert!((p.objective - 5.0).abs() < 1e-12);
        let shares = client_shares(&inst, &p, &d).unwrap();
        assert!((shares.connection[0] - 3.0).abs() < 1e-12);
        assert!((shares.facility[0] - 2.0).abs() < 1e-9);
        assert!((shares.budget[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn free_facilities_give_nearest_costs() {
        let rows = vec![vec![1.0, 4.0, 2.0], vec![3.0, 0.5, 2.5]];
        let inst: Instance<f64> = Instance::new(vec![0.0, 0.0], rows).unwrap();
        let r = Relaxation::solve(&inst).unwrap();
        assert!((r.objective() - 3.5).abs() < 1e-9);
        assert!(r.shares.facility.iter().all(|f| f.abs() < 1e-9));
    }

    #[test]
    fn tiny_line_relaxation_is_a_lower_bound() {
        let inst = line_instance();
        let r = Relaxation::solve(&inst).unwrap();
        assert!(r.objective() <= 4.0 + 1e-9);
        assert!((r.dual.objective - r.objective()).abs() < 1e-6);
        assert!((r.shares.total() - r.objective()).abs() < 1e-9);
    }

    #[test]
    fn complementary_slackness_holds() {
        let inst = line_instance();
        let r = Relaxation::solve(&inst).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                if r.primal.x(i, j) > 1e-6 {
                    assert!(r.dual.v[j] - r.dual.w(i, j) >= inst.cost(i, j) - 1e-5);
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_gap() {
        let inst: Instance<f64> = Instance::new(vec![2.0], vec![vec![3.0]]).unwrap();
        assert!(solve_relaxation(&inst, 0.0).is_err());
    }

    #[test]
    fn shares_reject_infeasible_primal() {
        let inst: Instance<f64> = Instance::new(vec![2.0], vec![vec![3.0]]).unwrap();
        let (p, d) = solve_relaxation(&inst, 1e-7).unwrap();
        let mut bad = p.clone();
        bad.x[0] = 0.5;
        assert!(matches!(client_shares(&inst, &bad, &d), Err(Error::InfeasibleInput(_))));
    }

    #[test]
    fn single_precision_relaxation() {
        let inst: Instance<f32> = line_instance().cast();
        let r = Relaxation::solve(&inst).unwrap();
        assert!(r.objective() <= 4.0 + 1e-4);
    }
}
