//! Problem instances, integral solutions and cost accounting.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An uncapacitated facility location instance.
///
/// Holds `m` facility opening costs and an `m x n` connection cost matrix
/// stored row-major (one row per facility). Always valid once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    facility_costs: Vec<T>,
    connection_costs: Vec<T>,
    m: usize,
    n: usize,
}

/// Checks the instance invariants on raw parts.
///
/// Non-finite entries are reported before negative ones so that `NaN` never
/// slips through a sign test.
pub fn validate<T: Scalar>(facility_costs: &[T], connection_costs: &[Vec<T>]) -> Result<()> {
    let m = facility_costs.len();
    let n = connection_costs.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(Error::EmptyDimension { m, n });
    }
    if connection_costs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} facility costs but {} cost rows",
            m,
            connection_costs.len()
        )));
    }
    for (i, &f) in facility_costs.iter().enumerate() {
        if !f.is_finite() {
            return Err(Error::NonFiniteEntry { location: format!("f[{i}]") });
        }
        if f < T::zero() {
            return Err(Error::NegativeCost { location: format!("f[{i}]"), value: f.as_f64() });
        }
    }
    for (i, row) in connection_costs.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &c) in row.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteEntry { location: format!("c[{i}][{j}]") });
            }
            if c < T::zero() {
                return Err(Error::NegativeCost {
                    location: format!("c[{i}][{j}]"),
                    value: c.as_f64(),
                });
            }
        }
    }
    Ok(())
}

impl<T: Scalar> Instance<T> {
    /// Builds an instance from facility costs and per-facility cost rows.
    pub fn new(facility_costs: Vec<T>, connection_costs: Vec<Vec<T>>) -> Result<Self> {
        validate(&facility_costs, &connection_costs)?;
        let m = facility_costs.len();
        let n = connection_costs[0].len();
        Ok(Self {
            facility_costs,
            connection_costs: connection_costs.into_iter().flatten().collect(),
            m,
            n,
        })
    }

    pub fn num_facilities(&self) -> usize {
        self.m
    }

    pub fn num_clients(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn facility_cost(&self, i: usize) -> T {
        self.facility_costs[i]
    }

    pub fn facility_costs(&self) -> &[T] {
        &self.facility_costs
    }

    /// Connection cost between facility `i` and client `j`.
    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> T {
        self.connection_costs[i * self.n + j]
    }

    /// Costs from facility `i` to every client.
    pub fn row(&self, i: usize) -> &[T] {
        &self.connection_costs[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.m).map(|i| self.row(i).to_vec()).collect()
    }

    /// Same connection costs with every opening cost multiplied by `factor`.
    pub fn with_scaled_facility_costs(&self, factor: T) -> Self {
        Self {
            facility_costs: self.facility_costs.iter().map(|&f| f * factor).collect(),
            connection_costs: self.connection_costs.clone(),
            m: self.m,
            n: self.n,
        }
    }

    /// Converts to another precision.
    pub fn cast<U: Scalar>(&self) -> Instance<U> {
        Instance {
            facility_costs: self.facility_costs.iter().map(|f| U::of(f.as_f64())).collect(),
            connection_costs: self.connection_costs.iter().map(|c| U::of(c.as_f64())).collect(),
            m: self.m,
            n: self.n,
        }
    }

    /// Facility indices ordered by cost to client `j`, ties by index.
    pub fn facilities_by_distance(&self, j: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by(|&a, &b| {
            self.cost(a, j)
                .partial_cmp(&self.cost(b, j))
                .expect("finite costs")
                .then(a.cmp(&b))
        });
        order
    }
}

/// Checks `c_ij <= c_ij' + c_i'j' + c_i'j` for all facility pairs `i, i'` and
/// client pairs `j, j'`, with a relative slack of `1e-9`.
///
/// For fixed `(i, i')` the tightest right-hand side over `j'` is the same for
/// every `j`, so the quadruple check runs in `O(m^2 n)`.
pub fn is_metric<T: Scalar>(instance: &Instance<T>) -> bool {
    let slack = T::tol(1e-9);
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    for i in 0..m {
        for ip in 0..m {
            let bridge = (0..n)
                .map(|jp| instance.cost(i, jp) + instance.cost(ip, jp))
                .fold(T::infinity(), T::min);
            for j in 0..n {
                let rhs = bridge + instance.cost(ip, j);
                if instance.cost(i, j) > rhs + slack * rhs.max(T::one()) {
                    return false;
                }
            }
        }
    }
    true
}

/// An integral solution: open facilities plus a client assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSolution<T> {
    /// Sorted, duplicate-free facility indices.
    pub open_set: Vec<usize>,
    /// `assignment[j]` is the facility serving client `j`.
    pub assignment: Vec<usize>,
    pub facility_cost: T,
    pub connection_cost: T,
}

impl<T: Scalar> IntegralSolution<T> {
    /// Builds a solution from an explicit assignment, computing its costs.
    pub fn from_assignment(
        instance: &Instance<T>,
        open_set: &[usize],
        assignment: Vec<usize>,
    ) -> Result<Self> {
        let open = normalize_open_set(instance, open_set)?;
        if assignment.len() != instance.num_clients() {
            return Err(Error::DimensionMismatch(format!(
                "assignment covers {} clients, instance has {}",
                assignment.len(),
                instance.num_clients()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|i| open.binary_search(i).is_err()) {
            return Err(Error::InfeasibleInput(format!(
                "client assigned to facility {bad}, which is not open"
            )));
        }
        let facility_cost = open.iter().map(|&i| instance.facility_cost(i)).sum();
        let connection_cost = assignment
            .iter()
            .enumerate()
            .map(|(j, &i)| instance.cost(i, j))
            .sum();
        Ok(Self { open_set: open, assignment, facility_cost, connection_cost })
    }

    pub fn total(&self) -> T {
        self.facility_cost + self.connection_cost
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.open_set.binary_search(&i).is_ok()
    }
}

fn normalize_open_set<T: Scalar>(instance: &Instance<T>, open_set: &[usize]) -> Result<Vec<usize>> {
    if open_set.is_empty() {
        return Err(Error::EmptyOpenSet);
    }
    let m = instance.num_facilities();
    if let Some(&index) = open_set.iter().find(|&&i| i >= m) {
        return Err(Error::FacilityOutOfRange { index, m });
    }
    let mut open = open_set.to_vec();
    open.sort_unstable();
    open.dedup();
    Ok(open)
}

/// Opens `open_set` and connects each client to its cheapest open facility
/// (lowest index on ties).
pub fn nearest_assignment<T: Scalar>(
    instance: &Instance<T>,
    open_set: &[usize],
) -> Result<IntegralSolution<T>> {
    let open = normalize_open_set(instance, open_set)?;
    let assignment = (0..instance.num_clients())
        .map(|j| {
            let mut best = open[0];
            for &i in &open[1..] {
                if instance.cost(i, j) < instance.cost(best, j) {
                    best = i;
                }
            }
            best
        })
        .collect();
    IntegralSolution::from_assignment(instance, &open, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Instance<f64> {
        // facilities at 0,1,2 on a line, clients at 0.25,0.75,1.25,1.75
        let fpos = [0.0, 1.0, 2.0];
        let cpos = [0.25, 0.75, 1.25, 1.75];
        let rows = fpos
            .iter()
            .map(|p: &f64| cpos.iter().map(|q: &f64| (p - q).abs()).collect())
            .collect();
        Instance::new(vec![1.0, 3.0, 1.0], rows).unwrap()
    }

    #[test]
    fn validate_accepts_minimal_instance() {
        assert!(Instance::new(vec![2.0], vec![vec![3.0]]).is_ok());
    }

    #[test]
    fn validate_rejects_negative_and_empty() {
        assert!(matches!(
            Instance::new(vec![-1.0], vec![vec![0.0]]),
            Err(Error::NegativeCost { .. })
        ));
        assert!(matches!(
            Instance::<f64>::new(vec![], vec![]),
            Err(Error::EmptyDimension { .. })
        ));
        assert!(matches!(
            Instance::new(vec![1.0], vec![vec![f64::NAN]]),
            Err(Error::NonFiniteEntry { .. })
        ));
        assert!(matches!(
            Instance::new(vec![1.0, 2.0], vec![vec![1.0]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn metric_checks() {
        assert!(is_metric(&tiny()));
        let bad = Instance::new(vec![1.0, 1.0], vec![vec![10.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(!is_metric(&bad));
        let single = Instance::new(vec![1.0], vec![vec![5.0, 0.0, 100.0]]).unwrap();
        assert!(is_metric(&single));
    }

    #[test]
    fn nearest_assignment_single_facility() {
        let inst = tiny();
        let sol = nearest_assignment(&inst, &[0]).unwrap();
        assert_eq!(sol.assignment, vec![0; 4]);
        assert_eq!(sol.connection_cost, inst.row(0).iter().sum::<f64>());
    }

    #[test]
    fn nearest_assignment_tiny_optimum_set() {
        let sol = nearest_assignment(&tiny(), &[0, 2]).unwrap();
        assert_eq!(sol.assignment, vec![0, 0, 2, 2]);
        assert_eq!(sol.total(), 4.0);
    }

    #[test]
    fn nearest_assignment_rejects_bad_sets() {
        assert_eq!(nearest_assignment(&tiny(), &[]), Err(Error::EmptyOpenSet));
        assert!(matches!(
            nearest_assignment(&tiny(), &[7]),
            Err(Error::FacilityOutOfRange { index: 7, .. })
        ));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let inst = Instance::new(vec![0.0, 0.0], vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(nearest_assignment(&inst, &[1, 0]).unwrap().assignment, vec![0]);
    }

    #[test]
    fn works_in_single_precision() {
        let inst: Instance<f32> = tiny().cast();
        assert!(is_metric(&inst));
        assert_eq!(nearest_assignment(&inst, &[0, 2]).unwrap().total(), 4.0f32);
    }
}
