//! Random instance generators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rounding::trial_rng;
use crate::scalar::Scalar;

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        Err(Error::EmptyDimension { m, n })
    } else {
        Ok(())
    }
}

fn draw<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Facilities and clients uniform in the unit square, Euclidean connection
/// costs, opening costs uniform in `cost_range`.
pub fn gen_euclidean<T: Scalar>(m: usize, n: usize, cost_range: (f64, f64), seed: u64) -> Result<Instance<T>> {
    check_dims(m, n)?;
    let (lo, hi) = cost_range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
        return Err(Error::InvalidParameter(format!("cost range [{lo}, {hi}]")));
    }
    let mut rng = trial_rng(seed, 0);
    let mut point = || (rng.gen::<f64>(), rng.gen::<f64>());
    let facilities: Vec<_> = (0..m).map(|_| point()).collect();
    let clients: Vec<_> = (0..n).map(|_| point()).collect();
    let mut rng = trial_rng(seed, 1);
    let f = (0..m).map(|_| T::of(draw(&mut rng, cost_range))).collect();
    let c = facilities
        .iter()
        .map(|&(fx, fy)| clients.iter().map(|&(cx, cy)| T::of((fx - cx).hypot(fy - cy))).collect())
        .collect();
    Instance::new(f, c)
}

/// Locally regular instances: `min(m, n)` far-apart groups, each with its
/// facilities on a ring of radius `R_g` and its clients at the ring center,
/// so every facility of a client's own group sits at exactly `R_g`.
pub fn gen_regular<T: Scalar>(m: usize, n: usize, seed: u64) -> Result<Instance<T>> {
    check_dims(m, n)?;
    let groups = m.min(n);
    let mut rng = trial_rng(seed, 0);
    let radius: Vec<f64> = (0..groups).map(|_| rng.gen_range(1.0..2.0)).collect();
    let f: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..4.0)).collect();
    // Crossing groups always costs more than opening all of a group.
    let spacing = 10.0 * (2.0 + f.iter().sum::<f64>());
    let group_of_facility = |i: usize| i % groups;
    let group_of_client = |j: usize| j % groups;
    let ring_size = |g: usize| (m - g).div_ceil(groups);
    let position = |i: usize| {
        let g = group_of_facility(i);
        let angle = std::f64::consts::TAU * (i / groups) as f64 / ring_size(g) as f64;
        (g as f64 * spacing + radius[g] * angle.cos(), radius[g] * angle.sin())
    };
    let c = (0..m)
        .map(|i| {
            let (px, py) = position(i);
            (0..n)
                .map(|j| {
                    let g = group_of_client(j);
                    let d = if g == group_of_facility(i) {
                        radius[g]
                    } else {
                        (px - g as f64 * spacing).hypot(py)
                    };
                    T::of(d)
                })
                .collect()
        })
        .collect();
    Instance::new(f.into_iter().map(T::of).collect(), c)
}

/// Two-level metric instances: each client sits at distance 1 from `degree`
/// random facilities and at distance 3 from the rest; opening costs are
/// uniform in `cost_range`. Their LP optima are frequently fractional.
pub fn gen_two_level<T: Scalar>(
    m: usize,
    n: usize,
    degree: usize,
    cost_range: (f64, f64),
    seed: u64,
) -> Result<Instance<T>> {
    check_dims(m, n)?;
    if degree == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let mut c = vec![vec![T::of(3.0); n]; m];
    for j in 0..n {
        for i in rand::seq::index::sample(&mut rng, m, degree.min(m)) {
            c[i][j] = T::one();
        }
    }
    let f = (0..m).map(|_| T::of(draw(&mut rng, cost_range))).collect();
    Instance::new(f, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::is_metric;

    #[test]
    fn euclidean_is_metric_and_seeded() {
        for seed in 0..20 {
            let a: Instance<f64> = gen_euclidean(6, 9, (0.5, 2.0), seed).unwrap();
            assert!(is_metric(&a));
            assert_eq!(a, gen_euclidean(6, 9, (0.5, 2.0), seed).unwrap());
            assert!(a.facility_costs().iter().all(|&f| (0.5..2.0).contains(&f)));
        }
        assert!(gen_euclidean::<f64>(0, 3, (1.0, 1.0), 0).is_err());
        assert!(gen_euclidean::<f64>(2, 3, (2.0, 1.0), 0).is_err());
    }

    #[test]
    fn two_level_is_metric_with_fixed_degree() {
        let inst: Instance<f64> = gen_two_level(6, 10, 2, (1.0, 3.0), 4).unwrap();
        assert!(is_metric(&inst));
        for j in 0..10 {
            assert_eq!((0..6).filter(|&i| inst.cost(i, j) == 1.0).count(), 2);
        }
        assert!(gen_two_level::<f64>(3, 3, 0, (1.0, 1.0), 0).is_err());
    }

    #[test]
    fn regular_groups_are_equidistant() {
        let inst: Instance<f64> = gen_regular(7, 5, 3).unwrap();
        assert!(is_metric(&inst));
        for j in 0..5 {
            let own: Vec<f64> = (0..7).filter(|i| i % 5 == j % 5).map(|i| inst.cost(i, j)).collect();
            assert!(!own.is_empty());
            assert!(own.iter().all(|&d| d == own[0]));
        }
    }
}
