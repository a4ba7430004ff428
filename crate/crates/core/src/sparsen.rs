//! Sparsening of an optimal fractional solution.
//!
//! The optimal `(x*, y*)` is first made complete by splitting each facility
//! at the distinct levels `x*_ij` so that every client uses a prefix of the
//! copies in full. Openings are then scaled by `gamma`, each client is
//! re-served greedily by its nearest supporting copies up to one unit, and
//! copies are split once more at the partial levels. The result is a
//! complete solution `(x_bar, y_bar)` in which every client `j` sees a set
//! of close copies (total opening 1) and distant copies (total opening
//! `gamma - 1`).

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{ClientShares, FractionalSolution, Relaxation};
use crate::scalar::Scalar;

/// A copy of an input facility carrying part of its scaled opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFacility<T> {
    pub original_index: usize,
    pub opening: T,
}

/// Scaled and greedily reassigned solution `(x_tilde, y_tilde)` over the
/// copies that make `x*` complete.
#[derive(Debug, Clone)]
pub struct Reassigned<T> {
    gamma: T,
    facilities: Vec<SplitFacility<T>>,
    /// Per client, `(copy, amount)` in service order.
    served: Vec<Vec<(usize, T)>>,
    /// Per client, copies that serve it in `x*`, sorted.
    support: Vec<Vec<usize>>,
}

impl<T: Scalar> Reassigned<T> {
    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn facilities(&self) -> &[SplitFacility<T>] {
        &self.facilities
    }

    /// `x_tilde` aggregated over all copies of input facility `i`.
    pub fn x_tilde(&self, i: usize, j: usize) -> T {
        self.served[j]
            .iter()
            .filter(|(k, _)| self.facilities[*k].original_index == i)
            .map(|&(_, a)| a)
            .sum()
    }

    /// `y_tilde` aggregated over all copies of input facility `i`.
    pub fn y_tilde(&self, i: usize) -> T {
        self.facilities
            .iter()
            .filter(|f| f.original_index == i)
            .map(|f| f.opening)
            .sum()
    }
}

/// Distance statistics of one client in the sparsened solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientStats<T> {
    /// `D_av^C(j)`: opening-weighted mean distance to close copies.
    pub avg_close: T,
    /// `D_av^D(j)`: opening-weighted mean distance to distant copies.
    pub avg_distant: T,
    /// `D_max^C(j)`: largest distance to a close copy.
    pub max_close: T,
    /// Irregularity `r_gamma(j)` in `[0, 1]`.
    pub r_gamma: T,
    /// `r_gamma(j) * (gamma - 1)`.
    pub r_gamma_prime: T,
}

/// Complete solution `(x_bar, y_bar)` with close and distant sets.
#[derive(Debug, Clone)]
pub struct SparsenedSolution<T> {
    pub gamma: T,
    pub facilities: Vec<SplitFacility<T>>,
    close: Vec<Vec<usize>>,
    distant: Vec<Vec<usize>>,
    pub stats: Vec<ClientStats<T>>,
    /// `C*_j` carried over from the LP shares.
    pub connection_share: Vec<T>,
    /// `F*_j` carried over from the LP shares.
    pub facility_share: Vec<T>,
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if gamma > T::one() && gamma < T::of(2.0) {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma.as_f64()))
    }
}

/// Distinct values of `levels` (ascending), merging values closer than `tol`.
fn distinct_levels<T: Scalar>(mut levels: Vec<T>, tol: T) -> Vec<T> {
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    let mut out: Vec<T> = Vec::with_capacity(levels.len());
    for v in levels {
        match out.last_mut() {
            Some(last) if v - *last <= tol => *last = v,
            _ => out.push(v),
        }
    }
    out
}

/// Index of the first level `>= value - tol`.
fn level_index<T: Scalar>(levels: &[T], value: T, tol: T) -> usize {
    levels.iter().position(|&l| l >= value - tol).unwrap_or(levels.len() - 1)
}

/// Scales openings by `gamma` and reassigns every client greedily to its
/// nearest supporting copies (ties by input index, then copy order).
pub fn scale_and_reassign<T: Scalar>(
    instance: &Instance<T>,
    primal: &FractionalSolution<T>,
    gamma: T,
) -> Result<Reassigned<T>> {
    check_gamma(gamma)?;
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    if primal.num_facilities() != m || primal.num_clients() != n {
        return Err(Error::DimensionMismatch("primal solution does not match instance".into()));
    }
    let tol = T::tol(1e-12);

    let mut facilities = Vec::new();
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..m {
        let y = primal.y(i);
        if y <= T::zero() {
            continue;
        }
        let mut raw: Vec<T> = (0..n)
            .map(|j| primal.x(i, j))
            .filter(|&x| x > T::zero() && x < y - tol)
            .collect();
        raw.push(y);
        let mut levels = distinct_levels(raw, tol);
        *levels.last_mut().expect("nonempty") = y;
        let first = facilities.len();
        let mut prev = T::zero();
        for &level in &levels {
            facilities.push(SplitFacility { original_index: i, opening: gamma * (level - prev) });
            prev = level;
        }
        for (j, sup) in support.iter_mut().enumerate() {
            let x = primal.x(i, j);
            if x > T::zero() {
                let last = level_index(&levels, x, tol);
                sup.extend(first..=first + last);
            }
        }
    }

    let served = (0..n)
        .map(|j| {
            let mut order = support[j].clone();
            order.sort_by(|&a, &b| {
                let (fa, fb) = (facilities[a].original_index, facilities[b].original_index);
                instance
                    .cost(fa, j)
                    .partial_cmp(&instance.cost(fb, j))
                    .expect("finite costs")
                    .then(fa.cmp(&fb))
                    .then(a.cmp(&b))
            });
            let mut remaining = T::one();
            let mut list = Vec::new();
            for k in order {
                let opening = facilities[k].opening;
                if opening >= remaining - tol {
                    list.push((k, remaining));
                    remaining = T::zero();
                    break;
                }
                list.push((k, opening));
                remaining = remaining - opening;
            }
            if remaining > T::zero() {
                return Err(Error::NumericalFailure(format!(
                    "client {j} cannot be fully reassigned (short by {remaining})"
                )));
            }
            Ok(list)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Reassigned { gamma, facilities, served, support })
}

/// Splits copies until no client is served partially, then derives close and
/// distant sets and distance statistics.
pub fn split_to_complete<T: Scalar>(
    instance: &Instance<T>,
    shares: &ClientShares<T>,
    reassigned: &Reassigned<T>,
) -> Result<SparsenedSolution<T>> {
    let n = instance.num_clients();
    if shares.connection.len() != n || reassigned.served.len() != n {
        return Err(Error::DimensionMismatch("shares do not match instance".into()));
    }
    let tol = T::tol(1e-12);
    let copies = reassigned.facilities.len();

    // amount[k] lists (client, served amount) for clients that use copy k
    let mut amount: Vec<Vec<(usize, T)>> = vec![Vec::new(); copies];
    for (j, list) in reassigned.served.iter().enumerate() {
        for &(k, a) in list {
            amount[k].push((j, a));
        }
    }
    let mut supported_by: Vec<Vec<usize>> = vec![Vec::new(); copies];
    for (j, sup) in reassigned.support.iter().enumerate() {
        for &k in sup {
            supported_by[k].push(j);
        }
    }

    let mut facilities = Vec::new();
    let mut close: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut distant: Vec<Vec<usize>> = vec![Vec::new(); n];
    for k in 0..copies {
        let base = reassigned.facilities[k];
        let partial: Vec<T> = amount[k]
            .iter()
            .map(|&(_, a)| a)
            .filter(|&a| a < base.opening - tol)
            .collect();
        let mut levels = distinct_levels(partial, tol);
        levels.push(base.opening);
        let first = facilities.len();
        let mut prev = T::zero();
        for &level in &levels {
            let opening = level - prev;
            if opening > T::zero() {
                facilities.push(SplitFacility { original_index: base.original_index, opening });
                prev = level;
            }
        }
        let end = facilities.len();
        let mut uses = vec![None; n];
        for &(j, a) in &amount[k] {
            let mut upto = first;
            let mut acc = T::zero();
            while upto < end && acc < a - tol {
                acc = acc + facilities[upto].opening;
                upto += 1;
            }
            uses[j] = Some(upto);
        }
        for &j in &supported_by[k] {
            let upto = uses[j].unwrap_or(first);
            close[j].extend(first..upto);
            distant[j].extend(upto..end);
        }
    }

    let gamma = reassigned.gamma;
    let stats = (0..n)
        .map(|j| {
            let weighted = |set: &[usize]| {
                set.iter().fold((T::zero(), T::zero(), T::zero()), |(w, s, mx), &k| {
                    let f = facilities[k];
                    let c = instance.cost(f.original_index, j);
                    (w + f.opening, s + f.opening * c, mx.max(c))
                })
            };
            let (wc, sc, max_close) = weighted(&close[j]);
            let (wd, sd, _) = weighted(&distant[j]);
            if wc <= T::zero() || wd <= T::zero() {
                return Err(Error::NumericalFailure(format!(
                    "client {j} has an empty close or distant set"
                )));
            }
            let avg_close = sc / wc;
            let avg_distant = sd / wd;
            let f_share = shares.facility[j];
            let r_gamma = if f_share <= T::tol(1e-9) {
                T::zero()
            } else {
                ((avg_distant - shares.connection[j]) / f_share).max(T::zero()).min(T::one())
            };
            Ok(ClientStats {
                avg_close,
                avg_distant,
                max_close,
                r_gamma,
                r_gamma_prime: r_gamma * (gamma - T::one()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SparsenedSolution {
        gamma,
        facilities,
        close,
        distant,
        stats,
        connection_share: shares.connection.clone(),
        facility_share: shares.facility.clone(),
    })
}

/// Runs both sparsening steps on a solved relaxation.
pub fn sparsen<T: Scalar>(
    instance: &Instance<T>,
    relaxation: &Relaxation<T>,
    gamma: T,
) -> Result<SparsenedSolution<T>> {
    let reassigned = scale_and_reassign(instance, &relaxation.primal, gamma)?;
    split_to_complete(instance, &relaxation.shares, &reassigned)
}

impl<T: Scalar> SparsenedSolution<T> {
    pub fn num_clients(&self) -> usize {
        self.close.len()
    }

    /// Close copies of client `j`, ascending.
    pub fn close_set(&self, j: usize) -> &[usize] {
        &self.close[j]
    }

    /// Distant copies of client `j`, ascending.
    pub fn distant_set(&self, j: usize) -> &[usize] {
        &self.distant[j]
    }

    /// `x_bar` for copy `k` and client `j`: either `0` or the copy's opening.
    pub fn x_bar(&self, k: usize, j: usize) -> T {
        if self.close[j].binary_search(&k).is_ok() {
            self.facilities[k].opening
        } else {
            T::zero()
        }
    }

    /// Total opening of a set of copies.
    pub fn mass(&self, set: &[usize]) -> T {
        set.iter().map(|&k| self.facilities[k].opening).sum()
    }

    /// Opening-weighted mean distance from client `j` to `set`, or `None`
    /// when the set has no opening mass.
    pub fn average_distance(&self, instance: &Instance<T>, j: usize, set: &[usize]) -> Option<T> {
        let mass = self.mass(set);
        if mass <= T::zero() {
            return None;
        }
        let weighted: T = set
            .iter()
            .map(|&k| {
                let f = self.facilities[k];
                f.opening * instance.cost(f.original_index, j)
            })
            .sum();
        Some(weighted / mass)
    }

    /// Clients sharing at least one close copy.
    pub fn are_neighbors(&self, j: usize, jp: usize) -> bool {
        let (a, b) = (&self.close[j], &self.close[jp]);
        let (mut p, mut q) = (0, 0);
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Sum of copy openings per input facility.
    pub fn merged_openings(&self, m: usize) -> Vec<T> {
        let mut out = vec![T::zero(); m];
        for f in &self.facilities {
            out[f.original_index] = out[f.original_index] + f.opening;
        }
        out
    }

    /// Verifies completeness, set masses and the distance identities.
    pub fn check_invariants(&self, instance: &Instance<T>) -> Result<()> {
        let fail = |msg: String| Err(Error::NumericalFailure(msg));
        let gamma = self.gamma;
        let mass_tol = T::tol(1e-7);
        let stat_tol = T::tol(1e-6);
        for (k, f) in self.facilities.iter().enumerate() {
            if !(f.opening > T::zero()) {
                return fail(format!("copy {k} has nonpositive opening"));
            }
        }
        for j in 0..self.num_clients() {
            let (c, d) = (&self.close[j], &self.distant[j]);
            if c.iter().any(|k| d.binary_search(k).is_ok()) {
                return fail(format!("client {j}: close and distant sets overlap"));
            }
            let close_mass = self.mass(c);
            if (close_mass - T::one()).abs() > mass_tol {
                return fail(format!("client {j}: close mass {close_mass}"));
            }
            let distant_mass = self.mass(d);
            if (distant_mass - (gamma - T::one())).abs() > mass_tol {
                return fail(format!("client {j}: distant mass {distant_mass}"));
            }
            let s = self.stats[j];
            if s.r_gamma < T::zero() || s.r_gamma > T::one() {
                return fail(format!("client {j}: r_gamma {} outside [0, 1]", s.r_gamma));
            }
            let cj = self.connection_share[j];
            let fj = self.facility_share[j];
            let checks = [
                ("avg_close", s.avg_close, cj - s.r_gamma_prime * fj),
                ("avg_distant", s.avg_distant, cj + s.r_gamma * fj),
            ];
            for (name, got, want) in checks {
                if (got - want).abs() > stat_tol {
                    return fail(format!("client {j}: {name} {got} vs identity {want}"));
                }
            }
            if s.max_close > s.avg_distant + T::tol(1e-9) {
                return fail(format!("client {j}: max close distance exceeds distant average"));
            }
            let mut all: Vec<usize> = c.iter().chain(d.iter()).copied().collect();
            all.sort_unstable();
            match self.average_distance(instance, j, &all) {
                Some(avg) if (avg - cj).abs() <= stat_tol => {}
                other => return fail(format!("client {j}: d(j, C u D) = {other:?}, C*_j = {cj}")),
            }
        }
        Ok(())
    }
}

/// Checks the main-lemma bound for neighbors `j`, `jp`:
/// `d(j, C_jp \ (C_j u D_j)) <= D_av^D(j) + D_max^C(jp) + D_av^C(jp)`.
pub fn check_main_lemma<T: Scalar>(
    instance: &Instance<T>,
    sparsened: &SparsenedSolution<T>,
    j: usize,
    jp: usize,
) -> Result<bool> {
    if j != jp && !sparsened.are_neighbors(j, jp) {
        return Err(Error::NotNeighbors(j, jp));
    }
    let covered = |k: &usize| {
        sparsened.close_set(j).binary_search(k).is_ok()
            || sparsened.distant_set(j).binary_search(k).is_ok()
    };
    let rest: Vec<usize> = sparsened.close_set(jp).iter().copied().filter(|k| !covered(k)).collect();
    let Some(dist) = sparsened.average_distance(instance, j, &rest) else {
        return Ok(true);
    };
    let (sj, sjp) = (sparsened.stats[j], sparsened.stats[jp]);
    let bound = sj.avg_distant + sjp.max_close + sjp.avg_close;
    Ok(dist <= bound + T::tol(1e-6))
}
