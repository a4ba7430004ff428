//! Clusterings of the client support graph.

use std::collections::HashMap;

use num_traits::{FromPrimitive, Num};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparsen::SparsenedSolution;

/// Largest client count accepted by [`exact_center_probabilities`].
pub const EXACT_PROBABILITY_LIMIT: usize = 12;

/// Client graph: `j ~ j'` when the two clients share a close copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SupportGraph {
    /// Builds a graph from undirected edges; self-loops and duplicates are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self { adjacency }
    }

    pub fn from_sparsened<T: Scalar>(sparsened: &SparsenedSolution<T>) -> Self {
        let n = sparsened.num_clients();
        let mut users: HashMap<usize, Vec<usize>> = HashMap::new();
        for j in 0..n {
            for &k in sparsened.close_set(j) {
                users.entry(k).or_default().push(j);
            }
        }
        let mut edges = Vec::new();
        for clients in users.values() {
            for (p, &a) in clients.iter().enumerate() {
                edges.extend(clients[p + 1..].iter().map(|&b| (a, b)));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn num_clients(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adjacency[j]
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

/// Partition of the clients into clusters, each led by a center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Centers in the order they were chosen.
    pub centers: Vec<usize>,
    /// `center_of[j]` is `g(j)`; centers map to themselves.
    pub center_of: Vec<usize>,
}

impl Clustering {
    pub fn is_center(&self, j: usize) -> bool {
        self.center_of[j] == j
    }

    /// Checks that centers are pairwise non-adjacent and every client is a
    /// center or adjacent to its center.
    pub fn check(&self, graph: &SupportGraph) -> Result<()> {
        let fail = |msg: String| Err(Error::InfeasibleInput(msg));
        if self.center_of.len() != graph.num_clients() {
            return fail("clustering does not cover every client".into());
        }
        for (p, &a) in self.centers.iter().enumerate() {
            if self.center_of[a] != a {
                return fail(format!("center {a} is not its own center"));
            }
            if let Some(&b) = self.centers[p + 1..].iter().find(|&&b| graph.are_neighbors(a, b)) {
                return fail(format!("centers {a} and {b} are neighbors"));
            }
        }
        for (j, &c) in self.center_of.iter().enumerate() {
            if !self.centers.contains(&c) {
                return fail(format!("client {j} points at non-center {c}"));
            }
            if c != j && !graph.are_neighbors(j, c) {
                return fail(format!("client {j} is not adjacent to its center {c}"));
            }
        }
        Ok(())
    }
}

/// Repeatedly takes the cheapest unclustered client by `key` (lowest index on
/// ties) as a center and absorbs its unclustered neighbors.
pub fn greedy_clustering_by_key<T: Scalar>(graph: &SupportGraph, key: &[T]) -> Clustering {
    let n = graph.num_clients();
    assert_eq!(key.len(), n, "one key per client");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key[a].partial_cmp(&key[b]).expect("finite keys").then(a.cmp(&b)));
    let mut center_of = vec![usize::MAX; n];
    let mut centers = Vec::new();
    for c in order {
        if center_of[c] != usize::MAX {
            continue;
        }
        centers.push(c);
        center_of[c] = c;
        for &j in graph.neighbors(c) {
            if center_of[j] == usize::MAX {
                center_of[j] = c;
            }
        }
    }
    Clustering { centers, center_of }
}

/// Greedy clustering minimizing `D_av^C(j) + D_max^C(j)` over unclustered clients.
pub fn greedy_clustering<T: Scalar>(sparsened: &SparsenedSolution<T>) -> Clustering {
    let graph = SupportGraph::from_sparsened(sparsened);
    let key: Vec<T> = sparsened.stats.iter().map(|s| s.avg_close + s.max_close).collect();
    greedy_clustering_by_key(&graph, &key)
}

/// Picks each new center uniformly among the unclustered clients.
pub fn random_clustering(graph: &SupportGraph, seed: u64) -> Clustering {
    random_clustering_with(graph, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_clustering_with<R: Rng>(graph: &SupportGraph, rng: &mut R) -> Clustering {
    let n = graph.num_clients();
    let mut center_of = vec![usize::MAX; n];
    let mut unclustered: Vec<usize> = (0..n).collect();
    let mut centers = Vec::new();
    while !unclustered.is_empty() {
        let c = unclustered[rng.gen_range(0..unclustered.len())];
        centers.push(c);
        center_of[c] = c;
        for &j in graph.neighbors(c) {
            if center_of[j] == usize::MAX {
                center_of[j] = c;
            }
        }
        unclustered.retain(|&j| center_of[j] == usize::MAX);
    }
    Clustering { centers, center_of }
}

/// Exact `P[j][j'] = Pr[g(j) = j']` under [`random_clustering`], by recursion
/// over every center choice with memoization on the unclustered set.
///
/// Generic over the number type so the same recursion runs in floating point
/// or over exact rationals.
pub fn exact_center_probabilities<R>(graph: &SupportGraph) -> Result<Vec<Vec<R>>>
where
    R: Clone + Num + FromPrimitive,
{
    let n = graph.num_clients();
    if n > EXACT_PROBABILITY_LIMIT {
        return Err(Error::TooLarge {
            what: "support graph",
            size: n,
            limit: EXACT_PROBABILITY_LIMIT,
        });
    }
    let closed: Vec<u32> = (0..n)
        .map(|j| graph.neighbors(j).iter().fold(1u32 << j, |acc, &b| acc | (1 << b)))
        .collect();
    let mut memo: HashMap<u32, Vec<R>> = HashMap::new();
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let flat = center_distribution(full, n, &closed, &mut memo);
    Ok(flat.chunks(n.max(1)).take(n).map(<[R]>::to_vec).collect())
}

fn center_distribution<R>(mask: u32, n: usize, closed: &[u32], memo: &mut HashMap<u32, Vec<R>>) -> Vec<R>
where
    R: Clone + Num + FromPrimitive,
{
    if let Some(hit) = memo.get(&mask) {
        return hit.clone();
    }
    let mut out = vec![R::zero(); n * n];
    let size = mask.count_ones() as usize;
    if size > 0 {
        let weight = R::one() / R::from_usize(size).expect("small count");
        for c in (0..n).filter(|&c| mask & (1 << c) != 0) {
            let cluster = closed[c] & mask;
            for j in (0..n).filter(|&j| cluster & (1 << j) != 0) {
                out[j * n + c] = out[j * n + c].clone() + weight.clone();
            }
            let rest = mask & !cluster;
            if rest != 0 {
                let sub = center_distribution(rest, n, closed, memo);
                for j in (0..n).filter(|&j| rest & (1 << j) != 0) {
                    for jp in 0..n {
                        let p = &sub[j * n + jp];
                        if !p.is_zero() {
                            out[j * n + jp] = out[j * n + jp].clone() + weight.clone() * p.clone();
                        }
                    }
                }
            }
        }
    }
    memo.insert(mask, out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn isolated_clients_are_their_own_centers() {
        let g = SupportGraph::from_edges(3, &[]);
        let c = greedy_clustering_by_key(&g, &[3.0, 1.0, 2.0]);
        assert_eq!(c.centers, vec![1, 2, 0]);
        assert_eq!(c.center_of, vec![0, 1, 2]);
        c.check(&g).unwrap();
    }

    #[test]
    fn cheaper_neighbor_becomes_center() {
        let g = SupportGraph::from_edges(2, &[(0, 1)]);
        let c = greedy_clustering_by_key(&g, &[2.0 + 3.0, 4.0 + 5.0]);
        assert_eq!(c.centers, vec![0]);
        assert_eq!(c.center_of, vec![0, 0]);
    }

    #[test]
    fn greedy_ties_break_by_index() {
        let g = SupportGraph::from_edges(2, &[(0, 1)]);
        let c = greedy_clustering_by_key(&g, &[1.0, 1.0]);
        assert_eq!(c.centers, vec![0]);
    }

    #[test]
    fn random_clustering_single_client() {
        let g = SupportGraph::from_edges(1, &[]);
        assert_eq!(random_clustering(&g, 7).centers, vec![0]);
    }

    #[test]
    fn random_clustering_is_seed_deterministic_and_valid() {
        let g = SupportGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
        for seed in 0..1000 {
            let a = random_clustering(&g, seed);
            a.check(&g).unwrap();
            assert_eq!(a, random_clustering(&g, seed));
        }
    }

    #[test]
    fn two_neighbors_are_symmetric_halves() {
        let g = SupportGraph::from_edges(2, &[(0, 1)]);
        let p: Vec<Vec<BigRational>> = exact_center_probabilities(&g).unwrap();
        assert_eq!(p[0][1], rational(1, 2));
        assert_eq!(p[1][0], rational(1, 2));
    }

    #[test]
    fn path_of_three_by_enumeration() {
        // first choice uniform over {0, 1, 2}:
        //   0 -> {0,1} clustered, then 2 alone;  1 -> all join 1;  2 -> {1,2}, then 0 alone
        let g = SupportGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let p: Vec<Vec<BigRational>> = exact_center_probabilities(&g).unwrap();
        let third = rational(1, 3);
        assert_eq!(p[0][1], third);
        assert_eq!(p[1][0], third);
        assert_eq!(p[1][2], third);
        assert_eq!(p[2][1], third);
        assert_eq!(p[0][0], rational(2, 3));
        assert_eq!(p[1][1], third);
    }

    #[test]
    fn isolated_client_probability_one() {
        let g = SupportGraph::from_edges(1, &[]);
        let p: Vec<Vec<f64>> = exact_center_probabilities(&g).unwrap();
        assert_eq!(p[0][0], 1.0);
    }

    #[test]
    fn exact_probabilities_reject_large_graphs() {
        let g = SupportGraph::from_edges(13, &[]);
        assert!(matches!(
            exact_center_probabilities::<f64>(&g),
            Err(Error::TooLarge { size: 13, .. })
        ));
    }
}
