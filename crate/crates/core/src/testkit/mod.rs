//! Independent oracles and generators for testing.
//!
//! Nothing here reuses the degree distributions, peeling, reachability or
//! component code of the main modules; the oracles enumerate worlds and
//! subsets directly so that agreement with the fast paths means something.

pub mod verify;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Geometric};

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, SocialNetwork, VertexId, WeightedEdge};
use crate::uncertain_core::{meets_eta, CoreSet};

/// Limits applied before any exponential enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumGuard {
    pub max_edges: usize,
    pub max_vertices: usize,
}

impl Default for EnumGuard {
    fn default() -> Self {
        EnumGuard {
            max_edges: 20,
            max_vertices: 12,
        }
    }
}

impl EnumGuard {
    fn edges(&self, found: usize) -> Result<()> {
        if found > self.max_edges {
            return Err(Error::GuardExceeded {
                what: "edge count",
                found,
                limit: self.max_edges,
            });
        }
        Ok(())
    }

    fn vertices(&self, found: usize) -> Result<()> {
        if found > self.max_vertices {
            return Err(Error::GuardExceeded {
                what: "vertex count",
                found,
                limit: self.max_vertices,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    In,
    Out,
}

fn incident(graph: &InteractionGraph, v: VertexId, side: Side) -> Vec<(VertexId, f64)> {
    let (ids, ps) = match side {
        Side::In => graph.in_edges(v),
        Side::Out => graph.out_edges(v),
    };
    ids.iter().copied().zip(ps.iter().copied()).collect()
}

/// `Pr[degree >= k]` by summing over every subset of the incident edges.
pub fn enum_degree_prob(
    graph: &InteractionGraph,
    v: VertexId,
    k: usize,
    side: Side,
    guard: &EnumGuard,
) -> Result<f64> {
    let probs: Vec<f64> = incident(graph, v, side).into_iter().map(|e| e.1).collect();
    guard.edges(probs.len())?;
    Ok(enum_at_least(&probs, k))
}

fn enum_at_least(probs: &[f64], k: usize) -> f64 {
    let mut total = 0.0;
    for world in 0u32..(1u32 << probs.len()) {
        if (world.count_ones() as usize) < k {
            continue;
        }
        let mut pr = 1.0;
        for (i, p) in probs.iter().enumerate() {
            pr *= if world >> i & 1 == 1 { *p } else { 1.0 - p };
        }
        total += pr;
    }
    total
}

/// Full (untruncated) degree distribution by direct convolution.
fn at_least(probs: &[f64], k: usize) -> f64 {
    let mut dist = vec![1.0];
    for &p in probs {
        let mut next = vec![0.0; dist.len() + 1];
        for (i, d) in dist.iter().enumerate() {
            next[i] += d * (1.0 - p);
            next[i + 1] += d * p;
        }
        dist = next;
    }
    dist.iter().skip(k).sum()
}

/// Every member of `mask` (bits over `verts`) meets the constraint within
/// the subgraph induced by `mask`.
fn cohesive(
    graph: &InteractionGraph,
    verts: &[VertexId],
    mask: u32,
    k: usize,
    l: usize,
    eta: f64,
) -> bool {
    let inside = |x: VertexId| {
        verts
            .binary_search(&x)
            .map(|i| mask >> i & 1 == 1)
            .unwrap_or(false)
    };
    for (i, &v) in verts.iter().enumerate() {
        if mask >> i & 1 == 0 {
            continue;
        }
        let ins: Vec<f64> = incident(graph, v, Side::In)
            .into_iter()
            .filter(|e| inside(e.0))
            .map(|e| e.1)
            .collect();
        let outs: Vec<f64> = incident(graph, v, Side::Out)
            .into_iter()
            .filter(|e| inside(e.0))
            .map(|e| e.1)
            .collect();
        if ins.len() < k || outs.len() < l {
            return false;
        }
        if !meets_eta(at_least(&ins, k) * at_least(&outs, l), eta) {
            return false;
        }
    }
    true
}

/// Weakly connected parts of `mask`, each as a bitmask.
fn mask_components(graph: &InteractionGraph, verts: &[VertexId], mask: u32) -> Vec<u32> {
    let nv = verts.len();
    let mut adj = vec![0u32; nv];
    for (i, &v) in verts.iter().enumerate() {
        for (w, _) in incident(graph, v, Side::Out) {
            if let Ok(j) = verts.binary_search(&w) {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    let mut left = mask;
    let mut parts = Vec::new();
    while left != 0 {
        let start = left.trailing_zeros();
        let mut comp = 1u32 << start;
        let mut frontier = comp;
        while frontier != 0 {
            let x = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adj[x] & mask & !comp;
            comp |= fresh;
            frontier |= fresh;
        }
        parts.push(comp);
        left &= !comp;
    }
    parts
}

fn unmask(verts: &[VertexId], mask: u32) -> Vec<VertexId> {
    (0..verts.len())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| verts[i])
        .collect()
}

fn vertex_list(graph: &InteractionGraph, guard: &EnumGuard) -> Result<Vec<VertexId>> {
    let verts: Vec<VertexId> = graph.vertices().collect();
    guard.vertices(verts.len())?;
    Ok(verts)
}

/// Maximal cohesive vertex sets by subset enumeration, split into weakly
/// connected components (sorted, ordered by smallest id).
pub fn brute_force_cores(
    graph: &InteractionGraph,
    k: usize,
    l: usize,
    eta: f64,
    guard: &EnumGuard,
) -> Result<CoreSet> {
    let verts = vertex_list(graph, guard)?;
    let full = if verts.is_empty() { 0 } else { (1u32 << verts.len()) - 1 };
    let mut valid: Vec<u32> = (1..=full)
        .filter(|&m| cohesive(graph, &verts, m, k, l, eta))
        .collect();
    valid.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
    let mut maximal: Vec<u32> = Vec::new();
    for m in valid {
        if !maximal.iter().any(|&big| m & big == m) {
            maximal.push(m);
        }
    }
    let mut cores: Vec<Vec<VertexId>> = maximal
        .into_iter()
        .flat_map(|m| mask_components(graph, &verts, m))
        .map(|c| unmask(&verts, c))
        .collect();
    cores.sort();
    cores.dedup();
    Ok(CoreSet { cores })
}

/// Exact influence of every vertex id, by its own world enumeration.
pub fn enum_influence(graph: &InteractionGraph, alpha: f64, guard: &EnumGuard) -> Result<Vec<f64>> {
    let edges: Vec<(VertexId, VertexId, f64)> = graph.edges().collect();
    guard.edges(edges.len())?;
    let n = graph.n();
    let mut scores = vec![0.0; n];
    let mut live = vec![Vec::new(); n];
    for world in 0u32..(1u32 << edges.len()) {
        let mut pr = 1.0;
        for l in &mut live {
            l.clear();
        }
        for (i, &(u, v, p)) in edges.iter().enumerate() {
            let pp = alpha * p;
            if world >> i & 1 == 1 {
                pr *= pp;
                live[u as usize].push(v);
            } else {
                pr *= 1.0 - pp;
            }
        }
        if pr == 0.0 {
            continue;
        }
        for (s, score) in scores.iter_mut().enumerate() {
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut todo = vec![s as VertexId];
            let mut count = 0usize;
            while let Some(x) = todo.pop() {
                count += 1;
                for &y in &live[x as usize] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        todo.push(y);
                    }
                }
            }
            *score += pr * count as f64;
        }
    }
    Ok(scores)
}

/// Optimal influential communities found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct TamicsOptimum {
    /// Best achievable community influence.
    pub influence: f64,
    /// Every community attaining it that no connected cohesive superset
    /// matches or beats; each sorted.
    pub communities: Vec<Vec<VertexId>>,
    /// Exact scores used, indexed by vertex id.
    pub scores: Vec<f64>,
}

/// Best `(k, l, eta)`-influential community by exhaustive search, scored
/// by exact influence; `None` when no connected cohesive set exists.
pub fn brute_force_tamics(
    graph: &InteractionGraph,
    k: usize,
    l: usize,
    eta: f64,
    alpha: f64,
    guard: &EnumGuard,
) -> Result<Option<TamicsOptimum>> {
    let scores = enum_influence(graph, alpha, guard)?;
    brute_force_tamics_scored(graph, k, l, eta, scores, guard)
}

/// As [`brute_force_tamics`] with caller-supplied scores (indexed by id).
pub fn brute_force_tamics_scored(
    graph: &InteractionGraph,
    k: usize,
    l: usize,
    eta: f64,
    scores: Vec<f64>,
    guard: &EnumGuard,
) -> Result<Option<TamicsOptimum>> {
    let verts = vertex_list(graph, guard)?;
    let full = if verts.is_empty() { 0 } else { (1u32 << verts.len()) - 1 };
    let score_of = |m: u32| {
        unmask(&verts, m)
            .into_iter()
            .map(|v| scores[v as usize])
            .fold(f64::INFINITY, f64::min)
    };
    let candidates: Vec<(u32, f64)> = (1..=full)
        .filter(|&m| mask_components(graph, &verts, m).len() == 1)
        .filter(|&m| cohesive(graph, &verts, m, k, l, eta))
        .map(|m| (m, score_of(m)))
        .collect();
    let Some(best) = candidates.iter().map(|c| c.1).max_by(f64::total_cmp) else {
        return Ok(None);
    };
    let mut communities: Vec<Vec<VertexId>> = candidates
        .iter()
        .filter(|(m, s)| {
            *s == best
                && !candidates
                    .iter()
                    .any(|(big, bs)| big != m && big & m == *m && *bs >= *s)
        })
        .map(|(m, _)| unmask(&verts, *m))
        .collect();
    communities.sort();
    Ok(Some(TamicsOptimum {
        influence: best,
        communities,
        scores,
    }))
}

/// Directed Erdős–Rényi network: each ordered pair `(u, v)`, `u != v`, is an
/// edge with probability `avg_degree / (n - 1)`. Weights are a Dirichlet(1)
/// draw scaled by a uniform magnitude in `[0, 1)`.
pub fn gen_synthetic(n: usize, avg_degree: f64, z: usize, seed: u64) -> Result<SocialNetwork> {
    if n < 2 {
        return Err(Error::invalid("n must be at least 2"));
    }
    if z == 0 {
        return Err(Error::invalid("z must be at least 1"));
    }
    if !(avg_degree >= 0.0) || avg_degree > (n - 1) as f64 {
        return Err(Error::invalid(format!(
            "infeasible density: average out-degree {avg_degree} with {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = n as u64 * (n as u64 - 1);
    let p = avg_degree / (n - 1) as f64;
    let mut edges = Vec::new();
    if p > 0.0 {
        let skip = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
        let mut i = skip.sample(&mut rng);
        while i < pairs {
            let u = i / (n as u64 - 1);
            let r = i % (n as u64 - 1);
            let v = if r >= u { r + 1 } else { r };
            edges.push(WeightedEdge {
                src: u as VertexId,
                dst: v as VertexId,
                weights: dirichlet_scaled(&mut rng, z),
            });
            i = i.saturating_add(1).saturating_add(skip.sample(&mut rng));
        }
    }
    SocialNetwork::new(n, z, edges, None)
}

fn dirichlet_scaled<R: RngCore>(rng: &mut R, z: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..z).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    let magnitude: f64 = rng.random();
    draws
        .into_iter()
        .map(|x| if total > 0.0 { magnitude * x / total } else { magnitude / z as f64 })
        .collect()
}

/// A Dirichlet(1) topic vector over `z` topics.
pub fn random_topic<R: RngCore>(rng: &mut R, z: usize) -> crate::graph::TopicVector {
    loop {
        let draws: Vec<f64> = (0..z).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let mut v: Vec<f64> = draws.iter().map(|x| x / total).collect();
        let residue = 1.0 - v.iter().sum::<f64>();
        v[0] = (v[0] + residue).max(0.0);
        if let Ok(q) = crate::graph::TopicVector::query(v) {
            return q;
        }
    }
}

/// Random uncertain digraph on `n` vertices with at most `max_edges`
/// distinct non-loop edges. Some probabilities are exactly 1, some sit just
/// below 1.
pub fn random_uncertain_graph<R: RngCore>(
    rng: &mut R,
    n: usize,
    max_edges: usize,
) -> InteractionGraph {
    let mut pairs: Vec<(VertexId, VertexId)> = (0..n as VertexId)
        .flat_map(|u| (0..n as VertexId).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let m = rng.random_range(0..=max_edges.min(pairs.len()));
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (u, v) = pairs.swap_remove(rng.random_range(0..pairs.len()));
        let p = match rng.random_range(0..10) {
            0 => 1.0,
            1 => 1.0 - 1e-8,
            _ => rng.random_range(0.05..1.0),
        };
        edges.push((u, v, p));
    }
    InteractionGraph::from_probabilities(n, &edges).expect("generated edges are valid")
}

/// Random network with `n` vertices, up to `max_edges` edges and weights
/// uniform in `[0, 1]` (occasionally exactly 1).
pub fn random_network<R: RngCore>(rng: &mut R, n: usize, max_edges: usize, z: usize) -> SocialNetwork {
    let mut pairs: Vec<(VertexId, VertexId)> = (0..n as VertexId)
        .flat_map(|u| (0..n as VertexId).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let m = rng.random_range(0..=max_edges.min(pairs.len()));
    let edges = (0..m)
        .map(|_| {
            let (src, dst) = pairs.swap_remove(rng.random_range(0..pairs.len()));
            let weights = (0..z)
                .map(|_| if rng.random_range(0..8) == 0 { 1.0 } else { rng.random::<f64>() })
                .collect();
            WeightedEdge { src, dst, weights }
        })
        .collect();
    SocialNetwork::new(n, z, edges, None).expect("generated edges are valid")
}

/// The small two-topic network used throughout the documentation and tests.
///
/// Ids 1 to 6 are the six users; id 0 is an isolated placeholder so that
/// ids match user numbers.
pub fn running_example() -> SocialNetwork {
    SocialNetwork::parse(RUNNING_EXAMPLE, "running-example").expect("fixture parses")
}

pub const RUNNING_EXAMPLE: &str = "\
7 13 2
5 2 1 1
5 4 1 1
4 5 1 1
2 4 0.9 0.7
2 5 0.7 0.9
4 2 0.6 0.6
5 6 1 1
6 2 0.6 0.6
6 5 0.6 0.6
5 1 1 1
1 2 0.5 0.5
1 6 0.3 0.5
5 3 0.8 0.8
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_enumeration_examples() {
        let g = InteractionGraph::from_probabilities(3, &[(0, 2, 0.5), (1, 2, 0.8)]).unwrap();
        let guard = EnumGuard::default();
        assert!((enum_degree_prob(&g, 2, 2, Side::In, &guard).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(enum_degree_prob(&g, 2, 0, Side::In, &guard).unwrap(), 1.0);
        assert_eq!(enum_degree_prob(&g, 2, 1, Side::Out, &guard).unwrap(), 0.0);
    }

    #[test]
    fn guard_is_enforced() {
        let edges: Vec<_> = (1..22).map(|u| (u, 0, 0.5)).collect();
        let g = InteractionGraph::from_probabilities(22, &edges).unwrap();
        let guard = EnumGuard::default();
        assert!(matches!(
            enum_degree_prob(&g, 0, 1, Side::In, &guard),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(brute_force_cores(&g, 1, 1, 0.5, &guard).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        let guard = EnumGuard::default();
        let empty = InteractionGraph::from_probabilities(4, &[]).unwrap();
        assert!(brute_force_cores(&empty, 1, 1, 0.5, &guard).unwrap().is_empty());
        assert_eq!(brute_force_tamics(&empty, 1, 1, 0.5, 1.0, &guard).unwrap(), None);

        let pair = InteractionGraph::from_probabilities(2, &[(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let cores = brute_force_cores(&pair, 1, 1, 0.25, &guard).unwrap();
        assert_eq!(cores.cores, vec![vec![0, 1]]);
        assert!(brute_force_cores(&pair, 1, 1, 0.26, &guard).unwrap().is_empty());
        let best = brute_force_tamics(&pair, 1, 1, 0.25, 1.0, &guard).unwrap().unwrap();
        assert_eq!(best.communities, vec![vec![0, 1]]);
        assert_eq!(best.influence, 1.5);
    }

    #[test]
    fn synthetic_density_and_determinism() {
        let net = gen_synthetic(100, 10.0, 3, 11).unwrap();
        let m = net.edge_count() as f64;
        assert!((m - 1000.0).abs() <= 100.0, "{m}");
        let again = gen_synthetic(100, 10.0, 3, 11).unwrap();
        assert_eq!(net.to_canonical_string(), again.to_canonical_string());
        let single = gen_synthetic(50, 4.0, 1, 2).unwrap();
        assert!(single.edges().all(|(_, _, w)| w.len() == 1));
        assert!(gen_synthetic(1, 0.0, 2, 0).is_err());
        assert!(gen_synthetic(10, 10.0, 2, 0).is_err());
        assert_eq!(gen_synthetic(5, 4.0, 1, 0).unwrap().edge_count(), 20);
    }

    #[test]
    fn running_example_shape() {
        let net = running_example();
        assert_eq!((net.vertex_count(), net.edge_count(), net.topic_count()), (7, 13, 2));
    }
}
