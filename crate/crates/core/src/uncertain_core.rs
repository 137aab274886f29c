//! Probabilistic degree constraints on uncertain directed graphs.
//!
//! For a vertex `v` with independent incident edges, the in-degree is a
//! Poisson-binomial variable. Only `Pr[d = i]` for `i < k` is needed to get
//! `Pr[d >= k]`, so distributions are stored as truncated prefixes and
//! updated in place when an edge disappears:
//!
//! ```text
//! Pr'[i] = (Pr[i] - p * Pr'[i - 1]) / (1 - p)
//! ```
//!
//! When `1 - p` is tiny that division is ill-conditioned, and the prefix is
//! rebuilt from the remaining edges instead.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, VertexId};

/// Slack allowed when comparing a probability product against `eta`.
///
/// The same product reached through different deletion orders can differ in
/// the last few bits; without slack, vertices sitting exactly on a threshold
/// would flip membership depending on peeling order.
pub const ETA_SLACK: f64 = 1e-12;

/// Below this value of `1 - p` an edge removal rebuilds the prefix.
pub const RECOMPUTE_BELOW: f64 = 1e-6;

/// Whether `product >= eta`, up to [`ETA_SLACK`].
#[inline]
pub fn meets_eta(product: f64, eta: f64) -> bool {
    product >= eta - ETA_SLACK
}

/// Deliberate defects for checking that the verification suite notices.
#[doc(hidden)]
pub mod fault {
    use std::cell::Cell;

    thread_local! {
        static DP_FAULT: Cell<bool> = const { Cell::new(false) };
    }

    /// While on, degree distributions on this thread ignore their first edge.
    pub fn set_dp_fault(on: bool) {
        DP_FAULT.with(|f| f.set(on));
    }

    #[inline]
    pub(crate) fn dp_fault_active() -> bool {
        DP_FAULT.with(|f| f.get())
    }
}

/// Writes `Pr[d = i]` for `i < out.len()` given independent edge
/// probabilities, using `A(h, i) = p_h A(h-1, i-1) + (1 - p_h) A(h-1, i)`.
pub(crate) fn fill_prefix(probs: impl IntoIterator<Item = f64>, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out.fill(0.0);
    out[0] = 1.0;
    let dropped = fault::dp_fault_active() as usize;
    for p in probs.into_iter().skip(dropped) {
        let q = 1.0 - p;
        for i in (1..out.len()).rev() {
            out[i] = p * out[i - 1] + q * out[i];
        }
        out[0] *= q;
    }
}

/// `Pr[d >= prefix.len()]`.
#[inline]
pub(crate) fn tail_of(prefix: &[f64]) -> f64 {
    (1.0 - prefix.iter().sum::<f64>()).clamp(0.0, 1.0)
}

/// Removes one edge of probability `p` from a truncated distribution.
/// Returns `false` without touching `prefix` when the caller must rebuild.
pub(crate) fn remove_from_prefix(prefix: &mut [f64], p: f64) -> bool {
    let q = 1.0 - p;
    if q < RECOMPUTE_BELOW {
        return false;
    }
    let mut prev = 0.0;
    for slot in prefix.iter_mut() {
        let v = ((*slot - p * prev) / q).clamp(0.0, 1.0);
        *slot = v;
        prev = v;
    }
    true
}

/// Degree distributions of one vertex, truncated at `k` (in) and `l` (out).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDp {
    vertex: VertexId,
    in_edges: Vec<(VertexId, f64)>,
    out_edges: Vec<(VertexId, f64)>,
    in_prefix: Vec<f64>,
    out_prefix: Vec<f64>,
}

/// Computes the degree distributions of `v`, neighbors taken in ascending id.
pub fn degree_dp(graph: &InteractionGraph, v: VertexId, k: usize, l: usize) -> DegreeDp {
    let (ids, ps) = graph.in_edges(v);
    let in_edges: Vec<_> = ids.iter().copied().zip(ps.iter().copied()).collect();
    let (ids, ps) = graph.out_edges(v);
    let out_edges: Vec<_> = ids.iter().copied().zip(ps.iter().copied()).collect();
    let mut in_prefix = vec![0.0; k];
    let mut out_prefix = vec![0.0; l];
    fill_prefix(in_edges.iter().map(|e| e.1), &mut in_prefix);
    fill_prefix(out_edges.iter().map(|e| e.1), &mut out_prefix);
    DegreeDp {
        vertex: v,
        in_edges,
        out_edges,
        in_prefix,
        out_prefix,
    }
}

impl DegreeDp {
    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    /// `Pr[d- = i]` for `i < k`.
    pub fn in_prefix(&self) -> &[f64] {
        &self.in_prefix
    }

    /// `Pr[d+ = j]` for `j < l`.
    pub fn out_prefix(&self) -> &[f64] {
        &self.out_prefix
    }

    /// `Pr[d- >= k]`
    pub fn in_tail(&self) -> f64 {
        tail_of(&self.in_prefix)
    }

    /// `Pr[d+ >= l]`
    pub fn out_tail(&self) -> f64 {
        tail_of(&self.out_prefix)
    }

    /// `Pr[d- >= k] * Pr[d+ >= l]`
    pub fn product(&self) -> f64 {
        self.in_tail() * self.out_tail()
    }

    pub fn in_edges(&self) -> &[(VertexId, f64)] {
        &self.in_edges
    }

    pub fn out_edges(&self) -> &[(VertexId, f64)] {
        &self.out_edges
    }

    /// Drops the in-edge `(src, v)` and updates the in-degree distribution.
    pub fn remove_in_edge(&mut self, src: VertexId) -> Result<()> {
        let vertex = self.vertex;
        Self::remove(&mut self.in_edges, &mut self.in_prefix, src).ok_or(Error::NotIncident {
            vertex,
            src,
            dst: vertex,
        })
    }

    /// Drops the out-edge `(v, dst)` and updates the out-degree distribution.
    pub fn remove_out_edge(&mut self, dst: VertexId) -> Result<()> {
        let vertex = self.vertex;
        Self::remove(&mut self.out_edges, &mut self.out_prefix, dst).ok_or(Error::NotIncident {
            vertex,
            src: vertex,
            dst,
        })
    }

    fn remove(edges: &mut Vec<(VertexId, f64)>, prefix: &mut [f64], other: VertexId) -> Option<()> {
        let pos = edges.iter().position(|e| e.0 == other)?;
        let (_, p) = edges.remove(pos);
        if !remove_from_prefix(prefix, p) {
            fill_prefix(edges.iter().map(|e| e.1), prefix);
        }
        Some(())
    }
}

/// Maximal `(k, l, eta)`-cores, one per weakly connected component of the
/// surviving vertices. Each core is sorted; cores are ordered by smallest id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoreSet {
    pub cores: Vec<Vec<VertexId>>,
}

impl CoreSet {
    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    /// All core vertices, ascending.
    pub fn union(&self) -> Vec<VertexId> {
        let mut all: Vec<_> = self.cores.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// Mutable peeling state over an interaction graph: alive flags plus
/// truncated degree distributions for every alive vertex.
#[derive(Debug, Clone)]
pub struct PeelState<'g> {
    graph: &'g InteractionGraph,
    k: usize,
    l: usize,
    alive: Vec<bool>,
    alive_count: usize,
    in_prefix: Vec<f64>,
    out_prefix: Vec<f64>,
    product: Vec<f64>,
}

impl<'g> PeelState<'g> {
    /// Every graph vertex alive, distributions computed from scratch.
    pub fn new(graph: &'g InteractionGraph, k: usize, l: usize) -> Self {
        let n = graph.n();
        let mut st = PeelState {
            graph,
            k,
            l,
            alive: (0..n as VertexId).map(|v| graph.contains(v)).collect(),
            alive_count: graph.vertex_count(),
            in_prefix: vec![0.0; n * k],
            out_prefix: vec![0.0; n * l],
            product: vec![0.0; n],
        };
        for v in 0..n as VertexId {
            if st.alive[v as usize] {
                st.rebuild_in(v);
                st.rebuild_out(v);
                st.refresh(v);
            }
        }
        st
    }

    pub fn graph(&self) -> &'g InteractionGraph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive[v as usize]
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len() as VertexId).filter(move |&v| self.alive[v as usize])
    }

    /// `Pr[d- >= k] * Pr[d+ >= l]` within the alive subgraph.
    #[inline]
    pub fn product(&self, v: VertexId) -> f64 {
        self.product[v as usize]
    }

    pub fn in_tail(&self, v: VertexId) -> f64 {
        tail_of(self.in_slice(v))
    }

    pub fn out_tail(&self, v: VertexId) -> f64 {
        tail_of(self.out_slice(v))
    }

    fn in_slice(&self, v: VertexId) -> &[f64] {
        &self.in_prefix[v as usize * self.k..(v as usize + 1) * self.k]
    }

    fn out_slice(&self, v: VertexId) -> &[f64] {
        &self.out_prefix[v as usize * self.l..(v as usize + 1) * self.l]
    }

    #[inline]
    fn refresh(&mut self, v: VertexId) {
        self.product[v as usize] = tail_of(self.in_slice(v)) * tail_of(self.out_slice(v));
    }

    fn rebuild_in(&mut self, v: VertexId) {
        let (ids, ps) = self.graph.in_edges(v);
        let alive = &self.alive;
        let probs = ids
            .iter()
            .zip(ps)
            .filter(|(u, _)| alive[**u as usize])
            .map(|(_, p)| *p);
        let k = self.k;
        fill_prefix(probs, &mut self.in_prefix[v as usize * k..(v as usize + 1) * k]);
    }

    fn rebuild_out(&mut self, v: VertexId) {
        let (ids, ps) = self.graph.out_edges(v);
        let alive = &self.alive;
        let probs = ids
            .iter()
            .zip(ps)
            .filter(|(u, _)| alive[**u as usize])
            .map(|(_, p)| *p);
        let l = self.l;
        fill_prefix(probs, &mut self.out_prefix[v as usize * l..(v as usize + 1) * l]);
    }

    /// Deletes `v` and its edges, updating the distributions of its alive
    /// neighbors. `touched` sees every neighbor whose product changed.
    pub fn remove_vertex(&mut self, v: VertexId, mut touched: impl FnMut(&Self, VertexId)) {
        if !self.alive[v as usize] {
            return;
        }
        self.alive[v as usize] = false;
        self.alive_count -= 1;
        let graph = self.graph;

        let (srcs, ps) = graph.in_edges(v);
        for (&u, &p) in srcs.iter().zip(ps) {
            if !self.alive[u as usize] {
                continue;
            }
            let l = self.l;
            if !remove_from_prefix(&mut self.out_prefix[u as usize * l..(u as usize + 1) * l], p) {
                self.rebuild_out(u);
            }
            self.refresh(u);
            touched(self, u);
        }

        let (dsts, ps) = graph.out_edges(v);
        for (&w, &p) in dsts.iter().zip(ps) {
            if !self.alive[w as usize] {
                continue;
            }
            let k = self.k;
            if !remove_from_prefix(&mut self.in_prefix[w as usize * k..(w as usize + 1) * k], p) {
                self.rebuild_in(w);
            }
            self.refresh(w);
            touched(self, w);
        }
    }

    /// Deletes `v`, then keeps deleting any alive vertex whose product drops
    /// below `eta`. Returns every deleted vertex, `v` first.
    pub fn delete_cascade(&mut self, v: VertexId, eta: f64) -> Vec<VertexId> {
        let mut removed = Vec::new();
        if !self.alive[v as usize] {
            return removed;
        }
        let mut stack = vec![v];
        let mut queued = HashSet::from([v]);
        while let Some(x) = stack.pop() {
            if !self.alive[x as usize] {
                continue;
            }
            removed.push(x);
            self.remove_vertex(x, |st, u| {
                if !meets_eta(st.product(u), eta) && queued.insert(u) {
                    stack.push(u);
                }
            });
        }
        removed
    }

    /// Deletes vertices failing `eta` until none remain, visiting candidates
    /// in `order` and re-examining touched neighbors.
    pub fn peel(&mut self, eta: f64, order: impl IntoIterator<Item = VertexId>) {
        let n = self.alive.len();
        let mut queued = vec![false; n];
        let mut queue: VecDeque<VertexId> = VecDeque::new();
        for v in order {
            if self.alive[v as usize] && !queued[v as usize] {
                queued[v as usize] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            queued[v as usize] = false;
            if !self.alive[v as usize] || meets_eta(self.product(v), eta) {
                continue;
            }
            self.remove_vertex(v, |st, u| {
                if !queued[u as usize] && !meets_eta(st.product(u), eta) {
                    queued[u as usize] = true;
                    queue.push_back(u);
                }
            });
        }
    }

    /// Weakly connected components of the alive subgraph.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.graph
            .weak_components_where(self.alive_vertices(), |v| self.alive[v as usize])
    }

    /// Weakly connected components of the alive vertices among `members`.
    pub fn components_within(&self, members: &[VertexId]) -> Vec<Vec<VertexId>> {
        self.graph.weak_components_where(
            members.iter().copied().filter(|&v| self.alive[v as usize]),
            |v| self.alive[v as usize],
        )
    }
}

/// Maximal `(k, l, eta)`-cores of `graph`.
pub fn compute_cores(graph: &InteractionGraph, k: usize, l: usize, eta: f64) -> CoreSet {
    let st = peel_to_cores(graph, k, l, eta);
    CoreSet {
        cores: st.components(),
    }
}

/// As [`compute_cores`], visiting vertices in a caller-chosen order.
pub fn compute_cores_ordered(
    graph: &InteractionGraph,
    k: usize,
    l: usize,
    eta: f64,
    order: &[VertexId],
) -> CoreSet {
    let mut st = PeelState::new(graph, k, l);
    st.peel(eta, order.iter().copied());
    // anything the order missed
    st.peel(eta, graph.vertices());
    CoreSet {
        cores: st.components(),
    }
}

/// Peeling state left after removing everything outside the cores.
pub fn peel_to_cores(graph: &InteractionGraph, k: usize, l: usize, eta: f64) -> PeelState<'_> {
    let mut st = PeelState::new(graph, k, l);
    st.peel(eta, graph.vertices());
    st
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MinKey(f64, VertexId);

impl Eq for MinKey {}

impl PartialOrd for MinKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Per-vertex eta-thresholds: the largest `eta` for which some
/// `(k, l, eta)`-core contains the vertex. Zero outside any `(k, l)` structure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EtaThresholds {
    values: Vec<f64>,
}

impl EtaThresholds {
    pub fn get(&self, v: VertexId) -> f64 {
        self.values.get(v as usize).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Repeatedly removes the vertex with the smallest probability product
/// (ties to the lower id), recording the running maximum as its threshold.
pub fn eta_thresholds(graph: &InteractionGraph, k: usize, l: usize) -> EtaThresholds {
    let mut st = PeelState::new(graph, k, l);
    let mut values = vec![0.0; graph.n()];

    let hopeless: Vec<VertexId> = st.alive_vertices().filter(|&v| st.product(v) <= 0.0).collect();
    for v in hopeless {
        st.remove_vertex(v, |_, _| {});
    }

    let mut heap: BinaryHeap<Reverse<MinKey>> = st
        .alive_vertices()
        .map(|v| Reverse(MinKey(st.product(v), v)))
        .collect();
    let mut current = 0.0f64;
    while let Some(Reverse(MinKey(prob, v))) = heap.pop() {
        if !st.is_alive(v) || st.product(v).to_bits() != prob.to_bits() {
            continue;
        }
        current = current.max(prob);
        values[v as usize] = current;
        st.remove_vertex(v, |s, u| heap.push(Reverse(MinKey(s.product(u), u))));
    }
    EtaThresholds { values }
}

/// `(k_max, l_max)`: the largest `k` (resp. `l`) for which the deterministic
/// skeleton has a nonempty subgraph with minimum in-degree (resp. out-degree)
/// at least `k`.
pub fn dcore_bounds(graph: &InteractionGraph) -> (usize, usize) {
    let k_max = max_one_sided_core(graph, |g, v| g.in_degree(v), |g, v| g.out_edges(v).0);
    let l_max = max_one_sided_core(graph, |g, v| g.out_degree(v), |g, v| g.in_edges(v).0);
    (k_max, l_max)
}

/// Classic peeling on one degree direction. `affected(v)` lists the vertices
/// whose counted degree drops when `v` is removed.
fn max_one_sided_core(
    graph: &InteractionGraph,
    degree: impl Fn(&InteractionGraph, VertexId) -> usize,
    affected: impl for<'a> Fn(&'a InteractionGraph, VertexId) -> &'a [VertexId],
) -> usize {
    let n = graph.n();
    let mut deg: Vec<usize> = (0..n as VertexId).map(|v| degree(graph, v)).collect();
    let mut removed: Vec<bool> = (0..n as VertexId).map(|v| !graph.contains(v)).collect();
    let mut heap: BinaryHeap<Reverse<(usize, VertexId)>> = graph
        .vertices()
        .map(|v| Reverse((deg[v as usize], v)))
        .collect();
    let mut best = 0;
    while let Some(Reverse((d, v))) = heap.pop() {
        if removed[v as usize] || d != deg[v as usize] {
            continue;
        }
        best = best.max(d);
        removed[v as usize] = true;
        for &w in affected(graph, v) {
            if !removed[w as usize] {
                deg[w as usize] -= 1;
                heap.push(Reverse((deg[w as usize], w)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(VertexId, VertexId, f64)]) -> InteractionGraph {
        InteractionGraph::from_probabilities(n, edges).unwrap()
    }

    /// Possible-world enumeration of `Pr[d >= k]` over a handful of edges.
    fn enumerate_tail(ps: &[f64], k: usize) -> f64 {
        let mut total = 0.0;
        for mask in 0u32..(1 << ps.len()) {
            let mut pr = 1.0;
            for (i, p) in ps.iter().enumerate() {
                pr *= if mask >> i & 1 == 1 { *p } else { 1.0 - p };
            }
            if mask.count_ones() as usize >= k {
                total += pr;
            }
        }
        total
    }

    #[test]
    fn empty_neighborhood() {
        let g = graph(2, &[(0, 1, 0.3)]);
        let dp = degree_dp(&g, 0, 1, 0);
        assert_eq!(dp.in_tail(), 0.0);
        assert_eq!(degree_dp(&g, 0, 0, 0).in_tail(), 1.0);
    }

    #[test]
    fn single_bernoulli() {
        let g = graph(2, &[(0, 1, 0.3)]);
        assert!((degree_dp(&g, 1, 1, 1).in_tail() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_in_edges_match_enumeration() {
        let g = graph(3, &[(0, 2, 0.5), (1, 2, 0.8)]);
        // four worlds: {} 0.1, {a} 0.1, {b} 0.4, {a,b} 0.4
        assert_eq!(enumerate_tail(&[0.5, 0.8], 1), 0.9);
        assert!((enumerate_tail(&[0.5, 0.8], 2) - 0.4).abs() < 1e-15);
        assert!((degree_dp(&g, 2, 1, 0).in_tail() - 0.9).abs() < 1e-12);
        assert!((degree_dp(&g, 2, 2, 0).in_tail() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn removal_update_matches_fresh_dp() {
        let g = graph(3, &[(0, 2, 0.5), (1, 2, 0.8)]);
        let mut dp = degree_dp(&g, 2, 2, 0);
        dp.remove_in_edge(1).unwrap();
        assert!((dp.in_prefix()[0] - 0.5).abs() < 1e-12);
        let mut dp1 = degree_dp(&g, 2, 1, 0);
        dp1.remove_in_edge(1).unwrap();
        assert!((dp1.in_tail() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn removing_certain_edge_shifts_distribution() {
        let g = graph(3, &[(0, 2, 1.0), (1, 2, 0.5)]);
        let mut dp = degree_dp(&g, 2, 2, 0);
        dp.remove_in_edge(0).unwrap();
        assert!((dp.in_prefix()[0] - 0.5).abs() < 1e-15);
        assert!((dp.in_prefix()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn removing_only_edge_and_missing_edge() {
        let g = graph(2, &[(0, 1, 0.4)]);
        let mut dp = degree_dp(&g, 1, 2, 0);
        dp.remove_in_edge(0).unwrap();
        assert_eq!(dp.in_prefix()[0], 1.0);
        assert!(matches!(dp.remove_in_edge(0), Err(Error::NotIncident { .. })));
        assert!(dp.remove_out_edge(0).is_err());
    }

    #[test]
    fn bidirected_triangle_threshold() {
        let mut e = Vec::new();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            e.push((a, b, 0.9));
            e.push((b, a, 0.9));
        }
        let g = graph(3, &e);
        // in-degree >= 1 fails only if both in-edges fail: 0.99 per side
        for eta in [0.81, 0.82, 0.9801] {
            assert_eq!(compute_cores(&g, 1, 1, eta).cores, vec![vec![0, 1, 2]]);
        }
        assert!(compute_cores(&g, 1, 1, 0.9802).is_empty());
    }

    #[test]
    fn directed_cycle_threshold() {
        let g = graph(3, &[(0, 1, 0.9), (1, 2, 0.9), (2, 0, 0.9)]);
        assert_eq!(compute_cores(&g, 1, 1, 0.81).cores, vec![vec![0, 1, 2]]);
        assert!(compute_cores(&g, 1, 1, 0.82).is_empty());
    }

    #[test]
    fn cores_split_into_components() {
        let mut e = Vec::new();
        for (a, b) in [(0, 1), (3, 4)] {
            e.push((a, b, 1.0));
            e.push((b, a, 1.0));
        }
        e.push((1, 2, 0.1));
        let g = graph(5, &e);
        let cs = compute_cores(&g, 1, 1, 0.5);
        assert_eq!(cs.cores, vec![vec![0, 1], vec![3, 4]]);
        assert_eq!(cs.union(), vec![0, 1, 3, 4]);
    }

    #[test]
    fn thresholds_on_structureless_graph_are_zero() {
        let g = graph(3, &[(0, 1, 0.7), (1, 2, 0.7)]);
        let th = eta_thresholds(&g, 1, 1);
        assert!(th.as_slice().iter().all(|t| *t == 0.0));
    }

    #[test]
    fn thresholds_on_bidirected_pair() {
        let g = graph(2, &[(0, 1, 0.5), (1, 0, 0.8)]);
        let th = eta_thresholds(&g, 1, 1);
        assert!((th.get(0) - 0.4).abs() < 1e-15);
        assert!((th.get(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn dcore_examples() {
        let mut tri = Vec::new();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            tri.push((a, b, 0.5));
            tri.push((b, a, 0.5));
        }
        assert_eq!(dcore_bounds(&graph(3, &tri)), (2, 2));
        assert_eq!(dcore_bounds(&graph(3, &[(0, 1, 1.0), (1, 2, 1.0)])), (0, 0));
        assert_eq!(dcore_bounds(&graph(2, &[(0, 1, 0.2), (1, 0, 0.2)])), (1, 1));
        assert_eq!(dcore_bounds(&graph(0, &[])), (0, 0));
    }

    #[test]
    fn delete_cascade_collects_failures() {
        // 0 <-> 1 <-> 2, each needs an in and an out edge
        let mut e = Vec::new();
        for (a, b) in [(0, 1), (1, 2)] {
            e.push((a, b, 1.0));
            e.push((b, a, 1.0));
        }
        let g = graph(3, &e);
        let mut st = peel_to_cores(&g, 1, 1, 1.0);
        assert_eq!(st.alive_count(), 3);
        let removed = st.delete_cascade(1, 1.0);
        assert_eq!(removed[0], 1);
        let mut sorted = removed.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
        assert_eq!(st.alive_count(), 0);
        assert!(st.components().is_empty());
    }
}
