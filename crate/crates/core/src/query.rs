//! Query execution: online search and index-backed search.
//!
//! Both paths end in the same sweep. Starting from the maximal cores, the
//! most influential community is popped from a max-heap, its weakest member
//! (lowest score, then lowest id) is deleted together with every vertex that
//! stops meeting the constraint, and the surviving weakly connected parts
//! are pushed back. The best popped community is the answer.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{Community, InteractionGraph, Normalization, SocialNetwork, TopicVector, VertexId};
use crate::index::{candidate_vertices, nearest_topic_vector, TieTree, TucList};
use crate::influence::{estimate_influence, exact_influence, SampleParams};
use crate::uncertain_core::{peel_to_cores, PeelState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QueryMode {
    #[default]
    Online,
    Indexed,
}

impl QueryMode {
    pub fn name(self) -> &'static str {
        match self {
            QueryMode::Online => "online",
            QueryMode::Indexed => "indexed",
        }
    }
}

impl std::str::FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(QueryMode::Online),
            "indexed" => Ok(QueryMode::Indexed),
            _ => Err(Error::invalid(format!("unknown mode '{s}' (online, indexed)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRequest {
    pub q: TopicVector,
    pub k: usize,
    pub l: usize,
    pub eta: f64,
    pub params: SampleParams,
    pub normalization: Normalization,
    pub mode: QueryMode,
}

impl QueryRequest {
    pub fn validate(&self, net: &SocialNetwork) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::invalid("k and l must be positive"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid(format!("eta {} not in (0, 1]", self.eta)));
        }
        if self.q.dim() != net.topic_count() {
            return Err(Error::DimensionMismatch {
                expected: net.topic_count(),
                found: self.q.dim(),
            });
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStatus {
    Found,
    NoCoreExists,
}

impl QueryStatus {
    pub fn name(self) -> &'static str {
        match self {
            QueryStatus::Found => "found",
            QueryStatus::NoCoreExists => "no-core-exists",
        }
    }
}

/// Wall-clock time per stage. `probe` covers the index lookups and stays
/// zero for online queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Timings {
    pub probe: Duration,
    pub extract: Duration,
    pub core: Duration,
    pub influence: Duration,
    pub search: Duration,
}

impl Timings {
    pub fn total(&self) -> Duration {
        self.probe + self.extract + self.core + self.influence + self.search
    }
}

/// What the index contributed to an indexed query.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexProbe {
    /// Position of the adopted topic vector in the tree.
    pub gamma_index: usize,
    pub gamma: TopicVector,
    /// Position of the first qualifying key in the `(k, l)` cell.
    pub j_star: Option<usize>,
    pub candidate_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub status: QueryStatus,
    pub community: Option<Community>,
    pub mode: QueryMode,
    pub timings: Timings,
    pub probe: Option<IndexProbe>,
}

impl QueryResult {
    fn new(community: Option<Community>, mode: QueryMode, timings: Timings) -> Self {
        QueryResult {
            status: if community.is_some() {
                QueryStatus::Found
            } else {
                QueryStatus::NoCoreExists
            },
            community,
            mode,
            timings,
            probe: None,
        }
    }
}

/// Source of per-vertex influence scores for the sweep.
pub trait InfluenceOracle {
    /// Scores indexed by vertex id, covering the graph's id space.
    fn scores(&self, graph: &InteractionGraph) -> Result<Vec<f64>>;
}

/// Sampled estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisOracle(pub SampleParams);

impl InfluenceOracle for RisOracle {
    fn scores(&self, graph: &InteractionGraph) -> Result<Vec<f64>> {
        Ok(estimate_influence(graph, &self.0).as_slice().to_vec())
    }
}

/// Exact influence by world enumeration; small graphs only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOracle {
    pub alpha: f64,
}

impl InfluenceOracle for ExactOracle {
    fn scores(&self, graph: &InteractionGraph) -> Result<Vec<f64>> {
        exact_influence(graph, self.alpha)
    }
}

/// Fixed scores, e.g. a stored table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOracle(pub Vec<f64>);

impl InfluenceOracle for TableOracle {
    fn scores(&self, graph: &InteractionGraph) -> Result<Vec<f64>> {
        let mut s = self.0.clone();
        s.resize(graph.n().max(s.len()), 1.0);
        Ok(s)
    }
}

/// Online search with sampled influence estimates.
pub fn online_query(net: &SocialNetwork, req: &QueryRequest) -> Result<QueryResult> {
    online_query_with(net, req, &RisOracle(req.params))
}

/// Online search with influence scores from `oracle`.
pub fn online_query_with(
    net: &SocialNetwork,
    req: &QueryRequest,
    oracle: &dyn InfluenceOracle,
) -> Result<QueryResult> {
    req.validate(net)?;
    let mut timings = Timings::default();
    let t = Instant::now();
    let graph = InteractionGraph::extract(net, &req.q, req.normalization)?;
    timings.extract = t.elapsed();
    let community = search_graph(&graph, req.k, req.l, req.eta, oracle, &mut timings)?;
    Ok(QueryResult::new(community, QueryMode::Online, timings))
}

/// Cores, scores, then the sweep on an already extracted graph. Scores are
/// only requested when some core exists.
pub fn search_graph(
    graph: &InteractionGraph,
    k: usize,
    l: usize,
    eta: f64,
    oracle: &dyn InfluenceOracle,
    timings: &mut Timings,
) -> Result<Option<Community>> {
    let t = Instant::now();
    let state = peel_to_cores(graph, k, l, eta);
    timings.core = t.elapsed();
    if state.alive_count() == 0 {
        return Ok(None);
    }
    let t = Instant::now();
    let scores = oracle.scores(graph)?;
    timings.influence = t.elapsed();
    let t = Instant::now();
    let best = sweep(state, eta, &scores);
    timings.search = t.elapsed();
    Ok(best)
}

/// Index-backed search: adopt the influence table of the nearest stored
/// topic vector and search only the graph induced by the candidate vertices.
pub fn indexed_query(
    net: &SocialNetwork,
    req: &QueryRequest,
    tuc: &TucList,
    tie: &TieTree,
) -> Result<QueryResult> {
    req.validate(net)?;
    if tie.settings().normalization != req.normalization {
        return Err(Error::IndexMismatch(format!(
            "index built with normalization {}, query uses {}",
            tie.settings().normalization.name(),
            req.normalization.name()
        )));
    }
    let mut timings = Timings::default();
    let t = Instant::now();
    let (gamma_index, table) = nearest_topic_vector(tie, &req.q);
    let candidates = candidate_vertices(tuc, req.k, req.l, req.eta);
    timings.probe = t.elapsed();
    let probe = IndexProbe {
        gamma_index,
        gamma: tie.gammas()[gamma_index].clone(),
        j_star: candidates.j_star,
        candidate_count: candidates.vertices.len(),
    };

    let community = if candidates.vertices.is_empty() {
        None
    } else {
        let t = Instant::now();
        let graph =
            InteractionGraph::extract_induced(net, &req.q, req.normalization, &candidates.vertices)?;
        timings.extract = t.elapsed();
        let oracle = TableSlice(table.as_slice());
        search_graph(&graph, req.k, req.l, req.eta, &oracle, &mut timings)?
    };
    let mut result = QueryResult::new(community, QueryMode::Indexed, timings);
    result.probe = Some(probe);
    Ok(result)
}

struct TableSlice<'a>(&'a [f64]);

impl InfluenceOracle for TableSlice<'_> {
    fn scores(&self, graph: &InteractionGraph) -> Result<Vec<f64>> {
        let mut s = self.0.to_vec();
        s.resize(graph.n().max(s.len()), 1.0);
        Ok(s)
    }
}

/// Removes `v` from a peeled state and cascades; returns the weakly
/// connected parts of `members` that survive.
pub fn delete_cascade(
    state: &mut PeelState<'_>,
    members: &[VertexId],
    v: VertexId,
    eta: f64,
) -> Vec<Vec<VertexId>> {
    state.delete_cascade(v, eta);
    state.components_within(members)
}

#[derive(Debug, Clone)]
struct HeapEntry {
    score: f64,
    min_vertex: VertexId,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then(other.min_vertex.cmp(&self.min_vertex))
            .then(other.node.cmp(&self.node))
    }
}

fn weakest(members: &[VertexId], scores: &[f64]) -> VertexId {
    let mut best = members[0];
    for &v in &members[1..] {
        if scores[v as usize] < scores[best as usize] {
            best = v;
        }
    }
    best
}

/// The sweep exactly as described: one heap entry per community, each pop
/// deleting from the shared peeling state and re-finding components.
/// Quadratic in the worst case; kept as a reference for [`sweep`].
pub fn sweep_reference(mut state: PeelState<'_>, eta: f64, scores: &[f64]) -> Option<Community> {
    let mut store: Vec<Vec<VertexId>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let push = |c: Vec<VertexId>, store: &mut Vec<Vec<VertexId>>, heap: &mut BinaryHeap<_>| {
        let w = weakest(&c, scores);
        heap.push(HeapEntry {
            score: scores[w as usize],
            min_vertex: c[0],
            node: store.len(),
        });
        store.push(c);
    };
    for c in state.components() {
        push(c, &mut store, &mut heap);
    }
    let mut best: Option<(f64, usize)> = None;
    while let Some(top) = heap.pop() {
        if best.is_none_or(|(s, _)| top.score > s) {
            best = Some((top.score, top.node));
        }
        let members = store[top.node].clone();
        let v = weakest(&members, scores);
        for part in delete_cascade(&mut state, &members, v, eta) {
            push(part, &mut store, &mut heap);
        }
    }
    best.map(|(_, node)| Community::new(store[node].clone(), scores).expect("nonempty"))
}

/// Equivalent to [`sweep_reference`] in `O((n + m) log n)` plus the cost
/// of the deletions.
///
/// Communities evolve independently, so the deletions can run as one global
/// process: repeatedly delete the weakest alive vertex (it is the weakest of
/// its own community) with its cascade. Each step corresponds to one popped
/// community, scored by the deleted vertex. Replaying the steps backwards
/// with union-find recovers the communities and which step's community
/// contains which; the heap order is then simulated on that tree.
pub fn sweep(mut state: PeelState<'_>, eta: f64, scores: &[f64]) -> Option<Community> {
    let graph = state.graph();
    let n = graph.n();
    let mut order: Vec<VertexId> = state.alive_vertices().collect();
    if order.is_empty() {
        return None;
    }
    order.sort_by(|&a, &b| {
        scores[a as usize]
            .total_cmp(&scores[b as usize])
            .then(a.cmp(&b))
    });

    // forward: steps of (weakest vertex, everything its deletion removed)
    let mut step_of = vec![usize::MAX; n];
    let mut steps: Vec<(VertexId, Vec<VertexId>)> = Vec::new();
    for &v in &order {
        if !state.is_alive(v) {
            continue;
        }
        let removed = state.delete_cascade(v, eta);
        for &x in &removed {
            step_of[x as usize] = steps.len();
        }
        steps.push((v, removed));
    }

    // backward: union-find over re-added vertices
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut label = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); steps.len()];
    let mut min_vertex = vec![VertexId::MAX; steps.len()];
    let mut roots_seen = Vec::new();

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            let up = parent[parent[x as usize] as usize];
            parent[x as usize] = up;
            x = up;
        }
        x
    }

    for t in (0..steps.len()).rev() {
        let removed = &steps[t].1;
        roots_seen.clear();
        let mut lowest = VertexId::MAX;
        for &x in removed {
            lowest = lowest.min(x);
            let nbrs = graph.out_edges(x).0.iter().chain(graph.in_edges(x).0);
            for &y in nbrs {
                let sy = step_of[y as usize];
                if sy != usize::MAX && sy > t {
                    let r = find(&mut parent, y);
                    let lab = label[r as usize];
                    if !roots_seen.contains(&lab) {
                        roots_seen.push(lab);
                    }
                }
            }
        }
        for &child in &roots_seen {
            lowest = lowest.min(min_vertex[child]);
        }
        min_vertex[t] = lowest;
        children[t] = roots_seen.clone();

        // union removed vertices with each other and with later steps
        for &x in removed {
            let nbrs = graph.out_edges(x).0.iter().chain(graph.in_edges(x).0);
            for &y in nbrs {
                let sy = step_of[y as usize];
                if sy != usize::MAX && sy >= t {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                    if rx != ry {
                        parent[ry as usize] = rx;
                    }
                }
            }
        }
        let r = find(&mut parent, steps[t].0);
        label[r as usize] = t;
        for &x in removed {
            debug_assert_eq!(find(&mut parent, x), r, "a deletion step is connected");
        }
    }

    // initial communities: the labels of the final roots
    let mut is_child = vec![false; steps.len()];
    for c in children.iter().flatten() {
        is_child[*c] = true;
    }
    let entry = |t: usize| HeapEntry {
        score: scores[steps[t].0 as usize],
        min_vertex: min_vertex[t],
        node: t,
    };
    let mut heap: BinaryHeap<HeapEntry> = (0..steps.len()).filter(|&t| !is_child[t]).map(entry).collect();
    let mut best: Option<(f64, usize)> = None;
    while let Some(top) = heap.pop() {
        if best.is_none_or(|(s, _)| top.score > s) {
            best = Some((top.score, top.node));
        }
        heap.extend(children[top.node].iter().map(|&c| entry(c)));
    }

    let (_, best) = best?;
    let mut members = Vec::new();
    let mut stack = vec![best];
    while let Some(t) = stack.pop() {
        members.extend_from_slice(&steps[t].1);
        stack.extend_from_slice(&children[t]);
    }
    Some(Community::new(members, scores).expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(n: usize, edges: &[(VertexId, VertexId, f64)], scores: &[f64], eta: f64) {
        let g = InteractionGraph::from_probabilities(n, edges).unwrap();
        for (k, l) in [(1, 1), (1, 2), (2, 1)] {
            let a = sweep(peel_to_cores(&g, k, l, eta), eta, scores);
            let b = sweep_reference(peel_to_cores(&g, k, l, eta), eta, scores);
            assert_eq!(a, b, "k={k} l={l}");
        }
    }

    #[test]
    fn sweep_matches_reference_on_small_graphs() {
        let both = |u, v, p| [(u, v, p), (v, u, p)];
        let mut edges = Vec::new();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)] {
            edges.extend(both(u, v, 0.9));
        }
        scored(6, &edges, &[3.0, 2.0, 5.0, 1.0, 4.0, 6.0], 0.5);
        scored(6, &edges, &[1.0; 6], 0.5);
        scored(6, &edges, &[2.0, 2.0, 2.0, 1.0, 3.0, 3.0], 0.3);
    }

    #[test]
    fn cut_vertex_deletion_splits() {
        // two bidirected triangles sharing vertex 2
        let mut edges = Vec::new();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)] {
            edges.push((u, v, 1.0));
            edges.push((v, u, 1.0));
        }
        let g = InteractionGraph::from_probabilities(5, &edges).unwrap();
        let mut st = peel_to_cores(&g, 1, 1, 0.5);
        let parts = delete_cascade(&mut st, &[0, 1, 2, 3, 4], 2, 0.5);
        assert_eq!(parts, vec![vec![0, 1], vec![3, 4]]);
        let mut st = peel_to_cores(&g, 1, 1, 0.5);
        st.delete_cascade(0, 0.5);
        st.delete_cascade(1, 0.5);
        st.delete_cascade(3, 0.5);
        st.delete_cascade(4, 0.5);
        assert!(delete_cascade(&mut st, &[2], 2, 0.5).is_empty());
    }

    #[test]
    fn no_cores_means_no_community() {
        let g = InteractionGraph::from_probabilities(3, &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        assert_eq!(sweep(peel_to_cores(&g, 1, 1, 0.1), 0.1, &[1.0; 3]), None);
    }
}
