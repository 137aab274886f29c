//! Influence under the topic-aware independent cascade model.
//!
//! Edge `e` transmits with probability `pp(e) = alpha * p(e)`. A vertex's
//! influence is the expected number of vertices active at the end of a
//! cascade seeded by it alone (the seed counts itself).
//!
//! [`estimate_influence`] samples `theta` live-edge subgraphs and, for every
//! vertex `u`, counts the reverse-reachable sets containing `u` in each
//! sample. That count equals the size of `u`'s forward-reachable set, which
//! is what gets computed (strongly connected components share one traversal).
//!
//! Randomness comes from ChaCha8: the generator for subgraph `i` is
//! `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`. Per-sample
//! counts are summed as integers, so the table does not depend on how the
//! samples are spread over threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, TopicVector, VertexId};

/// Sampling parameters of the influence estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleParams {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            epsilon: 0.1,
            delta: 0.1,
            alpha: 1.0,
            seed: 0,
        }
    }
}

impl SampleParams {
    pub fn new(epsilon: f64, delta: f64, alpha: f64, seed: u64) -> Result<Self> {
        let p = SampleParams {
            epsilon,
            delta,
            alpha,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.epsilon) {
            return Err(Error::invalid(format!("epsilon {} not in (0, 1)", self.epsilon)));
        }
        if !open_unit(self.delta) {
            return Err(Error::invalid(format!("delta {} not in (0, 1)", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        Ok(())
    }

    /// Number of sampled subgraphs for a graph over `n` vertices.
    pub fn sample_count(&self, n: usize) -> usize {
        sample_count(n, self.epsilon, self.delta)
    }
}

/// `ceil(ln(2n / delta) / (2 eps^2))`, at least 1: with that many samples a
/// Hoeffding bound plus a union bound over `n` vertices keeps every
/// estimate within `eps * n` with probability `1 - delta`.
pub fn sample_count(n: usize, epsilon: f64, delta: f64) -> usize {
    let n = n.max(1) as f64;
    let theta = ((2.0 * n / delta).ln() / (2.0 * epsilon * epsilon)).ceil();
    (theta as usize).max(1)
}

/// The generator used for sampled subgraph `index`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Estimated influence of every vertex id for one topic vector.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceTable {
    estimates: Vec<f64>,
    samples: usize,
    topic: Option<TopicVector>,
}

impl InfluenceTable {
    pub fn from_parts(estimates: Vec<f64>, samples: usize, topic: Option<TopicVector>) -> Self {
        InfluenceTable {
            estimates,
            samples,
            topic,
        }
    }

    /// Score of `v`; ids outside the table score 1 (only the seed itself).
    pub fn get(&self, v: VertexId) -> f64 {
        self.estimates.get(v as usize).copied().unwrap_or(1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.estimates
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn topic(&self) -> Option<&TopicVector> {
        self.topic.as_ref()
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }
}

/// Live edges of one sampled subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveSubgraph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
}

impl LiveSubgraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Live edges, in sampling order.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Forward-reachable set sizes (self included) for every vertex id.
    pub fn reach_counts(&self) -> Vec<u64> {
        let mut scratch = ReachScratch::new(self.n);
        let mut totals = vec![0u64; self.n];
        scratch.accumulate(&self.edges, &mut totals);
        totals.iter().map(|extra| extra + 1).collect()
    }
}

#[derive(Debug, Clone)]
struct Bucket {
    /// Upper bound on `pp` of every member.
    upper: f64,
    /// `-ln(1 - upper)`; exponential gaps scaled by this are geometric.
    rate: f64,
    edges: Vec<Candidate>,
}

/// `accept` is `pp / upper` as a threshold on a uniform 31-bit draw.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    src: VertexId,
    dst: VertexId,
    accept: u32,
}

const SCALE: f64 = 2147483648.0;

impl Candidate {
    #[inline]
    fn live<R: RngCore>(&self, rng: &mut R) -> bool {
        (rng.next_u32() >> 1) < self.accept
    }
}

/// Draws live-edge subgraphs with `pp(e) = alpha * p(e)`.
///
/// Edges are grouped into buckets `pp in (2^-(b+1), 2^-b]`; inside a bucket
/// candidates are reached by geometric skips at rate `2^-b` and thinned by
/// `pp / 2^-b`, so the cost tracks the number of live edges rather than `m`.
#[derive(Debug, Clone)]
pub struct LiveEdgeSampler {
    n: usize,
    buckets: Vec<Bucket>,
}

const MAX_BUCKET: usize = 48;

impl LiveEdgeSampler {
    pub fn new(graph: &InteractionGraph, alpha: f64) -> Self {
        let mut buckets: Vec<Bucket> = (0..=MAX_BUCKET)
            .map(|b| {
                let upper = 0.5f64.powi(b as i32);
                Bucket {
                    upper,
                    rate: -(-upper).ln_1p(),
                    edges: Vec::new(),
                }
            })
            .collect();
        for (u, v, p) in graph.edges() {
            let pp = (alpha * p).clamp(0.0, 1.0);
            if pp <= 0.0 {
                continue;
            }
            let mut b = ((-pp.log2()).floor().max(0.0) as usize).min(MAX_BUCKET);
            while b > 0 && pp > buckets[b].upper {
                b -= 1;
            }
            let bucket = &mut buckets[b];
            let accept = ((pp / bucket.upper) * SCALE).round() as u32;
            bucket.edges.push(Candidate {
                src: u,
                dst: v,
                accept,
            });
        }
        buckets.retain(|b| !b.edges.is_empty());
        LiveEdgeSampler {
            n: graph.n(),
            buckets,
        }
    }

    fn sample_into<R: RngCore>(&self, rng: &mut R, out: &mut Vec<(VertexId, VertexId)>) {
        out.clear();
        for bucket in &self.buckets {
            if bucket.upper >= 1.0 {
                for c in &bucket.edges {
                    if c.live(rng) {
                        out.push((c.src, c.dst));
                    }
                }
                continue;
            }
            let len = bucket.edges.len();
            let mut j = 0usize;
            loop {
                let x: f64 = Exp1.sample(rng);
                let gap = (x / bucket.rate).floor();
                if gap >= (len - j) as f64 {
                    break;
                }
                j += gap as usize;
                let c = &bucket.edges[j];
                if c.live(rng) {
                    out.push((c.src, c.dst));
                }
                j += 1;
                if j >= len {
                    break;
                }
            }
        }
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> LiveSubgraph {
        let mut edges = Vec::new();
        self.sample_into(rng, &mut edges);
        LiveSubgraph { n: self.n, edges }
    }
}

/// Keeps each edge independently with probability `alpha * p(e)`.
pub fn sample_live_subgraph<R: RngCore>(
    graph: &InteractionGraph,
    alpha: f64,
    rng: &mut R,
) -> LiveSubgraph {
    LiveEdgeSampler::new(graph, alpha).sample(rng)
}

/// Per-vertex forward reachability on sparse live subgraphs, reusing buffers.
struct ReachScratch {
    local: Vec<u32>,
    globals: Vec<VertexId>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    // Tarjan
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
    stack: Vec<u32>,
    call: Vec<(u32, usize)>,
    comp: Vec<u32>,
    comp_size: Vec<u64>,
    // condensation
    comp_offsets: Vec<usize>,
    comp_targets: Vec<u32>,
    member_offsets: Vec<usize>,
    members: Vec<u32>,
    fill: Vec<usize>,
    stamp: Vec<u32>,
    epoch: u32,
    dfs: Vec<u32>,
    // direct search over global ids
    span: Vec<(u32, u32)>,
    out: Vec<VertexId>,
    seen: Vec<u32>,
    sources: Vec<VertexId>,
    counts: Vec<u64>,
}

const UNSET: u32 = u32::MAX;

impl ReachScratch {
    fn new(n: usize) -> Self {
        ReachScratch {
            local: vec![UNSET; n],
            globals: Vec::new(),
            offsets: Vec::new(),
            targets: Vec::new(),
            index: Vec::new(),
            low: Vec::new(),
            on_stack: Vec::new(),
            stack: Vec::new(),
            call: Vec::new(),
            comp: Vec::new(),
            comp_size: Vec::new(),
            comp_offsets: Vec::new(),
            comp_targets: Vec::new(),
            member_offsets: Vec::new(),
            members: Vec::new(),
            fill: Vec::new(),
            stamp: Vec::new(),
            epoch: 0,
            dfs: Vec::new(),
            span: vec![(0, 0); n],
            out: Vec::new(),
            seen: vec![0; n],
            sources: Vec::new(),
            counts: Vec::new(),
        }
    }

    /// One search per source, abandoned once the total work passes a budget
    /// linear in the edge count.
    fn try_direct(&mut self, edges: &[(VertexId, VertexId)]) -> bool {
        // adjacency on global ids: `span[u] = (end, len)` into `out`
        self.sources.clear();
        for &(u, _) in edges {
            let span = &mut self.span[u as usize];
            if span.1 == 0 {
                self.sources.push(u);
            }
            span.1 += 1;
        }
        let mut pos = 0u32;
        for &u in &self.sources {
            self.span[u as usize].0 = pos;
            pos += self.span[u as usize].1;
        }
        self.out.clear();
        self.out.resize(edges.len(), 0);
        for &(u, v) in edges {
            let span = &mut self.span[u as usize];
            self.out[span.0 as usize] = v;
            span.0 += 1;
        }

        let mut budget = 8 * edges.len() + 4096;
        let mut ok = true;
        self.counts.clear();
        'outer: for &u in &self.sources {
            self.epoch = self.epoch.wrapping_add(1);
            if self.epoch == 0 {
                self.seen.fill(0);
                self.epoch = 1;
            }
            let epoch = self.epoch;
            self.seen[u as usize] = epoch;
            self.dfs.clear();
            self.dfs.push(u);
            let mut reached = 0u64;
            while let Some(x) = self.dfs.pop() {
                let (end, len) = self.span[x as usize];
                if len as usize > budget {
                    ok = false;
                    break 'outer;
                }
                budget -= len as usize;
                for &y in &self.out[(end - len) as usize..end as usize] {
                    if self.seen[y as usize] != epoch {
                        self.seen[y as usize] = epoch;
                        reached += 1;
                        if self.span[y as usize].1 > 0 {
                            self.dfs.push(y);
                        }
                    }
                }
            }
            self.counts.push(reached);
        }
        for &u in &self.sources {
            self.span[u as usize] = (0, 0);
        }
        ok
    }

    /// Adds `reach(u) - 1` to `totals[u]` for every endpoint of a live edge.
    fn accumulate(&mut self, edges: &[(VertexId, VertexId)], totals: &mut [u64]) {
        if edges.is_empty() {
            return;
        }
        if self.try_direct(edges) {
            for (&u, &c) in self.sources.iter().zip(&self.counts) {
                totals[u as usize] += c;
            }
            return;
        }
        self.globals.clear();
        for &(u, v) in edges {
            for x in [u, v] {
                if self.local[x as usize] == UNSET {
                    self.local[x as usize] = self.globals.len() as u32;
                    self.globals.push(x);
                }
            }
        }
        let nl = self.globals.len();

        self.offsets.clear();
        self.offsets.resize(nl + 1, 0);
        for &(u, _) in edges {
            self.offsets[self.local[u as usize] as usize + 1] += 1;
        }
        for i in 0..nl {
            self.offsets[i + 1] += self.offsets[i];
        }
        self.targets.clear();
        self.targets.resize(edges.len(), 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.offsets[..nl]);
        for &(u, v) in edges {
            let lu = self.local[u as usize] as usize;
            self.targets[self.fill[lu]] = self.local[v as usize];
            self.fill[lu] += 1;
        }

        self.tarjan(nl);
        let nc = self.comp_size.len();

        // condensed DAG
        self.comp_offsets.clear();
        self.comp_offsets.resize(nc + 1, 0);
        for u in 0..nl {
            let cu = self.comp[u];
            for &v in &self.targets[self.offsets[u]..self.offsets[u + 1]] {
                if self.comp[v as usize] != cu {
                    self.comp_offsets[cu as usize + 1] += 1;
                }
            }
        }
        for i in 0..nc {
            self.comp_offsets[i + 1] += self.comp_offsets[i];
        }
        self.comp_targets.clear();
        self.comp_targets.resize(self.comp_offsets[nc], 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.comp_offsets[..nc]);
        for u in 0..nl {
            let cu = self.comp[u] as usize;
            for &v in &self.targets[self.offsets[u]..self.offsets[u + 1]] {
                let cv = self.comp[v as usize];
                if cv as usize != cu {
                    self.comp_targets[self.fill[cu]] = cv;
                    self.fill[cu] += 1;
                }
            }
        }
        self.member_offsets.clear();
        self.member_offsets.resize(nc + 1, 0);
        for u in 0..nl {
            self.member_offsets[self.comp[u] as usize + 1] += 1;
        }
        for i in 0..nc {
            self.member_offsets[i + 1] += self.member_offsets[i];
        }
        self.members.clear();
        self.members.resize(nl, 0);
        self.fill.clear();
        self.fill.extend_from_slice(&self.member_offsets[..nc]);
        for u in 0..nl {
            let c = self.comp[u] as usize;
            self.members[self.fill[c]] = u as u32;
            self.fill[c] += 1;
        }

        if self.stamp.len() < nc {
            self.stamp.resize(nc, 0);
        }
        for c in 0..nc {
            self.epoch = self.epoch.wrapping_add(1);
            if self.epoch == 0 {
                self.stamp.fill(0);
                self.epoch = 1;
            }
            let epoch = self.epoch;
            let mut reach = 0u64;
            self.dfs.clear();
            self.dfs.push(c as u32);
            self.stamp[c] = epoch;
            while let Some(x) = self.dfs.pop() {
                reach += self.comp_size[x as usize];
                let x = x as usize;
                for &y in &self.comp_targets[self.comp_offsets[x]..self.comp_offsets[x + 1]] {
                    if self.stamp[y as usize] != epoch {
                        self.stamp[y as usize] = epoch;
                        self.dfs.push(y);
                    }
                }
            }
            for &u in &self.members[self.member_offsets[c]..self.member_offsets[c + 1]] {
                totals[self.globals[u as usize] as usize] += reach - 1;
            }
        }

        for &g in &self.globals {
            self.local[g as usize] = UNSET;
        }
    }

    /// Iterative Tarjan over the local graph; fills `comp` and `comp_size`.
    fn tarjan(&mut self, nl: usize) {
        self.index.clear();
        self.index.resize(nl, UNSET);
        self.low.clear();
        self.low.resize(nl, 0);
        self.on_stack.clear();
        self.on_stack.resize(nl, false);
        self.comp.clear();
        self.comp.resize(nl, UNSET);
        self.comp_size.clear();
        self.stack.clear();
        let mut next = 0u32;
        for root in 0..nl as u32 {
            if self.index[root as usize] != UNSET {
                continue;
            }
            self.call.clear();
            self.call.push((root, self.offsets[root as usize]));
            self.index[root as usize] = next;
            self.low[root as usize] = next;
            next += 1;
            self.stack.push(root);
            self.on_stack[root as usize] = true;
            while let Some(&mut (v, ref mut pos)) = self.call.last_mut() {
                let end = self.offsets[v as usize + 1];
                if *pos < end {
                    let w = self.targets[*pos];
                    *pos += 1;
                    if self.index[w as usize] == UNSET {
                        self.index[w as usize] = next;
                        self.low[w as usize] = next;
                        next += 1;
                        self.stack.push(w);
                        self.on_stack[w as usize] = true;
                        self.call.push((w, self.offsets[w as usize]));
                    } else if self.on_stack[w as usize] {
                        let lw = self.index[w as usize];
                        let lv = &mut self.low[v as usize];
                        *lv = (*lv).min(lw);
                    }
                } else {
                    self.call.pop();
                    if let Some(&(parent, _)) = self.call.last() {
                        let lv = self.low[v as usize];
                        let lp = &mut self.low[parent as usize];
                        *lp = (*lp).min(lv);
                    }
                    if self.low[v as usize] == self.index[v as usize] {
                        let id = self.comp_size.len() as u32;
                        let mut size = 0u64;
                        loop {
                            let w = self.stack.pop().expect("tarjan stack");
                            self.on_stack[w as usize] = false;
                            self.comp[w as usize] = id;
                            size += 1;
                            if w == v {
                                break;
                            }
                        }
                        self.comp_size.push(size);
                    }
                }
            }
        }
    }
}

/// Sampled influence estimates with the sample count implied by
/// `(epsilon, delta)` for the graph's vertex id space.
pub fn estimate_influence(graph: &InteractionGraph, params: &SampleParams) -> InfluenceTable {
    let theta = params.sample_count(graph.n());
    estimate_influence_with_samples(graph, params.alpha, params.seed, theta)
}

/// Sampled influence estimates from exactly `samples` live-edge subgraphs.
pub fn estimate_influence_with_samples(
    graph: &InteractionGraph,
    alpha: f64,
    seed: u64,
    samples: usize,
) -> InfluenceTable {
    let n = graph.n();
    let topic = match graph.origin() {
        crate::graph::GraphOrigin::Topic(q) => Some(q.clone()),
        _ => None,
    };
    let samples = samples.max(1);
    if graph.edge_count() == 0 {
        return InfluenceTable::from_parts(vec![1.0; n], samples, topic);
    }
    let sampler = LiveEdgeSampler::new(graph, alpha);
    let totals = (0..samples as u64)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], ReachScratch::new(n), Vec::new()),
            |(mut totals, mut scratch, mut buf), i| {
                let mut rng = substream(seed, i);
                sampler.sample_into(&mut rng, &mut buf);
                scratch.accumulate(&buf, &mut totals);
                (totals, scratch, buf)
            },
        )
        .map(|(t, _, _)| t)
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let theta = samples as u64;
    let estimates = totals
        .into_iter()
        .map(|extra| (theta + extra) as f64 / theta as f64)
        .collect();
    InfluenceTable::from_parts(estimates, samples, topic)
}

/// Default cap on the number of edges for exhaustive world enumeration.
pub const EXACT_EDGE_LIMIT: usize = 20;

/// Exact influence of every vertex id by enumerating all `2^m` worlds.
pub fn exact_influence(graph: &InteractionGraph, alpha: f64) -> Result<Vec<f64>> {
    exact_influence_limited(graph, alpha, EXACT_EDGE_LIMIT)
}

pub fn exact_influence_limited(
    graph: &InteractionGraph,
    alpha: f64,
    edge_limit: usize,
) -> Result<Vec<f64>> {
    let m = graph.edge_count();
    if m > edge_limit || m > 30 {
        return Err(Error::GuardExceeded {
            what: "edge count",
            found: m,
            limit: edge_limit.min(30),
        });
    }
    let verts: Vec<VertexId> = graph.vertices().collect();
    if verts.len() > 64 {
        return Err(Error::GuardExceeded {
            what: "vertex count",
            found: verts.len(),
            limit: 64,
        });
    }
    let pos = |v: VertexId| verts.binary_search(&v).expect("edge endpoint is a vertex");
    let edges: Vec<(usize, usize, f64)> = graph
        .edges()
        .map(|(u, v, p)| (pos(u), pos(v), (alpha * p).clamp(0.0, 1.0)))
        .collect();

    let nv = verts.len();
    let mut expected = vec![0.0f64; nv];
    let mut out_mask = vec![0u64; nv];
    for world in 0u64..(1u64 << m) {
        let mut pr = 1.0;
        out_mask.fill(0);
        for (i, &(u, v, pp)) in edges.iter().enumerate() {
            if world >> i & 1 == 1 {
                pr *= pp;
                out_mask[u] |= 1 << v;
            } else {
                pr *= 1.0 - pp;
            }
        }
        if pr == 0.0 {
            continue;
        }
        for (s, acc) in expected.iter_mut().enumerate() {
            let mut seen = 1u64 << s;
            let mut frontier = seen;
            while frontier != 0 {
                let x = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = out_mask[x] & !seen;
                seen |= fresh;
                frontier |= fresh;
            }
            *acc += pr * seen.count_ones() as f64;
        }
    }

    let mut scores = vec![1.0; graph.n()];
    for (i, &v) in verts.iter().enumerate() {
        scores[v as usize] = expected[i];
    }
    Ok(scores)
}

/// Mean number of active vertices over `rounds` independent cascades.
pub fn simulate_ic<R: RngCore>(
    graph: &InteractionGraph,
    seeds: &[VertexId],
    rounds: usize,
    alpha: f64,
    rng: &mut R,
) -> f64 {
    let rounds = rounds.max(1);
    let mut stamp = vec![0u32; graph.n()];
    let mut frontier = Vec::new();
    let mut total = 0u64;
    for round in 1..=rounds as u32 {
        frontier.clear();
        let mut active = 0u64;
        for &s in seeds {
            if stamp[s as usize] != round {
                stamp[s as usize] = round;
                frontier.push(s);
                active += 1;
            }
        }
        while let Some(u) = frontier.pop() {
            let (targets, probs) = graph.out_edges(u);
            for (&v, &p) in targets.iter().zip(probs) {
                if stamp[v as usize] != round && rng.random::<f64>() < alpha * p {
                    stamp[v as usize] = round;
                    frontier.push(v);
                    active += 1;
                }
            }
        }
        total += active;
    }
    total as f64 / rounds as f64
}

/// Influence of a vertex set: the minimum member score.
pub fn community_influence(scores: &[f64], members: &[VertexId]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::invalid("community must be nonempty"));
    }
    Ok(members
        .iter()
        .map(|&v| scores.get(v as usize).copied().unwrap_or(1.0))
        .fold(f64::INFINITY, f64::min))
}
