//! Social networks with per-edge topic weights, and the uncertain interaction
//! graphs extracted from them.
//!
//! A [`SocialNetwork`] is the deterministic input: directed edges, each carrying
//! a `z`-dimensional nonnegative weight vector. Given a query topic vector `q`
//! and a [`Normalization`] `f`, every edge becomes uncertain with existence
//! probability `f(<w(e), q>)`; edges whose probability is zero are dropped.
//! The same [`InteractionGraph`] type also represents the topic-independent
//! supergraph whose edge probabilities are `f(max_i w_i(e))`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Tolerance on the sum of a query topic vector.
pub const TOPIC_SUM_TOLERANCE: f64 = 1e-9;

/// Marker line that opens the optional per-vertex topic block of a graph file.
pub const VERTEX_TOPICS_MARKER: &str = "#vertex-topics";

/// Monotone map from nonnegative reals onto `[0, 1]` with `f(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Normalization {
    /// `min(x, 1)`
    #[default]
    Clamp,
    /// `1 - exp(-x)`
    Exponential,
}

impl Normalization {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        let y = match self {
            Normalization::Clamp => x.min(1.0),
            Normalization::Exponential => -(-x).exp_m1(),
        };
        // absorb floating-point residue
        y.clamp(0.0, 1.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Normalization::Clamp => "clamp",
            Normalization::Exponential => "exponential",
        }
    }

    pub fn code(self) -> u64 {
        match self {
            Normalization::Clamp => 0,
            Normalization::Exponential => 1,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(Normalization::Clamp),
            1 => Some(Normalization::Exponential),
            _ => None,
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(Normalization::Clamp),
            "exponential" | "exp" => Ok(Normalization::Exponential),
            other => Err(Error::invalid(format!(
                "unknown normalization '{other}' (expected clamp or exponential)"
            ))),
        }
    }
}

/// A topic distribution. Query vectors must sum to one; index vectors only
/// need to be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicVector(Vec<f64>);

impl TopicVector {
    /// Validates a query vector: entries in `[0, 1]` summing to 1 within 1e-9.
    pub fn query(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("topic vector is empty"));
        }
        if let Some(bad) = components
            .iter()
            .find(|c| !c.is_finite() || **c < 0.0 || **c > 1.0)
        {
            return Err(Error::invalid(format!(
                "topic vector component {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > TOPIC_SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "topic vector sums to {sum}, expected 1 within {TOPIC_SUM_TOLERANCE:e}"
            )));
        }
        Ok(TopicVector(components))
    }

    /// Accepts any nonnegative, not-all-zero vector.
    pub fn raw(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("topic vector is empty"));
        }
        if components.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("topic vector has a negative or non-finite entry"));
        }
        if components.iter().all(|c| *c == 0.0) {
            return Err(Error::invalid("topic vector is all zeros"));
        }
        Ok(TopicVector(components))
    }

    /// Parses comma- or whitespace-separated reals as a query vector.
    pub fn parse_query(text: &str) -> Result<Self> {
        let comps = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad topic component '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::query(comps)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        dot(&self.0, w)
    }

    /// Angle in radians between two vectors.
    pub fn angle_to(&self, other: &[f64]) -> f64 {
        angle(&self.0, other)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Angle between two nonzero vectors, in `[0, pi]`.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    // 2 atan2(|a' - b'|, |a' + b'|) over unit vectors stays exact near 0
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x / na, y / nb);
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Deterministic directed network with per-edge topic weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialNetwork {
    n: usize,
    z: usize,
    src: Vec<VertexId>,
    dst: Vec<VertexId>,
    /// Row-major `m x z`.
    weights: Vec<f64>,
    /// Row-major `n x z`, when supplied.
    vertex_topics: Option<Vec<f64>>,
    /// Edge indices grouped by source, each group sorted by destination.
    out_offsets: Vec<usize>,
    out_edges: Vec<u32>,
}

/// One edge as given to [`SocialNetwork::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weights: Vec<f64>,
}

impl SocialNetwork {
    pub fn new(
        n: usize,
        z: usize,
        edges: Vec<WeightedEdge>,
        vertex_topics: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let mut b = NetworkBuilder::new(n, z)?;
        for (i, e) in edges.into_iter().enumerate() {
            b.push_edge(e.src, e.dst, &e.weights)
                .map_err(|msg| Error::invalid(format!("edge {i}: {msg}")))?;
        }
        if let Some(rows) = vertex_topics {
            if rows.len() != n {
                return Err(Error::invalid(format!(
                    "vertex topics: expected {n} rows, got {}",
                    rows.len()
                )));
            }
            for (v, row) in rows.iter().enumerate() {
                b.push_vertex_topics(v as VertexId, row)
                    .map_err(|msg| Error::invalid(format!("vertex topics row {v}: {msg}")))?;
            }
        }
        b.finish().map_err(Error::Invalid)
    }

    /// Reads the text graph format from disk.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the text graph format. `origin` is only used in error messages.
    pub fn parse(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };

        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(err(hline, format!("header must be 'n m z', got '{header}'")));
        }
        let parse_usize = |tok: &str, line: usize, what: &str| {
            tok.parse::<usize>()
                .map_err(|_| err(line, format!("bad {what} '{tok}'")))
        };
        let n = parse_usize(head[0], hline, "vertex count")?;
        let m = parse_usize(head[1], hline, "edge count")?;
        let z = parse_usize(head[2], hline, "topic count")?;

        let mut b = NetworkBuilder::new(n, z).map_err(|e| err(hline, e.to_string()))?;
        let mut weights = Vec::with_capacity(z);
        for read in 0..m {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| err(hline, format!("expected {m} edges, found {read}")))?;
            if line == VERTEX_TOPICS_MARKER {
                return Err(err(ln, format!("expected {m} edges, found {read}")));
            }
            let mut toks = line.split_whitespace();
            let s = toks.next().unwrap_or_default();
            let d = toks
                .next()
                .ok_or_else(|| err(ln, "edge needs 'src dst w1 .. wz'".into()))?;
            let s = parse_vertex(s).map_err(|m| err(ln, m))?;
            let d = parse_vertex(d).map_err(|m| err(ln, m))?;
            weights.clear();
            for t in toks {
                weights.push(
                    t.parse::<f64>()
                        .map_err(|_| err(ln, format!("bad weight '{t}'")))?,
                );
            }
            b.push_edge(s, d, &weights).map_err(|m| err(ln, m))?;
        }

        match lines.next() {
            None => {}
            Some((ln, line)) if line == VERTEX_TOPICS_MARKER => {
                for read in 0..n {
                    let (vl, row) = lines.next().ok_or_else(|| {
                        err(ln, format!("vertex topics: expected {n} rows, found {read}"))
                    })?;
                    let mut toks = row.split_whitespace();
                    let v = parse_vertex(toks.next().unwrap_or_default())
                        .map_err(|m| err(vl, m))?;
                    weights.clear();
                    for t in toks {
                        weights.push(
                            t.parse::<f64>()
                                .map_err(|_| err(vl, format!("bad weight '{t}'")))?,
                        );
                    }
                    b.push_vertex_topics(v, &weights).map_err(|m| err(vl, m))?;
                }
                if let Some((extra, _)) = lines.next() {
                    return Err(err(extra, "unexpected trailing content".into()));
                }
            }
            Some((ln, _)) => {
                return Err(err(ln, format!("more than the declared {m} edges")));
            }
        }

        b.finish().map_err(|m| err(hline, m))
    }

    /// Canonical text serialization; parsing it yields an equal network.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_canonical_string().as_bytes())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = String::with_capacity(self.src.len() * (8 + 10 * self.z));
        let _ = writeln!(s, "{} {} {}", self.n, self.src.len(), self.z);
        for e in 0..self.src.len() {
            let _ = write!(s, "{} {}", self.src[e], self.dst[e]);
            for w in self.weights(e) {
                let _ = write!(s, " {w}");
            }
            s.push('\n');
        }
        if let Some(vt) = &self.vertex_topics {
            s.push_str(VERTEX_TOPICS_MARKER);
            s.push('\n');
            for (v, row) in vt.chunks(self.z).enumerate() {
                let _ = write!(s, "{v}");
                for w in row {
                    let _ = write!(s, " {w}");
                }
                s.push('\n');
            }
        }
        s
    }

    /// Vertex/edge counts plus FNV-1a over the canonical serialization.
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            vertices: self.n as u64,
            edges: self.src.len() as u64,
            hash: fnv1a64(self.to_canonical_string().as_bytes()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    pub fn topic_count(&self) -> usize {
        self.z
    }

    /// `(src, dst, weights)` of edge `e` in file order.
    pub fn edge(&self, e: usize) -> (VertexId, VertexId, &[f64]) {
        (self.src[e], self.dst[e], self.weights(e))
    }

    pub fn weights(&self, e: usize) -> &[f64] {
        &self.weights[e * self.z..(e + 1) * self.z]
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, &[f64])> + '_ {
        (0..self.src.len()).map(move |e| self.edge(e))
    }

    /// Indices of the out-edges of `v`, ordered by destination.
    pub fn out_edge_ids(&self, v: VertexId) -> &[u32] {
        let v = v as usize;
        &self.out_edges[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn vertex_topics(&self, v: VertexId) -> Option<&[f64]> {
        self.vertex_topics
            .as_ref()
            .map(|vt| &vt[v as usize * self.z..(v as usize + 1) * self.z])
    }

    pub fn has_vertex_topics(&self) -> bool {
        self.vertex_topics.is_some()
    }
}

fn parse_vertex(tok: &str) -> std::result::Result<VertexId, String> {
    tok.parse::<VertexId>()
        .map_err(|_| format!("bad vertex id '{tok}'"))
}

struct NetworkBuilder {
    n: usize,
    z: usize,
    src: Vec<VertexId>,
    dst: Vec<VertexId>,
    weights: Vec<f64>,
    seen: HashSet<(VertexId, VertexId)>,
    vertex_topics: Option<Vec<f64>>,
    topic_rows_seen: Vec<bool>,
}

impl NetworkBuilder {
    fn new(n: usize, z: usize) -> Result<Self> {
        if z == 0 {
            return Err(Error::invalid("topic count z must be at least 1"));
        }
        if n > VertexId::MAX as usize {
            return Err(Error::invalid(format!("vertex count {n} exceeds {}", VertexId::MAX)));
        }
        Ok(NetworkBuilder {
            n,
            z,
            src: Vec::new(),
            dst: Vec::new(),
            weights: Vec::new(),
            seen: HashSet::new(),
            vertex_topics: None,
            topic_rows_seen: Vec::new(),
        })
    }

    fn check_weights(&self, w: &[f64]) -> std::result::Result<(), String> {
        if w.len() != self.z {
            return Err(format!(
                "arity mismatch: expected {} weights, got {}",
                self.z,
                w.len()
            ));
        }
        if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(format!("negative or non-finite weight {bad}"));
        }
        Ok(())
    }

    fn push_edge(&mut self, s: VertexId, d: VertexId, w: &[f64]) -> std::result::Result<(), String> {
        if s as usize >= self.n || d as usize >= self.n {
            return Err(format!("vertex id out of range [0, {})", self.n));
        }
        if s == d {
            return Err(format!("self-loop on vertex {s}"));
        }
        self.check_weights(w)?;
        if !self.seen.insert((s, d)) {
            return Err(format!("duplicate edge ({s}, {d})"));
        }
        self.src.push(s);
        self.dst.push(d);
        self.weights.extend_from_slice(w);
        Ok(())
    }

    fn push_vertex_topics(&mut self, v: VertexId, w: &[f64]) -> std::result::Result<(), String> {
        if v as usize >= self.n {
            return Err(format!("vertex id {v} out of range [0, {})", self.n));
        }
        self.check_weights(w)?;
        let vt = self
            .vertex_topics
            .get_or_insert_with(|| vec![0.0; self.n * self.z]);
        if self.topic_rows_seen.is_empty() {
            self.topic_rows_seen = vec![false; self.n];
        }
        if std::mem::replace(&mut self.topic_rows_seen[v as usize], true) {
            return Err(format!("duplicate vertex topic row for {v}"));
        }
        vt[v as usize * self.z..(v as usize + 1) * self.z].copy_from_slice(w);
        Ok(())
    }

    fn finish(self) -> std::result::Result<SocialNetwork, String> {
        if self.vertex_topics.is_some() && self.topic_rows_seen.iter().any(|s| !s) {
            return Err("vertex topic block does not cover every vertex".into());
        }
        let m = self.src.len();
        let mut out_offsets = vec![0usize; self.n + 1];
        for &s in &self.src {
            out_offsets[s as usize + 1] += 1;
        }
        for i in 0..self.n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let mut fill = out_offsets.clone();
        let mut out_edges = vec![0u32; m];
        for e in 0..m {
            let s = self.src[e] as usize;
            out_edges[fill[s]] = e as u32;
            fill[s] += 1;
        }
        for v in 0..self.n {
            out_edges[out_offsets[v]..out_offsets[v + 1]].sort_unstable_by_key(|&e| self.dst[e as usize]);
        }
        Ok(SocialNetwork {
            n: self.n,
            z: self.z,
            src: self.src,
            dst: self.dst,
            weights: self.weights,
            vertex_topics: self.vertex_topics,
            out_offsets,
            out_edges,
        })
    }
}

/// Identity of a network as recorded in index files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub vertices: u64,
    pub edges: u64,
    pub hash: u64,
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Where an interaction graph's probabilities came from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphOrigin {
    Topic(TopicVector),
    Supergraph,
    Explicit,
}

/// Uncertain directed graph over the vertex id space `[0, n)`.
///
/// Only vertices incident to a kept edge belong to the graph. Adjacency is
/// stored twice (CSR by source and by destination), each list sorted by
/// neighbor id; every stored probability lies in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    present: Vec<bool>,
    vertex_count: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<VertexId>,
    out_probs: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<VertexId>,
    in_probs: Vec<f64>,
    origin: GraphOrigin,
}

impl InteractionGraph {
    /// `p(e) = f(<w(e), q>)`; edges with `p = 0` are dropped.
    pub fn extract(net: &SocialNetwork, q: &TopicVector, f: Normalization) -> Result<Self> {
        check_dim(net, q)?;
        let edges = net
            .edges()
            .map(|(s, d, w)| (s, d, f.apply(q.dot(w))))
            .collect();
        Ok(Self::build(net.n, edges, GraphOrigin::Topic(q.clone())))
    }

    /// `p(e) = f(max_i w_i(e))`: dominates the extraction for every query vector.
    pub fn supergraph(net: &SocialNetwork, f: Normalization) -> Self {
        let edges = net
            .edges()
            .map(|(s, d, w)| (s, d, f.apply(w.iter().copied().fold(0.0, f64::max))))
            .collect();
        Self::build(net.n, edges, GraphOrigin::Supergraph)
    }

    /// Extraction restricted to edges with both endpoints in `vertices`.
    pub fn extract_induced(
        net: &SocialNetwork,
        q: &TopicVector,
        f: Normalization,
        vertices: &[VertexId],
    ) -> Result<Self> {
        check_dim(net, q)?;
        let mut member = vec![false; net.n];
        for &v in vertices {
            member[v as usize] = true;
        }
        let mut edges = Vec::new();
        for &u in vertices {
            for &e in net.out_edge_ids(u) {
                let (s, d, w) = net.edge(e as usize);
                if member[d as usize] {
                    edges.push((s, d, f.apply(q.dot(w))));
                }
            }
        }
        Ok(Self::build(net.n, edges, GraphOrigin::Topic(q.clone())))
    }

    /// Builds a graph from explicit probabilities. Rejects self-loops,
    /// duplicate pairs and probabilities outside `[0, 1]`; zero-probability
    /// edges are dropped.
    pub fn from_probabilities(n: usize, edges: &[(VertexId, VertexId, f64)]) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(s, d, p) in edges {
            if s as usize >= n || d as usize >= n {
                return Err(Error::invalid(format!("edge ({s}, {d}) out of range [0, {n})")));
            }
            if s == d {
                return Err(Error::invalid(format!("self-loop on vertex {s}")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("probability {p} of ({s}, {d}) outside [0, 1]")));
            }
            if !seen.insert((s, d)) {
                return Err(Error::invalid(format!("duplicate edge ({s}, {d})")));
            }
        }
        Ok(Self::build(n, edges.to_vec(), GraphOrigin::Explicit))
    }

    fn build(n: usize, mut edges: Vec<(VertexId, VertexId, f64)>, origin: GraphOrigin) -> Self {
        edges.retain(|e| e.2 > 0.0);
        edges.sort_unstable_by_key(|e| (e.0, e.1));

        let mut present = vec![false; n];
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(s, d, _) in &edges {
            present[s as usize] = true;
            present[d as usize] = true;
            out_offsets[s as usize + 1] += 1;
            in_offsets[d as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets = edges.iter().map(|e| e.1).collect();
        let out_probs = edges.iter().map(|e| e.2).collect();

        // sources arrive in ascending order, so each in-list ends up sorted
        let m = edges.len();
        let mut in_sources = vec![0; m];
        let mut in_probs = vec![0.0; m];
        let mut fill = in_offsets.clone();
        for &(s, d, p) in &edges {
            let slot = &mut fill[d as usize];
            in_sources[*slot] = s;
            in_probs[*slot] = p;
            *slot += 1;
        }

        let vertex_count = present.iter().filter(|p| **p).count();
        InteractionGraph {
            n,
            present,
            vertex_count,
            out_offsets,
            out_targets,
            out_probs,
            in_offsets,
            in_sources,
            in_probs,
            origin,
        }
    }

    /// Size of the vertex id space.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of vertices incident to at least one edge.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.present.get(v as usize).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n as VertexId).filter(move |&v| self.present[v as usize])
    }

    pub fn origin(&self) -> &GraphOrigin {
        &self.origin
    }

    /// Out-neighbors of `v` with their probabilities, ascending by id.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> (&[VertexId], &[f64]) {
        let r = self.out_offsets[v as usize]..self.out_offsets[v as usize + 1];
        (&self.out_targets[r.clone()], &self.out_probs[r])
    }

    /// In-neighbors of `v` with their probabilities, ascending by id.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> (&[VertexId], &[f64]) {
        let r = self.in_offsets[v as usize]..self.in_offsets[v as usize + 1];
        (&self.in_sources[r.clone()], &self.in_probs[r])
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Probability of edge `(u, v)`, if present.
    pub fn prob(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let (targets, probs) = self.out_edges(u);
        targets.binary_search(&v).ok().map(|i| probs[i])
    }

    /// All edges, ordered by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.n as VertexId).flat_map(move |u| {
            let (t, p) = self.out_edges(u);
            t.iter().zip(p).map(move |(&v, &p)| (u, v, p))
        })
    }

    /// Line-oriented dump used for determinism checks.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.edge_count());
        for (u, v, p) in self.edges() {
            let _ = writeln!(s, "{u} {v} {p:?}");
        }
        s
    }

    /// Weakly connected components of the subgraph induced by `members`.
    /// Components are sorted internally and ordered by smallest vertex.
    pub fn weak_components(&self, members: &[VertexId]) -> Vec<Vec<VertexId>> {
        let mut inside = vec![false; self.n];
        for &v in members {
            inside[v as usize] = true;
        }
        self.weak_components_where(members.iter().copied(), |v| inside[v as usize])
    }

    /// Direction-blind BFS over vertices accepted by `alive`, seeded from
    /// `seeds` in order.
    pub(crate) fn weak_components_where(
        &self,
        seeds: impl IntoIterator<Item = VertexId>,
        alive: impl Fn(VertexId) -> bool,
    ) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        let mut queue = Vec::new();
        for s in seeds {
            if seen[s as usize] || !alive(s) {
                continue;
            }
            seen[s as usize] = true;
            queue.clear();
            queue.push(s);
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                let nbrs = self.out_edges(u).0.iter().chain(self.in_edges(u).0);
                for &w in nbrs {
                    if !seen[w as usize] && alive(w) {
                        seen[w as usize] = true;
                        queue.push(w);
                    }
                }
            }
            let mut comp = queue.clone();
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_unstable_by_key(|c| c[0]);
        comps
    }
}

fn check_dim(net: &SocialNetwork, q: &TopicVector) -> Result<()> {
    if q.dim() != net.z {
        return Err(Error::DimensionMismatch {
            expected: net.z,
            found: q.dim(),
        });
    }
    Ok(())
}

/// A candidate or answer community: a vertex set scored by the minimum of
/// its members' influence scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    vertices: Vec<VertexId>,
    member_scores: Vec<f64>,
    influence: f64,
}

impl Community {
    /// `scores` is indexed by vertex id.
    pub fn new(mut vertices: Vec<VertexId>, scores: &[f64]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("community must be nonempty"));
        }
        vertices.sort_unstable();
        vertices.dedup();
        let member_scores: Vec<f64> = vertices.iter().map(|&v| scores[v as usize]).collect();
        let influence = member_scores.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Community {
            vertices,
            member_scores,
            influence,
        })
    }

    /// Ascending vertex ids.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn member_scores(&self) -> &[f64] {
        &self.member_scores
    }

    pub fn influence(&self) -> f64 {
        self.influence
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Quality figures reported for a community.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityStats {
    pub size: usize,
    /// `|E_C| / (|V_C| (|V_C| - 1))`, 0 for singletons.
    pub density: f64,
    pub influence: f64,
    /// Mean of `f(<w(u), q>)` over members; only with vertex topics.
    pub similarity: Option<f64>,
}

pub fn community_stats(
    c: &Community,
    graph: &InteractionGraph,
    net: &SocialNetwork,
    q: &TopicVector,
    f: Normalization,
) -> CommunityStats {
    let size = c.len();
    let density = if size < 2 {
        0.0
    } else {
        let members = c.vertices();
        let induced: usize = members
            .iter()
            .map(|&u| {
                graph
                    .out_edges(u)
                    .0
                    .iter()
                    .filter(|w| members.binary_search(w).is_ok())
                    .count()
            })
            .sum();
        induced as f64 / (size as f64 * (size as f64 - 1.0))
    };
    let similarity = net.has_vertex_topics().then(|| {
        let total: f64 = c
            .vertices()
            .iter()
            .map(|&u| f.apply(q.dot(net.vertex_topics(u).unwrap_or_default())))
            .sum();
        total / size as f64
    });
    CommunityStats {
        size,
        density,
        influence: c.influence(),
        similarity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(text: &str) -> Result<SocialNetwork> {
        SocialNetwork::parse(text, "test.txt")
    }

    #[test]
    fn parses_header_and_edges() {
        let g = net("3 2 2\n0 1 0.5 0.5\n1 2 1.0 0.0\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count(), g.topic_count()), (3, 2, 2));
        assert_eq!(g.edge(1), (1, 2, &[1.0, 0.0][..]));
    }

    #[test]
    fn rejects_self_loop_with_line_number() {
        let e = net("3 1 2\n0 0 1.0 1.0\n").unwrap_err();
        match e {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("self-loop"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_arity_mismatch() {
        let e = net("3 1 2\n0 1 0.1 0.2 0.3\n").unwrap_err();
        assert!(e.to_string().contains("arity"), "{e}");
    }

    #[test]
    fn rejects_duplicates_and_negative_weights() {
        let e = net("3 2 1\n0 1 0.5\n0 1 0.7\n").unwrap_err();
        assert!(e.to_string().contains("line 3") && e.to_string().contains("duplicate"), "{e}");
        let e = net("3 1 1\n0 1 -0.5\n").unwrap_err();
        assert!(e.to_string().contains("negative"), "{e}");
    }

    #[test]
    fn rejects_bad_counts_and_zero_topics() {
        assert!(net("3 2 1\n0 1 0.5\n").is_err());
        assert!(net("3 1 1\n0 1 0.5\n1 2 0.5\n").is_err());
        assert!(net("3 0 0\n").is_err());
        assert!(net("3 1 1\n0 7 0.5\n").is_err());
    }

    #[test]
    fn vertex_topic_block_round_trips() {
        let text = "2 1 2\n0 1 0.5 0.25\n#vertex-topics\n1 0 1\n0 0.5 0.5\n";
        let g = net(text).unwrap();
        assert_eq!(g.vertex_topics(1), Some(&[0.0, 1.0][..]));
        let again = net(&g.to_canonical_string()).unwrap();
        assert_eq!(g, again);
        assert!(net("2 1 2\n0 1 0.5 0.25\n#vertex-topics\n1 0 1\n").is_err());
    }

    #[test]
    fn extraction_applies_dot_product_and_drops_zero_edges() {
        let g = net("3 2 2\n0 1 0.8 0.4\n1 2 0 0\n").unwrap();
        let q = TopicVector::query(vec![0.5, 0.5]).unwrap();
        let ig = InteractionGraph::extract(&g, &q, Normalization::Clamp).unwrap();
        assert_eq!(ig.edge_count(), 1);
        assert!((ig.prob(0, 1).unwrap() - 0.6).abs() < 1e-15);
        assert!(!ig.contains(2));
        assert_eq!(ig.vertex_count(), 2);
    }

    #[test]
    fn extraction_checks_dimension() {
        let g = net("2 1 2\n0 1 0.8 0.4\n").unwrap();
        let q = TopicVector::query(vec![1.0]).unwrap();
        assert!(matches!(
            InteractionGraph::extract(&g, &q, Normalization::Clamp),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn supergraph_takes_max_weight() {
        let g = net("2 1 2\n0 1 0.8 0.4\n").unwrap();
        let sg = InteractionGraph::supergraph(&g, Normalization::Clamp);
        assert_eq!(sg.prob(0, 1), Some(0.8));
    }

    #[test]
    fn single_topic_supergraph_matches_extraction() {
        let g = net("3 3 1\n0 1 0.3\n1 2 1.7\n2 0 0.05\n").unwrap();
        let q = TopicVector::query(vec![1.0]).unwrap();
        for f in [Normalization::Clamp, Normalization::Exponential] {
            let a = InteractionGraph::supergraph(&g, f);
            let b = InteractionGraph::extract(&g, &q, f).unwrap();
            assert_eq!(a.to_canonical_string(), b.to_canonical_string());
        }
    }

    #[test]
    fn query_vector_validation() {
        assert!(TopicVector::query(vec![0.5, 0.5]).is_ok());
        assert!(TopicVector::query(vec![0.5, 0.4]).is_err());
        assert!(TopicVector::query(vec![1.5, -0.5]).is_err());
        assert!(TopicVector::parse_query("0.2, 0.8").is_ok());
        assert!(TopicVector::parse_query("0.2,x").is_err());
    }

    #[test]
    fn density_conventions() {
        let scores = vec![1.0; 4];
        let ig = InteractionGraph::from_probabilities(
            4,
            &[(0, 1, 0.5), (1, 0, 0.5), (1, 2, 0.5), (2, 0, 0.5), (2, 3, 0.5)],
        )
        .unwrap();
        let g = net("4 0 1\n").unwrap();
        let q = TopicVector::query(vec![1.0]).unwrap();
        let c = Community::new(vec![0, 1, 2], &scores).unwrap();
        let st = community_stats(&c, &ig, &g, &q, Normalization::Clamp);
        assert!((st.density - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(st.similarity, None);

        let single = Community::new(vec![3], &scores).unwrap();
        assert_eq!(community_stats(&single, &ig, &g, &q, Normalization::Clamp).density, 0.0);

        let tri = InteractionGraph::from_probabilities(
            3,
            &[(0, 1, 0.1), (1, 0, 0.1), (1, 2, 0.1), (2, 1, 0.1), (0, 2, 0.1), (2, 0, 0.1)],
        )
        .unwrap();
        let c = Community::new(vec![0, 1, 2], &scores).unwrap();
        assert_eq!(community_stats(&c, &tri, &g, &q, Normalization::Clamp).density, 1.0);
    }

    #[test]
    fn similarity_uses_vertex_topics() {
        let g = net("2 1 2\n0 1 1 1\n#vertex-topics\n0 1 0\n1 0 0.5\n").unwrap();
        let q = TopicVector::query(vec![0.5, 0.5]).unwrap();
        let ig = InteractionGraph::extract(&g, &q, Normalization::Clamp).unwrap();
        let c = Community::new(vec![0, 1], &[2.0, 3.0]).unwrap();
        let st = community_stats(&c, &ig, &g, &q, Normalization::Clamp);
        assert_eq!(st.influence, 2.0);
        assert!((st.similarity.unwrap() - 0.375).abs() < 1e-15);
    }

    #[test]
    fn community_rejects_empty() {
        assert!(Community::new(vec![], &[]).is_err());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
