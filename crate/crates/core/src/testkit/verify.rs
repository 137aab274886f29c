//! Small-instance oracle suite: each property runs over seeded random cases
//! and stops at the first disagreement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    at_least, brute_force_cores, brute_force_tamics_scored, enum_degree_prob, enum_influence,
    random_network, random_topic, random_uncertain_graph, EnumGuard, Side,
};
use crate::graph::{InteractionGraph, Normalization, VertexId};
use crate::index::{
    build_tie_tree, build_tuc_list, candidate_vertices, read_index, write_index, TieSettings,
};
use crate::influence::{exact_influence, substream, LiveEdgeSampler, SampleParams};
use crate::query::{search_graph, sweep, sweep_reference, ExactOracle, Timings};
use crate::uncertain_core::{
    compute_cores, degree_dp, eta_thresholds, fault, peel_to_cores, PeelState,
};

/// Defects that can be switched on to check the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Degree distributions ignore one incident edge.
    DpBug,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dp-bug" => Ok(Fault::DpBug),
            _ => Err(format!("unknown fault '{s}' (dp-bug)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub cases: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            cases: 100,
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: &'static str,
    /// Cases run (up to and including a failing one).
    pub cases: usize,
    /// First disagreement, if any.
    pub failure: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(), String>;

pub const PROPERTIES: &[(&str, Check)] = &[
    ("dp-tail-vs-enumeration", dp_tail),
    ("removal-update-vs-fresh", removal_update),
    ("cores-vs-brute-force", cores_vs_brute),
    ("eta-threshold-membership", threshold_membership),
    ("sweep-vs-reference", sweep_vs_reference),
    ("exact-influence-agreement", exact_agreement),
    ("tamics-vs-brute-force", tamics_vs_brute),
    ("rr-duality", rr_duality),
    ("tuc-candidate-superset", candidate_superset),
    ("index-roundtrip", index_roundtrip),
];

struct FaultGuard;

impl Drop for FaultGuard {
    fn drop(&mut self) {
        fault::set_dp_fault(false);
    }
}

/// Runs every property on the calling thread.
pub fn run_suite(config: &VerifyConfig) -> Vec<PropertyReport> {
    let _guard = FaultGuard;
    if config.fault == Some(Fault::DpBug) {
        fault::set_dp_fault(true);
    }
    PROPERTIES
        .iter()
        .enumerate()
        .map(|(i, &(name, check))| run_property(name, check, config, i as u64))
        .collect()
}

fn run_property(name: &'static str, check: Check, config: &VerifyConfig, stream: u64) -> PropertyReport {
    for case in 0..config.cases {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (case as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        rng.set_stream(stream);
        if let Err(msg) = check(&mut rng) {
            return PropertyReport {
                name,
                cases: case + 1,
                failure: Some(format!("case {case}: {msg}")),
            };
        }
    }
    PropertyReport {
        name,
        cases: config.cases,
        failure: None,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn dp_tail(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=8);
    let g = random_uncertain_graph(rng, n, 14);
    let guard = EnumGuard::default();
    for v in g.vertices() {
        for k in 1..=4 {
            for l in 1..=4 {
                let dp = degree_dp(&g, v, k, l);
                let want_in = enum_degree_prob(&g, v, k, Side::In, &guard).map_err(|e| e.to_string())?;
                let want_out = enum_degree_prob(&g, v, l, Side::Out, &guard).map_err(|e| e.to_string())?;
                if !close(dp.in_tail(), want_in, 1e-9) || !close(dp.out_tail(), want_out, 1e-9) {
                    return Err(format!(
                        "vertex {v}, k={k}, l={l}: dp ({}, {}) vs enumeration ({want_in}, {want_out})",
                        dp.in_tail(),
                        dp.out_tail()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// A random graph where the first two edges have probability 1 and `1 - 1e-8`.
pub(crate) fn graph_with_extremes(rng: &mut ChaCha8Rng, n: usize, max_edges: usize) -> InteractionGraph {
    let g = random_uncertain_graph(rng, n, max_edges);
    let mut edges: Vec<_> = g.edges().collect();
    if let Some(e) = edges.get_mut(0) {
        e.2 = 1.0;
    }
    if let Some(e) = edges.get_mut(1) {
        e.2 = 1.0 - 1e-8;
    }
    InteractionGraph::from_probabilities(n, &edges).expect("valid")
}

fn prefix_of(probs: &[f64], len: usize) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in probs {
        let mut next = vec![0.0; dist.len() + 1];
        for (i, d) in dist.iter().enumerate() {
            next[i] += d * (1.0 - p);
            next[i + 1] += d * p;
        }
        dist = next;
    }
    dist.resize(len.max(dist.len()), 0.0);
    dist.truncate(len);
    dist
}

fn removal_update(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(3..=8);
    let g = graph_with_extremes(rng, n, 14);

    // single-vertex distributions under edge removals
    for v in g.vertices() {
        let mut dp = degree_dp(&g, v, 4, 4);
        let mut ins: Vec<(VertexId, f64)> = dp.in_edges().to_vec();
        let mut outs: Vec<(VertexId, f64)> = dp.out_edges().to_vec();
        while !ins.is_empty() || !outs.is_empty() {
            let pick_in = !ins.is_empty() && (outs.is_empty() || rng.random_bool(0.5));
            if pick_in {
                let (u, _) = ins.swap_remove(rng.random_range(0..ins.len()));
                dp.remove_in_edge(u).map_err(|e| e.to_string())?;
            } else {
                let (w, _) = outs.swap_remove(rng.random_range(0..outs.len()));
                dp.remove_out_edge(w).map_err(|e| e.to_string())?;
            }
            let probs_in: Vec<f64> = ins.iter().map(|e| e.1).collect();
            let probs_out: Vec<f64> = outs.iter().map(|e| e.1).collect();
            let fresh_in = prefix_of(&probs_in, 4);
            let fresh_out = prefix_of(&probs_out, 4);
            for (a, b) in dp.in_prefix().iter().zip(&fresh_in).chain(dp.out_prefix().iter().zip(&fresh_out)) {
                if !close(*a, *b, 1e-9) {
                    return Err(format!(
                        "vertex {v}: incremental {:?}/{:?} vs fresh {fresh_in:?}/{fresh_out:?}",
                        dp.in_prefix(),
                        dp.out_prefix()
                    ));
                }
            }
        }
    }

    // whole-graph state under vertex removals
    let (k, l) = (rng.random_range(1..=3), rng.random_range(1..=3));
    let mut st = PeelState::new(&g, k, l);
    let mut order: Vec<VertexId> = g.vertices().collect();
    while !order.is_empty() {
        let v = order.swap_remove(rng.random_range(0..order.len()));
        st.remove_vertex(v, |_, _| {});
        for u in st.alive_vertices() {
            let alive_in: Vec<f64> = g.in_edges(u).0.iter().zip(g.in_edges(u).1)
                .filter(|(w, _)| st.is_alive(**w)).map(|(_, p)| *p).collect();
            let alive_out: Vec<f64> = g.out_edges(u).0.iter().zip(g.out_edges(u).1)
                .filter(|(w, _)| st.is_alive(**w)).map(|(_, p)| *p).collect();
            let (ti, to) = (at_least(&alive_in, k), at_least(&alive_out, l));
            if !close(st.in_tail(u), ti, 1e-9) || !close(st.out_tail(u), to, 1e-9) {
                return Err(format!(
                    "after removing {v}: vertex {u} tails ({}, {}) vs fresh ({ti}, {to})",
                    st.in_tail(u),
                    st.out_tail(u)
                ));
            }
        }
    }
    Ok(())
}

fn cores_vs_brute(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(1..=10);
    let g = random_uncertain_graph(rng, n, 24);
    let guard = EnumGuard::default();
    for k in 1..=2 {
        for l in 1..=2 {
            for eta in [0.1, 0.3, 0.6, 0.9] {
                let fast = compute_cores(&g, k, l, eta);
                let slow = brute_force_cores(&g, k, l, eta, &guard).map_err(|e| e.to_string())?;
                if fast != slow {
                    return Err(format!(
                        "k={k} l={l} eta={eta}: peeling {:?} vs enumeration {:?}",
                        fast.cores, slow.cores
                    ));
                }
            }
        }
    }
    Ok(())
}

fn threshold_membership(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=10);
    let g = random_uncertain_graph(rng, n, 24);
    const STEP: f64 = 1e-7;
    for k in 1..=2 {
        for l in 1..=2 {
            let th = eta_thresholds(&g, k, l);
            for v in g.vertices() {
                let t = th.get(v);
                let inside = |eta: f64| compute_cores(&g, k, l, eta).union().binary_search(&v).is_ok();
                if t > 0.0 && !inside(t) {
                    return Err(format!("k={k} l={l}: vertex {v} missing from cores at its threshold {t}"));
                }
                if t + STEP <= 1.0 && inside(t + STEP) {
                    return Err(format!("k={k} l={l}: vertex {v} still in cores above its threshold {t}"));
                }
            }
        }
    }
    Ok(())
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let coarse = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            if coarse {
                rng.random_range(1..=4) as f64
            } else {
                1.0 + 5.0 * rng.random::<f64>()
            }
        })
        .collect()
}

fn sweep_vs_reference(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=14);
    let g = random_uncertain_graph(rng, n, 40);
    let scores = random_scores(rng, n);
    for (k, l) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        for eta in [0.05, 0.2, 0.5] {
            let fast = sweep(peel_to_cores(&g, k, l, eta), eta, &scores);
            let slow = sweep_reference(peel_to_cores(&g, k, l, eta), eta, &scores);
            if fast != slow {
                return Err(format!("k={k} l={l} eta={eta}: {fast:?} vs {slow:?}"));
            }
        }
    }
    Ok(())
}

fn exact_agreement(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=8);
    let g = random_uncertain_graph(rng, n, 14);
    let alpha = if rng.random_bool(0.5) { 1.0 } else { 0.7 };
    let a = exact_influence(&g, alpha).map_err(|e| e.to_string())?;
    let b = enum_influence(&g, alpha, &EnumGuard::default()).map_err(|e| e.to_string())?;
    for v in g.vertices() {
        if !close(a[v as usize], b[v as usize], 1e-9) {
            return Err(format!("vertex {v}: {} vs {}", a[v as usize], b[v as usize]));
        }
    }
    Ok(())
}

/// One random instance of the end-to-end optimality check.
pub fn tamics_case(rng: &mut ChaCha8Rng, max_edges: usize) -> Result<(), String> {
    let n = rng.random_range(2..=10);
    let g = random_uncertain_graph(rng, n, max_edges);
    let k = rng.random_range(1..=2);
    let l = rng.random_range(1..=2);
    let eta = [0.1, 0.3, 0.5][rng.random_range(0..3)];
    let alpha = if rng.random_bool(0.5) { 1.0 } else { 0.7 };
    let oracle = ExactOracle { alpha };
    let found = search_graph(&g, k, l, eta, &oracle, &mut Timings::default()).map_err(|e| e.to_string())?;
    let scores = exact_influence(&g, alpha).map_err(|e| e.to_string())?;
    let best = brute_force_tamics_scored(&g, k, l, eta, scores, &EnumGuard::default())
        .map_err(|e| e.to_string())?;
    match (found, best) {
        (None, None) => Ok(()),
        (Some(c), Some(b)) if c.influence() == b.influence && b.communities.iter().any(|s| s == c.vertices()) => Ok(()),
        (found, best) => Err(format!(
            "k={k} l={l} eta={eta} alpha={alpha}: search {:?} vs enumeration {:?}",
            found.map(|c| (c.vertices().to_vec(), c.influence())),
            best.map(|b| (b.communities, b.influence))
        )),
    }
}

fn tamics_vs_brute(rng: &mut ChaCha8Rng) -> Result<(), String> {
    tamics_case(rng, 16)
}

fn rr_duality(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=30);
    let g = random_uncertain_graph(rng, n, 90);
    let sampler = LiveEdgeSampler::new(&g, 1.0);
    let sub = sampler.sample(&mut substream(rng.random(), 0));
    let mut back = vec![Vec::new(); n];
    for &(u, v) in sub.edges() {
        back[v as usize].push(u);
    }
    let mut count = vec![0u64; n];
    for v in 0..n {
        let mut seen = vec![false; n];
        seen[v] = true;
        let mut todo = vec![v];
        while let Some(x) = todo.pop() {
            count[x] += 1;
            for &u in &back[x] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    todo.push(u as usize);
                }
            }
        }
    }
    let forward = sub.reach_counts();
    if forward != count {
        return Err(format!("forward {forward:?} vs reverse-reachable {count:?}"));
    }
    Ok(())
}

fn candidate_superset(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=12);
    let z = rng.random_range(1..=3);
    let net = random_network(rng, n, 40, z);
    let f = if rng.random_bool(0.5) { Normalization::Clamp } else { Normalization::Exponential };
    let list = build_tuc_list(&InteractionGraph::supergraph(&net, f));
    for _ in 0..5 {
        let q = random_topic(rng, z);
        let g = InteractionGraph::extract(&net, &q, f).map_err(|e| e.to_string())?;
        for k in 1..=2 {
            for l in 1..=2 {
                for eta in [0.1, 0.3, 0.6] {
                    let cand = candidate_vertices(&list, k, l, eta).vertices;
                    for v in compute_cores(&g, k, l, eta).union() {
                        if cand.binary_search(&v).is_err() {
                            return Err(format!("q={:?} k={k} l={l} eta={eta}: core vertex {v} not a candidate", q.as_slice()));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn index_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.random_range(2..=12);
    let z = rng.random_range(1..=3);
    let net = random_network(rng, n, 30, z);
    let f = Normalization::Clamp;
    let tuc = build_tuc_list(&InteractionGraph::supergraph(&net, f));
    let gammas: Vec<_> = (0..rng.random_range(1..=6)).map(|_| random_topic(rng, z)).collect();
    let settings = TieSettings {
        leaf_capacity: rng.random_range(1..=3),
        normalization: f,
        params: SampleParams::new(0.3, 0.3, 1.0, rng.random()).map_err(|e| e.to_string())?,
    };
    let tie = build_tie_tree(&net, gammas, settings).map_err(|e| e.to_string())?;
    let fp = net.fingerprint();
    let mut bytes = Vec::new();
    write_index(&mut bytes, &fp, &tuc, &tie).map_err(|e| e.to_string())?;
    let back = read_index(bytes.as_slice(), Some(&fp)).map_err(|e| e.to_string())?;
    if back.tuc != tuc || back.tie != tie {
        return Err("loaded index differs from the saved one".into());
    }
    let mut again = Vec::new();
    write_index(&mut again, &fp, &back.tuc, &back.tie).map_err(|e| e.to_string())?;
    if again != bytes {
        return Err("re-saved index bytes differ".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let reports = run_suite(&VerifyConfig {
            cases: 20,
            seed: 1,
            fault: None,
        });
        for r in &reports {
            assert!(r.passed(), "{}: {:?}", r.name, r.failure);
        }
    }

    #[test]
    fn injected_dp_fault_is_caught() {
        let reports = run_suite(&VerifyConfig {
            cases: 20,
            seed: 1,
            fault: Some(Fault::DpBug),
        });
        let dp = reports.iter().find(|r| r.name == "dp-tail-vs-enumeration").unwrap();
        assert!(!dp.passed());
        // the fault is scoped to the suite run
        let g = InteractionGraph::from_probabilities(2, &[(0, 1, 0.5)]).unwrap();
        assert_eq!(degree_dp(&g, 1, 1, 1).in_tail(), 0.5);
    }
}
