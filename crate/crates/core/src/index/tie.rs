//! Cone tree over representative topic vectors; leaves keep influence tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{angle, InteractionGraph, Normalization, SocialNetwork, TopicVector};
use crate::influence::{estimate_influence, InfluenceTable, SampleParams};

/// Stream reserved for pivot selection, away from the sampling streams.
const PIVOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum TieChildren {
    Leaf,
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieNode {
    /// Indices into the tree's topic vectors, ascending.
    pub members: Vec<usize>,
    /// Mean of the member vectors.
    pub axis: Vec<f64>,
    /// Largest angle between the axis and a member.
    pub aperture: f64,
    pub children: TieChildren,
}

impl TieNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.children, TieChildren::Leaf)
    }
}

/// Settings a tree was built with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieSettings {
    pub leaf_capacity: usize,
    pub normalization: Normalization,
    pub params: SampleParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieTree {
    settings: TieSettings,
    gammas: Vec<TopicVector>,
    /// Node 0 is the root.
    nodes: Vec<TieNode>,
    /// One table per topic vector, in the same order.
    tables: Vec<InfluenceTable>,
}

impl TieTree {
    pub fn from_parts(
        settings: TieSettings,
        gammas: Vec<TopicVector>,
        nodes: Vec<TieNode>,
        tables: Vec<InfluenceTable>,
    ) -> Result<Self> {
        if gammas.is_empty() || nodes.is_empty() || tables.len() != gammas.len() {
            return Err(Error::invalid("tree needs one table per topic vector and a root"));
        }
        Ok(TieTree {
            settings,
            gammas,
            nodes,
            tables,
        })
    }

    pub fn settings(&self) -> &TieSettings {
        &self.settings
    }

    pub fn gammas(&self) -> &[TopicVector] {
        &self.gammas
    }

    pub fn nodes(&self) -> &[TieNode] {
        &self.nodes
    }

    pub fn tables(&self) -> &[InfluenceTable] {
        &self.tables
    }

    pub fn table(&self, gamma: usize) -> &InfluenceTable {
        &self.tables[gamma]
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }
}

fn mean(gammas: &[TopicVector], members: &[usize]) -> Vec<f64> {
    let dim = gammas[members[0]].dim();
    let mut mu = vec![0.0; dim];
    for &i in members {
        for (m, x) in mu.iter_mut().zip(gammas[i].as_slice()) {
            *m += x;
        }
    }
    for m in &mut mu {
        *m /= members.len() as f64;
    }
    mu
}

fn farthest(gammas: &[TopicVector], members: &[usize], from: usize) -> usize {
    let mut best = from;
    let mut best_angle = -1.0;
    for &i in members {
        let a = angle(gammas[from].as_slice(), gammas[i].as_slice());
        if a > best_angle {
            best_angle = a;
            best = i;
        }
    }
    best
}

/// Splits vector sets larger than `leaf_capacity` around a random pivot and
/// the member farthest from it. Sets that cannot be split (all members on
/// the pivot's side) become leaves.
pub fn build_cone_tree(
    gammas: &[TopicVector],
    leaf_capacity: usize,
    seed: u64,
) -> Result<Vec<TieNode>> {
    if gammas.is_empty() {
        return Err(Error::invalid("no topic vectors"));
    }
    if leaf_capacity == 0 {
        return Err(Error::invalid("leaf capacity must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PIVOT_STREAM);
    let mut nodes = Vec::new();
    split(gammas, (0..gammas.len()).collect(), leaf_capacity, &mut rng, &mut nodes);
    Ok(nodes)
}

fn split(
    gammas: &[TopicVector],
    members: Vec<usize>,
    cap: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<TieNode>,
) -> usize {
    let axis = mean(gammas, &members);
    let aperture = members
        .iter()
        .map(|&i| angle(&axis, gammas[i].as_slice()))
        .fold(0.0, f64::max);
    let id = nodes.len();
    nodes.push(TieNode {
        members: members.clone(),
        axis,
        aperture,
        children: TieChildren::Leaf,
    });
    if members.len() <= cap {
        return id;
    }
    let x = members[rng.random_range(0..members.len())];
    let y = farthest(gammas, &members, x);
    let (sx, sy): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&i| {
        let g = gammas[i].as_slice();
        angle(g, gammas[x].as_slice()) <= angle(g, gammas[y].as_slice())
    });
    if sy.is_empty() {
        return id;
    }
    let left = split(gammas, sx, cap, rng, nodes);
    let right = split(gammas, sy, cap, rng, nodes);
    nodes[id].children = TieChildren::Internal { left, right };
    id
}

/// Builds the cone tree and an influence table for every topic vector.
pub fn build_tie_tree(
    net: &SocialNetwork,
    gammas: Vec<TopicVector>,
    settings: TieSettings,
) -> Result<TieTree> {
    settings.params.validate()?;
    let nodes = build_cone_tree(&gammas, settings.leaf_capacity, settings.params.seed)?;
    let tables = gammas
        .par_iter()
        .map(|g| {
            let graph = InteractionGraph::extract(net, g, settings.normalization)?;
            Ok(estimate_influence(&graph, &settings.params))
        })
        .collect::<Result<Vec<_>>>()?;
    TieTree::from_parts(settings, gammas, nodes, tables)
}

/// Greedy descent towards the child axis closer in angle, then the closest
/// member of the leaf. Ties go left, then to the lower index.
pub fn nearest_topic_vector<'t>(
    tree: &'t TieTree,
    q: &TopicVector,
) -> (usize, &'t InfluenceTable) {
    let gamma = descend(tree.nodes(), tree.gammas(), q);
    (gamma, tree.table(gamma))
}

pub(crate) fn descend(nodes: &[TieNode], gammas: &[TopicVector], q: &TopicVector) -> usize {
    let q = q.as_slice();
    let mut cur = 0;
    while let TieChildren::Internal { left, right } = nodes[cur].children {
        cur = if angle(&nodes[left].axis, q) <= angle(&nodes[right].axis, q) {
            left
        } else {
            right
        };
    }
    let mut best = nodes[cur].members[0];
    let mut best_angle = f64::INFINITY;
    for &i in &nodes[cur].members {
        let a = angle(gammas[i].as_slice(), q);
        if a < best_angle {
            best_angle = a;
            best = i;
        }
    }
    best
}

/// Checks the structural invariants of a node array: children partition
/// their parent, leaves respect the capacity unless unsplittable, and every
/// aperture covers its members.
pub fn check_structure(nodes: &[TieNode], gammas: &[TopicVector], cap: usize) -> Result<()> {
    let fail = |msg: String| Err(Error::invalid(msg));
    let mut reached = vec![0usize; gammas.len()];
    for (id, node) in nodes.iter().enumerate() {
        for &i in &node.members {
            let a = angle(&node.axis, gammas[i].as_slice());
            if a > node.aperture + 1e-12 {
                return fail(format!("node {id}: member {i} at angle {a} beyond aperture"));
            }
        }
        match node.children {
            TieChildren::Leaf => {
                for &i in &node.members {
                    reached[i] += 1;
                }
                if node.members.len() > cap {
                    let first = gammas[node.members[0]].as_slice();
                    let all_same = node
                        .members
                        .iter()
                        .all(|&i| angle(first, gammas[i].as_slice()) == 0.0);
                    if !all_same {
                        return fail(format!("leaf {id} exceeds capacity"));
                    }
                }
            }
            TieChildren::Internal { left, right } => {
                let mut union: Vec<usize> = nodes[left]
                    .members
                    .iter()
                    .chain(&nodes[right].members)
                    .copied()
                    .collect();
                union.sort_unstable();
                if union != node.members || nodes[left].members.is_empty() || nodes[right].members.is_empty() {
                    return fail(format!("children of node {id} do not partition it"));
                }
            }
        }
    }
    if let Some(i) = reached.iter().position(|&c| c != 1) {
        return fail(format!("topic vector {i} reached at {} leaves", reached[i]));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(v: &[f64]) -> TopicVector {
        TopicVector::query(v.to_vec()).unwrap()
    }

    fn spread(h: usize) -> Vec<TopicVector> {
        (0..h)
            .map(|i| {
                let a = i as f64 / (h - 1).max(1) as f64;
                tv(&[a, 1.0 - a])
            })
            .collect()
    }

    #[test]
    fn small_set_is_one_leaf() {
        let g = spread(4);
        let nodes = build_cone_tree(&g, 5, 1).unwrap();
        assert_eq!(nodes.len(), 1);
        assert!(nodes[0].is_leaf());
    }

    #[test]
    fn forced_split() {
        let g = spread(2);
        let nodes = build_cone_tree(&g, 1, 1).unwrap();
        assert_eq!(nodes.len(), 3);
        assert!(nodes[1].is_leaf() && nodes[2].is_leaf());
        check_structure(&nodes, &g, 1).unwrap();
    }

    #[test]
    fn structure_on_many_vectors() {
        let g = spread(200);
        let nodes = build_cone_tree(&g, 5, 7).unwrap();
        check_structure(&nodes, &g, 5).unwrap();
        let mut self_hits = 0;
        for (i, q) in g.iter().enumerate() {
            let found = descend(&nodes, &g, q);
            let leaf = nodes
                .iter()
                .find(|n| n.is_leaf() && n.members.contains(&found))
                .unwrap();
            if leaf.members.contains(&i) {
                assert_eq!(found, i);
                self_hits += 1;
            }
        }
        assert!(self_hits > 0);
    }

    #[test]
    fn duplicates_stay_in_one_leaf() {
        let g = vec![tv(&[0.5, 0.5]); 4];
        let nodes = build_cone_tree(&g, 1, 0).unwrap();
        assert_eq!(nodes.len(), 1);
        check_structure(&nodes, &g, 1).unwrap();
    }
}
