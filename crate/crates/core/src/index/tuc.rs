//! Per-`(k, l)` lists of eta-thresholds over the supergraph.

use rayon::prelude::*;

use crate::graph::{InteractionGraph, VertexId};
use crate::uncertain_core::{dcore_bounds, eta_thresholds, ETA_SLACK};

/// Thresholds of one `(k, l)` cell: strictly ascending nonzero keys, each
/// with the ascending ids of the vertices whose threshold equals it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TucCell {
    keys: Vec<f64>,
    groups: Vec<Vec<VertexId>>,
}

impl TucCell {
    pub fn from_parts(keys: Vec<f64>, groups: Vec<Vec<VertexId>>) -> Self {
        assert_eq!(keys.len(), groups.len());
        TucCell { keys, groups }
    }

    /// Groups vertices by exact threshold value; zero thresholds are left out.
    pub fn from_thresholds(values: &[f64]) -> Self {
        let mut pairs: Vec<(f64, VertexId)> = values
            .iter()
            .enumerate()
            .filter(|(_, t)| **t > 0.0)
            .map(|(v, &t)| (t, v as VertexId))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut cell = TucCell::default();
        for (t, v) in pairs {
            if cell.keys.last() != Some(&t) {
                cell.keys.push(t);
                cell.groups.push(Vec::new());
            }
            cell.groups.last_mut().unwrap().push(v);
        }
        cell
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn groups(&self) -> &[Vec<VertexId>] {
        &self.groups
    }

    /// Index of the first key reaching `eta`, if any.
    pub fn first_at_least(&self, eta: f64) -> Option<usize> {
        let j = self.keys.partition_point(|&key| key < eta - ETA_SLACK);
        (j < self.keys.len()).then_some(j)
    }
}

/// All cells `[1, k_max] x [1, l_max]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TucList {
    k_max: usize,
    l_max: usize,
    cells: Vec<TucCell>,
}

impl TucList {
    /// `cells` in row-major order: `(k, l)` sits at `(k - 1) * l_max + (l - 1)`.
    pub fn from_parts(k_max: usize, l_max: usize, cells: Vec<TucCell>) -> Self {
        assert_eq!(cells.len(), k_max * l_max);
        TucList {
            k_max,
            l_max,
            cells,
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn cells(&self) -> &[TucCell] {
        &self.cells
    }

    pub fn cell(&self, k: usize, l: usize) -> Option<&TucCell> {
        if k == 0 || l == 0 || k > self.k_max || l > self.l_max {
            return None;
        }
        Some(&self.cells[(k - 1) * self.l_max + (l - 1)])
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Runs the threshold computation for every cell, in parallel.
pub fn build_tuc_list(supergraph: &InteractionGraph) -> TucList {
    let (k_max, l_max) = dcore_bounds(supergraph);
    let cells = (0..k_max * l_max)
        .into_par_iter()
        .map(|i| {
            let (k, l) = (i / l_max + 1, i % l_max + 1);
            TucCell::from_thresholds(eta_thresholds(supergraph, k, l).as_slice())
        })
        .collect();
    TucList::from_parts(k_max, l_max, cells)
}

/// Vertices that can belong to some `(k, l, eta)`-core of any extracted graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Candidates {
    /// Position of the first qualifying key in the cell.
    pub j_star: Option<usize>,
    /// Ascending ids.
    pub vertices: Vec<VertexId>,
}

pub fn candidate_vertices(list: &TucList, k: usize, l: usize, eta: f64) -> Candidates {
    let Some(cell) = list.cell(k, l) else {
        return Candidates::default();
    };
    let Some(j) = cell.first_at_least(eta) else {
        return Candidates::default();
    };
    let mut vertices: Vec<VertexId> = cell.groups[j..].iter().flatten().copied().collect();
    vertices.sort_unstable();
    Candidates {
        j_star: Some(j),
        vertices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bidirected_edge() {
        let g = InteractionGraph::from_probabilities(2, &[(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let list = build_tuc_list(&g);
        assert_eq!((list.k_max(), list.l_max()), (1, 1));
        let cell = list.cell(1, 1).unwrap();
        assert_eq!(cell.keys(), &[0.25]);
        assert_eq!(cell.groups(), &[vec![0, 1]]);
    }

    #[test]
    fn empty_graph() {
        let g = InteractionGraph::from_probabilities(3, &[]).unwrap();
        let list = build_tuc_list(&g);
        assert!(list.is_empty());
        assert_eq!((list.k_max(), list.l_max()), (0, 0));
        assert_eq!(candidate_vertices(&list, 1, 1, 0.1), Candidates::default());
    }

    #[test]
    fn lookup_by_eta() {
        let cell = TucCell::from_thresholds(&[0.0, 0.25, 0.6, 0.0, 0.6, 0.6, 0.36]);
        assert_eq!(cell.keys(), &[0.25, 0.36, 0.6]);
        let list = TucList::from_parts(1, 1, vec![cell]);
        let c = candidate_vertices(&list, 1, 1, 0.6);
        assert_eq!(c.j_star, Some(2));
        assert_eq!(c.vertices, vec![2, 4, 5]);
        assert_eq!(candidate_vertices(&list, 1, 1, 0.3).vertices, vec![2, 4, 5, 6]);
        assert_eq!(candidate_vertices(&list, 1, 1, 0.61).vertices, Vec::<VertexId>::new());
        assert!(candidate_vertices(&list, 2, 1, 0.1).vertices.is_empty());
    }
}
