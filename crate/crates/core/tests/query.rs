use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamics::index::{build_tie_tree, build_tuc_list, TieSettings};
use tamics::influence::exact_influence;
use tamics::query::{online_query_with, ExactOracle};
use tamics::testkit::verify::tamics_case;
use tamics::testkit::{brute_force_tamics, random_network, random_topic, random_uncertain_graph, running_example, EnumGuard};
use tamics::*;

fn request(q: Vec<f64>, k: usize, l: usize, eta: f64) -> QueryRequest {
    QueryRequest {
        q: TopicVector::query(q).unwrap(),
        k,
        l,
        eta,
        params: SampleParams::default(),
        normalization: Normalization::Clamp,
        mode: QueryMode::Online,
    }
}

#[test]
fn example_answer_is_v2_v4_v5() {
    let net = running_example();
    for eta in [0.36, 0.6] {
        let r = online_query(&net, &request(vec![0.5, 0.5], 1, 2, eta)).unwrap();
        assert_eq!(r.status, QueryStatus::Found);
        assert_eq!(r.community.unwrap().vertices(), &[2, 4, 5]);
    }
}

#[test]
fn example_with_exact_scores() {
    let net = running_example();
    let r = online_query_with(&net, &request(vec![0.5, 0.5], 1, 2, 0.36), &ExactOracle { alpha: 1.0 }).unwrap();
    let c = r.community.unwrap();
    assert_eq!(c.vertices(), &[2, 4, 5]);
    assert!((c.influence() - 5.608).abs() < 1e-9);
}

#[test]
fn too_demanding_parameters_find_nothing() {
    let net = running_example();
    let r = online_query(&net, &request(vec![0.5, 0.5], 3, 3, 0.5)).unwrap();
    assert_eq!(r.status, QueryStatus::NoCoreExists);
    assert!(r.community.is_none());
    assert_eq!(r.timings.influence, std::time::Duration::ZERO);
}

#[test]
fn requests_are_validated() {
    let net = running_example();
    assert!(online_query(&net, &request(vec![0.5, 0.5], 0, 1, 0.5)).is_err());
    assert!(online_query(&net, &request(vec![0.5, 0.5], 1, 1, 0.0)).is_err());
    assert!(online_query(&net, &request(vec![0.5, 0.5], 1, 1, 1.5)).is_err());
    assert!(matches!(
        online_query(&net, &request(vec![1.0], 1, 1, 0.5)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn exact_search_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for case in 0..60 {
        tamics_case(&mut rng, 16).unwrap_or_else(|e| panic!("case {case}: {e}"));
    }
}

#[test]
fn sampled_search_stays_within_twice_epsilon_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let guard = EnumGuard::default();
    let eps = 0.1;
    for case in 0..40 {
        let n = rng.random_range(2..=10);
        let g = random_uncertain_graph(&mut rng, n, 16);
        let (k, l, eta) = (1, 1, 0.2);
        let Some(best) = brute_force_tamics(&g, k, l, eta, 1.0, &guard).unwrap() else {
            continue;
        };
        let oracle = query::RisOracle(SampleParams::new(eps, 0.1, 1.0, case).unwrap());
        let found = query::search_graph(&g, k, l, eta, &oracle, &mut Default::default())
            .unwrap()
            .expect("a core exists");
        let exact = exact_influence(&g, 1.0).unwrap();
        let achieved = found.vertices().iter().map(|&v| exact[v as usize]).fold(f64::INFINITY, f64::min);
        assert!(achieved >= best.influence - 2.0 * eps * n as f64, "case {case}");
    }
}

#[test]
fn indexed_equals_online_for_stored_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let z = rng.random_range(1..=3);
        let net = random_network(&mut rng, 10, 40, z);
        let gammas: Vec<TopicVector> = (0..4).map(|_| random_topic(&mut rng, z)).collect();
        let settings = TieSettings {
            leaf_capacity: 2,
            normalization: Normalization::Clamp,
            params: SampleParams::new(0.2, 0.2, 1.0, rng.random()).unwrap(),
        };
        let tuc = build_tuc_list(&InteractionGraph::supergraph(&net, Normalization::Clamp));
        let tie = build_tie_tree(&net, gammas.clone(), settings).unwrap();
        for g in &gammas {
            for (k, l, eta) in [(1, 1, 0.1), (1, 2, 0.3), (2, 1, 0.05)] {
                let req = QueryRequest {
                    q: g.clone(),
                    k,
                    l,
                    eta,
                    params: settings.params,
                    normalization: Normalization::Clamp,
                    mode: QueryMode::Indexed,
                };
                let on = online_query(&net, &req).unwrap();
                let ix = indexed_query(&net, &req, &tuc, &tie).unwrap();
                assert_eq!(tie.gammas()[ix.probe.as_ref().unwrap().gamma_index], *g);
                assert_eq!(on.community, ix.community);
            }
        }
    }
}

#[test]
fn indexed_query_refuses_a_different_normalization() {
    let net = running_example();
    let settings = TieSettings {
        leaf_capacity: 5,
        normalization: Normalization::Exponential,
        params: SampleParams::default(),
    };
    let tuc = build_tuc_list(&InteractionGraph::supergraph(&net, Normalization::Exponential));
    let tie = build_tie_tree(&net, vec![TopicVector::query(vec![0.5, 0.5]).unwrap()], settings).unwrap();
    let req = request(vec![0.5, 0.5], 1, 2, 0.3);
    assert!(matches!(indexed_query(&net, &req, &tuc, &tie), Err(Error::IndexMismatch(_))));
}
