use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamics::graph::angle;
use tamics::testkit::{random_network, random_topic, running_example};
use tamics::*;

fn network_strategy() -> impl Strategy<Value = SocialNetwork> {
    (1usize..12, 0usize..40, 1usize..4, any::<u64>()).prop_map(|(n, m, z, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_network(&mut rng, n, m, z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(net in network_strategy()) {
        let text = net.to_canonical_string();
        let back = SocialNetwork::parse(&text, "mem").unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.fingerprint(), net.fingerprint());
        prop_assert_eq!(back.to_canonical_string(), text);
    }

    #[test]
    fn extracted_probabilities_stay_below_the_supergraph(net in network_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_topic(&mut rng, net.topic_count());
        for f in [Normalization::Clamp, Normalization::Exponential] {
            let g = InteractionGraph::extract(&net, &q, f).unwrap();
            let sup = InteractionGraph::supergraph(&net, f);
            prop_assert_eq!(g.edge_count(), sup.edge_count());
            for (u, v, p) in g.edges() {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(sup.prob(u, v).unwrap() >= p);
            }
        }
    }
}

#[test]
fn supergraph_dominates_on_random_edge_query_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut checked = 0;
    while checked < 1000 {
        let z = rng.random_range(1..=5);
        let net = random_network(&mut rng, 6, 20, z);
        if net.edge_count() == 0 {
            continue;
        }
        let sup = InteractionGraph::supergraph(&net, Normalization::Clamp);
        let q = random_topic(&mut rng, z);
        let g = InteractionGraph::extract(&net, &q, Normalization::Clamp).unwrap();
        let e = rng.random_range(0..net.edge_count());
        let (u, v, _) = net.edge(e);
        assert!(sup.prob(u, v).unwrap() >= g.prob(u, v).unwrap());
        checked += 1;
    }
}

#[test]
fn running_example_probabilities_follow_the_query() {
    let net = running_example();
    assert_eq!((net.vertex_count(), net.edge_count(), net.topic_count()), (7, 13, 2));
    let q = TopicVector::query(vec![0.5, 0.5]).unwrap();
    let g = InteractionGraph::extract(&net, &q, Normalization::Clamp).unwrap();
    assert_eq!(g.prob(5, 2), Some(1.0));
    assert!((g.prob(2, 4).unwrap() - 0.8).abs() < 1e-12);
    assert_eq!(g.prob(2, 1), None);
    let one_hot = TopicVector::query(vec![1.0, 0.0]).unwrap();
    let g1 = InteractionGraph::extract(&net, &one_hot, Normalization::Clamp).unwrap();
    assert!((g1.prob(2, 4).unwrap() - 0.9).abs() < 1e-12);
}

#[test]
fn query_vectors_are_validated() {
    assert!(TopicVector::query(vec![0.5, 0.6]).is_err());
    assert!(TopicVector::query(vec![]).is_err());
    assert!(TopicVector::query(vec![-0.1, 1.1]).is_err());
    assert!(TopicVector::parse_query("0.25, 0.75").is_ok());
    let net = running_example();
    let q = TopicVector::query(vec![0.2, 0.3, 0.5]).unwrap();
    match InteractionGraph::extract(&net, &q, Normalization::Clamp) {
        Err(Error::DimensionMismatch { expected: 2, found: 3 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn parse_errors_name_the_line() {
    let bad = "3 2 1\n0 1 0.5\n0 x 0.5\n";
    match SocialNetwork::parse(bad, "bad.txt") {
        Err(Error::Parse { line: 3, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
    assert!(SocialNetwork::parse("3 1 1\n0 5 0.5\n", "oob").is_err());
    assert!(SocialNetwork::parse("3 1 1\n0 1 -0.5\n", "neg").is_err());
    assert!(SocialNetwork::parse("3 2 1\n0 1 0.5\n", "short").is_err());
}

#[test]
fn fingerprint_tracks_content() {
    let net = running_example();
    let text = net.to_canonical_string().replacen("0.9 0.7", "0.9 0.71", 1);
    let other = SocialNetwork::parse(&text, "changed").unwrap();
    assert_eq!(other.fingerprint().edges, net.fingerprint().edges);
    assert_ne!(other.fingerprint().hash, net.fingerprint().hash);
}

#[test]
fn angle_is_zero_on_parallel_vectors_and_right_on_orthogonal_ones() {
    assert_eq!(angle(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    assert!(angle(&[0.3, 0.7], &[0.6, 1.4]).abs() < 1e-15);
    assert!((angle(&[1.0, 0.0], &[0.0, 1.0]) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn weak_components_ignore_direction() {
    let g = InteractionGraph::from_probabilities(6, &[(0, 1, 0.5), (2, 1, 0.5), (4, 5, 0.5)]).unwrap();
    let parts = g.weak_components(&[0, 1, 2, 3, 4, 5]);
    assert_eq!(parts, vec![vec![0, 1, 2], vec![3], vec![4, 5]]);
}
