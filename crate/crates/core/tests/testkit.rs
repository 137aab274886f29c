use tamics::testkit::verify::{run_suite, Fault, VerifyConfig, PROPERTIES};
use tamics::testkit::*;
use tamics::*;

#[test]
fn synthetic_graphs_are_reproducible() {
    let a = gen_synthetic(200, 5.0, 4, 9).unwrap();
    let b = gen_synthetic(200, 5.0, 4, 9).unwrap();
    assert_eq!(a.to_canonical_string(), b.to_canonical_string());
    let c = gen_synthetic(200, 5.0, 4, 10).unwrap();
    assert_ne!(a.fingerprint(), c.fingerprint());
}

#[test]
fn synthetic_density_concentrates() {
    // Binomial(9900, 10/99): sd about 30, so 10% is over three sd
    for seed in 0..5 {
        let net = gen_synthetic(100, 10.0, 3, seed).unwrap();
        let m = net.edge_count() as f64;
        assert!((m - 1000.0).abs() <= 100.0, "{m}");
        for (u, v, w) in net.edges() {
            assert_ne!(u, v);
            assert_eq!(w.len(), 3);
            assert!(w.iter().sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn synthetic_rejects_bad_parameters() {
    assert!(gen_synthetic(1, 1.0, 2, 0).is_err());
    assert!(gen_synthetic(10, 1.0, 0, 0).is_err());
    assert!(gen_synthetic(10, 10.0, 2, 0).is_err());
    assert!(gen_synthetic(10, -1.0, 2, 0).is_err());
    assert_eq!(gen_synthetic(10, 0.0, 2, 0).unwrap().edge_count(), 0);
    assert_eq!(gen_synthetic(5, 4.0, 2, 0).unwrap().edge_count(), 20);
}

#[test]
fn enumeration_guards_refuse_large_inputs() {
    let edges: Vec<_> = (0..25u32).map(|i| (i, i + 1, 0.5)).collect();
    let g = InteractionGraph::from_probabilities(26, &edges).unwrap();
    let guard = EnumGuard::default();
    assert!(matches!(
        brute_force_cores(&g, 1, 1, 0.5, &guard),
        Err(Error::GuardExceeded { .. })
    ));
    assert!(matches!(
        enum_influence(&g, 1.0, &guard),
        Err(Error::GuardExceeded { limit: 20, .. })
    ));
    assert!(influence::exact_influence(&g, 1.0).is_err());
}

#[test]
fn two_vertex_oracles() {
    let g = InteractionGraph::from_probabilities(2, &[(0, 1, 0.5)]).unwrap();
    let guard = EnumGuard::default();
    assert_eq!(enum_influence(&g, 1.0, &guard).unwrap(), vec![1.5, 1.0]);
    assert_eq!(enum_degree_prob(&g, 1, 1, Side::In, &guard).unwrap(), 0.5);
    assert_eq!(enum_degree_prob(&g, 1, 1, Side::Out, &guard).unwrap(), 0.0);
    assert_eq!(enum_degree_prob(&g, 1, 0, Side::Out, &guard).unwrap(), 1.0);
}

#[test]
fn brute_force_finds_the_example_answer() {
    let q = TopicVector::query(vec![0.5, 0.5]).unwrap();
    let g = InteractionGraph::extract(&running_example(), &q, Normalization::Clamp).unwrap();
    let best = brute_force_tamics(&g, 1, 2, 0.36, 1.0, &EnumGuard::default())
        .unwrap()
        .unwrap();
    assert_eq!(best.communities, vec![vec![2, 4, 5]]);
    assert!((best.influence - 5.608).abs() < 1e-9);
    assert!(brute_force_tamics(&g, 3, 3, 0.5, 1.0, &EnumGuard::default()).unwrap().is_none());
}

#[test]
fn verify_suite_passes_and_catches_the_injected_fault() {
    let clean = run_suite(&VerifyConfig {
        cases: 15,
        seed: 3,
        fault: None,
    });
    assert_eq!(clean.len(), PROPERTIES.len());
    assert!(clean.iter().all(|r| r.passed()), "{clean:?}");

    let broken = run_suite(&VerifyConfig {
        cases: 15,
        seed: 3,
        fault: Some(Fault::DpBug),
    });
    let failed: Vec<&str> = broken.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    assert!(failed.contains(&"dp-tail-vs-enumeration"), "{failed:?}");

    // the switch does not leak past the run
    let again = run_suite(&VerifyConfig {
        cases: 3,
        seed: 3,
        fault: None,
    });
    assert!(again.iter().all(|r| r.passed()));
}
