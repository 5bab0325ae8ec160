use ris::exact::ExactInference;
use ris::metrics::post_kld_with_joint;
use ris::netgen;

#[test]
fn twenty_vertex_networks_include_hard_cases() {
    let mut hard = 0;
    for seed in 0..100 {
        let bn = netgen::random_network(20, 30, &[2, 3], seed).unwrap();
        assert_eq!(bn.dag().arc_count(), 30);
        let e = netgen::random_evidence(&bn, 10, seed, false).unwrap();
        assert_eq!(e.len(), 10);
        let joint = ExactInference::new(&bn).posterior_joint(&e).unwrap();
        assert!(joint.evidence_probability() > 0.0);
        if post_kld_with_joint(&bn, &joint).unwrap().total() > 0.1 {
            hard += 1;
        }
    }
    assert!(hard > 0);
}

#[test]
fn generated_rows_are_distributions() {
    for seed in 0..50 {
        let bn = netgen::random_network(12, 20, &[2, 3, 4], seed).unwrap();
        for cpt in bn.cpts() {
            for r in 0..cpt.row_count() {
                let row = cpt.row(r);
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|&p| p >= netgen::ROW_FLOOR * 0.999));
            }
        }
        assert!(!bn.has_zero_entries());
    }
}
