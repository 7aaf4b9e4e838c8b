use vistac_nnet::gradcheck::{check_primitive, primitives, run_suite};

#[test]
fn every_primitive_matches_finite_differences() {
    let results = run_suite(50, 7);
    for r in &results {
        println!("{:<24} {:?} n={} max_rel={:.3e}", r.primitive, r.shape, r.checked, r.max_rel_error);
    }
    for p in primitives() {
        assert!(results.iter().any(|r| r.primitive == *p), "{p} not covered");
    }
    let worst = results.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    assert!(worst < 1e-4, "worst relative error {worst:e}");
}

#[test]
fn tgcnn_gradients_on_other_seeds() {
    for seed in 100..103 {
        let r = check_primitive("tgcnn", seed);
        assert!(r.max_rel_error < 1e-4, "seed {seed}: {:e}", r.max_rel_error);
    }
}
