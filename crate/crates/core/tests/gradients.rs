mod common;

use common::gradients::{kernel_checks, model_check};

#[test]
fn every_kernel_matches_finite_differences_over_50_seeds() {
    for seed in 0..50 {
        for c in kernel_checks(seed) {
            assert!(c.passed(), "seed {seed}: {} relative error {:e} > {:e}", c.name, c.rel_error, c.tolerance);
        }
    }
}

#[test]
fn assembled_model_matches_finite_differences() {
    for seed in 0..5 {
        let c = model_check(seed);
        assert!(c.passed(), "seed {seed}: relative error {:e}", c.rel_error);
    }
}
