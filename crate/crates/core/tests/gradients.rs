mod common;

use common::grad::{kinds, pp_case, scbow_case, TOLERANCE};

#[test]
fn scbow_gradients_match_finite_differences() {
    for kind in kinds() {
        for seed in 0..10 {
            let e = scbow_case(kind, seed);
            assert!(e < TOLERANCE, "{kind} seed {seed}: relative error {e:e}");
        }
    }
}

#[test]
fn pp_gradients_match_finite_differences() {
    for kind in kinds() {
        for seed in 0..10 {
            let e = pp_case(kind, seed);
            assert!(e < TOLERANCE, "{kind} seed {seed}: relative error {e:e}");
        }
    }
}

#[test]
fn gradient_errors_are_well_below_tolerance() {
    let worst = kinds()
        .into_iter()
        .flat_map(|k| (0..10).flat_map(move |s| [scbow_case(k, s), pp_case(k, s)]))
        .fold(0.0, f64::max);
    println!("worst relative gradient error {worst:e}");
    assert!(worst < TOLERANCE);
}
