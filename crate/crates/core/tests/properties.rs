mod support;

use support::PROPERTIES;

fn check(name: &str) {
    let p = PROPERTIES.iter().find(|p| p.name == name).expect("registered property");
    if let Err(e) = (p.check)(p.cases) {
        panic!("{name}: {e}");
    }
}

#[test]
fn state_boundedness() {
    check("state boundedness");
}

#[test]
fn desync_dependency() {
    check("desync dependency");
}

#[test]
fn fading_memory() {
    check("fading memory");
}

#[test]
fn ridge_monotonicity() {
    check("ridge shrinkage monotonicity");
}

#[test]
fn regression_matches_dense_oracle() {
    check("regression vs dense oracle");
}

#[test]
fn least_squares_optimality() {
    check("least-squares optimality");
}

#[test]
fn nmse_scale_invariance() {
    check("nmse scale invariance");
}

#[test]
fn quantizer_idempotence() {
    check("quantizer idempotence");
}

#[test]
fn channel_convolution_oracle() {
    check("channel convolution oracle");
}

#[test]
fn generator_determinism() {
    check("generator determinism");
}

#[test]
fn run_determinism() {
    check("run determinism");
}

#[test]
fn loop_boundedness() {
    check("loop boundedness");
}

#[test]
fn highpass_zero_mean() {
    check("highpass zero mean");
}

#[test]
fn csv_round_trip() {
    check("csv round trip");
}

#[test]
fn concurrency_determinism() {
    check("concurrency determinism");
}

#[test]
fn every_property_has_a_test() {
    assert_eq!(PROPERTIES.len(), 15);
}
