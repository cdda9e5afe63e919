mod common;

#[test]
fn every_layer_passes_finite_differences_over_ten_seeds() {
    let errors = common::layer_gradient_errors(0..10);
    assert_eq!(errors.len(), 11);
    for (name, e) in errors {
        assert!(e < 1e-5, "{name}: {e:e}");
    }
}
