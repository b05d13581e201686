use anosov_lab::cocycle::{a1_experiment, a3_experiment, default_beta, A1Options, A3Options};
use anosov_lab::dynamics::{PhiMode, SetupOptions};
use anosov_lab::exact::cat_map;

#[test]
fn twisted_sum_diverges_along_the_j_itinerary() {
    let opts = A1Options {
        beta: default_beta().unwrap(),
        epsilon: 0.5,
        mode: PhiMode::Analytic,
        n_max: 3000,
        record_every: 10,
        setup: SetupOptions::default(),
    };
    let ex = a1_experiment(&cat_map(), &opts).unwrap();
    let t = &ex.j_trace;
    assert!(ex.itinerary.verified);
    assert!(t.twisted_slope > 0.0);
    assert!(t.final_twisted_norm >= 0.4 * ex.j_count as f64, "{} vs {}", t.final_twisted_norm, ex.j_count);
    assert!(t.final_distortion > 50.0);
    assert!(t.distortion_slope > 0.0);
    assert!(t.dual_path_error < 1e-10 * (1.0 + t.max_twisted_norm));
    assert!(t.max_det_error < 1e-10);
    assert!(ex.all2_trace.max_twisted_norm < 1e-5 * 3000.0);
}

#[test]
fn skew_product_reduces_to_the_rotation_shear_cocycle() {
    let ex = a3_experiment(&A3Options::default()).unwrap();
    assert!(ex.bc.reversed_cubic_identity);
    assert!(ex.invariance_residual < 1e-12, "{}", ex.invariance_residual);
    assert!(ex.structure_residual < 1e-10, "{}", ex.structure_residual);
    assert!(ex.periodic.max_relative_error < 1e-8);
    assert!(ex.cohomology.residual < 1e-10);
    assert!(ex.trace.distortion_slope > 0.0);
}
