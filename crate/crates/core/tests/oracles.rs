use optoqht::csl::{csl_delta, CslParams};
use optoqht::inference::gaussian_fidelity;
use optoqht::oracle::{csl_delta_real_space, fock_fidelity, random_gaussian_state, thermal_fidelity};
use optoqht::CovarianceMatrix;

#[test]
fn csl_quadrature_matches_real_space_sampling() {
    let omega = 1.7e6;
    for (r_c, radius) in [(1e-7, 1.5e-7), (1e-7, 5e-8), (2e-7, 3e-7)] {
        let csl = CslParams { gamma_csl: 1e-28, r_c, sphere_radius: radius, mass: 2e-17 };
        let q = csl_delta(&csl, omega, false).unwrap();
        let mc = csl_delta_real_space(&csl, omega, 2_000_000, 99);
        let z = (q - mc.mean).abs() / mc.std_error;
        assert!(z < 4.0, "r_c={r_c} R={radius}: {q} vs {} ± {} ({z:.2}σ)", mc.mean, mc.std_error);
    }
}

#[test]
fn fock_fidelity_matches_closed_form() {
    for seed in 0..6 {
        let a = random_gaussian_state(2, 0.15, 0.15, 300 + seed);
        let b = random_gaussian_state(2, 0.15, 0.15, 400 + seed);
        let fock = fock_fidelity(&a, &b, 18).unwrap();
        let g = gaussian_fidelity(&a, &b).unwrap();
        assert!((g - fock.fidelity).abs() < 1e-4, "seed {seed}: {g} vs {}", fock.fidelity);
        assert!(fock.trace_a > 0.9999 && fock.trace_b > 0.9999);
    }
}

#[test]
fn thermal_pairs_factorise() {
    let cm = |n: f64, m: f64| {
        CovarianceMatrix::new(nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            n + 0.5,
            n + 0.5,
            m + 0.5,
            m + 0.5,
        ])))
        .unwrap()
    };
    let f = gaussian_fidelity(&cm(0.5, 5.0), &cm(1.0, 0.0)).unwrap();
    let expected = thermal_fidelity(0.5, 1.0) * thermal_fidelity(5.0, 0.0);
    assert!((f - expected).abs() < 1e-12);
}
