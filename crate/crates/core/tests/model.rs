use std::f64::consts::PI;

use optoqht::gaussian::transition;
use optoqht::model::{diffusion_matrix, drift_matrix, initial_state, input_covariance, output_variance};
use optoqht::{InputNoiseSpec, QuadratureSelector, SystemParams};

fn state_at(spec: &InputNoiseSpec, delta: f64, t: f64) -> optoqht::CovarianceMatrix {
    let p = SystemParams::table1();
    let a = drift_matrix(&p);
    let d = diffusion_matrix(&p, delta, &input_covariance(spec, p.kappa).unwrap()).unwrap();
    let s0 = initial_state(&p, delta).unwrap();
    optoqht::CovarianceMatrix::new(transition(&a, &d, t).unwrap().apply(s0.matrix())).unwrap()
}

const TIMES: [f64; 5] = [1e-11, 1e-9, 1e-7, 1e-4, 0.5];

#[test]
fn epr_variances_sum_to_local_ones() {
    use QuadratureSelector::*;
    let kappa = SystemParams::table1().kappa;
    let spec = InputNoiseSpec::squeezed_with_photons(100.0, 5.0 * PI / 6.0).unwrap();
    for t in TIMES {
        let s = state_at(&spec, 1e6, t);
        let v = |sel| output_variance(&s, sel, kappa).unwrap();
        let lhs = v(QPlus) + v(QMinus);
        let rhs = v(XOut1) + v(XOut2);
        assert!(((lhs - rhs) / rhs).abs() < 1e-12, "t={t}");
        let lhs = v(PPlus) + v(PMinus);
        let rhs = v(YOut1) + v(YOut2);
        assert!(((lhs - rhs) / rhs).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn second_cavity_ignores_heating_under_thermal_input() {
    let kappa = SystemParams::table1().kappa;
    let spec = InputNoiseSpec::Thermal { n1: 10.0, n2: 100.0 };
    for t in TIMES {
        let v0 = output_variance(&state_at(&spec, 0.0, t), QuadratureSelector::XOut2, kappa).unwrap();
        let v1 = output_variance(&state_at(&spec, 1e7, t), QuadratureSelector::XOut2, kappa).unwrap();
        assert!(((v0 - v1) / v0).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn squeezing_angle_changes_epr_variance() {
    let kappa = SystemParams::table1().kappa;
    let at = |phi| {
        let spec = InputNoiseSpec::squeezed_with_photons(100.0, phi).unwrap();
        output_variance(&state_at(&spec, 1e6, 1e-9), QuadratureSelector::QPlus, kappa).unwrap()
    };
    let (a, b) = (at(0.0), at(PI));
    assert!((a - b).abs() / a > 1e-3, "{a} vs {b}");
}

#[test]
fn heating_raises_cavity_one_variances() {
    let kappa = SystemParams::table1().kappa;
    let spec = InputNoiseSpec::squeezed_with_photons(100.0, PI).unwrap();
    for sel in [QuadratureSelector::XOut1, QuadratureSelector::QPlus, QuadratureSelector::QMinus] {
        for t in TIMES {
            let v0 = output_variance(&state_at(&spec, 0.0, t), sel, kappa).unwrap();
            let v1 = output_variance(&state_at(&spec, 1e6, t), sel, kappa).unwrap();
            assert!(v1 > v0, "{sel} t={t}: {v1} <= {v0}");
        }
    }
}
