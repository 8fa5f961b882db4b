//! One verdict line per acceptance criterion, at the stated tolerances and
//! on the default preset grids.

use std::time::Instant;

use optoqht::validate::{self, Check};

/// Criteria that are computed faithfully but cannot pass: the reference
/// heating rate lands below the expected band (see README).
const KNOWN_RED: [u32; 1] = [1];

fn merge(parts: Vec<Check>) -> (bool, String) {
    let passed = parts.iter().all(|c| c.passed);
    let detail = parts
        .iter()
        .map(|c| format!("[{}{}] {}", if c.passed { "" } else { "FAIL " }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join(" | ");
    (passed, detail)
}

fn criterion(id: u32, f: impl FnOnce() -> Vec<Check>) -> (u32, bool) {
    let start = Instant::now();
    let (passed, detail) = merge(f());
    let tag = match (passed, KNOWN_RED.contains(&id)) {
        (true, _) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "FAIL (known)",
    };
    println!("{tag} criterion {id:>2} ({:.2} s): {detail}", start.elapsed().as_secs_f64());
    (id, passed)
}

fn main() {
    let results = vec![
        criterion(7, || {
            vec![
                validate::fidelity_thermal_gate(1e-10),
                validate::fidelity_fock_gate(50, 22, 1e-4),
                validate::fidelity_identity_gate(1e-12),
            ]
        }),
        criterion(1, || vec![validate::csl_rate_anchor(10f64.powf(5.5), 10f64.powf(6.5), 1.0)]),
        criterion(2, || vec![validate::fig2_gate(None, 1e-9, 30.0)]),
        criterion(3, || vec![validate::fig3_gate(None, 0.01, 60.0)]),
        criterion(4, || vec![validate::controls_gate(None, 1e-9, f64::INFINITY)]),
        criterion(5, || vec![validate::fig8_gate(None, 0.10, f64::INFINITY)]),
        criterion(6, || vec![validate::sample_size_gate(None, 0.0, f64::INFINITY)]),
        criterion(8, || {
            let mut c = validate::mc_calibration_gate(100_000, 4.0);
            if c.seconds > 60.0 {
                c.passed = false;
                c.detail.push_str("; runtime over 60 s");
            }
            vec![c]
        }),
        criterion(9, || {
            vec![
                validate::lyapunov_gate(1e-10),
                validate::midpoint_gate(1e-9),
                validate::physicality_gate(None),
            ]
        }),
        criterion(10, || {
            vec![validate::trivial_limits_gate(optoqht::experiments::TimeGrid::parse("1e-11,1,40,log").unwrap())]
        }),
    ];
    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(id, passed)| !passed && !KNOWN_RED.contains(id))
        .map(|(id, _)| *id)
        .collect();
    let healed: Vec<u32> = results
        .iter()
        .filter(|(id, passed)| *passed && KNOWN_RED.contains(id))
        .map(|(id, _)| *id)
        .collect();
    if !unexpected.is_empty() || !healed.is_empty() {
        eprintln!("failing criteria: {unexpected:?}; known failures that now pass: {healed:?}");
        std::process::exit(1);
    }
}
