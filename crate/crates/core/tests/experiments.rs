use std::f64::consts::PI;

use optoqht::experiments::{
    config_hash, emit_csv, preset, run_scenario, sidecar_path, write_csv, ScenarioConfig, SweepResult, TimeGrid,
    CSV_HEADER,
};

fn small_grid() -> TimeGrid {
    TimeGrid::parse("1e-11,1,60,log").unwrap()
}

fn run(name: &str) -> (ScenarioConfig, SweepResult) {
    let mut cfg = preset(name).unwrap();
    cfg.grid = small_grid();
    let res = run_scenario(&cfg).unwrap();
    (cfg, res)
}

fn csv_string(res: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(res, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn empty_result_writes_header_only() {
    let text = csv_string(&SweepResult::default());
    assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn single_row_has_every_column() {
    let (_, mut res) = run("fig2");
    res.rows.truncate(1);
    let text = csv_string(&res);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').count(), CSV_HEADER.len());
    assert!(lines[1].contains(",x_out1,NaN,"), "{}", lines[1]);
}

#[test]
fn csv_round_trips_bit_for_bit() {
    let (_, res) = run("fig3");
    let text = csv_string(&res);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), res.rows.len());
    for (rec, row) in records.iter().zip(&res.rows) {
        let f = |i: usize| rec[i].parse::<f64>().unwrap().to_bits();
        assert_eq!(f(0), row.t.to_bits());
        assert_eq!(&rec[1], row.selector.name());
        assert_eq!(f(2), row.phi.to_bits());
        assert_eq!(rec[6].parse::<u32>().unwrap(), row.n);
        assert_eq!(f(8), row.v0.to_bits());
        assert_eq!(f(9), row.v1.to_bits());
        assert_eq!(f(10), row.fidelity.to_bits());
        assert_eq!(f(11), row.bound.to_bits());
        assert_eq!(f(12), row.p_err.to_bits());
        assert_eq!(f(13), row.q_pct.to_bits());
    }
}

#[test]
fn repeated_runs_are_identical() {
    let (_, a) = run("fig8");
    let (_, b) = run("fig8");
    assert_eq!(csv_string(&a), csv_string(&b));
}

#[test]
fn sidecar_records_configuration() {
    let (cfg, res) = run("fig4");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let side = emit_csv(&res, &cfg, "preset:fig4", 17, &path).unwrap();
    assert_eq!(side, sidecar_path(&path));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(meta["config_sha256"], config_hash(&cfg).unwrap());
    assert_eq!(meta["seed"], 17);
    assert_eq!(meta["rows"], res.rows.len());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv_string(&res));
}

#[test]
fn classical_bound_is_shared_across_presets() {
    // The bound depends only on the thermal reference arm, not on the probe.
    let (_, fig2) = run("fig2");
    let reference: Vec<f64> = fig2.rows.iter().filter(|r| r.n1 == 100.0).map(|r| r.bound).collect();
    for name in ["fig3", "fig6", "fig7"] {
        let (_, res) = run(name);
        let protocols = res.rows.iter().map(|r| (r.protocol, r.phi.to_bits())).collect::<std::collections::BTreeSet<_>>();
        for key in protocols {
            let bounds: Vec<f64> = res
                .rows
                .iter()
                .filter(|r| (r.protocol, r.phi.to_bits()) == key)
                .map(|r| r.bound)
                .collect();
            assert_eq!(bounds, reference, "{name} {key:?}");
        }
    }
}

#[test]
fn toml_scenario_matches_preset() {
    let text = format!(
        "[csl]\ndelta = [1e6]\n[test]\nn = [100]\nalpha = 0.05\n[grid]\nt_min = 1e-11\nt_max = 1.0\npoints = 60\n\
         [[protocol]]\ninput = \"squeezed\"\nselector = \"q_plus\"\nphotons = [100]\nphi = [{PI:?}]\n"
    );
    let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
    let from_toml = run_scenario(&cfg).unwrap();
    let (_, fig3) = run("fig3");
    let pi_rows: Vec<_> = fig3.rows.into_iter().filter(|r| r.phi == PI).collect();
    assert_eq!(from_toml.rows.len(), pi_rows.len());
    for (a, b) in from_toml.rows.iter().zip(&pi_rows) {
        assert_eq!(a.p_err.to_bits(), b.p_err.to_bits());
        assert_eq!(a.bound.to_bits(), b.bound.to_bits());
    }
}

#[test]
fn zero_heating_is_flagged_not_fatal() {
    let mut cfg = preset("fig7").unwrap();
    cfg.grid = small_grid();
    cfg.deltas = vec![0.0];
    let res = run_scenario(&cfg).unwrap();
    assert!(res.rows.iter().all(|r| r.flags.degenerate && r.fidelity == 1.0 && r.bound == 0.5));
    assert!(res.rows.iter().all(|r| (r.p_err - 0.5).abs() < 1e-12));
    assert_eq!(res.flagged(), res.rows.len());
}
