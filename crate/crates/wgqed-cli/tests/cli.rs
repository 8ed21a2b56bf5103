use std::collections::BTreeMap;
use std::process::{Command, Output};

use wgqed::{preset, run_sweep, SweepResult};

fn wgqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgqed"))
        .args(args)
        .output()
        .expect("the binary under test runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

/// Data lines of a CSV emission: everything after the `# key=value` echo and
/// the header row.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn header_row(csv: &str) -> Vec<String> {
    csv.lines()
        .find(|l| !l.starts_with('#') && !l.is_empty())
        .expect("a header row exists")
        .split(',')
        .map(str::to_owned)
        .collect()
}

#[test]
fn help_lists_every_subcommand() {
    let out = wgqed(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for name in [
        "sweep",
        "resonances",
        "bound-states",
        "feshbach-curve",
        "fano-compare",
        "critical-size",
        "verify",
    ] {
        assert!(text.contains(name), "help omits `{name}`");
    }
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let args = ["sweep", "--preset", "fig3b", "--points", "200"];
    let first = wgqed(&args);
    let second = wgqed(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn points_and_set_flags_override_the_preset() {
    let out = wgqed(&[
        "sweep",
        "--preset",
        "fig3a",
        "--points",
        "7",
        "--set",
        "gamma_b=0.02",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(data_rows(&text).len(), 7);
    assert!(
        text.contains("# gamma_b=2.0000000000000000e-2"),
        "parameter echo misses the override:\n{text}"
    );
}

#[test]
fn config_file_drives_a_sweep_and_flags_override_it() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("sweep.json");
    std::fs::write(
        &path,
        r#"{
            "model": "quadratic",
            "axis": "detuning",
            "range": {"start": -0.1, "stop": 0.1, "count": 21},
            "parameters": {"gamma_b": 0.05}
        }"#,
    )
    .expect("config written");
    let path = path.to_str().expect("UTF-8 path");

    let out = wgqed(&["sweep", "--config", path]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout_of(&out)).len(), 21);

    let out = wgqed(&["sweep", "--config", path, "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout_of(&out)).len(), 5);
}

#[test]
fn invalid_config_errors_name_the_offending_field() {
    let dir = tempfile::tempdir().expect("temp dir");

    let reversed = dir.path().join("reversed.json");
    std::fs::write(
        &reversed,
        r#"{"model":"quadratic","axis":"detuning","range":{"start":0.5,"stop":-0.5,"count":10}}"#,
    )
    .expect("config written");
    let out = wgqed(&["sweep", "--config", reversed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("range"));

    let typo = dir.path().join("typo.json");
    std::fs::write(
        &typo,
        r#"{"model":"quadratic","axis":"detuning","range":{"start":-0.5,"stop":0.5,"count":10},"parameters":{"gamma_bee":0.05}}"#,
    )
    .expect("config written");
    let out = wgqed(&["sweep", "--config", typo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("gamma_bee"));
}

#[test]
fn degenerate_range_is_rejected() {
    let out = wgqed(&[
        "sweep",
        "--preset",
        "fig3a",
        "--set",
        "range_start=0.5",
        "--set",
        "range_stop=0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("range"));
}

#[test]
fn unknown_preset_error_lists_the_valid_names() {
    let out = wgqed(&["sweep", "--preset", "fig9z"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("fig9z"));
    assert!(err.contains("fig3b"));
}

#[test]
fn config_and_preset_flags_are_mutually_exclusive() {
    let out = wgqed(&["sweep", "--preset", "fig3a", "--config", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_without_a_source_is_an_error() {
    let out = wgqed(&["sweep"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains("--config") && err.contains("--preset"));
}

#[test]
fn unknown_set_key_is_an_error() {
    let out = wgqed(&["sweep", "--preset", "fig3a", "--set", "lambda=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("lambda"));
}

#[test]
fn linear_coupling_sweep_passes_through_the_equal_rate_point() {
    let out = wgqed(&["sweep", "--preset", "fig2b", "--points", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(header_row(&text)[..4], ["gamma_b", "R", "T", "P_loss"]);
    let rows = data_rows(&text);
    let row = &rows[1];
    let gamma_b: f64 = row[0].parse().unwrap();
    let t: f64 = row[2].parse().unwrap();
    assert_eq!(gamma_b, 0.01);
    assert!((t - 0.25).abs() < 1e-12, "T({gamma_b}) = {t}");
}

#[test]
fn fano_compare_emits_transmission_and_profile_columns() {
    let out = wgqed(&["fano-compare", "--points", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert_eq!(header_row(&text), ["delta", "T", "fano_f", "limit_flag"]);
    for row in data_rows(&text) {
        let t: f64 = row[1].parse().expect("T populated");
        let f: f64 = row[2].parse().expect("fano_f populated");
        assert!(t.is_finite() && f.is_finite());
    }
}

#[test]
fn feshbach_curve_traces_a_decreasing_resonance_position() {
    let out = wgqed(&["feshbach-curve", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("# axis=gamma_b"));
    assert_eq!(header_row(&text)[..2], ["gamma_b", "delta_f"]);
    let deltas: Vec<f64> = data_rows(&text)
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert_eq!(deltas.len(), 5);
    for pair in deltas.windows(2) {
        assert!(pair[1] < pair[0], "Δ_F not decreasing: {deltas:?}");
    }
}

#[test]
fn verify_exits_zero_and_names_each_check() {
    let out = wgqed(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for name in [
        "linear_on_resonance",
        "dispersion_taylor_fd",
        "unitarity_below_threshold",
        "loss_bounds",
        "t_equals_one_plus_r",
        "k_detuning_round_trip",
        "sigma_branch_dichotomy",
        "sigma_oracle",
        "bound_state_agreement",
        "bound_state_residual",
        "feshbach_total_reflection",
        "band_minimum_limit",
    ] {
        assert!(text.contains(name), "verify report omits `{name}`");
    }
    assert!(text.contains("12/12 checks passed"));
}

#[test]
fn verify_reports_failures_through_exit_code_two() {
    // Couplings pushed far into the ill-conditioned corner of the pole cubic,
    // where the residual gate is out of reach for double precision.
    let out = wgqed(&[
        "verify",
        "--set",
        "v_a1=1.0",
        "--set",
        "v_a2=0.005",
        "--set",
        "v_b1=1.0",
        "--set",
        "v_b2=0.01",
        "--set",
        "gamma_b=0.001",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_of(&out).contains("FAIL"));
}

#[test]
fn verify_json_is_machine_readable() {
    let out = wgqed(&["verify", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&out)).expect("verify emits valid JSON");
    assert_eq!(value["all_passed"], serde_json::Value::Bool(true));
    let checks = value["checks"].as_array().expect("a checks array");
    assert_eq!(checks.len(), 12);
    for check in checks {
        assert!(check["name"].is_string());
        assert!(check["passed"].is_boolean());
        assert!(check["worst"].is_number());
        assert!(check["tolerance"].is_number());
    }
}

#[test]
fn critical_size_matches_the_published_scale() {
    let out = wgqed(&["critical-size", "--omega0", "1e10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    let l_c: f64 = rows[0][2].parse().unwrap();
    assert!((l_c - 0.039011701298233205).abs() < 1e-12, "L_c = {l_c}");
}

#[test]
fn json_sweep_round_trips_to_the_in_process_result() {
    let out = wgqed(&[
        "sweep",
        "--preset",
        "fig4a",
        "--points",
        "101",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let reread = SweepResult::from_json(&stdout_of(&out)).expect("emitted JSON parses");

    let mut cfg = preset("fig4a").expect("preset exists");
    cfg.range.count = 101;
    let direct = run_sweep(&cfg).expect("sweep runs");
    assert_eq!(reread, direct);
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("rows.csv");
    let to_file = wgqed(&[
        "sweep",
        "--preset",
        "fig2a",
        "--points",
        "64",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let to_stdout = wgqed(&["sweep", "--preset", "fig2a", "--points", "64"]);
    assert_eq!(
        std::fs::read(&path).expect("output file exists"),
        to_stdout.stdout
    );
}

#[test]
fn resonances_names_the_band_landmarks() {
    let parse = |text: &str| -> BTreeMap<String, f64> {
        data_rows(text)
            .into_iter()
            .map(|row| (row[0].clone(), row[1].parse().unwrap()))
            .collect()
    };

    let out = wgqed(&["resonances"]);
    assert_eq!(out.status.code(), Some(0));
    let coupled = parse(&stdout_of(&out));
    for key in ["delta_min", "delta_max_f", "k_c", "delta_f", "k_f_1", "k_f_2"] {
        assert!(coupled.contains_key(key), "missing row `{key}`");
    }
    assert_eq!(coupled["feshbach_in_band"], 1.0);
    assert!(coupled["delta_f"] < coupled["delta_max_f"]);

    let out = wgqed(&["resonances", "--set", "gamma_b=0"]);
    assert_eq!(out.status.code(), Some(0));
    let lossless = parse(&stdout_of(&out));
    assert!(lossless.contains_key("k_res_1"));
    assert!(lossless.contains_key("k_res_2"));
    assert!(!lossless.contains_key("delta_f"));
    assert_eq!(lossless["feshbach_in_band"], 0.0);
}

#[test]
fn bound_states_reports_both_methods_in_agreement() {
    let out = wgqed(&["bound-states"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "closed_form");
    assert_eq!(rows[1][0], "numeric");
    let delta_f_closed: f64 = rows[0][1].parse().unwrap();
    let delta_f_numeric: f64 = rows[1][1].parse().unwrap();
    assert!((delta_f_closed - delta_f_numeric).abs() < 1e-8);
    for row in &rows {
        let residual: f64 = row[7].parse().unwrap();
        assert!(residual < 1e-10, "residual {residual}");
    }

    let out = wgqed(&["bound-states", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&out)).expect("valid JSON");
    assert!(value["closed_form"]["delta_f"].is_number());
    assert!(value["numeric"]["quasibound"].is_array());
}
