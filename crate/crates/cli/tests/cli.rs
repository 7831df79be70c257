use std::process::Command as Process;

use fieldroad_cli::*;
use serde_json::Value;

const LONG_DECAY: &str = include_str!("../../../configs/long_time_decay.json");

fn minimal_roots() -> String {
    r#"{
        "command": "roots",
        "params": { "d": 1.0, "D": 2.0, "mu": 1.0, "nu": 1.0 },
        "deltas": { "start": 0.0, "stop": 4.0, "count": 9 }
    }"#
    .into()
}

fn small_fd(command: &str) -> String {
    format!(
        r#"{{
            "command": "{command}",
            "params": {{ "d": 1.0, "D": 3.0, "mu": 1.0, "nu": 1.0 }},
            "data_spec": {{ "boxes": [{{ "x": [-2.0, 2.0], "y": [0.0, 2.0] }}],
                            "intervals": [{{ "x": [-1.0, 1.0], "height": 0.5 }}] }},
            "sim": {{ "M": 10.0, "h": 0.5, "t_end": 4.0, "record_every": 0.25 }},
            "times": [1.0, 4.0],
            "probes": {{ "xs": [0.0, 1.0, 3.0], "ys": [0.0, 1.5] }}
        }}"#
    )
}

#[test]
fn minimal_document_gets_defaults() {
    let spec = parse_config(&minimal_roots()).unwrap();
    assert_eq!(spec.command, Command::Roots);
    assert_eq!(spec.quad, fieldroad::QuadratureConfig::default());
    assert_eq!(spec.params.dim, 2);
    assert_eq!((spec.seed, spec.raster_h), (0, 0.5));
    assert!(spec.sim.is_none() && spec.output_path.is_none());
}

#[test]
fn negative_mu_is_a_range_error_naming_mu() {
    let text = minimal_roots().replace("\"mu\": 1.0", "\"mu\": -1.0");
    match parse_config(&text) {
        Err(CliError::Range { key, reason }) => {
            assert_eq!(key, "params.mu");
            assert!(reason.contains("-1"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_report_their_path() {
    let text = minimal_roots().replace("\"count\": 9", "\"count\": 9, \"steps\": 3");
    match parse_config(&text) {
        Err(CliError::Schema { path, message }) => {
            assert_eq!(path, "deltas.steps");
            assert!(message.contains("steps"));
        }
        other => panic!("{other:?}"),
    }
    let text = minimal_roots().replace("\"count\": 9", "\"count\": \"nine\"");
    assert!(matches!(parse_config(&text), Err(CliError::Schema { path, .. }) if path == "deltas.count"));
    let text = small_fd("decay").replace("\"x\": [-2.0, 2.0], \"y\": [0.0, 2.0]", "\"x\": [2.0, -2.0], \"y\": [0.0, 2.0]");
    assert!(matches!(parse_config(&text), Err(CliError::Range { key, .. }) if key == "data_spec.boxes[0]"));
}

#[test]
fn commands_demand_their_inputs() {
    let text = small_fd("decay").replace("\"sim\"", "\"unused_sim\"");
    assert!(parse_config(&text).is_err());
    let mut spec = parse_config(&small_fd("decay")).unwrap();
    spec.sim = None;
    assert!(matches!(spec.validate(), Err(CliError::Missing { field, .. }) if field == "sim"));
    spec.command = Command::KernelEval;
    spec.times.clear();
    assert!(matches!(spec.validate(), Err(CliError::Missing { field, .. }) if field == "times"));
}

#[test]
fn long_decay_configuration_reproduces_its_data() {
    let spec = parse_config(LONG_DECAY).unwrap();
    assert_eq!((spec.params.mu, spec.params.nu), (10.0, 1.0));
    let b = &spec.data_spec.boxes;
    assert_eq!(b.len(), 1);
    assert_eq!((b[0].x, b[0].y, b[0].height), ([-10.0, 10.0], [10.0, 30.0], 1.0));
    let iv = &spec.data_spec.intervals;
    assert_eq!((iv.len(), iv[0].x, iv[0].height), (1, [-10.0, 10.0], 1.0));
    let cfg = spec.sim_config().unwrap().unwrap();
    assert!((cfg.data.total_mass() - 420.0).abs() < 1e-9);
}

#[test]
fn sidecar_round_trips_to_the_same_spec() {
    let spec = parse_config(&small_fd("simulate-fd")).unwrap();
    let outcome = execute(&spec, false).unwrap();
    let doc: Value = serde_json::from_slice(&render_sidecar(&spec, &outcome).unwrap()).unwrap();
    assert_eq!(doc["version"], fieldroad::VERSION);
    let again = parse_config(&doc["spec"].to_string()).unwrap();
    assert_eq!(again, spec);
}

#[test]
fn csv_has_headers_and_round_trippable_numbers() {
    let spec = parse_config(&minimal_roots()).unwrap();
    let text = String::from_utf8(render_csv(&execute(&spec, false).unwrap().table).unwrap()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("delta,alpha_re,alpha_im"));
    assert_eq!(text.lines().count(), 10);
    assert!(!text.contains('\r'));
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    let delta: f64 = row[0].parse().unwrap();
    assert_eq!(delta, 0.5);
    assert_eq!(row[8], "OneRealConjugatePair");
    for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
        assert_eq!(output::format_number(v).parse::<f64>().unwrap(), v);
    }
}

#[test]
fn execution_is_deterministic() {
    let text = small_fd("flux").replace("\"seed\"", "\"unused\"");
    let spec = parse_config(&text).unwrap();
    let a = render_csv(&execute(&spec, false).unwrap().table).unwrap();
    let b = render_csv(&execute(&spec, false).unwrap().table).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_probes_follow_the_seed() {
    let mut spec = parse_config(&small_fd("simulate-analytic")).unwrap();
    spec.probes.random = 5;
    spec.probes.x_range = 4.0;
    spec.probes.y_range = 2.0;
    let a = probe_points(&spec);
    assert_eq!(a, probe_points(&spec));
    spec.seed = 9;
    let b = probe_points(&spec);
    assert_eq!(a.len(), 11);
    assert_eq!(a[..6], b[..6]);
    assert_ne!(a[6..], b[6..]);
    assert!(b.iter().all(|&(x, y)| x.abs() <= 4.0 && (0.0..=2.0).contains(&y)));
}

#[test]
fn compare_agrees_on_a_small_box() {
    let spec = parse_config(&small_fd("compare")).unwrap();
    let out = execute(&spec, false).unwrap();
    let v = out.summary["max_rel_diff_v"].as_f64().unwrap();
    let u = out.summary["max_rel_diff_u"].as_f64().unwrap();
    assert!(v <= 2e-2 && u <= 2e-2, "v {v:e} u {u:e}");
    assert_eq!(out.table.header.last(), Some(&"rel_diff"));
}

#[test]
fn long_decay_slope_is_minus_one() {
    let spec = parse_config(LONG_DECAY).unwrap();
    let out = execute(&spec, false).unwrap();
    for key in ["sup_v", "sup_u"] {
        let s = out.summary[key]["slope"].as_f64().unwrap();
        assert!((s + 1.0).abs() <= 0.15, "{key}: {s}");
    }
    assert!(out.summary["mass"]["max_mass_drift"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn binary_writes_identical_files_and_clean_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, small_fd("simulate-fd")).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let status = Process::new(env!("CARGO_BIN_EXE_fieldroad"))
            .args(["simulate-fd", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
        let side: Value = serde_json::from_slice(&std::fs::read(out.with_extension("json")).unwrap()).unwrap();
        assert_eq!(side["command"], "simulate-fd");
    }
    assert_eq!(outputs[0], outputs[1]);

    std::fs::write(&config, small_fd("decay").replace("\"mu\": 1.0", "\"mu\": -1.0")).unwrap();
    let out = dir.path().join("bad.csv");
    let res = Process::new(env!("CARGO_BIN_EXE_fieldroad"))
        .args(["decay", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!res.status.success());
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "range");
    assert_eq!(err["error"]["key"], "params.mu");
    assert!(!out.exists() && !out.with_extension("json").exists());
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 5);
}
