use std::f64::consts::PI;
use std::process::Command as Proc;

use heisenberg_cli::{run_str, write_records, CliError, Command, Format, Overrides, ResultRecord};

fn run(cmd: Command, text: &str) -> Result<Vec<ResultRecord>, CliError> {
    run_str(cmd, text, Overrides::default()).map(|r| r.0)
}

fn run_threads(cmd: Command, text: &str, threads: usize) -> Vec<ResultRecord> {
    run_str(cmd, text, Overrides { seed: None, threads: Some(threads) }).unwrap().0
}

fn config_err(cmd: Command, text: &str) -> String {
    match run(cmd, text) {
        Err(CliError::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected_with_position() {
    let m = config_err(Command::Walk, r#"{"domain": {"kind": "ball", "radius": 1}, "speed": 3}"#);
    assert!(m.contains("unknown field `speed`"), "{m}");
    assert!(m.contains("line 1"), "{m}");
    let m = config_err(
        Command::Expand,
        r#"{"operators": [{"kind": "a1", "p": 3}], "fields": [{"kind": "x"}], "points": [[0,0,0]]}"#,
    );
    assert!(m.contains("unknown field `p`"), "{m}");
    let m = config_err(
        Command::DppSolve,
        r#"{"domain": {"kind": "ball", "radius": 1}, "data": {"kind": "x"}, "eps": [0.3],
            "solver": {"p": 3, "grid": {"kind": "box", "hxy": 0.1}}}"#,
    );
    assert!(m.contains("unknown field `hxy`"), "{m}");
}

#[test]
fn missing_and_invalid_values() {
    let m = config_err(Command::Annulus, r#"{"radii": [1, 2, 4], "p": 4, "eps": 0.1, "n_traj": 10}"#);
    assert!(m.contains("missing field `xi`"), "{m}");
    config_err(
        Command::Walk,
        r#"{"domain": {"kind": "ball", "radius": -1}, "field": {"kind": "x"}, "points": [[0,0,0]], "eps": 0.1, "n_traj": 10}"#,
    );
    config_err(
        Command::Expand,
        r#"{"operators": [{"kind": "dpp3", "p": 3, "s": 2.0}], "fields": [{"kind": "x"}], "points": [[0,0,0]]}"#,
    );
    config_err(
        Command::Expand,
        r#"{"operators": [{"kind": "dpp2", "p": 1.5}], "fields": [{"kind": "x"}], "points": [[0,0,0]]}"#,
    );
    config_err(
        Command::Regularity,
        r#"{"domain": {"kind": "cusp", "alpha": 0.5}, "point": [0,0,0], "eta": 0.5, "delta": 0.5,
            "eps": 0.1, "n_traj": 10, "probe": "game"}"#,
    );
    assert_eq!(CliError::Config(String::new()).exit_code(), 2);
    assert_eq!(CliError::Io(String::new()).exit_code(), 1);
}

#[test]
fn expansion_references() {
    let text = r#"{
        "operators": [{"kind": "a1"}, {"kind": "a3k"}, {"kind": "dpp2", "p": 4}],
        "fields": [{"kind": "polynomial", "terms": [[1.0, [2, 0, 0]]]}, {"kind": "radial", "p": 4}],
        "points": [[1.2, 0.5, 0.3]],
        "quadrature_nodes": 20000
    }"#;
    let recs = run(Command::Expand, text).unwrap();
    assert_eq!(recs.len(), 6);
    // Δ_H(x²) = 2
    assert!((recs[0].reference.unwrap() - 0.5).abs() < 1e-12);
    assert!((recs[2].reference.unwrap() - PI / 12.0).abs() < 1e-12);
    // radial p-harmonic data has a vanishing p-Laplacian
    assert!(recs[5].reference.unwrap().abs() < 1e-9);
    for r in &recs {
        assert_eq!(r.experiment, "expand");
        assert!(r.params.contains_key("operator") && r.params.contains_key("field"));
    }
}

#[test]
fn dpp_solve_constant_data_and_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{
        "domain": {{"kind": "ball", "radius": 1}},
        "data": {{"kind": "constant", "value": 0.25}},
        "reference": {{"kind": "constant", "value": 0.25}},
        "upper_data": {{"kind": "constant", "value": 0.5}},
        "eps": [0.4],
        "solver": {{"p": 3, "grid": {{"kind": "box", "h_z": 0.1}}, "quadrature_nodes": 1024}},
        "field_dir": {:?}
    }}"#,
        dir.path()
    );
    let recs = run(Command::DppSolve, &text).unwrap();
    assert_eq!(recs[0].quantity, "sup_error");
    assert_eq!(recs[0].measured, 0.0);
    assert_eq!(recs[1].quantity, "monotone_ok");
    assert_eq!(recs[1].measured, 1.0);
    let f = std::fs::File::open(dir.path().join("u_eps0.4.bin")).unwrap();
    let u = heisenberg_core::dpp::read_binary(f).unwrap();
    assert!(u.values.iter().all(|&v| v == 0.25));
}

#[test]
fn annulus_reference_is_bound_plus_xi() {
    let text = r#"{"radii": [1, 2, 4], "p": 4, "eps": 0.4, "n_traj": 200, "xi": 0.05, "tol": 1e-6}"#;
    let recs = run(Command::Annulus, text).unwrap();
    assert!((recs[0].reference.unwrap() - 0.55).abs() < 1e-12);
    assert_eq!(recs[0].params["bound"].as_f64().unwrap(), 0.5);
}

const WALK: &str = r#"{
    "domain": {"kind": "ball", "radius": 1},
    "field": {"kind": "z"},
    "points": [[0.2, -0.1, 0.05]],
    "eps": 0.25,
    "n_traj": 300,
    "seed": 5
}"#;

const GAME: &str = r#"{
    "domain": {"kind": "ball", "radius": 1},
    "data": {"kind": "x"},
    "points": [[0.1, 0.1, 0.0]],
    "eps": 0.4,
    "n_traj": 300,
    "solver": {"p": 3, "grid": {"kind": "box", "h_z": 0.1}, "quadrature_nodes": 1024},
    "seed": 9
}"#;

fn stripped(recs: Vec<ResultRecord>) -> Vec<ResultRecord> {
    recs.into_iter().map(|r| ResultRecord { wall_time_s: 0.0, ..r }).collect()
}

#[test]
fn reruns_are_bit_identical_across_thread_counts() {
    for (cmd, text) in [(Command::Walk, WALK), (Command::Game, GAME)] {
        let a = stripped(run_threads(cmd, text, 1));
        let b = stripped(run_threads(cmd, text, 3));
        let c = stripped(run_threads(cmd, text, 3));
        assert_eq!(a, b);
        assert_eq!(b, c);
    }
    let walk = run_threads(Command::Walk, WALK, 2);
    assert_eq!(walk[0].reference, Some(0.05));
    let game = run_threads(Command::Game, GAME, 2);
    assert!(game[0].reference.is_some() && game[0].residual.is_some());
}

#[test]
fn seed_override_changes_the_sample() {
    let a = run_threads(Command::Walk, WALK, 1);
    let b = run_str(Command::Walk, WALK, Overrides { seed: Some(6), threads: Some(1) }).unwrap().0;
    assert_ne!(a[0].measured, b[0].measured);
    assert_eq!(b[0].params["seed"], 6);
}

#[test]
fn csv_and_json_outputs() {
    let recs = run(Command::Walk, WALK).unwrap();
    let mut csv = Vec::new();
    write_records(&recs, Format::Csv, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,quantity,params,measured,reference,std_error,residual,truncated,wall_time_s"
    );
    assert!(lines.next().unwrap().starts_with("walk,walk_value,"));
    let mut js = Vec::new();
    write_records(&recs, Format::Json, &mut js).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
    assert_eq!(v[0]["measured"].as_f64().unwrap(), recs[0].measured);
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_heisenberg"))
}

#[test]
fn binary_exit_codes_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("walk.json");
    let traj = dir.path().join("traj.csv");
    let walk =
        WALK.replace("\"seed\": 5", &format!("\"seed\": 5, \"trajectories\": {{\"path\": {traj:?}, \"count\": 3}}"));
    std::fs::write(&cfg, walk).unwrap();
    let out = dir.path().join("out.json");
    let st =
        bin().args(["walk", "--config"]).arg(&cfg).arg("--out").arg(&out).args(["--format", "json"]).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v[0]["experiment"], "walk");
    let t = std::fs::read_to_string(&traj).unwrap();
    assert!(t.starts_with("traj_id,step,x,y,z,s_n,t_n"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"radii": [1, 2, 4], "p": 4}"#).unwrap();
    let st = bin().args(["annulus", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let st = bin().args(["walk", "--config"]).arg(dir.path().join("missing.json")).status().unwrap();
    assert_eq!(st.code(), Some(1));

    let stuck = dir.path().join("stuck.json");
    std::fs::write(
        &stuck,
        r#"{"domain": {"kind": "ball", "radius": 1}, "data": {"kind": "x"}, "eps": [0.4],
            "solver": {"p": 3, "grid": {"kind": "box", "h_z": 0.1}, "quadrature_nodes": 1024, "max_iter": 1}}"#,
    )
    .unwrap();
    let st = bin().args(["dpp-solve", "--config"]).arg(&stuck).status().unwrap();
    assert_eq!(st.code(), Some(3));
}
