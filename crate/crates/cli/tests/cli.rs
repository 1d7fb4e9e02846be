use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn isochrone(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isochrone"))
        .args(args)
        .current_dir(dir)
        .env_remove("ISOCHRONE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn period_map_of_an_isochronous_dimension() {
    let dir = TempDir::new().unwrap();
    let out = isochrone(
        &[
            "period-map",
            "--model",
            "plasma",
            "--d",
            "4",
            "--h",
            "0.05:0.3:6",
            "--out",
            "pm.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("pm.csv"));
    assert_eq!(csv.lines().next(), Some("h,T,return_error"));
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 6);
    for r in rows {
        let t: f64 = r[1].parse().unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-6);
    }
    let summary = String::from_utf8_lossy(&out.stdout);
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.contains("isochronous"));
}

#[test]
fn hopf_blowup_json_on_stdout() {
    let dir = TempDir::new().unwrap();
    let out = isochrone(&["blowup", "--model", "hopf", "--y0", "1"], dir.path());
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["model"]["kind"], "hopf_potential");
    let r = &doc["results"];
    for key in ["blown", "t_star", "q_min", "horizon"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(r["blown"], true);
    assert!((r["t_star"].as_f64().unwrap() - 0.75 * PI).abs() < 1e-8);
    assert!((r["t_star"].as_f64().unwrap() - 2.35619).abs() < 1e-5);
}

#[test]
fn sabatini_reports_both_normalisations() {
    let dir = TempDir::new().unwrap();
    let out = isochrone(
        &[
            "sabatini", "--model", "plasma", "--d", "5", "--z", "1", "--out", "s.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&read(dir.path().join("s.json"))).unwrap();
    assert_eq!(doc["verdict"], "not_isochronous");
    let tau = &doc["results"]["tau"][0];
    assert!((tau["tau"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-10);
    assert!((tau["tau_printed_normalisation"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    // Usage errors.
    assert_eq!(code(&isochrone(&["period-map", "--model", "plasma"], p)), 1);
    assert_eq!(
        code(&isochrone(
            &["period-map", "--model", "plasma", "--d", "2", "--bogus"],
            p
        )),
        1
    );
    assert_eq!(
        code(&isochrone(
            &["sabatini", "--model", "plasma", "--d", "2", "--out", "x.txt"],
            p
        )),
        1
    );
    assert_eq!(
        code(&isochrone(
            &[
                "monodromy",
                "--model",
                "plasma",
                "--d",
                "2",
                "--out",
                "m.svg"
            ],
            p
        )),
        1
    );
    assert_eq!(
        code(&isochrone(
            &["period-map", "--model", "plasma", "--d", "2", "--rtol", "0"],
            p
        )),
        1
    );
    assert_eq!(code(&isochrone(&[], p)), 1);
    assert_eq!(code(&isochrone(&["--help"], p)), 0);
    // Numerical and IO failures.
    assert_eq!(
        code(&isochrone(
            &[
                "monodromy",
                "--model",
                "plasma",
                "--d",
                "2",
                "--state",
                "0,0"
            ],
            p
        )),
        2
    );
    assert_eq!(
        code(&isochrone(
            &[
                "sabatini",
                "--model",
                "plasma",
                "--d",
                "2",
                "--out",
                "missing/dir/s.csv"
            ],
            p
        )),
        2
    );
    // Invalid model parameters.
    assert_eq!(
        code(&isochrone(
            &["period-map", "--model", "plasma", "--d", "0"],
            p
        )),
        3
    );
    assert_eq!(
        code(&isochrone(
            &["period-map", "--model", "relativistic", "--c", "-1"],
            p
        )),
        3
    );
    assert_eq!(code(&isochrone(&["sabatini", "--model", "hopf"], p)), 3);
}

#[test]
fn non_isochronous_verdict_still_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = isochrone(
        &[
            "period-map",
            "--model",
            "plasma",
            "--d",
            "2",
            "--out",
            "pm.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&read(dir.path().join("pm.json"))).unwrap();
    assert_eq!(doc["verdict"], "non_isochronous");
}

const RUNS: &[&[&str]] = &[
    &[
        "simulate", "--model", "plasma", "--d", "2", "--x0", "-1", "--state", "-0.1,0.2",
    ],
    &[
        "period-map",
        "--model",
        "plasma-calibrated",
        "--d",
        "3",
        "--gamma",
        "-2",
    ],
    &["monodromy", "--model", "harmonic"],
    &["blowup", "--model", "plasma", "--d", "2", "--y0", "0,1"],
    &[
        "sabatini",
        "--model",
        "relativistic",
        "--c",
        "1",
        "--z",
        "0.5,1",
    ],
    &["involution", "--involution", "mobius", "--a", "0.3"],
    &[
        "field", "--model", "plasma", "--d", "2", "--nx", "8", "--t-max", "20",
    ],
    &[
        "crossing",
        "--model",
        "plasma",
        "--d",
        "2",
        "--amplitude",
        "0.8",
        "--t-max",
        "60",
    ],
];

#[test]
fn json_regenerates_the_csv() {
    let dir = TempDir::new().unwrap();
    for run in RUNS {
        let mut args = run.to_vec();
        args.extend(["--out", "r.json", "--out", "r.csv"]);
        let out = isochrone(&args, dir.path());
        assert_eq!(
            code(&out),
            0,
            "{run:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = isochrone(
            &["convert", "--input", "r.json", "--out", "back.csv"],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
        assert_eq!(
            read(dir.path().join("r.csv")),
            read(dir.path().join("back.csv")),
            "{run:?}"
        );
    }
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = TempDir::new().unwrap();
    for run in RUNS {
        let plots = !matches!(run[0], "monodromy" | "crossing");
        let mut names = vec!["a.csv", "a.json"];
        if plots {
            names.push("a.svg");
        }
        let mut first = Vec::new();
        for pass in 0..2 {
            let mut args = run.to_vec();
            for n in &names {
                args.extend(["--out", n]);
            }
            assert_eq!(code(&isochrone(&args, dir.path())), 0, "{run:?}");
            let contents: Vec<String> = names.iter().map(|n| read(dir.path().join(n))).collect();
            if pass == 0 {
                first = contents;
            } else {
                assert_eq!(first, contents, "{run:?}");
            }
        }
        let meta: Value = serde_json::from_str(&read(dir.path().join("a.csv.meta.json"))).unwrap();
        assert_eq!(meta["analysis"], run[0]);
        assert!(meta["unix_time"].as_u64().unwrap() > 0);
    }
}

#[test]
fn fan_plot_has_one_polyline_per_characteristic() {
    let dir = TempDir::new().unwrap();
    let out = isochrone(
        &[
            "field", "--model", "plasma", "--d", "1", "--nx", "12", "--t-max", "10", "--out",
            "fan.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let svg = read(dir.path().join("fan.svg"));
    assert_eq!(svg.matches("<polyline").count(), 12);
    assert!(!svg.contains("href"));
}

#[test]
fn config_file_with_command_line_override() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# period map of the d = 1 family\n[analysis]\nrun = period-map\nh = 0.05:0.3:4\n\n[model]\nkind = plasma\nd = 1\n\n[profile]\nnx = 10\n\n[output]\nout = cfg.csv, cfg.json\n",
    )
    .unwrap();
    let out = isochrone(&["--config", "run.cfg"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&read(dir.path().join("cfg.json"))).unwrap();
    assert_eq!(doc["model"]["d"], 1);
    assert_eq!(doc["verdict"], "isochronous");
    assert_eq!(csv_rows(&read(dir.path().join("cfg.csv"))).len(), 4);

    let out = isochrone(
        &["--config", "run.cfg", "period-map", "--d", "2"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&read(dir.path().join("cfg.json"))).unwrap();
    assert_eq!(doc["model"]["d"], 2);
    assert_eq!(doc["verdict"], "non_isochronous");

    std::fs::write(dir.path().join("bad.cfg"), "[model]\ncolour = red\n").unwrap();
    assert_eq!(
        code(&isochrone(
            &["--config", "bad.cfg", "period-map"],
            dir.path()
        )),
        1
    );
    assert_eq!(
        code(&isochrone(
            &["--config", "absent.cfg", "period-map"],
            dir.path()
        )),
        2
    );
}

#[test]
fn thread_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_isochrone"))
            .args([
                "period-map",
                "--model",
                "plasma",
                "--d",
                "1",
                "--out",
                "t.csv",
            ])
            .current_dir(dir.path())
            .env("ISOCHRONE_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    let meta: Value = serde_json::from_str(&read(dir.path().join("t.csv.meta.json"))).unwrap();
    assert_eq!(meta["threads"], 1);
    assert_eq!(code(&run("zero")), 1);
}
