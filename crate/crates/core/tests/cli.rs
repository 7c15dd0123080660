use std::process::{Command, Output};

use clap::Parser;
use proptest::prelude::*;

use dynamo_core::cli::{execute, Cli};

fn dynamo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynamo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> String {
    let cli = Cli::try_parse_from(std::iter::once("dynamo").chain(args.iter().copied())).unwrap();
    String::from_utf8(execute(&cli).unwrap().report).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn footer<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn spectrum_reports_degenerate_branch() {
    let out = report(&["spectrum", "--set", "geometry.kappa0=1", "--set", "plasma.alpha=-2"]);
    assert_eq!(footer(&out, "branch.degenerate.gamma_plus"), Some("1.0"));
    assert_eq!(footer(&out, "branch.degenerate.gamma_minus"), Some("1.0"));
    let class = footer(&out, "branch.degenerate.classification").unwrap();
    assert!(class.contains("FAST") && class.contains("DEGENERATE"), "{class}");
    assert!(footer(&out, "branch.degenerate.matrix_difference").is_some());

    let direct = report(&[
        "spectrum",
        "--set",
        "geometry.kappa0=1",
        "--set",
        "plasma.alpha=-2",
        "--set",
        "scheme=degenerate",
    ]);
    let row = &csv_rows(&direct)[0];
    assert_eq!(num(&row[7]), 1.0);
    assert_eq!(num(&row[9]), 1.0);
    assert_eq!(row[12], "FAST+DEGENERATE");
    assert_eq!(footer(&direct, "branch.degenerate.matrix_difference"), Some("0.0"));
}

#[test]
fn spectrum_reports_oscillatory_pair() {
    let out = report(&["spectrum", "--set", "geometry.kappa0=1"]);
    let row = &csv_rows(&out)[0];
    assert_eq!(&row[..7], ["1.0", "1.0", "-1.0", "0.0", "1.0", "0.0", "eq18"]);
    assert_eq!((num(&row[7]), num(&row[8])), (0.0, 1.0));
    assert_eq!((num(&row[9]), num(&row[10])), (0.0, -1.0));
    assert!(row[12].contains("OSCILLATORY"));
}

#[test]
fn spectrum_reports_golden_branch_on_laminar_line() {
    let out = report(&["spectrum", "--set", "geometry.kappa0=1", "--set", "plasma.alpha=-1"]);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((num(footer(&out, "branch.laminar.gamma_plus").unwrap()) - phi).abs() < 1e-15);
}

#[test]
fn empty_config_is_a_usage_error() {
    let out = dynamo(&["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry.kappa0"));
}

#[test]
fn unknown_key_names_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "geometry.kappa0 = 1\n# ok\nplasma.betta = 0.1\n").unwrap();
    let out = dynamo(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("plasma.betta"), "{err}");
}

#[test]
fn unknown_subcommand_and_scheme_flag_are_rejected() {
    assert_eq!(dynamo(&["spectra"]).status.code(), Some(2));
    assert_eq!(dynamo(&["spectrum", "--scheme", "eq99"]).status.code(), Some(2));
    let out = dynamo(&["spectrum", "--set", "geometry.kappa0=1", "--set", "scheme=nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scheme_flag_changes_the_operator() {
    let base = ["spectrum", "--set", "geometry.kappa0=2", "--set", "plasma.beta=0.3"];
    let a = csv_rows(&report(&[&base[..], &["--scheme", "eq18"]].concat()));
    let b = csv_rows(&report(&[&base[..], &["--scheme", "eq13_14"]].concat()));
    assert_eq!(b[0][6], "eq13_14");
    assert_ne!(a[0][7], b[0][7]);
}

#[test]
fn single_point_sweep_matches_spectrum() {
    let args = ["--set", "plasma.alpha=0.3", "--set", "plasma.beta=0.2", "--set", "flow.v_s=0.5"];
    let sweep = report(&[&["sweep", "--set", "sweep.kappa0=1"][..], &args].concat());
    let spectrum = report(&[&["spectrum", "--set", "geometry.kappa0=1"][..], &args].concat());
    assert_eq!(csv_rows(&sweep), csv_rows(&spectrum));
    assert_eq!(csv_rows(&sweep).len(), 1);
}

#[test]
fn sweep_header_is_exact() {
    let out = report(&["sweep", "--set", "sweep.kappa0=1:2:2"]);
    assert_eq!(
        out.lines().next().unwrap(),
        "kappa0,tau0,v_s,alpha,lambda,beta,scheme,re_gamma_plus,im_gamma_plus,re_gamma_minus,im_gamma_minus,discriminant,classification"
    );
    assert!(!out.contains('\r'));
}

#[test]
fn degenerate_locus_sweep() {
    let out = report(&[
        "sweep",
        "--set",
        "sweep.kappa0=0.1:5:50",
        "--set",
        "couple.alpha=-2",
        "--set",
        "scheme=degenerate",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 50);
    for r in rows {
        let k = num(&r[0]);
        assert!(r[12].contains("DEGENERATE"), "{r:?}");
        assert!((num(&r[7]) - k).abs() < 1e-12 && (num(&r[9]) - k).abs() < 1e-12);
        assert_eq!(num(&r[3]), -2.0 * k);
    }
}

#[test]
fn beta_sweep_approaches_ideal_limit_monotonically() {
    let out = report(&[
        "sweep",
        "--set",
        "geometry.kappa0=1",
        "--set",
        "plasma.alpha=0.5",
        "--set",
        "sweep.beta=0:0.1:21",
    ]);
    let rows = csv_rows(&out);
    let re: Vec<f64> = rows.iter().map(|r| num(&r[7])).collect();
    assert!(re.windows(2).all(|w| w[1] <= w[0]), "{re:?}");
    assert_eq!(rows[0][12], "FAST");
    assert!(rows.iter().skip(1).all(|r| r[12] != "NONCONVERGENT"));
}

#[test]
fn sweep_rows_are_lexicographic() {
    let out = report(&["sweep", "--set", "sweep.kappa0=1:2:2", "--set", "sweep.beta=0:1:3"]);
    let keys: Vec<(f64, f64)> = csv_rows(&out).iter().map(|r| (num(&r[0]), num(&r[5]))).collect();
    assert_eq!(
        keys,
        vec![(1.0, 0.0), (1.0, 0.5), (1.0, 1.0), (2.0, 0.0), (2.0, 0.5), (2.0, 1.0)]
    );
}

#[test]
fn sweep_refuses_oversized_grids() {
    let out = dynamo(&[
        "sweep",
        "--set",
        "sweep.kappa0=1:2:100",
        "--set",
        "sweep.beta=0:1:100",
        "--set",
        "sweep.row_cap=9999",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row cap"));
    assert_eq!(dynamo(&["sweep", "--set", "geometry.kappa0=1"]).status.code(), Some(2));
}

#[test]
fn helicity_from_normal_flow() {
    let out = report(&[
        "spectrum",
        "--set",
        "geometry.kappa0=2",
        "--set",
        "flow.v_n_meansq=0.25",
    ]);
    assert_eq!(num(&csv_rows(&out)[0][3]), -0.5);
    let clash = dynamo(&[
        "spectrum",
        "--set",
        "geometry.kappa0=2",
        "--set",
        "flow.v_n_meansq=0.25",
        "--set",
        "plasma.alpha=1",
    ]);
    assert_eq!(clash.status.code(), Some(2));
}

#[test]
fn json_matches_csv() {
    let args = ["--set", "sweep.kappa0=0.3:2.9:4", "--set", "sweep.v_s=-1:1:3", "--set", "plasma.beta=0.01"];
    let csv = report(&[&["sweep"][..], &args].concat());
    let json = report(&[&["sweep", "--format", "json"][..], &args].concat());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let csv_rows = csv_rows(&csv);
    assert_eq!(rows.len(), csv_rows.len());
    for (obj, row) in rows.iter().zip(&csv_rows) {
        for (name, cell) in header.iter().zip(row) {
            match &obj[*name] {
                serde_json::Value::Number(n) => {
                    assert_eq!(n.as_f64().unwrap().to_bits(), num(cell).to_bits(), "{name}")
                }
                serde_json::Value::String(s) => assert_eq!(s, cell),
                other => panic!("{name}: {other}"),
            }
        }
    }
    assert_eq!(v["meta"]["config"]["sweep.kappa0"], "0.3:2.9:4");
    assert!(v["meta"]["version"].is_string());
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        "geometry.kappa0 = 1.5   # curvature\nplasma.alpha = 0.2\noutput.format = json\n",
    )
    .unwrap();
    let status = dynamo(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["rows"][0]["kappa0"], 1.5);
}

#[test]
fn verify_passes_and_fault_fails() {
    let ok = dynamo(&["verify", "--set", "verify.draws=20"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(csv_rows(&text).iter().all(|r| r[1] == "true"));

    let bad = dynamo(&["verify", "--set", "verify.draws=20", "--set", "verify.fault=scheme_mismatch"]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8_lossy(&bad.stdout);
    let oracle = csv_rows(&text).into_iter().find(|r| r[0] == "oracle").unwrap();
    assert_eq!(oracle[1], "false");
    assert!(num(&oracle[4]) > 1e-4);
}

#[test]
fn order_suite_survives_doubled_step() {
    let out = report(&["verify", "--set", "verify.draws=5", "--set", "verify.order_dt=0.1"]);
    let order = csv_rows(&out).into_iter().find(|r| r[0] == "rk4_order").unwrap();
    assert_eq!(order[1], "true", "{order:?}");
}

#[test]
fn abc_examples() {
    let abc = ["--set", "abc.A=1", "--set", "abc.B=1", "--set", "abc.C=1"];
    let eval = csv_rows(&report(&[&["abc", "eval"][..], &abc].concat()));
    let nums: Vec<f64> = eval[0].iter().map(|c| num(c)).collect();
    assert_eq!(nums[3..6], [2.0, 2.0, 2.0]);
    assert_eq!(nums[6..9], [1.0, 1.0, 1.0]);
    assert_eq!(nums[9], 0.0);

    let stag = csv_rows(&report(&["abc", "stagnation", "--set", "abc.A=1", "--set", "abc.B=0", "--set", "abc.C=0"]));
    assert_eq!(stag[0][3], "STRONG_STAGNATION");
    assert_eq!(stag[0][4], "no dynamo action");

    let growth = csv_rows(&report(&[
        "abc",
        "growth",
        "--set",
        "tube.b_theta=1",
        "--set",
        "tube.r=1",
        "--set",
        "tube.tau0=1",
    ]));
    assert_eq!(num(&growth[0][6]), 0.0);
    assert_eq!(growth[0][7], "MARGINAL");
    assert_eq!(num(&growth[0][8]), 1.0);

    let slow = csv_rows(&report(&["abc", "growth", "--set", "plasma.eta=0.01"]));
    assert_eq!(slow[0][7], "SLOW_CANDIDATE");
    assert_eq!(slow[0][6], "");
}

#[test]
fn abc_requires_amplitudes() {
    assert_eq!(dynamo(&["abc", "eval"]).status.code(), Some(2));
}

#[test]
fn tube_grid_masks_singular_points() {
    let out = report(&[
        "abc",
        "tube",
        "--set",
        "abc.A=1",
        "--set",
        "abc.B=0.5",
        "--set",
        "abc.C=0.25",
        "--set",
        "tube.theta0=0:3.141592653589793:5",
        "--set",
        "tube.r=0.5:1:2",
    ]);
    // theta = 0 and theta = pi on both radii.
    assert_eq!(footer(&out, "masked"), Some("4"));
    assert_eq!(csv_rows(&out).len(), 6);
}

#[test]
fn growth_at_zero_radius_is_a_domain_error() {
    let out = dynamo(&["abc", "growth", "--set", "tube.r=0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn frenet_check_passes() {
    let out = dynamo(&["frenet-check", "--set", "helix.draws=20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(csv_rows(&text).len(), 20);
    let grid = report(&["frenet-check", "--set", "helix.a=0.5:2:4", "--set", "helix.b_pitch=-1:1:3"]);
    assert_eq!(csv_rows(&grid).len(), 12);
}

fn arb_axis() -> impl Strategy<Value = (f64, f64, usize)> {
    (0.1f64..3.0, 0.0f64..2.0, 1usize..5).prop_map(|(lo, span, n)| {
        let hi = if n == 1 { lo } else { lo + span + 0.01 };
        (lo, hi, n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sweep_row_count_is_grid_product(k in arb_axis(), b in arb_axis(), v in arb_axis()) {
        let spec = |(lo, hi, n): (f64, f64, usize)| format!("{lo}:{hi}:{n}");
        let out = report(&[
            "sweep",
            "--set", &format!("sweep.kappa0={}", spec(k)),
            "--set", &format!("sweep.beta={}", spec(b)),
            "--set", &format!("sweep.v_s={}", spec(v)),
        ]);
        prop_assert_eq!(csv_rows(&out).len(), k.2 * b.2 * v.2);
    }

    #[test]
    fn csv_numbers_round_trip(k in 0.01f64..10.0, a in -5.0f64..5.0, b in 0.0f64..1.0) {
        let out = report(&[
            "spectrum",
            "--set", &format!("geometry.kappa0={k:?}"),
            "--set", &format!("plasma.alpha={a:?}"),
            "--set", &format!("plasma.beta={b:?}"),
        ]);
        let row = &csv_rows(&out)[0];
        prop_assert_eq!(num(&row[0]).to_bits(), k.to_bits());
        prop_assert_eq!(num(&row[3]).to_bits(), a.to_bits());
        prop_assert_eq!(num(&row[5]).to_bits(), b.to_bits());
    }
}
