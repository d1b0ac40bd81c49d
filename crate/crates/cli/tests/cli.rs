use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use genbound::bounds::BoundReport;
use genbound_cli::verify::VerifyReport;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn genbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genbound")).args(args).output().expect("binary runs")
}

fn discrete(learner: &str) -> (Output, Option<BoundReport>) {
    let l = fixture(learner);
    let loss = fixture("loss_indicator.json");
    let out = genbound(&["--learner", l.to_str().unwrap(), "--loss", loss.to_str().unwrap()]);
    let report = serde_json::from_slice(&out.stdout).ok();
    (out, report)
}

#[test]
fn constant_learner_has_zero_gen_and_zero_bounds() {
    let (out, r) = discrete("constant_learner.json");
    assert_eq!(out.status.code(), Some(0));
    let r = r.unwrap();
    assert_eq!(r.true_gen.unwrap().value, 0.0);
    assert_eq!(r.present().len(), 12);
    for name in r.present() {
        assert_eq!(r.get(name), Some(0.0), "{name}");
    }
    assert!(r.refusals.is_empty());
}

#[test]
fn memorizer_matches_golden_and_hand_values() {
    let (out, r) = discrete("memorizer_learner.json");
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read(fixture("memorizer_report.golden.json")).unwrap();
    assert_eq!(out.stdout, golden);

    // W = Z_1 on two uniform bits with the 0-1 loss, worked by hand.
    let r = r.unwrap();
    let ln2 = std::f64::consts::LN_2;
    let close = |name: &str, want: f64| {
        let got = r.get(name).unwrap();
        assert!((got - want).abs() < 1e-12, "{name}: {got} vs {want}");
    };
    close("true_gen", 0.25);
    close("avg_tv_bound", 0.25);
    close("ind_tv_bound", 0.25);
    close("avg_w_bound", 0.25);
    close("ind_w_bound", 0.25);
    // avg joint [[3/8, 1/8], [1/8, 3/8]] against the uniform product
    let d = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
    close("avg_kl_bound", (0.5 * d).sqrt());
    close("ismi", (0.5 * ln2).sqrt() / 2.0);
    close("per_sample_kl_bound", (0.5 * ln2 / 2.0).sqrt());
    close("mi_dataset_bound", (0.5 * ln2 / 2.0).sqrt());
    let rev = 0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2.0f64.ln();
    close("lautum_avg_bound", (0.5 * rev).sqrt());
    assert!(r.lautum_per_sample_bound.is_none());
    assert!(r.refusals.contains_key("lautum_per_sample_bound"));
}

#[test]
fn malformed_probabilities_are_rejected_with_a_field_path() {
    let (out, r) = discrete("malformed_probs.json");
    assert_eq!(out.status.code(), Some(2));
    assert!(r.is_none());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p_w_given_s["), "{err}");
    assert!(err.contains("-0.2"), "{err}");
}

#[test]
fn unparsable_json_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 1,\n  \"z_support\": [\n").unwrap();
    let loss = fixture("loss_indicator.json");
    let out = genbound(&["--learner", bad.to_str().unwrap(), "--loss", loss.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn invalid_grid_is_a_config_error() {
    for grid in ["0,0.5", "0.5,1.2", "abc", "0.2:0.9:0"] {
        let out = genbound(&["--t-grid", grid, "--samples", "1000"]);
        assert_eq!(out.status.code(), Some(2), "{grid}");
    }
}

#[test]
fn symmetric_point_collapses_and_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, svg) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("a.svg"));
    let run = |path: &Path, extra: &[&str]| {
        let mut args = vec!["--t-grid", "0.5,0.3", "--samples", "20000", "--seed", "7", "--out", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(genbound(&args).status.code(), Some(0));
        std::fs::read_to_string(path).unwrap()
    };
    let first = run(&a, &["--svg", svg.to_str().unwrap()]);
    let second = run(&b, &["--jobs", "1"]);
    assert_eq!(first, second);

    let mut lines = first.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.join(","), BoundReport::CSV_HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("t"), "0.5000000000");
    assert_eq!(col("ismi"), col("avg_kl"));
    assert_eq!(col("ind_tv"), col("avg_tv"));

    let svg = std::fs::read_to_string(svg).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 900 600""#));
    assert!(svg.contains(">avg_kl</text>") && svg.contains(">true_gen</text>"));
}

#[test]
fn bounds_flag_limits_the_filled_columns() {
    let out = genbound(&["--t-grid", "0.4", "--samples", "1000", "--bounds", "true_gen,avg_tv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(!row[1].is_empty() && !row[6].is_empty());
    assert!(row[3].is_empty() && row[4].is_empty() && row[12].is_empty());
}

#[test]
fn verify_with_zero_count_is_an_empty_pass() {
    let out = genbound(&["--verify", "all", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.properties.is_empty() && r.passed());
}

#[test]
fn verify_is_reproducible_and_catches_a_doubled_tv() {
    let a = genbound(&["--verify", "discrete", "--count", "25", "--seed", "3"]);
    let b = genbound(&["--verify", "discrete", "--count", "25", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let bad = genbound(&["--verify", "discrete", "--count", "25", "--seed", "3", "--fault-tv-scale", "2"]);
    assert_eq!(bad.status.code(), Some(4));
    let r: VerifyReport = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(r.failures().contains(&"order_tv_avg_le_ind"));
}

#[test]
fn unknown_suite_is_a_config_error() {
    assert_eq!(genbound(&["--verify", "nonsense"]).status.code(), Some(2));
}
