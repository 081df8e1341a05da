use std::path::Path;
use std::process::{Command, Output};

use ymconc::lattice::ConfigDump;
use ymconc::GaugeConfig;

fn ymconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ymconc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ymconc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

type Parsed = (Vec<(String, String)>, Vec<String>, Vec<Vec<String>>);

/// Header comments as `(key, value)` and the CSV rows below them.
fn parse_csv(text: &str) -> Parsed {
    let mut header = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next_if(|l| l.starts_with('#')) {
        let (k, v) = line[2..].split_once('=').unwrap();
        header.push((k.to_owned(), v.to_owned()));
    }
    let columns: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.splitn(columns.len(), ',').map(str::to_owned).collect())
        .collect();
    (header, columns, rows)
}

fn column(columns: &[String], name: &str) -> usize {
    columns.iter().position(|c| c == name).unwrap()
}

fn header_value<'a>(header: &'a [(String, String)], key: &str) -> &'a str {
    &header.iter().find(|(k, _)| k == key).unwrap().1
}

fn histogram_ks(n: &str, out: &Path) -> f64 {
    let out = out.to_str().unwrap();
    ok(&[
        "histogram",
        "--dim",
        "2",
        "--extent",
        "3",
        "--matrix-size",
        n,
        "--samples",
        "50000",
        "--out",
        out,
    ]);
    let (header, _, _) = parse_csv(&std::fs::read_to_string(out).unwrap());
    header_value(&header, "ks").parse().unwrap()
}

#[test]
fn histogram_is_normalized_and_ks_shrinks_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h8.csv");
    histogram_ks("8", &path);
    let (header, columns, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header_value(&header, "N"), "8");
    assert_eq!(rows.len(), 61);
    let (lo, hi, dens) = (
        column(&columns, "bin_lo"),
        column(&columns, "bin_hi"),
        column(&columns, "density"),
    );
    let mass: f64 = rows
        .iter()
        .map(|r| {
            let w = r[hi].parse::<f64>().unwrap() - r[lo].parse::<f64>().unwrap();
            w * r[dens].parse::<f64>().unwrap()
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-9, "{mass}");

    let ks2 = histogram_ks("2", &dir.path().join("h2.csv"));
    let ks16 = histogram_ks("16", &dir.path().join("h16.csv"));
    assert!(ks16 < ks2, "{ks16} vs {ks2}");
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let args = [
        "histogram",
        "--matrix-size",
        "3",
        "--samples",
        "3000",
        "--seed",
        "5",
    ];
    let a = ok(&[&args[..], &["--workers", "1"]].concat());
    let b = ok(&args);
    assert_eq!(a, b);
    let c = ok(&[
        "histogram",
        "--matrix-size",
        "3",
        "--samples",
        "3000",
        "--seed",
        "6",
    ]);
    assert_ne!(a, c);
}

#[test]
fn pairing_rows() {
    let out = ymconc(&["pairings", "--dim", "2", "--extent", "2", "--lmax", "4"]);
    assert!(out.status.success());
    let status = String::from_utf8(out.stderr).unwrap();
    assert!(
        status.contains("l=4 closed=192 brute=192 match=true"),
        "{status}"
    );
    assert!(status.contains("l=3 closed=0 brute=0 match=true"));
    let (_, columns, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(columns, ["l", "D", "L", "K", "closed", "brute", "match"]);
    assert_eq!(rows[3], ["4", "2", "2", "4", "192", "192", "true"]);
}

#[test]
fn moments_pass_at_moderate_n() {
    let text = ok(&[
        "moments",
        "--lmax",
        "4",
        "--dim",
        "2",
        "--extent",
        "4",
        "--matrix-size",
        "6",
        "--samples",
        "20000",
    ]);
    let (_, columns, rows) = parse_csv(&text);
    assert_eq!(
        columns,
        [
            "l",
            "empirical",
            "stderr",
            "target_m_l",
            "N",
            "D",
            "L",
            "K",
            "seed",
            "pass"
        ]
    );
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r[column(&columns, "pass")], "true", "{r:?}");
    }
    let m2: f64 = rows[1][column(&columns, "target_m_l")].parse().unwrap();
    assert!((m2 - 2.0 / 64.0).abs() < 1e-15);
}

#[test]
fn free_energy_strong_rows_match_reference() {
    let text = ok(&[
        "free-energy",
        "--dim",
        "2",
        "--extent",
        "2",
        "--matrix-size",
        "2",
        "--samples",
        "2000",
        "--lambda-min",
        "1",
        "--lambda-max",
        "8",
        "--lambda-steps",
        "15",
    ]);
    let (_, columns, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 15);
    let (l, g, r, d) = (
        column(&columns, "lambda"),
        column(&columns, "f_gaussian"),
        column(&columns, "f_reference"),
        column(&columns, "disagrees"),
    );
    for row in &rows {
        let lambda: f64 = row[l].parse().unwrap();
        if lambda >= 2.0 {
            assert_eq!(row[g], row[r], "{row:?}");
            assert_eq!(row[d], "false");
        } else {
            assert_eq!(row[d], "true", "{row:?}");
        }
    }
}

#[test]
fn json_mirrors_csv() {
    let args = [
        "moments",
        "--matrix-size",
        "2",
        "--samples",
        "500",
        "--lmax",
        "3",
    ];
    let csv = ok(&args);
    let json: serde_json::Value =
        serde_json::from_str(&ok(&[&args[..], &["--format", "json"]].concat())).unwrap();
    let (header, columns, rows) = parse_csv(&csv);
    for (k, v) in &header {
        assert_eq!(json["config"][k.as_str()], serde_json::json!(v));
    }
    let json_rows = json["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (row, obj) in rows.iter().zip(json_rows) {
        for (c, cell) in columns.iter().zip(row) {
            let v = &obj[c.as_str()];
            match v.as_f64() {
                Some(x) => assert_eq!(x, cell.parse::<f64>().unwrap(), "{c}"),
                None => {
                    let rendered = v
                        .as_str()
                        .map(str::to_owned)
                        .unwrap_or_else(|| v.to_string());
                    assert_eq!(&rendered, cell, "{c}");
                }
            }
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "D = 3\nL = 2\nN = 2\nsamples = 300\nseed = 1\nlmax = 2\n",
    )
    .unwrap();
    let text = ok(&["moments", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    let (header, _, rows) = parse_csv(&text);
    assert_eq!(header_value(&header, "D"), "3");
    assert_eq!(header_value(&header, "seed"), "4");
    assert_eq!(rows.len(), 2);
}

#[test]
fn invalid_configs_fail_with_a_message() {
    for args in [
        &["histogram", "--dim", "1"][..],
        &["moments", "--lmax", "9"],
        &["free-energy", "--lambda-min", "-1"],
        &["histogram", "--config", "/nonexistent/run.toml"],
        &["verify", "--only", "42"],
    ] {
        let out = ymconc(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("error"),
            "{args:?}"
        );
    }
}

#[test]
fn sample_config_round_trips() {
    let text = ok(&[
        "sample-config",
        "--dim",
        "3",
        "--extent",
        "2",
        "--matrix-size",
        "2",
        "--seed",
        "8",
    ]);
    let dump = ConfigDump::from_json(&text).unwrap();
    assert_eq!(dump.seed, Some(8));
    let gauge = GaugeConfig::from_dump(&dump).unwrap();
    assert_eq!(gauge.links().len(), 24);
    assert!(gauge.links().iter().all(|u| u.is_unitary()));
}

#[test]
fn verify_subset_passes() {
    let out = ymconc(&["verify", "--only", "2,7,10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
}
