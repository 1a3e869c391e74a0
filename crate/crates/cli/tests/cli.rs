use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wavecorr_testkit::fixtures;

fn wavecorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecorr"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = wavecorr(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn returns_csv(rows: &[Vec<f64>]) -> String {
    let mut s = String::from("t");
    for i in 1..=rows.len() {
        s.push_str(&format!(",A{i}"));
    }
    s.push('\n');
    for t in 0..rows[0].len() {
        s.push_str(&t.to_string());
        for r in rows {
            s.push_str(&format!(",{}", r[t]));
        }
        s.push('\n');
    }
    s
}

/// Rows of a CSV file as string fields, header first.
fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let k = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[k].clone()).collect()
}

fn floats(v: &[String]) -> Vec<f64> {
    v.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn constant_series_have_zero_details() {
    let tmp = tempfile::tempdir().unwrap();
    let mut body = String::from("t,A,B\n");
    for t in 0..200 {
        body.push_str(&format!("{t},5,{}\n", 7.0 * (0.001 * t as f64).exp()));
    }
    let input = write(tmp.path(), "p.csv", &body);
    let out = tmp.path().join("out");
    ok(&["decompose", "--input", input.to_str().unwrap(), "--levels", "2", "--filter", "haar", "--out", out.to_str().unwrap()]);
    // asset B has constant log returns too
    for file in ["crystals_1_A.csv", "crystals_2_B.csv"] {
        let rows = read_csv(&out.join(file));
        assert_eq!(rows[0], ["t", "d1", "d2", "s2"]);
        for d in ["d1", "d2"] {
            assert!(floats(&column(&rows, d)).iter().all(|v| v.abs() < 1e-15), "{file} {d}");
        }
    }
}

#[test]
fn haar_alternating_series_lives_in_d1() {
    let tmp = tempfile::tempdir().unwrap();
    let alt: Vec<f64> = (0..256).map(|t| if t % 2 == 0 { 0.01 } else { -0.01 }).collect();
    let other = fixtures::iid(1, 256, 3).remove(0);
    let input = write(tmp.path(), "r.csv", &returns_csv(&[alt, other]));
    let out = tmp.path().join("out");
    ok(&[
        "decompose", "--input", input.to_str().unwrap(), "--input-kind", "returns",
        "--filter", "haar", "--levels", "3", "--out", out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out.join("crystal_energy.csv"));
    let energy: Vec<f64> = rows[1..5].iter().map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(rows[1][1], "d1");
    let total: f64 = energy.iter().sum();
    assert!((energy[0] - total).abs() < 1e-12 * total, "{energy:?}");
    assert!((total - 256.0 * 1e-4).abs() < 1e-15);
}

#[test]
fn too_many_levels_names_max_level() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = wavecorr(&[
        "decompose", "--synthetic", "iid", "--assets", "3", "--obs", "100",
        "--levels", "9", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("max_level"), "{err}");
    assert!(!out.exists());
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.csv", "t,A,B\n0,1,2\n1,0.0,3\n2,1,2\n");
    let out = tmp.path().join("out");
    let res = wavecorr(&["epps", "--input", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("non-positive price at (row 3, col 2)"));

    let dup = write(tmp.path(), "dup.csv", "t,A,B\n0,1,2\n0,1,3\n");
    let res = wavecorr(&["epps", "--input", dup.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("non-monotone timestamps"));

    let res = wavecorr(&["epps", "--synthetic", "iid", "--filter", "la7", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));

    let identical = write(tmp.path(), "same.csv", &fixtures::price_csv(&fixtures::identical(4, 400, 2)));
    let res = wavecorr(&["optimize", "--input", identical.to_str().unwrap(), "--levels", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("ill-conditioned"));
    assert!(!out.exists(), "failed runs must not leave output behind");
}

#[test]
fn identical_series_dynamics_and_epps() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "p.csv", &fixtures::price_csv(&fixtures::identical(5, 600, 4)));
    let out = tmp.path().join("dyn");
    ok(&["dynamics", "--input", input.to_str().unwrap(), "--window", "200", "--stride", "40", "--levels", "2", "--out", out.to_str().unwrap()]);
    for scale in ["raw", "d1", "d2"] {
        let rows = read_csv(&out.join(format!("dynamics_{scale}.csv")));
        assert!(floats(&column(&rows, "lambda_5")).iter().all(|l| (l - 5.0).abs() < 1e-8));
        assert!(out.join(format!("dynamics_{scale}.svg")).exists());
    }
    let out = tmp.path().join("epps");
    ok(&["epps", "--input", input.to_str().unwrap(), "--levels", "3", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out.join("epps.csv"));
    assert!(floats(&column(&rows, "avg_offdiag_corr")).iter().all(|c| (c - 1.0).abs() < 1e-12));
}

#[test]
fn two_regime_step_shows_in_dynamics() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 10;
    let input = write(tmp.path(), "p.csv", &fixtures::price_csv(&fixtures::two_regime(n, 2000, 0.8, 6)));
    let out = tmp.path().join("out");
    ok(&["dynamics", "--input", input.to_str().unwrap(), "--window", "200", "--stride", "100", "--scales", "raw", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out.join("dynamics_raw.csv"));
    let starts: Vec<usize> = column(&rows, "window_start").iter().map(|s| s.parse().unwrap()).collect();
    let lmax = floats(&column(&rows, &format!("lambda_{n}")));
    let before: Vec<f64> = starts.iter().zip(&lmax).filter(|(s, _)| **s + 200 <= 1000).map(|(_, l)| *l).collect();
    let after: Vec<f64> = starts.iter().zip(&lmax).filter(|(s, _)| **s >= 1000).map(|(_, l)| *l).collect();
    assert!(before.iter().all(|l| *l < 3.0), "{before:?}");
    assert!(after.iter().all(|l| *l > 6.0), "{after:?}");
}

#[test]
fn asynchronous_ticks_epps_column_rises() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&[
        "epps", "--synthetic", "asynchronous-ticks", "--assets", "8", "--obs", "20000",
        "--rho", "0.5", "--tick-prob", "0.3", "--seed", "5", "--levels", "4", "--out", out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out.join("epps.csv"));
    let corr = floats(&column(&rows, "avg_offdiag_corr"));
    assert!(corr[1..].windows(2).all(|w| w[0] < w[1]), "{corr:?}");
}

#[test]
fn iid_epps_column_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&["epps", "--synthetic", "iid", "--assets", "8", "--obs", "20000", "--seed", "2", "--levels", "4", "--out", out.to_str().unwrap()]);
    let corr = floats(&column(&read_csv(&out.join("epps.csv")), "avg_offdiag_corr"));
    assert!(corr.iter().all(|c| c.abs() < 0.03), "{corr:?}");
}

#[test]
fn partition_on_engineered_regimes() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "p.csv", &fixtures::price_csv(&fixtures::drawdown_regimes(8, 200, 4, 10)));
    let out = tmp.path().join("out");
    ok(&["partition", "--input", input.to_str().unwrap(), "--window", "100", "--stride", "20", "--levels", "2", "--min-unbiased", "16", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out.join("partition.csv"));
    let above = floats(&column(&rows, "mean_window_return_above_pct"));
    let below = floats(&column(&rows, "mean_window_return_below_pct"));
    for (a, b) in above.iter().zip(&below) {
        assert!(a < b, "{a} vs {b}");
    }
    assert!(out.join("sdu.csv").exists());

    let out = tmp.path().join("wide");
    ok(&["partition", "--input", input.to_str().unwrap(), "--window", "100", "--stride", "20", "--levels", "1", "--min-unbiased", "16", "--upper", "50", "--lower", "-50", "--out", out.to_str().unwrap()]);
    let rows = read_csv(&out.join("partition.csv"));
    for r in &rows[1..] {
        assert_eq!(&r[2..], ["0", "NA", "NA", "0", "NA", "NA"]);
    }
}

#[test]
fn optimize_isotropic_gmv_is_equal_weight() {
    // Walsh rows: zero mean, equal variance, exactly orthogonal
    let walsh = |k: usize, t: usize| -> f64 {
        if (t & k).count_ones() % 2 == 0 { 0.01 } else { -0.01 }
    };
    let rows: Vec<Vec<f64>> = [1usize, 2, 3, 4, 5]
        .iter()
        .map(|&k| (0..256).map(|t| walsh(k, t % 8)).collect())
        .collect();
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "r.csv", &returns_csv(&rows));
    let out = tmp.path().join("out");
    ok(&[
        "optimize", "--input", input.to_str().unwrap(), "--input-kind", "returns", "--filter", "haar",
        "--levels", "1", "--scales", "raw", "--mu", "0.001,0.002,0.003,0.004,0.005", "--out", out.to_str().unwrap(),
    ]);
    let rows = read_csv(&out.join("gmv.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "raw");
    for w in floats(&rows[1][3..]) {
        assert!((w - 0.2).abs() < 1e-14, "{w}");
    }
    assert!(out.join("frontier.svg").exists());
    let frontier = read_csv(&out.join("frontier.csv"));
    assert_eq!(frontier.len(), 22);
}

#[test]
fn config_file_with_flag_override_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.conf",
        "# one-factor demo\nsynthetic = one-factor\nassets = 4\nobs = 700\nrho = 0.5\nseed = 3\nwindow = 128\nstride = 64\nlevels = 5\n",
    );
    let a = tmp.path().join("a");
    // levels = 5 is too deep for a 128-observation window; the flag fixes it
    let res = wavecorr(&["dynamics", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    ok(&["dynamics", "--config", cfg.to_str().unwrap(), "--levels", "2", "--out", a.to_str().unwrap()]);
    let saved = std::fs::read_to_string(a.join("run_config.txt")).unwrap();
    assert!(saved.contains("levels = 2") && !saved.contains("out ="));

    let b = tmp.path().join("b");
    ok(&["dynamics", "--config", a.join("run_config.txt").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    for f in ["dynamics_long.csv", "dynamics_d2.csv", "eigen_top3.csv", "run_config.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }

    let res = wavecorr(&["dynamics", "--config", write(tmp.path(), "x.conf", "colour = red\n").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn synth_output_feeds_back_as_input() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("s");
    ok(&["synth", "--synthetic", "equicorrelated", "--assets", "3", "--obs", "500", "--rho", "0.6", "--seed", "8", "--out", s.to_str().unwrap()]);
    let prices = s.join("prices.csv");
    assert_eq!(read_csv(&prices).len(), 502);
    let e = tmp.path().join("e");
    ok(&["epps", "--input", prices.to_str().unwrap(), "--levels", "2", "--out", e.to_str().unwrap()]);
    let corr = floats(&column(&read_csv(&e.join("epps.csv")), "avg_offdiag_corr"));
    assert!((corr[0] - 0.6).abs() < 0.1, "{corr:?}");

    let res = wavecorr(&["synth", "--input", prices.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn skip_policy_reports_failed_windows() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rows = fixtures::iid(3, 400, 2);
    for v in rows[1][200..300].iter_mut() {
        *v = 0.0;
    }
    let input = write(tmp.path(), "r.csv", &returns_csv(&rows));
    let base = ["dynamics", "--input", input.to_str().unwrap(), "--input-kind", "returns", "--filter", "haar", "--levels", "1", "--window", "100", "--stride", "100"];
    let out = tmp.path().join("abort");
    let mut args = base.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let res = wavecorr(&args);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("window 2 (start 200)"));

    let out = tmp.path().join("skip");
    let mut args = base.to_vec();
    args.extend(["--on-failure", "skip", "--out", out.to_str().unwrap()]);
    ok(&args);
    let failures = read_csv(&out.join("failures.csv"));
    assert_eq!(failures.len(), 2);
    assert_eq!(failures[1][1], "200");
}
