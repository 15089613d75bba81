//! Black-box checks of the installed binary: exit codes, artifact shape,
//! and byte-level reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcf")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qcf-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// The CSV without its timestamp comment, the only line allowed to vary
/// between identical runs.
fn stable_lines(path: &PathBuf) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# generated="))
        .map(str::to_owned)
        .collect()
}

#[test]
fn identical_specs_produce_byte_identical_csv() {
    let a = scratch("det-a.csv");
    let b = scratch("det-b.csv");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = qcf(&[
            "table2",
            "--N",
            "10",
            "--phi2F",
            "-0.1,-0.2",
            "--seed",
            "7",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(stable_lines(&a), stable_lines(&b));
}

#[test]
fn csv_header_describes_the_run_and_rows_cover_the_grid() {
    let path = scratch("shape.csv");
    let out = qcf(&["table1", "--N", "8,12", "--phi2F", "-0.1,-0.15,-0.2", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    for needle in [
        "# artifact=qcf-cli/",
        "# command=table1",
        "# N=8,12",
        "# K=half",
        "# phiF=1",
        "# phi2F=-0.1,-0.15,-0.2",
        "# seed=0",
        "# status=ok",
        "n,k,phi_f,phi_2f,spectrum_distance,paper_ref",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")).collect();
    assert_eq!(rows.len(), 6);
    // Grid order: sizes outer, couplings inner.
    assert!(rows[0].starts_with("8,4,") && rows[3].starts_with("12,6,"));
    for row in rows {
        let distance: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(distance.is_finite() && distance >= 0.0);
    }
}

#[test]
fn published_reference_column_is_filled_on_the_tabulated_grid() {
    let path = scratch("refs.csv");
    let out = qcf(&["table2", "--N", "10,30", "--phi2F", "-0.1", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let refs: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert!((refs[0] - 1.4563).abs() < 1e-12);
    assert!((refs[1] - 1.5242).abs() < 1e-12);
}

#[test]
fn invalid_geometry_is_rejected_before_any_work() {
    let path = scratch("never-written.csv");
    let out = qcf(&["table2", "--N", "10", "--K", "10", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 <= K < N"));
    assert!(!path.exists());
}

#[test]
fn figure1_emits_a_plot_next_to_the_csv() {
    let path = scratch("fig.csv");
    let out = qcf(&["figure1", "--N", "8,12", "--phi2F", "-0.2,-0.1,0.0", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(path.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2, "one curve per chain size");
    assert!(svg.contains("N = 8") && svg.contains("N = 12"));
}

#[test]
fn figure1_rejects_couplings_outside_the_ratio_domain() {
    let path = scratch("fig-bad.csv");
    let out = qcf(&["figure1", "--N", "8", "--phi2F", "0.1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside (0, 1]"));
}

#[test]
fn uncertifiable_cells_flag_the_artifact_and_exit_nonzero() {
    let path = scratch("degraded.csv");
    let out = qcf(&["witness", "--N", "8", "--K", "1", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# status=degraded"));
    assert!(text.contains("# failed_cell="));
}

#[test]
fn sampled_audits_echo_their_seed_and_respond_to_it() {
    let base = scratch("seed-a.csv");
    let other = scratch("seed-b.csv");
    for (path, seed) in [(&base, "3"), (&other, "4")] {
        let out = qcf(&[
            "u2inf", "--N", "8", "--phi2F", "-0.15", "--seed", seed, "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read_to_string(&base).unwrap();
    assert!(a.contains("# seed=3") && a.contains("# samples=1000"));
    // Different seeds sample different states, so the observed maxima move.
    let max_ratio = |text: &str| -> f64 {
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
            .map(|l| l.split(',').nth(9).unwrap().parse::<f64>().unwrap())
            .next()
            .unwrap()
    };
    let b = std::fs::read_to_string(&other).unwrap();
    assert_ne!(max_ratio(&a), max_ratio(&b));
}
