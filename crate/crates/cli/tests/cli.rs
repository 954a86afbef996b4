//! End-to-end runs of the `mramsim` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mramsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mramsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("MRAMSIM_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_reports_a_correct_read() {
    let dir = tempfile::tempdir().unwrap();
    let o = mramsim(
        dir.path(),
        &[
            "simulate",
            "--design",
            "nvsa-1ref",
            "--state",
            "AP",
            "--out",
            "one",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("decision:     AP"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("one.json")).unwrap()).unwrap();
    assert_eq!(json["design_id"], "nvsa-1ref");
    assert!(dir.path().join("one.csv").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--design", "bogus"][..],
        &["montecarlo", "--design", "csa-1ref", "--samples", "0"],
        &["montecarlo", "--design", "csa-1ref", "--sigma-vth", "-1"],
        &["simulate"],
    ] {
        let o = mramsim(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {o:?}");
    }
}

#[test]
fn zero_threads_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mramsim"))
        .args(["simulate", "--design", "csa-1ref"])
        .current_dir(dir.path())
        .env("MRAMSIM_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn netlist_waveforms_are_dumped() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("rc.sp"),
        "V1 a 0 DC 1\nR1 a b 1k\nC1 b 0 50f\n",
    )
    .unwrap();
    let o = mramsim(
        dir.path(),
        &[
            "simulate",
            "--netlist",
            "rc.sp",
            "--dump-waves",
            "w.csv",
            "--tstop",
            "100p",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let waves = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let mut lines = waves.lines();
    assert_eq!(lines.next(), Some("t,a,b"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn montecarlo_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        [
            "montecarlo",
            "--design",
            "vsa-3s",
            "--samples",
            "6",
            "--seed",
            "9",
            "--out",
            out,
        ]
    };
    assert!(mramsim(dir.path(), &args("a")).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_mramsim"))
        .args(args("b"))
        .current_dir(dir.path())
        .env("MRAMSIM_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next(),
        Some("index,decision,correct,delay_ps,power_uw,sense_margin_mv,converged")
    );
    assert_eq!(lines.count(), 6);
}

#[test]
fn sweep_covers_every_design_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = mramsim(dir.path(), &["sweep", "--samples", "1", "--out", "sw"]);
    assert!(o.status.success(), "{o:?}");
    let csv = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "design,state,power_uw,delay_ps,errors");
    assert_eq!(rows.len(), 11);
    let keys: Vec<String> = rows[1..]
        .iter()
        .map(|r| r.split(',').take(2).collect::<Vec<_>>().join(" "))
        .collect();
    assert_eq!(keys[0], "csa-1ref P");
    assert_eq!(keys[1], "csa-1ref AP");
    assert_eq!(keys[9], "nvsa-3s AP");
    assert!(stdout(&o).contains("nvsa-3s"));
}

#[test]
fn histograms_from_sampling_and_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = mramsim(
        dir.path(),
        &[
            "histogram",
            "--quantity",
            "resistance",
            "--samples",
            "500",
            "--bins",
            "20",
            "--out",
            "r.svg",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let svg = fs::read_to_string(dir.path().join("r.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("n = 500"));
    assert!(svg.matches(r#"class="bar""#).count() <= 20);

    assert!(mramsim(
        dir.path(),
        &[
            "montecarlo",
            "--design",
            "csa-1ref",
            "--samples",
            "3",
            "--out",
            "mc"
        ]
    )
    .status
    .success());
    let o = mramsim(
        dir.path(),
        &[
            "histogram",
            "--input",
            "mc.csv",
            "--quantity",
            "power",
            "--out",
            "p.svg",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(fs::read_to_string(dir.path().join("p.svg"))
        .unwrap()
        .contains("n = 3"));
}

#[test]
fn empty_histogram_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("empty.csv"),
        "index,decision,correct,delay_ps,power_uw,sense_margin_mv,converged\n",
    )
    .unwrap();
    let o = mramsim(
        dir.path(),
        &["histogram", "--input", "empty.csv", "--quantity", "delay"],
    );
    assert_eq!(o.status.code(), Some(2), "{o:?}");
    assert!(!dir.path().join("histogram.svg").exists());
}
